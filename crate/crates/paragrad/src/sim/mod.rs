//! Dense statevector simulation.
//!
//! Qubit `q` corresponds to bit `q` of the computational-basis index, so
//! qubit 0 is the least significant bit and the first letter of a Pauli word
//! string. States are `2^n` complex amplitude vectors; every gate preserves
//! the norm to better than 1e-10.
//!
//! Gate set: Pauli-word rotations `exp(-i θ W)` (applied exactly through the
//! `cos θ · I - i sin θ · W` decomposition, valid for Hermitian words with ±1
//! eigenvalues), a small named Clifford family, subcircuits controlled on a
//! qubit value, and global phases. The fixed single-qubit conventions are
//!
//! ```text
//!     H    = (X + Z)/√2          H_xy = (X + Y)/√2       H_zy = (Z + Y)/√2
//!     S    = diag(1, i)          CZ   = diag(1,1,1,-1)
//! ```
//!
//! so that `H_xy` conjugates X↔Y (and Z → -Z) and `H_zy` conjugates Z↔Y
//! (and X → -X); the conjugation identities are asserted by the test suite
//! against dense 2x2 matrices.

pub mod param;
mod text;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

pub use text::{parse_circuit, write_circuit};

/// Powers of i as complex numbers.
pub(crate) const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Named Clifford gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordKind {
    H,
    Hxy,
    Hzy,
    S,
    Cz,
    Cnot,
}

impl CliffordKind {
    pub fn arity(self) -> usize {
        match self {
            CliffordKind::H | CliffordKind::Hxy | CliffordKind::Hzy | CliffordKind::S => 1,
            CliffordKind::Cz | CliffordKind::Cnot => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CliffordKind::H => "h",
            CliffordKind::Hxy => "hxy",
            CliffordKind::Hzy => "hzy",
            CliffordKind::S => "s",
            CliffordKind::Cz => "cz",
            CliffordKind::Cnot => "cnot",
        }
    }
}

/// One gate descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(-i angle word)` for a Hermitian Pauli word.
    Rotation { angle: f64, word: PauliString },
    /// A named Clifford on explicit targets (`arity` qubits).
    Clifford { kind: CliffordKind, targets: Vec<usize> },
    /// The body applied on the subspace where `control` equals `value`.
    Controlled { control: usize, value: bool, body: Vec<Gate> },
    /// Multiplies the state by `i^i_exp`.
    GlobalPhase { i_exp: u8 },
}

impl Gate {
    fn support(&self, acc: &mut u64) {
        match self {
            Gate::Rotation { word, .. } => *acc |= word.x_bits() | word.z_bits(),
            Gate::Clifford { targets, .. } => {
                for &t in targets {
                    *acc |= 1 << t;
                }
            }
            Gate::Controlled { control, body, .. } => {
                *acc |= 1 << control;
                for g in body {
                    g.support(acc);
                }
            }
            Gate::GlobalPhase { .. } => {}
        }
    }
}

/// An ordered list of gates on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.validate_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn rotation(&mut self, angle: f64, word: PauliString) -> Result<()> {
        self.push(Gate::Rotation { angle, word })
    }

    pub fn clifford(&mut self, kind: CliffordKind, targets: &[usize]) -> Result<()> {
        self.push(Gate::Clifford { kind, targets: targets.to_vec() })
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.clifford(CliffordKind::H, &[q])
    }

    pub fn hxy(&mut self, q: usize) -> Result<()> {
        self.clifford(CliffordKind::Hxy, &[q])
    }

    pub fn hzy(&mut self, q: usize) -> Result<()> {
        self.clifford(CliffordKind::Hzy, &[q])
    }

    pub fn s(&mut self, q: usize) -> Result<()> {
        self.clifford(CliffordKind::S, &[q])
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.clifford(CliffordKind::Cz, &[a, b])
    }

    pub fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.clifford(CliffordKind::Cnot, &[c, t])
    }

    pub fn global_phase(&mut self, i_exp: u8) -> Result<()> {
        self.push(Gate::GlobalPhase { i_exp: i_exp % 4 })
    }

    /// Appends `body` controlled on `control` having the given value.
    pub fn controlled(&mut self, control: usize, value: bool, body: Circuit) -> Result<()> {
        if body.n != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: body.n });
        }
        self.push(Gate::Controlled { control, value, body: body.gates })
    }

    fn validate_gate(&self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Rotation { word, .. } => {
                if word.n_qubits() != self.n {
                    return Err(Error::DimensionMismatch { left: self.n, right: word.n_qubits() });
                }
                if !word.is_hermitian() {
                    return Err(Error::NonHermitian { phase_exp: word.phase_exp() });
                }
            }
            Gate::Clifford { kind, targets } => {
                if targets.len() != kind.arity() {
                    return Err(Error::UnsupportedGate(format!(
                        "{} expects {} targets, got {}",
                        kind.name(),
                        kind.arity(),
                        targets.len()
                    )));
                }
                for &t in targets {
                    if t >= self.n {
                        return Err(Error::QubitOutOfRange { qubit: t, n_qubits: self.n });
                    }
                }
                if kind.arity() == 2 && targets[0] == targets[1] {
                    return Err(Error::UnsupportedGate("two-qubit gate on equal targets".into()));
                }
            }
            Gate::Controlled { control, body, .. } => {
                if *control >= self.n {
                    return Err(Error::QubitOutOfRange { qubit: *control, n_qubits: self.n });
                }
                let mut support = 0u64;
                for g in body {
                    if let Gate::Controlled { .. } = g {
                        return Err(Error::UnsupportedGate("nested controlled subcircuit".into()));
                    }
                    self.validate_gate(g)?;
                    g.support(&mut support);
                }
                if support >> control & 1 == 1 {
                    return Err(Error::ControlOverlap { control: *control });
                }
            }
            Gate::GlobalPhase { .. } => {}
        }
        Ok(())
    }

    /// Conjugates a Pauli word by this circuit: returns `C P C†` with the
    /// exact phase. Only defined when every gate is Clifford (rotations and
    /// controlled subcircuits are rejected); global phases cancel.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.n_qubits() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: p.n_qubits() });
        }
        let mut x = p.x_bits();
        let mut z = p.z_bits();
        let mut phase = p.phase_exp();
        for gate in &self.gates {
            match gate {
                Gate::Clifford { kind, targets } => {
                    conjugate_clifford(*kind, targets, &mut x, &mut z, &mut phase);
                }
                Gate::GlobalPhase { .. } => {}
                other => {
                    return Err(Error::UnsupportedGate(format!(
                        "conjugation through non-Clifford gate {other:?}"
                    )))
                }
            }
        }
        Ok(PauliString::from_bits(self.n, x, z, phase))
    }
}

/// Bitwise tableau update for `g P g†` on the (x, z, phase) representation.
pub(crate) fn conjugate_clifford(kind: CliffordKind, targets: &[usize], x: &mut u64, z: &mut u64, phase: &mut u8) {
    let bit = |m: u64, q: usize| m >> q & 1 == 1;
    match kind {
        CliffordKind::H => {
            let q = targets[0];
            let (xq, zq) = (bit(*x, q), bit(*z, q));
            if xq && zq {
                *phase = (*phase + 2) % 4; // Y -> -Y
            }
            if xq != zq {
                *x ^= 1 << q;
                *z ^= 1 << q;
            }
        }
        CliffordKind::Hxy => {
            let q = targets[0];
            let (xq, zq) = (bit(*x, q), bit(*z, q));
            if zq && !xq {
                *phase = (*phase + 2) % 4; // Z -> -Z
            }
            if xq {
                *z ^= 1 << q; // X <-> Y
            }
        }
        CliffordKind::Hzy => {
            let q = targets[0];
            let (xq, zq) = (bit(*x, q), bit(*z, q));
            if xq && !zq {
                *phase = (*phase + 2) % 4; // X -> -X
            }
            if zq {
                *x ^= 1 << q; // Z <-> Y
            }
        }
        CliffordKind::S => {
            let q = targets[0];
            let (xq, zq) = (bit(*x, q), bit(*z, q));
            if xq && zq {
                *phase = (*phase + 2) % 4; // Y -> -X
            }
            if xq {
                *z ^= 1 << q; // X -> Y
            }
        }
        CliffordKind::Cz => {
            let (a, b) = (targets[0], targets[1]);
            let (xa, za) = (bit(*x, a), bit(*z, a));
            let (xb, zb) = (bit(*x, b), bit(*z, b));
            if xa && xb && (za != zb) {
                *phase = (*phase + 2) % 4;
            }
            if xa {
                *z ^= 1 << b;
            }
            if xb {
                *z ^= 1 << a;
            }
        }
        CliffordKind::Cnot => {
            let (c, t) = (targets[0], targets[1]);
            let (xc, zc) = (bit(*x, c), bit(*z, c));
            let (xt, zt) = (bit(*x, t), bit(*z, t));
            if xc && zt && !(xt != zc) {
                *phase = (*phase + 2) % 4;
            }
            if xc {
                *x ^= 1 << t;
            }
            if zt {
                *z ^= 1 << c;
            }
        }
    }
}

/// A normalized vector of `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state.
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1 && n <= 28, "statevector qubit count out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch { left: 1 << n, right: amps.len() });
        }
        let state = StateVector { n, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Parse(format!("amplitudes not normalized: |ψ| = {norm}")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_word(&self, word: &PauliString) -> Result<()> {
        if word.n_qubits() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: word.n_qubits() });
        }
        Ok(())
    }

    /// Applies the word `i^p W` to the state (out of place).
    pub fn apply_word(&self, word: &PauliString) -> Result<StateVector> {
        self.check_word(word)?;
        let x = word.x_bits();
        let z = word.z_bits();
        let head = I_POW[((word.phase_exp() as u32 + (x & z).count_ones()) % 4) as usize];
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, amp) in self.amps.iter().enumerate() {
            let sign = if ((b as u64 & z).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            out[b ^ x as usize] = head * sign * amp;
        }
        Ok(StateVector { n: self.n, amps: out })
    }

    /// Applies `Σ_t c_t W_t` to the state (not unitary; used for adjoints
    /// and expectation machinery).
    pub fn apply_sum(&self, sum: &PauliSum) -> Result<StateVector> {
        if sum.n_qubits() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: sum.n_qubits() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for &(c, word) in sum.terms() {
            let x = word.x_bits();
            let z = word.z_bits();
            let head = c * I_POW[(((x & z).count_ones()) % 4) as usize];
            for (b, amp) in self.amps.iter().enumerate() {
                let sign = if ((b as u64 & z).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                out[b ^ x as usize] += head * sign * amp;
            }
        }
        Ok(StateVector { n: self.n, amps: out })
    }

    /// Exact `⟨ψ| i^p W |ψ⟩`.
    pub fn expectation_word(&self, word: &PauliString) -> Result<Complex64> {
        self.check_word(word)?;
        let x = word.x_bits() as usize;
        let z = word.z_bits();
        let head = I_POW[((word.phase_exp() as u32 + (word.x_bits() & z).count_ones()) % 4) as usize];
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, amp) in self.amps.iter().enumerate() {
            let sign = if ((b as u64 & z).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amps[b ^ x].conj() * sign * amp;
        }
        Ok(head * acc)
    }

    /// Exact `⟨ψ| obs |ψ⟩` for a Hermitian observable; the imaginary part is
    /// checked to vanish.
    pub fn expectation(&self, obs: &PauliSum) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c, word) in obs.terms() {
            acc += c * self.expectation_word(&word)?;
        }
        debug_assert!(acc.im.abs() < 1e-9, "non-real expectation {acc}");
        Ok(acc.re)
    }

    /// Basis-state probabilities `P(i) = |amplitude_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws `shots` i.i.d. basis-state indices; deterministic given the RNG.
    pub fn sample_indices(&self, shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
        let probs = self.probabilities();
        sample_from_probabilities(&probs, shots, rng)
    }

    /// Applies one validated gate (or its inverse) without re-validating.
    pub(crate) fn apply_gate_raw(&mut self, gate: &Gate, inverse: bool) {
        apply_gate_masked(&mut self.amps, gate, None, inverse);
    }

    pub fn apply_rotation(&mut self, angle: f64, word: &PauliString) -> Result<()> {
        self.check_word(word)?;
        if !word.is_hermitian() {
            return Err(Error::NonHermitian { phase_exp: word.phase_exp() });
        }
        apply_rotation_masked(&mut self.amps, angle, word, None);
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let circuit = Circuit { n: self.n, gates: vec![gate.clone()] };
        self.apply_circuit(&circuit)
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: circuit.n });
        }
        for gate in &circuit.gates {
            circuit.validate_gate(gate)?;
            apply_gate_masked(&mut self.amps, gate, None, false);
        }
        Ok(())
    }

    /// Applies the inverse circuit (gates reversed and individually inverted).
    pub fn apply_circuit_inverse(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: circuit.n });
        }
        for gate in circuit.gates.iter().rev() {
            circuit.validate_gate(gate)?;
            apply_gate_masked(&mut self.amps, gate, None, true);
        }
        Ok(())
    }
}

/// Stand-alone multinomial sampler over an explicit distribution.
pub fn sample_from_probabilities(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    (0..shots)
        .map(|_| {
            let u: f64 = rng.gen::<f64>() * total;
            match cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                Ok(i) => i as u64,
                Err(i) => (i.min(cdf.len() - 1)) as u64,
            }
        })
        .collect()
}

type Ctrl = Option<(u64, bool)>;

fn ctrl_ok(b: usize, ctrl: Ctrl) -> bool {
    match ctrl {
        None => true,
        Some((mask, value)) => ((b as u64 & mask) != 0) == value,
    }
}

pub(crate) fn apply_gate_masked(amps: &mut [Complex64], gate: &Gate, ctrl: Ctrl, inverse: bool) {
    match gate {
        Gate::Rotation { angle, word } => {
            let a = if inverse { -angle } else { *angle };
            apply_rotation_masked(amps, a, word, ctrl);
        }
        Gate::Clifford { kind, targets } => apply_clifford_masked(amps, *kind, targets, ctrl, inverse),
        Gate::Controlled { control, value, body } => {
            debug_assert!(ctrl.is_none(), "nested control");
            let mask = (1u64 << control, *value);
            if inverse {
                for g in body.iter().rev() {
                    apply_gate_masked(amps, g, Some(mask), true);
                }
            } else {
                for g in body {
                    apply_gate_masked(amps, g, Some(mask), false);
                }
            }
        }
        Gate::GlobalPhase { i_exp } => {
            let k = if inverse { (4 - i_exp) % 4 } else { *i_exp };
            let f = I_POW[k as usize];
            for (b, amp) in amps.iter_mut().enumerate() {
                if ctrl_ok(b, ctrl) {
                    *amp *= f;
                }
            }
        }
    }
}

fn apply_rotation_masked(amps: &mut [Complex64], angle: f64, word: &PauliString, ctrl: Ctrl) {
    let x = word.x_bits();
    let z = word.z_bits();
    let (c, s) = (angle.cos(), angle.sin());
    let mis = Complex64::new(0.0, -s);
    let head = I_POW[((word.phase_exp() as u32 + (x & z).count_ones()) % 4) as usize];
    if x == 0 {
        // Diagonal word: amp *= cos - i sin * (±1).
        let head = head.re; // Hermitian diagonal word has real prefactor
        for (b, amp) in amps.iter_mut().enumerate() {
            if !ctrl_ok(b, ctrl) {
                continue;
            }
            let f = if ((b as u64 & z).count_ones()) % 2 == 0 { head } else { -head };
            *amp *= Complex64::new(c, -s * f);
        }
        return;
    }
    let pivot = 1usize << x.trailing_zeros();
    let xm = x as usize;
    if z == 0 && word.phase_exp() == 0 {
        // Pure X-type word: both pair factors are +1.
        for b in 0..amps.len() {
            if b & pivot != 0 || !ctrl_ok(b, ctrl) {
                continue;
            }
            let p = b ^ xm;
            let (ab, ap) = (amps[b], amps[p]);
            amps[b] = c * ab + mis * ap;
            amps[p] = c * ap + mis * ab;
        }
        return;
    }
    for b in 0..amps.len() {
        if b & pivot != 0 || !ctrl_ok(b, ctrl) {
            continue;
        }
        let p = b ^ xm;
        let fb = if ((b as u64 & z).count_ones()) % 2 == 0 { head } else { -head };
        let fp = if ((p as u64 & z).count_ones()) % 2 == 0 { head } else { -head };
        let (ab, ap) = (amps[b], amps[p]);
        amps[b] = c * ab + mis * fp * ap;
        amps[p] = c * ap + mis * fb * ab;
    }
}

fn apply_clifford_masked(amps: &mut [Complex64], kind: CliffordKind, targets: &[usize], ctrl: Ctrl, inverse: bool) {
    match kind {
        CliffordKind::H => {
            let q = 1usize << targets[0];
            for b in 0..amps.len() {
                if b & q != 0 || !ctrl_ok(b, ctrl) {
                    continue;
                }
                let (a0, a1) = (amps[b], amps[b | q]);
                amps[b] = FRAC_1_SQRT_2 * (a0 + a1);
                amps[b | q] = FRAC_1_SQRT_2 * (a0 - a1);
            }
        }
        CliffordKind::Hxy => {
            // (X+Y)/√2 = [[0, 1-i], [1+i, 0]]/√2; Hermitian, self-inverse.
            let q = 1usize << targets[0];
            let u01 = Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
            let u10 = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
            for b in 0..amps.len() {
                if b & q != 0 || !ctrl_ok(b, ctrl) {
                    continue;
                }
                let (a0, a1) = (amps[b], amps[b | q]);
                amps[b] = u01 * a1;
                amps[b | q] = u10 * a0;
            }
        }
        CliffordKind::Hzy => {
            // (Z+Y)/√2 = [[1, -i], [i, -1]]/√2; Hermitian, self-inverse.
            let q = 1usize << targets[0];
            let mi = Complex64::new(0.0, -1.0);
            let pi = Complex64::new(0.0, 1.0);
            for b in 0..amps.len() {
                if b & q != 0 || !ctrl_ok(b, ctrl) {
                    continue;
                }
                let (a0, a1) = (amps[b], amps[b | q]);
                amps[b] = FRAC_1_SQRT_2 * (a0 + mi * a1);
                amps[b | q] = FRAC_1_SQRT_2 * (pi * a0 - a1);
            }
        }
        CliffordKind::S => {
            let q = 1usize << targets[0];
            let f = if inverse { Complex64::new(0.0, -1.0) } else { Complex64::new(0.0, 1.0) };
            for (b, amp) in amps.iter_mut().enumerate() {
                if b & q != 0 && ctrl_ok(b, ctrl) {
                    *amp *= f;
                }
            }
        }
        CliffordKind::Cz => {
            let m = (1usize << targets[0]) | (1usize << targets[1]);
            for (b, amp) in amps.iter_mut().enumerate() {
                if b & m == m && ctrl_ok(b, ctrl) {
                    *amp = -*amp;
                }
            }
        }
        CliffordKind::Cnot => {
            let c = 1usize << targets[0];
            let t = 1usize << targets[1];
            for b in 0..amps.len() {
                if b & c == c && b & t == 0 && ctrl_ok(b, ctrl) {
                    amps.swap(b, b | t);
                }
            }
        }
    }
}

/// Builds the data-encoding circuit `⊗_r exp(-i x_r / 4 · Y_r)`.
///
/// Encoding a cyclically shifted vector equals composing the original
/// encoding with the corresponding qubit shift.
pub fn encode_data(x: &[f64]) -> Result<Circuit> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Parse("empty data vector".into()));
    }
    let mut circuit = Circuit::new(n);
    for (r, &v) in x.iter().enumerate() {
        circuit.rotation(v / 4.0, PauliString::single(n, r, crate::pauli::Letter::Y))?;
    }
    Ok(circuit)
}
