//! Dense-matrix reference implementations.
//!
//! Everything here is built from first principles (explicit 2x2 matrices and
//! Kronecker products) and deliberately shares no code with the bitwise
//! simulator or the tableau conjugation rules, so it can serve as an
//! independent oracle in tests. The [`exact`] submodule mirrors the same
//! constructions over Gaussian integers scaled by powers of √2, which makes
//! Clifford conjugation identities checkable with exact integer arithmetic.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum};
use crate::sim::{Circuit, CliffordKind, Gate};

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The four 2x2 Pauli matrices.
pub fn letter_matrix(letter: Letter) -> CMat {
    match letter {
        Letter::I => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        Letter::X => CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        Letter::Y => CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        Letter::Z => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    }
}

/// Kronecker product with `a` on the high-order index bits.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Dense matrix of a Pauli word, with qubit 0 on the least significant bit.
pub fn pauli_matrix(p: &PauliString) -> CMat {
    let mut m = CMat::identity(1, 1);
    for q in 0..p.n_qubits() {
        m = kron(&letter_matrix(p.letter_at(q)), &m);
    }
    let phase = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][p.phase_exp() as usize];
    m * phase
}

/// Dense matrix of a weighted Pauli sum.
pub fn sum_matrix(s: &PauliSum) -> CMat {
    let dim = 1usize << s.n_qubits();
    let mut m = CMat::zeros(dim, dim);
    for &(coeff, word) in s.terms() {
        m += pauli_matrix(&word) * c(coeff, 0.0);
    }
    m
}

fn clifford_2x2(kind: CliffordKind) -> CMat {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        CliffordKind::H => CMat::from_row_slice(2, 2, &[c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]),
        CliffordKind::Hxy => CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(r, -r), c(r, r), c(0.0, 0.0)]),
        CliffordKind::Hzy => CMat::from_row_slice(2, 2, &[c(r, 0.0), c(0.0, -r), c(0.0, r), c(-r, 0.0)]),
        CliffordKind::S => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
        _ => unreachable!("two-qubit kind"),
    }
}

fn embed_single(n: usize, q: usize, u: &CMat) -> CMat {
    let mut m = CMat::identity(1, 1);
    for k in 0..n {
        let f = if k == q { u.clone() } else { CMat::identity(2, 2) };
        m = kron(&f, &m);
    }
    m
}

/// Dense unitary of one gate on `n` qubits.
pub fn gate_matrix(n: usize, gate: &Gate) -> Result<CMat> {
    let dim = 1usize << n;
    match gate {
        Gate::Rotation { angle, word } => {
            // cos θ I - i sin θ W, exact for Hermitian words.
            let w = pauli_matrix(word);
            Ok(CMat::identity(dim, dim) * c(angle.cos(), 0.0) + w * c(0.0, -angle.sin()))
        }
        Gate::Clifford { kind, targets } => match kind {
            CliffordKind::H | CliffordKind::Hxy | CliffordKind::Hzy | CliffordKind::S => {
                Ok(embed_single(n, targets[0], &clifford_2x2(*kind)))
            }
            CliffordKind::Cz => {
                let (a, b) = (targets[0], targets[1]);
                let mut m = CMat::zeros(dim, dim);
                for i in 0..dim {
                    let sign = if i >> a & 1 == 1 && i >> b & 1 == 1 { -1.0 } else { 1.0 };
                    m[(i, i)] = c(sign, 0.0);
                }
                Ok(m)
            }
            CliffordKind::Cnot => {
                let (ctrl, t) = (targets[0], targets[1]);
                let mut m = CMat::zeros(dim, dim);
                for i in 0..dim {
                    let j = if i >> ctrl & 1 == 1 { i ^ (1 << t) } else { i };
                    m[(j, i)] = c(1.0, 0.0);
                }
                Ok(m)
            }
        },
        Gate::Controlled { control, value, body } => {
            let mut u = CMat::identity(dim, dim);
            for g in body {
                u = gate_matrix(n, g)? * u;
            }
            let mut m = CMat::zeros(dim, dim);
            for col in 0..dim {
                let active = (col >> control & 1 == 1) == *value;
                if active {
                    for row in 0..dim {
                        m[(row, col)] = u[(row, col)];
                    }
                } else {
                    m[(col, col)] = c(1.0, 0.0);
                }
            }
            Ok(m)
        }
        Gate::GlobalPhase { i_exp } => {
            let f = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][*i_exp as usize];
            Ok(CMat::identity(dim, dim) * f)
        }
    }
}

/// Dense unitary of a whole circuit (last gate leftmost).
pub fn circuit_unitary(circuit: &Circuit) -> Result<CMat> {
    let n = circuit.n_qubits();
    let dim = 1usize << n;
    let mut u = CMat::identity(dim, dim);
    for gate in circuit.gates() {
        u = gate_matrix(n, gate)? * u;
    }
    Ok(u)
}

/// Max-norm distance between two matrices.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|e| e.norm()).fold(0.0, f64::max)
}

/// Checks `‖AB - BA‖ = 0` numerically.
pub fn matrices_commute(a: &CMat, b: &CMat, tol: f64) -> bool {
    max_abs_diff(&(a * b), &(b * a)) <= tol
}

pub mod exact {
    //! Matrices over Gaussian integers divided by powers of √2.
    //!
    //! A value is stored as `entries / √2^k`. Products add the exponents and
    //! multiply entries exactly in `i64` arithmetic, so conjugation chains
    //! through H-like gates (which carry one factor of 1/√2 each) stay exact.
    //! Comparing against an integer matrix reduces the exponent first and
    //! fails if an irrational factor is left over.

    use super::*;

    /// A Gaussian integer `re + i·im`.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct GaussInt {
        pub re: i64,
        pub im: i64,
    }

    impl GaussInt {
        pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
        pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };
        pub const I: GaussInt = GaussInt { re: 0, im: 1 };

        pub fn new(re: i64, im: i64) -> Self {
            GaussInt { re, im }
        }

        fn mul(self, other: GaussInt) -> GaussInt {
            GaussInt {
                re: self.re * other.re - self.im * other.im,
                im: self.re * other.im + self.im * other.re,
            }
        }

        fn add(self, other: GaussInt) -> GaussInt {
            GaussInt { re: self.re + other.re, im: self.im + other.im }
        }

        fn conj(self) -> GaussInt {
            GaussInt { re: self.re, im: -self.im }
        }

        fn halve(self) -> Option<GaussInt> {
            if self.re % 2 == 0 && self.im % 2 == 0 {
                Some(GaussInt { re: self.re / 2, im: self.im / 2 })
            } else {
                None
            }
        }
    }

    /// `entries / √2^sqrt2_exp`, row-major square matrix.
    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct ExactMat {
        pub dim: usize,
        pub sqrt2_exp: u32,
        pub entries: Vec<GaussInt>,
    }

    impl ExactMat {
        pub fn zeros(dim: usize) -> Self {
            ExactMat { dim, sqrt2_exp: 0, entries: vec![GaussInt::ZERO; dim * dim] }
        }

        pub fn identity(dim: usize) -> Self {
            let mut m = Self::zeros(dim);
            for i in 0..dim {
                m.entries[i * dim + i] = GaussInt::ONE;
            }
            m
        }

        pub fn at(&self, r: usize, c: usize) -> GaussInt {
            self.entries[r * self.dim + c]
        }

        fn set(&mut self, r: usize, c: usize, v: GaussInt) {
            self.entries[r * self.dim + c] = v;
        }

        pub fn mul(&self, other: &ExactMat) -> ExactMat {
            assert_eq!(self.dim, other.dim);
            let mut out = ExactMat::zeros(self.dim);
            out.sqrt2_exp = self.sqrt2_exp + other.sqrt2_exp;
            for r in 0..self.dim {
                for k in 0..self.dim {
                    let a = self.at(r, k);
                    if a == GaussInt::ZERO {
                        continue;
                    }
                    for c in 0..self.dim {
                        let v = out.at(r, c).add(a.mul(other.at(k, c)));
                        out.set(r, c, v);
                    }
                }
            }
            out
        }

        pub fn dagger(&self) -> ExactMat {
            let mut out = ExactMat::zeros(self.dim);
            out.sqrt2_exp = self.sqrt2_exp;
            for r in 0..self.dim {
                for c in 0..self.dim {
                    out.set(c, r, self.at(r, c).conj());
                }
            }
            out
        }

        pub fn kron(&self, other: &ExactMat) -> ExactMat {
            let dim = self.dim * other.dim;
            let mut out = ExactMat::zeros(dim);
            out.sqrt2_exp = self.sqrt2_exp + other.sqrt2_exp;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let a = self.at(i, j);
                    for k in 0..other.dim {
                        for l in 0..other.dim {
                            out.set(i * other.dim + k, j * other.dim + l, a.mul(other.at(k, l)));
                        }
                    }
                }
            }
            out
        }

        pub fn scale(&self, f: GaussInt) -> ExactMat {
            let mut out = self.clone();
            for e in &mut out.entries {
                *e = e.mul(f);
            }
            out
        }

        /// Divides out paired √2 factors while all entries stay integral.
        pub fn normalized(&self) -> ExactMat {
            let mut out = self.clone();
            'reduce: while out.sqrt2_exp >= 2 {
                let halved: Option<Vec<GaussInt>> = out.entries.iter().map(|e| e.halve()).collect();
                match halved {
                    Some(entries) => {
                        out.entries = entries;
                        out.sqrt2_exp -= 2;
                    }
                    None => break 'reduce,
                }
            }
            out
        }

        /// True when the value equals an integer matrix exactly.
        pub fn equals_integer(&self, other: &ExactMat) -> bool {
            assert_eq!(other.sqrt2_exp, 0, "reference must be an integer matrix");
            let a = self.normalized();
            a.sqrt2_exp == 0 && a.dim == other.dim && a.entries == other.entries
        }
    }

    fn letter_exact(letter: Letter) -> ExactMat {
        let e = |entries: [GaussInt; 4]| ExactMat { dim: 2, sqrt2_exp: 0, entries: entries.to_vec() };
        let z = GaussInt::ZERO;
        let o = GaussInt::ONE;
        let i = GaussInt::I;
        let neg = |g: GaussInt| GaussInt::new(-g.re, -g.im);
        match letter {
            Letter::I => e([o, z, z, o]),
            Letter::X => e([z, o, o, z]),
            Letter::Y => e([z, neg(i), i, z]),
            Letter::Z => e([o, z, z, neg(o)]),
        }
    }

    /// Exact matrix of a Pauli word.
    pub fn pauli_exact(p: &PauliString) -> ExactMat {
        let mut m = ExactMat::identity(1);
        for q in 0..p.n_qubits() {
            m = letter_exact(p.letter_at(q)).kron(&m);
        }
        let phase = [GaussInt::ONE, GaussInt::I, GaussInt::new(-1, 0), GaussInt::new(0, -1)];
        m.scale(phase[p.phase_exp() as usize])
    }

    fn clifford_exact_2x2(kind: CliffordKind) -> ExactMat {
        let z = GaussInt::ZERO;
        let o = GaussInt::ONE;
        let i = GaussInt::I;
        let g = |re: i64, im: i64| GaussInt::new(re, im);
        let m = |sqrt2_exp: u32, entries: [GaussInt; 4]| ExactMat { dim: 2, sqrt2_exp, entries: entries.to_vec() };
        match kind {
            CliffordKind::H => m(1, [o, o, o, g(-1, 0)]),
            CliffordKind::Hxy => m(1, [z, g(1, -1), g(1, 1), z]),
            CliffordKind::Hzy => m(1, [o, g(0, -1), i, g(-1, 0)]),
            CliffordKind::S => m(0, [o, z, z, i]),
            _ => unreachable!("two-qubit kind"),
        }
    }

    /// Exact unitary of a Clifford-only circuit.
    pub fn circuit_exact(circuit: &Circuit) -> Result<ExactMat> {
        let n = circuit.n_qubits();
        let dim = 1usize << n;
        let mut u = ExactMat::identity(dim);
        for gate in circuit.gates() {
            let g = match gate {
                Gate::Clifford { kind, targets } => match kind {
                    CliffordKind::H | CliffordKind::Hxy | CliffordKind::Hzy | CliffordKind::S => {
                        let mut m = ExactMat::identity(1);
                        for q in 0..n {
                            let f = if q == targets[0] {
                                clifford_exact_2x2(*kind)
                            } else {
                                ExactMat::identity(2)
                            };
                            m = f.kron(&m);
                        }
                        m
                    }
                    CliffordKind::Cz => {
                        let mut m = ExactMat::identity(dim);
                        for idx in 0..dim {
                            if idx >> targets[0] & 1 == 1 && idx >> targets[1] & 1 == 1 {
                                m.set(idx, idx, GaussInt::new(-1, 0));
                            }
                        }
                        m
                    }
                    CliffordKind::Cnot => {
                        let mut m = ExactMat::zeros(dim);
                        for idx in 0..dim {
                            let j = if idx >> targets[0] & 1 == 1 { idx ^ (1 << targets[1]) } else { idx };
                            m.set(j, idx, GaussInt::ONE);
                        }
                        m
                    }
                },
                Gate::GlobalPhase { i_exp } => {
                    let phase = [GaussInt::ONE, GaussInt::I, GaussInt::new(-1, 0), GaussInt::new(0, -1)];
                    ExactMat::identity(dim).scale(phase[*i_exp as usize])
                }
                other => {
                    return Err(Error::UnsupportedGate(format!("exact matrix for {other:?}")));
                }
            };
            u = g.mul(&u);
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn pauli_product_matches_dense_exhaustively() {
        // Phase-exact products against dense multiplication for all pairs on N ≤ 3.
        for n in 1..=3usize {
            for xa in 0..(1u64 << n) {
                for za in 0..(1u64 << n) {
                    for xb in 0..(1u64 << n) {
                        for zb in 0..(1u64 << n) {
                            let a = PauliString::from_bits(n, xa, za, 1);
                            let b = PauliString::from_bits(n, xb, zb, 0);
                            let prod = a.mul(&b).unwrap();
                            let dense = pauli_matrix(&a) * pauli_matrix(&b);
                            assert!(
                                max_abs_diff(&dense, &pauli_matrix(&prod)) < 1e-12,
                                "{a} * {b} != {prod}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn commutation_matches_dense_exhaustively() {
        for n in 1..=3usize {
            for xa in 0..(1u64 << n) {
                for za in 0..(1u64 << n) {
                    for xb in 0..(1u64 << n) {
                        for zb in 0..(1u64 << n) {
                            let a = PauliString::from_bits(n, xa, za, 0);
                            let b = PauliString::from_bits(n, xb, zb, 0);
                            let commute = a.commutes_with(&b).unwrap();
                            let (ma, mb) = (pauli_matrix(&a), pauli_matrix(&b));
                            assert_eq!(commute, matrices_commute(&ma, &mb, 1e-12), "{a} {b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn product_associativity_spot_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = 3;
            let r = |rng: &mut ChaCha8Rng| {
                PauliString::from_bits(n, rng.gen::<u64>() & 7, rng.gen::<u64>() & 7, rng.gen::<u8>() % 4)
            };
            let (a, b, c) = (r(&mut rng), r(&mut rng), r(&mut rng));
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn tableau_conjugation_matches_dense_for_all_gates() {
        // Every named Clifford, conjugating every 2-qubit Pauli word.
        let n = 2usize;
        let gates: Vec<Gate> = vec![
            Gate::Clifford { kind: CliffordKind::H, targets: vec![0] },
            Gate::Clifford { kind: CliffordKind::Hxy, targets: vec![0] },
            Gate::Clifford { kind: CliffordKind::Hzy, targets: vec![1] },
            Gate::Clifford { kind: CliffordKind::S, targets: vec![0] },
            Gate::Clifford { kind: CliffordKind::Cz, targets: vec![0, 1] },
            Gate::Clifford { kind: CliffordKind::Cnot, targets: vec![0, 1] },
            Gate::Clifford { kind: CliffordKind::Cnot, targets: vec![1, 0] },
        ];
        for gate in gates {
            let mut circuit = Circuit::new(n);
            circuit.push(gate.clone()).unwrap();
            let u = circuit_unitary(&circuit).unwrap();
            for x in 0..4u64 {
                for z in 0..4u64 {
                    for phase in 0..4u8 {
                        let word = PauliString::from_bits(n, x, z, phase);
                        let conj = circuit.conjugate(&word).unwrap();
                        let dense = &u * pauli_matrix(&word) * u.adjoint();
                        assert!(
                            max_abs_diff(&dense, &pauli_matrix(&conj)) < 1e-12,
                            "{gate:?} on {word} gave {conj}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn simulator_gates_match_dense_unitaries() {
        use crate::sim::StateVector;
        let n = 3usize;
        let mut circuit = Circuit::new(n);
        circuit.h(0).unwrap();
        circuit.hxy(1).unwrap();
        circuit.hzy(2).unwrap();
        circuit.s(1).unwrap();
        circuit.cz(0, 2).unwrap();
        circuit.cnot(2, 1).unwrap();
        circuit.rotation(0.37, p("XYZ")).unwrap();
        circuit.global_phase(3).unwrap();
        let mut body = Circuit::new(n);
        body.rotation(-0.9, p("IXY")).unwrap();
        circuit.controlled(0, false, body).unwrap();

        let u = circuit_unitary(&circuit).unwrap();
        let mut st = StateVector::zero(n);
        st.apply_circuit(&circuit).unwrap();
        for (row, amp) in st.amplitudes().iter().enumerate() {
            assert!((u[(row, 0)] - amp).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_matrices_agree_with_float_matrices() {
        use exact::*;
        let mut circuit = Circuit::new(2);
        circuit.hxy(0).unwrap();
        circuit.hxy(1).unwrap();
        circuit.cz(0, 1).unwrap();
        let e = circuit_exact(&circuit).unwrap();
        let f = circuit_unitary(&circuit).unwrap();
        let scale = 2f64.powf(e.sqrt2_exp as f64 / 2.0);
        for r in 0..4 {
            for cidx in 0..4 {
                let g = e.at(r, cidx);
                let approx = Complex64::new(g.re as f64, g.im as f64) / scale;
                assert!((approx - f[(r, cidx)]).norm() < 1e-12);
            }
        }
    }
}
