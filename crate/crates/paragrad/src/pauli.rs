//! Phase-exact Pauli-string algebra in the binary symplectic representation.
//!
//! A [`PauliString`] stores one X bit and one Z bit per qubit plus a global
//! phase exponent, and represents the operator
//!
//! ```text
//!     i^phase_exp * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}
//! ```
//!
//! where the letter on qubit `q` is `I`, `X`, `Z` or `Y` according to the bit
//! pair `(x_q, z_q)` = (0,0), (1,0), (0,1) or (1,1). The letter `Y` is the
//! literal Pauli Y, i.e. we use the convention `Y = i·XZ` and fold that `i`
//! into the multiplication table rather than the stored phase. Under this
//! convention an operator is Hermitian exactly when `phase_exp` is even, so
//! Hermitian strings carry a plain sign `i^0 = +1` or `i^2 = -1`.
//!
//! Products and commutation checks are exact; every phase is tracked mod 4.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Phase exponent of the product of two letters, indexed by `x + 2z` codes.
///
/// `letter(a) * letter(b) = i^TABLE[a][b] * letter(a XOR b)` with codes
/// 0 = I, 1 = X, 2 = Z, 3 = Y.
const PRODUCT_PHASE: [[u8; 4]; 4] = [
    [0, 0, 0, 0], // I * {I,X,Z,Y}
    [0, 0, 3, 1], // X * {I,X,Z,Y}: X·Z = -iY, X·Y = iZ
    [0, 1, 0, 3], // Z * {I,X,Z,Y}: Z·X = iY,  Z·Y = -iX
    [0, 3, 1, 0], // Y * {I,X,Z,Y}: Y·X = -iZ, Y·Z = iX
];

/// Maximum number of qubits representable by the packed bit masks.
pub const MAX_QUBITS: usize = 64;

/// A phase-tracked N-qubit Pauli word in symplectic (x-bits, z-bits) form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    /// The identity word on `n` qubits with phase `+1`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_QUBITS, "qubit count out of range");
        PauliString { n, x: 0, z: 0, phase: 0 }
    }

    /// Builds a word from raw bit masks and a phase exponent.
    pub fn from_bits(n: usize, x: u64, z: u64, phase: u8) -> Self {
        assert!(n >= 1 && n <= MAX_QUBITS, "qubit count out of range");
        let mask = Self::mask_for(n);
        assert!(x & !mask == 0 && z & !mask == 0, "bits beyond qubit count");
        PauliString { n, x, z, phase: phase % 4 }
    }

    /// A single letter on one qubit, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        assert!(qubit < n, "qubit index out of range");
        let (x, z) = letter.bits();
        PauliString::from_bits(n, (x as u64) << qubit, (z as u64) << qubit, 0)
    }

    /// The same letter placed on every qubit in `qubits`.
    pub fn from_support(n: usize, letter: Letter, qubits: &[usize]) -> Self {
        let mut p = PauliString::identity(n);
        for &q in qubits {
            assert!(q < n, "qubit index out of range");
            let (x, z) = letter.bits();
            p.x |= (x as u64) << q;
            p.z |= (z as u64) << q;
        }
        p
    }

    fn mask_for(n: usize) -> u64 {
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    /// Returns a copy with the phase exponent replaced.
    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// Multiplies the tracked phase by `i^k`.
    pub fn mul_phase(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) % 4;
        self
    }

    pub fn letter_at(&self, qubit: usize) -> Letter {
        assert!(qubit < self.n);
        Letter::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut m = self.x | self.z;
        let mut out = Vec::with_capacity(m.count_ones() as usize);
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            out.push(q);
            m &= m - 1;
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// With the literal-Y convention a word is Hermitian iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// The ±1 prefactor of a Hermitian word.
    pub fn hermitian_sign(&self) -> Result<f64> {
        match self.phase {
            0 => Ok(1.0),
            2 => Ok(-1.0),
            p => Err(Error::NonHermitian { phase_exp: p }),
        }
    }

    /// The same word with phase forced to `+1`; returns the stripped sign too.
    pub fn unsigned(&self) -> (PauliString, u8) {
        (PauliString { phase: 0, ..*self }, self.phase)
    }

    /// Adjoint (conjugate transpose).
    pub fn adjoint(&self) -> PauliString {
        // (i^p W)† = (-i)^p W for a word of literal letters (each Hermitian).
        PauliString { phase: (4 - self.phase) % 4, ..*self }
    }

    fn check_dims(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// Exact product `self * other` with the full phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_dims(other)?;
        let mut phase = (self.phase + other.phase) % 4;
        // Only qubits where both operands are non-identity can contribute phase.
        let mut m = (self.x | self.z) & (other.x | other.z);
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            let a = ((self.x >> q & 1) | ((self.z >> q & 1) << 1)) as usize;
            let b = ((other.x >> q & 1) | ((other.z >> q & 1) << 1)) as usize;
            phase = (phase + PRODUCT_PHASE[a][b]) % 4;
            m &= m - 1;
        }
        Ok(PauliString { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z, phase })
    }

    /// Whether the two words commute (`true`) or anticommute (`false`).
    ///
    /// Decided by the parity of the symplectic inner product of the bit
    /// vectors; every pair of Pauli words falls in exactly one class.
    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        self.check_dims(other)?;
        let sym = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(sym % 2 == 0)
    }

    /// One-step cyclic qubit shift: the letter on qubit `q` moves to `q+1 mod n`.
    pub fn shifted(&self, steps: usize) -> PauliString {
        let k = steps % self.n;
        if k == 0 {
            return *self;
        }
        let mask = Self::mask_for(self.n);
        let rot = |b: u64| ((b << k) | (b >> (self.n - k))) & mask;
        PauliString { n: self.n, x: rot(self.x), z: rot(self.z), phase: self.phase }
    }

    /// Canonical ordering key: x/z bits interleaved per qubit, then phase.
    pub fn canonical_key(&self) -> (u128, u8) {
        let mut key: u128 = 0;
        for q in 0..self.n {
            key |= ((self.x >> q & 1) as u128) << (2 * q);
            key |= ((self.z >> q & 1) as u128) << (2 * q + 1);
        }
        (key, self.phase)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            0 => {}
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i")?,
            _ => unreachable!(),
        }
        for q in 0..self.n {
            write!(f, "{}", self.letter_at(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (3u8, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        if rest.is_empty() || rest.len() > MAX_QUBITS {
            return Err(Error::Parse(format!("bad Pauli word '{s}'")));
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, c) in rest.chars().enumerate() {
            let letter = match c {
                'I' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                other => return Err(Error::Parse(format!("bad Pauli letter '{other}'"))),
            };
            let (xb, zb) = letter.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Ok(PauliString { n: rest.len(), x, z, phase })
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(|e: Error| D::Error::custom(e.to_string()))
    }
}

/// A real-weighted sum of Hermitian Pauli words.
///
/// Terms are canonicalized at construction: the ±1 phase of each word is
/// folded into its coefficient, duplicate words are merged, and terms are
/// sorted by the canonical key so that equal sums have equal representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        PauliSum { n, terms: Vec::new() }
    }

    /// Canonicalizes a list of weighted words into a sum.
    pub fn from_terms(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut sum = PauliSum::new(n);
        for (c, p) in terms {
            sum.add_term(c, p)?;
        }
        Ok(sum)
    }

    /// A single-word observable.
    pub fn from_string(p: PauliString) -> Result<Self> {
        Self::from_terms(p.n_qubits(), vec![(1.0, p)])
    }

    /// Adds `c * p`, folding the word's sign into the coefficient.
    pub fn add_term(&mut self, c: f64, p: PauliString) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: p.n_qubits() });
        }
        let sign = p.hermitian_sign()?;
        let (word, _) = p.unsigned();
        let coeff = c * sign;
        let key = word.canonical_key();
        match self.terms.binary_search_by(|(_, t)| t.canonical_key().cmp(&key)) {
            Ok(i) => {
                self.terms[i].0 += coeff;
                if self.terms[i].0 == 0.0 {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, (coeff, word)),
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(mut self, s: f64) -> Self {
        for (c, _) in &mut self.terms {
            *c *= s;
        }
        self
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{p}")?;
        }
        Ok(())
    }
}

/// Orbit of a Hermitian word under all `n` cyclic qubit shifts, deduplicated
/// and sorted canonically. The output is closed under one-step shifts.
pub fn cyclic_twirl_orbit(p: &PauliString) -> Result<Vec<PauliString>> {
    if !p.is_hermitian() {
        return Err(Error::NonHermitian { phase_exp: p.phase_exp() });
    }
    let mut orbit: Vec<PauliString> = (0..p.n_qubits()).map(|k| p.shifted(k)).collect();
    orbit.sort_by_key(|q| q.canonical_key());
    orbit.dedup();
    Ok(orbit)
}

/// The symmetrized generator: the unweighted sum of the cyclic orbit.
pub fn twirl_sum(p: &PauliString) -> Result<PauliSum> {
    let orbit = cyclic_twirl_orbit(p)?;
    PauliSum::from_terms(p.n_qubits(), orbit.into_iter().map(|q| (1.0, q)).collect())
}

/// A maximal set of `2n + 1` mutually anticommuting Pauli words on `n` qubits.
///
/// The first `n` entries follow the Jordan–Wigner ladder `Z..ZX I..I`, the
/// next `n` replace the `X` by `Y`, and the last entry is the all-`Z` word.
pub fn majorana_anticommuting_set(n: usize) -> Vec<PauliString> {
    assert!(n >= 1 && n <= MAX_QUBITS);
    let mut out = Vec::with_capacity(2 * n + 1);
    for k in 0..n {
        let zs = (1u64 << k) - 1;
        out.push(PauliString::from_bits(n, 1 << k, zs, 0));
    }
    for k in 0..n {
        let zs = (1u64 << k) - 1;
        out.push(PauliString::from_bits(n, 1 << k, zs | (1 << k), 0));
    }
    out.push(PauliString::from_bits(n, 0, PauliString::mask_for(n), 0));
    out
}

/// Outcome of a dynamical-Lie-algebra closure run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlaOutcome {
    /// The closure completed with the given real span dimension.
    Dimension(usize),
    /// The closure grew past the cap; the value is a lower bound.
    CapExceeded { lower_bound: usize },
}

/// Real span dimension of the Lie closure of `{iG_j}` over the Pauli basis.
///
/// The commutator of two Pauli words is zero or a single Pauli word, so the
/// closure is a growing set of basis words; the identity word is ignored and
/// phases are irrelevant (±W span the same line). Iteration stops when the
/// set is closed or its size exceeds `cap`.
pub fn dla_dimension(generators: &[PauliString], cap: usize) -> Result<DlaOutcome> {
    if generators.is_empty() {
        return Err(Error::GeneratorForm("empty generator list".into()));
    }
    let n = generators[0].n_qubits();
    for g in generators {
        if g.n_qubits() != n {
            return Err(Error::DimensionMismatch { left: n, right: g.n_qubits() });
        }
        if !g.is_hermitian() {
            return Err(Error::NonHermitian { phase_exp: g.phase_exp() });
        }
    }

    let mut seen: std::collections::HashSet<(u64, u64)> = std::collections::HashSet::new();
    let mut elems: Vec<PauliString> = Vec::new();
    for g in generators {
        if g.is_identity() {
            continue;
        }
        if seen.insert((g.x_bits(), g.z_bits())) {
            elems.push(g.unsigned().0);
        }
    }

    let mut frontier = elems.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for e in &elems {
                if f.commutes_with(e)? {
                    continue;
                }
                // [f, e] = 2 f e for anticommuting words: a single new word.
                let prod = f.mul(e)?.unsigned().0;
                if seen.insert((prod.x_bits(), prod.z_bits())) {
                    next.push(prod);
                }
            }
        }
        // New elements must also be paired against each other.
        for i in 0..next.len() {
            for j in (i + 1)..next.len() {
                if next[i].commutes_with(&next[j])? {
                    continue;
                }
                let prod = next[i].mul(&next[j])?.unsigned().0;
                if seen.insert((prod.x_bits(), prod.z_bits())) {
                    next.push(prod);
                }
            }
        }
        elems.extend(next.iter().copied());
        if elems.len() > cap {
            return Ok(DlaOutcome::CapExceeded { lower_bound: elems.len() });
        }
        frontier = next;
    }
    Ok(DlaOutcome::Dimension(elems.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X").mul(&p("Y")).unwrap(), p("iZ"));
        assert_eq!(p("Y").mul(&p("X")).unwrap(), p("-iZ"));
        assert_eq!(p("Z").mul(&p("X")).unwrap(), p("iY"));
        assert_eq!(p("X").mul(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Y").mul(&p("Y")).unwrap(), p("I"));
    }

    #[test]
    fn qubit_wise_product_with_phase() {
        // (X⊗X)·(Z⊗I) = -i(Y⊗X)
        assert_eq!(p("XX").mul(&p("ZI")).unwrap(), p("-iYX"));
        // 2i·(X⊗X⊗I)·(Z⊗I⊗I) = 2·(Y⊗X⊗I): the word part is i·(-iYXI) = YXI.
        let prod = p("XXI").mul(&p("ZII")).unwrap().mul_phase(1);
        assert_eq!(prod, p("YXI"));
        assert_eq!(prod.hermitian_sign().unwrap(), 1.0);
    }

    #[test]
    fn product_dimension_mismatch() {
        assert!(p("X").mul(&p("XX")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes_with(&p("Z")).unwrap());
        assert!(p("XX").commutes_with(&p("ZZ")).unwrap());
        assert!(!p("ZI").commutes_with(&p("XX")).unwrap());
    }

    #[test]
    fn adjoint_and_hermiticity() {
        assert!(p("XYZ").is_hermitian());
        assert!(!p("iX").is_hermitian());
        assert_eq!(p("iX").adjoint(), p("-iX"));
        assert_eq!(p("-XZ").hermitian_sign().unwrap(), -1.0);
    }

    #[test]
    fn display_round_trip() {
        for s in ["XYZ", "-iXZY", "iII", "-Z", "IXIY"] {
            assert_eq!(p(s).to_string(), s);
        }
    }

    #[test]
    fn twirl_orbit_examples() {
        let orbit = cyclic_twirl_orbit(&p("XII")).unwrap();
        assert_eq!(orbit, vec![p("XII"), p("IXI"), p("IIX")]);

        // Period-8 string on 16 qubits: X_1 X_9 has orbit size 8.
        let x19 = PauliString::from_support(16, Letter::X, &[0, 8]);
        assert_eq!(cyclic_twirl_orbit(&x19).unwrap().len(), 8);
    }

    #[test]
    fn orbit_closed_under_shift() {
        let orbit = cyclic_twirl_orbit(&p("XIXY")).unwrap();
        for q in &orbit {
            assert!(orbit.contains(&q.shifted(1)));
        }
    }

    #[test]
    fn weight_le3_orbit_count_d16() {
        // Distinct cyclic orbits of X-type words with weight 1..=3 on 16 qubits.
        let d = 16;
        let mut reps = std::collections::HashSet::new();
        for bits in 1u64..(1 << d) {
            if bits.count_ones() > 3 {
                continue;
            }
            let s = PauliString::from_bits(d, bits, 0, 0);
            let orbit = cyclic_twirl_orbit(&s).unwrap();
            reps.insert(orbit[0]);
        }
        assert_eq!(reps.len(), 44); // 1 + 8 + 35
        let by_weight = |w: usize| reps.iter().filter(|r| r.weight() == w).count();
        assert_eq!(by_weight(1), 1);
        assert_eq!(by_weight(2), 8);
        assert_eq!(by_weight(3), 35);
    }

    #[test]
    fn majorana_set_matches_listing() {
        let set = majorana_anticommuting_set(5);
        assert_eq!(set.len(), 11);
        assert_eq!(set[0], p("XIIII"));
        assert_eq!(set[4], p("ZZZZX"));
        assert_eq!(set[5], p("YIIII"));
        assert_eq!(set[9], p("ZZZZY"));
        assert_eq!(set[10], p("ZZZZZ"));
    }

    #[test]
    fn majorana_single_qubit() {
        assert_eq!(majorana_anticommuting_set(1), vec![p("X"), p("Y"), p("Z")]);
    }

    #[test]
    fn majorana_pairwise_anticommute() {
        for n in 1..=6 {
            let set = majorana_anticommuting_set(n);
            assert_eq!(set.len(), 2 * n + 1);
            for s in &set {
                assert!(s.is_hermitian());
            }
            for i in 0..set.len() {
                for j in (i + 1)..set.len() {
                    assert!(!set[i].commutes_with(&set[j]).unwrap(), "{} vs {}", set[i], set[j]);
                }
            }
        }
    }

    #[test]
    fn dla_single_qubit_xy() {
        let out = dla_dimension(&[p("X"), p("Y")], 100).unwrap();
        assert_eq!(out, DlaOutcome::Dimension(3));
    }

    #[test]
    fn dla_two_block_example() {
        // Block 1: odd-weight Z words on 2 qubits; block 2: XX.
        let gens = vec![p("ZI"), p("IZ"), p("XX")];
        assert_eq!(dla_dimension(&gens, 100).unwrap(), DlaOutcome::Dimension(6));
    }

    #[test]
    fn dla_commuting_set_is_span() {
        let gens = vec![p("ZI"), p("IZ"), p("ZZ"), p("ZI")];
        assert_eq!(dla_dimension(&gens, 100).unwrap(), DlaOutcome::Dimension(3));
    }

    #[test]
    fn dla_cap_exceeded_reported() {
        let gens = vec![p("X"), p("Y")];
        assert_eq!(dla_dimension(&gens, 2).unwrap(), DlaOutcome::CapExceeded { lower_bound: 3 });
    }

    #[test]
    fn pauli_sum_canonicalizes() {
        let mut sum = PauliSum::new(2);
        sum.add_term(0.5, p("ZI")).unwrap();
        sum.add_term(1.0, p("-ZI")).unwrap();
        sum.add_term(0.75, p("IZ")).unwrap();
        assert_eq!(sum.terms().len(), 2);
        assert!(sum.terms().iter().any(|&(c, t)| t == p("ZI") && c == -0.5));
    }
}
