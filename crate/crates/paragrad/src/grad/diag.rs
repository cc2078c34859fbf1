//! Clifford circuits that simultaneously diagonalize commuting Pauli sets.
//!
//! Two flavors:
//!
//! - the hand-built basis changes for X-type generator circuits with Z-product
//!   observables (an `H_xy` layer on the observable qubits followed by CZ on
//!   every pair of them, plus an `H_zy` on the first observable qubit for the
//!   second-order variant), which map each gradient observable back to its
//!   generator, and
//! - a general synthesis by symplectic elimination over GF(2) that conjugates
//!   any pairwise-commuting Hermitian set to ±1-signed Z/I words using
//!   H, S, CZ and CNOT gates. All conjugation signs are folded into the
//!   returned per-observable factors, never into the circuit.

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::sim::{Circuit, CliffordKind};

/// Diagonal form of an observable after a basis change: `sign · Z^mask`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalForm {
    pub z_mask: u64,
    pub sign: f64,
}

impl DiagonalForm {
    /// Eigenvalue on the computational basis state `bits`.
    pub fn eigenvalue(&self, bits: u64) -> f64 {
        if (self.z_mask & bits).count_ones() % 2 == 0 {
            self.sign
        } else {
            -self.sign
        }
    }
}

fn z_product_layout(n: usize, observable: &PauliString) -> Result<Vec<usize>> {
    if observable.n_qubits() != n {
        return Err(Error::DimensionMismatch { left: n, right: observable.n_qubits() });
    }
    if observable.x_bits() != 0 || observable.is_identity() || !observable.is_hermitian() {
        return Err(Error::ObservableForm(format!(
            "expected a Z-product observable, got {observable}"
        )));
    }
    Ok(observable.support())
}

/// Basis change for first-order derivatives of X-type generator circuits.
///
/// For an observable `Z^⊗m` on the designated qubits and any X-type generator
/// `G_j` that anticommutes with it, the returned circuit `D` satisfies
/// `D O_j D† = 2 G_j` with `O_j = 2i G_j H`, exactly. The circuit applies
/// `H_xy` on each observable qubit followed by CZ on every pair of them; for
/// an even number of observable qubits a Z layer (two S gates per qubit)
/// precedes the `H_xy` layer to keep the conjugation sign uniform. After `D`,
/// measuring every qubit in the X basis yields all derivative estimates.
pub fn diagonalizer_x_ansatz(n: usize, observable: &PauliString) -> Result<Circuit> {
    let layout = z_product_layout(n, observable)?;
    let mut circuit = Circuit::new(n);
    push_x_ansatz_gates(&mut circuit, &layout)?;
    Ok(circuit)
}

/// Basis change for second-order derivatives: `H_zy` on the first observable
/// qubit followed by the first-order circuit. Conjugates every
/// `O_jk = -4 G_j G_k H` to `(-1)^{β₁} 4 X^{(1)} G_j G_k`, where `β₁ = 0`
/// exactly when `G_{j,1} G_{k,1} = X` on the first observable qubit.
pub fn diagonalizer_second_order_x(n: usize, observable: &PauliString) -> Result<Circuit> {
    let layout = z_product_layout(n, observable)?;
    let mut circuit = Circuit::new(n);
    circuit.hzy(layout[0])?;
    push_x_ansatz_gates(&mut circuit, &layout)?;
    Ok(circuit)
}

fn push_x_ansatz_gates(circuit: &mut Circuit, layout: &[usize]) -> Result<()> {
    if layout.len() % 2 == 0 {
        for &q in layout {
            circuit.s(q)?;
            circuit.s(q)?;
        }
    }
    for &q in layout {
        circuit.hxy(q)?;
    }
    for (i, &a) in layout.iter().enumerate() {
        for &b in &layout[i + 1..] {
            circuit.cz(a, b)?;
        }
    }
    Ok(())
}

/// The sign factor `s_j = i^{m_j - 1}` a first-order observable carries when
/// its generator has `m_j` X letters on the observable qubits (`m_j` odd).
pub fn x_ansatz_sign(m_j: usize) -> f64 {
    assert!(m_j % 2 == 1, "anticommuting generators overlap on an odd count");
    if m_j % 4 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// The sign factor `s_jk = (-1)^{m_jk/2 + 1}` of a second-order observable
/// with `m_jk` Y letters on the observable qubits (`m_jk` even).
pub fn x_ansatz_second_sign(m_jk: usize) -> f64 {
    assert!(m_jk % 2 == 0);
    if m_jk % 4 == 2 {
        1.0
    } else {
        -1.0
    }
}

/// Synthesizes a Clifford circuit (H, S, CZ, CNOT) conjugating every word of
/// a pairwise-commuting Hermitian set to a ±1-signed Z/I word.
///
/// The elimination processes a GF(2)-independent subset of the inputs; each
/// processed word is reduced to a single-qubit Z on a fresh pivot qubit,
/// which forces every remaining word (products of processed ones included)
/// to become diagonal as well. Runs in `O(k · n)` gates for `k` words.
pub fn diagonalizer_general(words: &[PauliString]) -> Result<(Circuit, Vec<DiagonalForm>)> {
    if words.is_empty() {
        return Ok((Circuit::new(1), Vec::new()));
    }
    let n = words[0].n_qubits();
    for (i, w) in words.iter().enumerate() {
        if w.n_qubits() != n {
            return Err(Error::DimensionMismatch { left: n, right: w.n_qubits() });
        }
        if !w.is_hermitian() {
            return Err(Error::NonHermitian { phase_exp: w.phase_exp() });
        }
        for (j, v) in words.iter().enumerate().take(i) {
            if !w.commutes_with(v)? {
                return Err(Error::NotCommuting { i: j, j: i });
            }
        }
    }

    // Already-diagonal sets need no circuit at all.
    if words.iter().all(|w| w.x_bits() == 0) {
        let forms = words
            .iter()
            .map(|w| Ok(DiagonalForm { z_mask: w.z_bits(), sign: w.hermitian_sign()? }))
            .collect::<Result<Vec<_>>>()?;
        return Ok((Circuit::new(n), forms));
    }

    // GF(2)-independent subset over the symplectic (x | z) vectors.
    let key = |w: &PauliString| (w.x_bits() as u128) | ((w.z_bits() as u128) << 64);
    let mut basis: Vec<u128> = Vec::new();
    let mut independent: Vec<usize> = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let mut v = key(w);
        for b in &basis {
            let lead = 127 - b.leading_zeros();
            if v >> lead & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
            independent.push(i);
        }
    }

    let mut work: Vec<(u64, u64)> = words.iter().map(|w| (w.x_bits(), w.z_bits())).collect();
    let mut circuit = Circuit::new(n);
    let mut pivot_mask = 0u64;

    let emit = |circuit: &mut Circuit, work: &mut Vec<(u64, u64)>, kind: CliffordKind, targets: &[usize]| -> Result<()> {
        circuit.clifford(kind, targets)?;
        for row in work.iter_mut() {
            let mut phase = 0u8; // phases re-derived at the end
            crate::sim::conjugate_clifford(kind, targets, &mut row.0, &mut row.1, &mut phase);
        }
        Ok(())
    };

    for &r in &independent {
        if work[r].0 == 0 {
            // Pure Z word; expose an X component on a non-pivot qubit.
            let free_z = work[r].1 & !pivot_mask;
            debug_assert!(free_z != 0, "independent word collapsed onto pivots");
            let q = free_z.trailing_zeros() as usize;
            emit(&mut circuit, &mut work, CliffordKind::H, &[q])?;
        }
        // Clear Y letters on the X support (all X support is off-pivot).
        let ys = work[r].0 & work[r].1;
        for q in bit_indices(ys) {
            emit(&mut circuit, &mut work, CliffordKind::S, &[q])?;
        }
        // Fold the X support onto a single pivot.
        let q = work[r].0.trailing_zeros() as usize;
        for t in bit_indices(work[r].0 & !(1 << q)) {
            emit(&mut circuit, &mut work, CliffordKind::Cnot, &[q, t])?;
        }
        // Remove residual Z letters elsewhere, then on the pivot itself.
        for t in bit_indices(work[r].1 & !(1 << q)) {
            emit(&mut circuit, &mut work, CliffordKind::Cz, &[q, t])?;
        }
        if work[r].1 >> q & 1 == 1 {
            emit(&mut circuit, &mut work, CliffordKind::S, &[q])?;
        }
        debug_assert_eq!(work[r], (1 << q, 0));
        emit(&mut circuit, &mut work, CliffordKind::H, &[q])?;
        pivot_mask |= 1 << q;
    }

    let mut forms = Vec::with_capacity(words.len());
    for w in words {
        let conj = circuit.conjugate(w)?;
        debug_assert_eq!(conj.x_bits(), 0, "conjugated word not diagonal: {conj}");
        forms.push(DiagonalForm { z_mask: conj.z_bits(), sign: conj.hermitian_sign()? });
    }
    Ok((circuit, forms))
}

fn bit_indices(mut m: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{circuit_unitary, max_abs_diff, pauli_matrix};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_z_observable_gets_trivial_circuit() {
        let (circuit, forms) = diagonalizer_general(&[p("ZII")]).unwrap();
        assert!(circuit.is_empty());
        assert_eq!(forms[0].z_mask, 1);
        assert_eq!(forms[0].sign, 1.0);
    }

    #[test]
    fn x_ansatz_m1_is_single_hxy() {
        let d = diagonalizer_x_ansatz(3, &p("ZII")).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn x_ansatz_sign_factors() {
        assert_eq!(x_ansatz_sign(1), 1.0);
        assert_eq!(x_ansatz_sign(3), -1.0);
        assert_eq!(x_ansatz_sign(5), 1.0);
        assert_eq!(x_ansatz_second_sign(2), 1.0);
        assert_eq!(x_ansatz_second_sign(0), -1.0);
        assert_eq!(x_ansatz_second_sign(4), -1.0);
    }

    fn random_commuting_words(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<PauliString> {
        // Random Z-type words conjugated by a random Clifford circuit commute.
        let mut frame = Circuit::new(n);
        for _ in 0..3 * n {
            match rng.gen_range(0..4) {
                0 => frame.h(rng.gen_range(0..n)).unwrap(),
                1 => frame.s(rng.gen_range(0..n)).unwrap(),
                2 => {
                    let a = rng.gen_range(0..n);
                    let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                    frame.cz(a, b).unwrap();
                }
                _ => {
                    let a = rng.gen_range(0..n);
                    let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                    frame.cnot(a, b).unwrap();
                }
            }
        }
        (0..count)
            .map(|_| {
                let z = rng.gen_range(1..(1u64 << n));
                frame.conjugate(&PauliString::from_bits(n, 0, z, 0)).unwrap()
            })
            .collect()
    }

    #[test]
    fn general_diagonalizer_dense_oracle_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..100 {
            let n = rng.gen_range(2..=6);
            let count = rng.gen_range(1..=n);
            let words = random_commuting_words(n, count, &mut rng);
            let (circuit, forms) = diagonalizer_general(&words).unwrap();
            let u = circuit_unitary(&circuit).unwrap();
            for (w, form) in words.iter().zip(&forms) {
                let conj = &u * pauli_matrix(w) * u.adjoint();
                let target =
                    pauli_matrix(&PauliString::from_bits(n, 0, form.z_mask, if form.sign > 0.0 { 0 } else { 2 }));
                assert!(
                    max_abs_diff(&conj, &target) < 1e-10,
                    "trial {trial}: {w} not diagonalized"
                );
            }
        }
    }

    #[test]
    fn dependent_and_duplicate_words_diagonalize_too() {
        let words = vec![p("XXI"), p("IXX"), p("XIX"), p("XXI"), p("-III")];
        let (circuit, forms) = diagonalizer_general(&words).unwrap();
        let u = circuit_unitary(&circuit).unwrap();
        for (w, form) in words.iter().zip(&forms) {
            let conj = &u * pauli_matrix(w) * u.adjoint();
            let target =
                pauli_matrix(&PauliString::from_bits(3, 0, form.z_mask, if form.sign > 0.0 { 0 } else { 2 }));
            assert!(max_abs_diff(&conj, &target) < 1e-10);
        }
        assert_eq!(forms[4].z_mask, 0);
        assert_eq!(forms[4].sign, -1.0);
    }

    #[test]
    fn non_commuting_inputs_rejected() {
        assert!(matches!(
            diagonalizer_general(&[p("X"), p("Z")]),
            Err(Error::NotCommuting { .. })
        ));
    }
}
