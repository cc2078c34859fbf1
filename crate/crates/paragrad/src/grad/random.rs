//! Seeded random instances used by cross-checks and the `gradcheck` task.
//!
//! Random commuting generator sets are built by conjugating random Z-type
//! words with a random Clifford frame, which preserves pairwise commutation
//! while producing generators of generic appearance.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::pauli::{PauliString, PauliSum};
use crate::sim::Circuit;

use super::CommutingCircuit;

/// A random Clifford circuit of roughly `depth` gates.
pub fn random_clifford_circuit(n: usize, depth: usize, rng: &mut ChaCha8Rng) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        match rng.gen_range(0..4) {
            0 => c.h(rng.gen_range(0..n))?,
            1 => c.s(rng.gen_range(0..n))?,
            2 if n > 1 => {
                let a = rng.gen_range(0..n);
                let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                c.cz(a, b)?;
            }
            _ if n > 1 => {
                let a = rng.gen_range(0..n);
                let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                c.cnot(a, b)?;
            }
            _ => c.h(0)?,
        }
    }
    Ok(c)
}

/// A random state-preparation circuit: random Pauli-word rotations.
pub fn random_prep_circuit(n: usize, gates: usize, rng: &mut ChaCha8Rng) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for _ in 0..gates {
        let mut x = rng.gen::<u64>() & mask;
        let z = rng.gen::<u64>() & mask;
        if x == 0 && z == 0 {
            x = 1;
        }
        let word = PauliString::from_bits(n, x, z, if (x & z).count_ones() % 2 == 1 { 2 } else { 0 });
        let word = if word.is_hermitian() { word } else { word.mul_phase(1) };
        c.rotation(rng.gen::<f64>() * std::f64::consts::TAU, word)?;
    }
    Ok(c)
}

/// A random Hermitian Pauli word.
pub fn random_pauli_word(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    loop {
        let x = rng.gen::<u64>() & mask;
        let z = rng.gen::<u64>() & mask;
        if x == 0 && z == 0 {
            continue;
        }
        let phase = if (x & z).count_ones() % 2 == 1 { 1 } else { 0 };
        let word = PauliString::from_bits(n, x, z, phase);
        debug_assert!(word.is_hermitian() || !word.is_hermitian());
        return if word.is_hermitian() { word } else { word.mul_phase(1) };
    }
}

/// A random validated-ready commuting-generator circuit: a Clifford-conjugated
/// family of Z-type generators, a random rotation preparation, random angles
/// in `[0, 2π)` and a random weighted Pauli observable.
pub fn random_commuting_circuit(
    n: usize,
    n_generators: usize,
    n_terms: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CommutingCircuit> {
    let frame = random_clifford_circuit(n, 3 * n, rng)?;
    let mut seen = std::collections::BTreeSet::new();
    let mut generators = Vec::with_capacity(n_generators);
    while generators.len() < n_generators {
        let z = rng.gen_range(1..(1u64 << n));
        if !seen.insert(z) && seen.len() < (1 << n) - 1 {
            continue;
        }
        generators.push(frame.conjugate(&PauliString::from_bits(n, 0, z, 0))?);
    }
    let prep = random_prep_circuit(n, 2 * n, rng)?;
    let params: Vec<f64> = (0..n_generators).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        terms.push((rng.gen_range(-1.0..1.0), random_pauli_word(n, rng)));
    }
    let observable = PauliSum::from_terms(n, terms)?;
    Ok(CommutingCircuit::new(prep, generators, params, observable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_specs_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..20 {
            let n = rng.gen_range(2..=6);
            let gens = rng.gen_range(1..=2 * n.min(4));
            let spec = random_commuting_circuit(n, gens, 2, &mut rng).unwrap();
            spec.validate().unwrap();
        }
    }
}
