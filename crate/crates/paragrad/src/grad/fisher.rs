//! Quantum Fisher information of commuting-generator circuits.
//!
//! For `|ψ(θ)⟩ = U(θ) V |0⟩` with commuting generators the Fisher information
//! reduces to the covariance matrix of the generators in the encoding state
//! `|ψ0⟩ = V|0⟩`:
//!
//! ```text
//!     F_jk = ⟨G_j G_k⟩ - ⟨G_j⟩⟨G_k⟩   on |ψ0⟩,
//! ```
//!
//! independent of θ, so one matrix serves an entire optimization run. All
//! entries are measurable in parallel because `{G_j} ∪ {G_j G_k}` is a
//! commuting family.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::report::ShotLedger;

use super::diag::diagonalizer_general;
use super::{sampled_stats, ValidatedCommuting};

/// Symmetric positive-semidefinite Fisher information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    n: usize,
    data: Vec<f64>,
}

impl FisherMatrix {
    /// Builds from row-major entries, verifying symmetry and positive
    /// semidefiniteness within `1e-8`.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { left: n * n, right: data.len() });
        }
        let m = FisherMatrix { n, data };
        for j in 0..n {
            for k in 0..n {
                if (m.entry(j, k) - m.entry(k, j)).abs() > 1e-10 {
                    return Err(Error::ObservableForm("Fisher matrix not symmetric".into()));
                }
            }
        }
        if m.min_eigenvalue() < -1e-8 {
            return Err(Error::ObservableForm(format!(
                "Fisher matrix not PSD: min eigenvalue {}",
                m.min_eigenvalue()
            )));
        }
        Ok(m)
    }

    pub fn n_params(&self) -> usize {
        self.n
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.n + k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|j| self.data[j * self.n..(j + 1) * self.n].to_vec()).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.n, self.n, &self.data);
        m.symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Entries rounded at `1e-10`, for byte-stable comparisons across runs.
    pub fn rounded(&self) -> Vec<f64> {
        self.data.iter().map(|v| (v * 1e10).round() / 1e10).collect()
    }
}

impl ValidatedCommuting {
    /// Exact Fisher information `Cov(G_j, G_k)` on `|ψ0⟩`, accumulated over
    /// the parameter map for shared generators. Does not depend on θ.
    pub fn fisher_exact(&self) -> Result<FisherMatrix> {
        let state = self.prepared_state()?;
        let gens = &self.spec.generators;
        let k = gens.len();
        let mut e = vec![0.0; k];
        for (j, g) in gens.iter().enumerate() {
            e[j] = state.expectation_word(g)?.re;
        }
        let mut cov = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in a..k {
                let prod = gens[a].mul(&gens[b])?;
                let c = state.expectation_word(&prod)?.re - e[a] * e[b];
                cov[a][b] = c;
                cov[b][a] = c;
            }
        }
        self.fold_fisher(&cov)
    }

    /// Sampled Fisher information: one circuit measuring all of
    /// `{G_j} ∪ {G_j G_k}` after a general diagonalizer over `|ψ0⟩`.
    pub fn fisher_sampled(&self, shots: u64, rng: &mut ChaCha8Rng) -> Result<(FisherMatrix, ShotLedger)> {
        let gens = &self.spec.generators;
        let k = gens.len();
        // Unique unsigned words for singles and pairwise products; signs are
        // reapplied per use.
        let mut words: Vec<PauliString> = Vec::new();
        let mut index: std::collections::BTreeMap<(u64, u64), usize> = std::collections::BTreeMap::new();
        let mut idx_of = |w: PauliString, words: &mut Vec<PauliString>| {
            let (unsigned, _) = w.unsigned();
            *index.entry((unsigned.x_bits(), unsigned.z_bits())).or_insert_with(|| {
                words.push(unsigned);
                words.len() - 1
            })
        };
        let mut single_refs = Vec::with_capacity(k);
        for g in gens {
            let sign = g.hermitian_sign()?;
            single_refs.push((idx_of(*g, &mut words), sign));
        }
        let mut pair_refs = vec![vec![(0usize, 0.0f64); k]; k];
        for a in 0..k {
            for b in a..k {
                let prod = gens[a].mul(&gens[b])?;
                let sign = prod.hermitian_sign()?;
                let r = (idx_of(prod, &mut words), sign);
                pair_refs[a][b] = r;
                pair_refs[b][a] = r;
            }
        }

        let (basis_change, forms) = diagonalizer_general(&words)?;
        let mut state = self.prepared_state()?;
        state.apply_circuit(&basis_change)?;
        let targets: Vec<Vec<(u64, f64)>> =
            forms.iter().map(|f| vec![(f.z_mask, f.sign)]).collect();
        let refs: Vec<&Vec<(u64, f64)>> = targets.iter().collect();
        let stats = sampled_stats(&state, &refs, shots, rng);
        let means: Vec<f64> = stats.iter().map(|s| s.0).collect();

        let e: Vec<f64> = single_refs.iter().map(|&(i, s)| s * means[i]).collect();
        let mut cov = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in a..k {
                let (i, s) = pair_refs[a][b];
                let c = s * means[i] - e[a] * e[b];
                cov[a][b] = c;
                cov[b][a] = c;
            }
        }
        let ledger = ShotLedger::one_gradient("fisher-parallel", 1, shots);
        Ok((self.fold_fisher_unchecked(&cov), ledger))
    }

    fn fold_params(&self, cov: &[Vec<f64>]) -> Vec<f64> {
        let n = self.n_params();
        let mut data = vec![0.0; n * n];
        for (a, &pa) in self.spec.param_map.iter().enumerate() {
            for (b, &pb) in self.spec.param_map.iter().enumerate() {
                data[pa * n + pb] += cov[a][b];
            }
        }
        data
    }

    fn fold_fisher(&self, cov: &[Vec<f64>]) -> Result<FisherMatrix> {
        FisherMatrix::new(self.n_params(), self.fold_params(cov))
    }

    /// Sampled covariances can dip slightly below PSD at finite shots; the
    /// matrix is returned as estimated, without the PSD gate.
    fn fold_fisher_unchecked(&self, cov: &[Vec<f64>]) -> FisherMatrix {
        FisherMatrix { n: self.n_params(), data: self.fold_params(cov) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grad::{random, CommutingCircuit};
    use crate::pauli::{PauliSum, PauliString};
    use crate::sim::Circuit;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn x_generators_on_zero_state_give_identity_pattern() {
        // ⟨G_j⟩ = 0 for weight-≥1 X words on |0…0⟩ and X-word variances are 1.
        let obs = PauliSum::from_string(p("ZII")).unwrap();
        let gens = vec![p("XII"), p("IXX"), p("XXX")];
        let vc = CommutingCircuit::new(Circuit::new(3), gens, vec![0.0; 3], obs)
            .validate()
            .unwrap();
        let f = vc.fisher_exact().unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(f.entry(j, j), 1.0, epsilon = 1e-12);
        }
        // Off-diagonals are ⟨G_a G_b⟩, X-words again: zero on |0⟩.
        assert_abs_diff_eq!(f.entry(0, 1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn theta_invariance_is_byte_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = random::random_commuting_circuit(3, 3, 1, &mut rng).unwrap();
        let vc = spec.validate().unwrap();
        let reference = vc.fisher_exact().unwrap().rounded();
        use rand::Rng;
        for _ in 0..10 {
            let params: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 6.28).collect();
            let f = vc.with_params(params).unwrap().fisher_exact().unwrap().rounded();
            assert_eq!(f, reference);
        }
    }

    #[test]
    fn sampled_fisher_converges_with_one_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let spec = random::random_commuting_circuit(3, 3, 1, &mut rng).unwrap();
        let vc = spec.validate().unwrap();
        let exact = vc.fisher_exact().unwrap();
        let (sampled, ledger) = vc.fisher_sampled(400_000, &mut rng).unwrap();
        assert_eq!(ledger.circuits_per_gradient, 1);
        for j in 0..3 {
            for k in 0..3 {
                assert!((sampled.entry(j, k) - exact.entry(j, k)).abs() < 0.02);
            }
        }
    }

    #[test]
    fn psd_gate_rejects_negative_matrices() {
        assert!(FisherMatrix::new(2, vec![1.0, 0.0, 0.0, -0.5]).is_err());
    }
}
