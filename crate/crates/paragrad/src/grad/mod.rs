//! Derivative machinery for commuting-generator circuits.
//!
//! A commuting-generator circuit is `C(θ) = ⟨0|V† U†(θ) H U(θ) V|0⟩` with
//! `U(θ) = ∏_j exp(-i θ_{map(j)} G_j)` over pairwise-commuting Pauli
//! generators, where each observable term either commutes or anticommutes
//! with every generator. Because the generators commute,
//!
//! ```text
//!     ∂C/∂θ_j = i ⟨ψ0| U†(θ) [G_j, H] U(θ) |ψ0⟩,
//! ```
//!
//! which vanishes for commuting pairs and equals the expectation of the
//! Hermitian word `O_j = 2i G_j H` otherwise. All the `O_j` mutually commute,
//! so one basis change makes every component of the gradient readable from a
//! single set of computational-basis samples. Several parameters may share a
//! generator orbit through `param_map`; gradients then accumulate over the
//! orbit by the chain rule.

pub mod diag;
mod fisher;
mod higher;
mod nonlocal;
pub mod random;
mod shift;

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

pub use diag::{
    diagonalizer_general, diagonalizer_second_order_x, diagonalizer_x_ansatz, x_ansatz_second_sign,
    x_ansatz_sign, DiagonalForm,
};
pub use fisher::FisherMatrix;
pub use higher::{DerivativeTensor, Parity};
pub use nonlocal::nonlocal_generator_gradient;
pub use shift::{parameter_shift_exact, parameter_shift_sampled, FOUR_TERM_RULE, TWO_TERM_SHIFT};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::report::{ComponentEstimate, GradientReport};
use crate::sim::param::ParamCircuit;
use crate::sim::{Circuit, StateVector};

/// A commuting-generator circuit specification.
#[derive(Debug, Clone)]
pub struct CommutingCircuit {
    /// State preparation `V` (arbitrary).
    pub prep: Circuit,
    /// Pairwise-commuting Hermitian Pauli generators, one per gate.
    pub generators: Vec<PauliString>,
    /// Gate index → parameter index; lets one parameter drive a whole orbit.
    pub param_map: Vec<usize>,
    /// Parameter values, one per distinct parameter.
    pub params: Vec<f64>,
    /// Measured observable.
    pub observable: PauliSum,
}

impl CommutingCircuit {
    /// One parameter per generator.
    pub fn new(prep: Circuit, generators: Vec<PauliString>, params: Vec<f64>, observable: PauliSum) -> Self {
        let param_map = (0..generators.len()).collect();
        CommutingCircuit { prep, generators, param_map, params, observable }
    }

    /// Explicit generator → parameter sharing.
    pub fn with_param_map(
        prep: Circuit,
        generators: Vec<PauliString>,
        param_map: Vec<usize>,
        params: Vec<f64>,
        observable: PauliSum,
    ) -> Self {
        CommutingCircuit { prep, generators, param_map, params, observable }
    }

    pub fn n_qubits(&self) -> usize {
        self.prep.n_qubits()
    }

    /// Checks dimensions, Hermiticity, pairwise commutation of the generators
    /// and the parameter map, and records the per-(generator, term)
    /// anticommutation tags.
    pub fn validate(self) -> Result<ValidatedCommuting> {
        let n = self.n_qubits();
        if self.observable.n_qubits() != n {
            return Err(Error::DimensionMismatch { left: n, right: self.observable.n_qubits() });
        }
        if self.param_map.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                left: self.generators.len(),
                right: self.param_map.len(),
            });
        }
        for g in &self.generators {
            if g.n_qubits() != n {
                return Err(Error::DimensionMismatch { left: n, right: g.n_qubits() });
            }
            if !g.is_hermitian() {
                return Err(Error::NonHermitian { phase_exp: g.phase_exp() });
            }
        }
        for i in 0..self.generators.len() {
            for j in (i + 1)..self.generators.len() {
                if !self.generators[i].commutes_with(&self.generators[j])? {
                    return Err(Error::NonCommutingGenerators { i, j });
                }
            }
        }
        for &p in &self.param_map {
            if p >= self.params.len() {
                return Err(Error::QubitOutOfRange { qubit: p, n_qubits: self.params.len() });
            }
        }
        let anti = self
            .generators
            .iter()
            .map(|g| {
                self.observable
                    .terms()
                    .iter()
                    .map(|(_, w)| Ok(!g.commutes_with(w)?))
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ValidatedCommuting { spec: self, anti })
    }
}

/// One first- or higher-order derivative observable and its diagonal form.
#[derive(Debug, Clone)]
pub struct DerivEntry {
    /// Generator multi-index (sorted), length = derivative order.
    pub indices: Vec<usize>,
    /// Observable term the entry belongs to.
    pub term: usize,
    /// The Hermitian word `O_α` up to the positive factor in `scale`.
    pub word: PauliString,
    /// Full magnitude: `2^t · c_term · sign(O_α)`.
    pub scale: f64,
    /// Z mask of the word after `basis_change`.
    pub z_mask: u64,
    /// ±1 conjugation sign folded into post-processing.
    pub conj_sign: f64,
}

impl DerivEntry {
    /// Post-measurement eigenvalue rule for a sampled bitstring.
    pub fn eigenvalue(&self, bits: u64) -> f64 {
        let parity = if (self.z_mask & bits).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        self.scale * self.conj_sign * parity
    }
}

/// A group of mutually commuting derivative observables measured from one
/// circuit: the entries, the Clifford basis change that diagonalizes them, and
/// the observable terms the group covers.
#[derive(Debug, Clone)]
pub struct DerivativeObservableSet {
    pub order: usize,
    pub terms: Vec<usize>,
    pub entries: Vec<DerivEntry>,
    pub basis_change: Circuit,
}

/// A validated commuting-generator circuit with anticommutation tags.
#[derive(Debug, Clone)]
pub struct ValidatedCommuting {
    spec: CommutingCircuit,
    anti: Vec<Vec<bool>>,
}

impl ValidatedCommuting {
    pub fn spec(&self) -> &CommutingCircuit {
        &self.spec
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits()
    }

    pub fn n_params(&self) -> usize {
        self.spec.params.len()
    }

    /// Whether generator `j` anticommutes with observable term `t`.
    pub fn anticommutes(&self, generator: usize, term: usize) -> bool {
        self.anti[generator][term]
    }

    /// Returns a copy with replaced parameter values.
    pub fn with_params(&self, params: Vec<f64>) -> Result<ValidatedCommuting> {
        if params.len() != self.spec.params.len() {
            return Err(Error::DimensionMismatch {
                left: self.spec.params.len(),
                right: params.len(),
            });
        }
        let mut out = self.clone();
        out.spec.params = params;
        Ok(out)
    }

    /// The parameterized gates `U(θ)` as a plain circuit.
    pub fn rotation_circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.n_qubits());
        for (g, &p) in self.spec.generators.iter().zip(&self.spec.param_map) {
            c.rotation(self.spec.params[p], *g)?;
        }
        Ok(c)
    }

    /// `|ψ0⟩ = V|0⟩`.
    pub fn prepared_state(&self) -> Result<StateVector> {
        let mut st = StateVector::zero(self.n_qubits());
        st.apply_circuit(&self.spec.prep)?;
        Ok(st)
    }

    /// `U(θ) V |0⟩`.
    pub fn evolved_state(&self) -> Result<StateVector> {
        let mut st = self.prepared_state()?;
        st.apply_circuit(&self.rotation_circuit()?)?;
        Ok(st)
    }

    /// The cost `C(θ)` at the stored parameters.
    pub fn cost(&self) -> Result<f64> {
        self.evolved_state()?.expectation(&self.spec.observable)
    }

    /// The cost at replacement parameters.
    pub fn cost_with(&self, params: &[f64]) -> Result<f64> {
        self.with_params(params.to_vec())?.cost()
    }

    /// The spec as a parameterized circuit (prep gates fixed, one rotation
    /// per generator reading its mapped parameter).
    pub fn to_param_circuit(&self) -> Result<ParamCircuit> {
        let mut pc = ParamCircuit::new(self.n_qubits(), self.n_params());
        for gate in self.spec.prep.gates() {
            pc.fixed(gate.clone())?;
        }
        for (g, &p) in self.spec.generators.iter().zip(&self.spec.param_map) {
            pc.rot(*g, p)?;
        }
        Ok(pc)
    }

    /// Exact gradient by statevector evaluation of each `i [G_j, H]`
    /// expectation. Components whose generators commute with every
    /// observable term are exactly zero.
    pub fn gradient_exact(&self) -> Result<Vec<f64>> {
        let state = self.evolved_state()?;
        let mut grad = vec![0.0; self.n_params()];
        for (j, g) in self.spec.generators.iter().enumerate() {
            let mut acc = 0.0;
            for (t, &(c, w)) in self.spec.observable.terms().iter().enumerate() {
                if !self.anti[j][t] {
                    continue;
                }
                // i [G_j, W] = 2i G_j W for anticommuting pairs.
                let o = g.mul(&w)?.mul_phase(1);
                let sign = o.hermitian_sign()?;
                let (word, _) = o.unsigned();
                acc += 2.0 * c * sign * state.expectation_word(&word)?.re;
            }
            grad[self.spec.param_map[j]] += acc;
        }
        Ok(grad)
    }

    /// First-order derivative observables grouped into simultaneously
    /// diagonalizable sets: `O_j = 2i G_j H_t` per anticommuting pair, with
    /// one basis change per group. All entries within a group pairwise
    /// commute by construction.
    pub fn gradient_observables(&self) -> Result<Vec<DerivativeObservableSet>> {
        self.derivative_observables(1)
    }

    /// Derivative observables of a fixed order `t`:
    /// `O_α = i^t 2^t (∏_ℓ G_{α_ℓ}) H_term` over multi-indices whose
    /// generators all anticommute with the term.
    pub(crate) fn derivative_observables(&self, order: usize) -> Result<Vec<DerivativeObservableSet>> {
        let term_entries: Vec<Vec<DerivEntry>> = (0..self.spec.observable.terms().len())
            .map(|t| self.term_entries(order, t))
            .collect::<Result<_>>()?;
        self.group_and_diagonalize(order, term_entries)
    }

    /// Raw entries (no diagonal info yet) for one observable term.
    fn term_entries(&self, order: usize, term: usize) -> Result<Vec<DerivEntry>> {
        let (c_term, w_term) = self.spec.observable.terms()[term];
        let anti: Vec<usize> =
            (0..self.spec.generators.len()).filter(|&j| self.anti[j][term]).collect();
        let mut entries = Vec::new();
        let mut combo = vec![0usize; order];
        enumerate_multisets(anti.len(), order, &mut combo, &mut |slots| {
            let indices: Vec<usize> = slots.iter().map(|&s| anti[s]).collect();
            let mut prod = PauliString::identity(self.n_qubits());
            for &j in &indices {
                prod = prod.mul(&self.spec.generators[j])?;
            }
            let o = prod.mul(&w_term)?.mul_phase((order % 4) as u8);
            let sign = o.hermitian_sign()?;
            let (word, _) = o.unsigned();
            entries.push(DerivEntry {
                indices,
                term,
                word,
                scale: (1u64 << order) as f64 * c_term * sign,
                z_mask: 0,
                conj_sign: 1.0,
            });
            Ok(())
        })?;
        Ok(entries)
    }

    /// Greedily merges per-term entry sets whose words jointly commute, then
    /// synthesizes one diagonalizer per group and fills the diagonal forms.
    pub(crate) fn group_and_diagonalize(
        &self,
        order: usize,
        term_entries: Vec<Vec<DerivEntry>>,
    ) -> Result<Vec<DerivativeObservableSet>> {
        let mut groups: Vec<(Vec<usize>, Vec<DerivEntry>)> = Vec::new();
        'terms: for (t, entries) in term_entries.into_iter().enumerate() {
            if entries.is_empty() {
                continue;
            }
            for (terms, members) in groups.iter_mut() {
                let mut ok = true;
                'check: for e in &entries {
                    for m in members.iter() {
                        if !e.word.commutes_with(&m.word)? {
                            ok = false;
                            break 'check;
                        }
                    }
                }
                if ok {
                    terms.push(t);
                    members.extend(entries);
                    continue 'terms;
                }
            }
            groups.push((vec![t], entries));
        }

        let mut out = Vec::with_capacity(groups.len());
        for (terms, mut entries) in groups {
            let words: Vec<PauliString> = entries.iter().map(|e| e.word).collect();
            let (basis_change, forms) = diagonalizer_general(&words)?;
            for (e, f) in entries.iter_mut().zip(&forms) {
                e.z_mask = f.z_mask;
                e.conj_sign = f.sign;
            }
            out.push(DerivativeObservableSet { order, terms, entries, basis_change });
        }
        Ok(out)
    }

    /// Runs the circuit of one diagonal group: `D · U(θ) · V |0⟩`.
    pub(crate) fn group_state(&self, basis_change: &Circuit) -> Result<StateVector> {
        let mut st = self.evolved_state()?;
        st.apply_circuit(basis_change)?;
        Ok(st)
    }

    /// Single-circuit-per-group gradient estimation: samples `shots` shots
    /// from each diagonal group and forms every component as the empirical
    /// mean of its eigenvalue rule. The ledger reports one circuit per group.
    pub fn gradient_sampled(&self, shots: u64, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, GradientReport)> {
        let groups = self.gradient_observables()?;
        let n_params = self.n_params();
        let mut grad = vec![0.0; n_params];
        let mut var = vec![0.0; n_params];
        for group in &groups {
            let state = self.group_state(&group.basis_change)?;
            // Aggregate the per-shot eigenvalues of all entries sharing a
            // parameter before computing statistics, so correlations between
            // orbit members inside one group are handled exactly.
            let mut targets: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
            for e in &group.entries {
                targets
                    .entry(self.spec.param_map[e.indices[0]])
                    .or_default()
                    .push((e.z_mask, e.scale * e.conj_sign));
            }
            let lists: Vec<&Vec<(u64, f64)>> = targets.values().collect();
            let stats = sampled_stats(&state, &lists, shots, rng);
            for ((&param, _), (mean, v)) in targets.iter().zip(stats) {
                grad[param] += mean;
                var[param] += v / shots as f64;
            }
        }
        let components = grad
            .iter()
            .zip(&var)
            .map(|(&estimate, &v)| ComponentEstimate { estimate, std_error: v.sqrt() })
            .collect();
        let report = GradientReport {
            method: "commuting-parallel".into(),
            components,
            circuits_used: groups.len(),
            shots_used: groups.len() as u64 * shots,
        };
        Ok((grad, report))
    }

    /// Parameter-shift baseline on the same spec (two circuits per gate).
    pub fn parameter_shift_sampled(&self, shots: u64, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, GradientReport)> {
        let pc = self.to_param_circuit()?;
        let initial = StateVector::zero(self.n_qubits());
        shift::parameter_shift_sampled(&pc, &initial, &self.spec.params, &self.spec.observable, shots, rng)
    }

    /// Exact parameter-shift gradient (infinite-shot limit of the baseline).
    pub fn parameter_shift_exact(&self) -> Result<Vec<f64>> {
        let pc = self.to_param_circuit()?;
        let initial = StateVector::zero(self.n_qubits());
        shift::parameter_shift_exact(&pc, &initial, &self.spec.params, &self.spec.observable)
    }
}

/// Enumerates sorted multisets of size `order` over `0..count` into `slots`.
fn enumerate_multisets(
    count: usize,
    order: usize,
    slots: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    fn rec(
        count: usize,
        order: usize,
        start: usize,
        slots: &mut Vec<usize>,
        depth: usize,
        f: &mut impl FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if depth == order {
            return f(slots);
        }
        for v in start..count {
            slots[depth] = v;
            rec(count, order, v, slots, depth + 1, f)?;
        }
        Ok(())
    }
    if count == 0 && order > 0 {
        return Ok(());
    }
    rec(count, order, 0, slots, 0, visit)
}

/// Sample once and return `(mean, per-shot variance)` of each aggregated
/// eigenvalue target. A target is a list of `(z_mask, coeff)` whose per-shot
/// values are summed before statistics.
pub(crate) fn sampled_stats(
    state: &StateVector,
    targets: &[&Vec<(u64, f64)>],
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    let samples = state.sample_indices(shots, rng);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for s in samples {
        *counts.entry(s).or_insert(0) += 1;
    }
    let m = shots as f64;
    targets
        .iter()
        .map(|list| {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for (&idx, &cnt) in &counts {
                let lam: f64 = list
                    .iter()
                    .map(|&(mask, coeff)| {
                        if (mask & idx).count_ones() % 2 == 0 {
                            coeff
                        } else {
                            -coeff
                        }
                    })
                    .sum();
                sum += cnt as f64 * lam;
                sumsq += cnt as f64 * lam * lam;
            }
            let mean = sum / m;
            let var = if shots > 1 { (sumsq - m * mean * mean) / (m - 1.0) } else { 0.0 };
            (mean, var.max(0.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Letter;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn single_x_spec(theta: f64) -> ValidatedCommuting {
        let obs = PauliSum::from_string(p("Z")).unwrap();
        CommutingCircuit::new(Circuit::new(1), vec![p("X")], vec![theta], obs)
            .validate()
            .unwrap()
    }

    #[test]
    fn validation_tags_and_rejection() {
        let obs = PauliSum::from_string(p("ZII")).unwrap();
        let vc = CommutingCircuit::new(Circuit::new(3), vec![p("XII"), p("IXI")], vec![0.1, 0.2], obs)
            .validate()
            .unwrap();
        assert!(vc.anticommutes(0, 0));
        assert!(!vc.anticommutes(1, 0));

        let obs = PauliSum::from_string(p("Z")).unwrap();
        let bad = CommutingCircuit::new(Circuit::new(1), vec![p("X"), p("Z")], vec![0.1, 0.2], obs);
        assert!(matches!(bad.validate(), Err(Error::NonCommutingGenerators { .. })));
    }

    #[test]
    fn single_generator_gradient_closed_form() {
        // C(θ) = cos 2θ, so ∂C = -2 sin 2θ.
        let theta = 0.37;
        let vc = single_x_spec(theta);
        let grad = vc.gradient_exact().unwrap();
        assert_abs_diff_eq!(grad[0], -2.0 * (2.0 * theta).sin(), epsilon = 1e-12);
    }

    #[test]
    fn commuting_generator_has_exact_zero_gradient() {
        let obs = PauliSum::from_string(p("ZI")).unwrap();
        let vc = CommutingCircuit::new(Circuit::new(2), vec![p("XX"), p("ZZ")], vec![0.3, 0.9], obs)
            .validate()
            .unwrap();
        let grad = vc.gradient_exact().unwrap();
        assert_eq!(grad[1], 0.0);
        assert!(grad[0].abs() > 0.0);
    }

    #[test]
    fn gradient_observable_example() {
        // G = X⊗X⊗I, H = Z⊗I⊗I → O = 2·Y⊗X⊗I
        let obs = PauliSum::from_string(p("ZII")).unwrap();
        let vc = CommutingCircuit::new(Circuit::new(3), vec![p("XXI")], vec![0.2], obs)
            .validate()
            .unwrap();
        let sets = vc.gradient_observables().unwrap();
        assert_eq!(sets.len(), 1);
        let e = &sets[0].entries[0];
        assert_eq!(e.word, p("YXI"));
        assert_eq!(e.scale, 2.0);
    }

    #[test]
    fn observable_entries_pairwise_commute_on_random_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let spec = random::random_commuting_circuit(4, 6, 2, &mut rng).unwrap();
            let vc = spec.validate().unwrap();
            for set in vc.gradient_observables().unwrap() {
                for i in 0..set.entries.len() {
                    for j in (i + 1)..set.entries.len() {
                        assert!(set.entries[i].word.commutes_with(&set.entries[j].word).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_gradient_single_term_uses_one_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let vc = single_x_spec(0.61);
        let (grad, report) = vc.gradient_sampled(200_000, &mut rng).unwrap();
        assert_eq!(report.circuits_used, 1);
        let exact = vc.gradient_exact().unwrap();
        let se = report.components[0].std_error.max(1e-4);
        assert!((grad[0] - exact[0]).abs() < 5.0 * se, "{} vs {}", grad[0], exact[0]);
    }

    #[test]
    fn shared_parameters_accumulate() {
        // Two identical generators sharing one parameter double the slope.
        let obs = PauliSum::from_string(p("Z")).unwrap();
        let single = CommutingCircuit::new(Circuit::new(1), vec![p("X")], vec![0.25], obs.clone())
            .validate()
            .unwrap();
        let shared = CommutingCircuit::with_param_map(
            Circuit::new(1),
            vec![p("X"), p("X")],
            vec![0, 0],
            vec![0.125],
            obs,
        )
        .validate()
        .unwrap();
        // Both circuits implement cos(2·(total angle)) with total angle 0.25.
        let g_single = single.gradient_exact().unwrap()[0];
        let g_shared = shared.gradient_exact().unwrap()[0];
        assert_abs_diff_eq!(g_shared, 2.0 * g_single, epsilon = 1e-12);
    }

    #[test]
    fn exact_gradient_matches_finite_differences_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let spec = random::random_commuting_circuit(5, 6, 2, &mut rng).unwrap();
            let vc = spec.validate().unwrap();
            let grad = vc.gradient_exact().unwrap();
            let h = 1e-5;
            for j in 0..vc.n_params() {
                let mut tp = vc.spec().params.clone();
                tp[j] += h;
                let mut tm = vc.spec().params.clone();
                tm[j] -= h;
                let fd = (vc.cost_with(&tp).unwrap() - vc.cost_with(&tm).unwrap()) / (2.0 * h);
                assert_abs_diff_eq!(grad[j], fd, epsilon = 1e-6);
            }
        }
    }
}
