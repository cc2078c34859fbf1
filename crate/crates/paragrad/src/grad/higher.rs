//! Higher-order partial derivatives and parity-grouped estimation.
//!
//! For a commuting-generator circuit and multi-index `α` of order `t`, the
//! derivative `∂^t C / ∂θ_α` equals `i^t 2^t ⟨ψ0| U† (∏_ℓ G_{α_ℓ}) H U |ψ0⟩`
//! when every `G_{α_ℓ}` anticommutes with the observable term, and is exactly
//! zero otherwise. Observables of equal order commute pairwise, so each order
//! is estimable from one circuit per observable-term group; more strongly,
//! observables whose orders share a parity also commute, giving one circuit
//! for all even (resp. odd) orders. The `2^t` factor makes estimator variance
//! grow exponentially with the order, so only small `t` (≤ 4 here) is
//! supported.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::ShotLedger;

use super::{sampled_stats, DerivativeObservableSet, ValidatedCommuting};

/// Largest supported derivative order.
pub const MAX_ORDER: usize = 4;

/// Parity class of derivative orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn matches(self, order: usize) -> bool {
        match self {
            Parity::Even => order % 2 == 0,
            Parity::Odd => order % 2 == 1,
        }
    }
}

/// Symmetric sparse tensor of order-`t` partial derivatives, keyed by sorted
/// parameter multi-indices. Missing entries are exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTensor {
    order: usize,
    n_params: usize,
    values: BTreeMap<Vec<usize>, f64>,
}

impl DerivativeTensor {
    fn new(order: usize, n_params: usize) -> Self {
        DerivativeTensor { order, n_params, values: BTreeMap::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// The derivative for a parameter multi-index (any order of indices).
    pub fn get(&self, indices: &[usize]) -> f64 {
        let mut key = indices.to_vec();
        key.sort_unstable();
        self.values.get(&key).copied().unwrap_or(0.0)
    }

    fn add(&mut self, mut key: Vec<usize>, value: f64) {
        key.sort_unstable();
        *self.values.entry(key).or_insert(0.0) += value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &f64)> {
        self.values.iter()
    }

    /// Dense symmetric matrix view for order-2 tensors.
    pub fn hessian(&self) -> Option<Vec<Vec<f64>>> {
        if self.order != 2 {
            return None;
        }
        let mut m = vec![vec![0.0; self.n_params]; self.n_params];
        for (key, &v) in &self.values {
            m[key[0]][key[1]] = v;
            m[key[1]][key[0]] = v;
        }
        Some(m)
    }
}

/// Per-(generator-multiset, term) raw values keyed for assembly.
type EntryValues = BTreeMap<(Vec<usize>, usize), f64>;

impl ValidatedCommuting {
    fn check_order(&self, order: usize) -> Result<()> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::OrderOutOfRange { order, max: MAX_ORDER });
        }
        Ok(())
    }

    /// Assembles the parameter-level tensor from generator-level entry values
    /// by the chain rule over the parameter map: each slot of the sorted
    /// parameter multi-index ranges independently over its generator orbit.
    fn assemble_tensor(&self, order: usize, values: &EntryValues) -> DerivativeTensor {
        let n_params = self.n_params();
        let mut orbit: Vec<Vec<usize>> = vec![Vec::new(); n_params];
        for (g, &p) in self.spec.param_map.iter().enumerate() {
            orbit[p].push(g);
        }
        let mut tensor = DerivativeTensor::new(order, n_params);
        let mut key = vec![0usize; order];
        enumerate_param_multisets(n_params, order, &mut key, &mut |params| {
            let mut total = 0.0;
            let mut gens = vec![0usize; order];
            product_over_slots(params, &orbit, &mut gens, 0, &mut |gen_tuple| {
                let mut sorted = gen_tuple.to_vec();
                sorted.sort_unstable();
                for term in 0..self.spec.observable.terms().len() {
                    if let Some(v) = values.get(&(sorted.clone(), term)) {
                        total += v;
                    }
                }
            });
            if total != 0.0 {
                tensor.add(params.to_vec(), total);
            }
        });
        tensor
    }

    /// Exact order-`t` derivative tensor by statevector evaluation.
    pub fn higher_order_exact(&self, order: usize) -> Result<DerivativeTensor> {
        self.check_order(order)?;
        let state = self.evolved_state()?;
        let mut values: EntryValues = BTreeMap::new();
        for set in self.derivative_observables(order)? {
            for e in &set.entries {
                let v = e.scale * state.expectation_word(&e.word)?.re;
                values.insert((e.indices.clone(), e.term), v);
            }
        }
        Ok(self.assemble_tensor(order, &values))
    }

    /// Sampled order-`t` derivative tensor: every entry of a term group is
    /// estimated from the same diagonalized circuit. Returns the actual
    /// circuit/shot ledger (one circuit per term group).
    pub fn higher_order_sampled(
        &self,
        order: usize,
        shots: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(DerivativeTensor, ShotLedger)> {
        self.check_order(order)?;
        let groups = self.derivative_observables(order)?;
        let values = self.sample_entry_values(&groups, shots, rng)?;
        let ledger = ShotLedger::one_gradient(format!("parallel-order-{order}"), groups.len(), shots);
        Ok((self.assemble_tensor(order, &values), ledger))
    }

    fn sample_entry_values(
        &self,
        groups: &[DerivativeObservableSet],
        shots: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<EntryValues> {
        let mut values: EntryValues = BTreeMap::new();
        for group in groups {
            let state = self.group_state(&group.basis_change)?;
            let targets: Vec<Vec<(u64, f64)>> =
                group.entries.iter().map(|e| vec![(e.z_mask, e.scale * e.conj_sign)]).collect();
            let refs: Vec<&Vec<(u64, f64)>> = targets.iter().collect();
            let stats = sampled_stats(&state, &refs, shots, rng);
            for (e, (mean, _)) in group.entries.iter().zip(stats) {
                values.insert((e.indices.clone(), e.term), mean);
            }
        }
        Ok(values)
    }

    /// Estimates all derivative orders of one parity (≤ `max_order`) from a
    /// single circuit per observable-term group. The even class includes
    /// order 0, whose empty product reproduces `C(θ)` itself. Commutation of
    /// all grouped observables is verified and a violation is reported as an
    /// internal error.
    pub fn parity_grouped_sampled(
        &self,
        parity: Parity,
        max_order: usize,
        shots: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(BTreeMap<usize, DerivativeTensor>, ShotLedger)> {
        if max_order > MAX_ORDER {
            return Err(Error::OrderOutOfRange { order: max_order, max: MAX_ORDER });
        }
        let orders: Vec<usize> = (0..=max_order).filter(|&t| parity.matches(t) && t > 0).collect();
        let include_cost = parity == Parity::Even;

        // Entries of all selected orders, flattened per term.
        let n_terms = self.spec.observable.terms().len();
        let mut per_term: Vec<Vec<super::DerivEntry>> = vec![Vec::new(); n_terms];
        for &t in &orders {
            for set in self.derivative_observables(t)? {
                for e in set.entries {
                    per_term[e.term].push(e);
                }
            }
        }
        if include_cost {
            for (t, &(c, w)) in self.spec.observable.terms().iter().enumerate() {
                per_term[t].push(super::DerivEntry {
                    indices: Vec::new(),
                    term: t,
                    word: w,
                    scale: c,
                    z_mask: 0,
                    conj_sign: 1.0,
                });
            }
        }
        // Same-parity observables must pairwise commute.
        for entries in &per_term {
            for i in 0..entries.len() {
                for j in (i + 1)..entries.len() {
                    if !entries[i].word.commutes_with(&entries[j].word)? {
                        return Err(Error::NotCommuting { i, j });
                    }
                }
            }
        }
        let groups = self.group_and_diagonalize(0, per_term)?;
        let values = self.sample_entry_values(&groups, shots, rng)?;
        let ledger = ShotLedger::one_gradient(
            format!("parallel-parity-{parity:?}"),
            groups.len(),
            shots,
        );

        let mut out = BTreeMap::new();
        if include_cost {
            let mut t0 = DerivativeTensor::new(0, self.n_params());
            let mut c = 0.0;
            for ((indices, _), v) in values.iter() {
                if indices.is_empty() {
                    c += v;
                }
            }
            t0.add(Vec::new(), c);
            out.insert(0, t0);
        }
        for &t in &orders {
            let filtered: EntryValues =
                values.iter().filter(|((idx, _), _)| idx.len() == t).map(|(k, v)| (k.clone(), *v)).collect();
            out.insert(t, self.assemble_tensor(t, &filtered));
        }
        Ok((out, ledger))
    }
}

fn enumerate_param_multisets(count: usize, order: usize, slots: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    fn rec(count: usize, order: usize, start: usize, slots: &mut Vec<usize>, depth: usize, f: &mut impl FnMut(&[usize])) {
        if depth == order {
            f(slots);
            return;
        }
        for v in start..count {
            slots[depth] = v;
            rec(count, order, v, slots, depth + 1, f);
        }
    }
    rec(count, order, 0, slots, 0, visit);
}

fn product_over_slots(
    params: &[usize],
    orbit: &[Vec<usize>],
    gens: &mut Vec<usize>,
    depth: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == params.len() {
        visit(gens);
        return;
    }
    for &g in &orbit[params[depth]] {
        gens[depth] = g;
        product_over_slots(params, orbit, gens, depth + 1, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grad::{random, CommutingCircuit};
    use crate::pauli::{PauliString, PauliSum};
    use crate::sim::Circuit;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn second_order_closed_form() {
        // C(θ) = cos 2θ: ∂²C = -4 cos 2θ, matching O_jj = -4H.
        let theta = 0.29;
        let obs = PauliSum::from_string(p("Z")).unwrap();
        let vc = CommutingCircuit::new(Circuit::new(1), vec![p("X")], vec![theta], obs)
            .validate()
            .unwrap();
        let t2 = vc.higher_order_exact(2).unwrap();
        assert_abs_diff_eq!(t2.get(&[0, 0]), -4.0 * (2.0 * theta).cos(), epsilon = 1e-12);
    }

    #[test]
    fn mixed_entry_with_commuting_generator_is_zero() {
        let obs = PauliSum::from_string(p("ZZ")).unwrap();
        let vc = CommutingCircuit::new(Circuit::new(2), vec![p("XI"), p("XX")], vec![0.4, 0.9], obs)
            .validate()
            .unwrap();
        // Generator 1 (XX) commutes with ZZ: any multi-index touching it is 0.
        let t2 = vc.higher_order_exact(2).unwrap();
        assert_eq!(t2.get(&[0, 1]), 0.0);
        assert_eq!(t2.get(&[1, 1]), 0.0);
        assert!(t2.get(&[0, 0]).abs() > 0.0);
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let spec = random::random_commuting_circuit(4, 4, 2, &mut rng).unwrap();
        let vc = spec.validate().unwrap();
        let t2 = vc.higher_order_exact(2).unwrap();
        let h = 1e-4;
        for j in 0..vc.n_params() {
            let mut tp = vc.spec().params.clone();
            tp[j] += h;
            let mut tm = vc.spec().params.clone();
            tm[j] -= h;
            let gp = vc.with_params(tp).unwrap().gradient_exact().unwrap();
            let gm = vc.with_params(tm).unwrap().gradient_exact().unwrap();
            for k in 0..vc.n_params() {
                let fd = (gp[k] - gm[k]) / (2.0 * h);
                assert_abs_diff_eq!(t2.get(&[j, k]), fd, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn hessian_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let spec = random::random_commuting_circuit(4, 5, 2, &mut rng).unwrap();
        let vc = spec.validate().unwrap();
        let (t2, _) = vc.higher_order_sampled(2, 2000, &mut rng).unwrap();
        let h = t2.hessian().unwrap();
        for j in 0..vc.n_params() {
            for k in 0..vc.n_params() {
                assert_eq!(h[j][k], h[k][j]);
            }
        }
    }

    #[test]
    fn parity_groups_commute_and_order_zero_matches_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let spec = random::random_commuting_circuit(4, 4, 1, &mut rng).unwrap();
            let vc = spec.validate().unwrap();
            let (tensors, _) = vc.parity_grouped_sampled(Parity::Even, 2, 400_000, &mut rng).unwrap();
            let c_sampled = tensors[&0].get(&[]);
            let c_exact = vc.cost().unwrap();
            assert!((c_sampled - c_exact).abs() < 0.05, "{c_sampled} vs {c_exact}");

            // Orders 1 and 3 entries commute (checked internally).
            let (odd, _) = vc.parity_grouped_sampled(Parity::Odd, 3, 100, &mut rng).unwrap();
            assert!(odd.contains_key(&1) && odd.contains_key(&3));
        }
    }

    #[test]
    fn order_out_of_range_rejected() {
        let obs = PauliSum::from_string(p("Z")).unwrap();
        let vc = CommutingCircuit::new(Circuit::new(1), vec![p("X")], vec![0.1], obs)
            .validate()
            .unwrap();
        assert!(vc.higher_order_exact(5).is_err());
        assert!(vc.higher_order_exact(0).is_err());
    }
}
