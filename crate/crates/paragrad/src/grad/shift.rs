//! Parameter-shift baseline.
//!
//! For a gate `exp(-i θ P)` with a Pauli-word generator (eigenvalues ±1) the
//! derivative is the plain difference of the cost at `θ ± π/4` with unit
//! prefactor; the convention is pinned against finite differences by the test
//! suite. Controlled Pauli rotations have generator eigenvalues {0, ±1} (two
//! eigenvalue gaps) and use the standard four-term rule
//!
//! ```text
//!     C'(θ) = [C(θ+π/4) - C(θ-π/4)] + (1-√2)/2 · [C(θ+π/2) - C(θ-π/2)].
//! ```
//!
//! Each shifted cost is measured like any expectation: observable terms are
//! greedily grouped into simultaneously diagonalizable sets, one circuit per
//! group per shift.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::pauli::PauliSum;
use crate::report::{ComponentEstimate, GradientReport};
use crate::sim::param::{ParamCircuit, ParamOp};
use crate::sim::{Circuit, StateVector};

use super::diag::diagonalizer_general;
use super::sampled_stats;

/// Shift used for two-eigenvalue Pauli-word gates.
pub const TWO_TERM_SHIFT: f64 = FRAC_PI_4;

/// `(shift, coefficient)` pairs of the four-term controlled-rotation rule.
pub const FOUR_TERM_RULE: [(f64, f64); 4] = [
    (FRAC_PI_4, 1.0),
    (-FRAC_PI_4, -1.0),
    (FRAC_PI_2, (1.0 - SQRT_2) / 2.0),
    (-FRAC_PI_2, -(1.0 - SQRT_2) / 2.0),
];

fn rule_for(op: &ParamOp) -> Option<Vec<(f64, f64)>> {
    match op {
        ParamOp::Rot { .. } => Some(vec![(TWO_TERM_SHIFT, 1.0), (-TWO_TERM_SHIFT, -1.0)]),
        ParamOp::ControlledRot { .. } => Some(FOUR_TERM_RULE.to_vec()),
        ParamOp::Fixed(_) => None,
    }
}

/// Exact (infinite-shot) parameter-shift gradient of `⟨H⟩`.
pub fn parameter_shift_exact(
    pc: &ParamCircuit,
    initial: &StateVector,
    theta: &[f64],
    obs: &PauliSum,
) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; pc.n_params()];
    for (idx, op) in pc.ops().iter().enumerate() {
        let Some(rule) = rule_for(op) else { continue };
        let param = op.param().expect("parameterized op");
        for (shift, coeff) in rule {
            let circuit = pc.bind_shifted(theta, idx, shift)?;
            let mut st = initial.clone();
            st.apply_circuit(&circuit)?;
            grad[param] += coeff * st.expectation(obs)?;
        }
    }
    Ok(grad)
}

/// Observable measurement plan: greedily grouped diagonal term sets.
pub(crate) struct MeasurementPlan {
    /// Per group: basis change and `(z_mask, coeff)` targets (one aggregated
    /// target per group covering its terms).
    pub groups: Vec<(Circuit, Vec<(u64, f64)>)>,
}

impl MeasurementPlan {
    pub fn for_observable(obs: &PauliSum) -> Result<MeasurementPlan> {
        let mut groups: Vec<(Vec<usize>, Vec<crate::pauli::PauliString>)> = Vec::new();
        'terms: for (t, &(_, word)) in obs.terms().iter().enumerate() {
            for (terms, words) in groups.iter_mut() {
                let mut ok = true;
                for w in words.iter() {
                    if !word.commutes_with(w)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    terms.push(t);
                    words.push(word);
                    continue 'terms;
                }
            }
            groups.push((vec![t], vec![word]));
        }
        let mut out = Vec::with_capacity(groups.len());
        for (terms, words) in groups {
            let (basis_change, forms) = diagonalizer_general(&words)?;
            let targets = terms
                .iter()
                .zip(&forms)
                .map(|(&t, f)| (f.z_mask, obs.terms()[t].0 * f.sign))
                .collect();
            out.push((basis_change, targets));
        }
        Ok(MeasurementPlan { groups: out })
    }

    pub fn circuits_per_evaluation(&self) -> usize {
        self.groups.len()
    }

    /// Sampled estimate of `⟨H⟩` on the state prepared by `circuit`;
    /// returns `(estimate, variance-of-estimate)`.
    pub fn measure(
        &self,
        initial: &StateVector,
        circuit: &Circuit,
        shots: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, f64)> {
        let mut estimate = 0.0;
        let mut variance = 0.0;
        for (basis_change, targets) in &self.groups {
            let mut st = initial.clone();
            st.apply_circuit(circuit)?;
            st.apply_circuit(basis_change)?;
            let stats = sampled_stats(&st, &[targets], shots, rng);
            estimate += stats[0].0;
            variance += stats[0].1 / shots as f64;
        }
        Ok((estimate, variance))
    }
}

/// Finite-shot parameter-shift gradient: per Pauli-word parameter occurrence,
/// samples the two shifted circuits at shift π/4 and accumulates their
/// difference; controlled rotations use the four-term rule. The ledger counts
/// 2 circuits per Pauli-word occurrence and 4 per controlled rotation (times
/// the number of observable term groups).
pub fn parameter_shift_sampled(
    pc: &ParamCircuit,
    initial: &StateVector,
    theta: &[f64],
    obs: &PauliSum,
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, GradientReport)> {
    let plan = MeasurementPlan::for_observable(obs)?;
    let mut grad = vec![0.0; pc.n_params()];
    let mut var = vec![0.0; pc.n_params()];
    let mut circuits = 0usize;
    for (idx, op) in pc.ops().iter().enumerate() {
        let Some(rule) = rule_for(op) else { continue };
        let param = op.param().expect("parameterized op");
        for (shift, coeff) in rule {
            let circuit = pc.bind_shifted(theta, idx, shift)?;
            let (est, v) = plan.measure(initial, &circuit, shots, rng)?;
            grad[param] += coeff * est;
            var[param] += coeff * coeff * v;
            circuits += plan.circuits_per_evaluation();
        }
    }
    let components = grad
        .iter()
        .zip(&var)
        .map(|(&estimate, &v)| ComponentEstimate { estimate, std_error: v.sqrt() })
        .collect();
    let report = GradientReport {
        method: "parameter-shift".into(),
        components,
        circuits_used: circuits,
        shots_used: circuits as u64 * shots,
    };
    Ok((grad, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn two_term_rule_matches_closed_form() {
        // C(θ) = cos 2θ → rule yields exactly -2 sin 2θ.
        let mut pc = ParamCircuit::new(1, 1);
        pc.rot(p("X"), 0).unwrap();
        let obs = PauliSum::from_string(p("Z")).unwrap();
        let theta = [0.81];
        let grad = parameter_shift_exact(&pc, &StateVector::zero(1), &theta, &obs).unwrap();
        assert_abs_diff_eq!(grad[0], -2.0 * (2.0 * theta[0]).sin(), epsilon = 1e-12);
    }

    #[test]
    fn four_term_rule_matches_finite_difference() {
        let n = 2;
        let mut pc = ParamCircuit::new(n, 2);
        pc.fixed(crate::sim::Gate::Clifford { kind: crate::sim::CliffordKind::H, targets: vec![0] })
            .unwrap();
        pc.rot(p("YI"), 0).unwrap();
        pc.controlled_rot(0, true, p("IX"), 1).unwrap();
        let obs = PauliSum::from_terms(n, vec![(0.6, p("IZ")), (0.4, p("ZI"))]).unwrap();
        let theta = [0.3, -0.7];
        let grad = parameter_shift_exact(&pc, &StateVector::zero(n), &theta, &obs).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let mut tp = theta;
            tp[j] += h;
            let mut tm = theta;
            tm[j] -= h;
            let init = StateVector::zero(n);
            let fd =
                (pc.expectation(&init, &tp, &obs).unwrap() - pc.expectation(&init, &tm, &obs).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(grad[j], fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn circuit_count_is_two_per_pauli_parameter() {
        let mut pc = ParamCircuit::new(2, 3);
        pc.rot(p("XI"), 0).unwrap();
        pc.rot(p("IX"), 1).unwrap();
        pc.rot(p("XX"), 2).unwrap();
        let obs = PauliSum::from_string(p("ZI")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, report) =
            parameter_shift_sampled(&pc, &StateVector::zero(2), &[0.1, 0.2, 0.3], &obs, 64, &mut rng).unwrap();
        assert_eq!(report.circuits_used, 6);
    }
}
