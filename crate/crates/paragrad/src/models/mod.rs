//! The bars-and-dots classification benchmark.
//!
//! Binary classification of `d`-dimensional vectors that are noisy versions
//! of either a bar (⌊d/2⌋ cyclically consecutive `+1` entries, the rest `-1`)
//! or dots (alternating ±1). The label function is invariant under cyclic
//! shifts, and the quantum models encode the data with single-qubit Y
//! rotations so that shifting the input equals permuting the qubits.
//!
//! Four models share this encoding and predict `sign⟨H⟩`:
//!
//! - **A**: translation-equivariant commuting X-generator circuit with all
//!   cyclic-orbit generators up to weight `K` and `H = sym(Z_1)/d`; its
//!   gradient is estimated with one circuit per `Z_r` term (`d` circuits).
//! - **B**: translation-equivariant layers of `sym(Z_1)`, `sym(Y_1)` and
//!   `{sym(X_1 X_r)}` (non-commuting between layers); parameter-shift with
//!   matching-parallelized shifts in the final two-qubit block.
//! - **C**: a quantum convolutional network with 10-parameter convolution
//!   blocks and 2-parameter pooling blocks, parameters shared per layer;
//!   parameter-shift with the four-term rule on controlled rotations.
//! - **D**: a separable model, three rotations per qubit; parameter-shift
//!   parallelized across qubits (6 circuits).

mod qcnn;
mod train;

pub use train::{gradient_dispatch, train, Adam, GradientMode, OptimizerConfig, StepRecord, TrainLog};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grad::CommutingCircuit;
use crate::pauli::{cyclic_twirl_orbit, Letter, PauliString, PauliSum};
use crate::sim::param::ParamCircuit;
use crate::sim::{encode_data, StateVector};

/// Dataset split tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

/// Noisy bar/dots vectors with ±1 labels.
#[derive(Debug, Clone)]
pub struct BarsDotsDataset {
    pub d: usize,
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<i8>,
    pub split: Split,
}

/// The pre-noise bar pattern: ⌊d/2⌋ consecutive `+1` entries starting at
/// `offset` (cyclically), `-1` elsewhere. Label `+1`.
pub fn bar_vector(d: usize, offset: usize) -> Vec<f64> {
    let width = d / 2;
    (0..d)
        .map(|i| if (i + d - offset % d) % d < width { 1.0 } else { -1.0 })
        .collect()
}

/// The pre-noise dots pattern: alternating ±1 with one of two phases.
/// Label `-1`.
pub fn dots_vector(d: usize, phase: bool) -> Vec<f64> {
    (0..d)
        .map(|i| {
            let v = if i % 2 == 0 { 1.0 } else { -1.0 };
            if phase {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// Samples a balanced dataset: a fair class coin per sample, bar offsets
/// uniform over the `d` cyclic positions, dots phase uniform over the two
/// alternating patterns, and i.i.d. unit-variance Gaussian noise added to
/// every entry.
pub fn generate_bars_dots(d: usize, n_samples: usize, split: Split, rng: &mut ChaCha8Rng) -> Result<BarsDotsDataset> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::InvalidModel(format!("bars-and-dots needs even d ≥ 2, got {d}")));
    }
    let mut inputs = Vec::with_capacity(n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let is_bar = rng.gen_bool(0.5);
        let mut v = if is_bar {
            bar_vector(d, rng.gen_range(0..d))
        } else {
            dots_vector(d, rng.gen_bool(0.5))
        };
        for x in &mut v {
            let noise: f64 = StandardNormal.sample(rng);
            *x += noise;
        }
        inputs.push(v);
        labels.push(if is_bar { 1 } else { -1 });
    }
    Ok(BarsDotsDataset { d, inputs, labels, split })
}

impl BarsDotsDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// CSV serialization: one row per sample, `d` values then the label.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (v, y) in self.inputs.iter().zip(&self.labels) {
            for x in v {
                out.push_str(&format!("{x:?},"));
            }
            out.push_str(&format!("{y}\n"));
        }
        out
    }

    pub fn from_csv(text: &str, split: Split) -> Result<BarsDotsDataset> {
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        let mut d = 0;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 2 {
                return Err(Error::Parse(format!("bad dataset row '{line}'")));
            }
            let (vals, label) = fields.split_at(fields.len() - 1);
            let v: Vec<f64> = vals
                .iter()
                .map(|f| f.trim().parse().map_err(|_| Error::Parse(format!("bad value '{f}'"))))
                .collect::<Result<_>>()?;
            if d == 0 {
                d = v.len();
            } else if v.len() != d {
                return Err(Error::Parse("ragged dataset rows".into()));
            }
            let y: i8 = label[0].trim().parse().map_err(|_| Error::Parse(format!("bad label '{}'", label[0])))?;
            inputs.push(v);
            labels.push(y);
        }
        Ok(BarsDotsDataset { d, inputs, labels, split })
    }
}

/// Which benchmark model to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    A,
    B,
    C,
    D,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::A => "A",
            ModelKind::B => "B",
            ModelKind::C => "C",
            ModelKind::D => "D",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(ModelKind::A),
            "B" | "b" => Ok(ModelKind::B),
            "C" | "c" => Ok(ModelKind::C),
            "D" | "d" => Ok(ModelKind::D),
            other => Err(Error::InvalidModel(format!("unknown model '{other}'"))),
        }
    }
}

/// Model configuration: `k_body` applies to Model A, `layers` to Model B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub d: usize,
    pub k_body: usize,
    pub layers: usize,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, d: usize) -> Self {
        ModelConfig { kind, d, k_body: 3, layers: 4 }
    }
}

/// Finite-shot gradient strategy per model.
#[derive(Debug, Clone)]
enum FiniteShotPlan {
    /// Model A: single-circuit-per-term parallel estimation.
    CommutingParallel,
    /// Model B: per-occurrence shifts plus matching-parallelized shifts of
    /// the final two-qubit block (ops with pairwise-disjoint supports).
    ShiftWithMatchings { standard_ops: Vec<usize>, matchings: Vec<Vec<usize>> },
    /// Model C: plain per-occurrence shifts (four-term rule on controlled).
    ShiftPerOccurrence,
    /// Model D: slots of disjoint single-qubit ops shifted simultaneously.
    SimultaneousSlots { slots: Vec<Vec<usize>> },
}

/// An executable benchmark model: encoding plus parameterized circuit plus
/// normalized observable; prediction is `sign⟨H⟩`.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    /// Parameterized circuit applied after the data encoding.
    pub circuit: ParamCircuit,
    /// Observable normalized so `|⟨H⟩| ≤ 1`.
    pub observable: PauliSum,
    plan: FiniteShotPlan,
    /// Model A only: orbit members per parameter, as X-type words.
    orbits: Option<Vec<Vec<PauliString>>>,
}

/// Cyclic orbits of X-type words with weight 1..=k, sorted by weight and
/// canonical representative; one Model A parameter per orbit.
pub fn x_type_orbits(d: usize, k: usize) -> Vec<Vec<PauliString>> {
    let mut reps: std::collections::BTreeMap<(usize, (u128, u8)), Vec<PauliString>> = Default::default();
    for bits in 1u64..(1 << d) {
        let w = bits.count_ones() as usize;
        if w > k {
            continue;
        }
        let word = PauliString::from_bits(d, bits, 0, 0);
        let orbit = cyclic_twirl_orbit(&word).expect("hermitian X word");
        let key = (w, orbit[0].canonical_key());
        reps.entry(key).or_insert(orbit);
    }
    reps.into_values().collect()
}

/// Builds an executable model from its configuration.
pub fn build_model(cfg: &ModelConfig) -> Result<Model> {
    let d = cfg.d;
    if d < 2 || d % 2 != 0 {
        return Err(Error::InvalidModel(format!("models need even d ≥ 2, got {d}")));
    }
    let sym_z1 = crate::pauli::twirl_sum(&PauliString::single(d, 0, Letter::Z))?;
    match cfg.kind {
        ModelKind::A => {
            if cfg.k_body == 0 || cfg.k_body > d {
                return Err(Error::InvalidModel(format!("k_body {} out of range", cfg.k_body)));
            }
            let orbits = x_type_orbits(d, cfg.k_body);
            let mut pc = ParamCircuit::new(d, orbits.len());
            for (p, orbit) in orbits.iter().enumerate() {
                for member in orbit {
                    pc.rot(*member, p)?;
                }
            }
            Ok(Model {
                config: *cfg,
                circuit: pc,
                observable: sym_z1.scaled(1.0 / d as f64),
                plan: FiniteShotPlan::CommutingParallel,
                orbits: Some(orbits),
            })
        }
        ModelKind::B => {
            if cfg.layers == 0 {
                return Err(Error::InvalidModel("Model B needs at least one layer".into()));
            }
            let per_layer = 2 + d / 2;
            let mut pc = ParamCircuit::new(d, cfg.layers * per_layer);
            let mut standard_ops = Vec::new();
            let mut edge_ops: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
            for layer in 0..cfg.layers {
                let base = layer * per_layer;
                let last_layer = layer == cfg.layers - 1;
                for (slot, letter) in [Letter::Z, Letter::Y].into_iter().enumerate() {
                    for member in cyclic_twirl_orbit(&PauliString::single(d, 0, letter))? {
                        if !last_layer || true {
                            // Single-qubit gates of every layer (including the
                            // last) shift individually: the two-qubit block
                            // comes after them.
                            standard_ops.push(pc.ops().len());
                        }
                        pc.rot(member, base + slot)?;
                    }
                }
                for r in 1..=d / 2 {
                    let word = PauliString::from_support(d, Letter::X, &[0, r]);
                    for member in cyclic_twirl_orbit(&word)? {
                        let idx = pc.ops().len();
                        if last_layer {
                            let support = member.support();
                            edge_ops.insert((support[0], support[1]), idx);
                        } else {
                            standard_ops.push(idx);
                        }
                        pc.rot(member, base + 2 + (r - 1))?;
                    }
                }
            }
            // One-factorization of K_d (round robin): d-1 perfect matchings
            // covering every unordered pair once; each matching's gates have
            // disjoint supports and shift simultaneously.
            let mut matchings = Vec::with_capacity(d - 1);
            for round in 0..d - 1 {
                let mut edges = vec![(d - 1, round)];
                for i in 1..d / 2 {
                    let a = (round + i) % (d - 1);
                    let b = (round + d - 1 - i) % (d - 1);
                    edges.push((a, b));
                }
                let ops = edges
                    .into_iter()
                    .map(|(a, b)| {
                        let key = (a.min(b), a.max(b));
                        *edge_ops.get(&key).expect("edge op")
                    })
                    .collect();
                matchings.push(ops);
            }
            Ok(Model {
                config: *cfg,
                circuit: pc,
                observable: sym_z1.scaled(1.0 / d as f64),
                plan: FiniteShotPlan::ShiftWithMatchings { standard_ops, matchings },
                orbits: None,
            })
        }
        ModelKind::C => {
            if !d.is_power_of_two() || d < 4 {
                return Err(Error::InvalidModel(format!("Model C needs d a power of two ≥ 4, got {d}")));
            }
            let (pc, observable) = qcnn::build_qcnn(d)?;
            Ok(Model {
                config: *cfg,
                circuit: pc,
                observable,
                plan: FiniteShotPlan::ShiftPerOccurrence,
                orbits: None,
            })
        }
        ModelKind::D => {
            let mut pc = ParamCircuit::new(d, 3 * d);
            let mut slots = vec![Vec::with_capacity(d); 3];
            for q in 0..d {
                for (k, letter) in [Letter::Z, Letter::Y, Letter::X].into_iter().enumerate() {
                    slots[k].push(pc.ops().len());
                    pc.rot(PauliString::single(d, q, letter), 3 * q + k)?;
                }
            }
            Ok(Model {
                config: *cfg,
                circuit: pc,
                observable: sym_z1.scaled(1.0 / d as f64),
                plan: FiniteShotPlan::SimultaneousSlots { slots },
                orbits: None,
            })
        }
    }
}

/// Circuits per gradient evaluation for one input (the Table-style count).
pub fn circuits_per_gradient(kind: ModelKind, d: usize, layers: usize) -> usize {
    match kind {
        ModelKind::A => d,
        ModelKind::B => d * d * (layers - 1) + 3 * d * (layers + 1) - 2,
        ModelKind::C => 24 * (2 * d - 3) + 8 * (d - 1),
        ModelKind::D => 6,
    }
}

/// Shots per gradient evaluation at `m` shots per circuit.
pub fn shots_per_gradient(kind: ModelKind, d: usize, layers: usize, m: u64) -> u64 {
    circuits_per_gradient(kind, d, layers) as u64 * m
}

impl Model {
    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    pub fn d(&self) -> usize {
        self.config.d
    }

    pub fn circuits_per_gradient(&self) -> usize {
        circuits_per_gradient(self.config.kind, self.config.d, self.config.layers)
    }

    /// `V_x |0⟩`.
    pub fn encoded_state(&self, x: &[f64]) -> Result<StateVector> {
        if x.len() != self.config.d {
            return Err(Error::DimensionMismatch { left: self.config.d, right: x.len() });
        }
        let mut st = StateVector::zero(self.config.d);
        st.apply_circuit(&encode_data(x)?)?;
        Ok(st)
    }

    /// Exact `⟨H⟩` for one input.
    pub fn expectation(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        self.circuit.expectation(&self.encoded_state(x)?, theta, &self.observable)
    }

    /// Class prediction `sign⟨H⟩` (ties resolve to +1).
    pub fn predict(&self, x: &[f64], theta: &[f64]) -> Result<i8> {
        Ok(if self.expectation(x, theta)? < 0.0 { -1 } else { 1 })
    }

    /// Exact gradient of `⟨H⟩` by the adjoint sweep.
    pub fn exact_gradient(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.circuit.adjoint_gradient(&self.encoded_state(x)?, theta, &self.observable)
    }

    /// Model A as a commuting-generator circuit for one input (`None` for
    /// the other models).
    pub fn commuting_view(&self, x: &[f64], theta: &[f64]) -> Result<Option<CommutingCircuit>> {
        let Some(orbits) = &self.orbits else { return Ok(None) };
        let mut generators = Vec::new();
        let mut param_map = Vec::new();
        for (p, orbit) in orbits.iter().enumerate() {
            for member in orbit {
                generators.push(*member);
                param_map.push(p);
            }
        }
        Ok(Some(CommutingCircuit::with_param_map(
            encode_data(x)?,
            generators,
            param_map,
            theta.to_vec(),
            self.observable.clone(),
        )))
    }

    /// Genuine finite-shot gradient of `⟨H⟩` with `shots` shots per circuit;
    /// returns the estimate and the number of distinct circuits sampled.
    pub fn finite_shot_gradient(
        &self,
        x: &[f64],
        theta: &[f64],
        shots: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<f64>, usize)> {
        train::finite_shot_gradient(self, x, theta, shots, rng)
    }

    pub(crate) fn plan(&self) -> &FiniteShotPlan {
        &self.plan
    }
}

/// Binary cross entropy with prediction probability `P(+1) = σ(6⟨H⟩)`.
///
/// `-log P(label)`; at `⟨H⟩ = 0` both labels cost `log 2`.
pub fn bce_loss(expectation: f64, label: i8) -> Result<f64> {
    if expectation.abs() > 1.0 + 1e-9 {
        return Err(Error::InvalidModel(format!("|⟨H⟩| = {} exceeds 1", expectation.abs())));
    }
    let t = 6.0 * label as f64 * expectation;
    // ln(1 + e^{-t}), stable on both tails.
    Ok(if t > 0.0 { (-t).exp().ln_1p() } else { -t + t.exp().ln_1p() })
}

/// Derivative of [`bce_loss`] with respect to `⟨H⟩`.
pub fn bce_dloss(expectation: f64, label: i8) -> f64 {
    let y = label as f64;
    let sigma = 1.0 / (1.0 + (-6.0 * y * expectation).exp());
    -6.0 * y * (1.0 - sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    #[test]
    fn bar_vectors_have_consecutive_block() {
        let v = bar_vector(16, 5);
        assert_eq!(v.iter().filter(|&&x| x > 0.0).count(), 8);
        // Consecutive cyclically: exactly one -1 → +1 transition.
        let transitions = (0..16).filter(|&i| v[i] < 0.0 && v[(i + 1) % 16] > 0.0).count();
        assert_eq!(transitions, 1);
    }

    #[test]
    fn dots_vectors_alternate() {
        for phase in [false, true] {
            let v = dots_vector(16, phase);
            for i in 0..16 {
                assert_eq!(v[i], -v[(i + 1) % 16]);
            }
        }
    }

    #[test]
    fn shifted_bar_is_a_bar_with_same_label() {
        // Cyclic shifts permute the offset; the label function is unchanged.
        for offset in 0..12 {
            let v = bar_vector(12, offset);
            let shifted: Vec<f64> = (0..12).map(|i| v[(i + 11) % 12]).collect();
            assert_eq!(shifted, bar_vector(12, (offset + 1) % 12));
        }
    }

    #[test]
    fn dataset_generation_and_csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ds = generate_bars_dots(8, 40, Split::Train, &mut rng).unwrap();
        assert_eq!(ds.len(), 40);
        let csv = ds.to_csv();
        let back = BarsDotsDataset::from_csv(&csv, Split::Train).unwrap();
        assert_eq!(back.inputs, ds.inputs);
        assert_eq!(back.labels, ds.labels);
        assert!(generate_bars_dots(7, 4, Split::Train, &mut rng).is_err());
    }

    #[test]
    fn parameter_counts_match_table() {
        let a = build_model(&ModelConfig::new(ModelKind::A, 16)).unwrap();
        assert_eq!(a.n_params(), 44);
        let b = build_model(&ModelConfig::new(ModelKind::B, 16)).unwrap();
        assert_eq!(b.n_params(), 40);
        let c = build_model(&ModelConfig::new(ModelKind::C, 16)).unwrap();
        assert_eq!(c.n_params(), 48);
        let d = build_model(&ModelConfig::new(ModelKind::D, 16)).unwrap();
        assert_eq!(d.n_params(), 48);
    }

    #[test]
    fn circuit_counts_match_table() {
        assert_eq!(circuits_per_gradient(ModelKind::A, 16, 4), 16);
        assert_eq!(circuits_per_gradient(ModelKind::B, 16, 4), 1006);
        assert_eq!(circuits_per_gradient(ModelKind::C, 16, 4), 816);
        assert_eq!(circuits_per_gradient(ModelKind::D, 16, 4), 6);
        assert_eq!(shots_per_gradient(ModelKind::C, 16, 4, 1), 56 * 16 - 80);
    }

    #[test]
    fn model_c_rejects_non_power_of_two() {
        assert!(build_model(&ModelConfig::new(ModelKind::C, 12)).is_err());
    }

    #[test]
    fn bce_examples() {
        assert_abs_diff_eq!(bce_loss(0.0, 1).unwrap(), std::f64::consts::LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(bce_loss(0.0, -1).unwrap(), std::f64::consts::LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(bce_loss(1.0, 1).unwrap(), 2.4756851377102278e-3, epsilon = 1e-12);
        assert!(bce_loss(1.1, 1).is_err());
        // Numerical derivative check.
        let h = 1e-6;
        let fd = (bce_loss(0.3 + h, -1).unwrap() - bce_loss(0.3 - h, -1).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(bce_dloss(0.3, -1), fd, epsilon = 1e-8);
    }

    #[test]
    fn model_a_equivariance_small() {
        let model = build_model(&ModelConfig::new(ModelKind::A, 6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let theta: Vec<f64> = (0..model.n_params()).map(|_| rng.gen::<f64>() * 6.28).collect();
        let x: Vec<f64> = (0..6).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let base = model.expectation(&x, &theta).unwrap();
        for s in 1..6 {
            let shifted: Vec<f64> = (0..6).map(|i| x[(i + 6 - s) % 6]).collect();
            assert_abs_diff_eq!(model.expectation(&shifted, &theta).unwrap(), base, epsilon = 1e-10);
        }
    }

    #[test]
    fn model_a_commuting_view_validates_and_counts_circuits() {
        let model = build_model(&ModelConfig::new(ModelKind::A, 8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let theta: Vec<f64> = (0..model.n_params()).map(|_| rng.gen::<f64>() * 6.28).collect();
        let x: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
        let vc = model.commuting_view(&x, &theta).unwrap().unwrap().validate().unwrap();
        let sets = vc.gradient_observables().unwrap();
        assert_eq!(sets.len(), 8);
    }

    #[test]
    fn model_a_parallel_gradient_equals_parameter_shift_exact() {
        let model = build_model(&ModelConfig::new(ModelKind::A, 6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let theta: Vec<f64> = (0..model.n_params()).map(|_| rng.gen::<f64>() * 6.28).collect();
        let x: Vec<f64> = (0..6).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let vc = model.commuting_view(&x, &theta).unwrap().unwrap().validate().unwrap();
        let parallel = vc.gradient_exact().unwrap();
        let shift = vc.parameter_shift_exact().unwrap();
        let adjoint = model.exact_gradient(&x, &theta).unwrap();
        for j in 0..model.n_params() {
            assert_abs_diff_eq!(parallel[j], shift[j], epsilon = 1e-6);
            assert_abs_diff_eq!(parallel[j], adjoint[j], epsilon = 1e-9);
        }
    }
}
