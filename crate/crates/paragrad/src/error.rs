use thiserror::Error;

/// Errors produced by circuit construction, validation and estimation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("operator is not Hermitian (phase exponent {phase_exp})")]
    NonHermitian { phase_exp: u8 },

    #[error("generators {i} and {j} do not commute")]
    NonCommutingGenerators { i: usize, j: usize },

    #[error("blocks {a} and {b} have a mixed commutation relation")]
    MixedBlockRelation { a: usize, b: usize },

    #[error("generators {i} and {j} inside block {block} do not commute")]
    NonCommutingInBlock { block: usize, i: usize, j: usize },

    #[error("observable does not have the required form: {0}")]
    ObservableForm(String),

    #[error("generator does not have the required form: {0}")]
    GeneratorForm(String),

    #[error("derivative order {order} outside the supported range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("control qubit {control} overlaps the controlled body")]
    ControlOverlap { control: usize },

    #[error("gate not supported here: {0}")]
    UnsupportedGate(String),

    #[error("observables are not pairwise commuting: entries {i} and {j}")]
    NotCommuting { i: usize, j: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid model configuration: {0}")]
    InvalidModel(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
