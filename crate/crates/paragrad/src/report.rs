//! Shot accounting and serialized gradient reports.

use serde::{Deserialize, Serialize};

/// Per-method circuit and shot counts.
///
/// `cumulative_shots` always equals the sum of `circuits × shots_per_circuit`
/// over all recorded gradient evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotLedger {
    pub method: String,
    pub circuits_per_gradient: usize,
    pub shots_per_circuit: u64,
    pub cumulative_shots: u64,
}

impl ShotLedger {
    /// A ledger recording one gradient evaluation.
    pub fn one_gradient(method: impl Into<String>, circuits: usize, shots_per_circuit: u64) -> Self {
        ShotLedger {
            method: method.into(),
            circuits_per_gradient: circuits,
            shots_per_circuit,
            cumulative_shots: circuits as u64 * shots_per_circuit,
        }
    }

    /// Records `count` further gradient evaluations.
    pub fn record_gradients(&mut self, count: u64) {
        self.cumulative_shots += count * self.circuits_per_gradient as u64 * self.shots_per_circuit;
    }

    pub fn shots_per_gradient(&self) -> u64 {
        self.circuits_per_gradient as u64 * self.shots_per_circuit
    }
}

/// One estimated gradient component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Structured record of one gradient estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub method: String,
    pub components: Vec<ComponentEstimate>,
    pub circuits_used: usize,
    pub shots_used: u64,
}

impl GradientReport {
    pub fn estimates(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.estimate).collect()
    }

    pub fn std_errors(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.std_error).collect()
    }
}
