//! Coupling functions between agents.
//!
//! The interaction is diffusive: node `i` feels `a_ij * f(x_i - x_j)` from
//! each neighbour `j`, with `f` odd and `f'(0) > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Odd coupling function applied to state differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CouplingSpec {
    /// f(x) = x
    Linear,
    /// f(x) = sin(x)
    Sin,
    /// f(x) = sum_q c_q sin(q x), coefficients ordered c_1, c_2, ...
    HigherOrder { coefficients: Vec<f64> },
}

impl CouplingSpec {
    /// Kuramoto coupling with harmonics up to `order`, c_q = 1/q.
    pub fn kuramoto_harmonics(order: usize) -> Self {
        CouplingSpec::HigherOrder {
            coefficients: (1..=order).map(|q| 1.0 / q as f64).collect(),
        }
    }

    pub fn eval(&self, delta: f64) -> f64 {
        match self {
            CouplingSpec::Linear => delta,
            CouplingSpec::Sin => delta.sin(),
            CouplingSpec::HigherOrder { coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * delta).sin())
                .sum(),
        }
    }

    pub fn slope(&self, delta: f64) -> f64 {
        match self {
            CouplingSpec::Linear => 1.0,
            CouplingSpec::Sin => delta.cos(),
            CouplingSpec::HigherOrder { coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let q = (k + 1) as f64;
                    c * q * (q * delta).cos()
                })
                .sum(),
        }
    }

    /// Slope at the origin; this is the factor turning edge weights into
    /// Jacobian weights.
    pub fn slope_at_zero(&self) -> f64 {
        self.slope(0.0)
    }

    /// Rejects couplings with non-positive slope at the origin.
    pub fn validate(&self) -> Result<()> {
        if let CouplingSpec::HigherOrder { coefficients } = self {
            if coefficients.is_empty() {
                return Err(Error::InvalidNetwork(
                    "higher_order coupling needs at least one coefficient".into(),
                ));
            }
        }
        let s = self.slope_at_zero();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::NonPositiveSlope(s));
        }
        Ok(())
    }
}

impl Default for CouplingSpec {
    fn default() -> Self {
        CouplingSpec::Linear
    }
}
