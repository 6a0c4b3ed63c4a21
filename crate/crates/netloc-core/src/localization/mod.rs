//! Disturbance localization from the frequency mismatch
//! `psi(t) = L^r x^g(t)`.
//!
//! Undisturbed, `psi` equals the mean-removed reduced natural velocities.
//! Each disturbance class bends it along a characteristic spatial signature;
//! the submodules provide the analytical predictors, the outlier detection
//! and grouping stage, per-group classification, multi-disturbance
//! separation, and the supporting diagnostics.

mod classify;
mod detect;
mod directed;
mod multi;
mod predict;
mod signature;

pub use classify::{classify, Classification, DisturbanceClass, LocalizationReport, NodeStat};
pub use detect::{detect_and_group, DetectorParams, Group, OutlierGroups};
pub use directed::directed_projection;
pub use multi::{off_diagonality, separate_multi, OffDiagonality, SeparationResult};
pub use predict::{
    predict_line_mixed, predict_line_reduced, predict_line_unreduced, predict_nodal,
    predict_nodal_reduced,
};
pub use signature::{
    component_signatures, line_mixed_signature, line_reduced_signature, line_signature,
    nodal_reduced_signature, nodal_signature, Hypothesis, Signature,
};

use nalgebra::{DMatrix, DVector};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::kron::KronSystem;
use crate::network::Network;

/// Frequency-mismatch time series over the kept nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchSeries {
    pub t0: f64,
    pub dt: f64,
    /// T x n_g; column p is psi at kept node `kept[p]`.
    pub psi: DMatrix<f64>,
    /// Mean-removed omega^r: the undisturbed value of every row.
    pub baseline: DVector<f64>,
    /// Full-network indices of the columns.
    pub kept: Vec<usize>,
}

impl MismatchSeries {
    pub fn len(&self) -> usize {
        self.psi.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.nrows() == 0
    }

    pub fn n_kept(&self) -> usize {
        self.psi.ncols()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// psi with the baseline subtracted from every row.
    pub fn deviations(&self) -> DMatrix<f64> {
        let mut d = self.psi.clone();
        for mut row in d.row_iter_mut() {
            for (p, v) in row.iter_mut().enumerate() {
                *v -= self.baseline[p];
            }
        }
        d
    }

    pub(crate) fn from_rows(
        kron: &KronSystem,
        t0: f64,
        dt: f64,
        psi: DMatrix<f64>,
    ) -> MismatchSeries {
        MismatchSeries {
            t0,
            dt,
            psi,
            baseline: kron.baseline(),
            kept: kron.kept().to_vec(),
        }
    }
}

/// Computes `psi(t) = L^r x^g(t)`: one matrix-vector product per sample and
/// nothing else. The trajectory must cover exactly the kept nodes.
pub fn frequency_mismatch(
    network: &Network,
    kron: &KronSystem,
    traj: &Trajectory,
) -> Result<MismatchSeries> {
    let expected: Vec<String> = kron
        .kept()
        .iter()
        .map(|&k| network.id_of(k).to_string())
        .collect();
    if traj.node_map.len() != expected.len() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} columns, reduced system keeps {}",
            traj.node_map.len(),
            expected.len()
        )));
    }
    let ordered = traj.select_columns(&expected).map_err(|_| {
        Error::DimensionMismatch("trajectory columns do not match the kept nodes".into())
    })?;
    // psi rows: (L^r x)^T = x^T L^r by symmetry of L^r.
    let psi = &ordered.samples * kron.l_r();
    Ok(MismatchSeries::from_rows(kron, ordered.t0, ordered.dt, psi))
}
