//! Analytical psi predictors for each disturbance placement.
//!
//! All predictors work in the quasi-static linear regime and take the
//! disturbance waveform already expressed in Jacobian-weight units (for a
//! line disturbance with nonlinear coupling, multiply the raw weight
//! perturbation by f'(0)).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kron::KronSystem;
use crate::laplacian::pair_difference;
use crate::localization::MismatchSeries;

const PIVOT_TOLERANCE: f64 = 1e-8;

/// Disturbance at kept node `node`:
/// `psi(t) = baseline + xi(t) (e_i - 1/n_g)`.
pub fn predict_nodal(
    kron: &KronSystem,
    node: usize,
    xi: &DVector<f64>,
    t0: f64,
    dt: f64,
) -> Result<MismatchSeries> {
    let p = kron
        .kept_position(node)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {node} is not kept")))?;
    let n = kron.n_kept();
    let baseline = kron.baseline();
    let mut psi = DMatrix::zeros(xi.len(), n);
    for k in 0..xi.len() {
        for q in 0..n {
            let dir = if q == p { 1.0 - 1.0 / n as f64 } else { -1.0 / n as f64 };
            psi[(k, q)] = baseline[q] + xi[k] * dir;
        }
    }
    Ok(MismatchSeries::from_rows(kron, t0, dt, psi))
}

/// Disturbance at eliminated node `node`: the deviation direction is the
/// mean-removed column -L^gc (L^cc)^-1 e_j, supported on the boundary of the
/// node's component before mean removal.
pub fn predict_nodal_reduced(
    kron: &KronSystem,
    node: usize,
    xi: &DVector<f64>,
    t0: f64,
    dt: f64,
) -> Result<(DVector<f64>, MismatchSeries)> {
    let sig = super::signature::nodal_reduced_signature(kron, node)?;
    let baseline = kron.baseline();
    let n = kron.n_kept();
    let mut psi = DMatrix::zeros(xi.len(), n);
    for k in 0..xi.len() {
        for q in 0..n {
            psi[(k, q)] = baseline[q] + xi[k] * sig.vector[q];
        }
    }
    Ok((sig.vector, MismatchSeries::from_rows(kron, t0, dt, psi)))
}

/// Line disturbance between kept endpoints:
/// `psi(t) = baseline - alpha(t) [e_ij^T (L^r)^+ omega^r] e_ij` with
/// `alpha = xi / (1 + xi e_ij^T (L^r)^+ e_ij)`.
pub fn predict_line_unreduced(
    kron: &KronSystem,
    edge: (usize, usize),
    xi: &DVector<f64>,
    t0: f64,
    dt: f64,
) -> Result<MismatchSeries> {
    let p = kron
        .kept_position(edge.0)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {} is not kept", edge.0)))?;
    let q = kron
        .kept_position(edge.1)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {} is not kept", edge.1)))?;
    let n = kron.n_kept();
    let e = pair_difference(n, p, q);
    let pe = kron.l_r_pinv() * &e;
    let resistance = e.dot(&pe);
    let flow = pe.dot(kron.omega_r());
    let baseline = kron.baseline();

    let mut psi = DMatrix::zeros(xi.len(), n);
    for k in 0..xi.len() {
        let denominator = 1.0 + xi[k] * resistance;
        if denominator.abs() < PIVOT_TOLERANCE {
            return Err(Error::SingularUpdate(denominator.abs()));
        }
        let alpha = xi[k] / denominator;
        for c in 0..n {
            psi[(k, c)] = baseline[c] - alpha * flow * e[c];
        }
    }
    Ok(MismatchSeries::from_rows(kron, t0, dt, psi))
}

/// Shared tail of the reduced/mixed line pipeline. The perturbed reduced
/// system is `L~r = L^r + beta(t) v v^T`, `omega~r = omega^r + beta(t) s v`;
/// composing the Sherman-Morrison update of (L^r)^+ gives
/// `psi(t) = baseline + gamma(t) v` with every time-varying factor gathered
/// in gamma, evaluated numerically sample by sample.
fn rank_one_mismatch(
    kron: &KronSystem,
    v: &DVector<f64>,
    betas: &[f64],
    source: f64,
    t0: f64,
    dt: f64,
) -> Result<MismatchSeries> {
    let pv = kron.l_r_pinv() * v;
    let v_resistance = v.dot(&pv); // v^T (L^r)^+ v
    let v_flow = pv.dot(kron.omega_r()); // v^T (L^r)^+ omega^r
    let baseline = kron.baseline();
    let n = kron.n_kept();

    let mut psi = DMatrix::zeros(betas.len(), n);
    for (k, &beta) in betas.iter().enumerate() {
        let denominator = 1.0 + beta * v_resistance;
        if denominator.abs() < PIVOT_TOLERANCE {
            return Err(Error::SingularUpdate(denominator.abs()));
        }
        let gamma =
            beta * source - beta * (v_flow + beta * source * v_resistance) / denominator;
        for c in 0..n {
            psi[(k, c)] = baseline[c] + gamma * v[c];
        }
    }
    Ok(MismatchSeries::from_rows(kron, t0, dt, psi))
}

/// Line disturbance with both endpoints eliminated. Returns the signature
/// `v = L^gc (L^cc)^-1 e_ij` and the predicted series, rank-1 along v.
pub fn predict_line_reduced(
    kron: &KronSystem,
    edge: (usize, usize),
    xi: &DVector<f64>,
    t0: f64,
    dt: f64,
) -> Result<(DVector<f64>, MismatchSeries)> {
    let ci = kron
        .reduced_position(edge.0)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {} is not reduced", edge.0)))?;
    let cj = kron
        .reduced_position(edge.1)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {} is not reduced", edge.1)))?;
    let e = pair_difference(kron.n_reduced(), ci, cj);
    let r = kron.solve_cc(&e);
    let rho = e.dot(&r); // e_ij^T (L^cc)^-1 e_ij
    let source = r.dot(kron.omega_c()); // e_ij^T (L^cc)^-1 omega^c
    let v = kron.l_gc() * &r;

    let betas: Vec<f64> = xi
        .iter()
        .map(|&x| {
            let denominator = 1.0 + x * rho;
            if denominator.abs() < PIVOT_TOLERANCE {
                Err(Error::SingularUpdate(denominator.abs()))
            } else {
                Ok(x / denominator)
            }
        })
        .collect::<Result<_>>()?;
    let series = rank_one_mismatch(kron, &v, &betas, source, t0, dt)?;
    Ok((v, series))
}

/// Line disturbance with kept endpoint `edge.0` and eliminated endpoint
/// `edge.1`. Returns the signature `v~ = e_i + L^gc (L^cc)^-1 e_j` and the
/// predicted series, rank-1 along v~.
pub fn predict_line_mixed(
    kron: &KronSystem,
    edge: (usize, usize),
    xi: &DVector<f64>,
    t0: f64,
    dt: f64,
) -> Result<(DVector<f64>, MismatchSeries)> {
    let p = kron
        .kept_position(edge.0)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {} is not kept", edge.0)))?;
    let cj = kron
        .reduced_position(edge.1)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {} is not reduced", edge.1)))?;
    let mut e_c = DVector::zeros(kron.n_reduced());
    e_c[cj] = 1.0;
    let r = kron.solve_cc(&e_c);
    let rho = r[cj]; // e_j^T (L^cc)^-1 e_j
    let source = r.dot(kron.omega_c());
    let mut v = kron.l_gc() * &r;
    v[p] += 1.0;

    let betas: Vec<f64> = xi
        .iter()
        .map(|&x| {
            let denominator = 1.0 + x * rho;
            if denominator.abs() < PIVOT_TOLERANCE {
                Err(Error::SingularUpdate(denominator.abs()))
            } else {
                Ok(x / denominator)
            }
        })
        .collect::<Result<_>>()?;
    let series = rank_one_mismatch(kron, &v, &betas, source, t0, dt)?;
    Ok((v, series))
}
