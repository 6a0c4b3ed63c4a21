//! Projection diagnostic for directed interaction graphs.
//!
//! Full localization theory for directed networks is out of scope; what
//! carries over is that every mismatch computation runs through
//! `w = L L^+ e_i`, the orthogonal projection of e_i onto the image of L.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Computes `w = L L^+ e_node` with the pseudoinverse taken by singular
/// value decomposition, so asymmetric (directed) Laplacians are fine. The
/// input must have zero row sums.
pub fn directed_projection(l: &DMatrix<f64>, node: usize) -> Result<DVector<f64>> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            n,
            l.ncols()
        )));
    }
    if node >= n {
        return Err(Error::InvalidTarget(format!("node index {node}")));
    }
    let scale = l.amax();
    for i in 0..n {
        if l.row(i).sum().abs() > 1e-8 * scale.max(1.0) {
            return Err(Error::Parse(format!("row {i} of the Laplacian does not sum to zero")));
        }
    }
    let svd = l.clone().svd(true, true);
    let eps = 1e-9 * svd.singular_values.max();
    let pinv = svd
        .pseudo_inverse(eps)
        .map_err(|e| Error::Parse(e.to_string()))?;
    let mut e = DVector::zeros(n);
    e[node] = 1.0;
    Ok(l * (pinv * e))
}
