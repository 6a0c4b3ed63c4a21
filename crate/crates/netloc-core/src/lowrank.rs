//! Low-rank updates of Laplacian pseudoinverses.
//!
//! Both formulas are exact for pseudoinverses because every update vector
//! e_ij sums to zero and is therefore orthogonal to the kernel of a
//! connected-graph Laplacian. Updates whose vectors are not kernel-orthogonal
//! are outside the contract and rejected by construction (only node pairs can
//! be specified).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::laplacian::pair_difference;

const PIVOT_TOLERANCE: f64 = 1e-8;

/// Rank-1 update: (L + xi e_ij e_ij^T)^+ from L^+ alone.
pub fn sherman_morrison_pinv(
    l_pinv: &DMatrix<f64>,
    edge: (usize, usize),
    xi: f64,
) -> Result<DMatrix<f64>> {
    let n = l_pinv.nrows();
    let e = pair_difference(n, edge.0, edge.1);
    let pe: DVector<f64> = l_pinv * &e;
    let resistance = e.dot(&pe);
    let denominator = 1.0 + xi * resistance;
    if denominator.abs() < PIVOT_TOLERANCE {
        return Err(Error::SingularUpdate(denominator.abs()));
    }
    Ok(l_pinv - (&pe * pe.transpose()) * (xi / denominator))
}

/// Rank-k update: (L + sum_p xi_p e_p e_p^T)^+ via the Woodbury identity,
/// inverting only the k x k inner matrix I + V L^+ U.
pub fn smw_pinv(
    l_pinv: &DMatrix<f64>,
    edges: &[(usize, usize)],
    xis: &[f64],
) -> Result<DMatrix<f64>> {
    let k = edges.len();
    assert!(k >= 1, "need at least one update");
    assert_eq!(k, xis.len(), "one coefficient per edge");
    let n = l_pinv.nrows();

    let mut u = DMatrix::zeros(n, k);
    for (p, &(a, b)) in edges.iter().enumerate() {
        u.set_column(p, &pair_difference(n, a, b));
    }
    let pu = l_pinv * &u; // L^+ U
    let gram = u.transpose() * &pu; // U^T L^+ U

    // inner = I + diag(xi) * gram
    let mut inner = DMatrix::identity(k, k);
    for p in 0..k {
        for q in 0..k {
            inner[(p, q)] += xis[p] * gram[(p, q)];
        }
    }
    let svd = inner.clone().svd(true, true);
    let sigma_min = svd.singular_values.min();
    if sigma_min < PIVOT_TOLERANCE {
        return Err(Error::SingularUpdate(sigma_min));
    }
    let inner_inv = svd
        .pseudo_inverse(0.0)
        .map_err(|_| Error::SingularUpdate(sigma_min))?;

    // Row p of V is xi_p e_p^T, so V L^+ = diag(xi) (L^+ U)^T.
    let mut v_pinv = pu.transpose();
    for p in 0..k {
        v_pinv.row_mut(p).scale_mut(xis[p]);
    }
    Ok(l_pinv - &pu * inner_inv * v_pinv)
}
