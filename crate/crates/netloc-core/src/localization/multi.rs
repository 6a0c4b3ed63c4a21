//! Simultaneous-disturbance separation and the near-diagonality diagnostic.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::LaplacianBundle;
use crate::localization::signature::Signature;
use crate::localization::MismatchSeries;

const GRAM_CONDITION_LIMIT: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct SeparationResult {
    /// T x k: recovered amplitude waveform per hypothesis.
    pub amplitudes: DMatrix<f64>,
    /// Relative Frobenius misfit of the joint least-squares fit; quantifies
    /// how well the superposition of the given signatures explains the data.
    pub residual: f64,
}

/// Per-sample least squares of the deviations onto the signature vectors.
/// Exact when the disturbances really combine diagonally; the residual grows
/// gracefully when they do not.
pub fn separate_multi(
    series: &MismatchSeries,
    hypotheses: &[Signature],
) -> Result<SeparationResult> {
    let k = hypotheses.len();
    assert!(k >= 1, "need at least one hypothesis");
    let n = series.n_kept();
    let mut s = DMatrix::zeros(n, k);
    for (c, h) in hypotheses.iter().enumerate() {
        if h.vector.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "signature {c} has length {}, expected {n}",
                h.vector.len()
            )));
        }
        s.set_column(c, &h.vector);
    }
    let svd = s.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let gram_condition = if smin > 0.0 {
        (smax / smin) * (smax / smin)
    } else {
        f64::INFINITY
    };
    if gram_condition > GRAM_CONDITION_LIMIT {
        return Err(Error::DegenerateSignatures(gram_condition));
    }
    let s_pinv = svd
        .pseudo_inverse(0.0)
        .map_err(|_| Error::DegenerateSignatures(gram_condition))?;

    let deviations = series.deviations();
    // Row t of amplitudes solves min || dev_t - S a ||_2.
    let amplitudes = &deviations * s_pinv.transpose();
    let reconstructed = &amplitudes * s.transpose();
    let data_norm = deviations.norm();
    let residual = if data_norm > 0.0 {
        (&deviations - &reconstructed).norm() / data_norm
    } else {
        0.0
    };
    Ok(SeparationResult {
        amplitudes,
        residual,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OffDiagonality {
    /// Row-major k x k matrix of e_a^T L^+ e_b over the requested pairs.
    pub matrix: Vec<Vec<f64>>,
    pub max_offdiag_abs: f64,
    /// max |M_ab| / sqrt(M_aa M_bb) over a != b; at most 1 by
    /// Cauchy-Schwarz, and small exactly when simultaneous line
    /// disturbances decouple.
    pub max_ratio: f64,
}

/// Evaluates the interaction matrix of simultaneous line updates through the
/// spectral sum over the nonzero modes:
/// `M_ab = sum_{g >= 2} (u_{g,ia} - u_{g,ja})(u_{g,ib} - u_{g,jb}) / lambda_g`.
pub fn off_diagonality(bundle: &LaplacianBundle, pairs: &[(usize, usize)]) -> OffDiagonality {
    let n = bundle.dim();
    let k = pairs.len();
    let tau = 1e-9 * bundle.lambda_max();
    // Mode differences: d[g][a] = u_{g,ia} - u_{g,ja}.
    let mut matrix = vec![vec![0.0; k]; k];
    for g in 0..n {
        if bundle.eigenvalues[g] <= tau {
            continue;
        }
        let mode = bundle.eigenvectors.column(g);
        let diffs: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| {
                // Fixed orientation: +1 at the smaller index.
                mode[i.min(j)] - mode[i.max(j)]
            })
            .collect();
        for a in 0..k {
            for b in 0..k {
                matrix[a][b] += diffs[a] * diffs[b] / bundle.eigenvalues[g];
            }
        }
    }
    let mut max_offdiag_abs = 0.0f64;
    let mut max_ratio = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            max_offdiag_abs = max_offdiag_abs.max(matrix[a][b].abs());
            let denom = (matrix[a][a] * matrix[b][b]).sqrt();
            if denom > 0.0 {
                max_ratio = max_ratio.max(matrix[a][b].abs() / denom);
            }
        }
    }
    OffDiagonality {
        matrix,
        max_offdiag_abs,
        max_ratio,
    }
}
