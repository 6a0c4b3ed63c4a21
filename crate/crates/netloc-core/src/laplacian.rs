//! Jacobian Laplacian of the interaction graph: construction, spectral
//! pseudoinverse and the intrinsic time-scale bounds derived from it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::Network;

/// Difference vector e_a - e_b with the fixed orientation +1 at the smaller
/// index, -1 at the larger. Keeps predictor signs reproducible; the sign
/// cancels in every observable quadratic form.
pub fn pair_difference(n: usize, a: usize, b: usize) -> DVector<f64> {
    assert!(a != b && a < n && b < n, "invalid pair ({a}, {b}) for n = {n}");
    let mut v = DVector::zeros(n);
    v[a.min(b)] = 1.0;
    v[a.max(b)] = -1.0;
    v
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending and
/// eigenvector columns permuted to match.
pub(crate) fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// Laplacian with its pseudoinverse and full spectrum.
#[derive(Debug, Clone)]
pub struct LaplacianBundle {
    pub l: DMatrix<f64>,
    pub pinv: DMatrix<f64>,
    /// Ascending; the first entry is the zero mode.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl LaplacianBundle {
    /// Wraps an already-assembled Laplacian (for reduced systems and
    /// imported matrices).
    pub fn from_matrix(l: DMatrix<f64>) -> Result<Self> {
        let n = l.nrows();
        let (values, vectors) = sorted_symmetric_eigen(&l);
        let tau = zero_threshold(values[n - 1].max(0.0));
        if n < 2 || values[1] <= tau {
            return Err(Error::DisconnectedGraph {
                lambda2: if n > 1 { values[1] } else { 0.0 },
                threshold: tau,
            });
        }
        let pinv = spectral_pinv(&values, &vectors)?;
        Ok(LaplacianBundle {
            l,
            pinv,
            eigenvalues: values,
            eigenvectors: vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Smallest nonzero eigenvalue (algebraic connectivity scale).
    pub fn lambda2(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Effective resistance between two nodes, e_ab^T L^+ e_ab.
    pub fn effective_resistance(&self, a: usize, b: usize) -> f64 {
        let e = pair_difference(self.dim(), a, b);
        (&e.transpose() * &self.pinv * &e)[(0, 0)]
    }
}

/// Kernel-detection threshold: eigenvalues at or below this count as zero.
fn zero_threshold(lambda_max: f64) -> f64 {
    1e-9 * lambda_max
}

fn spectral_pinv(
    values: &DVector<f64>,
    vectors: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = values.len();
    let lambda_max = values[n - 1];
    if lambda_max <= 0.0 {
        return Err(Error::MultipleZeroModes(n));
    }
    let tau = zero_threshold(lambda_max);
    let zero_modes = values.iter().filter(|&&v| v <= tau).count();
    if zero_modes != 1 {
        return Err(Error::MultipleZeroModes(zero_modes));
    }
    // pinv = sum_{lambda_k > tau} u_k u_k^T / lambda_k = W W^T
    // with W holding the kept eigenvectors scaled by 1/sqrt(lambda_k).
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > tau).collect();
    let mut w = DMatrix::zeros(n, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        w.set_column(col, &(vectors.column(k) / values[k].sqrt()));
    }
    Ok(&w * w.transpose())
}

/// Assembles the weighted Laplacian (edge weights scaled by f'(0)) and its
/// spectral data.
pub fn build_laplacian(network: &Network) -> Result<LaplacianBundle> {
    let slope = network.coupling().slope_at_zero();
    if slope <= 0.0 || !slope.is_finite() {
        return Err(Error::NonPositiveSlope(slope));
    }
    let n = network.node_count();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for e in network.edges() {
        let w = e.weight * slope;
        l[(e.i, e.j)] -= w;
        l[(e.j, e.i)] -= w;
        l[(e.i, e.i)] += w;
        l[(e.j, e.j)] += w;
    }
    LaplacianBundle::from_matrix(l)
}

/// Moore-Penrose pseudoinverse of a symmetric Laplacian via its spectrum,
/// treating eigenvalues below 1e-9 * lambda_max as exact zeros.
pub fn pseudoinverse(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    assert_eq!(l.nrows(), l.ncols(), "pseudoinverse expects a square matrix");
    let (values, vectors) = sorted_symmetric_eigen(l);
    spectral_pinv(&values, &vectors)
}

/// Slowest intrinsic rate of the system: min over nodes and modes j >= 2 of
/// d_i/m_i, lambda_j/sqrt(m_i) and lambda_j/d_i. Disturbances must vary
/// slower than this for the quasi-static picture to hold.
pub fn timescale_bound(bundle: &LaplacianBundle, network: &Network) -> f64 {
    // Every lambda_j term is minimized at j = 2.
    let lambda2 = bundle.lambda2();
    let mut bound = f64::INFINITY;
    for node in network.nodes() {
        if node.inertia > 0.0 {
            bound = bound.min(node.damping / node.inertia);
            bound = bound.min(lambda2 / node.inertia.sqrt());
        }
        bound = bound.min(lambda2 / node.damping);
    }
    bound
}

/// Fastest intrinsic rate: max over nodes of d_i/m_i, lambda_n/d_i and
/// sqrt(lambda_n/m_i). Upper bound used to pick the integration step.
pub fn fastest_rate(bundle: &LaplacianBundle, network: &Network) -> f64 {
    let lambda_n = bundle.lambda_max();
    let mut rate: f64 = 0.0;
    for node in network.nodes() {
        if node.inertia > 0.0 {
            rate = rate.max(node.damping / node.inertia);
            rate = rate.max((lambda_n / node.inertia).sqrt());
        }
        rate = rate.max(lambda_n / node.damping);
    }
    rate
}
