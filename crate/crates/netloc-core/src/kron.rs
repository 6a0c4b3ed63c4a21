//! Kron reduction: Schur-complement elimination of unmeasured nodes.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::laplacian::{pseudoinverse, sorted_symmetric_eigen, LaplacianBundle};

const CONDITION_LIMIT: f64 = 1e12;

/// Connected set of eliminated nodes together with its measured boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedComponent {
    /// Full-network indices of the eliminated nodes.
    pub members: Vec<usize>,
    /// Positions (rows of the reduced system) of the kept nodes adjacent to
    /// the component, read off the nonzero pattern of L^gc.
    pub boundary: Vec<usize>,
}

/// Reduced Laplacian, reduced velocities, and the block data needed by the
/// analytical predictors.
#[derive(Debug, Clone)]
pub struct KronSystem {
    kept: Vec<usize>,
    reduced: Vec<usize>,
    l_r: DMatrix<f64>,
    omega_r: DVector<f64>,
    l_r_pinv: DMatrix<f64>,
    l_gg: DMatrix<f64>,
    l_gc: DMatrix<f64>,
    l_cg: DMatrix<f64>,
    l_cc: DMatrix<f64>,
    omega_g: DVector<f64>,
    omega_c: DVector<f64>,
    cc_factor: Option<Cholesky<f64, Dyn>>,
}

/// Eliminates `reduced_set` from the Laplacian:
/// `L^r = L^gg - L^gc (L^cc)^-1 L^cg` and
/// `omega^r = omega^g - L^gc (L^cc)^-1 omega^c`.
/// The interior factorization is computed once and reused for both.
pub fn kron_reduce(
    bundle: &LaplacianBundle,
    omega: &DVector<f64>,
    reduced_set: &[usize],
) -> Result<KronSystem> {
    let n = bundle.dim();
    if omega.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "omega has {} entries for an {n}-node Laplacian",
            omega.len()
        )));
    }
    let mut is_reduced = vec![false; n];
    for &r in reduced_set {
        if r >= n {
            return Err(Error::InvalidTarget(format!("node index {r}")));
        }
        if is_reduced[r] {
            return Err(Error::InvalidTarget(format!("node index {r} listed twice")));
        }
        is_reduced[r] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|&k| !is_reduced[k]).collect();
    let reduced: Vec<usize> = (0..n).filter(|&k| is_reduced[k]).collect();
    if kept.is_empty() {
        return Err(Error::InvalidTarget("cannot reduce every node".into()));
    }

    let pick = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| bundle.l[(rows[i], cols[j])])
    };
    let l_gg = pick(&kept, &kept);
    let l_gc = pick(&kept, &reduced);
    let l_cg = pick(&reduced, &kept);
    let l_cc = pick(&reduced, &reduced);
    let omega_g = DVector::from_iterator(kept.len(), kept.iter().map(|&k| omega[k]));
    let omega_c = DVector::from_iterator(reduced.len(), reduced.iter().map(|&k| omega[k]));

    let (l_r, omega_r, cc_factor) = if reduced.is_empty() {
        (l_gg.clone(), omega_g.clone(), None)
    } else {
        let (cc_values, _) = sorted_symmetric_eigen(&l_cc);
        let lo = cc_values[0];
        let hi = cc_values[cc_values.len() - 1];
        if lo <= 0.0 || hi / lo > CONDITION_LIMIT {
            return Err(Error::SingularInteriorBlock(if lo > 0.0 {
                hi / lo
            } else {
                f64::INFINITY
            }));
        }
        let factor = Cholesky::new(l_cc.clone())
            .ok_or(Error::SingularInteriorBlock(hi / lo))?;
        let cc_inv_cg = factor.solve(&l_cg);
        let cc_inv_omega = factor.solve(&omega_c);
        let mut l_r = &l_gg - &l_gc * cc_inv_cg;
        // The Schur complement of a symmetric matrix is symmetric; remove
        // the factorization roundoff explicitly.
        let sym = (&l_r + l_r.transpose()) * 0.5;
        l_r = sym;
        let omega_r = &omega_g - &l_gc * cc_inv_omega;
        (l_r, omega_r, Some(factor))
    };

    let l_r_pinv = if reduced.is_empty() {
        bundle.pinv.clone()
    } else {
        pseudoinverse(&l_r)?
    };

    Ok(KronSystem {
        kept,
        reduced,
        l_r,
        omega_r,
        l_r_pinv,
        l_gg,
        l_gc,
        l_cg,
        l_cc,
        omega_g,
        omega_c,
        cc_factor,
    })
}

impl KronSystem {
    pub fn n_kept(&self) -> usize {
        self.kept.len()
    }

    pub fn n_reduced(&self) -> usize {
        self.reduced.len()
    }

    /// Full-network indices of the kept nodes; `kept()[p]` is the origin of
    /// reduced-system row `p`.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn reduced(&self) -> &[usize] {
        &self.reduced
    }

    /// Row of the reduced system holding full-network node `full`, if kept.
    pub fn kept_position(&self, full: usize) -> Option<usize> {
        self.kept.iter().position(|&k| k == full)
    }

    /// Position within the eliminated block, if reduced.
    pub fn reduced_position(&self, full: usize) -> Option<usize> {
        self.reduced.iter().position(|&k| k == full)
    }

    pub fn l_r(&self) -> &DMatrix<f64> {
        &self.l_r
    }

    pub fn omega_r(&self) -> &DVector<f64> {
        &self.omega_r
    }

    pub fn l_r_pinv(&self) -> &DMatrix<f64> {
        &self.l_r_pinv
    }

    pub fn l_gg(&self) -> &DMatrix<f64> {
        &self.l_gg
    }

    pub fn l_gc(&self) -> &DMatrix<f64> {
        &self.l_gc
    }

    pub fn l_cg(&self) -> &DMatrix<f64> {
        &self.l_cg
    }

    pub fn l_cc(&self) -> &DMatrix<f64> {
        &self.l_cc
    }

    pub fn omega_g(&self) -> &DVector<f64> {
        &self.omega_g
    }

    pub fn omega_c(&self) -> &DVector<f64> {
        &self.omega_c
    }

    /// Solves L^cc y = b with the stored factorization.
    pub fn solve_cc(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.cc_factor {
            Some(f) => f.solve(b),
            None => panic!("no reduced block to solve against"),
        }
    }

    /// Unperturbed frequency mismatch: omega^r with its mean removed.
    pub fn baseline(&self) -> DVector<f64> {
        let mean = self.omega_r.mean();
        self.omega_r.map(|w| w - mean)
    }

    /// Connected components of the eliminated subgraph (adjacency read off
    /// L^cc) with their measured boundaries.
    pub fn reduced_components(&self) -> Vec<ReducedComponent> {
        let nc = self.reduced.len();
        let mut seen = vec![false; nc];
        let mut components = Vec::new();
        for start in 0..nc {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut members_local = Vec::new();
            seen[start] = true;
            while let Some(u) = stack.pop() {
                members_local.push(u);
                for v in 0..nc {
                    if !seen[v] && self.l_cc[(u, v)] != 0.0 {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            members_local.sort_unstable();
            let boundary: Vec<usize> = (0..self.kept.len())
                .filter(|&p| members_local.iter().any(|&c| self.l_gc[(p, c)] != 0.0))
                .collect();
            components.push(ReducedComponent {
                members: members_local.iter().map(|&c| self.reduced[c]).collect(),
                boundary,
            });
        }
        components
    }
}
