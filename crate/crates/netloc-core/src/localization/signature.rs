//! Spatial signatures of disturbance hypotheses in the reduced system.
//!
//! Every signature is a zero-sum vector over the kept nodes: the direction
//! along which psi deviates from its baseline when the hypothesis is true.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kron::KronSystem;
use crate::laplacian::pair_difference;

/// What a signature claims about the disturbance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hypothesis {
    /// Additive disturbance at a measured node (full-network index).
    Node { node: usize },
    /// Line disturbance with both endpoints measured.
    Line { i: usize, j: usize },
    /// Line disturbance with both endpoints eliminated.
    LineReduced { i: usize, j: usize },
    /// Line disturbance with one measured endpoint.
    LineMixed { kept: usize, reduced: usize },
    /// Additive disturbance at an eliminated node.
    NodeReduced { node: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub hypothesis: Hypothesis,
    /// Deviation direction over kept nodes; zero-sum.
    pub vector: DVector<f64>,
}

fn kept_or_err(kron: &KronSystem, node: usize) -> Result<usize> {
    kron.kept_position(node)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {node} is not kept")))
}

fn reduced_or_err(kron: &KronSystem, node: usize) -> Result<usize> {
    kron.reduced_position(node)
        .ok_or_else(|| Error::InvalidTarget(format!("node index {node} is not reduced")))
}

/// e_i - 1/n_g: a disturbance at kept node `node` lifts psi there and lowers
/// it uniformly everywhere else.
pub fn nodal_signature(kron: &KronSystem, node: usize) -> Result<Signature> {
    let p = kept_or_err(kron, node)?;
    let n = kron.n_kept();
    let mut v = DVector::from_element(n, -1.0 / n as f64);
    v[p] += 1.0;
    Ok(Signature {
        hypothesis: Hypothesis::Node { node },
        vector: v,
    })
}

/// e_ij scaled by the unperturbed flow e_ij^T (L^r)^+ omega^r. A line with
/// zero flow has a zero signature: its disturbances are invisible in psi.
pub fn line_signature(kron: &KronSystem, i: usize, j: usize) -> Result<Signature> {
    let p = kept_or_err(kron, i)?;
    let q = kept_or_err(kron, j)?;
    let e = pair_difference(kron.n_kept(), p, q);
    let flow = (e.transpose() * kron.l_r_pinv() * kron.omega_r())[(0, 0)];
    Ok(Signature {
        hypothesis: Hypothesis::Line { i: i.min(j), j: i.max(j) },
        vector: e * flow,
    })
}

/// v = L^gc (L^cc)^-1 e_ij for a line inside the eliminated set: the
/// deviation is rank-1 along v on the component's boundary.
pub fn line_reduced_signature(kron: &KronSystem, i: usize, j: usize) -> Result<Signature> {
    let ci = reduced_or_err(kron, i)?;
    let cj = reduced_or_err(kron, j)?;
    let e = pair_difference(kron.n_reduced(), ci, cj);
    let v = kron.l_gc() * kron.solve_cc(&e);
    Ok(Signature {
        hypothesis: Hypothesis::LineReduced { i: i.min(j), j: i.max(j) },
        vector: v,
    })
}

/// v~ = e_i + L^gc (L^cc)^-1 e_j for a line with kept endpoint `kept_node`
/// and eliminated endpoint `reduced_node`.
pub fn line_mixed_signature(
    kron: &KronSystem,
    kept_node: usize,
    reduced_node: usize,
) -> Result<Signature> {
    let p = kept_or_err(kron, kept_node)?;
    let cj = reduced_or_err(kron, reduced_node)?;
    let mut e_c = DVector::zeros(kron.n_reduced());
    e_c[cj] = 1.0;
    let mut v = kron.l_gc() * kron.solve_cc(&e_c);
    v[p] += 1.0;
    Ok(Signature {
        hypothesis: Hypothesis::LineMixed {
            kept: kept_node,
            reduced: reduced_node,
        },
        vector: v,
    })
}

/// Mean-removed -L^gc (L^cc)^-1 e_j: the boundary pattern of a disturbance at
/// eliminated node `node`.
pub fn nodal_reduced_signature(kron: &KronSystem, node: usize) -> Result<Signature> {
    let cj = reduced_or_err(kron, node)?;
    let mut e_c = DVector::zeros(kron.n_reduced());
    e_c[cj] = 1.0;
    let mut v = -(kron.l_gc() * kron.solve_cc(&e_c));
    let mean = v.mean();
    v.apply(|x| *x -= mean);
    Ok(Signature {
        hypothesis: Hypothesis::NodeReduced { node },
        vector: v,
    })
}

/// Every hypothesis living inside one reduced component: its internal lines,
/// its mixed lines, and its nodes. Candidates for a group of outliers that
/// matches the component's boundary.
pub fn component_signatures(
    kron: &KronSystem,
    component: &crate::kron::ReducedComponent,
) -> Result<Vec<Signature>> {
    let mut out = Vec::new();
    let positions: Vec<usize> = component
        .members
        .iter()
        .map(|&m| kron.reduced_position(m).expect("component member is reduced"))
        .collect();
    for (a, &ca) in positions.iter().enumerate() {
        for &cb in positions.iter().skip(a + 1) {
            if kron.l_cc()[(ca, cb)] != 0.0 {
                out.push(line_reduced_signature(
                    kron,
                    kron.reduced()[ca],
                    kron.reduced()[cb],
                )?);
            }
        }
    }
    for &p in &component.boundary {
        for &ca in &positions {
            if kron.l_gc()[(p, ca)] != 0.0 {
                out.push(line_mixed_signature(kron, kron.kept()[p], kron.reduced()[ca])?);
            }
        }
    }
    for &m in &component.members {
        out.push(nodal_reduced_signature(kron, m)?);
    }
    Ok(out)
}
