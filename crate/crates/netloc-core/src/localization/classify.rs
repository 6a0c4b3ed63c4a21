//! Per-group classification of outlier groups into disturbance types.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::kron::KronSystem;
use crate::localization::detect::OutlierGroups;
use crate::localization::signature::{
    component_signatures, line_signature, nodal_signature, Signature,
};
use crate::network::Network;

/// A fit residual above this fraction downgrades the verdict to an unknown
/// reduced-component disturbance.
pub const RESIDUAL_LIMIT: f64 = 0.25;

/// One group member must respond at least this many times stronger than the
/// rest to be called dominant.
const DOMINANCE_FACTOR: f64 = 2.0;

/// Endpoint magnitudes of a line group may differ by at most this fraction.
const ANTISYMMETRY_SLACK: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DisturbanceClass {
    Node {
        node: String,
    },
    Line {
        i: String,
        j: String,
    },
    /// Disturbance somewhere inside an unmeasured region. `members` is empty
    /// when even the component could not be pinned down.
    ReducedComponent {
        members: Vec<String>,
        dominant: Option<String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub group: Vec<String>,
    pub class: DisturbanceClass,
    /// Relative misfit of the group's spatial pattern against the chosen
    /// signature; smaller is more confident.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeStat {
    pub id: String,
    pub std: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub deviation_stats: Vec<NodeStat>,
    pub groups: Vec<Vec<String>>,
    pub classifications: Vec<Classification>,
}

/// Spatial pattern of a group: regression of every node's deviation onto the
/// group's principal waveform. Robust to other simultaneous disturbances as
/// long as their waveforms differ.
fn spatial_pattern(groups: &OutlierGroups, waveform: &DVector<f64>) -> DVector<f64> {
    let denom = waveform.dot(waveform);
    let n = groups.deviations.ncols();
    if denom <= 0.0 {
        return DVector::zeros(n);
    }
    DVector::from_fn(n, |p, _| {
        groups.deviations.column(p).dot(waveform) / denom
    })
}

/// Relative orthogonal component of `pattern` against the signature span.
fn fit_residual(pattern: &DVector<f64>, signature: &Signature) -> f64 {
    let s = &signature.vector;
    let ss = s.dot(s);
    let pp = pattern.dot(pattern);
    if pp <= 0.0 {
        return 1.0;
    }
    if ss <= 0.0 {
        return f64::INFINITY;
    }
    let coefficient = pattern.dot(s) / ss;
    let mut orth = pattern.clone();
    orth.axpy(-coefficient, s, 1.0);
    (orth.dot(&orth) / pp).sqrt()
}

/// Classifies every group per the decision rules: singletons suggest a nodal
/// disturbance, edge pairs with antisymmetric deviations a line, groups
/// matching a reduced component's boundary a disturbance inside that
/// component. Among applicable hypotheses the best least-squares fit wins;
/// a poor best fit (residual above [`RESIDUAL_LIMIT`]) downgrades to an
/// unknown reduced-component verdict.
pub fn classify(
    groups: &OutlierGroups,
    kron: &KronSystem,
    network: &Network,
) -> LocalizationReport {
    let id_of = |kept_pos: usize| network.id_of(groups.kept[kept_pos]).to_string();
    let components = kron.reduced_components();

    let mut classifications = Vec::new();
    for group in &groups.groups {
        let pattern = spatial_pattern(groups, &group.waveform);
        // Candidates ordered by specificity; ties in residual keep the
        // earlier, more specific hypothesis.
        let mut candidates: Vec<(DisturbanceClass, f64)> = Vec::new();

        if let [single] = group.members[..] {
            if let Ok(sig) = nodal_signature(kron, groups.kept[single]) {
                candidates.push((
                    DisturbanceClass::Node { node: id_of(single) },
                    fit_residual(&pattern, &sig),
                ));
            }
        }

        if let [a, b] = group.members[..] {
            let (fa, fb) = (groups.kept[a], groups.kept[b]);
            if network.edge_between(fa, fb).is_some() {
                let (pa, pb) = (pattern[a], pattern[b]);
                let antisymmetric = pa * pb < 0.0
                    && (pa.abs() - pb.abs()).abs() <= ANTISYMMETRY_SLACK * pa.abs().max(pb.abs());
                if antisymmetric {
                    if let Ok(sig) = line_signature(kron, fa, fb) {
                        candidates.push((
                            DisturbanceClass::Line {
                                i: id_of(a.min(b)),
                                j: id_of(a.max(b)),
                            },
                            fit_residual(&pattern, &sig),
                        ));
                    }
                }
            }
        }

        for component in &components {
            if !group.members.iter().all(|m| component.boundary.contains(m)) {
                continue;
            }
            let Ok(sigs) = component_signatures(kron, component) else {
                continue;
            };
            let best = sigs
                .iter()
                .map(|s| fit_residual(&pattern, s))
                .fold(f64::INFINITY, f64::min);
            let dominant = dominant_member(&pattern, &group.members).map(&id_of);
            candidates.push((
                DisturbanceClass::ReducedComponent {
                    members: component
                        .members
                        .iter()
                        .map(|&m| network.id_of(m).to_string())
                        .collect(),
                    dominant,
                },
                best,
            ));
        }

        let best = candidates
            .into_iter()
            .enumerate()
            .min_by(|(ka, (_, ra)), (kb, (_, rb))| {
                ra.total_cmp(rb).then(ka.cmp(kb))
            })
            .map(|(_, c)| c);

        let (class, residual) = match best {
            Some((class, residual)) if residual <= RESIDUAL_LIMIT => (class, residual),
            Some((_, residual)) => (
                DisturbanceClass::ReducedComponent {
                    members: Vec::new(),
                    dominant: None,
                },
                residual,
            ),
            None => (
                DisturbanceClass::ReducedComponent {
                    members: Vec::new(),
                    dominant: None,
                },
                f64::INFINITY,
            ),
        };
        classifications.push(Classification {
            group: group.members.iter().map(|&m| id_of(m)).collect(),
            class,
            residual,
        });
    }

    LocalizationReport {
        deviation_stats: (0..groups.stds.len())
            .map(|p| NodeStat {
                id: id_of(p),
                std: groups.stds[p],
                max_abs: groups.max_abs[p],
            })
            .collect(),
        groups: groups
            .groups
            .iter()
            .map(|g| g.members.iter().map(|&m| id_of(m)).collect())
            .collect(),
        classifications,
    }
}

fn dominant_member(pattern: &DVector<f64>, members: &[usize]) -> Option<usize> {
    if members.len() < 2 {
        return members.first().copied();
    }
    let mut best = members[0];
    let mut second = 0.0f64;
    let mut top = 0.0f64;
    for &m in members {
        let a = pattern[m].abs();
        if a > top {
            second = top;
            top = a;
            best = m;
        } else if a > second {
            second = a;
        }
    }
    (top >= DOMINANCE_FACTOR * second).then_some(best)
}
