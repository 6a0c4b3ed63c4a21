//! Outlier detection and grouping of frequency-mismatch deviations.

use nalgebra::{DMatrix, DVector};

use crate::localization::MismatchSeries;

/// Detection knobs; the defaults follow the usual robust-statistics choices.
#[derive(Debug, Clone, Copy)]
pub struct DetectorParams {
    /// MAD multiples a node's deviation spread must exceed to count as an
    /// outlier.
    pub k_mad: f64,
    /// Minimum absolute Pearson correlation for two outlier waveforms to
    /// belong to one group. Absolute: the endpoints of a disturbed line are
    /// anticorrelated by construction.
    pub corr_min: f64,
    /// Fraction of the loudest node's spread an outlier must reach. The MAD
    /// gate is scale-free, so without this floor the faint quasi-static
    /// tracking error around a strong disturbance (orders of magnitude below
    /// it) would register as extra groups.
    pub min_relative_std: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            k_mad: 5.0,
            corr_min: 0.9,
            min_relative_std: 0.05,
        }
    }
}

/// One set of outlier nodes moving together.
#[derive(Debug, Clone)]
pub struct Group {
    /// Kept-order column positions, ascending.
    pub members: Vec<usize>,
    /// First principal deviation waveform of the group (length T).
    pub waveform: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct OutlierGroups {
    pub groups: Vec<Group>,
    /// Per-column deviation spread std(psi_i - baseline_i).
    pub stds: Vec<f64>,
    /// Per-column max |psi_i - baseline_i|.
    pub max_abs: Vec<f64>,
    /// The deviation matrix the statistics came from (T x n_g).
    pub deviations: DMatrix<f64>,
    /// Full-network indices of the columns.
    pub kept: Vec<usize>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Pearson correlation of two equally long series; zero when either is
/// constant.
fn correlation(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let am = a.mean();
    let bm = b.mean();
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for k in 0..a.len() {
        let da = a[k] - am;
        let db = b[k] - bm;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if va <= 0.0 || vb <= 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

/// Flags nodes whose deviation spread stands out from the bulk (robust
/// z-score above `k_mad` MADs over the per-node stds) and merges them into
/// groups by single-linkage on absolute waveform correlation.
///
/// Needs at least 10 samples. An empty group list means "no disturbance
/// detected".
pub fn detect_and_group(series: &MismatchSeries, params: &DetectorParams) -> OutlierGroups {
    let t = series.len();
    assert!(t >= 10, "need at least 10 samples, got {t}");
    let n = series.n_kept();
    let deviations = series.deviations();

    let mut stds = Vec::with_capacity(n);
    let mut max_abs = Vec::with_capacity(n);
    for p in 0..n {
        let col = deviations.column(p);
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t as f64;
        stds.push(var.sqrt());
        max_abs.push(col.amax());
    }

    let med = median(&mut stds.clone());
    let mad = median(&mut stds.iter().map(|s| (s - med).abs()).collect::<Vec<_>>());
    // Guards for degenerate inputs: a relative slack so an exactly-uniform
    // bulk (mad = 0) cannot be split by last-ulp jitter, and a dust floor so
    // integrator roundoff on a clean run never trips the gate.
    let slack = 1e-9 * med;
    let dust = 1e-9 * (series.baseline.amax() + med);
    let max_std = stds.iter().cloned().fold(0.0f64, f64::max);
    let floor = dust.max(params.min_relative_std * max_std);
    let outliers: Vec<usize> = (0..n)
        .filter(|&p| stds[p] - med > params.k_mad * mad + slack && stds[p] > floor)
        .collect();

    // Single linkage: connected components of the |correlation| >= corr_min
    // graph over the outliers.
    let m = outliers.len();
    let mut assigned = vec![false; m];
    let mut groups = Vec::new();
    for start in 0..m {
        if assigned[start] {
            continue;
        }
        let mut stack = vec![start];
        assigned[start] = true;
        let mut members_local = vec![start];
        while let Some(u) = stack.pop() {
            for v in 0..m {
                if assigned[v] {
                    continue;
                }
                let cu: DVector<f64> = deviations.column(outliers[u]).into();
                let cv: DVector<f64> = deviations.column(outliers[v]).into();
                if correlation(&cu, &cv).abs() >= params.corr_min {
                    assigned[v] = true;
                    stack.push(v);
                    members_local.push(v);
                }
            }
        }
        let mut members: Vec<usize> = members_local.iter().map(|&u| outliers[u]).collect();
        members.sort_unstable();
        groups.push(Group {
            waveform: principal_waveform(&deviations, &members, &stds),
            members,
        });
    }
    groups.sort_by_key(|g| g.members[0]);

    OutlierGroups {
        groups,
        stds,
        max_abs,
        deviations,
        kept: series.kept.clone(),
    }
}

/// First left singular vector of the group's deviation block, scaled by its
/// singular value and sign-aligned with the loudest member.
fn principal_waveform(deviations: &DMatrix<f64>, members: &[usize], stds: &[f64]) -> DVector<f64> {
    let t = deviations.nrows();
    let block = DMatrix::from_fn(t, members.len(), |r, c| deviations[(r, members[c])]);
    let svd = block.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors");
    let mut waveform: DVector<f64> = u.column(0) * svd.singular_values[0];
    let loudest = members
        .iter()
        .enumerate()
        .max_by(|a, b| stds[*a.1].total_cmp(&stds[*b.1]))
        .map(|(c, _)| c)
        .unwrap_or(0);
    let reference: DVector<f64> = block.column(loudest).into();
    if correlation(&waveform, &reference) < 0.0 {
        waveform.neg_mut();
    }
    waveform
}
