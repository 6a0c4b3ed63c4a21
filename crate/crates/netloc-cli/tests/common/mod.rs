//! Shared helpers for the integration and acceptance suites.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use netloc_core::{KronSystem, Network};

/// Worker cap for Monte-Carlo trials: NETLOC_THREADS, defaulting to the
/// available parallelism.
pub fn worker_count() -> usize {
    std::env::var("NETLOC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Runs `total` independent trials across the worker pool and returns how
/// many succeeded.
pub fn count_successes<F>(total: usize, trial: F) -> usize
where
    F: Fn(usize) -> bool + Sync,
{
    let workers = worker_count().min(total).max(1);
    let counter = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let trial = &trial;
            let counter = &counter;
            scope.spawn(move || {
                for k in (w..total).step_by(workers) {
                    if trial(k) {
                        counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    }
                }
            });
        }
    });
    counter.into_inner()
}

/// Largest per-column standard deviation of `m` after removing each
/// column's mean: the "deviation scale" that measurement noise is quoted
/// against.
pub fn deviation_scale(m: &DMatrix<f64>) -> f64 {
    let t = m.nrows() as f64;
    let mut scale = 0.0f64;
    for c in 0..m.ncols() {
        let col = m.column(c);
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t;
        scale = scale.max(var.sqrt());
    }
    scale
}

/// Adds iid Gaussian measurement noise of the given standard deviation.
pub fn with_noise(m: &DMatrix<f64>, sigma: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = m.clone();
    for v in out.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += sigma * g;
    }
    out
}

/// Per-column standard deviations.
pub fn column_stds(m: &DMatrix<f64>) -> Vec<f64> {
    let t = m.nrows() as f64;
    (0..m.ncols())
        .map(|c| {
            let col = m.column(c);
            let mean = col.mean();
            (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t).sqrt()
        })
        .collect()
}

/// Indices of the two largest values.
pub fn top_two(values: &[f64]) -> (usize, usize) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    (order[0], order[1])
}

/// Unperturbed flow through each edge, |e_ij^T (L^r)^+ omega^r|, in edge
/// order. Lines with vanishing flow are invisible to psi at linear order.
pub fn edge_flows(net: &Network, kron: &KronSystem) -> Vec<f64> {
    net.edges()
        .iter()
        .map(|e| {
            let p = kron.kept_position(e.i).expect("kept");
            let q = kron.kept_position(e.j).expect("kept");
            let d = netloc_core::pair_difference(kron.n_kept(), p, q);
            (d.transpose() * kron.l_r_pinv() * kron.omega_r())[(0, 0)].abs()
        })
        .collect()
}

/// Edges whose unperturbed flow is at or above the median, as positions in
/// the edge list. Disturbance placement mirrors the method's stated domain
/// of reliability: lines that actually carry flow.
pub fn flow_carrying_edges(net: &Network, kron: &KronSystem) -> Vec<usize> {
    let flows = edge_flows(net, kron);
    let mut sorted = flows.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    (0..flows.len()).filter(|&k| flows[k] >= median).collect()
}

/// Pearson correlation magnitude between two series.
pub fn abs_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let am = a.iter().sum::<f64>() / n;
    let bm = b.iter().sum::<f64>() / n;
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
        (cov / (va * vb).sqrt()).abs()
    }
}
