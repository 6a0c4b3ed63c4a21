//! Synthetic network generators: desk-scale stand-ins for real topologies.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};
use crate::network::{Network, Node};

/// Knobs shared by all generators; defaults give m = 1, d = 1 and natural
/// velocities drawn zero-mean uniform, scaled to 10% of mean degree * weight.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub inertia: f64,
    pub damping: f64,
    /// Multiplier on the default omega scale (0.1 * mean degree * mean weight).
    pub omega_scale_factor: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    pub coupling: CouplingSpec,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            inertia: 1.0,
            damping: 1.0,
            omega_scale_factor: 1.0,
            weight_min: 0.5,
            weight_max: 1.5,
            coupling: CouplingSpec::Linear,
        }
    }
}

fn make_nodes(cfg: &GeneratorConfig, omegas: Vec<f64>) -> Vec<Node> {
    omegas
        .into_iter()
        .enumerate()
        .map(|(k, w)| Node {
            id: (k + 1).to_string(),
            inertia: cfg.inertia,
            damping: cfg.damping,
            natural_velocity: w,
            measured: true,
        })
        .collect()
}

fn draw_omegas(
    rng: &mut ChaCha8Rng,
    n: usize,
    edge_count: usize,
    mean_weight: f64,
    cfg: &GeneratorConfig,
) -> Vec<f64> {
    let mean_degree = 2.0 * edge_count as f64 / n as f64;
    let scale = 0.1 * mean_degree * mean_weight * cfg.omega_scale_factor;
    let mut omegas: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..=scale)).collect();
    let mean = omegas.iter().sum::<f64>() / n as f64;
    for w in &mut omegas {
        *w -= mean;
    }
    omegas
}

/// Connected graph with `n` nodes and `m` edges: a uniform random attachment
/// tree plus `m - (n-1)` distinct extra edges.
pub fn random_connected(n: usize, m: usize, seed: u64, cfg: &GeneratorConfig) -> Result<Network> {
    if n < 2 {
        return Err(Error::GenerationFailed(format!("need n >= 2, got {n}")));
    }
    if m < n - 1 || m > n * (n - 1) / 2 {
        return Err(Error::GenerationFailed(format!(
            "edge count {m} outside [{}, {}] for n = {n}",
            n - 1,
            n * (n - 1) / 2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(m);
    for v in 1..n {
        let parent = rng.random_range(0..v);
        present.insert((parent.min(v), parent.max(v)));
        edges.push((parent, v));
    }
    while edges.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if present.insert(key) {
            edges.push(key);
        }
    }
    let weighted: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|&(i, j)| (i, j, rng.random_range(cfg.weight_min..=cfg.weight_max)))
        .collect();
    let mean_weight = weighted.iter().map(|e| e.2).sum::<f64>() / weighted.len() as f64;
    let omegas = draw_omegas(&mut rng, n, weighted.len(), mean_weight, cfg);
    Network::new(make_nodes(cfg, omegas), weighted, cfg.coupling.clone())
}

/// Path 1 - 2 - ... - n with unit weights and zero natural velocities.
pub fn path(n: usize, cfg: &GeneratorConfig) -> Result<Network> {
    if n < 2 {
        return Err(Error::GenerationFailed(format!("need n >= 2, got {n}")));
    }
    let edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|k| (k, k + 1, 1.0)).collect();
    Network::new(make_nodes(cfg, vec![0.0; n]), edges, cfg.coupling.clone())
}

/// Ring on n nodes with unit weights and zero natural velocities.
pub fn ring(n: usize, cfg: &GeneratorConfig) -> Result<Network> {
    if n < 3 {
        return Err(Error::GenerationFailed(format!("need n >= 3, got {n}")));
    }
    let mut edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|k| (k, k + 1, 1.0)).collect();
    edges.push((0, n - 1, 1.0));
    Network::new(make_nodes(cfg, vec![0.0; n]), edges, cfg.coupling.clone())
}

/// Two blocks of n/2 nodes with intra-block edge probability `p_in` and
/// inter-block probability `p_out`. Retries up to 100 sub-seeds for a
/// connected draw.
pub fn two_community(
    n: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
    cfg: &GeneratorConfig,
) -> Result<Network> {
    if n < 4 {
        return Err(Error::GenerationFailed(format!("need n >= 4, got {n}")));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::GenerationFailed(
            "probabilities must lie in [0, 1]".into(),
        ));
    }
    let half = n / 2;
    for attempt in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let same_block = (i < half) == (j < half);
                let p = if same_block { p_in } else { p_out };
                if rng.random_range(0.0..1.0) < p {
                    edges.push((i, j, rng.random_range(cfg.weight_min..=cfg.weight_max)));
                }
            }
        }
        if edges.len() < n - 1 {
            continue;
        }
        let mean_weight = edges.iter().map(|e| e.2).sum::<f64>() / edges.len() as f64;
        let omegas = draw_omegas(&mut rng, n, edges.len(), mean_weight, cfg);
        if let Ok(net) = Network::new(make_nodes(cfg, omegas), edges, cfg.coupling.clone()) {
            return Ok(net);
        }
    }
    Err(Error::GenerationFailed(format!(
        "no connected two-community draw in 100 attempts (n = {n}, p_in = {p_in}, p_out = {p_out})"
    )))
}
