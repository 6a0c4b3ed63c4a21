//! Disturbance signals, their targets, and the slow/small admissibility
//! checks.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::{timescale_bound, LaplacianBundle};
use crate::network::Network;

/// Default gate on both admissibility margins. The underlying conditions are
/// stated with "much smaller than"; one order of magnitude is the
/// conservative reading.
pub const DEFAULT_MARGIN: f64 = 10.0;

/// Time signal xi(t) attached to a node or line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSpec {
    /// xi(t) = xi0 sin(omega_m t)
    Oscillating { xi0: f64, omega_m: f64 },
    /// 0 before t_on, slope (t - t_on) after.
    Ramp { slope: f64, t_on: f64 },
    /// 0 before t_on, xi0 after.
    Step { xi0: f64, t_on: f64 },
    /// Gaussian white noise through a single-pole low-pass filter with the
    /// given cutoff rate, held piecewise-constant on an internal grid of
    /// 0.1 / cutoff. Stationary standard deviation is sigma.
    FilteredNoise { sigma: f64, cutoff: f64, seed: u64 },
}

impl SignalSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            SignalSpec::Oscillating { xi0, omega_m } => {
                xi0.is_finite() && omega_m.is_finite() && *omega_m >= 0.0
            }
            SignalSpec::Ramp { slope, t_on } => slope.is_finite() && t_on.is_finite(),
            SignalSpec::Step { xi0, t_on } => xi0.is_finite() && t_on.is_finite(),
            SignalSpec::FilteredNoise { sigma, cutoff, .. } => {
                sigma.is_finite() && *sigma >= 0.0 && cutoff.is_finite() && *cutoff > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parse(format!("invalid signal parameters: {self:?}")))
        }
    }

    /// Analytic bound on max_t |dxi/dt|. Infinite for steps: the jump
    /// violates the slow-disturbance condition at the onset instant.
    pub fn rate_bound(&self) -> f64 {
        match self {
            SignalSpec::Oscillating { xi0, omega_m } => xi0.abs() * omega_m,
            SignalSpec::Ramp { slope, .. } => slope.abs(),
            SignalSpec::Step { xi0, .. } => {
                if *xi0 == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            // Statistical 3-sigma bound on the filtered derivative.
            SignalSpec::FilteredNoise { sigma, cutoff, .. } => 3.0 * sigma * cutoff,
        }
    }

    /// Bound on max_t |xi| over a run of the given length.
    pub fn amplitude_bound(&self, horizon: f64) -> f64 {
        match self {
            SignalSpec::Oscillating { xi0, .. } => xi0.abs(),
            SignalSpec::Ramp { slope, t_on } => slope.abs() * (horizon - t_on).max(0.0),
            SignalSpec::Step { xi0, .. } => xi0.abs(),
            SignalSpec::FilteredNoise { sigma, .. } => 3.0 * sigma,
        }
    }

    fn noise_hold_step(cutoff: f64) -> f64 {
        0.1 / cutoff
    }
}

/// Stateful evaluator. Deterministic given the spec; noise paths are a pure
/// function of (seed, t) but cheap only under (non-strictly) increasing t,
/// which is how integrators and samplers call it.
pub struct SignalStream {
    spec: SignalSpec,
    noise: Option<NoiseState>,
}

struct NoiseState {
    rng: ChaCha8Rng,
    hold: f64,
    index: u64,
    current: f64,
    decay: f64,
    innovation: f64,
}

impl SignalStream {
    pub fn new(spec: &SignalSpec) -> Self {
        let noise = match spec {
            SignalSpec::FilteredNoise { sigma, cutoff, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let hold = SignalSpec::noise_hold_step(*cutoff);
                let decay = (-cutoff * hold).exp();
                let innovation = sigma * (1.0 - decay * decay).sqrt();
                let g0: f64 = StandardNormal.sample(&mut rng);
                Some(NoiseState {
                    rng,
                    hold,
                    index: 0,
                    current: sigma * g0,
                    decay,
                    innovation,
                })
            }
            _ => None,
        };
        SignalStream {
            spec: spec.clone(),
            noise,
        }
    }

    /// Value at time t >= 0. Noise requires non-decreasing hold indices.
    pub fn value(&mut self, t: f64) -> f64 {
        match &self.spec {
            SignalSpec::Oscillating { xi0, omega_m } => xi0 * (omega_m * t).sin(),
            SignalSpec::Ramp { slope, t_on } => {
                if t < *t_on {
                    0.0
                } else {
                    slope * (t - t_on)
                }
            }
            SignalSpec::Step { xi0, t_on } => {
                if t < *t_on {
                    0.0
                } else {
                    *xi0
                }
            }
            SignalSpec::FilteredNoise { .. } => {
                let state = self.noise.as_mut().expect("noise state");
                let k = (t / state.hold).floor().max(0.0) as u64;
                assert!(
                    k >= state.index,
                    "noise stream accessed backwards (index {} after {})",
                    k,
                    state.index
                );
                while state.index < k {
                    let g: f64 = StandardNormal.sample(&mut state.rng);
                    state.current = state.decay * state.current + state.innovation * g;
                    state.index += 1;
                }
                state.current
            }
        }
    }
}

/// One-shot evaluation; for noise this replays the chain from t = 0.
pub fn signal_eval(spec: &SignalSpec, t: f64) -> f64 {
    SignalStream::new(spec).value(t)
}

/// Where a disturbance acts: a node's natural velocity or a line's weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Node(String),
    Line([String; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    pub target: Target,
    pub signal: SignalSpec,
    pub label: String,
}

/// Target resolved to dense indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedTarget {
    Node(usize),
    /// Edge position in the network's edge list.
    Edge(usize),
}

impl DisturbanceSpec {
    pub fn resolve(&self, network: &Network) -> Result<ResolvedTarget> {
        self.signal.validate()?;
        match &self.target {
            Target::Node(id) => Ok(ResolvedTarget::Node(network.index_of(id)?)),
            Target::Line([a, b]) => {
                let i = network.index_of(a)?;
                let j = network.index_of(b)?;
                network
                    .edge_between(i, j)
                    .map(ResolvedTarget::Edge)
                    .ok_or_else(|| Error::InvalidTarget(format!("line ({a}, {b})")))
            }
        }
    }
}

/// Margins of a disturbance against the slow/small conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub label: String,
    /// Slowest intrinsic system rate the disturbance must stay below.
    pub system_rate_floor: f64,
    pub rate_bound: f64,
    pub rate_margin: f64,
    pub amplitude_reference: f64,
    pub amplitude_bound: f64,
    pub amplitude_margin: f64,
    pub admissible: bool,
    /// Step signals satisfy the slow condition everywhere except the jump.
    pub admissible_except_onset: bool,
    /// False when a line disturbance can push the weight negative.
    pub weight_positive: bool,
}

/// Checks the two admissibility conditions over the given horizon: rate of
/// change against the slowest system rate, amplitude against the local
/// unperturbed magnitude. A margin of `margin` or better passes.
pub fn check_admissibility(
    network: &Network,
    bundle: &LaplacianBundle,
    spec: &DisturbanceSpec,
    horizon: f64,
    margin: f64,
) -> Result<AdmissibilityReport> {
    let target = spec.resolve(network)?;
    let floor = timescale_bound(bundle, network);
    let rate_bound = spec.signal.rate_bound();
    let rate_margin = if rate_bound == 0.0 {
        f64::INFINITY
    } else {
        floor / rate_bound
    };

    let amplitude_bound = spec.signal.amplitude_bound(horizon);
    let (amplitude_reference, weight_positive) = match target {
        ResolvedTarget::Node(i) => {
            // omega at a passive node can be zero; fall back to the median
            // magnitude across the network.
            let omega = network.omega();
            let mut magnitudes: Vec<f64> = omega.iter().map(|w| w.abs()).collect();
            magnitudes.sort_by(f64::total_cmp);
            let median = magnitudes[magnitudes.len() / 2];
            (omega[i].abs().max(median), true)
        }
        ResolvedTarget::Edge(e) => {
            let w = network.edges()[e].weight;
            (w, amplitude_bound < w)
        }
    };
    let amplitude_margin = if amplitude_bound == 0.0 {
        f64::INFINITY
    } else {
        amplitude_reference / amplitude_bound
    };

    let amplitude_ok = amplitude_margin >= margin && weight_positive;
    let is_step = matches!(spec.signal, SignalSpec::Step { xi0, .. } if xi0 != 0.0);
    Ok(AdmissibilityReport {
        label: spec.label.clone(),
        system_rate_floor: floor,
        rate_bound,
        rate_margin,
        amplitude_reference,
        amplitude_bound,
        amplitude_margin,
        admissible: rate_margin >= margin && amplitude_ok,
        admissible_except_onset: is_step && amplitude_ok,
        weight_positive,
    })
}

/// Reads one disturbance or a list of simultaneous ones from JSON.
pub fn disturbances_from_json(text: &str) -> Result<Vec<DisturbanceSpec>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let specs: Vec<DisturbanceSpec> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    for s in &specs {
        s.signal.validate()?;
    }
    Ok(specs)
}

/// Sampled values of a signal on a uniform grid, as used by the predictors.
pub fn sample_signal(spec: &SignalSpec, t0: f64, dt: f64, len: usize) -> DVector<f64> {
    let mut stream = SignalStream::new(spec);
    DVector::from_iterator(len, (0..len).map(|k| stream.value(t0 + k as f64 * dt)))
}
