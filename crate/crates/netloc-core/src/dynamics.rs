//! Time integration of the coupled dynamics
//! `m_i x_i'' + d_i x_i' = omega_i - sum_j a_ij f(x_i - x_j)`
//! under time-varying node and line disturbances.
//!
//! Nodes with zero inertia follow the overdamped first-order equation.
//! Integration is classical fixed-step fourth-order; reproducibility and
//! straightforward convergence checks beat adaptive stepping at this scale.

use nalgebra::{DMatrix, DVector};

use crate::disturbance::{DisturbanceSpec, ResolvedTarget, SignalSpec, SignalStream};
use crate::error::{Error, Result};
use crate::laplacian::{build_laplacian, fastest_rate, LaplacianBundle};
use crate::network::Network;

const DIVERGENCE_LIMIT: f64 = 1e6;
const FIXED_POINT_TOLERANCE: f64 = 1e-10;
const MAX_NEWTON_STEPS: usize = 100;

/// Uniformly sampled state time series; column order follows `node_map`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    /// T x n matrix of x values.
    pub samples: DMatrix<f64>,
    /// T x n matrix of dx/dt values, when recorded.
    pub velocities: Option<DMatrix<f64>>,
    /// Column index -> node id.
    pub node_map: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Restriction to the named columns, in the given order.
    pub fn select_columns(&self, ids: &[String]) -> Result<Trajectory> {
        let positions: Vec<usize> = ids
            .iter()
            .map(|id| {
                self.node_map
                    .iter()
                    .position(|c| c == id)
                    .ok_or_else(|| Error::InvalidTarget(format!("column {id}")))
            })
            .collect::<Result<_>>()?;
        let t = self.samples.nrows();
        let pick = |m: &DMatrix<f64>| {
            DMatrix::from_fn(t, positions.len(), |r, c| m[(r, positions[c])])
        };
        Ok(Trajectory {
            t0: self.t0,
            dt: self.dt,
            samples: pick(&self.samples),
            velocities: self.velocities.as_ref().map(pick),
            node_map: ids.to_vec(),
        })
    }
}

/// Gauge choice for fixed points: the dynamics is invariant under a uniform
/// shift of all states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    #[default]
    ZeroMean,
    LastNodeZero,
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub state: DVector<f64>,
    pub newton_steps: usize,
    pub residual: f64,
}

/// Net coupling inflow per node: F_i = sum_j a_ij f(x_i - x_j).
fn coupling_flows(network: &Network, x: &DVector<f64>, out: &mut DVector<f64>) {
    out.fill(0.0);
    let f = network.coupling();
    for e in network.edges() {
        let c = e.weight * f.eval(x[e.i] - x[e.j]);
        out[e.i] += c;
        out[e.j] -= c;
    }
}

/// Solves `omega_i = sum_j a_ij f(x*_i - x*_j)` by Newton refinement of the
/// linear seed `x = L^+ omega`. For linear coupling the seed is already
/// exact and no Newton step runs.
pub fn fixed_point(
    network: &Network,
    bundle: &LaplacianBundle,
    gauge: Gauge,
) -> Result<FixedPoint> {
    let n = network.node_count();
    let omega = network.omega();
    let mut x = &bundle.pinv * &omega;
    let mut flows = DVector::zeros(n);
    let mut steps = 0;
    let mut residual;
    loop {
        coupling_flows(network, &x, &mut flows);
        residual = (0..n)
            .map(|i| (omega[i] - flows[i]).abs())
            .fold(0.0f64, f64::max);
        if residual < FIXED_POINT_TOLERANCE {
            break;
        }
        if steps >= MAX_NEWTON_STEPS {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual,
            });
        }
        // Jacobian of the balance: a Laplacian with weights a_ij f'(x_i - x_j).
        let f = network.coupling();
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for e in network.edges() {
            let w = e.weight * f.slope(x[e.i] - x[e.j]);
            jac[(e.i, e.j)] -= w;
            jac[(e.j, e.i)] -= w;
            jac[(e.i, e.i)] += w;
            jac[(e.j, e.j)] += w;
        }
        let jac_pinv = crate::laplacian::pseudoinverse(&jac).map_err(|_| Error::NoConvergence {
            iterations: steps,
            residual,
        })?;
        let r = &omega - &flows;
        x += jac_pinv * r;
        steps += 1;
    }
    match gauge {
        Gauge::ZeroMean => {
            let mean = x.mean();
            x.apply(|v| *v -= mean);
        }
        Gauge::LastNodeZero => {
            let last = x[n - 1];
            x.apply(|v| *v -= last);
        }
    }
    Ok(FixedPoint {
        state: x,
        newton_steps: steps,
        residual,
    })
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    /// Forces the internal step; must not exceed the sampling step.
    pub dt_int: Option<f64>,
    /// Record dx/dt alongside x (on by default).
    pub skip_velocities: bool,
}

struct ActiveDisturbance {
    target: ResolvedTarget,
    stream: SignalStream,
    label: String,
    /// Current value, refreshed once per stage time.
    value: f64,
}

struct Stage<'a> {
    network: &'a Network,
    omega: DVector<f64>,
    disturbances: Vec<ActiveDisturbance>,
    /// Scratch: per-node net power.
    power: DVector<f64>,
}

impl<'a> Stage<'a> {
    /// Refreshes disturbance values for stage time `t`.
    fn advance(&mut self, t: f64) -> Result<()> {
        for d in &mut self.disturbances {
            d.value = d.stream.value(t);
            if let ResolvedTarget::Edge(e) = d.target {
                let edge = self.network.edges()[e];
                if edge.weight + d.value < 0.0 {
                    return Err(Error::InvalidNetwork(format!(
                        "disturbance {} drives edge ({}, {}) weight negative at t = {t}",
                        d.label,
                        self.network.id_of(edge.i),
                        self.network.id_of(edge.j)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes dx/dt and dv/dt for the current stage values.
    fn derivative(
        &mut self,
        x: &DVector<f64>,
        v: &DVector<f64>,
        dx: &mut DVector<f64>,
        dv: &mut DVector<f64>,
    ) {
        self.power.copy_from(&self.omega);
        for d in &self.disturbances {
            if let ResolvedTarget::Node(i) = d.target {
                self.power[i] += d.value;
            }
        }
        let f = self.network.coupling();
        for (idx, e) in self.network.edges().iter().enumerate() {
            let mut w = e.weight;
            for d in &self.disturbances {
                if d.target == ResolvedTarget::Edge(idx) {
                    w += d.value;
                }
            }
            let c = w * f.eval(x[e.i] - x[e.j]);
            self.power[e.i] -= c;
            self.power[e.j] += c;
        }
        for (i, node) in self.network.nodes().iter().enumerate() {
            if node.inertia > 0.0 {
                dx[i] = v[i];
                dv[i] = (self.power[i] - node.damping * v[i]) / node.inertia;
            } else {
                dx[i] = self.power[i] / node.damping;
                dv[i] = 0.0;
            }
        }
    }
}

/// Integrates the disturbed dynamics from the unperturbed fixed point and
/// returns the trajectory sampled at `dt_sample`.
///
/// `seed` offsets the seeds of noise disturbances so Monte-Carlo trials can
/// redraw noise without editing specs; with `seed = 0` noise paths match
/// [`crate::disturbance::signal_eval`] exactly.
pub fn simulate(
    network: &Network,
    disturbances: &[DisturbanceSpec],
    t_end: f64,
    dt_sample: f64,
    seed: u64,
    options: &SimulateOptions,
) -> Result<Trajectory> {
    if !(t_end > 0.0) || !(dt_sample > 0.0) {
        return Err(Error::Parse(format!(
            "need positive t_end and dt_sample, got {t_end} and {dt_sample}"
        )));
    }
    let bundle = build_laplacian(network)?;
    let start = fixed_point(network, &bundle, Gauge::ZeroMean)?;

    let active: Vec<ActiveDisturbance> = disturbances
        .iter()
        .map(|spec| {
            let target = spec.resolve(network)?;
            let signal = match &spec.signal {
                SignalSpec::FilteredNoise { sigma, cutoff, seed: s } => SignalSpec::FilteredNoise {
                    sigma: *sigma,
                    cutoff: *cutoff,
                    seed: s.wrapping_add(seed),
                },
                other => other.clone(),
            };
            Ok(ActiveDisturbance {
                target,
                stream: SignalStream::new(&signal),
                label: spec.label.clone(),
                value: 0.0,
            })
        })
        .collect::<Result<_>>()?;

    // Internal step: at most dt_sample and at most 0.01 / fastest rate,
    // rounded down to divide the sampling step exactly.
    let rate = fastest_rate(&bundle, network);
    let mut dt_max = dt_sample.min(0.01 / rate);
    if let Some(forced) = options.dt_int {
        if !(forced > 0.0) || forced > dt_sample {
            return Err(Error::Parse(format!("invalid dt_int override {forced}")));
        }
        dt_max = forced;
    }
    let substeps = (dt_sample / dt_max).ceil().max(1.0) as usize;
    let h = dt_sample / substeps as f64;

    let n = network.node_count();
    let total_samples = (t_end / dt_sample).floor() as usize + 1;
    let mut samples = DMatrix::zeros(total_samples, n);
    let mut velocities = if options.skip_velocities {
        None
    } else {
        Some(DMatrix::zeros(total_samples, n))
    };

    let mut stage = Stage {
        network,
        omega: network.omega(),
        disturbances: active,
        power: DVector::zeros(n),
    };

    let mut x = start.state.clone();
    let mut v = DVector::zeros(n);
    let (mut k1x, mut k1v) = (DVector::zeros(n), DVector::zeros(n));
    let (mut k2x, mut k2v) = (DVector::zeros(n), DVector::zeros(n));
    let (mut k3x, mut k3v) = (DVector::zeros(n), DVector::zeros(n));
    let (mut k4x, mut k4v) = (DVector::zeros(n), DVector::zeros(n));
    let (mut xt, mut vt) = (DVector::zeros(n), DVector::zeros(n));
    let (mut rec_dx, mut rec_dv) = (DVector::zeros(n), DVector::zeros(n));

    let mut record = |k: usize,
                      t: f64,
                      x: &DVector<f64>,
                      v: &DVector<f64>,
                      stage: &mut Stage,
                      samples: &mut DMatrix<f64>,
                      velocities: &mut Option<DMatrix<f64>>|
     -> Result<()> {
        for i in 0..n {
            if !x[i].is_finite() || x[i].abs() > DIVERGENCE_LIMIT {
                return Err(Error::Divergence {
                    node: network.id_of(i).to_string(),
                    time: t,
                });
            }
            samples[(k, i)] = x[i];
        }
        if let Some(vel) = velocities {
            stage.advance(t)?;
            stage.derivative(x, v, &mut rec_dx, &mut rec_dv);
            for i in 0..n {
                vel[(k, i)] = rec_dx[i];
            }
        }
        Ok(())
    };

    record(0, 0.0, &x, &v, &mut stage, &mut samples, &mut velocities)?;

    for k in 1..total_samples {
        let t_base = (k - 1) as f64 * dt_sample;
        for s in 0..substeps {
            let t = t_base + s as f64 * h;
            // The last substep must land exactly on the sample time so the
            // signal streams never see time step backwards.
            let t_next = if s + 1 == substeps {
                k as f64 * dt_sample
            } else {
                t_base + (s + 1) as f64 * h
            };

            stage.advance(t)?;
            stage.derivative(&x, &v, &mut k1x, &mut k1v);

            stage.advance(t + 0.5 * h)?;
            xt.copy_from(&x);
            xt.axpy(0.5 * h, &k1x, 1.0);
            vt.copy_from(&v);
            vt.axpy(0.5 * h, &k1v, 1.0);
            stage.derivative(&xt, &vt, &mut k2x, &mut k2v);

            xt.copy_from(&x);
            xt.axpy(0.5 * h, &k2x, 1.0);
            vt.copy_from(&v);
            vt.axpy(0.5 * h, &k2v, 1.0);
            stage.derivative(&xt, &vt, &mut k3x, &mut k3v);

            stage.advance(t_next)?;
            xt.copy_from(&x);
            xt.axpy(h, &k3x, 1.0);
            vt.copy_from(&v);
            vt.axpy(h, &k3v, 1.0);
            stage.derivative(&xt, &vt, &mut k4x, &mut k4v);

            let w = h / 6.0;
            for i in 0..n {
                x[i] += w * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
                v[i] += w * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
            }
        }
        record(
            k,
            k as f64 * dt_sample,
            &x,
            &v,
            &mut stage,
            &mut samples,
            &mut velocities,
        )?;
    }

    Ok(Trajectory {
        t0: 0.0,
        dt: dt_sample,
        samples,
        velocities,
        node_map: network.nodes().iter().map(|v| v.id.clone()).collect(),
    })
}
