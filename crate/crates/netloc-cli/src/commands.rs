//! Command implementations: file handling around the netloc-core pipeline.

use std::path::{Path, PathBuf};

use thiserror::Error;

use netloc_core::disturbance::sample_signal;
use netloc_core::io;
use netloc_core::localization::{
    classify, detect_and_group, frequency_mismatch, off_diagonality, predict_line_mixed,
    predict_line_reduced, predict_line_unreduced, predict_nodal, predict_nodal_reduced,
    DetectorParams, MismatchSeries,
};
use netloc_core::synth::{self, GeneratorConfig};
use netloc_core::{
    build_laplacian, check_admissibility, disturbances_from_json, kron_reduce, simulate as run_dynamics,
    CouplingSpec, DisturbanceSpec, Error as CoreError, KronSystem, Network, SignalSpec,
    SimulateOptions,
};

use crate::{DiagnoseArgs, GenerateArgs, KronArgs, LocalizeArgs, PredictArgs, SimulateArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Args(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Args(_) => "args",
            CliError::File { .. } => "io",
            CliError::Core(e) => match e {
                CoreError::InvalidNetwork(_) => "invalid_network",
                CoreError::DisconnectedGraph { .. } => "disconnected_graph",
                CoreError::NonPositiveSlope(_) => "non_positive_slope",
                CoreError::MultipleZeroModes(_) => "multiple_zero_modes",
                CoreError::SingularInteriorBlock(_) => "singular_interior_block",
                CoreError::SingularUpdate(_) => "singular_update",
                CoreError::NoConvergence { .. } => "no_convergence",
                CoreError::Divergence { .. } => "divergence",
                CoreError::InvalidTarget(_) => "invalid_target",
                CoreError::DimensionMismatch(_) => "dimension_mismatch",
                CoreError::DegenerateSignatures(_) => "degenerate_signatures",
                CoreError::GenerationFailed(_) => "generation_failed",
                CoreError::Parse(_) => "parse",
                CoreError::Io(_) => "io",
                CoreError::Json(_) => "json",
            },
        }
    }

    /// Machine-readable error envelope printed to stderr on failure.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.to_string() }
        })
        .to_string()
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn load_network(path: &Path) -> Result<Network> {
    let text = read_file(path)?;
    Ok(serde_json::from_str(&text).map_err(CoreError::from)?)
}

fn parse_id_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Applies --reduce (or the network's own measured flags) and builds the
/// reduced system.
fn reduced_system(net: &Network, reduce: &Option<String>) -> Result<(Network, KronSystem)> {
    let net = match reduce {
        Some(list) => net.with_reduced_ids(&parse_id_list(list))?,
        None => net.clone(),
    };
    let bundle = build_laplacian(&net)?;
    let kron = kron_reduce(&bundle, &net.omega(), &net.unmeasured_indices())?;
    Ok((net, kron))
}

fn coupling_from_args(name: &str, order: usize) -> Result<CouplingSpec> {
    match name {
        "linear" => Ok(CouplingSpec::Linear),
        "sin" => Ok(CouplingSpec::Sin),
        "higher_order" => Ok(CouplingSpec::kuramoto_harmonics(order.max(1))),
        other => Err(CliError::Args(format!(
            "unknown coupling {other}; expected linear, sin, or higher_order"
        ))),
    }
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let cfg = GeneratorConfig {
        inertia: args.inertia,
        damping: args.damping,
        coupling: coupling_from_args(&args.coupling, args.order)?,
        ..Default::default()
    };
    let net = match args.kind.as_str() {
        "random_connected" => {
            let edges = args.edges.ok_or_else(|| {
                CliError::Args("random_connected needs --edges".into())
            })?;
            synth::random_connected(args.nodes, edges, args.seed, &cfg)?
        }
        "path" => synth::path(args.nodes, &cfg)?,
        "ring" => synth::ring(args.nodes, &cfg)?,
        "two_community" => {
            let p_in = args
                .p_in
                .ok_or_else(|| CliError::Args("two_community needs --p-in".into()))?;
            let p_out = args
                .p_out
                .ok_or_else(|| CliError::Args("two_community needs --p-out".into()))?;
            synth::two_community(args.nodes, p_in, p_out, args.seed, &cfg)?
        }
        other => {
            return Err(CliError::Args(format!(
                "unknown kind {other}; expected random_connected, path, ring, or two_community"
            )))
        }
    };
    let text = serde_json::to_string_pretty(&net).map_err(CoreError::from)?;
    write_file(&args.out, &text)
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let disturbances: Vec<DisturbanceSpec> = match &args.disturbance {
        Some(path) => disturbances_from_json(&read_file(path)?)?,
        None => Vec::new(),
    };

    // Surface admissibility caveats without refusing to run.
    let bundle = build_laplacian(&net)?;
    for spec in &disturbances {
        let report = check_admissibility(&net, &bundle, spec, args.t_end, args.margin)?;
        if !report.admissible {
            let caveat = if report.admissible_except_onset {
                "admissible except at the step onset"
            } else {
                "outside the slow/small regime; localization formulas may degrade"
            };
            eprintln!(
                "warning: disturbance {}: rate margin {:.3e}, amplitude margin {:.3e} ({caveat})",
                report.label, report.rate_margin, report.amplitude_margin
            );
        }
    }

    let traj = run_dynamics(
        &net,
        &disturbances,
        args.t_end,
        args.dt,
        args.seed,
        &SimulateOptions::default(),
    )?;
    let measured: Vec<String> = net
        .measured_indices()
        .iter()
        .map(|&k| net.id_of(k).to_string())
        .collect();
    let observed = traj.select_columns(&measured)?;
    write_file(&args.out, &io::trajectory_to_csv(&observed))?;
    if let Some(path) = &args.velocity_out {
        let text = io::velocities_to_csv(&observed)
            .ok_or_else(|| CliError::Args("velocities were not recorded".into()))?;
        write_file(path, &text)?;
    }
    Ok(())
}

pub fn localize(args: LocalizeArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let (net, kron) = reduced_system(&net, &args.reduce)?;
    let traj = io::trajectory_from_csv(&read_file(&args.traj)?)?;
    let series = frequency_mismatch(&net, &kron, &traj)?;
    let params = DetectorParams {
        k_mad: args.k_mad,
        corr_min: args.corr_min,
        ..Default::default()
    };
    let groups = detect_and_group(&series, &params);
    let report = classify(&groups, &kron, &net);
    write_file(
        &args.out,
        &serde_json::to_string_pretty(&report).map_err(CoreError::from)?,
    )?;
    if let Some(path) = &args.psi_out {
        let headers: Vec<String> = series
            .kept
            .iter()
            .map(|&k| net.id_of(k).to_string())
            .collect();
        write_file(
            path,
            &io::series_to_csv(series.t0, series.dt, &series.psi, &headers),
        )?;
    }
    Ok(())
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let (net, kron) = reduced_system(&net, &args.reduce)?;
    let signal: SignalSpec = serde_json::from_str(&args.signal).map_err(CoreError::from)?;
    signal.validate()?;
    let len = (args.t_end / args.dt).floor() as usize + 1;
    let xi = sample_signal(&signal, 0.0, args.dt, len);

    let series: MismatchSeries = if let Some(id) = &args.node {
        let node = net.index_of(id)?;
        if kron.kept_position(node).is_some() {
            predict_nodal(&kron, node, &xi, 0.0, args.dt)?
        } else {
            predict_nodal_reduced(&kron, node, &xi, 0.0, args.dt)?.1
        }
    } else if let Some(pair) = &args.line {
        let ids = parse_id_list(pair);
        if ids.len() != 2 {
            return Err(CliError::Args(format!("--line expects \"a,b\", got {pair}")));
        }
        let a = net.index_of(&ids[0])?;
        let b = net.index_of(&ids[1])?;
        if net.edge_between(a, b).is_none() {
            return Err(CliError::Core(CoreError::InvalidTarget(format!(
                "line ({}, {})",
                ids[0], ids[1]
            ))));
        }
        // Line disturbances act on the raw weight; the Jacobian sees them
        // scaled by the coupling slope at the origin.
        let xi_jacobian = &xi * net.coupling().slope_at_zero();
        match (kron.kept_position(a), kron.kept_position(b)) {
            (Some(_), Some(_)) => {
                predict_line_unreduced(&kron, (a, b), &xi_jacobian, 0.0, args.dt)?
            }
            (Some(_), None) => predict_line_mixed(&kron, (a, b), &xi_jacobian, 0.0, args.dt)?.1,
            (None, Some(_)) => predict_line_mixed(&kron, (b, a), &xi_jacobian, 0.0, args.dt)?.1,
            (None, None) => predict_line_reduced(&kron, (a, b), &xi_jacobian, 0.0, args.dt)?.1,
        }
    } else {
        return Err(CliError::Args("need --node or --line".into()));
    };

    let headers: Vec<String> = series
        .kept
        .iter()
        .map(|&k| net.id_of(k).to_string())
        .collect();
    write_file(
        &args.out,
        &io::series_to_csv(series.t0, series.dt, &series.psi, &headers),
    )
}

pub fn diagnose(args: DiagnoseArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let bundle = build_laplacian(&net)?;
    let pairs: Vec<(usize, usize)> = match &args.edges {
        Some(list) => {
            let mut out = Vec::new();
            for item in list.split(',') {
                let ids: Vec<&str> = item.split('-').map(str::trim).collect();
                if ids.len() != 2 {
                    return Err(CliError::Args(format!(
                        "bad edge {item}; expected \"a-b\""
                    )));
                }
                let i = net.index_of(ids[0])?;
                let j = net.index_of(ids[1])?;
                if net.edge_between(i, j).is_none() {
                    return Err(CliError::Core(CoreError::InvalidTarget(format!(
                        "line ({}, {})",
                        ids[0], ids[1]
                    ))));
                }
                out.push((i, j));
            }
            out
        }
        None => {
            // Deterministic sample: stride through the edge list.
            let m = net.edges().len();
            let count = args.pairs.clamp(1, m);
            let stride = (m / count).max(1);
            let offset = (args.seed as usize) % stride.max(1);
            (0..m)
                .skip(offset)
                .step_by(stride)
                .take(count)
                .map(|k| (net.edges()[k].i, net.edges()[k].j))
                .collect()
        }
    };
    let diag = off_diagonality(&bundle, &pairs);
    let k = pairs.len();
    let mut sum = 0.0;
    let mut count = 0usize;
    for a in 0..k {
        for b in 0..k {
            if a != b {
                sum += diag.matrix[a][b].abs();
                count += 1;
            }
        }
    }
    let value = serde_json::json!({
        "lines": pairs
            .iter()
            .map(|&(i, j)| vec![net.id_of(i).to_string(), net.id_of(j).to_string()])
            .collect::<Vec<_>>(),
        "matrix": diag.matrix,
        "max_offdiag_abs": diag.max_offdiag_abs,
        "mean_offdiag_abs": if count > 0 { sum / count as f64 } else { 0.0 },
        "max_ratio": diag.max_ratio,
    });
    write_file(
        &args.out,
        &serde_json::to_string_pretty(&value).map_err(CoreError::from)?,
    )
}

pub fn kron(args: KronArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let (net, kron) = reduced_system(&net, &args.reduce)?;
    let kept_ids: Vec<String> = kron
        .kept()
        .iter()
        .map(|&k| net.id_of(k).to_string())
        .collect();
    let reduced_ids: Vec<String> = kron
        .reduced()
        .iter()
        .map(|&k| net.id_of(k).to_string())
        .collect();

    // Express L^r as an equivalent network on the kept nodes: the Schur
    // complement of an M-matrix keeps off-diagonals non-positive, so the
    // implied weights are valid.
    let slope = net.coupling().slope_at_zero();
    let lr = kron.l_r();
    let ng = kron.n_kept();
    let threshold = 1e-12 * lr.amax();
    let mut edges = Vec::new();
    for p in 0..ng {
        for q in (p + 1)..ng {
            let w = -lr[(p, q)] / slope;
            if w > threshold {
                edges.push((p, q, w));
            }
        }
    }
    let nodes: Vec<netloc_core::Node> = kron
        .kept()
        .iter()
        .enumerate()
        .map(|(p, &k)| netloc_core::Node {
            id: net.id_of(k).to_string(),
            inertia: net.nodes()[k].inertia,
            damping: net.nodes()[k].damping,
            natural_velocity: kron.omega_r()[p],
            measured: true,
        })
        .collect();
    let reduced_net = Network::new(nodes, edges, net.coupling().clone())?;

    let value = serde_json::json!({
        "kept": kept_ids,
        "reduced": reduced_ids,
        "omega_r": kron.omega_r().iter().copied().collect::<Vec<f64>>(),
        "network": serde_json::to_value(&reduced_net).map_err(CoreError::from)?,
    });
    write_file(
        &args.out,
        &serde_json::to_string_pretty(&value).map_err(CoreError::from)?,
    )?;
    if let Some(path) = &args.matrix_out {
        write_file(path, &io::matrix_to_csv(kron.l_r()))?;
    }
    if let Some(path) = &args.omega_out {
        let column = nalgebra::DMatrix::from_fn(kron.n_kept(), 1, |r, _| kron.omega_r()[r]);
        write_file(path, &io::matrix_to_csv(&column))?;
    }
    Ok(())
}

