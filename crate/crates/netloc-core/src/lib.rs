//! Locating node and line disturbances in networks of diffusively coupled
//! dynamical agents.
//!
//! The observable is the frequency mismatch `psi(t) = L^r x^g(t)`: the
//! (possibly Kron-reduced) Laplacian applied to the measured trajectory.
//! Undisturbed, `psi` sits at the reduced natural velocities; a disturbance
//! bends it along a low-rank spatial signature that names the disturbed node,
//! line, or unmeasured region. This crate covers the whole pipeline: graph
//! algebra (pseudoinverses, Kron reduction, low-rank updates), simulation of
//! the disturbed dynamics, admissibility checks, analytical predictors, and
//! the detection / grouping / classification stage.

pub mod coupling;
pub mod disturbance;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kron;
pub mod laplacian;
pub mod localization;
pub mod lowrank;
pub mod network;
pub mod synth;

pub use coupling::CouplingSpec;
pub use disturbance::{
    check_admissibility, disturbances_from_json, signal_eval, AdmissibilityReport,
    DisturbanceSpec, SignalSpec, SignalStream, Target,
};
pub use dynamics::{fixed_point, simulate, FixedPoint, Gauge, SimulateOptions, Trajectory};
pub use error::{Error, Result};
pub use kron::{kron_reduce, KronSystem, ReducedComponent};
pub use laplacian::{
    build_laplacian, fastest_rate, pair_difference, pseudoinverse, timescale_bound,
    LaplacianBundle,
};
pub use lowrank::{sherman_morrison_pinv, smw_pinv};
pub use network::{Edge, Network, Node};
