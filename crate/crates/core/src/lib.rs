//! Numerical solver for a one-dimensional multispecies biofilm with a
//! detaching free boundary.
//!
//! The layer thickness is factored out by mapping `x ∈ [0, L(t)]` onto
//! `z ∈ [0, 1]`. In the rescaled frame biomass fractions `Y` are transported
//! along characteristics, substrates `C` diffuse with a Neumann condition at
//! the substratum and a Dirichlet condition at the surface, the advective
//! velocity `v` is the integral of the net growth rate and the thickness `R`
//! follows `Ṙ = R²·v(1) − λR⁴`. Each time step couples these pieces with a
//! Picard iteration.
//!
//! ```no_run
//! use biofilm_core::{parse_config, run_simulation};
//!
//! let spec = parse_config(&std::fs::read_to_string("configs/monod.toml").unwrap()).unwrap();
//! let traj = run_simulation(&spec.data, &spec.kinetics, &spec.solver, spec.t_end);
//! println!("{} after {} steps", traj.outcome, traj.steps());
//! ```

pub mod boundary;
pub mod config;
pub mod coupler;
pub mod error;
pub mod expr;
pub mod grid;
pub mod mms;
pub mod model;
pub mod monitor;
pub mod output;
pub mod parabolic;
pub mod physical;
pub mod transport;

pub use boundary::{boundary_step, boundary_step_with, detachment_rhs, r_max_bound, velocity_profile, BoundaryState};
pub use config::{load_config, parse_config, RunSpec};
pub use coupler::{picard_step, run_simulation, Outcome, PositivityMode, SolverConfig, State, StepReport, Trajectory};
pub use error::{Error, Result};
pub use grid::{build_grid, cumtrapz, interp_linear, trapz, Grid, Profile};
pub use mms::{mms_study, ConvergenceReport, MmsConfig};
pub use model::{
    eval_kinetics, linear_preset, monod_preset, validate_problem, KineticsModel, MonodParams, MonodSpecies,
    ProblemData,
};
pub use monitor::{check_invariants, dissipation_envelope_check, energy, EnergyWeights, EnvelopeOptions, InvariantFlag};
pub use output::{write_timeseries, Manifest};
pub use physical::{back_transform, PhysicalTrajectory};
pub use transport::{characteristic_foot, transport_step, TransportCoefficient, V1Segment};
