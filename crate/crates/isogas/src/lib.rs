//! Isothermal Euler gas flow through a one-way pressure valve.
//!
//! The gas obeys the isothermal pressure law `p = a^2 rho` on the half plane
//! `rho > 0`, with conserved variables density `rho` and linear momentum `q`.
//! The crate builds up, in dependency order:
//!
//! - [`state`]: gas law, states, characteristic speeds and sonic classification;
//! - [`curves`]: shock and rarefaction branches and the pieced forward/backward
//!   Lax curves of both families;
//! - [`points`]: distinguished states (flow maxima on the forward 1-curve, the
//!   two-curve intersection, largest-density curve/level crossings);
//! - [`riemann`]: the exact two-wave Riemann solver and self-similar sampling;
//! - [`valve`]: valve flow laws, the state-space region geometry that governs
//!   valve chattering, and the coupled interface solver;
//! - [`rcm`]: the random choice scheme on a uniform grid with a valve face;
//! - [`wavefront`]: exact piecewise wavefront construction for a three-state
//!   datum with an incoming 2-shock, up to its documented stop time;
//! - [`experiments`]: drivers for the flow maximization, convergence and
//!   chattering studies exposed by the CLI;
//! - [`report`]: CSV writers shared by the drivers and the CLI.

pub mod curves;
pub mod experiments;
pub mod points;
pub mod rcm;
pub mod report;
pub mod riemann;
pub mod roots;
pub mod state;
pub mod valve;
pub mod wavefront;

pub use curves::{CurveId, Family};
pub use riemann::{Wave, WaveKind, WavePattern};
pub use state::{GasLaw, SonicClass, State};
pub use valve::{RegionTag, SolverKind, SpecialStates, ValveParams};

/// Errors produced by solvers, schemes and drivers.
///
/// Construction of plainly invalid primitives (non-positive density, zero
/// sound speed) panics instead; those are programming errors, not data.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An iterative solve failed to reach its tolerance.
    #[error("no convergence in {context} after {iters} iterations")]
    NoConvergence { context: &'static str, iters: usize },

    /// A scalar argument fell outside its admissible interval.
    #[error("{what} = {value} out of range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A requested valve flow exceeds what the upstream state can deliver.
    #[error("flow {q} exceeds admissible range [0, {cap}]")]
    FlowOutOfRange { q: f64, cap: f64 },

    /// A field lost hyperbolicity data (no positive wave speed bound).
    #[error("degenerate field: no positive characteristic speed bound")]
    DegenerateField,

    /// A cell update produced a non-physical density.
    #[error("cell {index} left the state space (rho = {rho})")]
    CellLeftOmega { index: usize, rho: f64 },

    /// Waves reached the outermost cells, so constant-extension boundaries
    /// are no longer exact.
    #[error("waves reached boundary cell {index}; enlarge the domain or lower the final time")]
    BoundaryReached { index: usize },

    /// A three-state datum violates the assumptions of the exact construction.
    #[error("scenario violation: {0}")]
    ScenarioViolation(String),

    /// An exact solution was evaluated past the time it is constructed for.
    #[error("t = {t} outside the constructed range [0, {t_stop}]")]
    OutOfDomain { t: f64, t_stop: f64 },

    /// An analytic flow average was requested past its validity horizon.
    #[error("averaging window {t} exceeds the validity horizon {limit}")]
    OutOfValidity { t: f64, limit: f64 },

    /// A flow record does not span the requested averaging window.
    #[error("flow record spans {recorded}, shorter than the requested window {requested}")]
    SpanMismatch { recorded: f64, requested: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
