//! Ground and excited states of radial semilinear Schrodinger equations
//! with trapping potentials, computed by the shooting method.
//!
//! The stationary ansatz reduces the equation to a singular radial ODE
//!
//! ```text
//! u'' + (d-1)/r u' - V(r) u + F_c(r, u) = 0,   u(0) = b > 0,  u'(0) = 0,
//! ```
//!
//! with `V(r) = r^2` by default and a family-dependent nonlinearity `F_c`
//! steered by a single shooting parameter `c`. Shots are integrated outward
//! from a series start at the regular singular origin, classified into the
//! trichotomy (diverges to +inf, diverges to -inf, decays to zero), and the
//! boundary value of `c` separating the behaviours is located by bisection.
//!
//! Modules:
//! - [`problem`]: equation families, series start, large-`c` rescaling.
//! - [`integrate`]: adaptive embedded Runge-Kutta shot integration with
//!   event detection (zero crossings, extrema, inflections, blow-up, decay).
//! - [`classify`]: trichotomy classification and the structural predicates
//!   behind the ground- and excited-state parameter sets.
//! - [`shoot`]: bracketing and bisection for ground and excited states,
//!   frequency recovery, mass, and `omega(b)` sweeps.
//! - [`diagnose`]: numerical verification of the analytic scaffolding
//!   (Pohozaev term signs, integral identities, rescaling convergence,
//!   the damped-particle picture for the cubic family).
//!
//! Sweeps and classification grids evaluate shots in parallel via `rayon`
//! when the `parallel` feature (default) is enabled; with the feature
//! disabled the same entry points run sequentially.

pub mod classify;
pub mod diagnose;
pub mod error;
pub mod integrate;
pub mod problem;
pub(crate) mod quad;
pub mod shoot;

pub use classify::{
    classify, classify_shot, crossing_count_grid, in_excited_set, in_ground_set, Classification,
    Fate,
};
pub use error::{Error, Result};
pub use integrate::{
    integrate_shot, integrate_system, refine_event, Event, EventKind, SolveConfig, Trajectory,
};
pub use problem::{
    limiting_solution, rescale, rhs, series_start, turning_radius, Family, LimitingOscillator,
    ProblemSpec, Rescaled, RescaledGp, RescaledSnh, ScaleMap, ShootParam, Shot, State, StateDeriv,
    SystemSpec,
};
pub use shoot::{
    bracket_initial, find_excited, find_ground, find_ground_with_bracket, mass, recover_omega,
    sweep_omega_of_b, ExcitedResult, GroundStateResult, SweepMode, SweepRecord, SweepStatus,
};
