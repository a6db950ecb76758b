//! Radial ODE families, their first-order system form, the series expansion
//! at the singular origin, and the large-`c` rescaling.
//!
//! All families share the radial operator
//!
//! ```text
//! u'' = -(d-1)/r u' + V(r) u - F_c(r, u),    V(r) = r^s  (s = 2 by default),
//! ```
//!
//! and differ in the nonlinearity:
//!
//! - `Snh`:   F = h u, where the field h solves h'' + (d-1)/r h' + u^2 = 0
//!            with h(0) = c (state carries u, u', h, h').
//! - `Gp`:    F = u^3 + c u with c the frequency.
//! - `Power`: F = |u|^(p-1) u + c u, p > 1.
//!
//! With the nonlinearity disabled every family degenerates to the linear
//! oscillator F = c u, whose radial spectrum c = d + 4n is the exactly
//! solvable oracle used throughout the tests.

use crate::error::{Error, Result};

/// Equation family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Self-gravitating field in a harmonic trap; shooting parameter c = h(0).
    Snh,
    /// Cubic nonlinearity in a harmonic trap; shooting parameter c = omega.
    Gp,
    /// Pure power |u|^(p-1) u; shooting parameter c = omega.
    Power,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Snh => "snh",
            Family::Gp => "gp",
            Family::Power => "power",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One radial equation family with its dimension and central value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub family: Family,
    /// Spatial dimension, d >= 1.
    pub d: u32,
    /// Central value u(0) = b > 0.
    pub b: f64,
    /// Nonlinearity exponent, used by the `Power` family only (p > 1).
    pub p: f64,
    /// Trap exponent s in V(r) = r^s; s > 0, default 2.
    pub potential_exponent: f64,
    /// When false the nonlinearity is replaced by c*u (linear oscillator).
    pub nonlinearity_enabled: bool,
}

impl ProblemSpec {
    pub fn snh(d: u32, b: f64) -> Result<Self> {
        Self::new(Family::Snh, d, b, 2.0, true)
    }

    pub fn gp(d: u32, b: f64) -> Result<Self> {
        Self::new(Family::Gp, d, b, 3.0, true)
    }

    pub fn power(d: u32, b: f64, p: f64) -> Result<Self> {
        Self::new(Family::Power, d, b, p, true)
    }

    /// Linear oscillator oracle: F = c u, spectrum c = d + 4n.
    pub fn linear(d: u32, b: f64) -> Result<Self> {
        Self::new(Family::Gp, d, b, 3.0, false)
    }

    pub fn new(family: Family, d: u32, b: f64, p: f64, nonlinearity_enabled: bool) -> Result<Self> {
        let spec = ProblemSpec {
            family,
            d,
            b,
            p,
            potential_exponent: 2.0,
            nonlinearity_enabled,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::InvalidProblem("dimension d >= 1 required".into()));
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "central value b > 0 required (got {})",
                self.b
            )));
        }
        if self.family == Family::Power && !(self.p > 1.0) {
            return Err(Error::InvalidProblem(format!(
                "power exponent p > 1 required (got {})",
                self.p
            )));
        }
        if !(self.potential_exponent > 0.0) {
            return Err(Error::InvalidProblem(
                "potential exponent s > 0 required".into(),
            ));
        }
        Ok(())
    }

    /// Number of live state components: 4 for the field-coupled family, 2 otherwise.
    pub fn state_dim(&self) -> usize {
        match self.family {
            Family::Snh => 4,
            _ => 2,
        }
    }

    pub fn is_linear(&self) -> bool {
        !self.nonlinearity_enabled
    }

    /// Trapping potential V(r) = r^s.
    pub fn potential(&self, r: f64) -> f64 {
        if self.potential_exponent == 2.0 {
            r * r
        } else {
            r.powf(self.potential_exponent)
        }
    }

    /// Nonlinear part of F_c at the origin, g(b) = F_c(0, b) (V(0) = 0 for s > 0).
    /// Determines the series curvature u''(0) = -g(b)/d.
    pub fn origin_forcing(&self, c: f64) -> f64 {
        let b = self.b;
        if !self.nonlinearity_enabled {
            return c * b;
        }
        match self.family {
            Family::Snh => c * b,
            Family::Gp => b * (b * b + c),
            Family::Power => b.powf(self.p) + c * b,
        }
    }
}

/// Shooting parameter: h(0) for `Snh`, the frequency for `Gp` and `Power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootParam {
    pub c: f64,
}

impl ShootParam {
    pub fn new(c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "shooting parameter c >= 0 required (got {c})"
            )));
        }
        Ok(ShootParam { c })
    }
}

/// Integration state at radius r. The field components h, h' are live only
/// for four-dimensional systems and are held at zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub h: f64,
    pub dh: f64,
}

impl State {
    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.du.is_finite() && self.h.is_finite() && self.dh.is_finite()
    }
}

/// Derivative of a [`State`] with respect to r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDeriv {
    pub du: f64,
    pub ddu: f64,
    pub dh: f64,
    pub ddh: f64,
}

/// A problem plus its shooting parameter: the concrete initial value problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    pub problem: ProblemSpec,
    pub param: ShootParam,
}

impl Shot {
    pub fn new(problem: ProblemSpec, param: ShootParam) -> Self {
        Shot { problem, param }
    }

    /// Full nonlinearity F_c(r, u) at a state (field coupling included).
    fn forcing(&self, s: &State) -> f64 {
        let c = self.param.c;
        if !self.problem.nonlinearity_enabled {
            return c * s.u;
        }
        match self.problem.family {
            Family::Snh => s.h * s.u,
            Family::Gp => s.u * s.u * s.u + c * s.u,
            Family::Power => s.u.abs().powf(self.problem.p - 1.0) * s.u + c * s.u,
        }
    }

    pub fn eval(&self, s: &State) -> StateDeriv {
        debug_assert!(s.r > 0.0);
        let d1 = (self.problem.d - 1) as f64;
        let ddu = -d1 / s.r * s.du + self.problem.potential(s.r) * s.u - self.forcing(s);
        let (dh, ddh) = if self.problem.family == Family::Snh {
            (s.dh, -d1 / s.r * s.dh - s.u * s.u)
        } else {
            (0.0, 0.0)
        };
        StateDeriv {
            du: s.du,
            ddu,
            dh,
            ddh,
        }
    }

    /// Second-order Taylor state at r = delta.
    ///
    /// Regularity forces u'(0) = h'(0) = 0 and the limit r -> 0 of the system
    /// gives 2d u2 = -g(b), 2d h2 = -b^2, so u = b + u2 delta^2 + O(delta^4).
    pub fn start_state(&self, delta: f64) -> State {
        let two_d = 2.0 * self.problem.d as f64;
        let u2 = -self.problem.origin_forcing(self.param.c) / two_d;
        let (h, dh) = if self.problem.family == Family::Snh {
            let h2 = -self.problem.b * self.problem.b / two_d;
            (self.param.c + h2 * delta * delta, 2.0 * h2 * delta)
        } else {
            (0.0, 0.0)
        };
        State {
            r: delta,
            u: self.problem.b + u2 * delta * delta,
            du: 2.0 * u2 * delta,
            h,
            dh,
        }
    }

    /// Radius beyond which the trap term dominates the forcing linearized at
    /// the current state, locking in monotone growth or decay of u.
    ///
    /// The sign condition is V(r) > bound with bound = h for the field family
    /// and bound = c + (local nonlinear shift) otherwise, hence r = bound^(1/s).
    pub fn turning_radius(&self, s: &State) -> f64 {
        let c = self.param.c;
        let bound = if !self.problem.nonlinearity_enabled {
            c
        } else {
            match self.problem.family {
                Family::Snh => s.h,
                Family::Gp => c + s.u * s.u,
                Family::Power => c + s.u.abs().powf(self.problem.p - 1.0),
            }
        };
        if bound <= 0.0 {
            0.0
        } else if self.problem.potential_exponent == 2.0 {
            bound.sqrt()
        } else {
            bound.powf(1.0 / self.problem.potential_exponent)
        }
    }

    /// Shrinks the series-start radius when c is large, tracking the 1/sqrt(c)
    /// oscillation scale of the solution.
    pub fn start_delta_scale(&self) -> f64 {
        (1.0 / (1.0 + self.param.c).sqrt()).min(1.0)
    }
}

/// System derivative; rejects evaluation at the singular origin.
pub fn rhs(problem: &ProblemSpec, param: &ShootParam, s: &State) -> Result<StateDeriv> {
    problem.validate()?;
    if s.r <= 0.0 {
        return Err(Error::SingularOrigin);
    }
    Ok(Shot::new(*problem, *param).eval(s))
}

/// Second-order Taylor state at r = delta (0 < delta).
pub fn series_start(problem: &ProblemSpec, param: &ShootParam, delta: f64) -> Result<State> {
    problem.validate()?;
    if !(delta > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "series start radius must be positive (got {delta})"
        )));
    }
    Ok(Shot::new(*problem, *param).start_state(delta))
}

/// Pointwise turning radius, see [`Shot::turning_radius`].
pub fn turning_radius(problem: &ProblemSpec, param: &ShootParam, s: &State) -> f64 {
    Shot::new(*problem, *param).turning_radius(s)
}

/// Coordinate maps of the large-c rescaling r~ = sqrt(c) r, h~ = h / c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleMap {
    /// r~ = r_scale * r.
    pub r_scale: f64,
    /// h~ = h / field_scale.
    pub field_scale: f64,
}

impl ScaleMap {
    /// Maps a state in original variables to rescaled variables.
    pub fn to_rescaled(&self, s: &State) -> State {
        State {
            r: self.r_scale * s.r,
            u: s.u,
            du: s.du / self.r_scale,
            h: s.h / self.field_scale,
            dh: s.dh / (self.field_scale * self.r_scale),
        }
    }

    /// Inverse of [`ScaleMap::to_rescaled`].
    pub fn from_rescaled(&self, s: &State) -> State {
        State {
            r: s.r / self.r_scale,
            u: s.u,
            du: s.du * self.r_scale,
            h: s.h * self.field_scale,
            dh: s.dh * self.field_scale * self.r_scale,
        }
    }
}

/// Field family in rescaled variables:
///
/// ```text
/// u~'' + (d-1)/r~ u~' - eps r~^2 u~ + h~ u~ = 0,
/// h~'' + (d-1)/r~ h~' + eps u~^2     = 0,       eps = 1/c^2,
/// ```
///
/// with u~(0) = b, h~(0) = 1. Both terms removed in the c -> infinity limit
/// carry the same coefficient `eps`; `eps = 0` is the limit system with
/// h~ held constant at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledSnh {
    pub d: u32,
    pub b: f64,
    /// Coefficient 1/c^2 of the removed trap and source terms.
    pub eps: f64,
    pub map: ScaleMap,
}

impl RescaledSnh {
    pub fn eval(&self, s: &State) -> StateDeriv {
        let d1 = (self.d - 1) as f64;
        let ddu = -d1 / s.r * s.du + self.eps * s.r * s.r * s.u - s.h * s.u;
        let ddh = -d1 / s.r * s.dh - self.eps * s.u * s.u;
        StateDeriv {
            du: s.du,
            ddu,
            dh: s.dh,
            ddh,
        }
    }

    pub fn start_state(&self, delta: f64) -> State {
        let two_d = 2.0 * self.d as f64;
        let u2 = -self.b / two_d; // h~(0) = 1
        let h2 = -self.eps * self.b * self.b / two_d;
        State {
            r: delta,
            u: self.b + u2 * delta * delta,
            du: 2.0 * u2 * delta,
            h: 1.0 + h2 * delta * delta,
            dh: 2.0 * h2 * delta,
        }
    }

    pub fn turning_radius(&self, s: &State) -> f64 {
        if self.eps <= 0.0 {
            f64::INFINITY
        } else {
            (s.h.max(0.0) / self.eps).sqrt()
        }
    }
}

/// Cubic family in rescaled variables:
///
/// ```text
/// u~'' + (d-1)/r~ u~' - eps r~^2 u~ + cubic_eps u~^3 + u~ = 0,
/// ```
///
/// with eps = 1/c^2 but cubic_eps = 1/c: the cubic term decays one order
/// slower, so convergence-rate diagnostics use the field family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledGp {
    pub d: u32,
    pub b: f64,
    /// Coefficient 1/c^2 of the removed trap term.
    pub eps: f64,
    /// Coefficient 1/c of the retained cubic term.
    pub cubic_eps: f64,
    pub map: ScaleMap,
}

impl RescaledGp {
    pub fn eval(&self, s: &State) -> StateDeriv {
        let d1 = (self.d - 1) as f64;
        let ddu = -d1 / s.r * s.du + self.eps * s.r * s.r * s.u
            - self.cubic_eps * s.u * s.u * s.u
            - s.u;
        StateDeriv {
            du: s.du,
            ddu,
            dh: 0.0,
            ddh: 0.0,
        }
    }

    pub fn start_state(&self, delta: f64) -> State {
        let two_d = 2.0 * self.d as f64;
        let u2 = -(self.b + self.cubic_eps * self.b.powi(3)) / two_d;
        State {
            r: delta,
            u: self.b + u2 * delta * delta,
            du: 2.0 * u2 * delta,
            h: 0.0,
            dh: 0.0,
        }
    }

    pub fn turning_radius(&self, s: &State) -> f64 {
        if self.eps <= 0.0 {
            f64::INFINITY
        } else {
            ((1.0 + self.cubic_eps * s.u * s.u).max(0.0) / self.eps).sqrt()
        }
    }
}

/// Rescaled problem for either supported family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rescaled {
    Snh(RescaledSnh),
    Gp(RescaledGp),
}

impl Rescaled {
    pub fn map(&self) -> ScaleMap {
        match self {
            Rescaled::Snh(p) => p.map,
            Rescaled::Gp(p) => p.map,
        }
    }

    pub fn system(&self) -> SystemSpec {
        match self {
            Rescaled::Snh(p) => SystemSpec::RescaledSnh(*p),
            Rescaled::Gp(p) => SystemSpec::RescaledGp(*p),
        }
    }
}

/// Rescales a shot to the variables r~ = sqrt(c) r (and h~ = h/c for the
/// field family). Requires c > 0. The coefficients of the removed terms are
/// exposed on the returned problem for convergence-rate checks.
pub fn rescale(problem: &ProblemSpec, param: &ShootParam) -> Result<Rescaled> {
    problem.validate()?;
    if !(param.c > 0.0) {
        return Err(Error::ZeroShootParam);
    }
    if !problem.nonlinearity_enabled {
        return Err(Error::WrongFamily { expected: "snh or gp" });
    }
    let map = ScaleMap {
        r_scale: param.c.sqrt(),
        field_scale: param.c,
    };
    match problem.family {
        Family::Snh => Ok(Rescaled::Snh(RescaledSnh {
            d: problem.d,
            b: problem.b,
            eps: 1.0 / (param.c * param.c),
            map,
        })),
        Family::Gp => Ok(Rescaled::Gp(RescaledGp {
            d: problem.d,
            b: problem.b,
            eps: 1.0 / (param.c * param.c),
            cubic_eps: 1.0 / param.c,
            map,
        })),
        Family::Power => Err(Error::WrongFamily { expected: "snh or gp" }),
    }
}

/// The c -> infinity limit equation u~'' + (d-1)/r~ u~' + u~ = 0.
///
/// Its solution through u~(0) = b, u~'(0) = 0 is b Gamma(d/2) (2/r~)^(d/2-1)
/// J_(d/2-1)(r~): it oscillates indefinitely with decreasing amplitude and
/// its zeros are those of the Bessel function of order d/2 - 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitingOscillator {
    pub d: u32,
    pub b: f64,
}

impl LimitingOscillator {
    pub fn bessel_order(&self) -> f64 {
        self.d as f64 / 2.0 - 1.0
    }

    pub fn eval(&self, s: &State) -> StateDeriv {
        let d1 = (self.d - 1) as f64;
        StateDeriv {
            du: s.du,
            ddu: -d1 / s.r * s.du - s.u,
            dh: 0.0,
            ddh: 0.0,
        }
    }

    pub fn start_state(&self, delta: f64) -> State {
        let u2 = -self.b / (2.0 * self.d as f64);
        State {
            r: delta,
            u: self.b + u2 * delta * delta,
            du: 2.0 * u2 * delta,
            h: 0.0,
            dh: 0.0,
        }
    }
}

/// Any integrable system: a concrete shot, a rescaled problem, or the
/// limiting oscillator. Trajectories record which one produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemSpec {
    Shot(Shot),
    RescaledSnh(RescaledSnh),
    RescaledGp(RescaledGp),
    Limiting(LimitingOscillator),
}

impl SystemSpec {
    pub fn shot(problem: ProblemSpec, param: ShootParam) -> Self {
        SystemSpec::Shot(Shot::new(problem, param))
    }

    pub fn eval(&self, s: &State) -> StateDeriv {
        match self {
            SystemSpec::Shot(p) => p.eval(s),
            SystemSpec::RescaledSnh(p) => p.eval(s),
            SystemSpec::RescaledGp(p) => p.eval(s),
            SystemSpec::Limiting(p) => p.eval(s),
        }
    }

    pub fn start_state(&self, delta: f64) -> State {
        match self {
            SystemSpec::Shot(p) => p.start_state(delta),
            SystemSpec::RescaledSnh(p) => p.start_state(delta),
            SystemSpec::RescaledGp(p) => p.start_state(delta),
            SystemSpec::Limiting(p) => p.start_state(delta),
        }
    }

    pub fn turning_radius(&self, s: &State) -> f64 {
        match self {
            SystemSpec::Shot(p) => p.turning_radius(s),
            SystemSpec::RescaledSnh(p) => p.turning_radius(s),
            SystemSpec::RescaledGp(p) => p.turning_radius(s),
            SystemSpec::Limiting(_) => f64::INFINITY,
        }
    }

    pub fn central_value(&self) -> f64 {
        match self {
            SystemSpec::Shot(p) => p.problem.b,
            SystemSpec::RescaledSnh(p) => p.b,
            SystemSpec::RescaledGp(p) => p.b,
            SystemSpec::Limiting(p) => p.b,
        }
    }

    pub fn start_delta_scale(&self) -> f64 {
        match self {
            SystemSpec::Shot(p) => p.start_delta_scale(),
            _ => 1.0,
        }
    }

    /// Live state components (4 when the field is integrated alongside u).
    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::Shot(p) => p.problem.state_dim(),
            SystemSpec::RescaledSnh(_) => 4,
            _ => 2,
        }
    }

    pub fn as_shot(&self) -> Option<&Shot> {
        match self {
            SystemSpec::Shot(p) => Some(p),
            _ => None,
        }
    }
}

/// Integrates the limiting oscillator out to `r_max` with the same adaptive
/// integrator used for shots; `n_samples` bounds the step size from above by
/// `r_max / n_samples` so the returned trajectory samples at least that
/// densely. Requires d >= 2.
pub fn limiting_solution(
    d: u32,
    b: f64,
    r_max: f64,
    n_samples: usize,
) -> Result<crate::integrate::Trajectory> {
    if d < 2 {
        return Err(Error::InvalidProblem(
            "limiting oscillator requires d >= 2".into(),
        ));
    }
    if !(b > 0.0) || !(r_max > 0.0) || n_samples == 0 {
        return Err(Error::InvalidProblem(
            "limiting solution needs b > 0, r_max > 0, n_samples > 0".into(),
        ));
    }
    let config = crate::integrate::SolveConfig {
        r_max,
        ..Default::default()
    };
    crate::integrate::integrate_with_max_step(
        SystemSpec::Limiting(LimitingOscillator { d, b }),
        &config,
        r_max / n_samples as f64,
    )
}
