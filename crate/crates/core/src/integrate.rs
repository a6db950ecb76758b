//! Adaptive integration of a shot from the series start outward, with event
//! detection for zero crossings, extrema, inflections, blow-up, and decay.
//!
//! The stepper is an embedded Dormand-Prince 5(4) pair with a PI step-size
//! controller. Dense output within an accepted step is cubic Hermite built
//! from the endpoint states and derivatives; sign changes of u, u', u'' are
//! localized on it by bisection down to machine-level bracket widths.

use crate::error::{Error, Result};
use crate::problem::{State, StateDeriv, SystemSpec};

/// Tolerances, thresholds, and budgets for one integration / search.
///
/// Decay thresholds are relative to the central value b; the blow-up
/// threshold is the multiple of b beyond which monotone growth past the
/// turning radius is classified as divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximal radius budget.
    pub r_max: f64,
    /// Divergence threshold as a multiple of b, armed beyond the turning radius.
    pub blowup_factor: f64,
    /// Decay detection threshold on |u| as a multiple of b.
    pub decay_u_tol: f64,
    /// Decay detection threshold on |u'| as a multiple of b.
    pub decay_du_tol: f64,
    /// Budget on attempted steps.
    pub max_steps: usize,
    /// Base series-start radius; shots shrink it by 1/sqrt(1+c).
    pub start_delta: f64,
    /// Budget on bracket-search doublings of the shooting parameter.
    pub max_bracket_doublings: u32,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_max: 30.0,
            blowup_factor: 10.0,
            decay_u_tol: 1e-8,
            decay_du_tol: 1e-8,
            max_steps: 200_000,
            start_delta: 1e-4,
            max_bracket_doublings: 60,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("r_max", self.r_max),
            ("blowup_factor", self.blowup_factor),
            ("decay_u_tol", self.decay_u_tol),
            ("decay_du_tol", self.decay_du_tol),
            ("start_delta", self.start_delta),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::ConfigInvalid(format!(
                    "{name} must be strictly positive (got {v})"
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::ConfigInvalid("max_steps must be positive".into()));
        }
        if self.max_bracket_doublings == 0 {
            return Err(Error::ConfigInvalid(
                "max_bracket_doublings must be positive".into(),
            ));
        }
        if self.r_max <= self.start_delta {
            return Err(Error::ConfigInvalid(format!(
                "r_max ({}) must exceed start_delta ({})",
                self.r_max, self.start_delta
            )));
        }
        Ok(())
    }

    /// Same configuration with both step tolerances scaled by `factor`.
    pub fn with_tolerance_scale(&self, factor: f64) -> Self {
        SolveConfig {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// What happened at a localized radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// u crosses zero.
    UZero,
    /// u' crosses zero (interior extremum of u).
    UPrimeZero,
    /// u'' crosses zero.
    Inflection,
    /// |u| exceeded the blow-up threshold past the turning radius
    /// (or the state became non-finite).
    Blowup,
    /// |u| and |u'| both fell below the decay thresholds past the turning radius.
    DecayDetected,
    /// r_max or max_steps exhausted.
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub r: f64,
    pub state: State,
}

/// One integrated shot: samples at accepted steps, refined events in radius
/// order, and the terminating condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub system: SystemSpec,
    pub samples: Vec<State>,
    pub events: Vec<Event>,
    pub termination: EventKind,
    /// Radii of suspected tangential grazes of u = 0 (ambiguous crossings).
    pub graze_suspects: Vec<f64>,
    pub config: SolveConfig,
}

impl Trajectory {
    pub fn start_radius(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.r)
    }

    pub fn end_radius(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.r)
    }

    pub fn final_state(&self) -> &State {
        self.samples.last().expect("trajectory has samples")
    }

    /// Radii of refined zero crossings of u, in order.
    pub fn crossing_radii(&self) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::UZero)
            .map(|e| e.r)
            .collect()
    }

    /// State at an arbitrary radius inside the sampled range, by cubic
    /// Hermite interpolation between the bracketing samples. Below the first
    /// sample the series start is used.
    pub fn sample_at(&self, r: f64) -> State {
        let first = self.samples.first().expect("trajectory has samples");
        if r <= first.r {
            return self.system.start_state(r.max(first.r * 1e-3));
        }
        let last = self.samples.last().unwrap();
        if r >= last.r {
            return *last;
        }
        let idx = match self
            .samples
            .binary_search_by(|s| s.r.partial_cmp(&r).unwrap())
        {
            Ok(i) => return self.samples[i],
            Err(i) => i,
        };
        let s0 = &self.samples[idx - 1];
        let s1 = &self.samples[idx];
        let f0 = self.system.eval(s0);
        let f1 = self.system.eval(s1);
        hermite_state(s0, &f0, s1, &f1, r)
    }

    /// Copy truncated at radius `r`: samples beyond `r` are dropped and an
    /// interpolated sample at `r` is appended; events beyond `r` are dropped.
    /// The termination kind of the original integration is kept.
    pub fn truncate_at(&self, r: f64) -> Trajectory {
        if r >= self.end_radius() {
            return self.clone();
        }
        let mut samples: Vec<State> = self
            .samples
            .iter()
            .copied()
            .take_while(|s| s.r < r)
            .collect();
        if samples.is_empty() {
            samples.push(*self.samples.first().unwrap());
        }
        if samples.last().unwrap().r < r {
            samples.push(self.sample_at(r));
        }
        Trajectory {
            system: self.system,
            samples,
            events: self
                .events
                .iter()
                .copied()
                .filter(|e| e.r <= r)
                .collect(),
            termination: self.termination,
            graze_suspects: self
                .graze_suspects
                .iter()
                .copied()
                .filter(|&g| g <= r)
                .collect(),
            config: self.config,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// Difference between 5th- and 4th-order weights; dotted into the stages it
// gives the local error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - 0.75 * BETA;
const MAX_GROWTH: f64 = 2.0;
const MAX_SHRINK: f64 = 0.2;

type Vec4 = [f64; 4];

fn to_vec(s: &State) -> Vec4 {
    [s.u, s.du, s.h, s.dh]
}

fn to_state(r: f64, y: &Vec4) -> State {
    State {
        r,
        u: y[0],
        du: y[1],
        h: y[2],
        dh: y[3],
    }
}

fn eval_vec(sys: &SystemSpec, r: f64, y: &Vec4) -> Vec4 {
    let d = sys.eval(&to_state(r, y));
    [d.du, d.ddu, d.dh, d.ddh]
}

fn axpy(y: &Vec4, k: &[Vec4], coeffs: &[f64], h: f64) -> Vec4 {
    let mut out = *y;
    for (ki, &ci) in k.iter().zip(coeffs) {
        if ci != 0.0 {
            for j in 0..4 {
                out[j] += h * ci * ki[j];
            }
        }
    }
    out
}

/// Cubic Hermite value from endpoint values and derivatives in r.
fn hermite(r0: f64, y0: f64, m0: f64, r1: f64, y1: f64, m1: f64, r: f64) -> f64 {
    let h = r1 - r0;
    let t = (r - r0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1
}

fn hermite_state(s0: &State, f0: &StateDeriv, s1: &State, f1: &StateDeriv, r: f64) -> State {
    State {
        r,
        u: hermite(s0.r, s0.u, f0.du, s1.r, s1.u, f1.du, r),
        du: hermite(s0.r, s0.du, f0.ddu, s1.r, s1.du, f1.ddu, r),
        h: hermite(s0.r, s0.h, f0.dh, s1.r, s1.h, f1.dh, r),
        dh: hermite(s0.r, s0.dh, f0.ddh, s1.r, s1.dh, f1.ddh, r),
    }
}

/// Interior extremum locations of the Hermite cubic through (y0, m0), (y1, m1).
fn hermite_extrema(r0: f64, y0: f64, m0: f64, r1: f64, y1: f64, m1: f64) -> Vec<f64> {
    let h = r1 - r0;
    // H(t) = a0 + a1 t + a2 t^2 + a3 t^3 on t in [0, 1].
    let a1 = h * m0;
    let a2 = -3.0 * y0 - 2.0 * h * m0 + 3.0 * y1 - h * m1;
    let a3 = 2.0 * y0 + h * m0 - 2.0 * y1 + h * m1;
    // H'(t) = a1 + 2 a2 t + 3 a3 t^2.
    let mut roots = Vec::new();
    let qa = 3.0 * a3;
    let qb = 2.0 * a2;
    let qc = a1;
    if qa.abs() < 1e-300 {
        if qb.abs() > 1e-300 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // Numerically stable quadratic roots.
            let q = -0.5 * (qb + qb.signum() * sq);
            if q != 0.0 {
                roots.push(q / qa);
                roots.push(qc / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    let mut out: Vec<f64> = roots
        .into_iter()
        .filter(|t| *t > 1e-12 && *t < 1.0 - 1e-12)
        .map(|t| r0 + t * h)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * (1.0 + b.abs()));
    out
}

/// Bisection of `f` on [lo, hi], assuming an (approximate) sign change.
/// Returns the radius where f is closest to zero at machine-level widths.
fn bisect_monitor(mut lo: f64, mut hi: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..90 {
        if (hi - lo) <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct StepEvents {
    events: Vec<Event>,
    grazes: Vec<f64>,
}

/// Locates sign changes of u, u', u'' within one accepted step, including
/// double crossings hidden in a same-sign interval (u dips through zero and
/// back between samples).
fn scan_step(
    sys: &SystemSpec,
    s0: &State,
    f0: &StateDeriv,
    s1: &State,
    f1: &StateDeriv,
    graze_tol: f64,
) -> StepEvents {
    let mut events = Vec::new();
    let mut grazes = Vec::new();

    let interp = |r: f64| hermite_state(s0, f0, s1, f1, r);

    // u crossings.
    let mut u_at = |r: f64| hermite(s0.r, s0.u, f0.du, s1.r, s1.u, f1.du, r);
    if s0.u != 0.0 && s1.u != 0.0 {
        if (s0.u > 0.0) != (s1.u > 0.0) {
            let r = bisect_monitor(s0.r, s1.r, &mut u_at);
            events.push(Event {
                kind: EventKind::UZero,
                r,
                state: interp(r),
            });
        } else {
            // Same-sign endpoints: check interior extrema for a hidden dip.
            for re in hermite_extrema(s0.r, s0.u, f0.du, s1.r, s1.u, f1.du) {
                let ue = u_at(re);
                if ue != 0.0 && (ue > 0.0) != (s0.u > 0.0) {
                    if ue.abs() < graze_tol {
                        grazes.push(re);
                    } else {
                        let ra = bisect_monitor(s0.r, re, &mut u_at);
                        let rb = bisect_monitor(re, s1.r, &mut u_at);
                        events.push(Event {
                            kind: EventKind::UZero,
                            r: ra,
                            state: interp(ra),
                        });
                        events.push(Event {
                            kind: EventKind::UZero,
                            r: rb,
                            state: interp(rb),
                        });
                    }
                    break;
                }
            }
        }
    }

    // u' crossings (extrema of u).
    if s0.du != 0.0 && s1.du != 0.0 && (s0.du > 0.0) != (s1.du > 0.0) {
        let mut du_at = |r: f64| hermite(s0.r, s0.du, f0.ddu, s1.r, s1.du, f1.ddu, r);
        let r = bisect_monitor(s0.r, s1.r, &mut du_at);
        events.push(Event {
            kind: EventKind::UPrimeZero,
            r,
            state: interp(r),
        });
    }

    // u'' crossings (inflections); the curvature along the interpolant is
    // re-evaluated through the system right-hand side.
    if f0.ddu != 0.0 && f1.ddu != 0.0 && (f0.ddu > 0.0) != (f1.ddu > 0.0) {
        let mut ddu_at = |r: f64| sys.eval(&interp(r)).ddu;
        let r = bisect_monitor(s0.r, s1.r, &mut ddu_at);
        events.push(Event {
            kind: EventKind::Inflection,
            r,
            state: interp(r),
        });
    }

    events.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap());
    StepEvents { events, grazes }
}

fn wrms(v: &Vec4, y0: &Vec4, y1: &Vec4, cfg: &SolveConfig, dim: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..dim {
        let sk = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        let e = v[i] / sk;
        acc += e * e;
    }
    (acc / dim as f64).sqrt()
}

fn initial_step(
    sys: &SystemSpec,
    r0: f64,
    y0: &Vec4,
    f0: &Vec4,
    cfg: &SolveConfig,
    dim: usize,
    max_step: f64,
) -> f64 {
    let norm = |v: &Vec4| {
        let mut acc = 0.0;
        for i in 0..dim {
            let sk = cfg.abs_tol + cfg.rel_tol * y0[i].abs();
            acc += (v[i] / sk) * (v[i] / sk);
        }
        (acc / dim as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(cfg.r_max - r0).min(max_step);
    let mut y1 = *y0;
    for i in 0..4 {
        y1[i] += h0 * f0[i];
    }
    let f1 = eval_vec(sys, r0 + h0, &y1);
    let mut diff = [0.0; 4];
    for i in 0..4 {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.r_max - r0).min(max_step)
}

/// Integrates a shot from its series start outward. Stops at the first of:
/// blow-up past the turning radius, decay detection past the turning radius,
/// r_max, or the step budget. Non-finite states are reported as blow-up at
/// the last finite state.
pub fn integrate_shot(
    problem: &crate::problem::ProblemSpec,
    param: &crate::problem::ShootParam,
    config: &SolveConfig,
) -> Result<Trajectory> {
    problem.validate()?;
    integrate_system(SystemSpec::shot(*problem, *param), config)
}

/// Integrates any supported system with the adaptive stepper.
pub fn integrate_system(system: SystemSpec, config: &SolveConfig) -> Result<Trajectory> {
    integrate_with_max_step(system, config, f64::INFINITY)
}

pub(crate) fn integrate_with_max_step(
    system: SystemSpec,
    config: &SolveConfig,
    max_step: f64,
) -> Result<Trajectory> {
    config.validate()?;
    let b = system.central_value();
    let delta = config.start_delta * system.start_delta_scale();
    if delta >= config.r_max {
        return Err(Error::ConfigInvalid(format!(
            "effective start radius {delta} reaches r_max {}",
            config.r_max
        )));
    }
    let dim = system.dim();
    let graze_tol = 100.0 * (config.abs_tol + config.rel_tol * b);

    let s0 = system.start_state(delta);
    let mut samples = vec![s0];
    let mut events: Vec<Event> = Vec::new();
    let mut grazes: Vec<f64> = Vec::new();

    let mut r = delta;
    let mut y = to_vec(&s0);
    let mut f_cur = eval_vec(&system, r, &y);
    let mut h = initial_step(&system, r, &y, &f_cur, config, dim, max_step);
    let mut facold: f64 = 1e-4;
    let mut k = [[0.0_f64; 4]; 7];
    let mut attempts = 0usize;

    let termination = 'outer: loop {
        if attempts >= config.max_steps {
            break EventKind::BudgetExhausted;
        }
        attempts += 1;

        if h < 1e-14 * r.max(1.0) {
            // Step-size collapse: genuine growth is reported as blow-up,
            // anything else as an exhausted budget.
            break if y[0].abs() > config.blowup_factor * b {
                EventKind::Blowup
            } else {
                EventKind::BudgetExhausted
            };
        }

        let mut h_eff = h.min(max_step);
        let mut lands_on_rmax = false;
        if r + h_eff >= config.r_max {
            h_eff = config.r_max - r;
            lands_on_rmax = true;
        }

        // Stages (FSAL: k[0] is the derivative at the step start).
        k[0] = f_cur;
        for i in 0..6 {
            let yi = axpy(&y, &k[..=i], &A[i][..=i], h_eff);
            let ri = r + C[i] * h_eff;
            k[i + 1] = eval_vec(&system, ri, &yi);
        }
        // 5th-order solution is the stage-7 argument (A[5] row = b weights).
        let y1 = axpy(&y, &k[..6], &A[5], h_eff);
        let f1 = k[6];

        let mut err_vec = [0.0_f64; 4];
        for (i, ev) in err_vec.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (kj, ej) in k.iter().zip(E.iter()) {
                acc += ej * kj[i];
            }
            *ev = h_eff * acc;
        }
        let err = wrms(&err_vec, &y, &y1, config, dim);

        if !err.is_finite() {
            // Overflow inside the stages: shrink hard; if the state itself
            // is already non-finite we are diverging.
            if !y1.iter().all(|v| v.is_finite()) && y[0].abs() > b {
                events.push(Event {
                    kind: EventKind::Blowup,
                    r,
                    state: to_state(r, &y),
                });
                break EventKind::Blowup;
            }
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            // Accepted.
            let r1 = if lands_on_rmax { config.r_max } else { r + h_eff };
            if !y1.iter().all(|v| v.is_finite()) {
                events.push(Event {
                    kind: EventKind::Blowup,
                    r,
                    state: to_state(r, &y),
                });
                break EventKind::Blowup;
            }
            let s_prev = to_state(r, &y);
            let s_next = to_state(r1, &y1);
            let d_prev = StateDeriv {
                du: f_cur[0],
                ddu: f_cur[1],
                dh: f_cur[2],
                ddh: f_cur[3],
            };
            let d_next = StateDeriv {
                du: f1[0],
                ddu: f1[1],
                dh: f1[2],
                ddh: f1[3],
            };
            let mut found = scan_step(&system, &s_prev, &d_prev, &s_next, &d_next, graze_tol);
            events.append(&mut found.events);
            grazes.append(&mut found.grazes);
            samples.push(s_next);

            // Termination checks at the new sample.
            let past_turning = r1 > system.turning_radius(&s_next);
            if past_turning {
                if s_next.u.abs() > config.blowup_factor * b && s_next.u * s_next.du > 0.0 {
                    events.push(Event {
                        kind: EventKind::Blowup,
                        r: r1,
                        state: s_next,
                    });
                    break 'outer EventKind::Blowup;
                }
                if s_next.u.abs() < config.decay_u_tol * b
                    && s_next.du.abs() < config.decay_du_tol * b
                    && s_next.u * s_next.du <= 0.0
                {
                    events.push(Event {
                        kind: EventKind::DecayDetected,
                        r: r1,
                        state: s_next,
                    });
                    break 'outer EventKind::DecayDetected;
                }
            }
            if lands_on_rmax {
                events.push(Event {
                    kind: EventKind::BudgetExhausted,
                    r: r1,
                    state: s_next,
                });
                break 'outer EventKind::BudgetExhausted;
            }

            // PI controller.
            let fac11 = err.powf(EXPO1);
            let fac = (fac11 / facold.powf(BETA) / SAFETY)
                .clamp(1.0 / MAX_GROWTH, 1.0 / MAX_SHRINK);
            h = h_eff / fac;
            facold = err.max(1e-4);
            r = r1;
            y = y1;
            f_cur = f1;
        } else {
            let fac11 = err.powf(EXPO1);
            h = h_eff / (fac11 / SAFETY).min(1.0 / MAX_SHRINK);
        }
    };

    // Budget exhaustion by step count records its event at the final sample.
    if termination == EventKind::BudgetExhausted
        && events.last().map(|e| e.kind) != Some(EventKind::BudgetExhausted)
    {
        let s = *samples.last().unwrap();
        events.push(Event {
            kind: EventKind::BudgetExhausted,
            r: s.r,
            state: s,
        });
    }

    Ok(Trajectory {
        system,
        samples,
        events,
        termination,
        graze_suspects: grazes,
        config: *config,
    })
}

/// Locates an event of the given kind inside `bracket = (r_lo, r_hi)` by
/// scanning the trajectory's samples for a sign change of the monitored
/// quantity and bisecting the dense output across it.
pub fn refine_event(traj: &Trajectory, bracket: (f64, f64), kind: EventKind) -> Result<Event> {
    let (lo, hi) = bracket;
    let quantity: &'static str = match kind {
        EventKind::UZero => "u",
        EventKind::UPrimeZero => "u'",
        EventKind::Inflection => "u''",
        _ => {
            return Err(Error::NoSignChange {
                quantity: "termination kinds are not sign monitors",
                lo,
                hi,
            })
        }
    };
    if !(hi > lo) {
        return Err(Error::NoSignChange { quantity, lo, hi });
    }
    let monitor = |s: &State| -> f64 {
        match kind {
            EventKind::UZero => s.u,
            EventKind::UPrimeZero => s.du,
            EventKind::Inflection => traj.system.eval(s).ddu,
            _ => unreachable!(),
        }
    };

    // Probe radii: bracket endpoints plus every sample strictly inside.
    let mut probes = vec![lo.max(traj.start_radius())];
    for s in &traj.samples {
        if s.r > probes[0] && s.r < hi.min(traj.end_radius()) {
            probes.push(s.r);
        }
    }
    probes.push(hi.min(traj.end_radius()));

    let mut prev_r = probes[0];
    let mut prev_v = monitor(&traj.sample_at(prev_r));
    for &pr in &probes[1..] {
        let v = monitor(&traj.sample_at(pr));
        if prev_v != 0.0 && v != 0.0 && (prev_v > 0.0) != (v > 0.0) {
            let mut f = |r: f64| monitor(&traj.sample_at(r));
            let r = bisect_monitor(prev_r, pr, &mut f);
            return Ok(Event {
                kind,
                r,
                state: traj.sample_at(r),
            });
        }
        prev_r = pr;
        prev_v = v;
    }
    Err(Error::NoSignChange { quantity, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ProblemSpec, ShootParam};

    fn shot(problem: ProblemSpec, c: f64) -> Trajectory {
        integrate_shot(&problem, &ShootParam::new(c).unwrap(), &SolveConfig::default()).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolveConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.rel_tol = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SolveConfig::default();
        cfg.r_max = cfg.start_delta;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn gp_zero_parameter_shot_diverges_positive() {
        let traj = shot(ProblemSpec::gp(4, 1.0).unwrap(), 0.0);
        assert_eq!(traj.termination, EventKind::Blowup);
        assert!(traj.final_state().u > 0.0);
        assert_eq!(traj.crossing_radii().len(), 0);
    }

    #[test]
    fn snh_large_c_crosses_after_monotone_decrease() {
        let traj = shot(ProblemSpec::snh(7, 1.0).unwrap(), 60.0);
        let crossings = traj.crossing_radii();
        assert!(!crossings.is_empty());
        let first = crossings[0];
        // No extremum before the first crossing and u' < 0 approaching it.
        assert!(traj
            .events
            .iter()
            .filter(|e| e.kind == EventKind::UPrimeZero)
            .all(|e| e.r > first));
        let just_before = traj.sample_at(first * 0.98);
        assert!(just_before.u > 0.0 && just_before.du < 0.0);
    }

    #[test]
    fn samples_strictly_increasing_and_start_at_delta() {
        let traj = shot(ProblemSpec::gp(4, 1.0).unwrap(), 2.0);
        let delta = traj.config.start_delta * (1.0 / 3.0_f64).sqrt();
        assert!((traj.samples[0].r - delta).abs() < 1e-18);
        for w in traj.samples.windows(2) {
            assert!(w[1].r > w[0].r);
        }
    }

    #[test]
    fn sign_constant_between_crossings() {
        let traj = shot(ProblemSpec::snh(7, 1.0).unwrap(), 80.0);
        let crossings = traj.crossing_radii();
        assert!(crossings.len() >= 2);
        for s in &traj.samples {
            let below = crossings.iter().filter(|&&c| c < s.r).count();
            if s.u != 0.0 {
                let expected_positive = below % 2 == 0;
                assert_eq!(
                    s.u > 0.0,
                    expected_positive,
                    "sign mismatch at r = {}",
                    s.r
                );
            }
        }
    }

    #[test]
    fn snh_field_gradient_nonpositive() {
        for c in [0.0, 1.0, 5.0, 40.0] {
            let traj = shot(ProblemSpec::snh(7, 1.0).unwrap(), c);
            for s in &traj.samples {
                assert!(s.dh <= 1e-12, "dh = {} at r = {}", s.dh, s.r);
            }
        }
    }

    #[test]
    fn trajectories_are_reproducible_bitwise() {
        let p = ProblemSpec::snh(7, 1.0).unwrap();
        let a = shot(p, 3.7);
        let b = shot(p, 3.7);
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.u.to_bits(), y.u.to_bits());
            assert_eq!(x.h.to_bits(), y.h.to_bits());
        }
    }

    #[test]
    fn refine_event_intermediate_value() {
        let traj = shot(ProblemSpec::snh(7, 1.0).unwrap(), 60.0);
        let r0 = traj.crossing_radii()[0];
        let ev = refine_event(&traj, (r0 - 0.3, r0 + 0.3), EventKind::UZero).unwrap();
        assert!((ev.r - r0).abs() < 1e-9);
        assert!(ev.state.u.abs() < 1e-9);
    }

    #[test]
    fn refine_event_no_sign_change() {
        let traj = shot(ProblemSpec::gp(4, 1.0).unwrap(), 0.0);
        // u stays positive on the whole domain.
        let hi = traj.end_radius() * 0.5;
        assert!(matches!(
            refine_event(&traj, (traj.start_radius(), hi), EventKind::UZero),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_is_surfaced() {
        let cfg = SolveConfig {
            r_max: 0.5,
            ..Default::default()
        };
        let traj = integrate_shot(
            &ProblemSpec::gp(4, 1.0).unwrap(),
            &ShootParam::new(1.0).unwrap(),
            &cfg,
        )
        .unwrap();
        assert_eq!(traj.termination, EventKind::BudgetExhausted);
        assert_eq!(traj.end_radius(), 0.5);
    }

    #[test]
    fn truncation_keeps_prefix() {
        let traj = shot(ProblemSpec::gp(4, 1.0).unwrap(), 0.0);
        let r_cut = traj.end_radius() * 0.5;
        let cut = traj.truncate_at(r_cut);
        assert!((cut.end_radius() - r_cut).abs() < 1e-12);
        assert!(cut.events.iter().all(|e| e.r <= r_cut));
        // Interpolated end sample agrees with the parent trajectory.
        let a = traj.sample_at(r_cut);
        let b = cut.final_state();
        assert!((a.u - b.u).abs() < 1e-12 * (1.0 + a.u.abs()));
    }

    #[test]
    fn tolerance_tightening_improves_linear_profile() {
        // Exact solution of the linear family at c = d is b exp(-r^2/2).
        let p = ProblemSpec::linear(3, 1.0).unwrap();
        let c = ShootParam::new(3.0).unwrap();
        let errs: Vec<f64> = [1e-7, 1e-9, 1e-11]
            .iter()
            .map(|&tol| {
                let cfg = SolveConfig {
                    rel_tol: tol,
                    abs_tol: tol * 1e-2,
                    r_max: 4.0,
                    ..Default::default()
                };
                let traj = integrate_shot(&p, &c, &cfg).unwrap();
                traj.samples
                    .iter()
                    .map(|s| {
                        let exact = (-s.r * s.r / 2.0).exp();
                        ((s.u - exact) / exact).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[1] < errs[0]);
        assert!(errs[2] < errs[1]);
        assert!(errs[2] < 1e-9);
    }
}
