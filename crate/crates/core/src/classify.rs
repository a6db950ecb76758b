//! Trichotomy classification of trajectories and the structural predicates
//! defining the ground- and excited-state parameter sets.
//!
//! Every shot either diverges to +infinity, diverges to -infinity, or decays
//! to zero; a finite budget adds a fourth, honestly reported outcome
//! (`Undetermined`). The ground set consists of parameters whose solution
//! crosses zero after decreasing monotonically from the center; its infimum
//! is the ground-state parameter.

use crate::error::{Error, Result};
use crate::integrate::{integrate_shot, EventKind, SolveConfig, Trajectory};
use crate::problem::{ProblemSpec, ShootParam};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    DivergesPlus,
    DivergesMinus,
    DecaysToZero,
    Undetermined,
}

/// Outcome of classifying one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub fate: Fate,
    /// Radii of refined zero crossings of u, strictly increasing.
    pub crossings: Vec<f64>,
    /// Radii of refined interior extrema of u (zero crossings of u').
    pub extrema: Vec<f64>,
    /// True when no extremum precedes the first crossing.
    pub monotone_to_first_crossing: bool,
    /// True when a suspected tangential graze made the crossing count ambiguous.
    pub graze_ambiguous: bool,
}

impl Classification {
    pub fn extrema_count(&self) -> usize {
        self.extrema.len()
    }
}

/// Maps a terminated trajectory onto the trichotomy and extracts the
/// crossing structure from its refined events. A trajectory whose u is
/// identically zero decays trivially.
pub fn classify(traj: &Trajectory, _config: &SolveConfig) -> Classification {
    if traj.samples.iter().all(|s| s.u.abs() <= 1e-300) {
        return Classification {
            fate: Fate::DecaysToZero,
            crossings: Vec::new(),
            extrema: Vec::new(),
            monotone_to_first_crossing: false,
            graze_ambiguous: false,
        };
    }

    let crossings: Vec<f64> = traj
        .events
        .iter()
        .filter(|e| e.kind == EventKind::UZero)
        .map(|e| e.r)
        .collect();
    let extrema: Vec<f64> = traj
        .events
        .iter()
        .filter(|e| e.kind == EventKind::UPrimeZero)
        .map(|e| e.r)
        .collect();
    let monotone = match crossings.first() {
        Some(&r0) => extrema.iter().all(|&re| re > r0),
        None => false,
    };
    let graze_ambiguous = !traj.graze_suspects.is_empty();

    let fate = if graze_ambiguous {
        Fate::Undetermined
    } else {
        match traj.termination {
            EventKind::Blowup => {
                let u_end = traj
                    .events
                    .iter()
                    .rev()
                    .find(|e| e.kind == EventKind::Blowup)
                    .map(|e| e.state.u)
                    .unwrap_or(traj.final_state().u);
                if u_end >= 0.0 {
                    Fate::DivergesPlus
                } else {
                    Fate::DivergesMinus
                }
            }
            EventKind::DecayDetected => Fate::DecaysToZero,
            _ => Fate::Undetermined,
        }
    };

    Classification {
        fate,
        crossings,
        extrema,
        monotone_to_first_crossing: monotone,
        graze_ambiguous,
    }
}

/// Integrates and classifies one shot. A suspected tangential graze
/// (u touching zero within tolerance) triggers re-integration at 10x
/// tighter tolerances, twice; persistent ambiguity is returned as
/// `Undetermined` rather than guessed.
pub fn classify_shot(
    problem: &ProblemSpec,
    param: &ShootParam,
    config: &SolveConfig,
) -> Result<(Trajectory, Classification)> {
    let mut cfg = *config;
    for _ in 0..3 {
        let traj = integrate_shot(problem, param, &cfg)?;
        let class = classify(&traj, &cfg);
        if !class.graze_ambiguous {
            return Ok((traj, class));
        }
        cfg = cfg.with_tolerance_scale(0.1);
    }
    let traj = integrate_shot(problem, param, &cfg)?;
    let class = classify(&traj, &cfg);
    Ok((traj, class))
}

/// Ground-set membership: at least one crossing, approached monotonically.
pub fn in_ground_set(class: &Classification) -> bool {
    !class.crossings.is_empty() && class.monotone_to_first_crossing
}

/// Excited-set membership for n >= 1 crossings.
///
/// The trajectory must enter its first crossing monotonically and have
/// exactly one extremum strictly between consecutive crossings. Membership
/// holds either with n+1 or more crossings (the super-side of the n-th
/// boundary) or with exactly n crossings and numerically detected decay
/// (the state itself).
pub fn in_excited_set(class: &Classification, n: usize) -> Result<bool> {
    if n < 1 {
        return Err(Error::InvalidN(n));
    }
    if class.graze_ambiguous {
        return Ok(false);
    }
    let k = class.crossings.len();
    let qualifies =
        k >= n + 1 || (k == n && class.fate == Fate::DecaysToZero);
    if !qualifies || !class.monotone_to_first_crossing {
        return Ok(false);
    }
    let checked = k.min(n + 1);
    for w in class.crossings[..checked].windows(2) {
        let inside = class
            .extrema
            .iter()
            .filter(|&&re| re > w[0] && re < w[1])
            .count();
        if inside != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Crossing counts over a grid of shooting parameters. With the `parallel`
/// feature enabled and `parallel = true` the grid is evaluated on the rayon
/// pool; otherwise sequentially. Results are in grid order either way.
pub fn crossing_count_grid(
    problem: &ProblemSpec,
    c_values: &[f64],
    config: &SolveConfig,
    parallel: bool,
) -> Result<Vec<usize>> {
    let count_one = |&c: &f64| -> Result<usize> {
        let param = ShootParam::new(c)?;
        let (_, class) = classify_shot(problem, &param, config)?;
        Ok(class.crossings.len())
    };

    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return c_values.par_iter().map(|c| count_one(c)).collect();
    }
    let _ = parallel;
    c_values.iter().map(count_one).collect()
}

/// Indices i where counts[i+1] < counts[i]; empirically expected to be empty
/// (crossing count non-decreasing in c) but only flagged, never enforced.
pub fn monotonicity_violations(counts: &[usize]) -> Vec<usize> {
    counts
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] < w[0])
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate_shot;
    use crate::problem::{State, SystemSpec};

    fn default_cfg() -> SolveConfig {
        SolveConfig::default()
    }

    fn hand_built(crossings: Vec<f64>, extrema: Vec<f64>, fate: Fate) -> Classification {
        let monotone = match crossings.first() {
            Some(&r0) => extrema.iter().all(|&re| re > r0),
            None => false,
        };
        Classification {
            fate,
            crossings,
            extrema,
            monotone_to_first_crossing: monotone,
            graze_ambiguous: false,
        }
    }

    #[test]
    fn gp_zero_parameter_diverges_plus_no_crossings() {
        let p = ProblemSpec::gp(4, 1.0).unwrap();
        let (_, class) =
            classify_shot(&p, &ShootParam::new(0.0).unwrap(), &default_cfg()).unwrap();
        assert_eq!(class.fate, Fate::DivergesPlus);
        assert!(class.crossings.is_empty());
        assert!(!in_ground_set(&class));
    }

    #[test]
    fn snh_large_c_in_ground_set() {
        let p = ProblemSpec::snh(7, 1.0).unwrap();
        let (_, class) =
            classify_shot(&p, &ShootParam::new(60.0).unwrap(), &default_cfg()).unwrap();
        assert!(!class.crossings.is_empty());
        assert!(class.monotone_to_first_crossing);
        assert!(in_ground_set(&class));
    }

    #[test]
    fn identically_zero_guard_path() {
        let p = ProblemSpec::linear(3, 1.0).unwrap();
        let traj = Trajectory {
            system: SystemSpec::shot(p, ShootParam::new(0.0).unwrap()),
            samples: vec![
                State {
                    r: 1e-4,
                    u: 0.0,
                    du: 0.0,
                    h: 0.0,
                    dh: 0.0,
                },
                State {
                    r: 1.0,
                    u: 0.0,
                    du: 0.0,
                    h: 0.0,
                    dh: 0.0,
                },
            ],
            events: Vec::new(),
            termination: EventKind::BudgetExhausted,
            graze_suspects: Vec::new(),
            config: default_cfg(),
        };
        let class = classify(&traj, &default_cfg());
        assert_eq!(class.fate, Fate::DecaysToZero);
    }

    #[test]
    fn ground_set_rejects_non_monotone_entry() {
        // One crossing but an extremum before it.
        let class = hand_built(vec![2.0], vec![1.0], Fate::DivergesMinus);
        assert!(!class.monotone_to_first_crossing);
        assert!(!in_ground_set(&class));
    }

    #[test]
    fn excited_set_single_crossing_pattern() {
        // Crossing, interior minimum, crossing: the one-node super-side pattern.
        let class = hand_built(vec![1.0, 3.0], vec![2.0], Fate::DivergesPlus);
        assert!(in_excited_set(&class, 1).unwrap());
        // A ground-set trajectory (single crossing then blow-up) is not excited.
        let ground = hand_built(vec![1.0], vec![], Fate::DivergesMinus);
        assert!(!in_excited_set(&ground, 1).unwrap());
    }

    #[test]
    fn excited_set_rejects_bad_gap_structure() {
        // Two extrema between consecutive crossings.
        let class = hand_built(vec![1.0, 3.0], vec![1.5, 2.5], Fate::DivergesPlus);
        assert!(!in_excited_set(&class, 1).unwrap());
    }

    #[test]
    fn excited_set_accepts_decayed_state_with_n_crossings() {
        // Two crossings, one extremum in the gap plus the final lobe peak,
        // decaying: the two-node state itself.
        let class = hand_built(vec![1.0, 2.0], vec![1.5, 2.6], Fate::DecaysToZero);
        assert!(in_excited_set(&class, 2).unwrap());
        assert!(!in_excited_set(&class, 1).unwrap());
    }

    #[test]
    fn invalid_n_rejected() {
        let class = hand_built(vec![], vec![], Fate::DivergesPlus);
        assert!(matches!(in_excited_set(&class, 0), Err(Error::InvalidN(0))));
    }

    #[test]
    fn ground_excludes_excited_on_single_crossing_divergence() {
        let class = hand_built(vec![1.0], vec![], Fate::DivergesMinus);
        assert!(in_ground_set(&class));
        for n in 1..4 {
            assert!(!in_excited_set(&class, n).unwrap());
        }
    }

    #[test]
    fn crossing_count_stable_under_tolerance_tightening() {
        let p = ProblemSpec::snh(7, 1.0).unwrap();
        let cs: Vec<f64> = (0..8).map(|i| 2.0 + 10.0 * i as f64).collect();
        let cfg = default_cfg();
        let tight = cfg.with_tolerance_scale(0.1);
        let a = crossing_count_grid(&p, &cs, &cfg, false).unwrap();
        let b = crossing_count_grid(&p, &cs, &tight, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monotonicity_flagging() {
        assert!(monotonicity_violations(&[0, 0, 1, 2, 2]).is_empty());
        assert_eq!(monotonicity_violations(&[0, 2, 1, 3]), vec![1]);
    }

    #[test]
    fn linear_two_node_eigenfunction_in_excited_set() {
        // At the second excited eigenvalue c = d + 8 the trajectory follows
        // the two-node eigenfunction; the structural predicate accepts it
        // either through numerically detected decay or through the (n+1)-th
        // roundoff-driven crossing past the decayed stretch.
        let p = ProblemSpec::linear(3, 1.0).unwrap();
        let (traj, class) =
            classify_shot(&p, &ShootParam::new(11.0).unwrap(), &default_cfg()).unwrap();
        assert!(class.crossings.len() >= 2, "{:?}", traj.termination);
        assert!(in_excited_set(&class, 2).unwrap());
    }
}
