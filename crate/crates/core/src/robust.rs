//! Robustness of a temporal property against initial-concentration
//! uncertainty.
//!
//! Two questions are answered here. First, the expected satisfaction degree
//! of a formula when the initial state is drawn uniformly from an interval
//! marking, estimated by Monte Carlo over simulated traces. Second,
//! alpha-robustness of a steady-state output: whether the output spreads by
//! at most alpha across the marking, probed on a grid, by sampling, or (for
//! a certified monotone output) by the two endpoint simulations alone.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{sample_marking, IntervalMarking, ModelError, ReactionNetwork};
use crate::odesim::{find_steady_state, simulate, SimError, SimOptions};
use crate::qfltl::{
    abstract_formula, validate_observables, violation_degree_abstracted, CmpOp, EvalError, Formula,
};

#[derive(Debug, Error)]
pub enum RobustnessError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("all {0} samples failed to simulate")]
    AllSamplesFailed(usize),
    #[error("invalid window: min {min} exceeds max {max}")]
    InvalidWindow { min: f64, max: f64 },
}

/// The canonical reachability-of-a-stable-window property: eventually the
/// output stays within `[min, max]` forever.
pub fn stable_window_formula(
    output: &str,
    min: f64,
    max: f64,
) -> Result<Formula, RobustnessError> {
    if !min.is_finite() || !max.is_finite() || min > max {
        return Err(RobustnessError::InvalidWindow { min, max });
    }
    Ok(Formula::Finally(Box::new(Formula::Globally(Box::new(Formula::And(
        Box::new(Formula::atom(output, CmpOp::Ge, min)),
        Box::new(Formula::atom(output, CmpOp::Le, max)),
    ))))))
}

#[derive(Debug, Clone)]
pub struct RobustnessQuery<'a> {
    pub network: &'a ReactionNetwork,
    pub marking: IntervalMarking,
    pub formula: Formula,
    pub samples: usize,
    pub seed: u64,
    pub sim: SimOptions,
    /// Keep the per-sample initial states and degrees in the report.
    pub record_samples: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub initial: Vec<f64>,
    pub satisfaction_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    /// Mean satisfaction degree over the successfully simulated samples.
    pub estimate: f64,
    /// Standard error of that mean (0 for fewer than two samples).
    pub std_error: f64,
    pub samples_used: usize,
    pub samples_failed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<SamplePoint>>,
}

// Derives independent per-sample seeds from the master seed; the draw for
// sample i never depends on how many samples are requested.
fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Compensated (Neumaier) summation; the sum of exactly representable
/// values such as a run of ones stays exact.
fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Estimates the mean satisfaction degree of the formula over traces
/// started from uniform draws of the marking.
///
/// An all-trivial marking needs no sampling: the estimate is the degree of
/// the single determined trace. Samples whose simulation fails are counted
/// and excluded from the mean; aggregation runs in a fixed order regardless
/// of parallel scheduling, so reports are reproducible bit for bit.
pub fn estimate_robustness(q: &RobustnessQuery) -> Result<RobustnessReport, RobustnessError> {
    if q.samples == 0 {
        return Err(RobustnessError::InvalidQuery("samples must be at least 1".into()));
    }
    q.sim.validate()?;
    let names = q.network.species_names();
    if q.marking.len() != names.len() {
        return Err(RobustnessError::InvalidQuery(
            "marking does not match the network's species".into(),
        ));
    }
    validate_observables(&q.formula, &names)?;
    let qf = abstract_formula(&q.formula)?;
    let odes = q.network.derive_odes();

    let initials: Vec<Vec<f64>> = if q.marking.all_trivial() {
        vec![q.marking.lower_state()]
    } else {
        q.marking.ensure_bounded()?;
        (0..q.samples)
            .map(|i| sample_marking(&q.marking, mix_seed(q.seed, i as u64)))
            .collect::<Result<_, _>>()?
    };

    let outcomes: Vec<Result<f64, SimError>> = initials
        .par_iter()
        .map(|x0| {
            let trace = simulate(&odes, x0, &q.sim)?;
            let vd = violation_degree_abstracted(&trace, &qf)
                .expect("observables validated before sampling");
            Ok(1.0 / (1.0 + vd))
        })
        .collect();

    let mut degrees = Vec::with_capacity(outcomes.len());
    let mut kept = Vec::with_capacity(outcomes.len());
    let mut failed = 0usize;
    for (x0, r) in initials.iter().zip(outcomes) {
        match r {
            Ok(sd) => {
                degrees.push(sd);
                kept.push(SamplePoint { initial: x0.clone(), satisfaction_degree: sd });
            }
            Err(_) => failed += 1,
        }
    }
    if degrees.is_empty() {
        return Err(RobustnessError::AllSamplesFailed(failed));
    }

    let n = degrees.len();
    let estimate = neumaier_sum(degrees.iter().copied()) / n as f64;
    let std_error = if n < 2 {
        0.0
    } else {
        let var = neumaier_sum(degrees.iter().map(|d| (d - estimate) * (d - estimate)))
            / (n - 1) as f64;
        (var / n as f64).sqrt()
    };

    Ok(RobustnessReport {
        estimate,
        std_error,
        samples_used: n,
        samples_failed: failed,
        samples: q.record_samples.then_some(kept),
    })
}

/// How the admissible initial set is probed for the alpha check.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeStrategy {
    /// Cartesian grid with this many points per free interval.
    Grid(usize),
    /// Uniform random probes.
    MonteCarlo { samples: usize, seed: u64 },
    /// Only the two endpoint states of a single free interval. Exact when
    /// the output is monotone in that initial concentration; certifying
    /// monotonicity is the caller's job (see the `mono` module).
    MonotoneEndpoints,
}

impl ProbeStrategy {
    fn describe(&self) -> String {
        match self {
            ProbeStrategy::Grid(n) => format!("grid({n})"),
            ProbeStrategy::MonteCarlo { samples, seed } => {
                format!("monte_carlo({samples}, seed={seed})")
            }
            ProbeStrategy::MonotoneEndpoints => "monotone_endpoints".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlphaQuery<'a> {
    pub network: &'a ReactionNetwork,
    pub marking: IntervalMarking,
    /// Species whose steady-state concentration is the output.
    pub output: String,
    pub alpha: f64,
    pub strategy: ProbeStrategy,
    pub sim: SimOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaStatus {
    Ok,
    /// Some probe did not reach a steady state (or failed to simulate);
    /// robustness is then undetermined and reported as not robust.
    SteadyStateFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub initial: Vec<f64>,
    pub output: f64,
    pub t_reached: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub robust: bool,
    pub status: AlphaStatus,
    pub alpha: f64,
    pub observed_min: Option<f64>,
    pub observed_max: Option<f64>,
    /// `observed_max - observed_min`.
    pub spread: Option<f64>,
    /// Center of the observed band; the tightest window the probes allow is
    /// `[center_k - spread/2, center_k + spread/2]`.
    pub center_k: Option<f64>,
    pub strategy_used: String,
    /// True when the strategy covers the marking exactly rather than
    /// sampling it (endpoint verification of a monotone output).
    pub exact: bool,
    pub probes: Vec<ProbeOutcome>,
    /// Initial states whose probe failed.
    pub failures: Vec<Vec<f64>>,
}

fn grid_initials(marking: &IntervalMarking, points: usize) -> Result<Vec<Vec<f64>>, RobustnessError> {
    let free = marking.free_species();
    if free.is_empty() {
        return Ok(vec![marking.lower_state()]);
    }
    if points < 2 {
        return Err(RobustnessError::InvalidQuery(
            "grid needs at least 2 points per free interval".into(),
        ));
    }
    let mut initials = Vec::new();
    let mut index = vec![0usize; free.len()];
    loop {
        let mut state = marking.lower_state();
        for (d, &j) in free.iter().enumerate() {
            let iv = marking.interval(j);
            // Endpoints land exactly on lo and hi.
            state[j] = iv.lo() + (iv.hi() - iv.lo()) * index[d] as f64 / (points - 1) as f64;
        }
        initials.push(state);
        // Odometer increment, last dimension fastest.
        let mut d = free.len();
        loop {
            if d == 0 {
                return Ok(initials);
            }
            d -= 1;
            index[d] += 1;
            if index[d] < points {
                break;
            }
            index[d] = 0;
        }
    }
}

/// Checks whether the steady-state output varies by at most `alpha` over
/// the marking, using the requested probing strategy.
pub fn check_alpha_robustness(q: &AlphaQuery) -> Result<AlphaReport, RobustnessError> {
    if !q.alpha.is_finite() || q.alpha < 0.0 {
        return Err(RobustnessError::InvalidQuery("alpha must be finite and nonnegative".into()));
    }
    q.sim.validate()?;
    let names = q.network.species_names();
    if q.marking.len() != names.len() {
        return Err(RobustnessError::InvalidQuery(
            "marking does not match the network's species".into(),
        ));
    }
    let out_idx = q
        .network
        .species_index(&q.output)
        .ok_or_else(|| ModelError::UnknownSpecies(q.output.clone()))?;
    q.marking.ensure_bounded()?;

    let initials: Vec<Vec<f64>> = match &q.strategy {
        ProbeStrategy::Grid(points) => grid_initials(&q.marking, *points)?,
        ProbeStrategy::MonteCarlo { samples, seed } => {
            if *samples == 0 {
                return Err(RobustnessError::InvalidQuery("samples must be at least 1".into()));
            }
            (0..*samples)
                .map(|i| sample_marking(&q.marking, mix_seed(*seed, i as u64)))
                .collect::<Result<_, _>>()?
        }
        ProbeStrategy::MonotoneEndpoints => {
            let free = q.marking.free_species();
            if free.len() != 1 {
                return Err(RobustnessError::InvalidQuery(format!(
                    "monotone_endpoints needs exactly one free interval, found {}",
                    free.len()
                )));
            }
            vec![q.marking.lower_state(), q.marking.upper_state()]
        }
    };

    let odes = q.network.derive_odes();
    let outcomes: Vec<Option<ProbeOutcome>> = initials
        .par_iter()
        .map(|x0| match find_steady_state(&odes, x0, &q.sim) {
            Ok((_, report)) if report.reached => Some(ProbeOutcome {
                initial: x0.clone(),
                output: report.state[out_idx],
                t_reached: report.t_reached.expect("reached implies a time"),
            }),
            _ => None,
        })
        .collect();

    let mut probes = Vec::new();
    let mut failures = Vec::new();
    for (x0, o) in initials.iter().zip(outcomes) {
        match o {
            Some(p) => probes.push(p),
            None => failures.push(x0.clone()),
        }
    }

    let status = if failures.is_empty() { AlphaStatus::Ok } else { AlphaStatus::SteadyStateFailure };
    let (observed_min, observed_max) = probes.iter().fold((None, None), |(lo, hi), p| {
        (
            Some(lo.map_or(p.output, |v: f64| v.min(p.output))),
            Some(hi.map_or(p.output, |v: f64| v.max(p.output))),
        )
    });
    let spread = match (observed_min, observed_max) {
        (Some(lo), Some(hi)) => Some(hi - lo),
        _ => None,
    };
    let center_k = match (observed_min, observed_max) {
        (Some(lo), Some(hi)) => Some((lo + hi) / 2.0),
        _ => None,
    };
    let robust = status == AlphaStatus::Ok && spread.is_some_and(|s| s <= q.alpha);

    Ok(AlphaReport {
        robust,
        status,
        alpha: q.alpha,
        observed_min,
        observed_max,
        spread,
        center_k,
        strategy_used: q.strategy.describe(),
        exact: matches!(q.strategy, ProbeStrategy::MonotoneEndpoints),
        probes,
        failures,
    })
}
