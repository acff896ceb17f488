//! Numerical simulation of mass-action ODE systems onto uniform output
//! grids, with steady-state detection and CSV trace exchange.
//!
//! Output is always sampled through the integrator's dense interpolant at
//! `t_i = t_end * i / (points - 1)`, so time stamps are exact and do not
//! depend on the internal step sequence.

mod dopri5;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::OdeSystem;

use dopri5::Dopri5;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation options: {0}")]
    InvalidOptions(String),
    #[error("initial state has dimension {got}, system has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("initial state component {index} is negative or not finite ({value})")]
    BadInitialState { index: usize, value: f64 },
    #[error("step size underflow at t = {t} (tolerances too tight for this system)")]
    StepSizeUnderflow { t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("internal step limit exceeded at t = {t}")]
    StepLimitExceeded { t: f64 },
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace has no states")]
    Empty,
    #[error("time stamps must increase strictly (state {index})")]
    NonIncreasingTime { index: usize },
    #[error("state {index} has inconsistent dimension")]
    DimensionMismatch { index: usize },
    #[error("trace contains a non-finite value (state {index})")]
    NonFinite { index: usize },
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Nominal simulation horizon; also defines the output grid spacing.
    pub t_end: f64,
    /// Number of grid points on `[0, t_end]`, including both endpoints.
    pub output_points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Steady state: max-norm of the derivative must stay below this.
    pub ss_tol: f64,
    /// ... over a trailing time window of this length.
    pub ss_window: f64,
    /// Steady-state searches keep integrating past `t_end` up to here.
    pub t_max_extend: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions::for_horizon(100.0)
    }
}

impl SimOptions {
    /// Defaults scaled to a horizon: the steady-state window is 5% of the
    /// horizon and searches may extend to ten times the horizon.
    pub fn for_horizon(t_end: f64) -> Self {
        SimOptions {
            t_end,
            output_points: 1001,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            ss_tol: 1e-6,
            ss_window: 0.05 * t_end,
            t_max_extend: 10.0 * t_end,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidOptions(msg.to_string()));
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return bad("t_end must be positive and finite");
        }
        if self.output_points < 2 {
            return bad("output_points must be at least 2");
        }
        if !self.rel_tol.is_finite() || self.rel_tol <= 0.0 {
            return bad("rel_tol must be positive");
        }
        if !self.abs_tol.is_finite() || self.abs_tol <= 0.0 {
            return bad("abs_tol must be positive");
        }
        if !self.ss_tol.is_finite() || self.ss_tol <= 0.0 {
            return bad("ss_tol must be positive");
        }
        if !self.ss_window.is_finite() || self.ss_window <= 0.0 {
            return bad("ss_window must be positive");
        }
        if !self.t_max_extend.is_finite() || self.t_max_extend < self.t_end {
            return bad("t_max_extend must be at least t_end");
        }
        Ok(())
    }

    /// Time of output grid point `i`.
    pub fn grid_time(&self, i: usize) -> f64 {
        self.t_end * (i as f64) / ((self.output_points - 1) as f64)
    }
}

/// One sampled point of a simulation: time, state and state derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedState {
    pub t: f64,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
}

/// Which column of a trace an observable name refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Value(usize),
    Derivative(usize),
}

/// Resolves an observable name against a species list: an exact species
/// name means its concentration, `d` + species name means its derivative.
/// Exact species names win, so a species literally called `dX` shadows the
/// derivative reading.
pub fn resolve_observable(names: &[String], name: &str) -> Option<Observable> {
    if let Some(j) = names.iter().position(|n| n == name) {
        return Some(Observable::Value(j));
    }
    let rest = name.strip_prefix('d')?;
    names.iter().position(|n| n == rest).map(Observable::Derivative)
}

/// Finite timed trace over named species, with strictly increasing time
/// stamps. The trace conceptually extends past its last state by repeating
/// it forever; the temporal logic evaluator relies on that convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    names: Vec<String>,
    states: Vec<TimedState>,
}

impl Trace {
    pub fn new(names: Vec<String>, states: Vec<TimedState>) -> Result<Self, TraceError> {
        if states.is_empty() {
            return Err(TraceError::Empty);
        }
        let dim = names.len();
        for (i, s) in states.iter().enumerate() {
            if s.x.len() != dim || s.xdot.len() != dim {
                return Err(TraceError::DimensionMismatch { index: i });
            }
            if !s.t.is_finite()
                || s.x.iter().any(|v| !v.is_finite())
                || s.xdot.iter().any(|v| !v.is_finite())
            {
                return Err(TraceError::NonFinite { index: i });
            }
            if i > 0 && s.t <= states[i - 1].t {
                return Err(TraceError::NonIncreasingTime { index: i });
            }
        }
        Ok(Trace { names, states })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn states(&self) -> &[TimedState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &TimedState {
        self.states.last().expect("traces are nonempty")
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn observable(&self, name: &str) -> Option<Observable> {
        resolve_observable(&self.names, name)
    }

    /// Value of an observable at state `i`.
    pub fn observe(&self, obs: Observable, i: usize) -> f64 {
        match obs {
            Observable::Value(j) => self.states[i].x[j],
            Observable::Derivative(j) => self.states[i].xdot[j],
        }
    }

    /// CSV with header `t,<names...>,d<names>...` and full-precision values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push('t');
        for n in &self.names {
            let _ = write!(out, ",{n}");
        }
        for n in &self.names {
            let _ = write!(out, ",d{n}");
        }
        out.push('\n');
        for s in &self.states {
            let _ = write!(out, "{}", fmt_full(s.t));
            for v in &s.x {
                let _ = write!(out, ",{}", fmt_full(*v));
            }
            for v in &s.xdot {
                let _ = write!(out, ",{}", fmt_full(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(TraceError::Empty)?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 3 || cols.len().is_multiple_of(2) || cols[0] != "t" {
            return Err(TraceError::Csv {
                line: 1,
                message: "expected header t,<species...>,d<species>...".into(),
            });
        }
        let dim = (cols.len() - 1) / 2;
        let names: Vec<String> = cols[1..=dim].iter().map(|s| s.to_string()).collect();
        for (k, name) in names.iter().enumerate() {
            let want = format!("d{name}");
            if cols[1 + dim + k] != want {
                return Err(TraceError::Csv {
                    line: 1,
                    message: format!("column {} should be {want}", 2 + dim + k),
                });
            }
        }
        let mut states = Vec::new();
        for (li, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(TraceError::Csv {
                    line: li + 1,
                    message: format!("expected {} fields, got {}", cols.len(), fields.len()),
                });
            }
            let mut vals = Vec::with_capacity(fields.len());
            for f in &fields {
                vals.push(f.parse::<f64>().map_err(|_| TraceError::Csv {
                    line: li + 1,
                    message: format!("invalid number `{f}`"),
                })?);
            }
            states.push(TimedState {
                t: vals[0],
                x: vals[1..=dim].to_vec(),
                xdot: vals[1 + dim..].to_vec(),
            });
        }
        Trace::new(names, states)
    }
}

/// 17 significant digits, enough for an exact f64 round-trip.
fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub reached: bool,
    /// First grid time at which the stability window condition held.
    pub t_reached: Option<f64>,
    /// State at that time (or at the end of the search when not reached).
    pub state: Vec<f64>,
}

/// Tracks the trailing-window condition `max_j |xdot_j| < tol` over grid
/// samples as they arrive.
struct SteadyDetector {
    tol: f64,
    window: f64,
    last_loud: Option<f64>,
}

impl SteadyDetector {
    fn new(tol: f64, window: f64) -> Self {
        SteadyDetector { tol, window, last_loud: None }
    }

    fn push(&mut self, t: f64, xdot: &[f64]) -> bool {
        let quiet = xdot.iter().fold(0.0f64, |m, v| m.max(v.abs())) < self.tol;
        if !quiet {
            self.last_loud = Some(t);
            return false;
        }
        if t < self.window {
            return false;
        }
        match self.last_loud {
            // Quiet from the start counts once a full window has elapsed.
            None => true,
            Some(loud) => loud < t - self.window,
        }
    }
}

/// Simulates on the fixed grid `[0, t_end]`.
pub fn simulate(odes: &OdeSystem, initial: &[f64], opts: &SimOptions) -> Result<Trace, SimError> {
    opts.validate()?;
    let states = run_grid(odes, initial, opts, opts.output_points - 1, None)?.0;
    // Trace validation failing on simulator output would mean the state blew
    // up in a way the step-level checks did not catch.
    Trace::new(odes.species_names().to_vec(), states)
        .map_err(|_| SimError::NonFinite { t: f64::NAN })
}

/// Integrates until the steady-state condition holds, extending past
/// `t_end` up to `t_max_extend` on the same grid spacing. The returned
/// trace covers everything integrated.
pub fn find_steady_state(
    odes: &OdeSystem,
    initial: &[f64],
    opts: &SimOptions,
) -> Result<(Trace, SteadyStateReport), SimError> {
    opts.validate()?;
    let mut max_index = opts.output_points - 1;
    while opts.grid_time(max_index + 1) <= opts.t_max_extend {
        max_index += 1;
    }
    let mut detector = SteadyDetector::new(opts.ss_tol, opts.ss_window);
    let (states, hit) = run_grid(odes, initial, opts, max_index, Some(&mut detector))?;
    let trace = Trace::new(odes.species_names().to_vec(), states)
        .map_err(|_| SimError::NonFinite { t: f64::NAN })?;
    let report = match hit {
        Some(t) => SteadyStateReport {
            reached: true,
            t_reached: Some(t),
            state: trace.last().x.clone(),
        },
        None => SteadyStateReport { reached: false, t_reached: None, state: trace.last().x.clone() },
    };
    Ok((trace, report))
}

/// Applies the steady-state window condition to a finished trace: the first
/// grid time at least a window past the start whose trailing window holds no
/// loud sample. The whole trace is in view, so a burst anywhere pushes
/// detection past it, unlike the online detector used during integration,
/// which cannot see ahead.
pub fn steady_state_from_trace(trace: &Trace, ss_tol: f64, ss_window: f64) -> SteadyStateReport {
    let t_start = trace.states()[0].t;
    let last_loud = trace
        .states()
        .iter()
        .filter(|s| s.xdot.iter().fold(0.0f64, |m, v| m.max(v.abs())) >= ss_tol)
        .map(|s| s.t)
        .next_back();
    for s in trace.states() {
        if s.t - t_start < ss_window {
            continue;
        }
        if last_loud.is_none_or(|loud| loud < s.t - ss_window) {
            return SteadyStateReport { reached: true, t_reached: Some(s.t), state: s.x.clone() };
        }
    }
    SteadyStateReport { reached: false, t_reached: None, state: trace.last().x.clone() }
}

/// First grid time from which `|xdot_j|` of one species stays below `tol`,
/// judged over a trailing window as in [`steady_state_from_trace`] but per
/// species.
pub fn settling_time(trace: &Trace, species: usize, tol: f64, window: f64) -> Option<f64> {
    let t_start = trace.states()[0].t;
    let last_loud = trace
        .states()
        .iter()
        .filter(|s| s.xdot[species].abs() >= tol)
        .map(|s| s.t)
        .next_back();
    trace
        .states()
        .iter()
        .map(|s| s.t)
        .find(|&t| t - t_start >= window && last_loud.is_none_or(|loud| loud < t - window))
}

fn run_grid(
    odes: &OdeSystem,
    initial: &[f64],
    opts: &SimOptions,
    max_index: usize,
    mut detector: Option<&mut SteadyDetector>,
) -> Result<(Vec<TimedState>, Option<f64>), SimError> {
    if initial.len() != odes.dim() {
        return Err(SimError::DimensionMismatch { got: initial.len(), expected: odes.dim() });
    }
    for (i, v) in initial.iter().enumerate() {
        if !v.is_finite() || *v < 0.0 {
            return Err(SimError::BadInitialState { index: i, value: *v });
        }
    }
    let t_final = opts.grid_time(max_index);
    let mut stepper = Dopri5::new(odes, initial.to_vec(), opts.rel_tol, opts.abs_tol, t_final)?;

    let mut states = Vec::with_capacity(max_index + 1);
    let mut xs = vec![0.0; odes.dim()];
    let mut emit = |t: f64, x: &[f64], detector: &mut Option<&mut SteadyDetector>| -> bool {
        let mut x = x.to_vec();
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let mut xdot = vec![0.0; x.len()];
        odes.eval(&x, &mut xdot);
        states.push(TimedState { t, x, xdot });
        let s = states.last().unwrap();
        detector.as_mut().is_some_and(|d| d.push(s.t, &s.xdot))
    };

    if emit(0.0, initial, &mut detector) {
        return Ok((states, Some(0.0)));
    }
    let mut gi = 1;
    while gi <= max_index {
        let reached = stepper.step(t_final)?;
        while gi <= max_index && opts.grid_time(gi) <= reached {
            let tg = opts.grid_time(gi);
            stepper.dense(tg, &mut xs);
            gi += 1;
            if emit(tg, &xs, &mut detector) {
                return Ok((states, Some(tg)));
            }
        }
    }
    Ok((states, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ReactionNetwork;

    fn decay_net() -> ReactionNetwork {
        // A -> B with rate 1: A(t) = e^-t, B(t) = A0 + B0 - A(t).
        ReactionNetwork::parse(
            r#"{
                "species": [{"name": "A", "initial": 1.0}, {"name": "B", "initial": 0.0}],
                "reactions": [{"reactants": [["A", 1]], "products": [["B", 1]], "rate": 1.0}]
            }"#,
        )
        .unwrap()
    }

    fn reversible_net() -> ReactionNetwork {
        ReactionNetwork::parse(
            r#"{
                "species": [{"name": "X", "initial": 10.0}, {"name": "Y", "initial": 0.0}],
                "reactions": [{"reactants": [["X", 1]], "products": [["Y", 1]],
                               "rate": 0.1445, "reverse_rate": 0.37}]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn grid_times_are_exact() {
        let odes = decay_net().derive_odes();
        let opts = SimOptions { t_end: 10.0, output_points: 101, ..SimOptions::for_horizon(10.0) };
        let trace = simulate(&odes, &[1.0, 0.0], &opts).unwrap();
        assert_eq!(trace.len(), 101);
        for (i, s) in trace.states().iter().enumerate() {
            assert_eq!(s.t, 10.0 * (i as f64) / 100.0, "grid point {i}");
        }
        assert_eq!(trace.last().t, 10.0);
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let odes = decay_net().derive_odes();
        let opts = SimOptions::for_horizon(5.0);
        let trace = simulate(&odes, &[1.0, 0.0], &opts).unwrap();
        for s in trace.states() {
            let exact = (-s.t).exp();
            assert!((s.x[0] - exact).abs() < 1e-7, "t={} {} vs {exact}", s.t, s.x[0]);
            assert!((s.x[1] - (1.0 - exact)).abs() < 1e-7);
            assert!((s.xdot[0] + s.x[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn tighter_tolerances_reduce_error() {
        let odes = decay_net().derive_odes();
        let exact = |t: f64| (-t).exp();
        let mut errs = Vec::new();
        for rel in [1e-4, 1e-8] {
            let opts = SimOptions {
                rel_tol: rel,
                abs_tol: rel * 1e-2,
                ..SimOptions::for_horizon(5.0)
            };
            let trace = simulate(&odes, &[1.0, 0.0], &opts).unwrap();
            let err = trace
                .states()
                .iter()
                .fold(0.0f64, |m, s| m.max((s.x[0] - exact(s.t)).abs()));
            errs.push(err);
        }
        assert!(errs[1] < errs[0] / 2.0, "{errs:?}");
    }

    #[test]
    fn conservation_holds_along_trace() {
        let odes = reversible_net().derive_odes();
        let opts = SimOptions::for_horizon(50.0);
        let trace = simulate(&odes, &[10.0, 0.0], &opts).unwrap();
        for s in trace.states() {
            let total = s.x[0] + s.x[1];
            assert!((total - 10.0).abs() <= 1e-6 * 10.0 + 1e-9, "t={}: {total}", s.t);
        }
    }

    #[test]
    fn steady_state_of_reversible_pair() {
        let odes = reversible_net().derive_odes();
        let opts = SimOptions::for_horizon(60.0);
        let (trace, report) = find_steady_state(&odes, &[10.0, 0.0], &opts).unwrap();
        assert!(report.reached);
        let expect = 10.0 * 0.1445 / (0.1445 + 0.37);
        let got = report.state[1];
        assert!((got - expect).abs() <= 1e-3 * expect, "{got} vs {expect}");
        assert!(report.t_reached.unwrap() <= trace.last().t);
        // The window must have elapsed before detection can fire.
        assert!(report.t_reached.unwrap() >= opts.ss_window);
    }

    #[test]
    fn steady_state_search_extends_past_t_end() {
        let odes = reversible_net().derive_odes();
        // Horizon way too short; extension must kick in.
        let opts = SimOptions {
            t_end: 2.0,
            output_points: 21,
            t_max_extend: 200.0,
            ss_window: 1.0,
            ..SimOptions::for_horizon(2.0)
        };
        let (trace, report) = find_steady_state(&odes, &[10.0, 0.0], &opts).unwrap();
        assert!(report.reached);
        assert!(report.t_reached.unwrap() > 2.0);
        assert!(trace.last().t <= 200.0);
    }

    #[test]
    fn steady_state_not_reached_reports_honestly() {
        let odes = reversible_net().derive_odes();
        let opts = SimOptions {
            t_end: 1.0,
            output_points: 11,
            t_max_extend: 2.0,
            ss_window: 0.5,
            ..SimOptions::for_horizon(1.0)
        };
        let (trace, report) = find_steady_state(&odes, &[10.0, 0.0], &opts).unwrap();
        assert!(!report.reached);
        assert_eq!(report.t_reached, None);
        assert_eq!(report.state, trace.last().x);
    }

    #[test]
    fn detection_needs_a_full_quiet_window() {
        // Quiet derivative from the start: earliest detection is at t = window.
        let names = vec!["A".to_string()];
        let states: Vec<TimedState> = (0..11)
            .map(|i| TimedState { t: i as f64, x: vec![1.0], xdot: vec![1e-9] })
            .collect();
        let trace = Trace::new(names.clone(), states).unwrap();
        let report = steady_state_from_trace(&trace, 1e-6, 3.0);
        assert!(report.reached);
        assert_eq!(report.t_reached, Some(3.0));

        // A loud sample at t = 5 pushes detection to after t = 5 + window.
        let states: Vec<TimedState> = (0..11)
            .map(|i| TimedState {
                t: i as f64,
                x: vec![1.0],
                xdot: vec![if i == 5 { 1.0 } else { 1e-9 }],
            })
            .collect();
        let trace = Trace::new(names, states).unwrap();
        let report = steady_state_from_trace(&trace, 1e-6, 3.0);
        assert_eq!(report.t_reached, Some(9.0));
    }

    #[test]
    fn settling_time_is_per_species() {
        let names = vec!["F".to_string(), "S".to_string()];
        let states: Vec<TimedState> = (0..21)
            .map(|i| {
                let t = i as f64;
                TimedState {
                    t,
                    x: vec![0.0, 0.0],
                    xdot: vec![
                        if t < 2.0 { 1.0 } else { 1e-8 },
                        if t < 12.0 { 1.0 } else { 1e-8 },
                    ],
                }
            })
            .collect();
        let trace = Trace::new(names, states).unwrap();
        let f = settling_time(&trace, 0, 1e-6, 3.0).unwrap();
        let s = settling_time(&trace, 1, 1e-6, 3.0).unwrap();
        assert!(f < s, "{f} vs {s}");
        assert_eq!(f, 5.0);
        assert_eq!(s, 15.0);
        assert_eq!(settling_time(&trace, 1, 1e-6, 10.0), None);
    }

    #[test]
    fn negative_initial_state_is_rejected() {
        let odes = decay_net().derive_odes();
        let err = simulate(&odes, &[-0.5, 0.0], &SimOptions::default()).unwrap_err();
        assert!(matches!(err, SimError::BadInitialState { index: 0, .. }));
        let err = simulate(&odes, &[1.0], &SimOptions::default()).unwrap_err();
        assert!(matches!(err, SimError::DimensionMismatch { .. }));
    }

    #[test]
    fn invalid_options_are_rejected_before_integration() {
        let odes = decay_net().derive_odes();
        for opts in [
            SimOptions { t_end: -1.0, ..SimOptions::default() },
            SimOptions { output_points: 1, ..SimOptions::default() },
            SimOptions { rel_tol: 0.0, ..SimOptions::default() },
            SimOptions { t_max_extend: 0.5, ..SimOptions::default() },
        ] {
            let err = simulate(&odes, &[1.0, 0.0], &opts).unwrap_err();
            assert!(matches!(err, SimError::InvalidOptions(_)), "{opts:?}");
        }
    }

    #[test]
    fn states_never_go_negative() {
        // Fast bimolecular consumption drives A toward 0; round-off must not
        // leave negative concentrations in the output.
        let net = ReactionNetwork::parse(
            r#"{
                "species": [{"name": "A", "initial": 1.0}, {"name": "B", "initial": 1.0}],
                "reactions": [{"reactants": [["A", 1], ["B", 1]], "products": [], "rate": 50.0}]
            }"#,
        )
        .unwrap();
        let odes = net.derive_odes();
        let trace = simulate(&odes, &[1.0, 1.0], &SimOptions::for_horizon(20.0)).unwrap();
        for s in trace.states() {
            assert!(s.x.iter().all(|v| *v >= 0.0), "t={}: {:?}", s.t, s.x);
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let odes = reversible_net().derive_odes();
        let opts = SimOptions::for_horizon(40.0);
        let a = simulate(&odes, &[10.0, 0.0], &opts).unwrap();
        let b = simulate(&odes, &[10.0, 0.0], &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let odes = reversible_net().derive_odes();
        let opts = SimOptions { output_points: 41, ..SimOptions::for_horizon(8.0) };
        let trace = simulate(&odes, &[10.0, 0.0], &opts).unwrap();
        let csv = trace.to_csv();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "t,X,Y,dX,dY");
        let back = Trace::from_csv(&csv).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(matches!(Trace::from_csv(""), Err(TraceError::Empty)));
        let bad_header = "time,A,dA\n0,1,0\n";
        assert!(matches!(Trace::from_csv(bad_header), Err(TraceError::Csv { line: 1, .. })));
        let bad_dcol = "t,A,dB\n0,1,0\n";
        assert!(matches!(Trace::from_csv(bad_dcol), Err(TraceError::Csv { line: 1, .. })));
        let bad_field = "t,A,dA\n0,one,0\n";
        assert!(matches!(Trace::from_csv(bad_field), Err(TraceError::Csv { line: 2, .. })));
        let bad_count = "t,A,dA\n0,1\n";
        assert!(matches!(Trace::from_csv(bad_count), Err(TraceError::Csv { line: 2, .. })));
        let bad_time = "t,A,dA\n1,1,0\n1,1,0\n";
        assert!(matches!(Trace::from_csv(bad_time), Err(TraceError::NonIncreasingTime { index: 1 })));
    }

    #[test]
    fn observable_resolution_prefers_exact_names() {
        let names = vec!["A".to_string(), "dA".to_string()];
        assert_eq!(resolve_observable(&names, "A"), Some(Observable::Value(0)));
        // `dA` is a real species here, so it reads as a value.
        assert_eq!(resolve_observable(&names, "dA"), Some(Observable::Value(1)));
        assert_eq!(resolve_observable(&names, "ddA"), Some(Observable::Derivative(1)));
        assert_eq!(resolve_observable(&names, "dB"), None);
        let names = vec!["A".to_string()];
        assert_eq!(resolve_observable(&names, "dA"), Some(Observable::Derivative(0)));
    }
}
