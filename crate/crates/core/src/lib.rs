//! Robustness analysis of reaction networks under uncertain initial
//! concentrations.
//!
//! The crate combines four pieces:
//!
//! * [`model`]: mass-action reaction networks with point or interval
//!   initial concentrations, parsed from a JSON document.
//! * [`odesim`]: an adaptive Dormand-Prince 5(4) integrator producing
//!   fixed-grid traces, with steady-state detection.
//! * [`qfltl`]: linear temporal logic over finite traces, plus a
//!   quantitative extension that abstracts numeric constants into variables
//!   and computes the satisfaction domain of a trace as a finite union of
//!   boxes. The distance from a reference valuation to that domain grades
//!   how badly (violation degree) or how snugly (satisfaction degree) the
//!   trace meets the property.
//! * [`robust`] and [`mono`]: Monte-Carlo estimation of the expected
//!   satisfaction degree over an interval marking, and a structural
//!   monotonicity test that certifies when two endpoint simulations bound
//!   the reachable steady-state outputs exactly.

pub mod model;
pub mod mono;
pub mod odesim;
pub mod qfltl;
pub mod robust;

pub use model::{Interval, IntervalMarking, ModelError, ReactionNetwork};
pub use mono::{
    build_r_graph, classify_chain, classify_monotonicity, consistent_labeling,
    endpoint_verification, MonoError, MonotonicityKind, MonotonicityVerdict, RGraph, Sign,
};
pub use odesim::{
    find_steady_state, simulate, SimError, SimOptions, SteadyStateReport, Trace, TraceError,
};
pub use qfltl::{
    abstract_formula, eval_ltl, parse_formula, satisfaction_degree, satisfaction_domain,
    violation_degree, BoxSet, Formula, ParseError, QfltlFormula,
};
pub use robust::{
    check_alpha_robustness, estimate_robustness, AlphaQuery, AlphaReport, AlphaStatus,
    ProbeStrategy, RobustnessError, RobustnessQuery, RobustnessReport,
};
