//! Temporal logic over finite numerical traces.
//!
//! The module covers the whole monitoring pipeline: parsing formulas,
//! evaluating closed formulas over traces, abstracting constants into
//! variables, computing satisfaction domains in variable space, and turning
//! the distance between a domain and the original constants into violation
//! and satisfaction degrees.

mod ast;
mod boxset;
mod domain;
mod eval;
mod parse;

pub use ast::{CmpOp, Formula, Threshold};
pub use boxset::{BoxRegion, BoxSet, CoordRange};
pub use domain::{
    abstract_formula, satisfaction_degree, satisfaction_domain, violation_degree,
    violation_degree_abstracted, QfltlFormula,
};
pub use eval::{eval_ltl, validate_observables, EvalError};
pub use parse::{parse_formula, ParseError};
