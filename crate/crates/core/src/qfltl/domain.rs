//! Constant abstraction and satisfaction domains.
//!
//! Abstracting a closed formula replaces each constant occurrence by a fresh
//! variable, numbered left to right, and remembers the original constants as
//! the reference valuation. The satisfaction domain of the abstracted
//! formula over a trace is the set of valuations making it true; how far the
//! reference valuation sits from that set measures how robustly the original
//! formula holds or fails.

use super::ast::{CmpOp, Formula, Threshold};
use super::boxset::BoxSet;
use super::eval::EvalError;
use crate::odesim::Trace;

/// A formula whose atoms compare against the variables `y1..yq`, each used
/// exactly once, together with the reference valuation those variables had
/// before abstraction.
#[derive(Debug, Clone, PartialEq)]
pub struct QfltlFormula {
    formula: Formula,
    reference: Vec<f64>,
}

impl QfltlFormula {
    /// Wraps a hand-built formula. Every variable `y1..y(reference.len())`
    /// must occur in exactly one atom and no atom may use a constant
    /// threshold mixed in; abstraction guarantees this shape.
    pub fn new(formula: Formula, reference: Vec<f64>) -> Result<Self, EvalError> {
        let mut counts = vec![0usize; reference.len()];
        let mut bad: Option<usize> = None;
        formula.for_each_atom(&mut |_, _, th| {
            if let Threshold::Var(k) = th {
                if k < counts.len() {
                    counts[k] += 1;
                } else {
                    bad = Some(k + 1);
                }
            }
        });
        if let Some(k) = bad {
            return Err(EvalError::FreeVariable(k));
        }
        if let Some(k) = counts.iter().position(|&c| c != 1) {
            return Err(EvalError::VariableCardinality(k + 1));
        }
        Ok(QfltlFormula { formula, reference })
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    /// Constants of the original formula, in variable order.
    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    /// Number of variables.
    pub fn arity(&self) -> usize {
        self.reference.len()
    }
}

/// Replaces every constant occurrence in a closed formula by a fresh
/// variable, numbered left to right.
pub fn abstract_formula(f: &Formula) -> Result<QfltlFormula, EvalError> {
    if let Some(k) = first_var(f) {
        return Err(EvalError::FreeVariable(k + 1));
    }
    let mut reference = Vec::new();
    let formula = rewrite(f, &mut reference);
    Ok(QfltlFormula { formula, reference })
}

fn first_var(f: &Formula) -> Option<usize> {
    let mut found = None;
    f.for_each_atom(&mut |_, _, th| {
        if let Threshold::Var(k) = th {
            found = Some(found.map_or(k, |m: usize| m.min(k)));
        }
    });
    found
}

fn rewrite(f: &Formula, reference: &mut Vec<f64>) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::Atom { observable, op, threshold } => {
            let c = match threshold {
                Threshold::Const(c) => *c,
                Threshold::Var(_) => unreachable!("closedness checked by caller"),
            };
            reference.push(c);
            Formula::Atom {
                observable: observable.clone(),
                op: *op,
                threshold: Threshold::Var(reference.len() - 1),
            }
        }
        Formula::Not(a) => Formula::Not(Box::new(rewrite(a, reference))),
        Formula::And(a, b) => {
            let a = Box::new(rewrite(a, reference));
            Formula::And(a, Box::new(rewrite(b, reference)))
        }
        Formula::Or(a, b) => {
            let a = Box::new(rewrite(a, reference));
            Formula::Or(a, Box::new(rewrite(b, reference)))
        }
        Formula::Implies(a, b) => {
            let a = Box::new(rewrite(a, reference));
            Formula::Implies(a, Box::new(rewrite(b, reference)))
        }
        Formula::Next(a) => Formula::Next(Box::new(rewrite(a, reference))),
        Formula::Finally(a) => Formula::Finally(Box::new(rewrite(a, reference))),
        Formula::Globally(a) => Formula::Globally(Box::new(rewrite(a, reference))),
        Formula::Until(a, b) => {
            let a = Box::new(rewrite(a, reference));
            Formula::Until(a, Box::new(rewrite(b, reference)))
        }
    }
}

/// Set of valuations of `y1..yq` under which the trace satisfies the
/// formula, as a finite union of boxes. Mirrors the evaluator's recursions
/// with set operations in place of boolean ones.
pub fn satisfaction_domain(trace: &Trace, qf: &QfltlFormula) -> Result<BoxSet, EvalError> {
    let dim = qf.arity();
    Ok(domains(trace, qf.formula(), dim)?.swap_remove(0))
}

fn domains(trace: &Trace, f: &Formula, dim: usize) -> Result<Vec<BoxSet>, EvalError> {
    let n = trace.len();
    let out = match f {
        Formula::True => vec![BoxSet::universe(dim); n],
        Formula::Atom { observable, op, threshold } => {
            let obs = trace
                .observable(observable)
                .ok_or_else(|| EvalError::UnknownObservable(observable.clone()))?;
            (0..n)
                .map(|i| {
                    let v = trace.observe(obs, i);
                    match threshold {
                        // `v op y`: solve for the variable by flipping the
                        // comparison around.
                        Threshold::Var(k) => {
                            let flipped = match op {
                                CmpOp::Lt => CmpOp::Gt,
                                CmpOp::Le => CmpOp::Ge,
                                CmpOp::Gt => CmpOp::Lt,
                                CmpOp::Ge => CmpOp::Le,
                            };
                            BoxSet::halfspace(dim, *k, flipped, v)
                        }
                        Threshold::Const(c) => {
                            if op.holds(v, *c) {
                                BoxSet::universe(dim)
                            } else {
                                BoxSet::empty(dim)
                            }
                        }
                    }
                })
                .collect()
        }
        Formula::Not(a) => domains(trace, a, dim)?
            .into_iter()
            .map(|d| d.complement())
            .collect(),
        Formula::And(a, b) => {
            let da = domains(trace, a, dim)?;
            let db = domains(trace, b, dim)?;
            da.into_iter().zip(db).map(|(x, y)| x.intersect(&y)).collect()
        }
        Formula::Or(a, b) => {
            let da = domains(trace, a, dim)?;
            let db = domains(trace, b, dim)?;
            da.into_iter().zip(db).map(|(x, y)| x.union(&y)).collect()
        }
        Formula::Implies(a, b) => {
            let da = domains(trace, a, dim)?;
            let db = domains(trace, b, dim)?;
            da.into_iter()
                .zip(db)
                .map(|(x, y)| x.complement().union(&y))
                .collect()
        }
        Formula::Next(a) => {
            let d = domains(trace, a, dim)?;
            (0..n).map(|i| d[(i + 1).min(n - 1)].clone()).collect()
        }
        Formula::Finally(a) => {
            let d = domains(trace, a, dim)?;
            let mut out = vec![BoxSet::empty(dim); n];
            out[n - 1] = d[n - 1].clone();
            for i in (0..n - 1).rev() {
                out[i] = d[i].union(&out[i + 1]);
            }
            out
        }
        Formula::Globally(a) => {
            let d = domains(trace, a, dim)?;
            let mut out = vec![BoxSet::empty(dim); n];
            out[n - 1] = d[n - 1].clone();
            for i in (0..n - 1).rev() {
                out[i] = d[i].intersect(&out[i + 1]);
            }
            out
        }
        Formula::Until(a, b) => {
            let da = domains(trace, a, dim)?;
            let db = domains(trace, b, dim)?;
            let mut out = vec![BoxSet::empty(dim); n];
            out[n - 1] = db[n - 1].clone();
            for i in (0..n - 1).rev() {
                out[i] = db[i].union(&da[i].intersect(&out[i + 1]));
            }
            out
        }
    };
    Ok(out)
}

/// Euclidean distance from the reference valuation to the satisfaction
/// domain of the abstracted formula: 0 when the trace satisfies the closed
/// formula, `f64::INFINITY` when no valuation would satisfy it.
pub fn violation_degree(trace: &Trace, f: &Formula) -> Result<f64, EvalError> {
    let qf = abstract_formula(f)?;
    violation_degree_abstracted(trace, &qf)
}

pub fn violation_degree_abstracted(trace: &Trace, qf: &QfltlFormula) -> Result<f64, EvalError> {
    let domain = satisfaction_domain(trace, qf)?;
    Ok(domain.distance(qf.reference()))
}

/// `1 / (1 + vd)`: 1 on satisfaction, approaching 0 as the violation grows,
/// exactly 0 for an unsatisfiable formula.
pub fn satisfaction_degree(trace: &Trace, f: &Formula) -> Result<f64, EvalError> {
    Ok(1.0 / (1.0 + violation_degree(trace, f)?))
}
