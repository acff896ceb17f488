//! Evaluation of closed formulas over finite traces.
//!
//! A finite trace is read as its infinite stuttering extension: the last
//! state repeats forever. Temporal operators then reduce to backward
//! recursions over the finite index range, with the last index as its own
//! successor.

use thiserror::Error;

use crate::odesim::{resolve_observable, Trace};

use super::ast::{Formula, Threshold};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unknown observable `{0}`")]
    UnknownObservable(String),
    #[error("formula has free variables (e.g. y{0}); evaluation needs a closed formula")]
    FreeVariable(usize),
    #[error("variable y{0} must occur in exactly one atom")]
    VariableCardinality(usize),
}

/// Checks that every atom's observable resolves against `names`.
pub fn validate_observables(f: &Formula, names: &[String]) -> Result<(), EvalError> {
    let mut bad: Option<String> = None;
    f.for_each_atom(&mut |obs, _, _| {
        if bad.is_none() && resolve_observable(names, obs).is_none() {
            bad = Some(obs.to_string());
        }
    });
    match bad {
        Some(name) => Err(EvalError::UnknownObservable(name)),
        None => Ok(()),
    }
}

fn first_free_variable(f: &Formula) -> Option<usize> {
    let mut found: Option<usize> = None;
    f.for_each_atom(&mut |_, _, th| {
        if let Threshold::Var(k) = th {
            found = Some(found.map_or(k, |m| m.min(k)));
        }
    });
    found
}

/// Satisfaction of a closed formula at every index of the trace, as one
/// bitvector per recursion level.
fn sat_vector(trace: &Trace, f: &Formula) -> Result<Vec<bool>, EvalError> {
    let n = trace.len();
    let out = match f {
        Formula::True => vec![true; n],
        Formula::Atom { observable, op, threshold } => {
            let c = match threshold {
                Threshold::Const(c) => *c,
                Threshold::Var(k) => return Err(EvalError::FreeVariable(*k + 1)),
            };
            let obs = trace
                .observable(observable)
                .ok_or_else(|| EvalError::UnknownObservable(observable.clone()))?;
            (0..n).map(|i| op.holds(trace.observe(obs, i), c)).collect()
        }
        Formula::Not(a) => {
            let mut v = sat_vector(trace, a)?;
            v.iter_mut().for_each(|b| *b = !*b);
            v
        }
        Formula::And(a, b) => {
            let va = sat_vector(trace, a)?;
            let vb = sat_vector(trace, b)?;
            va.into_iter().zip(vb).map(|(x, y)| x && y).collect()
        }
        Formula::Or(a, b) => {
            let va = sat_vector(trace, a)?;
            let vb = sat_vector(trace, b)?;
            va.into_iter().zip(vb).map(|(x, y)| x || y).collect()
        }
        Formula::Implies(a, b) => {
            let va = sat_vector(trace, a)?;
            let vb = sat_vector(trace, b)?;
            va.into_iter().zip(vb).map(|(x, y)| !x || y).collect()
        }
        Formula::Next(a) => {
            let v = sat_vector(trace, a)?;
            (0..n).map(|i| v[(i + 1).min(n - 1)]).collect()
        }
        Formula::Finally(a) => {
            let v = sat_vector(trace, a)?;
            let mut out = vec![false; n];
            out[n - 1] = v[n - 1];
            for i in (0..n - 1).rev() {
                out[i] = v[i] || out[i + 1];
            }
            out
        }
        Formula::Globally(a) => {
            let v = sat_vector(trace, a)?;
            let mut out = vec![false; n];
            out[n - 1] = v[n - 1];
            for i in (0..n - 1).rev() {
                out[i] = v[i] && out[i + 1];
            }
            out
        }
        Formula::Until(a, b) => {
            let va = sat_vector(trace, a)?;
            let vb = sat_vector(trace, b)?;
            let mut out = vec![false; n];
            out[n - 1] = vb[n - 1];
            for i in (0..n - 1).rev() {
                out[i] = vb[i] || (va[i] && out[i + 1]);
            }
            out
        }
    };
    Ok(out)
}

/// Evaluates a closed formula at the start of the trace.
pub fn eval_ltl(trace: &Trace, f: &Formula) -> Result<bool, EvalError> {
    if let Some(k) = first_free_variable(f) {
        return Err(EvalError::FreeVariable(k + 1));
    }
    Ok(sat_vector(trace, f)?[0])
}
