//! Shared helpers for the integration tests: bundled model loading, a
//! naive reference reading of the trace semantics and random generators
//! for tiny traces and formulas.

use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crnrobust::model::ReactionNetwork;
use crnrobust::odesim::{TimedState, Trace};
use crnrobust::qfltl::{CmpOp, Formula, Threshold};

pub type TestRng = ChaCha12Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

pub fn load_network(name: &str) -> ReactionNetwork {
    let text = std::fs::read_to_string(bundled(name)).unwrap();
    ReactionNetwork::parse(&text).unwrap()
}

pub fn load_trace(name: &str) -> Trace {
    let text = std::fs::read_to_string(bundled(name)).unwrap();
    Trace::from_csv(&text).unwrap()
}

/// Word-for-word recursive reading of the finite-trace semantics, kept as
/// dumb as possible to serve as an oracle. Exponential on nested temporal
/// operators, which the tiny generated traces keep affordable.
pub fn naive_holds(trace: &Trace, f: &Formula, i: usize) -> bool {
    let n = trace.len();
    match f {
        Formula::True => true,
        Formula::Atom { observable, op, threshold } => {
            let obs = trace.observable(observable).expect("known observable");
            let Threshold::Const(c) = threshold else { panic!("closed formulas only") };
            op.holds(trace.observe(obs, i), *c)
        }
        Formula::Not(g) => !naive_holds(trace, g, i),
        Formula::And(a, b) => naive_holds(trace, a, i) && naive_holds(trace, b, i),
        Formula::Or(a, b) => naive_holds(trace, a, i) || naive_holds(trace, b, i),
        Formula::Implies(a, b) => !naive_holds(trace, a, i) || naive_holds(trace, b, i),
        Formula::Next(g) => naive_holds(trace, g, (i + 1).min(n - 1)),
        Formula::Finally(g) => (i..n).any(|j| naive_holds(trace, g, j)),
        Formula::Globally(g) => (i..n).all(|j| naive_holds(trace, g, j)),
        Formula::Until(a, b) => {
            (i..n).any(|j| naive_holds(trace, b, j) && (i..j).all(|k| naive_holds(trace, a, k)))
        }
    }
}

/// One-species trace of up to 8 states whose values and derivatives come
/// from {0, 1, 2}, the same grid the formula generator draws constants
/// from, so every comparison is decided away from float noise.
pub fn random_trace(rng: &mut TestRng) -> Trace {
    let n = rng.random_range(1..=8);
    let states = (0..n)
        .map(|i| TimedState {
            t: i as f64,
            x: vec![*[0.0, 1.0, 2.0].choose(rng).unwrap()],
            xdot: vec![*[0.0, 1.0, 2.0].choose(rng).unwrap()],
        })
        .collect();
    Trace::new(vec!["A".to_string()], states).unwrap()
}

fn random_atom(rng: &mut TestRng) -> Formula {
    let observable = if rng.random_bool(0.5) { "A" } else { "dA" };
    let op = *[CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge].choose(rng).unwrap();
    let c = *[0.0, 1.0, 2.0].choose(rng).unwrap();
    Formula::atom(observable, op, c)
}

/// Random formula over `[A]` and `[dA]` with at most `depth` nested
/// connectives.
pub fn random_formula(rng: &mut TestRng, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.08) { Formula::True } else { random_atom(rng) };
    }
    let sub = |rng: &mut TestRng| Box::new(random_formula(rng, depth - 1));
    match rng.random_range(0..8) {
        0 => Formula::Not(sub(rng)),
        1 => Formula::And(sub(rng), sub(rng)),
        2 => Formula::Or(sub(rng), sub(rng)),
        3 => Formula::Implies(sub(rng), sub(rng)),
        4 => Formula::Next(sub(rng)),
        5 => Formula::Finally(sub(rng)),
        6 => Formula::Globally(sub(rng)),
        _ => Formula::Until(sub(rng), sub(rng)),
    }
}
