//! End-to-end checks of the guarantees the crate advertises, one criterion
//! per behavior. Every criterion prints a single pass/fail line with its
//! runtime; a criterion also fails by blowing its time budget.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::prelude::*;

use crnrobust::model::Interval;
use crnrobust::mono::{
    classification_from_products, classify_monotonicity, consistent_labeling,
    endpoint_verification, MonotonicityKind, RGraph, Sign,
};
use crnrobust::odesim::{find_steady_state, settling_time, simulate, SimOptions};
use crnrobust::qfltl::{
    abstract_formula, eval_ltl, parse_formula, satisfaction_degree, satisfaction_domain,
    violation_degree,
};
use crnrobust::robust::{
    check_alpha_robustness, estimate_robustness, AlphaQuery, AlphaStatus, ProbeStrategy,
    RobustnessQuery,
};

fn quantitative_degrees_on_bundled_trace() {
    let trace = common::load_trace("demo_trace.csv");
    let phi1 = parse_formula("F([B] > 2 & F([B] < 10))").unwrap();
    let phi2 = parse_formula("F([B] > 12 & F([B] < 3))").unwrap();

    let domain = satisfaction_domain(&trace, &abstract_formula(&phi1).unwrap()).unwrap();
    assert_eq!(domain.to_string(), "{y1 <= 10 & y2 >= 2}");

    assert_eq!(violation_degree(&trace, &phi1).unwrap(), 0.0);
    assert_eq!(satisfaction_degree(&trace, &phi1).unwrap(), 1.0);
    assert_eq!(violation_degree(&trace, &phi2).unwrap(), 2.0);
    assert_eq!(satisfaction_degree(&trace, &phi2).unwrap(), 1.0 / 3.0);
}

fn reversible_pair_reaches_analytic_equilibrium() {
    let net = common::load_network("raf_praf.json");
    let opts = SimOptions::for_horizon(60.0);
    let (_, report) = find_steady_state(&net.derive_odes(), &net.initial_state(), &opts).unwrap();
    assert!(report.reached);
    let praf = report.state[net.species_index("PRaf").unwrap()];
    // Mass conservation solves the pair in closed form.
    let expected = 10.0 * 0.1445 / (0.1445 + 0.37);
    let rel = ((praf - expected) / expected).abs();
    assert!(rel < 1e-3, "PRaf {praf} vs analytic {expected}, rel err {rel:.2e}");
}

fn catalyzed_chain_classifies_positively_monotonic() {
    let erk = common::load_network("erk.json");
    let sub = erk.sub_network(&["R21", "R23"]).unwrap();
    let verdict = classify_monotonicity(&sub, "Mek1", "PPMek1").unwrap();
    assert_eq!(verdict.kind, MonotonicityKind::PositivelyMonotonic);
    let witness = verdict.witness.expect("labeling exists");
    assert_eq!(witness[0], witness[1], "both reactions carry the same sign");
    let p_in = verdict.input_product.unwrap();
    let p_out = verdict.output_product.unwrap();
    assert!(p_in * p_out < 0, "products {p_in} and {p_out} must have opposite signs");
}

fn erk_sim_options() -> SimOptions {
    SimOptions {
        t_end: 300.0,
        output_points: 1201,
        ss_window: 15.0,
        t_max_extend: 3000.0,
        ..SimOptions::for_horizon(300.0)
    }
}

fn endpoint_shortcut_agrees_with_grid_sweep() {
    let erk = common::load_network("erk.json");
    let sim = erk_sim_options();
    let interval = Interval::new(1.0, 100.0).unwrap();

    let probe = endpoint_verification(&erk, "Raf", interval, "PPMek1", 1.0, &sim).unwrap();
    assert_eq!(probe.status, AlphaStatus::Ok);
    let spread = probe.spread.unwrap();
    // The output moves with the input, however slightly: no absolute
    // robustness here.
    assert!(spread > 0.0);

    for alpha in [0.1 * spread, 2.0 * spread] {
        let endpoints =
            endpoint_verification(&erk, "Raf", interval, "PPMek1", alpha, &sim).unwrap();
        let grid = check_alpha_robustness(&AlphaQuery {
            network: &erk,
            marking: erk.interval_marking(),
            output: "PPMek1".into(),
            alpha,
            strategy: ProbeStrategy::Grid(20),
            sim,
        })
        .unwrap();
        assert_eq!(endpoints.robust, grid.robust, "verdicts at alpha {alpha}");
        assert_eq!(grid.robust, alpha >= spread);
        assert!(endpoints.exact && !grid.exact);
        assert_eq!(endpoints.probes.len(), 2);
        assert_eq!(grid.probes.len(), 20);

        let lo = endpoints.observed_min.unwrap();
        let hi = endpoints.observed_max.unwrap();
        for p in &grid.probes {
            let eps = 1e-6 * (1.0 + p.output.abs());
            assert!(
                p.output >= lo - eps && p.output <= hi + eps,
                "grid output {} escapes the endpoint envelope [{lo}, {hi}]",
                p.output
            );
        }
    }
}

fn upstream_stage_settles_first() {
    let erk = common::load_network("erk.json");
    let sim = erk_sim_options();
    let (trace, report) =
        find_steady_state(&erk.derive_odes(), &erk.initial_state(), &sim).unwrap();
    assert!(report.reached);
    let praf = settling_time(
        &trace,
        erk.species_index("PRaf").unwrap(),
        sim.ss_tol,
        sim.ss_window,
    )
    .expect("PRaf settles");
    let ppmek = settling_time(
        &trace,
        erk.species_index("PPMek1").unwrap(),
        sim.ss_tol,
        sim.ss_window,
    )
    .expect("PPMek1 settles");
    assert!(praf < ppmek, "PRaf settles at {praf}, PPMek1 at {ppmek}");
}

fn monitor_matches_naive_semantics() {
    let mut rng = common::rng(0xacec6);

    for case in 0..1200 {
        let trace = common::random_trace(&mut rng);
        let formula = common::random_formula(&mut rng, 4);
        let got = eval_ltl(&trace, &formula).unwrap();
        let want = common::naive_holds(&trace, &formula, 0);
        assert_eq!(got, want, "case {case}: {formula} on {} states", trace.len());
    }

    // Domain membership against substituted evaluation. Thresholds come
    // from a grid offset from every value a trace can take, so no sampled
    // point sits on a domain boundary.
    let mut points = 0usize;
    while points < 1200 {
        let trace = common::random_trace(&mut rng);
        let formula = common::random_formula(&mut rng, 3);
        let qf = abstract_formula(&formula).unwrap();
        if qf.arity() == 0 {
            continue;
        }
        let domain = satisfaction_domain(&trace, &qf).unwrap();
        for _ in 0..4 {
            let y: Vec<f64> = (0..qf.arity())
                .map(|_| *[-0.5, 0.5, 1.5, 2.5].choose(&mut rng).unwrap())
                .collect();
            let substituted = qf.formula().substitute(&y);
            let want = common::naive_holds(&trace, &substituted, 0);
            assert_eq!(
                domain.contains(&y),
                want,
                "membership of {y:?} in the domain of {formula}"
            );
            points += 1;
        }
    }
}

fn estimator_contracts_hold_exactly() {
    let net = common::load_network("ab.json");
    let sim = SimOptions::for_horizon(20.0);

    // A property no trace can violate must average to exactly 1.
    let tautology = parse_formula("G([B] >= 0)").unwrap();
    let report = estimate_robustness(&RobustnessQuery {
        network: &net,
        marking: net.interval_marking(),
        formula: tautology,
        samples: 64,
        seed: 7,
        sim,
        record_samples: false,
    })
    .unwrap();
    assert_eq!(report.estimate, 1.0);
    assert_eq!(report.samples_used, 64);
    assert_eq!(report.samples_failed, 0);

    // All intervals pinned: one simulation, and the estimate is that
    // trace's satisfaction degree, not an average of repeats of it.
    let window = parse_formula("F(G([B] >= 1.2 & [B] <= 1.8))").unwrap();
    let mut pinned = net.interval_marking();
    pinned.set(0, Interval::point(1.5).unwrap());
    let report = estimate_robustness(&RobustnessQuery {
        network: &net,
        marking: pinned,
        formula: window.clone(),
        samples: 50,
        seed: 7,
        sim,
        record_samples: false,
    })
    .unwrap();
    assert_eq!(report.samples_used, 1);
    let trace = simulate(&net.derive_odes(), &[1.5, 0.0], &sim).unwrap();
    assert_eq!(report.estimate, satisfaction_degree(&trace, &window).unwrap());

    // Same seed, same bits.
    let query = || RobustnessQuery {
        network: &net,
        marking: net.interval_marking(),
        formula: window.clone(),
        samples: 40,
        seed: 99,
        sim,
        record_samples: true,
    };
    let a = estimate_robustness(&query()).unwrap();
    let b = estimate_robustness(&query()).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    // The check would be vacuous on a degenerate estimate.
    assert!(a.estimate > 0.0 && a.estimate < 1.0, "estimate {}", a.estimate);
    assert!(a.std_error > 0.0);
}

fn labeling_search_matches_brute_force() {
    let mut rng = common::rng(0xacec8);
    for case in 0..100 {
        let n = rng.random_range(1..=12);
        let mut g = RGraph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(0.18) {
                    g.add_plus(i, j);
                }
                if rng.random_bool(0.18) {
                    g.add_minus(i, j);
                }
            }
        }
        let found = consistent_labeling(&g);
        let exists = (0..1u32 << n).any(|mask| {
            let labels: Vec<Sign> = (0..n)
                .map(|i| if mask >> i & 1 == 0 { Sign::Plus } else { Sign::Minus })
                .collect();
            g.is_consistent(&labels)
        });
        assert_eq!(found.is_some(), exists, "case {case}, {n} nodes");
        if let Some(labels) = found {
            assert!(g.is_consistent(&labels), "case {case}: witness must satisfy the graph");
            let flipped: Vec<Sign> = labels.iter().map(|s| s.flipped()).collect();
            assert!(g.is_consistent(&flipped), "case {case}: flipped witness too");
        }
    }

    // Flipping the witness flips both stoichiometric products, which the
    // classification ignores.
    let erk = common::load_network("erk.json");
    let sub = erk.sub_network(&["R21", "R23"]).unwrap();
    let verdict = classify_monotonicity(&sub, "Mek1", "PPMek1").unwrap();
    let p_in = verdict.input_product.unwrap();
    let p_out = verdict.output_product.unwrap();
    assert_eq!(classification_from_products(p_in, p_out), verdict.kind);
    assert_eq!(classification_from_products(-p_in, -p_out), verdict.kind);
}

struct Criterion {
    label: &'static str,
    budget_s: f64,
    run: fn(),
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic with non-string payload".to_string()
    }
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion {
            label: "quantitative degrees on the bundled trace",
            budget_s: 1.0,
            run: quantitative_degrees_on_bundled_trace,
        },
        Criterion {
            label: "reversible pair reaches the analytic equilibrium",
            budget_s: 1.0,
            run: reversible_pair_reaches_analytic_equilibrium,
        },
        Criterion {
            label: "catalyzed chain classifies as positively monotonic",
            budget_s: 1.0,
            run: catalyzed_chain_classifies_positively_monotonic,
        },
        Criterion {
            label: "endpoint shortcut agrees with the grid sweep",
            budget_s: 60.0,
            run: endpoint_shortcut_agrees_with_grid_sweep,
        },
        Criterion {
            label: "upstream stage settles first",
            budget_s: 5.0,
            run: upstream_stage_settles_first,
        },
        Criterion {
            label: "monitor matches the naive semantics",
            budget_s: 30.0,
            run: monitor_matches_naive_semantics,
        },
        Criterion {
            label: "estimator contracts hold exactly",
            budget_s: 30.0,
            run: estimator_contracts_hold_exactly,
        },
        Criterion {
            label: "labeling search matches brute force",
            budget_s: 10.0,
            run: labeling_search_matches_brute_force,
        },
    ];

    // The per-criterion lines below are the report; silence the default
    // panic printer while criteria run.
    let default_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run));
        let dt = start.elapsed().as_secs_f64();
        let mut problems = Vec::new();
        if let Err(payload) = outcome {
            problems.push(panic_message(payload));
        }
        if dt > c.budget_s {
            problems.push(format!("took {dt:.2} s, budget {} s", c.budget_s));
        }
        let verdict = if problems.is_empty() { "pass" } else { "FAIL" };
        // Written straight to stderr, one block per criterion, so the test
        // harness cannot capture the report away.
        let mut block =
            format!("criterion {}: {} ... {verdict} ({dt:.2} s)\n", i + 1, c.label);
        for p in &problems {
            block.push_str("    ");
            block.push_str(p);
            block.push('\n');
        }
        let _ = std::io::stderr().write_all(block.as_bytes());
        if !problems.is_empty() {
            failed.push(i + 1);
        }
    }
    std::panic::set_hook(default_hook);
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
