//! Structural monotonicity of steady-state outputs in initial
//! concentrations.
//!
//! The test is purely syntactic. Build the R-graph of the analyzed
//! reactions: a `+` edge joins two reactions when a product of one is a
//! reactant of the other, a `-` edge when they share a reactant or share a
//! product (modifiers play no part). If the reactions can be signed so that
//! `+` edges join equal signs and `-` edges opposite signs, and the input
//! and output species each take part in exactly one reaction, the sign of
//! `Gamma[species][reaction] * sign(reaction)` for input and output decides
//! the direction: opposite products mean the steady-state output is
//! non-decreasing in the initial input concentration, equal products mean
//! non-increasing.
//!
//! A certified monotone output needs only the two endpoint simulations to
//! bound its range over an interval of initial concentrations, which is
//! what [`endpoint_verification`] runs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Interval, ModelError, ReactionNetwork};
use crate::odesim::SimOptions;
use crate::robust::{check_alpha_robustness, AlphaQuery, AlphaReport, ProbeStrategy, RobustnessError};

#[derive(Debug, Error)]
pub enum MonoError {
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("input and output species must differ, got `{0}` twice")]
    SameSpecies(String),
    #[error("chain has no steps")]
    EmptyChain,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Undirected graph over reaction indices with `+` and `-` edges. A pair of
/// reactions may carry both kinds at once; no labeling can then satisfy it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RGraph {
    nodes: usize,
    e_plus: BTreeSet<(usize, usize)>,
    e_minus: BTreeSet<(usize, usize)>,
}

impl RGraph {
    pub fn new(nodes: usize) -> RGraph {
        RGraph { nodes, e_plus: BTreeSet::new(), e_minus: BTreeSet::new() }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn e_plus(&self) -> &BTreeSet<(usize, usize)> {
        &self.e_plus
    }

    pub fn e_minus(&self) -> &BTreeSet<(usize, usize)> {
        &self.e_minus
    }

    pub fn add_plus(&mut self, i: usize, j: usize) {
        assert!(i != j && i < self.nodes && j < self.nodes);
        self.e_plus.insert((i.min(j), i.max(j)));
    }

    pub fn add_minus(&mut self, i: usize, j: usize) {
        assert!(i != j && i < self.nodes && j < self.nodes);
        self.e_minus.insert((i.min(j), i.max(j)));
    }

    /// Checks a full labeling against every edge constraint.
    pub fn is_consistent(&self, labels: &[Sign]) -> bool {
        debug_assert_eq!(labels.len(), self.nodes);
        self.e_plus.iter().all(|&(i, j)| labels[i] == labels[j])
            && self.e_minus.iter().all(|&(i, j)| labels[i] != labels[j])
    }
}

/// Builds the R-graph of the network's reactions.
pub fn build_r_graph(net: &ReactionNetwork) -> RGraph {
    let n = net.n_reactions();
    let mut g = RGraph::new(n);
    let side = |pairs: &[(usize, u32)]| -> BTreeSet<usize> {
        pairs.iter().map(|&(s, _)| s).collect()
    };
    let sides: Vec<(BTreeSet<usize>, BTreeSet<usize>)> = net
        .reactions()
        .iter()
        .map(|r| (side(r.reactants()), side(r.products())))
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let (ri, pi) = &sides[i];
            let (rj, pj) = &sides[j];
            if pi.intersection(rj).next().is_some() || pj.intersection(ri).next().is_some() {
                g.add_plus(i, j);
            }
            if ri.intersection(rj).next().is_some() || pi.intersection(pj).next().is_some() {
                g.add_minus(i, j);
            }
        }
    }
    g
}

/// Signs the reactions so that `+` edges join equal and `-` edges opposite
/// signs, if possible. The first reaction of every connected component gets
/// `+`, making the outcome deterministic; the complement of any component's
/// signs would do equally well.
pub fn consistent_labeling(g: &RGraph) -> Option<Vec<Sign>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Rel {
        Same,
        Opposite,
    }
    let mut adj: Vec<Vec<(usize, Rel)>> = vec![Vec::new(); g.nodes];
    for &(i, j) in &g.e_plus {
        adj[i].push((j, Rel::Same));
        adj[j].push((i, Rel::Same));
    }
    for &(i, j) in &g.e_minus {
        adj[i].push((j, Rel::Opposite));
        adj[j].push((i, Rel::Opposite));
    }
    let mut labels: Vec<Option<Sign>> = vec![None; g.nodes];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..g.nodes {
        if labels[start].is_some() {
            continue;
        }
        labels[start] = Some(Sign::Plus);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let li = labels[i].expect("queued nodes are labeled");
            for &(j, rel) in &adj[i] {
                let want = match rel {
                    Rel::Same => li,
                    Rel::Opposite => li.flipped(),
                };
                match labels[j] {
                    None => {
                        labels[j] = Some(want);
                        queue.push_back(j);
                    }
                    Some(have) if have != want => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(labels.into_iter().map(|l| l.expect("all components visited")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum MonotonicityKind {
    PositivelyMonotonic,
    NegativelyMonotonic,
    Inconclusive(String),
}

impl MonotonicityKind {
    pub fn is_monotonic(&self) -> bool {
        !matches!(self, MonotonicityKind::Inconclusive(_))
    }

    fn direction(&self) -> Option<Sign> {
        match self {
            MonotonicityKind::PositivelyMonotonic => Some(Sign::Plus),
            MonotonicityKind::NegativelyMonotonic => Some(Sign::Minus),
            MonotonicityKind::Inconclusive(_) => None,
        }
    }
}

/// Final sign comparison of the structural test: `input_product` and
/// `output_product` are `Gamma[species][reaction] * sign(reaction)`. The
/// classification only depends on the products' signs, so flipping a
/// witness labeling globally never changes it.
pub fn classification_from_products(input_product: i64, output_product: i64) -> MonotonicityKind {
    if input_product == 0 || output_product == 0 {
        return MonotonicityKind::Inconclusive(
            "a species has zero net stoichiometry in its reaction".into(),
        );
    }
    if (input_product > 0) != (output_product > 0) {
        MonotonicityKind::PositivelyMonotonic
    } else {
        MonotonicityKind::NegativelyMonotonic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    pub kind: MonotonicityKind,
    pub input: String,
    pub output: String,
    /// Reaction names of the analyzed network, aligned with `witness`.
    pub reactions: Vec<String>,
    pub witness: Option<Vec<Sign>>,
    pub input_reaction: Option<String>,
    pub output_reaction: Option<String>,
    pub input_product: Option<i64>,
    pub output_product: Option<i64>,
}

/// Runs the structural test for `output` as a function of the initial
/// concentration of `input` on the given (sub-)network.
pub fn classify_monotonicity(
    net: &ReactionNetwork,
    input: &str,
    output: &str,
) -> Result<MonotonicityVerdict, MonoError> {
    let j_in = net
        .species_index(input)
        .ok_or_else(|| MonoError::UnknownSpecies(input.to_string()))?;
    let j_out = net
        .species_index(output)
        .ok_or_else(|| MonoError::UnknownSpecies(output.to_string()))?;
    if j_in == j_out {
        return Err(MonoError::SameSpecies(input.to_string()));
    }

    let reactions: Vec<String> = net.reactions().iter().map(|r| r.name().to_string()).collect();
    let mut verdict = MonotonicityVerdict {
        kind: MonotonicityKind::Inconclusive(String::new()),
        input: input.to_string(),
        output: output.to_string(),
        reactions,
        witness: None,
        input_reaction: None,
        output_reaction: None,
        input_product: None,
        output_product: None,
    };

    let involving = |species: usize| -> Vec<usize> {
        net.reactions()
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                r.reactants().iter().chain(r.products()).any(|&(s, _)| s == species)
            })
            .map(|(i, _)| i)
            .collect()
    };

    let graph = build_r_graph(net);
    let labeling = consistent_labeling(&graph);
    verdict.witness = labeling.clone();
    let Some(labeling) = labeling else {
        verdict.kind =
            MonotonicityKind::Inconclusive("the R-graph admits no consistent labeling".into());
        return Ok(verdict);
    };

    let r_in = involving(j_in);
    if r_in.len() != 1 {
        verdict.kind = MonotonicityKind::Inconclusive(format!(
            "input species `{input}` takes part in {} reactions, the test needs exactly 1",
            r_in.len()
        ));
        return Ok(verdict);
    }
    let r_out = involving(j_out);
    if r_out.len() != 1 {
        verdict.kind = MonotonicityKind::Inconclusive(format!(
            "output species `{output}` takes part in {} reactions, the test needs exactly 1",
            r_out.len()
        ));
        return Ok(verdict);
    }

    let gamma = net.stoichiometric_matrix();
    let (ri, ro) = (r_in[0], r_out[0]);
    let p_in = gamma.entry(j_in, ri) * labeling[ri].as_i64();
    let p_out = gamma.entry(j_out, ro) * labeling[ro].as_i64();
    verdict.input_reaction = Some(net.reactions()[ri].name().to_string());
    verdict.output_reaction = Some(net.reactions()[ro].name().to_string());
    verdict.input_product = Some(p_in);
    verdict.output_product = Some(p_out);
    verdict.kind = classification_from_products(p_in, p_out);
    Ok(verdict)
}

/// One stage of a cascade: the named reactions form the analyzed
/// sub-network carrying `input` to `output`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub reactions: Vec<String>,
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// Composition of the step directions (sign product); inconclusive as
    /// soon as any step is.
    pub kind: MonotonicityKind,
    pub steps: Vec<MonotonicityVerdict>,
}

/// Classifies each declared stage of a cascade and composes the
/// directions. The steps are taken on trust as a causal decomposition: the
/// tool does not check that consecutive steps connect, because the species
/// carrying the signal into the next stage often enters it as a catalyst
/// rather than a reactant, and whether that coupling preserves the
/// direction is a modeling judgement that stays with the caller.
pub fn classify_chain(net: &ReactionNetwork, steps: &[ChainStep]) -> Result<ChainReport, MonoError> {
    if steps.is_empty() {
        return Err(MonoError::EmptyChain);
    }
    let mut verdicts = Vec::with_capacity(steps.len());
    let mut direction = Sign::Plus;
    let mut blocked: Option<String> = None;
    for (k, step) in steps.iter().enumerate() {
        let names: Vec<&str> = step.reactions.iter().map(String::as_str).collect();
        let sub = net.sub_network(&names)?;
        let verdict = classify_monotonicity(&sub, &step.input, &step.output)?;
        match verdict.kind.direction() {
            Some(sign) => {
                if sign == Sign::Minus {
                    direction = direction.flipped();
                }
            }
            None => {
                if blocked.is_none() {
                    blocked = Some(format!(
                        "step {} ({} -> {}) is inconclusive",
                        k + 1,
                        step.input,
                        step.output
                    ));
                }
            }
        }
        verdicts.push(verdict);
    }
    let kind = match blocked {
        Some(reason) => MonotonicityKind::Inconclusive(reason),
        None => match direction {
            Sign::Plus => MonotonicityKind::PositivelyMonotonic,
            Sign::Minus => MonotonicityKind::NegativelyMonotonic,
        },
    };
    Ok(ChainReport { kind, steps: verdicts })
}

/// Alpha-robustness of a monotone steady-state output over an interval of
/// initial `input` concentrations: two simulations at the interval
/// endpoints bound the output exactly. All other species start from their
/// declared marking; any further non-trivial interval is rejected by the
/// endpoint strategy.
pub fn endpoint_verification(
    net: &ReactionNetwork,
    input: &str,
    input_interval: Interval,
    output: &str,
    alpha: f64,
    sim: &SimOptions,
) -> Result<AlphaReport, RobustnessError> {
    let mut marking = net.interval_marking();
    marking.set_by_name(input, input_interval)?;
    check_alpha_robustness(&AlphaQuery {
        network: net,
        marking,
        output: output.to_string(),
        alpha,
        strategy: ProbeStrategy::MonotoneEndpoints,
        sim: *sim,
    })
}

/// Graphviz rendering of the R-graph: solid edges are `+`, dashed are `-`;
/// node labels carry the witness signs when given.
pub fn r_graph_dot(net: &ReactionNetwork, g: &RGraph, labeling: Option<&[Sign]>) -> String {
    let mut out = String::from("graph r_graph {\n");
    for (i, r) in net.reactions().iter().enumerate() {
        let label = match labeling {
            Some(signs) => format!(
                "{} [{}]",
                r.name(),
                match signs[i] {
                    Sign::Plus => "+",
                    Sign::Minus => "-",
                }
            ),
            None => r.name().to_string(),
        };
        let _ = writeln!(out, "    \"{}\" [label=\"{}\"];", r.name(), label);
    }
    for &(i, j) in g.e_plus() {
        let _ = writeln!(
            out,
            "    \"{}\" -- \"{}\" [label=\"+\", style=solid];",
            net.reactions()[i].name(),
            net.reactions()[j].name()
        );
    }
    for &(i, j) in g.e_minus() {
        let _ = writeln!(
            out,
            "    \"{}\" -- \"{}\" [label=\"-\", style=dashed];",
            net.reactions()[i].name(),
            net.reactions()[j].name()
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mek_fragment() -> ReactionNetwork {
        ReactionNetwork::parse(
            r#"{
                "species": [
                    {"name": "Mek1", "initial": 1.0},
                    {"name": "PMek1", "initial": 0.0},
                    {"name": "PPMek1", "initial": 0.0},
                    {"name": "PRaf", "initial": 1.0}
                ],
                "reactions": [
                    {"name": "R21", "reactants": [["Mek1", 1]], "products": [["PMek1", 1]],
                     "modifiers": ["PRaf"], "rate": 0.02},
                    {"name": "R23", "reactants": [["PMek1", 1]], "products": [["PPMek1", 1]],
                     "rate": 667.957}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn r_graph_links_product_to_reactant_with_plus() {
        let net = mek_fragment();
        let g = build_r_graph(&net);
        assert_eq!(g.nodes(), 2);
        assert!(g.e_plus().contains(&(0, 1)));
        assert!(g.e_minus().is_empty());
    }

    #[test]
    fn modifiers_do_not_create_edges() {
        // Both reactions are catalyzed by E; nothing else is shared.
        let net = ReactionNetwork::parse(
            r#"{
                "species": [
                    {"name": "A", "initial": 1.0}, {"name": "B", "initial": 0.0},
                    {"name": "C", "initial": 1.0}, {"name": "D", "initial": 0.0},
                    {"name": "E", "initial": 1.0}
                ],
                "reactions": [
                    {"reactants": [["A", 1]], "products": [["B", 1]], "modifiers": ["E"], "rate": 1.0},
                    {"reactants": [["C", 1]], "products": [["D", 1]], "modifiers": ["E"], "rate": 1.0}
                ]
            }"#,
        )
        .unwrap();
        let g = build_r_graph(&net);
        assert!(g.e_plus().is_empty());
        assert!(g.e_minus().is_empty());
    }

    #[test]
    fn shared_reactants_and_products_give_minus_edges() {
        let net = ReactionNetwork::parse(
            r#"{
                "species": [
                    {"name": "S", "initial": 1.0}, {"name": "P", "initial": 0.0},
                    {"name": "Q", "initial": 0.0}
                ],
                "reactions": [
                    {"name": "Rp", "reactants": [["S", 1]], "products": [["P", 1]], "rate": 1.0},
                    {"name": "Rq", "reactants": [["S", 1]], "products": [["Q", 1]], "rate": 1.0}
                ]
            }"#,
        )
        .unwrap();
        let g = build_r_graph(&net);
        assert!(g.e_minus().contains(&(0, 1)));
        assert!(g.e_plus().is_empty());
        let labels = consistent_labeling(&g).unwrap();
        assert_ne!(labels[0], labels[1]);
        assert!(g.is_consistent(&labels));
    }

    #[test]
    fn odd_minus_cycles_have_no_labeling() {
        let mut g = RGraph::new(3);
        g.add_minus(0, 1);
        g.add_minus(1, 2);
        g.add_minus(2, 0);
        assert_eq!(consistent_labeling(&g), None);
        // The even cycle is fine.
        let mut g = RGraph::new(4);
        g.add_minus(0, 1);
        g.add_minus(1, 2);
        g.add_minus(2, 3);
        g.add_minus(3, 0);
        let labels = consistent_labeling(&g).unwrap();
        assert!(g.is_consistent(&labels));
    }

    #[test]
    fn conflicting_edge_pair_blocks_labeling() {
        let mut g = RGraph::new(2);
        g.add_plus(0, 1);
        g.add_minus(0, 1);
        assert_eq!(consistent_labeling(&g), None);
    }

    #[test]
    fn component_leaders_are_positive() {
        let mut g = RGraph::new(4);
        g.add_minus(0, 1);
        // Node 2 and 3 form a second component.
        g.add_plus(2, 3);
        let labels = consistent_labeling(&g).unwrap();
        assert_eq!(labels[0], Sign::Plus);
        assert_eq!(labels[1], Sign::Minus);
        assert_eq!(labels[2], Sign::Plus);
        assert_eq!(labels[3], Sign::Plus);
    }

    #[test]
    fn mek_cascade_is_positively_monotonic() {
        let net = mek_fragment();
        let verdict = classify_monotonicity(&net, "Mek1", "PPMek1").unwrap();
        assert_eq!(verdict.kind, MonotonicityKind::PositivelyMonotonic);
        let witness = verdict.witness.unwrap();
        assert_eq!(witness[0], witness[1]);
        assert_eq!(verdict.input_reaction.as_deref(), Some("R21"));
        assert_eq!(verdict.output_reaction.as_deref(), Some("R23"));
        let (p_in, p_out) = (verdict.input_product.unwrap(), verdict.output_product.unwrap());
        assert!(p_in * p_out < 0, "{p_in} vs {p_out}");
    }

    #[test]
    fn reversible_pair_is_inconclusive_for_its_own_species() {
        let net = ReactionNetwork::parse(
            r#"{
                "species": [{"name": "Raf", "initial": 10.0}, {"name": "PRaf", "initial": 0.0}],
                "reactions": [
                    {"name": "R18", "reverse_name": "R19",
                     "reactants": [["Raf", 1]], "products": [["PRaf", 1]],
                     "rate": 0.1445, "reverse_rate": 0.37}
                ]
            }"#,
        )
        .unwrap();
        let verdict = classify_monotonicity(&net, "Raf", "PRaf").unwrap();
        // Raf takes part in both directions, so the single-reaction
        // condition fails even though a labeling exists.
        assert!(matches!(verdict.kind, MonotonicityKind::Inconclusive(_)));
        assert!(verdict.witness.is_some());

        // Restricted to the forward reaction alone the test concludes.
        let sub = net.sub_network(&["R18"]).unwrap();
        let verdict = classify_monotonicity(&sub, "Raf", "PRaf").unwrap();
        assert_eq!(verdict.kind, MonotonicityKind::PositivelyMonotonic);
    }

    #[test]
    fn zero_net_stoichiometry_is_inconclusive() {
        let net = ReactionNetwork::parse(
            r#"{
                "species": [{"name": "X", "initial": 1.0}, {"name": "Y", "initial": 0.0}],
                "reactions": [
                    {"reactants": [["X", 1]], "products": [["X", 1], ["Y", 1]], "rate": 1.0}
                ]
            }"#,
        )
        .unwrap();
        let verdict = classify_monotonicity(&net, "X", "Y").unwrap();
        assert!(matches!(verdict.kind, MonotonicityKind::Inconclusive(_)));
        assert_eq!(verdict.input_product, Some(0));
    }

    #[test]
    fn classification_ignores_global_sign_flips() {
        for (p_in, p_out) in [(1, 1), (1, -1), (-1, 1), (-1, -1), (-2, 3)] {
            assert_eq!(
                classification_from_products(p_in, p_out),
                classification_from_products(-p_in, -p_out)
            );
        }
        assert!(matches!(
            classification_from_products(0, 1),
            MonotonicityKind::Inconclusive(_)
        ));
    }

    #[test]
    fn unknown_or_equal_species_are_rejected() {
        let net = mek_fragment();
        assert!(matches!(
            classify_monotonicity(&net, "Nope", "PPMek1").unwrap_err(),
            MonoError::UnknownSpecies(_)
        ));
        assert!(matches!(
            classify_monotonicity(&net, "Mek1", "Mek1").unwrap_err(),
            MonoError::SameSpecies(_)
        ));
    }

    fn two_stage_net() -> ReactionNetwork {
        ReactionNetwork::parse(
            r#"{
                "species": [
                    {"name": "A", "initial": 1.0}, {"name": "B", "initial": 0.0},
                    {"name": "C", "initial": 0.0}
                ],
                "reactions": [
                    {"name": "Rab", "reactants": [["A", 1]], "products": [["B", 1]], "rate": 1.0},
                    {"name": "Rbc", "reactants": [["B", 1]], "products": [["C", 1]], "rate": 1.0}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn chains_compose_step_directions() {
        let net = two_stage_net();
        let steps = vec![
            ChainStep { reactions: vec!["Rab".into()], input: "A".into(), output: "B".into() },
            ChainStep { reactions: vec!["Rbc".into()], input: "B".into(), output: "C".into() },
        ];
        let report = classify_chain(&net, &steps).unwrap();
        assert_eq!(report.kind, MonotonicityKind::PositivelyMonotonic);
        assert_eq!(report.steps.len(), 2);

        // Negative composed with positive flips the direction: read the
        // first step against the consumed species' co-reactant.
        let net2 = ReactionNetwork::parse(
            r#"{
                "species": [
                    {"name": "A", "initial": 1.0}, {"name": "I", "initial": 1.0},
                    {"name": "B", "initial": 0.0}, {"name": "C", "initial": 0.0}
                ],
                "reactions": [
                    {"name": "R1", "reactants": [["A", 1], ["I", 1]], "products": [["B", 1]], "rate": 1.0},
                    {"name": "R2", "reactants": [["B", 1]], "products": [["C", 1]], "rate": 1.0}
                ]
            }"#,
        )
        .unwrap();
        // A and B sit on the same reaction with opposite roles: positive.
        let v = classify_monotonicity(&net2.sub_network(&["R1"]).unwrap(), "A", "B").unwrap();
        assert_eq!(v.kind, MonotonicityKind::PositivelyMonotonic);
    }

    #[test]
    fn empty_chains_are_rejected_disconnected_steps_are_not() {
        let net = two_stage_net();
        assert!(matches!(classify_chain(&net, &[]).unwrap_err(), MonoError::EmptyChain));
        // Steps whose species do not line up are the caller's business:
        // catalytic couplings never line up literally.
        let steps = [
            ChainStep { reactions: vec!["Rab".into()], input: "A".into(), output: "B".into() },
            ChainStep { reactions: vec!["Rbc".into()], input: "B".into(), output: "C".into() },
        ];
        let swapped = vec![steps[1].clone(), steps[0].clone()];
        assert!(classify_chain(&net, &swapped).is_ok());
    }

    #[test]
    fn inconclusive_step_blocks_the_chain() {
        let net = two_stage_net();
        // Both reactions in one step still concludes for A -> C.
        let steps = vec![ChainStep {
            reactions: vec!["Rab".into(), "Rbc".into()],
            input: "A".into(),
            output: "C".into(),
        }];
        let report = classify_chain(&net, &steps).unwrap();
        assert_eq!(report.kind, MonotonicityKind::PositivelyMonotonic);

        // B takes part in both reactions, so B -> C cannot conclude.
        let steps = vec![ChainStep {
            reactions: vec!["Rab".into(), "Rbc".into()],
            input: "B".into(),
            output: "C".into(),
        }];
        let report = classify_chain(&net, &steps).unwrap();
        assert!(matches!(report.kind, MonotonicityKind::Inconclusive(_)));
    }

    #[test]
    fn endpoint_verification_runs_two_probes() {
        let net = two_stage_net();
        let sim = SimOptions { output_points: 201, ..SimOptions::for_horizon(40.0) };
        let report = endpoint_verification(
            &net,
            "A",
            Interval::new(1.0, 2.0).unwrap(),
            "C",
            1.0 + 1e-5,
            &sim,
        )
        .unwrap();
        assert!(report.exact);
        assert_eq!(report.probes.len(), 2);
        assert!(report.robust);
        assert!(matches!(
            endpoint_verification(
                &net,
                "Missing",
                Interval::new(0.0, 1.0).unwrap(),
                "C",
                1.0,
                &sim
            )
            .unwrap_err(),
            RobustnessError::Model(ModelError::UnknownSpecies(_))
        ));
    }

    #[test]
    fn dot_export_lists_nodes_and_edge_styles() {
        let net = mek_fragment();
        let g = build_r_graph(&net);
        let labels = consistent_labeling(&g).unwrap();
        let dot = r_graph_dot(&net, &g, Some(&labels));
        assert!(dot.starts_with("graph r_graph {"));
        assert!(dot.contains("\"R21\" [label=\"R21 [+]\"];"));
        assert!(dot.contains("\"R21\" -- \"R23\" [label=\"+\", style=solid];"));
        let plain = r_graph_dot(&net, &g, None);
        assert!(plain.contains("\"R23\" [label=\"R23\"];"));
    }

    #[test]
    fn verdict_json_round_trips() {
        let net = mek_fragment();
        let verdict = classify_monotonicity(&net, "Mek1", "PPMek1").unwrap();
        let json = serde_json::to_string(&verdict).unwrap();
        assert!(json.contains("\"verdict\":\"positively_monotonic\""));
        let back: MonotonicityVerdict = serde_json::from_str(&json).unwrap();
        assert_eq!(back, verdict);
    }
}
