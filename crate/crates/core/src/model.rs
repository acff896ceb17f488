//! Reaction network model: species, mass-action reactions, interval markings.
//!
//! Networks are loaded from a JSON document (see [`ModelDocument`]) and
//! canonicalized on construction: a reversible declaration (`reverse_rate`)
//! becomes two irreversible reactions, so everything downstream only ever
//! sees irreversible mass-action reactions.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed model document: {0}")]
    Syntax(String),
    #[error("model declares no species")]
    NoSpecies,
    #[error("duplicate species name `{0}`")]
    DuplicateSpecies(String),
    #[error("invalid species name `{0}` (expected an identifier: letters, digits, `_`)")]
    BadSpeciesName(String),
    #[error("species `{name}`: initial concentration must be finite and nonnegative, got {value}")]
    BadInitial { name: String, value: f64 },
    #[error("species `{name}`: invalid interval [{lo}, {hi}] (need 0 <= lo <= hi)")]
    BadInterval { name: String, lo: f64, hi: f64 },
    #[error("reaction {reaction}: rate constant must be finite and nonnegative, got {value}")]
    BadRate { reaction: String, value: f64 },
    #[error("reaction {reaction}: undeclared species `{name}`")]
    UndeclaredSpecies { reaction: String, name: String },
    #[error("reaction {reaction}: species `{name}` listed twice on the same side")]
    RepeatedSpecies { reaction: String, name: String },
    #[error("reaction {reaction}: stoichiometric coefficient for `{name}` must be at least 1")]
    ZeroCoefficient { reaction: String, name: String },
    #[error("reaction {reaction}: modifier `{name}` is also a reactant or product")]
    ModifierOverlap { reaction: String, name: String },
    #[error("reaction {reaction}: no reactants and no products")]
    EmptyReaction { reaction: String },
    #[error("duplicate reaction name `{0}`")]
    DuplicateReaction(String),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("unknown reaction `{0}`")]
    UnknownReaction(String),
    #[error("species `{name}`: interval is unbounded, sampling needs finite bounds")]
    UnboundedInterval { name: String },
}

/// Closed interval of admissible initial concentrations. The upper bound may
/// be `f64::INFINITY`; such intervals can be stored but not sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ModelError> {
        if !lo.is_finite() || hi.is_nan() || lo < 0.0 || hi < lo {
            return Err(ModelError::BadInterval { name: String::new(), lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval pinning a single value.
    pub fn point(v: f64) -> Result<Self, ModelError> {
        Interval::new(v, v)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// True when the interval holds exactly one value.
    pub fn is_trivial(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

// In documents an interval is a two-element array `[lo, hi]`; `hi` may be
// `null` for an unbounded interval.
impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.lo)?;
        if self.hi.is_finite() {
            seq.serialize_element(&self.hi)?;
        } else {
            seq.serialize_element(&Option::<f64>::None)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct IvVisitor;
        impl<'de> Visitor<'de> for IvVisitor {
            type Value = Interval;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array [lo, hi] with hi a number or null")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Interval, A::Error> {
                let lo: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let hi: Option<f64> = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<serde::de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                let hi = hi.unwrap_or(f64::INFINITY);
                Interval::new(lo, hi).map_err(|_| {
                    de::Error::custom(format!("invalid interval [{lo}, {hi}]"))
                })
            }
        }
        d.deserialize_seq(IvVisitor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    name: String,
    initial: f64,
    interval: Option<Interval>,
}

impl Species {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn interval(&self) -> Option<Interval> {
        self.interval
    }
}

/// Irreversible mass-action reaction. Species are referred to by index into
/// the owning network's species list. Modifiers enter the rate law with
/// exponent 1 but are not consumed or produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    name: String,
    reactants: Vec<(usize, u32)>,
    products: Vec<(usize, u32)>,
    modifiers: Vec<usize>,
    rate: f64,
}

impl Reaction {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn reactants(&self) -> &[(usize, u32)] {
        &self.reactants
    }

    pub fn products(&self) -> &[(usize, u32)] {
        &self.products
    }

    pub fn modifiers(&self) -> &[usize] {
        &self.modifiers
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Net stoichiometry of `species` in this reaction (products minus
    /// reactants; modifiers contribute nothing).
    pub fn net_stoichiometry(&self, species: usize) -> i64 {
        let mut net = 0i64;
        for &(j, c) in &self.products {
            if j == species {
                net += c as i64;
            }
        }
        for &(j, c) in &self.reactants {
            if j == species {
                net -= c as i64;
            }
        }
        net
    }

    /// Mass-action flux at state `x`.
    pub fn flux(&self, x: &[f64]) -> f64 {
        let mut v = self.rate;
        for &(j, c) in &self.reactants {
            v *= x[j].powi(c as i32);
        }
        for &j in &self.modifiers {
            v *= x[j];
        }
        v
    }
}

/// Species-by-reactions matrix of net stoichiometries.
#[derive(Debug, Clone, PartialEq)]
pub struct StoichiometricMatrix {
    n_species: usize,
    n_reactions: usize,
    // row-major: entries[species * n_reactions + reaction]
    entries: Vec<i64>,
}

impl StoichiometricMatrix {
    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn n_reactions(&self) -> usize {
        self.n_reactions
    }

    pub fn entry(&self, species: usize, reaction: usize) -> i64 {
        self.entries[species * self.n_reactions + reaction]
    }

    pub fn row(&self, species: usize) -> &[i64] {
        let start = species * self.n_reactions;
        &self.entries[start..start + self.n_reactions]
    }
}

/// One signed mass-action term of a species balance. `factor` folds together
/// the net stoichiometry and the rate constant; `powers` lists the state
/// variables of the rate law (reactants with their coefficients, modifiers
/// with exponent 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub factor: f64,
    pub powers: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.factor;
        for &(j, c) in &self.powers {
            v *= x[j].powi(c as i32);
        }
        v
    }
}

/// Polynomial right-hand side of the mass-action ODE system, one list of
/// monomials per species.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSystem {
    species_names: Vec<String>,
    terms: Vec<Vec<Monomial>>,
}

impl OdeSystem {
    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn species_names(&self) -> &[String] {
        &self.species_names
    }

    pub fn terms(&self, species: usize) -> &[Monomial] {
        &self.terms[species]
    }

    /// Writes dx/dt at state `x` into `xdot`.
    pub fn eval(&self, x: &[f64], xdot: &mut [f64]) {
        debug_assert_eq!(x.len(), self.terms.len());
        debug_assert_eq!(xdot.len(), self.terms.len());
        for (j, terms) in self.terms.iter().enumerate() {
            let mut acc = 0.0;
            for m in terms {
                acc += m.eval(x);
            }
            xdot[j] = acc;
        }
    }

    pub fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut xdot = vec![0.0; self.dim()];
        self.eval(x, &mut xdot);
        xdot
    }
}

/// Admissible set of initial states: one concentration interval per species,
/// in species order. Species without a declared interval get the trivial
/// interval pinned at their declared initial concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMarking {
    names: Vec<String>,
    intervals: Vec<Interval>,
}

impl IntervalMarking {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval(&self, species: usize) -> Interval {
        self.intervals[species]
    }

    pub fn set(&mut self, species: usize, iv: Interval) {
        self.intervals[species] = iv;
    }

    pub fn set_by_name(&mut self, name: &str, iv: Interval) -> Result<(), ModelError> {
        match self.names.iter().position(|n| n == name) {
            Some(j) => {
                self.intervals[j] = iv;
                Ok(())
            }
            None => Err(ModelError::UnknownSpecies(name.to_string())),
        }
    }

    pub fn all_trivial(&self) -> bool {
        self.intervals.iter().all(Interval::is_trivial)
    }

    /// Indices of species whose interval spans more than one value.
    pub fn free_species(&self) -> Vec<usize> {
        (0..self.intervals.len())
            .filter(|&j| !self.intervals[j].is_trivial())
            .collect()
    }

    pub fn ensure_bounded(&self) -> Result<(), ModelError> {
        for (j, iv) in self.intervals.iter().enumerate() {
            if !iv.is_bounded() {
                return Err(ModelError::UnboundedInterval { name: self.names[j].clone() });
            }
        }
        Ok(())
    }

    pub fn lower_state(&self) -> Vec<f64> {
        self.intervals.iter().map(Interval::lo).collect()
    }

    pub fn upper_state(&self) -> Vec<f64> {
        self.intervals.iter().map(Interval::hi).collect()
    }
}

/// Draws one initial state uniformly from the marking. Every species
/// consumes exactly one draw whether or not its interval is trivial, so
/// pinning one species to a point never shifts the values drawn for the
/// others under the same seed.
pub fn sample_marking(marking: &IntervalMarking, seed: u64) -> Result<Vec<f64>, ModelError> {
    marking.ensure_bounded()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut state = Vec::with_capacity(marking.len());
    for iv in marking.intervals() {
        let u: f64 = rng.random();
        state.push(iv.lo() + u * (iv.hi() - iv.lo()));
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    /// Parses a JSON model document and canonicalizes it.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
        Self::from_document(&doc)
    }

    /// Validates a document and builds the canonical network: reversible
    /// declarations are split into a forward and a reverse irreversible
    /// reaction (reverse directly after its forward), and unnamed reactions
    /// are assigned `R<position>` names by canonical 1-based position.
    pub fn from_document(doc: &ModelDocument) -> Result<Self, ModelError> {
        if doc.species.is_empty() {
            return Err(ModelError::NoSpecies);
        }
        let mut species = Vec::with_capacity(doc.species.len());
        for sp in &doc.species {
            if !is_identifier(&sp.name) {
                return Err(ModelError::BadSpeciesName(sp.name.clone()));
            }
            if species.iter().any(|s: &Species| s.name == sp.name) {
                return Err(ModelError::DuplicateSpecies(sp.name.clone()));
            }
            if !sp.initial.is_finite() || sp.initial < 0.0 {
                return Err(ModelError::BadInitial { name: sp.name.clone(), value: sp.initial });
            }
            if let Some(iv) = sp.interval {
                // Interval deserialization already checked the bounds, but
                // documents can also be built programmatically.
                Interval::new(iv.lo(), iv.hi()).map_err(|_| ModelError::BadInterval {
                    name: sp.name.clone(),
                    lo: iv.lo(),
                    hi: iv.hi(),
                })?;
            }
            species.push(Species {
                name: sp.name.clone(),
                initial: sp.initial,
                interval: sp.interval,
            });
        }

        let lookup = |reaction: &str, name: &str| -> Result<usize, ModelError> {
            species
                .iter()
                .position(|s| s.name == name)
                .ok_or_else(|| ModelError::UndeclaredSpecies {
                    reaction: reaction.to_string(),
                    name: name.to_string(),
                })
        };

        struct Pending {
            name: Option<String>,
            reactants: Vec<(usize, u32)>,
            products: Vec<(usize, u32)>,
            modifiers: Vec<usize>,
            rate: f64,
        }

        // First pass: expand declarations into canonical reactions, names
        // still optional.
        let mut pending: Vec<Pending> = Vec::new();
        for (di, rd) in doc.reactions.iter().enumerate() {
            let label = rd
                .name
                .clone()
                .unwrap_or_else(|| format!("#{} (declaration {})", di + 1, di + 1));
            let side = |pairs: &[(String, u32)]| -> Result<Vec<(usize, u32)>, ModelError> {
                let mut out: Vec<(usize, u32)> = Vec::with_capacity(pairs.len());
                for (name, coeff) in pairs {
                    let j = lookup(&label, name)?;
                    if out.iter().any(|&(k, _)| k == j) {
                        return Err(ModelError::RepeatedSpecies {
                            reaction: label.clone(),
                            name: name.clone(),
                        });
                    }
                    if *coeff == 0 {
                        return Err(ModelError::ZeroCoefficient {
                            reaction: label.clone(),
                            name: name.clone(),
                        });
                    }
                    out.push((j, *coeff));
                }
                Ok(out)
            };
            let reactants = side(&rd.reactants)?;
            let products = side(&rd.products)?;
            if reactants.is_empty() && products.is_empty() {
                return Err(ModelError::EmptyReaction { reaction: label.clone() });
            }
            let mut modifiers = Vec::with_capacity(rd.modifiers.len());
            for name in &rd.modifiers {
                let j = lookup(&label, name)?;
                if reactants.iter().chain(&products).any(|&(k, _)| k == j)
                    || modifiers.contains(&j)
                {
                    return Err(ModelError::ModifierOverlap {
                        reaction: label.clone(),
                        name: name.clone(),
                    });
                }
                modifiers.push(j);
            }
            if !rd.rate.is_finite() || rd.rate < 0.0 {
                return Err(ModelError::BadRate { reaction: label, value: rd.rate });
            }
            pending.push(Pending {
                name: rd.name.clone(),
                reactants: reactants.clone(),
                products: products.clone(),
                modifiers,
                rate: rd.rate,
            });
            if let Some(krev) = rd.reverse_rate {
                let rev_label = rd
                    .reverse_name
                    .clone()
                    .unwrap_or_else(|| format!("#{} (reverse of declaration {})", di + 1, di + 1));
                if !krev.is_finite() || krev < 0.0 {
                    return Err(ModelError::BadRate { reaction: rev_label, value: krev });
                }
                // The declared modifiers belong to the forward rate law only;
                // a catalyzed reverse direction must be declared separately.
                pending.push(Pending {
                    name: rd.reverse_name.clone(),
                    reactants: products,
                    products: reactants,
                    modifiers: Vec::new(),
                    rate: krev,
                });
            } else if rd.reverse_name.is_some() {
                return Err(ModelError::Syntax(format!(
                    "reaction declaration {}: reverse_name without reverse_rate",
                    di + 1
                )));
            }
        }

        let mut used: HashSet<String> = HashSet::new();
        for name in pending.iter().filter_map(|p| p.name.as_ref()) {
            if !used.insert(name.clone()) {
                return Err(ModelError::DuplicateReaction(name.clone()));
            }
        }
        let mut reactions = Vec::with_capacity(pending.len());
        for (i, Pending { name, reactants, products, modifiers, rate }) in
            pending.into_iter().enumerate()
        {
            let name = match name {
                Some(n) => n,
                None => {
                    let auto = format!("R{}", i + 1);
                    if !used.insert(auto.clone()) {
                        return Err(ModelError::DuplicateReaction(auto));
                    }
                    auto
                }
            };
            reactions.push(Reaction { name, reactants, products, modifiers, rate });
        }

        Ok(ReactionNetwork { species, reactions })
    }

    /// Canonical document for this network; parsing it back yields an equal
    /// network.
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            species: self
                .species
                .iter()
                .map(|s| SpeciesDoc {
                    name: s.name.clone(),
                    initial: s.initial,
                    interval: s.interval,
                })
                .collect(),
            reactions: self
                .reactions
                .iter()
                .map(|r| ReactionDoc {
                    name: Some(r.name.clone()),
                    reactants: r.reactants.iter().map(|&(j, c)| (self.species[j].name.clone(), c)).collect(),
                    products: r.products.iter().map(|&(j, c)| (self.species[j].name.clone(), c)).collect(),
                    modifiers: r.modifiers.iter().map(|&j| self.species[j].name.clone()).collect(),
                    rate: r.rate,
                    reverse_rate: None,
                    reverse_name: None,
                })
                .collect(),
        }
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name.clone()).collect()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn reaction_index(&self, name: &str) -> Option<usize> {
        self.reactions.iter().position(|r| r.name == name)
    }

    /// Declared initial state, in species order.
    pub fn initial_state(&self) -> Vec<f64> {
        self.species.iter().map(|s| s.initial).collect()
    }

    pub fn stoichiometric_matrix(&self) -> StoichiometricMatrix {
        let n_species = self.species.len();
        let n_reactions = self.reactions.len();
        let mut entries = vec![0i64; n_species * n_reactions];
        for (i, r) in self.reactions.iter().enumerate() {
            for &(j, c) in &r.products {
                entries[j * n_reactions + i] += c as i64;
            }
            for &(j, c) in &r.reactants {
                entries[j * n_reactions + i] -= c as i64;
            }
        }
        StoichiometricMatrix { n_species, n_reactions, entries }
    }

    /// Mass-action fluxes of all reactions at state `x`.
    pub fn fluxes(&self, x: &[f64]) -> Vec<f64> {
        self.reactions.iter().map(|r| r.flux(x)).collect()
    }

    /// Builds the polynomial ODE right-hand side dx/dt = Gamma * v(x).
    pub fn derive_odes(&self) -> OdeSystem {
        let mut terms: Vec<Vec<Monomial>> = vec![Vec::new(); self.species.len()];
        for r in &self.reactions {
            let mut powers: Vec<(usize, u32)> = r.reactants.clone();
            for &j in &r.modifiers {
                powers.push((j, 1));
            }
            let mut touched: Vec<usize> = r
                .reactants
                .iter()
                .chain(&r.products)
                .map(|&(j, _)| j)
                .collect();
            touched.sort_unstable();
            touched.dedup();
            for j in touched {
                let net = r.net_stoichiometry(j);
                if net != 0 {
                    terms[j].push(Monomial {
                        factor: net as f64 * r.rate,
                        powers: powers.clone(),
                    });
                }
            }
        }
        OdeSystem { species_names: self.species_names(), terms }
    }

    /// Marking induced by the declarations: a declared interval where
    /// present, otherwise the trivial interval at the declared initial.
    pub fn interval_marking(&self) -> IntervalMarking {
        IntervalMarking {
            names: self.species_names(),
            intervals: self
                .species
                .iter()
                .map(|s| s.interval.unwrap_or(Interval { lo: s.initial, hi: s.initial }))
                .collect(),
        }
    }

    /// Restriction of this network to the named reactions. Species are kept
    /// as-is so indices and intervals stay comparable with the full network.
    pub fn sub_network(&self, reaction_names: &[&str]) -> Result<ReactionNetwork, ModelError> {
        let mut reactions = Vec::with_capacity(reaction_names.len());
        for name in reaction_names {
            let i = self
                .reaction_index(name)
                .ok_or_else(|| ModelError::UnknownReaction(name.to_string()))?;
            reactions.push(self.reactions[i].clone());
        }
        Ok(ReactionNetwork { species: self.species.clone(), reactions })
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// JSON shape of a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub species: Vec<SpeciesDoc>,
    pub reactions: Vec<ReactionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesDoc {
    pub name: String,
    pub initial: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub reactants: Vec<(String, u32)>,
    pub products: Vec<(String, u32)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modifiers: Vec<String>,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverse_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverse_name: Option<String>,
}
