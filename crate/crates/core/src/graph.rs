//! Concept and association store.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alias::{Alias, AliasRegistry};
use crate::context::EpochClock;
use crate::error::{Error, Result};
use crate::learning::{decay_factor, LearningParams};
use crate::sttype::{Direction, Kind, StType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub u64);

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssocId(pub u64);

impl fmt::Display for AssocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: ConceptId,
    pub name: String,
    pub created_tick: u64,
}

/// How an association came to be known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    AutoCalibrated,
    ObservedCorrelation,
    Reported,
    ReportedCalibration,
    ReportedEncapsulation,
    CoActivation,
    Inferred,
}

impl Provenance {
    pub fn is_asserted(self) -> bool {
        !matches!(self, Provenance::CoActivation | Provenance::Inferred)
    }
}

/// Starting weight for a new association, by provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialWeights {
    pub asserted: f64,
    pub co_activation: f64,
    pub inferred: f64,
}

impl Default for InitialWeights {
    fn default() -> Self {
        InitialWeights {
            asserted: 0.5,
            co_activation: 0.1,
            inferred: 0.3,
        }
    }
}

impl InitialWeights {
    pub fn for_provenance(&self, p: Provenance) -> f64 {
        match p {
            Provenance::CoActivation => self.co_activation,
            Provenance::Inferred => self.inferred,
            _ => self.asserted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub id: AssocId,
    pub from: ConceptId,
    pub to: ConceptId,
    pub alias: String,
    /// Normalized context tokens; empty means unconditional.
    pub contexts: BTreeSet<String>,
    /// Stored weight as of `last_tick`; see [`Graph::effective_weight`].
    pub weight: f64,
    pub last_tick: u64,
    pub provenance: Provenance,
    /// False once an endpoint has been removed.
    pub live: bool,
}

impl Association {
    pub fn is_conditional(&self) -> bool {
        !self.contexts.is_empty()
    }
}

type AssocKey = (ConceptId, ConceptId, String, BTreeSet<String>);

/// Lowercases and trims a context token. Empty tokens normalize to `None`.
pub fn normalize_token(token: &str) -> Option<String> {
    let t = token.trim().to_lowercase();
    (!t.is_empty()).then_some(t)
}

/// Normalizes a set of context tokens, dropping empties.
pub fn normalize_tokens<I, S>(tokens: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    tokens
        .into_iter()
        .filter_map(|t| normalize_token(t.as_ref()))
        .collect()
}

/// Optional restrictions for [`Graph::neighbors`]; `None` fields match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborFilter {
    pub kind: Option<Kind>,
    pub direction: Option<Direction>,
    pub negated: Option<bool>,
    pub alias: Option<String>,
    /// Keep associations active under this context token.
    pub context: Option<String>,
}

impl NeighborFilter {
    pub fn kind(kind: Kind) -> Self {
        NeighborFilter {
            kind: Some(kind),
            ..Default::default()
        }
    }

    pub(crate) fn matches(&self, reading: &Reading, assoc: &Association) -> bool {
        if self.kind.is_some_and(|k| k != reading.sttype.kind()) {
            return false;
        }
        if self.direction.is_some_and(|d| d != reading.sttype.direction()) {
            return false;
        }
        if self.negated.is_some_and(|n| n != reading.sttype.is_negated()) {
            return false;
        }
        if let Some(alias) = &self.alias {
            if alias.trim() != reading.label {
                return false;
            }
        }
        if let Some(token) = &self.context {
            if let Some(token) = normalize_token(token) {
                if assoc.is_conditional() && !assoc.contexts.contains(&token) {
                    return false;
                }
            }
        }
        true
    }
}

/// An association as seen from one of its endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    pub assoc: AssocId,
    pub from: ConceptId,
    pub to: ConceptId,
    pub sttype: StType,
    pub label: String,
    /// True when read against the stored direction.
    pub reversed: bool,
    pub propagating: bool,
    pub weight: f64,
}

/// The long-term store: concepts, aliases, weighted associations and the
/// epoch clock that drives decay.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub(crate) concepts: BTreeMap<ConceptId, Concept>,
    pub(crate) names: BTreeMap<String, ConceptId>,
    pub(crate) aliases: AliasRegistry,
    pub(crate) assocs: BTreeMap<AssocId, Association>,
    pub(crate) keys: BTreeMap<AssocKey, AssocId>,
    pub(crate) next_concept: u64,
    pub(crate) next_assoc: u64,
    pub(crate) clock: EpochClock,
    pub(crate) params: LearningParams,
    pub(crate) initial: InitialWeights,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    /// An empty graph with no aliases registered.
    pub fn new() -> Self {
        Graph {
            concepts: BTreeMap::new(),
            names: BTreeMap::new(),
            aliases: AliasRegistry::new(),
            assocs: BTreeMap::new(),
            keys: BTreeMap::new(),
            next_concept: 0,
            next_assoc: 0,
            clock: EpochClock::default(),
            params: LearningParams::default(),
            initial: InitialWeights::default(),
        }
    }

    /// An empty graph preloaded with the standard alias set.
    pub fn with_standard_aliases() -> Self {
        Graph {
            aliases: AliasRegistry::standard(),
            ..Self::new()
        }
    }

    pub fn params(&self) -> &LearningParams {
        &self.params
    }

    pub fn set_params(&mut self, params: LearningParams) {
        self.params = params;
    }

    pub fn initial_weights(&self) -> &InitialWeights {
        &self.initial
    }

    pub fn set_initial_weights(&mut self, initial: InitialWeights) -> Result<()> {
        for w in [initial.asserted, initial.co_activation, initial.inferred] {
            check_unit(w, "initial weight")?;
        }
        self.initial = initial;
        Ok(())
    }

    pub fn clock(&self) -> EpochClock {
        self.clock
    }

    pub fn now(&self) -> u64 {
        self.clock.now()
    }

    /// Advances the clock by `n` ticks.
    pub fn advance(&mut self, n: u64) {
        self.clock = self.clock.advance(n);
    }

    pub fn set_clock(&mut self, clock: EpochClock) {
        self.clock = clock;
    }

    // -- concepts ---------------------------------------------------------

    /// Returns the id for `name`, creating the concept if needed.
    pub fn add_concept(&mut self, name: &str) -> Result<ConceptId> {
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::invalid("concept name is empty"));
        }
        if let Some(&id) = self.names.get(name) {
            return Ok(id);
        }
        let id = ConceptId(self.next_concept);
        self.next_concept += 1;
        self.concepts.insert(
            id,
            Concept {
                id,
                name: name.to_string(),
                created_tick: self.clock.now(),
            },
        );
        self.names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn concept(&self, id: ConceptId) -> Result<&Concept> {
        self.concepts
            .get(&id)
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }

    pub fn concept_id(&self, name: &str) -> Option<ConceptId> {
        self.names.get(name.trim()).copied()
    }

    /// Looks up a concept by name, failing with not-found.
    pub fn lookup(&self, name: &str) -> Result<ConceptId> {
        self.concept_id(name)
            .ok_or_else(|| Error::UnknownConcept(name.trim().to_string()))
    }

    pub fn name(&self, id: ConceptId) -> &str {
        self.concepts
            .get(&id)
            .map(|c| c.name.as_str())
            .unwrap_or("<removed>")
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    /// Removes a concept. Its associations are kept as tombstones so that
    /// neither concept nor association ids are ever reused.
    pub fn remove_concept(&mut self, id: ConceptId) -> Result<usize> {
        let concept = self
            .concepts
            .remove(&id)
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))?;
        self.names.remove(&concept.name);
        let mut tombstoned = 0;
        for assoc in self.assocs.values_mut() {
            if assoc.live && (assoc.from == id || assoc.to == id) {
                assoc.live = false;
                self.keys.remove(&(
                    assoc.from,
                    assoc.to,
                    assoc.alias.clone(),
                    assoc.contexts.clone(),
                ));
                tombstoned += 1;
            }
        }
        Ok(tombstoned)
    }

    // -- aliases ----------------------------------------------------------

    pub fn aliases(&self) -> &AliasRegistry {
        &self.aliases
    }

    pub fn alias(&self, name: &str) -> Result<&Alias> {
        self.aliases.resolve(name)
    }

    pub fn register_alias(
        &mut self,
        name: &str,
        sttype: StType,
        propagating: bool,
        reciprocal: Option<&str>,
    ) -> Result<&Alias> {
        self.aliases.register(name, sttype, propagating, reciprocal)
    }

    /// Makes sure a standard alias is present, registering it from the
    /// built-in table if missing.
    pub(crate) fn ensure_standard_alias(&mut self, name: &str) -> Result<()> {
        if self.aliases.get(name).is_some() {
            return Ok(());
        }
        let std = AliasRegistry::standard();
        let alias = std.resolve(name)?.clone();
        let reciprocal = alias.reciprocal.clone();
        self.aliases.register(
            &alias.name,
            alias.sttype,
            alias.propagating,
            reciprocal.as_deref(),
        )?;
        Ok(())
    }

    // -- associations -----------------------------------------------------

    /// Asserts `from --alias--> to` under `contexts`.
    ///
    /// A new key starts at the provenance's initial weight; an existing
    /// key is reinforced instead of duplicated.
    pub fn associate<I, S>(
        &mut self,
        from: ConceptId,
        alias: &str,
        to: ConceptId,
        contexts: I,
        provenance: Provenance,
    ) -> Result<AssocId>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let now = self.clock.now();
        self.upsert(from, alias, to, normalize_tokens(contexts), provenance, now)
            .map(|(id, _)| id)
    }

    /// Like [`associate`](Self::associate) but reports whether a new edge
    /// was created.
    pub(crate) fn upsert(
        &mut self,
        from: ConceptId,
        alias: &str,
        to: ConceptId,
        contexts: BTreeSet<String>,
        provenance: Provenance,
        now: u64,
    ) -> Result<(AssocId, bool)> {
        if from == to {
            return Err(Error::invalid(format!(
                "association from {} to itself",
                self.name(from)
            )));
        }
        self.concept(from)?;
        self.concept(to)?;
        let alias = self.aliases.resolve(alias)?;
        let (from, to, alias_name) = self.storage_form(from, alias, to);

        let key = (from, to, alias_name.clone(), contexts.clone());
        if let Some(&id) = self.keys.get(&key) {
            let params = self.params;
            self.reinforce(id, &params, now)?;
            return Ok((id, false));
        }
        let id = AssocId(self.next_assoc);
        self.next_assoc += 1;
        self.assocs.insert(
            id,
            Association {
                id,
                from,
                to,
                alias: alias_name,
                contexts,
                weight: self.initial.for_provenance(provenance),
                last_tick: now,
                provenance,
                live: true,
            },
        );
        self.keys.insert(key, id);
        Ok((id, true))
    }

    pub fn association(&self, id: AssocId) -> Result<&Association> {
        self.assocs
            .get(&id)
            .filter(|a| a.live)
            .ok_or(Error::UnknownAssociation(id.0))
    }

    pub(crate) fn association_mut(&mut self, id: AssocId) -> Result<&mut Association> {
        self.assocs
            .get_mut(&id)
            .filter(|a| a.live)
            .ok_or(Error::UnknownAssociation(id.0))
    }

    /// Live associations in id order.
    pub fn associations(&self) -> impl Iterator<Item = &Association> {
        self.assocs.values().filter(|a| a.live)
    }

    /// All stored associations including tombstones.
    pub fn all_associations(&self) -> impl Iterator<Item = &Association> {
        self.assocs.values()
    }

    pub fn association_count(&self) -> usize {
        self.associations().count()
    }

    /// Finds the live association with exactly this key, after the same
    /// normalization [`associate`](Self::associate) applies.
    pub fn find_association<I, S>(
        &self,
        from: ConceptId,
        alias: &str,
        to: ConceptId,
        contexts: I,
    ) -> Option<AssocId>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let alias = self.aliases.get(alias)?;
        let (from, to, name) = self.storage_form(from, alias, to);
        self.keys
            .get(&(from, to, name, normalize_tokens(contexts)))
            .copied()
    }

    // Symmetric links are stored once, lower id first.
    fn storage_form(&self, from: ConceptId, alias: &Alias, to: ConceptId) -> (ConceptId, ConceptId, String) {
        if alias.sttype.kind() == Kind::Near && from > to {
            let name = alias
                .reciprocal
                .clone()
                .filter(|r| self.aliases.get(r).is_some())
                .unwrap_or_else(|| alias.name.clone());
            (to, from, name)
        } else {
            (from, to, alias.name.clone())
        }
    }

    /// Overwrites a stored weight and stamps it with the current tick.
    pub fn set_weight(&mut self, id: AssocId, weight: f64) -> Result<()> {
        check_unit(weight, "weight")?;
        let now = self.clock.now();
        let assoc = self.association_mut(id)?;
        assoc.weight = weight;
        assoc.last_tick = now;
        Ok(())
    }

    /// Weight after lazy decay up to the current tick.
    pub fn effective_weight(&self, assoc: &Association) -> f64 {
        let age = self.clock.elapsed_since(assoc.last_tick);
        assoc.weight * decay_factor(age, self.params.ell)
    }

    /// Type of the association as stored (read from `from`).
    pub fn sttype_of(&self, assoc: &Association) -> StType {
        self.aliases
            .get(&assoc.alias)
            .map(|a| a.sttype)
            .unwrap_or_else(|| StType::forward(Kind::Near))
    }

    /// Reads `assoc` starting from `at`, which must be one of its endpoints.
    pub fn reading(&self, assoc: &Association, at: ConceptId) -> Reading {
        let alias = self.aliases.get(&assoc.alias);
        let sttype = self.sttype_of(assoc);
        let propagating = alias.map(|a| a.propagating).unwrap_or(true);
        let weight = self.effective_weight(assoc);
        if at == assoc.from {
            Reading {
                assoc: assoc.id,
                from: assoc.from,
                to: assoc.to,
                sttype,
                label: assoc.alias.clone(),
                reversed: false,
                propagating,
                weight,
            }
        } else {
            Reading {
                assoc: assoc.id,
                from: assoc.to,
                to: assoc.from,
                sttype: sttype.reciprocal_of(),
                label: alias
                    .map(Alias::reciprocal_label)
                    .unwrap_or_else(|| assoc.alias.clone()),
                reversed: true,
                propagating,
                weight,
            }
        }
    }

    /// Live associations touching `c`.
    pub(crate) fn incident(&self, c: ConceptId) -> impl Iterator<Item = &Association> {
        self.associations().filter(move |a| a.from == c || a.to == c)
    }

    /// Outgoing associations of `c` plus incoming ones relabelled with
    /// their reciprocal reading, ordered by neighbor id then label.
    pub fn neighbors(&self, c: ConceptId, filter: Option<&NeighborFilter>) -> Result<Vec<Reading>> {
        self.concept(c)?;
        let mut out: Vec<Reading> = self
            .incident(c)
            .filter_map(|a| {
                let r = self.reading(a, c);
                filter.is_none_or(|f| f.matches(&r, a)).then_some(r)
            })
            .collect();
        sort_readings(&mut out);
        Ok(out)
    }
}

pub(crate) fn sort_readings(readings: &mut [Reading]) {
    readings.sort_by(|a, b| {
        a.to.cmp(&b.to)
            .then_with(|| a.label.cmp(&b.label))
            .then_with(|| a.assoc.cmp(&b.assoc))
    });
}

pub(crate) fn check_unit(x: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} {x} outside [0, 1]")))
    }
}
