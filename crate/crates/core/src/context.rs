//! Short-term context: the epoch clock, the decaying "state of now",
//! co-activation of concepts seen together, and the context-filtered view
//! of the long-term graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalize_token, normalize_tokens, AssocId, Association, ConceptId, Graph, Provenance, Reading};
use crate::learning::{shannon_entropy, Distribution};
use crate::sttype::{Direction, Kind};

/// Default modulus of the epoch clock.
pub const DEFAULT_T_MAX: u64 = 1 << 32;

/// Tokens whose freshness drops below this are forgotten.
pub const EVICTION_THRESHOLD: f64 = 1e-3;

pub const DEFAULT_CAPACITY: usize = 256;

/// Number of dominant context tokens stamped onto co-activation edges.
pub const CONTEXT_STAMP_SIZE: usize = 4;

/// Alias used for co-activation edges.
pub const CO_ACTIVATION_ALIAS: &str = "is correlated with";

/// A modular counter: `t + t_max == t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochClock {
    t: u64,
    t_max: u64,
}

impl Default for EpochClock {
    fn default() -> Self {
        EpochClock {
            t: 0,
            t_max: DEFAULT_T_MAX,
        }
    }
}

impl EpochClock {
    pub fn new(t_max: u64) -> Result<Self> {
        Self::at(0, t_max)
    }

    pub fn at(t: u64, t_max: u64) -> Result<Self> {
        if t_max <= 1 {
            return Err(Error::invalid(format!("clock modulus {t_max} must exceed 1")));
        }
        if t >= t_max {
            return Err(Error::invalid(format!("clock value {t} not below modulus {t_max}")));
        }
        Ok(EpochClock { t, t_max })
    }

    pub fn now(self) -> u64 {
        self.t
    }

    pub fn modulus(self) -> u64 {
        self.t_max
    }

    #[must_use]
    pub fn tick(self) -> Self {
        self.advance(1)
    }

    #[must_use]
    pub fn advance(self, n: u64) -> Self {
        let t = (u128::from(self.t) + u128::from(n)) % u128::from(self.t_max);
        EpochClock {
            t: t as u64,
            t_max: self.t_max,
        }
    }

    /// Ticks since `then`, modulo the clock period.
    pub fn elapsed_since(self, then: u64) -> u64 {
        let then = then % self.t_max;
        if self.t >= then {
            self.t - then
        } else {
            self.t_max - then + self.t
        }
    }
}

/// Free-function form of [`EpochClock::tick`].
pub fn tick(clock: EpochClock) -> EpochClock {
    clock.tick()
}

/// Cylindrical decomposition of a tick over nested periods, e.g.
/// `[24, 7]` maps an hour count to (hour of day, day of week).
pub fn time_key(t: u64, period: &[u64]) -> Result<Vec<u64>> {
    if let Some(pos) = period.iter().position(|&s| s == 0) {
        return Err(Error::invalid(format!("bucket {pos} has size zero")));
    }
    let mut rest = t;
    Ok(period
        .iter()
        .map(|&size| {
            let key = rest % size;
            rest /= size;
            key
        })
        .collect())
}

/// The decaying multiset of context tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextState {
    entries: BTreeMap<String, f64>,
    capacity: usize,
}

impl Default for ContextState {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY)
    }
}

impl ContextState {
    pub fn new(capacity: usize) -> Self {
        ContextState {
            entries: BTreeMap::new(),
            capacity: capacity.max(1),
        }
    }

    /// A fresh state holding `tokens` at full weight.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut state = Self::default();
        state.set(tokens);
        state
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, token: &str) -> Option<f64> {
        normalize_token(token).and_then(|t| self.entries.get(&t).copied())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.weight(token).is_some()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn tokens(&self) -> BTreeSet<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Replaces the state with `tokens` at full weight.
    pub fn set<I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.entries.clear();
        for t in normalize_tokens(tokens) {
            self.entries.insert(t, 1.0);
        }
        self.enforce_capacity();
    }

    /// One observation round: everything decays by `retention`, observed
    /// tokens return to full weight, stale tokens are evicted.
    pub fn observe<I, S>(&mut self, tokens: I, retention: f64) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if !(retention > 0.0 && retention < 1.0) {
            return Err(Error::invalid(format!("retention {retention} outside (0, 1)")));
        }
        for w in self.entries.values_mut() {
            *w *= retention;
        }
        for t in normalize_tokens(tokens) {
            self.entries.insert(t, 1.0);
        }
        self.entries.retain(|_, w| *w >= EVICTION_THRESHOLD);
        self.enforce_capacity();
        Ok(())
    }

    fn enforce_capacity(&mut self) {
        while self.entries.len() > self.capacity {
            // lowest weight goes first; among equals the last token by name
            let victim = self
                .entries
                .iter()
                .min_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(k, _)| k.clone())
                .expect("nonempty");
            self.entries.remove(&victim);
        }
    }

    /// Up to `k` tokens with the highest weight, ties broken by name.
    pub fn dominant(&self, k: usize) -> Vec<String> {
        let mut all: Vec<(&String, f64)> = self.entries.iter().map(|(t, &w)| (t, w)).collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        all.into_iter().take(k).map(|(t, _)| t.clone()).collect()
    }

    pub(crate) fn insert_raw(&mut self, token: String, weight: f64) {
        self.entries.insert(token, weight);
    }
}

/// Concepts observed within one coarse tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcurrentInterval {
    pub tick: u64,
    pub activated: BTreeSet<ConceptId>,
}

impl ConcurrentInterval {
    pub fn new(tick: u64, activated: impl IntoIterator<Item = ConceptId>) -> Self {
        ConcurrentInterval {
            tick,
            activated: activated.into_iter().collect(),
        }
    }
}

/// Creates or reinforces a proximity association between every pair of
/// concepts in the interval, stamped with the dominant context tokens.
///
/// Returns the touched association ids in pair order.
pub fn co_activate(
    graph: &mut Graph,
    interval: &ConcurrentInterval,
    state: &ContextState,
) -> Result<Vec<AssocId>> {
    for &c in &interval.activated {
        graph.concept(c)?;
    }
    if interval.activated.len() < 2 {
        return Ok(Vec::new());
    }
    graph.ensure_standard_alias(CO_ACTIVATION_ALIAS)?;
    let stamp: BTreeSet<String> = state.dominant(CONTEXT_STAMP_SIZE).into_iter().collect();
    let members: Vec<ConceptId> = interval.activated.iter().copied().collect();
    let mut touched = Vec::new();
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            let (id, _) = graph.upsert(
                a,
                CO_ACTIVATION_ALIAS,
                b,
                stamp.clone(),
                Provenance::CoActivation,
                interval.tick,
            )?;
            touched.push(id);
        }
    }
    Ok(touched)
}

/// Identifies the relation an association asserts or denies, independent
/// of which end it was written from.
pub(crate) fn relation_key(graph: &Graph, assoc: &Association) -> (Kind, ConceptId, ConceptId) {
    let t = graph.sttype_of(assoc);
    let (a, b) = match (t.kind(), t.direction()) {
        (Kind::Near, _) => (assoc.from.min(assoc.to), assoc.from.max(assoc.to)),
        (_, Direction::Forward) => (assoc.from, assoc.to),
        (_, Direction::Reciprocal) => (assoc.to, assoc.from),
    };
    (t.kind(), a, b)
}

/// The part of the graph switched on by the current context.
///
/// An association is visible when it is unconditional or one of its context
/// tokens is present. A visible denial suppresses the matching positive
/// associations for traversal; both stay stored.
#[derive(Debug, Clone)]
pub struct ActiveView<'g> {
    graph: &'g Graph,
    visible: BTreeSet<AssocId>,
    suppressed: BTreeSet<AssocId>,
}

impl<'g> ActiveView<'g> {
    pub fn new(graph: &'g Graph, state: &ContextState) -> Self {
        Self::with_tokens(graph, &state.tokens())
    }

    pub fn with_tokens(graph: &'g Graph, tokens: &BTreeSet<String>) -> Self {
        let visible: BTreeSet<AssocId> = graph
            .associations()
            .filter(|a| a.contexts.is_empty() || !a.contexts.is_disjoint(tokens))
            .map(|a| a.id)
            .collect();
        let denied: BTreeSet<_> = visible
            .iter()
            .map(|id| &graph.assocs[id])
            .filter(|a| graph.sttype_of(a).is_negated())
            .map(|a| relation_key(graph, a))
            .collect();
        let suppressed = visible
            .iter()
            .map(|id| &graph.assocs[id])
            .filter(|a| graph.sttype_of(a).is_positive() && denied.contains(&relation_key(graph, a)))
            .map(|a| a.id)
            .collect();
        ActiveView {
            graph,
            visible,
            suppressed,
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn contains(&self, id: AssocId) -> bool {
        self.visible.contains(&id)
    }

    pub fn is_suppressed(&self, id: AssocId) -> bool {
        self.suppressed.contains(&id)
    }

    /// Visible, positive and not denied.
    pub fn is_traversable(&self, id: AssocId) -> bool {
        self.visible.contains(&id)
            && !self.suppressed.contains(&id)
            && self
                .graph
                .assocs
                .get(&id)
                .is_some_and(|a| self.graph.sttype_of(a).is_positive())
    }

    pub fn associations(&self) -> impl Iterator<Item = &'g Association> + '_ {
        let graph = self.graph;
        self.visible.iter().map(move |id| &graph.assocs[id])
    }

    pub fn len(&self) -> usize {
        self.visible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visible.is_empty()
    }

    /// Traversable readings leaving `c`, in both stored directions.
    pub fn steps_from(&self, c: ConceptId) -> Vec<Reading> {
        let mut out: Vec<Reading> = self
            .graph
            .incident(c)
            .filter(|a| self.is_traversable(a.id))
            .map(|a| self.graph.reading(a, c))
            .collect();
        crate::graph::sort_readings(&mut out);
        out
    }
}

impl Graph {
    pub fn active_view(&self, state: &ContextState) -> ActiveView<'_> {
        ActiveView::new(self, state)
    }
}

/// Entropy of the context against entropy of the associations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnowledgeRatio {
    /// Bits in the normalized context weights.
    pub context_entropy: f64,
    /// Bits in the normalized association weights.
    pub association_entropy: f64,
    /// `None` when the association entropy is zero.
    pub ratio: Option<f64>,
}

pub fn context_knowledge_ratio(graph: &Graph, state: &ContextState) -> KnowledgeRatio {
    let context_entropy = weights_entropy(state.entries().map(|(_, w)| w));
    let association_entropy =
        weights_entropy(graph.associations().map(|a| graph.effective_weight(a)));
    let ratio = (association_entropy > 0.0).then(|| context_entropy / association_entropy);
    KnowledgeRatio {
        context_entropy,
        association_entropy,
        ratio,
    }
}

fn weights_entropy(weights: impl Iterator<Item = f64>) -> f64 {
    let weights: Vec<f64> = weights.collect();
    match Distribution::from_weights(&weights) {
        Ok(d) => shannon_entropy(&d, 2.0).unwrap_or(0.0),
        Err(_) => 0.0,
    }
}
