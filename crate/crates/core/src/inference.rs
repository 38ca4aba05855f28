//! Stories: chains of associations with attenuating certainty, and the
//! reasoning modes built on them.
//!
//! All searches run over the [`ActiveView`] for the supplied context, so
//! conditional associations only take part when their context is present,
//! and denied associations are never followed.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::context::{ActiveView, ContextState};
use crate::error::{Error, Result};
use crate::graph::{ConceptId, Graph, Reading};
use crate::sttype::{Kind, StType};

/// Depth bound for the closure-style modes (induce, deduce).
pub const CLOSURE_DEPTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StoryMode {
    /// One association type (kind and direction) throughout, positive only.
    Strict,
    /// Any mix of aliases.
    Narrative,
}

impl FromStr for StoryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strict" => Ok(StoryMode::Strict),
            "narrative" => Ok(StoryMode::Narrative),
            other => Err(Error::invalid(format!(
                "unknown story mode {other:?} (expected strict or narrative)"
            ))),
        }
    }
}

impl fmt::Display for StoryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StoryMode::Strict => "strict",
            StoryMode::Narrative => "narrative",
        })
    }
}

/// A simple path through the graph. Each step is the reading of the
/// association used, as seen from the concept it leaves; `step.to` is the
/// concept reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Story {
    pub mode: StoryMode,
    pub start: ConceptId,
    pub steps: Vec<Reading>,
    pub certainty: f64,
}

impl Story {
    pub fn axioms(&self) -> BTreeSet<ConceptId> {
        BTreeSet::from([self.start])
    }

    pub fn conclusion(&self) -> ConceptId {
        self.steps.last().map_or(self.start, |r| r.to)
    }

    /// Every concept on the path, in order.
    pub fn concepts(&self) -> Vec<ConceptId> {
        std::iter::once(self.start)
            .chain(self.steps.iter().map(|r| r.to))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `a -(label)-> b -(label)-> c`
    pub fn render(&self, graph: &Graph) -> String {
        let mut out = graph.name(self.start).to_string();
        for r in &self.steps {
            out.push_str(&format!(" -({})-> {}", r.label, graph.name(r.to)));
        }
        out
    }

    fn names<'g>(&self, graph: &'g Graph) -> Vec<&'g str> {
        self.concepts().into_iter().map(|c| graph.name(c)).collect()
    }
}

/// `Π weights × β^len`; the empty path is certain.
pub fn certainty(weights: &[f64], beta: f64) -> f64 {
    weights.iter().fold(1.0, |acc, w| acc * w * beta)
}

/// Same axioms and same conclusion, whatever the route.
pub fn equivalent(s1: &Story, s2: &Story) -> bool {
    s1.axioms() == s2.axioms() && s1.conclusion() == s2.conclusion()
}

fn compare(graph: &Graph, a: &Story, b: &Story) -> Ordering {
    b.certainty
        .total_cmp(&a.certainty)
        .then_with(|| a.names(graph).cmp(&b.names(graph)))
        .then_with(|| {
            let ids = |s: &Story| s.steps.iter().map(|r| r.assoc).collect::<Vec<_>>();
            ids(a).cmp(&ids(b))
        })
}

fn sort_stories(graph: &Graph, stories: &mut [Story]) {
    stories.sort_by(|a, b| compare(graph, a, b));
}

/// Whether `next` may extend a path that already took `steps`.
fn may_extend(steps: &[Reading], next: &Reading, mode: StoryMode) -> bool {
    if let Some(first) = steps.first() {
        // pinned aliases only ever stand alone
        if !(first.propagating && next.propagating) {
            return false;
        }
        if mode == StoryMode::Strict && first.sttype != next.sttype {
            return false;
        }
    }
    next.sttype.is_positive()
}

struct PathWalker<'v, 'g> {
    view: &'v ActiveView<'g>,
    mode: StoryMode,
    max_depth: usize,
    beta: f64,
    on_stack: BTreeSet<ConceptId>,
    steps: Vec<Reading>,
}

impl<'v, 'g> PathWalker<'v, 'g> {
    fn new(view: &'v ActiveView<'g>, mode: StoryMode, max_depth: usize) -> Self {
        PathWalker {
            view,
            mode,
            max_depth,
            beta: view.graph().params().beta,
            on_stack: BTreeSet::new(),
            steps: Vec::new(),
        }
    }

    fn candidates(&self, here: ConceptId) -> Vec<Reading> {
        if self.steps.len() >= self.max_depth {
            return Vec::new();
        }
        self.view
            .steps_from(here)
            .into_iter()
            .filter(|r| !self.on_stack.contains(&r.to) && may_extend(&self.steps, r, self.mode))
            .collect()
    }

    /// Depth-first walk from `start`. `visit(path, certainty, maximal)` is
    /// called for every nonempty path; returning false prunes its subtree.
    fn walk(&mut self, start: ConceptId, visit: &mut dyn FnMut(&[Reading], f64, bool) -> bool) {
        self.on_stack.clear();
        self.steps.clear();
        self.on_stack.insert(start);
        self.descend(start, 1.0, visit);
    }

    fn descend(&mut self, here: ConceptId, cert: f64, visit: &mut dyn FnMut(&[Reading], f64, bool) -> bool) {
        for r in self.candidates(here) {
            let next_cert = cert * r.weight * self.beta;
            let to = r.to;
            self.steps.push(r);
            self.on_stack.insert(to);
            let maximal = self.candidates(to).is_empty();
            if visit(&self.steps, next_cert, maximal) && !maximal {
                self.descend(to, next_cert, visit);
            }
            self.on_stack.remove(&to);
            self.steps.pop();
        }
    }
}

/// Maximal stories starting at `subject`, best first, at most `limit`.
///
/// A story is maximal when it reaches `max_depth` or cannot be extended.
pub fn story_search(
    graph: &Graph,
    subject: ConceptId,
    mode: StoryMode,
    max_depth: usize,
    context: &ContextState,
    limit: usize,
) -> Result<Vec<Story>> {
    graph.concept(subject)?;
    if max_depth == 0 {
        return Err(Error::invalid("story depth must be at least 1"));
    }
    if limit == 0 {
        return Ok(Vec::new());
    }
    let view = graph.active_view(context);
    let mut best: Vec<Story> = Vec::new();
    let mut walker = PathWalker::new(&view, mode, max_depth);
    walker.walk(subject, &mut |steps, cert, maximal| {
        // extensions only lose certainty, so a path already below the
        // limit-th best can be dropped with its subtree
        if best.len() >= limit && cert < best[limit - 1].certainty {
            return false;
        }
        if maximal {
            let story = Story {
                mode,
                start: subject,
                steps: steps.to_vec(),
                certainty: cert,
            };
            let at = best.partition_point(|s| compare(graph, s, &story) != Ordering::Greater);
            best.insert(at, story);
            best.truncate(limit);
        }
        true
    });
    Ok(best)
}

/// Stories of at most `depth` steps that converge on `c`, best first.
pub fn explain(graph: &Graph, c: ConceptId, depth: usize, context: &ContextState) -> Result<Vec<Story>> {
    graph.concept(c)?;
    let view = graph.active_view(context);
    let mut out = Vec::new();
    let mut walker = PathWalker::new(&view, StoryMode::Narrative, depth);
    walker.walk(c, &mut |steps, cert, _| {
        out.push(reversed(graph, c, steps, cert));
        true
    });
    sort_stories(graph, &mut out);
    Ok(out)
}

/// Turns a path walked outward from `origin` into the story that ends there.
fn reversed(graph: &Graph, origin: ConceptId, steps: &[Reading], cert: f64) -> Story {
    let start = steps.last().map_or(origin, |r| r.to);
    let steps = steps
        .iter()
        .rev()
        .map(|r| graph.reading(&graph.assocs[&r.assoc], r.to))
        .collect();
    Story {
        mode: StoryMode::Narrative,
        start,
        steps,
        certainty: cert,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub concepts: BTreeSet<ConceptId>,
    pub context: ContextState,
}

impl Query {
    pub fn new(concepts: impl IntoIterator<Item = ConceptId>, context: ContextState) -> Result<Self> {
        let concepts: BTreeSet<ConceptId> = concepts.into_iter().collect();
        if concepts.is_empty() {
            return Err(Error::invalid("query names no concepts"));
        }
        Ok(Query { concepts, context })
    }
}

/// Narrative stories that visit every query concept, best first.
///
/// A one-concept query is answered by the stories told from it. Otherwise
/// a story must start and end on query concepts; of a path and its
/// reverse only the telling that follows more associations forwards is
/// kept.
pub fn answer(graph: &Graph, q: &Query, max_depth: usize) -> Result<Vec<Story>> {
    for &c in &q.concepts {
        graph.concept(c)?;
    }
    if max_depth == 0 {
        return Ok(Vec::new());
    }
    if q.concepts.len() == 1 {
        let c = *q.concepts.first().expect("nonempty");
        return story_search(graph, c, StoryMode::Narrative, max_depth, &q.context, usize::MAX);
    }

    let view = graph.active_view(&q.context);
    let mut found: BTreeMap<Vec<u64>, Story> = BTreeMap::new();
    for &start in &q.concepts {
        let mut walker = PathWalker::new(&view, StoryMode::Narrative, max_depth);
        walker.walk(start, &mut |steps, cert, _| {
            let end = steps.last().expect("nonempty").to;
            let covers = q.concepts.contains(&end)
                && q.concepts
                    .iter()
                    .all(|c| *c == start || steps.iter().any(|r| r.to == *c));
            if covers {
                let story = Story {
                    mode: StoryMode::Narrative,
                    start,
                    steps: steps.to_vec(),
                    certainty: cert,
                };
                let mut key: Vec<u64> = steps.iter().map(|r| r.assoc.0).collect();
                let mut rev = key.clone();
                rev.reverse();
                key = key.min(rev);
                match found.get(&key) {
                    Some(kept) if !better_telling(graph, &story, kept) => {}
                    _ => {
                        found.insert(key, story);
                    }
                }
            }
            true
        });
    }
    let mut out: Vec<Story> = found.into_values().collect();
    sort_stories(graph, &mut out);
    Ok(out)
}

fn better_telling(graph: &Graph, a: &Story, b: &Story) -> bool {
    let forward = |s: &Story| {
        s.steps
            .iter()
            .filter(|r| !r.reversed || r.sttype.kind() == Kind::Near)
            .count()
    };
    match forward(a).cmp(&forward(b)) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.names(graph) < b.names(graph),
    }
}

/// Best certainty with which each concept is reached from `c` along
/// readings accepted by `follow`, within `max_depth` hops.
fn closure(
    view: &ActiveView<'_>,
    c: ConceptId,
    max_depth: usize,
    follow: impl Fn(StType) -> bool,
) -> Vec<(ConceptId, f64)> {
    let beta = view.graph().params().beta;
    let mut best: BTreeMap<ConceptId, f64> = BTreeMap::new();
    // concepts reached along propagating readings only; these may be extended
    let mut chainable: BTreeMap<ConceptId, f64> = BTreeMap::from([(c, 1.0)]);
    let mut frontier = chainable.clone();
    for hop in 0..max_depth {
        let mut next: BTreeMap<ConceptId, f64> = BTreeMap::new();
        for (&x, &cert) in &frontier {
            for r in view.steps_from(x) {
                if !follow(r.sttype) || r.to == c || (hop > 0 && !r.propagating) {
                    continue;
                }
                let v = cert * r.weight * beta;
                let slot = best.entry(r.to).or_insert(0.0);
                *slot = slot.max(v);
                if r.propagating && chainable.get(&r.to).is_none_or(|&old| v > old) {
                    chainable.insert(r.to, v);
                    let e = next.entry(r.to).or_insert(0.0);
                    *e = e.max(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    rank(view.graph(), best.into_iter().filter(|&(_, v)| v > 0.0).collect())
}

fn rank(graph: &Graph, mut scored: Vec<(ConceptId, f64)>) -> Vec<(ConceptId, f64)> {
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| graph.name(a.0).cmp(graph.name(b.0)))
            .then_with(|| a.0.cmp(&b.0))
    });
    scored
}

/// Generalizations of `c`: what it is a part, member or instance of.
pub fn induce(graph: &Graph, c: ConceptId, context: &ContextState) -> Result<Vec<(ConceptId, f64)>> {
    graph.concept(c)?;
    let up = StType::reciprocal(Kind::Contains);
    Ok(closure(&graph.active_view(context), c, CLOSURE_DEPTH, |t| t == up))
}

/// Exemplars and expressed properties of `c`.
pub fn deduce(graph: &Graph, c: ConceptId, context: &ContextState) -> Result<Vec<(ConceptId, f64)>> {
    graph.concept(c)?;
    let down = [StType::forward(Kind::Contains), StType::forward(Kind::Expresses)];
    Ok(closure(&graph.active_view(context), c, CLOSURE_DEPTH, |t| down.contains(&t)))
}

/// Concepts characterized by the observed tokens, ranked by summed weight.
/// Tokens naming no concept are skipped.
pub fn abduce<S: AsRef<str>>(graph: &Graph, tokens: &[S], context: &ContextState) -> Result<Vec<(ConceptId, f64)>> {
    let view = graph.active_view(context);
    let characterizes = StType::reciprocal(Kind::Expresses);
    let observed: BTreeSet<ConceptId> = tokens
        .iter()
        .filter_map(|t| concept_for_token(graph, t.as_ref()))
        .collect();
    let mut score: BTreeMap<ConceptId, f64> = BTreeMap::new();
    for &o in &observed {
        for r in view.steps_from(o) {
            if r.sttype == characterizes {
                *score.entry(r.to).or_insert(0.0) += r.weight;
            }
        }
    }
    Ok(rank(graph, score.into_iter().collect()))
}

fn concept_for_token(graph: &Graph, token: &str) -> Option<ConceptId> {
    let token = token.trim();
    graph.concept_id(token).or_else(|| {
        graph
            .concepts()
            .find(|c| c.name.eq_ignore_ascii_case(token))
            .map(|c| c.id)
    })
}

/// Concepts similar or close to `c`, one hop away.
pub fn lateral(graph: &Graph, c: ConceptId, context: &ContextState) -> Result<Vec<(ConceptId, f64)>> {
    graph.concept(c)?;
    let beta = graph.params().beta;
    let mut best: BTreeMap<ConceptId, f64> = BTreeMap::new();
    for r in graph.active_view(context).steps_from(c) {
        if r.sttype == StType::forward(Kind::Near) {
            let e = best.entry(r.to).or_insert(0.0);
            *e = e.max(r.weight * beta);
        }
    }
    Ok(rank(graph, best.into_iter().collect()))
}
