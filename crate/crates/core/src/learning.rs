//! Weight learning, lazy decay, annealing and the information metrics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_unit, AssocId, ConceptId, Graph, NeighborFilter};

pub const DEFAULT_ELL: f64 = 0.9;
pub const DEFAULT_BETA: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    /// Retention: the share of the previous value kept by each update.
    pub ell: f64,
    /// Certainty kept per hop of a story.
    pub beta: f64,
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            ell: DEFAULT_ELL,
            beta: DEFAULT_BETA,
        }
    }
}

impl LearningParams {
    pub fn new(ell: f64, beta: f64) -> Result<Self> {
        let p = LearningParams { ell, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit(self.ell, "ell")?;
        check_open_unit(self.beta, "beta")
    }
}

fn check_open_unit(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} {x} outside (0, 1)")))
    }
}

/// One step of the iterated equilibrium `(1 − ℓ)·sample + ℓ·prev`.
pub fn learn_update(prev: f64, sample: f64, ell: f64) -> Result<f64> {
    check_unit(prev, "previous value")?;
    check_unit(sample, "sample")?;
    check_unit(ell, "ell")?;
    Ok(((1.0 - ell) * sample + ell * prev).clamp(0.0, 1.0))
}

/// `ℓ^age`.
pub fn decay_factor(age: u64, ell: f64) -> f64 {
    match i32::try_from(age) {
        Ok(n) => ell.powi(n),
        Err(_) => ell.powf(age as f64),
    }
}

impl Graph {
    /// Decays the stored weight up to `now`, then nudges it towards 1.
    pub fn reinforce(&mut self, id: AssocId, params: &LearningParams, now: u64) -> Result<f64> {
        let clock = self.clock;
        let assoc = self.association_mut(id)?;
        let age = modular_age(now, assoc.last_tick, clock.modulus());
        let effective = assoc.weight * decay_factor(age, params.ell);
        let w = learn_update(effective.clamp(0.0, 1.0), 1.0, params.ell)?;
        assoc.weight = w;
        assoc.last_tick = now;
        Ok(w)
    }

    /// Reinforces at the current tick with the graph's own parameters.
    pub fn reinforce_now(&mut self, id: AssocId) -> Result<f64> {
        let params = self.params;
        let now = self.clock.now();
        self.reinforce(id, &params, now)
    }

    /// One synchronous smoothing pass: each edge moves towards the mean
    /// weight of the edges it shares an endpoint with.
    ///
    /// Returns the number of edges whose weight changed.
    pub fn anneal(&mut self, lambda: f64) -> Result<usize> {
        check_unit(lambda, "lambda")?;
        let now = self.clock.now();
        let current: BTreeMap<AssocId, f64> = self
            .associations()
            .map(|a| (a.id, self.effective_weight(a)))
            .collect();
        let mut at_node: BTreeMap<ConceptId, Vec<AssocId>> = BTreeMap::new();
        for a in self.associations() {
            at_node.entry(a.from).or_default().push(a.id);
            at_node.entry(a.to).or_default().push(a.id);
        }

        let mut changed = 0;
        for (&id, &w) in &current {
            let (from, to) = {
                let a = &self.assocs[&id];
                (a.from, a.to)
            };
            let sharing: BTreeSet<AssocId> = at_node[&from]
                .iter()
                .chain(&at_node[&to])
                .copied()
                .filter(|&other| other != id)
                .collect();
            let new = if sharing.is_empty() || lambda == 0.0 {
                w
            } else {
                let mean = sharing.iter().map(|o| current[o]).sum::<f64>() / sharing.len() as f64;
                ((1.0 - lambda) * w + lambda * mean).clamp(0.0, 1.0)
            };
            let assoc = self.assocs.get_mut(&id).expect("live");
            if new != w {
                changed += 1;
            }
            assoc.weight = new;
            assoc.last_tick = now;
        }
        Ok(changed)
    }
}

fn modular_age(now: u64, then: u64, t_max: u64) -> u64 {
    let (now, then) = (now % t_max, then % t_max);
    if now >= then {
        now - then
    } else {
        t_max - then + now
    }
}

/// A discrete probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probabilities: Vec<f64>,
}

impl Distribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("probabilities must be finite and non-negative"));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Distribution { probabilities })
    }

    /// Normalizes non-negative weights; all-zero or empty input is invalid.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights have zero total"));
        }
        Ok(Distribution {
            probabilities: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Number of outcomes with nonzero probability.
    pub fn support(&self) -> usize {
        self.probabilities.iter().filter(|&&p| p > 0.0).count()
    }
}

/// `−Σ p log p` in the given base, with `0 · log 0 = 0`.
pub fn shannon_entropy(d: &Distribution, base: f64) -> Result<f64> {
    if !(base > 0.0 && base != 1.0 && base.is_finite()) {
        return Err(Error::invalid(format!("logarithm base {base}")));
    }
    let nats: f64 = d
        .probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    Ok((nats / base.ln()).max(0.0))
}

/// Maximum entropy over an alphabet of `n` symbols minus the observed
/// entropy, in bits.
pub fn significance(d: &Distribution, n: usize) -> Result<f64> {
    if n == 0 || n < d.support() {
        return Err(Error::invalid(format!(
            "alphabet of {n} symbols is smaller than support {}",
            d.support()
        )));
    }
    let s = shannon_entropy(d, 2.0)?;
    Ok(((n as f64).log2() - s).max(0.0))
}

/// Positions at which two equal-length sequences differ.
pub fn hamming<T: PartialEq>(a: &[T], b: &[T]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "sequences of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// [`hamming`] over the characters of two strings.
pub fn hamming_str(a: &str, b: &str) -> Result<usize> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    hamming(&a, &b)
}

/// Fewest hops between two concepts, ignoring association direction.
/// `None` when unreachable.
pub fn hop_distance(
    graph: &Graph,
    a: ConceptId,
    b: ConceptId,
    filter: Option<&NeighborFilter>,
) -> Result<Option<usize>> {
    graph.concept(a)?;
    graph.concept(b)?;
    let mut seen = BTreeSet::from([a]);
    let mut queue = VecDeque::from([(a, 0)]);
    while let Some((c, d)) = queue.pop_front() {
        if c == b {
            return Ok(Some(d));
        }
        for r in graph.neighbors(c, filter)? {
            if seen.insert(r.to) {
                queue.push_back((r.to, d + 1));
            }
        }
    }
    Ok(None)
}

/// Whether sampling every `sample_interval` ticks resolves changes that
/// take `change_interval` ticks: `change ≥ 2 · sample`.
pub fn nyquist_ok(sample_interval: u64, change_interval: u64) -> Result<bool> {
    if sample_interval == 0 || change_interval == 0 {
        return Err(Error::invalid("intervals must be at least one tick"));
    }
    Ok(u128::from(change_interval) >= 2 * u128::from(sample_interval))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Provenance;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn update_examples() {
        for ell in [0.1, 0.5, 0.9] {
            assert!(close(learn_update(0.5, 0.5, ell).unwrap(), 0.5));
        }
        assert!(close(learn_update(1.0, 0.0, 0.6).unwrap(), 0.6));
        let mut x = 1.0;
        for _ in 0..10 {
            x = learn_update(x, 0.0, 0.5).unwrap();
        }
        assert!(close(x, 9.765625e-4));
        assert!(learn_update(1.5, 0.0, 0.5).is_err());
        assert!(learn_update(0.5, -0.1, 0.5).is_err());
    }

    #[test]
    fn decay_examples() {
        assert_eq!(decay_factor(0, 0.3), 1.0);
        assert_eq!(decay_factor(1, 0.9), 0.9);
        assert!((decay_factor(20, 0.9) - 0.12157665459056928).abs() < 1e-12);
    }

    fn one_edge(weight: f64) -> (Graph, AssocId) {
        let mut g = Graph::with_standard_aliases();
        let a = g.add_concept("a").unwrap();
        let b = g.add_concept("b").unwrap();
        let id = g.associate(a, "contains", b, [""; 0], Provenance::Reported).unwrap();
        g.set_weight(id, weight).unwrap();
        (g, id)
    }

    #[test]
    fn reinforce_examples() {
        let p = LearningParams::new(0.5, 0.75).unwrap();
        let (mut g, id) = one_edge(0.5);
        assert!(close(g.reinforce(id, &p, 0).unwrap(), 0.75));

        let (mut g, id) = one_edge(1.0);
        assert!(close(g.reinforce(id, &p, 0).unwrap(), 1.0));

        let (mut g, id) = one_edge(0.8);
        g.advance(3);
        assert!(close(g.reinforce(id, &p, 3).unwrap(), 0.55));
        assert_eq!(g.association(id).unwrap().last_tick, 3);

        assert!(g.reinforce(AssocId(99), &p, 3).unwrap_err().is_not_found());
    }

    #[test]
    fn anneal_swaps_pair() {
        let mut g = Graph::with_standard_aliases();
        let hub = g.add_concept("hub").unwrap();
        let x = g.add_concept("x").unwrap();
        let y = g.add_concept("y").unwrap();
        let e1 = g.associate(hub, "contains", x, [""; 0], Provenance::Reported).unwrap();
        let e2 = g.associate(hub, "contains", y, [""; 0], Provenance::Reported).unwrap();
        g.set_weight(e1, 0.2).unwrap();
        g.set_weight(e2, 0.8).unwrap();
        assert_eq!(g.anneal(0.0).unwrap(), 0);
        assert_eq!(g.anneal(1.0).unwrap(), 2);
        assert!(close(g.association(e1).unwrap().weight, 0.8));
        assert!(close(g.association(e2).unwrap().weight, 0.2));
    }

    #[test]
    fn anneal_leaves_isolated_and_uniform() {
        let (mut g, id) = one_edge(0.3);
        assert_eq!(g.anneal(1.0).unwrap(), 0);
        assert_eq!(g.association(id).unwrap().weight, 0.3);
        assert!(g.anneal(1.5).is_err());
    }

    #[test]
    fn entropy_examples() {
        let uniform = Distribution::new(vec![0.25; 4]).unwrap();
        assert!(close(shannon_entropy(&uniform, 2.0).unwrap(), 2.0));
        let point = Distribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(shannon_entropy(&point, 2.0).unwrap(), 0.0);
        let skew = Distribution::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert!(close(shannon_entropy(&skew, 2.0).unwrap(), 1.5));
        assert!(Distribution::new(vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn significance_examples() {
        let point = Distribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(close(significance(&point, 4).unwrap(), 2.0));
        let uniform = Distribution::new(vec![0.125; 8]).unwrap();
        assert!(close(significance(&uniform, 8).unwrap(), 0.0));
        let half = Distribution::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(close(significance(&half, 4).unwrap(), 1.0));
        assert!(significance(&half, 1).is_err());
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_str("abc", "abc").unwrap(), 0);
        assert_eq!(hamming_str("karolin", "kathrin").unwrap(), 3);
        assert!(hamming_str("ab", "abc").is_err());
        assert_eq!(hamming(&[1, 2, 3], &[1, 0, 3]).unwrap(), 1);
    }

    #[test]
    fn hops() {
        let mut g = Graph::with_standard_aliases();
        let a = g.add_concept("A").unwrap();
        let b = g.add_concept("B").unwrap();
        let c = g.add_concept("C").unwrap();
        let d = g.add_concept("D").unwrap();
        g.associate(a, "contains", b, [""; 0], Provenance::Reported).unwrap();
        g.associate(c, "depends on", b, [""; 0], Provenance::Reported).unwrap();
        assert_eq!(hop_distance(&g, a, a, None).unwrap(), Some(0));
        assert_eq!(hop_distance(&g, a, c, None).unwrap(), Some(2));
        assert_eq!(hop_distance(&g, a, d, None).unwrap(), None);
        let only_contains = NeighborFilter::kind(crate::sttype::Kind::Contains);
        assert_eq!(hop_distance(&g, a, c, Some(&only_contains)).unwrap(), None);
        assert!(hop_distance(&g, a, ConceptId(42), None).is_err());
    }

    #[test]
    fn nyquist_examples() {
        assert!(nyquist_ok(1, 2).unwrap());
        assert!(!nyquist_ok(1, 1).unwrap());
        assert!(nyquist_ok(5, 20).unwrap());
        assert!(nyquist_ok(0, 3).is_err());
    }

    #[test]
    fn params_validate() {
        assert!(LearningParams::new(1.0, 0.5).is_err());
        assert!(LearningParams::new(0.5, 0.0).is_err());
        assert_eq!(LearningParams::default().beta, 0.75);
    }
}
