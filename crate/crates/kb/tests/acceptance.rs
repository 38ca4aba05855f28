//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use semspace::context::{co_activate, ConcurrentInterval, ContextState};
use semspace::coordinatizer::normalize_listing;
use semspace::inference::{story_search, StoryMode};
use semspace::learning::{learn_update, shannon_entropy, significance, Distribution};
use semspace::{
    ConceptId, Direction, Graph, Kind, KnowledgeBase, LearningParams, Provenance, StType,
};

const EXACT: f64 = 1e-12;
const TOL: f64 = 1e-9;
const FAST: Duration = Duration::from_secs(1);
const SEED: u64 = 0x5eed_2024;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("decay law", decay_law),
        ("golden listings", golden_listings),
        ("type algebra", type_algebra),
        ("Jane story", jane_story),
        ("non-propagation", non_propagation),
        ("context switching", context_switching),
        ("entropy identities", entropy_identities),
        ("co-activation combinatorics", co_activation),
        ("persistence round-trip", persistence),
        ("chained certainty", chained_certainty),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    ensure!(elapsed < FAST, "took {elapsed:?}, limit {FAST:?}");
    Ok(format!("{detail} in {elapsed:?}"))
}

fn decay_law() -> Outcome {
    timed(|| {
        let expected = 9.765625e-4;
        let mut w = 1.0;
        for _ in 0..10 {
            w = learn_update(w, 0.0, 0.5).map_err(|e| e.to_string())?;
        }
        ensure!((w - expected).abs() < EXACT, "recurrence gave {w}");

        let mut g = Graph::with_standard_aliases();
        g.set_params(LearningParams::new(0.5, 0.75).unwrap());
        let a = g.add_concept("a").unwrap();
        let b = g.add_concept("b").unwrap();
        let id = g.associate(a, "contains", b, [""; 0], Provenance::Reported).unwrap();
        g.set_weight(id, 1.0).unwrap();
        g.advance(10);
        let lazy = g.effective_weight(g.association(id).unwrap());
        ensure!((lazy - expected).abs() < EXACT, "lazy decay gave {lazy}");
        Ok(format!("{w:e}"))
    })
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn golden_listings() -> Outcome {
    timed(|| {
        for (input, listing, dialect) in [
            ("service.json", "service.listing", "json"),
            ("mixed.txt", "mixed.listing", "mixed"),
        ] {
            let out = Command::new(env!("CARGO_BIN_EXE_kb"))
                .arg("coordinatize")
                .arg(fixture(input))
                .args(["--dialect", dialect])
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(out.status.success(), "kb coordinatize {input} failed");
            let ours = normalize_listing(&String::from_utf8_lossy(&out.stdout));
            let theirs = normalize_listing(&std::fs::read_to_string(fixture(listing)).unwrap());
            ensure!(ours == theirs, "{input} listing differs");
        }
        Ok("both listings match".into())
    })
}

fn type_algebra() -> Outcome {
    timed(|| {
        let all = StType::all();
        ensure!(all.iter().collect::<BTreeSet<_>>().len() == 14, "expected 14 labels");
        for t in &all {
            let t = *t;
            ensure!(t.reciprocal_of().reciprocal_of() == t, "reciprocal not involutive on {t}");
            ensure!(t.negate().negate() == t, "negation not involutive on {t}");
            ensure!(t.negate().reciprocal_of() == t.reciprocal_of().negate(), "no commute on {t}");
            ensure!(all.contains(&t.reciprocal_of()) && all.contains(&t.negate()), "not closed on {t}");
        }
        Ok("14 labels".into())
    })
}

fn jane_graph() -> (Graph, Vec<ConceptId>) {
    let mut g = Graph::with_standard_aliases();
    let near = StType::forward(Kind::Near);
    g.register_alias("stick to", near, true, None).unwrap();
    g.register_alias("is liked by", StType::reciprocal(Kind::Expresses), true, Some("likes")).unwrap();
    g.register_alias("friend of", near, true, None).unwrap();
    g.register_alias("visits", near, true, None).unwrap();
    g.register_alias("occurrence of", StType::forward(Kind::Expresses), true, None).unwrap();
    let names = ["crumbs", "wool", "Sarah", "Jane", "bakery", "theft"];
    let ids: Vec<ConceptId> = names.iter().map(|n| g.add_concept(n).unwrap()).collect();
    let links = ["stick to", "is liked by", "friend of", "visits", "occurrence of"];
    for (i, alias) in links.iter().enumerate() {
        let id = g.associate(ids[i], alias, ids[i + 1], [""; 0], Provenance::Reported).unwrap();
        g.set_weight(id, 1.0).unwrap();
    }
    (g, ids)
}

fn jane_story() -> Outcome {
    let (g, ids) = jane_graph();
    let stories = story_search(&g, ids[0], StoryMode::Narrative, 6, &ContextState::default(), 5)
        .map_err(|e| e.to_string())?;
    let top = stories.first().ok_or("no story")?;
    ensure!(top.concepts() == ids, "top story is {}", top.render(&g));
    let expected = 0.75f64.powi(5);
    ensure!((top.certainty - expected).abs() < TOL, "certainty {}", top.certainty);
    Ok(format!("{} ({:.4})", top.render(&g), top.certainty))
}

fn two_hop_stories(g: &Graph, from: ConceptId) -> usize {
    story_search(g, from, StoryMode::Narrative, 2, &ContextState::default(), 100)
        .unwrap()
        .iter()
        .filter(|s| s.len() == 2)
        .count()
}

fn non_propagation() -> Outcome {
    let father = StType::new(Kind::Follows, Direction::Forward, false);
    let build = |alias: &str, propagating: bool| {
        let mut g = Graph::with_standard_aliases();
        g.register_alias(alias, father, propagating, None).unwrap();
        let ids: Vec<ConceptId> = ["Fabian", "Simon", "Dawn"].iter().map(|n| g.add_concept(n).unwrap()).collect();
        g.associate(ids[0], alias, ids[1], [""; 0], Provenance::Reported).unwrap();
        g.associate(ids[1], alias, ids[2], [""; 0], Provenance::Reported).unwrap();
        (g, ids[0])
    };
    let (mut g, fabian) = build("is father to", false);
    let pinned = two_hop_stories(&g, fabian);
    ensure!(pinned == 0, "{pinned} two-hop stories through a pinned alias");
    g.register_alias("is father to", father, true, None).unwrap();
    let released = two_hop_stories(&g, fabian);
    ensure!(released == 1, "{released} two-hop stories after re-registering");
    let (source, fabian) = build("is source of", true);
    let chained = two_hop_stories(&source, fabian);
    ensure!(chained == 1, "{chained} two-hop stories with \"is source of\"");
    Ok("0 pinned, 1 propagating".into())
}

fn context_switching() -> Outcome {
    let mut g = Graph::with_standard_aliases();
    let hot = g.add_concept("Hot").unwrap();
    let spain = g.add_concept("Spain").unwrap();
    let edge = g
        .associate(hot, "characterizes", spain, ["weather"], Provenance::Reported)
        .unwrap();
    let food = ContextState::from_tokens(["food"]);
    let weather = ContextState::from_tokens(["weather"]);
    for round in 0..4 {
        ensure!(!g.active_view(&food).contains(edge), "visible under food (round {round})");
        ensure!(g.active_view(&weather).contains(edge), "hidden under weather (round {round})");
        let with = story_search(&g, hot, StoryMode::Narrative, 3, &weather, 5).unwrap();
        let without = story_search(&g, hot, StoryMode::Narrative, 3, &food, 5).unwrap();
        ensure!(with.len() == 1 && with[0].conclusion() == spain, "no story under weather");
        ensure!(without.is_empty(), "story under food");
    }
    Ok("toggles over 4 rounds".into())
}

fn entropy_identities() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    for i in 0..1000 {
        let n = rng.gen_range(1..=32);
        let mut w: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen() }).collect();
        if w.iter().all(|x| *x == 0.0) {
            w[0] = 1.0;
        }
        let d = Distribution::from_weights(&w).unwrap();
        let max = (n as f64).log2();
        let s = shannon_entropy(&d, 2.0).unwrap();
        let sig = significance(&d, n).unwrap();
        ensure!((0.0..=max + TOL).contains(&s), "entropy {s} outside [0, {max}] at {i}");
        ensure!((s + sig - max).abs() < TOL, "entropy + significance = {} at {i}", s + sig);
    }
    for n in 1..=32usize {
        let uniform = Distribution::new(vec![1.0 / n as f64; n]).unwrap();
        ensure!(significance(&uniform, n).unwrap().abs() < TOL, "uniform over {n}");
        let mut point = vec![0.0; n];
        point[n - 1] = 1.0;
        let point = Distribution::new(point).unwrap();
        let sig = significance(&point, n).unwrap();
        ensure!((sig - (n as f64).log2()).abs() < TOL, "degenerate over {n}");
    }
    Ok("1000 random + 32 uniform/degenerate".into())
}

fn co_activation() -> Outcome {
    for k in 0..=8usize {
        let mut g = Graph::with_standard_aliases();
        let ids: Vec<ConceptId> = (0..k).map(|i| g.add_concept(&format!("c{i}")).unwrap()).collect();
        let interval = ConcurrentInterval::new(0, ids.iter().copied());
        let state = ContextState::from_tokens(["desk"]);
        let touched = co_activate(&mut g, &interval, &state).unwrap();

        let mut expected = BTreeSet::new();
        for a in &ids {
            for b in &ids {
                if a < b {
                    expected.insert((*a, *b));
                }
            }
        }
        let got: BTreeSet<(ConceptId, ConceptId)> = g
            .associations()
            .map(|a| (a.from.min(a.to), a.from.max(a.to)))
            .collect();
        ensure!(expected.len() == k * (k.max(1) - 1) / 2, "brute force miscounted for k={k}");
        ensure!(got == expected && touched.len() == expected.len(), "pairs differ for k={k}");
        ensure!(
            g.associations().all(|a| g.sttype_of(a) == StType::forward(Kind::Near)),
            "non-NEAR co-activation edge for k={k}"
        );

        let before: Vec<f64> = g.associations().map(|a| a.weight).collect();
        co_activate(&mut g, &interval, &state).unwrap();
        let after: Vec<f64> = g.associations().map(|a| a.weight).collect();
        ensure!(after.len() == before.len(), "repeat added edges for k={k}");
        ensure!(
            before.iter().zip(&after).all(|(b, a)| a > b && *a <= 1.0),
            "repeat did not raise weights for k={k}"
        );
    }
    Ok("k = 0..8".into())
}

const ALIASES: [&str; 8] = [
    "contains",
    "is a part of",
    "depends on",
    "is close to",
    "characterizes",
    "does not generalize",
    "is similar to",
    "custom link",
];

fn random_kb(rng: &mut StdRng) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new(Graph::with_standard_aliases());
    let ops = rng.gen_range(1..=200);
    for _ in 0..ops {
        let g = &mut kb.graph;
        let ids: Vec<ConceptId> = g.concepts().map(|c| c.id).collect();
        let pick = |rng: &mut StdRng| ids[rng.gen_range(0..ids.len())];
        match rng.gen_range(0..10) {
            0 | 1 => {
                g.add_concept(&format!("concept {}", rng.gen_range(0..40))).unwrap();
            }
            2 | 3 if ids.len() >= 2 => {
                let (a, b) = (pick(rng), pick(rng));
                let alias = ALIASES[rng.gen_range(0..ALIASES.len())];
                let ctx: Vec<String> = (0..rng.gen_range(0..3)).map(|i| format!("t{i}")).collect();
                // self-loops and unregistered aliases are rejected without side effects
                let _ = g.associate(a, alias, b, &ctx, Provenance::Reported);
            }
            4 if !ids.is_empty() && rng.gen_bool(0.3) => {
                g.remove_concept(pick(rng)).unwrap();
            }
            5 => g.advance(rng.gen_range(0..5)),
            6 => {
                let live: Vec<_> = g.associations().map(|a| a.id).collect();
                if !live.is_empty() {
                    let id = live[rng.gen_range(0..live.len())];
                    if rng.gen_bool(0.5) {
                        g.reinforce_now(id).unwrap();
                    } else {
                        g.set_weight(id, rng.gen()).unwrap();
                    }
                }
            }
            7 if ids.len() >= 2 => {
                let members: Vec<ConceptId> = (0..rng.gen_range(2..5)).map(|_| pick(rng)).collect();
                let interval = ConcurrentInterval::new(g.now(), members);
                co_activate(g, &interval, &kb.context).unwrap();
            }
            8 => {
                let tokens: Vec<String> = (0..rng.gen_range(0..3)).map(|_| format!("t{}", rng.gen_range(0..6))).collect();
                kb.context.observe(tokens, 0.5).unwrap();
            }
            9 => {
                if rng.gen_bool(0.5) {
                    g.anneal(rng.gen()).unwrap();
                } else {
                    let _ = g.register_alias("custom link", StType::reciprocal(Kind::Follows), rng.gen(), Some("custom back"));
                }
            }
            _ => {}
        }
    }
    kb
}

fn persistence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("kb.jsonl");
    let mut records = 0;
    for i in 0..100 {
        let kb = random_kb(&mut rng);
        records += kb.save(&path).map_err(|e| e.to_string())?;
        let first = std::fs::read(&path).unwrap();
        let back = KnowledgeBase::load(&path).map_err(|e| format!("sequence {i}: {e}"))?;
        ensure!(back == kb, "sequence {i}: loaded knowledge base differs");
        back.save(&path).unwrap();
        ensure!(std::fs::read(&path).unwrap() == first, "sequence {i}: re-save not byte-identical");
    }
    Ok(format!("100 sequences, {records} records"))
}

/// Every maximal simple path from `start` along directed edges, with its
/// weight list. Independent of the library's search.
fn enumerate_paths(edges: &[(usize, usize, f64)], start: usize) -> Vec<(Vec<usize>, Vec<f64>)> {
    fn go(
        edges: &[(usize, usize, f64)],
        path: &mut Vec<usize>,
        weights: &mut Vec<f64>,
        out: &mut Vec<(Vec<usize>, Vec<f64>)>,
    ) {
        let here = *path.last().unwrap();
        let mut extended = false;
        for &(a, b, w) in edges {
            if a == here && !path.contains(&b) {
                extended = true;
                path.push(b);
                weights.push(w);
                go(edges, path, weights, out);
                path.pop();
                weights.pop();
            }
        }
        if !extended && path.len() > 1 {
            out.push((path.clone(), weights.clone()));
        }
    }
    let mut out = Vec::new();
    go(edges, &mut vec![start], &mut Vec::new(), &mut out);
    out
}

fn chained_certainty() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut checked = 0;
    for _ in 0..200 {
        let len = rng.gen_range(1..=6);
        let beta = rng.gen_range(0.05..0.95);
        let mut g = Graph::with_standard_aliases();
        g.set_params(LearningParams::new(0.9, beta).unwrap());
        let ids: Vec<ConceptId> = (0..=len).map(|i| g.add_concept(&format!("n{i}")).unwrap()).collect();
        let mut edges = Vec::new();
        for i in 0..len {
            let w: f64 = rng.gen_range(0.01..=1.0);
            let id = g.associate(ids[i], "contains", ids[i + 1], [""; 0], Provenance::Reported).unwrap();
            g.set_weight(id, w).unwrap();
            edges.push((i, i + 1, w));
        }
        let oracle = enumerate_paths(&edges, 0);
        ensure!(oracle.len() == 1, "oracle found {} paths", oracle.len());
        let (path, weights) = &oracle[0];
        let expected = weights.iter().product::<f64>() * beta.powi(weights.len() as i32);

        let stories = story_search(&g, ids[0], StoryMode::Strict, 6, &ContextState::default(), 10).unwrap();
        ensure!(stories.len() == 1, "{} strict stories on a chain", stories.len());
        let got: Vec<usize> = stories[0].concepts().iter().map(|c| c.0 as usize).collect();
        ensure!(&got == path, "path {got:?} vs {path:?}");
        ensure!(
            (stories[0].certainty - expected).abs() < TOL,
            "certainty {} vs {expected}",
            stories[0].certainty
        );
        checked += 1;
    }
    Ok(format!("{checked} random chains"))
}
