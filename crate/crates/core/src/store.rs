//! Line-delimited JSON persistence.
//!
//! A store file holds one self-describing record per line: a single `meta`
//! record first, then aliases by name, concepts by id, associations by id
//! (tombstones included) and context tokens by name. Saving the same
//! knowledge base twice yields identical bytes.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alias::Alias;
use crate::context::{ContextState, EpochClock};
use crate::error::{Error, Result};
use crate::graph::{check_unit, Association, Concept, Graph, InitialWeights};
use crate::learning::LearningParams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KbRecord {
    Meta {
        version: u32,
        tick: u64,
        t_max: u64,
        ell: f64,
        beta: f64,
        initial: InitialWeights,
        next_concept: u64,
        next_assoc: u64,
        context_capacity: usize,
    },
    Alias(Alias),
    Concept(Concept),
    Assoc(Association),
    Context { token: String, weight: f64 },
}

/// The long-term graph together with the current context.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    pub graph: Graph,
    pub context: ContextState,
}

impl KnowledgeBase {
    pub fn new(graph: Graph) -> Self {
        KnowledgeBase {
            graph,
            context: ContextState::default(),
        }
    }

    pub fn to_records(&self) -> Vec<KbRecord> {
        let g = &self.graph;
        let mut out = vec![KbRecord::Meta {
            version: FORMAT_VERSION,
            tick: g.clock.now(),
            t_max: g.clock.modulus(),
            ell: g.params.ell,
            beta: g.params.beta,
            initial: g.initial,
            next_concept: g.next_concept,
            next_assoc: g.next_assoc,
            context_capacity: self.context.capacity(),
        }];
        out.extend(g.aliases.iter().cloned().map(KbRecord::Alias));
        out.extend(g.concepts.values().cloned().map(KbRecord::Concept));
        out.extend(g.assocs.values().cloned().map(KbRecord::Assoc));
        out.extend(self.context.entries().map(|(token, weight)| KbRecord::Context {
            token: token.to_string(),
            weight,
        }));
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in self.to_records() {
            out.push_str(&serde_json::to_string(&r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut loader = Loader::default();
        let mut lines = 0;
        for (i, line) in text.lines().enumerate() {
            lines = i + 1;
            if line.trim().is_empty() {
                return Err(record_error(lines, "blank line"));
            }
            let record: KbRecord = serde_json::from_str(line)
                .map_err(|e| record_error(lines, &e.to_string()))?;
            loader.accept(record).map_err(|m| record_error(lines, &m))?;
        }
        loader.finish().map_err(|m| record_error(lines.max(1), &m))
    }

    /// Writes atomically: a sibling temporary file replaces `path` only
    /// once fully written. Returns the number of records.
    pub fn save(&self, path: &Path) -> Result<usize> {
        let records = self.to_records().len();
        let text = self.to_text();
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(text.as_bytes()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(records)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }
}

/// Saves a graph with an empty context.
pub fn save(graph: &Graph, path: &Path) -> Result<usize> {
    KnowledgeBase::new(graph.clone()).save(path)
}

/// Loads the graph part of a store.
pub fn load(path: &Path) -> Result<Graph> {
    KnowledgeBase::load(path).map(|kb| kb.graph)
}

fn record_error(line: usize, message: &str) -> Error {
    Error::Record {
        line,
        message: message.to_string(),
    }
}

#[derive(Default)]
struct Loader {
    kb: Option<KnowledgeBase>,
    seen_tokens: BTreeSet<String>,
}

impl Loader {
    fn kb(&mut self) -> std::result::Result<&mut KnowledgeBase, String> {
        self.kb
            .as_mut()
            .ok_or_else(|| "store must begin with a meta record".to_string())
    }

    fn accept(&mut self, record: KbRecord) -> std::result::Result<(), String> {
        match record {
            KbRecord::Meta {
                version,
                tick,
                t_max,
                ell,
                beta,
                initial,
                next_concept,
                next_assoc,
                context_capacity,
            } => {
                if self.kb.is_some() {
                    return Err("duplicate meta record".into());
                }
                if version != FORMAT_VERSION {
                    return Err(format!("unsupported store version {version}"));
                }
                let mut graph = Graph::new();
                graph.clock = EpochClock::at(tick, t_max).map_err(|e| e.to_string())?;
                graph.params = LearningParams::new(ell, beta).map_err(|e| e.to_string())?;
                graph.set_initial_weights(initial).map_err(|e| e.to_string())?;
                graph.next_concept = next_concept;
                graph.next_assoc = next_assoc;
                self.kb = Some(KnowledgeBase {
                    graph,
                    context: ContextState::new(context_capacity),
                });
            }
            KbRecord::Alias(alias) => {
                let g = &mut self.kb()?.graph;
                if alias.name.trim() != alias.name || alias.name.is_empty() {
                    return Err(format!("malformed alias name {:?}", alias.name));
                }
                if g.aliases.get(&alias.name).is_some() {
                    return Err(format!("duplicate alias {:?}", alias.name));
                }
                g.aliases.insert_raw(alias);
            }
            KbRecord::Concept(c) => {
                let g = &mut self.kb()?.graph;
                if c.id.0 >= g.next_concept {
                    return Err(format!("concept id {} beyond next id {}", c.id.0, g.next_concept));
                }
                if g.concepts.contains_key(&c.id) {
                    return Err(format!("duplicate concept id {}", c.id.0));
                }
                if c.name.trim() != c.name || c.name.is_empty() || g.names.contains_key(&c.name) {
                    return Err(format!("bad or duplicate concept name {:?}", c.name));
                }
                g.names.insert(c.name.clone(), c.id);
                g.concepts.insert(c.id, c);
            }
            KbRecord::Assoc(a) => {
                let g = &mut self.kb()?.graph;
                if a.id.0 >= g.next_assoc || g.assocs.contains_key(&a.id) {
                    return Err(format!("bad or duplicate association id {}", a.id.0));
                }
                check_unit(a.weight, "weight").map_err(|e| e.to_string())?;
                if a.from == a.to {
                    return Err("association from a concept to itself".into());
                }
                if a.live {
                    for end in [a.from, a.to] {
                        if !g.concepts.contains_key(&end) {
                            return Err(format!("association {} names unknown concept {}", a.id.0, end.0));
                        }
                    }
                    if g.aliases.get(&a.alias).is_none() {
                        return Err(format!("association {} uses unknown alias {:?}", a.id.0, a.alias));
                    }
                    let key = (a.from, a.to, a.alias.clone(), a.contexts.clone());
                    if g.keys.insert(key, a.id).is_some() {
                        return Err(format!("association {} duplicates an earlier key", a.id.0));
                    }
                }
                g.assocs.insert(a.id, a);
            }
            KbRecord::Context { token, weight } => {
                if !(weight > 0.0 && weight <= 1.0) {
                    return Err(format!("context weight {weight} outside (0, 1]"));
                }
                if token.is_empty() || token != token.trim().to_lowercase() || !self.seen_tokens.insert(token.clone()) {
                    return Err(format!("bad or duplicate context token {token:?}"));
                }
                self.kb()?.context.insert_raw(token, weight);
            }
        }
        Ok(())
    }

    fn finish(self) -> std::result::Result<KnowledgeBase, String> {
        let kb = self.kb.ok_or("store has no meta record")?;
        if kb.context.len() > kb.context.capacity() {
            return Err("more context tokens than capacity".into());
        }
        Ok(kb)
    }
}
