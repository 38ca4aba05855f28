//! `kb`: a command-line shell over a semspace store file.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use semspace::context::co_activate;
use semspace::coordinatizer::{coordinatize, parse_annotation};
use semspace::inference::{abduce, answer, deduce, explain, induce, lateral, story_search, Query, Story};
use semspace::{
    context_knowledge_ratio, doc_to_graph, ingest_annotations, render_regions, ConcurrentInterval, Dialect,
    Direction, Graph, Kind, KnowledgeBase, Provenance, StType, StoryMode,
};

#[derive(Parser)]
#[command(name = "kb", version, about = "Build and query a semantic-spacetime knowledge store")]
struct Cli {
    /// Store file.
    #[arg(long, global = true, env = "KB_STORE", default_value = "kb.jsonl")]
    store: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a store seeded with the standard aliases.
    Init {
        /// Store file; overrides --store.
        path: Option<PathBuf>,
        /// Replace an existing store.
        #[arg(long)]
        force: bool,
    },
    #[command(subcommand)]
    Concept(ConceptCmd),
    #[command(subcommand)]
    Alias(AliasCmd),
    #[command(subcommand)]
    Assoc(AssocCmd),
    #[command(subcommand)]
    Ingest(IngestCmd),
    /// Print the region listing of a document without touching the store.
    Coordinatize {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        dialect: DialectArg,
    },
    #[command(subcommand)]
    Context(ContextCmd),
    /// Advance the clock.
    Tick {
        #[arg(default_value_t = 1)]
        n: u64,
    },
    /// Stories told from a concept.
    Story {
        concept: String,
        #[arg(long, value_enum, default_value = "narrative")]
        mode: ModeArg,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 5)]
        limit: usize,
    },
    /// Stories visiting every listed concept.
    Answer {
        /// Comma-separated concept names.
        concepts: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Stories converging on a concept.
    Explain {
        concept: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Generalizations of a concept.
    Induce { concept: String },
    /// Exemplars and properties of a concept.
    Deduce { concept: String },
    /// Concepts characterized by the given comma-separated tokens.
    Abduce { tokens: String },
    /// Similar or nearby concepts.
    Lateral { concept: String },
    /// Associations of a concept, read from its side.
    Neighbors { concept: String },
    /// Record that the listed concepts were seen together now.
    Coactivate { concepts: String },
    /// Counts and entropies.
    Stats,
    /// Smooth association weights towards their neighbors.
    Anneal {
        #[arg(long)]
        lambda: f64,
    },
    /// Reinforce one association at the current tick.
    Reinforce { id: u64 },
}

#[derive(Subcommand)]
enum ConceptCmd {
    Add { name: String },
    Rm { name: String },
    List,
}

#[derive(Subcommand)]
enum AliasCmd {
    Add(AliasAdd),
    List,
}

#[derive(Args)]
struct AliasAdd {
    name: String,
    #[arg(long = "type", value_enum)]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "fwd")]
    dir: DirArg,
    #[arg(long)]
    negated: bool,
    /// Never chain this alias beyond a single hop.
    #[arg(long)]
    no_propagate: bool,
    /// Name for reading the association from the other end.
    #[arg(long)]
    reciprocal: Option<String>,
}

#[derive(Subcommand)]
enum AssocCmd {
    /// Add one association written as "(A) alias (B)".
    Add {
        line: String,
        /// Comma-separated context tokens.
        #[arg(long)]
        context: Option<String>,
    },
}

#[derive(Subcommand)]
enum IngestCmd {
    /// One "(A) alias (B)" line per association.
    Annotations { file: PathBuf },
    /// A structured document, as a tree of region concepts.
    Doc {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        dialect: DialectArg,
        /// Concept-name prefix; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Subcommand)]
enum ContextCmd {
    /// Replace the context with the given comma-separated tokens.
    Set { tokens: String },
    /// Decay the context and refresh the given tokens.
    Observe {
        tokens: String,
        #[arg(long, default_value_t = 0.5)]
        retention: f64,
    },
    Show,
    Clear,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Json,
    Mixed,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Self {
        match d {
            DialectArg::Json => Dialect::JsonLike,
            DialectArg::Mixed => Dialect::MixedMarkup,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Narrative,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Near,
    Follows,
    Contains,
    Expresses,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    Fwd,
    Recip,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<String> {
    let store = cli.store;
    match cli.command {
        Command::Init { path, force } => {
            let path = path.unwrap_or(store);
            if path.exists() && !force {
                bail!("{} already exists (use --force to replace it)", path.display());
            }
            let _lock = Lock::acquire(&path)?;
            let n = KnowledgeBase::new(Graph::with_standard_aliases()).save(&path)?;
            Ok(format!("initialized {} ({n} records)\n", path.display()))
        }
        Command::Coordinatize { file, dialect } => {
            let text = read(&file)?;
            Ok(render_regions(&coordinatize(&text, dialect.into())?))
        }
        Command::Concept(ConceptCmd::List) => {
            let kb = load(&store)?;
            Ok(kb.graph.concepts().map(|c| format!("{}\t{}\n", c.id.0, c.name)).collect())
        }
        Command::Alias(AliasCmd::List) => {
            let kb = load(&store)?;
            Ok(kb
                .graph
                .aliases()
                .iter()
                .map(|a| {
                    let pin = if a.propagating { "" } else { "\tno-propagate" };
                    format!("{}\t{}{}\n", a.name, a.sttype, pin)
                })
                .collect())
        }
        Command::Context(ContextCmd::Show) => {
            let kb = load(&store)?;
            Ok(kb.context.entries().map(|(t, w)| format!("{t}\t{w:.6}\n")).collect())
        }
        Command::Story {
            concept,
            mode,
            depth,
            limit,
        } => {
            let kb = load(&store)?;
            let c = kb.graph.lookup(&concept)?;
            let mode = match mode {
                ModeArg::Strict => StoryMode::Strict,
                ModeArg::Narrative => StoryMode::Narrative,
            };
            let stories = story_search(&kb.graph, c, mode, depth, &kb.context, limit)?;
            Ok(render_stories(&kb.graph, &stories))
        }
        Command::Answer { concepts, depth } => {
            let kb = load(&store)?;
            let ids = split_list(&concepts)
                .iter()
                .map(|n| kb.graph.lookup(n))
                .collect::<semspace::Result<Vec<_>>>()?;
            let q = Query::new(ids, kb.context.clone())?;
            Ok(render_stories(&kb.graph, &answer(&kb.graph, &q, depth)?))
        }
        Command::Explain { concept, depth } => {
            let kb = load(&store)?;
            let c = kb.graph.lookup(&concept)?;
            Ok(render_stories(&kb.graph, &explain(&kb.graph, c, depth, &kb.context)?))
        }
        Command::Induce { concept } => ranked(&store, &concept, induce),
        Command::Deduce { concept } => ranked(&store, &concept, deduce),
        Command::Lateral { concept } => ranked(&store, &concept, lateral),
        Command::Abduce { tokens } => {
            let kb = load(&store)?;
            let found = abduce(&kb.graph, &split_list(&tokens), &kb.context)?;
            Ok(render_ranked(&kb.graph, &found))
        }
        Command::Neighbors { concept } => {
            let kb = load(&store)?;
            let c = kb.graph.lookup(&concept)?;
            Ok(kb
                .graph
                .neighbors(c, None)?
                .iter()
                .map(|r| {
                    format!(
                        "{}\t{} -({})-> {}\t{:.6}\n",
                        r.assoc,
                        kb.graph.name(r.from),
                        r.label,
                        kb.graph.name(r.to),
                        r.weight
                    )
                })
                .collect())
        }
        Command::Stats => {
            let kb = load(&store)?;
            let r = context_knowledge_ratio(&kb.graph, &kb.context);
            let ratio = r.ratio.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"));
            Ok(format!(
                "concepts\t{}\nassociations\t{}\ncontext tokens\t{}\ntick\t{}\nS_C\t{:.6}\nS_A\t{:.6}\nS_C/S_A\t{}\n",
                kb.graph.concept_count(),
                kb.graph.association_count(),
                kb.context.len(),
                kb.graph.now(),
                r.context_entropy,
                r.association_entropy,
                ratio
            ))
        }
        command => mutate(&store, |kb| apply(kb, command)),
    }
}

/// Commands that change the store.
fn apply(kb: &mut KnowledgeBase, command: Command) -> Result<String> {
    let g = &mut kb.graph;
    Ok(match command {
        Command::Concept(ConceptCmd::Add { name }) => {
            let id = g.add_concept(&name)?;
            format!("{}\t{}\n", id.0, g.name(id))
        }
        Command::Concept(ConceptCmd::Rm { name }) => {
            let id = g.lookup(&name)?;
            let n = g.remove_concept(id)?;
            format!("removed {name} ({n} associations)\n")
        }
        Command::Alias(AliasCmd::Add(a)) => {
            let kind = match a.kind {
                KindArg::Near => Kind::Near,
                KindArg::Follows => Kind::Follows,
                KindArg::Contains => Kind::Contains,
                KindArg::Expresses => Kind::Expresses,
            };
            let dir = match a.dir {
                DirArg::Fwd => Direction::Forward,
                DirArg::Recip => Direction::Reciprocal,
            };
            let alias = g.register_alias(
                &a.name,
                StType::new(kind, dir, a.negated),
                !a.no_propagate,
                a.reciprocal.as_deref(),
            )?;
            format!("{}\t{}\n", alias.name, alias.sttype)
        }
        Command::Assoc(AssocCmd::Add { line, context }) => {
            let Some(t) = parse_annotation(&line)? else {
                bail!("empty association");
            };
            g.alias(&t.alias)?;
            let from = g.add_concept(&t.from)?;
            let to = g.add_concept(&t.to)?;
            let mut contexts = t.contexts;
            contexts.extend(context.as_deref().map(split_list).unwrap_or_default());
            let id = g.associate(from, &t.alias, to, &contexts, Provenance::Reported)?;
            format!("{id}\t{:.6}\n", g.association(id)?.weight)
        }
        Command::Ingest(IngestCmd::Annotations { file }) => {
            let n = ingest_annotations(&read(&file)?, g)?;
            format!("added {n} associations\n")
        }
        Command::Ingest(IngestCmd::Doc { file, dialect, name }) => {
            let regions = coordinatize(&read(&file)?, dialect.into())?;
            let name = match name {
                Some(n) => n,
                None => file
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .context("cannot derive a document name; pass --name")?
                    .to_string(),
            };
            let n = doc_to_graph(&regions, g, &name)?;
            format!("added {n} concepts and associations\n")
        }
        Command::Context(ContextCmd::Set { tokens }) => {
            kb.context.set(split_list(&tokens));
            context_line(kb)
        }
        Command::Context(ContextCmd::Observe { tokens, retention }) => {
            kb.context.observe(split_list(&tokens), retention)?;
            context_line(kb)
        }
        Command::Context(ContextCmd::Clear) => {
            kb.context.clear();
            String::new()
        }
        Command::Tick { n } => {
            g.advance(n);
            format!("{}\n", g.now())
        }
        Command::Coactivate { concepts } => {
            let ids = split_list(&concepts)
                .iter()
                .map(|n| g.lookup(n))
                .collect::<semspace::Result<Vec<_>>>()?;
            let interval = ConcurrentInterval::new(g.now(), ids);
            let touched = co_activate(g, &interval, &kb.context)?;
            format!("touched {} associations\n", touched.len())
        }
        Command::Anneal { lambda } => {
            let n = g.anneal(lambda)?;
            format!("adjusted {n} associations\n")
        }
        Command::Reinforce { id } => {
            let w = g.reinforce_now(semspace::AssocId(id))?;
            format!("{id}\t{w:.6}\n")
        }
        _ => unreachable!("read-only commands are handled by run"),
    })
}

fn context_line(kb: &KnowledgeBase) -> String {
    let tokens: Vec<String> = kb.context.tokens().into_iter().collect();
    format!("{}\n", tokens.join(","))
}

fn ranked(
    store: &Path,
    concept: &str,
    op: fn(&Graph, semspace::ConceptId, &semspace::ContextState) -> semspace::Result<Vec<(semspace::ConceptId, f64)>>,
) -> Result<String> {
    let kb = load(store)?;
    let c = kb.graph.lookup(concept)?;
    Ok(render_ranked(&kb.graph, &op(&kb.graph, c, &kb.context)?))
}

fn render_ranked(g: &Graph, found: &[(semspace::ConceptId, f64)]) -> String {
    found.iter().map(|(c, w)| format!("{w:.6}\t{}\n", g.name(*c))).collect()
}

fn render_stories(g: &Graph, stories: &[Story]) -> String {
    stories
        .iter()
        .map(|s| format!("{:.6}\t{}\n", s.certainty, s.render(g)))
        .collect()
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(store: &Path) -> Result<KnowledgeBase> {
    if !store.exists() {
        bail!("no store at {} (run `kb init` first)", store.display());
    }
    Ok(KnowledgeBase::load(store)?)
}

/// Loads, applies `f`, and saves only if `f` succeeds.
fn mutate(store: &Path, f: impl FnOnce(&mut KnowledgeBase) -> Result<String>) -> Result<String> {
    let _lock = Lock::acquire(store)?;
    let mut kb = load(store)?;
    let out = f(&mut kb)?;
    kb.save(store)?;
    Ok(out)
}

/// Exclusive lock held as a sibling `.lock` file.
struct Lock(PathBuf);

impl Lock {
    fn acquire(store: &Path) -> Result<Self> {
        let mut name = store.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .with_context(|| format!("store is locked ({} exists)", path.display()))?;
        Ok(Lock(path))
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}
