//! Concept graphs whose associations carry one of four irreducible types,
//! switched on and off by a decaying context, weighted by iterated learning,
//! and read back as stories.
//!
//! ```
//! use semspace::{story_search, ContextState, Graph, Provenance, StoryMode};
//!
//! let mut g = Graph::with_standard_aliases();
//! let a = g.add_concept("house").unwrap();
//! let b = g.add_concept("kitchen").unwrap();
//! let c = g.add_concept("oven").unwrap();
//! let ab = g.associate(a, "contains", b, [""; 0], Provenance::Reported).unwrap();
//! let bc = g.associate(b, "contains", c, [""; 0], Provenance::Reported).unwrap();
//! g.set_weight(ab, 1.0).unwrap();
//! g.set_weight(bc, 1.0).unwrap();
//!
//! let stories = story_search(&g, a, StoryMode::Strict, 4, &ContextState::default(), 5).unwrap();
//! assert_eq!(stories[0].render(&g), "house -(contains)-> kitchen -(contains)-> oven");
//! assert!((stories[0].certainty - 0.5625).abs() < 1e-12);
//! ```

pub mod alias;
pub mod context;
pub mod coordinatizer;
pub mod error;
pub mod graph;
pub mod inference;
pub mod learning;
pub mod store;
pub mod sttype;

pub use alias::{standard_aliases, Alias, AliasRegistry};
pub use context::{
    co_activate, context_knowledge_ratio, time_key, ActiveView, ConcurrentInterval, ContextState, EpochClock,
    KnowledgeRatio,
};
pub use coordinatizer::{
    coordinatize, doc_to_graph, ingest_annotations, render_regions, AnnotationTriple, Dialect, Region,
    RegionCoord, TokenEvent,
};
pub use error::{Error, Result};
pub use graph::{
    AssocId, Association, Concept, ConceptId, Graph, InitialWeights, NeighborFilter, Provenance, Reading,
};
pub use inference::{
    abduce, answer, certainty, deduce, equivalent, explain, induce, lateral, story_search, Query, Story,
    StoryMode,
};
pub use learning::{
    decay_factor, hamming, hamming_str, hop_distance, learn_update, nyquist_ok, shannon_entropy, significance,
    Distribution, LearningParams,
};
pub use store::{KbRecord, KnowledgeBase};
pub use sttype::{negate_type, reciprocal_of, Direction, Kind, StType};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/types.md")]
    mod types {}
    #[doc = include_str!("../../../book/src/context.md")]
    mod context {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/stories.md")]
    mod stories {}
    #[doc = include_str!("../../../book/src/coordinates.md")]
    mod coordinates {}
    #[doc = include_str!("../../../book/src/shell.md")]
    mod shell {}
}
