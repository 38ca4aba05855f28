//! The one-line annotation grammar:
//!
//! ```text
//! (result) depends on (text)
//! (Hot) characterizes (Spain) in context: weather, climate
//! # comment
//! ```

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{normalize_tokens, Graph, Provenance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationTriple {
    pub from: String,
    pub alias: String,
    pub to: String,
    pub contexts: Vec<String>,
}

impl FromStr for AnnotationTriple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_annotation(s)?.ok_or_else(|| Error::invalid("line holds no annotation"))
    }
}

const CONTEXT_MARKER: &str = "in context:";

/// Parses one line. Blank and comment-only lines yield `None`.
pub fn parse_annotation(line: &str) -> Result<Option<AnnotationTriple>> {
    let line = strip_comment(line).trim();
    if line.is_empty() {
        return Ok(None);
    }
    let rest = line
        .strip_prefix('(')
        .ok_or_else(|| Error::invalid("expected '(' to open the first concept"))?;
    let (from, rest) = rest
        .split_once(')')
        .ok_or_else(|| Error::invalid("first concept is not closed by ')'"))?;
    let (alias, rest) = rest
        .split_once('(')
        .ok_or_else(|| Error::invalid("expected '(' to open the second concept"))?;
    let (to, rest) = rest
        .split_once(')')
        .ok_or_else(|| Error::invalid("second concept is not closed by ')'"))?;

    let (from, alias, to) = (from.trim(), alias.trim(), to.trim());
    for (what, value) in [("first concept", from), ("alias", alias), ("second concept", to)] {
        if value.is_empty() {
            return Err(Error::invalid(format!("{what} is empty")));
        }
    }

    let rest = rest.trim();
    let contexts = if rest.is_empty() {
        Vec::new()
    } else if let Some(list) = rest.strip_prefix(CONTEXT_MARKER) {
        let tokens: Vec<String> = normalize_tokens(list.split(',')).into_iter().collect();
        if tokens.is_empty() {
            return Err(Error::invalid("context list is empty"));
        }
        tokens
    } else {
        return Err(Error::invalid(format!("unexpected trailing text {rest:?}")));
    };

    Ok(Some(AnnotationTriple {
        from: from.to_string(),
        alias: alias.to_string(),
        to: to.to_string(),
        contexts,
    }))
}

/// Cuts the line at the first `#` outside parentheses.
fn strip_comment(line: &str) -> &str {
    let mut depth = 0usize;
    for (i, c) in line.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '#' if depth == 0 => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Adds one reported association per annotation line, creating concepts
/// as needed. Returns the number of associations created; lines repeating
/// an existing association reinforce it instead.
///
/// Every line is checked before the graph is touched, so a bad line leaves
/// the graph unchanged. Errors carry the 1-based line number.
pub fn ingest_annotations(text: &str, graph: &mut Graph) -> Result<usize> {
    let mut triples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let Some(t) = parse_annotation(line).map_err(|e| e.at_line(lineno))? else {
            continue;
        };
        graph.alias(&t.alias).map_err(|e| e.at_line(lineno))?;
        if t.from == t.to {
            return Err(Error::invalid(format!("association from {} to itself", t.from)).at_line(lineno));
        }
        triples.push(t);
    }

    let mut added = 0;
    for t in triples {
        let from = graph.add_concept(&t.from)?;
        let to = graph.add_concept(&t.to)?;
        let before = graph.association_count();
        graph.associate(from, &t.alias, to, &t.contexts, Provenance::Reported)?;
        added += graph.association_count() - before;
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sttype::{Direction, Kind};

    #[test]
    fn parse_plain_and_context() {
        let t: AnnotationTriple = "(result) depends on (text)".parse().unwrap();
        assert_eq!((t.from.as_str(), t.alias.as_str(), t.to.as_str()), ("result", "depends on", "text"));
        assert!(t.contexts.is_empty());
        let t = parse_annotation("  (Hot) characterizes (Spain) in context: Weather, climate # note")
            .unwrap()
            .unwrap();
        assert_eq!(t.contexts, vec!["climate", "weather"]);
    }

    #[test]
    fn blank_and_comment_lines() {
        assert_eq!(parse_annotation("").unwrap(), None);
        assert_eq!(parse_annotation("   # just a comment").unwrap(), None);
    }

    #[test]
    fn malformed_lines() {
        for bad in [
            "result depends on (text)",
            "(result depends on (text)",
            "(result) depends on text",
            "(result) depends on (text",
            "() depends on (text)",
            "(result) (text)",
            "(result) depends on (text) because",
            "(result) depends on (text) in context: ,",
        ] {
            assert!(parse_annotation(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ingest_examples() {
        let mut g = Graph::with_standard_aliases();
        let n = ingest_annotations(
            "# structure notes\n(result) depends on (text)\n\n(animal_of_the_day) is a member of (string)\n",
            &mut g,
        )
        .unwrap();
        assert_eq!(n, 2);
        let result = g.lookup("result").unwrap();
        let reading = &g.neighbors(result, None).unwrap()[0];
        assert_eq!(reading.sttype.kind(), Kind::Follows);
        let animal = g.lookup("animal_of_the_day").unwrap();
        let reading = &g.neighbors(animal, None).unwrap()[0];
        assert_eq!(reading.sttype.kind(), Kind::Contains);
        assert_eq!(reading.sttype.direction(), Direction::Reciprocal);
        assert_eq!(ingest_annotations("\n# nothing\n", &mut g).unwrap(), 0);
    }

    #[test]
    fn reingest_adds_nothing() {
        let text = "(a) contains (b)\n(b) depends on (c) in context: x\n";
        let mut g = Graph::with_standard_aliases();
        assert_eq!(ingest_annotations(text, &mut g).unwrap(), 2);
        let w = g.associations().next().unwrap().weight;
        assert_eq!(ingest_annotations(text, &mut g).unwrap(), 0);
        assert_eq!(g.association_count(), 2);
        assert!(g.associations().next().unwrap().weight > w);
    }

    #[test]
    fn errors_carry_line_numbers_and_leave_graph_alone() {
        let mut g = Graph::with_standard_aliases();
        let err = ingest_annotations("(a) contains (b)\n(a) frobnicates (b)\n", &mut g).unwrap_err();
        match err {
            Error::AtLine { line, source } => {
                assert_eq!(line, 2);
                assert!(matches!(*source, Error::UnknownAlias(_)));
            }
            other => panic!("{other}"),
        }
        assert_eq!(g.concept_count(), 0);
        let err = ingest_annotations("\n\nnonsense\n", &mut g).unwrap_err();
        assert!(matches!(err, Error::AtLine { line: 3, .. }));
    }
}
