use std::collections::BTreeSet;

use super::{Region, RegionCoord, END_SENTINEL};
use crate::error::Result;
use crate::graph::{ConceptId, Graph, Provenance};

const PART_ALIAS: &str = "contains";
const TOKEN_ALIAS: &str = "is expressed by";

/// Loads a coordinatized document into the graph.
///
/// Each region (and each enclosing region) becomes a concept named
/// `<doc_name>:<path>`; enclosing regions contain their children, and each
/// token concept is expressed by the region holding it. The end sentinel
/// is not data and is skipped. Returns concepts plus associations created.
pub fn doc_to_graph(regions: &[Region], graph: &mut Graph, doc_name: &str) -> Result<usize> {
    if regions.is_empty() {
        return Ok(0);
    }
    for alias in [PART_ALIAS, TOKEN_ALIAS] {
        graph.ensure_standard_alias(alias)?;
    }
    let concepts_before = graph.concept_count();
    let assocs_before = graph.association_count();
    let mut linked: BTreeSet<RegionCoord> = BTreeSet::new();

    for region in regions {
        let id = region_concept(graph, doc_name, &region.coord, &mut linked)?;
        for token in region.tokens.iter().filter(|t| *t != END_SENTINEL) {
            let t = graph.add_concept(token)?;
            if t != id {
                graph.associate(t, TOKEN_ALIAS, id, [""; 0], Provenance::ReportedEncapsulation)?;
            }
        }
    }
    Ok(graph.concept_count() - concepts_before + graph.association_count() - assocs_before)
}

fn region_concept(
    graph: &mut Graph,
    doc_name: &str,
    coord: &RegionCoord,
    linked: &mut BTreeSet<RegionCoord>,
) -> Result<ConceptId> {
    let id = graph.add_concept(&format!("{doc_name}:{}", coord.path()))?;
    if linked.insert(coord.clone()) {
        if let Some(parent) = coord.parent() {
            let p = region_concept(graph, doc_name, &parent, linked)?;
            if graph.find_association(p, PART_ALIAS, id, [""; 0]).is_none() {
                graph.associate(p, PART_ALIAS, id, [""; 0], Provenance::ReportedEncapsulation)?;
            }
        }
    }
    Ok(id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coordinatizer::{coordinatize, Dialect};

    #[test]
    fn empty_is_nothing() {
        let mut g = Graph::new();
        assert_eq!(doc_to_graph(&[], &mut g, "d").unwrap(), 0);
        assert_eq!(g.concept_count(), 0);
    }

    #[test]
    fn nested_regions_form_a_tree() {
        let mut g = Graph::with_standard_aliases();
        let regions = coordinatize(r#"{"k": [1]}"#, Dialect::JsonLike).unwrap();
        let added = doc_to_graph(&regions, &mut g, "d").unwrap();
        // regions: d:1 d:2 d:2.1{ d:2.2{ d:2.2{.1[ d:3 d:4; tokens "k" : 1
        assert_eq!(g.concept_count(), 10);
        // containment: 2 -> 2.1{, 2 -> 2.2{, 2.2{ -> 2.2{.1[; tokens: 2 + 1
        assert_eq!(g.association_count(), 6);
        assert_eq!(added, 16);
        let again = doc_to_graph(&regions, &mut g, "d").unwrap();
        assert_eq!(again, 0);
    }
}
