//! Named association aliases.
//!
//! Users never write raw [`StType`]s; they write "depends on" or
//! "is a member of", and the registry resolves the name to one canonical
//! type. An alias may be pinned (non-propagating) so that inference never
//! chains it past a single hop.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sttype::{Direction, Kind, StType};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alias {
    pub name: String,
    pub sttype: StType,
    pub propagating: bool,
    /// Name used when the association is read from the other end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reciprocal: Option<String>,
}

impl Alias {
    /// Label shown when an association of this alias is read backwards.
    pub fn reciprocal_label(&self) -> String {
        match &self.reciprocal {
            Some(name) => name.clone(),
            None if self.sttype.reciprocal_of() == self.sttype => self.name.clone(),
            None => format!("inverse of {}", self.name),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AliasRegistry {
    aliases: BTreeMap<String, Alias>,
}

impl AliasRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry preloaded with [`standard_aliases`].
    pub fn standard() -> Self {
        let mut reg = Self::new();
        for alias in standard_aliases() {
            reg.aliases.insert(alias.name.clone(), alias);
        }
        reg
    }

    pub fn get(&self, name: &str) -> Option<&Alias> {
        self.aliases.get(name.trim())
    }

    pub fn resolve(&self, name: &str) -> Result<&Alias> {
        self.get(name)
            .ok_or_else(|| Error::UnknownAlias(name.trim().to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Alias> {
        self.aliases.values()
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    /// Registers `name` for `sttype`, optionally with a name for the
    /// reciprocal reading.
    ///
    /// Re-registering an existing name with the same type updates its
    /// propagation flag (and that of its linked reciprocal); a different
    /// type is a conflict.
    pub fn register(
        &mut self,
        name: &str,
        sttype: StType,
        propagating: bool,
        reciprocal: Option<&str>,
    ) -> Result<&Alias> {
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::invalid("alias name is empty"));
        }
        self.check_compatible(name, sttype)?;
        let reciprocal = reciprocal.map(str::trim).filter(|r| !r.is_empty());
        if let Some(rname) = reciprocal {
            if rname == name && sttype.reciprocal_of() != sttype {
                return Err(Error::Conflict(format!(
                    "alias {name:?} cannot be its own reciprocal: {sttype} is not symmetric"
                )));
            }
            self.check_compatible(rname, sttype.reciprocal_of())?;
        }

        let linked = reciprocal
            .map(str::to_string)
            .or_else(|| self.aliases.get(name).and_then(|a| a.reciprocal.clone()));
        self.aliases.insert(
            name.to_string(),
            Alias {
                name: name.to_string(),
                sttype,
                propagating,
                reciprocal: linked.clone(),
            },
        );
        if let Some(rname) = linked.filter(|r| r != name) {
            let back = self.aliases.get(&rname).and_then(|a| a.reciprocal.clone());
            self.aliases.insert(
                rname.clone(),
                Alias {
                    name: rname,
                    sttype: sttype.reciprocal_of(),
                    propagating,
                    reciprocal: back.or_else(|| Some(name.to_string())),
                },
            );
        }
        Ok(&self.aliases[name])
    }

    fn check_compatible(&self, name: &str, sttype: StType) -> Result<()> {
        match self.aliases.get(name) {
            Some(existing) if existing.sttype != sttype => Err(Error::Conflict(format!(
                "alias {name:?} is already registered as {}, not {sttype}",
                existing.sttype
            ))),
            _ => Ok(()),
        }
    }

    pub(crate) fn insert_raw(&mut self, alias: Alias) {
        self.aliases.insert(alias.name.clone(), alias);
    }
}

/// The built-in alias set: the irreducible-type table with forward and
/// reciprocal names for all four kinds, plus the four negations.
pub fn standard_aliases() -> Vec<Alias> {
    use Direction::{Forward as F, Reciprocal as R};
    use Kind::*;

    // (name, kind, direction, negated, reciprocal name)
    let table: &[(&str, Kind, Direction, bool, Option<&str>)] = &[
        ("is close to", Near, F, false, None),
        ("approximates", Near, F, false, Some("is equivalent to")),
        ("is equivalent to", Near, F, false, Some("approximates")),
        ("is connected to", Near, F, false, None),
        ("is adjacent to", Near, F, false, None),
        ("is correlated with", Near, F, false, None),
        ("is similar to", Near, F, false, None),
        ("depends on", Follows, F, false, Some("enables")),
        ("enables", Follows, R, false, Some("depends on")),
        ("is caused by", Follows, F, false, Some("causes")),
        ("causes", Follows, R, false, Some("is caused by")),
        ("follows", Follows, F, false, Some("precedes")),
        ("precedes", Follows, R, false, Some("follows")),
        ("contains", Contains, F, false, Some("is a part of")),
        ("is a part of", Contains, R, false, Some("contains")),
        ("occupies", Contains, R, false, Some("contains")),
        ("surrounds", Contains, F, false, Some("inside")),
        ("inside", Contains, R, false, Some("surrounds")),
        ("generalizes", Contains, F, false, Some("exemplifies")),
        ("exemplifies", Contains, R, false, Some("generalizes")),
        ("is an aspect of", Contains, R, false, Some("generalizes")),
        ("is generalized by", Contains, R, false, Some("generalizes")),
        ("has member", Contains, F, false, Some("is a member of")),
        ("is a member of", Contains, R, false, Some("has member")),
        ("expresses", Expresses, F, false, Some("is expressed by")),
        ("is expressed by", Expresses, R, false, Some("expresses")),
        ("represents", Expresses, F, false, Some("is represented by")),
        ("is represented by", Expresses, R, false, Some("represents")),
        ("has name or value", Expresses, F, false, Some("is the value of property")),
        ("is the value of property", Expresses, R, false, Some("has name or value")),
        ("is characterized by", Expresses, F, false, Some("characterizes")),
        ("characterizes", Expresses, R, false, Some("is characterized by")),
        ("has property", Expresses, F, false, Some("is a property of")),
        ("is a property of", Expresses, R, false, Some("has property")),
        ("promises", Expresses, F, false, None),
        ("does not generalize", Contains, F, true, Some("is not generalized by")),
        ("is not generalized by", Contains, R, true, Some("does not generalize")),
        ("does not lead to", Follows, R, true, Some("does not follow from")),
        ("does not follow from", Follows, F, true, Some("does not lead to")),
        ("does not express", Expresses, F, true, Some("is not expressed by")),
        ("is not expressed by", Expresses, R, true, Some("does not express")),
        ("is not close to", Near, F, true, None),
    ];

    table
        .iter()
        .map(|&(name, kind, dir, negated, reciprocal)| Alias {
            name: name.to_string(),
            sttype: StType::new(kind, dir, negated),
            propagating: true,
            reciprocal: reciprocal.map(str::to_string),
        })
        .collect()
}
