//! Concept hierarchy, relation types and inference rules.
//!
//! An [`Ontology`] is immutable once built: construction happens through the
//! `add_*` methods (or the parsers in [`crate::formats`]) and every later
//! phase only queries it. Concepts form a single-rooted tree; relation types
//! are flat names carrying optional `transitive`/`symmetric` flags; inference
//! rules are premise/conclusion pairs of relation atoms over untyped local
//! variables.

use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OntologyError {
    #[error("duplicate concept name `{0}`")]
    DuplicateConcept(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("concept `{0}` has no parent but root `{1}` already exists")]
    SecondRoot(String, String),
    #[error("duplicate relation name `{0}`")]
    DuplicateRelation(String),
    #[error("name `{0}` is already used by a {1}")]
    NameClash(String, &'static str),
}

/// A node in the concept tree. `parent` is `None` only for the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub name: String,
    pub parent: Option<String>,
}

/// A declared binary relation name with its optional properties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationType {
    pub name: String,
    pub transitive: bool,
    pub symmetric: bool,
}

/// One relation literal over local names (service parameters or rule
/// variables). Self-relations (`source == target`) are permitted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationAtom {
    pub relation: String,
    pub source: String,
    pub target: String,
}

impl RelationAtom {
    pub fn new(relation: &str, source: &str, target: &str) -> Self {
        RelationAtom {
            relation: relation.to_string(),
            source: source.to_string(),
            target: target.to_string(),
        }
    }
}

/// Premise/conclusion pair of relation atoms over untyped variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceRule {
    pub name: String,
    pub variables: Vec<String>,
    pub premise: Vec<RelationAtom>,
    pub conclusion: Vec<RelationAtom>,
}

/// A structural problem found by [`Ontology::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyIssue {
    /// Where the problem sits, e.g. `concept[City]` or `rule[r1]/conclusion[0]`.
    pub location: String,
    pub message: String,
}

impl OntologyIssue {
    fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        OntologyIssue {
            location: location.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ontology {
    concepts: Vec<Concept>,
    concept_index: HashMap<String, usize>,
    relation_types: Vec<RelationType>,
    relation_index: HashMap<String, usize>,
    rules: Vec<InferenceRule>,
}

impl Ontology {
    pub fn new() -> Self {
        Ontology::default()
    }

    /// Registers a concept under `parent`, or as the root when `parent` is
    /// `None`. The first parentless concept becomes the root; a second one is
    /// an error.
    pub fn add_concept(
        &mut self,
        name: &str,
        parent: Option<&str>,
    ) -> Result<&Concept, OntologyError> {
        if self.concept_index.contains_key(name) {
            return Err(OntologyError::DuplicateConcept(name.to_string()));
        }
        if self.relation_index.contains_key(name) {
            return Err(OntologyError::NameClash(name.to_string(), "relation"));
        }
        match parent {
            Some(p) => {
                if !self.concept_index.contains_key(p) {
                    return Err(OntologyError::UnknownConcept(p.to_string()));
                }
            }
            None => {
                if let Some(root) = self.concepts.iter().find(|c| c.parent.is_none()) {
                    return Err(OntologyError::SecondRoot(
                        name.to_string(),
                        root.name.clone(),
                    ));
                }
            }
        }
        self.concept_index.insert(name.to_string(), self.concepts.len());
        self.concepts.push(Concept {
            name: name.to_string(),
            parent: parent.map(str::to_string),
        });
        Ok(self.concepts.last().unwrap())
    }

    pub fn add_relation_type(
        &mut self,
        name: &str,
        transitive: bool,
        symmetric: bool,
    ) -> Result<&RelationType, OntologyError> {
        if self.relation_index.contains_key(name) {
            return Err(OntologyError::DuplicateRelation(name.to_string()));
        }
        if self.concept_index.contains_key(name) {
            return Err(OntologyError::NameClash(name.to_string(), "concept"));
        }
        self.relation_index
            .insert(name.to_string(), self.relation_types.len());
        self.relation_types.push(RelationType {
            name: name.to_string(),
            transitive,
            symmetric,
        });
        Ok(self.relation_types.last().unwrap())
    }

    /// Rules are collected as parsed; structural checks happen in
    /// [`Ontology::validate`] so that a malformed file yields diagnostics
    /// instead of a construction failure.
    pub fn add_rule(&mut self, rule: InferenceRule) {
        self.rules.push(rule);
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn relation_types(&self) -> &[RelationType] {
        &self.relation_types
    }

    pub fn rules(&self) -> &[InferenceRule] {
        &self.rules
    }

    pub fn has_concept(&self, name: &str) -> bool {
        self.concept_index.contains_key(name)
    }

    pub fn concept(&self, name: &str) -> Option<&Concept> {
        self.concept_index.get(name).map(|&i| &self.concepts[i])
    }

    /// Dense index of a concept, usable as a key into per-concept tables.
    pub fn concept_id(&self, name: &str) -> Option<usize> {
        self.concept_index.get(name).copied()
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn relation_type(&self, name: &str) -> Option<&RelationType> {
        self.relation_index.get(name).map(|&i| &self.relation_types[i])
    }

    /// Dense index of a relation type, usable for interning triples.
    pub fn relation_id(&self, name: &str) -> Option<usize> {
        self.relation_index.get(name).copied()
    }

    pub fn relation_name(&self, id: usize) -> &str {
        &self.relation_types[id].name
    }

    pub fn relation_by_id(&self, id: usize) -> &RelationType {
        &self.relation_types[id]
    }

    pub fn root(&self) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.parent.is_none())
    }

    /// A copy with the rule list emptied; used for rule-ablated runs.
    pub fn without_rules(&self) -> Ontology {
        let mut o = self.clone();
        o.rules.clear();
        o
    }

    /// All subtypes of `name` including itself, in depth-first preorder.
    pub fn sub_types(&self, name: &str) -> Result<Vec<String>, OntologyError> {
        Ok(self
            .sub_type_ids(name)?
            .into_iter()
            .map(|i| self.concepts[i].name.clone())
            .collect())
    }

    /// As [`Ontology::sub_types`] but returning dense concept indices.
    pub fn sub_type_ids(&self, name: &str) -> Result<Vec<usize>, OntologyError> {
        let start = *self
            .concept_index
            .get(name)
            .ok_or_else(|| OntologyError::UnknownConcept(name.to_string()))?;
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.concepts.len()];
        for (i, c) in self.concepts.iter().enumerate() {
            if let Some(p) = &c.parent {
                if let Some(&pi) = self.concept_index.get(p) {
                    children[pi].push(i);
                }
            }
        }
        let mut out = Vec::new();
        let mut stack = vec![start];
        let mut seen = vec![false; self.concepts.len()];
        while let Some(i) = stack.pop() {
            if seen[i] {
                continue; // only reachable through a malformed (cyclic) parent chain
            }
            seen[i] = true;
            out.push(i);
            for &ch in children[i].iter().rev() {
                stack.push(ch);
            }
        }
        Ok(out)
    }

    /// True iff `a` is `b` or a descendant of `b`.
    pub fn is_subtype_of(&self, a: &str, b: &str) -> Result<bool, OntologyError> {
        if !self.concept_index.contains_key(b) {
            return Err(OntologyError::UnknownConcept(b.to_string()));
        }
        let mut cur = self
            .concept(a)
            .ok_or_else(|| OntologyError::UnknownConcept(a.to_string()))?;
        let mut hops = 0;
        loop {
            if cur.name == b {
                return Ok(true);
            }
            match &cur.parent {
                Some(p) => match self.concept(p) {
                    Some(c) => cur = c,
                    None => return Ok(false),
                },
                None => return Ok(false),
            }
            hops += 1;
            if hops > self.concepts.len() {
                return Ok(false); // cyclic chain; validate() reports it
            }
        }
    }

    /// Structural diagnostics: tree shape of the concept hierarchy and
    /// well-formedness of every rule. Empty result means all invariants hold.
    pub fn validate(&self) -> Vec<OntologyIssue> {
        let mut issues = Vec::new();

        let roots: Vec<&Concept> = self.concepts.iter().filter(|c| c.parent.is_none()).collect();
        if !self.concepts.is_empty() && roots.is_empty() {
            issues.push(OntologyIssue::new("concepts", "no root concept"));
        }
        for extra in roots.iter().skip(1) {
            issues.push(OntologyIssue::new(
                format!("concept[{}]", extra.name),
                format!("second root (root is `{}`)", roots[0].name),
            ));
        }
        for c in &self.concepts {
            if let Some(p) = &c.parent {
                if !self.concept_index.contains_key(p) {
                    issues.push(OntologyIssue::new(
                        format!("concept[{}]", c.name),
                        format!("unknown parent `{p}`"),
                    ));
                }
            }
            // walk the parent chain; coming back to `c` means a cycle
            let mut cur = c;
            let mut hops = 0;
            while let Some(p) = &cur.parent {
                match self.concept(p) {
                    Some(next) => cur = next,
                    None => break,
                }
                hops += 1;
                if cur.name == c.name || hops > self.concepts.len() {
                    issues.push(OntologyIssue::new(
                        format!("concept[{}]", c.name),
                        "cyclic parent chain",
                    ));
                    break;
                }
            }
        }

        for rule in &self.rules {
            let loc = |part: &str| format!("rule[{}]/{part}", rule.name);
            let vars: HashSet<&str> = rule.variables.iter().map(String::as_str).collect();
            if vars.len() != rule.variables.len() {
                issues.push(OntologyIssue::new(loc("variables"), "duplicate variable name"));
            }
            if rule.conclusion.is_empty() {
                issues.push(OntologyIssue::new(loc("conclusion"), "rule produces nothing"));
            }
            let premise: HashSet<&RelationAtom> = rule.premise.iter().collect();
            if !rule.conclusion.is_empty()
                && rule.conclusion.iter().all(|a| premise.contains(a))
            {
                issues.push(OntologyIssue::new(
                    loc("conclusion"),
                    "every conclusion atom already appears in the premise",
                ));
            }
            let mut premise_vars: HashSet<&str> = HashSet::new();
            for (i, atom) in rule.premise.iter().enumerate() {
                premise_vars.insert(atom.source.as_str());
                premise_vars.insert(atom.target.as_str());
                self.check_atom(atom, &vars, &loc(&format!("premise[{i}]")), &mut issues);
            }
            for (i, atom) in rule.conclusion.iter().enumerate() {
                let loc = loc(&format!("conclusion[{i}]"));
                self.check_atom(atom, &vars, &loc, &mut issues);
                for end in [&atom.source, &atom.target] {
                    if vars.contains(end.as_str()) && !premise_vars.contains(end.as_str()) {
                        issues.push(OntologyIssue::new(
                            &loc,
                            format!("variable `{end}` is unconstrained by any premise atom"),
                        ));
                    }
                }
            }
        }
        issues
    }

    fn check_atom(
        &self,
        atom: &RelationAtom,
        vars: &HashSet<&str>,
        loc: &str,
        issues: &mut Vec<OntologyIssue>,
    ) {
        if self.relation_type(&atom.relation).is_none() {
            issues.push(OntologyIssue::new(
                loc,
                format!("unknown relation `{}`", atom.relation),
            ));
        }
        for end in [&atom.source, &atom.target] {
            if !vars.contains(end.as_str()) {
                issues.push(OntologyIssue::new(
                    loc,
                    format!("`{end}` is not a declared variable"),
                ));
            }
        }
    }
}
