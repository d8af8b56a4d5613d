//! The mutable state of one composition run: typed objects with provenance
//! and the relation instances among them.
//!
//! Every mutation keeps the relation set closed under the declared symmetry
//! and transitivity of each relation type. Triples added by closure are
//! tagged as derived so the pruner and the plan validator can tell asserted
//! facts from inferred ones. Objects and facts are never removed; merging a
//! duplicate object only retires its id.

use crate::ontology::Ontology;
use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KnowledgeError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("object {0:?} is retired or out of range")]
    DeadObject(ObjectId),
    #[error("object name `{0}` already exists")]
    DuplicateObjectName(String),
}

/// Dense handle for one object; never reused within a `Knowledge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub u32);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Who created an object: a service (or `"query"`), through which output
/// parameter, in which call of that producer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub producer: String,
    pub parameter: String,
    pub call_index: u32,
}

impl Provenance {
    pub fn new(producer: &str, parameter: &str, call_index: u32) -> Self {
        Provenance {
            producer: producer.to_string(),
            parameter: parameter.to_string(),
            call_index,
        }
    }

    /// The generated object name, `<producer>.<parameter>.<callIndex>`.
    pub fn object_name(&self) -> String {
        format!("{}.{}.{}", self.producer, self.parameter, self.call_index)
    }
}

#[derive(Debug, Clone)]
pub struct ObjectRecord {
    pub id: ObjectId,
    pub name: String,
    pub concept: String,
    pub provenance: Provenance,
    concept_id: usize,
    alive: bool,
}

/// One relation triple as seen by callers. `derived` marks closure edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationInstance {
    pub relation: String,
    pub source: ObjectId,
    pub target: ObjectId,
    pub derived: bool,
}

/// Interned triple: relation id plus endpoints.
pub type TripleKey = (usize, ObjectId, ObjectId);

#[derive(Debug, Clone)]
enum Origin {
    Asserted,
    /// Triples whose presence follows from others via symmetry/transitivity;
    /// the support list holds the triples the closure step combined.
    Derived(Vec<TripleKey>),
}

/// Which object-context signature duplicate detection compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupMode {
    /// Peers compared by identity: merged objects are exact twins.
    #[default]
    Identity,
    /// Peers compared by their concept only; coarser, closer to a literal
    /// reading of the object-context reduction.
    TypeLevel,
}

impl DedupMode {
    pub fn label(self) -> &'static str {
        match self {
            DedupMode::Identity => "identity",
            DedupMode::TypeLevel => "type-level",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "identity" => Some(DedupMode::Identity),
            "type-level" => Some(DedupMode::TypeLevel),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Peer {
    SelfLoop,
    Object(ObjectId),
    Concept(usize),
}

#[derive(Debug, Clone, Default)]
pub struct Knowledge {
    dedup_mode: DedupMode,
    objects: Vec<ObjectRecord>,
    name_index: HashMap<String, ObjectId>,
    type_index: HashMap<usize, Vec<ObjectId>>,
    triples: HashMap<TripleKey, Origin>,
    triple_order: Vec<TripleKey>,
    out_index: HashMap<(usize, ObjectId), Vec<ObjectId>>,
    in_index: HashMap<(usize, ObjectId), Vec<ObjectId>>,
    adjacency: HashMap<ObjectId, Vec<TripleKey>>,
}

impl Knowledge {
    pub fn new() -> Self {
        Knowledge::default()
    }

    pub fn with_dedup_mode(mode: DedupMode) -> Self {
        Knowledge {
            dedup_mode: mode,
            ..Knowledge::default()
        }
    }

    pub fn dedup_mode(&self) -> DedupMode {
        self.dedup_mode
    }

    /// Creates a fresh object of `concept`. The boolean is always true here;
    /// duplicate elimination is the separate post-call step
    /// [`Knowledge::dedup_new_objects`].
    pub fn add_object(
        &mut self,
        ontology: &Ontology,
        concept: &str,
        provenance: Provenance,
    ) -> Result<(ObjectId, bool), KnowledgeError> {
        let concept_id = ontology
            .concept_id(concept)
            .ok_or_else(|| KnowledgeError::UnknownConcept(concept.to_string()))?;
        let name = provenance.object_name();
        if self.name_index.contains_key(&name) {
            return Err(KnowledgeError::DuplicateObjectName(name));
        }
        let id = ObjectId(self.objects.len() as u32);
        self.name_index.insert(name.clone(), id);
        self.type_index.entry(concept_id).or_default().push(id);
        self.objects.push(ObjectRecord {
            id,
            name,
            concept: concept.to_string(),
            provenance,
            concept_id,
            alive: true,
        });
        Ok((id, true))
    }

    /// Asserts `relation(source, target)` and restores symmetric/transitive
    /// closure. Returns every triple that was not present before, in the
    /// order it was added (empty for a duplicate).
    pub fn add_relation(
        &mut self,
        ontology: &Ontology,
        relation: &str,
        source: ObjectId,
        target: ObjectId,
    ) -> Result<Vec<RelationInstance>, KnowledgeError> {
        let rel = ontology
            .relation_id(relation)
            .ok_or_else(|| KnowledgeError::UnknownRelation(relation.to_string()))?;
        self.check_live(source)?;
        self.check_live(target)?;
        Ok(self.insert_closed(ontology, rel, source, target, Origin::Asserted))
    }

    fn check_live(&self, id: ObjectId) -> Result<(), KnowledgeError> {
        if self.is_live(id) {
            Ok(())
        } else {
            Err(KnowledgeError::DeadObject(id))
        }
    }

    pub fn is_live(&self, id: ObjectId) -> bool {
        self.objects.get(id.index()).map_or(false, |o| o.alive)
    }

    fn insert_closed(
        &mut self,
        ontology: &Ontology,
        rel: usize,
        source: ObjectId,
        target: ObjectId,
        origin: Origin,
    ) -> Vec<RelationInstance> {
        let props = ontology.relation_by_id(rel);
        let (symmetric, transitive) = (props.symmetric, props.transitive);
        let mut added = Vec::new();
        let mut work = vec![(source, target, origin)];
        while let Some((s, t, origin)) = work.pop() {
            let key = (rel, s, t);
            match self.triples.entry(key) {
                Entry::Occupied(_) => continue,
                Entry::Vacant(e) => {
                    let derived = matches!(origin, Origin::Derived(_));
                    e.insert(origin);
                    added.push(RelationInstance {
                        relation: ontology.relation_name(rel).to_string(),
                        source: s,
                        target: t,
                        derived,
                    });
                }
            }
            self.triple_order.push(key);
            self.out_index.entry((rel, s)).or_default().push(t);
            self.in_index.entry((rel, t)).or_default().push(s);
            self.adjacency.entry(s).or_default().push(key);
            if s != t {
                self.adjacency.entry(t).or_default().push(key);
            }
            if symmetric && !self.triples.contains_key(&(rel, t, s)) {
                work.push((t, s, Origin::Derived(vec![(rel, s, t)])));
            }
            if transitive {
                for x in self.in_index.get(&(rel, s)).cloned().unwrap_or_default() {
                    if x != s && !self.triples.contains_key(&(rel, x, t)) {
                        work.push((x, t, Origin::Derived(vec![(rel, x, s), (rel, s, t)])));
                    }
                }
                for y in self.out_index.get(&(rel, t)).cloned().unwrap_or_default() {
                    if y != t && !self.triples.contains_key(&(rel, s, y)) {
                        work.push((s, y, Origin::Derived(vec![(rel, s, t), (rel, t, y)])));
                    }
                }
            }
        }
        added
    }

    /// Membership test on the closed relation set.
    pub fn has_relation(
        &self,
        ontology: &Ontology,
        relation: &str,
        source: ObjectId,
        target: ObjectId,
    ) -> Result<bool, KnowledgeError> {
        let rel = ontology
            .relation_id(relation)
            .ok_or_else(|| KnowledgeError::UnknownRelation(relation.to_string()))?;
        Ok(self.has_triple(rel, source, target))
    }

    pub fn has_triple(&self, rel: usize, source: ObjectId, target: ObjectId) -> bool {
        self.triples.contains_key(&(rel, source, target))
    }

    /// All live objects whose type is in `types`, in insertion order.
    pub fn objects_of_types(
        &self,
        ontology: &Ontology,
        types: &HashSet<String>,
    ) -> Result<Vec<ObjectId>, KnowledgeError> {
        let mut mask = vec![false; ontology.concept_count()];
        for name in types {
            let id = ontology
                .concept_id(name)
                .ok_or_else(|| KnowledgeError::UnknownConcept(name.clone()))?;
            mask[id] = true;
        }
        Ok(self.objects_matching_mask(&mask))
    }

    /// Fast path for the matcher: `mask` is indexed by dense concept id.
    pub fn objects_matching_mask(&self, mask: &[bool]) -> Vec<ObjectId> {
        self.objects
            .iter()
            .filter(|o| o.alive && mask.get(o.concept_id).copied().unwrap_or(false))
            .map(|o| o.id)
            .collect()
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectRecord> {
        self.objects.get(id.index())
    }

    pub fn object_name(&self, id: ObjectId) -> &str {
        &self.objects[id.index()].name
    }

    pub fn object_concept(&self, id: ObjectId) -> &str {
        &self.objects[id.index()].concept
    }

    pub fn id_by_name(&self, name: &str) -> Option<ObjectId> {
        self.name_index.get(name).copied()
    }

    pub fn live_objects(&self) -> impl Iterator<Item = &ObjectRecord> {
        self.objects.iter().filter(|o| o.alive)
    }

    pub fn object_count(&self) -> usize {
        self.objects.iter().filter(|o| o.alive).count()
    }

    /// All triples in insertion order, including derived ones.
    pub fn triples(&self, ontology: &Ontology) -> Vec<RelationInstance> {
        self.triple_order
            .iter()
            .map(|&(rel, s, t)| RelationInstance {
                relation: ontology.relation_name(rel).to_string(),
                source: s,
                target: t,
                derived: matches!(self.triples[&(rel, s, t)], Origin::Derived(_)),
            })
            .collect()
    }

    pub fn triple_count(&self) -> usize {
        self.triple_order.len()
    }

    /// Expands a fact to the asserted facts supporting it: the fact itself
    /// when asserted, otherwise the recursive supports of its closure
    /// derivation. Unknown facts expand to nothing.
    pub fn resolve_to_asserted(
        &self,
        ontology: &Ontology,
        relation: &str,
        source: ObjectId,
        target: ObjectId,
    ) -> Vec<TripleKey> {
        let Some(rel) = ontology.relation_id(relation) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut work = vec![(rel, source, target)];
        while let Some(key) = work.pop() {
            if !seen.insert(key) {
                continue;
            }
            match self.triples.get(&key) {
                Some(Origin::Asserted) => out.push(key),
                Some(Origin::Derived(support)) => work.extend(support.iter().copied()),
                None => {}
            }
        }
        out
    }

    /// The context signature dedup compares: the object's type plus every
    /// incident relation with direction and peer. A peer equal to the object
    /// itself is canonicalised so twins with self-loops stay comparable.
    fn signature(&self, id: ObjectId) -> BTreeSet<(usize, u8, Peer)> {
        let mut sig = BTreeSet::new();
        for &(rel, s, t) in self.adjacency.get(&id).map(Vec::as_slice).unwrap_or(&[]) {
            if s == id {
                sig.insert((rel, 0, self.peer_of(id, t)));
            }
            if t == id {
                sig.insert((rel, 1, self.peer_of(id, s)));
            }
        }
        sig
    }

    fn peer_of(&self, me: ObjectId, peer: ObjectId) -> Peer {
        if peer == me {
            Peer::SelfLoop
        } else {
            match self.dedup_mode {
                DedupMode::Identity => Peer::Object(peer),
                DedupMode::TypeLevel => Peer::Concept(self.objects[peer.index()].concept_id),
            }
        }
    }

    /// Merges each object of the just-created batch whose type and relation
    /// context exactly match an earlier live object (pre-existing or earlier
    /// in the batch). Returns the surviving id for every batch member.
    ///
    /// `new_ids` must be passed in creation order, after the batch's
    /// relations were added.
    pub fn dedup_new_objects(
        &mut self,
        ontology: &Ontology,
        new_ids: &[ObjectId],
    ) -> HashMap<ObjectId, ObjectId> {
        let mut mapping = HashMap::new();
        for &nid in new_ids {
            if !self.is_live(nid) {
                continue;
            }
            let sig = self.signature(nid);
            let concept_id = self.objects[nid.index()].concept_id;
            let survivor = self
                .type_index
                .get(&concept_id)
                .map(Vec::as_slice)
                .unwrap_or(&[])
                .iter()
                .copied()
                .find(|&cand| {
                    cand < nid && self.is_live(cand) && self.signature(cand) == sig
                });
            match survivor {
                Some(sid) => {
                    self.merge(ontology, nid, sid);
                    mapping.insert(nid, sid);
                }
                None => {
                    mapping.insert(nid, nid);
                }
            }
        }
        mapping
    }

    /// Retires `nid`, re-pointing its triples onto `sid`. Re-pointed triples
    /// go back through closed insertion: with identity dedup they are all
    /// duplicates; with type-level dedup genuinely new edges can appear and
    /// the closure must be restored.
    fn merge(&mut self, ontology: &Ontology, nid: ObjectId, sid: ObjectId) {
        let incident = self.adjacency.remove(&nid).unwrap_or_default();
        for &key @ (rel, s, t) in &incident {
            let origin = self.triples.remove(&key).expect("indexed triple missing");
            self.triple_order.retain(|k| *k != key);
            if let Some(v) = self.out_index.get_mut(&(rel, s)) {
                v.retain(|&x| x != t);
            }
            if let Some(v) = self.in_index.get_mut(&(rel, t)) {
                v.retain(|&x| x != s);
            }
            let other = if s == nid { t } else { s };
            if other != nid {
                if let Some(v) = self.adjacency.get_mut(&other) {
                    v.retain(|k| *k != key);
                }
            }
            let redirect = |id: ObjectId| if id == nid { sid } else { id };
            let origin = match origin {
                Origin::Asserted => Origin::Asserted,
                Origin::Derived(support) => Origin::Derived(
                    support
                        .into_iter()
                        .map(|(r, a, b)| (r, redirect(a), redirect(b)))
                        .collect(),
                ),
            };
            self.insert_closed(ontology, rel, redirect(s), redirect(t), origin);
        }
        let rec = &mut self.objects[nid.index()];
        rec.alive = false;
        self.name_index.remove(&rec.name);
        let concept_id = rec.concept_id;
        if let Some(v) = self.type_index.get_mut(&concept_id) {
            v.retain(|&x| x != nid);
        }
    }

    /// Text snapshot: one live object per line, `name: type { rel(peer) dir ... }`,
    /// sorted by id. Direction is `->` for outgoing and `<-` for incoming.
    pub fn dump(&self, ontology: &Ontology) -> String {
        let mut out = String::new();
        for o in self.objects.iter().filter(|o| o.alive) {
            write!(out, "{}: {} {{", o.name, o.concept).unwrap();
            for &(rel, s, t) in self.adjacency.get(&o.id).map(Vec::as_slice).unwrap_or(&[]) {
                if s == o.id {
                    write!(
                        out,
                        " {}({}) ->",
                        ontology.relation_name(rel),
                        self.objects[t.index()].name
                    )
                    .unwrap();
                }
                if t == o.id && s != t {
                    write!(
                        out,
                        " {}({}) <-",
                        ontology.relation_name(rel),
                        self.objects[s.index()].name
                    )
                    .unwrap();
                }
            }
            out.push_str(" }\n");
        }
        out
    }
}

/// Order-sensitive 64-bit FNV-1a digest of an object id sequence. History
/// entries store the exact tuples alongside, so a collision can never cause
/// a false "already called" verdict.
pub fn match_hash(ids: &[ObjectId]) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut h = OFFSET;
    for id in ids {
        for byte in (id.0 as u64).to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Ontology;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ontology() -> Ontology {
        let mut o = Ontology::new();
        o.add_concept("Thing", None).unwrap();
        o.add_concept("Person", Some("Thing")).unwrap();
        o.add_concept("University", Some("Thing")).unwrap();
        o.add_concept("City", Some("Thing")).unwrap();
        o.add_relation_type("plain", false, false).unwrap();
        o.add_relation_type("sym", false, true).unwrap();
        o.add_relation_type("trans", true, false).unwrap();
        o.add_relation_type("both", true, true).unwrap();
        o
    }

    fn obj(k: &mut Knowledge, o: &Ontology, ty: &str, tag: &str) -> ObjectId {
        k.add_object(o, ty, Provenance::new("t", tag, 0)).unwrap().0
    }

    #[test]
    fn object_naming_follows_provenance() {
        let o = ontology();
        let mut k = Knowledge::new();
        let (id, created) = k
            .add_object(&o, "City", Provenance::new("getUniversityLocation", "city", 1))
            .unwrap();
        assert!(created);
        assert_eq!(k.object_name(id), "getUniversityLocation.city.1");
        let (id2, _) = k
            .add_object(&o, "City", Provenance::new("getUniversityLocation", "city", 2))
            .unwrap();
        assert_ne!(id, id2);
        assert!(k.object_name(id2).ends_with(".2"));
        assert!(k
            .add_object(&o, "Nope", Provenance::new("x", "y", 0))
            .is_err());
    }

    #[test]
    fn add_relation_symmetric_and_duplicate() {
        let o = ontology();
        let mut k = Knowledge::new();
        let a = obj(&mut k, &o, "Person", "a");
        let b = obj(&mut k, &o, "City", "b");
        let added = k.add_relation(&o, "sym", a, b).unwrap();
        assert_eq!(added.len(), 2);
        assert!(k.has_relation(&o, "sym", b, a).unwrap());
        assert!(added.iter().any(|r| r.source == b && r.derived));
        assert!(k.add_relation(&o, "sym", a, b).unwrap().is_empty());
        assert!(k.add_relation(&o, "nope", a, b).is_err());
    }

    #[test]
    fn add_relation_transitive_chain() {
        let o = ontology();
        let mut k = Knowledge::new();
        let a = obj(&mut k, &o, "City", "a");
        let b = obj(&mut k, &o, "City", "b");
        let c = obj(&mut k, &o, "City", "c");
        assert_eq!(k.add_relation(&o, "trans", a, b).unwrap().len(), 1);
        let added = k.add_relation(&o, "trans", b, c).unwrap();
        let pairs: HashSet<(ObjectId, ObjectId)> =
            added.iter().map(|r| (r.source, r.target)).collect();
        assert_eq!(pairs, HashSet::from([(b, c), (a, c)]));
        assert!(k.has_relation(&o, "trans", a, c).unwrap());
        assert!(!k.has_relation(&o, "trans", c, a).unwrap());
    }

    #[test]
    fn objects_of_types_matches_full_scan() {
        let o = ontology();
        let mut k = Knowledge::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let names = ["Person", "University", "City"];
        for i in 0..60 {
            let ty = names[rng.gen_range(0..3)];
            k.add_object(&o, ty, Provenance::new("g", &format!("p{i}"), 0))
                .unwrap();
        }
        let want: HashSet<String> = ["Person", "City"].iter().map(|s| s.to_string()).collect();
        let got = k.objects_of_types(&o, &want).unwrap();
        let oracle: Vec<ObjectId> = k
            .live_objects()
            .filter(|r| want.contains(&r.concept))
            .map(|r| r.id)
            .collect();
        assert_eq!(got, oracle);
        assert!(got.windows(2).all(|w| w[0] < w[1]));
        assert!(k.objects_of_types(&o, &HashSet::new()).unwrap().is_empty());
        assert!(k
            .objects_of_types(&o, &HashSet::from(["Nope".to_string()]))
            .is_err());
    }

    #[test]
    fn dedup_merges_identical_context() {
        let o = ontology();
        let mut k = Knowledge::new();
        let univ = obj(&mut k, &o, "University", "univ");
        let city1 = obj(&mut k, &o, "City", "city1");
        k.add_relation(&o, "plain", univ, city1).unwrap();
        // a new city with exactly the same single relation merges into city1
        let (city2, _) = k
            .add_object(&o, "City", Provenance::new("svc", "city", 1))
            .unwrap();
        k.add_relation(&o, "plain", univ, city2).unwrap();
        let map = k.dedup_new_objects(&o, &[city2]);
        assert_eq!(map[&city2], city1);
        assert!(!k.is_live(city2));
        assert_eq!(k.object_count(), 2);
        // facts survived the merge
        assert!(k.has_relation(&o, "plain", univ, city1).unwrap());
    }

    #[test]
    fn dedup_keeps_distinct_context() {
        let o = ontology();
        let mut k = Knowledge::new();
        let pers = obj(&mut k, &o, "Person", "pers");
        let univ = obj(&mut k, &o, "University", "univ");
        let city1 = obj(&mut k, &o, "City", "city1");
        k.add_relation(&o, "plain", univ, city1).unwrap();
        let (city2, _) = k
            .add_object(&o, "City", Provenance::new("svc", "city", 1))
            .unwrap();
        k.add_relation(&o, "plain", pers, city2).unwrap();
        let map = k.dedup_new_objects(&o, &[city2]);
        assert_eq!(map[&city2], city2);
        assert!(k.is_live(city2));
    }

    #[test]
    fn dedup_pairwise_within_batch() {
        let o = ontology();
        let mut k = Knowledge::new();
        let pers = obj(&mut k, &o, "Person", "pers");
        let (c1, _) = k.add_object(&o, "City", Provenance::new("s", "a", 1)).unwrap();
        let (c2, _) = k.add_object(&o, "City", Provenance::new("s", "b", 1)).unwrap();
        k.add_relation(&o, "plain", pers, c1).unwrap();
        k.add_relation(&o, "plain", pers, c2).unwrap();
        let map = k.dedup_new_objects(&o, &[c1, c2]);
        assert_eq!(map[&c1], c1);
        assert_eq!(map[&c2], c1);
    }

    #[test]
    fn dedup_type_level_is_coarser() {
        let o = ontology();
        // identity mode keeps a city related to a *different* person
        let mut k = Knowledge::with_dedup_mode(DedupMode::TypeLevel);
        let p1 = obj(&mut k, &o, "Person", "p1");
        let p2 = obj(&mut k, &o, "Person", "p2");
        let c1 = obj(&mut k, &o, "City", "c1");
        k.add_relation(&o, "plain", p1, c1).unwrap();
        let (c2, _) = k.add_object(&o, "City", Provenance::new("s", "c", 1)).unwrap();
        k.add_relation(&o, "plain", p2, c2).unwrap();
        let map = k.dedup_new_objects(&o, &[c2]);
        assert_eq!(map[&c2], c1, "type-level signature ignores peer identity");
    }

    #[test]
    fn self_loops_do_not_confuse_dedup() {
        let o = ontology();
        let mut k = Knowledge::new();
        let a = obj(&mut k, &o, "City", "a");
        k.add_relation(&o, "plain", a, a).unwrap();
        // new object with a self-loop matches an old object with a self-loop
        let (b, _) = k.add_object(&o, "City", Provenance::new("s", "b", 1)).unwrap();
        k.add_relation(&o, "plain", b, b).unwrap();
        let map = k.dedup_new_objects(&o, &[b]);
        assert_eq!(map[&b], a);
        // but a new object related to `a` does not match `a` itself
        let (c, _) = k.add_object(&o, "City", Provenance::new("s", "c", 1)).unwrap();
        k.add_relation(&o, "plain", a, c).unwrap();
        k.add_relation(&o, "plain", c, c).unwrap();
        let map = k.dedup_new_objects(&o, &[c]);
        assert_eq!(map[&c], c);
    }

    /// Closure oracle: symmetric closure then Warshall over asserted edges.
    fn closure_oracle(
        n: usize,
        edges: &[(usize, usize)],
        symmetric: bool,
        transitive: bool,
    ) -> HashSet<(usize, usize)> {
        let mut set: HashSet<(usize, usize)> = edges.iter().copied().collect();
        if symmetric {
            let rev: Vec<_> = set.iter().map(|&(a, b)| (b, a)).collect();
            set.extend(rev);
        }
        if transitive {
            let mut m = vec![vec![false; n]; n];
            for &(a, b) in &set {
                m[a][b] = true;
            }
            for k in 0..n {
                for i in 0..n {
                    if m[i][k] {
                        for j in 0..n {
                            if m[k][j] {
                                m[i][j] = true;
                            }
                        }
                    }
                }
            }
            set = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| m[i][j])
                .collect();
        }
        set
    }

    #[test]
    fn closure_matches_oracle_on_random_graphs() {
        let o = ontology();
        let rels = ["plain", "sym", "trans", "both"];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..30 {
            let n = rng.gen_range(2..40);
            let mut k = Knowledge::new();
            let ids: Vec<ObjectId> = (0..n)
                .map(|i| obj(&mut k, &o, "Thing", &format!("o{case}_{i}")))
                .collect();
            let mut asserted: HashMap<&str, Vec<(usize, usize)>> = HashMap::new();
            for _ in 0..rng.gen_range(1..60) {
                let rel = rels[rng.gen_range(0..4)];
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                k.add_relation(&o, rel, ids[a], ids[b]).unwrap();
                asserted.entry(rel).or_default().push((a, b));
            }
            for rel in rels {
                let rt = o.relation_type(rel).unwrap();
                let want = closure_oracle(
                    n,
                    asserted.get(rel).map(Vec::as_slice).unwrap_or(&[]),
                    rt.symmetric,
                    rt.transitive,
                );
                for i in 0..n {
                    for j in 0..n {
                        assert_eq!(
                            k.has_relation(&o, rel, ids[i], ids[j]).unwrap(),
                            want.contains(&(i, j)),
                            "case={case} rel={rel} {i}->{j}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn derived_facts_resolve_to_asserted_support() {
        let o = ontology();
        let mut k = Knowledge::new();
        let a = obj(&mut k, &o, "City", "a");
        let b = obj(&mut k, &o, "City", "b");
        let c = obj(&mut k, &o, "City", "c");
        k.add_relation(&o, "trans", a, b).unwrap();
        k.add_relation(&o, "trans", b, c).unwrap();
        let rel = o.relation_id("trans").unwrap();
        let support: HashSet<TripleKey> =
            k.resolve_to_asserted(&o, "trans", a, c).into_iter().collect();
        assert_eq!(support, HashSet::from([(rel, a, b), (rel, b, c)]));
        // an asserted fact resolves to itself
        assert_eq!(k.resolve_to_asserted(&o, "trans", a, b), vec![(rel, a, b)]);
    }

    #[test]
    fn identical_sequences_give_identical_dumps() {
        let o = ontology();
        let run = || {
            let mut k = Knowledge::new();
            let p = obj(&mut k, &o, "Person", "p");
            let u = obj(&mut k, &o, "University", "u");
            let c = obj(&mut k, &o, "City", "c");
            k.add_relation(&o, "sym", p, u).unwrap();
            k.add_relation(&o, "trans", u, c).unwrap();
            k.add_relation(&o, "trans", c, p).unwrap();
            k.dump(&o)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn match_hash_is_order_sensitive_and_stable() {
        assert_eq!(match_hash(&[]), 0xcbf29ce484222325);
        let a = ObjectId(1);
        let b = ObjectId(2);
        assert_ne!(match_hash(&[a, b]), match_hash(&[b, a]));
        assert_eq!(match_hash(&[a, b]), match_hash(&[a, b]));
    }
}
