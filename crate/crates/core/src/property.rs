//! Graph properties as sets of isomorphism classes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_vertex_count, ClassId, ClassMask, ClassTable, LabeledGraph, Symmetry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Property {
    n: usize,
    members: ClassMask,
}

impl Property {
    pub fn from_mask(n: usize, members: ClassMask) -> Self {
        Property { n, members }
    }

    pub fn from_ids(table: &ClassTable, ids: impl IntoIterator<Item = ClassId>) -> Result<Self> {
        let mut members = table.empty_mask();
        for id in ids {
            table.check_id(id)?;
            members.insert(id);
        }
        Ok(Property { n: table.n(), members })
    }

    pub fn empty(table: &ClassTable) -> Self {
        Property {
            n: table.n(),
            members: table.empty_mask(),
        }
    }

    pub fn full(table: &ClassTable) -> Self {
        Property {
            n: table.n(),
            members: table.full_mask(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &ClassMask {
        &self.members
    }

    pub fn contains(&self, id: ClassId) -> bool {
        self.members.contains(id)
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.is_empty() || self.members.is_full()
    }

    pub fn class_ids(&self) -> Vec<ClassId> {
        self.members.iter().collect()
    }

    pub fn set_complement(&self) -> Self {
        Property {
            n: self.n,
            members: self.members.complement(),
        }
    }

    /// Image of the member set under graph complementation.
    pub fn graph_complement_image(&self, table: &ClassTable) -> Self {
        let members = ClassMask::from_ids(
            self.members.len(),
            self.members.iter().map(|c| table.complement_class(c)),
        );
        Property { n: self.n, members }
    }

    pub fn is_complement_closed(&self, table: &ClassTable) -> bool {
        self.graph_complement_image(table) == *self
    }

    pub fn to_doc(&self) -> PropertyDoc {
        PropertyDoc {
            n: self.n,
            graphs: Vec::new(),
            classes: self.class_ids(),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} {}", self.n, self.members)
    }
}

pub fn set_complement(p: &Property) -> Property {
    p.set_complement()
}

pub fn graph_complement_image(p: &Property, table: &ClassTable) -> Property {
    p.graph_complement_image(table)
}

pub fn is_complement_closed(p: &Property, table: &ClassTable) -> bool {
    p.is_complement_closed(table)
}

/// On-disk property document. `graphs` lists edge sets as 1-based pairs;
/// `classes` lists class ids in ascending canonical-code order. Both may be
/// given; the property is their union.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyDoc {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub graphs: Vec<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassId>,
}

impl PropertyDoc {
    pub fn resolve(&self) -> Result<Property> {
        check_vertex_count(self.n)?;
        let table = ClassTable::shared(self.n)?;
        let mut members = table.empty_mask();
        for graph in &self.graphs {
            let pairs: Vec<(usize, usize)> = graph.iter().map(|&[u, v]| (u, v)).collect();
            for &(u, v) in &pairs {
                if u == v {
                    return Err(Error::InvalidPair { u, v, n: self.n });
                }
            }
            let g = LabeledGraph::from_pairs(self.n, &pairs)?;
            members.insert(table.class_of(&g));
        }
        for &id in &self.classes {
            table.check_id(id)?;
            members.insert(id);
        }
        Ok(Property::from_mask(self.n, members))
    }
}

/// Parses a property document in JSON form.
pub fn parse_property(text: &str) -> Result<Property> {
    let doc: PropertyDoc = serde_json::from_str(text)?;
    doc.resolve()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Complete,
    Connected,
    TriangleFree,
    Planar,
    Perfect,
    HasIsolatedVertex,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Complete,
        Builtin::Connected,
        Builtin::TriangleFree,
        Builtin::Planar,
        Builtin::Perfect,
        Builtin::HasIsolatedVertex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Complete => "complete",
            Builtin::Connected => "connected",
            Builtin::TriangleFree => "triangle-free",
            Builtin::Planar => "planar",
            Builtin::Perfect => "perfect",
            Builtin::HasIsolatedVertex => "has-isolated-vertex",
        }
    }

    pub fn holds(self, g: &LabeledGraph) -> bool {
        match self {
            Builtin::Complete => g.complement().edges() == 0,
            Builtin::Connected => is_connected(g),
            Builtin::TriangleFree => !has_triangle(g),
            Builtin::Planar => is_planar(g),
            Builtin::Perfect => !has_induced_five_cycle(g),
            Builtin::HasIsolatedVertex => (1..=g.n()).any(|v| g.degree(v) == 0),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownBuiltin(s.to_string()))
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A builtin property over `n`-vertex graphs.
pub fn builtin(name: &str, n: usize) -> Result<Property> {
    let which: Builtin = name.parse()?;
    check_vertex_count(n)?;
    if which == Builtin::Perfect && n > 5 {
        return Err(Error::BuiltinUnavailable {
            name: name.to_string(),
            n,
        });
    }
    static CACHE: OnceLock<Mutex<HashMap<(Builtin, usize), Property>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("builtin cache poisoned").get(&(which, n)) {
        return Ok(*p);
    }
    let table = ClassTable::shared(n)?;
    let ids = (0..table.len()).filter(|&c| which.holds(&table.representative(c)));
    let p = Property::from_ids(table, ids)?;
    cache.lock().expect("builtin cache poisoned").insert((which, n), p);
    Ok(p)
}

fn is_connected(g: &LabeledGraph) -> bool {
    let n = g.n();
    let mut seen = vec![false; n + 1];
    let mut stack = vec![1];
    seen[1] = true;
    while let Some(v) = stack.pop() {
        for (w, s) in seen.iter_mut().enumerate().skip(1) {
            if !*s && g.adjacent(v, w) {
                *s = true;
                stack.push(w);
            }
        }
    }
    seen[1..].iter().all(|&s| s)
}

fn has_triangle(g: &LabeledGraph) -> bool {
    (1..=g.n())
        .tuple_combinations()
        .any(|(a, b, c)| g.adjacent(a, b) && g.adjacent(b, c) && g.adjacent(a, c))
}

// Kuratowski on at most six vertices: a K5 or K3,3 subdivision has at most
// one subdividing vertex, and only K5 admits one.
fn is_planar(g: &LabeledGraph) -> bool {
    let n = g.n();
    let complete_on = |vs: &[usize], skip: Option<(usize, usize)>| {
        vs.iter()
            .tuple_combinations()
            .all(|(&a, &b)| skip.is_some_and(|(x, y)| (a, b) == (x, y) || (a, b) == (y, x)) || g.adjacent(a, b))
    };
    for five in (1..=n).combinations(5) {
        if complete_on(&five, None) {
            return false;
        }
        if n == 6 {
            let w = (1..=n).find(|v| !five.contains(v)).expect("six vertices");
            for (&a, &b) in five.iter().tuple_combinations() {
                if g.adjacent(w, a) && g.adjacent(w, b) && complete_on(&five, Some((a, b))) {
                    return false;
                }
            }
        }
    }
    if n == 6 {
        for side in (2..=6).combinations(2) {
            let left = [1, side[0], side[1]];
            let right: Vec<usize> = (1..=6).filter(|v| !left.contains(v)).collect();
            if left.iter().all(|&a| right.iter().all(|&b| g.adjacent(a, b))) {
                return false;
            }
        }
    }
    true
}

fn has_induced_five_cycle(g: &LabeledGraph) -> bool {
    (1..=g.n()).combinations(5).any(|vs| {
        vs.iter()
            .all(|&v| vs.iter().filter(|&&w| g.adjacent(v, w)).count() == 2)
            && {
                // 2-regular on five vertices is a 5-cycle iff connected
                let mut seen = vec![vs[0]];
                let mut frontier = vec![vs[0]];
                while let Some(v) = frontier.pop() {
                    for &w in &vs {
                        if g.adjacent(v, w) && !seen.contains(&w) {
                            seen.push(w);
                            frontier.push(w);
                        }
                    }
                }
                seen.len() == 5
            }
    })
}

/// Spanning-subgraph preorder on classes: `a <= b` iff some labeled copy of
/// `a` is an edge subset of some labeled copy of `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassOrder {
    len: usize,
    up: Vec<ClassMask>,
}

impl ClassOrder {
    pub fn new(table: &ClassTable) -> Self {
        let sym = Symmetry::get(table.n());
        let len = table.len();
        let mut up = vec![table.empty_mask(); len];
        for (a, above) in up.iter_mut().enumerate() {
            let ra = table.representative(a).edges();
            let images: Vec<u16> = (0..sym.len()).map(|p| sym.permute(p, ra)).collect();
            for b in 0..len {
                let rb = table.representative(b).edges();
                if images.iter().any(|&img| img & !rb == 0) {
                    above.insert(b);
                }
            }
        }
        ClassOrder { len, up }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn le(&self, a: ClassId, b: ClassId) -> bool {
        self.up[a].contains(b)
    }

    /// Classes above `a`, including `a`.
    pub fn above(&self, a: ClassId) -> &ClassMask {
        &self.up[a]
    }

    pub fn upward_closure(&self, mask: &ClassMask) -> ClassMask {
        mask.iter().fold(*mask, |acc, a| acc.union(&self.up[a]))
    }
}

pub fn class_order(table: &ClassTable) -> ClassOrder {
    ClassOrder::new(table)
}

pub fn is_monotone(p: &Property, order: &ClassOrder) -> bool {
    p.members().iter().all(|a| order.above(a).is_subset(p.members()))
}

const MONOTONE_RETRIES: usize = 64;

/// Deterministic random monotone property: the upward closure of one to three
/// seed-chosen classes other than the empty graph.
pub fn random_monotone(seed: u64, table: &ClassTable, order: &ClassOrder) -> Result<Property> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if table.len() < 2 {
        return Err(Error::RetriesExhausted(0));
    }
    for _ in 0..MONOTONE_RETRIES {
        let generators = rng.gen_range(1..=3);
        let mut mask = table.empty_mask();
        for _ in 0..generators {
            mask.insert(rng.gen_range(1..table.len()));
        }
        let p = Property::from_mask(table.n(), order.upward_closure(&mask));
        if !p.is_trivial() {
            return Ok(p);
        }
    }
    Err(Error::RetriesExhausted(MONOTONE_RETRIES))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Parity of the number of labeled graphs with the property.
pub fn labeled_parity(p: &Property, table: &ClassTable) -> Parity {
    let total: usize = p.members().iter().map(|c| table.orbit_size(c)).sum();
    if total.is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize) -> &'static ClassTable {
        ClassTable::shared(n).unwrap()
    }

    #[test]
    fn parse_examples() {
        let p = parse_property(r#"{"n":3,"graphs":[[]]}"#).unwrap();
        assert_eq!(p.class_ids(), vec![0]);
        let p = parse_property(r#"{"n":5,"classes":[33]}"#).unwrap();
        assert_eq!(p, builtin("complete", 5).unwrap());
        let once = parse_property(r#"{"n":4,"graphs":[[[1,2],[2,3]]]}"#).unwrap();
        let twice = parse_property(r#"{"n":4,"graphs":[[[1,2],[2,3]],[[3,2],[1,2]]]}"#).unwrap();
        assert_eq!(once, twice);
        let both = parse_property(r#"{"n":4,"graphs":[[]],"classes":[10]}"#).unwrap();
        assert_eq!(both.class_ids(), vec![0, 10]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_property(r#"{"n":5,"graphs":[[[1,6]]]}"#),
            Err(Error::InvalidPair { .. })
        ));
        assert!(matches!(
            parse_property(r#"{"n":5,"graphs":[[[2,2]]]}"#),
            Err(Error::InvalidPair { .. })
        ));
        assert!(matches!(
            parse_property(r#"{"n":5,"graphs":[[[0,2]]]}"#),
            Err(Error::InvalidPair { .. })
        ));
        assert!(matches!(
            parse_property(r#"{"n":5,"classes":[34]}"#),
            Err(Error::ClassOutOfRange { .. })
        ));
        assert!(matches!(parse_property(r#"{"n":7}"#), Err(Error::VertexCount(7))));
        assert!(matches!(parse_property(r#"{"n":5,"extra":1}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_property("not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn doc_round_trip() {
        let p = builtin("connected", 5).unwrap();
        let text = serde_json::to_string(&p.to_doc()).unwrap();
        assert_eq!(parse_property(&text).unwrap(), p);
    }

    #[test]
    fn builtin_counts_n5() {
        assert_eq!(builtin("complete", 5).unwrap().len(), 1);
        assert_eq!(builtin("connected", 5).unwrap().len(), 21);
        assert_eq!(builtin("planar", 5).unwrap().len(), 33);
        assert_eq!(builtin("perfect", 5).unwrap().len(), 33);
        assert!(builtin("perfect", 6).is_err());
        assert!(matches!(builtin("bipartite", 5), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn builtin_counts_n6() {
        assert_eq!(builtin("connected", 6).unwrap().len(), 112);
        let nonplanar = builtin("planar", 6).unwrap().set_complement();
        assert!(nonplanar.contains(155));
        let k33 = LabeledGraph::from_pairs(
            6,
            &[(1, 4), (1, 5), (1, 6), (2, 4), (2, 5), (2, 6), (3, 4), (3, 5), (3, 6)],
        )
        .unwrap();
        assert!(nonplanar.contains(table(6).class_of(&k33)));
        // K6 minus a perfect matching
        let octahedron = LabeledGraph::from_pairs(6, &[(1, 2), (3, 4), (5, 6)])
            .unwrap()
            .complement();
        assert!(!nonplanar.contains(table(6).class_of(&octahedron)));
    }

    #[test]
    fn planar_complement_is_complete_at_n5() {
        let planar = builtin("planar", 5).unwrap();
        assert_eq!(set_complement(&planar), builtin("complete", 5).unwrap());
    }

    #[test]
    fn complement_image_examples() {
        let t = table(5);
        let empty = Property::from_ids(t, [0]).unwrap();
        assert_eq!(empty.graph_complement_image(t).class_ids(), vec![33]);
        let c5 = t.class_of(&LabeledGraph::cycle(5).unwrap());
        let p = Property::from_ids(t, [c5]).unwrap();
        assert_eq!(p.graph_complement_image(t), p);
        assert!(Property::empty(t).is_complement_closed(t));
        assert!(Property::full(t).is_complement_closed(t));
        assert!(!builtin("complete", 5).unwrap().is_complement_closed(t));
    }

    #[test]
    fn complement_maps_commute_at_n4() {
        let t = table(4);
        for bits in 0..1u64 << t.len() {
            let p = Property::from_mask(4, ClassMask::from_bits(t.len(), bits));
            assert_eq!(
                p.set_complement().graph_complement_image(t),
                p.graph_complement_image(t).set_complement()
            );
            assert_eq!(p.graph_complement_image(t).graph_complement_image(t), p);
        }
    }

    #[test]
    fn class_order_examples() {
        let t = table(5);
        let o = class_order(t);
        let single = t.class_of(&LabeledGraph::from_pairs(5, &[(1, 2)]).unwrap());
        let c5 = t.class_of(&LabeledGraph::cycle(5).unwrap());
        for c in 0..t.len() {
            assert!(o.le(0, c));
            assert!(o.le(c, 33));
            assert!(o.le(c, c));
        }
        assert!(o.le(single, c5));
        assert!(!o.le(c5, single));
        for (a, b, c) in (0..t.len()).tuple_combinations() {
            if o.le(a, b) && o.le(b, c) {
                assert!(o.le(a, c));
            }
        }
    }

    #[test]
    fn monotone_examples() {
        let t = table(5);
        let o = class_order(t);
        assert!(is_monotone(&builtin("complete", 5).unwrap(), &o));
        assert!(is_monotone(&builtin("connected", 5).unwrap(), &o));
        assert!(!is_monotone(&builtin("has-isolated-vertex", 5).unwrap(), &o));
        let closure = o.upward_closure(&ClassMask::singleton(34, 33));
        assert_eq!(closure, ClassMask::singleton(34, 33));
    }

    #[test]
    fn random_monotone_is_deterministic_and_monotone() {
        let t = table(5);
        let o = class_order(t);
        for seed in 0..50 {
            let a = random_monotone(seed, t, &o).unwrap();
            assert_eq!(a, random_monotone(seed, t, &o).unwrap());
            assert!(is_monotone(&a, &o));
            assert!(!a.is_trivial());
        }
    }

    #[test]
    fn parity_examples() {
        let t = table(5);
        assert_eq!(labeled_parity(&Property::empty(t), t), Parity::Even);
        let single = t.class_of(&LabeledGraph::from_pairs(5, &[(1, 2)]).unwrap());
        assert_eq!(t.orbit_size(single), 10);
        assert_eq!(
            labeled_parity(&Property::from_ids(t, [single]).unwrap(), t),
            Parity::Even
        );
        assert_eq!(labeled_parity(&Property::full(t), t), Parity::Even);
        assert_eq!(labeled_parity(&Property::from_ids(t, [0]).unwrap(), t), Parity::Odd);
    }
}
