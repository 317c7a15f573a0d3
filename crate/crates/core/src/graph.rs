//! Labeled and unlabeled graphs on at most six vertices.
//!
//! Edges of `K_n` are numbered in lexicographic pair order, so `(1,2)` is
//! edge 0 and `(n-1,n)` is edge `C(n,2)-1`. A labeled graph is a bit set over
//! these indices. Canonical forms are brute-force minima over all `n!` vertex
//! permutations, taken in the order where edge 0 is the most significant
//! position of the code string.

use std::fmt;
use std::sync::OnceLock;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_VERTICES: usize = 2;
pub const MAX_VERTICES: usize = 6;
/// `C(6,2)`.
pub const MAX_EDGES: usize = 15;

pub type ClassId = usize;
pub type EdgeIndex = usize;

pub fn check_vertex_count(n: usize) -> Result<()> {
    if (MIN_VERTICES..=MAX_VERTICES).contains(&n) {
        Ok(())
    } else {
        Err(Error::VertexCount(n))
    }
}

#[inline]
pub const fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

#[inline]
pub const fn full_mask(n: usize) -> u16 {
    ((1u32 << edge_count(n)) - 1) as u16
}

/// Zero-based rank of the 1-based pair `(u,v)` in lexicographic pair order.
pub fn edge_index(u: usize, v: usize, n: usize) -> Result<EdgeIndex> {
    if u == 0 || u >= v || v > n || n > MAX_VERTICES {
        return Err(Error::InvalidPair { u, v, n });
    }
    Ok((u - 1) * (2 * n - u) / 2 + (v - u - 1))
}

/// Inverse of [`edge_index`]; returns the 1-based pair.
pub fn edge_endpoints(e: EdgeIndex, n: usize) -> Result<(usize, usize)> {
    if e >= edge_count(n) {
        return Err(Error::EdgeOutOfRange { edge: e, n });
    }
    let mut rest = e;
    for u in 1..n {
        let row = n - u;
        if rest < row {
            return Ok((u, u + 1 + rest));
        }
        rest -= row;
    }
    unreachable!("edge index checked against C(n,2)")
}

/// Precomputed action of the symmetric group `S_n` on edge masks.
///
/// Permutations are stored in lexicographic order; index 0 is the identity.
#[derive(Debug)]
pub struct Symmetry {
    n: usize,
    perms: Vec<[u8; MAX_VERTICES]>,
    edge_maps: Vec<[u8; MAX_EDGES]>,
    low: Vec<[u16; 256]>,
    high: Vec<[u16; 128]>,
}

impl Symmetry {
    fn build(n: usize) -> Self {
        let m = edge_count(n);
        let mut perms = Vec::new();
        let mut edge_maps = Vec::new();
        let mut low = Vec::new();
        let mut high = Vec::new();
        for p in (0..n).permutations(n) {
            let mut perm = [0u8; MAX_VERTICES];
            for (i, &v) in p.iter().enumerate() {
                perm[i] = v as u8;
            }
            let mut map = [0u8; MAX_EDGES];
            for (e, slot) in map.iter_mut().enumerate().take(m) {
                let (u, v) = edge_endpoints(e, n).expect("edge in range");
                let (a, b) = (p[u - 1] + 1, p[v - 1] + 1);
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                *slot = edge_index(a, b, n).expect("valid pair") as u8;
            }
            let mut lo = [0u16; 256];
            let mut hi = [0u16; 128];
            for byte in 0..256usize {
                for bit in 0..8 {
                    if byte >> bit & 1 == 1 {
                        if bit < m {
                            lo[byte] |= 1 << map[bit];
                        }
                        if byte < 128 && bit + 8 < m {
                            hi[byte] |= 1 << map[bit + 8];
                        }
                    }
                }
            }
            perms.push(perm);
            edge_maps.push(map);
            low.push(lo);
            high.push(hi);
        }
        Symmetry {
            n,
            perms,
            edge_maps,
            low,
            high,
        }
    }

    /// Shared table for `n`; built on first use.
    pub fn get(n: usize) -> &'static Symmetry {
        static TABLES: [OnceLock<Symmetry>; MAX_VERTICES + 1] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        assert!(
            (MIN_VERTICES..=MAX_VERTICES).contains(&n),
            "vertex count {n} out of range"
        );
        TABLES[n].get_or_init(|| Symmetry::build(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    /// Vertex images (0-based) of permutation `p`.
    pub fn vertex_map(&self, p: usize) -> &[u8] {
        &self.perms[p][..self.n]
    }

    /// Image of edge `e` under permutation `p`.
    #[inline]
    pub fn map_edge(&self, p: usize, e: EdgeIndex) -> EdgeIndex {
        self.edge_maps[p][e] as usize
    }

    /// Edge index `e` such that `map_edge(p, e) == image`.
    pub fn pull_back_edge(&self, p: usize, image: EdgeIndex) -> EdgeIndex {
        self.edge_maps[p][..edge_count(self.n)]
            .iter()
            .position(|&x| x as usize == image)
            .expect("edge map is a bijection")
    }

    #[inline]
    pub fn permute(&self, p: usize, mask: u16) -> u16 {
        self.low[p][(mask & 0xff) as usize] | self.high[p][(mask >> 8) as usize]
    }
}

/// Bit-reversal of the low `m` bits: the numeric value of the edge string
/// read with edge 0 as the most significant digit.
#[inline]
pub(crate) fn string_value(mask: u16, m: usize) -> u16 {
    if m == 0 {
        0
    } else {
        mask.reverse_bits() >> (16 - m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    n: u8,
    edges: u16,
}

impl LabeledGraph {
    pub fn new(n: usize, edges: u16) -> Result<Self> {
        check_vertex_count(n)?;
        if edges & !full_mask(n) != 0 {
            return Err(Error::EdgeOutOfRange {
                edge: 15 - edges.leading_zeros() as usize,
                n,
            });
        }
        Ok(LabeledGraph { n: n as u8, edges })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn complete(n: usize) -> Result<Self> {
        check_vertex_count(n)?;
        Self::new(n, full_mask(n))
    }

    /// Builds a graph from 1-based pairs; pairs are normalized so `(v,u)`
    /// means `(u,v)`. Loops and out-of-range vertices are rejected.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        check_vertex_count(n)?;
        let mut edges = 0u16;
        for &(a, b) in pairs {
            let (u, v) = if a <= b { (a, b) } else { (b, a) };
            edges |= 1 << edge_index(u, v, n)?;
        }
        Self::new(n, edges)
    }

    /// The `n`-cycle `1-2-...-n-1`.
    pub fn cycle(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..=n).map(|i| (i, i % n + 1)).collect();
        Self::from_pairs(n, &pairs)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn edges(&self) -> u16 {
        self.edges
    }

    pub fn edge_total(&self) -> usize {
        self.edges.count_ones() as usize
    }

    pub fn has_edge(&self, e: EdgeIndex) -> bool {
        self.edges >> e & 1 == 1
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        edge_index(a, b, self.n()).map(|e| self.has_edge(e)).unwrap_or(false)
    }

    /// 1-based pairs in edge-index order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..edge_count(self.n()))
            .filter(|&e| self.has_edge(e))
            .map(|e| edge_endpoints(e, self.n()).expect("edge in range"))
            .collect()
    }

    pub fn complement(&self) -> Self {
        LabeledGraph {
            n: self.n,
            edges: !self.edges & full_mask(self.n()),
        }
    }

    /// Image under permutation number `p` of [`Symmetry::get`].
    pub fn permuted(&self, p: usize) -> Self {
        LabeledGraph {
            n: self.n,
            edges: Symmetry::get(self.n()).permute(p, self.edges),
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        (1..=self.n()).filter(|&w| self.adjacent(v, w)).count()
    }
}

/// Lexicographically minimal edge string of an isomorphism class.
///
/// Stored as the numeric value of the string with edge 0 as the most
/// significant bit, so `Ord` matches string order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GraphCode(pub u16);

impl GraphCode {
    /// Character at string position `index` (0 = edge 0).
    pub fn bit_at(&self, index: usize, n: usize) -> bool {
        let m = edge_count(n);
        self.0 >> (m - 1 - index) & 1 == 1
    }

    /// The canonical labeled representative.
    pub fn representative(&self, n: usize) -> LabeledGraph {
        LabeledGraph {
            n: n as u8,
            edges: string_value(self.0, edge_count(n)),
        }
    }

    pub fn to_string(&self, n: usize) -> String {
        (0..edge_count(n))
            .map(|i| if self.bit_at(i, n) { '1' } else { '0' })
            .collect()
    }
}

/// Canonical code together with the first permutation attaining it.
pub fn canonical_form(g: &LabeledGraph) -> (GraphCode, usize) {
    let sym = Symmetry::get(g.n());
    let m = edge_count(g.n());
    let mut best = u16::MAX;
    let mut best_perm = 0;
    for p in 0..sym.len() {
        let value = string_value(sym.permute(p, g.edges), m);
        if value < best {
            best = value;
            best_perm = p;
        }
    }
    (GraphCode(best), best_perm)
}

pub fn canonical_code(g: &LabeledGraph) -> GraphCode {
    canonical_form(g).0
}

pub fn complement_graph(g: &LabeledGraph) -> LabeledGraph {
    g.complement()
}

/// Number of vertex permutations fixing the edge set of `g`.
pub fn aut_order(g: &LabeledGraph) -> usize {
    let sym = Symmetry::get(g.n());
    (0..sym.len()).filter(|&p| sym.permute(p, g.edges) == g.edges).count()
}

pub fn class_of(g: &LabeledGraph, table: &ClassTable) -> ClassId {
    table.class_of(g)
}

/// Bit set over the class ids of one [`ClassTable`] (at most 156 classes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassMask {
    words: [u64; 3],
    len: u16,
}

impl ClassMask {
    pub const CAPACITY: usize = 192;

    pub fn empty(len: usize) -> Self {
        assert!(len <= Self::CAPACITY);
        ClassMask {
            words: [0; 3],
            len: len as u16,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut mask = Self::empty(len);
        for i in 0..len {
            mask.insert(i);
        }
        mask
    }

    pub fn singleton(len: usize, id: ClassId) -> Self {
        let mut mask = Self::empty(len);
        mask.insert(id);
        mask
    }

    pub fn from_ids(len: usize, ids: impl IntoIterator<Item = ClassId>) -> Self {
        let mut mask = Self::empty(len);
        for id in ids {
            mask.insert(id);
        }
        mask
    }

    /// Low 64 classes as an integer; only meaningful when `len() <= 64`.
    pub fn from_bits(len: usize, bits: u64) -> Self {
        assert!(len <= 64);
        let mut mask = Self::empty(len);
        mask.words[0] = if len == 64 { bits } else { bits & ((1u64 << len) - 1) };
        mask
    }

    pub fn bits(&self) -> u64 {
        debug_assert!(self.len <= 64);
        self.words[0]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.words == [0; 3]
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len()
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, id: ClassId) -> bool {
        id < self.len() && self.words[id / 64] >> (id % 64) & 1 == 1
    }

    pub fn insert(&mut self, id: ClassId) {
        assert!(id < self.len(), "class id {id} outside mask of width {}", self.len);
        self.words[id / 64] |= 1 << (id % 64);
    }

    pub fn remove(&mut self, id: ClassId) {
        if id < self.len() {
            self.words[id / 64] &= !(1 << (id % 64));
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for i in 0..3 {
            out.words[i] |= other.words[i];
        }
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for i in 0..3 {
            out.words[i] &= other.words[i];
        }
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for i in 0..3 {
            out.words[i] &= !other.words[i];
        }
        out
    }

    pub fn complement(&self) -> Self {
        Self::full(self.len()).difference(self)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    pub fn intersects(&self, other: &Self) -> bool {
        !self.intersection(other).is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ClassId> + '_ {
        (0..self.len()).filter(move |&i| self.contains(i))
    }
}

impl fmt::Display for ClassMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().map(|i| i.to_string()).join(","))
    }
}

/// The isomorphism classes of `n`-vertex graphs, sorted by canonical code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    n: usize,
    codes: Vec<GraphCode>,
    aut_order: Vec<usize>,
    orbit_size: Vec<usize>,
    complement_class: Vec<ClassId>,
    // class of every labeled edge mask
    labeled_class: Vec<u8>,
}

pub fn enumerate_classes(n: usize) -> Result<ClassTable> {
    ClassTable::new(n)
}

impl ClassTable {
    pub fn new(n: usize) -> Result<Self> {
        check_vertex_count(n)?;
        let sym = Symmetry::get(n);
        let m = edge_count(n);
        let total = 1usize << m;
        const UNSET: u8 = u8::MAX;
        let mut orbit_of = vec![UNSET; total];
        let mut orbits: Vec<(GraphCode, usize)> = Vec::new();
        for mask in 0..total {
            if orbit_of[mask] != UNSET {
                continue;
            }
            let id = orbits.len() as u8;
            let mut best = u16::MAX;
            let mut size = 0;
            for p in 0..sym.len() {
                let image = sym.permute(p, mask as u16);
                best = best.min(string_value(image, m));
                if orbit_of[image as usize] == UNSET {
                    orbit_of[image as usize] = id;
                    size += 1;
                }
            }
            orbits.push((GraphCode(best), size));
        }
        let mut order: Vec<usize> = (0..orbits.len()).collect();
        order.sort_by_key(|&i| orbits[i].0);
        let mut rank = vec![0u8; orbits.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new as u8;
        }
        let labeled_class: Vec<u8> = orbit_of.iter().map(|&o| rank[o as usize]).collect();
        let codes: Vec<GraphCode> = order.iter().map(|&i| orbits[i].0).collect();
        let orbit_size: Vec<usize> = order.iter().map(|&i| orbits[i].1).collect();
        let factorial = sym.len();
        let aut_order = orbit_size.iter().map(|&s| factorial / s).collect();
        let full = full_mask(n);
        let complement_class = codes
            .iter()
            .map(|c| labeled_class[(c.representative(n).edges ^ full) as usize] as ClassId)
            .collect();
        Ok(ClassTable {
            n,
            codes,
            aut_order,
            orbit_size,
            complement_class,
            labeled_class,
        })
    }

    /// Process-wide table for `n`, built on first use.
    pub fn shared(n: usize) -> Result<&'static ClassTable> {
        static TABLES: [OnceLock<ClassTable>; MAX_VERTICES + 1] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        check_vertex_count(n)?;
        Ok(TABLES[n].get_or_init(|| ClassTable::new(n).expect("vertex count checked")))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[GraphCode] {
        &self.codes
    }

    pub fn code(&self, id: ClassId) -> GraphCode {
        self.codes[id]
    }

    pub fn representative(&self, id: ClassId) -> LabeledGraph {
        self.codes[id].representative(self.n)
    }

    pub fn aut_order(&self, id: ClassId) -> usize {
        self.aut_order[id]
    }

    pub fn orbit_size(&self, id: ClassId) -> usize {
        self.orbit_size[id]
    }

    pub fn complement_class(&self, id: ClassId) -> ClassId {
        self.complement_class[id]
    }

    pub fn class_of(&self, g: &LabeledGraph) -> ClassId {
        assert_eq!(g.n(), self.n, "graph and class table disagree on n");
        self.labeled_class[g.edges as usize] as ClassId
    }

    /// Class of a raw edge mask over this table's `n`.
    #[inline]
    pub fn class_of_mask(&self, edges: u16) -> ClassId {
        self.labeled_class[edges as usize] as ClassId
    }

    pub fn check_id(&self, id: ClassId) -> Result<()> {
        if id < self.len() {
            Ok(())
        } else {
            Err(Error::ClassOutOfRange { id, len: self.len() })
        }
    }

    pub fn empty_mask(&self) -> ClassMask {
        ClassMask::empty(self.len())
    }

    pub fn full_mask(&self) -> ClassMask {
        ClassMask::full(self.len())
    }

    /// Classes with `complement_class(c) == c`.
    pub fn self_complementary(&self) -> Vec<ClassId> {
        (0..self.len()).filter(|&c| self.complement_class[c] == c).collect()
    }
}
