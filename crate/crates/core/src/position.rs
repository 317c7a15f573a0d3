//! Game positions: labelings of the edges of `K_n` as absent, unknown or
//! present, and the table of their isomorphism classes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    check_vertex_count, edge_count, full_mask, ClassMask, ClassTable, EdgeIndex, Symmetry, MAX_VERTICES,
};
use crate::property::Property;

pub type PosId = u32;

/// Alice's reply to a question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Absent,
    Present,
}

impl Answer {
    pub fn flipped(self) -> Self {
        match self {
            Answer::Absent => Answer::Present,
            Answer::Present => Answer::Absent,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Absent => "absent",
            Answer::Present => "present",
        }
    }
}

impl FromStr for Answer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absent" => Ok(Answer::Absent),
            "present" => Ok(Answer::Present),
            other => Err(Error::Parse(format!(
                "answer must be `present` or `absent`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Membership status of every completion of a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    In,
    Out,
    Undetermined,
}

impl Verdict {
    pub fn is_decided(self) -> bool {
        self != Verdict::Undetermined
    }
}

/// Verdict of a set of reachable classes against a property mask.
#[inline]
pub fn verdict_of(reachable: &ClassMask, members: &ClassMask) -> Verdict {
    if reachable.is_subset(members) {
        Verdict::In
    } else if !reachable.intersects(members) {
        Verdict::Out
    } else {
        Verdict::Undetermined
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Position {
    n: u8,
    present: u16,
    asked: u16,
}

impl Position {
    pub fn initial(n: usize) -> Result<Self> {
        check_vertex_count(n)?;
        Ok(Position {
            n: n as u8,
            present: 0,
            asked: 0,
        })
    }

    pub fn new(n: usize, present: u16, asked: u16) -> Result<Self> {
        check_vertex_count(n)?;
        if asked & !full_mask(n) != 0 {
            return Err(Error::Parse(format!("asked mask {asked:#x} exceeds C({n},2) edges")));
        }
        if present & !asked != 0 {
            return Err(Error::Parse("present edges must be a subset of asked edges".into()));
        }
        Ok(Position {
            n: n as u8,
            present,
            asked,
        })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn present(&self) -> u16 {
        self.present
    }

    pub fn asked(&self) -> u16 {
        self.asked
    }

    pub fn absent(&self) -> u16 {
        self.asked & !self.present
    }

    pub fn unknown(&self) -> u16 {
        full_mask(self.n()) & !self.asked
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown().count_ones() as usize
    }

    pub fn is_unknown(&self, e: EdgeIndex) -> bool {
        e < edge_count(self.n()) && self.unknown() >> e & 1 == 1
    }

    pub fn unknown_edges(&self) -> impl Iterator<Item = EdgeIndex> {
        let unknown = self.unknown();
        (0..edge_count(self.n())).filter(move |&e| unknown >> e & 1 == 1)
    }

    /// Status digit of edge `e`: absent 0, unknown 1, present 2.
    pub fn digit(&self, e: EdgeIndex) -> u8 {
        if self.asked >> e & 1 == 0 {
            1
        } else if self.present >> e & 1 == 1 {
            2
        } else {
            0
        }
    }

    /// Position after asking `e` and receiving `answer`.
    pub fn child(&self, e: EdgeIndex, answer: Answer) -> Result<Self> {
        if e >= edge_count(self.n()) {
            return Err(Error::EdgeOutOfRange { edge: e, n: self.n() });
        }
        if self.asked >> e & 1 == 1 {
            return Err(Error::EdgeAlreadyAsked(e));
        }
        let bit = 1u16 << e;
        let present = match answer {
            Answer::Present => self.present | bit,
            Answer::Absent => self.present,
        };
        Ok(Position {
            n: self.n,
            present,
            asked: self.asked | bit,
        })
    }

    /// Swaps present and absent; unknown edges stay unknown.
    pub fn complement(&self) -> Self {
        Position {
            n: self.n,
            present: self.absent(),
            asked: self.asked,
        }
    }

    pub fn permuted(&self, p: usize) -> Self {
        let sym = Symmetry::get(self.n());
        Position {
            n: self.n,
            present: sym.permute(p, self.present),
            asked: sym.permute(p, self.asked),
        }
    }

    /// Raw base-3 code of this labeling (not canonicalized).
    pub fn code(&self) -> PositionCode {
        let w = CodeWeights::get(self.n());
        PositionCode(w.code(self.present, self.asked))
    }
}

pub fn position_complement(p: &Position) -> Position {
    p.complement()
}

/// Base-3 edge string, edge 0 most significant; absent 0, unknown 1,
/// present 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PositionCode(pub u32);

impl PositionCode {
    pub fn initial(n: usize) -> Self {
        PositionCode(CodeWeights::get(n).base)
    }

    pub fn digits(&self, n: usize) -> Vec<u8> {
        let m = edge_count(n);
        let mut out = vec![0u8; m];
        let mut rest = self.0;
        for i in (0..m).rev() {
            out[i] = (rest % 3) as u8;
            rest /= 3;
        }
        out
    }

    pub fn to_string(&self, n: usize) -> String {
        self.digits(n).iter().map(|d| char::from(b'0' + d)).collect()
    }

    /// The labeled position spelled by this code.
    pub fn decode(&self, n: usize) -> Position {
        let mut present = 0u16;
        let mut asked = 0u16;
        for (e, d) in self.digits(n).into_iter().enumerate() {
            match d {
                0 => asked |= 1 << e,
                2 => {
                    asked |= 1 << e;
                    present |= 1 << e;
                }
                _ => {}
            }
        }
        Position {
            n: n as u8,
            present,
            asked,
        }
    }
}

struct CodeWeights {
    low: [u32; 256],
    high: [u32; 128],
    base: u32,
}

impl CodeWeights {
    fn get(n: usize) -> &'static CodeWeights {
        static TABLES: [OnceLock<CodeWeights>; MAX_VERTICES + 1] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        TABLES[n].get_or_init(|| {
            let m = edge_count(n);
            let weight = |e: usize| 3u32.pow((m - 1 - e) as u32);
            let mut low = [0u32; 256];
            let mut high = [0u32; 128];
            for byte in 0..256usize {
                for bit in 0..8 {
                    if byte >> bit & 1 == 1 {
                        if bit < m {
                            low[byte] += weight(bit);
                        }
                        if byte < 128 && bit + 8 < m {
                            high[byte] += weight(bit + 8);
                        }
                    }
                }
            }
            let base = (0..m).map(weight).sum();
            CodeWeights { low, high, base }
        })
    }

    #[inline]
    fn weigh(&self, mask: u16) -> u32 {
        self.low[(mask & 0xff) as usize] + self.high[(mask >> 8) as usize]
    }

    // all-unknown plus one per present edge minus one per absent edge
    #[inline]
    fn code(&self, present: u16, asked: u16) -> u32 {
        self.base + 2 * self.weigh(present) - self.weigh(asked)
    }
}

/// Canonical code of `p` and the first permutation (in lexicographic
/// permutation order) that maps `p` onto its canonical representative.
pub fn canonical_position_form(p: &Position) -> (PositionCode, usize) {
    let sym = Symmetry::get(p.n());
    let w = CodeWeights::get(p.n());
    let mut best = u32::MAX;
    let mut best_perm = 0;
    for perm in 0..sym.len() {
        let code = w.code(sym.permute(perm, p.present), sym.permute(perm, p.asked));
        if code < best {
            best = code;
            best_perm = perm;
        }
    }
    (PositionCode(best), best_perm)
}

pub fn canonical_position(p: &Position) -> PositionCode {
    canonical_position_form(p).0
}

pub fn child(p: &Position, e: EdgeIndex, answer: Answer) -> Result<Position> {
    p.child(e, answer)
}

/// Moves out of a canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChildLink {
    /// Unknown edge of the canonical representative.
    pub edge: u8,
    pub absent: PosId,
    pub present: PosId,
    /// False when an earlier edge of the same representative leads to the
    /// same pair of children.
    pub distinct: bool,
}

/// Canonical position classes for one `n`.
///
/// Ids `0..len()` are the positions with at least one unknown edge, sorted
/// by code; ids `len()..node_count()` are the completed graphs (no unknown
/// edge), also sorted by code. Every id has a representative, a reachable
/// mask and child links, so the solver treats both ranges uniformly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionTable {
    n: usize,
    classes: usize,
    interior: usize,
    codes: Vec<PositionCode>,
    unknown_count: Vec<u8>,
    reachable: Vec<ClassMask>,
    child_start: Vec<u32>,
    children: Vec<ChildLink>,
    complement: Vec<PosId>,
    bottom_up: Vec<PosId>,
    initial: PosId,
}

// Unknown edge of a representative with its absent and present children.
type RawLink = (u8, PositionCode, PositionCode);

pub fn build_position_table(n: usize, classes: &ClassTable) -> Result<PositionTable> {
    PositionTable::new(n, classes)
}

impl PositionTable {
    pub fn new(n: usize, classes: &ClassTable) -> Result<Self> {
        check_vertex_count(n)?;
        if classes.n() != n {
            return Err(Error::VertexCountMismatch {
                expected: n,
                found: classes.n(),
            });
        }
        let m = edge_count(n);

        // Expand level by level; level k holds classes with k asked edges.
        let mut level: BTreeSet<PositionCode> = BTreeSet::new();
        level.insert(PositionCode::initial(n));
        let mut all: Vec<PositionCode> = Vec::new();
        let mut raw_children: Vec<(PositionCode, Vec<RawLink>)> = Vec::new();
        for _ in 0..=m {
            let mut next = BTreeSet::new();
            for &code in &level {
                let rep = code.decode(n);
                let mut links = Vec::with_capacity(rep.unknown_count());
                for e in rep.unknown_edges() {
                    let a = canonical_position(&rep.child(e, Answer::Absent)?);
                    let b = canonical_position(&rep.child(e, Answer::Present)?);
                    next.insert(a);
                    next.insert(b);
                    links.push((e as u8, a, b));
                }
                all.push(code);
                raw_children.push((code, links));
            }
            level = next;
        }
        debug_assert!(level.is_empty());

        raw_children.sort_by_key(|(code, links)| (links.is_empty(), *code));
        let codes: Vec<PositionCode> = raw_children.iter().map(|(c, _)| *c).collect();
        let interior = raw_children.iter().filter(|(_, links)| !links.is_empty()).count();
        let id_of = |code: PositionCode| -> PosId { search(&codes, interior, code).expect("child class was expanded") };

        let len = codes.len();
        let mut child_start = Vec::with_capacity(len + 1);
        let mut children = Vec::new();
        let mut unknown_count = Vec::with_capacity(len);
        for (code, links) in &raw_children {
            child_start.push(children.len() as u32);
            unknown_count.push(code.decode(n).unknown_count() as u8);
            let first = children.len();
            for &(edge, a, b) in links {
                let (absent, present) = (id_of(a), id_of(b));
                let distinct = !children[first..]
                    .iter()
                    .any(|c: &ChildLink| c.absent == absent && c.present == present);
                children.push(ChildLink {
                    edge,
                    absent,
                    present,
                    distinct,
                });
            }
        }
        child_start.push(children.len() as u32);

        let mut bottom_up: Vec<PosId> = (0..len as PosId).collect();
        bottom_up.sort_by_key(|&id| unknown_count[id as usize]);

        let mut reachable = vec![classes.empty_mask(); len];
        for &id in &bottom_up {
            let i = id as usize;
            let links = &children[child_start[i] as usize..child_start[i + 1] as usize];
            reachable[i] = match links.first() {
                None => {
                    let rep = codes[i].decode(n);
                    ClassMask::singleton(classes.len(), classes.class_of_mask(rep.present))
                }
                Some(link) => reachable[link.absent as usize].union(&reachable[link.present as usize]),
            };
        }

        let complement = codes
            .iter()
            .map(|c| id_of(canonical_position(&c.decode(n).complement())))
            .collect();
        let initial = id_of(PositionCode::initial(n));

        Ok(PositionTable {
            n,
            classes: classes.len(),
            interior,
            codes,
            unknown_count,
            reachable,
            child_start,
            children,
            complement,
            bottom_up,
            initial,
        })
    }

    /// Process-wide table for `n`, built on first use.
    pub fn shared(n: usize) -> Result<&'static PositionTable> {
        static TABLES: [OnceLock<PositionTable>; MAX_VERTICES + 1] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        let classes = ClassTable::shared(n)?;
        Ok(TABLES[n].get_or_init(|| PositionTable::new(n, classes).expect("vertex count checked")))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of position classes with at least one unknown edge.
    pub fn len(&self) -> usize {
        self.interior
    }

    pub fn is_empty(&self) -> bool {
        self.interior == 0
    }

    /// Number of classes including completed graphs.
    pub fn node_count(&self) -> usize {
        self.codes.len()
    }

    pub fn is_terminal(&self, id: PosId) -> bool {
        id as usize >= self.interior
    }

    /// Width of the reachable masks (number of graph classes).
    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn initial(&self) -> PosId {
        self.initial
    }

    pub fn code(&self, id: PosId) -> PositionCode {
        self.codes[id as usize]
    }

    pub fn codes(&self) -> &[PositionCode] {
        &self.codes
    }

    pub fn representative(&self, id: PosId) -> Position {
        self.codes[id as usize].decode(self.n)
    }

    pub fn unknown_count(&self, id: PosId) -> usize {
        self.unknown_count[id as usize] as usize
    }

    pub fn reachable(&self, id: PosId) -> &ClassMask {
        &self.reachable[id as usize]
    }

    pub fn children(&self, id: PosId) -> &[ChildLink] {
        let i = id as usize;
        &self.children[self.child_start[i] as usize..self.child_start[i + 1] as usize]
    }

    /// Child pair for canonical edge `edge` of the representative of `id`.
    pub fn child_for_edge(&self, id: PosId, edge: EdgeIndex) -> Option<&ChildLink> {
        self.children(id).iter().find(|c| c.edge as usize == edge)
    }

    /// Class of the complement of the representative of `id`.
    pub fn complement_of(&self, id: PosId) -> PosId {
        self.complement[id as usize]
    }

    /// Ids ordered by ascending unknown count.
    pub fn bottom_up(&self) -> &[PosId] {
        &self.bottom_up
    }

    pub fn lookup(&self, code: PositionCode) -> Option<PosId> {
        search(&self.codes, self.interior, code)
    }

    /// Class of a labeled position and the permutation mapping it onto the
    /// class representative.
    pub fn locate(&self, p: &Position) -> (PosId, usize) {
        assert_eq!(p.n(), self.n, "position and table disagree on n");
        let (code, perm) = canonical_position_form(p);
        (self.lookup(code).expect("every position class is in the table"), perm)
    }

    pub fn id_of(&self, p: &Position) -> PosId {
        self.locate(p).0
    }

    /// Number of classes (completed graphs included) per unknown-edge count,
    /// index = unknown count.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut out = vec![0; edge_count(self.n) + 1];
        for &u in &self.unknown_count {
            out[u as usize] += 1;
        }
        out
    }
}

fn search(codes: &[PositionCode], interior: usize, code: PositionCode) -> Option<PosId> {
    let (inner, leaves) = codes.split_at(interior);
    inner
        .binary_search(&code)
        .ok()
        .or_else(|| leaves.binary_search(&code).ok().map(|i| i + interior))
        .map(|i| i as PosId)
}

pub fn reachable_classes(id: PosId, table: &PositionTable) -> ClassMask {
    *table.reachable(id)
}

pub fn decided_for(id: PosId, property: &Property, table: &PositionTable) -> Verdict {
    verdict_of(table.reachable(id), property.members())
}
