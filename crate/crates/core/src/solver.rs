//! Exact evaluation of the edge-probing game for a fixed property.
//!
//! `D(p)` is the number of further questions Bob needs in the worst case
//! from position `p` when both sides play optimally. A decided position has
//! `D = 0`; otherwise `D = min_e 1 + max(D(p+e absent), D(p+e present))`.
//! The property is evasive iff `D` of the initial position is `C(n,2)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{edge_count, ClassTable, EdgeIndex, Symmetry};
use crate::position::{verdict_of, Answer, PosId, Position, PositionTable, Verdict};
use crate::property::Property;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Solve only one position of each complement pair when the property is
    /// closed under graph complementation.
    pub complement_quotient: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    property: Property,
    remaining: Vec<u8>,
    best_edge: Vec<Option<u8>>,
    verdict: Vec<Verdict>,
    depth: usize,
    evasive: bool,
}

impl SolveReport {
    pub fn property(&self) -> &Property {
        &self.property
    }

    pub fn n(&self) -> usize {
        self.property.n()
    }

    /// Worst-case remaining questions at a canonical position.
    pub fn remaining(&self, id: PosId) -> usize {
        self.remaining[id as usize] as usize
    }

    pub fn remaining_table(&self) -> &[u8] {
        &self.remaining
    }

    /// Smallest canonical edge attaining the optimum; `None` when decided.
    pub fn best_edge(&self, id: PosId) -> Option<EdgeIndex> {
        self.best_edge[id as usize].map(usize::from)
    }

    pub fn verdict(&self, id: PosId) -> Verdict {
        self.verdict[id as usize]
    }

    /// Worst-case question count from the initial position.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_evasive(&self) -> bool {
        self.evasive
    }

    pub fn remaining_at(&self, table: &PositionTable, p: &Position) -> usize {
        self.remaining(table.id_of(p))
    }

    pub fn verdict_at(&self, table: &PositionTable, p: &Position) -> Verdict {
        self.verdict(table.id_of(p))
    }

    /// Worst case after asking labeled edge `e` at `p`, counting `e` itself.
    pub fn move_value(&self, table: &PositionTable, p: &Position, e: EdgeIndex) -> Result<usize> {
        if !p.is_unknown(e) {
            return Err(Error::EdgeAlreadyAsked(e));
        }
        let (id, perm) = table.locate(p);
        let image = Symmetry::get(p.n()).map_edge(perm, e);
        let link = table.child_for_edge(id, image).expect("unknown edge has a child link");
        Ok(1 + self.remaining(link.absent).max(self.remaining(link.present)))
    }

    /// Bob's move at a labeled position: the smallest labeled edge whose
    /// canonical image is optimal.
    pub fn best_move(&self, table: &PositionTable, p: &Position) -> Result<EdgeIndex> {
        let (id, perm) = table.locate(p);
        if self.verdict(id).is_decided() {
            return Err(Error::AlreadyDecided);
        }
        let target = self.remaining(id);
        let sym = Symmetry::get(p.n());
        for e in p.unknown_edges() {
            let link = table
                .child_for_edge(id, sym.map_edge(perm, e))
                .expect("unknown edge has a child link");
            if 1 + self.remaining(link.absent).max(self.remaining(link.present)) == target {
                return Ok(e);
            }
        }
        unreachable!("an undecided position has an optimal move")
    }

    /// Alice's reply: the answer leading to the larger `D`, present on ties.
    pub fn adversary_answer(&self, table: &PositionTable, p: &Position, e: EdgeIndex) -> Result<Answer> {
        if e >= edge_count(p.n()) {
            return Err(Error::EdgeOutOfRange { edge: e, n: p.n() });
        }
        if !p.is_unknown(e) {
            return Err(Error::EdgeAlreadyAsked(e));
        }
        let (id, perm) = table.locate(p);
        let link = table
            .child_for_edge(id, Symmetry::get(p.n()).map_edge(perm, e))
            .expect("unknown edge has a child link");
        if self.remaining(link.absent) > self.remaining(link.present) {
            Ok(Answer::Absent)
        } else {
            Ok(Answer::Present)
        }
    }
}

pub fn solve(property: &Property, table: &PositionTable) -> Result<SolveReport> {
    solve_with(property, table, SolveOptions::default())
}

pub fn solve_with(property: &Property, table: &PositionTable, options: SolveOptions) -> Result<SolveReport> {
    if property.n() != table.n() {
        return Err(Error::VertexCountMismatch {
            expected: table.n(),
            found: property.n(),
        });
    }
    let len = table.node_count();
    let mut remaining = vec![0u8; len];
    let mut best_edge = vec![None; len];
    let mut verdict = vec![Verdict::Undetermined; len];

    let quotient = options.complement_quotient && property.is_complement_closed(ClassTable::shared(table.n())?);

    let order = table.bottom_up();
    let mut start = 0;
    while start < order.len() {
        let level = table.unknown_count(order[start]);
        let end = order[start..]
            .iter()
            .position(|&id| table.unknown_count(id) != level)
            .map_or(order.len(), |k| start + k);
        for &id in &order[start..end] {
            let i = id as usize;
            if quotient && table.complement_of(id) < id {
                continue;
            }
            let v = verdict_of(table.reachable(id), property.members());
            verdict[i] = v;
            if v.is_decided() {
                continue;
            }
            let mut best = u8::MAX;
            for link in table.children(id) {
                let value = 1 + remaining[link.absent as usize].max(remaining[link.present as usize]);
                if value < best {
                    best = value;
                    best_edge[i] = Some(link.edge);
                }
            }
            remaining[i] = best;
        }
        if quotient {
            for &id in &order[start..end] {
                let twin = table.complement_of(id);
                if twin < id {
                    let (i, j) = (id as usize, twin as usize);
                    remaining[i] = remaining[j];
                    verdict[i] = verdict_of(table.reachable(id), property.members());
                    best_edge[i] = best_optimal_edge(table, id, &remaining);
                }
            }
        }
        start = end;
    }

    let depth = remaining[table.initial() as usize] as usize;
    Ok(SolveReport {
        property: *property,
        remaining,
        best_edge,
        verdict,
        depth,
        evasive: depth == edge_count(table.n()),
    })
}

fn best_optimal_edge(table: &PositionTable, id: PosId, remaining: &[u8]) -> Option<u8> {
    if remaining[id as usize] == 0 {
        return None;
    }
    table
        .children(id)
        .iter()
        .find(|l| 1 + remaining[l.absent as usize].max(remaining[l.present as usize]) == remaining[id as usize])
        .map(|l| l.edge)
}

pub fn is_evasive(property: &Property, table: &PositionTable) -> Result<bool> {
    Ok(solve(property, table)?.is_evasive())
}

pub fn best_move(report: &SolveReport, table: &PositionTable, p: &Position) -> Result<EdgeIndex> {
    report.best_move(table, p)
}

pub fn adversary_answer(report: &SolveReport, table: &PositionTable, p: &Position, e: EdgeIndex) -> Result<Answer> {
    report.adversary_answer(table, p, e)
}

/// Short-circuit evasiveness test for properties over at most 64 classes.
///
/// A position is tight when `D` equals its unknown count. The initial
/// position is tight iff the property is evasive; an undecided position is
/// tight iff every move has a tight child, a decided one iff it is a leaf.
/// Memo entries are stamped per call, so the scratch is reused across
/// properties without clearing.
pub struct EvasionProbe<'a> {
    table: &'a PositionTable,
    reach: Vec<u64>,
    unknown: Vec<u8>,
    move_start: Vec<u32>,
    moves: Vec<(u32, u32)>,
    stamp: Vec<u64>,
    tight: Vec<bool>,
    generation: u64,
}

impl<'a> EvasionProbe<'a> {
    pub fn new(table: &'a PositionTable) -> Result<Self> {
        if table.class_count() > 64 {
            return Err(Error::ScanMode(format!(
                "fast evasion probe needs at most 64 graph classes, n={} has {}",
                table.n(),
                table.class_count()
            )));
        }
        let len = table.node_count();
        let mut move_start = Vec::with_capacity(len + 1);
        let mut moves = Vec::new();
        for id in 0..len as PosId {
            move_start.push(moves.len() as u32);
            moves.extend(
                table
                    .children(id)
                    .iter()
                    .filter(|l| l.distinct)
                    .map(|l| (l.absent, l.present)),
            );
        }
        move_start.push(moves.len() as u32);
        Ok(EvasionProbe {
            table,
            reach: (0..len as PosId).map(|id| table.reachable(id).bits()).collect(),
            unknown: (0..len as PosId).map(|id| table.unknown_count(id) as u8).collect(),
            move_start,
            moves,
            stamp: vec![0; len],
            tight: vec![false; len],
            generation: 0,
        })
    }

    pub fn table(&self) -> &PositionTable {
        self.table
    }

    /// Evasiveness of the property whose member classes are the set bits of
    /// `members`.
    pub fn is_evasive(&mut self, members: u64) -> bool {
        self.generation += 1;
        self.tight_at(self.table.initial(), members)
    }

    fn tight_at(&mut self, id: PosId, members: u64) -> bool {
        let i = id as usize;
        if self.stamp[i] == self.generation {
            return self.tight[i];
        }
        let reach = self.reach[i];
        let result = if reach & members == 0 || reach & !members == 0 {
            self.unknown[i] == 0
        } else {
            let (lo, hi) = (self.move_start[i] as usize, self.move_start[i + 1] as usize);
            (lo..hi).all(|k| {
                let (a, b) = self.moves[k];
                self.tight_at(a, members) || self.tight_at(b, members)
            })
        };
        self.stamp[i] = self.generation;
        self.tight[i] = result;
        result
    }
}

/// Bob's decision tree over labeled positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategyNode {
    Leaf(Verdict),
    Ask {
        edge: EdgeIndex,
        absent: Box<StrategyNode>,
        present: Box<StrategyNode>,
    },
}

impl StrategyNode {
    pub fn depth(&self) -> usize {
        match self {
            StrategyNode::Leaf(_) => 0,
            StrategyNode::Ask { absent, present, .. } => 1 + absent.depth().max(present.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            StrategyNode::Leaf(_) => 1,
            StrategyNode::Ask { absent, present, .. } => absent.leaf_count() + present.leaf_count(),
        }
    }

    pub fn child(&self, answer: Answer) -> Option<&StrategyNode> {
        match (self, answer) {
            (StrategyNode::Leaf(_), _) => None,
            (StrategyNode::Ask { absent, .. }, Answer::Absent) => Some(absent),
            (StrategyNode::Ask { present, .. }, Answer::Present) => Some(present),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyTree {
    pub n: usize,
    pub root: StrategyNode,
}

impl StrategyTree {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Number of root-to-leaf paths.
    pub fn path_count(&self) -> usize {
        self.root.leaf_count()
    }
}

pub fn extract_strategy(property: &Property, table: &PositionTable) -> Result<StrategyTree> {
    let report = solve(property, table)?;
    strategy_from_report(&report, table)
}

pub fn strategy_from_report(report: &SolveReport, table: &PositionTable) -> Result<StrategyTree> {
    fn grow(report: &SolveReport, table: &PositionTable, p: Position) -> Result<StrategyNode> {
        let verdict = report.verdict_at(table, &p);
        if verdict.is_decided() {
            return Ok(StrategyNode::Leaf(verdict));
        }
        let edge = report.best_move(table, &p)?;
        Ok(StrategyNode::Ask {
            edge,
            absent: Box::new(grow(report, table, p.child(edge, Answer::Absent)?)?),
            present: Box::new(grow(report, table, p.child(edge, Answer::Present)?)?),
        })
    }
    let root = grow(report, table, Position::initial(table.n())?)?;
    Ok(StrategyTree { n: table.n(), root })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayFailure {
    /// Questions and answers from the root to the failing node.
    pub path: Vec<(EdgeIndex, Answer)>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub passed: bool,
    pub paths: usize,
    pub max_questions: usize,
    pub bound: usize,
    pub failure: Option<ReplayFailure>,
}

/// Walks every path of `tree`, checking that each question is new, each leaf
/// verdict is forced at the reached position, and no path exceeds the solved
/// depth of `property`.
pub fn replay_verify(tree: &StrategyTree, property: &Property, table: &PositionTable) -> Result<ReplayReport> {
    let bound = solve(property, table)?.depth();
    replay_verify_within(tree, property, table, bound)
}

pub fn replay_verify_within(
    tree: &StrategyTree,
    property: &Property,
    table: &PositionTable,
    bound: usize,
) -> Result<ReplayReport> {
    if tree.n != table.n() || property.n() != table.n() {
        return Err(Error::VertexCountMismatch {
            expected: table.n(),
            found: tree.n,
        });
    }
    let mut report = ReplayReport {
        passed: true,
        paths: 0,
        max_questions: 0,
        bound,
        failure: None,
    };
    let mut path = Vec::new();
    walk(
        &tree.root,
        Position::initial(table.n())?,
        property,
        table,
        &mut path,
        &mut report,
    );
    Ok(report)
}

fn walk(
    node: &StrategyNode,
    p: Position,
    property: &Property,
    table: &PositionTable,
    path: &mut Vec<(EdgeIndex, Answer)>,
    report: &mut ReplayReport,
) {
    if report.failure.is_some() {
        return;
    }
    let mut fail = |path: &Vec<(EdgeIndex, Answer)>, reason: String| {
        report.passed = false;
        report.failure = Some(ReplayFailure {
            path: path.clone(),
            reason,
        });
    };
    match node {
        StrategyNode::Leaf(claimed) => {
            report.paths += 1;
            report.max_questions = report.max_questions.max(path.len());
            let actual = verdict_of(table.reachable(table.id_of(&p)), property.members());
            if *claimed != actual {
                fail(path, format!("leaf claims {claimed:?} but position is {actual:?}"));
            } else if path.len() > report.bound {
                fail(
                    path,
                    format!("path asks {} questions, bound is {}", path.len(), report.bound),
                );
            }
        }
        StrategyNode::Ask { edge, absent, present } => {
            if !p.is_unknown(*edge) {
                fail(path, format!("edge {edge} asked twice or out of range"));
                return;
            }
            for (answer, sub) in [(Answer::Absent, absent), (Answer::Present, present)] {
                path.push((*edge, answer));
                let next = p.child(*edge, answer).expect("edge checked unknown");
                walk(sub, next, property, table, path, report);
                path.pop();
            }
        }
    }
}
