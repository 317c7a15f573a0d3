//! Text formats: property specs, strategy JSON and DOT, wire edges.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_vertex_count, edge_endpoints, edge_index, EdgeIndex};
use crate::position::Verdict;
use crate::property::{builtin, parse_property, Property};
use crate::solver::{StrategyNode, StrategyTree};

/// Where a property comes from on the command line: `builtin:NAME` or a
/// path to a property document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertySpec {
    Builtin(String),
    File(String),
}

impl PropertySpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Err(Error::Parse("empty property spec".into()));
        }
        Ok(match spec.strip_prefix("builtin:") {
            Some(name) => PropertySpec::Builtin(name.to_string()),
            None => PropertySpec::File(spec.to_string()),
        })
    }

    /// Resolves the spec for `n`; a file must declare the same `n`.
    pub fn load(&self, n: usize) -> Result<Property> {
        match self {
            PropertySpec::Builtin(name) => builtin(name, n),
            PropertySpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(Path::new(path), e))?;
                let p = parse_property(&text)?;
                if p.n() != n {
                    return Err(Error::VertexCountMismatch {
                        expected: n,
                        found: p.n(),
                    });
                }
                Ok(p)
            }
        }
    }
}

/// A 1-based `[u,v]` pair with `u < v`, as used on the wire.
pub fn parse_wire_edge(pair: [usize; 2], n: usize) -> Result<EdgeIndex> {
    check_vertex_count(n)?;
    edge_index(pair[0], pair[1], n)
}

pub fn wire_edge(e: EdgeIndex, n: usize) -> [usize; 2] {
    let (u, v) = edge_endpoints(e, n).expect("edge index in range");
    [u, v]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LeafVerdict {
    In,
    Out,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NodeDoc {
    Ask(AskDoc),
    Leaf(LeafDoc),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AskDoc {
    question: [usize; 2],
    absent: Box<NodeDoc>,
    present: Box<NodeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeafDoc {
    verdict: LeafVerdict,
}

fn to_doc(node: &StrategyNode, n: usize) -> NodeDoc {
    match node {
        StrategyNode::Leaf(v) => NodeDoc::Leaf(LeafDoc {
            verdict: if *v == Verdict::In {
                LeafVerdict::In
            } else {
                LeafVerdict::Out
            },
        }),
        StrategyNode::Ask { edge, absent, present } => NodeDoc::Ask(AskDoc {
            question: wire_edge(*edge, n),
            absent: Box::new(to_doc(absent, n)),
            present: Box::new(to_doc(present, n)),
        }),
    }
}

fn from_doc(doc: NodeDoc, n: usize) -> Result<StrategyNode> {
    Ok(match doc {
        NodeDoc::Leaf(leaf) => StrategyNode::Leaf(match leaf.verdict {
            LeafVerdict::In => Verdict::In,
            LeafVerdict::Out => Verdict::Out,
        }),
        NodeDoc::Ask(ask) => StrategyNode::Ask {
            edge: parse_wire_edge(ask.question, n)?,
            absent: Box::new(from_doc(*ask.absent, n)?),
            present: Box::new(from_doc(*ask.present, n)?),
        },
    })
}

/// Strategy tree as nested `{"question":[u,v],"absent":..,"present":..}` /
/// `{"verdict":"in"|"out"}` objects.
pub fn strategy_to_json(tree: &StrategyTree) -> String {
    serde_json::to_string(&to_doc(&tree.root, tree.n)).expect("strategy serializes")
}

pub fn strategy_to_json_pretty(tree: &StrategyTree) -> String {
    serde_json::to_string_pretty(&to_doc(&tree.root, tree.n)).expect("strategy serializes")
}

pub fn parse_strategy(text: &str, n: usize) -> Result<StrategyTree> {
    check_vertex_count(n)?;
    let doc: NodeDoc = serde_json::from_str(text)?;
    Ok(StrategyTree {
        n,
        root: from_doc(doc, n)?,
    })
}

/// Graphviz rendering: question nodes are boxes, verdicts ellipses; the
/// absent branch is dashed and the present branch solid.
pub fn strategy_to_dot(tree: &StrategyTree) -> String {
    fn emit(node: &StrategyNode, n: usize, next: &mut usize, out: &mut String) -> usize {
        let id = *next;
        *next += 1;
        match node {
            StrategyNode::Leaf(v) => {
                let label = if *v == Verdict::In { "in" } else { "out" };
                let _ = writeln!(out, "  n{id} [label=\"{label}\", shape=ellipse];");
            }
            StrategyNode::Ask { edge, absent, present } => {
                let [u, v] = wire_edge(*edge, n);
                let _ = writeln!(out, "  n{id} [label=\"{u}{v}?\", shape=box];");
                let a = emit(absent, n, next, out);
                let _ = writeln!(out, "  n{id} -> n{a} [label=\"absent\", style=dashed];");
                let p = emit(present, n, next, out);
                let _ = writeln!(out, "  n{id} -> n{p} [label=\"present\", style=solid];");
            }
        }
        id
    }
    let mut out = String::from("digraph strategy {\n");
    let mut next = 0;
    emit(&tree.root, tree.n, &mut next, &mut out);
    out.push_str("}\n");
    out
}
