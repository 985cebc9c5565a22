//! Links compilation units into a call graph.
//!
//! Edges run from callee to caller: when `A` contains a call of `B` the edge
//! is `B -> A`. Callees are resolved by name, preferring the caller's own
//! unit, then a unique definition elsewhere; anything unresolved becomes an
//! external node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::ecst::{find_all, EcstNode, SourceSpan, UniversalKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CallGraphError {
    #[error("{second}: duplicate function `{unit}.{name}` (first defined at {first})")]
    Duplicate {
        unit: String,
        name: String,
        first: SourceSpan,
        second: SourceSpan,
    },
    #[error("{call_site}: call of `{callee}` is ambiguous; candidates: {}", candidates.join(", "))]
    Ambiguous {
        callee: String,
        call_site: SourceSpan,
        candidates: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionRecord<'a> {
    pub unit: String,
    pub name: String,
    pub def: &'a EcstNode,
    pub span: SourceSpan,
}

impl FunctionRecord<'_> {
    pub fn qualified(&self) -> String {
        format!("{}.{}", self.unit, self.name)
    }
}

/// One definition per `FUNCTION_DEF`, in forest order.
pub fn collect_functions<'a>(
    forest: &[&'a EcstNode],
) -> Result<Vec<FunctionRecord<'a>>, CallGraphError> {
    let mut out: Vec<FunctionRecord<'a>> = Vec::new();
    let mut seen: BTreeMap<(String, String), SourceSpan> = BTreeMap::new();
    for tree in forest {
        let unit = tree
            .child(UniversalKind::UnitName)
            .and_then(EcstNode::name)
            .unwrap_or_default()
            .to_string();
        for def in find_all(tree, UniversalKind::FunctionDef) {
            let name = def.name().unwrap_or_default().to_string();
            let span = def
                .child(UniversalKind::FunctionDecl)
                .map_or(def.span(), EcstNode::span)
                .clone();
            if let Some(first) = seen.insert((unit.clone(), name.clone()), span.clone()) {
                return Err(CallGraphError::Duplicate {
                    unit,
                    name,
                    first,
                    second: span,
                });
            }
            out.push(FunctionRecord {
                unit: unit.clone(),
                name,
                def,
                span,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    /// Index into the registry.
    Defined(usize),
    External(String),
}

/// Resolves `callee` as seen from `caller`: same unit first, then a unique
/// match in another unit, otherwise external. Two or more foreign matches
/// are an error.
pub fn resolve_call(
    callee: &str,
    caller: &FunctionRecord<'_>,
    registry: &[FunctionRecord<'_>],
    call_site: &SourceSpan,
) -> Result<Resolution, CallGraphError> {
    if let Some(i) = registry
        .iter()
        .position(|r| r.unit == caller.unit && r.name == callee)
    {
        return Ok(Resolution::Defined(i));
    }
    let foreign: Vec<usize> = registry
        .iter()
        .enumerate()
        .filter(|(_, r)| r.name == callee)
        .map(|(i, _)| i)
        .collect();
    match foreign.as_slice() {
        [] => Ok(Resolution::External(callee.to_string())),
        [only] => Ok(Resolution::Defined(*only)),
        many => Err(CallGraphError::Ambiguous {
            callee: callee.to_string(),
            call_site: call_site.clone(),
            candidates: many.iter().map(|&i| registry[i].qualified()).collect(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphNode<'a> {
    Function(FunctionRecord<'a>),
    External(String),
}

impl GraphNode<'_> {
    /// `unit.name`, or `extern:name`.
    pub fn label(&self) -> String {
        match self {
            GraphNode::Function(r) => r.qualified(),
            GraphNode::External(name) => format!("extern:{name}"),
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, GraphNode::External(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CallEdge {
    pub from: usize,
    pub to: usize,
    pub call_site: SourceSpan,
}

/// Functions sorted by `unit.name`, then externals sorted by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph<'a> {
    pub nodes: Vec<GraphNode<'a>>,
    pub edges: BTreeSet<CallEdge>,
}

impl CallGraph<'_> {
    pub fn node_id(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label() == label)
    }

    /// Edges as `(from label, to label)` pairs, in edge order.
    pub fn labelled_edges(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|e| (self.nodes[e.from].label(), self.nodes[e.to].label()))
            .collect()
    }
}

/// Builds the callee-to-caller graph for a forest. The result does not
/// depend on the order of the forest.
pub fn build_call_graph<'a>(forest: &[&'a EcstNode]) -> Result<CallGraph<'a>, CallGraphError> {
    let mut registry = collect_functions(forest)?;
    registry.sort_by(|a, b| (&a.unit, &a.name).cmp(&(&b.unit, &b.name)));

    let mut calls: Vec<(Resolution, usize, SourceSpan)> = Vec::new();
    for (caller_idx, caller) in registry.iter().enumerate() {
        for call in find_all(caller.def, UniversalKind::FunctionCall) {
            let callee = call.name().unwrap_or_default();
            let site = call.span().clone();
            let res = resolve_call(callee, caller, &registry, &site)?;
            calls.push((res, caller_idx, site));
        }
    }

    let externals: BTreeSet<String> = calls
        .iter()
        .filter_map(|(r, _, _)| match r {
            Resolution::External(name) => Some(name.clone()),
            Resolution::Defined(_) => None,
        })
        .collect();
    let defined = registry.len();
    let external_ids: BTreeMap<&str, usize> = externals
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), defined + i))
        .collect();

    let edges = calls
        .iter()
        .map(|(res, caller, site)| CallEdge {
            from: match res {
                Resolution::Defined(i) => *i,
                Resolution::External(name) => external_ids[name.as_str()],
            },
            to: *caller,
            call_site: site.clone(),
        })
        .collect();

    let mut nodes: Vec<GraphNode<'a>> = registry.into_iter().map(GraphNode::Function).collect();
    nodes.extend(externals.into_iter().map(GraphNode::External));
    Ok(CallGraph { nodes, edges })
}

/// Which way edges point when emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeDirection {
    /// Callee to caller, as stored.
    #[default]
    CalleeToCaller,
    /// Caller to callee.
    Conventional,
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn callgraph_to_dot(graph: &CallGraph<'_>) -> String {
    callgraph_to_dot_directed(graph, EdgeDirection::CalleeToCaller)
}

pub fn callgraph_to_dot_directed(graph: &CallGraph<'_>, direction: EdgeDirection) -> String {
    let mut out = String::from("digraph callgraph {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=box];\n");
    for node in &graph.nodes {
        let style = if node.is_external() {
            " [style=dashed]"
        } else {
            ""
        };
        let _ = writeln!(out, "  {}{};", dot_quote(&node.label()), style);
    }
    for e in &graph.edges {
        let (a, b) = match direction {
            EdgeDirection::CalleeToCaller => (e.from, e.to),
            EdgeDirection::Conventional => (e.to, e.from),
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}:{}\"];",
            dot_quote(&graph.nodes[a].label()),
            dot_quote(&graph.nodes[b].label()),
            e.call_site.line,
            e.call_site.column
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontends::{parse, LanguageId};

    fn k(src: &str, file: &str) -> EcstNode {
        parse(src, LanguageId::LangK, file).unwrap()
    }

    #[test]
    fn empty_forest() {
        assert!(collect_functions(&[]).unwrap().is_empty());
        let g = build_call_graph(&[]).unwrap();
        assert!(g.nodes.is_empty() && g.edges.is_empty());
        let dot = callgraph_to_dot(&g);
        assert!(dot.starts_with("digraph callgraph {"));
        assert!(dot.trim_end().ends_with('}'));
        assert!(!dot.contains("->"));
    }

    #[test]
    fn records_carry_unit() {
        let t = k(
            "MODULE M; PROCEDURE f(); END f; PROCEDURE g(); END g; END M.",
            "m.mod",
        );
        let recs = collect_functions(&[&t]).unwrap();
        let names: Vec<String> = recs.iter().map(FunctionRecord::qualified).collect();
        assert_eq!(names, ["M.f", "M.g"]);
    }

    #[test]
    fn same_name_in_two_units_is_fine() {
        let m = k("MODULE M; PROCEDURE init(); END init; END M.", "m.mod");
        let n = k("MODULE N; PROCEDURE init(); END init; END N.", "n.mod");
        let recs = collect_functions(&[&m, &n]).unwrap();
        assert_eq!(recs.len(), 2);
        assert_ne!(recs[0].qualified(), recs[1].qualified());
    }

    #[test]
    fn duplicate_unit_and_name_is_rejected() {
        let a = k("MODULE M; PROCEDURE f(); END f; END M.", "a.mod");
        let b = k("MODULE M; PROCEDURE f(); END f; END M.", "b.mod");
        let err = collect_functions(&[&a, &b]).unwrap_err();
        assert!(matches!(err, CallGraphError::Duplicate { .. }));
        assert!(err.to_string().contains("a.mod") && err.to_string().contains("b.mod"));
    }

    #[test]
    fn resolution_order() {
        let m = k(
            "MODULE M; PROCEDURE f(); END f; PROCEDURE g(); END g; END M.",
            "m.mod",
        );
        let n = k(
            "MODULE N; PROCEDURE g(); END g; PROCEDURE h(); END h; END N.",
            "n.mod",
        );
        let o = k("MODULE O; PROCEDURE h(); END h; END O.", "o.mod");
        let reg = collect_functions(&[&m, &n, &o]).unwrap();
        let f = &reg[0];
        let site = f.span.clone();
        // same unit wins over N.g
        assert_eq!(
            resolve_call("g", f, &reg, &site).unwrap(),
            Resolution::Defined(1)
        );
        assert_eq!(
            resolve_call("print", f, &reg, &site).unwrap(),
            Resolution::External("print".into())
        );
        let err = resolve_call("h", f, &reg, &site).unwrap_err();
        match err {
            CallGraphError::Ambiguous { candidates, .. } => {
                assert_eq!(candidates, ["N.h", "O.h"]);
            }
            other => panic!("unexpected {other:?}"),
        }
        // unique foreign match
        let reg2 = collect_functions(&[&m, &n]).unwrap();
        assert_eq!(
            resolve_call("h", &reg2[0], &reg2, &site).unwrap(),
            Resolution::Defined(3)
        );
    }

    #[test]
    fn a_calls_b_gives_b_to_a() {
        let t = k(
            "MODULE M; PROCEDURE A(); B(); END A; PROCEDURE B(); END B; END M.",
            "m.mod",
        );
        let g = build_call_graph(&[&t]).unwrap();
        assert_eq!(g.labelled_edges(), [("M.B".to_string(), "M.A".to_string())]);
        let dot = callgraph_to_dot(&g);
        assert!(dot.contains("\"M.B\" -> \"M.A\""));
        let conv = callgraph_to_dot_directed(&g, EdgeDirection::Conventional);
        assert!(conv.contains("\"M.A\" -> \"M.B\""));
    }

    #[test]
    fn recursion_is_a_self_loop() {
        let t = k("MODULE M; PROCEDURE f(); f(); END f; END M.", "m.mod");
        let g = build_call_graph(&[&t]).unwrap();
        assert_eq!(g.labelled_edges(), [("M.f".to_string(), "M.f".to_string())]);
    }

    #[test]
    fn two_call_sites_two_edges() {
        let t = k(
            "MODULE M;\nPROCEDURE f();\n g();\n g();\nEND f;\nPROCEDURE g(); END g;\nEND M.",
            "m.mod",
        );
        let g = build_call_graph(&[&t]).unwrap();
        assert_eq!(g.edges.len(), 2);
        let lines: Vec<u32> = g.edges.iter().map(|e| e.call_site.line).collect();
        assert_eq!(lines, [3, 4]);
    }

    #[test]
    fn forest_order_does_not_matter() {
        let m = k("MODULE M; PROCEDURE f(); h(); x(); END f; END M.", "m.mod");
        let n = k("MODULE N; PROCEDURE h(); f(); END h; END N.", "n.mod");
        let g1 = build_call_graph(&[&m, &n]).unwrap();
        let g2 = build_call_graph(&[&n, &m]).unwrap();
        assert_eq!(callgraph_to_dot(&g1), callgraph_to_dot(&g2));
        assert_eq!(g1.nodes.len(), 3);
    }
}
