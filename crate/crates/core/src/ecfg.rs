//! eCST to enriched control flow graph, plus the cyclomatic number and a
//! basis path set on top of it.
//!
//! Nodes are statements, not basic blocks. Every predicate node comes from a
//! `CONDITION` universal node and has exactly one `TRUE` and one `FALSE`
//! successor; every other node except `EXIT` has exactly one `SEQ`
//! successor. Loop condition polarity is consumed here: it decides which of
//! the two predicate edges re-enters the loop.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::ecst::{ConditionPolarity, EcstNode, SourceSpan, UniversalKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CfgRole {
    Entry,
    Exit,
    Statement,
    Predicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeLabel {
    Seq,
    True,
    False,
}

impl EdgeLabel {
    fn flipped(self) -> EdgeLabel {
        match self {
            EdgeLabel::True => EdgeLabel::False,
            EdgeLabel::False => EdgeLabel::True,
            EdgeLabel::Seq => EdgeLabel::Seq,
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeLabel::Seq => "SEQ",
            EdgeLabel::True => "TRUE",
            EdgeLabel::False => "FALSE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgNode<'a> {
    pub id: usize,
    pub role: CfgRole,
    /// The statement or `CONDITION` node this came from; `None` for ENTRY/EXIT.
    pub origin: Option<&'a EcstNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CfgEdge {
    pub from: usize,
    pub to: usize,
    pub label: EdgeLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CfgWarning {
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for CfgWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.span, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg<'a> {
    pub unit: String,
    pub function: String,
    pub nodes: Vec<CfgNode<'a>>,
    pub edges: Vec<CfgEdge>,
    pub warnings: Vec<CfgWarning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfgError {
    #[error("{span}: expected a FUNCTION_DEF subtree, got {found}")]
    NotAFunction { span: SourceSpan, found: String },
    #[error("{span}: malformed {kind}: {detail}")]
    MalformedTree {
        span: SourceSpan,
        kind: UniversalKind,
        detail: String,
    },
    #[error("malformed control flow graph: {0}")]
    Malformed(String),
}

pub const ENTRY: usize = 0;
pub const EXIT: usize = 1;

type Exits = Vec<(usize, EdgeLabel)>;

struct Builder<'a> {
    nodes: Vec<CfgNode<'a>>,
    edges: Vec<CfgEdge>,
    warnings: Vec<CfgWarning>,
}

impl<'a> Builder<'a> {
    fn add(&mut self, role: CfgRole, origin: Option<&'a EcstNode>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(CfgNode { id, role, origin });
        id
    }

    fn connect(&mut self, exits: &[(usize, EdgeLabel)], to: usize) {
        for &(from, label) in exits {
            self.edges.push(CfgEdge { from, to, label });
        }
    }

    /// Statements of a `STATEMENT_BLOCK` or `BRANCH`, chained in order.
    fn block(&mut self, container: &'a EcstNode, mut exits: Exits) -> Result<Exits, CfgError> {
        let mut dead_reported = false;
        for child in container.children() {
            let Some(kind) = child.universal_kind() else {
                continue;
            };
            if !(kind.is_statement() || kind == UniversalKind::StatementBlock) {
                continue;
            }
            if exits.is_empty() {
                if !dead_reported {
                    self.warnings.push(CfgWarning {
                        span: child.span().clone(),
                        message: "unreachable statement".to_string(),
                    });
                    dead_reported = true;
                }
                continue;
            }
            exits = self.statement(child, kind, exits)?;
        }
        Ok(exits)
    }

    fn statement(
        &mut self,
        stmt: &'a EcstNode,
        kind: UniversalKind,
        preds: Exits,
    ) -> Result<Exits, CfgError> {
        match kind {
            UniversalKind::StatementBlock => self.block(stmt, preds),
            UniversalKind::BranchStatement => self.branch(stmt, preds),
            UniversalKind::LoopStatement => self.looping(stmt, preds),
            UniversalKind::ReturnStatement => {
                let s = self.add(CfgRole::Statement, Some(stmt));
                self.connect(&preds, s);
                self.connect(&[(s, EdgeLabel::Seq)], EXIT);
                Ok(Vec::new())
            }
            _ => {
                let s = self.add(CfgRole::Statement, Some(stmt));
                self.connect(&preds, s);
                Ok(vec![(s, EdgeLabel::Seq)])
            }
        }
    }

    fn branch(&mut self, stmt: &'a EcstNode, preds: Exits) -> Result<Exits, CfgError> {
        let cond = required(stmt, UniversalKind::Condition)?;
        let mut arms = stmt
            .children()
            .iter()
            .filter(|c| c.is(UniversalKind::Branch));
        let then_arm = arms
            .next()
            .ok_or_else(|| malformed(stmt, "no BRANCH arm"))?;
        let else_arm = arms.next();

        let p = self.add(CfgRole::Predicate, Some(cond));
        self.connect(&preds, p);
        let mut exits = self.block(then_arm, vec![(p, EdgeLabel::True)])?;
        match else_arm {
            Some(arm) => exits.extend(self.block(arm, vec![(p, EdgeLabel::False)])?),
            None => exits.push((p, EdgeLabel::False)),
        }
        Ok(exits)
    }

    fn looping(&mut self, stmt: &'a EcstNode, preds: Exits) -> Result<Exits, CfgError> {
        let kids = stmt.children();
        let cond_at = kids
            .iter()
            .position(|c| c.is(UniversalKind::Condition))
            .ok_or_else(|| malformed(stmt, "no CONDITION"))?;
        let body_at = kids
            .iter()
            .position(|c| c.is(UniversalKind::StatementBlock))
            .ok_or_else(|| malformed(stmt, "no STATEMENT_BLOCK"))?;
        let cond = &kids[cond_at];
        let body = &kids[body_at];
        let (stay, leave) = match cond.polarity() {
            Some(ConditionPolarity::ExitWhenTrue) => (EdgeLabel::False, EdgeLabel::True),
            _ => (EdgeLabel::True, EdgeLabel::False),
        };

        if cond_at < body_at {
            let p = self.add(CfgRole::Predicate, Some(cond));
            self.connect(&preds, p);
            let body_exits = self.block(body, vec![(p, stay)])?;
            self.connect(&body_exits, p);
            return Ok(vec![(p, leave)]);
        }

        let start = self.nodes.len();
        let body_exits = self.block(body, preds)?;
        if body_exits.is_empty() {
            self.warnings.push(CfgWarning {
                span: cond.span().clone(),
                message: "loop condition is unreachable".to_string(),
            });
            return Ok(Vec::new());
        }
        let p = self.add(CfgRole::Predicate, Some(cond));
        self.connect(&body_exits, p);
        let head = if start < p { start } else { p };
        self.connect(&[(p, stay)], head);
        Ok(vec![(p, leave)])
    }
}

fn malformed(node: &EcstNode, detail: &str) -> CfgError {
    CfgError::MalformedTree {
        span: node.span().clone(),
        kind: node
            .universal_kind()
            .unwrap_or(UniversalKind::StatementBlock),
        detail: detail.to_string(),
    }
}

fn required(node: &EcstNode, kind: UniversalKind) -> Result<&EcstNode, CfgError> {
    node.child(kind)
        .ok_or_else(|| malformed(node, &format!("no {kind}")))
}

/// Builds the eCFG of one `FUNCTION_DEF`. `unit` only labels the result.
pub fn build_ecfg<'a>(unit: &str, def: &'a EcstNode) -> Result<Cfg<'a>, CfgError> {
    if !def.is(UniversalKind::FunctionDef) {
        return Err(CfgError::NotAFunction {
            span: def.span().clone(),
            found: def
                .universal_kind()
                .map_or_else(|| format!("token `{}`", def.text()), |k| k.to_string()),
        });
    }
    let body = required(def, UniversalKind::StatementBlock)?;
    let mut b = Builder {
        nodes: Vec::new(),
        edges: Vec::new(),
        warnings: Vec::new(),
    };
    b.add(CfgRole::Entry, None);
    b.add(CfgRole::Exit, None);
    let exits = b.block(body, vec![(ENTRY, EdgeLabel::Seq)])?;
    b.connect(&exits, EXIT);
    Ok(Cfg {
        unit: unit.to_string(),
        function: def.name().unwrap_or_default().to_string(),
        nodes: b.nodes,
        edges: b.edges,
        warnings: b.warnings,
    })
}

impl Cfg<'_> {
    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.unit, self.function)
    }

    fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from].push(i);
        }
        out
    }

    /// Checks the structural contract: one ENTRY and EXIT, the out-degree
    /// and label rules, and full reachability in both directions.
    pub fn validate(&self) -> Result<(), CfgError> {
        let bad = |msg: String| Err(CfgError::Malformed(msg));
        let n = self.nodes.len();
        if self.edges.iter().any(|e| e.from >= n || e.to >= n) {
            return bad("edge endpoint out of range".into());
        }
        let count = |r: CfgRole| self.nodes.iter().filter(|x| x.role == r).count();
        if count(CfgRole::Entry) != 1 || count(CfgRole::Exit) != 1 {
            return bad("expected exactly one ENTRY and one EXIT".into());
        }
        let out = self.out_edges();
        for node in &self.nodes {
            let mut labels: Vec<EdgeLabel> =
                out[node.id].iter().map(|&e| self.edges[e].label).collect();
            labels.sort_by_key(|l| *l as u8);
            let ok = match node.role {
                CfgRole::Exit => labels.is_empty(),
                CfgRole::Predicate => labels == [EdgeLabel::True, EdgeLabel::False],
                CfgRole::Entry | CfgRole::Statement => labels == [EdgeLabel::Seq],
            };
            if !ok {
                return bad(format!(
                    "node {} ({:?}) has out-edges {:?}",
                    node.id, node.role, labels
                ));
            }
        }
        let entry = self
            .nodes
            .iter()
            .find(|x| x.role == CfgRole::Entry)
            .unwrap()
            .id;
        let exit = self
            .nodes
            .iter()
            .find(|x| x.role == CfgRole::Exit)
            .unwrap()
            .id;
        let forward = reach(n, entry, self.edges.iter().map(|e| (e.from, e.to)));
        if let Some(i) = forward.iter().position(|r| !r) {
            return bad(format!("node {i} is unreachable from ENTRY"));
        }
        let backward = reach(n, exit, self.edges.iter().map(|e| (e.to, e.from)));
        if let Some(i) = backward.iter().position(|r| !r) {
            return bad(format!("EXIT is unreachable from node {i}"));
        }
        Ok(())
    }
}

fn reach(n: usize, start: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for (a, b) in edges {
        adj[a].push(b);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Cyclomatic number `E - N + 2` of a single-component graph.
pub fn cc_from_cfg(cfg: &Cfg<'_>) -> Result<u32, CfgError> {
    cfg.validate()?;
    Ok((cfg.edges.len() + 2 - cfg.nodes.len()) as u32)
}

/// An ENTRY to EXIT walk. `edges[i]` indexes `Cfg::edges` and joins
/// `nodes[i]` to `nodes[i + 1]`, which disambiguates parallel edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BasisPath {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

impl fmt::Display for BasisPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            write!(f, "n{n}")?;
        }
        Ok(())
    }
}

struct Walker<'c, 'a> {
    cfg: &'c Cfg<'a>,
    out: Vec<Vec<usize>>,
    exit: usize,
    limit: usize,
}

impl Walker<'_, '_> {
    fn edge_with(&self, node: usize, label: EdgeLabel) -> usize {
        *self.out[node]
            .iter()
            .find(|&&e| self.cfg.edges[e].label == label)
            .expect("validated predicate has both labels")
    }

    /// Label that leaves the loop, if `node` is a loop predicate.
    fn loop_exit(&self, node: usize) -> Option<EdgeLabel> {
        match self.cfg.nodes[node].origin.and_then(EcstNode::polarity) {
            Some(ConditionPolarity::ContinueWhenTrue) => Some(EdgeLabel::False),
            Some(ConditionPolarity::ExitWhenTrue) => Some(EdgeLabel::True),
            None => None,
        }
    }

    /// Runs `path` on to EXIT: TRUE at a predicate, except that a loop
    /// predicate met a second time takes its exit edge.
    fn finish(&self, path: &mut BasisPath) -> Result<(), CfgError> {
        let mut visits: HashMap<usize, usize> = HashMap::new();
        for &n in &path.nodes {
            *visits.entry(n).or_default() += 1;
        }
        loop {
            let here = *path.nodes.last().expect("path starts at ENTRY");
            if here == self.exit {
                return Ok(());
            }
            if path.nodes.len() > self.limit {
                return Err(CfgError::Malformed(
                    "basis path does not reach EXIT".to_string(),
                ));
            }
            let edge = match self.cfg.nodes[here].role {
                CfgRole::Predicate => {
                    let label = match self.loop_exit(here) {
                        Some(exit) if visits[&here] > 1 => exit,
                        _ => EdgeLabel::True,
                    };
                    self.edge_with(here, label)
                }
                _ => self.out[here][0],
            };
            let next = self.cfg.edges[edge].to;
            path.edges.push(edge);
            path.nodes.push(next);
            *visits.entry(next).or_default() += 1;
        }
    }
}

/// A basis path set by the baseline method.
///
/// The baseline takes `TRUE` at every predicate, running each loop body at
/// most once. Each further path copies an earlier one up to the first
/// occurrence of a not-yet-flipped predicate, takes the opposite edge there,
/// and then continues by the baseline rule. Predicates are flipped in order
/// of discovery, left to right. Yields exactly `cc_from_cfg` paths on a
/// structured graph.
pub fn basis_paths(cfg: &Cfg<'_>) -> Result<Vec<BasisPath>, CfgError> {
    cfg.validate()?;
    let entry = cfg
        .nodes
        .iter()
        .find(|n| n.role == CfgRole::Entry)
        .unwrap()
        .id;
    let walker = Walker {
        cfg,
        out: cfg.out_edges(),
        exit: cfg
            .nodes
            .iter()
            .find(|n| n.role == CfgRole::Exit)
            .unwrap()
            .id,
        limit: 4 * (cfg.nodes.len() + cfg.edges.len()) + 4,
    };

    let mut baseline = BasisPath {
        nodes: vec![entry],
        edges: Vec::new(),
    };
    walker.finish(&mut baseline)?;
    let mut paths = vec![baseline];
    let mut flipped: HashSet<usize> = HashSet::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    enqueue(cfg, &paths[0], 0, &mut flipped, &mut queue);

    while let Some((parent, pos)) = queue.pop_front() {
        let src = &paths[parent];
        let pred = src.nodes[pos];
        let taken = cfg.edges[src.edges[pos]].label;
        let mut path = BasisPath {
            nodes: src.nodes[..=pos].to_vec(),
            edges: src.edges[..pos].to_vec(),
        };
        let edge = walker.edge_with(pred, taken.flipped());
        path.edges.push(edge);
        path.nodes.push(cfg.edges[edge].to);
        walker.finish(&mut path)?;
        let idx = paths.len();
        paths.push(path);
        enqueue(cfg, &paths[idx], idx, &mut flipped, &mut queue);
    }
    Ok(paths)
}

/// Queues the first occurrence of every predicate not yet scheduled.
fn enqueue(
    cfg: &Cfg<'_>,
    path: &BasisPath,
    idx: usize,
    scheduled: &mut HashSet<usize>,
    queue: &mut VecDeque<(usize, usize)>,
) {
    for (pos, &n) in path.nodes.iter().enumerate() {
        if cfg.nodes[n].role == CfgRole::Predicate && scheduled.insert(n) {
            queue.push_back((idx, pos));
        }
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Short human label: `line: source text` for statements and predicates.
pub fn node_label(node: &CfgNode<'_>) -> String {
    match (node.role, node.origin) {
        (CfgRole::Entry, _) => "ENTRY".to_string(),
        (CfgRole::Exit, _) => "EXIT".to_string(),
        (_, Some(origin)) => format!("{}: {}", origin.span().line, origin.source_text()),
        (_, None) => String::new(),
    }
}

pub fn cfg_to_dot(cfg: &Cfg<'_>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(&cfg.qualified_name()));
    out.push_str("  node [shape=box];\n");
    for node in &cfg.nodes {
        let shape = match node.role {
            CfgRole::Entry | CfgRole::Exit => ", shape=oval",
            CfgRole::Predicate => ", shape=diamond",
            CfgRole::Statement => "",
        };
        let _ = writeln!(
            out,
            "  n{} [label=\"{}\"{}];",
            node.id,
            dot_escape(&node_label(node)),
            shape
        );
    }
    for e in &cfg.edges {
        let label = match e.label {
            EdgeLabel::Seq => "",
            EdgeLabel::True => " [label=\"T\"]",
            EdgeLabel::False => " [label=\"F\"]",
        };
        let _ = writeln!(out, "  n{} -> n{}{};", e.from, e.to, label);
    }
    out.push_str("}\n");
    out
}

/// Serializable view of a [`Cfg`] with origins flattened to labels.
#[derive(Debug, Clone, Serialize)]
pub struct CfgSummary {
    pub function: String,
    pub nodes: Vec<CfgNodeSummary>,
    pub edges: Vec<CfgEdge>,
    pub cc: u32,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CfgNodeSummary {
    pub id: usize,
    pub role: CfgRole,
    pub kind: Option<UniversalKind>,
    pub line: Option<u32>,
    pub column: Option<u32>,
    pub label: String,
}

impl Cfg<'_> {
    pub fn summary(&self) -> Result<CfgSummary, CfgError> {
        Ok(CfgSummary {
            function: self.qualified_name(),
            nodes: self
                .nodes
                .iter()
                .map(|n| CfgNodeSummary {
                    id: n.id,
                    role: n.role,
                    kind: n.origin.and_then(EcstNode::universal_kind),
                    line: n.origin.map(|o| o.span().line),
                    column: n.origin.map(|o| o.span().column),
                    label: node_label(n),
                })
                .collect(),
            edges: self.edges.clone(),
            cc: cc_from_cfg(self)?,
            warnings: self.warnings.iter().map(ToString::to_string).collect(),
        })
    }
}
