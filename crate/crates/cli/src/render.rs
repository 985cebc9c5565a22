//! Output formats. Every renderer is a pure function of its input, so equal
//! inputs give byte-identical output.

use std::fmt::Write as _;

use ecst_core::callgraph::{CallGraph, EdgeDirection, GraphNode};
use ecst_core::ecfg::{cfg_to_dot, node_label, BasisPath, Cfg, EdgeLabel};
use ecst_core::persistence::{Snapshot, SnapshotDiff};
use ecst_core::{EcstNode, MetricsReport, ParsedFile, UniversalKind};
use serde_json::{json, Value};

use crate::{Failure, Format};

fn to_json(value: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(Failure::analysis)
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(Failure::analysis)?;
    for row in rows {
        w.write_record(row).map_err(Failure::analysis)?;
    }
    let bytes = w.into_inner().map_err(Failure::analysis)?;
    String::from_utf8(bytes).map_err(Failure::analysis)
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, cell) in cells.enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{cell:<width$}", width = widths[i]);
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

fn not_dot(format: Format) -> Result<(), Failure> {
    match format {
        Format::Dot => Err(Failure::Usage(
            "--format dot is only valid for callgraph and cfg".to_string(),
        )),
        _ => Ok(()),
    }
}

fn tree_json(node: &EcstNode) -> Value {
    let span = node.span();
    match node.universal_kind() {
        None => json!({ "token": node.text(), "line": span.line, "column": span.column }),
        Some(kind) => {
            let mut v = json!({
                "kind": kind.as_str(),
                "line": span.line,
                "column": span.column,
            });
            if let Some(p) = node.polarity() {
                v["polarity"] = json!(p.as_str());
            }
            v["children"] = node.children().iter().map(tree_json).collect();
            v
        }
    }
}

/// Universal nodes in pre-order with their depth.
fn universal_rows<'a>(node: &'a EcstNode, depth: usize, rows: &mut Vec<(usize, &'a EcstNode)>) {
    if node.universal_kind().is_some() {
        rows.push((depth, node));
        for child in node.children() {
            universal_rows(child, depth + 1, rows);
        }
    }
}

fn shows_text(kind: UniversalKind) -> bool {
    matches!(
        kind,
        UniversalKind::Name | UniversalKind::Expression | UniversalKind::Condition
    )
}

pub fn trees(files: &[ParsedFile], format: Format) -> Result<String, Failure> {
    not_dot(format)?;
    match format {
        Format::Json => {
            let docs: Vec<Value> = files
                .iter()
                .map(|f| json!({ "path": f.path, "lang": f.lang, "tree": tree_json(&f.tree) }))
                .collect();
            to_json(&docs)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for f in files {
                let mut nodes = Vec::new();
                universal_rows(&f.tree, 0, &mut nodes);
                for (depth, n) in nodes {
                    rows.push(vec![
                        f.path.clone(),
                        depth.to_string(),
                        n.universal_kind().unwrap().to_string(),
                        n.polarity().map(|p| p.to_string()).unwrap_or_default(),
                        n.span().line.to_string(),
                        n.span().column.to_string(),
                    ]);
                }
            }
            to_csv(
                &["path", "depth", "kind", "polarity", "line", "column"],
                &rows,
            )
        }
        _ => {
            let mut out = String::new();
            for f in files {
                let _ = writeln!(out, "{} ({})", f.path, f.lang);
                let mut nodes = Vec::new();
                universal_rows(&f.tree, 0, &mut nodes);
                for (depth, n) in nodes {
                    let kind = n.universal_kind().unwrap();
                    let _ = write!(
                        out,
                        "{:indent$}{kind} {}:{}",
                        "",
                        n.span().line,
                        n.span().column,
                        indent = 2 * depth + 2
                    );
                    if let Some(p) = n.polarity() {
                        let _ = write!(out, " [{p}]");
                    }
                    if shows_text(kind) {
                        let _ = write!(out, "  {}", n.source_text());
                    }
                    out.push('\n');
                }
            }
            Ok(out)
        }
    }
}

pub fn metrics(report: &MetricsReport, format: Format) -> Result<String, Failure> {
    not_dot(format)?;
    let function_rows: Vec<Vec<String>> = report
        .functions
        .iter()
        .map(|f| {
            vec![
                f.path.clone(),
                f.unit.clone(),
                f.function.clone(),
                f.cc.to_string(),
                f.statements.to_string(),
            ]
        })
        .collect();
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(
            &["path", "unit", "function", "cc", "statements"],
            &function_rows,
        ),
        _ => {
            let file_rows: Vec<Vec<String>> = report
                .files
                .iter()
                .map(|f| {
                    vec![
                        f.path.clone(),
                        f.lang.to_string(),
                        f.loc.total.to_string(),
                        f.loc.code.to_string(),
                        f.loc.comment.to_string(),
                        f.loc.blank.to_string(),
                    ]
                })
                .collect();
            let mut out = table(
                &["FILE", "LANG", "LINES", "CODE", "COMMENT", "BLANK"],
                &file_rows,
            );
            out.push('\n');
            out.push_str(&table(
                &["FILE", "UNIT", "FUNCTION", "CC", "STATEMENTS"],
                &function_rows,
            ));
            Ok(out)
        }
    }
}

pub fn callgraph(
    graph: &CallGraph<'_>,
    direction: EdgeDirection,
    format: Format,
) -> Result<String, Failure> {
    let ends = |from: usize, to: usize| match direction {
        EdgeDirection::CalleeToCaller => (from, to),
        EdgeDirection::Conventional => (to, from),
    };
    match format {
        Format::Dot => Ok(ecst_core::callgraph::callgraph_to_dot_directed(
            graph, direction,
        )),
        Format::Json => {
            let nodes: Vec<Value> = graph
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| match n {
                    GraphNode::Function(r) => json!({
                        "id": id,
                        "label": n.label(),
                        "unit": r.unit,
                        "name": r.name,
                        "external": false,
                    }),
                    GraphNode::External(name) => json!({
                        "id": id,
                        "label": n.label(),
                        "name": name,
                        "external": true,
                    }),
                })
                .collect();
            let edges: Vec<Value> = graph
                .edges
                .iter()
                .map(|e| {
                    let (from, to) = ends(e.from, e.to);
                    json!({
                        "from": from,
                        "to": to,
                        "file": &*e.call_site.file,
                        "line": e.call_site.line,
                        "column": e.call_site.column,
                    })
                })
                .collect();
            let dir = match direction {
                EdgeDirection::CalleeToCaller => "callee_to_caller",
                EdgeDirection::Conventional => "caller_to_callee",
            };
            to_json(&json!({ "direction": dir, "nodes": nodes, "edges": edges }))
        }
        Format::Csv | Format::Table => {
            let rows: Vec<Vec<String>> = graph
                .edges
                .iter()
                .map(|e| {
                    let (from, to) = ends(e.from, e.to);
                    vec![
                        graph.nodes[from].label(),
                        graph.nodes[to].label(),
                        e.call_site.to_string(),
                    ]
                })
                .collect();
            if format == Format::Csv {
                return to_csv(&["from", "to", "call_site"], &rows);
            }
            let mut out = table(&["FROM", "TO", "CALL SITE"], &rows);
            let _ = writeln!(
                out,
                "\n{} nodes, {} edges",
                graph.nodes.len(),
                graph.edges.len()
            );
            Ok(out)
        }
    }
}

fn label_str(label: EdgeLabel) -> &'static str {
    match label {
        EdgeLabel::Seq => "",
        EdgeLabel::True => "T",
        EdgeLabel::False => "F",
    }
}

pub fn cfg(cfg: &Cfg<'_>, paths: Option<&[BasisPath]>, format: Format) -> Result<String, Failure> {
    let summary = cfg.summary().map_err(Failure::analysis)?;
    match format {
        Format::Dot => {
            let dot = cfg_to_dot(cfg);
            let mut out = dot.strip_suffix("}\n").unwrap_or(&dot).to_string();
            for w in &cfg.warnings {
                let _ = writeln!(out, "  // warning: {w}");
            }
            for (i, p) in paths.unwrap_or_default().iter().enumerate() {
                let _ = writeln!(out, "  // basis path {}: {p}", i + 1);
            }
            out.push_str("}\n");
            Ok(out)
        }
        Format::Json => {
            let mut v = serde_json::to_value(&summary).map_err(Failure::analysis)?;
            if let Some(paths) = paths {
                v["basis_paths"] = serde_json::to_value(paths).map_err(Failure::analysis)?;
            }
            to_json(&v)
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = cfg
                .edges
                .iter()
                .map(|e| {
                    vec![
                        e.from.to_string(),
                        e.to.to_string(),
                        label_str(e.label).to_string(),
                    ]
                })
                .collect();
            to_csv(&["from", "to", "label"], &rows)
        }
        Format::Table => {
            let mut out = format!("{}  cc={}\n\n", summary.function, summary.cc);
            let node_rows: Vec<Vec<String>> = cfg
                .nodes
                .iter()
                .map(|n| {
                    vec![
                        format!("n{}", n.id),
                        format!("{:?}", n.role).to_uppercase(),
                        node_label(n),
                    ]
                })
                .collect();
            out.push_str(&table(&["NODE", "ROLE", "LABEL"], &node_rows));
            out.push('\n');
            let edge_rows: Vec<Vec<String>> = cfg
                .edges
                .iter()
                .map(|e| {
                    vec![
                        format!("n{}", e.from),
                        format!("n{}", e.to),
                        label_str(e.label).to_string(),
                    ]
                })
                .collect();
            out.push_str(&table(&["FROM", "TO", "LABEL"], &edge_rows));
            for w in &cfg.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
            if let Some(paths) = paths {
                out.push('\n');
                for (i, p) in paths.iter().enumerate() {
                    let _ = writeln!(out, "basis path {}: {p}", i + 1);
                }
            }
            Ok(out)
        }
    }
}

pub fn snapshot(snapshot: &Snapshot, format: Format) -> Result<String, Failure> {
    not_dot(format)?;
    let functions = snapshot.report.functions.len();
    let files = snapshot.tree_files.len();
    match format {
        Format::Json => to_json(&json!({
            "label": snapshot.label,
            "timestamp": snapshot.timestamp,
            "files": files,
            "functions": functions,
            "tree_files": snapshot.tree_files,
        })),
        Format::Csv => to_csv(
            &["label", "timestamp", "files", "functions"],
            &[vec![
                snapshot.label.clone(),
                snapshot.timestamp.to_string(),
                files.to_string(),
                functions.to_string(),
            ]],
        ),
        _ => Ok(format!(
            "saved snapshot `{}`: {files} files, {functions} functions\n",
            snapshot.label
        )),
    }
}

pub fn diff(diff: &SnapshotDiff, format: Format) -> Result<String, Failure> {
    not_dot(format)?;
    let mut rows = Vec::new();
    for k in &diff.added {
        rows.push(vec![
            "added".into(),
            k.unit.clone(),
            k.name.clone(),
            String::new(),
            String::new(),
        ]);
    }
    for k in &diff.removed {
        rows.push(vec![
            "removed".into(),
            k.unit.clone(),
            k.name.clone(),
            String::new(),
            String::new(),
        ]);
    }
    for c in &diff.changed {
        rows.push(vec![
            "changed".into(),
            c.key.unit.clone(),
            c.key.name.clone(),
            c.before.to_string(),
            c.after.to_string(),
        ]);
    }
    match format {
        Format::Json => to_json(diff),
        Format::Csv => to_csv(
            &["change", "unit", "function", "cc_before", "cc_after"],
            &rows,
        ),
        _ => {
            if diff.is_empty() {
                return Ok("no differences\n".to_string());
            }
            let mut out = String::new();
            for k in &diff.added {
                let _ = writeln!(out, "+ {k}");
            }
            for k in &diff.removed {
                let _ = writeln!(out, "- {k}");
            }
            for c in &diff.changed {
                let _ = writeln!(out, "~ {}  cc {} -> {}", c.key, c.before, c.after);
            }
            Ok(out)
        }
    }
}
