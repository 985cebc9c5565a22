//! Cyclomatic complexity by predicate counting, and line counts.
//!
//! Complexity is `1 + #CONDITION` over a `FUNCTION_DEF` subtree. Since every
//! branch and loop predicate of every frontend sits under a `CONDITION`
//! node, there is no per-language logic here at all. Boolean operators
//! inside a predicate do not add to the count.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ecst::{count_kind, find_all, EcstNode, SourceSpan, UniversalKind};
use crate::frontends::{LanguageId, ParsedFile};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionMetrics {
    pub path: String,
    pub unit: String,
    pub function: String,
    pub cc: u32,
    pub statements: u32,
}

impl FunctionMetrics {
    /// `unit.function`
    pub fn key(&self) -> String {
        format!("{}.{}", self.unit, self.function)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocCounts {
    pub total: u32,
    pub blank: u32,
    pub comment: u32,
    pub code: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileMetrics {
    pub path: String,
    pub lang: LanguageId,
    pub loc: LocCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub files: Vec<FileMetrics>,
    pub functions: Vec<FunctionMetrics>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{span}: expected a FUNCTION_DEF subtree, got {found}")]
    NotAFunction { span: SourceSpan, found: String },
    #[error("{second}: duplicate function `{unit}.{name}` (first defined at {first})")]
    DuplicateFunction {
        unit: String,
        name: String,
        first: SourceSpan,
        second: SourceSpan,
    },
}

fn require_function(f: &EcstNode) -> Result<(), MetricsError> {
    if f.is(UniversalKind::FunctionDef) {
        Ok(())
    } else {
        Err(MetricsError::NotAFunction {
            span: f.span().clone(),
            found: f
                .universal_kind()
                .map_or_else(|| format!("token `{}`", f.text()), |k| k.to_string()),
        })
    }
}

pub fn cyclomatic_complexity(f: &EcstNode) -> Result<u32, MetricsError> {
    require_function(f)?;
    Ok(1 + count_kind(f, UniversalKind::Condition) as u32)
}

/// Executable statements: assignments, calls, returns, branches and loops.
pub fn statement_count(f: &EcstNode) -> Result<u32, MetricsError> {
    require_function(f)?;
    Ok(f.descendants()
        .filter(|n| n.universal_kind().is_some_and(|k| k.is_statement()))
        .count() as u32)
}

#[derive(Clone, Copy)]
enum CommentState {
    None,
    /// Nesting depth of `(* *)`.
    Nested(u32),
    Block,
}

/// Physical line classification. A line with any code outside comments is a
/// code line; a whitespace-only line is blank even inside a block comment.
pub fn loc(source: &str, lang: LanguageId) -> LocCounts {
    let mut counts = LocCounts::default();
    let mut state = CommentState::None;
    for line in source.lines() {
        counts.total += 1;
        let chars: Vec<char> = line.chars().collect();
        let (mut code, mut comment) = (false, false);
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let next = chars.get(i + 1).copied();
            match state {
                CommentState::Nested(depth) => {
                    if !c.is_whitespace() {
                        comment = true;
                    }
                    if c == '(' && next == Some('*') {
                        state = CommentState::Nested(depth + 1);
                        i += 1;
                    } else if c == '*' && next == Some(')') {
                        state = if depth == 1 {
                            CommentState::None
                        } else {
                            CommentState::Nested(depth - 1)
                        };
                        i += 1;
                    }
                }
                CommentState::Block => {
                    if !c.is_whitespace() {
                        comment = true;
                    }
                    if c == '*' && next == Some('/') {
                        state = CommentState::None;
                        i += 1;
                    }
                }
                CommentState::None => match (lang, c, next) {
                    (LanguageId::LangK, '(', Some('*')) => {
                        comment = true;
                        state = CommentState::Nested(1);
                        i += 1;
                    }
                    (LanguageId::LangC, '/', Some('*')) => {
                        comment = true;
                        state = CommentState::Block;
                        i += 1;
                    }
                    (LanguageId::LangC, '/', Some('/')) => {
                        comment = true;
                        break;
                    }
                    _ if c.is_whitespace() => {}
                    _ => code = true,
                },
            }
            i += 1;
        }
        if code {
            counts.code += 1;
        } else if comment {
            counts.comment += 1;
        } else {
            counts.blank += 1;
        }
    }
    counts
}

fn unit_name(tree: &EcstNode) -> String {
    tree.child(UniversalKind::UnitName)
        .and_then(EcstNode::name)
        .unwrap_or_default()
        .to_string()
}

/// Metrics for a set of parsed files. Files are reported in path order and
/// functions in (file, source position) order.
pub fn unit_report(files: &[ParsedFile]) -> Result<MetricsReport, MetricsError> {
    let mut ordered: Vec<&ParsedFile> = files.iter().collect();
    ordered.sort_by(|a, b| a.path.cmp(&b.path));

    let mut report = MetricsReport::default();
    for file in ordered {
        report.files.push(FileMetrics {
            path: file.path.clone(),
            lang: file.lang,
            loc: loc(&file.source, file.lang),
        });
        let unit = unit_name(&file.tree);
        let mut seen: HashMap<&str, &SourceSpan> = HashMap::new();
        for def in find_all(&file.tree, UniversalKind::FunctionDef) {
            let name = def.name().unwrap_or_default();
            let span = def
                .child(UniversalKind::FunctionDecl)
                .map_or(def.span(), EcstNode::span);
            if let Some(first) = seen.insert(name, span) {
                return Err(MetricsError::DuplicateFunction {
                    unit,
                    name: name.to_string(),
                    first: first.clone(),
                    second: span.clone(),
                });
            }
            report.functions.push(FunctionMetrics {
                path: file.path.clone(),
                unit: unit.clone(),
                function: name.to_string(),
                cc: cyclomatic_complexity(def)?,
                statements: statement_count(def)?,
            });
        }
    }
    Ok(report)
}
