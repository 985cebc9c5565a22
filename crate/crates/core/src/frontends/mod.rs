//! Language frontends: lexing and recursive-descent parsing of the two
//! supported input languages straight into eCSTs.
//!
//! `LANG_K` is a keyword-structured, Modula-2 flavoured language (`.mod`);
//! `LANG_C` is a curly-brace, Java flavoured one (`.cls`). Both parsers
//! insert the same universal nodes, so everything downstream is shared.

mod cursor;
mod lang_c;
mod lang_k;
mod lexer;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ecst::{EcstNode, SourceSpan};

pub use lexer::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LanguageId {
    #[serde(rename = "LANG_K")]
    LangK,
    #[serde(rename = "LANG_C")]
    LangC,
}

impl LanguageId {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguageId::LangK => "LANG_K",
            LanguageId::LangC => "LANG_C",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            LanguageId::LangK => "mod",
            LanguageId::LangC => "cls",
        }
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageId {
    type Err = String;

    /// Accepts the canonical ids as well as the short forms `k`/`c` and the
    /// file extensions.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lang_k" | "k" | "mod" => Ok(LanguageId::LangK),
            "lang_c" | "c" | "cls" => Ok(LanguageId::LangC),
            _ => Err(format!(
                "unknown language `{s}` (expected LANG_K or LANG_C)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error(
        "{0}: cannot infer language from extension `.{1}`; pass --lang LANG_K or --lang LANG_C"
    )]
    UnknownExtension(String, String),
    #[error("{0}: file has no extension; pass --lang LANG_K or --lang LANG_C")]
    NoExtension(String),
}

/// Maps `.mod` to `LANG_K` and `.cls` to `LANG_C`.
pub fn detect_language(path: &Path) -> Result<LanguageId, DetectError> {
    let shown = path.display().to_string();
    match path.extension().and_then(|e| e.to_str()) {
        Some("mod") => Ok(LanguageId::LangK),
        Some("cls") => Ok(LanguageId::LangC),
        Some(other) => Err(DetectError::UnknownExtension(shown, other.to_string())),
        None => Err(DetectError::NoExtension(shown)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenCategory {
    Keyword,
    Ident,
    IntLiteral,
    Operator,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub category: TokenCategory,
    pub span: SourceSpan,
}

/// A lexical or syntax error. The first one aborts the file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {expected}, found {found}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

pub(crate) const END_OF_INPUT: &str = "end of input";

/// Parses one compilation unit. `file` only labels spans.
pub fn parse(source: &str, lang: LanguageId, file: &str) -> Result<EcstNode, ParseError> {
    let tokens = tokenize(source, lang, file)?;
    match lang {
        LanguageId::LangK => lang_k::parse_tokens(tokens, file),
        LanguageId::LangC => lang_c::parse_tokens(tokens, file),
    }
}

/// A source file together with its parsed tree.
#[derive(Debug, Clone)]
pub struct ParsedFile {
    pub path: String,
    pub lang: LanguageId,
    pub source: String,
    pub tree: EcstNode,
}

impl ParsedFile {
    pub fn parse(
        path: impl Into<String>,
        source: impl Into<String>,
        lang: LanguageId,
    ) -> Result<Self, ParseError> {
        let path = path.into();
        let source = source.into();
        let tree = parse(&source, lang, &path)?;
        Ok(ParsedFile {
            path,
            lang,
            source,
            tree,
        })
    }
}
