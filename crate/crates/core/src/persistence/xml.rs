//! Element-per-node XML form of an eCST.
//!
//! ```text
//! <?xml version="1.0" encoding="UTF-8"?>
//! <ecst version="1" lang="LANG_K" file="Stack.mod">
//!   <node kind="COMPILATION_UNIT">
//!     <token text="MODULE" line="1" col="1"/>
//!     ...
//!   </node>
//! </ecst>
//! ```
//!
//! Universal node spans are not written: they are recomputed on load from
//! the first token below the node, or for a token-less node from the next
//! token in document order, which is where the parser stood when it built it.

use std::fmt::Write as _;
use std::sync::Arc;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use crate::ecst::{
    make_universal, ConditionPolarity, EcstError, EcstNode, SourceSpan, UniversalKind,
};
use crate::frontends::LanguageId;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XmlError {
    #[error("document is not valid UTF-8")]
    Utf8,
    #[error("line {line}: malformed XML: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unsupported ecst version `{found}` (expected {FORMAT_VERSION})")]
    Version { line: usize, found: String },
    #[error("line {line}: unknown universal kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: {message}")]
    Structure { line: usize, message: String },
    #[error("invalid tree: {0}")]
    Invalid(#[from] EcstError),
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Serializes a tree. Output is byte-for-byte deterministic.
pub fn ecst_to_xml(tree: &EcstNode, lang: LanguageId) -> Vec<u8> {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<ecst version=\"{FORMAT_VERSION}\" lang=\"{}\" file=\"{}\">",
        lang.as_str(),
        escape(&tree.span().file)
    );
    write_node(&mut out, tree, 1);
    out.push_str("</ecst>\n");
    out.into_bytes()
}

fn write_node(out: &mut String, node: &EcstNode, depth: usize) {
    let indent = "  ".repeat(depth);
    match node.universal_kind() {
        None => {
            let _ = writeln!(
                out,
                "{indent}<token text=\"{}\" line=\"{}\" col=\"{}\"/>",
                escape(node.text()),
                node.span().line,
                node.span().column
            );
        }
        Some(kind) => {
            let _ = write!(out, "{indent}<node kind=\"{kind}\"");
            if let Some(p) = node.polarity() {
                let _ = write!(out, " polarity=\"{p}\"");
            }
            if node.children().is_empty() {
                out.push_str("/>\n");
                return;
            }
            out.push_str(">\n");
            for child in node.children() {
                write_node(out, child, depth + 1);
            }
            let _ = writeln!(out, "{indent}</node>");
        }
    }
}

/// A tree read back from XML, with the language recorded in the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedTree {
    pub lang: LanguageId,
    pub tree: EcstNode,
}

enum RawChild {
    Token(EcstNode),
    Node(RawNode),
}

struct RawNode {
    kind: UniversalKind,
    polarity: Option<ConditionPolarity>,
    children: Vec<RawChild>,
}

struct Loader<'d> {
    doc: &'d str,
    reader: Reader<&'d [u8]>,
    file: Arc<str>,
}

impl Loader<'_> {
    fn line(&self) -> usize {
        let pos = (self.reader.buffer_position() as usize).min(self.doc.len());
        self.doc[..pos].matches('\n').count() + 1
    }

    fn structure(&self, message: impl Into<String>) -> XmlError {
        XmlError::Structure {
            line: self.line(),
            message: message.into(),
        }
    }

    fn attrs(&self, e: &BytesStart<'_>) -> Result<Vec<(String, String)>, XmlError> {
        let mut out = Vec::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| XmlError::Syntax {
                line: self.line(),
                message: err.to_string(),
            })?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|err| XmlError::Syntax {
                    line: self.line(),
                    message: err.to_string(),
                })?
                .into_owned();
            out.push((key, value));
        }
        Ok(out)
    }

    fn next(&mut self) -> Result<Event<'static>, XmlError> {
        loop {
            let ev = self.reader.read_event().map_err(|err| XmlError::Syntax {
                line: self.line(),
                message: err.to_string(),
            })?;
            match ev {
                Event::Text(t) if t.iter().all(u8::is_ascii_whitespace) => continue,
                Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => continue,
                other => return Ok(other.into_owned()),
            }
        }
    }

    fn token(&self, e: &BytesStart<'_>) -> Result<EcstNode, XmlError> {
        let (mut text, mut line, mut col) = (None, None, None);
        for (k, v) in self.attrs(e)? {
            match k.as_str() {
                "text" => text = Some(v),
                "line" => line = v.parse::<u32>().ok(),
                "col" => col = v.parse::<u32>().ok(),
                other => {
                    return Err(self.structure(format!("unexpected token attribute `{other}`")))
                }
            }
        }
        let text = text
            .filter(|t| !t.is_empty())
            .ok_or_else(|| self.structure("token needs non-empty `text`"))?;
        match (line, col) {
            (Some(l), Some(c)) if l >= 1 && c >= 1 => Ok(EcstNode::token(
                text,
                SourceSpan::new(self.file.clone(), l, c),
            )),
            _ => Err(self.structure("token needs 1-based `line` and `col`")),
        }
    }

    fn node_header(
        &self,
        e: &BytesStart<'_>,
    ) -> Result<(UniversalKind, Option<ConditionPolarity>), XmlError> {
        let (mut kind, mut polarity) = (None, None);
        for (k, v) in self.attrs(e)? {
            match k.as_str() {
                "kind" => {
                    kind = Some(
                        v.parse::<UniversalKind>()
                            .map_err(|_| XmlError::UnknownKind {
                                line: self.line(),
                                kind: v.clone(),
                            })?,
                    )
                }
                "polarity" => {
                    polarity = Some(
                        v.parse::<ConditionPolarity>()
                            .map_err(|m| self.structure(m))?,
                    )
                }
                other => return Err(self.structure(format!("unexpected node attribute `{other}`"))),
            }
        }
        let kind = kind.ok_or_else(|| self.structure("node needs `kind`"))?;
        if polarity.is_some() && kind != UniversalKind::Condition {
            return Err(EcstError::PolarityOnNonCondition(kind).into());
        }
        Ok((kind, polarity))
    }

    /// Children of an open `<node>` up to its end tag.
    fn children(&mut self) -> Result<Vec<RawChild>, XmlError> {
        let mut out = Vec::new();
        loop {
            match self.next()? {
                Event::End(e) if e.name().as_ref() == b"node" => return Ok(out),
                Event::Empty(e) if e.name().as_ref() == b"token" => {
                    out.push(RawChild::Token(self.token(&e)?))
                }
                Event::Empty(e) if e.name().as_ref() == b"node" => {
                    let (kind, polarity) = self.node_header(&e)?;
                    out.push(RawChild::Node(RawNode {
                        kind,
                        polarity,
                        children: Vec::new(),
                    }));
                }
                Event::Start(e) if e.name().as_ref() == b"node" => {
                    let (kind, polarity) = self.node_header(&e)?;
                    let children = self.children()?;
                    out.push(RawChild::Node(RawNode {
                        kind,
                        polarity,
                        children,
                    }));
                }
                Event::Eof => return Err(self.structure("unexpected end of document")),
                other => return Err(self.structure(format!("unexpected {other:?}"))),
            }
        }
    }
}

fn collect_spans(raw: &RawNode, out: &mut Vec<SourceSpan>) {
    for c in &raw.children {
        match c {
            RawChild::Token(t) => out.push(t.span().clone()),
            RawChild::Node(n) => collect_spans(n, out),
        }
    }
}

fn finish(raw: RawNode, spans: &[SourceSpan], seen: &mut usize, fallback: &SourceSpan) -> EcstNode {
    let children = raw
        .children
        .into_iter()
        .map(|c| match c {
            RawChild::Token(t) => {
                *seen += 1;
                t
            }
            RawChild::Node(n) => finish(n, spans, seen, fallback),
        })
        .collect();
    let at = spans
        .get(*seen)
        .or_else(|| spans.last())
        .unwrap_or(fallback)
        .clone();
    make_universal(raw.kind, children, raw.polarity, at).expect("polarity checked while reading")
}

/// Reads a document written by [`ecst_to_xml`].
pub fn xml_to_ecst(doc: &[u8]) -> Result<LoadedTree, XmlError> {
    let text = std::str::from_utf8(doc).map_err(|_| XmlError::Utf8)?;
    let mut reader = Reader::from_reader(text.as_bytes());
    reader.config_mut().trim_text(false);
    let mut ld = Loader {
        doc: text,
        reader,
        file: Arc::from(""),
    };

    let root = match ld.next()? {
        Event::Start(e) if e.name().as_ref() == b"ecst" => e,
        _ => return Err(ld.structure("expected <ecst> root element")),
    };
    let (mut version, mut lang, mut file) = (None, None, String::new());
    for (k, v) in ld.attrs(&root)? {
        match k.as_str() {
            "version" => version = Some(v),
            "lang" => lang = Some(v),
            "file" => file = v,
            other => return Err(ld.structure(format!("unexpected ecst attribute `{other}`"))),
        }
    }
    match version.as_deref() {
        Some(FORMAT_VERSION) => {}
        other => {
            return Err(XmlError::Version {
                line: ld.line(),
                found: other.unwrap_or("").to_string(),
            })
        }
    }
    let lang = match lang.as_deref() {
        Some("LANG_K") => LanguageId::LangK,
        Some("LANG_C") => LanguageId::LangC,
        _ => return Err(ld.structure("`lang` must be LANG_K or LANG_C")),
    };
    ld.file = Arc::from(file.as_str());

    let raw = match ld.next()? {
        Event::Start(e) if e.name().as_ref() == b"node" => {
            let (kind, polarity) = ld.node_header(&e)?;
            let children = ld.children()?;
            RawNode {
                kind,
                polarity,
                children,
            }
        }
        Event::Empty(e) if e.name().as_ref() == b"node" => {
            let (kind, polarity) = ld.node_header(&e)?;
            RawNode {
                kind,
                polarity,
                children: Vec::new(),
            }
        }
        _ => return Err(ld.structure("expected a root <node>")),
    };
    match ld.next()? {
        Event::End(e) if e.name().as_ref() == b"ecst" => {}
        _ => return Err(ld.structure("expected </ecst> after the root node")),
    }
    match ld.next()? {
        Event::Eof => {}
        _ => return Err(ld.structure("trailing content after </ecst>")),
    }

    let mut spans = Vec::new();
    collect_spans(&raw, &mut spans);
    let fallback = SourceSpan::new(ld.file.clone(), 1, 1);
    let tree = finish(raw, &spans, &mut 0, &fallback);
    tree.validate()?;
    Ok(LoadedTree { lang, tree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontends::parse;

    fn k(src: &str) -> EcstNode {
        parse(src, LanguageId::LangK, "m.mod").unwrap()
    }

    #[test]
    fn empty_unit_layout() {
        let xml = ecst_to_xml(&k("MODULE M; END M."), LanguageId::LangK);
        let text = String::from_utf8(xml).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("<?xml version=\"1.0\" encoding=\"UTF-8\"?>")
        );
        assert_eq!(
            lines.next(),
            Some("<ecst version=\"1\" lang=\"LANG_K\" file=\"m.mod\">")
        );
        assert_eq!(lines.next(), Some("  <node kind=\"COMPILATION_UNIT\">"));
        assert_eq!(
            lines.next(),
            Some("    <token text=\"MODULE\" line=\"1\" col=\"1\"/>")
        );
        assert_eq!(text.lines().last(), Some("</ecst>"));
    }

    #[test]
    fn do_while_condition_polarity_in_xml() {
        let t = parse(
            "class M { void f(int i, int j) { do { } while (i <= j); } }",
            LanguageId::LangC,
            "m.cls",
        )
        .unwrap();
        let text = String::from_utf8(ecst_to_xml(&t, LanguageId::LangC)).unwrap();
        let lp = text.find("<node kind=\"LOOP_STATEMENT\">").unwrap();
        let cond = text
            .find("<node kind=\"CONDITION\" polarity=\"CONTINUE_WHEN_TRUE\">")
            .unwrap();
        assert!(lp < cond);
        assert!(text.contains("text=\"&lt;=\""));
    }

    #[test]
    fn greater_than_is_escaped() {
        let t = k("MODULE M; PROCEDURE f(i, j); REPEAT UNTIL (i > j); END f; END M.");
        let text = String::from_utf8(ecst_to_xml(&t, LanguageId::LangK)).unwrap();
        assert!(text.contains("<token text=\"&gt;\""));
    }

    #[test]
    fn round_trip_with_empty_blocks() {
        let t = k("MODULE M;\nPROCEDURE f(a);\nIF a > 0 THEN\nELSIF a < 0 THEN a := 1;\nEND;\nWHILE a > 0 DO\nEND;\nEND f;\nEND M.");
        let xml = ecst_to_xml(&t, LanguageId::LangK);
        let back = xml_to_ecst(&xml).unwrap();
        assert_eq!(back.lang, LanguageId::LangK);
        assert_eq!(back.tree, t);
        assert_eq!(ecst_to_xml(&back.tree, back.lang), xml);
    }

    fn with_root(body: &str, version: &str) -> Vec<u8> {
        format!("<ecst version=\"{version}\" lang=\"LANG_K\" file=\"x\">{body}</ecst>").into_bytes()
    }

    #[test]
    fn version_two_is_rejected() {
        let doc = with_root("<node kind=\"COMPILATION_UNIT\"/>", "2");
        assert!(matches!(xml_to_ecst(&doc), Err(XmlError::Version { found, .. }) if found == "2"));
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let doc = with_root(
            "<node kind=\"COMPILATION_UNIT\">\n<node kind=\"WHILE_LOOP\"/></node>",
            "1",
        );
        match xml_to_ecst(&doc) {
            Err(XmlError::UnknownKind { kind, line }) => {
                assert_eq!(kind, "WHILE_LOOP");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_xml_is_rejected() {
        let doc = with_root("<node kind=\"COMPILATION_UNIT\"><token", "1");
        assert!(xml_to_ecst(&doc).is_err());
        assert!(xml_to_ecst(b"\xff\xfe").is_err());
        let doc = with_root("<node kind=\"FUNCTION_DEF\"/>", "1");
        assert!(matches!(xml_to_ecst(&doc), Err(XmlError::Invalid(_))));
    }

    #[test]
    fn polarity_outside_loop_is_rejected() {
        let doc = with_root(
            "<node kind=\"COMPILATION_UNIT\"><node kind=\"CONDITION\" polarity=\"EXIT_WHEN_TRUE\"><token text=\"x\" line=\"1\" col=\"1\"/></node></node>",
            "1",
        );
        assert!(matches!(xml_to_ecst(&doc), Err(XmlError::Invalid(_))));
    }
}
