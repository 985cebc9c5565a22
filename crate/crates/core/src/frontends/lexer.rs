use std::sync::Arc;

use super::{LanguageId, ParseError, Token, TokenCategory, END_OF_INPUT};
use crate::ecst::SourceSpan;

const K_KEYWORDS: &[&str] = &[
    "MODULE",
    "PROCEDURE",
    "END",
    "IF",
    "THEN",
    "ELSIF",
    "ELSE",
    "WHILE",
    "DO",
    "REPEAT",
    "UNTIL",
    "RETURN",
    "AND",
    "OR",
    "NOT",
];

const C_KEYWORDS: &[&str] = &["class", "if", "else", "while", "do", "return"];

// Longest first so maximal munch falls out of a linear scan.
const K_OPERATORS: &[&str] = &[":=", "<=", ">=", "<", ">", "=", "#", "+", "-", "*", "/"];
const C_OPERATORS: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "<", ">", "=", "!", "+", "-", "*", "/",
];

const K_PUNCT: &[char] = &['(', ')', ';', ',', '.'];
const C_PUNCT: &[char] = &['(', ')', ';', ',', '{', '}'];

pub(crate) fn keywords(lang: LanguageId) -> &'static [&'static str] {
    match lang {
        LanguageId::LangK => K_KEYWORDS,
        LanguageId::LangC => C_KEYWORDS,
    }
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: Arc<str>,
}

impl Scanner {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            line: self.line,
            column: self.col,
        }
    }

    fn unterminated(&self, opened: SourceSpan, closer: &str) -> ParseError {
        ParseError {
            span: opened,
            expected: format!("`{closer}` (unterminated comment)"),
            found: END_OF_INPUT.to_string(),
        }
    }

    /// Skips whitespace and comments. Returns an error for a comment that
    /// runs off the end of the input.
    fn skip_trivia(&mut self, lang: LanguageId) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('(') if lang == LanguageId::LangK && self.peek_at(1) == Some('*') => {
                    let opened = self.span();
                    self.bump();
                    self.bump();
                    let mut depth = 1usize;
                    while depth > 0 {
                        if self.starts_with("(*") {
                            self.bump();
                            self.bump();
                            depth += 1;
                        } else if self.starts_with("*)") {
                            self.bump();
                            self.bump();
                            depth -= 1;
                        } else if self.bump().is_none() {
                            return Err(self.unterminated(opened, "*)"));
                        }
                    }
                }
                Some('/') if lang == LanguageId::LangC && self.peek_at(1) == Some('/') => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                Some('/') if lang == LanguageId::LangC && self.peek_at(1) == Some('*') => {
                    let opened = self.span();
                    self.bump();
                    self.bump();
                    loop {
                        if self.starts_with("*/") {
                            self.bump();
                            self.bump();
                            break;
                        }
                        if self.bump().is_none() {
                            return Err(self.unterminated(opened, "*/"));
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }
}

/// Splits `source` into tokens, dropping whitespace and comments.
pub fn tokenize(source: &str, lang: LanguageId, file: &str) -> Result<Vec<Token>, ParseError> {
    let (operators, punct) = match lang {
        LanguageId::LangK => (K_OPERATORS, K_PUNCT),
        LanguageId::LangC => (C_OPERATORS, C_PUNCT),
    };
    let kws = keywords(lang);
    let mut sc = Scanner {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file: Arc::from(file),
    };
    let mut out = Vec::new();
    loop {
        sc.skip_trivia(lang)?;
        let Some(c) = sc.peek() else { break };
        let span = sc.span();
        let start = sc.pos;
        let category = if c.is_ascii_alphabetic() || c == '_' {
            while matches!(sc.peek(), Some(ch) if ch.is_ascii_alphanumeric() || ch == '_') {
                sc.bump();
            }
            let word: String = sc.chars[start..sc.pos].iter().collect();
            if kws.contains(&word.as_str()) {
                TokenCategory::Keyword
            } else {
                TokenCategory::Ident
            }
        } else if c.is_ascii_digit() {
            while matches!(sc.peek(), Some(ch) if ch.is_ascii_digit()) {
                sc.bump();
            }
            TokenCategory::IntLiteral
        } else if let Some(op) = operators.iter().find(|op| sc.starts_with(op)) {
            for _ in 0..op.len() {
                sc.bump();
            }
            TokenCategory::Operator
        } else if punct.contains(&c) {
            sc.bump();
            TokenCategory::Punct
        } else {
            return Err(ParseError {
                span,
                expected: format!("a {lang} token"),
                found: format!("illegal character `{}`", c.escape_default()),
            });
        };
        out.push(Token {
            text: sc.chars[start..sc.pos].iter().collect(),
            category,
            span,
        });
    }
    Ok(out)
}
