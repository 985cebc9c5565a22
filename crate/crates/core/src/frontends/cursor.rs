//! Token cursor and the expression grammar shared by both parsers.

use std::sync::Arc;

use super::{ParseError, Token, TokenCategory, END_OF_INPUT};
use crate::ecst::{make_universal, ConditionPolarity, EcstNode, SourceSpan, UniversalKind};

/// Spellings of the logical and relational operators for one language.
pub(crate) struct ExprOps {
    pub or: &'static str,
    pub and: &'static str,
    pub not: &'static str,
    pub relational: &'static [&'static str],
}

pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    file: Arc<str>,
}

impl Cursor {
    pub fn new(tokens: Vec<Token>, file: &str) -> Self {
        Cursor {
            tokens,
            pos: 0,
            file: Arc::from(file),
        }
    }

    pub fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    pub fn peek_nth(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.pos + n)
    }

    pub fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.text == text)
    }

    pub fn at_eof(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    /// Span of the next token, or just past the last one at end of input.
    pub fn here(&self) -> SourceSpan {
        match self.peek().or_else(|| self.tokens.last()) {
            Some(t) => t.span.clone(),
            None => SourceSpan::new(self.file.clone(), 1, 1),
        }
    }

    pub fn error(&self, expected: impl Into<String>) -> ParseError {
        ParseError {
            span: self.here(),
            expected: expected.into(),
            found: match self.peek() {
                Some(t) => format!("`{}`", t.text),
                None => END_OF_INPUT.to_string(),
            },
        }
    }

    pub fn bump(&mut self) -> EcstNode {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        EcstNode::token(t.text.clone(), t.span.clone())
    }

    pub fn expect(&mut self, text: &str) -> Result<EcstNode, ParseError> {
        if self.at(text) {
            Ok(self.bump())
        } else {
            Err(self.error(format!("`{text}`")))
        }
    }

    pub fn at_ident(&self) -> bool {
        self.peek()
            .is_some_and(|t| t.category == TokenCategory::Ident)
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<EcstNode, ParseError> {
        if self.at_ident() {
            Ok(self.bump())
        } else {
            Err(self.error(what))
        }
    }

    /// `NAME(ident)`.
    pub fn name(&mut self, what: &str) -> Result<EcstNode, ParseError> {
        let id = self.expect_ident(what)?;
        Ok(self.node(UniversalKind::Name, vec![id]))
    }

    /// Universal node whose fallback span is the current parse position.
    pub fn node(&self, kind: UniversalKind, children: Vec<EcstNode>) -> EcstNode {
        make_universal(kind, children, None, self.here())
            .expect("no polarity, construction cannot fail")
    }

    pub fn condition(&self, expr: EcstNode, polarity: Option<ConditionPolarity>) -> EcstNode {
        make_universal(UniversalKind::Condition, vec![expr], polarity, self.here())
            .expect("CONDITION accepts a polarity")
    }

    /// Parses an expression and wraps its tokens in `EXPRESSION`.
    pub fn expression(&mut self, ops: &ExprOps) -> Result<EcstNode, ParseError> {
        let mut toks = Vec::new();
        self.or_expr(ops, &mut toks)?;
        Ok(self.node(UniversalKind::Expression, toks))
    }

    fn or_expr(&mut self, ops: &ExprOps, out: &mut Vec<EcstNode>) -> Result<(), ParseError> {
        self.and_expr(ops, out)?;
        while self.at(ops.or) {
            out.push(self.bump());
            self.and_expr(ops, out)?;
        }
        Ok(())
    }

    fn and_expr(&mut self, ops: &ExprOps, out: &mut Vec<EcstNode>) -> Result<(), ParseError> {
        self.rel_expr(ops, out)?;
        while self.at(ops.and) {
            out.push(self.bump());
            self.rel_expr(ops, out)?;
        }
        Ok(())
    }

    fn rel_expr(&mut self, ops: &ExprOps, out: &mut Vec<EcstNode>) -> Result<(), ParseError> {
        self.add_expr(ops, out)?;
        if ops.relational.iter().any(|op| self.at(op)) {
            out.push(self.bump());
            self.add_expr(ops, out)?;
        }
        Ok(())
    }

    fn add_expr(&mut self, ops: &ExprOps, out: &mut Vec<EcstNode>) -> Result<(), ParseError> {
        self.mul_expr(ops, out)?;
        while self.at("+") || self.at("-") {
            out.push(self.bump());
            self.mul_expr(ops, out)?;
        }
        Ok(())
    }

    fn mul_expr(&mut self, ops: &ExprOps, out: &mut Vec<EcstNode>) -> Result<(), ParseError> {
        self.unary_expr(ops, out)?;
        while self.at("*") || self.at("/") {
            out.push(self.bump());
            self.unary_expr(ops, out)?;
        }
        Ok(())
    }

    fn unary_expr(&mut self, ops: &ExprOps, out: &mut Vec<EcstNode>) -> Result<(), ParseError> {
        if self.at(ops.not) {
            out.push(self.bump());
            return self.unary_expr(ops, out);
        }
        match self.peek().map(|t| t.category) {
            Some(TokenCategory::Ident) | Some(TokenCategory::IntLiteral) => {
                out.push(self.bump());
                Ok(())
            }
            _ if self.at("(") => {
                out.push(self.bump());
                self.or_expr(ops, out)?;
                out.push(self.expect(")")?);
                Ok(())
            }
            _ => Err(self.error("an expression")),
        }
    }

    /// `"(" [expr {"," expr}] ")"` as `ARGUMENT_LIST`, each argument an `EXPRESSION`.
    pub fn argument_list(&mut self, ops: &ExprOps) -> Result<EcstNode, ParseError> {
        let mut kids = vec![self.expect("(")?];
        if !self.at(")") {
            kids.push(self.expression(ops)?);
            while self.at(",") {
                kids.push(self.bump());
                kids.push(self.expression(ops)?);
            }
        }
        kids.push(self.expect(")")?);
        Ok(self.node(UniversalKind::ArgumentList, kids))
    }
}
