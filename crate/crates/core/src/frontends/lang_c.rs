//! Recursive-descent parser for the curly-brace language.

use super::cursor::{Cursor, ExprOps};
use super::{ParseError, Token};
use crate::ecst::{ConditionPolarity, EcstNode, UniversalKind as U};

const OPS: ExprOps = ExprOps {
    or: "||",
    and: "&&",
    not: "!",
    relational: &["<", "<=", ">", ">=", "==", "!="],
};

pub(crate) fn parse_tokens(tokens: Vec<Token>, file: &str) -> Result<EcstNode, ParseError> {
    let mut p = Parser {
        cur: Cursor::new(tokens, file),
    };
    p.unit()
}

struct Parser {
    cur: Cursor,
}

impl Parser {
    fn unit(&mut self) -> Result<EcstNode, ParseError> {
        let c = &mut self.cur;
        let mut kids = vec![c.expect("class")?];
        let name = c.name("class name")?;
        kids.push(c.node(U::UnitName, vec![name]));
        kids.push(c.expect("{")?);
        while self.cur.at_ident() {
            kids.push(self.method()?);
        }
        kids.push(self.cur.expect("}")?);
        if !self.cur.at_eof() {
            return Err(self.cur.error(super::END_OF_INPUT));
        }
        Ok(self.cur.node(U::CompilationUnit, kids))
    }

    fn method(&mut self) -> Result<EcstNode, ParseError> {
        let c = &mut self.cur;
        let ret = c.expect_ident("return type")?;
        let name = c.name("method name")?;
        let mut params = vec![c.expect("(")?];
        if !c.at(")") {
            params.push(c.expect_ident("parameter type")?);
            params.push(c.name("parameter name")?);
            while c.at(",") {
                params.push(c.bump());
                params.push(c.expect_ident("parameter type")?);
                params.push(c.name("parameter name")?);
            }
        }
        params.push(c.expect(")")?);
        let params = c.node(U::ParameterList, params);
        let decl = c.node(U::FunctionDecl, vec![name, params]);
        if !c.at("{") {
            return Err(c.error("`{`"));
        }
        let body = self.arm(U::StatementBlock, vec![])?;
        Ok(self.cur.node(U::FunctionDef, vec![ret, decl, body]))
    }

    /// A statement position that may hold a braced block. A braced block
    /// lends its contents (braces included) to the enclosing `kind` node so
    /// both languages yield the same shape.
    fn arm(&mut self, kind: U, mut kids: Vec<EcstNode>) -> Result<EcstNode, ParseError> {
        if self.cur.at("{") {
            kids.extend(self.braced()?);
        } else {
            kids.extend(self.statement()?);
        }
        Ok(self.cur.node(kind, kids))
    }

    fn braced(&mut self) -> Result<Vec<EcstNode>, ParseError> {
        let mut kids = vec![self.cur.expect("{")?];
        while !self.cur.at("}") {
            if self.cur.at_eof() {
                return Err(self.cur.error("`}`"));
            }
            kids.extend(self.statement()?);
        }
        kids.push(self.cur.bump());
        Ok(kids)
    }

    /// One statement. A declaration without initializer has no universal
    /// node and comes back as bare tokens.
    fn statement(&mut self) -> Result<Vec<EcstNode>, ParseError> {
        let c = &mut self.cur;
        if c.at("{") {
            let kids = self.braced()?;
            return Ok(vec![self.cur.node(U::StatementBlock, kids)]);
        }
        if c.at("if") {
            let mut kids = vec![c.bump(), c.expect("(")?];
            let expr = c.expression(&OPS)?;
            kids.push(c.condition(expr, None));
            kids.push(self.cur.expect(")")?);
            kids.push(self.arm(U::Branch, vec![])?);
            if self.cur.at("else") {
                let kw = self.cur.bump();
                kids.push(self.arm(U::Branch, vec![kw])?);
            }
            return Ok(vec![self.cur.node(U::BranchStatement, kids)]);
        }
        if c.at("while") {
            let mut kids = vec![c.bump(), c.expect("(")?];
            let expr = c.expression(&OPS)?;
            kids.push(c.condition(expr, Some(ConditionPolarity::ContinueWhenTrue)));
            kids.push(self.cur.expect(")")?);
            kids.push(self.arm(U::StatementBlock, vec![])?);
            return Ok(vec![self.cur.node(U::LoopStatement, kids)]);
        }
        if c.at("do") {
            let mut kids = vec![c.bump()];
            kids.push(self.arm(U::StatementBlock, vec![])?);
            let c = &mut self.cur;
            kids.push(c.expect("while")?);
            kids.push(c.expect("(")?);
            let expr = c.expression(&OPS)?;
            kids.push(c.condition(expr, Some(ConditionPolarity::ContinueWhenTrue)));
            kids.push(c.expect(")")?);
            kids.push(c.expect(";")?);
            return Ok(vec![c.node(U::LoopStatement, kids)]);
        }
        if c.at("return") {
            let mut kids = vec![c.bump()];
            if !c.at(";") {
                kids.push(c.expression(&OPS)?);
            }
            kids.push(c.expect(";")?);
            return Ok(vec![c.node(U::ReturnStatement, kids)]);
        }
        if !c.at_ident() {
            return Err(c.error("a statement"));
        }
        let second_is_ident = c
            .peek_nth(1)
            .is_some_and(|t| t.category == super::TokenCategory::Ident);
        if second_is_ident {
            let ty = c.bump();
            if c.peek_nth(1).is_some_and(|t| t.text == "=") {
                let mut kids = vec![ty, c.name("variable name")?, c.bump()];
                kids.push(c.expression(&OPS)?);
                kids.push(c.expect(";")?);
                return Ok(vec![c.node(U::AssignStatement, kids)]);
            }
            let var = c.expect_ident("variable name")?;
            let semi = c.expect(";")?;
            return Ok(vec![ty, var, semi]);
        }
        let target = c.name("statement")?;
        if c.at("=") {
            let mut kids = vec![target, c.bump()];
            kids.push(c.expression(&OPS)?);
            kids.push(c.expect(";")?);
            Ok(vec![c.node(U::AssignStatement, kids)])
        } else if c.at("(") {
            let args = c.argument_list(&OPS)?;
            let semi = c.expect(";")?;
            Ok(vec![c.node(U::FunctionCall, vec![target, args, semi])])
        } else {
            Err(c.error("`=` or `(`"))
        }
    }
}
