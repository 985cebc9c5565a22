//! Recursive-descent parser for the keyword-structured language.

use super::cursor::{Cursor, ExprOps};
use super::{ParseError, Token};
use crate::ecst::{ConditionPolarity, EcstNode, UniversalKind as U};

const OPS: ExprOps = ExprOps {
    or: "OR",
    and: "AND",
    not: "NOT",
    relational: &["<", "<=", ">", ">=", "=", "#"],
};

pub(crate) fn parse_tokens(tokens: Vec<Token>, file: &str) -> Result<EcstNode, ParseError> {
    let mut p = Parser {
        cur: Cursor::new(tokens, file),
    };
    p.module()
}

struct Parser {
    cur: Cursor,
}

impl Parser {
    fn module(&mut self) -> Result<EcstNode, ParseError> {
        let c = &mut self.cur;
        let mut kids = vec![c.expect("MODULE")?];
        let name = c.name("module name")?;
        let unit = name.name().unwrap_or_default().to_string();
        kids.push(c.node(U::UnitName, vec![name]));
        kids.push(c.expect(";")?);
        while self.cur.at("PROCEDURE") {
            kids.push(self.procedure()?);
        }
        let c = &mut self.cur;
        kids.push(c.expect("END")?);
        kids.push(self.closing_name(&unit)?);
        kids.push(self.cur.expect(".")?);
        if !self.cur.at_eof() {
            return Err(self.cur.error(super::END_OF_INPUT));
        }
        Ok(self.cur.node(U::CompilationUnit, kids))
    }

    fn closing_name(&mut self, expected: &str) -> Result<EcstNode, ParseError> {
        if self.cur.at(expected) {
            Ok(self.cur.bump())
        } else {
            Err(self
                .cur
                .error(format!("`{expected}` to close `{expected}`")))
        }
    }

    fn procedure(&mut self) -> Result<EcstNode, ParseError> {
        let c = &mut self.cur;
        let mut kids = vec![c.expect("PROCEDURE")?];
        let name = c.name("procedure name")?;
        let fname = name.name().unwrap_or_default().to_string();
        let mut params = vec![c.expect("(")?];
        if !c.at(")") {
            params.push(c.name("parameter name")?);
            while c.at(",") {
                params.push(c.bump());
                params.push(c.name("parameter name")?);
            }
        }
        params.push(c.expect(")")?);
        let params = c.node(U::ParameterList, params);
        kids.push(c.node(U::FunctionDecl, vec![name, params]));
        kids.push(c.expect(";")?);
        let body = self.statements()?;
        kids.push(self.cur.node(U::StatementBlock, body));
        kids.push(self.cur.expect("END")?);
        kids.push(self.closing_name(&fname)?);
        kids.push(self.cur.expect(";")?);
        Ok(self.cur.node(U::FunctionDef, kids))
    }

    fn at_statement(&self) -> bool {
        self.cur.at_ident()
            || ["IF", "WHILE", "REPEAT", "RETURN"]
                .iter()
                .any(|kw| self.cur.at(kw))
    }

    fn statements(&mut self) -> Result<Vec<EcstNode>, ParseError> {
        let mut out = Vec::new();
        while self.at_statement() {
            out.push(self.statement()?);
        }
        Ok(out)
    }

    fn statement(&mut self) -> Result<EcstNode, ParseError> {
        if self.cur.at("IF") {
            let lead = self.cur.bump();
            let mut kids = self.if_chain(lead)?;
            kids.push(self.cur.expect("END")?);
            kids.push(self.cur.expect(";")?);
            return Ok(self.cur.node(U::BranchStatement, kids));
        }
        if self.cur.at("WHILE") {
            let mut kids = vec![self.cur.bump()];
            let expr = self.cur.expression(&OPS)?;
            kids.push(
                self.cur
                    .condition(expr, Some(ConditionPolarity::ContinueWhenTrue)),
            );
            kids.push(self.cur.expect("DO")?);
            let body = self.statements()?;
            kids.push(self.cur.node(U::StatementBlock, body));
            kids.push(self.cur.expect("END")?);
            kids.push(self.cur.expect(";")?);
            return Ok(self.cur.node(U::LoopStatement, kids));
        }
        if self.cur.at("REPEAT") {
            let mut kids = vec![self.cur.bump()];
            let body = self.statements()?;
            kids.push(self.cur.node(U::StatementBlock, body));
            kids.push(self.cur.expect("UNTIL")?);
            let expr = self.cur.expression(&OPS)?;
            kids.push(
                self.cur
                    .condition(expr, Some(ConditionPolarity::ExitWhenTrue)),
            );
            kids.push(self.cur.expect(";")?);
            return Ok(self.cur.node(U::LoopStatement, kids));
        }
        if self.cur.at("RETURN") {
            let mut kids = vec![self.cur.bump()];
            if !self.cur.at(";") {
                kids.push(self.cur.expression(&OPS)?);
            }
            kids.push(self.cur.expect(";")?);
            return Ok(self.cur.node(U::ReturnStatement, kids));
        }
        let target = self.cur.name("statement")?;
        if self.cur.at(":=") {
            let mut kids = vec![target, self.cur.bump()];
            kids.push(self.cur.expression(&OPS)?);
            kids.push(self.cur.expect(";")?);
            Ok(self.cur.node(U::AssignStatement, kids))
        } else if self.cur.at("(") {
            let args = self.cur.argument_list(&OPS)?;
            let semi = self.cur.expect(";")?;
            Ok(self.cur.node(U::FunctionCall, vec![target, args, semi]))
        } else {
            Err(self.cur.error("`:=` or `(`"))
        }
    }

    /// `IF`/`ELSIF` tail up to (not including) the closing `END ;`.
    /// An `ELSIF` becomes a nested `BRANCH_STATEMENT` in the else position.
    fn if_chain(&mut self, lead: EcstNode) -> Result<Vec<EcstNode>, ParseError> {
        let mut kids = vec![lead];
        let expr = self.cur.expression(&OPS)?;
        kids.push(self.cur.condition(expr, None));
        kids.push(self.cur.expect("THEN")?);
        let then = self.statements()?;
        kids.push(self.cur.node(U::Branch, then));
        if self.cur.at("ELSIF") {
            let lead = self.cur.bump();
            let inner = self.if_chain(lead)?;
            let nested = self.cur.node(U::BranchStatement, inner);
            kids.push(self.cur.node(U::Branch, vec![nested]));
        } else if self.cur.at("ELSE") {
            let mut arm = vec![self.cur.bump()];
            arm.extend(self.statements()?);
            kids.push(self.cur.node(U::Branch, arm));
        }
        Ok(kids)
    }
}
