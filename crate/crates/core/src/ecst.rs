//! The enriched concrete syntax tree.
//!
//! A tree is an ordinary concrete syntax tree (every lexeme is kept as a
//! [`NodeKind::Token`] leaf) in which a closed set of language-independent
//! *universal* nodes has been inserted as parents of the sub-trees they
//! classify. Analyses only ever look at the universal kinds, which is what
//! lets a single implementation serve every frontend.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The fixed vocabulary of universal nodes. No frontend may emit anything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UniversalKind {
    CompilationUnit,
    UnitName,
    FunctionDef,
    FunctionDecl,
    FunctionCall,
    ParameterList,
    ArgumentList,
    Name,
    BranchStatement,
    Branch,
    LoopStatement,
    Condition,
    StatementBlock,
    AssignStatement,
    ReturnStatement,
    Expression,
}

impl UniversalKind {
    pub const ALL: [UniversalKind; 16] = [
        UniversalKind::CompilationUnit,
        UniversalKind::UnitName,
        UniversalKind::FunctionDef,
        UniversalKind::FunctionDecl,
        UniversalKind::FunctionCall,
        UniversalKind::ParameterList,
        UniversalKind::ArgumentList,
        UniversalKind::Name,
        UniversalKind::BranchStatement,
        UniversalKind::Branch,
        UniversalKind::LoopStatement,
        UniversalKind::Condition,
        UniversalKind::StatementBlock,
        UniversalKind::AssignStatement,
        UniversalKind::ReturnStatement,
        UniversalKind::Expression,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UniversalKind::CompilationUnit => "COMPILATION_UNIT",
            UniversalKind::UnitName => "UNIT_NAME",
            UniversalKind::FunctionDef => "FUNCTION_DEF",
            UniversalKind::FunctionDecl => "FUNCTION_DECL",
            UniversalKind::FunctionCall => "FUNCTION_CALL",
            UniversalKind::ParameterList => "PARAMETER_LIST",
            UniversalKind::ArgumentList => "ARGUMENT_LIST",
            UniversalKind::Name => "NAME",
            UniversalKind::BranchStatement => "BRANCH_STATEMENT",
            UniversalKind::Branch => "BRANCH",
            UniversalKind::LoopStatement => "LOOP_STATEMENT",
            UniversalKind::Condition => "CONDITION",
            UniversalKind::StatementBlock => "STATEMENT_BLOCK",
            UniversalKind::AssignStatement => "ASSIGN_STATEMENT",
            UniversalKind::ReturnStatement => "RETURN_STATEMENT",
            UniversalKind::Expression => "EXPRESSION",
        }
    }

    /// Kinds that stand for an executable statement inside a block.
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            UniversalKind::AssignStatement
                | UniversalKind::FunctionCall
                | UniversalKind::ReturnStatement
                | UniversalKind::BranchStatement
                | UniversalKind::LoopStatement
        )
    }
}

impl fmt::Display for UniversalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown universal kind `{0}`")]
pub struct UnknownKind(pub String);

impl FromStr for UniversalKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UniversalKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

/// Which truth value of a loop condition keeps the loop running.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionPolarity {
    /// `while`, `do ... while`: true means iterate again.
    ContinueWhenTrue,
    /// `REPEAT ... UNTIL`: true means leave the loop.
    ExitWhenTrue,
}

impl ConditionPolarity {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionPolarity::ContinueWhenTrue => "CONTINUE_WHEN_TRUE",
            ConditionPolarity::ExitWhenTrue => "EXIT_WHEN_TRUE",
        }
    }
}

impl fmt::Display for ConditionPolarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionPolarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "CONTINUE_WHEN_TRUE" => Ok(ConditionPolarity::ContinueWhenTrue),
            "EXIT_WHEN_TRUE" => Ok(ConditionPolarity::ExitWhenTrue),
            other => Err(format!("unknown polarity `{other}`")),
        }
    }
}

/// A 1-based position in a source file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourceSpan {
    /// Panics if `line` or `column` is zero.
    pub fn new(file: impl Into<Arc<str>>, line: u32, column: u32) -> Self {
        assert!(line >= 1 && column >= 1, "source positions are 1-based");
        SourceSpan {
            file: file.into(),
            line,
            column,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Universal(UniversalKind),
    Token,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EcstError {
    #[error("polarity may only be attached to CONDITION, not {0}")]
    PolarityOnNonCondition(UniversalKind),
    #[error("{span}: tree root must be COMPILATION_UNIT, found {found}")]
    BadRoot { span: SourceSpan, found: String },
    #[error("{span}: loop CONDITION is missing its polarity")]
    MissingPolarity { span: SourceSpan },
    #[error("{span}: polarity on a CONDITION outside a LOOP_STATEMENT")]
    StrayPolarity { span: SourceSpan },
}

/// One node of an eCST. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcstNode {
    kind: NodeKind,
    text: String,
    span: SourceSpan,
    polarity: Option<ConditionPolarity>,
    children: Vec<EcstNode>,
}

impl EcstNode {
    /// A concrete lexeme leaf.
    pub fn token(text: impl Into<String>, span: SourceSpan) -> Self {
        let text = text.into();
        assert!(!text.is_empty(), "token text must be non-empty");
        EcstNode {
            kind: NodeKind::Token,
            text,
            span,
            polarity: None,
            children: Vec::new(),
        }
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn universal_kind(&self) -> Option<UniversalKind> {
        match self.kind {
            NodeKind::Universal(k) => Some(k),
            NodeKind::Token => None,
        }
    }

    pub fn is(&self, kind: UniversalKind) -> bool {
        self.kind == NodeKind::Universal(kind)
    }

    pub fn is_token(&self) -> bool {
        self.kind == NodeKind::Token
    }

    /// Lexeme of a token; empty for universal nodes.
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn span(&self) -> &SourceSpan {
        &self.span
    }

    pub fn polarity(&self) -> Option<ConditionPolarity> {
        self.polarity
    }

    pub fn children(&self) -> &[EcstNode] {
        &self.children
    }

    /// First direct child of the given universal kind.
    pub fn child(&self, kind: UniversalKind) -> Option<&EcstNode> {
        self.children.iter().find(|c| c.is(kind))
    }

    /// Pre-order iterator over self and all descendants.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    /// Token leaves in source order.
    pub fn tokens(&self) -> impl Iterator<Item = &EcstNode> {
        self.descendants().filter(|n| n.is_token())
    }

    /// Token texts joined by single spaces.
    pub fn source_text(&self) -> String {
        let mut out = String::new();
        for tok in self.tokens() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&tok.text);
        }
        out
    }

    /// Text of the identifier under a direct `NAME` child, looking through
    /// `UNIT_NAME` and `FUNCTION_DECL` wrappers.
    pub fn name(&self) -> Option<&str> {
        if self.is(UniversalKind::Name) {
            return self.tokens().next().map(|t| t.text());
        }
        for wrapper in [UniversalKind::UnitName, UniversalKind::FunctionDecl] {
            if let Some(inner) = self.child(wrapper) {
                return inner.name();
            }
        }
        self.child(UniversalKind::Name).and_then(EcstNode::name)
    }

    /// Checks the whole-tree invariants: a `COMPILATION_UNIT` root and
    /// polarity present exactly on loop conditions.
    pub fn validate(&self) -> Result<(), EcstError> {
        if !self.is(UniversalKind::CompilationUnit) {
            return Err(EcstError::BadRoot {
                span: self.span.clone(),
                found: match self.kind {
                    NodeKind::Universal(k) => k.to_string(),
                    NodeKind::Token => format!("token `{}`", self.text),
                },
            });
        }
        self.validate_polarity(false)
    }

    fn validate_polarity(&self, parent_is_loop: bool) -> Result<(), EcstError> {
        if self.is(UniversalKind::Condition) {
            match (parent_is_loop, self.polarity) {
                (true, None) => {
                    return Err(EcstError::MissingPolarity {
                        span: self.span.clone(),
                    })
                }
                (false, Some(_)) => {
                    return Err(EcstError::StrayPolarity {
                        span: self.span.clone(),
                    })
                }
                _ => {}
            }
        }
        let is_loop = self.is(UniversalKind::LoopStatement);
        self.children
            .iter()
            .try_for_each(|c| c.validate_polarity(is_loop))
    }
}

pub struct Descendants<'a> {
    stack: Vec<&'a EcstNode>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a EcstNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// Builds a universal node over `children`.
///
/// The node's span is that of its first descendant token; `at` is used only
/// when the subtree holds no tokens (an empty block) and should be the parse
/// position of the construct.
pub fn make_universal(
    kind: UniversalKind,
    children: Vec<EcstNode>,
    polarity: Option<ConditionPolarity>,
    at: SourceSpan,
) -> Result<EcstNode, EcstError> {
    if polarity.is_some() && kind != UniversalKind::Condition {
        return Err(EcstError::PolarityOnNonCondition(kind));
    }
    let span = children
        .iter()
        .find_map(|c| c.tokens().next())
        .map(|t| t.span.clone())
        .unwrap_or(at);
    Ok(EcstNode {
        kind: NodeKind::Universal(kind),
        text: String::new(),
        span,
        polarity,
        children,
    })
}

/// Number of nodes of `kind` in the tree, the root included.
pub fn count_kind(tree: &EcstNode, kind: UniversalKind) -> usize {
    tree.descendants().filter(|n| n.is(kind)).count()
}

/// All nodes of `kind` in pre-order.
pub fn find_all(tree: &EcstNode, kind: UniversalKind) -> Vec<&EcstNode> {
    tree.descendants().filter(|n| n.is(kind)).collect()
}

/// A tree of universal kinds only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Skeleton {
    pub kind: UniversalKind,
    pub children: Vec<Skeleton>,
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.as_str())?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Anything shaped like a tree of (optionally) universal nodes.
pub trait KindTree {
    fn universal_kind(&self) -> Option<UniversalKind>;
    fn kind_children(&self) -> &[Self]
    where
        Self: Sized;
}

impl KindTree for EcstNode {
    fn universal_kind(&self) -> Option<UniversalKind> {
        EcstNode::universal_kind(self)
    }

    fn kind_children(&self) -> &[Self] {
        &self.children
    }
}

impl KindTree for Skeleton {
    fn universal_kind(&self) -> Option<UniversalKind> {
        Some(self.kind)
    }

    fn kind_children(&self) -> &[Self] {
        &self.children
    }
}

/// Projects a tree onto its universal nodes. Tokens vanish; a token-only
/// input projects to `None`.
pub fn skeleton<T: KindTree>(tree: &T) -> Option<Skeleton> {
    let kind = tree.universal_kind()?;
    Some(Skeleton {
        kind,
        children: tree.kind_children().iter().filter_map(skeleton).collect(),
    })
}
