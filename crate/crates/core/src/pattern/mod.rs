//! Tree queries over constituency trees, in a Tregex-style notation.
//!
//! ```text
//! pattern    = node_expr
//! node_expr  = "(" node_expr ")" | node
//! node       = ["!"] label_spec { "=" NAME } { relation }
//! relation   = ["!"] operator target
//! target     = "(" node_expr ")" | ["!"] label_spec { "=" NAME }
//! label_spec = ( "__" | LABEL { "|" LABEL } ) [ "@" WORD { "|" WORD } ]
//! operator   = "<" | "<<" | "<:" | "<<:" | "<," | "<-" | "<+(" LABEL { "|" LABEL } ")"
//!            | "$.." | "$+" | "$,," | "$-"
//! ```
//!
//! All relations written after a node constrain that node, so `A < B $.. C`
//! means A has a child B and a following sister C. The `@` suffix restricts a
//! pre-terminal to the listed words (case-insensitive). A `!` before a
//! relation requires that no node satisfies it; captures are not allowed
//! inside negated parts.

mod matcher;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use matcher::{find_all, find_first, Binding, MatchResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("syntax error at {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("unknown operator `{glyph}` at {position}")]
    UnknownOperator { glyph: String, position: usize },
    #[error("duplicate capture `{0}`")]
    DuplicateCapture(String),
}

impl PatternError {
    pub fn position(&self) -> Option<usize> {
        match self {
            PatternError::SyntaxError { position, .. } => Some(*position),
            PatternError::UnknownOperator { position, .. } => Some(*position),
            PatternError::DuplicateCapture(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelMatcher {
    /// `__`
    Any,
    /// One or more alternatives, `A|B`.
    OneOf(Vec<String>),
}

impl LabelMatcher {
    pub fn matches(&self, category: &str) -> bool {
        match self {
            LabelMatcher::Any => true,
            LabelMatcher::OneOf(alts) => alts.iter().any(|a| a == category),
        }
    }
}

impl fmt::Display for LabelMatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelMatcher::Any => f.write_str("__"),
            LabelMatcher::OneOf(alts) => f.write_str(&alts.join("|")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operator {
    /// `A < B`: B is a child of A.
    ChildOf,
    /// `A << B`: B is a proper descendant of A.
    Dominates,
    /// `A <: B`: B is the only child of A.
    OnlyChildOf,
    /// `A <<: B`: B is reached from A through unary nodes only.
    UnaryDominates,
    /// `A <, B`: B is the first child of A.
    FirstChild,
    /// `A <- B`: B is the last child of A.
    LastChild,
    /// `A <+(C) B`: B is a descendant of A and every node between them is a C.
    ChainDominates(LabelMatcher),
    /// `A $.. B`: B is a later sister of A.
    SisterPrecedes,
    /// `A $+ B`: B is the sister right after A.
    ImmediateSisterPrecedes,
    /// `A $,, B`: B is an earlier sister of A.
    SisterFollows,
    /// `A $- B`: B is the sister right before A.
    ImmediateSisterFollows,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::ChildOf => f.write_str("<"),
            Operator::Dominates => f.write_str("<<"),
            Operator::OnlyChildOf => f.write_str("<:"),
            Operator::UnaryDominates => f.write_str("<<:"),
            Operator::FirstChild => f.write_str("<,"),
            Operator::LastChild => f.write_str("<-"),
            Operator::ChainDominates(c) => write!(f, "<+({c})"),
            Operator::SisterPrecedes => f.write_str("$.."),
            Operator::ImmediateSisterPrecedes => f.write_str("$+"),
            Operator::SisterFollows => f.write_str("$,,"),
            Operator::ImmediateSisterFollows => f.write_str("$-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub op: Operator,
    pub negated: bool,
    pub target: PatternNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternNode {
    pub category: LabelMatcher,
    /// Lowercased words a pre-terminal must carry, if restricted.
    pub words: Option<Vec<String>>,
    pub negated: bool,
    pub captures: Vec<String>,
    pub relations: Vec<Relation>,
}

impl PatternNode {
    /// Label test for a single tree node, without relations.
    pub fn accepts(&self, category: &str, token: Option<&str>) -> bool {
        let mut ok = self.category.matches(category);
        if let Some(words) = &self.words {
            ok = ok
                && token
                    .map(|t| words.iter().any(|w| w.eq_ignore_ascii_case(t)))
                    .unwrap_or(false);
        }
        ok != self.negated
    }

    /// Number of relations in this subtree.
    pub fn operator_count(&self) -> usize {
        self.relations
            .iter()
            .map(|r| 1 + r.target.operator_count())
            .sum()
    }

    fn fmt_label(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        write!(f, "{}", self.category)?;
        if let Some(w) = &self.words {
            write!(f, "@{}", w.join("|"))?;
        }
        for c in &self.captures {
            write!(f, "={c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for PatternNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_label(f)?;
        for r in &self.relations {
            f.write_str(" ")?;
            if r.negated {
                f.write_str("!")?;
            }
            write!(f, "{} ", r.op)?;
            if r.target.relations.is_empty() {
                r.target.fmt_label(f)?;
            } else {
                write!(f, "({})", r.target)?;
            }
        }
        Ok(())
    }
}

/// A compiled pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub root: PatternNode,
    pub capture_names: BTreeSet<String>,
    source: String,
}

impl Pattern {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn declares(&self, name: &str) -> bool {
        self.capture_names.contains(name)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl std::str::FromStr for Pattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        compile(s)
    }
}

pub fn compile(pattern_text: &str) -> Result<Pattern, PatternError> {
    let mut p = Compiler {
        src: pattern_text,
        pos: 0,
        captures: BTreeSet::new(),
    };
    p.skip_ws();
    let root = p.node_expr(false)?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(Pattern {
        root,
        capture_names: p.captures,
        source: pattern_text.to_owned(),
    })
}

const OP_CHARS: &[char] = &[
    '<', '>', '$', '.', ',', ':', '+', '-', '&', '^', '%', '~', '*', '#', ';', '?', '`', '\'',
];

struct Compiler<'a> {
    src: &'a str,
    pos: usize,
    captures: BTreeSet<String>,
}

impl Compiler<'_> {
    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn syntax(&self, message: &str) -> PatternError {
        PatternError::SyntaxError {
            position: self.pos,
            message: message.to_owned(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PatternError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{c}`")))
        }
    }

    fn node_expr(&mut self, in_negation: bool) -> Result<PatternNode, PatternError> {
        self.skip_ws();
        if self.peek() == Some('(') {
            self.bump();
            let n = self.node_expr(in_negation)?;
            self.expect(')')?;
            return Ok(n);
        }
        let mut node = self.label_spec(in_negation)?;
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some(')') => break,
                Some('!') => {
                    let bang = self.pos;
                    self.bump();
                    if !self.peek().is_some_and(|c| OP_CHARS.contains(&c)) {
                        self.pos = bang;
                        return Err(self.syntax("expected an operator after `!`"));
                    }
                    let op = self.operator()?;
                    let target = self.target(true)?;
                    node.relations.push(Relation {
                        op,
                        negated: true,
                        target,
                    });
                }
                Some(c) if OP_CHARS.contains(&c) => {
                    let op = self.operator()?;
                    let target = self.target(in_negation)?;
                    node.relations.push(Relation {
                        op,
                        negated: false,
                        target,
                    });
                }
                Some(_) => return Err(self.syntax("expected an operator")),
            }
        }
        Ok(node)
    }

    fn target(&mut self, in_negation: bool) -> Result<PatternNode, PatternError> {
        self.skip_ws();
        if self.peek() == Some('(') {
            self.bump();
            let n = self.node_expr(in_negation)?;
            self.expect(')')?;
            Ok(n)
        } else {
            self.label_spec(in_negation)
        }
    }

    fn operator(&mut self) -> Result<Operator, PatternError> {
        let start = self.pos;
        let glyph_len = self
            .rest()
            .find(|c: char| !OP_CHARS.contains(&c))
            .unwrap_or(self.rest().len());
        let glyph = &self.rest()[..glyph_len];
        let op = match glyph {
            "<" => Operator::ChildOf,
            "<<" => Operator::Dominates,
            "<:" => Operator::OnlyChildOf,
            "<<:" => Operator::UnaryDominates,
            "<," => Operator::FirstChild,
            "<-" => Operator::LastChild,
            "$.." => Operator::SisterPrecedes,
            "$+" => Operator::ImmediateSisterPrecedes,
            "$,," => Operator::SisterFollows,
            "$-" => Operator::ImmediateSisterFollows,
            "<+" if self.rest()[glyph_len..].starts_with('(') => {
                self.pos += glyph_len + 1;
                let labels = self.label_alternatives()?;
                self.expect(')')?;
                return Ok(Operator::ChainDominates(labels));
            }
            _ => {
                return Err(PatternError::UnknownOperator {
                    glyph: glyph.to_owned(),
                    position: start,
                })
            }
        };
        self.pos += glyph_len;
        Ok(op)
    }

    fn atom(&mut self) -> &str {
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| c.is_whitespace() || "()|=@!".contains(c))
            .unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..self.pos]
    }

    fn label_alternatives(&mut self) -> Result<LabelMatcher, PatternError> {
        self.skip_ws();
        let mut alts = Vec::new();
        loop {
            let at = self.pos;
            let a = self.atom().to_owned();
            if a.is_empty() {
                self.pos = at;
                return Err(self.syntax("expected a label"));
            }
            if a == "__" {
                if !alts.is_empty() {
                    return Err(self.syntax("`__` cannot be part of an alternation"));
                }
                return Ok(LabelMatcher::Any);
            }
            alts.push(a);
            if self.peek() == Some('|') {
                self.bump();
            } else {
                break;
            }
        }
        Ok(LabelMatcher::OneOf(alts))
    }

    fn label_spec(&mut self, in_negation: bool) -> Result<PatternNode, PatternError> {
        self.skip_ws();
        let negated = if self.peek() == Some('!') {
            self.bump();
            true
        } else {
            false
        };
        let category = self.label_alternatives()?;
        let mut words = None;
        if self.peek() == Some('@') {
            self.bump();
            let mut ws = Vec::new();
            loop {
                let w = self.atom().to_lowercase();
                if w.is_empty() {
                    return Err(self.syntax("expected a word after `@`"));
                }
                ws.push(w);
                if self.peek() == Some('|') {
                    self.bump();
                } else {
                    break;
                }
            }
            words = Some(ws);
        }
        let mut captures = Vec::new();
        while self.peek() == Some('=') {
            let at = self.pos;
            self.bump();
            let start = self.pos;
            while self
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                self.bump();
            }
            let name = &self.src[start..self.pos];
            if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
                self.pos = at;
                return Err(self.syntax("expected a capture name"));
            }
            if negated || in_negation {
                self.pos = at;
                return Err(self.syntax("captures are not allowed on negated nodes"));
            }
            if !self.captures.insert(name.to_owned()) {
                return Err(PatternError::DuplicateCapture(name.to_owned()));
            }
            captures.push(name.to_owned());
        }
        Ok(PatternNode {
            category,
            words,
            negated,
            captures,
            relations: Vec::new(),
        })
    }
}
