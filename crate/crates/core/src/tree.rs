//! Immutable constituency trees and the bracketed (Penn Treebank style) codec.
//!
//! Leaves are pre-terminals: a node carries a token iff it has no children.
//! Every node knows the half-open token interval it covers, so a subtree can
//! always be related back to positions in the sentence it was taken from.

use std::fmt;

use thiserror::Error;

/// Half-open token interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Self {
        TokenSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn contains(&self, other: &TokenSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &TokenSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// True if this span ends at or before `other` starts.
    pub fn precedes(&self, other: &TokenSpan) -> bool {
        self.end <= other.start
    }
}

impl fmt::Display for TokenSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// Child-index path from a tree's root to one of its nodes. The root is `[]`.
pub type NodePath = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("unbalanced brackets at byte {position}")]
    UnbalancedBrackets { position: usize },
    #[error("empty tree")]
    EmptyTree,
    #[error("node at byte {position} has both a token and children")]
    LeafWithChildren { position: usize },
    #[error("missing label at byte {position}")]
    MissingLabel { position: usize },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<TreeError>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    label: String,
    children: Vec<ParseTree>,
    token: Option<String>,
    span: TokenSpan,
}

impl ParseTree {
    /// A pre-terminal covering the single token at position 0.
    pub fn leaf(label: impl Into<String>, token: impl Into<String>) -> Self {
        ParseTree {
            label: label.into(),
            children: Vec::new(),
            token: Some(token.into()),
            span: TokenSpan::new(0, 1),
        }
    }

    /// An internal node. Child spans are renumbered so the new tree starts at
    /// token 0. Returns `None` when `children` is empty.
    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Option<Self> {
        if children.is_empty() {
            return None;
        }
        let mut t = ParseTree {
            label: label.into(),
            children,
            token: None,
            span: TokenSpan::new(0, 0),
        };
        t.renumber(0);
        Some(t)
    }

    fn renumber(&mut self, start: usize) -> usize {
        if self.children.is_empty() {
            self.span = TokenSpan::new(start, start + 1);
            return start + 1;
        }
        let mut at = start;
        for c in &mut self.children {
            at = c.renumber(at);
        }
        self.span = TokenSpan::new(start, at);
        at
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Syntactic category used for matching: the label with functional tags
    /// (`NP-SBJ`, `NP=2`) stripped. Labels that start with `-` are kept whole.
    pub fn category(&self) -> &str {
        category_of(&self.label)
    }

    pub fn children(&self) -> &[ParseTree] {
        &self.children
    }

    pub fn token(&self) -> Option<&str> {
        self.token.as_deref()
    }

    pub fn span(&self) -> TokenSpan {
        self.span
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of tokens covered.
    pub fn len(&self) -> usize {
        self.span.len()
    }

    pub fn is_empty(&self) -> bool {
        self.span.is_empty()
    }

    /// Left-to-right leaf tokens.
    pub fn tokens(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.len());
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.token {
            Some(t) => out.push(t),
            None => self.children.iter().for_each(|c| c.collect_tokens(out)),
        }
    }

    /// Owned copy of [`ParseTree::tokens`].
    pub fn yield_text(&self) -> Vec<String> {
        self.tokens().into_iter().map(str::to_owned).collect()
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&ParseTree> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ParseTree>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            self.children.iter().for_each(|c| c.collect_leaves(out));
        }
    }

    pub fn get(&self, path: &[usize]) -> Option<&ParseTree> {
        let mut cur = self;
        for &i in path {
            cur = cur.children.get(i)?;
        }
        Some(cur)
    }

    /// All nodes with their paths, in pre-order.
    pub fn preorder(&self) -> Vec<(NodePath, &ParseTree)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk(&mut path, &mut out);
        out
    }

    fn walk<'a>(&'a self, path: &mut NodePath, out: &mut Vec<(NodePath, &'a ParseTree)>) {
        out.push((path.clone(), self));
        for (i, c) in self.children.iter().enumerate() {
            path.push(i);
            c.walk(path, out);
            path.pop();
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ParseTree::size).sum::<usize>()
    }

    /// A copy with the subtrees at `paths` removed. Internal nodes left
    /// without children are removed too. `None` if nothing remains.
    pub fn without(&self, paths: &[NodePath]) -> Option<ParseTree> {
        let mut t = self.prune(&mut Vec::new(), paths)?;
        t.renumber(0);
        Some(t)
    }

    fn prune(&self, path: &mut NodePath, drop: &[NodePath]) -> Option<ParseTree> {
        if drop.iter().any(|p| p == path) {
            return None;
        }
        if self.is_leaf() {
            return Some(self.clone());
        }
        let mut children = Vec::with_capacity(self.children.len());
        for (i, c) in self.children.iter().enumerate() {
            path.push(i);
            if let Some(k) = c.prune(path, drop) {
                children.push(k);
            }
            path.pop();
        }
        if children.is_empty() {
            return None;
        }
        Some(ParseTree {
            label: self.label.clone(),
            children,
            token: None,
            span: self.span,
        })
    }

    /// A copy with the node at `path` replaced by `replacement`.
    pub fn replace(&self, path: &[usize], replacement: ParseTree) -> ParseTree {
        let mut t = self.replaced(path, replacement);
        t.renumber(0);
        t
    }

    fn replaced(&self, path: &[usize], replacement: ParseTree) -> ParseTree {
        match path.split_first() {
            None => replacement,
            Some((&i, rest)) => {
                let mut t = self.clone();
                if let Some(c) = t.children.get(i) {
                    t.children[i] = c.replaced(rest, replacement);
                }
                t
            }
        }
    }

    /// A copy with the label of this node changed.
    pub fn relabeled(&self, label: impl Into<String>) -> ParseTree {
        let mut t = self.clone();
        t.label = label.into();
        t
    }

    /// A copy renumbered so that its first token is at position 0.
    pub fn detached(&self) -> ParseTree {
        let mut t = self.clone();
        t.renumber(0);
        t
    }

    /// Canonical single-line bracketed form.
    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        match &self.token {
            Some(t) => write!(f, " {}", escape_token(t))?,
            None => {
                for c in &self.children {
                    write!(f, " {c}")?;
                }
            }
        }
        write!(f, ")")
    }
}

pub fn category_of(label: &str) -> &str {
    if label.starts_with('-') || label.is_empty() {
        return label;
    }
    match label.find(['-', '=']) {
        Some(i) => &label[..i],
        None => label,
    }
}

const ESCAPES: &[(&str, &str)] = &[
    ("-LRB-", "("),
    ("-RRB-", ")"),
    ("-LCB-", "{"),
    ("-RCB-", "}"),
];

fn escape_token(token: &str) -> &str {
    ESCAPES
        .iter()
        .find(|(_, raw)| *raw == token)
        .map(|(esc, _)| *esc)
        .unwrap_or(token)
}

fn unescape_token(token: &str) -> &str {
    ESCAPES
        .iter()
        .find(|(esc, _)| *esc == token)
        .map(|(_, raw)| *raw)
        .unwrap_or(token)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(text: &str) -> Vec<(usize, Lexeme<'_>)> {
    let mut out = Vec::new();
    let mut atom_start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        let delim = ch == '(' || ch == ')' || ch.is_whitespace();
        if delim {
            if let Some(s) = atom_start.take() {
                out.push((s, Lexeme::Atom(&text[s..i])));
            }
            match ch {
                '(' => out.push((i, Lexeme::Open)),
                ')' => out.push((i, Lexeme::Close)),
                _ => {}
            }
        } else if atom_start.is_none() {
            atom_start = Some(i);
        }
    }
    if let Some(s) = atom_start {
        out.push((s, Lexeme::Atom(&text[s..])));
    }
    out
}

struct Reader<'a> {
    lexemes: Vec<(usize, Lexeme<'a>)>,
    pos: usize,
    end: usize,
}

impl<'a> Reader<'a> {
    fn peek(&self) -> Option<(usize, Lexeme<'a>)> {
        self.lexemes.get(self.pos).copied()
    }

    fn here(&self) -> usize {
        self.peek().map(|(p, _)| p).unwrap_or(self.end)
    }

    // Returns Ok(None) for subtrees that vanish (empty elements).
    fn node(&mut self, top: bool) -> Result<Option<ParseTree>, TreeError> {
        let open_at = self.here();
        match self.peek() {
            Some((_, Lexeme::Open)) => self.pos += 1,
            _ => return Err(TreeError::UnbalancedBrackets { position: open_at }),
        }
        let label = match self.peek() {
            Some((_, Lexeme::Atom(a))) => {
                self.pos += 1;
                a.to_owned()
            }
            Some((_, Lexeme::Open)) if top => "ROOT".to_owned(),
            Some((_, Lexeme::Close)) => return Err(TreeError::EmptyTree),
            Some((p, _)) => return Err(TreeError::MissingLabel { position: p }),
            None => return Err(TreeError::UnbalancedBrackets { position: self.end }),
        };
        let mut children = Vec::new();
        let mut token = None;
        loop {
            match self.peek() {
                Some((_, Lexeme::Close)) => {
                    self.pos += 1;
                    break;
                }
                Some((p, Lexeme::Atom(a))) => {
                    if token.is_some() || !children.is_empty() {
                        return Err(TreeError::LeafWithChildren { position: p });
                    }
                    token = Some(unescape_token(a).to_owned());
                    self.pos += 1;
                }
                Some((p, Lexeme::Open)) => {
                    if token.is_some() {
                        return Err(TreeError::LeafWithChildren { position: p });
                    }
                    // empty elements come back as None and are dropped
                    if let Some(c) = self.node(false)? {
                        children.push(c);
                    }
                }
                None => return Err(TreeError::UnbalancedBrackets { position: self.end }),
            }
        }
        if label == "-NONE-" {
            return Ok(None);
        }
        match token {
            Some(t) => Ok(Some(ParseTree::leaf(label, t))),
            None if children.is_empty() => Ok(None),
            None => Ok(Some(ParseTree {
                label,
                children,
                token: None,
                span: TokenSpan::new(0, 0),
            })),
        }
    }
}

/// Parses one bracketed tree. Empty elements (`-NONE-`) are dropped and the
/// spans are assigned left to right from 0.
pub fn parse_bracketed(text: &str) -> Result<ParseTree, TreeError> {
    let lexemes = lex(text);
    if lexemes.is_empty() {
        return Err(TreeError::EmptyTree);
    }
    let mut r = Reader {
        lexemes,
        pos: 0,
        end: text.len(),
    };
    let tree = r.node(true)?;
    if let Some((p, _)) = r.peek() {
        return Err(TreeError::UnbalancedBrackets { position: p });
    }
    let mut tree = tree.ok_or(TreeError::EmptyTree)?;
    tree.renumber(0);
    Ok(tree)
}

/// Parses a batch: one tree per line. Blank lines and lines starting with
/// `#` are skipped. Errors carry the 1-based line number.
pub fn parse_lines(text: &str) -> Result<Vec<ParseTree>, TreeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let t = parse_bracketed(l).map_err(|e| TreeError::Line {
            line: i + 1,
            source: Box::new(e),
        })?;
        out.push(t);
    }
    Ok(out)
}
