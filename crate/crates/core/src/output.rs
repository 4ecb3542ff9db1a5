//! Output formats for linked proposition trees.
//!
//! * `tree`: an indented outline, one node per line, with edge labels.
//! * `flat`: one line per proposition with its context layer and links.
//! * `structured`: JSON Lines, one document per sentence, versioned by
//!   `schema_version`. Reading it back gives the same tree.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lpt::{ClauseType, Constituency, LinkedPropositionTree, LptNode, Proposition};
use crate::relation::RhetoricalRelation;
use crate::tree::{parse_bracketed, ParseTree};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tree,
    Flat,
    Structured,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tree" => Ok(Format::Tree),
            "flat" => Ok(Format::Flat),
            "structured" => Ok(Format::Structured),
            _ => Err(format!(
                "unknown format `{s}` (expected tree, flat or structured)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> ReadError {
    ReadError::Syntax {
        line,
        message: message.into(),
    }
}

/// One input sentence's result: a tree, or the reason there is none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceResult {
    pub id: String,
    pub outcome: Result<LinkedPropositionTree, String>,
}

/// Renders `results` in `format`. Each result ends with a newline.
pub fn render(format: Format, results: &[SentenceResult]) -> String {
    let mut out = String::new();
    for r in results {
        match format {
            Format::Tree => write_tree(&mut out, r),
            Format::Flat => write_flat(&mut out, r),
            Format::Structured => {
                out.push_str(&to_structured(r));
                out.push('\n');
            }
        }
    }
    out
}

fn leaf_line(p: &Proposition) -> String {
    match p.clause_type {
        Some(ct) => format!("{} [{ct}]", p.sentence()),
        None => p.sentence(),
    }
}

fn write_tree(out: &mut String, r: &SentenceResult) {
    let lpt = match &r.outcome {
        Ok(lpt) => lpt,
        Err(e) => {
            let _ = writeln!(out, "# {}\terror: {e}", r.id);
            return;
        }
    };
    let _ = writeln!(out, "# {}\t{}", r.id, lpt.source.join(" "));
    fn go(out: &mut String, n: &LptNode, depth: usize, label: Option<Constituency>) {
        let pad = "  ".repeat(depth);
        let prefix = label.map(|l| format!("{l}: ")).unwrap_or_default();
        match n {
            LptNode::Leaf(p) => {
                let _ = writeln!(out, "{pad}{prefix}{}", leaf_line(p));
            }
            LptNode::Relation {
                relation,
                left,
                right,
            } => {
                let _ = writeln!(out, "{pad}{prefix}{relation}");
                go(out, &left.1, depth + 1, Some(left.0));
                go(out, &right.1, depth + 1, Some(right.0));
            }
        }
    }
    go(out, &lpt.root, 0, None);
}

/// A placeholder parse for a proposition read back from text.
fn flat_parse(tokens: &[String]) -> ParseTree {
    let leaves = tokens
        .iter()
        .map(|t| ParseTree::leaf("X", t.clone()))
        .collect();
    let s = ParseTree::node("S", leaves).expect("tokens are nonempty");
    ParseTree::node("ROOT", vec![s]).expect("one child")
}

/// Reads the `tree` format. Leaf parses are not part of the format, so
/// each proposition gets a flat `(ROOT (S (X w) ...))` parse.
pub fn read_tree_format(text: &str) -> Result<Vec<SentenceResult>, ReadError> {
    struct Line<'a> {
        no: usize,
        depth: usize,
        label: Option<Constituency>,
        body: &'a str,
    }
    let mut out = Vec::new();
    let mut header: Option<(usize, String, Result<Vec<String>, String>)> = None;
    let mut lines: Vec<Line> = Vec::new();

    fn build(lines: &[Line], pos: &mut usize, depth: usize) -> Result<LptNode, ReadError> {
        let l = lines
            .get(*pos)
            .ok_or_else(|| syntax(0, "unexpected end of tree"))?;
        if l.depth != depth {
            return Err(syntax(l.no, format!("expected indentation level {depth}")));
        }
        *pos += 1;
        if let Ok(rel) = RhetoricalRelation::from_str(l.body) {
            let mut kids = Vec::new();
            for _ in 0..2 {
                let no = lines.get(*pos).map_or(l.no, |c| c.no);
                let label = lines
                    .get(*pos)
                    .and_then(|c| c.label)
                    .ok_or_else(|| syntax(no, "relation child needs a core/context label"))?;
                kids.push((label, build(lines, pos, depth + 1)?));
            }
            let right = kids.pop().expect("two children");
            let left = kids.pop().expect("two children");
            return Ok(LptNode::relation(rel, left, right));
        }
        let (text, clause_type) = match l.body.rsplit_once(" [") {
            Some((t, ct)) if ct.ends_with(']') => {
                let ct = ClauseType::from_str(&ct[..ct.len() - 1]).map_err(|m| syntax(l.no, m))?;
                (t, Some(ct))
            }
            _ => (l.body, None),
        };
        let tokens: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
        if tokens.is_empty() {
            return Err(syntax(l.no, "empty proposition"));
        }
        Ok(LptNode::Leaf(Proposition::new(
            flat_parse(&tokens),
            clause_type,
        )))
    }

    let mut finish = |header: Option<(usize, String, Result<Vec<String>, String>)>,
                      lines: &mut Vec<Line>|
     -> Result<(), ReadError> {
        let Some((no, id, src)) = header else {
            if let Some(l) = lines.first() {
                return Err(syntax(l.no, "tree before the `# id` header"));
            }
            return Ok(());
        };
        let outcome = match src {
            Err(e) => {
                if let Some(l) = lines.first() {
                    return Err(syntax(l.no, "error record has a tree"));
                }
                Err(e)
            }
            Ok(source) => {
                let mut pos = 0;
                if lines.is_empty() {
                    return Err(syntax(no, "sentence has no tree"));
                }
                let root = build(lines, &mut pos, 0)?;
                if let Some(extra) = lines.get(pos) {
                    return Err(syntax(extra.no, "trailing lines after the tree"));
                }
                Ok(LinkedPropositionTree { root, source })
            }
        };
        lines.clear();
        out.push(SentenceResult { id, outcome });
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if let Some(rest) = raw.strip_prefix("# ") {
            finish(header.take(), &mut lines)?;
            let (id, tail) = rest.split_once('\t').unwrap_or((rest, ""));
            let src = match tail.strip_prefix("error: ") {
                Some(e) => Err(e.to_owned()),
                None => Ok(tail.split_whitespace().map(str::to_owned).collect()),
            };
            header = Some((no, id.to_owned(), src));
            continue;
        }
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        if indent % 2 != 0 {
            return Err(syntax(no, "indentation must be a multiple of two spaces"));
        }
        let body = raw.trim();
        let (label, body) = match body.split_once(": ") {
            Some((l, b)) if l == "core" || l == "context" => (Some(l.parse().expect("checked")), b),
            _ => (None, body),
        };
        lines.push(Line {
            no,
            depth: indent / 2,
            label,
            body,
        });
    }
    finish(header.take(), &mut lines)?;
    Ok(out)
}

/// Direction of a flat-format link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    #[serde(rename = "core→context")]
    CoreToContext,
    #[serde(rename = "core↔core")]
    CoreCore,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::CoreToContext => "core→context",
            Direction::CoreCore => "core↔core",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatLink {
    pub relation: RhetoricalRelation,
    /// 1-based proposition id.
    pub target: usize,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatOutputRecord {
    /// 1-based, in left-to-right leaf order.
    pub prop_id: usize,
    pub context_layer: usize,
    pub text: String,
    pub links: Vec<FlatLink>,
}

/// Flat records of a tree. Each relation links the head propositions of
/// its two sides (reached by following core edges, leftmost first), and
/// the link is listed on both of them.
pub fn flat_records(lpt: &LinkedPropositionTree) -> Vec<FlatOutputRecord> {
    let layers = lpt.context_layers();
    let mut records: Vec<FlatOutputRecord> = lpt
        .leaves_in_order()
        .iter()
        .zip(&layers)
        .enumerate()
        .map(|(i, (p, &layer))| FlatOutputRecord {
            prop_id: i + 1,
            context_layer: layer,
            text: p.sentence(),
            links: Vec::new(),
        })
        .collect();

    fn count(n: &LptNode) -> usize {
        match n {
            LptNode::Leaf(_) => 1,
            LptNode::Relation { left, right, .. } => count(&left.1) + count(&right.1),
        }
    }
    // Returns the head leaf of `n`, whose first leaf has index `base`.
    fn go(n: &LptNode, base: usize, records: &mut [FlatOutputRecord]) -> usize {
        match n {
            LptNode::Leaf(_) => base,
            LptNode::Relation {
                relation,
                left,
                right,
            } => {
                let lh = go(&left.1, base, records);
                let rh = go(&right.1, base + count(&left.1), records);
                let direction = if left.0 == right.0 {
                    Direction::CoreCore
                } else {
                    Direction::CoreToContext
                };
                records[lh].links.push(FlatLink {
                    relation: *relation,
                    target: rh + 1,
                    direction,
                });
                records[rh].links.push(FlatLink {
                    relation: *relation,
                    target: lh + 1,
                    direction,
                });
                if right.0 == Constituency::Core && left.0 == Constituency::Context {
                    rh
                } else {
                    lh
                }
            }
        }
    }
    go(&lpt.root, 0, &mut records);
    records
}

fn write_flat(out: &mut String, r: &SentenceResult) {
    let lpt = match &r.outcome {
        Ok(lpt) => lpt,
        Err(e) => {
            let _ = writeln!(out, "# {}\terror: {e}", r.id);
            return;
        }
    };
    let _ = writeln!(out, "# {}\t{}", r.id, lpt.source.join(" "));
    for rec in flat_records(lpt) {
        let _ = write!(out, "#{}\t{}\t{}", rec.prop_id, rec.context_layer, rec.text);
        for l in &rec.links {
            let _ = write!(out, "\tL:{} #{} {}", l.relation, l.target, l.direction);
        }
        out.push('\n');
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum NodeType {
    Relation,
    Proposition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    node_type: NodeType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Constituency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relation: Option<RhetoricalRelation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clause_type: Option<ClauseType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parse: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceDoc {
    schema_version: u32,
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<NodeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn node_doc(n: &LptNode, label: Option<Constituency>) -> NodeDoc {
    match n {
        LptNode::Leaf(p) => NodeDoc {
            node_type: NodeType::Proposition,
            label,
            relation: None,
            text: Some(p.sentence()),
            tokens: Some(p.text.clone()),
            clause_type: p.clause_type,
            parse: Some(p.tree.serialize()),
            children: Vec::new(),
        },
        LptNode::Relation {
            relation,
            left,
            right,
        } => NodeDoc {
            node_type: NodeType::Relation,
            label,
            relation: Some(*relation),
            text: None,
            tokens: None,
            clause_type: None,
            parse: None,
            children: vec![
                node_doc(&left.1, Some(left.0)),
                node_doc(&right.1, Some(right.0)),
            ],
        },
    }
}

/// One JSON line for `r`, without the trailing newline.
pub fn to_structured(r: &SentenceResult) -> String {
    let doc = match &r.outcome {
        Ok(lpt) => SentenceDoc {
            schema_version: SCHEMA_VERSION,
            id: r.id.clone(),
            source: Some(lpt.source.clone()),
            root: Some(node_doc(&lpt.root, None)),
            error: None,
        },
        Err(e) => SentenceDoc {
            schema_version: SCHEMA_VERSION,
            id: r.id.clone(),
            source: None,
            root: None,
            error: Some(e.clone()),
        },
    };
    serde_json::to_string(&doc).expect("documents serialize")
}

fn from_doc(d: NodeDoc, line: usize) -> Result<LptNode, ReadError> {
    match d.node_type {
        NodeType::Proposition => {
            let parse = d
                .parse
                .ok_or_else(|| syntax(line, "proposition without `parse`"))?;
            let tree = parse_bracketed(&parse).map_err(|e| syntax(line, e.to_string()))?;
            let p = Proposition::new(tree, d.clause_type);
            if let Some(tokens) = d.tokens {
                if tokens != p.text {
                    return Err(syntax(line, "`tokens` disagree with `parse`"));
                }
            }
            if let Some(text) = d.text {
                if text != p.sentence() {
                    return Err(syntax(line, "`text` disagrees with `parse`"));
                }
            }
            Ok(LptNode::Leaf(p))
        }
        NodeType::Relation => {
            let rel = d
                .relation
                .ok_or_else(|| syntax(line, "relation node without `relation`"))?;
            let mut kids = d.children.into_iter();
            let (Some(l), Some(r), None) = (kids.next(), kids.next(), kids.next()) else {
                return Err(syntax(line, "relation node must have exactly two children"));
            };
            let (Some(ll), Some(rl)) = (l.label, r.label) else {
                return Err(syntax(line, "relation children need a `label`"));
            };
            Ok(LptNode::relation(
                rel,
                (ll, from_doc(l, line)?),
                (rl, from_doc(r, line)?),
            ))
        }
    }
}

/// Reads the `structured` format. Blank lines are skipped.
pub fn read_structured(text: &str) -> Result<Vec<SentenceResult>, ReadError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let doc: SentenceDoc =
            serde_json::from_str(raw).map_err(|e| syntax(line, e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(syntax(
                line,
                format!("unsupported schema_version {}", doc.schema_version),
            ));
        }
        let outcome = match (doc.root, doc.error) {
            (Some(root), None) => Ok(LinkedPropositionTree {
                root: from_doc(root, line)?,
                source: doc.source.unwrap_or_default(),
            }),
            (None, Some(e)) => Err(e),
            _ => return Err(syntax(line, "need exactly one of `root` and `error`")),
        };
        out.push(SentenceResult {
            id: doc.id,
            outcome,
        });
    }
    Ok(out)
}
