use std::collections::BTreeSet;

use thiserror::Error;

use crate::lpt::Constituency;
use crate::pattern::{find_all, MatchResult};
use crate::relation::verb_lemma;
use crate::tree::{NodePath, ParseTree, TokenSpan};

use super::template::{RNode, Scope};
use super::{is_delete, CueSource, Hierarchy, Rule};

/// One half of a split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Side {
    pub tree: ParseTree,
    pub tokens: Vec<String>,
    /// Source sentence position of each token; `None` for inserted words.
    pub origins: Vec<Option<usize>>,
    pub label: Constituency,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitOutcome {
    pub rule_id: String,
    pub extracted: Side,
    pub remainder: Side,
    /// Lowercased cue phrase, if the rule names one.
    pub cue_phrase: Option<Vec<String>>,
    /// Lemma of the `verb` capture.
    pub verb_lemma: Option<String>,
    /// Whether the extracted sentence comes first in source order.
    pub extracted_first: bool,
    /// Source positions inside `delete*` and `cue` captures.
    pub dropped: BTreeSet<usize>,
    /// Source positions inside the `extract` capture.
    pub extract_positions: BTreeSet<usize>,
}

impl SplitOutcome {
    /// The two sides in source order.
    pub fn ordered(&self) -> [&Side; 2] {
        if self.extracted_first {
            [&self.extracted, &self.remainder]
        } else {
            [&self.remainder, &self.extracted]
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("rule {rule_id} could not rephrase: {reason}")]
pub struct RephraseFailure {
    pub rule_id: String,
    pub reason: String,
}

/// Applies `rule` to a sentence tree. Matches are tried in order; the first
/// that rephrases cleanly wins. `Ok(None)` means the pattern did not match.
pub fn apply_rule(rule: &Rule, leaf: &ParseTree) -> Result<Option<SplitOutcome>, RephraseFailure> {
    let origins: Vec<Option<usize>> = (0..leaf.len()).map(Some).collect();
    apply_with_origins(rule, leaf, &origins)
}

pub(crate) fn apply_with_origins(
    rule: &Rule,
    leaf: &ParseTree,
    origins: &[Option<usize>],
) -> Result<Option<SplitOutcome>, RephraseFailure> {
    let matches = find_all(&rule.pattern, leaf);
    if matches.is_empty() {
        return Ok(None);
    }
    let source = lowered_first(RNode::from_tree(leaf, origins), leaf);
    let mut last = String::new();
    for m in &matches {
        match split(rule, leaf, origins, &source, m) {
            Ok(out) => return Ok(Some(out)),
            Err(reason) => {
                log::debug!("rule {} skipped a match: {reason}", rule.id);
                last = reason;
            }
        }
    }
    Err(RephraseFailure {
        rule_id: rule.id.clone(),
        reason: last,
    })
}

/// Sentence-initial capitals are dropped unless the word is a name or "I".
fn lowered_first(mut source: RNode, leaf: &ParseTree) -> RNode {
    let Some(first) = leaf.leaves().first().copied() else {
        return source;
    };
    if matches!(first.label(), "NNP" | "NNPS") || first.token() == Some("I") {
        return source;
    }
    let mut path = Vec::new();
    let mut cur = leaf;
    while !cur.is_leaf() {
        path.push(0);
        cur = &cur.children()[0];
    }
    fn lower(n: &mut RNode, path: &[usize]) {
        match (n, path.split_first()) {
            (RNode::Leaf { word, .. }, None) => *word = word.to_lowercase(),
            (RNode::Inner { kids, .. }, Some((&i, rest))) => {
                if let Some(k) = kids.get_mut(i) {
                    lower(k, rest);
                }
            }
            _ => {}
        }
    }
    lower(&mut source, &path);
    source
}

fn is_comma(t: &ParseTree) -> bool {
    matches!(t.category(), "," | ":")
}

fn is_final(t: &ParseTree) -> bool {
    t.category() == "."
}

/// Removal set for `targets`, widened with the punctuation and conjunctions
/// that would otherwise be left dangling.
pub(crate) fn absorb(tree: &ParseTree, targets: &[NodePath]) -> Vec<NodePath> {
    let mut out: Vec<NodePath> = Vec::new();
    let outer: Vec<&NodePath> = targets
        .iter()
        .filter(|p| {
            !targets
                .iter()
                .any(|q| q.len() < p.len() && p.starts_with(q))
        })
        .collect();
    for p in outer {
        out.push(p.clone());
        let Some((&i, parent_path)) = p.split_last() else {
            continue;
        };
        let Some(parent) = tree.get(parent_path) else {
            continue;
        };
        let kids = parent.children();
        let at = |j: usize| {
            let mut q = parent_path.to_vec();
            q.push(j);
            q
        };
        let left_comma = i > 0 && is_comma(&kids[i - 1]);
        let right_comma = kids.get(i + 1).is_some_and(is_comma);
        let first = kids[..i].iter().all(|k| is_comma(k) || is_final(k));
        let last = kids[i + 1..].iter().all(is_final);
        let joiner = |k: &ParseTree| is_comma(k) || k.category() == "CC";
        if left_comma && right_comma {
            out.push(at(i - 1));
            out.push(at(i + 1));
        } else if first {
            let mut j = i + 1;
            while j < kids.len() && joiner(&kids[j]) {
                out.push(at(j));
                j += 1;
            }
        } else if last {
            let mut j = i;
            while j > 0 && joiner(&kids[j - 1]) {
                out.push(at(j - 1));
                j -= 1;
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn positions(span: TokenSpan, origins: &[Option<usize>]) -> impl Iterator<Item = usize> + '_ {
    (span.start..span.end).filter_map(move |i| origins.get(i).copied().flatten())
}

fn side(tree: ParseTree, origins: Vec<Option<usize>>, label: Constituency) -> Side {
    Side {
        tokens: tree.yield_text(),
        tree,
        origins,
        label,
    }
}

fn split(
    rule: &Rule,
    leaf: &ParseTree,
    origins: &[Option<usize>],
    source: &RNode,
    m: &MatchResult<'_>,
) -> Result<SplitOutcome, String> {
    let extract = m.get("extract").ok_or("pattern bound no `extract`")?;
    let mut targets = vec![extract.path.clone()];
    targets.extend(
        m.bindings
            .iter()
            .filter(|(k, _)| is_delete(k))
            .map(|(_, b)| b.path.clone()),
    );
    let removed = absorb(leaf, &targets);
    let scope = Scope {
        source,
        m,
        removed: &removed,
    };
    let (etree, eorig) = scope.realize(&rule.extract_rephrase)?;
    let (rtree, rorig) = scope.realize(&rule.remainder_rephrase)?;

    // Both sides must keep fewer of the original sentence's tokens than
    // the source did, so repeated splitting always ends.
    let n = leaf.len();
    let kept = |o: &[Option<usize>]| o.iter().filter(|x| x.is_some()).count();
    let source_kept = kept(origins);
    if rtree.len() >= n {
        return Err("remainder is not shorter than the source".into());
    }
    if kept(&eorig) >= source_kept {
        return Err("extracted sentence keeps every source token".into());
    }
    if kept(&rorig) >= source_kept {
        return Err("remainder keeps every source token".into());
    }

    let espan = extract.node.span();
    let (elabel, rlabel) = match rule.hierarchy {
        Hierarchy::Coordinate => (Constituency::Core, Constituency::Core),
        Hierarchy::Subordinate => {
            let ctx = m.get("context").ok_or("pattern bound no `context`")?;
            if ctx.node.span().overlaps(&espan) {
                (Constituency::Context, Constituency::Core)
            } else {
                (Constituency::Core, Constituency::Context)
            }
        }
    };

    let cue_phrase = match &rule.cue_source {
        CueSource::None => None,
        CueSource::FixedPhrase(p) => Some(p.clone()),
        CueSource::FromCapture => {
            let cue = m.get("cue").ok_or("pattern bound no `cue`")?;
            let cspan = cue.node.span();
            let inner = cspan.contains(&espan) && cspan != espan;
            let words: Vec<String> = source
                .at(&cue.path)
                .map(leaf_words)
                .unwrap_or_default()
                .into_iter()
                .zip(cspan.start..cspan.end)
                .filter(|(_, i)| !(inner && espan.start <= *i && *i < espan.end))
                .map(|(w, _)| w.to_lowercase())
                .collect();
            (!words.is_empty()).then_some(words)
        }
    };

    let verb_lemma = m
        .get("verb")
        .and_then(|b| b.node.tokens().first().map(|w| verb_lemma(w)));

    let extracted_first = match rule.hierarchy {
        Hierarchy::Coordinate => true,
        Hierarchy::Subordinate => {
            let covered = |i: usize| {
                removed
                    .iter()
                    .filter_map(|p| leaf.get(p))
                    .any(|t| t.span().start <= i && i < t.span().end)
            };
            let first_kept = (0..n).find(|&i| !covered(i)).unwrap_or(n);
            espan.start < first_kept
        }
    };

    let mut dropped = BTreeSet::new();
    for (k, b) in &m.bindings {
        if is_delete(k) || k == "cue" {
            dropped.extend(positions(b.node.span(), origins));
        }
    }

    Ok(SplitOutcome {
        rule_id: rule.id.clone(),
        extracted: side(etree, eorig, elabel),
        remainder: side(rtree, rorig, rlabel),
        cue_phrase,
        verb_lemma,
        extracted_first,
        dropped,
        extract_positions: positions(espan, origins).collect(),
    })
}

fn leaf_words(n: &RNode) -> Vec<String> {
    match n {
        RNode::Leaf { word, .. } => vec![word.clone()],
        RNode::Inner { kids, .. } => kids.iter().flat_map(leaf_words).collect(),
    }
}
