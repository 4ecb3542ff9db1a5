//! Recursive splitting of a sentence into a linked proposition tree.

use thiserror::Error;

use crate::lpt::{ClauseType, Constituency, LinkedPropositionTree, LptNode, Proposition};
use crate::relation::{ClassifyHints, CueTable, RhetoricalRelation};
use crate::rules::{apply_with_origins, RuleFile, SplitOutcome};
use crate::tree::ParseTree;

pub const DEFAULT_BUDGET: usize = 1000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("more than {0} rule applications for one sentence")]
    RecursionBudgetExceeded(usize),
}

/// One rule application, recorded for inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub outcome: SplitOutcome,
    pub relation: RhetoricalRelation,
    /// Token count of the sentence the rule split.
    pub source_len: usize,
    /// Original-sentence position of each token of the split sentence.
    pub source_origins: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub applications: Vec<Application>,
    /// Source positions of each leaf's tokens, in leaf order.
    pub leaf_origins: Vec<Vec<Option<usize>>>,
}

struct Run<'a> {
    rules: &'a RuleFile,
    cues: &'a CueTable,
    budget: usize,
    used: usize,
    trace: Trace,
}

impl Run<'_> {
    fn expand(
        &mut self,
        tree: ParseTree,
        origins: Vec<Option<usize>>,
    ) -> Result<LptNode, TransformError> {
        for rule in &self.rules.rules {
            let out = match apply_with_origins(rule, &tree, &origins) {
                Ok(Some(out)) => out,
                Ok(None) => continue,
                Err(e) => {
                    log::debug!("{e}");
                    continue;
                }
            };
            self.used += 1;
            if self.used > self.budget {
                return Err(TransformError::RecursionBudgetExceeded(self.budget));
            }
            let hints = ClassifyHints {
                attribution_verb_lemma: out.verb_lemma.clone(),
                has_location_entity: false,
            };
            let mut relation = self.cues.classify(out.cue_phrase.as_deref(), &hints);
            if relation == RhetoricalRelation::Unknown {
                relation = rule.default_relation.unwrap_or(relation);
            }
            log::debug!("rule {} applied, {relation}", rule.id);
            self.trace.applications.push(Application {
                outcome: out.clone(),
                relation,
                source_len: tree.len(),
                source_origins: origins.clone(),
            });
            let [a, b] = out.ordered();
            let (a, b) = (a.clone(), b.clone());
            let left = self.expand(a.tree, a.origins)?;
            let right = self.expand(b.tree, b.origins)?;
            return Ok(LptNode::relation(
                relation,
                (a.label, left),
                (b.label, right),
            ));
        }
        self.trace.leaf_origins.push(origins);
        let clause_type = classify_clause_type(&tree);
        Ok(LptNode::Leaf(Proposition::new(tree, clause_type)))
    }
}

/// Splits `sentence` until no rule applies, with the default budget.
pub fn transform(
    sentence: &ParseTree,
    rules: &RuleFile,
    cues: &CueTable,
) -> Result<LinkedPropositionTree, TransformError> {
    transform_traced(sentence, rules, cues, DEFAULT_BUDGET).map(|(t, _)| t)
}

/// As [`transform`], also returning every rule application.
pub fn transform_traced(
    sentence: &ParseTree,
    rules: &RuleFile,
    cues: &CueTable,
    budget: usize,
) -> Result<(LinkedPropositionTree, Trace), TransformError> {
    let mut run = Run {
        rules,
        cues,
        budget,
        used: 0,
        trace: Trace {
            applications: Vec::new(),
            leaf_origins: Vec::new(),
        },
    };
    let origins = (0..sentence.len()).map(Some).collect();
    let root = run.expand(sentence.clone(), origins)?;
    Ok((
        LinkedPropositionTree {
            root,
            source: sentence.yield_text(),
        },
        run.trace,
    ))
}

const COPULAS: &[&str] = &[
    "be", "is", "are", "was", "were", "been", "being", "am", "'s", "'re", "'m", "become",
    "becomes", "became", "seem", "seems", "seemed",
];
const DIRECTION_VERBS: &[&str] = &[
    "put", "puts", "placed", "place", "places", "sent", "send", "sends", "moved", "move", "moves",
    "brought", "bring", "brings", "took", "take", "takes", "laid", "lay", "set", "sets", "threw",
    "throw", "drove", "drive", "led", "lead", "leads",
];
const POSITION_VERBS: &[&str] = &[
    "live", "lives", "lived", "stay", "stays", "stayed", "lie", "lies", "lay", "sit", "sits",
    "sat", "stand", "stands", "stood", "remain", "remains", "remained", "reside", "resides",
    "resided", "went", "go", "goes", "came", "come", "comes", "moved",
];

fn content_children(t: &ParseTree) -> Vec<&ParseTree> {
    t.children()
        .iter()
        .filter(|c| !matches!(c.category(), "," | ":" | "." | "``" | "''"))
        .collect()
}

/// Clause type of a simple sentence, read off its constituents. `None`
/// when the tree is not a single clause.
pub fn classify_clause_type(tree: &ParseTree) -> Option<ClauseType> {
    let mut s = tree;
    while matches!(s.category(), "ROOT") {
        let kids = content_children(s);
        if kids.len() != 1 {
            return None;
        }
        s = kids[0];
    }
    if s.category() != "S" {
        return None;
    }
    let kids = content_children(s);
    let nps = kids.iter().filter(|k| k.category() == "NP").count();
    let vps: Vec<_> = kids.iter().filter(|k| k.category() == "VP").collect();
    if nps == 0
        || vps.len() != 1
        || kids
            .iter()
            .any(|k| matches!(k.category(), "S" | "SBAR" | "SINV"))
    {
        return None;
    }
    let mut vp = *vps[0];
    while let Some(inner) = vp.children().iter().rev().find(|c| c.category() == "VP") {
        if vp.children().iter().any(|c| c.category() == "CC") {
            return None;
        }
        vp = inner;
    }
    let verb = vp
        .children()
        .iter()
        .find(|c| c.category().starts_with("VB"))?
        .token()?
        .to_lowercase();
    let after: Vec<&str> = vp
        .children()
        .iter()
        .skip_while(|c| !c.category().starts_with("VB"))
        .skip(1)
        .map(ParseTree::category)
        .collect();
    let has = |c: &str| after.contains(&c);
    let objects = after.iter().filter(|c| **c == "NP").count();
    let ty = if COPULAS.contains(&verb.as_str()) {
        if has("ADJP") || has("NP") {
            ClauseType::SVC
        } else if has("PP") || has("ADVP") {
            ClauseType::SVA
        } else {
            ClauseType::SV
        }
    } else if objects >= 2 {
        ClauseType::SVOO
    } else if objects == 1 && has("ADJP") {
        ClauseType::SVOC
    } else if objects == 1 && has("PP") && DIRECTION_VERBS.contains(&verb.as_str()) {
        ClauseType::SVOA
    } else if objects == 1 || has("S") || has("SBAR") {
        ClauseType::SVO
    } else if (has("PP") || has("ADVP")) && POSITION_VERBS.contains(&verb.as_str()) {
        ClauseType::SVA
    } else {
        ClauseType::SV
    };
    Some(ty)
}

/// Edge label pairs of every relation node, in pre-order.
pub fn edge_labels(lpt: &LinkedPropositionTree) -> Vec<(Constituency, Constituency)> {
    fn go(n: &LptNode, out: &mut Vec<(Constituency, Constituency)>) {
        if let LptNode::Relation { left, right, .. } = n {
            out.push((left.0, right.0));
            go(&left.1, out);
            go(&right.1, out);
        }
    }
    let mut out = Vec::new();
    go(&lpt.root, &mut out);
    out
}
