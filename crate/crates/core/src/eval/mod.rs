//! Evaluation against discourse-annotated gold sentences: propositions are
//! aligned to gold EDUs by string similarity, then context layers are
//! checked against nuclearity and relations against gold relation classes.

mod gold;
mod similarity;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::ser::SerializeStruct;
use serde::Serialize;
use thiserror::Error;

use crate::lpt::LinkedPropositionTree;
use crate::relation::RhetoricalRelation;

pub use gold::{
    load_gold, load_grouping, parse_gold, parse_grouping, GoldLink, GoldSentence, Grouping,
    Nuclearity,
};
pub use similarity::{matching_blocks, normalize, raw_similarity, similarity};

pub const DEFAULT_THRESHOLD: f64 = 0.65;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("relation `{0}` is not in the grouping map")]
    UnmappedRelation(String),
    #[error("no gold link has aligned propositions on both sides")]
    NoScorablePairs,
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A proposition (leaf-order index) matched to a gold EDU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignedPair {
    pub prop: usize,
    pub edu: usize,
    pub score: f64,
}

/// Greedy one-to-one alignment of proposition texts to EDU texts. Pairs
/// scoring at least `threshold` are taken by descending score, ties going
/// to the lower proposition index, then the lower EDU index.
pub fn align_texts(
    props: &[String],
    edus: &[String],
    threshold: f64,
    normalized: bool,
) -> Vec<AlignedPair> {
    let sim = if normalized {
        similarity
    } else {
        raw_similarity
    };
    let mut cands = Vec::new();
    for (p, pt) in props.iter().enumerate() {
        for (e, et) in edus.iter().enumerate() {
            let score = sim(pt, et);
            if score >= threshold {
                cands.push(AlignedPair {
                    prop: p,
                    edu: e,
                    score,
                });
            }
        }
    }
    cands.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.prop.cmp(&b.prop))
            .then(a.edu.cmp(&b.edu))
    });
    let mut used_p = vec![false; props.len()];
    let mut used_e = vec![false; edus.len()];
    let mut out = Vec::new();
    for c in cands {
        if !used_p[c.prop] && !used_e[c.edu] {
            used_p[c.prop] = true;
            used_e[c.edu] = true;
            out.push(c);
        }
    }
    out.sort_by_key(|c| c.prop);
    out
}

/// Aligns the leaves of `lpt` to the EDUs of `gold`, with normalization.
pub fn align(lpt: &LinkedPropositionTree, gold: &GoldSentence, threshold: f64) -> Vec<AlignedPair> {
    align_texts(&leaf_texts(lpt), &gold.edus, threshold, true)
}

fn leaf_texts(lpt: &LinkedPropositionTree) -> Vec<String> {
    lpt.leaves_in_order().iter().map(|p| p.sentence()).collect()
}

/// Correct decisions out of scored ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
    }

    pub fn merge(&mut self, other: Tally) {
        self.correct += other.correct;
        self.total += other.total;
    }

    /// `None` when nothing was scored.
    pub fn precision(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

impl Serialize for Tally {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Tally", 3)?;
        st.serialize_field("correct", &self.correct)?;
        st.serialize_field("total", &self.total)?;
        st.serialize_field("precision", &self.precision())?;
        st.end()
    }
}

/// Leaf aligned to each EDU, if any.
fn edu_leaves(alignment: &[AlignedPair], edus: usize) -> Vec<Option<usize>> {
    let mut out = vec![None; edus];
    for a in alignment {
        if let Some(slot) = out.get_mut(a.edu) {
            *slot = Some(a.prop);
        }
    }
    out
}

/// Gold links whose two EDUs both have aligned leaves, with those leaves.
fn scorable<'g>(
    alignment: &[AlignedPair],
    gold: &'g GoldSentence,
) -> Vec<(&'g GoldLink, usize, usize)> {
    let leaves = edu_leaves(alignment, gold.edus.len());
    gold.links
        .iter()
        .filter_map(|l| {
            match (
                leaves.get(l.edu_i).copied().flatten(),
                leaves.get(l.edu_j).copied().flatten(),
            ) {
                (Some(a), Some(b)) => Some((l, a, b)),
                _ => None,
            }
        })
        .collect()
}

/// Nuclearity agreement: an NN link is correct when both leaves sit on the
/// same context layer, an NS or SN link when the satellite's leaf sits
/// exactly one layer below the nucleus's.
pub fn nuclearity_tally(
    lpt: &LinkedPropositionTree,
    alignment: &[AlignedPair],
    gold: &GoldSentence,
) -> Tally {
    let layers = lpt.context_layers();
    let mut t = Tally::default();
    for (link, a, b) in scorable(alignment, gold) {
        let (la, lb) = (layers[a], layers[b]);
        t.add(match link.nuclearity {
            Nuclearity::NN => la == lb,
            Nuclearity::NS => lb == la + 1,
            Nuclearity::SN => la == lb + 1,
        });
    }
    t
}

pub fn score_nuclearity(
    lpt: &LinkedPropositionTree,
    alignment: &[AlignedPair],
    gold: &GoldSentence,
) -> Result<f64, EvalError> {
    nuclearity_tally(lpt, alignment, gold)
        .precision()
        .ok_or(EvalError::NoScorablePairs)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RelationScores {
    /// Keyed by the class the system predicted.
    pub per_class: BTreeMap<String, Tally>,
    /// Scorable links where the system had no relation.
    pub unknown: usize,
    /// Scorable links that carry a gold cue phrase; unknown counts as wrong.
    pub cue_signalled: Tally,
    /// System relations over every split, scored or not.
    pub distribution: BTreeMap<String, usize>,
}

impl RelationScores {
    fn merge(&mut self, other: RelationScores) {
        for (k, v) in other.per_class {
            self.per_class.entry(k).or_default().merge(v);
        }
        self.unknown += other.unknown;
        self.cue_signalled.merge(other.cue_signalled);
        for (k, v) in other.distribution {
            *self.distribution.entry(k).or_default() += v;
        }
    }

    /// Mean of the defined per-class precisions.
    pub fn average(&self) -> Option<f64> {
        let ps: Vec<f64> = self
            .per_class
            .values()
            .filter_map(Tally::precision)
            .collect();
        (!ps.is_empty()).then(|| ps.iter().sum::<f64>() / ps.len() as f64)
    }
}

/// Relation precision per predicted class. The system relation of a gold
/// link is the relation joining its two aligned leaves in the tree.
pub fn score_relations(
    lpt: &LinkedPropositionTree,
    alignment: &[AlignedPair],
    gold: &GoldSentence,
    grouping: &Grouping,
) -> Result<RelationScores, EvalError> {
    let mut out = RelationScores::default();
    for r in lpt.relations() {
        *out.distribution.entry(r.to_string()).or_default() += 1;
    }
    for (link, a, b) in scorable(alignment, gold) {
        let gold_class = grouping.class_of(&link.relation)?;
        let sys = lpt
            .relation_between(a, b)
            .unwrap_or(RhetoricalRelation::Unknown);
        if sys == RhetoricalRelation::Unknown {
            out.unknown += 1;
            if link.cue.is_some() {
                out.cue_signalled.add(false);
            }
            continue;
        }
        let sys_class = grouping.class_of(sys.name())?;
        let ok = sys_class == gold_class;
        out.per_class
            .entry(sys_class.to_owned())
            .or_default()
            .add(ok);
        if link.cue.is_some() {
            out.cue_signalled.add(ok);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub sentence_id: String,
    pub proposition: String,
    pub edu: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub threshold: f64,
    /// Gold sentences with a system counterpart.
    pub sentences: usize,
    pub missing_sentences: Vec<String>,
    pub propositions: usize,
    pub edus: usize,
    pub matched_pairs: Vec<MatchedPair>,
    pub nuclearity: Tally,
    pub relations: RelationScores,
}

impl AlignmentReport {
    /// Matched propositions over all propositions of paired sentences.
    pub fn match_rate(&self) -> Option<f64> {
        (self.propositions > 0).then(|| self.matched_pairs.len() as f64 / self.propositions as f64)
    }

    pub fn nuclearity_agreement(&self) -> Option<f64> {
        self.nuclearity.precision()
    }

    pub fn relation_precision(&self) -> BTreeMap<String, Option<f64>> {
        self.relations
            .per_class
            .iter()
            .map(|(k, v)| (k.clone(), v.precision()))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["match_rate"] = serde_json::json!(self.match_rate());
        v["average_relation_precision"] = serde_json::json!(self.relations.average());
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub threshold: f64,
    pub normalize: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            threshold: DEFAULT_THRESHOLD,
            normalize: true,
        }
    }
}

/// Scores system trees, keyed by sentence id, against gold sentences.
pub fn evaluate(
    system: &[(String, LinkedPropositionTree)],
    gold: &[GoldSentence],
    grouping: &Grouping,
    opts: EvalOptions,
) -> Result<AlignmentReport, EvalError> {
    let by_id: BTreeMap<&str, &LinkedPropositionTree> =
        system.iter().map(|(k, v)| (k.as_str(), v)).collect();
    let mut report = AlignmentReport {
        threshold: opts.threshold,
        sentences: 0,
        missing_sentences: Vec::new(),
        propositions: 0,
        edus: 0,
        matched_pairs: Vec::new(),
        nuclearity: Tally::default(),
        relations: RelationScores::default(),
    };
    for g in gold {
        report.edus += g.edus.len();
        let Some(lpt) = by_id.get(g.sentence_id.as_str()) else {
            report.missing_sentences.push(g.sentence_id.clone());
            continue;
        };
        report.sentences += 1;
        let texts = leaf_texts(lpt);
        report.propositions += texts.len();
        let alignment = align_texts(&texts, &g.edus, opts.threshold, opts.normalize);
        report
            .nuclearity
            .merge(nuclearity_tally(lpt, &alignment, g));
        let mut rel = score_relations(lpt, &alignment, g, grouping)?;
        rel.distribution.clear();
        report.relations.merge(rel);
        report
            .matched_pairs
            .extend(alignment.iter().map(|a| MatchedPair {
                sentence_id: g.sentence_id.clone(),
                proposition: texts[a.prop].clone(),
                edu: g.edus[a.edu].clone(),
                score: a.score,
            }));
    }
    for (_, lpt) in system {
        for r in lpt.relations() {
            *report
                .relations
                .distribution
                .entry(r.to_string())
                .or_default() += 1;
        }
    }
    Ok(report)
}

fn pct(p: Option<f64>) -> String {
    p.map_or_else(|| "n/a".to_owned(), |p| format!("{:.2}%", p * 100.0))
}

impl fmt::Display for AlignmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "threshold            {}", self.threshold);
        let _ = writeln!(s, "sentences            {}", self.sentences);
        if !self.missing_sentences.is_empty() {
            let _ = writeln!(
                s,
                "missing from system  {}",
                self.missing_sentences.join(" ")
            );
        }
        let _ = writeln!(s, "propositions         {}", self.propositions);
        let _ = writeln!(s, "gold EDUs            {}", self.edus);
        let _ = writeln!(s, "matched pairs        {}", self.matched_pairs.len());
        let _ = writeln!(s, "match rate           {}", pct(self.match_rate()));
        let n = self.nuclearity;
        let _ = writeln!(
            s,
            "nuclearity           {} ({}/{})",
            pct(n.precision()),
            n.correct,
            n.total
        );
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<22} {:>9} {:>8} {:>10}",
            "relation class", "precision", "correct", "predicted"
        );
        for (class, t) in &self.relations.per_class {
            let _ = writeln!(
                s,
                "{:<22} {:>9} {:>8} {:>10}",
                class,
                pct(t.precision()),
                t.correct,
                t.total
            );
        }
        let _ = writeln!(s, "{:<22} {:>9}", "average", pct(self.relations.average()));
        let _ = writeln!(s, "unknown predictions  {}", self.relations.unknown);
        let c = self.relations.cue_signalled;
        let _ = writeln!(
            s,
            "cue-signalled links  {} ({}/{})",
            pct(c.precision()),
            c.correct,
            c.total
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "relation distribution");
        for (rel, count) in &self.relations.distribution {
            let _ = writeln!(s, "  {rel:<20} {count}");
        }
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn greedy_takes_the_best_pair_first() {
        let props = strings(&["the cat sat", "the cat sat on a mat", "dogs bark"]);
        let edus = strings(&["the cat sat on a mat", "dogs bark loudly"]);
        let a = align_texts(&props, &edus, 0.65, true);
        assert_eq!(
            a.iter().map(|p| (p.prop, p.edu)).collect::<Vec<_>>(),
            vec![(1, 0), (2, 1)]
        );
        assert!(a.iter().all(|p| p.score >= 0.65));
        assert!(align_texts(&props, &edus, 1.01, true).is_empty());
    }

    #[test]
    fn tally_precision() {
        let mut t = Tally::default();
        assert_eq!(t.precision(), None);
        t.add(true);
        t.add(false);
        assert_eq!(t.precision(), Some(0.5));
    }
}
