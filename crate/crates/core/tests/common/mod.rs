//! Helpers shared by the integration tests: fixture access, reference
//! implementations used as oracles, and the per-sentence invariant checks.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use prophier::lpt::{Constituency, LinkedPropositionTree, LptNode};
use prophier::output::{read_structured, to_structured, SentenceResult};
use prophier::relation::CueTable;
use prophier::rules::{Hierarchy, RuleFile};
use prophier::transform::{transform_traced, DEFAULT_BUDGET};
use prophier::tree::ParseTree;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_trees(name: &str) -> Vec<ParseTree> {
    prophier::tree::parse_lines(&read_fixture(name)).expect("fixture trees parse")
}

/// Reference matcher: tries every assignment of tree nodes to pattern nodes.
pub mod brute {
    use super::*;
    use prophier::pattern::{LabelMatcher, Operator, Pattern, PatternNode};

    type Path = Vec<usize>;

    fn all_nodes(t: &ParseTree) -> Vec<(Path, &ParseTree)> {
        fn go<'t>(t: &'t ParseTree, path: &mut Path, out: &mut Vec<(Path, &'t ParseTree)>) {
            out.push((path.clone(), t));
            for (i, c) in t.children().iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        go(t, &mut Vec::new(), &mut out);
        out
    }

    fn node_at<'t>(t: &'t ParseTree, path: &[usize]) -> &'t ParseTree {
        path.iter().fold(t, |n, &i| &n.children()[i])
    }

    fn label_ok(m: &LabelMatcher, category: &str) -> bool {
        match m {
            LabelMatcher::Any => true,
            LabelMatcher::OneOf(alts) => alts.iter().any(|a| a == category),
        }
    }

    fn accepts(pn: &PatternNode, n: &ParseTree) -> bool {
        let mut ok = label_ok(&pn.category, n.category());
        if let Some(words) = &pn.words {
            ok &= n.token().is_some_and(|t| words.contains(&t.to_lowercase()));
        }
        ok != pn.negated
    }

    fn sisters(a: &[usize], b: &[usize]) -> Option<(usize, usize)> {
        let (&ia, pa) = a.split_last()?;
        let (&ib, pb) = b.split_last()?;
        (pa == pb).then_some((ia, ib))
    }

    /// `A op B`, decided from the definitions on node paths.
    fn holds(t: &ParseTree, op: &Operator, a: &[usize], b: &[usize]) -> bool {
        let below = b.len() > a.len() && b.starts_with(a);
        let child = below && b.len() == a.len() + 1;
        let kids = |p: &[usize]| node_at(t, p).children().len();
        match op {
            Operator::ChildOf => child,
            Operator::Dominates => below,
            Operator::OnlyChildOf => child && kids(a) == 1,
            Operator::UnaryDominates => below && (a.len()..b.len()).all(|k| kids(&b[..k]) == 1),
            Operator::FirstChild => child && b[a.len()] == 0,
            Operator::LastChild => child && b[a.len()] + 1 == kids(a),
            Operator::ChainDominates(c) => {
                below && (a.len() + 1..b.len()).all(|k| label_ok(c, node_at(t, &b[..k]).category()))
            }
            Operator::SisterPrecedes => sisters(a, b).is_some_and(|(i, j)| j > i),
            Operator::ImmediateSisterPrecedes => sisters(a, b).is_some_and(|(i, j)| j == i + 1),
            Operator::SisterFollows => sisters(a, b).is_some_and(|(i, j)| j < i),
            Operator::ImmediateSisterFollows => sisters(a, b).is_some_and(|(i, j)| j + 1 == i),
        }
    }

    /// Whether some assignment satisfies `pn` with its root at `at`.
    fn exists(t: &ParseTree, nodes: &[(Path, &ParseTree)], pn: &PatternNode, at: &[usize]) -> bool {
        if !accepts(pn, node_at(t, at)) {
            return false;
        }
        pn.relations.iter().all(|r| {
            let any = nodes
                .iter()
                .any(|(p, _)| holds(t, &r.op, at, p) && exists(t, nodes, &r.target, p));
            any != r.negated
        })
    }

    struct Var<'p> {
        node: &'p PatternNode,
        parent: Option<(usize, &'p Operator)>,
    }

    /// Pattern nodes outside negated relations, in pre-order.
    fn vars<'p>(
        pn: &'p PatternNode,
        parent: Option<(usize, &'p Operator)>,
        out: &mut Vec<Var<'p>>,
    ) {
        let me = out.len();
        out.push(Var { node: pn, parent });
        for r in &pn.relations {
            if !r.negated {
                vars(&r.target, Some((me, &r.op)), out);
            }
        }
    }

    fn local_ok(t: &ParseTree, nodes: &[(Path, &ParseTree)], v: &Var, at: &[usize]) -> bool {
        accepts(v.node, node_at(t, at))
            && v.node.relations.iter().filter(|r| r.negated).all(|r| {
                !nodes
                    .iter()
                    .any(|(p, _)| holds(t, &r.op, at, p) && exists(t, nodes, &r.target, p))
            })
    }

    fn search(
        t: &ParseTree,
        nodes: &[(Path, &ParseTree)],
        vs: &[Var],
        assign: &mut Vec<usize>,
    ) -> bool {
        if assign.len() == vs.len() {
            return true;
        }
        let v = &vs[assign.len()];
        let (parent, op) = v.parent.expect("only the root has no parent");
        for (k, (p, _)) in nodes.iter().enumerate() {
            if holds(t, op, &nodes[assign[parent]].0, p) && local_ok(t, nodes, v, p) {
                assign.push(k);
                if search(t, nodes, vs, assign) {
                    return true;
                }
                assign.pop();
            }
        }
        false
    }

    /// Every anchor with the lexicographically first assignment, as
    /// (anchor path, capture name -> path).
    pub fn find_all(pattern: &Pattern, t: &ParseTree) -> Vec<(Path, BTreeMap<String, Path>)> {
        let nodes = all_nodes(t);
        let mut vs = Vec::new();
        vars(&pattern.root, None, &mut vs);
        let mut out = Vec::new();
        for (k, (p, _)) in nodes.iter().enumerate() {
            if !local_ok(t, &nodes, &vs[0], p) {
                continue;
            }
            let mut assign = vec![k];
            if search(t, &nodes, &vs, &mut assign) {
                let mut binds = BTreeMap::new();
                for (v, &a) in vs.iter().zip(&assign) {
                    for name in &v.node.captures {
                        binds.insert(name.clone(), nodes[a].0.clone());
                    }
                }
                out.push((p.clone(), binds));
            }
        }
        out
    }
}

/// Matching blocks by exhaustive search for the longest common run, earliest
/// in `a` then earliest in `b`, recursing on both sides.
pub fn oracle_blocks(a: &str, b: &str) -> Vec<(usize, usize, usize)> {
    fn rec(
        a: &[char],
        b: &[char],
        lo: (usize, usize),
        hi: (usize, usize),
        out: &mut Vec<(usize, usize, usize)>,
    ) {
        let mut best = (0, 0, 0);
        for i in lo.0..hi.0 {
            for j in lo.1..hi.1 {
                let mut k = 0;
                while i + k < hi.0 && j + k < hi.1 && a[i + k] == b[j + k] {
                    k += 1;
                }
                if k > best.2 {
                    best = (i, j, k);
                }
            }
        }
        if best.2 == 0 {
            return;
        }
        let (i, j, k) = best;
        rec(a, b, lo, (i, j), out);
        out.push(best);
        rec(a, b, (i + k, j + k), hi, out);
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut out = Vec::new();
    rec(&a, &b, (0, 0), (a.len(), b.len()), &mut out);
    out
}

/// `2M / (|a| + |b|)`, taking the shorter string (then the smaller) as `a`.
pub fn oracle_ratio(a: &str, b: &str) -> f64 {
    let (a, b) = if (a.chars().count(), a) > (b.chars().count(), b) {
        (b, a)
    } else {
        (a, b)
    };
    let total = a.chars().count() + b.chars().count();
    if total == 0 {
        return 1.0;
    }
    let m: usize = oracle_blocks(a, b).iter().map(|b| b.2).sum();
    2.0 * m as f64 / total as f64
}

/// Context layer of each leaf, counted while walking down from the root.
pub fn oracle_layers(lpt: &LinkedPropositionTree) -> Vec<usize> {
    fn go(n: &LptNode, depth: usize, out: &mut Vec<usize>) {
        match n {
            LptNode::Leaf(_) => out.push(depth),
            LptNode::Relation { left, right, .. } => {
                for (label, child) in [left, right] {
                    go(
                        child,
                        depth + usize::from(*label == Constituency::Context),
                        out,
                    );
                }
            }
        }
    }
    let mut out = Vec::new();
    go(&lpt.root, 0, &mut out);
    out
}

/// Tokens a split may drop without a `delete` capture: punctuation, and
/// relative pronouns, which the referent replaces.
fn exempt(tag: &str) -> bool {
    matches!(
        tag,
        "," | "." | ":" | "``" | "''" | "-LRB-" | "-RRB-" | "WDT" | "WP" | "WP$"
    )
}

fn check_shape(n: &LptNode, relations: &mut usize, leaves: &mut usize) -> Result<(), String> {
    match n {
        LptNode::Leaf(p) => {
            *leaves += 1;
            if p.text.is_empty() {
                return Err("empty leaf".into());
            }
            if p.text != p.tree.yield_text() {
                return Err(format!("leaf text differs from its tree: {}", p.sentence()));
            }
            if !matches!(p.text.last().map(String::as_str), Some("." | "!" | "?")) {
                return Err(format!("leaf lacks final punctuation: {}", p.sentence()));
            }
            Ok(())
        }
        LptNode::Relation { left, right, .. } => {
            *relations += 1;
            check_shape(&left.1, relations, leaves)?;
            check_shape(&right.1, relations, leaves)
        }
    }
}

/// Runs one sentence and checks binarity, context layers, token
/// conservation, strict progress, edge labels and the structured round trip.
pub fn check_invariants(tree: &ParseTree, rules: &RuleFile, cues: &CueTable) -> Result<(), String> {
    let (lpt, trace) =
        transform_traced(tree, rules, cues, DEFAULT_BUDGET).map_err(|e| e.to_string())?;

    let (mut relations, mut leaves) = (0, 0);
    check_shape(&lpt.root, &mut relations, &mut leaves)?;
    if relations + 1 != leaves || relations != trace.applications.len() {
        return Err(format!("{relations} relations over {leaves} leaves"));
    }

    if lpt.context_layers() != oracle_layers(&lpt) {
        return Err(format!(
            "layers {:?}, expected {:?}",
            lpt.context_layers(),
            oracle_layers(&lpt)
        ));
    }

    let tags: Vec<&str> = tree.leaves().iter().map(|l| l.label()).collect();
    let kept = |o: &[Option<usize>]| o.iter().flatten().count();
    let mut dropped = BTreeSet::new();
    for app in &trace.applications {
        let out = &app.outcome;
        let rule = rules.get(&out.rule_id).ok_or("unknown rule id")?;
        let src: BTreeSet<usize> = app.source_origins.iter().flatten().copied().collect();
        let ex: BTreeSet<usize> = out.extracted.origins.iter().flatten().copied().collect();
        let rem: BTreeSet<usize> = out.remainder.origins.iter().flatten().copied().collect();
        dropped.extend(out.dropped.iter().copied());

        for p in &src {
            if !exempt(tags[*p]) && !out.dropped.contains(p) && !ex.contains(p) && !rem.contains(p)
            {
                return Err(format!("{}: token `{}` lost", out.rule_id, lpt.source[*p]));
            }
        }
        if let Some(p) = ex.union(&rem).find(|p| !src.contains(p)) {
            return Err(format!(
                "{}: token `{}` not in the split sentence",
                out.rule_id, lpt.source[*p]
            ));
        }
        if let Some(p) = ex
            .intersection(&rem)
            .find(|p| out.extract_positions.contains(p))
        {
            return Err(format!(
                "{}: extracted token `{}` kept in both halves",
                out.rule_id, lpt.source[*p]
            ));
        }

        let source_kept = kept(&app.source_origins);
        if kept(&out.extracted.origins) >= source_kept
            || kept(&out.remainder.origins) >= source_kept
        {
            return Err(format!("{}: a half keeps every source token", out.rule_id));
        }
        if out.remainder.tokens.len() >= app.source_len {
            return Err(format!("{}: remainder is not shorter", out.rule_id));
        }

        let labels = [out.extracted.label, out.remainder.label];
        let contexts = labels
            .iter()
            .filter(|l| **l == Constituency::Context)
            .count();
        let expected = match rule.hierarchy {
            Hierarchy::Coordinate => 0,
            Hierarchy::Subordinate => 1,
        };
        if contexts != expected {
            return Err(format!("{}: {contexts} context edges", out.rule_id));
        }
    }

    let in_leaves: BTreeSet<usize> = trace
        .leaf_origins
        .iter()
        .flatten()
        .flatten()
        .copied()
        .collect();
    for (p, tag) in tags.iter().enumerate() {
        if !exempt(tag) && !dropped.contains(&p) && !in_leaves.contains(&p) {
            return Err(format!("token `{}` missing from every leaf", lpt.source[p]));
        }
    }

    let record = SentenceResult {
        id: "1".into(),
        outcome: Ok(lpt.clone()),
    };
    let back = read_structured(&to_structured(&record)).map_err(|e| e.to_string())?;
    match back.as_slice() {
        [r] if r.outcome.as_ref() == Ok(&lpt) => Ok(()),
        _ => Err("structured round trip changed the tree".into()),
    }
}

/// Expected shape of a linked proposition tree.
pub enum Shape {
    Leaf(&'static str),
    Rel(
        &'static str,
        (Constituency, Box<Shape>),
        (Constituency, Box<Shape>),
    ),
}

pub fn leaf(text: &'static str) -> Box<Shape> {
    Box::new(Shape::Leaf(text))
}

pub fn rel(
    name: &'static str,
    l: (Constituency, Box<Shape>),
    r: (Constituency, Box<Shape>),
) -> Box<Shape> {
    Box::new(Shape::Rel(name, l, r))
}

/// Joins tokens the way the sentence would be written.
pub fn detokenize(tokens: &[String]) -> String {
    let mut s = String::new();
    for t in tokens {
        if !s.is_empty() && !matches!(t.as_str(), "." | "," | "!" | "?" | ";" | ":") {
            s.push(' ');
        }
        s.push_str(t);
    }
    s
}

pub fn compare_shape(got: &LptNode, want: &Shape) -> Result<(), String> {
    match (got, want) {
        (LptNode::Leaf(p), Shape::Leaf(text)) => {
            let got = detokenize(&p.text);
            (got == *text)
                .then_some(())
                .ok_or(format!("leaf `{got}`, expected `{text}`"))
        }
        (
            LptNode::Relation {
                relation,
                left,
                right,
            },
            Shape::Rel(name, wl, wr),
        ) => {
            if relation.name() != *name {
                return Err(format!("relation {relation}, expected {name}"));
            }
            for ((gl, gn), (wl, wn)) in [(left, wl), (right, wr)] {
                if gl != wl {
                    return Err(format!("{name}: edge {gl}, expected {wl}"));
                }
                compare_shape(gn, wn)?;
            }
            Ok(())
        }
        (LptNode::Leaf(p), _) => Err(format!(
            "leaf `{}` where a relation was expected",
            p.sentence()
        )),
        (LptNode::Relation { relation, .. }, _) => {
            Err(format!("relation {relation} where a leaf was expected"))
        }
    }
}

/// The tree drawn for the fluoroscopic-study sentence.
pub fn volvulus_shape() -> Box<Shape> {
    use Constituency::{Context, Core};
    rel(
        "Contrast",
        (
            Core,
            rel(
                "Elaboration",
                (Core, leaf("A fluoroscopic study is typically the next step in management.")),
                (Context, leaf("A fluoroscopic study is known as an upper gastrointestinal series.")),
            ),
        ),
        (
            Context,
            rel(
                "Condition",
                (Context, leaf("Volvulus is suspected.")),
                (
                    Core,
                    rel(
                        "Background",
                        (Core, leaf("Caution with non water soluble contrast is mandatory.")),
                        (
                            Context,
                            rel(
                                "List",
                                (Core, leaf("The usage of barium can impede surgical revision.")),
                                (Core, leaf("The usage of barium can lead to increased post operative complications.")),
                            ),
                        ),
                    ),
                ),
            ),
        ),
    )
}

/// Gold annotation read off a system tree: one EDU per leaf and one link
/// per relation between the head leaves of its two sides.
pub fn gold_from_system(id: &str, lpt: &LinkedPropositionTree) -> String {
    fn head(n: &LptNode, start: usize) -> (usize, usize) {
        // (head leaf, leaf count)
        match n {
            LptNode::Leaf(_) => (start, 1),
            LptNode::Relation { left, right, .. } => {
                let (lh, ln) = head(&left.1, start);
                let (rh, rn) = head(&right.1, start + ln);
                let h = if left.0 == Constituency::Core || right.0 != Constituency::Core {
                    lh
                } else {
                    rh
                };
                (h, ln + rn)
            }
        }
    }
    fn links(n: &LptNode, start: usize, out: &mut Vec<String>) -> usize {
        match n {
            LptNode::Leaf(_) => 1,
            LptNode::Relation {
                relation,
                left,
                right,
            } => {
                let (lh, _) = head(&left.1, start);
                let ln = links(&left.1, start, out);
                let (rh, _) = head(&right.1, start + ln);
                let rn = links(&right.1, start + ln, out);
                let nuc = match (left.0, right.0) {
                    (Constituency::Core, Constituency::Core) => "NN",
                    (Constituency::Core, Constituency::Context) => "NS",
                    _ => "SN",
                };
                out.push(format!("link: {} {} {nuc} {relation}", lh + 1, rh + 1));
                ln + rn
            }
        }
    }
    let edus: Vec<String> = lpt.leaves_in_order().iter().map(|p| p.sentence()).collect();
    let mut out = format!("sentence: {id}\ntext: {}\n", edus.join(" "));
    for e in &edus {
        out.push_str(&format!("edu: {e}\n"));
    }
    let mut ls = Vec::new();
    links(&lpt.root, 0, &mut ls);
    for l in ls {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// The published cue phrase table.
pub mod cues {
    use prophier::relation::RhetoricalRelation::{self, *};

    /// The cue phrase table as published, one row per relation.
    pub const PUBLISHED: &[(RhetoricalRelation, &str)] = &[
        (
            Contrast,
            "although, but, but now, despite, even though, even when, except when, however, instead, rather, \
             still, though, thus, until recently, while, yet",
        ),
        (List, "and, in addition, in addition to, moreover"),
        (Disjunction, "or"),
        (Cause, "largely because, because, since"),
        (Result, "as a result, as a result of"),
        (Temporal, "after, and after, next, then, before, previously"),
        (Background, "as, now, once, when, with, without"),
        (Condition, "if, in case, unless, until"),
        (
            Elaboration,
            "more provocatively, even before, for example, further, recently, since, since now, so, so far, \
             where, whereby, whether",
        ),
        (Explanation, "simply because, because of, indeed, so, so that"),
    ];

    /// Cues listed under two relations resolve by the priority
    /// Cause > Explanation > Elaboration.
    pub fn expected(cue: &str, listed: RhetoricalRelation) -> RhetoricalRelation {
        match cue {
            "since" => Cause,
            "so" => Explanation,
            _ => listed,
        }
    }

    pub fn rows() -> Vec<(String, RhetoricalRelation)> {
        PUBLISHED
            .iter()
            .flat_map(|(r, cues)| cues.split(", ").map(move |c| (c.trim().to_owned(), *r)))
            .collect()
    }
}

/// Random trees and patterns over a small label set.
pub mod gen {
    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    const PHRASES: &[&str] = &["S", "NP", "VP", "PP"];
    const TAGS: &[&str] = &["NN", "DT", "VB", "IN"];
    const WORDS: &[&str] = &["a", "b", "c"];
    const OPS: &[&str] = &[
        "<", "<<", "<:", "<<:", "<,", "<-", "<+", "$..", "$+", "$,,", "$-",
    ];

    /// A bracketed tree with exactly `n` nodes.
    pub fn gen_tree(rng: &mut StdRng, n: usize) -> String {
        if n == 1 {
            return format!(
                "({} {})",
                TAGS.choose(rng).unwrap(),
                WORDS.choose(rng).unwrap()
            );
        }
        let mut left = n - 1;
        let kids = rng.gen_range(1..=left.min(3));
        let mut parts = Vec::new();
        for k in 0..kids {
            let size = if k + 1 == kids {
                left
            } else {
                rng.gen_range(1..=left - (kids - k - 1))
            };
            left -= size;
            parts.push(gen_tree(rng, size));
        }
        format!("({} {})", PHRASES.choose(rng).unwrap(), parts.join(" "))
    }

    fn any_label(rng: &mut StdRng) -> &'static str {
        if rng.gen_bool(0.5) {
            PHRASES.choose(rng).unwrap()
        } else {
            TAGS.choose(rng).unwrap()
        }
    }

    fn gen_label(rng: &mut StdRng, capture: bool, names: &mut usize) -> String {
        let negated = rng.gen_bool(0.15);
        let mut s = String::new();
        if negated {
            s.push('!');
        }
        match rng.gen_range(0..10) {
            0 | 1 => s.push_str("__"),
            2 | 3 => s.push_str(&format!("{}|{}", any_label(rng), any_label(rng))),
            _ => s.push_str(any_label(rng)),
        }
        if rng.gen_bool(0.15) {
            s.push_str(&format!("@{}", WORDS.choose(rng).unwrap()));
        }
        if capture && !negated && rng.gen_bool(0.5) {
            *names += 1;
            s.push_str(&format!("=x{names}"));
        }
        s
    }

    pub fn gen_pattern(
        rng: &mut StdRng,
        ops: &mut usize,
        capture: bool,
        names: &mut usize,
    ) -> String {
        let mut s = gen_label(rng, capture, names);
        while *ops > 0 && rng.gen_bool(0.65) {
            *ops -= 1;
            let negated = rng.gen_bool(0.2);
            let op = *OPS.choose(rng).unwrap();
            s.push(' ');
            if negated {
                s.push('!');
            }
            if op == "<+" {
                s.push_str(&format!("<+({})", any_label(rng)));
            } else {
                s.push_str(op);
            }
            let target = gen_pattern(rng, ops, capture && !negated, names);
            if target.contains(' ') {
                s.push_str(&format!(" ({target})"));
            } else {
                s.push_str(&format!(" {target}"));
            }
        }
        s
    }
}
