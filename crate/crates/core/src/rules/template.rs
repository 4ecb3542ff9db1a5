//! Rephrasing templates.
//!
//! A template is a whitespace-separated list of items:
//!
//! ```text
//! {name}        subtree bound to capture `name`
//! {*name}       children of the bound node
//! {head:name}   first child of the bound node
//! {tail:name}   all but the first child
//! {referent}    nearest NP sister to the left of `extract` (or of an
//!               ancestor), else the nearest NP sister to its right
//! {be}          is/are
//! {be:past}     was/were
//! {be:clause}   was/were if the source's first verb is past tense, else is/are
//! {aux:name}    is/are before a present participle, was/were before a past one
//! {rest}        the source without `extract` and `delete*` captures
//! {only:name}   the source without the coordinated sisters of `name`
//! [LABEL ...]   a new constituent
//! word/TAG      a literal pre-terminal; bare punctuation needs no tag
//! ```
//!
//! Copula agreement follows the first noun phrase of the output.

use std::collections::BTreeSet;
use std::fmt;

use crate::pattern::MatchResult;
use crate::tree::{NodePath, ParseTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tense {
    Present,
    Past,
    Clause,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Capture(String),
    Children(String),
    Head(String),
    Tail(String),
    Referent,
    Be(Tense),
    Aux(String),
    Rest,
    Only(String),
    Literal { word: String, tag: String },
    Group { label: String, items: Vec<Item> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub items: Vec<Item>,
    source: String,
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

const PUNCT_LITERALS: &[&str] = &[".", ",", "?", "!", ";", ":"];

impl Template {
    pub fn parse(text: &str) -> Result<Template, String> {
        let mut stack: Vec<(String, Vec<Item>)> = vec![(String::new(), Vec::new())];
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '[' {
                let start = i + 1;
                i = start;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && chars[i] != ']'
                    && chars[i] != '['
                {
                    i += 1;
                }
                let label: String = chars[start..i].iter().collect();
                if label.is_empty() {
                    return Err("`[` must be followed by a label".into());
                }
                stack.push((label, Vec::new()));
            } else if c == ']' {
                i += 1;
                if stack.len() < 2 {
                    return Err("unbalanced `]`".into());
                }
                let (label, items) = stack.pop().unwrap_or_default();
                if items.is_empty() {
                    return Err(format!("empty group `[{label}]`"));
                }
                stack
                    .last_mut()
                    .expect("stack")
                    .1
                    .push(Item::Group { label, items });
            } else if c == '{' {
                let end = chars[i..]
                    .iter()
                    .position(|&c| c == '}')
                    .ok_or("unterminated `{`")?;
                let inner: String = chars[i + 1..i + end].iter().collect();
                i += end + 1;
                stack
                    .last_mut()
                    .expect("stack")
                    .1
                    .push(placeholder(&inner)?);
            } else {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"[]{".contains(chars[i]) {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                stack.last_mut().expect("stack").1.push(literal(&lit)?);
            }
        }
        if stack.len() != 1 {
            return Err("unclosed `[`".into());
        }
        let items = stack.pop().map(|s| s.1).unwrap_or_default();
        if items.is_empty() {
            return Err("empty template".into());
        }
        Ok(Template {
            items,
            source: text.trim().to_owned(),
        })
    }

    /// Capture names the template reads.
    pub fn captures(&self) -> BTreeSet<String> {
        fn collect(items: &[Item], out: &mut BTreeSet<String>) {
            for it in items {
                match it {
                    Item::Capture(n)
                    | Item::Children(n)
                    | Item::Head(n)
                    | Item::Tail(n)
                    | Item::Aux(n)
                    | Item::Only(n) => {
                        out.insert(n.clone());
                    }
                    Item::Referent | Item::Rest => {
                        out.insert("extract".into());
                    }
                    Item::Group { items, .. } => collect(items, out),
                    _ => {}
                }
            }
        }
        let mut out = BTreeSet::new();
        collect(&self.items, &mut out);
        out
    }
}

fn placeholder(inner: &str) -> Result<Item, String> {
    let name_ok = |n: &str| !n.is_empty() && n.chars().all(|c| c.is_alphanumeric() || c == '_');
    let item = match inner.split_once(':') {
        None if inner == "referent" => Item::Referent,
        None if inner == "rest" => Item::Rest,
        None if inner == "be" => Item::Be(Tense::Present),
        None => match inner.strip_prefix('*') {
            Some(n) if name_ok(n) => Item::Children(n.into()),
            None if name_ok(inner) => Item::Capture(inner.into()),
            _ => return Err(format!("bad placeholder `{{{inner}}}`")),
        },
        Some(("be", "past")) => Item::Be(Tense::Past),
        Some(("be", "clause")) => Item::Be(Tense::Clause),
        Some((kind, n)) if name_ok(n) => match kind {
            "head" => Item::Head(n.into()),
            "tail" => Item::Tail(n.into()),
            "aux" => Item::Aux(n.into()),
            "only" => Item::Only(n.into()),
            _ => return Err(format!("bad placeholder `{{{inner}}}`")),
        },
        _ => return Err(format!("bad placeholder `{{{inner}}}`")),
    };
    Ok(item)
}

fn literal(lit: &str) -> Result<Item, String> {
    if PUNCT_LITERALS.contains(&lit) {
        let tag = if matches!(lit, "." | "?" | "!") {
            "."
        } else {
            lit
        };
        return Ok(Item::Literal {
            word: lit.into(),
            tag: tag.into(),
        });
    }
    match lit.rsplit_once('/') {
        Some((w, t)) if !w.is_empty() && !t.is_empty() => Ok(Item::Literal {
            word: w.into(),
            tag: t.into(),
        }),
        _ => Err(format!("literal `{lit}` needs a tag, as in `{lit}/NN`")),
    }
}

/// Working tree that remembers, for every token, its position in the
/// original sentence (`None` for inserted words).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum RNode {
    Leaf {
        tag: String,
        word: String,
        origin: Option<usize>,
    },
    Inner {
        label: String,
        kids: Vec<RNode>,
    },
}

impl RNode {
    pub(crate) fn from_tree(t: &ParseTree, origins: &[Option<usize>]) -> RNode {
        match t.token() {
            Some(w) => RNode::Leaf {
                tag: t.label().to_owned(),
                word: w.to_owned(),
                origin: origins.get(t.span().start).copied().flatten(),
            },
            None => RNode::Inner {
                label: t.label().to_owned(),
                kids: t
                    .children()
                    .iter()
                    .map(|c| RNode::from_tree(c, origins))
                    .collect(),
            },
        }
    }

    fn label(&self) -> &str {
        match self {
            RNode::Leaf { tag, .. } => tag,
            RNode::Inner { label, .. } => label,
        }
    }

    fn category(&self) -> &str {
        crate::tree::category_of(self.label())
    }

    fn kids(&self) -> &[RNode] {
        match self {
            RNode::Leaf { .. } => &[],
            RNode::Inner { kids, .. } => kids,
        }
    }

    pub(crate) fn at(&self, path: &[usize]) -> Option<&RNode> {
        let mut cur = self;
        for &i in path {
            cur = cur.kids().get(i)?;
        }
        Some(cur)
    }

    fn pruned(&self, path: &mut NodePath, drop: &[NodePath]) -> Option<RNode> {
        if drop.iter().any(|p| p == path) {
            return None;
        }
        match self {
            RNode::Leaf { .. } => Some(self.clone()),
            RNode::Inner { label, kids } => {
                let mut out = Vec::new();
                for (i, k) in kids.iter().enumerate() {
                    path.push(i);
                    if let Some(k) = k.pruned(path, drop) {
                        out.push(k);
                    }
                    path.pop();
                }
                (!out.is_empty()).then(|| RNode::Inner {
                    label: label.clone(),
                    kids: out,
                })
            }
        }
    }

    pub(crate) fn without(&self, drop: &[NodePath]) -> Option<RNode> {
        self.pruned(&mut Vec::new(), drop)
    }

    fn for_each_leaf_mut(&mut self, f: &mut impl FnMut(usize, &mut String, &mut String)) {
        fn go(n: &mut RNode, i: &mut usize, f: &mut impl FnMut(usize, &mut String, &mut String)) {
            match n {
                RNode::Leaf { tag, word, .. } => {
                    f(*i, tag, word);
                    *i += 1;
                }
                RNode::Inner { kids, .. } => kids.iter_mut().for_each(|k| go(k, i, f)),
            }
        }
        go(self, &mut 0, f);
    }

    fn leaves(&self) -> Vec<(&str, &str, Option<usize>)> {
        let mut out = Vec::new();
        fn go<'a>(n: &'a RNode, out: &mut Vec<(&'a str, &'a str, Option<usize>)>) {
            match n {
                RNode::Leaf { tag, word, origin } => out.push((tag, word, *origin)),
                RNode::Inner { kids, .. } => kids.iter().for_each(|k| go(k, out)),
            }
        }
        go(self, &mut out);
        out
    }

    fn retain_leaves(&self, keep: &mut impl FnMut(&str, &str) -> bool) -> Option<RNode> {
        match self {
            RNode::Leaf { tag, word, .. } => keep(tag, word).then(|| self.clone()),
            RNode::Inner { label, kids } => {
                let kids: Vec<RNode> = kids.iter().filter_map(|k| k.retain_leaves(keep)).collect();
                (!kids.is_empty()).then(|| RNode::Inner {
                    label: label.clone(),
                    kids,
                })
            }
        }
    }

    fn to_tree(&self) -> ParseTree {
        match self {
            RNode::Leaf { tag, word, .. } => ParseTree::leaf(tag.clone(), word.clone()),
            RNode::Inner { label, kids } => {
                ParseTree::node(label.clone(), kids.iter().map(RNode::to_tree).collect())
                    .expect("inner nodes are never empty")
            }
        }
    }
}

/// Everything a template can draw on for one match.
pub(crate) struct Scope<'a, 't> {
    pub source: &'a RNode,
    pub m: &'a MatchResult<'t>,
    /// Paths removed by `{rest}`, commas included.
    pub removed: &'a [NodePath],
}

fn is_clause(cat: &str) -> bool {
    matches!(cat, "ROOT" | "S" | "SINV" | "SQ")
}

fn is_noun_family(cat: &str) -> bool {
    cat == "NP" || cat.starts_with("NN")
}

fn is_verb_family(cat: &str) -> bool {
    cat == "VP" || cat.starts_with("VB")
}

fn is_past(source: &RNode) -> bool {
    source
        .leaves()
        .into_iter()
        .find(|(t, _, _)| t.starts_with("VB") || *t == "MD")
        .is_some_and(|(t, _, _)| t == "VBD")
}

/// Whether a rendered noun phrase reads as plural.
fn is_plural(np: &RNode) -> bool {
    let kids = np.kids();
    if kids.iter().any(|k| k.category() == "CC") {
        return true;
    }
    if let Some(first_np) = kids.iter().find(|k| k.category() == "NP") {
        if !kids.iter().any(|k| k.category().starts_with("NN")) {
            return is_plural(first_np);
        }
    }
    let head = kids
        .iter()
        .rev()
        .find(|k| k.category().starts_with("NN") || k.category() == "PRP");
    match head {
        Some(RNode::Leaf { tag, word, .. }) => {
            matches!(tag.as_str(), "NNS" | "NNPS")
                || matches!(word.to_lowercase().as_str(), "they" | "we" | "you")
        }
        _ => false,
    }
}

fn be_form(plural: bool, past: bool) -> (&'static str, &'static str) {
    match (plural, past) {
        (false, false) => ("VBZ", "is"),
        (true, false) => ("VBP", "are"),
        (false, true) => ("VBD", "was"),
        (true, true) => ("VBD", "were"),
    }
}

const BE_MARK: &str = "#BE";

impl<'a, 't> Scope<'a, 't> {
    fn bound(&self, name: &str) -> Result<(&'a RNode, &NodePath), String> {
        let b = self
            .m
            .get(name)
            .ok_or_else(|| format!("capture `{name}` is unbound"))?;
        let node = self
            .source
            .at(&b.path)
            .ok_or("capture path outside the source")?;
        Ok((node, &b.path))
    }

    fn referent(&self) -> Result<&'a RNode, String> {
        let (_, path) = self.bound("extract")?;
        let mut path = path.clone();
        let mut first = true;
        while let Some(i) = path.pop() {
            let parent = self.source.at(&path).ok_or("bad path")?;
            let kids = parent.kids();
            if let Some(np) = kids[..i].iter().rev().find(|k| k.category() == "NP") {
                return Ok(np);
            }
            if first {
                if let Some(np) = kids[i + 1..].iter().find(|k| k.category() == "NP") {
                    return Ok(np);
                }
                first = false;
            }
        }
        Err("no referent noun phrase".into())
    }

    fn only(&self, name: &str) -> Result<RNode, String> {
        let (node, path) = self.bound(name)?;
        let Some((&i, parent_path)) = path.split_last() else {
            return Ok(node.clone());
        };
        let parent = self.source.at(parent_path).ok_or("bad path")?;
        let cat = node.category();
        let mut drop = Vec::new();
        for (j, k) in parent.kids().iter().enumerate() {
            let kc = k.category();
            let coordinated = matches!(kc, "CC" | "," | ":" | "CONJP")
                || kc == cat
                || (is_verb_family(cat) && is_verb_family(kc))
                || (is_noun_family(cat) && is_noun_family(kc));
            if j != i && coordinated {
                let mut p = parent_path.to_vec();
                p.push(j);
                drop.push(p);
            }
        }
        self.source
            .without(&drop)
            .ok_or_else(|| "nothing left".into())
    }

    fn render(&self, items: &[Item], out: &mut Vec<RNode>) -> Result<(), String> {
        for it in items {
            match it {
                Item::Capture(n) => out.push(self.bound(n)?.0.clone()),
                Item::Children(n) => out.extend(self.bound(n)?.0.kids().iter().cloned()),
                Item::Head(n) => out.extend(self.bound(n)?.0.kids().first().cloned()),
                Item::Tail(n) => out.extend(self.bound(n)?.0.kids().iter().skip(1).cloned()),
                Item::Referent => out.push(self.referent()?.clone()),
                Item::Be(t) => {
                    let past = match t {
                        Tense::Present => false,
                        Tense::Past => true,
                        Tense::Clause => is_past(self.source),
                    };
                    out.push(RNode::Leaf {
                        tag: BE_MARK.into(),
                        word: past.to_string(),
                        origin: None,
                    });
                }
                Item::Aux(n) => {
                    let (node, _) = self.bound(n)?;
                    let first = node
                        .leaves()
                        .first()
                        .map(|l| l.0.to_owned())
                        .unwrap_or_default();
                    let past = matches!(first.as_str(), "VBN" | "VBD");
                    out.push(RNode::Leaf {
                        tag: BE_MARK.into(),
                        word: past.to_string(),
                        origin: None,
                    });
                }
                Item::Rest => {
                    let rest = self.source.without(self.removed).ok_or("nothing remains")?;
                    out.push(rest);
                }
                Item::Only(n) => out.push(self.only(n)?),
                Item::Literal { word, tag } => out.push(RNode::Leaf {
                    tag: tag.clone(),
                    word: word.clone(),
                    origin: None,
                }),
                Item::Group { label, items } => {
                    let mut kids = Vec::new();
                    self.render(items, &mut kids)?;
                    if kids.is_empty() {
                        return Err(format!("group `{label}` rendered empty"));
                    }
                    out.push(RNode::Inner {
                        label: label.clone(),
                        kids,
                    });
                }
            }
        }
        Ok(())
    }

    /// Renders a template into a normalized sentence tree plus the source
    /// position of each token.
    pub(crate) fn realize(
        &self,
        template: &Template,
    ) -> Result<(ParseTree, Vec<Option<usize>>), String> {
        let mut nodes = Vec::new();
        self.render(&template.items, &mut nodes)?;
        normalize(nodes)
    }
}

fn first_np(nodes: &[RNode]) -> Option<&RNode> {
    for n in nodes {
        if n.category() == "NP" {
            return Some(n);
        }
        if let Some(np) = first_np(n.kids()) {
            return Some(np);
        }
    }
    None
}

fn is_quote(tag: &str, word: &str) -> bool {
    matches!(tag, "``" | "''") || matches!(word, "\"" | "``" | "''")
}

fn normalize(nodes: Vec<RNode>) -> Result<(ParseTree, Vec<Option<usize>>), String> {
    // splice clause nodes at the top
    let mut top = Vec::new();
    let mut queue: std::collections::VecDeque<RNode> = nodes.into();
    while let Some(n) = queue.pop_front() {
        match n {
            RNode::Inner { label, kids } if is_clause(crate::tree::category_of(&label)) => {
                for k in kids.into_iter().rev() {
                    queue.push_front(k);
                }
            }
            other => top.push(other),
        }
    }

    let plural = first_np(&top).is_some_and(is_plural);
    let mut root = RNode::Inner {
        label: "S".into(),
        kids: top,
    };
    root.for_each_leaf_mut(&mut |_, tag, word| {
        if tag == BE_MARK {
            let (t, w) = be_form(plural, word == "true");
            *tag = t.into();
            *word = w.into();
        }
    });

    let mut root = root
        .retain_leaves(&mut |t, w| !is_quote(t, w))
        .ok_or("empty sentence")?;

    // comma cleanup and final punctuation over the leaf sequence
    loop {
        let leaves = root.leaves();
        let n = leaves.len();
        let last_content = leaves
            .iter()
            .rposition(|(t, _, _)| !matches!(*t, "," | ":" | "." | "CC"));
        let drop_at = (0..n).find(|&i| {
            let t = leaves[i].0;
            let next = leaves.get(i + 1).map(|l| l.0);
            match t {
                "," | ":" => i == 0 || matches!(next, None | Some("," | ":" | ".")),
                "CC" => i == 0 || last_content.is_some_and(|lc| i > lc),
                "." => i + 1 != n || last_content.is_none(),
                _ => false,
            }
        });
        let Some(i) = drop_at else { break };
        let mut seen = 0;
        root = root
            .retain_leaves(&mut |_, _| {
                seen += 1;
                seen - 1 != i
            })
            .ok_or("empty sentence")?;
    }
    if root
        .leaves()
        .iter()
        .all(|(t, _, _)| matches!(*t, "," | ":" | "." | "CC"))
    {
        return Err("no content words".into());
    }
    if root.leaves().last().map(|l| l.0) != Some(".") {
        if let RNode::Inner { kids, .. } = &mut root {
            kids.push(RNode::Leaf {
                tag: ".".into(),
                word: ".".into(),
                origin: None,
            });
        }
    }

    root.for_each_leaf_mut(&mut |i, _, word| {
        if i == 0 {
            let mut cs = word.chars();
            if let Some(c) = cs.next() {
                *word = c.to_uppercase().chain(cs).collect();
            }
        }
    });

    let origins = root.leaves().iter().map(|l| l.2).collect();
    let tree = ParseTree::node("ROOT", vec![root.to_tree()]).expect("nonempty");
    Ok((tree, origins))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_items() {
        let t = Template::parse("{referent} [VP {be} {extract}] .").unwrap();
        assert_eq!(t.items.len(), 3);
        assert!(
            matches!(&t.items[1], Item::Group { label, items } if label == "VP" && items.len() == 2)
        );
        assert_eq!(
            t.captures().into_iter().collect::<Vec<_>>(),
            vec!["extract".to_string()]
        );
        let t = Template::parse("This/DT [VP {be:clause} {*extract}]").unwrap();
        assert_eq!(
            t.items[0],
            Item::Literal {
                word: "This".into(),
                tag: "DT".into()
            }
        );
    }

    #[test]
    fn rejects_malformed() {
        assert!(Template::parse("").is_err());
        assert!(Template::parse("[VP {be}").is_err());
        assert!(Template::parse("{be} ]").is_err());
        assert!(Template::parse("this {extract}").is_err());
        assert!(Template::parse("{unknown:x}").is_err());
        assert!(Template::parse("{extract").is_err());
        assert!(Template::parse("[NP ]").is_err());
    }

    fn leaf(tag: &str, word: &str, origin: Option<usize>) -> RNode {
        RNode::Leaf {
            tag: tag.into(),
            word: word.into(),
            origin,
        }
    }

    #[test]
    fn normalization_cleans_punctuation() {
        let np = RNode::Inner {
            label: "NP".into(),
            kids: vec![leaf("NNS", "dogs", Some(3))],
        };
        let nodes = vec![
            leaf(",", ",", None),
            np,
            leaf(BE_MARK, "false", None),
            leaf("JJ", "happy", Some(5)),
            leaf(",", ",", Some(6)),
            leaf("''", "''", None),
        ];
        let (t, o) = normalize(nodes).unwrap();
        assert_eq!(t.tokens(), vec!["Dogs", "are", "happy", "."]);
        assert_eq!(o, vec![Some(3), None, Some(5), None]);
    }
}
