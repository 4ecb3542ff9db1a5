use std::collections::BTreeMap;

use crate::tree::{NodePath, ParseTree};

use super::{Operator, Pattern, PatternNode};

/// A tree node bound during matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding<'t> {
    pub path: NodePath,
    pub node: &'t ParseTree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult<'t> {
    pub anchor: Binding<'t>,
    pub bindings: BTreeMap<String, Binding<'t>>,
}

impl<'t> MatchResult<'t> {
    pub fn get(&self, name: &str) -> Option<&Binding<'t>> {
        self.bindings.get(name)
    }
}

struct Info<'t> {
    node: &'t ParseTree,
    path: NodePath,
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Flattened pre-order view of a tree; node ids are pre-order indices.
struct Index<'t> {
    nodes: Vec<Info<'t>>,
}

impl<'t> Index<'t> {
    fn new(tree: &'t ParseTree) -> Self {
        let mut nodes = Vec::with_capacity(tree.size());
        Self::add(tree, None, &mut Vec::new(), &mut nodes);
        Index { nodes }
    }

    fn add(
        t: &'t ParseTree,
        parent: Option<usize>,
        path: &mut NodePath,
        nodes: &mut Vec<Info<'t>>,
    ) -> usize {
        let id = nodes.len();
        nodes.push(Info {
            node: t,
            path: path.clone(),
            parent,
            children: Vec::new(),
        });
        for (i, c) in t.children().iter().enumerate() {
            path.push(i);
            let cid = Self::add(c, Some(id), path, nodes);
            path.pop();
            nodes[id].children.push(cid);
        }
        id
    }

    /// Candidates for B in `A op B`, in pre-order.
    fn candidates(&self, a: usize, op: &Operator) -> Vec<usize> {
        let info = &self.nodes[a];
        match op {
            Operator::ChildOf => info.children.clone(),
            Operator::Dominates => (a + 1..a + info.node.size()).collect(),
            Operator::OnlyChildOf => {
                if info.children.len() == 1 {
                    info.children.clone()
                } else {
                    Vec::new()
                }
            }
            Operator::UnaryDominates => {
                let mut out = Vec::new();
                let mut cur = a;
                while self.nodes[cur].children.len() == 1 {
                    cur = self.nodes[cur].children[0];
                    out.push(cur);
                }
                out
            }
            Operator::FirstChild => info.children.first().copied().into_iter().collect(),
            Operator::LastChild => info.children.last().copied().into_iter().collect(),
            Operator::ChainDominates(chain) => {
                let mut out = Vec::new();
                self.chain(a, chain, &mut out);
                out
            }
            Operator::SisterPrecedes
            | Operator::ImmediateSisterPrecedes
            | Operator::SisterFollows
            | Operator::ImmediateSisterFollows => {
                let Some(p) = info.parent else {
                    return Vec::new();
                };
                let sisters = &self.nodes[p].children;
                let i = sisters.iter().position(|&s| s == a).unwrap_or(0);
                match op {
                    Operator::SisterPrecedes => sisters[i + 1..].to_vec(),
                    Operator::ImmediateSisterPrecedes => {
                        sisters.get(i + 1).copied().into_iter().collect()
                    }
                    Operator::SisterFollows => sisters[..i].to_vec(),
                    _ => i.checked_sub(1).map(|j| sisters[j]).into_iter().collect(),
                }
            }
        }
    }

    fn chain(&self, a: usize, chain: &super::LabelMatcher, out: &mut Vec<usize>) {
        for &c in &self.nodes[a].children {
            out.push(c);
            if chain.matches(self.nodes[c].node.category()) {
                self.chain(c, chain, out);
            }
        }
    }

    fn try_node(&self, pn: &PatternNode, id: usize, binds: &mut Vec<(String, usize)>) -> bool {
        let n = self.nodes[id].node;
        if !pn.accepts(n.category(), n.token()) {
            return false;
        }
        let mark = binds.len();
        for name in &pn.captures {
            binds.push((name.clone(), id));
        }
        for rel in &pn.relations {
            let cands = self.candidates(id, &rel.op);
            if rel.negated {
                let mut scratch = Vec::new();
                if cands
                    .iter()
                    .any(|&c| self.try_node(&rel.target, c, &mut scratch))
                {
                    binds.truncate(mark);
                    return false;
                }
                continue;
            }
            // relations share no variables, so the first success per relation
            // gives the lexicographically smallest assignment overall
            let mut found = false;
            for c in cands {
                let before = binds.len();
                if self.try_node(&rel.target, c, binds) {
                    found = true;
                    break;
                }
                binds.truncate(before);
            }
            if !found {
                binds.truncate(mark);
                return false;
            }
        }
        true
    }

    fn result(&self, anchor: usize, binds: Vec<(String, usize)>) -> MatchResult<'t> {
        let b = |id: usize| Binding {
            path: self.nodes[id].path.clone(),
            node: self.nodes[id].node,
        };
        MatchResult {
            anchor: b(anchor),
            bindings: binds.into_iter().map(|(k, id)| (k, b(id))).collect(),
        }
    }
}

/// All matches, one per anchor node, in pre-order of the anchor.
pub fn find_all<'t>(pattern: &Pattern, tree: &'t ParseTree) -> Vec<MatchResult<'t>> {
    let index = Index::new(tree);
    let mut out = Vec::new();
    for id in 0..index.nodes.len() {
        let mut binds = Vec::new();
        if index.try_node(&pattern.root, id, &mut binds) {
            out.push(index.result(id, binds));
        }
    }
    out
}

/// The match whose anchor comes first in pre-order.
pub fn find_first<'t>(pattern: &Pattern, tree: &'t ParseTree) -> Option<MatchResult<'t>> {
    let index = Index::new(tree);
    (0..index.nodes.len()).find_map(|id| {
        let mut binds = Vec::new();
        index
            .try_node(&pattern.root, id, &mut binds)
            .then(|| index.result(id, binds))
    })
}
