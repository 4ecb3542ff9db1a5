//! Linked proposition trees: binary trees of rhetorical relations over
//! minimal propositions, with core/context edge labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::relation::RhetoricalRelation;
use crate::tree::ParseTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constituency {
    Core,
    Context,
}

impl fmt::Display for Constituency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constituency::Core => "core",
            Constituency::Context => "context",
        })
    }
}

impl FromStr for Constituency {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "core" => Ok(Constituency::Core),
            "context" => Ok(Constituency::Context),
            _ => Err(format!("unknown constituency label `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClauseType {
    SV,
    SVA,
    SVC,
    SVO,
    SVOO,
    SVOA,
    SVOC,
}

impl ClauseType {
    pub const ALL: [ClauseType; 7] = [
        ClauseType::SV,
        ClauseType::SVA,
        ClauseType::SVC,
        ClauseType::SVO,
        ClauseType::SVOO,
        ClauseType::SVOA,
        ClauseType::SVOC,
    ];
}

impl fmt::Display for ClauseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ClauseType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClauseType::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| format!("unknown clause type `{s}`"))
    }
}

/// A minimal proposition: one simple sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Proposition {
    pub text: Vec<String>,
    pub tree: ParseTree,
    pub clause_type: Option<ClauseType>,
}

impl Proposition {
    pub fn new(tree: ParseTree, clause_type: Option<ClauseType>) -> Self {
        Proposition {
            text: tree.yield_text(),
            tree,
            clause_type,
        }
    }

    pub fn sentence(&self) -> String {
        self.text.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LptNode {
    Relation {
        relation: RhetoricalRelation,
        left: (Constituency, Box<LptNode>),
        right: (Constituency, Box<LptNode>),
    },
    Leaf(Proposition),
}

impl LptNode {
    pub fn relation(
        relation: RhetoricalRelation,
        left: (Constituency, LptNode),
        right: (Constituency, LptNode),
    ) -> Self {
        LptNode::Relation {
            relation,
            left: (left.0, Box::new(left.1)),
            right: (right.0, Box::new(right.1)),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, LptNode::Leaf(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkedPropositionTree {
    pub root: LptNode,
    pub source: Vec<String>,
}

impl LinkedPropositionTree {
    /// Leaves from left to right.
    pub fn leaves_in_order(&self) -> Vec<&Proposition> {
        let mut out = Vec::new();
        walk(&self.root, 0, &mut |p, _| out.push(p));
        out
    }

    /// Context layer of each leaf, in leaf order: the number of context
    /// edges between the root and the leaf.
    pub fn context_layers(&self) -> Vec<usize> {
        let mut out = Vec::new();
        walk(&self.root, 0, &mut |_, layer| out.push(layer));
        out
    }

    pub fn relation_count(&self) -> usize {
        fn count(n: &LptNode) -> usize {
            match n {
                LptNode::Leaf(_) => 0,
                LptNode::Relation { left, right, .. } => 1 + count(&left.1) + count(&right.1),
            }
        }
        count(&self.root)
    }

    /// Relations in pre-order.
    pub fn relations(&self) -> Vec<RhetoricalRelation> {
        fn collect(n: &LptNode, out: &mut Vec<RhetoricalRelation>) {
            if let LptNode::Relation {
                relation,
                left,
                right,
            } = n
            {
                out.push(*relation);
                collect(&left.1, out);
                collect(&right.1, out);
            }
        }
        let mut out = Vec::new();
        collect(&self.root, &mut out);
        out
    }

    /// The relation at the lowest common ancestor of leaves `i` and `j`
    /// (leaf-order indices). `None` when `i == j` or either is out of range.
    pub fn relation_between(&self, i: usize, j: usize) -> Option<RhetoricalRelation> {
        fn leaf_count(n: &LptNode) -> usize {
            match n {
                LptNode::Leaf(_) => 1,
                LptNode::Relation { left, right, .. } => leaf_count(&left.1) + leaf_count(&right.1),
            }
        }
        let (mut lo, mut hi) = (i.min(j), i.max(j));
        if lo == hi || hi >= leaf_count(&self.root) {
            return None;
        }
        let mut n = &self.root;
        while let LptNode::Relation {
            relation,
            left,
            right,
        } = n
        {
            let split = leaf_count(&left.1);
            if hi < split {
                n = &left.1;
            } else if lo >= split {
                lo -= split;
                hi -= split;
                n = &right.1;
            } else {
                return Some(*relation);
            }
        }
        None
    }
}

fn walk<'a>(n: &'a LptNode, layer: usize, f: &mut impl FnMut(&'a Proposition, usize)) {
    match n {
        LptNode::Leaf(p) => f(p, layer),
        LptNode::Relation { left, right, .. } => {
            for (label, child) in [left, right] {
                let next = layer + usize::from(*label == Constituency::Context);
                walk(child, next, f);
            }
        }
    }
}

/// See [`LinkedPropositionTree::context_layers`].
pub fn context_layers(lpt: &LinkedPropositionTree) -> Vec<usize> {
    lpt.context_layers()
}

/// See [`LinkedPropositionTree::leaves_in_order`].
pub fn leaves_in_order(lpt: &LinkedPropositionTree) -> Vec<&Proposition> {
    lpt.leaves_in_order()
}
