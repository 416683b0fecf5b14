//! Derivation trees: the record of which elementary trees combined, where,
//! and by which operation. This is the unit the transfer step consumes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::feat::FeatureStructure;
use crate::tree::NodeAddress;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Operation {
    Substitution,
    Adjunction,
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Substitution => write!(f, "subst"),
            Operation::Adjunction => write!(f, "adj"),
        }
    }
}

/// How an instance entered the derivation: scanned from the input, the
/// empty pro element, or inserted afterwards by argument recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Overt,
    Empty,
    RecoveredList,
    RecoveredPro,
}

/// Path of child indices into a derivation tree (not a Gorn tree address).
pub type DerivPath = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DerivationChild {
    pub op: Operation,
    pub site: NodeAddress,
    pub child: DerivationNode,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DerivationNode {
    pub tree_name: String,
    pub lemma: String,
    pub surface: String,
    pub provenance: Provenance,
    /// Extra feature constraints to fold into named nodes at composition.
    /// Populated by transfer feature links; empty for parser output.
    pub injected: Vec<(NodeAddress, FeatureStructure)>,
    pub children: Vec<DerivationChild>,
}

impl DerivationNode {
    pub fn leaf(tree_name: &str, lemma: &str, surface: &str) -> Self {
        DerivationNode {
            tree_name: String::from(tree_name),
            lemma: String::from(lemma),
            surface: String::from(surface),
            provenance: Provenance::Overt,
            injected: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn with_child(mut self, op: Operation, site: NodeAddress, child: DerivationNode) -> Self {
        self.children.push(DerivationChild { op, site, child });
        self
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&DerivationNode> {
        let mut node = self;
        for &i in path {
            node = &node.children.get(i)?.child;
        }
        Some(node)
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut DerivationNode> {
        let mut node = self;
        for &i in path {
            node = &mut node.children.get_mut(i)?.child;
        }
        Some(node)
    }

    /// Number of elementary-tree instances in the derivation.
    pub fn instance_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|c| c.child.instance_count())
            .sum::<usize>()
    }

    pub fn count_by(&self, pred: &dyn Fn(&DerivationNode) -> bool) -> usize {
        let own = if pred(self) { 1 } else { 0 };
        own + self
            .children
            .iter()
            .map(|c| c.child.count_by(pred))
            .sum::<usize>()
    }

    pub fn empty_count(&self) -> usize {
        self.count_by(&|n| n.provenance == Provenance::Empty)
    }

    pub fn adjunction_count(&self) -> usize {
        self.children
            .iter()
            .map(|c| {
                let own = if c.op == Operation::Adjunction { 1 } else { 0 };
                own + c.child.adjunction_count()
            })
            .sum()
    }

    /// Canonical single-line form, used for deterministic ordering, for
    /// deduplication, and in traces:
    /// `a_tr[pwunsilhaissta/pwunsilhaissta](subst@0:np[...], adj@e:...)`.
    pub fn canonical(&self) -> String {
        let mut s = format!("{}[{}/{}]", self.tree_name, self.lemma, self.surface);
        if !self.children.is_empty() {
            s.push('(');
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str(&format!("{}@{}:{}", c.op, c.site, c.child.canonical()));
            }
            s.push(')');
        }
        s
    }

    /// Ordering key for ambiguity ranking: fewer empty arguments first,
    /// then fewer adjunctions, then the canonical form.
    pub fn rank_key(&self) -> (usize, usize, String) {
        (self.empty_count(), self.adjunction_count(), self.canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_is_stable() {
        let d = DerivationNode::leaf("a_tr", "pwunsilhaissta", "pwunsilhaissta")
            .with_child(
                Operation::Substitution,
                NodeAddress(alloc::vec![0]),
                DerivationNode::leaf("a_np", "ku", "ku"),
            )
            .with_child(
                Operation::Adjunction,
                NodeAddress::root(),
                DerivationNode::leaf("b_comp", "-ko", "-ko"),
            );
        assert_eq!(
            d.canonical(),
            "a_tr[pwunsilhaissta/pwunsilhaissta](subst@0:a_np[ku/ku], adj@e:b_comp[-ko/-ko])"
        );
    }
}
