//! Elementary trees: node structure, Gorn addresses, and well-formedness.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::feat::FeatureStructure;

/// What a node is for: plain internal structure, a substitution slot, the
/// foot of an auxiliary tree, the lexical anchor, or a fixed terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeMark {
    Internal,
    Substitution,
    Foot,
    Anchor,
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AdjoinConstraint {
    Allow,
    Forbid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TreeKind {
    Initial,
    Auxiliary,
}

/// Gorn address: the path of child indices from the root. The empty path is
/// the root itself.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeAddress(pub Vec<usize>);

impl NodeAddress {
    pub fn root() -> Self {
        NodeAddress(Vec::new())
    }

    pub fn child(&self, idx: usize) -> Self {
        let mut path = self.0.clone();
        path.push(idx);
        NodeAddress(path)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses a dotted child-index path; `""` and `"e"` both denote the root.
    pub fn parse(s: &str) -> Option<Self> {
        if s.is_empty() || s == "e" {
            return Some(NodeAddress::root());
        }
        let mut path = Vec::new();
        for part in s.split('.') {
            path.push(part.parse::<usize>().ok()?);
        }
        Some(NodeAddress(path))
    }
}

impl fmt::Display for NodeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

/// A node of an elementary (or anchored) tree.
///
/// Substitution nodes carry only a top feature structure; their `bottom`
/// must stay empty. Terminal nodes use `label` as the surface token. Anchor
/// nodes are leaves whose `surface` is filled at instantiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub label: String,
    pub mark: NodeMark,
    pub top: FeatureStructure,
    pub bottom: FeatureStructure,
    pub children: Vec<TreeNode>,
    pub adjoin_constraint: AdjoinConstraint,
    /// Slot label (NP0, NP2, S1, ...) for substitution nodes.
    pub slot: Option<String>,
    /// Whether this substitution slot may be left empty (pro-drop).
    pub droppable: bool,
    /// Lexical material, filled in at anchoring for anchor nodes.
    pub surface: Option<String>,
}

impl TreeNode {
    pub fn new(label: &str, mark: NodeMark) -> Self {
        TreeNode {
            label: String::from(label),
            mark,
            top: FeatureStructure::new(),
            bottom: FeatureStructure::new(),
            children: Vec::new(),
            adjoin_constraint: AdjoinConstraint::Allow,
            slot: None,
            droppable: false,
            surface: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn get(&self, addr: &NodeAddress) -> Option<&TreeNode> {
        let mut node = self;
        for &idx in &addr.0 {
            node = node.children.get(idx)?;
        }
        Some(node)
    }

    pub fn get_mut(&mut self, addr: &NodeAddress) -> Option<&mut TreeNode> {
        let mut node = self;
        for &idx in &addr.0 {
            node = node.children.get_mut(idx)?;
        }
        Some(node)
    }

    /// Depth-first, left-to-right walk paired with addresses.
    pub fn walk<'a>(&'a self, out: &mut Vec<(NodeAddress, &'a TreeNode)>) {
        fn go<'a>(node: &'a TreeNode, addr: NodeAddress, out: &mut Vec<(NodeAddress, &'a TreeNode)>) {
            out.push((addr.clone(), node));
            for (i, c) in node.children.iter().enumerate() {
                go(c, addr.child(i), out);
            }
        }
        go(self, NodeAddress::root(), out);
    }
}

/// A named tree template of the grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryTree {
    pub name: String,
    pub kind: TreeKind,
    pub root: TreeNode,
    /// Slot label -> address of the substitution node.
    pub arg_slots: BTreeMap<String, NodeAddress>,
    pub anchor_addresses: Vec<NodeAddress>,
}

impl ElementaryTree {
    /// Builds a tree, deriving `arg_slots` and `anchor_addresses` from the
    /// node marks.
    pub fn new(name: &str, kind: TreeKind, root: TreeNode) -> Self {
        let mut nodes = Vec::new();
        root.walk(&mut nodes);
        let mut arg_slots = BTreeMap::new();
        let mut anchor_addresses = Vec::new();
        for (addr, node) in &nodes {
            match node.mark {
                NodeMark::Substitution => {
                    if let Some(slot) = &node.slot {
                        arg_slots.insert(slot.clone(), addr.clone());
                    }
                }
                NodeMark::Anchor => anchor_addresses.push(addr.clone()),
                _ => {}
            }
        }
        ElementaryTree {
            name: String::from(name),
            kind,
            root,
            arg_slots,
            anchor_addresses,
        }
    }

    pub fn foot_address(&self) -> Option<NodeAddress> {
        let mut nodes = Vec::new();
        self.root.walk(&mut nodes);
        nodes
            .into_iter()
            .find(|(_, n)| n.mark == NodeMark::Foot)
            .map(|(a, _)| a)
    }

    pub fn node_at(&self, addr: &NodeAddress) -> Option<&TreeNode> {
        self.root.get(addr)
    }

    /// Slot label for a substitution address, if any.
    pub fn slot_at(&self, addr: &NodeAddress) -> Option<&str> {
        self.arg_slots
            .iter()
            .find(|(_, a)| *a == addr)
            .map(|(s, _)| s.as_str())
    }

    pub fn droppable_slots(&self) -> BTreeSet<String> {
        self.arg_slots
            .iter()
            .filter(|(_, addr)| {
                self.node_at(addr).map(|n| n.droppable).unwrap_or(false)
            })
            .map(|(s, _)| s.clone())
            .collect()
    }
}

/// One well-formedness violation found by [`validate_tree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub tree: String,
    pub address: NodeAddress,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}: {}", self.tree, self.address, self.rule)
    }
}

/// Checks the structural invariants of an elementary tree. Violations are
/// data, not failures: an empty report means the tree is well formed.
pub fn validate_tree(tree: &ElementaryTree) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut nodes = Vec::new();
    tree.root.walk(&mut nodes);

    let mut report = |addr: &NodeAddress, rule: String| {
        out.push(Violation {
            tree: tree.name.clone(),
            address: addr.clone(),
            rule,
        });
    };

    let mut foot_addrs = Vec::new();
    let mut anchor_count = 0usize;
    for (addr, node) in &nodes {
        match node.mark {
            NodeMark::Internal => {
                if node.is_leaf() {
                    report(addr, String::from("internal node must have children"));
                }
            }
            NodeMark::Substitution => {
                if !node.is_leaf() {
                    report(addr, String::from("substitution node must be a leaf"));
                }
                if !node.bottom.is_empty() {
                    report(
                        addr,
                        String::from("substitution node carries only a top feature structure"),
                    );
                }
            }
            NodeMark::Foot => {
                if !node.is_leaf() {
                    report(addr, String::from("foot node must be a leaf"));
                }
                foot_addrs.push(addr.clone());
            }
            NodeMark::Anchor => {
                if !node.is_leaf() {
                    report(addr, String::from("anchor node must be a leaf"));
                }
                anchor_count += 1;
            }
            NodeMark::Terminal => {
                if !node.is_leaf() {
                    report(addr, String::from("terminal node must be a leaf"));
                }
            }
        }
        if node.droppable && node.mark != NodeMark::Substitution {
            report(addr, String::from("only substitution nodes can be droppable"));
        }
    }

    match tree.kind {
        TreeKind::Initial => {
            for a in &foot_addrs {
                report(a, String::from("initial tree must not contain a foot node"));
            }
        }
        TreeKind::Auxiliary => {
            if foot_addrs.len() != 1 {
                report(
                    &NodeAddress::root(),
                    format!(
                        "auxiliary tree must have exactly one foot node, found {}",
                        foot_addrs.len()
                    ),
                );
            }
            if let Some(first) = foot_addrs.first() {
                let foot = tree.node_at(first).expect("walked address");
                if foot.label != tree.root.label {
                    report(
                        first,
                        format!(
                            "foot label `{}` must equal root label `{}`",
                            foot.label, tree.root.label
                        ),
                    );
                }
            }
        }
    }

    if anchor_count > 1 {
        report(
            &NodeAddress::root(),
            format!("at most one anchor node per tree, found {anchor_count}"),
        );
    }

    for (slot, addr) in &tree.arg_slots {
        match tree.node_at(addr) {
            Some(n) if n.mark == NodeMark::Substitution => {}
            _ => report(
                addr,
                format!("arg slot `{slot}` must resolve to a substitution node"),
            ),
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feat::fs;

    fn det_aux() -> ElementaryTree {
        // N -> Det* N (determiner auxiliary tree, in the shape the bundled
        // grammars use: anchor on the left, foot on the right)
        let mut root = TreeNode::new("N", NodeMark::Internal);
        let mut det = TreeNode::new("Det", NodeMark::Anchor);
        det.top = fs(&[]);
        let foot = TreeNode::new("N", NodeMark::Foot);
        root.children.push(det);
        root.children.push(foot);
        ElementaryTree::new("b_det", TreeKind::Auxiliary, root)
    }

    #[test]
    fn well_formed_det_tree() {
        assert!(validate_tree(&det_aux()).is_empty());
    }

    #[test]
    fn initial_tree_with_foot_is_reported() {
        let mut t = det_aux();
        t.kind = TreeKind::Initial;
        let report = validate_tree(&t);
        assert_eq!(report.len(), 1);
        assert!(report[0].rule.contains("initial tree"));
    }

    #[test]
    fn two_foot_nodes_are_reported() {
        let mut t = det_aux();
        t.root.children[0] = TreeNode::new("N", NodeMark::Foot);
        let report = validate_tree(&t);
        assert!(report.iter().any(|v| v.rule.contains("exactly one foot")));
    }

    #[test]
    fn foot_label_must_match_root() {
        let mut t = det_aux();
        t.root.children[1].label = String::from("NP");
        let report = validate_tree(&t);
        assert!(report.iter().any(|v| v.rule.contains("must equal root label")));
    }

    #[test]
    fn address_roundtrip() {
        let a = NodeAddress(alloc::vec![0, 1, 2]);
        assert_eq!(NodeAddress::parse("0.1.2"), Some(a.clone()));
        assert_eq!(alloc::format!("{a}"), "0.1.2");
        assert_eq!(NodeAddress::parse("e"), Some(NodeAddress::root()));
        assert_eq!(NodeAddress::parse(""), Some(NodeAddress::root()));
        assert_eq!(alloc::format!("{}", NodeAddress::root()), "e");
    }
}
