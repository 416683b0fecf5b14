//! Composition of derivation trees into derived trees, and the FB-LTAG
//! feature equations for substitution, adjunction, and the end-of-derivation
//! top/bottom collapse.
//!
//! During composition every derived node accumulates *lists* of top and
//! bottom feature-structure contributions. Flat unification is associative
//! and commutative on success, so collapsing the lists eagerly (after each
//! combination, rejecting early) or only at the end (finalize) accepts and
//! rejects exactly the same derivations; eager mode is purely a pruning
//! optimization.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::derivation::{DerivPath, DerivationNode, Operation, Provenance};
use crate::feat::{unify, unify_all, Bindings, FeatureStructure, UnifyFailure};
use crate::grammar::{anchor_tree, instantiate_anchorless, AnchorError, AnchoredTree, Grammar};
use crate::tree::{AdjoinConstraint, NodeAddress, NodeMark, TreeNode};

/// Whether feature checks run at every combination step or only at the
/// final top/bottom collapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Eager,
    Deferred,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComposeError {
    UnknownEntry {
        tree: String,
        lemma: String,
    },
    UnknownTree {
        tree: String,
    },
    Anchor(AnchorError),
    NoSuchSite {
        path: DerivPath,
        address: NodeAddress,
    },
    BadSite {
        path: DerivPath,
        address: NodeAddress,
        detail: String,
    },
    Clash {
        path: DerivPath,
        address: NodeAddress,
        detail: String,
    },
}

impl fmt::Display for ComposeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComposeError::UnknownEntry { tree, lemma } => {
                write!(f, "no lexical entry `{lemma}` anchoring tree `{tree}`")
            }
            ComposeError::UnknownTree { tree } => write!(f, "unknown tree `{tree}`"),
            ComposeError::Anchor(e) => write!(f, "{e}"),
            ComposeError::NoSuchSite { path, address } => {
                write!(f, "no node at address {address} (instance {path:?})")
            }
            ComposeError::BadSite { path, address, detail } => {
                write!(f, "bad site {address} (instance {path:?}): {detail}")
            }
            ComposeError::Clash { path, address, detail } => {
                write!(f, "feature clash at {address} (instance {path:?}): {detail}")
            }
        }
    }
}

/// A derived tree with finalized features, plus the derivation it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedTree {
    pub root: TreeNode,
    pub source_derivation: DerivationNode,
}

/// An empty (dropped) argument position, in left-to-right surface order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptySlot {
    pub verb_path: DerivPath,
    pub verb_lemma: String,
    pub slot: String,
    pub child_path: DerivPath,
    pub restrictions: FeatureStructure,
}

/// Result of composing a derivation: the derived tree, the finalized
/// feature structure of every (instance, elementary address) pair, and the
/// empty argument positions in surface order.
#[derive(Debug, Clone)]
pub struct Composition {
    pub derived: DerivedTree,
    pub node_features: BTreeMap<(DerivPath, NodeAddress), FeatureStructure>,
    pub empty_slots: Vec<EmptySlot>,
    /// Instance paths ordered by first appearance in the derived tree's
    /// pre-order walk, i.e. surface order.
    pub instance_order: Vec<DerivPath>,
}

// ---------------------------------------------------------------------------
// Working representation

#[derive(Debug, Clone)]
struct WorkNode {
    label: String,
    mark: NodeMark,
    adjoin: AdjoinConstraint,
    tops: Vec<FeatureStructure>,
    bottoms: Vec<FeatureStructure>,
    surface: Option<String>,
    origins: Vec<(DerivPath, NodeAddress)>,
    children: Vec<WorkNode>,
}

impl WorkNode {
    fn from_anchored(tree: &AnchoredTree, path: &DerivPath, prefix: &str) -> WorkNode {
        fn go(node: &TreeNode, addr: NodeAddress, path: &DerivPath, prefix: &str) -> WorkNode {
            let mut tops = Vec::new();
            if !node.top.is_empty() {
                tops.push(node.top.rename_vars(prefix));
            }
            let mut bottoms = Vec::new();
            if !node.bottom.is_empty() {
                bottoms.push(node.bottom.rename_vars(prefix));
            }
            WorkNode {
                label: node.label.clone(),
                mark: node.mark,
                adjoin: node.adjoin_constraint,
                tops,
                bottoms,
                surface: node.surface.clone(),
                origins: alloc::vec![(path.clone(), addr.clone())],
                children: node
                    .children
                    .iter()
                    .enumerate()
                    .map(|(i, c)| go(c, addr.child(i), path, prefix))
                    .collect(),
            }
        }
        go(&tree.root, NodeAddress::root(), path, prefix)
    }

    fn get_mut(&mut self, idx_path: &[usize]) -> &mut WorkNode {
        let mut node = self;
        for &i in idx_path {
            node = &mut node.children[i];
        }
        node
    }

    fn find_by_origin(&self, key: &(DerivPath, NodeAddress)) -> Option<Vec<usize>> {
        fn go(node: &WorkNode, key: &(DerivPath, NodeAddress), acc: &mut Vec<usize>) -> bool {
            if node.origins.iter().any(|o| o == key) {
                return true;
            }
            for (i, c) in node.children.iter().enumerate() {
                acc.push(i);
                if go(c, key, acc) {
                    return true;
                }
                acc.pop();
            }
            false
        }
        let mut acc = Vec::new();
        if go(self, key, &mut acc) {
            Some(acc)
        } else {
            None
        }
    }

    fn find_foot(&self) -> Option<Vec<usize>> {
        fn go(node: &WorkNode, acc: &mut Vec<usize>) -> bool {
            if node.mark == NodeMark::Foot {
                return true;
            }
            for (i, c) in node.children.iter().enumerate() {
                acc.push(i);
                if go(c, acc) {
                    return true;
                }
                acc.pop();
            }
            false
        }
        let mut acc = Vec::new();
        if go(self, &mut acc) {
            Some(acc)
        } else {
            None
        }
    }

    /// Pre-order walk (leaves left to right = surface order).
    fn walk<'a>(&'a self, out: &mut Vec<&'a WorkNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }
}

struct Ctx<'g> {
    grammar: &'g Grammar,
    mode: CheckMode,
    eager_env: Bindings,
}

impl<'g> Ctx<'g> {
    fn trial(
        &mut self,
        fss: &[FeatureStructure],
        path: &DerivPath,
        addr: &NodeAddress,
    ) -> Result<(), ComposeError> {
        if self.mode == CheckMode::Deferred {
            return Ok(());
        }
        match unify_all(fss.iter(), &self.eager_env) {
            Ok((_, env)) => {
                self.eager_env = env;
                Ok(())
            }
            Err(e) => Err(ComposeError::Clash {
                path: path.clone(),
                address: addr.clone(),
                detail: format!("{e}"),
            }),
        }
    }
}

fn instantiate(
    d: &DerivationNode,
    grammar: &Grammar,
) -> Result<AnchoredTree, ComposeError> {
    let template = grammar
        .tree(&d.tree_name)
        .ok_or_else(|| ComposeError::UnknownTree {
            tree: d.tree_name.clone(),
        })?;
    if template.anchor_addresses.is_empty() {
        return Ok(instantiate_anchorless(template, grammar.language));
    }
    let entry = grammar
        .entries
        .iter()
        .find(|e| e.lemma == d.lemma && e.tree_names.iter().any(|n| n == &d.tree_name))
        .ok_or_else(|| ComposeError::UnknownEntry {
            tree: d.tree_name.clone(),
            lemma: d.lemma.clone(),
        })?;
    anchor_tree(template, entry, &d.surface).map_err(ComposeError::Anchor)
}

fn var_prefix(path: &DerivPath) -> String {
    let mut s = String::from("i");
    for (i, p) in path.iter().enumerate() {
        if i > 0 {
            s.push('_');
        }
        s.push_str(&format!("{p}"));
    }
    s.push('.');
    s
}

fn build(d: &DerivationNode, path: DerivPath, ctx: &mut Ctx) -> Result<WorkNode, ComposeError> {
    let anchored = instantiate(d, ctx.grammar)?;
    let mut work = WorkNode::from_anchored(&anchored, &path, &var_prefix(&path));

    // Extra constraints injected by transfer feature links.
    for (addr, fs) in &d.injected {
        let key = (path.clone(), addr.clone());
        let idx = work
            .find_by_origin(&key)
            .ok_or_else(|| ComposeError::NoSuchSite {
                path: path.clone(),
                address: addr.clone(),
            })?;
        let node = work.get_mut(&idx);
        node.tops.push(fs.clone());
        let tops = node.tops.clone();
        ctx.trial(&tops, &path, addr)?;
    }

    for (i, child) in d.children.iter().enumerate() {
        let mut child_path = path.clone();
        child_path.push(i);
        let child_work = build(&child.child, child_path, ctx)?;
        let key = (path.clone(), child.site.clone());
        let idx = work
            .find_by_origin(&key)
            .ok_or_else(|| ComposeError::NoSuchSite {
                path: path.clone(),
                address: child.site.clone(),
            })?;

        match child.op {
            Operation::Substitution => {
                let site = work.get_mut(&idx);
                if site.mark != NodeMark::Substitution {
                    return Err(ComposeError::BadSite {
                        path: path.clone(),
                        address: child.site.clone(),
                        detail: String::from("substitution at a non-substitution node"),
                    });
                }
                if site.label != child_work.label {
                    return Err(ComposeError::BadSite {
                        path: path.clone(),
                        address: child.site.clone(),
                        detail: format!(
                            "label mismatch: slot `{}` vs substituted `{}`",
                            site.label, child_work.label
                        ),
                    });
                }
                // top = unify of the two tops; bottom comes from the
                // substituting tree's root.
                let mut merged = child_work;
                let mut tops = site.tops.clone();
                tops.append(&mut merged.tops);
                merged.tops = tops;
                merged.origins.extend(site.origins.iter().cloned());
                let trial_tops = merged.tops.clone();
                *site = merged;
                ctx.trial(&trial_tops, &path, &child.site)?;
            }
            Operation::Adjunction => {
                let site_snapshot = work.get_mut(&idx).clone();
                if site_snapshot.mark != NodeMark::Internal {
                    return Err(ComposeError::BadSite {
                        path: path.clone(),
                        address: child.site.clone(),
                        detail: String::from("adjunction at a non-internal node"),
                    });
                }
                if site_snapshot.adjoin == AdjoinConstraint::Forbid {
                    return Err(ComposeError::BadSite {
                        path: path.clone(),
                        address: child.site.clone(),
                        detail: String::from("adjunction forbidden at this node"),
                    });
                }
                let mut aux = child_work;
                let foot_idx = aux.find_foot().ok_or_else(|| ComposeError::BadSite {
                    path: path.clone(),
                    address: child.site.clone(),
                    detail: String::from("adjoined tree has no foot node"),
                })?;
                if aux.label != site_snapshot.label
                    || aux.get_mut(&foot_idx).label != site_snapshot.label
                {
                    return Err(ComposeError::BadSite {
                        path: path.clone(),
                        address: child.site.clone(),
                        detail: format!(
                            "adjunction label mismatch at `{}`",
                            site_snapshot.label
                        ),
                    });
                }

                // The adjoined node splits: its top goes to the auxiliary
                // root (upper), its bottom to the foot (lower), which keeps
                // the site's children.
                let foot = aux.get_mut(&foot_idx);
                let lower = WorkNode {
                    label: site_snapshot.label.clone(),
                    mark: site_snapshot.mark,
                    adjoin: site_snapshot.adjoin,
                    tops: foot.tops.clone(),
                    bottoms: {
                        let mut b = site_snapshot.bottoms.clone();
                        b.extend(foot.bottoms.iter().cloned());
                        b
                    },
                    surface: site_snapshot.surface.clone(),
                    origins: foot.origins.clone(),
                    children: site_snapshot.children.clone(),
                };
                let lower_bottoms = lower.bottoms.clone();
                *foot = lower;
                aux.tops.extend(site_snapshot.tops.iter().cloned());
                aux.origins.extend(site_snapshot.origins.iter().cloned());
                let upper_tops = aux.tops.clone();
                *work.get_mut(&idx) = aux;

                ctx.trial(&upper_tops, &path, &child.site)?;
                ctx.trial(&lower_bottoms, &path, &child.site)?;
            }
        }
    }

    Ok(work)
}

// ---------------------------------------------------------------------------
// Public operations

/// Composes a derivation into a derived tree, applying anchoring, the
/// substitution/adjunction feature equations, and the final top/bottom
/// collapse at every node.
pub fn compose(
    d: &DerivationNode,
    grammar: &Grammar,
    mode: CheckMode,
) -> Result<Composition, ComposeError> {
    let mut ctx = Ctx {
        grammar,
        mode,
        eager_env: Bindings::new(),
    };
    let work = build(d, DerivPath::new(), &mut ctx)?;

    // Final collapse: unify all contributions per node under one global
    // environment, then the node's top against its bottom.
    let mut env = Bindings::new();
    let mut nodes = Vec::new();
    work.walk(&mut nodes);
    let mut finals: Vec<FeatureStructure> = Vec::new();
    for node in &nodes {
        let (top, env_t) = unify_all(node.tops.iter(), &env).map_err(|e| clash_of(node, &e))?;
        let (bottom, env_b) =
            unify_all(node.bottoms.iter(), &env_t).map_err(|e| clash_of(node, &e))?;
        let (collapsed, env_f) = unify(&top, &bottom, &env_b).map_err(|e| clash_of(node, &e))?;
        env = env_f;
        finals.push(collapsed);
    }

    let mut node_features = BTreeMap::new();
    let mut instance_order: Vec<DerivPath> = Vec::new();
    for (node, fs) in nodes.iter().zip(finals.iter()) {
        let resolved = fs.resolve(&env);
        for origin in &node.origins {
            node_features.entry(origin.clone()).or_insert_with(|| resolved.clone());
            if origin.1.is_root() && !instance_order.contains(&origin.0) {
                instance_order.push(origin.0.clone());
            }
        }
    }

    // Empty argument positions, in surface order (pre-order walk).
    let mut empty_slots = Vec::new();
    for node in &nodes {
        let empty_origin = node.origins.iter().find(|(p, a)| {
            a.is_root()
                && d.at_path(p)
                    .map(|n| n.provenance == Provenance::Empty)
                    .unwrap_or(false)
        });
        if let Some((child_path, _)) = empty_origin {
            let parent_path: DerivPath =
                child_path[..child_path.len().saturating_sub(1)].to_vec();
            if let Some((_, slot_addr)) =
                node.origins.iter().find(|(p, _)| *p == parent_path && p != child_path)
            {
                if let (Some(parent), Some(parent_tree)) = (
                    d.at_path(&parent_path),
                    d.at_path(&parent_path)
                        .and_then(|n| grammar.tree(&n.tree_name)),
                ) {
                    let slot = String::from(parent_tree.slot_at(slot_addr).unwrap_or("?"));
                    let restrictions = grammar
                        .entries
                        .iter()
                        .find(|e| {
                            e.lemma == parent.lemma
                                && e.tree_names.iter().any(|n| n == &parent.tree_name)
                        })
                        .and_then(|e| e.selectional_restrictions.get(&slot).cloned())
                        .unwrap_or_default();
                    empty_slots.push(EmptySlot {
                        verb_path: parent_path,
                        verb_lemma: parent.lemma.clone(),
                        slot,
                        child_path: child_path.clone(),
                        restrictions,
                    });
                }
            }
        }
    }

    // Materialize the final derived tree.
    fn materialize(node: &WorkNode, finals: &mut core::slice::Iter<FeatureStructure>, env: &Bindings) -> TreeNode {
        let fs = finals.next().expect("one final FS per node").resolve(env);
        let mut out = TreeNode::new(&node.label, node.mark);
        out.top = fs;
        out.surface = node.surface.clone();
        out.adjoin_constraint = node.adjoin;
        out.children = node
            .children
            .iter()
            .map(|c| materialize(c, finals, env))
            .collect();
        out
    }
    let mut it = finals.iter();
    let root = materialize(&work, &mut it, &env);

    Ok(Composition {
        derived: DerivedTree {
            root,
            source_derivation: d.clone(),
        },
        node_features,
        empty_slots,
        instance_order,
    })
}

fn clash_of(node: &WorkNode, e: &UnifyFailure) -> ComposeError {
    let (path, addr) = node
        .origins
        .first()
        .cloned()
        .unwrap_or((DerivPath::new(), NodeAddress::root()));
    ComposeError::Clash {
        path,
        address: addr,
        detail: format!("{e}"),
    }
}

/// Left-to-right terminal/anchor surface sequence of a derived tree,
/// omitting empty (dropped-argument) leaves.
pub fn yield_of(t: &DerivedTree) -> Vec<String> {
    let mut out = Vec::new();
    fn go(node: &TreeNode, out: &mut Vec<String>) {
        if node.is_leaf() {
            match node.mark {
                NodeMark::Terminal => out.push(node.label.clone()),
                NodeMark::Anchor => {
                    if let Some(s) = &node.surface {
                        if !s.is_empty() {
                            out.push(s.clone());
                        }
                    }
                }
                _ => {}
            }
        }
        for c in &node.children {
            go(c, out);
        }
    }
    go(&t.root, &mut out);
    out
}

/// Empty argument positions of a derivation, in surface order, each paired
/// with the anchoring verb's selectional restrictions for that slot.
pub fn empty_slots(
    d: &DerivationNode,
    grammar: &Grammar,
) -> Result<Vec<EmptySlot>, ComposeError> {
    Ok(compose(d, grammar, CheckMode::Deferred)?.empty_slots)
}

// ---------------------------------------------------------------------------
// Node-level feature equations (the unification-module view of the same
// operations, over plain tree nodes)

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureOpError {
    Precondition(String),
    Clash(UnifyFailure),
}

impl fmt::Display for FeatureOpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureOpError::Precondition(s) => write!(f, "precondition violated: {s}"),
            FeatureOpError::Clash(e) => write!(f, "{e}"),
        }
    }
}

/// Substitution feature equation: the merged node's top is the unification
/// of the two tops; its bottom is the substituting root's bottom.
pub fn substitute_features(
    site: &TreeNode,
    sub_root: &TreeNode,
    env: &Bindings,
) -> Result<(TreeNode, Bindings), FeatureOpError> {
    if site.mark != NodeMark::Substitution {
        return Err(FeatureOpError::Precondition(String::from(
            "site is not a substitution node",
        )));
    }
    if site.label != sub_root.label {
        return Err(FeatureOpError::Precondition(format!(
            "label mismatch `{}` vs `{}`",
            site.label, sub_root.label
        )));
    }
    let (top, env) = unify(&site.top, &sub_root.top, env).map_err(FeatureOpError::Clash)?;
    let mut merged = sub_root.clone();
    merged.top = top;
    merged.mark = sub_root.mark;
    Ok((merged, env))
}

/// Adjunction feature equation: the site splits; its top unifies with the
/// auxiliary root's top (upper node) and its bottom with the foot's bottom
/// (lower node, which keeps the site's children).
pub fn adjoin_features(
    site: &TreeNode,
    aux_root: &TreeNode,
    aux_foot: &TreeNode,
    env: &Bindings,
) -> Result<(TreeNode, TreeNode, Bindings), FeatureOpError> {
    if site.adjoin_constraint == AdjoinConstraint::Forbid {
        return Err(FeatureOpError::Precondition(String::from(
            "adjunction forbidden at site",
        )));
    }
    if site.label != aux_root.label || site.label != aux_foot.label {
        return Err(FeatureOpError::Precondition(format!(
            "adjunction label mismatch at `{}`",
            site.label
        )));
    }
    let (upper_top, env) = unify(&site.top, &aux_root.top, env).map_err(FeatureOpError::Clash)?;
    let (lower_bottom, env) =
        unify(&site.bottom, &aux_foot.bottom, &env).map_err(FeatureOpError::Clash)?;
    let mut upper = site.clone();
    upper.top = upper_top;
    upper.bottom = aux_root.bottom.clone();
    upper.children = Vec::new();
    let mut lower = site.clone();
    lower.top = aux_foot.top.clone();
    lower.bottom = lower_bottom;
    Ok((upper, lower, env))
}

/// End-of-derivation collapse of one node: unify its top and bottom.
pub fn finalize_node(
    n: &TreeNode,
    env: &Bindings,
) -> Result<(FeatureStructure, Bindings), FeatureOpError> {
    unify(&n.top, &n.bottom, env).map_err(FeatureOpError::Clash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feat::fs;

    fn subst_site(top: FeatureStructure) -> TreeNode {
        let mut n = TreeNode::new("NP", NodeMark::Substitution);
        n.top = top;
        n
    }

    fn np_root(top: FeatureStructure, bottom: FeatureStructure) -> TreeNode {
        let mut n = TreeNode::new("NP", NodeMark::Internal);
        n.top = top;
        n.bottom = bottom;
        n.children.push(TreeNode::new("N", NodeMark::Anchor));
        n
    }

    #[test]
    fn substitution_identity_unification() {
        let site = subst_site(fs(&[("case", "nom")]));
        let sub = np_root(fs(&[]), fs(&[]));
        let (merged, _) = substitute_features(&site, &sub, &Bindings::new()).unwrap();
        assert_eq!(merged.top, fs(&[("case", "nom")]));
        assert!(merged.bottom.is_empty());
    }

    #[test]
    fn substitution_matching_type_succeeds() {
        let site = subst_site(fs(&[("type", "footwear")]));
        let sub = np_root(fs(&[("type", "footwear")]), fs(&[]));
        assert!(substitute_features(&site, &sub, &Bindings::new()).is_ok());
    }

    #[test]
    fn substitution_type_clash_fails() {
        let site = subst_site(fs(&[("type", "footwear")]));
        let sub = np_root(fs(&[("type", "bodywear")]), fs(&[]));
        let err = substitute_features(&site, &sub, &Bindings::new()).unwrap_err();
        assert!(matches!(err, FeatureOpError::Clash(_)));
    }

    #[test]
    fn adjunction_splits_node() {
        let mut site = TreeNode::new("NP", NodeMark::Internal);
        site.bottom = fs(&[("final", "v")]);
        site.children.push(TreeNode::new("N", NodeMark::Internal));
        let mut aux_root = TreeNode::new("NP", NodeMark::Internal);
        aux_root.bottom = fs(&[("topic", "+")]);
        let aux_foot = TreeNode::new("NP", NodeMark::Foot);
        let (upper, lower, _) =
            adjoin_features(&site, &aux_root, &aux_foot, &Bindings::new()).unwrap();
        assert_eq!(upper.bottom, fs(&[("topic", "+")]));
        assert_eq!(lower.bottom, fs(&[("final", "v")]));
        assert_eq!(lower.children.len(), 1);
    }

    #[test]
    fn adjunction_forbidden_is_precondition_error() {
        let mut site = TreeNode::new("S", NodeMark::Internal);
        site.adjoin_constraint = AdjoinConstraint::Forbid;
        let aux_root = TreeNode::new("S", NodeMark::Internal);
        let aux_foot = TreeNode::new("S", NodeMark::Foot);
        let err = adjoin_features(&site, &aux_root, &aux_foot, &Bindings::new()).unwrap_err();
        assert!(matches!(err, FeatureOpError::Precondition(_)));
    }

    #[test]
    fn finalize_returns_bottom_when_top_subsumed() {
        let mut n = TreeNode::new("S", NodeMark::Internal);
        n.bottom = fs(&[("wh", "-")]);
        let (out, _) = finalize_node(&n, &Bindings::new()).unwrap();
        assert_eq!(out, fs(&[("wh", "-")]));
    }
}
