//! Synchronous transfer over derivation trees.
//!
//! Each transfer entry pairs a source (language, tree, lemma) with a target
//! one, plus links between node addresses of the two elementary trees. A
//! source derivation is mapped node by node: the entry chosen for a node
//! rewrites it, and the node's children re-attach at the linked target
//! addresses. Entries can be one-to-many (several entries for the same
//! source), guarded by feature preconditions on the source derivation's
//! finalized node features, or map to nothing (particles that simply vanish
//! in the other language).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::derivation::{DerivPath, DerivationChild, DerivationNode};
use crate::feat::{unify, Bindings, FeatureStructure, FeatureValue};
use crate::grammar::{Grammar, Language};
use crate::tree::NodeAddress;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferSide {
    pub language: Language,
    pub tree: String,
    pub lemma: String,
}

/// Copies one feature value from a source node to a target node at
/// composition time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLink {
    pub source_addr: NodeAddress,
    pub source_feature: String,
    pub target_addr: NodeAddress,
    pub target_feature: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferEntry {
    pub name: String,
    pub source: TransferSide,
    /// `None` means the source subtree is deleted on transfer.
    pub target: Option<TransferSide>,
    /// source address -> target address
    pub node_links: Vec<(NodeAddress, NodeAddress)>,
    pub feature_links: Vec<FeatureLink>,
    /// Required features on the source derivation's finalized node features,
    /// keyed by source tree address (the wh guards of the indicative /
    /// extraction entries).
    pub precondition: Vec<(NodeAddress, FeatureStructure)>,
    pub bidirectional: bool,
}

#[derive(Debug, Clone, Default)]
pub struct TransferLexicon {
    pub entries: Vec<TransferEntry>,
}

/// A transfer entry oriented for one direction of use.
#[derive(Debug, Clone)]
pub struct ResolvedEntry {
    pub name: String,
    pub target: Option<(String, String)>,
    pub links: BTreeMap<NodeAddress, NodeAddress>,
    pub feature_links: Vec<FeatureLink>,
    pub precondition: Vec<(NodeAddress, FeatureStructure)>,
}

impl TransferLexicon {
    pub fn new(entries: Vec<TransferEntry>) -> Self {
        TransferLexicon { entries }
    }

    /// Entries applicable to a source instance in the given direction, in
    /// lexicon order. Bidirectional entries match from either side; used
    /// backwards, their links invert and their preconditions are remapped
    /// through the node links.
    pub fn candidates(&self, from: Language, tree: &str, lemma: &str) -> Vec<ResolvedEntry> {
        let mut out = Vec::new();
        for e in &self.entries {
            if e.source.language == from && e.source.tree == tree && e.source.lemma == lemma {
                out.push(ResolvedEntry {
                    name: e.name.clone(),
                    target: e
                        .target
                        .as_ref()
                        .map(|t| (t.tree.clone(), t.lemma.clone())),
                    links: e.node_links.iter().cloned().collect(),
                    feature_links: e.feature_links.clone(),
                    precondition: e.precondition.clone(),
                });
            }
            if e.bidirectional {
                if let Some(t) = &e.target {
                    if t.language == from && t.tree == tree && t.lemma == lemma {
                        let forward: BTreeMap<NodeAddress, NodeAddress> =
                            e.node_links.iter().cloned().collect();
                        let precondition = e
                            .precondition
                            .iter()
                            .filter_map(|(addr, fs)| {
                                forward.get(addr).map(|t| (t.clone(), fs.clone()))
                            })
                            .collect();
                        out.push(ResolvedEntry {
                            name: e.name.clone(),
                            target: Some((e.source.tree.clone(), e.source.lemma.clone())),
                            links: e
                                .node_links
                                .iter()
                                .map(|(s, t)| (t.clone(), s.clone()))
                                .collect(),
                            feature_links: e
                                .feature_links
                                .iter()
                                .map(|fl| FeatureLink {
                                    source_addr: fl.target_addr.clone(),
                                    source_feature: fl.target_feature.clone(),
                                    target_addr: fl.source_addr.clone(),
                                    target_feature: fl.source_feature.clone(),
                                })
                                .collect(),
                            precondition,
                        });
                    }
                }
            }
        }
        out
    }

    /// Cross-reference check against the two grammars: every side must name
    /// an existing tree and (for anchored trees) a lexical entry, and every
    /// link address must exist in its tree.
    pub fn validate(&self, ko: &Grammar, en: &Grammar) -> Vec<String> {
        let mut out = Vec::new();
        let grammar_of = |l: Language| -> &Grammar {
            match l {
                Language::Ko => ko,
                Language::En => en,
            }
        };
        for e in &self.entries {
            let mut sides = alloc::vec![(&e.source, "source")];
            if let Some(t) = &e.target {
                sides.push((t, "target"));
            }
            for (side, role) in sides {
                let g = grammar_of(side.language);
                match g.tree(&side.tree) {
                    None => out.push(format!(
                        "entry `{}`: {role} tree `{}` not in {} grammar",
                        e.name, side.tree, side.language
                    )),
                    Some(tree) => {
                        let links = e.node_links.iter().map(|(s, t)| match role {
                            "source" => s,
                            _ => t,
                        });
                        for addr in links {
                            if tree.node_at(addr).is_none() {
                                out.push(format!(
                                    "entry `{}`: no node {addr} in {role} tree `{}`",
                                    e.name, side.tree
                                ));
                            }
                        }
                        if !tree.anchor_addresses.is_empty()
                            && !g.entries.iter().any(|le| {
                                le.lemma == side.lemma
                                    && le.tree_names.iter().any(|n| n == &side.tree)
                            })
                        {
                            out.push(format!(
                                "entry `{}`: no {} lexical entry `{}` anchoring `{}`",
                                e.name, side.language, side.lemma, side.tree
                            ));
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferGap {
    pub path: DerivPath,
    pub tree: String,
    pub lemma: String,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct TransferCandidate {
    pub derivation: DerivationNode,
    /// Names of the transfer entries used, in derivation order.
    pub entries_used: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct TransferOutput {
    pub candidates: Vec<TransferCandidate>,
    pub gaps: Vec<TransferGap>,
}

/// Maps a source derivation to all candidate target derivations licensed by
/// the transfer lexicon. `node_features` are the finalized per-node features
/// of the source composition, consulted by entry preconditions and feature
/// links. One-to-many entries multiply out; the caller filters the product
/// by target-side composition.
pub fn transfer(
    d: &DerivationNode,
    node_features: &BTreeMap<(DerivPath, NodeAddress), FeatureStructure>,
    lexicon: &TransferLexicon,
    from: Language,
    target_grammar: &Grammar,
    limit: usize,
) -> TransferOutput {
    let mut gaps = Vec::new();
    let alts = transfer_node(
        d,
        &DerivPath::new(),
        node_features,
        lexicon,
        from,
        target_grammar,
        limit,
        &mut gaps,
    );
    let candidates = alts
        .into_iter()
        .filter_map(|(node, names)| {
            node.map(|derivation| TransferCandidate {
                derivation,
                entries_used: names,
            })
        })
        .collect();
    TransferOutput { candidates, gaps }
}

fn precondition_holds(
    pre: &[(NodeAddress, FeatureStructure)],
    path: &DerivPath,
    node_features: &BTreeMap<(DerivPath, NodeAddress), FeatureStructure>,
) -> bool {
    let empty = FeatureStructure::new();
    pre.iter().all(|(addr, fs)| {
        let have = node_features
            .get(&(path.clone(), addr.clone()))
            .unwrap_or(&empty);
        unify(fs, have, &Bindings::new()).is_ok()
    })
}

#[allow(clippy::too_many_arguments)]
fn transfer_node(
    d: &DerivationNode,
    path: &DerivPath,
    node_features: &BTreeMap<(DerivPath, NodeAddress), FeatureStructure>,
    lexicon: &TransferLexicon,
    from: Language,
    target_grammar: &Grammar,
    limit: usize,
    gaps: &mut Vec<TransferGap>,
) -> Vec<(Option<DerivationNode>, Vec<String>)> {
    let resolved: Vec<ResolvedEntry> = lexicon
        .candidates(from, &d.tree_name, &d.lemma)
        .into_iter()
        .filter(|r| precondition_holds(&r.precondition, path, node_features))
        .collect();
    if resolved.is_empty() {
        gaps.push(TransferGap {
            path: path.clone(),
            tree: d.tree_name.clone(),
            lemma: d.lemma.clone(),
            detail: String::from("no applicable transfer entry"),
        });
        return Vec::new();
    }

    // Alternatives per child, shared across all entries for this node.
    let mut child_alts: Vec<Vec<(Option<DerivationNode>, Vec<String>)>> = Vec::new();
    for (i, child) in d.children.iter().enumerate() {
        let mut child_path = path.clone();
        child_path.push(i);
        let alts = transfer_node(
            &child.child,
            &child_path,
            node_features,
            lexicon,
            from,
            target_grammar,
            limit,
            gaps,
        );
        if alts.is_empty() {
            return Vec::new();
        }
        child_alts.push(alts);
    }

    let mut out: Vec<(Option<DerivationNode>, Vec<String>)> = Vec::new();
    for r in &resolved {
        let (target_tree, target_lemma) = match &r.target {
            None => {
                out.push((None, alloc::vec![r.name.clone()]));
                continue;
            }
            Some(t) => t.clone(),
        };

        let surface = target_surface(target_grammar, &target_tree, &target_lemma);
        let surface = match surface {
            Some(s) => s,
            None => {
                gaps.push(TransferGap {
                    path: path.clone(),
                    tree: d.tree_name.clone(),
                    lemma: d.lemma.clone(),
                    detail: format!(
                        "entry `{}`: no target lexical entry `{target_lemma}` for `{target_tree}`",
                        r.name
                    ),
                });
                continue;
            }
        };

        let mut injected: Vec<(NodeAddress, FeatureStructure)> = Vec::new();
        for fl in &r.feature_links {
            if let Some(feats) = node_features.get(&(path.clone(), fl.source_addr.clone())) {
                if let Some(v @ FeatureValue::Atom(_)) = feats.get(&fl.source_feature) {
                    injected.push((
                        fl.target_addr.clone(),
                        FeatureStructure::new().with(&fl.target_feature, v.clone()),
                    ));
                }
            }
        }

        // Cartesian product over child alternatives, dropping deleted ones
        // and re-attaching the rest at the linked target addresses.
        let mut combos: Vec<(Vec<DerivationChild>, Vec<String>)> =
            alloc::vec![(Vec::new(), alloc::vec![r.name.clone()])];
        let mut entry_ok = true;
        for (i, alts) in child_alts.iter().enumerate() {
            let child = &d.children[i];
            let mut next = Vec::new();
            for (base, names) in &combos {
                for (alt, alt_names) in alts {
                    let mut base = base.clone();
                    let mut names = names.clone();
                    names.extend(alt_names.iter().cloned());
                    if let Some(node) = alt {
                        match r.links.get(&child.site) {
                            Some(target_site) => base.push(DerivationChild {
                                op: child.op,
                                site: target_site.clone(),
                                child: node.clone(),
                            }),
                            None => {
                                gaps.push(TransferGap {
                                    path: path.clone(),
                                    tree: d.tree_name.clone(),
                                    lemma: d.lemma.clone(),
                                    detail: format!(
                                        "entry `{}`: no node link for site {}",
                                        r.name, child.site
                                    ),
                                });
                                entry_ok = false;
                                continue;
                            }
                        }
                    }
                    next.push((base, names));
                    if next.len() >= limit {
                        break;
                    }
                }
                if next.len() >= limit {
                    break;
                }
            }
            combos = next;
            if !entry_ok {
                break;
            }
        }
        if !entry_ok {
            continue;
        }

        for (children, names) in combos {
            out.push((
                Some(DerivationNode {
                    tree_name: target_tree.clone(),
                    lemma: target_lemma.clone(),
                    surface: surface.clone(),
                    provenance: d.provenance,
                    injected: injected.clone(),
                    children,
                }),
                names,
            ));
            if out.len() >= limit {
                return out;
            }
        }
    }
    out
}

/// Default surface form for a target instance. Anchorless trees have no
/// lexical entry and an empty surface.
fn target_surface(grammar: &Grammar, tree: &str, lemma: &str) -> Option<String> {
    let template = grammar.tree(tree)?;
    if template.anchor_addresses.is_empty() {
        return Some(String::new());
    }
    grammar
        .entries
        .iter()
        .find(|e| e.lemma == lemma && e.tree_names.iter().any(|n| n == tree))
        .and_then(|e| e.surface_forms.first())
        .map(|f| f.form.clone())
}
