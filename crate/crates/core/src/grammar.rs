//! Grammars: lexical entries, tree inventories, and anchoring of tree
//! templates with lexical items.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::feat::{unify, Bindings, FeatureStructure};
use crate::tree::{validate_tree, ElementaryTree, NodeAddress, NodeMark, TreeKind, TreeNode, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    Ko,
    En,
}

impl Language {
    pub fn code(&self) -> &'static str {
        match self {
            Language::Ko => "ko",
            Language::En => "en",
        }
    }

    pub fn parse(s: &str) -> Option<Language> {
        match s {
            "ko" => Some(Language::Ko),
            "en" => Some(Language::En),
            _ => None,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// One spelled-out form of a lexical item, with the feature constraints the
/// form imposes (the -nun/-un and -lul/-ul alternations are encoded this
/// way, keyed on the host's final-segment feature).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceForm {
    pub form: String,
    pub constraints: FeatureStructure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub lemma: String,
    pub language: Language,
    pub surface_forms: Vec<SurfaceForm>,
    pub tree_names: Vec<String>,
    pub anchor_features: FeatureStructure,
    pub selectional_restrictions: BTreeMap<String, FeatureStructure>,
    pub semantic_features: FeatureStructure,
    pub control_verb: bool,
}

impl LexEntry {
    pub fn has_surface(&self, surface: &str) -> bool {
        self.surface_forms.iter().any(|f| f.form == surface)
    }

    pub fn is_empty_element(&self) -> bool {
        self.surface_forms.iter().any(|f| f.form.is_empty())
    }
}

#[derive(Debug, Clone)]
pub struct Grammar {
    pub language: Language,
    pub trees: BTreeMap<String, ElementaryTree>,
    pub entries: Vec<LexEntry>,
    pub start_symbol: String,
    /// surface token -> indices into `entries`
    lexicon: BTreeMap<String, Vec<usize>>,
}

impl Grammar {
    pub fn new(
        language: Language,
        trees: Vec<ElementaryTree>,
        entries: Vec<LexEntry>,
        start_symbol: &str,
    ) -> Self {
        let mut tree_map = BTreeMap::new();
        for t in trees {
            tree_map.insert(t.name.clone(), t);
        }
        let mut lexicon: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            for f in &e.surface_forms {
                lexicon.entry(f.form.clone()).or_default().push(i);
            }
        }
        Grammar {
            language,
            trees: tree_map,
            entries,
            start_symbol: String::from(start_symbol),
            lexicon,
        }
    }

    pub fn tree(&self, name: &str) -> Option<&ElementaryTree> {
        self.trees.get(name)
    }

    /// Entries matching a surface token.
    pub fn lookup_surface(&self, token: &str) -> &[usize] {
        self.lexicon.get(token).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Entries with an empty surface form (the pro element).
    pub fn empty_entries(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_empty_element())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn entry_for_lemma(&self, lemma: &str) -> Option<(usize, &LexEntry)> {
        self.entries
            .iter()
            .enumerate()
            .find(|(_, e)| e.lemma == lemma)
    }

    /// Trees with no anchor node: instantiated directly rather than via a
    /// lexical scan (the Korean topic-host tree is the one bundled case).
    pub fn anchorless_trees(&self) -> Vec<&ElementaryTree> {
        self.trees
            .values()
            .filter(|t| t.anchor_addresses.is_empty())
            .collect()
    }

    /// Structural and cross-reference validation of the whole grammar.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for tree in self.trees.values() {
            out.extend(validate_tree(tree));
        }
        for entry in &self.entries {
            for name in &entry.tree_names {
                match self.trees.get(name) {
                    None => out.push(Violation {
                        tree: name.clone(),
                        address: NodeAddress::root(),
                        rule: format!("lexical entry `{}` names unknown tree", entry.lemma),
                    }),
                    Some(tree) => {
                        for slot in entry.selectional_restrictions.keys() {
                            if !tree.arg_slots.contains_key(slot) {
                                out.push(Violation {
                                    tree: name.clone(),
                                    address: NodeAddress::root(),
                                    rule: format!(
                                        "entry `{}` restricts slot `{slot}` missing from tree",
                                        entry.lemma
                                    ),
                                });
                            }
                        }
                    }
                }
            }
        }
        if !self.trees.values().any(|t| {
            t.kind == TreeKind::Initial && t.root.label == self.start_symbol
        }) {
            out.push(Violation {
                tree: String::from("<grammar>"),
                address: NodeAddress::root(),
                rule: format!("no initial tree with start symbol `{}`", self.start_symbol),
            });
        }
        out
    }
}

/// An elementary tree template filled with a lexical item. Independent of
/// its template: anchoring never mutates the grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchoredTree {
    pub tree_name: String,
    pub kind: TreeKind,
    pub root: TreeNode,
    pub arg_slots: BTreeMap<String, NodeAddress>,
    pub lemma: String,
    pub surface: String,
    pub entry: LexEntry,
}

impl AnchoredTree {
    pub fn node_at(&self, addr: &NodeAddress) -> Option<&TreeNode> {
        self.root.get(addr)
    }

    pub fn foot_address(&self) -> Option<NodeAddress> {
        let mut nodes = Vec::new();
        self.root.walk(&mut nodes);
        nodes
            .into_iter()
            .find(|(_, n)| n.mark == NodeMark::Foot)
            .map(|(a, _)| a)
    }

    pub fn slot_at(&self, addr: &NodeAddress) -> Option<&str> {
        self.arg_slots
            .iter()
            .find(|(_, a)| *a == addr)
            .map(|(s, _)| s.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnchorError {
    TreeNotAnchorable { tree: String, lemma: String },
    UnknownSurface { lemma: String, surface: String },
    MissingSlot { tree: String, slot: String },
    Clash { tree: String, address: NodeAddress, detail: String },
}

impl fmt::Display for AnchorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnchorError::TreeNotAnchorable { tree, lemma } => {
                write!(f, "entry `{lemma}` does not anchor tree `{tree}`")
            }
            AnchorError::UnknownSurface { lemma, surface } => {
                write!(f, "`{surface}` is not a surface form of `{lemma}`")
            }
            AnchorError::MissingSlot { tree, slot } => {
                write!(f, "tree `{tree}` has no arg slot `{slot}`")
            }
            AnchorError::Clash { tree, address, detail } => {
                write!(f, "feature clash anchoring `{tree}` at {address}: {detail}")
            }
        }
    }
}

/// Instantiates a tree template with a lexical item.
///
/// The anchor node receives the surface string and the entry's anchor
/// features (on its bottom); the entry's semantic features go to the root's
/// bottom; selectional restrictions are unified into the top feature
/// structure of the corresponding argument substitution nodes; surface-form
/// constraints attach to the foot (auxiliary trees) or root (initial trees)
/// top, where they meet the host or landing site.
pub fn anchor_tree(
    template: &ElementaryTree,
    entry: &LexEntry,
    surface: &str,
) -> Result<AnchoredTree, AnchorError> {
    if !entry.tree_names.iter().any(|n| n == &template.name) {
        return Err(AnchorError::TreeNotAnchorable {
            tree: template.name.clone(),
            lemma: entry.lemma.clone(),
        });
    }
    let form = entry
        .surface_forms
        .iter()
        .find(|f| f.form == surface)
        .ok_or_else(|| AnchorError::UnknownSurface {
            lemma: entry.lemma.clone(),
            surface: String::from(surface),
        })?;

    let mut root = template.root.clone();
    let env = Bindings::new();

    let merge_into = |fs_dst: &mut FeatureStructure,
                      fs_src: &FeatureStructure,
                      addr: &NodeAddress,
                      tree: &str|
     -> Result<(), AnchorError> {
        let (merged, _) = unify(fs_dst, fs_src, &env).map_err(|e| AnchorError::Clash {
            tree: String::from(tree),
            address: addr.clone(),
            detail: format!("{e}"),
        })?;
        *fs_dst = merged;
        Ok(())
    };

    for addr in &template.anchor_addresses {
        let node = root.get_mut(addr).expect("anchor address valid");
        node.surface = Some(String::from(surface));
        let mut merged = node.bottom.clone();
        merge_into(&mut merged, &entry.anchor_features, addr, &template.name)?;
        root.get_mut(addr).expect("anchor address valid").bottom = merged;
    }

    {
        let addr = NodeAddress::root();
        let mut bottom = root.bottom.clone();
        merge_into(&mut bottom, &entry.semantic_features, &addr, &template.name)?;
        root.bottom = bottom;
    }

    for (slot, sel) in &entry.selectional_restrictions {
        let addr = template
            .arg_slots
            .get(slot)
            .ok_or_else(|| AnchorError::MissingSlot {
                tree: template.name.clone(),
                slot: slot.clone(),
            })?;
        let node = root.get_mut(addr).expect("slot address valid");
        let mut top = node.top.clone();
        merge_into(&mut top, sel, addr, &template.name)?;
        root.get_mut(addr).expect("slot address valid").top = top;
    }

    if !form.constraints.is_empty() {
        let target = match template.kind {
            TreeKind::Auxiliary => template.foot_address().unwrap_or_default(),
            TreeKind::Initial => NodeAddress::root(),
        };
        let node = root.get_mut(&target).expect("constraint target valid");
        let mut top = node.top.clone();
        merge_into(&mut top, &form.constraints, &target, &template.name)?;
        root.get_mut(&target).expect("constraint target valid").top = top;
    }

    Ok(AnchoredTree {
        tree_name: template.name.clone(),
        kind: template.kind,
        root,
        arg_slots: template.arg_slots.clone(),
        lemma: entry.lemma.clone(),
        surface: String::from(surface),
        entry: entry.clone(),
    })
}

/// Instantiates an anchorless tree (no lexical scan involved).
pub fn instantiate_anchorless(template: &ElementaryTree, language: Language) -> AnchoredTree {
    AnchoredTree {
        tree_name: template.name.clone(),
        kind: template.kind,
        root: template.root.clone(),
        arg_slots: template.arg_slots.clone(),
        lemma: String::new(),
        surface: String::new(),
        entry: LexEntry {
            lemma: String::new(),
            language,
            surface_forms: Vec::new(),
            tree_names: Vec::new(),
            anchor_features: FeatureStructure::new(),
            selectional_restrictions: BTreeMap::new(),
            semantic_features: FeatureStructure::new(),
            control_verb: false,
        },
    }
}
