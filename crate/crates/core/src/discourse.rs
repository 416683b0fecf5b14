//! Recovery of dropped arguments from a recency-ordered topic list.
//!
//! Topic-marked NPs are pushed onto a local (sentence) and a global
//! (session) list, most recent first. Each empty argument position is then
//! filled by the first list entry whose semantic features unify with the
//! verb's selectional restrictions for that slot, except embedded subjects
//! under a control verb, which copy the matrix subject directly.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::compose::{Composition, EmptySlot};
use crate::derivation::{DerivPath, DerivationNode, Operation, Provenance};
use crate::feat::{unify, Bindings, FeatureStructure, FeatureValue};
use crate::grammar::Grammar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicEntry {
    pub lemma: String,
    pub semantic_features: FeatureStructure,
    pub mention_index: u64,
}

/// Most recent first. One entry per lemma: a re-mention moves it to the
/// front with a fresh mention index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicList {
    pub entries: Vec<TopicEntry>,
}

impl TopicList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, lemma: &str, semantic_features: FeatureStructure, mention_index: u64) {
        self.entries.retain(|e| e.lemma != lemma);
        self.entries.insert(
            0,
            TopicEntry {
                lemma: String::from(lemma),
                semantic_features,
                mention_index,
            },
        );
    }

    pub fn front(&self) -> Option<&TopicEntry> {
        self.entries.first()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiscourseSession {
    pub global: TopicList,
    pub counter: u64,
}

impl DiscourseSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.global = TopicList::new();
        self.counter = 0;
    }
}

/// Pushes every topic-marked, non-wh NP of a composed Korean derivation
/// onto both the session's global list and a fresh local list, in surface
/// order (so the last topic of the sentence ends up at the front). Returns
/// the local list.
pub fn register_topics(
    d: &DerivationNode,
    comp: &Composition,
    grammar: &Grammar,
    session: &mut DiscourseSession,
) -> TopicList {
    let mut local = TopicList::new();
    for path in &comp.instance_order {
        let mut node = match d.at_path(path) {
            Some(n) => n,
            None => continue,
        };
        let feats = match comp
            .node_features
            .get(&(path.clone(), crate::tree::NodeAddress::root()))
        {
            Some(f) => f,
            None => continue,
        };
        if feats.get("topic") != Some(&FeatureValue::atom("+")) {
            continue;
        }
        if feats.get("wh") == Some(&FeatureValue::atom("+")) {
            continue;
        }
        // A topic particle carries the topic feature on its own root; the
        // topic itself is the noun the particle adjoined onto.
        if grammar
            .tree(&node.tree_name)
            .map(|t| t.kind == crate::tree::TreeKind::Auxiliary)
            .unwrap_or(false)
            && !path.is_empty()
        {
            match d.at_path(&path[..path.len() - 1]) {
                Some(host) => node = host,
                None => continue,
            }
        }
        if node.lemma.is_empty() {
            continue;
        }
        let semantic = grammar
            .entries
            .iter()
            .find(|e| e.lemma == node.lemma && e.tree_names.iter().any(|n| n == &node.tree_name))
            .map(|e| e.semantic_features.clone())
            .unwrap_or_default();
        session.counter += 1;
        local.push(&node.lemma, semantic.clone(), session.counter);
        session.global.push(&node.lemma, semantic, session.counter);
    }
    local
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListScope {
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateTrial {
    pub lemma: String,
    pub scope: ListScope,
    pub accepted: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    ProControl,
    List,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotResolution {
    pub verb_lemma: String,
    pub slot: String,
    pub method: Resolution,
    pub filler: Option<String>,
    pub trials: Vec<CandidateTrial>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecoveryReport {
    pub slots: Vec<SlotResolution>,
}

impl RecoveryReport {
    pub fn unresolved(&self) -> Vec<&SlotResolution> {
        self.slots
            .iter()
            .filter(|s| s.method == Resolution::Unresolved)
            .collect()
    }
}

/// Fills the empty argument positions of a derivation, in surface order.
///
/// An empty subject of a clause substituted under a control verb copies the
/// matrix subject (PRO-control) without consulting the lists. Every other
/// slot scans the local list front to back, then the global one, and takes
/// the first entry whose semantic features unify with the slot's
/// selectional restrictions. Lists are never modified: a topic can fill
/// several slots. Unresolved slots stay empty and are reported.
pub fn recover(
    d: &DerivationNode,
    slots: &[EmptySlot],
    local: &TopicList,
    session: &DiscourseSession,
    grammar: &Grammar,
) -> (DerivationNode, RecoveryReport) {
    let mut out = d.clone();
    let mut report = RecoveryReport::default();

    for slot in slots {
        let mut resolution = SlotResolution {
            verb_lemma: slot.verb_lemma.clone(),
            slot: slot.slot.clone(),
            method: Resolution::Unresolved,
            filler: None,
            trials: Vec::new(),
        };

        if let Some(matrix) = pro_control_source(&out, slot, grammar) {
            fill(&mut out, &slot.child_path, &matrix, Provenance::RecoveredPro, grammar);
            resolution.method = Resolution::ProControl;
            resolution.filler = Some(matrix);
            report.slots.push(resolution);
            continue;
        }

        let scan = local
            .entries
            .iter()
            .map(|e| (ListScope::Local, e))
            .chain(session.global.entries.iter().map(|e| (ListScope::Global, e)));
        for (scope, entry) in scan {
            match unify(&slot.restrictions, &entry.semantic_features, &Bindings::new()) {
                Ok(_) => {
                    resolution.trials.push(CandidateTrial {
                        lemma: entry.lemma.clone(),
                        scope,
                        accepted: true,
                        reason: None,
                    });
                    fill(
                        &mut out,
                        &slot.child_path,
                        &entry.lemma,
                        Provenance::RecoveredList,
                        grammar,
                    );
                    resolution.method = Resolution::List;
                    resolution.filler = Some(entry.lemma.clone());
                    break;
                }
                Err(e) => resolution.trials.push(CandidateTrial {
                    lemma: entry.lemma.clone(),
                    scope,
                    accepted: false,
                    reason: Some(format!("{e}")),
                }),
            }
        }
        report.slots.push(resolution);
    }

    (out, report)
}

/// If the slot is the subject of a clause substituted into a control verb's
/// sentential argument, returns the matrix subject's lemma (which may
/// itself have just been recovered; slots are processed in surface order,
/// so the matrix subject resolves first).
fn pro_control_source(d: &DerivationNode, slot: &EmptySlot, grammar: &Grammar) -> Option<String> {
    if slot.slot != "NP0" || slot.verb_path.is_empty() {
        return None;
    }
    let parent_path: DerivPath = slot.verb_path[..slot.verb_path.len() - 1].to_vec();
    let parent = d.at_path(&parent_path)?;
    let parent_entry = grammar
        .entries
        .iter()
        .find(|e| e.lemma == parent.lemma && e.tree_names.iter().any(|n| n == &parent.tree_name))?;
    if !parent_entry.control_verb {
        return None;
    }
    let parent_tree = grammar.tree(&parent.tree_name)?;
    // The embedded clause must sit in a sentential slot of the control verb.
    let child_idx = slot.verb_path[slot.verb_path.len() - 1];
    let link = parent.children.get(child_idx)?;
    let clause_slot = parent_tree.slot_at(&link.site)?;
    if !clause_slot.starts_with('S') {
        return None;
    }
    let subj_addr = parent_tree.arg_slots.get("NP0")?;
    let subj = parent
        .children
        .iter()
        .find(|c| c.op == Operation::Substitution && &c.site == subj_addr)?;
    if subj.child.lemma.is_empty() {
        return None;
    }
    Some(subj.child.lemma.clone())
}

fn fill(
    d: &mut DerivationNode,
    child_path: &DerivPath,
    lemma: &str,
    provenance: Provenance,
    grammar: &Grammar,
) {
    if let Some(node) = d.at_path_mut(child_path) {
        let surface = grammar
            .entries
            .iter()
            .find(|e| e.lemma == lemma && e.tree_names.iter().any(|n| n == &node.tree_name))
            .and_then(|e| e.surface_forms.first())
            .map(|f| f.form.clone())
            .unwrap_or_else(|| String::from(lemma));
        node.lemma = String::from(lemma);
        node.surface = surface;
        node.provenance = provenance;
    }
}
