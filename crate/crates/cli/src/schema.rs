//! On-disk JSON formats: grammars (`ko.json`, `en.json`), the transfer
//! lexicon (`ko-en.json`), and discourse sessions.
//!
//! Feature structures are flat string maps; a value starting with `?` is a
//! variable. Addresses are dotted child-index paths, with `"e"` (or the
//! empty string) for the root.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use stag_core::discourse::{DiscourseSession, TopicEntry, TopicList};
use stag_core::feat::{FeatureStructure, FeatureValue};
use stag_core::grammar::{LexEntry, SurfaceForm};
use stag_core::transfer::{FeatureLink, TransferEntry, TransferLexicon, TransferSide};
use stag_core::tree::{AdjoinConstraint, ElementaryTree, NodeAddress, NodeMark, TreeKind, TreeNode};
use stag_core::{Grammar, Language};

pub type FsJson = BTreeMap<String, String>;

pub fn fs_from_json(m: &FsJson) -> FeatureStructure {
    let mut out = FeatureStructure::new();
    for (k, v) in m {
        let value = match v.strip_prefix('?') {
            Some(name) => FeatureValue::var(name),
            None => FeatureValue::atom(v),
        };
        out.set(k, value);
    }
    out
}

pub fn fs_to_json(fs: &FeatureStructure) -> FsJson {
    fs.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
}

fn addr(s: &str) -> Result<NodeAddress> {
    NodeAddress::parse(s).ok_or_else(|| anyhow!("bad node address `{s}`"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeJson {
    pub label: String,
    #[serde(default = "default_mark")]
    pub mark: String,
    #[serde(default)]
    pub top: FsJson,
    #[serde(default)]
    pub bottom: FsJson,
    #[serde(default = "default_adjoin")]
    pub adjoin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<String>,
    #[serde(default)]
    pub droppable: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeJson>,
}

fn default_mark() -> String {
    "internal".into()
}

fn default_adjoin() -> String {
    "allow".into()
}

impl NodeJson {
    fn to_core(&self) -> Result<TreeNode> {
        let mark = match self.mark.as_str() {
            "internal" => NodeMark::Internal,
            "subst" => NodeMark::Substitution,
            "foot" => NodeMark::Foot,
            "anchor" => NodeMark::Anchor,
            "terminal" => NodeMark::Terminal,
            other => bail!("unknown node mark `{other}`"),
        };
        let adjoin = match self.adjoin.as_str() {
            "allow" => AdjoinConstraint::Allow,
            "forbid" => AdjoinConstraint::Forbid,
            other => bail!("unknown adjoin constraint `{other}`"),
        };
        let mut node = TreeNode::new(&self.label, mark);
        node.top = fs_from_json(&self.top);
        node.bottom = fs_from_json(&self.bottom);
        node.adjoin_constraint = adjoin;
        node.slot = self.slot.clone();
        node.droppable = self.droppable;
        node.children = self
            .children
            .iter()
            .map(|c| c.to_core())
            .collect::<Result<_>>()?;
        Ok(node)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeJson {
    pub name: String,
    pub kind: String,
    pub root: NodeJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceFormJson {
    pub form: String,
    #[serde(default)]
    pub constraints: FsJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryJson {
    pub lemma: String,
    pub surface_forms: Vec<SurfaceFormJson>,
    pub trees: Vec<String>,
    #[serde(default)]
    pub anchor_features: FsJson,
    #[serde(default)]
    pub selectional_restrictions: BTreeMap<String, FsJson>,
    #[serde(default)]
    pub semantic_features: FsJson,
    #[serde(default)]
    pub control_verb: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrammarJson {
    pub language: String,
    pub start_symbol: String,
    pub trees: Vec<TreeJson>,
    pub entries: Vec<EntryJson>,
}

impl GrammarJson {
    pub fn to_core(&self) -> Result<Grammar> {
        let language = Language::parse(&self.language)
            .ok_or_else(|| anyhow!("unknown language `{}`", self.language))?;
        let trees = self
            .trees
            .iter()
            .map(|t| {
                let kind = match t.kind.as_str() {
                    "initial" => TreeKind::Initial,
                    "auxiliary" => TreeKind::Auxiliary,
                    other => bail!("tree `{}`: unknown kind `{other}`", t.name),
                };
                Ok(ElementaryTree::new(&t.name, kind, t.root.to_core()?))
            })
            .collect::<Result<Vec<_>>>()?;
        let entries = self
            .entries
            .iter()
            .map(|e| LexEntry {
                lemma: e.lemma.clone(),
                language,
                surface_forms: e
                    .surface_forms
                    .iter()
                    .map(|f| SurfaceForm {
                        form: f.form.clone(),
                        constraints: fs_from_json(&f.constraints),
                    })
                    .collect(),
                tree_names: e.trees.clone(),
                anchor_features: fs_from_json(&e.anchor_features),
                selectional_restrictions: e
                    .selectional_restrictions
                    .iter()
                    .map(|(k, v)| (k.clone(), fs_from_json(v)))
                    .collect(),
                semantic_features: fs_from_json(&e.semantic_features),
                control_verb: e.control_verb,
            })
            .collect();
        Ok(Grammar::new(language, trees, entries, &self.start_symbol))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferSideJson {
    pub language: String,
    pub tree: String,
    pub lemma: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureLinkJson {
    /// [address, feature]
    pub source: (String, String),
    pub target: (String, String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferEntryJson {
    pub name: String,
    pub source: TransferSideJson,
    #[serde(default)]
    pub target: Option<TransferSideJson>,
    /// [source address, target address] pairs.
    #[serde(default)]
    pub links: Vec<(String, String)>,
    #[serde(default)]
    pub feature_links: Vec<FeatureLinkJson>,
    /// source address -> required features
    #[serde(default)]
    pub precondition: BTreeMap<String, FsJson>,
    #[serde(default)]
    pub bidirectional: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferLexiconJson {
    pub entries: Vec<TransferEntryJson>,
}

fn side(j: &TransferSideJson) -> Result<TransferSide> {
    Ok(TransferSide {
        language: Language::parse(&j.language)
            .ok_or_else(|| anyhow!("unknown language `{}`", j.language))?,
        tree: j.tree.clone(),
        lemma: j.lemma.clone(),
    })
}

impl TransferLexiconJson {
    pub fn to_core(&self) -> Result<TransferLexicon> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                Ok(TransferEntry {
                    name: e.name.clone(),
                    source: side(&e.source)?,
                    target: e.target.as_ref().map(side).transpose()?,
                    node_links: e
                        .links
                        .iter()
                        .map(|(s, t)| Ok((addr(s)?, addr(t)?)))
                        .collect::<Result<_>>()?,
                    feature_links: e
                        .feature_links
                        .iter()
                        .map(|fl| {
                            Ok(FeatureLink {
                                source_addr: addr(&fl.source.0)?,
                                source_feature: fl.source.1.clone(),
                                target_addr: addr(&fl.target.0)?,
                                target_feature: fl.target.1.clone(),
                            })
                        })
                        .collect::<Result<_>>()?,
                    precondition: e
                        .precondition
                        .iter()
                        .map(|(a, fs)| Ok((addr(a)?, fs_from_json(fs))))
                        .collect::<Result<_>>()?,
                    bidirectional: e.bidirectional,
                })
            })
            .collect::<Result<_>>()?;
        Ok(TransferLexicon::new(entries))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicEntryJson {
    pub lemma: String,
    #[serde(default)]
    pub semantic_features: FsJson,
    pub mention_index: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SessionJson {
    #[serde(default)]
    pub counter: u64,
    #[serde(default)]
    pub global: Vec<TopicEntryJson>,
}

impl SessionJson {
    pub fn to_core(&self) -> DiscourseSession {
        DiscourseSession {
            counter: self.counter,
            global: TopicList {
                entries: self
                    .global
                    .iter()
                    .map(|e| TopicEntry {
                        lemma: e.lemma.clone(),
                        semantic_features: fs_from_json(&e.semantic_features),
                        mention_index: e.mention_index,
                    })
                    .collect(),
            },
        }
    }

    pub fn from_core(s: &DiscourseSession) -> SessionJson {
        SessionJson {
            counter: s.counter,
            global: s
                .global
                .entries
                .iter()
                .map(|e| TopicEntryJson {
                    lemma: e.lemma.clone(),
                    semantic_features: e
                        .semantic_features
                        .iter()
                        .map(|(k, v)| (k.clone(), v.to_string()))
                        .collect(),
                    mention_index: e.mention_index,
                })
                .collect(),
        }
    }
}

pub fn parse_grammar(text: &str, what: &str) -> Result<Grammar> {
    let j: GrammarJson =
        serde_json::from_str(text).with_context(|| format!("parsing {what}"))?;
    j.to_core().with_context(|| format!("loading {what}"))
}

pub fn parse_transfer(text: &str, what: &str) -> Result<TransferLexicon> {
    let j: TransferLexiconJson =
        serde_json::from_str(text).with_context(|| format!("parsing {what}"))?;
    j.to_core().with_context(|| format!("loading {what}"))
}

pub fn load_session(path: &Path) -> Result<DiscourseSession> {
    if !path.exists() {
        return Ok(DiscourseSession::new());
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading session {}", path.display()))?;
    let j: SessionJson = serde_json::from_str(&text)
        .with_context(|| format!("parsing session {}", path.display()))?;
    Ok(j.to_core())
}

pub fn save_session(path: &Path, session: &DiscourseSession) -> Result<()> {
    let j = SessionJson::from_core(session);
    let text = serde_json::to_string_pretty(&j)?;
    std::fs::write(path, text)
        .with_context(|| format!("writing session {}", path.display()))
}
