//! Bottom-up CKY-style TAG recognition over (i, j, k, l) items with
//! foot-gap spans, plus extraction of all derivations.
//!
//! The chart itself is structural: it reasons over labels, marks, and
//! spans. Feature checking happens when candidate derivations are composed
//! (eagerly per combination or deferred to the final collapse, see
//! [`CheckMode`]); both modes accept exactly the same derivations.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::compose::{compose, CheckMode, ComposeError, Composition};
use crate::derivation::{DerivationChild, DerivationNode, Operation, Provenance};
use crate::grammar::{anchor_tree, instantiate_anchorless, AnchoredTree, Grammar};
use crate::tree::{AdjoinConstraint, NodeAddress, NodeMark, TreeKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    UnknownTokens(Vec<String>),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::UnknownTokens(toks) => {
                write!(f, "unknown tokens: {}", toks.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub mode: CheckMode,
    /// Cap on returned derivations.
    pub limit: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            mode: CheckMode::Eager,
            limit: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseOutput {
    /// Accepted derivations, ranked by (fewer empty arguments, fewer
    /// adjunctions, canonical form).
    pub derivations: Vec<DerivationNode>,
    pub truncated: bool,
}

/// Parses a token sequence, returning every derivation whose derived tree
/// yields exactly the input, spans it, has the start symbol at the root,
/// and finalizes without feature clashes.
pub fn parse(tokens: &[String], grammar: &Grammar) -> Result<Vec<DerivationNode>, ParseError> {
    Ok(parse_with(tokens, grammar, ParseOptions::default())?.derivations)
}

pub fn parse_with(
    tokens: &[String],
    grammar: &Grammar,
    options: ParseOptions,
) -> Result<ParseOutput, ParseError> {
    let unknown: Vec<String> = {
        let mut terminals = BTreeSet::new();
        for tree in grammar.trees.values() {
            let mut nodes = Vec::new();
            tree.root.walk(&mut nodes);
            for (_, n) in nodes {
                if n.mark == NodeMark::Terminal {
                    terminals.insert(n.label.clone());
                }
            }
        }
        tokens
            .iter()
            .filter(|t| grammar.lookup_surface(t).is_empty() && !terminals.contains(*t))
            .cloned()
            .collect()
    };
    if !unknown.is_empty() {
        return Err(ParseError::UnknownTokens(unknown));
    }

    let mut chart = Chart::new(tokens, grammar);
    chart.run();
    let structural = chart.extract(options.limit);

    let mut accepted: Vec<DerivationNode> = Vec::new();
    for d in structural.derivations {
        if compose(&d, grammar, options.mode).is_ok() {
            accepted.push(d);
        }
    }
    accepted.sort_by_key(|d| d.rank_key());
    let mut truncated = structural.truncated;
    if accepted.len() > options.limit {
        accepted.truncate(options.limit);
        truncated = true;
    }
    Ok(ParseOutput {
        derivations: accepted,
        truncated,
    })
}

/// Composes a parser-produced derivation. Thin wrapper kept for symmetry
/// with [`parse`]; any unification failure is reported as a composition
/// error naming the offending address.
pub fn compose_derivation(
    d: &DerivationNode,
    grammar: &Grammar,
) -> Result<Composition, ComposeError> {
    compose(d, grammar, CheckMode::Eager)
}

// ---------------------------------------------------------------------------

struct Instance {
    tree: AnchoredTree,
    zero_span: bool,
}

type Gap = Option<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Pos {
    Bot,
    Top,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Node {
        inst: usize,
        addr: NodeAddress,
        pos: Pos,
        i: usize,
        j: usize,
        gap: Gap,
    },
    Partial {
        inst: usize,
        addr: NodeAddress,
        done: usize,
        i: usize,
        j: usize,
        gap: Gap,
    },
}

#[derive(Debug, Clone)]
enum Way {
    Leaf,
    NoAdjoin(usize),
    Adjoin { aux: usize, inner: usize },
    Subst { child: usize },
    Step { partial: usize, child: usize },
    FromPartial(usize),
}

struct Chart<'a> {
    tokens: &'a [String],
    grammar: &'a Grammar,
    instances: Vec<Instance>,
    keys: Vec<Key>,
    ways: Vec<Vec<Way>>,
    index: BTreeMap<Key, usize>,
    agenda: VecDeque<usize>,
}

struct Extraction {
    derivations: Vec<DerivationNode>,
    truncated: bool,
}

impl<'a> Chart<'a> {
    fn new(tokens: &'a [String], grammar: &'a Grammar) -> Self {
        let mut instances = Vec::new();
        let mut seen = BTreeSet::new();
        for token in tokens {
            for &entry_idx in grammar.lookup_surface(token) {
                let entry = &grammar.entries[entry_idx];
                for tree_name in &entry.tree_names {
                    if !seen.insert((entry_idx, tree_name.clone(), token.clone())) {
                        continue;
                    }
                    let template = match grammar.tree(tree_name) {
                        Some(t) => t,
                        None => continue,
                    };
                    // Feature clashes at anchoring signal lexicon bugs;
                    // skip quietly here, validation reports them.
                    if let Ok(anchored) = anchor_tree(template, entry, token) {
                        instances.push(Instance {
                            tree: anchored,
                            zero_span: false,
                        });
                    }
                }
            }
        }
        for entry_idx in grammar.empty_entries() {
            let entry = &grammar.entries[entry_idx];
            for tree_name in &entry.tree_names {
                if !seen.insert((entry_idx, tree_name.clone(), String::new())) {
                    continue;
                }
                if let Some(template) = grammar.tree(tree_name) {
                    if let Ok(anchored) = anchor_tree(template, entry, "") {
                        instances.push(Instance {
                            tree: anchored,
                            zero_span: true,
                        });
                    }
                }
            }
        }
        for template in grammar.anchorless_trees() {
            instances.push(Instance {
                tree: instantiate_anchorless(template, grammar.language),
                zero_span: false,
            });
        }

        Chart {
            tokens,
            grammar,
            instances,
            keys: Vec::new(),
            ways: Vec::new(),
            index: BTreeMap::new(),
            agenda: VecDeque::new(),
        }
    }

    fn add(&mut self, key: Key, way: Way) -> usize {
        if let Some(&id) = self.index.get(&key) {
            self.ways[id].push(way);
            return id;
        }
        let id = self.keys.len();
        self.keys.push(key.clone());
        self.ways.push(alloc::vec![way]);
        self.index.insert(key, id);
        self.agenda.push_back(id);
        id
    }

    fn seed(&mut self) {
        let n = self.tokens.len();
        for inst_id in 0..self.instances.len() {
            let mut nodes = Vec::new();
            self.instances[inst_id].tree.root.walk(&mut nodes);
            let nodes: Vec<(NodeAddress, NodeMark, String, Option<String>, usize)> = nodes
                .into_iter()
                .map(|(a, n)| {
                    (
                        a,
                        n.mark,
                        n.label.clone(),
                        n.surface.clone(),
                        n.children.len(),
                    )
                })
                .collect();
            for (addr, mark, label, surface, nchildren) in nodes {
                match mark {
                    NodeMark::Terminal => {
                        for i in 0..n {
                            if self.tokens[i] == label {
                                self.add(
                                    Key::Node {
                                        inst: inst_id,
                                        addr: addr.clone(),
                                        pos: Pos::Top,
                                        i,
                                        j: i + 1,
                                        gap: None,
                                    },
                                    Way::Leaf,
                                );
                            }
                        }
                    }
                    NodeMark::Anchor => {
                        let surface = surface.unwrap_or_default();
                        if surface.is_empty() {
                            for i in 0..=n {
                                self.add(
                                    Key::Node {
                                        inst: inst_id,
                                        addr: addr.clone(),
                                        pos: Pos::Top,
                                        i,
                                        j: i,
                                        gap: None,
                                    },
                                    Way::Leaf,
                                );
                            }
                        } else {
                            for i in 0..n {
                                if self.tokens[i] == surface {
                                    self.add(
                                        Key::Node {
                                            inst: inst_id,
                                            addr: addr.clone(),
                                            pos: Pos::Top,
                                            i,
                                            j: i + 1,
                                            gap: None,
                                        },
                                        Way::Leaf,
                                    );
                                }
                            }
                        }
                    }
                    NodeMark::Foot => {
                        for i in 0..=n {
                            for j in i..=n {
                                self.add(
                                    Key::Node {
                                        inst: inst_id,
                                        addr: addr.clone(),
                                        pos: Pos::Top,
                                        i,
                                        j,
                                        gap: Some((i, j)),
                                    },
                                    Way::Leaf,
                                );
                            }
                        }
                    }
                    NodeMark::Internal => {
                        debug_assert!(nchildren > 0);
                        for i in 0..=n {
                            self.add(
                                Key::Partial {
                                    inst: inst_id,
                                    addr: addr.clone(),
                                    done: 0,
                                    i,
                                    j: i,
                                    gap: None,
                                },
                                Way::Leaf,
                            );
                        }
                    }
                    NodeMark::Substitution => {}
                }
            }
        }
    }

    fn node_info(&self, inst: usize, addr: &NodeAddress) -> (&str, NodeMark, AdjoinConstraint, usize) {
        let node = self.instances[inst]
            .tree
            .node_at(addr)
            .expect("chart addresses are valid");
        (
            &node.label,
            node.mark,
            node.adjoin_constraint,
            node.children.len(),
        )
    }

    fn run(&mut self) {
        self.seed();
        while let Some(id) = self.agenda.pop_front() {
            let key = self.keys[id].clone();
            match key {
                Key::Partial {
                    inst,
                    ref addr,
                    done,
                    i,
                    j,
                    gap,
                } => {
                    let (_, _, _, nchildren) = self.node_info(inst, addr);
                    if done == nchildren {
                        self.add(
                            Key::Node {
                                inst,
                                addr: addr.clone(),
                                pos: Pos::Bot,
                                i,
                                j,
                                gap,
                            },
                            Way::FromPartial(id),
                        );
                        continue;
                    }
                    let child_addr = addr.child(done);
                    // pair with already-known child completions
                    let candidates: Vec<(usize, Key)> = self
                        .index
                        .iter()
                        .filter(|(k, _)| {
                            matches!(k, Key::Node { inst: ci, addr: ca, pos: Pos::Top, i: cii, .. }
                                if *ci == inst && *ca == child_addr && *cii == j)
                        })
                        .map(|(k, &cid)| (cid, k.clone()))
                        .collect();
                    for (cid, ckey) in candidates {
                        self.step_partial(id, cid, &ckey);
                    }
                }
                Key::Node {
                    inst,
                    ref addr,
                    ref pos,
                    i,
                    j,
                    gap,
                } => {
                    match pos {
                        Pos::Bot => {
                            // no-adjunction move
                            self.add(
                                Key::Node {
                                    inst,
                                    addr: addr.clone(),
                                    pos: Pos::Top,
                                    i,
                                    j,
                                    gap,
                                },
                                Way::NoAdjoin(id),
                            );
                            // pair with known auxiliary completions
                            let (label, mark, allow, _) = {
                                let (l, m, a, c) = self.node_info(inst, addr);
                                (String::from(l), m, a, c)
                            };
                            if mark == NodeMark::Internal && allow == AdjoinConstraint::Allow {
                                let auxes: Vec<(usize, usize, usize, Gap)> = self
                                    .complete_aux_items(&label)
                                    .into_iter()
                                    .filter(|&(_, _, _, g, gi, gj)| {
                                        let _ = g;
                                        gi == i && gj == j
                                    })
                                    .map(|(aid, ai, aj, g, _, _)| (aid, ai, aj, g))
                                    .collect();
                                for (aid, ai, aj, _) in auxes {
                                    self.add(
                                        Key::Node {
                                            inst,
                                            addr: addr.clone(),
                                            pos: Pos::Top,
                                            i: ai,
                                            j: aj,
                                            gap,
                                        },
                                        Way::Adjoin { aux: aid, inner: id },
                                    );
                                }
                            }
                        }
                        Pos::Top => {
                            if let Some(parent) = parent_of(addr) {
                                let d = *addr.0.last().expect("non-root");
                                let partials: Vec<(usize, Key)> = self
                                    .index
                                    .iter()
                                    .filter(|(k, _)| {
                                        matches!(k, Key::Partial { inst: pi, addr: pa, done, j: pj, .. }
                                            if *pi == inst && *pa == parent && *done == d && *pj == i)
                                    })
                                    .map(|(k, &pid)| (pid, k.clone()))
                                    .collect();
                                let child_key = self.keys[id].clone();
                                for (pid, _) in partials {
                                    self.step_partial(pid, id, &child_key);
                                }
                            }
                            if addr.is_root() {
                                self.on_instance_complete(id, inst, i, j, gap);
                            }
                        }
                    }
                }
            }
        }
    }

    fn step_partial(&mut self, partial_id: usize, child_id: usize, child_key: &Key) {
        let (inst, addr, done, i, gap) = match &self.keys[partial_id] {
            Key::Partial {
                inst,
                addr,
                done,
                i,
                gap,
                ..
            } => (*inst, addr.clone(), *done, *i, *gap),
            _ => return,
        };
        let (cj, cgap) = match child_key {
            Key::Node { j, gap, .. } => (*j, *gap),
            _ => return,
        };
        let merged_gap = match (gap, cgap) {
            (None, g) => g,
            (g, None) => g,
            (Some(_), Some(_)) => return,
        };
        self.add(
            Key::Partial {
                inst,
                addr,
                done: done + 1,
                i,
                j: cj,
                gap: merged_gap,
            },
            Way::Step {
                partial: partial_id,
                child: child_id,
            },
        );
    }

    /// Completed auxiliary-tree root items matching `label`, with their
    /// spans and gaps.
    fn complete_aux_items(&self, label: &str) -> Vec<(usize, usize, usize, Gap, usize, usize)> {
        let mut out = Vec::new();
        for (key, &id) in &self.index {
            if let Key::Node {
                inst,
                addr,
                pos: Pos::Top,
                i,
                j,
                gap: Some((gi, gj)),
            } = key
            {
                if !addr.is_root() {
                    continue;
                }
                let t = &self.instances[*inst].tree;
                if t.kind == TreeKind::Auxiliary && t.root.label == label {
                    out.push((id, *i, *j, Some((*gi, *gj)), *gi, *gj));
                }
            }
        }
        out
    }

    fn on_instance_complete(&mut self, id: usize, inst: usize, i: usize, j: usize, gap: Gap) {
        let t = &self.instances[inst].tree;
        let kind = t.kind;
        let label = t.root.label.clone();
        let zero = self.instances[inst].zero_span;
        match kind {
            TreeKind::Initial => {
                if gap.is_some() {
                    return;
                }
                // substitute into matching slots everywhere
                let mut targets = Vec::new();
                for (host_id, host) in self.instances.iter().enumerate() {
                    let mut nodes = Vec::new();
                    host.tree.root.walk(&mut nodes);
                    for (addr, node) in nodes {
                        if node.mark != NodeMark::Substitution || node.label != label {
                            continue;
                        }
                        if i == j && !(zero && node.droppable) {
                            continue;
                        }
                        if i != j && zero {
                            continue;
                        }
                        targets.push((host_id, addr));
                    }
                }
                for (host_id, addr) in targets {
                    self.add(
                        Key::Node {
                            inst: host_id,
                            addr,
                            pos: Pos::Top,
                            i,
                            j,
                            gap: None,
                        },
                        Way::Subst { child: id },
                    );
                }
            }
            TreeKind::Auxiliary => {
                let (gi, gj) = match gap {
                    Some(g) => g,
                    None => return,
                };
                // pair with known Bot items at matching spans
                let bots: Vec<(usize, usize, NodeAddress, Gap)> = self
                    .index
                    .iter()
                    .filter_map(|(k, &bid)| match k {
                        Key::Node {
                            inst: bi,
                            addr,
                            pos: Pos::Bot,
                            i: bii,
                            j: bjj,
                            gap: bgap,
                        } if *bii == gi && *bjj == gj => {
                            let (blabel, bmark, ballow, _) = self.node_info(*bi, addr);
                            if blabel == label
                                && bmark == NodeMark::Internal
                                && ballow == AdjoinConstraint::Allow
                            {
                                Some((bid, *bi, addr.clone(), *bgap))
                            } else {
                                None
                            }
                        }
                        _ => None,
                    })
                    .collect();
                for (bid, binst, baddr, bgap) in bots {
                    self.add(
                        Key::Node {
                            inst: binst,
                            addr: baddr,
                            pos: Pos::Top,
                            i,
                            j,
                            gap: bgap,
                        },
                        Way::Adjoin { aux: id, inner: bid },
                    );
                }
            }
        }
    }

    /// Enumerates derivations for all goal items.
    fn extract(&self, limit: usize) -> Extraction {
        let structural_cap = limit.saturating_mul(8).max(256);
        let n = self.tokens.len();
        let mut goals = Vec::new();
        for (key, &id) in &self.index {
            if let Key::Node {
                inst,
                addr,
                pos: Pos::Top,
                i: 0,
                j,
                gap: None,
            } = key
            {
                if *j == n && addr.is_root() {
                    let t = &self.instances[*inst].tree;
                    if t.kind == TreeKind::Initial && t.root.label == self.grammar.start_symbol {
                        goals.push(id);
                    }
                }
            }
        }

        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut truncated = false;
        for goal in goals {
            for d in self.expand_instance(goal, structural_cap, &mut truncated) {
                if out.len() >= structural_cap {
                    truncated = true;
                    break;
                }
                if seen.insert(d.canonical()) {
                    out.push(d);
                }
            }
        }
        Extraction {
            derivations: out,
            truncated,
        }
    }

    fn expand_instance(&self, id: usize, cap: usize, truncated: &mut bool) -> Vec<DerivationNode> {
        let inst = match &self.keys[id] {
            Key::Node { inst, .. } => *inst,
            _ => return Vec::new(),
        };
        let t = &self.instances[inst].tree;
        let provenance = if self.instances[inst].zero_span {
            Provenance::Empty
        } else {
            Provenance::Overt
        };
        let mut result = Vec::new();
        for children in self.attach_alts(id, cap, truncated) {
            if result.len() >= cap {
                *truncated = true;
                break;
            }
            let mut children = children;
            children.sort_by(|a, b| {
                (a.site.clone(), a.op, a.child.canonical()).cmp(&(
                    b.site.clone(),
                    b.op,
                    b.child.canonical(),
                ))
            });
            result.push(DerivationNode {
                tree_name: t.tree_name.clone(),
                lemma: t.lemma.clone(),
                surface: t.surface.clone(),
                provenance,
                injected: Vec::new(),
                children,
            });
        }
        result
    }

    /// Alternative attachment lists for the way-DAG under an item.
    fn attach_alts(&self, id: usize, cap: usize, truncated: &mut bool) -> Vec<Vec<DerivationChild>> {
        let mut alts: Vec<Vec<DerivationChild>> = Vec::new();
        for way in &self.ways[id] {
            let mut local: Vec<Vec<DerivationChild>> = match way {
                Way::Leaf => alloc::vec![Vec::new()],
                Way::NoAdjoin(b) | Way::FromPartial(b) => self.attach_alts(*b, cap, truncated),
                Way::Subst { child } => {
                    let site = match &self.keys[id] {
                        Key::Node { addr, .. } => addr.clone(),
                        _ => NodeAddress::root(),
                    };
                    self.expand_instance(*child, cap, truncated)
                        .into_iter()
                        .map(|d| {
                            alloc::vec![DerivationChild {
                                op: Operation::Substitution,
                                site: site.clone(),
                                child: d,
                            }]
                        })
                        .collect()
                }
                Way::Adjoin { aux, inner } => {
                    let site = match &self.keys[id] {
                        Key::Node { addr, .. } => addr.clone(),
                        _ => NodeAddress::root(),
                    };
                    let aux_alts = self.expand_instance(*aux, cap, truncated);
                    let inner_alts = self.attach_alts(*inner, cap, truncated);
                    let mut combined = Vec::new();
                    for a in &aux_alts {
                        for inn in &inner_alts {
                            let mut v = inn.clone();
                            v.push(DerivationChild {
                                op: Operation::Adjunction,
                                site: site.clone(),
                                child: a.clone(),
                            });
                            combined.push(v);
                            if combined.len() >= cap {
                                *truncated = true;
                                break;
                            }
                        }
                    }
                    combined
                }
                Way::Step { partial, child } => {
                    let left = self.attach_alts(*partial, cap, truncated);
                    let right = self.attach_alts(*child, cap, truncated);
                    let mut combined = Vec::new();
                    for l in &left {
                        for r in &right {
                            let mut v = l.clone();
                            v.extend(r.iter().cloned());
                            combined.push(v);
                            if combined.len() >= cap {
                                *truncated = true;
                                break;
                            }
                        }
                    }
                    combined
                }
            };
            alts.append(&mut local);
            if alts.len() >= cap {
                *truncated = true;
                break;
            }
        }
        // Deduplicate alternatives arriving via different item paths.
        let mut seen = BTreeSet::new();
        alts.retain(|children| {
            let key: Vec<String> = children
                .iter()
                .map(|c| format!("{}@{}:{}", c.op, c.site, c.child.canonical()))
                .collect();
            let mut sorted = key;
            sorted.sort();
            seen.insert(sorted.join("|"))
        });
        alts
    }
}

fn parent_of(addr: &NodeAddress) -> Option<NodeAddress> {
    if addr.0.is_empty() {
        None
    } else {
        Some(NodeAddress(addr.0[..addr.0.len() - 1].to_vec()))
    }
}
