//! End-to-end translation: parse, argument recovery (Korean sources),
//! transfer, target-side repairs (case particles, articles, optional
//! pronominalization), composition filtering, and ranked output.

use alloc::string::String;
use alloc::vec::Vec;

use crate::compose::{compose, yield_of, CheckMode, Composition};
use crate::derivation::{DerivationChild, DerivationNode, Operation, Provenance};
use crate::discourse::{recover, register_topics, DiscourseSession, RecoveryReport};
use crate::feat::{unify, Bindings, FeatureStructure, FeatureValue};
use crate::grammar::{Grammar, Language};
use crate::parse::{parse_with, ParseError, ParseOptions};
use crate::transfer::{transfer, TransferGap, TransferLexicon};
use crate::tree::{NodeAddress, TreeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    KoEn,
    EnKo,
}

impl Direction {
    pub fn parse(s: &str) -> Option<Direction> {
        match s {
            "ko-en" => Some(Direction::KoEn),
            "en-ko" => Some(Direction::EnKo),
            _ => None,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Direction::KoEn => "ko-en",
            Direction::EnKo => "en-ko",
        }
    }

    pub fn source_lang(&self) -> Language {
        match self {
            Direction::KoEn => Language::Ko,
            Direction::EnKo => Language::En,
        }
    }

    pub fn target_lang(&self) -> Language {
        match self {
            Direction::KoEn => Language::En,
            Direction::EnKo => Language::Ko,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrammarBundle {
    pub ko: Grammar,
    pub en: Grammar,
    pub transfer: TransferLexicon,
}

impl GrammarBundle {
    pub fn grammar(&self, lang: Language) -> &Grammar {
        match lang {
            Language::Ko => &self.ko,
            Language::En => &self.en,
        }
    }

    pub fn source(&self, d: Direction) -> &Grammar {
        self.grammar(d.source_lang())
    }

    pub fn target(&self, d: Direction) -> &Grammar {
        self.grammar(d.target_lang())
    }

    /// Structural validation of both grammars plus transfer cross-references.
    pub fn validate(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (g, name) in [(&self.ko, "ko"), (&self.en, "en")] {
            for v in g.validate() {
                out.push(alloc::format!("{name}: {v}"));
            }
        }
        out.extend(self.transfer.validate(&self.ko, &self.en));
        out
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub limit: usize,
    pub mode: CheckMode,
    /// Render PRO-control-recovered subjects as pronouns on the English side.
    pub pronominalize_subjects: bool,
    /// Determiner lemma adjoined onto list-recovered common nouns on the
    /// English side ("the report").
    pub recovered_determiner: Option<String>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            limit: 64,
            mode: CheckMode::Eager,
            pronominalize_subjects: false,
            recovered_determiner: Some(String::from("the")),
        }
    }
}

/// One candidate target derivation and what happened to it. Rejected
/// candidates carry the feature-clash (or other composition) diagnostic.
#[derive(Debug, Clone)]
pub struct CandidateRecord {
    pub source_index: usize,
    pub entries_used: Vec<String>,
    pub derivation: DerivationNode,
    pub accepted: bool,
    pub reason: Option<String>,
    pub tokens: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub tokens: Vec<String>,
    pub source: DerivationNode,
    pub target: DerivationNode,
    pub recovery: RecoveryReport,
}

#[derive(Debug, Clone)]
pub struct TranslationResult {
    pub source_tokens: Vec<String>,
    pub direction: Direction,
    pub translations: Vec<Translation>,
    pub candidates: Vec<CandidateRecord>,
    pub gaps: Vec<TransferGap>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineError {
    Parse(ParseError),
    Unresolved { verb: String, slot: String },
}

impl core::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PipelineError::Parse(e) => write!(f, "{e}"),
            PipelineError::Unresolved { verb, slot } => {
                write!(f, "unresolved dropped argument: slot {slot} of {verb}")
            }
        }
    }
}

pub fn translate(
    tokens: &[String],
    direction: Direction,
    bundle: &GrammarBundle,
    session: &mut DiscourseSession,
    options: &PipelineOptions,
) -> Result<TranslationResult, PipelineError> {
    let src = bundle.source(direction);
    let tgt = bundle.target(direction);
    let parsed = parse_with(
        tokens,
        src,
        ParseOptions {
            mode: options.mode,
            limit: options.limit,
        },
    )
    .map_err(PipelineError::Parse)?;

    let mut result = TranslationResult {
        source_tokens: tokens.to_vec(),
        direction,
        translations: Vec::new(),
        candidates: Vec::new(),
        gaps: Vec::new(),
        truncated: parsed.truncated,
    };

    for (si, d) in parsed.derivations.iter().enumerate() {
        let comp = match compose(d, src, CheckMode::Deferred) {
            Ok(c) => c,
            Err(_) => continue,
        };

        let mut recovery = RecoveryReport::default();
        let mut augmented = d.clone();
        let mut comp_for_transfer: Composition = comp;

        if direction == Direction::KoEn {
            // The topic registration of the top-ranked parse is the one
            // committed to the session; alternatives use a scratch copy.
            let mut scratch = session.clone();
            let local = register_topics(d, &comp_for_transfer, src, &mut scratch);
            if si == 0 {
                *session = scratch.clone();
            }
            let (aug, rep) =
                recover(d, &comp_for_transfer.empty_slots, &local, &scratch, src);
            if let Some(u) = rep.unresolved().first() {
                if si == 0 {
                    return Err(PipelineError::Unresolved {
                        verb: u.verb_lemma.clone(),
                        slot: u.slot.clone(),
                    });
                }
                continue;
            }
            recovery = rep;
            augmented = aug;
            insert_case_particles(&mut augmented, src);
            comp_for_transfer = match compose(&augmented, src, CheckMode::Deferred) {
                Ok(c) => c,
                Err(_) => continue,
            };
        }

        let tout = transfer(
            &augmented,
            &comp_for_transfer.node_features,
            &bundle.transfer,
            direction.source_lang(),
            tgt,
            options.limit,
        );
        result.gaps.extend(tout.gaps);

        for cand in tout.candidates {
            let mut td = cand.derivation;
            match direction {
                Direction::EnKo => insert_case_particles(&mut td, tgt),
                Direction::KoEn => {
                    if let Some(det) = &options.recovered_determiner {
                        insert_articles(&mut td, tgt, det);
                    }
                    if options.pronominalize_subjects {
                        pronominalize(&mut td, tgt);
                    }
                }
            }
            let mut record = CandidateRecord {
                source_index: si,
                entries_used: cand.entries_used,
                derivation: td.clone(),
                accepted: false,
                reason: None,
                tokens: None,
            };
            match compose(&td, tgt, options.mode) {
                Ok(c) => {
                    let out_tokens = yield_of(&c.derived);
                    record.accepted = true;
                    record.tokens = Some(out_tokens.clone());
                    let dup = result
                        .translations
                        .iter()
                        .any(|t| t.tokens == out_tokens);
                    if !dup && result.translations.len() < options.limit {
                        result.translations.push(Translation {
                            tokens: out_tokens,
                            source: augmented.clone(),
                            target: td,
                            recovery: recovery.clone(),
                        });
                    }
                }
                Err(e) => record.reason = Some(alloc::format!("{e}")),
            }
            result.candidates.push(record);
        }
    }

    Ok(result)
}

/// Adjoins the appropriate case particle onto every substituted NP whose
/// slot demands a case the NP does not yet carry. Used on Korean target
/// derivations after transfer and on recovered arguments. The allomorph is
/// picked by unifying each surface form's constraints against the noun's
/// semantic features (-lul/-ul on the final-segment feature).
pub fn insert_case_particles(d: &mut DerivationNode, grammar: &Grammar) {
    let template = match grammar.tree(&d.tree_name) {
        Some(t) => t.clone(),
        None => return,
    };
    for i in 0..d.children.len() {
        insert_case_particles(&mut d.children[i].child, grammar);
        if d.children[i].op != Operation::Substitution {
            continue;
        }
        let site = d.children[i].site.clone();
        let slot_node = match template.node_at(&site) {
            Some(n) => n,
            None => continue,
        };
        let case = match slot_node.top.get("case") {
            Some(FeatureValue::Atom(c)) if c != "none" => c.clone(),
            _ => continue,
        };
        let child = &d.children[i].child;
        if child.lemma.is_empty() {
            continue;
        }
        let marked = child.children.iter().any(|c| {
            c.op == Operation::Adjunction
                && c.site.is_root()
                && grammar
                    .tree(&c.child.tree_name)
                    .map(|t| t.root.bottom.get("case").is_some())
                    .unwrap_or(false)
        });
        if marked {
            continue;
        }
        let noun_sem = semantic_features(grammar, child).unwrap_or_default();
        if let Some((tree_name, lemma, form)) =
            find_particle(grammar, &slot_node.label, &case, &noun_sem)
        {
            let mut leaf = DerivationNode::leaf(&tree_name, &lemma, &form);
            leaf.provenance = child.provenance;
            d.children[i].child.children.push(DerivationChild {
                op: Operation::Adjunction,
                site: NodeAddress::root(),
                child: leaf,
            });
        }
    }
}

fn find_particle(
    grammar: &Grammar,
    label: &str,
    case: &str,
    noun_sem: &FeatureStructure,
) -> Option<(String, String, String)> {
    for e in &grammar.entries {
        for tree_name in &e.tree_names {
            let t = match grammar.tree(tree_name) {
                Some(t) => t,
                None => continue,
            };
            if t.kind != TreeKind::Auxiliary
                || t.root.label != label
                || t.root.bottom.get("case") != Some(&FeatureValue::atom(case))
            {
                continue;
            }
            for f in &e.surface_forms {
                if unify(&f.constraints, noun_sem, &Bindings::new()).is_ok() {
                    return Some((tree_name.clone(), e.lemma.clone(), f.form.clone()));
                }
            }
        }
    }
    None
}

/// Adjoins the given determiner onto list-recovered common-noun NPs
/// (non-proper, non-pronoun), producing "the report" for a recovered bare
/// pokose.
pub fn insert_articles(d: &mut DerivationNode, grammar: &Grammar, determiner: &str) {
    for c in &mut d.children {
        insert_articles(&mut c.child, grammar, determiner);
    }
    if d.provenance != Provenance::RecoveredList {
        return;
    }
    let sem = match semantic_features(grammar, d) {
        Some(s) => s,
        None => return,
    };
    let plus = FeatureValue::atom("+");
    if sem.get("proper") == Some(&plus) || sem.get("pron") == Some(&plus) {
        return;
    }
    let det_entry = match grammar.entries.iter().find(|e| e.lemma == determiner) {
        Some(e) => e,
        None => return,
    };
    let det_tree_name = match det_entry.tree_names.first() {
        Some(n) => n.clone(),
        None => return,
    };
    let det_label = match grammar.tree(&det_tree_name) {
        Some(t) => t.root.label.clone(),
        None => return,
    };
    let already = d.children.iter().any(|c| {
        c.op == Operation::Adjunction
            && grammar
                .tree(&c.child.tree_name)
                .map(|t| t.root.label == det_label)
                .unwrap_or(false)
    });
    if already {
        return;
    }
    let template = match grammar.tree(&d.tree_name) {
        Some(t) => t,
        None => return,
    };
    let mut nodes = Vec::new();
    template.root.walk(&mut nodes);
    let site = nodes.into_iter().find(|(_, n)| {
        n.label == det_label
            && n.mark == crate::tree::NodeMark::Internal
            && n.adjoin_constraint == crate::tree::AdjoinConstraint::Allow
    });
    if let Some((addr, _)) = site {
        let surface = det_entry
            .surface_forms
            .first()
            .map(|f| f.form.clone())
            .unwrap_or_else(|| String::from(determiner));
        let mut leaf = DerivationNode::leaf(&det_tree_name, determiner, &surface);
        leaf.provenance = Provenance::RecoveredList;
        d.children.push(DerivationChild {
            op: Operation::Adjunction,
            site: addr,
            child: leaf,
        });
    }
}

/// Replaces PRO-control-recovered NPs by a pronoun agreeing in gender and
/// animacy ("Tom said he lost ..."), when the target lexicon has one.
pub fn pronominalize(d: &mut DerivationNode, grammar: &Grammar) {
    for c in &mut d.children {
        pronominalize(&mut c.child, grammar);
    }
    if d.provenance != Provenance::RecoveredPro {
        return;
    }
    let sem = match semantic_features(grammar, d) {
        Some(s) => s,
        None => return,
    };
    let mut probe = FeatureStructure::new();
    for key in ["gender", "animate"] {
        if let Some(v) = sem.get(key) {
            probe.set(key, v.clone());
        }
    }
    let plus = FeatureValue::atom("+");
    let pronoun = grammar.entries.iter().find(|e| {
        e.semantic_features.get("pron") == Some(&plus)
            && e.tree_names.iter().any(|n| n == &d.tree_name)
            && unify(&e.semantic_features, &probe, &Bindings::new()).is_ok()
    });
    if let Some(p) = pronoun {
        d.lemma = p.lemma.clone();
        d.surface = p
            .surface_forms
            .first()
            .map(|f| f.form.clone())
            .unwrap_or_else(|| p.lemma.clone());
    }
}

fn semantic_features(grammar: &Grammar, d: &DerivationNode) -> Option<FeatureStructure> {
    grammar
        .entries
        .iter()
        .find(|e| e.lemma == d.lemma && e.tree_names.iter().any(|n| n == &d.tree_name))
        .map(|e| e.semantic_features.clone())
}
