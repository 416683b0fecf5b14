//! End-to-end acceptance suite. Each test prints one pass/fail line.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use stag::bundle;
use stag_core::compose::{compose, yield_of, CheckMode};
use stag_core::derivation::DerivationNode;
use stag_core::discourse::{DiscourseSession, ListScope, Resolution};
use stag_core::feat::{unify, Bindings, FeatureStructure, FeatureValue};
use stag_core::grammar::{anchor_tree, instantiate_anchorless, AnchoredTree};
use stag_core::parse::{parse_with, ParseOptions};
use stag_core::pipeline::{translate, Direction, PipelineOptions, TranslationResult};
use stag_core::tree::{AdjoinConstraint, NodeAddress, NodeMark, TreeKind};
use stag_core::{Grammar, Language};

fn report(criterion: u32, desc: &str, ok: bool) {
    println!(
        "criterion {criterion}: {} - {desc}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {desc}");
}

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn run(
    sentence: &str,
    direction: Direction,
    session: &mut DiscourseSession,
    options: &PipelineOptions,
) -> TranslationResult {
    let bundle = bundle::bundled().expect("bundled grammars load");
    translate(&tokens(sentence), direction, &bundle, session, options)
        .expect("translation succeeds")
}

fn top(result: &TranslationResult) -> String {
    result.translations[0].tokens.join(" ")
}

#[test]
fn criterion_01_simple_declarative() {
    let start = Instant::now();
    let result = run(
        "ku -ka ku pokose -lul pwunsilhaissta",
        Direction::KoEn,
        &mut DiscourseSession::new(),
        &PipelineOptions::default(),
    );
    let elapsed = start.elapsed();
    let ok = !result.translations.is_empty()
        && top(&result) == "he lost that report"
        && elapsed < Duration::from_secs(1);
    report(1, "ku -ka ku pokose -lul pwunsilhaissta -> he lost that report, under 1s", ok);
}

#[test]
fn criterion_02_relative_clause() {
    let result = run(
        "ku -ka kunye -ka ssun ku pokose -lul pwunsilhaissta",
        Direction::KoEn,
        &mut DiscourseSession::new(),
        &PipelineOptions::default(),
    );
    let text = top(&result);
    let toks = &result.translations[0].tokens;
    let head = toks.iter().position(|t| t == "report");
    let verb = toks.iter().position(|t| t == "wrote");
    let ok = text == "he lost that report that she wrote"
        && matches!((head, verb), (Some(h), Some(v)) if h < v);
    report(2, "relative clause translates with head noun left of the clause", ok);
}

#[test]
fn criterion_03_wear_selection() {
    let mut ok = true;
    for (sentence, expected) in [
        ("he wears socks", "ku -ka yangmal -ul sinta"),
        ("he wears clothes", "ku -ka os -ul ipta"),
    ] {
        let result = run(
            sentence,
            Direction::EnKo,
            &mut DiscourseSession::new(),
            &PipelineOptions::default(),
        );
        let accepted: Vec<_> = result.candidates.iter().filter(|c| c.accepted).collect();
        let rejected: Vec<_> = result.candidates.iter().filter(|c| !c.accepted).collect();
        ok &= top(&result) == expected
            && result.candidates.len() >= 4
            && accepted.len() == 1
            && rejected.len() >= 3
            && rejected
                .iter()
                .all(|c| c.reason.as_deref().unwrap_or("").contains("clash"));
    }
    report(3, "wear maps to 4+ Korean candidates, all but one rejected by feature clash", ok);
}

#[test]
fn criterion_04_topic_drop_recovery() {
    let mut session = DiscourseSession::new();
    let options = PipelineOptions {
        pronominalize_subjects: true,
        ..PipelineOptions::default()
    };
    let result = run(
        "Tom -un pokose -nun pwunsilhaissta -ko malhaissta",
        Direction::KoEn,
        &mut session,
        &options,
    );
    let mut ok = top(&result) == "Tom said he lost the report";
    let rec = &result.translations[0].recovery;
    ok &= rec.slots.len() == 3;
    if ok {
        let matrix = &rec.slots[0];
        ok &= matrix.verb_lemma == "malhaissta"
            && matrix.method == Resolution::List
            && matrix.filler.as_deref() == Some("Tom")
            && matrix.trials.len() >= 2
            && matrix.trials[0].lemma == "pokose"
            && !matrix.trials[0].accepted
            && matrix.trials[0]
                .reason
                .as_deref()
                .unwrap_or("")
                .contains("animate")
            && matrix.trials[1].lemma == "Tom"
            && matrix.trials[1].accepted
            && matrix.trials[1].scope == ListScope::Local;
        let embedded = &rec.slots[1];
        ok &= embedded.slot == "NP0"
            && embedded.method == Resolution::ProControl
            && embedded.filler.as_deref() == Some("Tom");
        let object = &rec.slots[2];
        ok &= object.slot == "NP2"
            && object.method == Resolution::List
            && object.filler.as_deref() == Some("pokose");
    }
    report(4, "topic-drop sentence recovers Tom (after animacy clash), PRO subject, pokose", ok);
}

#[test]
fn criterion_05_wh_entry_selection() {
    let mut ok = true;
    for (sentence, expected, entry) in [
        (
            "ku -ka ku pokose -lul pwunsilhaissta",
            "he lost that report",
            "pwunsilhaissta:basic",
        ),
        (
            "nwukwu -ka ku pokose -lul pwunsilhaissta",
            "who lost that report",
            "pwunsilhaissta:wh-subject-extraction",
        ),
        (
            "ku -ka mwues -ul pwunsilhaissta",
            "what he lost",
            "pwunsilhaissta:wh-object-extraction",
        ),
    ] {
        let result = run(
            sentence,
            Direction::KoEn,
            &mut DiscourseSession::new(),
            &PipelineOptions::default(),
        );
        let accepted_entries: Vec<&str> = result
            .candidates
            .iter()
            .filter(|c| c.accepted)
            .flat_map(|c| c.entries_used.iter().map(String::as_str))
            .collect();
        ok &= top(&result) == expected && accepted_entries.contains(&entry);
    }
    report(5, "wh features select the named transfer entries (basic/subject/object extraction)", ok);
}

fn all_structures() -> Vec<FeatureStructure> {
    let features = ["f", "g", "h"];
    let values = ["+", "-", "x"];
    let mut out = vec![FeatureStructure::new()];
    for feat in features {
        let mut next = Vec::new();
        for fs in &out {
            next.push(fs.clone());
            for v in values {
                let mut f = fs.clone();
                f.set(feat, FeatureValue::atom(v));
                next.push(f);
            }
        }
        out = next;
    }
    out
}

fn u(a: &FeatureStructure, b: &FeatureStructure) -> Option<FeatureStructure> {
    unify(a, b, &Bindings::new()).ok().map(|(fs, _)| fs)
}

#[test]
fn criterion_06_unification_algebra() {
    let start = Instant::now();
    let all = all_structures();
    let empty = FeatureStructure::new();
    let mut ok = true;
    for a in &all {
        ok &= u(a, &empty).as_ref() == Some(a);
        ok &= u(a, a).as_ref() == Some(a);
        for b in &all {
            ok &= u(a, b) == u(b, a);
        }
    }
    for a in &all {
        for b in &all {
            let ab = u(a, b);
            for c in &all {
                let left = ab.as_ref().and_then(|x| u(x, c));
                let right = u(b, c).and_then(|x| u(a, &x));
                ok &= left == right;
                if !ok {
                    break;
                }
            }
        }
    }
    let ok = ok && start.elapsed() < Duration::from_secs(10);
    report(6, "unification is commutative, idempotent, has identity, associative over 64^3 cases, under 10s", ok);
}

// --- generation oracle ------------------------------------------------------

fn sub_grammar() -> Grammar {
    let full = bundle::bundled().expect("bundled grammars load").ko;
    let tree_names: BTreeSet<&str> = [
        "a_np", "a_iv", "a_tr", "b_det", "b_nom", "b_acc", "b_top", "b_comp",
    ]
    .into_iter()
    .collect();
    let lemmas: BTreeSet<&str> = [
        "ku", "pokose", "Tom", "pro", "-ka", "-lul", "-nun", "-ko", "canta", "pwunsilhaissta",
    ]
    .into_iter()
    .collect();
    let trees: Vec<_> = full
        .trees
        .values()
        .filter(|t| tree_names.contains(t.name.as_str()))
        .cloned()
        .collect();
    let entries: Vec<_> = full
        .entries
        .iter()
        .filter(|e| {
            lemmas.contains(e.lemma.as_str())
                && e.tree_names.iter().any(|n| tree_names.contains(n.as_str()))
        })
        .cloned()
        .collect();
    Grammar::new(Language::Ko, trees, entries, "S")
}

struct Generator {
    instances: Vec<(AnchoredTree, bool)>,
}

impl Generator {
    fn new(grammar: &Grammar) -> Self {
        let mut instances = Vec::new();
        for entry in &grammar.entries {
            for tree_name in &entry.tree_names {
                let template = grammar.tree(tree_name).expect("tree exists");
                for form in &entry.surface_forms {
                    if let Ok(t) = anchor_tree(template, entry, &form.form) {
                        instances.push((t, form.form.is_empty()));
                    }
                }
            }
        }
        for template in grammar.anchorless_trees() {
            let t = instantiate_anchorless(template, grammar.language);
            instances.push((t, false));
        }
        Generator { instances }
    }

    /// All structural derivations rooted at instance `idx` using at most
    /// `budget` elementary tree instances, mirroring what the chart admits:
    /// every substitution slot filled (zero-span only at droppable slots),
    /// at most one adjunction per adjoinable internal node, and no material
    /// attached inside a zero-span instance.
    fn expand(&self, idx: usize, budget: usize) -> Vec<DerivationNode> {
        if budget == 0 {
            return Vec::new();
        }
        let (tree, zero) = &self.instances[idx];
        let mut leaf = DerivationNode::leaf(&tree.tree_name, &tree.lemma, &tree.surface);
        if *zero {
            leaf.provenance = stag_core::derivation::Provenance::Empty;
        }
        if *zero {
            return vec![leaf];
        }
        let mut nodes = Vec::new();
        tree.root.walk(&mut nodes);
        let mut site_alts: Vec<Vec<Option<(stag_core::derivation::Operation, NodeAddress, DerivationNode)>>> =
            Vec::new();
        for (addr, node) in nodes {
            match node.mark {
                NodeMark::Substitution => {
                    let mut alts = Vec::new();
                    for (cid, (ct, czero)) in self.instances.iter().enumerate() {
                        if ct.kind != TreeKind::Initial || ct.root.label != node.label {
                            continue;
                        }
                        if *czero && !node.droppable {
                            continue;
                        }
                        for child in self.expand(cid, budget - 1) {
                            alts.push(Some((
                                stag_core::derivation::Operation::Substitution,
                                addr.clone(),
                                child,
                            )));
                        }
                    }
                    site_alts.push(alts);
                }
                NodeMark::Internal if node.adjoin_constraint == AdjoinConstraint::Allow => {
                    let mut alts = vec![None];
                    for (cid, (ct, _)) in self.instances.iter().enumerate() {
                        if ct.kind != TreeKind::Auxiliary || ct.root.label != node.label {
                            continue;
                        }
                        for child in self.expand(cid, budget - 1) {
                            alts.push(Some((
                                stag_core::derivation::Operation::Adjunction,
                                addr.clone(),
                                child,
                            )));
                        }
                    }
                    site_alts.push(alts);
                }
                _ => {}
            }
        }
        let mut out = vec![leaf];
        for alts in site_alts {
            let mut next = Vec::new();
            for base in &out {
                for alt in &alts {
                    let mut d = base.clone();
                    if let Some((op, site, child)) = alt {
                        d.children.push(stag_core::derivation::DerivationChild {
                            op: *op,
                            site: site.clone(),
                            child: child.clone(),
                        });
                    }
                    if d.instance_count() <= budget {
                        next.push(d);
                    }
                }
            }
            out = next;
        }
        for d in &mut out {
            d.children.sort_by(|a, b| {
                (a.site.clone(), a.op, a.child.canonical()).cmp(&(
                    b.site.clone(),
                    b.op,
                    b.child.canonical(),
                ))
            });
        }
        out
    }
}

#[test]
fn criterion_07_parser_generation_oracle() {
    let start = Instant::now();
    let grammar = sub_grammar();
    let gen = Generator::new(&grammar);

    // exhaustively generate accepted derivations of at most 5 instances,
    // grouped by their surface yield
    let mut by_yield: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
    let mut generated = 0usize;
    for (idx, (t, _)) in gen.instances.iter().enumerate() {
        if t.kind != TreeKind::Initial || t.root.label != grammar.start_symbol {
            continue;
        }
        for d in gen.expand(idx, 5) {
            generated += 1;
            if let Ok(c) = compose(&d, &grammar, CheckMode::Eager) {
                by_yield
                    .entry(yield_of(&c.derived))
                    .or_default()
                    .insert(d.canonical());
            }
        }
    }
    assert!(generated > 100, "generation space is nontrivial");
    assert!(!by_yield.is_empty());

    let mut ok = true;
    for (toks, expected) in &by_yield {
        let parsed = parse_with(
            toks,
            &grammar,
            ParseOptions {
                mode: CheckMode::Eager,
                limit: 100_000,
            },
        )
        .expect("tokens are known");
        assert!(!parsed.truncated);
        let got: BTreeSet<String> = parsed.derivations.iter().map(|d| d.canonical()).collect();
        if &got != expected {
            eprintln!("mismatch on {toks:?}: generated {expected:#?}, parsed {got:#?}");
            ok = false;
        }
    }
    let ok = ok && start.elapsed() < Duration::from_secs(60);
    report(7, "parser returns exactly the exhaustively generated derivation set per yield, under 60s", ok);
}

fn test_sentences() -> Vec<(&'static str, Language)> {
    vec![
        ("ku -ka ku pokose -lul pwunsilhaissta", Language::Ko),
        ("ku -ka kunye -ka ssun ku pokose -lul pwunsilhaissta", Language::Ko),
        ("Tom -un pokose -nun pwunsilhaissta -ko malhaissta", Language::Ko),
        ("nwukwu -ka ku pokose -lul pwunsilhaissta", Language::Ko),
        ("ku -ka mwues -ul pwunsilhaissta", Language::Ko),
        ("ku -ka yangmal -ul sinta", Language::Ko),
        ("he lost that report", Language::En),
        ("he lost that report that she wrote", Language::En),
        ("he wears socks", Language::En),
        ("Tom said he lost the report", Language::En),
        ("who lost that report", Language::En),
    ]
}

#[test]
fn criterion_08_composition_soundness() {
    let bundle = bundle::bundled().expect("bundled grammars load");
    let mut ok = true;
    let mut checked = 0usize;
    for (sentence, lang) in test_sentences() {
        let grammar = bundle.grammar(lang);
        let toks = tokens(sentence);
        let parsed = parse_with(&toks, grammar, ParseOptions::default()).expect("known tokens");
        for d in &parsed.derivations {
            let c = compose(d, grammar, CheckMode::Eager).expect("accepted derivations compose");
            ok &= yield_of(&c.derived) == toks;
            checked += 1;
        }
    }
    let ok = ok && checked > 0;
    report(8, "every accepted derivation's derived tree yields exactly the input", ok);
}

#[test]
fn criterion_09_eager_deferred_equivalence() {
    let bundle = bundle::bundled().expect("bundled grammars load");
    let mut ok = true;
    for (sentence, lang) in test_sentences() {
        let grammar = bundle.grammar(lang);
        let toks = tokens(sentence);
        let canon = |mode| {
            let parsed = parse_with(
                &toks,
                grammar,
                ParseOptions { mode, limit: 10_000 },
            )
            .expect("known tokens");
            parsed
                .derivations
                .iter()
                .map(|d| d.canonical())
                .collect::<Vec<_>>()
        };
        ok &= canon(CheckMode::Eager) == canon(CheckMode::Deferred);
    }
    report(9, "eager and deferred feature checking accept identical derivation sets", ok);
}

#[test]
fn criterion_10_round_trips() {
    let mut ok = true;
    for sentence in [
        "ku -ka ku pokose -lul pwunsilhaissta",
        "ku -ka kunye -ka ssun ku pokose -lul pwunsilhaissta",
    ] {
        let there = run(
            sentence,
            Direction::KoEn,
            &mut DiscourseSession::new(),
            &PipelineOptions::default(),
        );
        let back = run(
            &top(&there),
            Direction::EnKo,
            &mut DiscourseSession::new(),
            &PipelineOptions::default(),
        );
        ok &= top(&back) == sentence;
    }
    for sentence in ["he wears socks", "he wears clothes"] {
        let there = run(
            sentence,
            Direction::EnKo,
            &mut DiscourseSession::new(),
            &PipelineOptions::default(),
        );
        let back = run(
            &top(&there),
            Direction::KoEn,
            &mut DiscourseSession::new(),
            &PipelineOptions::default(),
        );
        ok &= top(&back) == sentence;
    }
    report(10, "sentences (1)-(4) survive a full round trip token for token", ok);
}
