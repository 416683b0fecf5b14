//! Text, dot, and JSON rendering of derivations and pipeline results.

use serde_json::{json, Value};

use stag_core::derivation::{DerivationNode, Provenance};
use stag_core::discourse::{ListScope, RecoveryReport, Resolution};
use stag_core::pipeline::TranslationResult;

fn provenance_str(p: Provenance) -> &'static str {
    match p {
        Provenance::Overt => "overt",
        Provenance::Empty => "empty",
        Provenance::RecoveredList => "recovered-list",
        Provenance::RecoveredPro => "recovered-pro",
    }
}

pub fn derivation_text(d: &DerivationNode) -> String {
    fn go(d: &DerivationNode, prefix: &str, out: &mut String) {
        out.push_str(&format!(
            "{}[{}] {}{}\n",
            d.tree_name,
            d.lemma,
            d.surface,
            match d.provenance {
                Provenance::Overt => String::new(),
                p => format!(" ({})", provenance_str(p)),
            }
        ));
        for c in &d.children {
            out.push_str(prefix);
            out.push_str(&format!("  {}@{} -> ", c.op, c.site));
            go(&c.child, &format!("{prefix}  "), out);
        }
    }
    let mut out = String::new();
    go(d, "", &mut out);
    out
}

pub fn derivation_json(d: &DerivationNode) -> Value {
    json!({
        "tree": d.tree_name,
        "lemma": d.lemma,
        "surface": d.surface,
        "provenance": provenance_str(d.provenance),
        "children": d.children.iter().map(|c| json!({
            "op": c.op.to_string(),
            "site": c.site.to_string(),
            "child": derivation_json(&c.child),
        })).collect::<Vec<_>>(),
    })
}

/// Graphviz dot for a derivation tree: nodes are elementary-tree instances,
/// edges are labeled with the operation and address.
pub fn derivation_dot(d: &DerivationNode) -> String {
    fn esc(s: &str) -> String {
        s.replace('\\', "\\\\").replace('"', "\\\"")
    }
    fn go(d: &DerivationNode, id: &mut usize, out: &mut String) -> usize {
        let me = *id;
        *id += 1;
        out.push_str(&format!(
            "  n{me} [label=\"{}\\n{}\"];\n",
            esc(&d.tree_name),
            esc(if d.surface.is_empty() { &d.lemma } else { &d.surface })
        ));
        for c in &d.children {
            let child = go(&c.child, id, out);
            out.push_str(&format!(
                "  n{me} -> n{child} [label=\"{} @ {}\"];\n",
                c.op, c.site
            ));
        }
        me
    }
    let mut out = String::from("digraph derivation {\n  node [shape=box];\n");
    let mut id = 0;
    go(d, &mut id, &mut out);
    out.push_str("}\n");
    out
}

/// Minimal dot syntax check used by the test suite: a single
/// `digraph name { ... }` whose statements are node declarations or edges
/// with optional `[key="value", ...]` attribute lists.
pub fn check_dot(s: &str) -> bool {
    let s = s.trim();
    let Some(rest) = s.strip_prefix("digraph") else {
        return false;
    };
    let rest = rest.trim_start();
    let Some(open) = rest.find('{') else {
        return false;
    };
    let name = rest[..open].trim();
    if !name.is_empty() && !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return false;
    }
    let Some(body) = rest[open + 1..].trim_end().strip_suffix('}') else {
        return false;
    };
    for stmt in body.split(';') {
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        let (head, attrs) = match stmt.find('[') {
            Some(i) => {
                let Some(a) = stmt[i..].strip_prefix('[').and_then(|r| r.strip_suffix(']'))
                else {
                    return false;
                };
                (stmt[..i].trim(), Some(a))
            }
            None => (stmt, None),
        };
        if let Some(attrs) = attrs {
            // every attribute is key=value with balanced quotes
            let mut quotes = 0usize;
            for ch in attrs.chars() {
                if ch == '"' {
                    quotes += 1;
                }
            }
            if quotes % 2 != 0 || (!attrs.contains('=') && !attrs.trim().is_empty()) {
                return false;
            }
        }
        let ids: Vec<&str> = head.split("->").map(|p| p.trim()).collect();
        if ids.iter().any(|i| i.is_empty()) {
            return false;
        }
        for ident in ids {
            if !ident
                .chars()
                .all(|c| c.is_alphanumeric() || c == '_' )
            {
                return false;
            }
        }
    }
    true
}

pub fn recovery_text(r: &RecoveryReport) -> String {
    let mut out = String::new();
    for s in &r.slots {
        out.push_str(&format!("slot {} of {}: ", s.slot, s.verb_lemma));
        match s.method {
            Resolution::ProControl => {
                out.push_str(&format!(
                    "PRO-control, co-indexed with matrix subject {}\n",
                    s.filler.as_deref().unwrap_or("?")
                ));
            }
            Resolution::List => {
                out.push('\n');
            }
            Resolution::Unresolved => out.push_str("unresolved\n"),
        }
        for t in &s.trials {
            let scope = match t.scope {
                ListScope::Local => "local",
                ListScope::Global => "global",
            };
            match (&t.accepted, &t.reason) {
                (true, _) => out.push_str(&format!("  {} ({scope}): accepted\n", t.lemma)),
                (false, reason) => out.push_str(&format!(
                    "  {} ({scope}): rejected ({})\n",
                    t.lemma,
                    reason.as_deref().unwrap_or("clash")
                )),
            }
        }
    }
    out
}

pub fn result_json(r: &TranslationResult) -> Value {
    json!({
        "source_tokens": r.source_tokens,
        "direction": r.direction.code(),
        "translations": r.translations.iter().map(|t| json!({
            "tokens": t.tokens,
            "source_derivation": derivation_json(&t.source),
            "target_derivation": derivation_json(&t.target),
            "recovery": t.recovery.slots.iter().map(|s| json!({
                "slot": s.slot,
                "verb": s.verb_lemma,
                "filler": s.filler,
                "method": match s.method {
                    Resolution::ProControl => "pro-control",
                    Resolution::List => "list",
                    Resolution::Unresolved => "unresolved",
                },
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "candidates": r.candidates.iter().map(|c| json!({
            "source_index": c.source_index,
            "entries": c.entries_used,
            "accepted": c.accepted,
            "reason": c.reason,
            "tokens": c.tokens,
        })).collect::<Vec<_>>(),
        "gaps": r.gaps.iter().map(|g| json!({
            "tree": g.tree, "lemma": g.lemma, "detail": g.detail,
        })).collect::<Vec<_>>(),
        "truncated": r.truncated,
    })
}
