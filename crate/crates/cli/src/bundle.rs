//! Loading grammar bundles: the built-in reference grammars or a
//! `--grammar` directory holding `ko.json`, `en.json`, and `ko-en.json`.

use std::path::Path;

use anyhow::{Context, Result};

use stag_core::pipeline::GrammarBundle;

use crate::schema::{parse_grammar, parse_transfer};

pub const KO_JSON: &str = include_str!("../assets/ko.json");
pub const EN_JSON: &str = include_str!("../assets/en.json");
pub const KO_EN_JSON: &str = include_str!("../assets/ko-en.json");

pub fn bundled() -> Result<GrammarBundle> {
    Ok(GrammarBundle {
        ko: parse_grammar(KO_JSON, "bundled ko.json")?,
        en: parse_grammar(EN_JSON, "bundled en.json")?,
        transfer: parse_transfer(KO_EN_JSON, "bundled ko-en.json")?,
    })
}

pub fn load_dir(dir: &Path) -> Result<GrammarBundle> {
    let read = |name: &str| -> Result<String> {
        let path = dir.join(name);
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
    };
    Ok(GrammarBundle {
        ko: parse_grammar(&read("ko.json")?, "ko.json")?,
        en: parse_grammar(&read("en.json")?, "en.json")?,
        transfer: parse_transfer(&read("ko-en.json")?, "ko-en.json")?,
    })
}

pub fn load(dir: Option<&Path>) -> Result<GrammarBundle> {
    match dir {
        Some(d) => load_dir(d),
        None => bundled(),
    }
}
