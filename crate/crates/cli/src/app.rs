//! Command-line interface: translate, parse, recover, validate.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use stag_core::compose::{compose, CheckMode};
use stag_core::discourse::{recover, register_topics, DiscourseSession};
use stag_core::parse::{parse_with, ParseOptions};
use stag_core::pipeline::{translate, Direction, PipelineOptions, TranslationResult};
use stag_core::Language;

use crate::bundle;
use crate::render;
use crate::schema::{load_session, save_session};

#[derive(Debug, Parser)]
#[command(name = "stag", about = "Korean-English transfer translation over synchronous TAGs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Grammar directory holding ko.json, en.json, ko-en.json (default: bundled)
    #[arg(long)]
    grammar: Option<PathBuf>,
    /// Per-stage derivation dump
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Cap on derivations and translations considered
    #[arg(long, default_value_t = 64)]
    limit: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Translate a sentence
    Translate {
        #[command(flatten)]
        common: Common,
        /// Translation direction
        #[arg(long, default_value = "ko-en")]
        dir: String,
        /// Print every translation, not just the top-ranked one
        #[arg(long)]
        all: bool,
        /// Discourse session file to load and save
        #[arg(long)]
        session: Option<PathBuf>,
        /// Render control-recovered subjects as pronouns
        #[arg(long)]
        pronominalize_subjects: bool,
        sentence: String,
    },
    /// Parse a sentence and print its derivations
    Parse {
        #[command(flatten)]
        common: Common,
        /// Source language (ko or en)
        #[arg(long)]
        lang: String,
        /// Print every derivation, not just the top-ranked one
        #[arg(long)]
        all: bool,
        sentence: String,
    },
    /// Recover dropped arguments of a Korean sentence and report how
    Recover {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        session: Option<PathBuf>,
        sentence: String,
    },
    /// Validate a grammar bundle
    Validate {
        /// Grammar directory (default: bundled)
        #[arg(long)]
        grammar: Option<PathBuf>,
    },
}

fn tokenize(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Translate {
            common,
            dir,
            all,
            session,
            pronominalize_subjects,
            sentence,
        } => {
            let Some(direction) = Direction::parse(&dir) else {
                eprintln!("error: --dir must be ko-en or en-ko");
                return Ok(2);
            };
            let bundle = bundle::load(common.grammar.as_deref())?;
            let mut sess = match &session {
                Some(p) => load_session(p)?,
                None => DiscourseSession::new(),
            };
            let options = PipelineOptions {
                limit: common.limit,
                pronominalize_subjects,
                ..PipelineOptions::default()
            };
            let tokens = tokenize(&sentence);
            let result = match translate(&tokens, direction, &bundle, &mut sess, &options) {
                Ok(r) => r,
                Err(stag_core::pipeline::PipelineError::Parse(e)) => {
                    eprintln!("error: {e}");
                    return Ok(2);
                }
                Err(e) => {
                    eprintln!("no translation: {e}");
                    return Ok(1);
                }
            };
            if let Some(p) = &session {
                save_session(p, &sess)?;
            }
            if result.translations.is_empty() {
                report_failure(&result, common.trace);
                return Ok(1);
            }
            print_translations(&result, &common, all);
            Ok(0)
        }
        Command::Parse {
            common,
            lang,
            all,
            sentence,
        } => {
            let Some(language) = Language::parse(&lang) else {
                eprintln!("error: --lang must be ko or en");
                return Ok(2);
            };
            let bundle = bundle::load(common.grammar.as_deref())?;
            let grammar = bundle.grammar(language);
            let tokens = tokenize(&sentence);
            let parsed = match parse_with(
                &tokens,
                grammar,
                ParseOptions {
                    mode: CheckMode::Eager,
                    limit: common.limit,
                },
            ) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(2);
                }
            };
            if parsed.derivations.is_empty() {
                eprintln!("no parse");
                return Ok(1);
            }
            let shown = if all {
                parsed.derivations.as_slice()
            } else {
                &parsed.derivations[..1]
            };
            for (i, d) in shown.iter().enumerate() {
                match common.format {
                    Format::Text => {
                        if shown.len() > 1 {
                            println!("derivation {i}:");
                        }
                        print!("{}", render::derivation_text(d));
                    }
                    Format::Dot => print!("{}", render::derivation_dot(d)),
                    Format::Json => println!("{}", render::derivation_json(d)),
                }
            }
            if common.trace {
                eprintln!(
                    "{} derivation(s){}",
                    parsed.derivations.len(),
                    if parsed.truncated { " (truncated)" } else { "" }
                );
            }
            Ok(0)
        }
        Command::Recover { common, session, sentence } => {
            let bundle = bundle::load(common.grammar.as_deref())?;
            let grammar = &bundle.ko;
            let mut sess = match &session {
                Some(p) => load_session(p)?,
                None => DiscourseSession::new(),
            };
            let tokens = tokenize(&sentence);
            let parsed = match parse_with(
                &tokens,
                grammar,
                ParseOptions {
                    mode: CheckMode::Eager,
                    limit: common.limit,
                },
            ) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(2);
                }
            };
            let Some(d) = parsed.derivations.first() else {
                eprintln!("no parse");
                return Ok(1);
            };
            let comp = match compose(d, grammar, CheckMode::Deferred) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("no parse: {e}");
                    return Ok(1);
                }
            };
            let local = register_topics(d, &comp, grammar, &mut sess);
            let (augmented, report) = recover(d, &comp.empty_slots, &local, &sess, grammar);
            if let Some(p) = &session {
                save_session(p, &sess)?;
            }
            print!("{}", render::recovery_text(&report));
            match common.format {
                Format::Text => print!("{}", render::derivation_text(&augmented)),
                Format::Dot => print!("{}", render::derivation_dot(&augmented)),
                Format::Json => println!("{}", render::derivation_json(&augmented)),
            }
            if report.unresolved().is_empty() {
                Ok(0)
            } else {
                Ok(1)
            }
        }
        Command::Validate { grammar } => {
            let bundle = bundle::load(grammar.as_deref())?;
            let violations = bundle.validate();
            if violations.is_empty() {
                println!("ok");
                Ok(0)
            } else {
                for v in &violations {
                    eprintln!("{v}");
                }
                Ok(2)
            }
        }
    }
}

fn print_translations(result: &TranslationResult, common: &Common, all: bool) {
    match common.format {
        Format::Json => {
            println!("{}", render::result_json(result));
        }
        Format::Dot => {
            let shown = if all {
                result.translations.as_slice()
            } else {
                &result.translations[..1]
            };
            for t in shown {
                print!("{}", render::derivation_dot(&t.target));
            }
        }
        Format::Text => {
            let shown = if all {
                result.translations.as_slice()
            } else {
                &result.translations[..1]
            };
            for t in shown {
                println!("{}", t.tokens.join(" "));
            }
        }
    }
    if common.trace {
        trace_dump(result);
    }
}

fn report_failure(result: &TranslationResult, trace: bool) {
    eprintln!("no translation");
    for c in result.candidates.iter().filter(|c| !c.accepted) {
        eprintln!(
            "  candidate [{}] rejected: {}",
            c.entries_used.join(", "),
            c.reason.as_deref().unwrap_or("composition failure")
        );
    }
    for g in &result.gaps {
        eprintln!("  gap at {}[{}]: {}", g.tree, g.lemma, g.detail);
    }
    if trace {
        trace_dump(result);
    }
}

fn trace_dump(result: &TranslationResult) {
    eprintln!("== trace ==");
    for (i, t) in result.translations.iter().enumerate() {
        eprintln!("translation {i}: {}", t.tokens.join(" "));
        eprintln!("source derivation:");
        eprint!("{}", render::derivation_text(&t.source));
        if !t.recovery.slots.is_empty() {
            eprintln!("recovery:");
            eprint!("{}", render::recovery_text(&t.recovery));
        }
        eprintln!("target derivation:");
        eprint!("{}", render::derivation_text(&t.target));
    }
    eprintln!("candidates:");
    for c in &result.candidates {
        if c.accepted {
            eprintln!(
                "  [{}] accepted: {}",
                c.entries_used.join(", "),
                c.tokens
                    .as_ref()
                    .map(|t| t.join(" "))
                    .unwrap_or_default()
            );
        } else {
            eprintln!(
                "  [{}] rejected: {}",
                c.entries_used.join(", "),
                c.reason.as_deref().unwrap_or("composition failure")
            );
        }
    }
    for g in &result.gaps {
        eprintln!("  gap at {}[{}]: {}", g.tree, g.lemma, g.detail);
    }
    if result.truncated {
        eprintln!("  (truncated)");
    }
}
