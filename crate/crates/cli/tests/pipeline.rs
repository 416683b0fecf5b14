//! Pipeline and discourse behavior over the bundled grammars.

use stag::bundle;
use stag::schema::SessionJson;
use stag_core::discourse::{DiscourseSession, TopicList};
use stag_core::feat::fs;
use stag_core::pipeline::{translate, Direction, PipelineError, PipelineOptions};

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn ko_en(
    sentence: &str,
    session: &mut DiscourseSession,
) -> Result<Vec<String>, PipelineError> {
    let bundle = bundle::bundled().unwrap();
    let r = translate(
        &tokens(sentence),
        Direction::KoEn,
        &bundle,
        session,
        &PipelineOptions::default(),
    )?;
    Ok(r.translations[0].tokens.clone())
}

#[test]
fn dropped_argument_without_topics_is_unresolved() {
    let err = ko_en("canta", &mut DiscourseSession::new()).unwrap_err();
    assert!(matches!(err, PipelineError::Unresolved { slot, .. } if slot == "NP0"));
}

#[test]
fn session_reset_forgets_topics() {
    let mut session = DiscourseSession::new();
    ko_en("Tom -un pokose -nun pwunsilhaissta -ko malhaissta", &mut session).unwrap();
    assert_eq!(ko_en("canta", &mut session).unwrap(), vec!["Tom", "sleeps"]);
    session.reset();
    assert!(ko_en("canta", &mut session).is_err());
}

#[test]
fn re_mention_moves_topic_to_front() {
    let mut list = TopicList::new();
    list.push("pokose", fs(&[("animate", "-")]), 1);
    list.push("Tom", fs(&[("animate", "+")]), 2);
    assert_eq!(list.front().unwrap().lemma, "Tom");
    list.push("pokose", fs(&[("animate", "-")]), 3);
    let lemmas: Vec<&str> = list.entries.iter().map(|e| e.lemma.as_str()).collect();
    assert_eq!(lemmas, vec!["pokose", "Tom"]);
    assert_eq!(list.entries.len(), 2);
}

#[test]
fn fillers_stay_listed_and_fill_several_slots() {
    // both dropped arguments of the embedded clause resolve from the same
    // list without consuming entries
    let mut session = DiscourseSession::new();
    let out = ko_en("Tom -un pokose -nun pwunsilhaissta -ko malhaissta", &mut session).unwrap();
    assert_eq!(out.join(" "), "Tom said Tom lost the report");
    let lemmas: Vec<&str> = session.global.entries.iter().map(|e| e.lemma.as_str()).collect();
    assert_eq!(lemmas, vec!["pokose", "Tom"]);
}

#[test]
fn session_json_round_trip() {
    let mut session = DiscourseSession::new();
    ko_en("Tom -un pokose -nun pwunsilhaissta -ko malhaissta", &mut session).unwrap();
    let json = SessionJson::from_core(&session);
    let text = serde_json::to_string(&json).unwrap();
    let back: SessionJson = serde_json::from_str(&text).unwrap();
    assert_eq!(back.to_core(), session);
}

#[test]
fn non_topic_sentences_do_not_register() {
    let mut session = DiscourseSession::new();
    ko_en("ku -ka ku pokose -lul pwunsilhaissta", &mut session).unwrap();
    assert!(session.global.is_empty());
}

#[test]
fn en_ko_inserts_allomorphic_particles() {
    let bundle = bundle::bundled().unwrap();
    let mut session = DiscourseSession::new();
    let r = translate(
        &tokens("Tom lost that report"),
        Direction::EnKo,
        &bundle,
        &mut session,
        &PipelineOptions::default(),
    )
    .unwrap();
    let out = r.translations[0].tokens.join(" ");
    // -i after the consonant-final Tom, -lul after the vowel-final pokose
    assert_eq!(out, "Tom -i ku pokose -lul pwunsilhaissta");
}

#[test]
fn translation_limit_caps_output() {
    let bundle = bundle::bundled().unwrap();
    let r = translate(
        &tokens("he wears socks"),
        Direction::EnKo,
        &bundle,
        &mut DiscourseSession::new(),
        &PipelineOptions {
            limit: 1,
            ..PipelineOptions::default()
        },
    )
    .unwrap();
    assert_eq!(r.translations.len(), 1);
}
