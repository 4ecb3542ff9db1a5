mod common;

use prophier::output::{
    flat_records, read_structured, read_tree_format, render, Direction, Format, ReadError,
    SentenceResult,
};
use prophier::relation::{CueTable, RhetoricalRelation};
use prophier::rules::{bundled_probe_corpus, RuleFile};
use prophier::transform::transform;

fn corpus_results() -> Vec<SentenceResult> {
    let rules = RuleFile::bundled();
    let cues = CueTable::default();
    bundled_probe_corpus()
        .iter()
        .enumerate()
        .map(|(i, t)| SentenceResult {
            id: (i + 1).to_string(),
            outcome: transform(t, &rules, &cues).map_err(|e| e.to_string()),
        })
        .collect()
}

#[test]
fn flat_records_for_volvulus_sentence() {
    let tree = &common::fixture_trees("volvulus.tree")[0];
    let lpt = transform(tree, &RuleFile::bundled(), &CueTable::default()).unwrap();
    let recs = flat_records(&lpt);
    assert_eq!(recs.len(), 6);
    assert_eq!(
        recs.iter().map(|r| r.prop_id).collect::<Vec<_>>(),
        vec![1, 2, 3, 4, 5, 6]
    );
    assert_eq!(
        recs.iter().map(|r| r.context_layer).collect::<Vec<_>>(),
        lpt.context_layers()
    );

    let volvulus = &recs[2];
    assert_eq!(volvulus.text, "Volvulus is suspected .");
    assert_eq!(volvulus.context_layer, 2);
    assert_eq!(volvulus.links.len(), 1);
    assert_eq!(volvulus.links[0].relation, RhetoricalRelation::Condition);
    assert_eq!(volvulus.links[0].target, 4);

    let list = recs[4]
        .links
        .iter()
        .find(|l| l.relation == RhetoricalRelation::List)
        .unwrap();
    assert_eq!((list.target, list.direction), (6, Direction::CoreCore));

    // each link shows up on both of its records
    for r in &recs {
        for l in &r.links {
            let back = &recs[l.target - 1];
            assert!(back
                .links
                .iter()
                .any(|b| b.target == r.prop_id && b.relation == l.relation));
        }
    }
    let text = render(
        Format::Flat,
        &[SentenceResult {
            id: "1".into(),
            outcome: Ok(lpt),
        }],
    );
    assert!(
        text.contains("#3\t2\tVolvulus is suspected .\tL:Condition #4"),
        "{text}"
    );
}

#[test]
fn structured_round_trip_on_the_corpus() {
    let results = corpus_results();
    let text = render(Format::Structured, &results);
    assert_eq!(text.lines().count(), results.len());
    assert!(text
        .lines()
        .all(|l| l.starts_with("{\"schema_version\":1,")));
    assert_eq!(read_structured(&text).unwrap(), results);
}

#[test]
fn tree_format_round_trip_on_the_corpus() {
    let results = corpus_results();
    let text = render(Format::Tree, &results);
    let back = read_tree_format(&text).unwrap();
    assert_eq!(back.len(), results.len());
    assert_eq!(render(Format::Tree, &back), text);
}

#[test]
fn failed_sentences_are_recorded() {
    let results = vec![SentenceResult {
        id: "7".into(),
        outcome: Err("no parse".into()),
    }];
    assert_eq!(render(Format::Tree, &results), "# 7\terror: no parse\n");
    let structured = render(Format::Structured, &results);
    assert_eq!(read_structured(&structured).unwrap(), results);
}

#[test]
fn bad_structured_input_names_the_line() {
    let good = render(Format::Structured, &corpus_results()[..1]);
    let text = format!("{good}{{\"schema_version\":2,\"id\":\"x\",\"error\":\"e\"}}\n");
    let ReadError::Syntax { line, .. } = read_structured(&text).unwrap_err();
    assert_eq!(line, 2);
    let ReadError::Syntax { line, .. } = read_structured("\nnot json\n").unwrap_err();
    assert_eq!(line, 2);
}
