mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use prophier::output::{render, Format, SentenceResult};
use prophier::relation::CueTable;
use prophier::rules::{bundled_probe_corpus, RuleFile};
use prophier::transform::transform;

#[test]
fn volvulus_sentence() {
    let tree = &common::fixture_trees("volvulus.tree")[0];
    let rules = RuleFile::bundled();
    let cues = CueTable::default();
    let started = Instant::now();
    let lpt = transform(tree, &rules, &cues).unwrap();
    assert!(started.elapsed().as_secs_f64() < 1.0);
    common::compare_shape(&lpt.root, &common::volvulus_shape()).unwrap();
    assert_eq!(lpt.context_layers(), vec![0, 1, 2, 1, 2, 2]);

    let show = |lpt| {
        render(
            Format::Structured,
            &[SentenceResult {
                id: "1".into(),
                outcome: Ok(lpt),
            }],
        )
    };
    let first = show(lpt);
    for _ in 0..10 {
        assert_eq!(show(transform(tree, &rules, &cues).unwrap()), first);
    }
}

#[test]
fn bell_sentence_leaves() {
    let corpus = bundled_probe_corpus();
    let bell = corpus
        .iter()
        .find(|t| t.tokens().first() == Some(&"Bell"))
        .expect("corpus has the Bell sentence");
    let lpt = transform(bell, &RuleFile::bundled(), &CueTable::default()).unwrap();
    let leaves: BTreeSet<String> = lpt
        .leaves_in_order()
        .iter()
        .map(|p| common::detokenize(&p.text))
        .collect();
    let expected: BTreeSet<String> = [
        "Bell is a telecommunication company.",
        "Bell makes electrical goods.",
        "Bell makes computers.",
        "Bell makes building products.",
        "Bell distributes electrical goods.",
        "Bell distributes computers.",
        "Bell distributes building products.",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    assert_eq!(leaves, expected);
    assert_eq!(lpt.leaves_in_order().len(), 7);
}
