use prophier::rules::{bundled_probe_corpus, lint_rules, parse_rule_file, RuleFile, Severity};

fn errors(text: &str) -> Vec<String> {
    let file = parse_rule_file(text).expect("rule file parses");
    lint_rules(&file, &bundled_probe_corpus())
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.to_string())
        .collect()
}

#[test]
fn bundled_rules_are_clean() {
    let file = RuleFile::bundled();
    assert_eq!(file.rules.len(), 35);
    assert_eq!(file.group_count(), 17);
    assert!(lint_rules(&file, &bundled_probe_corpus()).is_empty());
}

#[test]
fn swapped_order_is_an_error() {
    let text = RuleFile::bundled_text()
        .replace("order = 1\n", "order = X\n")
        .replace("order = 35\n", "order = 1\n")
        .replace("order = X\n", "order = 35\n");
    let errs = errors(&text);
    assert!(!errs.is_empty());
    assert!(errs.iter().any(|e| e.contains("runs after")), "{errs:?}");
}

#[test]
fn missing_extract_is_an_error() {
    let text = RuleFile::bundled_text().replacen("=extract", "", 1);
    let errs = errors(&text);
    assert!(
        errs.iter()
            .any(|e| e.contains("lacks the `extract` capture")),
        "{errs:?}"
    );
    assert!(prophier::rules::load_rules_str(&text).is_err());
}
