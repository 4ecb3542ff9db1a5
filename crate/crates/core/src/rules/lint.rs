use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::tree::ParseTree;

use super::{
    apply_rule, is_delete, order_problem, Construct, CueSource, Hierarchy, RuleFile, RuleGroup,
    EXPECTED_RULES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.rule {
            Some(r) => write!(f, "{sev}: {r}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

fn error(rule: Option<&str>, message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        rule: rule.map(str::to_owned),
        message,
    }
}

fn warning(rule: &str, message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Warning,
        rule: Some(rule.to_owned()),
        message,
    }
}

const IMPLICIT: &[&str] = &["extract", "context", "cue", "verb"];

/// Checks that need no probe sentences.
pub(crate) fn static_checks(file: &RuleFile) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if file.rules.len() != EXPECTED_RULES {
        out.push(error(
            None,
            format!(
                "expected {EXPECTED_RULES} rules, found {}",
                file.rules.len()
            ),
        ));
    }
    if let Some(p) = order_problem(&file.rules) {
        out.push(error(None, p));
    }

    let mut ids = BTreeSet::new();
    let mut prev: Option<(RuleGroup, &str)> = None;
    for r in &file.rules {
        let id = r.id.as_str();
        if !ids.insert(id) {
            out.push(error(Some(id), "duplicate rule id".into()));
        }
        let declared = &r.pattern.capture_names;
        if !declared.contains("extract") {
            out.push(error(
                Some(id),
                "pattern lacks the `extract` capture".into(),
            ));
        }
        if r.hierarchy == Hierarchy::Subordinate && !declared.contains("context") {
            out.push(error(
                Some(id),
                "subordinate rule lacks the `context` capture".into(),
            ));
        }
        if r.cue_source == CueSource::FromCapture && !declared.contains("cue") {
            out.push(error(
                Some(id),
                "cue comes from a capture but the pattern has no `cue`".into(),
            ));
        }
        if r.hierarchy != r.construct.hierarchy() {
            out.push(error(
                Some(id),
                format!("{} rules must be {}", r.construct, r.construct.hierarchy()),
            ));
        }
        let mut used = r.extract_rephrase.captures();
        used.extend(r.remainder_rephrase.captures());
        for name in &used {
            if !declared.contains(name) {
                out.push(error(
                    Some(id),
                    format!("template uses undeclared capture `{name}`"),
                ));
            }
        }
        for name in declared {
            if !used.contains(name) && !IMPLICIT.contains(&name.as_str()) && !is_delete(name) {
                out.push(warning(id, format!("capture `{name}` is never used")));
            }
        }
        if let Some((g, pid)) = prev {
            if r.group < g {
                out.push(error(
                    Some(id),
                    format!(
                        "group {} (position {}) runs after {pid} of group {} (position {})",
                        r.group,
                        r.group.position(),
                        g,
                        g.position()
                    ),
                ));
            }
        }
        prev = Some((r.group, id));
    }

    let groups: BTreeSet<RuleGroup> = file.rules.iter().map(|r| r.group).collect();
    for g in RuleGroup::ALL {
        if !groups.contains(g) {
            out.push(error(None, format!("no rule in group {g}")));
        }
    }
    let mut per_construct: BTreeMap<Construct, usize> = BTreeMap::new();
    for r in &file.rules {
        *per_construct.entry(r.construct).or_default() += 1;
    }
    for c in Construct::ALL {
        let n = per_construct.get(c).copied().unwrap_or(0);
        if n != c.rule_count() {
            out.push(error(
                None,
                format!("construct {c} has {n} rules, expected {}", c.rule_count()),
            ));
        }
    }
    out
}

/// Runs every rule on the probe sentences and on the sentences they split
/// into, recording which rule fires first each time.
fn probe_checks(file: &RuleFile, probe: &[ParseTree]) -> Vec<Diagnostic> {
    let mut fired: BTreeSet<&str> = BTreeSet::new();
    let mut first: BTreeSet<&str> = BTreeSet::new();
    for tree in probe {
        let mut work = vec![tree.clone()];
        let mut budget = 1000;
        while let Some(t) = work.pop() {
            let mut winner = None;
            for r in &file.rules {
                if let Ok(Some(out)) = apply_rule(r, &t) {
                    fired.insert(&r.id);
                    if winner.is_none() {
                        winner = Some(out);
                        first.insert(&r.id);
                    }
                }
            }
            if let Some(out) = winner {
                budget -= 1;
                if budget == 0 {
                    break;
                }
                work.push(out.extracted.tree);
                work.push(out.remainder.tree);
            }
        }
    }
    let mut out = Vec::new();
    for r in &file.rules {
        if !fired.contains(r.id.as_str()) {
            out.push(warning(&r.id, "never fires on the probe corpus".into()));
        } else if !first.contains(r.id.as_str()) {
            out.push(warning(
                &r.id,
                "always preceded by an earlier rule on the probe corpus".into(),
            ));
        }
    }
    out
}

/// All diagnostics for a rule file, errors first.
pub fn lint_rules(file: &RuleFile, probe: &[ParseTree]) -> Vec<Diagnostic> {
    let mut out = static_checks(file);
    if !probe.is_empty() {
        out.extend(probe_checks(file, probe));
    }
    out.sort_by_key(|d| d.severity);
    out
}
