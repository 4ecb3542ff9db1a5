use std::process::ExitCode;

use prophier::rules::{bundled_probe_corpus, lint_rules, parse_rule_file, RuleFile, Severity};
use prophier::tree::parse_lines;

use crate::config::Config;
use crate::LintArgs;

pub fn run(a: LintArgs, cfg: &Config) -> Result<ExitCode, String> {
    let (name, text) = match a.rules.as_ref().or(cfg.rules.as_ref()) {
        Some(p) => (
            p.display().to_string(),
            std::fs::read_to_string(p).map_err(|e| format!("reading {}: {e}", p.display()))?,
        ),
        None => (
            "bundled rules".to_owned(),
            RuleFile::bundled_text().to_owned(),
        ),
    };
    let file = match parse_rule_file(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {name}: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let probe = match &a.probe {
        Some(p) => {
            let t =
                std::fs::read_to_string(p).map_err(|e| format!("reading {}: {e}", p.display()))?;
            parse_lines(&t).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => bundled_probe_corpus(),
    };
    let diags = lint_rules(&file, &probe);
    for d in &diags {
        println!("{d}");
    }
    let errors = diags
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count();
    let warnings = diags.len() - errors;
    println!(
        "{} rules, {} groups, {errors} error{}",
        file.rules.len(),
        file.group_count(),
        if errors == 1 { "" } else { "s" }
    );
    if warnings > 0 {
        println!("{warnings} warning{}", if warnings == 1 { "" } else { "s" });
    }
    Ok(if errors == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
