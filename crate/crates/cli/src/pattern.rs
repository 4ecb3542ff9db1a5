use std::process::ExitCode;

use prophier::pattern::{compile, find_all};
use prophier::tree::{parse_lines, ParseTree};

use crate::PatternArgs;

fn describe(node: &ParseTree) -> String {
    let span = node.span();
    format!(
        "{} [{}, {}) \"{}\"",
        node.label(),
        span.start,
        span.end,
        node.tokens().join(" ")
    )
}

fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        return "/".into();
    }
    path.iter().map(|i| format!("/{i}")).collect()
}

pub fn run(a: PatternArgs) -> Result<ExitCode, String> {
    let pattern = match compile(&a.pattern) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("  {}", a.pattern);
            if let Some(pos) = e.position() {
                let col = a.pattern[..pos.min(a.pattern.len())].chars().count();
                eprintln!("  {}^", " ".repeat(col));
            }
            return Ok(ExitCode::from(1));
        }
    };
    let text = std::fs::read_to_string(&a.trees)
        .map_err(|e| format!("reading {}: {e}", a.trees.display()))?;
    let trees = parse_lines(&text).map_err(|e| format!("{}: {e}", a.trees.display()))?;
    let mut total = 0;
    for (i, t) in trees.iter().enumerate() {
        let matches = find_all(&pattern, t);
        total += matches.len();
        println!(
            "tree {}: {} match{}",
            i + 1,
            matches.len(),
            if matches.len() == 1 { "" } else { "es" }
        );
        for (k, m) in matches.iter().enumerate() {
            println!(
                "  match {} at {} {}",
                k + 1,
                path_string(&m.anchor.path),
                describe(m.anchor.node)
            );
            for (name, b) in &m.bindings {
                println!("    {name} = {} {}", path_string(&b.path), describe(b.node));
            }
        }
    }
    println!(
        "{total} match{} in {} tree{}",
        if total == 1 { "" } else { "es" },
        trees.len(),
        if trees.len() == 1 { "" } else { "s" }
    );
    Ok(ExitCode::SUCCESS)
}
