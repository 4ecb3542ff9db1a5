use std::io::Write;
use std::process::ExitCode;

use prophier::output::{render, Format, SentenceResult};
use prophier::parser::{check_yields, fetch_parses, HttpSource, ParseSource};
use prophier::relation::CueTable;
use prophier::rules::{load_rules, RuleFile};
use prophier::transform::transform;
use prophier::tree::{parse_bracketed, ParseTree};

use crate::config::Config;
use crate::SimplifyArgs;

/// Input sentences: a tree or the reason there is none.
type Inputs = Vec<Result<ParseTree, String>>;

fn read(path: &std::path::Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))
}

fn inputs(a: &SimplifyArgs, cfg: &Config) -> Result<Inputs, String> {
    if let Some(path) = &a.trees {
        let text = read(path)?;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match parse_bracketed(line) {
                Ok(t) => out.push(Ok(t)),
                Err(e) if a.keep_going => out.push(Err(format!("line {}: {e}", i + 1))),
                Err(e) => return Err(format!("{}: line {}: {e}", path.display(), i + 1)),
            }
        }
        return Ok(out);
    }
    let Some(path) = &a.text else {
        return Err("one of --trees or --text is required".into());
    };
    let sentences: Vec<String> = read(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_owned)
        .collect();
    let source = if let Some(p) = &a.parses {
        ParseSource::File(p.clone())
    } else if let Some(url) = a.parser.clone().or_else(|| cfg.parser_url.clone()) {
        ParseSource::Http(HttpSource {
            workers: a.workers.or(cfg.workers).unwrap_or(4),
            ..HttpSource::new(url)
        })
    } else {
        return Err("--text needs --parses or --parser".into());
    };
    let trees = fetch_parses(&source, &sentences).map_err(|e| e.to_string())?;
    check_yields(&trees, &sentences).map_err(|e| e.to_string())?;
    Ok(trees.into_iter().map(Ok).collect())
}

fn process(
    inputs: Inputs,
    rules: &RuleFile,
    cues: &CueTable,
    workers: usize,
) -> Vec<SentenceResult> {
    let run = |(i, input): (usize, Result<ParseTree, String>)| SentenceResult {
        id: (i + 1).to_string(),
        outcome: input.and_then(|t| transform(&t, rules, cues).map_err(|e| e.to_string())),
    };
    let items: Vec<_> = inputs.into_iter().enumerate().collect();
    if workers <= 1 || items.len() < 2 {
        return items.into_iter().map(run).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let mut groups: Vec<Vec<_>> = Vec::new();
    let mut it = items.into_iter().peekable();
    while it.peek().is_some() {
        groups.push(it.by_ref().take(chunk).collect());
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = groups
            .into_iter()
            .map(|g| s.spawn(move || g.into_iter().map(run).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

pub fn run(a: SimplifyArgs, cfg: &Config) -> Result<ExitCode, String> {
    let format: Format = a
        .format
        .clone()
        .or_else(|| cfg.format.clone())
        .unwrap_or_else(|| "tree".into())
        .parse()?;
    let rules = match a.rules.as_ref().or(cfg.rules.as_ref()) {
        Some(p) => load_rules(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => RuleFile::bundled(),
    };
    let cues = CueTable::default();
    let workers = a.workers.or(cfg.workers).unwrap_or(1).max(1);
    let inputs = inputs(&a, cfg)?;
    let results = process(inputs, &rules, &cues, workers);

    let failed: Vec<&SentenceResult> = results.iter().filter(|r| r.outcome.is_err()).collect();
    if !a.keep_going {
        if let Some(r) = failed.first() {
            let e = r.outcome.as_ref().err().expect("failed");
            return Err(format!("sentence {}: {e}", r.id));
        }
    }
    for r in &failed {
        log::warn!(
            "sentence {}: {}",
            r.id,
            r.outcome.as_ref().err().expect("failed")
        );
    }
    let text = render(format, &results);
    match &a.out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("writing {}: {e}", p.display()))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("writing output: {e}"))?,
    }
    Ok(ExitCode::SUCCESS)
}
