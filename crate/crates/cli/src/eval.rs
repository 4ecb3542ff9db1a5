use std::process::ExitCode;

use prophier::eval::{
    evaluate, load_gold, load_grouping, EvalOptions, Grouping, DEFAULT_THRESHOLD,
};
use prophier::output::read_structured;

use crate::config::Config;
use crate::EvalArgs;

pub fn run(a: EvalArgs, cfg: &Config) -> Result<ExitCode, String> {
    let threshold = a.threshold.or(cfg.threshold).unwrap_or(DEFAULT_THRESHOLD);
    let text = std::fs::read_to_string(&a.system)
        .map_err(|e| format!("reading {}: {e}", a.system.display()))?;
    let system: Vec<_> = read_structured(&text)
        .map_err(|e| format!("{}: {e}", a.system.display()))?
        .into_iter()
        .filter_map(|r| match r.outcome {
            Ok(lpt) => Some((r.id, lpt)),
            Err(e) => {
                log::warn!("sentence {} has no tree: {e}", r.id);
                None
            }
        })
        .collect();
    let gold = load_gold(&a.gold).map_err(|e| format!("{}: {e}", a.gold.display()))?;
    let grouping = match a.grouping.as_ref().or(cfg.grouping.as_ref()) {
        Some(p) => load_grouping(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => Grouping::default(),
    };
    let opts = EvalOptions {
        threshold,
        normalize: !a.no_normalize,
    };
    let report = evaluate(&system, &gold, &grouping, opts).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    match a.json.as_deref() {
        Some(p) if p.as_os_str() == "-" => println!("{json}"),
        Some(p) => {
            print!("{report}");
            std::fs::write(p, json + "\n").map_err(|e| format!("writing {}: {e}", p.display()))?;
        }
        None => print!("{report}"),
    }
    Ok(ExitCode::SUCCESS)
}
