//! Transformation rules: a pattern, what to extract and delete, how to
//! rephrase both halves, and how to label them.
//!
//! Rule files are TOML:
//!
//! ```toml
//! version = "1"
//!
//! [[rule]]
//! id = "R12"
//! group = "postposed-adverbial-participial"
//! construct = "adverbial-clauses"
//! order = 12
//! pattern = "ROOT <<: (S < (NP $.. (VP <+(VP) (SBAR=delete=context <, (IN=cue $+ (S=extract < (NP $.. VP)))))))"
//! hierarchy = "subordinate"
//! extract_template = "{extract} ."
//! remainder_template = "{rest}"
//! cue = "capture"            # or "none", or "phrase:in order to"
//! default_relation = "Elaboration"   # optional, used when no cue classifies
//! ```
//!
//! Reserved capture names: `extract` (the part turned into a new sentence),
//! `delete`, `delete1`, ... (removed from the remainder), `context` (marks
//! the context side: the extracted sentence if it overlaps `extract`, the
//! remainder otherwise), `cue` and `verb` (evidence for the relation).

mod apply;
mod lint;
pub mod template;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::pattern::{compile, Pattern, PatternError};
use crate::relation::RhetoricalRelation;

pub(crate) use apply::apply_with_origins;
pub use apply::{apply_rule, RephraseFailure, Side, SplitOutcome};
pub use lint::{lint_rules, Diagnostic, Severity};
pub use template::Template;

pub const EXPECTED_RULES: usize = 35;
pub const SUPPORTED_VERSION: &str = "1";

const DEFAULT_RULES: &str = include_str!("../../rules/default/rules.toml");
const DEFAULT_PROBE: &str = include_str!("../../rules/default/probe.trees");

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(&self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| format!("unknown {} `{s}`", stringify!($name)))
            }
        }
    };
}

named_enum! {
    /// Execution groups, declared in execution order.
    RuleGroup {
        CoordinateClauses => "coordinate-clauses",
        NonRestrictiveRelativeClauses => "non-restrictive-relative-clauses",
        AppositivePhrases => "appositive-phrases",
        PreposedAdverbialParticipial => "preposed-adverbial-participial",
        CoordinateVerbPhrases => "coordinate-verb-phrases",
        PostposedAdverbialParticipial => "postposed-adverbial-participial",
        ReportedSpeechPreposedAttribution => "reported-speech-preposed-attribution",
        PostposedAdverbialClauses => "postposed-adverbial-clauses",
        ReportedSpeechPostposedAttribution => "reported-speech-postposed-attribution",
        EmbeddedParticipialPhrases => "embedded-participial-phrases",
        RestrictiveRelativeClauses => "restrictive-relative-clauses",
        VerbPhraseComplementPrepositionalPhrases => "verb-phrase-complement-pps",
        PostposedParticipialPhrases => "postposed-participial-phrases",
        AdjectivalAdverbialPhrases => "adjectival-adverbial-phrases",
        LeadNounPhrases => "lead-noun-phrases",
        CommaOffsetPrepositionalPhrases => "comma-offset-pps",
        NounPhraseLists => "noun-phrase-lists",
    }
}

named_enum! {
    /// The linguistic constructs the rules address.
    Construct {
        CoordinateClauses => "coordinate-clauses",
        AdverbialClauses => "adverbial-clauses",
        NonRestrictiveRelativeClauses => "relative-clauses-non-restrictive",
        RestrictiveRelativeClauses => "relative-clauses-restrictive",
        ReportedSpeech => "reported-speech",
        CoordinateVerbPhrases => "coordinate-verb-phrases",
        CoordinateNounPhrases => "coordinate-noun-phrases",
        ParticipialPhrases => "participial-phrases",
        NonRestrictiveAppositions => "appositions-non-restrictive",
        RestrictiveAppositions => "appositions-restrictive",
        PrepositionalPhrases => "prepositional-phrases",
        AdjectivalAdverbialPhrases => "adjectival-adverbial-phrases",
        LeadNounPhrases => "lead-noun-phrases",
    }
}

impl RuleGroup {
    /// 1-based execution position.
    pub fn position(&self) -> usize {
        *self as usize + 1
    }
}

impl Construct {
    pub fn hierarchy(&self) -> Hierarchy {
        match self {
            Construct::CoordinateClauses
            | Construct::CoordinateVerbPhrases
            | Construct::CoordinateNounPhrases => Hierarchy::Coordinate,
            _ => Hierarchy::Subordinate,
        }
    }

    /// Number of rules addressing this construct.
    pub fn rule_count(&self) -> usize {
        match self {
            Construct::CoordinateClauses => 1,
            Construct::AdverbialClauses => 6,
            Construct::NonRestrictiveRelativeClauses => 5,
            Construct::RestrictiveRelativeClauses => 4,
            Construct::ReportedSpeech => 4,
            Construct::CoordinateVerbPhrases => 1,
            Construct::CoordinateNounPhrases => 2,
            Construct::ParticipialPhrases => 4,
            Construct::NonRestrictiveAppositions => 1,
            Construct::RestrictiveAppositions => 1,
            Construct::PrepositionalPhrases => 3,
            Construct::AdjectivalAdverbialPhrases => 2,
            Construct::LeadNounPhrases => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hierarchy {
    Coordinate,
    Subordinate,
}

impl FromStr for Hierarchy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coordinate" => Ok(Hierarchy::Coordinate),
            "subordinate" => Ok(Hierarchy::Subordinate),
            _ => Err(format!("unknown hierarchy `{s}`")),
        }
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hierarchy::Coordinate => "coordinate",
            Hierarchy::Subordinate => "subordinate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CueSource {
    FromCapture,
    FixedPhrase(Vec<String>),
    None,
}

impl FromStr for CueSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "capture" => Ok(CueSource::FromCapture),
            "none" => Ok(CueSource::None),
            _ => match s.strip_prefix("phrase:") {
                Some(p) if !p.trim().is_empty() => Ok(CueSource::FixedPhrase(
                    p.split_whitespace().map(str::to_lowercase).collect(),
                )),
                _ => Err(format!("bad cue source `{s}`")),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub id: String,
    pub group: RuleGroup,
    pub construct: Construct,
    pub order_index: usize,
    pub pattern: Pattern,
    pub hierarchy: Hierarchy,
    pub extract_rephrase: Template,
    pub remainder_rephrase: Template,
    pub cue_source: CueSource,
    pub default_relation: Option<RhetoricalRelation>,
}

impl Rule {
    /// Names of `delete*` captures declared by the pattern.
    pub fn delete_captures(&self) -> impl Iterator<Item = &str> {
        self.pattern
            .capture_names
            .iter()
            .map(String::as_str)
            .filter(|n| is_delete(n))
    }
}

pub(crate) fn is_delete(name: &str) -> bool {
    name.strip_prefix("delete")
        .is_some_and(|r| r.chars().all(|c| c.is_ascii_digit()))
}

#[derive(Debug, Clone)]
pub struct RuleFile {
    pub version: String,
    /// Rules in execution order.
    pub rules: Vec<Rule>,
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{}{message}", rule.as_ref().map(|r| format!("rule {r}: ")).unwrap_or_default())]
    SchemaError {
        rule: Option<String>,
        message: String,
    },
    #[error("rule {rule}: {source}")]
    PatternCompileError {
        rule: String,
        #[source]
        source: PatternError,
    },
    #[error("order violation: {0}")]
    OrderViolation(String),
    #[error("expected {expected} rules, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("rule file has {} error(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    version: Option<String>,
    #[serde(default, rename = "rule")]
    rules: Vec<RawRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    group: String,
    construct: String,
    order: usize,
    pattern: String,
    hierarchy: String,
    extract_template: String,
    remainder_template: String,
    cue: String,
    default_relation: Option<String>,
}

fn schema(rule: &str, message: impl Into<String>) -> RuleError {
    RuleError::SchemaError {
        rule: Some(rule.to_owned()),
        message: message.into(),
    }
}

impl RawRule {
    fn build(self) -> Result<Rule, RuleError> {
        let id = self.id;
        let pattern = compile(&self.pattern).map_err(|source| RuleError::PatternCompileError {
            rule: id.clone(),
            source,
        })?;
        let template = |t: &str, which: &str| {
            Template::parse(t).map_err(|e| schema(&id, format!("{which}: {e}")))
        };
        Ok(Rule {
            group: self.group.parse().map_err(|e: String| schema(&id, e))?,
            construct: self.construct.parse().map_err(|e: String| schema(&id, e))?,
            order_index: self.order,
            pattern,
            hierarchy: self.hierarchy.parse().map_err(|e: String| schema(&id, e))?,
            extract_rephrase: template(&self.extract_template, "extract_template")?,
            remainder_rephrase: template(&self.remainder_template, "remainder_template")?,
            cue_source: self.cue.parse().map_err(|e: String| schema(&id, e))?,
            default_relation: self
                .default_relation
                .map(|r| {
                    r.parse()
                        .map_err(|e: crate::relation::UnknownRelation| schema(&id, e.to_string()))
                })
                .transpose()?,
            id,
        })
    }
}

/// Parses a rule file without checking the rule inventory. Rules come back
/// sorted by their order index.
pub fn parse_rule_file(text: &str) -> Result<RuleFile, RuleError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| RuleError::SchemaError {
        rule: None,
        message: e.to_string(),
    })?;
    let version = raw.version.unwrap_or_else(|| SUPPORTED_VERSION.to_owned());
    if version != SUPPORTED_VERSION {
        return Err(RuleError::SchemaError {
            rule: None,
            message: format!("unsupported version `{version}`"),
        });
    }
    let mut rules = raw
        .rules
        .into_iter()
        .map(RawRule::build)
        .collect::<Result<Vec<_>, _>>()?;
    rules.sort_by_key(|r| r.order_index);
    Ok(RuleFile { version, rules })
}

/// Order indices must be exactly 1..=n.
pub(crate) fn order_problem(rules: &[Rule]) -> Option<String> {
    let mut seen = BTreeSet::new();
    for r in rules {
        if !seen.insert(r.order_index) {
            return Some(format!("order {} is used more than once", r.order_index));
        }
    }
    (1..=rules.len())
        .find(|i| !seen.contains(i))
        .map(|gap| format!("order {gap} is missing"))
}

/// Parses and fully validates rule file text.
pub fn load_rules_str(text: &str) -> Result<RuleFile, RuleError> {
    let file = parse_rule_file(text)?;
    if let Some(p) = order_problem(&file.rules) {
        return Err(RuleError::OrderViolation(p));
    }
    if file.rules.len() != EXPECTED_RULES {
        return Err(RuleError::CountMismatch {
            expected: EXPECTED_RULES,
            found: file.rules.len(),
        });
    }
    let errors: Vec<Diagnostic> = lint::static_checks(&file)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(RuleError::Invalid(errors));
    }
    Ok(file)
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleFile, RuleError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| RuleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_rules_str(&text)
}

impl RuleFile {
    /// The rule file shipped with the crate.
    pub fn bundled() -> RuleFile {
        load_rules_str(DEFAULT_RULES).expect("bundled rule file is valid")
    }

    pub fn bundled_text() -> &'static str {
        DEFAULT_RULES
    }

    pub fn get(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn group_count(&self) -> usize {
        self.rules
            .iter()
            .map(|r| r.group)
            .collect::<BTreeSet<_>>()
            .len()
    }
}

/// Trees the lint pass runs the rules on.
pub fn bundled_probe_corpus() -> Vec<crate::tree::ParseTree> {
    crate::tree::parse_lines(DEFAULT_PROBE).expect("bundled probe corpus parses")
}
