//! Rhetorical relations and the cue-phrase classifier.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RhetoricalRelation {
    Contrast,
    List,
    Disjunction,
    Cause,
    Result,
    Temporal,
    Background,
    Condition,
    Elaboration,
    Explanation,
    Spatial,
    Attribution,
    Unknown,
}

impl RhetoricalRelation {
    pub const ALL: [RhetoricalRelation; 13] = [
        RhetoricalRelation::Contrast,
        RhetoricalRelation::List,
        RhetoricalRelation::Disjunction,
        RhetoricalRelation::Cause,
        RhetoricalRelation::Result,
        RhetoricalRelation::Temporal,
        RhetoricalRelation::Background,
        RhetoricalRelation::Condition,
        RhetoricalRelation::Elaboration,
        RhetoricalRelation::Explanation,
        RhetoricalRelation::Spatial,
        RhetoricalRelation::Attribution,
        RhetoricalRelation::Unknown,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RhetoricalRelation::Contrast => "Contrast",
            RhetoricalRelation::List => "List",
            RhetoricalRelation::Disjunction => "Disjunction",
            RhetoricalRelation::Cause => "Cause",
            RhetoricalRelation::Result => "Result",
            RhetoricalRelation::Temporal => "Temporal",
            RhetoricalRelation::Background => "Background",
            RhetoricalRelation::Condition => "Condition",
            RhetoricalRelation::Elaboration => "Elaboration",
            RhetoricalRelation::Explanation => "Explanation",
            RhetoricalRelation::Spatial => "Spatial",
            RhetoricalRelation::Attribution => "Attribution",
            RhetoricalRelation::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for RhetoricalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown relation name `{0}`")]
pub struct UnknownRelation(pub String);

impl FromStr for RhetoricalRelation {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RhetoricalRelation::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownRelation(s.to_owned()))
    }
}

/// Reference cue table, used to validate cue files.
pub const REFERENCE_CUES: &[(RhetoricalRelation, &[&str])] = {
    use RhetoricalRelation::*;
    &[
        (
            Contrast,
            &[
                "although",
                "but",
                "but now",
                "despite",
                "even though",
                "even when",
                "except when",
                "however",
                "instead",
                "rather",
                "still",
                "though",
                "thus",
                "until recently",
                "while",
                "yet",
            ],
        ),
        (List, &["and", "in addition", "in addition to", "moreover"]),
        (Disjunction, &["or"]),
        (Cause, &["largely because", "because", "since"]),
        (Result, &["as a result", "as a result of"]),
        (
            Temporal,
            &["after", "and after", "next", "then", "before", "previously"],
        ),
        (
            Background,
            &["as", "now", "once", "when", "with", "without"],
        ),
        (Condition, &["if", "in case", "unless", "until"]),
        (
            Elaboration,
            &[
                "more provocatively",
                "even before",
                "for example",
                "further",
                "recently",
                "since",
                "since now",
                "so",
                "so far",
                "where",
                "whereby",
                "whether",
            ],
        ),
        (
            Explanation,
            &["simply because", "because of", "indeed", "so", "so that"],
        ),
    ]
};

const DEFAULT_CUES: &str = include_str!("../resources/cue_phrases.tsv");
const DEFAULT_VERBS: &str = include_str!("../resources/attribution_verbs.txt");
const DEFAULT_LOCATIONS: &str = include_str!("../resources/location_markers.txt");

#[derive(Debug, Error)]
pub enum CueTableError {
    #[error("cue table is missing the row for `{0}`")]
    MissingRow(String),
    #[error("line {line}: {source}")]
    UnknownRelationName {
        line: usize,
        #[source]
        source: UnknownRelation,
    },
    #[error("line {0}: expected `relation<TAB>cue phrase`")]
    Malformed(usize),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Which relation wins when a cue is listed under several relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityPolicy {
    pub priority: Vec<RhetoricalRelation>,
}

impl Default for AmbiguityPolicy {
    fn default() -> Self {
        AmbiguityPolicy {
            priority: vec![
                RhetoricalRelation::Cause,
                RhetoricalRelation::Explanation,
                RhetoricalRelation::Elaboration,
            ],
        }
    }
}

impl AmbiguityPolicy {
    fn rank(&self, r: RhetoricalRelation) -> usize {
        self.priority
            .iter()
            .position(|p| *p == r)
            .unwrap_or(self.priority.len())
    }
}

/// Extra evidence for relations that are not signalled by a cue phrase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassifyHints {
    pub attribution_verb_lemma: Option<String>,
    pub has_location_entity: bool,
}

#[derive(Debug, Clone)]
pub struct CueTable {
    /// (cue tokens, relation) rows, longest phrase first.
    entries: Vec<(Vec<String>, RhetoricalRelation)>,
    attribution_verbs: BTreeSet<String>,
    location_markers: BTreeSet<String>,
    policy: AmbiguityPolicy,
}

impl Default for CueTable {
    fn default() -> Self {
        CueTable::from_parts(DEFAULT_CUES, DEFAULT_VERBS, DEFAULT_LOCATIONS)
            .expect("bundled cue table is valid")
    }
}

fn word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn parse_rows(text: &str) -> Result<Vec<(Vec<String>, RhetoricalRelation)>, CueTableError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim_end();
        if l.trim().is_empty() || l.trim_start().starts_with('#') {
            continue;
        }
        let (rel, cue) = l.split_once('\t').ok_or(CueTableError::Malformed(i + 1))?;
        let relation = rel
            .parse()
            .map_err(|source| CueTableError::UnknownRelationName {
                line: i + 1,
                source,
            })?;
        let tokens: Vec<String> = cue.split_whitespace().map(str::to_lowercase).collect();
        if tokens.is_empty() {
            return Err(CueTableError::Malformed(i + 1));
        }
        rows.push((tokens, relation));
    }
    Ok(rows)
}

impl CueTable {
    /// Builds a table from cue rows and word lists, checking that every
    /// reference row is present.
    pub fn from_parts(cues: &str, verbs: &str, locations: &str) -> Result<Self, CueTableError> {
        let mut entries = parse_rows(cues)?;
        for (rel, phrases) in REFERENCE_CUES {
            for p in *phrases {
                let toks: Vec<String> = p.split(' ').map(str::to_owned).collect();
                if !entries.iter().any(|(t, r)| *t == toks && r == rel) {
                    return Err(CueTableError::MissingRow((*p).to_owned()));
                }
            }
        }
        // stable: longest first, file order otherwise
        entries.sort_by_key(|(t, _)| std::cmp::Reverse(t.len()));
        Ok(CueTable {
            entries,
            attribution_verbs: word_list(verbs),
            location_markers: word_list(locations),
            policy: AmbiguityPolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: AmbiguityPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn policy(&self) -> &AmbiguityPolicy {
        &self.policy
    }

    pub fn rows(&self) -> impl Iterator<Item = (String, RhetoricalRelation)> + '_ {
        self.entries.iter().map(|(t, r)| (t.join(" "), *r))
    }

    pub fn attribution_verbs(&self) -> &BTreeSet<String> {
        &self.attribution_verbs
    }

    pub fn location_markers(&self) -> &BTreeSet<String> {
        &self.location_markers
    }

    /// Relation for an exact cue phrase, with ambiguity resolved.
    fn lookup(&self, cue: &[String]) -> Option<RhetoricalRelation> {
        self.entries
            .iter()
            .filter(|(t, _)| t.as_slice() == cue)
            .map(|(_, r)| *r)
            .min_by_key(|r| self.policy.rank(*r))
    }

    /// Longest table phrase occurring in `cue`, leftmost on ties.
    fn longest_within(&self, cue: &[String]) -> Option<RhetoricalRelation> {
        let longest = cue.len();
        for len in (1..=longest).rev() {
            for start in 0..=cue.len() - len {
                if let Some(r) = self.lookup(&cue[start..start + len]) {
                    return Some(r);
                }
            }
        }
        None
    }

    pub fn classify(&self, cue: Option<&[String]>, hints: &ClassifyHints) -> RhetoricalRelation {
        if let Some(verb) = &hints.attribution_verb_lemma {
            if self.attribution_verbs.contains(&verb.to_lowercase()) {
                return RhetoricalRelation::Attribution;
            }
        }
        let Some(cue) = cue.filter(|c| !c.is_empty()) else {
            return RhetoricalRelation::Unknown;
        };
        let cue: Vec<String> = cue.iter().map(|t| t.to_lowercase()).collect();
        if let Some(r) = self.longest_within(&cue) {
            return r;
        }
        if hints.has_location_entity && cue.iter().any(|t| self.location_markers.contains(t)) {
            return RhetoricalRelation::Spatial;
        }
        RhetoricalRelation::Unknown
    }

    /// Convenience wrapper taking a space-separated cue.
    pub fn classify_str(&self, cue: &str) -> RhetoricalRelation {
        let toks: Vec<String> = cue.split_whitespace().map(str::to_owned).collect();
        self.classify(Some(&toks), &ClassifyHints::default())
    }
}

/// Loads a cue table file (`relation<TAB>cue phrase` per line) with the
/// bundled attribution verb and location marker lists.
pub fn load_cue_table(path: impl AsRef<Path>) -> Result<CueTable, CueTableError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CueTableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    CueTable::from_parts(&text, DEFAULT_VERBS, DEFAULT_LOCATIONS)
}

const IRREGULAR_VERBS: &[(&str, &str)] = &[
    ("said", "say"),
    ("says", "say"),
    ("told", "tell"),
    ("thought", "think"),
    ("felt", "feel"),
    ("found", "find"),
    ("wrote", "write"),
    ("written", "write"),
    ("knew", "know"),
    ("known", "know"),
    ("held", "hold"),
    ("was", "be"),
    ("were", "be"),
    ("is", "be"),
    ("are", "be"),
    ("been", "be"),
    ("has", "have"),
    ("had", "have"),
];

/// Crude verb lemmatizer, good enough for matching reporting verbs.
pub fn verb_lemma(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some((_, l)) = IRREGULAR_VERBS.iter().find(|(f, _)| *f == w) {
        return (*l).to_owned();
    }
    let stem = |suffix: &str| w.strip_suffix(suffix).map(str::to_owned);
    if let Some(s) = stem("ied") {
        return s + "y";
    }
    if let Some(s) = stem("ies") {
        return s + "y";
    }
    for suf in ["ed", "es", "s", "ing"] {
        if let Some(s) = stem(suf) {
            if s.len() < 2 {
                continue;
            }
            // try the bare stem first, then with a restored final e
            let candidates = [s.clone(), format!("{s}e")];
            return candidates
                .into_iter()
                .find(|c| KNOWN_STEMS.contains(&c.as_str()))
                .unwrap_or_else(|| {
                    if suf == "ed" && ends_in_silent_e(&s) {
                        format!("{s}e")
                    } else {
                        s
                    }
                });
        }
    }
    w
}

// Stems where stripping a suffix is ambiguous about a final `e`.
const KNOWN_STEMS: &[&str] = &[
    "announce",
    "argue",
    "believe",
    "conclude",
    "declare",
    "disclose",
    "guess",
    "imagine",
    "indicate",
    "note",
    "observe",
    "promise",
    "propose",
    "realize",
    "state",
    "suppose",
    "emphasize",
    "deny",
    "say",
    "add",
    "claim",
    "report",
    "warn",
    "insist",
    "explain",
    "suggest",
    "predict",
    "estimate",
    "confirm",
    "reveal",
    "stress",
    "expect",
    "fear",
    "assume",
    "complain",
    "concede",
    "contend",
    "maintain",
    "mention",
    "recall",
    "reply",
    "respond",
    "testify",
    "doubt",
    "hope",
    "allege",
    "acknowledge",
    "admit",
    "advise",
    "answer",
    "assert",
    "boast",
    "comment",
    "remark",
    "repeat",
    "recommend",
    "speculate",
    "suspect",
    "tell",
    "think",
    "write",
    "feel",
    "find",
];

fn ends_in_silent_e(stem: &str) -> bool {
    let b = stem.as_bytes();
    b.len() >= 2 && matches!(b[b.len() - 1], b'c' | b'v' | b'z' | b'g' | b'u')
}
