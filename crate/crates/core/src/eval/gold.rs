//! Gold annotation files and relation grouping maps.
//!
//! A gold file is a sequence of sentence blocks:
//!
//! ```text
//! sentence: wsj_0600.3
//! text: Mr. Volk, 55 years old, succeeds Duncan Dwight, who retired in September.
//! edu: Mr. Volk, 55 years old, succeeds Duncan Dwight,
//! edu: who retired in September.
//! link: 1 2 NN elaboration-additional
//! ```
//!
//! `link: i j NUC RELATION [CUE ...]` joins EDUs `i` and `j` (1-based).
//! `NUC` is `NN`, `NS` (EDU `i` is the nucleus) or `SN`. Words after the
//! relation name are the cue phrase signalling it, if any. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Nuclearity {
    NN,
    NS,
    SN,
}

impl FromStr for Nuclearity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NN" => Ok(Nuclearity::NN),
            "NS" => Ok(Nuclearity::NS),
            "SN" => Ok(Nuclearity::SN),
            _ => Err(format!("nuclearity must be NN, NS or SN, not `{s}`")),
        }
    }
}

impl fmt::Display for Nuclearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldLink {
    /// 0-based EDU indices.
    pub edu_i: usize,
    pub edu_j: usize,
    pub nuclearity: Nuclearity,
    pub relation: String,
    pub cue: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldSentence {
    pub sentence_id: String,
    pub text: String,
    pub edus: Vec<String>,
    pub links: Vec<GoldLink>,
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

struct Block {
    line: usize,
    sentence: GoldSentence,
    has_text: bool,
}

impl Block {
    fn finish(self) -> Result<GoldSentence, EvalError> {
        let s = self.sentence;
        let err = |message: String| EvalError::Format {
            line: self.line,
            message,
        };
        if !self.has_text {
            return Err(err(format!(
                "sentence `{}` has no text line",
                s.sentence_id
            )));
        }
        if s.edus.is_empty() {
            return Err(err(format!("sentence `{}` has no EDUs", s.sentence_id)));
        }
        if squash(&s.edus.join(" ")) != squash(&s.text) {
            return Err(err(format!(
                "EDUs of sentence `{}` do not tile its text",
                s.sentence_id
            )));
        }
        Ok(s)
    }
}

/// Parses a gold file.
pub fn parse_gold(text: &str) -> Result<Vec<GoldSentence>, EvalError> {
    let mut out = Vec::new();
    let mut block: Option<Block> = None;
    let mut pending_links: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| EvalError::Format { line, message };
        let (key, value) = trimmed
            .split_once(':')
            .ok_or_else(|| err("expected `key: value`".into()))?;
        let value = value.trim();
        if key == "sentence" {
            if let Some(b) = block.take() {
                out.push(check_links(b.finish()?, &pending_links)?);
            }
            pending_links.clear();
            block = Some(Block {
                line,
                sentence: GoldSentence {
                    sentence_id: value.to_owned(),
                    text: String::new(),
                    edus: Vec::new(),
                    links: Vec::new(),
                },
                has_text: false,
            });
            continue;
        }
        let b = block
            .as_mut()
            .ok_or_else(|| err(format!("`{key}` before the first `sentence:` line")))?;
        match key {
            "text" => {
                b.sentence.text = value.to_owned();
                b.has_text = true;
            }
            "edu" => b.sentence.edus.push(value.to_owned()),
            "link" => {
                let f: Vec<&str> = value.split_whitespace().collect();
                if f.len() < 4 {
                    return Err(err("expected `link: i j NN|NS|SN relation [cue]`".into()));
                }
                let index = |s: &str| -> Result<usize, EvalError> {
                    match s.parse::<usize>() {
                        Ok(n) if n >= 1 => Ok(n - 1),
                        _ => Err(err(format!("bad EDU index `{s}`"))),
                    }
                };
                let (i, j) = (index(f[0])?, index(f[1])?);
                if i == j {
                    return Err(err("a link needs two distinct EDUs".into()));
                }
                let nuclearity = f[2].parse().map_err(err)?;
                let cue = (f.len() > 4).then(|| f[4..].join(" "));
                pending_links.push((line, i, j));
                b.sentence.links.push(GoldLink {
                    edu_i: i,
                    edu_j: j,
                    nuclearity,
                    relation: f[3].to_owned(),
                    cue,
                });
            }
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    if let Some(b) = block.take() {
        out.push(check_links(b.finish()?, &pending_links)?);
    }
    Ok(out)
}

fn check_links(
    s: GoldSentence,
    links: &[(usize, usize, usize)],
) -> Result<GoldSentence, EvalError> {
    for &(line, i, j) in links {
        if i.max(j) >= s.edus.len() {
            return Err(EvalError::Format {
                line,
                message: format!(
                    "sentence `{}` has only {} EDUs",
                    s.sentence_id,
                    s.edus.len()
                ),
            });
        }
    }
    Ok(s)
}

pub fn load_gold(path: impl AsRef<Path>) -> Result<Vec<GoldSentence>, EvalError> {
    parse_gold(&read(path.as_ref())?)
}

fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

const DEFAULT_GROUPING: &str = include_str!("../../resources/relation_grouping.tsv");

/// Maps relation names, gold or system, to evaluation classes. Lookup is
/// case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    map: BTreeMap<String, String>,
}

impl Default for Grouping {
    fn default() -> Self {
        parse_grouping(DEFAULT_GROUPING).expect("bundled grouping map is valid")
    }
}

impl Grouping {
    pub fn class_of(&self, relation: &str) -> Result<&str, EvalError> {
        self.map
            .get(&relation.to_lowercase())
            .map(String::as_str)
            .ok_or_else(|| EvalError::UnmappedRelation(relation.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        let mut v: Vec<&str> = self.map.values().map(String::as_str).collect();
        v.sort_unstable();
        v.dedup();
        v.into_iter()
    }
}

/// Parses `relation<TAB>class` lines.
pub fn parse_grouping(text: &str) -> Result<Grouping, EvalError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (rel, class) = line
            .split_once('\t')
            .filter(|(r, c)| !r.trim().is_empty() && !c.trim().is_empty())
            .ok_or(EvalError::Format {
                line: idx + 1,
                message: "expected `relation<TAB>class`".into(),
            })?;
        map.insert(rel.trim().to_lowercase(), class.trim().to_owned());
    }
    Ok(Grouping { map })
}

pub fn load_grouping(path: impl AsRef<Path>) -> Result<Grouping, EvalError> {
    parse_grouping(&read(path.as_ref())?)
}
