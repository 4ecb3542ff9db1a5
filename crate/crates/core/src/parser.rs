//! Sources of constituency parses: a file of bracketed trees, or a parser
//! service that takes plain text (one sentence per line) by HTTP POST and
//! answers with one bracketed tree per line.

use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::tree::{parse_bracketed, parse_lines, ParseTree, TreeError};

/// Environment variable naming the default parser endpoint.
pub const PARSER_URL_ENV: &str = "PROPHIER_PARSER_URL";

#[derive(Debug, Error)]
pub enum ParserError {
    #[error("parser at {0} is unreachable")]
    Unreachable(String),
    #[error("malformed tree on response line {0}")]
    BadResponse(usize),
    #[error("tree {0} does not match its sentence")]
    TreeSentenceMismatch(usize),
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: TreeError,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("expected at least {expected} trees, found {found}")]
    TooFewTrees { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpSource {
    pub endpoint: String,
    pub timeout: Duration,
    /// Extra attempts after a failed request.
    pub retries: u32,
    /// Sentences per request.
    pub batch_size: usize,
    /// Requests in flight at once.
    pub workers: usize,
}

impl HttpSource {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpSource {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(30),
            retries: 2,
            batch_size: 64,
            workers: 4,
        }
    }

    /// An endpoint from `PROPHIER_PARSER_URL`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var(PARSER_URL_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .map(HttpSource::new)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseSource {
    File(PathBuf),
    Http(HttpSource),
}

/// Parses of `sentences`, in order. With a file source and no sentences,
/// every tree in the file is returned.
pub fn fetch_parses(
    source: &ParseSource,
    sentences: &[String],
) -> Result<Vec<ParseTree>, ParserError> {
    let trees = match source {
        ParseSource::File(path) => {
            let shown = path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(|source| ParserError::Io {
                path: shown.clone(),
                source,
            })?;
            let mut trees = parse_lines(&text).map_err(|source| ParserError::File {
                path: shown,
                source,
            })?;
            if sentences.is_empty() {
                return Ok(trees);
            }
            if trees.len() < sentences.len() {
                return Err(ParserError::TooFewTrees {
                    expected: sentences.len(),
                    found: trees.len(),
                });
            }
            trees.truncate(sentences.len());
            trees
        }
        ParseSource::Http(http) => fetch_http(http, sentences)?,
    };
    check_yields(&trees, sentences)?;
    Ok(trees)
}

/// Fails on the first tree whose leaves differ from the whitespace tokens
/// of its sentence.
pub fn check_yields(trees: &[ParseTree], sentences: &[String]) -> Result<(), ParserError> {
    for (i, (t, s)) in trees.iter().zip(sentences).enumerate() {
        if !t.tokens().into_iter().eq(s.split_whitespace()) {
            return Err(ParserError::TreeSentenceMismatch(i));
        }
    }
    Ok(())
}

fn fetch_http(src: &HttpSource, sentences: &[String]) -> Result<Vec<ParseTree>, ParserError> {
    if sentences.is_empty() {
        return Ok(Vec::new());
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(src.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let size = src.batch_size.max(1);
    let batches: Vec<(usize, &[String])> = sentences
        .chunks(size)
        .enumerate()
        .map(|(i, c)| (i * size, c))
        .collect();
    let workers = src.workers.max(1);
    let mut results: Vec<Option<Result<Vec<ParseTree>, ParserError>>> =
        (0..batches.len()).map(|_| None).collect();
    for (round, group) in batches.chunks(workers).enumerate() {
        let done: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = group
                .iter()
                .map(|&(offset, batch)| {
                    let agent = &agent;
                    s.spawn(move || post_batch(agent, src, offset, batch))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(ParserError::Unreachable(src.endpoint.clone())))
                })
                .collect()
        });
        for (k, r) in done.into_iter().enumerate() {
            results[round * workers + k] = Some(r);
        }
    }
    let mut out = Vec::with_capacity(sentences.len());
    for r in results {
        out.extend(r.expect("every batch ran")?);
    }
    Ok(out)
}

fn post_batch(
    agent: &ureq::Agent,
    src: &HttpSource,
    offset: usize,
    batch: &[String],
) -> Result<Vec<ParseTree>, ParserError> {
    let body = batch.join("\n") + "\n";
    let mut text = None;
    for attempt in 0..=src.retries {
        let sent = agent
            .post(&src.endpoint)
            .content_type("text/plain; charset=utf-8")
            .send(body.as_str());
        match sent {
            Ok(mut resp) if resp.status().as_u16() == 200 => match resp.body_mut().read_to_string()
            {
                Ok(t) => {
                    text = Some(t);
                    break;
                }
                Err(e) => log::warn!("attempt {}: reading response: {e}", attempt + 1),
            },
            Ok(resp) => log::warn!("attempt {}: status {}", attempt + 1, resp.status()),
            Err(e) => log::warn!("attempt {}: {e}", attempt + 1),
        }
    }
    let text = text.ok_or_else(|| ParserError::Unreachable(src.endpoint.clone()))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut trees = Vec::with_capacity(batch.len());
    for (k, line) in lines.iter().enumerate() {
        let t = parse_bracketed(line).map_err(|_| ParserError::BadResponse(offset + k + 1))?;
        trees.push(t);
    }
    if trees.len() != batch.len() {
        return Err(ParserError::BadResponse(
            offset + trees.len().min(batch.len()) + 1,
        ));
    }
    Ok(trees)
}
