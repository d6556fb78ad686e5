//! Plain-text corpora, parallel TSV test sets and reference segmentations.
//!
//! All lengths and positions are counted in Unicode code points. A boundary
//! `p` sits between code point `p - 1` and code point `p` of its line.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// An ordered collection of newline-free text lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    lines: Vec<String>,
    symbol_count: usize,
}

impl Corpus {
    /// Builds a corpus from lines. Fails if any line carries a `\n`.
    pub fn from_lines<I, S>(lines: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let lines: Vec<String> = lines.into_iter().map(Into::into).collect();
        if let Some(i) = lines.iter().position(|l| l.contains('\n')) {
            return Err(Error::precondition(format!(
                "corpus line {} contains a line separator",
                i + 1
            )));
        }
        let symbol_count = lines.iter().map(|l| l.chars().count()).sum();
        Ok(Corpus {
            lines,
            symbol_count,
        })
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Total code points across all lines, line separators excluded.
    pub fn symbol_count(&self) -> usize {
        self.symbol_count
    }

    /// Splits into halves A and B by line count; A receives the extra line
    /// when the count is odd.
    pub fn split_halves(&self) -> Result<(Corpus, Corpus)> {
        if self.lines.len() < 2 {
            return Err(Error::precondition(format!(
                "cross-split needs at least 2 lines, corpus has {}",
                self.lines.len()
            )));
        }
        let cut = self.lines.len().div_ceil(2);
        let (a, b) = self.lines.split_at(cut);
        Ok((
            Corpus::from_lines(a.iter().cloned())?,
            Corpus::from_lines(b.iter().cloned())?,
        ))
    }

    /// Keeps only the first `max_lines` lines.
    pub fn truncate(&mut self, max_lines: usize) {
        if max_lines < self.lines.len() {
            self.lines.truncate(max_lines);
            self.symbol_count = self.lines.iter().map(|l| l.chars().count()).sum();
        }
    }
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

/// Loads a UTF-8 corpus, one line per text line. `\r\n` endings are
/// accepted and empty lines are kept.
pub fn load_corpus(path: impl AsRef<Path>, max_lines: Option<usize>) -> Result<Corpus> {
    let text = read_utf8(path.as_ref())?;
    let mut corpus = Corpus::from_lines(text.lines())?;
    if let Some(n) = max_lines {
        corpus.truncate(n);
    }
    Ok(corpus)
}

/// Loads one named column of a tab-separated file with a header row.
pub fn load_parallel_tsv(path: impl AsRef<Path>, column: &str) -> Result<Corpus> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    let mut rows = text.lines();
    let header: Vec<&str> = rows
        .next()
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "missing header row".into(),
        })?
        .split('\t')
        .collect();
    let index = header
        .iter()
        .position(|h| *h == column)
        .ok_or_else(|| Error::UnknownColumn {
            path: path.to_path_buf(),
            column: column.to_string(),
            available: header.join(", "),
        })?;

    let mut lines = Vec::new();
    for (i, row) in rows.enumerate() {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() < header.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!(
                    "row has {} fields, header has {}",
                    fields.len(),
                    header.len()
                ),
            });
        }
        lines.push(fields[index].to_string());
    }
    Corpus::from_lines(lines)
}

/// Ground-truth boundaries for one test line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceLine {
    pub text: String,
    pub boundaries: Vec<usize>,
}

/// Per-line reference boundary sets, paired with the raw test lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReferenceSegmentation {
    lines: Vec<ReferenceLine>,
}

impl ReferenceSegmentation {
    /// Validates that every boundary set is strictly increasing and interior.
    pub fn new(lines: Vec<ReferenceLine>) -> Result<Self> {
        for (i, line) in lines.iter().enumerate() {
            let len = line.text.chars().count();
            let ordered = line.boundaries.windows(2).all(|w| w[0] < w[1]);
            let interior = line.boundaries.iter().all(|&p| p > 0 && p < len);
            if !ordered || !interior {
                return Err(Error::precondition(format!(
                    "reference line {}: boundaries {:?} are not strictly increasing within (0, {})",
                    i + 1,
                    line.boundaries,
                    len
                )));
            }
        }
        Ok(ReferenceSegmentation { lines })
    }

    pub fn lines(&self) -> &[ReferenceLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// The raw (unsegmented) lines as a corpus.
    pub fn raw_corpus(&self) -> Corpus {
        Corpus::from_lines(self.lines.iter().map(|l| l.text.clone()))
            .expect("reference lines never contain line separators")
    }

    /// Checks that this reference pairs with `test` line by line.
    pub fn check_paired(&self, test: &Corpus) -> Result<()> {
        if self.lines.len() != test.len() {
            return Err(Error::precondition(format!(
                "reference has {} lines but test set has {}",
                self.lines.len(),
                test.len()
            )));
        }
        for (i, (r, t)) in self.lines.iter().zip(test.lines()).enumerate() {
            if r.text != *t {
                return Err(Error::precondition(format!(
                    "reference line {} does not match test line: {:?} vs {:?}",
                    i + 1,
                    r.text,
                    t
                )));
            }
        }
        Ok(())
    }
}

/// Parses one tab-separated token line into its raw text and boundaries.
pub fn parse_token_line(line: &str) -> std::result::Result<ReferenceLine, String> {
    if line.is_empty() {
        return Ok(ReferenceLine {
            text: String::new(),
            boundaries: Vec::new(),
        });
    }
    let tokens: Vec<&str> = line.split('\t').collect();
    if tokens.iter().any(|t| t.is_empty()) {
        return Err("empty token".into());
    }
    let mut boundaries = Vec::with_capacity(tokens.len() - 1);
    let mut pos = 0;
    for token in &tokens[..tokens.len() - 1] {
        pos += token.chars().count();
        boundaries.push(pos);
    }
    Ok(ReferenceLine {
        text: tokens.concat(),
        boundaries,
    })
}

/// Reads a reference file of tab-separated tokens, one test line per line.
pub fn reference_from_tokens(path: impl AsRef<Path>) -> Result<ReferenceSegmentation> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    let lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            parse_token_line(l).map_err(|message| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ReferenceSegmentation::new(lines)
}
