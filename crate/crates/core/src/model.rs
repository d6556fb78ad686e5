//! Character N-gram frequency models with transition-freedom queries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::exec::Execution;

pub const FORMAT_VERSION: u32 = 1;

type Table = FxHashMap<Box<[char]>, u64>;
type FreedomIndex = FxHashMap<Box<[char]>, u32>;

/// Relative-frequency pruning cutoff, `0 <= t_mc < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct PruneThreshold(f64);

impl PruneThreshold {
    pub const NONE: PruneThreshold = PruneThreshold(0.0);

    pub fn new(t_mc: f64) -> Result<Self> {
        if (0.0..1.0).contains(&t_mc) {
            Ok(PruneThreshold(t_mc))
        } else {
            Err(Error::precondition(format!(
                "model compression threshold must be in [0, 1), got {t_mc}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Per-order N-gram counts over a line-oriented corpus.
///
/// Grams never span line boundaries. Besides the count tables the model keeps
/// derived freedom indexes (distinct continuations per gram), rebuilt whenever
/// the tables change; they are not part of equality or the file format.
#[derive(Debug, Clone)]
pub struct NGramModel {
    max_order: usize,
    tables: Vec<Table>,
    source_symbol_count: usize,
    pruned: bool,
    forward: Vec<FreedomIndex>,
    backward: Vec<FreedomIndex>,
}

impl PartialEq for NGramModel {
    fn eq(&self, other: &Self) -> bool {
        self.max_order == other.max_order
            && self.source_symbol_count == other.source_symbol_count
            && self.pruned == other.pruned
            && self.tables == other.tables
    }
}

fn count_line(tables: &mut [Table], line: &str) {
    let chars: Vec<char> = line.chars().collect();
    for (idx, table) in tables.iter_mut().enumerate() {
        let n = idx + 1;
        if chars.len() < n {
            break;
        }
        for window in chars.windows(n) {
            match table.get_mut(window) {
                Some(c) => *c += 1,
                None => {
                    table.insert(window.into(), 1);
                }
            }
        }
    }
}

fn merge_tables(mut a: Vec<Table>, b: Vec<Table>) -> Vec<Table> {
    for (ta, tb) in a.iter_mut().zip(b) {
        if ta.len() < tb.len() {
            let small = std::mem::replace(ta, tb);
            for (k, v) in small {
                *ta.entry(k).or_insert(0) += v;
            }
        } else {
            for (k, v) in tb {
                *ta.entry(k).or_insert(0) += v;
            }
        }
    }
    a
}

/// Builds an unpruned model counting every window of 1..=`max_order` code
/// points in each line.
pub fn build_model(corpus: &Corpus, max_order: usize) -> Result<NGramModel> {
    build_model_with(corpus, max_order, Execution::default())
}

pub fn build_model_with(corpus: &Corpus, max_order: usize, exec: Execution) -> Result<NGramModel> {
    if max_order < 2 {
        return Err(Error::precondition(format!(
            "model order must be at least 2, got {max_order}"
        )));
    }
    if corpus.symbol_count() == 0 {
        return Err(Error::precondition(
            "cannot build a model from an empty corpus",
        ));
    }
    let empty = || vec![Table::default(); max_order];
    let tables = exec.fold_chunks(
        corpus.lines(),
        empty,
        |mut acc, line| {
            count_line(&mut acc, line);
            acc
        },
        merge_tables,
    );
    Ok(NGramModel::from_parts(
        max_order,
        tables,
        corpus.symbol_count(),
        false,
    ))
}

impl NGramModel {
    fn from_parts(
        max_order: usize,
        tables: Vec<Table>,
        source_symbol_count: usize,
        pruned: bool,
    ) -> Self {
        let mut forward = Vec::with_capacity(max_order - 1);
        let mut backward = Vec::with_capacity(max_order - 1);
        for next in &tables[1..] {
            let mut fwd = FreedomIndex::default();
            let mut bwd = FreedomIndex::default();
            for gram in next.keys() {
                let k = gram.len();
                *fwd.entry(gram[..k - 1].into()).or_insert(0) += 1;
                *bwd.entry(gram[1..].into()).or_insert(0) += 1;
            }
            forward.push(fwd);
            backward.push(bwd);
        }
        NGramModel {
            max_order,
            tables,
            source_symbol_count,
            pruned,
            forward,
            backward,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn source_symbol_count(&self) -> usize {
        self.source_symbol_count
    }

    pub fn is_pruned(&self) -> bool {
        self.pruned
    }

    /// Count of `gram`, 0 if absent or its length is outside `1..=max_order`.
    pub fn count(&self, gram: &[char]) -> u64 {
        match gram.len() {
            0 => 0,
            n if n > self.max_order => 0,
            n => self.tables[n - 1].get(gram).copied().unwrap_or(0),
        }
    }

    /// Number of distinct grams stored at order `n`.
    pub fn gram_count(&self, n: usize) -> usize {
        self.tables.get(n.wrapping_sub(1)).map_or(0, |t| t.len())
    }

    /// Entries of order `n` sorted by code point sequence.
    pub fn sorted_entries(&self, n: usize) -> Vec<(&[char], u64)> {
        let mut entries: Vec<(&[char], u64)> = self.tables[n - 1]
            .iter()
            .map(|(k, &v)| (&k[..], v))
            .collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
        entries
    }

    /// Transition freedom: the number of distinct code points that follow
    /// (forward) or precede (backward) `gram` in the order `|gram| + 1` table.
    pub fn freedom(&self, gram: &[char], direction: Direction) -> Result<u32> {
        if gram.is_empty() || gram.len() >= self.max_order {
            return Err(Error::precondition(format!(
                "freedom query needs 1 <= |gram| <= {}, got {}",
                self.max_order - 1,
                gram.len()
            )));
        }
        Ok(self.freedom_unchecked(gram, direction))
    }

    /// Like [`freedom`](Self::freedom) without the length check; the caller
    /// guarantees `1 <= gram.len() < max_order`.
    pub(crate) fn freedom_unchecked(&self, gram: &[char], direction: Direction) -> u32 {
        let index = match direction {
            Direction::Forward => &self.forward[gram.len() - 1],
            Direction::Backward => &self.backward[gram.len() - 1],
        };
        index.get(gram).copied().unwrap_or(0)
    }

    /// Removes, per order, every gram whose count relative to that order's
    /// maximum count is below `t`.
    pub fn prune(&self, t: PruneThreshold) -> NGramModel {
        let t = t.value();
        let tables = self
            .tables
            .iter()
            .map(|table| {
                let max = table.values().copied().max().unwrap_or(0);
                if t == 0.0 || max == 0 {
                    return table.clone();
                }
                table
                    .iter()
                    .filter(|(_, &c)| c as f64 / max as f64 >= t)
                    .map(|(k, &c)| (k.clone(), c))
                    .collect()
            })
            .collect();
        NGramModel::from_parts(self.max_order, tables, self.source_symbol_count, true)
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "NGM {FORMAT_VERSION} {} {} {}",
            self.max_order,
            self.source_symbol_count,
            u8::from(self.pruned)
        );
        for n in 1..=self.max_order {
            let entries = self.sorted_entries(n);
            let _ = writeln!(out, "#ORDER {n} {}", entries.len());
            for (gram, count) in entries {
                escape_into(&mut out, gram);
                let _ = writeln!(out, "\t{count}");
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<NGramModel> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        NGramModel::parse(&text).map_err(|e| match e {
            ParseError::Version(found) => Error::Version {
                found,
                expected: FORMAT_VERSION,
            },
            ParseError::Line(line, message) => Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            },
        })
    }

    pub fn parse(text: &str) -> std::result::Result<NGramModel, ParseError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| ParseError::Line(1, "missing header".into()))?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.first() != Some(&"NGM") || fields.len() != 5 {
            return Err(ParseError::Line(1, format!("malformed header {header:?}")));
        }
        if fields[1] != FORMAT_VERSION.to_string() {
            return Err(ParseError::Version(fields[1].to_string()));
        }
        let field = |i: usize, what: &str| {
            fields[i]
                .parse::<usize>()
                .map_err(|_| ParseError::Line(1, format!("bad {what} {:?}", fields[i])))
        };
        let max_order = field(2, "max order")?;
        let source_symbol_count = field(3, "symbol count")?;
        let pruned = match fields[4] {
            "0" => false,
            "1" => true,
            other => return Err(ParseError::Line(1, format!("bad pruned flag {other:?}"))),
        };
        if max_order < 2 {
            return Err(ParseError::Line(
                1,
                format!("model order {max_order} below 2"),
            ));
        }

        let mut tables = Vec::with_capacity(max_order);
        for n in 1..=max_order {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| ParseError::Line(0, format!("missing section for order {n}")))?;
            let entries = line
                .strip_prefix("#ORDER ")
                .and_then(|rest| rest.split_once(' '))
                .filter(|(order, _)| order.parse::<usize>().ok() == Some(n))
                .and_then(|(_, count)| count.parse::<usize>().ok())
                .ok_or_else(|| {
                    ParseError::Line(
                        lineno,
                        format!("expected `#ORDER {n} <count>`, got {line:?}"),
                    )
                })?;
            let mut table = Table::default();
            table.reserve(entries);
            for _ in 0..entries {
                let (lineno, line) = lines
                    .next()
                    .ok_or_else(|| ParseError::Line(0, format!("order {n} section truncated")))?;
                let (gram, count) = line
                    .rsplit_once('\t')
                    .ok_or_else(|| ParseError::Line(lineno, "missing tab".into()))?;
                let gram = unescape(gram).map_err(|m| ParseError::Line(lineno, m))?;
                if gram.len() != n {
                    return Err(ParseError::Line(
                        lineno,
                        format!("gram of length {} in order {n} section", gram.len()),
                    ));
                }
                let count: u64 = count
                    .parse()
                    .ok()
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| ParseError::Line(lineno, format!("bad count {count:?}")))?;
                if table.insert(gram.into(), count).is_some() {
                    return Err(ParseError::Line(lineno, "duplicate gram".into()));
                }
            }
            tables.push(table);
        }
        if let Some((lineno, _)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(ParseError::Line(lineno, "trailing content".into()));
        }
        Ok(NGramModel::from_parts(
            max_order,
            tables,
            source_symbol_count,
            pruned,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Version(String),
    /// Line number (1-based, 0 = end of input) and message.
    Line(usize, String),
}

fn escape_into(out: &mut String, gram: &[char]) {
    for &c in gram {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}

fn unescape(s: &str) -> std::result::Result<Vec<char>, String> {
    let mut out = Vec::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next() {
            Some('\\') => '\\',
            Some('t') => '\t',
            Some('n') => '\n',
            Some('r') => '\r',
            other => {
                return Err(format!(
                    "bad escape sequence \\{}",
                    other.map_or(String::new(), String::from)
                ))
            }
        });
    }
    Ok(out)
}
