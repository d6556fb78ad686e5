//! Boundary F1, the human-independent fitness metrics and Pearson correlation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::corpus::{Corpus, ReferenceSegmentation};
use crate::error::{Error, Result};
use crate::model::NGramModel;
use crate::tokenizer::{tokenize_corpus, Tokenization, TokenizerParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreTriple {
    fn from_counts(true_pos: usize, candidate: usize, reference: usize) -> Self {
        let ratio = |num: usize, den: usize, other: usize| {
            if den == 0 {
                if other == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(true_pos, candidate, reference);
        let recall = ratio(true_pos, reference, candidate);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ScoreTriple {
            precision,
            recall,
            f1,
        }
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn pooled<'a>(pairs: impl Iterator<Item = (&'a [usize], &'a [usize])>) -> ScoreTriple {
    let (mut tp, mut c, mut r) = (0, 0, 0);
    for (cand, refr) in pairs {
        tp += intersection_size(cand, refr);
        c += cand.len();
        r += refr.len();
    }
    ScoreTriple::from_counts(tp, c, r)
}

/// Boundary precision/recall/F1 pooled over all lines.
pub fn boundary_f1(
    candidate: &[Tokenization],
    reference: &ReferenceSegmentation,
) -> Result<ScoreTriple> {
    if candidate.len() != reference.len() {
        return Err(Error::precondition(format!(
            "candidate has {} lines, reference has {}",
            candidate.len(),
            reference.len()
        )));
    }
    for (i, (c, r)) in candidate.iter().zip(reference.lines()).enumerate() {
        if c.line() != r.text {
            return Err(Error::precondition(format!(
                "line {}: candidate text {:?} differs from reference text {:?}",
                i + 1,
                c.line(),
                r.text
            )));
        }
    }
    Ok(pooled(
        candidate
            .iter()
            .zip(reference.lines())
            .map(|(c, r)| (c.boundaries(), r.boundaries.as_slice())),
    ))
}

/// Boundary F1 of one tokenization against another used as ground truth.
pub fn agreement_f1(candidate: &[Tokenization], reference: &[Tokenization]) -> Result<ScoreTriple> {
    if candidate.len() != reference.len()
        || candidate
            .iter()
            .zip(reference)
            .any(|(c, r)| c.line() != r.line())
    {
        return Err(Error::precondition(
            "tokenizations being compared cover different lines",
        ));
    }
    Ok(pooled(
        candidate
            .iter()
            .zip(reference)
            .map(|(c, r)| (c.boundaries(), r.boundaries())),
    ))
}

/// Compressed size over raw size: one unit per token occurrence plus the
/// summed code-point length of every distinct token, divided by the number
/// of code points. Smaller means better compression.
pub fn compression_factor(tokenizations: &[Tokenization]) -> Result<f64> {
    let mut occurrences = 0usize;
    let mut symbols = 0usize;
    let mut lexicon: HashMap<&str, usize> = HashMap::new();
    for t in tokenizations {
        for token in t.tokens() {
            occurrences += 1;
            let len = token.chars().count();
            symbols += len;
            lexicon.entry(token).or_insert(len);
        }
    }
    if symbols == 0 {
        return Err(Error::precondition(
            "compression factor of a text with zero symbols",
        ));
    }
    let dictionary: usize = lexicon.values().sum();
    Ok((occurrences + dictionary) as f64 / symbols as f64)
}

/// `1 - H / log2(L)` over token occurrences; 1 for a single-type lexicon.
pub fn anti_entropy(tokenizations: &[Tokenization]) -> Result<f64> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in tokenizations {
        for token in t.tokens() {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    anti_entropy_of_counts(counts.into_values())
}

pub(crate) fn anti_entropy_of_counts(counts: impl IntoIterator<Item = usize>) -> Result<f64> {
    let mut counts: Vec<usize> = counts.into_iter().collect();
    // summation order fixed for reproducibility across hash seeds
    counts.sort_unstable();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::precondition("anti-entropy of zero tokens"));
    }
    let types = counts.len();
    if types == 1 {
        return Ok(1.0);
    }
    let total = total as f64;
    let entropy: f64 = -counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum::<f64>();
    Ok((1.0 - entropy / (types as f64).log2()).clamp(0.0, 1.0))
}

/// Agreement between two models' tokenizations of the same test text.
pub fn cross_split_f1(
    model_a: &NGramModel,
    model_b: &NGramModel,
    test: &Corpus,
    params: &TokenizerParams,
) -> Result<f64> {
    let a = tokenize_corpus(model_a, test, params)?;
    let b = tokenize_corpus(model_b, test, params)?;
    Ok(agreement_f1(&a, &b)?.f1)
}

/// A Pearson coefficient, or `Undefined` when a series has zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    Value(f64),
    Undefined,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Value(r) => Some(r),
            Correlation::Undefined => None,
        }
    }
}

impl fmt::Display for Correlation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correlation::Value(r) => write!(f, "{r}"),
            Correlation::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Correlation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Correlation::Value(r) => s.serialize_f64(*r),
            Correlation::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() {
        return Err(Error::precondition(format!(
            "pearson: series lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::precondition("pearson needs at least 2 points"));
    }
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(xs) || constant(ys) {
        return Ok(Correlation::Undefined);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation::Undefined);
    }
    Ok(Correlation::Value(
        (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
    ))
}

/// Columns of a results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    F1,
    CompressionFactor,
    AntiEntropy,
    CrossSplitF1,
    Add2,
    Add3,
    Mul2,
    Mul3,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::F1,
        Metric::CompressionFactor,
        Metric::AntiEntropy,
        Metric::CrossSplitF1,
        Metric::Add2,
        Metric::Add3,
        Metric::Mul2,
        Metric::Mul3,
    ];

    /// The human-independent metrics, primary then composite.
    pub const TARGETS: [Metric; 7] = [
        Metric::CompressionFactor,
        Metric::AntiEntropy,
        Metric::CrossSplitF1,
        Metric::Add2,
        Metric::Add3,
        Metric::Mul2,
        Metric::Mul3,
    ];

    pub const PRIMARY_TARGETS: [Metric; 3] = [
        Metric::CompressionFactor,
        Metric::AntiEntropy,
        Metric::CrossSplitF1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::F1 => "f1",
            Metric::CompressionFactor => "c_pct",
            Metric::AntiEntropy => "anti_entropy",
            Metric::CrossSplitF1 => "csf1",
            Metric::Add2 => "add2",
            Metric::Add3 => "add3",
            Metric::Mul2 => "mul2",
            Metric::Mul3 => "mul3",
        }
    }

    /// Whether the compression factor enters this metric.
    pub fn involves_compression(self) -> bool {
        matches!(
            self,
            Metric::CompressionFactor | Metric::Add2 | Metric::Add3 | Metric::Mul2 | Metric::Mul3
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::precondition(format!("unknown metric {s:?}")))
    }
}

/// F1 plus the three target metrics; composites are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricVector {
    pub f1: f64,
    pub c_pct: f64,
    pub anti_entropy: f64,
    pub csf1: f64,
}

impl MetricVector {
    pub fn add2(&self) -> f64 {
        self.c_pct + self.anti_entropy
    }

    pub fn add3(&self) -> f64 {
        self.add2() + self.csf1
    }

    pub fn mul2(&self) -> f64 {
        self.c_pct * self.anti_entropy
    }

    pub fn mul3(&self) -> f64 {
        self.mul2() * self.csf1
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::F1 => self.f1,
            Metric::CompressionFactor => self.c_pct,
            Metric::AntiEntropy => self.anti_entropy,
            Metric::CrossSplitF1 => self.csf1,
            Metric::Add2 => self.add2(),
            Metric::Add3 => self.add3(),
            Metric::Mul2 => self.mul2(),
            Metric::Mul3 => self.mul3(),
        }
    }
}
