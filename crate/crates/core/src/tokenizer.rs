//! Boundary scoring from transition-freedom jumps and threshold segmentation.
//!
//! For every interior position `i` of a line of `L` code points and every
//! order `n` of the N-set, the forward freedom of the gram ending at `i` and
//! the backward freedom of the gram starting at `i` are compared with their
//! neighbours. Positive jumps are normalized by their per-line maximum, the
//! two directions averaged, and the orders averaged. A position becomes a
//! boundary when its score strictly exceeds `t_tm`.

use std::fmt;
use std::str::FromStr;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Direction, NGramModel, PruneThreshold};

/// A non-empty, sorted set of N-gram orders, written `1+2+3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NSet(Vec<usize>);

impl NSet {
    pub fn new(orders: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut orders: Vec<usize> = orders.into_iter().collect();
        orders.sort_unstable();
        orders.dedup();
        if orders.is_empty() || orders[0] == 0 {
            return Err(Error::precondition(
                "N-set must be a non-empty set of orders >= 1",
            ));
        }
        Ok(NSet(orders))
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    pub fn highest(&self) -> usize {
        *self.0.last().expect("N-set is non-empty")
    }
}

impl fmt::Display for NSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl FromStr for NSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let orders = s
            .split('+')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::precondition(format!("bad N-set {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        NSet::new(orders)
    }
}

/// One grid point: N-set, model compression threshold, boundary threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizerParams {
    pub n_set: NSet,
    pub t_mc: PruneThreshold,
    pub t_tm: f64,
}

impl TokenizerParams {
    pub fn new(n_set: NSet, t_mc: PruneThreshold, t_tm: f64) -> Result<Self> {
        if !(t_tm > 0.0 && t_tm <= 1.0) {
            return Err(Error::precondition(format!(
                "tokenization threshold must be in (0, 1], got {t_tm}"
            )));
        }
        Ok(TokenizerParams { n_set, t_mc, t_tm })
    }

    /// Smallest model order able to serve these parameters.
    pub fn required_order(&self) -> usize {
        self.n_set.highest() + 1
    }

    pub fn check_model(&self, model: &NGramModel) -> Result<()> {
        check_orders(&self.n_set, model)
    }
}

fn check_orders(n_set: &NSet, model: &NGramModel) -> Result<()> {
    if n_set.highest() + 1 > model.max_order() {
        return Err(Error::precondition(format!(
            "N-set {n_set} needs a model of order >= {}, model has order {}",
            n_set.highest() + 1,
            model.max_order()
        )));
    }
    Ok(())
}

/// A segmented line: boundary positions in code points plus derived tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenization {
    line: String,
    boundaries: Vec<usize>,
}

impl Tokenization {
    pub fn new(line: impl Into<String>, boundaries: Vec<usize>) -> Result<Self> {
        let line = line.into();
        let len = line.chars().count();
        let ordered = boundaries.windows(2).all(|w| w[0] < w[1]);
        if !ordered || boundaries.iter().any(|&p| p == 0 || p >= len) {
            return Err(Error::precondition(format!(
                "boundaries {boundaries:?} are not strictly increasing within (0, {len})"
            )));
        }
        Ok(Tokenization { line, boundaries })
    }

    /// The whole line as a single token.
    pub fn unsegmented(line: impl Into<String>) -> Self {
        Tokenization {
            line: line.into(),
            boundaries: Vec::new(),
        }
    }

    pub fn line(&self) -> &str {
        &self.line
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Substrings between consecutive boundaries; empty for an empty line.
    pub fn tokens(&self) -> Vec<&str> {
        if self.line.is_empty() {
            return Vec::new();
        }
        let mut tokens = Vec::with_capacity(self.boundaries.len() + 1);
        let mut start = 0;
        let mut next = self.boundaries.iter().peekable();
        for (pos, (byte, _)) in self.line.char_indices().enumerate() {
            if next.peek() == Some(&&pos) {
                tokens.push(&self.line[start..byte]);
                start = byte;
                next.next();
            }
        }
        tokens.push(&self.line[start..]);
        tokens
    }

    /// Tokens joined by a tab.
    pub fn to_token_line(&self) -> String {
        self.tokens().join("\t")
    }

    /// Boundary indices joined by commas.
    pub fn to_boundary_line(&self) -> String {
        self.boundaries
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn normalize_positive(deltas: &[i64]) -> impl Iterator<Item = f64> + '_ {
    let max = deltas.iter().copied().max().unwrap_or(0).max(0);
    deltas.iter().map(move |&d| {
        if max == 0 {
            0.0
        } else {
            d.max(0) as f64 / max as f64
        }
    })
}

/// Per-position `(c⁺ + c⁻) / 2` for a single order `n`, one value per
/// interior position. `n` must be below the model order.
pub(crate) fn order_contribution(model: &NGramModel, chars: &[char], n: usize) -> Vec<f64> {
    let len = chars.len();
    if len < 2 {
        return Vec::new();
    }
    // index k = position k + 1
    let fwd: Vec<i64> = (1..len)
        .map(|i| {
            let k = n.min(i);
            i64::from(model.freedom_unchecked(&chars[i - k..i], Direction::Forward))
        })
        .collect();
    let bwd: Vec<i64> = (1..len)
        .map(|i| {
            let k = n.min(len - i);
            i64::from(model.freedom_unchecked(&chars[i..i + k], Direction::Backward))
        })
        .collect();

    let last = len - 2;
    let d_fwd: Vec<i64> = (0..=last)
        .map(|k| if k == 0 { 0 } else { fwd[k] - fwd[k - 1] })
        .collect();
    let d_bwd: Vec<i64> = (0..=last)
        .map(|k| if k == last { 0 } else { bwd[k] - bwd[k + 1] })
        .collect();

    normalize_positive(&d_fwd)
        .zip(normalize_positive(&d_bwd))
        .map(|(p, m)| (p + m) / 2.0)
        .collect()
}

/// Averages per-order contributions position by position, in the given order.
pub(crate) fn combine(parts: &[&[f64]]) -> Vec<f64> {
    let Some(first) = parts.first() else {
        return Vec::new();
    };
    let count = parts.len() as f64;
    (0..first.len())
        .map(|k| parts.iter().map(|p| p[k]).sum::<f64>() / count)
        .collect()
}

/// Boundary score in `[0, 1]` for each interior position of `line`.
pub fn boundary_profile(model: &NGramModel, line: &str, n_set: &NSet) -> Result<Vec<f64>> {
    check_orders(n_set, model)?;
    let chars: Vec<char> = line.chars().collect();
    let parts: Vec<Vec<f64>> = n_set
        .orders()
        .iter()
        .map(|&n| order_contribution(model, &chars, n))
        .collect();
    let refs: Vec<&[f64]> = parts.iter().map(Vec::as_slice).collect();
    Ok(combine(&refs))
}

/// Positions (1-based) whose score strictly exceeds `t_tm`.
pub fn boundaries_above(profile: &[f64], t_tm: f64) -> Vec<usize> {
    profile
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > t_tm)
        .map(|(k, _)| k + 1)
        .collect()
}

/// Cuts `line` wherever its profile exceeds `t_tm`.
pub fn segment_with_profile(line: &str, profile: &[f64], t_tm: f64) -> Tokenization {
    Tokenization {
        line: line.to_string(),
        boundaries: boundaries_above(profile, t_tm),
    }
}

pub fn tokenize_line(
    model: &NGramModel,
    line: &str,
    params: &TokenizerParams,
) -> Result<Tokenization> {
    let profile = boundary_profile(model, line, &params.n_set)?;
    Ok(segment_with_profile(line, &profile, params.t_tm))
}

pub fn tokenize_corpus(
    model: &NGramModel,
    corpus: &Corpus,
    params: &TokenizerParams,
) -> Result<Vec<Tokenization>> {
    tokenize_corpus_with(model, corpus, params, Execution::default())
}

pub fn tokenize_corpus_with(
    model: &NGramModel,
    corpus: &Corpus,
    params: &TokenizerParams,
    exec: Execution,
) -> Result<Vec<Tokenization>> {
    params.check_model(model)?;
    exec.try_map(corpus.lines(), |line| tokenize_line(model, line, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;

    fn model(lines: &[&str], order: usize) -> NGramModel {
        build_model(&Corpus::from_lines(lines.iter().copied()).unwrap(), order).unwrap()
    }

    fn nset(s: &str) -> NSet {
        s.parse().unwrap()
    }

    fn params(n: &str, t_tm: f64) -> TokenizerParams {
        TokenizerParams::new(nset(n), PruneThreshold::NONE, t_tm).unwrap()
    }

    #[test]
    fn nset_parsing() {
        assert_eq!(nset("3+1+2").orders(), [1, 2, 3]);
        assert_eq!(nset("2+2").to_string(), "2");
        assert!("".parse::<NSet>().is_err());
        assert!("0".parse::<NSet>().is_err());
        assert!("1+x".parse::<NSet>().is_err());
    }

    #[test]
    fn params_validate_threshold() {
        assert!(TokenizerParams::new(nset("1"), PruneThreshold::NONE, 0.0).is_err());
        assert!(TokenizerParams::new(nset("1"), PruneThreshold::NONE, 1.5).is_err());
        assert!(TokenizerParams::new(nset("1"), PruneThreshold::NONE, 1.0).is_ok());
    }

    #[test]
    fn unknown_grams_score_zero() {
        let m = model(&["abc"], 2);
        assert_eq!(boundary_profile(&m, "xyzw", &nset("1")).unwrap(), [0.0; 3]);
    }

    // Expected profiles below were computed with exact fractions by an
    // independent brute-force scan of the training lines.
    #[test]
    fn repeated_word_profile_is_flat() {
        let m = model(&["ab ab ab"], 2);
        assert_eq!(boundary_profile(&m, "ab ab", &nset("1")).unwrap(), [0.0; 4]);
    }

    #[test]
    fn frozen_profiles() {
        let m = model(&["ab ac ad", "ba ca"], 3);
        assert_eq!(
            boundary_profile(&m, "ab ac", &nset("1")).unwrap(),
            [0.0, 0.0, 0.5, 0.5]
        );
        assert_eq!(
            boundary_profile(&m, "ab ac", &nset("1+2")).unwrap(),
            [0.0, 0.25, 0.25, 0.5]
        );

        let m = model(&["the cat sat", "the hat", "a cat"], 3);
        assert_eq!(
            boundary_profile(&m, "the cat", &nset("1+2")).unwrap(),
            [0.125, 0.0, 0.375, 0.5, 0.5, 0.125]
        );
    }

    #[test]
    fn short_lines_have_empty_profiles() {
        let m = model(&["abc"], 2);
        assert!(boundary_profile(&m, "a", &nset("1")).unwrap().is_empty());
        assert!(boundary_profile(&m, "", &nset("1")).unwrap().is_empty());
    }

    #[test]
    fn profile_rejects_high_orders() {
        let m = model(&["abc"], 3);
        assert!(boundary_profile(&m, "abc", &nset("3")).is_err());
        assert!(boundary_profile(&m, "abc", &nset("2")).is_ok());
    }

    #[test]
    fn threshold_rule_on_given_profiles() {
        let t = segment_with_profile("abcd", &[0.2, 0.9, 0.1], 0.5);
        assert_eq!(t.boundaries(), [2]);
        assert_eq!(t.tokens(), ["ab", "cd"]);

        let t = segment_with_profile("abc", &[0.6, 0.9], 0.5);
        assert_eq!(t.tokens(), ["a", "b", "c"]);

        let t = segment_with_profile("abc", &[0.5, 1.0], 0.5);
        assert_eq!(
            t.boundaries(),
            [2],
            "score equal to threshold is not a boundary"
        );
    }

    #[test]
    fn threshold_one_never_cuts() {
        let m = model(&["the cat sat", "the hat", "a cat"], 3);
        let t = tokenize_line(&m, "the cat", &params("1+2", 1.0)).unwrap();
        assert_eq!(t.tokens(), ["the cat"]);
    }

    #[test]
    fn tokens_split_on_code_points() {
        let t = Tokenization::new("汉字ab", vec![2]).unwrap();
        assert_eq!(t.tokens(), ["汉字", "ab"]);
        assert_eq!(t.to_token_line(), "汉字\tab");
        assert_eq!(t.to_boundary_line(), "2");
        assert!(Tokenization::new("ab", vec![2]).is_err());
        assert!(Tokenization::new("abc", vec![2, 1]).is_err());
    }

    #[test]
    fn empty_line_has_no_tokens() {
        let t = Tokenization::unsegmented("");
        assert!(t.tokens().is_empty());
        assert_eq!(t.to_token_line(), "");
    }

    #[test]
    fn corpus_tokenization_keeps_order() {
        let m = model(&["ab ac ad", "ba ca"], 3);
        let p = params("1", 0.4);
        assert!(tokenize_corpus(&m, &Corpus::default(), &p)
            .unwrap()
            .is_empty());

        let c = Corpus::from_lines(["ab ac", "", "ba"]).unwrap();
        let out = tokenize_corpus(&m, &c, &p).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].tokens(), ["ab ", "a", "c"]);
        assert!(out[1].tokens().is_empty());
        assert_eq!(out[2].line(), "ba");
    }

    #[test]
    fn corpus_tokenization_rejects_order_violation() {
        let m = model(&["abc"], 2);
        let c = Corpus::from_lines(["abc"]).unwrap();
        assert!(tokenize_corpus(&m, &c, &params("2", 0.5)).is_err());
    }
}
