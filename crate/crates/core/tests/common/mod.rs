#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tfseg::{Corpus, ReferenceLine, ReferenceSegmentation};

/// A toy language: a fixed lexicon sampled with Zipfian frequencies and
/// joined by single spaces.
pub struct SyntheticLanguage {
    pub words: Vec<String>,
    weights: WeightedIndex<f64>,
}

impl SyntheticLanguage {
    pub fn new(seed: u64, vocabulary: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = BTreeSet::new();
        let mut words = Vec::with_capacity(vocabulary);
        while words.len() < vocabulary {
            let len = rng.random_range(2..=8);
            let w: String = (0..len)
                .map(|_| (b'a' + rng.random_range(0..26u8)) as char)
                .collect();
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }
        let weights = WeightedIndex::new((1..=vocabulary).map(|r| 1.0 / r as f64)).unwrap();
        SyntheticLanguage { words, weights }
    }

    /// Lines of 4..=12 words until `symbols` code points are reached.
    /// Returns each line as its token sequence (words and spaces).
    pub fn sample_lines(&self, seed: u64, symbols: usize) -> Vec<Vec<String>> {
        self.sample_until(seed, |_, total| total >= symbols)
    }

    pub fn sample_count(&self, seed: u64, lines: usize) -> Vec<Vec<String>> {
        self.sample_until(seed, |n, _| n >= lines)
    }

    fn sample_until(&self, seed: u64, done: impl Fn(usize, usize) -> bool) -> Vec<Vec<String>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        let mut total = 0;
        while !done(out.len(), total) {
            let n = rng.random_range(4..=12);
            let mut tokens = Vec::with_capacity(2 * n);
            for i in 0..n {
                if i > 0 {
                    tokens.push(" ".to_string());
                }
                tokens.push(self.words[self.weights.sample(&mut rng)].clone());
            }
            total += tokens.iter().map(|t| t.chars().count()).sum::<usize>();
            out.push(tokens);
        }
        out
    }
}

pub fn corpus_of(lines: &[Vec<String>]) -> Corpus {
    Corpus::from_lines(lines.iter().map(|t| t.concat())).unwrap()
}

pub fn reference_of(lines: &[Vec<String>]) -> ReferenceSegmentation {
    ReferenceSegmentation::new(
        lines
            .iter()
            .map(|tokens| {
                let mut boundaries = Vec::new();
                let mut pos = 0;
                for t in &tokens[..tokens.len() - 1] {
                    pos += t.chars().count();
                    boundaries.push(pos);
                }
                ReferenceLine {
                    text: tokens.concat(),
                    boundaries,
                }
            })
            .collect(),
    )
    .unwrap()
}

/// Tab-joined token lines, the reference file format.
pub fn token_file(lines: &[Vec<String>]) -> String {
    lines.iter().map(|t| t.join("\t") + "\n").collect()
}

/// Direct-scan tokenizer used as an oracle: every count and freedom is
/// recomputed from the raw training lines, no model tables involved.
pub mod brute {
    use std::collections::BTreeSet;

    fn windows(lines: &[Vec<char>], n: usize) -> impl Iterator<Item = &[char]> {
        lines.iter().flat_map(move |l| {
            if l.len() >= n {
                l.windows(n).collect::<Vec<_>>()
            } else {
                Vec::new()
            }
        })
    }

    fn occurrences(lines: &[Vec<char>], gram: &[char]) -> usize {
        windows(lines, gram.len()).filter(|w| *w == gram).count()
    }

    /// Whether `gram` survives pruning at `t_mc`.
    fn survives(lines: &[Vec<char>], gram: &[char], t_mc: f64) -> bool {
        let count = occurrences(lines, gram);
        if count == 0 {
            return false;
        }
        let max = windows(lines, gram.len())
            .map(|w| occurrences(lines, w))
            .max()
            .unwrap_or(0);
        count as f64 / max as f64 >= t_mc
    }

    pub fn freedom(lines: &[Vec<char>], gram: &[char], forward: bool, t_mc: f64) -> i64 {
        let n = gram.len() + 1;
        let mut seen = BTreeSet::new();
        for w in windows(lines, n) {
            let (context, symbol) = if forward {
                (&w[..n - 1], w[n - 1])
            } else {
                (&w[1..], w[0])
            };
            if context == gram && survives(lines, w, t_mc) {
                seen.insert(symbol);
            }
        }
        seen.len() as i64
    }

    fn normalized(deltas: &[i64]) -> Vec<f64> {
        let max = deltas.iter().copied().fold(0, i64::max);
        deltas
            .iter()
            .map(|&d| {
                if max > 0 {
                    d.max(0) as f64 / max as f64
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn profile(lines: &[Vec<char>], line: &[char], n_set: &[usize], t_mc: f64) -> Vec<f64> {
        let len = line.len();
        if len < 2 {
            return Vec::new();
        }
        let mut total = vec![0.0; len - 1];
        for &n in n_set {
            let fwd: Vec<i64> = (1..len)
                .map(|i| freedom(lines, &line[i - n.min(i)..i], true, t_mc))
                .collect();
            let bwd: Vec<i64> = (1..len)
                .map(|i| freedom(lines, &line[i..i + n.min(len - i)], false, t_mc))
                .collect();
            let df: Vec<i64> = (0..len - 1)
                .map(|k| if k == 0 { 0 } else { fwd[k] - fwd[k - 1] })
                .collect();
            let db: Vec<i64> = (0..len - 1)
                .map(|k| if k == len - 2 { 0 } else { bwd[k] - bwd[k + 1] })
                .collect();
            for (k, (p, m)) in normalized(&df).into_iter().zip(normalized(&db)).enumerate() {
                total[k] += (p + m) / 2.0;
            }
        }
        total.iter().map(|s| s / n_set.len() as f64).collect()
    }

    pub fn boundaries(
        lines: &[Vec<char>],
        line: &[char],
        n_set: &[usize],
        t_mc: f64,
        t_tm: f64,
    ) -> Vec<usize> {
        profile(lines, line, n_set, t_mc)
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > t_tm)
            .map(|(k, _)| k + 1)
            .collect()
    }
}
