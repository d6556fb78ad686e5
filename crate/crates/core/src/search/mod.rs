//! Hyper-parameter grid evaluation.
//!
//! One unpruned model is built on the training corpus and one on each half
//! of it. Pruned copies are cached per `t_mc`, per-order boundary
//! contributions are cached per `(t_mc, n)`, and each `(n_set, t_mc)` pair
//! then yields one row per `t_tm` by thresholding its combined profiles.

mod report;

pub use report::{
    correlation_report, format_real, select_best, BestPoint, Mode, PairCorrelation, Report,
    ResultsTable, TargetSummary, CSV_HEADER, FIGURE_HEADER,
};

use serde::Deserialize;

use crate::corpus::{Corpus, ReferenceSegmentation};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::metrics::{agreement_f1, anti_entropy, boundary_f1, compression_factor, MetricVector};
use crate::model::{build_model_with, NGramModel, PruneThreshold};
use crate::tokenizer::{
    combine, order_contribution, segment_with_profile, tokenize_corpus_with, NSet, Tokenization,
    TokenizerParams,
};

/// Model compression thresholds explored by default.
pub const DEFAULT_T_MCS: [f64; 5] = [0.0, 0.0001, 0.001, 0.01, 0.1];

/// Boundary thresholds explored by default.
pub const DEFAULT_T_TMS: [f64; 16] = [
    0.0001, 0.0005, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
];

/// Axes of the three-dimensional search grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_sets: Vec<NSet>,
    pub t_mcs: Vec<PruneThreshold>,
    pub t_tms: Vec<f64>,
}

impl Default for GridSpec {
    /// Singletons `{1}`..`{7}` followed by prefixes `{1,2}`..`{1..7}`.
    fn default() -> Self {
        GridSpec::with_max_n(7)
    }
}

impl GridSpec {
    /// Default axes with N-sets limited to orders `1..=max_n`.
    pub fn with_max_n(max_n: usize) -> Self {
        let singletons = (1..=max_n).map(|n| NSet::new([n]));
        let prefixes = (2..=max_n).map(|k| NSet::new(1..=k));
        GridSpec {
            n_sets: singletons
                .chain(prefixes)
                .collect::<Result<_>>()
                .expect("orders are positive"),
            t_mcs: DEFAULT_T_MCS
                .iter()
                .map(|&t| PruneThreshold::new(t).expect("valid default"))
                .collect(),
            t_tms: DEFAULT_T_TMS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sets.is_empty() || self.t_mcs.is_empty() || self.t_tms.is_empty() {
            return Err(Error::precondition("grid axes must be non-empty"));
        }
        for &t in &self.t_tms {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::precondition(format!(
                    "tokenization threshold must be in (0, 1], got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_sets.len() * self.t_mcs.len() * self.t_tms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Model order needed to serve every N-set.
    pub fn model_order(&self) -> usize {
        self.n_sets.iter().map(NSet::highest).max().unwrap_or(1) + 1
    }

    /// All grid points in row order.
    pub fn points(&self) -> Vec<TokenizerParams> {
        let mut out = Vec::with_capacity(self.len());
        for n_set in &self.n_sets {
            for &t_mc in &self.t_mcs {
                for &t_tm in &self.t_tms {
                    out.push(TokenizerParams {
                        n_set: n_set.clone(),
                        t_mc,
                        t_tm,
                    });
                }
            }
        }
        out
    }

    /// Parses a TOML grid file with optional `n_sets`, `t_mcs` and `t_tms`
    /// arrays; missing axes keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            n_sets: Option<Vec<Vec<usize>>>,
            t_mcs: Option<Vec<f64>>,
            t_tms: Option<Vec<f64>>,
        }
        let raw: Raw =
            toml::from_str(text).map_err(|e| Error::precondition(format!("grid config: {e}")))?;
        let mut spec = GridSpec::default();
        if let Some(n_sets) = raw.n_sets {
            spec.n_sets = n_sets.into_iter().map(NSet::new).collect::<Result<_>>()?;
        }
        if let Some(t_mcs) = raw.t_mcs {
            spec.t_mcs = t_mcs
                .into_iter()
                .map(PruneThreshold::new)
                .collect::<Result<_>>()?;
        }
        if let Some(t_tms) = raw.t_tms {
            spec.t_tms = t_tms;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Which text C% and S̃ are measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricSet {
    #[default]
    Test,
    Train,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GridOptions {
    pub metric_set: MetricSet,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub params: TokenizerParams,
    pub metrics: MetricVector,
}

fn point_error(params: &TokenizerParams, source: Error) -> Error {
    Error::GridPoint {
        n_set: params.n_set.to_string(),
        t_mc: params.t_mc.value(),
        t_tm: params.t_tm,
        source: Box::new(source),
    }
}

fn metric_vector(
    main: &[Tokenization],
    half_a: &[Tokenization],
    half_b: &[Tokenization],
    metric_text: &[Tokenization],
    reference: &ReferenceSegmentation,
) -> Result<MetricVector> {
    Ok(MetricVector {
        f1: boundary_f1(main, reference)?.f1,
        c_pct: compression_factor(metric_text)?,
        anti_entropy: anti_entropy(metric_text)?,
        csf1: agreement_f1(half_a, half_b)?.f1,
    })
}

/// Evaluates a single grid point from scratch, with no caching.
pub fn evaluate_point(
    train: &Corpus,
    test: &Corpus,
    reference: &ReferenceSegmentation,
    params: &TokenizerParams,
    options: GridOptions,
) -> Result<MetricVector> {
    reference.check_paired(test)?;
    let exec = options.execution;
    let order = params.required_order();
    let (a, b) = train.split_halves()?;
    let model = build_model_with(train, order, exec)?.prune(params.t_mc);
    let model_a = build_model_with(&a, order, exec)?.prune(params.t_mc);
    let model_b = build_model_with(&b, order, exec)?.prune(params.t_mc);
    let main = tokenize_corpus_with(&model, test, params, exec)?;
    let ta = tokenize_corpus_with(&model_a, test, params, exec)?;
    let tb = tokenize_corpus_with(&model_b, test, params, exec)?;
    let metric_text = match options.metric_set {
        MetricSet::Test => None,
        MetricSet::Train => Some(tokenize_corpus_with(&model, train, params, exec)?),
    };
    metric_vector(
        &main,
        &ta,
        &tb,
        metric_text.as_deref().unwrap_or(&main),
        reference,
    )
    .map_err(|e| point_error(params, e))
}

/// A model applied to a list of lines.
struct Surface<'a> {
    model: usize,
    lines: &'a [String],
    chars: Vec<Vec<char>>,
}

const MAIN: usize = 0;
const HALF_A: usize = 1;
const HALF_B: usize = 2;
const TRAIN: usize = 3;

pub fn run_grid(
    train: &Corpus,
    test: &Corpus,
    reference: &ReferenceSegmentation,
    spec: &GridSpec,
) -> Result<Vec<GridRow>> {
    run_grid_with(train, test, reference, spec, GridOptions::default())
}

/// Evaluates every grid point. Rows come back in `(n_set, t_mc, t_tm)`
/// lexicographic order whatever the execution strategy.
pub fn run_grid_with(
    train: &Corpus,
    test: &Corpus,
    reference: &ReferenceSegmentation,
    spec: &GridSpec,
    options: GridOptions,
) -> Result<Vec<GridRow>> {
    spec.validate()?;
    reference.check_paired(test)?;
    let exec = options.execution;
    let order = spec.model_order();
    let (half_a, half_b) = train.split_halves()?;
    let corpora = [train, &half_a, &half_b];
    let models: Vec<NGramModel> = exec.try_map(&corpora, |c| {
        build_model_with(c, order, Execution::Sequential)
    })?;

    let to_chars = |lines: &[String]| -> Vec<Vec<char>> {
        lines.iter().map(|l| l.chars().collect()).collect()
    };
    let mut surfaces = vec![
        Surface {
            model: 0,
            lines: test.lines(),
            chars: to_chars(test.lines()),
        },
        Surface {
            model: 1,
            lines: test.lines(),
            chars: to_chars(test.lines()),
        },
        Surface {
            model: 2,
            lines: test.lines(),
            chars: to_chars(test.lines()),
        },
    ];
    if options.metric_set == MetricSet::Train {
        surfaces.push(Surface {
            model: 0,
            lines: train.lines(),
            chars: to_chars(train.lines()),
        });
    }

    let pruned: Vec<Vec<NGramModel>> = exec.map(&spec.t_mcs, |&t| {
        models.iter().map(|m| m.prune(t)).collect()
    });

    let mut orders: Vec<usize> = spec
        .n_sets
        .iter()
        .flat_map(|s| s.orders().iter().copied())
        .collect();
    orders.sort_unstable();
    orders.dedup();

    // contributions[t][s][o][line] for t_mc index t, surface s, order index o
    let (n_surfaces, n_orders) = (surfaces.len(), orders.len());
    let tasks: Vec<(usize, usize, usize)> = (0..spec.t_mcs.len())
        .flat_map(|t| (0..n_surfaces).flat_map(move |s| (0..n_orders).map(move |o| (t, s, o))))
        .collect();
    let computed = exec.map(&tasks, |&(t, s, o)| {
        let surface = &surfaces[s];
        let model = &pruned[t][surface.model];
        surface
            .chars
            .iter()
            .map(|c| order_contribution(model, c, orders[o]))
            .collect::<Vec<Vec<f64>>>()
    });
    let mut computed = computed.into_iter();
    let contributions: Vec<Vec<Vec<Vec<Vec<f64>>>>> = (0..spec.t_mcs.len())
        .map(|_| {
            (0..surfaces.len())
                .map(|_| computed.by_ref().take(orders.len()).collect())
                .collect()
        })
        .collect();

    let blocks: Vec<(usize, usize)> = (0..spec.n_sets.len())
        .flat_map(|n| (0..spec.t_mcs.len()).map(move |t| (n, t)))
        .collect();
    let rows = exec.try_map(&blocks, |&(n, t)| {
        let n_set = &spec.n_sets[n];
        let order_idx: Vec<usize> = n_set
            .orders()
            .iter()
            .map(|o| orders.binary_search(o).expect("order collected above"))
            .collect();
        let profiles: Vec<Vec<Vec<f64>>> = (0..surfaces.len())
            .map(|s| {
                let per_order = &contributions[t][s];
                (0..surfaces[s].lines.len())
                    .map(|line| {
                        let parts: Vec<&[f64]> = order_idx
                            .iter()
                            .map(|&o| per_order[o][line].as_slice())
                            .collect();
                        combine(&parts)
                    })
                    .collect()
            })
            .collect();

        spec.t_tms
            .iter()
            .map(|&t_tm| {
                let params = TokenizerParams {
                    n_set: n_set.clone(),
                    t_mc: spec.t_mcs[t],
                    t_tm,
                };
                let segment = |s: usize| -> Vec<Tokenization> {
                    surfaces[s]
                        .lines
                        .iter()
                        .zip(&profiles[s])
                        .map(|(line, profile)| segment_with_profile(line, profile, t_tm))
                        .collect()
                };
                let main = segment(MAIN);
                let train_text = (surfaces.len() > TRAIN).then(|| segment(TRAIN));
                let metrics = metric_vector(
                    &main,
                    &segment(HALF_A),
                    &segment(HALF_B),
                    train_text.as_deref().unwrap_or(&main),
                    reference,
                )
                .map_err(|e| point_error(&params, e))?;
                Ok(GridRow { params, metrics })
            })
            .collect::<Result<Vec<GridRow>>>()
    })?;
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ReferenceLine;

    fn toy() -> (Corpus, Corpus, ReferenceSegmentation) {
        let train = Corpus::from_lines([
            "the cat sat on the mat",
            "a cat and a hat",
            "the hat sat on a cat",
            "on the mat the cat sat",
            "a mat and the hat",
            "the cat and the mat",
        ])
        .unwrap();
        let test = Corpus::from_lines(["the cat sat", "a hat"]).unwrap();
        let reference = ReferenceSegmentation::new(vec![
            ReferenceLine {
                text: "the cat sat".into(),
                boundaries: vec![3, 4, 7, 8],
            },
            ReferenceLine {
                text: "a hat".into(),
                boundaries: vec![1, 2],
            },
        ])
        .unwrap();
        (train, test, reference)
    }

    fn small_spec() -> GridSpec {
        GridSpec {
            n_sets: vec![
                "1".parse().unwrap(),
                "1+2".parse().unwrap(),
                "3".parse().unwrap(),
            ],
            t_mcs: vec![PruneThreshold::NONE, PruneThreshold::new(0.2).unwrap()],
            t_tms: vec![0.1, 0.3, 0.5, 0.9],
        }
    }

    #[test]
    fn default_spec_shape() {
        let spec = GridSpec::default();
        assert_eq!(spec.n_sets.len(), 13);
        assert_eq!(spec.len(), 1040);
        assert_eq!(spec.model_order(), 8);
        assert_eq!(spec.n_sets[7].to_string(), "1+2");
        assert_eq!(spec.n_sets[12].to_string(), "1+2+3+4+5+6+7");
    }

    #[test]
    fn two_point_grid() {
        let (train, test, reference) = toy();
        let spec = GridSpec {
            n_sets: vec!["1".parse().unwrap()],
            t_mcs: vec![PruneThreshold::NONE],
            t_tms: vec![0.2, 0.6],
        };
        let rows = run_grid(&train, &test, &reference, &spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].params.t_tm, 0.6);
    }

    #[test]
    fn caching_matches_cache_free_evaluation() {
        let (train, test, reference) = toy();
        let spec = small_spec();
        for metric_set in [MetricSet::Test, MetricSet::Train] {
            let options = GridOptions {
                metric_set,
                execution: Execution::Parallel,
            };
            let rows = run_grid_with(&train, &test, &reference, &spec, options).unwrap();
            assert_eq!(rows.len(), spec.len());
            for (row, params) in rows.iter().zip(spec.points()) {
                assert_eq!(row.params, params);
                let fresh = evaluate_point(&train, &test, &reference, &params, options).unwrap();
                assert_eq!(row.metrics, fresh, "{params:?}");
            }
        }
    }

    #[test]
    fn sequential_and_parallel_rows_agree() {
        let (train, test, reference) = toy();
        let spec = small_spec();
        let seq = GridOptions {
            execution: Execution::Sequential,
            ..Default::default()
        };
        let par = GridOptions {
            execution: Execution::Parallel,
            ..Default::default()
        };
        assert_eq!(
            run_grid_with(&train, &test, &reference, &spec, seq).unwrap(),
            run_grid_with(&train, &test, &reference, &spec, par).unwrap()
        );
    }

    #[test]
    fn mismatched_reference_is_rejected() {
        let (train, test, _) = toy();
        let reference = ReferenceSegmentation::new(vec![ReferenceLine {
            text: "the cat sat".into(),
            boundaries: vec![],
        }])
        .unwrap();
        assert!(run_grid(&train, &test, &reference, &small_spec()).is_err());
    }

    #[test]
    fn failing_point_is_named() {
        let (train, _, _) = toy();
        let test = Corpus::from_lines([""]).unwrap();
        let reference = ReferenceSegmentation::new(vec![ReferenceLine {
            text: String::new(),
            boundaries: vec![],
        }])
        .unwrap();
        let err = run_grid(&train, &test, &reference, &small_spec()).unwrap_err();
        assert!(matches!(err, Error::GridPoint { .. }), "{err}");
        assert!(err.to_string().contains("n_set=1 t_mc=0 t_tm=0.1"), "{err}");
    }

    #[test]
    fn toml_config() {
        let spec =
            GridSpec::from_toml("n_sets = [[1], [1, 2]]\nt_mcs = [0.0]\nt_tms = [0.5]\n").unwrap();
        assert_eq!(spec.len(), 2);
        assert_eq!(spec.model_order(), 3);
        let partial = GridSpec::from_toml("t_tms = [0.5]").unwrap();
        assert_eq!(partial.len(), 13 * 5);
        assert!(GridSpec::from_toml("t_tms = [0.0]").is_err());
        assert!(GridSpec::from_toml("t_mcs = [1.0]").is_err());
        assert!(GridSpec::from_toml("bogus = 1").is_err());
        assert!(GridSpec::from_toml("n_sets = []").is_err());
    }
}
