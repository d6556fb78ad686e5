//! Results CSV, per-metric best points and the correlation report.

use std::fmt::Write as _;

use serde::Serialize;

use super::GridRow;
use crate::error::{Error, Result};
use crate::metrics::{pearson, Correlation, Metric};
use crate::model::PruneThreshold;
use crate::tokenizer::TokenizerParams;

pub const CSV_HEADER: &str = "n_set;t_mc;t_tm;f1;c_pct;anti_entropy;csf1;add2;add3;mul2;mul3";
pub const FIGURE_HEADER: &str = "metric;f1_at_argmax;pearson_vs_f1";

/// Six decimals, ties to even, never `-0.000000`.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Max,
    Min,
}

/// Grid results as columns, one per [`Metric`], aligned with `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    params: Vec<TokenizerParams>,
    columns: Vec<Vec<f64>>,
}

impl ResultsTable {
    pub fn from_rows(rows: &[GridRow]) -> Self {
        ResultsTable {
            params: rows.iter().map(|r| r.params.clone()).collect(),
            columns: Metric::ALL
                .iter()
                .map(|&m| rows.iter().map(|r| r.metrics.get(m)).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[TokenizerParams] {
        &self.params
    }

    pub fn column(&self, metric: Metric) -> &[f64] {
        let idx = Metric::ALL
            .iter()
            .position(|&m| m == metric)
            .expect("all metrics have columns");
        &self.columns[idx]
    }

    /// Renders rows in the semicolon-separated results format.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (i, p) in self.params.iter().enumerate() {
            let _ = write!(
                out,
                "{};{};{}",
                p.n_set,
                format_real(p.t_mc.value()),
                format_real(p.t_tm)
            );
            for col in &self.columns {
                out.push(';');
                out.push_str(&format_real(col[i]));
            }
            out.push('\n');
        }
        out
    }

    /// Reads a results CSV; every metric column is taken as written.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Parse {
            path: "<results>".into(),
            line,
            message,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            other => return Err(bad(1, format!("unexpected header {other:?}"))),
        }
        let mut table = ResultsTable {
            params: Vec::new(),
            columns: vec![Vec::new(); Metric::ALL.len()],
        };
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let fields: Vec<&str> = line.split(';').collect();
            if fields.len() != 3 + Metric::ALL.len() {
                return Err(bad(
                    lineno,
                    format!("expected 11 fields, got {}", fields.len()),
                ));
            }
            let real = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(lineno, format!("bad number {s:?}")))
            };
            let params = TokenizerParams::new(
                fields[0]
                    .parse()
                    .map_err(|e: Error| bad(lineno, e.to_string()))?,
                PruneThreshold::new(real(fields[1])?).map_err(|e| bad(lineno, e.to_string()))?,
                real(fields[2])?,
            )
            .map_err(|e| bad(lineno, e.to_string()))?;
            table.params.push(params);
            for (col, field) in table.columns.iter_mut().zip(&fields[3..]) {
                col.push(real(field)?);
            }
        }
        Ok(table)
    }

    /// Index of the extremal value of `metric`; first row wins ties.
    pub fn best_index(&self, metric: Metric, mode: Mode) -> Result<usize> {
        let col = self.column(metric);
        if col.is_empty() {
            return Err(Error::precondition("cannot select from an empty grid"));
        }
        let mut best = 0;
        for (i, &v) in col.iter().enumerate().skip(1) {
            let better = match mode {
                Mode::Max => v > col[best],
                Mode::Min => v < col[best],
            };
            if better {
                best = i;
            }
        }
        Ok(best)
    }

    pub fn best(&self, metric: Metric, mode: Mode) -> Result<BestPoint> {
        let i = self.best_index(metric, mode)?;
        Ok(BestPoint {
            row: i,
            n_set: self.params[i].n_set.to_string(),
            t_mc: self.params[i].t_mc.value(),
            t_tm: self.params[i].t_tm,
            value: self.column(metric)[i],
            f1: self.column(Metric::F1)[i],
        })
    }

    pub fn report(&self) -> Result<Report> {
        if self.len() < 2 {
            return Err(Error::precondition(format!(
                "correlation report needs at least 2 rows, got {}",
                self.len()
            )));
        }
        let f1 = self.column(Metric::F1);
        let targets = Metric::TARGETS
            .iter()
            .map(|&m| {
                Ok(TargetSummary {
                    metric: m.name(),
                    argmax: self.best(m, Mode::Max)?,
                    argmin: if m.involves_compression() {
                        Some(self.best(m, Mode::Min)?)
                    } else {
                        None
                    },
                    pearson_vs_f1: pearson(f1, self.column(m))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let pairs = [
            (Metric::CrossSplitF1, Metric::AntiEntropy),
            (Metric::CrossSplitF1, Metric::CompressionFactor),
            (Metric::AntiEntropy, Metric::CompressionFactor),
        ];
        let pairwise = pairs
            .iter()
            .map(|&(a, b)| {
                Ok(PairCorrelation {
                    metric1: a.name(),
                    metric2: b.name(),
                    pearson: pearson(self.column(a), self.column(b))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Report {
            rows: self.len(),
            best_f1: self.best(Metric::F1, Mode::Max)?,
            targets,
            pairwise,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestPoint {
    pub row: usize,
    pub n_set: String,
    pub t_mc: f64,
    pub t_tm: f64,
    pub value: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSummary {
    pub metric: &'static str,
    pub argmax: BestPoint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<BestPoint>,
    pub pearson_vs_f1: Correlation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub metric1: &'static str,
    pub metric2: &'static str,
    pub pearson: Correlation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub rows: usize,
    pub best_f1: BestPoint,
    pub targets: Vec<TargetSummary>,
    pub pairwise: Vec<PairCorrelation>,
}

impl Report {
    pub fn target(&self, metric: Metric) -> Option<&TargetSummary> {
        self.targets.iter().find(|t| t.metric == metric.name())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// Bar data: F1 at each target's argmax and its correlation with F1.
    pub fn figure_csv(&self) -> String {
        let mut out = String::from(FIGURE_HEADER);
        out.push('\n');
        for t in &self.targets {
            let r = match t.pearson_vs_f1 {
                Correlation::Value(r) => format_real(r),
                Correlation::Undefined => "undefined".to_string(),
            };
            let _ = writeln!(out, "{};{};{}", t.metric, format_real(t.argmax.f1), r);
        }
        out
    }
}

/// Parameters and F1 of the row that is extremal in `metric`.
pub fn select_best(rows: &[GridRow], metric: Metric, mode: Mode) -> Result<(TokenizerParams, f64)> {
    let table = ResultsTable::from_rows(rows);
    let i = table.best_index(metric, mode)?;
    Ok((rows[i].params.clone(), rows[i].metrics.f1))
}

pub fn correlation_report(rows: &[GridRow]) -> Result<Report> {
    ResultsTable::from_rows(rows).report()
}
