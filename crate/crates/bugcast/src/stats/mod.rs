//! Correlation screening: Pearson coefficients between metric series and the
//! bug series, and the policy that picks regression inputs from them.

pub mod nnls;
pub mod regression;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BugHistory, MetricVector};

/// Pearson correlation of two equal-length series. `None` when undefined
/// (either side has zero variance). Errors on empty, mismatched, or
/// non-finite input.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Validation("correlation of empty series".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("correlation input is not finite".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// Pairwise correlations between metric series and the bug series. The bug
/// series is always the last row and column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

pub const BUGS_LABEL: &str = "bugs";

impl CorrelationMatrix {
    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == row)?;
        let j = self.labels.iter().position(|l| l == col)?;
        self.values[i][j]
    }

    /// Correlation of every metric against the bug series.
    pub fn against_bugs(&self) -> Vec<(String, Option<f64>)> {
        let bugs = self.labels.len() - 1;
        self.labels[..bugs]
            .iter()
            .cloned()
            .zip(self.values[bugs].iter().copied())
            .collect()
    }
}

/// Build the correlation matrix for the given metric ids over all releases
/// present in `vectors`, which must align with `history` by release id.
pub fn correlation_matrix(
    vectors: &[MetricVector],
    history: &BugHistory,
    ids: &[String],
) -> Result<CorrelationMatrix> {
    if ids.is_empty() {
        return Err(Error::Validation("no metric ids to correlate".into()));
    }
    if vectors.len() < 2 {
        return Err(Error::Validation(format!(
            "correlation needs at least 2 releases, got {}",
            vectors.len()
        )));
    }
    let mut ordered: Vec<&MetricVector> = vectors.iter().collect();
    ordered.sort_by_key(|v| v.release_id);

    let mut series: Vec<Vec<f64>> = Vec::with_capacity(ids.len() + 1);
    for id in ids {
        let mut s = Vec::with_capacity(ordered.len());
        for v in &ordered {
            s.push(v.get(id).ok_or_else(|| Error::MissingMetric(id.clone()))?);
        }
        series.push(s);
    }
    let bugs: Vec<f64> = ordered
        .iter()
        .map(|v| {
            history
                .get(v.release_id)
                .map(|c| c.total() as f64)
                .ok_or_else(|| {
                    Error::Validation(format!(
                        "release {} has metrics but no bug count",
                        v.release_id
                    ))
                })
        })
        .collect::<Result<_>>()?;
    series.push(bugs);

    let mut labels: Vec<String> = ids.to_vec();
    labels.push(BUGS_LABEL.into());

    let n = series.len();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let p = pearson(&series[i], &series[j])?;
            values[i][j] = p;
            values[j][i] = p;
        }
    }
    Ok(CorrelationMatrix { labels, values })
}

/// How regression inputs are picked from the correlation screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    /// Keep metrics with |PCC| strictly above this.
    pub min_abs_pcc: f64,
    pub max_metrics: usize,
    /// Drop negatively correlated metrics instead of fitting them.
    pub require_positive: bool,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy {
            min_abs_pcc: 0.7,
            max_metrics: 5,
            require_positive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedMetric {
    pub id: String,
    pub pcc: f64,
}

/// Rank metrics by correlation strength against bugs and apply the policy.
/// An empty result means nothing cleared the bar; callers decide whether
/// that is fatal.
pub fn select_metrics(matrix: &CorrelationMatrix, policy: &SelectionPolicy) -> Vec<SelectedMetric> {
    let mut picked: Vec<SelectedMetric> = matrix
        .against_bugs()
        .into_iter()
        .filter_map(|(id, p)| p.map(|pcc| SelectedMetric { id, pcc }))
        .filter(|m| m.pcc.abs() > policy.min_abs_pcc)
        .filter(|m| !policy.require_positive || m.pcc > 0.0)
        .collect();
    picked.sort_by(|a, b| {
        b.pcc
            .abs()
            .partial_cmp(&a.pcc.abs())
            .expect("finite pcc")
            .then_with(|| a.id.cmp(&b.id))
    });
    picked.truncate(policy.max_metrics);
    picked
}
