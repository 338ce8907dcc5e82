//! Linear bug-count models: ordinary least squares and its constrained
//! variants (non-negative coefficients, no intercept), plus prediction and
//! the relative error measure used everywhere downstream.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MetricVector;

use super::nnls::{nnls, svd_solve};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    pub intercept: bool,
    /// Constrain all fitted parameters (including the intercept) to be
    /// non-negative.
    pub nonneg: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { intercept: true, nonneg: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub metric_ids: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub options: FitOptions,
    pub training_releases: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub model: RegressionModel,
    /// Euclidean norm of the training residual, original scale.
    pub residual_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub raw: f64,
    /// `raw` clamped to zero from below; bug counts cannot be negative.
    pub value: f64,
    pub clamped: bool,
}

/// Per-release evaluation record: what the model said, what happened.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub release_id: u32,
    pub predicted: f64,
    pub clamped: bool,
    pub actual: u64,
    pub error: Option<f64>,
}

/// Relative prediction error `|predicted - actual| / actual`. Undefined for
/// releases without any observed bugs.
pub fn prediction_error(predicted: f64, actual: u64) -> Option<f64> {
    if actual == 0 {
        return None;
    }
    Some((predicted - actual as f64).abs() / actual as f64)
}

/// Pulls the named metrics out of each vector, preserving order. Fails on
/// the first vector missing one of them.
pub fn rows_from_vectors(vectors: &[MetricVector], ids: &[String]) -> Result<Vec<Vec<f64>>> {
    vectors
        .iter()
        .map(|v| {
            ids.iter()
                .map(|id| {
                    v.get(id).ok_or_else(|| {
                        Error::MissingMetric(format!("release {}: {id}", v.release_id))
                    })
                })
                .collect()
        })
        .collect()
}

/// Fits `y ~ X` under the given options.
///
/// Columns are rescaled to unit max-abs before solving so that metrics
/// spanning wildly different ranges (lines of code vs commit counts) do not
/// wreck conditioning; coefficients are reported on the original scale.
pub fn fit_linear(
    metric_ids: &[String],
    rows: &[Vec<f64>],
    y: &[f64],
    training_releases: &[u32],
    options: FitOptions,
) -> Result<FitResult> {
    let n = rows.len();
    let p = metric_ids.len();
    if n == 0 {
        return Err(Error::Validation("regression needs at least one observation".into()));
    }
    if y.len() != n || training_releases.len() != n {
        return Err(Error::Validation(format!(
            "regression shape mismatch: {n} rows, {} responses, {} release labels",
            y.len(),
            training_releases.len()
        )));
    }
    if p == 0 && !options.intercept {
        return Err(Error::Validation(
            "no metrics selected and no intercept requested; nothing to fit".into(),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != p {
            return Err(Error::Validation(format!(
                "row {i} has {} values, expected {p}",
                row.len()
            )));
        }
    }
    if rows.iter().flatten().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("regression input contains non-finite values".into()));
    }

    let cols = p + options.intercept as usize;
    let mut scales = vec![1.0f64; cols];
    for j in 0..p {
        let s = rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max);
        if s > 0.0 {
            scales[j] = s;
        }
    }

    let a = DMatrix::from_fn(n, cols, |i, j| {
        if j < p {
            rows[i][j] / scales[j]
        } else {
            1.0
        }
    });
    let yv = DVector::from_column_slice(y);

    let beta = if options.nonneg {
        nnls(&a, &yv)?
    } else {
        svd_solve(&a, &yv)?
    };
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("fit produced non-finite coefficients".into()));
    }

    let residual_norm = (&yv - &a * &beta).norm();
    let coefficients: Vec<f64> = (0..p).map(|j| beta[j] / scales[j]).collect();
    let intercept = if options.intercept { beta[p] } else { 0.0 };

    Ok(FitResult {
        model: RegressionModel {
            metric_ids: metric_ids.to_vec(),
            coefficients,
            intercept,
            options,
            training_releases: training_releases.to_vec(),
        },
        residual_norm,
    })
}

/// Applies the model to one release's metric vector.
pub fn predict(model: &RegressionModel, vector: &MetricVector) -> Result<Prediction> {
    let mut raw = model.intercept;
    for (id, coef) in model.metric_ids.iter().zip(&model.coefficients) {
        let v = vector.get(id).ok_or_else(|| {
            Error::MissingMetric(format!("release {}: {id}", vector.release_id))
        })?;
        raw += coef * v;
    }
    if !raw.is_finite() {
        return Err(Error::Numeric(format!(
            "prediction for release {} is not finite",
            vector.release_id
        )));
    }
    Ok(Prediction { raw, value: raw.max(0.0), clamped: raw < 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn vector_with(release_id: u32, pairs: &[(&str, f64)]) -> MetricVector {
        let mut v = MetricVector::new(release_id);
        for (k, val) in pairs {
            v.set(k, *val);
        }
        v
    }

    #[test]
    fn recovers_exact_line() {
        let m = ids(&["x"]);
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| 2.0 * i as f64 + 3.0).collect();
        let fit = fit_linear(&m, &rows, &y, &[1, 2, 3, 4, 5, 6], FitOptions::default()).unwrap();
        assert!((fit.model.coefficients[0] - 2.0).abs() < 1e-10);
        assert!((fit.model.intercept - 3.0).abs() < 1e-10);
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn nonneg_clamps_descending_predictor() {
        let m = ids(&["x"]);
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 10.0 - 2.0 * i as f64).collect();
        let opts = FitOptions { intercept: true, nonneg: true };
        let fit = fit_linear(&m, &rows, &y, &[1, 2, 3, 4, 5], opts).unwrap();
        assert_eq!(fit.model.coefficients[0], 0.0);
        // Best the model can do is sit at the mean.
        assert!((fit.model.intercept - 6.0).abs() < 1e-8, "{}", fit.model.intercept);
    }

    #[test]
    fn no_intercept_goes_through_origin() {
        let m = ids(&["x"]);
        let rows: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![5.0, 7.0, 9.0];
        let opts = FitOptions { intercept: false, nonneg: false };
        let fit = fit_linear(&m, &rows, &y, &[1, 2, 3], opts).unwrap();
        assert_eq!(fit.model.intercept, 0.0);
        assert!(fit.residual_norm > 0.1, "line has an offset, fit cannot be exact");
        let with = fit_linear(&m, &rows, &y, &[1, 2, 3], FitOptions::default()).unwrap();
        assert!(with.residual_norm < fit.residual_norm);
    }

    #[test]
    fn intercept_only_fit_predicts_mean() {
        let fit = fit_linear(&[], &[vec![], vec![], vec![]], &[2.0, 4.0, 9.0], &[1, 2, 3],
            FitOptions::default())
        .unwrap();
        assert!((fit.model.intercept - 5.0).abs() < 1e-10);
        assert!(
            fit_linear(&[], &[vec![]], &[1.0], &[1],
                FitOptions { intercept: false, nonneg: false })
            .is_err()
        );
    }

    #[test]
    fn free_fit_residual_is_orthogonal_to_design() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let n = rng.gen_range(4..12);
            let p = rng.gen_range(1..4);
            let m: Vec<String> = (0..p).map(|j| format!("m{j}")).collect();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..p).map(|_| rng.gen_range(-100.0..100.0)).collect())
                .collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let rel: Vec<u32> = (1..=n as u32).collect();
            let fit = fit_linear(&m, &rows, &y, &rel, FitOptions::default()).unwrap();
            // residual must be orthogonal to every column and to the ones
            // vector, otherwise the solve left improvement on the table
            let r: Vec<f64> = (0..n)
                .map(|i| {
                    let pred: f64 = (0..p)
                        .map(|j| rows[i][j] * fit.model.coefficients[j])
                        .sum::<f64>()
                        + fit.model.intercept;
                    y[i] - pred
                })
                .collect();
            let ynorm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            for j in 0..p {
                let colmax = rows.iter().map(|row| row[j].abs()).fold(0.0, f64::max).max(1.0);
                let dot: f64 = (0..n).map(|i| rows[i][j] / colmax * r[i]).sum();
                assert!(dot.abs() < 1e-8 * ynorm * n as f64, "column {j}: {dot}");
            }
            let ones: f64 = r.iter().sum();
            assert!(ones.abs() < 1e-8 * ynorm * n as f64);
        }
    }

    #[test]
    fn scaling_a_column_does_not_change_predictions() {
        let m = ids(&["big", "small"]);
        let rows = vec![
            vec![1.0e6, 0.2],
            vec![2.0e6, 0.5],
            vec![3.5e6, 0.1],
            vec![1.2e6, 0.9],
        ];
        let y = vec![12.0, 19.0, 31.0, 14.0];
        let rel = [1, 2, 3, 4];
        let fit = fit_linear(&m, &rows, &y, &rel, FitOptions::default()).unwrap();
        let shrunk: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0] / 1.0e6, r[1]]).collect();
        let fit2 = fit_linear(&m, &shrunk, &y, &rel, FitOptions::default()).unwrap();
        for (row, small) in rows.iter().zip(&shrunk) {
            let v1 = vector_with(1, &[("big", row[0]), ("small", row[1])]);
            let v2 = vector_with(1, &[("big", small[0]), ("small", small[1])]);
            let p1 = predict(&fit.model, &v1).unwrap().raw;
            let p2 = predict(&fit2.model, &v2).unwrap().raw;
            assert!((p1 - p2).abs() < 1e-6, "{p1} vs {p2}");
        }
    }

    #[test]
    fn duplicate_columns_still_fit_the_data() {
        let m = ids(&["a", "a_copy"]);
        let rows: Vec<Vec<f64>> = (1..=5).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = (1..=5).map(|i| 3.0 * i as f64).collect();
        let fit = fit_linear(&m, &rows, &y, &[1, 2, 3, 4, 5], FitOptions::default()).unwrap();
        assert!(fit.residual_norm < 1e-8);
        let v = vector_with(6, &[("a", 6.0), ("a_copy", 6.0)]);
        let p = predict(&fit.model, &v).unwrap();
        assert!((p.value - 18.0).abs() < 1e-6);
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(prediction_error(920.0, 887), Some(33.0 / 887.0));
        assert_eq!(prediction_error(854.0, 887), Some(33.0 / 887.0));
        assert_eq!(prediction_error(887.0, 887), Some(0.0));
        assert_eq!(prediction_error(5.0, 0), None);
    }

    #[test]
    fn prediction_clamps_below_zero() {
        let model = RegressionModel {
            metric_ids: vec!["x".into()],
            coefficients: vec![-2.0],
            intercept: 1.0,
            options: FitOptions::default(),
            training_releases: vec![1],
        };
        let p = predict(&model, &vector_with(9, &[("x", 3.0)])).unwrap();
        assert_eq!(p.raw, -5.0);
        assert_eq!(p.value, 0.0);
        assert!(p.clamped);
        let q = predict(&model, &vector_with(9, &[("x", 0.0)])).unwrap();
        assert!(!q.clamped);
    }

    #[test]
    fn predict_reports_missing_metric() {
        let model = RegressionModel {
            metric_ids: vec!["absent".into()],
            coefficients: vec![1.0],
            intercept: 0.0,
            options: FitOptions::default(),
            training_releases: vec![1],
        };
        let err = predict(&model, &MetricVector::new(4)).unwrap_err();
        assert!(err.to_string().contains("absent"), "{err}");
    }

    #[test]
    fn model_round_trips_through_toml() {
        let model = RegressionModel {
            metric_ids: vec!["commits".into(), "new_loc".into()],
            coefficients: vec![0.125, 0.004],
            intercept: 12.5,
            options: FitOptions { intercept: true, nonneg: true },
            training_releases: vec![1, 2, 3],
        };
        let text = toml::to_string_pretty(&model).unwrap();
        let back: RegressionModel = toml::from_str(&text).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn rows_from_vectors_preserves_order_and_reports_gaps() {
        let ids = ids(&["b", "a"]);
        let v = vector_with(3, &[("a", 1.0), ("b", 2.0)]);
        let rows = rows_from_vectors(&[v], &ids).unwrap();
        assert_eq!(rows, vec![vec![2.0, 1.0]]);
        let gap = rows_from_vectors(&[MetricVector::new(7)], &ids).unwrap_err();
        assert!(gap.to_string().contains("release 7"));
    }
}
