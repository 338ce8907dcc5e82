//! Writers and readers for the pipeline's file artifacts.
//!
//! Every CSV is UTF-8, comma separated, one header row, dot decimal
//! separator. Reals are written in the shortest form that parses back to the
//! identical double, so files can be compared byte-for-byte across runs and
//! still carry full precision.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{ErrorSummary, EvalRow, WindowRow};
use crate::model::{BugHistory, MetricCatalog, MetricVector, ReleaseBugCount, Timeline};
use crate::stats::regression::RegressionModel;
use crate::stats::CorrelationMatrix;

fn real(x: f64) -> String {
    format!("{x}")
}

fn cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

pub fn bug_history_csv(timeline: &Timeline, history: &BugHistory) -> String {
    let mut out = String::from("release_id,release_name,labeled,inferred,total\n");
    for r in &timeline.releases {
        let c = history.get(r.id).copied().unwrap_or(ReleaseBugCount {
            release_id: r.id,
            labeled: 0,
            inferred: 0,
        });
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.id,
            cell(&r.name),
            c.labeled,
            c.inferred,
            c.total()
        );
    }
    out
}

pub fn read_bug_history(path: &Path) -> Result<BugHistory> {
    if !path.exists() {
        return Err(Error::InputNotFound(path.to_path_buf()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    for want in ["release_id", "labeled", "inferred"] {
        if !headers.iter().any(|h| h == want) {
            return Err(Error::Validation(format!(
                "{}: missing column '{want}'",
                path.display()
            )));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (ci, cl, cn) = (col("release_id"), col("labeled"), col("inferred"));
    let mut counts = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| {
                Error::Validation(format!("{}: row {} is short", path.display(), line + 2))
            })
        };
        let parse = |text: &str, what: &str| -> Result<u64> {
            text.trim().parse().map_err(|_| {
                Error::Validation(format!(
                    "{}: row {}: unreadable {what} '{text}'",
                    path.display(),
                    line + 2
                ))
            })
        };
        counts.push(ReleaseBugCount {
            release_id: parse(field(ci)?, "release id")? as u32,
            labeled: parse(field(cl)?, "labeled count")?,
            inferred: parse(field(cn)?, "inferred count")?,
        });
    }
    Ok(BugHistory { counts })
}

pub fn metrics_csv(catalog: &MetricCatalog, vectors: &[MetricVector]) -> String {
    let mut out = String::from("release_id");
    for def in catalog.entries() {
        out.push(',');
        out.push_str(&def.id);
    }
    out.push('\n');
    for v in vectors {
        let _ = write!(out, "{}", v.release_id);
        for def in catalog.entries() {
            out.push(',');
            out.push_str(&real(v.get(&def.id).unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

pub fn read_metrics(path: &Path, catalog: &MetricCatalog) -> Result<Vec<MetricVector>> {
    if !path.exists() {
        return Err(Error::InputNotFound(path.to_path_buf()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = std::iter::once("release_id")
        .chain(catalog.entries().iter().map(|d| d.id.as_str()))
        .collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Validation(format!(
            "{}: column set does not match the {}-metric catalog",
            path.display(),
            catalog.len()
        )));
    }
    let mut vectors = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != expected.len() {
            return Err(Error::Validation(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                line + 2,
                record.len(),
                expected.len()
            )));
        }
        let release_id: u32 = record[0].trim().parse().map_err(|_| {
            Error::Validation(format!(
                "{}: row {}: unreadable release id '{}'",
                path.display(),
                line + 2,
                &record[0]
            ))
        })?;
        let mut v = MetricVector::new(release_id);
        for (def, raw) in catalog.entries().iter().zip(record.iter().skip(1)) {
            let value: f64 = raw.trim().parse().map_err(|_| {
                Error::Validation(format!(
                    "{}: row {}: unreadable value '{raw}' for {}",
                    path.display(),
                    line + 2,
                    def.id
                ))
            })?;
            v.set(&def.id, value);
        }
        vectors.push(v);
    }
    Ok(vectors)
}

pub fn correlation_csv(matrix: &CorrelationMatrix) -> String {
    let mut out = String::from("series");
    for l in &matrix.labels {
        out.push(',');
        out.push_str(&cell(l));
    }
    out.push('\n');
    for (i, l) in matrix.labels.iter().enumerate() {
        out.push_str(&cell(l));
        for v in &matrix.values[i] {
            out.push(',');
            if let Some(p) = v {
                out.push_str(&real(*p));
            }
        }
        out.push('\n');
    }
    out
}

pub fn selected_metrics_csv(selected: &[crate::stats::SelectedMetric]) -> String {
    let mut out = String::from("metric_id,pcc\n");
    for m in selected {
        let _ = writeln!(out, "{},{}", cell(&m.id), real(m.pcc));
    }
    out
}

pub fn model_toml(model: &RegressionModel) -> Result<String> {
    toml::to_string(model)
        .map_err(|e| Error::Validation(format!("model not serializable: {e}")))
}

pub fn read_model(path: &Path) -> Result<RegressionModel> {
    if !path.exists() {
        return Err(Error::InputNotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

/// One row per prediction; failed releases keep their row with empty value
/// cells so they stay visible.
pub fn eval_csv(group_column: &str, rows: &[EvalRow]) -> String {
    let mut out = format!("release,{group_column},predicted,actual,error\n");
    for row in rows {
        let label = cell(&row.label);
        let mut lines: Vec<(u32, String)> = row
            .records
            .iter()
            .map(|r| {
                (
                    r.release_id,
                    format!(
                        "{},{label},{},{},{}",
                        r.release_id,
                        real(r.predicted),
                        r.actual,
                        r.error.map(real).unwrap_or_default()
                    ),
                )
            })
            .collect();
        for (id, _) in &row.failures {
            lines.push((*id, format!("{id},{label},,,")));
        }
        lines.sort_by_key(|(id, _)| *id);
        for (_, l) in lines {
            out.push_str(&l);
            out.push('\n');
        }
    }
    out
}

fn summary_cells(summary: Option<&ErrorSummary>) -> String {
    match summary {
        Some(s) => format!(
            "{},{},{},{},{},{}",
            real(s.median),
            real(s.mean),
            real(s.max),
            real(s.min),
            s.n,
            s.outliers
        ),
        None => ",,,,0,0".into(),
    }
}

pub fn summary_csv(group_column: &str, rows: &[EvalRow]) -> String {
    let mut out = format!("{group_column},median,mean,max,min,n,outliers\n");
    for row in rows {
        let _ = writeln!(out, "{},{}", cell(&row.label), summary_cells(row.summary.as_ref()));
    }
    out
}

pub fn window_eval_csv(rows: &[WindowRow]) -> String {
    let inner: Vec<EvalRow> = rows
        .iter()
        .map(|w| EvalRow {
            label: w.window.to_string(),
            records: w.row.records.clone(),
            failures: w.row.failures.clone(),
            summary: w.row.summary.clone(),
        })
        .collect();
    eval_csv("window", &inner)
}

pub fn window_summary_csv(rows: &[WindowRow]) -> String {
    let mut out = String::from(
        "window,median,mean,max,min,n,outliers,\
         last4_median,last4_mean,last4_max,last4_min,pcc_median,pcc_mean\n",
    );
    for w in rows {
        let last4 = match &w.last4 {
            Some(s) => format!("{},{},{},{}", real(s.median), real(s.mean), real(s.max), real(s.min)),
            None => ",,,".into(),
        };
        let opt = |v: Option<f64>| v.map(real).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            w.window,
            summary_cells(w.row.summary.as_ref()),
            last4,
            opt(w.pcc_median),
            opt(w.pcc_mean)
        );
    }
    out
}

/// Fixed-width table for stdout; files keep the full-precision values.
pub fn summary_table(group_column: &str, rows: &[EvalRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.label.len())
        .chain([group_column.len()])
        .max()
        .unwrap_or(8);
    let mut out = format!(
        "{:width$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>4}  {:>8}\n",
        group_column, "median", "mean", "max", "min", "n", "outliers"
    );
    for r in rows {
        match &r.summary {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "{:width$}  {:>8.3}  {:>8.3}  {:>8.3}  {:>8.3}  {:>4}  {:>8}",
                    r.label, s.median, s.mean, s.max, s.min, s.n, s.outliers
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{:width$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>4}  {:>8}",
                    r.label, "-", "-", "-", "-", 0, 0
                );
            }
        }
    }
    out
}

pub fn window_summary_table(rows: &[WindowRow]) -> String {
    let mut out = format!(
        "{:>6}  {:>8}  {:>8}  {:>12}  {:>10}  {:>10}\n",
        "window", "median", "mean", "last4_median", "pcc_median", "pcc_mean"
    );
    let opt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.3}"),
        None => "-".into(),
    };
    for w in rows {
        let (median, mean) = match &w.row.summary {
            Some(s) => (format!("{:.3}", s.median), format!("{:.3}", s.mean)),
            None => ("-".into(), "-".into()),
        };
        let _ = writeln!(
            out,
            "{:>6}  {:>8}  {:>8}  {:>12}  {:>10}  {:>10}",
            w.window,
            median,
            mean,
            opt(w.last4.as_ref().map(|s| s.median)),
            opt(w.pcc_median),
            opt(w.pcc_mean)
        );
    }
    out
}
