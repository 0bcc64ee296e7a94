//! Report rendering. Numbers use the shortest representation that parses
//! back to the same f64, so equal results give byte-identical files.
//!
//! CSV headers:
//! - fit: `p,m,phi,sigma2,q_value,converged,iterations[,centered_mean]`
//! - select: `order,log_loss,bias,criterion,aic,phi,sigma2,q_value,converged,replicates_used,replicates_skipped,chosen[,centered_mean]`
//! - experiment report.csv: `replicate,seed,estimator,order,m,phi,sigma2,fit_loss,score,converged`
//!
//! Coefficient vectors inside CSV fields are joined with `;`.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use featmatch::{AicResult, ExperimentReportF64, FitResultF64, SelectionResultF64};
use serde::Serialize;

use crate::Failure;

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::runtime(format!("cannot write output: {e}")))
        }
    }
}

fn join(phi: &[f64]) -> String {
    phi.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn json<S: Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct FitJson<'a> {
    p: usize,
    m: usize,
    phi: &'a [f64],
    sigma2: f64,
    q_value: f64,
    converged: bool,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    centered_mean: Option<f64>,
}

pub fn fit_report(fit: &FitResultF64, mean: Option<f64>, format: Format) -> String {
    let row = FitJson {
        p: fit.order,
        m: fit.m,
        phi: &fit.model.phi,
        sigma2: fit.model.sigma2,
        q_value: fit.q_value,
        converged: fit.diagnostics.converged,
        iterations: fit.diagnostics.iterations,
        centered_mean: mean,
    };
    match format {
        Format::Json => json(&row),
        Format::Csv => {
            let mut text = String::from("p,m,phi,sigma2,q_value,converged,iterations");
            text.push_str(if mean.is_some() { ",centered_mean\n" } else { "\n" });
            text.push_str(&format!(
                "{},{},{},{},{},{},{}",
                row.p,
                row.m,
                join(row.phi),
                row.sigma2,
                row.q_value,
                row.converged,
                row.iterations
            ));
            if let Some(mu) = mean {
                text.push_str(&format!(",{mu}"));
            }
            text.push('\n');
            text
        }
    }
}

#[derive(Serialize)]
struct SelectRowJson<'a> {
    order: usize,
    log_loss: f64,
    bias: f64,
    criterion: f64,
    aic: Option<f64>,
    phi: &'a [f64],
    sigma2: f64,
    q_value: f64,
    converged: bool,
    replicates_used: usize,
    replicates_skipped: usize,
}

#[derive(Serialize)]
struct SelectJson<'a> {
    m: usize,
    bootstrap: usize,
    seed: u64,
    chosen_p: usize,
    tie_break: Option<&'a str>,
    aic_chosen_p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    centered_mean: Option<f64>,
    rows: Vec<SelectRowJson<'a>>,
}

pub fn selection_report(
    result: &SelectionResultF64,
    aic: Option<&AicResult<f64>>,
    mean: Option<f64>,
    format: Format,
) -> String {
    let rows: Vec<_> = result
        .rows
        .iter()
        .map(|r| SelectRowJson {
            order: r.order,
            log_loss: r.log_loss,
            bias: r.bias,
            criterion: r.criterion,
            aic: aic.map(|a| a.values[r.order]),
            phi: &r.fit.model.phi,
            sigma2: r.fit.model.sigma2,
            q_value: r.fit.q_value,
            converged: r.fit.diagnostics.converged,
            replicates_used: r.replicates_used,
            replicates_skipped: r.replicates_skipped,
        })
        .collect();
    match format {
        Format::Json => json(&SelectJson {
            m: result.m,
            bootstrap: result.bootstrap,
            seed: result.seed,
            chosen_p: result.chosen_p,
            tie_break: result.tie_break.as_deref(),
            aic_chosen_p: aic.map(|a| a.chosen_p),
            centered_mean: mean,
            rows,
        }),
        Format::Csv => {
            let mut text = String::from(
                "order,log_loss,bias,criterion,aic,phi,sigma2,q_value,converged,replicates_used,replicates_skipped,chosen",
            );
            text.push_str(if mean.is_some() { ",centered_mean\n" } else { "\n" });
            for r in rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.order,
                    r.log_loss,
                    r.bias,
                    r.criterion,
                    r.aic.map(|v| v.to_string()).unwrap_or_default(),
                    join(r.phi),
                    r.sigma2,
                    r.q_value,
                    r.converged,
                    r.replicates_used,
                    r.replicates_skipped,
                    r.order == result.chosen_p
                ));
                if let Some(mu) = mean {
                    text.push_str(&format!(",{mu}"));
                }
                text.push('\n');
            }
            text
        }
    }
}

pub fn experiment_rows(report: &ExperimentReportF64) -> String {
    let mut text = String::from("replicate,seed,estimator,order,m,phi,sigma2,fit_loss,score,converged\n");
    for r in &report.rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.replicate,
            r.seed,
            r.estimator,
            r.order,
            r.m,
            join(&r.phi),
            r.sigma2,
            r.fit_loss,
            r.score,
            r.converged
        ));
    }
    text
}

pub fn experiment_summary(report: &ExperimentReportF64) -> String {
    json(&report.summary)
}
