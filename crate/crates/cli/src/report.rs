//! Report rendering. `text` is a human-readable layout; `machine` is a flat
//! key-value document (one `key = value` per line, string values quoted).

use std::fmt::Write as _;

use mesinar_core::estimate::{FitResult, PdinarFit};
use mesinar_core::model::Sign;

use crate::describe::Summary;
use crate::mcstudy::{McConfig, McReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

pub fn render_summary(s: &Summary, format: Format) -> String {
    match format {
        Format::Machine => {
            let mut out = String::new();
            let _ = writeln!(out, "n = {}", s.n);
            let _ = writeln!(out, "mean = {}", s.mean);
            let _ = writeln!(out, "variance = {}", s.variance);
            let _ = writeln!(out, "minimum = {}", s.minimum);
            let _ = writeln!(out, "median = {}", s.median);
            let _ = writeln!(out, "maximum = {}", s.maximum);
            let _ = writeln!(out, "range = {}", s.range);
            out
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "n         {}", s.n);
            let _ = writeln!(out, "mean      {:.4}", s.mean);
            let _ = writeln!(out, "variance  {:.4}", s.variance);
            let _ = writeln!(out, "minimum   {}", s.minimum);
            let _ = writeln!(out, "median    {}", s.median);
            let _ = writeln!(out, "maximum   {}", s.maximum);
            let _ = writeln!(out, "range     {}", s.range);
            out
        }
    }
}

fn delta_i(d: Sign) -> i64 {
    d.value()
}

pub fn render_fit(fit: &FitResult, n: usize, format: Format) -> String {
    let e = &fit.estimates;
    let signed_p = e.delta().as_f64() * e.p();
    match format {
        Format::Machine => {
            let mut out = String::new();
            let _ = writeln!(out, "model = \"mesinar\"");
            let _ = writeln!(out, "method = \"{}\"", fit.method);
            let _ = writeln!(out, "n = {n}");
            let _ = writeln!(out, "n_used = {}", fit.n_used);
            let _ = writeln!(out, "delta = {}", delta_i(fit.delta_used));
            let _ = writeln!(out, "phi = {}", e.phi());
            let _ = writeln!(out, "p = {}", e.p());
            let _ = writeln!(out, "signed_p = {signed_p}");
            let _ = writeln!(out, "beta = {}", e.beta());
            let _ = writeln!(out, "theta1 = {}", e.theta1());
            let _ = writeln!(out, "theta2 = {}", e.theta2());
            if let Some(se) = &fit.std_errors {
                for (name, v) in ["phi", "p", "beta", "theta1", "theta2"].iter().zip(se) {
                    let _ = writeln!(out, "se_{name} = {v}");
                }
            }
            let _ = writeln!(out, "loglik = {}", fit.loglik);
            let _ = writeln!(out, "aic = {}", fit.criteria.aic);
            let _ = writeln!(out, "bic = {}", fit.criteria.bic);
            let _ = writeln!(out, "hqic = {}", fit.criteria.hqic);
            let _ = writeln!(out, "converged = {}", fit.converged);
            let _ = writeln!(out, "iterations = {}", fit.iterations);
            let _ = writeln!(out, "phi_clamped = {}", fit.phi_clamped);
            out
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "model mesinar, method {}, n = {n} ({} transitions)", fit.method, fit.n_used);
            let _ = writeln!(out, "delta (detected): {}", delta_i(fit.delta_used));
            let se = fit.std_errors;
            let names = ["phi", "p", "beta", "theta1", "theta2"];
            let vals = e.as_array();
            let _ = writeln!(out, "  parameter   estimate      std.err");
            for j in 0..5 {
                match se {
                    Some(s) => {
                        let _ = writeln!(out, "  {:<10}  {:>10.4}  {:>10.4}", names[j], vals[j], s[j]);
                    }
                    None => {
                        let _ = writeln!(out, "  {:<10}  {:>10.4}            ", names[j], vals[j]);
                    }
                }
            }
            let _ = writeln!(out, "  signed p (delta*p): {:.4}", signed_p);
            if fit.phi_clamped {
                let _ = writeln!(out, "  warning: phi estimate clamped into [0, 1]");
            }
            let _ = writeln!(out, "log-likelihood  {:.4}", fit.loglik);
            let _ = writeln!(
                out,
                "AIC {:.4}  BIC {:.4}  HQIC {:.4}",
                fit.criteria.aic, fit.criteria.bic, fit.criteria.hqic
            );
            let _ = writeln!(
                out,
                "converged: {} after {} iterations",
                fit.converged, fit.iterations
            );
            out
        }
    }
}

pub fn render_pdinar_fit(fit: &PdinarFit, n: usize, format: Format) -> String {
    let signed_alpha = fit.delta.as_f64() * fit.alpha;
    match format {
        Format::Machine => {
            let mut out = String::new();
            let _ = writeln!(out, "model = \"pdinar\"");
            let _ = writeln!(out, "method = \"cml\"");
            let _ = writeln!(out, "n = {n}");
            let _ = writeln!(out, "n_used = {}", fit.n_used);
            let _ = writeln!(out, "delta = {}", delta_i(fit.delta));
            let _ = writeln!(out, "alpha = {}", fit.alpha);
            let _ = writeln!(out, "signed_alpha = {signed_alpha}");
            let _ = writeln!(out, "theta1 = {}", fit.theta1);
            let _ = writeln!(out, "theta2 = {}", fit.theta2);
            let _ = writeln!(out, "loglik = {}", fit.loglik);
            let _ = writeln!(out, "aic = {}", fit.criteria.aic);
            let _ = writeln!(out, "bic = {}", fit.criteria.bic);
            let _ = writeln!(out, "hqic = {}", fit.criteria.hqic);
            let _ = writeln!(out, "converged = {}", fit.converged);
            let _ = writeln!(out, "iterations = {}", fit.iterations);
            out
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "model pdinar, method cml, n = {n} ({} transitions)", fit.n_used);
            let _ = writeln!(out, "delta (detected): {}", delta_i(fit.delta));
            let _ = writeln!(out, "  alpha    {:>10.4}   (signed: {:.4})", fit.alpha, signed_alpha);
            let _ = writeln!(out, "  theta1   {:>10.4}", fit.theta1);
            let _ = writeln!(out, "  theta2   {:>10.4}", fit.theta2);
            let _ = writeln!(out, "log-likelihood  {:.4}", fit.loglik);
            let _ = writeln!(
                out,
                "AIC {:.4}  BIC {:.4}  HQIC {:.4}",
                fit.criteria.aic, fit.criteria.bic, fit.criteria.hqic
            );
            let _ = writeln!(
                out,
                "converged: {} after {} iterations",
                fit.converged, fit.iterations
            );
            out
        }
    }
}

/// One comparison row per fitted model, already sorted ascending by AIC.
pub struct CompareRow {
    pub model: &'static str,
    pub aic: f64,
    pub bic: f64,
    pub hqic: f64,
    pub loglik: f64,
}

pub fn render_compare(rows: &[CompareRow], format: Format) -> String {
    match format {
        Format::Machine => {
            let mut out = String::new();
            let ranking: Vec<&str> = rows.iter().map(|r| r.model).collect();
            let _ = writeln!(out, "ranking = \"{}\"", ranking.join(","));
            for r in rows {
                let _ = writeln!(out, "{}_aic = {}", r.model, r.aic);
                let _ = writeln!(out, "{}_bic = {}", r.model, r.bic);
                let _ = writeln!(out, "{}_hqic = {}", r.model, r.hqic);
                let _ = writeln!(out, "{}_loglik = {}", r.model, r.loglik);
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<10}  {:>12}  {:>12}  {:>12}  {:>14}",
                "model", "AIC", "BIC", "HQIC", "log-likelihood"
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:<10}  {:>12.4}  {:>12.4}  {:>12.4}  {:>14.4}",
                    r.model, r.aic, r.bic, r.hqic, r.loglik
                );
            }
            let _ = writeln!(out, "(smaller is better)");
            out
        }
    }
}

pub fn render_mc_report(config: &McConfig, report: &McReport, format: Format) -> String {
    match format {
        Format::Machine => {
            let mut out = String::new();
            let t = &config.truth;
            let _ = writeln!(out, "seed = {}", config.seed);
            let _ = writeln!(out, "replications = {}", config.replications);
            let _ = writeln!(out, "burn_in = {}", config.burn_in);
            let _ = writeln!(
                out,
                "truth = \"phi={} p={} beta={} theta1={} theta2={} delta={}\"",
                t.phi(),
                t.p(),
                t.beta(),
                t.theta1(),
                t.theta2(),
                t.delta().value()
            );
            for cell in &report.cells {
                let tag = format!("{}_{}", cell.method, cell.n);
                for s in &cell.stats {
                    let name = s.name.replace('-', "_minus_");
                    let _ = writeln!(out, "{tag}_{name}_mean = {}", s.mean);
                    let _ = writeln!(out, "{tag}_{name}_mse = {}", s.mse);
                }
                let _ = writeln!(out, "{tag}_converged = {}", cell.converged);
                let _ = writeln!(out, "{tag}_failures = {}", cell.failures);
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            let t = &config.truth;
            let _ = writeln!(
                out,
                "truth: phi={} p={} beta={:.6} theta1={} theta2={} delta={}   ({} replications, burn-in {})",
                t.phi(),
                t.p(),
                t.beta(),
                t.theta1(),
                t.theta2(),
                t.delta().value(),
                config.replications,
                config.burn_in
            );
            let mut last_method = None;
            for cell in &report.cells {
                if last_method != Some(cell.method) {
                    let _ = writeln!(out, "method {}", cell.method);
                    let header: Vec<String> =
                        cell.stats.iter().map(|s| format!("{:>14}", s.name)).collect();
                    let _ = writeln!(out, "  {:>6}{}", "n", header.join(""));
                    last_method = Some(cell.method);
                }
                let means: Vec<String> =
                    cell.stats.iter().map(|s| format!("{:>14.4}", s.mean)).collect();
                let _ = writeln!(out, "  {:>6}{}", cell.n, means.join(""));
                let mses: Vec<String> =
                    cell.stats.iter().map(|s| format!("{:>14.4}", s.mse)).collect();
                let _ = writeln!(out, "  {:>6}{}", "MSE", mses.join(""));
                if cell.failures > 0 {
                    let _ = writeln!(
                        out,
                        "  ({} of {} replications failed to converge and were excluded)",
                        cell.failures, config.replications
                    );
                }
            }
            out
        }
    }
}
