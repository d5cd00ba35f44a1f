//! Flat key-value configuration files. Keys match the study and fit-option
//! field names exactly; unknown keys are rejected.

use std::path::Path;

use mesinar_core::estimate::{FitOptions, Method};
use mesinar_core::model::{ModelParams, Sign};
use serde::Deserialize;

use crate::mcstudy::McConfig;
use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct McConfigFile {
    phi: f64,
    p: f64,
    beta: f64,
    theta1: f64,
    theta2: f64,
    delta: i64,
    sample_sizes: Vec<usize>,
    replications: usize,
    seed: u64,
    methods: Vec<String>,
    #[serde(default = "default_burn_in")]
    burn_in: usize,
}

fn default_burn_in() -> usize {
    500
}

pub fn parse_method(s: &str) -> Result<Method, CliError> {
    match s {
        "cml" => Ok(Method::Cml),
        "yw" => Ok(Method::Yw),
        other => Err(CliError::input(format!(
            "unknown method `{other}` (expected `cml` or `yw`)"
        ))),
    }
}

pub fn load_mc_config(path: &Path) -> Result<McConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: McConfigFile = toml::from_str(&text)
        .map_err(|e| CliError::input(format!("`{}`: {e}", path.display())))?;
    if raw.sample_sizes.is_empty() {
        return Err(CliError::input("`sample_sizes` must be nonempty"));
    }
    if raw.replications == 0 {
        return Err(CliError::input("`replications` must be at least 1"));
    }
    if raw.methods.is_empty() {
        return Err(CliError::input("`methods` must name at least one method"));
    }
    let delta = Sign::from_i64(raw.delta).map_err(CliError::from)?;
    let truth = ModelParams::new(raw.phi, raw.p, raw.beta, raw.theta1, raw.theta2, delta)
        .map_err(CliError::from)?;
    let methods = raw
        .methods
        .iter()
        .map(|m| parse_method(m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(McConfig {
        truth,
        sample_sizes: raw.sample_sizes,
        replications: raw.replications,
        seed: raw.seed,
        methods,
        burn_in: raw.burn_in,
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitOptionsFile {
    max_iterations: Option<usize>,
    gradient_tolerance: Option<f64>,
    n_starts: Option<usize>,
    seed: Option<u64>,
}

/// Fit options from an optional config file, overridden by any explicit
/// command-line flags.
pub fn load_fit_options(
    path: Option<&Path>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    starts: Option<usize>,
    seed: Option<u64>,
) -> Result<FitOptions, CliError> {
    let from_file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            toml::from_str::<FitOptionsFile>(&text)
                .map_err(|e| CliError::input(format!("`{}`: {e}", p.display())))?
        }
        None => FitOptionsFile::default(),
    };
    let defaults = FitOptions::default();
    let opts = FitOptions {
        max_iterations: max_iter
            .or(from_file.max_iterations)
            .unwrap_or(defaults.max_iterations),
        gradient_tolerance: tol
            .or(from_file.gradient_tolerance)
            .unwrap_or(defaults.gradient_tolerance),
        n_starts: starts.or(from_file.n_starts).unwrap_or(defaults.n_starts),
        seed: seed.or(from_file.seed).unwrap_or(defaults.seed),
    };
    if opts.max_iterations == 0 {
        return Err(CliError::input("`max_iterations` must be at least 1"));
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(opts.gradient_tolerance > 0.0) {
        return Err(CliError::input("`gradient_tolerance` must be positive"));
    }
    if opts.n_starts == 0 {
        return Err(CliError::input("`n_starts` must be at least 1"));
    }
    Ok(opts)
}
