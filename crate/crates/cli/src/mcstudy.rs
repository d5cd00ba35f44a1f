//! Monte Carlo replication engine: for each sample size, simulate
//! `replications` series from the truth, fit each requested method, and
//! aggregate per-parameter means and mean squared errors.
//!
//! Each replication draws from its own counter-derived stream, so the
//! report is a pure function of the configuration regardless of how many
//! worker threads execute it. Replications that fail to converge are
//! counted and excluded from the aggregates, never imputed.

use mesinar_core::estimate::{fit_cml, fit_yw, FitOptions, Method};
use mesinar_core::model::{simulate, ModelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub truth: ModelParams,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub burn_in: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamStat {
    pub name: &'static str,
    pub mean: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McCell {
    pub n: usize,
    pub method: Method,
    pub stats: Vec<ParamStat>,
    pub converged: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub cells: Vec<McCell>,
}

impl McReport {
    pub fn cell(&self, n: usize, method: Method) -> Option<&McCell> {
        self.cells.iter().find(|c| c.n == n && c.method == method)
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for replication `rep` of sample size `n`: a counter-based
/// hash, so streams never overlap and any cell can be regenerated in
/// isolation.
pub fn replication_seed(seed: u64, n: usize, rep: usize) -> u64 {
    let mut h = mix64(seed ^ 0x9E37_79B9_7F4A_7C15);
    h = mix64(h ^ (n as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    h = mix64(h ^ (rep as u64).wrapping_mul(0x8EBC_6AF0_9C88_C6E3));
    h
}

struct RepOutcome {
    cml: Option<[f64; 5]>,
    yw: Option<[f64; 4]>,
}

const CML_NAMES: [&str; 5] = ["phi", "p", "beta", "theta1", "theta2"];
const YW_NAMES: [&str; 4] = ["phi", "theta1", "theta2", "theta1-theta2"];

pub fn run_study(config: &McConfig) -> McReport {
    let wants_cml = config.methods.contains(&Method::Cml);
    let wants_yw = config.methods.contains(&Method::Yw);
    let truth = &config.truth;
    let delta = truth.delta();
    let cml_truth = truth.as_array();
    let yw_truth = [
        truth.phi(),
        truth.theta1(),
        truth.theta2(),
        truth.theta1() - truth.theta2(),
    ];

    let mut cml_cells = Vec::new();
    let mut yw_cells = Vec::new();
    for &n in &config.sample_sizes {
        let outcomes: Vec<RepOutcome> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let stream_seed = replication_seed(config.seed, n, rep);
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
                let series = simulate(truth, n, config.burn_in, &mut rng);
                let opts = FitOptions {
                    seed: mix64(stream_seed ^ 0xA076_1D64_78BD_642F),
                    ..FitOptions::default()
                };
                // The Yule-Walker plug-ins come from this replication's CML
                // fit, so CML always runs.
                let cml = fit_cml(&series, delta, &opts).ok();
                let yw = if wants_yw {
                    cml.as_ref().and_then(|c| {
                        fit_yw(&series, c.estimates.p(), c.estimates.theta(), delta)
                            .ok()
                            .map(|f| {
                                [
                                    f.estimates.phi(),
                                    f.estimates.theta1(),
                                    f.estimates.theta2(),
                                    f.estimates.theta1() - f.estimates.theta2(),
                                ]
                            })
                    })
                } else {
                    None
                };
                RepOutcome {
                    cml: cml.map(|f| f.estimates.as_array()),
                    yw,
                }
            })
            .collect();

        if wants_cml {
            cml_cells.push(aggregate(
                n,
                Method::Cml,
                config.replications,
                outcomes.iter().filter_map(|o| o.cml.as_ref().map(|a| &a[..])),
                &cml_truth,
                &CML_NAMES,
            ));
        }
        if wants_yw {
            yw_cells.push(aggregate(
                n,
                Method::Yw,
                config.replications,
                outcomes.iter().filter_map(|o| o.yw.as_ref().map(|a| &a[..])),
                &yw_truth,
                &YW_NAMES,
            ));
        }
    }
    cml_cells.extend(yw_cells);
    McReport { cells: cml_cells }
}

fn aggregate<'a>(
    n: usize,
    method: Method,
    replications: usize,
    estimates: impl Iterator<Item = &'a [f64]>,
    truth: &[f64],
    names: &[&'static str],
) -> McCell {
    let k = truth.len();
    let mut count = 0usize;
    let mut sums = vec![0.0f64; k];
    let mut sq = vec![0.0f64; k];
    for est in estimates {
        count += 1;
        for j in 0..k {
            sums[j] += est[j];
            let d = est[j] - truth[j];
            sq[j] += d * d;
        }
    }
    let stats = (0..k)
        .map(|j| ParamStat {
            name: names[j],
            mean: if count > 0 { sums[j] / count as f64 } else { f64::NAN },
            mse: if count > 0 { sq[j] / count as f64 } else { f64::NAN },
        })
        .collect();
    McCell {
        n,
        method,
        stats,
        converged: count,
        failures: replications - count,
    }
}
