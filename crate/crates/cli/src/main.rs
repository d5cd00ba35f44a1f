use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mesinar_core::estimate::{detect_delta, fit_cml, fit_pdinar_cml, fit_yw};
use mesinar_core::model::{simulate, ModelParams, Sign};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mesinar_cli::config::{load_fit_options, load_mc_config};
use mesinar_cli::describe::summarize;
use mesinar_cli::mcstudy::run_study;
use mesinar_cli::report::{
    render_compare, render_fit, render_mc_report, render_pdinar_fit, render_summary, CompareRow,
    Format,
};
use mesinar_cli::series_io::{read_series, write_series};
use mesinar_cli::CliError;

/// Simulate, fit and compare signed integer-valued AR(1) models (Pegram
/// mixture of extended binomial thinning and Skellam innovations).
#[derive(Parser)]
#[command(name = "mesinar", version, about)]
struct Cli {
    /// Random seed for anything stochastic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output to this path instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Machine => Format::Machine,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Mesinar,
    Pdinar,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cml,
    Yw,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a series and write it as CSV (`t,z`).
    Simulate {
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        theta1: f64,
        #[arg(long)]
        theta2: f64,
        /// Sign of the autocorrelation: 1 or -1.
        #[arg(long, allow_hyphen_values = true)]
        delta: i64,
        /// Output length.
        #[arg(long)]
        n: usize,
        /// States discarded before recording.
        #[arg(long, default_value_t = 500)]
        burn_in: usize,
    },
    /// Lag-one difference of a series file.
    Diff {
        #[arg(long)]
        input: PathBuf,
    },
    /// Descriptive statistics: n, mean, variance, minimum, median, maximum, range.
    Describe {
        #[arg(long)]
        input: PathBuf,
    },
    /// Fit a model by conditional maximum likelihood (or Yule-Walker).
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Mesinar)]
        model: ModelArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Cml)]
        method: MethodArg,
        /// Optimizer iteration cap.
        #[arg(long)]
        max_iter: Option<usize>,
        /// Gradient tolerance per transition.
        #[arg(long)]
        tol: Option<f64>,
        /// Number of optimizer starts.
        #[arg(long)]
        starts: Option<usize>,
        /// Fit options file (keys: max_iterations, gradient_tolerance, n_starts, seed).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a Monte Carlo replication study from a config file.
    Mcstudy {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit several models and rank them by information criteria.
    Compare {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated list from {mesinar, pdinar}.
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, content).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let format: Format = cli.format.into();
    match cli.command {
        Command::Simulate {
            phi,
            p,
            beta,
            theta1,
            theta2,
            delta,
            n,
            burn_in,
        } => {
            if n == 0 {
                return Err(CliError::input("parameter `n` must be at least 1"));
            }
            let delta = Sign::from_i64(delta)?;
            let params = ModelParams::new(phi, p, beta, theta1, theta2, delta)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let series = simulate(&params, n, burn_in, &mut rng);
            let mut buf = Vec::new();
            write_series(&series, &mut buf).expect("in-memory write");
            emit(
                cli.output.as_deref(),
                std::str::from_utf8(&buf).expect("ascii"),
            )
        }
        Command::Diff { input } => {
            let series = read_series(&input)?;
            let diffed = series.diff()?;
            let mut buf = Vec::new();
            write_series(&diffed, &mut buf).expect("in-memory write");
            emit(
                cli.output.as_deref(),
                std::str::from_utf8(&buf).expect("ascii"),
            )
        }
        Command::Describe { input } => {
            let series = read_series(&input)?;
            let summary = summarize(&series);
            emit(cli.output.as_deref(), &render_summary(&summary, format))
        }
        Command::Fit {
            input,
            model,
            method,
            max_iter,
            tol,
            starts,
            config,
        } => {
            let series = read_series(&input)?;
            let opts = {
                let mut o =
                    load_fit_options(config.as_deref(), max_iter, tol, starts, None)?;
                o.seed = cli.seed;
                o
            };
            let delta = detect_delta(&series)?;
            let n = series.len();
            match model {
                ModelArg::Mesinar => {
                    let fit = match method {
                        MethodArg::Cml => fit_cml(&series, delta, &opts),
                        MethodArg::Yw => {
                            // Yule-Walker needs likelihood plug-ins for p and theta.
                            let pre = fit_cml(&series, delta, &opts)?;
                            fit_yw(&series, pre.estimates.p(), pre.estimates.theta(), delta)
                        }
                    };
                    match fit {
                        Ok(fit) => emit(cli.output.as_deref(), &render_fit(&fit, n, format)),
                        Err(mesinar_core::Error::FitDidNotConverge(best)) => {
                            // Still report the best point found, then fail.
                            emit(cli.output.as_deref(), &render_fit(&best, n, format))?;
                            Err(CliError::NonConvergence(
                                "no optimizer start met the gradient tolerance".into(),
                            ))
                        }
                        Err(e) => Err(e.into()),
                    }
                }
                ModelArg::Pdinar => {
                    let fit = fit_pdinar_cml(&series, delta, &opts)?;
                    emit(cli.output.as_deref(), &render_pdinar_fit(&fit, n, format))
                }
            }
        }
        Command::Mcstudy { config } => {
            let cfg = load_mc_config(&config)?;
            let report = run_study(&cfg);
            emit(
                cli.output.as_deref(),
                &render_mc_report(&cfg, &report, format),
            )
        }
        Command::Compare { input, models } => {
            if models.is_empty() {
                return Err(CliError::input(
                    "`--models` must name at least one of {mesinar, pdinar}",
                ));
            }
            let series = read_series(&input)?;
            let delta = detect_delta(&series)?;
            let opts = {
                let mut o = load_fit_options(None, None, None, None, None)?;
                o.seed = cli.seed;
                o
            };
            let mut rows = Vec::new();
            for name in &models {
                match name.as_str() {
                    "mesinar" => {
                        let fit = fit_cml(&series, delta, &opts)?;
                        rows.push(CompareRow {
                            model: "mesinar",
                            aic: fit.criteria.aic,
                            bic: fit.criteria.bic,
                            hqic: fit.criteria.hqic,
                            loglik: fit.loglik,
                        });
                    }
                    "pdinar" => {
                        let fit = fit_pdinar_cml(&series, delta, &opts)?;
                        rows.push(CompareRow {
                            model: "pdinar",
                            aic: fit.criteria.aic,
                            bic: fit.criteria.bic,
                            hqic: fit.criteria.hqic,
                            loglik: fit.loglik,
                        });
                    }
                    other => {
                        return Err(CliError::input(format!(
                            "unknown model `{other}` (expected `mesinar` or `pdinar`)"
                        )));
                    }
                }
            }
            rows.sort_by(|a, b| a.aic.total_cmp(&b.aic));
            emit(cli.output.as_deref(), &render_compare(&rows, format))
        }
    }
}
