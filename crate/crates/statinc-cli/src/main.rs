//! Batch front end: one JSON config in, one JSON report (and optional CSV
//! grids) out.
//!
//! Exit codes: 0 success, 2 validation, 3 numerical failure, 4 I/O. On
//! failure a machine-readable error block is printed to stdout.

mod config;
mod report;
mod series;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use statinc::interpolate::{self, ObservationSeries};
use statinc::minimax::{self, LeastFavorablePair};
use statinc::oracle;
use statinc::InterpolationSolution;

use config::{RunConfig, Task};
use report::{
    rational_string, render, weight_map, weight_rationals, REPORT_SCHEMA_VERSION,
};

#[derive(Parser, Debug)]
#[command(
    name = "statinc",
    about = "Mean-square optimal gap interpolation for sequences with stationary increments, \
             with minimax-robust variants",
    version
)]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Optional `t,value` CSV of observations (gap rows absent).
    #[arg(long)]
    series: Option<PathBuf>,
    /// Output directory for the report and grids.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also emit plot-ready CSV grids (densities, characteristic).
    #[arg(long)]
    grid_out: bool,
    /// Print progress information to stderr.
    #[arg(long)]
    verbose: bool,
}

enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

fn classify(err: anyhow::Error) -> CliError {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<statinc::Error>() {
            return match e {
                statinc::Error::InvalidSpec(_)
                | statinc::Error::DimensionMismatch { .. }
                | statinc::Error::InvalidDensity(_)
                | statinc::Error::MissingObservation { .. }
                | statinc::Error::ConstraintInfeasible(_) => {
                    CliError::Validation(format!("{err:#}"))
                }
                _ => CliError::Numerical(format!("{err:#}")),
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return CliError::Io(format!("{err:#}"));
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return CliError::Validation(format!("{err:#}"));
        }
    }
    CliError::Validation(format!("{err:#}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let block = json!({
                "error": {
                    "code": err.code(),
                    "kind": err.kind(),
                    "message": err.message(),
                }
            });
            print!("{}", render(&block));
            eprintln!("statinc: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", cli.config.display())))?;
    let cfg = RunConfig::parse(&text).map_err(classify)?;

    let series = match &cli.series {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            let spec = cfg.spec().map_err(classify)?;
            Some(series::parse_series(&body, &spec).map_err(classify)?)
        }
        None => None,
    };

    if cli.verbose {
        eprintln!("statinc: task {}", cfg.task.name());
    }

    let mut grids: Vec<(String, String)> = Vec::new();
    let results = dispatch(&cfg, series.as_ref(), cli.grid_out, &mut grids).map_err(classify)?;

    let document = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "task": cfg.task.name(),
        "config": serde_json::to_value(&cfg).map_err(|e| CliError::Validation(e.to_string()))?,
        "results": results,
    });

    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", cli.out.display())))?;
    let report_path = cli.out.join("report.json");
    write_file(&report_path, &render(&document))?;
    if cli.verbose {
        eprintln!("statinc: wrote {}", report_path.display());
    }
    for (name, body) in grids {
        let path = cli.out.join(name);
        write_file(&path, &body)?;
        if cli.verbose {
            eprintln!("statinc: wrote {}", path.display());
        }
    }
    Ok(())
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn dispatch(
    cfg: &RunConfig,
    series: Option<&ObservationSeries>,
    grid_out: bool,
    grids: &mut Vec<(String, String)>,
) -> anyhow::Result<Value> {
    let spec = cfg.spec()?;
    match cfg.task {
        Task::Interpolate | Task::Cointegrate => {
            let model = cfg.model(&spec)?;
            let functional = cfg.functional(&spec)?;
            let sol = interpolate::solve(&model, &functional, &cfg.solve_options())?;
            if grid_out {
                grids.push((
                    String::from("characteristic.csv"),
                    series::characteristic_grid_csv(&sol, cfg.options.grid_export)?,
                ));
            }
            solution_report(&sol, cfg, series)
        }
        Task::Point => {
            let model = cfg.model(&spec)?;
            let p = cfg
                .point_index
                .ok_or_else(|| anyhow::anyhow!("task point requires `point_index`"))?;
            let sol = interpolate::solve_point(&model, p, &cfg.solve_options())?;
            if grid_out {
                grids.push((
                    String::from("characteristic.csv"),
                    series::characteristic_grid_csv(&sol, cfg.options.grid_export)?,
                ));
            }
            let mut value = solution_report(&sol, cfg, series)?;
            value["point_index"] = json!(p);
            Ok(value)
        }
        Task::Verify => {
            let model = cfg.model(&spec)?;
            let functional = cfg.functional(&spec)?;
            let opts = cfg.solve_options();
            let sol = interpolate::solve(&model, &functional, &opts)?;
            let proj = oracle::project(&model, &functional, cfg.options.oracle_window, &opts.quad)?;

            let mut weight_delta_sup = 0.0f64;
            let keys: std::collections::BTreeSet<i64> = sol
                .increment_weights()
                .keys()
                .chain(proj.weights.keys())
                .copied()
                .collect();
            for k in keys {
                let a = sol.increment_weights().get(&k).copied().unwrap_or(0.0);
                let b = proj.weights.get(&k).copied().unwrap_or(0.0);
                weight_delta_sup = weight_delta_sup.max((a - b).abs());
            }
            let mse_delta = (sol.mse() - proj.mse).abs();
            let tol = cfg.options.tol;

            let mut value = solution_report(&sol, cfg, series)?;
            value["oracle"] = json!({
                "window": proj.window,
                "mse": proj.mse,
                "mse_rational": rational_string(proj.mse),
                "target_variance": proj.target_variance,
                "weights": weight_map(&proj.weights),
            });
            value["weight_delta_sup"] = json!(weight_delta_sup);
            value["mse_delta"] = json!(mse_delta);
            value["consistent"] = json!(weight_delta_sup < tol && mse_delta < tol * (1.0 + sol.mse()));
            Ok(value)
        }
        Task::Minimax => {
            let pair = run_minimax(cfg, &spec)?;
            if grid_out {
                grids.push((
                    String::from("least_favorable.csv"),
                    series::least_favorable_csv(&pair)?,
                ));
                grids.push((
                    String::from("characteristic.csv"),
                    series::characteristic_grid_csv(
                        &pair.robust_solution,
                        cfg.options.grid_export,
                    )?,
                ));
            }
            minimax_report(&pair)
        }
        Task::VerifySaddle => {
            let (class, cointegrated, beta) = cfg.density_class(&spec)?;
            let functional = cfg.functional(&spec)?;
            let opts = cfg.minimax_options();
            let pair = if cointegrated {
                minimax::least_favorable_cointegrated(&class, &spec, &functional, beta, &opts)?
            } else {
                minimax::least_favorable(&class, &spec, &functional, &opts)?
            };
            let saddle =
                minimax::verify_saddle(&pair, &class, cfg.options.samples, cfg.options.seed)?;
            let mut value = minimax_report(&pair)?;
            value["saddle"] = json!({
                "samples": saddle.samples,
                "delta_at_pair": saddle.delta_at_pair,
                "max_violation": saddle.max_violation,
                "violations": saddle.violations,
                "residual_sup": saddle.residual_sup,
                "membership_failures": saddle.membership_failures,
            });
            Ok(value)
        }
    }
}

fn run_minimax(cfg: &RunConfig, spec: &statinc::IncrementSpec) -> anyhow::Result<LeastFavorablePair> {
    let (class, cointegrated, beta) = cfg.density_class(spec)?;
    let functional = cfg.functional(spec)?;
    let opts = cfg.minimax_options();
    Ok(if cointegrated {
        minimax::least_favorable_cointegrated(&class, spec, &functional, beta, &opts)?
    } else {
        minimax::least_favorable(&class, spec, &functional, &opts)?
    })
}

fn solution_report(
    sol: &InterpolationSolution,
    cfg: &RunConfig,
    series: Option<&ObservationSeries>,
) -> anyhow::Result<Value> {
    let coefficients: Vec<f64> = sol.coefficients().to_vec();
    let coeff_rationals: BTreeMap<i64, f64> = coefficients
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as i64, v))
        .collect();
    let mse = sol.mse();
    let mse_frequency = sol.mse_frequency()?;
    let time_domain = sol.time_domain_weights();

    let mut value = json!({
        "coefficients": coefficients,
        "coefficients_rational": weight_rationals(&coeff_rationals),
        "increment_weights": weight_map(sol.increment_weights()),
        "increment_weights_rational": weight_rationals(sol.increment_weights()),
        "boundary_weights": weight_map(sol.boundary_weights()),
        "time_domain_weights": weight_map(&time_domain),
        "time_domain_weights_rational": weight_rationals(&time_domain),
        "mse": mse,
        "mse_rational": rational_string(mse),
        "mse_frequency": mse_frequency,
        "mse_route_delta": (mse - mse_frequency).abs(),
        "solve_residual": sol.solve_residual(),
        "orthogonality_sup": sol.orthogonality_sup(),
        "minimality_integral": sol.matrices().minimality().integral,
    });

    if let Some(series) = series {
        let estimate = sol.estimate(series)?;
        value["estimate"] = json!(estimate);
        if let Some(r) = rational_string(estimate) {
            value["estimate_rational"] = json!(r);
        }
    }

    if let Some(reference) = cfg.reference_mse {
        let delta = (mse - reference).abs();
        let consistent = delta <= cfg.options.tol * (1.0 + mse);
        value["reference_mse"] = json!(reference);
        value["reference_mse_delta"] = json!(delta);
        value["reference_mse_consistent"] = json!(consistent);
        if !consistent {
            value["notes"] = json!([format!(
                "computed mean-square error {} disagrees with the quoted reference {}; \
                 the quadratic-form, frequency-integral and projection routes agree on \
                 the computed value",
                report::fmt_f64(mse),
                report::fmt_f64(reference)
            )]);
        }
    }

    Ok(value)
}

fn minimax_report(pair: &LeastFavorablePair) -> anyhow::Result<Value> {
    Ok(json!({
        "converged": pair.converged,
        "iterations": pair.iterations,
        "objective": pair.objective,
        "alpha1": pair.alpha1,
        "alpha2": pair.alpha2,
        "cointegrated": pair.cointegrated,
        "beta": pair.beta,
        "residuals": {
            "relation_f": pair.residuals.relation_f,
            "relation_g": pair.residuals.relation_g,
            "constraint_f": pair.residuals.constraint_f,
            "constraint_g": pair.residuals.constraint_g,
            "sup": pair.residuals.sup(),
        },
        "boundary_active": pair.boundary_active,
        "h_sup": [pair.h_sup.0, pair.h_sup.1],
        "robust_mse": pair.robust_solution.mse(),
        "grid": pair.options().grid,
    }))
}
