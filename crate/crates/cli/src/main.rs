mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use necks::engine::{
    concatenate, embeddedness_check, glue_phase_scan, iteration_log_csv, multi_start_balance,
    multi_start_fp, newton_balance_logged, phi_grid, rigidity_of, BalanceOutcome, GlueTemplate,
    SolveOptions,
};
use necks::forces::force_of;
use necks::poly::{
    fp_solve, heun_block_config, heun_polynomials, n1_config, ComplexPolynomial, FpOptions,
};
use necks::{Configuration, Error, ErrorClass};
use num_complex::Complex64;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "necks",
    version,
    about = "Balanced catenoid-neck configurations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Newton,
    Fp,
}

#[derive(Subcommand)]
enum Command {
    /// Force report (CSV) for a configuration.
    Force {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the balance equations starting from a configuration's nodes.
    Balance {
        seed: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Total number of starts; the first one uses the file's nodes.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        /// RNG seed for the extra starts.
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long, value_enum, default_value_t = Method::Newton)]
        method: Method,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the Newton iteration log (CSV) here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Singular values and numerical rank of the force Jacobian.
    Rigidity {
        config: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        rank_tol: f64,
    },
    /// Monotonicity of the end slopes.
    Embed { config: PathBuf },
    /// Concatenate balanced blocks in order.
    Concat {
        #[arg(required = true, num_args = 1..)]
        blocks: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The (n,1) configuration from the Jacobi polynomial 2F1(-n, b; c; z).
    Hypergeom {
        #[arg(short)]
        n: usize,
        #[arg(short, allow_negative_numbers = true)]
        b: f64,
        #[arg(short, allow_negative_numbers = true)]
        c: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Heun polynomial solutions for a (1,n,1) block.
    Heun {
        #[arg(short)]
        n: usize,
        /// Position of the bottom node.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        a: f64,
        /// Position of the top node.
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long, allow_negative_numbers = true)]
        c3: f64,
        #[arg(short, allow_negative_numbers = true)]
        b: f64,
    },
    /// Im G_2 of the two-column glue template over a phase grid (CSV).
    GlueScan {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// SVG of the nodes in the logarithmic strip.
    Plot {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        periods: u64,
    },
}

/// Failure carrying an explicit exit status.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(Exit(code, _)) = err.downcast_ref::<Exit>() {
        return *code;
    }
    match err.downcast_ref::<Error>().map(Error::class) {
        Some(ErrorClass::Precondition) => 3,
        Some(ErrorClass::Convergence) => 4,
        _ => 2,
    }
}

fn read_config(path: &Path) -> Result<Configuration> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let config = Configuration::from_json(&text)?;
    config.validate()?;
    Ok(config)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn config_text(config: &Configuration) -> String {
    config.to_json_pretty() + "\n"
}

fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn run_balance(
    seed: &Configuration,
    method: Method,
    seeds: usize,
    rng_seed: u64,
    fp: &FpOptions,
    options: &SolveOptions,
) -> necks::Result<BalanceOutcome> {
    let residues = seed.derive_residues()?;
    let gaps = seed.theta_gaps();
    let from_file = match method {
        Method::Newton => newton_balance_logged(seed, options),
        Method::Fp => {
            let polys: Vec<ComplexPolynomial> = seed
                .nodes
                .iter()
                .map(|l| ComplexPolynomial::from_roots(l))
                .collect();
            fp_solve(&seed.layer_sizes(), residues.interior(), &gaps, &polys, fp)
                .and_then(|sol| sol.to_configuration(residues.interior(), &gaps))
                .and_then(|cfg| newton_balance_logged(&cfg, options))
        }
    };
    if seeds <= 1 {
        return from_file;
    }
    let extra = match method {
        Method::Newton => multi_start_balance(seed, seeds - 1, rng_seed, options),
        Method::Fp => multi_start_fp(
            &seed.layer_sizes(),
            residues.interior(),
            &gaps,
            seeds - 1,
            rng_seed,
            fp,
            options,
        ),
    };
    match (from_file, extra) {
        (Ok(a), Ok(b)) => Ok(if b.best.residual < a.residual {
            b.best
        } else {
            a
        }),
        (Ok(a), Err(_)) => Ok(a),
        (Err(_), Ok(b)) => Ok(b.best),
        (Err(a), Err(b)) => Err(match (&a, &b) {
            (Error::NoConvergence(x), Error::NoConvergence(y)) if y.residual < x.residual => b,
            _ => a,
        }),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Force { config, output } => {
            let report = force_of(&read_config(&config)?)?;
            emit(output.as_deref(), &report.to_csv())
        }
        Command::Balance {
            seed,
            tol,
            max_iter,
            seeds,
            rng_seed,
            method,
            output,
            log,
        } => {
            let seed = read_config(&seed)?;
            let options = SolveOptions {
                tol,
                max_iter,
                ..SolveOptions::default()
            };
            options.validate()?;
            let fp = FpOptions {
                tol,
                max_iter,
                ..FpOptions::default()
            };
            match run_balance(&seed, method, seeds, rng_seed, &fp, &options) {
                Ok(outcome) => {
                    if let Some(path) = log {
                        emit(Some(&path), &iteration_log_csv(&outcome.log))?;
                    }
                    eprintln!(
                        "balanced: max |F| = {:.16e} after {} iterations",
                        outcome.residual, outcome.iterations
                    );
                    emit(output.as_deref(), &config_text(&outcome.config))
                }
                Err(Error::NoConvergence(stall)) => {
                    let dump = match &stall.best_config {
                        Some(best) => config_text(best),
                        None => {
                            let polys: Vec<_> =
                                stall.best_polys.iter().map(|p| p.to_document()).collect();
                            serde_json::to_string_pretty(&json!({
                                "best_polys": polys,
                                "top_coefficient": stall.top_coefficient,
                            }))? + "\n"
                        }
                    };
                    emit(output.as_deref(), &dump)?;
                    Err(Error::NoConvergence(stall).into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Rigidity { config, rank_tol } => {
            let options = SolveOptions {
                rank_rel_tol: rank_tol,
                ..SolveOptions::default()
            };
            options.validate()?;
            let report = rigidity_of(&read_config(&config)?, &options)?;
            println!("{}", report.to_json());
            Ok(())
        }
        Command::Embed { config } => {
            let report = embeddedness_check(&read_config(&config)?);
            println!("embedded: {}", report.embedded());
            println!("left_decreasing: {}", report.left_decreasing);
            println!("right_decreasing: {}", report.right_decreasing);
            if let Some(p) = report.left_violation {
                println!("left_violation: {p}");
            }
            if let Some(p) = report.right_violation {
                println!("right_violation: {p}");
            }
            Ok(())
        }
        Command::Concat { blocks, output } => {
            let blocks = blocks
                .iter()
                .map(|p| read_config(p))
                .collect::<Result<Vec<_>>>()?;
            emit(output.as_deref(), &config_text(&concatenate(&blocks)?))
        }
        Command::Hypergeom { n, b, c, output } => {
            emit(output.as_deref(), &config_text(&n1_config(n, b, c)?))
        }
        Command::Heun { n, a, s, c1, c3, b } => {
            let a = Complex64::new(a, 0.0);
            let s = Complex64::new(s, 0.0);
            let sols = heun_polynomials(n, (a, s), c1, c3, b)?;
            let solutions = sols
                .solutions
                .iter()
                .map(|cand| {
                    let config = heun_block_config(&sols.problem, &cand.poly)
                        .map(|c| serde_json::to_value(c.to_document()).expect("serializable"))
                        .unwrap_or(serde_json::Value::Null);
                    json!({
                        "t": complex_pair(cand.t),
                        "roots": cand.roots.iter().map(|&z| complex_pair(z)).collect::<Vec<_>>(),
                        "lame_residual": cand.residual.poly.max_abs_coeff() / cand.residual.scale.max(f64::MIN_POSITIVE),
                        "config": config,
                    })
                })
                .collect::<Vec<_>>();
            let dropped = sols
                .dropped
                .iter()
                .map(|(t, why)| json!({"t": complex_pair(*t), "reason": why}))
                .collect::<Vec<_>>();
            let doc = json!({
                "c": sols.problem.c(),
                "determinant": sols.determinant.coeffs().iter().map(|&z| complex_pair(z)).collect::<Vec<_>>(),
                "solutions": solutions,
                "dropped": dropped,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(())
        }
        Command::GlueScan {
            n1,
            n2,
            lambda,
            points,
        } => {
            if points < 2 {
                bail!(Exit(2, "need at least two grid points".into()));
            }
            let template = GlueTemplate::new(n1, n2)?;
            let scan = glue_phase_scan(&template, lambda, &phi_grid(points))?;
            print!("{}", scan.to_csv());
            let zeros: Vec<String> = scan.zeros.iter().map(|z| format!("{z:.16e}")).collect();
            eprintln!("mu = {}; zeros: {}", scan.mu, zeros.join(", "));
            Ok(())
        }
        Command::Plot {
            config,
            output,
            periods,
        } => {
            let config = read_config(&config)?;
            emit(Some(&output), &plot::render(&config, periods as usize))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
