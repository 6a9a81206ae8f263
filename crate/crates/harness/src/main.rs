use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use laminar_core::forest::check_directed;
use laminar_core::models::{
    load_model, random_ultrametric, save_model, to_json, Model, OrderModel,
};
use laminar_harness::growth::{
    run_growth, ExperimentConfig, ModelSpec, DEFAULT_BRANCHING, DEFAULT_TOL, DEFAULT_TRIALS,
};
use laminar_harness::{demo, lemmas, HarnessError};
use serde_json::json;

/// Directed set systems, type counting and growth-exponent experiments.
///
/// Exit codes: 0 pass, 1 failed check, 2 usage or I/O error, 3 resource cap
/// exceeded. `LAMINAR_VC_THREADS` caps the worker threads.
#[derive(Parser, Debug)]
#[command(name = "laminar-vc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a model's designated family is directed.
    CheckDirected {
        /// Model file (`.model.json`).
        #[arg(long)]
        model: PathBuf,
    },
    /// Run the seeded property suites.
    VerifyLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trials per suite; defaults to each suite's own count.
        #[arg(long)]
        trials: Option<usize>,
        /// Check determination on every small dense-order configuration
        /// instead of random ones.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        json: bool,
    },
    /// Realized type counts over growing parameter sets and their fitted
    /// exponent.
    Growth {
        /// Model file; without it a random ultrametric model is generated.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 1)]
        arity: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// CSV output path; without it the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluation cap per type-space computation.
        #[arg(long, default_value_t = laminar_core::types::DEFAULT_EVAL_CAP)]
        cap: u64,
        /// Leaves of the generated model (default: twice the largest size).
        #[arg(long)]
        leaves: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_BRANCHING)]
        branching: usize,
        /// Sample object tuples when over the cap instead of failing.
        #[arg(long)]
        sample: bool,
        /// Write 0 in the `ms` column so output is bit-identical per seed.
        #[arg(long)]
        no_timing: bool,
        /// Draw parameter tuples with replacement.
        #[arg(long)]
        allow_duplicates: bool,
        #[arg(long)]
        json: bool,
    },
    /// Incremental-count pipeline on the built-in dense-order instance.
    FullvcminDemo {
        /// Size of the parameter set: 4, 8 or 16.
        #[arg(long = "b-size")]
        b_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Write a model file.
    GenModel {
        #[arg(long, value_enum, default_value_t = ModelKind::Ultrametric)]
        kind: ModelKind,
        #[arg(long, default_value_t = 16)]
        leaves: usize,
        #[arg(long, default_value_t = DEFAULT_BRANCHING)]
        branching: usize,
        /// Carrier size of an order model.
        #[arg(long, default_value_t = 16)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelKind {
    Ultrametric,
    Order,
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

fn check_directed_cmd(model: &Path) -> Result<i32, HarnessError> {
    let model = load_model(model)?;
    let family = model.designated_family();
    let sets = family.to_indices();
    match check_directed(family) {
        Ok(_) => {
            print_json(&json!({ "model": model.id(), "directed": true, "sets": sets.len() }));
            Ok(0)
        }
        Err(c) => {
            print_json(&json!({
                "model": model.id(),
                "directed": false,
                "witness": [c.0, c.1],
                "first": sets[c.0],
                "second": sets[c.1],
            }));
            Ok(1)
        }
    }
}

fn verify_lemmas_cmd(
    seed: u64,
    trials: Option<usize>,
    exhaustive: bool,
    as_json: bool,
) -> Result<i32, HarnessError> {
    let report = lemmas::run_all(seed, trials, exhaustive)?;
    if as_json {
        print_json(&report);
    } else {
        for l in &report.lemmas {
            println!(
                "{:<28} trials {:>5}  failures {:>3}  {}",
                l.lemma,
                l.trials,
                l.failures,
                if l.passed() { "ok" } else { "FAIL" }
            );
            if let Some(f) = &l.first_failure {
                println!("    first failure: {f}");
            }
        }
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn growth_cmd(
    config: ExperimentConfig,
    out: Option<PathBuf>,
    as_json: bool,
) -> Result<i32, HarnessError> {
    let report = run_growth(&config)?;
    match &out {
        Some(path) => {
            let file = File::create(path).map_err(io_error(path))?;
            report.write_csv(BufWriter::new(file))?;
        }
        None if !as_json => report.write_csv(io::stdout().lock())?,
        None => {}
    }
    if as_json {
        print_json(&report);
    } else {
        let mut err = io::stderr().lock();
        for f in &report.formulas {
            let exponent = f
                .median_exponent
                .map_or("n/a".to_string(), |e| format!("{e:.3}"));
            let _ = writeln!(
                err,
                "{}: median exponent {} (ceiling {:.2}) {}{}",
                f.formula,
                exponent,
                f.ceiling,
                if f.pass { "ok" } else { "FAIL" },
                if f.exhaustive {
                    ""
                } else {
                    " [sampled lower bound]"
                }
            );
        }
        if let Some(msg) = &report.resource_error {
            let _ = writeln!(err, "resource cap exceeded: {msg}");
        }
    }
    Ok(report.exit_code())
}

fn demo_cmd(b_size: usize, seed: u64, as_json: bool) -> Result<i32, HarnessError> {
    let report = demo::run_demo(b_size, seed)?;
    if as_json {
        print_json(&report);
    } else {
        print!("{}", demo::render(&report));
    }
    Ok(if report.ok { 0 } else { 1 })
}

fn gen_model_cmd(
    kind: ModelKind,
    leaves: usize,
    branching: usize,
    size: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<i32, HarnessError> {
    let model = match kind {
        ModelKind::Ultrametric => Model::Ultrametric(random_ultrametric(leaves, branching, seed)?),
        ModelKind::Order => {
            if size == 0 {
                return Err(HarnessError::Usage("order size must be positive".into()));
            }
            Model::Order(OrderModel::with_seed(size, Some(seed)))
        }
    };
    match out {
        Some(path) => save_model(&model, &path)?,
        None => print!("{}", to_json(&model)),
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::CheckDirected { model } => check_directed_cmd(&model),
        Command::VerifyLemmas {
            seed,
            trials,
            exhaustive,
            json,
        } => verify_lemmas_cmd(seed, trials, exhaustive, json),
        Command::Growth {
            model,
            formula,
            arity,
            sizes,
            trials,
            seed,
            tol,
            out,
            cap,
            leaves,
            branching,
            sample,
            no_timing,
            allow_duplicates,
            json,
        } => {
            let model = match model {
                Some(path) => ModelSpec::File(path),
                None => ModelSpec::Ultrametric {
                    leaves,
                    branching,
                    seed,
                },
            };
            let config = ExperimentConfig {
                model,
                formula,
                arity,
                sizes,
                trials,
                seed,
                cap,
                sample,
                tol,
                timing: !no_timing,
                allow_duplicates,
            };
            growth_cmd(config, out, json)
        }
        Command::FullvcminDemo { b_size, seed, json } => demo_cmd(b_size, seed, json),
        Command::GenModel {
            kind,
            leaves,
            branching,
            size,
            seed,
            out,
        } => gen_model_cmd(kind, leaves, branching, size, seed, out),
    }
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("LAMINAR_VC_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("error: LAMINAR_VC_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
