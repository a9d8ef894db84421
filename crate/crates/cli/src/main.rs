//! Command-line front end for the multi-product pricing analysis library.
//!
//! Subcommands: `validate` an instance file, `analyze` a market end to end
//! (optionally cross-checked by the brute-force oracles), tabulate the
//! dominance `curve`, `generate` canonical instances, and `simulate`
//! decentralized learning dynamics.
//!
//! Exit codes are stable: 0 success, 1 I/O or parse failure, 2 validation
//! or specification failure, 3 oracle disagreement, 4 dynamics that did not
//! converge.

mod document;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use poa_pricing::demand::{DemandSystem, InstanceJson};
use poa_pricing::dynamics::{best_response_dynamics, eta_max, gradient_play, TrajectoryRecord};
use poa_pricing::equilibrium::{equilibrium_pair, PriceVector};
use poa_pricing::instances::{
    make_random, make_star, make_symmetric, SignMode, StarSpec, SymmetricModelSpec,
};
use poa_pricing::oracle::{oracle_centralized, oracle_nash, oracle_poa_min, OracleResult};
use poa_pricing::poa::{mu_bound, poa_report};

use document::{atomic_write, timestamp, AnalysisDocument};

/// Ascent budget for the centralized-revenue oracle.
const ORACLE_ASCENT_ITERS: usize = 5000;

#[derive(Parser)]
#[command(
    name = "poa-pricing",
    version,
    about = "Centralized vs decentralized pricing for linear multi-product demand",
    long_about = "Computes centralized optimal prices, the pricing game's unique Nash \
                  equilibrium, and the exact price of anarchy for linear multi-product \
                  demand systems with a symmetric, strictly diagonally dominant \
                  sensitivity matrix."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file against the structural assumptions.
    Validate {
        /// Instance JSON file: {"n":…, "a":[…], "b":[[…]…]}.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the full equilibrium and price-of-anarchy analysis.
    Analyze {
        /// Instance JSON file.
        #[arg(long)]
        input: PathBuf,
        /// JSON array overriding the instance's intercept vector. When
        /// absent the instance's own intercept is analyzed.
        #[arg(long)]
        intercept: Option<PathBuf>,
        /// Where to write the analysis document.
        #[arg(long)]
        output: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Also run the three brute-force oracles; exit 3 if any disagrees.
        #[arg(long)]
        verify: bool,
        /// Intercept samples for the worst-ratio oracle.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Seed for the worst-ratio oracle's sampler.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tabulate the worst-case bound 4(1-mu)/(2-mu)^2 as CSV.
    Curve {
        #[arg(long)]
        mu_min: f64,
        #[arg(long)]
        mu_max: f64,
        /// Number of evenly spaced rows (at least 2).
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate a canonical instance file.
    Generate {
        #[arg(long, value_enum)]
        model: Model,
        /// Number of products.
        #[arg(long)]
        n: usize,
        /// Pairwise interaction strength (symmetric and star models).
        #[arg(long)]
        rho: Option<f64>,
        /// Uniform intercept for the symmetric model.
        #[arg(long, default_value_t = 1.0)]
        a_scalar: f64,
        /// Target dominance parameter (random model).
        #[arg(long)]
        mu: Option<f64>,
        /// Cross-effect signs (random model).
        #[arg(long, value_enum, default_value_t = SignModeArg::Substitutes)]
        sign_mode: SignModeArg,
        /// Generator seed (random model).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the instance; the symmetric model also writes
        /// closed-form reference values next to it.
        #[arg(long)]
        output: PathBuf,
    },
    /// Simulate a decentralized learning dynamic and write its trajectory.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        /// br = simultaneous best response, gd = gradient play.
        #[arg(long, value_enum)]
        dynamic: Dynamic,
        /// Gradient-play step size; defaults to half the stability bound.
        #[arg(long)]
        eta: Option<f64>,
        /// JSON array with the starting prices; defaults to all zeros.
        #[arg(long)]
        p0: Option<PathBuf>,
        #[arg(long, default_value_t = poa_pricing::dynamics::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Stop once the max-norm step falls below this threshold.
        #[arg(long, default_value_t = poa_pricing::dynamics::DEFAULT_EPS)]
        eps: f64,
        /// Trajectory CSV destination.
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Symmetric,
    Star,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignModeArg {
    Substitutes,
    Complements,
    Mixed,
}

impl From<SignModeArg> for SignMode {
    fn from(mode: SignModeArg) -> Self {
        match mode {
            SignModeArg::Substitutes => SignMode::Substitutes,
            SignModeArg::Complements => SignMode::Complements,
            SignModeArg::Mixed => SignMode::Mixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Dynamic {
    Br,
    Gd,
}

enum CliError {
    /// Exit 1: file system or JSON syntax trouble.
    Io(String),
    /// Exit 2: a structural assumption or flag constraint failed.
    Spec(String),
    /// Exit 3: an oracle disagreed with a closed form.
    Oracle(String),
    /// Exit 4: a dynamic exhausted its iteration budget.
    NotConverged(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Spec(_) => 2,
            CliError::Oracle(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Spec(m) | CliError::Oracle(m) | CliError::NotConverged(m) => m,
        }
    }
}

impl From<poa_pricing::Error> for CliError {
    fn from(e: poa_pricing::Error) -> Self {
        CliError::Spec(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<DemandSystem, CliError> {
    let text = read_file(path)?;
    let raw: InstanceJson = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("cannot parse {}: {e}", path.display())))?;
    DemandSystem::from_instance_json(&raw).map_err(CliError::from)
}

fn load_vector(path: &Path, expected: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let text = read_file(path)?;
    let values: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("cannot parse {}: {e}", path.display())))?;
    if values.len() != expected {
        return Err(CliError::Spec(format!(
            "{what} in {} has length {}, expected {expected}",
            path.display(),
            values.len()
        )));
    }
    Ok(values)
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    atomic_write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { input } => validate(&input),
        Command::Analyze {
            input,
            intercept,
            output,
            format,
            verify,
            samples,
            seed,
        } => analyze(&input, intercept.as_deref(), &output, format, verify, samples, seed),
        Command::Curve {
            mu_min,
            mu_max,
            steps,
            output,
        } => curve(mu_min, mu_max, steps, &output),
        Command::Generate {
            model,
            n,
            rho,
            a_scalar,
            mu,
            sign_mode,
            seed,
            output,
        } => generate(model, n, rho, a_scalar, mu, sign_mode, seed, &output),
        Command::Simulate {
            input,
            dynamic,
            eta,
            p0,
            max_iters,
            eps,
            output,
        } => simulate(&input, dynamic, eta, p0.as_deref(), max_iters, eps, &output),
    }
}

fn validate(input: &Path) -> Result<(), CliError> {
    let system = load_instance(input)?;
    let profile = system.dominance_profile();
    println!(
        "valid: n={} mu={} d=[{}]",
        system.n(),
        profile.mu,
        profile
            .d
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}

fn run_oracles(system: &DemandSystem, samples: usize, seed: u64) -> Vec<OracleResult> {
    let cap = std::env::var("POA_PRICING_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(3);

    type Job<'a> = Box<dyn FnOnce() -> OracleResult + Send + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(move || oracle_centralized(system, ORACLE_ASCENT_ITERS)),
        Box::new(move || oracle_nash(system)),
        Box::new(move || oracle_poa_min(system, samples, seed)),
    ];

    let mut results = Vec::with_capacity(3);
    let mut queue = jobs.into_iter();
    loop {
        let batch: Vec<Job> = queue.by_ref().take(cap).collect();
        if batch.is_empty() {
            break;
        }
        let batch_results = std::thread::scope(|scope| {
            let handles: Vec<_> = batch.into_iter().map(|job| scope.spawn(job)).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("oracle thread panicked"))
                .collect::<Vec<_>>()
        });
        results.extend(batch_results);
    }
    results
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    input: &Path,
    intercept: Option<&Path>,
    output: &Path,
    format: Format,
    verify: bool,
    samples: usize,
    seed: u64,
) -> Result<(), CliError> {
    let loaded = load_instance(input)?;
    let system = match intercept {
        Some(path) => {
            let a = load_vector(path, loaded.n(), "intercept")?;
            if a.iter().all(|v| *v == 0.0) {
                return Err(CliError::from(poa_pricing::Error::ZeroIntercept));
            }
            loaded.with_intercept(&a)?
        }
        None => loaded,
    };

    let profile = system.dominance_profile();
    let equilibrium = equilibrium_pair(&system);
    let poa = poa_report(&system)?;
    let oracles = verify.then(|| run_oracles(&system, samples, seed));

    let document = AnalysisDocument {
        tool: "poa-pricing".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: timestamp(),
        instance_path: input.display().to_string(),
        instance: system.to_instance_json(),
        intercept: system.intercept().iter().copied().collect(),
        profile,
        equilibrium,
        poa,
        oracles,
    };

    let bytes = match format {
        Format::Json => document.to_json().into_bytes(),
        Format::Csv => document.to_csv().into_bytes(),
    };
    write_output(output, &bytes)?;
    println!(
        "analysis written to {} (mu={} poa_min={} poa_max={})",
        output.display(),
        document.poa.mu,
        document.poa.poa_min,
        document.poa.poa_max
    );

    if let Some(oracles) = &document.oracles {
        let failed: Vec<String> = oracles
            .iter()
            .filter(|o| !o.passed)
            .map(|o| format!("{:?} (discrepancy {:e})", o.quantity, o.discrepancy))
            .collect();
        if !failed.is_empty() {
            return Err(CliError::Oracle(format!(
                "oracle disagreement: {}",
                failed.join(", ")
            )));
        }
        println!("oracles: all {} passed", oracles.len());
    }
    Ok(())
}

fn curve(mu_min: f64, mu_max: f64, steps: usize, output: &Path) -> Result<(), CliError> {
    if !(0.0 <= mu_min && mu_min < mu_max && mu_max < 1.0) {
        return Err(CliError::Spec(format!(
            "need 0 <= mu_min < mu_max < 1, got [{mu_min}, {mu_max}]"
        )));
    }
    if steps < 2 {
        return Err(CliError::Spec(format!("need at least 2 steps, got {steps}")));
    }
    let mut out = String::from("mu,bound\n");
    for k in 0..steps {
        let mu = mu_min + (mu_max - mu_min) * k as f64 / (steps - 1) as f64;
        let bound = mu_bound(mu).map_err(CliError::from)?;
        out.push_str(&format!("{mu},{bound}\n"));
    }
    write_output(output, out.as_bytes())?;
    println!("curve with {steps} rows written to {}", output.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn generate(
    model: Model,
    n: usize,
    rho: Option<f64>,
    a_scalar: f64,
    mu: Option<f64>,
    sign_mode: SignModeArg,
    seed: u64,
    output: &Path,
) -> Result<(), CliError> {
    let instance_bytes = |system: &DemandSystem| {
        let mut text =
            serde_json::to_string_pretty(&system.to_instance_json()).expect("instance serializes");
        text.push('\n');
        text.into_bytes()
    };

    match model {
        Model::Symmetric => {
            let rho = rho.ok_or_else(|| {
                CliError::Spec("the symmetric model requires --rho".into())
            })?;
            let (system, reference) = make_symmetric(&SymmetricModelSpec { n, rho, a_scalar })?;
            write_output(output, &instance_bytes(&system))?;
            let mut reference_text =
                serde_json::to_string_pretty(&reference).expect("reference serializes");
            reference_text.push('\n');
            let reference_path = reference_path(output);
            write_output(&reference_path, reference_text.as_bytes())?;
            println!(
                "instance written to {}, reference to {}",
                output.display(),
                reference_path.display()
            );
        }
        Model::Star => {
            let rho =
                rho.ok_or_else(|| CliError::Spec("the star model requires --rho".into()))?;
            let system = make_star(&StarSpec { n, rho })?;
            write_output(output, &instance_bytes(&system))?;
            println!("instance written to {}", output.display());
        }
        Model::Random => {
            let mu = mu.ok_or_else(|| CliError::Spec("the random model requires --mu".into()))?;
            let system = make_random(n, mu, sign_mode.into(), seed)?;
            write_output(output, &instance_bytes(&system))?;
            println!("instance written to {}", output.display());
        }
    }
    Ok(())
}

fn reference_path(output: &Path) -> PathBuf {
    match output.extension() {
        Some(ext) => {
            let mut name = output.file_stem().unwrap_or_default().to_os_string();
            name.push(".reference.");
            name.push(ext);
            output.with_file_name(name)
        }
        None => output.with_extension("reference"),
    }
}

fn simulate(
    input: &Path,
    dynamic: Dynamic,
    eta: Option<f64>,
    p0: Option<&Path>,
    max_iters: usize,
    eps: f64,
    output: &Path,
) -> Result<(), CliError> {
    if eps <= 0.0 {
        return Err(CliError::Spec(format!("eps must be positive, got {eps}")));
    }
    let system = load_instance(input)?;
    let start = match p0 {
        Some(path) => {
            let values = load_vector(path, system.n(), "starting prices")?;
            PriceVector::new(values)?
        }
        None => PriceVector::zeros(system.n()),
    };

    let record = match dynamic {
        Dynamic::Br => best_response_dynamics(&system, &start, max_iters, eps)?,
        Dynamic::Gd => {
            let eta = eta.unwrap_or_else(|| eta_max(&system) / 2.0);
            gradient_play(&system, &start, eta, max_iters, eps)?
        }
    };

    write_output(output, trajectory_csv(&record).as_bytes())?;
    let final_dist = record.dist_to_ne.last().copied().unwrap_or(f64::NAN);
    println!(
        "steps={} final_dist_to_ne={:e} converged={}",
        record.steps, final_dist, record.converged
    );
    if !record.converged {
        return Err(CliError::NotConverged(format!(
            "dynamic did not converge within {max_iters} iterations (last step distance {final_dist:e})"
        )));
    }
    Ok(())
}

fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let n = record.iterates.first().map_or(0, |p| p.len());
    let mut out = String::from("step,dist_to_ne,revenue");
    for i in 0..n {
        out.push_str(&format!(",p_{i}"));
    }
    out.push('\n');
    for (k, p) in record.iterates.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}",
            record.step_index[k], record.dist_to_ne[k], record.revenues[k]
        ));
        for value in p.as_slice() {
            out.push_str(&format!(",{value}"));
        }
        out.push('\n');
    }
    out
}
