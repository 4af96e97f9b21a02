use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ellric::doc::{DocError, ProblemDocument};
use ellric::expr::{parse_complex, parse_list};
use ellric::{
    classify_document, format_complex, parse_seed, resolve_seed, riccati_document, selftest, RunError, SEED_ENV,
};
use ellric_core::lattice::{torsion_order, TOL_LAT};
use ellric_core::special::{invariants, theta, theta_k, wp, wp_k, wp_k_prime, wp_prime};
use ellric_core::{EvalConfig, LatticeSpec, C64};

/// Difference Galois groups of second-order equations with elliptic coefficients.
#[derive(Parser)]
#[command(name = "ellric", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an equation and print or write its verdict document.
    Classify(ProblemArgs),
    /// Run one Riccati pass and print its outcome document.
    Riccati {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Solve the imprimitivity equation instead of the first one.
        #[arg(long)]
        imprimitivity: bool,
    },
    /// Evaluate theta, theta_k, wp, wp_prime, wp_k, wp_k_prime or invariants.
    Eval {
        function: String,
        /// Argument, e.g. `0.3+0.1i` or `(1+tau)/2`; ignored by `invariants`.
        #[arg(default_value = "0", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value = "i")]
        tau: String,
        /// Level k of the lattice kΛ used by theta_k, wp_k and wp_k_prime.
        #[arg(long, default_value_t = 1)]
        level: u32,
    },
    /// Smallest n ≤ nmax with n·h in Λ.
    Torsion {
        #[arg(allow_hyphen_values = true)]
        h: String,
        #[arg(long, default_value = "i")]
        tau: String,
        #[arg(long, default_value_t = 64)]
        nmax: u32,
    },
    /// Run the built-in acceptance criteria.
    Selftest {
        #[arg(long, value_parser = seed_arg)]
        seed: Option<u64>,
        /// Comma-separated criterion ids; all of them by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem document; `-` reads standard input.
    #[arg(required_unless_present_any = ["lame", "family7"], conflicts_with_all = ["lame", "family7"])]
    file: Option<PathBuf>,
    /// Δ_h²y = (A℘ + B)y, given as `A,B,h`.
    #[arg(long, value_name = "A,B,h", conflicts_with = "family7", allow_hyphen_values = true)]
    lame: Option<String>,
    /// a = α℘ + β with constant b, given as `b,alpha,beta,h`.
    #[arg(long, value_name = "b,alpha,beta,h", allow_hyphen_values = true)]
    family7: Option<String>,
    /// Period ratio for the helper flags.
    #[arg(long, default_value = "i")]
    tau: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the document seed and ELLRIC_SEED.
    #[arg(long, value_parser = seed_arg)]
    seed: Option<u64>,
}

fn seed_arg(s: &str) -> Result<u64, String> {
    parse_seed(s).ok_or_else(|| format!("`{s}` is not an unsigned 64-bit integer"))
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error(transparent)]
    Expr(#[from] ellric::expr::ExprError),
    #[error(transparent)]
    Core(#[from] ellric_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for unresolved verdicts.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Classify(args) => {
            let (doc, seed) = load(&args)?;
            let verdict = classify_document(&doc, seed)?;
            emit(&args, &verdict.to_json())?;
            eprintln!("{}", verdict.group_rendering);
            Ok(definite(verdict.is_definite()))
        }
        Command::Riccati { problem, imprimitivity } => {
            let (doc, seed) = load(&problem)?;
            let out = riccati_document(&doc, seed, imprimitivity)?;
            emit(&problem, &out.to_json())?;
            eprintln!("{}", out.outcome.tag);
            Ok(definite(out.outcome.tag != "inconclusive"))
        }
        Command::Eval { function, z, tau, level } => {
            let tau = parse_complex(&tau, C64::new(0.0, 1.0))?;
            let base = LatticeSpec::unit(tau)?;
            let lk = LatticeSpec::new(tau, level)?;
            let z = parse_complex(&z, tau)?;
            let cfg = EvalConfig::default();
            let value = match function.as_str() {
                "theta" => theta(z, &base, &cfg)?,
                "theta_k" => theta_k(z, &lk, &cfg)?,
                "wp" => wp(z, &base, &cfg)?,
                "wp_prime" => wp_prime(z, &base, &cfg)?,
                "wp_k" => wp_k(z, &lk, &cfg)?,
                "wp_k_prime" => wp_k_prime(z, &lk, &cfg)?,
                "invariants" => {
                    let (g2, g3) = invariants(&base, &cfg)?;
                    println!("g2 = {}", format_complex(g2));
                    println!("g3 = {}", format_complex(g3));
                    return Ok(ExitCode::SUCCESS);
                }
                other => return Err(CliError::Usage(format!("unknown function `{other}`"))),
            };
            println!("{}", format_complex(value));
            Ok(ExitCode::SUCCESS)
        }
        Command::Torsion { h, tau, nmax } => {
            let tau = parse_complex(&tau, C64::new(0.0, 1.0))?;
            let lattice = LatticeSpec::unit(tau)?;
            let h = parse_complex(&h, tau)?;
            match torsion_order(h, &lattice, nmax, TOL_LAT) {
                Some(n) => println!("{n}"),
                None => println!("none up to {nmax}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { seed, only } => {
            let seed = match (seed, std::env::var(SEED_ENV).ok()) {
                (Some(s), _) => s,
                (None, Some(v)) => seed_arg(&v).map_err(CliError::Usage)?,
                (None, None) => ellric::default_seed(),
            };
            let reports = selftest::run(seed, |id| only.is_empty() || only.contains(&id), |r| println!("{}", r.line()));
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} passed, {failed} failed", reports.len() - failed);
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn definite(yes: bool) -> ExitCode {
    if yes {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn load(args: &ProblemArgs) -> Result<(ProblemDocument, u64), CliError> {
    let tau = parse_complex(&args.tau, C64::new(0.0, 1.0))?;
    let doc = if let Some(spec) = &args.lame {
        let v = parse_list(spec, tau)?;
        let [a, b, h] = v[..] else {
            return Err(CliError::Usage(format!("--lame expects A,B,h; got {} values", v.len())));
        };
        ProblemDocument::lame(a, b, h, tau)?
    } else if let Some(spec) = &args.family7 {
        let v = parse_list(spec, tau)?;
        let [b, alpha, beta, h] = v[..] else {
            return Err(CliError::Usage(format!("--family7 expects b,alpha,beta,h; got {} values", v.len())));
        };
        ProblemDocument::family7(b, alpha, beta, h, tau)?
    } else {
        let path = args.file.as_ref().expect("clap requires a file without helper flags");
        let text = read_input(path)?;
        ProblemDocument::parse(&text).map_err(|e| match e {
            DocError::Json(m) => DocError::Json(format!("{}: {m}", path.display())),
            other => other,
        })?
    };
    let env = std::env::var(SEED_ENV).ok();
    let seed = resolve_seed(args.seed, &doc, env.as_deref())?;
    Ok((doc, seed))
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let io = |source| CliError::Io { path: path.display().to_string(), source };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(io)
    }
}

fn emit(args: &ProblemArgs, json: &str) -> Result<(), CliError> {
    match &args.out {
        Some(path) => fs::write(path, json).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}
