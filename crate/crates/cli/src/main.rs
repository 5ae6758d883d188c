//! `treecum`: forward maps, parameter recovery and fiber analysis from the
//! command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use thiserror::Error;

use treecum::fiber::{analyze_fiber, classify_fiber, covariance_summary, local_sign_switch, FiberError};
use treecum::io::{fiber_json, forward_json, table_csv, DataFile, IoError, ParamFile, Parameters};
use treecum::moments::{kappa_to_rho, lambda_to_mu, mu_to_kappa, p_to_lambda, MomentError};
use treecum::newick::{parse_newick, NewickError};
use treecum::params::{model_forward, theta_to_omega, ParamError};
use treecum::selftest::{run_all, run_suite, SelftestConfig, SelftestError};
use treecum::tolerance::Tolerances;
use treecum::tree::TreeTopology;

#[derive(Debug, Parser)]
#[command(name = "treecum", version, about = "Tree cumulants and fibers of binary latent tree models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Chart {
    Theta,
    Omega,
    Rho,
}

impl Chart {
    fn name(self) -> &'static str {
        match self {
            Chart::Theta => "theta",
            Chart::Omega => "omega",
            Chart::Rho => "rho",
        }
    }
}

#[derive(Debug, clap::Args)]
struct TreeArgs {
    /// Newick string, or a path to a file holding one.
    #[arg(long)]
    tree: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Leaf distribution, moments, tree cumulants and correlations of a parameter file.
    Forward {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        params: PathBuf,
        /// Expected chart of the parameter file.
        #[arg(long, value_enum)]
        chart: Option<Chart>,
        /// JSON output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the table as CSV (pattern, subset, p, lambda, kappa).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Decimals in the CSV table.
        #[arg(long, default_value_t = 4)]
        precision: usize,
    },
    /// Full fiber report, with every parameter point when the fiber is finite.
    Recover {
        #[command(flatten)]
        tree: TreeArgs,
        /// Data file: probabilities, central moments or tree cumulants.
        #[arg(long, alias = "params")]
        data: PathBuf,
        /// Covariances below this magnitude count as zero.
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Decimals in the summary printed to stderr.
        #[arg(long, default_value_t = 6)]
        precision: usize,
    },
    /// Classification of the fiber from the zero pattern alone.
    Fiber {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, alias = "params")]
        data: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Applies local sign switches at the named inner nodes, in order.
    Switch {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_enum)]
        chart: Option<Chart>,
        /// Inner node to switch; repeat for several.
        #[arg(long = "node", required = true)]
        nodes: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the built-in fixture and property suites.
    Selftest {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Random cases per randomized check.
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    OffModel(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::OffModel(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

macro_rules! input_errors {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        })*
    };
}

input_errors!(IoError, NewickError, ParamError, MomentError, SelftestError);

impl From<FiberError> for CliError {
    fn from(e: FiberError) -> Self {
        if e.is_off_model() {
            CliError::OffModel(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_json(out: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    write_output(out, &text)
}

/// Inline Newick, or the contents of a file when the argument names one.
fn tree_arg(args: &TreeArgs) -> Result<Option<TreeTopology>, CliError> {
    let Some(text) = &args.tree else {
        return Ok(None);
    };
    let path = Path::new(text);
    let source = if !text.trim_end().ends_with(';') && path.is_file() {
        read(path)?
    } else {
        text.clone()
    };
    Ok(Some(parse_newick(source.trim())?))
}

fn load_params(tree: &TreeArgs, params: &Path, chart: Option<Chart>) -> Result<Parameters, CliError> {
    let file = ParamFile::from_json(&read(params)?)?;
    if let Some(c) = chart {
        if c.name() != file.chart() {
            return Err(CliError::Input(format!(
                "--chart {} given but the file is in the {} chart",
                c.name(),
                file.chart()
            )));
        }
    }
    Ok(file.resolve(tree_arg(tree)?.as_ref())?)
}

fn load_data(tree: &TreeArgs, data: &Path) -> Result<(TreeTopology, treecum::moments::CentralMoments), CliError> {
    let file = DataFile::from_json(&read(data)?)?;
    let tree = treecum::io::resolve_tree(file.tree_text(), tree_arg(tree)?.as_ref())?;
    let m = file.central_moments(&tree)?;
    Ok((tree, m))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let tol = Tolerances::default();
    match cli.command {
        Command::Forward {
            tree,
            params,
            chart,
            out,
            csv,
            precision,
        } => {
            let theta = load_params(&tree, &params, chart)?.to_theta(tol.constraint)?;
            let violations = treecum::params::check_theta(&theta, tol.constraint);
            if !violations.is_empty() {
                return Err(ParamError::Constraint(violations).into());
            }
            let t = theta.tree();
            let p = model_forward(&theta)?;
            let lambda = p_to_lambda(&p);
            let mu = lambda_to_mu(&lambda);
            let kappa = mu_to_kappa(t, &mu)?;
            let rho = kappa_to_rho(&kappa).ok();
            write_json(out.as_deref(), &forward_json(t, &p, &lambda, &mu, &kappa, rho.as_ref()))?;
            if let Some(path) = csv {
                fs::write(&path, table_csv(&p, &lambda, &kappa, precision))
                    .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::Recover {
            tree,
            data,
            eps,
            out,
            precision,
        } => {
            let tol = check_eps(eps)?;
            let (t, m) = load_data(&tree, &data)?;
            let report = analyze_fiber(&t, &m, &tol)?;
            eprintln!("classification: {}", report.classification.tag());
            if let Some(sq) = &report.recovered {
                for v in t.nodes() {
                    if let Some(x) = sq.mu_bar_sq[v.0].filter(|_| !t.is_leaf(v)) {
                        eprintln!("  mu_bar({})^2 = {x:.precision$}", t.name(v));
                    }
                }
                for v in t.nodes() {
                    if let (Some(p), Some(x)) = (t.parent(v), sq.eta_sq[v.0]) {
                        eprintln!("  eta({},{})^2 = {x:.precision$}", t.name(p), t.name(v));
                    }
                }
            }
            if !report.points.is_empty() {
                eprintln!("points: {}", report.points.len());
            }
            write_json(out.as_deref(), &fiber_json(&report, tol.constraint))
        }
        Command::Fiber { tree, data, eps, out } => {
            let tol = check_eps(eps)?;
            let (t, m) = load_data(&tree, &data)?;
            let report = classify_fiber(&t, &covariance_summary(&m, tol.zero_eps))?;
            eprintln!("classification: {}", report.classification.tag());
            write_json(out.as_deref(), &fiber_json(&report, tol.constraint))
        }
        Command::Switch {
            tree,
            params,
            chart,
            nodes,
            out,
        } => {
            let mut omega = match load_params(&tree, &params, chart)? {
                Parameters::Omega(o) => o,
                other => theta_to_omega(&other.to_theta(tol.constraint)?),
            };
            for name in &nodes {
                let v = omega.tree().resolve(name).map_err(|e| CliError::Input(e.to_string()))?;
                omega = local_sign_switch(&omega, v)?;
            }
            write_output(out.as_deref(), &ParamFile::from_omega(&omega).to_json())
        }
        Command::Selftest { suite, seed, cases } => {
            let config = SelftestConfig { seed, cases };
            let reports = match suite {
                Some(name) => vec![run_suite(&name, config)?],
                None => run_all(config),
            };
            let mut failed = 0;
            for r in &reports {
                println!(
                    "{:<12} {:>6} passed {:>4} failed",
                    r.name,
                    r.passed,
                    r.failures.len()
                );
                for f in &r.failures {
                    println!("    {f}");
                }
                failed += r.failures.len();
            }
            if failed > 0 {
                return Err(CliError::Internal(format!("{failed} self-test checks failed")));
            }
            Ok(())
        }
    }
}

fn check_eps(eps: f64) -> Result<Tolerances, CliError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CliError::Input(format!("--eps must be positive, got {eps}")));
    }
    Ok(Tolerances::default().with_zero_eps(eps))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
