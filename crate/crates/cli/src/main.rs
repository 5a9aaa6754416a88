mod cache;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypergeo::Error;

use config::RunConfig;
use output::Report;

#[derive(Parser)]
#[command(name = "hypergeo", version, about = "Hypergeometric functions, residual spectra and Plancherel checks for root systems with negative multiplicities")]
#[command(after_help = "Every command writes <out-dir>/<command>.json and <command>.csv and prints the JSON.\n\
Exit status: 0 when all checks pass, 1 when a check fails or the computation errors, 2 on usage errors.\n\
Set HYPERGEO_CACHE_DIR to memoize series coefficients on disk.")]
struct Cli {
    /// Directory for JSON and CSV outputs.
    #[arg(long, global = true, default_value = "hypergeo-out")]
    out_dir: String,
    /// Worker threads for quadrature and series evaluation.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct System {
    /// A, B, C, D, E6, E7, E8, F4 or G2.
    #[arg(long)]
    family: String,
    /// Required for the classical families.
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Args, Clone)]
struct KArg {
    /// Multiplicity as an exact rational ("-1/4" or "-0.25"); a
    /// comma-separated list gives one value per orbit, short roots first.
    #[arg(long, required = true, allow_hyphen_values = true, value_delimiter = ',')]
    k: Vec<String>,
}

#[derive(Args, Clone, Default)]
struct Quad {
    /// Truncation radius of the chamber quadrature.
    #[arg(long)]
    t_max: Option<f64>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Root system data as JSON; CSV columns: index, simple_coords, positive, orbit, length2_reference.
    Roots(System),
    /// Closed-form volume against quadrature.
    #[command(after_help = "CSV columns: family, rank, k, closed_form, quadrature, rel_err, error_estimate, tolerance, pass")]
    Volume {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        k: KArg,
        /// Relative tolerance (default 1e-6 in rank one, 1e-3 otherwise).
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        quad: Quad,
    },
    /// Evaluate the c-function or the hypergeometric function.
    Eval {
        #[command(subcommand)]
        what: EvalCmd,
    },
    /// Residual subspaces of the spectral arrangement.
    Residual {
        #[command(subcommand)]
        what: ResidualCmd,
    },
    /// Cuspidal families with their validity regions.
    #[command(after_help = "CSV columns: index, defining, map, r_z, r_p, sigma_lower, sigma_upper, sigma_witness")]
    Spectrum {
        #[command(flatten)]
        system: System,
        /// Optional multiplicity at which to list the cuspidal points.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        k: Vec<String>,
    },
    /// Rank-one Plancherel identity for a bump function.
    #[command(after_help = "CSV columns: abs_lambda, transform_sq, density, weighted_integrand, pass (density >= 0)")]
    PlancherelCheck {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        k: KArg,
        /// Center radius of the bump.
        #[arg(long)]
        center: Option<f64>,
        /// Half width of the bump.
        #[arg(long)]
        half_width: Option<f64>,
        /// Relative tolerance (default 1e-3).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Norm formula of a cuspidal family over a grid of multiplicities.
    #[command(after_help = "CSV columns: k, lhs, lhs_error, rhs, ratio, tolerance, pass")]
    Norm {
        #[command(flatten)]
        system: System,
        /// Comma-separated multiplicities; "a:b" gives per-orbit values.
        #[arg(long, required = true, allow_hyphen_values = true, value_delimiter = ',')]
        grid: Vec<String>,
        /// Index into the `spectrum` listing (default: the rho(k) family).
        #[arg(long)]
        family_index: Option<usize>,
        /// Relative spread tolerance (default 1e-4).
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        quad: Quad,
    },
    /// Runs every applicable check for one system and multiplicity.
    #[command(after_help = "CSV columns: check, status (pass, fail or skipped), value, tolerance, detail")]
    VerifyAll {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        k: KArg,
    },
}

#[derive(Subcommand)]
enum EvalCmd {
    /// c(lambda, k) with its factorization.
    #[command(name = "c")]
    C {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        k: KArg,
        /// Simple-root coordinates, e.g. "0.3+1.2i,-1/4".
        #[arg(long, required = true, allow_hyphen_values = true, value_delimiter = ',')]
        lambda: Vec<String>,
    },
    /// F(lambda, k; x) by the series expansion.
    #[command(name = "F", alias = "f")]
    F {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        k: KArg,
        #[arg(long, required = true, allow_hyphen_values = true, value_delimiter = ',')]
        lambda: Vec<String>,
        /// Point of a in orthonormal coordinates, off the walls.
        #[arg(long, required = true, allow_hyphen_values = true, value_delimiter = ',')]
        x: Vec<f64>,
        /// Relative series tolerance (default 1e-12).
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Subcommand)]
enum ResidualCmd {
    /// All residual subspaces with flags and gamma.
    Enumerate {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        k: KArg,
    },
}

type Runner = fn(&RunConfig) -> anyhow::Result<Report>;

fn base(command: &str, s: &System, out_dir: &str, jobs: Option<usize>) -> RunConfig {
    RunConfig { command: command.into(), family: Some(s.family.clone()), rank: s.rank, out_dir: out_dir.into(), jobs, ..Default::default() }
}

fn configure(cli: Cli) -> (RunConfig, Runner) {
    let (o, j) = (cli.out_dir.as_str(), cli.jobs);
    match cli.cmd {
        Cmd::Roots(s) => (base("roots", &s, o, j), commands::roots),
        Cmd::Volume { system, k, tol, quad } => {
            (RunConfig { k: k.k, tol, t_max: quad.t_max, nodes: quad.nodes, ..base("volume", &system, o, j) }, commands::volume)
        }
        Cmd::Eval { what: EvalCmd::C { system, k, lambda } } => (RunConfig { k: k.k, lambda, ..base("eval c", &system, o, j) }, commands::eval_c),
        Cmd::Eval { what: EvalCmd::F { system, k, lambda, x, tol } } => {
            (RunConfig { k: k.k, lambda, x, tol, ..base("eval F", &system, o, j) }, commands::eval_f)
        }
        Cmd::Residual { what: ResidualCmd::Enumerate { system, k } } => {
            (RunConfig { k: k.k, ..base("residual enumerate", &system, o, j) }, commands::residual_enumerate)
        }
        Cmd::Spectrum { system, k } => (RunConfig { k, ..base("spectrum", &system, o, j) }, commands::spectrum),
        Cmd::PlancherelCheck { system, k, center, half_width, tol } => {
            (RunConfig { k: k.k, center, half_width, tol, ..base("plancherel-check", &system, o, j) }, commands::plancherel_check)
        }
        Cmd::Norm { system, grid, family_index, tol, quad } => (
            RunConfig { grid, family_index, tol, t_max: quad.t_max, nodes: quad.nodes, ..base("norm", &system, o, j) },
            commands::norm,
        ),
        Cmd::VerifyAll { system, k } => (RunConfig { k: k.k, ..base("verify-all", &system, o, j) }, commands::verify_all),
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<Error>(), Some(Error::Parse(_)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (cfg, run) = configure(cli);
    if let Err(e) = commands::validate_rationals(&cfg) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) if is_usage(&e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut r = Report::new(&cfg.command.replace(' ', "-"), vec!["error"]);
            r.failures.push(e.to_string());
            r.rows.push(vec![e.to_string()]);
            r
        }
    };
    match report.write(&cfg) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: writing outputs: {e}");
            return ExitCode::from(1);
        }
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
