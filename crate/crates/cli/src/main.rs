use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use resolvent_lab::CoefficientFunction;

mod commands;

/// Spectra, pseudospectra and resolvent norms of damped-wave generators.
#[derive(Debug, Parser)]
#[command(name = "resolvent-lab", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true, env = "RESOLVENT_LAB_JOBS")]
    pub jobs: Option<usize>,
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV destination (default: stdout).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Also render an SVG plot to this path.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    X,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AiryMethodArg {
    Kernel,
    Matrix,
    Asymptotic,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Trivial,
    Paper,
    Derived,
    All,
}

fn coefficient(s: &str) -> Result<CoefficientFunction, String> {
    s.parse().map_err(|e: resolvent_lab::Error| e.to_string())
}

/// Parsed numeric list flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Values(pub Vec<f64>);

fn values(s: &str) -> Result<Values, String> {
    resolvent_lab::config::parse_values(s).map(Values).map_err(|e| e.to_string())
}

fn range(s: &str) -> Result<Values, String> {
    resolvent_lab::config::parse_range(s).map(Values).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of G, discretized or from the closed-form quartic.
    Spectrum {
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        a: CoefficientFunction,
        #[arg(long, default_value = "scaled:monomial:2:10", value_parser = coefficient)]
        q: CoefficientFunction,
        /// Closed-form branches for a = x², q = κx².
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        /// Largest branch index (exact) or number of retained eigenvalues.
        #[arg(long, default_value_t = 20)]
        nmax: usize,
    },
    /// ‖T(-c+ib)⁻¹‖ and the strip ratio R(b) along a vertical line.
    Resolvent {
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        a: CoefficientFunction,
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        q: CoefficientFunction,
        #[arg(long)]
        c: f64,
        #[arg(long, value_parser = values)]
        b_list: Values,
        #[arg(long, value_enum, default_value_t = SpaceArg::Fourier)]
        space: SpaceArg,
    },
    /// Energy-norm ‖(G - λ)⁻¹‖ along a vertical line.
    Gresolvent {
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        a: CoefficientFunction,
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        q: CoefficientFunction,
        #[arg(long)]
        c: f64,
        #[arg(long, value_parser = values)]
        b_list: Values,
    },
    /// ‖T(λ)⁻¹‖ on a rectangular grid of λ.
    Pseudospectrum {
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        a: CoefficientFunction,
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        q: CoefficientFunction,
        /// Real parts as lo:hi:step.
        #[arg(long, value_parser = range, allow_hyphen_values = true)]
        re: Values,
        /// Imaginary parts as lo:hi:step.
        #[arg(long, value_parser = range, allow_hyphen_values = true)]
        im: Values,
        #[arg(long, value_enum, default_value_t = SpaceArg::Fourier)]
        space: SpaceArg,
    },
    /// Level curve ‖T(-c+ib)⁻¹‖ = 1/ε solved for c at each b.
    Levelcurve {
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        a: CoefficientFunction,
        #[arg(long, default_value = "const:0", value_parser = coefficient)]
        q: CoefficientFunction,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_parser = values)]
        b_list: Values,
    },
    /// ‖(A - c)⁻¹‖ for the generalized Airy operator.
    AiryNorm {
        #[arg(long, default_value = "monomial:2", value_parser = coefficient)]
        a: CoefficientFunction,
        /// One shift or a list / range of shifts.
        #[arg(long, value_parser = values)]
        c: Values,
        #[arg(long, value_enum, default_value_t = AiryMethodArg::All)]
        method: AiryMethodArg,
        /// Half width of the kernel (x) or matrix (ξ) grid.
        #[arg(long = "L")]
        half_width: Option<f64>,
        /// Interior nodes of that grid.
        #[arg(long = "N")]
        nodes: Option<usize>,
    },
    /// Evolves u' = Gu for a = x², q = κx² and fits the decay rate.
    Decay {
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 60.0)]
        t_end: f64,
        /// `random` or `mode:<n>`.
        #[arg(long, default_value = "random")]
        u0: String,
    },
    /// Closed-form branches and decay bounds over a list of κ.
    KappaSweep {
        #[arg(long, value_parser = values)]
        kappa_list: Values,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Runs the built-in invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let raw: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&raw) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let invocation = raw.iter().skip(1).cloned().collect::<Vec<_>>().join(" ");
    match commands::run(cli, &invocation) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
