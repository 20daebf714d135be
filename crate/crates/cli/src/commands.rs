use std::fs;
use std::path::Path;

use rayon::prelude::*;

use resolvent_lab::airy::{
    airy_norm_asymptotic, airy_norm_kernel, airy_norm_matrix, AiryMethod, AiryNorm, AiryOperatorSpec,
};
use resolvent_lab::coeffs::{check_assumptions, DEFAULT_X_MAX};
use resolvent_lab::config::RunConfig;
use resolvent_lab::generator::{build_g, generator_resolvent_norm, spectrum, EigenTag};
use resolvent_lab::grids::BOUNDARY_MASS_TOL;
use resolvent_lab::oscillator::{kappa_sweep, quartic_branches, spectrum_exact};
use resolvent_lab::output::{format_float, Cell, CsvTable, Plot, SeriesStyle};
use resolvent_lab::quadratic::{
    build_t, fourier_grid, level_curve, multiplier, resolvent_norm, x_grid, AiryRoute, LevelOptions,
    SpectralParameter, FOURIER_SPACING, REFINEMENT_TOL,
};
use resolvent_lab::semigroup::{evolve, fit_decay_rate, mode_state, random_bump_state};
use resolvent_lab::verify::{run_suite, Suite};
use resolvent_lab::{CoefficientFunction, Error, Grid1D, Space, C64};

use crate::{AiryMethodArg, Cli, Command, SpaceArg, SuiteArg};

const SPECTRUM_HALF_WIDTH: f64 = 12.0;
const SPECTRUM_NODES: usize = 600;
const GENERATOR_HALF_WIDTH: f64 = 6.0;
const DECAY_HALF_WIDTH: f64 = 10.0;
const DECAY_NODES: usize = 500;
const MATRIX_HALF_WIDTH: f64 = 12.0;
const MATRIX_SPACING: f64 = 0.02;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_validation() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        message: message.into(),
    }
}

type Outcome<T> = Result<T, CliError>;

/// A finished table, an optional plot and the exit code to report.
struct Report {
    table: CsvTable,
    trailer: Vec<String>,
    plot: Option<Plot>,
    code: u8,
}

impl Report {
    fn new(table: CsvTable) -> Self {
        Self {
            table,
            trailer: Vec::new(),
            plot: None,
            code: 0,
        }
    }
}

pub fn run(cli: Cli, invocation: &str) -> Outcome<u8> {
    let mut cfg = match &cli.global.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::from_text(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = cli.global.output {
        cfg.output = Some(p);
    }
    if let Some(p) = cli.global.svg {
        cfg.svg = Some(p);
    }
    if let Some(j) = cli.global.jobs {
        cfg.jobs = Some(j);
    }
    cfg.validate()?;
    for path in [&cfg.output, &cfg.svg].into_iter().flatten() {
        check_writable(path)?;
    }
    if let Some(jobs) = cfg.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::warn!("worker pool already initialised: {e}");
        }
    }

    let mut report = match cli.command {
        Command::Spectrum {
            a,
            q,
            exact,
            kappa,
            nmax,
        } => {
            if exact {
                spectrum_exact_cmd(kappa, nmax)?
            } else {
                spectrum_cmd(&cfg, &a, &q, nmax)?
            }
        }
        Command::Resolvent {
            a,
            q,
            c,
            b_list,
            space,
        } => resolvent_cmd(&cfg, &a, &q, c, b_list.0, space)?,
        Command::Gresolvent { a, q, c, b_list } => gresolvent_cmd(&cfg, &a, &q, c, b_list.0)?,
        Command::Pseudospectrum { a, q, re, im, space } => pseudospectrum_cmd(&cfg, &a, &q, &re.0, &im.0, space)?,
        Command::Levelcurve { a, q, eps, b_list } => levelcurve_cmd(&cfg, &a, &q, eps, b_list.0)?,
        Command::AiryNorm {
            a,
            c,
            method,
            half_width,
            nodes,
        } => airy_cmd(&cfg, &a, c.0, method, half_width, nodes)?,
        Command::Decay { kappa, dt, t_end, u0 } => decay_cmd(&cfg, kappa, dt, t_end, &u0)?,
        Command::KappaSweep { kappa_list, count } => kappa_sweep_cmd(&kappa_list.0, count)?,
        Command::Verify { suite } => verify_cmd(suite),
    };

    let mut header = vec![format!("resolvent-lab {invocation}"), format!("config: {cfg}")];
    header.append(&mut report.table.comments);
    report.table.comments = header;
    let mut csv = report.table.render();
    for line in &report.trailer {
        csv.push_str(&format!("# {line}\n"));
    }
    match &cfg.output {
        Some(path) => fs::write(path, csv).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    if let Some(path) = &cfg.svg {
        match &report.plot {
            Some(plot) => {
                fs::write(path, plot.render()).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?
            }
            None => log::warn!("this subcommand has no plot; {} not written", path.display()),
        }
    }
    Ok(report.code)
}

fn check_writable(path: &Path) -> Outcome<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(invalid(format!("output directory {} does not exist", parent.display())))
    }
}

fn positive(name: &str, v: f64) -> Outcome<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must be a positive number, got {v}")))
    }
}

fn check_coefficients(a: &CoefficientFunction, q: &CoefficientFunction) -> Outcome<()> {
    let report = check_assumptions(a, q, DEFAULT_X_MAX, 2)?;
    if report.passes() {
        Ok(())
    } else {
        Err(invalid(format!(
            "coefficients a = {a}, q = {q} violate the structural assumptions (unbounded a, q <= K a)"
        )))
    }
}

fn check_space(a: &CoefficientFunction, q: &CoefficientFunction, space: Space) -> Outcome<()> {
    let probe = Grid1D::new(1.0, 3)?;
    multiplier(a, &probe, space)?;
    multiplier(q, &probe, space)?;
    Ok(())
}

fn space_of(arg: SpaceArg) -> Space {
    match arg {
        SpaceArg::X => Space::X,
        SpaceArg::Fourier => Space::Fourier,
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// x-space grid from the config, or the module default.
fn config_grid(cfg: &RunConfig, half_width: f64, nodes: usize) -> Outcome<Grid1D> {
    let l = cfg.half_width.unwrap_or(half_width);
    Ok(match (cfg.nodes, cfg.spacing) {
        (Some(n), _) => Grid1D::new(l, n)?,
        (None, Some(h)) => Grid1D::with_spacing(l, h)?,
        (None, None) => Grid1D::new(l, nodes)?,
    })
}

fn pencil_grid(
    cfg: &RunConfig,
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    lambda: SpectralParameter,
    space: Space,
) -> Outcome<Grid1D> {
    let h = cfg.spacing.unwrap_or(FOURIER_SPACING);
    Ok(match (cfg.half_width, cfg.nodes) {
        (Some(l), Some(n)) => Grid1D::new(l, n)?,
        (Some(l), None) => Grid1D::with_spacing(l, h)?,
        (None, _) => match space {
            Space::Fourier => fourier_grid(lambda.b(), h)?,
            Space::X => x_grid(a, q, lambda, h)?,
        },
    })
}

struct PencilPoint {
    norm: f64,
    sigma_min: f64,
    boundary_mass: f64,
    resolved: bool,
}

/// `‖T(λ)⁻¹‖` with the boundary-mass and grid-doubling diagnostics.
fn pencil_point(
    cfg: &RunConfig,
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    lambda: SpectralParameter,
    space: Space,
) -> Outcome<PencilPoint> {
    let grid = pencil_grid(cfg, a, q, lambda, space)?;
    let r = resolvent_norm(&build_t(a, q, lambda, &grid, space)?)?;
    let fine = resolvent_norm(&build_t(a, q, lambda, &grid.refined(), space)?)?;
    let change = (fine.norm - r.norm).abs() / fine.norm;
    Ok(PencilPoint {
        norm: r.norm,
        sigma_min: r.sigma_min,
        boundary_mass: r.boundary_mass,
        resolved: r.boundary_mass < BOUNDARY_MASS_TOL && change < REFINEMENT_TOL,
    })
}

fn spectrum_exact_cmd(kappa: f64, nmax: usize) -> Outcome<Report> {
    positive("kappa", kappa)?;
    let mut table = CsvTable::new(&["n", "branch", "re", "im"]);
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for n in 0..=nmax {
        let br = quartic_branches(n, kappa)?;
        table.push(vec![n.into(), "r".into(), br.lambda_r.into(), 0.0.into()]);
        for (name, z) in [("i_plus", br.lambda_i_plus), ("i_minus", br.lambda_i_minus)] {
            table.push(vec![n.into(), name.into(), z.re.into(), z.im.into()]);
            complex.push((z.re, z.im));
        }
        real.push((br.lambda_r, 0.0));
    }
    let exact = spectrum_exact(kappa, nmax)?;
    let ray = exact.essential_ray_end.unwrap_or(-0.5 * kappa);
    table.comment(format!(
        "essential_ray_end={} spectral_bound={}",
        format_float(ray),
        format_float(exact.spectral_bound)
    ));
    let mut report = Report::new(table);
    let mut plot = Plot::new(&format!("spectrum of G, kappa = {}", format_float(kappa)), "Re", "Im");
    plot.add("essential ray", SeriesStyle::Line, "gray", vec![(ray - kappa, 0.0), (ray, 0.0)]);
    plot.add("real branch", SeriesStyle::Markers, "blue", real);
    plot.add("complex branches", SeriesStyle::Markers, "black", complex);
    report.plot = Some(plot);
    Ok(report)
}

fn spectrum_cmd(cfg: &RunConfig, a: &CoefficientFunction, q: &CoefficientFunction, nmax: usize) -> Outcome<Report> {
    check_coefficients(a, q)?;
    let grid = config_grid(cfg, SPECTRUM_HALF_WIDTH, SPECTRUM_NODES)?;
    if nmax == 0 || nmax > 2 * grid.len() {
        return Err(invalid(format!("--nmax must lie in 1..={}, got {nmax}", 2 * grid.len())));
    }
    let sys = build_g(a, q, &grid)?;
    let result = spectrum(&sys, nmax)?;
    let mut table = CsvTable::new(&["re", "im", "tag"]);
    for e in &result.eigenvalues {
        table.push(vec![e.value.re.into(), e.value.im.into(), e.tag.name().into()]);
    }
    let ray = result.essential_ray_end;
    table.comment(format!(
        "grid: half_width={} nodes={} essential_ray_end={} spectral_bound={}",
        format_float(grid.half_width()),
        grid.len(),
        ray.map_or("none".into(), format_float),
        format_float(result.spectral_bound)
    ));
    let mut report = Report::new(table);
    let mut plot = Plot::new("spectrum of G (discretized)", "Re", "Im");
    if let Some(r) = ray {
        plot.add("essential ray", SeriesStyle::Line, "gray", vec![(2.0 * r, 0.0), (r, 0.0)]);
    }
    let pick = |keep: bool| -> Vec<(f64, f64)> {
        result
            .eigenvalues
            .iter()
            .filter(|e| (e.tag == EigenTag::Eigenvalue) == keep)
            .map(|e| (e.value.re, e.value.im))
            .collect()
    };
    plot.add("eigenvalues", SeriesStyle::Markers, "black", pick(true));
    plot.add("other", SeriesStyle::Markers, "silver", pick(false));
    report.plot = Some(plot);
    Ok(report)
}

fn resolvent_cmd(
    cfg: &RunConfig,
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    c: f64,
    b_list: Vec<f64>,
    space: SpaceArg,
) -> Outcome<Report> {
    let space = space_of(space);
    check_coefficients(a, q)?;
    check_space(a, q, space)?;
    let bs = sorted(b_list);
    let params: Vec<SpectralParameter> = bs
        .iter()
        .map(|&b| {
            if b == 0.0 {
                return Err(invalid("--b-list entries must be nonzero"));
            }
            Ok(SpectralParameter::strip(c, b)?)
        })
        .collect::<Outcome<_>>()?;
    let airy = if c >= 0.0 {
        Some(AiryRoute::Kernel {
            half_width: cfg.airy_half_width,
            nodes: cfg.airy_nodes,
        }
        .norm(a, c)?)
    } else {
        None
    };
    let points = params
        .par_iter()
        .map(|&lambda| pencil_point(cfg, a, q, lambda, space))
        .collect::<Outcome<Vec<_>>>()?;
    let mut table = CsvTable::new(&[
        "b",
        "norm",
        "sigma_min",
        "ratio",
        "ratio_dev",
        "boundary_mass",
        "resolved",
    ]);
    let mut ratios = Vec::new();
    for (b, p) in bs.iter().zip(&points) {
        let ratio = airy.map_or(f64::NAN, |an| 2.0 * b.abs() * p.norm / an);
        ratios.push((*b, ratio));
        table.push(vec![
            (*b).into(),
            p.norm.into(),
            p.sigma_min.into(),
            ratio.into(),
            (ratio - 1.0).abs().into(),
            p.boundary_mass.into(),
            p.resolved.into(),
        ]);
    }
    table.comment(format!(
        "c={} space={} airy_norm={}",
        format_float(c),
        if space == Space::X { "x" } else { "fourier" },
        airy.map_or("none".into(), format_float)
    ));
    let mut report = Report::new(table);
    let mut plot = Plot::new("strip ratio R(b)", "b", "R");
    plot.add("R(b)", SeriesStyle::Line, "black", ratios.clone());
    plot.add("samples", SeriesStyle::Markers, "black", ratios);
    report.plot = Some(plot);
    Ok(report)
}

fn gresolvent_cmd(
    cfg: &RunConfig,
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    c: f64,
    b_list: Vec<f64>,
) -> Outcome<Report> {
    check_coefficients(a, q)?;
    let bs = sorted(b_list);
    let params: Vec<SpectralParameter> = bs
        .iter()
        .map(|&b| Ok(SpectralParameter::strip(c, b)?))
        .collect::<Outcome<_>>()?;
    let norms = params
        .par_iter()
        .map(|&lambda| {
            let l = cfg.half_width.unwrap_or(GENERATOR_HALF_WIDTH);
            let grid = match (cfg.nodes, cfg.spacing) {
                (Some(n), _) => Grid1D::new(l, n)?,
                (None, Some(h)) => Grid1D::with_spacing(l, h)?,
                (None, None) => {
                    let hb = if lambda.b() != 0.0 { 0.1 / lambda.b().abs() } else { FOURIER_SPACING };
                    Grid1D::with_spacing(l, hb.min(FOURIER_SPACING))?
                }
            };
            let sys = build_g(a, q, &grid)?;
            Ok(generator_resolvent_norm(&sys, lambda)?.norm)
        })
        .collect::<Outcome<Vec<f64>>>()?;
    let mut table = CsvTable::new(&["c", "b", "norm"]);
    for (b, n) in bs.iter().zip(&norms) {
        table.push(vec![c.into(), (*b).into(), (*n).into()]);
    }
    table.comment("norm: energy norm of (G - lambda)^-1, lambda = -c + ib");
    let mut report = Report::new(table);
    let mut plot = Plot::new("energy-norm resolvent of G", "b", "norm");
    plot.add(
        "norm",
        SeriesStyle::Line,
        "black",
        bs.iter().copied().zip(norms.iter().copied()).collect(),
    );
    report.plot = Some(plot);
    Ok(report)
}

fn pseudospectrum_cmd(
    cfg: &RunConfig,
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    re: &[f64],
    im: &[f64],
    space: SpaceArg,
) -> Outcome<Report> {
    let space = space_of(space);
    check_coefficients(a, q)?;
    check_space(a, q, space)?;
    let mut params = Vec::with_capacity(re.len() * im.len());
    for &y in im {
        for &x in re {
            params.push(SpectralParameter::from_complex(C64::new(x, y))?);
        }
    }
    let points = params
        .par_iter()
        .map(|&lambda| pencil_point(cfg, a, q, lambda, space))
        .collect::<Outcome<Vec<_>>>()?;
    let mut rows: Vec<(SpectralParameter, PencilPoint)> = params.into_iter().zip(points).collect();
    rows.sort_by(|(l, _), (m, _)| {
        l.lambda()
            .im
            .total_cmp(&m.lambda().im)
            .then(l.lambda().re.total_cmp(&m.lambda().re))
    });
    let mut table = CsvTable::new(&["re", "im", "norm", "sigma_min", "boundary_mass", "resolved"]);
    let (mut level1, mut level2) = (Vec::new(), Vec::new());
    for (l, p) in &rows {
        let z = l.lambda();
        table.push(vec![
            z.re.into(),
            z.im.into(),
            p.norm.into(),
            p.sigma_min.into(),
            p.boundary_mass.into(),
            p.resolved.into(),
        ]);
        if p.norm >= 100.0 {
            level2.push((z.re, z.im));
        } else if p.norm >= 10.0 {
            level1.push((z.re, z.im));
        }
    }
    let mut report = Report::new(table);
    let mut plot = Plot::new("pseudospectrum of T", "Re", "Im");
    plot.add("norm >= 10", SeriesStyle::Markers, "silver", level1);
    plot.add("norm >= 100", SeriesStyle::Markers, "black", level2);
    report.plot = Some(plot);
    Ok(report)
}

fn levelcurve_cmd(
    cfg: &RunConfig,
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    eps: f64,
    b_list: Vec<f64>,
) -> Outcome<Report> {
    positive("eps", eps)?;
    check_coefficients(a, q)?;
    let bs = sorted(b_list);
    if bs.contains(&0.0) {
        return Err(invalid("--b-list entries must be nonzero"));
    }
    let space = if check_space(a, q, Space::Fourier).is_ok() {
        Space::Fourier
    } else {
        Space::X
    };
    let defaults = LevelOptions::default();
    let opts = LevelOptions {
        c_max: cfg.c_max,
        tol: cfg.bisect_tol,
        space,
        spacing: cfg.spacing.unwrap_or(defaults.spacing),
        airy: AiryRoute::Kernel {
            half_width: cfg.airy_half_width,
            nodes: cfg.airy_nodes,
        },
        ..defaults
    };
    let curve = level_curve(a, q, eps, &bs, &opts)?;
    let mut table = CsvTable::new(&["b", "c_numeric", "c_closed_form", "phi_b"]);
    for s in &curve.samples {
        table.push(vec![
            s.b.into(),
            s.c_numeric.into(),
            s.c_closed_form.unwrap_or(f64::NAN).into(),
            s.phi_b.into(),
        ]);
    }
    table.comment(format!(
        "eps={} c_increasing={} phi_decreasing={}",
        format_float(eps),
        curve.increasing(),
        curve.phi_decreasing()
    ));
    let mut report = Report::new(table);
    let mut plot = Plot::new(&format!("level curve, eps = {}", format_float(eps)), "b", "c");
    plot.add(
        "numeric",
        SeriesStyle::Line,
        "black",
        curve.samples.iter().map(|s| (s.b, s.c_numeric)).collect(),
    );
    plot.add(
        "closed form",
        SeriesStyle::Line,
        "blue",
        curve
            .samples
            .iter()
            .map(|s| (s.b, s.c_closed_form.unwrap_or(f64::NAN)))
            .collect(),
    );
    report.plot = Some(plot);
    Ok(report)
}

fn airy_cmd(
    cfg: &RunConfig,
    a: &CoefficientFunction,
    c_list: Vec<f64>,
    method: AiryMethodArg,
    half_width: Option<f64>,
    nodes: Option<usize>,
) -> Outcome<Report> {
    if let Some(l) = half_width {
        positive("L", l)?;
    }
    if nodes.is_some_and(|n| n < 3) {
        return Err(invalid("--N must be at least 3"));
    }
    let cs = sorted(c_list);
    let methods: Vec<AiryMethod> = match method {
        AiryMethodArg::Kernel => vec![AiryMethod::Kernel],
        AiryMethodArg::Matrix => vec![AiryMethod::Matrix],
        AiryMethodArg::Asymptotic => vec![AiryMethod::Asymptotic],
        AiryMethodArg::All => vec![AiryMethod::Kernel, AiryMethod::Matrix, AiryMethod::Asymptotic],
    };
    let specs: Vec<AiryOperatorSpec> = cs
        .iter()
        .map(|&c| AiryOperatorSpec::new(a.clone(), c))
        .collect::<Result<_, _>>()?;
    let explicit_asymptotic = method == AiryMethodArg::Asymptotic;
    if explicit_asymptotic {
        if let Some(c) = cs.iter().find(|c| **c <= 0.0) {
            return Err(invalid(format!("the asymptotic method needs c > 0, got {c}")));
        }
    }
    let matrix_grid = match nodes {
        Some(n) => Grid1D::new(half_width.unwrap_or(MATRIX_HALF_WIDTH), n)?,
        None => Grid1D::with_spacing(
            half_width.unwrap_or(MATRIX_HALF_WIDTH),
            cfg.spacing.unwrap_or(MATRIX_SPACING),
        )?,
    };
    let jobs: Vec<(AiryMethod, &AiryOperatorSpec)> = methods
        .iter()
        .flat_map(|&m| specs.iter().map(move |s| (m, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(m, spec)| -> Outcome<AiryNorm> {
            Ok(match m {
                AiryMethod::Kernel => airy_norm_kernel(
                    spec,
                    half_width.unwrap_or(cfg.airy_half_width),
                    nodes.unwrap_or(cfg.airy_nodes),
                )?,
                AiryMethod::Matrix => airy_norm_matrix(spec, &matrix_grid)?,
                AiryMethod::Asymptotic if spec.shift() <= 0.0 => AiryNorm {
                    method: m,
                    c: spec.shift(),
                    norm: f64::NAN,
                    boundary_mass: 0.0,
                },
                AiryMethod::Asymptotic => airy_norm_asymptotic(spec)?,
            })
        })
        .collect::<Outcome<Vec<_>>>()?;
    let mut table = CsvTable::new(&["method", "c", "norm", "boundary_mass"]);
    let mut plot = Plot::new("generalized Airy resolvent", "c", "log10 norm");
    for (m, color) in methods.iter().zip(["black", "blue", "gray"]) {
        let rows: Vec<&AiryNorm> = results.iter().filter(|r| r.method == *m).collect();
        for r in &rows {
            table.push(vec![m.name().into(), r.c.into(), r.norm.into(), r.boundary_mass.into()]);
        }
        plot.add(
            m.name(),
            SeriesStyle::Line,
            color,
            rows.iter().map(|r| (r.c, r.norm.log10())).collect(),
        );
    }
    table.comment(format!("a={a}"));
    let mut report = Report::new(table);
    report.plot = Some(plot);
    Ok(report)
}

enum InitialState {
    Random,
    Mode(usize),
}

fn parse_u0(s: &str) -> Outcome<InitialState> {
    let t = s.trim().to_ascii_lowercase();
    if t == "random" {
        return Ok(InitialState::Random);
    }
    t.strip_prefix("mode:")
        .and_then(|n| n.trim().parse().ok())
        .map(InitialState::Mode)
        .ok_or_else(|| invalid(format!("--u0 must be `random` or `mode:<n>`, got {s:?}")))
}

fn decay_cmd(cfg: &RunConfig, kappa: f64, dt: f64, t_end: f64, u0: &str) -> Outcome<Report> {
    positive("kappa", kappa)?;
    positive("dt", dt)?;
    positive("t-end", t_end)?;
    let state = parse_u0(u0)?;
    let steps = (t_end / dt).round();
    if steps < resolvent_lab::semigroup::MIN_TRAJECTORY_LEN as f64 {
        return Err(invalid(format!(
            "--t-end / --dt gives {steps} steps; at least {} are needed for the fit",
            resolvent_lab::semigroup::MIN_TRAJECTORY_LEN
        )));
    }
    let a = CoefficientFunction::quadratic();
    let q = CoefficientFunction::scaled(CoefficientFunction::quadratic(), kappa)?;
    let grid = config_grid(cfg, DECAY_HALF_WIDTH, DECAY_NODES)?;
    let sys = build_g(&a, &q, &grid)?;
    let (u, label) = match state {
        InitialState::Random => (random_bump_state(&sys, 2, cfg.seed), "random".to_string()),
        InitialState::Mode(n) => {
            let target = quartic_branches(n, kappa)?.lambda_i_plus;
            (mode_state(&sys, target, cfg.seed)?, format!("mode:{n}"))
        }
    };
    let traj = evolve(&sys, &u, dt, t_end)?;
    let fit = fit_decay_rate(&traj.points, cfg.window_fraction)?;
    let mut table = CsvTable::new(&["t", "norm"]);
    for &(t, n) in &traj.points {
        table.push(vec![t.into(), n.into()]);
    }
    table.comment(format!(
        "kappa={} u0={label} grid: half_width={} nodes={}",
        format_float(kappa),
        format_float(grid.half_width()),
        grid.len()
    ));
    table.comment("transient growth relative to exp(t s(G)) is possible; the fit skips the early window");
    let mut report = Report::new(table);
    report.trailer = vec![
        "fitted_rate,prefactor,residual".into(),
        format!(
            "{},{},{}",
            format_float(fit.fitted_rate),
            format_float(fit.prefactor),
            format_float(fit.fit_residual)
        ),
    ];
    let mut plot = Plot::new("energy norm of u(t)", "t", "log10 norm");
    plot.add(
        "log10 norm",
        SeriesStyle::Line,
        "black",
        traj.points.iter().map(|&(t, n)| (t, n.log10())).collect(),
    );
    report.plot = Some(plot);
    Ok(report)
}

fn kappa_sweep_cmd(kappas: &[f64], count: usize) -> Outcome<Report> {
    if let Some(k) = kappas.iter().find(|k| !(**k > 0.0)) {
        return Err(invalid(format!("--kappa-list entries must be positive, got {k}")));
    }
    if count == 0 {
        return Err(invalid("--count must be at least 1"));
    }
    let sweep = kappa_sweep(kappas, count)?;
    let mut table = CsvTable::new(&[
        "kappa",
        "n",
        "y_n",
        "lambda_r",
        "re_lambda_i",
        "im_lambda_i",
        "spectral_bound",
        "growth_bound",
    ]);
    for row in &sweep.rows {
        for br in &row.branches {
            table.push(vec![
                row.kappa.into(),
                br.n.into(),
                br.y.into(),
                br.lambda_r.into(),
                br.lambda_i_plus.re.into(),
                br.lambda_i_plus.im.into(),
                row.spectral_bound.into(),
                row.growth_bound.into(),
            ]);
        }
    }
    table.comment(format!("weakens_at_ends={}", sweep.weakens_at_ends()));
    let mut report = Report::new(table);
    let mut plot = Plot::new("decay bounds over kappa", "kappa", "rate");
    plot.add(
        "s(G)",
        SeriesStyle::Line,
        "black",
        sweep.rows.iter().map(|r| (r.kappa, r.spectral_bound)).collect(),
    );
    plot.add(
        "growth bound",
        SeriesStyle::Line,
        "blue",
        sweep.rows.iter().map(|r| (r.kappa, r.growth_bound)).collect(),
    );
    for n in 0..count {
        plot.add(
            &format!("Re lambda_{n}^r"),
            SeriesStyle::Markers,
            "gray",
            sweep.rows.iter().map(|r| (r.kappa, r.branches[n].lambda_r)).collect(),
        );
    }
    report.plot = Some(plot);
    Ok(report)
}

fn verify_cmd(suite: SuiteArg) -> Report {
    let suite = match suite {
        SuiteArg::Trivial => Suite::Trivial,
        SuiteArg::Paper => Suite::Paper,
        SuiteArg::Derived => Suite::Derived,
        SuiteArg::All => Suite::All,
    };
    let results = run_suite(suite);
    let mut table = CsvTable::new(&["suite", "module", "check", "result", "detail"]);
    for r in &results {
        table.push(vec![
            r.suite.name().into(),
            r.module.into(),
            r.name.into(),
            Cell::from(if r.pass { "pass" } else { "fail" }),
            r.detail.clone().into(),
        ]);
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    eprintln!("{} of {} checks passed", results.len() - failed, results.len());
    let mut report = Report::new(table);
    report.code = if failed == 0 { 0 } else { 3 };
    report
}
