//! Self-check suites behind the `verify` command.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::airy::{airy_norm_kernel, airy_norm_matrix, kernel_matrix, AiryOperatorSpec};
use crate::coeffs::CoefficientFunction;
use crate::error::{Error, Result};
use crate::generator::{
    build_g, generator_resolvent_norm, singular_sequence_probe, spectrum, GeneratorSystem, Mollifier,
};
use crate::grids::{Grid1D, Space};
use crate::linalg::{band_sigma_min, dot, BandMatrix, C64};
use crate::oscillator::{
    asymptotic_branches, cardano_y, cubic_residual, kappa_sweep, quartic_branches, spectral_bound,
};
use crate::quadratic::{
    build_t, fourier_grid, level_curve, pencil_ratio, resolvent_norm, verify_graph_inequalities, AiryRoute,
    GraphCheck, LevelOptions, SpectralParameter, HQ_HALF_T_HALF,
};
use crate::output::format_float;
use crate::semigroup::{evolve, fit_decay_rate, mode_state, random_bump_state};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Trivial,
    Paper,
    Derived,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Trivial => "trivial",
            Self::Paper => "paper",
            Self::Derived => "derived",
            Self::All => "all",
        }
    }

    fn includes(&self, other: Suite) -> bool {
        *self == Suite::All || *self == other
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trivial" => Ok(Self::Trivial),
            "paper" => Ok(Self::Paper),
            "derived" => Ok(Self::Derived),
            "all" => Ok(Self::All),
            other => Err(Error::Parse(format!(
                "unknown suite {other:?} (expected trivial, paper, derived, all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: Suite,
    pub module: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Check = fn() -> Result<(bool, String)>;

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format_float(*x)).collect();
    format!("[{}]", items.join(", "))
}

fn quad() -> CoefficientFunction {
    CoefficientFunction::quadratic()
}

fn times(kappa: f64) -> CoefficientFunction {
    CoefficientFunction::scaled(quad(), kappa).expect("finite factor")
}

fn zero() -> CoefficientFunction {
    CoefficientFunction::constant(0.0).expect("zero is a valid constant")
}

fn oscillator(kappa: f64, l: f64, n: usize) -> Result<GeneratorSystem> {
    build_g(&quad(), &times(kappa), &Grid1D::new(l, n)?)
}

fn descriptor_roundtrip() -> Result<(bool, String)> {
    let list = ["monomial:2", "bracket:1.5", "logbracket:0.25", "const:0", "scaled:monomial:2:10"];
    let ok = list.iter().all(|d| {
        d.parse::<CoefficientFunction>()
            .map(|c| c.to_string().parse::<CoefficientFunction>().ok() == Some(c))
            .unwrap_or(false)
    });
    Ok((ok, format!("{} descriptors", list.len())))
}

fn grid_layout() -> Result<(bool, String)> {
    let g = Grid1D::new(3.0, 5)?;
    let x = g.nodes();
    let ok = (g.spacing() - 1.0).abs() < 1e-15 && x == vec![-2.0, -1.0, 0.0, 1.0, 2.0];
    Ok((ok, format!("h = {}", g.spacing())))
}

fn identity_sigma() -> Result<(bool, String)> {
    let m = BandMatrix::identity(50).shift_diagonal(C64::new(-2.0, 0.0));
    let s = band_sigma_min(&m, None)?.sigma;
    Ok(((s - 1.0).abs() < 1e-12, format!("sigma_min = {s}")))
}

fn pencil_conjugation() -> Result<(bool, String)> {
    let g = Grid1D::new(5.0, 50)?;
    let l = SpectralParameter::strip(0.5, 3.0)?;
    let t = build_t(&quad(), &quad(), l, &g, Space::X)?.to_dense();
    let tc = build_t(&quad(), &quad(), l.conj(), &g, Space::X)?.to_dense();
    let err = t
        .iter()
        .zip(tc.iter())
        .map(|(a, b)| (a.conj() - b).norm())
        .fold(0.0, f64::max);
    Ok((err == 0.0, format!("max entry mismatch {err:e}")))
}

fn ratio_symmetry() -> Result<(bool, String)> {
    let g = fourier_grid(10.0, 0.1)?;
    let airy = AiryRoute::Given(1.0);
    let p = pencil_ratio(&quad(), &quad(), 0.5, 10.0, &g, Space::Fourier, &airy)?;
    let m = pencil_ratio(&quad(), &quad(), 0.5, -10.0, &g, Space::Fourier, &airy)?;
    let d = (p - m).abs() / p;
    Ok((d < 1e-10, format!("relative difference {d:.2e}")))
}

fn block_structure() -> Result<(bool, String)> {
    let sys = oscillator(10.0, 4.0, 20)?;
    let g = sys.to_dense();
    let mut ok = true;
    for i in 0..20 {
        for j in 0..20 {
            ok &= g[[i, j]] == 0.0 && g[[i, 20 + j]] == if i == j { 1.0 } else { 0.0 };
        }
    }
    Ok((ok, "top blocks [0, I]".into()))
}

fn undamped_imaginary() -> Result<(bool, String)> {
    let sys = build_g(&zero(), &quad(), &Grid1D::new(6.0, 60)?)?;
    let s = spectrum(&sys, 60)?;
    let worst = s.eigenvalues.iter().map(|e| e.value.re.abs()).fold(0.0, f64::max);
    Ok((worst < 1e-6, format!("max |Re| = {worst:.2e}")))
}

fn r_lambda_residual() -> Result<(bool, String)> {
    let sys = oscillator(10.0, 5.0, 200)?;
    let l = SpectralParameter::strip(0.5, 15.0)?;
    let inv = sys.shifted_inverse(l)?;
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let v = random_bump_state(&sys, 2, seed);
        let (u1, u2) = inv.apply_r(&v[..200], &v[200..]);
        let u: Vec<C64> = u1.into_iter().chain(u2).collect();
        let r: Vec<C64> = sys
            .apply(&u)
            .iter()
            .zip(&u)
            .zip(&v)
            .map(|((g, u), v)| g - l.lambda() * u - v)
            .collect();
        worst = worst.max(sys.gram().norm(&r) / sys.gram().norm(&v));
    }
    Ok((worst <= 1e-8, format!("max relative residual {worst:.2e}")))
}

fn airy_adjoint_transpose() -> Result<(bool, String)> {
    let s = AiryOperatorSpec::new(quad(), 0.5)?;
    let g = Grid1D::new(4.0, 40)?;
    let k = kernel_matrix(&s, &g)?;
    let ka = kernel_matrix(&s.adjoint(), &g)?;
    let err = (&k.t() - &ka).iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok((err < 1e-14, format!("max mismatch {err:.2e}")))
}

fn cubic_grid() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 0..10 {
        for k in 0..10 {
            let kappa = 0.1 * 3f64.powi(k);
            let y = cardano_y(n, kappa)?;
            worst = worst.max(cubic_residual(n, kappa, y).abs() / (0.5 * ((2 * n + 1) as f64).powi(4)));
        }
    }
    Ok((worst <= 1e-10, format!("max relative cubic residual {worst:.2e}")))
}

fn sweep_rows() -> Result<(bool, String)> {
    let s = kappa_sweep(&[0.5, 1.0, 2.0, 4.0], 3)?;
    Ok((s.rows.len() == 4, format!("{} rows", s.rows.len())))
}

fn energy_conservation() -> Result<(bool, String)> {
    let sys = build_g(&zero(), &quad(), &Grid1D::new(6.0, 100)?)?;
    let u0 = random_bump_state(&sys, 2, 1);
    let tr = evolve(&sys, &u0, 0.01, 10.0)?;
    let e0 = tr.points[0].1;
    let drift = tr.points.iter().map(|p| (p.1 - e0).abs() / e0).fold(0.0, f64::max);
    Ok((drift <= 1e-8, format!("max relative drift {drift:.2e} over 1000 steps")))
}

fn exact_reference_values() -> Result<(bool, String)> {
    let b = quartic_branches(0, 10.0)?;
    let s = spectral_bound(10.0)?;
    let ok = (b.lambda_r + 1.61326).abs() <= 1e-4 && (b.lambda_i_plus.re + 0.15809).abs() <= 1e-4 && (s + 0.15809).abs() <= 1e-4;
    Ok((ok, format!("lambda_r = {:.6}, Re lambda_i = {:.6}, s(G) = {s:.6}", b.lambda_r, b.lambda_i_plus.re)))
}

fn y_monotone() -> Result<(bool, String)> {
    let ys = (0..30).map(|n| cardano_y(n, 10.0)).collect::<Result<Vec<_>>>()?;
    Ok((ys.windows(2).all(|w| w[1] > w[0]), "n = 0..29 at kappa = 10".into()))
}

fn uniformly_stable() -> Result<(bool, String)> {
    let v = [0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|&k| spectral_bound(k))
        .collect::<Result<Vec<_>>>()?;
    Ok((v.iter().all(|&s| s < 0.0), format!("omega0 = {v_s}", v_s = list(&v))))
}

fn decay_weakens_at_ends() -> Result<(bool, String)> {
    let s = kappa_sweep(&[0.01, 1.0, 1e4], 1)?;
    let w: Vec<f64> = s.rows.iter().map(|r| r.growth_bound).collect();
    Ok((s.weakens_at_ends(), format!("omega0 = {w_s}", w_s = list(&w))))
}

fn angle_limit() -> Result<(bool, String)> {
    let d = [10, 100, 1000]
        .iter()
        .map(|&n| Ok((quartic_branches(n, 1.0)?.lambda_i_plus.arg() - 2.0 * PI / 3.0).abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok((d[1] < d[0] && d[2] < d[1], format!("|arg - 2pi/3| = {d_s}", d_s = list(&d))))
}

fn mu_inverse_bound() -> Result<(bool, String)> {
    let g = Grid1D::new(8.0, 399)?;
    let mut worst: f64 = 0.0;
    for mu in [1.0, 2.0, 5.0, 10.0] {
        let n = resolvent_norm(&build_t(&quad(), &quad(), SpectralParameter::positive(mu)?, &g, Space::X)?)?.norm;
        worst = worst.max(n * mu * mu);
    }
    Ok((worst <= 1.0, format!("max mu^2 ||T(mu)^-1|| = {worst:.6}")))
}

fn half_power_bound() -> Result<(bool, String)> {
    let check = GraphCheck {
        bs: vec![],
        ..GraphCheck::default()
    };
    let r = verify_graph_inequalities(&quad(), &quad(), &check)?;
    let v = r
        .items
        .iter()
        .filter(|i| i.name == HQ_HALF_T_HALF)
        .map(|i| i.value.max(i.bank_value))
        .fold(0.0, f64::max);
    Ok((v <= 1.0 + 1e-8, format!("max ||Hq^1/2 T(mu)^-1/2|| = {v:.10}")))
}

fn rayleigh_dissipative() -> Result<(bool, String)> {
    let sys = oscillator(10.0, 5.0, 80)?;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..100 {
        let u = random_bump_state(&sys, 2, seed);
        let u: Vec<C64> = u.iter().enumerate().map(|(k, z)| z * C64::from_polar(1.0, k as f64)).collect();
        worst = worst.max(dot(sys.gram(), &u, &sys.apply(&u)).re / sys.gram().norm(&u).powi(2));
    }
    Ok((worst <= 1e-10, format!("max Re<Gu,u>_W / ||u||^2 = {worst:.3e}")))
}

fn generator_lower_bound() -> Result<(bool, String)> {
    let g = Grid1D::with_spacing(6.0, 1.0 / 200.0)?;
    let l = SpectralParameter::strip(0.5, 20.0)?;
    let sys = build_g(&quad(), &times(10.0), &g)?;
    let gn = generator_resolvent_norm(&sys, l)?.norm;
    let tn = resolvent_norm(&build_t(&quad(), &times(10.0), l, &g, Space::X)?)?.norm;
    Ok((gn >= 20.0 * tn * 0.95, format!("||(G-l)^-1|| = {gn:.5}, |b| ||T^-1|| = {:.5}", 20.0 * tn)))
}

fn contraction_and_decay() -> Result<(bool, String)> {
    let mut ok = true;
    let mut rates = Vec::new();
    for kappa in [0.5, 1.0, 10.0] {
        let sys = oscillator(kappa, 8.0, 200)?;
        let tr = evolve(&sys, &random_bump_state(&sys, 2, 3), 0.02, 30.0)?;
        ok &= tr.points.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
        let r = fit_decay_rate(&tr.points, 0.75)?.fitted_rate;
        ok &= r < 0.0;
        rates.push(r);
    }
    Ok((ok, format!("fitted rates {rates_s} at kappa = 0.5, 1, 10", rates_s = list(&rates))))
}

fn pencil_at_two() -> Result<(bool, String)> {
    let g = Grid1D::new(8.0, 799)?;
    let n = resolvent_norm(&build_t(&quad(), &zero(), SpectralParameter::positive(2.0)?, &g, Space::X)?)?.norm;
    Ok(((n - 1.0 / 6.0).abs() < 1e-3, format!("||T(2)^-1|| = {n:.6}")))
}

fn pencil_oracle() -> Result<(bool, String)> {
    let g = Grid1D::new(8.0, 399)?;
    let n = resolvent_norm(&build_t(&quad(), &quad(), SpectralParameter::positive(1.0)?, &g, Space::X)?)?.norm;
    let exact = 1.0 / (3f64.sqrt() + 1.0);
    Ok(((n - exact).abs() < 1e-3, format!("{n:.6} vs {exact:.6}")))
}

fn companion_oracle() -> Result<(bool, String)> {
    use ndarray::Array2;
    use ndarray_linalg::Eig;
    let mut worst: f64 = 0.0;
    for n in 0..10 {
        for k in 0..10 {
            let kappa = 0.5 * 100f64.powf(k as f64 / 9.0);
            let n2 = ((2 * n + 1) as f64).powi(2);
            let mut m = Array2::<f64>::zeros((4, 4));
            m[[0, 2]] = 2.0 * n2;
            m[[0, 3]] = n2 * kappa;
            for i in 1..4 {
                m[[i, i - 1]] = 1.0;
            }
            let mut theirs = m
                .eig()
                .map_err(|e| Error::Degenerate(format!("companion eigensolve failed: {e}")))?
                .0
                .to_vec();
            let mut ours = quartic_branches(n, kappa)?.all_roots().to_vec();
            let key = |a: &C64, b: &C64| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
            theirs.sort_by(key);
            ours.sort_by(key);
            for (x, y) in ours.iter().zip(&theirs) {
                worst = worst.max((x - y).norm() / y.norm().max(1.0));
            }
        }
    }
    Ok((worst <= 1e-9, format!("max mismatch {worst:.2e}")))
}

fn asymptotic_trend() -> Result<(bool, String)> {
    let e = [5, 20, 80]
        .iter()
        .map(|&n| {
            let exact = quartic_branches(n, 10.0)?.lambda_r;
            Ok((asymptotic_branches(n, 10.0)?.lambda_r - exact).abs() / exact.abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((e[1] < e[0] && e[2] < e[1], format!("relative errors {e_s}", e_s = list(&e))))
}

fn airy_routes() -> Result<(bool, String)> {
    let s = AiryOperatorSpec::new(quad(), 0.0)?;
    let k = airy_norm_kernel(&s, 8.0, 800)?.norm;
    let m = airy_norm_matrix(&s, &Grid1D::with_spacing(12.0, 0.02)?)?.norm;
    let d = (k - m).abs() / m;
    Ok((d <= 1e-3, format!("kernel {k:.5}, matrix {m:.5}")))
}

fn singular_sequence() -> Result<(bool, String)> {
    let bump = Mollifier::new();
    let p = [10, 20, 40]
        .iter()
        .map(|&n| singular_sequence_probe(10.0, -7.0, n, &bump))
        .collect::<Result<Vec<_>>>()?;
    let observed = p[0].residual / p[2].residual;
    let predicted = (p[0].rho_n / p[2].rho_n).sqrt();
    let ok = p[1].residual < p[0].residual
        && p[2].residual < p[1].residual
        && observed.max(predicted) / observed.min(predicted) <= 2.0;
    Ok((ok, format!("ratio {observed:.4} vs {predicted:.4}")))
}

fn discrete_spectrum() -> Result<Vec<(f64, f64)>> {
    let sys = oscillator(10.0, 12.0, 600)?;
    let spec = spectrum(&sys, 600)?;
    (0..5)
        .map(|n| {
            let b = quartic_branches(n, 10.0)?;
            let rel = |z: C64| spec.nearest(z).map_or(f64::INFINITY, |w| (w - z).norm() / z.norm());
            Ok((rel(b.lambda_i_plus).max(rel(b.lambda_i_minus)), rel(C64::new(b.lambda_r, 0.0))))
        })
        .collect()
}

fn complex_branches() -> Result<(bool, String)> {
    let worst = discrete_spectrum()?.iter().map(|p| p.0).fold(0.0, f64::max);
    Ok((worst <= 1e-3, format!("max relative error {worst:.2e}, n = 0..4")))
}

fn real_branches() -> Result<(bool, String)> {
    let worst = discrete_spectrum()?.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok((worst <= 1e-3, format!("max relative error {worst:.2e}, n = 0..4")))
}

fn generator_constancy() -> Result<(bool, String)> {
    let mut v = Vec::new();
    for b in [20.0, 40.0, 80.0] {
        let sys = build_g(&quad(), &times(1.0), &Grid1D::with_spacing(6.0, 0.1 / b)?)?;
        v.push(generator_resolvent_norm(&sys, SpectralParameter::strip(0.5, b)?)?.norm);
    }
    let spread = v.iter().copied().fold(f64::MIN, f64::max) / v.iter().copied().fold(f64::MAX, f64::min);
    Ok((spread < 1.5, format!("norms {v_s}", v_s = list(&v))))
}

fn pencil_trend() -> Result<(bool, String)> {
    let airy = AiryRoute::Given(AiryRoute::default().norm(&quad(), 0.5)?);
    let d = [20.0, 40.0, 80.0]
        .iter()
        .map(|&b| Ok((pencil_ratio(&quad(), &quad(), 0.5, b, &fourier_grid(b, 0.05)?, Space::Fourier, &airy)? - 1.0).abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok((d[1] < d[0] && d[2] < d[1] && d[2] < 0.1, format!("|R(b) - 1| = {d_s}", d_s = list(&d))))
}

fn decay_rate() -> Result<(bool, String)> {
    let sys = oscillator(10.0, 10.0, 500)?;
    let tr = evolve(&sys, &random_bump_state(&sys, 2, 3), 0.01, 60.0)?;
    let r = fit_decay_rate(&tr.points, 0.75)?.fitted_rate;
    Ok(((r + 0.158).abs() <= 0.0158, format!("fitted rate {r:.5}")))
}

fn mode_decay() -> Result<(bool, String)> {
    let sys = oscillator(10.0, 8.0, 250)?;
    let target = quartic_branches(0, 10.0)?.lambda_i_plus;
    let tr = evolve(&sys, &mode_state(&sys, target, 5)?, 0.01, 10.0)?;
    let r = fit_decay_rate(&tr.points, 0.75)?.fitted_rate;
    Ok(((r - target.re).abs() <= 0.01 * target.re.abs(), format!("{r:.5} vs {:.5}", target.re)))
}

fn level_monotone() -> Result<(bool, String)> {
    let curve = level_curve(&quad(), &zero(), 0.01, &[40.0, 80.0, 160.0], &LevelOptions::default())?;
    let c: Vec<f64> = curve.samples.iter().map(|s| s.c_numeric).collect();
    Ok((curve.increasing(), format!("c_b = {c_s}", c_s = list(&c))))
}

const CHECKS: &[(Suite, &str, &str, Check)] = &[
    (Suite::Trivial, "coeffs", "descriptor round trip", descriptor_roundtrip),
    (Suite::Trivial, "grids", "node layout", grid_layout),
    (Suite::Trivial, "quadratic", "identity sigma_min", identity_sigma),
    (Suite::Trivial, "quadratic", "T(conj l) = conj T(l)", pencil_conjugation),
    (Suite::Trivial, "quadratic", "R(b) = R(-b)", ratio_symmetry),
    (Suite::Trivial, "generator", "block structure", block_structure),
    (Suite::Trivial, "generator", "undamped spectrum imaginary", undamped_imaginary),
    (Suite::Trivial, "generator", "R_lambda right inverse", r_lambda_residual),
    (Suite::Trivial, "airy", "adjoint kernel is transpose", airy_adjoint_transpose),
    (Suite::Trivial, "oscillator_example", "cubic residual", cubic_grid),
    (Suite::Trivial, "oscillator_example", "sweep row count", sweep_rows),
    (Suite::Trivial, "semigroup", "undamped energy conserved", energy_conservation),
    (Suite::Paper, "oscillator_example", "reference values kappa = 10", exact_reference_values),
    (Suite::Paper, "oscillator_example", "y_n increasing", y_monotone),
    (Suite::Paper, "oscillator_example", "omega0 < 0", uniformly_stable),
    (Suite::Paper, "oscillator_example", "decay weakens at both kappa limits", decay_weakens_at_ends),
    (Suite::Paper, "oscillator_example", "arg lambda_i -> 2pi/3", angle_limit),
    (Suite::Paper, "quadratic", "||T(mu)^-1|| <= mu^-2", mu_inverse_bound),
    (Suite::Paper, "quadratic", "||Hq^1/2 T(mu)^-1/2|| <= 1", half_power_bound),
    (Suite::Paper, "generator", "Rayleigh dissipativity", rayleigh_dissipative),
    (Suite::Paper, "generator", "lower bound |b| ||T^-1||", generator_lower_bound),
    (Suite::Paper, "semigroup", "contraction and negative rate", contraction_and_decay),
    (Suite::Derived, "quadratic", "||T(2)^-1|| = 1/6", pencil_at_two),
    (Suite::Derived, "quadratic", "oscillator oracle at mu = 1", pencil_oracle),
    (Suite::Derived, "quadratic", "|R(b) - 1| decreasing", pencil_trend),
    (Suite::Derived, "quadratic", "level curve increasing", level_monotone),
    (Suite::Derived, "oscillator_example", "companion matrix roots", companion_oracle),
    (Suite::Derived, "oscillator_example", "asymptotic error decreasing", asymptotic_trend),
    (Suite::Derived, "airy", "kernel and matrix routes agree", airy_routes),
    (Suite::Derived, "generator", "singular sequence residual", singular_sequence),
    (Suite::Derived, "generator", "discrete complex branches", complex_branches),
    (Suite::Derived, "generator", "discrete real branches", real_branches),
    (Suite::Derived, "generator", "resolvent norm constancy", generator_constancy),
    (Suite::Derived, "semigroup", "decay rate kappa = 10", decay_rate),
    (Suite::Derived, "semigroup", "single-mode decay", mode_decay),
];

/// Runs every check of `suite` in a fixed order; errors count as failures.
pub fn run_suite(suite: Suite) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .filter(|(s, ..)| suite.includes(*s))
        .map(|&(s, module, name, check)| {
            let (pass, detail) = match check() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                suite: s,
                module,
                name,
                pass,
                detail,
            }
        })
        .collect()
}
