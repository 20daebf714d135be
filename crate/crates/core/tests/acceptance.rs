//! Acceptance criteria AC1-AC10, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed; the process
//! exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use ndarray::Array2;
use ndarray_linalg::Eig;

use resolvent_lab::airy::{
    airy_asymptotic_log_norm, airy_norm_kernel, airy_norm_matrix, AiryOperatorSpec, AsymptoticFamily,
};
use resolvent_lab::generator::{build_g, generator_resolvent_norm, singular_sequence_probe, spectrum, Mollifier};
use resolvent_lab::oscillator::{quartic_branches, spectrum_exact};
use resolvent_lab::quadratic::{
    build_t, fourier_grid, level_curve, pencil_ratio, resolvent_norm, verify_graph_inequalities, AiryRoute,
    GraphCheck, LevelOptions, SpectralParameter, HQ_HALF_T_HALF,
};
use resolvent_lab::semigroup::{evolve, fit_decay_rate, random_bump_state};
use resolvent_lab::{CoefficientFunction, Grid1D, Space, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn quad() -> CoefficientFunction {
    CoefficientFunction::quadratic()
}

fn oscillator_potential(kappa: f64) -> CoefficientFunction {
    CoefficientFunction::scaled(quad(), kappa).unwrap()
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let s = spectrum_exact(10.0, 20).unwrap();
    let sup_r = s
        .eigenvalues
        .iter()
        .filter(|e| e.value.im == 0.0)
        .map(|e| e.value.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let sup_i = s
        .eigenvalues
        .iter()
        .filter(|e| e.value.im != 0.0)
        .map(|e| e.value.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let pass = (sup_r + 1.61326).abs() <= 1e-4
        && (sup_i + 0.15809).abs() <= 1e-4
        && s.essential_ray_end == Some(-5.0)
        && secs < 1.0;
    outcome(
        pass,
        format!(
            "sup lambda_r = {sup_r:.6}, sup Re lambda_i = {sup_i:.6}, ray end = {:?}, {secs:.3} s",
            s.essential_ray_end
        ),
    )
}

fn companion_roots(n: usize, kappa: f64) -> Vec<C64> {
    let n2 = ((2 * n + 1) as f64).powi(2);
    let mut m = Array2::<f64>::zeros((4, 4));
    m[[0, 2]] = 2.0 * n2;
    m[[0, 3]] = n2 * kappa;
    for i in 1..4 {
        m[[i, i - 1]] = 1.0;
    }
    m.eig().unwrap().0.to_vec()
}

fn sort_roots(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn ac2() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 0..10 {
        for k in 0..10 {
            let kappa = 0.5 * 100f64.powf(k as f64 / 9.0);
            let ours = sort_roots(quartic_branches(n, kappa).unwrap().all_roots().to_vec());
            let theirs = sort_roots(companion_roots(n, kappa));
            for (x, y) in ours.iter().zip(&theirs) {
                worst = worst.max((x - y).norm() / y.norm().max(1.0));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 5.0,
        format!("max relative root mismatch {worst:.2e} over 100 quartics, {secs:.3} s"),
    )
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let kappa = 10.0;
    let sys = build_g(&quad(), &oscillator_potential(kappa), &Grid1D::new(12.0, 600).unwrap()).unwrap();
    let spec = spectrum(&sys, 600).unwrap();
    let rel = |z: C64| spec.nearest(z).map_or(f64::INFINITY, |w| (w - z).norm() / z.norm());
    let (mut worst_i, mut worst_r): (f64, f64) = (0.0, 0.0);
    for n in 0..5 {
        let b = quartic_branches(n, kappa).unwrap();
        worst_i = worst_i.max(rel(b.lambda_i_plus)).max(rel(b.lambda_i_minus));
        worst_r = worst_r.max(rel(C64::new(b.lambda_r, 0.0)));
    }
    let min_re = spec.retained().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_i <= 1e-3 && worst_r <= 1e-3 && min_re > 1e-6 && secs < 120.0;
    outcome(
        pass,
        format!(
            "complex branches rel err {worst_i:.2e}, real branches rel err {worst_r:.2e}, min |Re| {min_re:.3e}, {secs:.1} s"
        ),
    )
}

fn ac4() -> Outcome {
    let start = Instant::now();
    let (a, c) = (quad(), 0.5);
    let airy = AiryRoute::Given(
        AiryRoute::default().norm(&a, c).unwrap(),
    );
    let dev: Vec<f64> = [20.0, 40.0, 80.0]
        .iter()
        .map(|&b| {
            let grid = fourier_grid(b, 0.05).unwrap();
            (pencil_ratio(&a, &a, c, b, &grid, Space::Fourier, &airy).unwrap() - 1.0).abs()
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let pass = dev[1] < dev[0] && dev[2] < dev[1] && dev[2] < 0.1 && secs < 300.0;
    outcome(
        pass,
        format!(
            "|R(b)-1| = {:.3e}, {:.3e}, {:.3e} at b = 20, 40, 80, {secs:.1} s",
            dev[0], dev[1], dev[2]
        ),
    )
}

fn ac5() -> Outcome {
    let start = Instant::now();
    let (a, q) = (quad(), oscillator_potential(1.0));
    let mut norms = Vec::new();
    let mut worst_slack: f64 = 0.0;
    for b in [20.0, 40.0, 80.0] {
        let grid = Grid1D::with_spacing(6.0, 0.1 / b).unwrap();
        let lambda = SpectralParameter::strip(0.5, b).unwrap();
        let sys = build_g(&a, &q, &grid).unwrap();
        let g = generator_resolvent_norm(&sys, lambda).unwrap().norm;
        let t = resolvent_norm(&build_t(&a, &q, lambda, &grid, Space::X).unwrap()).unwrap().norm;
        worst_slack = worst_slack.max(1.0 - g / (b * t));
        norms.push(g);
    }
    let spread = norms.iter().copied().fold(f64::MIN, f64::max) / norms.iter().copied().fold(f64::MAX, f64::min);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        spread < 1.5 && worst_slack <= 0.05,
        format!(
            "norms {:.5}, {:.5}, {:.5} (spread {spread:.4}), lower-bound slack {worst_slack:.2e}, {secs:.1} s",
            norms[0], norms[1], norms[2]
        ),
    )
}

fn ac6() -> Outcome {
    let a = quad();
    let grid = Grid1D::new(8.0, 399).unwrap();
    let mut ok = true;
    let mut worst_mu: f64 = 0.0;
    for mu in [1.0, 2.0, 5.0, 10.0] {
        let t = build_t(&a, &a, SpectralParameter::positive(mu).unwrap(), &grid, Space::X).unwrap();
        let n = resolvent_norm(&t).unwrap().norm;
        worst_mu = worst_mu.max(n * mu * mu);
        ok &= n <= mu.powi(-2);
    }
    let check = GraphCheck {
        bs: vec![],
        ..GraphCheck::default()
    };
    let report = verify_graph_inequalities(&a, &a, &check).unwrap();
    let half = report
        .items
        .iter()
        .filter(|i| i.name == HQ_HALF_T_HALF)
        .map(|i| i.value.max(i.bank_value))
        .fold(0.0, f64::max);
    ok &= report.constant_free_pass() && half <= 1.0 + 1e-8;
    let t1 = build_t(&a, &a, SpectralParameter::positive(1.0).unwrap(), &grid, Space::X).unwrap();
    let exact = 1.0 / (3f64.sqrt() + 1.0);
    let err = (resolvent_norm(&t1).unwrap().norm - exact).abs();
    ok &= err <= 1e-3;
    outcome(
        ok,
        format!("max mu^2 ||T(mu)^-1|| = {worst_mu:.6}, max ||Hq^1/2 T^-1/2|| = {half:.10}, oracle error {err:.2e}"),
    )
}

fn ac7() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_adj: f64 = 0.0;
    let mut values = Vec::new();
    for c in [0.0, 0.5, 1.0, 2.0] {
        let spec = AiryOperatorSpec::new(quad(), c).unwrap();
        let k = airy_norm_kernel(&spec, 8.0, 1200).unwrap().norm;
        let m = airy_norm_matrix(&spec, &Grid1D::with_spacing(12.0, 0.02).unwrap()).unwrap().norm;
        let ka = airy_norm_kernel(&spec.adjoint(), 8.0, 1200).unwrap().norm;
        worst = worst.max((k - m).abs() / m);
        worst_adj = worst_adj.max((k - ka).abs() / k);
        values.push(format!("{m:.5}"));
    }
    let logs: Vec<f64> = [2.0, 4.0, 6.0]
        .iter()
        .map(|&c| {
            let spec = AiryOperatorSpec::new(quad(), c).unwrap();
            let numeric = airy_norm_kernel(&spec, 8.0, 800).unwrap().norm;
            (numeric.ln() - airy_asymptotic_log_norm(AsymptoticFamily::MonomialP(2), c).unwrap()).abs()
        })
        .collect();
    let trend = logs[1] < logs[0] && logs[2] < logs[1];
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-3 && worst_adj <= 1e-6 && trend,
        format!(
            "norms [{}], route mismatch {worst:.2e}, adjoint mismatch {worst_adj:.2e}, |log ratio| {:.4}, {:.4}, {:.4}, {secs:.1} s",
            values.join(", "),
            logs[0],
            logs[1],
            logs[2]
        ),
    )
}

fn ac8() -> Outcome {
    let bump = Mollifier::new();
    let p: Vec<_> = [10, 20, 40]
        .iter()
        .map(|&n| singular_sequence_probe(10.0, -7.0, n, &bump).unwrap())
        .collect();
    let decreasing = p[1].residual < p[0].residual && p[2].residual < p[1].residual;
    let observed = p[0].residual / p[2].residual;
    let predicted = (p[0].rho_n / p[2].rho_n).sqrt();
    let factor = (observed / predicted).max(predicted / observed);
    outcome(
        decreasing && factor <= 2.0,
        format!(
            "residuals {:.4e}, {:.4e}, {:.4e}; ratio n=10/40 {observed:.4} vs sqrt(rho ratio) {predicted:.4}",
            p[0].residual, p[1].residual, p[2].residual
        ),
    )
}

fn ac9() -> Outcome {
    let start = Instant::now();
    let kappa = 10.0;
    let sys = build_g(&quad(), &oscillator_potential(kappa), &Grid1D::new(10.0, 500).unwrap()).unwrap();
    let u0 = random_bump_state(&sys, 2, 3);
    let tr = evolve(&sys, &u0, 0.01, 60.0).unwrap();
    let fit = fit_decay_rate(&tr.points, 0.75).unwrap();
    let contraction = tr.points.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    let undamped = build_g(
        &CoefficientFunction::constant(0.0).unwrap(),
        &oscillator_potential(kappa),
        &Grid1D::new(10.0, 500).unwrap(),
    )
    .unwrap();
    let u1 = random_bump_state(&undamped, 2, 3);
    let tr0 = evolve(&undamped, &u1, 0.01, 10.0).unwrap();
    let e0 = tr0.points[0].1;
    let drift = tr0.points.iter().map(|p| (p.1 - e0).abs() / e0).fold(0.0, f64::max);
    let rel = (fit.fitted_rate + 0.158).abs() / 0.158;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rel <= 0.1 && contraction && drift <= 1e-8,
        format!(
            "fitted rate {:.5} (rel dev {rel:.2e}), contraction {contraction}, undamped drift {drift:.2e}, {secs:.1} s",
            fit.fitted_rate
        ),
    )
}

fn ac10() -> Outcome {
    let start = Instant::now();
    let a = quad();
    let q = CoefficientFunction::constant(0.0).unwrap();
    let curve = level_curve(&a, &q, 0.01, &[40.0, 80.0, 160.0], &LevelOptions::default()).unwrap();
    let rows: Vec<String> = curve
        .samples
        .iter()
        .map(|s| {
            format!(
                "b={} c={:.4} closed={:.4} phi={:.4}",
                s.b,
                s.c_numeric,
                s.c_closed_form.unwrap_or(f64::NAN),
                s.phi_b
            )
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(curve.increasing(), format!("{}; {secs:.1} s", rows.join("; ")))
}

fn main() -> ExitCode {
    let filter: Option<String> = std::env::args().skip(1).find(|a| a.starts_with("AC"));
    let criteria: [Criterion; 10] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        if filter.as_deref().is_some_and(|f| f != name) {
            continue;
        }
        let o = run();
        println!("{name} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
