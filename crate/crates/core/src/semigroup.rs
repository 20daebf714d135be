//! Implicit-midpoint evolution of `u' = G u` and decay-rate fitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generator::GeneratorSystem;
use crate::linalg::{BandMatrix, BandSolver, InverseOperator, C64};
use crate::quadratic::SpectralParameter;

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.75;
pub const MIN_TRAJECTORY_LEN: usize = 50;
/// Norms at or below this are treated as underflowed.
const UNDERFLOW: f64 = 1e-280;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    /// `(t_k, ‖u_k‖_W)` for every step, starting at `t = 0`.
    pub points: Vec<(f64, f64)>,
    pub final_state: Vec<C64>,
}

/// `(I - dt/2 G)⁻¹`, eliminated onto the tridiagonal `I + dt·a + (dt/2)² H_q`.
struct MidpointStepper<'a> {
    sys: &'a GeneratorSystem,
    half: f64,
    schur: BandSolver,
}

impl<'a> MidpointStepper<'a> {
    fn new(sys: &'a GeneratorSystem, dt: f64) -> Result<Self> {
        let s = 0.5 * dt;
        let n = sys.grid().len();
        let mut m: BandMatrix = sys.hq().scale(C64::new(s * s, 0.0));
        for (i, a) in sys.damping_values().iter().enumerate() {
            m.add(i, i, C64::new(1.0 + 2.0 * s * a, 0.0));
        }
        debug_assert_eq!(m.dim(), n);
        Ok(Self {
            sys,
            half: s,
            schur: BandSolver::new(&m)?,
        })
    }

    fn step(&self, u: &[C64]) -> Vec<C64> {
        let n = self.sys.grid().len();
        let s = self.half;
        let gu = self.sys.apply(u);
        let r: Vec<C64> = u.iter().zip(&gu).map(|(u, g)| u + s * g).collect();
        let (r1, r2) = r.split_at(n);
        let hr1 = self.sys.hq().matvec(r1);
        let rhs: Vec<C64> = r2.iter().zip(&hr1).map(|(r, h)| r - s * h).collect();
        let v2 = self.schur.solve(&rhs);
        let mut v: Vec<C64> = r1.iter().zip(&v2).map(|(r, v)| r + s * v).collect();
        v.extend(v2);
        v
    }
}

/// Implicit midpoint from `u0` up to `t_end`, recording the energy norm at every step.
pub fn evolve(sys: &GeneratorSystem, u0: &[C64], dt: f64, t_end: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    if u0.len() != sys.dim() {
        return Err(Error::Precondition(format!(
            "initial state has length {}, expected {}",
            u0.len(),
            sys.dim()
        )));
    }
    let n0 = sys.gram().norm(u0);
    if n0 == 0.0 {
        return Err(Error::Precondition("initial state is zero".into()));
    }
    let stepper = MidpointStepper::new(sys, dt)?;
    let steps = (t_end / dt).round() as usize;
    let mut points = Vec::with_capacity(steps + 1);
    let mut u = u0.to_vec();
    points.push((0.0, n0));
    for k in 1..=steps {
        u = stepper.step(&u);
        points.push((k as f64 * dt, sys.gram().norm(&u)));
    }
    Ok(Trajectory {
        dt,
        points,
        final_state: u,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub fitted_rate: f64,
    pub prefactor: f64,
    /// RMS deviation of `log ‖u‖` from the affine fit on the window.
    pub fit_residual: f64,
    pub fit_window: (f64, f64),
    pub trajectory: Vec<(f64, f64)>,
}

/// Least-squares fit of `log ‖u(t)‖` on the trailing `window_fraction` of the trajectory.
pub fn fit_decay_rate(trajectory: &[(f64, f64)], window_fraction: f64) -> Result<DecayFit> {
    if trajectory.len() < MIN_TRAJECTORY_LEN {
        return Err(Error::Precondition(format!(
            "trajectory has {} points, need at least {MIN_TRAJECTORY_LEN}",
            trajectory.len()
        )));
    }
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(Error::Domain(format!("window fraction must lie in (0, 1), got {window_fraction}")));
    }
    let full = trajectory.len();
    let start = ((1.0 - window_fraction) * full as f64).floor() as usize;
    let valid = trajectory
        .iter()
        .position(|&(_, v)| !(v > UNDERFLOW))
        .unwrap_or(full);
    let (lo, hi) = if valid <= start {
        log::warn!("norm underflows at t = {} before the fit window; shortening", trajectory[valid.min(full - 1)].0);
        let lo = ((1.0 - window_fraction) * valid as f64).floor() as usize;
        (lo, valid)
    } else {
        (start, valid)
    };
    if hi < lo + 2 {
        return Err(Error::Degenerate("fewer than two usable points in the fit window".into()));
    }
    let pts: Vec<(f64, f64)> = trajectory[lo..hi].iter().map(|&(t, v)| (t, v.ln())).collect();
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok(DecayFit {
        fitted_rate: slope,
        prefactor: intercept.exp(),
        fit_residual: rms,
        fit_window: (pts[0].0, pts[pts.len() - 1].0),
        trajectory: trajectory.to_vec(),
    })
}

/// Sum of `bumps` Gaussian bumps times random quadratics in each component.
pub fn random_bump_state(sys: &GeneratorSystem, bumps: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = sys.grid().nodes();
    let reach = (0.3 * sys.grid().half_width()).max(1.0);
    let mut component = || {
        let mut v = vec![0.0; x.len()];
        for _ in 0..bumps {
            let c = rng.gen_range(-reach..reach);
            let w = rng.gen_range(0.5..1.5);
            let p: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            for (vi, &xi) in v.iter_mut().zip(&x) {
                *vi += (-((xi - c) / w).powi(2)).exp() * (p[0] + p[1] * xi + p[2] * xi * xi);
            }
        }
        v
    };
    let u1 = component();
    let u2 = component();
    u1.into_iter().chain(u2).map(|v| C64::new(v, 0.0)).collect()
}

/// Eigenvector of the discrete `G` nearest `target`, by shifted inverse iteration.
pub fn mode_state(sys: &GeneratorSystem, target: C64, seed: u64) -> Result<Vec<C64>> {
    let shift = SpectralParameter::from_complex(target)?;
    let inv = sys.shifted_inverse(shift)?;
    let mut u = random_bump_state(sys, 3, seed);
    let mut prev = f64::INFINITY;
    for _ in 0..50 {
        let v = inv.solve(&u);
        let nv = sys.gram().norm(&v);
        if !(nv > 0.0 && nv.is_finite()) {
            return Err(Error::Degenerate("inverse iteration lost the mode".into()));
        }
        let next: Vec<C64> = v.iter().map(|x| x / nv).collect();
        let diff = (1.0 / nv - prev).abs();
        prev = 1.0 / nv;
        u = next;
        if diff < 1e-14 {
            break;
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientFunction;
    use crate::generator::build_g;
    use crate::grids::Grid1D;
    use ndarray::Array2;

    fn osc(kappa: f64, l: f64, n: usize) -> GeneratorSystem {
        let a = CoefficientFunction::quadratic();
        let q = CoefficientFunction::scaled(a.clone(), kappa).unwrap();
        build_g(&a, &q, &Grid1D::new(l, n).unwrap()).unwrap()
    }

    #[test]
    fn step_matches_dense_midpoint() {
        use ndarray::Array1;
        use ndarray_linalg::Solve;
        let sys = osc(10.0, 5.0, 60);
        let dt = 0.05;
        let u = random_bump_state(&sys, 2, 1);
        let g = sys.to_dense().mapv(|v| C64::new(v, 0.0));
        let id = Array2::from_diag(&Array1::from_elem(120, C64::new(1.0, 0.0)));
        let lhs = &id - &(&g * C64::new(0.5 * dt, 0.0));
        let rhs = (&id + &(&g * C64::new(0.5 * dt, 0.0))).dot(&Array1::from(u.clone()));
        let direct = lhs.solve(&rhs).unwrap();
        let ours = MidpointStepper::new(&sys, dt).unwrap().step(&u);
        let err: f64 = direct.iter().zip(&ours).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12 * direct.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    #[test]
    fn contraction_at_every_step() {
        let sys = osc(10.0, 6.0, 150);
        let u0 = random_bump_state(&sys, 2, 7);
        let tr = evolve(&sys, &u0, 0.02, 10.0).unwrap();
        assert!(tr.points.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9)));
    }

    #[test]
    fn undamped_energy_is_conserved() {
        let a = CoefficientFunction::constant(0.0).unwrap();
        let q = CoefficientFunction::quadratic();
        let sys = build_g(&a, &q, &Grid1D::new(6.0, 120).unwrap()).unwrap();
        let u0 = random_bump_state(&sys, 2, 9);
        let tr = evolve(&sys, &u0, 0.01, 10.0).unwrap();
        assert_eq!(tr.points.len(), 1001);
        let n0 = tr.points[0].1;
        assert!(tr.points.iter().all(|p| (p.1 - n0).abs() <= 1e-8 * n0));
    }

    #[test]
    fn second_order_in_dt() {
        let sys = osc(1.0, 5.0, 100);
        let u0 = random_bump_state(&sys, 2, 11);
        let at1 = |dt: f64| {
            let tr = evolve(&sys, &u0, dt, 1.0).unwrap();
            tr.final_state
        };
        let (a, b, c) = (at1(0.04), at1(0.02), at1(0.01));
        let diff = |x: &[C64], y: &[C64]| {
            let d: Vec<C64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
            sys.gram().norm(&d)
        };
        let ratio = diff(&a, &b) / diff(&b, &c);
        assert!((ratio - 4.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let traj: Vec<(f64, f64)> = (0..200).map(|k| (k as f64 * 0.1, 3.0 * (-0.4 * k as f64 * 0.1).exp())).collect();
        let fit = fit_decay_rate(&traj, 0.75).unwrap();
        assert!((fit.fitted_rate + 0.4).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-10);
        assert!(fit.fit_residual < 1e-12);
        assert!((fit.fit_window.0 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn fit_validates_input() {
        let short: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 1.0)).collect();
        assert!(fit_decay_rate(&short, 0.5).is_err());
        let long: Vec<(f64, f64)> = (0..100).map(|k| (k as f64, 1.0)).collect();
        assert!(fit_decay_rate(&long, 1.0).is_err());
        assert!(fit_decay_rate(&long, 0.0).is_err());
    }

    #[test]
    fn fit_shortens_on_underflow() {
        let traj: Vec<(f64, f64)> = (0..100)
            .map(|k| (k as f64, if k < 20 { (-(k as f64)).exp() } else { 0.0 }))
            .collect();
        let fit = fit_decay_rate(&traj, 0.5).unwrap();
        assert!((fit.fitted_rate + 1.0).abs() < 1e-10);
        assert!(fit.fit_window.1 < 20.0);
    }

    #[test]
    fn evolve_validates_input() {
        let sys = osc(1.0, 3.0, 20);
        let u0 = random_bump_state(&sys, 1, 1);
        assert!(evolve(&sys, &u0, 0.0, 1.0).is_err());
        assert!(evolve(&sys, &u0[..10], 0.1, 1.0).is_err());
        assert!(evolve(&sys, &vec![C64::new(0.0, 0.0); 40], 0.1, 1.0).is_err());
    }

    #[test]
    fn single_mode_decays_at_its_rate() {
        let sys = osc(10.0, 8.0, 250);
        let target = crate::oscillator::quartic_branches(0, 10.0).unwrap().lambda_i_plus;
        let u0 = mode_state(&sys, target, 5).unwrap();
        let tr = evolve(&sys, &u0, 0.01, 10.0).unwrap();
        let fit = fit_decay_rate(&tr.points, 0.75).unwrap();
        assert!((fit.fitted_rate - target.re).abs() < 0.01 * target.re.abs(), "{}", fit.fitted_rate);
    }
}
