//! Closed-form spectrum for `a = x²`, `q = κ x²`.
//!
//! With `N = 2n + 1`, eigenvalues of `G` solve `λ⁴ - 2N²λ - N²κ = 0`. The
//! resolvent cubic `y³ + N²κ y - N⁴/2 = 0` has one positive root `y_n`, and the
//! quartic splits into two real quadratics in terms of it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::generator::{EigenTag, SpectrumMethod, SpectrumResult, TaggedEigenvalue};
use crate::linalg::C64;

/// Branch indices scanned when taking suprema over `n`.
pub const SAFETY_SCAN: usize = 50;
/// Relative tolerance on quartic residuals.
pub const QUARTIC_TOL: f64 = 1e-9;

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("kappa must be positive and finite, got {kappa}")))
    }
}

fn odd(n: usize) -> f64 {
    (2 * n + 1) as f64
}

/// `κ_n = (16/27) κ³ N⁻²`.
pub fn kappa_n(n: usize, kappa: f64) -> f64 {
    16.0 / 27.0 * kappa.powi(3) / odd(n).powi(2)
}

/// Positive root of the resolvent cubic.
pub fn cardano_y(n: usize, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let nn = odd(n);
    let kn = kappa_n(n, kappa);
    let r = (1.0 + kn).sqrt();
    let hi = (r + 1.0).cbrt();
    let lo = (kn / (r + 1.0)).cbrt();
    // hi - lo with hi³ - lo³ = 2
    let diff = 2.0 / (hi * hi + hi * lo + lo * lo);
    Ok(2f64.powf(-2.0 / 3.0) * nn.powf(4.0 / 3.0) * diff)
}

/// `y³ + N²κ y - N⁴/2`.
pub fn cubic_residual(n: usize, kappa: f64, y: f64) -> f64 {
    let n2 = odd(n).powi(2);
    y.powi(3) + n2 * kappa * y - 0.5 * n2 * n2
}

/// `λ⁴ - 2N²λ - N²κ`.
pub fn quartic(n: usize, kappa: f64, lambda: C64) -> C64 {
    let n2 = odd(n).powi(2);
    lambda.powi(4) - 2.0 * n2 * lambda - n2 * kappa
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticBranches {
    pub n: usize,
    pub kappa: f64,
    pub y: f64,
    /// Admissible real root, in `(-κ/2, 0)`.
    pub lambda_r: f64,
    /// Upper half-plane root of the complex pair.
    pub lambda_i_plus: C64,
    pub lambda_i_minus: C64,
    /// Positive real root, not an eigenvalue.
    pub discarded_root: f64,
}

impl QuarticBranches {
    pub fn admissible(&self) -> [C64; 3] {
        [C64::new(self.lambda_r, 0.0), self.lambda_i_plus, self.lambda_i_minus]
    }

    pub fn all_roots(&self) -> [C64; 4] {
        let [r, p, m] = self.admissible();
        [r, p, m, C64::new(self.discarded_root, 0.0)]
    }

    pub fn max_residual(&self) -> f64 {
        self.all_roots()
            .iter()
            .map(|&z| quartic(self.n, self.kappa, z).norm() / z.norm().powi(4).max(1.0))
            .fold(0.0, f64::max)
    }
}

fn newton(n: usize, kappa: f64, z: C64) -> C64 {
    let n2 = odd(n).powi(2);
    let d = 4.0 * z.powi(3) - 2.0 * n2;
    if d.norm() == 0.0 {
        z
    } else {
        z - quartic(n, kappa, z) / d
    }
}

/// All four roots through the resolvent cubic, each polished by one Newton step.
pub fn quartic_branches(n: usize, kappa: f64) -> Result<QuarticBranches> {
    let y = cardano_y(n, kappa)?;
    let n2 = odd(n).powi(2);
    let s = (2.0 * y).sqrt();
    let t = 2.0 * n2 / (y * s);
    let y_minus = (t - 1.0).sqrt();
    let y_plus = (t + 1.0).sqrt();
    let lambda_r = newton(n, kappa, C64::new(0.5 * s * (1.0 - y_minus), 0.0)).re;
    let discarded_root = newton(n, kappa, C64::new(0.5 * s * (1.0 + y_minus), 0.0)).re;
    let lambda_i_plus = newton(n, kappa, C64::new(-0.5 * s, 0.5 * s * y_plus));
    let b = QuarticBranches {
        n,
        kappa,
        y,
        lambda_r,
        lambda_i_plus,
        lambda_i_minus: lambda_i_plus.conj(),
        discarded_root,
    };
    let res = b.max_residual();
    if res > QUARTIC_TOL {
        return Err(Error::Convergence {
            iterations: 1,
            residual: res,
        });
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticBranches {
    pub lambda_r: f64,
    pub modulus: f64,
    /// Angle of `λ_n^i` measured from the negative real axis.
    pub theta: f64,
}

impl AsymptoticBranches {
    pub fn arg(&self) -> f64 {
        PI - self.theta
    }
}

/// Leading term plus first correction of each branch for large `n`.
pub fn asymptotic_branches(n: usize, kappa: f64) -> Result<AsymptoticBranches> {
    check_kappa(kappa)?;
    let nn = odd(n);
    let m23 = nn.powf(-2.0 / 3.0);
    Ok(AsymptoticBranches {
        lambda_r: -0.5 * kappa * (1.0 - 2f64.powf(-8.0 / 3.0) / 3.0 * kappa * kappa * m23 * m23),
        modulus: 2f64.cbrt() * nn.powf(2.0 / 3.0) * (1.0 - 2f64.powf(-7.0 / 3.0) / 3.0 * kappa * m23),
        theta: (3f64.sqrt() * (1.0 + 2f64.powf(-1.0 / 3.0) / 3.0 * kappa * m23)).atan(),
    })
}

/// Spectral bound `max(sup λ_n^r, sup Re λ_n^i)`, equal to the growth bound.
pub fn spectral_bound(kappa: f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for n in 0..=SAFETY_SCAN {
        let b = quartic_branches(n, kappa)?;
        best = best.max(b.lambda_r).max(b.lambda_i_plus.re);
    }
    let b0 = quartic_branches(0, kappa)?;
    let at_zero = b0.lambda_r.max(b0.lambda_i_plus.re);
    if at_zero < best {
        log::warn!("supremum not attained at n = 0 for kappa = {kappa}");
    }
    Ok(best)
}

/// Eigenvalues for `n = 0..=n_max` plus the essential ray `(-∞, -κ/2]`.
pub fn spectrum_exact(kappa: f64, n_max: usize) -> Result<SpectrumResult> {
    let mut eigenvalues = Vec::with_capacity(3 * (n_max + 1));
    for n in 0..=n_max {
        for value in quartic_branches(n, kappa)?.admissible() {
            eigenvalues.push(TaggedEigenvalue {
                value,
                tag: EigenTag::Eigenvalue,
                boundary_mass: 0.0,
            });
        }
    }
    eigenvalues.sort_by(|a, b| b.value.re.total_cmp(&a.value.re).then(b.value.im.total_cmp(&a.value.im)));
    Ok(SpectrumResult {
        eigenvalues,
        essential_ray_end: Some(-0.5 * kappa),
        spectral_bound: spectral_bound(kappa)?,
        method: SpectrumMethod::ExactQuartic,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaRow {
    pub kappa: f64,
    pub y0: f64,
    pub branches: Vec<QuarticBranches>,
    pub spectral_bound: f64,
    pub growth_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaSweep {
    pub rows: Vec<KappaRow>,
}

impl KappaSweep {
    /// Whether `ω₀` at both ends of the sweep is weaker than somewhere inside.
    pub fn weakens_at_ends(&self) -> bool {
        let Some(best) = self.rows.iter().map(|r| r.growth_bound).min_by(f64::total_cmp) else {
            return false;
        };
        let first = self.rows.first().map(|r| r.growth_bound).unwrap_or(best);
        let last = self.rows.last().map(|r| r.growth_bound).unwrap_or(best);
        first > best && last > best
    }
}

pub fn kappa_sweep(kappas: &[f64], n_count: usize) -> Result<KappaSweep> {
    if kappas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("kappa list must be strictly increasing".into()));
    }
    let rows = kappas
        .iter()
        .map(|&kappa| {
            let branches = (0..n_count)
                .map(|n| quartic_branches(n, kappa))
                .collect::<Result<Vec<_>>>()?;
            let s = spectral_bound(kappa)?;
            Ok(KappaRow {
                kappa,
                y0: cardano_y(0, kappa)?,
                branches,
                spectral_bound: s,
                growth_bound: s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KappaSweep { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use ndarray_linalg::Eig;
    use proptest::prelude::*;

    fn companion_roots(n: usize, kappa: f64) -> Vec<C64> {
        let n2 = odd(n).powi(2);
        // monic λ⁴ + 0λ³ + 0λ² - 2N²λ - N²κ
        let coeffs = [0.0, 0.0, -2.0 * n2, -n2 * kappa];
        let mut m = Array2::<f64>::zeros((4, 4));
        for j in 0..4 {
            m[[0, j]] = -coeffs[j];
        }
        for i in 1..4 {
            m[[i, i - 1]] = 1.0;
        }
        let (vals, _) = m.eig().unwrap();
        vals.to_vec()
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn y0_at_kappa_10() {
        let y = cardano_y(0, 10.0).unwrap();
        // bisection on the cubic as an independent root finder
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cubic_residual(0, 10.0, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((y - lo).abs() < 1e-14);
        assert!((y - 0.04998).abs() < 1e-4);
    }

    #[test]
    fn cubic_residual_grid() {
        for n in 0..10 {
            for k in 0..10 {
                let kappa = 0.1 * 3f64.powi(k);
                let y = cardano_y(n, kappa).unwrap();
                let scale = 0.5 * odd(n).powi(4);
                assert!(cubic_residual(n, kappa, y).abs() <= 1e-10 * scale, "{n} {kappa}");
                assert!(y > 0.0 && y < 2f64.powf(-1.0 / 3.0) * odd(n).powf(4.0 / 3.0));
            }
        }
    }

    #[test]
    fn y_increases_in_n() {
        for kappa in [0.5, 10.0, 300.0] {
            let ys: Vec<f64> = (0..20).map(|n| cardano_y(n, kappa).unwrap()).collect();
            assert!(ys.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn rejects_bad_kappa() {
        assert!(matches!(cardano_y(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(quartic_branches(1, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn reference_values_at_kappa_10() {
        let b = quartic_branches(0, 10.0).unwrap();
        assert!((b.lambda_r + 1.61326).abs() < 1e-4);
        assert!((b.lambda_i_plus.re + 0.15809).abs() < 1e-4);
        assert!(b.lambda_i_plus.im > 0.0);
        assert!(b.discarded_root > 0.0);
        let s = spectrum_exact(10.0, 20).unwrap();
        assert_eq!(s.essential_ray_end, Some(-5.0));
        assert!((s.spectral_bound + 0.15809).abs() < 1e-4);
    }

    #[test]
    fn companion_matrix_agrees() {
        for n in 0..10 {
            for kappa in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
                let b = quartic_branches(n, kappa).unwrap();
                let ours = sorted(b.all_roots().to_vec());
                let theirs = sorted(companion_roots(n, kappa));
                for (x, y) in ours.iter().zip(&theirs) {
                    assert!((x - y).norm() <= 1e-9 * y.norm().max(1.0), "{n} {kappa}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn asymptotic_errors_shrink() {
        let err = |n| {
            let e = quartic_branches(n, 10.0).unwrap().lambda_r;
            (asymptotic_branches(n, 10.0).unwrap().lambda_r - e).abs() / e.abs()
        };
        assert!(err(20) < err(5) && err(80) < err(20));
        let a: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| (quartic_branches(n, 1.0).unwrap().lambda_i_plus.arg() - 2.0 * PI / 3.0).abs())
            .collect();
        assert!(a[1] < a[0] && a[2] < a[1]);
        let r: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| asymptotic_branches(n, 10.0).unwrap().lambda_r)
            .collect();
        assert!(r.iter().all(|&x| x > -5.0) && r[0] > r[1] && r[1] > r[2]);
    }

    #[test]
    fn asymptotic_modulus_and_angle_track_exact() {
        let n = 200;
        let e = quartic_branches(n, 1.0).unwrap().lambda_i_plus;
        let a = asymptotic_branches(n, 1.0).unwrap();
        assert!((a.modulus - e.norm()).abs() / e.norm() < 1e-3);
        assert!((a.arg() - e.arg()).abs() < 1e-2);
    }

    #[test]
    fn kappa_sweep_limits() {
        let sweep = kappa_sweep(&[0.01, 1.0, 10000.0], 5).unwrap();
        assert_eq!(sweep.rows.len(), 3);
        assert!(sweep.weakens_at_ends());
        for row in &sweep.rows {
            assert!(row.growth_bound < 0.0);
            assert_eq!(row.branches.len(), 5);
        }
        let ys: Vec<f64> = [1e2, 1e4, 1e6].iter().map(|&k| cardano_y(0, k).unwrap()).collect();
        assert!(ys[1] < ys[0] && ys[2] < ys[1] && ys[2] < 1e-5);
        assert!(kappa_sweep(&[2.0, 1.0], 3).is_err());
    }

    #[test]
    fn stable_for_all_kappa() {
        for kappa in [0.1, 1.0, 10.0, 100.0] {
            assert!(spectral_bound(kappa).unwrap() < 0.0);
        }
    }

    proptest! {
        #[test]
        fn admissibility(n in 0usize..40, lk in -2.0f64..3.0) {
            let kappa = 10f64.powf(lk);
            let b = quartic_branches(n, kappa).unwrap();
            prop_assert!(b.lambda_r < 0.0 && b.lambda_r > -0.5 * kappa);
            prop_assert!(b.lambda_i_plus.re < 0.0);
            prop_assert_eq!(b.lambda_i_minus, b.lambda_i_plus.conj());
            prop_assert!(b.discarded_root > 0.0);
            prop_assert!(b.max_residual() <= QUARTIC_TOL);
        }
    }
}
