//! The damped-wave generator `G = [[0, I], [-H_q, -2a]]` in the energy norm.
//!
//! Solves with `G - λ` reduce to one pencil solve `T(λ)`, so resolvent norms of
//! large systems run on banded factorizations. Small systems and full spectra
//! use dense LAPACK.

use std::fmt;

use ndarray::{s, Array2};
use ndarray_linalg::{Eig, Inverse};

use crate::coeffs::CoefficientFunction;
use crate::error::{Error, Result};
use crate::grids::{
    boundary_mass, build_energy_gram, build_hq, DiscreteOperator, EnergyGram, Grid1D, NormTag, Space,
    BOUNDARY_MASS_TOL,
};
use crate::linalg::{
    dense_sigma_min, sigma_min_iterative, BandMatrix, BandSolver, InverseOperator, IterationOptions, C64,
};
use crate::quadratic::{build_t, SpectralParameter};

/// Systems with `2N` up to this size use the dense conjugated SVD.
pub const DENSE_RESOLVENT_LIMIT: usize = 400;
/// Eigenvalues with `|λ| h` above this are grid-scale.
pub const RESOLUTION_LIMIT: f64 = 0.5;
/// Distance to the essential ray below which a mode may belong to it.
pub const RAY_TOL: f64 = 1e-2;
/// Allowed positive real part of a discrete eigenvalue.
pub const DISSIPATIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GeneratorSystem {
    a: CoefficientFunction,
    q: CoefficientFunction,
    grid: Grid1D,
    hq: BandMatrix,
    damping: Vec<f64>,
    gram: EnergyGram,
}

pub fn build_g(a: &CoefficientFunction, q: &CoefficientFunction, grid: &Grid1D) -> Result<GeneratorSystem> {
    let gram = build_energy_gram(q, grid)?;
    Ok(GeneratorSystem {
        a: a.clone(),
        q: q.clone(),
        grid: grid.clone(),
        hq: build_hq(q, grid).matrix,
        damping: grid.nodes().iter().map(|&x| a.eval(x)).collect(),
        gram,
    })
}

impl GeneratorSystem {
    pub fn damping(&self) -> &CoefficientFunction {
        &self.a
    }

    pub fn potential(&self) -> &CoefficientFunction {
        &self.q
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn gram(&self) -> &EnergyGram {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        2 * self.grid.len()
    }

    /// Tridiagonal `H_q`.
    pub fn hq(&self) -> &BandMatrix {
        &self.hq
    }

    /// `a` sampled at the grid nodes.
    pub fn damping_values(&self) -> &[f64] {
        &self.damping
    }

    /// `G u`.
    pub fn apply(&self, u: &[C64]) -> Vec<C64> {
        let n = self.grid.len();
        let hu = self.hq.matvec(&u[..n]);
        let mut out = u[n..].to_vec();
        out.extend((0..n).map(|j| -hu[j] - 2.0 * self.damping[j] * u[n + j]));
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.grid.len();
        let mut g = Array2::zeros((2 * n, 2 * n));
        let h = self.hq.to_dense_real();
        g.slice_mut(s![n.., ..n]).assign(&(-&h));
        for j in 0..n {
            g[[j, n + j]] = 1.0;
            g[[n + j, n + j]] = -2.0 * self.damping[j];
        }
        g
    }

    /// `G` as a band operator in the energy norm.
    pub fn to_operator(&self) -> DiscreteOperator {
        let n = self.grid.len();
        let mut m = BandMatrix::zeros(2 * n, n + 1, n);
        for i in 0..n {
            m.set(i, n + i, C64::new(1.0, 0.0));
            m.set(n + i, n + i, C64::new(-2.0 * self.damping[i], 0.0));
            for j in i.saturating_sub(1)..(i + 2).min(n) {
                m.set(n + i, j, -self.hq.get(i, j));
            }
        }
        DiscreteOperator::new(m, self.grid.clone(), Space::X, NormTag::Energy).expect("block dimension")
    }

    /// Factorization of `G - λ` through `T(λ)`.
    pub fn shifted_inverse(&self, lambda: SpectralParameter) -> Result<ShiftedInverse<'_>> {
        let t = build_t(&self.a, &self.q, lambda, &self.grid, Space::X)?;
        Ok(ShiftedInverse {
            sys: self,
            lambda: lambda.lambda(),
            pencil: BandSolver::new(&t.matrix)?,
        })
    }
}

/// `(G - λ)^{-1}` and its Euclidean adjoint, each costing one pencil solve.
pub struct ShiftedInverse<'a> {
    sys: &'a GeneratorSystem,
    lambda: C64,
    pencil: BandSolver,
}

impl ShiftedInverse<'_> {
    fn damp(&self, shift: C64, v: &[C64]) -> Vec<C64> {
        v.iter()
            .zip(&self.sys.damping)
            .map(|(x, a)| (2.0 * a + shift) * x)
            .collect()
    }

    /// Block inverse `R_λ (v₁, v₂)` in component form.
    pub fn apply_r(&self, v1: &[C64], v2: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let l = self.lambda;
        let w = self.pencil.solve(&self.sys.hq.matvec(v1));
        let z = self.pencil.solve(v2);
        let u1 = v1
            .iter()
            .zip(&w)
            .zip(&z)
            .map(|((v, w), z)| -(v - w) / l - z)
            .collect();
        let u2 = w.iter().zip(&z).map(|(w, z)| w - l * z).collect();
        (u1, u2)
    }
}

impl InverseOperator for ShiftedInverse<'_> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn solve(&self, f: &[C64]) -> Vec<C64> {
        let n = self.sys.grid.len();
        let (f1, f2) = f.split_at(n);
        let rhs: Vec<C64> = self
            .damp(self.lambda, f1)
            .iter()
            .zip(f2)
            .map(|(d, g)| -g - d)
            .collect();
        let u1 = self.pencil.solve(&rhs);
        let mut out: Vec<C64> = f1.iter().zip(&u1).map(|(f, u)| f + self.lambda * u).collect();
        out.splice(0..0, u1);
        out
    }

    fn solve_adjoint(&self, f: &[C64]) -> Vec<C64> {
        let n = self.sys.grid.len();
        let (f1, f2) = f.split_at(n);
        let lc = self.lambda.conj();
        let rhs: Vec<C64> = f1.iter().zip(f2).map(|(a, b)| -a - lc * b).collect();
        let u2 = self.pencil.solve_adjoint(&rhs);
        let mut out: Vec<C64> = f2.iter().zip(self.damp(lc, &u2)).map(|(f, d)| f + d).collect();
        out.extend(u2);
        out
    }
}

/// `R_λ (v₁, v₂)`.
pub fn apply_r_lambda(
    sys: &GeneratorSystem,
    lambda: SpectralParameter,
    v1: &[C64],
    v2: &[C64],
) -> Result<(Vec<C64>, Vec<C64>)> {
    Ok(sys.shifted_inverse(lambda)?.apply_r(v1, v2))
}

/// Energy-norm `σ_min(M) = σ_min(Lᵀ M L⁻ᵀ)` for a dense `2N × 2N` matrix.
pub fn weighted_sigma_min_dense(m: &Array2<C64>, gram: &EnergyGram) -> Result<f64> {
    let l = gram.cholesky_dense();
    let linv = l
        .inv()
        .map_err(|e| Error::Degenerate(format!("Gram factor inversion failed: {e}")))?;
    let lt = l.t().mapv(|v| C64::new(v, 0.0));
    let linvt = linv.t().mapv(|v| C64::new(v, 0.0));
    let conj = lt.dot(m).dot(&linvt);
    Ok(dense_sigma_min(&conj)?.sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorResolvent {
    pub norm: f64,
    pub sigma_min: f64,
    pub iterations: usize,
}

/// `‖(G - λ)^{-1}‖` in the energy norm.
pub fn generator_resolvent_norm(sys: &GeneratorSystem, lambda: SpectralParameter) -> Result<GeneratorResolvent> {
    let (sigma, iterations) = if sys.dim() <= DENSE_RESOLVENT_LIMIT {
        let mut m = sys.to_dense().mapv(|v| C64::new(v, 0.0));
        for i in 0..sys.dim() {
            m[[i, i]] -= lambda.lambda();
        }
        (weighted_sigma_min_dense(&m, &sys.gram)?, 1)
    } else {
        let inv = sys.shifted_inverse(lambda)?;
        let pair = sigma_min_iterative(&inv, &sys.gram, IterationOptions::default())?;
        (pair.sigma, pair.iterations)
    };
    if sigma < 1e-8 {
        log::warn!("lambda = {} is within {sigma:.2e} of the spectrum", lambda.lambda());
    }
    Ok(GeneratorResolvent {
        norm: 1.0 / sigma,
        sigma_min: sigma,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenTag {
    Eigenvalue,
    EssentialCluster,
    Unresolved,
    Truncation,
}

impl EigenTag {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Eigenvalue => "eigenvalue",
            Self::EssentialCluster => "essential_cluster",
            Self::Unresolved => "unresolved",
            Self::Truncation => "truncation",
        }
    }
}

impl fmt::Display for EigenTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Discrete,
    ExactQuartic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedEigenvalue {
    pub value: C64,
    pub tag: EigenTag,
    pub boundary_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Sorted by real part, descending.
    pub eigenvalues: Vec<TaggedEigenvalue>,
    pub essential_ray_end: Option<f64>,
    pub spectral_bound: f64,
    pub method: SpectrumMethod,
}

impl SpectrumResult {
    pub fn retained(&self) -> impl Iterator<Item = C64> + '_ {
        self.eigenvalues
            .iter()
            .filter(|e| e.tag == EigenTag::Eigenvalue)
            .map(|e| e.value)
    }

    /// Retained eigenvalue closest to `z`.
    pub fn nearest(&self, z: C64) -> Option<C64> {
        self.retained()
            .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
    }
}

/// `-κ/2` when `a = f x^{2m}` and `q = κ f x^{2m}`.
pub fn essential_ray_end(a: &CoefficientFunction, q: &CoefficientFunction) -> Option<f64> {
    let (ea, fa) = a.as_monomial()?;
    let (eq, fq) = q.as_monomial()?;
    (ea == eq).then(|| -0.5 * fq / fa)
}

/// Full eigensolve of the discretized `G`, tagged and filtered; at most
/// `n_wanted` retained eigenvalues are kept, artifacts are all reported.
pub fn spectrum(sys: &GeneratorSystem, n_wanted: usize) -> Result<SpectrumResult> {
    let n = sys.grid.len();
    let h = sys.grid.spacing();
    let (vals, vecs) = sys
        .to_dense()
        .eig()
        .map_err(|e| Error::Degenerate(format!("eigensolve failed: {e}")))?;
    let ray = essential_ray_end(&sys.a, &sys.q);
    let mut tagged: Vec<TaggedEigenvalue> = vals
        .iter()
        .enumerate()
        .map(|(k, &value)| {
            let v: Vec<C64> = vecs.column(k).to_vec();
            let mass = boundary_mass(&v, n);
            let near_ray = ray.is_some_and(|r| value.im.abs() <= RAY_TOL && value.re <= r + RAY_TOL);
            let tag = if near_ray && mass >= BOUNDARY_MASS_TOL {
                EigenTag::EssentialCluster
            } else if value.norm() * h > RESOLUTION_LIMIT {
                EigenTag::Unresolved
            } else if mass >= BOUNDARY_MASS_TOL {
                EigenTag::Truncation
            } else {
                EigenTag::Eigenvalue
            };
            TaggedEigenvalue {
                value,
                tag,
                boundary_mass: mass,
            }
        })
        .collect();
    tagged.sort_by(|a, b| b.value.re.total_cmp(&a.value.re).then(b.value.im.total_cmp(&a.value.im)));
    let mut kept = 0;
    tagged.retain(|e| {
        if e.tag != EigenTag::Eigenvalue {
            return true;
        }
        kept += 1;
        kept <= n_wanted
    });
    let mut bound = tagged
        .iter()
        .filter(|e| e.tag == EigenTag::Eigenvalue)
        .map(|e| e.value.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if let Some(r) = ray {
        bound = bound.max(r);
    }
    Ok(SpectrumResult {
        eigenvalues: tagged,
        essential_ray_end: ray,
        spectral_bound: bound,
        method: SpectrumMethod::Discrete,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSequenceProbe {
    pub lambda: f64,
    pub n: usize,
    pub rho_n: f64,
    pub residual: f64,
    /// Support `(ρ_n^{-1/2} n, ρ_n^{-1/2} (n+1))` of `φ_n`.
    pub support: (f64, f64),
}

/// Smooth bump on `(0, 1)` with unit `L²` norm, and its first two derivatives.
pub trait Bump {
    fn eval(&self, t: f64) -> [f64; 3];
}

/// `C exp(-1/(t(1-t)))` on `(0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    scale: f64,
}

impl Mollifier {
    pub fn new() -> Self {
        let raw = Self { scale: 1.0 };
        let m = 4000;
        let h = 1.0 / m as f64;
        let mut s = 0.0;
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * raw.eval(i as f64 * h)[0].powi(2);
        }
        Self {
            scale: 1.0 / (s * h / 3.0).sqrt(),
        }
    }
}

impl Default for Mollifier {
    fn default() -> Self {
        Self::new()
    }
}

impl Bump for Mollifier {
    fn eval(&self, t: f64) -> [f64; 3] {
        if t <= 0.0 || t >= 1.0 {
            return [0.0; 3];
        }
        let s = t * (1.0 - t);
        let f = self.scale * (-1.0 / s).exp();
        let g1 = (1.0 - 2.0 * t) / (s * s);
        let g2 = -2.0 / (s * s) - 2.0 * (1.0 - 2.0 * t).powi(2) / (s * s * s);
        [f, f * g1, f * (g2 + g1 * g1)]
    }
}

/// Residual `‖w'' + A w‖ / ‖w'‖` of `w = φ_n ψ_λ` with
/// `A(x) = 2|λ + κ/2| x² - λ²` and `ψ_λ = exp(i ∫_α^x A^{1/2})`.
pub fn singular_sequence_probe(kappa: f64, lambda: f64, n: usize, bump: &dyn Bump) -> Result<SingularSequenceProbe> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    if !(lambda < -0.5 * kappa) {
        return Err(Error::Domain(format!("need lambda < -kappa/2 = {}, got {lambda}", -0.5 * kappa)));
    }
    let k = 2.0 * (lambda + 0.5 * kappa).abs();
    let m = lambda * lambda;
    let alpha = lambda.abs() / k.sqrt();
    let nf = n as f64;
    if nf <= alpha {
        return Err(Error::Precondition(format!("n = {n} must exceed alpha = {alpha:.4}")));
    }
    // A'/A = 2kt/(kt² - m) decreases beyond alpha, so the sup sits at t = n
    let rho = 2.0 * k * nf / (k * nf * nf - m);
    let lo = nf / rho.sqrt();
    let hi = (nf + 1.0) / rho.sqrt();
    if lo <= alpha {
        return Err(Error::Precondition(format!(
            "support starts at {lo:.4}, not beyond alpha = {alpha:.4}; increase n"
        )));
    }
    let steps = 8000;
    let dx = (hi - lo) / steps as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=steps {
        let x = lo + i as f64 * dx;
        let [p, p1, p2] = bump.eval(rho.sqrt() * x - nf);
        let amp = rho.powf(0.25);
        let (f, f1, f2) = (amp * p, amp * rho.sqrt() * p1, amp * rho * p2);
        let a = k * x * x - m;
        let ra = a.sqrt();
        let da = 2.0 * k * x;
        let im = 2.0 * ra * f1 + da * f / (2.0 * ra);
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        num += w * (f2 * f2 + im * im);
        den += w * (f1 * f1 + a * f * f);
    }
    Ok(SingularSequenceProbe {
        lambda,
        n,
        rho_n: rho,
        residual: (num / den).sqrt(),
        support: (lo, hi),
    })
}

/// Phase `∫_α^x A(t)^{1/2} dt` of `ψ_λ` for `x >= α`.
pub fn wkb_phase(kappa: f64, lambda: f64, x: f64) -> f64 {
    let k = 2.0 * (lambda + 0.5 * kappa).abs();
    let m = lambda * lambda;
    let alpha = (m / k).sqrt();
    let f = |t: f64| {
        let r = (k * t * t - m).max(0.0).sqrt();
        0.5 * t * r - m / (2.0 * k.sqrt()) * (k.sqrt() * t + r).ln()
    };
    f(x) - f(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray_linalg::Solve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn osc(kappa: f64, l: f64, n: usize) -> GeneratorSystem {
        let a = CoefficientFunction::quadratic();
        let q = CoefficientFunction::scaled(a.clone(), kappa).unwrap();
        build_g(&a, &q, &Grid1D::new(l, n).unwrap()).unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
    }

    #[test]
    fn block_structure() {
        let sys = osc(10.0, 4.0, 20);
        let g = sys.to_dense();
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(g[[i, j]], 0.0);
                assert_eq!(g[[i, 20 + j]], if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(sys.to_operator().to_dense().mapv(|v| v.re), g);
    }

    #[test]
    fn rayleigh_quotient_is_dissipative() {
        let sys = osc(10.0, 5.0, 80);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let u = random_state(&mut rng, 160);
            let gu = sys.apply(&u);
            let re = crate::linalg::dot(sys.gram(), &u, &gu).re;
            assert!(re <= 1e-10, "{re}");
        }
    }

    #[test]
    fn undamped_spectrum_is_imaginary() {
        let q = CoefficientFunction::quadratic();
        let a = CoefficientFunction::constant(0.0).unwrap();
        let sys = build_g(&a, &q, &Grid1D::new(6.0, 100).unwrap()).unwrap();
        let (vals, _) = sys.to_dense().eig().unwrap();
        for v in vals.iter() {
            assert!(v.re.abs() < 1e-6);
        }
    }

    #[test]
    fn gram_norm_matches_direct_energy() {
        let sys = osc(3.0, 5.0, 70);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let u = random_state(&mut rng, 140);
            let w = sys.gram().norm(&u);
            let d = crate::grids::energy_norm_direct(sys.potential(), sys.grid(), &u[..70], &u[70..]);
            assert!((w - d).abs() <= 1e-10 * d);
        }
    }

    #[test]
    fn block_inverse_is_two_sided() {
        let sys = osc(10.0, 5.0, 200);
        let lambda = SpectralParameter::strip(0.5, 15.0).unwrap();
        let inv = sys.shifted_inverse(lambda).unwrap();
        let mut dense = sys.to_dense().mapv(|v| C64::new(v, 0.0));
        for i in 0..400 {
            dense[[i, i]] -= lambda.lambda();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = random_state(&mut rng, 400);
            let (u1, u2) = inv.apply_r(&v[..200], &v[200..]);
            let u: Vec<C64> = u1.into_iter().chain(u2).collect();
            let gu = sys.apply(&u);
            let r: Vec<C64> = gu.iter().zip(&u).zip(&v).map(|((g, u), v)| g - lambda.lambda() * u - v).collect();
            let vn = sys.gram().norm(&v);
            assert!(sys.gram().norm(&r) <= 1e-8 * vn);
            let direct = dense.solve(&ndarray::Array1::from(v.clone())).unwrap();
            let d: Vec<C64> = direct.iter().zip(&u).map(|(a, b)| a - b).collect();
            assert!(sys.gram().norm(&d) <= 1e-8 * vn);
            let s = inv.solve(&v);
            let d2: Vec<C64> = s.iter().zip(&u).map(|(a, b)| a - b).collect();
            assert!(sys.gram().norm(&d2) <= 1e-10 * vn);
            // left inverse
            let w = random_state(&mut rng, 400);
            let gw: Vec<C64> = sys.apply(&w).iter().zip(&w).map(|(g, w)| g - lambda.lambda() * w).collect();
            let (b1, b2) = inv.apply_r(&gw[..200], &gw[200..]);
            let back: Vec<C64> = b1.into_iter().chain(b2).zip(&w).map(|(a, b)| a - b).collect();
            assert!(sys.gram().norm(&back) <= 1e-8 * sys.gram().norm(&w));
        }
    }

    #[test]
    fn adjoint_solve_is_adjoint() {
        let sys = osc(2.0, 4.0, 60);
        let lambda = SpectralParameter::strip(0.3, 4.0).unwrap();
        let inv = sys.shifted_inverse(lambda).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_state(&mut rng, 120);
        let y = random_state(&mut rng, 120);
        let e = crate::linalg::Euclidean;
        let lhs = crate::linalg::dot(&e, &inv.solve(&x), &y);
        let rhs = crate::linalg::dot(&e, &x, &inv.solve_adjoint(&y));
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn dense_and_iterative_resolvents_agree() {
        let sys = osc(1.0, 5.0, 150);
        let lambda = SpectralParameter::strip(0.5, 3.0).unwrap();
        let dense = generator_resolvent_norm(&sys, lambda).unwrap();
        let inv = sys.shifted_inverse(lambda).unwrap();
        let it = sigma_min_iterative(&inv, sys.gram(), IterationOptions::default()).unwrap();
        assert!((dense.sigma_min - it.sigma).abs() < 1e-8 * it.sigma);
        let conj = generator_resolvent_norm(&sys, lambda.conj()).unwrap();
        assert!((conj.norm - dense.norm).abs() < 1e-10 * dense.norm);
    }

    #[test]
    fn identity_has_unit_weighted_norm() {
        let sys = osc(1.0, 3.0, 30);
        let id = Array2::from_diag(&ndarray::Array1::from_elem(60, C64::new(1.0, 0.0)));
        assert!((weighted_sigma_min_dense(&id, sys.gram()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_spectrum_is_dissipative_and_off_axis() {
        let sys = osc(10.0, 8.0, 200);
        let spec = spectrum(&sys, 50).unwrap();
        assert_eq!(spec.essential_ray_end, Some(-5.0));
        for e in &spec.eigenvalues {
            assert!(e.value.re <= DISSIPATIVITY_TOL);
        }
        for z in spec.retained() {
            assert!(z.re.abs() > 1e-6);
        }
        assert!(spec.retained().count() <= 50);
    }

    #[test]
    fn probe_rejects_small_n_and_wrong_lambda() {
        let m = Mollifier::new();
        assert!(matches!(singular_sequence_probe(10.0, -7.0, 3, &m), Err(Error::Precondition(_))));
        assert!(matches!(singular_sequence_probe(10.0, -4.0, 10, &m), Err(Error::Domain(_))));
    }

    #[test]
    fn probe_support_and_rho() {
        let p = singular_sequence_probe(10.0, -7.0, 10, &Mollifier::new()).unwrap();
        assert!((p.rho_n - 80.0 / 351.0).abs() < 1e-14);
        let alpha = 7.0 / 2.0;
        assert!(p.support.0 > alpha);
        assert!((p.support.1 - p.support.0 - p.rho_n.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn probe_matches_finite_difference_residual() {
        let (kappa, lambda, n) = (10.0, -7.0, 10);
        let m = Mollifier::new();
        let p = singular_sequence_probe(kappa, lambda, n, &m).unwrap();
        let k = 2.0 * (lambda + 0.5 * kappa).abs();
        let (lo, hi) = p.support;
        let steps = 40000;
        let dx = (hi - lo) / steps as f64;
        let w = |x: f64| -> C64 {
            let f = p.rho_n.powf(0.25) * m.eval(p.rho_n.sqrt() * x - n as f64)[0];
            C64::from_polar(f, wkb_phase(kappa, lambda, x))
        };
        let (mut num, mut den) = (0.0, 0.0);
        for i in 1..steps {
            let x = lo + i as f64 * dx;
            let (wm, w0, wp) = (w(x - dx), w(x), w(x + dx));
            let d2 = (wp - 2.0 * w0 + wm) / (dx * dx);
            let d1 = (wp - wm) / (2.0 * dx);
            num += (d2 + (k * x * x - lambda * lambda) * w0).norm_sqr();
            den += d1.norm_sqr();
        }
        let fd = (num / den).sqrt();
        assert!((fd - p.residual).abs() / p.residual < 1e-3, "{fd} vs {}", p.residual);
    }

    #[test]
    fn mollifier_is_normalized() {
        let m = Mollifier::new();
        let steps = 20000;
        let s: f64 = (1..steps).map(|i| m.eval(i as f64 / steps as f64)[0].powi(2)).sum::<f64>() / steps as f64;
        assert!((s - 1.0).abs() < 1e-6);
        let t = 0.3;
        let e = 1e-5;
        let d = (m.eval(t + e)[0] - m.eval(t - e)[0]) / (2.0 * e);
        assert!((d - m.eval(t)[1]).abs() < 1e-6 * m.eval(t)[1].abs().max(1.0));
        let d2 = (m.eval(t + e)[1] - m.eval(t - e)[1]) / (2.0 * e);
        assert!((d2 - m.eval(t)[2]).abs() < 1e-5 * m.eval(t)[2].abs().max(1.0));
    }
}
