//! The quadratic pencil `T(λ) = H_q + 2λa + λ²`: assembly in x or Fourier
//! variables, resolvent norms, the strip asymptotic ratio, graph-norm
//! inequalities and pseudospectral level curves.

use ndarray::Array2;
use ndarray_linalg::{Eigh, Inverse, SVD, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::airy::{airy_norm_kernel, airy_norm_matrix, AiryOperatorSpec};
use crate::coeffs::CoefficientFunction;
use crate::error::{Error, Result};
use crate::grids::{
    boundary_mass, even_derivative_band, laplacian_band, multiplication_band, suggest_half_width,
    DiscreteOperator, Grid1D, NormTag, Space, BOUNDARY_MASS_TOL,
};
use crate::linalg::{band_sigma_min, BandMatrix, C64};

/// Default Fourier-side spacing.
pub const FOURIER_SPACING: f64 = 0.05;
/// Fourier-side half width is `2|b| + FOURIER_MARGIN`.
pub const FOURIER_MARGIN: f64 = 20.0;
/// Relative change under grid doubling above which a point is unresolved.
pub const REFINEMENT_TOL: f64 = 1e-2;

/// A point `λ ∈ ℂ \ (-∞, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    lambda: C64,
}

impl SpectralParameter {
    /// `λ = -c + ib` with `c >= 0`.
    pub fn strip(c: f64, b: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("need finite c >= 0 and finite b, got c = {c}, b = {b}")));
        }
        Self::from_complex(C64::new(-c, b))
    }

    /// `λ = μ > 0`.
    pub fn positive(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!("need mu > 0, got {mu}")));
        }
        Ok(Self {
            lambda: C64::new(mu, 0.0),
        })
    }

    pub fn from_complex(lambda: C64) -> Result<Self> {
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::Domain(format!("non-finite spectral parameter {lambda}")));
        }
        if lambda.im == 0.0 && lambda.re <= 0.0 {
            return Err(Error::Domain(format!(
                "spectral parameter {} lies on (-inf, 0]",
                lambda.re
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn c(&self) -> f64 {
        -self.lambda.re
    }

    pub fn b(&self) -> f64 {
        self.lambda.im
    }

    pub fn conj(&self) -> Self {
        Self {
            lambda: self.lambda.conj(),
        }
    }
}

/// Matrix of multiplication by `f` in the chosen variable; in Fourier
/// variables only monomials and constants are available.
pub fn multiplier(f: &CoefficientFunction, grid: &Grid1D, space: Space) -> Result<BandMatrix> {
    match space {
        Space::X => Ok(multiplication_band(f, grid)),
        Space::Fourier => {
            if let Some((e, factor)) = f.as_monomial() {
                Ok(even_derivative_band(grid, e / 2).scale(C64::new(factor, 0.0)))
            } else if let Some(k) = f.as_constant() {
                Ok(BandMatrix::identity(grid.len()).scale(C64::new(k, 0.0)))
            } else {
                Err(Error::Capability(format!(
                    "Fourier route needs monomial or constant coefficients, got {f}"
                )))
            }
        }
    }
}

/// `-d²/dx²` in the chosen variable (`ξ²` on the Fourier side).
fn kinetic(grid: &Grid1D, space: Space) -> BandMatrix {
    match space {
        Space::X => laplacian_band(grid),
        Space::Fourier => {
            let xi2: Vec<f64> = grid.nodes().iter().map(|x| x * x).collect();
            BandMatrix::from_diagonal(&xi2)
        }
    }
}

/// `H_q` in the chosen variable.
pub fn hq_in(q: &CoefficientFunction, grid: &Grid1D, space: Space) -> Result<BandMatrix> {
    Ok(kinetic(grid, space).add_scaled(C64::new(1.0, 0.0), &multiplier(q, grid, space)?))
}

pub fn build_t(
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    lambda: SpectralParameter,
    grid: &Grid1D,
    space: Space,
) -> Result<DiscreteOperator> {
    let l = lambda.lambda();
    let matrix = hq_in(q, grid, space)?
        .add_scaled(2.0 * l, &multiplier(a, grid, space)?)
        .shift_diagonal(l * l);
    DiscreteOperator::new(matrix, grid.clone(), space, NormTag::Euclidean)
}

/// Fourier-side grid `[-(2|b| + 20), 2|b| + 20]` with spacing at most `h`.
pub fn fourier_grid(b: f64, h: f64) -> Result<Grid1D> {
    Grid1D::with_spacing(2.0 * b.abs() + FOURIER_MARGIN, h)
}

/// Default x-space grid: half width from the truncation heuristic at scale
/// `|λ|`, spacing `min(h, 1/(10|b|))`.
pub fn x_grid(a: &CoefficientFunction, q: &CoefficientFunction, lambda: SpectralParameter, h: f64) -> Result<Grid1D> {
    let l = suggest_half_width(a, q, lambda.lambda().norm());
    let hb = if lambda.b() != 0.0 { 0.1 / lambda.b().abs() } else { h };
    Grid1D::with_spacing(l, h.min(hb))
}

/// Grid chosen by the default resolution rules of each route.
pub fn default_grid(
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    lambda: SpectralParameter,
    space: Space,
) -> Result<Grid1D> {
    match space {
        Space::Fourier => fourier_grid(lambda.b(), FOURIER_SPACING),
        Space::X => x_grid(a, q, lambda, FOURIER_SPACING),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventPoint {
    pub norm: f64,
    pub sigma_min: f64,
    pub boundary_mass: f64,
    /// Minimal right singular vector.
    pub vector: Vec<C64>,
}

/// `‖T^{-1}‖ = 1/σ_min(T)` in the Euclidean norm.
pub fn resolvent_norm(t: &DiscreteOperator) -> Result<ResolventPoint> {
    resolvent_norm_from(t, None)
}

/// As [`resolvent_norm`], warm-starting the iteration from `start`.
pub fn resolvent_norm_from(t: &DiscreteOperator, start: Option<&[C64]>) -> Result<ResolventPoint> {
    if t.norm != NormTag::Euclidean {
        return Err(Error::Precondition("resolvent_norm expects a Euclidean-norm operator".into()));
    }
    let pair = band_sigma_min(&t.matrix, start)?;
    if !(pair.sigma > 0.0) {
        return Err(Error::Degenerate("operator is singular on the grid".into()));
    }
    let mass = boundary_mass(&pair.vector, t.grid.len());
    Ok(ResolventPoint {
        norm: 1.0 / pair.sigma,
        sigma_min: pair.sigma,
        boundary_mass: mass,
        vector: pair.vector,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub lambda: SpectralParameter,
    pub norm: f64,
    pub sigma_min: f64,
    pub n_used: usize,
    pub boundary_mass: f64,
    /// Relative change of the norm on the refined grid, when checked.
    pub refinement_change: Option<f64>,
}

impl ScanPoint {
    pub fn resolved(&self) -> bool {
        self.boundary_mass < BOUNDARY_MASS_TOL && self.refinement_change.is_none_or(|d| d < REFINEMENT_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResolventScan {
    pub points: Vec<ScanPoint>,
}

/// Evaluates `‖T(λ)^{-1}‖` at every point in parallel, each on its default
/// grid; with `check_refinement` the grid is also doubled.
pub fn resolvent_scan(
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    params: &[SpectralParameter],
    space: Space,
    check_refinement: bool,
) -> Result<ResolventScan> {
    let points = params
        .par_iter()
        .map(|&lambda| {
            let grid = default_grid(a, q, lambda, space)?;
            let r = resolvent_norm(&build_t(a, q, lambda, &grid, space)?)?;
            let refinement_change = if check_refinement {
                let fine = resolvent_norm(&build_t(a, q, lambda, &grid.refined(), space)?)?;
                Some((fine.norm - r.norm).abs() / fine.norm)
            } else {
                None
            };
            Ok(ScanPoint {
                lambda,
                norm: r.norm,
                sigma_min: r.sigma_min,
                n_used: grid.len(),
                boundary_mass: r.boundary_mass,
                refinement_change,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResolventScan { points })
}

/// How `‖(A - c)^{-1}‖` is obtained for the strip ratio.
#[derive(Debug, Clone, PartialEq)]
pub enum AiryRoute {
    Kernel { half_width: f64, nodes: usize },
    Matrix { grid: Grid1D },
    Given(f64),
}

impl Default for AiryRoute {
    fn default() -> Self {
        Self::Kernel {
            half_width: 8.0,
            nodes: 800,
        }
    }
}

impl AiryRoute {
    pub fn norm(&self, a: &CoefficientFunction, c: f64) -> Result<f64> {
        match self {
            Self::Kernel { half_width, nodes } => {
                Ok(airy_norm_kernel(&AiryOperatorSpec::new(a.clone(), c)?, *half_width, *nodes)?.norm)
            }
            Self::Matrix { grid } => Ok(airy_norm_matrix(&AiryOperatorSpec::new(a.clone(), c)?, grid)?.norm),
            Self::Given(v) => Ok(*v),
        }
    }
}

/// `R(b) = 2|b| ‖T(-c+ib)^{-1}‖ / ‖(A-c)^{-1}‖`.
pub fn pencil_ratio(
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    c: f64,
    b: f64,
    grid: &Grid1D,
    space: Space,
    airy: &AiryRoute,
) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::Domain("pencil ratio needs b != 0".into()));
    }
    let lambda = SpectralParameter::strip(c, b)?;
    let t = resolvent_norm(&build_t(a, q, lambda, grid, space)?)?;
    if t.boundary_mass >= BOUNDARY_MASS_TOL {
        log::warn!("pencil at b = {b}: boundary mass {:.2e}", t.boundary_mass);
    }
    Ok(2.0 * b.abs() * t.norm / airy.norm(a, c)?)
}

/// One line of a graph-inequality report.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityItem {
    pub name: &'static str,
    /// `μ` or `b` at which the quantity was measured.
    pub parameter: f64,
    /// Operator value on the grid.
    pub value: f64,
    /// Supremum over the test bank.
    pub bank_value: f64,
    /// Hard bound for constant-free inequalities.
    pub bound: Option<f64>,
}

impl InequalityItem {
    pub fn passes(&self) -> bool {
        self.bound.is_none_or(|b| self.value <= b && self.bank_value <= b)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphReport {
    pub items: Vec<InequalityItem>,
}

impl GraphReport {
    pub fn constant_free_pass(&self) -> bool {
        self.items.iter().all(InequalityItem::passes)
    }

    /// Largest over smallest value of a named constant across its sweep.
    pub fn spread(&self, name: &str) -> Option<f64> {
        let v: Vec<f64> = self.items.iter().filter(|i| i.name == name).map(|i| i.value).collect();
        if v.is_empty() {
            return None;
        }
        let hi = v.iter().copied().fold(f64::MIN, f64::max);
        let lo = v.iter().copied().fold(f64::MAX, f64::min);
        Some(hi / lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphCheck {
    pub mus: Vec<f64>,
    pub c: f64,
    pub bs: Vec<f64>,
    pub bank_size: usize,
    pub seed: u64,
    /// Grid for the `μ` checks.
    pub mu_grid: Grid1D,
    /// Fourier-side spacing for the `b` sweep.
    pub fourier_spacing: f64,
}

impl Default for GraphCheck {
    fn default() -> Self {
        Self {
            mus: vec![1.0, 4.0],
            c: 0.5,
            bs: vec![10.0, 20.0, 40.0],
            bank_size: 100,
            seed: 20240601,
            mu_grid: Grid1D::new(8.0, 399).expect("valid grid"),
            fourier_spacing: 0.2,
        }
    }
}

pub const MU_INVERSE: &str = "T(mu)^-1 <= mu^-2";
pub const HQ_HALF_T_HALF: &str = "Hq^1/2 T(mu)^-1/2 <= 1";
pub const GRAPH_NORM: &str = "graph norm constant";
pub const HQ_T_INV: &str = "Hq T(lambda)^-1 / |b|";
pub const HQ_HALF_T_INV: &str = "Hq^1/2 T(lambda)^-1";

/// Smooth rapidly decaying test functions: Gaussian bumps times cubics.
pub fn test_bank(grid: &Grid1D, size: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = grid.nodes();
    let span = (grid.half_width() / 4.0).min(2.0);
    (0..size)
        .map(|_| {
            let x0 = rng.gen_range(-span..span);
            let s = rng.gen_range(0.3..1.0);
            let coef: Vec<C64> = (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            x.iter()
                .map(|&t| {
                    let y = t - x0;
                    let p = coef[0] + y * (coef[1] + y * (coef[2] + y * coef[3]));
                    p * (-(y * y) / (2.0 * s * s)).exp()
                })
                .collect()
        })
        .collect()
}

fn herm_form(m: &Array2<C64>, u: &[C64]) -> f64 {
    let n = u.len();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..n {
            row += m[[i, j]] * u[j];
        }
        s += u[i].conj() * row;
    }
    s.re
}

fn vnorm2(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest eigenvalue of the Hermitian pencil `(n, d)` with `d` positive definite.
fn pencil_top(n: &Array2<C64>, d: &Array2<C64>) -> Result<f64> {
    let (vals, _) = (n.clone(), d.clone())
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Degenerate(format!("generalized eigensolve failed: {e}")))?;
    Ok(vals[vals.len() - 1])
}


/// Checks the constant-free bounds at each `μ` and measures the `≲`
/// constants along the `b` sweep (Fourier route, monomial coefficients).
pub fn verify_graph_inequalities(
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    check: &GraphCheck,
) -> Result<GraphReport> {
    if check.bank_size == 0 {
        return Err(Error::Precondition("empty test bank".into()));
    }
    let mut items = Vec::new();
    let grid = &check.mu_grid;
    let bank = test_bank(grid, check.bank_size, check.seed);
    let h_band = hq_in(q, grid, Space::X)?;
    let h = h_band.to_dense();
    for &mu in &check.mus {
        let lambda = SpectralParameter::positive(mu)?;
        let t = build_t(a, q, lambda, grid, Space::X)?;
        let r = resolvent_norm(&t)?;
        let td = t.to_dense();
        let bank_norm = bank
            .iter()
            .map(|u| {
                let tu = t.matrix.matvec(u);
                (vnorm2(u) / vnorm2(&tu)).sqrt()
            })
            .fold(0.0, f64::max);
        items.push(InequalityItem {
            name: MU_INVERSE,
            parameter: mu,
            value: r.norm,
            bank_value: bank_norm,
            bound: Some(mu.powi(-2) * (1.0 + 1e-10)),
        });
        let gen = pencil_top(&h, &td)?.max(0.0).sqrt();
        let bank_gen = bank
            .iter()
            .map(|u| (herm_form(&h, u) / herm_form(&td, u)).sqrt())
            .fold(0.0, f64::max);
        items.push(InequalityItem {
            name: HQ_HALF_T_HALF,
            parameter: mu,
            value: gen,
            bank_value: bank_gen,
            bound: Some(1.0 + 1e-8),
        });
    }
    for &b in &check.bs {
        let fg = fourier_grid(b, check.fourier_spacing)?;
        let lambda = SpectralParameter::strip(check.c, b)?;
        let t = build_t(a, q, lambda, &fg, Space::Fourier)?.to_dense();
        let hq = hq_in(q, &fg, Space::Fourier)?.to_dense();
        let am = multiplier(a, &fg, Space::Fourier)?.to_dense();
        let qm = multiplier(q, &fg, Space::Fourier)?.to_dense();
        let d2 = kinetic(&fg, Space::Fourier).to_dense();
        let b2 = C64::new(b * b, 0.0);
        let num = d2.t().dot(&d2) + qm.t().dot(&qm) + am.t().dot(&am).mapv(|v| v * b2);
        let mut den = t.t().mapv(|v| v.conj()).dot(&t);
        for i in 0..den.nrows() {
            den[[i, i]] += b2 * b2;
        }
        let fbank = test_bank(&fg, check.bank_size, check.seed ^ b.to_bits());
        let bank_graph = fbank
            .iter()
            .map(|u| herm_form(&num, u) / herm_form(&den, u))
            .fold(0.0, f64::max);
        items.push(InequalityItem {
            name: GRAPH_NORM,
            parameter: b,
            value: pencil_top(&num, &den)?,
            bank_value: bank_graph,
            bound: None,
        });
        let tinv = t
            .inv()
            .map_err(|e| Error::Degenerate(format!("T(lambda) inversion failed: {e}")))?;
        let ht = hq.dot(&tinv);
        let sv = ht
            .svd(false, false)
            .map_err(|e| Error::Degenerate(format!("SVD failed: {e}")))?
            .1;
        let bank_ht = fbank
            .iter()
            .map(|u| {
                let y: Vec<C64> = tinv.dot(&ndarray::Array1::from(u.clone())).to_vec();
                let hy: Vec<C64> = hq.dot(&ndarray::Array1::from(y)).to_vec();
                (vnorm2(&hy) / vnorm2(u)).sqrt() / b.abs()
            })
            .fold(0.0, f64::max);
        items.push(InequalityItem {
            name: HQ_T_INV,
            parameter: b,
            value: sv[0] / b.abs(),
            bank_value: bank_ht,
            bound: None,
        });
        let th = tinv.t().mapv(|v| v.conj());
        let form = th.dot(&hq).dot(&tinv);
        let (vals, _) = form
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Degenerate(format!("eigensolve failed: {e}")))?;
        let bank_half = fbank
            .iter()
            .map(|u| (herm_form(&form, u) / vnorm2(u)).max(0.0).sqrt())
            .fold(0.0, f64::max);
        items.push(InequalityItem {
            name: HQ_HALF_T_INV,
            parameter: b,
            value: vals[vals.len() - 1].max(0.0).sqrt(),
            bank_value: bank_half,
            bound: None,
        });
    }
    Ok(GraphReport { items })
}

/// Dense real matrix of `H_q` for callers that need it.
pub fn hq_dense(q: &CoefficientFunction, grid: &Grid1D) -> Array2<f64> {
    hq_in(q, grid, Space::X).expect("x-space multiplier").to_dense_real()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSample {
    pub b: f64,
    pub c_numeric: f64,
    pub c_closed_form: Option<f64>,
    pub phi_b: f64,
    /// False when the sampled norms were not increasing in `c`.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve {
    pub epsilon: f64,
    pub samples: Vec<LevelSample>,
}

impl LevelCurve {
    pub fn increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].c_numeric > w[0].c_numeric)
    }

    pub fn phi_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].phi_b < w[0].phi_b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelOptions {
    pub c_max: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub space: Space,
    pub spacing: f64,
    pub airy: AiryRoute,
}

impl Default for LevelOptions {
    fn default() -> Self {
        Self {
            c_max: 20.0,
            tol: 1e-3,
            max_iter: 60,
            space: Space::Fourier,
            spacing: 0.1,
            airy: AiryRoute::default(),
        }
    }
}

// Norms above this are at the limit of double precision and carry no ordering.
const SATURATION: f64 = 1e10;

/// Closed-form level curve `c_b` for `a = x^{2n}` or `a = p log<x>`.
pub fn level_closed_form(a: &CoefficientFunction, epsilon: f64, b: f64) -> Option<f64> {
    let big = (2.0 * b.abs() / epsilon).ln();
    match a {
        CoefficientFunction::Monomial { exponent } => {
            let n = f64::from(exponent / 2);
            let e = 2.0 * n / (2.0 * n + 1.0);
            Some(((2.0 * n + 1.0) / (4.0 * n)).powf(e) * big.powf(e))
        }
        CoefficientFunction::LogBracketPower { p } if big > 1.0 => Some(p * big.ln()),
        _ => None,
    }
}

pub fn level_curve(
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    epsilon: f64,
    b_list: &[f64],
    opts: &LevelOptions,
) -> Result<LevelCurve> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if let Some(b) = b_list.iter().find(|b| **b == 0.0 || !b.is_finite()) {
        return Err(Error::Domain(format!("level curve needs finite b != 0, got {b}")));
    }
    let target = 1.0 / epsilon;
    let samples = b_list
        .par_iter()
        .map(|&b| {
            let grid = match opts.space {
                Space::Fourier => fourier_grid(b, opts.spacing)?,
                Space::X => x_grid(a, q, SpectralParameter::strip(0.0, b)?, opts.spacing)?,
            };
            let norm_at = |c: f64| -> Result<f64> {
                let t = build_t(a, q, SpectralParameter::strip(c, b)?, &grid, opts.space)?;
                Ok(resolvent_norm(&t)?.norm)
            };
            let (mut lo, mut hi) = (0.0, opts.c_max);
            let (f_lo, f_hi) = (norm_at(lo)?, norm_at(hi)?);
            if !(f_lo < target && f_hi > target) {
                return Err(Error::Bracket {
                    lo,
                    hi,
                    f_lo: f_lo - target,
                    f_hi: f_hi - target,
                });
            }
            let probes: Vec<f64> = (0..=4)
                .map(|k| norm_at(opts.c_max * k as f64 / 4.0))
                .collect::<Result<_>>()?;
            let monotone = probes
                .windows(2)
                .all(|w| w[1] > w[0] || (w[0] > SATURATION && w[1] > SATURATION));
            if !monotone {
                log::warn!("level curve at b = {b}: norm not increasing in c");
            }
            for _ in 0..opts.max_iter {
                if hi - lo < opts.tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if norm_at(mid)? > target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let c_b = 0.5 * (lo + hi);
            let airy = opts.airy.norm(a, c_b)?;
            Ok(LevelSample {
                b,
                c_numeric: c_b,
                c_closed_form: level_closed_form(a, epsilon, b),
                phi_b: (1.0 + c_b * c_b) * airy / b.abs(),
                monotone,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelCurve { epsilon, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x2() -> CoefficientFunction {
        CoefficientFunction::quadratic()
    }

    fn zero() -> CoefficientFunction {
        CoefficientFunction::constant(0.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(SpectralParameter::strip(0.0, 0.0).is_err());
        assert!(SpectralParameter::strip(1.0, 0.0).is_err());
        assert!(SpectralParameter::strip(-1.0, 2.0).is_err());
        assert!(SpectralParameter::positive(0.0).is_err());
        assert!(SpectralParameter::from_complex(C64::new(-3.0, 0.0)).is_err());
        let p = SpectralParameter::strip(0.5, 3.0).unwrap();
        assert_eq!(p.lambda(), C64::new(-0.5, 3.0));
        assert_eq!((p.c(), p.b()), (0.5, 3.0));
    }

    #[test]
    fn oscillator_ground_state_of_pencil() {
        let g = Grid1D::new(8.0, 399).unwrap();
        let t = build_t(&x2(), &zero(), SpectralParameter::positive(2.0).unwrap(), &g, Space::X).unwrap();
        let r = resolvent_norm(&t).unwrap();
        assert!((r.norm - 1.0 / 6.0).abs() < 1e-3 / 6.0);
        assert!((r.norm * r.sigma_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_norm_at_unit_mu() {
        let g = Grid1D::new(8.0, 399).unwrap();
        let t = build_t(&x2(), &x2(), SpectralParameter::positive(1.0).unwrap(), &g, Space::X).unwrap();
        let want = 1.0 / (3f64.sqrt() + 1.0);
        assert!((resolvent_norm(&t).unwrap().norm - want).abs() < 1e-3);
    }

    #[test]
    fn conjugate_parameter_gives_conjugate_matrix() {
        let g = Grid1D::new(5.0, 60).unwrap();
        let p = SpectralParameter::strip(0.3, 2.0).unwrap();
        for space in [Space::X, Space::Fourier] {
            let t = build_t(&x2(), &x2(), p, &g, space).unwrap().matrix;
            let tc = build_t(&x2(), &x2(), p.conj(), &g, space).unwrap().matrix;
            assert_eq!(t.conj(), tc);
            assert_eq!(t.transpose(), t);
        }
    }

    #[test]
    fn fourier_route_rejects_bracket() {
        let g = Grid1D::new(5.0, 60).unwrap();
        let a = CoefficientFunction::bracket(1.0).unwrap();
        let p = SpectralParameter::strip(0.3, 2.0).unwrap();
        assert!(matches!(build_t(&a, &x2(), p, &g, Space::Fourier), Err(Error::Capability(_))));
    }

    #[test]
    fn routes_agree_on_pencil_norm() {
        let p = SpectralParameter::strip(0.5, 10.0).unwrap();
        let fx = resolvent_norm(&build_t(&x2(), &x2(), p, &Grid1D::with_spacing(6.0, 0.005).unwrap(), Space::X).unwrap()).unwrap();
        let ff = resolvent_norm(&build_t(&x2(), &x2(), p, &fourier_grid(10.0, 0.05).unwrap(), Space::Fourier).unwrap()).unwrap();
        assert!((fx.norm - ff.norm).abs() / ff.norm < 1e-2, "{} vs {}", fx.norm, ff.norm);
        assert!(ff.boundary_mass < BOUNDARY_MASS_TOL);
    }

    #[test]
    fn non_euclidean_operator_rejected() {
        let g = Grid1D::new(2.0, 10).unwrap();
        let mut t = build_t(&x2(), &x2(), SpectralParameter::positive(1.0).unwrap(), &g, Space::X).unwrap();
        t.norm = NormTag::Energy;
        assert!(matches!(resolvent_norm(&t), Err(Error::Precondition(_))));
    }

    #[test]
    fn identity_shift_has_unit_norm() {
        let g = Grid1D::new(2.0, 10).unwrap();
        let m = BandMatrix::identity(10).shift_diagonal(C64::new(-2.0, 0.0));
        let op = DiscreteOperator::new(m, g, Space::X, NormTag::Euclidean).unwrap();
        let r = resolvent_norm(&op).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-14 && (r.sigma_min - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ratio_symmetric_in_b() {
        let g = fourier_grid(10.0, 0.05).unwrap();
        let airy = AiryRoute::Given(2.0);
        let r1 = pencil_ratio(&x2(), &x2(), 0.5, 10.0, &g, Space::Fourier, &airy).unwrap();
        let r2 = pencil_ratio(&x2(), &x2(), 0.5, -10.0, &g, Space::Fourier, &airy).unwrap();
        assert!((r1 - r2).abs() < 1e-10 * r1);
        assert!(pencil_ratio(&x2(), &x2(), 0.5, 0.0, &g, Space::Fourier, &airy).is_err());
    }

    #[test]
    fn positive_axis_norm_non_increasing() {
        let g = Grid1D::new(8.0, 399).unwrap();
        let norms: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&mu| resolvent_norm(&build_t(&x2(), &x2(), SpectralParameter::positive(mu).unwrap(), &g, Space::X).unwrap()).unwrap().norm)
            .collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        for (n, mu) in norms.iter().zip([1.0f64, 2.0, 4.0, 8.0]) {
            assert!(*n <= mu.powi(-2));
        }
    }

    #[test]
    fn graph_inequalities() {
        let check = GraphCheck {
            bank_size: 100,
            ..GraphCheck::default()
        };
        let report = verify_graph_inequalities(&x2(), &x2(), &check).unwrap();
        assert!(report.constant_free_pass(), "{report:?}");
        let spread = report.spread(GRAPH_NORM).unwrap();
        assert!(spread < 2.0, "graph-norm constant spread {spread}");
        for it in &report.items {
            assert!(it.bank_value <= it.value * (1.0 + 1e-8), "{it:?}");
        }
    }

    #[test]
    fn ground_vector_dominates_oscillator_part() {
        let g = Grid1D::new(8.0, 399).unwrap();
        let mu = 2.0;
        let t = build_t(&x2(), &x2(), SpectralParameter::positive(mu).unwrap(), &g, Space::X).unwrap();
        let u = resolvent_norm(&t).unwrap().vector;
        let tu = vnorm2(&t.matrix.matvec(&u));
        let hmu = hq_in(&CoefficientFunction::scaled(x2(), 1.0 + 2.0 * mu).unwrap(), &g, Space::X).unwrap();
        assert!(tu >= vnorm2(&hmu.matvec(&u)));
    }

    #[test]
    fn closed_form_level_value() {
        let v = level_closed_form(&x2(), 0.01, 160.0).unwrap();
        let want = 0.75f64.powf(2.0 / 3.0) * (32000f64).ln().powf(2.0 / 3.0);
        assert!((v - want).abs() < 1e-12);
        assert!((v - 3.93).abs() < 5e-3);
    }

    #[test]
    fn level_curve_bracket_error() {
        let opts = LevelOptions {
            c_max: 0.5,
            airy: AiryRoute::Given(1.0),
            ..LevelOptions::default()
        };
        let r = level_curve(&x2(), &zero(), 0.01, &[20.0], &opts);
        assert!(matches!(r, Err(Error::Bracket { .. })), "{r:?}");
        assert!(level_curve(&x2(), &zero(), 0.01, &[0.0], &opts).is_err());
    }
}
