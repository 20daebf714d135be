//! Resolvent norms of the generalized Airy operator `A = -d/dx + a(x)`.
//!
//! Three routes are offered: the explicit Volterra kernel of `(A - c)^{-1}`
//! discretized by Nyström, the Fourier-side matrix `â - iξ - c` for monomial
//! dampings, and the leading-order closed forms.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::coeffs::CoefficientFunction;
use crate::error::{Error, Result};
use crate::grids::{boundary_mass, boundary_mass_real, even_derivative_band, Grid1D, BOUNDARY_MASS_TOL};
use crate::linalg::{band_sigma_min, dense_sigma_max_real, BandMatrix, C64};

const EXP_UNDERFLOW: f64 = -745.0;
const EXP_OVERFLOW: f64 = 700.0;
/// Largest Fourier-side spacing accepted by [`airy_norm_matrix`].
pub const MAX_MATRIX_SPACING: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct AiryOperatorSpec {
    a: CoefficientFunction,
    c: f64,
    adjoint: bool,
}

impl AiryOperatorSpec {
    pub fn new(a: CoefficientFunction, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("shift c must be finite and >= 0, got {c}")));
        }
        Ok(Self { a, c, adjoint: false })
    }

    /// The same spec for `A* = d/dx + a`.
    pub fn adjoint(&self) -> Self {
        Self {
            adjoint: !self.adjoint,
            ..self.clone()
        }
    }

    pub fn damping(&self) -> &CoefficientFunction {
        &self.a
    }

    pub fn shift(&self) -> f64 {
        self.c
    }

    pub fn is_adjoint(&self) -> bool {
        self.adjoint
    }

    /// `Φ(x) = ∫_0^x a`.
    pub fn phi(&self, x: f64) -> f64 {
        self.a.antiderivative(x)
    }

    /// `Ψ(x) = Φ(x) - c x`.
    pub fn psi(&self, x: f64) -> f64 {
        self.phi(x) - self.c * x
    }
}

/// Kernel of `(A - c)^{-1}`: `exp(Ψ(x) - Ψ(t))` for `t >= x`, zero otherwise.
/// The adjoint spec yields the transposed kernel.
pub fn resolvent_kernel(spec: &AiryOperatorSpec, x: f64, t: f64) -> Result<f64> {
    let (x, t) = if spec.adjoint { (t, x) } else { (x, t) };
    if t < x {
        return Ok(0.0);
    }
    let e = spec.psi(x) - spec.psi(t);
    if e < EXP_UNDERFLOW {
        return Ok(0.0);
    }
    if e > EXP_OVERFLOW || !e.is_finite() {
        return Err(Error::Degenerate(format!(
            "kernel exponent {e:.3e} at (x, t) = ({x}, {t}) overflows"
        )));
    }
    Ok(e.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AiryMethod {
    Kernel,
    Matrix,
    Asymptotic,
}

impl AiryMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Kernel => "kernel",
            Self::Matrix => "matrix",
            Self::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AiryNorm {
    pub method: AiryMethod,
    pub c: f64,
    pub norm: f64,
    /// Outer-5% mass of the extremal singular vector; zero for the closed form.
    pub boundary_mass: f64,
}

impl AiryNorm {
    pub fn resolved(&self) -> bool {
        self.boundary_mass < BOUNDARY_MASS_TOL
    }
}

/// Nyström matrix `h·k(x_i, x_j)` on the interior nodes of `[-L, L]`, with the
/// diagonal halved (trapezoid rule on `[x_i, L]`).
pub fn kernel_matrix(spec: &AiryOperatorSpec, grid: &Grid1D) -> Result<Array2<f64>> {
    let n = grid.len();
    let h = grid.spacing();
    let x = grid.nodes();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let v = resolvent_kernel(spec, x[i], x[j])?;
            k[[i, j]] = if i == j { 0.5 * h * v } else { h * v };
        }
    }
    Ok(k)
}

pub fn airy_norm_kernel(spec: &AiryOperatorSpec, half_width: f64, n_nodes: usize) -> Result<AiryNorm> {
    let grid = Grid1D::new(half_width, n_nodes)?;
    let k = kernel_matrix(spec, &grid)?;
    let (norm, v) = dense_sigma_max_real(&k)?;
    let mass = boundary_mass_real(v.as_slice().expect("contiguous"), n_nodes);
    if mass >= BOUNDARY_MASS_TOL {
        log::warn!(
            "Airy kernel route at c = {}: boundary mass {mass:.2e} on L = {half_width}; try a larger L",
            spec.c
        );
    }
    Ok(AiryNorm {
        method: AiryMethod::Kernel,
        c: spec.c,
        norm,
        boundary_mass: mass,
    })
}

/// Fourier-side band matrix `f·K^m ∓ iξ - c` for `a = f·x^{2m}`.
pub fn fourier_matrix(spec: &AiryOperatorSpec, grid: &Grid1D) -> Result<BandMatrix> {
    let (exponent, factor) = spec.a.as_monomial().ok_or_else(|| {
        Error::Capability(format!(
            "matrix route needs a monomial damping, got {}; use the kernel route",
            spec.a
        ))
    })?;
    let sign = if spec.adjoint { 1.0 } else { -1.0 };
    let mut m = even_derivative_band(grid, exponent / 2).scale(C64::new(factor, 0.0));
    for (j, xi) in grid.nodes().into_iter().enumerate() {
        m.add(j, j, C64::new(-spec.c, sign * xi));
    }
    Ok(m)
}

pub fn airy_norm_matrix(spec: &AiryOperatorSpec, grid: &Grid1D) -> Result<AiryNorm> {
    if grid.spacing() > MAX_MATRIX_SPACING {
        return Err(Error::Precondition(format!(
            "Fourier grid spacing {} exceeds {MAX_MATRIX_SPACING}",
            grid.spacing()
        )));
    }
    let m = fourier_matrix(spec, grid)?;
    let pair = band_sigma_min(&m, None)?;
    if !(pair.sigma > 0.0) {
        return Err(Error::Degenerate(format!("Airy matrix singular at c = {}", spec.c)));
    }
    let mass = boundary_mass(&pair.vector, grid.len());
    if mass >= BOUNDARY_MASS_TOL {
        log::warn!(
            "Airy matrix route at c = {}: boundary mass {mass:.2e} on L = {}; try a larger L",
            spec.c,
            grid.half_width()
        );
    }
    Ok(AiryNorm {
        method: AiryMethod::Matrix,
        c: spec.c,
        norm: 1.0 / pair.sigma,
        boundary_mass: mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticFamily {
    /// `a = x^p`, `p = 2n`.
    MonomialP(u32),
    /// `a = p log<x>`.
    LogP(f64),
}

impl AsymptoticFamily {
    pub fn from_damping(a: &CoefficientFunction) -> Result<Self> {
        match a {
            CoefficientFunction::Monomial { exponent } => Ok(Self::MonomialP(*exponent)),
            CoefficientFunction::LogBracketPower { p } => Ok(Self::LogP(*p)),
            other => Err(Error::Capability(format!("no closed-form Airy norm for {other}"))),
        }
    }
}

/// Logarithm of the leading-order closed form of `‖(A - c)^{-1}‖`.
pub fn airy_asymptotic_log_norm(family: AsymptoticFamily, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("closed form needs c > 0, got {c}")));
    }
    match family {
        AsymptoticFamily::MonomialP(p) => {
            if p < 2 || p % 2 != 0 {
                return Err(Error::Domain(format!("monomial power must be even and >= 2, got {p}")));
            }
            let n = f64::from(p / 2);
            Ok(0.5 * (PI / (2.0 * n)).ln()
                + (1.0 - 2.0 * n) / (4.0 * n) * c.ln()
                + 4.0 * n / (2.0 * n + 1.0) * c.powf((2.0 * n + 1.0) / (2.0 * n)))
        }
        AsymptoticFamily::LogP(p) => {
            if !(p > 0.0) {
                return Err(Error::Domain(format!("log power must be positive, got {p}")));
            }
            let root = (2.0 * c / p).exp_m1().sqrt();
            Ok(0.5 * (PI / p).ln() + 2.0 * p * root + c / (2.0 * p) - p * PI)
        }
    }
}

pub fn airy_asymptotic_norm(family: AsymptoticFamily, c: f64) -> Result<f64> {
    airy_asymptotic_log_norm(family, c).map(f64::exp)
}

pub fn airy_norm_asymptotic(spec: &AiryOperatorSpec) -> Result<AiryNorm> {
    let family = AsymptoticFamily::from_damping(&spec.a)?;
    Ok(AiryNorm {
        method: AiryMethod::Asymptotic,
        c: spec.c,
        norm: airy_asymptotic_norm(family, spec.c)?,
        boundary_mass: 0.0,
    })
}
