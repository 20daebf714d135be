//! Uniform Dirichlet grids on `[-L, L]`, the discrete Schrödinger operator
//! `-d²/dx² + q` and the energy Gram matrix of the product space.

use ndarray::Array2;

use crate::coeffs::CoefficientFunction;
use crate::error::{Error, Result};
use crate::linalg::{BandCholesky, BandMatrix, Metric, C64};

/// Fraction of nodes at each end inspected by [`boundary_mass`].
pub const BOUNDARY_FRACTION: f64 = 0.05;
/// Largest acceptable boundary mass for a resolved vector.
pub const BOUNDARY_MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    half_width: f64,
    n: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(half_width: f64, n_interior: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Domain(format!("half width must be positive, got {half_width}")));
        }
        if n_interior < 3 {
            return Err(Error::Domain(format!("need at least 3 interior nodes, got {n_interior}")));
        }
        Ok(Self {
            half_width,
            n: n_interior,
            h: 2.0 * half_width / (n_interior as f64 + 1.0),
        })
    }

    /// Finest grid on `[-L, L]` whose spacing does not exceed `h_max`.
    pub fn with_spacing(half_width: f64, h_max: f64) -> Result<Self> {
        if !(h_max > 0.0) {
            return Err(Error::Domain(format!("spacing must be positive, got {h_max}")));
        }
        let cells = (2.0 * half_width / h_max).ceil() as usize;
        Self::new(half_width, cells.max(4) - 1)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Same interval, twice as many cells.
    pub fn refined(&self) -> Self {
        Self::new(self.half_width, 2 * self.n + 1).expect("refinement of a valid grid")
    }
}

/// Which variable the matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    X,
    Fourier,
}

/// Norm in which the operator is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormTag {
    Euclidean,
    Energy,
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub matrix: BandMatrix,
    pub grid: Grid1D,
    pub space: Space,
    pub norm: NormTag,
}

impl DiscreteOperator {
    pub fn new(matrix: BandMatrix, grid: Grid1D, space: Space, norm: NormTag) -> Result<Self> {
        let d = matrix.dim();
        if d != grid.len() && d != 2 * grid.len() {
            return Err(Error::Precondition(format!(
                "matrix dimension {d} does not match grid with {} nodes",
                grid.len()
            )));
        }
        Ok(Self {
            matrix,
            grid,
            space,
            norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn to_dense(&self) -> Array2<C64> {
        self.matrix.to_dense()
    }
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Tridiagonal `-d²/dx²` with Dirichlet ends (positive operator).
pub fn laplacian_band(grid: &Grid1D) -> BandMatrix {
    let n = grid.len();
    let ih2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut m = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        m.set(i, i, re(2.0 * ih2));
        if i + 1 < n {
            m.set(i, i + 1, re(-ih2));
            m.set(i + 1, i, re(-ih2));
        }
    }
    m
}

pub fn second_derivative(grid: &Grid1D) -> DiscreteOperator {
    DiscreteOperator {
        matrix: laplacian_band(grid),
        grid: grid.clone(),
        space: Space::X,
        norm: NormTag::Euclidean,
    }
}

/// Band matrix of `(-1)^m d^{2m}/dx^{2m}` built as the `m`-th power of the
/// positive second difference.
pub fn even_derivative_band(grid: &Grid1D, m: u32) -> BandMatrix {
    let k = laplacian_band(grid);
    let mut out = BandMatrix::identity(grid.len());
    for _ in 0..m {
        out = out.matmul(&k);
    }
    out
}

/// Diagonal multiplication by `f` at the nodes.
pub fn multiplication_band(f: &CoefficientFunction, grid: &Grid1D) -> BandMatrix {
    let vals: Vec<f64> = grid.nodes().iter().map(|&x| f.eval(x)).collect();
    BandMatrix::from_diagonal(&vals)
}

/// `H_q = -d²/dx² + q`.
pub fn build_hq(q: &CoefficientFunction, grid: &Grid1D) -> DiscreteOperator {
    let matrix = laplacian_band(grid).add_scaled(re(1.0), &multiplication_band(q, grid));
    DiscreteOperator {
        matrix,
        grid: grid.clone(),
        space: Space::X,
        norm: NormTag::Euclidean,
    }
}

/// Dense forward-difference matrix `D₁` of shape `(N+1) × N`.
pub fn forward_difference(grid: &Grid1D) -> Array2<f64> {
    let n = grid.len();
    let ih = 1.0 / grid.spacing();
    let mut d = Array2::zeros((n + 1, n));
    for i in 0..=n {
        if i < n {
            d[[i, i]] = ih;
        }
        if i > 0 {
            d[[i, i - 1]] = -ih;
        }
    }
    d
}

/// `W = h · blockdiag(D₁ᵀD₁ + diag q, I)` together with its Cholesky factor.
///
/// The factor `h` makes `uᵀWu` a quadrature of the continuous energy norm.
#[derive(Debug, Clone)]
pub struct EnergyGram {
    grid: Grid1D,
    diag: Vec<f64>,
    off: f64,
    upper: BandCholesky,
}

impl EnergyGram {
    pub fn dim(&self) -> usize {
        2 * self.grid.len()
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let mut w = Array2::zeros((2 * n, 2 * n));
        for i in 0..n {
            w[[i, i]] = self.diag[i];
            if i + 1 < n {
                w[[i, i + 1]] = self.off;
                w[[i + 1, i]] = self.off;
            }
            w[[n + i, n + i]] = h;
        }
        w
    }

    /// Lower-triangular `L` with `W = L Lᵀ`.
    pub fn cholesky_dense(&self) -> Array2<f64> {
        let n = self.grid.len();
        let sh = self.grid.spacing().sqrt();
        let mut l = Array2::zeros((2 * n, 2 * n));
        l.slice_mut(ndarray::s![..n, ..n]).assign(&self.upper.to_dense());
        for i in 0..n {
            l[[n + i, n + i]] = sh;
        }
        l
    }

    /// `Lᵀ u`.
    pub fn apply_cholesky_transpose(&self, u: &[C64]) -> Vec<C64> {
        let n = self.grid.len();
        let sh = self.grid.spacing().sqrt();
        let mut out = self.upper.apply_lt(&u[..n]);
        out.extend(u[n..].iter().map(|v| v * sh));
        out
    }

    /// `u* W u`.
    pub fn norm(&self, u: &[C64]) -> f64 {
        crate::linalg::norm(self, u)
    }
}

impl Metric for EnergyGram {
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut s = x[i] * self.diag[i];
            if i > 0 {
                s += x[i - 1] * self.off;
            }
            if i + 1 < n {
                s += x[i + 1] * self.off;
            }
            out.push(s);
        }
        out.extend(x[n..].iter().map(|v| v * h));
        out
    }

    fn solve(&self, x: &[C64]) -> Vec<C64> {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let mut out = self.upper.solve(&x[..n]);
        out.extend(x[n..].iter().map(|v| v / h));
        out
    }
}

pub fn build_energy_gram(q: &CoefficientFunction, grid: &Grid1D) -> Result<EnergyGram> {
    let n = grid.len();
    let h = grid.spacing();
    let nodes = grid.nodes();
    let mut diag = Vec::with_capacity(n);
    for &x in &nodes {
        let qx = q.eval(x);
        if !(qx >= 0.0) || !qx.is_finite() {
            return Err(Error::Domain(format!("potential must be finite and >= 0, q({x}) = {qx}")));
        }
        diag.push(h * (2.0 / (h * h) + qx));
    }
    let off = -1.0 / h;
    let upper = BandCholesky::factor(n, 1, |i, j| if i == j { diag[i] } else { off })?;
    Ok(EnergyGram {
        grid: grid.clone(),
        diag,
        off,
        upper,
    })
}

/// Energy norm of `(u₁, u₂)` summed node by node from forward differences.
pub fn energy_norm_direct(q: &CoefficientFunction, grid: &Grid1D, u1: &[C64], u2: &[C64]) -> f64 {
    let n = grid.len();
    let h = grid.spacing();
    let at = |j: isize| -> C64 {
        if j < 0 || j as usize >= n {
            C64::new(0.0, 0.0)
        } else {
            u1[j as usize]
        }
    };
    let grad: f64 = (0..=n as isize)
        .map(|j| ((at(j) - at(j - 1)) / h).norm_sqr())
        .sum();
    let pot: f64 = (0..n).map(|j| q.eval(grid.node(j)) * u1[j].norm_sqr()).sum();
    let kin: f64 = u2.iter().map(|v| v.norm_sqr()).sum();
    (h * (grad + pot + kin)).sqrt()
}

/// Fraction of `‖v‖²` carried by the outer 5% of nodes at either end.
///
/// A vector of length `k·N` is read as `k` stacked node functions.
pub fn boundary_mass(v: &[C64], n_nodes: usize) -> f64 {
    if n_nodes == 0 || v.is_empty() {
        return 0.0;
    }
    let band = ((n_nodes as f64 * BOUNDARY_FRACTION).ceil() as usize).max(1);
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let outer: f64 = v
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let j = i % n_nodes;
            j < band || j >= n_nodes - band
        })
        .map(|(_, z)| z.norm_sqr())
        .sum();
    outer / total
}

/// Real-vector variant of [`boundary_mass`].
pub fn boundary_mass_real(v: &[f64], n_nodes: usize) -> f64 {
    let c: Vec<C64> = v.iter().map(|&x| re(x)).collect();
    boundary_mass(&c, n_nodes)
}

/// Smallest `L` with `min(a(L), q(L), L²) ≥ 10·scale`; bounded coefficients
/// are left out of the minimum.
pub fn suggest_half_width(a: &CoefficientFunction, q: &CoefficientFunction, scale: f64) -> f64 {
    let target = 10.0 * scale.max(1.0);
    let ok = |l: f64| {
        let mut m = l * l;
        for f in [a, q] {
            if f.is_unbounded() {
                m = m.min(f.eval(l));
            }
        }
        m >= target
    };
    let mut hi = 1.0;
    while !ok(hi) && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Values at `N, 2N+1, 4N+3, ...` and the successive gaps `|v_k − v_{k+1}|`.
pub fn refinement_study<F>(grid: &Grid1D, levels: usize, mut f: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(&Grid1D) -> Result<f64>,
{
    let mut g = grid.clone();
    let mut vals = Vec::with_capacity(levels);
    for _ in 0..levels {
        vals.push(f(&g)?);
        g = g.refined();
    }
    let gaps = vals.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    Ok((vals, gaps))
}
