//! Damping and potential families `a(x)`, `q(x)` and sampled checks of the
//! structural assumptions they must satisfy (unbounded damping, symbol-class
//! derivative bounds, eventual domination `q <= K a`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest derivative order available in closed form.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

const MAX_MONOMIAL_EXPONENT: u32 = 32;
const MAX_NESTING: usize = 8;

/// A non-negative smooth coefficient function from one of the fixed families.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFunction {
    /// `x^e` with `e` even and at least 2.
    Monomial { exponent: u32 },
    /// `<x>^p = (1 + x^2)^(p/2)`, `p > 0`.
    BracketPower { p: f64 },
    /// `p log<x> = (p/2) log(1 + x^2)`, `p > 0`.
    LogBracketPower { p: f64 },
    /// `k >= 0`.
    Constant { k: f64 },
    /// `factor * base(x)`, `factor > 0`.
    Scaled {
        base: Box<CoefficientFunction>,
        factor: f64,
    },
}

impl CoefficientFunction {
    pub fn monomial(exponent: u32) -> Result<Self> {
        if exponent < 2 || !exponent.is_multiple_of(2) || exponent > MAX_MONOMIAL_EXPONENT {
            return Err(Error::Domain(format!(
                "monomial exponent must be even in [2, {MAX_MONOMIAL_EXPONENT}], got {exponent}"
            )));
        }
        Ok(Self::Monomial { exponent })
    }

    pub fn bracket(p: f64) -> Result<Self> {
        positive("bracket power", p)?;
        Ok(Self::BracketPower { p })
    }

    pub fn log_bracket(p: f64) -> Result<Self> {
        positive("log-bracket power", p)?;
        Ok(Self::LogBracketPower { p })
    }

    pub fn constant(k: f64) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::Domain(format!("constant must be finite and >= 0, got {k}")));
        }
        Ok(Self::Constant { k })
    }

    pub fn scaled(base: CoefficientFunction, factor: f64) -> Result<Self> {
        positive("scale factor", factor)?;
        if base.depth() >= MAX_NESTING {
            return Err(Error::Domain("scaled descriptors nested too deeply".into()));
        }
        Ok(Self::Scaled {
            base: Box::new(base),
            factor,
        })
    }

    /// `x^2`, the running example of the damped-wave analysis.
    pub fn quadratic() -> Self {
        Self::Monomial { exponent: 2 }
    }

    fn depth(&self) -> usize {
        match self {
            Self::Scaled { base, .. } => 1 + base.depth(),
            _ => 0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        // order 0 is always supported
        self.derivative(0, x).unwrap_or(f64::NAN)
    }

    /// Closed-form derivative of the given order at `x`.
    pub fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::Capability(format!(
                "derivative order {order} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}"
            )));
        }
        Ok(match self {
            Self::Monomial { exponent } => {
                let e = *exponent as usize;
                if order > e {
                    0.0
                } else {
                    let coef: f64 = ((e - order + 1)..=e).map(|k| k as f64).product();
                    coef * x.powi((e - order) as i32)
                }
            }
            Self::BracketPower { p } => bracket_derivative(*p, order, x),
            Self::LogBracketPower { p } => {
                if order == 0 {
                    0.5 * p * x.mul_add(x, 1.0).ln()
                } else {
                    // p log<x> = (p/2)[log(x+i) + log(x-i)]
                    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
                    let fact: f64 = (1..order).map(|k| k as f64).product();
                    let z = Complex64::new(x, 1.0).powi(-(order as i32));
                    p * sign * fact * z.re
                }
            }
            Self::Constant { k } => {
                if order == 0 {
                    *k
                } else {
                    0.0
                }
            }
            Self::Scaled { base, factor } => factor * base.derivative(order, x)?,
        })
    }

    /// Whether the family tends to `+inf` as `|x| -> inf`.
    pub fn is_unbounded(&self) -> bool {
        match self {
            Self::Constant { .. } => false,
            Self::Scaled { base, .. } => base.is_unbounded(),
            _ => true,
        }
    }

    /// `(exponent, factor)` when the function is `factor * x^exponent`.
    pub fn as_monomial(&self) -> Option<(u32, f64)> {
        match self {
            Self::Monomial { exponent } => Some((*exponent, 1.0)),
            Self::Scaled { base, factor } => base.as_monomial().map(|(e, f)| (e, f * factor)),
            _ => None,
        }
    }

    /// `(k)` when the function is a constant (possibly scaled).
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Self::Constant { k } => Some(*k),
            Self::Scaled { base, factor } => base.as_constant().map(|k| k * factor),
            _ => None,
        }
    }

    /// Antiderivative `Phi` with `Phi' = self` and `Phi(0) = 0`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match self {
            Self::Monomial { exponent } => {
                let e = *exponent as i32 + 1;
                x.powi(e) / e as f64
            }
            Self::BracketPower { p } => {
                let p = *p;
                gauss_legendre(|t| t.mul_add(t, 1.0).powf(0.5 * p), 0.0, x)
            }
            Self::LogBracketPower { p } => {
                0.5 * p * (x * x.mul_add(x, 1.0).ln() - 2.0 * x + 2.0 * x.atan())
            }
            Self::Constant { k } => k * x,
            Self::Scaled { base, factor } => factor * base.antiderivative(x),
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain(format!("{what} must be finite and > 0, got {v}")));
    }
    Ok(())
}

/// d^n/dx^n (x+i)^s (x-i)^s via Leibniz, `s = p/2`.
fn bracket_derivative(p: f64, order: usize, x: f64) -> f64 {
    let s = 0.5 * p;
    let zp = Complex64::new(x, 1.0);
    let zm = Complex64::new(x, -1.0);
    let falling = |k: usize| -> f64 { (0..k).map(|j| s - j as f64).product() };
    let mut binom = 1.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=order {
        if k > 0 {
            binom = binom * (order - k + 1) as f64 / k as f64;
        }
        let left = zp.powf(s - k as f64) * falling(k);
        let right = zm.powf(s - (order - k) as f64) * falling(order - k);
        acc += left * right * binom;
    }
    acc.re
}

/// Composite 8-point Gauss-Legendre on panels of width <= 0.25.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const WEIGHTS: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    if a == b {
        return 0.0;
    }
    let panels = (((b - a).abs() / 0.25).ceil() as usize).max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * width;
        let half = 0.5 * width;
        for (node, weight) in NODES.iter().zip(WEIGHTS.iter()) {
            total += weight * (f(mid - half * node) + f(mid + half * node));
        }
    }
    total * 0.5 * width
}

impl fmt::Display for CoefficientFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Monomial { exponent } => write!(f, "monomial:{exponent}"),
            Self::BracketPower { p } => write!(f, "bracket:{p}"),
            Self::LogBracketPower { p } => write!(f, "logbracket:{p}"),
            Self::Constant { k } => write!(f, "const:{k}"),
            Self::Scaled { base, factor } => write!(f, "scaled:{base}:{factor}"),
        }
    }
}

impl FromStr for CoefficientFunction {
    type Err = Error;

    /// Parses `monomial:2`, `bracket:1.5`, `logbracket:0.25`, `const:0`,
    /// `scaled:<descriptor>:<factor>`; case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        parse_descriptor(&lower, 0)
    }
}

fn parse_descriptor(s: &str, depth: usize) -> Result<CoefficientFunction> {
    if depth > MAX_NESTING {
        return Err(Error::Parse("scaled descriptors nested too deeply".into()));
    }
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("expected <kind>:<value>, got {s:?}")))?;
    match kind.trim() {
        "monomial" => {
            let e: u32 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad monomial exponent {rest:?}")))?;
            CoefficientFunction::monomial(e)
        }
        "bracket" => CoefficientFunction::bracket(parse_float(rest)?),
        "logbracket" => CoefficientFunction::log_bracket(parse_float(rest)?),
        "const" | "constant" => CoefficientFunction::constant(parse_float(rest)?),
        "scaled" => {
            let (base, factor) = rest
                .rsplit_once(':')
                .ok_or_else(|| Error::Parse(format!("expected scaled:<base>:<factor>, got {s:?}")))?;
            let base = parse_descriptor(base, depth + 1)?;
            CoefficientFunction::scaled(base, parse_float(factor)?)
        }
        other => Err(Error::Parse(format!(
            "unknown coefficient family {other:?} (expected monomial, bracket, logbracket, const, scaled)"
        ))),
    }
}

fn parse_float(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite number {s:?}")));
    }
    Ok(v)
}

/// Empirical constants for the structural assumptions, sampled on a grid.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub unbounded_ok: bool,
    /// `C_n = max |a^(n)(x)| <x>^n / (1 + a(x))`, `n = 1..=n_max`.
    pub a_derivative_constants: Vec<f64>,
    /// Same ratio for `q`.
    pub q_derivative_constants: Vec<f64>,
    /// Smallest `K` with `q <= K a` for `|x| > crossover` on the grid.
    pub domination_constant: f64,
    pub crossover: f64,
    pub sample_grid: Vec<f64>,
}

impl AssumptionReport {
    /// All constants finite and the damping unbounded.
    pub fn passes(&self) -> bool {
        self.unbounded_ok
            && self.domination_constant.is_finite()
            && self
                .a_derivative_constants
                .iter()
                .chain(&self.q_derivative_constants)
                .all(|c| c.is_finite())
    }
}

pub const DEFAULT_SAMPLE_POINTS: usize = 4096;
pub const DEFAULT_X_MAX: f64 = 1e4;

/// Symmetric log-spaced grid on `[-x_max, x_max]` with `points` nodes
/// (including 0).
pub fn log_sample_grid(x_max: f64, points: usize) -> Vec<f64> {
    let half = (points.max(3) - 1) / 2;
    let lo = (1e-3_f64).min(x_max / 10.0).ln();
    let hi = x_max.ln();
    let positive: Vec<f64> = (0..half)
        .map(|k| (lo + (hi - lo) * k as f64 / (half - 1).max(1) as f64).exp())
        .collect();
    let mut grid: Vec<f64> = positive.iter().rev().map(|x| -x).collect();
    grid.push(0.0);
    grid.extend(positive);
    grid
}

pub fn check_assumptions(
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    x_max: f64,
    n_max: usize,
) -> Result<AssumptionReport> {
    check_assumptions_with(a, q, x_max, n_max, DEFAULT_SAMPLE_POINTS, 1.0)
}

pub fn check_assumptions_with(
    a: &CoefficientFunction,
    q: &CoefficientFunction,
    x_max: f64,
    n_max: usize,
    points: usize,
    crossover: f64,
) -> Result<AssumptionReport> {
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::Precondition(format!("x_max must be > 0, got {x_max}")));
    }
    if !(1..=MAX_DERIVATIVE_ORDER).contains(&n_max) {
        return Err(Error::Precondition(format!(
            "n_max must lie in 1..={MAX_DERIVATIVE_ORDER}, got {n_max}"
        )));
    }
    let grid = log_sample_grid(x_max, points);
    let symbol_constants = |f: &CoefficientFunction| -> Result<Vec<f64>> {
        (1..=n_max)
            .map(|n| {
                grid.iter().try_fold(0.0_f64, |acc, &x| {
                    let bracket = x.mul_add(x, 1.0).sqrt();
                    let ratio = f.derivative(n, x)?.abs() * bracket.powi(n as i32)
                        / (1.0 + f.eval(x));
                    Ok(acc.max(ratio))
                })
            })
            .collect()
    };
    let a_consts = symbol_constants(a)?;
    let q_consts = symbol_constants(q)?;
    let domination = grid
        .iter()
        .filter(|x| x.abs() > crossover)
        .map(|&x| {
            let (av, qv) = (a.eval(x), q.eval(x));
            if qv == 0.0 {
                0.0
            } else if av > 0.0 {
                qv / av
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0_f64, f64::max);
    Ok(AssumptionReport {
        unbounded_ok: a.is_unbounded(),
        a_derivative_constants: a_consts,
        q_derivative_constants: q_consts,
        domination_constant: domination,
        crossover,
        sample_grid: grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    fn families() -> Vec<CoefficientFunction> {
        vec![
            CoefficientFunction::monomial(2).unwrap(),
            CoefficientFunction::monomial(4).unwrap(),
            CoefficientFunction::bracket(1.5).unwrap(),
            CoefficientFunction::bracket(0.5).unwrap(),
            CoefficientFunction::log_bracket(0.25).unwrap(),
            CoefficientFunction::log_bracket(1.0).unwrap(),
            CoefficientFunction::constant(3.0).unwrap(),
            CoefficientFunction::scaled(CoefficientFunction::monomial(2).unwrap(), 10.0).unwrap(),
        ]
    }

    #[test]
    fn closed_form_values() {
        let x2 = CoefficientFunction::quadratic();
        assert_eq!(x2.derivative(0, 3.0).unwrap(), 9.0);
        assert_eq!(x2.derivative(2, 5.0).unwrap(), 2.0);
        assert_eq!(x2.derivative(3, 5.0).unwrap(), 0.0);
        let s = CoefficientFunction::scaled(x2, 10.0).unwrap();
        assert!((s.derivative(0, 1.5).unwrap() - 22.5).abs() < 1e-12);
    }

    #[test]
    fn log_bracket_first_derivative_matches_finite_difference() {
        let f = CoefficientFunction::log_bracket(1.0).unwrap();
        for &x in &[-7.5, -1.0, -0.3, 0.0, 0.4, 2.0, 9.0] {
            let exact = x / (1.0 + x * x);
            let closed = f.derivative(1, x).unwrap();
            assert!((closed - exact).abs() <= 1e-14 * (1.0 + exact.abs()));
            let fd = fd5(|t| f.eval(t), x, 1e-3);
            assert!((fd - closed).abs() <= 1e-8 * closed.abs().max(1e-3), "x={x}");
        }
    }

    #[test]
    fn every_order_agrees_with_finite_difference_of_previous() {
        for f in families() {
            for order in 1..=MAX_DERIVATIVE_ORDER {
                for k in 0..41 {
                    let x = -10.0 + 0.5 * k as f64 + 0.013;
                    let exact = f.derivative(order, x).unwrap();
                    let h = 1e-3 * (1.0 + x.abs());
                    let fd = fd5(|t| f.derivative(order - 1, t).unwrap(), x, h);
                    let scale = exact.abs().max(f.derivative(order - 1, x).unwrap().abs()).max(1e-8);
                    assert!(
                        (fd - exact).abs() <= 1e-6 * scale,
                        "{f} order {order} at {x}: closed {exact} vs fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn order_above_cap_is_a_capability_error() {
        let f = CoefficientFunction::quadratic();
        assert!(matches!(f.derivative(9, 1.0), Err(Error::Capability(_))));
    }

    #[test]
    fn antiderivatives_differentiate_back() {
        for f in families() {
            for &x in &[-3.0, -0.7, 0.0, 0.9, 4.0] {
                let d = fd5(|t| f.antiderivative(t), x, 1e-3);
                assert!((d - f.eval(x)).abs() < 1e-8 * (1.0 + f.eval(x)), "{f} at {x}");
            }
            assert_eq!(f.antiderivative(0.0), 0.0);
        }
    }

    #[test]
    fn descriptors_parse_case_insensitively() {
        let f: CoefficientFunction = "Scaled:MONOMIAL:2:10.0".parse().unwrap();
        assert_eq!(f.as_monomial(), Some((2, 10.0)));
        assert_eq!("const:0".parse::<CoefficientFunction>().unwrap().as_constant(), Some(0.0));
        assert!("bracket:1.5".parse::<CoefficientFunction>().is_ok());
        assert!("logbracket:0.25".parse::<CoefficientFunction>().is_ok());
        for bad in ["monomial:3", "bracket:-1", "const:nan", "wave:2", "scaled:monomial:2", ""] {
            assert!(bad.parse::<CoefficientFunction>().is_err(), "{bad}");
        }
    }

    #[test]
    fn assumption_report_for_scaled_quadratic() {
        let a = CoefficientFunction::quadratic();
        let q = CoefficientFunction::scaled(a.clone(), 10.0).unwrap();
        let r = check_assumptions(&a, &q, 100.0, 2).unwrap();
        assert!(r.unbounded_ok);
        assert!((r.domination_constant - 10.0).abs() < 1e-12);
        let c1 = r.a_derivative_constants[0];
        assert!(c1.is_finite() && c1 <= 2.0 * 2f64.sqrt() + 1e-12);
        // brute force on a fine linear grid: sup of 2|x|<x>/(1+x^2)
        let brute = (0..=200_000)
            .map(|k| -100.0 + 1e-3 * k as f64)
            .map(|x: f64| 2.0 * x.abs() * (1.0 + x * x).sqrt() / (1.0 + x * x))
            .fold(0.0, f64::max);
        assert!((c1 - brute).abs() < 1e-3 * brute);
    }

    #[test]
    fn bounded_damping_is_flagged() {
        let a = CoefficientFunction::constant(1.0).unwrap();
        let r = check_assumptions(&a, &a, 100.0, 1).unwrap();
        assert!(!r.unbounded_ok);
        assert!(!r.passes());
    }

    #[test]
    fn symbol_constants_stabilize_under_domain_doubling() {
        let fams = [
            CoefficientFunction::monomial(2).unwrap(),
            CoefficientFunction::monomial(4).unwrap(),
            CoefficientFunction::bracket(1.5).unwrap(),
        ];
        for a in fams {
            let r1 = check_assumptions(&a, &a, 1e4, 4).unwrap();
            let r2 = check_assumptions(&a, &a, 2e4, 4).unwrap();
            for (c1, c2) in r1.a_derivative_constants.iter().zip(&r2.a_derivative_constants) {
                assert!((c1 - c2).abs() <= 0.01 * c1.abs().max(1e-12), "{a}: {c1} vs {c2}");
            }
        }
    }

    #[test]
    fn invalid_check_arguments() {
        let a = CoefficientFunction::quadratic();
        assert!(check_assumptions(&a, &a, 0.0, 2).is_err());
        assert!(check_assumptions(&a, &a, 10.0, 9).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn evaluation_is_nonnegative(x in -1e3f64..1e3, p in 0.05f64..4.0, k in 0.0f64..10.0) {
                for f in [
                    CoefficientFunction::quadratic(),
                    CoefficientFunction::bracket(p).unwrap(),
                    CoefficientFunction::log_bracket(p).unwrap(),
                    CoefficientFunction::constant(k).unwrap(),
                ] {
                    prop_assert!(f.eval(x) >= 0.0);
                    for order in 0..=MAX_DERIVATIVE_ORDER {
                        prop_assert!(f.derivative(order, x).unwrap().is_finite());
                    }
                }
            }

            #[test]
            fn scaled_potential_dominates_with_exactly_its_factor(kappa in 0.01f64..100.0) {
                let a = CoefficientFunction::bracket(1.5).unwrap();
                let q = CoefficientFunction::scaled(a.clone(), kappa).unwrap();
                let r = check_assumptions_with(&a, &q, 100.0, 1, 257, 1.0).unwrap();
                prop_assert!((r.domination_constant - kappa).abs() <= 1e-12 * kappa);
            }

            #[test]
            fn display_round_trips(p in 0.01f64..10.0, e in 1u32..8, f in 0.01f64..50.0) {
                for c in [
                    CoefficientFunction::monomial(2 * e).unwrap(),
                    CoefficientFunction::bracket(p).unwrap(),
                    CoefficientFunction::scaled(CoefficientFunction::log_bracket(p).unwrap(), f).unwrap(),
                ] {
                    let back: CoefficientFunction = c.to_string().parse().unwrap();
                    prop_assert_eq!(back, c);
                }
            }
        }
    }
}
