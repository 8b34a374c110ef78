//! Integrands with closed-form integrals over `[0, 1]^d`.
//!
//! The ridge functions `g(<theta, x>)` with unit `theta` are certified members
//! of the class of smooth functions whose directional derivatives of every
//! order are bounded by one: for any unit `eta`,
//! `D^k_eta g(<theta, x>) = <theta, eta>^k g^(k)(<theta, x>)`, and
//! `|<theta, eta>| <= 1`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::cc1d::cc_rule;
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// A `d`-variate function on the unit cube.
pub trait Integrand {
    fn dim(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> f64;

    fn exact_integral(&self) -> Option<f64> {
        None
    }

    /// Justification tag when the function is a certified member of the
    /// unit ball of directional derivatives.
    fn fd_certificate(&self) -> Option<&'static str> {
        None
    }

    fn is_fd_member(&self) -> bool {
        self.fd_certificate().is_some()
    }
}

/// Wraps a closure as an [`Integrand`].
pub struct FnIntegrand<F> {
    dim: usize,
    f: F,
    exact: Option<f64>,
}

impl<F: Fn(&[f64]) -> f64> FnIntegrand<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, exact: None }
    }

    pub fn with_exact(mut self, exact: f64) -> Self {
        self.exact = Some(exact);
        self
    }
}

impl<F: Fn(&[f64]) -> f64> Integrand for FnIntegrand<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn exact_integral(&self) -> Option<f64> {
        self.exact
    }
}

const RIDGE_COS_CERT: &str = "ridge-cos: |D^k_eta f| = |a|^k |<theta,eta>|^k |cos^(k)| <= |a|^k <= 1";
const RIDGE_EXP_CERT: &str =
    "ridge-exp: |D^k_eta f| = a^k |<theta,eta>|^k f <= a^k <= 1 since <theta,x> <= sum max(theta_j,0)";
const UNIT_TOL: f64 = 1e-14;
const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `prod_j x_j^alpha_j`
    Monomial { exponents: Vec<u32> },
    /// `cos(a <theta, x> + b)`
    RidgeCos { a: f64, theta: Vec<f64>, b: f64 },
    /// `exp(a <theta, x> - a s)`, `s = sum_j max(theta_j, 0)`
    RidgeExp { a: f64, theta: Vec<f64>, shift: f64 },
}

pub fn monomial(exponents: Vec<u32>) -> TestFunction {
    TestFunction::Monomial { exponents }
}

fn check_unit(theta: &[f64]) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::ZeroDimension);
    }
    let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidParameter(format!(
            "direction must be a unit vector, |theta| = {norm}"
        )));
    }
    Ok(())
}

pub fn ridge_cos(a: f64, theta: Vec<f64>, b: f64) -> Result<TestFunction> {
    check_unit(&theta)?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter("ridge-cos parameters must be finite".into()));
    }
    Ok(TestFunction::RidgeCos { a, theta, b })
}

pub fn ridge_exp(a: f64, theta: Vec<f64>) -> Result<TestFunction> {
    check_unit(&theta)?;
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ridge-exp amplitude must lie in (0, 1], got {a}"
        )));
    }
    let shift = theta.iter().map(|t| t.max(0.0)).sum();
    Ok(TestFunction::RidgeExp { a, theta, shift })
}

/// `(e^{it} - 1) / (it)`
fn phi(t: f64) -> Complex64 {
    if t.abs() < SERIES_CUTOFF {
        let t2 = t * t;
        Complex64::new(1.0 - t2 / 6.0 + t2 * t2 / 120.0, t / 2.0 - t * t2 / 24.0)
    } else {
        Complex64::new(t.sin() / t, (1.0 - t.cos()) / t)
    }
}

/// `(e^t - 1) / t`
fn psi(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        1.0 + t / 2.0 + t * t / 6.0 + t * t * t / 24.0
    } else {
        t.exp_m1() / t
    }
}

fn dot(theta: &[f64], x: &[f64]) -> f64 {
    theta.iter().zip(x).map(|(t, xi)| t * xi).sum()
}

impl Integrand for TestFunction {
    fn dim(&self) -> usize {
        match self {
            TestFunction::Monomial { exponents } => exponents.len(),
            TestFunction::RidgeCos { theta, .. } | TestFunction::RidgeExp { theta, .. } => theta.len(),
        }
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Monomial { exponents } => exponents
                .iter()
                .zip(x)
                .map(|(&e, xi)| xi.powi(e as i32))
                .product(),
            TestFunction::RidgeCos { a, theta, b } => (a * dot(theta, x) + b).cos(),
            TestFunction::RidgeExp { a, theta, shift } => (a * (dot(theta, x) - shift)).exp(),
        }
    }

    fn exact_integral(&self) -> Option<f64> {
        Some(match self {
            TestFunction::Monomial { exponents } => exponents
                .iter()
                .map(|&e| 1.0 / (f64::from(e) + 1.0))
                .product(),
            TestFunction::RidgeCos { a, theta, b } => {
                let prod = theta
                    .iter()
                    .fold(Complex64::from_polar(1.0, *b), |acc, t| acc * phi(a * t));
                prod.re
            }
            TestFunction::RidgeExp { a, theta, shift } => {
                (-a * shift).exp() * theta.iter().map(|t| psi(a * t)).product::<f64>()
            }
        })
    }

    fn fd_certificate(&self) -> Option<&'static str> {
        match self {
            TestFunction::Monomial { exponents } if exponents.iter().all(|&e| e == 0) => {
                Some("constant 1")
            }
            TestFunction::Monomial { .. } => None,
            TestFunction::RidgeCos { a, .. } if a.abs() <= 1.0 => Some(RIDGE_COS_CERT),
            TestFunction::RidgeCos { .. } => None,
            TestFunction::RidgeExp { .. } => Some(RIDGE_EXP_CERT),
        }
    }
}

/// Default limit on the number of evaluations of [`brute_force_integral`].
pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 1 << 33;

/// Full tensor Clenshaw-Curtis rule `U^l (x) ... (x) U^l` applied to `f`.
pub fn brute_force_integral<F: Integrand + ?Sized>(f: &F, level: u32) -> Result<f64> {
    brute_force_integral_with_cap(f, level, DEFAULT_BRUTE_FORCE_CAP)
}

pub fn brute_force_integral_with_cap<F: Integrand + ?Sized>(f: &F, level: u32, cap: u128) -> Result<f64> {
    let dim = f.dim();
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let rule = cc_rule(level)?;
    let m = rule.len();
    let total = (m as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::PointCapExceeded { predicted: total, cap });
    }
    let nodes = rule.nodes();
    let mut idx = vec![0usize; dim];
    let mut x: Vec<f64> = vec![nodes[0].coordinate; dim];
    // prefix[j] = product of weights of coordinates j+1..d
    let mut prefix = vec![1.0; dim + 1];
    for j in (0..dim).rev() {
        prefix[j] = prefix[j + 1] * nodes[0].weight;
    }
    let mut acc = NeumaierSum::new();
    loop {
        let value = f.evaluate(&x);
        if !value.is_finite() {
            return Err(Error::NonFiniteValue { point: x, value });
        }
        acc += prefix[0] * value;
        // first coordinate fastest
        let mut pos = 0;
        loop {
            if pos == dim {
                return Ok(acc.value());
            }
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
            x[pos] = nodes[0].coordinate;
            pos += 1;
        }
        x[pos] = nodes[idx[pos]].coordinate;
        for j in (0..=pos).rev() {
            prefix[j] = prefix[j + 1] * nodes[idx[j]].weight;
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(v: impl Iterator<Item = String>) -> String {
            v.collect::<Vec<_>>().join(",")
        }
        match self {
            TestFunction::Monomial { exponents } => {
                write!(f, "monomial:{}", join(exponents.iter().map(u32::to_string)))
            }
            TestFunction::RidgeCos { a, theta, b } => write!(
                f,
                "ridge-cos:{a},{b},{}",
                join(theta.iter().map(f64::to_string))
            ),
            TestFunction::RidgeExp { a, theta, .. } => {
                write!(f, "ridge-exp:{a},{}", join(theta.iter().map(f64::to_string)))
            }
        }
    }
}

/// Parses an integrand specification for a given dimension.
///
/// Grammar:
///
/// ```text
/// const | constant                  the constant 1
/// monomial:e1,...,ed                prod x_j^e_j
/// ridge-cos:a,b[,t1,...,td]         cos(a <theta,x> + b)
/// ridge-exp:a[,t1,...,td]           exp(a <theta,x> - a sum max(theta_j,0))
/// ```
///
/// Ridge directions are normalised to unit length; when omitted the diagonal
/// `(1,...,1)/sqrt(d)` is used.
pub fn parse_integrand(spec: &str, dim: usize) -> Result<TestFunction> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), a.trim()),
        None => (spec.trim(), ""),
    };
    let fields: Vec<&str> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',').map(str::trim).collect()
    };
    let numbers = |s: &[&str]| -> Result<Vec<f64>> {
        s.iter()
            .map(|t| {
                f64::from_str(t).map_err(|_| Error::Parse(format!("`{t}` is not a number in `{spec}`")))
            })
            .collect()
    };
    let direction = |s: &[&str]| -> Result<Vec<f64>> {
        if s.is_empty() {
            return Ok(vec![1.0 / (dim as f64).sqrt(); dim]);
        }
        let t = numbers(s)?;
        if t.len() != dim {
            return Err(Error::Parse(format!(
                "direction has {} components, dimension is {dim}",
                t.len()
            )));
        }
        let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Parse("direction must be a non-zero finite vector".into()));
        }
        let mut unit: Vec<f64> = t.iter().map(|v| v / norm).collect();
        // exact unit vectors (axes) stay exact
        let n2 = unit.iter().map(|v| v * v).sum::<f64>().sqrt();
        unit.iter_mut().for_each(|v| *v /= n2);
        Ok(unit)
    };
    match name {
        "const" | "constant" if fields.is_empty() => Ok(monomial(vec![0; dim])),
        "monomial" => {
            let exps = fields
                .iter()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| Error::Parse(format!("`{t}` is not an exponent in `{spec}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if exps.len() != dim {
                return Err(Error::Parse(format!(
                    "monomial has {} exponents, dimension is {dim}",
                    exps.len()
                )));
            }
            Ok(monomial(exps))
        }
        "ridge-cos" if fields.len() >= 2 => {
            let ab = numbers(&fields[..2])?;
            ridge_cos(ab[0], direction(&fields[2..])?, ab[1])
        }
        "ridge-exp" if !fields.is_empty() => {
            let a = numbers(&fields[..1])?[0];
            ridge_exp(a, direction(&fields[1..])?)
        }
        _ => Err(Error::Parse(format!("unrecognised integrand `{spec}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_1_SQRT_2};

    #[test]
    fn monomial_integrals() {
        assert_eq!(monomial(vec![0, 0]).exact_integral(), Some(1.0));
        assert_eq!(monomial(vec![2, 0]).exact_integral(), Some(1.0 / 3.0));
        assert_eq!(monomial(vec![1, 1, 1]).exact_integral(), Some(0.125));
        assert!(!monomial(vec![1, 0]).is_fd_member());
        assert!(monomial(vec![0, 0, 0]).is_fd_member());
    }

    #[test]
    fn ridge_cos_closed_forms() {
        let f = ridge_cos(1.0, vec![1.0], 0.0).unwrap();
        assert!((f.exact_integral().unwrap() - 1f64.sin()).abs() < 1e-15);
        let c = ridge_cos(0.0, vec![0.6, 0.8], 0.7).unwrap();
        assert!((c.exact_integral().unwrap() - 0.7f64.cos()).abs() < 1e-15);
        let diag = ridge_cos(1.0, vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], 0.0).unwrap();
        // cos(s + t) with s, t in [0, 1/sqrt 2] integrates to
        // Re[phi(c)^2] with c = 1/sqrt 2
        let c = FRAC_1_SQRT_2;
        let expected = (2.0 * (c / 2.0).sin() / c).powi(2) * c.cos();
        assert!((diag.exact_integral().unwrap() - expected).abs() < 1e-14);
        assert!(diag.is_fd_member());
        assert!(!ridge_cos(1.5, vec![1.0], 0.0).unwrap().is_fd_member());
        assert!(ridge_cos(1.0, vec![0.5, 0.5], 0.0).is_err());
    }

    #[test]
    fn ridge_exp_closed_forms() {
        let f = ridge_exp(1.0, vec![1.0]).unwrap();
        assert!((f.exact_integral().unwrap() - (1.0 - 1.0 / E)).abs() < 1e-15);
        let g = ridge_exp(1.0, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.exact_integral(), f.exact_integral());
        assert!(ridge_exp(0.0, vec![1.0]).is_err());
        assert!(ridge_exp(1.1, vec![1.0]).is_err());
        assert!(ridge_exp(0.5, vec![-0.6, 0.8]).unwrap().is_fd_member());
    }

    #[test]
    fn series_branches_are_continuous() {
        for t in [9.99e-5, 1.0001e-4, -9.99e-5, -1.0001e-4] {
            let p = phi(t);
            let direct = Complex64::new(t.sin() / t, (1.0 - t.cos()) / t);
            assert!((p - direct).norm() < 1e-12);
            assert!((psi(t) - t.exp_m1() / t).abs() < 1e-15);
        }
        assert_eq!(phi(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(psi(0.0), 1.0);
    }

    #[test]
    fn brute_force_oracle() {
        let one = monomial(vec![0, 0, 0]);
        for level in 1..=5 {
            assert!((brute_force_integral(&one, level).unwrap() - 1.0).abs() < 1e-14);
        }
        let f = ridge_cos(1.0, vec![1.0], 0.0).unwrap();
        assert!((brute_force_integral(&f, 8).unwrap() - 1f64.sin()).abs() < 1e-14);
        let m = monomial(vec![2, 2]);
        assert!((brute_force_integral(&m, 4).unwrap() - 1.0 / 9.0).abs() < 1e-13);
        let diag = ridge_cos(1.0, vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], 0.0).unwrap();
        let bf = brute_force_integral(&diag, 10).unwrap();
        assert!((bf - diag.exact_integral().unwrap()).abs() < 1e-12);
        assert!(matches!(
            brute_force_integral_with_cap(&m, 5, 100),
            Err(Error::PointCapExceeded { predicted: 289, .. })
        ));
    }

    #[test]
    fn parse_specs() {
        assert_eq!(parse_integrand("const", 2).unwrap(), monomial(vec![0, 0]));
        assert_eq!(parse_integrand("monomial:3,0", 2).unwrap(), monomial(vec![3, 0]));
        let f = parse_integrand("ridge-cos:1,0.5", 4).unwrap();
        match &f {
            TestFunction::RidgeCos { a, b, theta } => {
                assert_eq!((*a, *b), (1.0, 0.5));
                assert!(theta.iter().all(|t| (t - 0.5).abs() < 1e-15));
            }
            _ => panic!(),
        }
        let g = parse_integrand("ridge-exp:0.5,3,4", 2).unwrap();
        match &g {
            TestFunction::RidgeExp { theta, .. } => {
                assert!((theta[0] - 0.6).abs() < 1e-15 && (theta[1] - 0.8).abs() < 1e-15)
            }
            _ => panic!(),
        }
        assert_eq!(
            parse_integrand(&g.to_string(), 2).unwrap().exact_integral(),
            g.exact_integral()
        );
        assert!(parse_integrand("monomial:1", 2).is_err());
        assert!(parse_integrand("ridge-cos:1", 2).is_err());
        assert!(parse_integrand("ridge-cos:1,0,0,0", 2).is_err());
        assert!(parse_integrand("gaussian:1", 2).is_err());
        assert!(parse_integrand("ridge-exp:x", 1).is_err());
    }
}
