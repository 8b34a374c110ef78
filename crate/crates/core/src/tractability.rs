//! Level selection and closed-form error and point-count bounds for
//! integrating functions whose directional derivatives of all orders are
//! bounded by one.
//!
//! Every bound containing a `k`-th power is evaluated as a natural log; the
//! `ln_*` functions stay finite for `d` up to `10^6` and `eps` down to
//! `1e-300`, while the plain versions exponentiate and may overflow to `inf`.

use std::f64::consts::{E, LN_2, PI};

use crate::error::{Error, Result};
use crate::smolyak::{binomial, ln_binomial, ln_node_count_bound};

/// Values within this distance of an integer are snapped to it before the
/// ceiling is taken.
pub const CEIL_TOLERANCE: f64 = 1e-12;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::ZeroDimension)
    } else {
        Ok(())
    }
}

fn snapped_ceil(v: f64) -> u32 {
    let r = v.round();
    if (v - r).abs() <= CEIL_TOLERANCE {
        r as u32
    } else {
        v.ceil() as u32
    }
}

/// `ceil(max{3 d^(2/3), ln(1/eps)})`, the level that guarantees error `eps`
/// for the Smolyak rule.
pub fn k_eps(eps: f64, dim: usize) -> Result<u32> {
    check_eps(eps)?;
    check_dim(dim)?;
    let v = (3.0 * (dim as f64).powf(2.0 / 3.0)).max(-eps.ln());
    Ok(snapped_ceil(v))
}

/// `ceil(max{4 sqrt(d), ln(1/eps)})`, the exactness degree for a positive
/// cubature rule with the same guarantee.
pub fn k_star(eps: f64, dim: usize) -> Result<u32> {
    check_eps(eps)?;
    check_dim(dim)?;
    let v = (4.0 * (dim as f64).sqrt()).max(-eps.ln());
    Ok(snapped_ceil(v))
}

fn check_k(k: u32) -> Result<f64> {
    if k == 0 {
        Err(Error::ZeroK)
    } else {
        Ok(f64::from(k))
    }
}

/// `ln( sqrt(1/(2 pi k)) (e sqrt(d) / (2k))^k )`: sup-norm distance from
/// polynomials of degree `k - 1`.
pub fn ln_taylor_bound(k: u32, dim: usize) -> Result<f64> {
    let kf = check_k(k)?;
    let d = dim as f64;
    Ok(-0.5 * (2.0 * PI * kf).ln() + kf * (1.0 + 0.5 * d.ln() - (2.0 * kf).ln()))
}

pub fn taylor_bound(k: u32, dim: usize) -> Result<f64> {
    ln_taylor_bound(k, dim).map(f64::exp)
}

/// `ln( (pi k)^(-1/2) (e^3 d / (8 k^2) max{1, d/k})^k )`: worst-case error of
/// `A(d + k, d)`.
pub fn ln_ccs_error_bound(k: u32, dim: usize) -> Result<f64> {
    let kf = check_k(k)?;
    let d = dim as f64;
    let base = 3.0 + d.ln() - 8f64.ln() - 2.0 * kf.ln() + (d / kf).ln().max(0.0);
    Ok(-0.5 * (PI * kf).ln() + kf * base)
}

pub fn ccs_error_bound(k: u32, dim: usize) -> Result<f64> {
    ln_ccs_error_bound(k, dim).map(f64::exp)
}

/// `ln( sqrt(2/(pi k)) (e sqrt(d) / (2k))^k )`: worst-case error of a
/// positive rule of exactness `k` with weights summing to one.
pub fn ln_positive_error_bound(k: u32, dim: usize) -> Result<f64> {
    let kf = check_k(k)?;
    let d = dim as f64;
    Ok(0.5 * (2.0 / (PI * kf)).ln() + kf * (1.0 + 0.5 * d.ln() - (2.0 * kf).ln()))
}

pub fn positive_error_bound(k: u32, dim: usize) -> Result<f64> {
    ln_positive_error_bound(k, dim).map(f64::exp)
}

/// `ln(1 - d / ln eps)` for `eps < 1`; the `eps = 1` case uses
/// `ln(1 + d^(1/3) / 3)`, which dominates `ln(1 + d/k)` whenever
/// `k >= 3 d^(2/3)`.
fn ln_dimension_factor(eps: f64, dim: usize) -> f64 {
    let d = dim as f64;
    if eps < 1.0 {
        (-d / eps.ln()).ln_1p()
    } else {
        (d.cbrt() / 3.0).ln_1p()
    }
}

/// `ln( 2 exp{k (2 + ln(1 - d/ln eps))} )` with `k = k_eps(eps, d)`.
pub fn ln_ccs_point_bound(eps: f64, dim: usize) -> Result<f64> {
    let k = f64::from(k_eps(eps, dim)?);
    Ok(LN_2 + k * (2.0 + ln_dimension_factor(eps, dim)))
}

pub fn ccs_point_bound(eps: f64, dim: usize) -> Result<f64> {
    ln_ccs_point_bound(eps, dim).map(f64::exp)
}

/// Point-count bounds for a positive rule of exactness `k*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TchakalovBound {
    pub k_star: u32,
    /// `C(d + k*, d)` when it fits in `u128`.
    pub binomial: Option<u128>,
    pub ln_binomial: f64,
    /// `ln exp{k* (1 + ln(1 - d / ln eps))}`
    pub ln_exponential: f64,
}

impl TchakalovBound {
    pub fn binomial_value(&self) -> f64 {
        self.binomial.map_or_else(|| self.ln_binomial.exp(), |b| b as f64)
    }

    pub fn exponential_value(&self) -> f64 {
        self.ln_exponential.exp()
    }
}

pub fn tchakalov_point_bound(eps: f64, dim: usize) -> Result<TchakalovBound> {
    let k_star = k_star(eps, dim)?;
    let (n, d) = (dim as u64 + u64::from(k_star), dim as u64);
    let kf = f64::from(k_star);
    let ln_factor = if eps < 1.0 {
        ln_dimension_factor(eps, dim)
    } else {
        (dim as f64 / kf).ln_1p()
    };
    Ok(TchakalovBound {
        k_star,
        binomial: binomial(n, d),
        ln_binomial: ln_binomial(n, d),
        ln_exponential: kf * (1.0 + ln_factor),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// The Clenshaw-Curtis Smolyak rule `A(d + k, d)`.
    Ccs,
    /// A positive interpolatory rule (existence only).
    PositiveCubature,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Ccs => "ccs",
            Variant::PositiveCubature => "positive-cubature",
        }
    }
}

/// Level, guaranteed error and point-count bound for a target accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractabilityPlan {
    pub eps: f64,
    pub dim: usize,
    pub variant: Variant,
    pub k: u32,
    pub error_bound: f64,
    pub ln_point_bound: f64,
    /// `C(d + k, d)`: the norm bound for the Smolyak rule, the node-count
    /// bound for a positive rule.
    pub ln_binomial_bound: f64,
}

impl TractabilityPlan {
    pub fn point_bound(&self) -> f64 {
        self.ln_point_bound.exp()
    }

    pub fn binomial_bound(&self) -> f64 {
        self.ln_binomial_bound.exp()
    }
}

pub fn plan(eps: f64, dim: usize, variant: Variant) -> Result<TractabilityPlan> {
    let (k, ln_error, ln_points) = match variant {
        Variant::Ccs => {
            let k = k_eps(eps, dim)?;
            (k, ln_ccs_error_bound(k, dim)?, ln_ccs_point_bound(eps, dim)?)
        }
        Variant::PositiveCubature => {
            let t = tchakalov_point_bound(eps, dim)?;
            (t.k_star, ln_positive_error_bound(t.k_star, dim)?, t.ln_exponential)
        }
    };
    Ok(TractabilityPlan {
        eps,
        dim,
        variant,
        k,
        error_bound: ln_error.exp(),
        ln_point_bound: ln_points,
        ln_binomial_bound: ln_binomial(dim as u64 + u64::from(k), dim as u64),
    })
}

/// The successive upper bounds on the Smolyak worst-case error at `(k, d)`,
/// as natural logs, each of which must not exceed the next:
///
/// 0. `taylor(2k, d) (1 + C(d+k, d))`
/// 1. `sqrt(1/(4 pi k)) (e sqrt(d)/(4k))^(2k) (1 + e^k (1 + d/k)^k)`
/// 2. `sqrt(1/(pi k)) (e sqrt(d)/(4k))^(2k) e^k (1 + d/k)^k`
/// 3. `(pi k)^(-1/2) (e^3/16)^k (d/k^2 + d^2/k^3)^k`
/// 4. `(pi k)^(-1/2) (e^3 d/(8 k^2) max{1, d/k})^k`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorChain {
    pub k: u32,
    pub dim: usize,
    pub ln_steps: [f64; 5],
}

impl ErrorChain {
    /// Indices `i` with `ln_steps[i] > ln_steps[i + 1] + ln(1 + rel_tol)`.
    pub fn violations(&self, rel_tol: f64) -> Vec<usize> {
        let slack = rel_tol.ln_1p();
        (0..4)
            .filter(|&i| self.ln_steps[i] > self.ln_steps[i + 1] + slack)
            .collect()
    }
}

fn ln_add_one(ln_x: f64) -> f64 {
    // ln(1 + e^x)
    if ln_x > 0.0 {
        ln_x + (-ln_x).exp().ln_1p()
    } else {
        ln_x.exp().ln_1p()
    }
}

pub fn error_chain(k: u32, dim: usize) -> Result<ErrorChain> {
    let kf = check_k(k)?;
    check_dim(dim)?;
    let d = dim as f64;
    let ln_half_power = 2.0 * kf * (1.0 + 0.5 * d.ln() - (4.0 * kf).ln());
    let ln_majorant = kf * (1.0 + (d / kf).ln_1p());
    let step0 = ln_taylor_bound(2 * k, dim)? + ln_add_one(ln_binomial(dim as u64 + u64::from(k), dim as u64));
    let step1 = -0.5 * (4.0 * PI * kf).ln() + ln_half_power + ln_add_one(ln_majorant);
    let step2 = -0.5 * (PI * kf).ln() + ln_half_power + ln_majorant;
    let step3 = -0.5 * (PI * kf).ln() + kf * ((E.powi(3) / 16.0).ln() + (d / (kf * kf) + d * d / (kf * kf * kf)).ln());
    let step4 = ln_ccs_error_bound(k, dim)?;
    Ok(ErrorChain {
        k,
        dim,
        ln_steps: [step0, step1, step2, step3, step4],
    })
}

/// The successive upper bounds on `ln N_d(k_eps)`:
///
/// 0. `ln 2 + k (ln(2e) + ln(1 + d/k))` (node-count bound)
/// 1. `ln 2 + k (ln(2e) + min{ln(1 + d^(1/3)/3), ln(1 + d/ln(1/eps))})`
/// 2. `ln 2 + k (2 + ln(1 - d/ln eps))`
///
/// For `eps = 1` the second branch of the minimum is dropped and step 2 uses
/// the `d^(1/3)` branch.
pub fn point_chain(eps: f64, dim: usize) -> Result<[f64; 3]> {
    let k = k_eps(eps, dim)?;
    let kf = f64::from(k);
    let d = dim as f64;
    let step0 = ln_node_count_bound(dim, k)?;
    let cube_root_branch = (d.cbrt() / 3.0).ln_1p();
    let branch = if eps < 1.0 {
        cube_root_branch.min((d / -eps.ln()).ln_1p())
    } else {
        cube_root_branch
    };
    let step1 = LN_2 + kf * ((2.0 * E).ln() + branch);
    let step2 = ln_ccs_point_bound(eps, dim)?;
    Ok([step0, step1, step2])
}
