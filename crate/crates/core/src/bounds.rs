//! Closed-form privacy bounds for subset retrieval and group testing.
//!
//! Each evaluator returns the raw formula value together with a flag telling
//! whether the parameters sit inside the regime where the bound is proven.
//! Nothing errors merely for being outside a regime, so sweeps can chart
//! the regime boundaries.
//!
//! | bound                 | formula                                                  | regime       |
//! |-----------------------|----------------------------------------------------------|--------------|
//! | general lower         | `((d-b)(n-d-b) - b^2) / (d(n-d)) - 2 eps1 - (e^eps2 - 1)` | `b^2 <= n`   |
//! | general achievable    | `(d-b)(n-d-b) / (d(n-d))`                                | `b <= min(d, n-d)` |
//! | union-noise lower     | `1 - b/(n-d) - (e^eps2 - 1)`                             | `d + b < n`  |
//! | union-noise achievable| `1 - (b-1)/(n-d)`                                        | `2 d b^2 < n`|
//!
//! The group-testing bounds coincide with the general lower bound and the
//! union-noise achievable value; [`gt_lower`] and [`gt_upper`] delegate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::binomial;
use crate::error::{Error, Result};

/// Slack applied when an exact audited value is compared with a bound that
/// involves `e^eps2` in floating point. Unused at `eps2 = 0`.
pub const EPS2_COMPARISON_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    /// Reported value; lower bounds are clipped at zero.
    pub value: f64,
    /// Formula value before clipping.
    pub raw: f64,
    pub regime_ok: bool,
    pub regime_note: String,
}

/// `(n, d, beta, eps1, eps2, delta)` of a privacy claim.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrivacyParams {
    pub n: usize,
    pub d: usize,
    pub beta: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(n: usize, d: usize, beta: usize, eps1: f64, eps2: f64, delta: f64) -> Result<Self> {
        check_nd(n, d)?;
        check_beta(beta)?;
        check_eps(eps1, eps2)?;
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameters(format!(
                "delta must lie in [0, 1], got {delta}"
            )));
        }
        Ok(PrivacyParams {
            n,
            d,
            beta,
            eps1,
            eps2,
            delta,
        })
    }

    /// Whether the claimed `delta` clears the general lower bound.
    pub fn is_consistent_with_lower_bound(&self) -> Result<bool> {
        let lower = thm1_lower(self.n, self.d, self.beta, self.eps1, self.eps2)?;
        Ok(!lower.regime_ok || self.delta + EPS2_COMPARISON_SLACK >= lower.raw)
    }
}

fn check_nd(n: usize, d: usize) -> Result<()> {
    if d == 0 || d >= n {
        return Err(Error::InvalidParameters(format!(
            "need 0 < d < n, got n={n}, d={d}"
        )));
    }
    Ok(())
}

fn check_beta(beta: usize) -> Result<()> {
    if beta == 0 {
        return Err(Error::InvalidParameters("beta must be at least 1".into()));
    }
    Ok(())
}

fn check_eps(eps1: f64, eps2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps1) {
        return Err(Error::InvalidParameters(format!(
            "eps1 must lie in [0, 1], got {eps1}"
        )));
    }
    if !(eps2 >= 0.0 && eps2.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "eps2 must be finite and >= 0, got {eps2}"
        )));
    }
    Ok(())
}

fn q(num: i128, den: i128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn f(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn lower_report(raw: f64, regime_ok: bool, regime_note: String) -> BoundReport {
    BoundReport {
        value: raw.max(0.0),
        raw,
        regime_ok,
        regime_note,
    }
}

/// `((d-b)(n-d-b) - b^2) / (d(n-d))`, the general lower bound at `eps1 = eps2 = 0`.
pub fn thm1_lower_exact(n: usize, d: usize, beta: usize) -> Result<BigRational> {
    check_nd(n, d)?;
    let (n, d, b) = (n as i128, d as i128, beta as i128);
    Ok(q((d - b) * (n - d - b) - b * b, d * (n - d)))
}

/// General lower bound on `delta` for any mechanism with accuracy radius `beta`.
pub fn thm1_lower(n: usize, d: usize, beta: usize, eps1: f64, eps2: f64) -> Result<BoundReport> {
    check_beta(beta)?;
    check_eps(eps1, eps2)?;
    let base = f(&thm1_lower_exact(n, d, beta)?);
    let raw = base - 2.0 * eps1 - eps2.exp_m1();
    let ok = beta * beta <= n;
    let note = if ok {
        format!("beta^2 = {} <= n = {n}", beta * beta)
    } else {
        format!("outside regime: beta^2 = {} > n = {n}", beta * beta)
    };
    Ok(lower_report(raw, ok, note))
}

/// `(d-b)(n-d-b) / (d(n-d))`.
pub fn thm1_upper_exact(n: usize, d: usize, beta: usize) -> Result<BigRational> {
    check_nd(n, d)?;
    check_beta(beta)?;
    if beta > d.min(n - d) {
        return Err(Error::InvalidParameters(format!(
            "beta = {beta} exceeds min(d, n-d) = {}",
            d.min(n - d)
        )));
    }
    let (n, d, b) = (n as i128, d as i128, beta as i128);
    Ok(q((d - b) * (n - d - b), d * (n - d)))
}

/// Value achieved by sampling uniformly near the input, at `eps1 = eps2 = 0`.
pub fn thm1_upper(n: usize, d: usize, beta: usize) -> Result<BoundReport> {
    let exact = thm1_upper_exact(n, d, beta)?;
    let raw = f(&exact);
    Ok(BoundReport {
        value: raw,
        raw,
        regime_ok: true,
        regime_note: format!("beta <= min(d, n-d) = {}", d.min(n - d)),
    })
}

/// `1 - b/(n-d)`.
pub fn thm2_lower_exact(n: usize, d: usize, beta: usize) -> Result<BigRational> {
    check_nd(n, d)?;
    Ok(q(1, 1) - q(beta as i128, (n - d) as i128))
}

/// Lower bound for mechanisms that release `e ∪ B` with `B` independent of `e`.
pub fn thm2_lower(n: usize, d: usize, beta: usize, eps2: f64) -> Result<BoundReport> {
    check_beta(beta)?;
    check_eps(0.0, eps2)?;
    let raw = f(&thm2_lower_exact(n, d, beta)?) - eps2.exp_m1();
    let ok = d + beta < n;
    let note = if ok {
        format!("d + beta = {} < n = {n}", d + beta)
    } else {
        format!("outside regime: d + beta = {} >= n = {n}", d + beta)
    };
    Ok(lower_report(raw, ok, note))
}

/// `1 - (b-1)/(n-d)`.
pub fn thm2_upper_exact(n: usize, d: usize, beta: usize) -> Result<BigRational> {
    check_nd(n, d)?;
    check_beta(beta)?;
    Ok(q(1, 1) - q(beta as i128 - 1, (n - d) as i128))
}

/// Value achieved by the union mechanism, at `eps1 = eps2 = 0`.
pub fn thm2_upper(n: usize, d: usize, beta: usize) -> Result<BoundReport> {
    let raw = f(&thm2_upper_exact(n, d, beta)?);
    let lhs = 2 * d * beta * beta;
    let ok = lhs < n;
    let note = if ok {
        format!("2 d beta^2 = {lhs} < n = {n}")
    } else {
        format!("outside regime: 2 d beta^2 = {lhs} >= n = {n}")
    };
    Ok(BoundReport {
        value: raw,
        raw,
        regime_ok: ok,
        regime_note: note,
    })
}

/// Lower bound for any private testing function and decoder.
pub fn gt_lower(n: usize, d: usize, beta: usize, eps1: f64, eps2: f64) -> Result<BoundReport> {
    thm1_lower(n, d, beta, eps1, eps2)
}

/// Value achieved by noise-before-pooling with a reconstructing design.
pub fn gt_upper(n: usize, d: usize, beta: usize) -> Result<BoundReport> {
    thm2_upper(n, d, beta)
}

/// All four bounds for one parameter point. The general achievable value is
/// `None` when `beta > min(d, n-d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSet {
    pub thm1_lower: BoundReport,
    pub thm1_upper: Option<BoundReport>,
    pub thm2_lower: BoundReport,
    pub thm2_upper: BoundReport,
}

pub fn all_bounds(n: usize, d: usize, beta: usize, eps1: f64, eps2: f64) -> Result<BoundSet> {
    Ok(BoundSet {
        thm1_lower: thm1_lower(n, d, beta, eps1, eps2)?,
        thm1_upper: thm1_upper(n, d, beta).ok(),
        thm2_lower: thm2_lower(n, d, beta, eps2)?,
        thm2_upper: thm2_upper(n, d, beta)?,
    })
}

/// `Pr[|e ∪ B| = d + alpha]` for `B` uniform over `beta`-subsets:
/// `C(d, beta-alpha) C(n-d, alpha) / C(n, beta)`.
pub fn union_size_probability(n: usize, d: usize, beta: usize, alpha: usize) -> BigRational {
    if alpha > beta || d > n || beta > n {
        return BigRational::zero();
    }
    let num = binomial(d, beta - alpha) * binomial(n - d, alpha);
    BigRational::new(BigInt::from(num), BigInt::from(binomial(n, beta)))
}

/// Whether an exact audited delta clears a floating-point lower bound,
/// allowing [`EPS2_COMPARISON_SLACK`].
pub fn meets_lower_bound(audited: &BigRational, bound: &BoundReport) -> bool {
    f(audited) + EPS2_COMPARISON_SLACK >= bound.raw
}
