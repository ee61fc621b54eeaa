//! Turning `eps2` into the exact multiplier `t = e^eps2` the auditor takes.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{usage, CliResult};

pub const MAX_DENOMINATOR: u64 = 1_000_000_000;

/// Side of `e^eps2` (as a double) the rational landed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    Exact,
    Down,
    Up,
}

#[derive(Clone, Debug)]
pub struct Multiplier {
    pub t: BigRational,
    pub eps2: Option<f64>,
    pub rounding: Rounding,
}

impl Multiplier {
    pub fn one() -> Self {
        Multiplier {
            t: BigRational::one(),
            eps2: Some(0.0),
            rounding: Rounding::Exact,
        }
    }

    pub fn from_eps2(eps2: f64) -> CliResult<Self> {
        if !(eps2.is_finite() && eps2 >= 0.0) {
            return Err(usage(format!(
                "--eps2 must be a finite number >= 0, got {eps2}"
            )));
        }
        let x = eps2.exp();
        let exact = BigRational::from_float(x)
            .ok_or_else(|| usage(format!("e^{eps2} overflows a double")))?;
        let t = best_rational(&exact, MAX_DENOMINATOR);
        let rounding = match t.cmp(&exact) {
            Ordering::Equal => Rounding::Exact,
            Ordering::Less => Rounding::Down,
            Ordering::Greater => Rounding::Up,
        };
        Ok(Multiplier {
            t,
            eps2: Some(eps2),
            rounding,
        })
    }

    pub fn from_t(t: BigRational) -> CliResult<Self> {
        if t < BigRational::one() {
            return Err(usage(format!("--t must be at least 1, got {t}")));
        }
        Ok(Multiplier {
            t,
            eps2: None,
            rounding: Rounding::Exact,
        })
    }
}

/// Closest fraction to `x >= 0` with denominator at most `max_den`,
/// from the convergents and the last admissible semiconvergent.
pub fn best_rational(x: &BigRational, max_den: u64) -> BigRational {
    let max_den = BigInt::from(max_den);
    if x.denom() <= &max_den {
        return x.clone();
    }
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut r = x.clone();
    loop {
        let a = r.floor().to_integer();
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            // largest m with q0 + m q1 <= max_den
            let m = (&max_den - &q0) / &q1;
            let semi = BigRational::new(&p0 + &m * &p1, &q0 + &m * &q1);
            let conv = BigRational::new(p1, q1);
            let d_semi = (&semi - x).abs();
            let d_conv = (&conv - x).abs();
            return if d_semi < d_conv { semi } else { conv };
        }
        let p2 = &p0 + &a * &p1;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = &r - BigRational::from_integer(a);
        if frac.is_zero() {
            return BigRational::new(p1, q1);
        }
        r = frac.recip();
    }
}
