//! Exact conversion between nonnegative rationals and base-`pq`
//! configurations.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{Digit, Params};
use crate::automaton::{Automaton, Ca};
use crate::config::Configuration;
use crate::error::{Error, Result};

pub type ExactRational = BigRational;

pub fn rational(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"` or an integer string. Decimal points are rejected.
pub fn parse_rational(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("{t:?} is not an integer: {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

pub fn format_rational(x: &ExactRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Removes every prime factor shared with `base`; the result is 1 exactly
/// when `den` divides some power of `base`.
fn strip_base_factors(den: &BigUint, base: u32) -> BigUint {
    let mut rest = den.clone();
    let mut b = BigUint::from(base);
    loop {
        let g = rest.gcd(&b);
        if g.is_one() {
            return rest;
        }
        while (&rest % &g).is_zero() {
            rest /= &g;
        }
        b = g;
    }
}

pub fn is_terminating(xi: &ExactRational, params: Params) -> bool {
    let den = xi.denom().magnitude();
    strip_base_factors(den, params.base()).is_one()
}

/// The finite configuration of the terminating base-`pq` expansion of `xi`.
pub fn encode(xi: &ExactRational, params: Params) -> Result<Configuration> {
    if xi.is_negative() {
        return Err(Error::NegativeValue(format_rational(xi)));
    }
    if !is_terminating(xi, params) {
        return Err(Error::NonTerminating { value: format_rational(xi), base: params.base() });
    }
    let base = BigInt::from(params.base());
    let mut int_part = xi.numer() / xi.denom();
    let mut frac_num = xi.numer() - &int_part * xi.denom();
    let den = xi.denom().clone();

    // Integer digits, least significant first.
    let mut int_digits = Vec::new();
    while !int_part.is_zero() {
        let (q, r) = int_part.div_rem(&base);
        int_digits.push(r.to_u32().expect("digit fits in u32"));
        int_part = q;
    }
    if int_digits.is_empty() {
        int_digits.push(0);
    }
    let n_int = int_digits.len() as i64;
    let mut core: Vec<Digit> = int_digits.into_iter().rev().collect();
    while !frac_num.is_zero() {
        frac_num *= &base;
        let (d, r) = frac_num.div_rem(&den);
        core.push(d.to_u32().expect("digit fits in u32"));
        frac_num = r;
    }
    Ok(Configuration::new(0, core, 0, 1 - n_int))
}

/// Exact value of a configuration with zero left tail; a right tail of
/// `pq - 1` is summed as a geometric series.
pub fn decode(x: &Configuration, params: Params) -> Result<ExactRational> {
    if x.left_tail() != 0 {
        return Err(Error::LeftTailNonzero);
    }
    let top = params.base() - 1;
    if x.right_tail() != 0 && x.right_tail() != top {
        return Err(Error::UnsupportedRightTail { tail: x.right_tail() });
    }
    let base = BigInt::from(params.base());
    // Horner over the core gives N with value N * base^(1 - end).
    let mut n = BigInt::zero();
    for &d in x.core() {
        n = n * &base + BigInt::from(d);
    }
    let end = x.end();
    let mut value = scale_by_power(BigRational::from_integer(n), &base, 1 - end);
    if x.right_tail() == top {
        // Positions >= end all hold base-1: the tail sums to base^(1 - end).
        value += scale_by_power(BigRational::one(), &base, 1 - end);
    }
    Ok(value)
}

fn scale_by_power(x: ExactRational, base: &BigInt, exp: i64) -> ExactRational {
    let pow = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    if exp >= 0 {
        x * BigRational::from_integer(pow)
    } else {
        x / BigRational::from_integer(pow)
    }
}

/// Trajectory of the CA and the exact rational multiplication side by side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicationReport {
    /// Decoded values after each step `1..=steps`.
    pub trajectory: Vec<ExactRational>,
}

/// Runs `steps` iterations of `Mul_{p/q}` on `encode(xi)` and checks each
/// decoded row against `(p/q)^t xi`.
pub fn verify_multiplication(xi: &ExactRational, ca: &Ca, steps: usize) -> Result<MultiplicationReport> {
    let params = ca.params();
    let ratio = rational(params.p() as i64, params.q() as i64);
    let mut x = encode(xi, params)?;
    let mut expected = xi.clone();
    let mut trajectory = Vec::with_capacity(steps);
    for t in 1..=steps {
        x = ca.apply(&x, Automaton::FmulPOverQ);
        expected *= &ratio;
        let got = decode(&x, params)?;
        if got != expected {
            return Err(Error::ConsistencyViolation(format!(
                "step {t}: CA value {} but (p/q)^t xi = {}",
                format_rational(&got),
                format_rational(&expected)
            )));
        }
        trajectory.push(got);
    }
    Ok(MultiplicationReport { trajectory })
}
