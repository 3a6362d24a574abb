//! The companion base-`p/q` representation `φ` and the sliding block code
//! `Φ` carrying traces onto it.
//!
//! `Φ` is evaluated on one trace column read over consecutive times:
//! `Φ(y)[i] = q·md_p(y[i+1]) − p·md_q(y[i])`, where `y[t]` is the units
//! digit of `(p/q)^t ξ`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{Digit, DigitWord, Params};
use crate::automaton::Ca;
use crate::error::{Error, Result};
use crate::language::trace_of;
use crate::numbers::{encode, ExactRational};

/// A digit of `{−(q−1), …, p−1}`.
pub type CompanionDigit = i64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanionWord {
    pub start: i64,
    pub digits: Vec<CompanionDigit>,
}

impl CompanionWord {
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn get(&self, i: i64) -> Option<CompanionDigit> {
        usize::try_from(i - self.start).ok().and_then(|k| self.digits.get(k).copied())
    }

    pub fn in_range(&self, params: Params) -> bool {
        let (p, q) = (params.p() as i64, params.q() as i64);
        self.digits.iter().all(|&d| -(q - 1) <= d && d < p)
    }
}

fn floor(x: &ExactRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

fn ratio(params: Params) -> ExactRational {
    BigRational::new(params.p().into(), params.q().into())
}

fn ratio_pow(params: Params, i: i64) -> ExactRational {
    let r = ratio(params);
    if i >= 0 {
        num_traits::pow(r, i as usize)
    } else {
        num_traits::pow(r.recip(), i.unsigned_abs() as usize)
    }
}

fn require_positive(xi: &ExactRational) -> Result<()> {
    if xi.is_positive() {
        Ok(())
    } else {
        Err(Error::precondition(format!("{xi} is not positive")))
    }
}

/// `ψ(ξ) = q⌊(p/q)ξ⌋ − p⌊ξ⌋`.
pub fn psi(xi: &ExactRational, params: Params) -> CompanionDigit {
    let (p, q) = (BigInt::from(params.p()), BigInt::from(params.q()));
    let v = &q * floor(&(xi * ratio(params))) - &p * floor(xi);
    let v = v.to_i64().expect("ψ is bounded by max(p, q)");
    debug_assert!(-(params.q() as i64 - 1) <= v && v < params.p() as i64);
    v
}

/// `φ(ξ)[i] = ψ((p/q)^i ξ)` for `i_from <= i <= i_to`; negative indices are
/// allowed.
pub fn phi_window(xi: &ExactRational, i_from: i64, i_to: i64, params: Params) -> Result<CompanionWord> {
    require_positive(xi)?;
    if i_from > i_to {
        return Err(Error::precondition(format!("empty index range {i_from}..={i_to}")));
    }
    let r = ratio(params);
    let mut cur = xi * ratio_pow(params, i_from);
    let mut digits = Vec::with_capacity((i_to - i_from + 1) as usize);
    for _ in i_from..=i_to {
        digits.push(psi(&cur, params));
        cur *= &r;
    }
    Ok(CompanionWord { start: i_from, digits })
}

/// `Φ` applied to a finite trace segment `y[0..len)`; the result has one
/// digit fewer and starts at `start`.
pub fn phi_of_trace(y: &[Digit], start: i64, params: Params) -> CompanionWord {
    let (p, q) = (params.p(), params.q());
    let digits = y
        .windows(2)
        .map(|w| q as i64 * (w[1] % p) as i64 - p as i64 * (w[0] % q) as i64)
        .collect();
    CompanionWord { start, digits }
}

/// `Φ(tr(ξ))` at indices `t_from..=t_to`, computed by running the automaton
/// on `encode(ξ)`.
pub fn phi_of_value(ca: &Ca, xi: &ExactRational, t_from: usize, t_to: usize) -> Result<CompanionWord> {
    require_positive(xi)?;
    if t_from > t_to {
        return Err(Error::precondition(format!("empty index range {t_from}..={t_to}")));
    }
    let params = ca.params();
    let x = encode(xi, params)?;
    let tr = trace_of(ca, &x, 0, t_to + 2);
    Ok(phi_of_trace(&tr.digits()[t_from..], t_from as i64, params))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompfracReport {
    pub partial_sum: ExactRational,
    pub error: ExactRational,
    pub bound: ExactRational,
}

impl CompfracReport {
    pub fn within_bound(&self) -> bool {
        self.error <= self.bound
    }
}

/// `(1/p) Σ_{i<=N} (q/p)^i φ(ξ)[i]` against `frac(ξ)`, with the bound
/// `(q/p)^{N+1}` on the error.
pub fn compfrac_reconstruct(xi: &ExactRational, n: usize, params: Params) -> Result<CompfracReport> {
    let phi = phi_window(xi, 0, n as i64, params)?;
    let inv = ratio(params).recip();
    let mut weight = BigRational::new(BigInt::one(), params.p().into());
    let mut sum = BigRational::zero();
    for &d in &phi.digits {
        sum += &weight * BigRational::from_integer(d.into());
        weight *= &inv;
    }
    let frac = xi - BigRational::from_integer(floor(xi));
    let error = (&frac - &sum).abs();
    let bound = num_traits::pow(inv, n + 1);
    let report = CompfracReport { partial_sum: sum, error, bound };
    if !report.within_bound() {
        return Err(Error::ConsistencyViolation(format!(
            "compfrac error {} exceeds {} at N = {n}",
            report.error, report.bound
        )));
    }
    Ok(report)
}

/// Rebuilds a word from its `Φ`-image, the residue `md_p` of its first
/// digit and `md_q` of its last digit.
pub fn reconstruct_from_phi(
    phi: &[CompanionDigit],
    first_mod_p: Digit,
    last_mod_q: Digit,
    params: Params,
) -> DigitWord {
    let (p, q) = (params.p() as i64, params.q() as i64);
    let len = phi.len() + 1;
    let mut mod_p = vec![0i64; len];
    let mut mod_q = vec![0i64; len];
    mod_p[0] = first_mod_p as i64;
    mod_q[len - 1] = last_mod_q as i64;
    // Φ ≡ q·md_p(y[i+1]) (mod p) and Φ ≡ −p·md_q(y[i]) (mod q).
    let q_inv_p = mod_inverse(q, p);
    let p_inv_q = mod_inverse(p, q);
    for (i, &f) in phi.iter().enumerate() {
        mod_p[i + 1] = (f * q_inv_p).rem_euclid(p);
        mod_q[i] = (-f * p_inv_q).rem_euclid(q);
    }
    let digits = mod_p.iter().zip(&mod_q).map(|(&a, &b)| crt(a, b, p, q) as Digit).collect();
    DigitWord::from_vec_unchecked(digits)
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let e = a.extended_gcd(&m);
    e.x.rem_euclid(m)
}

/// The `d ∈ [0, pq)` with `d ≡ a (mod p)` and `d ≡ b (mod q)`.
fn crt(a: i64, b: i64, p: i64, q: i64) -> i64 {
    let k = ((b - a) * mod_inverse(p, q)).rem_euclid(q);
    a + p * k
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectivityReport {
    pub words_checked: usize,
}

/// Checks on every word of length `2..=max_len` that `Φ` together with the
/// two boundary residues determines the word.
pub fn phi_injectivity_check(params: Params, max_len: usize) -> Result<InjectivityReport> {
    if max_len < 2 {
        return Err(Error::precondition("words must have length at least 2"));
    }
    let base = params.base();
    let mut checked = 0;
    for len in 2..=max_len {
        let count = (base as u64).pow(len as u32);
        let mut seen: HashMap<(Vec<CompanionDigit>, Digit, Digit), u64> = HashMap::new();
        for idx in 0..count {
            let mut rest = idx;
            let mut word = vec![0; len];
            for slot in word.iter_mut().rev() {
                *slot = (rest % base as u64) as Digit;
                rest /= base as u64;
            }
            let phi = phi_of_trace(&word, 0, params).digits;
            let first = word[0] % params.p();
            let last = word[len - 1] % params.q();
            let back = reconstruct_from_phi(&phi, first, last, params);
            if back.digits() != word.as_slice() {
                return Err(Error::CollisionFound(format!(
                    "{} reconstructs to {}",
                    DigitWord::from_vec_unchecked(word).render(base),
                    back.render(base)
                )));
            }
            if let Some(prev) = seen.insert((phi, first, last), idx) {
                return Err(Error::CollisionFound(format!("words {prev} and {idx} of length {len}")));
            }
            checked += 1;
        }
    }
    Ok(InjectivityReport { words_checked: checked })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanionRow {
    pub i: usize,
    pub trace_i: Digit,
    pub trace_next: Digit,
    pub big_phi: CompanionDigit,
    pub phi: CompanionDigit,
}

impl CompanionRow {
    pub fn matches(&self) -> bool {
        self.big_phi == self.phi
    }
}

/// Trace digits, `Φ` and `φ` side by side for `i_from..=i_to`.
pub fn companion_rows(ca: &Ca, xi: &ExactRational, i_from: usize, i_to: usize) -> Result<Vec<CompanionRow>> {
    let params = ca.params();
    let phi = phi_window(xi, i_from as i64, i_to as i64, params)?;
    let x = encode(xi, params)?;
    let tr = trace_of(ca, &x, 0, i_to + 2);
    let big = phi_of_trace(&tr.digits()[i_from..], i_from as i64, params);
    Ok((i_from..=i_to)
        .zip(phi.digits.iter().zip(&big.digits))
        .map(|(i, (&ph, &bp))| CompanionRow {
            i,
            trace_i: tr.digits()[i],
            trace_next: tr.digits()[i + 1],
            big_phi: bp,
            phi: ph,
        })
        .collect())
}

pub fn companion_csv(rows: &[CompanionRow]) -> String {
    let mut out = String::from("i,trace_i,trace_i_plus_1,Phi,phi,match\n");
    for r in rows {
        let flag = if r.matches() { "MATCH" } else { "MISMATCH" };
        let _ = writeln!(out, "{},{},{},{},{},{}", r.i, r.trace_i, r.trace_next, r.big_phi, r.phi, flag);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbers::rational;

    fn p32() -> Params {
        Params::new(3, 2).unwrap()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&rational(1, 1), p32()), -1);
        assert_eq!(psi(&rational(1, 2), p32()), 0);
        assert_eq!(psi(&rational(2, 1), p32()), 0);
        for k in 1..50 {
            let xi = rational(k, 7);
            assert_eq!(psi(&xi, p32()), psi(&(&xi + rational(2, 1)), p32()));
        }
    }

    #[test]
    fn phi_window_examples() {
        let w = phi_window(&rational(1, 2), 0, 2, p32()).unwrap();
        assert_eq!(w.digits, vec![0, 2, -1]);
        let w = phi_window(&rational(1, 1), 0, 0, p32()).unwrap();
        assert_eq!(w.digits, vec![-1]);
        let w = phi_window(&rational(1, 1), -3, 1, p32()).unwrap();
        assert_eq!(w.get(0), Some(-1));
        assert!(w.in_range(p32()));
        assert!(phi_window(&rational(0, 1), 0, 1, p32()).is_err());
    }

    #[test]
    fn big_phi_matches_phi_on_examples() {
        let ca = Ca::new(p32()).unwrap();
        let a = phi_of_value(&ca, &rational(1, 1), 0, 0).unwrap();
        assert_eq!(a.digits, vec![-1]);
        let a = phi_of_value(&ca, &rational(1, 2), 0, 2).unwrap();
        assert_eq!(a.digits, vec![0, 2, -1]);
        assert_eq!(phi_of_trace(&[0, 0, 0, 0], 0, p32()).digits, vec![0, 0, 0]);
    }

    #[test]
    fn compfrac_examples() {
        let r = compfrac_reconstruct(&rational(1, 2), 2, p32()).unwrap();
        assert_eq!(r.partial_sum, rational(8, 27));
        assert_eq!(r.error, rational(11, 54));
        assert_eq!(r.bound, rational(8, 27));
        let r = compfrac_reconstruct(&rational(3, 1), 0, p32()).unwrap();
        assert!(r.error <= rational(2, 3));
    }

    #[test]
    fn reconstruction_small() {
        let r = phi_injectivity_check(p32(), 3).unwrap();
        assert_eq!(r.words_checked, 36 + 216);
        assert_eq!(crt(2, 1, 3, 2), 5);
    }

    #[test]
    fn csv_rows() {
        let ca = Ca::new(p32()).unwrap();
        let rows = companion_rows(&ca, &rational(1, 1), 0, 3).unwrap();
        assert!(rows.iter().all(CompanionRow::matches));
        let csv = companion_csv(&rows);
        assert!(csv.starts_with("i,trace_i,trace_i_plus_1,Phi,phi,match\n0,1,1,-1,-1,MATCH\n"));
    }
}
