//! Exhaustive enumeration of `L^n` of the trace subshift.
//!
//! The column-0 trace over times `0..n` depends only on the window
//! `x[-(n-1) ..= n-1]`, and every window is realized, so `L^n` is exactly
//! the set of traces of the `(pq)^(2n-1)` windows. Two routes compute it:
//!
//! * [`Method::Windows`] runs the three-digit rule over every window.
//! * [`Method::Sweep`] reads the window as the integer `N` of the finite
//!   configuration with value `N / (pq)^(n-1)`. The trace digit at time `t`
//!   is then `floor(p^t N / (q^t (pq)^(n-1))) mod pq`, a step function of
//!   `N`, so it suffices to visit one `N` per interval between consecutive
//!   breakpoints of these `n` step functions.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::arith::{max_packed_len, Digit, DigitWord, Params};
use crate::automaton::{Ca, Direction, LocalRule};
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    #[default]
    Sweep,
    Windows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumOptions {
    /// Largest admissible window count `(pq)^(2n-1)`.
    pub budget: u128,
    pub method: Method,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { budget: DEFAULT_BUDGET, method: Method::Sweep }
    }
}

impl EnumOptions {
    pub fn with_method(method: Method) -> Self {
        EnumOptions { method, ..Default::default() }
    }
}

/// Number of windows that determine `L^n`, saturating at `u128::MAX`.
pub fn window_count(params: Params, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    (params.base() as u128).checked_pow((2 * n - 1) as u32).unwrap_or(u128::MAX)
}

pub fn check_budget(params: Params, n: usize, budget: u128) -> Result<()> {
    let required = window_count(params, n);
    if required > budget {
        Err(Error::BudgetExceeded { required, budget })
    } else {
        Ok(())
    }
}

/// A set of equal-length trace words, stored as sorted packed keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSet {
    params: Params,
    n: usize,
    keys: Vec<u128>,
}

impl WordSet {
    pub fn from_keys(params: Params, n: usize, mut keys: Vec<u128>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        WordSet { params, n, keys }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn word_len(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u128] {
        &self.keys
    }

    pub fn contains_key(&self, key: u128) -> bool {
        self.keys.binary_search(&key).is_ok()
    }

    pub fn index_of(&self, key: u128) -> Option<usize> {
        self.keys.binary_search(&key).ok()
    }

    pub fn contains(&self, word: &[Digit]) -> bool {
        word.len() == self.n && self.contains_key(pack(word, self.params.base()))
    }

    pub fn word(&self, key: u128) -> DigitWord {
        unpack(key, self.n, self.params.base())
    }

    pub fn words(&self) -> impl Iterator<Item = DigitWord> + '_ {
        self.keys.iter().map(move |&k| self.word(k))
    }
}

pub(crate) fn pack(word: &[Digit], base: u32) -> u128 {
    word.iter().fold(0u128, |acc, &d| acc * base as u128 + d as u128)
}

pub(crate) fn unpack(key: u128, len: usize, base: u32) -> DigitWord {
    let mut digits = vec![0; len];
    let mut k = key;
    for slot in digits.iter_mut().rev() {
        *slot = (k % base as u128) as Digit;
        k /= base as u128;
    }
    DigitWord::from_vec_unchecked(digits)
}

/// Trace of the center cell of a width-`2n-1` window over `n` steps.
pub fn trace_from_window(window: &[Digit], ca: &Ca) -> Result<DigitWord> {
    if window.len().is_multiple_of(2) {
        return Err(Error::LengthParity { len: window.len() });
    }
    let base = ca.params().base();
    if let Some(&d) = window.iter().find(|&&d| d >= base) {
        return Err(Error::InvalidDigit { digit: d, base });
    }
    let rule = ca.fmul(Direction::POverQ);
    let mut row = window.to_vec();
    let mut out = Vec::with_capacity(window.len() / 2 + 1);
    loop {
        out.push(row[row.len() / 2]);
        if row.len() == 1 {
            break;
        }
        row = rule.apply_word(&row);
    }
    Ok(DigitWord::from_vec_unchecked(out))
}

/// `L^n` of the trace subshift of `Mul_{p/q}` for `params = (p, q)`.
pub fn enumerate_words(params: Params, n: usize, opts: &EnumOptions) -> Result<WordSet> {
    check_budget(params, n, opts.budget)?;
    if n == 0 {
        return Ok(WordSet::from_keys(params, 0, vec![0]));
    }
    if n > max_packed_len(params.base()) {
        return Err(Error::WordTooLong { len: n, base: params.base() });
    }
    let keys = match opts.method {
        Method::Sweep => sweep(params, n)?,
        Method::Windows => windows(params, n)?,
    };
    Ok(WordSet::from_keys(params, n, keys))
}

fn merge(sets: Vec<HashSet<u128>>) -> Vec<u128> {
    let mut all: HashSet<u128> = HashSet::new();
    for s in sets {
        if all.is_empty() {
            all = s;
        } else {
            all.extend(s);
        }
    }
    all.into_iter().collect()
}

fn sweep(params: Params, n: usize) -> Result<Vec<u128>> {
    let b = params.base() as u128;
    let overflow = || Error::BudgetExceeded { required: u128::MAX, budget: u128::MAX };
    let total = b.checked_pow((2 * n - 1) as u32).ok_or_else(overflow)?;
    let scale = b.pow((n - 1) as u32);
    let mut num = Vec::with_capacity(n);
    let mut den = Vec::with_capacity(n);
    for t in 0..n {
        num.push((params.p() as u128).pow(t as u32));
        den.push((params.q() as u128).pow(t as u32).checked_mul(scale).ok_or_else(overflow)?);
    }
    // p^t * N must not overflow for N < total.
    num[n - 1].checked_mul(total).ok_or_else(overflow)?;
    (b.checked_add(1).and_then(|b1| b1.checked_mul(den[n - 1]))).ok_or_else(overflow)?;

    let chunks = rayon::current_num_threads().max(1) as u128 * 4;
    let step = total.div_ceil(chunks).max(1);
    let bounds: Vec<(u128, u128)> = (0..chunks)
        .map(|i| (i * step, ((i + 1) * step).min(total)))
        .filter(|(lo, hi)| lo < hi)
        .collect();
    let sets: Vec<HashSet<u128>> = bounds
        .into_par_iter()
        .map(|(lo, hi)| sweep_range(b, &num, &den, lo, hi))
        .collect();
    Ok(merge(sets))
}

fn sweep_range(b: u128, num: &[u128], den: &[u128], lo: u128, hi: u128) -> HashSet<u128> {
    let n = num.len();
    let weight: Vec<u128> = (0..n).map(|t| b.pow((n - 1 - t) as u32)).collect();
    let mut value: Vec<u128> = (0..n).map(|t| num[t] * lo / den[t]).collect();
    let mut digit: Vec<u128> = value.iter().map(|v| v % b).collect();
    let next_break = |t: usize, v: u128| ((v + 1) * den[t]).div_ceil(num[t]);
    let mut next: Vec<u128> = (0..n).map(|t| next_break(t, value[t])).collect();
    let mut key: u128 = (0..n).map(|t| digit[t] * weight[t]).sum();
    let mut out = HashSet::new();
    let mut cur = lo;
    while cur < hi {
        out.insert(key);
        cur = *next.iter().min().unwrap();
        for t in 0..n {
            if next[t] == cur {
                // Each breakpoint raises the floor by exactly one: p^t < q^t (pq)^(n-1).
                value[t] += 1;
                if digit[t] + 1 == b {
                    digit[t] = 0;
                    key -= (b - 1) * weight[t];
                } else {
                    digit[t] += 1;
                    key += weight[t];
                }
                next[t] = next_break(t, value[t]);
            }
        }
    }
    out
}

fn windows(params: Params, n: usize) -> Result<Vec<u128>> {
    let ca = Ca::new(params)?;
    let rule = ca.fmul(Direction::POverQ).clone();
    let base = params.base();
    let sets: Vec<HashSet<u128>> = (0..base)
        .into_par_iter()
        .map(|lead| windows_with_lead(&rule, base, n, lead))
        .collect();
    Ok(merge(sets))
}

/// All windows whose first digit is `lead`, visited in odometer order with
/// the space-time triangle updated incrementally from the changed digit.
fn windows_with_lead(rule: &LocalRule, base: u32, n: usize, lead: Digit) -> HashSet<u128> {
    let width = 2 * n - 1;
    let mut rows: Vec<Vec<Digit>> = (0..n).map(|t| vec![0; width - 2 * t]).collect();
    rows[0][0] = lead;
    let mut out = HashSet::new();
    let mut changed = 0usize;
    loop {
        for t in 1..n {
            let start = changed.saturating_sub(2 * t);
            let (prev, cur) = rows.split_at_mut(t);
            let prev = &prev[t - 1];
            let cur = &mut cur[0];
            for j in start..cur.len() {
                cur[j] = rule.eval3(prev[j], prev[j + 1], prev[j + 2]);
            }
        }
        let key = (0..n).fold(0u128, |acc, t| acc * base as u128 + rows[t][n - 1 - t] as u128);
        out.insert(key);
        // Odometer over positions 1..width.
        let row0 = &mut rows[0];
        let mut k = width - 1;
        loop {
            if k == 0 {
                return out;
            }
            if row0[k] + 1 < base {
                row0[k] += 1;
                break;
            }
            row0[k] = 0;
            k -= 1;
        }
        changed = k;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(pp: u32, q: u32) -> Params {
        Params::new(pp, q).unwrap()
    }

    #[test]
    fn trace_from_window_examples() {
        let ca = Ca::new(p(3, 2)).unwrap();
        let w = trace_from_window(&[0, 0, 1, 0, 0], &ca).unwrap();
        assert_eq!(w.digits(), &[1, 1, 2]);
        let w = trace_from_window(&[0; 7], &ca).unwrap();
        assert_eq!(w.digits(), &[0; 4]);
        assert_eq!(trace_from_window(&[4], &ca).unwrap().digits(), &[4]);
        assert_eq!(trace_from_window(&[0, 1], &ca), Err(Error::LengthParity { len: 2 }));
    }

    #[test]
    fn small_levels() {
        let opts = EnumOptions::default();
        assert_eq!(enumerate_words(p(3, 2), 1, &opts).unwrap().len(), 6);
        assert_eq!(enumerate_words(p(3, 2), 2, &opts).unwrap().len(), 24);
        assert_eq!(enumerate_words(p(5, 2), 1, &opts).unwrap().len(), 10);
        let empty = enumerate_words(p(3, 2), 0, &opts).unwrap();
        assert_eq!(empty.len(), 1);
    }

    #[test]
    fn methods_agree() {
        for (pp, q, max_n) in [(3, 2, 4), (2, 3, 4), (5, 2, 3), (5, 3, 3), (4, 3, 3), (7, 2, 3)] {
            for n in 1..=max_n {
                let a = enumerate_words(p(pp, q), n, &EnumOptions::with_method(Method::Sweep)).unwrap();
                let b = enumerate_words(p(pp, q), n, &EnumOptions::with_method(Method::Windows)).unwrap();
                assert_eq!(a, b, "({pp},{q}) n={n}");
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let opts = EnumOptions { budget: 1000, method: Method::Sweep };
        assert!(enumerate_words(p(3, 2), 2, &opts).is_ok());
        assert_eq!(
            enumerate_words(p(3, 2), 3, &opts),
            Err(Error::BudgetExceeded { required: 7776, budget: 1000 })
        );
    }

    #[test]
    fn word_set_lookup() {
        let set = enumerate_words(p(3, 2), 3, &EnumOptions::default()).unwrap();
        assert!(set.contains(&[1, 1, 2]));
        assert!(!set.contains(&[1, 1]));
        for w in set.words().take(10) {
            assert!(set.contains(w.digits()));
        }
    }
}
