//! Bi-infinite configurations with eventually-constant tails.
//!
//! Positions increase to the right; position `i` holds the coefficient of
//! `(pq)^(-i)`, so position 0 is the units digit and position 1 the first
//! digit after the radix point.

use std::fmt;

use crate::arith::{digit_char, Digit, Params};
use crate::error::{Error, Result};

/// `left_tail` repeats at every position `< offset`, `core` occupies
/// `[offset, offset + core.len())`, `right_tail` repeats afterwards.
///
/// Always canonical: the core neither starts with the left tail digit nor
/// ends with the right tail digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    left_tail: Digit,
    core: Vec<Digit>,
    right_tail: Digit,
    offset: i64,
}

impl Configuration {
    pub fn new(left_tail: Digit, core: Vec<Digit>, right_tail: Digit, offset: i64) -> Self {
        let mut c = Configuration { left_tail, core, right_tail, offset };
        c.canonicalize();
        c
    }

    /// Like [`Configuration::new`] but rejects digits outside the base.
    pub fn checked(
        left_tail: Digit,
        core: Vec<Digit>,
        right_tail: Digit,
        offset: i64,
        params: Params,
    ) -> Result<Self> {
        params.check_digit(left_tail)?;
        params.check_digit(right_tail)?;
        for &d in &core {
            params.check_digit(d)?;
        }
        Ok(Self::new(left_tail, core, right_tail, offset))
    }

    pub fn zero() -> Self {
        Self::constant(0)
    }

    pub fn constant(d: Digit) -> Self {
        Configuration { left_tail: d, core: Vec::new(), right_tail: d, offset: 0 }
    }

    /// Zero tails around `core` starting at `offset`.
    pub fn finite(core: Vec<Digit>, offset: i64) -> Self {
        Self::new(0, core, 0, offset)
    }

    fn canonicalize(&mut self) {
        let lead = self.core.iter().take_while(|&&d| d == self.left_tail).count();
        if lead == self.core.len() {
            // Everything collapses into the left tail.
            self.offset += lead as i64;
            self.core.clear();
        } else if lead > 0 {
            self.core.drain(..lead);
            self.offset += lead as i64;
        }
        while self.core.last() == Some(&self.right_tail) {
            self.core.pop();
        }
        if self.core.is_empty() && self.left_tail == self.right_tail {
            self.offset = 0;
        }
    }

    pub fn left_tail(&self) -> Digit {
        self.left_tail
    }

    pub fn right_tail(&self) -> Digit {
        self.right_tail
    }

    pub fn core(&self) -> &[Digit] {
        &self.core
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// First position after the core.
    pub fn end(&self) -> i64 {
        self.offset + self.core.len() as i64
    }

    pub fn is_finite(&self) -> bool {
        self.left_tail == 0 && self.right_tail == 0
    }

    pub fn is_zero(&self) -> bool {
        self.is_finite() && self.core.is_empty()
    }

    pub fn get(&self, i: i64) -> Digit {
        if i < self.offset {
            self.left_tail
        } else if i >= self.end() {
            self.right_tail
        } else {
            self.core[(i - self.offset) as usize]
        }
    }

    /// Digits at positions `lo..=hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Digit> {
        (lo..=hi).map(|i| self.get(i)).collect()
    }

    /// Replaces the digit at position `i`.
    pub fn with_digit(&self, i: i64, d: Digit) -> Self {
        let lo = self.offset.min(i);
        let hi = self.end().max(i + 1);
        let mut core = self.window(lo, hi - 1);
        core[(i - lo) as usize] = d;
        Self::new(self.left_tail, core, self.right_tail, lo)
    }

    /// The gluing `x ⧓_j y`: positions `< j` from `self`, positions `>= j`
    /// from `other`.
    pub fn glue(&self, j: i64, other: &Configuration) -> Self {
        let lo = self.offset.min(j);
        let hi = other.end().max(j);
        let core = (lo..hi).map(|i| if i < j { self.get(i) } else { other.get(i) }).collect();
        Self::new(self.left_tail, core, other.right_tail, lo)
    }

    /// Shifts content so that position `i` moves to `i + k`.
    pub fn translate(&self, k: i64) -> Self {
        let mut c = self.clone();
        if !(c.core.is_empty() && c.left_tail == c.right_tail) {
            c.offset += k;
        }
        c
    }

    /// Text form `<left_tail>|<core-with-dot>|<right_tail>`; the dot sits
    /// between positions 0 and 1. Digits are `0-9a-z`, so bases up to 36.
    pub fn parse(s: &str, params: Params) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split('|').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected <left>|<core>|<right>, got {s:?}")));
        }
        let tail = |t: &str| -> Result<Digit> {
            let mut chars = t.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => c
                    .to_digit(36)
                    .ok_or_else(|| Error::Parse(format!("bad tail digit {t:?}"))),
                _ => Err(Error::Parse(format!("tail must be a single digit, got {t:?}"))),
            }
        };
        let left = tail(parts[0])?;
        let right = tail(parts[2])?;
        let body = parts[1];
        let (int_part, frac_part) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        if frac_part.contains('.') {
            return Err(Error::Parse(format!("more than one dot in {body:?}")));
        }
        let mut core = Vec::with_capacity(body.len());
        for c in int_part.chars().chain(frac_part.chars()) {
            core.push(c.to_digit(36).ok_or_else(|| Error::Parse(format!("bad digit {c:?}")))?);
        }
        let offset = 1 - int_part.chars().count() as i64;
        Self::checked(left, core, right, offset, params)
    }

    fn fmt_text(&self) -> String {
        // Pad with tail digits so the dot always lands inside the core text.
        let lo = self.offset.min(0);
        let hi = self.end().max(1);
        let mut s = String::new();
        s.push(digit_char(self.left_tail));
        s.push('|');
        for i in lo..hi {
            s.push(digit_char(self.get(i)));
            if i == 0 {
                s.push('.');
            }
        }
        s.push('|');
        s.push(digit_char(self.right_tail));
        s
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_text())
    }
}
