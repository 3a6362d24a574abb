//! Digit-level arithmetic shared by every other module: parameter validation,
//! floor-modulo, the two mixed-radix decompositions of a base-`pq` digit,
//! residue classes and packed digit words.

use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};

/// A single base-`pq` digit. Range checks happen where digits enter a
/// [`DigitWord`] or a configuration.
pub type Digit = u32;

/// A coprime pair `(p, q)` with `p, q > 1`. The automaton multiplies by
/// `p/q` in base `pq`; both orderings are valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    p: u32,
    q: u32,
}

impl Params {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p < 2 || q < 2 {
            return Err(Error::InvalidParams { p, q, reason: "p and q must both exceed 1" });
        }
        if p.gcd(&q) != 1 {
            return Err(Error::InvalidParams { p, q, reason: "p and q must be coprime" });
        }
        if p.checked_mul(q).is_none_or(|b| b > 1 << 16) {
            return Err(Error::InvalidParams { p, q, reason: "base p*q is too large" });
        }
        Ok(Params { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn base(&self) -> u32 {
        self.p * self.q
    }

    /// The same base with the roles of `p` and `q` exchanged (the inverse
    /// automaton's parameters).
    pub fn swapped(&self) -> Params {
        Params { p: self.q, q: self.p }
    }

    pub fn require_p_greater(&self) -> Result<()> {
        if self.p > self.q {
            Ok(())
        } else {
            Err(Error::precondition(format!("operation requires p > q, got {self}")))
        }
    }

    pub fn check_digit(&self, d: Digit) -> Result<Digit> {
        if d < self.base() {
            Ok(d)
        } else {
            Err(Error::InvalidDigit { digit: d, base: self.base() })
        }
    }

    /// The marker set `{k p : 1 <= k < q}` used by the tail lemmas.
    pub fn marker_set(&self) -> Vec<Digit> {
        (1..self.q).map(|k| k * self.p).collect()
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Remainder of `m` divided by `n` with floor semantics, always in `[0, n)`.
pub fn md(m: i64, n: i64) -> Result<i64> {
    if n <= 1 {
        return Err(Error::ModulusTooSmall(n));
    }
    Ok(m.mod_floor(&n))
}

/// Which radix sits in the low position of a digit decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Radix {
    /// `d = hi * q + lo` with `lo < q`, `hi < p`.
    ByQ,
    /// `d = hi * p + lo` with `lo < p`, `hi < q`.
    ByP,
}

/// Unique decomposition of a digit, returned as `(hi, lo)`.
pub fn decompose(d: Digit, params: Params, radix: Radix) -> (u32, u32) {
    let m = match radix {
        Radix::ByQ => params.q(),
        Radix::ByP => params.p(),
    };
    (d / m, d % m)
}

/// Which modulus defines a residue class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassKind {
    /// `Q_{p,q}(a)`: the `q` digits congruent to `a` mod `p`.
    Qpq,
    /// `Q_{q,p}(a)`: the `p` digits congruent to `a` mod `q`.
    Qqp,
}

/// A set of base-`pq` digits stored as a bitmask. Supports bases up to 128.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct DigitSet(u128);

impl DigitSet {
    pub const EMPTY: DigitSet = DigitSet(0);

    pub fn full(base: u32) -> DigitSet {
        assert!(base <= 128, "digit sets support bases up to 128");
        if base == 128 {
            DigitSet(u128::MAX)
        } else {
            DigitSet((1u128 << base) - 1)
        }
    }

    pub fn insert(&mut self, d: Digit) {
        self.0 |= 1u128 << d;
    }

    pub fn contains(&self, d: Digit) -> bool {
        d < 128 && self.0 >> d & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: DigitSet) -> DigitSet {
        DigitSet(self.0 | other.0)
    }

    pub fn intersection(self, other: DigitSet) -> DigitSet {
        DigitSet(self.0 & other.0)
    }

    pub fn is_subset(&self, other: &DigitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Digit> + '_ {
        let bits = self.0;
        (0..128u32).filter(move |d| bits >> d & 1 == 1)
    }

    pub fn to_vec(&self) -> Vec<Digit> {
        self.iter().collect()
    }
}

impl FromIterator<Digit> for DigitSet {
    fn from_iter<I: IntoIterator<Item = Digit>>(iter: I) -> Self {
        let mut s = DigitSet::EMPTY;
        for d in iter {
            s.insert(d);
        }
        s
    }
}

/// `Q_{p,q}(a)` or `Q_{q,p}(a)` with its members in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueClass {
    pub kind: ClassKind,
    pub representative: Digit,
    pub members: Vec<Digit>,
}

impl ResidueClass {
    pub fn as_set(&self) -> DigitSet {
        self.members.iter().copied().collect()
    }
}

pub fn residue_class(a: Digit, params: Params, kind: ClassKind) -> ResidueClass {
    let m = match kind {
        ClassKind::Qpq => params.p(),
        ClassKind::Qqp => params.q(),
    };
    let r = a % m;
    let members = (0..params.base()).filter(|d| d % m == r).collect();
    ResidueClass { kind, representative: a, members }
}

/// A finite word over `{0, .., base-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DigitWord(Vec<Digit>);

impl DigitWord {
    pub fn new(digits: Vec<Digit>, base: u32) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::InvalidDigit { digit: d, base });
        }
        Ok(DigitWord(digits))
    }

    /// Wraps digits already known to be in range.
    pub(crate) fn from_vec_unchecked(digits: Vec<Digit>) -> Self {
        DigitWord(digits)
    }

    pub fn empty() -> Self {
        DigitWord(Vec::new())
    }

    pub fn digits(&self) -> &[Digit] {
        &self.0
    }

    pub fn into_digits(self) -> Vec<Digit> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Big-endian base-`base` key: the first digit is most significant.
    pub fn pack(&self, base: u32) -> Result<PackedWord> {
        let mut key: u128 = 0;
        for &d in &self.0 {
            key = key
                .checked_mul(base as u128)
                .and_then(|k| k.checked_add(d as u128))
                .ok_or(Error::WordTooLong { len: self.0.len(), base })?;
        }
        if self.0.len() > max_packed_len(base) {
            return Err(Error::WordTooLong { len: self.0.len(), base });
        }
        Ok(PackedWord { key, len: self.0.len() as u32 })
    }

    pub fn unpack(packed: PackedWord, base: u32) -> DigitWord {
        let mut digits = vec![0; packed.len as usize];
        let mut k = packed.key;
        for slot in digits.iter_mut().rev() {
            *slot = (k % base as u128) as Digit;
            k /= base as u128;
        }
        DigitWord(digits)
    }

    /// Renders digits as `0-9a-z`; bases above 36 fall back to a
    /// dash-separated decimal list.
    pub fn render(&self, base: u32) -> String {
        if base <= 36 {
            self.0.iter().map(|&d| digit_char(d)).collect()
        } else {
            self.0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("-")
        }
    }

    pub fn parse(s: &str, base: u32) -> Result<DigitWord> {
        let digits = if base <= 36 {
            s.chars()
                .map(|c| {
                    c.to_digit(36)
                        .ok_or_else(|| Error::Parse(format!("bad digit character {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else if s.is_empty() {
            Vec::new()
        } else {
            s.split('-')
                .map(|t| t.parse::<u32>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?
        };
        DigitWord::new(digits, base)
    }
}

impl From<DigitWord> for Vec<Digit> {
    fn from(w: DigitWord) -> Self {
        w.0
    }
}

/// Packed form of a [`DigitWord`]: positional key plus explicit length, so
/// that words with leading zeros stay distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PackedWord {
    pub key: u128,
    pub len: u32,
}

/// Longest word length whose packed key fits in a `u128`.
pub fn max_packed_len(base: u32) -> usize {
    let mut len = 0;
    let mut cap: u128 = 1;
    while let Some(next) = cap.checked_mul(base as u128) {
        cap = next;
        len += 1;
    }
    len
}

pub(crate) fn digit_char(d: Digit) -> char {
    std::char::from_digit(d, 36).unwrap_or('?')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p32() -> Params {
        Params::new(3, 2).unwrap()
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(5, p32(), Radix::ByQ), (2, 1));
        assert_eq!(decompose(0, p32(), Radix::ByQ), (0, 0));
        assert_eq!(decompose(4, p32(), Radix::ByP), (1, 1));
    }

    #[test]
    fn md_examples() {
        assert_eq!(md(7, 3).unwrap(), 1);
        assert_eq!(md(-1, 2).unwrap(), 1);
        assert_eq!(md(0, 5).unwrap(), 0);
        assert_eq!(md(5, 1), Err(Error::ModulusTooSmall(1)));
        assert_eq!(md(5, -3), Err(Error::ModulusTooSmall(-3)));
    }

    #[test]
    fn residue_class_examples() {
        let qqp = residue_class(0, p32(), ClassKind::Qqp);
        assert_eq!(qqp.members, vec![0, 2, 4]);
        assert_eq!(residue_class(0, p32(), ClassKind::Qpq).members, vec![0, 3]);
        assert_eq!(residue_class(4, p32(), ClassKind::Qpq).members, vec![1, 4]);
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(4, 2).is_err());
        assert!(Params::new(1, 2).is_err());
        assert!(Params::new(3, 3).is_err());
        assert!(Params::new(2, 3).is_ok());
        assert!(Params::new(3, 2).unwrap().require_p_greater().is_ok());
        assert!(Params::new(2, 3).unwrap().require_p_greater().is_err());
    }

    #[test]
    fn residue_classes_are_complete_systems() {
        for (p, q) in [(3, 2), (5, 2), (5, 3), (4, 3), (7, 2), (2, 3)] {
            let params = Params::new(p, q).unwrap();
            for a in 0..params.base() {
                let c = residue_class(a, params, ClassKind::Qpq);
                assert_eq!(c.members.len(), q as usize);
                let residues: DigitSet = c.members.iter().map(|d| d % q).collect();
                assert_eq!(residues.len(), q as usize);
                let c = residue_class(a, params, ClassKind::Qqp);
                assert_eq!(c.members.len(), p as usize);
                let residues: DigitSet = c.members.iter().map(|d| d % p).collect();
                assert_eq!(residues.len(), p as usize);
            }
        }
    }

    #[test]
    fn packing_keeps_leading_zeros_distinct() {
        let a = DigitWord::new(vec![0, 1], 6).unwrap().pack(6).unwrap();
        let b = DigitWord::new(vec![1], 6).unwrap().pack(6).unwrap();
        assert_eq!(a.key, b.key);
        assert_ne!(a, b);
        assert_eq!(DigitWord::unpack(a, 6).digits(), &[0, 1]);
    }

    #[test]
    fn word_rejects_out_of_range() {
        assert!(DigitWord::new(vec![6], 6).is_err());
        assert!(DigitWord::parse("15", 6).is_ok());
        assert!(DigitWord::parse("16", 6).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn md_in_range_and_congruent(m in -1_000_000i64..=1_000_000, n in 2i64..50) {
                let r = md(m, n).unwrap();
                prop_assert!((0..n).contains(&r));
                prop_assert_eq!((m - r).rem_euclid(n), 0);
            }

            #[test]
            fn decompose_round_trips(idx in 0usize..6, d in 0u32..1000) {
                let (p, q) = [(3, 2), (5, 2), (5, 3), (4, 3), (7, 2), (2, 7)][idx];
                let params = Params::new(p, q).unwrap();
                let d = d % params.base();
                let (hi, lo) = decompose(d, params, Radix::ByQ);
                prop_assert!(lo < q && hi < p);
                prop_assert_eq!(hi * q + lo, d);
                let (hi, lo) = decompose(d, params, Radix::ByP);
                prop_assert!(lo < p && hi < q);
                prop_assert_eq!(hi * p + lo, d);
            }

            #[test]
            fn pack_unpack(digits in proptest::collection::vec(0u32..6, 0..20)) {
                let w = DigitWord::new(digits, 6).unwrap();
                prop_assert_eq!(DigitWord::unpack(w.pack(6).unwrap(), 6), w);
            }
        }
    }
}
