//! Traces of `Mul_{p/q}` and the finite levels of its trace language.
//!
//! Every function here works with the automaton of its `Params`, i.e. it
//! multiplies by `p/q`. The reverse direction is obtained by passing
//! `params.swapped()`.

mod enumerate;

use std::collections::HashMap;

pub use enumerate::{
    check_budget, enumerate_words, trace_from_window, window_count, EnumOptions, Method, WordSet,
    DEFAULT_BUDGET,
};
pub(crate) use enumerate::{pack, unpack};

use crate::arith::{Digit, DigitSet, DigitWord, Params};
use crate::automaton::{Automaton, Ca};
use crate::config::Configuration;
use crate::error::{Error, Result};

/// Digits `F^t(x)[column]` for `t = 0..length`.
pub fn trace_of(ca: &Ca, x: &Configuration, column: i64, length: usize) -> DigitWord {
    let mut out = Vec::with_capacity(length);
    let mut cur = x.clone();
    for t in 0..length {
        if t > 0 {
            cur = ca.apply(&cur, Automaton::FmulPOverQ);
        }
        out.push(cur.get(column));
    }
    DigitWord::from_vec_unchecked(out)
}

/// How a predecessor set decomposes into `Q_{q,p}` classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreShape {
    /// `Q_{q,p}(d)`; `d` is the residue mod `q`.
    Single(Digit),
    /// `Q_{q,p}(d) ∪ Q_{q,p}(d+1)`.
    Double(Digit),
}

impl PreShape {
    pub fn class_count(&self) -> usize {
        match self {
            PreShape::Single(_) => 1,
            PreShape::Double(_) => 2,
        }
    }
}

/// Classifies a digit set as one or two cyclically adjacent residue classes
/// modulo `q`, or `None` if it is neither.
pub fn pre_shape(set: DigitSet, params: Params) -> Option<PreShape> {
    let (p, q) = (params.p(), params.q());
    let residues: DigitSet = set.iter().map(|d| d % q).collect();
    for r in residues.iter() {
        // Each class Q_{q,p}(r) has exactly p members.
        if set.iter().filter(|d| d % q == r).count() != p as usize {
            return None;
        }
    }
    let rs = residues.to_vec();
    match rs.len() {
        1 => Some(PreShape::Single(rs[0])),
        2 => rs
            .iter()
            .copied()
            .find(|&r| residues.contains((r + 1) % q))
            .map(PreShape::Double),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredecessorSet {
    pub word: DigitWord,
    pub members: DigitSet,
    pub shape: PreShape,
}

/// `pre(w) = {a : aw ∈ L}` read off the next language level.
pub fn predecessors(word: &DigitWord, next: &WordSet) -> Result<PredecessorSet> {
    let params = next.params();
    if next.word_len() != word.len() + 1 {
        return Err(Error::precondition(format!(
            "predecessors of a length-{} word need level {}, got level {}",
            word.len(),
            word.len() + 1,
            next.word_len()
        )));
    }
    let mut buf = Vec::with_capacity(word.len() + 1);
    let members: DigitSet = (0..params.base())
        .filter(|&a| {
            buf.clear();
            buf.push(a);
            buf.extend_from_slice(word.digits());
            next.contains(&buf)
        })
        .collect();
    let shape = pre_shape(members, params).ok_or_else(|| Error::ShapeViolation {
        word: word.render(params.base()),
        members: members.to_vec(),
    })?;
    Ok(PredecessorSet { word: word.clone(), members, shape })
}

/// `L^n` together with its split by predecessor count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageLevel {
    pub words: WordSet,
    /// `pre(w)` for each word, aligned with `words.keys()`.
    pub pre: Vec<DigitSet>,
    /// Keys with `|pre| = p`.
    pub w1: Vec<u128>,
    /// Keys with `|pre| = 2p`.
    pub w2: Vec<u128>,
}

impl LanguageLevel {
    /// Classifies `words = L^n` using `next = L^{n+1}`.
    pub fn classify(words: WordSet, next: &WordSet) -> Result<Self> {
        let params = words.params();
        let n = words.word_len();
        if next.word_len() != n + 1 || next.params() != params {
            return Err(Error::precondition("classification needs the next level of the same language"));
        }
        let base = params.base() as u128;
        let suffix_mod = base.pow(n as u32);
        let mut pre = vec![DigitSet::EMPTY; words.len()];
        for &key in next.keys() {
            let a = (key / suffix_mod) as Digit;
            let idx = words.index_of(key % suffix_mod).ok_or_else(|| {
                Error::ConsistencyViolation(format!(
                    "suffix of {} is missing from level {n}",
                    next.word(key).render(params.base())
                ))
            })?;
            pre[idx].insert(a);
        }
        let p = params.p() as usize;
        let mut w1 = Vec::new();
        let mut w2 = Vec::new();
        for (&key, set) in words.keys().iter().zip(&pre) {
            match pre_shape(*set, params) {
                Some(shape) if set.len() == p * shape.class_count() => {
                    if shape.class_count() == 1 {
                        w1.push(key);
                    } else {
                        w2.push(key);
                    }
                }
                _ => {
                    return Err(Error::ShapeViolation {
                        word: words.word(key).render(params.base()),
                        members: set.to_vec(),
                    })
                }
            }
        }
        Ok(LanguageLevel { words, pre, w1, w2 })
    }

    pub fn n(&self) -> usize {
        self.words.word_len()
    }

    pub fn predecessor_set(&self, key: u128) -> Option<DigitSet> {
        self.words.index_of(key).map(|i| self.pre[i])
    }
}

/// Builds `L^n` and `L^{n+1}` and splits `L^n` into `W_{1,n}` and `W_{2,n}`.
pub fn enumerate_language(params: Params, n: usize, opts: &EnumOptions) -> Result<LanguageLevel> {
    check_budget(params, n + 1, opts.budget)?;
    let words = enumerate_words(params, n, opts)?;
    let next = enumerate_words(params, n + 1, opts)?;
    LanguageLevel::classify(words, &next)
}

/// Lazily built language levels for one parameter pair.
#[derive(Debug, Clone)]
pub struct LanguageCache {
    params: Params,
    opts: EnumOptions,
    levels: Vec<Option<WordSet>>,
}

impl LanguageCache {
    pub fn new(params: Params, opts: EnumOptions) -> Self {
        LanguageCache { params, opts, levels: Vec::new() }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn level(&mut self, n: usize) -> Result<&WordSet> {
        if self.levels.len() <= n {
            self.levels.resize(n + 1, None);
        }
        if self.levels[n].is_none() {
            self.levels[n] = Some(enumerate_words(self.params, n, &self.opts)?);
        }
        Ok(self.levels[n].as_ref().unwrap())
    }

    pub fn classified(&mut self, n: usize) -> Result<LanguageLevel> {
        let next = self.level(n + 1)?.clone();
        let words = self.level(n)?.clone();
        LanguageLevel::classify(words, &next)
    }
}

/// The union over markers `s ∈ {kp : 1 <= k < q}` of the traces
/// `tr(x)[1..=n]` where `x[0] = s`, `x[i] = 0` for `i > 0` and
/// `x[-n..=-1]` ranges over all digit words.
pub fn construct_w2(ca: &Ca, n: usize) -> Result<WordSet> {
    let params = ca.params();
    let base = params.base();
    let count = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > DEFAULT_BUDGET {
        return Err(Error::BudgetExceeded { required: count, budget: DEFAULT_BUDGET });
    }
    let mut keys = Vec::new();
    let mut window = vec![0; 2 * n + 1];
    for s in params.marker_set() {
        for idx in 0..count {
            let mut rest = idx;
            for slot in window[..n].iter_mut().rev() {
                *slot = (rest % base as u128) as Digit;
                rest /= base as u128;
            }
            window[n] = s;
            let tr = trace_from_window(&window, ca)?;
            keys.push(pack(&tr.digits()[1..], base));
        }
    }
    Ok(WordSet::from_keys(params, n, keys))
}

/// Period scan of one trace prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodCheck {
    pub period: usize,
    pub first_disagreement: Option<usize>,
    pub last_disagreement: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AperiodicityReport {
    pub horizon: usize,
    pub periods: Vec<PeriodCheck>,
    /// `(period, start)` of the first eventual period found, if any.
    pub found: Option<(usize, usize)>,
}

impl AperiodicityReport {
    pub fn is_aperiodic(&self) -> bool {
        self.found.is_none()
    }
}

/// Looks for `y[i] = y[i + P]` holding for all `i >= i0` inside the prefix,
/// for some `P <= max_period` and some start `i0 < horizon / 2`.
pub fn scan_periods<T: PartialEq>(trace: &[T], max_period: usize) -> AperiodicityReport {
    let horizon = trace.len();
    let mut periods = Vec::with_capacity(max_period);
    let mut found = None;
    for period in 1..=max_period {
        let mut first = None;
        let mut last = None;
        for i in 0..horizon.saturating_sub(period) {
            if trace[i] != trace[i + period] {
                first.get_or_insert(i);
                last = Some(i);
            }
        }
        let start = last.map_or(0, |d| d + 1);
        if found.is_none() && 2 * start < horizon && period < horizon {
            found = Some((period, start));
        }
        periods.push(PeriodCheck { period, first_disagreement: first, last_disagreement: last });
    }
    AperiodicityReport { horizon, periods, found }
}

/// Finite-horizon aperiodicity scan of `tr(x)` at column 0. `x` must be a
/// nonzero finite configuration or have a marker digit from
/// `{kp : 1 <= k < q}` followed by zeros.
pub fn check_aperiodicity(
    ca: &Ca,
    x: &Configuration,
    horizon: usize,
    max_period: usize,
) -> Result<AperiodicityReport> {
    let params = ca.params();
    let nonzero_finite = x.is_finite() && !x.is_zero();
    let marker_shape = x.right_tail() == 0
        && x.core().last().is_some_and(|d| params.marker_set().contains(d));
    if !(nonzero_finite || marker_shape) {
        return Err(Error::precondition(format!("{x} is neither nonzero finite nor marker-shaped")));
    }
    let tr = trace_of(ca, x, 0, horizon);
    Ok(scan_periods(tr.digits(), max_period))
}

/// Checks that no `a1 ≢ a2 (mod q)`, `b1 ≢ b2 (mod p)` have all four words
/// `a_i w b_j` in `L^{n+2}` for some `w ∈ L^n`.
pub fn check_restr(cache: &mut LanguageCache, n: usize) -> Result<()> {
    let params = cache.params();
    let (p, q) = (params.p(), params.q());
    let base = params.base() as u128;
    let top = cache.level(n + 2)?;
    // followers[w][a] = {b : a w b ∈ L}
    let mut followers: HashMap<u128, Vec<DigitSet>> = HashMap::new();
    let head = base.pow(n as u32 + 1);
    for &key in top.keys() {
        let a = (key / head) as usize;
        let b = (key % base) as Digit;
        let w = key % head / base;
        followers.entry(w).or_insert_with(|| vec![DigitSet::EMPTY; base as usize])[a].insert(b);
    }
    for (w, per_a) in &followers {
        for a1 in 0..params.base() {
            for a2 in (a1 + 1)..params.base() {
                if a1 % q == a2 % q {
                    continue;
                }
                let common = per_a[a1 as usize].intersection(per_a[a2 as usize]);
                let residues: DigitSet = common.iter().map(|b| b % p).collect();
                if residues.len() >= 2 {
                    let w = unpack(*w, n, params.base());
                    return Err(Error::CounterexampleFound(format!(
                        "restr: a1={a1}, a2={a2}, w={}, common followers {:?}",
                        w.render(params.base()),
                        common.to_vec()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Checks `wa ∈ L^{n+1} ⇒ w Q_{p,q}(a) ⊆ L^{n+1}` for every `|w| = n >= 1`.
pub fn check_flipword(cache: &mut LanguageCache, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::precondition("flipword needs a nonempty prefix"));
    }
    let params = cache.params();
    let base = params.base() as u128;
    let p = params.p() as u128;
    let level = cache.level(n + 1)?;
    for &key in level.keys() {
        let a = key % base;
        let stem = key - a;
        let mut c = a % p;
        while c < base {
            if !level.contains_key(stem + c) {
                return Err(Error::CounterexampleFound(format!(
                    "flipword: {} in L but last letter {c} missing",
                    level.word(key).render(params.base())
                )));
            }
            c += p;
        }
    }
    Ok(())
}

/// Letter-level predecessor criterion: `|pre(a)| = 2p` exactly when
/// `(a q) mod p ∈ {p - i : 1 <= i <= q - 1}`. Requires `p > q`.
pub fn check_letter_contexts(cache: &mut LanguageCache) -> Result<()> {
    let params = cache.params();
    params.require_p_greater()?;
    let (p, q) = (params.p(), params.q());
    let level = cache.classified(1)?;
    for a in 0..params.base() {
        let pre = level.predecessor_set(a as u128).expect("every letter is in L^1");
        let criterion = (1..q).any(|i| (a * q) % p == p - i);
        let double = pre.len() == 2 * p as usize;
        if criterion != double {
            return Err(Error::CounterexampleFound(format!(
                "contexts: letter {a} has |pre| = {} but criterion says {}",
                pre.len(),
                if criterion { 2 * p } else { p }
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbers::{encode, rational};

    fn p32() -> Params {
        Params::new(3, 2).unwrap()
    }

    #[test]
    fn trace_of_examples() {
        let ca = Ca::new(p32()).unwrap();
        let one = encode(&rational(1, 1), p32()).unwrap();
        assert_eq!(trace_of(&ca, &one, 0, 5).digits(), &[1, 1, 2, 3, 5]);
        assert_eq!(trace_of(&ca, &Configuration::zero(), 0, 4).digits(), &[0; 4]);
        let half = encode(&rational(1, 2), p32()).unwrap();
        assert_eq!(trace_of(&ca, &half, 0, 3).digits(), &[0, 0, 1]);
    }

    #[test]
    fn predecessor_examples() {
        let next = enumerate_words(p32(), 2, &EnumOptions::default()).unwrap();
        let one = DigitWord::new(vec![1], 6).unwrap();
        let pre = predecessors(&one, &next).unwrap();
        assert_eq!(pre.members.len(), 6);
        let zero = DigitWord::new(vec![0], 6).unwrap();
        let pre = predecessors(&zero, &next).unwrap();
        assert_eq!(pre.members.len(), 3);
        assert!(matches!(pre.shape, PreShape::Single(_)));
        let four = DigitWord::new(vec![4], 6).unwrap();
        assert_eq!(predecessors(&four, &next).unwrap().members.len(), 6);
        assert!(predecessors(&DigitWord::new(vec![1, 1], 6).unwrap(), &next).is_err());
    }

    #[test]
    fn shape_classification() {
        let params = Params::new(5, 3).unwrap();
        let class = |r: u32| (0..15).filter(move |d| d % 3 == r);
        let single: DigitSet = class(1).collect();
        assert_eq!(pre_shape(single, params), Some(PreShape::Single(1)));
        let double: DigitSet = class(2).chain(class(0)).collect();
        assert_eq!(pre_shape(double, params), Some(PreShape::Double(2)));
        let partial: DigitSet = class(1).skip(1).collect();
        assert_eq!(pre_shape(partial, params), None);
        assert_eq!(pre_shape(DigitSet::full(15), params), None);
    }

    #[test]
    fn w2_small_cases() {
        let ca = Ca::new(p32()).unwrap();
        let level = enumerate_language(p32(), 1, &EnumOptions::default()).unwrap();
        let built = construct_w2(&ca, 1).unwrap();
        assert_eq!(built.keys(), level.w2.as_slice());
        assert_eq!(built.len(), 2);
        assert_eq!(construct_w2(&ca, 2).unwrap().len(), 4);
        let p52 = Params::new(5, 2).unwrap();
        assert_eq!(construct_w2(&Ca::new(p52).unwrap(), 1).unwrap().len(), 2);
    }

    #[test]
    fn aperiodicity_examples() {
        let ca = Ca::new(p32()).unwrap();
        let one = encode(&rational(1, 1), p32()).unwrap();
        assert!(check_aperiodicity(&ca, &one, 200, 20).unwrap().is_aperiodic());
        let marker = Configuration::finite(vec![3], 0);
        assert!(check_aperiodicity(&ca, &marker, 200, 20).unwrap().is_aperiodic());
        assert!(check_aperiodicity(&ca, &Configuration::zero(), 200, 20).is_err());
    }

    #[test]
    fn scan_detects_periods() {
        let y: Vec<Digit> = (0..40).map(|i| if i < 5 { 4 } else { (i % 3) as Digit }).collect();
        let r = scan_periods(&y, 5);
        assert_eq!(r.found, Some((3, 5)));
        assert_eq!(r.periods[0].first_disagreement, Some(4));
    }

    #[test]
    fn restr_and_flipword_small() {
        let mut cache = LanguageCache::new(p32(), EnumOptions::default());
        check_restr(&mut cache, 1).unwrap();
        check_flipword(&mut cache, 2).unwrap();
        check_letter_contexts(&mut cache).unwrap();
        let mut cache = LanguageCache::new(Params::new(5, 3).unwrap(), EnumOptions::default());
        check_restr(&mut cache, 1).unwrap();
    }
}
