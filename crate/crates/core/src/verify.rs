//! Exhaustive and sampled checks of the digit-level lemmas, run as named
//! suites.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{Digit, DigitSet, Params};
use crate::automaton::{derive_delta, widen_trace, Automaton, Ca, Direction, Factor, LocalRule};
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::language::{
    check_flipword, check_letter_contexts, check_restr, construct_w2, trace_of, EnumOptions, LanguageCache,
};
use crate::numbers::{decode, encode, rational, verify_multiplication, ExactRational};
use crate::representations::{compfrac_reconstruct, phi_injectivity_check, phi_of_value, phi_window};
use crate::sofic::{complexity_closed_form, w2_count};

pub const DEFAULT_SEED: u64 = 0x07ac_e1ab;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random configuration with core length below `max_core`; tails are zero
/// about half the time, otherwise random digits.
pub fn random_configuration(rng: &mut impl Rng, params: Params, max_core: usize) -> Configuration {
    let b = params.base();
    let len = rng.gen_range(0..max_core.max(1));
    let core = (0..len).map(|_| rng.gen_range(0..b)).collect();
    let lt = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..b) };
    let rt = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..b) };
    Configuration::new(lt, core, rt, rng.gen_range(-8..=8))
}

pub fn random_finite_configuration(rng: &mut impl Rng, params: Params, max_core: usize) -> Configuration {
    let b = params.base();
    let len = rng.gen_range(0..max_core.max(1));
    let core = (0..len).map(|_| rng.gen_range(0..b)).collect();
    Configuration::finite(core, rng.gen_range(-8..=8))
}

/// `num / (pq)^k` with `1 <= num <= max_num` and `k <= max_exp`.
pub fn random_terminating(rng: &mut impl Rng, params: Params, max_num: i64, max_exp: u32) -> ExactRational {
    let num = rng.gen_range(1..=max_num);
    let k = rng.gen_range(0..=max_exp);
    rational(num, (params.base() as i64).pow(k))
}

fn fail(name: &str, msg: String) -> Error {
    Error::CounterexampleFound(format!("{name}: {msg}"))
}

fn mul_table(params: Params) -> impl Fn(Digit, Digit) -> Digit {
    move |a, b| crate::automaton::mul_rule(a, b, params, Factor::P)
}

/// `mul(a,c) = mul(b,d) ⇒ a ≡ b (mod q)`.
pub fn check_g1(params: Params) -> Result<()> {
    let (n, q) = (params.base(), params.q());
    let mul = mul_table(params);
    for a in 0..n {
        for c in 0..n {
            let v = mul(a, c);
            for b in 0..n {
                for d in 0..n {
                    if mul(b, d) == v && a % q != b % q {
                        return Err(fail("g1", format!("a={a} b={b} c={c} d={d}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// `mul(a,c) ≡ mul(b,c) (mod q) ⇔ a ≡ b (mod q) ⇔ mul(a,c) = mul(b,c)`.
pub fn check_g2(params: Params) -> Result<()> {
    let (n, q) = (params.base(), params.q());
    let mul = mul_table(params);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let (x, y) = (mul(a, c), mul(b, c));
                let lhs = x % q == y % q;
                let mid = a % q == b % q;
                let rhs = x == y;
                if lhs != mid || mid != rhs {
                    return Err(fail("g2", format!("a={a} b={b} c={c}")));
                }
            }
        }
    }
    Ok(())
}

/// `mul(a,c) ≡ mul(b,c) (mod p)`.
pub fn check_g3(params: Params) -> Result<()> {
    let (n, p) = (params.base(), params.p());
    let mul = mul_table(params);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if mul(a, c) % p != mul(b, c) % p {
                    return Err(fail("g3", format!("a={a} b={b} c={c}")));
                }
            }
        }
    }
    Ok(())
}

fn for_each_5(n: Digit, mut f: impl FnMut(Digit, Digit, Digit, Digit, Digit) -> Result<()>) -> Result<()> {
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    for e in 0..n {
                        f(a, b, c, d, e)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// `fmul(a,c,d) = fmul(b,c,e) ⇒ a ≡ b (mod q)`.
pub fn check_f1(rule: &LocalRule, params: Params) -> Result<()> {
    let q = params.q();
    for_each_5(params.base(), |a, b, c, d, e| {
        if rule.eval3(a, c, d) == rule.eval3(b, c, e) && a % q != b % q {
            return Err(fail("f1", format!("a={a} b={b} c={c} d={d} e={e}")));
        }
        Ok(())
    })
}

/// `fmul(a,c,d) ≡ fmul(b,c,d) (mod q) ⇔ a ≡ b (mod q) ⇔ equality`.
pub fn check_f2(rule: &LocalRule, params: Params) -> Result<()> {
    let (n, q) = (params.base(), params.q());
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let (x, y) = (rule.eval3(a, c, d), rule.eval3(b, c, d));
                    let lhs = x % q == y % q;
                    let mid = a % q == b % q;
                    if lhs != mid || mid != (x == y) {
                        return Err(fail("f2", format!("a={a} b={b} c={c} d={d}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// `fmul(a,c,d) ≡ fmul(b,c,d) (mod p)`.
pub fn check_f3(rule: &LocalRule, params: Params) -> Result<()> {
    let (n, p) = (params.base(), params.p());
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if rule.eval3(a, c, d) % p != rule.eval3(b, c, d) % p {
                        return Err(fail("f3", format!("a={a} b={b} c={c} d={d}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// `fmul(a,c,d) = fmul(b,c,e) ⇒ fmul(a,c,d) = fmul(a,c,e)`.
pub fn check_strongxz(rule: &LocalRule, params: Params) -> Result<()> {
    for_each_5(params.base(), |a, b, c, d, e| {
        let v = rule.eval3(a, c, d);
        if v == rule.eval3(b, c, e) && v != rule.eval3(a, c, e) {
            return Err(fail("strongxz", format!("a={a} b={b} c={c} d={d} e={e}")));
        }
        Ok(())
    })
}

/// `fmul(Q_{p,q}(a) w) = Q_{p,q}(b)` for every `a` and every `|w| = 2`.
pub fn check_flip(rule: &LocalRule, params: Params) -> Result<()> {
    let (n, p) = (params.base(), params.p());
    for a in 0..p {
        for w1 in 0..n {
            for w2 in 0..n {
                let image: DigitSet = (a..n).step_by(p as usize).map(|x| rule.eval3(x, w1, w2)).collect();
                let b = rule.eval3(a, w1, w2);
                let class: DigitSet = (b % p..n).step_by(p as usize).collect();
                if image != class {
                    return Err(fail("flip", format!("a={a} w={w1},{w2} image {:?}", image.to_vec())));
                }
            }
        }
    }
    Ok(())
}

/// `fmul(0,0,0) = 0` and `fmul(pq−1,pq−1,pq−1) = pq−1`.
pub fn check_tail_fixed(rule: &LocalRule, params: Params) -> Result<()> {
    let top = params.base() - 1;
    if rule.eval3(0, 0, 0) != 0 || rule.eval3(top, top, top) != top {
        return Err(fail("tail-fixed", format!("tails are not fixed for {params}")));
    }
    Ok(())
}

/// The marker lemma for `Mul_p` (`shift = 0`) and for `Mul_{p/q}`
/// (`shift = 1`), on random `x`, every marker `s` and `j ∈ [−5, 5]`.
pub fn check_tail(ca: &Ca, automaton: Automaton, samples: usize, seed: u64) -> Result<()> {
    let params = ca.params();
    let shift = match automaton {
        Automaton::MulP => 0,
        Automaton::FmulPOverQ => 1,
        other => return Err(Error::precondition(format!("no marker lemma for {other:?}"))),
    };
    let top = params.base() - 1;
    let markers = params.marker_set();
    let mut rng = rng(seed);
    for _ in 0..samples {
        let x = random_configuration(&mut rng, params, 10);
        for &s in &markers {
            for j in -5..=5 {
                let hi = x.glue(j, &Configuration::new(0, vec![s], 0, j));
                let lo = x.glue(j, &Configuration::new(0, vec![s - 1], top, j));
                let (y1, y2) = (ca.apply(&hi, automaton), ca.apply(&lo, automaton));
                let m = j + shift;
                let s1 = y1.get(m);
                let ok = (y1.offset().min(y2.offset()) - 2..m).all(|i| y1.get(i) == y2.get(i))
                    && y1.left_tail() == y2.left_tail()
                    && markers.contains(&s1)
                    && y2.get(m) + 1 == s1
                    && y1.right_tail() == 0
                    && y1.end() <= m + 1
                    && y2.right_tail() == top
                    && y2.end() <= m + 1;
                if !ok {
                    return Err(fail("tail", format!("x={x} s={s} j={j}: {y1} vs {y2}")));
                }
            }
        }
    }
    Ok(())
}

/// `Mul_{q/p}(Mul_{p/q}(x)) = x` and the composed form equals the fused
/// rule, on random configurations.
pub fn check_inverse(ca: &Ca, samples: usize, seed: u64) -> Result<()> {
    let mut rng = rng(seed);
    for _ in 0..samples {
        let x = random_configuration(&mut rng, ca.params(), 16);
        let y = ca.apply(&x, Automaton::FmulPOverQ);
        if ca.apply(&y, Automaton::FmulQOverP) != x {
            return Err(fail("inverse", format!("x={x}")));
        }
        if ca.apply_composed(&x, Direction::POverQ) != y {
            return Err(fail("composition", format!("x={x}")));
        }
    }
    Ok(())
}

/// Column `i−1` rebuilt by Δ from column `i`, and widened traces, against
/// direct simulation.
pub fn check_delta(ca: &Ca, samples: usize, seed: u64) -> Result<()> {
    let delta = derive_delta(ca)?;
    let mut rng = rng(seed);
    let steps = 12;
    for _ in 0..samples {
        let x = random_configuration(&mut rng, ca.params(), 12);
        let i = rng.gen_range(-4..=4);
        let col_i = trace_of(ca, &x, i, steps);
        let col_prev = trace_of(ca, &x, i - 1, steps);
        let rebuilt = delta.step(col_i.digits())?;
        if rebuilt != col_prev.digits()[1..steps - 1] {
            return Err(fail("delta", format!("x={x} column {i}")));
        }
        let width = 3;
        let cols: Vec<_> = (0..width).map(|k| trace_of(ca, &x, i - (width as i64 - 1) + k as i64, steps)).collect();
        let wide = widen_trace(col_i.digits(), &delta, width)?;
        for (k, tuple) in wide.iter().enumerate() {
            let t = k + width - 1;
            let direct: Vec<Digit> = cols.iter().map(|c| c.digits()[t]).collect();
            if *tuple != direct {
                return Err(fail("widen", format!("x={x} column {i} time {t}")));
            }
        }
    }
    Ok(())
}

/// CA digits against exact rational multiplication.
pub fn check_multiplication(ca: &Ca, samples: usize, steps: usize, seed: u64) -> Result<()> {
    let mut rng = rng(seed);
    let params = ca.params();
    for _ in 0..samples {
        let xi = random_terminating(&mut rng, params, 100_000, 4);
        verify_multiplication(&xi, ca, steps)?;
        let x = encode(&xi, params)?;
        if decode(&x, params)? != xi {
            return Err(fail("round-trip", format!("xi={xi}")));
        }
    }
    Ok(())
}

/// `Φ(tr(ξ)) = φ(ξ)` on `[0, 30]` and the compfrac bound for `N <= 20`.
pub fn check_companion(ca: &Ca, samples: usize, seed: u64) -> Result<()> {
    let params = ca.params();
    let mut rng = rng(seed);
    for _ in 0..samples {
        let xi = random_terminating(&mut rng, params, 10_000, 3);
        let big = phi_of_value(ca, &xi, 0, 30)?;
        let small = phi_window(&xi, 0, 30, params)?;
        if big != small {
            return Err(fail("repchange", format!("xi={xi}")));
        }
        for n in [0, 5, 20] {
            compfrac_reconstruct(&xi, n, params)?;
        }
    }
    Ok(())
}

/// Counts, predecessor shapes and `W_2` against their closed forms for every
/// `n` with `(pq)^{2n+1}` inside the budget.
pub fn check_language_counts(cache: &mut LanguageCache, n_max: usize) -> Result<()> {
    let params = cache.params();
    let ca = Ca::new(params)?;
    for n in 1..=n_max {
        let level = cache.classified(n)?;
        let expected = complexity_closed_form(n, params)?;
        if expected != level.words.len().into() {
            return Err(fail("combi", format!("|L^{n}| = {} but formula gives {expected}", level.words.len())));
        }
        if w2_count(n, params) != level.w2.len().into() {
            return Err(fail("construct", format!("|W2| = {} at n = {n}", level.w2.len())));
        }
        let built = construct_w2(&ca, n)?;
        if built.keys() != level.w2.as_slice() {
            return Err(fail("construct", format!("generated W2 differs at n = {n}")));
        }
        let next = cache.level(n + 1)?.len();
        if next != 2 * params.p() as usize * level.w2.len() + params.p() as usize * level.w1.len() {
            return Err(fail("recurrence", format!("|L^{}| = {next}", n + 1)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub error: Option<Error>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none()
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.error {
            None => write!(f, "PASS {}", self.name),
            Some(e) => write!(f, "FAIL {}: {e}", self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub params: Params,
    pub outcomes: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| !o.passed())
    }
}

/// The exhaustive digit-level lemmas for `params` in the direction `p/q`.
fn lemma_checks(params: Params, out: &mut Vec<CheckOutcome>) -> Result<()> {
    let ca = Ca::new(params)?;
    let rule = ca.fmul(Direction::POverQ);
    let mut run = |name: &str, r: Result<()>| out.push(CheckOutcome { name: format!("{name} [{params}]"), error: r.err() });
    run("g1", check_g1(params));
    run("g2", check_g2(params));
    run("g3", check_g3(params));
    run("f1", check_f1(rule, params));
    run("f2", check_f2(rule, params));
    run("f3", check_f3(rule, params));
    run("strongxz", check_strongxz(rule, params));
    run("flip", check_flip(rule, params));
    run("tail-fixed", check_tail_fixed(rule, params));
    run("tailInt", check_tail(&ca, Automaton::MulP, 40, DEFAULT_SEED));
    run("tail", check_tail(&ca, Automaton::FmulPOverQ, 40, DEFAULT_SEED));
    Ok(())
}

/// Largest `n` such that level `n + k` stays inside `budget` windows.
pub fn max_level(params: Params, k: usize, budget: u128) -> usize {
    let mut n = 0;
    while crate::language::window_count(params, n + 1 + k) <= budget {
        n += 1;
    }
    n
}

/// Runs a suite in both directions `p/q` and `q/p`. Setup failures are
/// returned as errors; lemma failures are recorded in the report.
pub fn run_suite(params: Params, suite: Suite) -> Result<SuiteReport> {
    let mut outcomes = Vec::new();
    lemma_checks(params, &mut outcomes)?;
    lemma_checks(params.swapped(), &mut outcomes)?;
    if suite == Suite::All {
        let budget = crate::language::DEFAULT_BUDGET;
        for dir in [params, params.swapped()] {
            let ca = Ca::new(dir)?;
            let mut cache = LanguageCache::new(dir, EnumOptions::default());
            let mut run = |name: &str, r: Result<()>| {
                outcomes.push(CheckOutcome { name: format!("{name} [{dir}]"), error: r.err() })
            };
            run("restr", (0..=max_level(dir, 2, budget).min(2)).try_for_each(|n| check_restr(&mut cache, n)));
            run("flipword", (1..=max_level(dir, 1, budget).min(3)).try_for_each(|n| check_flipword(&mut cache, n)));
            if dir.p() > dir.q() {
                run("contexts", check_letter_contexts(&mut cache));
                run("combi", check_language_counts(&mut cache, max_level(dir, 1, budget).min(4)));
            }
            run("inverse", check_inverse(&ca, 200, DEFAULT_SEED));
            run("delta", check_delta(&ca, 200, DEFAULT_SEED));
            run("multiplication", check_multiplication(&ca, 100, 10, DEFAULT_SEED));
            run("repchange", check_companion(&ca, 20, DEFAULT_SEED));
            run("phi-injective", phi_injectivity_check(dir, 3).map(|_| ()));
        }
    }
    Ok(SuiteReport { params, outcomes })
}
