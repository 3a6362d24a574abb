//! Columns of the multiplication automaton that stay inside `{0, …, p−1}`:
//! the forced left extension, finite-value searches and diagram rendering.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{Digit, DigitSet, Params};
use crate::automaton::{Automaton, Ca, LocalRule};
use crate::config::Configuration;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedPrefix {
    pub params: Params,
    /// `z[-1], z[-2], …`, so the most recent choice is last.
    pub left_digits: Vec<Digit>,
    /// `tr(z)[0..=steps]`; entry 0 is the seed `p`.
    pub trace: Vec<Digit>,
    /// Trace digits reachable at step `i` over all choices of `z[-i]`.
    pub reachable: Vec<DigitSet>,
}

impl ConstrainedPrefix {
    pub fn steps(&self) -> usize {
        self.left_digits.len()
    }

    /// `z` as a configuration: the chosen digits, the seed at 0, zeros right.
    pub fn configuration(&self) -> Configuration {
        let mut core: Vec<Digit> = self.left_digits.iter().rev().copied().collect();
        core.push(self.params.p());
        Configuration::finite(core, -(self.left_digits.len() as i64))
    }
}

/// Space-time triangle of `z` grown one step at a time. Row `t` holds
/// `F^t(z)` at positions `-(i-t)..=(i-t)` after step `i`.
struct Cone<'a> {
    rule: &'a LocalRule,
    rows: Vec<VecDeque<Digit>>,
}

impl<'a> Cone<'a> {
    fn new(rule: &'a LocalRule, seed: Digit) -> Self {
        Cone { rule, rows: vec![VecDeque::from([seed])] }
    }

    /// Extends every row by one cell on the right. Cells right of the seed
    /// start at zero.
    fn grow_right(&mut self) {
        let i = self.rows.len();
        self.rows[0].push_back(0);
        for t in 1..i {
            let prev = &self.rows[t - 1];
            let n = prev.len();
            let v = self.rule.eval3(prev[n - 3], prev[n - 2], prev[n - 1]);
            self.rows[t].push_back(v);
        }
    }

    /// The new left diagonal for `z[-i] = d`, and the resulting trace digit.
    fn left_diagonal(&self, d: Digit) -> (Vec<Digit>, Digit) {
        let i = self.rows.len();
        let mut diag = Vec::with_capacity(i);
        diag.push(d);
        for t in 1..i {
            let prev = &self.rows[t - 1];
            diag.push(self.rule.eval3(diag[t - 1], prev[0], prev[1]));
        }
        let last = &self.rows[i - 1];
        let top = self.rule.eval3(diag[i - 1], last[0], last[1]);
        (diag, top)
    }

    fn commit(&mut self, diag: Vec<Digit>, top: Digit) {
        for (row, v) in self.rows.iter_mut().zip(diag) {
            row.push_front(v);
        }
        self.rows.push(VecDeque::from([top]));
    }
}

/// Chooses `z[-1], …, z[-steps]` so that `tr(z)[i] < p` for `1 <= i <= steps`,
/// starting from `z[0] = p` and zeros on the right. Among valid digits the
/// smallest is taken.
pub fn build_constrained_prefix(ca: &Ca, steps: usize) -> Result<ConstrainedPrefix> {
    if steps == 0 {
        return Err(Error::precondition("at least one step is required"));
    }
    let params = ca.params();
    let p = params.p();
    let rule = ca.fmul(crate::automaton::Direction::POverQ);
    let mut cone = Cone::new(rule, p);
    let mut left_digits = Vec::with_capacity(steps);
    let mut trace = vec![p];
    let mut reachable = Vec::with_capacity(steps);
    for step in 1..=steps {
        cone.grow_right();
        let mut seen = DigitSet::EMPTY;
        let mut chosen = None;
        for d in 0..params.base() {
            let (diag, top) = cone.left_diagonal(d);
            seen.insert(top);
            if top < p && chosen.is_none() {
                chosen = Some((d, diag, top));
            }
        }
        let Some((d, diag, top)) = chosen else {
            return Err(Error::NoChoiceExists { step });
        };
        if seen.iter().filter(|&v| v < p).count() != 1 {
            return Err(Error::ConsistencyViolation(format!(
                "step {step}: reachable digits {:?} meet 0..{p} more than once",
                seen.to_vec()
            )));
        }
        cone.commit(diag, top);
        left_digits.push(d);
        trace.push(top);
        reachable.push(seen);
    }
    Ok(ConstrainedPrefix { params, left_digits, trace, reachable })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnCandidate {
    pub numerator: u64,
    pub den_exp: u32,
    /// Number of leading times `t` whose first fractional digit is `< p`.
    pub run: usize,
    pub first_violation: Option<usize>,
}

/// First fractional digits of `(p/q)^t ξ` for `t < steps`, `ξ = num/(pq)^k`.
pub fn fractional_digits(numerator: u64, den_exp: u32, steps: usize, params: Params) -> Vec<Digit> {
    let (p, q, b) = (params.p(), params.q(), params.base());
    let mut num = BigUint::from(numerator);
    let mut den = num_traits::pow(BigUint::from(b), den_exp as usize);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let frac = num.mod_floor(&den);
        let d = (frac * b) / &den;
        out.push(d.to_u32().expect("digit below base"));
        num *= p;
        den *= q;
    }
    out
}

fn score(numerator: u64, den_exp: u32, steps: usize, params: Params) -> ColumnCandidate {
    let digits = fractional_digits(numerator, den_exp, steps, params);
    let first_violation = digits.iter().position(|&d| d >= params.p());
    ColumnCandidate { numerator, den_exp, run: first_violation.unwrap_or(steps), first_violation }
}

/// Scores every `ξ = num/(pq)^k` with `1 <= num <= max_num`, `k <= max_den_exp`
/// (skipping non-reduced duplicates) and ranks them by run length.
pub fn search_finite_columns(
    max_num: u64,
    max_den_exp: u32,
    steps: usize,
    params: Params,
    budget: u128,
) -> Result<Vec<ColumnCandidate>> {
    let work = max_num as u128 * (max_den_exp as u128 + 1) * steps as u128;
    if work > budget {
        return Err(Error::BudgetExceeded { required: work, budget });
    }
    let b = params.base() as u64;
    let grid: Vec<(u64, u32)> = (0..=max_den_exp)
        .flat_map(|k| (1..=max_num).filter(move |n| k == 0 || n % b != 0).map(move |n| (n, k)))
        .collect();
    let mut out: Vec<ColumnCandidate> = grid.par_iter().map(|&(n, k)| score(n, k, steps, params)).collect();
    out.sort_by(|a, b| {
        b.run.cmp(&a.run).then(a.den_exp.cmp(&b.den_exp)).then(a.numerator.cmp(&b.numerator))
    });
    Ok(out)
}

pub fn search_csv(rows: &[ColumnCandidate]) -> String {
    let mut out = String::from("numerator,denominator_exponent,run_length,first_violation_step\n");
    for r in rows {
        let v = r.first_violation.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", r.numerator, r.den_exp, r.run, v);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramStyle {
    Ascii,
    Pgm,
}

/// Rows `F^t(x)` for `t < steps` restricted to positions `lo..=hi`.
pub fn diagram_rows(ca: &Ca, x: &Configuration, steps: usize, lo: i64, hi: i64) -> Vec<Vec<Digit>> {
    let mut rows = Vec::with_capacity(steps);
    let mut cur = x.clone();
    for t in 0..steps {
        if t > 0 {
            cur = ca.apply(&cur, Automaton::FmulPOverQ);
        }
        rows.push(cur.window(lo, hi));
    }
    rows
}

/// ASCII uses one character per digit; PGM (plain P2) maps `d` to gray
/// `⌊255·(pq−1−d)/(pq−1)⌋`, so zero is white.
pub fn render_diagram(
    ca: &Ca,
    x: &Configuration,
    steps: usize,
    lo: i64,
    hi: i64,
    style: DiagramStyle,
) -> Result<Vec<u8>> {
    if lo > hi {
        return Err(Error::precondition(format!("empty window {lo}..={hi}")));
    }
    let rows = diagram_rows(ca, x, steps, lo, hi);
    let top = ca.params().base() - 1;
    let mut out = String::new();
    match style {
        DiagramStyle::Ascii => {
            for row in &rows {
                out.extend(row.iter().map(|&d| crate::arith::digit_char(d)));
                out.push('\n');
            }
        }
        DiagramStyle::Pgm => {
            let _ = writeln!(out, "P2\n{} {}\n255", hi - lo + 1, steps);
            for row in &rows {
                let line: Vec<String> = row.iter().map(|&d| (255 * (top - d) / top).to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
    }
    Ok(out.into_bytes())
}

/// Does the search report agree with the automaton's own column 1?
pub fn cross_check_with_ca(ca: &Ca, cand: &ColumnCandidate, steps: usize) -> Result<bool> {
    let params = ca.params();
    let xi = crate::numbers::rational(cand.numerator as i64, 1)
        / crate::numbers::rational(num_traits::pow(params.base() as i64, cand.den_exp as usize), 1);
    let x = crate::numbers::encode(&xi, params)?;
    let col = crate::language::trace_of(ca, &x, 1, steps);
    let violation = col.digits().iter().position(|&d| d >= params.p());
    Ok(violation == cand.first_violation && !xi.is_zero())
}
