//! Local rules of the multiplication automata, exact application on
//! eventually-constant configurations, and the left-determination rule Δ.

use crate::arith::{decompose, Digit, Params, Radix};
use crate::config::Configuration;
use crate::error::{Error, Result};

/// Which integer multiplier a two-digit rule implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    P,
    Q,
}

/// Which fraction a three-digit rule implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    POverQ,
    QOverP,
}

impl Direction {
    pub fn params(self, params: Params) -> Params {
        match self {
            Direction::POverQ => params,
            Direction::QOverP => params.swapped(),
        }
    }

    pub fn reverse(self) -> Direction {
        match self {
            Direction::POverQ => Direction::QOverP,
            Direction::QOverP => Direction::POverQ,
        }
    }
}

/// `mul(a, b) = a0 * p + b1` where `a = a1 q + a0` and `b = b1 q + b0`
/// (for [`Factor::P`]); [`Factor::Q`] swaps the roles of `p` and `q`.
pub fn mul_rule(a: Digit, b: Digit, params: Params, factor: Factor) -> Digit {
    let params = match factor {
        Factor::P => params,
        Factor::Q => params.swapped(),
    };
    let (_, a0) = decompose(a, params, Radix::ByQ);
    let (b1, _) = decompose(b, params, Radix::ByQ);
    a0 * params.p() + b1
}

/// The literal composition `mul(mul(a, c), mul(c, b))`.
pub fn fmul_rule(a: Digit, c: Digit, b: Digit, params: Params, direction: Direction) -> Digit {
    let factor = match direction {
        Direction::POverQ => Factor::P,
        Direction::QOverP => Factor::Q,
    };
    mul_rule(mul_rule(a, c, params, factor), mul_rule(c, b, params, factor), params, factor)
}

/// Expanded closed form of the three-digit rule, written out from the digit
/// decompositions instead of composing two-digit rules.
fn fmul_fused(a: Digit, c: Digit, b: Digit, params: Params) -> Digit {
    let (p, q) = (params.p(), params.q());
    let (a0, c1, c0, b1) = (a % q, c / q, c % q, b / q);
    ((a0 * p + c1) % q) * p + (c0 * p + b1) / q
}

/// The automata that [`Ca::apply`] can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Automaton {
    MulP,
    MulQ,
    Shift,
    ShiftInverse,
    FmulPOverQ,
    FmulQOverP,
}

impl Automaton {
    pub fn fmul(direction: Direction) -> Automaton {
        match direction {
            Direction::POverQ => Automaton::FmulPOverQ,
            Direction::QOverP => Automaton::FmulQOverP,
        }
    }
}

/// A sliding rule with the given memory (offset of its first input) and a
/// dense table indexed by the inputs in base `pq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRule {
    base: u32,
    arity: usize,
    memory: i64,
    table: Vec<Digit>,
}

impl LocalRule {
    fn mul(params: Params, factor: Factor) -> Self {
        let n = params.base();
        let table = (0..n * n).map(|i| mul_rule(i / n, i % n, params, factor)).collect();
        LocalRule { base: n, arity: 2, memory: 0, table }
    }

    fn fmul(params: Params, direction: Direction) -> Self {
        let n = params.base();
        let dp = direction.params(params);
        let table = (0..n * n * n)
            .map(|i| fmul_fused(i / (n * n), i / n % n, i % n, dp))
            .collect();
        LocalRule { base: n, arity: 3, memory: -1, table }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn memory(&self) -> i64 {
        self.memory
    }

    #[inline]
    pub fn eval(&self, inputs: &[Digit]) -> Digit {
        let idx = inputs.iter().fold(0usize, |acc, &d| acc * self.base as usize + d as usize);
        self.table[idx]
    }

    #[inline]
    pub fn eval3(&self, a: Digit, c: Digit, b: Digit) -> Digit {
        let n = self.base as usize;
        self.table[(a as usize * n + c as usize) * n + b as usize]
    }

    /// Applies the rule across a finite word; the output is shorter by
    /// `arity - 1`.
    pub fn apply_word(&self, word: &[Digit]) -> Vec<Digit> {
        if word.len() < self.arity {
            return Vec::new();
        }
        word.windows(self.arity).map(|w| self.eval(w)).collect()
    }

    fn apply(&self, x: &Configuration) -> Configuration {
        let pad = self.arity - 1;
        let lt = x.left_tail();
        let rt = x.right_tail();
        let mut padded = Vec::with_capacity(x.core().len() + 2 * pad);
        padded.extend(std::iter::repeat_n(lt, pad));
        padded.extend_from_slice(x.core());
        padded.extend(std::iter::repeat_n(rt, pad));
        let core = self.apply_word(&padded);
        let new_lt = self.eval(&vec![lt; self.arity]);
        let new_rt = self.eval(&vec![rt; self.arity]);
        // Output at padded window start s sits at position s - memory.
        let offset = x.offset() - pad as i64 - self.memory;
        Configuration::new(new_lt, core, new_rt, offset)
    }
}

/// The rule tables for one parameter pair, built once and shared.
#[derive(Debug, Clone)]
pub struct Ca {
    params: Params,
    mul_p: LocalRule,
    mul_q: LocalRule,
    fmul_pq: LocalRule,
    fmul_qp: LocalRule,
}

impl Ca {
    /// Builds the tables and checks the fused three-digit tables against
    /// the literal composition of the two-digit rules.
    pub fn new(params: Params) -> Result<Self> {
        let ca = Ca {
            params,
            mul_p: LocalRule::mul(params, Factor::P),
            mul_q: LocalRule::mul(params, Factor::Q),
            fmul_pq: LocalRule::fmul(params, Direction::POverQ),
            fmul_qp: LocalRule::fmul(params, Direction::QOverP),
        };
        ca.self_check()?;
        Ok(ca)
    }

    fn self_check(&self) -> Result<()> {
        let n = self.params.base();
        for dir in [Direction::POverQ, Direction::QOverP] {
            let rule = self.fmul(dir);
            for a in 0..n {
                for c in 0..n {
                    for b in 0..n {
                        let composed = fmul_rule(a, c, b, self.params, dir);
                        if rule.eval3(a, c, b) != composed {
                            return Err(Error::ConsistencyViolation(format!(
                                "fused {dir:?} table disagrees with composition at ({a},{c},{b})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn mul(&self, factor: Factor) -> &LocalRule {
        match factor {
            Factor::P => &self.mul_p,
            Factor::Q => &self.mul_q,
        }
    }

    pub fn fmul(&self, direction: Direction) -> &LocalRule {
        match direction {
            Direction::POverQ => &self.fmul_pq,
            Direction::QOverP => &self.fmul_qp,
        }
    }

    pub fn apply(&self, x: &Configuration, automaton: Automaton) -> Configuration {
        match automaton {
            Automaton::MulP => self.mul_p.apply(x),
            Automaton::MulQ => self.mul_q.apply(x),
            Automaton::Shift => x.translate(-1),
            Automaton::ShiftInverse => x.translate(1),
            Automaton::FmulPOverQ => self.fmul_pq.apply(x),
            Automaton::FmulQOverP => self.fmul_qp.apply(x),
        }
    }

    /// `σ^{-1} ∘ Mul ∘ Mul` evaluated as three separate maps.
    pub fn apply_composed(&self, x: &Configuration, direction: Direction) -> Configuration {
        let factor = match direction {
            Direction::POverQ => Automaton::MulP,
            Direction::QOverP => Automaton::MulQ,
        };
        let y = self.apply(&self.apply(x, factor), factor);
        self.apply(&y, Automaton::ShiftInverse)
    }

    pub fn iterate(&self, x: &Configuration, automaton: Automaton, steps: usize) -> Configuration {
        (0..steps).fold(x.clone(), |acc, _| self.apply(&acc, automaton))
    }

    /// Rows `F^0(x), .., F^{steps-1}(x)`.
    pub fn diagram(&self, x: &Configuration, direction: Direction, steps: usize) -> SpaceTimeDiagram {
        let mut rows = Vec::with_capacity(steps);
        let mut cur = x.clone();
        for t in 0..steps {
            if t > 0 {
                cur = self.apply(&cur, Automaton::fmul(direction));
            }
            rows.push(cur.clone());
        }
        SpaceTimeDiagram { params: self.params, direction, rows }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceTimeDiagram {
    pub params: Params,
    pub direction: Direction,
    pub rows: Vec<Configuration>,
}

impl SpaceTimeDiagram {
    pub fn steps(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, i: i64) -> Vec<Digit> {
        self.rows.iter().map(|r| r.get(i)).collect()
    }
}

const UNDEFINED: Digit = Digit::MAX;

/// Reconstructs `x[0]` from `(Mul_{q/p}(x)[1], x[1], Mul_{p/q}(x)[1])`,
/// which turns the trace at column `i` into the trace at column `i - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaRule {
    base: u32,
    table: Vec<Digit>,
}

impl DeltaRule {
    /// `None` for triples no configuration realizes.
    pub fn get(&self, u: Digit, c: Digit, v: Digit) -> Option<Digit> {
        let n = self.base as usize;
        if u >= self.base || c >= self.base || v >= self.base {
            return None;
        }
        match self.table[(u as usize * n + c as usize) * n + v as usize] {
            UNDEFINED => None,
            d => Some(d),
        }
    }

    pub fn realizable_count(&self) -> usize {
        self.table.iter().filter(|&&d| d != UNDEFINED).count()
    }

    /// One Δ step over a finite column word: output is shorter by two and
    /// aligned with the input's interior times.
    pub fn step(&self, column: &[Digit]) -> Result<Vec<Digit>> {
        column
            .windows(3)
            .map(|w| self.get(w[0], w[1], w[2]).ok_or(Error::UndefinedTriple { u: w[0], c: w[1], v: w[2] }))
            .collect()
    }
}

pub fn derive_delta(ca: &Ca) -> Result<DeltaRule> {
    let params = ca.params();
    let n = params.base();
    if (n as u64).pow(3) > 1 << 27 {
        return Err(Error::BudgetExceeded { required: (n as u128).pow(3), budget: 1 << 27 });
    }
    let fwd = ca.fmul(Direction::POverQ);
    let back = ca.fmul(Direction::QOverP);
    let mut table = vec![UNDEFINED; (n * n * n) as usize];
    let nu = n as usize;
    for x0 in 0..n {
        for x1 in 0..n {
            for x2 in 0..n {
                let u = back.eval3(x0, x1, x2);
                let v = fwd.eval3(x0, x1, x2);
                let slot = &mut table[(u as usize * nu + x1 as usize) * nu + v as usize];
                if *slot == UNDEFINED {
                    *slot = x0;
                } else if *slot != x0 {
                    return Err(Error::ConsistencyViolation(format!(
                        "triple ({u},{x1},{v}) arises from both x[0]={} and x[0]={x0}",
                        *slot
                    )));
                }
            }
        }
    }
    Ok(DeltaRule { base: n, table })
}

/// Rebuilds the trace on columns `j-width+1 ..= j` from the column-`j`
/// trace `y`. Entry `k` of the result is the tuple at time `k + width - 1`
/// (relative to `y`), leftmost column first.
pub fn widen_trace(y: &[Digit], delta: &DeltaRule, width: usize) -> Result<Vec<Vec<Digit>>> {
    if width == 0 {
        return Err(Error::precondition("width must be at least 1"));
    }
    let mut columns = vec![y.to_vec()];
    for _ in 1..width {
        let next = delta.step(columns.last().unwrap())?;
        columns.push(next);
    }
    let len = columns.last().unwrap().len();
    Ok((0..len)
        .map(|k| {
            columns
                .iter()
                .enumerate()
                .rev()
                .map(|(depth, col)| col[k + (width - 1 - depth)])
                .collect()
        })
        .collect())
}
