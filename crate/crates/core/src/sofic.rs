//! Complexity counts: the closed form, its generating function, and labeled
//! graphs presenting sofic shifts with the same counts.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::Params;
use crate::error::{Error, Result};

/// `P(n) = pq(p^{n−1} − q^{n−1})(q−1)/(p−q) + p^n q` for `n >= 1`.
pub fn complexity_closed_form(n: usize, params: Params) -> Result<BigInt> {
    params.require_p_greater()?;
    if n == 0 {
        return Err(Error::precondition("closed form is stated for n >= 1"));
    }
    let p = BigInt::from(params.p());
    let q = BigInt::from(params.q());
    let pn1 = num_traits::pow(p.clone(), n - 1);
    let qn1 = num_traits::pow(q.clone(), n - 1);
    let numer: BigInt = &p * &q * (&pn1 - &qn1) * (&q - 1u32);
    let (quot, rem) = numer.div_rem(&(&p - &q));
    if !rem.is_zero() {
        return Err(Error::NonIntegral(format!("{numer} / {}", &p - &q)));
    }
    Ok(quot + pn1 * &p * &q)
}

/// `|W_{2,n}| = q^n (q − 1)`.
pub fn w2_count(n: usize, params: Params) -> BigInt {
    num_traits::pow(BigInt::from(params.q()), n) * (params.q() - 1)
}

/// Coefficients `a[0..=n_max]` of `(1 + (pq−p−q)z) / ((1−pz)(1−qz))`, each
/// checked against the closed form.
pub fn gf_coefficients(n_max: usize, params: Params) -> Result<Vec<BigInt>> {
    params.require_p_greater()?;
    let p = BigInt::from(params.p());
    let q = BigInt::from(params.q());
    let mut a = vec![BigInt::one()];
    if n_max >= 1 {
        a.push(&p * &q);
    }
    for n in 2..=n_max {
        let next = (&p + &q) * &a[n - 1] - &p * &q * &a[n - 2];
        a.push(next);
    }
    for (n, coeff) in a.iter().enumerate().skip(1) {
        let closed = complexity_closed_form(n, params)?;
        if *coeff != closed {
            return Err(Error::ConsistencyViolation(format!(
                "coefficient {n} is {coeff}, closed form gives {closed}"
            )));
        }
    }
    Ok(a)
}

/// A finite directed graph with labeled edges. Labels are indices into
/// `alphabet`, which is kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    vertices: usize,
    alphabet: Vec<String>,
    edges: Vec<(usize, usize, usize)>,
}

/// The most vertices a subset state can track.
pub const MAX_VERTICES: usize = 128;

/// Default cap on distinct subset states alive in one counting step.
pub const DEFAULT_FRONTIER_CAP: usize = 1 << 20;

impl LabeledGraph {
    pub fn new(vertices: usize, edges: &[(usize, usize, &str)]) -> Result<Self> {
        if vertices > MAX_VERTICES {
            return Err(Error::precondition(format!("at most {MAX_VERTICES} vertices are supported")));
        }
        let mut alphabet: Vec<String> = edges.iter().map(|e| e.2.to_string()).collect();
        alphabet.sort();
        alphabet.dedup();
        let mut out = Vec::with_capacity(edges.len());
        for &(from, to, label) in edges {
            if from >= vertices || to >= vertices {
                return Err(Error::precondition(format!("edge {from} -> {to} leaves the vertex range")));
            }
            let l = alphabet.binary_search_by(|s| s.as_str().cmp(label)).expect("label collected above");
            out.push((from, to, l));
        }
        out.sort_unstable();
        out.dedup();
        Ok(LabeledGraph { vertices, alphabet, edges: out })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &str)> + '_ {
        self.edges.iter().map(|&(f, t, l)| (f, t, self.alphabet[l].as_str()))
    }

    /// Vertices that lie on a bi-infinite path, as a bitmask.
    pub fn essential_vertices(&self) -> u128 {
        let mut alive: u128 = if self.vertices == 128 { u128::MAX } else { (1u128 << self.vertices) - 1 };
        loop {
            let mut has_in = 0u128;
            let mut has_out = 0u128;
            for &(f, t, _) in &self.edges {
                if alive >> f & 1 == 1 && alive >> t & 1 == 1 {
                    has_out |= 1 << f;
                    has_in |= 1 << t;
                }
            }
            let next = alive & has_in & has_out;
            if next == alive {
                return alive;
            }
            alive = next;
        }
    }

    /// Successor table `succ[v][letter]` restricted to `alive`.
    fn successors(&self, alive: u128) -> Vec<Vec<u128>> {
        let mut succ = vec![vec![0u128; self.alphabet.len()]; self.vertices];
        for &(f, t, l) in &self.edges {
            if alive >> f & 1 == 1 && alive >> t & 1 == 1 {
                succ[f][l] |= 1 << t;
            }
        }
        succ
    }

    /// Is the essential part nonempty and strongly connected?
    pub fn is_transitive(&self) -> bool {
        let alive = self.essential_vertices();
        if alive == 0 {
            return false;
        }
        let succ = self.successors(alive);
        let mut pred = vec![0u128; self.vertices];
        for (f, row) in succ.iter().enumerate() {
            for &s in row {
                for t in bits(s) {
                    pred[t] |= 1 << f;
                }
            }
        }
        let forward = |adj: &dyn Fn(usize) -> u128| {
            let start = alive.trailing_zeros() as usize;
            let mut seen = 1u128 << start;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for w in bits(adj(v) & !seen) {
                    seen |= 1 << w;
                    stack.push(w);
                }
            }
            seen
        };
        let out_reach = forward(&|v| succ[v].iter().fold(0, |acc, s| acc | s));
        let in_reach = forward(&|v| pred[v]);
        out_reach == alive && in_reach == alive
    }

    fn step(&self, succ: &[Vec<u128>], set: u128, letter: usize) -> u128 {
        bits(set).fold(0, |acc, v| acc | succ[v][letter])
    }

    /// Vertices at the end of some path labeled `word` inside the essential
    /// subgraph.
    pub fn terminal_set(&self, word: &[usize]) -> u128 {
        let alive = self.essential_vertices();
        let succ = self.successors(alive);
        word.iter().fold(alive, |set, &l| self.step(&succ, set, l))
    }

    /// Number of essential paths carrying `word` as label.
    pub fn count_paths(&self, word: &[&str]) -> Result<BigUint> {
        let alive = self.essential_vertices();
        let letters = self.letter_indices(word)?;
        let mut counts: Vec<BigUint> =
            (0..self.vertices).map(|v| if alive >> v & 1 == 1 { BigUint::one() } else { BigUint::zero() }).collect();
        for &l in &letters {
            let mut next = vec![BigUint::zero(); self.vertices];
            for &(f, t, el) in &self.edges {
                if el == l && alive >> f & 1 == 1 && alive >> t & 1 == 1 {
                    next[t] += &counts[f];
                }
            }
            counts = next;
        }
        Ok(counts.into_iter().sum())
    }

    fn letter_indices(&self, word: &[&str]) -> Result<Vec<usize>> {
        word.iter()
            .map(|s| {
                self.alphabet
                    .binary_search_by(|a| a.as_str().cmp(s))
                    .map_err(|_| Error::Parse(format!("label {s:?} is not in the alphabet")))
            })
            .collect()
    }

    /// Parses an edge list with one `from to label` triple per line. Blank
    /// lines and lines starting with `#` are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_vertex = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [from, to, label] = fields[..] else {
                return Err(Error::Parse(format!("line {}: expected `from to label`", lineno + 1)));
            };
            let vertex = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: bad vertex {s:?}", lineno + 1)))
            };
            let (f, t) = (vertex(from)?, vertex(to)?);
            max_vertex = max_vertex.max(f).max(t);
            edges.push((f, t, label));
        }
        if edges.is_empty() {
            return Err(Error::Parse("edge list is empty".into()));
        }
        LabeledGraph::new(max_vertex + 1, &edges)
    }
}

impl fmt::Display for LabeledGraph {
    /// Edge-list form accepted by [`LabeledGraph::parse_edge_list`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (from, to, label) in self.edges() {
            writeln!(f, "{from} {to} {label}")?;
        }
        Ok(())
    }
}

fn bits(mut set: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let v = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(v)
        }
    })
}

/// Number of distinct labels of length `n` on paths of the essential
/// subgraph, counted through the subset construction.
pub fn count_distinct_labels(g: &LabeledGraph, n: usize) -> Result<BigUint> {
    count_distinct_labels_capped(g, n, DEFAULT_FRONTIER_CAP)
}

pub fn count_distinct_labels_capped(g: &LabeledGraph, n: usize, cap: usize) -> Result<BigUint> {
    Ok(label_counts(g, n, cap)?.pop().expect("counts start at length 0"))
}

/// Distinct label counts for every length `0..=n_max`.
pub fn label_counts(g: &LabeledGraph, n_max: usize, cap: usize) -> Result<Vec<BigUint>> {
    let alive = g.essential_vertices();
    let succ = g.successors(alive);
    let mut transitions: HashMap<(u128, usize), u128> = HashMap::new();
    let mut frontier: BTreeMap<u128, BigUint> = BTreeMap::new();
    let mut out = vec![BigUint::one()];
    if alive == 0 {
        out.resize(n_max + 1, BigUint::zero());
        return Ok(out);
    }
    frontier.insert(alive, BigUint::one());
    for _ in 0..n_max {
        let mut next: BTreeMap<u128, BigUint> = BTreeMap::new();
        for (set, count) in &frontier {
            for l in 0..g.alphabet.len() {
                let target = *transitions.entry((*set, l)).or_insert_with(|| g.step(&succ, *set, l));
                if target != 0 {
                    *next.entry(target).or_default() += count;
                }
            }
        }
        if next.len() > cap {
            return Err(Error::BudgetExceeded { required: next.len() as u128, budget: cap as u128 });
        }
        out.push(next.values().sum());
        frontier = next;
    }
    Ok(out)
}

/// The shift with language `P* (ε ∪ R) Q*` over disjoint alphabets of sizes
/// `p`, `q` and `pq − p − q`. Vertex 0 reads `P`, vertex 1 reads `Q`.
pub fn build_zpq(params: Params) -> Result<LabeledGraph> {
    params.require_p_greater()?;
    let (p, q) = (params.p(), params.q());
    let r = p * q - p - q;
    if r == 0 {
        return Err(Error::ConsistencyViolation(format!("pq - p - q vanishes for {params}")));
    }
    let mut labels: Vec<(usize, usize, String)> = Vec::new();
    for i in 0..p {
        labels.push((0, 0, format!("p{i}")));
    }
    for j in 0..q {
        labels.push((1, 1, format!("q{j}")));
        labels.push((0, 1, format!("q{j}")));
    }
    for k in 0..r {
        labels.push((0, 1, format!("r{k}")));
    }
    let edges: Vec<(usize, usize, &str)> = labels.iter().map(|(f, t, l)| (*f, *t, l.as_str())).collect();
    LabeledGraph::new(2, &edges)
}

/// Four vertices on a cycle `c, d, e, f`, each with self-loops `a` and `b`.
pub fn build_transitive_32() -> LabeledGraph {
    let mut edges = Vec::new();
    for v in 0..4 {
        edges.push((v, v, "a"));
        edges.push((v, v, "b"));
    }
    for (v, label) in ["c", "d", "e", "f"].into_iter().enumerate() {
        edges.push((v, (v + 1) % 4, label));
    }
    LabeledGraph::new(4, &edges).expect("static graph is valid")
}

/// `4·3^n − 3·2^n`.
pub fn transitive_32_formula(n: usize) -> BigInt {
    BigInt::from(4) * num_traits::pow(BigInt::from(3), n) - BigInt::from(3) * num_traits::pow(BigInt::from(2), n)
}

/// The first word, by length and then letter order, all of whose essential
/// paths end at one vertex. Such a word is synchronizing for the shift.
pub fn find_synchronizing_word(g: &LabeledGraph, max_len: usize) -> Result<Option<Vec<String>>> {
    if !g.is_transitive() {
        return Err(Error::NotTransitive);
    }
    let alive = g.essential_vertices();
    let succ = g.successors(alive);
    // Breadth-first over distinct terminal sets keeps the first word reaching
    // each set, which is also the first word in length-lexicographic order.
    let mut layer: Vec<(u128, Vec<usize>)> = vec![(alive, Vec::new())];
    let mut seen: HashMap<u128, ()> = HashMap::new();
    seen.insert(alive, ());
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (set, word) in &layer {
            for l in 0..g.alphabet.len() {
                let target = g.step(&succ, *set, l);
                if target == 0 {
                    continue;
                }
                let mut w = word.clone();
                w.push(l);
                if target.count_ones() == 1 {
                    return Ok(Some(w.into_iter().map(|l| g.alphabet[l].clone()).collect()));
                }
                if seen.insert(target, ()).is_none() {
                    next.push((target, w));
                }
            }
        }
        layer = next;
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRow {
    pub n: usize,
    pub count: BigUint,
    pub formula: Option<BigInt>,
}

impl CountRow {
    pub fn matches(&self) -> Option<bool> {
        self.formula.as_ref().map(|f| BigInt::from(self.count.clone()) == *f)
    }
}

pub fn count_csv(rows: &[CountRow]) -> String {
    let mut out = String::from("n,count,formula,match\n");
    for r in rows {
        let (formula, flag) = match (&r.formula, r.matches()) {
            (Some(f), Some(true)) => (f.to_string(), "MATCH"),
            (Some(f), _) => (f.to_string(), "MISMATCH"),
            (None, _) => (String::new(), ""),
        };
        let _ = writeln!(out, "{},{},{},{}", r.n, r.count, formula, flag);
    }
    out
}
