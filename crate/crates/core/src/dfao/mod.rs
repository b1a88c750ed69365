//! Deterministic finite automata with output over the digit alphabet
//! `{0, .., k-1}`, read most significant digit first.

mod ops;
mod parse;
mod rebase;

pub use ops::{product_many, product_tuples, Compression, DEFAULT_STATE_BUDGET};
pub use rebase::state_budget;
pub use parse::parse_dfao;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A complete k-DFAO.
///
/// States are indices `0..len()`; `names` keeps the textual identifiers in
/// declaration order. Transitions are stored row-major: `delta[q * base + d]`.
#[derive(Clone, PartialEq, Eq)]
pub struct Dfao {
    base: u32,
    names: Vec<String>,
    initial: usize,
    delta: Vec<usize>,
    output: Vec<String>,
}

impl fmt::Debug for Dfao {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.serialize())
    }
}

impl Dfao {
    /// Builds an automaton from raw tables, checking they are total.
    pub fn new(
        base: u32,
        names: Vec<String>,
        initial: usize,
        delta: Vec<usize>,
        output: Vec<String>,
    ) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidArgument(format!("base {base} < 2")));
        }
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidArgument("automaton without states".into()));
        }
        if initial >= n || output.len() != n || delta.len() != n * base as usize {
            return Err(Error::InvalidArgument("inconsistent table sizes".into()));
        }
        if delta.iter().any(|&t| t >= n) {
            return Err(Error::InvalidArgument("transition to unknown state".into()));
        }
        Ok(Dfao {
            base,
            names,
            initial,
            delta,
            output,
        })
    }

    /// Convenience constructor from a transition closure.
    pub fn from_fn(
        base: u32,
        names: &[&str],
        initial: usize,
        next: impl Fn(usize, u32) -> usize,
        output: &[&str],
    ) -> Result<Self> {
        let n = names.len();
        let mut delta = Vec::with_capacity(n * base as usize);
        for q in 0..n {
            for d in 0..base {
                delta.push(next(q, d));
            }
        }
        Self::new(
            base,
            names.iter().map(|s| s.to_string()).collect(),
            initial,
            delta,
            output.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn outputs(&self) -> &[String] {
        &self.output
    }

    pub fn output(&self, q: usize) -> &str {
        &self.output[q]
    }

    #[inline]
    pub fn next(&self, q: usize, d: u32) -> usize {
        self.delta[q * self.base as usize + d as usize]
    }

    /// `delta(q, w)` for a digit word `w`.
    pub fn run(&self, q: usize, word: &[u32]) -> usize {
        word.iter().fold(q, |s, &d| self.next(s, d))
    }

    /// State reached from the initial state on the canonical expansion of `n`.
    pub fn state_of(&self, n: u128) -> usize {
        let mut digits = [0u32; 128];
        let len = write_digits(n, self.base, &mut digits);
        self.run(self.initial, &digits[128 - len..])
    }

    /// `tau(delta(q0, (n)_k))`, with `(0)_k` the empty word.
    pub fn evaluate(&self, n: u128) -> &str {
        &self.output[self.state_of(n)]
    }

    /// Sorted, deduplicated list of output symbols.
    pub fn alphabet(&self) -> Vec<String> {
        let mut a = self.output.clone();
        a.sort();
        a.dedup();
        a
    }

    /// States reachable from `from`, in BFS order.
    pub fn reachable_from(&self, from: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut order = vec![from];
        seen[from] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            i += 1;
            for d in 0..self.base {
                let t = self.next(q, d);
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
        }
        order
    }

    /// Sub-automaton on `states` (which must be closed under transitions),
    /// keeping their relative order, started at `initial`.
    pub fn restrict(&self, states: &[usize], initial: usize) -> Result<Dfao> {
        let mut keep: Vec<usize> = states.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let index: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let mut delta = Vec::with_capacity(keep.len() * self.base as usize);
        for &q in &keep {
            for d in 0..self.base {
                let t = self.next(q, d);
                delta.push(*index.get(&t).ok_or_else(|| {
                    Error::Invariant(format!("state set not closed at {}", self.names[q]))
                })?);
            }
        }
        let init = *index
            .get(&initial)
            .ok_or_else(|| Error::Invariant("initial state outside restriction".into()))?;
        Dfao::new(
            self.base,
            keep.iter().map(|&q| self.names[q].clone()).collect(),
            init,
            delta,
            keep.iter().map(|&q| self.output[q].clone()).collect(),
        )
    }

    /// Same automaton with another initial state.
    pub fn with_initial(&self, initial: usize) -> Dfao {
        let mut a = self.clone();
        a.initial = initial;
        a
    }

    /// Same transitions with a new output table.
    pub fn with_outputs(&self, output: Vec<String>) -> Dfao {
        assert_eq!(output.len(), self.len());
        let mut a = self.clone();
        a.output = output;
        a
    }

    /// Output is the state name itself.
    pub fn pure(&self) -> Dfao {
        self.with_outputs(self.names.clone())
    }

    pub fn is_prolongable(&self) -> bool {
        self.next(self.initial, 0) == self.initial
    }

    /// Column-indexed incidence matrix: entry `(i, j)` counts digits taking
    /// state `j` to state `i`.
    pub fn incidence(&self) -> Vec<Vec<u64>> {
        let n = self.len();
        let mut m = vec![vec![0u64; n]; n];
        for j in 0..n {
            for d in 0..self.base {
                m[self.next(j, d)][j] += 1;
            }
        }
        m
    }

    /// Text form in the line-oriented automaton format.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("base {}\n", self.base));
        s.push_str(&format!("states {}\n", self.names.join(" ")));
        s.push_str(&format!("initial {}\n", self.names[self.initial]));
        let outs: Vec<String> = self
            .names
            .iter()
            .zip(&self.output)
            .map(|(n, o)| format!("{n}={o}"))
            .collect();
        s.push_str(&format!("output {}\n", outs.join(" ")));
        for q in 0..self.len() {
            for d in 0..self.base {
                s.push_str(&format!(
                    "delta {} {} {}\n",
                    self.names[q],
                    d,
                    self.names[self.next(q, d)]
                ));
            }
        }
        s
    }
}

/// Writes the base-`base` digits of `n` right-aligned into `buf`, returning
/// the number of digits used (zero for `n = 0`).
fn write_digits(mut n: u128, base: u32, buf: &mut [u32; 128]) -> usize {
    let b = base as u128;
    let mut i = 128;
    while n > 0 {
        i -= 1;
        buf[i] = (n % b) as u32;
        n /= b;
    }
    128 - i
}

/// Canonical base-`base` expansion of `n`, most significant digit first.
pub fn digits(n: u128, base: u32) -> Vec<u32> {
    let mut buf = [0u32; 128];
    let len = write_digits(n, base, &mut buf);
    buf[128 - len..].to_vec()
}

/// The word of exactly `len` digits congruent to `n` modulo `base^len`.
pub fn digits_fixed(n: u128, base: u32, len: usize) -> Vec<u32> {
    let b = base as u128;
    let mut out = vec![0u32; len];
    let mut n = n;
    for slot in out.iter_mut().rev() {
        *slot = (n % b) as u32;
        n /= b;
    }
    out
}

/// Value of a digit word.
pub fn word_value(word: &[u32], base: u32) -> u128 {
    word.iter().fold(0u128, |acc, &d| acc * base as u128 + d as u128)
}

/// Formats a tuple of symbols as `<a,b,..>`.
pub fn tuple_symbol<S: AsRef<str>>(parts: &[S]) -> String {
    let inner: Vec<&str> = parts.iter().map(AsRef::as_ref).collect();
    format!("<{}>", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn digit_helpers() {
        assert_eq!(digits(37, 2), vec![1, 0, 0, 1, 0, 1]);
        assert_eq!(digits_fixed(37, 2, 4), vec![0, 1, 0, 1]);
        assert_eq!(word_value(&[0, 1, 0, 1, 1, 0], 2), 22);
        assert!(digits(0, 3).is_empty());
    }

    #[test]
    fn paperfolding_evaluation() {
        let pf = corpus::paperfolding();
        assert_eq!(pf.evaluate(0), "1");
        assert_eq!(pf.evaluate(2), "0");
        assert_eq!(pf.evaluate(3), "1");
    }

    #[test]
    fn paperfolding_incidence_matches_printed_matrix() {
        let m = corpus::paperfolding().incidence();
        assert_eq!(
            m,
            vec![
                vec![1, 0, 1, 0],
                vec![1, 1, 0, 0],
                vec![0, 1, 0, 1],
                vec![0, 0, 1, 1]
            ]
        );
    }

    #[test]
    fn incidence_columns_sum_to_base() {
        for a in corpus::all() {
            let m = a.incidence();
            for j in 0..a.len() {
                let s: u64 = (0..a.len()).map(|i| m[i][j]).sum();
                assert_eq!(s, a.base() as u64);
            }
        }
    }
}
