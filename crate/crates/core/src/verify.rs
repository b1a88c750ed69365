//! Empirical frequencies along subsequences, for cross-checking exact values.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::dfao::Dfao;
use crate::density::LogLinearValue;
use crate::error::{Error, Result};
use crate::rational::{fmt_q, gcd_u64, to_f64, Q};
use crate::subseq::Along;

const SEGMENT: u64 = 1 << 18;
const CHUNK: usize = 1 << 14;

/// All primes `<= limit`, by a segmented sieve.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return vec![];
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let mut small = vec![true; root as usize + 1];
    small[0] = false;
    small[1] = false;
    let mut i = 2;
    while i * i <= root {
        if small[i as usize] {
            let mut j = i * i;
            while j <= root {
                small[j as usize] = false;
                j += i;
            }
        }
        i += 1;
    }
    let base: Vec<u64> = (2..=root).filter(|&p| small[p as usize]).collect();
    let mut out = Vec::new();
    let mut lo = 2;
    while lo <= limit {
        let hi = (lo + SEGMENT - 1).min(limit);
        let mut seg = vec![true; (hi - lo + 1) as usize];
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut j = (lo.div_ceil(p) * p).max(p * p);
            while j <= hi {
                seg[(j - lo) as usize] = false;
                j += p;
            }
        }
        out.extend(seg.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| lo + i as u64));
        lo = hi + 1;
    }
    out
}

/// An upper bound for the `n`-th prime.
fn nth_prime_bound(n: u64) -> u64 {
    if n < 6 {
        return 15;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64 + 10
}

/// The first `count` terms `n_1, n_2, ..` of the subsequence.
pub fn terms(along: Along, count: u64) -> Result<Vec<u128>> {
    Ok(match along {
        Along::Naturals => (1..=count as u128).collect(),
        Along::Squares => (1..=count)
            .map(|l| (l as u128).checked_mul(l as u128).ok_or(Error::Overflow(l)))
            .collect::<Result<_>>()?,
        Along::Primes => {
            let mut p = sieve_primes(nth_prime_bound(count));
            p.truncate(count as usize);
            p.into_iter().map(u128::from).collect()
        }
        Along::Coprime(m) => (1u64..)
            .filter(|&n| gcd_u64(n, m) == 1)
            .take(count as usize)
            .map(u128::from)
            .collect(),
    })
}

/// The terms `n_l <= bound`.
pub fn terms_up_to(along: Along, bound: u64) -> Vec<u128> {
    match along {
        Along::Naturals => (1..=bound as u128).collect(),
        Along::Squares => (1u128..).take_while(|l| l * l <= bound as u128).map(|l| l * l).collect(),
        Along::Primes => sieve_primes(bound).into_iter().map(u128::from).collect(),
        Along::Coprime(m) => (1..=bound).filter(|&n| gcd_u64(n, m) == 1).map(u128::from).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct EmpiricalEstimate {
    pub count: u64,
    pub largest: u128,
    pub counts: BTreeMap<String, u64>,
    /// `#{l <= N : a(n_l) = alpha} / N`.
    pub natural: BTreeMap<String, f64>,
    /// `sum 1/l [a(n_l) = alpha] / sum 1/l`.
    pub log: BTreeMap<String, f64>,
}

impl EmpiricalEstimate {
    pub fn to_json(&self) -> Value {
        json!({
            "count": self.count,
            "largest": self.largest.to_string(),
            "counts": self.counts,
            "natural": self.natural,
            "log": self.log,
        })
    }
}

/// Frequencies of the outputs of `a` on the given terms, with `terms[i]`
/// counted as `n_{i+1}`.
pub fn empirical(a: &Dfao, terms: &[u128]) -> EmpiricalEstimate {
    let symbols = a.alphabet();
    let pos = |s: &str| symbols.iter().position(|x| x == s).expect("symbol");
    // fixed chunks merged in order keep the float sums deterministic
    let partial: Vec<(Vec<u64>, Vec<f64>)> = terms
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut counts = vec![0u64; symbols.len()];
            let mut logs = vec![0f64; symbols.len()];
            for (i, &n) in chunk.iter().enumerate() {
                let l = (ci * CHUNK + i + 1) as f64;
                let s = pos(a.evaluate(n));
                counts[s] += 1;
                logs[s] += 1.0 / l;
            }
            (counts, logs)
        })
        .collect();
    let mut counts = vec![0u64; symbols.len()];
    let mut logs = vec![0f64; symbols.len()];
    for (c, l) in partial {
        for s in 0..symbols.len() {
            counts[s] += c[s];
            logs[s] += l[s];
        }
    }
    let total = terms.len().max(1) as f64;
    let harmonic: f64 = logs.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    EmpiricalEstimate {
        count: terms.len() as u64,
        largest: terms.last().copied().unwrap_or(0),
        counts: symbols.iter().cloned().zip(counts.iter().copied()).collect(),
        natural: symbols.iter().zip(&counts).map(|(s, &c)| (s.clone(), c as f64 / total)).collect(),
        log: symbols.iter().zip(&logs).map(|(s, &l)| (s.clone(), l / harmonic)).collect(),
    }
}

pub fn empirical_density(a: &Dfao, along: Along, count: u64) -> Result<EmpiricalEstimate> {
    Ok(empirical(a, &terms(along, count)?))
}

pub fn empirical_density_up_to(a: &Dfao, along: Along, bound: u64) -> EmpiricalEstimate {
    empirical(a, &terms_up_to(along, bound))
}

#[derive(Clone, Debug)]
pub enum ExactValue {
    Rational(Q),
    Log(LogLinearValue),
}

impl ExactValue {
    fn bounds(&self) -> (f64, f64) {
        match self {
            ExactValue::Rational(q) => (to_f64(q), to_f64(q)),
            ExactValue::Log(v) => (to_f64(&v.lo), to_f64(&v.hi)),
        }
    }

    fn describe(&self) -> String {
        match self {
            ExactValue::Rational(q) => fmt_q(q),
            ExactValue::Log(v) => v.to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub symbol: String,
    pub exact: String,
    pub empirical: f64,
    /// Distance from the empirical value to the exact enclosure.
    pub error: f64,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Comparison {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| json!({"symbol": r.symbol, "exact": r.exact, "empirical": r.empirical, "error": r.error, "ok": r.ok}))
            .collect();
        json!({"tolerance": self.tolerance, "pass": self.pass, "rows": rows})
    }
}

/// Compares every symbol of `exact` against `empirical` (missing symbols
/// count as frequency 0).
pub fn compare(exact: &BTreeMap<String, ExactValue>, empirical: &BTreeMap<String, f64>, tol: f64) -> Comparison {
    let rows: Vec<ComparisonRow> = exact
        .iter()
        .map(|(s, v)| {
            let e = empirical.get(s).copied().unwrap_or(0.0);
            let (lo, hi) = v.bounds();
            let error = if e < lo { lo - e } else if e > hi { e - hi } else { 0.0 };
            ComparisonRow {
                symbol: s.clone(),
                exact: v.describe(),
                empirical: e,
                error,
                ok: error <= tol,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.ok);
    Comparison {
        rows,
        tolerance: tol,
        pass,
    }
}
