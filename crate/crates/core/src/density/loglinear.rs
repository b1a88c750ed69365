use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::rational::{fmt_q, from_f64, qu, to_f64, Q};

/// The number `(c0 + sum c_t ln r_t) / ln base`, together with a rational
/// interval known to contain it.
///
/// When `exact` is set the symbolic form is the value itself; otherwise it is
/// a partial sum and only the enclosure is authoritative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogLinearValue {
    pub c0: Q,
    pub terms: Vec<(Q, Q)>,
    pub base: u32,
    pub lo: Q,
    pub hi: Q,
    pub exact: bool,
}

impl LogLinearValue {
    pub fn zero(base: u32) -> Self {
        Self::rational(Q::zero(), base)
    }

    /// A rational number `v`, written as `v ln k / ln k`.
    pub fn rational(v: Q, base: u32) -> Self {
        let terms = if v.is_zero() { vec![] } else { vec![(v.clone(), qu(base as u64))] };
        LogLinearValue {
            c0: Q::zero(),
            terms,
            base,
            lo: v.clone(),
            hi: v,
            exact: true,
        }
    }

    /// Exact value from its symbolic form; the enclosure is computed here.
    pub fn symbolic(c0: Q, terms: Vec<(Q, Q)>, base: u32) -> Self {
        let mut v = LogLinearValue {
            c0,
            terms,
            base,
            lo: Q::zero(),
            hi: Q::zero(),
            exact: true,
        };
        v.simplify();
        v
    }

    /// Partial symbolic sum `partial` plus a nonnegative remainder bounded by
    /// `tail`.
    pub fn enclosed(partial: LogLinearValue, tail: Q) -> Self {
        let mut v = partial;
        v.hi = &v.hi + tail;
        v.exact = false;
        v
    }

    /// Merges equal arguments, drops zero and unit terms and recomputes the
    /// enclosure of exact values.
    pub fn simplify(&mut self) {
        // c ln a + c ln b = c ln(ab), with c made positive first
        let mut by_coef: Vec<(Q, Q)> = Vec::new();
        for (c, r) in self.terms.drain(..) {
            if c.is_zero() || r.is_one() {
                continue;
            }
            let (c, r) = if c.is_negative() { (-c, r.recip()) } else { (c, r) };
            match by_coef.iter_mut().find(|(c2, _)| *c2 == c) {
                Some((_, r2)) => *r2 *= r,
                None => by_coef.push((c, r)),
            }
        }
        let k = qu(self.base as u64);
        let mut merged: Vec<(Q, Q)> = Vec::new();
        for (c, r) in by_coef {
            if r.is_one() {
                continue;
            }
            let (c, r) = match power_of(&r, &k) {
                Some(e) => (c * Q::from_integer(e.into()), k.clone()),
                None => (c, r),
            };
            match merged.iter_mut().find(|(_, r2)| *r2 == r) {
                Some((c2, _)) => *c2 += c,
                None => merged.push((c, r)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        merged.sort_by(|a, b| a.1.cmp(&b.1));
        self.terms = merged;
        if self.exact {
            let (lo, hi) = self.symbolic_bounds();
            self.lo = lo;
            self.hi = hi;
        }
    }

    /// Rational value when the symbolic form reduces to one.
    pub fn as_rational(&self) -> Option<Q> {
        let k = qu(self.base as u64);
        if !self.exact || !self.c0.is_zero() || self.terms.iter().any(|(_, r)| *r != k) {
            return None;
        }
        Some(self.terms.iter().map(|(c, _)| c.clone()).sum())
    }

    fn symbolic_bounds(&self) -> (Q, Q) {
        if let Some(v) = self.as_rational() {
            return (v.clone(), v);
        }
        let v = self.symbolic_f64();
        let ln_k = (self.base as f64).ln();
        let mass: f64 = to_f64(&self.c0).abs()
            + self
                .terms
                .iter()
                .map(|(c, r)| to_f64(c).abs() * (to_f64(r).ln().abs() + 1.0))
                .sum::<f64>();
        let margin = 1e-12 * (1.0 + mass) / ln_k;
        (from_f64(v - margin), from_f64(v + margin))
    }

    /// Value of the symbolic form in floating point.
    pub fn symbolic_f64(&self) -> f64 {
        let s: f64 = to_f64(&self.c0)
            + self
                .terms
                .iter()
                .map(|(c, r)| to_f64(c) * ln_q(r))
                .sum::<f64>();
        s / (self.base as f64).ln()
    }

    pub fn midpoint(&self) -> f64 {
        to_f64(&((&self.lo + &self.hi) / qu(2)))
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = from_f64(x);
        self.lo <= x && x <= self.hi
    }

    pub fn scale(&self, s: &Q) -> Self {
        let (lo, hi) = if s.is_negative() {
            (&self.hi * s, &self.lo * s)
        } else {
            (&self.lo * s, &self.hi * s)
        };
        let mut v = LogLinearValue {
            c0: &self.c0 * s,
            terms: self.terms.iter().map(|(c, r)| (c * s, r.clone())).collect(),
            base: self.base,
            lo,
            hi,
            exact: self.exact,
        };
        v.simplify();
        v
    }

    /// Sum of two values over the same base.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.base, other.base, "log-linear values over different bases");
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        let mut v = LogLinearValue {
            c0: &self.c0 + &other.c0,
            terms,
            base: self.base,
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
            exact: self.exact && other.exact,
        };
        v.simplify();
        v
    }

    pub fn to_json(&self) -> Value {
        json!({
            "c0": fmt_q(&self.c0),
            "terms": self.terms.iter().map(|(c, r)| json!([fmt_q(c), fmt_q(r)])).collect::<Vec<_>>(),
            "base": self.base,
            "enclosure": [fmt_q(&self.lo), fmt_q(&self.hi)],
            "exact": self.exact,
        })
    }
}

impl fmt::Display for LogLinearValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.as_rational() {
            return write!(f, "{}", fmt_q(&v));
        }
        let mut parts = Vec::new();
        if !self.c0.is_zero() {
            parts.push(fmt_q(&self.c0));
        }
        for (c, r) in &self.terms {
            if c.is_one() {
                parts.push(format!("ln({})", fmt_q(r)));
            } else {
                parts.push(format!("{}*ln({})", fmt_q(c), fmt_q(r)));
            }
        }
        let body = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
        let approx = if self.exact { "=" } else { "in" };
        write!(
            f,
            "({body})/ln({}) {approx} [{:.12}, {:.12}]",
            self.base,
            to_f64(&self.lo),
            to_f64(&self.hi)
        )
    }
}

/// `e` with `r = k^e`, for integer `e`.
fn power_of(r: &Q, k: &Q) -> Option<i64> {
    let (mut x, sign) = if *r >= Q::one() { (r.clone(), 1) } else { (r.recip(), -1) };
    let mut e = 0i64;
    while x > Q::one() {
        let y = &x / k;
        if y < Q::one() {
            return None;
        }
        x = y;
        e += 1;
    }
    (x.is_one()).then_some(sign * e)
}

/// Natural log of a positive rational, robust to huge numerators.
pub fn ln_q(r: &Q) -> f64 {
    let n = r.numer().bits();
    let d = r.denom().bits();
    if n < 1000 && d < 1000 {
        let x = to_f64(r);
        if x.is_finite() && x > 0.0 {
            return x.ln();
        }
    }
    ln_big(r.numer()) - ln_big(r.denom())
}

fn ln_big(x: &num_bigint::BigInt) -> f64 {
    use num_traits::ToPrimitive;
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().expect("small").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64 bits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
