//! Exact upper and lower densities along subsequences with `beta = 1`.
//!
//! For `x = 0.c_1 c_2 ..` in base `K` the proportion of `n_l < x K^nu` with
//! `a(n_l) = alpha` tends to `N(x) / D(x)` where
//! `N(x) = sum_t K^{-t} n(q_{t-1}, c_t)`, `D(x) = sum_t c_t K^{-t}` and
//! `n(q, c) = sum_{c' < c} w(delta(q, c'))`. The upper density is the
//! supremum of `N / D`, found by Dinkelbach iteration with an exact
//! policy-iteration inner solver.

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::density::state_density_limits;
use crate::dfao::Dfao;
use crate::error::{Error, Result};
use crate::rational::{fmt_q, qu, MatrixQ, Q};
use crate::structure::decompose;
use crate::subseq::{component_density, Along};

#[derive(Clone, Debug)]
pub struct ExtremalProblem {
    pub along: Along,
    pub alpha: String,
    /// Product of the component indicators.
    pub automaton: Dfao,
    /// `w(q) = sum_i d_{i,q} dens_i(alpha)`.
    pub weights: Vec<Q>,
    /// `sum_i d_{i,q} (1 - dens_i(alpha))`.
    pub complement: Vec<Q>,
}

pub fn build_problem(a: &Dfao, along: Along, alpha: &str) -> Result<ExtremalProblem> {
    if along.beta() != 1 {
        return Err(Error::Precondition(format!(
            "extremal densities need a subsequence with beta = 1, not {along}"
        )));
    }
    let dec = decompose(a)?;
    let limits = state_density_limits(&dec)?;
    let dens: Vec<Q> = dec
        .components
        .iter()
        .map(|c| component_density(&c.b, along).map(|t| t.get(alpha).cloned().unwrap_or_else(Q::zero)))
        .collect::<Result<_>>()?;
    let n = limits.automaton.len();
    let mut weights = vec![Q::zero(); n];
    let mut complement = vec![Q::zero(); n];
    for (i, di) in limits.d.iter().enumerate() {
        for q in 0..n {
            weights[q] += &di[q] * &dens[i];
            complement[q] += &di[q] * (Q::one() - &dens[i]);
        }
    }
    Ok(ExtremalProblem {
        along,
        alpha: alpha.to_string(),
        automaton: limits.automaton,
        weights,
        complement,
    })
}

/// An eventually periodic digit string `0.pre (per)^inf` attaining a ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub preperiod: Vec<u32>,
    pub period: Vec<u32>,
    pub numerator: Q,
    pub denominator: Q,
    pub ratio: Q,
}

impl Certificate {
    pub fn digits_string(&self) -> String {
        let s = |v: &[u32]| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
        format!("0.[{}]([{}])", s(&self.preperiod), s(&self.period))
    }
}

#[derive(Clone, Debug)]
pub struct ExtremalSolution {
    pub value: Q,
    pub certificate: Certificate,
    /// Optimum of the inner problem at the final ratio; zero at optimality.
    pub inner_optimum: Q,
    pub iterations: usize,
}

impl ExtremalSolution {
    pub fn to_json(&self) -> Value {
        json!({
            "value": fmt_q(&self.value),
            "certificate": {
                "preperiod": self.certificate.preperiod,
                "period": self.certificate.period,
                "ratio": fmt_q(&self.certificate.ratio),
            },
            "inner_optimum": fmt_q(&self.inner_optimum),
            "iterations": self.iterations,
        })
    }
}

struct Inner<'a> {
    a: &'a Dfao,
    k: Q,
    /// `n(q, c)` at `q * K + c`.
    gain: Vec<Q>,
}

impl<'a> Inner<'a> {
    fn new(a: &'a Dfao, w: &[Q]) -> Self {
        let kk = a.base();
        let mut gain = Vec::with_capacity(a.len() * kk as usize);
        for q in 0..a.len() {
            let mut acc = Q::zero();
            for c in 0..kk {
                gain.push(acc.clone());
                acc += &w[a.next(q, c)];
            }
        }
        Inner { a, k: qu(kk as u64), gain }
    }

    fn n(&self, q: usize, c: u32) -> &Q {
        &self.gain[q * self.a.base() as usize + c as usize]
    }

    /// Solves `V = r + P V / K` for a fixed policy and reward.
    fn evaluate(&self, policy: &[u32], reward: impl Fn(usize, u32) -> Q) -> Vec<Q> {
        let n = self.a.len();
        let mut m = MatrixQ::identity(n);
        let inv = Q::one() / &self.k;
        let mut r = Vec::with_capacity(n);
        for q in 0..n {
            let t = self.a.next(q, policy[q]);
            m[(q, t)] = &m[(q, t)] - &inv;
            r.push(reward(q, policy[q]));
        }
        m.solve(&r).expect("I - P/K is invertible")
    }

    /// Policy iteration restricted to `allowed`; switches only on strict gains.
    fn improve(
        &self,
        mut policy: Vec<u32>,
        allowed: &dyn Fn(usize, u32) -> bool,
        reward: &dyn Fn(usize, u32) -> Q,
    ) -> (Vec<u32>, Vec<Q>) {
        loop {
            let v = self.evaluate(&policy, reward);
            let mut changed = false;
            for q in 0..self.a.len() {
                let val = |c: u32| reward(q, c) + &v[self.a.next(q, c)] / &self.k;
                let mut best = policy[q];
                let mut best_val = val(best);
                for c in 0..self.a.base() {
                    if !allowed(q, c) {
                        continue;
                    }
                    let x = val(c);
                    if x > best_val {
                        best = c;
                        best_val = x;
                    }
                }
                if best != policy[q] {
                    policy[q] = best;
                    changed = true;
                }
            }
            if !changed {
                return (policy, v);
            }
        }
    }

    /// Optimal `V` for `max N - theta D` and a canonical optimal policy.
    fn solve(&self, theta: &Q) -> (Vec<u32>, Vec<Q>) {
        let reward = |q: usize, c: u32| self.n(q, c) - theta * qu(c as u64);
        let start = vec![0u32; self.a.len()];
        let (policy, v) = self.improve(start, &|_, _| true, &reward);
        let q_val = |q: usize, c: u32| reward(q, c) + &v[self.a.next(q, c)] / &self.k;
        let optimal = |q: usize, c: u32| q_val(q, c) == v[q];
        // among optimal strings prefer the largest D, then the smallest digit
        let dreward = |_: usize, c: u32| qu(c as u64);
        let (policy, w) = self.improve(policy, &optimal, &dreward);
        let policy = (0..self.a.len())
            .map(|q| {
                let target = |c: u32| qu(c as u64) + &w[self.a.next(q, c)] / &self.k;
                (0..self.a.base())
                    .find(|&c| optimal(q, c) && target(c) == w[q])
                    .unwrap_or(policy[q])
            })
            .collect();
        (policy, v)
    }

    fn certificate(&self, policy: &[u32]) -> Certificate {
        let mut seen: Vec<usize> = Vec::new();
        let mut digits = Vec::new();
        let mut q = self.a.initial();
        while !seen.contains(&q) {
            seen.push(q);
            digits.push(policy[q]);
            q = self.a.next(q, policy[q]);
        }
        let start = seen.iter().position(|&x| x == q).expect("cycle");
        let inv = Q::one() / &self.k;
        let mut num = Q::zero();
        let mut den = Q::zero();
        let mut scale = inv.clone();
        let (mut num_cyc, mut den_cyc) = (Q::zero(), Q::zero());
        for (t, (&s, &c)) in seen.iter().zip(&digits).enumerate() {
            let dn = self.n(s, c) * &scale;
            let dd = qu(c as u64) * &scale;
            if t >= start {
                num_cyc += &dn;
                den_cyc += &dd;
            } else {
                num += dn;
                den += dd;
            }
            scale *= &inv;
        }
        let geo = Q::one() / (Q::one() - inv.pow((seen.len() - start) as i32));
        num += num_cyc * &geo;
        den += den_cyc * &geo;
        let ratio = if den.is_zero() { Q::zero() } else { &num / &den };
        Certificate {
            preperiod: digits[..start].to_vec(),
            period: digits[start..].to_vec(),
            numerator: num,
            denominator: den,
            ratio,
        }
    }
}

/// `sup_x N(x) / D(x)` for the weights `w` on the states of `a`.
pub fn maximize_ratio(a: &Dfao, w: &[Q]) -> Result<ExtremalSolution> {
    if a.next(a.initial(), 0) != a.initial() {
        return Err(Error::Precondition("digit 0 must fix the initial state".into()));
    }
    let inner = Inner::new(a, w);
    let mut theta = Q::zero();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (policy, v) = inner.solve(&theta);
        let f = v[a.initial()].clone();
        let cert = inner.certificate(&policy);
        if f.is_zero() {
            if cert.denominator.is_zero() || cert.ratio != theta {
                return Err(Error::Invariant("certificate does not attain the optimum".into()));
            }
            return Ok(ExtremalSolution {
                value: theta,
                certificate: cert,
                inner_optimum: f,
                iterations,
            });
        }
        if cert.ratio <= theta {
            return Err(Error::Invariant("Dinkelbach step did not increase the ratio".into()));
        }
        theta = cert.ratio;
    }
}

/// Checks in exact arithmetic that `V` with `V(q0) = 0` solves the Bellman
/// equation of `max N - theta D` at `theta = value`, and that the certificate
/// string attains `value`.
pub fn verify_solution(a: &Dfao, w: &[Q], sol: &ExtremalSolution) -> bool {
    let inner = Inner::new(a, w);
    let (policy, v) = inner.solve(&sol.value);
    let bellman = (0..a.len()).all(|q| {
        let best = (0..a.base())
            .map(|c| inner.n(q, c) - &sol.value * qu(c as u64) + &v[a.next(q, c)] / &inner.k)
            .max()
            .expect("nonempty");
        best == v[q]
    });
    let cert = inner.certificate(&policy);
    bellman && v[a.initial()].is_zero() && cert == sol.certificate && cert.ratio == sol.value
}

pub fn upper_density(p: &ExtremalProblem) -> Result<ExtremalSolution> {
    maximize_ratio(&p.automaton, &p.weights)
}

/// `1 - sup` of the complementary ratio; the certificate is the minimizing string.
pub fn lower_density(p: &ExtremalProblem) -> Result<ExtremalSolution> {
    let mut sol = maximize_ratio(&p.automaton, &p.complement)?;
    sol.value = Q::one() - sol.value;
    let c = &mut sol.certificate;
    c.numerator = &c.denominator - &c.numerator;
    c.ratio = Q::one() - &c.ratio;
    Ok(sol)
}
