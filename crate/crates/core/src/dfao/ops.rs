//! Closure constructions on DFAOs.

use std::collections::HashMap;

use super::{digits_fixed, tuple_symbol, Dfao};
use crate::error::{Error, Result};

/// Default cap on states explored by the larger constructions.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

impl Dfao {
    /// Moore partition refinement from the output classes, after dropping
    /// unreachable states. Each class keeps its first state (declaration
    /// order) as representative.
    pub fn minimize(&self) -> Dfao {
        let mut reach = self.reachable_from(self.initial);
        reach.sort_unstable();
        let sub = self
            .restrict(&reach, self.initial)
            .expect("reachable set is closed");
        let n = sub.len();
        let k = sub.base as usize;

        let mut class = number_by_first_occurrence(sub.output.iter());
        let mut count = class.iter().max().map_or(0, |m| m + 1);
        loop {
            let sigs: Vec<Vec<usize>> = (0..n)
                .map(|q| {
                    let mut s = Vec::with_capacity(k + 1);
                    s.push(class[q]);
                    s.extend((0..k).map(|d| class[sub.delta[q * k + d]]));
                    s
                })
                .collect();
            let next = number_by_first_occurrence(sigs.iter());
            let next_count = next.iter().max().map_or(0, |m| m + 1);
            class = next;
            if next_count == count {
                break;
            }
            count = next_count;
        }

        let mut rep = vec![usize::MAX; count];
        for q in 0..n {
            if rep[class[q]] == usize::MAX {
                rep[class[q]] = q;
            }
        }
        let mut delta = Vec::with_capacity(count * k);
        for &r in &rep {
            for d in 0..k {
                delta.push(class[sub.delta[r * k + d]]);
            }
        }
        Dfao {
            base: sub.base,
            names: rep.iter().map(|&r| sub.names[r].clone()).collect(),
            initial: class[sub.initial],
            delta,
            output: rep.iter().map(|&r| sub.output[r].clone()).collect(),
        }
    }

    /// Product automaton on reachable state pairs, outputs combined by
    /// `combine`.
    pub fn product(
        &self,
        other: &Dfao,
        combine: impl Fn(&str, &str) -> String,
    ) -> Result<Dfao> {
        product_many(&[self, other], |outs| combine(outs[0], outs[1]))
    }

    /// True when both automata produce the same sequence, decided on every
    /// reachable state pair (so also for words with leading zeros).
    pub fn equivalent(&self, other: &Dfao) -> Result<bool> {
        let p = self.product(other, |x, y| if x == y { "1".into() } else { "0".into() })?;
        Ok(p.output.iter().all(|o| o == "1"))
    }

    /// Same sequence, with an initial state fixed by digit 0.
    pub fn normalize_zero(&self) -> Dfao {
        if self.is_prolongable() {
            return self.clone();
        }
        let k = self.base as usize;
        let fresh = self.fresh_name(&format!("{}'", self.names[self.initial]));
        let n = self.len();
        let mut a = self.clone();
        a.names.push(fresh);
        a.output.push(self.output[self.initial].clone());
        for d in 0..k {
            a.delta.push(if d == 0 { n } else { self.delta[self.initial * k + d] });
        }
        a.initial = n;
        a
    }

    fn fresh_name(&self, stem: &str) -> String {
        let mut name = stem.to_string();
        while self.names.contains(&name) {
            name.push('\'');
        }
        name
    }

    /// Same automaton read in base `k^l`: digit `e` acts as its `l`-digit
    /// base-`k` word. Requires `delta(q0, 0) = q0`.
    pub fn power_base(&self, l: u32) -> Result<Dfao> {
        if l == 0 {
            return Err(Error::InvalidArgument("exponent must be at least 1".into()));
        }
        if !self.is_prolongable() {
            return Err(Error::Precondition(
                "power_base needs delta(q0, 0) = q0; apply normalize_zero first".into(),
            ));
        }
        if l == 1 {
            return Ok(self.clone());
        }
        let big = (self.base as u64)
            .checked_pow(l)
            .filter(|b| *b <= u32::MAX as u64 && b.saturating_mul(self.len() as u64) <= DEFAULT_STATE_BUDGET as u64 * 16)
            .ok_or(Error::BudgetExceeded(DEFAULT_STATE_BUDGET))? as u32;
        let mut delta = Vec::with_capacity(self.len() * big as usize);
        for q in 0..self.len() {
            for e in 0..big {
                delta.push(self.run(q, &digits_fixed(e as u128, self.base, l as usize)));
            }
        }
        Ok(Dfao {
            base: big,
            names: self.names.clone(),
            initial: self.initial,
            delta,
            output: self.output.clone(),
        })
    }

    /// The `m`-compression: the automaton of state tuples
    /// `(delta(q0,(mn)_k), .., delta(q0,(mn+m-1)_k))`, whose outputs are the
    /// tuples `(a(mn), .., a(mn+m-1))`.
    pub fn compress_ap(&self, m: usize) -> Result<Compression> {
        if m == 0 {
            return Err(Error::InvalidArgument("modulus must be at least 1".into()));
        }
        let a = self.normalize_zero();
        let k = a.base as usize;
        let start: Vec<usize> = (0..m).map(|r| a.state_of(r as u128)).collect();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut tuples = vec![start.clone()];
        index.insert(start, 0);
        let mut delta = Vec::new();
        let mut i = 0;
        while i < tuples.len() {
            let t = tuples[i].clone();
            i += 1;
            for j in 0..k {
                // position x = m*j + r of the word delta(t_0,0..k-1) delta(t_1,0..k-1) ..
                let next: Vec<usize> = (0..m)
                    .map(|r| {
                        let x = m * j + r;
                        a.next(t[x / k], (x % k) as u32)
                    })
                    .collect();
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if tuples.len() >= DEFAULT_STATE_BUDGET {
                            return Err(Error::BudgetExceeded(DEFAULT_STATE_BUDGET));
                        }
                        index.insert(next.clone(), tuples.len());
                        tuples.push(next);
                        tuples.len() - 1
                    }
                };
                delta.push(id);
            }
        }
        let names: Vec<String> = tuples
            .iter()
            .map(|t| {
                let parts: Vec<&str> = t.iter().map(|&q| a.names[q].as_str()).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        let output: Vec<String> = tuples
            .iter()
            .map(|t| {
                let parts: Vec<&str> = t.iter().map(|&q| a.output[q].as_str()).collect();
                tuple_symbol(&parts)
            })
            .collect();
        let dfao = Dfao {
            base: a.base,
            names,
            initial: 0,
            delta,
            output,
        };
        Ok(Compression {
            modulus: m,
            dfao,
            tuples,
            source: a,
        })
    }
}

/// Result of [`Dfao::compress_ap`].
#[derive(Clone, Debug)]
pub struct Compression {
    pub modulus: usize,
    /// Tuple-state automaton with tuple outputs.
    pub dfao: Dfao,
    /// State tuple (in `source`) behind each compression state.
    pub tuples: Vec<Vec<usize>>,
    /// Zero-normalized input automaton.
    pub source: Dfao,
}

impl Compression {
    /// Automaton for `n -> a(m*n + r)`.
    pub fn projection(&self, r: usize) -> Result<Dfao> {
        if r >= self.modulus {
            return Err(Error::InvalidArgument(format!(
                "residue {r} out of range for modulus {}",
                self.modulus
            )));
        }
        let outs = self
            .tuples
            .iter()
            .map(|t| self.source.output(t[r]).to_string())
            .collect();
        Ok(self.dfao.with_outputs(outs))
    }
}

/// Product of several automata over the same base, on reachable tuples.
pub fn product_many(parts: &[&Dfao], combine: impl Fn(&[&str]) -> String) -> Result<Dfao> {
    let Some(first) = parts.first() else {
        return Err(Error::InvalidArgument("empty product".into()));
    };
    let k = first.base;
    if let Some(p) = parts.iter().find(|p| p.base != k) {
        return Err(Error::BaseMismatch(k, p.base));
    }
    let start: Vec<usize> = parts.iter().map(|p| p.initial).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    index.insert(start.clone(), 0);
    let mut tuples = vec![start];
    let mut delta = Vec::new();
    let mut i = 0;
    while i < tuples.len() {
        let t = tuples[i].clone();
        i += 1;
        for d in 0..k {
            let next: Vec<usize> = t.iter().zip(parts).map(|(&q, p)| p.next(q, d)).collect();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if tuples.len() >= DEFAULT_STATE_BUDGET {
                        return Err(Error::BudgetExceeded(DEFAULT_STATE_BUDGET));
                    }
                    index.insert(next.clone(), tuples.len());
                    tuples.push(next);
                    tuples.len() - 1
                }
            };
            delta.push(id);
        }
    }
    let names = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t.iter().zip(parts).map(|(&q, p)| p.names[q].as_str()).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let output = tuples
        .iter()
        .map(|t| {
            let outs: Vec<&str> = t.iter().zip(parts).map(|(&q, p)| p.output[q].as_str()).collect();
            combine(&outs)
        })
        .collect();
    Ok(Dfao {
        base: k,
        names,
        initial: 0,
        delta,
        output,
    })
}

/// Like [`product_many`] but also returns the component tuple of each state.
pub fn product_tuples(parts: &[&Dfao]) -> Result<(Dfao, Vec<Vec<usize>>)> {
    let p = product_many(parts, |_| String::new())?;
    // Recover tuples by replaying BFS order.
    let mut tuples = vec![parts.iter().map(|d| d.initial).collect::<Vec<_>>()];
    let mut filled = vec![false; p.len()];
    filled[0] = true;
    tuples.resize(p.len(), Vec::new());
    let mut stack = vec![0usize];
    while let Some(s) = stack.pop() {
        for d in 0..p.base {
            let t = p.next(s, d);
            if !filled[t] {
                filled[t] = true;
                tuples[t] = tuples[s].iter().zip(parts).map(|(&q, a)| a.next(q, d)).collect();
                stack.push(t);
            }
        }
    }
    Ok((p, tuples))
}

fn number_by_first_occurrence<'a, T: std::hash::Hash + Eq + 'a>(
    items: impl Iterator<Item = &'a T>,
) -> Vec<usize> {
    let mut ids: HashMap<&T, usize> = HashMap::new();
    items
        .map(|it| {
            let next = ids.len();
            *ids.entry(it).or_insert(next)
        })
        .collect()
}
