use std::collections::HashMap;

use super::{Dfao, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::rational::prime_power;

/// State budget, overridable through `AUTODENS_STATE_BUDGET`.
pub fn state_budget() -> usize {
    std::env::var("AUTODENS_STATE_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_BUDGET)
}

impl Dfao {
    /// Converts a base `p^alpha` automaton into a minimal base `p` automaton
    /// producing the same sequence.
    ///
    /// The base-`p` reader does not know in advance how the digits group into
    /// blocks of `alpha`, so it keeps one run per possible fill level of the
    /// current partial block. Run `j` holds the state reached on the complete
    /// blocks seen so far plus the value of `j` buffered digits. At the end of
    /// the word the run with an empty buffer is the correctly aligned one.
    pub fn rebase_prime_power(&self) -> Result<Dfao> {
        self.rebase_prime_power_with_budget(state_budget())
    }

    pub fn rebase_prime_power_with_budget(&self, budget: usize) -> Result<Dfao> {
        let k = self.base as u64;
        let (p, alpha) = prime_power(k).ok_or(Error::NotPrimePower(k))?;
        if alpha == 1 {
            return Ok(self.clone());
        }
        let a = self.normalize_zero();
        let p = p as u32;
        let alpha = alpha as usize;

        // state: for each buffer length j, (state, buffered value)
        type Runs = Vec<(usize, u32)>;
        let start: Runs = vec![(a.initial, 0); alpha];
        let mut index: HashMap<Runs, usize> = HashMap::new();
        index.insert(start.clone(), 0);
        let mut states = vec![start];
        let mut delta = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let cur = states[i].clone();
            i += 1;
            for d in 0..p {
                let mut next: Runs = vec![(0, 0); alpha];
                for (j, &(q, buf)) in cur.iter().enumerate() {
                    let v = buf * p + d;
                    if j + 1 == alpha {
                        next[0] = (a.next(q, v), 0);
                    } else {
                        next[j + 1] = (q, v);
                    }
                }
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= budget {
                            return Err(Error::BudgetExceeded(budget));
                        }
                        index.insert(next.clone(), states.len());
                        states.push(next);
                        states.len() - 1
                    }
                };
                delta.push(id);
            }
        }
        let names = (0..states.len()).map(|s| format!("r{s}")).collect();
        let output = states.iter().map(|r| a.output[r[0].0].clone()).collect();
        let raw = Dfao::new(p, names, 0, delta, output)?;
        let min = raw.minimize();

        let back = min.power_base(alpha as u32)?;
        if !back.equivalent(&a)? {
            return Err(Error::Invariant("rebased automaton disagrees with its input".into()));
        }
        Ok(min)
    }
}

#[cfg(test)]
mod tests {
    use crate::corpus;
    use crate::error::Error;

    #[test]
    fn identity_for_prime_base() {
        let pf = corpus::paperfolding();
        assert_eq!(pf.rebase_prime_power().unwrap(), pf);
    }

    #[test]
    fn thue_morse_base_four_back_to_two() {
        let tm = corpus::thue_morse();
        let tm4 = tm.power_base(2).unwrap();
        let r = tm4.rebase_prime_power().unwrap();
        assert_eq!(r.base(), 2);
        assert_eq!(r.len(), 2);
        assert!(r.equivalent(&tm).unwrap());
    }

    #[test]
    fn parity_base_nine_to_three() {
        let r = corpus::parity_base9().rebase_prime_power().unwrap();
        assert_eq!(r.base(), 3);
        assert_eq!(r.len(), 2);
        assert!(r.equivalent(&corpus::parity_base3()).unwrap());
    }

    #[test]
    fn rejects_composite_base() {
        let a = corpus::constant(6, "x");
        assert_eq!(a.rebase_prime_power().unwrap_err(), Error::NotPrimePower(6));
    }

    #[test]
    fn budget_is_enforced() {
        let a = corpus::paperfolding().power_base(3).unwrap();
        assert_eq!(
            a.rebase_prime_power_with_budget(2).unwrap_err(),
            Error::BudgetExceeded(2)
        );
        assert!(a.rebase_prime_power().unwrap().equivalent(&corpus::paperfolding()).unwrap());
    }

    #[test]
    fn rebase_non_prolongable_input() {
        // base-4 automaton whose initial state moves on digit 0
        let s = corpus::sym3().normalize_zero().power_base(2).unwrap();
        let s4 = crate::dfao::Dfao::new(
            4,
            s.names().to_vec(),
            s.initial(),
            (0..s.len()).flat_map(|q| (0..4).map(move |d| (q, d))).map(|(q, d)| s.next(q, d)).collect(),
            s.outputs().to_vec(),
        )
        .unwrap();
        let r = s4.rebase_prime_power().unwrap();
        for n in 0..3000u128 {
            assert_eq!(r.evaluate(n), corpus::sym3().evaluate(n));
        }
    }
}
