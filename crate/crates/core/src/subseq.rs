//! Densities along primes, squares and coprime residue classes, and their
//! transfer to logarithmic densities of general automatic sequences.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::density::{default_epsilon, logdensity_set, output_frequencies, state_frequencies, DensityTable, LogLinearValue};
use crate::dfao::Dfao;
use crate::error::{Error, Result};
use crate::mullner::{mullner_decompose, MullnerData};
use crate::rational::{factorize, fmt_q, gcd_u64, lcm_u64, prime_power, qu, Q};
use crate::structure::decompose;

/// The subsequence `(n_l)` along which densities are taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Along {
    Naturals,
    Primes,
    Squares,
    /// Integers coprime to the modulus.
    Coprime(u64),
}

impl Along {
    /// Regular-variation index of `n_l`.
    pub fn beta(&self) -> u32 {
        match self {
            Along::Squares => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Along {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Along::Naturals => write!(f, "naturals"),
            Along::Primes => write!(f, "primes"),
            Along::Squares => write!(f, "squares"),
            Along::Coprime(m) => write!(f, "coprime={m}"),
        }
    }
}

impl FromStr for Along {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naturals" => Ok(Along::Naturals),
            "primes" => Ok(Along::Primes),
            "squares" => Ok(Along::Squares),
            _ => {
                let m = s
                    .strip_prefix("coprime=")
                    .and_then(|m| m.parse::<u64>().ok())
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown subsequence {s:?}")))?;
                Ok(Along::Coprime(m))
            }
        }
    }
}

/// Proportion of residues `x mod h` with `x^2 = m mod h`.
pub fn qr_count(m: u64, h: u64) -> Q {
    assert!(h >= 1, "modulus must be positive");
    let mut count: u64 = 1;
    for (p, e) in factorize(h) {
        count *= sqrt_count_prime_power(m, p, e);
    }
    Q::new(count.into(), h.into())
}

fn sqrt_count_prime_power(m: u64, p: u64, e: u32) -> u64 {
    let pe = p.pow(e);
    let m = m % pe;
    if m == 0 {
        return p.pow(e / 2);
    }
    let mut v = 0;
    let mut x = m;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    // from this level on the number of roots no longer changes
    let stable = if p == 2 { v + 3 } else { v + 1 };
    let level = e.min(stable);
    let h = p.pow(level);
    let target = m % h;
    (0..h).filter(|&x| ((x as u128 * x as u128) % h as u128) as u64 == target).count() as u64
}

/// `lim (1/N) #{n < N : b(M n + r) = alpha}` averaged over `r` in `residues`.
pub fn ap_average_density(b: &Dfao, modulus: u64, residues: &[u64]) -> Result<DensityTable> {
    if residues.is_empty() {
        return Err(Error::InvalidArgument("empty residue set".into()));
    }
    let comp = b.compress_ap(modulus as usize)?;
    let freq = state_frequencies(&comp.dfao)?;
    let mut t = DensityTable::new();
    for sym in b.alphabet() {
        t.insert(sym, Q::zero());
    }
    let share = Q::one() / qu(residues.len() as u64);
    for &r in residues {
        for (s, w) in freq.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let sym = comp.source.output(comp.tuples[s][r as usize]);
            *t.entry(sym.to_string()).or_insert_with(Q::zero) += w * &share;
        }
    }
    Ok(t)
}

/// Density of the primitive automaton `b` along the primes.
pub fn prime_density(b: &Dfao) -> Result<DensityTable> {
    let md = mullner_decompose(b)?;
    let m = b.base() as u64 * md.d;
    let residues: Vec<u64> = (0..m).filter(|&r| gcd_u64(r, m) == 1).collect();
    ap_average_density(b, m, &residues)
}

/// Density of the primitive automaton `b` along the integers coprime to `modulus`.
pub fn coprime_density(b: &Dfao, modulus: u64) -> Result<DensityTable> {
    if modulus == 0 {
        return Err(Error::InvalidArgument("modulus must be at least 1".into()));
    }
    let md = mullner_decompose(b)?;
    let m = lcm_u64(modulus, b.base() as u64 * md.d);
    let residues: Vec<u64> = (0..m).filter(|&r| gcd_u64(r, modulus) == 1).collect();
    ap_average_density(b, m, &residues)
}

/// Density along squares with the pieces it is assembled from.
#[derive(Clone, Debug)]
pub struct SquareDensity {
    pub outputs: DensityTable,
    /// `d(s(n^2) = S)` for each image set `S`, keyed by set name.
    pub s_part: DensityTable,
    /// `d(T(n^2) = g)`, indexed like the group of the decomposition.
    pub t_part: Vec<Q>,
    pub mullner: MullnerData,
}

/// Density of the primitive automaton `b` along the squares. The base must be
/// a prime power.
pub fn square_density(b: &Dfao) -> Result<SquareDensity> {
    let k = b.base() as u64;
    let (p, _) = prime_power(k).ok_or(Error::SquaresUnsupported(k))?;
    let md = mullner_decompose(b)?;
    let s = md.s.rebase_prime_power()?;
    let ds = state_frequencies(&s)?;
    let pq = qu(p);

    // distribution of the state after the last nonzero digit group of n^2
    let mut after = vec![Q::zero(); s.len()];
    if p == 2 {
        let w = Q::one() / qu(2);
        for (q1, d1) in ds.iter().enumerate() {
            let q2 = s.run(q1, &[0, 0, 1]);
            after[q2] += d1 * &w;
        }
    } else {
        let residues: Vec<u32> = {
            let mut r: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            r.sort_unstable();
            r.dedup();
            r.into_iter().map(|x| x as u32).collect()
        };
        let w = qu(2) / &pq;
        for (q1, d1) in ds.iter().enumerate() {
            for &m0 in &residues {
                after[s.next(q1, m0)] += d1 * &w;
            }
        }
    }
    // trailing zeros come in pairs; 0^{2mu} has weight p^{-mu}
    let mut states = vec![Q::zero(); s.len()];
    let inv_p = Q::one() / &pq;
    for (q2, w) in after.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let mut path = vec![q2];
        let mut cur = s.run(q2, &[0, 0]);
        while !path.contains(&cur) {
            path.push(cur);
            cur = s.run(cur, &[0, 0]);
        }
        let cycle_start = path.iter().position(|&x| x == cur).expect("cycle");
        let cycle_len = (path.len() - cycle_start) as i32;
        let geometric = Q::one() / (Q::one() - inv_p.pow(cycle_len));
        for (mu, &q) in path.iter().enumerate() {
            let mut weight = w * inv_p.pow(mu as i32);
            if mu >= cycle_start {
                weight *= &geometric;
            }
            states[q] += weight;
        }
    }
    // normalize against the initial digit distribution: sum must be 1
    let total: Q = states.iter().sum();
    if total != Q::one() {
        return Err(Error::Invariant(format!("square set density sums to {}", fmt_q(&total))));
    }
    let mut s_part = DensityTable::new();
    for name in md.s.names() {
        s_part.insert(name.clone(), Q::zero());
    }
    for (q, w) in states.iter().enumerate() {
        *s_part.get_mut(s.output(q)).expect("set name") += w;
    }

    let g_len = qu(md.group.len() as u64);
    let t_part: Vec<Q> = md
        .phi
        .iter()
        .map(|&j| qu(md.d) / &g_len * qr_count(j, md.d))
        .collect();

    let mut outputs = DensityTable::new();
    for sym in b.alphabet() {
        outputs.insert(sym, Q::zero());
    }
    for (si, name) in md.s.names().iter().enumerate() {
        let ws = &s_part[name];
        if ws.is_zero() {
            continue;
        }
        for (gi, g) in md.group.iter().enumerate() {
            *outputs.get_mut(md.f(si, g)).expect("symbol") += ws * &t_part[gi];
        }
    }
    Ok(SquareDensity {
        outputs,
        s_part,
        t_part,
        mullner: md,
    })
}

/// Density of a primitive automaton along `along`.
pub fn component_density(b: &Dfao, along: Along) -> Result<DensityTable> {
    match along {
        Along::Naturals => output_frequencies(b),
        Along::Primes => prime_density(b),
        Along::Squares => square_density(b).map(|s| s.outputs),
        Along::Coprime(m) => coprime_density(b, m),
    }
}

#[derive(Clone, Debug)]
pub struct ComponentReport {
    pub b: Dfao,
    pub least: Option<u128>,
    pub density: DensityTable,
    /// Logarithmic density of the component's index set.
    pub weight: LogLinearValue,
}

/// Logarithmic densities of a general automatic sequence along a subsequence.
#[derive(Clone, Debug)]
pub struct LogDensityReport {
    pub along: Along,
    pub values: BTreeMap<String, LogLinearValue>,
    pub components: Vec<ComponentReport>,
}

impl LogDensityReport {
    pub fn to_json(&self) -> Value {
        let values: Map<String, Value> = self.values.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        let comps: Vec<Value> = self
            .components
            .iter()
            .map(|c| {
                json!({
                    "least": c.least.map(|x| x.to_string()),
                    "density": table_json(&c.density),
                    "weight": c.weight.to_json(),
                })
            })
            .collect();
        json!({ "along": self.along.to_string(), "log_density": values, "components": comps })
    }
}

pub fn table_json(t: &DensityTable) -> Value {
    Value::Object(t.iter().map(|(k, v)| (k.clone(), Value::String(fmt_q(v)))).collect())
}

/// `sum_i d_log(M_i) d(b_i(n_l), alpha)` for every output symbol, with the
/// total enclosure width at most `eps`.
pub fn transfer_logdensity(a: &Dfao, along: Along, eps: &Q) -> Result<LogDensityReport> {
    let dec = decompose(a)?;
    let base = dec.base();
    let share = eps / qu(dec.components.len().max(1) as u64);
    let mut components = Vec::new();
    for c in &dec.components {
        let density = component_density(&c.b, along)?;
        let weight = logdensity_set(&c.indicator, &share)?;
        components.push(ComponentReport {
            b: c.b.clone(),
            least: c.least,
            density,
            weight,
        });
    }
    let mut values = BTreeMap::new();
    for sym in a.alphabet() {
        let mut v = LogLinearValue::zero(base);
        for c in &components {
            if let Some(x) = c.density.get(&sym) {
                if !x.is_zero() {
                    v = v.add(&c.weight.scale(x));
                }
            }
        }
        values.insert(sym, v);
    }
    Ok(LogDensityReport {
        along,
        values,
        components,
    })
}

pub fn transfer_logdensity_default(a: &Dfao, along: Along) -> Result<LogDensityReport> {
    transfer_logdensity(a, along, &default_epsilon())
}

/// Two components whose densities differ at `symbol`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub first: usize,
    pub second: usize,
    pub symbol: String,
    pub first_value: Q,
    pub second_value: Q,
}

#[derive(Clone, Debug)]
pub struct NaturalDensityReport {
    pub along: Along,
    pub exists: bool,
    pub values: Option<DensityTable>,
    pub witness: Option<Witness>,
    pub log: LogDensityReport,
}

impl NaturalDensityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "along": self.along.to_string(),
            "exists": self.exists,
            "density": self.values.as_ref().map(table_json),
            "witness": self.witness.as_ref().map(|w| json!({
                "components": [w.first, w.second],
                "symbol": w.symbol,
                "values": [fmt_q(&w.first_value), fmt_q(&w.second_value)],
            })),
            "log": self.log.to_json(),
        })
    }
}

/// The density along `along` exists exactly when all components agree.
pub fn natural_density_along(a: &Dfao, along: Along) -> Result<NaturalDensityReport> {
    let log = transfer_logdensity_default(a, along)?;
    let alphabet = a.alphabet();
    let get = |t: &DensityTable, s: &str| t.get(s).cloned().unwrap_or_else(Q::zero);
    let mut witness = None;
    'outer: for j in 1..log.components.len() {
        for sym in &alphabet {
            let x = get(&log.components[0].density, sym);
            let y = get(&log.components[j].density, sym);
            if x != y {
                witness = Some(Witness {
                    first: 0,
                    second: j,
                    symbol: sym.clone(),
                    first_value: x,
                    second_value: y,
                });
                break 'outer;
            }
        }
    }
    let values = if witness.is_none() {
        log.components.first().map(|c| alphabet.iter().map(|s| (s.clone(), get(&c.density, s))).collect())
    } else {
        None
    };
    Ok(NaturalDensityReport {
        along,
        exists: witness.is_none(),
        values,
        witness,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::rational::q;

    fn half_half(t: &DensityTable, a: &str, b: &str) -> bool {
        t[a] == q(1, 2) && t[b] == q(1, 2)
    }

    #[test]
    fn qr_examples() {
        assert_eq!(qr_count(1, 8), q(1, 2));
        assert_eq!(qr_count(1, 243), q(2, 243));
        assert_eq!(qr_count(0, 9), q(3, 9));
        assert_eq!(qr_count(2, 3), Q::zero());
    }

    #[test]
    fn along_parsing() {
        assert_eq!("coprime=10".parse::<Along>().unwrap(), Along::Coprime(10));
        assert!("coprime=0".parse::<Along>().is_err());
        assert_eq!(Along::Squares.to_string(), "squares");
    }

    #[test]
    fn paperfolding_primes_and_squares() {
        let pf = corpus::paperfolding();
        assert!(half_half(&prime_density(&pf).unwrap(), "0", "1"));
        let sq = square_density(&pf).unwrap();
        assert_eq!(sq.outputs["1"], Q::one());
        assert_eq!(sq.outputs["0"], Q::zero());
        assert_eq!(sq.s_part["{a}"], q(1, 2));
        assert_eq!(sq.s_part["{b}"], q(1, 2));
    }

    #[test]
    fn thue_morse_squares() {
        let sq = square_density(&corpus::thue_morse()).unwrap();
        assert!(half_half(&sq.outputs, "0", "1"));
    }

    #[test]
    fn squares_need_prime_power_base() {
        let err = square_density(&corpus::constant(6, "x")).unwrap_err();
        assert_eq!(err.to_string(), "squares unsupported for base 6");
    }

    #[test]
    fn empty_residues_rejected() {
        assert!(ap_average_density(&corpus::thue_morse(), 2, &[]).is_err());
    }

    #[test]
    fn three_state_along_primes() {
        let a = corpus::three_state();
        let r = natural_density_along(&a, Along::Primes).unwrap();
        assert!(!r.exists);
        let w = r.witness.unwrap();
        assert_eq!((w.first_value, w.second_value), (Q::one(), Q::zero()));
        let b = &r.log.values["b"];
        assert!(b.exact);
        assert_eq!(b.terms, vec![(Q::one(), qu(2))]);
        let nat = natural_density_along(&a, Along::Naturals).unwrap();
        assert!(nat.exists);
    }
}
