//! Exact densities: eigenvector densities of primitive automata, limit
//! frequencies of arbitrary automata, interval limits `d_{i,q}` and
//! logarithmic densities of append-closed index sets.

mod loglinear;

pub use loglinear::{ln_q, LogLinearValue};

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use crate::dfao::{product_tuples, Dfao};
use crate::error::{Error, Result};
use crate::rational::{from_f64, qu, to_f64, MatrixQ, Q};
use crate::structure::{generators_infinite, pending_states, Decomposition};

/// Output symbol to exact density.
pub type DensityTable = BTreeMap<String, Q>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateDensity {
    pub states: Vec<Q>,
    pub outputs: DensityTable,
}

/// Incidence matrix of `a` as a rational matrix (column `j` counts the
/// digits leaving state `j`).
pub fn incidence_q(a: &Dfao) -> MatrixQ {
    let m = a.incidence();
    MatrixQ::from_rows(m.iter().map(|r| r.iter().map(|&x| qu(x)).collect()).collect())
}

/// Densities of a primitive automaton from the positive normalized right
/// eigenvector of its incidence matrix for the eigenvalue `k`.
pub fn primitive_density(b: &Dfao) -> Result<StateDensity> {
    if !crate::structure::is_primitive(b) {
        return Err(Error::NotPrimitive("not strongly connected with a loop".into()));
    }
    let n = b.len();
    let k = qu(b.base() as u64);
    let m = incidence_q(b).sub(&MatrixQ::identity(n).scale(&k));
    let ker = m.kernel();
    if ker.len() != 1 {
        return Err(Error::NotPrimitive(format!("eigenspace of dimension {}", ker.len())));
    }
    let v = &ker[0];
    let total: Q = v.iter().sum();
    let v: Vec<Q> = v.iter().map(|x| x / &total).collect();
    if v.iter().any(|x| !x.is_positive()) {
        return Err(Error::NotPrimitive("eigenvector not strictly positive".into()));
    }
    let outputs = aggregate(b, &v);
    Ok(StateDensity { states: v, outputs })
}

/// Sums state weights by output symbol.
pub fn aggregate(a: &Dfao, weights: &[Q]) -> DensityTable {
    let mut t = DensityTable::new();
    for (q, w) in weights.iter().enumerate() {
        *t.entry(a.output(q).to_string()).or_insert_with(Q::zero) += w;
    }
    t
}

/// Projection onto `ker(B - I)` along `im(B - I)` for `B = incidence / k`.
pub fn limit_projection(a: &Dfao) -> Result<MatrixQ> {
    let n = a.len();
    let b = incidence_q(a).scale(&(Q::one() / qu(a.base() as u64)));
    let id = MatrixQ::identity(n);
    let right = b.sub(&id).kernel();
    let left = b.transpose().sub(&id).kernel();
    if right.len() != left.len() || right.is_empty() {
        return Err(Error::Invariant("eigenvalue 1 is not semisimple".into()));
    }
    let r = right.len();
    let mut v = MatrixQ::zeros(n, r);
    let mut w = MatrixQ::zeros(n, r);
    for j in 0..r {
        for i in 0..n {
            v[(i, j)] = right[j][i].clone();
            w[(i, j)] = left[j][i].clone();
        }
    }
    let gram = w.transpose().mul(&v);
    let inv = gram
        .inverse()
        .ok_or_else(|| Error::Invariant("kernel and image of B - I intersect".into()))?;
    Ok(v.mul(&inv).mul(&w.transpose()))
}

/// Mean state frequencies `P e_{q0}`: the density of each state among the
/// words of length `l`, averaged over `l`. For prolongable automata this is
/// the natural density of the state whenever that exists.
pub fn state_frequencies(a: &Dfao) -> Result<Vec<Q>> {
    let p = limit_projection(a)?;
    Ok(p.col_vec(a.initial()))
}

pub fn output_frequencies(a: &Dfao) -> Result<DensityTable> {
    Ok(aggregate(a, &state_frequencies(a)?))
}

/// The interval limits `d_{i,q}` on the product of all component indicators.
#[derive(Clone, Debug)]
pub struct DensityLimits {
    /// Product automaton; output of a state is the list of indicator bits.
    pub automaton: Dfao,
    /// `d[i][q]` for component `i` and product state `q`.
    pub d: Vec<Vec<Q>>,
    pub projection: MatrixQ,
}

pub fn state_density_limits(dec: &Decomposition) -> Result<DensityLimits> {
    let parts: Vec<&Dfao> = dec.components.iter().map(|c| &c.indicator).collect();
    if parts.is_empty() {
        return Err(Error::Invariant("decomposition without components".into()));
    }
    let (prod, tuples) = product_tuples(&parts)?;
    let outs = tuples
        .iter()
        .map(|t| {
            t.iter()
                .zip(&parts)
                .map(|(&q, p)| p.output(q))
                .collect::<Vec<_>>()
                .join("")
        })
        .collect();
    let prod = prod.with_outputs(outs);
    let p = limit_projection(&prod)?;
    let n = prod.len();
    let mut d = Vec::with_capacity(parts.len());
    for (i, part) in parts.iter().enumerate() {
        let v: Vec<Q> = tuples
            .iter()
            .map(|t| if part.output(t[i]) == "1" { Q::one() } else { Q::zero() })
            .collect();
        let row: Vec<Q> = (0..n)
            .map(|q| {
                v.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(s, _)| p[(s, q)].clone())
                    .sum()
            })
            .collect();
        d.push(row);
    }
    for q in 0..n {
        let s: Q = d.iter().map(|row| row[q].clone()).sum();
        if !s.is_one() {
            return Err(Error::Invariant(format!(
                "interval limits at state {} sum to {s}",
                prod.name(q)
            )));
        }
    }
    Ok(DensityLimits {
        automaton: prod,
        d,
        projection: p,
    })
}

/// Default enclosure width for logarithmic densities.
pub fn default_epsilon() -> Q {
    Q::new(1.into(), BigUint::from(1u64 << 30).into())
}

/// Logarithmic density of an append-closed index set given by its indicator
/// automaton: `(1 / ln k) sum_{m in S} ln(1 + 1/m)` over the generators `S`.
///
/// Exact when `S` is finite. Otherwise generators below a threshold are kept
/// symbolically and the rest of the sum is enclosed through the moments of
/// the limit measures of the states.
pub fn logdensity_set(ind: &Dfao, eps: &Q) -> Result<LogLinearValue> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("enclosure width must be positive".into()));
    }
    let k = ind.base();
    if ind.output(ind.initial()) == "1" {
        return Ok(LogLinearValue::rational(Q::one(), k));
    }
    if !generators_infinite(ind) {
        let mut level = Level::start(ind);
        let mut product = Q::one();
        while !level.frontier.is_empty() {
            product *= level.factor();
            level = level.next(ind)?;
        }
        product *= level.factor();
        return Ok(LogLinearValue::symbolic(Q::zero(), vec![(Q::one(), product)], k));
    }
    let mut threshold = 64u128;
    loop {
        let v = moment_enclosure(ind, eps, threshold)?;
        if &v.width() <= eps || threshold > 1 << 24 {
            return Ok(v);
        }
        threshold *= ind.base() as u128;
    }
}

/// Moments `mu[n][q]` of the limit measure of each state on `[0, 1)`: the
/// mass of the cylinder of a word `w` read from `q` is `k^-|w|` times the
/// density of the set below `delta(q, w)`.
pub fn set_moments(ind: &Dfao, order: usize) -> Result<Vec<Vec<Q>>> {
    let n = ind.len();
    let k = ind.base();
    let p = limit_projection(ind)?;
    let mu0: Vec<Q> = (0..n)
        .map(|q| (0..n).filter(|&r| ind.output(r) == "1").map(|r| p[(r, q)].clone()).sum())
        .collect();
    let mut mu = vec![mu0];
    for m in 1..=order {
        let scale = Q::one() / qu(k as u64).pow(m as i32 + 1);
        let mut a = MatrixQ::identity(n);
        let mut rhs = vec![Q::zero(); n];
        for q in 0..n {
            for c in 0..k {
                let t = ind.next(q, c);
                a[(q, t)] = &a[(q, t)] - &scale;
                let mut binom = Q::one();
                for i in 0..m {
                    // binom = C(m, i)
                    let cpow = qu(c as u64).pow((m - i) as i32);
                    rhs[q] += &scale * &binom * cpow * &mu[i][t];
                    binom = binom * qu((m - i) as u64) / qu(i as u64 + 1);
                }
            }
        }
        let sol = a
            .solve(&rhs)
            .ok_or_else(|| Error::Invariant("singular moment system".into()))?;
        mu.push(sol);
    }
    Ok(mu)
}

/// `sum_{m in S} ln(1 + 1/m) = sum_c J_{delta(q0,c)}(c)` with
/// `J_q(a) = int dnu_q(t) / (a + t)`. Prefixes below `threshold` are expanded
/// digit by digit, generators among them kept symbolically; the remaining
/// `J_q(a)` are alternating series in the moments, bracketed by consecutive
/// partial sums.
fn moment_enclosure(ind: &Dfao, eps: &Q, threshold: u128) -> Result<LogLinearValue> {
    let k = ind.base();
    let budget_scale = eps / qu(8);
    let first = 1.0 / threshold as f64;
    // enough terms that the first omitted term is below eps / (8 a)
    let order = ((to_f64(eps) / 8.0).ln() / first.ln()).ceil().max(1.0) as usize + 2;
    let mu = set_moments(ind, order)?;
    let mut product = Q::one();
    let (mut lo, mut hi) = (Q::zero(), Q::zero());
    let mut stack: Vec<(usize, u128)> = (1..k).map(|c| (ind.next(ind.initial(), c), c as u128)).collect();
    while let Some((q, a)) = stack.pop() {
        if mu[0][q].is_zero() {
            continue;
        }
        if a < threshold {
            if ind.output(q) == "1" {
                product *= Q::new((a + 1).into(), a.into());
            } else {
                for c in 0..k {
                    stack.push((ind.next(q, c), a * k as u128 + c as u128));
                }
            }
            continue;
        }
        let aq = Q::from_integer(a.into());
        let budget = &budget_scale / &aq;
        let mut partial = Q::zero();
        let mut pw = aq.clone();
        let mut n = 0;
        loop {
            let t = &mu[n][q] / &pw;
            if n % 2 == 0 {
                partial += &t;
            } else {
                partial -= &t;
            }
            n += 1;
            if n >= order || t <= budget {
                // the next partial sum lies on the other side of the value
                let t_next = &mu[n.min(order)][q] / (&pw * &aq);
                let other = if n % 2 == 0 { &partial + &t_next } else { &partial - &t_next };
                let (a1, b1) = if partial <= other { (partial.clone(), other) } else { (other, partial.clone()) };
                lo += dyadic(&a1, false);
                hi += dyadic(&b1, true);
                break;
            }
            pw *= &aq;
        }
    }
    let partial = LogLinearValue::symbolic(lo.clone(), vec![(Q::one(), product)], k);
    let inv_ln_k = from_f64((1.0 / (k as f64).ln()) * (1.0 + 1e-12));
    Ok(LogLinearValue::enclosed(partial, (hi - lo) * inv_ln_k))
}

/// Rounds outward to a multiple of `2^-96`.
fn dyadic(x: &Q, up: bool) -> Q {
    use num_bigint::BigInt;
    let den: BigInt = BigInt::one() << 96usize;
    let scaled = x * Q::from_integer(den.clone());
    let r = if up { scaled.ceil() } else { scaled.floor() };
    Q::new(r.to_integer(), den)
}

/// The enclosure obtained by stopping at generators of at most `depth` digits.
pub fn logdensity_set_at_depth(ind: &Dfao, depth: usize) -> Result<LogLinearValue> {
    let k = ind.base();
    if ind.output(ind.initial()) == "1" {
        return Ok(LogLinearValue::rational(Q::one(), k));
    }
    let mut level = Level::start(ind);
    let mut product = level.factor();
    while level.depth < depth.max(1) {
        level = level.next(ind)?;
        product *= level.factor();
    }
    Ok(enclosure_at(ind, &product, &level))
}

fn enclosure_at(ind: &Dfao, product: &Q, level: &Level) -> LogLinearValue {
    let k = ind.base();
    let partial = LogLinearValue::symbolic(Q::zero(), vec![(Q::one(), product.clone())], k);
    if level.frontier.is_empty() {
        return partial;
    }
    // each pending word of `depth` digits is an integer m >= k^(depth-1) whose
    // cylinder weighs at most ln(1 + 1/m)/ln k <= 1/(m ln k)
    let inv_ln_k = from_f64((1.0 / (k as f64).ln()) * (1.0 + 1e-12));
    let kpow = qu(k as u64).pow((level.depth - 1) as i32);
    let tail = qu(level.frontier.len() as u64) / kpow * inv_ln_k;
    LogLinearValue::enclosed(partial, tail)
}

/// Canonical words of one length whose prefixes all avoid the set, kept only
/// while the set is still reachable.
struct Level {
    depth: usize,
    frontier: Vec<(usize, u128)>,
    generators: Vec<u128>,
    pending: Vec<bool>,
}

impl Level {
    fn start(ind: &Dfao) -> Level {
        let pending = pending_states(ind);
        let mut lvl = Level {
            depth: 1,
            frontier: Vec::new(),
            generators: Vec::new(),
            pending,
        };
        for d in 1..ind.base() {
            lvl.push(ind, ind.next(ind.initial(), d), d as u128);
        }
        lvl
    }

    fn push(&mut self, ind: &Dfao, q: usize, n: u128) {
        if ind.output(q) == "1" {
            self.generators.push(n);
        } else if self.pending[q] {
            self.frontier.push((q, n));
        }
    }

    fn next(self, ind: &Dfao) -> Result<Level> {
        let k = ind.base() as u128;
        let mut lvl = Level {
            depth: self.depth + 1,
            frontier: Vec::new(),
            generators: Vec::new(),
            pending: self.pending,
        };
        for (q, n) in self.frontier {
            let base = n.checked_mul(k).ok_or(Error::Overflow(n as u64))?;
            for d in 0..ind.base() {
                lvl.push(ind, ind.next(q, d), base + d as u128);
            }
        }
        Ok(lvl)
    }

    /// Product of `(m+1)/m` over the generators of this length.
    fn factor(&self) -> Q {
        self.generators
            .iter()
            .map(|&m| Q::new((m + 1).into(), m.into()))
            .fold(Q::one(), |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::rational::{q, to_f64};
    use crate::structure::decompose;

    #[test]
    fn paperfolding_eigenvector() {
        let d = primitive_density(&corpus::paperfolding()).unwrap();
        assert_eq!(d.states, vec![q(1, 4); 4]);
        assert_eq!(d.outputs["0"], q(1, 2));
        assert_eq!(d.outputs["1"], q(1, 2));
    }

    #[test]
    fn thue_morse_and_constant() {
        let d = primitive_density(&corpus::thue_morse()).unwrap();
        assert_eq!(d.states, vec![q(1, 2), q(1, 2)]);
        let c = primitive_density(&corpus::constant(5, "x")).unwrap();
        assert_eq!(c.states, vec![q(1, 1)]);
    }

    #[test]
    fn non_primitive_rejected() {
        assert!(matches!(
            primitive_density(&corpus::three_state()),
            Err(Error::NotPrimitive(_))
        ));
    }

    #[test]
    fn frequencies_of_three_state() {
        let f = output_frequencies(&corpus::three_state()).unwrap();
        assert_eq!(f["b"], q(1, 2));
        assert_eq!(f["c"], q(1, 2));
        assert_eq!(f.get("a").cloned().unwrap_or_default(), Q::zero());
    }

    #[test]
    fn compression_projection_densities() {
        let c = corpus::paperfolding().compress_ap(2).unwrap();
        let f = state_frequencies(&c.dfao).unwrap();
        assert!(f.iter().all(|x| *x == q(1, 4)));
        let p1 = c.projection(1).unwrap();
        let t = output_frequencies(&p1).unwrap();
        assert_eq!(t["0"], q(1, 2));
        assert_eq!(t["1"], q(1, 2));
    }

    #[test]
    fn density_limits_three_state() {
        let dec = decompose(&corpus::three_state()).unwrap();
        let lim = state_density_limits(&dec).unwrap();
        let a = &lim.automaton;
        let q0 = a.initial();
        assert_eq!(lim.d[0][q0], q(1, 2));
        assert_eq!(lim.d[1][q0], q(1, 2));
        let s1 = a.next(q0, 1);
        assert_eq!(lim.d[0][s1], q(1, 1));
        assert_eq!(lim.d[1][s1], q(0, 1));
    }

    #[test]
    fn density_limits_paperfolding() {
        let dec = decompose(&corpus::paperfolding()).unwrap();
        let lim = state_density_limits(&dec).unwrap();
        assert!(lim.d[0].iter().all(|x| x.is_one()));
    }

    #[test]
    fn logdensity_examples() {
        let dec = decompose(&corpus::three_state()).unwrap();
        let v = logdensity_set(&dec.components[0].indicator, &default_epsilon()).unwrap();
        assert!(v.exact);
        assert_eq!(v.terms, vec![(q(1, 1), q(2, 1))]);
        let w = logdensity_set(&dec.components[1].indicator, &default_epsilon()).unwrap();
        assert_eq!(v.add(&w).as_rational(), Some(q(1, 1)));

        let all = Dfao::from_fn(4, &["s", "in"], 0, |q, d| if q == 1 || d != 0 { 1 } else { 0 }, &["0", "1"])
            .unwrap();
        let v = logdensity_set(&all, &default_epsilon()).unwrap();
        assert_eq!(v.as_rational(), Some(q(1, 1)));
    }

    #[test]
    fn logdensity_infinite_generators() {
        let dec = decompose(&corpus::one_zeros_one()).unwrap();
        let eps = q(1, 1_000_000_000);
        let v = logdensity_set(&dec.components[1].indicator, &eps).unwrap();
        assert!(!v.exact);
        assert!(v.width() <= eps);
        let direct: f64 = (1..200).map(|l| (1.0 + 1.0 / (3f64.powi(l) + 1.0)).ln()).sum::<f64>() / 3f64.ln();
        assert!(v.contains(direct), "{v} vs {direct}");
        assert!(to_f64(&v.lo) > 0.0);
    }

    #[test]
    fn depth_enclosures_contain_brute_force() {
        let dec = decompose(&corpus::one_zeros_one()).unwrap();
        let ind = &dec.components[1].indicator;
        // S elements below 3^12
        let brute: f64 = (1..=12).map(|l| (1.0 + 1.0 / (3f64.powi(l) + 1.0)).ln()).sum::<f64>() / 3f64.ln();
        let v = logdensity_set_at_depth(ind, 12).unwrap();
        assert!(v.contains(brute));
    }

    #[test]
    fn moments_of_full_and_empty_states() {
        let all = Dfao::from_fn(2, &["s", "in", "out"], 0, |q, d| if q == 0 { [0, 1][d as usize] } else { q }, &["0", "1", "0"])
            .unwrap();
        let mu = set_moments(&all, 4).unwrap();
        for n in 0..=4 {
            assert_eq!(mu[n][1], q(1, n as i64 + 1));
            assert_eq!(mu[n][2], Q::zero());
        }
    }

    #[test]
    fn moment_enclosure_agrees_with_depth_enclosure() {
        // synchronizing primitive automaton whose merge set has many generators
        let a = crate::parse_dfao(
            "base 3\nstates s0 s1 s2\ninitial s0\noutput s0=0 s1=0 s2=2\n\
             delta s0 0 s0\ndelta s0 1 s1\ndelta s0 2 s0\ndelta s1 0 s2\ndelta s1 1 s1\n\
             delta s1 2 s0\ndelta s2 0 s2\ndelta s2 1 s1\ndelta s2 2 s2\n",
        )
        .unwrap();
        let dec = decompose(&a).unwrap();
        for c in &dec.components {
            let v = logdensity_set(&c.indicator, &default_epsilon()).unwrap();
            assert!(v.width() <= default_epsilon());
            let d = logdensity_set_at_depth(&c.indicator, 9).unwrap();
            assert!(v.lo <= d.hi && d.lo <= v.hi, "{v} vs {d}");
        }
    }
}
