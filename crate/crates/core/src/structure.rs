//! Strongly connected components, column numbers and the decomposition of an
//! automatic sequence into primitive prolongable pieces on automatic index
//! sets.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::Zero;
use petgraph::graph::DiGraph;

use crate::dfao::{product_many, Dfao};
use crate::error::{Error, Result};
use crate::rational::{lcm_u64, qu, MatrixQ};

#[derive(Clone, Debug)]
pub struct Scc {
    pub states: Vec<usize>,
    pub is_final: bool,
}

/// Image-set data of one final component.
#[derive(Clone, Debug)]
pub struct FinalComponent {
    pub states: Vec<usize>,
    pub column_number: usize,
    /// All minimal images `delta(F, w)`, in BFS discovery order.
    pub family: Vec<Vec<usize>>,
    pub minimizing_word: Vec<u32>,
    pub primitive: bool,
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    /// The automaton that was analyzed: zero-normalized, minimized and read in
    /// base `k^exponent`.
    pub automaton: Dfao,
    pub exponent: u32,
    pub sccs: Vec<Scc>,
    pub finals: Vec<FinalComponent>,
}

impl StructureReport {
    /// Minimal subshift components, one per final component, listed by the
    /// state names that carry them.
    pub fn minimal_components(&self) -> Vec<Vec<String>> {
        self.finals
            .iter()
            .map(|f| f.states.iter().map(|&q| self.automaton.name(q).to_string()).collect())
            .collect()
    }
}

/// Zero-normalizes and minimizes `a`, then passes to base `k^l` where `l` is
/// the lcm of the cycle lengths of `delta(., 0)`, so that every state lying on
/// a 0-cycle is fixed by 0.
pub fn prepare(a: &Dfao) -> Result<(Dfao, u32)> {
    let m = a.normalize_zero().minimize();
    let l = zero_cycle_lcm(&m);
    if l == 1 {
        return Ok((m, 1));
    }
    let l32 = u32::try_from(l).map_err(|_| Error::BudgetExceeded(crate::dfao::DEFAULT_STATE_BUDGET))?;
    Ok((m.power_base(l32)?.minimize(), l32))
}

fn zero_cycle_lcm(a: &Dfao) -> u64 {
    let n = a.len();
    let mut l = 1u64;
    let mut color = vec![0u8; n];
    for s in 0..n {
        if color[s] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut q = s;
        while color[q] == 0 {
            color[q] = 1;
            path.push(q);
            q = a.next(q, 0);
        }
        if color[q] == 1 {
            let pos = path.iter().position(|&x| x == q).expect("on path");
            l = lcm_u64(l, (path.len() - pos) as u64);
        }
        for p in path {
            color[p] = 2;
        }
    }
    l
}

/// SCCs in topological order of the condensation (sources first), each sorted.
pub fn sccs(a: &Dfao) -> Vec<Scc> {
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = (0..a.len()).map(|_| g.add_node(())).collect();
    for q in 0..a.len() {
        for d in 0..a.base() {
            g.add_edge(nodes[q], nodes[a.next(q, d)], ());
        }
    }
    let mut comps = petgraph::algo::tarjan_scc(&g);
    comps.reverse();
    let mut comp_of = vec![0usize; a.len()];
    for (i, c) in comps.iter().enumerate() {
        for n in c {
            comp_of[n.index()] = i;
        }
    }
    comps
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut states: Vec<usize> = c.iter().map(|n| n.index()).collect();
            states.sort_unstable();
            let is_final = states
                .iter()
                .all(|&q| (0..a.base()).all(|d| comp_of[a.next(q, d)] == i));
            Scc { states, is_final }
        })
        .collect()
}

/// Image sets of `from` under all words, breadth first. Returns the sets in
/// discovery order with the word that first produced each.
pub fn image_closure(a: &Dfao, from: &[usize]) -> Vec<(Vec<usize>, Vec<u32>)> {
    let mut start = from.to_vec();
    start.sort_unstable();
    start.dedup();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut out = vec![(start, Vec::new())];
    let mut i = 0;
    while i < out.len() {
        let (set, word) = out[i].clone();
        i += 1;
        for d in 0..a.base() {
            let mut img: Vec<usize> = set.iter().map(|&q| a.next(q, d)).collect();
            img.sort_unstable();
            img.dedup();
            if !seen.contains_key(&img) {
                seen.insert(img.clone(), out.len());
                let mut w = word.clone();
                w.push(d);
                out.push((img, w));
            }
        }
    }
    out
}

/// Column number, minimal image family and BFS-first minimizing word of `states`.
pub fn column_data(a: &Dfao, states: &[usize]) -> (usize, Vec<Vec<usize>>, Vec<u32>) {
    let closure = image_closure(a, states);
    let c = closure.iter().map(|(s, _)| s.len()).min().expect("nonempty");
    let word = closure
        .iter()
        .find(|(s, _)| s.len() == c)
        .map(|(_, w)| w.clone())
        .expect("minimum attained");
    let family = closure.into_iter().filter(|(s, _)| s.len() == c).map(|(s, _)| s).collect();
    (c, family, word)
}

/// Strongly connected with at least one self-loop.
pub fn is_primitive(a: &Dfao) -> bool {
    let comps = sccs(a);
    comps.len() == 1 && (0..a.len()).any(|q| (0..a.base()).any(|d| a.next(q, d) == q))
}

pub fn analyze(a: &Dfao) -> Result<StructureReport> {
    let (m, exponent) = prepare(a)?;
    Ok(analyze_prepared(m, exponent))
}

fn analyze_prepared(m: Dfao, exponent: u32) -> StructureReport {
    let sccs = sccs(&m);
    let finals = sccs
        .iter()
        .filter(|s| s.is_final)
        .map(|s| {
            let (c, family, word) = column_data(&m, &s.states);
            let primitive = s.states.iter().any(|&q| (0..m.base()).any(|d| m.next(q, d) == q));
            FinalComponent {
                states: s.states.clone(),
                column_number: c,
                family,
                minimizing_word: word,
                primitive,
            }
        })
        .collect();
    StructureReport {
        automaton: m,
        exponent,
        sccs,
        finals,
    }
}

/// One primitive piece `b` with the indicator of the index set where `a`
/// follows it.
#[derive(Clone, Debug)]
pub struct Component {
    /// Index into `StructureReport::finals`.
    pub final_index: usize,
    /// Initial state of `b` inside the analyzed automaton.
    pub anchor: usize,
    pub b: Dfao,
    /// Minimal automaton with outputs `0`/`1`.
    pub indicator: Dfao,
    /// Smallest member of the index set.
    pub least: Option<u128>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub report: StructureReport,
    pub components: Vec<Component>,
    /// Indicator of the integers outside every component index set.
    pub residual: Dfao,
}

impl Decomposition {
    pub fn automaton(&self) -> &Dfao {
        &self.report.automaton
    }

    pub fn base(&self) -> u32 {
        self.report.automaton.base()
    }
}

pub fn decompose(a: &Dfao) -> Result<Decomposition> {
    let report = analyze(a)?;
    let m = &report.automaton;
    let pure = m.pure();
    let mut components = Vec::new();
    for (fi, f) in report.finals.iter().enumerate() {
        let anchor_set = f
            .family
            .iter()
            .find(|s| s.iter().all(|&q| m.next(q, 0) == q))
            .ok_or_else(|| Error::Invariant("no 0-fixed minimal image in a final component".into()))?;
        for &q in anchor_set {
            let b = m.restrict(&f.states, q)?;
            let ind = product_many(&[&pure, &pure.with_initial(q)], |o| {
                if o[0] == o[1] { "1".into() } else { "0".into() }
            })?
            .minimize();
            let least = least_member(&ind);
            components.push(Component {
                final_index: fi,
                anchor: q,
                b,
                indicator: ind,
                least,
            });
        }
    }
    components.sort_by_key(|c| (c.least.is_none(), c.least));

    let parts: Vec<&Dfao> = components.iter().map(|c| &c.indicator).collect();
    let residual = if parts.is_empty() {
        Dfao::from_fn(m.base(), &["z"], 0, |_, _| 0, &["1"])?
    } else {
        product_many(&parts, |o| {
            if o.iter().all(|x| *x == "0") { "1".into() } else { "0".into() }
        })?
        .minimize()
    };

    let dec = Decomposition {
        report,
        components,
        residual,
    };
    check_decomposition(&dec)?;
    Ok(dec)
}

fn check_decomposition(d: &Decomposition) -> Result<()> {
    for c in &d.components {
        if !is_primitive(&c.b) || !c.b.is_prolongable() {
            return Err(Error::Invariant("component is not primitive and prolongable".into()));
        }
        if !is_append_closed(&c.indicator) {
            return Err(Error::Invariant("index set not closed under digit append".into()));
        }
    }
    for i in 0..d.components.len() {
        for j in i + 1..d.components.len() {
            let p = d.components[i]
                .indicator
                .product(&d.components[j].indicator, |x, y| format!("{x}{y}"))?;
            if p.outputs().iter().any(|o| o == "11") {
                return Err(Error::Invariant("component index sets overlap".into()));
            }
        }
    }
    if !residual_is_thin(&d.residual) {
        return Err(Error::Invariant("residual set is not thin".into()));
    }
    Ok(())
}

/// Every accepting state only leads to accepting states.
pub fn is_append_closed(ind: &Dfao) -> bool {
    (0..ind.len())
        .filter(|&q| ind.output(q) == "1")
        .all(|q| (0..ind.base()).all(|d| ind.output(ind.next(q, d)) == "1"))
}

/// Spectral radius of the transfer matrix on accepting states is below the
/// base. Decided exactly: for a nonnegative `A`, `rho(A) < k` iff `kI - A` is
/// invertible with a nonnegative inverse.
pub fn residual_is_thin(res: &Dfao) -> bool {
    let idx: Vec<usize> = (0..res.len()).filter(|&q| res.output(q) == "1").collect();
    if idx.is_empty() {
        return true;
    }
    let n = idx.len();
    let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut m = MatrixQ::identity(n).scale(&qu(res.base() as u64));
    for (j, &q) in idx.iter().enumerate() {
        for d in 0..res.base() {
            if let Some(&i) = pos.get(&res.next(q, d)) {
                m[(i, j)] -= qu(1);
            }
        }
    }
    m.inverse().is_some_and(|inv| inv.is_nonnegative())
}

/// Smallest `n` with `ind(n) = 1`, if any.
pub fn least_member(ind: &Dfao) -> Option<u128> {
    if ind.output(ind.initial()) == "1" {
        return Some(0);
    }
    let k = ind.base();
    let dist = distance_to_accept(ind);
    let len = (1..k)
        .filter_map(|d| dist[ind.next(ind.initial(), d)])
        .min()?
        + 1;
    let mut q = ind.initial();
    let mut n: u128 = 0;
    for pos in 0..len {
        let rem = len - pos - 1;
        let lo = if pos == 0 { 1 } else { 0 };
        let d = (lo..k).find(|&d| dist[ind.next(q, d)].is_some_and(|x| x <= rem))?;
        q = ind.next(q, d);
        n = n.checked_mul(k as u128)?.checked_add(d as u128)?;
    }
    Some(n)
}

fn distance_to_accept(ind: &Dfao) -> Vec<Option<usize>> {
    let n = ind.len();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..n {
        for d in 0..ind.base() {
            rev[ind.next(q, d)].push(q);
        }
    }
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    for q in 0..n {
        if ind.output(q) == "1" {
            dist[q] = Some(0);
            queue.push_back(q);
        }
    }
    while let Some(q) = queue.pop_front() {
        let dq = dist[q].expect("set");
        for &p in &rev[q] {
            if dist[p].is_none() {
                dist[p] = Some(dq + 1);
                queue.push_back(p);
            }
        }
    }
    dist
}

/// Generators of an append-closed index set: members with no strict digit
/// prefix in the set.
#[derive(Clone, Debug)]
pub struct GeneratorReport {
    pub base: u32,
    pub depth: usize,
    /// Members of `S` below `base^depth`, ascending.
    pub elements: Vec<u128>,
    /// `(length, #S of that length, #pending of that length)` for
    /// `length = 1..=depth`.
    pub counts: Vec<(usize, BigUint, BigUint)>,
    /// `S` is finite.
    pub finite: bool,
    /// The set is all of the naturals (`0` is a member).
    pub everything: bool,
}

/// States from which an accepting state can still be reached, excluding the
/// accepting states themselves.
pub fn pending_states(ind: &Dfao) -> Vec<bool> {
    let dist = distance_to_accept(ind);
    (0..ind.len())
        .map(|q| ind.output(q) != "1" && dist[q].is_some())
        .collect()
}

/// Per-length counts of generator words and pending words.
pub struct GeneratorCounter<'a> {
    ind: &'a Dfao,
    pending: Vec<bool>,
    /// Number of length-`len` pending words ending in each state.
    vec: Vec<BigUint>,
    len: usize,
}

impl<'a> GeneratorCounter<'a> {
    pub fn new(ind: &'a Dfao) -> Self {
        let pending = pending_states(ind);
        let vec = vec![BigUint::zero(); ind.len()];
        GeneratorCounter {
            ind,
            pending,
            vec,
            len: 0,
        }
    }

    /// Advances one digit; returns `(#S, #pending)` at the new length.
    pub fn step(&mut self) -> (BigUint, BigUint) {
        let ind = self.ind;
        let mut next = vec![BigUint::zero(); ind.len()];
        let mut s_count = BigUint::zero();
        let add = |q: usize, c: &BigUint, next: &mut Vec<BigUint>, s_count: &mut BigUint| {
            if ind.output(q) == "1" {
                *s_count += c;
            } else if self.pending[q] {
                next[q] += c;
            }
        };
        let one = BigUint::from(1u32);
        if self.len == 0 {
            for d in 1..ind.base() {
                add(ind.next(ind.initial(), d), &one, &mut next, &mut s_count);
            }
        } else {
            for q in 0..ind.len() {
                if self.vec[q].is_zero() {
                    continue;
                }
                let c = self.vec[q].clone();
                for d in 0..ind.base() {
                    add(ind.next(q, d), &c, &mut next, &mut s_count);
                }
            }
        }
        self.vec = next;
        self.len += 1;
        let pend = self.vec.iter().sum();
        (s_count, pend)
    }
}

/// True when some cycle runs through pending states reachable by canonical words.
pub fn generators_infinite(ind: &Dfao) -> bool {
    if ind.output(ind.initial()) == "1" {
        return false;
    }
    let pending = pending_states(ind);
    // pending states reachable through pending paths from the first digit
    let mut seen = vec![false; ind.len()];
    let mut stack: Vec<usize> = (1..ind.base())
        .map(|d| ind.next(ind.initial(), d))
        .filter(|&q| pending[q])
        .collect();
    for &q in &stack {
        seen[q] = true;
    }
    while let Some(q) = stack.pop() {
        for d in 0..ind.base() {
            let t = ind.next(q, d);
            if pending[t] && !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    let sub: Vec<usize> = (0..ind.len()).filter(|&q| seen[q]).collect();
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let nodes: HashMap<usize, _> = sub.iter().map(|&q| (q, g.add_node(()))).collect();
    let mut self_loop = false;
    for &q in &sub {
        for d in 0..ind.base() {
            let t = ind.next(q, d);
            if let Some(&nt) = nodes.get(&t) {
                if t == q {
                    self_loop = true;
                }
                g.add_edge(nodes[&q], nt, ());
            }
        }
    }
    self_loop || petgraph::algo::tarjan_scc(&g).iter().any(|c| c.len() > 1)
}

pub fn generators(ind: &Dfao, depth: usize) -> GeneratorReport {
    let k = ind.base();
    if ind.output(ind.initial()) == "1" {
        return GeneratorReport {
            base: k,
            depth,
            elements: vec![0],
            counts: (1..=depth).map(|l| (l, BigUint::zero(), BigUint::zero())).collect(),
            finite: true,
            everything: true,
        };
    }
    let pending = pending_states(ind);
    let mut elements = Vec::new();
    // depth-first over canonical words whose proper prefixes stay pending
    let mut stack: Vec<(usize, u128, usize)> = (1..k)
        .rev()
        .map(|d| (ind.next(ind.initial(), d), d as u128, 1))
        .collect();
    while let Some((q, n, len)) = stack.pop() {
        if ind.output(q) == "1" {
            elements.push(n);
            continue;
        }
        if !pending[q] || len >= depth {
            continue;
        }
        for d in (0..k).rev() {
            stack.push((ind.next(q, d), n * k as u128 + d as u128, len + 1));
        }
    }
    elements.sort_unstable();
    let mut counter = GeneratorCounter::new(ind);
    let counts = (1..=depth)
        .map(|l| {
            let (s, p) = counter.step();
            (l, s, p)
        })
        .collect();
    GeneratorReport {
        base: k,
        depth,
        elements,
        counts,
        finite: !generators_infinite(ind),
        everything: false,
    }
}
