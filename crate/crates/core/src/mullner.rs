//! Decomposition of a primitive automaton into a synchronizing part and a
//! naturally induced permutation part.
//!
//! Each reachable minimal image set `S` carries a canonical ordering
//! `C(S)` of its elements. Reading digit `j` from `S` maps `C(S)` onto
//! `C(S')` up to a permutation `g_{j,S}`; the permutations compose along
//! words to a cocycle `T(n)` with values in the group `G` they generate.
//! Then `b(n) = f(s(n), T(n))` where `s` tracks only the set.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::dfao::Dfao;
use crate::error::{Error, Result};
use crate::rational::{divisors, gcd_u64};
use crate::structure::{column_data, is_primitive};

/// A permutation of `0..c` stored as its image list.
pub type Perm = Vec<usize>;

/// `(g o h)(i) = g(h(i))`.
pub fn compose(g: &Perm, h: &Perm) -> Perm {
    h.iter().map(|&i| g[i]).collect()
}

pub fn identity(c: usize) -> Perm {
    (0..c).collect()
}

/// All products of the generators, starting from the identity, in BFS order.
pub fn group_closure(gens: &[Perm], c: usize) -> Vec<Perm> {
    let id = identity(c);
    let mut seen: HashMap<Perm, usize> = HashMap::new();
    seen.insert(id.clone(), 0);
    let mut out = vec![id];
    let mut i = 0;
    while i < out.len() {
        let x = out[i].clone();
        i += 1;
        for g in gens {
            let y = compose(g, &x);
            if !seen.contains_key(&y) {
                seen.insert(y.clone(), out.len());
                out.push(y);
            }
        }
    }
    out
}

/// Cycle notation with 1-based points, `()` for the identity.
pub fn cycle_notation(p: &Perm) -> String {
    let mut seen = vec![false; p.len()];
    let mut s = String::new();
    for i in 0..p.len() {
        if seen[i] || p[i] == i {
            continue;
        }
        let mut cyc = Vec::new();
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            cyc.push((j + 1).to_string());
            j = p[j];
        }
        s.push('(');
        s.push_str(&cyc.join(" "));
        s.push(')');
    }
    if s.is_empty() {
        "()".into()
    } else {
        s
    }
}

#[derive(Clone, Debug)]
pub struct MullnerData {
    /// The input, possibly read in a power of its base so that digit 0
    /// fixes the anchor set pointwise.
    pub automaton: Dfao,
    /// `automaton` reads base `k^exponent` where `k` is the input base.
    pub exponent: u32,
    /// Column number.
    pub c: usize,
    /// Reachable image sets; `sets[0]` is the anchor.
    pub sets: Vec<Vec<usize>>,
    /// Canonical ordering `C(S)` of each set.
    pub tuples: Vec<Vec<usize>>,
    /// Synchronizing automaton on `sets`; the output of a state is its name.
    pub s: Dfao,
    /// `g_{j,S}` as an index into `group`, stored at `S * base + j`.
    pub labels: Vec<usize>,
    /// Elements of `G`, identity first.
    pub group: Vec<Perm>,
    /// Largest `d` coprime to the base with `T(n)` determining `n mod d`.
    pub d: u64,
    /// The homomorphism `G -> Z/d`, indexed like `group`.
    pub phi: Vec<u64>,
}

impl MullnerData {
    pub fn base(&self) -> u32 {
        self.automaton.base()
    }

    pub fn label(&self, set: usize, j: u32) -> &Perm {
        &self.group[self.labels[set * self.base() as usize + j as usize]]
    }

    pub fn group_index(&self, p: &Perm) -> Option<usize> {
        self.group.iter().position(|g| g == p)
    }

    /// `f(S, g)`: output of the state of `C(S)` selected by `g`.
    pub fn f(&self, set: usize, g: &Perm) -> &str {
        self.automaton.output(self.tuples[set][g[0]])
    }

    /// `(s(n), T(n))` computed from the digits of `n` in the working base.
    pub fn cocycle(&self, n: u128) -> (usize, Perm) {
        let mut set = 0;
        let mut pi = identity(self.c);
        for j in crate::dfao::digits(n, self.base()) {
            pi = compose(self.label(set, j), &pi);
            set = self.s.next(set, j);
        }
        (set, pi)
    }

    /// Automaton on pairs `(S, g)` with output `f(S, g)`.
    pub fn evaluator(&self) -> Result<Dfao> {
        let k = self.base();
        let gi = |p: &Perm| self.group_index(p).expect("closed group");
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut states = vec![(0usize, 0usize)];
        index.insert((0, 0), 0);
        let mut delta = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let (set, g) = states[i];
            i += 1;
            for j in 0..k {
                let h = compose(self.label(set, j), &self.group[g]);
                let nxt = (self.s.next(set, j), gi(&h));
                let id = *index.entry(nxt).or_insert_with(|| {
                    states.push(nxt);
                    states.len() - 1
                });
                delta.push(id);
            }
        }
        let names = states.iter().map(|&(s, g)| format!("{}{}", self.s.name(s), cycle_notation(&self.group[g]))).collect();
        let output = states.iter().map(|&(s, g)| self.f(s, &self.group[g]).to_string()).collect();
        Dfao::new(k, names, 0, delta, output)
    }
}

fn set_name(a: &Dfao, set: &[usize]) -> String {
    let parts: Vec<&str> = set.iter().map(|&q| a.name(q)).collect();
    format!("{{{}}}", parts.join(","))
}

/// Builds the decomposition of a primitive, prolongable automaton.
pub fn mullner_decompose(b: &Dfao) -> Result<MullnerData> {
    if !is_primitive(b) {
        return Err(Error::NotPrimitive("input automaton is not primitive".into()));
    }
    if !b.is_prolongable() {
        return Err(Error::Precondition("digit 0 must fix the initial state".into()));
    }
    let q0 = b.initial();
    let all: Vec<usize> = (0..b.len()).collect();
    let (c, _, word) = column_data(b, &all);
    let image = {
        let mut s: Vec<usize> = all.iter().map(|&q| b.run(q, &word)).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    // steer some element of the image onto q0
    let steer = path_to(b, image[0], q0);
    let mut set = apply(b, &image, &steer);

    // iterate 0 into its eventual cycle of sets
    let mut trail: Vec<Vec<usize>> = Vec::new();
    while !trail.contains(&set) {
        trail.push(set.clone());
        set = apply(b, &set, &[0]);
    }
    // q0 stays in the set since 0 fixes it
    let start = trail.iter().position(|s| *s == set).expect("cycle");
    let period = (trail.len() - start) as u32;
    let perm_order = {
        let mut x: Vec<usize> = set.clone();
        let mut o = 0u32;
        loop {
            x = x.iter().map(|&q| b.run(q, &vec![0; period as usize])).collect();
            o += 1;
            if x == set {
                break o;
            }
        }
    };
    let exponent = period * perm_order;
    let a = if exponent > 1 { b.power_base(exponent)? } else { b.clone() };
    let k = a.base();

    let mut t0 = vec![q0];
    t0.extend(set.iter().copied().filter(|&q| q != q0));

    let mut sets = vec![set.clone()];
    let mut tuples = vec![t0];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    index.insert(set, 0);
    let mut raw_labels: Vec<Perm> = Vec::new();
    let mut delta = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        let tup = tuples[i].clone();
        i += 1;
        for j in 0..k {
            let img: Vec<usize> = tup.iter().map(|&q| a.next(q, j)).collect();
            let mut key = img.clone();
            key.sort_unstable();
            key.dedup();
            if key.len() != c {
                return Err(Error::Invariant("minimal image collapsed".into()));
            }
            let id = match index.get(&key) {
                Some(&id) => id,
                None => {
                    index.insert(key.clone(), sets.len());
                    sets.push(key);
                    tuples.push(img.clone());
                    sets.len() - 1
                }
            };
            let target = &tuples[id];
            let g: Perm = img.iter().map(|q| target.iter().position(|t| t == q).expect("member")).collect();
            raw_labels.push(g);
            delta.push(id);
        }
    }
    let names: Vec<String> = sets.iter().map(|s| set_name(&a, s)).collect();
    let s = Dfao::new(k, names.clone(), 0, delta, names)?;

    let gens: Vec<Perm> = raw_labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let group = group_closure(&gens, c);
    let pos: HashMap<&Perm, usize> = group.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let labels = raw_labels.iter().map(|g| pos[g]).collect();

    let mut md = MullnerData {
        automaton: a,
        exponent,
        c,
        sets,
        tuples,
        s,
        labels,
        group,
        d: 1,
        phi: vec![],
    };

    let ev = md.evaluator()?;
    if ev.len() != md.sets.len() * md.group.len() {
        return Err(Error::Invariant(format!(
            "{} reachable pairs, expected {} x {}",
            ev.len(),
            md.sets.len(),
            md.group.len()
        )));
    }
    if !ev.equivalent(&md.automaton)? {
        return Err(Error::Invariant("decomposition does not reproduce the input".into()));
    }
    let (d, phi) = maximal_d(&md)?;
    md.d = d;
    md.phi = phi;
    Ok(md)
}

fn apply(a: &Dfao, set: &[usize], word: &[u32]) -> Vec<usize> {
    let mut s: Vec<usize> = set.iter().map(|&q| a.run(q, word)).collect();
    s.sort_unstable();
    s.dedup();
    s
}

fn path_to(a: &Dfao, from: usize, to: usize) -> Vec<u32> {
    let mut prev: Vec<Option<(usize, u32)>> = vec![None; a.len()];
    let mut seen = vec![false; a.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(q) = queue.pop_front() {
        if q == to {
            break;
        }
        for d in 0..a.base() {
            let r = a.next(q, d);
            if !seen[r] {
                seen[r] = true;
                prev[r] = Some((q, d));
                queue.push_back(r);
            }
        }
    }
    let mut word = Vec::new();
    let mut q = to;
    while q != from {
        let (p, d) = prev[q].expect("strongly connected");
        word.push(d);
        q = p;
    }
    word.reverse();
    word
}

/// Tries `d' | |G|` coprime to the base in decreasing order and returns the
/// first for which `g_{j,S} -> (r(K-1)+j) mod d'` extends to a homomorphism.
pub fn maximal_d(md: &MullnerData) -> Result<(u64, Vec<u64>)> {
    let k = md.base() as u64;
    let order = md.group.len() as u64;
    let mut found = None;
    for dd in divisors(order).into_iter().rev() {
        if gcd_u64(dd, k) != 1 {
            continue;
        }
        if let Some(phi) = try_homomorphism(md, dd) {
            found = Some((dd, phi));
            break;
        }
    }
    let (d, phi) = found.ok_or_else(|| Error::Invariant("d = 1 must always succeed".into()))?;
    for e in divisors(d) {
        if try_homomorphism(md, e).is_none() {
            return Err(Error::Invariant(format!("divisor {e} of d = {d} fails")));
        }
    }
    for j in 0..d {
        let n = phi.iter().filter(|&&v| v == j).count() as u64;
        if n * d != order {
            return Err(Error::Invariant("unbalanced fibres of the homomorphism".into()));
        }
    }
    Ok((d, phi))
}

fn try_homomorphism(md: &MullnerData, dd: u64) -> Option<Vec<u64>> {
    let k = md.base();
    let kk = k as u64;
    let nsets = md.sets.len();
    // value forced on each label by the pairs (S, n mod dd)
    let mut forced: Vec<Option<u64>> = vec![None; nsets * k as usize];
    let mut seen = vec![false; nsets * dd as usize];
    seen[0] = true;
    let mut queue = VecDeque::from([(0usize, 0u64)]);
    while let Some((set, r)) = queue.pop_front() {
        for j in 0..k {
            let v = (r * (kk - 1) + j as u64) % dd;
            let slot = &mut forced[set * k as usize + j as usize];
            match slot {
                Some(w) if *w != v => return None,
                _ => *slot = Some(v),
            }
            let nxt = (md.s.next(set, j), (r * kk + j as u64) % dd);
            let key = nxt.0 * dd as usize + nxt.1 as usize;
            if !seen[key] {
                seen[key] = true;
                queue.push_back(nxt);
            }
        }
    }
    let mut gen_value: HashMap<usize, u64> = HashMap::new();
    for (slot, v) in forced.iter().enumerate() {
        let Some(v) = v else { continue };
        let g = md.labels[slot];
        if *gen_value.entry(g).or_insert(*v) != *v {
            return None;
        }
    }
    let pos: HashMap<&Perm, usize> = md.group.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut phi: Vec<Option<u64>> = vec![None; md.group.len()];
    phi[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let px = phi[x].expect("assigned");
        for (&g, &v) in &gen_value {
            let y = pos[&compose(&md.group[g], &md.group[x])];
            let py = (px + v) % dd;
            match phi[y] {
                Some(w) if w != py => return None,
                Some(_) => {}
                None => {
                    phi[y] = Some(py);
                    queue.push_back(y);
                }
            }
        }
    }
    phi.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn closure_examples() {
        assert_eq!(group_closure(&[], 3), vec![identity(3)]);
        assert_eq!(group_closure(&[vec![1, 0, 2]], 3).len(), 2);
        assert_eq!(group_closure(&[vec![1, 0, 2], vec![0, 2, 1]], 3).len(), 6);
    }

    #[test]
    fn cycles() {
        assert_eq!(cycle_notation(&vec![1, 0, 2]), "(1 2)");
        assert_eq!(cycle_notation(&vec![1, 2, 0]), "(1 2 3)");
        assert_eq!(cycle_notation(&identity(2)), "()");
    }

    #[test]
    fn paperfolding_is_synchronizing() {
        let md = mullner_decompose(&corpus::paperfolding()).unwrap();
        assert_eq!((md.c, md.group.len(), md.d), (1, 1, 1));
    }

    #[test]
    fn parity_base_three() {
        let md = mullner_decompose(&corpus::parity_base3()).unwrap();
        assert_eq!((md.c, md.sets.len(), md.group.len(), md.d), (2, 1, 2, 2));
    }

    #[test]
    fn thue_morse_has_trivial_d() {
        let md = mullner_decompose(&corpus::thue_morse()).unwrap();
        assert_eq!((md.c, md.group.len(), md.d), (2, 2, 1));
    }

    #[test]
    fn cocycle_reproduces_sequence_and_residue() {
        for b in corpus::primitive() {
            let md = mullner_decompose(&b).unwrap();
            for n in 0..3000u128 {
                let (s, pi) = md.cocycle(n);
                assert_eq!(md.f(s, &pi), b.evaluate(n));
                let g = md.group_index(&pi).unwrap();
                assert_eq!(md.phi[g] as u128, n % md.d as u128);
            }
        }
    }
}
