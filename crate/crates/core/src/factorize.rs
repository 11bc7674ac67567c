//! Factorizations, sets of lengths, catenary degrees and elasticities.
//!
//! Sets of lengths are computed over the lattice of sub-multisets of `B`
//! without listing factorizations: `L(S)` is the union, over atoms `A | S`
//! containing the smallest element of `S`, of `1 + L(S·A^{-1})`.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::atoms::{all_atoms, enumerate_atoms, AtomSet};
use crate::error::{domain, invalid, Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, Rational};
use crate::sequence::Sequence;

/// Largest sequence length the bit-set representation of lengths supports.
pub const MAX_SEQUENCE_LEN: usize = 126;

/// Default cap on memoised states per computation.
pub const DEFAULT_STATE_BUDGET: usize = 40_000_000;

const DENSE_LIMIT: u64 = 1 << 21;
const DONE: u128 = 1 << 127;

/// A finite set of nonnegative integers, sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LengthSet(Vec<u32>);

impl LengthSet {
    pub fn new<I: IntoIterator<Item = u32>>(items: I) -> Self {
        let mut v: Vec<u32> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        LengthSet(v)
    }

    pub fn from_bits(bits: u128) -> Self {
        LengthSet((0..127).filter(|&i| bits >> i & 1 == 1).collect())
    }

    pub fn to_bits(&self) -> Option<u128> {
        self.0.iter().try_fold(0u128, |acc, &x| (x < 127).then(|| acc | 1 << x))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn minimum(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn maximum(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// `z + L`.
    pub fn shift(&self, z: u32) -> LengthSet {
        LengthSet(self.0.iter().map(|&x| x + z).collect())
    }

    /// `L − z`; `None` if some element is below `z`.
    pub fn unshift(&self, z: u32) -> Option<LengthSet> {
        self.0.iter().map(|&x| x.checked_sub(z)).collect::<Option<Vec<_>>>().map(LengthSet)
    }

    /// `Δ(L)`: the successive differences, as a sorted set.
    pub fn delta(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.0.windows(2).map(|w| w[1] - w[0]).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// `ρ(L) = max L / min L`, with `ρ({0}) = 1`.
    pub fn rho(&self) -> Rational {
        match (self.minimum(), self.maximum()) {
            (Some(lo), Some(hi)) if lo > 0 => Rational::new(hi as i64, lo as i64),
            _ => Rational::from_integer(1),
        }
    }

    /// Sumset `L + L'`.
    pub fn sumset(&self, other: &LengthSet) -> LengthSet {
        LengthSet::new(self.0.iter().flat_map(|&a| other.0.iter().map(move |&b| a + b)))
    }

    /// Greatest common divisor of the gaps (0 for singletons).
    pub fn gap_gcd(&self) -> u32 {
        self.0.windows(2).fold(0, |g, w| g.gcd(&(w[1] - w[0])))
    }
}

impl fmt::Display for LengthSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromIterator<u32> for LengthSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        LengthSet::new(iter)
    }
}

enum Memo {
    Dense(Vec<u128>),
    Sparse(HashMap<u64, u128>),
}

/// Memoised set-of-lengths solver over a fixed support with per-element caps.
///
/// One solver can answer many queries; sub-multisets shared between queries
/// are computed once.
pub struct LengthSolver {
    group: FiniteAbelianGroup,
    support: Vec<GroupElement>,
    strides: Vec<u64>,
    caps: Vec<u32>,
    atoms: Vec<Vec<(usize, u32)>>,
    atom_codes: Vec<u64>,
    atom_lens: Vec<u32>,
    blocks: Vec<std::ops::Range<usize>>,
    memo: Memo,
    entries: usize,
    budget: usize,
}

impl LengthSolver {
    /// Builds a solver for sub-multisets of `Π support[i]^{caps[i]}`, using the
    /// atoms of `atoms` that fit (atoms must be listed in canonical order).
    pub fn new(support: &[GroupElement], caps: &[u32], atoms: &[Sequence], budget: usize) -> Result<Self> {
        let group = match atoms.first() {
            Some(a) => a.group().clone(),
            None => return invalid("no atoms supplied"),
        };
        Self::with_group(&group, support, caps, atoms, budget)
    }

    pub fn with_group(
        group: &FiniteAbelianGroup,
        support: &[GroupElement],
        caps: &[u32],
        atoms: &[Sequence],
        budget: usize,
    ) -> Result<Self> {
        if support.len() != caps.len() {
            return invalid("support and caps differ in length");
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("support must be strictly increasing");
        }
        let mut strides = Vec::with_capacity(caps.len());
        let mut total: u64 = 1;
        for &c in caps {
            strides.push(total);
            total = total
                .checked_mul(c as u64 + 1)
                .ok_or_else(|| Error::Resource("state space exceeds 64-bit codes".into()))?;
        }
        let index: HashMap<GroupElement, usize> = support.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let mut kept: Vec<(usize, Vec<(usize, u32)>)> = Vec::new();
        'atoms: for a in atoms {
            let mut v = Vec::with_capacity(a.terms().len());
            for &(g, m) in a.terms() {
                match index.get(&g) {
                    Some(&i) if m <= caps[i] => v.push((i, m)),
                    _ => continue 'atoms,
                }
            }
            kept.push((v[0].0, v));
        }
        // stable: keeps canonical order inside each block
        kept.sort_by_key(|(first, _)| *first);
        let mut blocks = vec![0..0; support.len()];
        let mut start = 0;
        while start < kept.len() {
            let first = kept[start].0;
            let mut end = start;
            while end < kept.len() && kept[end].0 == first {
                end += 1;
            }
            blocks[first] = start..end;
            start = end;
        }
        let atoms: Vec<Vec<(usize, u32)>> = kept.into_iter().map(|(_, v)| v).collect();
        let atom_codes = atoms.iter().map(|v| v.iter().map(|&(i, m)| m as u64 * strides[i]).sum()).collect();
        let atom_lens = atoms.iter().map(|v| v.iter().map(|&(_, m)| m).sum()).collect();
        let memo = if total <= DENSE_LIMIT {
            Memo::Dense(vec![0; total as usize])
        } else {
            Memo::Sparse(HashMap::new())
        };
        Ok(LengthSolver {
            group: group.clone(),
            support: support.to_vec(),
            strides,
            caps: caps.to_vec(),
            atoms,
            atom_codes,
            atom_lens,
            blocks,
            memo,
            entries: 0,
            budget,
        })
    }

    pub fn support(&self) -> &[GroupElement] {
        &self.support
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    /// Number of memoised states so far.
    pub fn states(&self) -> usize {
        self.entries
    }

    fn lookup(&self, code: u64) -> u128 {
        match &self.memo {
            Memo::Dense(v) => v[code as usize],
            Memo::Sparse(m) => m.get(&code).copied().unwrap_or(0),
        }
    }

    fn store(&mut self, code: u64, value: u128) -> Result<()> {
        self.entries += 1;
        if self.entries > self.budget {
            return Err(Error::Resource(format!("more than {} sub-multiset states", self.budget)));
        }
        match &mut self.memo {
            Memo::Dense(v) => v[code as usize] = value,
            Memo::Sparse(m) => {
                m.insert(code, value);
            }
        }
        Ok(())
    }

    fn solve(&mut self, state: &mut [u32], code: u64) -> Result<u128> {
        if code == 0 {
            return Ok(1);
        }
        let known = self.lookup(code);
        if known != 0 {
            return Ok(known & !DONE);
        }
        let first = state.iter().position(|&m| m > 0).expect("nonzero state");
        let mut acc = 0u128;
        for a in self.blocks[first].clone() {
            if self.atoms[a].iter().all(|&(i, m)| state[i] >= m) {
                for k in 0..self.atoms[a].len() {
                    let (i, m) = self.atoms[a][k];
                    state[i] -= m;
                }
                let sub = self.solve(state, code - self.atom_codes[a]);
                for k in 0..self.atoms[a].len() {
                    let (i, m) = self.atoms[a][k];
                    state[i] += m;
                }
                acc |= sub? << 1;
            }
        }
        self.store(code, acc | DONE)?;
        Ok(acc)
    }

    /// Multiplicity vector of `b` relative to the solver's support.
    pub fn state_of(&self, b: &Sequence) -> Result<Vec<u32>> {
        let mut state = vec![0u32; self.support.len()];
        for &(g, m) in b.terms() {
            match self.support.binary_search(&g) {
                Ok(i) if m <= self.caps[i] => state[i] = m,
                _ => return invalid(format!("{b} exceeds the solver's support or caps")),
            }
        }
        Ok(state)
    }

    /// Length bits (bit `ℓ` set iff `ℓ ∈ L`) of the state `mults`.
    pub fn lengths_of_state(&mut self, mults: &[u32]) -> Result<u128> {
        let len: u32 = mults.iter().sum();
        if len as usize > MAX_SEQUENCE_LEN {
            return Err(Error::Resource(format!("|B| = {len} exceeds {MAX_SEQUENCE_LEN}")));
        }
        let code = mults.iter().zip(&self.strides).map(|(&m, &s)| m as u64 * s).sum();
        let mut state = mults.to_vec();
        self.solve(&mut state, code)
    }

    pub fn lengths(&mut self, b: &Sequence) -> Result<LengthSet> {
        let state = self.state_of(b)?;
        Ok(LengthSet::from_bits(self.lengths_of_state(&state)?))
    }

    /// All factorizations of `mults`, as sorted lists of solver atom indices;
    /// stops after `limit` and reports truncation.
    fn factorizations_of_state(&self, mults: &[u32], limit: usize) -> (Vec<Vec<usize>>, bool) {
        let mut out = Vec::new();
        let mut state = mults.to_vec();
        let mut chosen = Vec::new();
        let truncated = !self.enumerate(&mut state, 0, &mut chosen, &mut out, limit);
        (out, truncated)
    }

    fn enumerate(&self, state: &mut [u32], min_atom: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) -> bool {
        let Some(first) = state.iter().position(|&m| m > 0) else {
            if out.len() >= limit {
                return false;
            }
            out.push(chosen.clone());
            return true;
        };
        let block = self.blocks[first].clone();
        for a in block.start.max(min_atom)..block.end {
            if self.atoms[a].iter().all(|&(i, m)| state[i] >= m) {
                for &(i, m) in &self.atoms[a] {
                    state[i] -= m;
                }
                chosen.push(a);
                let ok = self.enumerate(state, a, chosen, out, limit);
                chosen.pop();
                for &(i, m) in &self.atoms[a] {
                    state[i] += m;
                }
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    fn atom_sequence(&self, a: usize) -> Sequence {
        Sequence::from_terms(&self.group, self.atoms[a].iter().map(|&(i, m)| (self.support[i], m)))
    }

    pub fn atom_len(&self, a: usize) -> u32 {
        self.atom_lens[a]
    }
}

/// Checks `atoms` covers every atom that can divide `b`.
fn check_complete(b: &Sequence, atoms: &AtomSet) -> Result<()> {
    let covered = b.support().iter().all(|g| atoms.support().binary_search(g).is_ok());
    let auto = atoms.group().order() / atoms.kernel().len().max(1);
    if !covered {
        return invalid("atom set does not cover the support of the sequence");
    }
    if atoms.max_len() < b.len().min(auto) {
        return invalid(format!("atom set is complete only up to length {}, need {}", atoms.max_len(), b.len().min(auto)));
    }
    Ok(())
}

fn solver_for(b: &Sequence, atoms: &AtomSet, budget: usize) -> Result<LengthSolver> {
    let support = b.support();
    let caps: Vec<u32> = b.terms().iter().map(|&(_, m)| m).collect();
    let candidates = atoms.dividing(b);
    LengthSolver::with_group(b.group(), &support, &caps, &candidates, budget)
}

fn check_member(b: &Sequence, atoms: &AtomSet) -> Result<()> {
    let sum = b.sum();
    if atoms.kernel().binary_search(&sum).is_err() {
        if atoms.kernel().len() == 1 {
            return domain(format!("σ({b}) ≠ 0"));
        }
        return domain(format!("σ({b}) is not in the subgroup"));
    }
    check_complete(b, atoms)
}

/// `L(B)` with a state budget.
pub fn length_set_with_budget(b: &Sequence, atoms: &AtomSet, budget: usize) -> Result<LengthSet> {
    check_member(b, atoms)?;
    if b.is_empty() {
        return Ok(LengthSet::new([0]));
    }
    solver_for(b, atoms, budget)?.lengths(b)
}

/// `L(B)`; `atoms` must contain every atom over `supp(B)` up to `|B|`.
/// Works equally for atoms of a relative monoid `ℬ_K(G)`.
pub fn length_set(b: &Sequence, atoms: &AtomSet) -> Result<LengthSet> {
    length_set_with_budget(b, atoms, DEFAULT_STATE_BUDGET)
}

/// `L(B)`, enumerating the needed atoms (cached) first.
pub fn lengths(b: &Sequence) -> Result<LengthSet> {
    lengths_with_budget(b, DEFAULT_STATE_BUDGET)
}

pub fn lengths_with_budget(b: &Sequence, budget: usize) -> Result<LengthSet> {
    if !b.is_zero_sum() {
        return domain(format!("σ({b}) ≠ 0"));
    }
    let atoms = enumerate_atoms(b.group(), &b.support(), Some(b.len().max(1)));
    length_set_with_budget(b, &atoms, budget)
}

/// A factorization: atoms in canonical non-decreasing order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Factorization(Vec<Sequence>);

impl Factorization {
    pub fn new(mut atoms: Vec<Sequence>) -> Self {
        atoms.sort();
        Factorization(atoms)
    }

    pub fn atoms(&self) -> &[Sequence] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| format!("[{a}]")).collect();
        f.write_str(&parts.join("·"))
    }
}

/// Result of [`enumerate_factorizations`].
#[derive(Clone, Debug)]
pub struct Factorizations {
    pub items: Vec<Factorization>,
    pub truncated: bool,
}

/// Lists factorizations of `b` in canonical order, at most `limit` of them.
pub fn enumerate_factorizations(b: &Sequence, atoms: &AtomSet, limit: usize) -> Result<Factorizations> {
    check_member(b, atoms)?;
    if b.is_empty() {
        return Ok(Factorizations { items: vec![Factorization(Vec::new())], truncated: false });
    }
    let solver = solver_for(b, atoms, DEFAULT_STATE_BUDGET)?;
    let state = solver.state_of(b)?;
    let (raw, truncated) = solver.factorizations_of_state(&state, limit);
    let items = raw
        .into_iter()
        .map(|idx| Factorization(idx.into_iter().map(|a| solver.atom_sequence(a)).collect()))
        .collect();
    Ok(Factorizations { items, truncated })
}

/// Leftover counts after cancelling common entries of two sorted lists.
fn leftover<T: Ord>(a: &[T], b: &[T]) -> (usize, usize) {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (a.len() - common, b.len() - common)
}

/// `d(z, z') = max{|z/gcd(z,z')|, |z'/gcd(z,z')|}`.
pub fn factorization_distance(z: &Factorization, w: &Factorization) -> usize {
    let (x, y) = leftover(&z.0, &w.0);
    x.max(y)
}

/// Catenary degree of one element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catenary {
    pub value: usize,
    /// False when the factorization list was truncated and `value` is only a lower bound.
    pub exact: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// `c(B)`: the least `N` making the distance-`≤ N` graph on `Z(B)` connected.
///
/// A truncated factorization list is an error unless `allow_lower_bound`.
pub fn catenary_degree(b: &Sequence, atoms: &AtomSet, limit: usize, allow_lower_bound: bool) -> Result<Catenary> {
    check_member(b, atoms)?;
    if b.is_empty() {
        return Ok(Catenary { value: 0, exact: true });
    }
    let solver = solver_for(b, atoms, DEFAULT_STATE_BUDGET)?;
    let state = solver.state_of(b)?;
    let (zs, truncated) = solver.factorizations_of_state(&state, limit);
    if truncated && !allow_lower_bound {
        return Err(Error::Resource(format!("more than {limit} factorizations; catenary degree not determined")));
    }
    let n = zs.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = leftover(&zs[i], &zs[j]);
            edges.push((x.max(y), i, j));
        }
    }
    edges.sort_unstable();
    let mut uf = UnionFind((0..n).collect());
    let mut joined = 1;
    let mut value = 0;
    for (d, i, j) in edges {
        if joined == n {
            break;
        }
        if uf.union(i, j) {
            joined += 1;
            value = d;
        }
    }
    Ok(Catenary { value, exact: !truncated })
}

/// `Δ(L)`.
pub fn delta_of(l: &LengthSet) -> Vec<u32> {
    l.delta()
}

/// `ρ(L)`.
pub fn rho_of(l: &LengthSet) -> Rational {
    l.rho()
}

/// Default node budget for [`rho_k`].
pub const RHO_BUDGET: usize = 2_000_000;

/// `ρ_k(G) = max{max L(B) : k ∈ L(B)}`, by branch and bound over k-multisets of atoms.
pub fn rho_k(group: &FiniteAbelianGroup, k: usize, budget: usize) -> Result<usize> {
    if k == 0 {
        return invalid("k must be positive");
    }
    let set = all_atoms(group);
    let mut atoms: Vec<&Sequence> = set.iter().collect();
    atoms.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    // twice the upper bound contribution to max L of one atom
    let weight = |a: &Sequence| if a.len() == 1 { 2 } else { a.len() };
    let mut best = k;
    if k >= 2 {
        // (−U)U·0^{k−2} for a longest U
        if let Some(u) = atoms.first() {
            let mut b = u.negate().product(u);
            b = b.product(&Sequence::power_of(group, GroupElement::ZERO, (k - 2) as u32));
            best = best.max(lengths(&b)?.maximum().unwrap_or(0) as usize);
        }
    }
    struct Search<'a> {
        atoms: Vec<&'a Sequence>,
        weights: Vec<usize>,
        k: usize,
        best: usize,
        nodes: usize,
        budget: usize,
    }
    impl Search<'_> {
        fn go(&mut self, start: usize, chosen: &mut Vec<usize>, weight: usize) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::Resource(format!("ρ_k search exceeded {} nodes", self.budget)));
            }
            if chosen.len() == self.k {
                let group = self.atoms[0].group();
                let b = chosen
                    .iter()
                    .fold(Sequence::empty(group), |acc, &i| acc.product(self.atoms[i]));
                let m = lengths(&b)?.maximum().unwrap_or(0) as usize;
                self.best = self.best.max(m);
                return Ok(());
            }
            let remaining = self.k - chosen.len();
            for i in start..self.atoms.len() {
                if (weight + remaining * self.weights[i]) / 2 <= self.best {
                    break;
                }
                chosen.push(i);
                self.go(i, chosen, weight + self.weights[i])?;
                chosen.pop();
            }
            Ok(())
        }
    }
    let weights = atoms.iter().map(|a| weight(a)).collect();
    let mut search = Search { atoms, weights, k, best, nodes: 0, budget };
    search.go(0, &mut Vec::new(), 0)?;
    Ok(search.best)
}

/// Whether every atom over the support has cross number 1.
pub fn is_half_factorial(atoms: &AtomSet) -> bool {
    let one = Rational::from_integer(1);
    atoms.iter().all(|a| a.cross_number() == one)
}

/// `min Δ(G_0)` as far as sequences of bounded length reveal it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MinDelta {
    HalfFactorial,
    /// gcd of all gaps seen among `B` with `|B| ≤ bound` (exact under the bound).
    Gcd { value: u32, bound: usize },
    /// Not half-factorial but no gap appeared within the bound.
    Undetermined { bound: usize },
}

impl MinDelta {
    pub fn value(&self) -> Option<u32> {
        match self {
            MinDelta::Gcd { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Calls `visit(mults, σ-zero B)` for every nonempty zero-sum multiset over
/// `support` (no zero element) with `|B| ≤ max_len`, in canonical order of the
/// multiplicity vectors (lexicographic, most significant first).
pub fn for_each_zero_sum(
    group: &FiniteAbelianGroup,
    support: &[GroupElement],
    max_len: usize,
    visit: &mut dyn FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    fn rec(
        group: &FiniteAbelianGroup,
        support: &[GroupElement],
        i: usize,
        left: usize,
        sum: GroupElement,
        mults: &mut Vec<u32>,
        visit: &mut dyn FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        if i == support.len() {
            if sum.is_zero() && mults.iter().any(|&m| m > 0) {
                visit(mults)?;
            }
            return Ok(());
        }
        let mut s = sum;
        for m in 0..=left {
            mults[i] = m as u32;
            rec(group, support, i + 1, left - m, s, mults, visit)?;
            s = group.add(s, support[i]);
        }
        mults[i] = 0;
        Ok(())
    }
    let mut mults = vec![0u32; support.len()];
    rec(group, support, 0, max_len, GroupElement::ZERO, &mut mults, visit)
}

/// Per-support-mask gcd of gaps over all zero-sum `B` with `|B| ≤ bound`
/// (mask bit `i` = `support[i] ∈ supp(B)`); 0 where no gap was seen.
pub(crate) fn gap_gcd_by_mask(
    group: &FiniteAbelianGroup,
    support: &[GroupElement],
    bound: usize,
    budget: usize,
) -> Result<Vec<u32>> {
    let atoms = enumerate_atoms(group, support, Some(bound.max(1)));
    let caps = vec![bound as u32; support.len()];
    let mut solver = LengthSolver::with_group(group, support, &caps, atoms.atoms(), budget)?;
    let mut gcds = vec![0u32; 1 << support.len()];
    for_each_zero_sum(group, support, bound, &mut |mults| {
        let bits = solver.lengths_of_state(mults)?;
        let g = LengthSet::from_bits(bits).gap_gcd();
        if g > 0 {
            let mask = mults.iter().enumerate().filter(|(_, &m)| m > 0).fold(0usize, |acc, (i, _)| acc | 1 << i);
            gcds[mask] = gcds[mask].gcd(&g);
        }
        Ok(())
    })?;
    Ok(gcds)
}

/// Closes per-mask values under submasks with gcd.
pub(crate) fn gcd_over_submasks(values: &mut [u32], bits: usize) {
    for b in 0..bits {
        for mask in 0..values.len() {
            if mask >> b & 1 == 1 {
                values[mask] = values[mask].gcd(&values[mask ^ (1 << b)]);
            }
        }
    }
}

/// `min Δ(G_0)`, labelled exact-under-bound; `len_bound = None` uses `3·D(G)`.
pub fn min_delta_support(group: &FiniteAbelianGroup, g0: &[GroupElement], len_bound: Option<usize>) -> Result<MinDelta> {
    let mut support: Vec<GroupElement> = g0.iter().copied().filter(|g| !g.is_zero()).collect();
    support.sort_unstable();
    support.dedup();
    if g0.is_empty() {
        return invalid("G_0 must be nonempty");
    }
    let bound = len_bound.unwrap_or_else(|| 3 * crate::atoms::davenport(group));
    if support.is_empty() || is_half_factorial(&enumerate_atoms(group, &support, None)) {
        return Ok(MinDelta::HalfFactorial);
    }
    let gcds = gap_gcd_by_mask(group, &support, bound, DEFAULT_STATE_BUDGET)?;
    let g = gcds.iter().fold(0u32, |acc, &x| acc.gcd(&x));
    Ok(if g == 0 { MinDelta::Undetermined { bound } } else { MinDelta::Gcd { value: g, bound } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grp(inv: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(inv).unwrap()
    }

    fn seq(text: &str, g: &FiniteAbelianGroup) -> Sequence {
        Sequence::parse(text, g).unwrap()
    }

    fn ls(v: &[u32]) -> LengthSet {
        LengthSet::new(v.iter().copied())
    }

    #[test]
    fn length_set_examples() {
        let c4 = grp(&[4]);
        assert_eq!(lengths(&seq("(1)^4 (3)^4", &c4)).unwrap(), ls(&[2, 4]));
        assert_eq!(lengths(&seq("(0)^3", &c4)).unwrap(), ls(&[3]));
        assert_eq!(lengths(&Sequence::empty(&c4)).unwrap(), ls(&[0]));
        assert!(matches!(lengths(&seq("(1)", &c4)), Err(Error::Domain(_))));
        // ((−U)U)·U·W_1 over C_5, W_1 = (2g)(−g)^2
        let c5 = grp(&[5]);
        let b = seq("(1)^10 (4)^5 (2) (4)^2", &c5);
        assert_eq!(b.len(), 18);
        assert_eq!(lengths(&b).unwrap(), ls(&[4, 5, 7, 8]));
    }

    #[test]
    fn incomplete_atoms_rejected() {
        let c4 = grp(&[4]);
        let b = seq("(1)^4 (3)^4", &c4);
        let short = enumerate_atoms(&c4, &b.support(), Some(2));
        assert!(matches!(length_set(&b, &short), Err(Error::InvalidArgument(_))));
        let narrow = enumerate_atoms(&c4, &[c4.element(&[1]).unwrap()], None);
        assert!(matches!(length_set(&b, &narrow), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn factorization_examples() {
        let c5 = grp(&[5]);
        let b = seq("(1)^5 (4)^5", &c5);
        let atoms = enumerate_atoms(&c5, &b.support(), None);
        let z = enumerate_factorizations(&b, &atoms, 100).unwrap();
        assert!(!z.truncated);
        let shown: Vec<String> = z.items.iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, vec!["[(1)^5]·[(4)^5]", "[(1) (4)]·[(1) (4)]·[(1) (4)]·[(1) (4)]·[(1) (4)]"]);
        assert_eq!(factorization_distance(&z.items[0], &z.items[1]), 5);
        assert_eq!(factorization_distance(&z.items[0], &z.items[0]), 0);
        let atom = seq("(1)^5", &c5);
        assert_eq!(enumerate_factorizations(&atom, &atoms, 10).unwrap().items.len(), 1);
        let e = enumerate_factorizations(&Sequence::empty(&c5), &atoms, 10).unwrap();
        assert_eq!(e.items.len(), 1);
        assert!(e.items[0].is_empty());
        let t = enumerate_factorizations(&b, &atoms, 1).unwrap();
        assert!(t.truncated);
    }

    #[test]
    fn distance_single_swap() {
        let c5 = grp(&[5]);
        let x = seq("(1)^5", &c5);
        let y = seq("(4)^5", &c5);
        let w = seq("(1) (4)", &c5);
        let z1 = Factorization::new(vec![x.clone(), y]);
        let z2 = Factorization::new(vec![x, w]);
        assert_eq!(factorization_distance(&z1, &z2), 1);
    }

    #[test]
    fn catenary_examples() {
        let c5 = grp(&[5]);
        let b = seq("(1)^5 (4)^5", &c5);
        let atoms = enumerate_atoms(&c5, &b.support(), None);
        assert_eq!(catenary_degree(&b, &atoms, 100, false).unwrap().value, 5);
        assert_eq!(catenary_degree(&seq("(1)^5", &c5), &atoms, 100, false).unwrap().value, 0);
        let c3 = grp(&[3]);
        let b3 = seq("(1)^3 (2)^3", &c3);
        let a3 = enumerate_atoms(&c3, &b3.support(), None);
        assert_eq!(catenary_degree(&b3, &a3, 100, false).unwrap().value, 3);
        assert!(matches!(catenary_degree(&b, &atoms, 1, false), Err(Error::Resource(_))));
        let lb = catenary_degree(&b, &atoms, 1, true).unwrap();
        assert!(!lb.exact);
    }

    #[test]
    fn delta_and_rho() {
        assert_eq!(ls(&[2, 4, 5]).delta(), vec![1, 2]);
        assert!(ls(&[3]).delta().is_empty());
        assert_eq!(ls(&[2, 4]).rho(), Rational::from_integer(2));
        assert_eq!(ls(&[0]).rho(), Rational::from_integer(1));
    }

    #[test]
    fn rho_k_examples() {
        assert_eq!(rho_k(&grp(&[5]), 2, RHO_BUDGET).unwrap(), 5);
        assert_eq!(rho_k(&grp(&[5]), 3, RHO_BUDGET).unwrap(), 6);
        assert_eq!(rho_k(&grp(&[3, 3]), 2, RHO_BUDGET).unwrap(), 5);
    }

    #[test]
    fn min_delta_examples() {
        let c5 = grp(&[5]);
        let g = c5.element(&[1]).unwrap();
        let ng = c5.neg(g);
        let g2 = c5.element(&[2]).unwrap();
        assert_eq!(min_delta_support(&c5, &[g, ng], None).unwrap().value(), Some(3));
        assert_eq!(min_delta_support(&c5, &[g], None).unwrap(), MinDelta::HalfFactorial);
        assert_eq!(min_delta_support(&c5, &[g, g2, ng], None).unwrap().value(), Some(1));
    }

    #[test]
    fn half_factoriality() {
        let c5 = grp(&[5]);
        let g = c5.element(&[1]).unwrap();
        assert!(is_half_factorial(&enumerate_atoms(&c5, &[g], None)));
        assert!(!is_half_factorial(&enumerate_atoms(&c5, &[g, c5.neg(g)], None)));
        let c2 = grp(&[2]);
        assert!(is_half_factorial(&crate::atoms::all_atoms(&c2)));
    }
}
