//! Finite abelian groups in invariant-factor form.
//!
//! A group `C_{n_1} ⊕ … ⊕ C_{n_r}` with `1 < n_1 | … | n_r` is stored once and
//! shared behind an [`Arc`]. Elements are mixed-radix codes: the first
//! coordinate is the most significant digit, so code order is the
//! lexicographic order of coordinate tuples.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{invalid, Error, Result};

/// Exact rational numbers used for cross numbers and elasticities.
pub type Rational = Ratio<i64>;

/// Largest supported group order.
pub const MAX_ORDER: usize = 1 << 16;

const ADD_TABLE_LIMIT: usize = 1024;

/// An element of a [`FiniteAbelianGroup`], stored as its mixed-radix code.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GroupElement(u32);

impl GroupElement {
    pub const ZERO: GroupElement = GroupElement(0);

    pub fn from_code(code: usize) -> Self {
        GroupElement(code as u32)
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Inner {
    invariants: Vec<u32>,
    order: usize,
    strides: Vec<usize>,
    neg: Vec<u32>,
    orders: Vec<u32>,
    add: Option<Vec<u32>>,
}

/// A finite abelian group `C_{n_1} ⊕ … ⊕ C_{n_r}` in invariant-factor form.
///
/// Cloning is cheap. Two groups compare equal iff their invariant lists do.
#[derive(Clone)]
pub struct FiniteAbelianGroup(Arc<Inner>);

/// JSON form of a group: `{"invariants":[3,6]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub invariants: Vec<u64>,
}

impl PartialEq for FiniteAbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.invariants == other.0.invariants
    }
}

impl Eq for FiniteAbelianGroup {}

impl Hash for FiniteAbelianGroup {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.invariants.hash(state);
    }
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.invariants.is_empty() {
            return f.write_str("C1");
        }
        let parts: Vec<String> = self.0.invariants.iter().map(|n| format!("C{n}")).collect();
        f.write_str(&parts.join("x"))
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    /// Parses literals such as `C3xC6`, `C5`, or `C1` (trivial group).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("trivial") {
            return Ok(Self::trivial());
        }
        let mut entries = Vec::new();
        let mut pos = 0;
        for part in s.split(['x', 'X', '⊕']) {
            let body = part.trim();
            let digits = body
                .strip_prefix('C')
                .or_else(|| body.strip_prefix('c'))
                .ok_or_else(|| Error::Parse { pos, msg: format!("expected C<n>, found {body:?}") })?;
            let n: u64 = digits
                .parse()
                .map_err(|_| Error::Parse { pos, msg: format!("bad cyclic order {digits:?}") })?;
            if n != 1 {
                entries.push(n);
            }
            pos += part.len() + 1;
        }
        Self::new(&entries)
    }
}

impl Serialize for FiniteAbelianGroup {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FiniteAbelianGroup {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = GroupSpec::deserialize(deserializer)?;
        FiniteAbelianGroup::new(&spec.invariants).map_err(serde::de::Error::custom)
    }
}

fn prime_powers(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Merges arbitrary cyclic orders (each ≥ 2) into an invariant-factor chain.
fn invariant_factors(entries: &[u64]) -> Result<Vec<u32>> {
    let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    let mut order: u64 = 1;
    for &n in entries {
        if n < 2 {
            return invalid(format!("cyclic factor {n} must be at least 2"));
        }
        order = order.saturating_mul(n);
        if order > MAX_ORDER as u64 {
            return Err(Error::Resource(format!("group order exceeds {MAX_ORDER}")));
        }
        for (p, e) in prime_powers(n) {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let r = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut inv = vec![1u64; r];
    for (p, exps) in by_prime.iter_mut() {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        for (j, &e) in exps.iter().enumerate() {
            inv[r - 1 - j] *= p.pow(e);
        }
    }
    Ok(inv.into_iter().map(|n| n as u32).collect())
}

impl FiniteAbelianGroup {
    /// Builds the group `⊕ C_{n}` over the given cyclic orders, normalising the
    /// list into invariant-factor form (so `[2,3]` yields `C6`).
    pub fn new(entries: &[u64]) -> Result<Self> {
        let invariants = invariant_factors(entries)?;
        Ok(Self::from_invariants(invariants))
    }

    pub fn trivial() -> Self {
        Self::from_invariants(Vec::new())
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(&[n])
    }

    fn from_invariants(invariants: Vec<u32>) -> Self {
        let r = invariants.len();
        let mut strides = vec![1usize; r];
        for i in (0..r.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * invariants[i + 1] as usize;
        }
        let order: usize = invariants.iter().map(|&n| n as usize).product();
        let coords_of = |code: usize| -> Vec<u32> {
            (0..r).map(|i| ((code / strides[i]) % invariants[i] as usize) as u32).collect()
        };
        let encode = |coords: &[u32]| -> usize { coords.iter().zip(&strides).map(|(&a, &s)| a as usize * s).sum() };
        let mut neg = Vec::with_capacity(order);
        let mut orders = Vec::with_capacity(order);
        for code in 0..order {
            let c = coords_of(code);
            let nc: Vec<u32> = c.iter().zip(&invariants).map(|(&a, &n)| (n - a) % n).collect();
            neg.push(encode(&nc) as u32);
            let ord = c
                .iter()
                .zip(&invariants)
                .fold(1u32, |acc, (&a, &n)| acc.lcm(&(n / a.gcd(&n))));
            orders.push(ord);
        }
        let add = (order <= ADD_TABLE_LIMIT).then(|| {
            let mut table = vec![0u32; order * order];
            let all: Vec<Vec<u32>> = (0..order).map(coords_of).collect();
            for a in 0..order {
                for b in 0..order {
                    let s: Vec<u32> = all[a]
                        .iter()
                        .zip(&all[b])
                        .zip(&invariants)
                        .map(|((&x, &y), &n)| (x + y) % n)
                        .collect();
                    table[a * order + b] = encode(&s) as u32;
                }
            }
            table
        });
        FiniteAbelianGroup(Arc::new(Inner { invariants, order, strides, neg, orders, add }))
    }

    pub fn spec(&self) -> GroupSpec {
        GroupSpec { invariants: self.0.invariants.iter().map(|&n| n as u64).collect() }
    }

    pub fn invariants(&self) -> &[u32] {
        &self.0.invariants
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn exponent(&self) -> u32 {
        self.0.invariants.last().copied().unwrap_or(1)
    }

    pub fn rank(&self) -> usize {
        self.0.invariants.len()
    }

    /// Orders of the cyclic prime-power summands (elementary divisors).
    pub fn elementary_divisors(&self) -> Vec<u64> {
        let mut q: Vec<u64> = self
            .0
            .invariants
            .iter()
            .flat_map(|&n| prime_powers(n as u64).into_iter().map(|(p, e)| p.pow(e)))
            .collect();
        q.sort_unstable();
        q
    }

    /// Number of cyclic prime-power summands, `Σ_p r_p(G)`.
    pub fn total_rank(&self) -> usize {
        self.elementary_divisors().len()
    }

    pub fn p_rank(&self, p: u64) -> usize {
        self.0.invariants.iter().filter(|&&n| (n as u64).is_multiple_of(p)).count()
    }

    pub fn is_p_group(&self) -> bool {
        let primes: std::collections::BTreeSet<u64> = self
            .0
            .invariants
            .iter()
            .flat_map(|&n| prime_powers(n as u64).into_iter().map(|(p, _)| p))
            .collect();
        primes.len() <= 1
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement::ZERO
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> {
        (0..self.0.order).map(GroupElement::from_code)
    }

    pub fn nonzero_elements(&self) -> Vec<GroupElement> {
        self.elements().skip(1).collect()
    }

    pub fn coords(&self, g: GroupElement) -> Vec<u32> {
        let inner = &*self.0;
        (0..inner.invariants.len())
            .map(|i| ((g.code() / inner.strides[i]) % inner.invariants[i] as usize) as u32)
            .collect()
    }

    /// Encodes a coordinate tuple, reducing each entry modulo its invariant.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        let inner = &*self.0;
        if coords.len() != inner.invariants.len() {
            return invalid(format!("expected {} coordinates, got {}", inner.invariants.len(), coords.len()));
        }
        let code = coords
            .iter()
            .zip(&inner.invariants)
            .zip(&inner.strides)
            .map(|((&a, &n), &s)| a.rem_euclid(n as i64) as usize * s)
            .sum();
        Ok(GroupElement::from_code(code))
    }

    /// Like [`element`](Self::element) but rejects out-of-range coordinates.
    pub fn element_strict(&self, coords: &[i64]) -> Result<GroupElement> {
        for (i, (&a, &n)) in coords.iter().zip(self.invariants()).enumerate() {
            if a < 0 || a >= n as i64 {
                return invalid(format!("coordinate {i} = {a} out of range [0,{})", n));
            }
        }
        self.element(coords)
    }

    /// The `i`-th standard basis vector.
    pub fn unit(&self, i: usize) -> GroupElement {
        GroupElement::from_code(self.0.strides[i] % self.0.order.max(1))
    }

    #[inline]
    pub fn add(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        let inner = &*self.0;
        if let Some(t) = &inner.add {
            return GroupElement(t[a.code() * inner.order + b.code()]);
        }
        let mut code = 0;
        for i in 0..inner.invariants.len() {
            let n = inner.invariants[i] as usize;
            let s = inner.strides[i];
            let x = (a.code() / s) % n + (b.code() / s) % n;
            code += (x % n) * s;
        }
        GroupElement::from_code(code)
    }

    #[inline]
    pub fn neg(&self, a: GroupElement) -> GroupElement {
        GroupElement(self.0.neg[a.code()])
    }

    pub fn sub(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        self.add(a, self.neg(b))
    }

    /// `k·g` for any integer `k`.
    pub fn mul(&self, k: i64, g: GroupElement) -> GroupElement {
        let inner = &*self.0;
        let mut code = 0;
        for i in 0..inner.invariants.len() {
            let n = inner.invariants[i] as i64;
            let s = inner.strides[i];
            let a = ((g.code() / s) as i64) % n;
            code += ((k.rem_euclid(n) * a) % n) as usize * s;
        }
        GroupElement::from_code(code)
    }

    pub fn sum<I: IntoIterator<Item = GroupElement>>(&self, items: I) -> GroupElement {
        items.into_iter().fold(GroupElement::ZERO, |acc, g| self.add(acc, g))
    }

    /// `ord(g)`, the least `k ≥ 1` with `k·g = 0`.
    #[inline]
    pub fn element_order(&self, g: GroupElement) -> u32 {
        self.0.orders[g.code()]
    }

    pub fn d_star(&self) -> u64 {
        self.0.invariants.iter().map(|&n| n as u64 - 1).sum()
    }

    pub fn k_star(&self) -> Rational {
        let mut k = Rational::new(1, self.exponent() as i64);
        for q in self.elementary_divisors() {
            k += Rational::new(q as i64 - 1, q as i64);
        }
        k
    }

    /// Explicit element set of `⟨gens⟩`, sorted by code.
    pub fn subgroup(&self, gens: &[GroupElement]) -> Vec<GroupElement> {
        let mut seen = BitSet::new(self.order());
        seen.insert(0);
        let mut members = vec![GroupElement::ZERO];
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            for &g in gens {
                let y = self.add(x, g);
                if !seen.contains(y.code()) {
                    seen.insert(y.code());
                    members.push(y);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        members
    }

    /// Every subgroup, each as a sorted element list; ordered by size, then codes.
    pub fn subgroups(&self) -> Vec<Vec<GroupElement>> {
        let mut found: std::collections::BTreeSet<(usize, Vec<GroupElement>)> = Default::default();
        let trivial = vec![GroupElement::ZERO];
        let mut stack = vec![trivial.clone()];
        found.insert((1, trivial));
        while let Some(h) = stack.pop() {
            for g in self.elements() {
                if h.binary_search(&g).is_ok() {
                    continue;
                }
                let mut gens = h.clone();
                gens.push(g);
                let k = self.subgroup(&gens);
                if found.insert((k.len(), k.clone())) {
                    stack.push(k);
                }
            }
        }
        found.into_iter().map(|(_, k)| k).collect()
    }

    /// True when `elems` is a basis ordered like the invariant factors.
    pub fn is_standard_shaped_basis(&self, elems: &[GroupElement]) -> bool {
        elems.len() == self.rank()
            && elems
                .iter()
                .zip(self.invariants())
                .all(|(&e, &n)| self.element_order(e) == n)
            && self.subgroup(elems).len() == self.order()
    }

    pub fn standard_basis(&self) -> Vec<GroupElement> {
        (0..self.rank()).map(|i| self.unit(i)).collect()
    }

    /// All ordered bases `(e_1, e_2)` with `ord(e_i) = n_i` of a rank-two group.
    pub fn enumerate_bases_rank2(&self) -> Result<Vec<(GroupElement, GroupElement)>> {
        if self.rank() != 2 {
            return invalid(format!("{self} has rank {}, expected 2", self.rank()));
        }
        let (n1, n2) = (self.invariants()[0], self.invariants()[1]);
        let firsts: Vec<GroupElement> = self.elements().filter(|&g| self.element_order(g) == n1).collect();
        let seconds: Vec<GroupElement> = self.elements().filter(|&g| self.element_order(g) == n2).collect();
        let mut out = Vec::new();
        for &e1 in &firsts {
            let mut cyc = BitSet::new(self.order());
            let mut x = GroupElement::ZERO;
            for _ in 0..n1 {
                cyc.insert(x.code());
                x = self.add(x, e1);
            }
            for &e2 in &seconds {
                let mut y = e2;
                let mut direct = true;
                for _ in 1..n2 {
                    if cyc.contains(y.code()) {
                        direct = false;
                        break;
                    }
                    y = self.add(y, e2);
                }
                if direct {
                    out.push((e1, e2));
                }
            }
        }
        Ok(out)
    }

    /// Builds `K = ⟨gens⟩` and the projection onto `G/K` in invariant-factor form.
    pub fn subgroup_and_quotient(&self, gens: &[GroupElement]) -> QuotientMap {
        QuotientMap::new(self, gens)
    }

    pub fn format_element(&self, g: GroupElement) -> String {
        let c: Vec<String> = self.coords(g).iter().map(u32::to_string).collect();
        format!("({})", c.join(","))
    }

    /// Parses an element literal such as `(1,3)`.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let t = text.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Error::Parse { pos: 0, msg: format!("expected (a,...), found {t:?}") })?;
        let coords: Vec<i64> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|c| c.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { pos: 1, msg: e.to_string() })?
        };
        if coords.len() != self.rank() {
            return Err(Error::Parse { pos: 0, msg: format!("expected {} coordinates", self.rank()) });
        }
        self.element_strict(&coords)
            .map_err(|e| Error::Parse { pos: 0, msg: e.to_string() })
    }
}

/// Projection `G → G/K` for an explicit subgroup `K`.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    source: FiniteAbelianGroup,
    kernel: Vec<GroupElement>,
    target: FiniteAbelianGroup,
    proj: Vec<GroupElement>,
}

impl QuotientMap {
    fn new(g: &FiniteAbelianGroup, gens: &[GroupElement]) -> Self {
        let kernel = g.subgroup(gens);
        let n = g.order();
        // Coset ids in order of first (smallest) representative.
        let mut coset = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for x in g.elements() {
            if coset[x.code()] != usize::MAX {
                continue;
            }
            let id = reps.len();
            reps.push(x);
            for &k in &kernel {
                coset[g.add(x, k).code()] = id;
            }
        }
        let q = reps.len();
        let qadd = |a: usize, b: usize| coset[g.add(reps[a], reps[b]).code()];
        let qmul = |k: u64, a: usize| coset[g.mul(k as i64, reps[a]).code()];

        // Elementary divisors from |{x : p^k x = 0}| = p^{Σ min(k, e_i)}.
        let mut prime_power_list = Vec::new();
        for (p, _) in prime_powers(q as u64) {
            let mut prev = 0u32;
            let mut counts = Vec::new();
            let mut pk = p;
            loop {
                let killed = (0..q).filter(|&x| qmul(pk, x) == 0).count() as u64;
                let mut f = 0u32;
                let mut t = killed;
                while t > 1 {
                    t /= p;
                    f += 1;
                }
                if f == prev {
                    break;
                }
                counts.push(f - prev);
                prev = f;
                pk *= p;
            }
            // counts[k-1] = #{i : e_i ≥ k}
            for k in 0..counts.len() {
                let ge_k = counts[k];
                let ge_next = counts.get(k + 1).copied().unwrap_or(0);
                for _ in 0..(ge_k - ge_next) {
                    prime_power_list.push(p.pow(k as u32 + 1));
                }
            }
        }
        let target = FiniteAbelianGroup::new(&prime_power_list).expect("quotient of a valid group");
        let orders = target.invariants().to_vec();

        let qorder = |a: usize| {
            let mut k = 1;
            let mut x = a;
            while x != 0 {
                x = qadd(x, a);
                k += 1;
            }
            k as u32
        };
        let qorders: Vec<u32> = (0..q).map(qorder).collect();

        // Backtracking search for a basis of G/K matching the invariant factors,
        // largest order first.
        fn search(
            idx: usize,
            orders: &[u32],
            qorders: &[u32],
            span: &[bool],
            chosen: &mut Vec<usize>,
            qadd: &dyn Fn(usize, usize) -> usize,
        ) -> bool {
            if idx == orders.len() {
                return true;
            }
            let want = orders[orders.len() - 1 - idx];
            let q = qorders.len();
            for x in 0..q {
                if qorders[x] != want {
                    continue;
                }
                let mut y = x;
                let mut ok = true;
                for _ in 1..want {
                    if span[y] {
                        ok = false;
                        break;
                    }
                    y = qadd(y, x);
                }
                if !ok {
                    continue;
                }
                let mut next = vec![false; q];
                let members: Vec<usize> = (0..q).filter(|&s| span[s]).collect();
                let mut m = 0usize;
                for _ in 0..want {
                    for &s in &members {
                        next[qadd(s, m)] = true;
                    }
                    m = qadd(m, x);
                }
                chosen.push(x);
                if search(idx + 1, orders, qorders, &next, chosen, qadd) {
                    return true;
                }
                chosen.pop();
            }
            false
        }
        let mut span = vec![false; q];
        span[0] = true;
        let mut chosen = Vec::new();
        let found = search(0, &orders, &qorders, &span, &mut chosen, &qadd);
        debug_assert!(found);
        chosen.reverse();

        // Map each target coordinate tuple to its coset.
        let mut coset_to_target = vec![GroupElement::ZERO; q];
        for t in target.elements() {
            let c = target.coords(t);
            let mut acc = 0usize;
            for (i, &ci) in c.iter().enumerate() {
                acc = qadd(acc, qmul(ci as u64, chosen[i]));
            }
            coset_to_target[acc] = t;
        }
        let proj = (0..n).map(|x| coset_to_target[coset[x]]).collect();
        QuotientMap { source: g.clone(), kernel, target, proj }
    }

    pub fn source(&self) -> &FiniteAbelianGroup {
        &self.source
    }

    pub fn kernel(&self) -> &[GroupElement] {
        &self.kernel
    }

    pub fn target(&self) -> &FiniteAbelianGroup {
        &self.target
    }

    pub fn in_kernel(&self, g: GroupElement) -> bool {
        self.proj[g.code()].is_zero()
    }

    pub fn project(&self, g: GroupElement) -> GroupElement {
        self.proj[g.code()]
    }
}
