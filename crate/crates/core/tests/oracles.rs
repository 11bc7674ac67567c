//! Library results against naive reimplementations that share no code with it.

use std::collections::{BTreeSet, HashMap};

use zsl_core::atoms::{all_atoms, davenport, enumerate_atoms};
use zsl_core::factorize::{catenary_degree, enumerate_factorizations, lengths, rho_k, RHO_BUDGET};
use zsl_core::lengthsets::{classify_aamp, is_amp};
use zsl_core::{FiniteAbelianGroup, GroupElement, Sequence};

fn grp(s: &str) -> FiniteAbelianGroup {
    s.parse().unwrap()
}

/// Elements as coordinate vectors, added componentwise.
struct Naive {
    moduli: Vec<u32>,
    elems: Vec<Vec<u32>>,
}

impl Naive {
    fn new(moduli: &[u32]) -> Self {
        let mut elems = vec![vec![]];
        for &m in moduli {
            elems = elems.into_iter().flat_map(|e| (0..m).map(move |x| [e.clone(), vec![x]].concat())).collect();
        }
        Naive { moduli: moduli.to_vec(), elems }
    }

    fn add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter().zip(b).zip(&self.moduli).map(|((x, y), m)| (x + y) % m).collect()
    }

    fn is_zero(a: &[u32]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    fn sum(&self, seq: &[usize]) -> Vec<u32> {
        seq.iter().fold(vec![0; self.moduli.len()], |acc, &i| self.add(&acc, &self.elems[i]))
    }

    /// Minimal zero-sum: zero sum and no proper nonempty zero-sum sub-multiset
    /// (checked over all index subsets).
    fn is_minimal(&self, seq: &[usize]) -> bool {
        if seq.is_empty() || !Self::is_zero(&self.sum(seq)) {
            return false;
        }
        let n = seq.len();
        (1..(1u32 << n) - 1).all(|mask| {
            let sub: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| seq[i]).collect();
            !Self::is_zero(&self.sum(&sub))
        })
    }

    /// All minimal zero-sum multisets (as sorted index lists) up to `max_len`.
    fn atoms(&self, max_len: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        while let Some(s) = stack.pop() {
            if self.is_minimal(&s) {
                out.insert(s.clone());
                continue;
            }
            if s.len() == max_len {
                continue;
            }
            let start = s.last().copied().unwrap_or(0);
            for i in start..self.elems.len() {
                let mut t = s.clone();
                t.push(i);
                stack.push(t);
            }
        }
        out
    }
}

fn to_naive(naive: &Naive, g: &FiniteAbelianGroup, s: &Sequence) -> Vec<usize> {
    let mut v: Vec<usize> = s
        .elements()
        .map(|x| naive.elems.iter().position(|e| *e == g.coords(x)).unwrap())
        .collect();
    v.sort_unstable();
    v
}

const SMALL: [&str; 9] = ["C2", "C3", "C4", "C5", "C6", "C2xC2", "C2xC4", "C3xC3", "C2xC2xC2"];

#[test]
fn atoms_match_naive_enumeration() {
    for name in SMALL {
        let g = grp(name);
        let naive = Naive::new(g.invariants());
        let bound = g.order();
        let want = naive.atoms(bound);
        let got: BTreeSet<Vec<usize>> = all_atoms(&g).iter().map(|a| to_naive(&naive, &g, a)).collect();
        assert_eq!(got, want, "{name}");
        let d_naive = want.iter().map(Vec::len).max().unwrap();
        assert_eq!(davenport(&g), d_naive, "{name}");
    }
}

/// `L(B)` by recursion on "remove an atom containing the first element".
fn naive_lengths(atoms: &[Vec<usize>], b: &[usize], memo: &mut HashMap<Vec<usize>, BTreeSet<u32>>) -> BTreeSet<u32> {
    if b.is_empty() {
        return BTreeSet::from([0]);
    }
    if let Some(r) = memo.get(b) {
        return r.clone();
    }
    let mut out = BTreeSet::new();
    for a in atoms.iter().filter(|a| a.contains(&b[0])) {
        let mut rest = b.to_vec();
        if a.iter().all(|x| match rest.iter().position(|y| y == x) {
            Some(p) => {
                rest.remove(p);
                true
            }
            None => false,
        }) {
            out.extend(naive_lengths(atoms, &rest, memo).into_iter().map(|l| l + 1));
        }
    }
    memo.insert(b.to_vec(), out.clone());
    out
}

/// Deterministic pseudo-random zero-sum sequences (no external RNG needed here).
fn lcg_sequences(g: &FiniteAbelianGroup, count: usize, max_len: usize, mut state: u64) -> Vec<Sequence> {
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as usize
    };
    (0..count)
        .map(|_| {
            let len = 1 + next() % max_len;
            let mut v: Vec<GroupElement> = (0..len - 1).map(|_| GroupElement::from_code(next() % g.order())).collect();
            v.push(g.neg(g.sum(v.iter().copied())));
            Sequence::from_elements(g, v)
        })
        .collect()
}

#[test]
fn lengths_match_naive_recursion() {
    for name in SMALL {
        let g = grp(name);
        let naive = Naive::new(g.invariants());
        let atoms: Vec<Vec<usize>> = naive.atoms(g.order()).into_iter().collect();
        let mut memo = HashMap::new();
        for b in lcg_sequences(&g, 60, 12, 7 + g.order() as u64) {
            let want = naive_lengths(&atoms, &to_naive(&naive, &g, &b), &mut memo);
            let got: BTreeSet<u32> = lengths(&b).unwrap().iter().collect();
            assert_eq!(got, want, "{name} {b}");
        }
    }
}

#[test]
fn length_bounds_hold() {
    for name in SMALL {
        let g = grp(name);
        let d = davenport(&g) as u32;
        for b in lcg_sequences(&g, 80, 14, 99) {
            let l = lengths(&b).unwrap();
            let zeros = b.multiplicity(GroupElement::ZERO);
            let rest = b.len() as u32 - zeros;
            let (lo, hi) = (l.minimum().unwrap(), l.maximum().unwrap());
            assert!(lo * d >= rest + zeros * d, "{b}: min {lo}");
            assert!(hi <= zeros + rest / 2, "{b}: max {hi}");
        }
    }
}

#[test]
fn cyclic_norm_bounds_hold() {
    for n in [5u64, 6, 7] {
        let g = FiniteAbelianGroup::cyclic(n).unwrap();
        let gen = g.unit(0);
        for b in lcg_sequences(&g, 60, 12, n) {
            if b.multiplicity(GroupElement::ZERO) > 0 {
                continue;
            }
            let norm = b.g_norm(gen).unwrap() as u32;
            let l = lengths(&b).unwrap();
            assert!(l.minimum().unwrap() * (n as u32 - 1) >= norm);
            assert!(l.maximum().unwrap() <= norm);
        }
    }
}

#[test]
fn catenary_exceeds_largest_gap() {
    for name in ["C3", "C4", "C5", "C2xC2", "C2xC4"] {
        let g = grp(name);
        for b in lcg_sequences(&g, 40, 10, 3) {
            let l = lengths(&b).unwrap();
            if l.len() < 2 {
                continue;
            }
            let atoms = enumerate_atoms(&g, &b.support(), Some(b.len()));
            let c = catenary_degree(&b, &atoms, 200_000, false).unwrap();
            let gap = l.delta().into_iter().max().unwrap() as usize;
            assert!(c.exact && c.value >= 2 + gap, "{name} {b}: c = {}, gap {gap}", c.value);
        }
    }
}

#[test]
fn factorizations_are_distinct_and_multiply_back() {
    let g = grp("C2xC4");
    for b in lcg_sequences(&g, 30, 10, 11) {
        let atoms = enumerate_atoms(&g, &b.support(), Some(b.len()));
        let f = enumerate_factorizations(&b, &atoms, 100_000).unwrap();
        let mut seen = BTreeSet::new();
        for z in &f.items {
            let prod = z.atoms().iter().fold(Sequence::empty(&g), |acc, a| acc.product(a));
            assert_eq!(prod, b);
            assert!(z.atoms().iter().all(Sequence::is_atom));
            assert!(seen.insert(z.clone()), "duplicate {z}");
        }
    }
}

/// `ρ_k(G)` by scanning sequences that are products of `k` atoms.
fn naive_rho(g: &FiniteAbelianGroup, k: usize) -> usize {
    let atoms: Vec<Sequence> = all_atoms(g).iter().filter(|a| a.len() > 1).cloned().collect();
    let mut best = k;
    let mut pick = vec![0usize; k];
    loop {
        let b = pick.iter().fold(Sequence::empty(g), |acc, &i| acc.product(&atoms[i]));
        best = best.max(lengths(&b).unwrap().maximum().unwrap() as usize);
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] + 1 < atoms.len() {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[i];
                }
                break;
            }
        }
    }
}

#[test]
fn rho_matches_product_scan() {
    for name in ["C3", "C4", "C5", "C2xC2", "C6"] {
        let g = grp(name);
        assert_eq!(rho_k(&g, 2, RHO_BUDGET).unwrap(), naive_rho(&g, 2), "{name}");
    }
    for name in ["C3", "C4"] {
        let g = grp(name);
        assert_eq!(rho_k(&g, 3, RHO_BUDGET).unwrap(), naive_rho(&g, 3), "{name}");
    }
}

/// Minimal AAMP bound by trying every period, start and end of `L*`.
fn naive_min_bound(l: &[i64], d: u32) -> u32 {
    let (lo, hi) = (*l.iter().min().unwrap(), *l.iter().max().unwrap());
    let inner: Vec<u32> = (1..d).collect();
    let mut best = u32::MAX;
    for mask in 0..1u32 << inner.len() {
        let period: Vec<u32> =
            [0].into_iter().chain(inner.iter().copied().filter(|&p| mask >> (p - 1) & 1 == 1)).chain([d]).collect();
        for &y in l {
            let fits = |x: i64| {
                let r = (x - y).rem_euclid(d as i64) as u32;
                period.iter().any(|&p| p % d == r)
            };
            if !l.iter().all(|&x| fits(x)) {
                continue;
            }
            for &top in l.iter().filter(|&&t| t >= y) {
                if (y..=top).all(|x| l.contains(&x) == fits(x)) {
                    best = best.min((y - lo).max(hi - top) as u32);
                }
            }
        }
    }
    best
}

#[test]
fn aamp_bound_is_minimal() {
    let mut state = 12345u64;
    for _ in 0..400 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
        let d = 1 + (state >> 60) as u32 % 4;
        let bits = (state >> 20) & 0xfff;
        let l: Vec<i64> = (0..12).filter(|i| bits >> i & 1 == 1).map(|i| i + 3).collect();
        if l.is_empty() {
            continue;
        }
        let desc = classify_aamp(&l, d).unwrap();
        assert_eq!(desc.bound, naive_min_bound(&l, d), "{l:?} d={d}");
        assert_eq!(desc.reconstruct(), l);
    }
}

#[test]
fn amp_examples() {
    assert_eq!(is_amp(&[2, 4, 5], 3, &[0, 2, 3]).unwrap(), Some(1));
    assert_eq!(is_amp(&[2, 4, 5], 1, &[0, 1]).unwrap(), None);
    assert_eq!(is_amp(&[7], 5, &[0, 5]).unwrap(), Some(0));
    assert!(is_amp(&[1, 2], 3, &[1, 3]).is_err());
}

#[test]
fn subgroup_counts() {
    // number of subgroups, by hand
    for (name, count) in [("C6", 4), ("C2xC2", 5), ("C2xC4", 8), ("C3xC3", 6), ("C2xC2xC2", 16), ("C4xC4", 15)] {
        assert_eq!(grp(name).subgroups().len(), count, "{name}");
    }
}
