//! Atoms (minimal zero-sum sequences), Davenport constants, and relative
//! block monoids `ℬ_K(G)` with the transfer to `ℬ(G/K)`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::words_for;
use crate::error::{domain, Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, QuotientMap, Rational};
use crate::sequence::Sequence;

/// A complete list of atoms over a support, up to a length bound.
#[derive(Clone, Debug)]
pub struct AtomSet {
    group: FiniteAbelianGroup,
    support: Vec<GroupElement>,
    kernel: Vec<GroupElement>,
    max_len: usize,
    atoms: Vec<Sequence>,
}

impl AtomSet {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// Sorted support the atoms were drawn from.
    pub fn support(&self) -> &[GroupElement] {
        &self.support
    }

    /// Subgroup `K` of the monoid `ℬ_K(G)` these are atoms of (`{0}` normally).
    pub fn kernel(&self) -> &[GroupElement] {
        &self.kernel
    }

    /// Every atom of length at most this bound is present.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Atoms in canonical order.
    pub fn atoms(&self) -> &[Sequence] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sequence> {
        self.atoms.iter()
    }

    pub fn longest(&self) -> usize {
        self.atoms.iter().map(Sequence::len).max().unwrap_or(0)
    }

    /// Wraps an explicit list; completeness up to `max_len` is the caller's claim.
    pub fn from_list(group: &FiniteAbelianGroup, mut atoms: Vec<Sequence>, max_len: usize) -> AtomSet {
        atoms.sort_unstable();
        atoms.dedup();
        let mut support: Vec<GroupElement> = atoms.iter().flat_map(|a| a.terms().iter().map(|&(g, _)| g)).collect();
        support.sort_unstable();
        support.dedup();
        AtomSet { group: group.clone(), support, kernel: vec![GroupElement::ZERO], max_len, atoms }
    }

    fn restricted(&self, max_len: usize) -> AtomSet {
        AtomSet {
            group: self.group.clone(),
            support: self.support.clone(),
            kernel: self.kernel.clone(),
            max_len,
            atoms: self.atoms.iter().filter(|a| a.len() <= max_len).cloned().collect(),
        }
    }

    /// Atoms dividing `b`, in canonical order.
    pub fn dividing(&self, b: &Sequence) -> Vec<Sequence> {
        self.atoms.iter().filter(|a| a.divides(b)).cloned().collect()
    }
}

/// Depth-first generator of minimal sequences whose image sums to zero in a
/// target group: every atom is emitted once as `T·g` with `T` zero-sum free
/// (in the target) and `g` its largest entry.
struct Enumerator<'a> {
    target: &'a FiniteAbelianGroup,
    images: Vec<GroupElement>,
    max_len: usize,
    words: usize,
}

impl Enumerator<'_> {
    fn run_from(&self, first: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let g = self.images[first];
        if g.is_zero() {
            out.push(vec![first]);
            return out;
        }
        if self.max_len < 2 {
            return out;
        }
        let mut levels = vec![0u64; self.words * self.max_len];
        levels[g.code() >> 6] |= 1 << (g.code() & 63);
        let mut stack = vec![first];
        self.dfs(&mut stack, g, &mut levels, 0, &mut out);
        out
    }

    fn dfs(&self, stack: &mut Vec<usize>, sigma: GroupElement, levels: &mut [u64], level: usize, out: &mut Vec<Vec<usize>>) {
        let t = self.target;
        let w = self.words;
        let depth = stack.len();
        let start = *stack.last().expect("nonempty prefix");
        for i in start..self.images.len() {
            let g = self.images[i];
            let s2 = t.add(sigma, g);
            if s2.is_zero() {
                let mut atom = stack.clone();
                atom.push(i);
                out.push(atom);
                continue;
            }
            if depth + 2 > self.max_len || g.is_zero() {
                continue;
            }
            let (cur, rest) = levels.split_at_mut((level + 1) * w);
            let cur = &cur[level * w..];
            let neg = t.neg(g).code();
            if cur[neg >> 6] >> (neg & 63) & 1 == 1 {
                continue;
            }
            let next = &mut rest[..w];
            next.copy_from_slice(cur);
            next[g.code() >> 6] |= 1 << (g.code() & 63);
            for x in crate::bits::iter_words(cur) {
                let y = t.add(GroupElement::from_code(x), g).code();
                next[y >> 6] |= 1 << (y & 63);
            }
            stack.push(i);
            self.dfs(stack, s2, levels, level + 1, out);
            stack.pop();
        }
    }
}

fn enumerate_projected(
    group: &FiniteAbelianGroup,
    support: &[GroupElement],
    target: &FiniteAbelianGroup,
    project: impl Fn(GroupElement) -> GroupElement,
    max_len: usize,
) -> Vec<Sequence> {
    let e = Enumerator {
        target,
        images: support.iter().map(|&g| project(g)).collect(),
        max_len,
        words: words_for(target.order()),
    };
    let mut atoms: Vec<Sequence> = (0..support.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            e.run_from(i).into_iter().map(|idx| {
                let mut terms: Vec<(GroupElement, u32)> = Vec::new();
                for j in idx {
                    match terms.last_mut() {
                        Some((h, m)) if *h == support[j] => *m += 1,
                        _ => terms.push((support[j], 1)),
                    }
                }
                Sequence::from_terms(group, terms)
            })
        })
        .collect();
    atoms.par_sort_unstable();
    atoms
}

fn normalized_support(support: &[GroupElement]) -> Vec<GroupElement> {
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    invariants: Vec<u32>,
    kernel: Vec<u32>,
    support: Vec<u32>,
}

fn memory_cache() -> &'static Mutex<HashMap<CacheKey, Arc<AtomSet>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<AtomSet>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn disk_dir() -> &'static RwLock<Option<PathBuf>> {
    static DIR: OnceLock<RwLock<Option<PathBuf>>> = OnceLock::new();
    DIR.get_or_init(|| RwLock::new(None))
}

/// Enables (or disables) the on-disk atom cache rooted at `dir`.
pub fn set_cache_dir(dir: Option<PathBuf>) {
    *disk_dir().write().expect("cache dir lock") = dir;
}

pub fn cache_dir() -> Option<PathBuf> {
    disk_dir().read().expect("cache dir lock").clone()
}

/// Drops every in-process cached atom set.
pub fn clear_memory_cache() {
    memory_cache().lock().expect("atom cache lock").clear();
}

#[derive(Serialize, Deserialize)]
struct DiskEntry {
    group: String,
    kernel: Vec<String>,
    support: Vec<String>,
    max_len: usize,
    atoms: Vec<String>,
}

fn disk_path(key: &CacheKey, group: &FiniteAbelianGroup) -> Option<PathBuf> {
    let dir = cache_dir()?;
    let mut h = Sha256::new();
    for c in &key.kernel {
        h.update(c.to_le_bytes());
    }
    h.update(b"|");
    for c in &key.support {
        h.update(c.to_le_bytes());
    }
    let name = hex::encode(&h.finalize()[..12]);
    Some(dir.join(group.to_string()).join(format!("{name}.json")))
}

fn disk_load(key: &CacheKey, group: &FiniteAbelianGroup, max_len: usize) -> Option<AtomSet> {
    let path = disk_path(key, group)?;
    let text = std::fs::read_to_string(path).ok()?;
    let entry: DiskEntry = serde_json::from_str(&text).ok()?;
    if entry.max_len < max_len {
        return None;
    }
    let support: Vec<GroupElement> = entry.support.iter().map(|s| group.parse_element(s)).collect::<Result<_>>().ok()?;
    let kernel: Vec<GroupElement> = entry.kernel.iter().map(|s| group.parse_element(s)).collect::<Result<_>>().ok()?;
    if support.iter().map(|g| g.code() as u32).collect::<Vec<_>>() != key.support
        || kernel.iter().map(|g| g.code() as u32).collect::<Vec<_>>() != key.kernel
    {
        return None;
    }
    let atoms = entry.atoms.iter().map(|s| Sequence::parse(s, group)).collect::<Result<_>>().ok()?;
    Some(AtomSet { group: group.clone(), support, kernel, max_len: entry.max_len, atoms })
}

fn disk_store(key: &CacheKey, set: &AtomSet) {
    let Some(path) = disk_path(key, &set.group) else { return };
    let g = &set.group;
    let entry = DiskEntry {
        group: g.to_string(),
        kernel: set.kernel.iter().map(|&x| g.format_element(x)).collect(),
        support: set.support.iter().map(|&x| g.format_element(x)).collect(),
        max_len: set.max_len,
        atoms: set.atoms.iter().map(Sequence::to_string).collect(),
    };
    if let Some(parent) = path.parent() {
        if std::fs::create_dir_all(parent).is_err() {
            return;
        }
    }
    // A failed write only costs a recomputation later.
    if let Ok(text) = serde_json::to_string(&entry) {
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        if std::fs::write(&tmp, text).is_ok() {
            let _ = std::fs::rename(&tmp, &path);
        }
    }
}

fn cached_atoms(
    group: &FiniteAbelianGroup,
    quotient: Option<&QuotientMap>,
    support: &[GroupElement],
    max_len: Option<usize>,
) -> Arc<AtomSet> {
    let support = normalized_support(support);
    let kernel: Vec<GroupElement> = quotient.map_or_else(|| vec![GroupElement::ZERO], |q| q.kernel().to_vec());
    let auto = quotient.map_or(group.order(), |q| q.target().order());
    let bound = max_len.unwrap_or(auto).min(auto.max(1));
    let key = CacheKey {
        invariants: group.invariants().to_vec(),
        kernel: kernel.iter().map(|g| g.code() as u32).collect(),
        support: support.iter().map(|g| g.code() as u32).collect(),
    };
    if let Some(hit) = memory_cache().lock().expect("atom cache lock").get(&key) {
        if hit.max_len >= bound {
            return if hit.max_len == bound { hit.clone() } else { Arc::new(hit.restricted(bound)) };
        }
    }
    let computed = disk_load(&key, group, bound).unwrap_or_else(|| {
        let atoms = match quotient {
            None => enumerate_projected(group, &support, group, |g| g, bound),
            Some(q) => enumerate_projected(group, &support, q.target(), |g| q.project(g), bound),
        };
        let set = AtomSet { group: group.clone(), support: support.clone(), kernel: kernel.clone(), max_len: bound, atoms };
        disk_store(&key, &set);
        set
    });
    let stored = Arc::new(computed);
    let mut cache = memory_cache().lock().expect("atom cache lock");
    let entry = cache.entry(key).or_insert_with(|| stored.clone());
    if entry.max_len < stored.max_len {
        *entry = stored.clone();
    }
    if stored.max_len == bound {
        stored
    } else {
        Arc::new(stored.restricted(bound))
    }
}

/// All atoms with support in `support` and length at most `max_len`
/// (`None` = `|G|`, which bounds every atom).
pub fn enumerate_atoms(group: &FiniteAbelianGroup, support: &[GroupElement], max_len: Option<usize>) -> Arc<AtomSet> {
    cached_atoms(group, None, support, max_len)
}

/// Atoms over every element of `G` including `0`.
pub fn all_atoms(group: &FiniteAbelianGroup) -> Arc<AtomSet> {
    let all: Vec<GroupElement> = group.elements().collect();
    enumerate_atoms(group, &all, None)
}

/// `D(G)`, the maximal length of an atom.
pub fn davenport(group: &FiniteAbelianGroup) -> usize {
    if group.order() == 1 {
        return 1;
    }
    enumerate_atoms(group, &group.nonzero_elements(), None).longest()
}

/// `d(G)`, the maximal length of a zero-sum free sequence.
pub fn davenport_small(group: &FiniteAbelianGroup) -> usize {
    davenport(group) - 1
}

/// Default group-order budget for [`cross_number_max`].
pub const CROSS_NUMBER_BUDGET: usize = 16;

/// `K(G)`, the largest cross number of an atom (with `k(0) = 1`).
pub fn cross_number_max(group: &FiniteAbelianGroup, budget: usize) -> Result<Rational> {
    if group.order() > budget {
        return Err(Error::Resource(format!("|G| = {} exceeds the budget {budget}", group.order())));
    }
    Ok(all_atoms(group)
        .iter()
        .map(Sequence::cross_number)
        .max()
        .unwrap_or_else(|| Rational::from_integer(1)))
}

/// Atoms of length exactly `D(G)`.
pub fn atoms_of_max_length(group: &FiniteAbelianGroup) -> AtomSet {
    let d = davenport(group);
    let support: Vec<GroupElement> = if group.order() == 1 { vec![GroupElement::ZERO] } else { group.nonzero_elements() };
    let set = enumerate_atoms(group, &support, None);
    AtomSet {
        group: group.clone(),
        support: set.support.clone(),
        kernel: set.kernel.clone(),
        max_len: set.max_len,
        atoms: set.atoms.iter().filter(|a| a.len() == d).cloned().collect(),
    }
}

/// The monoid `ℬ_K(G) = {S : σ(S) ∈ K}` for a subgroup `K`.
#[derive(Clone, Debug)]
pub struct RelativeMonoid {
    quotient: QuotientMap,
}

impl RelativeMonoid {
    /// `K = ⟨gens⟩`.
    pub fn new(group: &FiniteAbelianGroup, gens: &[GroupElement]) -> Self {
        RelativeMonoid { quotient: group.subgroup_and_quotient(gens) }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.quotient.source()
    }

    pub fn kernel(&self) -> &[GroupElement] {
        self.quotient.kernel()
    }

    pub fn quotient(&self) -> &QuotientMap {
        &self.quotient
    }

    pub fn contains(&self, s: &Sequence) -> bool {
        self.quotient.in_kernel(s.sum())
    }

    /// Atoms of `ℬ_K(G)` over `support` (`None` = all of `G`).
    pub fn atoms(&self, support: Option<&[GroupElement]>, max_len: Option<usize>) -> Arc<AtomSet> {
        let g = self.group();
        let all: Vec<GroupElement>;
        let support = match support {
            Some(s) => s,
            None => {
                all = g.elements().collect();
                &all
            }
        };
        cached_atoms(g, Some(&self.quotient), support, max_len)
    }

    /// `D_K(G)`, the maximal length of an atom of `ℬ_K(G)`.
    pub fn davenport(&self) -> usize {
        self.atoms(None, None).longest()
    }

    /// `θ(g_1⋯g_l) = (g_1+K)⋯(g_l+K)` over `G/K`.
    pub fn transfer(&self, s: &Sequence) -> Result<Sequence> {
        if !self.contains(s) {
            return domain(format!("σ({s}) is not in K"));
        }
        let q = &self.quotient;
        Ok(Sequence::from_terms(q.target(), s.terms().iter().map(|&(g, m)| (q.project(g), m))))
    }
}

/// Relative atoms over all of `G` up to `max_len`.
pub fn relative_atoms(r: &RelativeMonoid, max_len: Option<usize>) -> Arc<AtomSet> {
    r.atoms(None, max_len)
}

pub fn davenport_relative(r: &RelativeMonoid) -> usize {
    r.davenport()
}

pub fn transfer_theta(r: &RelativeMonoid, s: &Sequence) -> Result<Sequence> {
    r.transfer(s)
}
