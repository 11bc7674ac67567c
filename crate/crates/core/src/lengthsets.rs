//! Structure of sets of lengths: arithmetical (multi)progression recognizers,
//! sweeps over all zero-sum sequences of bounded length, bounded membership
//! decisions for `ℒ(G)`, `Δ*(G)`, `m(G)`, and support decomposition.

use serde::{Deserialize, Serialize};

use crate::atoms::{davenport, enumerate_atoms};
use crate::error::{invalid, Error, Result};
use crate::factorize::{
    for_each_zero_sum, gap_gcd_by_mask, gcd_over_submasks, LengthSet, LengthSolver, DEFAULT_STATE_BUDGET,
};
use crate::group::{FiniteAbelianGroup, GroupElement, Rational};
use crate::sequence::Sequence;

/// A decomposition `L = y + (L' ∪ L* ∪ L'')` with `L*` an AMP starting at 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AampDescriptor {
    pub shift: i64,
    pub difference: u32,
    pub period: Vec<u32>,
    pub length: u32,
    pub bound: u32,
    /// `L'`, elements in `[−M, −1]`.
    pub lower: Vec<i64>,
    /// `L*`, with minimum 0.
    pub central: Vec<i64>,
    /// `L''`, elements in `max L* + [1, M]`.
    pub upper: Vec<i64>,
}

impl AampDescriptor {
    /// Rebuilds `L` from the parts.
    pub fn reconstruct(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self
            .lower
            .iter()
            .chain(&self.central)
            .chain(&self.upper)
            .map(|x| x + self.shift)
            .collect();
        v.sort_unstable();
        v
    }

    pub fn is_amp(&self) -> bool {
        self.bound == 0
    }
}

fn check_period(d: u32, period: &[u32]) -> Result<Vec<u32>> {
    if d == 0 {
        return invalid("difference must be positive");
    }
    let mut p = period.to_vec();
    p.sort_unstable();
    p.dedup();
    if p.first() != Some(&0) || p.last() != Some(&d) || p.iter().any(|&x| x > d) {
        return invalid(format!("period must satisfy {{0,{d}}} ⊆ 𝒟 ⊆ [0,{d}]"));
    }
    Ok(p)
}

fn residues(period: &[u32], d: u32) -> Vec<bool> {
    let mut r = vec![false; d as usize];
    for &x in period {
        r[(x % d) as usize] = true;
    }
    r
}

/// Whether `L = (min L + 𝒟 + dℤ) ∩ [min L, max L]`; returns the length `l` on success.
pub fn is_amp(l: &[i64], d: u32, period: &[u32]) -> Result<Option<u32>> {
    let period = check_period(d, period)?;
    let mut set = l.to_vec();
    set.sort_unstable();
    set.dedup();
    let (Some(&lo), Some(&hi)) = (set.first(), set.last()) else { return Ok(None) };
    let res = residues(&period, d);
    let expected: Vec<i64> = (lo..=hi).filter(|x| res[(x - lo).rem_euclid(d as i64) as usize]).collect();
    Ok((expected == set).then(|| ((hi - lo) / d as i64) as u32))
}

/// `L` is an arithmetical progression with difference `d`.
pub fn is_ap(l: &[i64], d: u32) -> bool {
    if d == 0 {
        return l.len() == 1;
    }
    let mut set = l.to_vec();
    set.sort_unstable();
    set.dedup();
    !set.is_empty() && set.windows(2).all(|w| w[1] - w[0] == d as i64)
}

/// Best decomposition for one choice of period (`None` = period forced by residues).
fn classify_inner(l: &[i64], d: u32, fixed: Option<&[u32]>) -> Option<AampDescriptor> {
    let mut set = l.to_vec();
    set.sort_unstable();
    set.dedup();
    let (&lo, &hi) = (set.first()?, set.last()?);
    let di = d as i64;
    let mut best: Option<(u32, usize, usize, Vec<u32>, AampDescriptor)> = None;
    for &y in &set {
        let mut period: Vec<u32> = match fixed {
            Some(p) => p.to_vec(),
            None => {
                let mut p: Vec<u32> = set.iter().map(|&x| (x - y).rem_euclid(di) as u32).collect();
                p.push(0);
                p.push(d);
                p.sort_unstable();
                p.dedup();
                p
            }
        };
        period.dedup();
        let res = residues(&period, d);
        if set.iter().any(|&x| !res[(x - y).rem_euclid(di) as usize]) {
            continue;
        }
        // Grow the central block [0, a] greedily: it must contain every point of 𝒟 + dℤ.
        let rel: Vec<i64> = set.iter().map(|&x| x - y).collect();
        let start = rel.iter().position(|&x| x == 0).expect("y in L");
        let mut end = start;
        let mut x = 0i64;
        loop {
            let mut nxt = x + 1;
            while !res[nxt.rem_euclid(di) as usize] {
                nxt += 1;
            }
            if end + 1 < rel.len() && rel[end + 1] == nxt {
                end += 1;
                x = nxt;
            } else {
                break;
            }
        }
        // Any prefix of that block is also admissible; try each end point.
        for e in start..=end {
            let a = rel[e];
            let m = ((y - lo).max(hi - y - a)) as u32;
            let central_len = e - start + 1;
            let key = (m, usize::MAX - central_len, period.len(), period.clone());
            let better = match &best {
                None => true,
                Some((bm, bc, bp, bper, _)) => key < (*bm, *bc, *bp, bper.clone()),
            };
            if better {
                let desc = AampDescriptor {
                    shift: y,
                    difference: d,
                    period: period.clone(),
                    length: (a / di) as u32,
                    bound: m,
                    lower: rel[..start].to_vec(),
                    central: rel[start..=e].to_vec(),
                    upper: rel[e + 1..].to_vec(),
                };
                best = Some((key.0, key.1, key.2, key.3, desc));
            }
        }
    }
    best.map(|b| b.4)
}

/// Decomposition of `L` as an AAMP with difference `d` and minimal bound `M`
/// (ties: largest `L*`, then smallest period, then lexicographically least period).
pub fn classify_aamp(l: &[i64], d: u32) -> Result<AampDescriptor> {
    if d == 0 {
        return invalid("difference must be positive");
    }
    classify_inner(l, d, None).ok_or_else(|| Error::InvalidArgument("empty set".into()))
}

/// Like [`classify_aamp`] with a fixed period; `None` if `L ⊄ y + 𝒟 + dℤ` for every `y ∈ L`.
pub fn classify_aamp_with_period(l: &[i64], d: u32, period: &[u32]) -> Result<Option<AampDescriptor>> {
    let period = check_period(d, period)?;
    Ok(classify_inner(l, d, Some(&period)))
}

/// `L` is an AAP with difference `d` and bound at most `m`.
pub fn is_aap(l: &[i64], d: u32, m: u32) -> Result<bool> {
    if d == 0 {
        return invalid("difference must be positive");
    }
    Ok(classify_inner(l, d, Some(&[0, d])).is_some_and(|desc| desc.bound <= m))
}

pub(crate) fn to_i64(l: &LengthSet) -> Vec<i64> {
    l.iter().map(|x| x as i64).collect()
}

/// Forms a set of lengths over the cyclic group of order five may take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiveForm {
    /// Arithmetical progression with difference 1.
    Interval,
    /// Arithmetical progression with difference 3.
    StepThree,
    /// AMP with difference 3 and period `{0,2,3}`.
    Period023,
    /// AMP with difference 3 and period `{0,1,3}`.
    Period013,
    NoMatch,
}

/// First matching form among: AP(1), AP(3), AMP{0,2,3}, AMP{0,1,3}.
pub fn classify_five_form(l: &LengthSet) -> FiveForm {
    let v = to_i64(l);
    if v.is_empty() {
        return FiveForm::NoMatch;
    }
    if is_ap(&v, 1) {
        FiveForm::Interval
    } else if is_ap(&v, 3) {
        FiveForm::StepThree
    } else if matches!(is_amp(&v, 3, &[0, 2, 3]), Ok(Some(_))) {
        FiveForm::Period023
    } else if matches!(is_amp(&v, 3, &[0, 1, 3]), Ok(Some(_))) {
        FiveForm::Period013
    } else {
        FiveForm::NoMatch
    }
}

/// Number of multisets of size `s` over `m` kinds.
fn multisets(m: usize, s: usize) -> u128 {
    if m == 0 {
        return (s == 0) as u128;
    }
    let (n, k) = ((s + m - 1) as u128, (m - 1) as u128);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// `(B, L(B))` for every zero-sum `B` over `G` (zero element included, empty
/// sequence included) with `|B| ≤ len_budget`, sorted by `B`.
/// With `dedup`, only the first `B` for each distinct `L` is kept.
pub fn system_up_to(group: &FiniteAbelianGroup, len_budget: usize, dedup: bool) -> Result<Vec<(Sequence, LengthSet)>> {
    system_up_to_with_budget(group, len_budget, dedup, DEFAULT_STATE_BUDGET)
}

pub fn system_up_to_with_budget(
    group: &FiniteAbelianGroup,
    len_budget: usize,
    dedup: bool,
    state_budget: usize,
) -> Result<Vec<(Sequence, LengthSet)>> {
    if len_budget > crate::factorize::MAX_SEQUENCE_LEN {
        return Err(Error::Resource(format!("length budget {len_budget} too large")));
    }
    let support = group.nonzero_elements();
    let mut zero_free: Vec<(Vec<u32>, u128)> = vec![(vec![0; support.len()], 1)];
    if !support.is_empty() && len_budget >= 2 {
        let atoms = enumerate_atoms(group, &support, Some(len_budget));
        let caps = vec![len_budget as u32; support.len()];
        let mut solver = LengthSolver::with_group(group, &support, &caps, atoms.atoms(), state_budget)?;
        for_each_zero_sum(group, &support, len_budget, &mut |mults| {
            let bits = solver.lengths_of_state(mults)?;
            zero_free.push((mults.to_vec(), bits));
            Ok(())
        })?;
    }
    let mut out = Vec::new();
    for (mults, bits) in zero_free {
        let base = Sequence::from_terms(group, support.iter().copied().zip(mults.iter().copied()));
        let l = LengthSet::from_bits(bits);
        for z in 0..=(len_budget - base.len()) {
            let b = base.product(&Sequence::power_of(group, GroupElement::ZERO, z as u32));
            out.push((b, l.shift(z as u32)));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    if dedup {
        let mut seen = std::collections::HashSet::new();
        out.retain(|(_, l)| seen.insert(l.clone()));
    }
    Ok(out)
}

/// One `z` of the membership search: `B = 0^z B'` with `|B'|` in `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchWindow {
    pub zeros: u32,
    pub lo: usize,
    pub hi: usize,
    /// Multisets over the nonzero elements with size in the window.
    pub candidates: u128,
    /// Zero-sum candidates whose set of lengths was compared.
    pub checked: u64,
}

/// Outcome of [`contains_length_set`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "lowercase")]
pub enum Membership {
    Yes { witness: Sequence, lengths: LengthSet },
    /// Every window was empty or exhausted without a match.
    No { windows: Vec<SearchWindow> },
    /// Some window exceeded the candidate budget.
    Unknown { windows: Vec<SearchWindow>, budget: u128 },
}

/// Default candidate budget for [`contains_length_set`].
pub const MEMBERSHIP_BUDGET: u128 = 50_000_000;

/// Decides `L ∈ ℒ(G)` by exhaustive search of the length windows forced by
/// `|B'|/D(G) ≤ min L(B')` and `max L(B') ≤ |B'|/2` for zero-free `B'`.
pub fn contains_length_set(group: &FiniteAbelianGroup, l: &LengthSet, budget: u128) -> Result<Membership> {
    let (Some(lo_l), Some(hi_l)) = (l.minimum(), l.maximum()) else {
        return invalid("set of lengths must be nonempty");
    };
    if lo_l == 0 {
        if l.len() == 1 {
            return Ok(Membership::Yes { witness: Sequence::empty(group), lengths: l.clone() });
        }
        return Ok(Membership::No { windows: Vec::new() });
    }
    if l.len() == 1 {
        let witness = Sequence::power_of(group, GroupElement::ZERO, lo_l);
        return Ok(Membership::Yes { witness, lengths: l.clone() });
    }
    let d = davenport(group);
    let support = group.nonzero_elements();
    let mut windows = Vec::new();
    for z in 0..lo_l {
        let lo = 2 * (hi_l - z) as usize;
        let hi = (lo_l - z) as usize * d;
        let candidates = if lo > hi { 0 } else { (lo..=hi).map(|s| multisets(support.len(), s)).sum() };
        windows.push(SearchWindow { zeros: z, lo, hi, candidates, checked: 0 });
    }
    if windows.iter().any(|w| w.candidates > budget) {
        return Ok(Membership::Unknown { windows, budget });
    }
    for w in windows.iter_mut() {
        if w.candidates == 0 {
            continue;
        }
        if w.hi > crate::factorize::MAX_SEQUENCE_LEN {
            return Err(Error::Resource(format!("window up to {} exceeds the supported length", w.hi)));
        }
        let target = l.unshift(w.zeros).expect("z below min L").to_bits().expect("small lengths");
        let atoms = enumerate_atoms(group, &support, Some(w.hi));
        let caps = vec![w.hi as u32; support.len()];
        let mut solver = LengthSolver::with_group(group, &support, &caps, atoms.atoms(), DEFAULT_STATE_BUDGET)?;
        let mut found: Option<Vec<u32>> = None;
        let mut checked = 0u64;
        let (lo, zeros) = (w.lo, w.zeros);
        let res = for_each_zero_sum(group, &support, w.hi, &mut |mults| {
            let size: u32 = mults.iter().sum();
            if (size as usize) < lo {
                return Ok(());
            }
            checked += 1;
            if solver.lengths_of_state(mults)? == target {
                found = Some(mults.to_vec());
                // stop the sweep early
                return Err(Error::Domain("found".into()));
            }
            Ok(())
        });
        w.checked = checked;
        if let Some(mults) = found {
            let base = Sequence::from_terms(group, support.iter().copied().zip(mults));
            let witness = base.product(&Sequence::power_of(group, GroupElement::ZERO, zeros));
            return Ok(Membership::Yes { witness, lengths: l.clone() });
        }
        res?;
    }
    Ok(Membership::No { windows })
}

/// `Δ*(G)` computed under a length bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaStar {
    pub values: Vec<u32>,
    pub bound: usize,
    /// Non-half-factorial supports for which no gap appeared within the bound.
    pub undetermined: usize,
}

/// Default group-order budget for the full-subset sweeps.
pub const SUBSET_SWEEP_ORDER: usize = 12;

struct SubsetSweep {
    /// minimum gap gcd per support mask (0 = none seen)
    min_delta: Vec<u32>,
    /// some atom over the mask has cross number ≠ 1
    non_hf: Vec<bool>,
    /// some atom over the mask has cross number < 1
    low_cross: Vec<bool>,
}

fn subset_sweep(group: &FiniteAbelianGroup, len_bound: Option<usize>, order_budget: usize) -> Result<(SubsetSweep, usize)> {
    if group.order() > order_budget {
        return Err(Error::Resource(format!("|G| = {} exceeds the sweep budget {order_budget}", group.order())));
    }
    let bound = len_bound.unwrap_or_else(|| 3 * davenport(group));
    let support = group.nonzero_elements();
    let n = support.len();
    let total: u128 = (0..=bound).map(|s| multisets(n, s)).sum();
    if total > DEFAULT_STATE_BUDGET as u128 {
        return Err(Error::Resource(format!("{total} sequences of length ≤ {bound} exceed the state budget")));
    }
    let mut min_delta = gap_gcd_by_mask(group, &support, bound, DEFAULT_STATE_BUDGET)?;
    gcd_over_submasks(&mut min_delta, n);
    let mut non_hf = vec![false; 1 << n];
    let mut low_cross = vec![false; 1 << n];
    let one = Rational::from_integer(1);
    for a in enumerate_atoms(group, &support, None).iter() {
        let mask = a
            .support()
            .iter()
            .map(|g| support.binary_search(g).expect("nonzero support"))
            .fold(0usize, |m, i| m | 1 << i);
        let k = a.cross_number();
        non_hf[mask] |= k != one;
        low_cross[mask] |= k < one;
    }
    for b in 0..n {
        for mask in 0..1usize << n {
            if mask >> b & 1 == 1 {
                non_hf[mask] |= non_hf[mask ^ (1 << b)];
                low_cross[mask] |= low_cross[mask ^ (1 << b)];
            }
        }
    }
    Ok((SubsetSweep { min_delta, non_hf, low_cross }, bound))
}

/// `Δ*(G) = {min Δ(G_0) : Δ(G_0) ≠ ∅}`, exact under the length bound
/// (`None` = `3·D(G)`).
pub fn delta_star(group: &FiniteAbelianGroup, len_bound: Option<usize>) -> Result<DeltaStar> {
    let (sweep, bound) = subset_sweep(group, len_bound, SUBSET_SWEEP_ORDER)?;
    let mut values = Vec::new();
    let mut undetermined = 0;
    for mask in 0..sweep.non_hf.len() {
        if !sweep.non_hf[mask] {
            continue;
        }
        match sweep.min_delta[mask] {
            0 => undetermined += 1,
            v => values.push(v),
        }
    }
    values.sort_unstable();
    values.dedup();
    Ok(DeltaStar { values, bound, undetermined })
}

/// `m(G)`: the largest `min Δ(G_0)` over non-half-factorial `G_0` all of
/// whose atoms have cross number at least 1 (`None` if there is no such `G_0`).
pub fn m_invariant(group: &FiniteAbelianGroup, len_bound: Option<usize>) -> Result<Option<u32>> {
    let (sweep, _) = subset_sweep(group, len_bound, SUBSET_SWEEP_ORDER)?;
    Ok((0..sweep.non_hf.len())
        .filter(|&m| sweep.non_hf[m] && !sweep.low_cross[m])
        .map(|m| sweep.min_delta[m])
        .filter(|&v| v > 0)
        .max())
}

/// Splits `G_0` (zero excluded) into the unique indecomposable parts with
/// `⟨G_0⟩ = ⊕ ⟨G_ν⟩`.
pub fn decompose_support(group: &FiniteAbelianGroup, g0: &[GroupElement]) -> Result<Vec<Vec<GroupElement>>> {
    let mut set = g0.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.is_empty() {
        return invalid("G_0 must be nonempty");
    }
    if set.iter().any(|g| g.is_zero()) {
        return invalid("G_0 must not contain 0");
    }
    if set.len() > 24 {
        return Err(Error::Resource("support too large for exhaustive bipartition search".into()));
    }
    let mut out = Vec::new();
    split(group, set, &mut out);
    out.sort();
    Ok(out)
}

fn split(group: &FiniteAbelianGroup, part: Vec<GroupElement>, out: &mut Vec<Vec<GroupElement>>) {
    let n = part.len();
    if n > 1 {
        let whole = group.subgroup(&part).len();
        // part[0] always stays in the first half
        for mask in 1..(1u32 << (n - 1)) {
            let (mut a, mut b) = (vec![part[0]], Vec::new());
            for (i, &g) in part.iter().enumerate().skip(1) {
                if mask >> (i - 1) & 1 == 1 {
                    b.push(g);
                } else {
                    a.push(g);
                }
            }
            if group.subgroup(&a).len() * group.subgroup(&b).len() == whole {
                split(group, a, out);
                split(group, b, out);
                return;
            }
        }
    }
    out.push(part);
}
