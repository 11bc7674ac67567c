//! Sequences over a group: finite multisets of elements.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{domain, Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, GroupSpec, Rational};

/// A finite multiset of group elements, kept in canonical form: distinct
/// elements sorted by code with positive multiplicities.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    group: FiniteAbelianGroup,
    terms: Vec<(GroupElement, u32)>,
}

impl Sequence {
    pub fn empty(group: &FiniteAbelianGroup) -> Self {
        Sequence { group: group.clone(), terms: Vec::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (GroupElement, u32)>>(group: &FiniteAbelianGroup, terms: I) -> Self {
        let mut v: Vec<(GroupElement, u32)> = terms.into_iter().filter(|&(_, m)| m > 0).collect();
        v.sort_unstable_by_key(|&(g, _)| g);
        let mut merged: Vec<(GroupElement, u32)> = Vec::with_capacity(v.len());
        for (g, m) in v {
            match merged.last_mut() {
                Some((h, k)) if *h == g => *k += m,
                _ => merged.push((g, m)),
            }
        }
        Sequence { group: group.clone(), terms: merged }
    }

    pub fn from_elements<I: IntoIterator<Item = GroupElement>>(group: &FiniteAbelianGroup, elems: I) -> Self {
        Self::from_terms(group, elems.into_iter().map(|g| (g, 1)))
    }

    /// `g^m`.
    pub fn power_of(group: &FiniteAbelianGroup, g: GroupElement, m: u32) -> Self {
        Self::from_terms(group, [(g, m)])
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// Distinct elements with their multiplicities, sorted by code.
    pub fn terms(&self) -> &[(GroupElement, u32)] {
        &self.terms
    }

    /// Entries with repetition, in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        self.terms.iter().flat_map(|&(g, m)| std::iter::repeat_n(g, m as usize))
    }

    pub fn len(&self) -> usize {
        self.terms.iter().map(|&(_, m)| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Vec<GroupElement> {
        self.terms.iter().map(|&(g, _)| g).collect()
    }

    pub fn multiplicity(&self, g: GroupElement) -> u32 {
        self.terms
            .binary_search_by_key(&g, |&(h, _)| h)
            .map(|i| self.terms[i].1)
            .unwrap_or(0)
    }

    /// Height `h(S)`, the largest multiplicity.
    pub fn height(&self) -> u32 {
        self.terms.iter().map(|&(_, m)| m).max().unwrap_or(0)
    }

    pub fn sum(&self) -> GroupElement {
        let grp = &self.group;
        self.terms
            .iter()
            .fold(GroupElement::ZERO, |acc, &(g, m)| grp.add(acc, grp.mul(m as i64, g)))
    }

    pub fn is_zero_sum(&self) -> bool {
        self.sum().is_zero()
    }

    pub fn product(&self, other: &Sequence) -> Sequence {
        Self::from_terms(&self.group, self.terms.iter().chain(&other.terms).copied())
    }

    /// `S^k`.
    pub fn pow(&self, k: u32) -> Sequence {
        Self::from_terms(&self.group, self.terms.iter().map(|&(g, m)| (g, m * k)))
    }

    pub fn divides(&self, other: &Sequence) -> bool {
        self.terms.iter().all(|&(g, m)| other.multiplicity(g) >= m)
    }

    /// `T·S^{-1}` for `S | T` (here `self = T`).
    pub fn quotient(&self, divisor: &Sequence) -> Result<Sequence> {
        if !divisor.divides(self) {
            return domain(format!("{divisor} does not divide {self}"));
        }
        Ok(Self::from_terms(
            &self.group,
            self.terms.iter().map(|&(g, m)| (g, m - divisor.multiplicity(g))),
        ))
    }

    pub fn gcd(&self, other: &Sequence) -> Sequence {
        Self::from_terms(&self.group, self.terms.iter().map(|&(g, m)| (g, m.min(other.multiplicity(g)))))
    }

    /// `−S`.
    pub fn negate(&self) -> Sequence {
        Self::from_terms(&self.group, self.terms.iter().map(|&(g, m)| (self.group.neg(g), m)))
    }

    /// Removes one copy of `g`; `None` if absent.
    pub fn without_one(&self, g: GroupElement) -> Option<Sequence> {
        let i = self.terms.binary_search_by_key(&g, |&(h, _)| h).ok()?;
        let mut terms = self.terms.clone();
        if terms[i].1 == 1 {
            terms.remove(i);
        } else {
            terms[i].1 -= 1;
        }
        Some(Sequence { group: self.group.clone(), terms })
    }

    /// `Σ(S)`: sums of nonempty sub-multisets, as a bit set over element codes.
    pub fn subsequence_sums(&self) -> BitSet {
        let grp = &self.group;
        let mut reach = BitSet::new(grp.order());
        for g in self.elements() {
            let mut next = reach.clone();
            next.insert(g.code());
            for x in reach.iter() {
                next.insert(grp.add(GroupElement::from_code(x), g).code());
            }
            if next == reach {
                // further copies of g cannot add anything new
                break;
            }
            reach = next;
        }
        reach
    }

    /// Sorted list form of [`subsequence_sums`](Self::subsequence_sums).
    pub fn subsequence_sum_set(&self) -> Vec<GroupElement> {
        self.subsequence_sums().iter().map(GroupElement::from_code).collect()
    }

    pub fn is_zero_sum_free(&self) -> bool {
        !self.subsequence_sums().contains(0)
    }

    /// Minimal zero-sum test. Removing one copy of any single entry `h` must
    /// leave a zero-sum free sequence; one entry suffices because a proper
    /// zero-sum `T` and its complement both avoid, or the complement lies in,
    /// `S·h^{-1}`.
    pub fn is_atom(&self) -> bool {
        if self.is_empty() || !self.is_zero_sum() {
            return false;
        }
        let (h, _) = self.terms[self.terms.len() - 1];
        self.without_one(h).expect("h in support").is_zero_sum_free()
    }

    /// Cross number `k(S) = Σ 1/ord(g)`.
    pub fn cross_number(&self) -> Rational {
        self.terms.iter().fold(Rational::from_integer(0), |acc, &(g, m)| {
            acc + Rational::new(m as i64, self.group.element_order(g) as i64)
        })
    }

    /// `‖S‖_g`: each entry written as `n_i·g` with `n_i ∈ [1, ord g]`, summed and divided by `ord g`.
    pub fn g_norm(&self, g: GroupElement) -> Result<u64> {
        let grp = &self.group;
        let n = grp.element_order(g) as u64;
        let mut total = 0u64;
        for &(h, m) in &self.terms {
            let mut x = g;
            let mut k = 1u64;
            while x != h && k <= n {
                x = grp.add(x, g);
                k += 1;
            }
            if x != h {
                return domain(format!("{} is not in the subgroup generated by {}", grp.format_element(h), grp.format_element(g)));
            }
            total += k * m as u64;
        }
        if !total.is_multiple_of(n) {
            return domain("sequence is not zero-sum");
        }
        Ok(total / n)
    }

    /// Parses `(a,b)^m (c,d) …`; multiplicity defaults to 1.
    pub fn parse(text: &str, group: &FiniteAbelianGroup) -> Result<Sequence> {
        let bytes = text.as_bytes();
        let mut i = 0;
        let mut terms = Vec::new();
        let err = |pos: usize, msg: String| Error::Parse { pos, msg };
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i == bytes.len() {
                break;
            }
            let start = i;
            if bytes[i] != b'(' {
                return Err(err(i, "expected '('".into()));
            }
            let close = text[i..].find(')').ok_or_else(|| err(i, "unterminated term".into()))? + i;
            let elem = group.parse_element(&text[i..=close]).map_err(|e| match e {
                Error::Parse { msg, .. } => err(start, msg),
                other => other,
            })?;
            i = close + 1;
            let mut mult = 1i64;
            if i < bytes.len() && bytes[i] == b'^' {
                i += 1;
                let s = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'-') {
                    i += 1;
                }
                mult = text[s..i].parse().map_err(|_| err(s, "bad multiplicity".into()))?;
                if mult <= 0 {
                    return Err(err(s, format!("multiplicity {mult} must be positive")));
                }
            }
            if i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                return Err(err(i, "expected whitespace between terms".into()));
            }
            terms.push((elem, u32::try_from(mult).map_err(|_| err(start, "multiplicity too large".into()))?));
        }
        Ok(Sequence::from_terms(group, terms))
    }

    pub fn to_json(&self) -> SequenceJson {
        SequenceJson {
            group: self.group.spec(),
            terms: self
                .terms
                .iter()
                .map(|&(g, m)| TermJson { elem: self.group.coords(g).iter().map(|&a| a as i64).collect(), mult: m })
                .collect(),
        }
    }

    pub fn from_json(json: &SequenceJson) -> Result<Sequence> {
        let group = FiniteAbelianGroup::new(&json.group.invariants)?;
        let mut terms = Vec::new();
        for t in &json.terms {
            if t.mult == 0 {
                return Err(Error::InvalidArgument("multiplicity must be positive".into()));
            }
            terms.push((group.element_strict(&t.elem)?, t.mult));
        }
        Ok(Sequence::from_terms(&group, terms))
    }
}

impl Ord for Sequence {
    /// Lexicographic on the expanded, sorted code vectors (so a prefix sorts first).
    fn cmp(&self, other: &Self) -> Ordering {
        self.group
            .invariants()
            .cmp(other.group.invariants())
            .then_with(|| self.elements().cmp(other.elements()))
    }
}

impl PartialOrd for Sequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(g, m)| {
                let e = self.group.format_element(g);
                if m == 1 {
                    e
                } else {
                    format!("{e}^{m}")
                }
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}] over {}", self.group)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub elem: Vec<i64>,
    pub mult: u32,
}

/// JSON form of a sequence: `{"group":{"invariants":[..]},"terms":[{"elem":[..],"mult":m}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceJson {
    pub group: GroupSpec,
    pub terms: Vec<TermJson>,
}

impl Serialize for Sequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = SequenceJson::deserialize(deserializer)?;
        Sequence::from_json(&json).map_err(serde::de::Error::custom)
    }
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

    #[test]
    fn algebra() {
        let c5 = grp(&[5]);
        let a = seq("(1)^3 (4)", &c5);
        let b = seq("(1) (4)^2", &c5);
        assert_eq!(a.gcd(&b), seq("(1) (4)", &c5));
        let c3 = grp(&[3, 3]);
        assert_eq!(seq("(1,0)^2 (0,1)", &c3).negate(), seq("(2,0)^2 (0,2)", &c3));
        let t = seq("(1)^2 (2)", &c5);
        let s = seq("(1)^2", &c5);
        assert!(s.divides(&t));
        assert_eq!(t.quotient(&s).unwrap(), seq("(2)", &c5));
        assert!(matches!(s.quotient(&t), Err(Error::Domain(_))));
        assert_eq!(a.product(&b).len(), a.len() + b.len());
    }

    #[test]
    fn sums_of_subsequences() {
        let c5 = grp(&[5]);
        assert_eq!(seq("(1)", &c5).subsequence_sum_set(), vec![c5.element(&[1]).unwrap()]);
        let c4 = grp(&[4]);
        let codes: Vec<usize> = seq("(1)^2", &c4).subsequence_sum_set().iter().map(|g| g.code()).collect();
        assert_eq!(codes, vec![1, 2]);
        let codes: Vec<usize> = seq("(1) (2)", &c5).subsequence_sum_set().iter().map(|g| g.code()).collect();
        assert_eq!(codes, vec![1, 2, 3]);
    }

    #[test]
    fn atom_tests() {
        let c5 = grp(&[5]);
        assert!(seq("(0)", &c5).is_atom());
        assert!(seq("(1)^5", &c5).is_atom());
        assert!(!seq("(1)^2 (4)^2", &c5).is_atom());
        assert!(!Sequence::empty(&c5).is_atom());
        assert!(!seq("(0)^2", &c5).is_atom());
        assert!(!seq("(1) (4) (0)", &c5).is_atom());
    }

    #[test]
    fn cross_numbers_and_norms() {
        let c7 = grp(&[7]);
        assert_eq!(seq("(1)^7", &c7).cross_number(), Rational::from_integer(1));
        let c5 = grp(&[5]);
        let g = c5.element(&[1]).unwrap();
        assert_eq!(seq("(1) (2)^2", &c5).g_norm(g).unwrap(), 1);
        assert_eq!(seq("(4)^5", &c5).g_norm(g).unwrap(), 4);
        assert!(seq("(1)", &c5).g_norm(g).is_err());
        let c = grp(&[2, 4]);
        let e2 = c.element(&[0, 1]).unwrap();
        assert!(seq("(1,0)^2", &c).g_norm(e2).is_err());
    }

    #[test]
    fn parsing() {
        let c = grp(&[3, 6]);
        assert_eq!(seq("(1,0)^2 (0,1)", &c).len(), 3);
        let c3 = grp(&[3]);
        assert_eq!(seq("(1) (1) (1)", &c3).to_string(), "(1)^3");
        assert!(matches!(Sequence::parse("(3,0)", &c), Err(Error::Parse { .. })));
        assert!(matches!(Sequence::parse("(1,0)^0", &c), Err(Error::Parse { .. })));
        assert!(matches!(Sequence::parse("(1,0) x", &c), Err(Error::Parse { pos: 6, .. })));
        let s = seq("(2,5)^3 (0,1) (1,1)^2", &c);
        assert_eq!(seq(&s.to_string(), &c), s);
        let json = serde_json::to_string(&s).unwrap();
        let back: Sequence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(json.starts_with(r#"{"group":{"invariants":[3,6]},"terms":[{"elem":[0,1],"mult":1}"#));
    }

    #[test]
    fn canonical_order_is_lexicographic_on_expansion() {
        let c5 = grp(&[5]);
        let a = seq("(1) (4)", &c5);
        let b = seq("(1)^5", &c5);
        let z = seq("(0)", &c5);
        assert!(z < b && b < a);
        assert!(seq("(1)", &c5) < seq("(1)^2", &c5));
    }
}
