//! Explicit zero-sum sequences with known sets of lengths, the two-family
//! parametrization of maximal-length atoms over rank-two groups, and a few
//! searches built around them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::atoms::{enumerate_atoms, AtomSet, RelativeMonoid};
use crate::error::{domain, invalid, Error, Result};
use crate::factorize::{lengths, LengthSet};
use crate::group::{FiniteAbelianGroup, GroupElement, Rational};
use crate::lengthsets::{classify_aamp_with_period, AampDescriptor};
use crate::sequence::Sequence;

/// The explicit constructions. The string ids (`p3.5.1`, `l4.7.2`, ...) are
/// the names used on the command line and in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstructionId {
    /// `(−U_2)^k U_2^k U_1 W_1` over `C_{n1} ⊕ C_{n2}`.
    RankTwoSplit,
    /// `W_1(−U_1)(−U_2)U_2^k(−U_2)^k` with `W_1 = e_1^{n1−1}e_2^{n2−1}(e_1+e_2)`.
    RankTwoGlued,
    /// `((−U)U)^k U W_1` over `C_n`.
    CyclicSplit,
    /// `(−W)W(−U_r)^k U_r^k` over `C_2^{r−1} ⊕ C_n`.
    ElementaryTwoMirror,
    /// `U_0U_1⋯U_{r−1}(−U_r)^{k+1}U_r^{k+1}` over `C_2^{r−1} ⊕ C_n`.
    ElementaryTwoSquares,
    /// `g^{nk}(−g)^{nk}` times `(2g)^n` or `(2g)^{n−1}g^2` over `C_n`, `n ≥ 7`.
    CyclicDoubling,
    /// `g^{6k}(−g)^{6k}(4g)(−g)^4(3g)g^3` over `C_6`.
    CyclicSix,
    /// `W^k(−W)^k` over `C_{n1} ⊕ C_{n2}`, `n1 ≥ 4`.
    RankTwoMirrorPowers,
    /// `(U_3U_4)^{2k}` over `C_2^4`.
    BooleanPairPowers,
    /// `U_4^{2k}U_2` over `C_2^4`.
    BooleanWithTriangle,
    /// `U^{6k+1}(−U)` over `C_3^3`.
    TernaryMirror,
    /// `U^{3k}V_1` over `C_3^4`.
    TernaryWithTriangle,
}

use ConstructionId::*;

const NAMES: [(ConstructionId, &str); 12] = [
    (RankTwoSplit, "p3.5.1"),
    (RankTwoGlued, "p3.5.2"),
    (CyclicSplit, "p3.6.1"),
    (ElementaryTwoMirror, "p3.7.1"),
    (ElementaryTwoSquares, "p3.7.2"),
    (CyclicDoubling, "l4.3"),
    (CyclicSix, "l4.4"),
    (RankTwoMirrorPowers, "l4.6"),
    (BooleanPairPowers, "l4.7.1"),
    (BooleanWithTriangle, "l4.7.2"),
    (TernaryMirror, "l4.8.1"),
    (TernaryWithTriangle, "l4.8.2"),
];

impl ConstructionId {
    pub const ALL: [ConstructionId; 12] = [
        RankTwoSplit,
        RankTwoGlued,
        CyclicSplit,
        ElementaryTwoMirror,
        ElementaryTwoSquares,
        CyclicDoubling,
        CyclicSix,
        RankTwoMirrorPowers,
        BooleanPairPowers,
        BooleanWithTriangle,
        TernaryMirror,
        TernaryWithTriangle,
    ];

    pub fn name(self) -> &'static str {
        NAMES.iter().find(|(id, _)| *id == self).map(|(_, s)| *s).expect("every id is named")
    }

    /// Parameter names the construction reads.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            RankTwoSplit => &["n1", "n2", "d", "k"],
            RankTwoGlued | RankTwoMirrorPowers => &["n1", "n2", "k"],
            CyclicSplit => &["n", "d", "k"],
            ElementaryTwoMirror | ElementaryTwoSquares => &["r", "n", "k"],
            CyclicDoubling => &["n", "k"],
            CyclicSix | BooleanPairPowers | BooleanWithTriangle | TernaryMirror | TernaryWithTriangle => &["k"],
        }
    }
}

impl fmt::Display for ConstructionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstructionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        NAMES
            .iter()
            .find(|(_, n)| *n == key)
            .map(|(id, _)| *id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown construction {s:?}")))
    }
}

/// A construction together with its integer parameters and an optional basis
/// (default: the standard basis of the invariant-factor form).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionSpec {
    pub id: ConstructionId,
    pub params: BTreeMap<String, i64>,
    pub basis: Option<Vec<GroupElement>>,
}

impl ConstructionSpec {
    pub fn new(id: ConstructionId, params: &[(&str, i64)]) -> Self {
        ConstructionSpec {
            id,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            basis: None,
        }
    }

    /// Parses `"n1=3,n2=6,d=3,k=1"`.
    pub fn parse(id: &str, params: &str) -> Result<Self> {
        let id: ConstructionId = id.parse()?;
        let mut map = BTreeMap::new();
        for part in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let Some((k, v)) = part.split_once('=') else {
                return invalid(format!("expected name=value, got {part:?}"));
            };
            let v: i64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("parameter {k}: {v:?} is not an integer")))?;
            map.insert(k.trim().to_string(), v);
        }
        Ok(ConstructionSpec { id, params: map, basis: None })
    }

    pub fn with_basis(mut self, basis: Vec<GroupElement>) -> Self {
        self.basis = Some(basis);
        self
    }

    fn get(&self, key: &str) -> Result<i64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("{}: missing parameter {key}", self.id)))
    }

    fn require(&self, ok: bool, what: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            let shown: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            invalid(format!("{}: requires {what} (got {})", self.id, shown.join(",")))
        }
    }

    /// Checks the hypotheses and returns the ambient group.
    pub fn group(&self) -> Result<FiniteAbelianGroup> {
        for k in self.params.keys() {
            if !self.id.parameters().contains(&k.as_str()) {
                return invalid(format!("{} takes no parameter {k}", self.id));
            }
        }
        let k = self.get("k")?;
        let k_min = match self.id {
            CyclicSplit | ElementaryTwoMirror | ElementaryTwoSquares => 0,
            _ => 1,
        };
        self.require(k >= k_min, &format!("k ≥ {k_min}"))?;
        self.require(k <= 4096, "k ≤ 4096")?;
        let invariants: Vec<u64> = match self.id {
            RankTwoSplit | RankTwoGlued | RankTwoMirrorPowers => {
                let (n1, n2) = (self.get("n1")?, self.get("n2")?);
                if self.id == RankTwoMirrorPowers {
                    self.require(n1 >= 4 && n2 % n1 == 0, "4 ≤ n1 | n2")?;
                } else {
                    self.require(n1 > 2 && n2 % n1 == 0, "2 < n1 | n2")?;
                }
                if self.id == RankTwoSplit {
                    let d = self.get("d")?;
                    self.require((3..=n1).contains(&d), "d ∈ [3, n1]")?;
                }
                vec![n1 as u64, n2 as u64]
            }
            CyclicSplit => {
                let (n, d) = (self.get("n")?, self.get("d")?);
                self.require(n >= 4, "n ≥ 4")?;
                self.require((3..n).contains(&d), "d ∈ [3, n−1]")?;
                vec![n as u64]
            }
            ElementaryTwoMirror | ElementaryTwoSquares => {
                let (r, n) = (self.get("r")?, self.get("n")?);
                self.require(r >= 2, "r ≥ 2")?;
                self.require(n >= 2 && n % 2 == 0, "n ≥ 2 even")?;
                self.require(r <= 17, "r ≤ 17")?;
                let mut v = vec![2u64; (r - 1) as usize];
                v.push(n as u64);
                v
            }
            CyclicDoubling => {
                let n = self.get("n")?;
                self.require(n >= 7, "n ≥ 7")?;
                vec![n as u64]
            }
            CyclicSix => vec![6],
            BooleanPairPowers | BooleanWithTriangle => vec![2; 4],
            TernaryMirror => vec![3; 3],
            TernaryWithTriangle => vec![3; 4],
        };
        FiniteAbelianGroup::new(&invariants)
    }
}

/// A checkable statement about a set of lengths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "property", content = "value", rename_all = "snake_case")]
pub enum LengthProperty {
    Min(u32),
    Contains(u32),
    Excludes(u32),
    /// `min(L ∖ {min L})`.
    SecondMin(u32),
}

impl LengthProperty {
    pub fn holds(&self, l: &LengthSet) -> bool {
        match *self {
            LengthProperty::Min(m) => l.minimum() == Some(m),
            LengthProperty::Contains(x) => l.contains(x),
            LengthProperty::Excludes(x) => !l.contains(x),
            LengthProperty::SecondMin(x) => l.iter().nth(1) == Some(x),
        }
    }
}

impl fmt::Display for LengthProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthProperty::Min(m) => write!(f, "min L = {m}"),
            LengthProperty::Contains(x) => write!(f, "{x} ∈ L"),
            LengthProperty::Excludes(x) => write!(f, "{x} ∉ L"),
            LengthProperty::SecondMin(x) => write!(f, "min(L ∖ {{min L}}) = {x}"),
        }
    }
}

/// What is known about `L(B)` for a construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicted {
    Exact(LengthSet),
    Bundle(Vec<LengthProperty>),
}

impl Predicted {
    /// Human-readable descriptions of whatever fails for `l` (empty = match).
    pub fn failures(&self, l: &LengthSet) -> Vec<String> {
        match self {
            Predicted::Exact(p) if p == l => Vec::new(),
            Predicted::Exact(p) => vec![format!("expected {p}, computed {l}")],
            Predicted::Bundle(props) => props.iter().filter(|p| !p.holds(l)).map(|p| format!("fails: {p}")).collect(),
        }
    }

    pub fn matches(&self, l: &LengthSet) -> bool {
        self.failures(l).is_empty()
    }
}

impl fmt::Display for Predicted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicted::Exact(l) => write!(f, "{l}"),
            Predicted::Bundle(props) => {
                let parts: Vec<String> = props.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join("; "))
            }
        }
    }
}

/// A built sequence `B` and its predicted lengths.
#[derive(Clone, Debug)]
pub struct Construction {
    pub spec: ConstructionSpec,
    pub group: FiniteAbelianGroup,
    pub sequence: Sequence,
    pub predicted: Predicted,
}

fn plus(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x + y)).collect()
}

/// `start + step·[0, count−1]`.
fn progression(start: u32, step: u32, count: u32) -> Vec<u32> {
    (0..count).map(|i| start + step * i).collect()
}

fn seq(g: &FiniteAbelianGroup, terms: &[(GroupElement, u32)]) -> Sequence {
    Sequence::from_terms(g, terms.iter().copied())
}

/// Builds `B` over the chosen basis and the closed form (or property bundle) for `L(B)`.
pub fn build_construction(spec: &ConstructionSpec) -> Result<Construction> {
    let g = spec.group()?;
    let basis = match &spec.basis {
        None => g.standard_basis(),
        Some(b) => {
            if !g.is_standard_shaped_basis(b) {
                return invalid(format!("{}: the given elements are not a basis of {g} ordered like its invariants", spec.id));
            }
            b.clone()
        }
    };
    let p = |k: &str| spec.params.get(k).map(|&v| v as u32).unwrap_or(0);
    let k = p("k");
    let e = |i: usize| basis[i];
    let neg = |x: GroupElement| g.neg(x);
    let (sequence, predicted) = match spec.id {
        RankTwoSplit => {
            let (n1, n2, d) = (p("n1"), p("n2"), p("d"));
            let (e1, e2) = (e(0), e(1));
            let u2 = seq(&g, &[(e2, n2)]);
            let u1 = seq(&g, &[(e1, n1)]);
            let h = g.mul(d as i64 - 1, e1);
            let w1 = seq(&g, &[(neg(e1), d - 1), (h, 1)]);
            let b = u2.negate().pow(k).product(&u2.pow(k)).product(&u1).product(&w1);
            let l = plus(&plus(&[2 * k + 2], &[0, d - 2]), &progression(0, n2 - 2, k + 1));
            (b, Predicted::Exact(LengthSet::new(l)))
        }
        RankTwoGlued => {
            let (n1, n2) = (p("n1"), p("n2"));
            let (e1, e2) = (e(0), e(1));
            let w1 = seq(&g, &[(e1, n1 - 1), (e2, n2 - 1), (g.add(e1, e2), 1)]);
            let u1 = seq(&g, &[(e1, n1)]);
            let u2 = seq(&g, &[(e2, n2)]);
            let b = w1
                .product(&u1.negate())
                .product(&u2.negate())
                .product(&u2.pow(k))
                .product(&u2.negate().pow(k));
            let mut l = plus(&plus(&[2 * k + 3], &[0, n1 - 2, n2 - 2]), &progression(0, n2 - 2, k + 1));
            l.push(k * n2 + 3 + (n1 - 2) + (n2 - 2));
            (b, Predicted::Exact(LengthSet::new(l)))
        }
        CyclicSplit => {
            let (n, d) = (p("n"), p("d"));
            let x = e(0);
            let u = seq(&g, &[(x, n)]);
            let w1 = seq(&g, &[(g.mul(d as i64 - 1, x), 1), (neg(x), d - 1)]);
            let b = u.negate().product(&u).pow(k).product(&u).product(&w1);
            let l = plus(&plus(&[2 * k + 2], &[0, d - 2]), &progression(0, n - 2, k + 1));
            (b, Predicted::Exact(LengthSet::new(l)))
        }
        ElementaryTwoMirror | ElementaryTwoSquares => {
            let (r, n) = (p("r") as usize, p("n"));
            let er = e(r - 1);
            let e0 = g.sum((0..r - 1).map(e));
            let ur = seq(&g, &[(er, n)]);
            if spec.id == ElementaryTwoMirror {
                let mut terms: Vec<(GroupElement, u32)> = (0..r - 1).map(|i| (e(i), 1)).collect();
                terms.push((g.add(e0, er), 1));
                terms.push((er, n - 1));
                let w = seq(&g, &terms);
                let b = w.negate().product(&w).product(&ur.negate().pow(k)).product(&ur.pow(k));
                let l = plus(&plus(&[2 * k + 2], &[0, n - 2, n + r as u32 - 3]), &progression(0, n - 2, k + 1));
                (b, Predicted::Exact(LengthSet::new(l)))
            } else {
                let mut terms: Vec<(GroupElement, u32)> = vec![(g.add(e0, er), 1), (g.sub(e0, er), 1)];
                terms.extend((0..r - 1).map(|i| (e(i), 2)));
                let b = seq(&g, &terms).product(&ur.negate().pow(k + 1)).product(&ur.pow(k + 1));
                let r = r as u32;
                let mut l = plus(&plus(&[2 * k + 3], &[0, r - 1, n - 2]), &progression(0, n - 2, k + 1));
                l.push(k * n + 3 + (r - 1) + (n - 2));
                (b, Predicted::Exact(LengthSet::new(l)))
            }
        }
        CyclicDoubling => {
            let n = p("n");
            let x = e(0);
            let two = g.mul(2, x);
            let tail = if n % 2 == 0 { seq(&g, &[(two, n)]) } else { seq(&g, &[(two, n - 1), (x, 2)]) };
            let b = seq(&g, &[(x, n * k), (neg(x), n * k)]).product(&tail);
            let props = vec![LengthProperty::Min(2 * k + 2), LengthProperty::Excludes(2 * k + 3)];
            (b, Predicted::Bundle(props))
        }
        CyclicSix => {
            let x = e(0);
            let b = seq(&g, &[(x, 6 * k + 3), (neg(x), 6 * k + 4), (g.mul(4, x), 1), (g.mul(3, x), 1)]);
            let mut props = vec![LengthProperty::Min(2 * k + 2)];
            props.extend((4..=7).map(|i| LengthProperty::Contains(2 * k + i)));
            props.push(LengthProperty::Excludes(2 * k + 3));
            (b, Predicted::Bundle(props))
        }
        RankTwoMirrorPowers => {
            let (n1, n2) = (p("n1"), p("n2"));
            let (e1, e2) = (e(0), e(1));
            let w = seq(&g, &[(e1, n1 - 1), (e2, n2 - 1), (g.add(e1, e2), 1)]);
            let b = w.pow(k).product(&w.negate().pow(k));
            let props = vec![
                LengthProperty::Min(2 * k),
                LengthProperty::Excludes(2 * k + 1),
                LengthProperty::Contains(2 * k + n1 - 2),
                LengthProperty::SecondMin(2 * k + n1 - 2),
            ];
            (b, Predicted::Bundle(props))
        }
        BooleanPairPowers | BooleanWithTriangle => {
            let e0 = g.sum((0..4).map(e));
            let u4 = Sequence::from_elements(&g, [e0, e(0), e(1), e(2), e(3)]);
            if spec.id == BooleanPairPowers {
                let u3 = Sequence::from_elements(&g, [e(0), e(1), e(2), g.sum([e(0), e(1), e(2)])]);
                let b = u3.product(&u4).pow(2 * k);
                let props = vec![LengthProperty::Min(4 * k), LengthProperty::SecondMin(4 * k + 2)];
                (b, Predicted::Bundle(props))
            } else {
                let u2 = Sequence::from_elements(&g, [e(0), e(1), g.add(e(0), e(1))]);
                let b = u4.pow(2 * k).product(&u2);
                let l = plus(&plus(&[2 * k + 1], &[0, 1, 3]), &progression(0, 3, k));
                (b, Predicted::Exact(LengthSet::new(l)))
            }
        }
        TernaryMirror => {
            let e0 = g.sum((0..3).map(e));
            let u = seq(&g, &[(e(0), 2), (e(1), 2), (e(2), 2), (e0, 1)]);
            let b = u.pow(6 * k + 1).product(&u.negate());
            let l: Vec<u32> = (6 * k + 2..=14 * k + 5).chain([14 * k + 7]).collect();
            (b, Predicted::Exact(LengthSet::new(l)))
        }
        TernaryWithTriangle => {
            let e0 = g.sum((0..4).map(e));
            let u = seq(&g, &[(e(0), 2), (e(1), 2), (e(2), 2), (e(3), 2), (e0, 1)]);
            let v1 = seq(&g, &[(e(0), 2), (e(1), 2), (g.add(e(0), e(1)), 1)]);
            let b = u.pow(3 * k).product(&v1);
            let l = plus(&plus(&[3 * k + 1], &[0, 1, 3]), &progression(0, 3, 2 * k));
            (b, Predicted::Exact(LengthSet::new(l)))
        }
    };
    Ok(Construction { spec: spec.clone(), group: g, sequence, predicted })
}

/// Parameters of an atom of length `n1 + n2 − 1` over `C_{n1} ⊕ C_{n2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MaxAtomParams {
    /// `e_j^{ord(e_j)−1} ∏_{ν=1}^{ord(e_i)} (x_ν e_j + e_i)` with `Σx ≡ 1 mod ord(e_j)`,
    /// where `{e_i, e_j}` is a basis with orders `{n1, n2}`.
    TypeI { e_i: GroupElement, e_j: GroupElement, x: Vec<u32> },
    /// `(e_1+ye_2)^{sn1−1} e_2^{n2−sn1+ε} ∏_{ν=1}^{n1−ε} (−x_ν e_1 + (−x_ν y+1)e_2)`.
    TypeII { e1: GroupElement, e2: GroupElement, y: u32, eps: u32, s: u32, x: Vec<u32> },
}

fn rank_two(g: &FiniteAbelianGroup) -> Result<(u32, u32)> {
    match g.invariants() {
        &[n1, n2] => Ok((n1, n2)),
        _ => invalid(format!("{g} is not of rank two")),
    }
}

impl MaxAtomParams {
    pub fn is_type_one(&self) -> bool {
        matches!(self, MaxAtomParams::TypeI { .. })
    }

    /// Checks every side condition of the family.
    pub fn validate(&self, g: &FiniteAbelianGroup) -> Result<()> {
        let (n1, n2) = rank_two(g)?;
        match self {
            MaxAtomParams::TypeI { e_i, e_j, x } => {
                if !g.is_standard_shaped_basis(&[*e_i, *e_j]) && !g.is_standard_shaped_basis(&[*e_j, *e_i]) {
                    return invalid("(e_i, e_j) is not a basis with orders {n1, n2}");
                }
                let (oi, oj) = (g.element_order(*e_i), g.element_order(*e_j));
                if x.len() != oi as usize {
                    return invalid(format!("expected {oi} values x_ν, got {}", x.len()));
                }
                if x.iter().any(|&v| v >= oj) {
                    return invalid(format!("x_ν must lie in [0, {}]", oj - 1));
                }
                if x.iter().map(|&v| v as u64).sum::<u64>() % oj as u64 != 1 % oj as u64 {
                    return invalid(format!("Σx_ν must be ≡ 1 mod {oj}"));
                }
            }
            MaxAtomParams::TypeII { e1, e2, y, eps, s, x } => {
                if !g.is_standard_shaped_basis(&[*e1, *e2]) {
                    return invalid("(e_1, e_2) is not a basis with ord(e_i) = n_i");
                }
                if *y >= n2 {
                    return invalid(format!("y must lie in [0, {}]", n2 - 1));
                }
                if *eps < 1 || *eps >= n1 {
                    return invalid(format!("ε must lie in [1, {}]", n1 - 1));
                }
                if *s < 1 || *s + 1 > n2 / n1 {
                    return invalid(format!("s must lie in [1, {}]", (n2 / n1) as i64 - 1));
                }
                if x.len() != (n1 - eps) as usize || x.iter().any(|&v| v < 1 || v >= n1) {
                    return invalid(format!("need {} values x_ν in [1, {}]", n1 - eps, n1 - 1));
                }
                if x.iter().sum::<u32>() != n1 - 1 {
                    return invalid(format!("Σx_ν must equal {}", n1 - 1));
                }
                let ny = (n1 as u64 * *y as u64) % n2 as u64;
                if ny == 0 {
                    return invalid("n1·y·e_2 must be nonzero");
                }
                if *s != 1 && ny != n1 as u64 % n2 as u64 {
                    return invalid("s > 1 requires n1·y·e_2 = n1·e_2");
                }
            }
        }
        Ok(())
    }

    fn build(&self, g: &FiniteAbelianGroup) -> Sequence {
        match self {
            MaxAtomParams::TypeI { e_i, e_j, x } => {
                let oj = g.element_order(*e_j);
                let mut terms = vec![(*e_j, oj - 1)];
                terms.extend(x.iter().map(|&v| (g.add(g.mul(v as i64, *e_j), *e_i), 1)));
                seq(g, &terms)
            }
            MaxAtomParams::TypeII { e1, e2, y, eps, s, x } => {
                let (n1, n2) = (g.invariants()[0], g.invariants()[1]);
                let f = g.add(*e1, g.mul(*y as i64, *e2));
                let mut terms = vec![(f, s * n1 - 1), (*e2, n2 - s * n1 + eps)];
                terms.extend(x.iter().map(|&v| {
                    let v = v as i64;
                    (g.add(g.mul(-v, *e1), g.mul(-v * *y as i64 + 1, *e2)), 1)
                }));
                seq(g, &terms)
            }
        }
    }

    /// The atom these parameters describe.
    pub fn realize(&self, g: &FiniteAbelianGroup) -> Result<Sequence> {
        self.validate(g)?;
        Ok(self.build(g))
    }

    pub fn to_json(&self, g: &FiniteAbelianGroup) -> Value {
        let f = |x: &GroupElement| g.format_element(*x);
        match self {
            MaxAtomParams::TypeI { e_i, e_j, x } => {
                json!({"variant": "type_i", "e_i": f(e_i), "e_j": f(e_j), "x": x})
            }
            MaxAtomParams::TypeII { e1, e2, y, eps, s, x } => {
                json!({"variant": "type_ii", "e1": f(e1), "e2": f(e2), "y": y, "eps": eps, "s": s, "x": x})
            }
        }
    }
}

/// Calls `f` on every nondecreasing vector of `len` values in `[lo, hi]`.
fn multisets(len: usize, lo: u32, hi: u32, f: &mut dyn FnMut(&[u32])) {
    fn go(cur: &mut Vec<u32>, len: usize, lo: u32, hi: u32, f: &mut dyn FnMut(&[u32])) {
        if cur.len() == len {
            f(cur);
            return;
        }
        for v in lo..=hi {
            cur.push(v);
            go(cur, len, v, hi, f);
            cur.pop();
        }
    }
    if lo <= hi || len == 0 {
        go(&mut Vec::with_capacity(len), len, lo, hi, f);
    }
}

fn params_for_basis(g: &FiniteAbelianGroup, e1: GroupElement, e2: GroupElement) -> Vec<MaxAtomParams> {
    let (n1, n2) = (g.invariants()[0], g.invariants()[1]);
    let mut out = Vec::new();
    for (e_i, e_j) in [(e1, e2), (e2, e1)] {
        let (oi, oj) = (g.element_order(e_i), g.element_order(e_j));
        multisets(oi as usize, 0, oj - 1, &mut |x| {
            if x.iter().map(|&v| v as u64).sum::<u64>() % oj as u64 == 1 % oj as u64 {
                out.push(MaxAtomParams::TypeI { e_i, e_j, x: x.to_vec() });
            }
        });
    }
    for y in 0..n2 {
        let ny = (n1 as u64 * y as u64) % n2 as u64;
        if ny == 0 {
            continue;
        }
        for s in 1..n2 / n1 {
            if s != 1 && ny != n1 as u64 % n2 as u64 {
                continue;
            }
            for eps in 1..n1 {
                multisets((n1 - eps) as usize, 1, n1 - 1, &mut |x| {
                    if x.iter().sum::<u32>() == n1 - 1 {
                        out.push(MaxAtomParams::TypeII { e1, e2, y, eps, s, x: x.to_vec() });
                    }
                });
            }
        }
    }
    out
}

/// Every atom of length `D(G)` produced by the two parametric families over
/// all bases, deduplicated.
pub fn gen_maxlen_atoms_rank2(g: &FiniteAbelianGroup) -> Result<AtomSet> {
    let atoms: Vec<Sequence> = match g.rank() {
        0 => return invalid("the trivial group has no basis"),
        1 => {
            let n = g.invariants()[0];
            g.elements()
                .filter(|&x| g.element_order(x) == n)
                .map(|x| Sequence::power_of(g, x, n))
                .collect()
        }
        2 => {
            let bases = g.enumerate_bases_rank2()?;
            bases
                .par_iter()
                .flat_map_iter(|&(e1, e2)| params_for_basis(g, e1, e2).into_iter().map(|p| p.build(g)))
                .collect()
        }
        r => return invalid(format!("{g} has rank {r} > 2")),
    };
    let d = g.d_star() as usize + 1;
    Ok(AtomSet::from_list(g, atoms, d))
}

/// Coordinates `(a, b)` of every element as `a·e_1 + b·e_2`, indexed by code.
fn basis_coords(g: &FiniteAbelianGroup, e1: GroupElement, e2: GroupElement) -> Vec<(u32, u32)> {
    let (o1, o2) = (g.element_order(e1), g.element_order(e2));
    let mut out = vec![(0, 0); g.order()];
    let mut x = GroupElement::ZERO;
    for a in 0..o1 {
        let mut z = x;
        for b in 0..o2 {
            out[z.code()] = (a, b);
            z = g.add(z, e2);
        }
        x = g.add(x, e1);
    }
    out
}

fn recognize(g: &FiniteAbelianGroup, u: &Sequence, e1: GroupElement, e2: GroupElement) -> Vec<MaxAtomParams> {
    let (n1, n2) = (g.invariants()[0], g.invariants()[1]);
    let coords = basis_coords(g, e1, e2);
    let mut out = Vec::new();
    // Type I over (e_i, e_j) = (e1, e2) and (e2, e1).
    for swap in [false, true] {
        let (e_i, e_j) = if swap { (e2, e1) } else { (e1, e2) };
        let (oi, oj) = if swap { (n2, n1) } else { (n1, n2) };
        let Some(rest) = u.quotient(&Sequence::power_of(g, e_j, oj - 1)).ok() else { continue };
        if rest.len() != oi as usize {
            continue;
        }
        let mut x = Vec::with_capacity(oi as usize);
        let ok = rest.elements().all(|h| {
            let (a, b) = coords[h.code()];
            let (ci, cj) = if swap { (b, a) } else { (a, b) };
            x.push(cj);
            ci == 1 % oi
        });
        if ok {
            x.sort_unstable();
            let p = MaxAtomParams::TypeI { e_i, e_j, x };
            if p.validate(g).is_ok() && &p.build(g) == u {
                out.push(p);
            }
        }
    }
    // Type II over (e1, e2).
    for y in 0..n2 {
        let ny = (n1 as u64 * y as u64) % n2 as u64;
        if ny == 0 {
            continue;
        }
        let f = g.add(e1, g.mul(y as i64, e2));
        for s in 1..n2 / n1 {
            if s != 1 && ny != n1 as u64 % n2 as u64 {
                continue;
            }
            for eps in 1..n1 {
                let head = seq(g, &[(f, s * n1 - 1), (e2, n2 - s * n1 + eps)]);
                let Ok(rest) = u.quotient(&head) else { continue };
                if rest.len() != (n1 - eps) as usize {
                    continue;
                }
                let mut x = Vec::with_capacity(rest.len());
                let ok = rest.elements().all(|h| {
                    let (a, b) = coords[h.code()];
                    let xv = (n1 - a % n1) % n1;
                    x.push(xv);
                    let want = (-(xv as i64) * y as i64 + 1).rem_euclid(n2 as i64) as u32;
                    xv != 0 && b == want
                });
                if ok && x.iter().sum::<u32>() == n1 - 1 {
                    x.sort_unstable();
                    let p = MaxAtomParams::TypeII { e1, e2, y, eps, s, x };
                    if p.validate(g).is_ok() && &p.build(g) == u {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Every (family, basis, parameters) realizing the atom `u` of length `D(G)`.
pub fn classify_maxlen_atom(g: &FiniteAbelianGroup, u: &Sequence) -> Result<Vec<MaxAtomParams>> {
    rank_two(g)?;
    let d = g.d_star() as usize + 1;
    if u.len() != d {
        return domain(format!("|U| = {} but D({g}) = {d}", u.len()));
    }
    if !u.is_atom() {
        return domain(format!("{u} is not a minimal zero-sum sequence"));
    }
    let bases = g.enumerate_bases_rank2()?;
    let mut out: Vec<MaxAtomParams> = bases.par_iter().flat_map_iter(|&(e1, e2)| recognize(g, u, e1, e2)).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Findings of [`check_relative_sums`]; consistent when both lists are empty.
#[derive(Clone, Debug, Serialize)]
pub struct RelativeSumReport {
    pub lengths: LengthSet,
    pub descriptor: AampDescriptor,
    /// Atoms of `ℬ_{⟨g⟩}(G)` dividing `B`.
    pub relative_atoms: usize,
    /// Relative atoms `S | B` with `σ(S) ∉ {0, ±g, ±(d+1)g}`.
    pub sum_violations: Vec<Sequence>,
    /// Pairs `S_1S_2 | B` with neither sum in `{0, ±g}`.
    pub pair_violations: Vec<(Sequence, Sequence)>,
}

impl RelativeSumReport {
    pub fn is_consistent(&self) -> bool {
        self.sum_violations.is_empty() && self.pair_violations.is_empty()
    }
}

/// For `B` with `((−g)g)^{2n} | B`, `ord(g) = n ≥ 5`, and `L(B)` an AAMP with
/// period `{0, d, n−2}`: lists the relative atoms over `⟨g⟩` dividing `B`
/// whose sums fall outside `{0, ±g, ±(d+1)g}`, and the pairs `S_1S_2 | B`
/// whose sums both fall outside `{0, ±g}`.
pub fn check_relative_sums(b: &Sequence, g: GroupElement, d: u32) -> Result<RelativeSumReport> {
    let grp = b.group();
    let n = grp.element_order(g);
    if n < 5 {
        return invalid(format!("ord(g) = {n}, need ≥ 5"));
    }
    if d < 1 || d + 3 > n {
        return invalid(format!("d = {d} must lie in [1, {}]", n - 3));
    }
    if 2 * d == n - 2 {
        return invalid(format!("d = {d} equals (n−2)/2"));
    }
    if !b.is_zero_sum() {
        return invalid(format!("σ({b}) ≠ 0"));
    }
    if b.multiplicity(g) < 2 * n || b.multiplicity(grp.neg(g)) < 2 * n {
        return invalid(format!("((−g)g)^{} does not divide B", 2 * n));
    }
    let l = lengths(b)?;
    let li: Vec<i64> = l.iter().map(i64::from).collect();
    let Some(descriptor) = classify_aamp_with_period(&li, n - 2, &[0, d, n - 2])? else {
        return invalid(format!("L(B) = {l} is not an AAMP with period {{0,{d},{}}}", n - 2));
    };
    let rel = RelativeMonoid::new(grp, &[g]);
    let atoms = rel.atoms(Some(&b.support()), None).dividing(b);
    let mult = |c: i64| grp.mul(c, g);
    let small = [mult(0), mult(1), mult(-1)];
    let allowed = [small[0], small[1], small[2], mult(d as i64 + 1), mult(-(d as i64) - 1)];
    let sum_violations: Vec<Sequence> = atoms.iter().filter(|s| !allowed.contains(&s.sum())).cloned().collect();
    let far: Vec<&Sequence> = atoms.iter().filter(|s| !small.contains(&s.sum())).collect();
    let mut pair_violations = Vec::new();
    for (i, s1) in far.iter().enumerate() {
        for s2 in &far[i..] {
            if s1.product(s2).divides(b) {
                pair_violations.push(((*s1).clone(), (*s2).clone()));
            }
        }
    }
    Ok(RelativeSumReport { lengths: l, descriptor, relative_atoms: atoms.len(), sum_violations, pair_violations })
}

/// A nonempty zero-sum subsequence of `y`, if any.
fn zero_sum_subsequence(y: &Sequence) -> Option<Sequence> {
    let g = y.group();
    let elems: Vec<GroupElement> = y.elements().collect();
    // parent[s] = (index of the last element used, previous sum or none)
    let mut parent: Vec<Option<(usize, Option<usize>)>> = vec![None; g.order()];
    let mut reached: Vec<usize> = Vec::new();
    for (i, &x) in elems.iter().enumerate() {
        let snapshot = reached.len();
        for j in 0..=snapshot {
            let prev = if j == 0 { None } else { Some(reached[j - 1]) };
            let base = prev.map_or(GroupElement::ZERO, GroupElement::from_code);
            let t = g.add(base, x);
            if t.is_zero() {
                let mut picked = vec![x];
                let mut cur = prev;
                while let Some(c) = cur {
                    let (j, p) = parent[c].expect("reached sums have parents");
                    picked.push(elems[j]);
                    cur = p;
                }
                return Some(Sequence::from_elements(g, picked));
            }
            if parent[t.code()].is_none() {
                parent[t.code()] = Some((i, prev));
                reached.push(t.code());
            }
        }
    }
    None
}

/// An atom dividing the nonempty zero-sum sequence `x`.
fn extract_atom(x: &Sequence) -> Sequence {
    let mut cur = x.clone();
    'shrink: loop {
        for &(h, _) in cur.terms() {
            let rest = cur.without_one(h).expect("h divides cur");
            if let Some(t) = zero_sum_subsequence(&rest) {
                cur = t;
                continue 'shrink;
            }
        }
        return cur;
    }
}

/// An atom `A` with `|A| ≥ 3` and `(−A)A | (−S)S` for a zero-sum free `S`:
/// two distinct subsequences of `S` with equal sums are found, their common
/// part cancelled to `T_1, T_2`, and an atom extracted from `(−T_1)T_2`.
/// When no such pair exists an exhaustive search over atoms is made.
pub fn find_mirror_atom(g: &FiniteAbelianGroup, s: &Sequence) -> Result<Option<Sequence>> {
    if !s.is_zero_sum_free() {
        return domain(format!("{s} is not zero-sum free"));
    }
    let mirror = s.negate().product(s);
    let fits = |a: &Sequence| a.len() >= 3 && a.negate().product(a).divides(&mirror);
    let terms = s.terms();
    let mut seen: HashMap<GroupElement, Vec<u32>> = HashMap::new();
    let mut counts = vec![0u32; terms.len()];
    loop {
        let sub = Sequence::from_terms(g, terms.iter().zip(&counts).map(|(&(h, _), &c)| (h, c)));
        let sigma = sub.sum();
        match seen.get(&sigma) {
            Some(other) => {
                let t1 = Sequence::from_terms(g, terms.iter().zip(other).map(|(&(h, _), &c)| (h, c)));
                let common = t1.gcd(&sub);
                let t1 = t1.quotient(&common)?;
                let t2 = sub.quotient(&common)?;
                let a = extract_atom(&t1.negate().product(&t2));
                if fits(&a) {
                    return Ok(Some(a));
                }
            }
            None => {
                seen.insert(sigma, counts.clone());
            }
        }
        // next sub-multiset in mixed radix
        let mut i = 0;
        while i < terms.len() {
            if counts[i] < terms[i].1 {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
        if i == terms.len() {
            break;
        }
    }
    let atoms = enumerate_atoms(g, &mirror.support(), Some(s.len().max(1)));
    Ok(atoms.iter().find(|a| fits(a)).cloned())
}

/// `∏(1 + x_ν)`.
pub fn shifted_product(x: &[Rational]) -> Rational {
    x.iter().fold(Rational::from_integer(1), |acc, &v| acc * (Rational::from_integer(1) + v))
}

/// Minimizes `∏(1 + x_ν)` subject to `lo_ν ≤ x_ν ≤ hi_ν` and `Σx = alpha`, for
/// nonincreasing nonnegative bound vectors: the first `s` coordinates sit at
/// their upper bounds, all but one of the rest at their lower bounds, and
/// coordinate `s+1` takes the remainder.
pub fn minimize_product(hi: &[Rational], lo: &[Rational], alpha: Rational) -> Result<Vec<Rational>> {
    let zero = Rational::from_integer(0);
    if hi.len() != lo.len() {
        return invalid("bound vectors differ in length");
    }
    if hi.windows(2).any(|w| w[0] < w[1]) || lo.windows(2).any(|w| w[0] < w[1]) {
        return invalid("bounds must be nonincreasing");
    }
    if hi.iter().chain(lo).any(|&v| v < zero) {
        return invalid("bounds must be nonnegative");
    }
    if hi.iter().zip(lo).any(|(h, l)| l > h) {
        return invalid("lower bound exceeds upper bound");
    }
    let (sum_hi, sum_lo) = (hi.iter().sum::<Rational>(), lo.iter().sum::<Rational>());
    if alpha > sum_hi || alpha < sum_lo {
        return invalid(format!("target {alpha} outside [{sum_lo}, {sum_hi}]"));
    }
    let t = hi.len();
    // s maximal with Σ_{i≤s} hi_i + Σ_{i>s} lo_i ≤ alpha
    let mut s = 0;
    let mut acc = sum_lo;
    while s < t && acc - lo[s] + hi[s] <= alpha {
        acc = acc - lo[s] + hi[s];
        s += 1;
    }
    let mut x: Vec<Rational> = (0..t).map(|i| if i < s { hi[i] } else { lo[i] }).collect();
    if s < t {
        x[s] += alpha - acc;
    }
    Ok(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoAtomWitness {
    pub u: Sequence,
    pub v: Sequence,
    pub lengths: LengthSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoAtomReport {
    pub target: LengthSet,
    pub pool_size: usize,
    /// The pool is complete only up to this length, so "no witness" says
    /// nothing about longer atoms.
    pub pool_max_len: usize,
    pub min_pair_len: usize,
    pub pairs_checked: usize,
    pub witnesses: Vec<TwoAtomWitness>,
}

/// All pairs `U ≤ V` from `pool` with `|U| + |V| ≥ min_pair_len` and `L(UV) = target`.
pub fn two_atom_length_set_search(
    _group: &FiniteAbelianGroup,
    target: &LengthSet,
    pool: &AtomSet,
    min_pair_len: usize,
) -> Result<TwoAtomReport> {
    let atoms = pool.atoms();
    let pairs: Vec<(usize, usize)> = if target.contains(2) {
        (0..atoms.len())
            .flat_map(|i| (i..atoms.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| atoms[i].len() + atoms[j].len() >= min_pair_len)
            .collect()
    } else {
        // 2 ∈ L(UV) always
        Vec::new()
    };
    let found: Vec<Option<TwoAtomWitness>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let b = atoms[i].product(&atoms[j]);
            let l = lengths(&b)?;
            Ok((&l == target).then(|| TwoAtomWitness { u: atoms[i].clone(), v: atoms[j].clone(), lengths: l }))
        })
        .collect::<Result<_>>()?;
    Ok(TwoAtomReport {
        target: target.clone(),
        pool_size: atoms.len(),
        pool_max_len: pool.max_len(),
        min_pair_len,
        pairs_checked: pairs.len(),
        witnesses: found.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::atoms_of_max_length;
    use std::collections::BTreeSet;

    fn grp(s: &str) -> FiniteAbelianGroup {
        s.parse().unwrap()
    }

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn cyclic_split_example() {
        let c = build_construction(&ConstructionSpec::new(CyclicSplit, &[("n", 5), ("d", 3), ("k", 1)])).unwrap();
        assert_eq!(c.sequence.len(), 18);
        assert_eq!(c.predicted, Predicted::Exact(LengthSet::new([4, 5, 7, 8])));
        assert!(c.predicted.matches(&lengths(&c.sequence).unwrap()));
    }

    #[test]
    fn elementary_two_mirror_example() {
        let c = build_construction(&ConstructionSpec::new(ElementaryTwoMirror, &[("r", 2), ("n", 4), ("k", 0)])).unwrap();
        assert_eq!(c.predicted, Predicted::Exact(LengthSet::new([2, 4, 5])));
        assert_eq!(lengths(&c.sequence).unwrap(), LengthSet::new([2, 4, 5]));
    }

    #[test]
    fn boolean_triangle_example() {
        let c = build_construction(&ConstructionSpec::new(BooleanWithTriangle, &[("k", 1)])).unwrap();
        assert_eq!(c.sequence.len(), 13);
        assert_eq!(lengths(&c.sequence).unwrap(), LengthSet::new([3, 4, 6]));
        assert!(c.predicted.matches(&LengthSet::new([3, 4, 6])));
    }

    #[test]
    fn hypotheses_are_checked() {
        let bad = [
            ConstructionSpec::new(RankTwoSplit, &[("n1", 2), ("n2", 4), ("d", 3), ("k", 1)]),
            ConstructionSpec::new(RankTwoSplit, &[("n1", 3), ("n2", 6), ("d", 4), ("k", 1)]),
            ConstructionSpec::new(CyclicSplit, &[("n", 5), ("d", 5), ("k", 1)]),
            ConstructionSpec::new(ElementaryTwoMirror, &[("r", 2), ("n", 5), ("k", 0)]),
            ConstructionSpec::new(CyclicDoubling, &[("n", 6), ("k", 1)]),
            ConstructionSpec::new(RankTwoMirrorPowers, &[("n1", 3), ("n2", 3), ("k", 1)]),
            ConstructionSpec::new(CyclicSix, &[("k", 0)]),
            ConstructionSpec::new(CyclicSix, &[("k", 1), ("n", 6)]),
            ConstructionSpec::new(CyclicSplit, &[("n", 5), ("k", 1)]),
        ];
        for spec in bad {
            assert!(matches!(build_construction(&spec), Err(Error::InvalidArgument(_))), "{spec:?}");
        }
    }

    #[test]
    fn parse_spec() {
        let s = ConstructionSpec::parse("p3.5.1", "n1=3, n2=6,d=3,k=1").unwrap();
        assert_eq!(s.id, RankTwoSplit);
        assert_eq!(s.params["n2"], 6);
        assert!(ConstructionSpec::parse("p9", "").is_err());
        assert!(ConstructionSpec::parse("l4.4", "k=x").is_err());
        for id in ConstructionId::ALL {
            assert_eq!(id.name().parse::<ConstructionId>().unwrap(), id);
        }
    }

    #[test]
    fn every_built_sequence_is_zero_sum() {
        let specs = [
            ConstructionSpec::new(RankTwoSplit, &[("n1", 3), ("n2", 6), ("d", 3), ("k", 1)]),
            ConstructionSpec::new(RankTwoGlued, &[("n1", 3), ("n2", 6), ("k", 1)]),
            ConstructionSpec::new(ElementaryTwoSquares, &[("r", 3), ("n", 4), ("k", 1)]),
            ConstructionSpec::new(CyclicDoubling, &[("n", 7), ("k", 1)]),
            ConstructionSpec::new(CyclicDoubling, &[("n", 8), ("k", 1)]),
            ConstructionSpec::new(CyclicSix, &[("k", 1)]),
            ConstructionSpec::new(RankTwoMirrorPowers, &[("n1", 4), ("n2", 4), ("k", 1)]),
            ConstructionSpec::new(BooleanPairPowers, &[("k", 1)]),
            ConstructionSpec::new(TernaryMirror, &[("k", 1)]),
            ConstructionSpec::new(TernaryWithTriangle, &[("k", 1)]),
        ];
        for spec in specs {
            let c = build_construction(&spec).unwrap();
            assert!(c.sequence.is_zero_sum(), "{}", spec.id);
        }
    }

    #[test]
    fn basis_choice_does_not_change_lengths() {
        let g = grp("C2xC4");
        let spec = ConstructionSpec::new(ElementaryTwoMirror, &[("r", 2), ("n", 4), ("k", 1)]);
        let base = lengths(&build_construction(&spec).unwrap().sequence).unwrap();
        for (e1, e2) in g.enumerate_bases_rank2().unwrap() {
            let c = build_construction(&spec.clone().with_basis(vec![e1, e2])).unwrap();
            assert_eq!(lengths(&c.sequence).unwrap(), base);
        }
        let not_basis = spec.with_basis(vec![g.unit(0), g.unit(0)]);
        assert!(build_construction(&not_basis).is_err());
    }

    #[test]
    fn generator_matches_brute_force_small() {
        for name in ["C2xC2", "C2xC4", "C3xC3", "C5"] {
            let g = grp(name);
            let generated: BTreeSet<Sequence> = gen_maxlen_atoms_rank2(&g).unwrap().atoms().iter().cloned().collect();
            let brute: BTreeSet<Sequence> = atoms_of_max_length(&g).atoms().iter().cloned().collect();
            assert_eq!(generated, brute, "{name}");
        }
        assert!(gen_maxlen_atoms_rank2(&grp("C2xC2xC2")).is_err());
    }

    #[test]
    fn classifier_round_trip() {
        let g = grp("C3xC6");
        let (e1, e2) = (g.unit(0), g.unit(1));
        let p = MaxAtomParams::TypeI { e_i: e1, e_j: e2, x: vec![0, 2, 5] };
        let u = p.realize(&g).unwrap();
        assert_eq!(u.len(), 8);
        assert!(u.is_atom());
        assert!(classify_maxlen_atom(&g, &u).unwrap().contains(&p));

        let q = MaxAtomParams::TypeII { e1, e2, y: 1, eps: 1, s: 1, x: vec![1, 1] };
        let v = q.realize(&g).unwrap();
        assert!(v.is_atom() && v.len() == 8);
        assert!(classify_maxlen_atom(&g, &v).unwrap().contains(&q));
    }

    #[test]
    fn classifier_covers_c3xc3() {
        let g = grp("C3xC3");
        for u in atoms_of_max_length(&g).iter() {
            let found = classify_maxlen_atom(&g, u).unwrap();
            assert!(!found.is_empty(), "{u}");
            for p in &found {
                assert_eq!(&p.realize(&g).unwrap(), u);
            }
        }
    }

    #[test]
    fn classifier_rejects_short_sequences() {
        let g = grp("C3xC3");
        let u = Sequence::power_of(&g, g.unit(0), 3);
        assert!(matches!(classify_maxlen_atom(&g, &u), Err(Error::Domain(_))));
        let not_atom = Sequence::from_elements(&g, [g.unit(0); 5]);
        assert!(matches!(classify_maxlen_atom(&g, &not_atom), Err(Error::Domain(_))));
    }

    #[test]
    fn type_two_with_single_tail_is_also_type_one() {
        let g = grp("C3xC6");
        let (e1, e2) = (g.unit(0), g.unit(1));
        for y in [1u32, 3, 5] {
            let p = MaxAtomParams::TypeII { e1, e2, y, eps: 2, s: 1, x: vec![2] };
            let u = p.realize(&g).unwrap();
            assert!(classify_maxlen_atom(&g, &u).unwrap().iter().any(MaxAtomParams::is_type_one), "y = {y}");
        }
    }

    #[test]
    fn type_two_conditions() {
        let g = grp("C3xC6");
        let (e1, e2) = (g.unit(0), g.unit(1));
        // n1·y·e2 = 0 for y = 2
        let p = MaxAtomParams::TypeII { e1, e2, y: 2, eps: 1, s: 1, x: vec![1, 1] };
        assert!(p.realize(&g).is_err());
        let c33 = grp("C3xC3");
        let q = MaxAtomParams::TypeII { e1: c33.unit(0), e2: c33.unit(1), y: 1, eps: 1, s: 1, x: vec![1, 1] };
        assert!(q.realize(&c33).is_err());
    }

    #[test]
    fn relative_sums_consistent_on_split_construction() {
        let spec = ConstructionSpec::new(RankTwoSplit, &[("n1", 3), ("n2", 6), ("d", 3), ("k", 2)]);
        let c = build_construction(&spec).unwrap();
        let report = check_relative_sums(&c.sequence, c.group.unit(1), 1).unwrap();
        assert!(report.relative_atoms > 0);
        assert!(report.is_consistent(), "{report:?}");
    }

    #[test]
    fn relative_sums_flag_an_appended_atom() {
        let g = grp("C7");
        let c = build_construction(&ConstructionSpec::new(CyclicSplit, &[("n", 7), ("d", 4), ("k", 2)])).unwrap();
        let x = g.unit(0);
        let b = c.sequence.product(&Sequence::from_elements(&g, [g.mul(2, x), g.mul(-2, x)]));
        match check_relative_sums(&b, x, 2) {
            Err(Error::InvalidArgument(_)) => {}
            Ok(report) => assert!(!report.sum_violations.is_empty()),
            Err(e) => panic!("{e}"),
        }
        assert!(check_relative_sums(&c.sequence, x, 2).unwrap().is_consistent());
    }

    #[test]
    fn relative_sums_reject_excluded_d() {
        let c = build_construction(&ConstructionSpec::new(CyclicSplit, &[("n", 6), ("d", 4), ("k", 2)])).unwrap();
        assert!(matches!(check_relative_sums(&c.sequence, c.group.unit(0), 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mirror_atom_examples() {
        let g = grp("C5");
        let x = g.unit(0);
        let s = Sequence::from_elements(&g, [x, x, g.mul(2, x)]);
        let a = find_mirror_atom(&g, &s).unwrap().unwrap();
        assert!(a.len() >= 3 && a.is_atom());
        assert!(a.negate().product(&a).divides(&s.negate().product(&s)));
        assert_eq!(find_mirror_atom(&g, &Sequence::power_of(&g, x, 1)).unwrap(), None);
        assert_eq!(find_mirror_atom(&g, &Sequence::power_of(&g, x, 3)).unwrap(), None);
        assert!(find_mirror_atom(&g, &Sequence::power_of(&g, x, 5)).is_err());
    }

    #[test]
    fn minimize_examples() {
        let x = minimize_product(&[r(3), r(3)], &[r(0), r(0)], r(3)).unwrap();
        assert_eq!(x, vec![r(3), r(0)]);
        assert_eq!(shifted_product(&x), r(4));
        let hi = [r(5), r(4), r(2)];
        let lo = [r(2), r(1), r(1)];
        assert_eq!(minimize_product(&hi, &lo, r(4)).unwrap(), lo.to_vec());
        assert_eq!(minimize_product(&hi, &lo, r(11)).unwrap(), hi.to_vec());
        // the remainder never pushes a coordinate below its lower bound
        let x = minimize_product(&[r(3), r(3)], &[r(2), r(2)], r(4)).unwrap();
        assert_eq!(x, vec![r(2), r(2)]);
        assert!(minimize_product(&[r(1), r(2)], &[r(0), r(0)], r(1)).is_err());
        assert!(minimize_product(&[r(1)], &[r(0)], r(2)).is_err());
    }

    #[test]
    fn minimize_beats_grid() {
        let hi = [r(4), r(3), r(3)];
        let lo = [r(1), r(1), r(0)];
        for alpha in 2..=10 {
            let best = shifted_product(&minimize_product(&hi, &lo, r(alpha)).unwrap());
            for a in 1..=4 {
                for b in 1..=3 {
                    let c = alpha - a - b;
                    if (0..=3).contains(&c) {
                        assert!(best <= shifted_product(&[r(a), r(b), r(c)]));
                    }
                }
            }
        }
    }

    #[test]
    fn two_atom_search_small() {
        let g = grp("C2xC4");
        let pool = enumerate_atoms(&g, &g.nonzero_elements(), None);
        let target = LengthSet::new([2, 4, 5]);
        let report = two_atom_length_set_search(&g, &target, &pool, 0).unwrap();
        assert!(!report.witnesses.is_empty());
        for w in &report.witnesses {
            assert_eq!(lengths(&w.u.product(&w.v)).unwrap(), target);
        }
        let unique = two_atom_length_set_search(&g, &LengthSet::new([2]), &pool, 0).unwrap();
        // L = {2} means every factorization has two atoms, not that there is only one
        for w in &unique.witnesses {
            let all = crate::factorize::enumerate_factorizations(&w.u.product(&w.v), &pool, 1000).unwrap();
            assert!(all.items.iter().all(|z| z.len() == 2));
        }
        for (i, u) in pool.iter().enumerate() {
            for v in &pool.atoms()[i..] {
                let all = crate::factorize::enumerate_factorizations(&u.product(v), &pool, 1000).unwrap();
                if all.items.len() == 1 {
                    assert!(unique.witnesses.iter().any(|w| &w.u == u && &w.v == v));
                }
            }
        }
        let empty = AtomSet::from_list(&g, Vec::new(), 0);
        assert!(two_atom_length_set_search(&g, &target, &empty, 0).unwrap().witnesses.is_empty());
    }
}
