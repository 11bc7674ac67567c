//! The verification harness: every checked claim as a named case, grouped
//! into suites, producing a machine-readable report.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use zsl_core::atoms::{davenport, enumerate_atoms, atoms_of_max_length, RelativeMonoid};
use zsl_core::constructions::{build_construction, gen_maxlen_atoms_rank2, minimize_product, shifted_product, ConstructionSpec};
use zsl_core::factorize::{enumerate_factorizations, length_set, lengths, rho_k, LengthSet, RHO_BUDGET};
use zsl_core::lengthsets::{
    classify_aamp, classify_aamp_with_period, classify_five_form, contains_length_set, delta_star, is_amp, system_up_to,
    FiveForm, Membership, MEMBERSHIP_BUDGET,
};
use zsl_core::{FiniteAbelianGroup, GroupElement, Rational, Result, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quick,
    Paper,
    Long,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(Suite::Quick),
            "paper" => Ok(Suite::Paper),
            "long" => Ok(Suite::Long),
            _ => Err(format!("unknown suite {s:?} (quick, paper, long)")),
        }
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Quick => "quick",
            Suite::Paper => "paper",
            Suite::Long => "long",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseRecord {
    pub id: String,
    pub reference: String,
    /// Acceptance criterion the case belongs to (0 = supplementary).
    pub criterion: u32,
    pub parameters: Value,
    pub status: Status,
    pub expected: Value,
    pub computed: Value,
    pub runtime_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub cases: Vec<CaseRecord>,
    pub pass: bool,
}

/// What a case reports back.
pub struct Outcome {
    pub parameters: Value,
    pub expected: Value,
    pub computed: Value,
    pub pass: bool,
    pub note: Option<String>,
}

impl Outcome {
    fn new(parameters: Value, expected: Value, computed: Value, pass: bool) -> Self {
        Outcome { parameters, expected, computed, pass, note: None }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

type Runner = Box<dyn Fn(u64) -> Result<Outcome> + Send + Sync>;

pub struct Case {
    pub id: String,
    pub reference: &'static str,
    pub criterion: u32,
    /// Smallest suite containing the case.
    pub tier: Suite,
    run: Runner,
}

impl Case {
    fn new(id: impl Into<String>, reference: &'static str, criterion: u32, tier: Suite, run: Runner) -> Self {
        Case { id: id.into(), reference, criterion, tier, run }
    }

    pub fn run(&self, seed: u64) -> CaseRecord {
        let start = Instant::now();
        let outcome = (self.run)(seed);
        let runtime_ms = start.elapsed().as_millis() as u64;
        let (parameters, status, expected, computed, note) = match outcome {
            Ok(o) => (o.parameters, if o.pass { Status::Pass } else { Status::Fail }, o.expected, o.computed, o.note),
            Err(e) => (Value::Null, Status::Fail, Value::Null, json!({ "error": e.to_string() }), None),
        };
        CaseRecord {
            id: self.id.clone(),
            reference: self.reference.to_string(),
            criterion: self.criterion,
            parameters,
            status,
            expected,
            computed,
            runtime_ms,
            note,
        }
    }
}

fn grp(s: &str) -> FiniteAbelianGroup {
    s.parse().expect("built-in group names parse")
}

fn ls_json(l: &LengthSet) -> Value {
    json!(l.as_slice())
}

// ---------------------------------------------------------------- criterion 1

fn davenport_case(name: &'static str) -> Case {
    Case::new(
        format!("davenport/{name}"),
        "p2.3.1",
        1,
        Suite::Quick,
        Box::new(move |_| {
            let g = grp(name);
            let d = davenport(&g) as u64;
            let want = 1 + g.d_star();
            Ok(Outcome::new(json!({ "group": name }), json!(want), json!(d), d == want))
        }),
    )
}

// ---------------------------------------------------------------- criterion 2

/// The closed-form systems of sets of lengths of the small groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallSystem {
    /// `C_3` and `C_2 ⊕ C_2`: `y + 2k + [0,k]`.
    Three,
    /// `C_4`: `y + k + 1 + [0,k]` and `y + 2k + 2·[0,k]`.
    Four,
    /// `C_2^3`.
    TwoCubed,
    /// `C_3 ⊕ C_3`.
    ThreeSquared,
}

/// `(min, max, step)` when `l` is an arithmetical progression with step 1 or 2
/// (step 0 for singletons).
fn progression_shape(l: &LengthSet) -> Option<(u32, u32, u32)> {
    let v = l.as_slice();
    let (&a, &b) = (v.first()?, v.last()?);
    if v.len() == 1 {
        return Some((a, a, 0));
    }
    let step = v[1] - v[0];
    (matches!(step, 1 | 2) && v.windows(2).all(|w| w[1] - w[0] == step)).then_some((a, b, step))
}

impl SmallSystem {
    pub fn contains(self, l: &LengthSet) -> bool {
        let Some((a, b, step)) = progression_shape(l) else { return false };
        let interval = |k: u32| -> bool {
            match self {
                SmallSystem::Three => a >= 2 * k,
                SmallSystem::Four => a > k,
                SmallSystem::TwoCubed => {
                    if k <= 2 {
                        a > k
                    } else {
                        a >= k
                    }
                }
                SmallSystem::ThreeSquared => {
                    if a % 2 == 0 {
                        2 * b <= 5 * a
                    } else if a == 1 {
                        b == 1
                    } else {
                        b <= 5 * (a - 1) / 2 + 2
                    }
                }
            }
        };
        let step_two = |k: u32| -> bool { matches!(self, SmallSystem::Four | SmallSystem::TwoCubed) && a >= 2 * k };
        match step {
            0 => interval(0) || step_two(0),
            1 => interval(b - a),
            _ => step_two((b - a) / 2),
        }
    }

    /// Every member with `max ≤ top`.
    pub fn members_up_to(self, top: u32) -> Vec<LengthSet> {
        let mut out = Vec::new();
        for a in 0..=top {
            for b in a..=top {
                let candidates = [LengthSet::new(a..=b), LengthSet::new((a..=b).step_by(2))];
                for c in candidates {
                    if c.maximum() == Some(b) && self.contains(&c) && !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        out.sort();
        out
    }
}

fn system_cases(name: &'static str, system: SmallSystem, budget: usize) -> Vec<Case> {
    let fam = Case::new(
        format!("prop4.2/{name}/family"),
        "p4.2",
        2,
        Suite::Quick,
        Box::new(move |_| {
            let g = grp(name);
            let sys = system_up_to(&g, budget, true)?;
            let outside: Vec<String> =
                sys.iter().filter(|(_, l)| !system.contains(l)).map(|(b, l)| format!("{l} from {b}")).collect();
            Ok(Outcome::new(
                json!({ "group": name, "max_len": budget }),
                json!({ "outside_family": 0 }),
                json!({ "sets": sys.len(), "outside_family": outside.len(), "examples": &outside[..outside.len().min(5)] }),
                outside.is_empty(),
            ))
        }),
    );
    let real = Case::new(
        format!("prop4.2/{name}/realized"),
        "p4.2",
        2,
        Suite::Quick,
        Box::new(move |_| {
            let g = grp(name);
            let sys = system_up_to(&g, budget, true)?;
            let members = system.members_up_to(6);
            let missing: Vec<String> = members
                .iter()
                .filter(|m| !sys.iter().any(|(_, l)| l == *m))
                .map(ToString::to_string)
                .collect();
            let mut o = Outcome::new(
                json!({ "group": name, "max_len": budget, "max_length": 6 }),
                json!({ "members": members.len(), "missing": [] }),
                json!({ "members": members.len(), "missing": missing }),
                missing.is_empty(),
            );
            if !missing.is_empty() {
                o = o.with_note(format!(
                    "a set with maximum m needs |B| ≥ 2m − (#zeros) and min L ≥ #zeros + 2 when B ≠ 0^m; \
                     unrealized sets need more than {budget} elements"
                ));
            }
            Ok(o)
        }),
    );
    vec![fam, real]
}

// ---------------------------------------------------------------- criteria 3, 4 and long constructions

fn construction_case(reference: &'static str, params: &'static str, criterion: u32, tier: Suite) -> Case {
    let prefix = if reference.starts_with('p') { "prop" } else { "lemma" };
    Case::new(
        format!("{prefix}{}/{params}", &reference[1..]),
        reference,
        criterion,
        tier,
        Box::new(move |_| {
            let c = build_construction(&ConstructionSpec::parse(reference, params)?)?;
            let l = lengths(&c.sequence)?;
            let failures = c.predicted.failures(&l);
            let mut o = Outcome::new(
                json!({ "construction": reference, "params": params, "group": c.group.to_string(), "sequence": c.sequence.to_string() }),
                serde_json::to_value(&c.predicted)?,
                ls_json(&l),
                failures.is_empty(),
            );
            if !failures.is_empty() {
                o = o.with_note(failures.join("; "));
            }
            Ok(o)
        }),
    )
}

// ---------------------------------------------------------------- criterion 5

fn membership_case(id: &'static str, reference: &'static str, name: &'static str, set: &'static [u32], want_yes: bool) -> Case {
    Case::new(
        id,
        reference,
        5,
        Suite::Paper,
        Box::new(move |_| {
            let g = grp(name);
            let target = LengthSet::new(set.iter().copied());
            let m = contains_length_set(&g, &target, MEMBERSHIP_BUDGET)?;
            let pass = match &m {
                Membership::Yes { witness, .. } => want_yes && lengths(witness)? == target,
                Membership::No { .. } => !want_yes,
                Membership::Unknown { .. } => false,
            };
            Ok(Outcome::new(
                json!({ "group": name, "set": set }),
                json!(if want_yes { "yes" } else { "no" }),
                serde_json::to_value(&m)?,
                pass,
            ))
        }),
    )
}

// ---------------------------------------------------------------- criterion 6

fn delta_star_case(name: &'static str, want: &'static [u32]) -> Case {
    Case::new(
        format!("prop3.3/deltastar/{name}"),
        "p3.3",
        6,
        Suite::Paper,
        Box::new(move |_| {
            let g = grp(name);
            let d = davenport(&g);
            let at3 = delta_star(&g, Some(3 * d))?;
            let at4 = delta_star(&g, Some(4 * d))?;
            let pass = at3.values == want && at4.values == want && at3.undetermined == 0 && at4.undetermined == 0;
            Ok(Outcome::new(
                json!({ "group": name, "bounds": [3 * d, 4 * d] }),
                json!(want),
                json!({ "at_3D": at3.values, "at_4D": at4.values }),
                pass,
            ))
        }),
    )
}

fn max_delta_star_case(n: u64) -> Case {
    Case::new(
        format!("prop3.3/max/C{n}"),
        "p3.3",
        6,
        Suite::Paper,
        Box::new(move |_| {
            let g = FiniteAbelianGroup::cyclic(n)?;
            let ds = delta_star(&g, Some(3 * davenport(&g)))?;
            let max = ds.values.iter().max().copied();
            Ok(Outcome::new(json!({ "n": n }), json!(n - 2), json!(max), max == Some(n as u32 - 2)))
        }),
    )
}

fn five_form_case() -> Case {
    Case::new(
        "lemma4.5/C5",
        "l4.5",
        6,
        Suite::Paper,
        Box::new(|_| {
            let g = grp("C5");
            let sys = system_up_to(&g, 14, true)?;
            let bad: Vec<String> = sys
                .iter()
                .filter(|(_, l)| classify_five_form(l) == FiveForm::NoMatch)
                .map(|(b, l)| format!("{l} from {b}"))
                .collect();
            Ok(Outcome::new(
                json!({ "group": "C5", "max_len": 14 }),
                json!({ "unclassified": 0 }),
                json!({ "sets": sys.len(), "unclassified": bad.len(), "examples": &bad[..bad.len().min(5)] }),
                bad.is_empty(),
            ))
        }),
    )
}

// ---------------------------------------------------------------- criterion 7

fn structure_case(name: &'static str) -> Case {
    Case::new(
        format!("lemma5.2/{name}"),
        "l5.2",
        7,
        Suite::Paper,
        Box::new(move |_| {
            let g = grp(name);
            let generated = gen_maxlen_atoms_rank2(&g)?;
            let brute = atoms_of_max_length(&g);
            let pass = generated.atoms() == brute.atoms();
            Ok(Outcome::new(
                json!({ "group": name }),
                json!({ "brute_force": brute.len() }),
                json!({ "generated": generated.len(), "equal": pass }),
                pass,
            ))
        }),
    )
}

// ---------------------------------------------------------------- criterion 8 and 9

/// All finite abelian groups with `2 ≤ |G| ≤ max_order`, in invariant-factor form.
pub fn groups_up_to(max_order: u64) -> Vec<FiniteAbelianGroup> {
    fn rec(prefix: &mut Vec<u64>, order: u64, max: u64, out: &mut Vec<Vec<u64>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        let last = prefix.last().copied().unwrap_or(1);
        let mut n = if prefix.is_empty() { 2 } else { last };
        while order * n <= max {
            if n % last == 0 {
                prefix.push(n);
                rec(prefix, order * n, max, out);
                prefix.pop();
            }
            n += 1;
        }
    }
    let mut lists = Vec::new();
    rec(&mut Vec::new(), 1, max_order, &mut lists);
    let mut groups: Vec<FiniteAbelianGroup> =
        lists.iter().map(|l| FiniteAbelianGroup::new(l).expect("valid invariants")).collect();
    groups.sort_by_key(|g| (g.order(), g.invariants().to_vec()));
    groups
}

/// A random sequence of length in `[1, max_len]` whose sum lies in `kernel`.
fn random_in_kernel(rng: &mut ChaCha8Rng, g: &FiniteAbelianGroup, kernel: &[GroupElement], max_len: usize) -> Sequence {
    let len = rng.gen_range(1..=max_len);
    let mut elems: Vec<GroupElement> =
        (0..len - 1).map(|_| GroupElement::from_code(rng.gen_range(0..g.order()))).collect();
    let target = *kernel.choose(rng).expect("kernel contains 0");
    elems.push(g.sub(target, g.sum(elems.iter().copied())));
    Sequence::from_elements(g, elems)
}

fn relative_case(g: FiniteAbelianGroup) -> Case {
    let name = g.to_string();
    Case::new(
        format!("prop2.5/{name}"),
        "p2.5",
        8,
        Suite::Paper,
        Box::new(move |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (g.order() as u64) << 32 ^ g.invariants().len() as u64);
            let subgroups = g.subgroups();
            let mut davenport_mismatch = Vec::new();
            let mut transfer_mismatch = Vec::new();
            for k in &subgroups {
                let r = RelativeMonoid::new(&g, k);
                let q = r.quotient().target().clone();
                let (dk, dq) = (r.davenport(), davenport(&q));
                if dk != dq {
                    davenport_mismatch.push(format!("|K|={}: D_K={dk}, D(G/K)={dq}", k.len()));
                }
                for _ in 0..100 {
                    let s = random_in_kernel(&mut rng, &g, k, 10);
                    let atoms = r.atoms(Some(&s.support()), Some(s.len()));
                    let lk = length_set(&s, &atoms)?;
                    let lq = lengths(&r.transfer(&s)?)?;
                    if lk != lq {
                        transfer_mismatch.push(format!("{s}: {lk} vs {lq}"));
                    }
                }
            }
            let pass = davenport_mismatch.is_empty() && transfer_mismatch.is_empty();
            Ok(Outcome::new(
                json!({ "group": name, "subgroups": subgroups.len(), "samples_per_subgroup": 100, "max_len": 10 }),
                json!({ "mismatches": 0 }),
                json!({ "davenport": davenport_mismatch, "transfer": &transfer_mismatch[..transfer_mismatch.len().min(5)] }),
                pass,
            ))
        }),
    )
}

fn rho_case(g: FiniteAbelianGroup, k: usize, want: Option<usize>) -> Case {
    let name = g.to_string();
    Case::new(
        format!("prop3.4/rho{k}/{name}"),
        "p3.4",
        9,
        Suite::Paper,
        Box::new(move |_| {
            let want = want.unwrap_or_else(|| davenport(&g));
            let got = rho_k(&g, k, RHO_BUDGET)?;
            Ok(Outcome::new(json!({ "group": name, "k": k }), json!(want), json!(got), got == want))
        }),
    )
}

// ---------------------------------------------------------------- criterion 10

const ORACLE_GROUPS: [&str; 10] = ["C3", "C4", "C5", "C6", "C7", "C2xC2", "C2xC4", "C3xC3", "C2xC2xC2", "C8"];

fn random_zero_sum(rng: &mut ChaCha8Rng, g: &FiniteAbelianGroup, max_len: usize) -> Sequence {
    random_in_kernel(rng, g, &[GroupElement::ZERO], max_len)
}

/// Lengths of every factorization, listed one by one.
fn enumerated_lengths(b: &Sequence) -> Result<Option<LengthSet>> {
    let atoms = enumerate_atoms(b.group(), &b.support(), Some(b.len()));
    let f = enumerate_factorizations(b, &atoms, 1_000_000)?;
    Ok((!f.truncated).then(|| f.items.iter().map(|z| z.len() as u32).collect()))
}

fn oracle_case() -> Case {
    Case::new(
        "props/lengths-oracle",
        "p2.2",
        10,
        Suite::Paper,
        Box::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut bad = Vec::new();
            for _ in 0..1000 {
                let g = grp(ORACLE_GROUPS.choose(&mut rng).expect("nonempty"));
                let b = random_zero_sum(&mut rng, &g, 14);
                let dp = lengths(&b)?;
                match enumerated_lengths(&b)? {
                    Some(e) if e == dp => {}
                    other => bad.push(format!("{g} {b}: {dp} vs {other:?}")),
                }
            }
            Ok(Outcome::new(json!({ "instances": 1000, "max_len": 14 }), json!({ "failures": 0 }), json!({ "failures": bad }), bad.is_empty()))
        }),
    )
}

fn sumset_case() -> Case {
    Case::new(
        "props/sumset",
        "p2.2",
        10,
        Suite::Paper,
        Box::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let mut bad = Vec::new();
            for _ in 0..1000 {
                let g = grp(ORACLE_GROUPS.choose(&mut rng).expect("nonempty"));
                let b1 = random_zero_sum(&mut rng, &g, 10);
                let b2 = random_zero_sum(&mut rng, &g, 10);
                let whole = lengths(&b1.product(&b2))?;
                let sum = lengths(&b1)?.sumset(&lengths(&b2)?);
                if !sum.iter().all(|x| whole.contains(x)) {
                    bad.push(format!("{g} {b1} | {b2}"));
                }
            }
            Ok(Outcome::new(json!({ "instances": 1000 }), json!({ "failures": 0 }), json!({ "failures": bad }), bad.is_empty()))
        }),
    )
}

/// Checks that a descriptor is a valid AAMP decomposition of `l`.
fn descriptor_valid(l: &[i64], d: &zsl_core::lengthsets::AampDescriptor) -> bool {
    let mut sorted = l.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let m = d.bound as i64;
    let top = d.central.last().copied().unwrap_or(0);
    d.reconstruct() == sorted
        && d.central.first() == Some(&0)
        && is_amp(&d.central, d.difference, &d.period).ok().flatten() == Some(d.length)
        && d.lower.iter().all(|&x| (-m..=-1).contains(&x))
        && d.upper.iter().all(|&x| (top + 1..=top + m).contains(&x))
        && sorted.iter().all(|&x| {
            let r = (x - d.shift).rem_euclid(d.difference as i64) as u32;
            d.period.iter().any(|&p| p % d.difference == r)
        })
}

fn aamp_case() -> Case {
    Case::new(
        "props/aamp-roundtrip",
        "d3.1",
        10,
        Suite::Paper,
        Box::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
            let mut bad = Vec::new();
            for i in 0..10_000 {
                let d: u32 = rng.gen_range(1..=6);
                let set: Vec<i64> = if i % 2 == 0 {
                    let n = rng.gen_range(1..=12);
                    (0..n).map(|_| rng.gen_range(0..40)).collect()
                } else {
                    // a planted AAMP with known bound
                    let mut period: Vec<u32> = (1..d).filter(|_| rng.gen_bool(0.4)).collect();
                    period.push(0);
                    period.push(d);
                    period.sort_unstable();
                    let len: i64 = rng.gen_range(0..5);
                    let y: i64 = rng.gen_range(10..20);
                    let mbound: i64 = rng.gen_range(0..6);
                    let mut v: Vec<i64> = Vec::new();
                    for x in 0..=len * d as i64 {
                        if period.iter().any(|&p| p as i64 % d as i64 == x % d as i64) {
                            v.push(y + x);
                        }
                    }
                    let fits = |x: i64| period.iter().any(|&p| p as i64 % d as i64 == (x - y).rem_euclid(d as i64));
                    for x in y - mbound..y {
                        if fits(x) && rng.gen_bool(0.5) {
                            v.push(x);
                        }
                    }
                    let top = y + len * d as i64;
                    for x in top + 1..=top + mbound {
                        if fits(x) && rng.gen_bool(0.5) {
                            v.push(x);
                        }
                    }
                    let desc = classify_aamp_with_period(&v, d, &period)?;
                    match desc {
                        Some(ds) if ds.bound as i64 <= mbound && descriptor_valid(&v, &ds) => {}
                        other => bad.push(format!("planted {v:?} d={d} period={period:?} M={mbound}: {other:?}")),
                    }
                    v
                };
                let desc = classify_aamp(&set, d)?;
                if !descriptor_valid(&set, &desc) {
                    bad.push(format!("{set:?} d={d}: {desc:?}"));
                }
            }
            bad.truncate(5);
            Ok(Outcome::new(json!({ "sets": 10_000 }), json!({ "failures": 0 }), json!({ "failures": bad }), bad.is_empty()))
        }),
    )
}

/// A random feasible point on the grid of sixteenths (all inputs lie on it).
fn random_feasible(rng: &mut ChaCha8Rng, hi: &[Rational], lo: &[Rational], alpha: Rational) -> Vec<Rational> {
    let grid = |r: Rational| (r * 16).to_integer();
    let mut x: Vec<i64> = lo.iter().map(|&v| grid(v)).collect();
    let top: Vec<i64> = hi.iter().map(|&v| grid(v)).collect();
    let mut left = grid(alpha) - x.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..hi.len()).collect();
    order.shuffle(rng);
    for &i in &order {
        let take = rng.gen_range(0..=(top[i] - x[i]).min(left));
        x[i] += take;
        left -= take;
    }
    for &i in &order {
        let take = (top[i] - x[i]).min(left);
        x[i] += take;
        left -= take;
    }
    x.into_iter().map(|v| Rational::new(v, 16)).collect()
}

fn minimize_case() -> Case {
    Case::new(
        "props/minimize",
        "l5.5",
        10,
        Suite::Paper,
        Box::new(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
            let mut bad = Vec::new();
            for _ in 0..100 {
                let t = rng.gen_range(1..=6);
                let mut hi: Vec<Rational> = (0..t).map(|_| Rational::new(rng.gen_range(0..=40), 4)).collect();
                hi.sort_unstable_by(|a, b| b.cmp(a));
                let mut lo: Vec<Rational> = hi.iter().map(|&h| h * Rational::new(rng.gen_range(0..=4), 4)).collect();
                lo.sort_unstable_by(|a, b| b.cmp(a));
                for i in 0..t {
                    if lo[i] > hi[i] {
                        lo[i] = hi[i];
                    }
                }
                let (slo, shi) = (lo.iter().sum::<Rational>(), hi.iter().sum::<Rational>());
                let span = ((shi - slo) * 16).to_integer();
                let alpha = slo + Rational::new(rng.gen_range(0..=span), 16);
                let x = minimize_product(&hi, &lo, alpha)?;
                let best = shifted_product(&x);
                for _ in 0..1000 {
                    let y = random_feasible(&mut rng, &hi, &lo, alpha);
                    if shifted_product(&y) < best {
                        bad.push(format!("hi={hi:?} lo={lo:?} alpha={alpha}: {y:?} beats {x:?}"));
                        break;
                    }
                }
            }
            Ok(Outcome::new(
                json!({ "instances": 100, "random_vectors": 1000 }),
                json!({ "failures": 0 }),
                json!({ "failures": bad }),
                bad.is_empty(),
            ))
        }),
    )
}

// ---------------------------------------------------------------- supplementary

fn relative_sums_case() -> Case {
    Case::new(
        "prop3.8/p3.5.1",
        "p3.8",
        0,
        Suite::Long,
        Box::new(|_| {
            let spec = ConstructionSpec::parse("p3.5.1", "n1=3,n2=6,d=3,k=2")?;
            let c = build_construction(&spec)?;
            let report = zsl_core::constructions::check_relative_sums(&c.sequence, c.group.unit(1), 1)?;
            Ok(Outcome::new(
                json!({ "construction": "p3.5.1", "params": "n1=3,n2=6,d=3,k=2", "g": "e2", "d": 1 }),
                json!({ "violations": 0 }),
                serde_json::to_value(&report)?,
                report.is_consistent(),
            ))
        }),
    )
}

/// Every case, in report order.
pub fn all_cases() -> Vec<Case> {
    let mut v = Vec::new();
    for name in [
        "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C2xC2", "C2xC2xC2", "C2xC2xC2xC2", "C3xC3", "C2xC4", "C2xC6", "C3xC6",
        "C4xC4",
    ] {
        v.push(davenport_case(name));
    }
    v.extend(system_cases("C3", SmallSystem::Three, 12));
    v.extend(system_cases("C4", SmallSystem::Four, 12));
    v.extend(system_cases("C2xC2xC2", SmallSystem::TwoCubed, 12));
    v.extend(system_cases("C3xC3", SmallSystem::ThreeSquared, 10));
    for (r, p) in [
        ("p3.5.1", "n1=3,n2=6,d=3,k=1"),
        ("p3.5.1", "n1=3,n2=6,d=3,k=2"),
        ("p3.5.2", "n1=3,n2=6,k=1"),
        ("p3.6.1", "n=5,d=3,k=1"),
        ("p3.6.1", "n=5,d=4,k=2"),
        ("p3.6.1", "n=7,d=3,k=1"),
        ("p3.7.1", "r=2,n=4,k=0"),
        ("p3.7.1", "r=2,n=4,k=1"),
        ("p3.7.1", "r=3,n=4,k=1"),
        ("p3.7.1", "r=2,n=6,k=1"),
        ("p3.7.2", "r=2,n=4,k=1"),
        ("l4.7.2", "k=1"),
        ("l4.7.2", "k=2"),
    ] {
        v.push(construction_case(r, p, 3, Suite::Paper));
    }
    for (r, p) in [
        ("l4.4", "k=1"),
        ("l4.4", "k=2"),
        ("l4.6", "n1=4,n2=4,k=1"),
        ("l4.6", "n1=4,n2=4,k=2"),
        ("l4.7.1", "k=1"),
    ] {
        v.push(construction_case(r, p, 4, Suite::Paper));
    }
    v.push(membership_case("prop3.7.1/not-in/C4", "p3.7.1", "C4", &[2, 4, 5], false));
    v.push(membership_case("prop3.6.2/not-in/C5", "p3.6.2", "C5", &[3, 4, 6, 7], false));
    v.push(membership_case("prop3.7.1/in/C2xC4", "p3.7.1", "C2xC4", &[2, 4, 5], true));
    v.push(delta_star_case("C5", &[1, 3]));
    v.push(delta_star_case("C6", &[1, 2, 4]));
    for n in [5, 6, 7] {
        v.push(max_delta_star_case(n));
    }
    v.push(five_form_case());
    for name in ["C2xC2", "C2xC4", "C3xC3", "C2xC6", "C3xC6"] {
        v.push(structure_case(name));
    }
    for g in groups_up_to(16) {
        v.push(relative_case(g));
    }
    for g in groups_up_to(16) {
        v.push(rho_case(g, 2, None));
    }
    v.push(rho_case(grp("C4"), 3, Some(5)));
    v.push(rho_case(grp("C5"), 3, Some(6)));
    v.push(oracle_case());
    v.push(sumset_case());
    v.push(aamp_case());
    v.push(minimize_case());
    for (r, p) in [("l4.3", "n=7,k=1"), ("l4.3", "n=8,k=1"), ("l4.8.1", "k=1"), ("l4.8.2", "k=1")] {
        v.push(construction_case(r, p, 0, Suite::Long));
    }
    v.push(relative_sums_case());
    v
}

/// Cases of `suite` whose id starts with one of `filters` (all when empty).
pub fn select(suite: Suite, filters: &[String]) -> Vec<Case> {
    all_cases()
        .into_iter()
        .filter(|c| c.tier <= suite)
        .filter(|c| filters.is_empty() || filters.iter().any(|f| c.id.starts_with(f.as_str())))
        .collect()
}

/// Runs the selected cases in order.
pub fn verify_suite(suite: Suite, filters: &[String], seed: u64) -> VerifyReport {
    let cases: Vec<CaseRecord> = select(suite, filters).iter().map(|c| c.run(seed)).collect();
    let pass = cases.iter().all(|c| c.status != Status::Fail);
    VerifyReport { suite: suite.name().to_string(), cases, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_system_membership() {
        let three = SmallSystem::Three;
        assert!(three.contains(&LengthSet::new([2, 3])));
        assert!(!three.contains(&LengthSet::new([1, 2])));
        assert!(three.contains(&LengthSet::new([0])));
        let four = SmallSystem::Four;
        assert!(four.contains(&LengthSet::new([2, 4])));
        assert!(!four.contains(&LengthSet::new([2, 4, 5])));
        assert!(four.contains(&LengthSet::new([3, 4, 5])));
        assert!(!four.contains(&LengthSet::new([2, 3, 4])));
        let cube = SmallSystem::TwoCubed;
        assert!(cube.contains(&LengthSet::new([3, 4, 5, 6])));
        assert!(!cube.contains(&LengthSet::new([2, 3, 4])));
        let sq = SmallSystem::ThreeSquared;
        assert!(sq.contains(&LengthSet::new([1])));
        assert!(sq.contains(&LengthSet::new([2, 3, 4, 5])));
        assert!(!sq.contains(&LengthSet::new([2, 3, 4, 5, 6])));
        assert!(sq.contains(&LengthSet::new(3..=7)));
        assert!(!sq.contains(&LengthSet::new([1, 2])));
    }

    #[test]
    fn group_listing() {
        let gs = groups_up_to(16);
        let names: Vec<String> = gs.iter().map(ToString::to_string).collect();
        assert_eq!(gs.iter().filter(|g| g.order() == 16).count(), 5);
        assert_eq!(gs.iter().filter(|g| g.order() == 8).count(), 3);
        assert!(names.contains(&"C2xC2xC2xC2".to_string()));
        assert_eq!(gs.len(), 24);
    }

    #[test]
    fn case_ids_are_unique() {
        let cases = all_cases();
        let mut ids: Vec<&str> = cases.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        let n = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn filter_by_prefix() {
        let sel = select(Suite::Paper, &["prop3.6".to_string()]);
        assert!(!sel.is_empty());
        assert!(sel.iter().all(|c| c.id.starts_with("prop3.6")));
        let quick = select(Suite::Quick, &[]);
        assert!(quick.iter().all(|c| c.id.starts_with("davenport") || c.id.starts_with("prop4.2")));
        assert!(select(Suite::Long, &[]).iter().any(|c| c.id == "lemma4.8.2/k=1"));
        assert!(!select(Suite::Paper, &[]).iter().any(|c| c.id == "lemma4.8.2/k=1"));
    }
}
