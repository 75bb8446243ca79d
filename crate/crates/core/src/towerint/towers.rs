//! Certificates for the smallest base-10 elated numbers of heights 13 to 16.
//!
//! ```text
//! ε13 = 8158·10^13888887 − 1
//! ε14 = 8579·10^n14 − 1,  n14 = ((837·10^13888888 − 112)/8 − 202)/81
//! ε15 = 7489·10^n15 − 1,  n15 = (ε14/7 − 193)/81
//! ε16 = 9189·10^n16 − 1,  n16 = (ε15/9 − 210)/81
//! ```
//!
//! Each number is rebuilt from the preimage reduction of its first image,
//! compared with its closed form, stepped symbolically to the previous one
//! and, below height 14, iterated exactly down to 1. Size bounds that are
//! affine in a single huge power are compared exactly; the remaining steps
//! of the minimality argument are listed as trusted.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::modular::{Checker, ModContext, ModEvaluator, DEFAULT_EXACT_DIGITS, DEFAULT_TRIALS};
use super::{RunSymbolic, TowerInt};
use crate::digitmap::{Base, DigitMap, Exponent};
use crate::error::{Error, Result};
use crate::heights::{basic_of_height, HeightTable};
use crate::preimage::{reduce_preimages, reduce_preimages_symbolic, PreimageSet};

const TEN: Base = Base::TEN;
const E2: Exponent = Exponent::SQUARE;

/// Image of ε12 = 8888999999 that every height-13 candidate must hit.
const IMAGE_13: u64 = 8_999_999_888;
const EPSILON_12: u64 = 8_888_999_999;
const LEN_13: u64 = 13_888_891;
const EXP_13: u64 = 13_888_887;
const EXP_14: u64 = 13_888_888;

/// Options for [`verify_epsilon_tower`].
#[derive(Clone, Debug)]
pub struct TowerConfig {
    pub trials: usize,
    pub exact_digits: u64,
}

impl Default for TowerConfig {
    fn default() -> Self {
        TowerConfig { trials: DEFAULT_TRIALS, exact_digits: DEFAULT_EXACT_DIGITS }
    }
}

/// How a check was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trust {
    /// Computed and checked by this library.
    Checked,
    /// A step of the minimality argument taken on trust, not machine-checked.
    ArgumentTrusted,
}

impl fmt::Display for Trust {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trust::Checked => "checked",
            Trust::ArgumentTrusted => "argument-trusted",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Congruence {
    pub label: String,
    pub modulus: String,
    pub expected: String,
    pub computed: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DescentCheck {
    pub label: String,
    /// `"exact"` or `"mod-primes"`.
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteCheck {
    pub label: String,
    pub trust: Trust,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainLink {
    pub value: String,
    pub height: u64,
}

/// Everything established for one `ε_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerReport {
    pub k: u32,
    pub epsilon: String,
    pub closed_form: String,
    pub congruences: Vec<Congruence>,
    pub descent: Vec<DescentCheck>,
    pub checks: Vec<FiniteCheck>,
    pub chain: Vec<ChainLink>,
    pub height: u64,
    pub trials: usize,
}

/// The four numbers, their exponents and the image of ε14.
#[derive(Clone, Debug)]
pub struct TowerNumbers {
    pub epsilon13: RunSymbolic,
    /// The five basic height-13 numbers below `8·10^13888891`, ascending.
    pub height13: Vec<RunSymbolic>,
    pub image14: TowerInt,
    pub epsilon14: RunSymbolic,
    pub epsilon15: RunSymbolic,
    pub epsilon16: RunSymbolic,
    pub n14: TowerInt,
    pub n15: TowerInt,
    pub n16: TowerInt,
    pub reductions: Vec<(String, PreimageSet)>,
}

fn fail(label: impl Into<String>) -> Error {
    Error::Verification(label.into())
}

fn big(n: u64) -> TowerInt {
    TowerInt::from(n)
}

fn ten_pow(e: TowerInt) -> TowerInt {
    TowerInt::pow(10u32, e)
}

/// `lead·10^e − 1`.
fn closed_form(lead: u64, e: &TowerInt) -> TowerInt {
    ten_pow(e.clone()).scale(lead).add_small(-1)
}

fn square_sum(digits: &[u32]) -> i64 {
    digits.iter().map(|&d| i64::from(d * d)).sum()
}

/// Prefix a leading digit to each reduced preimage and keep the smallest.
fn prefixed(lead: u32, set: &PreimageSet) -> Result<Vec<RunSymbolic>> {
    let mut out = Vec::new();
    for m in &set.members {
        let mut runs = vec![(lead, TowerInt::one())];
        runs.extend(m.runs().iter().map(|r| (r.digit, r.count.clone())));
        out.push(RunSymbolic::new(TEN, runs)?);
    }
    Ok(out)
}

/// Count of the final run of nines.
fn nines(x: &RunSymbolic) -> TowerInt {
    let last = x.runs().last().expect("nonempty");
    assert_eq!(last.digit, 9);
    last.count.clone()
}

/// Digits before the final run of nines.
fn prefix_digits(x: &RunSymbolic) -> Vec<u32> {
    let runs = x.runs();
    runs[..runs.len() - 1]
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.digit, r.count.small_value().expect("short prefix") as usize))
        .collect()
}

/// Builds the four numbers from the preimage reductions and checks them against the closed forms.
pub fn build_epsilon_tower(checker: &Checker) -> Result<TowerNumbers> {
    let mut reductions = Vec::new();

    // height 13: 8·(64 + S(rest)) = 8999999888
    let a13 = BigUint::from(IMAGE_13 / 8 - 64);
    let s13 = reduce_preimages(&a13, TEN)?;
    let mut height13 = prefixed(8, &s13)?;
    height13.sort_by(|x, y| x.try_cmp(y).expect("literal counts"));
    let epsilon13 = height13[0].clone();
    reductions.push((format!("S({a13})"), s13));

    // height 14: image 837·10^13888888 − 112, then a = image/8 − 64
    let image14 = ten_pow(big(EXP_14)).scale(837).add_small(-112);
    let a14 = TowerInt::exact_div(image14.clone(), 8u32)?.add_small(-64);
    let s14 = reduce_preimages_symbolic(&a14, TEN)?;
    let epsilon14 = prefixed(8, &s14)?.remove(0);
    reductions.push(("S(image(ε14)/8 − 64)".into(), s14));
    let pre14 = prefix_digits(&epsilon14);
    let c14 = square_sum(&pre14);
    if c14 != 202 || c14 - 64 != 138 {
        return Err(fail(format!("prefix {pre14:?} of ε14 has square sum {c14}, expected 202 = 8^2 + 138")));
    }
    let n14 = TowerInt::exact_div(TowerInt::exact_div(image14.clone(), 8u32)?.add_small(-c14), 81u32)?;

    // height 15: a = ε14/7 − 49
    let eps14_value = closed_form(8579, &n14);
    let a15 = TowerInt::exact_div(eps14_value.clone(), 7u32)?.add_small(-49);
    let s15 = reduce_preimages_symbolic(&a15, TEN)?;
    let epsilon15 = prefixed(7, &s15)?.remove(0);
    reductions.push(("S(ε14/7 − 49)".into(), s15));
    let c15 = square_sum(&prefix_digits(&epsilon15));
    if c15 != 49 + 144 {
        return Err(fail(format!("prefix of ε15 has square sum {c15}, expected 193 = 7^2 + 144")));
    }
    let n15 = TowerInt::exact_div(TowerInt::exact_div(eps14_value, 7u32)?.add_small(-c15), 81u32)?;

    // height 16: a = ε15/9 − 81; the smaller member gives ε16
    let eps15_value = closed_form(7489, &n15);
    let a16 = TowerInt::exact_div(eps15_value.clone(), 9u32)?.add_small(-81);
    let s16 = reduce_preimages_symbolic(&a16, TEN)?;
    let mut cands = prefixed(9, &s16)?;
    let prefixes: Vec<Vec<u32>> = cands.iter().map(prefix_digits).collect();
    let best = (0..cands.len()).min_by_key(|&i| prefixes[i].clone()).expect("nonempty");
    let epsilon16 = cands.swap_remove(best);
    reductions.push(("S(ε15/9 − 81)".into(), s16));
    let c16 = square_sum(&prefix_digits(&epsilon16));
    if c16 != 81 + 129 {
        return Err(fail(format!("prefix of ε16 has square sum {c16}, expected 210 = 9^2 + 129")));
    }
    let n16 = TowerInt::exact_div(TowerInt::exact_div(eps15_value, 9u32)?.add_small(-c16), 81u32)?;

    // the reductions append q nines to a member already ending in nines; the totals must be n_k
    let epsilon14 = with_exponent("ε14", &epsilon14, &n14, checker)?;
    let epsilon15 = with_exponent("ε15", &epsilon15, &n15, checker)?;
    let epsilon16 = with_exponent("ε16", &epsilon16, &n16, checker)?;
    Ok(TowerNumbers { epsilon13, height13, image14, epsilon14, epsilon15, epsilon16, n14, n15, n16, reductions })
}

/// Replaces the trailing nines count by `n` after checking they agree.
fn with_exponent(label: &str, x: &RunSymbolic, n: &TowerInt, checker: &Checker) -> Result<RunSymbolic> {
    if !checker.equal(&nines(x), n)? {
        return Err(fail(format!("trailing nines of {label} differ from its exponent")));
    }
    let mut runs: Vec<(u32, TowerInt)> = x.runs().iter().map(|r| (r.digit, r.count.clone())).collect();
    runs.last_mut().expect("nonempty").1 = n.clone();
    RunSymbolic::new(TEN, runs)
}

/// `(p·Y + q)/d` for a single huge variable `Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Affine {
    p: BigInt,
    q: BigInt,
    d: BigInt,
}

impl Affine {
    fn var() -> Self {
        Affine { p: BigInt::one(), q: BigInt::zero(), d: BigInt::one() }
    }

    fn int(c: i64) -> Self {
        Affine { p: BigInt::zero(), q: BigInt::from(c), d: BigInt::one() }
    }

    fn add(&self, o: &Affine) -> Self {
        Affine { p: &self.p * &o.d + &o.p * &self.d, q: &self.q * &o.d + &o.q * &self.d, d: &self.d * &o.d }.reduced()
    }

    fn add_int(&self, c: i64) -> Self {
        self.add(&Affine::int(c))
    }

    fn mul(&self, c: i64) -> Self {
        Affine { p: &self.p * c, q: &self.q * c, d: self.d.clone() }.reduced()
    }

    fn div(&self, c: i64) -> Self {
        Affine { p: self.p.clone(), q: self.q.clone(), d: &self.d * c }.reduced()
    }

    fn reduced(self) -> Self {
        let g = self.p.gcd(&self.q).gcd(&self.d);
        if g.is_zero() || g.is_one() {
            return self;
        }
        Affine { p: self.p / &g, q: self.q / &g, d: self.d / &g }
    }

    /// `(P, Q)` with `self − other = (P·Y + Q)/(d·d')`.
    fn diff(&self, o: &Affine) -> (BigInt, BigInt) {
        (&self.p * &o.d - &o.p * &self.d, &self.q * &o.d - &o.q * &self.d)
    }

    /// `self < other` for every `Y ≥ y_min`.
    fn less_than(&self, o: &Affine, y_min: &BigInt) -> bool {
        let (p, q) = self.diff(o);
        if p.is_zero() {
            return q.is_negative();
        }
        // P < 0 and P·y_min + Q < 0 give P·Y + Q < 0 for all Y ≥ y_min
        p.is_negative() && (&p * y_min + &q).is_negative()
    }

    fn equals(&self, o: &Affine) -> bool {
        self.diff(o) == (BigInt::zero(), BigInt::zero())
    }
}

struct Report {
    trials: usize,
    congruences: Vec<Congruence>,
    descent: Vec<DescentCheck>,
    checks: Vec<FiniteCheck>,
}

impl Report {
    fn congruence(&mut self, ev: &mut ModEvaluator, label: &str, x: &TowerInt, m: u64, expected: u64) -> Result<()> {
        let ctx = ModContext::new(m)?;
        let r = ev.eval(x, &ctx)?;
        if r != BigUint::from(expected) {
            return Err(fail(format!("{label} ≡ {expected} (mod {m}) fails: residue is {r}")));
        }
        self.congruences.push(Congruence {
            label: label.into(),
            modulus: m.to_string(),
            expected: expected.to_string(),
            computed: r.to_string(),
        });
        Ok(())
    }

    fn equal(&mut self, checker: &Checker, label: &str, x: &TowerInt, y: &TowerInt) -> Result<()> {
        let exact = x.is_literal() && y.is_literal();
        if !checker.equal(x, y)? {
            return Err(fail(format!("{label} does not hold")));
        }
        let method = if exact { "exact".to_string() } else { format!("mod-primes:{}", self.trials) };
        self.descent.push(DescentCheck { label: label.into(), method });
        Ok(())
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) -> Result<()> {
        let label = label.into();
        if !ok {
            return Err(fail(format!("{label} does not hold")));
        }
        self.checks.push(FiniteCheck { label, trust: Trust::Checked });
        Ok(())
    }

    fn trusted(&mut self, label: &str) {
        self.checks.push(FiniteCheck { label: label.into(), trust: Trust::ArgumentTrusted });
    }
}

/// Distinct arrangements of `digits` (small multisets only).
fn arrangements(digits: &[u32]) -> Vec<Vec<u32>> {
    let mut d = digits.to_vec();
    d.sort_unstable();
    let mut out = vec![d.clone()];
    // lexicographic next permutation
    while let Some(i) = (0..d.len().saturating_sub(1)).rev().find(|&i| d[i] < d[i + 1]) {
        let j = (i + 1..d.len()).rev().find(|&j| d[j] > d[i]).unwrap();
        d.swap(i, j);
        d[i + 1..].reverse();
        out.push(d.clone());
    }
    out
}

fn value_of(digits: &[u32]) -> u64 {
    digits.iter().fold(0u64, |acc, &d| acc * 10 + u64::from(d))
}

/// Digit counts of a run-length numeral, excluding its leading digit.
fn tail_histogram(x: &RunSymbolic) -> BTreeMap<u32, u64> {
    let mut h = BTreeMap::new();
    for (i, (d, c)) in x.literal_counts().expect("literal counts").into_iter().enumerate() {
        let c = if i == 0 { c - 1 } else { c };
        if c > 0 {
            *h.entry(d).or_insert(0) += c;
        }
    }
    h
}

/// Ordered `len`-tuples drawable from a digit multiset.
fn tuples(hist: &BTreeMap<u32, u64>, len: usize) -> Vec<Vec<u32>> {
    if len == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (&d, &c) in hist {
        if c == 0 {
            continue;
        }
        let mut rest = hist.clone();
        *rest.get_mut(&d).unwrap() -= 1;
        for mut t in tuples(&rest, len - 1) {
            t.insert(0, d);
            out.push(t);
        }
    }
    out
}

fn height_table() -> Result<HeightTable> {
    HeightTable::new(DigitMap::elated(TEN))
}

/// Checks and labels for height 13.
fn verify_13(r: &mut Report, t: &TowerNumbers, table: &HeightTable) -> Result<()> {
    let twelve = basic_of_height(table, 12, &BigUint::from(80_000_000_000u64));
    r.check(
        "8888999999 is the only basic elated number of height 12 below 8·10^10",
        twelve == [BigUint::from(EPSILON_12)],
    )?;
    r.check(
        "7·(7^2 + 13888891·9^2) < 8888999999",
        7 * (49 + LEN_13 * 81) < EPSILON_12,
    )?;
    r.check(
        "9·(9^2 + 13888890·9^2) < 8·10^10",
        9 * (81 + (LEN_13 - 1) * 81) < 80_000_000_000,
    )?;
    let class: Vec<u64> = arrangements(&[8, 8, 8, 9, 9, 9, 9, 9, 9])
        .iter()
        .map(|tail| value_of(&[&[8][..], tail].concat()))
        .collect();
    r.check("84 numbers are equivalent to 8888999999", class.len() == 84)?;
    r.check("no number equivalent to 8888999999 is a multiple of 9", class.iter().all(|n| n % 9 != 0))?;
    let eights: Vec<u64> = class.iter().copied().filter(|n| n % 8 == 0).collect();
    r.check("8999999888 is the only multiple of 8 equivalent to 8888999999", eights == [IMAGE_13])?;
    r.check("8999999888/8 − 8^2 = 1124999922", IMAGE_13 / 8 - 64 == 1_124_999_922)?;
    let s = &t.reductions[0].1;
    r.check(
        "S(1124999922) reduces to S(561) with 13888881 nines appended",
        s.reduced_target == 561 && s.appended.small_value() == Some(13_888_881) && s.members.len() == 5,
    )?;
    for x in &t.height13 {
        let step = x.elated_step_symbolic(E2);
        r.descent.push(DescentCheck { label: format!("E2({x}) = 8999999888"), method: "exact".into() });
        if step != big(IMAGE_13) {
            return Err(fail(format!("E2({x}) = {step}, expected 8999999888")));
        }
        r.check(format!("{x} has height 13"), table.height_runs(x, 64)? == Some(13))?;
    }
    let smallest = t.height13.iter().all(|x| t.epsilon13.try_cmp(x) != Some(std::cmp::Ordering::Greater));
    r.check("ε13 is the smallest of the five height-13 numbers", smallest)?;
    r.trusted("a basic height-13 number below 8·10^13888891 has leading digit 8 and maps to a number equivalent to 8888999999");
    Ok(())
}

/// Checks and labels for height 14.
fn verify_14(r: &mut Report, ev: &mut ModEvaluator, checker: &Checker, t: &TowerNumbers) -> Result<()> {
    let image = &t.image14;
    let e14 = t.epsilon14.to_tower();
    let closed14 = closed_form(8579, &t.n14);
    r.equal(checker, "ε14 = 8579·10^n14 − 1", &e14, &closed14)?;
    r.equal(checker, "E2(ε14) = 837·10^13888888 − 112", &t.epsilon14.elated_step_symbolic(E2), image)?;

    // the image written in runs, its class, and its step back to 8999999888
    let image_runs = RunSymbolic::from_counts(TEN, &[(8, 1), (3, 1), (6, 1), (9, 13_888_885), (8, 3)])?;
    r.equal(checker, "837·10^13888888 − 112 = 836[9^13888885]888", &image_runs.to_tower(), image)?;
    let other = &t.height13[1];
    r.check(
        format!("836[9^13888885]888 is equivalent to {other}"),
        image_runs.leading_digit() == other.leading_digit() && tail_histogram(&image_runs) == tail_histogram(other),
    )?;
    let step = image_runs.elated_step_symbolic(E2);
    r.equal(checker, "E2(836[9^13888885]888) = 8999999888", &step, &big(IMAGE_13))?;

    // integrality of n14
    r.congruence(ev, "837·10^13888888 − 112", image, 8, 0)?;
    r.congruence(ev, "(837·10^13888888 − 112)/8 − 202", &TowerInt::exact_div(image.clone(), 8u32)?.add_small(-202), 81, 0)?;

    // bounds, affine in Y = 10^13888888
    let y = Affine::var();
    let n14 = y.mul(837).add_int(-112).div(8).add_int(-202).div(81);
    let y_min = TowerInt::pow_raw(10u32, big(EXP_14)).lower_bound();
    let lhs = n14.add_int(4).mul(81).add_int(49).mul(7);
    r.check("7·(7^2 + (n14 + 4)·9^2) < 8·10^13888890", lhs.less_than(&y.mul(800), &y_min))?;
    let lhs = n14.add_int(4).mul(81).mul(9);
    r.check("9·(9^2 + (n14 + 3)·9^2) < 8·10^13888891", lhs.less_than(&y.mul(8000), &y_min))?;
    let lhs = n14.add_int(3).mul(81).add_int(64).mul(8);
    r.check("8·(8^2 + (n14 + 3)·9^2) = 728 + 837·10^13888888", lhs.equals(&y.mul(837).add_int(728)))?;

    // the height-13 numbers: none is a multiple of 9; ε13's class has no multiple of 8
    for x in &t.height13 {
        let sum: u64 = x.literal_counts().unwrap().iter().map(|&(d, c)| u64::from(d) * c).sum();
        r.check(format!("{x} is not a multiple of 9"), !sum.is_multiple_of(9))?;
    }
    let h13 = tail_histogram(&t.epsilon13);
    r.check(
        "no number equivalent to ε13 is a multiple of 8",
        tuples(&h13, 3).iter().all(|d| !value_of(d).is_multiple_of(8)),
    )?;

    // under the bound, the class of 8368890000·10^13888881 − 1 has one multiple of 8
    let hist = tail_histogram(other);
    let prefixes: Vec<Vec<u32>> = tuples(&hist, 2).into_iter().filter(|p| 800 + value_of(p) <= 837).collect();
    r.check("8·10^2 + next two digits ≤ 837 forces the prefix 836", prefixes == [vec![3, 6]])?;
    let mut rest = hist.clone();
    *rest.get_mut(&3).unwrap() -= 1;
    *rest.get_mut(&6).unwrap() -= 1;
    let endings: Vec<Vec<u32>> = tuples(&rest, 3).into_iter().filter(|d| value_of(d).is_multiple_of(8)).collect();
    r.check("after 836 the only ending divisible by 8 is 888", endings == [vec![8, 8, 8]])?;

    // the reduction used for ε14
    let s = &t.reductions[1].1;
    r.check("reduction of image/8 − 8^2 lands on S(543) = {57899999}", s.reduced_target == 543 && s.members.len() == 1)?;
    r.equal(checker, "q = n14 − 5", &s.appended, &t.n14.add_small(-5))?;

    r.trusted("a basic height-14 number below 8·10^(n14+4) has leading digit 8 and maps into the class of a height-13 number listed above");
    Ok(())
}

/// Residues proving `n15` is an integer.
fn ladder_15(r: &mut Report, ev: &mut ModEvaluator, t: &TowerNumbers) -> Result<()> {
    let e14 = closed_form(8579, &t.n14);
    r.congruence(ev, "n14", &t.n14, 6, 2)?;
    r.congruence(ev, "ε14", &e14, 7, 0)?;
    r.congruence(ev, "n14", &t.n14, 54, 26)?;
    r.congruence(ev, "ε14", &e14, 81, 55)?;
    r.congruence(ev, "7·58", &big(58).scale(7), 81, 1)?;
    r.congruence(ev, "55·58", &big(55 * 58), 81, 31)?;
    let q = TowerInt::exact_div(e14, 7u32)?;
    r.congruence(ev, "ε14/7", &q, 81, 31)?;
    r.congruence(ev, "ε14/7 − 7^2 − 144", &q.add_small(-193), 81, 0)?;
    Ok(())
}

/// Residues proving `n16` is an integer.
fn ladder_16(r: &mut Report, ev: &mut ModEvaluator, t: &TowerNumbers) -> Result<()> {
    let m = 6561 * 7;
    let e14 = closed_form(8579, &t.n14);
    r.congruence(ev, "10^1458", &ten_pow(big(1458)), m, 1)?;
    r.congruence(ev, "n14", &t.n14, 1458, 566)?;
    r.congruence(ev, "10^n14", &TowerInt::pow_raw(10u32, t.n14.clone()), m, 4447)?;
    r.congruence(ev, "8579·4447 − 1", &big(8579 * 4447 - 1), m, 31402)?;
    r.congruence(ev, "ε14", &e14, m, 31402)?;
    let q = TowerInt::exact_div(e14, 7u32)?;
    r.congruence(ev, "ε14/7", &q, 6561, 4486)?;
    r.congruence(ev, "81·n15", &t.n15.scale(81), 6561, 4293)?;
    r.congruence(ev, "n15", &t.n15, 81, 53)?;
    r.congruence(ev, "10^81", &ten_pow(big(81)), 729, 1)?;
    let e15 = closed_form(7489, &t.n15);
    r.congruence(ev, "ε15", &e15, 729, 432)?;
    let q = TowerInt::exact_div(e15, 9u32)?;
    r.congruence(ev, "ε15/9", &q, 81, 48)?;
    r.congruence(ev, "ε15/9 − 9^2 − 129", &q.add_small(-210), 81, 0)?;
    Ok(())
}

fn verify_15(r: &mut Report, checker: &Checker, t: &TowerNumbers) -> Result<()> {
    let e15 = t.epsilon15.to_tower();
    let e14 = closed_form(8579, &t.n14);
    r.equal(checker, "ε15 = 7489·10^n15 − 1", &e15, &closed_form(7489, &t.n15))?;
    r.equal(checker, "E2(ε15) = ε14", &t.epsilon15.elated_step_symbolic(E2), &e14)?;

    // bounds, affine in Z = 10^n14 with ε14 = 8579·Z − 1
    let z = Affine::var();
    let eps14 = z.mul(8579).add_int(-1);
    let n15 = eps14.div(7).add_int(-193).div(81);
    let z_min = TowerInt::pow_raw(10u32, t.n14.clone()).lower_bound();
    let lhs = n15.add_int(4).mul(81).add_int(36).mul(6);
    r.check("6·(6^2 + (n15 + 4)·9^2) < ε14", lhs.less_than(&eps14, &z_min))?;
    let lhs = n15.add_int(4).mul(81).mul(9);
    r.check("9·(9^2 + (n15 + 3)·9^2) < 8·10^(n14+4)", lhs.less_than(&z.mul(80_000), &z_min))?;
    let lhs = n15.add_int(3).mul(81).add_int(49).mul(7);
    r.check("7·(7^2 + (n15 + 3)·9^2) = ε14 + 693", lhs.equals(&eps14.add_int(693)))?;

    let h = tail_histogram(&RunSymbolic::from_counts(TEN, &[(8, 1), (5, 1), (7, 1), (8, 1), (9, 3)])?);
    r.check(
        "no number equivalent to ε14 is a multiple of 8",
        tuples(&h, 3).iter().all(|d| !value_of(d).is_multiple_of(8)),
    )?;
    r.check("no number equivalent to ε14 is a multiple of 9", (8 + 5 + 7 + 8) % 9 != 0)?;
    let s = &t.reductions[2].1;
    r.check("reduction of ε14/7 − 7^2 lands on S(549) = {48899999}", s.reduced_target == 549 && s.members.len() == 1)?;
    r.equal(checker, "q = n15 − 5", &s.appended, &t.n15.add_small(-5))?;
    r.trusted("the only number equivalent to ε14 and at most ε14 + 693 is ε14");
    Ok(())
}

fn verify_16(r: &mut Report, checker: &Checker, t: &TowerNumbers) -> Result<()> {
    let e16 = t.epsilon16.to_tower();
    let e15 = closed_form(7489, &t.n15);
    r.equal(checker, "ε16 = 9189·10^n16 − 1", &e16, &closed_form(9189, &t.n16))?;
    r.equal(checker, "E2(ε16) = ε15", &t.epsilon16.elated_step_symbolic(E2), &e15)?;

    // bounds, affine in W = 10^n15 with ε15 = 7489·W − 1
    let w = Affine::var();
    let eps15 = w.mul(7489).add_int(-1);
    let n16 = eps15.div(9).add_int(-210).div(81);
    let w_min = TowerInt::pow_raw(10u32, t.n15.clone()).lower_bound();
    let lhs = n16.add_int(3).mul(81).add_int(64).mul(8);
    r.check("8·(8^2 + (n16 + 3)·9^2) < ε15", lhs.less_than(&eps15, &w_min))?;
    let lhs = n16.add_int(4).mul(81).mul(9);
    r.check("9·(9^2 + (n16 + 3)·9^2) = ε15 + 1026", lhs.equals(&eps15.add_int(1026)))?;
    r.check("ε15 + 1026 < 7·10^(n15+4)", eps15.add_int(1026).less_than(&w.mul(70_000), &w_min))?;

    let s = &t.reductions[3].1;
    r.check(
        "reduction of ε15/9 − 9^2 lands on S(534) = {18899999, 47899999}",
        s.reduced_target == 534 && s.members.len() == 2,
    )?;
    r.equal(checker, "q = n16 − 5", &s.appended, &t.n16.add_small(-5))?;
    r.trusted("a number equivalent to ε15 and at most ε15 + 1026 is ε15");
    Ok(())
}

/// Verifies `ε_k` for `k` in `13..=16` and returns the evidence.
pub fn verify_epsilon_tower(k: u32, config: &TowerConfig) -> Result<TowerReport> {
    if !(13..=16).contains(&k) {
        return Err(Error::Precondition(format!("k must be in 13..=16, got {k}")));
    }
    let checker = Checker::new(config.trials).with_exact_digits(config.exact_digits);
    let numbers = build_epsilon_tower(&checker)?;
    let table = height_table()?;
    let mut ev = ModEvaluator::new();
    let mut r = Report { trials: checker.trials(), congruences: vec![], descent: vec![], checks: vec![] };

    r.equal(&checker, "ε13 = 8158·10^13888887 − 1", &numbers.epsilon13.to_tower(), &closed_form(8158, &big(EXP_13)))?;
    verify_13(&mut r, &numbers, &table)?;
    if k >= 14 {
        verify_14(&mut r, &mut ev, &checker, &numbers)?;
        ladder_15(&mut r, &mut ev, &numbers)?;
    }
    if k >= 15 {
        verify_15(&mut r, &checker, &numbers)?;
    }
    if k >= 16 {
        ladder_16(&mut r, &mut ev, &numbers)?;
        verify_16(&mut r, &checker, &numbers)?;
    }

    // chain from ε_k down to 8999999888, then exact iteration
    let symbolic: Vec<String> = match k {
        13 => vec![],
        14 => vec!["836[9^13888885]888".into()],
        15 => vec![numbers.epsilon14.to_string(), "836[9^13888885]888".into()],
        _ => vec![numbers.epsilon15.to_string(), numbers.epsilon14.to_string(), "836[9^13888885]888".into()],
    };
    let tail = table
        .trajectory(&BigUint::from(IMAGE_13))?
        .ok_or_else(|| fail("8999999888 is not attracted to 1"))?;
    let tail_height = tail.len() as u64 - 1;
    if tail_height != 12 {
        return Err(fail(format!("8999999888 has height {tail_height}, expected 12")));
    }
    let top = match k {
        13 => &numbers.epsilon13,
        14 => &numbers.epsilon14,
        15 => &numbers.epsilon15,
        _ => &numbers.epsilon16,
    };
    let height = u64::from(k);
    let mut chain = vec![ChainLink { value: top.to_string(), height }];
    for (i, v) in symbolic.iter().enumerate() {
        chain.push(ChainLink { value: v.clone(), height: height - 1 - i as u64 });
    }
    for (i, v) in tail.iter().enumerate() {
        chain.push(ChainLink { value: v.to_string(), height: 12 - i as u64 });
    }
    if chain.len() as u64 != height + 1 {
        return Err(fail(format!("chain from ε{k} has {} steps", chain.len() - 1)));
    }

    Ok(TowerReport {
        k,
        epsilon: top.to_string(),
        closed_form: match k {
            13 => "8158*10^13888887 - 1".into(),
            14 => "8579*10^n14 - 1".into(),
            15 => "7489*10^n15 - 1".into(),
            _ => "9189*10^n16 - 1".into(),
        },
        congruences: r.congruences,
        descent: r.descent,
        checks: r.checks,
        chain,
        height,
        trials: r.trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_comparisons() {
        let y = Affine::var();
        let big = BigInt::from(10).pow(30);
        assert!(y.mul(2).less_than(&y.mul(3), &big));
        assert!(!y.mul(3).less_than(&y.mul(2), &big));
        assert!(y.add_int(5).less_than(&y.mul(2), &BigInt::from(6)));
        assert!(!y.add_int(5).less_than(&y.mul(2), &BigInt::from(5)));
        assert!(y.div(3).mul(3).equals(&y));
    }

    #[test]
    fn arrangement_counts() {
        assert_eq!(arrangements(&[8, 8, 8, 9, 9, 9, 9, 9, 9]).len(), 84);
        assert_eq!(arrangements(&[1, 2, 3]).len(), 6);
    }

    #[test]
    fn tower_numbers_have_expected_shapes() {
        let t = build_epsilon_tower(&Checker::default()).unwrap();
        assert_eq!(t.epsilon13.to_string(), "8157[9^13888887]");
        assert_eq!(t.epsilon14.literal_counts(), None);
        let pre = |x: &RunSymbolic| prefix_digits(x);
        assert_eq!(pre(&t.epsilon14), vec![8, 5, 7, 8]);
        assert_eq!(pre(&t.epsilon15), vec![7, 4, 8, 8]);
        assert_eq!(pre(&t.epsilon16), vec![9, 1, 8, 8]);
        let five: Vec<String> = t.height13.iter().map(|x| x.to_string()).collect();
        assert_eq!(
            five,
            [
                "8157[9^13888887]",
                "836888[9^13888885]",
                "83777[9^13888886]",
                "8555[9^13888887]",
                "8788888888[9^13888881]"
            ]
        );
    }

    #[test]
    fn verifies_all_four_heights() {
        for k in 13..=16 {
            let r = verify_epsilon_tower(k, &TowerConfig::default()).unwrap();
            assert_eq!(r.height, u64::from(k));
            assert_eq!(r.chain.len(), k as usize + 1);
            assert_eq!(r.chain.last().unwrap().value, "1");
            assert!(r.checks.iter().any(|c| c.trust == Trust::ArgumentTrusted));
            assert!(r.descent.iter().all(|d| d.method == "exact" || d.method == "mod-primes:20"));
        }
        let r14 = verify_epsilon_tower(14, &TowerConfig::default()).unwrap();
        let has = |label: &str, m: &str, v: &str| {
            r14.congruences.iter().any(|c| c.label == label && c.modulus == m && c.computed == v)
        };
        assert!(has("n14", "6", "2"));
        assert!(has("ε14", "81", "55"));
        assert!(has("ε14/7", "81", "31"));
        let r16 = verify_epsilon_tower(16, &TowerConfig::default()).unwrap();
        assert!(r16.epsilon.starts_with("9188[9^("));
        assert!(r14.epsilon.starts_with("8578[9^("));
        assert!(r14.epsilon.contains("837*10^13888888"));
    }

    #[test]
    fn out_of_range_heights_are_rejected() {
        assert!(verify_epsilon_tower(12, &TowerConfig::default()).is_err());
        assert!(verify_epsilon_tower(17, &TowerConfig::default()).is_err());
    }

    #[test]
    fn tampered_exponent_is_rejected() {
        let checker = Checker::default();
        let t = build_epsilon_tower(&checker).unwrap();
        let wrong = closed_form(8579, &t.n14.add_small(1));
        assert!(!checker.equal(&t.epsilon15.elated_step_symbolic(E2), &wrong).unwrap());
    }
}
