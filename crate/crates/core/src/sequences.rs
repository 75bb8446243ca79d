//! Certificates for arbitrarily long arithmetic runs of u-attracted numbers.
//!
//! With `W_1 = R_r(u) − 1` and `W_j = R_r(W_{j−1})`, where `R_r(x)` is `x`
//! ones followed by `r` zeros, the number `W_k + S^i(t+n)` steps under `E₂`
//! to `W_{k−1} + S^{i+1}(t+n)` as long as `S^i(t+n) < b^r`. Starting from
//! `t + m` with `m = W_k + n` and a witness with `S^{k−1}(t+n) = 1` for all
//! `t` in a set `T`, every `t + m` reaches `u` in exactly `k` steps.
//!
//! Each certificate stores the run-length form of every intermediate value,
//! so [`RunCertificate::verify`] re-checks the whole chain without knowing
//! how it was built.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::cycles::enumerate_cycles;
use crate::digitmap::{Base, DigitMap, Exponent};
use crate::error::{Error, Result};
use crate::heights::HeightTable;
use crate::towerint::{eval_mod, Checker, ModContext, RunSymbolic, TowerInt};

const E2: Exponent = Exponent::SQUARE;

/// Default ceiling on the witness shift `n`.
pub const DEFAULT_CEILING: u64 = 100_000_000;

const SEARCH_CHUNK: u64 = 1 << 16;

/// A shift `n` making every `t + n` happy, with the iteration count and digit width it needs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodSetWitness {
    pub base: u32,
    pub t: Vec<u64>,
    pub n: u64,
    pub k: u32,
    pub r: u32,
    /// Happy heights of `t + n`, in the order of `t`.
    pub heights: Vec<u32>,
    /// Whether `n` and `k` are both positive; `n = 0` is accepted for the smallest sets.
    pub strictly_positive: bool,
}

/// `gcd(2, b − 1)`.
pub fn common_difference(base: Base) -> u64 {
    if base.is_odd() {
        2
    } else {
        1
    }
}

/// Smallest `n ≤ ceiling` such that every `t + n` is happy.
pub fn find_good_witness(t: &[u64], base: Base) -> Result<GoodSetWitness> {
    find_good_witness_with(t, base, DEFAULT_CEILING)
}

pub fn find_good_witness_with(t: &[u64], base: Base, ceiling: u64) -> Result<GoodSetWitness> {
    let mut t = t.to_vec();
    t.sort_unstable();
    t.dedup();
    if t.is_empty() || t[0] == 0 {
        return Err(Error::Precondition("T must be a nonempty set of positive integers".into()));
    }
    let d = common_difference(base);
    if t.iter().any(|&x| x % d != t[0] % d) {
        return Err(Error::NotCongruent(d));
    }
    let map = DigitMap::happy(base);
    let table = HeightTable::new(map)?;
    let all_happy = |n: u64| t.iter().all(|&x| table.height_u64(x + n).is_some());

    let mut lo = 0u64;
    let n = loop {
        if lo > ceiling {
            return Err(Error::CeilingExceeded(ceiling));
        }
        let hi = lo.saturating_add(SEARCH_CHUNK).min(ceiling.saturating_add(1));
        if let Some(n) = (lo..hi).into_par_iter().find_first(|&n| all_happy(n)) {
            break n;
        }
        lo = hi;
    };

    let heights: Vec<u32> = t.iter().map(|&x| table.height_u64(x + n).unwrap() as u32).collect();
    let k = 1 + heights.iter().max().copied().unwrap();
    let mut peak = 0u64;
    for &x in &t {
        let mut v = x + n;
        for _ in 0..k {
            peak = peak.max(v);
            v = map.step_u64(v).expect("small values");
        }
    }
    let b = u64::from(base.get());
    let mut r = 1u32;
    let mut pow = b;
    while pow <= peak {
        pow *= b;
        r += 1;
    }
    Ok(GoodSetWitness { base: base.get(), t, n, k, r, heights, strictly_positive: n > 0 })
}

/// How an element of a run is certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Evidence {
    /// Each entry steps under `E₂` to the next; the last is `u`.
    Chain { chain: Vec<RunSymbolic> },
    /// Even in an odd base: every image stays even, so 1 is never reached.
    EvenParity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Element {
    pub value: TowerInt,
    pub evidence: Evidence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Attracted,
    EvenConsecutive,
    NonElated,
}

/// A run of numbers with a certificate for each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunCertificate {
    pub base: u32,
    pub construction: Construction,
    /// Target cycle member of the chains.
    pub u: u64,
    /// Difference between consecutive elements.
    pub d: u64,
    pub length: usize,
    pub witness: GoodSetWitness,
    pub m: TowerInt,
    pub elements: Vec<Element>,
}

impl RunCertificate {
    pub fn start(&self) -> &TowerInt {
        &self.elements[0].value
    }

    /// True when every element is a literal.
    pub fn is_exact(&self) -> bool {
        self.elements.iter().all(|e| e.value.is_literal())
    }

    /// Re-checks spacing, every chain step and every parity claim.
    pub fn verify(&self, checker: &Checker) -> Result<()> {
        let base = Base::new(self.base)?;
        let d = TowerInt::from(self.d);
        for (i, w) in self.elements.windows(2).enumerate() {
            if !checker.equal(&w[1].value.sub(&w[0].value), &d)? {
                return Err(Error::Verification(format!("elements {i} and {} are not {} apart", i + 1, self.d)));
            }
        }
        let two = ModContext::new(2)?;
        for (i, e) in self.elements.iter().enumerate() {
            match &e.evidence {
                Evidence::Chain { chain } => {
                    let first = chain.first().ok_or_else(|| Error::Verification(format!("element {i} has an empty chain")))?;
                    if !checker.equal(&first.to_tower(), &e.value)? {
                        return Err(Error::Verification(format!("element {i} differs from its chain start")));
                    }
                    for (j, w) in chain.windows(2).enumerate() {
                        if !checker.equal(&w[0].elated_step_symbolic(E2), &w[1].to_tower())? {
                            return Err(Error::Verification(format!("element {i}: E2 step {j} -> {} fails", j + 1)));
                        }
                    }
                    if chain.last().unwrap().to_tower() != TowerInt::from(self.u) {
                        return Err(Error::Verification(format!("element {i} does not end at {}", self.u)));
                    }
                }
                Evidence::EvenParity => {
                    if !base.is_odd() || !eval_mod(&e.value, &two)?.is_zero() {
                        return Err(Error::Verification(format!("element {i} is not even in an odd base")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Iterates every chain element with exact arithmetic; `None` when some element is symbolic.
    pub fn verify_exact(&self) -> Result<Option<()>> {
        if !self.is_exact() {
            return Ok(None);
        }
        let map = DigitMap::elated(Base::new(self.base)?);
        let u = BigUint::from(self.u);
        for (i, e) in self.elements.iter().enumerate() {
            let mut x = e.value.as_literal().unwrap().clone();
            match &e.evidence {
                Evidence::Chain { chain } => {
                    for _ in 1..chain.len() {
                        x = map.step(&x);
                    }
                    if x != u {
                        return Err(Error::Verification(format!("element {i} reaches {x}, not {u}")));
                    }
                }
                Evidence::EvenParity => {
                    if x.is_odd() {
                        return Err(Error::Verification(format!("element {i} is odd")));
                    }
                }
            }
        }
        Ok(Some(()))
    }
}

/// `W_1 … W_k`, stored as `W[j − 1]`.
fn repunit_chain(u: u64, base: Base, r: u32, k: u32) -> Vec<TowerInt> {
    let shift = TowerInt::from(u64::from(r));
    let mut w = vec![TowerInt::repunit(shift.clone(), base.get(), TowerInt::from(u)).add_small(-1)];
    for _ in 1..k {
        let next = TowerInt::repunit(shift.clone(), base.get(), w.last().unwrap().clone());
        w.push(next);
    }
    w
}

/// Low digits of `y`, zero-padded to `width` digits, as runs.
fn padded(y: u64, width: u32, base: Base) -> Vec<(u32, TowerInt)> {
    let b = u64::from(base.get());
    let mut digits = vec![0u32; width as usize];
    let mut v = y;
    for slot in digits.iter_mut().rev() {
        *slot = (v % b) as u32;
        v /= b;
    }
    assert_eq!(v, 0, "{y} does not fit in {width} digits");
    digits.into_iter().map(|d| (d, TowerInt::one())).collect()
}

/// Chain from `t + m` down to `u` for one `t`.
fn shift_chain(t: u64, u: u64, w: &[TowerInt], wit: &GoodSetWitness, base: Base) -> Result<Vec<RunSymbolic>> {
    let map = DigitMap::happy(base);
    let k = wit.k as usize;
    let mut y = t + wit.n;
    let mut chain = Vec::with_capacity(k + 1);
    for i in 0..k {
        let level = k - i;
        let runs = if level == 1 {
            debug_assert_eq!(y, 1);
            vec![(1, TowerInt::from(u)), (0, TowerInt::from(u64::from(wit.r)))]
        } else {
            let mut runs = vec![(1, w[level - 2].clone())];
            runs.extend(padded(y, wit.r, base));
            runs
        };
        chain.push(RunSymbolic::new(base, runs)?);
        y = map.step_u64(y).expect("small values");
    }
    chain.push(RunSymbolic::from_value(&BigUint::from(u), base)?);
    Ok(chain)
}

fn cycle_member(base: Base, u: u64) -> Result<()> {
    let cycles = enumerate_cycles(base, E2)?;
    if !cycles.contains(u) {
        return Err(Error::Precondition(format!("{u} is not on a cycle of E2 in base {base}")));
    }
    Ok(())
}

fn attracted_from(wit: GoodSetWitness, base: Base, u: u64, d: u64, construction: Construction) -> Result<RunCertificate> {
    let w = repunit_chain(u, base, wit.r, wit.k);
    let m = w.last().unwrap().add_small(wit.n as i64);
    let mut elements = Vec::with_capacity(wit.t.len());
    for &t in &wit.t {
        let chain = shift_chain(t, u, &w, &wit, base)?;
        elements.push(Element { value: m.add_small(t as i64), evidence: Evidence::Chain { chain } });
    }
    Ok(RunCertificate { base: base.get(), construction, u, d, length: elements.len(), witness: wit, m, elements })
}

/// `d`-consecutive run `d + m, 2d + m, …, Ld + m` of numbers reaching `u`, with `d = gcd(2, b − 1)`.
pub fn build_u_attracted_run(length: usize, base: Base, u: u64) -> Result<RunCertificate> {
    build_u_attracted_run_with(length, base, u, DEFAULT_CEILING)
}

pub fn build_u_attracted_run_with(length: usize, base: Base, u: u64, ceiling: u64) -> Result<RunCertificate> {
    if length == 0 {
        return Err(Error::Precondition("run length must be positive".into()));
    }
    cycle_member(base, u)?;
    let d = common_difference(base);
    let t: Vec<u64> = (1..=length as u64).map(|i| i * d).collect();
    let wit = find_good_witness_with(&t, base, ceiling)?;
    attracted_from(wit, base, u, d, Construction::Attracted)
}

/// `L` consecutive numbers reaching an even cycle member `u` in an odd base.
pub fn build_even_consecutive_run(length: usize, base: Base, u: u64) -> Result<RunCertificate> {
    build_even_consecutive_run_with(length, base, u, DEFAULT_CEILING)
}

pub fn build_even_consecutive_run_with(length: usize, base: Base, u: u64, ceiling: u64) -> Result<RunCertificate> {
    if !base.is_odd() {
        return Err(Error::Precondition(format!(
            "base {base} is even; build_u_attracted_run already gives consecutive runs"
        )));
    }
    if u % 2 == 1 {
        return Err(Error::Precondition(format!("{u} is odd; an even cycle member is required")));
    }
    if length == 0 {
        return Err(Error::Precondition("run length must be positive".into()));
    }
    cycle_member(base, u)?;
    let happy = DigitMap::happy(base);
    let s = |h: u64| happy.step_u64(h).expect("small values");
    let big_m = 2 * (1..=length as u64).map(s).max().unwrap();
    let t: Vec<u64> = (0..=big_m).map(|j| 2 * j + 8).collect();
    let wit = find_good_witness_with(&t, base, ceiling)?;
    let inner = attracted_from(wit, base, u, 2, Construction::EvenConsecutive)?;
    let m = inner.m.clone();

    let two = ModContext::new(2)?;
    if !eval_mod(&m, &two)?.is_zero() {
        return Err(Error::Verification("m is odd".into()));
    }
    let half = TowerInt::exact_div(m.clone(), 2u32)?;
    let b = u64::from(base.get());
    let mut width = 1u32;
    let mut pow = b;
    while pow <= length as u64 {
        pow *= b;
        width += 1;
    }
    // A = 2·b^(m'+w) + R_w(m'): a 2, then m' ones, then w free digits
    let a = TowerInt::pow(base.get(), half.add_small(i64::from(width)))
        .scale(2)
        .add(&TowerInt::repunit(TowerInt::from(u64::from(width)), base.get(), half.clone()));

    let mut elements = Vec::with_capacity(length);
    for h in 1..=length as u64 {
        let mut runs = vec![(2, TowerInt::one()), (1, half.clone())];
        runs.extend(padded(h, width, base));
        let head = RunSymbolic::new(base, runs)?;
        let t = 8 + 2 * s(h);
        let pos = inner.witness.t.iter().position(|&x| x == t).expect("t in T");
        let Evidence::Chain { chain } = &inner.elements[pos].evidence else { unreachable!() };
        let mut full = vec![head];
        full.extend(chain.iter().cloned());
        elements.push(Element { value: a.add_small(h as i64), evidence: Evidence::Chain { chain: full } });
    }
    Ok(RunCertificate {
        base: base.get(),
        construction: Construction::EvenConsecutive,
        u,
        d: 1,
        length,
        witness: inner.witness,
        m,
        elements,
    })
}

/// `L` consecutive non-elated numbers, or `2L` when built by parity interleaving.
pub fn build_non_elated_run(length: usize, base: Base) -> Result<RunCertificate> {
    build_non_elated_run_with(length, base, None, DEFAULT_CEILING)
}

/// As [`build_non_elated_run`], attracting to `target` when given (otherwise an even member when one exists).
pub fn build_non_elated_run_with(length: usize, base: Base, target: Option<u64>, ceiling: u64) -> Result<RunCertificate> {
    let cycles = enumerate_cycles(base, E2)?;
    let mut others: Vec<u64> = cycles.members().filter(|&x| x != 1).collect();
    others.sort_unstable();
    if others.is_empty() {
        return Err(Error::Precondition(format!("all integers are {base}-elated")));
    }
    let u = match target {
        Some(1) => return Err(Error::Precondition("target must be a cycle member other than 1".into())),
        Some(u) => {
            cycle_member(base, u)?;
            u
        }
        None if base.is_odd() => others.iter().copied().find(|x| x % 2 == 0).unwrap_or(others[0]),
        None => others[0],
    };
    let mut cert = if !base.is_odd() {
        build_u_attracted_run_with(length, base, u, ceiling)?
    } else if u % 2 == 0 {
        build_even_consecutive_run_with(length, base, u, ceiling)?
    } else {
        let inner = build_u_attracted_run_with(length, base, u, ceiling)?;
        let mut elements = Vec::with_capacity(2 * length);
        for e in inner.elements {
            let next = e.value.add_small(1);
            elements.push(e);
            elements.push(Element { value: next, evidence: Evidence::EvenParity });
        }
        RunCertificate { d: 1, length: elements.len(), elements, ..inner }
    };
    cert.construction = Construction::NonElated;
    Ok(cert)
}
