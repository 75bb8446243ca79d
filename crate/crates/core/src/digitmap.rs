//! Base-b digit expansions and the two digit maps.
//!
//! The happy map sends `n` to the sum of the `e`-th powers of its base-b
//! digits. The elated map multiplies that sum by the leading digit. Digits
//! are always stored most significant first.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Base(u32);

impl Base {
    pub const TWO: Base = Base(2);
    pub const THREE: Base = Base(3);
    pub const TEN: Base = Base(10);

    pub fn new(b: u32) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidBase(b as u64));
        }
        Ok(Base(b))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// The largest digit, `b - 1`.
    pub fn max_digit(self) -> u32 {
        self.0 - 1
    }

    pub fn is_odd(self) -> bool {
        self.0 % 2 == 1
    }
}

impl TryFrom<u32> for Base {
    type Error = Error;
    fn try_from(b: u32) -> Result<Self> {
        Base::new(b)
    }
}

impl From<Base> for u32 {
    fn from(b: Base) -> u32 {
        b.0
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Exponent(u32);

impl Exponent {
    pub const SQUARE: Exponent = Exponent(2);

    pub fn new(e: u32) -> Result<Self> {
        if e < 1 {
            return Err(Error::InvalidExponent(e as u64));
        }
        Ok(Exponent(e))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for Exponent {
    type Error = Error;
    fn try_from(e: u32) -> Result<Self> {
        Exponent::new(e)
    }
}

impl From<Exponent> for u32 {
    fn from(e: Exponent) -> u32 {
        e.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Elated,
    Happy,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Elated => "elated",
            MapKind::Happy => "happy",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A number's base-b digits, most significant first, leading digit nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitExpansion {
    base: Base,
    digits: Vec<u32>,
}

impl DigitExpansion {
    pub fn new(base: Base, digits: Vec<u32>) -> Result<Self> {
        let Some(&lead) = digits.first() else {
            return Err(Error::EmptyDigits);
        };
        if let Some(&d) = digits.iter().find(|&&d| d >= base.get()) {
            return Err(Error::DigitOutOfRange { digit: d, base: base.get() });
        }
        if lead == 0 {
            return Err(Error::LeadingZero);
        }
        Ok(DigitExpansion { base, digits })
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn leading(&self) -> u32 {
        self.digits[0]
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self) -> BigUint {
        digits_value(&self.digits, self.base)
    }

    pub fn into_digits(self) -> Vec<u32> {
        self.digits
    }
}

impl fmt::Display for DigitExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_digits(&self.digits, self.base))
    }
}

/// Base-b expansion of a positive integer.
pub fn to_digits(n: &BigUint, base: Base) -> Result<DigitExpansion> {
    if n.is_zero() {
        return Err(Error::Zero);
    }
    Ok(DigitExpansion { base, digits: raw_digits(n, base) })
}

/// Inverse of [`to_digits`]; rejects out-of-range digits and a leading zero.
pub fn from_digits(digits: &[u32], base: Base) -> Result<BigUint> {
    DigitExpansion::new(base, digits.to_vec()).map(|d| d.value())
}

pub(crate) fn raw_digits(n: &BigUint, base: Base) -> Vec<u32> {
    if n.is_zero() {
        return vec![0];
    }
    let b = base.get();
    if b <= 256 {
        return n.to_radix_be(b).into_iter().map(u32::from).collect();
    }
    let mut out = Vec::new();
    let mut x = n.clone();
    while !x.is_zero() {
        let r = (&x % b).to_u32().expect("remainder below base");
        out.push(r);
        x /= b;
    }
    out.reverse();
    out
}

pub(crate) fn u64_digits(mut n: u64, base: Base) -> Vec<u32> {
    let b = base.get() as u64;
    let mut out = Vec::with_capacity(64);
    while n > 0 {
        out.push((n % b) as u32);
        n /= b;
    }
    out.reverse();
    out
}

pub(crate) fn digits_value(digits: &[u32], base: Base) -> BigUint {
    let b = base.get();
    if b <= 256 {
        let bytes: Vec<u8> = digits.iter().map(|&d| d as u8).collect();
        return BigUint::from_radix_be(&bytes, b).unwrap_or_else(BigUint::zero);
    }
    let mut acc = BigUint::zero();
    for &d in digits {
        acc *= b;
        acc += d;
    }
    acc
}

/// Sum of `e`-th powers of a digit multiset given as (digit, count) pairs.
pub(crate) fn power_sum_of_histogram(hist: &HashMap<u32, u64>, e: Exponent) -> BigUint {
    let mut entries: Vec<_> = hist.iter().collect();
    entries.sort();
    entries
        .into_iter()
        .map(|(&d, &c)| BigUint::from(d).pow(e.get()) * c)
        .sum()
}

fn histogram(digits: &[u32]) -> HashMap<u32, u64> {
    let mut hist = HashMap::new();
    for &d in digits {
        if d != 0 {
            *hist.entry(d).or_insert(0u64) += 1;
        }
    }
    hist
}

/// Sum of `e`-th powers of the base-b digits of `n`.
pub fn happy_step(n: &BigUint, base: Base, e: Exponent) -> BigUint {
    DigitMap::new(base, e, MapKind::Happy).step(n)
}

/// Leading digit times the sum of `e`-th powers of the base-b digits of `n`.
pub fn elated_step(n: &BigUint, base: Base, e: Exponent) -> BigUint {
    DigitMap::new(base, e, MapKind::Elated).step(n)
}

/// The integer written as `x` ones followed by `r` zeros in base b.
pub fn repunit(r: u64, base: Base, x: u64) -> BigUint {
    if x == 0 {
        return BigUint::zero();
    }
    let b = BigUint::from(base.get());
    let ones = (b.pow(x as u32) - 1u32) / (base.get() - 1);
    ones * b.pow(r as u32)
}

/// One of the two digit maps for a fixed base and exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitMap {
    pub base: Base,
    pub exponent: Exponent,
    pub kind: MapKind,
}

impl DigitMap {
    pub fn new(base: Base, exponent: Exponent, kind: MapKind) -> Self {
        DigitMap { base, exponent, kind }
    }

    pub fn elated(base: Base) -> Self {
        DigitMap::new(base, Exponent::SQUARE, MapKind::Elated)
    }

    pub fn happy(base: Base) -> Self {
        DigitMap::new(base, Exponent::SQUARE, MapKind::Happy)
    }

    pub fn step(&self, n: &BigUint) -> BigUint {
        if let Some(small) = n.to_u64() {
            if let Some(v) = self.step_u64(small) {
                return BigUint::from(v);
            }
        }
        self.step_digits(&raw_digits(n, self.base))
    }

    /// Applies the map to a digit string (most significant first).
    pub fn step_digits(&self, digits: &[u32]) -> BigUint {
        let sum = power_sum_of_histogram(&histogram(digits), self.exponent);
        match self.kind {
            MapKind::Happy => sum,
            MapKind::Elated => {
                let lead = digits.iter().copied().find(|&d| d != 0).unwrap_or(0);
                sum * lead
            }
        }
    }

    /// Same as [`DigitMap::step_digits`] but in machine integers; `None` on overflow.
    pub fn step_digits_u64(&self, digits: &[u32]) -> Option<u64> {
        let e = self.exponent.get();
        let mut sum: u64 = 0;
        for &d in digits {
            sum = sum.checked_add((d as u64).checked_pow(e)?)?;
        }
        match self.kind {
            MapKind::Happy => Some(sum),
            MapKind::Elated => sum.checked_mul(*digits.first()? as u64),
        }
    }

    /// Step on a machine integer; `None` if the image does not fit in a `u64`.
    pub fn step_u64(&self, n: u64) -> Option<u64> {
        if n == 0 {
            return Some(0);
        }
        let b = self.base.get() as u64;
        let e = self.exponent.get();
        let mut sum: u64 = 0;
        let mut lead = 0u64;
        let mut x = n;
        while x > 0 {
            let d = x % b;
            sum = sum.checked_add(d.checked_pow(e)?)?;
            lead = d;
            x /= b;
        }
        match self.kind {
            MapKind::Happy => Some(sum),
            MapKind::Elated => sum.checked_mul(lead),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stop {
    /// Stop when this value is reached (or when a value repeats).
    Target(BigUint),
    /// Stop at the first repeated value.
    Cycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Terminal {
    ReachedTarget,
    /// The value after the last recorded one equals `values[index]`.
    EnteredCycle { index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub map: DigitMap,
    pub values: Vec<BigUint>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn last(&self) -> &BigUint {
        self.values.last().expect("trajectory is never empty")
    }

    /// The cycle entered, when the trajectory ended on a repeat.
    pub fn cycle(&self) -> Option<&[BigUint]> {
        match self.terminal {
            Terminal::EnteredCycle { index } => Some(&self.values[index..]),
            Terminal::ReachedTarget => None,
        }
    }
}

/// Iterates `map` from `n`, recording every value.
///
/// Terminates because both maps eventually descend below `b^3` for `e = 2`;
/// for other exponents termination relies on the map actually descending.
pub fn iterate(n: &BigUint, map: DigitMap, stop: &Stop) -> Result<Trajectory> {
    if n.is_zero() {
        return Err(Error::Zero);
    }
    let mut values = vec![n.clone()];
    let mut seen: HashMap<BigUint, usize> = HashMap::new();
    seen.insert(n.clone(), 0);
    let mut x = n.clone();
    loop {
        if let Stop::Target(t) = stop {
            if &x == t {
                return Ok(Trajectory { map, values, terminal: Terminal::ReachedTarget });
            }
        }
        x = map.step(&x);
        if let Some(&index) = seen.get(&x) {
            return Ok(Trajectory { map, values, terminal: Terminal::EnteredCycle { index } });
        }
        seen.insert(x.clone(), values.len());
        values.push(x.clone());
    }
}

/// Renders digits in base b: `0-9a-z` up to base 36, comma-separated decimal digits beyond.
pub fn render_digits(digits: &[u32], base: Base) -> String {
    if base.get() <= 36 {
        digits
            .iter()
            .map(|&d| char::from_digit(d, base.get()).expect("digit below base"))
            .collect()
    } else {
        digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Renders a nonnegative integer in base b.
pub fn render(n: &BigUint, base: Base) -> String {
    render_digits(&raw_digits(n, base), base)
}

/// `b^k` as a big integer.
pub(crate) fn big_pow(base: Base, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    let mut sq = BigUint::from(base.get());
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc *= &sq;
        }
        k >>= 1;
        if k > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn b(n: u32) -> Base {
        Base::new(n).unwrap()
    }

    const SQ: Exponent = Exponent::SQUARE;

    #[test]
    fn expansions() {
        assert_eq!(to_digits(&big(21), b(10)).unwrap().digits(), &[2, 1]);
        assert_eq!(to_digits(&big(53), b(3)).unwrap().digits(), &[1, 2, 2, 2]);
        assert_eq!(to_digits(&big(125), b(8)).unwrap().digits(), &[1, 7, 5]);
        assert_eq!(to_digits(&big(0), b(8)), Err(Error::Zero));
    }

    #[test]
    fn from_digits_examples_and_errors() {
        assert_eq!(from_digits(&[1, 0], b(10)).unwrap(), big(10));
        assert_eq!(from_digits(&[1, 2, 2, 2], b(3)).unwrap(), big(53));
        assert_eq!(from_digits(&[2, 0], b(4)).unwrap(), big(8));
        assert_eq!(from_digits(&[0, 1], b(4)), Err(Error::LeadingZero));
        assert_eq!(from_digits(&[1, 4], b(4)), Err(Error::DigitOutOfRange { digit: 4, base: 4 }));
        assert_eq!(from_digits(&[], b(4)), Err(Error::EmptyDigits));
    }

    #[test]
    fn large_bases_use_generic_digits() {
        let base = b(1000);
        let n = big(123_004_999);
        let d = to_digits(&n, base).unwrap();
        assert_eq!(d.digits(), &[123, 4, 999]);
        assert_eq!(d.value(), n);
        assert_eq!(d.to_string(), "123,4,999");
        assert_eq!(render(&big(35), b(36)), "z");
    }

    #[test]
    fn happy_examples() {
        assert_eq!(happy_step(&big(46), b(10), SQ), big(52));
        assert_eq!(happy_step(&big(10), b(10), SQ), big(1));
        assert_eq!(happy_step(&big(68), b(10), SQ), big(100));
    }

    #[test]
    fn elated_examples() {
        assert_eq!(elated_step(&big(21), b(10), SQ), big(10));
        assert_eq!(elated_step(&big(10), b(10), SQ), big(1));
        assert_eq!(elated_step(&big(46), b(10), SQ), big(208));
        assert_eq!(elated_step(&big(208), b(10), SQ), big(136));
        assert_eq!(elated_step(&big(136), b(10), SQ), big(46));
        assert_eq!(elated_step(&big(5), b(8), SQ), big(125));
        assert_eq!(render(&big(125), b(8)), "175");
    }

    #[test]
    fn general_exponent() {
        let cube = Exponent::new(3).unwrap();
        // 2 * (8 + 27)
        assert_eq!(elated_step(&big(23), b(10), cube), big(70));
        assert_eq!(Exponent::new(0), Err(Error::InvalidExponent(0)));
    }

    #[test]
    fn repunits() {
        assert_eq!(repunit(0, b(10), 3), big(111));
        assert_eq!(repunit(2, b(10), 1), big(100));
        assert_eq!(repunit(5, b(10), 0), big(0));
        let r = repunit(1, b(10), 298);
        assert_eq!(r.to_string().len(), 299);
        assert!(r.to_string().starts_with("111") && r.to_string().ends_with("10"));
        assert_eq!(elated_step(&r, b(10), SQ), big(298));
        assert_eq!(happy_step(&r, b(10), SQ), big(298));
    }

    #[test]
    fn trajectories() {
        let map = DigitMap::elated(b(10));
        let t = iterate(&big(21), map, &Stop::Target(big(1))).unwrap();
        assert_eq!(t.values, vec![big(21), big(10), big(1)]);
        assert_eq!(t.terminal, Terminal::ReachedTarget);

        let t = iterate(&big(46), map, &Stop::Cycle).unwrap();
        assert_eq!(t.values, vec![big(46), big(208), big(136)]);
        assert_eq!(t.cycle().unwrap(), &[big(46), big(208), big(136)]);

        let t = iterate(&big(1), DigitMap::elated(b(7)), &Stop::Target(big(1))).unwrap();
        assert_eq!(t.values, vec![big(1)]);
        assert!(iterate(&big(0), map, &Stop::Cycle).is_err());
    }

    #[test]
    fn u64_and_big_paths_agree_near_overflow() {
        let map = DigitMap::new(b(16), Exponent::new(16).unwrap(), MapKind::Elated);
        let n = u64::MAX;
        assert_eq!(map.step_u64(n), None);
        let expected = BigUint::from(15u32).pow(16) * 16u32 * 15u32;
        assert_eq!(map.step(&big(n)), expected);
    }

    fn any_base() -> impl Strategy<Value = Base> {
        (2u32..=16).prop_map(|b| Base::new(b).unwrap())
    }

    proptest! {
        #[test]
        fn happy_is_strongly_additive(base in any_base(), x in 1u64..1_000_000, y in 0u64..1_000_000, extra in 0u32..4) {
            let bb = base.get() as u64;
            let mut s = 0u32;
            while bb.pow(s) <= y { s += 1; }
            let s = s + extra;
            let shifted = big(x) * BigUint::from(bb).pow(s) + big(y);
            prop_assert_eq!(happy_step(&shifted, base, SQ), happy_step(&big(x), base, SQ) + happy_step(&big(y), base, SQ));
        }

        #[test]
        fn elated_is_leading_digit_linear(base in any_base(), x in 1u64..1_000_000, y in 0u64..1_000_000, extra in 0u32..4) {
            let bb = base.get() as u64;
            let mut s = 0u32;
            while bb.pow(s) <= y { s += 1; }
            let s = s + extra;
            let shifted = big(x) * BigUint::from(bb).pow(s) + big(y);
            let lead = to_digits(&big(x), base).unwrap().leading();
            prop_assert_eq!(
                elated_step(&shifted, base, SQ),
                elated_step(&big(x), base, SQ) + happy_step(&big(y), base, SQ) * lead
            );
        }

        #[test]
        fn odd_base_parity(b in (1u32..8).prop_map(|k| 2 * k + 1), a in 1u64..u64::MAX / 2) {
            let base = Base::new(b).unwrap();
            let lead = to_digits(&big(a), base).unwrap().leading();
            let image = elated_step(&big(a), base, SQ);
            let parity = (&image % 2u32).to_u64().unwrap();
            if lead % 2 == 1 {
                prop_assert_eq!(parity, a % 2);
            } else {
                prop_assert_eq!(parity, 0);
            }
        }

        #[test]
        fn descent_above_cube(base in any_base(), a in 0u64..1_000_000_000_000_000_000) {
            let cube = (base.get() as u64).pow(3);
            let a = a.max(cube);
            prop_assert!(elated_step(&big(a), base, SQ) < big(a));
        }

        #[test]
        fn digits_round_trip(bytes in proptest::collection::vec(any::<u8>(), 1..32), base in 2u32..300) {
            let n = BigUint::from_bytes_be(&bytes) + 1u32;
            let base = Base::new(base).unwrap();
            let d = to_digits(&n, base).unwrap();
            prop_assert_eq!(from_digits(d.digits(), base).unwrap(), n);
        }
    }
}
