//! Heights and the smallest numbers of each height.
//!
//! The height of a number attracted to 1 is the number of steps it takes to
//! get there. Apart from a few small values, the smallest elated number of a
//! given height is basic: its digits after the leading one are nonzero and
//! nondecreasing. The smallest happy number of a given height is fully basic.
//! Searches therefore scan every `n < b²` and then only those numbers.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cycles::Dynamics;
use crate::digitmap::{big_pow, digits_value, raw_digits, render, u64_digits, Base, DigitMap, MapKind};
use crate::error::{Error, Result};
use crate::towerint::{eval_mod, ModContext, RunSymbolic, TowerInt};

/// Marker for numbers not attracted to 1.
pub const NO_HEIGHT: u32 = u32::MAX;

/// Smallest dense table built for any base.
pub const MIN_TABLE: u64 = 1 << 16;

/// Default search limit: numbers with at most this many base-b digits.
pub const DEFAULT_LIMIT_DIGITS: u32 = 20;

const CHUNK: usize = 1 << 14;

/// Heights of every `n` below a limit, plus iteration above it.
#[derive(Clone, Debug)]
pub struct HeightTable {
    map: DigitMap,
    heights: Vec<u32>,
}

impl HeightTable {
    /// Table for `e = 2`.
    pub fn new(map: DigitMap) -> Result<Self> {
        HeightTable::with_bound(map, None)
    }

    /// Table for any exponent; `e ≠ 2` needs a descent bound (see [`crate::cycles::descent_bound`]).
    pub fn with_bound(map: DigitMap, bound: Option<u64>) -> Result<Self> {
        let dynamics = Dynamics::with_bound(map, bound)?;
        let bound = dynamics.bound();
        let limit = bound.max(MIN_TABLE);
        let mut heights = vec![NO_HEIGHT; limit as usize];
        for n in 1..bound {
            let (rep, steps) = dynamics.table_entry(n).expect("table covers its bound");
            if rep == 1 {
                heights[n as usize] = steps;
            }
        }
        for n in bound..limit {
            let s = map.step_u64(n).expect("small values have small images");
            // descent: s < n for n at or above the bound
            let h = heights[s as usize];
            heights[n as usize] = if h == NO_HEIGHT { NO_HEIGHT } else { h + 1 };
        }
        Ok(HeightTable { map, heights })
    }

    /// Rebuilds a table from `(n, height)` records covering `1..limit` in order,
    /// checking that every record is consistent with one step of the map.
    pub fn from_records(map: DigitMap, records: &[(u64, Option<u32>)]) -> Result<Self> {
        let bad = |why: String| Error::Verification(format!("height records: {why}"));
        let mut heights = vec![NO_HEIGHT; records.len() + 1];
        for (i, &(n, h)) in records.iter().enumerate() {
            if n != i as u64 + 1 {
                return Err(bad(format!("expected key {}, found {n}", i + 1)));
            }
            heights[n as usize] = match h {
                Some(NO_HEIGHT) => return Err(bad(format!("height of {n} collides with the sentinel"))),
                Some(k) => k,
                None => NO_HEIGHT,
            };
        }
        if heights.len() < 2 || heights[1] != 0 {
            return Err(bad("height of 1 must be 0".into()));
        }
        let table = HeightTable { map, heights };
        for n in 2..table.limit() {
            let s = map.step_u64(n).ok_or_else(|| bad(format!("image of {n} overflows")))?;
            let expected = table.height_u64(s).map(|h| h + 1);
            if table.lookup(n) != expected {
                return Err(bad(format!("height of {n} disagrees with its image {s}")));
            }
        }
        Ok(table)
    }

    /// `(n, height)` for every `n` in `1..limit`.
    pub fn records(&self) -> impl Iterator<Item = (u64, Option<u32>)> + '_ {
        (1..self.limit()).map(|n| (n, self.lookup(n).map(|h| h as u32)))
    }

    pub fn map(&self) -> DigitMap {
        self.map
    }

    /// First value not stored in the table.
    pub fn limit(&self) -> u64 {
        self.heights.len() as u64
    }

    fn lookup(&self, n: u64) -> Option<u64> {
        match self.heights[n as usize] {
            NO_HEIGHT => None,
            h => Some(u64::from(h)),
        }
    }

    /// Height of a machine integer; `None` when not attracted to 1 (or `n = 0`).
    pub fn height_u64(&self, n: u64) -> Option<u64> {
        let mut x = n;
        let mut extra = 0;
        while x >= self.limit() {
            x = match self.map.step_u64(x) {
                Some(s) => s,
                None => return self.height(&self.map.step(&BigUint::from(x))).ok().flatten().map(|h| h + extra + 1),
            };
            extra += 1;
        }
        if x == 0 {
            return None;
        }
        self.lookup(x).map(|h| h + extra)
    }

    /// Height of any positive integer.
    pub fn height(&self, n: &BigUint) -> Result<Option<u64>> {
        if n.is_zero() {
            return Err(Error::Zero);
        }
        let mut x = n.clone();
        let mut extra = 0;
        loop {
            if let Some(v) = x.to_u64() {
                return Ok(self.height_u64(v).map(|h| h + extra));
            }
            x = self.map.step(&x);
            extra += 1;
        }
    }

    /// Height of the number with the given digits.
    pub fn height_digits(&self, digits: &[u32]) -> Option<u64> {
        if digits.len() == 1 && digits[0] == 1 {
            return Some(0);
        }
        let h = match self.map.step_digits_u64(digits) {
            Some(s) => self.height_u64(s),
            None => self.height(&self.map.step_digits(digits)).ok().flatten(),
        };
        h.map(|h| h + 1)
    }

    /// Height of a run-length numeral, stepping symbolically when it is too long to expand.
    pub fn height_runs(&self, x: &RunSymbolic, digit_cap: u64) -> Result<Option<u64>> {
        if x.base() != self.map.base {
            return Err(Error::Precondition("run-length numeral is in a different base".into()));
        }
        if let Some(len) = x.len_u64() {
            if len <= 64 {
                return Ok(self.height_digits(&x.to_digits(64)?));
            }
        }
        let step = match self.map.kind {
            MapKind::Elated => x.elated_step_symbolic(self.map.exponent),
            MapKind::Happy => x.happy_step_symbolic(self.map.exponent),
        };
        let value = step.eval_exact(digit_cap)?;
        Ok(self.height(&value)?.map(|h| h + 1))
    }

    /// Orbit from `n` down to 1, or `None` if `n` is not attracted to 1.
    pub fn trajectory(&self, n: &BigUint) -> Result<Option<Vec<BigUint>>> {
        let Some(h) = self.height(n)? else { return Ok(None) };
        let mut out = Vec::with_capacity(h as usize + 1);
        let mut x = n.clone();
        out.push(x.clone());
        for _ in 0..h {
            x = self.map.step(&x);
            out.push(x.clone());
        }
        Ok(Some(out))
    }
}

/// `n > b` with nonzero, nondecreasing digits after the leading one.
pub fn is_basic(n: &BigUint, base: Base) -> bool {
    if n <= &BigUint::from(base.get()) {
        return false;
    }
    let d = raw_digits(n, base);
    d[1..].iter().all(|&x| x != 0) && d[1..].windows(2).all(|w| w[0] <= w[1])
}

/// All digits nonzero and nondecreasing; single digits qualify.
pub fn is_fully_basic(n: &BigUint, base: Base) -> bool {
    if n.is_zero() {
        return false;
    }
    let d = raw_digits(n, base);
    d[0] != 0 && d.windows(2).all(|w| w[0] <= w[1])
}

/// Which digit strings a search visits above `b²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Basic,
    FullyBasic,
}

/// Digit strings of one length in increasing order.
struct ShapeIter {
    base: u32,
    shape: Shape,
    cur: Option<Vec<u32>>,
}

impl ShapeIter {
    fn new(base: Base, len: usize, shape: Shape) -> Self {
        ShapeIter { base: base.get(), shape, cur: (len >= 1).then(|| vec![1; len]) }
    }
}

impl Iterator for ShapeIter {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.cur.clone()?;
        let top = self.base - 1;
        let d = self.cur.as_mut().unwrap();
        let tail_start = match self.shape {
            Shape::Basic => 1,
            Shape::FullyBasic => 0,
        };
        // advance the nondecreasing tail; carry into the leading digit for basic strings
        match (tail_start..d.len()).rev().find(|&i| d[i] < top) {
            Some(i) => {
                let v = d[i] + 1;
                d[i..].iter_mut().for_each(|x| *x = v);
            }
            None if self.shape == Shape::Basic && d[0] < top => {
                d[0] += 1;
                d[1..].iter_mut().for_each(|x| *x = 1);
            }
            None => self.cur = None,
        }
        Some(out)
    }
}

/// The search stream: every `n < min(b², limit)`, then strings of the shape below `limit`, ascending.
fn stream(base: Base, limit: &BigUint, shape: Shape) -> impl Iterator<Item = Vec<u32>> {
    let b = u64::from(base.get());
    let small_end = limit.to_u64().map_or(b * b, |l| l.min(b * b));
    let small = (1..small_end).map(move |n| u64_digits(n, base));
    let limit_digits = if limit.is_zero() { vec![] } else { raw_digits(&(limit - 1u32).max(BigUint::one()), base) };
    let max_len = limit_digits.len();
    let limit = limit.clone();
    let large = (3..=max_len)
        .flat_map(move |len| ShapeIter::new(base, len, shape))
        .take_while(move |d| digits_value(d, base) < limit);
    small.chain(large)
}

/// Ascending stream of all `n < b²` and all basic numbers below `limit`.
pub fn enumerate_candidates(base: Base, limit: &BigUint) -> impl Iterator<Item = BigUint> {
    stream(base, limit, Shape::Basic).map(move |d| digits_value(&d, base))
}

/// Minimal number of a given height, with its orbit down to 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EpsilonRecord {
    pub base: Base,
    pub kind: MapKind,
    pub height: u64,
    pub value: EpsilonValue,
    /// Orbit from the value (or, for run-length values, from its first image) to 1.
    pub trajectory: Vec<BigUint>,
    /// Exclusive search bound, when the value came from a search.
    pub limit: Option<BigUint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonValue {
    Exact(BigUint),
    Runs(RunSymbolic),
}

impl EpsilonValue {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            EpsilonValue::Exact(n) => Some(n),
            EpsilonValue::Runs(_) => None,
        }
    }

    /// Exact value or run-length form, whichever applies.
    pub fn to_runs(&self, base: Base) -> Result<RunSymbolic> {
        match self {
            EpsilonValue::Exact(n) => RunSymbolic::from_value(n, base),
            EpsilonValue::Runs(r) => Ok(r.clone()),
        }
    }
}

impl EpsilonRecord {
    pub fn render(&self) -> String {
        match &self.value {
            EpsilonValue::Exact(n) => render(n, self.base),
            EpsilonValue::Runs(r) => r.to_string(),
        }
    }
}

impl fmt::Display for EpsilonRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Default exclusive search limit `b^20`.
pub fn default_limit(base: Base) -> BigUint {
    big_pow(base, u64::from(DEFAULT_LIMIT_DIGITS))
}

fn search(table: &HeightTable, k: u64, limit: &BigUint, shape: Shape) -> Result<Option<Vec<u32>>> {
    let mut it = stream(table.map().base, limit, shape);
    loop {
        let chunk: Vec<Vec<u32>> = it.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            return Ok(None);
        }
        if let Some(hit) = chunk.into_par_iter().find_first(|d| table.height_digits(d) == Some(k)) {
            return Ok(Some(hit));
        }
    }
}

fn record(table: &HeightTable, k: u64, value: BigUint, limit: Option<BigUint>) -> Result<EpsilonRecord> {
    let trajectory = table
        .trajectory(&value)?
        .ok_or_else(|| Error::Verification(format!("{value} is not attracted to 1")))?;
    Ok(EpsilonRecord {
        base: table.map().base,
        kind: table.map().kind,
        height: k,
        value: EpsilonValue::Exact(value),
        trajectory,
        limit,
    })
}

/// Smallest elated number of height `k` below `limit` (default `b^20`).
pub fn epsilon_with(table: &HeightTable, k: u64, limit: Option<&BigUint>) -> Result<EpsilonRecord> {
    minimal(table, k, limit, Shape::Basic)
}

/// Smallest happy number of height `k` below `limit`, searching fully basic numbers.
pub fn sigma_with(table: &HeightTable, k: u64, limit: Option<&BigUint>) -> Result<EpsilonRecord> {
    minimal(table, k, limit, Shape::FullyBasic)
}

fn minimal(table: &HeightTable, k: u64, limit: Option<&BigUint>, shape: Shape) -> Result<EpsilonRecord> {
    let base = table.map().base;
    let limit = limit.cloned().unwrap_or_else(|| default_limit(base));
    let short = match k {
        0 => Some(BigUint::one()),
        1 => Some(BigUint::from(base.get())),
        _ => None,
    };
    if let Some(v) = short.filter(|v| v < &limit) {
        return record(table, k, v, Some(limit));
    }
    match search(table, k, &limit, shape)? {
        Some(d) => record(table, k, digits_value(&d, base), Some(limit)),
        None => Err(Error::LimitExceeded { k, limit: limit.to_string() }),
    }
}

/// Smallest `b`-elated number of height `k` (exponent 2).
pub fn epsilon(k: u64, base: Base) -> Result<EpsilonRecord> {
    epsilon_with(&HeightTable::new(DigitMap::elated(base))?, k, None)
}

/// Smallest `b`-happy number of height `k` (exponent 2).
pub fn sigma(k: u64, base: Base) -> Result<EpsilonRecord> {
    sigma_with(&HeightTable::new(DigitMap::happy(base))?, k, None)
}

/// Every basic number below `limit` with height `k`, ascending.
pub fn basic_of_height(table: &HeightTable, k: u64, limit: &BigUint) -> Vec<BigUint> {
    let base = table.map().base;
    let bb = BigUint::from(base.get());
    let mut out = Vec::new();
    let mut it = stream(base, limit, Shape::Basic);
    loop {
        let chunk: Vec<Vec<u32>> = it.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let hits: Vec<BigUint> = chunk
            .into_par_iter()
            .filter(|d| table.height_digits(d) == Some(k))
            .map(|d| digits_value(&d, base))
            .filter(|n| n > &bb && is_basic(n, base))
            .collect();
        out.extend(hits);
    }
    out
}

/// Smallest base-2 elated number of height `k` from `ε_{k+1} = 2^{ε_k} − 1`.
pub fn epsilon_base2(k: u64) -> Result<RunSymbolic> {
    let base = Base::TWO;
    match k {
        0 => RunSymbolic::from_counts(base, &[(1, 1)]),
        1 => RunSymbolic::from_counts(base, &[(1, 1), (0, 1)]),
        _ => {
            // ε_{k} is a run of ε_{k−1} ones
            let mut prev = TowerInt::from(2);
            for _ in 2..k {
                prev = TowerInt::pow(2u32, prev).add_small(-1);
            }
            RunSymbolic::new(base, vec![(1, prev)])
        }
    }
}

/// Smallest base-3 elated number of height `k` from `ε_{k+1} = 2·3^{(ε_k − 1)/4} − 1`.
pub fn epsilon_base3(k: u64) -> Result<RunSymbolic> {
    let base = Base::THREE;
    match k {
        0 => RunSymbolic::from_counts(base, &[(1, 1)]),
        1 => RunSymbolic::from_counts(base, &[(1, 1), (0, 1)]),
        2 => RunSymbolic::from_counts(base, &[(1, 3)]),
        _ => {
            let four = ModContext::new(4)?;
            let mut prev = TowerInt::from(13);
            let mut count = TowerInt::zero();
            for _ in 2..k {
                if eval_mod(&prev, &four)? != BigUint::one() {
                    return Err(Error::Verification(format!("{prev} is not 1 modulo 4")));
                }
                count = TowerInt::exact_div(prev.add_small(-1), 4u32)?;
                prev = TowerInt::pow(3u32, count.clone()).scale(2).add_small(-1);
            }
            RunSymbolic::new(base, vec![(1, TowerInt::one()), (2, count)])
        }
    }
}

/// Record for a recurrence value, with the orbit from its first image.
pub fn recurrence_record(table: &HeightTable, k: u64, value: RunSymbolic, digit_cap: u64) -> Result<EpsilonRecord> {
    let first = match table.map().kind {
        MapKind::Elated => value.elated_step_symbolic(table.map().exponent),
        MapKind::Happy => value.happy_step_symbolic(table.map().exponent),
    };
    let trajectory = match first.eval_exact(digit_cap) {
        Ok(v) if k > 0 => table.trajectory(&v)?.unwrap_or_default(),
        _ => Vec::new(),
    };
    let value = match value.len_u64() {
        Some(l) if l <= 64 => EpsilonValue::Exact(value.to_biguint(64)?),
        _ => EpsilonValue::Runs(value),
    };
    Ok(EpsilonRecord { base: table.map().base, kind: table.map().kind, height: k, value, trajectory, limit: None })
}

/// Count of digits other than `b−1`, skipping the leading digit when `skip_leading`.
pub fn non_top_digits(n: &BigUint, base: Base, skip_leading: bool) -> usize {
    let d = raw_digits(n, base);
    let start = usize::from(skip_leading);
    d[start..].iter().filter(|&&x| x != base.max_digit()).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitmap::Exponent;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn b(n: u32) -> Base {
        Base::new(n).unwrap()
    }

    fn table(base: u32, kind: MapKind) -> HeightTable {
        HeightTable::new(DigitMap::new(b(base), Exponent::SQUARE, kind)).unwrap()
    }

    // independent oracle: iterate the map on every integer
    fn brute_height(n: u64, base: u32, kind: MapKind) -> Option<u64> {
        let map = DigitMap::new(b(base), Exponent::SQUARE, kind);
        let mut seen = std::collections::HashSet::new();
        let mut x = n;
        let mut h = 0;
        while x != 1 {
            if !seen.insert(x) {
                return None;
            }
            x = map.step_u64(x).unwrap();
            h += 1;
        }
        Some(h)
    }

    fn brute_minimal(base: u32, kind: MapKind, below: u64) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for n in 1..below {
            if let Some(h) = brute_height(n, base, kind) {
                out.entry(h).or_insert(n);
            }
        }
        out
    }

    #[test]
    fn height_examples() {
        let t = table(10, MapKind::Elated);
        assert_eq!(t.height_u64(1), Some(0));
        assert_eq!(t.height_u64(21), Some(2));
        assert_eq!(t.height_u64(97), Some(5));
        assert_eq!(t.height(&BigUint::from(8_888_999_999u64)).unwrap(), Some(12));
    }

    #[test]
    fn table_matches_brute_force() {
        for base in [2, 3, 4, 7, 10] {
            for kind in [MapKind::Elated, MapKind::Happy] {
                let t = table(base, kind);
                for n in 1..5000 {
                    assert_eq!(t.height_u64(n), brute_height(n, base, kind), "b={base} {kind} n={n}");
                }
            }
        }
    }

    #[test]
    fn records_round_trip_and_reject_tampering() {
        let t = table(6, MapKind::Elated);
        let mut recs: Vec<_> = t.records().collect();
        let back = HeightTable::from_records(t.map(), &recs).unwrap();
        assert_eq!(back.heights, t.heights);
        let i = recs.iter().position(|r| r.1 == Some(3)).unwrap();
        recs[i].1 = Some(4);
        assert!(HeightTable::from_records(t.map(), &recs).is_err());
        recs[i].1 = None;
        assert!(HeightTable::from_records(t.map(), &recs).is_err());
    }

    #[test]
    fn basic_predicates() {
        let n = BigUint::from(8_888_999_999u64);
        assert!(is_basic(&n, Base::TEN) && is_fully_basic(&n, Base::TEN));
        let n = BigUint::from(51u32);
        assert!(is_basic(&n, Base::TEN) && !is_fully_basic(&n, Base::TEN));
        assert!(!is_basic(&BigUint::from(10u32), Base::TEN));
        assert!(is_fully_basic(&BigUint::from(7u32), Base::TEN));
    }

    #[test]
    fn candidate_stream() {
        let limit = BigUint::from(200u32);
        let c: Vec<u64> = enumerate_candidates(Base::TEN, &limit).map(|n| n.to_u64().unwrap()).collect();
        assert_eq!(&c[..99], &(1..100).collect::<Vec<_>>()[..]);
        assert_eq!(&c[99..104], &[111, 112, 113, 114, 115]);
        assert_eq!(*c.last().unwrap(), 199);
        // oracle: filter all integers by the predicate
        let big = BigUint::from(1_000_000u32);
        let direct: Vec<u64> = (1..1_000_000u64)
            .filter(|&n| n < 100 || is_basic(&BigUint::from(n), Base::TEN))
            .collect();
        let streamed: Vec<u64> = enumerate_candidates(Base::TEN, &big).map(|n| n.to_u64().unwrap()).collect();
        assert_eq!(streamed, direct);
        assert!(enumerate_candidates(b(4), &BigUint::from(10u32)).any(|n| n == BigUint::from(3u32)));
    }

    #[test]
    fn candidate_count_in_base_ten() {
        // 99 small values plus 9·C(L+7, 8) basic numbers of each length L from 3 to 10
        let binom = |n: u64, k: u64| (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
        let expected = 99 + (3..=10).map(|l| 9 * binom(l - 1 + 8, 8)).sum::<u64>();
        let limit = BigUint::from(10_000_000_000u64);
        assert_eq!(enumerate_candidates(Base::TEN, &limit).count() as u64, expected);
    }

    #[test]
    fn fully_basic_stream() {
        let limit = BigUint::from(100_000u32);
        let streamed: Vec<u64> =
            stream(b(5), &limit, Shape::FullyBasic).map(|d| digits_value(&d, b(5)).to_u64().unwrap()).collect();
        let direct: Vec<u64> =
            (1..100_000u64).filter(|&n| n < 25 || is_fully_basic(&BigUint::from(n), b(5))).collect();
        assert_eq!(streamed, direct);
    }

    #[test]
    fn base_ten_epsilons() {
        let t = table(10, MapKind::Elated);
        let expected = [1u64, 10, 13, 51, 67, 97, 668, 77, 746, 92, 717, 5369];
        for (k, &e) in expected.iter().enumerate() {
            let r = epsilon_with(&t, k as u64, None).unwrap();
            assert_eq!(r.value, EpsilonValue::Exact(BigUint::from(e)), "k={k}");
            assert_eq!(r.trajectory.len(), k + 1);
            assert_eq!(r.trajectory.last(), Some(&BigUint::one()));
        }
    }

    #[test]
    fn epsilons_match_exhaustive_scan() {
        for base in 2..=10 {
            let t = table(base, MapKind::Elated);
            for (k, n) in brute_minimal(base, MapKind::Elated, 200_000) {
                let r = epsilon_with(&t, k, None).unwrap();
                assert_eq!(r.value, EpsilonValue::Exact(BigUint::from(n)), "b={base} k={k}");
            }
        }
    }

    #[test]
    fn sigmas_match_exhaustive_scan() {
        for base in 2..=10 {
            let t = table(base, MapKind::Happy);
            for (k, n) in brute_minimal(base, MapKind::Happy, 200_000) {
                let r = sigma_with(&t, k, None).unwrap();
                assert_eq!(r.value, EpsilonValue::Exact(BigUint::from(n)), "b={base} k={k}");
            }
        }
        let t = table(10, MapKind::Happy);
        assert_eq!(sigma_with(&t, 5, None).unwrap().value, EpsilonValue::Exact(BigUint::from(7u32)));
        assert_eq!(sigma_with(&t, 7, None).unwrap().value, EpsilonValue::Exact(BigUint::from(78_999u32)));
    }

    #[test]
    fn limit_exceeded() {
        let t = table(10, MapKind::Elated);
        let e = epsilon_with(&t, 12, Some(&BigUint::from(1_000_000u32))).unwrap_err();
        assert!(matches!(e, Error::LimitExceeded { k: 12, .. }));
    }

    #[test]
    fn recurrences() {
        assert_eq!(epsilon_base2(2).unwrap().to_string(), "11");
        assert_eq!(epsilon_base2(4).unwrap().to_biguint(100).unwrap(), BigUint::from(127u32));
        assert_eq!(epsilon_base2(5).unwrap().to_string(), "[1^127]");
        let e6 = epsilon_base2(6).unwrap();
        assert_eq!(e6.runs()[0].count.eval_exact(100).unwrap(), (BigUint::one() << 127u32) - 1u32);
        assert_eq!(epsilon_base3(3).unwrap().to_biguint(100).unwrap(), BigUint::from(53u32));
        let e4 = epsilon_base3(4).unwrap();
        assert_eq!(e4.to_string(), "1[2^13]");
        assert_eq!(e4.to_biguint(100).unwrap(), BigUint::from(3_188_645u32));
        let e5 = epsilon_base3(5).unwrap();
        assert_eq!(e5.runs()[1].count.eval_exact(100).unwrap(), BigUint::from(797_161u32));
        assert!(epsilon_base3(7).is_ok());
    }

    #[test]
    fn recurrence_heights() {
        let t2 = table(2, MapKind::Elated);
        let t3 = table(3, MapKind::Elated);
        for k in 0..=6 {
            assert_eq!(t2.height_runs(&epsilon_base2(k).unwrap(), 1_000_000).unwrap(), Some(k), "base 2 k={k}");
        }
        for k in 0..=5 {
            assert_eq!(t3.height_runs(&epsilon_base3(k).unwrap(), 1_000_000).unwrap(), Some(k), "base 3 k={k}");
        }
    }

    #[test]
    fn non_top_digit_bounds() {
        for base in 3..=10u32 {
            let te = table(base, MapKind::Elated);
            let th = table(base, MapKind::Happy);
            let limit = BigUint::from(100_000_000u32);
            for k in 1..12 {
                if let Ok(r) = epsilon_with(&te, k, Some(&limit)) {
                    let v = r.value.exact().unwrap();
                    assert!(non_top_digits(v, b(base), true) < 2 * base as usize, "b={base} k={k}");
                }
                if let Ok(r) = sigma_with(&th, k, Some(&limit)) {
                    let v = r.value.exact().unwrap();
                    assert!(non_top_digits(v, b(base), false) < 2 * base as usize, "b={base} k={k}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn height_decreases_by_one(base in 2u32..=16, n in 2u64..10_000_000) {
            let t = table(base, MapKind::Elated);
            let s = t.map().step_u64(n).unwrap();
            prop_assert_eq!(t.height_u64(n), t.height_u64(s).map(|h| h + 1));
        }
    }
}
