use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::TowerInt;
use crate::digitmap::{raw_digits, Base, Exponent};
use crate::error::{Error, Result};

/// `count` copies of `digit`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub digit: u32,
    pub count: TowerInt,
}

/// A base-b numeral stored as runs of equal digits, most significant first.
///
/// Adjacent runs have distinct digits, every count is at least one, and the
/// leading digit is nonzero. Text form writes short runs digit by digit and
/// longer runs as `[d^count]`, so `8157[9^13888887]` is `8158·10^13888887 − 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunSymbolic {
    base: Base,
    runs: Vec<Run>,
}

#[derive(Deserialize)]
struct RawRuns {
    base: Base,
    runs: Vec<Run>,
}

impl<'de> Deserialize<'de> for RunSymbolic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRuns::deserialize(d)?;
        RunSymbolic::new(raw.base, raw.runs.into_iter().map(|r| (r.digit, r.count)).collect())
            .map_err(serde::de::Error::custom)
    }
}

impl RunSymbolic {
    /// Normalizes `runs`: drops zero counts and merges equal neighbours.
    pub fn new(base: Base, runs: Vec<(u32, TowerInt)>) -> Result<Self> {
        let mut out: Vec<Run> = Vec::with_capacity(runs.len());
        for (digit, count) in runs {
            if digit >= base.get() {
                return Err(Error::DigitOutOfRange { digit, base: base.get() });
            }
            if count.as_literal().is_some_and(Zero::is_zero) {
                continue;
            }
            if count.lower_bound() < BigInt::one() {
                return Err(Error::Precondition(format!("run count {count} is not certified positive")));
            }
            match out.last_mut() {
                Some(last) if last.digit == digit => last.count = last.count.add(&count),
                _ => out.push(Run { digit, count }),
            }
        }
        match out.first() {
            None => Err(Error::EmptyDigits),
            Some(r) if r.digit == 0 => Err(Error::LeadingZero),
            Some(_) => Ok(RunSymbolic { base, runs: out }),
        }
    }

    /// Shorthand for runs with literal counts.
    pub fn from_counts(base: Base, runs: &[(u32, u64)]) -> Result<Self> {
        RunSymbolic::new(base, runs.iter().map(|&(d, c)| (d, TowerInt::from(c))).collect())
    }

    pub fn from_digits(digits: &[u32], base: Base) -> Result<Self> {
        RunSymbolic::new(base, digits.iter().map(|&d| (d, TowerInt::one())).collect())
    }

    pub fn from_value(n: &BigUint, base: Base) -> Result<Self> {
        if n.is_zero() {
            return Err(Error::Zero);
        }
        RunSymbolic::from_digits(&raw_digits(n, base), base)
    }

    /// Appends a run, merging with the last one when digits agree.
    pub fn append_run(&mut self, digit: u32, count: TowerInt) -> Result<()> {
        let mut runs: Vec<(u32, TowerInt)> = self.runs.drain(..).map(|r| (r.digit, r.count)).collect();
        runs.push((digit, count));
        *self = RunSymbolic::new(self.base, runs)?;
        Ok(())
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn leading_digit(&self) -> u32 {
        self.runs[0].digit
    }

    /// Number of digits.
    pub fn total_len(&self) -> TowerInt {
        TowerInt::sum(self.runs.iter().map(|r| (BigInt::one(), r.count.clone())).collect())
    }

    /// Run counts as `u64`s when all are small.
    pub fn literal_counts(&self) -> Option<Vec<(u32, u64)>> {
        self.runs.iter().map(|r| Some((r.digit, r.count.small_value()?))).collect()
    }

    /// Value as `Σ d · b^(digits after the run) · R(count)`.
    pub fn to_tower(&self) -> TowerInt {
        let b = self.base.get();
        let mut shift = TowerInt::zero();
        let mut terms = Vec::with_capacity(self.runs.len());
        for r in self.runs.iter().rev() {
            if r.digit != 0 {
                terms.push((BigInt::from(r.digit), TowerInt::repunit(shift.clone(), b, r.count.clone())));
            }
            shift = shift.add(&r.count);
        }
        terms.reverse();
        TowerInt::sum(terms)
    }

    /// Digits, refusing numerals longer than `cap`.
    pub fn to_digits(&self, cap: u64) -> Result<Vec<u32>> {
        let counts = self.literal_counts().ok_or(Error::ExceedsCap { cap })?;
        let total: u64 = counts.iter().map(|&(_, c)| c).sum();
        if total > cap {
            return Err(Error::ExceedsCap { cap });
        }
        let mut out = Vec::with_capacity(total as usize);
        for (d, c) in counts {
            out.extend(std::iter::repeat_n(d, c as usize));
        }
        Ok(out)
    }

    /// `Σ d^e · count` over the runs.
    pub fn power_sum(&self, e: Exponent) -> TowerInt {
        TowerInt::sum(
            self.runs
                .iter()
                .filter(|r| r.digit != 0)
                .map(|r| (BigInt::from(r.digit).pow(e.get()), r.count.clone()))
                .collect(),
        )
    }

    /// Elated step: the leading digit times the power sum.
    pub fn elated_step_symbolic(&self, e: Exponent) -> TowerInt {
        self.power_sum(e).scale(self.leading_digit())
    }

    pub fn happy_step_symbolic(&self, e: Exponent) -> TowerInt {
        self.power_sum(e)
    }

    /// Numeric comparison, available when every count is small.
    pub fn try_cmp(&self, other: &RunSymbolic) -> Option<Ordering> {
        if self.base != other.base {
            return None;
        }
        let a = self.literal_counts()?;
        let b = other.literal_counts()?;
        let len = |v: &[(u32, u64)]| v.iter().map(|&(_, c)| c as u128).sum::<u128>();
        match len(&a).cmp(&len(&b)) {
            Ordering::Equal => {}
            o => return Some(o),
        }
        let (mut i, mut j) = (0, 0);
        let (mut ra, mut rb) = (a[0].1, b[0].1);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Equal => {}
                o => return Some(o),
            }
            let step = ra.min(rb);
            ra -= step;
            rb -= step;
            if ra == 0 {
                i += 1;
                ra = a.get(i).map_or(0, |r| r.1);
            }
            if rb == 0 {
                j += 1;
                rb = b.get(j).map_or(0, |r| r.1);
            }
        }
        Some(Ordering::Equal)
    }

    /// Parses the text form in the given base.
    pub fn parse(s: &str, base: Base) -> Result<Self> {
        let bad = || Error::Precondition(format!("malformed run-length numeral {s:?}"));
        let digit = |c: char| -> Result<u32> {
            let d = c.to_digit(36).ok_or_else(bad)?;
            if d >= base.get() {
                return Err(Error::DigitOutOfRange { digit: d, base: base.get() });
            }
            Ok(d)
        };
        let mut runs = Vec::new();
        let mut chars = s.trim().chars().peekable();
        while let Some(c) = chars.next() {
            if c == '[' {
                let body: String = chars.by_ref().take_while(|&c| c != ']').collect();
                let (d, count) = body.split_once('^').ok_or_else(bad)?;
                let mut dc = d.chars();
                let d = digit(dc.next().ok_or_else(bad)?)?;
                if dc.next().is_some() {
                    return Err(bad());
                }
                let count: BigUint = count.trim().parse().map_err(|_| bad())?;
                runs.push((d, TowerInt::literal(count)));
            } else {
                runs.push((digit(c)?, TowerInt::one()));
            }
        }
        if base.get() > 36 {
            return Err(Error::Precondition("text form supports bases up to 36".into()));
        }
        RunSymbolic::new(base, runs)
    }
}

// runs up to this length are written digit by digit
const SPELLED_OUT: u64 = 8;

fn digit_char(d: u32) -> char {
    std::char::from_digit(d, 36).unwrap_or('?')
}

impl fmt::Display for RunSymbolic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.runs {
            let d = if self.base.get() <= 36 { digit_char(r.digit).to_string() } else { format!("({})", r.digit) };
            match r.count.small_value() {
                Some(c) if c <= SPELLED_OUT => f.write_str(&d.repeat(c as usize))?,
                Some(c) => write!(f, "[{d}^{c}]")?,
                None => write!(f, "[{d}^{}]", r.count)?,
            }
        }
        Ok(())
    }
}

impl RunSymbolic {
    /// Exact value, refusing numerals longer than `cap` digits.
    pub fn to_biguint(&self, cap: u64) -> Result<BigUint> {
        let digits = self.to_digits(cap)?;
        Ok(crate::digitmap::digits_value(&digits, self.base))
    }

    /// Total length when it fits in a `u64`.
    pub fn len_u64(&self) -> Option<u64> {
        self.total_len().small_value().or_else(|| {
            self.literal_counts()?.iter().try_fold(0u64, |a, &(_, c)| a.checked_add(c))
        })
    }

    /// Number of runs whose counts are not literals.
    pub fn symbolic_runs(&self) -> usize {
        self.runs.iter().filter(|r| !r.count.is_literal()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitmap::{elated_step, happy_step};
    use proptest::prelude::*;

    const TEN: Base = Base::TEN;

    #[test]
    fn normalization() {
        let r = RunSymbolic::from_counts(TEN, &[(8, 1), (8, 2), (3, 0), (9, 4)]).unwrap();
        assert_eq!(r.literal_counts().unwrap(), vec![(8, 3), (9, 4)]);
        assert_eq!(r.to_string(), "8889999");
        assert_eq!(RunSymbolic::from_counts(TEN, &[(0, 1), (1, 1)]), Err(Error::LeadingZero));
        assert!(RunSymbolic::from_counts(TEN, &[(10, 1)]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let r = RunSymbolic::parse("8157[9^13888887]", TEN).unwrap();
        assert_eq!(r.literal_counts().unwrap(), vec![(8, 1), (1, 1), (5, 1), (7, 1), (9, 13_888_887)]);
        assert_eq!(r.to_string(), "8157[9^13888887]");
        assert!(RunSymbolic::parse("81[9^x]", TEN).is_err());
    }

    #[test]
    fn symbolic_steps() {
        let r = RunSymbolic::parse("8157[9^13888887]", TEN).unwrap();
        assert_eq!(r.elated_step_symbolic(Exponent::SQUARE), TowerInt::from(8_999_999_888));
        let five = RunSymbolic::from_counts(TEN, &[(5, 1)]).unwrap();
        assert_eq!(five.elated_step_symbolic(Exponent::SQUARE), TowerInt::from(125));
    }

    #[test]
    fn comparison_without_materializing() {
        let a = RunSymbolic::parse("8157[9^13888887]", TEN).unwrap();
        let b = RunSymbolic::parse("8175[9^13888887]", TEN).unwrap();
        assert_eq!(a.try_cmp(&b), Some(Ordering::Less));
        assert_eq!(b.try_cmp(&a), Some(Ordering::Greater));
        assert_eq!(a.try_cmp(&a), Some(Ordering::Equal));
    }

    #[test]
    fn json_round_trip() {
        let r = RunSymbolic::parse("74[8^2][9^40]", TEN).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: RunSymbolic = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<RunSymbolic>(r#"{"base":10,"runs":[{"digit":0,"count":{"lit":"1"}}]}"#).is_err());
    }

    fn arb_runs() -> impl Strategy<Value = (u32, Vec<(u32, u64)>)> {
        (2u32..=16).prop_flat_map(|b| {
            (Just(b), proptest::collection::vec((0..b, 1u64..200), 1..6))
        })
    }

    proptest! {
        #[test]
        fn steps_match_direct((b, mut runs) in arb_runs(), nines in 0u64..100_000) {
            let base = Base::new(b).unwrap();
            if runs[0].0 == 0 { runs[0].0 = 1; }
            runs.push((b - 1, nines));
            let r = RunSymbolic::from_counts(base, &runs).unwrap();
            let n = r.to_biguint(1_000_000).unwrap();
            let e = Exponent::SQUARE;
            prop_assert_eq!(r.elated_step_symbolic(e).as_literal().cloned(), Some(elated_step(&n, base, e)));
            prop_assert_eq!(r.happy_step_symbolic(e).as_literal().cloned(), Some(happy_step(&n, base, e)));
        }

        #[test]
        fn tower_value_matches_digits((b, mut runs) in arb_runs()) {
            let base = Base::new(b).unwrap();
            if runs[0].0 == 0 { runs[0].0 = 1; }
            let r = RunSymbolic::from_counts(base, &runs).unwrap();
            let direct = r.to_biguint(10_000).unwrap();
            prop_assert_eq!(r.to_tower().eval_exact(10_000).unwrap(), direct.clone());
            prop_assert_eq!(RunSymbolic::from_value(&direct, base).unwrap(), r);
        }

        #[test]
        fn ordering_matches_values((b, mut x) in arb_runs(), mut y in proptest::collection::vec((0u32..16, 1u64..200), 1..6)) {
            let base = Base::new(b).unwrap();
            if x[0].0 == 0 { x[0].0 = 1; }
            for r in y.iter_mut() { r.0 %= b; }
            if y[0].0 == 0 { y[0].0 = 1; }
            let rx = RunSymbolic::from_counts(base, &x).unwrap();
            let ry = RunSymbolic::from_counts(base, &y).unwrap();
            let (vx, vy) = (rx.to_biguint(10_000).unwrap(), ry.to_biguint(10_000).unwrap());
            prop_assert_eq!(rx.try_cmp(&ry), Some(vx.cmp(&vy)));
        }
    }
}
