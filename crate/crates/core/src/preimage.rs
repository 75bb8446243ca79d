//! Shortest fully basic preimages under the base-b square-digit sum.
//!
//! `𝒮(a)` is the set of numbers with nondecreasing nonzero digits, of the
//! least possible length, whose squared digits sum to `a`. Above
//! `C·(b−1)²` these sets repeat with period `(b−1)²` once trailing
//! `(b−1)` digits are stripped, so large targets reduce to small ones.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::digitmap::{render_digits, Base};
use crate::error::{Error, Result};
use crate::towerint::{eval_mod, ModContext, RunSymbolic, TowerInt};

/// Largest target solved by direct enumeration.
pub const BRUTE_FORCE_MAX: u64 = 1 << 24;

/// A set `𝒮(a)`, members in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PreimageSet {
    pub base: Base,
    pub a: TowerInt,
    /// Number of `(b−1)` digits appended by reduction; zero for direct enumeration.
    pub appended: TowerInt,
    /// Target of the direct enumeration the members were built from.
    pub reduced_target: u64,
    pub members: Vec<RunSymbolic>,
}

impl PreimageSet {
    /// Members as integers, refusing any longer than `cap` digits.
    pub fn values(&self, cap: u64) -> Result<Vec<BigUint>> {
        self.members.iter().map(|m| m.to_biguint(cap)).collect()
    }

    /// Members with trailing `(b−1)` digits removed.
    pub fn stripped(&self) -> Vec<Vec<u32>> {
        let top = self.base.max_digit();
        let mut out: Vec<Vec<u32>> = self
            .members
            .iter()
            .map(|m| {
                let runs = m.runs();
                let keep = match runs.last() {
                    Some(r) if r.digit == top => &runs[..runs.len() - 1],
                    _ => runs,
                };
                keep.iter()
                    .flat_map(|r| {
                        let c = r.count.small_value().expect("prefix runs are short");
                        std::iter::repeat_n(r.digit, c as usize)
                    })
                    .collect()
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Minimal number of squares `d²` (1 ≤ d < b) summing to each value up to `max`.
fn min_lengths(max: u64, base: Base) -> Vec<u32> {
    let squares: Vec<usize> = (1..base.get() as usize).map(|d| d * d).collect();
    let mut len = vec![u32::MAX; max as usize + 1];
    len[0] = 0;
    for s in 1..=max as usize {
        let mut best = u32::MAX;
        for &q in &squares {
            if q > s {
                break;
            }
            best = best.min(len[s - q].saturating_add(1));
        }
        len[s] = best;
    }
    len
}

/// All nondecreasing digit strings of the minimal length with square sum `a`.
fn enumerate_shortest(a: u64, base: Base, len: &[u32]) -> Vec<Vec<u32>> {
    fn walk(rest: u64, left: u32, min_digit: u32, base: Base, len: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for d in min_digit..base.get() {
            let sq = u64::from(d * d);
            if sq * u64::from(left) > rest {
                break;
            }
            let r = rest - sq;
            if len[r as usize] != left - 1 {
                continue;
            }
            cur.push(d);
            walk(r, left - 1, d, base, len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    walk(a, len[a as usize], 1, base, len, &mut Vec::new(), &mut out);
    out
}

fn direct_set(a: u64, base: Base, len: &[u32]) -> Vec<Vec<u32>> {
    let mut set = enumerate_shortest(a, base, len);
    set.sort();
    set
}

/// `𝒮(a)` by direct enumeration; `a ≤ BRUTE_FORCE_MAX` (any `a` in base 2).
pub fn shortest_fully_basic_preimages(a: u64, base: Base) -> Result<PreimageSet> {
    if a == 0 {
        return Err(Error::Zero);
    }
    if base.get() == 2 {
        let ones = RunSymbolic::new(base, vec![(1, TowerInt::from(a))])?;
        return Ok(PreimageSet {
            base,
            a: a.into(),
            appended: TowerInt::zero(),
            reduced_target: a,
            members: vec![ones],
        });
    }
    if a > BRUTE_FORCE_MAX {
        return Err(Error::Precondition(format!(
            "direct enumeration is limited to a <= {BRUTE_FORCE_MAX}; use the reduction"
        )));
    }
    let len = min_lengths(a, base);
    let members = direct_set(a, base, &len)
        .iter()
        .map(|d| RunSymbolic::from_digits(d, base))
        .collect::<Result<_>>()?;
    Ok(PreimageSet { base, a: a.into(), appended: TowerInt::zero(), reduced_target: a, members })
}

/// The constants `a*` and `C = ⌊a*/(b−1)²⌋` of a base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BaseConstants {
    pub base: Base,
    pub a_star: u64,
    pub c: u64,
    /// Upper end of the scan window, `2b(b−1)²`.
    pub window: u64,
    /// Set when `a*` lies at the top of the window, so a larger value could have been missed.
    pub at_boundary: bool,
}

impl BaseConstants {
    /// `(b−1)²`, the period of the stripped sets.
    pub fn period(&self) -> u64 {
        let t = u64::from(self.base.max_digit());
        t * t
    }

    /// Values above this threshold admit the reduction.
    pub fn threshold(&self) -> u64 {
        self.c * self.period()
    }
}

/// Scans `a ≤ 2b(b−1)²` reachable by at most `2b` digits for the largest `a`
/// with a member of `𝒮(a)` not ending in `b−1`.
pub fn compute_base_constants(base: Base) -> Result<BaseConstants> {
    static CACHE: OnceLock<Mutex<HashMap<u32, BaseConstants>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap().get(&base.get()) {
        return Ok(*c);
    }
    if base.get() < 3 {
        return Err(Error::Precondition("base constants need b >= 3".into()));
    }
    let b = u64::from(base.get());
    let top = base.max_digit();
    let period = (b - 1) * (b - 1);
    let window = 2 * b * period;
    let len = min_lengths(window, base);
    let mut a_star = 0;
    for a in 1..=window {
        if u64::from(len[a as usize]) > 2 * b {
            continue;
        }
        if enumerate_shortest(a, base, &len).iter().any(|d| *d.last().unwrap() != top) {
            a_star = a;
        }
    }
    let c = BaseConstants { base, a_star, c: a_star / period, window, at_boundary: a_star == window };
    cache.lock().unwrap().insert(base.get(), c);
    Ok(c)
}

fn appended_members(prefixes: &[Vec<u32>], base: Base, q: &TowerInt) -> Result<Vec<RunSymbolic>> {
    prefixes
        .iter()
        .map(|p| {
            let mut runs: Vec<(u32, TowerInt)> = p.iter().map(|&d| (d, TowerInt::one())).collect();
            runs.push((base.max_digit(), q.clone()));
            RunSymbolic::new(base, runs)
        })
        .collect()
}

/// `𝒮(a)` via the reduction to `a′ = a − (b−1)²q`, `q = ⌊(a−1)/(b−1)²⌋ − C`.
pub fn reduce_preimages(a: &BigUint, base: Base) -> Result<PreimageSet> {
    let k = compute_base_constants(base)?;
    let period = BigUint::from(k.period());
    if a <= &BigUint::from(k.threshold()) {
        return Err(Error::Precondition(format!(
            "reduction needs a > C(b-1)^2 = {}",
            k.threshold()
        )));
    }
    let q = (a - 1u32) / &period - k.c;
    let a_red = (a - &q * &period).to_u64().expect("reduced target is small");
    let len = min_lengths(a_red, base);
    let q = TowerInt::from(q);
    let members = appended_members(&direct_set(a_red, base, &len), base, &q)?;
    Ok(PreimageSet { base, a: TowerInt::from(a.clone()), appended: q, reduced_target: a_red, members })
}

/// Reduction for a symbolic target. `a > C(b−1)²` must be certified by its lower bound.
pub fn reduce_preimages_symbolic(a: &TowerInt, base: Base) -> Result<PreimageSet> {
    if let Some(v) = a.as_literal() {
        return reduce_preimages(v, base);
    }
    let k = compute_base_constants(base)?;
    if a.lower_bound() <= BigInt::from(k.threshold()) {
        return Err(Error::Precondition(format!("cannot certify {a} > {}", k.threshold())));
    }
    let period = k.period();
    let a_minus_one = a.add_small(-1);
    let r = eval_mod(&a_minus_one, &ModContext::new(period)?)?.to_u64().unwrap();
    let a_red = k.threshold() + 1 + r;
    // q = (a − 1 − r)/(b−1)² − C
    let q = TowerInt::exact_div(a_minus_one.add_small(-(r as i64)), period)?.add_small(-(k.c as i64));
    let len = min_lengths(a_red, base);
    let members = appended_members(&direct_set(a_red, base, &len), base, &q)?;
    Ok(PreimageSet { base, a: a.clone(), appended: q, reduced_target: a_red, members })
}

/// `𝒮(a)`, enumerating directly when small and reducing otherwise.
pub fn preimages(a: &BigUint, base: Base) -> Result<PreimageSet> {
    match a.to_u64() {
        Some(0) => Err(Error::Zero),
        Some(v) if v <= BRUTE_FORCE_MAX || base.get() == 2 => shortest_fully_basic_preimages(v, base),
        _ => reduce_preimages(a, base),
    }
}

/// `𝒫(a)`: members of `𝒮(a)` with trailing `(b−1)` digits removed, rendered in base b.
pub fn stripped_preimages(a: &BigUint, base: Base) -> Result<Vec<String>> {
    Ok(preimages(a, base)?.stripped().iter().map(|d| render_digits(d, base)).collect())
}

/// Number of digits in each member.
pub fn member_length(set: &PreimageSet) -> TowerInt {
    set.members.first().map(RunSymbolic::total_len).unwrap_or_else(TowerInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::digitmap::{happy_step, Exponent};
    use proptest::prelude::*;

    const TEN: Base = Base::TEN;

    fn values(set: &PreimageSet) -> Vec<u64> {
        set.values(1000).unwrap().iter().map(|v| v.to_u64().unwrap()).collect()
    }

    fn is_nondecreasing(d: &[u32]) -> bool {
        d.windows(2).all(|w| w[0] <= w[1])
    }

    fn base(b: u32) -> Base {
        Base::new(b).unwrap()
    }

    #[test]
    fn published_sets() {
        let table: &[(u64, &[u64])] = &[
            (487, &[1999999]),
            (488, &[6889999]),
            (529, &[88888889]),
            (534, &[18899999, 47899999]),
            (543, &[57899999]),
            (546, &[88888899]),
            (549, &[48899999]),
            (557, &[378888999, 458889999, 466899999]),
            (561, &[157999999, 368889999, 377799999, 555999999, 788888888]),
            (564, &[188888999, 257999999, 478888999, 567799999]),
            (567, &[9999999]),
            (1, &[1]),
        ];
        for &(a, expected) in table {
            assert_eq!(values(&shortest_fully_basic_preimages(a, TEN).unwrap()), expected, "a = {a}");
        }
    }

    #[test]
    fn published_constants() {
        let expected = [(3, 3, 0), (4, 16, 1), (5, 31, 1), (6, 128, 5), (7, 191, 5), (8, 324, 6), (9, 368, 5), (10, 561, 6)];
        for (b, a_star, c) in expected {
            let k = compute_base_constants(base(b)).unwrap();
            assert_eq!((k.a_star, k.c), (a_star, c), "b = {b}");
            assert!(!k.at_boundary);
        }
    }

    #[test]
    fn reduction_examples() {
        let s = reduce_preimages(&BigUint::from(731u32), TEN).unwrap();
        assert_eq!(s.appended, TowerInt::from(3));
        assert_eq!(s.reduced_target, 488);
        assert_eq!(values(&s), vec![6_889_999_999]);

        let s = reduce_preimages(&BigUint::from(488u32), TEN).unwrap();
        assert_eq!(values(&s), vec![6_889_999]);

        let s = reduce_preimages(&BigUint::from(1_124_999_922u64), TEN).unwrap();
        assert_eq!(s.appended, TowerInt::from(13_888_881));
        assert_eq!(s.reduced_target, 561);
        let text: Vec<String> = s.members.iter().map(|m| m.to_string()).collect();
        assert_eq!(text[0], "157[9^13888887]");
        assert_eq!(text[4], "788888888[9^13888881]");

        assert!(reduce_preimages(&BigUint::from(486u32), TEN).is_err());
    }

    #[test]
    fn symbolic_reduction_agrees_with_exact() {
        let a = TowerInt::sum_raw(vec![(BigInt::one(), TowerInt::pow_raw(10u32, TowerInt::from(6))), (BigInt::from(-7), TowerInt::one())]);
        let sym = reduce_preimages_symbolic(&a, TEN).unwrap();
        let exact = reduce_preimages(&BigUint::from(999_993u32), TEN).unwrap();
        assert_eq!(sym.reduced_target, exact.reduced_target);
        assert_eq!(sym.appended.eval_exact(100).unwrap(), exact.appended.eval_exact(100).unwrap());
        assert_eq!(sym.stripped(), exact.stripped());
    }

    #[test]
    fn stripped_examples() {
        assert_eq!(stripped_preimages(&BigUint::from(567u32), TEN).unwrap(), vec![String::new()]);
        assert_eq!(stripped_preimages(&BigUint::from(534u32), TEN).unwrap(), vec!["188", "478"]);
        assert_eq!(stripped_preimages(&BigUint::from(615u32), TEN).unwrap(), vec!["188", "478"]);
    }

    #[test]
    fn reduction_matches_direct_enumeration() {
        for b in 3..=10 {
            let k = compute_base_constants(base(b)).unwrap();
            let lo = k.threshold() + 1;
            for a in lo..=lo + 4 * k.period() - 1 {
                let direct = shortest_fully_basic_preimages(a, base(b)).unwrap();
                let reduced = reduce_preimages(&BigUint::from(a), base(b)).unwrap();
                assert_eq!(direct.values(10_000).unwrap(), reduced.values(10_000).unwrap(), "b={b} a={a}");
            }
        }
    }

    #[test]
    fn stripped_sets_are_periodic() {
        for b in 3..=10 {
            let k = compute_base_constants(base(b)).unwrap();
            for a in k.threshold() + 1..=k.threshold() + 2 * k.period() {
                let here = shortest_fully_basic_preimages(a, base(b)).unwrap().stripped();
                let next = shortest_fully_basic_preimages(a + k.period(), base(b)).unwrap().stripped();
                assert_eq!(here, next, "b={b} a={a}");
            }
        }
    }

    #[test]
    fn members_have_few_non_top_digits() {
        for b in 3..=10u32 {
            for a in 1..=3000 {
                let s = shortest_fully_basic_preimages(a, base(b)).unwrap();
                for m in &s.members {
                    let d = m.to_digits(1000).unwrap();
                    let others = d.iter().filter(|&&x| x != b - 1).count();
                    assert!(others < 2 * b as usize, "b={b} a={a} {m}");
                }
            }
        }
    }

    // independent oracle: breadth-first search over digit multisets of growing length
    fn oracle(a: u64, b: u32) -> Vec<u64> {
        for l in 1.. {
            let mut found = Vec::new();
            let mut stack: Vec<(Vec<u32>, u64)> = vec![(vec![], 0)];
            while let Some((d, s)) = stack.pop() {
                if d.len() == l {
                    if s == a {
                        found.push(d.iter().fold(0u64, |acc, &x| acc * u64::from(b) + u64::from(x)));
                    }
                    continue;
                }
                let lo = d.last().copied().unwrap_or(1);
                for x in lo..b {
                    let s2 = s + u64::from(x * x);
                    if s2 <= a {
                        let mut e = d.clone();
                        e.push(x);
                        stack.push((e, s2));
                    }
                }
            }
            if !found.is_empty() {
                found.sort();
                return found;
            }
        }
        unreachable!()
    }

    proptest! {
        #[test]
        fn matches_oracle(b in 2u32..=7, a in 1u64..60) {
            let s = shortest_fully_basic_preimages(a, base(b)).unwrap();
            prop_assert_eq!(values(&s), oracle(a, b));
        }

        #[test]
        fn members_map_back(b in 3u32..=12, a in 1u64..5000) {
            let s = shortest_fully_basic_preimages(a, base(b)).unwrap();
            let len = s.members[0].len_u64().unwrap();
            for m in &s.members {
                let d = m.to_digits(10_000).unwrap();
                prop_assert!(is_nondecreasing(&d));
                prop_assert_eq!(d.len() as u64, len);
                let v = m.to_biguint(10_000).unwrap();
                prop_assert_eq!(happy_step(&v, base(b), Exponent::SQUARE), BigUint::from(a));
            }
        }
    }
}
