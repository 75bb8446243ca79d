//! Cycles of a digit map and attractor lookup.
//!
//! For `e = 2` every `a >= b^3` satisfies `step(a) < a`, so every orbit
//! eventually drops below `b^3` and every cycle touches `[1, b^3)`. A
//! [`Dynamics`] table records, for each `n` below the descent bound, which
//! cycle it falls into and after how many steps.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::digitmap::{render, Base, DigitMap, Exponent, MapKind};
use crate::error::{Error, Result};

/// Largest table the library will allocate.
pub const MAX_TABLE: u64 = 1 << 28;

const UNKNOWN: u32 = u32::MAX;

/// A cycle, rotated so its smallest member comes first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cycle {
    members: Vec<u64>,
}

impl Cycle {
    /// Canonicalizes an orbit segment into a cycle (rotation only).
    pub fn from_orbit(mut members: Vec<u64>) -> Self {
        let pos = members
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| v)
            .map(|(i, _)| i)
            .unwrap_or(0);
        members.rotate_left(pos);
        Cycle { members }
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn smallest(&self) -> u64 {
        self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.contains(&n)
    }

    /// `(m1, m2, ...)` with each member written in base b.
    pub fn render(&self, base: Base) -> String {
        let parts: Vec<String> = self.members.iter().map(|&m| render(&BigUint::from(m), base)).collect();
        format!("({})", parts.join(", "))
    }
}

/// All cycles of one digit map, sorted by minimum member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSet {
    pub map: DigitMap,
    pub cycles: Vec<Cycle>,
}

impl CycleSet {
    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.cycles.iter().flat_map(|c| c.members.iter().copied())
    }

    pub fn contains(&self, n: u64) -> bool {
        self.cycles.iter().any(|c| c.contains(n))
    }

    pub fn cycle_of(&self, n: u64) -> Option<&Cycle> {
        self.cycles.iter().find(|c| c.contains(n))
    }

    pub fn render(&self) -> Vec<String> {
        self.cycles.iter().map(|c| c.render(self.map.base)).collect()
    }
}

impl fmt::Display for CycleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render().join(", "))
    }
}

/// Where an orbit ends up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attractor {
    /// Minimum member of the cycle reached.
    pub representative: u64,
    /// First cycle member touched.
    pub entry: u64,
    /// Steps until `entry` is reached.
    pub steps: u64,
}

/// Returns a bound `B` such that `a >= B` implies `step(a) < a`.
///
/// For `e = 2` this is `b^3` for both maps. Other exponents need a
/// caller-supplied bound, which is spot-checked before use.
pub fn descent_bound(map: DigitMap, user_bound: Option<u64>) -> Result<u64> {
    if let Some(bound) = user_bound {
        validate_descent_bound(map, bound)?;
        return Ok(bound);
    }
    if map.exponent != Exponent::SQUARE {
        return Err(Error::NoDescentBound(map.exponent.get()));
    }
    let b = map.base.get() as u128;
    let cube = b * b * b;
    if cube > MAX_TABLE as u128 {
        return Err(Error::TableTooLarge(cube));
    }
    Ok(cube as u64)
}

fn validate_descent_bound(map: DigitMap, bound: u64) -> Result<()> {
    if bound < 2 {
        return Err(Error::Precondition("descent bound must be at least 2".into()));
    }
    if bound > MAX_TABLE {
        return Err(Error::TableTooLarge(bound as u128));
    }
    let b = map.base.get() as u64;
    let mut probes: Vec<u64> = (bound..bound.saturating_add(2000)).collect();
    // all-max-digit numbers maximize the image for their length
    let mut p: u64 = 1;
    while let Some(next) = p.checked_mul(b) {
        if next > bound {
            probes.push(next - 1);
            probes.push(next);
        }
        p = next;
    }
    for a in probes {
        let image = map.step_u64(a);
        if image.is_none_or(|v| v >= a) {
            return Err(Error::DescentBoundRejected { bound, witness: a });
        }
    }
    Ok(())
}

/// Attractor table for one digit map.
#[derive(Clone, Debug)]
pub struct Dynamics {
    map: DigitMap,
    bound: u64,
    cycles: CycleSet,
    cycle_id: Vec<u32>,
    steps: Vec<u32>,
    // values >= bound met while building the table
    outside: HashMap<u64, (u32, u32)>,
}

impl Dynamics {
    /// Builds the table for `e = 2` (bound `b^3`).
    pub fn new(map: DigitMap) -> Result<Self> {
        Self::with_bound(map, None)
    }

    pub fn with_bound(map: DigitMap, user_bound: Option<u64>) -> Result<Self> {
        let bound = descent_bound(map, user_bound)?;
        Self::build(map, bound)
    }

    fn build(map: DigitMap, bound: u64) -> Result<Self> {
        let size = bound as usize;
        let mut cycle_id = vec![UNKNOWN; size];
        let mut steps = vec![0u32; size];
        let mut outside: HashMap<u64, (u32, u32)> = HashMap::new();
        let mut orbits: Vec<Vec<u64>> = Vec::new();

        let lookup = |x: u64, cycle_id: &[u32], steps: &[u32], outside: &HashMap<u64, (u32, u32)>| {
            if x < bound {
                let c = cycle_id[x as usize];
                (c != UNKNOWN).then(|| (c, steps[x as usize]))
            } else {
                outside.get(&x).copied()
            }
        };

        let mut path: Vec<u64> = Vec::new();
        let mut on_path: HashMap<u64, usize> = HashMap::new();
        for start in 1..bound {
            if cycle_id[start as usize] != UNKNOWN {
                continue;
            }
            path.clear();
            on_path.clear();
            let mut x = start;
            let (cid, mut st) = loop {
                if let Some(known) = lookup(x, &cycle_id, &steps, &outside) {
                    break known;
                }
                if let Some(&i) = on_path.get(&x) {
                    let id = orbits.len() as u32;
                    orbits.push(path[i..].to_vec());
                    for &y in &path[i..] {
                        set(y, (id, 0), bound, &mut cycle_id, &mut steps, &mut outside);
                    }
                    path.truncate(i);
                    break (id, 0);
                }
                on_path.insert(x, path.len());
                path.push(x);
                x = map.step_u64(x).ok_or_else(|| {
                    Error::Precondition(format!("image of {x} overflows 64 bits"))
                })?;
            };
            for &y in path.iter().rev() {
                st += 1;
                set(y, (cid, st), bound, &mut cycle_id, &mut steps, &mut outside);
            }
        }

        // order cycles by minimum member and renumber
        let mut cycles: Vec<(usize, Cycle)> =
            orbits.into_iter().map(Cycle::from_orbit).enumerate().collect();
        cycles.sort_by_key(|(_, c)| c.smallest());
        let mut remap = vec![0u32; cycles.len()];
        for (new, (old, _)) in cycles.iter().enumerate() {
            remap[*old] = new as u32;
        }
        for c in cycle_id.iter_mut().skip(1) {
            *c = remap[*c as usize];
        }
        for v in outside.values_mut() {
            v.0 = remap[v.0 as usize];
        }
        let cycles = CycleSet { map, cycles: cycles.into_iter().map(|(_, c)| c).collect() };
        Ok(Dynamics { map, bound, cycles, cycle_id, steps, outside })
    }

    pub fn map(&self) -> DigitMap {
        self.map
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn cycles(&self) -> &CycleSet {
        &self.cycles
    }

    /// Representative of the attracting cycle and steps to reach it, for table entries.
    pub(crate) fn table_entry(&self, x: u64) -> Option<(u64, u32)> {
        self.entry(x).map(|(c, st)| (self.cycles.cycles[c as usize].smallest(), st))
    }

    fn entry(&self, x: u64) -> Option<(u32, u32)> {
        if x < self.bound {
            (x > 0).then(|| (self.cycle_id[x as usize], self.steps[x as usize]))
        } else {
            self.outside.get(&x).copied()
        }
    }

    /// Attractor of a machine-size integer.
    pub fn attractor_u64(&self, n: u64) -> Result<Attractor> {
        self.attractor(&BigUint::from(n))
    }

    pub fn attractor(&self, n: &BigUint) -> Result<Attractor> {
        let mut steps = 0u64;
        let mut x = n.clone();
        let (start, (cid, st)) = loop {
            if let Some(v) = x.to_u64() {
                if v == 0 {
                    return Err(Error::Zero);
                }
                if let Some(e) = self.entry(v) {
                    break (v, e);
                }
            }
            x = self.map.step(&x);
            steps += 1;
        };
        let mut entry = start;
        for _ in 0..st {
            entry = self.map.step_u64(entry).expect("table values fit in u64");
        }
        Ok(Attractor {
            representative: self.cycles.cycles[cid as usize].smallest(),
            entry,
            steps: steps + st as u64,
        })
    }

    /// Steps to reach 1, or `None` when the orbit ends on another cycle.
    pub fn steps_to_one(&self, n: &BigUint) -> Result<Option<u64>> {
        let a = self.attractor(n)?;
        Ok((a.representative == 1).then_some(a.steps))
    }
}

fn set(
    x: u64,
    value: (u32, u32),
    bound: u64,
    cycle_id: &mut [u32],
    steps: &mut [u32],
    outside: &mut HashMap<u64, (u32, u32)>,
) {
    if x < bound {
        cycle_id[x as usize] = value.0;
        steps[x as usize] = value.1;
    } else {
        outside.insert(x, value);
    }
}

/// All cycles of `E_{e,b}`; `e != 2` is rejected (use [`enumerate_cycles_with_bound`]).
pub fn enumerate_cycles(base: Base, exponent: Exponent) -> Result<CycleSet> {
    let map = DigitMap::new(base, exponent, MapKind::Elated);
    Ok(Dynamics::with_bound(map, None)?.cycles)
}

/// Cycles of any digit map given a verified descent bound.
pub fn enumerate_cycles_with_bound(map: DigitMap, bound: Option<u64>) -> Result<CycleSet> {
    Ok(Dynamics::with_bound(map, bound)?.cycles)
}

/// Attractor of `n` under `E_{e,b}` (`e = 2` unless a bound is configured via [`Dynamics`]).
pub fn attractor(n: &BigUint, base: Base, exponent: Exponent) -> Result<Attractor> {
    let map = DigitMap::new(base, exponent, MapKind::Elated);
    Dynamics::new(map)?.attractor(n)
}

pub fn is_elated(n: &BigUint, base: Base, exponent: Exponent) -> Result<bool> {
    Ok(attractor(n, base, exponent)?.representative == 1)
}

/// Published cycle listings for `E_{2,b}`, `2 <= b <= 10`, written in base b.
pub fn reference_cycles(base: Base) -> Option<&'static [&'static str]> {
    Some(match base.get() {
        2 => &["(1)"],
        3 => &["(1)", "(12)", "(20, 22, 121)"],
        4 => &["(1)", "(20)"],
        5 => &["(1)", "(13, 20)"],
        6 => &["(1)", "(50, 325, 310)", "(53, 442, 400, 144)"],
        7 => &["(1)", "(13)", "(22)", "(505)", "(2, 11)"],
        8 => &["(1)", "(536)", "(660)", "(36, 207, 152)", "(5, 175, 113, 13, 12)"],
        9 => &["(1)", "(30)", "(646)", "(762)"],
        10 => &["(1)", "(298)", "(46, 208, 136)", "(26, 80, 512, 150)", "(33, 54, 205, 58, 445, 228, 144)"],
        _ => return None,
    })
}

/// Agreement with [`reference_cycles`]: `None` when no reference exists for the base.
pub fn matches_reference(set: &CycleSet) -> Option<bool> {
    if set.map.exponent != Exponent::SQUARE || set.map.kind != MapKind::Elated {
        return None;
    }
    let reference = reference_cycles(set.map.base)?;
    let mut expected: Vec<String> = reference.iter().map(|s| s.to_string()).collect();
    let mut got = set.render();
    expected.sort();
    got.sort();
    Some(expected == got)
}
