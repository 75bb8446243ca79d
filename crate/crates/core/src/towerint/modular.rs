//! Residues of [`TowerInt`]s modulo factored moduli.
//!
//! A power `g^e` modulo `m` is reduced by splitting `m` into the part that
//! shares primes with `g` and the part coprime to it. On the coprime part
//! `g` has a multiplicative order `L`, so only `e mod L` matters; on the
//! shared part `g^e` vanishes once `e` reaches the largest prime exponent
//! `t` of that part. Choosing `e' ≡ e (mod L)` with `e' ≥ t` gives the
//! residue modulo the whole of `m`, provided `e ≥ t` is certified by
//! [`TowerInt::lower_bound`].

use std::collections::{HashMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use super::primes::{factor, verification_primes};
use super::{Node, TowerInt};
use crate::error::{Error, Result};

/// Default number of verification primes for symbolic equality.
pub const DEFAULT_TRIALS: usize = 20;

/// Values certified to have at most this many digits are compared exactly.
pub const DEFAULT_EXACT_DIGITS: u64 = 100_000;

/// A modulus together with its prime factorization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModContext {
    modulus: BigUint,
    factors: Vec<(u64, u32)>,
}

fn merge_max(into: &mut Vec<(u64, u32)>, from: &[(u64, u32)]) {
    for &(p, e) in from {
        match into.iter_mut().find(|(q, _)| *q == p) {
            Some((_, f)) => *f = (*f).max(e),
            None => into.push((p, e)),
        }
    }
    into.sort_unstable();
}

fn merge_add(into: &mut Vec<(u64, u32)>, from: &[(u64, u32)]) {
    for &(p, e) in from {
        match into.iter_mut().find(|(q, _)| *q == p) {
            Some((_, f)) => *f += e,
            None => into.push((p, e)),
        }
    }
    into.sort_unstable();
}

impl ModContext {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
        Ok(ModContext::from_factors(factor(m)))
    }

    /// Builds the context for `∏ p^e`. Entries with `e = 0` are dropped.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Self {
        let mut fs: Vec<(u64, u32)> = Vec::new();
        merge_add(&mut fs, &factors.into_iter().filter(|&(_, e)| e > 0).collect::<Vec<_>>());
        let modulus = fs.iter().map(|&(p, e)| BigUint::from(p).pow(e)).product();
        ModContext { modulus, factors: fs }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Context for `self.modulus() * d`.
    pub fn mul(&self, d: u64) -> Result<Self> {
        let mut fs = self.factors.clone();
        merge_add(&mut fs, &ModContext::new(d)?.factors);
        Ok(ModContext::from_factors(fs))
    }

    fn mul_context(&self, other: &ModContext) -> Self {
        let mut fs = self.factors.clone();
        merge_add(&mut fs, &other.factors);
        ModContext::from_factors(fs)
    }

    /// `(t, coprime)`: the largest prime exponent among primes dividing `g`,
    /// and the context of the part of the modulus coprime to `g`.
    pub fn split(&self, g: &BigUint) -> (u32, ModContext) {
        let mut t = 0;
        let mut coprime = Vec::new();
        for &(p, e) in &self.factors {
            if (g % p).is_zero() {
                t = t.max(e);
            } else {
                coprime.push((p, e));
            }
        }
        (t, ModContext::from_factors(coprime))
    }

    /// Factorization of the Carmichael function of the modulus.
    pub fn carmichael(&self) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        for &(p, e) in &self.factors {
            let part = if p == 2 {
                match e {
                    1 => vec![],
                    2 => vec![(2, 1)],
                    _ => vec![(2, e - 2)],
                }
            } else {
                let mut part = factor(p - 1);
                if e > 1 {
                    merge_add(&mut part, &[(p, e - 1)]);
                }
                part
            };
            merge_max(&mut out, &part);
        }
        out
    }

    /// Multiplicative order of `g` (coprime to the modulus), as a factored context.
    pub fn order_of(&self, g: &BigUint) -> Result<ModContext> {
        if self.is_one() {
            return Ok(ModContext::from_factors(vec![]));
        }
        if !g.gcd(&self.modulus).is_one() {
            return Err(Error::OrderReductionUnavailable(format!(
                "{g} is not invertible modulo {}",
                self.modulus
            )));
        }
        let mut ord = self.carmichael();
        let value = |fs: &[(u64, u32)]| -> BigUint { fs.iter().map(|&(p, e)| BigUint::from(p).pow(e)).product() };
        for i in 0..ord.len() {
            while ord[i].1 > 0 {
                ord[i].1 -= 1;
                if !g.modpow(&value(&ord), &self.modulus).is_one() {
                    ord[i].1 += 1;
                    break;
                }
            }
        }
        Ok(ModContext::from_factors(ord))
    }
}

/// Memoizing evaluator of residues. Certifies each exact division once.
#[derive(Default)]
pub struct ModEvaluator {
    memo: HashMap<(usize, BigUint), BigUint>,
    // keeps memoized nodes alive so their addresses stay unique
    pinned: HashMap<usize, TowerInt>,
    certified: HashSet<usize>,
    orders: HashMap<(BigUint, BigUint), ModContext>,
}

impl ModEvaluator {
    pub fn new() -> Self {
        ModEvaluator::default()
    }

    /// Residue of `x` modulo `ctx.modulus()`.
    pub fn eval(&mut self, x: &TowerInt, ctx: &ModContext) -> Result<BigUint> {
        if ctx.is_one() {
            return Ok(BigUint::zero());
        }
        let key = (x.id(), ctx.modulus().clone());
        if let Some(r) = self.memo.get(&key) {
            return Ok(r.clone());
        }
        let m = ctx.modulus();
        let r = match x.node() {
            Node::Literal(n) => n % m,
            Node::Sum(terms) => {
                let mi = BigInt::from(m.clone());
                let mut acc = BigInt::zero();
                for (c, t) in terms {
                    acc += c.mod_floor(&mi) * BigInt::from(self.eval(t, ctx)?);
                }
                acc.mod_floor(&mi).to_biguint().unwrap()
            }
            Node::Product(fs) => {
                let mut acc = BigUint::one() % m;
                for f in fs {
                    acc = acc * self.eval(f, ctx)? % m;
                }
                acc
            }
            Node::PowBase { base, exponent } => self.pow(base, exponent, ctx)?,
            Node::Repunit { shift, base, count } => {
                let b = BigUint::from(*base);
                let wide = ctx.mul(u64::from(*base - 1))?;
                let p = self.pow(&b, count, &wide)?;
                let ones = (p + wide.modulus() - 1u32) % wide.modulus() / (*base - 1);
                ones * self.pow(&b, shift, ctx)? % m
            }
            Node::ExactDiv { numerator, divisor } => {
                let d = divisor.to_u64().ok_or_else(|| {
                    Error::OrderReductionUnavailable(format!("divisor {divisor} exceeds 64 bits"))
                })?;
                let dctx = ModContext::new(d)?;
                self.certify(x, numerator, &dctx)?;
                match divisor.modinv(m) {
                    Some(inv) => self.eval(numerator, ctx)? * inv % m,
                    None => {
                        let wide = ctx.mul_context(&dctx);
                        let r = self.eval(numerator, &wide)?;
                        (r / divisor) % m
                    }
                }
            }
        };
        self.pinned.entry(x.id()).or_insert_with(|| x.clone());
        self.memo.insert(key, r.clone());
        Ok(r)
    }

    fn certify(&mut self, node: &TowerInt, numerator: &TowerInt, dctx: &ModContext) -> Result<()> {
        if self.certified.contains(&node.id()) {
            return Ok(());
        }
        if !self.eval(numerator, dctx)?.is_zero() {
            return Err(Error::DivisibilityViolated(format!(
                "{} does not divide {numerator}",
                dctx.modulus()
            )));
        }
        self.pinned.entry(node.id()).or_insert_with(|| node.clone());
        self.certified.insert(node.id());
        Ok(())
    }

    fn pow(&mut self, g: &BigUint, e: &TowerInt, ctx: &ModContext) -> Result<BigUint> {
        let m = ctx.modulus();
        if let Some(ev) = e.small_value() {
            return Ok(g.modpow(&BigUint::from(ev), m));
        }
        if g.is_zero() || g.is_one() {
            if e.lower_bound() < BigInt::one() {
                return Err(Error::OrderReductionUnavailable(format!("cannot certify {e} >= 1")));
            }
            return Ok(g % m);
        }
        let (t, coprime) = ctx.split(g);
        let order_key = (g.clone(), coprime.modulus().clone());
        let ord = match self.orders.get(&order_key) {
            Some(o) => o.clone(),
            None => {
                let o = coprime.order_of(&(g % coprime.modulus()))?;
                self.orders.insert(order_key, o.clone());
                o
            }
        };
        let mut reduced = self.eval(e, &ord)?;
        if t > 0 {
            if e.lower_bound() < BigInt::from(t) {
                return Err(Error::OrderReductionUnavailable(format!(
                    "cannot certify exponent {e} >= {t} modulo {m}"
                )));
            }
            let l = ord.modulus();
            let t = BigUint::from(t);
            if reduced < t {
                reduced += (&t - &reduced).div_ceil(l) * l;
            }
        }
        Ok(g.modpow(&reduced, m))
    }
}

/// Residue of `x` modulo `ctx.modulus()` with a fresh evaluator.
pub fn eval_mod(x: &TowerInt, ctx: &ModContext) -> Result<BigUint> {
    ModEvaluator::new().eval(x, ctx)
}

/// Equality checker: exact for small values, else agreement modulo seeded 64-bit primes.
///
/// A `false` answer is always correct; `true` from the residue path can be
/// wrong only if every prime divides the difference.
#[derive(Clone, Debug)]
pub struct Checker {
    primes: Vec<u64>,
    exact_digits: u64,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new(DEFAULT_TRIALS)
    }
}

impl Checker {
    pub fn new(trials: usize) -> Self {
        Checker { primes: verification_primes(trials.max(1)), exact_digits: DEFAULT_EXACT_DIGITS }
    }

    pub fn with_exact_digits(mut self, digits: u64) -> Self {
        self.exact_digits = digits;
        self
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn trials(&self) -> usize {
        self.primes.len()
    }

    /// Residues of `x` modulo each verification prime.
    pub fn residues(&self, x: &TowerInt) -> Result<Vec<u64>> {
        self.primes
            .par_iter()
            .map(|&p| {
                let ctx = ModContext::from_factors(vec![(p, 1)]);
                let r = ModEvaluator::new().eval(x, &ctx)?;
                Ok(r.to_u64().unwrap())
            })
            .collect()
    }

    fn small(&self, x: &TowerInt) -> bool {
        x.upper_digits().is_some_and(|d| d <= self.exact_digits)
    }

    pub fn equal(&self, x: &TowerInt, y: &TowerInt) -> Result<bool> {
        if self.small(x) && self.small(y) {
            return Ok(x.eval_exact(self.exact_digits)? == y.eval_exact(self.exact_digits)?);
        }
        let rx = self.residues(x)?;
        let ry = self.residues(y)?;
        Ok(rx == ry)
    }
}

/// `x == y`, decided exactly when both are small and otherwise modulo `trials` primes.
pub fn equal_mod_primes(x: &TowerInt, y: &TowerInt, trials: usize) -> Result<bool> {
    Checker::new(trials).equal(x, y)
}
