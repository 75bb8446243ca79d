//! Symbolic integers too large to write down.
//!
//! A [`TowerInt`] is an immutable expression tree over nonnegative integers:
//! literals, integer-weighted sums, products, powers of a fixed base with a
//! symbolic exponent, shifted repunits, and exact divisions. Values are
//! compared by exact arithmetic when small and otherwise by residues modulo
//! a set of 64-bit primes (see [`modular`]). Exponents are reduced through
//! multiplicative orders, so towers such as `10^(10^13888888 / 648)` can be
//! evaluated modulo any 64-bit modulus.
//!
//! [`RunSymbolic`] stores a base-b number as runs of equal digits whose
//! lengths are themselves `TowerInt`s.

pub mod modular;
pub mod primes;
mod runs;
mod towers;

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use modular::{eval_mod, equal_mod_primes, Checker, ModContext, ModEvaluator, DEFAULT_TRIALS};
pub use runs::{Run, RunSymbolic};
pub use towers::{
    build_epsilon_tower, verify_epsilon_tower, ChainLink, Congruence, DescentCheck, FiniteCheck, TowerConfig,
    TowerNumbers, TowerReport, Trust,
};

/// Results with at most this many bits are folded into literals at construction.
pub const FOLD_BITS: u64 = 1 << 16;

/// Lower bounds saturate at `2^LOWER_BOUND_CAP_BITS`.
pub const LOWER_BOUND_CAP_BITS: u64 = 1 << 12;

/// Default cap on materialized integers, in decimal digits.
pub const DEFAULT_DIGIT_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Literal(BigUint),
    Sum(Vec<(BigInt, TowerInt)>),
    Product(Vec<TowerInt>),
    PowBase { base: BigUint, exponent: TowerInt },
    /// `base^shift * (base^count - 1) / (base - 1)`: `count` ones followed by `shift` zeros.
    Repunit { shift: TowerInt, base: u32, count: TowerInt },
    /// `numerator / divisor`, valid only when the division is exact.
    ExactDiv { numerator: TowerInt, divisor: BigUint },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerInt(Arc<Node>);

impl TowerInt {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &TowerInt) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn raw(node: Node) -> Self {
        TowerInt(Arc::new(node))
    }

    pub fn literal(n: impl Into<BigUint>) -> Self {
        TowerInt::raw(Node::Literal(n.into()))
    }

    pub fn zero() -> Self {
        TowerInt::literal(0u32)
    }

    pub fn one() -> Self {
        TowerInt::literal(1u32)
    }

    pub fn as_literal(&self) -> Option<&BigUint> {
        match self.node() {
            Node::Literal(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        self.as_literal().is_some()
    }

    /// Weighted sum; folds when every term is a literal and the result is nonnegative.
    pub fn sum(terms: Vec<(BigInt, TowerInt)>) -> Self {
        let terms: Vec<_> = terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        if terms.iter().all(|(_, t)| t.is_literal()) {
            let total: BigInt = terms
                .iter()
                .map(|(c, t)| c * BigInt::from(t.as_literal().unwrap().clone()))
                .sum();
            if !total.is_negative() {
                return TowerInt::literal(total.to_biguint().unwrap());
            }
        }
        if terms.len() == 1 && terms[0].0.is_one() {
            return terms[0].1.clone();
        }
        TowerInt::raw(Node::Sum(terms))
    }

    pub fn sum_raw(terms: Vec<(BigInt, TowerInt)>) -> Self {
        TowerInt::raw(Node::Sum(terms))
    }

    pub fn add(&self, other: &TowerInt) -> Self {
        TowerInt::sum(vec![(BigInt::one(), self.clone()), (BigInt::one(), other.clone())])
    }

    pub fn add_small(&self, c: i64) -> Self {
        TowerInt::sum(vec![(BigInt::one(), self.clone()), (BigInt::from(c), TowerInt::one())])
    }

    pub fn sub(&self, other: &TowerInt) -> Self {
        TowerInt::sum(vec![(BigInt::one(), self.clone()), (-BigInt::one(), other.clone())])
    }

    pub fn scale(&self, c: impl Into<BigInt>) -> Self {
        TowerInt::sum(vec![(c.into(), self.clone())])
    }

    pub fn product(factors: Vec<TowerInt>) -> Self {
        if factors.iter().all(TowerInt::is_literal) {
            let p: BigUint = factors.iter().map(|f| f.as_literal().unwrap().clone()).product();
            return TowerInt::literal(p);
        }
        TowerInt::raw(Node::Product(factors))
    }

    pub fn mul(&self, other: &TowerInt) -> Self {
        TowerInt::product(vec![self.clone(), other.clone()])
    }

    /// `base^exponent`; folded when the result has at most [`FOLD_BITS`] bits.
    pub fn pow(base: impl Into<BigUint>, exponent: TowerInt) -> Self {
        let base = base.into();
        if let Some(e) = exponent.as_literal().and_then(|e| e.to_u64()) {
            if base.bits().saturating_mul(e) <= FOLD_BITS || base <= BigUint::one() {
                return TowerInt::literal(base.pow(e as u32));
            }
        }
        TowerInt::raw(Node::PowBase { base, exponent })
    }

    pub fn pow_raw(base: impl Into<BigUint>, exponent: TowerInt) -> Self {
        TowerInt::raw(Node::PowBase { base: base.into(), exponent })
    }

    /// `count` ones followed by `shift` zeros in `base`.
    pub fn repunit(shift: TowerInt, base: u32, count: TowerInt) -> Self {
        if let (Some(s), Some(c)) = (
            shift.as_literal().and_then(|s| s.to_u64()),
            count.as_literal().and_then(|c| c.to_u64()),
        ) {
            let bits = ((s + c) as f64 * (base as f64).log2()).ceil() as u64;
            if bits <= FOLD_BITS {
                let b = BigUint::from(base);
                let ones = (b.pow(c as u32) - 1u32) / (base - 1);
                return TowerInt::literal(ones * b.pow(s as u32));
            }
        }
        TowerInt::raw(Node::Repunit { shift, base, count })
    }

    pub fn repunit_raw(shift: TowerInt, base: u32, count: TowerInt) -> Self {
        TowerInt::raw(Node::Repunit { shift, base, count })
    }

    /// Exact division. Literal numerators are divided immediately and must be divisible.
    pub fn exact_div(numerator: TowerInt, divisor: impl Into<BigUint>) -> Result<Self> {
        let divisor = divisor.into();
        if divisor.is_zero() {
            return Err(Error::Precondition("division by zero".into()));
        }
        if let Some(n) = numerator.as_literal() {
            let (q, r) = n.div_rem(&divisor);
            if !r.is_zero() {
                return Err(Error::DivisibilityViolated(format!("{divisor} does not divide {n}")));
            }
            return Ok(TowerInt::literal(q));
        }
        Ok(TowerInt::raw(Node::ExactDiv { numerator, divisor }))
    }

    pub fn exact_div_raw(numerator: TowerInt, divisor: impl Into<BigUint>) -> Self {
        TowerInt::raw(Node::ExactDiv { numerator, divisor: divisor.into() })
    }

    fn children(&self) -> Vec<&TowerInt> {
        match self.node() {
            Node::Literal(_) => vec![],
            Node::Sum(terms) => terms.iter().map(|(_, t)| t).collect(),
            Node::Product(fs) => fs.iter().collect(),
            Node::PowBase { exponent, .. } => vec![exponent],
            Node::Repunit { shift, count, .. } => vec![shift, count],
            Node::ExactDiv { numerator, .. } => vec![numerator],
        }
    }

    /// Number of distinct nodes reachable from this one.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if seen.insert(t.id()) {
                stack.extend(t.children());
            }
        }
        seen.len()
    }

    /// `Some(v)` when the value is known to fit in 64 bits and is cheap to compute.
    pub fn small_value(&self) -> Option<u64> {
        if let Some(n) = self.as_literal() {
            return n.to_u64();
        }
        if self.upper_bits()? > 64 {
            return None;
        }
        self.eval_exact_bits(64).ok().and_then(|v| v.to_u64())
    }

    /// `Some(bits)` with `value < 2^bits`; `None` if no finite bound fits in 62 bits.
    pub fn upper_bits(&self) -> Option<u64> {
        const LIMIT: u64 = 1 << 62;
        let bits = match self.node() {
            Node::Literal(n) => n.bits(),
            Node::Sum(terms) => {
                let mut max = 0u64;
                let mut count = 0u64;
                for (c, t) in terms {
                    if c.is_positive() {
                        max = max.max(t.upper_bits()?.checked_add(c.bits())?);
                        count += 1;
                    }
                }
                max + ceil_log2(count)
            }
            Node::Product(fs) => {
                let mut total = 0u64;
                for f in fs {
                    total = total.checked_add(f.upper_bits()?)?;
                }
                total
            }
            Node::PowBase { base, exponent } => {
                if base <= &BigUint::one() {
                    1
                } else {
                    pow_bits(base_log2(base), exponent.small_value()? as f64)?
                }
            }
            Node::Repunit { shift, base, count } => {
                let e = shift.small_value()?.checked_add(count.small_value()?)?;
                pow_bits((*base as f64).log2(), e as f64)?
            }
            Node::ExactDiv { numerator, divisor } => {
                numerator.upper_bits()?.saturating_sub(divisor.bits() - 1)
            }
        };
        (bits <= LIMIT).then_some(bits)
    }

    /// Upper bound on the number of decimal digits.
    pub fn upper_digits(&self) -> Option<u64> {
        self.upper_bits().map(|b| (b as f64 * std::f64::consts::LOG10_2).ceil() as u64 + 1)
    }

    /// A certified lower bound on the value, saturating at `2^LOWER_BOUND_CAP_BITS`.
    pub fn lower_bound(&self) -> BigInt {
        let cap = BigInt::one() << LOWER_BOUND_CAP_BITS;
        let lb = match self.node() {
            Node::Literal(n) => BigInt::from(n.clone()),
            Node::Sum(terms) => {
                let mut acc = BigInt::zero();
                for (c, t) in terms {
                    if c.is_positive() {
                        acc += c * t.lower_bound().max(BigInt::zero());
                    } else {
                        match t.upper_value() {
                            Some(ub) => acc += c * BigInt::from(ub),
                            None => return BigInt::zero(),
                        }
                    }
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = BigInt::one();
                for f in fs {
                    acc *= f.lower_bound().max(BigInt::zero());
                    if acc > cap {
                        acc = cap.clone();
                    }
                }
                acc
            }
            Node::PowBase { base, exponent } => lower_pow(base, &exponent.lower_bound()),
            Node::Repunit { shift, base, count } => {
                let b = BigUint::from(*base);
                let ones: BigInt = lower_pow(&b, &count.lower_bound()) - 1;
                let ones = ones.max(BigInt::zero()) / (*base - 1);
                ones * lower_pow(&b, &shift.lower_bound())
            }
            Node::ExactDiv { numerator, divisor } => {
                numerator.lower_bound().max(BigInt::zero()) / BigInt::from(divisor.clone())
            }
        };
        lb.min(cap)
    }

    /// Exact value when the upper bound is within `LOWER_BOUND_CAP_BITS`, else `2^bits - 1`.
    fn upper_value(&self) -> Option<BigUint> {
        let bits = self.upper_bits()?;
        if bits > LOWER_BOUND_CAP_BITS {
            return None;
        }
        Some(self.eval_exact_bits(bits).unwrap_or_else(|_| (BigUint::one() << bits) - 1u32))
    }

    /// Exact value, refusing anything whose certified size exceeds `digit_cap` decimal digits.
    pub fn eval_exact(&self, digit_cap: u64) -> Result<BigUint> {
        match self.upper_digits() {
            Some(d) if d <= digit_cap.saturating_add(1) => {}
            _ => return Err(Error::ExceedsCap { cap: digit_cap }),
        }
        let bits = self.upper_bits().unwrap_or(u64::MAX);
        self.eval_exact_bits(bits).map_err(|e| match e {
            Error::ExceedsCap { .. } => Error::ExceedsCap { cap: digit_cap },
            other => other,
        })
    }

    fn eval_exact_bits(&self, max_bits: u64) -> Result<BigUint> {
        let v = self.eval_signed(max_bits)?;
        v.to_biguint()
            .ok_or_else(|| Error::Verification(format!("negative value in {self}")))
    }

    fn eval_signed(&self, max_bits: u64) -> Result<BigInt> {
        let too_big = || Error::ExceedsCap { cap: (max_bits as f64 * std::f64::consts::LOG10_2) as u64 };
        let exp_value = |t: &TowerInt| -> Result<u32> {
            let v = t.eval_signed(64)?;
            v.to_u32().ok_or_else(too_big)
        };
        let v = match self.node() {
            Node::Literal(n) => BigInt::from(n.clone()),
            Node::Sum(terms) => {
                let mut acc = BigInt::zero();
                for (c, t) in terms {
                    acc += c * t.eval_signed(max_bits)?;
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = BigInt::one();
                for f in fs {
                    acc *= f.eval_signed(max_bits)?;
                }
                acc
            }
            Node::PowBase { base, exponent } => {
                let e = exp_value(exponent)?;
                if (base.bits().saturating_sub(1)).saturating_mul(e as u64) > max_bits {
                    return Err(too_big());
                }
                BigInt::from(base.pow(e))
            }
            Node::Repunit { shift, base, count } => {
                let (s, c) = (exp_value(shift)?, exp_value(count)?);
                let b = BigUint::from(*base);
                if (s as u64 + c as u64) as f64 * (*base as f64).log2() > max_bits as f64 + 2.0 {
                    return Err(too_big());
                }
                BigInt::from((b.pow(c) - 1u32) / (*base - 1) * b.pow(s))
            }
            Node::ExactDiv { numerator, divisor } => {
                let n = numerator.eval_signed(max_bits.saturating_add(divisor.bits()))?;
                let d = BigInt::from(divisor.clone());
                let (q, r) = n.div_rem(&d);
                if !r.is_zero() {
                    return Err(Error::DivisibilityViolated(format!("{divisor} does not divide {numerator}")));
                }
                q
            }
        };
        if v.sign() == Sign::Minus {
            return Err(Error::Verification(format!("negative intermediate value in {self}")));
        }
        Ok(v)
    }

    /// Checks that every sum is certified nonnegative by its lower bound.
    pub fn validate_nonnegative(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.id()) {
                continue;
            }
            if let Node::Sum(terms) = t.node() {
                if terms.iter().any(|(c, _)| c.is_negative()) && t.lower_bound().is_negative() {
                    return Err(Error::Verification(format!("cannot certify {t} >= 0")));
                }
            }
            stack.extend(t.children());
        }
        Ok(())
    }
}

impl From<u64> for TowerInt {
    fn from(n: u64) -> Self {
        TowerInt::literal(n)
    }
}

impl From<BigUint> for TowerInt {
    fn from(n: BigUint) -> Self {
        TowerInt::literal(n)
    }
}

fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

fn base_log2(base: &BigUint) -> f64 {
    match base.to_f64() {
        Some(f) if f.is_finite() => f.log2(),
        _ => base.bits() as f64,
    }
}

fn pow_bits(log2_base: f64, exponent: f64) -> Option<u64> {
    // relative slack covers f64 rounding for exponents up to 2^64
    let bits = exponent * log2_base * (1.0 + 1e-9) + 2.0;
    (bits.is_finite() && bits < (1u64 << 62) as f64).then_some(bits as u64)
}

fn lower_pow(base: &BigUint, exponent_lb: &BigInt) -> BigInt {
    if exponent_lb.sign() != Sign::Plus {
        return BigInt::one();
    }
    if base <= &BigUint::one() {
        return BigInt::from(base.clone());
    }
    let floor_log2 = base.bits() - 1;
    let needed = LOWER_BOUND_CAP_BITS.div_ceil(floor_log2.max(1));
    match exponent_lb.to_u64() {
        Some(e) if e < needed => BigInt::from(base.pow(e as u32)),
        _ => BigInt::one() << LOWER_BOUND_CAP_BITS,
    }
}

impl fmt::Display for TowerInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Literal(n) => {
                let digits = n.bits() as f64 * std::f64::consts::LOG10_2;
                if digits > 60.0 {
                    write!(f, "<{}-bit literal>", n.bits())
                } else {
                    write!(f, "{n}")
                }
            }
            Node::Sum(terms) => {
                f.write_str("(")?;
                for (i, (c, t)) in terms.iter().enumerate() {
                    let neg = c.is_negative();
                    if i > 0 {
                        f.write_str(if neg { " - " } else { " + " })?;
                    } else if neg {
                        f.write_str("-")?;
                    }
                    let mag = c.abs();
                    match (mag.is_one(), t.as_literal()) {
                        (_, Some(l)) if l.is_one() => write!(f, "{mag}")?,
                        (true, _) => write!(f, "{t}")?,
                        (false, _) => write!(f, "{mag}*{t}")?,
                    }
                }
                f.write_str(")")
            }
            Node::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
            Node::PowBase { base, exponent } => write!(f, "{base}^{exponent}"),
            Node::Repunit { shift, base, count } => write!(f, "R[{shift},{base}]({count})"),
            Node::ExactDiv { numerator, divisor } => write!(f, "{numerator}/{divisor}"),
        }
    }
}

/// JSON shape of a [`TowerInt`]. Integers are decimal strings.
///
/// ```text
/// {"lit": "42"}
/// {"sum": [{"coef": "-1", "expr": ...}, ...]}
/// {"product": [...]}
/// {"pow": {"base": "10", "exp": ...}}
/// {"repunit": {"shift": ..., "base": 10, "count": ...}}
/// {"div": {"num": ..., "by": "81"}}
/// ```
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Expr {
    Lit(String),
    Sum(Vec<Term>),
    Product(Vec<Expr>),
    Pow { base: String, exp: Box<Expr> },
    Repunit { shift: Box<Expr>, base: u32, count: Box<Expr> },
    Div { num: Box<Expr>, by: String },
}

#[derive(Serialize, Deserialize)]
struct Term {
    coef: String,
    expr: Expr,
}

impl From<&TowerInt> for Expr {
    fn from(t: &TowerInt) -> Expr {
        match t.node() {
            Node::Literal(n) => Expr::Lit(n.to_string()),
            Node::Sum(terms) => Expr::Sum(
                terms.iter().map(|(c, x)| Term { coef: c.to_string(), expr: x.into() }).collect(),
            ),
            Node::Product(fs) => Expr::Product(fs.iter().map(Expr::from).collect()),
            Node::PowBase { base, exponent } => {
                Expr::Pow { base: base.to_string(), exp: Box::new(exponent.into()) }
            }
            Node::Repunit { shift, base, count } => Expr::Repunit {
                shift: Box::new(shift.into()),
                base: *base,
                count: Box::new(count.into()),
            },
            Node::ExactDiv { numerator, divisor } => {
                Expr::Div { num: Box::new(numerator.into()), by: divisor.to_string() }
            }
        }
    }
}

fn parse_uint(s: &str) -> std::result::Result<BigUint, String> {
    s.parse::<BigUint>().map_err(|e| format!("bad integer {s:?}: {e}"))
}

impl TryFrom<Expr> for TowerInt {
    type Error = String;
    fn try_from(e: Expr) -> std::result::Result<TowerInt, String> {
        Ok(match e {
            Expr::Lit(s) => TowerInt::literal(parse_uint(&s)?),
            Expr::Sum(terms) => TowerInt::sum_raw(
                terms
                    .into_iter()
                    .map(|t| {
                        let c = t.coef.parse::<BigInt>().map_err(|e| e.to_string())?;
                        Ok((c, TowerInt::try_from(t.expr)?))
                    })
                    .collect::<std::result::Result<_, String>>()?,
            ),
            Expr::Product(fs) => TowerInt::raw(Node::Product(
                fs.into_iter().map(TowerInt::try_from).collect::<std::result::Result<_, _>>()?,
            )),
            Expr::Pow { base, exp } => TowerInt::pow_raw(parse_uint(&base)?, TowerInt::try_from(*exp)?),
            Expr::Repunit { shift, base, count } => {
                if base < 2 {
                    return Err(format!("repunit base {base} < 2"));
                }
                TowerInt::repunit_raw(TowerInt::try_from(*shift)?, base, TowerInt::try_from(*count)?)
            }
            Expr::Div { num, by } => {
                let d = parse_uint(&by)?;
                if d.is_zero() {
                    return Err("division by zero".into());
                }
                TowerInt::exact_div_raw(TowerInt::try_from(*num)?, d)
            }
        })
    }
}

impl Serialize for TowerInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Expr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TowerInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = Expr::deserialize(d)?;
        TowerInt::try_from(e).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lit(n: u64) -> TowerInt {
        TowerInt::from(n)
    }

    #[test]
    fn lower_bounds() {
        assert_eq!(lit(7).lower_bound(), BigInt::from(7));
        let p = TowerInt::pow_raw(10u32, lit(3));
        assert!(p.lower_bound() >= BigInt::from(1000));
        // 837*10^13888888 - 112, divided twice: still enormous
        let top = TowerInt::sum(vec![
            (BigInt::from(837), TowerInt::pow(10u32, lit(13_888_888))),
            (BigInt::from(-112), TowerInt::one()),
        ]);
        let inner = TowerInt::exact_div(top, 8u32).unwrap().add_small(-202);
        let n14 = TowerInt::exact_div(inner, 81u32).unwrap();
        assert!(n14.lower_bound() >= BigInt::from(10_000_000_000u64));
        assert!(n14.validate_nonnegative().is_ok());
    }

    #[test]
    fn exact_evaluation_and_cap() {
        let r = TowerInt::repunit_raw(lit(0), 10, lit(3));
        assert_eq!(r.eval_exact(100).unwrap(), BigUint::from(111u32));
        let huge = TowerInt::pow(10u32, lit(30_000_000));
        assert_eq!(huge.eval_exact(DEFAULT_DIGIT_CAP), Err(Error::ExceedsCap { cap: DEFAULT_DIGIT_CAP }));
        let nested = TowerInt::pow_raw(10u32, TowerInt::pow_raw(10u32, lit(30)));
        assert!(nested.upper_bits().is_none());
        assert!(nested.eval_exact(DEFAULT_DIGIT_CAP).is_err());
    }

    #[test]
    fn folding() {
        assert_eq!(TowerInt::pow(2u32, lit(10)), lit(1024));
        assert_eq!(TowerInt::repunit(lit(1), 10, lit(3)), lit(1110));
        assert_eq!(lit(5).add_small(-2), lit(3));
        assert_eq!(TowerInt::exact_div(lit(81), 9u32).unwrap(), lit(9));
        assert!(matches!(TowerInt::exact_div(lit(80), 9u32), Err(Error::DivisibilityViolated(_))));
        // negative literal sums stay symbolic and fail validation
        let neg = lit(1).add_small(-5);
        assert!(!neg.is_literal());
        assert!(neg.validate_nonnegative().is_err());
    }

    #[test]
    fn json_shape() {
        let t = TowerInt::exact_div_raw(TowerInt::pow_raw(10u32, lit(3)).add_small(-1), 9u32);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"div":{"num":{"sum":[{"coef":"1","expr":{"pow":{"base":"10","exp":{"lit":"3"}}}},{"coef":"-1","expr":{"lit":"1"}}]},"by":"9"}}"#
        );
        let back: TowerInt = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<TowerInt>(r#"{"div":{"num":{"lit":"3"},"by":"0"}}"#).is_err());
    }

    #[test]
    fn display() {
        let t = TowerInt::exact_div_raw(TowerInt::pow_raw(10u32, lit(3)).add_small(-1), 9u32);
        assert_eq!(t.to_string(), "(10^3 - 1)/9");
    }

    pub(crate) fn arb_tower() -> impl Strategy<Value = TowerInt> {
        let leaf = (0u64..50).prop_map(lit);
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                proptest::collection::vec((1i64..5, inner.clone()), 1..3).prop_map(|ts| TowerInt::sum_raw(
                    ts.into_iter().map(|(c, t)| (BigInt::from(c), t)).collect()
                )),
                proptest::collection::vec(inner.clone(), 1..3).prop_map(|fs| TowerInt::raw(Node::Product(fs))),
                (2u32..12, 0u64..6).prop_map(|(b, e)| TowerInt::pow_raw(b, lit(e))),
                (0u64..4, 2u32..11, 0u64..5).prop_map(|(s, b, c)| TowerInt::repunit_raw(lit(s), b, lit(c))),
                inner.prop_map(|t| TowerInt::exact_div_raw(t.scale(6).add_small(0), 3u32)),
            ]
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(t in arb_tower()) {
            let json = serde_json::to_string(&t).unwrap();
            let back: TowerInt = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn bounds_bracket_exact_value(t in arb_tower()) {
            let v = t.eval_exact(10_000).unwrap();
            prop_assert!(t.lower_bound() <= BigInt::from(v.clone()));
            let bits = t.upper_bits().unwrap();
            prop_assert!(v.bits() <= bits);
        }
    }
}
