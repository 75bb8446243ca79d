use elated::towerint::{build_epsilon_tower, Checker};
use elated::Exponent;

fn pow_mod(mut b: u128, mut e: u64, p: u128) -> u128 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

#[test]
fn epsilon_thirteen_materialized() {
    let t = build_epsilon_tower(&Checker::new(20)).unwrap();
    let digits = t.epsilon13.to_digits(14_000_000).unwrap();
    assert_eq!(digits.len(), 13_888_891);
    assert_eq!(&digits[..4], &[8, 1, 5, 7]);

    let sum: u64 = digits.iter().map(|&d| u64::from(d * d)).sum();
    let direct = u64::from(digits[0]) * sum;
    let symbolic = t.epsilon13.elated_step_symbolic(Exponent::SQUARE).eval_exact(64).unwrap();
    assert_eq!(direct, 8999999888);
    assert_eq!(symbolic, direct.into());

    for p in [2_305_843_009_213_693_951u128, 1_000_000_007, 998_244_353] {
        let horner = digits.iter().fold(0, |acc, &d| (acc * 10 + u128::from(d)) % p);
        let closed = (8158 * pow_mod(10, 13_888_887, p) + p - 1) % p;
        assert_eq!(horner, closed, "mod {p}");
    }
}
