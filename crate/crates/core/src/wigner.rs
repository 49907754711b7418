//! Exact Wigner 3-jm symbols, Clebsch–Gordan coefficients, the
//! symmetrized/antisymmetrized sum rules over `(l) ⊗ (l)`, and Gaunt `c^k`
//! coefficients. Condon–Shortley phases throughout.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::{int, ratio, BigRational, QuadraticSum, SqrtRational};

/// An integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Exchange parity of a two-particle state in `(l) ⊗ (l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    /// π = +1, `L = 0, 2, …, 2l`.
    Even,
    /// π = −1, `L = 1, 3, …, 2l − 1`.
    Odd,
}

impl Parity {
    pub fn sign(self) -> i64 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    /// The coupled `L` values of this exchange symmetry.
    pub fn l_values(self, ell: u32) -> impl Iterator<Item = u32> {
        let start = match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
        (start..=2 * ell).step_by(2)
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "+" | "+1" | "1" => Ok(Parity::Even),
            "odd" | "-" | "-1" => Ok(Parity::Odd),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Factorials up to this argument are memoized; larger ones are recomputed.
pub const FACTORIAL_CACHE_CAP: usize = 512;

fn factorial(n: usize) -> BigUint {
    static TABLE: OnceLock<RwLock<Vec<BigUint>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| RwLock::new(vec![BigUint::one()]));
    if n > FACTORIAL_CACHE_CAP {
        return (1..=n).fold(BigUint::one(), |acc, i| acc * i);
    }
    if let Some(f) = table.read().expect("factorial table poisoned").get(n) {
        return f.clone();
    }
    let mut t = table.write().expect("factorial table poisoned");
    while t.len() <= n {
        let next = t.last().expect("nonempty") * t.len();
        t.push(next);
    }
    t[n].clone()
}

fn check_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.0 < 0 || (j.0 - m.0) % 2 != 0 {
        return Err(Error::MalformedAngularMomentum {
            twice_j: j.0,
            twice_m: m.0,
        });
    }
    Ok(())
}

fn phase(exponent: i64) -> i8 {
    if exponent.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

type ThreeJKey = [i32; 6];

fn three_j_cache() -> &'static Mutex<HashMap<ThreeJKey, SqrtRational>> {
    static CACHE: OnceLock<Mutex<HashMap<ThreeJKey, SqrtRational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The Wigner 3-jm symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Zero outside the triangle rule, when `m1 + m2 + m3 ≠ 0`, or when some
/// `|m_i| > j_i`. Malformed pairs (`j − m` not an integer, or `j < 0`) are
/// errors. Results are memoized in a process-wide cache.
pub fn three_j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<SqrtRational> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    check_pair(j3, m3)?;
    let key = [j1.0, j2.0, j3.0, m1.0, m2.0, m3.0];
    if let Some(v) = three_j_cache().lock().expect("3j cache poisoned").get(&key) {
        return Ok(v.clone());
    }
    let v = racah_three_j(key);
    three_j_cache()
        .lock()
        .expect("3j cache poisoned")
        .insert(key, v.clone());
    Ok(v)
}

/// Convenience wrapper for integer arguments.
pub fn three_j_int(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> Result<SqrtRational> {
    three_j(
        HalfInt::int(j1),
        HalfInt::int(j2),
        HalfInt::int(j3),
        HalfInt::int(m1),
        HalfInt::int(m2),
        HalfInt::int(m3),
    )
}

// Racah single-sum formula on validated, doubled arguments.
fn racah_three_j([tj1, tj2, tj3, tm1, tm2, tm3]: ThreeJKey) -> SqrtRational {
    if tm1 + tm2 + tm3 != 0 || tm1.abs() > tj1 || tm2.abs() > tj2 || tm3.abs() > tj3 {
        return SqrtRational::zero();
    }
    let sum = tj1 + tj2 + tj3;
    if sum % 2 != 0 {
        return SqrtRational::zero();
    }
    let (a, b, c) = (tj1 + tj2 - tj3, tj1 - tj2 + tj3, -tj1 + tj2 + tj3);
    if a < 0 || b < 0 || c < 0 {
        return SqrtRational::zero();
    }
    let half = |x: i32| -> i64 { i64::from(x / 2) };
    let (a, b, c) = (half(a), half(b), half(c));
    let j_sum = half(sum);
    let f = |n: i64| -> BigInt { BigInt::from(factorial(n as usize)) };

    // j ± m are integers here because each pair was validated.
    let jm = [
        (tj1 + tm1) / 2,
        (tj1 - tm1) / 2,
        (tj2 + tm2) / 2,
        (tj2 - tm2) / 2,
        (tj3 + tm3) / 2,
        (tj3 - tm3) / 2,
    ];
    let mut radicand_num = f(a) * f(b) * f(c);
    for x in jm {
        radicand_num *= f(i64::from(x));
    }
    let radicand = BigRational::new(radicand_num, f(j_sum + 1));

    // Summation bounds, all in doubled units then halved.
    let d1 = (tj3 - tj2 + tm1) / 2; // j3 − j2 + m1
    let d2 = (tj3 - tj1 - tm2) / 2; // j3 − j1 − m2
    let u1 = a; // j1 + j2 − j3
    let u2 = i64::from((tj1 - tm1) / 2);
    let u2b = i64::from((tj2 + tm2) / 2);
    let t_min = 0i64.max(-i64::from(d1)).max(-i64::from(d2));
    let t_max = u1.min(u2).min(u2b);
    let mut series = BigRational::zero();
    for t in t_min..=t_max {
        let den =
            f(t) * f(i64::from(d1) + t) * f(i64::from(d2) + t) * f(u1 - t) * f(u2 - t) * f(u2b - t);
        let term = BigRational::new(BigInt::one(), den);
        if t % 2 == 0 {
            series += term;
        } else {
            series -= term;
        }
    }
    if series.is_zero() {
        return SqrtRational::zero();
    }
    let series_sign: i8 = if series > BigRational::zero() { 1 } else { -1 };
    let overall = phase(i64::from((tj1 - tj2 - tm3) / 2)) * series_sign;
    SqrtRational::new(overall, radicand * &series * &series)
}

/// Clebsch–Gordan coefficient `(j1 j2 m1 m2 | J M)`.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<SqrtRational> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    check_pair(j, m)?;
    if m1.0 + m2.0 != m.0 {
        return Ok(SqrtRational::zero());
    }
    let tj = three_j(j1, j2, j, m1, m2, -m)?;
    if tj.is_zero() {
        return Ok(tj);
    }
    let exponent = i64::from((j1.0 - j2.0 + m.0) / 2);
    let norm = SqrtRational::new(phase(exponent), int(i64::from(j.0 + 1)));
    Ok(&norm * &tj)
}

fn check_orbital(ell: u32, ms: &[i32]) -> Result<()> {
    let l = ell as i32;
    for &m in ms {
        if m.abs() > l {
            return Err(Error::MalformedAngularMomentum {
                twice_j: 2 * l,
                twice_m: 2 * m,
            });
        }
    }
    Ok(())
}

/// `Σ_{L_π M} (2L_π + 1) (L_π l l; −M m m') (L_π l l; −M μ μ')`, with `L_π`
/// restricted to the given exchange parity.
pub fn sum_rule_lhs(
    ell: u32,
    parity: Parity,
    m: i32,
    mp: i32,
    mu: i32,
    mup: i32,
) -> Result<BigRational> {
    check_orbital(ell, &[m, mp, mu, mup])?;
    let l = ell as i32;
    let mut acc = QuadraticSum::zero();
    // Only M = m + m' = μ + μ' contributes.
    if m + mp == mu + mup {
        let big_m = m + mp;
        for big_l in parity.l_values(ell) {
            let big_l = big_l as i32;
            let a = three_j_int(big_l, l, l, -big_m, m, mp)?;
            let b = three_j_int(big_l, l, l, -big_m, mu, mup)?;
            acc.accumulate(&(&a * &b), &int(i64::from(2 * big_l + 1)));
        }
    }
    acc.as_rational()
        .ok_or_else(|| Error::IdentityViolation(format!("sum rule value {acc} is irrational")))
}

/// `½ [δ(m, μ) δ(m', μ') + π δ(m', μ) δ(m, μ')]`.
pub fn sum_rule_rhs(parity: Parity, m: i32, mp: i32, mu: i32, mup: i32) -> BigRational {
    let direct = i64::from(m == mu && mp == mup);
    let swapped = i64::from(mp == mu && m == mup);
    ratio(direct + parity.sign() * swapped, 2)
}

/// The same sum rebuilt from Clebsch–Gordan coefficients,
/// `Σ_{L_π M} (l l μ μ' | L_π M)(l l m m' | L_π M)`.
pub fn sum_rule_clebsch_gordan(
    ell: u32,
    parity: Parity,
    m: i32,
    mp: i32,
    mu: i32,
    mup: i32,
) -> Result<BigRational> {
    check_orbital(ell, &[m, mp, mu, mup])?;
    let l = HalfInt::int(ell as i32);
    let mut acc = QuadraticSum::zero();
    for big_l in parity.l_values(ell) {
        let big_l = big_l as i32;
        for big_m in -big_l..=big_l {
            let (lj, lm) = (HalfInt::int(big_l), HalfInt::int(big_m));
            let a = clebsch_gordan(l, HalfInt::int(mu), l, HalfInt::int(mup), lj, lm)?;
            let b = clebsch_gordan(l, HalfInt::int(m), l, HalfInt::int(mp), lj, lm)?;
            acc.accumulate(&(&a * &b), &BigRational::one());
        }
    }
    acc.as_rational()
        .ok_or_else(|| Error::IdentityViolation(format!("Clebsch-Gordan sum {acc} is irrational")))
}

/// Gaunt coefficient `c^k(l1 m1, l2 m2)`.
pub fn gaunt_ck(ell1: u32, m1: i32, ell2: u32, m2: i32, k: u32) -> Result<SqrtRational> {
    check_orbital(ell1, &[m1])?;
    check_orbital(ell2, &[m2])?;
    let (l1, l2, k) = (ell1 as i32, ell2 as i32, k as i32);
    let reduced = three_j_int(l1, k, l2, 0, 0, 0)?;
    if reduced.is_zero() {
        return Ok(reduced);
    }
    let projected = three_j_int(l1, k, l2, -m1, m1 - m2, m2)?;
    let norm = SqrtRational::new(
        phase(i64::from(m1)),
        int(i64::from((2 * l1 + 1) * (2 * l2 + 1))),
    );
    Ok(&(&norm * &reduced) * &projected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sr(sign: i8, n: i64, d: i64) -> SqrtRational {
        SqrtRational::new(sign, ratio(n, d))
    }

    #[test]
    fn three_j_examples() {
        assert_eq!(three_j_int(1, 1, 0, 0, 0, 0).unwrap(), sr(-1, 1, 3));
        assert_eq!(three_j_int(1, 1, 2, 0, 0, 0).unwrap(), sr(1, 2, 15));
        assert!(three_j_int(0, 1, 1, -1, 0, 1).unwrap().is_zero());
        assert!(three_j_int(1, 1, 1, 0, 0, 0).unwrap().is_zero());
    }

    #[test]
    fn three_j_half_integer() {
        let h = HalfInt::from_twice;
        // (1/2 1/2 1; 1/2 -1/2 0) = 1/√6
        assert_eq!(
            three_j(h(1), h(1), h(2), h(1), h(-1), h(0)).unwrap(),
            sr(1, 1, 6)
        );
        // (1/2 1/2 0; 1/2 -1/2 0) = 1/√2
        assert_eq!(
            three_j(h(1), h(1), h(0), h(1), h(-1), h(0)).unwrap(),
            sr(1, 1, 2)
        );
    }

    #[test]
    fn malformed_pairs_are_errors() {
        let h = HalfInt::from_twice;
        assert!(three_j(h(2), h(2), h(2), h(1), h(-1), h(0)).is_err());
        assert!(three_j(h(-2), h(2), h(2), h(0), h(0), h(0)).is_err());
        assert!(clebsch_gordan(h(1), h(0), h(1), h(1), h(2), h(1)).is_err());
    }

    #[test]
    fn clebsch_gordan_examples() {
        let i = HalfInt::int;
        assert_eq!(
            clebsch_gordan(i(1), i(0), i(1), i(1), i(2), i(1)).unwrap(),
            sr(1, 1, 2)
        );
        assert!(clebsch_gordan(i(1), i(0), i(1), i(1), i(2), i(0))
            .unwrap()
            .is_zero());
        for tj in 0..6 {
            for tm in (-tj..=tj).step_by(2) {
                let (j, m) = (HalfInt::from_twice(tj), HalfInt::from_twice(tm));
                assert_eq!(
                    clebsch_gordan(j, m, HalfInt::ZERO, HalfInt::ZERO, j, m).unwrap(),
                    SqrtRational::one()
                );
            }
        }
    }

    #[test]
    fn sum_rule_examples() {
        assert_eq!(
            sum_rule_lhs(1, Parity::Even, 0, 1, 0, 1).unwrap(),
            ratio(1, 2)
        );
        assert_eq!(sum_rule_lhs(1, Parity::Odd, 0, 0, 0, 0).unwrap(), int(0));
        assert_eq!(
            sum_rule_lhs(2, Parity::Even, 1, 2, 2, 1).unwrap(),
            ratio(1, 2)
        );
        assert_eq!(sum_rule_lhs(1, Parity::Even, 0, 0, 0, 0).unwrap(), int(1));
        assert_eq!(sum_rule_rhs(Parity::Odd, 0, 1, 1, 0), ratio(-1, 2));
        assert!(sum_rule_lhs(1, Parity::Even, 2, 0, 0, 0).is_err());
    }

    #[test]
    fn gaunt_examples() {
        for l in 0..5u32 {
            for m in -(l as i32)..=(l as i32) {
                assert_eq!(gaunt_ck(l, m, l, m, 0).unwrap(), SqrtRational::one());
            }
        }
        assert_eq!(gaunt_ck(1, 0, 1, 0, 2).unwrap(), sr(1, 4, 25));
        assert_eq!(gaunt_ck(1, 1, 1, -1, 2).unwrap(), sr(-1, 6, 25));
        assert!(gaunt_ck(1, 0, 1, 0, 1).unwrap().is_zero());
    }

    #[test]
    fn orthogonality_over_coupled_l() {
        for l in 0..=4i32 {
            for m in -l..=l {
                for mp in -l..=l {
                    let mut acc = BigRational::zero();
                    for big_l in 0..=2 * l {
                        for big_m in -big_l..=big_l {
                            let v = three_j_int(l, l, big_l, m, mp, big_m).unwrap();
                            acc += v.square() * int(i64::from(2 * big_l + 1));
                        }
                    }
                    assert_eq!(acc, int(1), "l={l} m={m} m'={mp}");
                }
            }
        }
    }
}
