//! Exact arithmetic substrate.
//!
//! Rationals come from `num-rational`; on top of them this module provides
//! signed square roots of rationals ([`SqrtRational`]) and finite sums of
//! square roots over square-free radicands ([`QuadraticSum`]). Every
//! 3-jm symbol is a `SqrtRational`, and every sum of products of two of
//! them is a `QuadraticSum`.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use num_rational::BigRational;

/// The four field operations accepted by [`rational_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact rational arithmetic; division by zero is an error rather than a panic.
pub fn rational_arith(a: &BigRational, b: &BigRational, op: ArithOp) -> Result<BigRational> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => checked_div(a, b)?,
    })
}

pub fn checked_div(a: &BigRational, b: &BigRational) -> Result<BigRational> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(a / b)
}

/// Shorthand for the rational `n / d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p"`, `"-p"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(num, den))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale down huge operands so the conversion does not overflow to inf/inf.
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

const TRIAL_PRIME_LIMIT: u32 = 1 << 16;
const SMALL_PRIME_PHASE: u32 = 256;

fn primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_PRIME_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

fn exact_sqrt(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Splits a positive integer as `n = root² · free` with `free` square-free.
///
/// Primes below 2^16 are removed by trial division. A leftover cofactor is
/// accepted when it is a perfect square or has at most two prime factors;
/// cofactors built from three or more primes above 2^16 are assumed
/// square-free. Radicands arising from factorial ratios never reach that case.
pub fn square_free_split(n: &BigUint) -> (BigUint, BigUint) {
    assert!(!n.is_zero(), "square_free_split of zero");
    let mut rem = n.clone();
    let mut root = BigUint::one();
    let mut free = BigUint::one();
    for &p in primes() {
        if rem.is_one() {
            break;
        }
        if p > SMALL_PRIME_PHASE {
            if let Some(r) = exact_sqrt(&rem) {
                return (root * r, free);
            }
            let p3 = BigUint::from(p).pow(3);
            if p3 > rem {
                break;
            }
        }
        let bp = BigUint::from(p);
        let mut e = 0u32;
        loop {
            let (q, r) = rem.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            rem = q;
            e += 1;
        }
        if e > 0 {
            root *= bp.pow(e / 2);
            if e % 2 == 1 {
                free *= &bp;
            }
        }
    }
    if !rem.is_one() {
        match exact_sqrt(&rem) {
            Some(r) => root *= r,
            None => free *= rem,
        }
    }
    (root, free)
}

/// An exact value `sign · √radicand` with `radicand ≥ 0` rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SqrtRational {
    sign: i8,
    radicand: BigRational,
}

impl SqrtRational {
    pub fn zero() -> Self {
        SqrtRational {
            sign: 0,
            radicand: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        SqrtRational {
            sign: 1,
            radicand: BigRational::one(),
        }
    }

    /// `sign · √radicand`; the sign is normalized to 0 when the radicand vanishes.
    pub fn new(sign: i8, radicand: BigRational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        if radicand.is_zero() || sign == 0 {
            return Self::zero();
        }
        SqrtRational {
            sign: sign.signum(),
            radicand,
        }
    }

    /// Embeds a rational `r` as `sign(r) · √(r²)`.
    pub fn from_rational(r: &BigRational) -> Self {
        let sign = if r.is_zero() {
            0
        } else if r.is_positive() {
            1
        } else {
            -1
        };
        Self::new(sign, r * r)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The square of the value, always nonnegative.
    pub fn square(&self) -> BigRational {
        self.radicand.clone()
    }

    /// `sign · radicand`.
    pub fn signed_square(&self) -> BigRational {
        match self.sign {
            0 => BigRational::zero(),
            1 => self.radicand.clone(),
            _ => -self.radicand.clone(),
        }
    }

    /// The value as a rational, when the radicand is a perfect square.
    pub fn to_rational(&self) -> Option<BigRational> {
        self.to_quadratic_sum().as_rational()
    }

    pub fn to_quadratic_sum(&self) -> QuadraticSum {
        QuadraticSum::from(self)
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * rational_to_f64(&self.radicand).sqrt()
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        self * &SqrtRational::from_rational(r)
    }
}

impl<'a> Mul<&'a SqrtRational> for &'a SqrtRational {
    type Output = SqrtRational;
    fn mul(self, rhs: &SqrtRational) -> SqrtRational {
        SqrtRational::new(self.sign * rhs.sign, &self.radicand * &rhs.radicand)
    }
}

impl Mul for SqrtRational {
    type Output = SqrtRational;
    fn mul(self, rhs: SqrtRational) -> SqrtRational {
        &self * &rhs
    }
}

impl Neg for SqrtRational {
    type Output = SqrtRational;
    fn neg(self) -> SqrtRational {
        SqrtRational {
            sign: -self.sign,
            radicand: self.radicand,
        }
    }
}

impl fmt::Display for SqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_quadratic_sum())
    }
}

/// A finite sum `Σ c_d √d` with rational `c_d` over distinct square-free `d`.
///
/// The term map never stores zero coefficients, so the zero value is the
/// empty map and structural equality is value equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QuadraticSum {
    terms: BTreeMap<BigUint, BigRational>,
}

impl QuadraticSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = Self::zero();
        s.add_term(BigUint::one(), r);
        s
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Returns the value when it has no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, d: BigUint, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(d) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self + weight · term`, splitting the radicand into a rational factor
    /// times the square root of its square-free part.
    pub fn accumulate(&mut self, term: &SqrtRational, weight: &BigRational) {
        if term.is_zero() || weight.is_zero() {
            return;
        }
        let q = QuadraticSum::from(term);
        for (d, c) in q.terms {
            self.add_term(d, c * weight);
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        QuadraticSum {
            terms: self.terms.iter().map(|(d, c)| (d.clone(), c * r)).collect(),
        }
    }

    pub fn mul_sqrt(&self, s: &SqrtRational) -> Self {
        self * &QuadraticSum::from(s)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(d, c)| rational_to_f64(c) * d.to_f64().unwrap_or(f64::INFINITY).sqrt())
            .sum()
    }

    /// Sign of the value. Exact for rational values; for genuinely irrational
    /// sums it falls back to floating-point evaluation.
    pub fn signum(&self) -> Ordering {
        if let Some(r) = self.as_rational() {
            return r.cmp(&BigRational::zero());
        }
        self.to_f64().partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }
}

impl From<&SqrtRational> for QuadraticSum {
    fn from(s: &SqrtRational) -> Self {
        if s.is_zero() {
            return QuadraticSum::zero();
        }
        // √(p/q) = √(p·q) / q, then √(p·q) = root·√free.
        let p = s.radicand.numer().magnitude();
        let q = s.radicand.denom().magnitude();
        let (root, free) = square_free_split(&(p * q));
        let coeff = BigRational::new(
            BigInt::from_biguint(Sign::Plus, root) * i64::from(s.sign),
            BigInt::from_biguint(Sign::Plus, q.clone()),
        );
        let mut out = QuadraticSum::zero();
        out.add_term(free, coeff);
        out
    }
}

impl From<BigRational> for QuadraticSum {
    fn from(r: BigRational) -> Self {
        QuadraticSum::from_rational(r)
    }
}

impl<'a> Add<&'a QuadraticSum> for &'a QuadraticSum {
    type Output = QuadraticSum;
    fn add(self, rhs: &QuadraticSum) -> QuadraticSum {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a QuadraticSum> for &'a QuadraticSum {
    type Output = QuadraticSum;
    fn sub(self, rhs: &QuadraticSum) -> QuadraticSum {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&QuadraticSum> for QuadraticSum {
    fn add_assign(&mut self, rhs: &QuadraticSum) {
        for (d, c) in &rhs.terms {
            self.add_term(d.clone(), c.clone());
        }
    }
}

impl SubAssign<&QuadraticSum> for QuadraticSum {
    fn sub_assign(&mut self, rhs: &QuadraticSum) {
        for (d, c) in &rhs.terms {
            self.add_term(d.clone(), -c.clone());
        }
    }
}

impl Neg for QuadraticSum {
    type Output = QuadraticSum;
    fn neg(self) -> QuadraticSum {
        QuadraticSum {
            terms: self.terms.into_iter().map(|(d, c)| (d, -c)).collect(),
        }
    }
}

impl<'a> Mul<&'a QuadraticSum> for &'a QuadraticSum {
    type Output = QuadraticSum;
    fn mul(self, rhs: &QuadraticSum) -> QuadraticSum {
        let mut out = QuadraticSum::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                // √a·√b = g·√((a/g)(b/g)) with g = gcd(a, b); the product of
                // coprime square-free factors stays square-free.
                let g = a.gcd(b);
                let free = (a / &g) * (b / &g);
                let c = ca * cb * BigRational::from_integer(BigInt::from_biguint(Sign::Plus, g));
                out.add_term(free, c);
            }
        }
        out
    }
}

impl fmt::Display for QuadraticSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (d, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            if d.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "sqrt({d})")?;
            } else {
                write!(f, "{mag}*sqrt({d})")?;
            }
        }
        Ok(())
    }
}

impl FromStr for QuadraticSum {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form, e.g. `"1/2 - 3/5*sqrt(6)"`.
    /// Radicands need not be square-free on input.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        // Split into signed terms at top-level '+'/'-' (never inside sqrt(...)).
        let mut terms = Vec::new();
        let mut depth = 0i32;
        let mut start = 0usize;
        for (i, ch) in compact.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && i > start => {
                    terms.push(&compact[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(&compact[start..]);

        let mut out = QuadraticSum::zero();
        for t in terms {
            let (negative, body) = match t.as_bytes()[0] {
                b'-' => (true, &t[1..]),
                b'+' => (false, &t[1..]),
                _ => (false, t),
            };
            let (coeff, radicand) = match body.find("sqrt(") {
                Some(pos) => {
                    let inner = body[pos + 5..].strip_suffix(')').ok_or_else(bad)?;
                    let radicand = parse_rational(inner)?;
                    let coeff = match &body[..pos] {
                        "" => BigRational::one(),
                        c => parse_rational(c.strip_suffix('*').ok_or_else(bad)?)?,
                    };
                    (coeff, radicand)
                }
                None => (parse_rational(body)?, BigRational::one()),
            };
            if radicand.is_negative() {
                return Err(bad());
            }
            let coeff = if negative { -coeff } else { coeff };
            out.accumulate(&SqrtRational::new(1, radicand), &coeff);
        }
        Ok(out)
    }
}
