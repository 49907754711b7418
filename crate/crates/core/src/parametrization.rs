//! Passage between Slater parameters `F^(k)(l, l')` and the angular-overlap
//! parameters `E^λ(l, l')`, and the `S`/`D` combinations built from the latter.
//!
//! Both transforms are square: for a shell pair the allowed ranks
//! `k = |l − l'|, |l − l'| + 2, …, l + l'` and the overlap indices
//! `λ = 0..=min(l, l')` have the same count. The `E → F` direction sums over
//! both signs of λ, expanding `E^{−λ}` as `E^{λ}`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::form::{lambda_label, Basis, EnergyForm};
use crate::numerics::{int, ratio, BigRational, QuadraticSum, SqrtRational};
use crate::wigner::three_j_int;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShellPair {
    pub ell: u32,
    pub ell_prime: u32,
}

impl ShellPair {
    pub fn new(ell: u32, ell_prime: u32) -> Self {
        ShellPair { ell, ell_prime }
    }

    pub fn diagonal(ell: u32) -> Self {
        ShellPair {
            ell,
            ell_prime: ell,
        }
    }

    pub fn allowed_k(&self) -> Vec<u32> {
        let lo = self.ell.abs_diff(self.ell_prime);
        (lo..=self.ell + self.ell_prime).step_by(2).collect()
    }

    pub fn lambdas(&self) -> Vec<u32> {
        (0..=self.ell.min(self.ell_prime)).collect()
    }

    fn check_k(&self, k: u32) -> Result<()> {
        if self.allowed_k().contains(&k) {
            Ok(())
        } else {
            Err(Error::RankNotAllowed {
                ell: self.ell,
                ell_prime: self.ell_prime,
                k,
            })
        }
    }

    fn degeneracy_product(&self) -> i64 {
        i64::from((2 * self.ell + 1) * (2 * self.ell_prime + 1))
    }
}

fn check_keys(found: &BTreeMap<u32, QuadraticSum>, expected: &[u32], what: &str) -> Result<()> {
    let keys: Vec<u32> = found.keys().copied().collect();
    if keys == expected {
        Ok(())
    } else {
        Err(Error::LabelMismatch(format!(
            "{what} keys {keys:?}, expected {expected:?}"
        )))
    }
}

/// Slater parameters `F^(k)(l, l')`, one per allowed rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlaterParams {
    pair: ShellPair,
    values: BTreeMap<u32, QuadraticSum>,
}

impl SlaterParams {
    pub fn new(pair: ShellPair, values: BTreeMap<u32, QuadraticSum>) -> Result<Self> {
        check_keys(&values, &pair.allowed_k(), "F^(k)")?;
        Ok(SlaterParams { pair, values })
    }

    /// Values listed in increasing `k`.
    pub fn from_list(pair: ShellPair, values: Vec<QuadraticSum>) -> Result<Self> {
        Self::new(pair, pair.allowed_k().into_iter().zip(values).collect())
    }

    pub fn pair(&self) -> ShellPair {
        self.pair
    }

    pub fn values(&self) -> &BTreeMap<u32, QuadraticSum> {
        &self.values
    }

    pub fn get(&self, k: u32) -> Option<&QuadraticSum> {
        self.values.get(&k)
    }

    pub fn label(k: u32) -> String {
        format!("F{k}")
    }
}

/// Angular-overlap parameters `E^λ(l, l')` for `λ = 0..=min(l, l')`; `E^σ ≡ E^0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AomParams {
    pair: ShellPair,
    values: BTreeMap<u32, QuadraticSum>,
}

impl AomParams {
    pub fn new(pair: ShellPair, values: BTreeMap<u32, QuadraticSum>) -> Result<Self> {
        check_keys(&values, &pair.lambdas(), "E^lambda")?;
        Ok(AomParams { pair, values })
    }

    /// Values listed in increasing λ (σ, π, δ, …).
    pub fn from_list(pair: ShellPair, values: Vec<QuadraticSum>) -> Result<Self> {
        Self::new(pair, pair.lambdas().into_iter().zip(values).collect())
    }

    /// Every `E^λ` equal to `value`.
    pub fn uniform(pair: ShellPair, value: &BigRational) -> Self {
        let values = pair
            .lambdas()
            .into_iter()
            .map(|l| (l, QuadraticSum::from_rational(value.clone())))
            .collect();
        AomParams { pair, values }
    }

    pub fn pair(&self) -> ShellPair {
        self.pair
    }

    pub fn values(&self) -> &BTreeMap<u32, QuadraticSum> {
        &self.values
    }

    pub fn get(&self, lambda: u32) -> Option<&QuadraticSum> {
        self.values.get(&lambda)
    }

    pub fn label(lambda: u32) -> String {
        lambda_label(lambda)
    }
}

fn sign_pow(n: i64) -> i8 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Coefficient of `F^(k)` in `E^λ` for a signed λ:
/// `(−1)^λ √((2l+1)(2l'+1)) (l k l'; 0 0 0)(l k l'; −λ 0 λ)`.
pub fn aom_coefficient(pair: ShellPair, lambda: i32, k: u32) -> Result<SqrtRational> {
    let (l, lp, k) = (pair.ell as i32, pair.ell_prime as i32, k as i32);
    let reduced = three_j_int(l, k, lp, 0, 0, 0)?;
    let projected = three_j_int(l, k, lp, -lambda, 0, lambda)?;
    let norm = SqrtRational::new(sign_pow(i64::from(lambda)), int(pair.degeneracy_product()));
    Ok(&(&norm * &reduced) * &projected)
}

/// Coefficient of `E^{|λ|}` in `F^(k)` contributed by one signed λ:
/// `(2k+1)/√((2l+1)(2l'+1)) · (l k l'; 0 0 0)^{-1} (−1)^λ (l k l'; −λ 0 λ)`.
fn slater_coefficient_signed(pair: ShellPair, k: u32, lambda: i32) -> Result<SqrtRational> {
    pair.check_k(k)?;
    let (l, lp, ki) = (pair.ell as i32, pair.ell_prime as i32, k as i32);
    let reduced = three_j_int(l, ki, lp, 0, 0, 0)?;
    // Nonzero for every allowed k: l + k + l' is even and the triangle holds.
    let inverse_reduced = SqrtRational::new(reduced.sign(), int(1) / reduced.square());
    let projected = three_j_int(l, ki, lp, -lambda, 0, lambda)?;
    let norm = SqrtRational::new(
        sign_pow(i64::from(lambda)),
        ratio(
            i64::from((2 * k + 1) * (2 * k + 1)),
            pair.degeneracy_product(),
        ),
    );
    Ok(&(&norm * &inverse_reduced) * &projected)
}

/// Coefficient of `E^λ` (λ ≥ 0) in `F^(k)`, folding in the `−λ` term.
pub fn slater_coefficient(pair: ShellPair, k: u32, lambda: u32) -> Result<QuadraticSum> {
    let mut acc = QuadraticSum::zero();
    let one = int(1);
    acc.accumulate(&slater_coefficient_signed(pair, k, lambda as i32)?, &one);
    if lambda > 0 {
        acc.accumulate(&slater_coefficient_signed(pair, k, -(lambda as i32))?, &one);
    }
    Ok(acc)
}

/// One Slater parameter `F^(k)` from the overlap parameters.
pub fn slater_component(p: &AomParams, k: u32) -> Result<QuadraticSum> {
    let mut acc = QuadraticSum::zero();
    for (&lambda, value) in &p.values {
        let c = slater_coefficient(p.pair, k, lambda)?;
        acc += &(&c * value);
    }
    Ok(acc)
}

/// `E^λ → F^(k)`.
pub fn e_to_f(p: &AomParams) -> Result<SlaterParams> {
    let values = p
        .pair
        .allowed_k()
        .into_iter()
        .map(|k| slater_component(p, k).map(|v| (k, v)))
        .collect::<Result<_>>()?;
    Ok(SlaterParams {
        pair: p.pair,
        values,
    })
}

/// `F^(k) → E^λ`.
pub fn f_to_e(p: &SlaterParams) -> Result<AomParams> {
    let mut values = BTreeMap::new();
    for lambda in p.pair.lambdas() {
        let mut acc = QuadraticSum::zero();
        for (&k, value) in &p.values {
            acc += &value.mul_sqrt(&aom_coefficient(p.pair, lambda as i32, k)?);
        }
        values.insert(lambda, acc);
    }
    Ok(AomParams {
        pair: p.pair,
        values,
    })
}

/// `S = (1/l) Σ_{λ≥1} E^λ` and `D = (E^σ − S)/(l + 1)`; requires `l = l' ≥ 1`.
pub fn s_and_d(p: &AomParams) -> Result<(QuadraticSum, QuadraticSum)> {
    let ShellPair { ell, ell_prime } = p.pair;
    if ell != ell_prime || ell == 0 {
        return Err(Error::EmptyLambdaRange { ell, ell_prime });
    }
    let mut sum = QuadraticSum::zero();
    for lambda in 1..=ell {
        sum += &p.values[&lambda];
    }
    let s = sum.scale(&ratio(1, i64::from(ell)));
    let d = (&p.values[&0] - &s).scale(&ratio(1, i64::from(ell) + 1));
    Ok((s, d))
}

/// Rewrites an energy form of an `l^N` shell in the requested basis.
pub fn convert_form(form: &EnergyForm, target: Basis) -> Result<EnergyForm> {
    let ell = form.ell();
    let pair = ShellPair::diagonal(ell);
    if form.basis() == target {
        return Ok(form.clone());
    }
    let mut out = EnergyForm::zero(target, ell);
    match target {
        // Σ_k a_k F^(k) with F^(k) = Σ_λ T_kλ E^λ.
        Basis::E => {
            for (k, a) in form.coeffs() {
                for lambda in pair.lambdas() {
                    let t = slater_coefficient(pair, k, lambda)?;
                    out.add_coeff(lambda, &(a * &t))?;
                }
            }
        }
        // Σ_λ b_λ E^λ with E^λ = Σ_k U_λk F^(k).
        Basis::F => {
            for (lambda, b) in form.coeffs() {
                for k in pair.allowed_k() {
                    let u = aom_coefficient(pair, lambda as i32, k)?;
                    out.add_coeff(k, &b.mul_sqrt(&u))?;
                }
            }
        }
    }
    Ok(out)
}

/// The strong Hund-rule condition for a parameter set: is `D > 0`, so that
/// spin-averaged energies decrease linearly in `S(S+1)`?
pub fn hund_strong_holds(p: &AomParams) -> Result<bool> {
    let (_, d) = s_and_d(p)?;
    Ok(d.signum() == std::cmp::Ordering::Greater)
}

/// Checks `E^σ = … = E^λ`, the maximally degenerate point.
pub fn is_uniform(p: &AomParams) -> bool {
    let mut it = p.values.values();
    match it.next() {
        Some(first) => it.all(|v| v == first),
        None => true,
    }
}
