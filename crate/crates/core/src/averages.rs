//! Closed-form electrostatic energy averages for `l^N` in the `E^λ`
//! parametrization, and exact two-electron term energies.
//!
//! All forms are produced in the E basis; use
//! [`convert_form`](crate::parametrization::convert_form) for Slater views.

use std::fmt;

use num_traits::Zero;

use crate::counting::{h_count, spin_defect, ShellConfig};
use crate::error::{Error, Result};
use crate::form::{Basis, EnergyForm};
use crate::numerics::{int, ratio, BigRational, QuadraticSum};
use crate::wigner::{sum_rule_lhs, three_j_int, Parity};

fn pair_count(n: u32) -> BigRational {
    let n = i64::from(n);
    ratio(n * (n - 1), 2)
}

/// `S = (1/l) Σ_{λ≥1} E^λ` and `D = (E^σ − S)/(l+1)` as E-basis forms (`l ≥ 1`).
pub fn s_and_d_forms(ell: u32) -> Result<(EnergyForm, EnergyForm)> {
    if ell == 0 {
        return Err(Error::EmptyLambdaRange {
            ell,
            ell_prime: ell,
        });
    }
    let inv_l = ratio(1, i64::from(ell));
    let s = EnergyForm::from_rational_coeffs(Basis::E, ell, (1..=ell).map(|l| (l, inv_l.clone())))?;
    let sigma = EnergyForm::parameter(Basis::E, ell, 0)?;
    let d = (&sigma - &s).scale(&ratio(1, i64::from(ell) + 1));
    Ok((s, d))
}

/// An energy written as `s·S + d·D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdCoefficients {
    pub s: BigRational,
    pub d: BigRational,
}

impl SdCoefficients {
    pub fn to_form(&self, ell: u32) -> Result<EnergyForm> {
        let (s, d) = s_and_d_forms(ell)?;
        Ok(&s.scale(&self.s) + &d.scale(&self.d))
    }
}

/// Average over all `C(4l+2, N)` states:
/// `N(N−1)/2 · (E^σ + 4 Σ_{λ≥1} E^λ)/(4l+1)`. For `l = 0` this is
/// `N(N−1)/2 · E^σ`.
pub fn average_energy(ell: u32, n: u32) -> Result<EnergyForm> {
    ShellConfig::new(ell, n)?;
    let pairs = pair_count(n);
    if ell == 0 {
        return EnergyForm::from_rational_coeffs(Basis::E, 0, [(0, pairs)]);
    }
    let base = pairs / int(i64::from(4 * ell + 1));
    let coeffs = (0..=ell).map(|l| {
        let weight = if l == 0 { int(1) } else { int(4) };
        (l, &base * weight)
    });
    EnergyForm::from_rational_coeffs(Basis::E, ell, coeffs)
}

/// [`average_energy`] in the `S`/`D` shape: `N(N−1)/2 (S + (l+1)/(4l+1) D)`.
pub fn average_energy_sd(ell: u32, n: u32) -> Result<SdCoefficients> {
    ShellConfig::new(ell, n)?;
    if ell == 0 {
        return Err(Error::EmptyLambdaRange {
            ell,
            ell_prime: ell,
        });
    }
    let pairs = pair_count(n);
    Ok(SdCoefficients {
        d: &pairs * ratio(i64::from(ell) + 1, i64::from(4 * ell + 1)),
        s: pairs,
    })
}

fn check_level(ell: u32, n: u32, twice_s: u32) -> Result<()> {
    let h = h_count(ell, n, twice_s as i32)?;
    if h.is_zero() {
        return Err(Error::EmptySpinLevel {
            ell,
            n,
            twice_s: twice_s as i32,
        });
    }
    Ok(())
}

/// Spin-resolved average `N(N−1)/2 · S + ½[N/2 (N/2+1) − S(S+1)] · D`
/// over the states of total spin `S`, in the `S`/`D` shape.
pub fn spin_average_sd(ell: u32, n: u32, twice_s: u32) -> Result<SdCoefficients> {
    check_level(ell, n, twice_s)?;
    Ok(SdCoefficients {
        s: pair_count(n),
        d: spin_defect(n, twice_s),
    })
}

/// [`spin_average_sd`] expanded in the E basis. For `l = 0` the single
/// parameter gives `N(N−1)/2 · E^σ`.
pub fn spin_average(ell: u32, n: u32, twice_s: u32) -> Result<EnergyForm> {
    if ell == 0 {
        check_level(ell, n, twice_s)?;
        return EnergyForm::from_rational_coeffs(Basis::E, 0, [(0, pair_count(n))]);
    }
    spin_average_sd(ell, n, twice_s)?.to_form(ell)
}

const L_LETTERS: &[u8] = b"SPDFGHIKLMNOQRTUVWXYZ";

/// A two-electron term `^{2S+1}L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TermLabel {
    pub twice_s: u32,
    pub l: u32,
}

impl TermLabel {
    pub fn new(twice_s: u32, l: u32) -> Self {
        TermLabel { twice_s, l }
    }

    pub fn multiplicity(&self) -> u32 {
        self.twice_s + 1
    }

    /// Pauli check for two equivalent electrons: singlets have even `L`,
    /// triplets odd `L`, and `L ≤ 2l`.
    pub fn validate(&self, ell: u32) -> Result<()> {
        let ok = self.l <= 2 * ell
            && match self.twice_s {
                0 => self.l.is_multiple_of(2),
                2 => self.l % 2 == 1,
                _ => false,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::ForbiddenTerm {
                ell,
                multiplicity: self.multiplicity() as i32,
                l: self.l,
            })
        }
    }

    pub fn letter(l: u32) -> String {
        L_LETTERS
            .get(l as usize)
            .map(|&b| (b as char).to_string())
            .unwrap_or_else(|| format!("[{l}]"))
    }
}

impl fmt::Display for TermLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.multiplicity(), Self::letter(self.l))
    }
}

impl std::str::FromStr for TermLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(s.to_string());
        let split = s.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let mult: u32 = s[..split].parse().map_err(|_| bad())?;
        let letter = &s.as_bytes()[split..];
        if letter.len() != 1 || mult == 0 {
            return Err(bad());
        }
        let l = L_LETTERS
            .iter()
            .position(|&b| b == letter[0].to_ascii_uppercase())
            .ok_or_else(bad)?;
        Ok(TermLabel::new(mult - 1, l as u32))
    }
}

/// `^{2S+1}L = (2l+1) Σ_{λ=−l}^{l} (l l L; 0 λ −λ)² E^{|λ|}` for `l^2`.
pub fn term_energy_two_electrons(ell: u32, term: TermLabel) -> Result<EnergyForm> {
    term.validate(ell)?;
    let (l, big_l) = (ell as i32, term.l as i32);
    let mut form = EnergyForm::zero(Basis::E, ell);
    for lambda in -l..=l {
        let w = three_j_int(l, l, big_l, 0, lambda, -lambda)?.square();
        let c = w * int(i64::from(2 * ell + 1));
        form.add_coeff(lambda.unsigned_abs(), &QuadraticSum::from_rational(c))?;
    }
    Ok(form)
}

/// Every allowed term of `l^2` with its energy, in increasing `L`.
pub fn two_electron_terms(ell: u32) -> Result<Vec<(TermLabel, EnergyForm)>> {
    (0..=2 * ell)
        .map(|l| {
            let term = TermLabel::new(if l % 2 == 0 { 0 } else { 2 }, l);
            term_energy_two_electrons(ell, term).map(|e| (term, e))
        })
        .collect()
}

fn pair_parity(ell: u32, twice_s: u32) -> Result<Parity> {
    match twice_s {
        0 => Ok(Parity::Even),
        2 if ell >= 1 => Ok(Parity::Odd),
        2 => Err(Error::EmptySpinLevel {
            ell,
            n: 2,
            twice_s: 2,
        }),
        _ => Err(Error::InvalidSpin {
            n: 2,
            twice_s: twice_s as i32,
        }),
    }
}

/// `(2L+1)`-weighted average of the `l^2` term energies of one spin.
pub fn spin_average_two_electrons_weighted(ell: u32, twice_s: u32) -> Result<EnergyForm> {
    let parity = pair_parity(ell, twice_s)?;
    let mut total = EnergyForm::zero(Basis::E, ell);
    let mut weight = 0i64;
    for l in parity.l_values(ell) {
        let w = i64::from(2 * l + 1);
        let term = term_energy_two_electrons(ell, TermLabel::new(twice_s, l))?;
        total += &term.scale(&int(w));
        weight += w;
    }
    Ok(total.scale(&ratio(1, weight)))
}

/// Closed forms: singlet `[E^σ + Σ_{λ≥1} E^λ]/(l+1)`, triplet `Σ_{λ≥1} E^λ / l`.
pub fn spin_average_two_electrons_closed(ell: u32, twice_s: u32) -> Result<EnergyForm> {
    let parity = pair_parity(ell, twice_s)?;
    let (first, scale) = match parity {
        Parity::Even => (0, ratio(1, i64::from(ell) + 1)),
        Parity::Odd => (1, ratio(1, i64::from(ell))),
    };
    EnergyForm::from_rational_coeffs(Basis::E, ell, (first..=ell).map(|l| (l, scale.clone())))
}

/// The same average with the inner `Σ_{L_π M}` evaluated through the
/// exchange-symmetric 3-jm sum rule at `m = μ = 0`, `m' = μ' = λ`.
pub fn spin_average_two_electrons_sum_rule(ell: u32, twice_s: u32) -> Result<EnergyForm> {
    let parity = pair_parity(ell, twice_s)?;
    let weight: u32 = parity.l_values(ell).map(|l| 2 * l + 1).sum();
    let prefactor = ratio(i64::from(2 * ell + 1), i64::from(weight));
    let l = ell as i32;
    let mut form = EnergyForm::zero(Basis::E, ell);
    for lambda in -l..=l {
        let inner = sum_rule_lhs(ell, parity, 0, lambda, 0, lambda)?;
        let c = &prefactor * inner;
        form.add_coeff(lambda.unsigned_abs(), &QuadraticSum::from_rational(c))?;
    }
    Ok(form)
}

/// Spin-averaged `l^2` energy from the term table, checked against the
/// closed form.
pub fn spin_average_two_electrons(ell: u32, twice_s: u32) -> Result<EnergyForm> {
    let weighted = spin_average_two_electrons_weighted(ell, twice_s)?;
    let closed = spin_average_two_electrons_closed(ell, twice_s)?;
    if weighted != closed {
        return Err(Error::IdentityViolation(format!(
            "l = {ell}, 2S = {twice_s}: weighted term average {weighted} differs from {closed}"
        )));
    }
    Ok(weighted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e_form(ell: u32, coeffs: &[(u32, BigRational)]) -> EnergyForm {
        EnergyForm::from_rational_coeffs(Basis::E, ell, coeffs.iter().cloned()).unwrap()
    }

    #[test]
    fn average_energy_examples() {
        assert_eq!(
            average_energy(1, 2).unwrap(),
            e_form(1, &[(0, ratio(1, 5)), (1, ratio(4, 5))])
        );
        for l in 0..4 {
            for n in [0, 1] {
                assert!(average_energy(l, n).unwrap().is_zero());
            }
            for n in 0..=4 * l + 2 {
                let v = average_energy(l, n).unwrap().evaluate_uniform(&int(3));
                assert_eq!(v, QuadraticSum::from_rational(pair_count(n) * int(3)));
            }
        }
        assert_eq!(average_energy(0, 2).unwrap(), e_form(0, &[(0, int(1))]));
        assert!(average_energy(1, 7).is_err());
    }

    #[test]
    fn sd_shape_matches_e_shape() {
        for l in 1..5 {
            for n in 0..=4 * l + 2 {
                let sd = average_energy_sd(l, n).unwrap();
                assert_eq!(sd.to_form(l).unwrap(), average_energy(l, n).unwrap());
            }
        }
    }

    #[test]
    fn spin_average_examples() {
        assert_eq!(
            spin_average(1, 2, 0).unwrap(),
            e_form(1, &[(0, ratio(1, 2)), (1, ratio(1, 2))])
        );
        assert_eq!(spin_average(1, 2, 2).unwrap(), e_form(1, &[(1, int(1))]));
        assert_eq!(spin_average(1, 3, 3).unwrap(), e_form(1, &[(1, int(3))]));
        // Highest multiplicity: no E^σ component.
        for l in 1..4 {
            for n in 1..=2 * l + 1 {
                assert!(spin_average(l, n, n).unwrap().coeff(0).is_zero());
            }
        }
        assert!(matches!(
            spin_average(1, 6, 2),
            Err(Error::EmptySpinLevel { .. })
        ));
        assert!(matches!(
            spin_average(1, 4, 1),
            Err(Error::InvalidSpin { .. })
        ));
    }

    #[test]
    fn p2_terms() {
        let t = |s: &str| term_energy_two_electrons(1, s.parse().unwrap()).unwrap();
        assert_eq!(t("1S"), e_form(1, &[(0, int(1))]));
        assert_eq!(t("1D"), e_form(1, &[(0, ratio(2, 5)), (1, ratio(3, 5))]));
        assert_eq!(t("3P"), e_form(1, &[(1, int(1))]));
        assert!(matches!(
            term_energy_two_electrons(1, "3S".parse().unwrap()),
            Err(Error::ForbiddenTerm { .. })
        ));
        assert!(term_energy_two_electrons(1, TermLabel::new(0, 4)).is_err());
    }

    #[test]
    fn term_labels() {
        let t: TermLabel = "3F".parse().unwrap();
        assert_eq!(t, TermLabel::new(2, 3));
        assert_eq!(t.to_string(), "3F");
        assert_eq!(TermLabel::new(0, 7).to_string(), "1K");
        assert!("S".parse::<TermLabel>().is_err());
        assert_eq!(two_electron_terms(2).unwrap().len(), 5);
    }

    #[test]
    fn two_electron_spin_averages() {
        assert_eq!(
            spin_average_two_electrons(1, 0).unwrap(),
            e_form(1, &[(0, ratio(1, 2)), (1, ratio(1, 2))])
        );
        assert_eq!(
            spin_average_two_electrons(2, 2).unwrap(),
            e_form(2, &[(1, ratio(1, 2)), (2, ratio(1, 2))])
        );
        assert_eq!(
            spin_average_two_electrons(3, 0).unwrap(),
            e_form(
                3,
                &[
                    (0, ratio(1, 4)),
                    (1, ratio(1, 4)),
                    (2, ratio(1, 4)),
                    (3, ratio(1, 4))
                ]
            )
        );
        assert!(spin_average_two_electrons(0, 2).is_err());
        assert!(spin_average_two_electrons(1, 4).is_err());
    }

    #[test]
    fn sum_rule_route_matches() {
        for l in 1..=4 {
            for s in [0, 2] {
                assert_eq!(
                    spin_average_two_electrons_sum_rule(l, s).unwrap(),
                    spin_average_two_electrons_closed(l, s).unwrap()
                );
            }
        }
    }
}
