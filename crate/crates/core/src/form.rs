//! Exact linear forms in the energy parameters of one shell.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_traits::One;

use crate::error::{Error, Result};
use crate::numerics::{BigRational, QuadraticSum};

/// Which parameter set a form is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `E^λ`, `λ = 0..=l` (σ, π, δ, φ, …).
    E,
    /// Slater `F^(k)`, `k = 0, 2, …, 2l`.
    F,
}

impl Basis {
    /// Parameter indices of this basis for an `l^N` shell.
    pub fn indices(self, ell: u32) -> Vec<u32> {
        match self {
            Basis::E => (0..=ell).collect(),
            Basis::F => (0..=ell).map(|i| 2 * i).collect(),
        }
    }

    pub fn label(self, index: u32) -> String {
        match self {
            Basis::E => lambda_label(index),
            Basis::F => format!("F{index}"),
        }
    }

    /// Inverse of [`Basis::label`].
    pub fn parse_label(self, label: &str) -> Result<u32> {
        let bad = || Error::LabelMismatch(label.to_string());
        match self {
            Basis::E => parse_lambda_label(label).ok_or_else(bad),
            Basis::F => label
                .strip_prefix('F')
                .or_else(|| label.strip_prefix('k'))
                .unwrap_or(label)
                .parse()
                .map_err(|_| bad()),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::E => "E",
            Basis::F => "F",
        })
    }
}

const LAMBDA_NAMES: [&str; 7] = ["sigma", "pi", "delta", "phi", "gamma", "eta", "iota"];

/// `0 → "sigma"`, `1 → "pi"`, …; indices past the named ones become `"e7"` etc.
pub fn lambda_label(lambda: u32) -> String {
    LAMBDA_NAMES
        .get(lambda as usize)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("e{lambda}"))
}

pub fn parse_lambda_label(label: &str) -> Option<u32> {
    if let Some(i) = LAMBDA_NAMES.iter().position(|&n| n == label) {
        return Some(i as u32);
    }
    label.strip_prefix('e').unwrap_or(label).parse().ok()
}

/// A linear form `Σ c_i P_i` over the parameters `P_i` of one basis.
///
/// Zero coefficients are never stored. Arithmetic between forms is only
/// defined within one basis and one shell; the operator impls panic on a
/// mismatch, [`EnergyForm::try_add`] reports it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyForm {
    basis: Basis,
    ell: u32,
    coeffs: BTreeMap<u32, QuadraticSum>,
}

impl EnergyForm {
    pub fn zero(basis: Basis, ell: u32) -> Self {
        EnergyForm {
            basis,
            ell,
            coeffs: BTreeMap::new(),
        }
    }

    /// The single parameter `P_index` with unit coefficient.
    pub fn parameter(basis: Basis, ell: u32, index: u32) -> Result<Self> {
        let mut f = Self::zero(basis, ell);
        f.add_coeff(index, &QuadraticSum::one())?;
        Ok(f)
    }

    pub fn from_coeffs<I>(basis: Basis, ell: u32, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, QuadraticSum)>,
    {
        let mut f = Self::zero(basis, ell);
        for (i, c) in coeffs {
            f.add_coeff(i, &c)?;
        }
        Ok(f)
    }

    pub fn from_rational_coeffs<I>(basis: Basis, ell: u32, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, BigRational)>,
    {
        Self::from_coeffs(
            basis,
            ell,
            coeffs
                .into_iter()
                .map(|(i, c)| (i, QuadraticSum::from_rational(c))),
        )
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &QuadraticSum)> {
        self.coeffs.iter().map(|(&i, c)| (i, c))
    }

    /// Coefficient of `P_index` (zero when absent).
    pub fn coeff(&self, index: u32) -> QuadraticSum {
        self.coeffs.get(&index).cloned().unwrap_or_default()
    }

    fn check_index(&self, index: u32) -> Result<()> {
        if self.basis.indices(self.ell).contains(&index) {
            Ok(())
        } else {
            Err(Error::LabelMismatch(format!(
                "{} is not a parameter of the {} basis for l = {}",
                self.basis.label(index),
                self.basis,
                self.ell
            )))
        }
    }

    pub fn add_coeff(&mut self, index: u32, c: &QuadraticSum) -> Result<()> {
        self.check_index(index)?;
        let slot = self.coeffs.entry(index).or_default();
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&index);
        }
        Ok(())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        EnergyForm {
            basis: self.basis,
            ell: self.ell,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&i, c)| (i, c.scale(r)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn try_add(&self, other: &EnergyForm) -> Result<Self> {
        if self.basis != other.basis || self.ell != other.ell {
            return Err(Error::BasisMismatch);
        }
        let mut out = self.clone();
        for (&i, c) in &other.coeffs {
            out.add_coeff(i, c)?;
        }
        Ok(out)
    }

    /// Substitutes parameter values; missing parameters count as zero.
    pub fn evaluate(&self, values: &BTreeMap<u32, QuadraticSum>) -> QuadraticSum {
        let mut acc = QuadraticSum::zero();
        for (i, c) in &self.coeffs {
            if let Some(v) = values.get(i) {
                acc += &(c * v);
            }
        }
        acc
    }

    /// Substitutes the same value for every parameter.
    pub fn evaluate_uniform(&self, value: &BigRational) -> QuadraticSum {
        let mut acc = QuadraticSum::zero();
        for c in self.coeffs.values() {
            acc += c;
        }
        acc.scale(value)
    }

    /// Human-readable rendering, e.g. `1/2 E^sigma + 1/2 E^pi`.
    pub fn to_expression(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let symbol = |i: u32| match self.basis {
            Basis::E => format!("E^{}", lambda_label(i)),
            Basis::F => format!("F^{i}"),
        };
        let mut out = String::new();
        for (n, (&i, c)) in self.coeffs.iter().enumerate() {
            let (negative, mag) = match c.as_rational() {
                Some(r) if r < BigRational::from_integer(0.into()) => {
                    (true, QuadraticSum::from_rational(-r))
                }
                _ => (false, c.clone()),
            };
            if n > 0 {
                out.push_str(if negative { " - " } else { " + " });
            } else if negative {
                out.push('-');
            }
            match mag.as_rational() {
                Some(r) if r.is_one() => {}
                Some(r) => out.push_str(&format!("{r} ")),
                None => out.push_str(&format!("({mag}) ")),
            }
            out.push_str(&symbol(i));
        }
        out
    }
}

impl fmt::Display for EnergyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expression())
    }
}

impl<'a> Add<&'a EnergyForm> for &'a EnergyForm {
    type Output = EnergyForm;
    fn add(self, rhs: &EnergyForm) -> EnergyForm {
        self.try_add(rhs)
            .expect("adding energy forms of different bases")
    }
}

impl AddAssign<&EnergyForm> for EnergyForm {
    fn add_assign(&mut self, rhs: &EnergyForm) {
        *self = &*self + rhs;
    }
}

impl<'a> Sub<&'a EnergyForm> for &'a EnergyForm {
    type Output = EnergyForm;
    fn sub(self, rhs: &EnergyForm) -> EnergyForm {
        self + &(-rhs.clone())
    }
}

impl Neg for EnergyForm {
    type Output = EnergyForm;
    fn neg(self) -> EnergyForm {
        EnergyForm {
            basis: self.basis,
            ell: self.ell,
            coeffs: self.coeffs.into_iter().map(|(i, c)| (i, -c)).collect(),
        }
    }
}
