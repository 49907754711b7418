//! State counting for `l^N` shells.
//!
//! `F_l(N, M_S, M_L)` comes from expanding the generating function
//! `Π_{m_s} Π_{m_l} (1 + z y^{m_s} x^{m_l})`; `G_l(N, M_S)` is its `M_L`
//! marginal and `H_l(N, S)` the number of states of total spin `S`.
//! Spin projections are carried doubled (`2M_S`, `2S`) so every index is
//! an integer.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::{int, ratio, BigRational};

/// Default upper bound on `l` for the dense generating-function expansion.
pub const DEFAULT_SHELL_CAP: u32 = 6;
/// Hard limit: every `F` count must fit in a `u64`.
pub const MAX_SHELL_CAP: u32 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShellConfig {
    pub ell: u32,
    pub n_electrons: u32,
}

impl ShellConfig {
    pub fn new(ell: u32, n_electrons: u32) -> Result<Self> {
        check_capacity(ell, n_electrons)?;
        Ok(ShellConfig { ell, n_electrons })
    }

    pub fn capacity(ell: u32) -> u32 {
        4 * ell + 2
    }
}

fn check_capacity(ell: u32, n: u32) -> Result<()> {
    if n > ShellConfig::capacity(ell) {
        return Err(Error::CapacityExceeded(n, ell));
    }
    Ok(())
}

/// Allowed `2S` values for `N` electrons, highest spin first.
pub fn twice_spins(n: u32) -> impl Iterator<Item = u32> {
    (n % 2..=n).rev().step_by(2)
}

/// Allowed `2M_S` values for `N` electrons, highest first.
pub fn twice_projections(n: u32) -> impl Iterator<Item = i32> {
    let n = n as i32;
    (-n..=n).rev().step_by(2)
}

/// Dense table of `F_l(N, M_S, M_L)` for every `N` of one shell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinCountTable {
    ell: u32,
    ms_span: i32,
    ml_span: i32,
    // [n][twice_ms + ms_span][ml + ml_span]
    counts: Vec<u64>,
}

impl SpinCountTable {
    fn new(ell: u32) -> Self {
        let ms_span = 2 * ell as i32 + 1;
        let ml_span = (ell * (ell + 1)) as i32;
        let n_slots = ShellConfig::capacity(ell) as usize + 1;
        let size = n_slots * (2 * ms_span as usize + 1) * (2 * ml_span as usize + 1);
        SpinCountTable {
            ell,
            ms_span,
            ml_span,
            counts: vec![0; size],
        }
    }

    fn index(&self, n: u32, twice_ms: i32, ml: i32) -> Option<usize> {
        if n > ShellConfig::capacity(self.ell)
            || twice_ms.abs() > self.ms_span
            || ml.abs() > self.ml_span
        {
            return None;
        }
        let ms_width = 2 * self.ms_span as usize + 1;
        let ml_width = 2 * self.ml_span as usize + 1;
        Some(
            (n as usize * ms_width + (twice_ms + self.ms_span) as usize) * ml_width
                + (ml + self.ml_span) as usize,
        )
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// `F_l(N, M_S, M_L)`; zero outside the table.
    pub fn f(&self, n: u32, twice_ms: i32, ml: i32) -> u64 {
        self.index(n, twice_ms, ml).map_or(0, |i| self.counts[i])
    }

    /// `G_l(N, M_S) = Σ_{M_L} F_l(N, M_S, M_L)`.
    pub fn g(&self, n: u32, twice_ms: i32) -> u64 {
        (-self.ml_span..=self.ml_span)
            .map(|ml| self.f(n, twice_ms, ml))
            .sum()
    }

    /// `H_l(N, S)` by differencing the `G` marginals.
    pub fn h(&self, n: u32, twice_s: u32) -> u64 {
        let s = twice_s as i32;
        self.g(n, s) - self.g(n, s + 2)
    }

    pub fn total(&self, n: u32) -> u64 {
        twice_projections(n).map(|ms| self.g(n, ms)).sum()
    }

    /// Nonzero `(2M_S, M_L, count)` entries for one `N`, `M_S` then `M_L` descending.
    pub fn entries(&self, n: u32) -> Vec<(i32, i32, u64)> {
        let mut out = Vec::new();
        for ms in (-self.ms_span..=self.ms_span).rev() {
            for ml in (-self.ml_span..=self.ml_span).rev() {
                let c = self.f(n, ms, ml);
                if c > 0 {
                    out.push((ms, ml, c));
                }
            }
        }
        out
    }
}

/// Expands the generating function for one shell (default cap `l ≤ 6`).
pub fn expand_generating(ell: u32) -> Result<SpinCountTable> {
    expand_generating_capped(ell, DEFAULT_SHELL_CAP)
}

pub fn expand_generating_capped(ell: u32, cap: u32) -> Result<SpinCountTable> {
    if ell > cap.min(MAX_SHELL_CAP) {
        return Err(Error::ShellCapExceeded {
            ell,
            cap: cap.min(MAX_SHELL_CAP),
        });
    }
    let mut table = SpinCountTable::new(ell);
    let vacuum = table.index(0, 0, 0).expect("vacuum slot");
    table.counts[vacuum] = 1;
    let l = ell as i32;
    let mut filled = 0u32;
    for twice_ms in [-1, 1] {
        for ml in -l..=l {
            // Multiply by (1 + z y^{m_s} x^{m_l}); walking N downward keeps
            // the update in place.
            for n in (0..=filled).rev() {
                for ms in -table.ms_span..=table.ms_span {
                    for lz in -table.ml_span..=table.ml_span {
                        let src = table.index(n, ms, lz).expect("in range");
                        let c = table.counts[src];
                        if c == 0 {
                            continue;
                        }
                        let dst = table
                            .index(n + 1, ms + twice_ms, lz + ml)
                            .expect("generating function stays within spans");
                        table.counts[dst] += c;
                    }
                }
            }
            filled += 1;
        }
    }
    Ok(table)
}

fn projection_halves(ell: u32, n: u32, twice_ms: i32) -> Result<Option<(u32, u32)>> {
    check_capacity(ell, n)?;
    let n_i = n as i32;
    if (n_i - twice_ms).rem_euclid(2) != 0 {
        return Err(Error::ImpossibleProjection { n, twice_ms });
    }
    if twice_ms.abs() > n_i {
        return Ok(None);
    }
    Ok(Some((
        ((n_i - twice_ms) / 2) as u32,
        ((n_i + twice_ms) / 2) as u32,
    )))
}

fn binom(n: u32, k: u32) -> BigUint {
    if k > n {
        BigUint::zero()
    } else {
        binomial(BigUint::from(n), BigUint::from(k))
    }
}

/// `G_l(N, M_S) = C(2l+1, N/2 − M_S) · C(2l+1, N/2 + M_S)`.
pub fn g_closed(ell: u32, n: u32, twice_ms: i32) -> Result<BigUint> {
    let Some((down, up)) = projection_halves(ell, n, twice_ms)? else {
        return Ok(BigUint::zero());
    };
    let orbitals = 2 * ell + 1;
    Ok(binom(orbitals, down) * binom(orbitals, up))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, i| acc * i)
}

/// `G_l(N, M_S)` through the explicit sum over doubly occupied orbitals,
/// `(2l+1)! Σ_i 1 / [i! (2l+1−N+i)! (N/2−i−M_S)! (N/2−i+M_S)!]`.
pub fn g_alternative(ell: u32, n: u32, twice_ms: i32) -> Result<BigUint> {
    let Some((down, up)) = projection_halves(ell, n, twice_ms)? else {
        return Ok(BigUint::zero());
    };
    let orbitals = (2 * ell + 1) as i64;
    let mut sum = BigRational::zero();
    for i in 0..=(n / 2) {
        let empty = orbitals - n as i64 + i as i64;
        if empty < 0 || i > down || i > up {
            continue;
        }
        let den = factorial(i) * factorial(empty as u32) * factorial(down - i) * factorial(up - i);
        sum += BigRational::new(BigInt::from(1), den);
    }
    let total = sum * BigRational::from_integer(factorial(orbitals as u32));
    debug_assert!(total.is_integer());
    total
        .to_integer()
        .to_biguint()
        .ok_or_else(|| Error::IdentityViolation("negative state count".into()))
}

/// `H_l(N, S)`: `G(N, S) − G(N, S+1)` below the maximal spin, `G(N, N/2)` at it.
pub fn h_count(ell: u32, n: u32, twice_s: i32) -> Result<BigUint> {
    check_capacity(ell, n)?;
    if twice_s < 0 || twice_s > n as i32 || (n as i32 - twice_s) % 2 != 0 {
        return Err(Error::InvalidSpin { n, twice_s });
    }
    let g = g_closed(ell, n, twice_s)?;
    if twice_s == n as i32 {
        return Ok(g);
    }
    let above = g_closed(ell, n, twice_s + 2)?;
    Ok(g - above)
}

fn s_times_s_plus_one(twice_s: u32) -> BigRational {
    let s = ratio(i64::from(twice_s), 2);
    &s * (&s + int(1))
}

fn biguint_to_rational(b: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(b.clone()))
}

fn multiplicity_weighted<F>(ell: u32, n: u32, weight: F) -> Result<BigRational>
where
    F: Fn(u32) -> BigRational,
{
    let mut acc = BigRational::zero();
    for twice_s in twice_spins(n) {
        let h = biguint_to_rational(&h_count(ell, n, twice_s as i32)?);
        acc += h * int(i64::from(twice_s) + 1) * weight(twice_s);
    }
    Ok(acc)
}

/// `⟨S²⟩ = (3N/4)(1 − (N−1)/(4l+1))` averaged over all states of `l^N`.
pub fn mean_s_squared_closed(ell: u32, n: u32) -> Result<BigRational> {
    check_capacity(ell, n)?;
    let n = i64::from(n);
    let shell = i64::from(4 * ell + 1);
    Ok(ratio(3 * n, 4) * (int(1) - ratio(n - 1, shell)))
}

/// `⟨S²⟩` from the spin census, `Σ_S (2S+1) H(N,S) S(S+1) / C(4l+2, N)`.
pub fn mean_s_squared_census(ell: u32, n: u32) -> Result<BigRational> {
    let weighted = multiplicity_weighted(ell, n, s_times_s_plus_one)?;
    Ok(weighted / biguint_to_rational(&binom(ShellConfig::capacity(ell), n)))
}

/// `½[N/2 (N/2 + 1) − S(S+1)]`, the spin factor multiplying `D` in the
/// spin-resolved average.
pub fn spin_defect(n: u32, twice_s: u32) -> BigRational {
    let half_n = ratio(i64::from(n), 2);
    (&half_n * (&half_n + int(1)) - s_times_s_plus_one(twice_s)) * ratio(1, 2)
}

/// Census average of [`spin_defect`] over all states of `l^N`.
pub fn mean_spin_defect_census(ell: u32, n: u32) -> Result<BigRational> {
    let num = multiplicity_weighted(ell, n, |ts| spin_defect(n, ts))?;
    let den = multiplicity_weighted(ell, n, |_| int(1))?;
    Ok(num / den)
}

/// Closed form `(l+1)/(4l+1) · N(N−1)/2` of [`mean_spin_defect_census`].
pub fn mean_spin_defect_closed(ell: u32, n: u32) -> Result<BigRational> {
    check_capacity(ell, n)?;
    let n = i64::from(n);
    Ok(ratio(i64::from(ell) + 1, i64::from(4 * ell + 1)) * ratio(n * (n - 1), 2))
}

/// `G_l(N, M_S)` as a dense `(N, 2M_S)` table from one of the two factored
/// forms of the `x = 1` generating function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionTable {
    ell: u32,
    // [n][twice_ms + 2l + 1]
    counts: Vec<Vec<u64>>,
}

impl ProjectionTable {
    pub fn get(&self, n: u32, twice_ms: i32) -> u64 {
        let span = 2 * self.ell as i32 + 1;
        if twice_ms.abs() > span {
            return 0;
        }
        self.counts
            .get(n as usize)
            .map_or(0, |row| row[(twice_ms + span) as usize])
    }
}

/// Which factorization of the `x = 1` generating function to expand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactoredForm {
    /// `(1 + z y^{-1/2})^{2l+1} (1 + z y^{1/2})^{2l+1}`
    SpinProduct,
    /// `[1 + z (y^{-1/2} + y^{1/2}) + z²]^{2l+1}`
    Trinomial,
}

pub fn expand_projection_generating(ell: u32, form: FactoredForm) -> Result<ProjectionTable> {
    if ell > MAX_SHELL_CAP {
        return Err(Error::ShellCapExceeded {
            ell,
            cap: MAX_SHELL_CAP,
        });
    }
    let span = 2 * ell as i32 + 1;
    let width = 2 * span as usize + 1;
    let rows = ShellConfig::capacity(ell) as usize + 1;
    let mut poly = vec![vec![0u64; width]; rows];
    poly[0][span as usize] = 1;

    // Each factor is a list of (ΔN, Δ2M_S) monomials with unit coefficient.
    let factors: Vec<Vec<(usize, i32)>> = match form {
        FactoredForm::SpinProduct => {
            let mut f = vec![vec![(0, 0), (1, -1)]; 2 * ell as usize + 1];
            f.extend(vec![vec![(0, 0), (1, 1)]; 2 * ell as usize + 1]);
            f
        }
        FactoredForm::Trinomial => {
            vec![vec![(0, 0), (1, -1), (1, 1), (2, 0)]; 2 * ell as usize + 1]
        }
    };
    for factor in factors {
        let mut next = vec![vec![0u64; width]; rows];
        for (n, row) in poly.iter().enumerate() {
            for (col, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &(dn, dms) in &factor {
                    let target = col as i32 + dms;
                    if n + dn < rows && (0..width as i32).contains(&target) {
                        next[n + dn][target as usize] += c;
                    }
                }
            }
        }
        poly = next;
    }
    Ok(ProjectionTable { ell, counts: poly })
}

/// Lossless conversion used when comparing closed forms with table entries.
pub fn as_u64(b: &BigUint) -> Option<u64> {
    b.to_u64()
}
