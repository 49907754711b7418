//! Brute-force verification in the Slater-determinant basis.
//!
//! Determinants of an `l^N` shell are enumerated as bit masks over the
//! `4l + 2` spin-orbitals, Coulomb matrix elements follow from the
//! Slater–Condon rules with Gaunt coefficients, and spin-resolved averages
//! come out of differences of `M_S`-sector traces. Because the interaction
//! is spin-free, every level of spin `S` contributes once to each sector
//! with `|M_S| ≤ S`, so `trace(M_S = S) − trace(M_S = S + 1)` is the summed
//! energy of all spin-`S` states.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::counting::{h_count, twice_projections, ShellConfig};
use crate::error::{Error, Result};
use crate::form::{Basis, EnergyForm};
use crate::numerics::{int, BigRational, QuadraticSum, SqrtRational};
use crate::parametrization::{convert_form, e_to_f, AomParams, ShellPair};
use crate::wigner::gaunt_ck;

/// Largest shell whose spin-orbitals fit in a `u64` mask.
pub const MAX_ORACLE_ELL: u32 = 15;
/// Default cap on the determinant-basis dimension for full matrices.
pub const DEFAULT_DIMENSION_CAP: usize = 4000;

/// One spin-orbital `(m_l, m_s)`. Canonical order is by `m_s`, then `m_l`,
/// both ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinOrbital {
    pub spin_up: bool,
    pub m_ell: i32,
}

impl SpinOrbital {
    pub fn new(m_ell: i32, spin_up: bool) -> Self {
        SpinOrbital { spin_up, m_ell }
    }

    pub fn twice_ms(&self) -> i32 {
        if self.spin_up {
            1
        } else {
            -1
        }
    }

    fn index(&self, ell: u32) -> Result<u32> {
        let l = ell as i32;
        if self.m_ell.abs() > l {
            return Err(Error::InvalidDeterminant(format!(
                "m_l = {} outside l = {ell}",
                self.m_ell
            )));
        }
        Ok(u32::from(self.spin_up) * (2 * ell + 1) + (self.m_ell + l) as u32)
    }

    fn from_index(ell: u32, index: u32) -> Self {
        let width = 2 * ell + 1;
        SpinOrbital {
            spin_up: index >= width,
            m_ell: (index % width) as i32 - ell as i32,
        }
    }
}

impl fmt::Display for SpinOrbital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.m_ell, if self.spin_up { '+' } else { '-' })
    }
}

/// An antisymmetrized product of spin-orbitals, kept in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant {
    ell: u32,
    mask: u64,
}

impl Determinant {
    pub fn from_orbitals(ell: u32, orbitals: &[SpinOrbital]) -> Result<Self> {
        check_oracle_shell(ell)?;
        let mut mask = 0u64;
        for o in orbitals {
            let bit = 1u64 << o.index(ell)?;
            if mask & bit != 0 {
                return Err(Error::InvalidDeterminant(format!("{o} occupied twice")));
            }
            mask |= bit;
        }
        Ok(Determinant { ell, mask })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn n_electrons(&self) -> u32 {
        self.mask.count_ones()
    }

    fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        let mut m = self.mask;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let i = m.trailing_zeros();
            m &= m - 1;
            Some(i)
        })
    }

    /// Occupied spin-orbitals in canonical order.
    pub fn orbitals(&self) -> Vec<SpinOrbital> {
        self.indices()
            .map(|i| SpinOrbital::from_index(self.ell, i))
            .collect()
    }

    pub fn twice_ms(&self) -> i32 {
        self.orbitals().iter().map(SpinOrbital::twice_ms).sum()
    }

    pub fn ml(&self) -> i32 {
        self.orbitals().iter().map(|o| o.m_ell).sum()
    }
}

impl fmt::Display for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.orbitals().iter().map(ToString::to_string).collect();
        write!(f, "|{}|", names.join(" "))
    }
}

fn check_oracle_shell(ell: u32) -> Result<()> {
    if ell > MAX_ORACLE_ELL {
        return Err(Error::ShellCapExceeded {
            ell,
            cap: MAX_ORACLE_ELL,
        });
    }
    Ok(())
}

/// All determinants of `l^N` (optionally restricted to one `2M_S`), in
/// increasing mask order.
pub fn enumerate(ell: u32, n: u32, twice_ms: Option<i32>) -> Result<Vec<Determinant>> {
    check_oracle_shell(ell)?;
    ShellConfig::new(ell, n)?;
    let width = ShellConfig::capacity(ell);
    let mut out = Vec::new();
    let keep = |d: &Determinant| twice_ms.is_none_or(|ms| d.twice_ms() == ms);
    if n == 0 {
        let d = Determinant { ell, mask: 0 };
        if keep(&d) {
            out.push(d);
        }
        return Ok(out);
    }
    let limit = if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    };
    let mut mask: u64 = (1u64 << n) - 1;
    loop {
        let d = Determinant { ell, mask };
        if keep(&d) {
            out.push(d);
        }
        // Next mask with the same popcount (Gosper's hack).
        let c = mask & mask.wrapping_neg();
        let r = mask.wrapping_add(c);
        if r == 0 || r > limit {
            break;
        }
        let next = (((r ^ mask) >> 2) / c) | r;
        if next > limit {
            break;
        }
        mask = next;
    }
    Ok(out)
}

/// Parity of the permutation that sorts `v`.
fn permutation_sign(v: &[u32]) -> i64 {
    let mut inversions = 0usize;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Gaunt tables and two-electron integrals for one shell, with the Slater
/// parameters `F^(k)` as symbolic unknowns.
pub struct CoulombIntegrals {
    ell: u32,
    ranks: Vec<u32>,
    // [rank][(m1 + l)(2l+1) + (m2 + l)]
    gaunt: Vec<Vec<SqrtRational>>,
}

/// A vector of coefficients over the shell's ranks, `k = 0, 2, …, 2l`.
type RankVector = Vec<QuadraticSum>;

impl CoulombIntegrals {
    pub fn new(ell: u32) -> Result<Self> {
        check_oracle_shell(ell)?;
        let ranks = ShellPair::diagonal(ell).allowed_k();
        let l = ell as i32;
        let mut gaunt = Vec::with_capacity(ranks.len());
        for &k in &ranks {
            let mut table = Vec::new();
            for m1 in -l..=l {
                for m2 in -l..=l {
                    table.push(gaunt_ck(ell, m1, ell, m2, k)?);
                }
            }
            gaunt.push(table);
        }
        Ok(CoulombIntegrals { ell, ranks, gaunt })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    fn ck(&self, rank: usize, m1: i32, m2: i32) -> &SqrtRational {
        let l = self.ell as i32;
        let w = 2 * l + 1;
        &self.gaunt[rank][((m1 + l) * w + (m2 + l)) as usize]
    }

    fn zero_vector(&self) -> RankVector {
        vec![QuadraticSum::zero(); self.ranks.len()]
    }

    /// `⟨ab|cd⟩ = δ(s_a,s_c) δ(s_b,s_d) δ(m_a+m_b, m_c+m_d) Σ_k c^k(a,c) c^k(d,b) F^(k)`.
    pub fn two_electron(
        &self,
        a: SpinOrbital,
        b: SpinOrbital,
        c: SpinOrbital,
        d: SpinOrbital,
    ) -> RankVector {
        let mut out = self.zero_vector();
        if a.spin_up != c.spin_up
            || b.spin_up != d.spin_up
            || a.m_ell + b.m_ell != c.m_ell + d.m_ell
        {
            return out;
        }
        let one = int(1);
        for (r, slot) in out.iter_mut().enumerate() {
            let product = self.ck(r, a.m_ell, c.m_ell) * self.ck(r, d.m_ell, b.m_ell);
            slot.accumulate(&product, &one);
        }
        out
    }

    fn antisymmetrized(
        &self,
        a: SpinOrbital,
        b: SpinOrbital,
        c: SpinOrbital,
        d: SpinOrbital,
    ) -> RankVector {
        let direct = self.two_electron(a, b, c, d);
        let exchange = self.two_electron(a, b, d, c);
        direct.iter().zip(&exchange).map(|(x, y)| x - y).collect()
    }

    fn to_form(&self, v: RankVector) -> EnergyForm {
        let mut form = EnergyForm::zero(Basis::F, self.ell);
        for (&k, c) in self.ranks.iter().zip(&v) {
            form.add_coeff(k, c).expect("ranks belong to the F basis");
        }
        form
    }

    fn add_scaled(acc: &mut RankVector, v: &RankVector, sign: i64) {
        for (a, x) in acc.iter_mut().zip(v) {
            if sign >= 0 {
                *a += x;
            } else {
                *a -= x;
            }
        }
    }

    /// Matrix element `⟨d1| Σ_{i<j} 1/r_ij |d2⟩` in the F basis.
    pub fn element(&self, d1: &Determinant, d2: &Determinant) -> Result<EnergyForm> {
        if d1.ell != self.ell || d2.ell != self.ell || d1.n_electrons() != d2.n_electrons() {
            return Err(Error::ShellMismatch);
        }
        let diff = d1.mask ^ d2.mask;
        let level = diff.count_ones() / 2;
        if level > 2 {
            return Ok(EnergyForm::zero(Basis::F, self.ell));
        }
        let orbitals = d1.orbitals();
        let mut acc = self.zero_vector();
        match level {
            0 => {
                for (i, &a) in orbitals.iter().enumerate() {
                    for &b in &orbitals[i + 1..] {
                        Self::add_scaled(&mut acc, &self.antisymmetrized(a, b, a, b), 1);
                    }
                }
            }
            _ => {
                let holes: Vec<u32> = Determinant {
                    ell: self.ell,
                    mask: d1.mask & diff,
                }
                .indices()
                .collect();
                let particles: Vec<u32> = Determinant {
                    ell: self.ell,
                    mask: d2.mask & diff,
                }
                .indices()
                .collect();
                // Put each particle in its hole's slot; the sign of sorting
                // that list back into canonical order is the element's phase.
                let aligned: Vec<u32> = d1
                    .indices()
                    .map(|i| match holes.iter().position(|&h| h == i) {
                        Some(p) => particles[p],
                        None => i,
                    })
                    .collect();
                let sign = permutation_sign(&aligned);
                let so = |i: u32| SpinOrbital::from_index(self.ell, i);
                if level == 1 {
                    let (a, b) = (so(holes[0]), so(particles[0]));
                    let common = Determinant {
                        ell: self.ell,
                        mask: d1.mask & d2.mask,
                    };
                    for j in common.indices().map(so) {
                        Self::add_scaled(&mut acc, &self.antisymmetrized(a, j, b, j), sign);
                    }
                } else {
                    let (a, b) = (so(holes[0]), so(holes[1]));
                    let (c, d) = (so(particles[0]), so(particles[1]));
                    Self::add_scaled(&mut acc, &self.antisymmetrized(a, b, c, d), sign);
                }
            }
        }
        Ok(self.to_form(acc))
    }

    /// `J_ij − K_ij` for every ordered pair of spin-orbital indices, as
    /// rational rank vectors. Diagonal elements are sums of these.
    fn pair_energies(&self) -> Vec<Vec<BigRational>> {
        let width = ShellConfig::capacity(self.ell);
        let mut out = Vec::with_capacity((width * width) as usize);
        for i in 0..width {
            for j in 0..width {
                let (a, b) = (
                    SpinOrbital::from_index(self.ell, i),
                    SpinOrbital::from_index(self.ell, j),
                );
                let v = self.antisymmetrized(a, b, a, b);
                out.push(
                    v.iter()
                        .map(|q| {
                            q.as_rational()
                                .expect("diagonal Coulomb terms are rational")
                        })
                        .collect(),
                );
            }
        }
        out
    }
}

/// Matrix element between two determinants of the same `l^N` (F basis).
pub fn coulomb_element(ell: u32, d1: &Determinant, d2: &Determinant) -> Result<EnergyForm> {
    CoulombIntegrals::new(ell)?.element(d1, d2)
}

/// Sum of diagonal Coulomb elements over one `M_S` sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorTrace {
    pub ell: u32,
    pub n: u32,
    pub twice_ms: i32,
    pub trace: EnergyForm,
}

/// Sector trace in the F basis. Each diagonal element is `Σ_{i<j} (J_ij − K_ij)`,
/// so the trace only needs how often each orbital pair is co-occupied.
pub fn sector_trace_f(ell: u32, n: u32, twice_ms: i32) -> Result<EnergyForm> {
    ShellConfig::new(ell, n)?;
    if (n as i32 - twice_ms).rem_euclid(2) != 0 {
        return Err(Error::ImpossibleProjection { n, twice_ms });
    }
    let integrals = CoulombIntegrals::new(ell)?;
    let width = ShellConfig::capacity(ell) as usize;
    let mut occupancy = vec![0u64; width * width];
    for d in enumerate(ell, n, Some(twice_ms))? {
        let occ: Vec<u32> = d.indices().collect();
        for (x, &i) in occ.iter().enumerate() {
            for &j in &occ[x + 1..] {
                occupancy[i as usize * width + j as usize] += 1;
            }
        }
    }
    let pairs = integrals.pair_energies();
    let mut totals = vec![BigRational::zero(); integrals.ranks.len()];
    for (slot, &count) in occupancy.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let weight = BigRational::from_integer(BigInt::from(count));
        for (t, e) in totals.iter_mut().zip(&pairs[slot]) {
            *t += e * &weight;
        }
    }
    let coeffs = integrals.ranks.iter().copied().zip(totals);
    EnergyForm::from_rational_coeffs(Basis::F, ell, coeffs)
}

/// Sector trace converted to the E basis.
pub fn sector_trace(ell: u32, n: u32, twice_ms: i32) -> Result<SectorTrace> {
    let f = sector_trace_f(ell, n, twice_ms)?;
    Ok(SectorTrace {
        ell,
        n,
        twice_ms,
        trace: convert_form(&f, Basis::E)?,
    })
}

/// Average energy of the spin-`S` states from adjacent sector traces,
/// `[trace(M_S = S) − trace(M_S = S+1)] / H_l(N, S)`.
pub fn spin_resolved_average_oracle(ell: u32, n: u32, twice_s: u32) -> Result<EnergyForm> {
    let h = h_count(ell, n, twice_s as i32)?;
    if h.is_zero() {
        return Err(Error::EmptySpinLevel {
            ell,
            n,
            twice_s: twice_s as i32,
        });
    }
    let at = sector_trace_f(ell, n, twice_s as i32)?;
    let above = sector_trace_f(ell, n, twice_s as i32 + 2)?;
    let level_sum = convert_form(&(&at - &above), Basis::E)?;
    Ok(level_sum.scale(&(int(1) / BigRational::from_integer(BigInt::from(h)))))
}

/// Average over every determinant of `l^N`: all sector traces over `C(4l+2, N)`.
pub fn total_average_oracle(ell: u32, n: u32) -> Result<EnergyForm> {
    let mut total = EnergyForm::zero(Basis::F, ell);
    let mut count = 0usize;
    for ms in twice_projections(n) {
        total += &sector_trace_f(ell, n, ms)?;
        count += enumerate(ell, n, Some(ms))?.len();
    }
    let avg = total.scale(&(int(1) / int(count as i64)));
    convert_form(&avg, Basis::E)
}

/// The Coulomb matrix of `l^N` in the determinant basis; only nonzero
/// elements are stored, both triangles included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoulombMatrix {
    pub ell: u32,
    pub n: u32,
    pub determinants: Vec<Determinant>,
    pub elements: BTreeMap<(usize, usize), EnergyForm>,
}

impl CoulombMatrix {
    pub fn dimension(&self) -> usize {
        self.determinants.len()
    }

    pub fn to_basis(&self, basis: Basis) -> Result<CoulombMatrix> {
        let elements = self
            .elements
            .iter()
            .map(|(&ij, f)| convert_form(f, basis).map(|g| (ij, g)))
            .collect::<Result<_>>()?;
        Ok(CoulombMatrix {
            elements,
            ..self.clone()
        })
    }
}

/// Builds the full matrix (or one `M_S` block) in the F basis.
pub fn coulomb_matrix(
    ell: u32,
    n: u32,
    twice_ms: Option<i32>,
    dimension_cap: usize,
) -> Result<CoulombMatrix> {
    let determinants = enumerate(ell, n, twice_ms)?;
    if determinants.len() > dimension_cap {
        return Err(Error::DimensionCapExceeded {
            dim: determinants.len(),
            cap: dimension_cap,
        });
    }
    let integrals = CoulombIntegrals::new(ell)?;
    let mut elements = BTreeMap::new();
    for (i, d1) in determinants.iter().enumerate() {
        for (j, d2) in determinants.iter().enumerate() {
            let e = integrals.element(d1, d2)?;
            if !e.is_zero() {
                elements.insert((i, j), e);
            }
        }
    }
    Ok(CoulombMatrix {
        ell,
        n,
        determinants,
        elements,
    })
}

/// With every `E^λ = c` (equivalently `F^(0) = c`, higher `F^(k) = 0`),
/// is the full determinant-basis matrix exactly `N(N−1)/2 · c` times the
/// identity? Checked element by element.
pub fn degeneracy_check(ell: u32, n: u32, c: &BigRational) -> Result<bool> {
    degeneracy_check_capped(ell, n, c, DEFAULT_DIMENSION_CAP)
}

pub fn degeneracy_check_capped(
    ell: u32,
    n: u32,
    c: &BigRational,
    dimension_cap: usize,
) -> Result<bool> {
    let slater = e_to_f(&AomParams::uniform(ShellPair::diagonal(ell), c))?;
    let matrix = coulomb_matrix(ell, n, None, dimension_cap)?;
    let n_i = i64::from(n);
    let expected = QuadraticSum::from_rational(c * int(n_i * (n_i - 1) / 2));
    for i in 0..matrix.dimension() {
        for j in 0..matrix.dimension() {
            let value = matrix
                .elements
                .get(&(i, j))
                .map(|f| f.evaluate(slater.values()))
                .unwrap_or_default();
            let want = if i == j {
                expected.clone()
            } else {
                QuadraticSum::zero()
            };
            if value != want {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
