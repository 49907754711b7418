//! The invariant suite behind `shellavg verify`.
//!
//! Closed-form algebra is checked through `max_ell + 1`; anything that
//! enumerates determinants stops at `max_ell`. Checks run in a fixed order
//! and the report carries no timings, so output is reproducible.

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::{json, Value};
use shellavg_core::averages::{
    average_energy, spin_average, spin_average_two_electrons_closed,
    spin_average_two_electrons_sum_rule, spin_average_two_electrons_weighted,
};
use shellavg_core::counting::{
    expand_generating, expand_projection_generating, g_alternative, g_closed, h_count,
    mean_s_squared_census, mean_s_squared_closed, mean_spin_defect_census, mean_spin_defect_closed,
    twice_projections, twice_spins, FactoredForm, ShellConfig,
};
use shellavg_core::numerics::{int, ratio, QuadraticSum};
use shellavg_core::oracle::{
    degeneracy_check, enumerate, sector_trace, sector_trace_f, spin_resolved_average_oracle,
    total_average_oracle,
};
use shellavg_core::parametrization::{aom_coefficient, e_to_f, f_to_e};
use shellavg_core::wigner::{
    sum_rule_clebsch_gordan, sum_rule_lhs, sum_rule_rhs, three_j, three_j_int, HalfInt,
};
use shellavg_core::{AomParams, Basis, BigRational, EnergyForm, Parity, ShellPair, SlaterParams};

const MAX_REPORTED_FAILURES: usize = 10;

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub max_ell: u32,
    /// Largest electron count in the oracle suites; `None` means the whole shell.
    pub max_n: Option<u32>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_ell: 3,
            max_n: None,
        }
    }
}

impl Options {
    fn algebra_ell(&self) -> u32 {
        self.max_ell + 1
    }

    fn electron_counts(&self, ell: u32) -> std::ops::RangeInclusive<u32> {
        let cap = ShellConfig::capacity(ell);
        0..=self.max_n.map_or(cap, |n| n.min(cap))
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub cases: u64,
    pub failures: Vec<String>,
    failure_count: u64,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            cases: 0,
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_REPORTED_FAILURES {
            self.failures.push(what);
        }
    }

    /// Records an error raised while computing a case.
    fn guard<T>(
        &mut self,
        r: shellavg_core::Result<T>,
        what: impl FnOnce() -> String,
    ) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.cases += 1;
                self.fail(format!("{}: {e}", what()));
                None
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub options: Options,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "cases": c.cases,
                    "failed": c.failure_count,
                    "pass": c.passed(),
                    "failures": c.failures,
                })
            })
            .collect();
        json!({
            "max_ell": self.options.max_ell,
            "max_n": self.options.max_n.map_or(json!("all"), |n| json!(n)),
            "checks": checks,
            "pass": self.passed(),
        })
    }
}

pub fn run_suite(opts: &Options) -> Report {
    let suites: [fn(&Options) -> Check; 17] = [
        three_j_symmetry,
        orthogonality,
        sum_rule,
        transform_roundtrip,
        lambda_symmetry,
        uniform_collapse,
        count_three_way,
        count_symmetry,
        spin_defect,
        s_squared,
        average_of_averages,
        two_electron,
        uniform_spin_averages,
        oracle_counts,
        oracle_averages,
        degeneracy,
        commuting_diagram,
    ];
    Report {
        options: *opts,
        checks: suites.iter().map(|f| f(opts)).collect(),
    }
}

fn three_j_symmetry(_: &Options) -> Check {
    let mut c = Check::new("three_j_symmetry");
    for a in 0i32..=6 {
        for b in 0..=6 {
            for d in 0..=6 {
                if (a + b + d) % 2 != 0 {
                    continue;
                }
                let odd = (a + b + d) % 4 == 2;
                for ma in (-a..=a).step_by(2) {
                    for mb in (-b..=b).step_by(2) {
                        let md = -ma - mb;
                        if md.abs() > d {
                            continue;
                        }
                        let j = [a, b, d].map(HalfInt::from_twice);
                        let m = [ma, mb, md].map(HalfInt::from_twice);
                        let what = || format!("2j = {:?}, 2m = {:?}", [a, b, d], [ma, mb, md]);
                        let all = (|| {
                            Ok::<_, shellavg_core::Error>((
                                three_j(j[0], j[1], j[2], m[0], m[1], m[2])?,
                                three_j(j[1], j[2], j[0], m[1], m[2], m[0])?,
                                three_j(j[1], j[0], j[2], m[1], m[0], m[2])?,
                                three_j(j[0], j[1], j[2], -m[0], -m[1], -m[2])?,
                            ))
                        })();
                        let Some((base, cyc, swap, flip)) = c.guard(all, what) else {
                            continue;
                        };
                        let phased = if odd { -base.clone() } else { base.clone() };
                        c.expect(cyc == base && swap == phased && flip == phased, what);
                    }
                }
            }
        }
    }
    c
}

fn orthogonality(o: &Options) -> Check {
    let mut c = Check::new("three_j_orthogonality");
    for ell in 0..=o.algebra_ell() {
        let l = ell as i32;
        for m in -l..=l {
            for mp in -l..=l {
                let mut acc = QuadraticSum::zero();
                for big_l in 0..=2 * l {
                    let Some(v) = c.guard(three_j_int(l, l, big_l, m, mp, -m - mp), || {
                        format!("l = {ell}, m = {m}, m' = {mp}, L = {big_l}")
                    }) else {
                        continue;
                    };
                    acc += &QuadraticSum::from_rational(v.square() * int(i64::from(2 * big_l + 1)));
                }
                c.expect(acc == QuadraticSum::one(), || {
                    format!("l = {ell}, m = {m}, m' = {mp}: sum = {acc}")
                });
            }
        }
    }
    c
}

fn sum_rule(o: &Options) -> Check {
    let mut c = Check::new("sum_rule");
    for ell in 0..=o.algebra_ell() {
        let l = ell as i32;
        for parity in [Parity::Even, Parity::Odd] {
            for m in -l..=l {
                for mp in -l..=l {
                    for mu in -l..=l {
                        for mup in -l..=l {
                            let what = || format!("l = {ell}, {parity}, ({m},{mp},{mu},{mup})");
                            let both = sum_rule_lhs(ell, parity, m, mp, mu, mup).and_then(|x| {
                                sum_rule_clebsch_gordan(ell, parity, m, mp, mu, mup).map(|y| (x, y))
                            });
                            let Some((lhs, cg)) = c.guard(both, what) else {
                                continue;
                            };
                            let rhs = sum_rule_rhs(parity, m, mp, mu, mup);
                            c.expect(lhs == rhs && cg == lhs, || {
                                format!("{}: LHS {lhs}, CG {cg}, RHS {rhs}", what())
                            });
                        }
                    }
                }
            }
        }
    }
    c
}

fn sample_values(indices: &[u32], salt: i64) -> Vec<QuadraticSum> {
    indices
        .iter()
        .map(|&i| QuadraticSum::from_rational(ratio(3 * i64::from(i) + salt, 2 * i64::from(i) + 7)))
        .collect()
}

fn transform_roundtrip(o: &Options) -> Check {
    let mut c = Check::new("transform_roundtrip");
    for ell in 0..=o.algebra_ell() {
        for ell_prime in 0..=o.algebra_ell() {
            let pair = ShellPair::new(ell, ell_prime);
            let what = || format!("(l, l') = ({ell}, {ell_prime})");
            let forward = AomParams::from_list(pair, sample_values(&pair.lambdas(), 1))
                .and_then(|p| e_to_f(&p).and_then(|f| f_to_e(&f)).map(|back| back == p));
            if let Some(ok) = c.guard(forward, what) {
                c.expect(ok, || format!("{}: E -> F -> E", what()));
            }
            let backward = SlaterParams::from_list(pair, sample_values(&pair.allowed_k(), -2))
                .and_then(|p| f_to_e(&p).and_then(|e| e_to_f(&e)).map(|back| back == p));
            if let Some(ok) = c.guard(backward, what) {
                c.expect(ok, || format!("{}: F -> E -> F", what()));
            }
        }
    }
    c
}

fn lambda_symmetry(o: &Options) -> Check {
    let mut c = Check::new("lambda_sign_symmetry");
    for ell in 0..=o.algebra_ell() {
        let pair = ShellPair::diagonal(ell);
        for k in pair.allowed_k() {
            for lambda in 1..=ell as i32 {
                let what = || format!("l = {ell}, k = {k}, lambda = {lambda}");
                let both = aom_coefficient(pair, lambda, k)
                    .and_then(|a| aom_coefficient(pair, -lambda, k).map(|b| a == b));
                if let Some(ok) = c.guard(both, what) {
                    c.expect(ok, what);
                }
            }
        }
    }
    c
}

fn uniform_collapse(o: &Options) -> Check {
    let mut c = Check::new("uniform_parameters_collapse");
    let value = ratio(5, 3);
    for ell in 0..=o.algebra_ell() {
        let what = || format!("l = {ell}");
        let Some(f) = c.guard(
            e_to_f(&AomParams::uniform(ShellPair::diagonal(ell), &value)),
            what,
        ) else {
            continue;
        };
        let ok = f.values().iter().all(|(&k, v)| {
            let want = if k == 0 { value.clone() } else { int(0) };
            *v == QuadraticSum::from_rational(want)
        });
        c.expect(ok, what);
    }
    c
}

fn count_three_way(o: &Options) -> Check {
    let mut c = Check::new("count_three_way");
    for ell in 0..=o.algebra_ell() {
        let what = || format!("l = {ell}");
        let tables = expand_generating(ell).and_then(|t| {
            let a = expand_projection_generating(ell, FactoredForm::SpinProduct)?;
            let b = expand_projection_generating(ell, FactoredForm::Trinomial)?;
            Ok((t, a, b))
        });
        let Some((table, spin, tri)) = c.guard(tables, what) else {
            continue;
        };
        for n in 0..=ShellConfig::capacity(ell) {
            for tms in twice_projections(n) {
                let what = || format!("l = {ell}, N = {n}, 2M_S = {tms}");
                let closed = g_closed(ell, n, tms)
                    .and_then(|g| g_alternative(ell, n, tms).map(|alt| (g, alt)));
                let Some((g, alt)) = c.guard(closed, what) else {
                    continue;
                };
                let expanded = BigUint::from(table.g(n, tms));
                let ok = expanded == g
                    && alt == g
                    && spin.get(n, tms) == tri.get(n, tms)
                    && BigUint::from(spin.get(n, tms)) == g;
                c.expect(ok, || {
                    format!(
                        "{}: expansion {expanded}, closed {g}, alternative {alt}",
                        what()
                    )
                });
            }
        }
    }
    c
}

fn count_symmetry(o: &Options) -> Check {
    let mut c = Check::new("count_symmetry_and_unimodality");
    for ell in 0..=o.algebra_ell() {
        let cap = ShellConfig::capacity(ell);
        for n in 0..=cap {
            let upper: Vec<BigUint> = twice_projections(n)
                .filter(|&t| t >= 0)
                .filter_map(|t| g_closed(ell, n, t).ok())
                .collect();
            c.expect(upper.windows(2).all(|w| w[0] <= w[1]), || {
                format!("l = {ell}, N = {n}: G not unimodal")
            });
            for tms in twice_projections(n) {
                let hole = g_closed(ell, cap - n, tms);
                c.expect(g_closed(ell, n, tms) == hole, || {
                    format!("l = {ell}, N = {n}, 2M_S = {tms}: particle-hole")
                });
            }
        }
    }
    c
}

fn spin_defect(o: &Options) -> Check {
    let mut c = Check::new("spin_defect_consistency");
    for ell in 0..=o.algebra_ell() {
        for n in 0..=ShellConfig::capacity(ell) {
            let what = || format!("l = {ell}, N = {n}");
            let both = mean_spin_defect_census(ell, n)
                .and_then(|a| mean_spin_defect_closed(ell, n).map(|b| (a, b)));
            if let Some((census, closed)) = c.guard(both, what) {
                c.expect(census == closed, || {
                    format!("{}: {census} vs {closed}", what())
                });
            }
        }
    }
    c
}

fn s_squared(o: &Options) -> Check {
    let mut c = Check::new("mean_s_squared");
    for ell in 0..=o.algebra_ell() {
        for n in 0..=ShellConfig::capacity(ell) {
            let what = || format!("l = {ell}, N = {n}");
            let both = mean_s_squared_census(ell, n)
                .and_then(|a| mean_s_squared_closed(ell, n).map(|b| (a, b)));
            if let Some((census, closed)) = c.guard(both, what) {
                c.expect(census == closed, || {
                    format!("{}: {census} vs {closed}", what())
                });
            }
        }
    }
    c
}

/// `Σ_S (2S+1) H(N,S) · X_S / C(4l+2, N)` for per-spin forms `X_S`.
fn multiplicity_average(
    ell: u32,
    n: u32,
    per_spin: impl Fn(u32) -> shellavg_core::Result<EnergyForm>,
) -> shellavg_core::Result<EnergyForm> {
    let mut acc = EnergyForm::zero(Basis::E, ell);
    let mut states = BigUint::zero();
    for ts in twice_spins(n) {
        let h = h_count(ell, n, ts as i32)?;
        if h.is_zero() {
            continue;
        }
        let weight = &h * BigUint::from(ts + 1);
        acc += &per_spin(ts)?.scale(&BigRational::from_integer(weight.clone().into()));
        states += weight;
    }
    Ok(acc.scale(&(int(1) / BigRational::from_integer(states.into()))))
}

fn average_of_averages(o: &Options) -> Check {
    let mut c = Check::new("average_of_spin_averages");
    for ell in 0..=o.max_ell {
        for n in 0..=ShellConfig::capacity(ell) {
            let what = || format!("l = {ell}, N = {n}");
            let both = multiplicity_average(ell, n, |ts| spin_average(ell, n, ts))
                .and_then(|a| average_energy(ell, n).map(|b| (a, b)));
            if let Some((lhs, rhs)) = c.guard(both, what) {
                c.expect(lhs == rhs, || format!("{}: {lhs} vs {rhs}", what()));
            }
        }
    }
    c
}

fn two_electron(o: &Options) -> Check {
    let mut c = Check::new("two_electron_specialization");
    for ell in 0..=o.algebra_ell() {
        for ts in [0, 2] {
            if ell == 0 && ts == 2 {
                continue;
            }
            let what = || format!("l = {ell}, 2S = {ts}");
            let all = (|| {
                Ok::<_, shellavg_core::Error>([
                    spin_average(ell, 2, ts)?,
                    spin_average_two_electrons_weighted(ell, ts)?,
                    spin_average_two_electrons_closed(ell, ts)?,
                    spin_average_two_electrons_sum_rule(ell, ts)?,
                ])
            })();
            if let Some(forms) = c.guard(all, what) {
                c.expect(forms.iter().all(|f| *f == forms[0]), || {
                    format!("{}: {}", what(), forms.map(|f| f.to_string()).join(" | "))
                });
            }
        }
    }
    c
}

fn uniform_spin_averages(o: &Options) -> Check {
    let mut c = Check::new("uniform_parameters_degenerate_spins");
    let value = ratio(3, 7);
    for ell in 0..=o.algebra_ell() {
        for n in 0..=ShellConfig::capacity(ell) {
            let pairs = i64::from(n * n.saturating_sub(1) / 2);
            let want = QuadraticSum::from_rational(&value * int(pairs));
            for ts in twice_spins(n) {
                if h_count(ell, n, ts as i32).is_ok_and(|h| h.is_zero()) {
                    continue;
                }
                let what = || format!("l = {ell}, N = {n}, 2S = {ts}");
                if let Some(f) = c.guard(spin_average(ell, n, ts), what) {
                    c.expect(f.evaluate_uniform(&value) == want, what);
                }
            }
        }
    }
    c
}

fn oracle_counts(o: &Options) -> Check {
    let mut c = Check::new("oracle_determinant_counts");
    for ell in 0..=o.max_ell {
        for n in o.electron_counts(ell) {
            for tms in twice_projections(n) {
                let what = || format!("l = {ell}, N = {n}, 2M_S = {tms}");
                let both = enumerate(ell, n, Some(tms))
                    .and_then(|d| g_closed(ell, n, tms).map(|g| (d.len(), g)));
                if let Some((found, g)) = c.guard(both, what) {
                    c.expect(BigUint::from(found) == g, || {
                        format!("{}: {found} vs {g}", what())
                    });
                }
            }
        }
    }
    c
}

fn oracle_averages(o: &Options) -> Check {
    let mut c = Check::new("oracle_averages");
    for ell in 0..=o.max_ell {
        for n in o.electron_counts(ell) {
            let what = || format!("l = {ell}, N = {n}");
            let total =
                total_average_oracle(ell, n).and_then(|a| average_energy(ell, n).map(|b| (a, b)));
            if let Some((oracle, closed)) = c.guard(total, what) {
                c.expect(oracle == closed, || {
                    format!("{}: total {oracle} vs {closed}", what())
                });
            }
            for ts in twice_spins(n) {
                if h_count(ell, n, ts as i32).is_ok_and(|h| h.is_zero()) {
                    continue;
                }
                let what = || format!("l = {ell}, N = {n}, 2S = {ts}");
                let both = spin_resolved_average_oracle(ell, n, ts)
                    .and_then(|a| spin_average(ell, n, ts).map(|b| (a, b)));
                if let Some((oracle, closed)) = c.guard(both, what) {
                    c.expect(oracle == closed, || {
                        format!("{}: {oracle} vs {closed}", what())
                    });
                }
            }
        }
    }
    c
}

fn degeneracy(o: &Options) -> Check {
    let mut c = Check::new("maximal_degeneracy");
    let value = ratio(2, 3);
    for (ell, n) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
        if ell > o.max_ell || o.max_n.is_some_and(|m| n > m) {
            continue;
        }
        let what = || format!("l = {ell}, N = {n}");
        if let Some(ok) = c.guard(degeneracy_check(ell, n, &value), what) {
            c.expect(ok, what);
        }
    }
    c
}

fn commuting_diagram(o: &Options) -> Check {
    let mut c = Check::new("oracle_basis_independence");
    for ell in 1..=o.max_ell {
        let pair = ShellPair::diagonal(ell);
        let params = AomParams::from_list(pair, sample_values(&pair.lambdas(), 4))
            .and_then(|e| e_to_f(&e).map(|f| (e, f)));
        let Some((aom, slater)) = c.guard(params, || format!("l = {ell}")) else {
            continue;
        };
        for n in o.electron_counts(ell).filter(|&n| n <= 3) {
            for tms in twice_projections(n) {
                let what = || format!("l = {ell}, N = {n}, 2M_S = {tms}");
                let both = sector_trace_f(ell, n, tms).and_then(|f| {
                    sector_trace(ell, n, tms)
                        .map(|e| (f.evaluate(slater.values()), e.trace.evaluate(aom.values())))
                });
                if let Some((in_f, in_e)) = c.guard(both, what) {
                    c.expect(in_f == in_e, || format!("{}: {in_f} vs {in_e}", what()));
                }
            }
        }
    }
    c
}
