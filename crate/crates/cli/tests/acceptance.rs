//! The acceptance gate: ten criteria, each with its own time budget. Every
//! criterion prints one PASS/FAIL line; the test fails if any of them does.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::Value;
use shellavg_cli::run;
use shellavg_core::averages::{
    average_energy, spin_average, spin_average_two_electrons_closed,
    spin_average_two_electrons_weighted, two_electron_terms, TermLabel,
};
use shellavg_core::counting::{
    expand_generating, g_alternative, g_closed, h_count, mean_s_squared_census,
    mean_s_squared_closed, mean_spin_defect_census, mean_spin_defect_closed, twice_projections,
    twice_spins, ShellConfig,
};
use shellavg_core::numerics::{int, ratio, QuadraticSum};
use shellavg_core::oracle::{
    coulomb_element, degeneracy_check, enumerate, spin_resolved_average_oracle,
    total_average_oracle, Determinant, SpinOrbital,
};
use shellavg_core::parametrization::{convert_form, e_to_f, f_to_e};
use shellavg_core::wigner::{sum_rule_lhs, sum_rule_rhs};
use shellavg_core::{AomParams, Basis, EnergyForm, Parity, ShellPair, SlaterParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e_form(ell: u32, coeffs: &[(u32, (i64, i64))]) -> EnergyForm {
    EnergyForm::from_rational_coeffs(
        Basis::E,
        ell,
        coeffs.iter().map(|&(i, (p, q))| (i, ratio(p, q))),
    )
    .unwrap()
}

fn f_form(ell: u32, coeffs: &[(u32, (i64, i64))]) -> EnergyForm {
    EnergyForm::from_rational_coeffs(
        Basis::F,
        ell,
        coeffs.iter().map(|&(i, (p, q))| (i, ratio(p, q))),
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        ["shellavg", "count", "--ell", "f", "--n", "6"],
        &mut out,
        &mut err,
    );
    ensure(code == 0, || {
        format!("exit {code}: {}", String::from_utf8_lossy(&err))
    })?;
    let v: Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let counts = |key: &str, twice: &str| -> Vec<(i64, u64)> {
        v[key]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r[twice].as_i64().unwrap(), r["count"].as_u64().unwrap()))
            .collect()
    };
    let g: Vec<u64> = counts("by_ms", "twice_ms")
        .into_iter()
        .filter(|&(t, _)| t >= 0)
        .map(|(_, c)| c)
        .collect();
    ensure(g == [7, 147, 735, 1225], || format!("G = {g:?}"))?;
    let h = counts("by_spin", "twice_s");
    let values: Vec<u64> = h.iter().map(|&(_, c)| c).collect();
    ensure(values == [7, 140, 588, 490], || format!("H = {values:?}"))?;
    let states: u64 = h.iter().map(|&(t, c)| (t as u64 + 1) * c).sum();
    ensure(states == 3003, || format!("sum (2S+1) H = {states}"))?;
    Ok("G = 7,147,735,1225; H = 7,140,588,490; 3003 states".into())
}

fn criterion_2() -> Outcome {
    let mut cases = 0;
    for ell in 0..=4 {
        let table = expand_generating(ell).map_err(|e| e.to_string())?;
        for n in 0..=ShellConfig::capacity(ell) {
            for tms in twice_projections(n) {
                let closed = g_closed(ell, n, tms).map_err(|e| e.to_string())?;
                let alt = g_alternative(ell, n, tms).map_err(|e| e.to_string())?;
                let expanded = BigUint::from(table.g(n, tms));
                ensure(expanded == closed && alt == closed, || {
                    format!("l = {ell}, N = {n}, 2M_S = {tms}: {expanded} / {closed} / {alt}")
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (l, N, M_S) cases"))
}

fn criterion_3() -> Outcome {
    let mut cases = 0;
    for ell in 0..=4u32 {
        let l = ell as i32;
        for parity in [Parity::Even, Parity::Odd] {
            for m in -l..=l {
                for mp in -l..=l {
                    for mu in -l..=l {
                        for mup in -l..=l {
                            let lhs = sum_rule_lhs(ell, parity, m, mp, mu, mup)
                                .map_err(|e| e.to_string())?;
                            let rhs = sum_rule_rhs(parity, m, mp, mu, mup);
                            ensure(lhs == rhs, || {
                                format!(
                                    "l = {ell}, {parity}, ({m},{mp},{mu},{mup}): {lhs} vs {rhs}"
                                )
                            })?;
                            cases += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cases} quadruples"))
}

/// Term energies of p^2 from single determinants and one block trace.
fn p2_terms_from_determinants() -> [(TermLabel, EnergyForm); 3] {
    let up = |m| SpinOrbital::new(m, true);
    let down = |m| SpinOrbital::new(m, false);
    let det = |o: &[SpinOrbital]| Determinant::from_orbitals(1, o).unwrap();
    let diag = |d: &Determinant| coulomb_element(1, d, d).unwrap();
    // M_S = 1, M_L = 1 holds only 3P; M_S = 0, M_L = 2 holds only 1D.
    let triplet = diag(&det(&[up(1), up(0)]));
    let d_term = diag(&det(&[up(1), down(1)]));
    // M_S = 0, M_L = 0 holds one state each of 1S, 3P and 1D.
    let block = [
        det(&[up(1), down(-1)]),
        det(&[up(-1), down(1)]),
        det(&[up(0), down(0)]),
    ];
    let mut trace = EnergyForm::zero(Basis::F, 1);
    for d in &block {
        trace += &diag(d);
    }
    let singlet_s = &(&trace - &triplet) - &d_term;
    [
        (TermLabel::new(0, 0), singlet_s),
        (TermLabel::new(2, 1), triplet),
        (TermLabel::new(0, 2), d_term),
    ]
}

fn criterion_4() -> Outcome {
    let terms = two_electron_terms(1).map_err(|e| e.to_string())?;
    let find = |label: &str| -> Result<EnergyForm, String> {
        terms
            .iter()
            .find(|(t, _)| t.to_string() == label)
            .map(|(_, f)| f.clone())
            .ok_or_else(|| format!("term {label} missing"))
    };
    let expected_e = [
        ("1S", e_form(1, &[(0, (1, 1))])),
        ("1D", e_form(1, &[(0, (2, 5)), (1, (3, 5))])),
        ("3P", e_form(1, &[(1, (1, 1))])),
    ];
    let expected_f = [
        ("1S", f_form(1, &[(0, (1, 1)), (2, (2, 5))])),
        ("1D", f_form(1, &[(0, (1, 1)), (2, (1, 25))])),
        ("3P", f_form(1, &[(0, (1, 1)), (2, (-1, 5))])),
    ];
    for ((label, e), (_, f)) in expected_e.iter().zip(&expected_f) {
        let got = find(label)?;
        ensure(&got == e, || format!("{label}: {got} vs {e}"))?;
        let in_f = convert_form(&got, Basis::F).map_err(|e| e.to_string())?;
        ensure(&in_f == f, || format!("{label} in F: {in_f} vs {f}"))?;
    }
    for (label, oracle) in p2_terms_from_determinants() {
        let want = expected_f
            .iter()
            .find(|(l, _)| *l == label.to_string())
            .map(|(_, f)| f)
            .unwrap();
        ensure(&oracle == want, || {
            format!("oracle {label}: {oracle} vs {want}")
        })?;
    }
    Ok("1S, 1D, 3P match in both bases and against determinants".into())
}

fn criterion_5() -> Outcome {
    for ell in 0..=4 {
        for ts in [0, 2] {
            if ell == 0 && ts == 2 {
                continue;
            }
            let closed = spin_average_two_electrons_closed(ell, ts).map_err(|e| e.to_string())?;
            let weighted =
                spin_average_two_electrons_weighted(ell, ts).map_err(|e| e.to_string())?;
            let general = spin_average(ell, 2, ts).map_err(|e| e.to_string())?;
            ensure(closed == weighted && closed == general, || {
                format!("l = {ell}, 2S = {ts}: {closed} / {weighted} / {general}")
            })?;
        }
    }
    Ok("singlet and triplet averages for l <= 4".into())
}

fn criterion_6() -> Outcome {
    let mut cases = 0;
    for ell in 0..=3 {
        for n in 0..=ShellConfig::capacity(ell) {
            for ts in twice_spins(n) {
                let h = h_count(ell, n, ts as i32).map_err(|e| e.to_string())?;
                if h.is_zero() {
                    continue;
                }
                let oracle = spin_resolved_average_oracle(ell, n, ts).map_err(|e| e.to_string())?;
                let closed = spin_average(ell, n, ts).map_err(|e| e.to_string())?;
                ensure(oracle == closed, || {
                    format!("l = {ell}, N = {n}, 2S = {ts}: {oracle} vs {closed}")
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (l, N, S) levels"))
}

fn criterion_7() -> Outcome {
    let mut cases = 0;
    for ell in 0..=3 {
        for n in 0..=ShellConfig::capacity(ell) {
            let oracle = total_average_oracle(ell, n).map_err(|e| e.to_string())?;
            let closed = average_energy(ell, n).map_err(|e| e.to_string())?;
            ensure(oracle == closed, || {
                format!("l = {ell}, N = {n}: {oracle} vs {closed}")
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} configurations"))
}

fn criterion_8() -> Outcome {
    let c = ratio(5, 4);
    let mut dims = Vec::new();
    for (ell, n) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
        let ok = degeneracy_check(ell, n, &c).map_err(|e| e.to_string())?;
        ensure(ok, || {
            format!("l = {ell}, N = {n} is not a multiple of the identity")
        })?;
        dims.push(enumerate(ell, n, None).map_err(|e| e.to_string())?.len());
    }
    Ok(format!("dimensions {dims:?}"))
}

fn criterion_9() -> Outcome {
    for ell in 0..=4 {
        for n in 0..=ShellConfig::capacity(ell) {
            let closed = mean_s_squared_closed(ell, n).map_err(|e| e.to_string())?;
            let census = mean_s_squared_census(ell, n).map_err(|e| e.to_string())?;
            ensure(closed == census, || {
                format!("l = {ell}, N = {n}: {closed} vs {census}")
            })?;
        }
    }
    let f6 = mean_s_squared_closed(3, 6).map_err(|e| e.to_string())?;
    ensure(f6 == ratio(36, 13), || format!("f^6 gives {f6}"))?;
    Ok("closed form = census; f^6 gives 36/13".into())
}

fn criterion_10() -> Outcome {
    // A linear map is inverted exactly iff every unit vector comes back.
    let unit = |len: usize, at: usize| -> Vec<QuadraticSum> {
        (0..len)
            .map(|i| QuadraticSum::from_rational(int(i64::from(i == at))))
            .collect()
    };
    for ell in 0..=4 {
        for ell_prime in 0..=4 {
            let pair = ShellPair::new(ell, ell_prime);
            let lambdas = pair.lambdas().len();
            for at in 0..lambdas {
                let p = AomParams::from_list(pair, unit(lambdas, at)).map_err(|e| e.to_string())?;
                let back = e_to_f(&p)
                    .and_then(|f| f_to_e(&f))
                    .map_err(|e| e.to_string())?;
                ensure(back == p, || {
                    format!("({ell}, {ell_prime}): E -> F -> E at {at}")
                })?;
            }
            let ks = pair.allowed_k().len();
            for at in 0..ks {
                let p = SlaterParams::from_list(pair, unit(ks, at)).map_err(|e| e.to_string())?;
                let back = f_to_e(&p)
                    .and_then(|e| e_to_f(&e))
                    .map_err(|e| e.to_string())?;
                ensure(back == p, || {
                    format!("({ell}, {ell_prime}): F -> E -> F at {at}")
                })?;
            }
        }
        for n in 0..=ShellConfig::capacity(ell) {
            let census = mean_spin_defect_census(ell, n).map_err(|e| e.to_string())?;
            let closed = mean_spin_defect_closed(ell, n).map_err(|e| e.to_string())?;
            ensure(census == closed, || {
                format!("l = {ell}, N = {n}: {census} vs {closed}")
            })?;
        }
    }
    Ok("roundtrips for l, l' <= 4 and the spin-defect identity".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        (
            "f^6 spin counts via the CLI",
            criterion_1,
            Duration::from_secs(1),
        ),
        (
            "three-way count equality, l <= 4",
            criterion_2,
            Duration::from_secs(10),
        ),
        (
            "3-jm sum rule, l <= 4",
            criterion_3,
            Duration::from_secs(30),
        ),
        ("p^2 term energies", criterion_4, Duration::from_secs(60)),
        (
            "two-electron spin averages",
            criterion_5,
            Duration::from_secs(60),
        ),
        (
            "spin-resolved averages vs oracle, l <= 3",
            criterion_6,
            Duration::from_secs(60),
        ),
        (
            "configuration averages vs oracle, l <= 3",
            criterion_7,
            Duration::from_secs(60),
        ),
        ("maximal degeneracy", criterion_8, Duration::from_secs(60)),
        ("mean S^2", criterion_9, Duration::from_secs(60)),
        (
            "transform roundtrips and spin-defect identity",
            criterion_10,
            Duration::from_secs(60),
        ),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let verdict = match &outcome {
            Ok(_) if elapsed <= *budget => "PASS",
            _ => "FAIL",
        };
        let detail = match &outcome {
            Ok(d) if elapsed <= *budget => d.clone(),
            Ok(_) => format!("over budget of {budget:?}"),
            Err(e) => e.clone(),
        };
        println!(
            "criterion {:>2}: {verdict} [{:.3}s / {}s] {name}: {detail}",
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if verdict == "FAIL" {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
