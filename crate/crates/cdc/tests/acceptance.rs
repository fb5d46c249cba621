//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cdc_core::gamma::{check_curvature, CurvatureOptions};
use cdc_core::group::dual::{check_consistency, CONSISTENCY_TOL};
use cdc_core::group::suites::{check_gamma_routes, check_group_curvature, check_two_convexity, ROUTE_TOL};
use cdc_core::group::{FiniteGroup, LengthFunction, MultiplierSemigroup};
use cdc_core::semigroup::Semigroup;
use cdc_core::theorems::atoms::{sweep_conclusions, ATOMS_PER_TIME, ATOM_TIMES};
use cdc_core::theorems::axioms::check_axioms;
use cdc_core::theorems::duality::sweep_theorem01;
use cdc_core::theorems::hypotheses::estimate_hypotheses;
use cdc_core::theorems::meyer::{verify_meyer_identity, GAMMA_CONVENTION, MEYER_TOL};
use cdc_core::theorems::oscillation::{check_john_nirenberg, check_square_comparison, sweep_john_nirenberg, JN_IDENTITY_TOL};
use cdc_core::theorems::subordination::{
    check_poisson_routes, check_square_routes, check_subordination_samples, sweep_carleson, verify_carleson, CARLESON_BMO_CONSTANT,
    ROUTE_TOL as POISSON_ROUTE_TOL,
};
use cdc_core::theorems::Chain;
use cdc_core::zoo::{self, Family};

type Outcome = Result<(bool, String), String>;

const SEED: u64 = 20_251_018;

fn chain(family: Family, n: usize) -> Result<Chain, String> {
    family.build(n, SEED).and_then(Chain::new).map_err(|e| format!("{}: {e}", family.label(n)))
}

fn criterion(id: usize, title: &str, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let (ok, detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("{verdict} {id:>2} {title} [{:.1}s] {detail}", start.elapsed().as_secs_f64());
    ok
}

fn axioms() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0f64, String::new());
    let mut failures = Vec::new();
    let mut count = 0;
    for family in Family::ALL {
        for n in [2, 4, 8, 16, 32, 64] {
            let c = chain(family, n)?;
            let r = check_axioms(&c.sd, Some(&c.generator), 8, SEED, &c.grid());
            count += 1;
            if !r.passed {
                failures.push(family.label(n));
            }
            if r.kadison_schwarz > worst.0 {
                worst = (r.kadison_schwarz, family.label(n));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < Duration::from_secs(30);
    Ok((ok, format!("{count} generators, failures {failures:?}, worst Kadison-Schwarz {:.1e} on {}, {:.1}s < 30s", worst.0, worst.1, elapsed.as_secs_f64())))
}

fn meyer() -> Outcome {
    let mut pairs = 0;
    let mut constants = Vec::new();
    let mut residual = 0.0f64;
    let mut ok = true;
    for (family, n) in [(Family::Cycle, 8), (Family::RandomReversible, 6), (Family::BirthDeath, 7), (Family::Star, 5)] {
        let r = verify_meyer_identity(&chain(family, n)?, 50, SEED);
        pairs += r.pairs;
        constants.push(r.constant);
        residual = residual.max(r.residual);
        ok &= r.passed && r.constant == Some(2);
    }
    ok &= pairs >= 200 && residual < MEYER_TOL;
    Ok((ok, format!("{pairs} pairs, c = {constants:?}, residual {residual:.1e} < {MEYER_TOL:.0e}, convention `{GAMMA_CONVENTION}`")))
}

fn dual_paths() -> Outcome {
    let (mut gs, mut gg, mut gp, mut samples) = (0.0f64, 0.0f64, 0.0f64, 0);
    for (family, n, k) in [(Family::Cycle, 8, 25), (Family::RandomReversible, 12, 25), (Family::Path, 16, 25), (Family::BirthDeath, 10, 25)] {
        let c = chain(family, n)?;
        let r = check_square_routes(&c, k, SEED).map_err(|e| e.to_string())?;
        let p = check_poisson_routes(&c, k, SEED);
        gs = gs.max(r.gap_s);
        gg = gg.max(r.gap_g);
        gp = gp.max(p.gap);
        samples += k;
    }
    let ok = samples >= 100 && gs < POISSON_ROUTE_TOL && gg < POISSON_ROUTE_TOL && gp < POISSON_ROUTE_TOL;
    Ok((ok, format!("{samples} samples, S gap {gs:.1e}, G gap {gg:.1e}, Poisson gap {gp:.1e}, all < {POISSON_ROUTE_TOL:.0e}")))
}

fn groups() -> Result<Vec<FiniteGroup>, String> {
    [
        FiniteGroup::cyclic(6),
        FiniteGroup::klein(),
        FiniteGroup::symmetric(3),
        FiniteGroup::dihedral(4),
        FiniteGroup::quaternion(),
        FiniteGroup::symmetric(4),
    ]
    .into_iter()
    .collect::<Result<_, _>>()
    .map_err(|e| e.to_string())
}

fn curvature() -> Outcome {
    let mut group_cases = 0;
    let mut group_fail = Vec::new();
    let mut word_lengths = Vec::new();
    for g in groups()? {
        let mut lengths = vec![LengthFunction::indicator(&g), LengthFunction::random_cocycle(&g, SEED)];
        if let Ok(w) = LengthFunction::word_length(&g) {
            if MultiplierSemigroup::new(g.clone(), w.clone()).is_ok() {
                word_lengths.push(g.name().to_string());
                lengths.push(Ok(w));
            }
        }
        for psi in lengths {
            let psi = psi.map_err(|e| e.to_string())?;
            let ms = MultiplierSemigroup::new(g.clone(), psi).map_err(|e| e.to_string())?;
            let r = check_group_curvature(&ms, 5, SEED);
            group_cases += 1;
            if !(r.holds && r.agrees) {
                group_fail.push(format!("{}/{}", r.group, r.length));
            }
        }
    }
    let mut markov = 0;
    let mut disagree = Vec::new();
    let mut curved = Vec::new();
    for family in Family::ALL {
        for n in [4, 8, 16] {
            let c = chain(family, n)?;
            let r = check_curvature(&c.generator, &c.sd, &CurvatureOptions { grid: None, samples: 8, seed: SEED });
            markov += 1;
            if !r.cross_check_agrees {
                disagree.push(family.label(n));
            }
            if r.holds {
                curved.push(family.label(n));
            }
        }
    }
    let ok = group_fail.is_empty() && disagree.is_empty() && group_cases >= 10;
    Ok((
        ok,
        format!(
            "{group_cases} group cases (word length conditionally negative on {word_lengths:?}), failures {group_fail:?}; \
             {markov} zoo members, disagreements {disagree:?}, Gamma_2 >= 0 on {} of them",
            curved.len()
        ),
    ))
}

fn hgs() -> Outcome {
    let mut samples = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    for family in [Family::Cycle, Family::Path, Family::Complete, Family::Hypercube] {
        for n in [8, 16] {
            let r = check_square_comparison(&chain(family, n)?, 125, SEED).map_err(|e| e.to_string())?;
            samples += r.samples;
            violations += r.violations;
            worst = worst.max(r.max_ratio);
        }
    }
    Ok((samples >= 1000 && violations == 0, format!("{samples} samples, {violations} violations, max h1_G/h1_S {worst:.4}")))
}

fn john_nirenberg() -> Outcome {
    let c = chain(Family::RandomReversible, 10)?;
    let grid = c.grid().with_density(8);
    let r = check_john_nirenberg(&c.generator, &c.sd, 500, SEED, &grid);
    let mut windows = Vec::new();
    let mut stable = true;
    for family in [Family::Cycle, Family::Path, Family::Complete, Family::BirthDeath, Family::RandomReversible] {
        let s = sweep_john_nirenberg(family, &[4, 8, 16, 32], 50, SEED).map_err(|e| e.to_string())?;
        stable &= s.passed;
        let p1 = s.reports.iter().map(|r| r.window_p1).fold((f64::INFINITY, 0.0f64), |a, w| (a.0.min(w.min), a.1.max(w.max)));
        let p4 = s.reports.iter().map(|r| r.window_p4).fold((f64::INFINITY, 0.0f64), |a, w| (a.0.min(w.min), a.1.max(w.max)));
        windows.push(format!("{}: p1 [{:.3}, {:.3}] p4 [{:.3}, {:.3}]{}", family.name(), p1.0, p1.1, p4.0, p4.1, if s.passed { "" } else { " UNSTABLE" }));
    }
    let ok = r.identity_gap < JN_IDENTITY_TOL && r.samples >= 500 && stable;
    Ok((ok, format!("p=2 gap {:.1e} over {} samples; {}", r.identity_gap, r.samples, windows.join("; "))))
}

fn theorem01() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for family in Family::NONNEGATIVELY_CURVED {
        let s = sweep_theorem01(family, &[4, 8, 16, 32], 500, SEED).map_err(|e| e.to_string())?;
        ok &= s.passed && s.reports.iter().all(|r| r.samples + r.skipped >= 500);
        let c1: Vec<String> = s.reports.iter().map(|r| format!("{:.3}", r.max_ratio_c1)).collect();
        let c2: Vec<String> = s.reports.iter().map(|r| format!("{:.3}", r.max_ratio_c2)).collect();
        lines.push(format!("{}: c1 {c1:?} c2 {c2:?}", family.name()));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    Ok((ok, format!("{}; {:.0}s < 300s", lines.join("; "), elapsed.as_secs_f64())))
}

fn subordination() -> Outcome {
    let mut samples = 0;
    let mut violations = 0;
    let mut slack = f64::INFINITY;
    for (family, n) in [(Family::Cycle, 8), (Family::RandomReversible, 8), (Family::Star, 6), (Family::Path, 10)] {
        let c = chain(family, n)?;
        let grid = c.grid().with_density(8);
        let r = check_subordination_samples(&c, 125, SEED, Some(grid)).map_err(|e| e.to_string())?;
        samples += r.samples;
        violations += r.violations;
        slack = slack.min(r.min_slack_difference);
    }
    Ok((samples >= 500 && violations == 0, format!("{samples} nonnegative samples, {violations} violations, min (8t/y) slack {slack:.3}")))
}

fn carleson() -> Outcome {
    let mut samples = 0;
    let mut worst = 0.0f64;
    let mut worst_first = 0.0f64;
    for (family, n) in [(Family::Cycle, 8), (Family::RandomReversible, 8)] {
        let r = verify_carleson(&chain(family, n)?, 100, SEED).map_err(|e| e.to_string())?;
        samples += r.samples;
        worst = worst.max(r.max_bmo_ratio);
        worst_first = worst_first.max(r.max_bmo_ratio_first_power);
    }
    let s = sweep_carleson(Family::Cycle, &[4, 8, 16, 32], 30, SEED).map_err(|e| e.to_string())?;
    let cp: Vec<String> = s.reports.iter().map(|r| format!("{:.3}", r.embedding_p2.max)).collect();
    let ok = samples >= 200 && worst <= CARLESON_BMO_CONSTANT && s.passed;
    Ok((ok, format!("{samples} (g, nu), max BMO ratio {worst:.3} (first power {worst_first:.3}) <= 37; c_2 by size {cp:?}")))
}

fn theorem02() -> Outcome {
    let two = zoo::two_state(1.0, 2.0).map_err(|e| e.to_string())?;
    let sd = two.decompose().map_err(|e| e.to_string())?;
    let h = estimate_hypotheses(&two, &sd, &sd.default_grid(), 20, SEED);
    let r = h.r.unwrap_or(f64::NAN);
    let mut ok = (r - 1.0).abs() <= 0.05;
    let mut lines = vec![format!("two-state r = {r:.4}")];
    for family in Family::NONNEGATIVELY_CURVED {
        let s = sweep_conclusions(family, &[4, 8, 16], ATOM_TIMES, ATOMS_PER_TIME, 100, SEED).map_err(|e| e.to_string())?;
        ok &= s.passed;
        let atoms: Vec<String> = s.atoms.iter().map(|a| format!("{:.3}", a.sup)).collect();
        let bmo: Vec<String> = s.equivalences.iter().map(|e| format!("[{:.3}, {:.3}]", e.bmo_ratio.min, e.bmo_ratio.max)).collect();
        let h1: Vec<String> = s.equivalences.iter().map(|e| format!("[{:.3}, {:.3}]", e.h1_ratio.min, e.h1_ratio.max)).collect();
        lines.push(format!("{}: atom sup {atoms:?} bmo/BMO {bmo:?} h1S/h1G {h1:?}", family.name()));
    }
    Ok((ok, lines.join("; ")))
}

fn noncommutative() -> Outcome {
    let mut consistency = 0.0f64;
    let mut ok = true;
    for n in [2, 3, 4, 6, 8] {
        let g = FiniteGroup::cyclic(n).map_err(|e| e.to_string())?;
        for psi in [LengthFunction::word_length(&g), LengthFunction::cyclic_cosine(&g)] {
            let ms = MultiplierSemigroup::new(g.clone(), psi.map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let r = check_consistency(&ms, 10, SEED).map_err(|e| e.to_string())?;
            ok &= r.passed;
            let worst = [r.semigroup_gap, r.gamma_gap, r.bmo_gap, r.big_bmo_gap, r.h1_s_gap, r.h1_g_gap, r.norm_gap]
                .into_iter()
                .fold(0.0, f64::max);
            consistency = consistency.max(worst);
        }
    }
    let s3 = FiniteGroup::symmetric(3).map_err(|e| e.to_string())?;
    let mut route = 0.0f64;
    for psi in [LengthFunction::word_length(&s3), LengthFunction::random_cocycle(&s3, SEED), LengthFunction::indicator(&s3)] {
        let ms = MultiplierSemigroup::new(s3.clone(), psi.map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let r = check_gamma_routes(&ms, 100, SEED);
        route = route.max(r.gamma_gap).max(r.gamma2_gap);
    }
    let conv = check_two_convexity(6, 500, SEED);
    ok &= consistency < CONSISTENCY_TOL && route < ROUTE_TOL && conv.passed;
    Ok((
        ok,
        format!(
            "Z_n consistency {consistency:.1e} < {CONSISTENCY_TOL:.0e}; S3 Gromov vs definitional {route:.1e} < {ROUTE_TOL:.0e}; \
             2-convexity {} pairs, {} violations, min slack {:.3}",
            conv.samples, conv.violations, conv.min_slack
        ),
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("c8.json");
    std::fs::write(&config, r#"{"backend": "markov", "generator": {"type": "cycle", "n": 8}, "suites": ["all"], "seed": 7, "samples": 8}"#)
        .map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_cdc"))
            .arg("run")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env("CDC_THREADS", if run == "a" { "1" } else { "4" })
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Ok((false, format!("cdc run exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr))));
        }
        reports.push(std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?);
    }
    let same = reports[0] == reports[1];
    Ok((same, format!("cycle C_8, suite all, seed 7: {} bytes, identical = {same} (1 and 4 threads)", reports[0].len())))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let results = [
        criterion(1, "axioms on the generator zoo", axioms),
        criterion(2, "Meyer identity constant", meyer),
        criterion(3, "exact vs quadrature and subordination", dual_paths),
        criterion(4, "curvature on groups and the zoo", curvature),
        criterion(5, "h1_G <= 2 h1_S", hgs),
        criterion(6, "John-Nirenberg", john_nirenberg),
        criterion(7, "duality ratios across sizes", theorem01),
        criterion(8, "subordination inequalities", subordination),
        criterion(9, "Carleson bounds", carleson),
        criterion(10, "hypotheses, atoms, equivalences", theorem02),
        criterion(11, "noncommutative backend", noncommutative),
        criterion(12, "determinism of cdc run", determinism),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed in {:.0}s", results.len(), start.elapsed().as_secs_f64());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
