//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use geomlab::harmonic::{kk_beta_demo, kk_beta_demo_auto};
use geomlab::lattice_convex::{
    check_eq3_batch, complex_convexity_inequalities, krivine_constant, verify_krivine,
};
use geomlab::moduli::{delta_phi, monotonicity_modulus, ModulusConfig};
use geomlab::random::{ConvexGauge, ExpectConfig, SymmetricRv};
use geomlab::report::Status;
use geomlab::represent::{build_embedding, example21_witness, lifting_check, rho_gap};
use geomlab::series::{check_scaling_monotone, check_submartingale, thm13_delta, thm13_verify, RandomizedSeries};
use geomlab::space::{complexify, make_lp, pconvexify, Field, KotheLattice, NormedSpace, Young};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grid-oracle work per modulus estimate, in integrand evaluations.
const ORACLE_BUDGET: u128 = 1 << 22;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn lp(d: usize, p: f64) -> NormedSpace {
    make_lp(d, p, Field::Real).unwrap()
}

fn pow(p: f64) -> ConvexGauge {
    ConvexGauge::power(p).unwrap()
}

fn submartingale_suite() -> Outcome {
    let start = Instant::now();
    let exps = [1.5, 2.0, 3.0];
    let norms = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let mut worst = 0.0f64;
    for i in 0..500u64 {
        let mut g = rng(1, i);
        let d = g.random_range(1..=6);
        let n = g.random_range(1..=8);
        let space = lp(d, norms[g.random_range(0..norms.len())]);
        let phi = pow(exps[(i % 3) as usize]);
        let x0 = space.random_vector(&mut g);
        let steps = (0..n).map(|_| space.random_vector(&mut g)).collect();
        let s = RandomizedSeries::uniform(space, x0, steps, SymmetricRv::rademacher()).unwrap();
        worst = worst.max(check_submartingale(&s, &phi, &ExpectConfig::default(), 1e-10).unwrap().max_violation);
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-10 && t < Duration::from_secs(10),
        format!("500 series, max violation {worst:.3e}, {:.2} s", t.as_secs_f64()),
    )
}

fn scaling_suite() -> Outcome {
    let grid: Vec<f64> = (-20..=20).map(|k| k as f64 / 10.0).collect();
    let spaces = [lp(2, 1.0), lp(3, 2.0), lp(3, 3.0), lp(2, f64::INFINITY)];
    let (mut even, mut mono, mut conv) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..200u64 {
        let mut g = rng(2, i);
        let space = &spaces[(i % 4) as usize];
        let x = space.random_vector(&mut g);
        let y = space.random_vector(&mut g);
        let phi = pow([1.5, 2.0, 3.0][(i % 3) as usize]);
        let r = check_scaling_monotone(space, &x, &y, &phi, SymmetricRv::rademacher(), &grid, &ExpectConfig::default(), 1e-10)
            .unwrap();
        even = even.max(r.evenness_violation);
        mono = mono.max(r.monotone_violation);
        conv = conv.max(r.convexity_violation);
    }
    outcome(
        even == 0.0 && mono <= 1e-10 && conv <= 1e-10,
        format!("200 pairs, evenness {even:.1e}, monotone {mono:.3e}, convexity {conv:.3e}"),
    )
}

fn gain_bound_suite() -> Outcome {
    let cert = thm13_delta(0.5, 2, &pow(2.0), &[SymmetricRv::rademacher()], 1.0, &ExpectConfig::default()).unwrap();
    // ρ₁ = 1/2, η = 1/12: tail (1/6)² · 1/2 = 1/72, gain ((13/12)² + (11/12)²)/2 − 1 = 1/144.
    let hand = (1.0f64 / 6.0).powi(2) * 0.5;
    let gain = ((13.0f64 / 12.0).powi(2) + (11.0f64 / 12.0).powi(2)) / 2.0 - 1.0;
    let oracle = hand.min(gain);
    let part_a = (cert.delta - oracle).abs() <= 1e-15 && (oracle - 1.0 / 144.0).abs() <= 1e-15;

    let spaces = [lp(2, 1.0), lp(2, 2.0), lp(3, 3.0), lp(2, f64::INFINITY), lp(3, 1.5)];
    let (mut checked, mut violations, mut min_slack) = (0usize, 0usize, f64::INFINITY);
    let mut i = 0u64;
    while checked < 1000 {
        let mut g = rng(3, i);
        i += 1;
        let space = &spaces[(i % 5) as usize];
        let n = g.random_range(2..=4);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| space.random_unit(&mut g)).collect();
        let r = thm13_verify(space, &xs, &pow(2.0), &vec![SymmetricRv::rademacher(); n - 1], &ExpectConfig::default(), 1e-10)
            .unwrap();
        if r.status == Status::NotApplicable {
            continue;
        }
        checked += 1;
        min_slack = min_slack.min(r.slack);
        if r.status == Status::Violation {
            violations += 1;
        }
    }
    outcome(
        part_a && violations == 0,
        format!("delta(1/2, 2) = {:.17e} (hand 1/144), {checked} instances, {violations} violations, min slack {min_slack:.3e}", cert.delta),
    )
}

fn moduli_suite() -> Outcome {
    let phi = pow(2.0);
    let rad = SymmetricRv::rademacher();
    let mut cfg = ModulusConfig::default();
    cfg.search.starts = 32;
    cfg.grid_budget = ORACLE_BUDGET;
    let mut notes = Vec::new();
    let mut pass = true;
    let mut l2_err = 0.0f64;
    for d in [2, 3, 5] {
        for eps in [0.1, 0.5, 0.9] {
            let e = delta_phi(&lp(d, 2.0), &phi, &rad, eps, &cfg).unwrap();
            l2_err = l2_err.max((e.value - eps * eps).abs());
        }
    }
    pass &= l2_err <= 2e-3;
    notes.push(format!("l2 error {l2_err:.2e}"));
    let linf = [0.1, 0.5, 0.9]
        .iter()
        .map(|&e| delta_phi(&lp(2, f64::INFINITY), &phi, &rad, e, &cfg).unwrap().value.abs())
        .fold(0.0, f64::max);
    pass &= linf <= 1e-4;
    notes.push(format!("linf {linf:.2e}"));
    let mut m1 = 0.0f64;
    for d in [2, 3] {
        for eps in [0.1, 0.5, 0.9] {
            let e = monotonicity_modulus(&KotheLattice::lp(d, 1.0).unwrap(), 1.0, eps, &cfg).unwrap();
            m1 = m1.max((e.value - eps).abs());
        }
    }
    pass &= m1 <= 1e-6;
    notes.push(format!("M1 error {m1:.2e}"));
    let mut agree = 0.0f64;
    for space in [lp(2, 1.0), lp(2, 2.0), lp(2, 3.0), lp(2, f64::INFINITY)] {
        for eps in [0.1, 0.5, 0.9] {
            let e = delta_phi(&space, &phi, &rad, eps, &cfg).unwrap();
            match e.oracle_value {
                Some(o) => agree = agree.max((o - e.multistart_value).abs()),
                None => agree = f64::INFINITY,
            }
        }
    }
    pass &= agree <= 2e-3;
    notes.push(format!("oracle gap {agree:.2e}"));
    outcome(pass, notes.join(", "))
}

fn representability_suite() -> Outcome {
    let cfg = ModulusConfig::default();
    let gap = rho_gap(&lp(2, 2.0), 2, &cfg).unwrap();
    let mut pass = (gap.rho - (2f64.sqrt() - 1.0)).abs() <= 1e-3;
    let mut notes = vec![format!("rho(l2^2) = {:.6}", gap.rho)];
    for n in [2, 3, 4] {
        let space = lp(n, f64::INFINITY);
        let g = rho_gap(&space, n, &cfg).unwrap();
        let e = build_embedding(&space, &g.witness_tuple, Some(g.rho), 10_000, 5, &cfg.search).unwrap();
        let ok = g.rho <= 1e-9
            && e.lower >= 1.0 - 1e-6
            && e.upper <= 1.0 + 1e-6
            && e.sampled_min >= 1.0 - 1e-6
            && e.sampled_max <= 1.0 + 1e-6;
        pass &= ok;
        notes.push(format!("linf^{n}: rho {:.1e}, bounds [{:.9}, {:.9}]", g.rho, e.lower, e.upper));
    }
    let ex = example21_witness(&lp(2, 2.0), &[0.6, 0.8]).unwrap();
    pass &= ex.max_deviation <= 1e-15;
    notes.push(format!("example deviation {:.1e}", ex.max_deviation));
    outcome(pass, notes.join(", "))
}

fn lifting_suite() -> Outcome {
    let start = Instant::now();
    let mut cfg = ModulusConfig::default();
    cfg.search.starts = 32;
    let (mut bound_v, mut case_v, mut runs, mut pass) = (0, 0, 0, true);
    for m in [2, 3] {
        for n in [2, 3] {
            for p in [1.5, 2.0, 4.0] {
                let r = lifting_check(&lp(m, 2.0), p, n, 4, 1000, 11 + runs, &cfg, 1e-9).unwrap();
                runs += 1;
                bound_v += r.bound_violations;
                case_v += r.case_violations;
                pass &= r.status == Status::Pass;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        pass && bound_v == 0 && case_v == 0 && t < Duration::from_secs(30),
        format!("{runs} configurations x 1000 tuples, {bound_v} bound / {case_v} case violations, {:.2} s", t.as_secs_f64()),
    )
}

fn krivine_suite() -> Outcome {
    let k2 = krivine_constant(2.0).unwrap();
    let (r2, _) = verify_krivine(2.0, k2.c, 1_000_000);
    let mut pass = k2.c == 2.0 && r2 <= 4.0 * f64::EPSILON;
    let mut notes = vec![format!("C(2) = {}, residual {r2:.1e}", k2.c)];
    for p in [1.5, 3.0] {
        let k = krivine_constant(p).unwrap();
        let (r, _) = verify_krivine(p, k.c, 1_000_000);
        pass &= r <= 1e-9;
        notes.push(format!("C({p}) = {:.10}, residual {r:.1e}", k.c));
    }
    outcome(pass, notes.join(", "))
}

fn eq3_suite() -> Outcome {
    let lattices = [
        KotheLattice::lp(3, 1.0).unwrap(),
        KotheLattice::lp(3, 2.0).unwrap(),
        KotheLattice::lp(3, f64::INFINITY).unwrap(),
        KotheLattice::orlicz(vec![1.0; 3], Young::Exp).unwrap(),
        KotheLattice::top_k_lorentz(vec![1.0; 3], vec![1.0, 1.0, 0.0]).unwrap(),
    ];
    let mut violations = 0;
    for l in &lattices {
        for p in [1.5, 2.0, 3.0] {
            violations += check_eq3_batch(l, p, 500, 17, 1e-9).unwrap().violations;
        }
    }
    let space = NormedSpace::Pconvex(pconvexify(&KotheLattice::lp(2, 1.0).unwrap(), 2.0).unwrap());
    let mut cfg = ModulusConfig::default();
    cfg.search.starts = 32;
    cfg.grid_budget = ORACLE_BUDGET;
    let mut min_delta = f64::INFINITY;
    for k in 1..=9 {
        let e = delta_phi(&space, &pow(2.0), &SymmetricRv::rademacher(), k as f64 / 10.0, &cfg).unwrap();
        min_delta = min_delta.min(e.value);
    }
    outcome(
        violations == 0 && min_delta > 0.0,
        format!("15 lattice/p combinations x 500 pairs, {violations} violations, min delta on convexified l1^2 {min_delta:.4e}"),
    )
}

fn circle_suite() -> Outcome {
    let lattices = [
        KotheLattice::lp(3, 1.0).unwrap(),
        KotheLattice::lp(3, 2.0).unwrap(),
        KotheLattice::lp(3, f64::INFINITY).unwrap(),
        KotheLattice::orlicz(vec![1.0; 3], Young::Exp).unwrap(),
    ];
    let mut bad = 0;
    let mut min_slack = f64::INFINITY;
    for (j, l) in lattices.iter().enumerate() {
        let space = complexify(l).unwrap();
        for i in 0..500u64 {
            let mut g = rng(19 + j as u64, i);
            let x = space.random_vector(&mut g);
            let y = space.random_vector(&mut g);
            let r = complex_convexity_inequalities(l, &x, &y, 1e-6).unwrap();
            min_slack = min_slack.min(r.upper_slack.min(r.lower_slack));
            if r.status != Status::Pass {
                bad += 1;
            }
        }
    }
    let scalar = complex_convexity_inequalities(&KotheLattice::lp(1, 1.0).unwrap(), &[1.0, 0.0], &[1.0, 0.0], 1e-6).unwrap();
    let spot = (scalar.circle_mean - 4.0 / PI).abs();
    outcome(
        bad == 0 && spot <= 1e-6,
        format!("2000 pairs, {bad} failures, min slack {min_slack:.3e}, scalar mean error {spot:.1e}"),
    )
}

fn harmonic_suite() -> Outcome {
    let mut cfg = ModulusConfig::default().without_oracle();
    cfg.search.starts = 16;
    let eps = 0.5;
    let linf = lp(2, f64::INFINITY);
    let r = kk_beta_demo(&linf, &[1.0, 0.0], &vec![vec![0.0, eps]; 8], 2.0, &cfg, 1e-9).unwrap();
    let identity = r.rows.iter().map(|w| w.identity_error).fold(0.0, f64::max);
    let beta = r
        .rows
        .iter()
        .map(|w| (w.beta_distance - 0.9f64.powi(w.n as i32) * eps).abs())
        .fold(0.0, f64::max);
    let sep = r.rows.iter().map(|w| (w.distance - eps / 2f64.sqrt()).abs()).fold(0.0, f64::max);
    let mut other_identity = 0.0f64;
    for p in [1.5, 3.0] {
        let q = kk_beta_demo(&lp(2, 3.0), &[0.6f64.powf(1.0 / 3.0), 0.4f64.powf(1.0 / 3.0)], &vec![vec![0.3, -0.2]; 4], p, &cfg, 1e-9)
            .unwrap();
        other_identity = other_identity.max(q.rows.iter().map(|w| w.identity_error).fold(0.0, f64::max));
    }
    let hilbert = kk_beta_demo_auto(&lp(2, 2.0), &[1.0, 0.0], eps, 2.0, 8, &cfg, 1e-9).unwrap();
    outcome(
        r.failure_certified
            && identity.max(other_identity) <= 1e-6
            && beta <= 1e-10
            && sep <= 1e-6
            && !hilbert.failure_certified,
        format!(
            "identity error {:.1e}, beta error {beta:.1e}, separation error {sep:.1e}, linf certified {}, l2 certified {}",
            identity.max(other_identity),
            r.failure_certified,
            hilbert.failure_certified
        ),
    )
}

fn reproducibility_suite() -> Outcome {
    let runs: &[&[&str]] = &[
        &["modulus", "--space", "lp:3:2", "--kind", "delta-phi", "--eps", "0.2,0.7", "--starts", "8", "--seed", "4", "--budget", "1000000"],
        &["modulus", "--space", "lp:1:2", "--kind", "monotone", "--p", "1", "--eps", "0.5", "--starts", "8"],
        &["rho", "--space", "lp:inf:3", "--n", "3", "--starts", "8", "--samples", "500", "--seed", "2"],
        &["lift", "--inner", "lp:2:2", "--p", "2", "--n", "2", "--atoms", "4", "--samples", "200", "--seed", "7"],
        &["series-check", "--space", "lp:3:3", "--n", "4", "--samples", "50", "--seed", "3", "--rv", "cos:8"],
        &["thm13", "--space", "lp:1:2", "--n", "3", "--samples", "50", "--seed", "9"],
        &["krivine", "--p", "1.5,2", "--nodes", "20000"],
        &["verify", "eq3", "--space", "orlicz:exp:3", "--p", "1.5,3", "--samples", "100", "--seed", "1"],
        &["verify", "thm33", "--space", "lp:1:2", "--p", "2", "--eps", "0.5", "--samples", "50", "--seed", "1", "--starts", "8"],
        &["verify", "thm34", "--space", "lp:1:3", "--samples", "50", "--seed", "1"],
        &["verify", "mluc", "--space", "lp:inf:3", "--samples", "50", "--seed", "1"],
        &["harmonic", "kk-demo", "--space", "lp:inf:2", "--x", "1,0", "--eps", "0.5", "--p", "2", "--n", "3", "--starts", "8"],
    ];
    let exe = env!("CARGO_BIN_EXE_geomlab");
    let mut mismatches = Vec::new();
    for args in runs {
        for format in ["csv", "json"] {
            let outputs: Vec<(Vec<u8>, Option<i32>)> = ["1", "4", "1"]
                .iter()
                .map(|t| {
                    let o = Command::new(exe)
                        .args(*args)
                        .args(["--format", format])
                        .env("GEOMLAB_THREADS", t)
                        .output()
                        .expect("binary runs");
                    (o.stdout, o.status.code())
                })
                .collect();
            let ok = outputs.iter().all(|o| o == &outputs[0]) && !outputs[0].0.is_empty() && outputs[0].1.is_some_and(|c| c <= 2);
            if !ok {
                mismatches.push(format!("{} ({format})", args.join(" ")));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} runs x 2 formats x threads {{1, 4, 1}}: byte-identical", runs.len())
        } else {
            format!("differences: {}", mismatches.join("; "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("submartingale", submartingale_suite),
        ("scaling monotonicity", scaling_suite),
        ("gain bound", gain_bound_suite),
        ("moduli oracles", moduli_suite),
        ("representability", representability_suite),
        ("lifting", lifting_suite),
        ("krivine", krivine_suite),
        ("lattice chain and convexification", eq3_suite),
        ("circle means", circle_suite),
        ("harmonic", harmonic_suite),
        ("reproducibility", reproducibility_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<34} {} ({:.1} s): {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
