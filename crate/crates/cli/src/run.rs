//! Subcommand implementations: each builds a [`Report`].

use geomlab::harmonic::{kk_beta_demo, kk_beta_demo_auto};
use geomlab::lattice_convex::{
    check_eq3_batch, complex_convexity_inequalities, krivine_constant, monotone_to_convex_bound,
    mluc_implies_ulum_check, verify_krivine,
};
use geomlab::moduli::{
    complex_modulus, delta_phi, local_monotonicity_modulus, monotonicity_modulus, strong_extreme_modulus,
    uniform_convexity_modulus, CircleExponent, ModulusConfig, ModulusEstimate,
};
use geomlab::random::{ConvexGauge, ExpectConfig, SymmetricRv};
use geomlab::report::Status;
use geomlab::represent::{build_embedding, lifting_check, rho_gap};
use geomlab::series::{check_scaling_monotone, check_submartingale, thm13_delta, thm13_verify, RandomizedSeries};
use geomlab::space::{complexify, NormedSpace};
use geomlab::GeomError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::args::{Command, Harmonic, ModulusKind, Options, Verify};
use crate::emit::Report;
use crate::parse;

type Result<T> = std::result::Result<T, GeomError>;

fn usage(msg: impl Into<String>) -> GeomError {
    GeomError::Malformed(msg.into())
}

/// Default tolerance for verifiers.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default sample count for seeded checks.
pub const DEFAULT_SAMPLES: usize = 100;
/// Verification grid for Krivine constants.
pub const KRIVINE_VERIFY_NODES: usize = 1_000_000;

struct Ctx<'a> {
    o: &'a Options,
}

impl Ctx<'_> {
    fn space(&self) -> Result<NormedSpace> {
        parse::space(self.o.space.as_deref().ok_or_else(|| usage("--space is required"))?)
    }

    fn inner(&self) -> Result<NormedSpace> {
        let s = self.o.inner.as_deref().or(self.o.space.as_deref());
        parse::space(s.ok_or_else(|| usage("--inner is required"))?)
    }

    fn tol(&self, default: f64) -> Result<f64> {
        let t = self.o.tol.unwrap_or(default);
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(usage(format!("--tol must be positive, got {t}")))
        }
    }

    fn seed(&self) -> Result<u64> {
        self.o.seed.ok_or_else(|| usage("--seed is required for sampled checks"))
    }

    fn samples(&self) -> usize {
        self.o.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    fn p(&self) -> Result<f64> {
        match self.o.p.as_slice() {
            [p] => Ok(*p),
            [] => Err(usage("--p is required")),
            _ => Err(usage("this command takes a single --p")),
        }
    }

    fn p_list(&self) -> Result<&[f64]> {
        if self.o.p.is_empty() {
            Err(usage("--p is required"))
        } else {
            Ok(&self.o.p)
        }
    }

    fn n(&self) -> Result<usize> {
        self.o.n.ok_or_else(|| usage("--n is required"))
    }

    fn eps(&self) -> Result<&[f64]> {
        if self.o.eps.is_empty() {
            Err(usage("--eps is required"))
        } else {
            Ok(&self.o.eps)
        }
    }

    fn phi(&self) -> Result<ConvexGauge> {
        parse::gauge(&self.o.phi)
    }

    fn rv(&self) -> Result<SymmetricRv> {
        parse::rv(&self.o.rv, self.o.nodes, self.o.seed)
    }

    fn expect(&self) -> ExpectConfig {
        let mut c = ExpectConfig::default();
        if let Some(b) = self.o.budget {
            c.budget = b;
        }
        c
    }

    fn modulus(&self) -> ModulusConfig {
        let mut c = ModulusConfig::default().with_seed(self.o.seed.unwrap_or(0));
        if let Some(s) = self.o.starts {
            c.search.starts = s;
        }
        if let Some(n) = self.o.nodes {
            c.nodes = n;
        }
        c.expect = self.expect();
        if let Some(b) = self.o.budget {
            c.grid_budget = b;
        }
        c
    }

    fn vector(&self, v: &[f64], space: &NormedSpace, name: &str) -> Result<Vec<f64>> {
        if v.len() != space.real_dim() {
            return Err(usage(format!("{name} needs {} coordinates, got {}", space.real_dim(), v.len())));
        }
        Ok(v.to_vec())
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn run(command: &Command, o: &Options) -> Result<Report> {
    let c = Ctx { o };
    match command {
        Command::Modulus => modulus(&c),
        Command::Rho => rho(&c),
        Command::Lift => lift(&c),
        Command::SeriesCheck => series_check(&c),
        Command::Thm13 => thm13(&c),
        Command::Krivine => krivine(&c),
        Command::Verify { which } => match which {
            Verify::Eq3 => eq3(&c),
            Verify::Thm33 => thm33(&c),
            Verify::Thm34 => thm34(&c),
            Verify::Thm24 => lift(&c),
            Verify::Mluc => mluc(&c),
        },
        Command::Harmonic { which: Harmonic::KkDemo } => kk_demo(&c),
    }
}

const MODULUS_COLUMNS: &[&str] = &[
    "epsilon", "value", "confidence", "method", "multistart_value", "oracle_value", "starts", "evaluations", "witness_x", "witness_y",
];

fn modulus_row(e: &ModulusEstimate) -> serde_json::Value {
    json!({
        "epsilon": e.epsilon,
        "value": e.value,
        "confidence": e.confidence.as_str(),
        "method": e.method,
        "multistart_value": e.multistart_value,
        "oracle_value": e.oracle_value,
        "starts": e.starts,
        "evaluations": e.evaluations,
        "witness_x": e.witness_x,
        "witness_y": e.witness_y,
    })
}

fn modulus(c: &Ctx) -> Result<Report> {
    let kind = c.o.kind.unwrap_or(ModulusKind::DeltaPhi);
    let space = c.space()?;
    let cfg = c.modulus();
    let mut report = Report::new("modulus", MODULUS_COLUMNS);
    for &eps in c.eps()? {
        let est = match kind {
            ModulusKind::DeltaPhi => delta_phi(&space, &c.phi()?, &c.rv()?, eps, &cfg)?,
            ModulusKind::StrongExtreme => {
                strong_extreme_modulus(&space, &c.vector(&c.o.x, &space, "--x")?, eps, &cfg)?
            }
            ModulusKind::UniformConvexity => uniform_convexity_modulus(&space, eps, &cfg)?,
            ModulusKind::Monotone => monotonicity_modulus(&parse::lattice_of(&space)?, c.p()?, eps, &cfg)?,
            ModulusKind::LocalMonotone => {
                let l = parse::lattice_of(&space)?;
                local_monotonicity_modulus(&l, c.p()?, &c.vector(&c.o.x, &space, "--x")?, eps, &cfg)?
            }
            ModulusKind::Complex => {
                let q = match c.p()? {
                    q if q.is_infinite() => CircleExponent::Infinite,
                    q => CircleExponent::Finite(q),
                };
                complex_modulus(&space, q, &c.vector(&c.o.x, &space, "--x")?, eps, &cfg)?
            }
        };
        report.push(modulus_row(&est));
        report.detail(&est);
    }
    Ok(report)
}

fn rho(c: &Ctx) -> Result<Report> {
    let space = c.space()?;
    let cfg = c.modulus();
    let gap = rho_gap(&space, c.n()?, &cfg)?;
    let mut report = Report::new(
        "rho",
        &[
            "n", "rho", "confidence", "method", "multistart_value", "oracle_value", "witness_tuple", "lower", "upper", "embedding_status",
        ],
    );
    let embedding = match c.o.samples {
        Some(s) if s > 0 => Some(build_embedding(&space, &gap.witness_tuple, Some(gap.rho), s, c.o.seed.unwrap_or(0), &cfg.search)?),
        _ => None,
    };
    report.push(json!({
        "n": gap.n,
        "rho": gap.rho,
        "confidence": gap.confidence.as_str(),
        "method": gap.method,
        "multistart_value": gap.multistart_value,
        "oracle_value": gap.oracle_value,
        "witness_tuple": gap.witness_tuple,
        "lower": embedding.as_ref().map(|e| e.lower),
        "upper": embedding.as_ref().map(|e| e.upper),
        "embedding_status": embedding.as_ref().map(|e| e.status.as_str()),
    }));
    if let Some(e) = &embedding {
        report.note(e.status);
    }
    report.detail(&json!({ "gap": gap, "embedding": embedding }));
    Ok(report)
}

fn lift(c: &Ctx) -> Result<Report> {
    let inner = c.inner()?;
    let r = lifting_check(
        &inner,
        c.p()?,
        c.n()?,
        c.o.atoms.unwrap_or(4),
        c.samples(),
        c.seed()?,
        &c.modulus(),
        c.tol(DEFAULT_TOL)?,
    )?;
    let mut report = Report::new(
        "lift",
        &[
            "p", "n", "atoms", "rho_gap", "rho", "bound", "samples", "min_moment", "bound_violations", "case_violations", "spread_atoms",
            "balanced_atoms", "min_case_slack", "min_q_minus_m", "status",
        ],
    );
    let mut row = serde_json::to_value(&r).expect("serializable");
    row["status"] = json!(r.status.as_str());
    report.push(row);
    report.note(r.status);
    report.detail(&r);
    Ok(report)
}

/// Symmetric 41-point grid on `[-2, 2]`.
fn lambda_grid() -> Vec<f64> {
    (-20..=20).map(|k| k as f64 / 10.0).collect()
}

fn series_check(c: &Ctx) -> Result<Report> {
    let space = c.space()?;
    let (phi, rv, n, seed, tol, cfg) = (c.phi()?, c.rv()?, c.n()?, c.seed()?, c.tol(1e-10)?, c.expect());
    let rows: Vec<Result<_>> = (0..c.samples())
        .into_par_iter()
        .map(|i| {
            let mut g = rng(seed, i as u64);
            let x0 = space.random_vector(&mut g);
            let steps: Vec<Vec<f64>> = (0..n).map(|_| space.random_vector(&mut g)).collect();
            let series = RandomizedSeries::uniform(space.clone(), x0.clone(), steps.clone(), rv)?;
            let sub = check_submartingale(&series, &phi, &cfg, tol)?;
            let y = steps.first().cloned().unwrap_or_else(|| space.random_vector(&mut g));
            let sc = check_scaling_monotone(&space, &x0, &y, &phi, rv, &lambda_grid(), &cfg, tol)?;
            Ok((i, sub, sc))
        })
        .collect();
    let mut report = Report::new(
        "series-check",
        &["sample", "submartingale_violation", "evenness_violation", "monotone_violation", "convexity_violation", "status"],
    );
    for r in rows {
        let (i, sub, sc) = r?;
        let status = sub.status.worst(sc.status);
        report.push(json!({
            "sample": i,
            "submartingale_violation": sub.max_violation,
            "evenness_violation": sc.evenness_violation,
            "monotone_violation": sc.monotone_violation,
            "convexity_violation": sc.convexity_violation,
            "status": status.as_str(),
        }));
        report.note(status);
        report.detail(&json!({ "expectations": sub.expectations, "psi": sc.psi }));
    }
    Ok(report)
}

const THM13_COLUMNS: &[&str] = &["sample", "rho", "rho1", "delta", "log10_delta", "vacuous", "lhs", "rhs", "slack", "status"];

fn thm13(c: &Ctx) -> Result<Report> {
    let (phi, rv, n, tol, cfg) = (c.phi()?, c.rv()?, c.n()?, c.tol(1e-10)?, c.expect());
    let mut report = Report::new("thm13", THM13_COLUMNS);
    if c.o.space.is_none() {
        // Formula only: the gain constant for the given gap with ‖x_1‖ = 1.
        let rho = *c.eps()?.first().expect("nonempty");
        let cert = thm13_delta(rho, n, &phi, &vec![rv; n.saturating_sub(1)], 1.0, &cfg)?;
        report.push(json!({
            "sample": null, "rho": cert.rho, "rho1": cert.rho1, "delta": cert.delta, "log10_delta": cert.log10_delta,
            "vacuous": cert.vacuous, "lhs": null, "rhs": null, "slack": null, "status": "pass",
        }));
        report.detail(&cert);
        return Ok(report);
    }
    let space = c.space()?;
    let seed = c.seed()?;
    let rvs = vec![rv; n.saturating_sub(1)];
    let results: Vec<Result<_>> = (0..c.samples())
        .into_par_iter()
        .map(|i| {
            let mut g = rng(seed, i as u64);
            let xs: Vec<Vec<f64>> = (0..n).map(|_| space.random_unit(&mut g)).collect();
            thm13_verify(&space, &xs, &phi, &rvs, &cfg, tol)
        })
        .collect();
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        report.push(json!({
            "sample": i, "rho": r.rho, "rho1": r.rho1, "delta": r.delta, "log10_delta": finite_or_null(r.log10_delta),
            "vacuous": r.vacuous, "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack, "status": r.status.as_str(),
        }));
        report.note(r.status);
        report.detail(&r);
    }
    Ok(report)
}

fn finite_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn krivine(c: &Ctx) -> Result<Report> {
    let tol = c.tol(DEFAULT_TOL)?;
    let nodes = c.o.nodes.unwrap_or(KRIVINE_VERIFY_NODES);
    let mut report = Report::new(
        "krivine",
        &["p", "c", "search_residual", "search_nodes", "diagonal_limit", "verify_nodes", "verify_residual", "worst_angle", "status"],
    );
    for &p in c.p_list()? {
        let k = krivine_constant(p)?;
        let (resid, angle) = verify_krivine(p, k.c, nodes);
        let status = Status::from_slack(-resid, tol);
        report.push(json!({
            "p": p, "c": k.c, "search_residual": k.max_residual, "search_nodes": k.grid_nodes,
            "diagonal_limit": finite_or_null(k.diagonal_limit), "verify_nodes": nodes, "verify_residual": resid,
            "worst_angle": angle, "status": status.as_str(),
        }));
        report.note(status);
        report.detail(&k);
    }
    Ok(report)
}

fn eq3(c: &Ctx) -> Result<Report> {
    let lattice = parse::lattice_of(&c.space()?)?;
    let (seed, tol) = (c.seed()?, c.tol(DEFAULT_TOL)?);
    let mut report = Report::new(
        "verify-eq3",
        &["p", "c", "samples", "violations", "min_triangle_slack", "min_pointwise_slack", "min_monotone_slack", "status"],
    );
    for &p in c.p_list()? {
        let b = check_eq3_batch(&lattice, p, c.samples(), seed, tol)?;
        let mut row = serde_json::to_value(&b).expect("serializable");
        row["status"] = json!(b.status.as_str());
        report.push(row);
        report.note(b.status);
        report.detail(&b);
    }
    Ok(report)
}

fn thm33(c: &Ctx) -> Result<Report> {
    let lattice = parse::lattice_of(&c.space()?)?;
    let (p, seed, tol, cfg) = (c.p()?, c.seed()?, c.tol(DEFAULT_TOL)?, c.modulus());
    let mut report = Report::new(
        "verify-thm33",
        &["p", "epsilon", "c", "modulus_exponent", "modulus_argument", "modulus_value", "bound", "hard", "degenerate", "min_lhs", "min_slack", "violations", "status"],
    );
    for &eps in c.eps()? {
        let r = monotone_to_convex_bound(&lattice, p, eps, c.samples(), seed, &cfg, tol)?;
        report.push(json!({
            "p": r.p, "epsilon": r.epsilon, "c": r.c, "modulus_exponent": r.modulus_exponent,
            "modulus_argument": r.modulus_argument, "modulus_value": r.modulus.value, "bound": r.bound, "hard": r.hard,
            "degenerate": r.degenerate, "min_lhs": r.min_lhs, "min_slack": r.min_slack, "violations": r.violations,
            "status": r.status.as_str(),
        }));
        report.note(r.status);
        report.detail(&r);
    }
    Ok(report)
}

fn thm34(c: &Ctx) -> Result<Report> {
    let lattice = parse::lattice_of(&c.space()?)?;
    let space = complexify(&lattice)?;
    let (seed, tol) = (c.seed()?, c.tol(1e-6)?);
    let results: Vec<Result<_>> = (0..c.samples())
        .into_par_iter()
        .map(|i| {
            let mut g = rng(seed, i as u64);
            let x = space.random_vector(&mut g);
            let y = space.random_vector(&mut g);
            complex_convexity_inequalities(&lattice, &x, &y, tol)
        })
        .collect();
    let mut report = Report::new(
        "verify-thm34",
        &["sample", "sum_of_moduli", "circle_mean", "quadratic", "nodes", "upper_slack", "lower_slack", "status"],
    );
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        report.push(json!({
            "sample": i, "sum_of_moduli": r.sum_of_moduli, "circle_mean": r.circle_mean, "quadratic": r.quadratic,
            "nodes": r.nodes, "upper_slack": r.upper_slack, "lower_slack": r.lower_slack, "status": r.status.as_str(),
        }));
        report.note(r.status);
    }
    Ok(report)
}

fn mluc(c: &Ctx) -> Result<Report> {
    let space = c.space()?;
    let lattice = parse::lattice_of(&space)?;
    let (seed, tol) = (c.seed()?, c.tol(DEFAULT_TOL)?);
    let mut report = Report::new("verify-mluc", &["sample", "max_pm", "sum_of_moduli", "slack", "status"]);
    for i in 0..c.samples() {
        let mut g = rng(seed, i as u64);
        let x = space.random_vector(&mut g);
        let y = space.random_vector(&mut g);
        let r = mluc_implies_ulum_check(&lattice, &x, &y, tol)?;
        report.push(json!({
            "sample": i, "max_pm": r.max_pm, "sum_of_moduli": r.sum_of_moduli, "slack": r.slack, "status": r.status.as_str(),
        }));
        report.note(r.status);
    }
    Ok(report)
}

fn kk_demo(c: &Ctx) -> Result<Report> {
    let space = c.space()?;
    let x = c.vector(&c.o.x, &space, "--x")?;
    let (p, terms, tol, cfg) = (c.p()?, c.n().unwrap_or(8), c.tol(DEFAULT_TOL)?, c.modulus());
    let r = if c.o.y.is_empty() {
        let eps = *c.eps()?.first().expect("nonempty");
        kk_beta_demo_auto(&space, &x, eps, p, terms, &cfg, tol)?
    } else {
        let y = c.vector(&c.o.y, &space, "--y")?;
        kk_beta_demo(&space, &x, &vec![y; terms.max(1)], p, &cfg, tol)?
    };
    let mut report = Report::new(
        "harmonic-kk-demo",
        &["n", "beta_distance", "norm_fn", "norm_f", "distance", "separation_bound", "failure_certified"],
    );
    for row in &r.rows {
        report.push(json!({
            "n": row.n, "beta_distance": row.beta_distance, "norm_fn": row.norm_fn, "norm_f": row.norm_f,
            "distance": row.distance, "separation_bound": r.separation_bound, "failure_certified": r.failure_certified,
        }));
    }
    report.note(r.status);
    report.detail(&r);
    Ok(report)
}
