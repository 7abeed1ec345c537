//! Convexity inequalities inside Banach lattices: the scalar constant behind
//! the p-convexification bound, the chain of inequalities it feeds, and the
//! circle-average inequalities for complexified lattices.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_len, invalid, Result};
use crate::moduli::{monotonicity_modulus, Confidence, ModulusConfig, ModulusEstimate};
use crate::parallel::{argmax, with_scratch};
use crate::quadrature::{self, DEFAULT_NODES, DEFAULT_TOL, MAX_NODES};
use crate::report::{overall, Status};
use crate::space::{lattice_calculus, var};
use crate::space::{coords, KotheLattice, NormedSpace};

/// Angle nodes on `[0, π)` for the constant search.
pub const KRIVINE_SEARCH_NODES: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KrivineConstant {
    pub p: f64,
    pub c: f64,
    /// Worst value of `lhs − rhs` over the search grid (`≤ 0` when the inequality holds).
    pub max_residual: f64,
    pub grid_nodes: usize,
    pub worst_angle: f64,
    /// `2/√(p−1)`: the ratio's limit at `s = t`, which is the supremum for `p < 2`.
    pub diagonal_limit: f64,
}

/// `sqrt(((s−t)/C)² + ((s+t)/2)²) − ((|s|^p + |t|^p)/2)^{1/p}`.
pub fn krivine_residual(p: f64, c: f64, s: f64, t: f64) -> f64 {
    let lhs = ((s - t) / c).hypot(0.5 * (s + t));
    let rhs = if p == 2.0 {
        (0.5 * (s * s + t * t)).sqrt()
    } else {
        (0.5 * (s.abs().powf(p) + t.abs().powf(p))).powf(1.0 / p)
    };
    lhs - rhs
}

fn residual_at(p: f64, c: f64, theta: f64) -> f64 {
    let (t, s) = theta.sin_cos();
    krivine_residual(p, c, s, t)
}

/// Largest residual over `nodes` equally spaced angles on `[0, 2π)`, and its angle.
pub fn verify_krivine(p: f64, c: f64, nodes: usize) -> (f64, f64) {
    let (k, v) = argmax(nodes, &|k| residual_at(p, c, quadrature::angle(k, nodes))).expect("nodes > 0");
    (v, quadrature::angle(k, nodes))
}

/// Slack allowed for rounding when testing a candidate constant.
const RESIDUAL_ROUNDING: f64 = 1e-14;

/// Smallest `C` with `(|(s−t)/C|² + |(s+t)/2|²)^{1/2} ≤ ((|s|^p + |t|^p)/2)^{1/p}`
/// for all reals `s, t`. Both sides are 1-homogeneous, so only angles matter.
pub fn krivine_constant(p: f64) -> Result<KrivineConstant> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 < p < inf, got {p}")));
    }
    let diagonal_limit = 2.0 / (p - 1.0).sqrt();
    if p == 2.0 {
        // ((s−t)/2)² + ((s+t)/2)² = (s² + t²)/2 identically.
        let (r, a) = verify_krivine(2.0, 2.0, KRIVINE_SEARCH_NODES);
        return Ok(KrivineConstant {
            p,
            c: 2.0,
            max_residual: r,
            grid_nodes: KRIVINE_SEARCH_NODES,
            worst_angle: a,
            diagonal_limit,
        });
    }
    let worst = |c: f64| -> (f64, f64) {
        let n = KRIVINE_SEARCH_NODES;
        let (k, v) = argmax(n, &|k| residual_at(p, c, PI * k as f64 / n as f64)).expect("nodes > 0");
        let center = PI * k as f64 / n as f64;
        let h = PI / n as f64;
        let (theta, refined) = quadrature::circle_max(
            &|u| residual_at(p, c, center - h + 2.0 * h * u / std::f64::consts::TAU),
            8,
        );
        if refined > v {
            (refined, center - h + 2.0 * h * theta / std::f64::consts::TAU)
        } else {
            (v, center)
        }
    };
    let holds = |c: f64| worst(c).0 <= RESIDUAL_ROUNDING;
    // s = −t forces C ≥ 2.
    let mut lo = 2.0f64;
    let mut hi = 4.0f64.max(2.0 * diagonal_limit);
    while !holds(hi) {
        lo = hi;
        hi *= 2.0;
    }
    if holds(lo) {
        hi = lo;
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c = hi.max(diagonal_limit);
    let (max_residual, worst_angle) = worst(c);
    Ok(KrivineConstant {
        p,
        c,
        max_residual,
        grid_nodes: KRIVINE_SEARCH_NODES,
        worst_angle,
        diagonal_limit,
    })
}

/// `C_E = C^p / 2^{p−1}`: the constant in the form of the chain's last term
/// written with `f = |u|^p`, `g = |v|^p`.
pub fn lattice_level_constant(p: f64, c: f64) -> f64 {
    c.powf(p) / 2f64.powf(p - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eq3Report {
    pub p: f64,
    pub c: f64,
    pub c_lattice: f64,
    /// `E ‖ |u + r v|^p ‖_E`, i.e. `E ‖f ⊕ r⊙g‖^p` in root coordinates.
    pub lhs: f64,
    /// `‖ (|u + v|^p + |u − v|^p)/2 ‖_E`.
    pub symmetrized: f64,
    /// `‖ (|u|² + (2|v|/C)²)^{p/2} ‖_E`.
    pub rhs: f64,
    /// `lhs − symmetrized`: the triangle step.
    pub triangle_slack: f64,
    /// Smallest atomwise slack of the scalar inequality step.
    pub pointwise_slack: f64,
    /// `symmetrized − rhs`: the lattice monotonicity step.
    pub monotone_slack: f64,
    pub status: Status,
}

/// Checks the chain `E ‖|u + r v|^p‖ ≥ ‖(|u+v|^p + |u−v|^p)/2‖ ≥ ‖(|u|² + (2|v|/C)²)^{p/2}‖`
/// for root coordinates `u`, `v` of the p-convexification.
pub fn check_eq3(lattice: &KotheLattice, p: f64, u: &[f64], v: &[f64], c: f64, tol: f64) -> Result<Eq3Report> {
    check_len(lattice.atoms(), u.len())?;
    check_len(lattice.atoms(), v.len())?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 < p < inf, got {p}")));
    }
    let plus: Vec<f64> = u.iter().zip(v).map(|(a, b)| (a + b).abs().powf(p)).collect();
    let minus: Vec<f64> = u.iter().zip(v).map(|(a, b)| (a - b).abs().powf(p)).collect();
    let lhs = 0.5 * lattice.norm(&plus) + 0.5 * lattice.norm(&minus);
    let mean: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| 0.5 * (a + b)).collect();
    let symmetrized = lattice.norm(&mean);
    let expr = (var(0).abs().powf(2.0) + var(1).abs().powf(2.0).scale(4.0 / (c * c))).powf(p / 2.0);
    let bottom = lattice_calculus(lattice, &expr, &[u, v])?;
    let rhs = lattice.norm(&bottom);
    let pointwise_slack = mean
        .iter()
        .zip(&bottom)
        .map(|(m, b)| (m - b) / m.max(1.0))
        .fold(f64::INFINITY, f64::min);
    let triangle_slack = lhs - symmetrized;
    let monotone_slack = symmetrized - rhs;
    let status = overall([
        Status::from_slack(triangle_slack, tol),
        Status::from_slack(pointwise_slack, tol),
        Status::from_slack(monotone_slack, tol),
    ]);
    Ok(Eq3Report {
        p,
        c,
        c_lattice: lattice_level_constant(p, c),
        lhs,
        symmetrized,
        rhs,
        triangle_slack,
        pointwise_slack,
        monotone_slack,
        status,
    })
}

/// Root-coordinate vector with `‖ |u|^p ‖_E = radius^p`.
fn random_root(lattice: &KotheLattice, p: f64, radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut u: Vec<f64> = (0..lattice.atoms()).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let powered: Vec<f64> = u.iter().map(|t| t.abs().powf(p)).collect();
        let n = lattice.norm(&powered).powf(1.0 / p);
        if n > 0.0 && n.is_finite() {
            u.iter_mut().for_each(|t| *t *= radius / n);
            return u;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Eq3Batch {
    pub p: f64,
    pub c: f64,
    pub samples: usize,
    pub violations: usize,
    pub min_triangle_slack: f64,
    pub min_pointwise_slack: f64,
    pub min_monotone_slack: f64,
    pub status: Status,
}

/// [`check_eq3`] on `samples` seeded pairs with random norms.
pub fn check_eq3_batch(lattice: &KotheLattice, p: f64, samples: usize, seed: u64, tol: f64) -> Result<Eq3Batch> {
    let k = krivine_constant(p)?;
    let reports: Vec<Result<Eq3Report>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let ru: f64 = rng.random_range(0.1..2.0);
            let rv: f64 = rng.random_range(0.0..2.0);
            let u = random_root(lattice, p, ru, &mut rng);
            let v = random_root(lattice, p, rv, &mut rng);
            check_eq3(lattice, p, &u, &v, k.c, tol)
        })
        .collect();
    let mut batch = Eq3Batch {
        p,
        c: k.c,
        samples,
        violations: 0,
        min_triangle_slack: f64::INFINITY,
        min_pointwise_slack: f64::INFINITY,
        min_monotone_slack: f64::INFINITY,
        status: Status::Pass,
    };
    for r in reports {
        let r = r?;
        batch.min_triangle_slack = batch.min_triangle_slack.min(r.triangle_slack);
        batch.min_pointwise_slack = batch.min_pointwise_slack.min(r.pointwise_slack);
        batch.min_monotone_slack = batch.min_monotone_slack.min(r.monotone_slack);
        if r.status == Status::Violation {
            batch.violations += 1;
        }
        batch.status = batch.status.worst(r.status);
    }
    Ok(batch)
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneToConvexReport {
    pub p: f64,
    pub epsilon: f64,
    pub c: f64,
    /// `max(1, 2/p)`.
    pub modulus_exponent: f64,
    /// `(2/C)^p ε^p`.
    pub modulus_argument: f64,
    pub modulus: ModulusEstimate,
    /// `1 + M_q(argument)`.
    pub bound: f64,
    /// The modulus came from an agreeing grid oracle; otherwise the check is advisory.
    pub hard: bool,
    /// The modulus estimate vanishes and the bound reduces to `≥ 1`.
    pub degenerate: bool,
    pub samples: usize,
    pub min_lhs: f64,
    pub min_slack: f64,
    pub violations: usize,
    pub status: Status,
}

/// Checks `E ‖f ⊕ r⊙g‖^p ≥ 1 + M_{max(1,2/p)}((2/C)^p ε^p)` for seeded
/// `‖f‖ = 1`, `‖g‖ ∈ [ε, 2ε]` in the p-convexification.
#[allow(clippy::too_many_arguments)]
pub fn monotone_to_convex_bound(
    lattice: &KotheLattice,
    p: f64,
    eps: f64,
    samples: usize,
    seed: u64,
    config: &ModulusConfig,
    tol: f64,
) -> Result<MonotoneToConvexReport> {
    if !(eps > 0.0) {
        return Err(invalid("eps", format!("epsilon must be positive, got {eps}")));
    }
    let k = krivine_constant(p)?;
    let q = (2.0 / p).max(1.0);
    let arg = (2.0 / k.c).powf(p) * eps.powf(p);
    let modulus = monotonicity_modulus(lattice, q, arg, config)?;
    let m = modulus.value.max(0.0);
    let bound = 1.0 + m;
    let hard = modulus.confidence == Confidence::High;
    let degenerate = m <= 1e-12;
    let lhs: Vec<Result<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let u = random_root(lattice, p, 1.0, &mut rng);
            let scale: f64 = rng.random_range(1.0..2.0);
            let v = random_root(lattice, p, eps * scale, &mut rng);
            check_eq3(lattice, p, &u, &v, k.c, tol).map(|r| r.lhs)
        })
        .collect();
    let lhs = lhs.into_iter().collect::<Result<Vec<_>>>()?;
    let min_lhs = lhs.iter().copied().fold(f64::INFINITY, f64::min);
    let violations = lhs.iter().filter(|v| **v - bound < -tol).count();
    let status = if violations > 0 {
        Status::Violation
    } else if degenerate {
        Status::NotApplicable
    } else {
        Status::Pass
    };
    Ok(MonotoneToConvexReport {
        p,
        epsilon: eps,
        c: k.c,
        modulus_exponent: q,
        modulus_argument: arg,
        modulus,
        bound,
        hard,
        degenerate,
        samples,
        min_lhs,
        min_slack: min_lhs - bound,
        violations,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleChain {
    /// `‖ |x| + |y| ‖`.
    pub sum_of_moduli: f64,
    /// `(1/2π) ∫ ‖x + e^{iθ} y‖ dθ`.
    pub circle_mean: f64,
    /// `‖ (|x|² + |y|²/2)^{1/2} ‖`.
    pub quadratic: f64,
    pub nodes: usize,
    pub converged: bool,
    pub upper_slack: f64,
    pub lower_slack: f64,
    pub status: Status,
}

/// Checks `‖|x| + |y|‖ ≥ (1/2π) ∫ ‖x + e^{iθ} y‖ dθ ≥ ‖(|x|² + |y|²/2)^{1/2}‖`
/// for interleaved complex vectors in the complexified lattice.
pub fn complex_convexity_inequalities(lattice: &KotheLattice, x: &[f64], y: &[f64], tol: f64) -> Result<CircleChain> {
    let n = lattice.atoms();
    check_len(2 * n, x.len())?;
    check_len(2 * n, y.len())?;
    let (mx, my) = (coords::moduli(x), coords::moduli(y));
    let sum: Vec<f64> = mx.iter().zip(&my).map(|(a, b)| a + b).collect();
    let quad: Vec<f64> = mx.iter().zip(&my).map(|(a, b)| (a * a + 0.5 * b * b).sqrt()).collect();
    let space = NormedSpace::Complexified {
        lattice: lattice.clone(),
    };
    let mean = quadrature::adaptive_circle_mean(
        &|theta| {
            with_scratch(2 * n, |buf| {
                coords::rotate_add(buf, x, y, theta);
                space.norm(buf)
            })
        },
        DEFAULT_NODES,
        DEFAULT_TOL,
        MAX_NODES,
    );
    let sum_of_moduli = lattice.norm(&sum);
    let quadratic = lattice.norm(&quad);
    let upper_slack = sum_of_moduli - mean.value;
    let lower_slack = mean.value - quadratic;
    Ok(CircleChain {
        sum_of_moduli,
        circle_mean: mean.value,
        quadratic,
        nodes: mean.nodes,
        converged: mean.converged,
        upper_slack,
        lower_slack,
        status: Status::from_slack(upper_slack, tol).worst(Status::from_slack(lower_slack, tol)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MlucCheck {
    pub max_pm: f64,
    pub sum_of_moduli: f64,
    pub slack: f64,
    pub status: Status,
}

/// Checks `max(‖x + y‖, ‖x − y‖) ≤ ‖ |x| + |y| ‖` for real lattice vectors.
pub fn mluc_implies_ulum_check(lattice: &KotheLattice, x: &[f64], y: &[f64], tol: f64) -> Result<MlucCheck> {
    check_len(lattice.atoms(), x.len())?;
    check_len(lattice.atoms(), y.len())?;
    let plus: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a.abs() + b.abs()).collect();
    let max_pm = lattice.norm(&plus).max(lattice.norm(&minus));
    let sum_of_moduli = lattice.norm(&sum);
    let slack = sum_of_moduli - max_pm;
    Ok(MlucCheck {
        max_pm,
        sum_of_moduli,
        slack,
        status: Status::from_slack(slack, tol),
    })
}
