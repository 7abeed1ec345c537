//! Quantitative representability of `ℓ_∞^n`: the sign gap of unit tuples,
//! embedding bounds for a tuple, and the lifting bound into `L_p(μ; X)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_len, invalid, GeomError, Result};
use crate::moduli::{Confidence, Method, ModulusConfig, OracleMode};
use crate::parallel::{pairwise_sum, with_scratch};
use crate::report::{overall, Status};
use crate::search::{self, grid_minimize, GridAxis, SearchConfig};
use crate::series::{sign_sup, SIGN_ENUMERATION_LIMIT};
use crate::space::{bochner, coords, BochnerSpace, NormedSpace};

/// `max_ε ‖Σ ε_i x_i‖` for a flat tuple of `n` vectors, sequentially.
fn flat_sign_sup(space: &NormedSpace, flat: &[f64], n: usize) -> f64 {
    let d = flat.len() / n;
    with_scratch(d, |buf| {
        let mut best = f64::NEG_INFINITY;
        for m in 0..1usize << (n - 1) {
            buf.copy_from_slice(&flat[..d]);
            for j in 1..n {
                let s = if (m >> (n - 1 - j)) & 1 == 1 { -1.0 } else { 1.0 };
                coords::axpy(buf, s, &flat[j * d..(j + 1) * d]);
            }
            best = best.max(space.norm(buf));
        }
        best
    })
}

fn project_tuple(space: &NormedSpace, flat: &mut [f64], n: usize) {
    let d = flat.len() / n;
    for v in flat.chunks_exact_mut(d) {
        if !space.project_to_sphere(v, 1.0) {
            v.iter_mut().for_each(|t| *t = 0.0);
            v[0] = 1.0;
            space.project_to_sphere(v, 1.0);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub n: usize,
    /// `min over unit tuples of sign_sup − 1` (a witnessed upper bound).
    pub rho: f64,
    pub witness_tuple: Vec<Vec<f64>>,
    pub method: Method,
    pub confidence: Confidence,
    pub multistart_value: f64,
    pub oracle_value: Option<f64>,
    pub starts: usize,
    pub evaluations: u64,
}

/// Sign gap `ρ(X, n)`: how far every unit `n`-tuple is from spanning an
/// isometric `ℓ_∞^n`.
pub fn rho_gap(space: &NormedSpace, n: usize, config: &ModulusConfig) -> Result<GapReport> {
    if n < 2 {
        return Err(invalid("n", format!("need n >= 2, got {n}")));
    }
    if n > SIGN_ENUMERATION_LIMIT {
        return Err(GeomError::BudgetExceeded {
            required: 1u128 << (n - 1),
            budget: 1u128 << (SIGN_ENUMERATION_LIMIT - 1),
        });
    }
    let d = space.real_dim();
    let f = |z: &[f64]| flat_sign_sup(space, z, n) - 1.0;
    let project = |z: &mut [f64]| project_tuple(space, z, n);
    // Start 0 is the coordinate tuple; the rest are random.
    let sample = |rng: &mut ChaCha8Rng| {
        let mut z = vec![0.0; n * d];
        if rng.get_stream() == 0 {
            for i in 0..n {
                z[i * d + i % d] = 1.0;
            }
        } else {
            for v in z.iter_mut() {
                *v = rng.sample(rand_distr::StandardNormal);
            }
        }
        project(&mut z);
        z
    };
    let ms = search::multistart(&f, &project, &sample, &config.search)?;
    let mut oracle_value = None;
    let (mut value, mut z, mut method) = (ms.value, ms.point.clone(), Method::Multistart);
    let mut confidence = if ms.unconverged_starts * 2 > ms.starts {
        Confidence::Low
    } else {
        Confidence::Medium
    };
    if config.oracle == OracleMode::Auto && d == 2 && n == 2 && !space.is_complex() {
        let budget = (config.grid_budget / 2).max(1);
        let mut step = config.grid_step;
        while ((std::f64::consts::PI / step).round() as u128).pow(2) > budget {
            step *= 1.25;
        }
        let axes = [
            GridAxis::periodic(0.0, std::f64::consts::PI, step),
            GridAxis::periodic(0.0, std::f64::consts::PI, step),
        ];
        let to_point = |a: &[f64]| {
            let mut z = vec![a[0].cos(), a[0].sin(), a[1].cos(), a[1].sin()];
            project(&mut z);
            z
        };
        let g = grid_minimize(&axes, &|a| f(&to_point(a)), u128::MAX)?;
        let gz = to_point(&g.params);
        let gv = f(&gz);
        oracle_value = Some(gv);
        confidence = if (gv - ms.value).abs() <= config.agreement_tol {
            Confidence::High
        } else {
            Confidence::Low
        };
        if gv < value {
            value = gv;
            z = gz;
            method = Method::GridOracle;
        }
    }
    Ok(GapReport {
        n,
        rho: value.max(0.0),
        witness_tuple: z.chunks_exact(d).map(|c| c.to_vec()).collect(),
        method,
        confidence,
        multistart_value: ms.value,
        oracle_value,
        starts: ms.starts,
        evaluations: ms.evaluations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub basis_images: Vec<Vec<f64>>,
    /// Estimated `min ‖Σ λ_i x_i‖` over `‖λ‖_∞ = 1`, by per-face minimization.
    pub lower: f64,
    pub lower_lambda: Vec<f64>,
    /// `max ‖Σ ε_i x_i‖` over sign patterns: exact over `‖λ‖_∞ ≤ 1` by convexity.
    pub upper: f64,
    pub upper_signs: Vec<i8>,
    /// `upper / lower`.
    pub lambda: f64,
    pub samples: usize,
    pub sampled_min: f64,
    pub sampled_max: f64,
    /// Required lower bound `1 − ρ − 1e−6`, when a gap was supplied.
    pub required_lower: Option<f64>,
    pub status: Status,
}

/// Estimated sign gaps at or below this are treated as zero: the optimizer
/// does not resolve smaller values.
pub const ESTIMATED_GAP_FLOOR: f64 = 1e-9;

/// Tolerance on unit norms of embedding inputs.
pub const UNIT_TOL: f64 = 1e-9;

/// Bounds for the map `λ ↦ Σ λ_i x_i` on `ℓ_∞^n`. The upper bound is exact;
/// the lower bound minimizes over each face `λ_{i0} = 1` (the norm is even,
/// so `λ_{i0} = −1` is the same face up to sign). When `rho` is given the
/// report checks `lower ≥ 1 − ρ − 1e−6`. `samples` random points of the
/// sphere `‖λ‖_∞ = 1` are also evaluated.
pub fn build_embedding(
    space: &NormedSpace,
    tuple: &[Vec<f64>],
    rho: Option<f64>,
    samples: usize,
    seed: u64,
    search: &SearchConfig,
) -> Result<EmbeddingReport> {
    let n = tuple.len();
    if n == 0 {
        return Err(invalid("n", "need at least one vector"));
    }
    let d = space.real_dim();
    for v in tuple {
        check_len(d, v.len())?;
        let norm = space.norm(v);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(GeomError::NotUnit { norm });
        }
    }
    let combo = |lambda: &[f64]| {
        with_scratch(d, |buf| {
            buf.iter_mut().for_each(|t| *t = 0.0);
            for (l, v) in lambda.iter().zip(tuple) {
                coords::axpy(buf, *l, v);
            }
            space.norm(buf)
        })
    };
    let sup = sign_sup(space, tuple)?;
    let mut lower = f64::INFINITY;
    let mut lower_lambda = vec![0.0; n];
    for i0 in 0..n {
        let full = |free: &[f64]| {
            let mut lam = Vec::with_capacity(n);
            lam.extend_from_slice(&free[..i0]);
            lam.push(1.0);
            lam.extend_from_slice(&free[i0..]);
            lam
        };
        let (value, lam) = if n == 1 {
            (combo(&[1.0]), vec![1.0])
        } else {
            let f = |free: &[f64]| combo(&full(free));
            let clamp = |free: &mut [f64]| free.iter_mut().for_each(|t| *t = t.clamp(-1.0, 1.0));
            let sample = |rng: &mut ChaCha8Rng| (0..n - 1).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let r = search::multistart(&f, &clamp, &sample, search)?;
            (r.value, full(&r.point))
        };
        if value < lower {
            lower = value;
            lower_lambda = lam;
        }
    }
    let sampled: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let face = rng.random_range(0..n);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let lam: Vec<f64> = (0..n)
                .map(|i| if i == face { sign } else { rng.random_range(-1.0..=1.0) })
                .collect();
            combo(&lam)
        })
        .collect();
    let sampled_min = sampled.iter().copied().fold(f64::INFINITY, f64::min);
    let sampled_max = sampled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let required_lower = rho.map(|r| 1.0 - r - 1e-6);
    let mut status = Status::from_slack(sup.value - sampled_max, 1e-12)
        .worst(Status::from_slack(sampled_min - lower, 1e-9));
    if let Some(req) = required_lower {
        status = status.worst(Status::from_slack(lower - req, 0.0));
    }
    Ok(EmbeddingReport {
        basis_images: tuple.to_vec(),
        lower,
        lower_lambda,
        upper: sup.value,
        upper_signs: sup.signs,
        lambda: sup.value / lower,
        samples,
        sampled_min,
        sampled_max,
        required_lower,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example21 {
    pub space: BochnerSpace,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `‖f‖, ‖g‖, ‖f + g‖, ‖f − g‖`.
    pub norms: [f64; 4],
    pub max_deviation: f64,
}

/// Two Rademacher multiples of a unit vector in `L_1` over four equal atoms:
/// `f = r_1 x_0`, `g = r_2 x_0`. They span an isometric `ℓ_∞^2`.
pub fn example21_witness(inner: &NormedSpace, x0: &[f64]) -> Result<Example21> {
    check_len(inner.real_dim(), x0.len())?;
    let norm = inner.norm(x0);
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(GeomError::NotUnit { norm });
    }
    let space = bochner(vec![0.25; 4], 1.0, inner.clone())?;
    let signed = |signs: [f64; 4]| -> Vec<f64> {
        signs.iter().flat_map(|s| x0.iter().map(move |v| s * v)).collect()
    };
    let f = signed([1.0, 1.0, -1.0, -1.0]);
    let g = signed([1.0, -1.0, 1.0, -1.0]);
    let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
    let diff: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
    let norms = [space.norm(&f), space.norm(&g), space.norm(&sum), space.norm(&diff)];
    let max_deviation = norms.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    Ok(Example21 {
        space,
        f,
        g,
        norms,
        max_deviation,
    })
}

/// Which branch of the two-case lifting argument an atom falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftCase {
    /// `(1 − ρ/3) M ≥ m`: the norms are spread out.
    Spread,
    /// `(1 − ρ/3) M < m`: the norms are comparable.
    Balanced,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRecord {
    /// `q(w)^p = E ‖Σ r_i f_i(w)‖^p`.
    pub q_p: f64,
    pub big_m: f64,
    pub small_m: f64,
    /// `(1/n) Σ ‖f_i(w)‖^p`.
    pub mean_p: f64,
    pub case: LiftCase,
    /// `(1 + ρ/(3n))` for a spread atom, `(1 + ρ/2)^p` for a balanced one.
    pub factor: f64,
    /// `q^p − factor · mean_p`.
    pub slack: f64,
    /// `q − M`.
    pub q_minus_m: f64,
    pub status: Status,
}

/// `E ‖Σ r_i v_i‖^p` over all sign patterns (the first sign fixed, by symmetry).
pub fn rademacher_moment(space: &NormedSpace, vectors: &[&[f64]], p: f64) -> f64 {
    let n = vectors.len();
    if n == 0 {
        return 0.0;
    }
    let d = space.real_dim();
    let half = 1usize << (n - 1);
    pairwise_sum(half, &|m| {
        with_scratch(d, |buf| {
            buf.copy_from_slice(vectors[0]);
            for (j, v) in vectors.iter().enumerate().skip(1) {
                let s = if (m >> (n - 1 - j)) & 1 == 1 { -1.0 } else { 1.0 };
                coords::axpy(buf, s, v);
            }
            space.norm(buf).powf(p)
        })
    }) / half as f64
}

/// Replays the two-case analysis at one atom with values `f_i(w)`.
pub fn casewise_check(space: &NormedSpace, values: &[&[f64]], rho: f64, p: f64, tol: f64) -> Result<CaseRecord> {
    let n = values.len();
    if n < 2 {
        return Err(invalid("n", format!("need n >= 2, got {n}")));
    }
    for v in values {
        check_len(space.real_dim(), v.len())?;
    }
    let norms: Vec<f64> = values.iter().map(|v| space.norm(v)).collect();
    let big_m = norms.iter().copied().fold(0.0, f64::max);
    let small_m = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_p = norms.iter().map(|t| t.powf(p)).sum::<f64>() / n as f64;
    let q_p = rademacher_moment(space, values, p);
    let (case, factor) = if (1.0 - rho / 3.0) * big_m >= small_m {
        (LiftCase::Spread, 1.0 + rho / (3.0 * n as f64))
    } else {
        (LiftCase::Balanced, (1.0 + rho / 2.0).powf(p))
    };
    let slack = q_p - factor * mean_p;
    let q_minus_m = q_p.powf(1.0 / p) - big_m;
    let scale = mean_p.max(1.0);
    let status = Status::from_slack(slack, tol * scale).worst(Status::from_slack(q_minus_m, tol * big_m.max(1.0)));
    Ok(CaseRecord {
        q_p,
        big_m,
        small_m,
        mean_p,
        case,
        factor,
        slack,
        q_minus_m,
        status,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftingReport {
    pub p: f64,
    pub n: usize,
    pub atoms: usize,
    /// Sign gap of the inner space.
    pub rho_gap: f64,
    /// Gap used in the bound: `min(ρ_gap, 1/2)`.
    pub rho: f64,
    pub bound: f64,
    pub samples: usize,
    /// Smallest `E ‖Σ r_i f_i‖^p` over the samples.
    pub min_moment: f64,
    pub bound_violations: usize,
    pub case_violations: usize,
    pub spread_atoms: usize,
    pub balanced_atoms: usize,
    pub min_case_slack: f64,
    pub min_q_minus_m: f64,
    pub status: Status,
}

/// Checks `E ‖Σ r_i f_i‖^p ≥ min{(1 + ρ/2)^p, 1 + ρ/(3n)}` for seeded unit
/// tuples in `L_p(μ; X)` with `atoms` equal atoms, and the per-atom case
/// inequalities.
#[allow(clippy::too_many_arguments)]
pub fn lifting_check(
    inner: &NormedSpace,
    p: f64,
    n: usize,
    atoms: usize,
    samples: usize,
    seed: u64,
    config: &ModulusConfig,
    tol: f64,
) -> Result<LiftingReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 < p < inf, got {p}")));
    }
    if atoms == 0 {
        return Err(invalid("atoms", "need at least one atom"));
    }
    let gap = rho_gap(inner, n, config)?;
    let space = bochner(vec![1.0 / atoms as f64; atoms], p, inner.clone())?;
    let rho = gap.rho.min(0.5);
    let bound = (1.0 + rho / 2.0).powf(p).min(1.0 + rho / (3.0 * n as f64));
    let mut report = LiftingReport {
        p,
        n,
        atoms,
        rho_gap: gap.rho,
        rho,
        bound,
        samples,
        min_moment: f64::INFINITY,
        bound_violations: 0,
        case_violations: 0,
        spread_atoms: 0,
        balanced_atoms: 0,
        min_case_slack: f64::INFINITY,
        min_q_minus_m: f64::INFINITY,
        status: Status::NotApplicable,
    };
    if !(gap.rho > ESTIMATED_GAP_FLOOR) {
        return Ok(report);
    }
    let outer = NormedSpace::Bochner(space.clone());
    let per_sample: Vec<Result<(f64, Vec<CaseRecord>)>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let tuple: Vec<Vec<f64>> = (0..n).map(|_| outer.random_unit(&mut rng)).collect();
            let refs: Vec<&[f64]> = tuple.iter().map(Vec::as_slice).collect();
            let moment = rademacher_moment(&outer, &refs, p);
            let records = (0..atoms)
                .map(|w| {
                    let vals: Vec<&[f64]> = tuple.iter().map(|f| space.atom_value(f, w)).collect();
                    casewise_check(inner, &vals, rho, p, tol)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((moment, records))
        })
        .collect();
    let mut statuses = Vec::new();
    for item in per_sample {
        let (moment, records) = item?;
        report.min_moment = report.min_moment.min(moment);
        let s = Status::from_slack(moment - bound, tol);
        if s == Status::Violation {
            report.bound_violations += 1;
        }
        statuses.push(s);
        for r in records {
            match r.case {
                LiftCase::Spread => report.spread_atoms += 1,
                LiftCase::Balanced => report.balanced_atoms += 1,
            }
            report.min_case_slack = report.min_case_slack.min(r.slack);
            report.min_q_minus_m = report.min_q_minus_m.min(r.q_minus_m);
            if r.status == Status::Violation {
                report.case_violations += 1;
            }
            statuses.push(r.status);
        }
    }
    report.status = overall(statuses);
    Ok(report)
}
