//! Randomized series `S_n = x_0 + Σ r_i x_i` and checks of their expectation
//! sequences.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_len, invalid, GeomError, Result};
use crate::parallel::{argmax, with_scratch};
use crate::random::{expect_real, ConvexGauge, ExpectConfig, Expectation, SymmetricRv};
use crate::report::Status;
use crate::space::{coords, NormedSpace};

/// Largest `n` for exhaustive sign enumeration (`2^{n-1}` patterns).
pub const SIGN_ENUMERATION_LIMIT: usize = 24;

/// Positive sign gaps below this are treated as zero.
pub const GAP_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RandomizedSeries {
    space: NormedSpace,
    start: Vec<f64>,
    steps: Vec<Vec<f64>>,
    rvs: Vec<SymmetricRv>,
}

impl RandomizedSeries {
    pub fn new(space: NormedSpace, start: Vec<f64>, steps: Vec<Vec<f64>>, rvs: Vec<SymmetricRv>) -> Result<Self> {
        let d = space.real_dim();
        check_len(d, start.len())?;
        for s in &steps {
            check_len(d, s.len())?;
        }
        check_len(steps.len(), rvs.len())?;
        if !space.is_complex() {
            if let Some(r) = rvs.iter().find(|r| r.is_complex()) {
                return Err(GeomError::ComplexOnlySpace(format!(
                    "{:?} variables need a complex space, got {}",
                    r.kind(),
                    space.label()
                )));
            }
        }
        Ok(Self {
            space,
            start,
            steps,
            rvs,
        })
    }

    /// Series with the same random variable law at every step.
    pub fn uniform(space: NormedSpace, start: Vec<f64>, steps: Vec<Vec<f64>>, rv: SymmetricRv) -> Result<Self> {
        let rvs = vec![rv; steps.len()];
        Self::new(space, start, steps, rvs)
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The partial series `S_k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self {
            space: self.space.clone(),
            start: self.start.clone(),
            steps: self.steps[..k].to_vec(),
            rvs: self.rvs[..k].to_vec(),
        }
    }

    /// Writes `x_0 + Σ r_i x_i` into `out`.
    pub fn realize(&self, r: &[Complex64], out: &mut [f64]) {
        out.copy_from_slice(&self.start);
        for (x, c) in self.steps.iter().zip(r) {
            if c.im == 0.0 {
                coords::axpy(out, c.re, x);
            } else {
                coords::mul_add_complex(out, x, *c);
            }
        }
    }
}

/// `E φ(‖x_0 + Σ r_i x_i‖)`.
pub fn series_expectation(
    series: &RandomizedSeries,
    phi: &ConvexGauge,
    config: &ExpectConfig,
) -> Result<Expectation<f64>> {
    let d = series.space.real_dim();
    expect_real(
        &series.rvs,
        &|r| {
            with_scratch(d, |buf| {
                series.realize(r, buf);
                phi.eval(series.space.norm(buf))
            })
        },
        config,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct SubmartingaleReport {
    /// `E φ(‖S_k‖)` for `k = 0..=n`.
    pub expectations: Vec<f64>,
    /// Largest decrease between consecutive terms (0 when nondecreasing).
    pub max_violation: f64,
    pub status: Status,
}

/// Checks that `k ↦ E φ(‖S_k‖)` is nondecreasing.
pub fn check_submartingale(
    series: &RandomizedSeries,
    phi: &ConvexGauge,
    config: &ExpectConfig,
    tol: f64,
) -> Result<SubmartingaleReport> {
    let expectations = (0..=series.len())
        .map(|k| series_expectation(&series.truncate(k), phi, config).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let max_violation = expectations
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0, f64::max);
    Ok(SubmartingaleReport {
        expectations,
        max_violation,
        status: Status::from_slack(-max_violation, tol),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub lambdas: Vec<f64>,
    /// `ψ(λ) = E φ(‖x + λ r y‖)` on the sorted grid.
    pub psi: Vec<f64>,
    pub evenness_violation: f64,
    pub monotone_violation: f64,
    pub convexity_violation: f64,
    pub status: Status,
}

/// Checks that `ψ(λ) = E φ(‖x + λ r y‖)` is even, convex, and increasing on `λ ≥ 0`.
pub fn check_scaling_monotone(
    space: &NormedSpace,
    x: &[f64],
    y: &[f64],
    phi: &ConvexGauge,
    rv: SymmetricRv,
    lambda_grid: &[f64],
    config: &ExpectConfig,
    tol: f64,
) -> Result<ScalingReport> {
    let mut lambdas = lambda_grid.to_vec();
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(invalid("lambda", "grid values must be finite"));
    }
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    for l in &lambdas {
        if lambdas.binary_search_by(|v| v.total_cmp(&-l)).is_err() && *l != 0.0 {
            return Err(invalid("lambda", format!("grid is not symmetric: {l} has no mirror")));
        }
    }
    let psi = lambdas
        .iter()
        .map(|&l| {
            let step: Vec<f64> = y.iter().map(|v| l * v).collect();
            let s = RandomizedSeries::new(space.clone(), x.to_vec(), vec![step], vec![rv])?;
            series_expectation(&s, phi, config).map(|e| e.value)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = lambdas.len();
    let evenness_violation = (0..m).map(|i| (psi[i] - psi[m - 1 - i]).abs()).fold(0.0, f64::max);
    let first_nonneg = lambdas.iter().position(|l| *l >= 0.0).unwrap_or(m);
    let monotone_violation = psi[first_nonneg..]
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0, f64::max);
    let convexity_violation = (1..m.saturating_sub(1))
        .map(|i| {
            let (a, b, c) = (lambdas[i - 1], lambdas[i], lambdas[i + 1]);
            let chord = ((c - b) * psi[i - 1] + (b - a) * psi[i + 1]) / (c - a);
            psi[i] - chord
        })
        .fold(0.0, f64::max);
    let worst = evenness_violation.max(monotone_violation).max(convexity_violation);
    Ok(ScalingReport {
        lambdas,
        psi,
        evenness_violation,
        monotone_violation,
        convexity_violation,
        status: Status::from_slack(-worst, tol),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignSup {
    pub value: f64,
    /// Attaining signs, first entry `+1`.
    pub signs: Vec<i8>,
}

/// Sign of step `j` (0-based, `j ≥ 1`) in enumeration pattern `m`: step 1 is
/// the most significant bit.
fn pattern_sign(m: usize, n: usize, j: usize) -> f64 {
    if (m >> (n - 1 - j)) & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `max_ε ‖Σ ε_i x_i‖` over all sign patterns, by exhaustive enumeration.
pub fn sign_sup(space: &NormedSpace, vectors: &[Vec<f64>]) -> Result<SignSup> {
    let n = vectors.len();
    if n == 0 {
        return Err(invalid("n", "need at least one vector"));
    }
    if n > SIGN_ENUMERATION_LIMIT {
        return Err(GeomError::BudgetExceeded {
            required: 1u128 << (n - 1),
            budget: 1u128 << (SIGN_ENUMERATION_LIMIT - 1),
        });
    }
    let d = space.real_dim();
    for v in vectors {
        check_len(d, v.len())?;
    }
    let eval = |m: usize| {
        with_scratch(d, |buf| {
            buf.copy_from_slice(&vectors[0]);
            for (j, v) in vectors.iter().enumerate().skip(1) {
                coords::axpy(buf, pattern_sign(m, n, j), v);
            }
            space.norm(buf)
        })
    };
    let (m, value) = argmax(1usize << (n - 1), &eval).expect("nonempty pattern set");
    let signs = (0..n).map(|j| if j == 0 { 1 } else { pattern_sign(m, n, j) as i8 }).collect();
    Ok(SignSup { value, signs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCertificate {
    pub rho: f64,
    pub rho1: f64,
    pub delta: f64,
    /// `log10 δ`, finite even when `δ` underflows.
    pub log10_delta: f64,
    /// `φ(ρ₁/3) Π P{|r_i − 1| < ρ₁/(3n)}`, as a base-10 logarithm.
    pub log10_tail_term: f64,
    /// `min_j E φ(|a + r_j ρ₁/(3n)|) − φ(a)`.
    pub gain_term: f64,
    /// `δ` is below `1e-300`: positive but numerically meaningless.
    pub vacuous: bool,
    pub witness_signs: Vec<i8>,
}

/// Smallest certificate value considered numerically meaningful.
pub const VACUOUS_BELOW: f64 = 1e-300;

/// The explicit gain constant for a sign gap `ρ` with `n` terms, `a = ‖x_1‖`
/// and laws `rvs` for `r_2..r_n`.
pub fn thm13_delta(
    rho: f64,
    n: usize,
    phi: &ConvexGauge,
    rvs: &[SymmetricRv],
    a: f64,
    config: &ExpectConfig,
) -> Result<GapCertificate> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid("rho", format!("sign gap must be positive, got {rho}")));
    }
    if n < 2 {
        return Err(invalid("n", format!("need n >= 2, got {n}")));
    }
    check_len(n - 1, rvs.len())?;
    if !(a >= 0.0) {
        return Err(invalid("a", format!("norm must be nonnegative, got {a}")));
    }
    let rho1 = rho.min(0.5);
    let eta = rho1 / (3.0 * n as f64);
    let mut log10_tail_term = phi.eval(rho1 / 3.0).log10();
    for rv in rvs {
        log10_tail_term += rv.tail_mass(eta)?.log10();
    }
    let phi_a = phi.eval(a);
    let mut gain_term = f64::INFINITY;
    for rv in rvs {
        let e = expect_real(
            &[*rv],
            &|r| phi.eval((Complex64::new(a, 0.0) + r[0] * eta).norm()) - phi_a,
            config,
        )?;
        gain_term = gain_term.min(e.value);
    }
    let tail_term = 10f64.powf(log10_tail_term);
    let delta = tail_term.min(gain_term);
    let log10_delta = log10_tail_term.min(gain_term.log10());
    Ok(GapCertificate {
        rho,
        rho1,
        delta,
        log10_delta,
        log10_tail_term,
        gain_term,
        vacuous: log10_delta < VACUOUS_BELOW.log10(),
        witness_signs: Vec::new(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Thm13Report {
    pub rho: f64,
    pub rho1: f64,
    pub delta: f64,
    pub log10_delta: f64,
    pub vacuous: bool,
    /// `E φ(‖x_1 + r_2 x_2 + ... + r_n x_n‖)`.
    pub lhs: f64,
    /// `φ(‖x_1‖) + δ`.
    pub rhs: f64,
    pub slack: f64,
    pub witness_signs: Vec<i8>,
    pub status: Status,
}

/// Computes the sign gap of `x_1..x_n`, its gain constant, and checks
/// `E φ(‖x_1 + Σ_{i≥2} r_i x_i‖) ≥ φ(‖x_1‖) + δ`.
pub fn thm13_verify(
    space: &NormedSpace,
    vectors: &[Vec<f64>],
    phi: &ConvexGauge,
    rvs: &[SymmetricRv],
    config: &ExpectConfig,
    tol: f64,
) -> Result<Thm13Report> {
    let n = vectors.len();
    if n < 2 {
        return Err(invalid("n", format!("need n >= 2, got {n}")));
    }
    check_len(n - 1, rvs.len())?;
    let sup = sign_sup(space, vectors)?;
    let a = space.norm(&vectors[0]);
    let rho = sup.value - a;
    let series = RandomizedSeries::new(space.clone(), vectors[0].clone(), vectors[1..].to_vec(), rvs.to_vec())?;
    let lhs = series_expectation(&series, phi, config)?.value;
    if !(rho > GAP_FLOOR * a.max(1.0)) {
        return Ok(Thm13Report {
            rho: rho.max(0.0),
            rho1: rho.clamp(0.0, 0.5),
            delta: 0.0,
            log10_delta: f64::NEG_INFINITY,
            vacuous: true,
            lhs,
            rhs: phi.eval(a),
            slack: lhs - phi.eval(a),
            witness_signs: sup.signs,
            status: Status::NotApplicable,
        });
    }
    let cert = thm13_delta(rho, n, phi, rvs, a, config)?;
    let rhs = phi.eval(a) + cert.delta;
    let slack = (lhs - phi.eval(a)) - cert.delta;
    Ok(Thm13Report {
        rho,
        rho1: cert.rho1,
        delta: cert.delta,
        log10_delta: cert.log10_delta,
        vacuous: cert.vacuous,
        lhs,
        rhs,
        slack,
        witness_signs: sup.signs,
        status: Status::from_slack(slack, tol),
    })
}
