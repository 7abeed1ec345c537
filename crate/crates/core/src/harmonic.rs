//! Vector-valued harmonic functions on the disk with finitely many Fourier
//! modes, their `h^p` norms, and the sequence showing that norm convergence
//! does not follow from compact convergence plus convergence of norms.

use serde::Serialize;

use crate::error::{check_len, invalid, GeomError, Result};
use crate::moduli::{strong_extreme_modulus, ModulusConfig, ModulusEstimate};
use crate::parallel::with_scratch;
use crate::quadrature::{self, DEFAULT_NODES, MAX_NODES};
use crate::report::Status;
use crate::space::{coords, NormedSpace};

/// One real Fourier mode `r^n (cos(nθ) b + sin(nθ) c)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mode {
    pub n: u32,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

/// `f(re^{iθ}) = c_0 + Σ r^n (b_n cos nθ + c_n sin nθ)` with coefficients in a
/// normed space (real coordinates; interleaved for complex spaces).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicFunction {
    #[serde(skip)]
    space: NormedSpace,
    pub constant: Vec<f64>,
    pub modes: Vec<Mode>,
}

impl HarmonicFunction {
    pub fn constant(space: &NormedSpace, x: &[f64]) -> Result<Self> {
        check_len(space.real_dim(), x.len())?;
        Ok(Self {
            space: space.clone(),
            constant: x.to_vec(),
            modes: Vec::new(),
        })
    }

    /// Real form: `modes` lists `(n, b_n, c_n)` with distinct `n ≥ 1`.
    pub fn new(space: &NormedSpace, constant: &[f64], modes: Vec<Mode>) -> Result<Self> {
        let d = space.real_dim();
        check_len(d, constant.len())?;
        let mut seen = std::collections::BTreeSet::new();
        for m in &modes {
            check_len(d, m.cos.len())?;
            check_len(d, m.sin.len())?;
            if m.n == 0 || !seen.insert(m.n) {
                return Err(invalid("modes", format!("mode indices must be distinct and positive, got {}", m.n)));
            }
        }
        Ok(Self {
            space: space.clone(),
            constant: constant.to_vec(),
            modes,
        })
    }

    /// Complex form `Σ_{n=−N}^{N} a_n r^{|n|} e^{inθ}`; `coefficients[k]` is
    /// `a_{k−N}` as an interleaved vector of a complex space.
    pub fn from_complex(space: &NormedSpace, coefficients: &[Vec<f64>]) -> Result<Self> {
        if !space.is_complex() {
            return Err(GeomError::RealOnlySpace(format!(
                "complex Fourier coefficients need a complex space, got {}",
                space.label()
            )));
        }
        if coefficients.len() % 2 == 0 {
            return Err(invalid("coefficients", "need an odd count: a_{-N}..a_N"));
        }
        let big_n = coefficients.len() / 2;
        for c in coefficients {
            check_len(space.real_dim(), c.len())?;
        }
        let i = num_complex::Complex64::new(0.0, 1.0);
        let modes = (1..=big_n)
            .map(|n| {
                let (pos, neg) = (&coefficients[big_n + n], &coefficients[big_n - n]);
                let cos: Vec<f64> = pos.iter().zip(neg).map(|(a, b)| a + b).collect();
                let diff: Vec<f64> = pos.iter().zip(neg).map(|(a, b)| a - b).collect();
                Mode {
                    n: n as u32,
                    cos,
                    sin: coords::scale_complex(&diff, i),
                }
            })
            .collect();
        Self::new(space, &coefficients[big_n], modes)
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn degree(&self) -> u32 {
        self.modes.iter().map(|m| m.n).max().unwrap_or(0)
    }

    /// Evaluation for `0 ≤ r ≤ 1` (the boundary is allowed: the data are finite).
    pub fn eval_closed(&self, r: f64, theta: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.constant);
        for m in &self.modes {
            let rn = r.powi(m.n as i32);
            let (s, c) = (m.n as f64 * theta).sin_cos();
            coords::axpy(out, rn * c, &m.cos);
            coords::axpy(out, rn * s, &m.sin);
        }
    }

    pub fn eval(&self, r: f64, theta: f64) -> Result<Vec<f64>> {
        if !(0.0..1.0).contains(&r) {
            return Err(invalid("r", format!("need 0 <= r < 1, got {r}")));
        }
        let mut out = vec![0.0; self.constant.len()];
        self.eval_closed(r, theta, &mut out);
        Ok(out)
    }

    /// `f − g` for functions on the same space.
    pub fn sub(&self, other: &HarmonicFunction) -> Result<HarmonicFunction> {
        check_len(self.constant.len(), other.constant.len())?;
        let constant: Vec<f64> = self.constant.iter().zip(&other.constant).map(|(a, b)| a - b).collect();
        let mut modes = self.modes.clone();
        for m in &other.modes {
            let neg = |v: &[f64]| v.iter().map(|t| -t).collect::<Vec<f64>>();
            match modes.iter_mut().find(|k| k.n == m.n) {
                Some(k) => {
                    coords::axpy(&mut k.cos, -1.0, &m.cos);
                    coords::axpy(&mut k.sin, -1.0, &m.sin);
                }
                None => modes.push(Mode {
                    n: m.n,
                    cos: neg(&m.cos),
                    sin: neg(&m.sin),
                }),
            }
        }
        HarmonicFunction::new(&self.space, &constant, modes)
    }

    /// `(1/2π) ∫ ‖f(re^{iθ})‖^p dθ` with adaptive node doubling.
    pub fn circle_mean(&self, p: f64, r: f64, nodes: usize) -> quadrature::CircleMean {
        let d = self.constant.len();
        let start = nodes.max((8 * self.degree() as usize).next_power_of_two());
        quadrature::adaptive_circle_mean(
            &|theta| {
                with_scratch(d, |buf| {
                    self.eval_closed(r, theta, buf);
                    self.space.norm(buf).powf(p)
                })
            },
            start,
            1e-12,
            MAX_NODES.max(start),
        )
    }
}

/// Default radii: `0` and `1 − 2^{−k}` for `k = 1..=12`.
pub fn default_radii() -> Vec<f64> {
    std::iter::once(0.0).chain((1..=12).map(|k| 1.0 - 0.5f64.powi(k))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HpNorm {
    pub p: f64,
    pub value: f64,
    pub radii: Vec<f64>,
    /// Circle means of `‖f‖^p` at each radius, then at `r = 1`.
    pub means: Vec<f64>,
    pub boundary_mean: f64,
    /// Largest decrease of the mean along increasing radii (0 when monotone).
    pub monotone_violation: f64,
    pub converged: bool,
}

/// `‖f‖_p = sup_r (circle mean of ‖f(re^{iθ})‖^p)^{1/p}`, over the radius grid
/// and the boundary circle.
pub fn hp_norm(f: &HarmonicFunction, p: f64, radii: Option<&[f64]>, nodes: usize) -> Result<HpNorm> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 <= p < inf, got {p}")));
    }
    let mut radii = radii.map_or_else(default_radii, <[f64]>::to_vec);
    if radii.iter().any(|r| !(0.0..1.0).contains(r)) {
        return Err(invalid("r", "radii must lie in [0, 1)"));
    }
    radii.sort_by(f64::total_cmp);
    let mut converged = true;
    let mut means: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let m = f.circle_mean(p, r, nodes);
            converged &= m.converged;
            m.value
        })
        .collect();
    let boundary = f.circle_mean(p, 1.0, nodes);
    converged &= boundary.converged;
    means.push(boundary.value);
    let monotone_violation = means.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    let sup = means.iter().copied().fold(0.0, f64::max);
    Ok(HpNorm {
        p,
        value: sup.powf(1.0 / p),
        radii,
        means,
        boundary_mean: boundary.value,
        monotone_violation,
        converged,
    })
}

/// Polar grid resolution for compact-set suprema.
pub const POLAR_RADII: usize = 64;
pub const POLAR_ANGLES: usize = 1024;

/// `sup_{|z| ≤ ρ} ‖g(z) − f(z)‖` on a polar grid that includes `r = ρ`, `θ = 0`.
pub fn compact_distance(g: &HarmonicFunction, f: &HarmonicFunction, rho: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid("rho", format!("need 0 <= rho < 1, got {rho}")));
    }
    let diff = g.sub(f)?;
    let d = diff.constant.len();
    let mut best = 0.0f64;
    with_scratch(d, |buf| {
        for i in 0..=POLAR_RADII {
            let r = rho * i as f64 / POLAR_RADII as f64;
            for k in 0..POLAR_ANGLES {
                diff.eval_closed(r, quadrature::angle(k, POLAR_ANGLES), buf);
                best = best.max(diff.space.norm(buf));
            }
        }
    });
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaRow {
    pub n: usize,
    pub distance: f64,
}

/// Compact-set distances `sup_{|z| ≤ ρ} ‖f_n − f‖` along a sequence.
pub fn beta_convergence_check(seq: &[HarmonicFunction], f: &HarmonicFunction, rho: f64) -> Result<Vec<BetaRow>> {
    seq.iter()
        .enumerate()
        .map(|(i, g)| {
            compact_distance(g, f, rho).map(|distance| BetaRow { n: i + 1, distance })
        })
        .collect()
}

/// `f_n(z) = x + ½(z^n + z̄^n) x_n = x + r^n cos(nθ) x_n`.
pub fn kk_member(space: &NormedSpace, x: &[f64], n: u32, xn: &[f64]) -> Result<HarmonicFunction> {
    let zero = vec![0.0; x.len()];
    HarmonicFunction::new(
        space,
        x,
        vec![Mode {
            n,
            cos: xn.to_vec(),
            sin: zero,
        }],
    )
}

/// `(1/2π) ∫ |cos θ|^p dθ`.
pub fn cos_moment(p: f64) -> f64 {
    quadrature::adaptive_circle_mean(&|t: f64| t.cos().abs().powf(p), DEFAULT_NODES, 1e-14, MAX_NODES).value
}

#[derive(Clone, Debug, Serialize)]
pub struct KkRow {
    pub n: usize,
    /// `sup_{|z| ≤ 0.9} ‖f_n − f‖` on the polar grid.
    pub beta_distance: f64,
    /// `0.9^n ‖x_n‖`.
    pub beta_closed_form: f64,
    pub norm_fn: f64,
    pub norm_f: f64,
    pub distance: f64,
    /// `(1/2π) ∫ ‖x + cos θ x_n‖^p dθ`, which must equal `‖f_n‖_p^p`.
    pub cos_mean: f64,
    pub identity_error: f64,
    pub monotone_violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KkReport {
    pub p: f64,
    pub epsilon: f64,
    pub premise: ModulusEstimate,
    pub premise_holds: bool,
    /// `ε ((1/2π) ∫ |cos θ|^p dθ)^{1/p}`.
    pub separation_bound: f64,
    pub rows: Vec<KkRow>,
    /// Norms converge, distances stay above the bound, compact distances vanish.
    pub failure_certified: bool,
    pub status: Status,
}

/// Radius of the compact set used for the β-distances.
pub const BETA_RADIUS: f64 = 0.9;

/// Premise threshold on the strongly-extreme modulus at `x`.
pub const PREMISE_TOL: f64 = 1e-4;

/// Builds `f_n = x + r^n cos(nθ) x_n` for the given steps and checks that
/// `f_n → f = x` on compacts and in norm of `h^p`, while `‖f_n − f‖_p`
/// stays bounded below. Applies only when `x` is not a strongly extreme point
/// (modulus at `x` below [`PREMISE_TOL`] for `ε = min ‖x_n‖`).
pub fn kk_beta_demo(
    space: &NormedSpace,
    x: &[f64],
    steps: &[Vec<f64>],
    p: f64,
    config: &ModulusConfig,
    tol: f64,
) -> Result<KkReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 <= p < inf, got {p}")));
    }
    if steps.is_empty() {
        return Err(invalid("steps", "need at least one step vector"));
    }
    check_len(space.real_dim(), x.len())?;
    let xnorm = space.norm(x);
    if (xnorm - 1.0).abs() > 1e-9 {
        return Err(GeomError::NotUnit { norm: xnorm });
    }
    let eps = steps.iter().map(|v| space.norm(v)).fold(f64::INFINITY, f64::min);
    if !(eps > 0.0) {
        return Err(invalid("steps", "step vectors must be nonzero"));
    }
    let premise = strong_extreme_modulus(space, x, eps, config)?;
    let premise_holds = premise.value <= PREMISE_TOL;
    let separation_bound = eps * cos_moment(p).powf(1.0 / p);
    let f = HarmonicFunction::constant(space, x)?;
    let norm_f = hp_norm(&f, p, None, DEFAULT_NODES)?.value;
    let mut rows = Vec::with_capacity(steps.len());
    for (i, xn) in steps.iter().enumerate() {
        let n = i + 1;
        check_len(space.real_dim(), xn.len())?;
        let fn_ = kk_member(space, x, n as u32, xn)?;
        let h = hp_norm(&fn_, p, None, DEFAULT_NODES)?;
        let dist = hp_norm(&fn_.sub(&f)?, p, None, DEFAULT_NODES)?.value;
        let d = space.real_dim();
        let cos_mean = quadrature::adaptive_circle_mean(
            &|t: f64| {
                with_scratch(d, |buf| {
                    buf.copy_from_slice(x);
                    coords::axpy(buf, t.cos(), xn);
                    space.norm(buf).powf(p)
                })
            },
            DEFAULT_NODES,
            1e-12,
            MAX_NODES,
        )
        .value;
        rows.push(KkRow {
            n,
            beta_distance: compact_distance(&fn_, &f, BETA_RADIUS)?,
            beta_closed_form: BETA_RADIUS.powi(n as i32) * space.norm(xn),
            norm_fn: h.value,
            norm_f,
            distance: dist,
            cos_mean,
            identity_error: (h.boundary_mean - cos_mean).abs(),
            monotone_violation: h.monotone_violation,
        });
    }
    let last = rows.last().expect("nonempty");
    let norms_converge = (last.norm_fn - last.norm_f).abs() <= 1e-6;
    let separated = rows.iter().all(|r| r.distance >= separation_bound - 1e-6);
    let compact = rows.windows(2).all(|w| w[1].beta_distance <= w[0].beta_distance + 1e-12);
    let consistent = rows.iter().all(|r| {
        r.identity_error <= 1e-6 && r.monotone_violation <= 1e-10 && (r.beta_distance - r.beta_closed_form).abs() <= 1e-10
    });
    // Lower semicontinuity: ‖f‖ ≤ liminf ‖f_n‖.
    let lsc = norm_f <= rows.iter().map(|r| r.norm_fn).fold(f64::INFINITY, f64::min) + 1e-6;
    let failure_certified = premise_holds && norms_converge && separated && compact;
    let status = if !consistent || !lsc || (premise_holds && !separated) {
        Status::from_slack(-1.0, tol)
    } else if premise_holds {
        Status::Pass
    } else {
        Status::NotApplicable
    };
    Ok(KkReport {
        p,
        epsilon: eps,
        premise,
        premise_holds,
        separation_bound,
        rows,
        failure_certified,
        status,
    })
}

/// [`kk_beta_demo`] with every step equal to the witness `y` of the
/// strongly-extreme modulus at `x` for `‖y‖ = ε`.
pub fn kk_beta_demo_auto(
    space: &NormedSpace,
    x: &[f64],
    eps: f64,
    p: f64,
    terms: usize,
    config: &ModulusConfig,
    tol: f64,
) -> Result<KkReport> {
    let premise = strong_extreme_modulus(space, x, eps, config)?;
    let steps = vec![premise.witness_y.clone(); terms.max(1)];
    kk_beta_demo(space, x, &steps, p, config, tol)
}
