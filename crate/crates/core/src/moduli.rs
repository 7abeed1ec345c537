//! Estimators for the moduli of convexity and monotonicity: multistart local
//! search over the constraint set, cross-checked by exhaustive angle grids in
//! low dimension. Every value is attained at the returned witnesses, so it is
//! an upper bound on the true infimum.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_len, invalid, GeomError, Result};
use crate::parallel::with_scratch;
use crate::quadrature::{self, DEFAULT_NODES};
use crate::random::{expect_real, ConvexGauge, ExpectConfig, SymmetricRv};
use crate::report::Status;
use crate::search::{self, grid_minimize, GridAxis, SearchConfig};
use crate::space::{coords, KotheLattice, NormedSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Multistart,
    GridOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    /// Grid oracle ran and agrees with the multistart value.
    High,
    /// No oracle (dimension too large or disabled); all starts converged.
    Medium,
    /// Oracle disagrees, or local searches hit their iteration cap.
    Low,
}

impl Confidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Confidence::High => "high",
            Confidence::Medium => "medium",
            Confidence::Low => "low",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Grid oracle whenever the search dimension allows it.
    Auto,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulusConfig {
    pub search: SearchConfig,
    pub oracle: OracleMode,
    /// Angle step of the grid oracle (coarsened to fit the budget).
    pub grid_step: f64,
    /// Cap on objective work for the grid oracle, in integrand evaluations.
    pub grid_budget: u128,
    /// Multistart and oracle values within this distance count as agreeing.
    pub agreement_tol: f64,
    /// Circle quadrature nodes for the complex moduli.
    pub nodes: usize,
    pub expect: ExpectConfig,
}

impl Default for ModulusConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            oracle: OracleMode::Auto,
            grid_step: 1e-3,
            grid_budget: 1 << 26,
            agreement_tol: 2e-3,
            nodes: DEFAULT_NODES,
            expect: ExpectConfig::default(),
        }
    }
}

impl ModulusConfig {
    pub fn without_oracle(mut self) -> Self {
        self.oracle = OracleMode::Off;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.search.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub epsilon: f64,
    pub value: f64,
    pub witness_x: Vec<f64>,
    pub witness_y: Vec<f64>,
    pub method: Method,
    pub confidence: Confidence,
    pub multistart_value: f64,
    pub oracle_value: Option<f64>,
    pub oracle_points: u128,
    pub starts: usize,
    pub evaluations: u64,
    pub spread: f64,
    pub unconverged_starts: usize,
}

enum XBlock {
    Free { orthant: bool },
    Fixed(Vec<f64>),
}

type Objective<'a> = dyn Fn(&[f64], &[f64]) -> f64 + Sync + 'a;

struct Problem<'a> {
    space: &'a NormedSpace,
    x: XBlock,
    eps: f64,
    y_orthant: bool,
    /// Objective unchanged under `y ↦ −y` (and under `(x, y) ↦ (−x, −y)`).
    symmetric: bool,
    /// Objective unchanged under `y ↦ e^{iψ} y` (complex spaces).
    phase_invariant: bool,
    /// Integrand evaluations per objective call, for grid budgeting.
    cost: u128,
    objective: &'a Objective<'a>,
}

fn project_block(space: &NormedSpace, v: &mut [f64], radius: f64, orthant: bool) {
    if orthant {
        v.iter_mut().for_each(|t| *t = t.abs());
    }
    if !space.project_to_sphere(v, radius) {
        v.iter_mut().for_each(|t| *t = 0.0);
        v[0] = 1.0;
        space.project_to_sphere(v, radius);
    }
}

/// Grid parametrization of one sphere block: axes plus a map from angles to a
/// Euclidean direction.
struct BlockGrid {
    axes: Vec<GridAxis>,
    kind: BlockKind,
    dim: usize,
}

#[derive(Clone, Copy)]
enum BlockKind {
    Sphere,
    Orthant,
    /// Complex vector up to a global phase: `m − 1` modulus angles, then `m − 1` phases.
    Phase,
}

impl BlockGrid {
    fn new(dim: usize, step: f64, kind: BlockKind, half: bool) -> Self {
        let axes = match kind {
            BlockKind::Orthant => (1..dim).map(|_| GridAxis::closed(0.0, FRAC_PI_2, step)).collect(),
            BlockKind::Sphere if dim == 1 => {
                if half {
                    Vec::new()
                } else {
                    vec![GridAxis {
                        lo: 0.0,
                        hi: TAU,
                        count: 2,
                        include_end: false,
                    }]
                }
            }
            BlockKind::Sphere => search::sphere_axes(dim, step, half),
            BlockKind::Phase => {
                let m = dim / 2;
                let mut axes: Vec<GridAxis> = (1..m).map(|_| GridAxis::closed(0.0, FRAC_PI_2, step)).collect();
                axes.extend((1..m).map(|_| GridAxis::periodic(0.0, TAU, step)));
                axes
            }
        };
        Self { axes, kind, dim }
    }

    fn direction(&self, params: &[f64]) -> Vec<f64> {
        match self.kind {
            BlockKind::Orthant => search::sphere_from_angles(params),
            BlockKind::Sphere if self.dim == 1 => vec![params.first().map_or(1.0, |a| a.cos())],
            BlockKind::Sphere => search::sphere_from_angles(params),
            BlockKind::Phase => {
                let m = self.dim / 2;
                let mags = search::sphere_from_angles(&params[..m - 1]);
                let mut out = vec![0.0; self.dim];
                for k in 0..m {
                    let psi = if k == 0 { 0.0 } else { params[m - 1 + k - 1] };
                    out[2 * k] = mags[k] * psi.cos();
                    out[2 * k + 1] = mags[k] * psi.sin();
                }
                out
            }
        }
    }
}

/// Largest real dimension per free block for which a grid oracle is attempted.
const ORACLE_MAX_DIM: usize = 3;

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.space.real_dim()
    }

    fn x_free(&self) -> bool {
        matches!(self.x, XBlock::Free { .. })
    }

    fn split<'b>(&'b self, z: &'b [f64]) -> (&'b [f64], &'b [f64]) {
        match &self.x {
            XBlock::Free { .. } => z.split_at(self.dim()),
            XBlock::Fixed(x) => (x.as_slice(), z),
        }
    }

    fn eval(&self, z: &[f64]) -> f64 {
        let (x, y) = self.split(z);
        (self.objective)(x, y)
    }

    fn project(&self, z: &mut [f64]) {
        let d = self.dim();
        match self.x {
            XBlock::Free { orthant } => {
                let (x, y) = z.split_at_mut(d);
                project_block(self.space, x, 1.0, orthant);
                project_block(self.space, y, self.eps, self.y_orthant);
            }
            XBlock::Fixed(_) => project_block(self.space, z, self.eps, self.y_orthant),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut z = Vec::with_capacity(2 * self.dim());
        if self.x_free() {
            z.extend(self.space.random_vector(rng));
        }
        z.extend(self.space.random_vector(rng));
        self.project(&mut z);
        z
    }

    fn y_kind(&self) -> BlockKind {
        if self.y_orthant {
            BlockKind::Orthant
        } else if self.phase_invariant {
            BlockKind::Phase
        } else {
            BlockKind::Sphere
        }
    }

    fn oracle_feasible(&self) -> bool {
        let y_dim = match self.y_kind() {
            BlockKind::Phase => self.dim() / 2,
            _ => self.dim(),
        };
        y_dim <= ORACLE_MAX_DIM && (!self.x_free() || self.dim() <= ORACLE_MAX_DIM)
    }

    fn grids(&self, step: f64) -> (Option<BlockGrid>, BlockGrid) {
        let x = match self.x {
            XBlock::Free { orthant: true } => Some(BlockGrid::new(self.dim(), step, BlockKind::Orthant, false)),
            XBlock::Free { orthant: false } => Some(BlockGrid::new(self.dim(), step, BlockKind::Sphere, self.symmetric)),
            XBlock::Fixed(_) => None,
        };
        let y = BlockGrid::new(self.dim(), step, self.y_kind(), self.symmetric);
        (x, y)
    }

    fn oracle(&self, config: &ModulusConfig) -> Result<(f64, Vec<f64>, u128)> {
        let point_budget = (config.grid_budget / self.cost.max(1)).max(1);
        let mut step = config.grid_step;
        let (xg, yg) = loop {
            let (xg, yg) = self.grids(step);
            let points = xg
                .iter()
                .flat_map(|g| g.axes.iter())
                .chain(&yg.axes)
                .fold(1u128, |acc, a| acc.saturating_mul(a.count as u128));
            if points <= point_budget {
                break (xg, yg);
            }
            step *= 1.25;
        };
        let nx = xg.as_ref().map_or(0, |g| g.axes.len());
        let mut axes: Vec<GridAxis> = xg.iter().flat_map(|g| g.axes.clone()).collect();
        axes.extend(yg.axes.iter().copied());
        let to_point = |params: &[f64]| -> Vec<f64> {
            let mut z = Vec::with_capacity(2 * self.dim());
            if let Some(g) = &xg {
                z.extend(g.direction(&params[..nx]));
            }
            z.extend(yg.direction(&params[nx..]));
            self.project(&mut z);
            z
        };
        let r = grid_minimize(&axes, &|params| self.eval(&to_point(params)), u128::MAX)?;
        let z = to_point(&r.params);
        Ok((self.eval(&z), z, r.points))
    }

    fn solve(&self, config: &ModulusConfig) -> Result<ModulusEstimate> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(invalid("eps", format!("epsilon must be positive, got {}", self.eps)));
        }
        let ms = search::multistart(&|z| self.eval(z), &|z| self.project(z), &|rng| self.sample(rng), &config.search)?;
        let oracle = if config.oracle == OracleMode::Auto && self.oracle_feasible() {
            Some(self.oracle(config)?)
        } else {
            None
        };
        let mut confidence = if ms.unconverged_starts * 2 > ms.starts {
            Confidence::Low
        } else {
            Confidence::Medium
        };
        let (mut value, mut z, mut method) = (ms.value, ms.point.clone(), Method::Multistart);
        let (mut oracle_value, mut oracle_points) = (None, 0);
        if let Some((ov, oz, points)) = oracle {
            oracle_value = Some(ov);
            oracle_points = points;
            confidence = if (ov - ms.value).abs() <= config.agreement_tol {
                Confidence::High
            } else {
                Confidence::Low
            };
            if ov < value {
                value = ov;
                z = oz;
                method = Method::GridOracle;
            }
        }
        let (x, y) = self.split(&z);
        Ok(ModulusEstimate {
            epsilon: self.eps,
            value,
            witness_x: x.to_vec(),
            witness_y: y.to_vec(),
            method,
            confidence,
            multistart_value: ms.value,
            oracle_value,
            oracle_points,
            starts: ms.starts,
            evaluations: ms.evaluations,
            spread: ms.spread,
            unconverged_starts: ms.unconverged_starts,
        })
    }
}

fn check_rv_field(space: &NormedSpace, rv: &SymmetricRv) -> Result<()> {
    if rv.is_complex() && !space.is_complex() {
        return Err(GeomError::ComplexOnlySpace(format!(
            "complex random variables need a complex space, got {}",
            space.label()
        )));
    }
    Ok(())
}

/// `E φ(‖x + r y‖)` with `x + r y` formed in real coordinates.
pub fn averaged_gauge(space: &NormedSpace, phi: &ConvexGauge, rv: &SymmetricRv, x: &[f64], y: &[f64], config: &ExpectConfig) -> f64 {
    let d = space.real_dim();
    expect_real(
        &[*rv],
        &|r| {
            with_scratch(d, |buf| {
                buf.copy_from_slice(x);
                if r[0].im == 0.0 {
                    coords::axpy(buf, r[0].re, y);
                } else {
                    coords::mul_add_complex(buf, y, r[0]);
                }
                phi.eval(space.norm(buf))
            })
        },
        config,
    )
    .map(|e| e.value)
    .unwrap_or(f64::NAN)
}

/// `δ_φ(ε) = inf { E φ(‖x + r y‖) − φ(1) : ‖x‖ = 1, ‖y‖ = ε }`.
pub fn delta_phi(space: &NormedSpace, phi: &ConvexGauge, rv: &SymmetricRv, eps: f64, config: &ModulusConfig) -> Result<ModulusEstimate> {
    check_rv_field(space, rv)?;
    let phi1 = phi.eval(1.0);
    let cost = rv.nodes().map_or(1, |n| n.len()) as u128;
    let objective = |x: &[f64], y: &[f64]| averaged_gauge(space, phi, rv, x, y, &config.expect) - phi1;
    Problem {
        space,
        x: XBlock::Free { orthant: false },
        eps,
        y_orthant: false,
        symmetric: true,
        phase_invariant: false,
        cost,
        objective: &objective,
    }
    .solve(config)
}

fn max_pm(space: &NormedSpace, x: &[f64], y: &[f64]) -> f64 {
    with_scratch(x.len(), |buf| {
        for ((b, a), c) in buf.iter_mut().zip(x).zip(y) {
            *b = a + c;
        }
        let plus = space.norm(buf);
        for ((b, a), c) in buf.iter_mut().zip(x).zip(y) {
            *b = a - c;
        }
        plus.max(space.norm(buf))
    })
}

fn unit_point(space: &NormedSpace, x: &[f64]) -> Result<Vec<f64>> {
    check_len(space.real_dim(), x.len())?;
    let mut x = x.to_vec();
    if !space.project_to_sphere(&mut x, 1.0) {
        return Err(GeomError::NotUnit { norm: 0.0 });
    }
    Ok(x)
}

/// `inf { max(‖x + y‖, ‖x − y‖) − 1 : ‖y‖ = ε }` at a unit point `x`
/// (renormalized if needed).
pub fn strong_extreme_modulus(space: &NormedSpace, x: &[f64], eps: f64, config: &ModulusConfig) -> Result<ModulusEstimate> {
    let x = unit_point(space, x)?;
    let objective = |x: &[f64], y: &[f64]| max_pm(space, x, y) - 1.0;
    Problem {
        space,
        x: XBlock::Fixed(x),
        eps,
        y_orthant: false,
        symmetric: true,
        phase_invariant: false,
        cost: 2,
        objective: &objective,
    }
    .solve(config)
}

/// `inf { max(‖x + y‖, ‖x − y‖) − 1 : ‖x‖ = 1, ‖y‖ = ε }`.
pub fn uniform_convexity_modulus(space: &NormedSpace, eps: f64, config: &ModulusConfig) -> Result<ModulusEstimate> {
    let objective = |x: &[f64], y: &[f64]| max_pm(space, x, y) - 1.0;
    Problem {
        space,
        x: XBlock::Free { orthant: false },
        eps,
        y_orthant: false,
        symmetric: true,
        phase_invariant: false,
        cost: 2,
        objective: &objective,
    }
    .solve(config)
}

fn check_lattice_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid("p", format!("need 1 <= p < inf, got {p}")))
    }
}

/// `‖(|x|^p + |y|^p)^{1/p}‖` in the lattice.
pub fn p_sum_norm(lattice: &KotheLattice, p: f64, x: &[f64], y: &[f64]) -> f64 {
    with_scratch(x.len(), |buf| {
        for ((b, a), c) in buf.iter_mut().zip(x).zip(y) {
            *b = if p == 1.0 {
                a.abs() + c.abs()
            } else {
                let (a, c) = (a.abs(), c.abs());
                let m = a.max(c);
                if m == 0.0 {
                    0.0
                } else {
                    m * ((a / m).powf(p) + (c / m).powf(p)).powf(1.0 / p)
                }
            };
        }
        lattice.norm(buf)
    })
}

/// `M_p(ε) = inf { ‖(|x|^p + |y|^p)^{1/p}‖ − 1 : ‖x‖ = 1, ‖y‖ = ε }`, over `x, y ≥ 0`.
pub fn monotonicity_modulus(lattice: &KotheLattice, p: f64, eps: f64, config: &ModulusConfig) -> Result<ModulusEstimate> {
    check_lattice_p(p)?;
    let space = NormedSpace::Kothe(lattice.clone());
    let objective = |x: &[f64], y: &[f64]| p_sum_norm(lattice, p, x, y) - 1.0;
    Problem {
        space: &space,
        x: XBlock::Free { orthant: true },
        eps,
        y_orthant: true,
        symmetric: false,
        phase_invariant: false,
        cost: 1,
        objective: &objective,
    }
    .solve(config)
}

/// `N_p(ε; x) = inf { ‖(|x|^p + |y|^p)^{1/p}‖ − 1 : ‖y‖ = ε }`, over `y ≥ 0`.
pub fn local_monotonicity_modulus(lattice: &KotheLattice, p: f64, x: &[f64], eps: f64, config: &ModulusConfig) -> Result<ModulusEstimate> {
    check_lattice_p(p)?;
    let space = NormedSpace::Kothe(lattice.clone());
    let x: Vec<f64> = unit_point(&space, x)?.iter().map(|t| t.abs()).collect();
    let objective = |x: &[f64], y: &[f64]| p_sum_norm(lattice, p, x, y) - 1.0;
    Problem {
        space: &space,
        x: XBlock::Fixed(x),
        eps,
        y_orthant: true,
        symmetric: false,
        phase_invariant: false,
        cost: 1,
        objective: &objective,
    }
    .solve(config)
}

/// Exponent of a circle modulus: finite `p ≥ 1` (mean) or `∞` (max).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircleExponent {
    Finite(f64),
    Infinite,
}

/// `(1/2π ∫ ‖x + e^{iθ} y‖^p dθ)^{1/p}` on `nodes` trapezoid nodes, or the
/// max over θ (best node refined by golden-section search).
pub fn circle_norm(space: &NormedSpace, q: CircleExponent, x: &[f64], y: &[f64], nodes: usize) -> f64 {
    let d = x.len();
    let at = |theta: f64| {
        with_scratch(d, |buf| {
            coords::rotate_add(buf, x, y, theta);
            space.norm(buf)
        })
    };
    match q {
        CircleExponent::Finite(p) if p == 1.0 => quadrature::circle_mean(&at, nodes),
        CircleExponent::Finite(p) => quadrature::circle_mean(&|t| at(t).powf(p), nodes).powf(1.0 / p),
        CircleExponent::Infinite => quadrature::circle_max(&at, nodes).1,
    }
}

/// `H_p(ε; x)` (or `H_∞`) over `‖y‖ = ε` in a complex space.
pub fn complex_modulus(space: &NormedSpace, q: CircleExponent, x: &[f64], eps: f64, config: &ModulusConfig) -> Result<ModulusEstimate> {
    if !space.is_complex() {
        return Err(GeomError::RealOnlySpace(format!(
            "circle moduli need a complex space, got {}",
            space.label()
        )));
    }
    if let CircleExponent::Finite(p) = q {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(invalid("p", format!("need 1 <= p < inf or inf, got {p}")));
        }
    }
    let x = unit_point(space, x)?;
    let nodes = config.nodes;
    let objective = |x: &[f64], y: &[f64]| circle_norm(space, q, x, y, nodes) - 1.0;
    Problem {
        space,
        x: XBlock::Fixed(x),
        eps,
        y_orthant: false,
        symmetric: true,
        phase_invariant: true,
        cost: nodes as u128,
        objective: &objective,
    }
    .solve(config)
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichRow {
    pub epsilon: f64,
    pub m_p: f64,
    pub m_1: f64,
    /// `M_1(ε) − M_p(ε)`; the upper inequality holds when this is `≥ −tol`.
    pub upper_slack: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub p: f64,
    pub local: bool,
    pub rows: Vec<SandwichRow>,
    /// Least `C ≥ 1` (to bisection precision) with `C⁻¹ M_1(C⁻¹ ε^p) ≤ M_p(ε)` on the grid.
    pub empirical_c: f64,
    /// `false` when no `C` up to the search cap works.
    pub c_finite: bool,
    pub status: Status,
}

/// Largest constant tried by [`sandwich_check`].
pub const SANDWICH_C_CAP: f64 = 1e6;

/// Checks `M_p ≤ M_1` (or `N_p ≤ N_1` when `x` is given) on an ε-grid and
/// estimates the least constant `C` for the lower bound `C⁻¹ M_1(C⁻¹ ε^p) ≤ M_p(ε)`.
pub fn sandwich_check(
    lattice: &KotheLattice,
    p: f64,
    x: Option<&[f64]>,
    eps_grid: &[f64],
    config: &ModulusConfig,
    tol: f64,
) -> Result<SandwichReport> {
    check_lattice_p(p)?;
    if eps_grid.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(invalid("eps", "grid values must lie in (0, 1]"));
    }
    let modulus = |q: f64, e: f64| match x {
        Some(x) => local_monotonicity_modulus(lattice, q, x, e, config).map(|m| m.value),
        None => monotonicity_modulus(lattice, q, e, config).map(|m| m.value),
    };
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        let m_p = modulus(p, e)?;
        let m_1 = modulus(1.0, e)?;
        rows.push(SandwichRow {
            epsilon: e,
            m_p,
            m_1,
            upper_slack: m_1 - m_p,
        });
    }
    let holds = |c: f64| -> Result<bool> {
        for row in &rows {
            let lower = modulus(1.0, row.epsilon.powf(p) / c)? / c;
            if lower > row.m_p + tol {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let (empirical_c, c_finite) = if holds(1.0)? {
        (1.0, true)
    } else if !holds(SANDWICH_C_CAP)? {
        (SANDWICH_C_CAP, false)
    } else {
        let (mut lo, mut hi) = (1.0f64, SANDWICH_C_CAP);
        while hi / lo > 1.0 + 1e-4 {
            let mid = (lo * hi).sqrt();
            if holds(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (hi, true)
    };
    let worst = rows.iter().map(|r| r.upper_slack).fold(f64::INFINITY, f64::min);
    Ok(SandwichReport {
        p,
        local: x.is_some(),
        rows,
        empirical_c,
        c_finite,
        status: Status::from_slack(worst.min(f64::MAX), tol),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexitySoundness {
    pub epsilon: f64,
    pub delta_phi: f64,
    pub classical: f64,
    /// `φ⁻¹(φ(1) + δ_φ(ε)) − 1`, the lower bound the classical modulus must meet.
    pub implied_lower: f64,
    /// At the classical witness: `max‖x ± y‖ − φ⁻¹(E φ(‖x + r y‖))`, which must be `≥ 0`.
    pub witness_slack: f64,
    /// `classical − implied_lower`; only advisory, both sides are estimates.
    pub estimate_slack: f64,
    pub status: Status,
}

/// Compares `δ_φ(ε)` with the classical modulus: `max‖x ± y‖ ≥ φ⁻¹(φ(1) + δ_φ(ε))`.
pub fn convexity_soundness(
    space: &NormedSpace,
    phi: &ConvexGauge,
    rv: &SymmetricRv,
    eps: f64,
    config: &ModulusConfig,
    tol: f64,
) -> Result<ConvexitySoundness> {
    let d = delta_phi(space, phi, rv, eps, config)?;
    let c = uniform_convexity_modulus(space, eps, config)?;
    let implied_lower = phi.inverse(phi.eval(1.0) + d.value.max(0.0)) - 1.0;
    let avg = averaged_gauge(space, phi, rv, &c.witness_x, &c.witness_y, &config.expect);
    let witness_slack = max_pm(space, &c.witness_x, &c.witness_y) - phi.inverse(avg);
    Ok(ConvexitySoundness {
        epsilon: eps,
        delta_phi: d.value,
        classical: c.value,
        implied_lower,
        witness_slack,
        estimate_slack: c.value - implied_lower,
        status: Status::from_slack(witness_slack, tol),
    })
}
