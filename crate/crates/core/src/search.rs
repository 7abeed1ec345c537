//! Derivative-free minimization: multistart pattern search with a projection
//! onto the feasible set, and exhaustive tensor-grid oracles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, GeomError, Result};
use crate::parallel::argmin;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub starts: usize,
    /// Cap on accepted-or-rejected polls per start.
    pub max_iters: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Random unit directions polled per sweep, in addition to the coordinate axes.
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            max_iters: 20_000,
            initial_step: 0.5,
            min_step: 1e-9,
            random_directions: 4,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub starts: usize,
    pub evaluations: u64,
    /// Largest minus smallest local minimum over the starts.
    pub spread: f64,
    /// Starts that hit the iteration cap before the step fell below `min_step`.
    pub unconverged_starts: usize,
}

struct Local {
    point: Vec<f64>,
    value: f64,
    evaluations: u64,
    converged: bool,
}

fn local_search<F, P>(mut x: Vec<f64>, f: &F, project: &P, config: &SearchConfig, rng: &mut ChaCha8Rng) -> Local
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let d = x.len();
    project(&mut x);
    let mut fx = f(&x);
    let mut evaluations = 1u64;
    let mut step = config.initial_step;
    let mut trial = vec![0.0; d];
    let mut dir = vec![0.0; d];
    let mut iters = 0usize;
    while step >= config.min_step {
        if iters >= config.max_iters {
            return Local {
                point: x,
                value: fx,
                evaluations,
                converged: false,
            };
        }
        let mut improved = false;
        let polls = 2 * d + 2 * config.random_directions;
        for k in 0..polls {
            if k < 2 * d {
                dir.iter_mut().for_each(|v| *v = 0.0);
                dir[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
            } else if k % 2 == 0 {
                let mut norm = 0.0_f64;
                for v in dir.iter_mut() {
                    *v = rng.sample(StandardNormal);
                    norm += *v * *v;
                }
                let norm = norm.sqrt().max(f64::MIN_POSITIVE);
                dir.iter_mut().for_each(|v| *v /= norm);
            } else {
                dir.iter_mut().for_each(|v| *v = -*v);
            }
            for ((t, a), b) in trial.iter_mut().zip(&x).zip(&dir) {
                *t = a + step * b;
            }
            project(&mut trial);
            let ft = f(&trial);
            evaluations += 1;
            iters += 1;
            if ft < fx {
                std::mem::swap(&mut x, &mut trial);
                fx = ft;
                improved = true;
                break;
            }
        }
        if improved {
            step = (step * 1.5).min(config.initial_step);
        } else {
            step *= 0.5;
        }
    }
    Local {
        point: x,
        value: fx,
        evaluations,
        converged: true,
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Minimizes `f` over the set onto which `project` maps, from `config.starts`
/// starting points drawn by `sample`. Start `k` uses its own random stream,
/// so the result does not depend on the worker count.
pub fn multistart<F, P, S>(f: &F, project: &P, sample: &S, config: &SearchConfig) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
    P: Fn(&mut [f64]) + Sync,
    S: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    if config.starts == 0 {
        return Err(invalid("starts", "need at least one start"));
    }
    if !(config.min_step > 0.0 && config.initial_step >= config.min_step) {
        return Err(invalid("step", "need 0 < min_step <= initial_step"));
    }
    let locals: Vec<Local> = (0..config.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            let x0 = sample(&mut rng);
            local_search(x0, f, project, config, &mut rng)
        })
        .collect();
    let best = locals
        .iter()
        .filter(|l| !l.value.is_nan())
        .min_by(|a, b| a.value.total_cmp(&b.value).then_with(|| lexicographic(&a.point, &b.point)))
        .unwrap_or(&locals[0]);
    let finite = locals.iter().map(|l| l.value).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(SearchResult {
        point: best.point.clone(),
        value: best.value,
        starts: config.starts,
        evaluations: locals.iter().map(|l| l.evaluations).sum(),
        spread: if hi >= lo { hi - lo } else { 0.0 },
        unconverged_starts: locals.iter().filter(|l| !l.converged).count(),
    })
}

/// Evenly spaced nodes `lo + (hi - lo) k / count`, `k = 0..count` (the upper
/// end excluded, for periodic axes) or `k = 0..=count-1` scaled to include it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub include_end: bool,
}

impl GridAxis {
    pub fn periodic(lo: f64, hi: f64, step: f64) -> Self {
        let count = (((hi - lo) / step).round() as usize).max(1);
        Self {
            lo,
            hi,
            count,
            include_end: false,
        }
    }

    pub fn closed(lo: f64, hi: f64, step: f64) -> Self {
        let count = (((hi - lo) / step).round() as usize).max(1) + 1;
        Self {
            lo,
            hi,
            count,
            include_end: true,
        }
    }

    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        let denom = if self.include_end {
            (self.count - 1).max(1)
        } else {
            self.count
        };
        self.lo + (self.hi - self.lo) * k as f64 / denom as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridResult {
    pub params: Vec<f64>,
    pub value: f64,
    pub points: u128,
}

/// Default cap on grid points.
pub const GRID_BUDGET: u128 = 1 << 25;

/// Exhaustive minimum of `f(params)` over a tensor grid; the first axis varies slowest.
pub fn grid_minimize<F>(axes: &[GridAxis], f: &F, budget: u128) -> Result<GridResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let points = axes.iter().fold(1u128, |acc, a| acc.saturating_mul(a.count as u128));
    if points > budget {
        return Err(GeomError::BudgetExceeded {
            required: points,
            budget,
        });
    }
    let decode = |mut idx: usize, out: &mut [f64]| {
        for (slot, axis) in out.iter_mut().zip(axes).rev() {
            *slot = axis.node(idx % axis.count);
            idx /= axis.count;
        }
    };
    let k = axes.len();
    let (idx, value) = argmin(points as usize, &|i| {
        let mut buf = [0.0; 32];
        decode(i, &mut buf[..k]);
        f(&buf[..k])
    })
    .ok_or_else(|| invalid("grid", "empty grid"))?;
    let mut params = vec![0.0; k];
    decode(idx, &mut params);
    Ok(GridResult { params, value, points })
}

/// Euclidean unit vector in `R^d` from `d - 1` hyperspherical angles.
pub fn sphere_from_angles(angles: &[f64]) -> Vec<f64> {
    let d = angles.len() + 1;
    let mut out = vec![0.0; d];
    let mut carry = 1.0;
    for (i, a) in angles.iter().enumerate() {
        out[i] = carry * a.cos();
        carry *= a.sin();
    }
    out[d - 1] = carry;
    out
}

/// Grid axes over the unit sphere of `R^d` (`d ≥ 2`). With `half`, only one
/// point of each antipodal pair is kept (last angle in `[0, π)`).
pub fn sphere_axes(d: usize, step: f64, half: bool) -> Vec<GridAxis> {
    let mut axes: Vec<GridAxis> = (0..d.saturating_sub(2)).map(|_| GridAxis::closed(0.0, PI, step)).collect();
    let last = if half { PI } else { 2.0 * PI };
    axes.push(GridAxis::periodic(0.0, last, step));
    axes
}

/// Largest step whose sphere grids over the given dimensions fit in `budget`
/// points, but not finer than `step`.
pub fn fit_step(dims: &[usize], step: f64, budget: u128) -> f64 {
    let mut s = step;
    loop {
        let points = dims
            .iter()
            .flat_map(|&d| sphere_axes(d, s, true))
            .fold(1u128, |acc, a| acc.saturating_mul(a.count as u128));
        if points <= budget {
            return s;
        }
        s *= 1.25;
    }
}
