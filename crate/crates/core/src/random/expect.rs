use num_complex::Complex64;
use serde::Serialize;

use super::{Engine, SymmetricRv};
use crate::error::{invalid, GeomError, Result};
use crate::parallel::pairwise_sum;
use crate::quadrature::MAX_NODES;

/// Default cap on integrand evaluations per expectation.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

/// Longest supported tuple of random variables.
pub const MAX_VARIABLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectConfig {
    pub budget: u128,
    /// When set, quadrature node counts double until successive values agree
    /// to this tolerance (relative to `max(1, |value|)`).
    pub adaptive_tol: Option<f64>,
    pub max_nodes: usize,
}

impl Default for ExpectConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            adaptive_tol: None,
            max_nodes: MAX_NODES,
        }
    }
}

impl ExpectConfig {
    pub fn adaptive(tol: f64) -> Self {
        Self {
            adaptive_tol: Some(tol),
            ..Self::default()
        }
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expectation<T> {
    pub value: T,
    pub evaluations: u128,
    pub converged: bool,
    /// Node (or sample) count used for each variable.
    pub node_counts: Vec<usize>,
}

/// Tensor grid over the deterministic variables, times a joint sample table
/// for the Monte Carlo ones. The first variable is the slowest digit.
struct Plan {
    /// Per deterministic variable: its position and node set.
    tables: Vec<(usize, Vec<(Complex64, f64)>)>,
    /// Per Monte Carlo variable: its position and `samples` draws.
    mc: Vec<(usize, Vec<Complex64>)>,
    mc_rows: usize,
    total: u128,
    n: usize,
}

impl Plan {
    fn build(rvs: &[SymmetricRv]) -> Self {
        let mut tables = Vec::new();
        let mut mc = Vec::new();
        let mc_rows = rvs
            .iter()
            .filter_map(|r| match r.engine() {
                Engine::MonteCarlo { samples, .. } => Some(samples.div_ceil(2) * 2),
                _ => None,
            })
            .max()
            .unwrap_or(1);
        for (pos, rv) in rvs.iter().enumerate() {
            match rv.engine() {
                Engine::MonteCarlo { seed, .. } => {
                    mc.push((pos, rv.antithetic_samples(mc_rows, seed, pos as u64)));
                }
                _ => tables.push((pos, rv.nodes().expect("deterministic engine"))),
            }
        }
        let total = tables
            .iter()
            .map(|t| t.1.len() as u128)
            .fold(mc_rows as u128, |acc, k| acc.saturating_mul(k));
        Plan {
            tables,
            mc,
            mc_rows,
            total,
            n: rvs.len(),
        }
    }

    fn node_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for (pos, t) in &self.tables {
            counts[*pos] = t.len();
        }
        for (pos, _) in &self.mc {
            counts[*pos] = self.mc_rows;
        }
        counts
    }

    /// Fills `out` with the realization at flat index `idx`; returns its weight.
    #[inline]
    fn realize(&self, mut idx: usize, out: &mut [Complex64]) -> f64 {
        let row = idx % self.mc_rows;
        idx /= self.mc_rows;
        for (pos, draws) in &self.mc {
            out[*pos] = draws[row];
        }
        let mut weight = 1.0 / self.mc_rows as f64;
        for (pos, table) in self.tables.iter().rev() {
            let k = table.len();
            let (z, w) = table[idx % k];
            idx /= k;
            out[*pos] = z;
            weight *= w;
        }
        weight
    }

    fn sum<F>(&self, f: &F) -> f64
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        let n = self.n;
        pairwise_sum(self.total as usize, &|i| {
            let mut buf = [Complex64::new(0.0, 0.0); MAX_VARIABLES];
            let w = self.realize(i, &mut buf[..n]);
            w * f(&buf[..n])
        })
    }
}

fn run<T, F>(rvs: &[SymmetricRv], config: &ExpectConfig, eval: F) -> Result<Expectation<T>>
where
    F: Fn(&Plan) -> T,
    T: Copy + Distance,
{
    if rvs.len() > MAX_VARIABLES {
        return Err(invalid(
            "n",
            format!("at most {MAX_VARIABLES} random variables, got {}", rvs.len()),
        ));
    }
    let mut current: Vec<SymmetricRv> = rvs.to_vec();
    let mut plan = Plan::build(&current);
    if plan.total > config.budget {
        return Err(GeomError::BudgetExceeded {
            required: plan.total,
            budget: config.budget,
        });
    }
    let mut evaluations = plan.total;
    let mut value = eval(&plan);
    let Some(tol) = config.adaptive_tol else {
        return Ok(Expectation {
            value,
            evaluations,
            converged: true,
            node_counts: plan.node_counts(),
        });
    };
    let refinable = |r: &SymmetricRv| matches!(r.engine(), Engine::Quadrature { .. });
    if !current.iter().any(refinable) {
        return Ok(Expectation {
            value,
            evaluations,
            converged: true,
            node_counts: plan.node_counts(),
        });
    }
    loop {
        let next: Vec<SymmetricRv> = current
            .iter()
            .map(|r| match r.engine() {
                Engine::Quadrature { nodes } => r.with_nodes(nodes * 2),
                _ => *r,
            })
            .collect();
        let too_fine = next.iter().any(|r| match r.engine() {
            Engine::Quadrature { nodes } => nodes > config.max_nodes,
            _ => false,
        });
        let next_plan = Plan::build(&next);
        if too_fine || evaluations.saturating_add(next_plan.total) > config.budget {
            return Ok(Expectation {
                value,
                evaluations,
                converged: false,
                node_counts: plan.node_counts(),
            });
        }
        let next_value = eval(&next_plan);
        evaluations += next_plan.total;
        let scale = next_value.magnitude().max(1.0);
        let done = next_value.distance(value) <= tol * scale;
        value = next_value;
        current = next;
        plan = next_plan;
        if done {
            return Ok(Expectation {
                value,
                evaluations,
                converged: true,
                node_counts: plan.node_counts(),
            });
        }
    }
}

trait Distance {
    fn distance(&self, other: Self) -> f64;
    fn magnitude(&self) -> f64;
}

impl Distance for f64 {
    fn distance(&self, other: Self) -> f64 {
        (self - other).abs()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Distance for Complex64 {
    fn distance(&self, other: Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// `E f(r_1, ..., r_n)` for a real-valued integrand.
pub fn expect_real<F>(rvs: &[SymmetricRv], f: &F, config: &ExpectConfig) -> Result<Expectation<f64>>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    run(rvs, config, |plan| plan.sum(f))
}

/// `E f(r_1, ..., r_n)` for a complex-valued integrand.
pub fn expect<F>(rvs: &[SymmetricRv], f: &F, config: &ExpectConfig) -> Result<Expectation<Complex64>>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    run(rvs, config, |plan| {
        Complex64::new(plan.sum(&|r| f(r).re), plan.sum(&|r| f(r).im))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::RvKind;

    fn cfg() -> ExpectConfig {
        ExpectConfig::default()
    }

    #[test]
    fn rademacher_examples() {
        let r = SymmetricRv::rademacher();
        let e = expect_real(&[r, r], &|v| (v[0] + v[1]).re.abs(), &cfg()).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.evaluations, 4);
        let e = expect(&[r], &|v| v[0], &cfg()).unwrap();
        assert_eq!(e.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cos_theta_second_moment() {
        let c = SymmetricRv::cos_theta(256).unwrap();
        let e = expect_real(&[c], &|v| v[0].re * v[0].re, &cfg()).unwrap();
        assert!((e.value - 0.5).abs() < 1e-14);
        let u = SymmetricRv::uniform(8).unwrap();
        let e = expect_real(&[u], &|v| v[0].re * v[0].re, &cfg()).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-14);
        let z = SymmetricRv::complex_circle(64).unwrap();
        let e = expect(&[z], &|v| v[0] * v[0].conj(), &cfg()).unwrap();
        assert!((e.value - 1.0).norm() < 1e-14);
    }

    #[test]
    fn first_variable_is_slowest_digit() {
        let r = SymmetricRv::rademacher();
        let plan = Plan::build(&[r, r, r]);
        let mut buf = [Complex64::new(0.0, 0.0); 3];
        plan.realize(1, &mut buf);
        assert_eq!([buf[0].re, buf[1].re, buf[2].re], [1.0, 1.0, -1.0]);
        plan.realize(4, &mut buf);
        assert_eq!([buf[0].re, buf[1].re, buf[2].re], [-1.0, 1.0, 1.0]);
    }

    #[test]
    fn monte_carlo_is_seeded_and_antithetic() {
        let m = SymmetricRv::monte_carlo(RvKind::UniformSymmetric, 1000, 3).unwrap();
        let a = expect_real(&[m], &|v| v[0].re, &cfg()).unwrap();
        assert!(a.value.abs() < 1e-15);
        let b = expect_real(&[m], &|v| v[0].re.powi(2), &cfg()).unwrap();
        let c = expect_real(&[m], &|v| v[0].re.powi(2), &cfg()).unwrap();
        assert_eq!(b.value, c.value);
        assert!((b.value - 1.0 / 3.0).abs() < 0.05);
    }

    #[test]
    fn budget_is_enforced() {
        let r = SymmetricRv::rademacher();
        let rvs = vec![r; 30];
        match expect_real(&rvs, &|_| 1.0, &cfg()) {
            Err(GeomError::BudgetExceeded { required, .. }) => assert_eq!(required, 1 << 30),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn adaptive_refinement_converges() {
        let c = SymmetricRv::cos_theta(4).unwrap();
        let f = |v: &[Complex64]| (1.0 + 0.5 * v[0].re).abs().powf(1.5);
        let e = expect_real(&[c], &f, &ExpectConfig::adaptive(1e-12)).unwrap();
        assert!(e.converged);
        assert!(e.node_counts[0] > 4);
        let tight = ExpectConfig::adaptive(1e-300).with_budget(64);
        let e = expect_real(&[c], &f, &tight).unwrap();
        assert!(!e.converged);
    }

    #[test]
    fn absolute_gauge_can_be_flat() {
        // E |‖x + r x‖| = ‖x‖ for Rademacher r: no strict increase for φ = |·|.
        let r = SymmetricRv::rademacher();
        let e = expect_real(&[r], &|v| (1.0 + v[0].re).abs(), &cfg()).unwrap();
        assert_eq!(e.value, 1.0);
    }
}
