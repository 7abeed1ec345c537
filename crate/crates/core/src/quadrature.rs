//! Circle means by the trapezoidal rule and Gauss–Legendre rules on `[-1, 1]`.

use std::f64::consts::{PI, TAU};

use crate::parallel::pairwise_sum;

/// Default starting node count for circle means.
pub const DEFAULT_NODES: usize = 256;
/// Successive-doubling agreement required by [`adaptive_circle_mean`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Node cap for adaptive doubling.
pub const MAX_NODES: usize = 1 << 16;

/// Node `k` of the `n`-point trapezoidal rule on `[0, 2π)`.
pub fn angle(k: usize, n: usize) -> f64 {
    TAU * (k as f64) / (n as f64)
}

/// `(1/2π) ∫ f(θ) dθ` with the `n`-point trapezoidal rule (nodes `2πk/n`).
pub fn circle_mean<F>(f: &F, n: usize) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    pairwise_sum(n, &|k| f(angle(k, n))) / n as f64
}

/// Maximum of `f` over the `n` trapezoid nodes, refined by golden-section
/// search on the bracket around the best node.
pub fn circle_max<F>(f: &F, n: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (mut best_k, mut best) = (0, f64::NEG_INFINITY);
    for k in 0..n {
        let v = f(angle(k, n));
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let h = TAU / n as f64;
    let center = angle(best_k, n);
    let (theta, refined) = golden_max(f, center - h, center + h, 1e-12);
    if refined > best {
        (theta, refined)
    } else {
        (center, best)
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleMean {
    pub value: f64,
    pub nodes: usize,
    pub converged: bool,
}

/// Circle mean with node doubling until two successive estimates agree to `tol`.
pub fn adaptive_circle_mean<F>(f: &F, start: usize, tol: f64, max_nodes: usize) -> CircleMean
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut n = start.max(2);
    let mut prev = circle_mean(f, n);
    while n * 2 <= max_nodes {
        n *= 2;
        let next = circle_mean(f, n);
        if (next - prev).abs() <= tol {
            return CircleMean {
                value: next,
                nodes: n,
                converged: true,
            };
        }
        prev = next;
    }
    CircleMean {
        value: prev,
        nodes: n,
        converged: false,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (weights sum to 2).
/// The rule is built symmetric: `node[n-1-k] = -node[k]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
