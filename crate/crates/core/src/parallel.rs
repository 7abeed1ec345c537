//! Reductions whose results do not depend on the worker count.
//!
//! Sums use a fixed binary split (midpoint recursion down to single terms),
//! so the floating-point association tree is a function of the length alone.
//! Parallelism only decides which thread evaluates which subtree.

use std::cmp::Ordering;

const PAR_THRESHOLD: usize = 1 << 12;

/// Pairwise sum of `term(i)` for `i` in `0..len`.
pub fn pairwise_sum<F>(len: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if len == 0 {
        return 0.0;
    }
    sum_range(0, len, term)
}

fn sum_range<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len == 1 {
        return term(lo);
    }
    let mid = lo + len / 2;
    if len > PAR_THRESHOLD {
        let (a, b) = rayon::join(|| sum_range(lo, mid, term), || sum_range(mid, hi, term));
        a + b
    } else {
        sum_range(lo, mid, term) + sum_range(mid, hi, term)
    }
}

/// Pairwise sum of a slice, same association tree as [`pairwise_sum`].
pub fn pairwise_sum_slice(values: &[f64]) -> f64 {
    pairwise_sum(values.len(), &|i| values[i])
}

/// Index and value of the smallest `f(i)`; ties go to the lower index.
/// NaN values are never selected unless everything is NaN.
pub fn argmin<F>(len: usize, f: &F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync,
{
    if len == 0 {
        return None;
    }
    Some(argmin_range(0, len, f))
}

fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    match cmp_value(a.1, b.1) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if a.0 <= b.0 {
                a
            } else {
                b
            }
        }
    }
}

fn cmp_value(a: f64, b: f64) -> Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => a.total_cmp(&b),
    }
}

fn argmin_range<F>(lo: usize, hi: usize, f: &F) -> (usize, f64)
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= PAR_THRESHOLD {
        let mut best = (lo, f(lo));
        for i in lo + 1..hi {
            best = better(best, (i, f(i)));
        }
        return best;
    }
    let mid = lo + len / 2;
    let (a, b) = rayon::join(|| argmin_range(lo, mid, f), || argmin_range(mid, hi, f));
    better(a, b)
}

/// Index and value of the largest `f(i)`; ties go to the lower index.
pub fn argmax<F>(len: usize, f: &F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync,
{
    argmin(len, &|i| -f(i)).map(|(i, v)| (i, -v))
}

thread_local! {
    static SCRATCH: std::cell::RefCell<Vec<Vec<f64>>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// Runs `f` on a zeroed per-thread buffer of length `len`. Nested calls get
/// distinct buffers.
pub fn with_scratch<R>(len: usize, f: impl FnOnce(&mut [f64]) -> R) -> R {
    let mut buf = SCRATCH.with(|s| s.borrow_mut().pop()).unwrap_or_default();
    buf.clear();
    buf.resize(len, 0.0);
    let out = f(&mut buf);
    SCRATCH.with(|s| s.borrow_mut().push(buf));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential_for_exact_values() {
        let s = pairwise_sum(10_000, &|i| i as f64);
        assert_eq!(s, (0..10_000).sum::<usize>() as f64);
    }

    #[test]
    fn sum_independent_of_pool_size() {
        let term = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| pairwise_sum(100_003, &term));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| pairwise_sum(100_003, &term));
        assert_eq!(one.to_bits(), four.to_bits());
    }

    #[test]
    fn argmin_ties_take_lowest_index() {
        let v = [3.0, 1.0, 2.0, 1.0];
        assert_eq!(argmin(4, &|i| v[i]), Some((1, 1.0)));
        assert_eq!(argmax(4, &|i| v[i]), Some((0, 3.0)));
        assert_eq!(argmin(0, &|_| 0.0), None);
    }

    #[test]
    fn argmin_skips_nan() {
        let v = [f64::NAN, 2.0, f64::NAN];
        assert_eq!(argmin(3, &|i| v[i]), Some((1, 2.0)));
    }
}
