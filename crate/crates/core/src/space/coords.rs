//! Complex vectors are stored as interleaved `(re, im)` pairs of reals so
//! that every space, real or complex, is searched in a flat real coordinate
//! system.

use num_complex::Complex64;

pub fn to_interleaved(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn from_interleaved(v: &[f64]) -> Vec<Complex64> {
    v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Real vector promoted to a complex one (zero imaginary parts).
pub fn promote(v: &[f64]) -> Vec<f64> {
    v.iter().flat_map(|&x| [x, 0.0]).collect()
}

/// Coordinatewise moduli of an interleaved complex vector.
pub fn moduli(v: &[f64]) -> Vec<f64> {
    v.chunks_exact(2).map(|c| c[0].hypot(c[1])).collect()
}

/// `c * v` for an interleaved complex vector.
pub fn scale_complex(v: &[f64], c: Complex64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    mul_add_complex(&mut out, v, c);
    out
}

/// `acc += c * v` for interleaved complex vectors.
pub fn mul_add_complex(acc: &mut [f64], v: &[f64], c: Complex64) {
    for (a, z) in acc.chunks_exact_mut(2).zip(v.chunks_exact(2)) {
        a[0] += c.re * z[0] - c.im * z[1];
        a[1] += c.re * z[1] + c.im * z[0];
    }
}

/// `x + e^{iθ} y` for interleaved complex vectors, written into `out`.
pub fn rotate_add(out: &mut [f64], x: &[f64], y: &[f64], theta: f64) {
    let (s, c) = theta.sin_cos();
    for ((o, a), b) in out
        .chunks_exact_mut(2)
        .zip(x.chunks_exact(2))
        .zip(y.chunks_exact(2))
    {
        o[0] = a[0] + c * b[0] - s * b[1];
        o[1] = a[1] + c * b[1] + s * b[0];
    }
}

/// `acc += c * v` for real vectors.
pub fn axpy(acc: &mut [f64], c: f64, v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += c * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleave_round_trip() {
        let z = vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 3.0)];
        assert_eq!(from_interleaved(&to_interleaved(&z)), z);
    }

    #[test]
    fn rotation_by_pi_negates() {
        let x = [0.0, 0.0];
        let y = [3.0, 4.0];
        let mut out = [0.0; 2];
        rotate_add(&mut out, &x, &y, std::f64::consts::PI);
        assert!((out[0] + 3.0).abs() < 1e-15 && (out[1] + 4.0).abs() < 1e-15);
        assert_eq!(moduli(&y), vec![5.0]);
    }

    #[test]
    fn complex_scaling_multiplies() {
        let v = to_interleaved(&[Complex64::new(1.0, 1.0)]);
        let w = scale_complex(&v, Complex64::new(0.0, 1.0));
        assert_eq!(w, vec![-1.0, 1.0]);
    }
}
