//! Coordinatewise functional calculus on atomic lattices.
//!
//! On a finite atomic lattice a positively homogeneous expression in lattice
//! elements is evaluated atom by atom.

use std::ops::Add;

use super::KotheLattice;
use crate::error::{check_len, invalid, GeomError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum LatticeExpr {
    /// The `i`-th input vector.
    Var(usize),
    Abs(Box<LatticeExpr>),
    Pow(Box<LatticeExpr>, f64),
    Sum(Box<LatticeExpr>, Box<LatticeExpr>),
    Scale(f64, Box<LatticeExpr>),
}

pub fn var(i: usize) -> LatticeExpr {
    LatticeExpr::Var(i)
}

impl LatticeExpr {
    pub fn abs(self) -> Self {
        LatticeExpr::Abs(Box::new(self))
    }

    pub fn powf(self, exponent: f64) -> Self {
        LatticeExpr::Pow(Box::new(self), exponent)
    }

    pub fn scale(self, c: f64) -> Self {
        LatticeExpr::Scale(c, Box::new(self))
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            LatticeExpr::Var(i) => Some(*i),
            LatticeExpr::Abs(e) | LatticeExpr::Pow(e, _) | LatticeExpr::Scale(_, e) => e.max_var(),
            LatticeExpr::Sum(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Evaluates the expression on one atom.
    pub fn eval_scalar(&self, values: &[f64]) -> Result<f64> {
        match self {
            LatticeExpr::Var(i) => values
                .get(*i)
                .copied()
                .ok_or_else(|| invalid("expression", format!("variable {i} is not bound"))),
            LatticeExpr::Abs(e) => Ok(e.eval_scalar(values)?.abs()),
            LatticeExpr::Pow(e, q) => {
                let base = e.eval_scalar(values)?;
                if base < 0.0 && q.fract() != 0.0 {
                    return Err(GeomError::NegativeRadicand {
                        value: base,
                        exponent: *q,
                    });
                }
                Ok(if *q == 2.0 { base * base } else { base.powf(*q) })
            }
            LatticeExpr::Sum(a, b) => Ok(a.eval_scalar(values)? + b.eval_scalar(values)?),
            LatticeExpr::Scale(c, e) => Ok(c * e.eval_scalar(values)?),
        }
    }
}

impl Add for LatticeExpr {
    type Output = LatticeExpr;

    fn add(self, rhs: LatticeExpr) -> LatticeExpr {
        LatticeExpr::Sum(Box::new(self), Box::new(rhs))
    }
}

/// Evaluates `expr` atom by atom on `vectors`, each of length `lattice.atoms()`.
pub fn lattice_calculus(
    lattice: &KotheLattice,
    expr: &LatticeExpr,
    vectors: &[&[f64]],
) -> Result<Vec<f64>> {
    for v in vectors {
        check_len(lattice.atoms(), v.len())?;
    }
    if let Some(i) = expr.max_var() {
        if i >= vectors.len() {
            return Err(invalid(
                "expression",
                format!("uses variable {i} but {} vectors were given", vectors.len()),
            ));
        }
    }
    let mut atom = vec![0.0; vectors.len()];
    (0..lattice.atoms())
        .map(|k| {
            for (slot, v) in atom.iter_mut().zip(vectors) {
                *slot = v[k];
            }
            expr.eval_scalar(&atom)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2() -> KotheLattice {
        KotheLattice::lp(2, 1.0).unwrap()
    }

    #[test]
    fn coordinatewise_pythagoras() {
        let e = (var(0).abs().powf(2.0) + var(1).abs().powf(2.0)).powf(0.5);
        let out = lattice_calculus(&l2(), &e, &[&[3.0, 0.0], &[4.0, 1.0]]).unwrap();
        assert_eq!(out, vec![5.0, 1.0]);
    }

    #[test]
    fn modulus() {
        let out = lattice_calculus(&l2(), &var(0).abs(), &[&[-2.0, 5.0]]).unwrap();
        assert_eq!(out, vec![2.0, 5.0]);
    }

    #[test]
    fn krivine_display_at_p2() {
        // (|f|^{2/p} + |2g|^{2/p} / C^{2/p})^{p/2} with p = 2, C = 2:
        // atom 1: (1 + 2/2)^1 = 2, atom 2: (0 + 2/2)^1 = 1.
        let p = 2.0;
        let c: f64 = 2.0;
        let e = (var(0).abs().powf(2.0 / p)
            + var(1).scale(2.0).abs().powf(2.0 / p).scale(c.powf(-2.0 / p)))
        .powf(p / 2.0);
        let out = lattice_calculus(&l2(), &e, &[&[1.0, 0.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(out, vec![2.0, 1.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            lattice_calculus(&l2(), &var(0), &[&[1.0]]),
            Err(GeomError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            lattice_calculus(&l2(), &var(0).powf(0.5), &[&[-1.0, 1.0]]),
            Err(GeomError::NegativeRadicand { .. })
        ));
        assert!(lattice_calculus(&l2(), &var(0).powf(3.0), &[&[-1.0, 1.0]]).is_ok());
        assert!(lattice_calculus(&l2(), &var(1), &[&[1.0, 1.0]]).is_err());
    }
}
