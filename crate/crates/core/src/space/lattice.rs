use serde::{Deserialize, Serialize};

use super::Exponent;
use crate::error::{check_len, invalid, Result};

/// Relative tolerance of the Luxemburg bisection.
pub const LUXEMBURG_RTOL: f64 = 1e-12;

/// Young function used by an Orlicz lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Young {
    /// `t^p`, `p >= 1`.
    Power { p: f64 },
    /// `e^t - 1`.
    Exp,
}

impl Young {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Young::Power { p } => t.powf(p),
            Young::Exp => t.exp_m1(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Young::Power { p } if !(p >= 1.0 && p.is_finite()) => {
                Err(invalid("young.p", format!("power must be finite and >= 1, got {p}")))
            }
            _ => Ok(()),
        }
    }
}

/// Base norm of an atomic lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LatticeFamily {
    /// `(Σ μ_k |x_k|^p)^{1/p}`, or `max |x_k|` for `p = ∞`.
    WeightedLp { p: Exponent },
    /// Luxemburg norm `inf{λ > 0 : Σ μ_k Φ(|x_k|/λ) ≤ 1}`.
    Orlicz { young: Young },
    /// `Σ c_k (μx)*_k` with `(μx)*` the decreasing rearrangement of `μ_k |x_k|`
    /// and `c` nonincreasing (top-k sums when `c` is a 0/1 prefix).
    TopKLorentz { coefficients: Vec<f64> },
}

/// A finite atomic Banach lattice: atom weights plus a monotone base norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KotheLattice {
    pub weights: Vec<f64>,
    pub family: LatticeFamily,
}

impl KotheLattice {
    pub fn new(weights: Vec<f64>, family: LatticeFamily) -> Result<Self> {
        let lattice = Self { weights, family };
        lattice.validate()?;
        Ok(lattice)
    }

    /// `ℓ_p^m` with unit weights.
    pub fn lp(atoms: usize, p: f64) -> Result<Self> {
        Self::new(vec![1.0; atoms], LatticeFamily::WeightedLp { p: Exponent(p) })
    }

    pub fn weighted_lp(weights: Vec<f64>, p: f64) -> Result<Self> {
        Self::new(weights, LatticeFamily::WeightedLp { p: Exponent(p) })
    }

    pub fn orlicz(weights: Vec<f64>, young: Young) -> Result<Self> {
        Self::new(weights, LatticeFamily::Orlicz { young })
    }

    pub fn top_k_lorentz(weights: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        Self::new(weights, LatticeFamily::TopKLorentz { coefficients })
    }

    pub fn atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(invalid("weights", "a lattice needs at least one atom"));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid("weights", format!("atom weights must be positive, got {w}")));
        }
        match &self.family {
            LatticeFamily::WeightedLp { p } => p.validate("p"),
            LatticeFamily::Orlicz { young } => young.validate(),
            LatticeFamily::TopKLorentz { coefficients } => {
                check_len(self.atoms(), coefficients.len())?;
                if !(coefficients[0] > 0.0) {
                    return Err(invalid("coefficients", "leading coefficient must be positive"));
                }
                if coefficients.iter().any(|c| !(*c >= 0.0 && c.is_finite()))
                    || coefficients.windows(2).any(|w| w[1] > w[0])
                {
                    return Err(invalid(
                        "coefficients",
                        "coefficients must be finite, nonnegative and nonincreasing",
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> String {
        match &self.family {
            LatticeFamily::WeightedLp { p } => format!("lp({},{})", p, self.atoms()),
            LatticeFamily::Orlicz { young } => match young {
                Young::Power { p } => format!("orlicz(t^{p},{})", self.atoms()),
                Young::Exp => format!("orlicz(exp,{})", self.atoms()),
            },
            LatticeFamily::TopKLorentz { .. } => format!("lorentz({})", self.atoms()),
        }
    }

    /// Lattice norm of `x` (evaluated on `|x|`).
    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.atoms());
        match &self.family {
            LatticeFamily::WeightedLp { p } => weighted_lp_norm(&self.weights, x, p.0),
            LatticeFamily::Orlicz { young } => luxemburg_norm(&self.weights, x, young),
            LatticeFamily::TopKLorentz { coefficients } => {
                let mut scaled: Vec<f64> = self
                    .weights
                    .iter()
                    .zip(x)
                    .map(|(w, v)| w * v.abs())
                    .collect();
                scaled.sort_by(|a, b| b.total_cmp(a));
                coefficients.iter().zip(&scaled).map(|(c, v)| c * v).sum()
            }
        }
    }
}

pub(crate) fn weighted_lp_norm(weights: &[f64], x: &[f64], p: f64) -> f64 {
    lp_core(x, p, |k| weights[k])
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    lp_core(x, p, |_| 1.0)
}

fn lp_core(x: &[f64], p: f64, weight: impl Fn(usize) -> f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        x.iter().enumerate().map(|(k, v)| weight(k) * v.abs()).sum()
    } else if p == 2.0 {
        x.iter().enumerate().map(|(k, v)| weight(k) * v * v).sum::<f64>().sqrt()
    } else {
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let s: f64 = x
            .iter()
            .enumerate()
            .map(|(k, v)| weight(k) * (v.abs() / scale).powf(p))
            .sum();
        scale * s.powf(1.0 / p)
    }
}

fn luxemburg_norm(weights: &[f64], x: &[f64], young: &Young) -> f64 {
    let modular = |lambda: f64| -> f64 {
        weights
            .iter()
            .zip(x)
            .map(|(w, v)| w * young.eval(v.abs() / lambda))
            .sum()
    };
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let mut hi = peak;
    while modular(hi) > 1.0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    while modular(lo) <= 1.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return 0.0;
        }
    }
    // modular(lo) > 1 >= modular(hi)
    while hi - lo > LUXEMBURG_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
