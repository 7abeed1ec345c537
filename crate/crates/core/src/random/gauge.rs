use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GeomError, Result};

/// A convex increasing gauge `φ` on `[0, ∞)` with `φ(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConvexGauge {
    /// `t^p` with `p > 1`: strictly convex.
    Power { p: f64 },
    /// `|t|`: convex but not strictly.
    AbsoluteValue,
}

impl ConvexGauge {
    pub fn power(p: f64) -> Result<Self> {
        if p > 1.0 && p.is_finite() {
            Ok(ConvexGauge::Power { p })
        } else {
            Err(invalid("phi", format!("power gauge needs 1 < p < inf, got {p}")))
        }
    }

    /// `φ(|t|)`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match *self {
            ConvexGauge::Power { p } if p == 2.0 => t * t,
            ConvexGauge::Power { p } => t.powf(p),
            ConvexGauge::AbsoluteValue => t,
        }
    }

    pub fn inverse(&self, v: f64) -> f64 {
        match *self {
            ConvexGauge::Power { p } => v.max(0.0).powf(1.0 / p),
            ConvexGauge::AbsoluteValue => v.max(0.0),
        }
    }

    pub fn is_strictly_convex(&self) -> bool {
        matches!(self, ConvexGauge::Power { .. })
    }

    /// Randomized checks of `φ(0) = 0`, strict increase, (strict) midpoint
    /// convexity and superadditivity. Returns the worst violations.
    pub fn check_invariants(&self, samples: usize, seed: u64) -> GaugeReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = GaugeReport {
            phi_zero: self.eval(0.0),
            increase_violation: f64::NEG_INFINITY,
            midpoint_violation: f64::NEG_INFINITY,
            superadditivity_violation: 0.0,
        };
        for _ in 0..samples {
            let s: f64 = rng.random_range(0.0..10.0);
            let t: f64 = rng.random_range(0.0..10.0);
            if s == t {
                continue;
            }
            let (lo, hi) = if s < t { (s, t) } else { (t, s) };
            report.increase_violation = report
                .increase_violation
                .max(self.eval(lo) - self.eval(hi));
            let mid = self.eval(0.5 * (s + t)) - 0.5 * (self.eval(s) + self.eval(t));
            report.midpoint_violation = report.midpoint_violation.max(mid);
            let sup = self.eval(s) + self.eval(t) - self.eval(s + t);
            report.superadditivity_violation = report.superadditivity_violation.max(sup);
        }
        report
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeReport {
    pub phi_zero: f64,
    /// `max φ(s) − φ(t)` over sampled `s < t` (must be negative).
    pub increase_violation: f64,
    /// `max φ((s+t)/2) − (φ(s)+φ(t))/2` (negative for strictly convex gauges).
    pub midpoint_violation: f64,
    pub superadditivity_violation: f64,
}

impl fmt::Display for ConvexGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexGauge::Power { p } => write!(f, "pow:{p}"),
            ConvexGauge::AbsoluteValue => write!(f, "abs"),
        }
    }
}

impl FromStr for ConvexGauge {
    type Err = GeomError;

    /// `pow:<p>` or `abs`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("pow", p)) => {
                let p: f64 = p
                    .parse()
                    .map_err(|_| invalid("phi", format!("bad power `{p}`")))?;
                ConvexGauge::power(p)
            }
            None if s == "abs" => Ok(ConvexGauge::AbsoluteValue),
            _ => Err(invalid("phi", format!("unknown gauge `{s}` (expected pow:<p> or abs)"))),
        }
    }
}
