//! Symmetric random-variable models and their expectation engines.

mod expect;
mod gauge;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use expect::{expect, expect_real, ExpectConfig, Expectation, DEFAULT_BUDGET};
pub use gauge::{ConvexGauge, GaugeReport};

use crate::error::{invalid, Result};
use crate::quadrature::{self, DEFAULT_NODES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RvKind {
    /// `±1` with probability 1/2 each.
    Rademacher,
    /// `cos θ`, θ uniform on `[0, 2π)`.
    CosTheta,
    /// `e^{iθ}`, θ uniform on `[0, 2π)`.
    ComplexCircle,
    /// Uniform on `[-1, 1]`.
    UniformSymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    ExactEnumeration,
    /// Symmetric quadrature rule with the given node count.
    Quadrature { nodes: usize },
    /// Antithetic sampling: `samples` values arranged in `±` pairs.
    MonteCarlo { samples: usize, seed: u64 },
}

/// A symmetric scalar random variable with `‖r‖_∞ = 1`, bound to an engine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RvSpec", into = "RvSpec")]
pub struct SymmetricRv {
    kind: RvKind,
    engine: Engine,
}

/// JSON form: `{"kind": "...", "nodes": n}` or `{"kind": "...", "samples": s, "seed": k}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct RvSpec {
    kind: RvKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl TryFrom<RvSpec> for SymmetricRv {
    type Error = crate::GeomError;

    fn try_from(s: RvSpec) -> Result<Self> {
        let engine = match (s.samples, s.seed, s.nodes) {
            (Some(samples), Some(seed), None) => Engine::MonteCarlo { samples, seed },
            (Some(_), None, _) => return Err(invalid("seed", "Monte Carlo models need an explicit seed")),
            (Some(_), Some(_), Some(_)) | (None, Some(_), _) => {
                return Err(invalid("engine", "give either `nodes` or `samples` + `seed`"))
            }
            (None, None, nodes) => match s.kind {
                RvKind::Rademacher if nodes.is_none() => Engine::ExactEnumeration,
                RvKind::Rademacher => {
                    return Err(invalid("nodes", "Rademacher variables are enumerated exactly"))
                }
                _ => Engine::Quadrature {
                    nodes: nodes.unwrap_or(DEFAULT_NODES),
                },
            },
        };
        SymmetricRv::new(s.kind, engine)
    }
}

impl From<SymmetricRv> for RvSpec {
    fn from(r: SymmetricRv) -> Self {
        let (nodes, samples, seed) = match r.engine {
            Engine::ExactEnumeration => (None, None, None),
            Engine::Quadrature { nodes } => (Some(nodes), None, None),
            Engine::MonteCarlo { samples, seed } => (None, Some(samples), Some(seed)),
        };
        RvSpec {
            kind: r.kind,
            nodes,
            samples,
            seed,
        }
    }
}

impl SymmetricRv {
    pub fn new(kind: RvKind, engine: Engine) -> Result<Self> {
        match (kind, engine) {
            (RvKind::Rademacher, Engine::ExactEnumeration) => {}
            (_, Engine::ExactEnumeration) => {
                return Err(invalid("engine", "only Rademacher variables are enumerated exactly"))
            }
            (RvKind::Rademacher, Engine::Quadrature { .. }) => {
                return Err(invalid("engine", "Rademacher variables use exact enumeration"))
            }
            (RvKind::CosTheta | RvKind::ComplexCircle, Engine::Quadrature { nodes })
                if nodes < 2 || nodes % 2 != 0 =>
            {
                return Err(invalid("nodes", format!("circle rules need an even node count, got {nodes}")))
            }
            (_, Engine::Quadrature { nodes }) if nodes < 2 => {
                return Err(invalid("nodes", "need at least two nodes"))
            }
            (_, Engine::MonteCarlo { samples, .. }) if samples < 2 => {
                return Err(invalid("samples", "need at least two samples"))
            }
            _ => {}
        }
        Ok(Self { kind, engine })
    }

    pub fn rademacher() -> Self {
        Self {
            kind: RvKind::Rademacher,
            engine: Engine::ExactEnumeration,
        }
    }

    pub fn cos_theta(nodes: usize) -> Result<Self> {
        Self::new(RvKind::CosTheta, Engine::Quadrature { nodes })
    }

    pub fn complex_circle(nodes: usize) -> Result<Self> {
        Self::new(RvKind::ComplexCircle, Engine::Quadrature { nodes })
    }

    pub fn uniform(nodes: usize) -> Result<Self> {
        Self::new(RvKind::UniformSymmetric, Engine::Quadrature { nodes })
    }

    pub fn monte_carlo(kind: RvKind, samples: usize, seed: u64) -> Result<Self> {
        Self::new(kind, Engine::MonteCarlo { samples, seed })
    }

    pub fn kind(&self) -> RvKind {
        self.kind
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn is_complex(&self) -> bool {
        self.kind == RvKind::ComplexCircle
    }

    /// Same law with a different quadrature node count (no-op for other engines).
    pub fn with_nodes(&self, nodes: usize) -> Self {
        match self.engine {
            Engine::Quadrature { .. } => Self {
                kind: self.kind,
                engine: Engine::Quadrature { nodes },
            },
            _ => *self,
        }
    }

    /// Symmetric node set `(value, weight)` of a deterministic engine.
    pub fn nodes(&self) -> Option<Vec<(Complex64, f64)>> {
        let real = |v: f64| Complex64::new(v, 0.0);
        match self.engine {
            Engine::ExactEnumeration => Some(vec![(real(1.0), 0.5), (real(-1.0), 0.5)]),
            Engine::Quadrature { nodes: n } => Some(match self.kind {
                RvKind::CosTheta | RvKind::ComplexCircle => {
                    let half = n / 2;
                    let mut values = vec![Complex64::new(0.0, 0.0); n];
                    for k in 0..half {
                        let theta = quadrature::angle(k, n);
                        let z = if self.kind == RvKind::CosTheta {
                            real(theta.cos())
                        } else {
                            Complex64::new(theta.cos(), theta.sin())
                        };
                        values[k] = z;
                        values[k + half] = -z;
                    }
                    let w = 1.0 / n as f64;
                    values.into_iter().map(|z| (z, w)).collect()
                }
                RvKind::UniformSymmetric => {
                    let (x, w) = quadrature::gauss_legendre(n);
                    x.into_iter().zip(w).map(|(x, w)| (real(x), 0.5 * w)).collect()
                }
                RvKind::Rademacher => unreachable!("validated in SymmetricRv::new"),
            }),
            Engine::MonteCarlo { .. } => None,
        }
    }

    /// One draw of the underlying law.
    pub fn draw(&self, rng: &mut impl Rng) -> Complex64 {
        match self.kind {
            RvKind::Rademacher => Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
            RvKind::CosTheta => Complex64::new((rng.random::<f64>() * std::f64::consts::TAU).cos(), 0.0),
            RvKind::ComplexCircle => {
                let t = rng.random::<f64>() * std::f64::consts::TAU;
                Complex64::new(t.cos(), t.sin())
            }
            RvKind::UniformSymmetric => Complex64::new(rng.random_range(-1.0..=1.0), 0.0),
        }
    }

    /// Antithetic sample table: the second half negates the first.
    pub(crate) fn antithetic_samples(&self, samples: usize, seed: u64, stream: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let half = samples.div_ceil(2);
        let first: Vec<Complex64> = (0..half).map(|_| self.draw(&mut rng)).collect();
        first.iter().copied().chain(first.iter().map(|z| -z)).collect()
    }

    /// `P{|r − 1| < η}`.
    pub fn tail_mass(&self, eta: f64) -> Result<f64> {
        if !(eta > 0.0) {
            return Err(invalid("eta", format!("tail radius must be positive, got {eta}")));
        }
        if let Engine::MonteCarlo { samples, seed } = self.engine {
            let draws = self.antithetic_samples(samples, seed, 0);
            let hits = draws.iter().filter(|z| (**z - 1.0).norm() < eta).count();
            return Ok(hits as f64 / draws.len() as f64);
        }
        Ok(match self.kind {
            RvKind::Rademacher => {
                if eta > 2.0 {
                    1.0
                } else {
                    0.5
                }
            }
            RvKind::CosTheta => {
                if eta >= 2.0 {
                    1.0
                } else {
                    (1.0 - eta).acos() / PI
                }
            }
            RvKind::ComplexCircle => {
                if eta >= 2.0 {
                    1.0
                } else {
                    2.0 * (0.5 * eta).asin() / PI
                }
            }
            RvKind::UniformSymmetric => 0.5 * eta.min(2.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_mass_examples() {
        assert_eq!(SymmetricRv::rademacher().tail_mass(1.0 / 12.0).unwrap(), 0.5);
        let c = SymmetricRv::cos_theta(256).unwrap();
        // |cos θ − 1| < 1 iff cos θ > 0.
        assert!((c.tail_mass(1.0).unwrap() - 0.5).abs() < 1e-15);
        let mc = SymmetricRv::monte_carlo(RvKind::CosTheta, 1_000_000, 9).unwrap();
        assert!((mc.tail_mass(1.0).unwrap() - 0.5).abs() < 2e-3);
        assert!((c.tail_mass(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        for rv in all_models() {
            assert_eq!(rv.tail_mass(2.5).unwrap(), 1.0);
            assert!(rv.tail_mass(1e-6).unwrap() > 0.0, "{rv:?}");
        }
        assert!(SymmetricRv::rademacher().tail_mass(0.0).is_err());
        assert!(SymmetricRv::rademacher().tail_mass(-1.0).is_err());
    }

    fn all_models() -> Vec<SymmetricRv> {
        vec![
            SymmetricRv::rademacher(),
            SymmetricRv::cos_theta(64).unwrap(),
            SymmetricRv::complex_circle(64).unwrap(),
            SymmetricRv::uniform(16).unwrap(),
        ]
    }

    #[test]
    fn node_sets_are_symmetric_with_sup_one() {
        for rv in all_models() {
            let nodes = rv.nodes().unwrap();
            let total: f64 = nodes.iter().map(|n| n.1).sum();
            assert!((total - 1.0).abs() < 1e-14);
            for (z, w) in &nodes {
                assert!(z.norm() <= 1.0 + 1e-15);
                let mirror = nodes.iter().find(|(v, _)| *v == -z).expect("mirror node");
                assert_eq!(mirror.1, *w);
            }
            if rv.kind() != RvKind::UniformSymmetric {
                assert!(nodes.iter().any(|(z, _)| (z.norm() - 1.0).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn engine_validation() {
        assert!(SymmetricRv::new(RvKind::CosTheta, Engine::ExactEnumeration).is_err());
        assert!(SymmetricRv::new(RvKind::Rademacher, Engine::Quadrature { nodes: 4 }).is_err());
        assert!(SymmetricRv::cos_theta(7).is_err());
        assert!(SymmetricRv::monte_carlo(RvKind::Rademacher, 1, 0).is_err());
    }

    #[test]
    fn json_forms() {
        let r: SymmetricRv = serde_json::from_str(r#"{"kind":"rademacher"}"#).unwrap();
        assert_eq!(r, SymmetricRv::rademacher());
        let c: SymmetricRv = serde_json::from_str(r#"{"kind":"cos_theta"}"#).unwrap();
        assert_eq!(c.engine(), Engine::Quadrature { nodes: 256 });
        let m: SymmetricRv =
            serde_json::from_str(r#"{"kind":"uniform_symmetric","samples":100,"seed":4}"#).unwrap();
        assert_eq!(m.engine(), Engine::MonteCarlo { samples: 100, seed: 4 });
        assert!(serde_json::from_str::<SymmetricRv>(r#"{"kind":"cos_theta","samples":10}"#).is_err());
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<SymmetricRv>(&text).unwrap(), m);
    }
}
