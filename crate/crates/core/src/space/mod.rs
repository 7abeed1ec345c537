//! Finite-dimensional normed spaces and atomic Banach lattices.
//!
//! Every space is evaluated on a flat vector of real coordinates. Complex
//! spaces of dimension `d` use `2d` interleaved `(re, im)` coordinates, a
//! Bochner space over `k` atoms uses `k` consecutive blocks of the inner
//! space's coordinates.

mod calculus;
pub mod coords;
mod lattice;

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use calculus::{lattice_calculus, var, LatticeExpr};
pub use lattice::{KotheLattice, LatticeFamily, Young, LUXEMBURG_RTOL};

use crate::error::{check_len, invalid, GeomError, Result};

/// Exponent in `[1, ∞]`; serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }

    pub(crate) fn validate(&self, name: &'static str) -> Result<()> {
        if self.0 >= 1.0 {
            Ok(())
        } else {
            Err(invalid(name, format!("exponent must lie in [1, inf], got {}", self.0)))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent(v)),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => {
                Ok(Exponent::INFINITY)
            }
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad exponent `{t}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

/// p-convexification of a lattice, stored in p-th-root coordinates:
/// `norm(u) = ‖|u|^p‖_E^{1/p}`, and the convexified sum and scalar product
/// become ordinary vector operations on `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PConvexSpace {
    pub p: f64,
    pub base: KotheLattice,
}

impl PConvexSpace {
    pub fn norm(&self, u: &[f64]) -> f64 {
        self.base.norm(&self.to_base(u)).powf(1.0 / self.p)
    }

    /// Maps root coordinates to the base lattice element `|u|^p`.
    pub fn to_base(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|v| v.abs().powf(self.p)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(invalid("p", format!("p-convexification needs 1 < p < inf, got {}", self.p)));
        }
        self.base.validate()
    }
}

/// `L_p(μ; X)` over a finite atomic measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BochnerSpace {
    pub atoms: Vec<f64>,
    pub p: f64,
    pub inner: Box<NormedSpace>,
}

impl BochnerSpace {
    pub fn norm(&self, f: &[f64]) -> f64 {
        let block = self.inner.real_dim();
        let s: f64 = self
            .atoms
            .iter()
            .zip(f.chunks_exact(block))
            .map(|(w, v)| w * self.inner.norm(v).powf(self.p))
            .sum();
        s.powf(1.0 / self.p)
    }

    /// Value of `f` at atom `j`.
    pub fn atom_value<'a>(&self, f: &'a [f64], j: usize) -> &'a [f64] {
        let block = self.inner.real_dim();
        &f[j * block..(j + 1) * block]
    }

    fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(invalid("atoms", "measure needs at least one atom"));
        }
        if let Some(w) = self.atoms.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid("atoms", format!("atom weights must be positive, got {w}")));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(invalid("p", format!("Bochner exponent must lie in [1, inf), got {}", self.p)));
        }
        self.inner.validate()
    }
}

/// A finite-dimensional real or complex normed space given by its norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormedSpace {
    Lp {
        dim: usize,
        p: Exponent,
        #[serde(default)]
        field: Field,
    },
    Kothe(KotheLattice),
    Pconvex(PConvexSpace),
    Bochner(BochnerSpace),
    Complexified { lattice: KotheLattice },
}

impl NormedSpace {
    pub fn from_json(text: &str) -> Result<Self> {
        let space: NormedSpace =
            serde_json::from_str(text).map_err(|e| GeomError::Malformed(e.to_string()))?;
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NormedSpace::Lp { dim, p, .. } => {
                if *dim == 0 {
                    return Err(invalid("dim", "dimension must be at least 1"));
                }
                p.validate("p")
            }
            NormedSpace::Kothe(l) | NormedSpace::Complexified { lattice: l } => l.validate(),
            NormedSpace::Pconvex(s) => s.validate(),
            NormedSpace::Bochner(b) => b.validate(),
        }
    }

    /// Scalar dimension.
    pub fn dim(&self) -> usize {
        match self {
            NormedSpace::Lp { dim, .. } => *dim,
            NormedSpace::Kothe(l) | NormedSpace::Complexified { lattice: l } => l.atoms(),
            NormedSpace::Pconvex(s) => s.base.atoms(),
            NormedSpace::Bochner(b) => b.atoms.len() * b.inner.dim(),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            NormedSpace::Lp { field, .. } => *field,
            NormedSpace::Kothe(_) | NormedSpace::Pconvex(_) => Field::Real,
            NormedSpace::Complexified { .. } => Field::Complex,
            NormedSpace::Bochner(b) => b.inner.field(),
        }
    }

    pub fn is_complex(&self) -> bool {
        self.field() == Field::Complex
    }

    /// Number of real coordinates of a vector.
    pub fn real_dim(&self) -> usize {
        match self.field() {
            Field::Real => self.dim(),
            Field::Complex => 2 * self.dim(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NormedSpace::Lp { dim, p, field } => match field {
                Field::Real => format!("lp({p},{dim})"),
                Field::Complex => format!("lp_c({p},{dim})"),
            },
            NormedSpace::Kothe(l) => l.label(),
            NormedSpace::Pconvex(s) => format!("pconvex({},{})", s.p, s.base.label()),
            NormedSpace::Bochner(b) => {
                format!("bochner({},{},{})", b.p, b.atoms.len(), b.inner.label())
            }
            NormedSpace::Complexified { lattice } => format!("complexified({})", lattice.label()),
        }
    }

    /// Norm of a vector given in real coordinates (`real_dim()` entries).
    pub fn norm(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.real_dim(), "vector length for {}", self.label());
        match self {
            NormedSpace::Lp { p, field, .. } => match field {
                Field::Real => lattice::lp_norm(v, p.0),
                Field::Complex => lattice::lp_norm(&coords::moduli(v), p.0),
            },
            NormedSpace::Kothe(l) => l.norm(v),
            NormedSpace::Pconvex(s) => s.norm(v),
            NormedSpace::Bochner(b) => b.norm(v),
            NormedSpace::Complexified { lattice } => lattice.norm(&coords::moduli(v)),
        }
    }

    /// Length-checked norm.
    pub fn try_norm(&self, v: &[f64]) -> Result<f64> {
        check_len(self.real_dim(), v.len())?;
        Ok(self.norm(v))
    }

    /// The underlying lattice, when the norm is a lattice norm on real coordinates.
    pub fn as_lattice(&self) -> Option<&KotheLattice> {
        match self {
            NormedSpace::Kothe(l) => Some(l),
            _ => None,
        }
    }

    /// Scales `v` onto the sphere of radius `radius`; returns `false` for `v = 0`.
    pub fn project_to_sphere(&self, v: &mut [f64], radius: f64) -> bool {
        let n = self.norm(v);
        if !(n > 0.0) || !n.is_finite() {
            return false;
        }
        let s = radius / n;
        v.iter_mut().for_each(|x| *x *= s);
        true
    }

    pub fn random_vector(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.real_dim()).map(|_| rng.sample(StandardNormal)).collect()
    }

    pub fn random_unit(&self, rng: &mut impl Rng) -> Vec<f64> {
        loop {
            let mut v = self.random_vector(rng);
            if self.project_to_sphere(&mut v, 1.0) {
                return v;
            }
        }
    }

    /// Randomized checks of `norm(0) = 0`, absolute homogeneity and the triangle inequality.
    pub fn check_axioms(&self, samples: usize, seed: u64) -> AxiomReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zero = self.norm(&vec![0.0; self.real_dim()]);
        let mut homogeneity = 0.0_f64;
        let mut triangle = 0.0_f64;
        for _ in 0..samples {
            let u = self.random_vector(&mut rng);
            let v = self.random_vector(&mut rng);
            let lambda: f64 = rng.sample::<f64, _>(StandardNormal) * 3.0;
            let scaled: Vec<f64> = if self.is_complex() {
                let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                coords::scale_complex(&u, Complex64::from_polar(lambda, phase))
            } else {
                u.iter().map(|x| lambda * x).collect()
            };
            let nu = self.norm(&u);
            let err = (self.norm(&scaled) - lambda.abs() * nu).abs() / (lambda.abs() * nu).max(1.0);
            homogeneity = homogeneity.max(err);
            let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            triangle = triangle.max(self.norm(&sum) - nu - self.norm(&v));
        }
        AxiomReport {
            zero_norm: zero,
            max_homogeneity_error: homogeneity,
            max_triangle_excess: triangle,
            samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub zero_norm: f64,
    pub max_homogeneity_error: f64,
    pub max_triangle_excess: f64,
    pub samples: usize,
}

impl AxiomReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.zero_norm == 0.0 && self.max_homogeneity_error <= tol && self.max_triangle_excess <= tol
    }
}

/// Randomized lattice checks: for `|x| ≤ |y|` the excess `‖x‖ − ‖y‖`, and `|‖|x|‖ − ‖x‖|`.
pub fn check_lattice_monotone(lattice: &KotheLattice, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut excess = f64::NEG_INFINITY;
    let mut modulus_gap = 0.0_f64;
    for _ in 0..samples {
        let y: Vec<f64> = (0..lattice.atoms())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let x: Vec<f64> = y
            .iter()
            .map(|v| v * rng.random_range(-1.0..=1.0))
            .collect();
        excess = excess.max(lattice.norm(&x) - lattice.norm(&y));
        let ax: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        modulus_gap = modulus_gap.max((lattice.norm(&ax) - lattice.norm(&x)).abs());
    }
    (excess, modulus_gap)
}

/// `ℓ_p^dim` over the given field.
pub fn make_lp(dim: usize, p: f64, field: Field) -> Result<NormedSpace> {
    let space = NormedSpace::Lp {
        dim,
        p: Exponent(p),
        field,
    };
    space.validate()?;
    Ok(space)
}

/// p-convexification `E^{(p)}` of a lattice, in root coordinates.
pub fn pconvexify(lattice: &KotheLattice, p: f64) -> Result<PConvexSpace> {
    let s = PConvexSpace {
        p,
        base: lattice.clone(),
    };
    s.validate()?;
    Ok(s)
}

/// Complexification: the norm of `z` is the lattice norm of `|z|`.
pub fn complexify(lattice: &KotheLattice) -> Result<NormedSpace> {
    lattice.validate()?;
    Ok(NormedSpace::Complexified {
        lattice: lattice.clone(),
    })
}

pub fn bochner(atoms: Vec<f64>, p: f64, inner: NormedSpace) -> Result<BochnerSpace> {
    let b = BochnerSpace {
        atoms,
        p,
        inner: Box::new(inner),
    };
    b.validate()?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_lp(dim: usize, p: f64) -> NormedSpace {
        make_lp(dim, p, Field::Real).unwrap()
    }

    #[test]
    fn lp_examples() {
        assert_eq!(real_lp(2, 2.0).norm(&[3.0, 4.0]), 5.0);
        assert_eq!(real_lp(3, f64::INFINITY).norm(&[1.0, -2.0, 0.5]), 2.0);
        assert_eq!(real_lp(2, 1.0).norm(&[0.3, 0.7]), 1.0);
        assert!(make_lp(2, 0.5, Field::Real).is_err());
        assert!(make_lp(0, 2.0, Field::Real).is_err());
    }

    #[test]
    fn pconvexification_examples() {
        let l1 = KotheLattice::lp(2, 1.0).unwrap();
        let s = pconvexify(&l1, 2.0).unwrap();
        assert_eq!(s.norm(&[1.0, 0.0]), 1.0);
        assert!((s.norm(&[1.0, 1.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert!(pconvexify(&l1, 1.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l2 = real_lp(2, 2.0);
        for _ in 0..100 {
            let u = l2.random_vector(&mut rng);
            assert!((s.norm(&u) - l2.norm(&u)).abs() <= 1e-12);
        }
    }

    #[test]
    fn pconvex_power_identity_same_path() {
        let base = KotheLattice::orlicz(vec![1.0, 0.5, 2.0], Young::Exp).unwrap();
        let s = pconvexify(&base, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let u: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let lhs = s.norm(&u).powf(3.0);
            let rhs = base.norm(&s.to_base(&u));
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn complexification_examples() {
        let l1 = complexify(&KotheLattice::lp(2, 1.0).unwrap()).unwrap();
        // (i, 1)
        assert_eq!(l1.norm(&[0.0, 1.0, 1.0, 0.0]), 2.0);
        let linf = complexify(&KotheLattice::lp(2, f64::INFINITY).unwrap()).unwrap();
        assert_eq!(linf.norm(&[3.0, 4.0, 1.0, 0.0]), 5.0);

        let lat = KotheLattice::top_k_lorentz(vec![1.0, 2.0, 0.5], vec![2.0, 1.0, 1.0]).unwrap();
        let c = complexify(&lat).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            assert_eq!(c.norm(&coords::promote(&x)), lat.norm(&x));
        }
    }

    #[test]
    fn bochner_examples() {
        let r = real_lp(1, 2.0);
        let b = bochner(vec![0.25; 4], 1.0, r.clone()).unwrap();
        assert_eq!(b.norm(&[2.0, 0.0, 0.0, 2.0]), 1.0);

        let single = bochner(vec![1.0], 3.0, real_lp(2, 1.0)).unwrap();
        assert!((single.norm(&[0.5, -0.25]) - 0.75).abs() < 1e-15);

        let half = bochner(vec![0.5, 0.5], 2.0, r).unwrap();
        assert_eq!(half.norm(&[1.0, -1.0]), 1.0);

        assert!(bochner(vec![], 1.0, real_lp(1, 1.0)).is_err());
        assert!(bochner(vec![1.0, 0.0], 1.0, real_lp(1, 1.0)).is_err());
        assert!(bochner(vec![1.0], 0.5, real_lp(1, 1.0)).is_err());
    }

    fn shipped() -> Vec<NormedSpace> {
        let lorentz = KotheLattice::top_k_lorentz(vec![1.0; 4], vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let orlicz = KotheLattice::orlicz(vec![0.5, 1.0, 1.5], Young::Exp).unwrap();
        vec![
            real_lp(3, 1.0),
            real_lp(4, 1.7),
            real_lp(2, f64::INFINITY),
            make_lp(3, 3.0, Field::Complex).unwrap(),
            NormedSpace::Kothe(orlicz.clone()),
            NormedSpace::Kothe(lorentz.clone()),
            NormedSpace::Pconvex(pconvexify(&orlicz, 2.5).unwrap()),
            NormedSpace::Pconvex(pconvexify(&lorentz, 1.5).unwrap()),
            NormedSpace::Bochner(bochner(vec![0.25, 0.75], 1.5, real_lp(2, 3.0)).unwrap()),
            complexify(&lorentz).unwrap(),
        ]
    }

    #[test]
    fn shipped_spaces_satisfy_axioms() {
        for s in shipped() {
            let r = s.check_axioms(1000, 17);
            assert!(r.holds(1e-10), "{}: {:?}", s.label(), r);
        }
    }

    #[test]
    fn shipped_lattices_are_monotone() {
        let lattices = [
            KotheLattice::lp(3, 1.0).unwrap(),
            KotheLattice::weighted_lp(vec![0.2, 3.0], f64::INFINITY).unwrap(),
            KotheLattice::orlicz(vec![0.5, 1.0, 1.5], Young::Exp).unwrap(),
            KotheLattice::orlicz(vec![1.0; 2], Young::Power { p: 1.3 }).unwrap(),
            KotheLattice::top_k_lorentz(vec![1.0; 4], vec![1.0, 1.0, 0.0, 0.0]).unwrap(),
        ];
        for l in &lattices {
            let (excess, gap) = check_lattice_monotone(l, 1000, 23);
            assert!(excess <= 1e-12, "{}: {excess}", l.label());
            assert_eq!(gap, 0.0);
        }
    }

    #[test]
    fn json_definitions() {
        let s = NormedSpace::from_json(r#"{"kind":"lp","dim":3,"p":"inf"}"#).unwrap();
        assert_eq!(s, real_lp(3, f64::INFINITY));
        let k = NormedSpace::from_json(
            r#"{"kind":"kothe","weights":[1,2],"family":{"family":"orlicz","young":{"type":"exp"}}}"#,
        )
        .unwrap();
        assert_eq!(k.dim(), 2);
        let pc = NormedSpace::from_json(
            r#"{"kind":"pconvex","p":2,"base":{"weights":[1,1],"family":{"family":"weighted_lp","p":1}}}"#,
        )
        .unwrap();
        assert!((pc.norm(&[3.0, 4.0]) - 5.0).abs() < 1e-15);
        let b = NormedSpace::from_json(
            r#"{"kind":"bochner","atoms":[0.5,0.5],"p":2,"inner":{"kind":"lp","dim":1,"p":2}}"#,
        )
        .unwrap();
        assert_eq!(b.real_dim(), 2);
        let c = NormedSpace::from_json(
            r#"{"kind":"complexified","lattice":{"weights":[1],"family":{"family":"weighted_lp","p":2}}}"#,
        )
        .unwrap();
        assert_eq!(c.real_dim(), 2);
        assert!(NormedSpace::from_json(r#"{"kind":"lp","dim":3,"p":0.2}"#).is_err());
        assert!(NormedSpace::from_json(r#"{"kind":"nope"}"#).is_err());
        let round = serde_json::to_string(&s).unwrap();
        assert_eq!(NormedSpace::from_json(&round).unwrap(), s);
    }
}
