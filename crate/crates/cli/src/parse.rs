//! Space, gauge and random-variable mnemonics.

use std::path::Path;

use geomlab::random::{ConvexGauge, RvKind, SymmetricRv};
use geomlab::space::{bochner, complexify, make_lp, pconvexify, Field, KotheLattice, NormedSpace, Young};
use geomlab::GeomError;

use crate::args::parse_real;

fn malformed(msg: impl Into<String>) -> GeomError {
    GeomError::Malformed(msg.into())
}

fn field<'a>(parts: &[&'a str], i: usize, what: &str) -> Result<&'a str, GeomError> {
    parts.get(i).copied().ok_or_else(|| malformed(format!("missing {what}")))
}

fn number(s: &str) -> Result<f64, GeomError> {
    parse_real(s).map_err(malformed)
}

fn count(s: &str) -> Result<usize, GeomError> {
    s.parse().map_err(|_| malformed(format!("`{s}` is not a count")))
}

/// Parses a lattice mnemonic: `lp:P:D`, `orlicz:exp|P:D`, `lorentz:K:D`, `kothe:FILE`.
pub fn lattice(spec: &str) -> Result<KotheLattice, GeomError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts[0] {
        "lp" => KotheLattice::lp(count(field(&parts, 2, "dimension")?)?, number(field(&parts, 1, "exponent")?)?),
        "orlicz" => {
            let young = match field(&parts, 1, "Young function")? {
                "exp" => Young::Exp,
                p => Young::Power { p: number(p)? },
            };
            KotheLattice::orlicz(vec![1.0; count(field(&parts, 2, "dimension")?)?], young)
        }
        "lorentz" => {
            let k = count(field(&parts, 1, "k")?)?;
            let d = count(field(&parts, 2, "dimension")?)?;
            if k == 0 || k > d {
                return Err(malformed(format!("lorentz needs 1 <= k <= dimension, got k = {k}")));
            }
            let c = (0..d).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
            KotheLattice::top_k_lorentz(vec![1.0; d], c)
        }
        "kothe" => {
            let text = read(Path::new(&spec["kothe:".len()..]))?;
            let l: KotheLattice = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
            l.validate()?;
            Ok(l)
        }
        other => Err(malformed(format!("unknown lattice kind `{other}`"))),
    }
}

fn read(path: &Path) -> Result<String, GeomError> {
    std::fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

/// Parses a space mnemonic or JSON document.
pub fn space(spec: &str) -> Result<NormedSpace, GeomError> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        return NormedSpace::from_json(spec);
    }
    if let Some(path) = spec.strip_prefix('@') {
        return NormedSpace::from_json(&read(Path::new(path))?);
    }
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "lp" | "orlicz" | "lorentz" | "kothe" => {
            let l = lattice(spec)?;
            // Plain ℓ_p keeps its own variant so labels read naturally.
            if head == "lp" {
                return make_lp(l.atoms(), number(field(&spec.split(':').collect::<Vec<_>>(), 1, "exponent")?)?, Field::Real);
            }
            Ok(NormedSpace::Kothe(l))
        }
        "complex" => complexify(&lattice(rest)?),
        "pconvex" => {
            let (p, base) = rest.split_once(':').ok_or_else(|| malformed("pconvex:P:LATTICE"))?;
            Ok(NormedSpace::Pconvex(pconvexify(&lattice(base)?, number(p)?)?))
        }
        "bochner" => {
            let parts: Vec<&str> = rest.splitn(3, ':').collect();
            let p = number(field(&parts, 0, "exponent")?)?;
            let atoms = count(field(&parts, 1, "atom count")?)?;
            let inner = space(field(&parts, 2, "inner space")?)?;
            if atoms == 0 {
                return Err(malformed("bochner needs at least one atom"));
            }
            Ok(NormedSpace::Bochner(bochner(vec![1.0 / atoms as f64; atoms], p, inner)?))
        }
        other => Err(malformed(format!("unknown space kind `{other}`"))),
    }
}

/// The lattice behind a space, for lattice-only commands.
pub fn lattice_of(space: &NormedSpace) -> Result<KotheLattice, GeomError> {
    match space {
        NormedSpace::Kothe(l) => Ok(l.clone()),
        NormedSpace::Lp { dim, p, field: Field::Real } => KotheLattice::lp(*dim, p.0),
        other => Err(malformed(format!("`{}` is not a real lattice", other.label()))),
    }
}

pub fn gauge(spec: &str) -> Result<ConvexGauge, GeomError> {
    spec.parse::<ConvexGauge>()
}

pub fn rv(spec: &str, nodes: Option<usize>, seed: Option<u64>) -> Result<SymmetricRv, GeomError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let kind = |s: &str| match s {
        "rademacher" => Ok(RvKind::Rademacher),
        "cos" => Ok(RvKind::CosTheta),
        "circle" => Ok(RvKind::ComplexCircle),
        "uniform" => Ok(RvKind::UniformSymmetric),
        other => Err(malformed(format!("unknown random variable `{other}`"))),
    };
    if parts[0] == "mc" {
        let seed = seed.ok_or_else(|| malformed("Monte Carlo random variables need --seed"))?;
        return SymmetricRv::monte_carlo(kind(field(&parts, 1, "kind")?)?, count(field(&parts, 2, "samples")?)?, seed);
    }
    let k = kind(parts[0])?;
    if k == RvKind::Rademacher {
        if parts.len() > 1 {
            return Err(malformed("Rademacher variables take no node count"));
        }
        return Ok(SymmetricRv::rademacher());
    }
    let n = match parts.get(1) {
        Some(s) => count(s)?,
        None => nodes.unwrap_or(geomlab::quadrature::DEFAULT_NODES),
    };
    match k {
        RvKind::CosTheta => SymmetricRv::cos_theta(n),
        RvKind::ComplexCircle => SymmetricRv::complex_circle(n),
        _ => SymmetricRv::uniform(n),
    }
}
