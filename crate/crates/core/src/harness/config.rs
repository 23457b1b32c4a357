//! Experiment configuration: field, ambient dimension, variety, sampling
//! plan. A config hashes to a short fingerprint embedded in every report.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::ambient::Ambient;
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::poly::Polynomial;
use crate::variety::{enumerate_variety, hyperplane, sphere, Variety, VarietyDef};

/// Which variety an experiment runs on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarietyChoice {
    /// `S_j^{d-1}`, with `j` given as a field element index.
    Sphere(u64),
    Hyperplane,
    /// Polynomial system; `text` is the file contents so the config hash
    /// covers the equations, not just the path.
    Polynomial { source: String, text: String },
}

impl VarietyChoice {
    /// Parses `sphere:<j>`, `hyperplane` or `poly:<file>` (reading the file).
    pub fn parse(s: &str) -> Result<VarietyChoice> {
        if s == "hyperplane" {
            return Ok(VarietyChoice::Hyperplane);
        }
        if let Some(j) = s.strip_prefix("sphere:") {
            let j = j
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad sphere radius {j:?}")))?;
            return Ok(VarietyChoice::Sphere(j));
        }
        if let Some(path) = s.strip_prefix("poly:") {
            let text = std::fs::read_to_string(Path::new(path))?;
            return Ok(VarietyChoice::Polynomial {
                source: path.to_string(),
                text,
            });
        }
        Err(Error::Parse(format!(
            "unknown variety {s:?}; expected sphere:<j>, hyperplane or poly:<file>"
        )))
    }
}

impl fmt::Display for VarietyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarietyChoice::Sphere(j) => write!(f, "sphere:{j}"),
            VarietyChoice::Hyperplane => f.write_str("hyperplane"),
            VarietyChoice::Polynomial { source, .. } => write!(f, "poly:{source}"),
        }
    }
}

impl Serialize for VarietyChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            VarietyChoice::Polynomial { text, .. } => s.serialize_str(&format!("poly:{}", text.trim())),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// Subset sizes to visit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SizeSpec {
    List(Vec<usize>),
    /// Powers of two from `start`, ending with `end` (or `|V|` when `None`).
    Geometric { start: usize, end: Option<usize> },
}

impl Default for SizeSpec {
    fn default() -> Self {
        SizeSpec::Geometric { start: 1, end: None }
    }
}

impl FromStr for SizeSpec {
    type Err = Error;

    /// `1,2,4,8`, `geom:<start>:<end>` or `geom:<start>:max`.
    fn from_str(s: &str) -> Result<SizeSpec> {
        let bad = || Error::Parse(format!("bad size spec {s:?}"));
        if let Some(rest) = s.strip_prefix("geom:") {
            let (start, end) = rest.split_once(':').ok_or_else(bad)?;
            let start: usize = start.parse().map_err(|_| bad())?;
            let end = match end {
                "max" => None,
                e => Some(e.parse().map_err(|_| bad())?),
            };
            if start == 0 || matches!(end, Some(e) if e < start) {
                return Err(bad());
            }
            return Ok(SizeSpec::Geometric { start, end });
        }
        let sizes = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if sizes.is_empty() {
            return Err(bad());
        }
        Ok(SizeSpec::List(sizes))
    }
}

impl fmt::Display for SizeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(usize::to_string).collect();
                f.write_str(&parts.join(","))
            }
            SizeSpec::Geometric { start, end: None } => write!(f, "geom:{start}:max"),
            SizeSpec::Geometric { start, end: Some(e) } => write!(f, "geom:{start}:{e}"),
        }
    }
}

impl Serialize for SizeSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl SizeSpec {
    /// Concrete sizes for a variety with `max` points, ascending and
    /// deduplicated. Sizes above `max` are an error.
    pub fn resolve(&self, max: usize) -> Result<Vec<usize>> {
        let mut sizes = match self {
            SizeSpec::List(v) => v.clone(),
            SizeSpec::Geometric { start, end } => {
                let end = end.unwrap_or(max);
                let mut v = Vec::new();
                let mut s = *start;
                while s < end {
                    v.push(s);
                    s = s.saturating_mul(2);
                }
                v.push(end);
                v
            }
        };
        if let Some(&s) = sizes.iter().find(|&&s| s > max) {
            return Err(Error::Hypothesis(format!("subset size {s} exceeds |V| = {max}")));
        }
        sizes.sort_unstable();
        sizes.dedup();
        Ok(sizes)
    }
}

fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_opt_rational<S: Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// Parses `a/b`, an integer, or a plain decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let scale = BigInt::from(10).pow(frac.len() as u32);
        return Ok(BigRational::new(digits, scale));
    }
    s.parse::<BigRational>().map_err(|_| bad())
}

/// Everything that determines an experiment's output.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub q: u64,
    pub ext_modulus: Option<Vec<u32>>,
    pub d: usize,
    pub variety: VarietyChoice,
    /// Overrides for polynomial varieties; defaults are `d - #equations`
    /// and the product of total degrees.
    pub declared_dim: Option<usize>,
    pub declared_deg: Option<u32>,
    pub k: u32,
    pub samples: usize,
    pub sizes: SizeSpec,
    pub seed: u64,
    /// `|Δ_k(A)| ≥ ggq_fraction · q` counts as "of order q".
    #[serde(serialize_with = "ser_rational")]
    pub ggq_fraction: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub c: BigRational,
    #[serde(serialize_with = "ser_opt_rational")]
    pub beta: Option<BigRational>,
}

impl ExperimentConfig {
    pub fn new(q: u64, d: usize, variety: VarietyChoice) -> ExperimentConfig {
        ExperimentConfig {
            q,
            ext_modulus: None,
            d,
            variety,
            declared_dim: None,
            declared_deg: None,
            k: 3,
            samples: 20,
            sizes: SizeSpec::default(),
            seed: 1,
            ggq_fraction: BigRational::new(1.into(), 4.into()),
            c: BigRational::one(),
            beta: None,
        }
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_sizes(mut self, sizes: SizeSpec) -> Self {
        self.sizes = sizes;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    /// `ggq_fraction · q` as a float threshold on `|Δ_k|`.
    pub fn ggq_threshold(&self) -> f64 {
        (&self.ggq_fraction * BigRational::from_integer(self.q.into()))
            .to_f64()
            .unwrap_or(f64::INFINITY)
    }

    /// Builds the field, ambient space and variety.
    pub fn build(&self) -> Result<Experiment> {
        if !(self.ggq_fraction.is_positive() && self.ggq_fraction <= BigRational::one()) {
            return Err(Error::Hypothesis(format!(
                "ggq fraction must lie in (0, 1], got {}",
                self.ggq_fraction
            )));
        }
        let field = Arc::new(FieldSpec::from_order(self.q, self.ext_modulus.as_deref())?);
        let ambient = Ambient::new(field.clone(), self.d)?;
        let overrides = self.declared_dim.is_some() || self.declared_deg.is_some();
        let variety = match &self.variety {
            VarietyChoice::Sphere(j) => {
                if overrides {
                    return Err(Error::Hypothesis("declared dimension/degree apply only to poly varieties".into()));
                }
                sphere(&ambient, field.elem(*j)?)?
            }
            VarietyChoice::Hyperplane => {
                if overrides {
                    return Err(Error::Hypothesis("declared dimension/degree apply only to poly varieties".into()));
                }
                hyperplane(&ambient)?
            }
            VarietyChoice::Polynomial { text, .. } => {
                let polys = Polynomial::parse_many(text, &field, self.d)?;
                let defaults = VarietyDef::with_default_metadata(polys.clone(), self.d)?;
                let def = VarietyDef::new(
                    polys,
                    self.declared_dim.unwrap_or(defaults.declared_dim()),
                    self.declared_deg.unwrap_or(defaults.declared_deg()),
                )?;
                enumerate_variety(def, &ambient)?
            }
        };
        Ok(Experiment {
            config: self.clone(),
            ambient,
            variety,
        })
    }
}

/// A built configuration.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub ambient: Ambient,
    pub variety: Variety,
}

impl Experiment {
    /// Variety points by rank, ascending.
    pub fn pool(&self) -> Vec<usize> {
        self.variety.points().ranks().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variety_choices() {
        assert_eq!(VarietyChoice::parse("sphere:2").unwrap(), VarietyChoice::Sphere(2));
        assert_eq!(VarietyChoice::parse("hyperplane").unwrap(), VarietyChoice::Hyperplane);
        assert!(VarietyChoice::parse("sphere:x").is_err());
        assert!(VarietyChoice::parse("cube").is_err());
        assert!(matches!(VarietyChoice::parse("poly:/no/such/file"), Err(Error::Io(_))));
    }

    #[test]
    fn size_specs() {
        let g: SizeSpec = "geom:1:max".parse().unwrap();
        assert_eq!(g.resolve(20).unwrap(), vec![1, 2, 4, 8, 16, 20]);
        let g: SizeSpec = "geom:2:32".parse().unwrap();
        assert_eq!(g.resolve(120).unwrap(), vec![2, 4, 8, 16, 32]);
        let l: SizeSpec = "8, 2,2".parse().unwrap();
        assert_eq!(l.resolve(8).unwrap(), vec![2, 8]);
        assert!(matches!(l.resolve(7), Err(Error::Hypothesis(_))));
        for bad in ["", "geom:0:4", "geom:4:2", "geom:1", "1,,2"] {
            assert!(bad.parse::<SizeSpec>().is_err(), "{bad:?}");
        }
        assert_eq!("geom:3:max".parse::<SizeSpec>().unwrap().to_string(), "geom:3:max");
    }

    #[test]
    fn rationals() {
        let quarter = BigRational::new(1.into(), 4.into());
        assert_eq!(parse_rational("1/4").unwrap(), quarter);
        assert_eq!(parse_rational("0.25").unwrap(), quarter);
        assert_eq!(parse_rational("2").unwrap(), BigRational::from_integer(2.into()));
        for bad in ["", "a/b", "1/0x", "0.", ".5x"] {
            assert!(parse_rational(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn hash_tracks_every_field() {
        let base = ExperimentConfig::new(5, 4, VarietyChoice::Sphere(1));
        let h = base.hash();
        assert_eq!(h.len(), 16);
        assert_eq!(h, base.clone().hash());
        assert_ne!(h, base.clone().with_seed(2).hash());
        assert_ne!(h, base.clone().with_k(4).hash());
        let mut other = base.clone();
        other.ggq_fraction = BigRational::new(1.into(), 2.into());
        assert_ne!(h, other.hash());
    }

    #[test]
    fn builds_varieties() {
        let e = ExperimentConfig::new(3, 2, VarietyChoice::Sphere(1)).build().unwrap();
        assert_eq!(e.variety.len(), 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("circle.txt");
        std::fs::write(&path, "# circle\nx1^2 + x2^2 - 1\n").unwrap();
        let choice = VarietyChoice::parse(&format!("poly:{}", path.display())).unwrap();
        let mut cfg = ExperimentConfig::new(3, 2, choice);
        let e = cfg.build().unwrap();
        assert_eq!(e.pool(), ExperimentConfig::new(3, 2, VarietyChoice::Sphere(1)).build().unwrap().pool());
        assert_eq!(e.variety.def().declared_dim(), 1);
        cfg.declared_dim = Some(3);
        assert!(matches!(cfg.build(), Err(Error::Hypothesis(_))));
        let mut bad = ExperimentConfig::new(3, 2, VarietyChoice::Sphere(1));
        bad.declared_deg = Some(4);
        assert!(bad.build().is_err());
        assert!(ExperimentConfig::new(3, 2, VarietyChoice::Sphere(3)).build().is_err());
    }
}
