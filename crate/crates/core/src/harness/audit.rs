//! Energy inequalities audited on sampled subsets of a variety. Each audit
//! reports the largest observed ratio of the exact left-hand side to the
//! right-hand envelope with the implied constant set to 1.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::config::{Experiment, SizeSpec};
use super::levels;
use super::sampling::{random_subset, stream_rng};
use crate::ambient::PointSet;
use crate::error::{Error, Result};
use crate::variety::max_affine_subspace;

/// The inequality being audited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LemmaId {
    /// `|A|^{2l} / (E_l(A) |A_l|) ≤ 1` with `l = k`; unconditional.
    SumsetBound,
    /// `E(A) ≤ |A|^3/q + q^{(d-2)/2} |A|^2` on spheres of nonzero radius,
    /// `d ≥ 4` even.
    EvenSphereEnergy,
    /// The same envelope on spheres of primitive radius, `d ≡ 1 (mod 4)`
    /// with `d ≥ 5`, or `d ≡ 3 (mod 4)` with `q ≡ 1 (mod 4)`.
    OddSphereEnergy,
    /// `E_k(A) ≤ q^{d-1} E_{k-1}(A) + |A|^{2k-1}/q` on any sphere.
    EnergyInduction,
    /// `E_l(A) ≤ q^{((d-1)(2l-3)-1)/2}|A|^2 + q^{(d-1)(l-2)-1}|A|^3 + |A|^{2l-1}/q`
    /// with `l = k`, for `|A| > q^{(d-1)/2}` on a sphere meeting the even or
    /// odd dimension conditions above.
    SphereLevelEnergy,
    /// `E(A) ≤ |A|^3 (t_V/|A|)^γ` for `n ≥ 2`, or `|A|^2 t_V` for `n = 1`,
    /// on any variety of declared dimension `n`.
    VarietyEnergy,
}

impl LemmaId {
    pub const ALL: [LemmaId; 6] = [
        LemmaId::SumsetBound,
        LemmaId::EvenSphereEnergy,
        LemmaId::OddSphereEnergy,
        LemmaId::EnergyInduction,
        LemmaId::SphereLevelEnergy,
        LemmaId::VarietyEnergy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::SumsetBound => "sumset-bound",
            LemmaId::EvenSphereEnergy => "even-sphere-energy",
            LemmaId::OddSphereEnergy => "odd-sphere-energy",
            LemmaId::EnergyInduction => "energy-induction",
            LemmaId::SphereLevelEnergy => "sphere-level-energy",
            LemmaId::VarietyEnergy => "variety-energy",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| {
            let names: Vec<_> = LemmaId::ALL.iter().map(|l| l.name()).collect();
            Error::Parse(format!("unknown lemma {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

impl Serialize for LemmaId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// One audited subset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditInstance {
    pub index: usize,
    pub size: usize,
    /// Exact left-hand side, as a decimal string.
    pub lhs: String,
    pub envelope: f64,
    pub ratio: f64,
}

/// The subset attaining the largest ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditWitness {
    pub index: usize,
    pub size: usize,
    pub ranks: Vec<usize>,
    pub points: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaAuditReport {
    pub lemma: LemmaId,
    pub config_hash: String,
    pub instances: usize,
    /// Largest `lhs / envelope` over all instances.
    pub empirical_constant: f64,
    pub min_ratio: f64,
    /// Instances with ratio above 1. For `sumset-bound` any such instance
    /// contradicts a theorem; for the others it only says the implied
    /// constant exceeds 1.
    pub above_one: usize,
    pub witness: AuditWitness,
    pub rows: Vec<AuditInstance>,
}

/// `rational + sqrt_coeff·√q + real`, with the float part only used where
/// no closed form in `Q(√q)` exists.
#[derive(Default)]
struct Envelope {
    rational: BigRational,
    sqrt_coeff: BigRational,
    real: f64,
}

impl Envelope {
    /// Adds `coeff · q^{twice/2}`.
    fn add_half_power(&mut self, q: u64, twice: i64, coeff: BigRational) {
        let int_part = twice.div_euclid(2);
        let qpow = if int_part >= 0 {
            BigRational::from_integer(BigUint::from(q).pow(int_part as u32).into())
        } else {
            BigRational::new(1.into(), BigUint::from(q).pow((-int_part) as u32).into())
        };
        let term = coeff * qpow;
        if twice.rem_euclid(2) == 0 {
            self.rational += term;
        } else {
            self.sqrt_coeff += term;
        }
    }

    fn ratio(&self, lhs: &BigUint, q: u64) -> (f64, f64) {
        let lhs_r = BigRational::from_integer(lhs.clone().into());
        if self.sqrt_coeff.is_zero() && self.real == 0.0 {
            let env = f(&self.rational);
            if self.rational.is_zero() {
                return (0.0, if lhs.is_zero() { 0.0 } else { f64::INFINITY });
            }
            return (env, f(&(lhs_r / &self.rational)));
        }
        let env = f(&self.rational) + f(&self.sqrt_coeff) * (q as f64).sqrt() + self.real;
        (env, f(&lhs_r) / env)
    }
}

fn f(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::INFINITY)
}

fn int(n: impl Into<BigUint>) -> BigRational {
    let n: BigUint = n.into();
    BigRational::from_integer(n.into())
}

fn hypothesis(msg: impl Into<String>) -> Error {
    Error::Hypothesis(msg.into())
}

/// Checks a lemma's hypotheses against the experiment and returns the
/// smallest admissible subset size.
fn check_hypotheses(lemma: LemmaId, exp: &Experiment) -> Result<usize> {
    let d = exp.ambient.d();
    let q = exp.config.q;
    let k = exp.config.k;
    let field = exp.ambient.field();
    let radius = exp.variety.sphere_radius();
    let need_sphere = || {
        radius.ok_or_else(|| hypothesis(format!("{lemma} needs a sphere variety, got {}", exp.config.variety)))
    };
    let even_ok = |lemma: LemmaId| -> Result<()> {
        let j = need_sphere()?;
        if j.index() == 0 {
            return Err(hypothesis(format!("{lemma} needs a nonzero sphere radius")));
        }
        Ok(())
    };
    let odd_ok = |lemma: LemmaId| -> Result<()> {
        let j = need_sphere()?;
        if !field.is_primitive(j) {
            return Err(hypothesis(format!("{lemma} needs a primitive sphere radius, {j} is not primitive in F_{q}")));
        }
        let dims_ok = match d % 4 {
            1 => d >= 5,
            3 => q % 4 == 1,
            _ => false,
        };
        if !dims_ok {
            return Err(hypothesis(format!(
                "{lemma} needs d ≡ 1 (mod 4) with d ≥ 5, or d ≡ 3 (mod 4) with q ≡ 1 (mod 4); got d = {d}, q = {q}"
            )));
        }
        Ok(())
    };
    match lemma {
        LemmaId::SumsetBound => {
            if k == 0 {
                return Err(hypothesis("sumset-bound needs k ≥ 1"));
            }
        }
        LemmaId::EvenSphereEnergy => {
            even_ok(lemma)?;
            if d < 4 || !d.is_multiple_of(2) {
                return Err(hypothesis(format!("{lemma} needs even d ≥ 4, got d = {d}")));
            }
        }
        LemmaId::OddSphereEnergy => odd_ok(lemma)?,
        LemmaId::EnergyInduction => {
            need_sphere()?;
            if k < 2 {
                return Err(hypothesis(format!("{lemma} needs k ≥ 2, got {k}")));
            }
        }
        LemmaId::SphereLevelEnergy => {
            if d < 3 {
                return Err(hypothesis(format!("{lemma} needs d ≥ 3, got {d}")));
            }
            if k < 2 {
                return Err(hypothesis(format!("{lemma} needs l = k ≥ 2, got {k}")));
            }
            if d.is_multiple_of(2) {
                even_ok(lemma)?;
            } else {
                odd_ok(lemma)?;
            }
            // Smallest s with s^2 > q^{d-1}.
            let bound = BigUint::from(q).pow(d as u32 - 1);
            let mut s = bound.sqrt();
            while &s * &s <= bound {
                s += 1u32;
            }
            return s.to_usize().ok_or_else(|| hypothesis("size bound overflow"));
        }
        LemmaId::VarietyEnergy => {
            if exp.variety.def().declared_dim() == 0 {
                return Err(hypothesis(format!("{lemma} needs declared dimension n ≥ 1")));
            }
        }
    }
    Ok(1)
}

struct Evaluated {
    lhs: BigUint,
    envelope: Envelope,
}

fn evaluate(lemma: LemmaId, exp: &Experiment, a: &PointSet, t_v: u64) -> Result<Evaluated> {
    let q = exp.config.q;
    let d = exp.ambient.d() as i64;
    let k = exp.config.k;
    let s = a.len() as u64;
    let sr = int(s);
    let mut env = Envelope::default();
    let lhs = match lemma {
        LemmaId::SumsetBound => {
            let mu = levels(a, k)?;
            let top = mu.last().expect("k ≥ 1");
            let energy = top.sum_of_squares();
            // |A|^{2l} ≤ E_l·|A_l|, so the envelope is E_l·|A_l|.
            env.rational = int(&energy * BigUint::from(top.support_len()));
            BigUint::from(s).pow(2 * k)
        }
        LemmaId::EvenSphereEnergy | LemmaId::OddSphereEnergy => {
            let energy = levels(a, 2)?[1].sum_of_squares();
            env.add_half_power(q, -2, sr.pow(3));
            env.add_half_power(q, d - 2, sr.pow(2));
            energy
        }
        LemmaId::EnergyInduction => {
            let mu = levels(a, k)?;
            let prev = mu[k as usize - 2].sum_of_squares();
            env.add_half_power(q, 2 * (d - 1), int(prev));
            env.add_half_power(q, -2, sr.pow(2 * k as i32 - 1));
            mu[k as usize - 1].sum_of_squares()
        }
        LemmaId::SphereLevelEnergy => {
            let l = k as i64;
            let energy = levels(a, k)?[k as usize - 1].sum_of_squares();
            env.add_half_power(q, (d - 1) * (2 * l - 3) - 1, sr.pow(2));
            env.add_half_power(q, 2 * ((d - 1) * (l - 2) - 1), sr.pow(3));
            env.add_half_power(q, -2, sr.pow(2 * k as i32 - 1));
            energy
        }
        LemmaId::VarietyEnergy => {
            let energy = levels(a, 2)?[1].sum_of_squares();
            let n = exp.variety.def().declared_dim() as u32;
            if n == 1 {
                env.rational = sr.pow(2) * int(t_v);
            } else {
                let gamma = 1.0 / ((1u64 << (n + 1)) - n as u64 - 5) as f64;
                env.real = (s as f64).powi(3) * (t_v as f64 / s as f64).powf(gamma);
            }
            energy
        }
    };
    Ok(Evaluated { lhs, envelope: env })
}

/// Samples subsets of the variety per the config and audits `lemma` on
/// each. Sample `i` uses seed stream `i`, so a larger `samples` extends the
/// run without changing earlier instances.
///
/// Subset sizes come from the config: an explicit list is cycled through;
/// a geometric spec is read as the range `[start, end]` and sizes are drawn
/// uniformly from it (clipped below by the lemma's size hypothesis).
pub fn audit_lemma(lemma: LemmaId, exp: &Experiment) -> Result<LemmaAuditReport> {
    let cfg = &exp.config;
    if cfg.samples == 0 {
        return Err(hypothesis("audit needs at least one sample"));
    }
    let min_size = check_hypotheses(lemma, exp)?;
    let pool = exp.pool();
    let max = pool.len();
    let (explicit, lo, hi) = match &cfg.sizes {
        SizeSpec::List(v) => {
            cfg.sizes.resolve(max)?;
            if let Some(&bad) = v.iter().find(|&&s| s < min_size) {
                return Err(hypothesis(format!("{lemma} needs |A| ≥ {min_size}, got size {bad}")));
            }
            (Some(v.clone()), 0, 0)
        }
        SizeSpec::Geometric { start, end } => {
            let hi = end.unwrap_or(max);
            if hi > max {
                return Err(hypothesis(format!("subset size {hi} exceeds |V| = {max}")));
            }
            (None, (*start).max(min_size), hi)
        }
    };
    if explicit.is_none() && lo > hi {
        return Err(hypothesis(format!("{lemma} needs |A| ≥ {lo} but |V| allows at most {hi}")));
    }
    let t_v = if lemma == LemmaId::VarietyEnergy {
        max_affine_subspace(&exp.variety, exp.ambient.d().min(2))?.t_v
    } else {
        0
    };
    let instances: Vec<(AuditInstance, Vec<usize>)> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, i as u64);
            let size = match &explicit {
                Some(v) => v[i % v.len()],
                None => rng.random_range(lo..=hi),
            };
            let ranks = random_subset(&pool, size, &mut rng);
            let a = PointSet::from_ranks(&exp.ambient, ranks.iter().copied())?;
            let ev = evaluate(lemma, exp, &a, t_v)?;
            let (envelope, ratio) = ev.envelope.ratio(&ev.lhs, cfg.q);
            Ok((
                AuditInstance {
                    index: i,
                    size,
                    lhs: ev.lhs.to_string(),
                    envelope,
                    ratio,
                },
                ranks,
            ))
        })
        .collect::<Result<_>>()?;
    let (best, _) = instances
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, (row, _))| {
            if row.ratio > bv {
                (i, row.ratio)
            } else {
                (bi, bv)
            }
        });
    let (best_row, best_ranks) = instances[best].clone();
    let empirical_constant = best_row.ratio;
    let witness = AuditWitness {
        index: best_row.index,
        size: best_row.size,
        ranks: best_ranks.clone(),
        points: best_ranks
            .iter()
            .map(|&r| exp.ambient.unrank(r).map(|p| p.indices()))
            .collect::<Result<_>>()?,
    };
    let rows: Vec<AuditInstance> = instances.into_iter().map(|(row, _)| row).collect();
    Ok(LemmaAuditReport {
        lemma,
        config_hash: cfg.hash(),
        instances: rows.len(),
        empirical_constant,
        min_ratio: rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        above_one: rows.iter().filter(|r| r.ratio > 1.0).count(),
        witness,
        rows,
    })
}
