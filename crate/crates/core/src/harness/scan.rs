//! Threshold scans: how `|Δ_k(A)|` grows with `|A|` for subsets of a
//! variety, next to the size threshold a rule predicts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::config::Experiment;
use super::levels;
use super::sampling::{binomial, cell_stream, random_subset, stream_rng, Combinations, EXHAUSTIVE_LIMIT};
use super::thresholds::{threshold_exponent, TheoremParams, ThresholdRule};
use crate::ambient::PointSet;
use crate::combinatorics::norm_set;
use crate::error::{Error, Result};
use crate::variety::max_affine_subspace;

/// One size in the grid. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub size: usize,
    /// `log_q(size)`.
    pub log_q_size: f64,
    /// Subsets evaluated at this size.
    pub subsets: usize,
    /// Whether every size-`s` subset was evaluated.
    pub exhaustive: bool,
    pub min_delta: usize,
    pub mean_delta: f64,
    pub max_delta: usize,
    /// Fraction with `|Δ_k(A)| ≥ ggq_fraction · q`.
    pub frac_ggq: f64,
    /// Fraction with `Δ_k(A) ⊇ F_q^*`.
    pub frac_units: f64,
    /// Mean of `max_{1≤l<k} |A_l||A_{k-l}|`.
    pub mean_split_product: f64,
    /// Fraction whose best split product reaches `q^{(d+1)/2}`.
    pub frac_split_half: f64,
    /// Fraction whose best split product reaches `q^{d+1}`.
    pub frac_split_full: f64,
}

impl ScanRow {
    pub const CSV_HEADER: &'static str = "size,log_q_size,subsets,exhaustive,min_delta,mean_delta,max_delta,frac_ggq,frac_units,mean_split_product,frac_split_half,frac_split_full";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.size,
            self.log_q_size,
            self.subsets,
            self.exhaustive,
            self.min_delta,
            self.mean_delta,
            self.max_delta,
            self.frac_ggq,
            self.frac_units,
            self.mean_split_product,
            self.frac_split_half,
            self.frac_split_full
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub rule: ThresholdRule,
    pub config_hash: String,
    pub q: u64,
    pub d: usize,
    pub k: u32,
    pub variety: String,
    pub variety_size: usize,
    /// Exact predicted exponent `τ`.
    pub predicted_exponent: String,
    pub predicted_exponent_value: f64,
    /// `q^τ`.
    pub predicted_size: f64,
    /// Constants behind the prediction, e.g. `c=1 beta=1/16 alpha=0`.
    pub provenance: String,
    pub ggq_threshold: f64,
    pub rows: Vec<ScanRow>,
    /// Size where `frac_ggq` first reaches 1/2, interpolated on a log scale
    /// between grid points.
    pub crossover_size: Option<f64>,
    pub crossover_below_prediction: Option<bool>,
}

impl ScanReport {
    /// Rows as CSV with a header line, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ScanRow::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }
}

/// Theorem parameters for `rule` on this experiment, after checking the
/// variety-level hypotheses the exponent formula cannot see.
pub fn theorem_params(exp: &Experiment, rule: ThresholdRule) -> Result<(TheoremParams, String)> {
    let cfg = &exp.config;
    let radius = exp.variety.sphere_radius();
    let sphere_rule = matches!(
        rule,
        ThresholdRule::EvenSphere | ThresholdRule::EvenSphereK3 | ThresholdRule::OddSphere | ThresholdRule::OddSphereK3
    );
    if sphere_rule {
        let j = radius.ok_or_else(|| Error::Hypothesis(format!("{rule} needs a sphere variety")))?;
        let odd = matches!(rule, ThresholdRule::OddSphere | ThresholdRule::OddSphereK3);
        if j.index() == 0 {
            return Err(Error::Hypothesis(format!("{rule} needs a nonzero sphere radius")));
        }
        if odd && !exp.ambient.field().is_primitive(j) {
            return Err(Error::Hypothesis(format!("{rule} needs a primitive sphere radius, {j} is not primitive")));
        }
    }
    let mut params = TheoremParams::new(cfg.d as u32, exp.variety.def().declared_dim() as u32, cfg.k)
        .with_q(cfg.q)
        .with_c(cfg.c.clone());
    if let Some(beta) = &cfg.beta {
        params = params.with_beta(beta.clone());
    }
    let mut provenance = format!("c={} beta={}", params.c, params.beta());
    if rule.uses_alpha() {
        let report = max_affine_subspace(&exp.variety, exp.ambient.d().min(2))?;
        let alpha = report.alpha().unwrap_or(0);
        params = params.with_alpha(BigRational::from_integer(BigInt::from(alpha)));
        provenance.push_str(&format!(" alpha={alpha} (flats searched up to dimension {})", report.searched_dim_cap));
    }
    Ok((params, provenance))
}

struct Cell {
    delta: usize,
    covers_units: bool,
    split: u128,
}

fn evaluate(exp: &Experiment, ranks: &[usize]) -> Result<Cell> {
    let k = exp.config.k;
    let a = PointSet::from_ranks(&exp.ambient, ranks.iter().copied())?;
    let mu = levels(&a, k)?;
    let delta = norm_set(&mu[k as usize - 1].support());
    let sizes: Vec<u128> = mu.iter().map(|m| m.support_len() as u128).collect();
    let split = (1..k as usize)
        .map(|l| sizes[l - 1] * sizes[k as usize - l - 1])
        .max()
        .unwrap_or(0);
    Ok(Cell {
        delta: delta.len(),
        covers_units: delta.covers_units(),
        split,
    })
}

/// Runs the scan: for each grid size `s`, either every size-`s` subset of
/// the variety (when there are at most [`EXHAUSTIVE_LIMIT`]) or
/// `config.samples` seeded uniform ones.
pub fn scan_thresholds(exp: &Experiment, rule: ThresholdRule) -> Result<ScanReport> {
    let cfg = &exp.config;
    if cfg.k < 2 {
        return Err(Error::Hypothesis(format!("scans need k ≥ 2, got {}", cfg.k)));
    }
    let (params, provenance) = theorem_params(exp, rule)?;
    let tau = threshold_exponent(rule, &params)?;
    let tau_f = tau.to_f64().unwrap_or(f64::NAN);
    let q = cfg.q as f64;
    let pool = exp.pool();
    let sizes = cfg.sizes.resolve(pool.len())?;
    if sizes.contains(&0) {
        return Err(Error::Hypothesis("subset sizes must be positive".into()));
    }
    let ggq = cfg.ggq_threshold();
    let q_d1 = BigInt::from(cfg.q).pow(cfg.d as u32 + 1);
    let mut rows = Vec::with_capacity(sizes.len());
    for &s in &sizes {
        let exhaustive = binomial(pool.len(), s) <= EXHAUSTIVE_LIMIT;
        let subsets: Vec<Vec<usize>> = if exhaustive {
            Combinations::new(pool.len(), s)
                .map(|c| c.into_iter().map(|i| pool[i]).collect())
                .collect()
        } else {
            (0..cfg.samples)
                .into_par_iter()
                .map(|rep| random_subset(&pool, s, &mut stream_rng(cfg.seed, cell_stream(s, rep))))
                .collect()
        };
        if subsets.is_empty() {
            return Err(Error::Hypothesis("scan needs at least one sample per size".into()));
        }
        let cells: Vec<Cell> = subsets.par_iter().map(|r| evaluate(exp, r)).collect::<Result<_>>()?;
        let n = cells.len() as f64;
        let frac = |pred: &dyn Fn(&Cell) -> bool| cells.iter().filter(|c| pred(c)).count() as f64 / n;
        rows.push(ScanRow {
            size: s,
            log_q_size: (s as f64).ln() / q.ln(),
            subsets: cells.len(),
            exhaustive,
            min_delta: cells.iter().map(|c| c.delta).min().unwrap_or(0),
            mean_delta: cells.iter().map(|c| c.delta as u64).sum::<u64>() as f64 / n,
            max_delta: cells.iter().map(|c| c.delta).max().unwrap_or(0),
            frac_ggq: frac(&|c| c.delta as f64 >= ggq),
            frac_units: frac(&|c| c.covers_units),
            mean_split_product: cells.iter().map(|c| c.split).sum::<u128>() as f64 / n,
            // Against q^{(d+1)/2} by squaring both sides.
            frac_split_half: frac(&|c| BigInt::from(c.split).pow(2) >= q_d1),
            frac_split_full: frac(&|c| BigInt::from(c.split) >= q_d1),
        });
    }
    let crossover_size = crossover(&rows);
    let predicted_size = q.powf(tau_f);
    Ok(ScanReport {
        rule,
        config_hash: cfg.hash(),
        q: cfg.q,
        d: cfg.d,
        k: cfg.k,
        variety: cfg.variety.to_string(),
        variety_size: pool.len(),
        predicted_exponent: tau.to_string(),
        predicted_exponent_value: tau_f,
        predicted_size,
        provenance,
        ggq_threshold: ggq,
        rows,
        crossover_size,
        crossover_below_prediction: crossover_size.map(|c| c < predicted_size),
    })
}

fn crossover(rows: &[ScanRow]) -> Option<f64> {
    let i = rows.iter().position(|r| r.frac_ggq >= 0.5)?;
    let hit = &rows[i];
    if i == 0 {
        return Some(hit.size as f64);
    }
    let prev = &rows[i - 1];
    let t = (0.5 - prev.frac_ggq) / (hit.frac_ggq - prev.frac_ggq);
    let (l0, l1) = ((prev.size as f64).ln(), (hit.size as f64).ln());
    Some((l0 + t * (l1 - l0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::k_distance_set;
    use crate::harness::config::{ExperimentConfig, SizeSpec, VarietyChoice};

    fn cfg(q: u64, d: usize, k: u32) -> ExperimentConfig {
        ExperimentConfig::new(q, d, VarietyChoice::Sphere(1)).with_k(k).with_samples(6)
    }

    #[test]
    fn small_scan_matches_direct_distance_sets() {
        let c = cfg(3, 4, 3).with_sizes(SizeSpec::List(vec![1, 2, 10]));
        let exp = c.build().unwrap();
        let r = scan_thresholds(&exp, ThresholdRule::EvenSphereK3).unwrap();
        assert_eq!(r.predicted_exponent, "7/4");
        assert_eq!(r.rows.len(), 3);
        let single = &r.rows[0];
        assert!(single.exhaustive && single.subsets == exp.variety.len());
        assert_eq!((single.min_delta, single.max_delta), (1, 1));
        // q/4 < 1 here, so even |Δ_3| = 1 clears the bar.
        assert_eq!(single.frac_ggq, 1.0);
        // Pairs: exhaustive, so compare the mean against a direct pass.
        let pool = exp.pool();
        let mut total = 0usize;
        let mut count = 0usize;
        for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                let a = PointSet::from_ranks(&exp.ambient, [pool[i], pool[j]]).unwrap();
                total += k_distance_set(&a, 3).unwrap().len();
                count += 1;
            }
        }
        assert_eq!(r.rows[1].subsets, count);
        assert!((r.rows[1].mean_delta - total as f64 / count as f64).abs() < 1e-12);
        assert!(!r.rows[2].exhaustive);
        assert_eq!(r.rows[2].subsets, 6);
    }

    #[test]
    fn deterministic_csv() {
        let c = cfg(5, 4, 3).with_seed(7).with_sizes(SizeSpec::List(vec![2, 4, 8, 16, 32]));
        let a = scan_thresholds(&c.build().unwrap(), ThresholdRule::EvenSphereK3).unwrap();
        let b = scan_thresholds(&c.build().unwrap(), ThresholdRule::EvenSphereK3).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_csv().lines().count(), 6);
        assert!(a.to_csv().starts_with("size,log_q_size,"));
    }

    #[test]
    fn rule_hypotheses_checked_against_variety() {
        let odd = ExperimentConfig::new(5, 3, VarietyChoice::Sphere(1)).with_k(3);
        assert!(matches!(
            scan_thresholds(&odd.build().unwrap(), ThresholdRule::OddSphereK3),
            Err(Error::Hypothesis(_))
        ));
        let prim = ExperimentConfig::new(5, 3, VarietyChoice::Sphere(2))
            .with_k(3)
            .with_sizes(SizeSpec::List(vec![1, 2]));
        let r = scan_thresholds(&prim.build().unwrap(), ThresholdRule::OddSphereK3).unwrap();
        assert_eq!(r.predicted_exponent, "7/6");
        let flat = ExperimentConfig::new(3, 3, VarietyChoice::Hyperplane)
            .with_k(3)
            .with_sizes(SizeSpec::List(vec![1]));
        assert!(scan_thresholds(&flat.build().unwrap(), ThresholdRule::EvenSphereK3).is_err());
        let r = scan_thresholds(&flat.build().unwrap(), ThresholdRule::AffineK3).unwrap();
        // The plane itself is the largest flat: α = 2 = (d+1)/2, so τ = 2.
        assert_eq!(r.predicted_exponent, "2");
        assert!(r.provenance.contains("alpha=2"));
    }

    #[test]
    fn crossover_interpolates_on_log_scale() {
        let row = |size, frac_ggq| ScanRow {
            size,
            log_q_size: 0.0,
            subsets: 1,
            exhaustive: true,
            min_delta: 0,
            mean_delta: 0.0,
            max_delta: 0,
            frac_ggq,
            frac_units: 0.0,
            mean_split_product: 0.0,
            frac_split_half: 0.0,
            frac_split_full: 0.0,
        };
        assert_eq!(crossover(&[row(1, 0.0), row(4, 0.2)]), None);
        assert_eq!(crossover(&[row(3, 0.7)]), Some(3.0));
        let c = crossover(&[row(2, 0.0), row(8, 1.0)]).unwrap();
        assert!((c - 4.0).abs() < 1e-12);
    }
}
