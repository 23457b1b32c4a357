//! Exact identity suites. Every check is an equality or inequality that
//! must hold on every input; a single failure is a bug and is reported with
//! the offending set.

use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;

use super::sampling::{random_subset, stream_rng};
use crate::ambient::{Ambient, PointSet};
use crate::combinatorics::{
    distance_set_diff, distance_set_sum, dot_product_set, energy_k_bruteforce, energy_pair, k_distance_set, sumset_iterate, RepCount, BRUTE_FORCE_LIMIT,
};
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};
use crate::spectral::{class_counts, class_counts_direct, energy_via_spectrum, parseval_check, IDENTITY_TOL};
use crate::variety::sphere;

/// A deliberate corruption, used to prove the suites can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Adds 1 to one representation count before energies are summed.
    FlipMu,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// `(q, d)` pairs to run.
    pub cases: Vec<(u64, usize)>,
    /// Random subsets per case and kind.
    pub random_sets: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cases: vec![(3, 2), (3, 3), (5, 2), (5, 3)],
            random_sets: 25,
            seed: 1,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// First failing instance.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub fault: Option<Fault>,
    pub checks: Vec<CheckResult>,
}

impl VerifySummary {
    /// The summary itself, or an identity violation naming the first
    /// failing check.
    pub fn into_result(self) -> Result<VerifySummary> {
        match self.checks.iter().find(|c| c.failures > 0) {
            None => Ok(self),
            Some(c) => Err(Error::IdentityViolation {
                check: c.name.to_string(),
                witness: c.witness.clone().unwrap_or_default(),
            }),
        }
    }
}

struct Tally {
    name: &'static str,
    instances: usize,
    failures: usize,
    witness: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Tally {
        Tally {
            name,
            instances: 0,
            failures: 0,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            instances: self.instances,
            failures: self.failures,
            witness: self.witness,
        }
    }
}

fn describe(a: &PointSet) -> String {
    let pts: Vec<String> = a
        .points()
        .map(|p| p.indices().iter().map(u32::to_string).collect::<Vec<_>>().join(","))
        .collect();
    format!("q={} d={} A={{{}}}", a.ambient().q(), a.ambient().d(), pts.join("; "))
}

fn corrupt(mut mu: RepCount, fault: Option<Fault>) -> RepCount {
    if fault == Some(Fault::FlipMu) {
        if let Some(r) = mu.counts().iter().position(|&c| c > 0) {
            let v = mu.get(r);
            mu.set(r, v + 1);
        }
    }
    mu
}

/// Test sets for one case: the empty set, a singleton, the unit sphere,
/// random subsets of the space and random subsets of the sphere.
fn test_sets(ambient: &Ambient, unit_sphere: &PointSet, opts: &VerifyOptions, case: usize) -> Result<Vec<PointSet>> {
    let mut sets = vec![
        PointSet::empty(ambient),
        PointSet::from_ranks(ambient, [ambient.size() / 2])?,
        unit_sphere.clone(),
    ];
    let everything: Vec<usize> = (0..ambient.size()).collect();
    let on_sphere: Vec<usize> = unit_sphere.ranks().collect();
    for i in 0..opts.random_sets {
        let mut rng = stream_rng(opts.seed, ((case as u64) << 32) | i as u64);
        let s = rng.random_range(1..=everything.len().min(24));
        sets.push(PointSet::from_ranks(ambient, random_subset(&everything, s, &mut rng))?);
        if !on_sphere.is_empty() {
            let s = rng.random_range(1..=on_sphere.len());
            sets.push(PointSet::from_ranks(ambient, random_subset(&on_sphere, s, &mut rng))?);
        }
    }
    Ok(sets)
}

/// Runs every suite over every case. Failures are collected, not raised;
/// use [`VerifySummary::into_result`] to turn them into an error.
pub fn verify_identities(opts: &VerifyOptions) -> Result<VerifySummary> {
    let mut energy = Tally::new("energy-three-way");
    let mut low_levels = Tally::new("energy-low-levels");
    let mut chain = Tally::new("representation-count-totals");
    let mut sumset_bound = Tally::new("sumset-bound");
    let mut parseval = Tally::new("parseval");
    let mut transform = Tally::new("fast-transform");
    let mut norm_dot = Tally::new("norm-dot-correspondence");
    let mut splitting = Tally::new("distance-splitting");

    for (case, &(q, d)) in opts.cases.iter().enumerate() {
        let ambient = Ambient::new(FieldSpec::from_order(q, None)?, d)?;
        let unit = sphere(&ambient, Elem::ONE)?;
        let sets = test_sets(&ambient, unit.points(), opts, case)?;
        for a in &sets {
            let n = a.len() as u64;
            let mut mus = Vec::new();
            for k in 1..=3u32 {
                mus.push(corrupt(sumset_iterate(a, k)?, opts.fault));
            }
            for k in 1..=3u32 {
                let mu = &mus[k as usize - 1];
                let conv = mu.sum_of_squares();
                let spectral = energy_via_spectrum(a, k);
                let brute = (n.checked_pow(2 * k).is_some_and(|t| t <= BRUTE_FORCE_LIMIT))
                    .then(|| energy_k_bruteforce(a, k));
                let ok = matches!(&spectral, Ok(s) if BigUint::from(*s) == conv)
                    && brute.is_none_or(|b| BigUint::from(b) == conv);
                energy.record(ok, || {
                    format!("{} k={k}: Σμ²={conv} spectral={spectral:?} brute={brute:?}", describe(a))
                });
                chain.record(mu.total() == (n as u128).pow(k), || {
                    format!("{} k={k}: Σμ={} but |A|^k={}", describe(a), mu.total(), (n as u128).pow(k))
                });
                if n > 0 {
                    // |A_k|·E_k ≥ |A|^{2k}.
                    let lhs = BigUint::from(mu.support_len()) * &conv;
                    let rhs = BigUint::from(n).pow(2 * k);
                    sumset_bound.record(lhs >= rhs, || {
                        format!("{} k={k}: |A_k|·E_k = {lhs} < |A|^(2k) = {rhs}", describe(a))
                    });
                }
            }
            let e1 = mus[0].sum_of_squares();
            let e2 = mus[1].sum_of_squares();
            let pair = energy_pair(a, a)?.value;
            low_levels.record(e1 == BigUint::from(n) && e2 == pair, || {
                format!("{}: E_1={e1}, |A|={n}, E_2={e2}, E(A,A)={pair}", describe(a))
            });

            let residue = parseval_check(a)?;
            parseval.record(residue < IDENTITY_TOL, || format!("{}: residue {residue:e}", describe(a)));

            let fast = class_counts(a)?;
            let direct = class_counts_direct(a)?;
            let same = (0..ambient.size()).all(|m| fast.at(m) == direct.at(m));
            transform.record(same, || format!("{}: fast and direct class counts differ", describe(a)));

            for k in 2..=4u32 {
                let whole = k_distance_set(a, k)?;
                for l in 1..k {
                    let left = sumset_iterate(a, l)?.support();
                    let right = sumset_iterate(a, k - l)?.support();
                    let split = distance_set_sum(&left, &right)?;
                    splitting.record(split == whole, || {
                        format!("{} k={k} l={l}: Δ_k={:?} Δ_2(A_l,A_(k-l))={split:?}", describe(a), whole)
                    });
                }
            }

            if a.is_subset(unit.points()) {
                // |x - y| = 2 - 2x·y on the unit sphere, diagonal included.
                let dists = distance_set_diff(a, true);
                let dots = dot_product_set(a);
                norm_dot.record(dists.len() == dots.len(), || {
                    format!("{}: |Δ_2|={} |Π_2|={}", describe(a), dists.len(), dots.len())
                });
            }
        }
    }
    let checks: Vec<CheckResult> = [energy, low_levels, chain, sumset_bound, parseval, transform, norm_dot, splitting]
        .into_iter()
        .map(Tally::finish)
        .collect();
    Ok(VerifySummary {
        passed: checks.iter().all(|c| c.failures == 0),
        fault: opts.fault,
        checks,
    })
}
