//! Sumsets with representation counts, additive energies, and distance sets.
//!
//! Energies are computed in exact integer arithmetic from the representation
//! counts `μ_l(y) = #{(x^1..x^l) ∈ A^l : x^1 + ... + x^l = y}` using
//! `Σ_y μ_l(y) = |A|^l` and `Σ_y μ_l(y)^2 = E_l(A)`.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::ambient::{check_budget, Ambient, PointSet};
use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::gf::Elem;

/// Above this many tuples the brute-force energy cross-check is skipped.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// `μ_l` as a dense array over the rank space.
#[derive(Clone, PartialEq, Eq)]
pub struct RepCount {
    ambient: Ambient,
    level: u32,
    counts: Vec<u64>,
}

impl fmt::Debug for RepCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(
                self.counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(r, c)| (self.ambient.unrank_unchecked(r), c)),
            )
            .finish()
    }
}

impl RepCount {
    pub fn from_counts(ambient: &Ambient, level: u32, counts: Vec<u64>) -> Result<RepCount> {
        if counts.len() != ambient.size() {
            return Err(Error::DimensionMismatch {
                expected: ambient.size(),
                got: counts.len(),
            });
        }
        Ok(RepCount {
            ambient: ambient.clone(),
            level,
            counts,
        })
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, rank: usize) -> u64 {
        self.counts[rank]
    }

    /// Overwrites one count; used to inject faults into identity checks.
    pub fn set(&mut self, rank: usize, value: u64) {
        self.counts[rank] = value;
    }

    /// `A_l`.
    pub fn support(&self) -> PointSet {
        let mut bits = BitSet::new(self.counts.len());
        for (r, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                bits.insert(r);
            }
        }
        PointSet::from_bits(&self.ambient, bits)
    }

    pub fn support_len(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    pub fn sum_of_squares(&self) -> BigUint {
        let mut acc = BigUint::zero();
        let mut chunk: u128 = 0;
        for &c in &self.counts {
            let sq = c as u128 * c as u128;
            match chunk.checked_add(sq) {
                Some(v) => chunk = v,
                None => {
                    acc += chunk;
                    chunk = sq;
                }
            }
        }
        acc + chunk
    }

    /// Additive convolution `(self * other)(y) = Σ_{a+b=y} self(a)·other(b)`.
    pub fn convolve(&self, other: &RepCount) -> Result<RepCount> {
        assert!(self.ambient == other.ambient, "different ambient spaces");
        self.total()
            .checked_mul(other.total())
            .filter(|&t| t <= u64::MAX as u128)
            .ok_or_else(|| Error::Unsupported("representation counts overflow 64 bits".into()))?;
        let right: Vec<(usize, u64)> = other
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(r, &c)| (r, c))
            .collect();
        let mut out = vec![0u64; self.counts.len()];
        for (y, &cy) in self.counts.iter().enumerate() {
            if cy == 0 {
                continue;
            }
            for &(a, ca) in &right {
                out[self.ambient.add_ranks(y, a)] += cy * ca;
            }
        }
        Ok(RepCount {
            ambient: self.ambient.clone(),
            level: self.level + other.level,
            counts: out,
        })
    }
}

pub fn indicator_counts(a: &PointSet) -> RepCount {
    let mut counts = vec![0u64; a.ambient().size()];
    for r in a.ranks() {
        counts[r] = 1;
    }
    RepCount {
        ambient: a.ambient().clone(),
        level: 1,
        counts,
    }
}

/// `μ_l` by repeated exact convolution with the indicator of `A`.
pub fn sumset_iterate(a: &PointSet, level: u32) -> Result<RepCount> {
    if level == 0 {
        return Err(Error::Hypothesis("sumset level must be ≥ 1".into()));
    }
    check_budget(a.ambient().size() as u128)?;
    (a.len() as u64)
        .checked_pow(level)
        .ok_or_else(|| Error::Unsupported(format!("|A|^{level} overflows 64 bits")))?;
    let base = indicator_counts(a);
    let mut mu = base.clone();
    for _ in 1..level {
        mu = mu.convolve(&base)?;
    }
    Ok(mu)
}

/// An exact energy value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct EnergyValue {
    pub value: BigUint,
    pub k: u32,
}

impl EnergyValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.value.to_u64()
    }
}

impl fmt::Display for EnergyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `E(A, B) = #{(a, a', b, b') ∈ A²×B² : a + b = a' + b'}`.
pub fn energy_pair(a: &PointSet, b: &PointSet) -> Result<EnergyValue> {
    let r = indicator_counts(a).convolve(&indicator_counts(b))?;
    Ok(EnergyValue {
        value: r.sum_of_squares(),
        k: 2,
    })
}

/// `E_k(A) = Σ_y μ_k(y)^2`. When `|A|^{2k}` is at most
/// [`BRUTE_FORCE_LIMIT`] the tuple count is recomputed by brute force and
/// any disagreement is an identity violation.
pub fn energy_k(a: &PointSet, k: u32) -> Result<EnergyValue> {
    let mu = sumset_iterate(a, k)?;
    let value = mu.sum_of_squares();
    let tuples = (a.len() as u64).checked_pow(2 * k);
    if matches!(tuples, Some(t) if t <= BRUTE_FORCE_LIMIT) {
        let brute = energy_k_bruteforce(a, k);
        if BigUint::from(brute) != value {
            return Err(Error::IdentityViolation {
                check: format!("E_{k} convolution vs tuple enumeration"),
                witness: format!("A = {:?}: Σμ² = {value}, tuples = {brute}", a.ranks().collect::<Vec<_>>()),
            });
        }
    }
    Ok(EnergyValue { value, k })
}

/// Rank addition, tabulated for small spaces.
struct RankAdder<'a> {
    ambient: &'a Ambient,
    table: Option<Vec<u32>>,
}

impl<'a> RankAdder<'a> {
    fn new(ambient: &'a Ambient) -> Self {
        let n = ambient.size();
        let table = (n <= 4096).then(|| {
            let mut t = vec![0u32; n * n];
            for r in 0..n {
                for s in 0..n {
                    t[r * n + s] = ambient.add_ranks(r, s) as u32;
                }
            }
            t
        });
        RankAdder { ambient, table }
    }

    #[inline]
    fn add(&self, r: usize, s: usize) -> usize {
        match &self.table {
            Some(t) => t[r * self.ambient.size() + s] as usize,
            None => self.ambient.add_ranks(r, s),
        }
    }
}

/// Counts `2k`-tuples of `A` with `x^1+...+x^k = x^{k+1}+...+x^{2k}` by
/// visiting every tuple. Cost `|A|^{2k}`.
pub fn energy_k_bruteforce(a: &PointSet, k: u32) -> u64 {
    let elems: Vec<usize> = a.ranks().collect();
    if elems.is_empty() || k == 0 {
        return 0;
    }
    let adder = RankAdder::new(a.ambient());
    // left sums of every k-tuple, in enumeration order
    fn sums(elems: &[usize], adder: &RankAdder, depth: u32, acc: usize, out: &mut Vec<usize>) {
        if depth == 0 {
            out.push(acc);
            return;
        }
        for &x in elems {
            sums(elems, adder, depth - 1, adder.add(acc, x), out);
        }
    }
    fn right(elems: &[usize], adder: &RankAdder, depth: u32, acc: usize, target: usize) -> u64 {
        if depth == 1 {
            let mut n = 0;
            for &x in elems {
                n += (adder.add(acc, x) == target) as u64;
            }
            return n;
        }
        elems
            .iter()
            .map(|&x| right(elems, adder, depth - 1, adder.add(acc, x), target))
            .sum()
    }
    let mut left = Vec::new();
    sums(&elems, &adder, k, 0, &mut left);
    left.iter().map(|&target| right(&elems, &adder, k, 0, target)).sum()
}

/// A subset of F_q.
#[derive(Clone, PartialEq, Eq)]
pub struct DistanceSet {
    bits: BitSet,
}

impl fmt::Debug for DistanceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.bits.iter()).finish()
    }
}

impl DistanceSet {
    fn new(q: usize) -> DistanceSet {
        DistanceSet { bits: BitSet::new(q) }
    }

    fn insert(&mut self, x: Elem) {
        self.bits.insert(x.index() as usize);
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.bits.contains(x.index() as usize)
    }

    /// Members as field indices, increasing.
    pub fn values(&self) -> Vec<u32> {
        self.bits.iter().map(|v| v as u32).collect()
    }

    /// Whether every nonzero field element is present.
    pub fn covers_units(&self) -> bool {
        (1..self.bits.capacity()).all(|i| self.bits.contains(i))
    }
}

impl Serialize for DistanceSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values().serialize(s)
    }
}

/// `{|y| : y ∈ support}`.
pub fn norm_set(support: &PointSet) -> DistanceSet {
    let ambient = support.ambient();
    let mut out = DistanceSet::new(ambient.q());
    for r in support.ranks() {
        out.insert(ambient.norm_of_rank(r));
    }
    out
}

/// `Δ_k(A) = {|x^1 + ... + x^k| : x^i ∈ A}`.
pub fn k_distance_set(a: &PointSet, k: u32) -> Result<DistanceSet> {
    if k < 2 {
        return Err(Error::Hypothesis("k-distance sets need k ≥ 2".into()));
    }
    Ok(norm_set(&sumset_iterate(a, k)?.support()))
}

/// `Δ_2(A, B) = {|x + y| : x ∈ A, y ∈ B}`.
pub fn distance_set_sum(a: &PointSet, b: &PointSet) -> Result<DistanceSet> {
    assert!(a.ambient() == b.ambient(), "different ambient spaces");
    let ambient = a.ambient();
    let mut sums = PointSet::empty(ambient);
    for x in a.ranks() {
        for y in b.ranks() {
            sums.insert_rank(ambient.add_ranks(x, y));
        }
    }
    Ok(norm_set(&sums))
}

/// `{|x − y| : x, y ∈ A}`, with or without the zero from `x = y`.
pub fn distance_set_diff(a: &PointSet, include_diagonal: bool) -> DistanceSet {
    let ambient = a.ambient();
    let members: Vec<usize> = a.ranks().collect();
    let mut out = DistanceSet::new(ambient.q());
    for &x in &members {
        for &y in &members {
            if x == y && !include_diagonal {
                continue;
            }
            out.insert(ambient.norm_of_rank(ambient.add_ranks(x, ambient.neg_rank(y))));
        }
    }
    out
}

/// `Π_2(A) = {x·y : x, y ∈ A}`.
pub fn dot_product_set(a: &PointSet) -> DistanceSet {
    let ambient = a.ambient();
    let members: Vec<usize> = a.ranks().collect();
    let mut out = DistanceSet::new(ambient.q());
    for &x in &members {
        for &y in &members {
            out.insert(ambient.dot_ranks(x, y));
        }
    }
    out
}

/// The Cauchy–Schwarz lower bound `|A|^{2l} / E_l(A)` on `|A_l|`.
pub fn cardak_bound(a: &PointSet, l: u32) -> Result<BigRational> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let energy = energy_k(a, l)?;
    Ok(cardak_bound_from(a.len(), l, &energy.value))
}

pub(crate) fn cardak_bound_from(size: usize, l: u32, energy: &BigUint) -> BigRational {
    let numer = BigUint::from(size).pow(2 * l);
    BigRational::new(numer.into(), energy.clone().into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use crate::variety::sphere;
    use num_bigint::BigInt;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn amb(q: u64, d: usize) -> Ambient {
        Ambient::new(FieldSpec::from_order(q, None).unwrap(), d).unwrap()
    }

    fn pair(a: &Ambient) -> PointSet {
        PointSet::from_points(a, &[a.point(&[0, 0]).unwrap(), a.point(&[1, 0]).unwrap()])
    }

    fn random_set(a: &Ambient, size: usize, rng: &mut ChaCha8Rng) -> PointSet {
        PointSet::from_ranks(a, sample(rng, a.size(), size)).unwrap()
    }

    #[test]
    fn sumset_examples() {
        let a = amb(3, 2);
        let zero = PointSet::from_ranks(&a, [0]).unwrap();
        let mu = sumset_iterate(&zero, 3).unwrap();
        assert_eq!(mu.get(0), 1);
        assert_eq!(mu.support_len(), 1);

        let mu2 = sumset_iterate(&pair(&a), 2).unwrap();
        let at = |x, y| mu2.get(a.rank(&a.point(&[x, y]).unwrap()));
        assert_eq!((at(0, 0), at(1, 0), at(2, 0)), (1, 2, 1));
        assert_eq!(mu2.support_len(), 3);
        assert_eq!(mu2.total(), 4);
    }

    #[test]
    fn sumset_total_is_power_of_size() {
        let a = amb(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l in 1..=4 {
            let s = random_set(&a, rng.random_range(1..10), &mut rng);
            let mu = sumset_iterate(&s, l).unwrap();
            assert_eq!(mu.total(), (s.len() as u128).pow(l));
        }
    }

    #[test]
    fn energy_examples() {
        let a = amb(3, 2);
        let p = pair(&a);
        assert_eq!(energy_pair(&p, &p).unwrap().to_u64(), Some(6));
        assert_eq!(energy_k_bruteforce(&p, 2), 6);
        let one = PointSet::from_ranks(&a, [4]).unwrap();
        let other = PointSet::from_ranks(&a, [7]).unwrap();
        assert_eq!(energy_pair(&one, &other).unwrap().to_u64(), Some(1));
        // μ_3 = binomial counts 1,3,3,1 on 0, e1, 2e1, 3e1 = 0
        // so μ_3(0) = 1 + 1 = 2: Σμ² = 2² + 3² + 3² = 22 (64 sextuples)
        let sextuples = energy_k_bruteforce(&p, 3);
        assert_eq!(energy_k(&p, 3).unwrap().to_u64(), Some(sextuples));
        assert_eq!(sextuples, 22);
        for k in 1..4 {
            assert_eq!(energy_k(&one, k).unwrap().to_u64(), Some(1));
        }
        assert_eq!(energy_k(&p, 1).unwrap().to_u64(), Some(2));
    }

    #[test]
    fn energy_pair_equals_second_energy() {
        let a = amb(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let s = random_set(&a, rng.random_range(1..12), &mut rng);
            assert_eq!(energy_pair(&s, &s).unwrap().value, energy_k(&s, 2).unwrap().value);
        }
    }

    #[test]
    fn energy_is_translation_invariant_and_monotone() {
        let a = amb(5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let s = random_set(&a, rng.random_range(1..15), &mut rng);
            let t = a.unrank(rng.random_range(0..a.size())).unwrap();
            let bigger = s.union(&random_set(&a, 5, &mut rng));
            for k in 1..=3 {
                let e = energy_k(&s, k).unwrap();
                assert_eq!(e, energy_k(&s.translate(&t), k).unwrap());
                assert!(e.value <= energy_k(&bigger, k).unwrap().value);
                assert!(e.value <= BigUint::from(s.len()).pow(2 * k - 1));
            }
        }
    }

    #[test]
    fn distance_set_examples() {
        let a = amb(3, 2);
        assert_eq!(k_distance_set(&PointSet::from_ranks(&a, [0]).unwrap(), 3).unwrap().values(), vec![0]);

        let s = sphere(&a, Elem::ONE).unwrap();
        let pts: Vec<_> = s.points().points().collect();
        let mut sums = std::collections::BTreeSet::new();
        let mut norms = std::collections::BTreeSet::new();
        for x in &pts {
            for y in &pts {
                let z = a.add(x, y);
                norms.insert(a.norm(&z).index());
                sums.insert(z);
            }
        }
        assert_eq!(sums.len(), 9);
        assert_eq!(sumset_iterate(s.points(), 2).unwrap().support_len(), 9);
        assert_eq!(k_distance_set(s.points(), 2).unwrap().values(), norms.into_iter().collect::<Vec<_>>());
        assert_eq!(k_distance_set(s.points(), 2).unwrap().values(), vec![0, 1, 2]);

        let x = PointSet::from_points(&a, &[a.point(&[1, 0]).unwrap()]);
        let y = PointSet::from_points(&a, &[a.point(&[0, 1]).unwrap()]);
        assert_eq!(distance_set_sum(&x, &y).unwrap().values(), vec![2]);

        let both = x.union(&y);
        assert_eq!(dot_product_set(&both).values(), vec![0, 1]);
        assert_eq!(dot_product_set(&PointSet::from_ranks(&a, [0]).unwrap()).values(), vec![0]);
        assert_eq!(distance_set_diff(&x, true).values(), vec![0]);
        assert!(distance_set_diff(&x, false).is_empty());
        assert!(k_distance_set(&x, 1).is_err());
    }

    #[test]
    fn distance_set_identities_on_random_sets() {
        let a = amb(5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let origin = PointSet::from_ranks(&a, [0]).unwrap();
        for _ in 0..30 {
            let s = random_set(&a, rng.random_range(1..8), &mut rng);
            assert_eq!(distance_set_sum(&s, &origin).unwrap(), norm_set(&s));
            assert_eq!(distance_set_sum(&s, &s).unwrap(), k_distance_set(&s, 2).unwrap());
            assert_eq!(distance_set_diff(&s, true), distance_set_sum(&s, &s.negate()).unwrap());
            for k in 2..=4u32 {
                let whole = k_distance_set(&s, k).unwrap();
                for l in 1..k {
                    let left = sumset_iterate(&s, l).unwrap().support();
                    let right = sumset_iterate(&s, k - l).unwrap().support();
                    assert_eq!(whole, distance_set_sum(&left, &right).unwrap());
                }
            }
        }
    }

    #[test]
    fn unit_circle_subsets_have_equal_distance_and_dot_counts() {
        let a = amb(3, 2);
        let s = sphere(&a, Elem::ONE).unwrap();
        let pts: Vec<usize> = s.points().ranks().collect();
        for mask in 0u32..(1 << pts.len()) {
            let sub = PointSet::from_ranks(&a, pts.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &r)| r)).unwrap();
            assert_eq!(distance_set_diff(&sub, true).len(), dot_product_set(&sub).len());
        }
    }

    #[test]
    fn cardak_examples() {
        let a = amb(3, 2);
        let p = pair(&a);
        let one = cardak_bound(&p, 1).unwrap();
        assert_eq!(one, BigRational::from_integer(BigInt::from(2)));
        let two = cardak_bound(&p, 2).unwrap();
        assert_eq!(two, BigRational::new(BigInt::from(16), BigInt::from(6)));
        assert!(two <= BigRational::from_integer(BigInt::from(3)));
        assert!(matches!(cardak_bound(&PointSet::empty(&a), 2), Err(Error::EmptySet)));
    }

    #[test]
    fn cardak_bound_never_exceeds_sumset_size() {
        let a = amb(5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let s = random_set(&a, rng.random_range(1..10), &mut rng);
            let l = rng.random_range(1..=3);
            let size = sumset_iterate(&s, l).unwrap().support_len();
            assert!(cardak_bound(&s, l).unwrap() <= BigRational::from_integer(BigInt::from(size)));
        }
    }
}
