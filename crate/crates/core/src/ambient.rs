//! Vectors in F_q^d, the quadratic distance form, and dense point sets.
//!
//! Points are ranked little-endian: `rank(x) = Σ x_i · q^i` with each
//! coordinate taken as its field index. Every file format and report uses
//! this order.

use std::fmt;
use std::sync::Arc;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};

/// Default cap on `q^d`; override with `FFDISTLAB_BUDGET`.
pub const DEFAULT_RANK_BUDGET: u64 = 10_000_000;

pub fn rank_budget() -> u64 {
    std::env::var("FFDISTLAB_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_RANK_BUDGET)
}

pub(crate) fn check_budget(requested: u128) -> Result<()> {
    let budget = rank_budget();
    if requested > budget as u128 {
        return Err(Error::Budget { requested, budget });
    }
    Ok(())
}

/// A point of F_q^d.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    coords: Vec<Elem>,
}

impl Point {
    pub fn coords(&self) -> &[Elem] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn indices(&self) -> Vec<u32> {
        self.coords.iter().map(|c| c.index()).collect()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// F_q^d. Cheap to clone; the field is shared.
#[derive(Clone)]
pub struct Ambient {
    field: Arc<FieldSpec>,
    d: usize,
    size: usize,
    place: Vec<usize>,
}

impl fmt::Debug for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.field.q(), self.d)
    }
}

impl PartialEq for Ambient {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && (Arc::ptr_eq(&self.field, &other.field) || self.field == other.field)
    }
}

impl Eq for Ambient {}

impl Ambient {
    pub fn new(field: impl Into<Arc<FieldSpec>>, d: usize) -> Result<Ambient> {
        let field = field.into();
        if d == 0 {
            return Err(Error::Unsupported("dimension must be ≥ 1".into()));
        }
        let size = (field.q() as u128)
            .checked_pow(d as u32)
            .unwrap_or(u128::MAX);
        check_budget(size)?;
        let size = size as usize;
        let mut place = Vec::with_capacity(d);
        let mut acc = 1usize;
        for _ in 0..d {
            place.push(acc);
            acc *= field.q() as usize;
        }
        Ok(Ambient {
            field,
            d,
            size,
            place,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> usize {
        self.field.q() as usize
    }

    /// `q^d`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn point(&self, indices: &[u32]) -> Result<Point> {
        if indices.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: indices.len(),
            });
        }
        let coords = indices
            .iter()
            .map(|&i| self.field.elem(i as u64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Point { coords })
    }

    pub fn origin(&self) -> Point {
        Point {
            coords: vec![Elem::ZERO; self.d],
        }
    }

    pub fn from_elems(&self, coords: Vec<Elem>) -> Point {
        assert_eq!(coords.len(), self.d, "dimension mismatch");
        Point { coords }
    }

    pub fn rank(&self, x: &Point) -> usize {
        assert_eq!(x.dim(), self.d, "dimension mismatch");
        x.coords
            .iter()
            .zip(&self.place)
            .map(|(c, &w)| c.index() as usize * w)
            .sum()
    }

    pub fn unrank(&self, rank: usize) -> Result<Point> {
        if rank >= self.size {
            return Err(Error::OutOfRange {
                index: rank as u64,
                bound: self.size as u64,
            });
        }
        Ok(self.unrank_unchecked(rank))
    }

    pub(crate) fn unrank_unchecked(&self, mut rank: usize) -> Point {
        let q = self.q();
        let coords = (0..self.d)
            .map(|_| {
                let c = Elem::raw((rank % q) as u32);
                rank /= q;
                c
            })
            .collect();
        Point { coords }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.size).map(|r| self.unrank_unchecked(r))
    }

    fn check_pair(&self, x: &Point, y: &Point) {
        assert!(
            x.dim() == self.d && y.dim() == self.d,
            "dimension mismatch: {} vs {} in F_q^{}",
            x.dim(),
            y.dim(),
            self.d
        );
    }

    pub fn dot(&self, x: &Point, y: &Point) -> Elem {
        self.check_pair(x, y);
        let f = &*self.field;
        x.coords
            .iter()
            .zip(&y.coords)
            .fold(Elem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
    }

    /// `x_1^2 + ... + x_d^2`.
    pub fn norm(&self, x: &Point) -> Elem {
        self.dot(x, x)
    }

    /// `|x - y|`.
    pub fn dist_diff(&self, x: &Point, y: &Point) -> Elem {
        self.norm(&self.sub(x, y))
    }

    pub fn add(&self, x: &Point, y: &Point) -> Point {
        self.check_pair(x, y);
        let f = &*self.field;
        Point {
            coords: x.coords.iter().zip(&y.coords).map(|(&a, &b)| f.add(a, b)).collect(),
        }
    }

    pub fn sub(&self, x: &Point, y: &Point) -> Point {
        self.check_pair(x, y);
        let f = &*self.field;
        Point {
            coords: x.coords.iter().zip(&y.coords).map(|(&a, &b)| f.sub(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: Elem, x: &Point) -> Point {
        let f = &*self.field;
        Point {
            coords: x.coords.iter().map(|&a| f.mul(c, a)).collect(),
        }
    }

    /// `rank(unrank(r) + unrank(s))` without materializing points.
    #[inline]
    pub fn add_ranks(&self, mut r: usize, mut s: usize) -> usize {
        let q = self.q();
        let f = &*self.field;
        let mut out = 0;
        for &w in &self.place {
            let c = f.add(Elem::raw((r % q) as u32), Elem::raw((s % q) as u32));
            out += c.index() as usize * w;
            r /= q;
            s /= q;
        }
        out
    }

    #[inline]
    pub fn neg_rank(&self, mut r: usize) -> usize {
        let q = self.q();
        let f = &*self.field;
        let mut out = 0;
        for &w in &self.place {
            out += f.neg(Elem::raw((r % q) as u32)).index() as usize * w;
            r /= q;
        }
        out
    }

    #[inline]
    pub fn norm_of_rank(&self, mut r: usize) -> Elem {
        let q = self.q();
        let f = &*self.field;
        let mut acc = Elem::ZERO;
        for _ in 0..self.d {
            let c = Elem::raw((r % q) as u32);
            acc = f.add(acc, f.mul(c, c));
            r /= q;
        }
        acc
    }

    #[inline]
    pub fn dot_ranks(&self, mut r: usize, mut s: usize) -> Elem {
        let q = self.q();
        let f = &*self.field;
        let mut acc = Elem::ZERO;
        for _ in 0..self.d {
            let a = Elem::raw((r % q) as u32);
            let b = Elem::raw((s % q) as u32);
            acc = f.add(acc, f.mul(a, b));
            r /= q;
            s /= q;
        }
        acc
    }
}

/// A subset of F_q^d as a dense bitset over the rank space.
#[derive(Clone, PartialEq, Eq)]
pub struct PointSet {
    ambient: Ambient,
    bits: BitSet,
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.points()).finish()
    }
}

impl PointSet {
    pub fn empty(ambient: &Ambient) -> PointSet {
        PointSet {
            ambient: ambient.clone(),
            bits: BitSet::new(ambient.size()),
        }
    }

    pub fn full(ambient: &Ambient) -> PointSet {
        PointSet {
            ambient: ambient.clone(),
            bits: BitSet::full(ambient.size()),
        }
    }

    pub fn from_ranks(ambient: &Ambient, ranks: impl IntoIterator<Item = usize>) -> Result<PointSet> {
        let mut set = PointSet::empty(ambient);
        for r in ranks {
            if r >= ambient.size() {
                return Err(Error::OutOfRange {
                    index: r as u64,
                    bound: ambient.size() as u64,
                });
            }
            set.bits.insert(r);
        }
        Ok(set)
    }

    pub fn from_points<'a>(ambient: &Ambient, points: impl IntoIterator<Item = &'a Point>) -> PointSet {
        let mut set = PointSet::empty(ambient);
        for p in points {
            set.bits.insert(ambient.rank(p));
        }
        set
    }

    pub(crate) fn from_bits(ambient: &Ambient, bits: BitSet) -> PointSet {
        debug_assert_eq!(bits.capacity(), ambient.size());
        PointSet {
            ambient: ambient.clone(),
            bits,
        }
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn insert(&mut self, x: &Point) -> bool {
        self.bits.insert(self.ambient.rank(x))
    }

    pub fn insert_rank(&mut self, r: usize) -> bool {
        self.bits.insert(r)
    }

    #[inline]
    pub fn contains_rank(&self, r: usize) -> bool {
        self.bits.contains(r)
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.ambient.d() && self.bits.contains(self.ambient.rank(x))
    }

    /// Member ranks in increasing order.
    pub fn ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.bits.iter().map(|r| self.ambient.unrank_unchecked(r))
    }

    fn same_ambient(&self, other: &PointSet) {
        assert!(self.ambient == other.ambient, "point sets live in different spaces");
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        self.same_ambient(other);
        PointSet::from_bits(&self.ambient, self.bits.union(&other.bits))
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        self.same_ambient(other);
        PointSet::from_bits(&self.ambient, self.bits.intersection(&other.bits))
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        self.same_ambient(other);
        PointSet::from_bits(&self.ambient, self.bits.difference(&other.bits))
    }

    pub fn complement(&self) -> PointSet {
        PointSet::from_bits(&self.ambient, self.bits.complement())
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.ambient == other.ambient && self.bits.is_subset(&other.bits)
    }

    /// `{x + t : x ∈ self}`.
    pub fn translate(&self, t: &Point) -> PointSet {
        let tr = self.ambient.rank(t);
        let mut out = PointSet::empty(&self.ambient);
        for r in self.ranks() {
            out.bits.insert(self.ambient.add_ranks(r, tr));
        }
        out
    }

    /// `{-x : x ∈ self}`.
    pub fn negate(&self) -> PointSet {
        let mut out = PointSet::empty(&self.ambient);
        for r in self.ranks() {
            out.bits.insert(self.ambient.neg_rank(r));
        }
        out
    }
}
