//! Spheres and polynomial varieties, enumerated exhaustively, plus the
//! largest affine subspace contained in a variety.

use serde::Serialize;

use crate::ambient::{check_budget, Ambient, Point, PointSet};
use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::poly::{Polynomial, Term};

/// Polynomials cutting out a variety, with trusted dimension and degree
/// metadata. Neither is computed: the enumerated size is reported next to
/// `q^declared_dim` so a wrong declaration shows up.
#[derive(Clone, Debug)]
pub struct VarietyDef {
    polys: Vec<Polynomial>,
    declared_dim: usize,
    declared_deg: u32,
}

impl VarietyDef {
    pub fn new(polys: Vec<Polynomial>, declared_dim: usize, declared_deg: u32) -> Result<VarietyDef> {
        let nvars = polys.first().map(Polynomial::nvars);
        if let Some(n) = nvars {
            if let Some(bad) = polys.iter().find(|p| p.nvars() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: bad.nvars(),
                });
            }
            if declared_dim > n {
                return Err(Error::Hypothesis(format!(
                    "declared dimension {declared_dim} exceeds ambient dimension {n}"
                )));
            }
        }
        Ok(VarietyDef {
            polys,
            declared_dim,
            declared_deg,
        })
    }

    /// Metadata defaults for a polynomial system in `d` variables: one
    /// dimension lost per equation and the Bézout product of total degrees.
    pub fn with_default_metadata(polys: Vec<Polynomial>, d: usize) -> Result<VarietyDef> {
        let dim = d.saturating_sub(polys.len());
        let deg = polys.iter().map(|p| p.total_degree().max(1)).product();
        VarietyDef::new(polys, dim, deg)
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn declared_dim(&self) -> usize {
        self.declared_dim
    }

    pub fn declared_deg(&self) -> u32 {
        self.declared_deg
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarietyKind {
    Sphere { radius: Elem },
    Hyperplane,
    Polynomial,
}

/// A variety together with its exact zero set.
#[derive(Clone, Debug)]
pub struct Variety {
    def: VarietyDef,
    kind: VarietyKind,
    points: PointSet,
}

impl Variety {
    pub fn def(&self) -> &VarietyDef {
        &self.def
    }

    pub fn kind(&self) -> &VarietyKind {
        &self.kind
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn ambient(&self) -> &Ambient {
        self.points.ambient()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sphere_radius(&self) -> Option<Elem> {
        match self.kind {
            VarietyKind::Sphere { radius } => Some(radius),
            _ => None,
        }
    }

    /// Spheres of radius zero are cones; distance theorems over spheres
    /// need a nonzero radius.
    pub fn is_degenerate_sphere(&self) -> bool {
        self.sphere_radius() == Some(Elem::ZERO)
    }

    pub fn label(&self) -> String {
        match &self.kind {
            VarietyKind::Sphere { radius } => format!("sphere:{radius}"),
            VarietyKind::Hyperplane => "hyperplane".into(),
            VarietyKind::Polynomial => "poly".into(),
        }
    }
}

/// Exact zero set of every polynomial in `def`.
pub fn enumerate_variety(def: VarietyDef, ambient: &Ambient) -> Result<Variety> {
    enumerate_kind(def, ambient, VarietyKind::Polynomial)
}

fn enumerate_kind(def: VarietyDef, ambient: &Ambient, kind: VarietyKind) -> Result<Variety> {
    check_budget(ambient.size() as u128)?;
    if let Some(p) = def.polys.iter().find(|p| p.nvars() != ambient.d()) {
        return Err(Error::DimensionMismatch {
            expected: ambient.d(),
            got: p.nvars(),
        });
    }
    let field = ambient.field();
    let max_exp = def.polys.iter().map(Polynomial::max_exponent).max().unwrap_or(0) as usize;
    let powers: Vec<Vec<Elem>> = field
        .elements()
        .map(|c| {
            let mut row = Vec::with_capacity(max_exp + 1);
            let mut acc = Elem::ONE;
            for _ in 0..=max_exp {
                row.push(acc);
                acc = field.mul(acc, c);
            }
            row
        })
        .collect();
    let mut points = PointSet::empty(ambient);
    for r in 0..ambient.size() {
        let x = ambient.unrank_unchecked(r);
        if def
            .polys
            .iter()
            .all(|p| p.eval_with(field, &powers, x.coords()) == Elem::ZERO)
        {
            points.insert_rank(r);
        }
    }
    Ok(Variety { def, kind, points })
}

/// `S_j^{d-1} = {x : x_1^2 + ... + x_d^2 = j}`.
pub fn sphere(ambient: &Ambient, radius: Elem) -> Result<Variety> {
    let d = ambient.d();
    let field = ambient.field();
    let mut terms: Vec<Term> = (0..d)
        .map(|i| {
            let mut exps = vec![0; d];
            exps[i] = 2;
            Term {
                coeff: Elem::ONE,
                exps,
            }
        })
        .collect();
    if radius != Elem::ZERO {
        terms.push(Term {
            coeff: field.neg(radius),
            exps: vec![0; d],
        });
    }
    let def = VarietyDef::new(vec![Polynomial::new(d, terms)?], d - 1, 2)?;
    enumerate_kind(def, ambient, VarietyKind::Sphere { radius })
}

/// The coordinate hyperplane `x_1 = 0`.
pub fn hyperplane(ambient: &Ambient) -> Result<Variety> {
    let d = ambient.d();
    let mut exps = vec![0; d];
    exps[0] = 1;
    let poly = Polynomial::new(d, vec![Term { coeff: Elem::ONE, exps }])?;
    let def = VarietyDef::new(vec![poly], d - 1, 1)?;
    enumerate_kind(def, ambient, VarietyKind::Hyperplane)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeProfile {
    pub size: u64,
    /// `q^declared_dim`.
    pub expected: u64,
    pub ratio: f64,
}

pub fn size_profile(v: &Variety) -> SizeProfile {
    let q = v.ambient().q() as u64;
    let expected = q.pow(v.def.declared_dim as u32);
    SizeProfile {
        size: v.len() as u64,
        expected,
        ratio: v.len() as f64 / expected as f64,
    }
}

/// Largest affine subspace found inside a variety.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineSubspaceReport {
    /// `q^dimension`, or 0 for an empty variety.
    pub t_v: u64,
    pub dimension: Option<usize>,
    pub base: Option<Vec<u32>>,
    pub directions: Vec<Vec<u32>>,
    pub searched_dim_cap: usize,
}

impl AffineSubspaceReport {
    /// `α` with `t_V = q^α`; `None` for an empty variety.
    pub fn alpha(&self) -> Option<usize> {
        self.dimension
    }
}

/// Searches flats of dimension `dim_cap` down to 0. Lines inside spheres go
/// through the isotropic-direction search; everything else is generic.
pub fn max_affine_subspace(v: &Variety, dim_cap: usize) -> Result<AffineSubspaceReport> {
    if dim_cap > 2 {
        return Err(Error::Unsupported(format!(
            "affine subspace search is capped at dimension 2, got {dim_cap}"
        )));
    }
    let ambient = v.ambient();
    let mut report = AffineSubspaceReport {
        t_v: 0,
        dimension: None,
        base: None,
        directions: Vec::new(),
        searched_dim_cap: dim_cap,
    };
    if v.is_empty() {
        return Ok(report);
    }
    for m in (0..=dim_cap.min(ambient.d())).rev() {
        let found = if m == 1 && v.sphere_radius().is_some() {
            sphere_lines(v, true).witness
        } else {
            find_flat(v.points(), m)
        };
        if let Some((base, dirs)) = found {
            report.t_v = (ambient.q() as u64).pow(m as u32);
            report.dimension = Some(m);
            report.base = Some(base.indices());
            report.directions = dirs.iter().map(Point::indices).collect();
            return Ok(report);
        }
    }
    unreachable!("a non-empty variety contains a point")
}

/// Calls `visit(pivots, basis)` for every `m`-dimensional linear subspace of
/// F_q^d, each given once by its reduced row-echelon basis. Stops early when
/// `visit` returns `true`.
fn for_each_subspace(ambient: &Ambient, m: usize, mut visit: impl FnMut(&[usize], &[Point]) -> bool) {
    let d = ambient.d();
    let q = ambient.q() as u32;
    let mut pivots: Vec<usize> = (0..m).collect();
    loop {
        // free slots: (row, column) with column > pivot[row] and not a pivot
        let free: Vec<(usize, usize)> = (0..m)
            .flat_map(|row| {
                let piv = &pivots;
                ((piv[row] + 1)..d)
                    .filter(move |c| !piv.contains(c))
                    .map(move |c| (row, c))
            })
            .collect();
        let mut assign = vec![0u32; free.len()];
        loop {
            let basis: Vec<Point> = (0..m)
                .map(|row| {
                    let mut coords = vec![0u32; d];
                    coords[pivots[row]] = 1;
                    for (slot, &(r, c)) in free.iter().enumerate() {
                        if r == row {
                            coords[c] = assign[slot];
                        }
                    }
                    ambient.point(&coords).expect("coordinates are field indices")
                })
                .collect();
            if visit(&pivots, &basis) {
                return;
            }
            if !odometer(&mut assign, q) {
                break;
            }
        }
        // next pivot combination
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if pivots[i] < d - m + i {
                pivots[i] += 1;
                for j in i + 1..m {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Advances a base-`radix` counter; false once it wraps to zero.
fn odometer(digits: &mut [u32], radix: u32) -> bool {
    for dgt in digits.iter_mut() {
        *dgt += 1;
        if *dgt < radix {
            return true;
        }
        *dgt = 0;
    }
    false
}

/// Ranks of all linear combinations of `basis`.
fn span_ranks(ambient: &Ambient, basis: &[Point]) -> Vec<usize> {
    let mut span = vec![0usize];
    let field = ambient.field();
    for b in basis {
        let multiples: Vec<usize> = field.elements().map(|c| ambient.rank(&ambient.scale(c, b))).collect();
        span = span
            .iter()
            .flat_map(|&s| multiples.iter().map(move |&t| (s, t)))
            .map(|(s, t)| ambient.add_ranks(s, t))
            .collect();
    }
    span
}

/// Coset representatives of a subspace with the given pivots: points whose
/// pivot coordinates vanish.
fn coset_reps(ambient: &Ambient, pivots: &[usize]) -> Vec<usize> {
    let d = ambient.d();
    let q = ambient.q();
    let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
    let mut reps = Vec::with_capacity(q.pow(free.len() as u32));
    let mut digits = vec![0u32; free.len()];
    loop {
        let mut coords = vec![0u32; d];
        for (&c, &v) in free.iter().zip(&digits) {
            coords[c] = v;
        }
        reps.push(ambient.rank(&ambient.point(&coords).expect("valid indices")));
        if !odometer(&mut digits, q as u32) {
            break;
        }
    }
    reps
}

fn find_flat(points: &PointSet, m: usize) -> Option<(Point, Vec<Point>)> {
    let ambient = points.ambient();
    if m == 0 {
        return points.points().next().map(|x| (x, Vec::new()));
    }
    let mut found = None;
    for_each_subspace(ambient, m, |pivots, basis| {
        let span = span_ranks(ambient, basis);
        for rep in coset_reps(ambient, pivots) {
            if points.contains_rank(rep) && span.iter().all(|&s| points.contains_rank(ambient.add_ranks(rep, s))) {
                found = Some((ambient.unrank_unchecked(rep), basis.to_vec()));
                return true;
            }
        }
        false
    });
    found
}

/// Number of `m`-flats fully contained in `points`, by exhaustive
/// containment tests over every flat of F_q^d.
pub fn count_flats(points: &PointSet, m: usize) -> u64 {
    let ambient = points.ambient();
    if m == 0 {
        return points.len() as u64;
    }
    let mut count = 0u64;
    for_each_subspace(ambient, m, |pivots, basis| {
        let span = span_ranks(ambient, basis);
        for rep in coset_reps(ambient, pivots) {
            if span.iter().all(|&s| points.contains_rank(ambient.add_ranks(rep, s))) {
                count += 1;
            }
        }
        false
    });
    count
}

#[derive(Clone, Debug)]
pub struct SphereLines {
    pub count: u64,
    pub witness: Option<(Point, Vec<Point>)>,
}

/// Lines inside a sphere. `x + t·v` lies in `S_j` for every `t` exactly when
/// `x ∈ S_j`, `v·v = 0` and `x·v = 0`, so only isotropic directions and
/// base points orthogonal to them are visited; no membership test is run
/// on the rest of the line.
pub fn sphere_lines(v: &Variety, stop_at_first: bool) -> SphereLines {
    assert!(v.sphere_radius().is_some(), "sphere_lines needs a sphere");
    let ambient = v.ambient();
    let mut out = SphereLines {
        count: 0,
        witness: None,
    };
    for_each_subspace(ambient, 1, |pivots, basis| {
        let dir = &basis[0];
        if ambient.norm(dir) != Elem::ZERO {
            return false;
        }
        let dir_rank = ambient.rank(dir);
        for rep in coset_reps(ambient, pivots) {
            if v.points().contains_rank(rep) && ambient.dot_ranks(rep, dir_rank) == Elem::ZERO {
                out.count += 1;
                if out.witness.is_none() {
                    out.witness = Some((ambient.unrank_unchecked(rep), vec![dir.clone()]));
                }
                if stop_at_first {
                    return true;
                }
            }
        }
        false
    });
    out
}
