//! Additive characters and the Fourier transform of indicator functions on
//! (F_q^d, +), normalized as
//!
//! ```text
//! 1̂_S(m) = q^{-d} Σ_x χ(-m·x) 1_S(x),    χ(x) = exp(2πi·Tr(x)/p).
//! ```
//!
//! Character sums are first reduced to integer class counts
//! `c_r(m) = #{x ∈ S : Tr(m·x) = r}`; floating point enters only when those
//! counts are combined with the p-th roots of unity.
//!
//! The rank space of F_q^d is exactly Z_p^{de} in little-endian base-p
//! digits, so the fast path is a digit-by-digit transform over Z_p^{de}
//! carried out in the group ring Z[C_p], where multiplying by a character
//! value is a cyclic rotation of an integer vector.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::{check_budget, Ambient, PointSet};
use crate::combinatorics::RepCount;
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};
use crate::variety::Variety;

/// Relative tolerance for Parseval and transform-agreement identities.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Relative tolerance for rounding a spectral sum to an integer.
pub const ROUNDING_TOL: f64 = 1e-6;

/// Past this magnitude an f64 cannot certify the nearest integer.
const MAX_EXACT_F64: f64 = 9_007_199_254_740_992.0; // 2^53

/// The canonical additive character `x ↦ exp(2πi·Tr(x)/p)`.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    p: u32,
    exponents: Vec<u32>,
    roots: Vec<Complex64>,
}

impl CharacterTable {
    pub fn new(field: &FieldSpec) -> CharacterTable {
        let p = field.p();
        CharacterTable {
            p,
            exponents: field.elements().map(|a| field.trace(a)).collect(),
            roots: (0..p)
                .map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / p as f64))
                .collect(),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `Tr(x)` as an integer in `[0, p)`.
    #[inline]
    pub fn exponent(&self, x: Elem) -> u32 {
        self.exponents[x.index() as usize]
    }

    pub fn chi(&self, x: Elem) -> Complex64 {
        self.roots[self.exponent(x) as usize]
    }

    /// `exp(2πi·r/p)`.
    pub fn root(&self, r: u32) -> Complex64 {
        self.roots[(r % self.p) as usize]
    }
}

/// Integer class counts `c_r(m)` for every frequency `m`, stored row-major
/// (`p` counters per frequency rank).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    ambient: Ambient,
    p: usize,
    counts: Vec<u32>,
}

impl ClassCounts {
    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    /// `[c_0(m), ..., c_{p-1}(m)]`.
    pub fn at(&self, m: usize) -> &[u32] {
        &self.counts[m * self.p..(m + 1) * self.p]
    }

    /// `Σ_x χ(-m·x) 1_S(x)` without the `q^{-d}` factor.
    pub fn character_sum(&self, m: usize, chars: &CharacterTable) -> Complex64 {
        self.at(m)
            .iter()
            .enumerate()
            .map(|(r, &c)| chars.root(chars.p() - r as u32).scale(c as f64))
            .sum()
    }

    /// `|Σ_x χ(-m·x) 1_S(x)|^2` via the exact autocorrelation of the class
    /// counts: `Σ_δ (Σ_r c_r c_{r+δ}) cos(2πδ/p)`.
    pub fn squared_modulus(&self, m: usize, cosines: &[f64]) -> f64 {
        let c = self.at(m);
        let p = self.p;
        let mut total = 0.0;
        for (delta, &cos) in cosines.iter().enumerate() {
            let auto: u64 = (0..p).map(|r| c[r] as u64 * c[(r + delta) % p] as u64).sum();
            total += auto as f64 * cos;
        }
        total.max(0.0)
    }

    pub fn to_spectrum(&self, chars: &CharacterTable) -> Spectrum {
        let scale = 1.0 / self.ambient.size() as f64;
        let values = (0..self.ambient.size())
            .map(|m| self.character_sum(m, chars).scale(scale))
            .collect();
        Spectrum {
            ambient: self.ambient.clone(),
            values,
        }
    }
}

/// Fourier coefficients `1̂_S(m)`, indexed by `rank(m)`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    ambient: Ambient,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, m: usize) -> Complex64 {
        self.values[m]
    }

    /// `max_{m ≠ 0} |1̂_S(m)|`, or 0 when the space has one point.
    pub fn max_nonzero_abs(&self) -> f64 {
        self.values[1..].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn parseval_sum(&self) -> f64 {
        neumaier_sum(self.values.iter().map(|v| v.norm_sqr()))
    }
}

/// For each coordinate value `m_i`, the digits `Tr(m_i · t^b)` packed as a
/// field index: the linear form `x ↦ Tr(m_i x_i)` written in the digit basis.
fn dual_digit_table(field: &FieldSpec) -> Vec<usize> {
    let p = field.p() as usize;
    let basis: Vec<Elem> = (0..field.e())
        .map(|b| field.elem((p as u64).pow(b)).expect("basis index"))
        .collect();
    field
        .elements()
        .map(|m| {
            basis
                .iter()
                .rev()
                .fold(0usize, |acc, &tb| acc * p + field.trace(field.mul(m, tb)) as usize)
        })
        .collect()
}

/// Rank of the digit vector `u` with `u·x ≡ Tr(m·x) (mod p)` for all `x`.
fn dual_ranks(ambient: &Ambient) -> Vec<usize> {
    let table = dual_digit_table(ambient.field());
    let q = ambient.q();
    (0..ambient.size())
        .map(|mut m| {
            let mut out = 0;
            let mut place = 1;
            for _ in 0..ambient.d() {
                out += table[m % q] * place;
                m /= q;
                place *= q;
            }
            out
        })
        .collect()
}

/// Class counts by the digit-wise group-ring transform, O(q^d · de · p^2).
pub fn class_counts(s: &PointSet) -> Result<ClassCounts> {
    let ambient = s.ambient();
    check_budget(ambient.size() as u128)?;
    let p = ambient.field().p() as usize;
    let n = ambient.size();
    let mut data = vec![0u32; n * p];
    for r in s.ranks() {
        data[r * p] = 1;
    }
    let axes = ambient.d() * ambient.field().e() as usize;
    let mut stride = 1usize;
    for _ in 0..axes {
        let block = stride * p * p; // u32s per block of `stride` interleaved groups
        data.par_chunks_mut(block).for_each(|chunk| {
            let mut out = vec![0u32; p * p];
            for offset in 0..stride {
                out.iter_mut().for_each(|v| *v = 0);
                for x in 0..p {
                    let src = &chunk[(offset + x * stride) * p..(offset + x * stride + 1) * p];
                    if src.iter().all(|&v| v == 0) {
                        continue;
                    }
                    for u in 0..p {
                        let shift = (u * x) % p;
                        let dst = &mut out[u * p..(u + 1) * p];
                        for r in 0..p {
                            dst[(r + shift) % p] += src[r];
                        }
                    }
                }
                for u in 0..p {
                    chunk[(offset + u * stride) * p..(offset + u * stride + 1) * p]
                        .copy_from_slice(&out[u * p..(u + 1) * p]);
                }
            }
        });
        stride *= p;
    }
    // data is indexed by the digit vector u; reindex to frequencies m.
    let dual = dual_ranks(ambient);
    let mut counts = vec![0u32; n * p];
    for (m, &u) in dual.iter().enumerate() {
        counts[m * p..(m + 1) * p].copy_from_slice(&data[u * p..(u + 1) * p]);
    }
    Ok(ClassCounts {
        ambient: ambient.clone(),
        p,
        counts,
    })
}

/// Class counts by direct summation over all `(m, x)` pairs,
/// O(q^d · |S| · d). Independent of the digit transform.
pub fn class_counts_direct(s: &PointSet) -> Result<ClassCounts> {
    let ambient = s.ambient();
    check_budget(ambient.size() as u128)?;
    let chars = CharacterTable::new(ambient.field());
    let p = chars.p() as usize;
    let members: Vec<usize> = s.ranks().collect();
    let mut counts = vec![0u32; ambient.size() * p];
    counts.par_chunks_mut(p).enumerate().for_each(|(m, row)| {
        for &x in &members {
            row[chars.exponent(ambient.dot_ranks(m, x)) as usize] += 1;
        }
    });
    Ok(ClassCounts {
        ambient: ambient.clone(),
        p,
        counts,
    })
}

pub fn fourier_indicator(s: &PointSet) -> Result<Spectrum> {
    let chars = CharacterTable::new(s.ambient().field());
    Ok(class_counts(s)?.to_spectrum(&chars))
}

/// The O(q^{2d}) reference transform.
pub fn fourier_indicator_direct(s: &PointSet) -> Result<Spectrum> {
    let chars = CharacterTable::new(s.ambient().field());
    Ok(class_counts_direct(s)?.to_spectrum(&chars))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularAudit {
    /// `|V| / q^{d-1}`.
    pub size_ratio: f64,
    /// `max_{m≠0} |1̂_V(m)|`.
    pub max_coefficient: f64,
    /// `q^{(d+1)/2} · max_{m≠0} |1̂_V(m)|`.
    pub decay_constant: f64,
}

/// Reports the size ratio and Fourier decay constant of a variety. No
/// verdict is drawn; callers compare against their own thresholds.
pub fn regular_audit(v: &Variety) -> Result<RegularAudit> {
    let ambient = v.ambient();
    let q = ambient.q() as f64;
    let d = ambient.d() as f64;
    let size_ratio = v.len() as f64 / q.powi(ambient.d() as i32 - 1);
    if v.is_empty() {
        return Ok(RegularAudit {
            size_ratio,
            max_coefficient: 0.0,
            decay_constant: 0.0,
        });
    }
    let max_coefficient = fourier_indicator(v.points())?.max_nonzero_abs();
    Ok(RegularAudit {
        size_ratio,
        max_coefficient,
        decay_constant: q.powf((d + 1.0) / 2.0) * max_coefficient,
    })
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn round_certified(value: f64) -> Result<u64> {
    let nearest = value.round();
    let residue = (value - nearest).abs();
    if !value.is_finite()
        || !(-0.5..MAX_EXACT_F64).contains(&value)
        || residue > ROUNDING_TOL * value.abs().max(1.0)
        || residue > 0.25
    {
        return Err(Error::Numerical { value, residue });
    }
    Ok(nearest.max(0.0) as u64)
}

/// `E_k(A) = q^{(2k-1)d} Σ_m |1̂_A(m)|^{2k}`, rounded to the nearest integer
/// only when the sum lies within tolerance of one.
pub fn energy_via_spectrum(a: &PointSet, k: u32) -> Result<u64> {
    if k == 0 {
        return Err(Error::Hypothesis("energy level k must be ≥ 1".into()));
    }
    let counts = class_counts(a)?;
    let p = counts.p;
    let cosines: Vec<f64> = (0..p).map(|delta| (2.0 * PI * delta as f64 / p as f64).cos()).collect();
    let n = a.ambient().size();
    let total = neumaier_sum((0..n).map(|m| counts.squared_modulus(m, &cosines).powi(k as i32)));
    round_certified(total / n as f64)
}

/// Relative Parseval residue `|Σ_m |1̂_S(m)|^2 − |S|/q^d| / (|S|/q^d)`
/// (absolute when S is empty).
pub fn parseval_check(s: &PointSet) -> Result<f64> {
    let spectrum = fourier_indicator(s)?;
    let expected = s.len() as f64 / s.ambient().size() as f64;
    let residue = (spectrum.parseval_sum() - expected).abs();
    Ok(if expected > 0.0 { residue / expected } else { residue })
}

/// In-place transform over Z_p^{de}: `out(u) = Σ_x in(x) exp(sign·2πi·u·x/p)`.
fn complex_digit_transform(data: &mut [Complex64], p: usize, axes: usize, sign: f64) {
    let roots: Vec<Complex64> = (0..p)
        .map(|r| Complex64::from_polar(1.0, sign * 2.0 * PI * r as f64 / p as f64))
        .collect();
    let mut stride = 1usize;
    for _ in 0..axes {
        let block = stride * p;
        data.par_chunks_mut(block).for_each(|chunk| {
            let mut tmp = vec![Complex64::new(0.0, 0.0); p];
            for offset in 0..stride {
                for (u, slot) in tmp.iter_mut().enumerate() {
                    *slot = (0..p).map(|x| chunk[offset + x * stride] * roots[(u * x) % p]).sum();
                }
                for (u, v) in tmp.iter().enumerate() {
                    chunk[offset + u * stride] = *v;
                }
            }
        });
        stride *= p;
    }
}

/// `μ_l` recovered from `F(m)^l` by the inverse transform, each count
/// rounded under the same certification as [`energy_via_spectrum`].
pub fn sumset_via_spectrum(a: &PointSet, level: u32) -> Result<RepCount> {
    if level == 0 {
        return Err(Error::Hypothesis("sumset level must be ≥ 1".into()));
    }
    let ambient = a.ambient();
    let chars = CharacterTable::new(ambient.field());
    let counts = class_counts(a)?;
    let n = ambient.size();
    let p = chars.p() as usize;
    // μ_l(y) = q^{-d} Σ_m F(m)^l χ(m·y); with u = dual(m), χ(m·y) = ω^{u·y}.
    let dual = dual_ranks(ambient);
    let mut data = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..n {
        data[dual[m]] = counts.character_sum(m, &chars).powu(level);
    }
    complex_digit_transform(&mut data, p, ambient.d() * ambient.field().e() as usize, 1.0);
    let values = data
        .iter()
        .map(|v| {
            if v.im.abs() > 0.25 * n as f64 {
                return Err(Error::Numerical {
                    value: v.im,
                    residue: v.im.abs(),
                });
            }
            round_certified(v.re / n as f64)
        })
        .collect::<Result<Vec<u64>>>()?;
    RepCount::from_counts(ambient, level, values)
}
