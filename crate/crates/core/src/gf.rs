//! Arithmetic in F_q for odd prime powers q = p^e.
//!
//! Elements are canonical indices in `[0, q)`: the little-endian base-p
//! digits of an index are the coefficients of a polynomial in `t` reduced
//! modulo a monic irreducible of degree `e`. Index 0 is zero and index 1 is
//! one in every field.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Multiplication and addition tables are built for extension fields up to
/// this order.
const TABLE_LIMIT: u32 = 1 << 10;

/// An element of F_q, stored as its canonical index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub(crate) fn raw(index: u32) -> Elem {
        Elem(index)
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite field of odd characteristic. Immutable after construction.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    add_table: Option<Vec<u32>>,
    mul_table: Option<Vec<u32>>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Dense polynomials over Z_p, little-endian coefficients.

fn trim(poly: &mut Vec<u32>) {
    while poly.last() == Some(&0) {
        poly.pop();
    }
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead_inv = pow_mod(b[db] as u64, (p - 2) as u64, p as u64);
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let factor = (*r.last().unwrap() as u64 * lead_inv) % p as u64;
        for (i, &c) in b.iter().enumerate() {
            let sub = (factor * c as u64) % p as u64;
            let slot = &mut r[shift + i];
            *slot = ((*slot as u64 + p as u64 - sub) % p as u64) as u32;
        }
        trim(&mut r);
    }
    r
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Finds a monic divisor of degree ≤ deg/2 by trial division, if any.
fn find_factor(modulus: &[u32], p: u32) -> Option<Vec<u32>> {
    let deg = modulus.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut rest = low;
            for _ in 0..d {
                cand.push((rest % p as u64) as u32);
                rest /= p as u64;
            }
            cand.push(1);
            if poly_rem(modulus, &cand, p).is_empty() {
                return Some(cand);
            }
        }
    }
    None
}

impl FieldSpec {
    /// The prime field Z_p.
    pub fn prime(p: u32) -> Result<FieldSpec> {
        Self::with_modulus(p, 1, &[0, 1])
    }

    /// F_{p^e} with the smallest monic irreducible modulus, ordering
    /// candidates by the index of their non-leading coefficient vector.
    pub fn new(p: u32, e: u32) -> Result<FieldSpec> {
        if e <= 1 {
            return Self::prime(p);
        }
        check_odd_prime(p)?;
        let count = (p as u64)
            .checked_pow(e)
            .ok_or_else(|| Error::InvalidModulus(format!("{p}^{e} overflows")))?;
        for low in 1..count {
            let mut cand = Vec::with_capacity(e as usize + 1);
            let mut rest = low;
            for _ in 0..e {
                cand.push((rest % p as u64) as u32);
                rest /= p as u64;
            }
            cand.push(1);
            if cand[0] != 0 && find_factor(&cand, p).is_none() {
                return Self::with_modulus(p, e, &cand);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// Resolves `q` into `p^e`. A modulus is required only for `e > 1`; when
    /// it is absent the default from [`FieldSpec::new`] is used.
    pub fn from_order(q: u64, modulus: Option<&[u32]>) -> Result<FieldSpec> {
        let factors = prime_factors(q);
        if factors.len() != 1 || factors[0] == 2 {
            return Err(Error::NotPrimePower(q));
        }
        let p = factors[0];
        let mut e = 0u32;
        let mut rest = q;
        while rest > 1 {
            rest /= p;
            e += 1;
        }
        let p = u32::try_from(p).map_err(|_| Error::NotPrimePower(q))?;
        match modulus {
            Some(m) if e > 1 => Self::with_modulus(p, e, m),
            _ => Self::new(p, e),
        }
    }

    /// Builds F_{p^e} from an explicit little-endian monic modulus of degree
    /// `e`. Irreducibility is verified here.
    pub fn with_modulus(p: u32, e: u32, modulus: &[u32]) -> Result<FieldSpec> {
        check_odd_prime(p)?;
        if e == 0 {
            return Err(Error::InvalidModulus("extension degree must be ≥ 1".into()));
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidModulus(format!("{p}^{e} does not fit in 32 bits")))?
            as u32;
        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            if modulus.len() != e as usize + 1 {
                return Err(Error::InvalidModulus(format!(
                    "expected {} coefficients, got {}",
                    e + 1,
                    modulus.len()
                )));
            }
            if modulus[e as usize] != 1 {
                return Err(Error::InvalidModulus("modulus must be monic".into()));
            }
            if let Some(&c) = modulus.iter().find(|&&c| c >= p) {
                return Err(Error::InvalidModulus(format!("coefficient {c} not in [0, {p})")));
            }
            if let Some(factor) = find_factor(modulus, p) {
                return Err(Error::ReducibleModulus { p, factor });
            }
            modulus.to_vec()
        };
        let mut spec = FieldSpec {
            p,
            e,
            q,
            modulus,
            add_table: None,
            mul_table: None,
        };
        if e > 1 && q <= TABLE_LIMIT {
            let n = q as usize;
            let mut add = vec![0u32; n * n];
            let mut mul = vec![0u32; n * n];
            for a in 0..q {
                for b in 0..q {
                    add[a as usize * n + b as usize] = spec.add_slow(a, b);
                    mul[a as usize * n + b as usize] = spec.mul_slow(a, b);
                }
            }
            spec.add_table = Some(add);
            spec.mul_table = Some(mul);
        }
        Ok(spec)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Little-endian monic modulus; `[0, 1]` for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elem(&self, index: u64) -> Result<Elem> {
        if index < self.q as u64 {
            Ok(Elem(index as u32))
        } else {
            Err(Error::OutOfRange {
                index,
                bound: self.q as u64,
            })
        }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.q).map(Elem)
    }

    /// Base-p digits of an element, least significant first.
    pub fn digits(&self, a: Elem) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.e as usize);
        let mut rest = a.0;
        for _ in 0..self.e {
            out.push(rest % self.p);
            rest /= self.p;
        }
        out
    }

    pub fn from_digits(&self, digits: &[u32]) -> Elem {
        let mut idx = 0u32;
        for &d in digits.iter().rev() {
            idx = idx * self.p + d;
        }
        Elem(idx)
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        let (p, mut a, mut b) = (self.p, a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.e {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        let da = self.digits(Elem(a));
        let db = self.digits(Elem(b));
        let e = self.e as usize;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // t^e = -(m_0 + m_1 t + ... + m_{e-1} t^{e-1})
        for top in (e..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for k in 0..e {
                let m = self.modulus[k] as u64;
                prod[top - e + k] = (prod[top - e + k] + (p - c) * m) % p;
            }
        }
        let digits: Vec<u32> = prod[..e].iter().map(|&c| c as u32).collect();
        self.from_digits(&digits).0
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        if self.e == 1 {
            let s = a.0 as u64 + b.0 as u64;
            return Elem((s % self.p as u64) as u32);
        }
        match &self.add_table {
            Some(t) => Elem(t[a.0 as usize * self.q as usize + b.0 as usize]),
            None => Elem(self.add_slow(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if self.e == 1 {
            return Elem((self.p - a.0) % self.p);
        }
        let digits: Vec<u32> = self
            .digits(a)
            .into_iter()
            .map(|d| (self.p - d) % self.p)
            .collect();
        self.from_digits(&digits)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        if self.e == 1 {
            return Elem(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32);
        }
        match &self.mul_table {
            Some(t) => Elem(t[a.0 as usize * self.q as usize + b.0 as usize]),
            None => Elem(self.mul_slow(a.0, b.0)),
        }
    }

    pub fn pow(&self, a: Elem, mut n: u64) -> Elem {
        let mut acc = Elem::ONE;
        let mut base = a;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == Elem::ZERO {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    pub fn frobenius(&self, a: Elem) -> Elem {
        self.pow(a, self.p as u64)
    }

    /// Absolute trace `a + a^p + ... + a^{p^{e-1}}`, as an integer in `[0, p)`.
    pub fn trace(&self, a: Elem) -> u32 {
        let mut acc = a;
        let mut conj = a;
        for _ in 1..self.e {
            conj = self.frobenius(conj);
            acc = self.add(acc, conj);
        }
        debug_assert!(acc.0 < self.p, "trace must land in the prime subfield");
        acc.0
    }

    pub fn is_square(&self, a: Elem) -> bool {
        a == Elem::ZERO || self.pow(a, (self.q as u64 - 1) / 2) == Elem::ONE
    }

    /// Smallest index generating the multiplicative group.
    pub fn primitive_element(&self) -> Elem {
        let order = self.q as u64 - 1;
        let factors = prime_factors(order);
        (1..self.q)
            .map(Elem)
            .find(|&g| factors.iter().all(|&r| self.pow(g, order / r) != Elem::ONE))
            .expect("F_q^* is cyclic")
    }

    pub fn is_primitive(&self, a: Elem) -> bool {
        if a == Elem::ZERO {
            return false;
        }
        let order = self.q as u64 - 1;
        prime_factors(order)
            .iter()
            .all(|&r| self.pow(a, order / r) != Elem::ONE)
    }
}

fn check_odd_prime(p: u32) -> Result<()> {
    if p == 2 || !is_prime(p as u64) {
        return Err(Error::NotOddPrime(p as u64));
    }
    Ok(())
}
