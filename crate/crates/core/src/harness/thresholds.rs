//! Size thresholds beyond which `Δ_k(A)` is known to be large, as exact
//! rational exponents of `q`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// A size threshold `|A| ≥ C q^{exponent}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// Regular varieties: `(d-1)/2 + 1/(k-1)`, any `k ≥ 3`.
    RegularVariety,
    /// Varieties of dimension `n ≥ (d+1)/2`: `(d+1)/2 - ε`.
    Dimension,
    /// Varieties containing no large affine subspace, `k = 3`.
    AffineK3,
    /// Same, `k = 4`.
    AffineK4,
    /// Spheres of nonzero radius in even dimension, `k ≥ 4`.
    EvenSphere,
    /// Spheres of nonzero radius in even dimension, `k = 3`.
    EvenSphereK3,
    /// Spheres of primitive radius in odd dimension, `k ≥ 4`.
    OddSphere,
    /// Spheres of primitive radius in odd dimension, `k = 3`.
    OddSphereK3,
}

impl ThresholdRule {
    pub const ALL: [ThresholdRule; 8] = [
        ThresholdRule::RegularVariety,
        ThresholdRule::Dimension,
        ThresholdRule::AffineK3,
        ThresholdRule::AffineK4,
        ThresholdRule::EvenSphere,
        ThresholdRule::EvenSphereK3,
        ThresholdRule::OddSphere,
        ThresholdRule::OddSphereK3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdRule::RegularVariety => "regular-variety",
            ThresholdRule::Dimension => "dimension",
            ThresholdRule::AffineK3 => "affine-k3",
            ThresholdRule::AffineK4 => "affine-k4",
            ThresholdRule::EvenSphere => "even-sphere",
            ThresholdRule::EvenSphereK3 => "even-sphere-k3",
            ThresholdRule::OddSphere => "odd-sphere",
            ThresholdRule::OddSphereK3 => "odd-sphere-k3",
        }
    }

    /// Whether the rule needs the affine-subspace exponent `α`.
    pub fn uses_alpha(self) -> bool {
        matches!(self, ThresholdRule::AffineK3 | ThresholdRule::AffineK4)
    }
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ThresholdRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ThresholdRule::ALL.iter().map(|r| r.name()).collect();
                Error::Parse(format!("unknown threshold rule {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Inputs to [`threshold_exponent`]. `beta = None` means the conservative
/// default `4^{-n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremParams {
    pub d: u32,
    /// Dimension of the variety.
    pub n: u32,
    pub k: u32,
    /// `t_V = q^α`.
    pub alpha: BigRational,
    pub c: BigRational,
    pub beta: Option<BigRational>,
    /// Field order, needed only for the `d ≡ 3 (mod 4)` odd-sphere case.
    pub q: Option<u64>,
}

impl TheoremParams {
    pub fn new(d: u32, n: u32, k: u32) -> TheoremParams {
        TheoremParams {
            d,
            n,
            k,
            alpha: BigRational::zero(),
            c: BigRational::one(),
            beta: None,
            q: None,
        }
    }

    pub fn with_alpha(mut self, alpha: BigRational) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_q(mut self, q: u64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_c(mut self, c: BigRational) -> Self {
        self.c = c;
        self
    }

    pub fn with_beta(mut self, beta: BigRational) -> Self {
        self.beta = Some(beta);
        self
    }

    /// `γ = 1/(2^{n+1} - n - 5)`, defined for `n ≥ 2`.
    pub fn gamma(&self) -> Result<BigRational> {
        let denom = (BigInt::one() << (self.n as usize + 1)) - BigInt::from(self.n) - BigInt::from(5);
        if !denom.is_positive() {
            return Err(Error::Hypothesis(format!(
                "γ = 1/(2^(n+1) - n - 5) needs n ≥ 2, got n = {}",
                self.n
            )));
        }
        Ok(BigRational::new(BigInt::one(), denom))
    }

    /// `β` with the default `4^{-n}` filled in.
    pub fn beta(&self) -> BigRational {
        self.beta
            .clone()
            .unwrap_or_else(|| BigRational::new(BigInt::one(), BigInt::one() << (2 * self.n as usize)))
    }

    /// `ε = (d+1)cβ / (2(4+cβ))`.
    pub fn epsilon(&self) -> BigRational {
        let cb = &self.c * self.beta();
        rat(self.d as i64 + 1, 1) * &cb / (rat(2, 1) * (rat(4, 1) + cb))
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn hyp(msg: String) -> Error {
    Error::Hypothesis(msg)
}

fn require_k(rule: ThresholdRule, k: u32, ok: bool, want: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(hyp(format!("{rule} needs {want}, got k = {k}")))
    }
}

fn require_large_dimension(p: &TheoremParams) -> Result<()> {
    if 2 * p.n < p.d + 1 {
        return Err(hyp(format!("variety dimension n = {} must be at least (d+1)/2 = {}/2", p.n, p.d + 1)));
    }
    if p.n > p.d {
        return Err(hyp(format!("variety dimension n = {} exceeds d = {}", p.n, p.d)));
    }
    Ok(())
}

fn require_even_sphere(p: &TheoremParams) -> Result<()> {
    if p.d < 4 || !p.d.is_multiple_of(2) {
        return Err(hyp(format!("even-dimension sphere rules need even d ≥ 4, got d = {}", p.d)));
    }
    Ok(())
}

fn require_odd_sphere(p: &TheoremParams) -> Result<()> {
    match p.d % 4 {
        1 if p.d >= 5 => Ok(()),
        3 => match p.q {
            Some(q) if q % 4 == 1 => Ok(()),
            Some(q) => Err(hyp(format!("d = {} ≡ 3 (mod 4) needs q ≡ 1 (mod 4), got q = {q}", p.d))),
            None => Err(hyp(format!("d = {} ≡ 3 (mod 4) needs q ≡ 1 (mod 4), but q was not given", p.d))),
        },
        _ => Err(hyp(format!(
            "odd-dimension sphere rules need d = 4l+1 with l ≥ 1, or d ≡ 3 (mod 4); got d = {}",
            p.d
        ))),
    }
}

/// The exponent `τ` of the threshold `|A| ≥ C q^τ` for `rule`, in exact
/// rational arithmetic. Parameters outside the rule's hypotheses are
/// rejected with an error naming the failed condition.
pub fn threshold_exponent(rule: ThresholdRule, p: &TheoremParams) -> Result<BigRational> {
    if p.d < 2 {
        return Err(hyp(format!("dimension d must be at least 2, got {}", p.d)));
    }
    let d = p.d as i64;
    let k = p.k as i64;
    match rule {
        ThresholdRule::RegularVariety => {
            require_k(rule, p.k, p.k >= 3, "k ≥ 3")?;
            Ok(rat(d - 1, 2) + rat(1, k - 1))
        }
        ThresholdRule::Dimension => {
            require_k(rule, p.k, p.k >= 3, "k ≥ 3")?;
            require_large_dimension(p)?;
            if !(p.c.is_positive() && p.c <= BigRational::one()) {
                return Err(hyp(format!("c must lie in (0, 1], got {}", p.c)));
            }
            let beta = p.beta();
            let lo = BigRational::new(BigInt::one(), BigInt::one() << (2 * p.n as usize));
            let hi = BigRational::new(BigInt::from(2), BigInt::one() << (p.n as usize));
            if beta < lo || beta > hi {
                return Err(hyp(format!("β = {beta} outside [4^-n, 2^(1-n)] = [{lo}, {hi}]")));
            }
            Ok(rat(d + 1, 2) - p.epsilon())
        }
        ThresholdRule::AffineK3 | ThresholdRule::AffineK4 => {
            let want = if rule == ThresholdRule::AffineK3 { 3 } else { 4 };
            require_k(rule, p.k, p.k == want, &format!("k = {want}"))?;
            require_large_dimension(p)?;
            let top = rat(d + 1, 2);
            if p.alpha.is_negative() || p.alpha > top {
                return Err(hyp(format!("α = {} outside [0, (d+1)/2]", p.alpha)));
            }
            let gamma = p.gamma()?;
            let slack = if rule == ThresholdRule::AffineK3 { rat(2, 1) } else { rat(1, 1) };
            let drop = &gamma * (rat(d + 1, 1) - rat(2, 1) * &p.alpha) / (rat(2, 1) * (slack + &gamma));
            Ok(top - drop)
        }
        ThresholdRule::EvenSphere => {
            require_k(rule, p.k, p.k >= 4, "k ≥ 4")?;
            require_even_sphere(p)?;
            Ok(rat(d - 1, 2) + rat(1, 4 * (k - 2)))
        }
        ThresholdRule::EvenSphereK3 => {
            require_k(rule, p.k, p.k == 3, "k = 3")?;
            require_even_sphere(p)?;
            Ok(rat(d, 2) - rat(1, 4))
        }
        ThresholdRule::OddSphere => {
            require_k(rule, p.k, p.k >= 4, "k ≥ 4")?;
            require_odd_sphere(p)?;
            Ok(rat(d - 1, 2) + rat(1, 4 * k - 6))
        }
        ThresholdRule::OddSphereK3 => {
            require_k(rule, p.k, p.k == 3, "k = 3")?;
            require_odd_sphere(p)?;
            Ok(rat(d, 2) - rat(1, 3))
        }
    }
}
