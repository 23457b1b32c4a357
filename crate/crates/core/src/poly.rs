//! Sparse multivariate polynomials over F_q and their text format.
//!
//! One polynomial per line. Terms are separated by `+` (a `-` before a term
//! is accepted as shorthand for `+ -1*`); each term is a `*`-product of
//! integer coefficients and variables `x1..xd`, optionally raised to a power
//! with `^`. Integer coefficients are reduced mod p. Whitespace is ignored,
//! as are blank lines and lines starting with `#`.
//!
//! ```text
//! x1^2 + x2^2 + 2      # the unit circle over F_3
//! 3*x1*x2^2 + -1
//! ```

use std::fmt;

use crate::ambient::Point;
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Elem,
    /// One exponent per variable, stored as given (no `x^q = x` reduction).
    pub exps: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new(nvars: usize, terms: Vec<Term>) -> Result<Polynomial> {
        if let Some(t) = terms.iter().find(|t| t.exps.len() != nvars) {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                got: t.exps.len(),
            });
        }
        Ok(Polynomial { nvars, terms })
    }

    pub fn constant(nvars: usize, c: Elem) -> Polynomial {
        Polynomial {
            nvars,
            terms: vec![Term {
                coeff: c,
                exps: vec![0; nvars],
            }],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.coeff != Elem::ZERO)
            .map(|t| t.exps.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn max_exponent(&self) -> u32 {
        self.terms
            .iter()
            .flat_map(|t| t.exps.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, field: &FieldSpec, x: &Point) -> Elem {
        assert_eq!(x.dim(), self.nvars, "dimension mismatch");
        self.terms.iter().fold(Elem::ZERO, |acc, t| {
            let mono = t
                .exps
                .iter()
                .zip(x.coords())
                .fold(t.coeff, |m, (&e, &c)| field.mul(m, field.pow(c, e as u64)));
            field.add(acc, mono)
        })
    }

    /// Evaluation with a precomputed power table `powers[c][e] = c^e`.
    pub(crate) fn eval_with(&self, field: &FieldSpec, powers: &[Vec<Elem>], x: &[Elem]) -> Elem {
        self.terms.iter().fold(Elem::ZERO, |acc, t| {
            let mono = t
                .exps
                .iter()
                .zip(x)
                .fold(t.coeff, |m, (&e, c)| field.mul(m, powers[c.index() as usize][e as usize]));
            field.add(acc, mono)
        })
    }

    /// Parses one polynomial in `nvars` variables.
    pub fn parse(text: &str, field: &FieldSpec, nvars: usize) -> Result<Polynomial> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut normalized = String::with_capacity(compact.len() + 8);
        let mut prev: Option<char> = None;
        for ch in compact.chars() {
            if ch == '-' && !matches!(prev, None | Some('+') | Some('*') | Some('^')) {
                normalized.push('+');
            }
            normalized.push(ch);
            prev = Some(ch);
        }
        let mut terms = Vec::new();
        for piece in normalized.split('+') {
            if piece.is_empty() {
                if terms.is_empty() && normalized.starts_with('+') {
                    continue;
                }
                return Err(Error::Parse(format!("empty term in {text:?}")));
            }
            terms.push(parse_term(piece, field, nvars)?);
        }
        Ok(Polynomial { nvars, terms })
    }

    /// Parses a whole polynomial file.
    pub fn parse_many(text: &str, field: &FieldSpec, nvars: usize) -> Result<Vec<Polynomial>> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let body = l.split('#').next().unwrap_or("");
                Polynomial::parse(body, field, nvars)
            })
            .collect()
    }
}

fn parse_term(piece: &str, field: &FieldSpec, nvars: usize) -> Result<Term> {
    let (negate, body) = match piece.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, piece),
    };
    let mut coeff: i64 = if negate { -1 } else { 1 };
    let mut exps = vec![0u32; nvars];
    let p = field.p() as i64;
    for factor in body.split('*') {
        if factor.is_empty() {
            return Err(Error::Parse(format!("empty factor in {piece:?}")));
        }
        if let Some(var) = factor.strip_prefix('x') {
            let (idx, pow) = match var.split_once('^') {
                Some((i, e)) => (i, e),
                None => (var, "1"),
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad variable {factor:?}")))?;
            if idx == 0 || idx > nvars {
                return Err(Error::Parse(format!(
                    "variable x{idx} outside x1..x{nvars}"
                )));
            }
            let pow: u32 = pow
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?;
            exps[idx - 1] += pow;
        } else {
            let c: i64 = factor
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {factor:?}")))?;
            coeff = (coeff * c.rem_euclid(p)).rem_euclid(p);
        }
    }
    Ok(Term {
        coeff: field.from_int(coeff),
        exps,
    })
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.coeff.index())?;
            for (v, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, e)?,
                }
            }
        }
        Ok(())
    }
}
