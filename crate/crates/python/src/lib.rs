//! Python bindings. Exact integers come back as Python `int`, exact
//! rationals as `fractions.Fraction`, and structured reports as plain
//! dictionaries.

use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use pyo3::exceptions::{PyArithmeticError, PyMemoryError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyList;

use ffdistlab::combinatorics::{
    cardak_bound, distance_set_diff, dot_product_set, energy_k, k_distance_set, sumset_iterate,
};
use ffdistlab::harness::{
    self, parse_rational, ExperimentConfig, LemmaId, SizeSpec, TheoremParams, ThresholdRule, VarietyChoice,
    VerifyOptions,
};
use ffdistlab::poly::Polynomial;
use ffdistlab::spectral::{energy_via_spectrum, fourier_indicator, regular_audit};
use ffdistlab::variety::{self, enumerate_variety, max_affine_subspace, size_profile, VarietyDef};
use ffdistlab::{Ambient, Error, FieldSpec};

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::IdentityViolation { .. } => PyRuntimeError::new_err(msg),
        Error::Budget { .. } => PyMemoryError::new_err(msg),
        Error::Numerical { .. } => PyArithmeticError::new_err(msg),
        Error::Io(_) => PyOSError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for ffdistlab::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn fraction<'py>(py: Python<'py>, r: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((r.numer().clone(), r.denom().clone()))
}

/// Accepts `int`, `Fraction`, `float` or a string such as `"3/4"`.
fn rational(value: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    parse_rational(&value.str()?.to_cow()?).py_err()
}

fn json_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// `F_q^d` with exact arithmetic. `modulus` lists the coefficients of the
/// extension polynomial from the constant term up.
#[pyclass(name = "Space", module = "ffdistlab_py", frozen)]
struct PySpace {
    ambient: Ambient,
}

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (q, d, modulus=None))]
    fn new(q: u64, d: usize, modulus: Option<Vec<u32>>) -> PyResult<Self> {
        let field = FieldSpec::from_order(q, modulus.as_deref()).py_err()?;
        let ambient = Ambient::new(Arc::new(field), d).py_err()?;
        Ok(PySpace { ambient })
    }

    #[getter]
    fn q(&self) -> usize {
        self.ambient.q()
    }

    #[getter]
    fn d(&self) -> usize {
        self.ambient.d()
    }

    #[getter]
    fn modulus(&self) -> Vec<u32> {
        self.ambient.field().modulus().to_vec()
    }

    fn __len__(&self) -> usize {
        self.ambient.size()
    }

    fn __repr__(&self) -> String {
        format!("Space(q={}, d={})", self.ambient.q(), self.ambient.d())
    }

    /// Points are sequences of field element indices.
    fn point_set(&self, points: Vec<Vec<u32>>) -> PyResult<PyPointSet> {
        let ranks = points
            .iter()
            .map(|p| self.ambient.point(p).map(|x| self.ambient.rank(&x)))
            .collect::<ffdistlab::Result<Vec<_>>>()
            .py_err()?;
        let set = ffdistlab::PointSet::from_ranks(&self.ambient, ranks).py_err()?;
        Ok(PyPointSet { set })
    }

    fn full(&self) -> PyPointSet {
        PyPointSet {
            set: ffdistlab::PointSet::full(&self.ambient),
        }
    }

    /// `{x : x·x = radius}`, radius given as a field element index.
    fn sphere(&self, radius: u64) -> PyResult<PyVariety> {
        let r = self.ambient.field().elem(radius).py_err()?;
        let v = variety::sphere(&self.ambient, r).py_err()?;
        Ok(PyVariety { variety: v })
    }

    fn hyperplane(&self) -> PyResult<PyVariety> {
        let v = variety::hyperplane(&self.ambient).py_err()?;
        Ok(PyVariety { variety: v })
    }

    /// Zero set of a polynomial system in `x1..xd`, one equation per line.
    #[pyo3(signature = (text, declared_dim=None, declared_deg=None))]
    fn variety(&self, text: &str, declared_dim: Option<usize>, declared_deg: Option<u32>) -> PyResult<PyVariety> {
        let (field, d) = (self.ambient.field(), self.ambient.d());
        let polys = Polynomial::parse_many(text, field, d).py_err()?;
        let defaults = VarietyDef::with_default_metadata(polys.clone(), d).py_err()?;
        let def = VarietyDef::new(
            polys,
            declared_dim.unwrap_or(defaults.declared_dim()),
            declared_deg.unwrap_or(defaults.declared_deg()),
        )
        .py_err()?;
        let v = enumerate_variety(def, &self.ambient).py_err()?;
        Ok(PyVariety { variety: v })
    }
}

#[pyclass(name = "PointSet", module = "ffdistlab_py", frozen)]
struct PyPointSet {
    set: ffdistlab::PointSet,
}

#[pymethods]
impl PyPointSet {
    fn __len__(&self) -> usize {
        self.set.len()
    }

    fn __repr__(&self) -> String {
        format!("PointSet(len={})", self.set.len())
    }

    fn points(&self) -> Vec<Vec<u32>> {
        self.set.points().map(|p| p.indices()).collect()
    }

    fn ranks(&self) -> Vec<usize> {
        self.set.ranks().collect()
    }

    /// Exact `E_k(A)` from representation counts.
    #[pyo3(signature = (k=2))]
    fn energy(&self, k: u32) -> PyResult<num_bigint::BigUint> {
        Ok(energy_k(&self.set, k).py_err()?.value)
    }

    /// `E_k(A)` recovered from the Fourier transform of the indicator.
    #[pyo3(signature = (k=2))]
    fn spectral_energy(&self, k: u32) -> PyResult<u64> {
        energy_via_spectrum(&self.set, k).py_err()
    }

    /// `|lA|`.
    fn sumset_size(&self, l: u32) -> PyResult<usize> {
        Ok(sumset_iterate(&self.set, l).py_err()?.support_len())
    }

    /// `|A|^{2l} / E_l(A)`, a lower bound for `|lA|`.
    fn cardak_bound<'py>(&self, py: Python<'py>, l: u32) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &cardak_bound(&self.set, l).py_err()?)
    }

    /// Norms of all sums of `k` points.
    #[pyo3(signature = (k=2))]
    fn distance_set(&self, k: u32) -> PyResult<Vec<u32>> {
        Ok(k_distance_set(&self.set, k).py_err()?.values())
    }

    #[pyo3(signature = (include_diagonal=true))]
    fn difference_distances(&self, include_diagonal: bool) -> Vec<u32> {
        distance_set_diff(&self.set, include_diagonal).values()
    }

    fn dot_products(&self) -> Vec<u32> {
        dot_product_set(&self.set).values()
    }

    /// `max_{m≠0} |1̂_A(m)|`.
    fn max_fourier_coefficient(&self) -> PyResult<f64> {
        Ok(fourier_indicator(&self.set).py_err()?.max_nonzero_abs())
    }
}

#[pyclass(name = "Variety", module = "ffdistlab_py", frozen)]
struct PyVariety {
    variety: variety::Variety,
}

#[pymethods]
impl PyVariety {
    fn __len__(&self) -> usize {
        self.variety.len()
    }

    fn __repr__(&self) -> String {
        format!("Variety({}, len={})", self.variety.label(), self.variety.len())
    }

    #[getter]
    fn label(&self) -> String {
        self.variety.label()
    }

    #[getter]
    fn declared_dim(&self) -> usize {
        self.variety.def().declared_dim()
    }

    #[getter]
    fn declared_deg(&self) -> u32 {
        self.variety.def().declared_deg()
    }

    fn points(&self) -> PyPointSet {
        PyPointSet {
            set: self.variety.points().clone(),
        }
    }

    /// Size ratio and Fourier decay constant.
    fn audit<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_dict(py, &regular_audit(&self.variety).py_err()?)
    }

    fn size_profile<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_dict(py, &size_profile(&self.variety))
    }

    #[pyo3(signature = (dim_cap=2))]
    fn max_affine_subspace<'py>(&self, py: Python<'py>, dim_cap: usize) -> PyResult<Bound<'py, PyAny>> {
        let cap = dim_cap.min(self.variety.ambient().d());
        json_dict(py, &max_affine_subspace(&self.variety, cap).py_err()?)
    }
}

/// Exact threshold exponent for a named rule.
#[pyfunction]
#[pyo3(signature = (rule, d, n=None, k=3, alpha=None, c=None, beta=None, q=None))]
#[allow(clippy::too_many_arguments)]
fn threshold_exponent<'py>(
    py: Python<'py>,
    rule: &str,
    d: u32,
    n: Option<u32>,
    k: u32,
    alpha: Option<Bound<'py, PyAny>>,
    c: Option<Bound<'py, PyAny>>,
    beta: Option<Bound<'py, PyAny>>,
    q: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let rule = ThresholdRule::from_str(rule).py_err()?;
    let mut params = TheoremParams::new(d, n.unwrap_or(d.saturating_sub(1)), k);
    if let Some(a) = alpha {
        params = params.with_alpha(rational(&a)?);
    }
    if let Some(c) = c {
        params = params.with_c(rational(&c)?);
    }
    if let Some(b) = beta {
        params = params.with_beta(rational(&b)?);
    }
    if let Some(q) = q {
        params = params.with_q(q);
    }
    fraction(py, &harness::threshold_exponent(rule, &params).py_err()?)
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    q: u64,
    d: usize,
    variety: &str,
    k: u32,
    samples: usize,
    sizes: Option<&str>,
    seed: u64,
    modulus: Option<Vec<u32>>,
) -> PyResult<harness::Experiment> {
    let mut cfg = ExperimentConfig::new(q, d, VarietyChoice::parse(variety).py_err()?)
        .with_k(k)
        .with_samples(samples)
        .with_seed(seed);
    if let Some(s) = sizes {
        cfg = cfg.with_sizes(SizeSpec::from_str(s).py_err()?);
    }
    cfg.ext_modulus = modulus;
    cfg.build().py_err()
}

/// Samples subsets of a variety and reports how tight an energy bound is.
#[pyfunction]
#[pyo3(signature = (lemma, q, d, variety="sphere:1", k=3, samples=20, sizes=None, seed=1, modulus=None))]
#[allow(clippy::too_many_arguments)]
fn audit_lemma<'py>(
    py: Python<'py>,
    lemma: &str,
    q: u64,
    d: usize,
    variety: &str,
    k: u32,
    samples: usize,
    sizes: Option<&str>,
    seed: u64,
    modulus: Option<Vec<u32>>,
) -> PyResult<Bound<'py, PyAny>> {
    let lemma = LemmaId::from_str(lemma).py_err()?;
    let exp = experiment(q, d, variety, k, samples, sizes, seed, modulus)?;
    let report = py.detach(|| harness::audit_lemma(lemma, &exp)).py_err()?;
    json_dict(py, &report)
}

/// Distance-set sizes of random subsets across a range of sizes.
#[pyfunction]
#[pyo3(signature = (rule, q, d, variety="sphere:1", k=3, samples=20, sizes=None, seed=1, modulus=None))]
#[allow(clippy::too_many_arguments)]
fn scan<'py>(
    py: Python<'py>,
    rule: &str,
    q: u64,
    d: usize,
    variety: &str,
    k: u32,
    samples: usize,
    sizes: Option<&str>,
    seed: u64,
    modulus: Option<Vec<u32>>,
) -> PyResult<Bound<'py, PyAny>> {
    let rule = ThresholdRule::from_str(rule).py_err()?;
    let exp = experiment(q, d, variety, k, samples, sizes, seed, modulus)?;
    let report = py.detach(|| harness::scan_thresholds(&exp, rule)).py_err()?;
    json_dict(py, &report)
}

/// Cross-checks the exact kernels against each other. Failures are reported
/// in the returned summary rather than raised.
#[pyfunction]
#[pyo3(signature = (cases=None, sets=25, seed=1))]
fn verify<'py>(
    py: Python<'py>,
    cases: Option<Vec<(u64, usize)>>,
    sets: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut opts = VerifyOptions {
        random_sets: sets,
        seed,
        ..VerifyOptions::default()
    };
    if let Some(c) = cases {
        opts.cases = c;
    }
    let summary = py.detach(|| harness::verify_identities(&opts)).py_err()?;
    json_dict(py, &summary)
}

#[pymodule]
pub fn ffdistlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PyPointSet>()?;
    m.add_class::<PyVariety>()?;
    m.add_function(wrap_pyfunction!(threshold_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(audit_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("RULES", PyList::new(m.py(), ThresholdRule::ALL.iter().map(|r| r.name()))?)?;
    Ok(())
}
