//! Python bindings. Results that carry many fields come back as plain
//! dictionaries built from the same JSON the command line prints.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use arrsheaf::cech::{default_window, lattice_cohomology_table, CechOptions, CoverKind, Engine, FunctorKind};
use arrsheaf::diagnostics::{diagnostics_report, factorization_check, kunneth_verify, ReportOptions};
use arrsheaf::oracle::{local_cohomology_dims, pd_from_local_cohomology, punctured_cohomology, OracleCover, OracleModule, OracleOptions};
use arrsheaf::{Derivations, Error, FieldSpec, IntersectionLattice};

create_exception!(arrsheaf_py, ArrsheafError, PyException);
create_exception!(arrsheaf_py, CapExceeded, ArrsheafError);
create_exception!(arrsheaf_py, ConsistencyError, ArrsheafError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::CapExceeded(_) => CapExceeded::new_err(e.to_string()),
        Error::Consistency(_) | Error::NotInSubspace(_) => ConsistencyError::new_err(e.to_string()),
        _ => ArrsheafError::new_err(e.to_string()),
    }
}

fn to_dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| ArrsheafError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn bad(msg: String) -> PyErr {
    ArrsheafError::new_err(msg)
}

/// A central essential hyperplane arrangement.
#[pyclass(name = "Arrangement", module = "arrsheaf_py", frozen)]
struct PyArrangement {
    inner: arrsheaf::Arrangement,
}

#[pymethods]
impl PyArrangement {
    /// Parses the text format used by the command line.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        arrsheaf::parse_arrangement(text).map(|inner| Self { inner }).map_err(to_py)
    }

    /// Integer normals, over Q or over F_p when `prime` is given.
    #[staticmethod]
    #[pyo3(signature = (normals, prime=None))]
    fn from_normals(normals: Vec<Vec<i64>>, prime: Option<u64>) -> PyResult<Self> {
        let field = match prime {
            Some(p) => FieldSpec::prime(p).map_err(to_py)?,
            None => FieldSpec::Rationals,
        };
        let ell = normals.first().map_or(0, Vec::len);
        arrsheaf::Arrangement::from_i64(field, ell, &normals).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn catalog(name: &str, params: Vec<usize>) -> PyResult<Self> {
        arrsheaf::catalog(name, &params).map(|inner| Self { inner }).map_err(to_py)
    }

    #[getter]
    fn ell(&self) -> usize {
        self.inner.ell()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.label()
    }

    #[getter]
    fn field(&self) -> String {
        self.inner.field().label()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Arrangement({:?}, ell={}, n={})", self.inner.label(), self.inner.ell(), self.inner.len())
    }

    fn to_text(&self) -> String {
        self.inner.serialize()
    }

    /// Normals as strings, so that rationals and residues survive exactly.
    fn normals(&self) -> Vec<Vec<String>> {
        self.inner.hyperplanes().iter().map(|h| h.normal().iter().map(ToString::to_string).collect()).collect()
    }

    fn lattice(&self) -> Lattice {
        Lattice { inner: IntersectionLattice::build(&self.inner) }
    }

    /// `(lo, hi)` of the default degree window.
    fn default_window(&self) -> (i64, i64) {
        default_window(&self.inner)
    }
}

#[pyclass(module = "arrsheaf_py", frozen)]
struct Lattice {
    inner: IntersectionLattice,
}

#[pymethods]
impl Lattice {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Hyperplane indices containing each flat, in lattice order.
    fn members(&self, x: usize) -> PyResult<Vec<usize>> {
        self.inner.check(x).map_err(to_py)?;
        Ok(self.inner.members(x).to_vec())
    }

    fn codim(&self, x: usize) -> PyResult<usize> {
        self.inner.check(x).map_err(to_py)?;
        Ok(self.inner.codim(x))
    }

    fn mobius(&self, x: usize) -> PyResult<i64> {
        self.inner.check(x).map_err(to_py)?;
        Ok(self.inner.mobius(x))
    }

    /// Coefficients, lowest degree first.
    fn characteristic_polynomial(&self) -> Vec<i64> {
        self.inner.characteristic_polynomial()
    }

    fn rank_counts(&self) -> Vec<usize> {
        self.inner.rank_counts()
    }

    fn lines(&self) -> Vec<usize> {
        self.inner.lines()
    }

    fn summary(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.inner.summary())
    }
}

fn parse_window(a: &arrsheaf::Arrangement, window: Option<(i64, i64)>) -> PyResult<(i64, i64)> {
    let w = window.unwrap_or_else(|| default_window(a));
    if w.0 > w.1 {
        return Err(bad(format!("empty window {}:{}", w.0, w.1)));
    }
    Ok(w)
}

fn cech_options(cover: &str, engine: &str, kmax: usize) -> PyResult<CechOptions> {
    let cover = match cover {
        "minimal" => CoverKind::Minimal,
        "full" => CoverKind::Full,
        other => return Err(bad(format!("unknown cover `{other}`"))),
    };
    Ok(CechOptions { cover, engine: parse_engine(engine)?, k_max: kmax, ..CechOptions::default() })
}

fn oracle_options(cover: &str, engine: &str, kmax: usize) -> PyResult<OracleOptions> {
    let cover = match cover {
        "coords" => OracleCover::Coords,
        "arrangement" => OracleCover::Arrangement,
        other => return Err(bad(format!("unknown cover `{other}`"))),
    };
    Ok(OracleOptions { cover, engine: parse_engine(engine)?, k_max: kmax, ..OracleOptions::default() })
}

fn parse_engine(engine: &str) -> PyResult<Engine> {
    match engine {
        "quotient" => Ok(Engine::Quotient),
        "direct" => Ok(Engine::Direct),
        other => Err(bad(format!("unknown engine `{other}`"))),
    }
}

/// `dim D(A_X)_d` for each `d` in `degrees`; `flat` lists hyperplanes meeting in X.
#[pyfunction]
#[pyo3(signature = (arrangement, degrees, flat=None))]
fn derivation_dims(arrangement: &PyArrangement, degrees: Vec<i64>, flat: Option<Vec<usize>>) -> Vec<usize> {
    let ders = Derivations::new(&arrangement.inner);
    let members = flat.unwrap_or_else(|| (0..arrangement.inner.len()).collect());
    degrees.iter().map(|&d| ders.space(&members, d).dim()).collect()
}

/// A basis of `D(A)_d`, each derivation as its ℓ coefficient polynomials.
#[pyfunction]
fn derivation_basis(arrangement: &PyArrangement, degree: i64) -> Vec<Vec<String>> {
    let ders = Derivations::new(&arrangement.inner);
    let all: Vec<usize> = (0..arrangement.inner.len()).collect();
    let space = ders.space(&all, degree);
    space
        .basis()
        .iter()
        .map(|v| ders.coefficients(v, degree.max(0) as usize).iter().map(ToString::to_string).collect())
        .collect()
}

/// The freeness certificate with the factorization check.
#[pyfunction]
fn freeness(py: Python<'_>, arrangement: &PyArrangement) -> PyResult<Py<PyAny>> {
    #[derive(Serialize)]
    struct Out {
        certificate: arrsheaf::FreenessCertificate,
        factorization: arrsheaf::diagnostics::FactorizationCheck,
    }
    let a = &arrangement.inner;
    let certificate = py.detach(|| Derivations::new(a).freeness_certificate());
    let factorization = factorization_check(&IntersectionLattice::build(a), &certificate);
    to_dict(py, &Out { certificate, factorization })
}

/// `Hⁿ(L₀, F)_d` for `F` = `"D"` or `"O"`.
#[pyfunction]
#[pyo3(signature = (arrangement, functor="D", window=None, cover="minimal", engine="quotient", kmax=8))]
fn cohomology(
    py: Python<'_>,
    arrangement: &PyArrangement,
    functor: &str,
    window: Option<(i64, i64)>,
    cover: &str,
    engine: &str,
    kmax: usize,
) -> PyResult<Py<PyAny>> {
    let a = &arrangement.inner;
    let functor = match functor {
        "D" => FunctorKind::Derivations,
        "O" => FunctorKind::Structure,
        other => return Err(bad(format!("unknown functor `{other}`"))),
    };
    let window = parse_window(a, window)?;
    let options = cech_options(cover, engine, kmax)?;
    let table = py
        .detach(|| {
            let l = IntersectionLattice::build(a);
            lattice_cohomology_table(a, &l, &Derivations::new(a), functor, window, &options)
        })
        .map_err(to_py)?;
    to_dict(py, &table)
}

/// Cohomology on the punctured spectrum, with local cohomology and pd for `"D"`.
#[pyfunction]
#[pyo3(signature = (arrangement, module="D", window=None, cover="coords", engine="quotient", kmax=8))]
fn oracle(
    py: Python<'_>,
    arrangement: &PyArrangement,
    module: &str,
    window: Option<(i64, i64)>,
    cover: &str,
    engine: &str,
    kmax: usize,
) -> PyResult<Py<PyAny>> {
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        punctured: arrsheaf::oracle::PuncturedCohomologyResult,
        local_cohomology: Vec<arrsheaf::oracle::LocalCohomologyCell>,
        projective_dimension: arrsheaf::oracle::PdEstimate,
    }
    let a = &arrangement.inner;
    let module = match module {
        "D" => OracleModule::Derivations,
        "O" => OracleModule::Structure,
        other => return Err(bad(format!("unknown module `{other}`"))),
    };
    let window = parse_window(a, window)?;
    let options = oracle_options(cover, engine, kmax)?;
    let punctured = py
        .detach(|| punctured_cohomology(&Derivations::new(a), &IntersectionLattice::build(a), module, window, &options))
        .map_err(to_py)?;
    let local_cohomology = local_cohomology_dims(&punctured);
    let projective_dimension = pd_from_local_cohomology(punctured.ell, punctured.window, &local_cohomology);
    to_dict(py, &Out { punctured, local_cohomology, projective_dimension })
}

#[pyfunction]
#[pyo3(signature = (arrangement, window=None, cover="coords", kmax=8))]
fn verify_kunneth(py: Python<'_>, arrangement: &PyArrangement, window: Option<(i64, i64)>, cover: &str, kmax: usize) -> PyResult<Py<PyAny>> {
    let a = &arrangement.inner;
    let window = parse_window(a, window)?;
    let oracle = oracle_options(cover, "quotient", kmax)?;
    let report = py
        .detach(|| {
            let l = IntersectionLattice::build(a);
            kunneth_verify(a, &l, &Derivations::new(a), window, &CechOptions::default(), &oracle)
        })
        .map_err(to_py)?;
    to_dict(py, &report)
}

/// The full diagnostics report. Contradictions are listed under `consistency`.
#[pyfunction]
#[pyo3(signature = (arrangement, window=None, cover="coords", kmax=8))]
fn report(py: Python<'_>, arrangement: &PyArrangement, window: Option<(i64, i64)>, cover: &str, kmax: usize) -> PyResult<Py<PyAny>> {
    let a = &arrangement.inner;
    let options = ReportOptions {
        window: parse_window(a, window)?,
        cech: CechOptions { k_max: kmax, ..CechOptions::default() },
        oracle: oracle_options(cover, "quotient", kmax)?,
    };
    let r = py.detach(|| diagnostics_report(a, &options)).map_err(to_py)?;
    to_dict(py, &r)
}

#[pymodule]
fn arrsheaf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ArrsheafError", py.get_type::<ArrsheafError>())?;
    m.add("CapExceeded", py.get_type::<CapExceeded>())?;
    m.add("ConsistencyError", py.get_type::<ConsistencyError>())?;
    m.add_class::<PyArrangement>()?;
    m.add_class::<Lattice>()?;
    m.add_function(wrap_pyfunction!(derivation_dims, m)?)?;
    m.add_function(wrap_pyfunction!(derivation_basis, m)?)?;
    m.add_function(wrap_pyfunction!(freeness, m)?)?;
    m.add_function(wrap_pyfunction!(cohomology, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(verify_kunneth, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
