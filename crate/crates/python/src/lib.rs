//! Python bindings.
//!
//! Vectors cross the boundary as lists of Python ints, matrices as lists of
//! rows. Every class converts to and from the canonical JSON of the library.

use num::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lf::blowup::{self, BlowupModel};
use lf::flatten::{self as fl, FlattenOptions, FlatteningCertificate};
use lf::homs::{self, IntegralityOptions, IntegralityVerdict};
use lf::ideals::{self, MonoidIdeal};
use lf::json::{canonical_json, parse_artifact};
use lf::lattice::{IntMatrix, IntVector};
use lf::monoids::{self, FineMonoid};
use lf::polyhedra::{self, Cone as LfCone, Fan as LfFan};

fn err(e: lf::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vec_in(v: Vec<BigInt>) -> IntVector {
    IntVector::new(v)
}

fn vecs_in(vs: Vec<Vec<BigInt>>) -> Vec<IntVector> {
    vs.into_iter().map(IntVector::new).collect()
}

fn vec_out(v: &IntVector) -> Vec<BigInt> {
    v.coords().to_vec()
}

fn vecs_out(vs: &[IntVector]) -> Vec<Vec<BigInt>> {
    vs.iter().map(vec_out).collect()
}

/// Rank from an explicit argument or the first vector.
fn rank_of(rank: Option<usize>, vs: &[Vec<BigInt>]) -> PyResult<usize> {
    rank.or_else(|| vs.first().map(Vec::len))
        .ok_or_else(|| PyValueError::new_err("rank is required when no vectors are given"))
}

fn matrix_in(rows: Vec<Vec<BigInt>>, cols: usize) -> PyResult<IntMatrix> {
    let r = rows.len();
    if rows.iter().any(|row| row.len() != cols) {
        return Err(PyValueError::new_err(format!("every matrix row needs {cols} entries")));
    }
    IntMatrix::new(r, cols, rows.into_iter().flatten().collect()).map_err(err)
}

#[pyclass(name = "Monoid", module = "logflatten", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Monoid(FineMonoid);

#[pymethods]
impl Monoid {
    #[new]
    #[pyo3(signature = (generators, rank=None))]
    fn new(generators: Vec<Vec<BigInt>>, rank: Option<usize>) -> PyResult<Self> {
        let rank = rank_of(rank, &generators)?;
        FineMonoid::new(rank, &vecs_in(generators)).map(Monoid).map_err(err)
    }

    #[staticmethod]
    fn natural(rank: usize) -> Self {
        Monoid(FineMonoid::natural(rank))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_artifact(text).map(Monoid).map_err(err)
    }

    fn to_json(&self) -> String {
        canonical_json(&self.0)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    #[getter]
    fn generators(&self) -> Vec<Vec<BigInt>> {
        vecs_out(self.0.generators())
    }

    fn contains(&self, v: Vec<BigInt>) -> bool {
        self.0.contains(&vec_in(v))
    }

    fn is_sharp(&self) -> bool {
        self.0.is_sharp()
    }

    fn is_saturated(&self) -> bool {
        self.0.is_saturated()
    }

    fn saturate(&self) -> Self {
        Monoid(self.0.saturate())
    }

    fn same_set(&self, other: &Monoid) -> bool {
        self.0.same_set(&other.0)
    }

    fn cone(&self) -> PyResult<Cone> {
        self.0.cone_of().map(Cone).map_err(err)
    }

    fn maximal_ideal(&self) -> Ideal {
        Ideal(MonoidIdeal::maximal(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("Monoid({:?})", self.generators())
    }
}

#[pyclass(name = "Cone", module = "logflatten", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Cone(LfCone);

#[pymethods]
impl Cone {
    #[new]
    #[pyo3(signature = (rays, rank=None))]
    fn new(rays: Vec<Vec<BigInt>>, rank: Option<usize>) -> PyResult<Self> {
        let rank = rank_of(rank, &rays)?;
        LfCone::new(rank, &vecs_in(rays)).map(Cone).map_err(err)
    }

    #[staticmethod]
    fn orthant(rank: usize) -> Self {
        Cone(LfCone::orthant(rank))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_artifact(text).map(Cone).map_err(err)
    }

    fn to_json(&self) -> String {
        canonical_json(&self.0)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    #[getter]
    fn rays(&self) -> Vec<Vec<BigInt>> {
        vecs_out(self.0.rays())
    }

    fn dual(&self) -> PyResult<Self> {
        self.0.dual().canonical().map(Cone).map_err(err)
    }

    fn contains(&self, v: Vec<BigInt>) -> bool {
        self.0.contains(&vec_in(v))
    }

    fn is_smooth(&self) -> PyResult<bool> {
        self.0.is_smooth().map_err(err)
    }

    fn hilbert_basis(&self) -> PyResult<Monoid> {
        monoids::hilbert_basis(&self.0).map(Monoid).map_err(err)
    }

    fn face_fan(&self) -> PyResult<Fan> {
        LfFan::face_fan(&self.0).map(Fan).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Cone({:?})", self.rays())
    }
}

#[pyclass(name = "Fan", module = "logflatten", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Fan(LfFan);

#[pymethods]
impl Fan {
    #[new]
    fn new(rank: usize, rays: Vec<Vec<BigInt>>, cones: Vec<Vec<usize>>) -> PyResult<Self> {
        LfFan::new(rank, &vecs_in(rays), &cones).map(Fan).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_artifact(text).map(Fan).map_err(err)
    }

    fn to_json(&self) -> String {
        canonical_json(&self.0)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    #[getter]
    fn rays(&self) -> Vec<Vec<BigInt>> {
        vecs_out(self.0.rays())
    }

    #[getter]
    fn maximal_cones(&self) -> Vec<Vec<usize>> {
        self.0.maximal_cones()
    }

    fn is_smooth(&self) -> bool {
        self.0.is_smooth()
    }

    fn stellar_subdivision(&self, v: Vec<BigInt>) -> PyResult<Self> {
        self.0.stellar_subdivision(&vec_in(v)).map(Fan).map_err(err)
    }

    /// Returns the smooth fan and the centres used.
    fn resolve(&self) -> PyResult<(Fan, Vec<Vec<BigInt>>)> {
        let (f, centres) = polyhedra::resolve_to_smooth(&self.0).map_err(err)?;
        Ok((Fan(f), vecs_out(&centres)))
    }

    fn to_svg(&self) -> PyResult<String> {
        lf::svg::render_fan_svg(&self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Fan(rays={:?}, cones={:?})", self.rays(), self.maximal_cones())
    }
}

#[pyclass(name = "Ideal", module = "logflatten", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Ideal(MonoidIdeal);

#[pymethods]
impl Ideal {
    #[new]
    fn new(monoid: &Monoid, generators: Vec<Vec<BigInt>>) -> PyResult<Self> {
        MonoidIdeal::minimal_generators(&monoid.0, &vecs_in(generators)).map(Ideal).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_artifact(text).map(Ideal).map_err(err)
    }

    fn to_json(&self) -> String {
        canonical_json(&self.0)
    }

    #[getter]
    fn monoid(&self) -> Monoid {
        Monoid(self.0.parent().clone())
    }

    #[getter]
    fn generators(&self) -> Vec<Vec<BigInt>> {
        vecs_out(self.0.generators())
    }

    fn contains(&self, v: Vec<BigInt>) -> bool {
        self.0.contains(&vec_in(v))
    }

    fn product(&self, other: &Ideal) -> PyResult<Self> {
        self.0.product(&other.0).map(Ideal).map_err(err)
    }

    /// The generator if the ideal is principal, else `None`.
    fn principal_generator(&self) -> Option<Vec<BigInt>> {
        self.0.is_principal().map(|v| vec_out(&v))
    }

    /// Ideal of all elements above the support function of this one.
    fn integral_closure(&self) -> PyResult<Self> {
        let phi = ideals::support_function_of_ideal(&self.0).map_err(err)?;
        ideals::ideal_of_support_function(&phi, self.0.parent()).map(Ideal).map_err(err)
    }

    /// The coarsest fan on which the support function is linear.
    fn linearity_fan(&self) -> PyResult<Fan> {
        let phi = ideals::support_function_of_ideal(&self.0).map_err(err)?;
        phi.linearity_fan().map(Fan).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Ideal({:?})", self.generators())
    }
}

#[pyclass(name = "Hom", module = "logflatten", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Hom(homs::MonoidHom);

#[pymethods]
impl Hom {
    #[new]
    fn new(source: &Monoid, target: &Monoid, matrix: Vec<Vec<BigInt>>) -> PyResult<Self> {
        let m = matrix_in(matrix, source.0.rank())?;
        homs::MonoidHom::new(source.0.clone(), target.0.clone(), m).map(Hom).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_artifact(text).map(Hom).map_err(err)
    }

    fn to_json(&self) -> String {
        canonical_json(&self.0)
    }

    #[getter]
    fn source(&self) -> Monoid {
        Monoid(self.0.source().clone())
    }

    #[getter]
    fn target(&self) -> Monoid {
        Monoid(self.0.target().clone())
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<BigInt>> {
        vecs_out(&self.0.matrix().row_vectors())
    }

    fn apply(&self, v: Vec<BigInt>) -> Vec<BigInt> {
        vec_out(&self.0.apply(&vec_in(v)))
    }

    /// `self ∘ first`.
    fn compose(&self, first: &Hom) -> PyResult<Self> {
        self.0.compose(&first.0).map(Hom).map_err(err)
    }

    fn is_injective(&self) -> bool {
        self.0.is_injective()
    }

    fn is_local(&self) -> bool {
        self.0.is_local()
    }

    fn is_exact(&self) -> PyResult<bool> {
        self.0.is_exact().map_err(err)
    }

    #[pyo3(signature = (oracle_bound=homs::DEFAULT_ORACLE_BOUND, conservative=false))]
    fn is_integral(&self, oracle_bound: u64, conservative: bool) -> PyResult<Verdict> {
        homs::is_integral_with(&self.0, &IntegralityOptions { oracle_bound, conservative })
            .map(Verdict)
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Hom({:?})", self.matrix())
    }
}

#[pyclass(name = "Verdict", module = "logflatten", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Verdict(IntegralityVerdict);

#[pymethods]
impl Verdict {
    #[getter]
    fn status(&self) -> &'static str {
        self.0.status.as_str()
    }

    /// `(a1, a2, b1, b2)` when the verdict is negative.
    #[getter]
    #[allow(clippy::type_complexity)]
    fn counterexample(&self) -> Option<(Vec<BigInt>, Vec<BigInt>, Vec<BigInt>, Vec<BigInt>)> {
        self.0.counterexample.as_ref().map(|c| (vec_out(&c.a1), vec_out(&c.a2), vec_out(&c.b1), vec_out(&c.b2)))
    }

    #[getter]
    fn witness_bound(&self) -> u64 {
        self.0.witness_bound
    }

    fn __repr__(&self) -> String {
        format!("Verdict({})", self.status())
    }
}

#[pyclass(name = "Blowup", module = "logflatten", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Blowup(BlowupModel);

#[pymethods]
impl Blowup {
    #[getter]
    fn fan(&self) -> Fan {
        Fan(self.0.fan.clone())
    }

    /// `(pivot, chart monoid)` pairs, sorted by pivot.
    #[getter]
    fn charts(&self) -> Vec<(Vec<BigInt>, Monoid)> {
        self.0.charts.iter().map(|c| (vec_out(&c.pivot), Monoid(c.monoid.clone()))).collect()
    }

    fn is_invertible(&self) -> PyResult<bool> {
        self.0.verify_invertibility().map_err(err)
    }

    fn to_json(&self) -> String {
        canonical_json(&self.0)
    }
}

#[pyclass(name = "Certificate", module = "logflatten", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Certificate(FlatteningCertificate);

#[pymethods]
impl Certificate {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_artifact(text).map(Certificate).map_err(err)
    }

    fn to_json(&self) -> String {
        canonical_json(&self.0)
    }

    #[getter]
    fn overall(&self) -> &'static str {
        self.0.overall.as_str()
    }

    #[getter]
    fn ideal(&self) -> Ideal {
        Ideal(self.0.ideal.clone())
    }

    #[getter]
    fn base_fan(&self) -> Fan {
        Fan(self.0.base_fan.clone())
    }

    #[getter]
    fn source_fan(&self) -> Fan {
        Fan(self.0.source_fan.clone())
    }

    #[getter]
    fn fast_exit(&self) -> bool {
        self.0.fast_exit
    }

    #[getter]
    fn chart_verdicts(&self) -> Vec<Verdict> {
        self.0.charts.iter().map(|c| Verdict(c.verdict.clone())).collect()
    }

    fn verify(&self) -> bool {
        fl::verify_certificate(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Certificate({}, {} charts)", self.overall(), self.0.charts.len())
    }
}

#[pyfunction]
#[pyo3(signature = (ideal, saturated=true))]
fn blow_up(ideal: &Ideal, saturated: bool) -> PyResult<Blowup> {
    blowup::blow_up(ideal.0.parent(), &ideal.0, saturated).map(Blowup).map_err(err)
}

/// An ideal of `monoid` whose blow-up fan is `fan`.
#[pyfunction]
#[pyo3(signature = (monoid, fan, height_bound=blowup::DEFAULT_HEIGHT_BOUND))]
fn subdivision_to_ideal(monoid: &Monoid, fan: &Fan, height_bound: u64) -> PyResult<Ideal> {
    blowup::subdivision_to_ideal(&monoid.0, &fan.0, height_bound).map(Ideal).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (hom, oracle_bound=5, height_bound=blowup::DEFAULT_HEIGHT_BOUND, max_iterations=fl::DEFAULT_MAX_ITERATIONS, fast_exit=true, conservative=false))]
fn flatten(
    hom: &Hom,
    oracle_bound: u64,
    height_bound: u64,
    max_iterations: usize,
    fast_exit: bool,
    conservative: bool,
) -> PyResult<Certificate> {
    let opts = FlattenOptions { oracle_bound, height_bound, max_iterations, fast_exit, conservative };
    fl::flatten(&hom.0, &opts).map(Certificate).map_err(err)
}

#[pyfunction]
fn verify(certificate: &Certificate) -> bool {
    fl::verify_certificate(&certificate.0)
}

#[pymodule]
fn logflatten(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Monoid>()?;
    m.add_class::<Cone>()?;
    m.add_class::<Fan>()?;
    m.add_class::<Ideal>()?;
    m.add_class::<Hom>()?;
    m.add_class::<Verdict>()?;
    m.add_class::<Blowup>()?;
    m.add_class::<Certificate>()?;
    m.add_function(wrap_pyfunction!(blow_up, m)?)?;
    m.add_function(wrap_pyfunction!(subdivision_to_ideal, m)?)?;
    m.add_function(wrap_pyfunction!(flatten, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
