//! Python bindings: matroids, valuated matroids, and tropical toric vector
//! bundles with their main operations.  Rationals cross the boundary as
//! canonical strings ("p/q", "inf"); structured reports cross as JSON.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tropbundle::bundle::TropicalToricBundle;
use tropbundle::fiber;
use tropbundle::io::{BundleDoc, EmbedInput, MatroidDoc};
use tropbundle::matroid;
use tropbundle::rational::fmt_rat;
use tropbundle::sections;
use tropbundle::stability;
use tropbundle::tropical::ExtRat;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An ordinary matroid with exact rank and closure queries.
#[pyclass(name = "Matroid")]
struct PyMatroid {
    inner: matroid::Matroid,
}

#[pymethods]
impl PyMatroid {
    /// Build from an explicit basis family (verifies basis exchange).
    #[staticmethod]
    fn from_bases(ground: Vec<String>, bases: Vec<Vec<String>>) -> PyResult<Self> {
        Ok(PyMatroid {
            inner: matroid::Matroid::from_label_bases(ground, bases).map_err(err)?,
        })
    }

    /// Build from rational column vectors given as strings.
    #[staticmethod]
    fn from_columns(ground: Vec<String>, columns: Vec<Vec<String>>) -> PyResult<Self> {
        let cols = columns
            .iter()
            .map(|c| {
                c.iter()
                    .map(|s| tropbundle::rational::parse_rat(s))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(PyMatroid {
            inner: matroid::Matroid::from_columns(ground, &cols).map_err(err)?,
        })
    }

    fn ground(&self) -> Vec<String> {
        self.inner.ground().labels().to_vec()
    }

    fn rank_total(&self) -> usize {
        self.inner.rank_total()
    }

    fn rank(&self, subset: Vec<String>) -> PyResult<usize> {
        let mask = self.inner.ground().mask_of(&subset).map_err(err)?;
        Ok(self.inner.rank(mask))
    }

    fn closure(&self, subset: Vec<String>) -> PyResult<Vec<String>> {
        let mask = self.inner.ground().mask_of(&subset).map_err(err)?;
        Ok(self.inner.ground().labels_of(self.inner.closure(mask)))
    }

    fn flats(&self) -> PyResult<Vec<Vec<String>>> {
        Ok(self
            .inner
            .flats()
            .map_err(err)?
            .into_iter()
            .map(|f| self.inner.ground().labels_of(f))
            .collect())
    }

    fn is_modular(&self, flat: Vec<String>) -> PyResult<bool> {
        let mask = self.inner.ground().mask_of(&flat).map_err(err)?;
        Ok(self.inner.is_modular(mask, None).map_err(err)?.0)
    }

    fn connected_components(&self) -> Vec<Vec<String>> {
        self.inner
            .connected_components()
            .into_iter()
            .map(|c| self.inner.ground().labels_of(c))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Matroid(rank={}, ground={:?})",
            self.inner.rank_total(),
            self.inner.ground().labels()
        )
    }
}

/// A tropical toric vector bundle (or reflexive sheaf) loaded from its JSON
/// document.
#[pyclass(name = "Bundle")]
struct PyBundle {
    inner: TropicalToricBundle,
}

#[pymethods]
impl PyBundle {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc: BundleDoc = serde_json::from_str(text).map_err(err)?;
        Ok(PyBundle {
            inner: doc.to_bundle().map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        let doc = BundleDoc::from_bundle(&self.inner);
        serde_json::to_string_pretty(&doc).map_err(err)
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn ground(&self) -> Vec<String> {
        self.inner.vm.ground().labels().to_vec()
    }

    fn degree_vectors(&self) -> Vec<Vec<i64>> {
        self.inner.degree_vectors()
    }

    /// (smooth, simplicial, warnings) of the underlying fan.
    fn validate_fan(&self) -> (bool, bool, Vec<String>) {
        let rep = self.inner.fan.validate();
        (rep.smooth, rep.simplicial, rep.warnings)
    }

    /// Whether a compatibility certificate exists for every maximal cone.
    fn certify(&self) -> PyResult<bool> {
        Ok(self.inner.certify().map_err(err)?.is_ok())
    }

    /// Per-cone certificate bases, or None when certification fails.
    fn certificate_bases(&self) -> PyResult<Option<Vec<Vec<String>>>> {
        match self.inner.certify().map_err(err)? {
            Ok(cert) => Ok(Some(
                cert.cones
                    .iter()
                    .map(|c| self.inner.vm.ground().labels_of(c.basis))
                    .collect(),
            )),
            Err(_) => Ok(None),
        }
    }

    fn is_partially_modular(&self) -> PyResult<bool> {
        Ok(self.inner.is_partially_modular().map_err(err)?.0)
    }

    #[pyo3(signature = (cap = 18))]
    fn is_tropically_minimal(&self, cap: usize) -> PyResult<bool> {
        Ok(self.inner.is_tropically_minimal(cap).map_err(err)?.0)
    }

    fn h0(&self) -> PyResult<usize> {
        Ok(sections::h0(&self.inner).map_err(err)?.total)
    }

    fn h0_breakdown(&self) -> PyResult<Vec<(Vec<i64>, usize)>> {
        Ok(sections::h0(&self.inner)
            .map_err(err)?
            .breakdown
            .into_iter()
            .collect())
    }

    fn chern(&self) -> PyResult<Vec<i64>> {
        Ok(stability::chern(&self.inner).map_err(err)?.0)
    }

    fn degree(&self) -> PyResult<String> {
        Ok(fmt_rat(&stability::degree(&self.inner).map_err(err)?))
    }

    fn slope(&self) -> PyResult<String> {
        Ok(fmt_rat(&stability::slope(&self.inner).map_err(err)?))
    }

    fn is_stable(&self) -> PyResult<bool> {
        Ok(stability::stability(&self.inner).map_err(err)?.stable)
    }

    fn is_semistable(&self) -> PyResult<bool> {
        Ok(stability::stability(&self.inner).map_err(err)?.semistable)
    }

    /// The flats of the Harder-Narasimhan filtration with the slope of each
    /// graded piece.
    fn harder_narasimhan(&self) -> PyResult<Vec<(Vec<String>, String)>> {
        let hn = stability::harder_narasimhan(&self.inner).map_err(err)?;
        Ok(hn
            .steps
            .iter()
            .map(|s| {
                (
                    self.inner.vm.ground().labels_of(s.flat),
                    fmt_rat(&s.gr_slope),
                )
            })
            .collect())
    }

    fn jordan_holder(&self) -> PyResult<Vec<(Vec<String>, String)>> {
        let jh = stability::jordan_holder(&self.inner).map_err(err)?;
        Ok(jh
            .steps
            .iter()
            .map(|s| {
                (
                    self.inner.vm.ground().labels_of(s.flat),
                    fmt_rat(&s.gr_slope),
                )
            })
            .collect())
    }

    fn decompose(&self) -> PyResult<Vec<PyBundle>> {
        Ok(self
            .inner
            .decompose()
            .map_err(err)?
            .into_iter()
            .map(|b| PyBundle { inner: b })
            .collect())
    }

    fn tensor_line(&self, a: Vec<i64>) -> PyResult<PyBundle> {
        Ok(PyBundle {
            inner: self.inner.tensor_line(&a).map_err(err)?,
        })
    }

    fn isomorphic(&self, other: &PyBundle) -> PyResult<bool> {
        Ok(self.inner.isomorphic(&other.inner).map_err(err)?.is_some())
    }

    /// Fiber circuits at a Cox point given as rational strings ("inf" for
    /// the boundary strata).
    fn fiber_circuits(&self, z: Vec<String>) -> PyResult<Vec<Vec<String>>> {
        let coords = z
            .iter()
            .map(|s| ExtRat::parse(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let point = fiber::CoxPoint::new(&self.inner, coords).map_err(err)?;
        Ok(fiber::fiber_circuits(&self.inner, &point)
            .iter()
            .map(|c| c.entries.iter().map(|e| e.to_string()).collect())
            .collect())
    }

    /// The total-space system as (element, coefficient, z-exponent) terms.
    fn total_space(&self) -> PyResult<Vec<Vec<(String, String, Vec<i64>)>>> {
        Ok(fiber::total_space_system(&self.inner)
            .map_err(err)?
            .iter()
            .map(|p| {
                p.terms
                    .iter()
                    .map(|(w, c, u)| {
                        (
                            self.inner.vm.ground().label(*w).to_string(),
                            c.to_string(),
                            u.clone(),
                        )
                    })
                    .collect()
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Bundle(rank={}, rays={}, ground={:?})",
            self.inner.rank(),
            self.inner.fan.ray_count(),
            self.inner.vm.ground().labels()
        )
    }
}

/// Parse a valuated-matroid document and report whether the axioms hold.
#[pyfunction]
fn check_valuated_axioms(text: &str) -> PyResult<(bool, Vec<String>)> {
    let doc: MatroidDoc = serde_json::from_str(text).map_err(err)?;
    let vm = doc.to_valuated().map_err(err)?;
    let report = vm.check_axioms();
    Ok((report.pass, report.failures))
}

/// Embed a ranked lattice (or per-ray subspace data) into its minimal
/// matroid; returns the report as JSON.
#[pyfunction]
fn embed_lattice(text: &str) -> PyResult<String> {
    let parsed: EmbedInput = serde_json::from_str(text).map_err(err)?;
    let lattice = match parsed {
        EmbedInput::Lattice(doc) => doc.to_lattice().map_err(err)?,
        EmbedInput::Subspaces(doc) => {
            let subs = doc
                .subspaces
                .iter()
                .map(|ray| {
                    ray.iter()
                        .map(|step| {
                            step.iter()
                                .map(|row| {
                                    row.iter()
                                        .map(|s| tropbundle::rational::parse_rat(s))
                                        .collect::<Result<Vec<_>, _>>()
                                })
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            tropbundle::lattice_embed::bundle_lattices(doc.ambient, &subs)
                .map_err(err)?
                .1
        }
    };
    let emb = tropbundle::lattice_embed::dilworth_minimal_matroid(&lattice).map_err(err)?;
    let bases: Vec<Vec<String>> = emb
        .target
        .bases()
        .iter()
        .map(|&b| emb.target.ground().labels_of(b))
        .collect();
    let body = serde_json::json!({
        "ground": emb.target.ground().labels(),
        "rank": emb.target.rank_total(),
        "bases": bases,
    });
    serde_json::to_string_pretty(&body).map_err(err)
}

#[pymodule]
fn tropbundle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatroid>()?;
    m.add_class::<PyBundle>()?;
    m.add_function(wrap_pyfunction!(check_valuated_axioms, m)?)?;
    m.add_function(wrap_pyfunction!(embed_lattice, m)?)?;
    Ok(())
}
