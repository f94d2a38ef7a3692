//! Python bindings: run the pipeline and query its outputs.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use landscape_core::atoms::{
    read_assignments_tsv, train_atoms, Assignment, AtomConfig, AtomMethod,
};
use landscape_core::corpus::{read_vocab, tokenize as core_tokenize, TokenRules, Vocabulary};
use landscape_core::embedding::{
    cosine as core_cosine, nearest_neighbors, read_embeddings, train, EmbeddingTensor, TrainConfig,
};
use landscape_core::measures::{
    centroid_spread, global_distance, local_distance, negentropy_balance,
    vc_diversity as core_vc_diversity, CompanyModules, InvestorProfile, Pooling, SliceView,
};
use landscape_core::pipeline::{Overrides, Pipeline as CorePipeline, Stage, StageStatus};
use landscape_core::sparse::SymCsr;
use landscape_core::validation::{analogy_query, build_axis, drift_trace, project_on_axis};
use landscape_core::Error;
use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(landscape, LandscapeError, PyException);
create_exception!(landscape, ConfigError, LandscapeError);
create_exception!(landscape, StaleError, LandscapeError);
create_exception!(landscape, ValidationError, LandscapeError);
create_exception!(landscape, UnknownWordError, LandscapeError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Config(_) => ConfigError::new_err(msg),
        Error::Stale(_) => StaleError::new_err(msg),
        Error::Validation(_) => ValidationError::new_err(msg),
        Error::UnknownWord { .. } => UnknownWordError::new_err(msg),
        _ => LandscapeError::new_err(msg),
    }
}

fn stage(name: &str) -> PyResult<Stage> {
    Stage::ALL
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown stage `{name}`")))
}

fn status(s: StageStatus) -> &'static str {
    match s {
        StageStatus::Ran => "ran",
        StageStatus::UpToDate => "up_to_date",
    }
}

type Ranked = Vec<(String, f64)>;
type Atoms = (Vec<Vec<f64>>, Vec<Option<usize>>);

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let k = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != k) {
        return Err(PyValueError::new_err("rows must all have the same length"));
    }
    Ok(DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]))
}

/// The staged pipeline configured by a TOML file.
#[pyclass(module = "landscape")]
struct Pipeline {
    inner: CorePipeline,
}

#[pymethods]
impl Pipeline {
    #[new]
    #[pyo3(signature = (config, seed=None, out=None))]
    fn new(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> PyResult<Self> {
        let inner = CorePipeline::open(&config, Overrides { seed, out }).map_err(py_err)?;
        Ok(Pipeline { inner })
    }

    #[getter]
    fn out_dir(&self) -> PathBuf {
        self.inner.out_dir().to_path_buf()
    }

    fn config_hash(&self) -> PyResult<String> {
        self.inner.config_hash().map_err(py_err)
    }

    /// Runs one stage; returns "ran" or "up_to_date".
    fn run(&self, py: Python<'_>, name: &str) -> PyResult<&'static str> {
        let s = stage(name)?;
        py.detach(|| self.inner.run(s)).map(status).map_err(py_err)
    }

    fn run_all(&self, py: Python<'_>) -> PyResult<Vec<(String, &'static str)>> {
        let done = py.detach(|| self.inner.run_all()).map_err(py_err)?;
        Ok(done
            .into_iter()
            .map(|(s, st)| (s.name().to_string(), status(st)))
            .collect())
    }
}

/// Vocabulary, embeddings and word assignments read from an output directory.
#[pyclass(module = "landscape")]
struct Landscape {
    vocab: Vocabulary,
    embeddings: EmbeddingTensor,
    assignments: Option<Vec<Assignment>>,
}

impl Landscape {
    fn word_id(&self, word: &str) -> PyResult<usize> {
        self.vocab.id(word).ok_or_else(|| {
            py_err(Error::UnknownWord {
                word: word.to_string(),
                suggestions: self.vocab.suggestions(word, 3),
            })
        })
    }

    fn slice(&self, year: i32) -> usize {
        self.embeddings.slice_for_year(year)
    }
}

#[pymethods]
impl Landscape {
    /// Loads `vocab.tsv`, `embeddings.bin` and, when present, `atoms/{year}.tsv`.
    #[staticmethod]
    fn open(out_dir: PathBuf) -> PyResult<Self> {
        let vocab = read_vocab(&out_dir.join("vocab.tsv")).map_err(py_err)?;
        let file = File::open(out_dir.join("embeddings.bin")).map_err(|e| py_err(e.into()))?;
        let embeddings = read_embeddings(&mut BufReader::new(file)).map_err(py_err)?;
        let index: HashMap<String, usize> = vocab
            .words()
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        let paths: Vec<PathBuf> = embeddings
            .years()
            .iter()
            .map(|y| out_dir.join(format!("atoms/{y}.tsv")))
            .collect();
        let assignments = if paths.iter().all(|p| p.exists()) {
            Some(
                paths
                    .iter()
                    .map(|p| read_assignments_tsv(p, &index).map(|(_, a)| a))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(py_err)?,
            )
        } else {
            None
        };
        Ok(Landscape {
            vocab,
            embeddings,
            assignments,
        })
    }

    #[getter]
    fn years(&self) -> Vec<i32> {
        self.embeddings.years().to_vec()
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.vocab.words().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.embeddings.k()
    }

    fn __len__(&self) -> usize {
        self.vocab.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.vocab.id(word).is_some()
    }

    fn vector(&self, word: &str, year: i32) -> PyResult<Vec<f64>> {
        Ok(self
            .embeddings
            .vector(self.slice(year), self.word_id(word)?))
    }

    /// Word vectors of the slice covering `year`, one row per vocabulary word.
    fn matrix(&self, year: i32) -> Vec<Vec<f64>> {
        rows(self.embeddings.slice(self.slice(year)))
    }

    #[pyo3(signature = (word, year, count=10))]
    fn neighbors(&self, word: &str, year: i32, count: usize) -> PyResult<Vec<(String, f64)>> {
        let hits = nearest_neighbors(
            &self.embeddings,
            self.slice(year),
            self.word_id(word)?,
            count,
            true,
        )
        .map_err(py_err)?;
        Ok(hits
            .into_iter()
            .map(|n| (self.vocab.word(n.id).to_string(), n.similarity))
            .collect())
    }

    /// `{year: [(neighbor, similarity), ...]}` for every slice.
    #[pyo3(signature = (word, count=10))]
    fn drift(&self, word: &str, count: usize) -> PyResult<Vec<(i32, Ranked)>> {
        let report = drift_trace(&self.embeddings, &self.vocab, word, count).map_err(py_err)?;
        Ok(report
            .slices
            .into_iter()
            .map(|s| {
                (
                    s.year,
                    s.neighbors
                        .into_iter()
                        .map(|n| (n.word, n.similarity))
                        .collect(),
                )
            })
            .collect())
    }

    /// Words closest to `b − a + c`.
    #[pyo3(signature = (a, b, c, year, count=10))]
    fn analogy(
        &self,
        a: &str,
        b: &str,
        c: &str,
        year: i32,
        count: usize,
    ) -> PyResult<Vec<(String, f64)>> {
        let hits = analogy_query(
            &self.embeddings,
            &self.vocab,
            self.slice(year),
            (a, b, c),
            count,
            true,
        )
        .map_err(py_err)?;
        Ok(hits
            .into_iter()
            .map(|n| (self.vocab.word(n.id).to_string(), n.similarity))
            .collect())
    }

    /// Cosine of each word with the `positive − negative` axis.
    fn project(
        &self,
        words: Vec<String>,
        year: i32,
        positive: Vec<String>,
        negative: Vec<String>,
    ) -> PyResult<Vec<Option<f64>>> {
        let t = self.slice(year);
        let axis =
            build_axis(&self.embeddings, &self.vocab, t, &positive, &negative).map_err(py_err)?;
        words
            .iter()
            .map(|w| {
                Ok(project_on_axis(
                    &self.embeddings.vector(t, self.word_id(w)?),
                    &axis,
                ))
            })
            .collect()
    }

    /// Recombination distances of a description in the slice covering `year`.
    #[pyo3(signature = (text, year, min_module_size=2))]
    fn describe(
        &self,
        text: &str,
        year: i32,
        min_module_size: usize,
    ) -> PyResult<HashMap<&'static str, f64>> {
        let assignments = self.assignments.as_ref().ok_or_else(|| {
            LandscapeError::new_err("no atom assignments in this output directory")
        })?;
        let t = self.slice(year);
        let tokens = core_tokenize(text, &TokenRules::default());
        let view = SliceView {
            vocab: &self.vocab,
            vectors: self.embeddings.slice(t),
            assignment: &assignments[t],
        };
        let m = CompanyModules::new(&tokens, &view);
        Ok(HashMap::from([
            (
                "local_distance",
                local_distance(&m, min_module_size, Pooling::Pairs).value,
            ),
            (
                "global_distance",
                global_distance(&m, min_module_size).value,
            ),
            (
                "centroid_spread",
                centroid_spread(&m, min_module_size).value,
            ),
            ("negentropy", negentropy_balance(&m).value),
        ]))
    }
}

/// Trains smoothed embeddings from symmetric `(i, j, value)` triplets, one
/// list per slice; returns one `n × k` matrix per slice.
#[pyfunction]
#[pyo3(signature = (slices, n, years, k=50, lam=10.0, tau=50.0, gamma=500.0, sweeps=30, seed=0, tol=1e-4))]
#[allow(clippy::too_many_arguments)]
fn train_embeddings(
    py: Python<'_>,
    slices: Vec<Vec<(u32, u32, f64)>>,
    n: usize,
    years: Vec<i32>,
    k: usize,
    lam: f64,
    tau: f64,
    gamma: f64,
    sweeps: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let y = slices
        .iter()
        .enumerate()
        .map(|(t, trip)| {
            let upper: Vec<_> = trip
                .iter()
                .map(|&(i, j, v)| (i.min(j), i.max(j), v))
                .collect();
            SymCsr::from_upper_triplets(n, &upper)
                .map(|values| landscape_core::corpus::PpmiMatrix { slice: t, values })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let cfg = TrainConfig {
        k,
        lambda: lam,
        tau,
        gamma,
        sweeps,
        seed,
        tol,
        ..TrainConfig::default()
    };
    let out = py.detach(|| train(&y, years, &cfg)).map_err(py_err)?;
    Ok(out.embeddings.slices().iter().map(rows).collect())
}

/// Learns unit-norm atoms for word vectors; returns `(atoms, assignment)`
/// with `None` for words left unassigned.
#[pyfunction]
#[pyo3(signature = (vectors, n_atoms, sparsity=5, iterations=20, seed=0, method="ksvd"))]
fn learn_atoms(
    py: Python<'_>,
    vectors: Vec<Vec<f64>>,
    n_atoms: usize,
    sparsity: usize,
    iterations: usize,
    seed: u64,
    method: &str,
) -> PyResult<Atoms> {
    let method = match method {
        "ksvd" => AtomMethod::Ksvd,
        "kmeans" => AtomMethod::Kmeans,
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    let words = matrix(&vectors)?;
    let cfg = AtomConfig {
        num_atoms: n_atoms,
        sparsity,
        iterations,
        method,
        seed,
    };
    let dict = py.detach(|| train_atoms(&words, 0, &cfg)).map_err(py_err)?;
    Ok((rows(&dict.atoms), dict.assignment.atom))
}

/// Mean pairwise Jaccard distance between investor keyword sets.
#[pyfunction]
fn vc_diversity(keywords: Vec<Vec<String>>) -> Option<f64> {
    let investors: Vec<InvestorProfile> = keywords
        .into_iter()
        .enumerate()
        .map(|(i, k)| InvestorProfile {
            id: i.to_string(),
            keywords: k.into_iter().collect(),
        })
        .collect();
    core_vc_diversity(&investors)
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    core_tokenize(text, &TokenRules::default())
}

#[pyfunction]
fn cosine(a: Vec<f64>, b: Vec<f64>) -> PyResult<Option<f64>> {
    if a.len() != b.len() {
        return Err(PyValueError::new_err("vectors differ in length"));
    }
    Ok(core_cosine(&a, &b))
}

#[pymodule]
fn landscape(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("LandscapeError", py.get_type::<LandscapeError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("StaleError", py.get_type::<StaleError>())?;
    m.add("ValidationError", py.get_type::<ValidationError>())?;
    m.add("UnknownWordError", py.get_type::<UnknownWordError>())?;
    m.add(
        "STAGES",
        Stage::ALL.iter().map(|s| s.name()).collect::<Vec<_>>(),
    )?;
    m.add_class::<Pipeline>()?;
    m.add_class::<Landscape>()?;
    m.add_function(wrap_pyfunction!(train_embeddings, m)?)?;
    m.add_function(wrap_pyfunction!(learn_atoms, m)?)?;
    m.add_function(wrap_pyfunction!(vc_diversity, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    Ok(())
}
