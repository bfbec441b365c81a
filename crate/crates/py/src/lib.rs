//! Python bindings for dialogue-act pattern mining.
//!
//! ```python
//! import dpm
//! seqs = dpm.sequences(open("transcripts.jsonl").read(), open("labels.tsv").read())
//! hp = [(sid, syms) for sid, label, syms in seqs if label == "HP"]
//! db = dpm.SequenceDatabase(hp)
//! for p in db.mine(minsup=0.5, maxgap=1, minlen=2):
//!     print(p.symbols, p.support)
//! ```

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use dpm_core::annotation::{self, CodingScheme as CoreScheme, DASequence, DASymbol};
use dpm_core::contrast::contrast as core_contrast;
use dpm_core::corpus::{
    self, apply_labels, gap_from_minutes, parse_labels, parse_transcript_str, sessionize_corpus, Role, Session,
    SessionMode,
};
use dpm_core::predict::{self, FeatureKind, TreeModel, TreeParams};
use dpm_core::spm::{self, MiningParams, SymbolTable};

/// `(session_id, group_label, symbols)`
type LabeledSymbols = (String, Option<String>, Vec<String>);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let json = py.import("json")?;
    json.call_method1("loads", (value.to_string(),))
}

fn load_sessions(
    jsonl: &str,
    labels_tsv: Option<&str>,
    gap_minutes: f64,
    resessionize: bool,
) -> PyResult<Vec<Session>> {
    let turns = parse_transcript_str(jsonl).map_err(value_err)?;
    let mode = if resessionize {
        SessionMode::Resessionize
    } else {
        SessionMode::PreferInput
    };
    let (mut sessions, _) = sessionize_corpus(&turns, gap_from_minutes(gap_minutes), mode).map_err(value_err)?;
    if let Some(tsv) = labels_tsv {
        let labels = parse_labels(tsv.as_bytes()).map_err(value_err)?;
        apply_labels(&mut sessions, &labels);
    }
    Ok(sessions)
}

/// Sessions as plain dicts (`session_id`, `user_id`, `group_label`, `turns`).
#[pyfunction]
#[pyo3(signature = (jsonl, labels_tsv=None, gap_minutes=15.0, resessionize=false))]
fn sessionize<'py>(
    py: Python<'py>,
    jsonl: &str,
    labels_tsv: Option<&str>,
    gap_minutes: f64,
    resessionize: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let sessions = load_sessions(jsonl, labels_tsv, gap_minutes, resessionize)?;
    to_py(py, &serde_json::to_value(&sessions).map_err(value_err)?)
}

/// Per-group turn and word statistics as a dict.
#[pyfunction]
#[pyo3(signature = (jsonl, labels_tsv=None, gap_minutes=15.0, resessionize=false))]
fn corpus_stats<'py>(
    py: Python<'py>,
    jsonl: &str,
    labels_tsv: Option<&str>,
    gap_minutes: f64,
    resessionize: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let sessions = load_sessions(jsonl, labels_tsv, gap_minutes, resessionize)?;
    to_py(py, &corpus::corpus_stats(&sessions).to_json())
}

#[pyclass(name = "CodingScheme", frozen)]
struct PyCodingScheme {
    inner: CoreScheme,
}

#[pymethods]
impl PyCodingScheme {
    /// Parses a TOML scheme document; the built-in scheme when `toml` is None.
    #[new]
    #[pyo3(signature = (toml=None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        Ok(PyCodingScheme {
            inner: annotation::load_scheme(toml).map_err(value_err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn codes(&self) -> Vec<String> {
        self.inner.acts.iter().map(|a| a.code.clone()).collect()
    }

    fn prefix(&self, role: &str) -> PyResult<String> {
        let r = Role::parse(role).ok_or_else(|| value_err(format!("unknown role `{role}`")))?;
        Ok(self.inner.prefix(r).to_string())
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }
}

fn scheme_or_default(scheme: Option<&Bound<'_, PyCodingScheme>>) -> CoreScheme {
    scheme.map(|s| s.get().inner.clone()).unwrap_or_default()
}

/// Annotation check report as a dict.
#[pyfunction]
#[pyo3(signature = (jsonl, scheme=None, gap_minutes=15.0))]
fn validate<'py>(
    py: Python<'py>,
    jsonl: &str,
    scheme: Option<&Bound<'py, PyCodingScheme>>,
    gap_minutes: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let sessions = load_sessions(jsonl, None, gap_minutes, false)?;
    let report = annotation::validate_annotations(&sessions, &scheme_or_default(scheme));
    to_py(py, &serde_json::to_value(&report).map_err(value_err)?)
}

/// `(session_id, group_label, [symbol, ...])` per session.
#[pyfunction]
#[pyo3(signature = (jsonl, labels_tsv=None, scheme=None, gap_minutes=15.0, resessionize=false))]
fn sequences(
    jsonl: &str,
    labels_tsv: Option<&str>,
    scheme: Option<&Bound<'_, PyCodingScheme>>,
    gap_minutes: f64,
    resessionize: bool,
) -> PyResult<Vec<LabeledSymbols>> {
    let scheme = scheme_or_default(scheme);
    load_sessions(jsonl, labels_tsv, gap_minutes, resessionize)?
        .iter()
        .map(|s| {
            let seq = annotation::to_sequence(s, &scheme).map_err(value_err)?;
            Ok((
                seq.session_id,
                seq.group_label,
                seq.symbols.iter().map(DASymbol::render).collect(),
            ))
        })
        .collect()
}

#[pyfunction]
fn cohen_kappa(a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
    annotation::cohen_kappa(&a, &b).map_err(value_err)
}

#[pyfunction]
fn gini(labels: Vec<String>) -> PyResult<f64> {
    predict::gini(&labels).map_err(value_err)
}

#[pyclass(name = "Pattern", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyPattern {
    symbols: Vec<String>,
    support: usize,
    rel_support: f64,
    supporting_ids: Vec<String>,
}

#[pymethods]
impl PyPattern {
    fn __repr__(&self) -> String {
        format!("Pattern({}, support={})", self.symbols.join(" "), self.support)
    }
}

fn params(minsup: f64, maxgap: Option<usize>, minlen: usize, maxlen: Option<usize>) -> PyResult<MiningParams> {
    let p = MiningParams {
        min_support: minsup,
        max_gap: maxgap,
        min_len: minlen,
        max_len: maxlen,
    };
    p.validate().map_err(value_err)?;
    Ok(p)
}

#[pyclass(name = "SequenceDatabase", frozen)]
struct PySequenceDatabase {
    inner: spm::SequenceDatabase,
}

impl PySequenceDatabase {
    fn patterns(&self, set: &spm::PatternSet) -> Vec<PyPattern> {
        set.patterns
            .iter()
            .map(|p| PyPattern {
                symbols: self.inner.table().decode(&p.symbols).expect("ids come from the table"),
                support: p.support,
                rel_support: set.rel_support(p),
                supporting_ids: p.supporting_ids.clone(),
            })
            .collect()
    }
}

#[pymethods]
impl PySequenceDatabase {
    /// `sequences` is a list of `(sequence_id, [symbol, ...])`.
    #[new]
    fn new(sequences: Vec<(String, Vec<String>)>) -> PyResult<Self> {
        Ok(PySequenceDatabase {
            inner: spm::SequenceDatabase::from_symbols(&sequences).map_err(value_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn symbols(&self) -> Vec<String> {
        self.inner.table().symbols().to_vec()
    }

    /// `(support, supporting_ids)` for one pattern.
    #[pyo3(signature = (pattern, maxgap=Some(1)))]
    fn support(&self, pattern: Vec<String>, maxgap: Option<usize>) -> PyResult<(usize, Vec<String>)> {
        let ids = self.inner.table().encode(&pattern).map_err(value_err)?;
        spm::support_count(&self.inner, &ids, maxgap).map_err(value_err)
    }

    /// Frequent patterns; `maxgap=None` / `maxlen=None` mean unbounded.
    #[pyo3(signature = (minsup=0.5, maxgap=Some(1), minlen=2, maxlen=None))]
    fn mine(
        &self,
        minsup: f64,
        maxgap: Option<usize>,
        minlen: usize,
        maxlen: Option<usize>,
    ) -> PyResult<Vec<PyPattern>> {
        let set = spm::mine(&self.inner, &params(minsup, maxgap, minlen, maxlen)?).map_err(value_err)?;
        Ok(self.patterns(&set))
    }

    #[pyo3(signature = (minsup=0.5, maxgap=Some(1), minlen=2, maxlen=None))]
    fn mine_bruteforce(
        &self,
        minsup: f64,
        maxgap: Option<usize>,
        minlen: usize,
        maxlen: Option<usize>,
    ) -> PyResult<Vec<PyPattern>> {
        let set = spm::mine_bruteforce(&self.inner, &params(minsup, maxgap, minlen, maxlen)?).map_err(value_err)?;
        Ok(self.patterns(&set))
    }
}

/// Contrast two groups given as lists of `(sequence_id, [symbol, ...])`.
#[pyfunction]
#[pyo3(signature = (group_a, group_b, name_a="A", name_b="B", minsup=0.5, maxgap=Some(1), minlen=2, maxlen=None))]
#[allow(clippy::too_many_arguments)]
fn contrast<'py>(
    py: Python<'py>,
    group_a: Vec<(String, Vec<String>)>,
    group_b: Vec<(String, Vec<String>)>,
    name_a: &str,
    name_b: &str,
    minsup: f64,
    maxgap: Option<usize>,
    minlen: usize,
    maxlen: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let table = SymbolTable::from_symbols(group_a.iter().chain(&group_b).flat_map(|(_, s)| s.iter().cloned()));
    let db_a = spm::SequenceDatabase::with_table(table.clone(), &group_a).map_err(value_err)?;
    let db_b = spm::SequenceDatabase::with_table(table, &group_b).map_err(value_err)?;
    let report =
        core_contrast(&db_a, &db_b, &params(minsup, maxgap, minlen, maxlen)?, name_a, name_b).map_err(value_err)?;
    to_py(py, &report.to_json())
}

fn labelled(rows: Vec<(String, String, Vec<String>)>) -> PyResult<Vec<DASequence>> {
    rows.into_iter()
        .map(|(id, label, syms)| {
            Ok(DASequence {
                session_id: id,
                group_label: Some(label),
                symbols: syms
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_, _>>()
                    .map_err(value_err)?,
            })
        })
        .collect()
}

fn parse_patterns(patterns: Vec<Vec<String>>) -> PyResult<Vec<Vec<DASymbol>>> {
    patterns
        .into_iter()
        .map(|p| p.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(value_err))
        .collect()
}

fn tree_params(max_depth: usize, min_leaf: usize, feature: &str) -> PyResult<TreeParams> {
    let feature = match feature {
        "frequency" => FeatureKind::Frequency,
        "presence" => FeatureKind::Presence,
        other => return Err(value_err(format!("unknown feature kind `{other}`"))),
    };
    Ok(TreeParams {
        max_depth,
        min_leaf_size: min_leaf,
        feature,
    })
}

#[pyclass(name = "DecisionTree", frozen)]
struct PyDecisionTree {
    inner: TreeModel,
}

#[pymethods]
impl PyDecisionTree {
    /// Trains on `(session_id, label, [symbol, ...])` rows with one feature per pattern.
    #[staticmethod]
    #[pyo3(signature = (rows, patterns, maxgap=Some(1), max_depth=3, min_leaf=1, feature="frequency"))]
    fn fit(
        rows: Vec<(String, String, Vec<String>)>,
        patterns: Vec<Vec<String>>,
        maxgap: Option<usize>,
        max_depth: usize,
        min_leaf: usize,
        feature: &str,
    ) -> PyResult<Self> {
        let fm = predict::featurize(&labelled(rows)?, &parse_patterns(patterns)?, maxgap).map_err(value_err)?;
        let inner = predict::train_tree(&fm, tree_params(max_depth, min_leaf, feature)?).map_err(value_err)?;
        Ok(PyDecisionTree { inner })
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names.clone()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn predict(&self, row: Vec<f64>) -> PyResult<String> {
        predict::predict_label(&self.inner, &row).map_err(value_err)
    }

    fn rules(&self) -> String {
        self.inner.render_rules()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

/// Leave-one-out evaluation; returns a dict with `accuracy` and `per_fold`.
#[pyfunction]
#[pyo3(signature = (rows, patterns, maxgap=Some(1), max_depth=3, min_leaf=1, feature="frequency"))]
fn loocv<'py>(
    py: Python<'py>,
    rows: Vec<(String, String, Vec<String>)>,
    patterns: Vec<Vec<String>>,
    maxgap: Option<usize>,
    max_depth: usize,
    min_leaf: usize,
    feature: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let fm = predict::featurize(&labelled(rows)?, &parse_patterns(patterns)?, maxgap).map_err(value_err)?;
    let report = predict::loocv(&fm, tree_params(max_depth, min_leaf, feature)?).map_err(value_err)?;
    to_py(py, &serde_json::to_value(&report).map_err(value_err)?)
}

#[pymodule]
pub fn dpm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCodingScheme>()?;
    m.add_class::<PySequenceDatabase>()?;
    m.add_class::<PyPattern>()?;
    m.add_class::<PyDecisionTree>()?;
    m.add_function(wrap_pyfunction!(sessionize, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_stats, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(sequences, m)?)?;
    m.add_function(wrap_pyfunction!(cohen_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(gini, m)?)?;
    m.add_function(wrap_pyfunction!(contrast, m)?)?;
    m.add_function(wrap_pyfunction!(loocv, m)?)?;
    Ok(())
}
