//! Pattern features per session and a deterministic Gini decision tree.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{DASequence, DASymbol};
use crate::spm::{occurs_at, SymbolTable};

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("session `{0}` has no group label")]
    Unlabeled(String),
    #[error("duplicate session id `{0}`")]
    DuplicateSession(String),
    #[error("no patterns to featurize")]
    NoPatterns,
    #[error("empty pattern in feature list")]
    EmptyPattern,
    #[error("label list is empty")]
    EmptyLabels,
    #[error("feature matrix has no rows")]
    NoRows,
    #[error("leave-one-out needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("row has {got} features, model expects {want}")]
    WidthMismatch { got: usize, want: usize },
    #[error("invalid tree parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub session_id: String,
    pub label: String,
    pub presence: Vec<u8>,
    pub frequency: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<Vec<DASymbol>>,
    pub rows: Vec<FeatureRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Presence,
    #[default]
    Frequency,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn column_name(&self, i: usize, kind: FeatureKind) -> String {
        let body = self.columns[i]
            .iter()
            .map(DASymbol::render)
            .collect::<Vec<_>>()
            .join(",");
        match kind {
            FeatureKind::Presence => format!("has({body})"),
            FeatureKind::Frequency => format!("freq({body})"),
        }
    }

    pub fn values(&self, row: usize, kind: FeatureKind) -> Vec<f64> {
        let r = &self.rows[row];
        match kind {
            FeatureKind::Presence => r.presence.iter().map(|&p| p as f64).collect(),
            FeatureKind::Frequency => r.frequency.clone(),
        }
    }

    fn subset(&self, keep: impl Fn(usize) -> bool) -> FeatureMatrix {
        FeatureMatrix {
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, r)| r.clone())
                .collect(),
        }
    }

    /// `session_id<TAB>label<TAB>` then one frequency column per pattern.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("session_id\tlabel");
        for i in 0..self.width() {
            out.push('\t');
            out.push_str(&self.column_name(i, FeatureKind::Frequency));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.session_id);
            out.push('\t');
            out.push_str(&r.label);
            for f in &r.frequency {
                let _ = write!(out, "\t{f}");
            }
            out.push('\n');
        }
        out
    }
}

fn canonical_symbols(a: &[DASymbol], b: &[DASymbol]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        let ra: Vec<String> = a.iter().map(DASymbol::render).collect();
        let rb: Vec<String> = b.iter().map(DASymbol::render).collect();
        ra.cmp(&rb)
    })
}

/// One row per sequence, one column per pattern (deduplicated, canonical
/// order). Frequency is the number of positions where an occurrence of the
/// pattern starts, divided by the sequence length.
pub fn featurize(
    sequences: &[DASequence],
    patterns: &[Vec<DASymbol>],
    max_gap: Option<usize>,
) -> Result<FeatureMatrix, PredictError> {
    if patterns.is_empty() {
        return Err(PredictError::NoPatterns);
    }
    if patterns.iter().any(Vec::is_empty) {
        return Err(PredictError::EmptyPattern);
    }
    let mut columns = patterns.to_vec();
    columns.sort_by(|a, b| canonical_symbols(a, b));
    columns.dedup();

    let table = SymbolTable::from_symbols(
        sequences
            .iter()
            .flat_map(|s| s.symbols.iter())
            .chain(columns.iter().flatten())
            .map(DASymbol::render),
    );
    let encode = |syms: &[DASymbol]| -> Vec<u32> {
        syms.iter()
            .map(|s| table.id(&s.render()).expect("table covers all symbols"))
            .collect()
    };
    let encoded_cols: Vec<Vec<u32>> = columns.iter().map(|c| encode(c)).collect();

    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(sequences.len());
    for s in sequences {
        let label = s
            .group_label
            .clone()
            .ok_or_else(|| PredictError::Unlabeled(s.session_id.clone()))?;
        if !seen.insert(s.session_id.as_str()) {
            return Err(PredictError::DuplicateSession(s.session_id.clone()));
        }
        let seq = encode(&s.symbols);
        let mut presence = Vec::with_capacity(encoded_cols.len());
        let mut frequency = Vec::with_capacity(encoded_cols.len());
        for pat in &encoded_cols {
            let starts = (0..seq.len()).filter(|&i| occurs_at(&seq, pat, i, max_gap)).count();
            let freq = if seq.is_empty() {
                0.0
            } else {
                starts as f64 / seq.len() as f64
            };
            presence.push(u8::from(starts > 0));
            frequency.push(freq);
        }
        rows.push(FeatureRow {
            session_id: s.session_id.clone(),
            label,
            presence,
            frequency,
        });
    }
    Ok(FeatureMatrix { columns, rows })
}

fn class_counts<'a>(labels: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l.to_string()).or_default() += 1;
    }
    counts
}

/// Gini impurity `1 - sum_c (n_c / n)^2`.
pub fn gini<S: AsRef<str>>(labels: &[S]) -> Result<f64, PredictError> {
    if labels.is_empty() {
        return Err(PredictError::EmptyLabels);
    }
    let n = labels.len() as f64;
    let counts = class_counts(labels.iter().map(AsRef::as_ref));
    Ok(1.0 - counts.values().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf_size: usize,
    pub feature: FeatureKind,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 3,
            min_leaf_size: 1,
            feature: FeatureKind::Frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `value <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        label: String,
        counts: BTreeMap<String, usize>,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub feature_names: Vec<String>,
    pub params: TreeParams,
    pub root: Node,
}

fn majority(counts: &BTreeMap<String, usize>) -> String {
    // BTreeMap iterates labels ascending, so the first maximum is the smallest label
    let mut best: Option<(&String, usize)> = None;
    for (l, &c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((l, c));
        }
    }
    best.map(|(l, _)| l.clone()).unwrap_or_default()
}

/// `sum_c n_c^2 / n` as an exact fraction. Larger is purer.
#[derive(Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of_children(left: &BTreeMap<&str, usize>, nl: usize, right: &BTreeMap<&str, usize>, nr: usize) -> Purity {
        let sq = |m: &BTreeMap<&str, usize>| m.values().map(|&c| (c * c) as u128).sum::<u128>();
        let (nl, nr) = (nl as u128, nr as u128);
        Purity {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn gt(&self, o: &Purity) -> bool {
        self.num * o.den > o.num * self.den
    }
}

struct Trainer<'a> {
    values: &'a [Vec<f64>],
    labels: &'a [&'a str],
    params: TreeParams,
}

impl Trainer<'_> {
    fn leaf(&self, rows: &[usize]) -> Node {
        let counts = class_counts(rows.iter().map(|&r| self.labels[r]));
        Node::Leaf {
            label: majority(&counts),
            counts,
        }
    }

    fn best_split(&self, rows: &[usize]) -> Option<(usize, f64)> {
        let width = self.values.first().map_or(0, Vec::len);
        let min_leaf = self.params.min_leaf_size;
        let mut best: Option<(Purity, usize, f64)> = None;
        for f in 0..width {
            let mut sorted: Vec<(f64, &str)> = rows.iter().map(|&r| (self.values[r][f], self.labels[r])).collect();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
            let mut left: BTreeMap<&str, usize> = BTreeMap::new();
            let mut right: BTreeMap<&str, usize> = BTreeMap::new();
            for (_, l) in &sorted {
                *right.entry(l).or_default() += 1;
            }
            for i in 0..sorted.len() - 1 {
                let (v, l) = sorted[i];
                *left.entry(l).or_default() += 1;
                *right.get_mut(l).expect("counted") -= 1;
                let next = sorted[i + 1].0;
                if next == v {
                    continue;
                }
                let (nl, nr) = (i + 1, sorted.len() - i - 1);
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let purity = Purity::of_children(&left, nl, &right, nr);
                // strict: earlier (lower feature, lower threshold) wins ties
                if best.as_ref().is_none_or(|(bp, _, _)| purity.gt(bp)) {
                    best = Some((purity, f, v + (next - v) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&self, rows: &[usize], depth: usize) -> Node {
        let pure = rows.iter().all(|&r| self.labels[r] == self.labels[rows[0]]);
        if pure || depth >= self.params.max_depth || rows.len() < 2 * self.params.min_leaf_size.max(1) {
            return self.leaf(rows);
        }
        let Some((feature, threshold)) = self.best_split(rows) else {
            return self.leaf(rows);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.values[i][feature] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.grow(&l, depth + 1)),
            right: Box::new(self.grow(&r, depth + 1)),
        }
    }
}

/// Greedy recursive partitioning on Gini decrease. Thresholds are midpoints
/// between consecutive distinct values; ties go to the lower feature index,
/// then the lower threshold. Impure nodes split even at zero gain, so
/// XOR-like structure is reachable within `max_depth`.
pub fn train_tree(features: &FeatureMatrix, params: TreeParams) -> Result<TreeModel, PredictError> {
    if features.rows.is_empty() {
        return Err(PredictError::NoRows);
    }
    if params.min_leaf_size == 0 {
        return Err(PredictError::InvalidParams("min_leaf_size must be at least 1".into()));
    }
    let values: Vec<Vec<f64>> = (0..features.rows.len())
        .map(|i| features.values(i, params.feature))
        .collect();
    let labels: Vec<&str> = features.rows.iter().map(|r| r.label.as_str()).collect();
    let trainer = Trainer {
        values: &values,
        labels: &labels,
        params,
    };
    let rows: Vec<usize> = (0..values.len()).collect();
    let root = trainer.grow(&rows, 0);
    Ok(TreeModel {
        feature_names: (0..features.width())
            .map(|i| features.column_name(i, params.feature))
            .collect(),
        params,
        root,
    })
}

pub fn predict_label(model: &TreeModel, row: &[f64]) -> Result<String, PredictError> {
    if row.len() != model.feature_names.len() {
        return Err(PredictError::WidthMismatch {
            got: row.len(),
            want: model.feature_names.len(),
        });
    }
    let mut node = &model.root;
    loop {
        match node {
            Node::Leaf { label, .. } => return Ok(label.clone()),
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => node = if row[*feature] <= *threshold { left } else { right },
        }
    }
}

impl TreeModel {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn training_accuracy(&self, features: &FeatureMatrix) -> f64 {
        let correct = (0..features.rows.len())
            .filter(|&i| {
                predict_label(self, &features.values(i, self.params.feature))
                    .ok()
                    .as_deref()
                    == Some(features.rows[i].label.as_str())
            })
            .count();
        correct as f64 / features.rows.len() as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    /// Indented if/else rules, e.g. `if freq([t]Q,[s]Q) > 0.05 → LP (6/6)`.
    pub fn render_rules(&self) -> String {
        fn leaf_text(label: &str, counts: &BTreeMap<String, usize>) -> String {
            let total: usize = counts.values().sum();
            format!("→ {label} ({}/{total})", counts.get(label).copied().unwrap_or(0))
        }
        fn walk(model: &TreeModel, node: &Node, depth: usize, out: &mut String) {
            let indent = "  ".repeat(depth);
            match node {
                Node::Leaf { label, counts } => {
                    let _ = writeln!(out, "{indent}{}", leaf_text(label, counts));
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    for (op, child) in [("<=", left), (">", right)] {
                        let cond = format!("{indent}if {} {op} {threshold}", model.feature_names[*feature]);
                        match child.as_ref() {
                            Node::Leaf { label, counts } => {
                                let _ = writeln!(out, "{cond} {}", leaf_text(label, counts));
                            }
                            inner => {
                                let _ = writeln!(out, "{cond}");
                                walk(model, inner, depth + 1, out);
                            }
                        }
                    }
                }
            }
        }
        let mut out = String::new();
        walk(self, &self.root, 0, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub session_id: String,
    pub truth: String,
    pub predicted: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// Sorted by session id.
    pub per_fold: Vec<Fold>,
}

impl LoocvReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("session_id\ttrue\tpredicted\n");
        for f in &self.per_fold {
            let _ = writeln!(out, "{}\t{}\t{}", f.session_id, f.truth, f.predicted);
        }
        let _ = writeln!(out, "# accuracy\t{}/{}\t{}", self.correct, self.total, self.accuracy);
        out
    }
}

/// Leave-one-out: each row is predicted by a tree trained on all the others.
pub fn loocv(features: &FeatureMatrix, params: TreeParams) -> Result<LoocvReport, PredictError> {
    let n = features.rows.len();
    if n < 2 {
        return Err(PredictError::TooFewRows(n));
    }
    let mut per_fold = (0..n)
        .into_par_iter()
        .map(|held| {
            let train = features.subset(|i| i != held);
            let model = train_tree(&train, params)?;
            let row = &features.rows[held];
            Ok(Fold {
                session_id: row.session_id.clone(),
                truth: row.label.clone(),
                predicted: predict_label(&model, &features.values(held, params.feature))?,
            })
        })
        .collect::<Result<Vec<_>, PredictError>>()?;
    per_fold.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    let correct = per_fold.iter().filter(|f| f.truth == f.predicted).count();
    Ok(LoocvReport {
        accuracy: correct as f64 / n as f64,
        correct,
        total: n,
        per_fold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> DASymbol {
        s.parse().unwrap()
    }

    fn seq(id: &str, label: Option<&str>, syms: &[&str]) -> DASequence {
        DASequence {
            session_id: id.into(),
            group_label: label.map(str::to_string),
            symbols: syms.iter().map(|s| sym(s)).collect(),
        }
    }

    fn matrix(rows: &[(&str, &[f64])]) -> FeatureMatrix {
        let width = rows[0].1.len();
        FeatureMatrix {
            columns: (0..width).map(|i| vec![DASymbol::new("x", &format!("F{i}"))]).collect(),
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, (label, vals))| FeatureRow {
                    session_id: format!("r{i:02}"),
                    label: label.to_string(),
                    presence: vals.iter().map(|&v| u8::from(v > 0.0)).collect(),
                    frequency: vals.to_vec(),
                })
                .collect(),
        }
    }

    #[test]
    fn featurize_counts_starts() {
        let s = seq("s", Some("HP"), &["[t]a", "[t]b", "[t]a", "[t]b"]);
        let fm = featurize(
            &[s],
            &[vec![sym("[t]a"), sym("[t]b")], vec![sym("[t]b"), sym("[t]b")]],
            Some(1),
        )
        .unwrap();
        // columns: "[t]a [t]b" < "[t]b [t]b"
        assert_eq!(fm.rows[0].frequency, [0.5, 0.0]);
        assert_eq!(fm.rows[0].presence, [1, 0]);

        let whole = seq("w", Some("HP"), &["[t]a", "[t]c", "[t]b"]);
        let fm = featurize(&[whole], &[vec![sym("[t]a"), sym("[t]c"), sym("[t]b")]], Some(1)).unwrap();
        assert_eq!(fm.rows[0].frequency, [1.0 / 3.0]);
    }

    #[test]
    fn featurize_errors() {
        let s = seq("s", None, &["[t]a"]);
        assert_eq!(
            featurize(std::slice::from_ref(&s), &[vec![sym("[t]a")]], Some(1)),
            Err(PredictError::Unlabeled("s".into()))
        );
        assert_eq!(featurize(&[s], &[], Some(1)), Err(PredictError::NoPatterns));
        let a = seq("s", Some("A"), &["[t]a"]);
        assert_eq!(
            featurize(&[a.clone(), a], &[vec![sym("[t]a")]], Some(1)),
            Err(PredictError::DuplicateSession("s".into()))
        );
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&["HP", "HP", "HP"]).unwrap(), 0.0);
        assert_eq!(gini(&["HP", "HP", "HP", "HP", "LP", "LP", "LP", "LP"]).unwrap(), 0.5);
        assert_eq!(gini(&["HP", "HP", "HP", "LP"]).unwrap(), 0.375);
        assert_eq!(gini::<&str>(&[]), Err(PredictError::EmptyLabels));
    }

    #[test]
    fn separable_one_feature() {
        let fm = matrix(&[("HP", &[1.0]), ("HP", &[1.0]), ("LP", &[0.0]), ("LP", &[0.0])]);
        let params = TreeParams {
            feature: FeatureKind::Presence,
            ..Default::default()
        };
        let tree = train_tree(&fm, params).unwrap();
        assert_eq!(tree.depth(), 1);
        assert!(matches!(tree.root, Node::Split { feature: 0, threshold, .. } if threshold == 0.5));
        assert_eq!(tree.training_accuracy(&fm), 1.0);
        assert_eq!(predict_label(&tree, &[1.0]).unwrap(), "HP");
        assert_eq!(predict_label(&tree, &[0.0]).unwrap(), "LP");
        assert_eq!(
            predict_label(&tree, &[1.0, 0.0]),
            Err(PredictError::WidthMismatch { got: 2, want: 1 })
        );
        assert!(tree.render_rules().contains("if has(") && tree.render_rules().contains("→ HP (2/2)"));
    }

    #[test]
    fn identical_rows_single_leaf() {
        let fm = matrix(&[("LP", &[0.3]), ("HP", &[0.3]), ("HP", &[0.3])]);
        let tree = train_tree(&fm, TreeParams::default()).unwrap();
        assert_eq!(tree.depth(), 0);
        assert_eq!(predict_label(&tree, &[9.0]).unwrap(), "HP");
    }

    #[test]
    fn majority_tie_goes_to_smaller_label() {
        let fm = matrix(&[("LP", &[0.3]), ("HP", &[0.3])]);
        let tree = train_tree(&fm, TreeParams::default()).unwrap();
        assert_eq!(predict_label(&tree, &[0.3]).unwrap(), "HP");
    }

    #[test]
    fn single_row_is_single_leaf() {
        let fm = matrix(&[("LP", &[0.3])]);
        let tree = train_tree(&fm, TreeParams::default()).unwrap();
        assert_eq!(
            tree.root,
            Node::Leaf {
                label: "LP".into(),
                counts: BTreeMap::from([("LP".into(), 1)])
            }
        );
    }

    #[test]
    fn xor_needs_depth_two() {
        // Root: every split leaves one A and one B per side (zero gain); the
        // tie goes to feature 0 at 0.5. Each child then separates on feature 1.
        let fm = matrix(&[
            ("A", &[0.0, 0.0]),
            ("B", &[0.0, 1.0]),
            ("B", &[1.0, 0.0]),
            ("A", &[1.0, 1.0]),
        ]);
        let tree = train_tree(
            &fm,
            TreeParams {
                max_depth: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(tree.depth(), 2);
        assert!(matches!(tree.root, Node::Split { feature: 0, threshold, .. } if threshold == 0.5));
        assert_eq!(tree.training_accuracy(&fm), 1.0);

        let shallow = train_tree(
            &fm,
            TreeParams {
                max_depth: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(shallow.training_accuracy(&fm), 0.5);
    }

    #[test]
    fn min_leaf_size_respected() {
        let fm = matrix(&[("A", &[0.0]), ("B", &[1.0]), ("B", &[2.0]), ("B", &[3.0])]);
        let tree = train_tree(
            &fm,
            TreeParams {
                min_leaf_size: 2,
                ..Default::default()
            },
        )
        .unwrap();
        fn min_leaf(n: &Node) -> usize {
            match n {
                Node::Leaf { counts, .. } => counts.values().sum(),
                Node::Split { left, right, .. } => min_leaf(left).min(min_leaf(right)),
            }
        }
        assert!(min_leaf(&tree.root) >= 2);
        assert!(train_tree(
            &fm,
            TreeParams {
                min_leaf_size: 0,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn loocv_cases() {
        let sep = matrix(&[("HP", &[1.0]), ("HP", &[1.0]), ("LP", &[0.0]), ("LP", &[0.0])]);
        assert_eq!(loocv(&sep, TreeParams::default()).unwrap().accuracy, 1.0);

        // identical features: each fold predicts the majority of the other three.
        // Holding out an A leaves {A,A,B} -> A (right); holding out B leaves {A,A,A} -> A (wrong).
        let flat = matrix(&[("A", &[0.5]), ("A", &[0.5]), ("A", &[0.5]), ("B", &[0.5])]);
        let r = loocv(&flat, TreeParams::default()).unwrap();
        assert_eq!((r.correct, r.total), (3, 4));
        assert_eq!(r.accuracy, 0.75);
        // {A,A,B,B}: every fold sees the other label as majority
        let even = matrix(&[("A", &[0.5]), ("A", &[0.5]), ("B", &[0.5]), ("B", &[0.5])]);
        assert_eq!(loocv(&even, TreeParams::default()).unwrap().accuracy, 0.0);

        let one = matrix(&[("A", &[0.5])]);
        assert_eq!(loocv(&one, TreeParams::default()), Err(PredictError::TooFewRows(1)));
    }

    #[test]
    fn tree_json_round_trip() {
        let fm = matrix(&[("A", &[0.0, 0.2]), ("B", &[0.1, 0.0]), ("A", &[0.3, 0.4])]);
        let tree = train_tree(&fm, TreeParams::default()).unwrap();
        let back: TreeModel = serde_json::from_str(&tree.to_json()).unwrap();
        assert_eq!(back, tree);
    }
}
