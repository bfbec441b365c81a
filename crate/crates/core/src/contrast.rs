//! Group-unique and shared frequent patterns between two labelled groups.
//!
//! "Unique to A" means frequent in A and not frequent in B. The raw support
//! in the other group is always reported so the claim can be audited.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::spm::{
    canonical_cmp, mine_with, support_count, MineOptions, MiningParams, PatternSet, SequenceDatabase, SpmError,
    SymbolTable,
};

#[derive(Debug, Error, PartialEq)]
pub enum ContrastError {
    #[error("the two groups do not share a symbol table")]
    MismatchedTables,
    #[error(transparent)]
    Spm(#[from] SpmError),
}

/// `rel_a / rel_b`, infinite when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthRate {
    Finite(f64),
    Infinite,
}

impl GrowthRate {
    fn of(rel_a: f64, rel_b: f64) -> Self {
        if rel_b == 0.0 {
            GrowthRate::Infinite
        } else {
            GrowthRate::Finite(rel_a / rel_b)
        }
    }

    pub fn render(&self) -> String {
        match self {
            GrowthRate::Finite(v) => format!("{v}"),
            GrowthRate::Infinite => "∞".into(),
        }
    }
}

impl Serialize for GrowthRate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GrowthRate::Finite(v) => s.serialize_f64(*v),
            GrowthRate::Infinite => s.serialize_str("∞"),
        }
    }
}

/// One contrasted pattern, with supports in both groups. For unique entries
/// the `other` support is the raw count in the group where it is not frequent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastEntry {
    #[serde(skip)]
    pub pattern: Vec<u32>,
    pub symbols: Vec<String>,
    pub support_a: usize,
    pub support_b: usize,
    pub rel_support_a: f64,
    pub rel_support_b: f64,
    pub growth_rate: GrowthRate,
    pub supporting_ids_a: Vec<String>,
    pub supporting_ids_b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastReport {
    pub group_a: String,
    pub group_b: String,
    pub sequences_a: usize,
    pub sequences_b: usize,
    pub threshold_a: usize,
    pub threshold_b: usize,
    pub params: MiningParams,
    pub unique_to_a: Vec<ContrastEntry>,
    pub unique_to_b: Vec<ContrastEntry>,
    pub shared: Vec<ContrastEntry>,
}

struct Side<'a> {
    db: &'a SequenceDatabase,
    set: PatternSet,
}

fn entry(
    pattern: &[u32],
    table: &SymbolTable,
    a: (usize, Vec<String>, usize),
    b: (usize, Vec<String>, usize),
) -> ContrastEntry {
    let rel_a = a.0 as f64 / a.2 as f64;
    let rel_b = b.0 as f64 / b.2 as f64;
    ContrastEntry {
        pattern: pattern.to_vec(),
        symbols: table.decode(pattern).expect("ids come from the table"),
        support_a: a.0,
        support_b: b.0,
        rel_support_a: rel_a,
        rel_support_b: rel_b,
        growth_rate: GrowthRate::of(rel_a, rel_b),
        supporting_ids_a: a.1,
        supporting_ids_b: b.1,
    }
}

/// Orders by descending `|rel_a - rel_b|`, ties in canonical pattern order.
/// Compared exactly as `|sa * nb - sb * na|`, the common denominator being `na * nb`.
fn order(entries: &mut [ContrastEntry], na: usize, nb: usize) {
    let key = |e: &ContrastEntry| (e.support_a * nb).abs_diff(e.support_b * na);
    entries.sort_by(|x, y| match key(y).cmp(&key(x)) {
        Ordering::Equal => canonical_cmp(&x.pattern, &y.pattern),
        o => o,
    });
}

pub fn contrast(
    db_a: &SequenceDatabase,
    db_b: &SequenceDatabase,
    params: &MiningParams,
    group_a: &str,
    group_b: &str,
) -> Result<ContrastReport, ContrastError> {
    contrast_with(db_a, db_b, params, group_a, group_b, MineOptions::default())
}

pub fn contrast_with(
    db_a: &SequenceDatabase,
    db_b: &SequenceDatabase,
    params: &MiningParams,
    group_a: &str,
    group_b: &str,
    options: MineOptions,
) -> Result<ContrastReport, ContrastError> {
    if db_a.table() != db_b.table() {
        return Err(ContrastError::MismatchedTables);
    }
    let (ra, rb) = if options.parallel {
        rayon::join(|| mine_with(db_a, params, options), || mine_with(db_b, params, options))
    } else {
        (mine_with(db_a, params, options), mine_with(db_b, params, options))
    };
    let a = Side { db: db_a, set: ra?.0 };
    let b = Side { db: db_b, set: rb?.0 };
    let table = db_a.table();
    let (na, nb) = (db_a.len(), db_b.len());

    let mut unique_to_a = Vec::new();
    let mut unique_to_b = Vec::new();
    let mut shared = Vec::new();
    for p in &a.set.patterns {
        let a_side = (p.support, p.supporting_ids.clone(), na);
        match b.set.get(&p.symbols) {
            Some(q) => shared.push(entry(
                &p.symbols,
                table,
                a_side,
                (q.support, q.supporting_ids.clone(), nb),
            )),
            None => {
                let (sb, ids) = support_count(b.db, &p.symbols, params.max_gap)?;
                unique_to_a.push(entry(&p.symbols, table, a_side, (sb, ids, nb)));
            }
        }
    }
    for q in &b.set.patterns {
        if a.set.get(&q.symbols).is_none() {
            let (sa, ids) = support_count(a.db, &q.symbols, params.max_gap)?;
            unique_to_b.push(entry(
                &q.symbols,
                table,
                (sa, ids, na),
                (q.support, q.supporting_ids.clone(), nb),
            ));
        }
    }
    order(&mut unique_to_a, na, nb);
    order(&mut unique_to_b, na, nb);
    order(&mut shared, na, nb);

    Ok(ContrastReport {
        group_a: group_a.into(),
        group_b: group_b.into(),
        sequences_a: na,
        sequences_b: nb,
        threshold_a: a.set.threshold,
        threshold_b: b.set.threshold,
        params: *params,
        unique_to_a,
        unique_to_b,
        shared,
    })
}

impl ContrastReport {
    /// All contrasted patterns, each once, in canonical order.
    pub fn all_patterns(&self) -> Vec<Vec<String>> {
        let mut all: Vec<&ContrastEntry> = self
            .unique_to_a
            .iter()
            .chain(&self.unique_to_b)
            .chain(&self.shared)
            .collect();
        all.sort_by(|x, y| canonical_cmp(&x.pattern, &y.pattern));
        all.into_iter().map(|e| e.symbols.clone()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// `section<TAB>pattern<TAB>support_a<TAB>support_b<TAB>rel_a<TAB>rel_b<TAB>growth_rate`
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "section\tpattern\tsupport_{a}\tsupport_{b}\trel_support_{a}\trel_support_{b}\tgrowth_rate\n",
            a = self.group_a,
            b = self.group_b
        );
        let sections = [
            (format!("unique_to_{}", self.group_a), &self.unique_to_a),
            (format!("unique_to_{}", self.group_b), &self.unique_to_b),
            ("shared".to_string(), &self.shared),
        ];
        for (name, entries) in sections {
            for e in entries {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    name,
                    e.symbols.join(" "),
                    e.support_a,
                    e.support_b,
                    e.rel_support_a,
                    e.rel_support_b,
                    e.growth_rate.render()
                );
            }
        }
        out
    }

    /// Markdown summary with at most `top_k` rows per section.
    pub fn to_markdown(&self, top_k: usize) -> String {
        let (a, b) = (&self.group_a, &self.group_b);
        let mut out = format!(
            "Groups: **{a}** ({} sequences, threshold {}) vs **{b}** ({} sequences, threshold {})\n\n",
            self.sequences_a, self.threshold_a, self.sequences_b, self.threshold_b
        );
        let sections = [
            (format!("Unique to {a}"), &self.unique_to_a),
            (format!("Unique to {b}"), &self.unique_to_b),
            ("Shared".to_string(), &self.shared),
        ];
        for (title, entries) in sections {
            let _ = writeln!(out, "### {title} ({})\n", entries.len());
            if entries.is_empty() {
                out.push_str("_none_\n\n");
                continue;
            }
            let _ = writeln!(out, "| pattern | {a} | {b} | growth |\n|---|---:|---:|---:|");
            for e in entries.iter().take(top_k) {
                let _ = writeln!(
                    out,
                    "| `{}` | {}/{} | {}/{} | {} |",
                    e.symbols.join(" - "),
                    e.support_a,
                    self.sequences_a,
                    e.support_b,
                    self.sequences_b,
                    match e.growth_rate {
                        GrowthRate::Finite(v) => format!("{v:.2}"),
                        GrowthRate::Infinite => "∞".into(),
                    }
                );
            }
            if entries.len() > top_k {
                let _ = writeln!(out, "\n_{} more not shown_", entries.len() - top_k);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dbs(a: &[(&str, &[&str])], b: &[(&str, &[&str])]) -> (SequenceDatabase, SequenceDatabase) {
        let conv = |g: &[(&str, &[&str])]| -> Vec<(String, Vec<String>)> {
            g.iter()
                .map(|(id, s)| (id.to_string(), s.iter().map(|x| x.to_string()).collect()))
                .collect()
        };
        let (ra, rb) = (conv(a), conv(b));
        let table = SymbolTable::from_symbols(ra.iter().chain(&rb).flat_map(|(_, s)| s.clone()));
        (
            SequenceDatabase::with_table(table.clone(), &ra).unwrap(),
            SequenceDatabase::with_table(table, &rb).unwrap(),
        )
    }

    fn names(entries: &[ContrastEntry]) -> Vec<String> {
        entries.iter().map(|e| e.symbols.join(" ")).collect()
    }

    #[test]
    fn set_algebra() {
        // frequent(A) = {x y, y z}, frequent(B) = {y z, z w}
        let (a, b) = dbs(
            &[("a1", &["x", "y", "z"]), ("a2", &["x", "y", "z"])],
            &[("b1", &["y", "z", "w"]), ("b2", &["y", "z", "w"])],
        );
        let p = MiningParams {
            min_support: 1.0,
            max_len: Some(2),
            ..Default::default()
        };
        let r = contrast(&a, &b, &p, "A", "B").unwrap();
        assert_eq!(names(&r.unique_to_a), ["x y"]);
        assert_eq!(names(&r.unique_to_b), ["z w"]);
        assert_eq!(names(&r.shared), ["y z"]);
        assert_eq!(r.unique_to_a[0].support_b, 0);
        assert_eq!(r.unique_to_a[0].growth_rate, GrowthRate::Infinite);
    }

    #[test]
    fn identical_groups_share_everything() {
        let g: &[(&str, &[&str])] = &[("1", &["a", "b", "a"]), ("2", &["a", "b"])];
        let g2: &[(&str, &[&str])] = &[("3", &["a", "b", "a"]), ("4", &["a", "b"])];
        let (a, b) = dbs(g, g2);
        let r = contrast(&a, &b, &MiningParams::default(), "A", "B").unwrap();
        assert!(r.unique_to_a.is_empty() && r.unique_to_b.is_empty());
        assert!(!r.shared.is_empty());
        assert!(r.shared.iter().all(|e| e.growth_rate == GrowthRate::Finite(1.0)));
    }

    #[test]
    fn mismatched_tables_rejected() {
        let a = SequenceDatabase::from_symbols(&[("1".to_string(), vec!["a", "b"])]).unwrap();
        let b = SequenceDatabase::from_symbols(&[("2".to_string(), vec!["a", "c"])]).unwrap();
        assert_eq!(
            contrast(&a, &b, &MiningParams::default(), "A", "B").unwrap_err(),
            ContrastError::MismatchedTables
        );
    }

    #[test]
    fn unique_means_not_frequent_rather_than_absent() {
        // "a b" occurs in one of three B sequences: below B's threshold of 2
        let (a, b) = dbs(
            &[("a1", &["a", "b"]), ("a2", &["a", "b"])],
            &[("b1", &["a", "b"]), ("b2", &["b", "a"]), ("b3", &["b", "a"])],
        );
        let r = contrast(&a, &b, &MiningParams::default(), "A", "B").unwrap();
        assert_eq!(names(&r.unique_to_a), ["a b"]);
        assert_eq!(r.unique_to_a[0].support_b, 1);
        assert_eq!(r.unique_to_a[0].supporting_ids_b, ["b1"]);
        assert!(r.to_tsv().contains("unique_to_A\ta b\t2\t1\t1\t"));
        assert!(r.to_markdown(5).contains("### Unique to B (1)"));
    }
}
