//! Gap-constrained sequential pattern mining over dialogue-act sequences.
//!
//! A pattern `<x1 .. xk>` occurs in a sequence at positions `p1 < .. < pk`
//! when every `S[pj] = xj` and every `p(j+1) - pj <= max_gap`. With
//! `max_gap = 1` the symbols must sit on consecutive turns. Support is the
//! number of sequences holding at least one occurrence.
//!
//! [`mine`] is a depth-first prefix-extension search over a vertical bitset
//! index ([`index::OccurrenceIndex`]). Extensions are pruned when their
//! support falls below the threshold (a pattern's support never exceeds its
//! prefix's) and, optionally, by a [`index::CoOccurrenceMap`] of symbol pairs
//! that are frequent within the gap bound. [`mine_bruteforce`] enumerates
//! candidates exhaustively and is the reference the miner is tested against.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::DASequence;

mod brute;
pub mod index;
mod miner;

pub use brute::mine_bruteforce;
pub use miner::{mine, mine_with, MineOptions, MineStats};

#[derive(Debug, Error, PartialEq)]
pub enum SpmError {
    #[error("sequence `{0}` is empty")]
    EmptySequence(String),
    #[error("database has no sequences")]
    EmptyDatabase,
    #[error("duplicate sequence id `{0}`")]
    DuplicateId(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown symbol id {0}")]
    UnknownSymbolId(u32),
    #[error("pattern is empty")]
    EmptyPattern,
    #[error("invalid mining parameters: {0}")]
    InvalidParams(String),
}

/// Bidirectional map between rendered symbols and dense ids. Ids follow the
/// sorted order of the rendered form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolTable {
    symbols: Vec<String>,
    ids: HashMap<String, u32>,
}

impl SymbolTable {
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        symbols.sort();
        symbols.dedup();
        let ids = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        SymbolTable { symbols, ids }
    }

    /// Table over every symbol of `sequences`.
    pub fn from_sequences(sequences: &[DASequence]) -> Self {
        Self::from_symbols(sequences.iter().flat_map(|s| s.symbols.iter().map(|x| x.render())))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn id(&self, symbol: &str) -> Option<u32> {
        self.ids.get(symbol).copied()
    }

    pub fn symbol(&self, id: u32) -> Option<&str> {
        self.symbols.get(id as usize).map(String::as_str)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn encode(&self, symbols: &[impl AsRef<str>]) -> Result<Vec<u32>, SpmError> {
        symbols
            .iter()
            .map(|s| {
                self.id(s.as_ref())
                    .ok_or_else(|| SpmError::UnknownSymbol(s.as_ref().into()))
            })
            .collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Result<Vec<String>, SpmError> {
        ids.iter()
            .map(|&i| self.symbol(i).map(str::to_string).ok_or(SpmError::UnknownSymbolId(i)))
            .collect()
    }

    /// Renders a pattern as space-separated symbols.
    pub fn render(&self, ids: &[u32]) -> String {
        ids.iter()
            .map(|&i| self.symbol(i).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDatabase {
    table: SymbolTable,
    sequences: Vec<(String, Vec<u32>)>,
}

impl SequenceDatabase {
    /// Builds a database over its own symbol table.
    pub fn from_symbols<S: AsRef<str>>(sequences: &[(String, Vec<S>)]) -> Result<Self, SpmError> {
        let table = SymbolTable::from_symbols(
            sequences
                .iter()
                .flat_map(|(_, s)| s.iter().map(|x| x.as_ref().to_string())),
        );
        Self::with_table(table, sequences)
    }

    /// Builds a database over a shared symbol table (e.g. one built from the
    /// union of several groups).
    pub fn with_table<S: AsRef<str>>(table: SymbolTable, sequences: &[(String, Vec<S>)]) -> Result<Self, SpmError> {
        if sequences.is_empty() {
            return Err(SpmError::EmptyDatabase);
        }
        let mut seen = HashSet::new();
        let mut encoded = Vec::with_capacity(sequences.len());
        for (id, seq) in sequences {
            if seq.is_empty() {
                return Err(SpmError::EmptySequence(id.clone()));
            }
            if !seen.insert(id.as_str()) {
                return Err(SpmError::DuplicateId(id.clone()));
            }
            encoded.push((id.clone(), table.encode(seq)?));
        }
        Ok(SequenceDatabase {
            table,
            sequences: encoded,
        })
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn sequences(&self) -> &[(String, Vec<u32>)] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn decode(&self) -> Vec<(String, Vec<String>)> {
        self.sequences
            .iter()
            .map(|(id, s)| (id.clone(), self.table.decode(s).expect("ids come from the table")))
            .collect()
    }
}

fn rendered(sequences: &[DASequence]) -> Vec<(String, Vec<String>)> {
    sequences
        .iter()
        .map(|s| (s.session_id.clone(), s.symbols.iter().map(|x| x.render()).collect()))
        .collect()
}

/// Builds a database from annotated sequences, numbering symbols by their
/// rendered form.
pub fn build_database(sequences: &[DASequence]) -> Result<SequenceDatabase, SpmError> {
    SequenceDatabase::from_symbols(&rendered(sequences))
}

pub fn build_database_with_table(table: SymbolTable, sequences: &[DASequence]) -> Result<SequenceDatabase, SpmError> {
    SequenceDatabase::with_table(table, &rendered(sequences))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    /// Relative threshold in `(0, 1]`.
    pub min_support: f64,
    /// `None` = unbounded.
    pub max_gap: Option<usize>,
    pub min_len: usize,
    pub max_len: Option<usize>,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            min_support: 0.5,
            max_gap: Some(1),
            min_len: 2,
            max_len: None,
        }
    }
}

impl MiningParams {
    pub fn validate(&self) -> Result<(), SpmError> {
        let bad = |m: &str| Err(SpmError::InvalidParams(m.into()));
        if !(self.min_support.is_finite() && self.min_support > 0.0 && self.min_support <= 1.0) {
            return bad("min_support must lie in (0, 1]");
        }
        if self.max_gap == Some(0) {
            return bad("max_gap must be at least 1");
        }
        if self.min_len == 0 {
            return bad("min_len must be at least 1");
        }
        if let Some(m) = self.max_len {
            if m < self.min_len {
                return bad("max_len must be at least min_len");
            }
        }
        Ok(())
    }

    /// `ceil(min_support * n)`, at least 1.
    pub fn absolute_threshold(&self, n: usize) -> usize {
        // the epsilon keeps e.g. 0.3 * 10 = 3.0000000000000004 at 3
        let raw = (self.min_support * n as f64 - 1e-9).ceil();
        (raw.max(1.0)) as usize
    }
}

/// Leftmost-reachable check: can an occurrence of `pattern` start at `start`?
pub fn occurs_at(seq: &[u32], pattern: &[u32], start: usize, max_gap: Option<usize>) -> bool {
    if pattern.is_empty() || start >= seq.len() || seq[start] != pattern[0] {
        return false;
    }
    let mut reach = vec![false; seq.len()];
    reach[start] = true;
    advance(seq, &pattern[1..], reach, max_gap)
}

/// Does `pattern` occur anywhere in `seq`?
pub fn occurs(seq: &[u32], pattern: &[u32], max_gap: Option<usize>) -> bool {
    let Some(&first) = pattern.first() else {
        return false;
    };
    let reach: Vec<bool> = seq.iter().map(|&s| s == first).collect();
    advance(seq, &pattern[1..], reach, max_gap)
}

/// `reach[p]` marks positions where the already matched part can end.
fn advance(seq: &[u32], rest: &[u32], mut reach: Vec<bool>, max_gap: Option<usize>) -> bool {
    for &sym in rest {
        let mut next = vec![false; seq.len()];
        let mut last_end: Option<usize> = None;
        for q in 0..seq.len() {
            if seq[q] == sym {
                if let Some(p) = last_end {
                    if max_gap.is_none_or(|g| q - p <= g) {
                        next[q] = true;
                    }
                }
            }
            if reach[q] {
                last_end = Some(q);
            }
        }
        if !next.iter().any(|&b| b) {
            return false;
        }
        reach = next;
    }
    reach.iter().any(|&b| b)
}

/// Support of `pattern` and the sorted ids of its supporting sequences.
pub fn support_count(
    db: &SequenceDatabase,
    pattern: &[u32],
    max_gap: Option<usize>,
) -> Result<(usize, Vec<String>), SpmError> {
    if pattern.is_empty() {
        return Err(SpmError::EmptyPattern);
    }
    if let Some(&bad) = pattern.iter().find(|&&x| x as usize >= db.table.len()) {
        return Err(SpmError::UnknownSymbolId(bad));
    }
    let mut ids: Vec<String> = db
        .sequences
        .iter()
        .filter(|(_, s)| occurs(s, pattern, max_gap))
        .map(|(id, _)| id.clone())
        .collect();
    ids.sort();
    Ok((ids.len(), ids))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub symbols: Vec<u32>,
    pub support: usize,
    /// Sorted.
    pub supporting_ids: Vec<String>,
}

/// Length first, then lexicographic over symbol ids.
pub fn canonical_cmp(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    pub patterns: Vec<Pattern>,
    pub sequence_count: usize,
    pub threshold: usize,
}

impl PatternSet {
    pub fn new(mut patterns: Vec<Pattern>, sequence_count: usize, threshold: usize) -> Self {
        patterns.sort_by(|a, b| canonical_cmp(&a.symbols, &b.symbols));
        PatternSet {
            patterns,
            sequence_count,
            threshold,
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, symbols: &[u32]) -> Option<&Pattern> {
        self.patterns
            .binary_search_by(|p| canonical_cmp(&p.symbols, symbols))
            .ok()
            .map(|i| &self.patterns[i])
    }

    pub fn rel_support(&self, p: &Pattern) -> f64 {
        p.support as f64 / self.sequence_count as f64
    }

    pub fn to_record(&self, table: &SymbolTable, params: &MiningParams, group: Option<&str>) -> PatternSetRecord {
        PatternSetRecord {
            group: group.map(str::to_string),
            sequence_count: self.sequence_count,
            min_support: params.min_support,
            absolute_threshold: self.threshold,
            max_gap: params.max_gap,
            min_len: params.min_len,
            max_len: params.max_len,
            patterns: self
                .patterns
                .iter()
                .map(|p| PatternRecord {
                    symbols: table.decode(&p.symbols).expect("ids come from the table"),
                    support: p.support,
                    rel_support: self.rel_support(p),
                    supporting_ids: p.supporting_ids.clone(),
                })
                .collect(),
        }
    }

    /// `pattern<TAB>support<TAB>rel_support`, header first.
    pub fn to_tsv(&self, table: &SymbolTable) -> String {
        let mut out = String::from("pattern\tsupport\trel_support\n");
        for p in &self.patterns {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                table.render(&p.symbols),
                p.support,
                self.rel_support(p)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub symbols: Vec<String>,
    pub support: usize,
    pub rel_support: f64,
    pub supporting_ids: Vec<String>,
}

/// Serialized form of a [`PatternSet`], symbols rendered as `[t]Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSetRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub sequence_count: usize,
    pub min_support: f64,
    pub absolute_threshold: usize,
    pub max_gap: Option<usize>,
    pub min_len: usize,
    pub max_len: Option<usize>,
    pub patterns: Vec<PatternRecord>,
}
