//! Depth-first prefix-extension miner over the vertical index.

use rayon::prelude::*;

use super::index::{CoOccurrenceMap, OccurrenceIndex, PositionSet};
use super::{MiningParams, Pattern, PatternSet, SequenceDatabase, SpmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MineOptions {
    pub cmap_pruning: bool,
    pub parallel: bool,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            cmap_pruning: true,
            parallel: true,
        }
    }
}

/// Work counters from one mining run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MineStats {
    /// Candidate extensions whose support was computed against the index.
    pub expansions: u64,
    /// Candidate extensions skipped by the co-occurrence map.
    pub cmap_pruned: u64,
}

impl std::ops::AddAssign for MineStats {
    fn add_assign(&mut self, o: Self) {
        self.expansions += o.expansions;
        self.cmap_pruned += o.cmap_pruned;
    }
}

/// Projection of a pattern: per supporting sequence, the positions where an
/// occurrence of the pattern can end.
type Projection = Vec<(usize, PositionSet)>;

struct Search<'a> {
    db: &'a SequenceDatabase,
    index: &'a OccurrenceIndex,
    cmap: Option<&'a CoOccurrenceMap>,
    params: &'a MiningParams,
    threshold: usize,
    depth_limit: usize,
    candidates: &'a [u32],
}

impl Search<'_> {
    fn emit(&self, prefix: &[u32], proj: &Projection, out: &mut Vec<Pattern>) {
        if prefix.len() >= self.params.min_len {
            let mut ids: Vec<String> = proj.iter().map(|(s, _)| self.db.sequences()[*s].0.clone()).collect();
            ids.sort();
            out.push(Pattern {
                symbols: prefix.to_vec(),
                support: proj.len(),
                supporting_ids: ids,
            });
        }
    }

    fn cmap_allows(&self, prefix: &[u32], x: u32) -> bool {
        let Some(cmap) = self.cmap else { return true };
        let last = *prefix.last().expect("prefix nonempty");
        if !cmap.allows(last, x) {
            return false;
        }
        // Without a gap bound every earlier symbol also precedes x.
        if self.params.max_gap.is_none() {
            return prefix.iter().all(|&p| cmap.allows(p, x));
        }
        true
    }

    fn grow(&self, prefix: &mut Vec<u32>, proj: &Projection, out: &mut Vec<Pattern>, stats: &mut MineStats) {
        self.emit(prefix, proj, out);
        if prefix.len() >= self.depth_limit {
            return;
        }
        for &x in self.candidates {
            if !self.cmap_allows(prefix, x) {
                stats.cmap_pruned += 1;
                continue;
            }
            stats.expansions += 1;
            let mut next: Projection = Vec::new();
            for (remaining, (s, ends)) in proj.iter().enumerate() {
                // not enough sequences left to reach the threshold
                if next.len() + (proj.len() - remaining) < self.threshold {
                    break;
                }
                let ext = ends.extend(self.index.positions(x, *s), self.params.max_gap);
                if !ext.is_empty() {
                    next.push((*s, ext));
                }
            }
            if next.len() >= self.threshold {
                prefix.push(x);
                self.grow(prefix, &next, out, stats);
                prefix.pop();
            }
        }
    }
}

/// Mines every frequent pattern under `params`.
pub fn mine(db: &SequenceDatabase, params: &MiningParams) -> Result<PatternSet, SpmError> {
    mine_with(db, params, MineOptions::default()).map(|(set, _)| set)
}

pub fn mine_with(
    db: &SequenceDatabase,
    params: &MiningParams,
    options: MineOptions,
) -> Result<(PatternSet, MineStats), SpmError> {
    params.validate()?;
    let n = db.len();
    let threshold = params.absolute_threshold(n);
    if threshold > n {
        return Ok((PatternSet::new(Vec::new(), n, threshold), MineStats::default()));
    }
    let index = OccurrenceIndex::build(db);
    let longest = db.sequences().iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let depth_limit = params.max_len.map_or(longest, |m| m.min(longest));

    let frequent: Vec<u32> = (0..index.alphabet_len() as u32)
        .filter(|&x| index.containing(x).len() >= threshold)
        .collect();
    let cmap = options
        .cmap_pruning
        .then(|| CoOccurrenceMap::build(db, params.max_gap, threshold));
    let search = Search {
        db,
        index: &index,
        cmap: cmap.as_ref(),
        params,
        threshold,
        depth_limit,
        candidates: &frequent,
    };

    let run_root = |&x: &u32| {
        let proj: Projection = index
            .containing(x)
            .iter()
            .map(|&s| (s, index.positions(x, s).clone()))
            .collect();
        let mut out = Vec::new();
        let mut stats = MineStats::default();
        let mut prefix = vec![x];
        search.grow(&mut prefix, &proj, &mut out, &mut stats);
        (out, stats)
    };
    let parts: Vec<(Vec<Pattern>, MineStats)> = if options.parallel {
        frequent.par_iter().map(run_root).collect()
    } else {
        frequent.iter().map(run_root).collect()
    };

    let mut patterns = Vec::new();
    let mut stats = MineStats::default();
    for (p, s) in parts {
        patterns.extend(p);
        stats += s;
    }
    Ok((PatternSet::new(patterns, n, threshold), stats))
}
