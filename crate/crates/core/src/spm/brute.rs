//! Exhaustive reference miner for small databases.

use std::collections::BTreeSet;

use super::{support_count, MiningParams, Pattern, PatternSet, SequenceDatabase, SpmError};

/// Collects every symbol list realised by some gap-respecting position tuple
/// of length `1..=max_len` in `seq`.
fn realised_lists(seq: &[u32], max_gap: Option<usize>, max_len: usize, out: &mut BTreeSet<Vec<u32>>) {
    fn walk(
        seq: &[u32],
        last: usize,
        max_gap: Option<usize>,
        max_len: usize,
        cur: &mut Vec<u32>,
        out: &mut BTreeSet<Vec<u32>>,
    ) {
        out.insert(cur.clone());
        if cur.len() == max_len {
            return;
        }
        let hi = max_gap.map_or(seq.len(), |g| (last + g + 1).min(seq.len()));
        for next in last + 1..hi {
            cur.push(seq[next]);
            walk(seq, next, max_gap, max_len, cur, out);
            cur.pop();
        }
    }
    if max_len == 0 {
        return;
    }
    for start in 0..seq.len() {
        let mut cur = vec![seq[start]];
        walk(seq, start, max_gap, max_len, &mut cur, out);
    }
}

/// Enumerates every candidate pattern and counts its support directly.
///
/// Candidates are all symbol lists realised somewhere in the database, a
/// superset of every pattern with nonzero support. Only meant for small
/// inputs: the candidate count is exponential in sequence length.
pub fn mine_bruteforce(db: &SequenceDatabase, params: &MiningParams) -> Result<PatternSet, SpmError> {
    params.validate()?;
    let n = db.len();
    let threshold = params.absolute_threshold(n);
    let longest = db.sequences().iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let max_len = params.max_len.map_or(longest, |m| m.min(longest));

    let mut candidates = BTreeSet::new();
    for (_, seq) in db.sequences() {
        realised_lists(seq, params.max_gap, max_len, &mut candidates);
    }
    let mut patterns = Vec::new();
    for cand in candidates {
        if cand.len() < params.min_len {
            continue;
        }
        let (support, supporting_ids) = support_count(db, &cand, params.max_gap)?;
        if support >= threshold {
            patterns.push(Pattern {
                symbols: cand,
                support,
                supporting_ids,
            });
        }
    }
    Ok(PatternSet::new(patterns, n, threshold))
}
