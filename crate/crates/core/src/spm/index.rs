//! Vertical occurrence index and co-occurrence pruning map.

use super::SequenceDatabase;

/// Fixed-width set of positions within one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionSet {
    words: Vec<u64>,
    len: usize,
}

impl PositionSet {
    pub fn new(len: usize) -> Self {
        PositionSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, pos: usize) {
        debug_assert!(pos < self.len);
        self.words[pos / 64] |= 1 << (pos % 64);
    }

    pub fn contains(&self, pos: usize) -> bool {
        pos < self.len && self.words[pos / 64] & (1 << (pos % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    fn mask_tail(&mut self) {
        let extra = self.words.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    /// Shifts every position up by `by`, dropping those that fall off the end.
    fn shifted_up(&self, by: usize) -> PositionSet {
        let mut out = PositionSet::new(self.len);
        let (word_shift, bit_shift) = (by / 64, by % 64);
        for i in (word_shift..self.words.len()).rev() {
            let src = i - word_shift;
            let mut w = self.words[src] << bit_shift;
            if bit_shift > 0 && src > 0 {
                w |= self.words[src - 1] >> (64 - bit_shift);
            }
            out.words[i] = w;
        }
        out.mask_tail();
        out
    }

    fn or_assign(&mut self, other: &PositionSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    fn and_assign(&mut self, other: &PositionSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    /// Positions `q` with `1 <= q - p <= max_gap` for some member `p`
    /// (`None` = unbounded gap, i.e. any later position).
    pub fn successors(&self, max_gap: Option<usize>) -> PositionSet {
        match max_gap {
            None => {
                let mut out = PositionSet::new(self.len);
                if let Some(f) = self.first() {
                    for pos in f + 1..self.len {
                        out.insert(pos);
                    }
                }
                out
            }
            Some(gap) => {
                // acc covers shifts 1..=covered; double until the next step would overshoot
                let mut acc = self.shifted_up(1);
                let mut covered = 1;
                while covered * 2 <= gap && covered < self.len {
                    let s = acc.shifted_up(covered);
                    acc.or_assign(&s);
                    covered *= 2;
                }
                if covered < gap && covered < self.len {
                    let s = acc.shifted_up(gap - covered);
                    acc.or_assign(&s);
                }
                acc
            }
        }
    }

    /// `self.successors(max_gap) ∩ occurrences`.
    pub fn extend(&self, occurrences: &PositionSet, max_gap: Option<usize>) -> PositionSet {
        let mut next = self.successors(max_gap);
        next.and_assign(occurrences);
        next
    }
}

/// Per symbol, per sequence: the positions where the symbol occurs.
#[derive(Debug, Clone)]
pub struct OccurrenceIndex {
    /// `occ[symbol][sequence]`
    occ: Vec<Vec<PositionSet>>,
    /// Sequences containing each symbol at least once, ascending.
    containing: Vec<Vec<usize>>,
}

impl OccurrenceIndex {
    pub fn build(db: &SequenceDatabase) -> Self {
        let alphabet = db.table().len();
        let mut occ: Vec<Vec<PositionSet>> = (0..alphabet)
            .map(|_| db.sequences().iter().map(|(_, s)| PositionSet::new(s.len())).collect())
            .collect();
        for (si, (_, seq)) in db.sequences().iter().enumerate() {
            for (pos, &sym) in seq.iter().enumerate() {
                occ[sym as usize][si].insert(pos);
            }
        }
        let containing = occ
            .iter()
            .map(|per_seq| {
                per_seq
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_empty())
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        OccurrenceIndex { occ, containing }
    }

    pub fn positions(&self, symbol: u32, sequence: usize) -> &PositionSet {
        &self.occ[symbol as usize][sequence]
    }

    pub fn containing(&self, symbol: u32) -> &[usize] {
        &self.containing[symbol as usize]
    }

    pub fn alphabet_len(&self) -> usize {
        self.occ.len()
    }
}

/// For each ordered pair `(a, b)`: whether `b` follows `a` within the gap
/// bound in at least `threshold` sequences.
#[derive(Debug, Clone)]
pub struct CoOccurrenceMap {
    alphabet: usize,
    frequent: Vec<bool>,
}

impl CoOccurrenceMap {
    pub fn build(db: &SequenceDatabase, max_gap: Option<usize>, threshold: usize) -> Self {
        let alphabet = db.table().len();
        let mut counts = vec![0usize; alphabet * alphabet];
        let mut seen = vec![false; alphabet * alphabet];
        let mut touched: Vec<usize> = Vec::new();
        for (_, seq) in db.sequences() {
            for (j, &b) in seq.iter().enumerate() {
                let lo = match max_gap {
                    Some(g) => j.saturating_sub(g),
                    None => 0,
                };
                for &a in &seq[lo..j] {
                    let k = a as usize * alphabet + b as usize;
                    if !seen[k] {
                        seen[k] = true;
                        touched.push(k);
                    }
                }
            }
            for k in touched.drain(..) {
                seen[k] = false;
                counts[k] += 1;
            }
        }
        CoOccurrenceMap {
            alphabet,
            frequent: counts.into_iter().map(|c| c >= threshold).collect(),
        }
    }

    pub fn allows(&self, a: u32, b: u32) -> bool {
        self.frequent[a as usize * self.alphabet + b as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(len: usize, members: &[usize]) -> PositionSet {
        let mut s = PositionSet::new(len);
        for &m in members {
            s.insert(m);
        }
        s
    }

    fn naive_successors(s: &PositionSet, gap: Option<usize>) -> Vec<usize> {
        (0..s.len())
            .filter(|&q| s.iter().any(|p| q > p && gap.is_none_or(|g| q - p <= g)))
            .collect()
    }

    #[test]
    fn successors_match_naive_across_word_boundaries() {
        let cases: &[(usize, &[usize])] = &[(10, &[0, 3]), (70, &[5, 62, 63]), (200, &[0, 64, 127, 190]), (1, &[0])];
        for &(len, members) in cases {
            let s = set(len, members);
            for gap in [
                Some(1),
                Some(2),
                Some(3),
                Some(5),
                Some(64),
                Some(65),
                Some(130),
                Some(1000),
                None,
            ] {
                let got: Vec<usize> = s.successors(gap).iter().collect();
                assert_eq!(got, naive_successors(&s, gap), "len {len} gap {gap:?}");
            }
        }
    }

    #[test]
    fn iter_and_first() {
        let s = set(130, &[3, 64, 129]);
        assert_eq!(s.iter().collect::<Vec<_>>(), [3, 64, 129]);
        assert_eq!(s.first(), Some(3));
        assert!(PositionSet::new(5).first().is_none());
        assert!(s.contains(64) && !s.contains(65) && !s.contains(500));
    }
}
