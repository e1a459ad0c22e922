//! Set partitions of `{1, …, m}` restricted to singleton and pair blocks,
//! permutations, and the crossing/inversion statistics used by the moment
//! formulas.
//!
//! Enumeration is streaming and lexicographic on the canonical block list
//! (blocks sorted internally, blocks ordered by their minimum).

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use crate::error::{domain, Error, Result};

/// Largest ground set for which enumerations may be materialized into a `Vec`.
pub const MATERIALIZE_LIMIT: usize = 16;

/// A set partition of `{1, …, m}` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    m: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition, checking disjointness and coverage of `{1, …, m}`.
    pub fn new(m: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; m + 1];
        for block in &blocks {
            if block.is_empty() {
                return domain("empty block");
            }
            for &i in block {
                if i == 0 || i > m {
                    return domain(format!("element {i} outside 1..={m}"));
                }
                if seen[i] {
                    return domain(format!("element {i} appears twice"));
                }
                seen[i] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return domain("blocks do not cover the ground set");
        }
        Ok(Self::canonical(m, blocks))
    }

    fn canonical(m: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Partition { m, blocks }
    }

    /// The partition into singletons.
    pub fn singletons_of(m: usize) -> Self {
        Partition {
            m,
            blocks: (1..=m).map(|i| vec![i]).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Two-element blocks as `(left, right)` with `left < right`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocks
            .iter()
            .filter(|b| b.len() == 2)
            .map(|b| (b[0], b[1]))
    }

    /// Elements forming singleton blocks, in increasing order.
    pub fn singletons(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .blocks
            .iter()
            .filter(|b| b.len() == 1)
            .map(|b| b[0])
            .collect();
        s.sort_unstable();
        s
    }

    pub fn is_pair_partition(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    /// True when every block has size one or two.
    pub fn is_p12(&self) -> bool {
        self.blocks.iter().all(|b| b.len() <= 2)
    }

    /// Image under the order-reversing relabeling `i ↦ m + 1 − i`.
    pub fn reversed(&self) -> Self {
        let m = self.m;
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&i| m + 1 - i).collect())
            .collect();
        Self::canonical(m, blocks)
    }

    /// Block index of every element, indexed from 1 (slot 0 unused).
    pub fn block_of(&self) -> Vec<usize> {
        let mut owner = vec![usize::MAX; self.m + 1];
        for (k, b) in self.blocks.iter().enumerate() {
            for &i in b {
                owner[i] = k;
            }
        }
        owner
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for b in &self.blocks {
            write!(f, "{{")?;
            for (k, i) in b.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{i}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// A bijection of `{1, …, m}` stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m + 1];
        for &i in &images {
            if i == 0 || i > m || seen[i] {
                return domain(format!("{images:?} is not a permutation"));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(m: usize) -> Self {
        Permutation {
            images: (1..=m).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Number of pairs `i < j` with `π(i) > π(j)`.
    pub fn inversions(&self) -> usize {
        let p = &self.images;
        (0..p.len())
            .map(|i| (i + 1..p.len()).filter(|&j| p[i] > p[j]).count())
            .sum()
    }
}

/// All permutations of `{0, …, n−1}` (zero based) with their inversion counts,
/// in lexicographic order.
pub fn permutations_with_inversions(n: usize) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(
        n: usize,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        inv: usize,
        out: &mut Vec<(Vec<usize>, usize)>,
    ) {
        if cur.len() == n {
            out.push((cur.clone(), inv));
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            // later entries smaller than v are the inversions created by v
            let extra = (0..v).filter(|&u| !used[u]).count();
            used[v] = true;
            cur.push(v);
            rec(n, cur, used, inv + extra, out);
            cur.pop();
            used[v] = false;
        }
    }
    rec(n, &mut cur, &mut used, 0, &mut out);
    out
}

pub fn inversions(p: &Permutation) -> usize {
    p.inversions()
}

/// Crossing count of a partition whose blocks have size at most two.
///
/// Pairs `{a,b}`, `{c,d}` cross when `a < c < b < d`; a pair `{l,r}` crosses a
/// singleton `{i}` when `l < i < r`.
pub fn crossings(sigma: &Partition) -> Result<usize> {
    if !sigma.is_p12() {
        return domain(format!("{sigma} has a block of size at least three"));
    }
    let pairs: Vec<(usize, usize)> = sigma.pairs().collect();
    let singles = sigma.singletons();
    let mut count = 0;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        for &(c, d) in &pairs[k + 1..] {
            if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                count += 1;
            }
        }
        count += singles.iter().filter(|&&i| a < i && i < b).count();
    }
    Ok(count)
}

/// The partition grouping positions that carry equal labels.
pub fn classify_indices<T: Eq + Hash>(labels: &[T]) -> Partition {
    let mut groups: HashMap<&T, usize> = HashMap::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (pos, label) in labels.iter().enumerate() {
        let k = *groups.entry(label).or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[k].push(pos + 1);
    }
    // first-occurrence order already sorts blocks by minimum
    Partition {
        m: labels.len(),
        blocks,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    /// Only pairs.
    Pairs,
    /// Only non-crossing pairs.
    NonCrossingPairs,
    /// Singletons and pairs.
    SinglesAndPairs,
}

/// Streaming backtracking enumerator; yields partitions in lexicographic
/// order of their canonical block lists.
#[derive(Clone, Debug)]
pub struct PartitionIter {
    m: usize,
    shape: Shape,
    // partner[i] == i marks a singleton, 0 marks unused (1-based slots)
    partner: Vec<usize>,
    // (first element, chosen option) where option == a means singleton
    stack: Vec<(usize, usize)>,
    started: bool,
    done: bool,
}

impl PartitionIter {
    fn new(m: usize, shape: Shape) -> Self {
        PartitionIter {
            m,
            shape,
            partner: vec![0; m + 1],
            stack: Vec::new(),
            started: false,
            done: false,
        }
    }

    fn first_unused(&self) -> Option<usize> {
        (1..=self.m).find(|&i| self.partner[i] == 0)
    }

    fn crosses_existing(&self, a: usize, b: usize) -> bool {
        self.stack
            .iter()
            .any(|&(c, d)| c != d && ((c < a && a < d && d < b) || (a < c && c < b && b < d)))
    }

    /// Smallest admissible option for `a` strictly after `after`.
    fn next_option(&self, a: usize, after: Option<usize>) -> Option<usize> {
        let singles = self.shape == Shape::SinglesAndPairs;
        let start = match after {
            None if singles => return Some(a),
            None => a + 1,
            Some(prev) => prev + 1,
        };
        (start.max(a + 1)..=self.m).find(|&b| {
            self.partner[b] == 0
                && !(self.shape == Shape::NonCrossingPairs && self.crosses_existing(a, b))
        })
    }

    fn apply(&mut self, a: usize, opt: usize) {
        self.partner[a] = opt;
        self.partner[opt] = a;
        self.stack.push((a, opt));
    }

    fn undo(&mut self) -> Option<(usize, usize)> {
        let (a, opt) = self.stack.pop()?;
        self.partner[a] = 0;
        self.partner[opt] = 0;
        Some((a, opt))
    }

    /// Extends the current prefix greedily; false on a dead end.
    fn descend(&mut self) -> bool {
        while let Some(a) = self.first_unused() {
            match self.next_option(a, None) {
                Some(opt) => self.apply(a, opt),
                None => return false,
            }
        }
        true
    }

    /// Moves to the next complete configuration; false when exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some((a, opt)) = self.undo() {
            if let Some(next) = self.next_option(a, Some(opt)) {
                self.apply(a, next);
                if self.descend() {
                    return true;
                }
            }
        }
        false
    }

    fn current(&self) -> Partition {
        let mut blocks: Vec<Vec<usize>> = self
            .stack
            .iter()
            .map(|&(a, opt)| if a == opt { vec![a] } else { vec![a, opt] })
            .collect();
        blocks.sort_unstable_by_key(|b| b[0]);
        Partition { m: self.m, blocks }
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let found = if self.started {
            self.backtrack()
        } else {
            self.started = true;
            self.descend() || self.backtrack()
        };
        if found {
            Some(self.current())
        } else {
            self.done = true;
            None
        }
    }
}

/// Streams the pair partitions of `{1, …, m}`; empty when `m` is odd.
pub fn pair_partitions(m: usize) -> PartitionIter {
    PartitionIter::new(m, Shape::Pairs)
}

/// Streams the partitions of `{1, …, m}` into singletons and pairs.
pub fn p12_partitions(m: usize) -> PartitionIter {
    PartitionIter::new(m, Shape::SinglesAndPairs)
}

/// Streams the non-crossing pair partitions of `{1, …, m}`.
pub fn noncrossing_pair_partitions(m: usize) -> PartitionIter {
    PartitionIter::new(m, Shape::NonCrossingPairs)
}

fn materialize(m: usize, it: PartitionIter) -> Result<Vec<Partition>> {
    if m > MATERIALIZE_LIMIT {
        return Err(Error::Resource {
            what: "partition list",
            needed: m,
            limit: MATERIALIZE_LIMIT,
        });
    }
    Ok(it.collect())
}

pub fn enumerate_pair_partitions(m: usize) -> Result<Vec<Partition>> {
    materialize(m, pair_partitions(m))
}

pub fn enumerate_p12(m: usize) -> Result<Vec<Partition>> {
    materialize(m, p12_partitions(m))
}

pub fn enumerate_noncrossing_pair_partitions(m: usize) -> Result<Vec<Partition>> {
    materialize(m, noncrossing_pair_partitions(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: usize, blocks: &[&[usize]]) -> Partition {
        Partition::new(m, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(
            enumerate_pair_partitions(2).unwrap(),
            vec![p(2, &[&[1, 2]])]
        );
        assert!(enumerate_pair_partitions(3).unwrap().is_empty());
        assert_eq!(enumerate_pair_partitions(0).unwrap().len(), 1);
        assert_eq!(enumerate_pair_partitions(6).unwrap().len(), 15);
        let p12 = enumerate_p12(2).unwrap();
        assert_eq!(p12, vec![p(2, &[&[1], &[2]]), p(2, &[&[1, 2]])]);
        assert_eq!(enumerate_p12(3).unwrap().len(), 4);
        assert_eq!(enumerate_p12(4).unwrap().len(), 10);
        assert_eq!(enumerate_noncrossing_pair_partitions(2).unwrap().len(), 1);
        assert_eq!(enumerate_noncrossing_pair_partitions(4).unwrap().len(), 2);
        assert_eq!(enumerate_noncrossing_pair_partitions(6).unwrap().len(), 5);
        assert!(enumerate_noncrossing_pair_partitions(5).unwrap().is_empty());
    }

    #[test]
    fn enumeration_is_sorted_and_distinct() {
        for m in 0..=8 {
            let all = enumerate_p12(m).unwrap();
            assert!(all.windows(2).all(|w| w[0] < w[1]), "m={m}");
        }
    }

    #[test]
    fn crossing_examples() {
        assert_eq!(crossings(&p(4, &[&[1, 2], &[3, 4]])).unwrap(), 0);
        assert_eq!(crossings(&p(4, &[&[1, 3], &[2, 4]])).unwrap(), 1);
        assert_eq!(crossings(&p(3, &[&[1, 3], &[2]])).unwrap(), 1);
        assert_eq!(crossings(&p(4, &[&[1, 4], &[2], &[3]])).unwrap(), 2);
        assert!(matches!(
            crossings(&p(3, &[&[1, 2, 3]])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(Permutation::identity(3).inversions(), 0);
        assert_eq!(Permutation::new(vec![2, 1]).unwrap().inversions(), 1);
        assert_eq!(Permutation::new(vec![3, 2, 1]).unwrap().inversions(), 3);
        assert!(Permutation::new(vec![1, 1]).is_err());
        for (perm, inv) in permutations_with_inversions(4) {
            let p = Permutation::new(perm.iter().map(|v| v + 1).collect()).unwrap();
            assert_eq!(p.inversions(), inv);
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_indices(&[5, 5, 7]), p(3, &[&[1, 2], &[3]]));
        assert_eq!(classify_indices(&[1, 2, 3]), Partition::singletons_of(3));
        assert_eq!(classify_indices(&[4, 9, 4, 9]), p(4, &[&[1, 3], &[2, 4]]));
    }

    #[test]
    fn rejects_malformed() {
        assert!(Partition::new(3, vec![vec![1, 2]]).is_err());
        assert!(Partition::new(2, vec![vec![1, 2], vec![2]]).is_err());
        assert!(Partition::new(2, vec![vec![1, 3]]).is_err());
        assert!(matches!(enumerate_p12(17), Err(Error::Resource { .. })));
    }
}
