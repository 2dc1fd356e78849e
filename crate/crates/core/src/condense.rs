//! Histogram condensation: group nearby visual words with centroid-linkage
//! agglomerative clustering, cut the tree by inconsistency coefficient, and
//! sum the grouped bins.

use crate::bovw::{squared_distance, Codebook, State};
use crate::error::{invalid_input, invalid_parameter, Error, Result};
use crate::multi::HistogramSeries;

/// One agglomeration step. Node ids below the leaf count are leaves; merge
/// `i` creates node `leaves + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Merge history in step order. Heights need not be monotone under
/// centroid linkage.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeTree {
    leaves: usize,
    merges: Vec<Merge>,
}

impl MergeTree {
    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    fn children(&self, node: usize) -> Option<(usize, usize)> {
        node.checked_sub(self.leaves)
            .map(|i| (self.merges[i].left, self.merges[i].right))
    }

    fn leaves_under(&self, node: usize, out: &mut Vec<usize>) {
        match self.children(node) {
            None => out.push(node),
            Some((l, r)) => {
                self.leaves_under(l, out);
                self.leaves_under(r, out);
            }
        }
    }

    /// Inconsistency coefficient of every merge.
    ///
    /// The reference set for a merge is its own height plus the heights of
    /// merges up to `depth - 1` levels below it. The coefficient is
    /// `(height - mean) / std` with the population standard deviation, or 0
    /// when that deviation is 0.
    pub fn inconsistency(&self, depth: usize) -> Vec<f64> {
        (0..self.merges.len())
            .map(|i| {
                let mut heights = Vec::new();
                self.collect_heights(self.leaves + i, depth, &mut heights);
                let n = heights.len() as f64;
                let mean = heights.iter().sum::<f64>() / n;
                let var = heights.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n;
                let std = var.sqrt();
                if std > 0.0 {
                    (self.merges[i].height - mean) / std
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn collect_heights(&self, node: usize, depth: usize, out: &mut Vec<f64>) {
        if depth == 0 {
            return;
        }
        if let Some((l, r)) = self.children(node) {
            out.push(self.merges[node - self.leaves].height);
            self.collect_heights(l, depth - 1, out);
            self.collect_heights(r, depth - 1, out);
        }
    }
}

/// Centroid-linkage agglomerative clustering.
///
/// At each step the two active clusters with the closest centroids merge;
/// the merged centroid is the size-weighted mean. Ties go to the pair found
/// first in creation order.
pub fn agglomerate(points: &[Vec<f64>]) -> Result<MergeTree> {
    let m = points.len();
    if m < 2 {
        return Err(invalid_input("agglomeration needs at least two points"));
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }

    // (node id, centroid, size)
    let mut active: Vec<(usize, Vec<f64>, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.clone(), 1))
        .collect();
    let mut merges = Vec::with_capacity(m - 1);
    while active.len() > 1 {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let d = squared_distance(&active[i].1, &active[j].1);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        let (i, j, d) = best;
        let (right_id, rc, rs) = active.remove(j);
        let (left_id, lc, ls) = active.remove(i);
        let size = ls + rs;
        let centroid = lc
            .iter()
            .zip(&rc)
            .map(|(a, b)| (a * ls as f64 + b * rs as f64) / size as f64)
            .collect();
        merges.push(Merge {
            left: left_id,
            right: right_id,
            height: d.sqrt(),
            size,
        });
        active.push((m + merges.len() - 1, centroid, size));
    }
    Ok(MergeTree { leaves: m, merges })
}

/// Mapping from codebook bins to condensed bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinAssignment {
    map: Vec<usize>,
    bins: usize,
}

impl BinAssignment {
    /// Validates that `map` hits every bin in `0..bins`.
    pub fn new(map: Vec<usize>, bins: usize) -> Result<Self> {
        let mut hit = vec![false; bins];
        for &b in &map {
            if b >= bins {
                return Err(invalid_input(format!("bin {b} out of range for B={bins}")));
            }
            hit[b] = true;
        }
        if let Some(missing) = hit.iter().position(|h| !h) {
            return Err(invalid_input(format!("condensed bin {missing} has no source bin")));
        }
        Ok(Self { map, bins })
    }

    pub fn identity(len: usize) -> Self {
        Self {
            map: (0..len).collect(),
            bins: len,
        }
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Number of source bins.
    pub fn source_len(&self) -> usize {
        self.map.len()
    }

    /// Number of condensed bins.
    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Fails if any condensed bin mixes centroids of both states.
    pub fn check_state_separation(&self, cb: &Codebook) -> Result<()> {
        if self.map.len() != cb.len() {
            return Err(Error::DimensionMismatch {
                expected: cb.len(),
                found: self.map.len(),
            });
        }
        let mut owner: Vec<Option<State>> = vec![None; self.bins];
        for (c, &b) in self.map.iter().enumerate() {
            let s = cb.state_of(c);
            match owner[b] {
                Some(o) if o != s => {
                    return Err(invalid_input(format!(
                        "condensed bin {b} mixes negative and positive centroids"
                    )))
                }
                _ => owner[b] = Some(s),
            }
        }
        Ok(())
    }
}

/// Flat clusters: maximal subtrees whose root merge has inconsistency
/// strictly below `cutoff`. Bins are numbered by their smallest leaf.
pub fn cut_by_inconsistency(tree: &MergeTree, cutoff: f64, depth: usize) -> Result<BinAssignment> {
    if depth == 0 {
        return Err(invalid_parameter("inconsistency depth must be at least 1"));
    }
    if cutoff.is_nan() {
        return Err(invalid_parameter("inconsistency cutoff must be a number"));
    }
    let coef = tree.inconsistency(depth);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let root = tree.leaves + tree.merges.len() - 1;
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        match tree.children(node) {
            Some((l, r)) if !(coef[node - tree.leaves] < cutoff) => {
                stack.push(r);
                stack.push(l);
            }
            _ => {
                let mut members = Vec::new();
                tree.leaves_under(node, &mut members);
                clusters.push(members);
            }
        }
    }
    clusters.iter_mut().for_each(|c| c.sort_unstable());
    clusters.sort_by_key(|c| c[0]);
    let mut map = vec![0; tree.leaves];
    for (b, c) in clusters.iter().enumerate() {
        for &leaf in c {
            map[leaf] = b;
        }
    }
    BinAssignment::new(map, clusters.len())
}

/// Condense each state's half of the codebook separately and stack the
/// results, negative-state bins first.
pub fn condense_codebook(cb: &Codebook, cutoff: f64, depth: usize) -> Result<BinAssignment> {
    let mut map = Vec::with_capacity(cb.len());
    let mut offset = 0;
    for state in [State::Negative, State::Positive] {
        let centroids = cb.state_centroids(state);
        let part = if centroids.len() < 2 {
            BinAssignment::identity(centroids.len())
        } else {
            cut_by_inconsistency(&agglomerate(centroids)?, cutoff, depth)?
        };
        map.extend(part.map().iter().map(|b| b + offset));
        offset += part.bins();
    }
    let assignment = BinAssignment::new(map, offset)?;
    assignment.check_state_separation(cb)?;
    Ok(assignment)
}

/// Sum source bins into condensed bins, frame by frame.
pub fn condense_series(h: &HistogramSeries, a: &BinAssignment) -> Result<HistogramSeries> {
    if h.bins() != a.source_len() {
        return Err(Error::DimensionMismatch {
            expected: a.source_len(),
            found: h.bins(),
        });
    }
    let frames = h
        .frames()
        .map(|f| {
            let mut out = vec![0.0; a.bins()];
            for (v, &b) in f.iter().zip(a.map()) {
                out[b] += v;
            }
            out
        })
        .collect();
    HistogramSeries::new(frames, a.bins(), h.sample_period(), h.origin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn centroid_linkage_hand_example() {
        let t = agglomerate(&pts(&[0.0, 1.0, 10.0])).unwrap();
        assert_eq!(t.merges().len(), 2);
        assert_eq!((t.merges()[0].left, t.merges()[0].right), (0, 1));
        assert!((t.merges()[0].height - 1.0).abs() < 1e-12);
        assert_eq!((t.merges()[1].left, t.merges()[1].right), (2, 3));
        assert!((t.merges()[1].height - 9.5).abs() < 1e-12);
    }

    #[test]
    fn two_points_single_merge() {
        let t = agglomerate(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(t.merges().len(), 1);
        assert!((t.merges()[0].height - 5.0).abs() < 1e-12);
        assert!(agglomerate(&pts(&[1.0])).is_err());
    }

    #[test]
    fn centroid_linkage_can_invert() {
        // Equilateral-ish triangle: the merged centroid is closer to the
        // third point than the first merge height.
        let t = agglomerate(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.9]]).unwrap();
        assert!(t.merges()[1].height < t.merges()[0].height);
    }

    #[test]
    fn hand_computed_cut() {
        // Merge 0 (height 1) has a single-height reference set: coefficient 0.
        // Merge 1: heights {9.5, 1}, mean 5.25, std 4.25, coefficient 1.0,
        // which is not strictly below the cutoff.
        let t = agglomerate(&pts(&[0.0, 1.0, 10.0])).unwrap();
        let coef = t.inconsistency(2);
        assert_eq!(coef[0], 0.0);
        assert!((coef[1] - 1.0).abs() < 1e-12);
        let a = cut_by_inconsistency(&t, 1.0, 2).unwrap();
        assert_eq!(a.bins(), 2);
        assert_eq!(a.map(), &[0, 0, 1]);
    }

    #[test]
    fn cut_limits() {
        let t = agglomerate(&pts(&[0.0, 1.0, 10.0, 10.5, 30.0])).unwrap();
        assert_eq!(cut_by_inconsistency(&t, f64::INFINITY, 2).unwrap().bins(), 1);
        // Nothing is strictly below zero: every leaf is its own bin.
        let a = cut_by_inconsistency(&t, 0.0, 2).unwrap();
        assert_eq!(a.bins(), 5);
        assert_eq!(a.map(), &[0, 1, 2, 3, 4]);
        assert!(cut_by_inconsistency(&t, 1.0, 0).is_err());
    }

    #[test]
    fn merge_count_is_m_minus_one() {
        for m in 2..12 {
            let data: Vec<Vec<f64>> = (0..m).map(|i| vec![(i * i % 7) as f64, i as f64]).collect();
            assert_eq!(agglomerate(&data).unwrap().merges().len(), m - 1);
        }
    }

    #[test]
    fn codebook_condensation_keeps_states_apart() {
        let cb = Codebook::new(
            3,
            vec![vec![0.0], vec![0.1], vec![5.0], vec![0.05], vec![0.15], vec![50.0]],
        )
        .unwrap();
        let a = condense_codebook(&cb, f64::INFINITY, 2).unwrap();
        assert_eq!(a.bins(), 2);
        assert_eq!(a.map(), &[0, 0, 0, 1, 1, 1]);
        a.check_state_separation(&cb).unwrap();
        let mixed = BinAssignment::new(vec![0, 0, 0, 0, 1, 1], 2).unwrap();
        assert!(mixed.check_state_separation(&cb).is_err());
    }

    #[test]
    fn assignment_must_be_surjective() {
        assert!(BinAssignment::new(vec![0, 2], 3).is_err());
        assert!(BinAssignment::new(vec![0, 3], 3).is_err());
    }

    #[test]
    fn condense_identity_and_all_to_one() {
        let h = HistogramSeries::new(vec![vec![1.0, 2.0, 3.0], vec![0.0, 4.5, 1.0]], 3, 1.0, 0.0)
            .unwrap();
        assert_eq!(condense_series(&h, &BinAssignment::identity(3)).unwrap(), h);
        let one = condense_series(&h, &BinAssignment::new(vec![0, 0, 0], 1).unwrap()).unwrap();
        assert_eq!(one.frames().collect::<Vec<_>>(), vec![&[6.0][..], &[5.5][..]]);
        assert!(condense_series(&h, &BinAssignment::identity(2)).is_err());
    }

    proptest! {
        #[test]
        fn condense_matches_scatter_add(
            frames in prop::collection::vec(prop::collection::vec(0.0f64..20.0, 6), 1..20),
            raw_map in prop::collection::vec(0usize..3, 6),
        ) {
            // Force surjectivity onto 0..3.
            let mut map = raw_map;
            map[0] = 0; map[1] = 1; map[2] = 2;
            let a = BinAssignment::new(map.clone(), 3).unwrap();
            let h = HistogramSeries::new(frames.clone(), 6, 1.0, 0.0).unwrap();
            let c = condense_series(&h, &a).unwrap();
            for (src, dst) in frames.iter().zip(c.frames()) {
                let mut oracle = [0.0; 3];
                for j in 0..6 { oracle[map[j]] += src[j]; }
                for b in 0..3 { prop_assert!((oracle[b] - dst[b]).abs() < 1e-9); }
                let mass_in: f64 = src.iter().sum();
                let mass_out: f64 = dst.iter().sum();
                prop_assert!((mass_in - mass_out).abs() < 1e-9);
            }
        }
    }
}
