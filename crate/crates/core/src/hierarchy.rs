//! Agglomerative hierarchical clustering: single link (the subdominant
//! ultrametric), complete link, and complete link restricted to merging
//! sequence-adjacent clusters.
//!
//! Cluster ids follow the usual convention: leaves are `0..n`, and the
//! cluster created by merge `t` has id `n + t`. Among equal-height
//! candidates the pair whose smallest leaves are lexicographically smallest
//! is merged first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{condensed_index, DistanceMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    /// Leaves in the merged cluster.
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Linkage {
    Single,
    Complete,
    ConstrainedComplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
    pub constrained: bool,
}

impl Dendrogram {
    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    /// Number of merges whose height is below the previous merge's.
    pub fn inversions(&self) -> usize {
        self.merges
            .windows(2)
            .filter(|w| w[1].height < w[0].height)
            .count()
    }

    /// Leaves of every cluster id, leaves first then merged clusters.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members: Vec<Vec<usize>> = (0..self.n).map(|i| vec![i]).collect();
        for m in &self.merges {
            let mut joined = members[m.a].clone();
            joined.extend_from_slice(&members[m.b]);
            joined.sort_unstable();
            members.push(joined);
        }
        members
    }
}

/// Run the chosen linkage.
pub fn linkage(d: &DistanceMatrix, method: Linkage) -> Result<Dendrogram> {
    match method {
        Linkage::Single => single_linkage(d),
        Linkage::Complete => complete_linkage(d),
        Linkage::ConstrainedComplete => constrained_complete_linkage(d),
    }
}

fn check_n(d: &DistanceMatrix) -> Result<()> {
    if d.n() < 2 {
        return Err(Error::invalid("clustering needs at least 2 points"));
    }
    Ok(())
}

/// Disjoint sets over leaves that also track the current cluster id and
/// smallest leaf of each root.
struct Clusters {
    parent: Vec<usize>,
    id: Vec<usize>,
    size: Vec<usize>,
}

impl Clusters {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            id: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Join the sets rooted at `ra` and `rb`; the smaller leaf stays root so
    /// roots are always the smallest leaf of their cluster.
    fn union(&mut self, ra: usize, rb: usize, new_id: usize) -> usize {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        self.size[lo] += self.size[hi];
        self.id[lo] = new_id;
        self.size[lo]
    }
}

/// Single-link clustering (Kruskal over pairs sorted by distance, then
/// canonical pair index). Merge heights are minimum inter-cluster distances.
pub fn single_linkage(d: &DistanceMatrix) -> Result<Dendrogram> {
    check_n(d)?;
    let n = d.n();
    let values = d.values();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let pair_of = {
        let mut pairs = Vec::with_capacity(values.len());
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        pairs
    };

    let mut sets = Clusters::new(n);
    let mut merges = Vec::with_capacity(n - 1);
    for idx in order {
        let (i, j) = pair_of[idx];
        let (ri, rj) = (sets.find(i), sets.find(j));
        if ri == rj {
            continue;
        }
        let (a, b) = if ri < rj {
            (sets.id[ri], sets.id[rj])
        } else {
            (sets.id[rj], sets.id[ri])
        };
        let size = sets.union(ri, rj, n + merges.len());
        merges.push(Merge {
            a,
            b,
            height: values[idx],
            size,
        });
        if merges.len() == n - 1 {
            break;
        }
    }
    Ok(Dendrogram {
        n,
        merges,
        constrained: false,
    })
}

/// Working state for complete-link variants: a full matrix of current
/// inter-cluster distances indexed by cluster slot (the smallest leaf).
struct CompleteState {
    n: usize,
    dist: Vec<f64>,
    active: Vec<bool>,
    id: Vec<usize>,
    size: Vec<usize>,
}

impl CompleteState {
    fn new(d: &DistanceMatrix) -> Self {
        let n = d.n();
        let mut dist = vec![0.0; n * n];
        for (i, j, v) in d.pairs() {
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
        Self {
            n,
            dist,
            active: vec![true; n],
            id: (0..n).collect(),
            size: vec![1; n],
        }
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    /// Merge slot `hi` into slot `lo` (`lo < hi`) with the complete-link update.
    fn merge(&mut self, lo: usize, hi: usize, height: f64, step: usize) -> Merge {
        let n = self.n;
        for k in 0..n {
            if self.active[k] && k != lo && k != hi {
                let v = self.get(lo, k).max(self.get(hi, k));
                self.dist[lo * n + k] = v;
                self.dist[k * n + lo] = v;
            }
        }
        self.active[hi] = false;
        let merge = Merge {
            a: self.id[lo],
            b: self.id[hi],
            height,
            size: self.size[lo] + self.size[hi],
        };
        self.size[lo] += self.size[hi];
        self.id[lo] = n + step;
        merge
    }
}

/// Complete-link clustering. Merge heights are maximum inter-cluster
/// distances.
pub fn complete_linkage(d: &DistanceMatrix) -> Result<Dendrogram> {
    check_n(d)?;
    let n = d.n();
    let mut st = CompleteState::new(d);
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if !st.active[a] {
                continue;
            }
            for b in a + 1..n {
                if !st.active[b] {
                    continue;
                }
                let v = st.get(a, b);
                // Strict comparison keeps the lexicographically first pair on ties.
                if best.is_none_or(|(h, _, _)| v < h) {
                    best = Some((v, a, b));
                }
            }
        }
        let (h, a, b) = best.expect("at least two active clusters");
        merges.push(st.merge(a, b, h, step));
    }
    Ok(Dendrogram {
        n,
        merges,
        constrained: false,
    })
}

/// Complete-link clustering where only clusters adjacent in the leaf
/// sequence may merge. Every cluster is a contiguous run of leaves and the
/// merge heights never decrease.
pub fn constrained_complete_linkage(d: &DistanceMatrix) -> Result<Dendrogram> {
    check_n(d)?;
    let n = d.n();
    let mut st = CompleteState::new(d);
    // Contiguous runs in sequence order, identified by their first leaf.
    let mut runs: Vec<usize> = (0..n).collect();
    let mut merges: Vec<Merge> = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let (pos, h) = runs
            .windows(2)
            .enumerate()
            .map(|(p, w)| (p, st.get(w[0], w[1])))
            .fold(None, |best: Option<(usize, f64)>, (p, v)| match best {
                Some((_, bh)) if bh <= v => best,
                _ => Some((p, v)),
            })
            .expect("at least two runs");
        if let Some(prev) = merges.last() {
            assert!(
                h >= prev.height,
                "constrained complete link produced an inversion ({h} < {})",
                prev.height
            );
        }
        let (lo, hi) = (runs[pos], runs[pos + 1]);
        merges.push(st.merge(lo, hi, h, step));
        runs.remove(pos + 1);
    }
    Ok(Dendrogram {
        n,
        merges,
        constrained: true,
    })
}

/// Cophenetic distances: for every pair of leaves, the height of the merge
/// that first joins them. Always an exact ultrametric.
pub fn cophenetic(dend: &Dendrogram) -> DistanceMatrix {
    let n = dend.n;
    let mut values = vec![0.0; n * n.saturating_sub(1) / 2];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for m in &dend.merges {
        let left = std::mem::take(&mut members[m.a]);
        let right = std::mem::take(&mut members[m.b]);
        for &i in &left {
            for &j in &right {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                values[condensed_index(n, lo, hi)] = m.height;
            }
        }
        let mut joined = left;
        joined.extend(right);
        members.push(joined);
    }
    DistanceMatrix::from_condensed(n, values).expect("merge heights are finite and non-negative")
}

/// Contiguous segments of a leaf sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    /// First leaf of every segment after the first, ascending.
    pub boundaries: Vec<usize>,
    pub k: usize,
}

impl Segmentation {
    /// Segments from per-leaf labels; errors unless each label occupies a
    /// single contiguous run.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut boundaries = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, &l) in labels.iter().enumerate() {
            if i > 0 && l != labels[i - 1] {
                boundaries.push(i);
            }
            if (i == 0 || l != labels[i - 1]) && !seen.insert(l) {
                return Err(Error::invalid(format!(
                    "cluster {l} is not contiguous in the leaf sequence"
                )));
            }
        }
        Ok(Self {
            k: boundaries.len() + 1,
            boundaries,
        })
    }

    /// Half-open leaf ranges of the segments.
    pub fn ranges(&self, n: usize) -> Vec<std::ops::Range<usize>> {
        let mut starts = vec![0];
        starts.extend(&self.boundaries);
        let mut ends: Vec<usize> = self.boundaries.clone();
        ends.push(n);
        starts.into_iter().zip(ends).map(|(s, e)| s..e).collect()
    }
}

/// Flat clustering into `k` clusters by undoing the last `k - 1` merges.
/// Labels are numbered by first appearance in leaf order.
pub fn cut(dend: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = dend.n;
    if k == 0 || k > n {
        return Err(Error::invalid(format!("cut needs 1 <= k <= {n}, got {k}")));
    }
    let mut sets = Clusters::new(n);
    let mut slot_of_id: Vec<usize> = (0..n).collect();
    for (t, m) in dend.merges.iter().take(n - k).enumerate() {
        let (ra, rb) = (
            sets.find(slot_of_id[m.a]),
            sets.find(slot_of_id[m.b]),
        );
        sets.union(ra, rb, n + t);
        slot_of_id.push(ra.min(rb));
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let mut labels = Vec::with_capacity(n);
    for leaf in 0..n {
        let r = sets.find(leaf);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = next;
            next += 1;
        }
        labels.push(label_of_root[r]);
    }
    Ok(labels)
}

/// [`cut`] for a sequence-constrained dendrogram, as contiguous segments.
pub fn cut_segments(dend: &Dendrogram, k: usize) -> Result<Segmentation> {
    Segmentation::from_labels(&cut(dend, k)?)
}
