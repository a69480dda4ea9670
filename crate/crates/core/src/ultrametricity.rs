//! Degree-of-ultrametricity measures.
//!
//! * [`triangle_um`]: fraction of sampled triangles that are isosceles with a
//!   small base or equilateral, judged on their angles.
//! * [`lerman_h`]: rank-based H-classifiability.
//! * [`rammal_degree`]: relative discrepancy between the distances and their
//!   subdominant (single-link) ultrametric.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean, triangle_angles_from_sides, DistanceMatrix, PointCloud};
use crate::hierarchy::{cophenetic, single_linkage};

/// Two degrees, in radians.
pub const DEFAULT_ANGLE_TOLERANCE: f64 = 0.0349;
pub const DEFAULT_SAMPLE_SIZE: usize = 300;

/// Above this many triplets, sampling switches from a seeded shuffle of all
/// triplets to rejection sampling.
const SHUFFLE_LIMIT: u64 = 200_000;

/// Triplet sampling settings shared by all three measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmConfig {
    pub sample_size: usize,
    pub angle_tolerance: f64,
    pub seed: u64,
    /// Every triplet is examined when `C(n, 3)` does not exceed this.
    pub exhaustive_threshold: u64,
}

impl Default for UmConfig {
    fn default() -> Self {
        Self {
            sample_size: DEFAULT_SAMPLE_SIZE,
            angle_tolerance: DEFAULT_ANGLE_TOLERANCE,
            seed: 0,
            exhaustive_threshold: DEFAULT_SAMPLE_SIZE as u64,
        }
    }
}

impl UmConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_size == 0 {
            return Err(Error::invalid("sample_size must be at least 1"));
        }
        if !(self.angle_tolerance > 0.0 && self.angle_tolerance < std::f64::consts::FRAC_PI_3) {
            return Err(Error::invalid(format!(
                "angle_tolerance must lie in (0, pi/3), got {}",
                self.angle_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltrametricityReport {
    pub isosceles_fraction: f64,
    pub equilateral_fraction: f64,
    pub um_fraction: f64,
    pub triplets_examined: usize,
    pub degenerate_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LermanReport {
    pub h_classifiability: f64,
    pub triplets_examined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RammalReport {
    pub degree: f64,
    pub total_discrepancy: f64,
}

/// Shape class of one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleClass {
    Equilateral,
    IsoscelesSmallBase,
    NotUltrametric,
}

/// Classify a triangle from its side lengths. `None` if degenerate.
pub fn classify_sides(s1: f64, s2: f64, s3: f64, tolerance: f64) -> Option<TriangleClass> {
    let t = triangle_angles_from_sides(s1, s2, s3).ok()?;
    Some(if (t.gamma - t.beta).abs() > tolerance {
        TriangleClass::NotUltrametric
    } else if t.gamma - t.alpha <= tolerance {
        TriangleClass::Equilateral
    } else {
        TriangleClass::IsoscelesSmallBase
    })
}

fn triplet_count(n: usize) -> u64 {
    let n = n as u64;
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

fn all_triplets(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(triplet_count(n) as usize);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// Deterministic stream of distinct triplets `i < j < k`.
enum TripletSource {
    Listed(std::vec::IntoIter<[usize; 3]>),
    Rejection {
        n: usize,
        rng: ChaCha8Rng,
        seen: HashSet<[usize; 3]>,
        remaining: u64,
    },
}

impl TripletSource {
    fn new(n: usize, cfg: &UmConfig) -> (Self, bool) {
        let total = triplet_count(n);
        if total <= cfg.exhaustive_threshold {
            return (Self::Listed(all_triplets(n).into_iter()), true);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        if total <= SHUFFLE_LIMIT {
            let mut all = all_triplets(n);
            all.shuffle(&mut rng);
            (Self::Listed(all.into_iter()), false)
        } else {
            let src = Self::Rejection {
                n,
                rng,
                seen: HashSet::new(),
                remaining: total,
            };
            (src, false)
        }
    }
}

impl Iterator for TripletSource {
    type Item = [usize; 3];

    fn next(&mut self) -> Option<[usize; 3]> {
        match self {
            Self::Listed(it) => it.next(),
            Self::Rejection {
                n,
                rng,
                seen,
                remaining,
            } => {
                if *remaining == 0 {
                    return None;
                }
                loop {
                    let mut t = [
                        rng.random_range(0..*n),
                        rng.random_range(0..*n),
                        rng.random_range(0..*n),
                    ];
                    if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                        continue;
                    }
                    t.sort_unstable();
                    if seen.insert(t) {
                        *remaining -= 1;
                        return Some(t);
                    }
                }
            }
        }
    }
}

/// Draw triplets and evaluate them until `sample_size` usable ones have
/// been seen (or every triplet in exhaustive mode). `eval` returns `None`
/// for a degenerate triplet, which is skipped and replaced.
///
/// Batches are evaluated in parallel but drawn sequentially, so the set of
/// triplets depends only on the seed.
fn evaluate_triplets<T, F>(n: usize, cfg: &UmConfig, eval: F) -> (Vec<T>, usize)
where
    T: Send,
    F: Fn([usize; 3]) -> Option<T> + Sync,
{
    let (mut source, exhaustive) = TripletSource::new(n, cfg);
    let target = if exhaustive { usize::MAX } else { cfg.sample_size };
    let mut kept = Vec::new();
    let mut degenerate = 0;
    while kept.len() < target {
        let want = if exhaustive { 4096 } else { target - kept.len() };
        let batch: Vec<[usize; 3]> = source.by_ref().take(want).collect();
        if batch.is_empty() {
            break;
        }
        let results: Vec<Option<T>> = batch.into_par_iter().map(&eval).collect();
        for r in results {
            match r {
                Some(v) => kept.push(v),
                None => degenerate += 1,
            }
        }
    }
    (kept, degenerate)
}

fn summarize(classes: &[TriangleClass], degenerate: usize) -> UltrametricityReport {
    let total = classes.len();
    let count = |c: TriangleClass| classes.iter().filter(|x| **x == c).count();
    let (iso, eq) = (
        count(TriangleClass::IsoscelesSmallBase),
        count(TriangleClass::Equilateral),
    );
    let frac = |k: usize| if total == 0 { 0.0 } else { k as f64 / total as f64 };
    UltrametricityReport {
        isosceles_fraction: frac(iso),
        equilateral_fraction: frac(eq),
        um_fraction: frac(iso + eq),
        triplets_examined: total,
        degenerate_skipped: degenerate,
    }
}

/// Triangle-invariant ultrametricity coefficient of a point cloud.
///
/// A triplet respects ultrametricity when its two largest angles agree
/// within `angle_tolerance`; it counts as equilateral when the largest and
/// smallest angles also agree, otherwise as isosceles with a small base.
/// Fractions are over non-degenerate triplets; degenerate draws are
/// replaced and counted in `degenerate_skipped`.
pub fn triangle_um(cloud: &PointCloud, cfg: &UmConfig) -> Result<UltrametricityReport> {
    cfg.validate()?;
    if cloud.n() < 3 {
        return Err(Error::invalid("triangle_um needs at least 3 points"));
    }
    let tol = cfg.angle_tolerance;
    let (classes, degenerate) = evaluate_triplets(cloud.n(), cfg, |[i, j, k]| {
        let (a, b, c) = (cloud.row(i), cloud.row(j), cloud.row(k));
        classify_sides(euclidean(a, b), euclidean(b, c), euclidean(a, c), tol)
    });
    Ok(summarize(&classes, degenerate))
}

/// [`triangle_um`] on precomputed distances (same triplet stream for the
/// same seed and `n`).
pub fn triangle_um_from_distances(
    d: &DistanceMatrix,
    cfg: &UmConfig,
) -> Result<UltrametricityReport> {
    cfg.validate()?;
    if d.n() < 3 {
        return Err(Error::invalid("triangle_um needs at least 3 points"));
    }
    let tol = cfg.angle_tolerance;
    let (classes, degenerate) = evaluate_triplets(d.n(), cfg, |[i, j, k]| {
        classify_sides(d.get(i, j), d.get(j, k), d.get(i, k), tol)
    });
    Ok(summarize(&classes, degenerate))
}

/// Rank of every condensed distance, 1 = smallest, ties broken by
/// canonical pair index.
pub fn distance_ranks(d: &DistanceMatrix) -> Vec<usize> {
    let values = d.values();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (r, idx) in order.into_iter().enumerate() {
        ranks[idx] = r + 1;
    }
    ranks
}

/// Lerman's H-classifiability, normalised to `[0, 1]`.
///
/// For each sampled triplet the gap between the ranks of its middle and
/// largest distances is divided by the largest possible gap
/// `n(n-1)/2 - 1`; two exactly equal largest distances contribute zero.
/// The score is one minus the mean gap.
pub fn lerman_h(d: &DistanceMatrix, cfg: &UmConfig) -> Result<LermanReport> {
    cfg.validate()?;
    let n = d.n();
    if n < 3 {
        return Err(Error::invalid("lerman_h needs at least 3 points"));
    }
    let ranks = distance_ranks(d);
    let denom = (d.values().len() - 1) as f64;
    let idx = |i: usize, j: usize| crate::geometry::condensed_index(n, i, j);
    let (gaps, _) = evaluate_triplets(n, cfg, |[i, j, k]| {
        let mut sides = [
            (d.values()[idx(i, j)], ranks[idx(i, j)]),
            (d.values()[idx(j, k)], ranks[idx(j, k)]),
            (d.values()[idx(i, k)], ranks[idx(i, k)]),
        ];
        sides.sort_by_key(|s| s.1);
        let (mid, top) = (sides[1], sides[2]);
        let gap = if mid.0 == top.0 || denom <= 0.0 {
            0.0
        } else {
            (top.1 - mid.1) as f64 / denom
        };
        Some(gap)
    });
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    Ok(LermanReport {
        h_classifiability: (1.0 - mean).clamp(0.0, 1.0),
        triplets_examined: gaps.len(),
    })
}

/// Degree of ultrametricity `1 - Σ(d - u) / Σd`, with `u` the subdominant
/// ultrametric (single-link cophenetic distances).
pub fn rammal_degree(d: &DistanceMatrix) -> Result<RammalReport> {
    if d.n() < 2 {
        return Err(Error::invalid("rammal_degree needs at least 2 points"));
    }
    let u = cophenetic(&single_linkage(d)?);
    let total: f64 = d.values().iter().sum();
    let discrepancy: f64 = d
        .values()
        .iter()
        .zip(u.values())
        .map(|(dv, uv)| dv - uv)
        .sum();
    let degree = if total > 0.0 {
        1.0 - discrepancy / total
    } else {
        1.0
    };
    Ok(RammalReport {
        degree,
        total_discrepancy: discrepancy,
    })
}
