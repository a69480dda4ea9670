//! Distance histograms, peak detection, the peak-count identifiability
//! bound, and one-dimensional Gaussian mixtures selected by BIC.
//!
//! `k` clusters produce at most `k` intra-cluster and `k(k-1)/2`
//! inter-cluster modes in the histogram of all pairwise distances. Reading
//! the histogram from the left, the first `k` peaks are taken as
//! intra-cluster and the rest must fit among the inter-cluster pairs.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 100;
pub const DEFAULT_SMOOTHING_WINDOW: usize = 5;
/// Minimum peak prominence as a fraction of the largest smoothed count.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.02;

pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Fresh initialisations tried after an EM collapse.
pub const EM_RETRIES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    /// Bin holding `v`, clamped to the histogram range. Bins are closed on
    /// the right, `(e_i, e_{i+1}]`, and the first also holds its left edge.
    pub fn bin_of(&self, v: f64) -> usize {
        let bins = self.bins();
        let lo = self.bin_edges[0];
        let hi = self.bin_edges[bins];
        let width = (hi - lo) / bins as f64;
        let mut b = (((v - lo) / width).ceil() - 1.0).max(0.0).min((bins - 1) as f64) as usize;
        // The estimate can be one off when v sits on an edge.
        while b > 0 && v <= self.bin_edges[b] {
            b -= 1;
        }
        while b + 1 < bins && v > self.bin_edges[b + 1] {
            b += 1;
        }
        b
    }
}

/// Equal-width histogram over `[min, max]`. Bins are closed on the right
/// and the first bin also holds the minimum. A zero-width range is widened by ±0.5.
pub fn build_histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::invalid("cannot build a histogram of no values"));
    }
    if bins < 2 {
        return Err(Error::invalid("histogram needs at least 2 bins"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("histogram values must be finite"));
    }
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut h = Histogram {
        bin_edges,
        counts: vec![0u64; bins],
        total: values.len() as u64,
    };
    for v in values {
        let b = h.bin_of(*v);
        h.counts[b] += 1;
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub peak_bins: Vec<usize>,
    pub smoothing_window: usize,
    /// Relative threshold actually applied (fraction of the largest
    /// smoothed count).
    pub min_prominence: f64,
    pub smoothed: Vec<f64>,
    pub prominences: Vec<f64>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peak_bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peak_bins.is_empty()
    }
}

/// Centred moving average of `counts`, treating bins outside the
/// histogram as empty (the divisor is always `window`).
pub fn smooth_counts(counts: &[u64], window: usize) -> Vec<f64> {
    let half = window / 2;
    extended_sums(counts, half)[half..half + counts.len()]
        .iter()
        .map(|s| *s as f64 / window as f64)
        .collect()
}

/// Window sums over bins `-half .. len + half`, zero outside the histogram.
fn extended_sums(counts: &[u64], half: usize) -> Vec<u64> {
    let len = counts.len() as isize;
    let h = half as isize;
    (-h..len + h)
        .map(|c| {
            let lo = (c - h).max(0);
            let hi = (c + h + 1).min(len);
            if lo >= hi {
                0
            } else {
                counts[lo as usize..hi as usize].iter().sum()
            }
        })
        .collect()
}

/// Peaks of the smoothed histogram.
///
/// Bins outside the histogram count as empty, so a mode in the first or
/// last bin is a peak. A peak is a bin, or a flat run of equal bins,
/// strictly higher than both neighbours; a flat run reports its middle
/// bin. Peaks whose prominence is below `min_prominence × max(smoothed)`
/// are dropped, so the result does not change when every count is scaled
/// by the same factor.
pub fn detect_peaks(h: &Histogram, smoothing_window: usize, min_prominence: f64) -> Result<PeakSet> {
    if smoothing_window == 0 || smoothing_window.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "smoothing window must be odd and >= 1, got {smoothing_window}"
        )));
    }
    if !(min_prominence >= 0.0) {
        return Err(Error::invalid("min_prominence must be non-negative"));
    }
    let half = smoothing_window / 2;
    let bins = h.counts.len();
    // Smoothed sums with one empty sentinel at each end. Sums share the
    // divisor, so equality tests on them are exact.
    let mut ext = vec![0u64];
    ext.extend(extended_sums(&h.counts, half));
    ext.push(0);
    let offset = half + 1;

    let max = ext.iter().copied().max().unwrap_or(0);
    let threshold = min_prominence * max as f64;

    let mut peak_bins: Vec<usize> = Vec::new();
    let mut prominences = Vec::new();
    let mut i = 1;
    while i + 1 < ext.len() {
        if ext[i] > ext[i - 1] {
            let mut j = i;
            while j + 1 < ext.len() && ext[j + 1] == ext[i] {
                j += 1;
            }
            if j + 1 < ext.len() && ext[j + 1] < ext[i] {
                let prom = prominence(&ext, i, j) as f64;
                if prom >= threshold && prom > 0.0 {
                    let mid = (i + j) / 2;
                    let bin = mid.saturating_sub(offset).min(bins - 1);
                    if peak_bins.last() != Some(&bin) {
                        peak_bins.push(bin);
                        prominences.push(prom / smoothing_window as f64);
                    }
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(PeakSet {
        peak_bins,
        smoothing_window,
        min_prominence,
        smoothed: smooth_counts(&h.counts, smoothing_window),
        prominences,
    })
}

/// Height of the plateau `s[lo..=hi]` above the higher of its two bases,
/// each base being the lowest point before a higher bin (or the edge).
fn prominence(s: &[u64], lo: usize, hi: usize) -> u64 {
    let top = s[lo];
    let mut left_min = top;
    for k in (0..lo).rev() {
        if s[k] > top {
            break;
        }
        left_min = left_min.min(s[k]);
    }
    let mut right_min = top;
    for &v in &s[hi + 1..] {
        if v > top {
            break;
        }
        right_min = right_min.min(v);
    }
    top - left_min.max(right_min)
}

/// `k + k(k-1)/2`: most histogram peaks `k` clusters can produce.
pub fn max_peaks(k: usize) -> usize {
    k + k * k.saturating_sub(1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterCountInference {
    pub n_peaks: usize,
    pub min_k: usize,
    /// `max_peaks(min_k)`.
    pub max_peaks: usize,
}

/// Smallest cluster count consistent with `n_peaks` histogram peaks: the
/// least `k` whose remaining `n_peaks - k` peaks fit among the `k(k-1)/2`
/// inter-cluster pairs.
pub fn infer_min_clusters(n_peaks: usize) -> Result<ClusterCountInference> {
    if n_peaks == 0 {
        return Err(Error::invalid("need at least one peak"));
    }
    let min_k = (1..=n_peaks)
        .find(|&k| n_peaks - k <= k * (k - 1) / 2)
        .expect("k = n_peaks always fits");
    Ok(ClusterCountInference {
        n_peaks,
        min_k,
        max_peaks: max_peaks(min_k),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalClusterCount {
    pub clusters: usize,
    /// Peaks the bound allows beyond those observed; each unit of slack is
    /// read as two modes sitting at the same distance.
    pub colocated_slack: usize,
}

/// Number of signal clusters implied by `n_peaks` mixture components.
pub fn peaks_to_signal_clusters(n_peaks: usize) -> Result<SignalClusterCount> {
    let inf = infer_min_clusters(n_peaks)?;
    Ok(SignalClusterCount {
        clusters: inf.min_k,
        colocated_slack: inf.max_peaks - n_peaks,
    })
}

/// A `k`-component Gaussian mixture over scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture1D {
    pub k: usize,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub loglik: f64,
    /// `2·loglik - (3k - 1)·ln N`; larger is better.
    pub bic: f64,
    pub n_samples: usize,
    pub iterations: usize,
    /// Log-likelihood after every EM iteration.
    pub loglik_trace: Vec<f64>,
}

impl Mixture1D {
    /// Free parameters: `k` means, `k` sds and `k - 1` weights.
    pub fn parameter_count(k: usize) -> usize {
        3 * k - 1
    }

    fn component_log_density(&self, c: usize, x: f64) -> f64 {
        log_normal(x, self.means[c], self.sds[c]) + self.weights[c].ln()
    }

    /// Index of the component with the largest responsibility for `x`.
    pub fn assign(&self, x: f64) -> usize {
        (0..self.k)
            .map(|c| (c, self.component_log_density(c, x)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0
    }

    /// Points assigned to each component by maximum responsibility.
    pub fn cardinalities(&self, values: &[f64]) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &v in values {
            out[self.assign(v)] += 1;
        }
        out
    }

    pub fn log_likelihood(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .map(|&x| log_sum_exp((0..self.k).map(|c| self.component_log_density(c, x))))
            .sum()
    }
}

fn log_normal(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln()
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + it.map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn bic(loglik: f64, k: usize, n: usize) -> f64 {
    2.0 * loglik - Mixture1D::parameter_count(k) as f64 * (n as f64).ln()
}

struct EmParams {
    weights: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

/// Split the sorted sample into `k` equal-count chunks; each chunk seeds one
/// component with its mean and sd.
fn quantile_init(sorted: &[f64], k: usize, floor: f64) -> EmParams {
    let n = sorted.len();
    let mut means = Vec::with_capacity(k);
    let mut sds = Vec::with_capacity(k);
    for c in 0..k {
        let chunk = &sorted[c * n / k..(c + 1) * n / k];
        let (mu, sd) = moments(chunk);
        means.push(mu);
        sds.push(sd.max(floor));
    }
    EmParams {
        weights: vec![1.0 / k as f64; k],
        means,
        sds,
    }
}

/// Means at `k` distinct random sample points, all sds equal to the sample sd.
fn random_init(values: &[f64], k: usize, floor: f64, rng: &mut ChaCha8Rng) -> EmParams {
    let (_, sd) = moments(values);
    let picks = rand::seq::index::sample(rng, values.len(), k);
    let mut means: Vec<f64> = picks.iter().map(|i| values[i]).collect();
    means.sort_by(f64::total_cmp);
    EmParams {
        weights: vec![1.0 / k as f64; k],
        means,
        sds: vec![sd.max(floor); k],
    }
}

fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

enum EmOutcome {
    Converged(Mixture1D),
    Collapsed,
}

fn run_em(values: &[f64], mut p: EmParams, floor: f64, max_iter: usize, tol: f64) -> EmOutcome {
    let n = values.len();
    let k = p.weights.len();
    let mut resp = vec![0.0; n * k];
    let mut trace = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut iterations = 0;

    loop {
        // E step; the log-likelihood here belongs to the current parameters.
        let mut ll = 0.0;
        for (i, &x) in values.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            for c in 0..k {
                row[c] = p.weights[c].ln() + log_normal(x, p.means[c], p.sds[c]);
            }
            let lse = log_sum_exp(row.iter().copied());
            ll += lse;
            row.iter_mut().for_each(|r| *r = (*r - lse).exp());
        }
        if !ll.is_finite() {
            return EmOutcome::Collapsed;
        }
        if iterations > 0 {
            assert!(
                ll >= prev - 1e-9 * (1.0 + prev.abs()),
                "EM log-likelihood decreased from {prev} to {ll}"
            );
            trace.push(ll);
        }
        if iterations >= max_iter || (iterations > 0 && ll - prev < tol) {
            let loglik = ll;
            return EmOutcome::Converged(Mixture1D {
                k,
                bic: bic(loglik, k, n),
                weights: p.weights,
                means: p.means,
                sds: p.sds,
                loglik,
                n_samples: n,
                iterations,
                loglik_trace: trace,
            });
        }
        prev = ll;

        // M step.
        for c in 0..k {
            let nk: f64 = (0..n).map(|i| resp[i * k + c]).sum();
            if nk < 1.0 {
                return EmOutcome::Collapsed;
            }
            let mean = (0..n).map(|i| resp[i * k + c] * values[i]).sum::<f64>() / nk;
            let var = (0..n)
                .map(|i| resp[i * k + c] * (values[i] - mean).powi(2))
                .sum::<f64>()
                / nk;
            p.weights[c] = nk / n as f64;
            p.means[c] = mean;
            p.sds[c] = var.sqrt().max(floor);
        }
        iterations += 1;
    }
}

/// Fit a `k`-component mixture by EM, starting from equal-count quantile
/// chunks.
///
/// The log-likelihood is checked to be non-decreasing at every iteration.
/// Component sds are floored at `1e-6 × range`. If a component collapses
/// (fewer than one effective point, or a non-finite likelihood) EM restarts
/// from random means drawn with `seed`, up to [`EM_RETRIES`] times.
pub fn fit_gmm_1d(
    values: &[f64],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<Mixture1D> {
    if k == 0 {
        return Err(Error::invalid("mixture needs k >= 1"));
    }
    if values.len() < 3 * k {
        return Err(Error::invalid(format!(
            "{} values are too few for k = {k} (need at least {})",
            values.len(),
            3 * k
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("mixture values must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if !(range > 0.0) {
        return Err(Error::invalid("mixture values have zero range"));
    }
    let floor = 1e-6 * range;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init = quantile_init(&sorted, k, floor);
    for _ in 0..=EM_RETRIES {
        match run_em(values, init, floor, max_iter, tol) {
            EmOutcome::Converged(m) => return Ok(m),
            EmOutcome::Collapsed => init = random_init(values, k, floor, &mut rng),
        }
    }
    Err(Error::EmCollapse {
        k,
        retries: EM_RETRIES,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicSelection {
    pub best_k: usize,
    /// One fit per `k` in the requested range, in order.
    pub fits: Vec<Mixture1D>,
}

impl BicSelection {
    pub fn best(&self) -> &Mixture1D {
        self.fits
            .iter()
            .find(|f| f.k == self.best_k)
            .expect("best_k comes from fits")
    }
}

/// Fit every `k` in `k_range` (concurrently) and keep the largest BIC;
/// ties go to the smaller `k`.
pub fn select_k_bic(
    values: &[f64],
    k_range: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<BicSelection> {
    if k_range.is_empty() || *k_range.start() == 0 {
        return Err(Error::invalid("k range must be non-empty and start at 1 or more"));
    }
    let ks: Vec<usize> = k_range.collect();
    let fits = ks
        .par_iter()
        .map(|&k| fit_gmm_1d(values, k, seed.wrapping_add(k as u64), DEFAULT_MAX_ITER, DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()?;
    let best_k = fits
        .iter()
        .fold(None::<&Mixture1D>, |best, f| match best {
            Some(b) if b.bic >= f.bic => Some(b),
            _ => Some(f),
        })
        .expect("non-empty range")
        .k;
    Ok(BicSelection { best_k, fits })
}

/// Random draws from a mixture, for tests and examples.
pub fn sample_mixture(
    weights: &[f64],
    means: &[f64],
    sds: &[f64],
    n: usize,
    seed: u64,
) -> Vec<f64> {
    use rand_distr::{weighted::WeightedIndex, Distribution, Normal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = WeightedIndex::new(weights).expect("weights are positive");
    let normals: Vec<Normal<f64>> = means
        .iter()
        .zip(sds)
        .map(|(m, s)| Normal::new(*m, *s).expect("sd > 0"))
        .collect();
    (0..n)
        .map(|_| {
            let c = pick.sample(&mut rng);
            normals[c].sample(&mut rng)
        })
        .collect()
}
