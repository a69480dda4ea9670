//! End-to-end runs: sliding-window segmentation of a signal, and the
//! simulation tables and peak-count figures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{pcoa, Axes, PcoaResult};
use crate::error::{Error, Result};
use crate::generators::{
    arima_model_a, arima_model_b, embed_signal, gen_arima_segments, gen_gaussian_clusters,
    gen_hypercube, gen_uniform, window_starts, GaussianClusterSpec, LabelledCloud,
};
use crate::geometry::{pairwise_distances, DistanceMatrix, PointCloud};
use crate::hierarchy::{constrained_complete_linkage, cut_segments, Dendrogram, Segmentation};
use crate::histpeaks::{
    build_histogram, detect_peaks, infer_min_clusters, peaks_to_signal_clusters, select_k_bic,
    BicSelection, ClusterCountInference, Histogram, PeakSet, SignalClusterCount, DEFAULT_BINS,
    DEFAULT_MIN_PROMINENCE, DEFAULT_SMOOTHING_WINDOW,
};
use crate::ultrametricity::{triangle_um, UmConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub window_len: usize,
    pub stride: usize,
    /// Explicit 0-based window starts; overrides `stride` when set.
    pub starts: Option<Vec<usize>>,
    pub bins: usize,
    pub k_max: usize,
    pub seed: u64,
    pub axes: Axes,
    /// Windows dropped from each end of the sequence before clustering.
    pub trim: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            window_len: 10_000,
            stride: 1_000,
            starts: None,
            bins: DEFAULT_BINS,
            k_max: 6,
            seed: 0,
            axes: Axes::Count(2),
            trim: 0,
        }
    }
}

/// One contiguous segment, in window and signal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpan {
    pub first_window: usize,
    pub last_window: usize,
    /// Start of the segment's first window.
    pub signal_start: usize,
    /// Inclusive: one before the next segment's start, or one stride past
    /// the start of the final window.
    pub signal_end: usize,
    pub mean: f64,
    /// Largest distance between two windows of the segment, measured in
    /// the space the clustering ran in.
    pub max_intra_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRun {
    pub config: SegmentationConfig,
    /// 0-based starts of the windows that were clustered.
    pub starts: Vec<usize>,
    pub histogram: Histogram,
    /// `None` when every distance is equal and no mixture can be fitted.
    pub bic: Option<BicSelection>,
    pub histogram_peaks: usize,
    pub signal_clusters: SignalClusterCount,
    pub pcoa: PcoaResult,
    pub dendrogram: Dendrogram,
    pub segmentation: Segmentation,
    /// Height of the lowest merge removed by the cut (the final merge when
    /// nothing is removed).
    pub cut_height: f64,
    pub segments: Vec<SegmentSpan>,
}

/// Segment a signal:
///
/// 1. embed windows of the signal as points,
/// 2. fit 1-D Gaussian mixtures to the histogram of pairwise window
///    distances and pick the count of modes by BIC,
/// 3. turn that mode count into a cluster count via `c + c(c-1)/2`,
/// 4. map the windows to principal coordinates,
/// 5. cluster them with contiguity-constrained complete link and cut into
///    the inferred number of segments.
pub fn segment_signal(signal: &[f64], cfg: &SegmentationConfig) -> Result<SegmentationRun> {
    let mut starts = match &cfg.starts {
        Some(s) => s.clone(),
        None => window_starts(signal.len(), cfg.window_len, cfg.stride)?,
    };
    if cfg.trim > 0 {
        if 2 * cfg.trim >= starts.len() {
            return Err(Error::invalid(format!(
                "trimming {} windows from each end leaves nothing of {}",
                cfg.trim,
                starts.len()
            )));
        }
        starts = starts[cfg.trim..starts.len() - cfg.trim].to_vec();
    }
    if starts.len() < 2 {
        return Err(Error::invalid("segmentation needs at least 2 windows"));
    }
    if cfg.k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }

    let cloud = embed_signal(signal, cfg.window_len, &starts)?;
    let d = pairwise_distances(&cloud);
    let histogram = build_histogram(d.values(), cfg.bins)?;

    let constant = d.values().iter().all(|v| *v == d.values()[0]);
    let (bic, histogram_peaks) = if constant {
        (None, 1)
    } else {
        let sel = select_k_bic(d.values(), 1..=cfg.k_max, cfg.seed)?;
        let best = sel.best_k;
        (Some(sel), best)
    };
    let signal_clusters = peaks_to_signal_clusters(histogram_peaks)?;
    let n = starts.len();
    if signal_clusters.clusters > n {
        return Err(Error::invalid(format!(
            "{} clusters inferred but only {n} windows",
            signal_clusters.clusters
        )));
    }

    let coords = pcoa(&d, cfg.axes)?;
    let reduced = match coords.to_cloud() {
        Some(c) => pairwise_distances(&c),
        None => DistanceMatrix::from_condensed(n, vec![0.0; n * (n - 1) / 2])?,
    };
    let dendrogram = constrained_complete_linkage(&reduced)?;
    let segmentation = cut_segments(&dendrogram, signal_clusters.clusters)?;
    let c = signal_clusters.clusters;
    let cut_height = dendrogram.merges[if c > 1 { n - c } else { n - 2 }].height;

    let step = match &cfg.starts {
        None => cfg.stride,
        Some(_) if n >= 2 => starts[n - 1] - starts[n - 2],
        Some(_) => cfg.window_len,
    };
    let ranges = segmentation.ranges(n);
    let segments = ranges
        .iter()
        .enumerate()
        .map(|(s, r)| {
            let signal_start = starts[r.start];
            let signal_end = match ranges.get(s + 1) {
                Some(next) => starts[next.start] - 1,
                None => (starts[r.end - 1] + step - 1).min(signal.len() - 1),
            };
            let span = &signal[signal_start..=signal_end];
            let mut max_intra: f64 = 0.0;
            for i in r.clone() {
                for j in i + 1..r.end {
                    max_intra = max_intra.max(reduced.get(i, j));
                }
            }
            SegmentSpan {
                first_window: r.start,
                last_window: r.end - 1,
                signal_start,
                signal_end,
                mean: span.iter().sum::<f64>() / span.len() as f64,
                max_intra_distance: max_intra,
            }
        })
        .collect();

    Ok(SegmentationRun {
        config: cfg.clone(),
        starts,
        histogram,
        bic,
        histogram_peaks,
        signal_clusters,
        pcoa: coords,
        dendrogram,
        segmentation,
        cut_height,
        segments,
    })
}

/// Data source of one table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorId {
    Uniform,
    Hypercube,
    Gaussian,
    /// Two Gaussian clusters of 100 points, means 0 and 10, sd 1.
    TwoClusters,
    /// Four overlapping clusters of 50 points: (0, 1), (3, 2), (5, 1), (8, 3).
    FourClusters,
    /// 50 segments from each of the two ARMA models.
    ArimaSegments,
}

pub const TWO_CLUSTERS: [GaussianClusterSpec; 2] = [
    GaussianClusterSpec::new(100, 0.0, 1.0),
    GaussianClusterSpec::new(100, 10.0, 1.0),
];

pub const FOUR_CLUSTERS: [GaussianClusterSpec; 4] = [
    GaussianClusterSpec::new(50, 0.0, 1.0),
    GaussianClusterSpec::new(50, 3.0, 2.0),
    GaussianClusterSpec::new(50, 5.0, 1.0),
    GaussianClusterSpec::new(50, 8.0, 3.0),
];

impl GeneratorId {
    /// Generate the cloud for this source at dimensionality `m`.
    pub fn generate(self, n: usize, m: usize, seed: u64) -> Result<LabelledCloud> {
        let unlabelled = |cloud: PointCloud| LabelledCloud {
            labels: vec![0; cloud.n()],
            cloud,
        };
        match self {
            GeneratorId::Uniform => gen_uniform(n, m, seed).map(unlabelled),
            GeneratorId::Hypercube => gen_hypercube(n, m, seed).map(unlabelled),
            GeneratorId::Gaussian => {
                gen_gaussian_clusters(&[GaussianClusterSpec::new(n, 0.0, 1.0)], m, seed)
            }
            GeneratorId::TwoClusters => gen_gaussian_clusters(&TWO_CLUSTERS, m, seed),
            GeneratorId::FourClusters => gen_gaussian_clusters(&FOUR_CLUSTERS, m, seed),
            GeneratorId::ArimaSegments => {
                gen_arima_segments(&[arima_model_a(m), arima_model_b(m)], n / 2, m, seed)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableSetting {
    pub table: u8,
    pub generator: GeneratorId,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: u8,
    pub generator: GeneratorId,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub isosc: f64,
    pub equil: f64,
    pub um: f64,
}

/// Rows of one simulation table.
pub fn table_settings(table_id: u8) -> Result<Vec<TableSetting>> {
    let rows = |generator, n, dims: &[usize]| -> Vec<TableSetting> {
        dims.iter()
            .map(|&m| TableSetting {
                table: table_id,
                generator,
                n,
                m,
            })
            .collect()
    };
    let low = [20, 200, 2000, 20_000];
    Ok(match table_id {
        1 => [GeneratorId::Uniform, GeneratorId::Hypercube, GeneratorId::Gaussian]
            .into_iter()
            .flat_map(|g| rows(g, 100, &low))
            .collect(),
        2 => rows(GeneratorId::TwoClusters, 200, &low),
        3 => rows(GeneratorId::FourClusters, 200, &[20, 200, 2000, 20_000, 200_000]),
        4 => rows(GeneratorId::ArimaSegments, 100, &[2000, 20_000, 200_000]),
        other => return Err(Error::invalid(format!("no table {other}; expected 1 to 4"))),
    })
}

/// Generate one setting's cloud and measure it with 300 sampled triangles.
pub fn run_setting(setting: &TableSetting, seed: u64) -> Result<TableRow> {
    let lc = setting.generator.generate(setting.n, setting.m, seed)?;
    let report = triangle_um(&lc.cloud, &UmConfig::with_seed(seed))?;
    Ok(TableRow {
        table: setting.table,
        generator: setting.generator,
        n: setting.n,
        m: setting.m,
        seed,
        isosc: report.isosceles_fraction,
        equil: report.equilateral_fraction,
        um: report.um_fraction,
    })
}

/// Every row of a table, once per seed, run concurrently.
pub fn reproduce_table(table_id: u8, seeds: &[u64]) -> Result<Vec<TableRow>> {
    let settings = table_settings(table_id)?;
    let jobs: Vec<(TableSetting, u64)> = settings
        .iter()
        .flat_map(|s| seeds.iter().map(move |&seed| (*s, seed)))
        .collect();
    jobs.par_iter().map(|(s, seed)| run_setting(s, *seed)).collect()
}

/// Per-setting means over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub table: u8,
    pub generator: GeneratorId,
    pub n: usize,
    pub m: usize,
    pub isosc: f64,
    pub equil: f64,
    pub um: f64,
    pub um_per_seed: Vec<f64>,
}

pub fn summarize_rows(rows: &[TableRow]) -> Vec<TableSummary> {
    let mut out: Vec<TableSummary> = Vec::new();
    for r in rows {
        let found = out
            .iter_mut()
            .find(|s| s.table == r.table && s.generator == r.generator && s.n == r.n && s.m == r.m);
        match found {
            Some(s) => s.um_per_seed.push(r.um),
            None => out.push(TableSummary {
                table: r.table,
                generator: r.generator,
                n: r.n,
                m: r.m,
                isosc: 0.0,
                equil: 0.0,
                um: 0.0,
                um_per_seed: vec![r.um],
            }),
        }
    }
    for s in &mut out {
        let mine: Vec<&TableRow> = rows
            .iter()
            .filter(|r| r.table == s.table && r.generator == s.generator && r.n == s.n && r.m == s.m)
            .collect();
        let k = mine.len() as f64;
        s.isosc = mine.iter().map(|r| r.isosc).sum::<f64>() / k;
        s.equil = mine.iter().map(|r| r.equil).sum::<f64>() / k;
        s.um = mine.iter().map(|r| r.um).sum::<f64>() / k;
    }
    out
}

/// Cluster specs for the peak-count figures, with the cluster each spec
/// belongs to (figure 7 builds each cluster from two subgroups).
pub fn figure_specs(figure_id: u8) -> Result<(Vec<GaussianClusterSpec>, Vec<usize>)> {
    let g = GaussianClusterSpec::new;
    let three = vec![g(30, 10.0, 0.5), g(30, 0.0, 4.0), g(30, 40.0, 10.0)];
    Ok(match figure_id {
        5 => (three, vec![0, 1, 2]),
        6 => {
            let mut four = three;
            four.push(g(30, 25.0, 7.0));
            (four, vec![0, 1, 2, 3])
        }
        7 => (
            vec![
                g(30, 10.0, 0.5),
                g(30, 0.0, 0.5),
                g(30, 0.0, 4.0),
                g(30, 10.0, 4.0),
                g(30, 40.0, 10.0),
                g(30, 0.0, 10.0),
                g(30, 25.0, 7.0),
                g(30, 25.0, 7.0),
            ],
            vec![0, 0, 1, 1, 2, 2, 3, 3],
        ),
        other => return Err(Error::invalid(format!("no figure {other}; expected 5, 6 or 7"))),
    })
}

/// Upper bound on histogram peaks for a figure's design: `k + k(k-1)/2`
/// over its distinct subgroups.
pub fn figure_peak_bound(figure_id: u8) -> Result<usize> {
    let (specs, _) = figure_specs(figure_id)?;
    let groups = specs.len();
    let identical_within = match figure_id {
        // The fourth cluster's two subgroups are the same distribution.
        7 => 1,
        _ => 0,
    };
    let k = groups - identical_within;
    Ok(crate::histpeaks::max_peaks(k))
}

/// Labelled cloud for a figure at dimensionality `m`.
pub fn figure_cloud(figure_id: u8, m: usize, seed: u64) -> Result<LabelledCloud> {
    let (specs, group_of_spec) = figure_specs(figure_id)?;
    let lc = gen_gaussian_clusters(&specs, m, seed)?;
    let labels = lc.labels.iter().map(|&s| group_of_spec[s]).collect();
    Ok(LabelledCloud {
        cloud: lc.cloud,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakFigure {
    pub figure: u8,
    pub m: usize,
    pub seed: u64,
    pub histogram: Histogram,
    pub peaks: PeakSet,
    pub inference: ClusterCountInference,
    pub composition: Vec<PeakComposition>,
}

/// Intra- and inter-cluster pairs near one histogram peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakComposition {
    pub bin: usize,
    pub intra_pairs: usize,
    pub inter_pairs: usize,
}

impl PeakComposition {
    pub fn is_inter(&self) -> bool {
        self.inter_pairs > self.intra_pairs
    }
}

/// Label bookkeeping for peaks: every pair is attributed to the peak whose
/// bin is nearest its own bin (ties to the left).
pub fn peak_composition(
    d: &DistanceMatrix,
    labels: &[usize],
    h: &Histogram,
    peaks: &PeakSet,
) -> Vec<PeakComposition> {
    let mut out: Vec<PeakComposition> = peaks
        .peak_bins
        .iter()
        .map(|&bin| PeakComposition {
            bin,
            intra_pairs: 0,
            inter_pairs: 0,
        })
        .collect();
    if out.is_empty() {
        return out;
    }
    for (i, j, v) in d.pairs() {
        let b = h.bin_of(v);
        let nearest = (0..out.len())
            .min_by_key(|&p| out[p].bin.abs_diff(b))
            .expect("non-empty");
        if labels[i] == labels[j] {
            out[nearest].intra_pairs += 1;
        } else {
            out[nearest].inter_pairs += 1;
        }
    }
    out
}

/// Histogram and peaks of one labelled cloud with the default peak settings.
pub fn histogram_peaks(
    lc: &LabelledCloud,
    bins: usize,
) -> Result<(DistanceMatrix, Histogram, PeakSet, Vec<PeakComposition>)> {
    let d = pairwise_distances(&lc.cloud);
    let h = build_histogram(d.values(), bins)?;
    let peaks = detect_peaks(&h, DEFAULT_SMOOTHING_WINDOW, DEFAULT_MIN_PROMINENCE)?;
    let comp = peak_composition(&d, &lc.labels, &h, &peaks);
    Ok((d, h, peaks, comp))
}

/// One figure at one dimensionality.
pub fn peak_figure(figure_id: u8, m: usize, seed: u64) -> Result<PeakFigure> {
    let lc = figure_cloud(figure_id, m, seed)?;
    let (_, histogram, peaks, composition) = histogram_peaks(&lc, DEFAULT_BINS)?;
    let inference = infer_min_clusters(peaks.len().max(1))?;
    Ok(PeakFigure {
        figure: figure_id,
        m,
        seed,
        histogram,
        peaks,
        inference,
        composition,
    })
}

/// A figure at both dimensionalities, 1000 and 10000.
pub fn reproduce_peak_figures(figure_id: u8, seed: u64) -> Result<Vec<PeakFigure>> {
    figure_specs(figure_id)?;
    [1000, 10_000]
        .par_iter()
        .map(|&m| peak_figure(figure_id, m, seed))
        .collect()
}
