use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use umlab::embedding::{pcoa, Axes};
use umlab::generators::{
    arima_model_a, arima_model_b, gen_arima_segments, gen_gaussian_clusters, gen_hypercube,
    gen_regime_signal, gen_uniform, starts_from_one_based, ArimaSpec, GaussianClusterSpec,
};
use umlab::geometry::{pairwise_distances, DistanceMatrix};
use umlab::hierarchy::{cut, cut_segments, linkage, Linkage};
use umlab::histpeaks::{
    build_histogram, detect_peaks, infer_min_clusters, select_k_bic, DEFAULT_BINS,
    DEFAULT_MIN_PROMINENCE, DEFAULT_SMOOTHING_WINDOW,
};
use umlab::io;
use umlab::pipeline::{
    reproduce_peak_figures, reproduce_table, segment_signal, summarize_rows, SegmentationConfig,
};
use umlab::ultrametricity::{lerman_h, rammal_degree, triangle_um_from_distances, UmConfig};
use umlab::{Error, Result};

/// Ultrametricity measures, distance-histogram peaks and signal segmentation.
#[derive(Parser)]
#[command(name = "umlab", version)]
struct Cli {
    /// Run directory receiving every output file.
    #[arg(long, global = true, default_value = "run")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cloud or signal.
    Gen(GenArgs),
    /// Ultrametricity of a cloud or distance matrix.
    UmMeasure(UmArgs),
    /// Histogram of pairwise distances.
    Disthist(HistArgs),
    /// Peaks of the distance histogram and the implied cluster count.
    Peaks(PeakArgs),
    /// 1-D Gaussian mixtures on the pairwise distances, chosen by BIC.
    GmmBic(GmmArgs),
    /// Principal coordinates.
    Pcoa(PcoaArgs),
    /// Agglomerative clustering.
    Hcluster(HclusterArgs),
    /// Sliding-window segmentation of a one-column signal.
    Segment(SegmentArgs),
    /// Regenerate a simulation table or peak-count figure.
    Repro(ReproArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Uniform,
    Hypercube,
    Gclusters,
    Arima,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian cluster as `count,mean,sd`; repeat for more clusters.
    #[arg(long = "cluster", value_parser = parse_cluster)]
    clusters: Vec<GaussianClusterSpec>,
    /// ARMA models (`a`, `b`) in order.
    #[arg(long, value_delimiter = ',', default_values_t = ['a', 'b'])]
    models: Vec<char>,
    /// Segments of length `m` per model (cloud output).
    #[arg(long, default_value_t = 50)]
    per_model: usize,
    /// Write a concatenated signal with this many samples per model instead
    /// of a cloud.
    #[arg(long)]
    signal_len: Option<usize>,
}

fn parse_cluster(s: &str) -> std::result::Result<GaussianClusterSpec, String> {
    let f: Vec<&str> = s.split(',').collect();
    if f.len() != 3 {
        return Err("expected count,mean,sd".into());
    }
    let count = f[0].trim().parse().map_err(|e| format!("count: {e}"))?;
    let mean = f[1].trim().parse().map_err(|e| format!("mean: {e}"))?;
    let sd = f[2].trim().parse().map_err(|e| format!("sd: {e}"))?;
    Ok(GaussianClusterSpec::new(count, mean, sd))
}

/// A cloud CSV or a distance file (TSV triples or UMD1 binary).
#[derive(Args)]
struct Source {
    #[arg(long, conflicts_with = "distances", required_unless_present = "distances")]
    input: Option<PathBuf>,
    #[arg(long)]
    distances: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<DistanceMatrix> {
        match (&self.input, &self.distances) {
            (Some(p), _) => Ok(pairwise_distances(&io::read_cloud_csv(p)?)),
            (None, Some(p)) => io::read_distances(p),
            (None, None) => Err(Error::InvalidInput("give --input or --distances".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    Triangle,
    Lerman,
    Rammal,
}

#[derive(Args)]
struct UmArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "triangle")]
    measure: Measure,
    #[arg(long, default_value_t = 300)]
    samples: usize,
    #[arg(long, default_value_t = 0.0349)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistFormat {
    Tsv,
    Bin,
}

#[derive(Args)]
struct HistArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Also write the distance matrix.
    #[arg(long, value_enum)]
    write_distances: Option<DistFormat>,
}

#[derive(Args)]
struct PeakArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Odd moving-average width.
    #[arg(long, default_value_t = DEFAULT_SMOOTHING_WINDOW)]
    window: usize,
    /// Minimum prominence as a fraction of the largest smoothed count.
    #[arg(long, default_value_t = DEFAULT_MIN_PROMINENCE)]
    prominence: f64,
    /// Cluster labels, one per row, to attribute peaks to intra- or
    /// inter-cluster pairs.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct GmmArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 6)]
    kmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PcoaArgs {
    #[command(flatten)]
    source: Source,
    /// Number of axes, or `all`.
    #[arg(long, default_value = "2", value_parser = parse_axes)]
    axes: Axes,
}

fn parse_axes(s: &str) -> std::result::Result<Axes, String> {
    if s == "all" {
        Ok(Axes::All)
    } else {
        s.parse().map(Axes::Count).map_err(|_| format!("expected a count or `all`, got {s:?}"))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Single,
    Complete,
    Constrained,
}

#[derive(Args)]
struct HclusterArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "single")]
    method: Method,
    /// Cut into this many clusters and write the labels.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct SegmentArgs {
    /// One-column signal file.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    window: usize,
    #[arg(long, default_value_t = 1_000)]
    stride: usize,
    /// Explicit 1-based window starts, comma separated; overrides --stride.
    #[arg(long, value_delimiter = ',')]
    starts: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 6)]
    kmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Principal axes for clustering, or `all`.
    #[arg(long, default_value = "2", value_parser = parse_axes)]
    axes: Axes,
    /// Windows dropped from each end.
    #[arg(long, default_value_t = 0)]
    trim: usize,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ReproTarget {
    #[arg(long)]
    table: Option<u8>,
    #[arg(long)]
    figure: Option<u8>,
}

#[derive(Args)]
struct ReproArgs {
    #[command(flatten)]
    target: ReproTarget,
    /// Seeds per table row.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn model(c: char) -> Result<fn(usize) -> ArimaSpec> {
    match c.to_ascii_lowercase() {
        'a' => Ok(arima_model_a),
        'b' => Ok(arima_model_b),
        other => Err(Error::InvalidInput(format!("unknown model {other:?}; expected a or b"))),
    }
}

fn gen(out: &Path, a: &GenArgs) -> Result<()> {
    let lc = match a.kind {
        GenKind::Uniform => {
            let c = gen_uniform(a.n, a.m, a.seed)?;
            return io::write_cloud_csv(&out.join("cloud.csv"), &c);
        }
        GenKind::Hypercube => {
            let c = gen_hypercube(a.n, a.m, a.seed)?;
            return io::write_cloud_csv(&out.join("cloud.csv"), &c);
        }
        GenKind::Gclusters => {
            if a.clusters.is_empty() {
                return Err(Error::InvalidInput("give at least one --cluster".into()));
            }
            gen_gaussian_clusters(&a.clusters, a.m, a.seed)?
        }
        GenKind::Arima => {
            let makers = a.models.iter().map(|c| model(*c)).collect::<Result<Vec<_>>>()?;
            if let Some(len) = a.signal_len {
                let specs: Vec<ArimaSpec> = makers.iter().map(|f| f(len)).collect();
                let signal = gen_regime_signal(&specs, len, a.seed)?;
                let labels: Vec<usize> = (0..signal.len()).map(|t| t / len).collect();
                io::write_signal(&out.join("signal.txt"), &signal)?;
                return io::write_labels(&out.join("labels.txt"), &labels);
            }
            let specs: Vec<ArimaSpec> = makers.iter().map(|f| f(a.m)).collect();
            gen_arima_segments(&specs, a.per_model, a.m, a.seed)?
        }
    };
    io::write_cloud_csv(&out.join("cloud.csv"), &lc.cloud)?;
    io::write_labels(&out.join("labels.txt"), &lc.labels)
}

fn um_measure(out: &Path, a: &UmArgs) -> Result<()> {
    let d = a.source.load()?;
    let cfg = UmConfig {
        sample_size: a.samples,
        angle_tolerance: a.tolerance,
        seed: a.seed,
        ..UmConfig::default()
    };
    let path = out.join("report.json");
    match a.measure {
        Measure::Triangle => io::write_json(&path, &triangle_um_from_distances(&d, &cfg)?),
        Measure::Lerman => io::write_json(&path, &lerman_h(&d, &cfg)?),
        Measure::Rammal => io::write_json(&path, &rammal_degree(&d)?),
    }
}

fn histogram_rows(h: &umlab::histpeaks::Histogram, ys: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
    (0..h.bins()).map(|i| h.bin_center(i)).zip(ys).collect()
}

fn disthist(out: &Path, a: &HistArgs) -> Result<()> {
    let d = a.source.load()?;
    let h = build_histogram(d.values(), a.bins)?;
    match a.write_distances {
        Some(DistFormat::Tsv) => io::write_distances_tsv(&out.join("distances.tsv"), &d)?,
        Some(DistFormat::Bin) => io::write_distances_bin(&out.join("distances.umd"), &d)?,
        None => {}
    }
    io::write_json(&out.join("histogram.json"), &h)?;
    let rows = histogram_rows(&h, h.counts.iter().map(|c| *c as f64));
    io::write_xy_tsv(&out.join("histogram.tsv"), "distance", "count", &rows)
}

fn peaks(out: &Path, a: &PeakArgs) -> Result<()> {
    let d = a.source.load()?;
    let h = build_histogram(d.values(), a.bins)?;
    let p = detect_peaks(&h, a.window, a.prominence)?;
    let inference = (!p.is_empty()).then(|| infer_min_clusters(p.len())).transpose()?;
    let composition = match &a.labels {
        Some(path) => {
            let labels = io::read_labels(path)?;
            if labels.len() != d.n() {
                return Err(Error::InvalidInput(format!(
                    "{} labels for {} points",
                    labels.len(),
                    d.n()
                )));
            }
            Some(umlab::pipeline::peak_composition(&d, &labels, &h, &p))
        }
        None => None,
    };
    let centres: Vec<f64> = p.peak_bins.iter().map(|&b| h.bin_center(b)).collect();
    io::write_json(
        &out.join("peaks.json"),
        &serde_json::json!({
            "n_peaks": p.len(),
            "peak_bins": p.peak_bins,
            "peak_distances": centres,
            "prominences": p.prominences,
            "smoothing_window": p.smoothing_window,
            "min_prominence": p.min_prominence,
            "inference": inference,
            "composition": composition,
        }),
    )?;
    let rows = histogram_rows(&h, h.counts.iter().map(|c| *c as f64));
    io::write_xy_tsv(&out.join("histogram.tsv"), "distance", "count", &rows)?;
    let rows = histogram_rows(&h, p.smoothed.iter().copied());
    io::write_xy_tsv(&out.join("smoothed.tsv"), "distance", "smoothed", &rows)
}

fn gmm_bic(out: &Path, a: &GmmArgs) -> Result<()> {
    let d = a.source.load()?;
    let sel = select_k_bic(d.values(), 1..=a.kmax, a.seed)?;
    let trace: Vec<(f64, f64)> = sel.fits.iter().map(|f| (f.k as f64, f.bic)).collect();
    io::write_xy_tsv(&out.join("bic.tsv"), "k", "bic", &trace)?;
    io::write_json(&out.join("mixture.json"), sel.best())?;
    io::write_json(&out.join("selection.json"), &sel)
}

fn pcoa_cmd(out: &Path, a: &PcoaArgs) -> Result<()> {
    let d = a.source.load()?;
    let r = pcoa(&d, a.axes)?;
    match r.to_cloud() {
        Some(c) => io::write_cloud_csv(&out.join("coordinates.csv"), &c)?,
        None => std::fs::write(out.join("coordinates.csv"), "")?,
    }
    let rows: Vec<Vec<String>> = r
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let frac = r.variance_fraction.get(i).map_or(String::new(), |f| f.to_string());
            vec![(i + 1).to_string(), l.to_string(), frac]
        })
        .collect();
    io::write_table_tsv(&out.join("eigenvalues.tsv"), &["axis", "eigenvalue", "variance_fraction"], &rows)?;
    io::write_json(&out.join("pcoa.json"), &r)
}

fn hcluster(out: &Path, a: &HclusterArgs) -> Result<()> {
    let d = a.source.load()?;
    let method = match a.method {
        Method::Single => Linkage::Single,
        Method::Complete => Linkage::Complete,
        Method::Constrained => Linkage::ConstrainedComplete,
    };
    let dend = linkage(&d, method)?;
    io::write_dendrogram_tsv(&out.join("dendrogram.tsv"), &dend)?;
    if let Some(k) = a.k {
        io::write_labels(&out.join("labels.txt"), &cut(&dend, k)?)?;
        if dend.constrained {
            io::write_json(&out.join("segmentation.json"), &cut_segments(&dend, k)?)?;
        }
    }
    Ok(())
}

fn segment(out: &Path, a: &SegmentArgs) -> Result<()> {
    let signal = io::read_signal(&a.signal)?;
    let starts = a.starts.as_deref().map(starts_from_one_based).transpose()?;
    let cfg = SegmentationConfig {
        window_len: a.window,
        stride: a.stride,
        starts,
        bins: a.bins,
        k_max: a.kmax,
        seed: a.seed,
        axes: a.axes,
        trim: a.trim,
    };
    let run = segment_signal(&signal, &cfg)?;
    io::write_json(&out.join("segmentation.json"), &run.segmentation)?;
    io::write_json(&out.join("run.json"), &run)?;
    let h = &run.histogram;
    let rows = histogram_rows(h, h.counts.iter().map(|c| *c as f64));
    io::write_xy_tsv(&out.join("histogram.tsv"), "distance", "count", &rows)?;
    if let Some(sel) = &run.bic {
        let trace: Vec<(f64, f64)> = sel.fits.iter().map(|f| (f.k as f64, f.bic)).collect();
        io::write_xy_tsv(&out.join("bic.tsv"), "k", "bic", &trace)?;
    }
    if let Some(c) = run.pcoa.to_cloud() {
        io::write_cloud_csv(&out.join("coordinates.csv"), &c)?;
    }
    io::write_dendrogram_tsv(&out.join("dendrogram.tsv"), &run.dendrogram)?;
    // Window and sample positions are reported 1-based, like the input.
    let rows: Vec<Vec<String>> = run
        .segments
        .iter()
        .enumerate()
        .map(|(s, seg)| {
            vec![
                (s + 1).to_string(),
                (seg.first_window + 1).to_string(),
                (seg.last_window + 1).to_string(),
                (seg.signal_start + 1).to_string(),
                (seg.signal_end + 1).to_string(),
                seg.mean.to_string(),
                seg.max_intra_distance.to_string(),
            ]
        })
        .collect();
    io::write_table_tsv(
        &out.join("segments.tsv"),
        &["segment", "first_window", "last_window", "start", "end", "mean", "max_intra_distance"],
        &rows,
    )?;
    for (s, seg) in run.segments.iter().enumerate() {
        println!(
            "segment {}: windows {}-{}, samples {}-{}",
            s + 1,
            seg.first_window + 1,
            seg.last_window + 1,
            seg.signal_start + 1,
            seg.signal_end + 1
        );
    }
    Ok(())
}

fn repro(out: &Path, a: &ReproArgs) -> Result<()> {
    if let Some(t) = a.target.table {
        let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
        let rows = reproduce_table(t, &seeds)?;
        let summary = summarize_rows(&rows);
        io::write_json(&out.join(format!("table{t}.json")), &serde_json::json!({
            "rows": rows,
            "summary": summary,
        }))?;
        let tsv: Vec<Vec<String>> = summary
            .iter()
            .map(|s| {
                vec![
                    format!("{:?}", s.generator),
                    s.n.to_string(),
                    s.m.to_string(),
                    format!("{:.3}", s.isosc),
                    format!("{:.3}", s.equil),
                    format!("{:.3}", s.um),
                ]
            })
            .collect();
        io::write_table_tsv(
            &out.join(format!("table{t}.tsv")),
            &["generator", "n", "m", "isosc", "equil", "um"],
            &tsv,
        )?;
        for r in &tsv {
            println!("{}", r.join("\t"));
        }
    }
    if let Some(f) = a.target.figure {
        let figs = reproduce_peak_figures(f, a.seed)?;
        for fig in &figs {
            let h = &fig.histogram;
            let rows = histogram_rows(h, h.counts.iter().map(|c| *c as f64));
            io::write_xy_tsv(
                &out.join(format!("figure{f}_m{}.tsv", fig.m)),
                "distance",
                "count",
                &rows,
            )?;
            println!("figure {f}, m = {}: {} peaks", fig.m, fig.peaks.len());
        }
        io::write_json(&out.join(format!("figure{f}.json")), &figs)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Gen(a) => gen(out, a),
        Command::UmMeasure(a) => um_measure(out, a),
        Command::Disthist(a) => disthist(out, a),
        Command::Peaks(a) => peaks(out, a),
        Command::GmmBic(a) => gmm_bic(out, a),
        Command::Pcoa(a) => pcoa_cmd(out, a),
        Command::Hcluster(a) => hcluster(out, a),
        Command::Segment(a) => segment(out, a),
        Command::Repro(a) => repro(out, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("umlab: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
