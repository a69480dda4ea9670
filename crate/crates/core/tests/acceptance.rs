//! Acceptance criteria. Runs without the test harness so that every
//! criterion prints its `criterion N: PASS|FAIL ...` line, then exits
//! non-zero if any failed.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use umlab::generators::{arima_model_a, arima_model_b, gen_regime_signal};
use umlab::geometry::{pairwise_distances, DistanceMatrix, PointCloud};
use umlab::hierarchy::{constrained_complete_linkage, cophenetic, single_linkage};
use umlab::histpeaks::{infer_min_clusters, peaks_to_signal_clusters, sample_mixture, select_k_bic};
use umlab::embedding::{pcoa, Axes};
use umlab::pipeline::{
    histogram_peaks, peak_figure, run_setting, segment_signal, table_settings, GeneratorId,
    SegmentationConfig, TableSetting,
};
use umlab::ultrametricity::{triangle_um_from_distances, UmConfig};

fn verdict(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn mean_um(setting: &TableSetting, seeds: &[u64]) -> f64 {
    let ums: Vec<f64> = seeds
        .iter()
        .map(|&s| run_setting(setting, s).unwrap().um)
        .collect();
    mean(&ums)
}

fn criterion_1_um_grows_with_dimension() -> bool {
    let t0 = Instant::now();
    let seeds = [0, 1, 2];
    let settings = table_settings(1).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for g in [GeneratorId::Uniform, GeneratorId::Hypercube, GeneratorId::Gaussian] {
        let means: Vec<f64> = settings
            .iter()
            .filter(|s| s.generator == g)
            .map(|s| mean_um(s, &seeds))
            .collect();
        let monotone = means.windows(2).all(|w| w[1] >= w[0]);
        let ends = means[0] <= 0.25 && means[3] >= 0.85;
        ok &= monotone && ends;
        detail += &format!("{g:?}={means:.3?} ");
    }
    let elapsed = t0.elapsed();
    ok &= elapsed <= Duration::from_secs(120);
    verdict(1, ok, &format!("{detail}in {elapsed:.1?}"));
    ok
}

fn criterion_2_two_clusters_are_mostly_isosceles() -> bool {
    let setting = table_settings(2)
        .unwrap()
        .into_iter()
        .find(|s| s.m == 20_000)
        .unwrap();
    let rows: Vec<_> = (0..5).map(|s| run_setting(&setting, s).unwrap()).collect();
    let good = rows
        .iter()
        .filter(|r| r.um >= 0.90 && r.isosc > r.equil)
        .count();
    let ok = good >= 4;
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("({:.3}/{:.3}/{:.3})", r.isosc, r.equil, r.um))
        .collect();
    verdict(2, ok, &format!("{good}/5 seeds; isosc/equil/um {}", detail.join(" ")));
    ok
}

fn criterion_3_overlapping_clusters_trend() -> bool {
    let seeds = [0, 1, 2];
    let means: Vec<f64> = table_settings(3)
        .unwrap()
        .iter()
        .filter(|s| s.m <= 20_000)
        .map(|s| mean_um(s, &seeds))
        .collect();
    // One adjacent pair may dip; everything else must not decrease.
    let dips = means.windows(2).filter(|w| w[1] < w[0]).count();
    let last = means[3];
    let ok = dips <= 1 && (0.40..=0.75).contains(&last);
    verdict(3, ok, &format!("means {means:.3?}, {dips} dip(s)"));
    ok
}

fn criterion_4_arima_segments() -> bool {
    let setting = TableSetting {
        table: 4,
        generator: GeneratorId::ArimaSegments,
        n: 100,
        m: 20_000,
    };
    let seed = 0;
    let lc = setting.generator.generate(setting.n, setting.m, seed).unwrap();
    let d = pairwise_distances(&lc.cloud);
    let um = triangle_um_from_distances(&d, &UmConfig::with_seed(seed)).unwrap().um_fraction;
    let (_, _, peaks, comp) = histogram_peaks(&lc, 100).unwrap();
    let n_peaks = peaks.len();
    let inner_inter = comp.len() >= 3
        && comp[1..comp.len() - 1].iter().any(|c| c.is_inter())
        && !comp[0].is_inter()
        && !comp[comp.len() - 1].is_inter();
    let ok = (0.45..=0.85).contains(&um) && (2..=4).contains(&n_peaks) && inner_inter;
    let kinds: Vec<&str> = comp
        .iter()
        .map(|c| if c.is_inter() { "inter" } else { "intra" })
        .collect();
    verdict(
        4,
        ok,
        &format!("um {um:.3}, {n_peaks} peaks at bins {:?} ({})", peaks.peak_bins, kinds.join(",")),
    );
    ok
}

fn criterion_5_peak_counts() -> bool {
    let mut ok = true;
    let mut detail = String::new();
    for (fig, expected) in [(5u8, 6usize), (6, 10)] {
        let t0 = Instant::now();
        let low = peak_figure(fig, 1000, 0).unwrap().peaks.len();
        let high = peak_figure(fig, 10_000, 0).unwrap().peaks.len();
        let elapsed = t0.elapsed();
        ok &= high.abs_diff(expected) <= 1 && high >= low && elapsed <= Duration::from_secs(60);
        detail += &format!("fig{fig}: {low} peaks at m=1000, {high} at m=10000 in {elapsed:.1?}; ");
    }
    verdict(5, ok, &detail);
    ok
}

fn criterion_6_identifiability() -> bool {
    let k = infer_min_clusters(7).unwrap().min_k;
    let c = peaks_to_signal_clusters(5).unwrap().clusters;
    let ok = k == 4 && c == 3;
    verdict(6, ok, &format!("infer_min_clusters(7) = {k}, peaks_to_signal_clusters(5) = {c}"));
    ok
}

fn criterion_7_bic_recovers_k() -> bool {
    let mut ok = true;
    let mut detail = String::new();
    for k in [2usize, 3, 5] {
        // Unit sds, means 6 apart.
        let means: Vec<f64> = (0..k).map(|i| 6.0 * i as f64).collect();
        let sds = vec![1.0; k];
        let weights = vec![1.0; k];
        let mut hits = 0;
        let mut monotone = true;
        for seed in 0..10u64 {
            let x = sample_mixture(&weights, &means, &sds, 300 * k, seed);
            let sel = select_k_bic(&x, 1..=k + 3, seed).unwrap();
            hits += usize::from(sel.best_k == k);
            monotone &= sel.fits.iter().all(|f| {
                f.loglik_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0))
            });
        }
        ok &= hits >= 9 && monotone;
        detail += &format!("k={k}: {hits}/10{} ", if monotone { "" } else { " (loglik fell)" });
    }
    verdict(7, ok, &detail);
    ok
}

fn is_ultrametric(d: &DistanceMatrix, eps: f64) -> bool {
    let n = d.n();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k && d.get(i, k) > d.get(i, j).max(d.get(j, k)) + eps {
                    return false;
                }
            }
        }
    }
    true
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, m: usize) -> PointCloud {
    let data = (0..n * m).map(|_| rng.random_range(-10.0..10.0)).collect();
    PointCloud::new(data, n, m).unwrap()
}

/// Largest ultrametric below `d` that a given merge order allows: step `t`
/// may sit no higher than the closest pair it joins, nor above any later step.
fn best_ultrametric_for_order(d: &DistanceMatrix, order: &[(Vec<usize>, Vec<usize>)]) -> Vec<f64> {
    let n = d.n();
    let link: Vec<f64> = order
        .iter()
        .map(|(a, b)| {
            a.iter()
                .flat_map(|&i| b.iter().map(move |&j| (i, j)))
                .map(|(i, j)| d.get(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut heights = link.clone();
    for t in (0..heights.len().saturating_sub(1)).rev() {
        heights[t] = heights[t].min(heights[t + 1]);
    }
    let mut w = vec![0.0; n * (n - 1) / 2];
    for ((a, b), h) in order.iter().zip(&heights) {
        for &i in a {
            for &j in b {
                w[umlab::geometry::condensed_index(n, i.min(j), i.max(j))] = *h;
            }
        }
    }
    w
}

fn all_merge_orders(clusters: Vec<Vec<usize>>, acc: &mut Vec<(Vec<usize>, Vec<usize>)>, out: &mut Vec<Vec<(Vec<usize>, Vec<usize>)>>) {
    if clusters.len() == 1 {
        out.push(acc.clone());
        return;
    }
    for a in 0..clusters.len() {
        for b in a + 1..clusters.len() {
            let mut next: Vec<Vec<usize>> = Vec::with_capacity(clusters.len() - 1);
            let mut joined = clusters[a].clone();
            joined.extend_from_slice(&clusters[b]);
            for (c, members) in clusters.iter().enumerate() {
                if c != a && c != b {
                    next.push(members.clone());
                }
            }
            next.push(joined);
            acc.push((clusters[a].clone(), clusters[b].clone()));
            all_merge_orders(next, acc, out);
            acc.pop();
        }
    }
}

fn criterion_8_property_suite() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();

    // Cophenetic matrices are ultrametric.
    for t in 0..100 {
        let n = 3 + t % 6;
        let d = pairwise_distances(&random_cloud(&mut rng, n, 4));
        if !is_ultrametric(&cophenetic(&single_linkage(&d).unwrap()), 0.0) {
            failures.push(format!("cophenetic not ultrametric (cloud {t})"));
        }
    }

    // Subdominant maximality: no ultrametric below d exceeds it anywhere,
    // and some merge order attains it.
    for t in 0..20 {
        let n = 3 + t % 4;
        let d = pairwise_distances(&random_cloud(&mut rng, n, 3));
        let u = cophenetic(&single_linkage(&d).unwrap());
        let mut orders = Vec::new();
        all_merge_orders((0..n).map(|i| vec![i]).collect(), &mut Vec::new(), &mut orders);
        let mut attained = false;
        for order in &orders {
            let w = best_ultrametric_for_order(&d, order);
            if w.iter().zip(u.values()).any(|(a, b)| *a > *b + 1e-12) {
                failures.push(format!("ultrametric above subdominant (cloud {t})"));
                break;
            }
            attained |= w.iter().zip(u.values()).all(|(a, b)| (a - b).abs() <= 1e-12);
        }
        if !attained {
            failures.push(format!("subdominant not attained (cloud {t})"));
        }
    }

    // Constrained complete link never inverts.
    for t in 0..1000 {
        let n = 2 + t % 30;
        let m = 1 + t % 3;
        let d = pairwise_distances(&random_cloud(&mut rng, n, m));
        if constrained_complete_linkage(&d).unwrap().inversions() != 0 {
            failures.push(format!("inversion in sequence {t}"));
        }
    }

    // PCoA reconstructs Euclidean distances.
    for t in 0..20 {
        let n = 5 + t;
        let d = pairwise_distances(&random_cloud(&mut rng, n, 1 + t % 7));
        let back = pairwise_distances(&pcoa(&d, Axes::All).unwrap().to_cloud().unwrap());
        let worst = back
            .values()
            .iter()
            .zip(d.values())
            .map(|(a, b)| (a - b).abs() / b.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if worst > 1e-6 {
            failures.push(format!("pcoa relative error {worst:e} (cloud {t})"));
        }
    }

    // Regular simplices score exactly 1.
    for n in 3..=10 {
        let d = DistanceMatrix::from_condensed(n, vec![2.5; n * (n - 1) / 2]).unwrap();
        let r = triangle_um_from_distances(&d, &UmConfig::default()).unwrap();
        if r.um_fraction != 1.0 || r.equilateral_fraction != 1.0 {
            failures.push(format!("simplex n={n} scored {}", r.um_fraction));
        }
    }

    let ok = failures.is_empty();
    verdict(8, ok, &failures.join("; "));
    ok
}

/// First window whose centre reaches the change point.
fn true_boundary_window(starts: &[usize], window_len: usize, change: usize) -> usize {
    starts
        .iter()
        .position(|s| s + window_len / 2 >= change)
        .unwrap()
}

fn criterion_9_two_regime_segmentation() -> bool {
    let t0 = Instant::now();
    let cfg = SegmentationConfig::default();
    let mut hits = 0;
    let mut detail = Vec::new();
    for seed in 0..10u64 {
        let signal =
            gen_regime_signal(&[arima_model_a(50_000), arima_model_b(50_000)], 50_000, seed).unwrap();
        let run = segment_signal(&signal, &SegmentationConfig { seed, ..cfg.clone() }).unwrap();
        let truth = true_boundary_window(&run.starts, cfg.window_len, 50_000);
        let hit = run.segmentation.k == 2
            && run.segmentation.boundaries[0].abs_diff(truth) <= 2;
        hits += usize::from(hit);
        detail.push(format!("k={} b={:?}", run.segmentation.k, run.segmentation.boundaries));
    }
    let elapsed = t0.elapsed();
    let ok = hits >= 8 && elapsed <= Duration::from_secs(180);
    verdict(
        9,
        ok,
        &format!("{hits}/10 seeds within 2 windows of the change; {} in {elapsed:.1?}", detail.join(", ")),
    );
    ok
}

fn main() {
    let checks: [fn() -> bool; 9] = [
        criterion_1_um_grows_with_dimension,
        criterion_2_two_clusters_are_mostly_isosceles,
        criterion_3_overlapping_clusters_trend,
        criterion_4_arima_segments,
        criterion_5_peak_counts,
        criterion_6_identifiability,
        criterion_7_bic_recovers_k,
        criterion_8_property_suite,
        criterion_9_two_regime_segmentation,
    ];
    let failed = checks.iter().filter(|check| !check()).count();
    println!("acceptance: {} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
