//! Library results checked against independent, deliberately naive
//! reimplementations and closed-form expectations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use umlab::generators::{
    arima_model_a, arima_model_b, gen_arima, gen_gaussian_clusters, ArimaSpec, GaussianClusterSpec,
};
use umlab::geometry::{diffuseness, pairwise_distances, triangle_angles, DistanceMatrix, PointCloud};
use umlab::hierarchy::{
    complete_linkage, constrained_complete_linkage, cophenetic, single_linkage, Dendrogram,
};
use umlab::histpeaks::build_histogram;
use umlab::ultrametricity::{lerman_h, rammal_degree, UmConfig};

fn random_cloud(seed: u64, n: usize, m: usize) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * m).map(|_| rng.random_range(-5.0..5.0)).collect();
    PointCloud::new(data, n, m).unwrap()
}

/// Smallest achievable largest step over every simple path from `i` to `j`.
fn minimax_path(d: &DistanceMatrix, i: usize, j: usize) -> f64 {
    fn walk(d: &DistanceMatrix, at: usize, to: usize, seen: &mut Vec<bool>, worst: f64, best: &mut f64) {
        if at == to {
            *best = best.min(worst);
            return;
        }
        for next in 0..d.n() {
            if !seen[next] {
                seen[next] = true;
                walk(d, next, to, seen, worst.max(d.get(at, next)), best);
                seen[next] = false;
            }
        }
    }
    let mut seen = vec![false; d.n()];
    seen[i] = true;
    let mut best = f64::INFINITY;
    walk(d, i, j, &mut seen, 0.0, &mut best);
    best
}

#[test]
fn single_link_cophenetic_is_the_minimax_path_distance() {
    for seed in 0..15 {
        let n = 3 + (seed as usize % 5);
        let d = pairwise_distances(&random_cloud(seed, n, 3));
        let u = cophenetic(&single_linkage(&d).unwrap());
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(u.get(i, j), minimax_path(&d, i, j), "seed {seed} pair ({i}, {j})");
            }
        }
    }
}

/// Agglomeration recomputing every cluster distance from the raw matrix.
fn naive_complete(d: &DistanceMatrix, adjacent_only: bool) -> Vec<f64> {
    let mut clusters: Vec<Vec<usize>> = (0..d.n()).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                if adjacent_only && b != a + 1 {
                    continue;
                }
                let h = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| d.get(i, j)))
                    .fold(0.0, f64::max);
                if h < best.0 {
                    best = (h, a, b);
                }
            }
        }
        let (h, a, b) = best;
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        heights.push(h);
    }
    heights
}

fn heights(dend: &Dendrogram) -> Vec<f64> {
    dend.heights().collect()
}

#[test]
fn complete_link_matches_naive_agglomeration() {
    for seed in 0..20 {
        let d = pairwise_distances(&random_cloud(100 + seed, 4 + seed as usize % 9, 2));
        assert_eq!(heights(&complete_linkage(&d).unwrap()), naive_complete(&d, false));
    }
}

#[test]
fn constrained_link_matches_naive_agglomeration() {
    for seed in 0..20 {
        let d = pairwise_distances(&random_cloud(200 + seed, 4 + seed as usize % 9, 2));
        assert_eq!(
            heights(&constrained_complete_linkage(&d).unwrap()),
            naive_complete(&d, true)
        );
    }
}

#[test]
fn triangle_angles_match_the_law_of_cosines() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let p: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let side = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        };
        let s = [side(&p[1], &p[2]), side(&p[0], &p[2]), side(&p[0], &p[1])];
        let mut expect: Vec<f64> = (0..3)
            .map(|k| {
                let (a, b, c) = (s[k], s[(k + 1) % 3], s[(k + 2) % 3]);
                ((b * b + c * c - a * a) / (2.0 * b * c)).acos()
            })
            .collect();
        expect.sort_by(f64::total_cmp);
        let got = triangle_angles(&p[0], &p[1], &p[2]).unwrap();
        for (g, e) in [got.alpha, got.beta, got.gamma].iter().zip(&expect) {
            assert!((g - e).abs() < 1e-9, "{g} vs {e}");
        }
    }
}

#[test]
fn diffuseness_matches_covariance_traces() {
    // Σλ² / (Σλ)² = tr(C²) / tr(C)², with C formed explicitly.
    for seed in 0..5 {
        let (n, m) = (12, 5 + seed as usize);
        let cloud = random_cloud(300 + seed, n, m);
        let mean: Vec<f64> = (0..m)
            .map(|j| cloud.rows().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let mut c = vec![vec![0.0; m]; m];
        for r in cloud.rows() {
            for a in 0..m {
                for b in 0..m {
                    c[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / (n as f64 - 1.0);
                }
            }
        }
        let tr: f64 = (0..m).map(|a| c[a][a]).sum();
        let tr2: f64 = c.iter().flatten().map(|v| v * v).sum();
        let got = diffuseness(&cloud).unwrap();
        assert!((got.coefficient - tr2 / (tr * tr)).abs() < 1e-10);
        assert!((got.eigenvalues.iter().sum::<f64>() - tr).abs() < 1e-9 * tr);
    }
}

#[test]
fn gaussian_cluster_distances_concentrate_where_expected() {
    // Intra: √(2m σ²) = 200. Inter: √(2m σ² + m Δ²) = √(20000 · 102).
    let m = 20_000;
    let lc = gen_gaussian_clusters(
        &[GaussianClusterSpec::new(30, 0.0, 1.0), GaussianClusterSpec::new(30, 10.0, 1.0)],
        m,
        4,
    )
    .unwrap();
    let d = pairwise_distances(&lc.cloud);
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for (i, j, v) in d.pairs() {
        if lc.labels[i] == lc.labels[j] { intra.push(v) } else { inter.push(v) }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean(&intra) / 200.0 - 1.0).abs() < 0.01);
    assert!((mean(&inter) / (20_000.0f64 * 102.0).sqrt() - 1.0).abs() < 0.01);
}

/// Autocovariances at lags 0 and 1 from the MA(∞) weights.
fn arma_autocov(spec: &ArimaSpec) -> (f64, f64) {
    let mut psi = vec![1.0];
    for j in 1..2000 {
        let mut v = spec.ma.get(j - 1).copied().unwrap_or(0.0);
        for (i, a) in spec.ar.iter().enumerate() {
            if j > i {
                v += a * psi[j - 1 - i];
            }
        }
        psi.push(v);
    }
    let var_e = spec.innovation_df / (spec.innovation_df - 2.0);
    let g0 = var_e * psi.iter().map(|p| p * p).sum::<f64>();
    let g1 = var_e * psi.windows(2).map(|w| w[0] * w[1]).sum::<f64>();
    (g0, g1)
}

#[test]
fn arma_moments_match_theory() {
    for spec in [arima_model_a(400_000), arima_model_b(400_000)] {
        let x = gen_arima(&spec, 11).unwrap();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let g0 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let g1 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / n;
        let (t0, t1) = arma_autocov(&spec);
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((g0 / t0 - 1.0).abs() < 0.05, "variance {g0} vs {t0}");
        assert!((g1 / g0 - t1 / t0).abs() < 0.02, "lag-1 acf {} vs {}", g1 / g0, t1 / t0);
    }
}

#[test]
fn lerman_matches_a_sort_based_recount() {
    for seed in 0..6 {
        let n = 5 + seed as usize;
        let d = pairwise_distances(&random_cloud(400 + seed, n, 3));
        let mut order: Vec<(f64, usize, usize)> = d.pairs().map(|(i, j, v)| (v, i, j)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let rank = |i: usize, j: usize| {
            order.iter().position(|p| (p.1, p.2) == (i.min(j), i.max(j))).unwrap()
        };
        let pairs = order.len() as f64;
        let mut total = 0.0;
        let mut count = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let mut r = [rank(i, j), rank(j, k), rank(i, k)];
                    r.sort_unstable();
                    total += (r[2] - r[1]) as f64 / (pairs - 1.0);
                    count += 1.0;
                }
            }
        }
        let cfg = UmConfig { exhaustive_threshold: 1_000, ..UmConfig::default() };
        let got = lerman_h(&d, &cfg).unwrap();
        assert_eq!(got.triplets_examined, count as usize);
        assert!((got.h_classifiability - (1.0 - total / count)).abs() < 1e-12);
    }
}

#[test]
fn rammal_matches_minimax_paths() {
    for seed in 0..6 {
        let n = 3 + seed as usize;
        let d = pairwise_distances(&random_cloud(500 + seed, n, 2));
        let (mut sum_d, mut sum_gap) = (0.0, 0.0);
        for (i, j, v) in d.pairs() {
            sum_d += v;
            sum_gap += v - minimax_path(&d, i, j);
        }
        let got = rammal_degree(&d).unwrap();
        assert!((got.degree - (1.0 - sum_gap / sum_d)).abs() < 1e-12);
    }
}

#[test]
fn histogram_counts_match_edge_comparisons() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let values: Vec<f64> = (0..5000).map(|_| rng.random_range(0.0..3.0f64).powi(2)).collect();
    let h = build_histogram(&values, 37).unwrap();
    for b in 0..37 {
        let (lo, hi) = (h.bin_edges[b], h.bin_edges[b + 1]);
        let expect = values
            .iter()
            .filter(|v| (**v > lo || (b == 0 && **v >= lo)) && **v <= hi)
            .count() as u64;
        assert_eq!(h.counts[b], expect, "bin {b}");
    }
}

#[test]
fn model_b_is_less_persistent_than_model_a() {
    let (a0, a1) = arma_autocov(&arima_model_a(1));
    let (b0, b1) = arma_autocov(&arima_model_b(1));
    assert!(a1 / a0 > 0.5);
    assert!(b1 / b0 < -0.3);
}

#[test]
fn em_trace_is_monotone_on_a_hard_mixture() {
    let x = umlab::histpeaks::sample_mixture(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.5], &[1.0, 0.5, 2.0], 900, 3);
    let fit = umlab::histpeaks::fit_gmm_1d(&x, 3, 3, umlab::histpeaks::DEFAULT_MAX_ITER, umlab::histpeaks::DEFAULT_TOL).unwrap();
    assert!(fit.loglik_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()));
}

#[test]
fn gaussian_clusters_are_labelled_in_blocks() {
    let specs = umlab::pipeline::TWO_CLUSTERS;
    let lc = gen_gaussian_clusters(&specs, 5, 0).unwrap();
    assert_eq!(lc.labels[..100], [0; 100]);
    assert_eq!(lc.labels[100..], [1; 100]);
}
