//! Seeded synthetic data: uniform clouds, hypercube vertices, Gaussian
//! cluster mixtures, ARMA series with Student-t innovations, and sliding
//! window embeddings of a signal.
//!
//! Every generator draws from a single `ChaCha8Rng` stream seeded from the
//! caller's seed, so output is bit-reproducible.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Samples discarded before an ARMA series is emitted.
pub const ARIMA_BURN_IN: usize = 1000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_shape(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::invalid(format!("need n, m >= 1, got {n} x {m}")));
    }
    Ok(())
}

/// `n × m` i.i.d. Uniform[0, 1] coordinates.
pub fn gen_uniform(n: usize, m: usize, seed: u64) -> Result<PointCloud> {
    check_shape(n, m)?;
    let mut r = rng(seed);
    let data = (0..n * m).map(|_| r.random::<f64>()).collect();
    PointCloud::new(data, n, m)
}

/// `n` random vertices of the unit hypercube `{0, 1}^m`.
pub fn gen_hypercube(n: usize, m: usize, seed: u64) -> Result<PointCloud> {
    check_shape(n, m)?;
    let mut r = rng(seed);
    let coin = Bernoulli::new(0.5).expect("p = 0.5 is valid");
    let data = (0..n * m)
        .map(|_| if coin.sample(&mut r) { 1.0 } else { 0.0 })
        .collect();
    PointCloud::new(data, n, m)
}

/// One Gaussian cluster: `count` points, each coordinate drawn from
/// `Normal(mean, sd²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianClusterSpec {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
}

impl GaussianClusterSpec {
    pub const fn new(count: usize, mean: f64, sd: f64) -> Self {
        Self { count, mean, sd }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("cluster count must be at least 1"));
        }
        if !(self.sd > 0.0 && self.sd.is_finite()) || !self.mean.is_finite() {
            return Err(Error::invalid(format!(
                "cluster needs finite mean and sd > 0, got mean {} sd {}",
                self.mean, self.sd
            )));
        }
        Ok(())
    }
}

/// Points grouped by cluster, with the cluster index of every row.
#[derive(Debug, Clone)]
pub struct LabelledCloud {
    pub cloud: PointCloud,
    pub labels: Vec<usize>,
}

/// Gaussian clusters in `m` dimensions; rows of cluster `c` are contiguous
/// and labelled `c`.
pub fn gen_gaussian_clusters(
    specs: &[GaussianClusterSpec],
    m: usize,
    seed: u64,
) -> Result<LabelledCloud> {
    if specs.is_empty() {
        return Err(Error::invalid("at least one cluster spec is required"));
    }
    specs.iter().try_for_each(GaussianClusterSpec::validate)?;
    let n: usize = specs.iter().map(|s| s.count).sum();
    check_shape(n, m)?;
    let mut r = rng(seed);
    let mut data = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    for (c, spec) in specs.iter().enumerate() {
        let normal = Normal::new(spec.mean, spec.sd).expect("validated above");
        data.extend((0..spec.count * m).map(|_| normal.sample(&mut r)));
        labels.extend(std::iter::repeat_n(c, spec.count));
    }
    Ok(LabelledCloud {
        cloud: PointCloud::new(data, n, m)?,
        labels,
    })
}

/// ARMA(p, q) process with Student-t innovations:
/// `x_t = Σ ar_i x_{t-i} + e_t + Σ ma_j e_{t-j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub innovation_df: f64,
    pub length: usize,
}

impl ArimaSpec {
    /// Checks length, finite variance of the innovations, and that every
    /// root of the AR polynomial lies outside the unit circle.
    pub fn new(ar: Vec<f64>, ma: Vec<f64>, innovation_df: f64, length: usize) -> Result<Self> {
        let spec = Self {
            ar,
            ma,
            innovation_df,
            length,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::invalid("series length must be at least 1"));
        }
        if !(self.innovation_df > 2.0) {
            return Err(Error::invalid(format!(
                "innovation_df must exceed 2 for finite variance, got {}",
                self.innovation_df
            )));
        }
        if self.ar.iter().chain(&self.ma).any(|c| !c.is_finite()) {
            return Err(Error::invalid("ARMA coefficients must be finite"));
        }
        let radius = ar_spectral_radius(&self.ar);
        if radius >= 1.0 {
            return Err(Error::invalid(format!(
                "AR part is not stationary (companion spectral radius {radius:.4})"
            )));
        }
        Ok(())
    }

    pub fn with_length(&self, length: usize) -> Self {
        Self {
            length,
            ..self.clone()
        }
    }
}

/// Largest modulus among the eigenvalues of the AR companion matrix; the
/// AR polynomial's roots lie outside the unit circle iff this is below 1.
pub fn ar_spectral_radius(ar: &[f64]) -> f64 {
    let p = ar.len();
    if p == 0 {
        return 0.0;
    }
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for (j, a) in ar.iter().enumerate() {
        companion[(0, j)] = *a;
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Coefficients of the first ARMA model used for segment clouds.
pub fn arima_model_a(length: usize) -> ArimaSpec {
    ArimaSpec {
        ar: vec![0.8897, -0.4858],
        ma: vec![-0.2279, 0.2488],
        innovation_df: 5.0,
        length,
    }
}

/// Coefficients of the second ARMA model used for segment clouds.
pub fn arima_model_b(length: usize) -> ArimaSpec {
    ArimaSpec {
        ar: vec![0.2897, -0.1858],
        ma: vec![-0.7279, 0.7488],
        innovation_df: 5.0,
        length,
    }
}

/// One realisation of `spec`, after discarding [`ARIMA_BURN_IN`] samples
/// started from zero.
pub fn gen_arima(spec: &ArimaSpec, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut r = rng(seed);
    Ok(arma_series(spec, &mut r))
}

fn arma_series(spec: &ArimaSpec, r: &mut ChaCha8Rng) -> Vec<f64> {
    let t_dist = StudentT::new(spec.innovation_df).expect("df validated");
    let total = spec.length + ARIMA_BURN_IN;
    let mut x = Vec::with_capacity(total);
    let mut e = Vec::with_capacity(total);
    for t in 0..total {
        let et = t_dist.sample(r);
        let mut v = et;
        for (i, a) in spec.ar.iter().enumerate() {
            if t > i {
                v += a * x[t - 1 - i];
            }
        }
        for (j, b) in spec.ma.iter().enumerate() {
            if t > j {
                v += b * e[t - 1 - j];
            }
        }
        x.push(v);
        e.push(et);
    }
    x.split_off(ARIMA_BURN_IN)
}

/// `per_model` independent realisations of length `m` from each model, one
/// per row, rows grouped by model.
pub fn gen_arima_segments(
    models: &[ArimaSpec],
    per_model: usize,
    m: usize,
    seed: u64,
) -> Result<LabelledCloud> {
    if models.is_empty() || per_model == 0 {
        return Err(Error::invalid("need at least one model and one segment"));
    }
    check_shape(per_model, m)?;
    let mut r = rng(seed);
    let mut data = Vec::with_capacity(models.len() * per_model * m);
    let mut labels = Vec::with_capacity(models.len() * per_model);
    for (c, model) in models.iter().enumerate() {
        let spec = model.with_length(m);
        spec.validate()?;
        for _ in 0..per_model {
            data.extend(arma_series(&spec, &mut r));
            labels.push(c);
        }
    }
    Ok(LabelledCloud {
        cloud: PointCloud::new(data, labels.len(), m)?,
        labels,
    })
}

/// Concatenated realisations of each model, `len` samples apiece, drawn
/// from one seed. The regime change points are at multiples of `len`.
pub fn gen_regime_signal(models: &[ArimaSpec], len: usize, seed: u64) -> Result<Vec<f64>> {
    if models.is_empty() {
        return Err(Error::invalid("need at least one model"));
    }
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(models.len() * len);
    for model in models {
        let spec = model.with_length(len);
        spec.validate()?;
        out.extend(arma_series(&spec, &mut r));
    }
    Ok(out)
}

/// Sliding-window embedding: row `r` holds `signal[starts[r]..starts[r] + window_len]`.
/// `starts` are 0-based.
pub fn embed_signal(signal: &[f64], window_len: usize, starts: &[usize]) -> Result<PointCloud> {
    if window_len == 0 || starts.is_empty() {
        return Err(Error::invalid("need window_len >= 1 and at least one start"));
    }
    let mut data = Vec::with_capacity(window_len * starts.len());
    for &s in starts {
        let end = s
            .checked_add(window_len)
            .filter(|e| *e <= signal.len())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "window [{s}, {s} + {window_len}) exceeds signal length {}",
                    signal.len()
                ))
            })?;
        data.extend_from_slice(&signal[s..end]);
    }
    PointCloud::new(data, starts.len(), window_len)
}

/// `0, stride, 2·stride, …` up to the last start whose window fits.
pub fn window_starts(signal_len: usize, window_len: usize, stride: usize) -> Result<Vec<usize>> {
    if stride == 0 || window_len == 0 || window_len > signal_len {
        return Err(Error::invalid(format!(
            "no window of length {window_len} with stride {stride} fits a signal of length {signal_len}"
        )));
    }
    Ok((0..=signal_len - window_len).step_by(stride).collect())
}

/// Convert 1-based start positions (as written on the command line) to
/// 0-based indices.
pub fn starts_from_one_based(starts: &[usize]) -> Result<Vec<usize>> {
    starts
        .iter()
        .map(|&s| {
            s.checked_sub(1)
                .ok_or_else(|| Error::invalid("1-based start positions must be >= 1"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_entries_in_unit_interval() {
        let c = gen_uniform(50, 40, 3).unwrap();
        assert!(c.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn hypercube_entries_are_binary() {
        let c = gen_hypercube(20, 100, 3).unwrap();
        assert!(c.as_slice().iter().all(|v| *v == 0.0 || *v == 1.0));
    }

    #[test]
    fn generators_reproduce_per_seed() {
        assert_eq!(gen_uniform(5, 7, 11).unwrap(), gen_uniform(5, 7, 11).unwrap());
        assert_ne!(gen_uniform(5, 7, 11).unwrap(), gen_uniform(5, 7, 12).unwrap());
        let spec = arima_model_a(500);
        assert_eq!(gen_arima(&spec, 1).unwrap(), gen_arima(&spec, 1).unwrap());
        assert_ne!(gen_arima(&spec, 1).unwrap(), gen_arima(&spec, 2).unwrap());
    }

    #[test]
    fn cluster_labels_follow_specs() {
        let specs = [GaussianClusterSpec::new(3, 0.0, 1.0), GaussianClusterSpec::new(2, 5.0, 1.0)];
        let lc = gen_gaussian_clusters(&specs, 4, 0).unwrap();
        assert_eq!(lc.labels, vec![0, 0, 0, 1, 1]);
        assert_eq!((lc.cloud.n(), lc.cloud.m()), (5, 4));
    }

    #[test]
    fn cluster_spec_validation() {
        assert!(gen_gaussian_clusters(&[], 3, 0).is_err());
        assert!(gen_gaussian_clusters(&[GaussianClusterSpec::new(3, 0.0, 0.0)], 3, 0).is_err());
        assert!(gen_gaussian_clusters(&[GaussianClusterSpec::new(0, 0.0, 1.0)], 3, 0).is_err());
    }

    #[test]
    fn stationarity_check() {
        assert!(ArimaSpec::new(vec![0.8897, -0.4858], vec![], 5.0, 10).is_ok());
        assert!(ArimaSpec::new(vec![1.0], vec![], 5.0, 10).is_err());
        assert!(ArimaSpec::new(vec![0.5, 0.6], vec![], 5.0, 10).is_err());
        assert!(ArimaSpec::new(vec![], vec![], 2.0, 10).is_err());
        assert!(ArimaSpec::new(vec![], vec![], 5.0, 0).is_err());
        assert!(ar_spectral_radius(&[0.2897, -0.1858]) < 1.0);
    }

    #[test]
    fn embed_windows() {
        let signal: Vec<f64> = (0..10).map(f64::from).collect();
        let c = embed_signal(&signal, 4, &[0, 2, 6]).unwrap();
        assert_eq!(c.row(1), &[2.0, 3.0, 4.0, 5.0]);
        assert_eq!(c.row(2), &[6.0, 7.0, 8.0, 9.0]);
        assert!(embed_signal(&signal, 4, &[7]).unwrap_err().is_validation());
        let whole = embed_signal(&signal, 10, &[0]).unwrap();
        assert_eq!(whole.row(0), signal.as_slice());
    }

    #[test]
    fn window_counts_for_millisecond_layout() {
        // 1-based starts 1, 1000, …, 94000 over a 95011-sample signal.
        let mut one_based = vec![1];
        one_based.extend((1..=94).map(|k| k * 1000));
        let starts = starts_from_one_based(&one_based).unwrap();
        assert_eq!(starts.len(), 95);
        let signal = vec![0.0; 95_011];
        assert_eq!(embed_signal(&signal, 100, &starts).unwrap().n(), 95);
        assert_eq!(embed_signal(&signal, 1000, &starts).unwrap().n(), 95);
        let long: Vec<usize> = starts.iter().copied().filter(|s| *s < 85_000).collect();
        assert_eq!(embed_signal(&signal, 10_000, &long).unwrap().n(), 86);
        assert!(starts_from_one_based(&[0]).is_err());
    }

    #[test]
    fn window_starts_fit() {
        assert_eq!(window_starts(10, 4, 3).unwrap(), vec![0, 3, 6]);
        assert!(window_starts(3, 4, 1).is_err());
    }
}
