//! Principal coordinates analysis (classical metric multidimensional
//! scaling).

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DistanceMatrix, PointCloud};

/// Eigenvalues at or below this fraction of the largest are treated as zero.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

/// How many principal axes to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axes {
    /// At most this many.
    Count(usize),
    /// Every axis with a positive eigenvalue.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcoaResult {
    /// Number of points.
    pub n: usize,
    /// Emitted axes.
    pub p: usize,
    /// Row-major `n × p`.
    pub coordinates: Vec<f64>,
    /// Full spectrum of the double-centred matrix, descending (negative
    /// values signal non-Euclidean input and are never embedded).
    pub eigenvalues: Vec<f64>,
    /// `λ_i / Σ positive λ` for each emitted axis.
    pub variance_fraction: Vec<f64>,
}

impl PcoaResult {
    pub fn coordinate(&self, i: usize, axis: usize) -> f64 {
        self.coordinates[i * self.p + axis]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coordinates[i * self.p..(i + 1) * self.p]
    }

    /// Coordinates as a point cloud; `None` when no axis was emitted.
    pub fn to_cloud(&self) -> Option<PointCloud> {
        (self.p > 0).then(|| {
            PointCloud::new(self.coordinates.clone(), self.n, self.p)
                .expect("coordinates are finite")
        })
    }
}

/// Classical scaling of `d`: eigendecompose `B = -½ J D² J` and scale each
/// eigenvector by `√λ`.
///
/// Axes come out by descending eigenvalue. Each axis is signed so its
/// largest-magnitude coordinate is positive. An all-zero `d` yields no axes.
pub fn pcoa(d: &DistanceMatrix, axes: Axes) -> Result<PcoaResult> {
    let n = d.n();
    if n < 2 {
        return Err(Error::invalid("pcoa needs at least 2 points"));
    }
    let mut b = d.squared_square();
    // Double centring: subtract row and column means, add the grand mean.
    let row_means: Vec<f64> = (0..n).map(|i| b.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (b[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let max = eigenvalues.first().copied().unwrap_or(0.0);
    let positive: Vec<usize> = if max > 0.0 {
        (0..n)
            .filter(|&r| eigenvalues[r] > EIGEN_TOLERANCE * max)
            .collect()
    } else {
        Vec::new()
    };
    let total_positive: f64 = positive.iter().map(|&r| eigenvalues[r]).sum();
    let p = match axes {
        Axes::Count(c) => c.min(positive.len()),
        Axes::All => positive.len(),
    };

    let mut coordinates = vec![0.0; n * p];
    let mut variance_fraction = Vec::with_capacity(p);
    for (axis, &rank) in positive.iter().take(p).enumerate() {
        let lambda = eigenvalues[rank];
        let col = eig.eigenvectors.column(order[rank]);
        let scale = lambda.sqrt();
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coordinates[i * p + axis] = sign * col[i] * scale;
        }
        variance_fraction.push(lambda / total_positive);
    }

    Ok(PcoaResult {
        n,
        p,
        coordinates,
        eigenvalues,
        variance_fraction,
    })
}
