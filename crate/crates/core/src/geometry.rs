//! Point clouds, condensed distance matrices, triangle angles and the
//! spectral diffuseness diagnostic.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sides shorter than this make a triplet degenerate.
pub const MIN_SIDE: f64 = 1e-12;

/// Law-of-cosines values beyond `1 + COSINE_SLACK` in magnitude mean the
/// three lengths do not form a triangle, even allowing for rounding.
pub const COSINE_SLACK: f64 = 1e-9;

/// `n` points in `m`-dimensional real space, stored row-major.
///
/// Row order is significant: sequence-constrained clustering treats row `i`
/// and row `i + 1` as neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    m: usize,
}

impl PointCloud {
    pub fn new(data: Vec<f64>, n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid(format!(
                "point cloud needs n >= 1 and m >= 1, got {n} x {m}"
            )));
        }
        if data.len() != n * m {
            return Err(Error::invalid(format!(
                "point cloud data has {} values, expected {n} x {m}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate at row {}, column {}",
                pos / m,
                pos % m
            )));
        }
        Ok(Self { data, n, m })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n * m);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != m {
                return Err(Error::invalid(format!(
                    "row {i} has {} columns, expected {m}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(data, n, m)
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimensionality.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.m)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Multiply every coordinate by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.data.iter().map(|v| v * c).collect(), self.n, self.m)
    }
}

/// Euclidean distance between two equal-length slices.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Position of pair `(i, j)`, `i < j`, in condensed upper-triangular storage.
#[inline]
pub fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Pairwise dissimilarities stored as the condensed upper triangle, pair
/// `(i, j)` with `i < j` at [`condensed_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_condensed(n: usize, values: Vec<f64>) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if values.len() != expected {
            return Err(Error::invalid(format!(
                "condensed matrix for n = {n} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!(
                "distances must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self { n, values })
    }

    /// Build from a full square matrix; only the upper triangle is read.
    pub fn from_square(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::invalid("distance matrix must be square"));
            }
            values.extend_from_slice(&r[i + 1..]);
        }
        Self::from_condensed(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Distance between points `i` and `j`; zero on the diagonal.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.values[condensed_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.values[condensed_index(self.n, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `(i, j, d)` for every pair `i < j` in canonical order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .zip(self.values.iter().copied())
            .map(|((i, j), d)| (i, j, d))
    }

    /// Squared distances as a full symmetric matrix.
    pub fn squared_square(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (i, j, d) in self.pairs() {
            out[(i, j)] = d * d;
            out[(j, i)] = d * d;
        }
        out
    }
}

/// Euclidean distances between all rows of `cloud`.
///
/// Each entry is computed independently, so the result does not depend on
/// the number of worker threads.
pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.n();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = cloud.row(i);
            (i + 1..n).map(move |j| euclidean(a, cloud.row(j)))
        })
        .collect();
    DistanceMatrix { n, values }
}

/// The three interior angles of a triangle in radians, ascending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl TriangleAngles {
    pub fn sum(&self) -> f64 {
        self.alpha + self.beta + self.gamma
    }
}

/// Angles of the triangle with vertices `a`, `b`, `c`.
pub fn triangle_angles(a: &[f64], b: &[f64], c: &[f64]) -> Result<TriangleAngles> {
    if a.len() != b.len() || a.len() != c.len() {
        return Err(Error::invalid("triangle vertices differ in dimension"));
    }
    triangle_angles_from_sides(euclidean(a, b), euclidean(b, c), euclidean(a, c))
}

/// Angles of the triangle with the given side lengths (any order).
///
/// Degeneracy follows the law of cosines: any side below [`MIN_SIDE`], a
/// cosine that would need clamping beyond `1 + COSINE_SLACK`, or an angle
/// that clamps to 0 or π rejects the triplet. The angle values themselves
/// use Kahan's half-angle form, which agrees with the clamped arccos but
/// keeps full precision for needle-shaped triangles.
pub fn triangle_angles_from_sides(s1: f64, s2: f64, s3: f64) -> Result<TriangleAngles> {
    let mut s = [s1, s2, s3];
    if s.iter().any(|v| !v.is_finite() || *v < MIN_SIDE) {
        return Err(Error::DegenerateTriangle);
    }
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s; // a >= b >= c

    let cos_largest = (b * b + c * c - a * a) / (2.0 * b * c);
    if cos_largest.abs() > 1.0 + COSINE_SLACK {
        return Err(Error::DegenerateTriangle);
    }

    // Angles opposite c (smallest) and b (middle); the largest is the remainder.
    let smallest = kahan_angle(a, b, c).ok_or(Error::DegenerateTriangle)?;
    let middle = kahan_angle(a, c, b).ok_or(Error::DegenerateTriangle)?;
    let largest = PI - smallest - middle;
    if !(smallest > 0.0 && largest < PI && largest > 0.0) {
        return Err(Error::DegenerateTriangle);
    }
    let mut angles = [smallest, middle, largest];
    angles.sort_by(f64::total_cmp);
    Ok(TriangleAngles {
        alpha: angles[0],
        beta: angles[1],
        gamma: angles[2],
    })
}

/// Angle opposite side `c`, given `a` the longest side and `b` the other.
fn kahan_angle(a: f64, b: f64, c: f64) -> Option<f64> {
    debug_assert!(a >= b && a >= c);
    let mu = if b >= c { c - (a - b) } else { b - (a - c) };
    if mu <= 0.0 {
        return None;
    }
    let num = ((a - b) + c) * mu;
    let den = (a + (b + c)) * ((a - c) + b);
    if den <= 0.0 {
        return None;
    }
    Some(2.0 * (num / den).sqrt().atan())
}

/// Covariance spectrum and the coefficient `Σλ² / (Σλ)²`.
///
/// The coefficient lies in `[1/rank, 1]` and tends to zero for clouds whose
/// variance is spread evenly over many directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiffuseness {
    /// Nonzero covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub coefficient: f64,
}

impl SpectralDiffuseness {
    /// Keeps eigenvalues above `1e-12 * max`; errors if none remain.
    pub fn from_eigenvalues(eigenvalues: &[f64]) -> Result<Self> {
        let max = eigenvalues.iter().copied().fold(0.0_f64, f64::max);
        if !(max > 0.0) {
            return Err(Error::invalid("spectrum has no positive eigenvalue"));
        }
        let mut kept: Vec<f64> = eigenvalues
            .iter()
            .copied()
            .filter(|l| *l > 1e-12 * max)
            .collect();
        kept.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = kept.iter().sum();
        let sq: f64 = kept.iter().map(|l| l * l).sum();
        Ok(Self {
            coefficient: sq / (total * total),
            eigenvalues: kept,
        })
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Sample-covariance spectrum of `cloud`, computed through the `n × n`
/// Gram matrix of the centred rows (same nonzero eigenvalues as the
/// `m × m` covariance, feasible for very large `m`).
pub fn diffuseness(cloud: &PointCloud) -> Result<SpectralDiffuseness> {
    let gram = centred_gram(cloud)?;
    let n = cloud.n();
    let eig = SymmetricEigen::new(gram);
    let scale = 1.0 / (n as f64 - 1.0);
    let eigenvalues: Vec<f64> = eig.eigenvalues.iter().map(|l| l * scale).collect();
    SpectralDiffuseness::from_eigenvalues(&eigenvalues)
}

/// `Xc Xcᵀ` where `Xc` is the column-centred cloud.
pub fn centred_gram(cloud: &PointCloud) -> Result<DMatrix<f64>> {
    let (n, m) = (cloud.n(), cloud.m());
    if n < 2 {
        return Err(Error::invalid("diffuseness needs at least 2 points"));
    }
    let mut means = vec![0.0; m];
    for row in cloud.rows() {
        for (acc, v) in means.iter_mut().zip(row) {
            *acc += v;
        }
    }
    means.iter_mut().for_each(|v| *v /= n as f64);
    let centred: Vec<Vec<f64>> = cloud
        .rows()
        .map(|r| r.iter().zip(&means).map(|(v, mu)| v - mu).collect())
        .collect();

    let entries: Vec<(usize, usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let centred = &centred;
            (i..n).map(move |j| {
                let dot = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
                (i, j, dot)
            })
        })
        .collect();
    let mut gram = DMatrix::zeros(n, n);
    for (i, j, v) in entries {
        gram[(i, j)] = v;
        gram[(j, i)] = v;
    }
    Ok(gram)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pythagorean_distance() {
        let c = PointCloud::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(pairwise_distances(&c).get(0, 1), 5.0);
    }

    #[test]
    fn identical_rows_are_at_zero_distance() {
        let c = PointCloud::from_rows(&[vec![1.5, -2.0, 7.0], vec![1.5, -2.0, 7.0]]).unwrap();
        assert_eq!(pairwise_distances(&c).get(1, 0), 0.0);
    }

    #[test]
    fn hypercube_diagonal() {
        let m = 20_000;
        let c = PointCloud::new([vec![0.0; m], vec![1.0; m]].concat(), 2, m).unwrap();
        let d = pairwise_distances(&c).get(0, 1);
        assert!(close(d, 20_000f64.sqrt(), 1e-9));
        assert!(close(d, 141.42, 0.01));
    }

    #[test]
    fn rejects_non_finite_coordinates() {
        let err = PointCloud::new(vec![0.0, f64::NAN], 1, 2).unwrap_err();
        assert!(err.is_validation());
        assert!(PointCloud::new(vec![f64::INFINITY], 1, 1).is_err());
    }

    #[test]
    fn condensed_indexing_is_dense() {
        let n = 7;
        let mut seen = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                seen.push(condensed_index(n, i, j));
            }
        }
        assert_eq!(seen, (0..n * (n - 1) / 2).collect::<Vec<_>>());
    }

    #[test]
    fn equilateral_angles() {
        let t = triangle_angles_from_sides(1.0, 1.0, 1.0).unwrap();
        for a in [t.alpha, t.beta, t.gamma] {
            assert!(close(a, PI / 3.0, 1e-15));
        }
    }

    #[test]
    fn right_triangle_angles() {
        let t = triangle_angles(&[0.0, 0.0], &[4.0, 0.0], &[4.0, 3.0]).unwrap();
        assert!(close(t.alpha, (3.0f64 / 4.0).atan(), 1e-12));
        assert!(close(t.alpha, 0.6435, 1e-4));
        assert!(close(t.beta, 0.9273, 1e-4));
        assert!(close(t.gamma, PI / 2.0, 1e-12));
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let r = triangle_angles(&[1.0, 1.0], &[1.0, 1.0], &[0.0, 3.0]);
        assert!(matches!(r, Err(Error::DegenerateTriangle)));
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let r = triangle_angles(&[0.0], &[1.0], &[2.0]);
        assert!(matches!(r, Err(Error::DegenerateTriangle)));
        assert!(triangle_angles_from_sides(1.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn needle_triangle_keeps_angle_sum() {
        let t = triangle_angles_from_sides(1.0, 1.0, 1e-7).unwrap();
        assert!(close(t.sum(), PI, 1e-12));
        assert!(close(t.alpha, 1e-7, 1e-15));
    }

    #[test]
    fn identity_like_spectrum() {
        // ±e_i in four dimensions: covariance is a multiple of the identity.
        let mut rows = Vec::new();
        for i in 0..4 {
            for s in [1.0, -1.0] {
                let mut r = vec![0.0; 4];
                r[i] = s;
                rows.push(r);
            }
        }
        let d = diffuseness(&PointCloud::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(d.rank(), 4);
        assert!(close(d.coefficient, 0.25, 1e-12));
    }

    #[test]
    fn rank_one_spectrum() {
        let d = SpectralDiffuseness::from_eigenvalues(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(d.coefficient, 1.0);
        let rows = vec![vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        let d = diffuseness(&PointCloud::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(d.rank(), 1);
        assert!(close(d.coefficient, 1.0, 1e-12));
    }

    #[test]
    fn diffuseness_needs_two_points() {
        let c = PointCloud::new(vec![1.0, 2.0], 1, 2).unwrap();
        assert!(diffuseness(&c).unwrap_err().is_validation());
    }
}
