//! Principal coordinates of three well-separated Gaussian clusters.

use umlab::embedding::{pcoa, Axes};
use umlab::generators::{gen_gaussian_clusters, GaussianClusterSpec};
use umlab::geometry::pairwise_distances;

fn main() -> umlab::Result<()> {
    let specs = [
        GaussianClusterSpec::new(10, 0.0, 1.0),
        GaussianClusterSpec::new(10, 3.0, 1.0),
        GaussianClusterSpec::new(10, 6.0, 2.0),
    ];
    let lc = gen_gaussian_clusters(&specs, 1000, 2)?;
    let r = pcoa(&pairwise_distances(&lc.cloud), Axes::Count(2))?;
    let shown: Vec<String> = r.variance_fraction.iter().map(|f| format!("{:.1}%", 100.0 * f)).collect();
    println!("variance on the first two axes: {}", shown.join(", "));
    for i in (0..r.n).step_by(5) {
        println!("point {i:>2} (cluster {}): {:>8.2} {:>8.2}", lc.labels[i], r.coordinate(i, 0), r.coordinate(i, 1));
    }
    Ok(())
}
