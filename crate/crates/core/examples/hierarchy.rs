//! Single, complete and contiguity-constrained complete link on a small
//! sequence, with cophenetic distances and a two-segment cut.

use umlab::geometry::{pairwise_distances, PointCloud};
use umlab::hierarchy::{cophenetic, cut, cut_segments, linkage, Linkage};

fn main() -> umlab::Result<()> {
    let xs = [0.0, 1.0, 1.5, 9.0, 10.0, 4.0, 11.0];
    let rows: Vec<[f64; 1]> = xs.iter().map(|x| [*x]).collect();
    let d = pairwise_distances(&PointCloud::from_rows(&rows)?);
    for method in [Linkage::Single, Linkage::Complete, Linkage::ConstrainedComplete] {
        let dend = linkage(&d, method)?;
        println!("{method:?}");
        for (t, m) in dend.merges.iter().enumerate() {
            println!("  step {} merges {} and {} at {:.2}", t + 1, m.a, m.b, m.height);
        }
        println!("  2 clusters: {:?}", cut(&dend, 2)?);
        if dend.constrained {
            println!("  segments: {:?}", cut_segments(&dend, 2)?.boundaries);
        }
    }
    let u = cophenetic(&linkage(&d, Linkage::Single)?);
    println!("subdominant ultrametric, first row: {:?}", (1..d.n()).map(|j| u.get(0, j)).collect::<Vec<_>>());
    Ok(())
}
