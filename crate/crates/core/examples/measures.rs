//! The three ultrametricity measures on a Euclidean cloud and on its
//! subdominant ultrametric.

use umlab::generators::gen_uniform;
use umlab::geometry::pairwise_distances;
use umlab::hierarchy::{cophenetic, single_linkage};
use umlab::ultrametricity::{lerman_h, rammal_degree, triangle_um_from_distances, UmConfig};

fn main() -> umlab::Result<()> {
    let cfg = UmConfig::with_seed(3);
    for m in [2, 50, 5000] {
        let d = pairwise_distances(&gen_uniform(60, m, 3)?);
        let u = cophenetic(&single_linkage(&d)?);
        for (name, dist) in [("cloud", &d), ("subdominant", &u)] {
            let t = triangle_um_from_distances(dist, &cfg)?;
            let h = lerman_h(dist, &cfg)?;
            let r = rammal_degree(dist)?;
            println!(
                "m={m:<5} {name:<12} triangle {:.3}  lerman {:.3}  rammal {:.3}",
                t.um_fraction, h.h_classifiability, r.degree
            );
        }
    }
    Ok(())
}
