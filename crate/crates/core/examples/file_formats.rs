//! Writing and reading the on-disk formats in a temporary run directory.

use umlab::generators::gen_uniform;
use umlab::geometry::pairwise_distances;
use umlab::hierarchy::{linkage, Linkage};
use umlab::io;

fn main() -> umlab::Result<()> {
    let dir = std::env::temp_dir().join("umlab-formats-example");
    let cloud = gen_uniform(5, 3, 1)?;
    let d = pairwise_distances(&cloud);
    io::write_cloud_csv(&dir.join("cloud.csv"), &cloud)?;
    io::write_distances_tsv(&dir.join("distances.tsv"), &d)?;
    io::write_distances_bin(&dir.join("distances.umd"), &d)?;
    io::write_dendrogram_tsv(&dir.join("dendrogram.tsv"), &linkage(&d, Linkage::Complete)?)?;
    assert_eq!(io::read_cloud_csv(&dir.join("cloud.csv"))?, cloud);
    assert_eq!(io::read_distances(&dir.join("distances.umd"))?, d);
    for name in ["cloud.csv", "distances.tsv", "dendrogram.tsv"] {
        println!("== {name}\n{}", std::fs::read_to_string(dir.join(name))?);
    }
    Ok(())
}
