//! Distance-histogram peaks for the three, four and eight-subgroup cluster
//! designs, with each peak attributed to intra- or inter-cluster pairs.

use umlab::pipeline::{figure_peak_bound, reproduce_peak_figures};

fn main() -> umlab::Result<()> {
    for fig in [5, 6, 7] {
        for f in reproduce_peak_figures(fig, 0)? {
            let kinds: Vec<String> = f
                .composition
                .iter()
                .map(|c| format!("{}{}", c.bin, if c.is_inter() { "x" } else { "" }))
                .collect();
            println!(
                "design {fig} m={:<6} {} peaks (bound {}), at least {} clusters; bins {}",
                f.m,
                f.peaks.len(),
                figure_peak_bound(fig)?,
                f.inference.min_k,
                kinds.join(" ")
            );
        }
    }
    println!("(x marks a peak made mostly of inter-cluster pairs)");
    Ok(())
}
