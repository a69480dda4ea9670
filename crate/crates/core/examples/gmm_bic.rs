//! Choosing the number of 1-D Gaussian components by BIC.

use umlab::histpeaks::{sample_mixture, select_k_bic};

fn main() -> umlab::Result<()> {
    let x = sample_mixture(&[1.0, 2.0, 1.0], &[0.0, 6.0, 12.0], &[1.0, 1.0, 1.0], 1200, 5);
    let sel = select_k_bic(&x, 1..=6, 5)?;
    for f in &sel.fits {
        println!("k={} bic {:>10.1} loglik {:>10.1} in {} iterations", f.k, f.bic, f.loglik, f.iterations);
    }
    let best = sel.best();
    println!("best k = {}", sel.best_k);
    for c in 0..best.k {
        println!(
            "  weight {:.3} mean {:>7.3} sd {:.3}",
            best.weights[c], best.means[c], best.sds[c]
        );
    }
    Ok(())
}
