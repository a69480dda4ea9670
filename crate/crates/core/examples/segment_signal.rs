//! Sliding-window segmentation of a two-regime ARMA signal.
//!
//! Pass `all` to cluster on every principal axis instead of the first two.

use umlab::embedding::Axes;
use umlab::generators::{arima_model_a, arima_model_b, gen_regime_signal};
use umlab::pipeline::{segment_signal, SegmentationConfig};

fn main() -> umlab::Result<()> {
    let axes = match std::env::args().nth(1).as_deref() {
        Some("all") => Axes::All,
        _ => Axes::Count(2),
    };
    let signal = gen_regime_signal(&[arima_model_a(1), arima_model_b(1)], 50_000, 0)?;
    let cfg = SegmentationConfig { axes, ..SegmentationConfig::default() };
    let run = segment_signal(&signal, &cfg)?;
    println!(
        "{} windows, {} histogram modes by BIC, {} segments",
        run.starts.len(),
        run.histogram_peaks,
        run.segmentation.k
    );
    println!("first-axis variance {:.1}%", 100.0 * run.pcoa.variance_fraction[0]);
    for s in &run.segments {
        println!(
            "windows {:>2}-{:>2}  samples {:>6}-{:>6}  mean {:>6.3}  radius {:.2}",
            s.first_window + 1,
            s.last_window + 1,
            s.signal_start + 1,
            s.signal_end + 1,
            s.mean,
            s.max_intra_distance
        );
    }
    println!("true change at sample 50001");
    Ok(())
}
