//! Triangle ultrametricity of uniform, hypercube and Gaussian clouds as the
//! dimension grows.

use umlab::pipeline::{run_setting, table_settings};

fn main() -> umlab::Result<()> {
    println!("{:<10} {:>6} {:>6} {:>6} {:>6}", "generator", "m", "isosc", "equil", "um");
    for s in table_settings(1)? {
        let r = run_setting(&s, 1)?;
        println!(
            "{:<10} {:>6} {:>6.3} {:>6.3} {:>6.3}",
            format!("{:?}", s.generator),
            s.m,
            r.isosc,
            r.equil,
            r.um
        );
    }
    Ok(())
}
