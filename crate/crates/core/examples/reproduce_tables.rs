//! All four simulation tables, averaged over three seeds.
//!
//! Table 3 includes a 200 000-dimensional row, so expect this to take a
//! little while in debug builds.

use umlab::pipeline::{reproduce_table, summarize_rows};

fn main() -> umlab::Result<()> {
    for table in 1..=4 {
        println!("table {table}");
        for s in summarize_rows(&reproduce_table(table, &[0, 1, 2])?) {
            let seeds: Vec<String> = s.um_per_seed.iter().map(|u| format!("{u:.2}")).collect();
            println!(
                "  {:<14} n={:<4} m={:<7} isosc {:.3} equil {:.3} um {:.3} ({})",
                format!("{:?}", s.generator),
                s.n,
                s.m,
                s.isosc,
                s.equil,
                s.um,
                seeds.join(", ")
            );
        }
    }
    Ok(())
}
