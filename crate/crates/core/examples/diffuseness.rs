//! Spectral diffuseness falls as the dimension rises.

use umlab::generators::gen_uniform;
use umlab::geometry::diffuseness;

fn main() -> umlab::Result<()> {
    for m in [2, 20, 200, 2000, 20_000] {
        let s = diffuseness(&gen_uniform(100, m, 0)?)?;
        println!("m={m:<6} rank {:<3} coefficient {:.4}", s.rank(), s.coefficient);
    }
    Ok(())
}
