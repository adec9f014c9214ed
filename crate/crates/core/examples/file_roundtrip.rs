//! Write a density and a witness to disk and read them back.

use spinrep::decompose::{construct_witness_with, ConstructOptions};
use spinrep::gen::{self, MixtureParams};
use spinrep::io::{read_spdf, read_witness, write_spdf, write_witness};
use spinrep::witness::density_of;
use spinrep::Grid3;

fn main() -> spinrep::Result<()> {
    let dir = std::env::temp_dir().join(format!("spinrep-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let r = gen::full_rank_mixture(Grid3::cubic(48, -8.0, 8.0)?, &MixtureParams::default())?;
    let path = dir.join("mixture.spdf");
    write_spdf(&r, &path)?;
    let back = read_spdf(&path)?;
    println!(
        "{} bytes, identical: {}",
        std::fs::metadata(&path)?.len(),
        back == r
    );

    let opts = ConstructOptions {
        validate_pieces: false,
        ..Default::default()
    };
    let w = construct_witness_with(&back, &opts)?.witness;
    let wdir = dir.join("witness");
    write_witness(&w, &wdir)?;
    let w2 = read_witness(&wdir)?;
    println!(
        "witness branches {}, identical: {}",
        w2.branches().len(),
        w2 == w
    );
    println!(
        "density mismatch {:.3e}",
        density_of(&w2).max_abs_diff(&r)? / r.scale()
    );

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
