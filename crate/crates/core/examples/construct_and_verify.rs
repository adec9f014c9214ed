//! Full pipeline: admissible full-rank density in, verified mixed state out.

use spinrep::decompose::{construct_witness_with, ConstructOptions};
use spinrep::gen::{self, MixtureParams};
use spinrep::io::format_verify;
use spinrep::witness::{kinetic_energy, verify, VerifyTolerances};
use spinrep::Grid3;

fn main() -> spinrep::Result<()> {
    let g = Grid3::cubic(64, -8.0, 8.0)?;
    let r = gen::full_rank_mixture(
        g,
        &MixtureParams {
            width_dn: 1.3,
            coherence: 0.95,
            phase_slope: 0.4,
            ..Default::default()
        },
    )?;

    let built = construct_witness_with(&r, &ConstructOptions::default())?;
    println!("rank1 input: {}", built.rank1_input);
    for p in &built.pieces {
        println!(
            "  {:<8} weight {:.6} swapped {}",
            p.label, p.weight, p.swapped
        );
    }
    println!("kinetic energy {:.6}", kinetic_energy(&built.witness));

    let rep = verify(&built.witness, &r, &VerifyTolerances::default())?;
    print!("{}", format_verify(&rep));
    Ok(())
}
