//! Run the seven conditions on an admissible density and on two broken ones.

use spinrep::gen::{self, MixtureParams};
use spinrep::{check, check_refined, Grid3, Tolerances};

fn main() -> spinrep::Result<()> {
    let tol = Tolerances::default();
    let coarse = Grid3::cubic(32, -8.0, 8.0)?;
    let fine = Grid3::cubic(48, -8.0, 8.0)?;
    let params = MixtureParams {
        phase_slope: 0.4,
        ..Default::default()
    };

    let r = gen::full_rank_mixture(coarse, &params)?;
    let r_fine = gen::full_rank_mixture(fine, &params)?;
    let rep = check_refined(&r, &r_fine, &tol)?;
    println!("mixture: {}", rep.verdict());
    for c in &rep.conditions {
        println!("  {:<28} {}", c.condition.key(), c.verdict);
    }

    for (name, bad) in [
        (
            "negative lobe",
            gen::negative_lobe(Grid3::cubic(48, -8.0, 8.0)?, 2)?,
        ),
        ("overcorrelated", gen::overcorrelated(coarse, 2, 0.1)?),
        ("misnormalized", gen::misnormalized(coarse, 2, 2.1)?),
    ] {
        let rep = check(&bad, &tol)?;
        let failed: Vec<_> = rep.failed().iter().map(|c| c.key()).collect();
        println!("{name}: {} {:?}", rep.verdict(), failed);
    }
    Ok(())
}
