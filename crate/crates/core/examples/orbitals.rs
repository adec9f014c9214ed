//! Single-determinant orbitals for a rank-one density with ρ↑ ≤ 2ρ↓.

use spinrep::gen::{self, Rank1Params};
use spinrep::harriman::{
    build_orbitals, gram_deviation, kinetic_bounds, slater_density, HarrimanOptions,
};
use spinrep::Grid3;

fn main() -> spinrep::Result<()> {
    let g = Grid3::cubic(64, -5.5, 5.5)?;
    let params = Rank1Params {
        n_electrons: 3,
        up_fraction: 0.45,
        width_up: 1.0,
        width_dn: 1.0,
        twist: 0.4,
    };
    let r = gen::rank1_gaussian(g, &params)?;
    let opts = HarrimanOptions::default();
    let set = build_orbitals(&r, &opts)?;
    println!(
        "phase axis {:?}, fallback nodes {}",
        set.phase.axis, set.fallback_points
    );

    let rebuilt = slater_density(&set.orbitals, set.n_electrons)?;
    println!(
        "max |Σ|Φ|² − R| / max ρ = {:.3e}",
        rebuilt.max_abs_diff(&r)? / r.scale()
    );
    println!(
        "max |⟨Φ_j|Φ_k⟩ − δ_jk| = {:.3e}",
        gram_deviation(&set.orbitals)?
    );

    for b in kinetic_bounds(&r, &set, &opts.tol)? {
        println!(
            "k={} ∫|∇φ↑|² = {:.4} ≤ {:.4}   ∫|∇φ↓|² = {:.4} ≤ {:.4}",
            b.k, b.lhs_up, b.rhs_up, b.lhs_dn, b.rhs_dn
        );
    }
    Ok(())
}
