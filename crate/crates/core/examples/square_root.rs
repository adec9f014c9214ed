//! Pointwise square root and the eigenvalue densities ρ₊ ≥ ρ₋.

use spinrep::gen::{self, MixtureParams};
use spinrep::sqrt::corollary_check;
use spinrep::{eigen_densities, sqrt_field, Grid3, Tolerances};

fn main() -> spinrep::Result<()> {
    let g = Grid3::cubic(40, -8.0, 8.0)?;
    let r = gen::full_rank_mixture(
        g,
        &MixtureParams {
            coherence: 0.8,
            phase_slope: 0.5,
            ..Default::default()
        },
    )?;

    let root = sqrt_field(&r)?;
    let back = root.square(r.n_electrons())?;
    println!(
        "max |√R·√R − R| / max ρ = {:.3e}",
        back.max_abs_diff(&r)? / r.scale()
    );

    let e = eigen_densities(&r)?;
    let plus: f64 = spinrep::field::integrate(&e.rho_plus);
    let minus: f64 = spinrep::field::integrate(&e.rho_minus);
    println!(
        "∫ρ₊ = {plus:.6}, ∫ρ₋ = {minus:.6}, sum = {:.6}",
        plus + minus
    );

    let rep = corollary_check(&r, &Tolerances::default())?;
    println!("∫|∇√ρ₊|² = {:.6}", rep.grad_sqrt_plus_sq);
    println!("∫|∇√ρ₋|² = {:.6}", rep.grad_sqrt_minus_sq);
    println!("verdict: {}", rep.verdict);
    Ok(())
}
