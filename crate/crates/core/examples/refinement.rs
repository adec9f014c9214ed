//! Regularity norms under grid refinement for a smooth and a discontinuous density.

use spinrep::check::{rel_change, RegularityNorms};
use spinrep::gen::{self, MixtureParams};
use spinrep::{Grid3, SpinDensityField, Tolerances};

fn norms(r: &SpinDensityField) -> spinrep::Result<[f64; 4]> {
    let n = RegularityNorms::compute(r, &Tolerances::default())?;
    Ok([
        n.h1_up,
        n.h1_dn,
        n.sigma_weighted.value,
        n.det_weighted.value,
    ])
}

fn fmt(change: Option<f64>) -> String {
    change.map_or("-".into(), |c| format!("{c:.3e}"))
}

fn main() -> spinrep::Result<()> {
    let params = MixtureParams {
        phase_slope: 0.3,
        ..Default::default()
    };
    let mut prev: Option<[f64; 4]> = None;
    println!("mixture");
    for n in [32, 48, 72] {
        let v = norms(&gen::full_rank_mixture(
            Grid3::cubic(n, -8.0, 8.0)?,
            &params,
        )?)?;
        let change = prev.map(|p| {
            p.iter()
                .zip(&v)
                .map(|(a, b)| rel_change(*a, *b))
                .fold(0.0, f64::max)
        });
        println!(
            "  n={n:<3} H1(up)={:.6} σ-term={:.6} change={}",
            v[0],
            v[2],
            fmt(change)
        );
        prev = Some(v);
    }

    prev = None;
    println!("step ball");
    for n in [32, 48, 72] {
        let rho = gen::step_ball(Grid3::cubic(n, -4.0, 4.0)?, 2, 2.0)?;
        let half = rho.scale(0.5);
        let v = norms(&SpinDensityField::diagonal(half.clone(), half, 2)?)?;
        let change = prev.map(|p| rel_change(p[0], v[0]));
        println!("  n={n:<3} H1(up)={:.6} change={}", v[0], fmt(change));
        prev = Some(v);
    }
    Ok(())
}
