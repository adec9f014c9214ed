//! Acceptance criteria. Each test prints one PASS/FAIL line.
//!
//! Oracles are computed here independently of the library where possible:
//! matrix products, 2×2 eigensolves, orbital sums and overlaps.

use std::io::Write;
use std::time::Instant;

use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use spinrep::check::{rel_change, RegularityNorms};
use spinrep::decompose::{construct_witness_with, ConstructOptions};
use spinrep::field::dirichlet_energy;
use spinrep::gen::{self, MixtureParams, Rank1Params};
use spinrep::harriman::{build_orbitals, kinetic_bounds, HarrimanOptions, PhaseAxis};
use spinrep::spin::det_raw;
use spinrep::witness::{density_of, verify, VerifyTolerances};
use spinrep::{
    check, eigen_densities, sqrt_field, Axis, ComplexField, Condition, Grid3, ScalarField,
    SpinDensityField, Tolerances,
};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let line = format!(
        "criterion {id} {}: {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "{line}");
}

/// 1000 PSD matrices on a 10³ grid: full rank, rank one, and diagonal with a
/// zero entry, magnitudes spread over three decades.
fn random_psd() -> SpinDensityField {
    let g = Grid3::cubic(10, 0.0, 1.0).unwrap();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut up = Vec::new();
    let mut dn = Vec::new();
    let mut sg = Vec::new();
    for i in 0..g.len() {
        let (a, b, s) = match i % 10 {
            // rank one: v v†
            0..=1 => {
                let (v0, v1) = (c(), c());
                (v0.norm_sqr(), v1.norm_sqr(), v0 * v1.conj())
            }
            2 => {
                let v = c();
                if i % 20 == 2 {
                    (v.norm_sqr(), 0.0, Complex64::new(0.0, 0.0))
                } else {
                    (0.0, v.norm_sqr(), Complex64::new(0.0, 0.0))
                }
            }
            // A A†
            _ => {
                let (a00, a01, a10, a11) = (c(), c(), c(), c());
                (
                    a00.norm_sqr() + a01.norm_sqr(),
                    a10.norm_sqr() + a11.norm_sqr(),
                    a00 * a10.conj() + a01 * a11.conj(),
                )
            }
        };
        let m = 10f64.powf(-3.0 * (i as f64 * 0.618_033_988_7).fract());
        up.push(m * a);
        dn.push(m * b);
        sg.push(s * m);
    }
    SpinDensityField::new(
        ScalarField::new(g, up).unwrap(),
        ScalarField::new(g, dn).unwrap(),
        ComplexField::new(g, sg).unwrap(),
        1,
    )
    .unwrap()
}

fn mixture_64() -> SpinDensityField {
    let g = Grid3::cubic(64, -8.0, 8.0).unwrap();
    gen::full_rank_mixture(
        g,
        &MixtureParams {
            n_electrons: 2,
            up_fraction: 0.6,
            width_up: 1.0,
            width_dn: 1.2,
            coherence: 0.5,
            phase_slope: 0.7,
            ..Default::default()
        },
    )
    .unwrap()
}

#[test]
fn criterion_1_square_root_identity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for r in [random_psd(), mixture_64()] {
        let root = sqrt_field(&r).unwrap();
        let scale = r.scale();
        let mut err = 0.0f64;
        for i in 0..r.grid().len() {
            let (a, b, s) = r.entry(i);
            let (x, y, t) = (
                root.r_up.values()[i],
                root.r_dn.values()[i],
                root.s.values()[i],
            );
            // [[x, t], [t*, y]]²
            let p_up = x * x + t.norm_sqr();
            let p_dn = y * y + t.norm_sqr();
            let p_s = t * (x + y);
            err = err
                .max((p_up - a).abs())
                .max((p_dn - b).abs())
                .max((p_s - s).norm());
            assert!(x >= 0.0 && y >= 0.0 && x * y - t.norm_sqr() >= -1e-12 * scale);
        }
        worst = worst.max(err / scale);
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "square-root identity",
        worst <= 1e-10 && secs < 5.0,
        format!(
            "max |√R√R - R| / max(ρ) = {worst:.3e} (tol 1e-10), runtime {secs:.2} s (limit 5 s)"
        ),
    );
}

#[test]
fn criterion_2_eigen_equivalence() {
    let mut eig_err = 0.0f64;
    let mut sum_err = 0.0f64;
    let mut prod_err = 0.0f64;
    for r in [random_psd(), mixture_64()] {
        let e = eigen_densities(&r).unwrap();
        let det = det_raw(&r);
        let scale = r.scale();
        for i in 0..r.grid().len() {
            let (a, b, s) = r.entry(i);
            let m = Matrix2::new(Complex64::new(a, 0.0), s, s.conj(), Complex64::new(b, 0.0));
            let ev = SymmetricEigen::new(m).eigenvalues;
            let (hi, lo) = (ev[0].max(ev[1]), ev[0].min(ev[1]));
            let (p, q) = (e.rho_plus.values()[i], e.rho_minus.values()[i]);
            eig_err = eig_err.max(((p - hi).abs()).max((q - lo.max(0.0)).abs()) / scale);
            let rho = a + b;
            if rho > 0.0 {
                sum_err = sum_err.max((p + q - rho).abs() / rho);
                prod_err = prod_err.max((p * q - det.values()[i]).abs() / (rho * rho));
            }
        }
    }
    report(
        2,
        "eigen equivalence",
        eig_err <= 1e-10 && sum_err <= 1e-12 && prod_err <= 1e-12,
        format!(
            "vs direct eigensolve {eig_err:.3e} (tol 1e-10); ρ₊+ρ₋ = ρ rel {sum_err:.3e}, ρ₊ρ₋ = det rel {prod_err:.3e} (tol 1e-12)"
        ),
    );
}

#[test]
fn criterion_3_analytic_norm_anchor() {
    let start = Instant::now();
    let mut errs = Vec::new();
    for n in [64, 96] {
        let g = Grid3::cubic(n, -8.0, 8.0).unwrap();
        let r = gen::gaussian_diagonal(2, 1.0, g).unwrap();
        let h1 = dirichlet_energy(&r.total().sqrt_clamped());
        errs.push((h1 / 3.0 - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        3,
        "analytic norm anchor",
        errs[0] <= 0.01 && errs[1] <= 0.001 && secs < 10.0,
        format!(
            "∫|∇√ρ|² rel error {:.3e} at 64³ (tol 1e-2), {:.3e} at 96³ (tol 1e-3), runtime {secs:.2} s (limit 10 s)",
            errs[0], errs[1]
        ),
    );
}

/// Trapezoid weights on the grid, built here rather than taken from the
/// library.
fn weights(g: &Grid3) -> Vec<f64> {
    let w1 = |n: usize, h: f64| -> Vec<f64> {
        (0..n)
            .map(|i| if i == 0 || i + 1 == n { h / 2.0 } else { h })
            .collect()
    };
    let [nx, ny, nz] = g.dims();
    let h = g.spacing();
    let (wx, wy, wz) = (w1(nx, h[0]), w1(ny, h[1]), w1(nz, h[2]));
    let mut out = Vec::with_capacity(g.len());
    for x in &wx {
        for y in &wy {
            for z in &wz {
                out.push(x * y * z);
            }
        }
    }
    out
}

#[test]
fn criterion_4_harriman_reconstruction() {
    let cases: Vec<(Grid3, Rank1Params)> = vec![
        // constant ratio ρ↑/ρ↓ = 1.5
        (
            Grid3::cubic(64, -4.5, 4.5).unwrap(),
            Rank1Params {
                n_electrons: 1,
                up_fraction: 0.6,
                width_up: 1.0,
                width_dn: 1.0,
                twist: 0.4,
            },
        ),
        (
            Grid3::cubic(64, -4.5, 4.5).unwrap(),
            Rank1Params {
                n_electrons: 2,
                up_fraction: 0.6,
                width_up: 1.0,
                width_dn: 1.0,
                twist: 0.4,
            },
        ),
        (
            Grid3::cubic(64, -4.5, 4.5).unwrap(),
            Rank1Params {
                n_electrons: 3,
                up_fraction: 0.6,
                width_up: 1.0,
                width_dn: 1.0,
                twist: 0.4,
            },
        ),
        // varying ratio, peak 1.73 at the centre
        (
            Grid3::cubic(64, -5.5, 5.5).unwrap(),
            Rank1Params {
                n_electrons: 1,
                up_fraction: 0.5,
                width_up: 1.0,
                width_dn: 1.2,
                twist: 0.4,
            },
        ),
        (
            Grid3::cubic(64, -5.5, 5.5).unwrap(),
            Rank1Params {
                n_electrons: 2,
                up_fraction: 0.5,
                width_up: 1.0,
                width_dn: 1.2,
                twist: 0.4,
            },
        ),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (g, p) in cases {
        let r = gen::rank1_gaussian(g, &p).unwrap();
        let set = build_orbitals(
            &r,
            &HarrimanOptions {
                axis: PhaseAxis::Fixed(Axis::X),
                ..Default::default()
            },
        )
        .unwrap();
        let scale = r.scale();
        let w = weights(&g);
        let mut rec = 0.0f64;
        for i in 0..g.len() {
            let (mut a, mut b, mut s) = (0.0, 0.0, Complex64::new(0.0, 0.0));
            for o in &set.orbitals {
                let (u, d) = (o.up.values()[i], o.dn.values()[i]);
                a += u.norm_sqr();
                b += d.norm_sqr();
                s += u * d.conj();
            }
            let (ra, rb, rs) = r.entry(i);
            rec = rec
                .max((a - ra).abs())
                .max((b - rb).abs())
                .max((s - rs).norm());
        }
        rec /= scale;
        let mut gram = 0.0f64;
        for (k, ok_) in set.orbitals.iter().enumerate() {
            for (l, ol) in set.orbitals.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..g.len() {
                    acc += (ok_.up.values()[i].conj() * ol.up.values()[i]
                        + ok_.dn.values()[i].conj() * ol.dn.values()[i])
                        * w[i];
                }
                let target = if k == l { 1.0 } else { 0.0 };
                gram = gram.max((acc - target).norm());
            }
        }
        let bounds = kinetic_bounds(&r, &set, &Tolerances::default()).unwrap();
        let bound_ok = bounds.iter().all(|b| b.holds());
        let worst_ratio = bounds
            .iter()
            .map(|b| (b.lhs_up / b.rhs_up).max(b.lhs_dn / b.rhs_dn))
            .fold(0.0f64, f64::max);
        ok &= rec <= 1e-12 && gram <= 1e-6 && bound_ok;
        lines.push(format!(
            "N={} widths {}/{}: recon {rec:.2e}, gram {gram:.2e}, kinetic lhs/rhs ≤ {worst_ratio:.3}",
            p.n_electrons, p.width_up, p.width_dn
        ));
    }
    report(
        4,
        "harriman reconstruction",
        ok,
        format!(
            "{} (tols: recon 1e-12·max(ρ), gram 1e-6, lhs/rhs ≤ 1)",
            lines.join("; ")
        ),
    );
}

#[test]
fn criterion_5_end_to_end_round_trip() {
    let start = Instant::now();
    let g = Grid3::cubic(64, -8.0, 8.0).unwrap();
    let r = gen::full_rank_mixture(
        g,
        &MixtureParams {
            n_electrons: 2,
            coherence: 0.5,
            phase_slope: 0.5,
            ..Default::default()
        },
    )
    .unwrap();
    let built = construct_witness_with(&r, &ConstructOptions::default()).unwrap();
    let rep = verify(&built.witness, &r, &VerifyTolerances::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let worst_det = rep.branch_dets.iter().cloned().fold(0.0f64, f64::max);
    let ineq: Vec<String> = rep
        .inequalities
        .iter()
        .map(|i| format!("{} {:.3e} ≤ {:.3e}", i.name, i.lhs, i.rhs))
        .collect();
    let pass = rep.density_mismatch <= 1e-8
        && rep.weight_sum_deviation <= 1e-12
        && worst_det <= 1e-10
        && rep.inequalities_pass
        && secs < 60.0;
    report(
        5,
        "end-to-end round trip",
        pass,
        format!(
            "{} branches, mismatch {:.3e} (tol 1e-8), weight sum dev {:.1e} (tol 1e-12), max branch det {:.1e} (tol 1e-10), gram ≤ {:.1e}, {}, runtime {secs:.1} s (limit 60 s)",
            built.witness.branches().len(),
            rep.density_mismatch,
            rep.weight_sum_deviation,
            worst_det,
            rep.gram_deviations.iter().cloned().fold(0.0f64, f64::max),
            ineq.join(", ")
        ),
    );
}

#[test]
fn criterion_6_pure_mixed_separation() {
    let g = Grid3::cubic(64, -5.0, 5.0).unwrap();
    let r = gen::full_rank_mixture(
        g,
        &MixtureParams {
            n_electrons: 1,
            coherence: 0.5,
            phase_slope: 0.5,
            ..Default::default()
        },
    )
    .unwrap();
    let scale = r.scale();
    let det = det_raw(&r);
    let positive = det
        .values()
        .iter()
        .filter(|&&d| d > 1e-10 * scale * scale)
        .count();
    let fraction = positive as f64 / g.len() as f64;

    let built = construct_witness_with(&r, &ConstructOptions::default()).unwrap();
    let w = &built.witness;
    let mixed = density_of(w).l1_distance(&r).unwrap() / r.l1_norm();
    // each determinant alone is a pure N = 1 state: rank one everywhere
    let mut pure_best = f64::INFINITY;
    let mut pure_det = 0.0f64;
    for i in 0..w.branches().len() {
        let d = w.branch_density(i);
        pure_best = pure_best.min(d.l1_distance(&r).unwrap() / r.l1_norm());
        pure_det = pure_det.max(
            det_raw(&d)
                .values()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                / (scale * scale),
        );
    }
    report(
        6,
        "pure/mixed separation",
        fraction > 0.1 && pure_det <= 1e-10 && mixed <= 1e-8 && pure_best > 1e-2,
        format!(
            "det > 1e-10·max(ρ)² on {:.1}% of nodes (need > 10%); single determinants have det ≤ {pure_det:.1e}·max(ρ)² and miss R by ≥ {pure_best:.3} rel L¹; {}-branch mixture misses by {mixed:.2e} (tol 1e-8)",
            100.0 * fraction,
            w.branches().len()
        ),
    );
}

#[test]
fn criterion_7_checker_soundness() {
    let g = Grid3::cubic(64, -8.0, 8.0).unwrap();
    let tol = Tolerances::default();
    let cases = [
        (
            "negative lobe",
            gen::negative_lobe(g, 2).unwrap(),
            Condition::Positivity,
        ),
        (
            "|σ|² > ρ↑ρ↓",
            gen::overcorrelated(g, 2, 0.05).unwrap(),
            Condition::Determinant,
        ),
        (
            "wrong normalization",
            gen::misnormalized(g, 2, 2.1).unwrap(),
            Condition::Normalization,
        ),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, r, intended) in cases {
        let failed = check(&r, &tol).unwrap().failed();
        ok &= failed == vec![intended];
        let keys: Vec<&str> = failed.iter().map(|c| c.key()).collect();
        lines.push(format!("{name} fails [{}]", keys.join(", ")));
    }
    let clean = check(&gen::gaussian_diagonal(2, 1.0, g).unwrap(), &tol)
        .unwrap()
        .failed();
    ok &= clean.is_empty();
    report(
        7,
        "checker soundness",
        ok,
        format!(
            "{}; control fails {} conditions",
            lines.join("; "),
            clean.len()
        ),
    );
}

#[test]
fn criterion_8_refinement_stability() {
    let fixtures: Vec<(&str, Box<dyn Fn(Grid3) -> SpinDensityField>)> = vec![
        (
            "gaussian_diagonal",
            Box::new(|g| gen::gaussian_diagonal(2, 1.0, g).unwrap()),
        ),
        (
            "rank1",
            Box::new(|g| {
                gen::rank1_gaussian(
                    g,
                    &Rank1Params {
                        n_electrons: 2,
                        up_fraction: 0.5,
                        width_up: 1.0,
                        width_dn: 1.2,
                        twist: 0.5,
                    },
                )
                .unwrap()
            }),
        ),
        (
            "full_rank_mixture",
            Box::new(|g| {
                gen::full_rank_mixture(
                    g,
                    &MixtureParams {
                        up_fraction: 0.6,
                        width_dn: 1.2,
                        coherence: 0.5,
                        phase_slope: 0.7,
                        ..Default::default()
                    },
                )
                .unwrap()
            }),
        ),
    ];
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for (name, make) in &fixtures {
        let coarse =
            RegularityNorms::compute(&make(Grid3::cubic(64, -8.0, 8.0).unwrap()), &tol).unwrap();
        let fine =
            RegularityNorms::compute(&make(Grid3::cubic(96, -8.0, 8.0).unwrap()), &tol).unwrap();
        let pairs = [
            (coarse.h1_up, fine.h1_up),
            (coarse.h1_dn, fine.h1_dn),
            (coarse.sigma_w32, fine.sigma_w32),
            (coarse.sqrt_det_w32, fine.sqrt_det_w32),
            (coarse.sigma_weighted.value, fine.sigma_weighted.value),
            (coarse.det_weighted.value, fine.det_weighted.value),
        ];
        let m = pairs
            .iter()
            .map(|&(a, b)| rel_change(a, b))
            .fold(0.0f64, f64::max);
        worst = worst.max(m);
        lines.push(format!("{name} {m:.2e}"));
    }
    report(
        8,
        "refinement stability",
        worst < 0.01,
        format!(
            "max relative change 64³→96³: {} (tol 1e-2)",
            lines.join(", ")
        ),
    );
}
