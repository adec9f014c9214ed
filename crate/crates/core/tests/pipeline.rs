use num_complex::Complex64;

use spinrep::decompose::{construct_witness_with, ConstructOptions, CutoffFunction};
use spinrep::gen::{self, MixtureParams};
use spinrep::spin::{det_raw, trace_integral};
use spinrep::witness::{density_of, occupations, verify, VerifyTolerances};
use spinrep::{
    check, construct_witness, ComplexField, Grid3, SpinDensityField, Tolerances, Verdict,
};

fn rel_mismatch(a: &SpinDensityField, b: &SpinDensityField) -> f64 {
    a.l1_distance(b).unwrap() / b.l1_norm()
}

#[test]
fn rank1_ratio_constrained_gives_one_determinant() {
    let g = Grid3::cubic(48, -6.0, 6.0).unwrap();
    let r = gen::rank1_two_gaussians(g, 2, 1.0, 1.1, 0.5).unwrap();
    let w = construct_witness(&r).unwrap();
    assert_eq!(w.branches().len(), 1);
    assert_eq!(w.branches()[0].weight, 1.0);
    assert!(rel_mismatch(&density_of(&w), &r) <= 1e-12);
}

#[test]
fn rank1_with_large_up_share_is_swapped() {
    // ρ↑/ρ↓ = 3 everywhere: only the swapped construction applies
    let g = Grid3::cubic(48, -6.0, 6.0).unwrap();
    let r = gen::rank1_two_gaussians(g, 2, 1.0, 1.0, 0.75).unwrap();
    let built = construct_witness_with(&r, &ConstructOptions::default()).unwrap();
    assert!(built.rank1_input);
    assert_eq!(built.witness.branches().len(), 1);
    assert!(built.witness.branches()[0].swapped);
    assert!(rel_mismatch(&density_of(&built.witness), &r) <= 1e-12);
}

#[test]
fn diagonal_two_gaussians_needs_a_mixture() {
    let g = Grid3::cubic(48, -8.0, 8.0).unwrap();
    let up = gen::gaussian(g, 1.0, 1.0, [0.0; 3]);
    let dn = gen::gaussian(g, 1.0, 1.3, [0.0; 3]);
    let r = SpinDensityField::diagonal(up, dn, 2).unwrap();
    let w = construct_witness(&r).unwrap();
    assert!(w.branches().len() >= 2);
    let rep = verify(&w, &r, &VerifyTolerances::default()).unwrap();
    assert!(rep.density_mismatch <= 1e-8, "{rep:?}");
    assert!(rep.weight_sum_deviation <= 1e-12);
}

#[test]
fn imaginary_coherence_round_trip() {
    // ρ↑ = ρ↓ = g/2, σ = i·g/4
    let g = Grid3::cubic(64, -8.0, 8.0).unwrap();
    let gs = gen::gaussian(g, 2.0, 1.0, [0.0; 3]);
    let half = gs.scale(0.5);
    let sigma = ComplexField::new(
        g,
        gs.values()
            .iter()
            .map(|v| Complex64::new(0.0, v / 4.0))
            .collect(),
    )
    .unwrap();
    let r = SpinDensityField::new(half.clone(), half, sigma, 2).unwrap();
    let w = construct_witness(&r).unwrap();
    let total: f64 = w.weights().iter().sum();
    assert!((total - 1.0).abs() <= 1e-12);
    let rep = verify(&w, &r, &VerifyTolerances::default()).unwrap();
    assert!(rep.passed(), "{}", spinrep::io::format_verify(&rep));
}

#[test]
fn four_branch_witness_through_ratio_split() {
    let g = Grid3::cubic(64, -8.0, 8.0).unwrap();
    let r = gen::full_rank_mixture(
        g,
        &MixtureParams {
            n_electrons: 2,
            up_fraction: 0.5,
            width_up: 1.0,
            width_dn: 1.3,
            coherence: 0.95,
            phase_slope: 0.4,
            ..Default::default()
        },
    )
    .unwrap();
    for cutoff in [CutoffFunction::Quintic, CutoffFunction::SmoothBump] {
        let opts = ConstructOptions {
            cutoff,
            ..Default::default()
        };
        let built = construct_witness_with(&r, &opts).unwrap();
        let w = &built.witness;
        assert!(
            w.branches().len() >= 3,
            "labels {:?}",
            built.pieces.iter().map(|p| &p.label).collect::<Vec<_>>()
        );
        assert!(w.branches().len() <= 4);
        assert!(built
            .pieces
            .iter()
            .all(|p| p.check_verdict != Some(Verdict::Fail)));
        let rep = verify(w, &r, &VerifyTolerances::default()).unwrap();
        assert!(
            rep.density_mismatch <= 1e-8,
            "{}",
            spinrep::io::format_verify(&rep)
        );
        assert!(rep.weight_sum_deviation <= 1e-12);
        assert!(rep.branch_det_pass);
        assert!(rep.inequalities_pass, "{:?}", rep.inequalities);
        assert!(rep.kinetic.is_finite());
        assert!((trace_integral(&density_of(w)) - 2.0).abs() <= 1e-6 * 2.0);
    }
}

#[test]
fn witness_density_passes_check() {
    let g = Grid3::cubic(48, -8.0, 8.0).unwrap();
    let r = gen::full_rank_mixture(
        g,
        &MixtureParams {
            phase_slope: 0.3,
            ..Default::default()
        },
    )
    .unwrap();
    let w = construct_witness(&r).unwrap();
    let rebuilt = density_of(&w);
    assert_ne!(
        check(&rebuilt, &Tolerances::default()).unwrap().verdict(),
        Verdict::Fail
    );
    for i in 0..w.branches().len() {
        let d = w.branch_density(i);
        let scale = r.scale();
        let worst = det_raw(&d)
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst <= 1e-10 * scale * scale);
    }
}

#[test]
fn occupations_lie_in_unit_interval() {
    let g = Grid3::cubic(16, -6.0, 6.0).unwrap();
    let r = gen::full_rank_mixture(
        g,
        &MixtureParams {
            n_electrons: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let opts = ConstructOptions {
        validate_pieces: false,
        ..Default::default()
    };
    let w = construct_witness_with(&r, &opts).unwrap().witness;
    let occ = occupations(&w, 1e-8).unwrap();
    assert!(occ.pass, "{occ:?}");
    assert!((occ.trace - 1.0).abs() < 1e-8);
}

#[test]
fn non_representable_input_is_refused() {
    let g = Grid3::cubic(32, -8.0, 8.0).unwrap();
    for r in [
        gen::negative_lobe(g, 2).unwrap(),
        gen::misnormalized(g, 2, 2.5).unwrap(),
    ] {
        let err = construct_witness(&r).unwrap_err();
        assert!(err.to_string().contains("check input"), "{err}");
    }
}
