//! Mixed states of Slater determinants and their verification against a
//! target spin density.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::check::Tolerances;
use crate::error::{Error, Result};
use crate::field::{dirichlet_energy, weighted_gradient_l1, Grid3};
use crate::harriman::{gram, gram_deviation, slater_density, Spinor};
use crate::spin::{det_field, det_raw, trace_integral, SpinDensityField};

/// One Slater determinant with its statistical weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub weight: f64,
    /// The orbitals were built for the spin-swapped piece (and have been
    /// swapped back).
    pub swapped: bool,
    pub label: String,
    pub orbitals: Vec<Spinor>,
}

/// `Γ = Σ pₙ |Ψₙ⟩⟨Ψₙ|` with each `Ψₙ` a Slater determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    grid: Grid3,
    n_electrons: u32,
    branches: Vec<Branch>,
}

impl Witness {
    /// Checks shapes and signs only; the weight sum is left to [`verify`].
    pub fn new(grid: Grid3, n_electrons: u32, branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidParameter("witness has no branches".into()));
        }
        for (i, b) in branches.iter().enumerate() {
            if !(b.weight >= 0.0) || !b.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "branch {i} has weight {}",
                    b.weight
                )));
            }
            if b.orbitals.len() != n_electrons as usize {
                return Err(Error::InvalidParameter(format!(
                    "branch {i} has {} orbitals, expected {n_electrons}",
                    b.orbitals.len()
                )));
            }
            for o in &b.orbitals {
                grid.ensure_same(o.up.grid())?;
                grid.ensure_same(o.dn.grid())?;
            }
        }
        Ok(Witness {
            grid,
            n_electrons,
            branches,
        })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn n_electrons(&self) -> u32 {
        self.n_electrons
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    pub fn set_weight(&mut self, branch: usize, weight: f64) -> Result<()> {
        if !(weight >= 0.0) {
            return Err(Error::InvalidParameter(format!("weight {weight}")));
        }
        let b = self
            .branches
            .get_mut(branch)
            .ok_or_else(|| Error::InvalidParameter(format!("no branch {branch}")))?;
        b.weight = weight;
        Ok(())
    }

    /// Spin density of one determinant.
    pub fn branch_density(&self, branch: usize) -> SpinDensityField {
        slater_density(&self.branches[branch].orbitals, self.n_electrons)
            .expect("validated witness")
    }
}

/// `Σₙ pₙ Σₖ Φₖ^α conj(Φₖ^β)`.
pub fn density_of(w: &Witness) -> SpinDensityField {
    let densities: Vec<SpinDensityField> =
        (0..w.branches.len()).map(|i| w.branch_density(i)).collect();
    let n = w.grid.len();
    let mut acc = SpinDensityField::zeros(w.grid, w.n_electrons).expect("positive electron count");
    for (b, d) in w.branches.iter().zip(&densities) {
        acc = sum(&acc, &d.scale_by(b.weight), n);
    }
    acc
}

fn sum(a: &SpinDensityField, b: &SpinDensityField, n: usize) -> SpinDensityField {
    let grid = *a.grid();
    let up = (0..n)
        .map(|i| a.rho_up().values()[i] + b.rho_up().values()[i])
        .collect();
    let dn = (0..n)
        .map(|i| a.rho_dn().values()[i] + b.rho_dn().values()[i])
        .collect();
    let sg = (0..n)
        .map(|i| a.sigma().values()[i] + b.sigma().values()[i])
        .collect();
    SpinDensityField::new(
        crate::field::ScalarField::new(grid, up).expect("length"),
        crate::field::ScalarField::new(grid, dn).expect("length"),
        crate::field::ComplexField::new(grid, sg).expect("length"),
        a.n_electrons(),
    )
    .expect("same grid")
}

/// `Tr(−Δγ^{↑↑})` and `Tr(−Δγ^{↓↓})`.
pub fn kinetic_by_spin(w: &Witness) -> (f64, f64) {
    let mut up = 0.0;
    let mut dn = 0.0;
    for b in &w.branches {
        for o in &b.orbitals {
            let (ku, kd) = o.kinetic_parts();
            up += b.weight * ku;
            dn += b.weight * kd;
        }
    }
    (up, dn)
}

/// `Tr(−Δγ) = Σₙ pₙ Σₖ ∫|∇Φₖ|²`, without the factor ½.
pub fn kinetic_energy(w: &Witness) -> f64 {
    let (u, d) = kinetic_by_spin(w);
    u + d
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyTolerances {
    /// Relative L¹ density mismatch.
    pub density: f64,
    pub weight_sum: f64,
    /// Largest `|G − I|` entry per branch.
    pub gram: f64,
    /// Relative slack on the integrated kinetic inequalities.
    pub slack: f64,
    /// Branch determinant, relative to `max(ρ)²` of the target.
    pub branch_det: f64,
    /// Occupation eigenvalues must lie in `[−occupation, 1 + occupation]`.
    pub occupation: f64,
    pub check: Tolerances,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            density: 1e-8,
            weight_sum: 1e-12,
            gram: 1e-6,
            slack: 0.05,
            branch_det: 1e-10,
            occupation: 1e-8,
            check: Tolerances::default(),
        }
    }
}

/// `lhs ≤ (1 + slack)·rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Occupations {
    pub min: f64,
    pub max: f64,
    pub trace: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub density_mismatch: f64,
    pub density_pass: bool,
    pub gram_deviations: Vec<f64>,
    pub gram_pass: bool,
    pub weight_sum_deviation: f64,
    pub weight_pass: bool,
    pub kinetic: f64,
    pub kinetic_up: f64,
    pub kinetic_dn: f64,
    pub kinetic_pass: bool,
    pub inequalities: Vec<Inequality>,
    pub inequalities_pass: bool,
    pub branch_dets: Vec<f64>,
    pub branch_det_pass: bool,
    pub occupations: Occupations,
    pub electrons: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.density_pass
            && self.gram_pass
            && self.weight_pass
            && self.kinetic_pass
            && self.inequalities_pass
            && self.branch_det_pass
            && self.occupations.pass
    }
}

/// Check a witness against a target density.
pub fn verify(
    w: &Witness,
    target: &SpinDensityField,
    tol: &VerifyTolerances,
) -> Result<VerifyReport> {
    w.grid.ensure_same(target.grid())?;
    tol.check.validate()?;
    let rebuilt = density_of(w);
    let target_l1 = target.l1_norm();
    let density_mismatch = if target_l1 > 0.0 {
        rebuilt.l1_distance(target)? / target_l1
    } else {
        rebuilt.l1_norm()
    };

    let gram_deviations = w
        .branches
        .iter()
        .map(|b| gram_deviation(&b.orbitals))
        .collect::<Result<Vec<_>>>()?;
    let gram_pass = gram_deviations.iter().all(|&d| d <= tol.gram);

    let weight_sum_deviation = (w.branches.iter().map(|b| b.weight).sum::<f64>() - 1.0).abs();

    let (kinetic_up, kinetic_dn) = kinetic_by_spin(w);
    let kinetic = kinetic_up + kinetic_dn;

    let floor = (tol.check.floor * rebuilt.scale()).max(f64::MIN_POSITIVE);
    let rho = rebuilt.total();
    let sqrt_det = det_field(&rebuilt).sqrt_clamped();
    let ineq = |name, lhs: f64, rhs: f64| Inequality {
        name,
        lhs,
        rhs,
        pass: lhs.is_finite() && lhs <= (1.0 + tol.slack) * rhs,
    };
    let inequalities = vec![
        ineq(
            "grad_sqrt_rho_up_sq",
            dirichlet_energy(&rebuilt.rho_up().sqrt_clamped()),
            kinetic_up,
        ),
        ineq(
            "grad_sqrt_rho_dn_sq",
            dirichlet_energy(&rebuilt.rho_dn().sqrt_clamped()),
            kinetic_dn,
        ),
        ineq(
            "grad_sigma_sq_over_rho",
            weighted_gradient_l1(rebuilt.sigma(), &rho, floor)?.value,
            kinetic,
        ),
        ineq(
            "grad_sqrt_det_sq_over_rho",
            weighted_gradient_l1(&sqrt_det, &rho, floor)?.value,
            4.0 * kinetic,
        ),
    ];
    let inequalities_pass = inequalities.iter().all(|i| i.pass);

    let scale = target.scale().max(f64::MIN_POSITIVE);
    let branch_dets: Vec<f64> = (0..w.branches.len())
        .map(|i| {
            det_raw(&w.branch_density(i))
                .values()
                .iter()
                .fold(0.0f64, |m, d| m.max(d.abs()))
                / (scale * scale)
        })
        .collect();
    let branch_det_pass = branch_dets.iter().all(|&d| d <= tol.branch_det);

    let occupations = occupations(w, tol.occupation)?;

    Ok(VerifyReport {
        density_mismatch,
        density_pass: density_mismatch <= tol.density,
        gram_deviations,
        gram_pass,
        weight_sum_deviation,
        weight_pass: weight_sum_deviation <= tol.weight_sum,
        kinetic,
        kinetic_up,
        kinetic_dn,
        kinetic_pass: kinetic.is_finite(),
        inequalities,
        inequalities_pass,
        branch_dets,
        branch_det_pass,
        occupations,
        electrons: trace_integral(&rebuilt),
    })
}

fn to_matrix(g: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |i, j| g[i][j])
}

/// Eigenvalues of the one-body operator `γ = Σₙ pₙ Pₙ`, with `Pₙ` the
/// projector onto the span of branch n's orbitals.
///
/// With all orbitals stacked as columns of Φ, `γ = Φ D Φ†` where
/// `D = ⊕ pₙ Gₙ⁻¹`; its nonzero spectrum is that of `D^{1/2} S D^{1/2}` with
/// `S = Φ†Φ`.
pub fn occupations(w: &Witness, tol: f64) -> Result<Occupations> {
    let all: Vec<&Spinor> = w.branches.iter().flat_map(|b| b.orbitals.iter()).collect();
    let m = all.len();
    let mut s = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for i in 0..m {
        for j in i..m {
            let v = all[i].inner(all[j])?;
            s[(i, j)] = v;
            s[(j, i)] = v.conj();
        }
    }
    let mut d_half = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    let mut offset = 0;
    for b in &w.branches {
        let k = b.orbitals.len();
        let g = to_matrix(&gram(&b.orbitals)?);
        let eig = SymmetricEigen::new(g);
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Precondition(format!(
                "orbitals of branch {} are linearly dependent",
                b.label
            )));
        }
        let inv_sqrt = nalgebra::DVector::from_iterator(
            k,
            eig.eigenvalues
                .iter()
                .map(|&l| Complex64::new(b.weight.sqrt() / l.sqrt(), 0.0)),
        );
        let q = &eig.eigenvectors;
        let block = q * DMatrix::from_diagonal(&inv_sqrt) * q.adjoint();
        d_half.view_mut((offset, offset), (k, k)).copy_from(&block);
        offset += k;
    }
    let a = &d_half * s * &d_half;
    let a = (&a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(a);
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let trace = eig.eigenvalues.iter().sum();
    Ok(Occupations {
        min,
        max,
        trace,
        pass: min >= -tol && max <= 1.0 + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ComplexField, ScalarField};
    use crate::gen;
    use crate::harriman::{build_orbitals, HarrimanOptions};

    fn gauss_orbital(g: Grid3, a: f64) -> ComplexField {
        gen::gaussian(g, 1.0, a, [0.0; 3])
            .sqrt_clamped()
            .to_complex()
    }

    #[test]
    fn single_orbital_density_is_outer_product() {
        let g = Grid3::cubic(16, -6.0, 6.0).unwrap();
        let psi = gauss_orbital(g, 1.0);
        let up = psi.scale(0.6);
        let dn = psi.map(|v| v * Complex64::new(0.0, 0.8));
        let w = Witness::new(
            g,
            1,
            vec![Branch {
                weight: 1.0,
                swapped: false,
                label: "a".into(),
                orbitals: vec![Spinor {
                    up: up.clone(),
                    dn: dn.clone(),
                }],
            }],
        )
        .unwrap();
        let r = density_of(&w);
        for i in 0..g.len() {
            let expect = up.values()[i] * dn.values()[i].conj();
            assert!((r.sigma().values()[i] - expect).norm() < 1e-16);
        }
    }

    #[test]
    fn duplicated_branch_is_idempotent() {
        let g = Grid3::cubic(16, -6.0, 6.0).unwrap();
        let psi = gauss_orbital(g, 1.0);
        let o = Spinor {
            up: psi.clone(),
            dn: ComplexField::zeros(g),
        };
        let branch = |w| Branch {
            weight: w,
            swapped: false,
            label: "b".into(),
            orbitals: vec![o.clone()],
        };
        let one = Witness::new(g, 1, vec![branch(1.0)]).unwrap();
        let two = Witness::new(g, 1, vec![branch(0.5), branch(0.5)]).unwrap();
        assert!(density_of(&one).max_abs_diff(&density_of(&two)).unwrap() < 1e-16);
    }

    #[test]
    fn gaussian_kinetic_energy() {
        let g = Grid3::cubic(64, -8.0, 8.0).unwrap();
        let o = Spinor {
            up: gauss_orbital(g, 1.0),
            dn: ComplexField::zeros(g),
        };
        let w = Witness::new(
            g,
            1,
            vec![Branch {
                weight: 1.0,
                swapped: false,
                label: "g".into(),
                orbitals: vec![o],
            }],
        )
        .unwrap();
        assert!((kinetic_energy(&w) / 1.5 - 1.0).abs() < 0.01);
    }

    #[test]
    fn phase_term_scales_with_k_squared() {
        let g = Grid3::cubic(80, -5.5, 5.5).unwrap();
        let rho = gen::gaussian(g, 1.0, 1.0, [0.0; 3]);
        let r = SpinDensityField::diagonal(ScalarField::zeros(g), rho.clone(), 1).unwrap();
        let set = build_orbitals(&r, &HarrimanOptions::default()).unwrap();
        let base = dirichlet_energy(&rho.sqrt_clamped());
        let axis = set.phase.axis;
        let with_k = |k: f64| {
            let dn = ComplexField::new(
                g,
                rho.values()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        Complex64::from_polar(
                            v.sqrt(),
                            2.0 * std::f64::consts::PI
                                * k
                                * set.phase.f[g.unravel(i)[axis.index()]],
                        )
                    })
                    .collect(),
            )
            .unwrap();
            dirichlet_energy(&dn) - base
        };
        let (p1, p2) = (with_k(1.0), with_k(2.0));
        let cubic = 4.0 * std::f64::consts::PI.powi(2) * set.phase.cubic_moment();
        assert!((p1 / cubic - 1.0).abs() < 0.02, "{p1} vs {cubic}");
        assert!((p2 / p1 / 4.0 - 1.0).abs() < 0.05, "{p2} vs {p1}");
    }

    #[test]
    fn corrupted_weight_fails_weight_check() {
        let g = Grid3::cubic(32, -8.0, 8.0).unwrap();
        let r = gen::rank1_two_gaussians(g, 1, 1.0, 1.0, 0.5).unwrap();
        let set = build_orbitals(&r, &HarrimanOptions::default()).unwrap();
        let mut w = Witness::new(
            g,
            1,
            vec![Branch {
                weight: 1.0,
                swapped: false,
                label: "x".into(),
                orbitals: set.orbitals,
            }],
        )
        .unwrap();
        w.set_weight(0, 0.9).unwrap();
        let rep = verify(&w, &r, &VerifyTolerances::default()).unwrap();
        assert!(!rep.weight_pass);
        assert!((rep.weight_sum_deviation - 0.1).abs() < 1e-12);
    }

    #[test]
    fn occupations_of_two_orthonormal_branches() {
        let g = Grid3::cubic(16, -6.0, 6.0).unwrap();
        let psi = gauss_orbital(g, 1.0);
        let up = Spinor {
            up: psi.clone(),
            dn: ComplexField::zeros(g),
        };
        let dn = Spinor {
            up: ComplexField::zeros(g),
            dn: psi,
        };
        let w = Witness::new(
            g,
            1,
            vec![
                Branch {
                    weight: 0.3,
                    swapped: false,
                    label: "u".into(),
                    orbitals: vec![up],
                },
                Branch {
                    weight: 0.7,
                    swapped: false,
                    label: "d".into(),
                    orbitals: vec![dn],
                },
            ],
        )
        .unwrap();
        let occ = occupations(&w, 1e-8).unwrap();
        assert!((occ.min - 0.3).abs() < 1e-12 && (occ.max - 0.7).abs() < 1e-12);
        assert!((occ.trace - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_orbital_count() {
        let g = Grid3::cubic(8, -4.0, 4.0).unwrap();
        let o = Spinor {
            up: ComplexField::zeros(g),
            dn: ComplexField::zeros(g),
        };
        assert!(Witness::new(
            g,
            2,
            vec![Branch {
                weight: 1.0,
                swapped: false,
                label: "x".into(),
                orbitals: vec![o]
            }]
        )
        .is_err());
    }
}
