//! Closed-form pointwise square root of a positive 2×2 spin density and the
//! eigenvalue densities ρ± obtained from it.
//!
//! With `d = √det R` and `ρ = ρ↑ + ρ↓`,
//!
//! ```text
//! r↑ = (ρ↑ + d) / √(ρ + 2d),  r↓ = (ρ↓ + d) / √(ρ + 2d),  s = σ / √(ρ + 2d)
//! ```
//!
//! gives `√R = [[r↑, s], [s*, r↓]]`. The eigenvalues of R are the squares of
//! the roots of `x² − (r↑ + r↓)x + (r↑r↓ − |s|²)`.

use num_complex::Complex64;

use crate::check::{rel_change, Basis, Tolerances, Verdict};
use crate::error::{Error, Result};
use crate::field::{dirichlet_energy, ComplexField, ScalarField};
use crate::spin::{det_raw, SpinDensityField, DET_CANCELLATION};

#[derive(Clone, Debug, PartialEq)]
pub struct SqrtField {
    pub r_up: ScalarField,
    pub r_dn: ScalarField,
    pub s: ComplexField,
}

impl SqrtField {
    /// `√R·√R` as a spin density with the given electron count.
    pub fn square(&self, n_electrons: u32) -> Result<SpinDensityField> {
        let n = self.r_up.grid().len();
        let mut up = Vec::with_capacity(n);
        let mut dn = Vec::with_capacity(n);
        let mut sg = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b, s) = (
                self.r_up.values()[i],
                self.r_dn.values()[i],
                self.s.values()[i],
            );
            up.push(a * a + s.norm_sqr());
            dn.push(b * b + s.norm_sqr());
            sg.push(s * (a + b));
        }
        let grid = *self.r_up.grid();
        SpinDensityField::new(
            ScalarField::new(grid, up)?,
            ScalarField::new(grid, dn)?,
            ComplexField::new(grid, sg)?,
            n_electrons,
        )
    }

    /// Pointwise det √R = r↑r↓ − |s|².
    pub fn det(&self) -> ScalarField {
        self.r_up
            .zip_map(&self.r_dn, |a, b| a * b)
            .and_then(|p| p.zip_map(&self.s, |ab, s| ab - s.norm_sqr()))
            .expect("components share a grid")
    }
}

/// Pointwise PSD test used as the precondition of [`sqrt_field`].
pub(crate) fn ensure_psd(r: &SpinDensityField, tol: &Tolerances) -> Result<()> {
    let scale = r.scale();
    let (min_up, _) = r.rho_up().argmin();
    let (min_dn, _) = r.rho_dn().argmin();
    if min_up < -tol.neg * scale || min_dn < -tol.neg * scale {
        return Err(Error::Precondition(format!(
            "density is not pointwise non-negative (min ρ↑ = {min_up:e}, min ρ↓ = {min_dn:e})"
        )));
    }
    let (min_det, _) = det_raw(r).argmin();
    if min_det < -tol.neg * scale * scale {
        return Err(Error::Precondition(format!(
            "density is not pointwise positive semidefinite (min det = {min_det:e})"
        )));
    }
    Ok(())
}

/// The square root of a pointwise positive field.
pub fn sqrt_field(r: &SpinDensityField) -> Result<SqrtField> {
    sqrt_field_with(r, &Tolerances::default())
}

pub fn sqrt_field_with(r: &SpinDensityField, tol: &Tolerances) -> Result<SqrtField> {
    ensure_psd(r, tol)?;
    let n = r.grid().len();
    let mut up = Vec::with_capacity(n);
    let mut dn = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b, sigma) = r.entry(i);
        let (a, b) = (a.max(0.0), b.max(0.0));
        let m = a + b;
        if !(m > 0.0) {
            up.push(0.0);
            dn.push(0.0);
            s.push(Complex64::new(0.0, 0.0));
            continue;
        }
        // work with R/tr R so that nothing underflows in the tails
        let (a, b, sigma) = (a / m, b / m, sigma / m);
        let (ab, s2) = (a * b, sigma.norm_sqr());
        let det = ab - s2;
        let d = if det.abs() <= DET_CANCELLATION * (ab + s2) {
            0.0
        } else {
            det.max(0.0).sqrt()
        };
        let inv = (m / (1.0 + 2.0 * d)).sqrt();
        up.push((a + d) * inv);
        dn.push((b + d) * inv);
        s.push(sigma * inv);
    }
    let grid = *r.grid();
    Ok(SqrtField {
        r_up: ScalarField::new(grid, up)?,
        r_dn: ScalarField::new(grid, dn)?,
        s: ComplexField::new(grid, s)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenDensities {
    pub rho_plus: ScalarField,
    pub rho_minus: ScalarField,
}

/// Roots `(√ρ₊, √ρ₋)` of `x² − (r↑ + r↓)x + (r↑r↓ − |s|²)`.
pub fn sqrt_eigen_pair(r_up: f64, r_dn: f64, s: Complex64) -> (f64, f64) {
    let sum = r_up + r_dn;
    let disc = ((r_up - r_dn).powi(2) + 4.0 * s.norm_sqr()).sqrt();
    let plus = 0.5 * (sum + disc);
    let minus_direct = 0.5 * (sum - disc);
    // Product of the roots is r↑r↓ − |s|²; use it when the difference cancels.
    let minus = if plus > 0.0 && minus_direct < 0.5 * plus {
        ((r_up * r_dn - s.norm_sqr()) / plus).max(0.0)
    } else {
        minus_direct.max(0.0)
    };
    (plus, minus)
}

/// ρ± from the roots of the characteristic polynomial of √R.
pub fn eigen_densities(r: &SpinDensityField) -> Result<EigenDensities> {
    let root = sqrt_field(r)?;
    Ok(eigen_from_sqrt(&root))
}

pub fn eigen_from_sqrt(root: &SqrtField) -> EigenDensities {
    let n = root.r_up.grid().len();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let (p, m) = sqrt_eigen_pair(
            root.r_up.values()[i],
            root.r_dn.values()[i],
            root.s.values()[i],
        );
        plus.push(p * p);
        minus.push(m * m);
    }
    let grid = *root.r_up.grid();
    EigenDensities {
        rho_plus: ScalarField::new(grid, plus).expect("length"),
        rho_minus: ScalarField::new(grid, minus).expect("length"),
    }
}

/// Regularity of the eigenvalue densities: discrete ∫|∇√ρ±|².
#[derive(Clone, Debug, PartialEq)]
pub struct CorollaryReport {
    pub grad_sqrt_plus_sq: f64,
    pub grad_sqrt_minus_sq: f64,
    pub verdict: Verdict,
    pub basis: Basis,
}

pub fn corollary_check(r: &SpinDensityField, tol: &Tolerances) -> Result<CorollaryReport> {
    corollary_impl(r, None, tol)
}

pub fn corollary_check_refined(
    r: &SpinDensityField,
    refined: &SpinDensityField,
    tol: &Tolerances,
) -> Result<CorollaryReport> {
    corollary_impl(r, Some(refined), tol)
}

fn eigen_h1(r: &SpinDensityField) -> Result<(f64, f64)> {
    let e = eigen_densities(r)?;
    Ok((
        dirichlet_energy(&e.rho_plus.sqrt_clamped()),
        dirichlet_energy(&e.rho_minus.sqrt_clamped()),
    ))
}

fn corollary_impl(
    r: &SpinDensityField,
    refined: Option<&SpinDensityField>,
    tol: &Tolerances,
) -> Result<CorollaryReport> {
    tol.validate()?;
    let (p, m) = eigen_h1(r)?;
    let finite = p.is_finite() && m.is_finite();
    let mut verdict = if finite { Verdict::Pass } else { Verdict::Fail };
    let basis = match refined {
        None => Basis::SingleGrid,
        Some(f) => {
            let (pf, mf) = eigen_h1(f)?;
            let change = rel_change(p, pf).max(rel_change(m, mf));
            if !(change < tol.refine) {
                verdict = Verdict::Fail;
            }
            Basis::Refined { rel_change: change }
        }
    };
    Ok(CorollaryReport {
        grad_sqrt_plus_sq: p,
        grad_sqrt_minus_sq: m,
        verdict,
        basis,
    })
}
