//! Analytic test densities with known norms and known representability
//! status.
//!
//! Gaussian profiles are normalized analytically, `(πa²)^{-3/2} e^{-|x-c|²/a²}`,
//! so their quadrature error shows up directly in the trace integral.
//! Every Gaussian constructor rejects boxes that cut off more than
//! [`MAX_TAIL_MASS`] of the analytic mass.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::field::{integrate, ComplexField, Grid3, ScalarField};
use crate::spin::SpinDensityField;

/// Largest tolerated fraction of a Gaussian's mass outside the box.
pub const MAX_TAIL_MASS: f64 = 1e-8;

/// Default relative tolerance on ∫(|ψ↑|² + |ψ↓|²) = 1 for orbital input.
pub const ORBITAL_NORM_TOL: f64 = 1e-6;

/// Fraction of the mass of a Gaussian (width `a`, centre `c`) lying outside
/// the grid box.
pub fn tail_mass(grid: &Grid3, a: f64, center: [f64; 3]) -> f64 {
    let (lo, hi) = (grid.lo(), grid.hi());
    let inside: f64 = (0..3)
        .map(|k| 0.5 * (erf((hi[k] - center[k]) / a) - erf((lo[k] - center[k]) / a)))
        .product();
    (1.0 - inside).max(0.0)
}

fn ensure_box(grid: &Grid3, a: f64, center: [f64; 3]) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Gaussian width {a} must be positive"
        )));
    }
    let tail = tail_mass(grid, a, center);
    if tail > MAX_TAIL_MASS {
        return Err(Error::InvalidParameter(format!(
            "box too small for width {a}: {tail:.3e} of the mass lies outside"
        )));
    }
    Ok(())
}

/// `mass · (πa²)^{-3/2} e^{-|x-c|²/a²}` sampled on the grid.
pub fn gaussian(grid: Grid3, mass: f64, a: f64, center: [f64; 3]) -> ScalarField {
    let norm = mass * (PI * a * a).powf(-1.5);
    ScalarField::from_fn(grid, |p| {
        let r2: f64 = (0..3).map(|k| (p[k] - center[k]).powi(2)).sum();
        norm * (-r2 / (a * a)).exp()
    })
}

/// `ρ↑ = ρ↓ = (N/2) g_a`, `σ = 0`.
///
/// Analytically `∫|∇√ρ|² = 3N/(2a²)` for the total density.
pub fn gaussian_diagonal(n_electrons: u32, a: f64, grid: Grid3) -> Result<SpinDensityField> {
    ensure_box(&grid, a, [0.0; 3])?;
    let half = gaussian(grid, 0.5 * n_electrons as f64, a, [0.0; 3]);
    SpinDensityField::diagonal(half.clone(), half, n_electrons)
}

/// `R^{αβ} = N ψ^α conj(ψ^β)` for a normalized spinor ψ.
pub fn rank1_from_orbital(
    psi_up: &ComplexField,
    psi_dn: &ComplexField,
    n_electrons: u32,
) -> Result<SpinDensityField> {
    rank1_from_orbital_with_tol(psi_up, psi_dn, n_electrons, ORBITAL_NORM_TOL)
}

pub fn rank1_from_orbital_with_tol(
    psi_up: &ComplexField,
    psi_dn: &ComplexField,
    n_electrons: u32,
    tol: f64,
) -> Result<SpinDensityField> {
    psi_up.grid().ensure_same(psi_dn.grid())?;
    let norm = integrate(&psi_up.map(|v| v.norm_sqr())) + integrate(&psi_dn.map(|v| v.norm_sqr()));
    if (norm - 1.0).abs() > tol {
        return Err(Error::Precondition(format!(
            "orbital norm {norm} differs from 1 by more than {tol:e}"
        )));
    }
    let n = n_electrons as f64;
    let up = psi_up.map(|v| n * v.norm_sqr());
    let dn = psi_dn.map(|v| n * v.norm_sqr());
    let sigma = psi_up.zip_map(psi_dn, |a, b| a * b.conj() * n)?;
    SpinDensityField::new(up, dn, sigma, n_electrons)
}

/// Rank-one fixture from two concentric Gaussian spin components.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Params {
    pub n_electrons: u32,
    /// Fraction of the electrons carried by the up component.
    pub up_fraction: f64,
    pub width_up: f64,
    pub width_dn: f64,
    /// σ acquires the phase `e^{-i·twist·y}`.
    pub twist: f64,
}

impl Default for Rank1Params {
    fn default() -> Self {
        Rank1Params {
            n_electrons: 1,
            up_fraction: 0.5,
            width_up: 1.0,
            width_dn: 1.0,
            twist: 0.0,
        }
    }
}

impl Rank1Params {
    /// Largest pointwise ratio ρ↑/ρ↓ (attained at the centre when the down
    /// component is at least as wide).
    pub fn peak_ratio(&self) -> f64 {
        self.up_fraction / (1.0 - self.up_fraction) * (self.width_dn / self.width_up).powi(3)
    }
}

/// ψ = (√(f g_{a↑}), √((1-f) g_{a↓}) e^{i·twist·y}), scaled to N electrons.
pub fn rank1_gaussian(grid: Grid3, p: &Rank1Params) -> Result<SpinDensityField> {
    if !(0.0..=1.0).contains(&p.up_fraction) {
        return Err(Error::InvalidParameter(format!(
            "up fraction {} outside [0, 1]",
            p.up_fraction
        )));
    }
    ensure_box(&grid, p.width_up, [0.0; 3])?;
    ensure_box(&grid, p.width_dn, [0.0; 3])?;
    let gu = gaussian(grid, p.up_fraction, p.width_up, [0.0; 3]);
    let gd = gaussian(grid, 1.0 - p.up_fraction, p.width_dn, [0.0; 3]);
    let psi_up = gu.map(|v| Complex64::new(v.sqrt(), 0.0));
    let twist = p.twist;
    let psi_dn = ComplexField::from_fn(grid, |[_, y, _]| Complex64::from_polar(1.0, twist * y))
        .zip_map(&gd, |ph, v| ph * v.sqrt())?;
    let norm = integrate(&gu) + integrate(&gd);
    rank1_from_orbital_with_tol(
        &psi_up,
        &psi_dn,
        p.n_electrons,
        ORBITAL_NORM_TOL.max(2.0 * (norm - 1.0).abs()),
    )
}

/// Shorthand for [`rank1_gaussian`] with no twist.
pub fn rank1_two_gaussians(
    grid: Grid3,
    n_electrons: u32,
    width_up: f64,
    width_dn: f64,
    up_fraction: f64,
) -> Result<SpinDensityField> {
    rank1_gaussian(
        grid,
        &Rank1Params {
            n_electrons,
            up_fraction,
            width_up,
            width_dn,
            twist: 0.0,
        },
    )
}

/// Full-rank fixture: Gaussian ρ↑, ρ↓ and `σ = c·e^{iθ(x)}·√(ρ↑ρ↓)` with
/// `θ = phase_slope · x`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureParams {
    pub n_electrons: u32,
    pub up_fraction: f64,
    pub width_up: f64,
    pub width_dn: f64,
    pub center_up: [f64; 3],
    pub center_dn: [f64; 3],
    /// |c| < 1 keeps det = (1 - |c|²) ρ↑ρ↓ > 0.
    pub coherence: f64,
    pub phase_slope: f64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        MixtureParams {
            n_electrons: 2,
            up_fraction: 0.5,
            width_up: 1.0,
            width_dn: 1.0,
            center_up: [0.0; 3],
            center_dn: [0.0; 3],
            coherence: 0.5,
            phase_slope: 0.0,
        }
    }
}

pub fn full_rank_mixture(grid: Grid3, p: &MixtureParams) -> Result<SpinDensityField> {
    if !(p.coherence.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "coherence {} must satisfy |c| < 1",
            p.coherence
        )));
    }
    if !(0.0..=1.0).contains(&p.up_fraction) {
        return Err(Error::InvalidParameter(format!(
            "up fraction {} outside [0, 1]",
            p.up_fraction
        )));
    }
    ensure_box(&grid, p.width_up, p.center_up)?;
    ensure_box(&grid, p.width_dn, p.center_dn)?;
    let n = p.n_electrons as f64;
    let up = gaussian(grid, n * p.up_fraction, p.width_up, p.center_up);
    let dn = gaussian(grid, n * (1.0 - p.up_fraction), p.width_dn, p.center_dn);
    let (c, slope) = (p.coherence, p.phase_slope);
    let phase = ComplexField::from_fn(grid, |[x, _, _]| Complex64::from_polar(c, slope * x));
    let amp = up.zip_map(&dn, |a, b| (a * b).sqrt())?;
    let sigma = phase.zip_map(&amp, |ph, m| ph * m)?;
    SpinDensityField::new(up, dn, sigma, p.n_electrons)
}

/// Diagonal fixture whose ρ↑ has a negative lobe near (1.5, 0, 0); ρ↓ ≡ 0 so
/// the determinant stays exactly zero and only positivity is violated.
pub fn negative_lobe(grid: Grid3, n_electrons: u32) -> Result<SpinDensityField> {
    let eps = 0.05;
    let lobe_center = [1.5, 0.0, 0.0];
    ensure_box(&grid, 1.0, [0.0; 3])?;
    ensure_box(&grid, 0.5, lobe_center)?;
    let n = n_electrons as f64;
    let main = gaussian(grid, n * (1.0 + eps), 1.0, [0.0; 3]);
    let lobe = gaussian(grid, n * eps, 0.5, lobe_center);
    let up = main.zip_map(&lobe, |a, b| a - b)?;
    SpinDensityField::diagonal(up, ScalarField::zeros(grid), n_electrons)
}

/// `ρ↑ = ρ↓ = (N/2) g`, `σ = (1 + eps) (N/2) g`: |σ|² > ρ↑ρ↓ wherever g > 0.
pub fn overcorrelated(grid: Grid3, n_electrons: u32, eps: f64) -> Result<SpinDensityField> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    ensure_box(&grid, 1.0, [0.0; 3])?;
    let half = gaussian(grid, 0.5 * n_electrons as f64, 1.0, [0.0; 3]);
    let sigma = half.map(|v| Complex64::new((1.0 + eps) * v, 0.0));
    SpinDensityField::new(half.clone(), half, sigma, n_electrons)
}

/// Gaussian diagonal density carrying `mass` electrons but labelled with
/// `n_electrons`.
pub fn misnormalized(grid: Grid3, n_electrons: u32, mass: f64) -> Result<SpinDensityField> {
    ensure_box(&grid, 1.0, [0.0; 3])?;
    let half = gaussian(grid, 0.5 * mass, 1.0, [0.0; 3]);
    SpinDensityField::diagonal(half.clone(), half, n_electrons)
}

/// Spinless indicator of a ball, rescaled so its discrete integral is `N`.
/// Discontinuous, so `√ρ ∉ H¹`.
pub fn step_ball(grid: Grid3, n_electrons: u32, radius: f64) -> Result<ScalarField> {
    let ind = ScalarField::from_fn(grid, |[x, y, z]| {
        if x * x + y * y + z * z < radius * radius {
            1.0
        } else {
            0.0
        }
    });
    let mass = integrate(&ind);
    if mass <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ball of radius {radius} contains no grid nodes"
        )));
    }
    Ok(ind.scale(n_electrons as f64 / mass))
}
