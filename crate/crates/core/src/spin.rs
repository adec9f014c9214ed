//! The 2×2 Hermitian spin-density field and its pointwise algebra.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{integrate, ComplexField, Grid3, ScalarField};

/// Pointwise determinant values at or above `-DET_CLAMP * max(ρ)²` are
/// treated as round-off and clamped to zero.
pub const DET_CLAMP: f64 = 1e-12;

/// `R = [[ρ↑, σ], [σ*, ρ↓]]` on a grid, for `N` electrons.
///
/// Only σ is stored; the lower-left entry is its conjugate by construction.
/// Positivity and normalization are not enforced here; deciding them is the
/// job of [`crate::check`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpinDensityField {
    rho_up: ScalarField,
    rho_dn: ScalarField,
    sigma: ComplexField,
    n_electrons: u32,
}

impl SpinDensityField {
    pub fn new(
        rho_up: ScalarField,
        rho_dn: ScalarField,
        sigma: ComplexField,
        n_electrons: u32,
    ) -> Result<Self> {
        rho_up.grid().ensure_same(rho_dn.grid())?;
        rho_up.grid().ensure_same(sigma.grid())?;
        if n_electrons == 0 {
            return Err(Error::InvalidParameter(
                "electron count must be positive".into(),
            ));
        }
        Ok(SpinDensityField {
            rho_up,
            rho_dn,
            sigma,
            n_electrons,
        })
    }

    /// `diag(ρ↑, ρ↓)`.
    pub fn diagonal(rho_up: ScalarField, rho_dn: ScalarField, n_electrons: u32) -> Result<Self> {
        let sigma = ComplexField::zeros(*rho_up.grid());
        SpinDensityField::new(rho_up, rho_dn, sigma, n_electrons)
    }

    pub fn zeros(grid: Grid3, n_electrons: u32) -> Result<Self> {
        SpinDensityField::new(
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ComplexField::zeros(grid),
            n_electrons,
        )
    }

    pub fn grid(&self) -> &Grid3 {
        self.rho_up.grid()
    }

    pub fn rho_up(&self) -> &ScalarField {
        &self.rho_up
    }

    pub fn rho_dn(&self) -> &ScalarField {
        &self.rho_dn
    }

    pub fn sigma(&self) -> &ComplexField {
        &self.sigma
    }

    pub fn n_electrons(&self) -> u32 {
        self.n_electrons
    }

    pub fn with_electrons(mut self, n_electrons: u32) -> Result<Self> {
        if n_electrons == 0 {
            return Err(Error::InvalidParameter(
                "electron count must be positive".into(),
            ));
        }
        self.n_electrons = n_electrons;
        Ok(self)
    }

    /// Total density ρ = ρ↑ + ρ↓.
    pub fn total(&self) -> ScalarField {
        self.rho_up
            .zip_map(&self.rho_dn, |a, b| a + b)
            .expect("components share a grid")
    }

    /// max(ρ), floored at zero; the scale for all relative tolerances.
    pub fn scale(&self) -> f64 {
        self.total().max().max(0.0)
    }

    /// Matrix entries at one flat index: (ρ↑, ρ↓, σ).
    pub fn entry(&self, idx: usize) -> (f64, f64, Complex64) {
        (
            self.rho_up.values()[idx],
            self.rho_dn.values()[idx],
            self.sigma.values()[idx],
        )
    }

    /// Multiply every entry by `c`.
    pub fn scale_by(&self, c: f64) -> SpinDensityField {
        self.scale_pointwise(|_| c)
    }

    /// Multiply `R(x)` by a real scalar field value at each node.
    pub(crate) fn scale_pointwise(&self, c: impl Fn(usize) -> f64) -> SpinDensityField {
        let n = self.grid().len();
        let up: Vec<f64> = (0..n).map(|i| c(i) * self.rho_up.values()[i]).collect();
        let dn: Vec<f64> = (0..n).map(|i| c(i) * self.rho_dn.values()[i]).collect();
        let sg: Vec<Complex64> = (0..n).map(|i| self.sigma.values()[i] * c(i)).collect();
        let grid = *self.grid();
        SpinDensityField {
            rho_up: ScalarField::new(grid, up).expect("length"),
            rho_dn: ScalarField::new(grid, dn).expect("length"),
            sigma: ComplexField::new(grid, sg).expect("length"),
            n_electrons: self.n_electrons,
        }
    }

    /// Largest pointwise entry difference, `max |R - other|` over all entries.
    pub fn max_abs_diff(&self, other: &SpinDensityField) -> Result<f64> {
        self.grid().ensure_same(other.grid())?;
        let mut m = 0.0f64;
        for i in 0..self.grid().len() {
            let (a1, b1, s1) = self.entry(i);
            let (a2, b2, s2) = other.entry(i);
            m = m
                .max((a1 - a2).abs())
                .max((b1 - b2).abs())
                .max((s1 - s2).norm());
        }
        Ok(m)
    }

    /// Entrywise L¹ distance `∫ |Δρ↑| + |Δρ↓| + 2|Δσ|`.
    pub fn l1_distance(&self, other: &SpinDensityField) -> Result<f64> {
        self.grid().ensure_same(other.grid())?;
        let n = self.grid().len();
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let (a1, b1, s1) = self.entry(i);
                let (a2, b2, s2) = other.entry(i);
                (a1 - a2).abs() + (b1 - b2).abs() + 2.0 * (s1 - s2).norm()
            })
            .collect();
        Ok(integrate(&ScalarField::new(*self.grid(), vals)?))
    }

    /// Entrywise L¹ norm `∫ |ρ↑| + |ρ↓| + 2|σ|`.
    pub fn l1_norm(&self) -> f64 {
        let n = self.grid().len();
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b, s) = self.entry(i);
                a.abs() + b.abs() + 2.0 * s.norm()
            })
            .collect();
        integrate(&ScalarField::new(*self.grid(), vals).expect("length"))
    }
}

/// Raw pointwise ρ↑ρ↓ − |σ|², without clamping.
pub fn det_raw(r: &SpinDensityField) -> ScalarField {
    let n = r.grid().len();
    let vals = (0..n)
        .map(|i| {
            let (a, b, s) = r.entry(i);
            a * b - s.norm_sqr()
        })
        .collect();
    ScalarField::new(*r.grid(), vals).expect("length")
}

/// Relative size of the cancellation error in ρ↑ρ↓ − |σ|².
pub const DET_CANCELLATION: f64 = 16.0 * f64::EPSILON;

/// Pointwise determinant with round-off clamp.
///
/// Values within the cancellation error `DET_CANCELLATION·(ρ↑ρ↓ + |σ|²)` of
/// zero, and negative values no larger than `DET_CLAMP·max(ρ)²` in magnitude,
/// become exactly zero. Larger negatives are kept.
pub fn det_field(r: &SpinDensityField) -> ScalarField {
    let scale = r.scale();
    let clamp = DET_CLAMP * scale * scale;
    let n = r.grid().len();
    let vals = (0..n)
        .map(|i| {
            let (a, b, s) = r.entry(i);
            let (ab, s2) = (a * b, s.norm_sqr());
            let d = ab - s2;
            if d.abs() <= DET_CANCELLATION * (ab.abs() + s2) || (d < 0.0 && -d <= clamp) {
                0.0
            } else {
                d
            }
        })
        .collect();
    ScalarField::new(*r.grid(), vals).expect("length")
}

/// `∫ tr R = ∫ (ρ↑ + ρ↓)`.
pub fn trace_integral(r: &SpinDensityField) -> f64 {
    integrate(&r.total())
}

/// Exchange spin labels: ρ↑ ↔ ρ↓, σ → σ*.
pub fn spin_swap(r: &SpinDensityField) -> SpinDensityField {
    SpinDensityField {
        rho_up: r.rho_dn.clone(),
        rho_dn: r.rho_up.clone(),
        sigma: r.sigma.conj(),
        n_electrons: r.n_electrons,
    }
}

/// Pointwise convex combination `Σ wᵢ Rᵢ`.
///
/// The electron count is taken from the first field; it is preserved when
/// all inputs agree on it.
pub fn convex_combine(pairs: &[(f64, &SpinDensityField)]) -> Result<SpinDensityField> {
    let (_, first) = pairs
        .first()
        .ok_or_else(|| Error::InvalidParameter("convex combination of nothing".into()))?;
    let mut total = 0.0;
    for &(w, r) in pairs {
        if !(w >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative weight {w}")));
        }
        first.grid().ensure_same(r.grid())?;
        total += w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    if let [(w, r)] = pairs {
        if *w == 1.0 {
            return Ok((*r).clone());
        }
    }
    let grid = *first.grid();
    let n = grid.len();
    let mut up = vec![0.0; n];
    let mut dn = vec![0.0; n];
    let mut sg = vec![Complex64::new(0.0, 0.0); n];
    for &(w, r) in pairs {
        for i in 0..n {
            let (a, b, s) = r.entry(i);
            up[i] += w * a;
            dn[i] += w * b;
            sg[i] += s * w;
        }
    }
    SpinDensityField::new(
        ScalarField::new(grid, up)?,
        ScalarField::new(grid, dn)?,
        ComplexField::new(grid, sg)?,
        first.n_electrons,
    )
}
