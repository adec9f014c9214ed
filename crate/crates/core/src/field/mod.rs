//! Real and complex grid functions on a uniform 3D grid, with finite
//! differences, trapezoidal quadrature and the discrete Lᵖ / Sobolev proxies
//! used throughout the crate.
//!
//! Reductions use a fixed pairwise order over the flat array, so every
//! integral is bit-for-bit reproducible.

mod grid;
mod stencil;

pub use grid::{Axis, Grid3, MIN_NODES};
pub use stencil::Stencil;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can live on a grid and be differentiated.
pub trait GridValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn norm_sqr(self) -> f64;

    fn modulus(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl GridValue for f64 {
    fn norm_sqr(self) -> f64 {
        self * self
    }

    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl GridValue for Complex64 {
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }

    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// A function sampled on every node of a [`Grid3`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid3,
    values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: GridValue> Field<T> {
    pub fn new(grid: Grid3, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Field {
            grid,
            values: vec![T::default(); grid.len()],
        }
    }

    pub fn constant(grid: Grid3, value: T) -> Self {
        Field {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Sample `f(x, y, z)` at every node.
    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> T) -> Self {
        let values = grid.points().map(|(_, p)| f(p)).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> T {
        self.values[self.grid.index(ix, iy, iz)]
    }

    pub fn map<U: GridValue>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map<U: GridValue, V: GridValue>(
        &self,
        other: &Field<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Field<V>> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// Pointwise modulus |f|.
    pub fn modulus(&self) -> ScalarField {
        self.map(|v| v.modulus())
    }

    /// Largest pointwise modulus.
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }
}

impl ScalarField {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum value and its flat index.
    pub fn argmin(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold(
                (f64::INFINITY, 0),
                |(m, im), (i, &v)| {
                    if v < m {
                        (v, i)
                    } else {
                        (m, im)
                    }
                },
            )
    }

    pub fn to_complex(&self) -> ComplexField {
        self.map(|v| Complex64::new(v, 0.0))
    }

    /// Pointwise √max(f, 0).
    pub fn sqrt_clamped(&self) -> ScalarField {
        self.map(|v| v.max(0.0).sqrt())
    }
}

impl ComplexField {
    pub fn conj(&self) -> ComplexField {
        self.map(|v| v.conj())
    }

    pub fn re(&self) -> ScalarField {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> ScalarField {
        self.map(|v| v.im)
    }
}

/// Gradient with the default fourth-order stencil.
pub fn gradient<T: GridValue>(f: &Field<T>) -> [Field<T>; 3] {
    gradient_with(f, Stencil::default())
}

pub fn gradient_with<T: GridValue>(f: &Field<T>, stencil: Stencil) -> [Field<T>; 3] {
    Axis::ALL.map(|axis| partial(f, axis, stencil))
}

/// One partial derivative along `axis`.
pub fn partial<T: GridValue>(f: &Field<T>, axis: Axis, stencil: Stencil) -> Field<T> {
    let grid = *f.grid();
    let n = grid.dims()[axis.index()];
    let h = grid.spacing()[axis.index()];
    let stride = grid.stride(axis);
    let mut out = vec![T::default(); grid.len()];
    let mut line_in = vec![T::default(); n];
    let mut line_out = vec![T::default(); n];
    for start in line_starts(&grid, axis) {
        for (i, v) in line_in.iter_mut().enumerate() {
            *v = f.values[start + i * stride];
        }
        stencil.differentiate(&line_in, h, &mut line_out);
        for (i, v) in line_out.iter().enumerate() {
            out[start + i * stride] = *v;
        }
    }
    Field { grid, values: out }
}

/// Flat indices of the first node of every grid line parallel to `axis`.
pub(crate) fn line_starts(grid: &Grid3, axis: Axis) -> Vec<usize> {
    let [nx, ny, nz] = grid.dims();
    let mut starts = Vec::with_capacity(grid.len() / grid.dims()[axis.index()]);
    match axis {
        Axis::X => {
            for iy in 0..ny {
                for iz in 0..nz {
                    starts.push(grid.index(0, iy, iz));
                }
            }
        }
        Axis::Y => {
            for ix in 0..nx {
                for iz in 0..nz {
                    starts.push(grid.index(ix, 0, iz));
                }
            }
        }
        Axis::Z => {
            for ix in 0..nx {
                for iy in 0..ny {
                    starts.push(grid.index(ix, iy, 0));
                }
            }
        }
    }
    starts
}

/// Pointwise |∇f|² = Σₐ |∂ₐf|².
pub fn gradient_norm_sqr<T: GridValue>(f: &Field<T>) -> ScalarField {
    let [gx, gy, gz] = gradient(f);
    let values = (0..f.grid.len())
        .map(|i| gx.values[i].norm_sqr() + gy.values[i].norm_sqr() + gz.values[i].norm_sqr())
        .collect();
    Field {
        grid: f.grid,
        values,
    }
}

/// Fixed-order pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn quadrature_weights(grid: &Grid3) -> [Vec<f64>; 3] {
    Axis::ALL.map(|a| grid.axis_weights(a))
}

/// Trapezoidal quadrature of `g(value)` over the box.
fn integrate_by<T: GridValue>(f: &Field<T>, g: impl Fn(T) -> f64) -> f64 {
    let grid = f.grid;
    let [wx, wy, wz] = quadrature_weights(&grid);
    let weighted: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let [ix, iy, iz] = grid.unravel(idx);
            wx[ix] * wy[iy] * wz[iz] * g(f.values[idx])
        })
        .collect();
    pairwise_sum(&weighted)
}

/// Trapezoidal-rule integral over the box (field units × Bohr³).
pub fn integrate(f: &ScalarField) -> f64 {
    integrate_by(f, |v| v)
}

pub fn integrate_complex(f: &ComplexField) -> Complex64 {
    Complex64::new(integrate_by(f, |v| v.re), integrate_by(f, |v| v.im))
}

/// Discrete inner product ⟨a|b⟩ = ∫ conj(a)·b.
pub fn inner_product(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    let prod = a.zip_map(b, |x, y| x.conj() * y)?;
    Ok(integrate_complex(&prod))
}

/// (∫|f|ᵖ)^{1/p}.
pub fn lp_norm<T: GridValue>(f: &Field<T>, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Lp exponent {p} must be >= 1"
        )));
    }
    let s = integrate_by(f, |v| v.modulus().powf(p));
    Ok(s.max(0.0).powf(1.0 / p))
}

/// Components of the discrete W^{1,p} norm: ‖f‖_p and ‖ |∇f| ‖_p.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevNorm {
    pub value: f64,
    pub gradient: f64,
}

impl SobolevNorm {
    pub fn total(&self) -> f64 {
        self.value + self.gradient
    }
}

pub fn sobolev_norm<T: GridValue>(f: &Field<T>, p: f64) -> Result<SobolevNorm> {
    let value = lp_norm(f, p)?;
    let grad = gradient_norm_sqr(f).map(f64::sqrt);
    let gradient = lp_norm(&grad, p)?;
    Ok(SobolevNorm { value, gradient })
}

/// Discrete ∫|∇f|² (the H¹ seminorm squared).
pub fn dirichlet_energy<T: GridValue>(f: &Field<T>) -> f64 {
    integrate(&gradient_norm_sqr(f))
}

/// Result of a `∫|∇f|²/w` evaluation with a division floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedGradient {
    pub value: f64,
    /// Nodes where `w < floor`; their contribution is dropped.
    pub masked: usize,
    /// Masked nodes whose lower-bound integrand `|∇f|²/floor` would exceed the
    /// largest retained integrand value.
    pub significant_masked: usize,
    pub total: usize,
}

impl WeightedGradient {
    pub fn significant_fraction(&self) -> f64 {
        self.significant_masked as f64 / self.total as f64
    }
}

/// ∫|∇f|²/w over nodes with `w >= floor`.
pub fn weighted_gradient_l1<T: GridValue>(
    f: &Field<T>,
    w: &ScalarField,
    floor: f64,
) -> Result<WeightedGradient> {
    if !(floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "division floor must be positive, got {floor}"
        )));
    }
    f.grid.ensure_same(&w.grid)?;
    let g2 = gradient_norm_sqr(f);
    let mut masked = 0;
    let mut scale = 0.0f64;
    let integrand: Vec<f64> = g2
        .values
        .iter()
        .zip(&w.values)
        .map(|(&g, &wv)| {
            if wv >= floor {
                let v = g / wv;
                scale = scale.max(v);
                v
            } else {
                masked += 1;
                0.0
            }
        })
        .collect();
    let significant_masked = g2
        .values
        .iter()
        .zip(&w.values)
        .filter(|&(&g, &wv)| wv < floor && g > 0.0 && g / floor > scale)
        .count();
    let value = integrate(&Field {
        grid: f.grid,
        values: integrand,
    });
    Ok(WeightedGradient {
        value,
        masked,
        significant_masked,
        total: f.grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize, l: f64) -> Grid3 {
        Grid3::cubic(n, -l, l).unwrap()
    }

    fn gaussian(a: f64) -> impl Fn([f64; 3]) -> f64 {
        move |[x, y, z]| {
            (std::f64::consts::PI * a * a).powf(-1.5) * (-(x * x + y * y + z * z) / (a * a)).exp()
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let f = ScalarField::constant(cube(8, 1.0), 3.5);
        for g in gradient(&f) {
            assert!(g.values().iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn gradient_exact_on_affine() {
        let grid = Grid3::new([8, 9, 10], [-1.0, -2.0, 0.5], [1.0, 3.0, 2.0]).unwrap();
        let f = ScalarField::from_fn(grid, |[x, y, z]| 1.5 - 2.0 * x + 0.25 * y + 4.0 * z);
        for stencil in [Stencil::Second, Stencil::Fourth] {
            let [gx, gy, gz] = gradient_with(&f, stencil);
            for i in 0..grid.len() {
                assert!((gx.values()[i] + 2.0).abs() <= 1e-12);
                assert!((gy.values()[i] - 0.25).abs() <= 1e-12);
                assert!((gz.values()[i] - 4.0).abs() <= 1e-12);
            }
        }
        // x on [-1, 1]^3 with 8 nodes
        let f = ScalarField::from_fn(cube(8, 1.0), |[x, _, _]| x);
        let [gx, _, _] = gradient(&f);
        assert!(gx.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn gradient_of_complex_field_is_componentwise() {
        let grid = cube(10, 1.0);
        let f = ComplexField::from_fn(grid, |[x, y, _]| Complex64::new(x * x, -y));
        let [gx, gy, _] = gradient(&f);
        let idx = grid.index(4, 5, 5);
        let [x, _, _] = grid.point(4, 5, 5);
        assert!((gx.values()[idx].re - 2.0 * x).abs() < 1e-12);
        assert!((gy.values()[idx].im + 1.0).abs() < 1e-12);
    }

    fn max_gaussian_gradient_error(n: usize, stencil: Stencil) -> f64 {
        let grid = cube(n, 4.0);
        let f = ScalarField::from_fn(grid, |[x, y, z]| (-(x * x + y * y + z * z)).exp());
        let [gx, _, _] = gradient_with(&f, stencil);
        grid.points()
            .map(|(i, [x, y, z])| {
                let exact = -2.0 * x * (-(x * x + y * y + z * z)).exp();
                (gx.values()[i] - exact).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_gradient_converges_at_least_second_order() {
        for stencil in [Stencil::Second, Stencil::Fourth] {
            let coarse = max_gaussian_gradient_error(32, stencil);
            let fine = max_gaussian_gradient_error(64, stencil);
            // h halves (to within (n-1) rounding); O(h^2) means a ratio near 4.
            assert!(coarse / fine > 3.5, "{stencil:?}: {coarse} -> {fine}");
        }
        let c4 = max_gaussian_gradient_error(32, Stencil::Fourth);
        let f4 = max_gaussian_gradient_error(64, Stencil::Fourth);
        assert!(c4 / f4 > 12.0, "fourth order ratio {}", c4 / f4);
    }

    #[test]
    fn integrate_zero_and_gaussian() {
        let grid = cube(64, 8.0);
        assert_eq!(integrate(&ScalarField::zeros(grid)), 0.0);
        let g = ScalarField::from_fn(grid, gaussian(1.0));
        assert!((integrate(&g) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn integrate_is_linear() {
        let grid = cube(20, 3.0);
        let bump = ScalarField::from_fn(grid, |[x, y, z]| (-(x * x + 2.0 * y * y + z * z)).exp());
        let other = ScalarField::from_fn(grid, |[x, _, z]| (x - z).cos());
        let base = integrate(&bump);
        assert!((integrate(&bump.scale(3.25)) - 3.25 * base).abs() <= 1e-12 * base.abs());
        let combo = bump.zip_map(&other, |a, b| 2.0 * a - 0.5 * b).unwrap();
        let expect = 2.0 * base - 0.5 * integrate(&other);
        assert!((integrate(&combo) - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn lp_norms_of_gaussian() {
        let grid = cube(64, 8.0);
        let rho = ScalarField::from_fn(grid, gaussian(1.0)).scale(2.0);
        assert_eq!(lp_norm(&ScalarField::zeros(grid), 1.5).unwrap(), 0.0);
        assert!((lp_norm(&rho, 1.0).unwrap() - 2.0).abs() < 1e-10);
        let root = rho.sqrt_clamped();
        assert!((lp_norm(&root, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-10);
        assert!(lp_norm(&rho, 0.5).is_err());
    }

    #[test]
    fn weighted_gradient_edge_cases() {
        let grid = cube(16, 4.0);
        let w = ScalarField::from_fn(grid, gaussian(1.0));
        let c = ScalarField::constant(grid, 2.0);
        let r = weighted_gradient_l1(&c, &w, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);

        let f = ScalarField::from_fn(grid, |[x, _, _]| x);
        let r = weighted_gradient_l1(&f, &ScalarField::zeros(grid), 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.masked, grid.len());
        assert_eq!(r.significant_masked, grid.len());

        assert!(weighted_gradient_l1(&f, &w, 0.0).is_err());
        assert!(weighted_gradient_l1(&f, &w, -1.0).is_err());
    }

    #[test]
    fn weighted_gradient_floor_sweep_is_stable() {
        let grid = cube(48, 6.0);
        let rho = ScalarField::from_fn(grid, gaussian(1.0));
        let f = rho.zip_map(&rho, |r, s| r.sqrt() * s).unwrap();
        let max = rho.max();
        let vals: Vec<f64> = [1e-10, 1e-12, 1e-14]
            .iter()
            .map(|&fl| weighted_gradient_l1(&f, &rho, fl * max).unwrap().value)
            .collect();
        assert!(vals.iter().all(|v| v.is_finite() && *v > 0.0));
        for v in &vals[1..] {
            assert!((v - vals[0]).abs() / vals[0] < 0.01, "{vals:?}");
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
