//! Slater determinants for null-determinant spin densities.
//!
//! For `R` with `ρ↑ρ↓ = |σ|²` and `ρ↑ ≤ 2ρ↓`, the base spinor
//! `φ = (σ/√ρ↓, √ρ↓)` satisfies `φ^α conj(φ^β) = R^{αβ}`. The orbitals
//!
//! ```text
//! Φ_k(x) = N^{-1/2} φ(x) exp(2πi k f(x₁)),   k = 1..N
//! ```
//!
//! with `f` the cumulative marginal of ρ along the phase axis are orthonormal,
//! and their Slater determinant has spin density `R`: the phases cancel in
//! `Σ_k Φ_k^α conj(Φ_k^β)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::check::Tolerances;
use crate::error::{Error, Result};
use crate::field::{
    dirichlet_energy, gradient_norm_sqr, inner_product, integrate, pairwise_sum,
    weighted_gradient_l1, Axis, ComplexField, Grid3, ScalarField,
};
use crate::spin::{det_raw, SpinDensityField};

/// How the cumulative marginal `f` is integrated along the phase axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PhaseQuadrature {
    /// Fourier antiderivative of the periodically extended marginal.
    /// Spectrally accurate for smooth marginals that decay at both ends.
    #[default]
    Spectral,
    /// Cumulative trapezoid rule. Second order, but exact zero and monotone
    /// for any non-negative marginal.
    Trapezoid,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PhaseAxis {
    Fixed(Axis),
    /// Axis along which the density marginal has the largest spread.
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarrimanOptions {
    pub axis: PhaseAxis,
    pub quadrature: PhaseQuadrature,
    pub tol: Tolerances,
    /// Below this ρ↓ the base spinor falls back to φ↑ = √ρ↑.
    pub spinor_floor: f64,
    /// Largest fraction of nodes allowed to exceed the determinant tolerance.
    pub det_violation_fraction: f64,
}

impl Default for HarrimanOptions {
    fn default() -> Self {
        HarrimanOptions {
            axis: PhaseAxis::Auto,
            quadrature: PhaseQuadrature::Spectral,
            tol: Tolerances::default(),
            spinor_floor: f64::MIN_POSITIVE,
            det_violation_fraction: 1e-3,
        }
    }
}

/// Marginal `f'(x₁) = ∫ρ dx₂dx₃` and its cumulative `f` along the phase axis.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFunction {
    pub axis: Axis,
    pub coords: Vec<f64>,
    /// Marginal density per slab (electrons/Bohr).
    pub f_prime: Vec<f64>,
    /// Cumulative, `f[0] = 0`, `f[last] = N`.
    pub f: Vec<f64>,
    /// `|∫ρ/N − 1|` with ∫ρ by the trapezoid rule.
    pub renormalization: f64,
    /// `|f_end − ∫ρ|/N` before rescaling `f` to end at N. Large values mean
    /// the marginal is under-resolved for the spectral antiderivative.
    pub quadrature_gap: f64,
}

impl PhaseFunction {
    /// ∫|f'|³ dx₁ by the trapezoid rule.
    pub fn cubic_moment(&self) -> f64 {
        let h = self.coords[1] - self.coords[0];
        let n = self.f_prime.len();
        let terms: Vec<f64> = self
            .f_prime
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == 0 || i + 1 == n { 0.5 * h } else { h };
                w * v.abs().powi(3)
            })
            .collect();
        pairwise_sum(&terms)
    }
}

/// Slab integrals of ρ across the planes orthogonal to `axis`.
pub fn marginal(rho: &ScalarField, axis: Axis) -> Vec<f64> {
    let grid = rho.grid();
    let n = grid.dims()[axis.index()];
    let others: Vec<Axis> = Axis::ALL.into_iter().filter(|&a| a != axis).collect();
    let (wa, wb) = (grid.axis_weights(others[0]), grid.axis_weights(others[1]));
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms = Vec::with_capacity(wa.len() * wb.len());
        for (ja, &w1) in wa.iter().enumerate() {
            for (jb, &w2) in wb.iter().enumerate() {
                let mut p = [0usize; 3];
                p[axis.index()] = i;
                p[others[0].index()] = ja;
                p[others[1].index()] = jb;
                terms.push(w1 * w2 * rho.values()[grid.index(p[0], p[1], p[2])]);
            }
        }
        out.push(pairwise_sum(&terms));
    }
    out
}

/// Antiderivative of uniformly sampled `g` (spacing `h`) vanishing at the
/// first node.
pub fn cumulative(g: &[f64], h: f64, quadrature: PhaseQuadrature) -> Vec<f64> {
    match quadrature {
        PhaseQuadrature::Trapezoid => {
            let mut f = Vec::with_capacity(g.len());
            let mut acc = 0.0;
            f.push(0.0);
            for w in g.windows(2) {
                acc += 0.5 * h * (w[0] + w[1]);
                f.push(acc);
            }
            f
        }
        PhaseQuadrature::Spectral => spectral_cumulative(g, h),
    }
}

fn spectral_cumulative(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let mean = g.iter().sum::<f64>() / n as f64;
    let period = n as f64 * h;
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v - mean, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (m, c) in buf.iter_mut().enumerate() {
        if m == 0 || (n.is_multiple_of(2) && m == n / 2) {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let freq = if m <= n / 2 {
            m as f64
        } else {
            m as f64 - n as f64
        };
        let k = 2.0 * PI * freq / period;
        *c /= Complex64::new(0.0, k);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let periodic: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();
    (0..n)
        .map(|j| mean * j as f64 * h + periodic[j] - periodic[0])
        .collect()
}

/// Axis with the widest marginal of ρ (largest variance).
pub fn widest_axis(rho: &ScalarField) -> Axis {
    let grid = rho.grid();
    let mut best = (Axis::X, f64::NEG_INFINITY);
    for axis in Axis::ALL {
        let m = marginal(rho, axis);
        let xs = grid.axis_coords(axis);
        let w = grid.axis_weights(axis);
        let mass: f64 = m.iter().zip(&w).map(|(a, b)| a * b).sum();
        if mass <= 0.0 {
            continue;
        }
        let mean: f64 = m
            .iter()
            .zip(&w)
            .zip(&xs)
            .map(|((a, b), x)| a * b * x)
            .sum::<f64>()
            / mass;
        let var: f64 = m
            .iter()
            .zip(&w)
            .zip(&xs)
            .map(|((a, b), x)| a * b * (x - mean).powi(2))
            .sum::<f64>()
            / mass;
        // strict comparison keeps the first axis on ties
        if var > best.1 * (1.0 + 1e-12) {
            best = (axis, var);
        }
    }
    best.0
}

/// Build `f'` and `f` for a density carrying `n_electrons`.
pub fn build_phase(
    rho: &ScalarField,
    n_electrons: u32,
    axis: Axis,
    quadrature: PhaseQuadrature,
    tol: &Tolerances,
) -> Result<PhaseFunction> {
    tol.validate()?;
    let n = n_electrons as f64;
    if rho.argmin().0 < -tol.neg * rho.max().max(0.0) {
        return Err(Error::Precondition(
            "phase density must be non-negative".into(),
        ));
    }
    let grid = rho.grid();
    let h = grid.spacing()[axis.index()];
    let f_prime: Vec<f64> = marginal(rho, axis)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    let mut f = cumulative(&f_prime, h, quadrature);

    // exact zero before the support and N after it
    let first = f_prime.iter().position(|&v| v > 0.0);
    let last = f_prime.iter().rposition(|&v| v > 0.0);
    let (first, last) = match (first, last) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Precondition(
                "phase density vanishes identically".into(),
            ))
        }
    };
    let mass = cumulative(&f_prime, h, PhaseQuadrature::Trapezoid)[f.len() - 1];
    let renormalization = (mass / n - 1.0).abs();
    if !(renormalization <= 10.0 * tol.norm) {
        return Err(Error::Precondition(format!(
            "phase density carries {mass} electrons, expected {n} (relative {renormalization:.3e})"
        )));
    }
    let end = f[f.len() - 1];
    let quadrature_gap = (end - mass).abs() / n;
    let factor = n / end;
    let mut running = 0.0f64;
    for (i, v) in f.iter_mut().enumerate() {
        let x = if i <= first {
            0.0
        } else if i > last {
            n
        } else {
            (*v * factor).clamp(0.0, n)
        };
        running = running.max(x);
        *v = running;
    }
    let len = f.len();
    f[len - 1] = n;

    Ok(PhaseFunction {
        axis,
        coords: grid.axis_coords(axis),
        f_prime,
        f,
        renormalization,
        quadrature_gap,
    })
}

/// A two-component orbital.
#[derive(Clone, Debug, PartialEq)]
pub struct Spinor {
    pub up: ComplexField,
    pub dn: ComplexField,
}

impl Spinor {
    pub fn grid(&self) -> &Grid3 {
        self.up.grid()
    }

    /// ⟨self|other⟩ summed over both spin components.
    pub fn inner(&self, other: &Spinor) -> Result<Complex64> {
        Ok(inner_product(&self.up, &other.up)? + inner_product(&self.dn, &other.dn)?)
    }

    /// ∫|∇φ↑|² and ∫|∇φ↓|².
    pub fn kinetic_parts(&self) -> (f64, f64) {
        (dirichlet_energy(&self.up), dirichlet_energy(&self.dn))
    }

    /// Exchange spin components: (φ↑, φ↓) → (φ↓, φ↑).
    pub fn swapped(&self) -> Spinor {
        Spinor {
            up: self.dn.clone(),
            dn: self.up.clone(),
        }
    }
}

/// Base spinor `(φ↑, φ↓)` with `φ↑ conj(φ↓) = σ`, `|φ^α|² = ρ^α`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseSpinor {
    pub spinor: Spinor,
    /// Nodes with ρ↓ below the floor, where φ↑ = √ρ↑ is used.
    pub fallback_points: usize,
}

pub fn base_spinor(r: &SpinDensityField, opts: &HarrimanOptions) -> Result<BaseSpinor> {
    let scale = r.scale();
    let tol = &opts.tol;
    let det_tol = tol.neg * scale * scale;
    let over = det_raw(r)
        .values()
        .iter()
        .filter(|d| d.abs() > det_tol)
        .count();
    if over as f64 > opts.det_violation_fraction * r.grid().len() as f64 {
        return Err(Error::Precondition(format!(
            "determinant is not null on {over} of {} nodes",
            r.grid().len()
        )));
    }
    let ratio_tol = tol.neg * scale;
    let n = r.grid().len();
    let mut worst = 0.0f64;
    let mut worst_idx = 0;
    for i in 0..n {
        let (a, b, _) = r.entry(i);
        let excess = a - 2.0 * b;
        if excess > worst {
            worst = excess;
            worst_idx = i;
        }
    }
    if worst > ratio_tol {
        let [ix, iy, iz] = r.grid().unravel(worst_idx);
        return Err(Error::Precondition(format!(
            "ρ↑ exceeds 2ρ↓ by {worst:.3e} at node ({ix}, {iy}, {iz})"
        )));
    }

    let mut up = Vec::with_capacity(n);
    let mut dn = Vec::with_capacity(n);
    let mut fallback = 0;
    for i in 0..n {
        let (a, b, s) = r.entry(i);
        let root_dn = b.max(0.0).sqrt();
        if b >= opts.spinor_floor {
            up.push(s / root_dn);
        } else {
            fallback += 1;
            up.push(Complex64::new(a.max(0.0).sqrt(), 0.0));
        }
        dn.push(Complex64::new(root_dn, 0.0));
    }
    let grid = *r.grid();
    Ok(BaseSpinor {
        spinor: Spinor {
            up: ComplexField::new(grid, up)?,
            dn: ComplexField::new(grid, dn)?,
        },
        fallback_points: fallback,
    })
}

/// The N orbitals of one Slater determinant and how they were built.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalSet {
    pub n_electrons: u32,
    pub phase: PhaseFunction,
    pub orbitals: Vec<Spinor>,
    pub fallback_points: usize,
}

pub fn build_orbitals(r: &SpinDensityField, opts: &HarrimanOptions) -> Result<OrbitalSet> {
    let base = base_spinor(r, opts)?;
    let rho = r.total();
    let axis = match opts.axis {
        PhaseAxis::Fixed(a) => a,
        PhaseAxis::Auto => widest_axis(&rho),
    };
    let n = r.n_electrons();
    let phase = build_phase(&rho, n, axis, opts.quadrature, &opts.tol)?;
    let grid = *r.grid();
    let norm = 1.0 / (n as f64).sqrt();
    let stride_axis = axis.index();
    let orbitals = (1..=n)
        .map(|k| {
            let factors: Vec<Complex64> = phase
                .f
                .iter()
                .map(|&fv| Complex64::from_polar(norm, 2.0 * PI * k as f64 * fv))
                .collect();
            let apply = |field: &ComplexField| {
                let vals = field
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(idx, &v)| v * factors[grid.unravel(idx)[stride_axis]])
                    .collect();
                ComplexField::new(grid, vals).expect("length")
            };
            Spinor {
                up: apply(&base.spinor.up),
                dn: apply(&base.spinor.dn),
            }
        })
        .collect();
    Ok(OrbitalSet {
        n_electrons: n,
        phase,
        orbitals,
        fallback_points: base.fallback_points,
    })
}

/// Spin density `Σ_k Φ_k^α conj(Φ_k^β)` of a set of orbitals.
pub fn slater_density(orbitals: &[Spinor], n_electrons: u32) -> Result<SpinDensityField> {
    let first = orbitals
        .first()
        .ok_or_else(|| Error::InvalidParameter("no orbitals".into()))?;
    let grid = *first.grid();
    let len = grid.len();
    let mut up = vec![0.0; len];
    let mut dn = vec![0.0; len];
    let mut sg = vec![Complex64::new(0.0, 0.0); len];
    for o in orbitals {
        grid.ensure_same(o.grid())?;
        for i in 0..len {
            let (a, b) = (o.up.values()[i], o.dn.values()[i]);
            up[i] += a.norm_sqr();
            dn[i] += b.norm_sqr();
            sg[i] += a * b.conj();
        }
    }
    SpinDensityField::new(
        ScalarField::new(grid, up)?,
        ScalarField::new(grid, dn)?,
        ComplexField::new(grid, sg)?,
        n_electrons,
    )
}

/// Overlap matrix `G_kl = ⟨Φ_k|Φ_l⟩`.
pub fn gram(orbitals: &[Spinor]) -> Result<Vec<Vec<Complex64>>> {
    orbitals
        .iter()
        .map(|a| orbitals.iter().map(|b| a.inner(b)).collect())
        .collect()
}

/// `max |G − I|` over all entries.
pub fn gram_deviation(orbitals: &[Spinor]) -> Result<f64> {
    let g = gram(orbitals)?;
    let mut m = 0.0f64;
    for (k, row) in g.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            let target = if k == l { 1.0 } else { 0.0 };
            m = m.max((v - target).norm());
        }
    }
    Ok(m)
}

/// Integrated kinetic bound for orbital `k` of an [`OrbitalSet`].
///
/// Up component: `N|∇Φ_k↑|² ≤ 6|∇σ|²/ρ + 4|∇√ρ↓|² + 4π²k²ρ|f'|²`.
/// Down component: `N|∇Φ_k↓|² ≤ 2|∇√ρ↓|² + 8π²k²ρ↓|f'|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticBound {
    pub k: u32,
    pub lhs_up: f64,
    pub rhs_up: f64,
    pub lhs_dn: f64,
    pub rhs_dn: f64,
}

impl KineticBound {
    pub fn holds(&self) -> bool {
        self.lhs_up <= self.rhs_up && self.lhs_dn <= self.rhs_dn
    }

    /// ∫|∇Φ_k|².
    pub fn kinetic(&self, n_electrons: u32) -> f64 {
        (self.lhs_up + self.lhs_dn) / n_electrons as f64
    }
}

pub fn kinetic_bounds(
    r: &SpinDensityField,
    set: &OrbitalSet,
    tol: &Tolerances,
) -> Result<Vec<KineticBound>> {
    let grid = *r.grid();
    let n = set.n_electrons as f64;
    let rho = r.total();
    let floor = (tol.floor * r.scale()).max(f64::MIN_POSITIVE);
    let sigma_term = weighted_gradient_l1(r.sigma(), &rho, floor)?.value;
    let h1_dn = dirichlet_energy(&r.rho_dn().sqrt_clamped());
    let axis = set.phase.axis.index();
    let fp2 = |field: &ScalarField| {
        let vals = field
            .values()
            .iter()
            .enumerate()
            .map(|(idx, &v)| v * set.phase.f_prime[grid.unravel(idx)[axis]].powi(2))
            .collect();
        integrate(&ScalarField::new(grid, vals).expect("length"))
    };
    let rho_fp2 = fp2(&rho);
    let rho_dn_fp2 = fp2(r.rho_dn());
    set.orbitals
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let k = (i + 1) as u32;
            let k2 = (k as f64).powi(2);
            Ok(KineticBound {
                k,
                lhs_up: n * integrate(&gradient_norm_sqr(&o.up)),
                rhs_up: 6.0 * sigma_term + 4.0 * h1_dn + 4.0 * PI * PI * k2 * rho_fp2,
                lhs_dn: n * integrate(&gradient_norm_sqr(&o.dn)),
                rhs_dn: 2.0 * h1_dn + 8.0 * PI * PI * k2 * rho_dn_fp2,
            })
        })
        .collect()
}
