//! The representability conditions on a spin density, evaluated on the grid.
//!
//! Seven conditions are decided, in order:
//!
//! | id | condition |
//! |----|-----------|
//! | a  | ρ↑ ≥ 0 and ρ↓ ≥ 0 pointwise |
//! | b  | ρ↑ρ↓ − \|σ\|² ≥ 0 pointwise |
//! | c  | ∫ρ↑ + ∫ρ↓ = N |
//! | d  | √ρ↑, √ρ↓ ∈ H¹ (via ∫\|∇√ρ^α\|²) |
//! | e  | σ, √det ∈ W^{1,3/2} |
//! | f  | \|∇σ\|²/ρ ∈ L¹ |
//! | g  | \|∇√det\|²/ρ ∈ L¹ |
//!
//! (a)–(c) are pointwise or exact statements and either pass or fail. The
//! regularity conditions (d)–(g) are membership statements about continuum
//! function spaces; on one grid we can only say that the discrete norm is
//! finite. When a refined copy of the density is supplied, a regularity
//! condition passes only if its norms also change by less than
//! [`Tolerances::refine`] between the two resolutions.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{
    dirichlet_energy, sobolev_norm, weighted_gradient_l1, Grid3, ScalarField, WeightedGradient,
};
use crate::spin::{det_field, det_raw, trace_integral, SpinDensityField};

/// Relative tolerances. Absolute thresholds are derived per density:
/// `neg × max(ρ)`, `norm × N`, `floor × max(ρ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed negativity of ρ↑, ρ↓ (and of det, scaled by max(ρ) again).
    pub neg: f64,
    /// Allowed |∫tr R − N|.
    pub norm: f64,
    /// Division floor for ρ⁻¹-weighted integrals.
    pub floor: f64,
    /// Largest relative change of a regularity norm under refinement.
    pub refine: f64,
    /// Largest fraction of significant masked nodes before a weighted
    /// integral is reported indeterminate.
    pub masked_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            neg: 1e-10,
            norm: 1e-6,
            floor: 1e-12,
            refine: 0.05,
            masked_fraction: 0.01,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("neg", self.neg),
            ("norm", self.norm),
            ("floor", self.floor),
            ("refine", self.refine),
            ("masked_fraction", self.masked_fraction),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "tolerance `{name}` must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        }
    }

    /// Worst of two verdicts (fail > indeterminate > pass).
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Pass,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    Positivity,
    Determinant,
    Normalization,
    DensityH1,
    SobolevW32,
    SigmaWeighted,
    DetWeighted,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::Positivity,
        Condition::Determinant,
        Condition::Normalization,
        Condition::DensityH1,
        Condition::SobolevW32,
        Condition::SigmaWeighted,
        Condition::DetWeighted,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Condition::Positivity => "a_positivity",
            Condition::Determinant => "b_determinant",
            Condition::Normalization => "c_normalization",
            Condition::DensityH1 => "d_sqrt_density_h1",
            Condition::SobolevW32 => "e_w1_3_2",
            Condition::SigmaWeighted => "f_grad_sigma_over_rho",
            Condition::DetWeighted => "g_grad_sqrt_det_over_rho",
        }
    }

    pub fn is_regularity(self) -> bool {
        matches!(
            self,
            Condition::DensityH1
                | Condition::SobolevW32
                | Condition::SigmaWeighted
                | Condition::DetWeighted
        )
    }
}

/// How a regularity verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Basis {
    /// Pointwise or exact condition.
    Direct,
    /// Finite at this resolution; no refinement data.
    SingleGrid,
    /// Largest relative change of the condition's norms against a refined grid.
    Refined { rel_change: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    pub condition: Condition,
    pub verdict: Verdict,
    pub basis: Basis,
    /// Named numeric values (norms, extrema, integrals).
    pub values: Vec<(String, f64)>,
    /// Masked-node tallies for weighted integrals.
    pub masked: Option<WeightedTally>,
    /// Human-readable note, e.g. the location of the worst violation.
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedTally {
    pub masked: usize,
    pub significant: usize,
    pub total: usize,
}

impl ConditionResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub n_electrons: u32,
    pub dims: [usize; 3],
    pub conditions: Vec<ConditionResult>,
    /// Some entry of R on the box faces exceeds 1e-8 × max(ρ).
    pub boundary_warning: bool,
    pub boundary_ratio: f64,
}

/// Boundary values above this fraction of max(ρ) raise a warning.
pub const BOUNDARY_WARN: f64 = 1e-8;

impl CheckReport {
    pub fn get(&self, c: Condition) -> &ConditionResult {
        self.conditions
            .iter()
            .find(|r| r.condition == c)
            .expect("every condition is evaluated")
    }

    pub fn verdict(&self) -> Verdict {
        self.conditions
            .iter()
            .fold(Verdict::Pass, |v, c| v.and(c.verdict))
    }

    pub fn failed(&self) -> Vec<Condition> {
        self.conditions
            .iter()
            .filter(|c| c.verdict == Verdict::Fail)
            .map(|c| c.condition)
            .collect()
    }
}

/// Discrete norms entering the regularity conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityNorms {
    pub h1_up: f64,
    pub h1_dn: f64,
    pub sigma_w32: f64,
    pub sqrt_det_w32: f64,
    pub sigma_weighted: WeightedGradient,
    pub det_weighted: WeightedGradient,
}

impl RegularityNorms {
    pub fn compute(r: &SpinDensityField, tol: &Tolerances) -> Result<Self> {
        let rho = r.total();
        let floor = tol.floor * r.scale().max(f64::MIN_POSITIVE);
        let floor = if floor > 0.0 {
            floor
        } else {
            f64::MIN_POSITIVE
        };
        let sqrt_det = det_field(r).sqrt_clamped();
        Ok(RegularityNorms {
            h1_up: dirichlet_energy(&r.rho_up().sqrt_clamped()),
            h1_dn: dirichlet_energy(&r.rho_dn().sqrt_clamped()),
            sigma_w32: sobolev_norm(r.sigma(), 1.5)?.total(),
            sqrt_det_w32: sobolev_norm(&sqrt_det, 1.5)?.total(),
            sigma_weighted: weighted_gradient_l1(r.sigma(), &rho, floor)?,
            det_weighted: weighted_gradient_l1(&sqrt_det, &rho, floor)?,
        })
    }

    /// Norm values grouped by condition.
    pub fn of(&self, c: Condition) -> Vec<(&'static str, f64)> {
        match c {
            Condition::DensityH1 => vec![
                ("grad_sqrt_rho_up_sq", self.h1_up),
                ("grad_sqrt_rho_dn_sq", self.h1_dn),
            ],
            Condition::SobolevW32 => vec![
                ("sigma_w1_3_2", self.sigma_w32),
                ("sqrt_det_w1_3_2", self.sqrt_det_w32),
            ],
            Condition::SigmaWeighted => vec![("grad_sigma_sq_over_rho", self.sigma_weighted.value)],
            Condition::DetWeighted => vec![("grad_sqrt_det_sq_over_rho", self.det_weighted.value)],
            _ => vec![],
        }
    }
}

/// Relative change `|fine - coarse| / |coarse|`, with 0 → 0 counted as no
/// change.
pub fn rel_change(coarse: f64, fine: f64) -> f64 {
    let d = (fine - coarse).abs();
    if d == 0.0 {
        0.0
    } else if coarse == 0.0 {
        f64::INFINITY
    } else {
        d / coarse.abs()
    }
}

fn locate(grid: &Grid3, idx: usize) -> String {
    let [i, j, k] = grid.unravel(idx);
    let [x, y, z] = grid.point(i, j, k);
    format!("node ({i}, {j}, {k}) at ({x:.4}, {y:.4}, {z:.4})")
}

/// Evaluate all conditions on a single grid.
pub fn check(r: &SpinDensityField, tol: &Tolerances) -> Result<CheckReport> {
    run_check(r, None, tol)
}

/// Evaluate all conditions, deciding the regularity conditions against a
/// refined copy of the same density.
pub fn check_refined(
    r: &SpinDensityField,
    refined: &SpinDensityField,
    tol: &Tolerances,
) -> Result<CheckReport> {
    if refined.n_electrons() != r.n_electrons() {
        return Err(Error::InvalidParameter(format!(
            "refined density has {} electrons, expected {}",
            refined.n_electrons(),
            r.n_electrons()
        )));
    }
    run_check(r, Some(refined), tol)
}

/// Spinless conditions on ρ, evaluated as the diagonal density diag(ρ/2, ρ/2).
pub fn check_spinless(
    rho: &ScalarField,
    n_electrons: u32,
    tol: &Tolerances,
) -> Result<CheckReport> {
    check(&spinless_field(rho, n_electrons)?, tol)
}

pub fn check_spinless_refined(
    rho: &ScalarField,
    refined: &ScalarField,
    n_electrons: u32,
    tol: &Tolerances,
) -> Result<CheckReport> {
    check_refined(
        &spinless_field(rho, n_electrons)?,
        &spinless_field(refined, n_electrons)?,
        tol,
    )
}

fn spinless_field(rho: &ScalarField, n_electrons: u32) -> Result<SpinDensityField> {
    let half = rho.scale(0.5);
    SpinDensityField::diagonal(half.clone(), half, n_electrons)
}

fn run_check(
    r: &SpinDensityField,
    refined: Option<&SpinDensityField>,
    tol: &Tolerances,
) -> Result<CheckReport> {
    tol.validate()?;
    let grid = *r.grid();
    let scale = r.scale();
    let neg_tol = tol.neg * scale;
    let n = r.n_electrons() as f64;
    let mut conditions = Vec::with_capacity(7);

    // (a)
    let (min_up, i_up) = r.rho_up().argmin();
    let (min_dn, i_dn) = r.rho_dn().argmin();
    let (worst, worst_idx) = if min_up <= min_dn {
        (min_up, i_up)
    } else {
        (min_dn, i_dn)
    };
    let pos_ok = min_up >= -neg_tol && min_dn >= -neg_tol;
    conditions.push(ConditionResult {
        condition: Condition::Positivity,
        verdict: if pos_ok { Verdict::Pass } else { Verdict::Fail },
        basis: Basis::Direct,
        values: vec![
            ("min_rho_up".into(), min_up),
            ("min_rho_dn".into(), min_dn),
            ("threshold".into(), -neg_tol),
        ],
        masked: None,
        note: (!pos_ok).then(|| {
            format!(
                "worst violation {worst:.6e} at {}",
                locate(&grid, worst_idx)
            )
        }),
    });

    // (b)
    let (min_det, i_det) = det_raw(r).argmin();
    let det_tol = tol.neg * scale * scale;
    let det_ok = min_det >= -det_tol;
    conditions.push(ConditionResult {
        condition: Condition::Determinant,
        verdict: if det_ok { Verdict::Pass } else { Verdict::Fail },
        basis: Basis::Direct,
        values: vec![("min_det".into(), min_det), ("threshold".into(), -det_tol)],
        masked: None,
        note: (!det_ok)
            .then(|| format!("worst violation {min_det:.6e} at {}", locate(&grid, i_det))),
    });

    // (c)
    let trace = trace_integral(r);
    let norm_ok = (trace - n).abs() <= tol.norm * n;
    conditions.push(ConditionResult {
        condition: Condition::Normalization,
        verdict: if norm_ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        basis: Basis::Direct,
        values: vec![
            ("trace_integral".into(), trace),
            ("electrons".into(), n),
            ("deviation".into(), trace - n),
        ],
        masked: None,
        note: None,
    });

    // (d)-(g)
    let norms = RegularityNorms::compute(r, tol)?;
    let fine = refined
        .map(|f| RegularityNorms::compute(f, tol))
        .transpose()?;
    for c in [
        Condition::DensityH1,
        Condition::SobolevW32,
        Condition::SigmaWeighted,
        Condition::DetWeighted,
    ] {
        conditions.push(regularity(c, &norms, fine.as_ref(), tol));
    }

    let boundary_ratio = boundary_ratio(r);
    Ok(CheckReport {
        n_electrons: r.n_electrons(),
        dims: grid.dims(),
        conditions,
        boundary_warning: boundary_ratio > BOUNDARY_WARN,
        boundary_ratio,
    })
}

fn regularity(
    c: Condition,
    norms: &RegularityNorms,
    fine: Option<&RegularityNorms>,
    tol: &Tolerances,
) -> ConditionResult {
    let coarse_vals = norms.of(c);
    let mut values: Vec<(String, f64)> = coarse_vals
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    let finite = coarse_vals.iter().all(|(_, v)| v.is_finite());

    let weighted = match c {
        Condition::SigmaWeighted => Some(norms.sigma_weighted),
        Condition::DetWeighted => Some(norms.det_weighted),
        _ => None,
    };
    let masked = weighted.map(|w| WeightedTally {
        masked: w.masked,
        significant: w.significant_masked,
        total: w.total,
    });

    let mut verdict = if finite { Verdict::Pass } else { Verdict::Fail };
    let mut note = None;
    let basis = match fine {
        None => Basis::SingleGrid,
        Some(f) => {
            let fine_vals = f.of(c);
            let change = coarse_vals
                .iter()
                .zip(&fine_vals)
                .map(|((_, a), (_, b))| rel_change(*a, *b))
                .fold(0.0, f64::max);
            for (k, v) in &fine_vals {
                values.push((format!("refined_{k}"), *v));
            }
            if !(change < tol.refine) {
                verdict = Verdict::Fail;
                note = Some(format!(
                    "norm changes by {:.3}% under refinement (limit {:.3}%)",
                    100.0 * change,
                    100.0 * tol.refine
                ));
            }
            Basis::Refined { rel_change: change }
        }
    };
    if verdict == Verdict::Pass {
        let too_masked = [Some(norms), fine]
            .into_iter()
            .flatten()
            .filter_map(|n| match c {
                Condition::SigmaWeighted => Some(n.sigma_weighted),
                Condition::DetWeighted => Some(n.det_weighted),
                _ => None,
            })
            .any(|w| w.significant_fraction() > tol.masked_fraction);
        if too_masked {
            verdict = Verdict::Indeterminate;
            note = Some("too many significant nodes below the division floor".into());
        }
    }
    ConditionResult {
        condition: c,
        verdict,
        basis,
        values,
        masked,
        note,
    }
}

/// max over boundary nodes of |R entries| divided by max(ρ).
fn boundary_ratio(r: &SpinDensityField) -> f64 {
    let grid = r.grid();
    let scale = r.scale();
    if scale <= 0.0 {
        return 0.0;
    }
    let mut m = 0.0f64;
    for idx in 0..grid.len() {
        if grid.on_boundary(idx) {
            let (a, b, s) = r.entry(idx);
            m = m.max(a.abs()).max(b.abs()).max(s.norm());
        }
    }
    m / scale
}
