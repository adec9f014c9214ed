//! Splitting an admissible spin density into null-determinant,
//! ratio-constrained pieces and assembling the mixed-state witness.
//!
//! ```text
//! R ──rank1_split──► t R̃↑ + (1−t) R̃↓          det R̃^α ≡ 0
//! R̃ ──ratio_split──► u χ²R̃ + (1−u)(1−χ²)R̃      χ = χ(ρ↑/ρ↓)
//! ```
//!
//! The first ratio piece satisfies ρ↓ ≤ 2ρ↑ and is handled spin-swapped; the
//! second satisfies ρ↑ ≤ 2ρ↓ and goes straight to the orbital construction.

use num_complex::Complex64;

use crate::check::{check, Tolerances, Verdict};
use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::harriman::{build_orbitals, HarrimanOptions, PhaseAxis, Spinor};
use crate::spin::{det_raw, spin_swap, trace_integral, SpinDensityField};
use crate::sqrt::sqrt_field_with;
use crate::witness::{Branch, Witness};

/// Weights closer than this to 0 or 1 collapse the split.
pub const DEGENERATE_WEIGHT: f64 = 1e-12;

/// Smooth map χ: ℝ⁺ → [0, 1] with χ = 0 below 1/2 and χ = 1 above 2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CutoffFunction {
    /// `6u⁵ − 15u⁴ + 10u³` with `u = (x − 1/2)/(3/2)`. C² at the knots.
    #[default]
    Quintic,
    /// `e^{−1/u} / (e^{−1/u} + e^{−1/(1−u)})`. C^∞.
    SmoothBump,
}

impl CutoffFunction {
    pub fn eval(self, x: f64) -> f64 {
        if x.is_nan() {
            return 0.0;
        }
        let u = (x - 0.5) / 1.5;
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match self {
            CutoffFunction::Quintic => u * u * u * (10.0 + u * (-15.0 + 6.0 * u)),
            CutoffFunction::SmoothBump => {
                let a = (-1.0 / u).exp();
                let b = (-1.0 / (1.0 - u)).exp();
                a / (a + b)
            }
        }
    }
}

/// ρ↑/ρ↓ with 0/0 = 1 and x/0 = ∞.
pub fn spin_ratio(up: f64, dn: f64) -> f64 {
    let (up, dn) = (up.max(0.0), dn.max(0.0));
    if dn > 0.0 {
        up / dn
    } else if up > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// `R = t·first + (1 − t)·second`, each piece carrying the same discrete
/// mass `∫tr R` as the input.
///
/// A degenerate split keeps only the surviving piece with weight 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitResult {
    /// Weight of `first`.
    pub weight: f64,
    pub first: Option<SpinDensityField>,
    pub second: Option<SpinDensityField>,
}

impl SplitResult {
    /// Non-empty pieces with their weights.
    pub fn pieces(&self) -> Vec<(f64, &SpinDensityField)> {
        let mut out = Vec::new();
        if let Some(p) = &self.first {
            out.push((self.weight, p));
        }
        if let Some(p) = &self.second {
            out.push((1.0 - self.weight, p));
        }
        out
    }

    pub fn is_degenerate(&self) -> bool {
        self.first.is_none() || self.second.is_none()
    }
}

fn split_from_parts(
    input: &SpinDensityField,
    a: SpinDensityField,
    b: SpinDensityField,
) -> SplitResult {
    let (ma, mb) = (trace_integral(&a), trace_integral(&b));
    let total = ma + mb;
    let t = if total > 0.0 { ma / total } else { 0.0 };
    if t < DEGENERATE_WEIGHT {
        return SplitResult {
            weight: 0.0,
            first: None,
            second: Some(input.clone()),
        };
    }
    if t > 1.0 - DEGENERATE_WEIGHT {
        return SplitResult {
            weight: 1.0,
            first: Some(input.clone()),
            second: None,
        };
    }
    SplitResult {
        weight: t,
        first: Some(a.scale_by(1.0 / t)),
        second: Some(b.scale_by(1.0 / (1.0 - t))),
    }
}

/// `R = R̃↑ + R̃↓` with
/// `R̃↑ = [[r↑², s r↑], [s* r↑, |s|²]]`, `R̃↓ = [[|s|², s r↓], [s* r↓, r↓²]]`
/// built from `√R = [[r↑, s], [s*, r↓]]`. Both parts have null determinant.
pub fn rank1_split(r: &SpinDensityField) -> Result<SplitResult> {
    rank1_split_with(r, &Tolerances::default())
}

pub fn rank1_split_with(r: &SpinDensityField, tol: &Tolerances) -> Result<SplitResult> {
    let root = sqrt_field_with(r, tol)?;
    let grid = *r.grid();
    let n = grid.len();
    let (mut up_a, mut dn_a, mut sg_a) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    let (mut up_b, mut dn_b, mut sg_b) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for i in 0..n {
        let ru = root.r_up.values()[i];
        let rd = root.r_dn.values()[i];
        let s = root.s.values()[i];
        let s2 = s.norm_sqr();
        up_a.push(ru * ru);
        dn_a.push(s2);
        sg_a.push(s * ru);
        up_b.push(s2);
        dn_b.push(rd * rd);
        sg_b.push(s * rd);
    }
    let build = |up: Vec<f64>, dn: Vec<f64>, sg: Vec<Complex64>| {
        SpinDensityField::new(
            ScalarField::new(grid, up)?,
            ScalarField::new(grid, dn)?,
            ComplexField::new(grid, sg)?,
            r.n_electrons(),
        )
    };
    let a = build(up_a, dn_a, sg_a)?;
    let b = build(up_b, dn_b, sg_b)?;
    Ok(split_from_parts(r, a, b))
}

/// `R̃₁ = χ²(ρ↑/ρ↓) R`, `R̃₂ = (1 − χ²(ρ↑/ρ↓)) R`.
///
/// The first part lives where ρ↓ < 2ρ↑, the second where ρ↑ < 2ρ↓.
pub fn ratio_split(r: &SpinDensityField, chi: CutoffFunction) -> Result<SplitResult> {
    ratio_split_with(r, chi, &Tolerances::default())
}

pub fn ratio_split_with(
    r: &SpinDensityField,
    chi: CutoffFunction,
    tol: &Tolerances,
) -> Result<SplitResult> {
    ensure_null_det(r, tol)?;
    let weights: Vec<f64> = (0..r.grid().len())
        .map(|i| {
            let (a, b, _) = r.entry(i);
            chi.eval(spin_ratio(a, b)).powi(2)
        })
        .collect();
    let a = r.scale_pointwise(|i| weights[i]);
    let b = r.scale_pointwise(|i| 1.0 - weights[i]);
    Ok(split_from_parts(r, a, b))
}

/// Largest determinant relative to `max(ρ)²`.
pub fn max_rel_det(r: &SpinDensityField) -> f64 {
    let scale = r.scale();
    if scale <= 0.0 {
        return 0.0;
    }
    det_raw(r)
        .values()
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
        / (scale * scale)
}

fn ensure_null_det(r: &SpinDensityField, tol: &Tolerances) -> Result<()> {
    let d = max_rel_det(r);
    if d > tol.neg {
        return Err(Error::Precondition(format!(
            "determinant is not null: max |det| = {d:.3e} × max(ρ)²"
        )));
    }
    Ok(())
}

/// Largest violation of `ρ↑ ≤ 2ρ↓`, relative to `max(ρ)`.
pub fn ratio_excess(r: &SpinDensityField) -> f64 {
    let scale = r.scale();
    if scale <= 0.0 {
        return 0.0;
    }
    (0..r.grid().len())
        .map(|i| {
            let (a, b, _) = r.entry(i);
            a - 2.0 * b
        })
        .fold(0.0f64, f64::max)
        / scale
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructOptions {
    pub harriman: HarrimanOptions,
    pub cutoff: CutoffFunction,
    /// Run the full representability check on the input and every piece.
    pub validate_pieces: bool,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            harriman: HarrimanOptions::default(),
            cutoff: CutoffFunction::default(),
            validate_pieces: true,
        }
    }
}

impl ConstructOptions {
    pub fn with_axis(mut self, axis: PhaseAxis) -> Self {
        self.harriman.axis = axis;
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.harriman.tol = tol;
        self
    }
}

/// How one branch of the witness was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceRecord {
    pub label: String,
    pub weight: f64,
    pub swapped: bool,
    pub phase_axis: crate::field::Axis,
    pub fallback_points: usize,
    pub renormalization: f64,
    pub quadrature_gap: f64,
    pub check_verdict: Option<Verdict>,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub witness: Witness,
    pub pieces: Vec<PieceRecord>,
    /// Whether the input itself was already null-determinant.
    pub rank1_input: bool,
}

/// Mixed state of at most four Slater determinants reproducing `R`.
pub fn construct_witness(r: &SpinDensityField) -> Result<Witness> {
    Ok(construct_witness_with(r, &ConstructOptions::default())?.witness)
}

pub fn construct_witness_with(
    r: &SpinDensityField,
    opts: &ConstructOptions,
) -> Result<Construction> {
    let tol = opts.harriman.tol;
    tol.validate()?;
    if opts.validate_pieces {
        let report = check(r, &tol).map_err(|e| e.at_stage("check input"))?;
        if report.verdict() == Verdict::Fail {
            let failed: Vec<&str> = report.failed().iter().map(|c| c.key()).collect();
            return Err(Error::Precondition(format!(
                "input fails conditions {}",
                failed.join(", ")
            ))
            .at_stage("check input"));
        }
    }

    let rank1_input = max_rel_det(r) <= tol.neg;
    let top: Vec<(f64, SpinDensityField, &str)> = if rank1_input {
        vec![(1.0, r.clone(), "R")]
    } else {
        let split = rank1_split_with(r, &tol).map_err(|e| e.at_stage("rank1_split"))?;
        let mut v = Vec::new();
        if let Some(p) = split.first {
            v.push((split.weight, p, "up"));
        }
        if let Some(p) = split.second {
            v.push((1.0 - split.weight, p, "dn"));
        }
        v
    };

    let mut branches = Vec::new();
    let mut pieces = Vec::new();
    for (w, piece, label) in top {
        ensure_null_det(&piece, &tol).map_err(|e| e.at_stage(format!("rank1_split[{label}]")))?;
        let ratio_tol = tol.neg;
        let leaves: Vec<(f64, SpinDensityField, bool, String)> =
            if ratio_excess(&piece) <= ratio_tol {
                vec![(w, piece, false, label.to_string())]
            } else if ratio_excess(&spin_swap(&piece)) <= ratio_tol {
                vec![(w, piece, true, label.to_string())]
            } else {
                let split = ratio_split_with(&piece, opts.cutoff, &tol)
                    .map_err(|e| e.at_stage(format!("ratio_split[{label}]")))?;
                let mut v = Vec::new();
                if let Some(p) = split.first {
                    v.push((w * split.weight, p, true, format!("{label}/1")));
                }
                if let Some(p) = split.second {
                    v.push((w * (1.0 - split.weight), p, false, format!("{label}/2")));
                }
                v
            };
        for (weight, leaf, swapped, name) in leaves {
            let stage = format!("harriman[{name}]");
            let check_verdict = if opts.validate_pieces {
                let v = check(&leaf, &tol)
                    .map_err(|e| e.at_stage(stage.clone()))?
                    .verdict();
                if v == Verdict::Fail {
                    return Err(Error::Precondition(format!(
                        "piece {name} fails the representability check"
                    ))
                    .at_stage(stage));
                }
                Some(v)
            } else {
                None
            };
            let target = if swapped { spin_swap(&leaf) } else { leaf };
            let set =
                build_orbitals(&target, &opts.harriman).map_err(|e| e.at_stage(stage.clone()))?;
            let orbitals: Vec<Spinor> = if swapped {
                set.orbitals.iter().map(Spinor::swapped).collect()
            } else {
                set.orbitals
            };
            pieces.push(PieceRecord {
                label: name.clone(),
                weight,
                swapped,
                phase_axis: set.phase.axis,
                fallback_points: set.fallback_points,
                renormalization: set.phase.renormalization,
                quadrature_gap: set.phase.quadrature_gap,
                check_verdict,
            });
            branches.push(Branch {
                weight,
                swapped,
                label: name,
                orbitals,
            });
        }
    }
    let witness = Witness::new(*r.grid(), r.n_electrons(), branches)?;
    Ok(Construction {
        witness,
        pieces,
        rank1_input,
    })
}
