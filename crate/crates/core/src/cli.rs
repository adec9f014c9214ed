//! Command-line front end. Exit codes: 0 pass, 1 checked and failed,
//! 2 usage or I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::check::{check, check_refined, rel_change, RegularityNorms, Tolerances, Verdict};
use crate::decompose::{construct_witness_with, ConstructOptions, CutoffFunction};
use crate::error::{Error, Result};
use crate::field::{Axis, Grid3};
use crate::gen;
use crate::harriman::PhaseAxis;
use crate::io;
use crate::spin::SpinDensityField;
use crate::sqrt::{corollary_check, corollary_check_refined, eigen_densities, sqrt_field_with};
use crate::witness::{verify, VerifyTolerances};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "spinrep",
    version,
    about = "Representability checks and mixed-state witnesses for spin densities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct TolArgs {
    /// Relative tolerance on the electron count.
    #[arg(long, default_value_t = 1e-6)]
    tol_norm: f64,
    /// Relative negativity tolerance, scaled by max(ρ).
    #[arg(long, default_value_t = 1e-10)]
    tol_neg: f64,
    /// Division floor for ρ⁻¹-weighted integrals, relative to max(ρ).
    #[arg(long, default_value_t = 1e-12)]
    floor: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            neg: self.tol_neg,
            norm: self.tol_norm,
            floor: self.floor,
            ..Tolerances::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Nodes per axis.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Cubic box bounds.
    #[arg(long = "box", num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-8.0, 8.0])]
    bounds: Vec<f64>,
}

impl GridArgs {
    fn grid(&self, n: usize) -> Result<Grid3> {
        Grid3::cubic(n, self.bounds[0], self.bounds[1])
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    GaussianDiagonal,
    Rank1,
    Mixture,
    NegativeLobe,
    Overcorrelated,
    Misnormalized,
    StepBall,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    #[arg(long, default_value_t = 2)]
    electrons: u32,
    /// Gaussian width (up component for two-width families).
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    /// Width of the down component; defaults to `--width`.
    #[arg(long)]
    width_dn: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    up_fraction: f64,
    /// |σ|/√(ρ↑ρ↓) of the mixture family.
    #[arg(long, default_value_t = 0.5)]
    coherence: f64,
    /// Slope of the phase of σ along x (mixture) or y (rank1).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase_slope: f64,
    /// Relative excess of |σ| for the overcorrelated family.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Actual electron content of the misnormalized family.
    #[arg(long, default_value_t = 2.1)]
    mass: f64,
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
}

impl FamilyArgs {
    fn build(&self, family: Family, grid: Grid3) -> Result<SpinDensityField> {
        let n = self.electrons;
        let width_dn = self.width_dn.unwrap_or(self.width);
        match family {
            Family::GaussianDiagonal => gen::gaussian_diagonal(n, self.width, grid),
            Family::Rank1 => gen::rank1_gaussian(
                grid,
                &gen::Rank1Params {
                    n_electrons: n,
                    up_fraction: self.up_fraction,
                    width_up: self.width,
                    width_dn,
                    twist: self.phase_slope,
                },
            ),
            Family::Mixture => gen::full_rank_mixture(
                grid,
                &gen::MixtureParams {
                    n_electrons: n,
                    up_fraction: self.up_fraction,
                    width_up: self.width,
                    width_dn,
                    coherence: self.coherence,
                    phase_slope: self.phase_slope,
                    ..Default::default()
                },
            ),
            Family::NegativeLobe => gen::negative_lobe(grid, n),
            Family::Overcorrelated => gen::overcorrelated(grid, n, self.eps),
            Family::Misnormalized => gen::misnormalized(grid, n, self.mass),
            Family::StepBall => {
                let rho = gen::step_ball(grid, n, self.radius)?;
                let half = rho.scale(0.5);
                SpinDensityField::diagonal(half.clone(), half, n)
            }
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AxisArg {
    X,
    Y,
    Z,
    Auto,
}

impl From<AxisArg> for PhaseAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::X => PhaseAxis::Fixed(Axis::X),
            AxisArg::Y => PhaseAxis::Fixed(Axis::Y),
            AxisArg::Z => PhaseAxis::Fixed(Axis::Z),
            AxisArg::Auto => PhaseAxis::Auto,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CutoffArg {
    Quintic,
    Smooth,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an analytic fixture density.
    Gen {
        #[arg(value_enum)]
        family: Family,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        params: FamilyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the representability conditions.
    Check {
        input: PathBuf,
        /// Same density on a finer grid, used to decide regularity.
        #[arg(long)]
        refined: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write the pointwise square root in the density layout.
    Sqrt {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Eigenvalue densities and the regularity of their square roots.
    Eigs {
        input: PathBuf,
        #[arg(long)]
        refined: Option<PathBuf>,
        /// Write ρ₊ and ρ₋ as the diagonal of a density file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build a mixed-state witness directory.
    Construct {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = AxisArg::Auto)]
        axis: AxisArg,
        #[arg(long, value_enum, default_value_t = CutoffArg::Quintic)]
        cutoff: CutoffArg,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare a witness directory with a target density.
    Verify {
        witness: PathBuf,
        target: PathBuf,
        /// Relative slack on the integrated kinetic inequalities.
        #[arg(long, default_value_t = 0.05)]
        slack: f64,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Regularity norms of a fixture at two resolutions, or of several files.
    Norms {
        /// Density files, coarsest first. Ignored with `--family`.
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        params: FamilyArgs,
        /// Resolution factor of the refined grid.
        #[arg(long, default_value_t = 1.5)]
        refine: f64,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn emit(out: &mut dyn Write, report: &str, path: Option<&Path>) -> Result<()> {
    out.write_all(report.as_bytes())?;
    if let Some(p) = path {
        std::fs::write(p, report)?;
    }
    Ok(())
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        _ => EXIT_FAIL,
    }
}

fn norms_block(
    label: &str,
    r: &SpinDensityField,
    tol: &Tolerances,
) -> Result<(String, Vec<(&'static str, f64)>)> {
    let n = RegularityNorms::compute(r, tol)?;
    let values = vec![
        ("grad_sqrt_rho_up_sq", n.h1_up),
        ("grad_sqrt_rho_dn_sq", n.h1_dn),
        ("sigma_w1_3_2", n.sigma_w32),
        ("sqrt_det_w1_3_2", n.sqrt_det_w32),
        ("grad_sigma_sq_over_rho", n.sigma_weighted.value),
        ("grad_sqrt_det_sq_over_rho", n.det_weighted.value),
    ];
    let [nx, ny, nz] = r.grid().dims();
    let mut s = format!("[{label}]\ngrid: {nx} {ny} {nz}\n");
    for (k, v) in &values {
        s.push_str(&format!("{k}: {v:.12e}\n"));
    }
    Ok((s, values))
}

fn run(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen {
            family,
            grid,
            params,
            out: path,
        } => {
            let r = params.build(family, grid.grid(grid.grid)?)?;
            io::write_spdf(&r, &path)?;
            writeln!(out, "wrote {}", path.display())?;
            Ok(EXIT_PASS)
        }
        Command::Check {
            input,
            refined,
            tol,
            report,
        } => {
            let r = io::read_spdf(&input)?;
            let tol = tol.tolerances();
            let rep = match refined {
                Some(p) => check_refined(&r, &io::read_spdf(p)?, &tol)?,
                None => check(&r, &tol)?,
            };
            emit(out, &io::format_check(&rep), report.as_deref())?;
            Ok(verdict_code(rep.verdict()))
        }
        Command::Sqrt {
            input,
            out: path,
            tol,
        } => {
            let r = io::read_spdf(&input)?;
            let root = sqrt_field_with(&r, &tol.tolerances())?;
            io::write_sqrt(&root, r.n_electrons(), &path)?;
            writeln!(out, "wrote {}", path.display())?;
            Ok(EXIT_PASS)
        }
        Command::Eigs {
            input,
            refined,
            out: path,
            tol,
            report,
        } => {
            let r = io::read_spdf(&input)?;
            let tol = tol.tolerances();
            let rep = match refined {
                Some(p) => corollary_check_refined(&r, &io::read_spdf(p)?, &tol)?,
                None => corollary_check(&r, &tol)?,
            };
            if let Some(p) = path {
                let e = eigen_densities(&r)?;
                let d = SpinDensityField::diagonal(e.rho_plus, e.rho_minus, r.n_electrons())?;
                io::write_spdf(&d, p)?;
            }
            emit(out, &io::format_corollary(&rep), report.as_deref())?;
            Ok(verdict_code(rep.verdict))
        }
        Command::Construct {
            input,
            out: dir,
            axis,
            cutoff,
            tol,
            report,
        } => {
            let r = io::read_spdf(&input)?;
            let mut opts = ConstructOptions::default()
                .with_axis(axis.into())
                .with_tolerances(tol.tolerances());
            opts.cutoff = match cutoff {
                CutoffArg::Quintic => CutoffFunction::Quintic,
                CutoffArg::Smooth => CutoffFunction::SmoothBump,
            };
            let built = match construct_witness_with(&r, &opts) {
                Ok(b) => b,
                Err(e @ (Error::Precondition(_) | Error::Stage { .. })) => {
                    writeln!(out, "construction failed: {e}")?;
                    return Ok(EXIT_FAIL);
                }
                Err(e) => return Err(e),
            };
            io::write_witness(&built.witness, &dir)?;
            let mut s = format!(
                "branches: {}\nrank1_input: {}\n",
                built.witness.branches().len(),
                built.rank1_input
            );
            for p in &built.pieces {
                s.push_str(&format!(
                    "\n[{}]\nweight: {:.16e}\nswapped: {}\nphase_axis: {:?}\nfallback_points: {}\nrenormalization: {:.6e}\nquadrature_gap: {:.6e}\n",
                    p.label, p.weight, p.swapped, p.phase_axis, p.fallback_points, p.renormalization, p.quadrature_gap
                ));
            }
            emit(out, &s, report.as_deref())?;
            Ok(EXIT_PASS)
        }
        Command::Verify {
            witness,
            target,
            slack,
            tol,
            report,
        } => {
            let w = io::read_witness(&witness)?;
            let r = io::read_spdf(&target)?;
            let vt = VerifyTolerances {
                slack,
                check: tol.tolerances(),
                ..VerifyTolerances::default()
            };
            let rep = verify(&w, &r, &vt)?;
            emit(out, &io::format_verify(&rep), report.as_deref())?;
            Ok(if rep.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Norms {
            inputs,
            family,
            grid,
            params,
            refine,
            tol,
            report,
        } => {
            let tol = tol.tolerances();
            let fields: Vec<SpinDensityField> = match family {
                Some(f) => {
                    if !(refine > 1.0) {
                        return Err(Error::InvalidParameter("--refine must exceed 1".into()));
                    }
                    let fine = (grid.grid as f64 * refine).round() as usize;
                    vec![
                        params.build(f, grid.grid(grid.grid)?)?,
                        params.build(f, grid.grid(fine)?)?,
                    ]
                }
                None => inputs.iter().map(io::read_spdf).collect::<Result<_>>()?,
            };
            if fields.is_empty() {
                return Err(Error::InvalidParameter("no densities given".into()));
            }
            let mut s = String::new();
            let mut prev: Option<Vec<(&str, f64)>> = None;
            let mut worst = 0.0f64;
            for (i, r) in fields.iter().enumerate() {
                let (block, values) = norms_block(&format!("level_{i}"), r, &tol)?;
                s.push_str(&block);
                if let Some(p) = &prev {
                    for ((k, a), (_, b)) in p.iter().zip(&values) {
                        let c = rel_change(*a, *b);
                        worst = worst.max(c);
                        s.push_str(&format!("rel_change_{k}: {c:.6e}\n"));
                    }
                }
                s.push('\n');
                prev = Some(values);
            }
            s.push_str(&format!("max_rel_change: {worst:.6e}\n"));
            let pass = fields.len() < 2 || worst < tol.refine;
            s.push_str(&format!(
                "verdict: {}\n",
                if pass { "pass" } else { "fail" }
            ));
            emit(out, &s, report.as_deref())?;
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

/// Run the command line with explicit output streams.
pub fn cli_main_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Run the command line against stdout and stderr.
pub fn cli_main<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    cli_main_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
