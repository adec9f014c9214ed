//! File formats and text reports.
//!
//! A density file is a short text header followed by raw little-endian f64
//! arrays:
//!
//! ```text
//! spdf 1
//! grid nx ny nz
//! box x0 y0 z0 x1 y1 z1
//! electrons N
//! data
//! <rho_up><rho_dn><sigma_re><sigma_im>
//! ```
//!
//! each array of `nx·ny·nz` values with z fastest. A witness is a directory
//! holding `witness.txt` and one binary file per orbital with the arrays
//! `up_re, up_im, dn_re, dn_im`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::check::{Basis, CheckReport};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid3, ScalarField};
use crate::harriman::Spinor;
use crate::spin::SpinDensityField;
use crate::sqrt::{CorollaryReport, SqrtField};
use crate::witness::{Branch, VerifyReport, Witness};

pub const SPDF_VERSION: &str = "1";
pub const MANIFEST: &str = "witness.txt";

fn push_f64s(out: &mut Vec<u8>, values: impl Iterator<Item = f64>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn read_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect()
}

fn grid_header(grid: &Grid3) -> String {
    let [nx, ny, nz] = grid.dims();
    let (lo, hi) = (grid.lo(), grid.hi());
    format!(
        "grid {nx} {ny} {nz}\nbox {} {} {} {} {} {}\n",
        lo[0], lo[1], lo[2], hi[0], hi[1], hi[2]
    )
}

/// Four real arrays on a grid as SPDF bytes.
fn spdf_bytes(grid: &Grid3, n_electrons: u32, arrays: [&[f64]; 4]) -> Vec<u8> {
    let mut out = format!(
        "spdf {SPDF_VERSION}\n{}electrons {n_electrons}\ndata\n",
        grid_header(grid)
    )
    .into_bytes();
    for a in arrays {
        push_f64s(&mut out, a.iter().copied());
    }
    out
}

pub fn encode_spdf(r: &SpinDensityField) -> Vec<u8> {
    let re: Vec<f64> = r.sigma().values().iter().map(|c| c.re).collect();
    let im: Vec<f64> = r.sigma().values().iter().map(|c| c.im).collect();
    spdf_bytes(
        r.grid(),
        r.n_electrons(),
        [r.rho_up().values(), r.rho_dn().values(), &re, &im],
    )
}

pub fn write_spdf(r: &SpinDensityField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_spdf(r))?;
    Ok(())
}

/// `√R` in the density layout: r↑, r↓, Re s, Im s.
pub fn write_sqrt(root: &SqrtField, n_electrons: u32, path: impl AsRef<Path>) -> Result<()> {
    let re: Vec<f64> = root.s.values().iter().map(|c| c.re).collect();
    let im: Vec<f64> = root.s.values().iter().map(|c| c.im).collect();
    let bytes = spdf_bytes(
        root.r_up.grid(),
        n_electrons,
        [root.r_up.values(), root.r_dn.values(), &re, &im],
    );
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_spdf(path: impl AsRef<Path>) -> Result<SpinDensityField> {
    decode_spdf(&fs::read(path)?)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Header<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.line += 1;
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(Error::MalformedHeader {
                line: self.line,
                message: "unexpected end of header".into(),
            })?;
        let text = std::str::from_utf8(&rest[..end]).map_err(|_| Error::MalformedHeader {
            line: self.line,
            message: "header is not UTF-8".into(),
        })?;
        self.pos += end + 1;
        Ok((self.line, text.trim_end_matches('\r')))
    }

    fn keyed(&mut self, key: &str, count: usize) -> Result<(usize, Vec<&'a str>)> {
        let (line, text) = self.next_line()?;
        let mut words = text.split_whitespace();
        if words.next() != Some(key) {
            return Err(Error::MalformedHeader {
                line,
                message: format!("expected `{key}`, found `{text}`"),
            });
        }
        let rest: Vec<&str> = words.collect();
        if rest.len() != count {
            return Err(Error::MalformedHeader {
                line,
                message: format!("`{key}` takes {count} values, found {}", rest.len()),
            });
        }
        Ok((line, rest))
    }
}

fn parse<T: std::str::FromStr>(line: usize, word: &str, what: &str) -> Result<T> {
    word.parse().map_err(|_| Error::MalformedHeader {
        line,
        message: format!("invalid {what} `{word}`"),
    })
}

fn parse_grid(h: &mut Header) -> Result<Grid3> {
    let (line, dims) = h.keyed("grid", 3)?;
    let mut d = [0usize; 3];
    for (slot, w) in d.iter_mut().zip(&dims) {
        *slot = parse(line, w, "grid size")?;
    }
    let (bline, b) = h.keyed("box", 6)?;
    let mut v = [0.0f64; 6];
    for (slot, w) in v.iter_mut().zip(&b) {
        *slot = parse(bline, w, "box coordinate")?;
    }
    Grid3::new(d, [v[0], v[1], v[2]], [v[3], v[4], v[5]]).map_err(|e| Error::MalformedHeader {
        line,
        message: e.to_string(),
    })
}

pub fn decode_spdf(bytes: &[u8]) -> Result<SpinDensityField> {
    let mut h = Header {
        bytes,
        pos: 0,
        line: 0,
    };
    let (line, magic) = h.keyed("spdf", 1)?;
    if magic[0] != SPDF_VERSION {
        if magic[0].parse::<u64>().is_ok() {
            return Err(Error::UnsupportedVersion(magic[0].to_string()));
        }
        return Err(Error::MalformedHeader {
            line,
            message: format!("invalid version `{}`", magic[0]),
        });
    }
    let grid = parse_grid(&mut h)?;
    let (eline, e) = h.keyed("electrons", 1)?;
    let n_electrons: u32 = parse(eline, e[0], "electron count")?;
    if n_electrons == 0 {
        return Err(Error::MalformedHeader {
            line: eline,
            message: "electron count must be positive".into(),
        });
    }
    h.keyed("data", 0)?;
    let payload = &bytes[h.pos..];
    let n = grid.len();
    let expected = 4 * n * 8;
    if payload.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: payload.len(),
        });
    }
    let vals = read_f64s(payload);
    let sigma = (0..n)
        .map(|i| Complex64::new(vals[2 * n + i], vals[3 * n + i]))
        .collect();
    SpinDensityField::new(
        ScalarField::new(grid, vals[..n].to_vec())?,
        ScalarField::new(grid, vals[n..2 * n].to_vec())?,
        ComplexField::new(grid, sigma)?,
        n_electrons,
    )
}

fn orbital_file(branch: usize, k: usize) -> String {
    format!("branch{branch}_orbital{k}.bin")
}

pub fn write_witness(w: &Witness, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut m = format!(
        "witness 1\n{}electrons {}\nbranches {}\n",
        grid_header(w.grid()),
        w.n_electrons(),
        w.branches().len()
    );
    for (b, branch) in w.branches().iter().enumerate() {
        let _ = writeln!(
            m,
            "branch {b} weight {:.16e} swapped {} label {}",
            branch.weight,
            u8::from(branch.swapped),
            branch.label
        );
        for (k, o) in branch.orbitals.iter().enumerate() {
            let name = orbital_file(b, k + 1);
            let _ = writeln!(m, "orbital {name}");
            let mut bytes = Vec::with_capacity(4 * 8 * w.grid().len());
            push_f64s(&mut bytes, o.up.values().iter().map(|c| c.re));
            push_f64s(&mut bytes, o.up.values().iter().map(|c| c.im));
            push_f64s(&mut bytes, o.dn.values().iter().map(|c| c.re));
            push_f64s(&mut bytes, o.dn.values().iter().map(|c| c.im));
            fs::write(dir.join(name), bytes)?;
        }
    }
    let mut f = fs::File::create(dir.join(MANIFEST))?;
    f.write_all(m.as_bytes())?;
    Ok(())
}

fn manifest_err(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedManifest {
        line,
        message: message.into(),
    }
}

pub fn read_witness(dir: impl AsRef<Path>) -> Result<Witness> {
    let dir = dir.as_ref();
    let text = fs::read(dir.join(MANIFEST))?;
    let mut h = Header {
        bytes: &text,
        pos: 0,
        line: 0,
    };
    let (line, v) = h.keyed("witness", 1)?;
    if v[0] != "1" {
        return Err(manifest_err(
            line,
            format!("unsupported witness version `{}`", v[0]),
        ));
    }
    let grid = parse_grid(&mut h)?;
    let (eline, e) = h.keyed("electrons", 1)?;
    let n_electrons: u32 = parse(eline, e[0], "electron count")?;
    let (bline, b) = h.keyed("branches", 1)?;
    let count: usize = parse(bline, b[0], "branch count")?;
    let mut branches = Vec::with_capacity(count);
    for expected in 0..count {
        let (line, text) = h.next_line()?;
        let words: Vec<&str> = text.split_whitespace().collect();
        let ok = words.len() >= 7
            && words[0] == "branch"
            && words[2] == "weight"
            && words[4] == "swapped"
            && words[6] == "label";
        if !ok {
            return Err(manifest_err(
                line,
                format!("expected branch line, found `{text}`"),
            ));
        }
        let index: usize = parse(line, words[1], "branch index")?;
        if index != expected {
            return Err(manifest_err(line, format!("branch {index} out of order")));
        }
        let weight: f64 = parse(line, words[3], "weight")?;
        let swapped = match words[5] {
            "0" => false,
            "1" => true,
            other => return Err(manifest_err(line, format!("invalid swap flag `{other}`"))),
        };
        let label = words[7..].join(" ");
        let mut orbitals = Vec::with_capacity(n_electrons as usize);
        for _ in 0..n_electrons {
            let (oline, o) = h.keyed("orbital", 1)?;
            let name = o[0];
            if name.contains('/') || name.contains('\\') {
                return Err(manifest_err(
                    oline,
                    format!("orbital path `{name}` leaves the directory"),
                ));
            }
            orbitals.push(read_orbital(&grid, &dir.join(name))?);
        }
        branches.push(Branch {
            weight,
            swapped,
            label,
            orbitals,
        });
    }
    Witness::new(grid, n_electrons, branches)
}

fn read_orbital(grid: &Grid3, path: &Path) -> Result<Spinor> {
    let bytes = fs::read(path)?;
    let n = grid.len();
    let expected = 4 * 8 * n;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: bytes.len(),
        });
    }
    let v = read_f64s(&bytes);
    let up = (0..n).map(|i| Complex64::new(v[i], v[n + i])).collect();
    let dn = (0..n)
        .map(|i| Complex64::new(v[2 * n + i], v[3 * n + i]))
        .collect();
    Ok(Spinor {
        up: ComplexField::new(*grid, up)?,
        dn: ComplexField::new(*grid, dn)?,
    })
}

fn basis_str(b: Basis) -> String {
    match b {
        Basis::Direct => "direct".into(),
        Basis::SingleGrid => "single_grid".into(),
        Basis::Refined { rel_change } => format!("refined rel_change={rel_change:.6e}"),
    }
}

/// `key: value` blocks, one per condition.
pub fn format_check(rep: &CheckReport) -> String {
    let [nx, ny, nz] = rep.dims;
    let mut s = format!(
        "grid: {nx} {ny} {nz}\nelectrons: {}\nverdict: {}\nboundary_ratio: {:.6e}\nboundary_warning: {}\n",
        rep.n_electrons,
        rep.verdict(),
        rep.boundary_ratio,
        rep.boundary_warning
    );
    for c in &rep.conditions {
        let _ = write!(
            s,
            "\n[{}]\nverdict: {}\nbasis: {}\n",
            c.condition.key(),
            c.verdict,
            basis_str(c.basis)
        );
        for (k, v) in &c.values {
            let _ = writeln!(s, "{k}: {v:.12e}");
        }
        if let Some(m) = c.masked {
            let _ = writeln!(
                s,
                "masked_nodes: {}\nsignificant_masked_nodes: {}\ntotal_nodes: {}",
                m.masked, m.significant, m.total
            );
        }
        if let Some(n) = &c.note {
            let _ = writeln!(s, "note: {n}");
        }
    }
    s
}

pub fn format_corollary(rep: &CorollaryReport) -> String {
    format!(
        "[corollary]\nverdict: {}\nbasis: {}\ngrad_sqrt_rho_plus_sq: {:.12e}\ngrad_sqrt_rho_minus_sq: {:.12e}\n",
        rep.verdict,
        basis_str(rep.basis),
        rep.grad_sqrt_plus_sq,
        rep.grad_sqrt_minus_sq
    )
}

fn pf(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

pub fn format_verify(rep: &VerifyReport) -> String {
    let mut s = format!(
        "verdict: {}\nelectrons: {:.12e}\n",
        pf(rep.passed()),
        rep.electrons
    );
    let _ = write!(
        s,
        "\n[density]\nverdict: {}\nrelative_l1_mismatch: {:.6e}\n",
        pf(rep.density_pass),
        rep.density_mismatch
    );
    let _ = write!(s, "\n[gram]\nverdict: {}\n", pf(rep.gram_pass));
    for (i, d) in rep.gram_deviations.iter().enumerate() {
        let _ = writeln!(s, "branch_{i}_deviation: {d:.6e}");
    }
    let _ = write!(
        s,
        "\n[weights]\nverdict: {}\nsum_deviation: {:.6e}\n",
        pf(rep.weight_pass),
        rep.weight_sum_deviation
    );
    let _ = write!(
        s,
        "\n[kinetic]\nverdict: {}\ntotal: {:.12e}\nup: {:.12e}\ndn: {:.12e}\n",
        pf(rep.kinetic_pass),
        rep.kinetic,
        rep.kinetic_up,
        rep.kinetic_dn
    );
    let _ = write!(
        s,
        "\n[inequalities]\nverdict: {}\n",
        pf(rep.inequalities_pass)
    );
    for i in &rep.inequalities {
        let _ = writeln!(
            s,
            "{}: {:.12e} <= {:.12e} {}",
            i.name,
            i.lhs,
            i.rhs,
            pf(i.pass)
        );
    }
    let _ = write!(s, "\n[branch_det]\nverdict: {}\n", pf(rep.branch_det_pass));
    for (i, d) in rep.branch_dets.iter().enumerate() {
        let _ = writeln!(s, "branch_{i}_max_rel_det: {d:.6e}");
    }
    let o = &rep.occupations;
    let _ = write!(
        s,
        "\n[occupations]\nverdict: {}\nmin: {:.12e}\nmax: {:.12e}\ntrace: {:.12e}\n",
        pf(o.pass),
        o.min,
        o.max,
        o.trace
    );
    s
}
