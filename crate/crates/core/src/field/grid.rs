use crate::error::{Error, Result};

/// Minimum number of nodes per axis.
pub const MIN_NODES: usize = 4;

/// Coordinate axis of a [`Grid3`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }
}

/// Uniform tensor-product grid over an axis-aligned box (Bohr).
///
/// Nodes include both faces of the box, so the spacing along an axis is
/// `(hi - lo) / (n - 1)`. Flat storage is C order over `(ix, iy, iz)` with
/// `iz` fastest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid3 {
    dims: [usize; 3],
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Grid3 {
    pub fn new(dims: [usize; 3], lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if dims[a] < MIN_NODES {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} nodes, need at least {MIN_NODES}",
                    dims[a]
                )));
            }
            if !(lo[a].is_finite() && hi[a].is_finite()) || hi[a] <= lo[a] {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} bounds [{}, {}] are not an increasing finite interval",
                    lo[a], hi[a]
                )));
            }
        }
        dims.iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::InvalidGrid("grid size overflows usize".into()))?;
        Ok(Grid3 { dims, lo, hi })
    }

    /// Cube `[lo, hi]^3` with `n` nodes per axis.
    pub fn cubic(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Grid3::new([n; 3], [lo; 3], [hi; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn lo(&self) -> [f64; 3] {
        self.lo
    }

    pub fn hi(&self) -> [f64; 3] {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| (self.hi[a] - self.lo[a]) / (self.dims[a] - 1) as f64)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Node coordinate along one axis.
    pub fn coord(&self, axis: Axis, i: usize) -> f64 {
        let a = axis.index();
        // Evaluate from the nearer face so the last node lands exactly on hi.
        let n = self.dims[a] - 1;
        let t = i as f64 / n as f64;
        if 2 * i <= n {
            self.lo[a] + (self.hi[a] - self.lo[a]) * t
        } else {
            self.hi[a] - (self.hi[a] - self.lo[a]) * (1.0 - t)
        }
    }

    pub fn axis_coords(&self, axis: Axis) -> Vec<f64> {
        (0..self.dims[axis.index()])
            .map(|i| self.coord(axis, i))
            .collect()
    }

    pub fn point(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        [
            self.coord(Axis::X, ix),
            self.coord(Axis::Y, iy),
            self.coord(Axis::Z, iz),
        ]
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let iz = idx % self.dims[2];
        let rest = idx / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], iz]
    }

    /// Flat-index stride between neighbours along `axis`.
    pub fn stride(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.dims[1] * self.dims[2],
            Axis::Y => self.dims[2],
            Axis::Z => 1,
        }
    }

    /// Trapezoidal weights along one axis.
    pub fn axis_weights(&self, axis: Axis) -> Vec<f64> {
        let n = self.dims[axis.index()];
        let h = self.spacing()[axis.index()];
        let mut w = vec![h; n];
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
        w
    }

    /// Whether a flat index lies on a face of the box.
    pub fn on_boundary(&self, idx: usize) -> bool {
        let p = self.unravel(idx);
        (0..3).any(|a| p[a] == 0 || p[a] + 1 == self.dims[a])
    }

    /// Same node layout (dims and box bounds, compared exactly).
    pub fn same_as(&self, other: &Grid3) -> bool {
        self == other
    }

    pub fn ensure_same(&self, other: &Grid3) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?}/{:?}..{:?} vs {:?}/{:?}..{:?}",
                self.dims, self.lo, self.hi, other.dims, other.lo, other.hi
            )))
        }
    }

    /// Iterate over every node as `(flat index, [x, y, z])`.
    pub fn points(&self) -> impl Iterator<Item = (usize, [f64; 3])> + '_ {
        let xs = self.axis_coords(Axis::X);
        let ys = self.axis_coords(Axis::Y);
        let zs = self.axis_coords(Axis::Z);
        (0..self.len()).map(move |idx| {
            let [ix, iy, iz] = self.unravel(idx);
            (idx, [xs[ix], ys[iy], zs[iz]])
        })
    }
}
