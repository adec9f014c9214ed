use super::GridValue;

/// Finite-difference scheme for first derivatives on a uniform line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Stencil {
    /// Three-point central differences, three-point one-sided at the ends.
    Second,
    /// Five-point central differences, five-point one-sided near the ends.
    /// Lines with fewer than five nodes fall back to [`Stencil::Second`].
    #[default]
    Fourth,
}

impl Stencil {
    pub(crate) fn differentiate<T: GridValue>(self, f: &[T], h: f64, out: &mut [T]) {
        let n = f.len();
        debug_assert!(n >= 3 && out.len() == n);
        match self {
            Stencil::Fourth if n >= 5 => fourth(f, h, out),
            _ => second(f, h, out),
        }
    }
}

fn second<T: GridValue>(f: &[T], h: f64, out: &mut [T]) {
    let n = f.len();
    let c = 0.5 / h;
    out[0] = (f[1] * 4.0 - f[0] * 3.0 - f[2]) * c;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) * c;
    }
    out[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * c;
}

fn fourth<T: GridValue>(f: &[T], h: f64, out: &mut [T]) {
    let n = f.len();
    let c = 1.0 / (12.0 * h);
    out[0] = (f[1] * 48.0 - f[0] * 25.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0) * c;
    out[1] = (f[2] * 18.0 - f[0] * 3.0 - f[1] * 10.0 - f[3] * 6.0 + f[4]) * c;
    for i in 2..n - 2 {
        out[i] = ((f[i + 1] - f[i - 1]) * 8.0 - (f[i + 2] - f[i - 2])) * c;
    }
    let m = n - 1;
    out[m] =
        (f[m] * 25.0 - f[m - 1] * 48.0 + f[m - 2] * 36.0 - f[m - 3] * 16.0 + f[m - 4] * 3.0) * c;
    out[m - 1] = (f[m] * 3.0 + f[m - 1] * 10.0 - f[m - 2] * 18.0 + f[m - 3] * 6.0 - f[m - 4]) * c;
}
