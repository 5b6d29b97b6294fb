//! Small numerical kernels: adaptive quadrature, banded LU and symmetric tridiagonal eigenvalues.

use crate::error::{KitError, Result};

fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 64.0 * f64::EPSILON * (left.abs() + right.abs()) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // a few fixed panels so that narrow features are not missed by the first estimate
    const PANELS: usize = 8;
    let h = (b - a) / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let x0 = a + h * p as f64;
        let x1 = if p + 1 == PANELS { b } else { x0 + h };
        let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += simpson_rec(&f, x0, x1, f0, fm, f1, whole, tol / PANELS as f64, 48);
    }
    total
}

/// Quadrature split at the given interior breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts = vec![lo];
    pts.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
    pts.push(hi);
    pts.sort_by(|x, y| x.total_cmp(y));
    let n = (pts.len() - 1) as f64;
    let total: f64 = pts.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], tol / n)).sum();
    sign * total
}

/// Square band matrix in LAPACK-style storage with room for pivoting fill-in.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// `data[i][kl + j − i]` holds entry `(i, j)`, for `−kl ≤ j − i ≤ kl + ku`.
    data: Vec<Vec<f64>>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, data: vec![vec![0.0; 2 * kl + ku + 1]; n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = self.kl + j;
        if off < i {
            return None;
        }
        let k = off - i;
        (k < 2 * self.kl + self.ku + 1).then_some(k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[i][k])
    }

    /// Adds to entry `(i, j)`, which must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let ok = j + self.kl >= i && j <= i + self.ku;
        assert!(ok, "entry ({}, {}) outside band ({}, {})", i, j, self.kl, self.ku);
        let k = self.slot(i, j).expect("inside band");
        self.data[i][k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = rhs` for each right-hand side by Gaussian elimination with partial pivoting.
    pub fn solve(mut self, rhs: &mut [Vec<f64>]) -> Result<()> {
        let n = self.n;
        let width = self.kl + self.ku;
        let scale = self.data.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for col in 0..n {
            let last = (col + self.kl).min(n - 1);
            let mut piv = col;
            let mut best = self.get(col, col).abs();
            for r in col + 1..=last {
                let v = self.get(r, col).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= 1e-14 * scale {
                return Err(KitError::Numerical(format!("singular band matrix at column {}", col)));
            }
            let jmax = (col + width).min(n - 1);
            if piv != col {
                for j in col..=jmax {
                    let a = self.get(col, j);
                    let b = self.get(piv, j);
                    self.set_raw(col, j, b);
                    self.set_raw(piv, j, a);
                }
                for r in rhs.iter_mut() {
                    r.swap(col, piv);
                }
            }
            let d = self.get(col, col);
            for r in col + 1..=last {
                let f = self.get(r, col) / d;
                if f == 0.0 {
                    continue;
                }
                self.set_raw(r, col, 0.0);
                for j in col + 1..=jmax {
                    let v = self.get(col, j);
                    if v != 0.0 {
                        let k = self.slot(r, j).expect("fill-in inside band");
                        self.data[r][k] -= f * v;
                    }
                }
                for b in rhs.iter_mut() {
                    b[r] -= f * b[col];
                }
            }
        }
        for b in rhs.iter_mut() {
            for i in (0..n).rev() {
                let jmax = (i + width).min(n - 1);
                let mut s = b[i];
                for j in i + 1..=jmax {
                    s -= self.get(i, j) * b[j];
                }
                b[i] = s / self.get(i, i);
            }
        }
        Ok(())
    }

    fn set_raw(&mut self, i: usize, j: usize, v: f64) {
        match self.slot(i, j) {
            Some(k) => self.data[i][k] = v,
            None => assert!(v == 0.0, "nonzero outside band"),
        }
    }
}

/// Number of eigenvalues `< x` of the symmetric tridiagonal matrix `(diag, off)`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix, by bisection.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves a tridiagonal system with partial pivoting.
pub fn tridiagonal_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut a = BandMatrix::new(n, 1, 1);
    for i in 0..n {
        a.add(i, i, diag[i] - shift);
        if i + 1 < n {
            a.add(i, i + 1, off[i]);
            a.add(i + 1, i, off[i]);
        }
    }
    let mut b = vec![rhs.to_vec()];
    a.solve(&mut b)?;
    Ok(b.pop().expect("one rhs"))
}

/// Richardson extrapolation table for a quantity with an even-power error expansion.
pub fn romberg(values: &[f64]) -> Vec<Vec<f64>> {
    let mut table = vec![values.to_vec()];
    let mut factor = 4.0;
    while table.last().map_or(0, |r| r.len()) > 1 {
        let prev = table.last().expect("nonempty");
        let next: Vec<f64> = prev.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        table.push(next);
        factor *= 4.0;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_exponential() {
        let v = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-13);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        let w = integrate_with_breaks(|x| if x < 0.5 { 1.0 } else { 3.0 }, 0.0, 1.0, &[0.5], 1e-12);
        assert!((w - 2.0).abs() < 1e-12);
        assert!((integrate_with_breaks(|x| x, 1.0, 0.0, &[], 1e-12) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn band_solver_matches_dense() {
        let n = 30;
        let mut a = BandMatrix::new(n, 3, 2);
        for i in 0..n {
            for j in i.saturating_sub(3)..=(i + 2).min(n - 1) {
                // a zero diagonal forces pivoting
                let v = if i == j { 0.0 } else { ((i * 7 + j * 3) % 11) as f64 - 5.0 };
                a.add(i, j, v);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let mut rhs = vec![b];
        a.solve(&mut rhs).unwrap();
        for i in 0..n {
            assert!((rhs[0][i] - x[i]).abs() < 1e-9, "{} {}", rhs[0][i], x[i]);
        }
    }

    #[test]
    fn singular_band_matrix_reported() {
        let mut a = BandMatrix::new(3, 1, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        let mut rhs = vec![vec![1.0, 1.0, 1.0]];
        assert!(a.solve(&mut rhs).is_err());
    }

    #[test]
    fn tridiagonal_eigenvalues_of_laplacian() {
        let n = 20;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        for k in 0..n {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((tridiagonal_eigenvalue(&diag, &off, k) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn romberg_removes_even_powers() {
        let f = |h: f64| 1.0 + 3.0 * h * h - 2.0 * h.powi(4);
        let t = romberg(&[f(0.4), f(0.2), f(0.1)]);
        assert!((t[2][0] - 1.0).abs() < 1e-12);
    }
}
