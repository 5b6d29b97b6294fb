//! Linear Cauchy–Riemann operators `∂_s + i∂_t + b` on the strip `ℝ × [0,1]` with imaginary
//! boundary values: the model spectrum, weighted indices, kernels, the Γ-invariant and gluing.
//!
//! A function `Υ = u + iv` is discretized on a staggered grid: `u` at the interior nodes
//! `t = k h_t` (it vanishes at `t = 0, 1`) and `v` at the midpoints `t = (k + ½) h_t`. In the
//! interleaved order `v_{1/2}, u_1, v_{3/2}, …, v_{M−1/2}` the operator `Q = i∂_t + b` becomes a
//! symmetric tridiagonal matrix. In `s` the equation is discretized by the box scheme, and the
//! window ends carry spectral boundary conditions, which select the modes that extend to
//! decaying (or weight-admissible) solutions beyond the window.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};
use crate::numeric::{integrate_with_breaks, romberg, tridiagonal_eigenvalue, tridiagonal_solve, BandMatrix};
use crate::profile::Profile;

const QUAD_TOL: f64 = 1e-13;

fn check_alpha(alpha: f64) -> Result<()> {
    let r = alpha / PI;
    if !alpha.is_finite() || (r - r.round()).abs() < 1e-12 {
        return Err(KitError::Argument(format!("α = {} lies on the lattice πℤ", alpha)));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEntry {
    pub m: i64,
    pub lambda: f64,
    /// `(t, Re Ξ)` samples.
    pub re: Vec<(f64, f64)>,
    /// `(t, Im Ξ)` samples.
    pub im: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub alpha: f64,
    pub h_t: Option<f64>,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumResult {
    pub fn eigenvalue(&self, m: i64) -> Option<f64> {
        self.entries.iter().find(|e| e.m == m).map(|e| e.lambda)
    }
}

/// `λ_m = πm + α`, `Ξ_m = i·exp(−πimt)`.
pub fn q_spectrum(alpha: f64, ms: impl IntoIterator<Item = i64>) -> Result<SpectrumResult> {
    check_alpha(alpha)?;
    if !(0.0 < alpha && alpha < PI) {
        return Err(KitError::Argument(format!("α = {} outside (0, π)", alpha)));
    }
    let ts: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
    let entries = ms
        .into_iter()
        .map(|m| {
            let w = PI * m as f64;
            SpectrumEntry {
                m,
                lambda: w + alpha,
                // i·(cos(πmt) − i sin(πmt)) = sin(πmt) + i cos(πmt)
                re: ts.iter().map(|&t| (t, (w * t).sin())).collect(),
                im: ts.iter().map(|&t| (t, (w * t).cos())).collect(),
            }
        })
        .collect();
    Ok(SpectrumResult { alpha, h_t: None, entries })
}

/// Number of `t`-cells for a step.
pub fn cells(h_t: f64) -> Result<usize> {
    let m = (1.0 / h_t).round();
    if !(m >= 2.0) || ((1.0 / h_t) - m).abs() > 1e-9 * m {
        return Err(KitError::Argument(format!("h_t = {} must be 1/M with M ≥ 2", h_t)));
    }
    Ok(m as usize)
}

/// `t` of each unknown in interleaved order.
fn unknown_ts(m: usize) -> Vec<f64> {
    let h = 1.0 / m as f64;
    (0..2 * m - 1)
        .map(|i| if i % 2 == 0 { (i / 2) as f64 * h + 0.5 * h } else { i.div_ceil(2) as f64 * h })
        .collect()
}

/// Tridiagonal `Q_h` with diagonal `b(s, t_i)`.
fn q_matrix(m: usize, diag: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let inv = m as f64;
    let off = (0..2 * m - 2).map(|i| if i % 2 == 0 { inv } else { -inv }).collect();
    (diag, off)
}

fn split_components(m: usize, x: &[f64]) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let ts = unknown_ts(m);
    let mut re = vec![(0.0, 0.0)];
    let mut im = Vec::new();
    for (i, &v) in x.iter().enumerate() {
        if i % 2 == 0 {
            im.push((ts[i], v));
        } else {
            re.push((ts[i], v));
        }
    }
    re.push((1.0, 0.0));
    (re, im)
}

/// Eigenvalues of the staggered `Q_h` nearest to `πm + α`, with eigenvectors by inverse iteration.
pub fn discrete_q_spectrum(alpha: f64, h_t: f64, ms: impl IntoIterator<Item = i64>) -> Result<SpectrumResult> {
    check_alpha(alpha)?;
    let m_cells = cells(h_t)?;
    let (diag, off) = q_matrix(m_cells, vec![alpha; 2 * m_cells - 1]);
    let mid = m_cells as i64 - 1;
    let mut entries = Vec::new();
    for m in ms {
        let k = mid + m;
        if k < 0 || k >= 2 * m_cells as i64 - 1 {
            return Err(KitError::Argument(format!("mode {} is not resolved at h_t = {}", m, h_t)));
        }
        let lambda = tridiagonal_eigenvalue(&diag, &off, k as usize);
        let n = diag.len();
        let mut x = vec![1.0; n];
        let shift = lambda + 1e-10 * (1.0 + lambda.abs());
        for _ in 0..3 {
            x = tridiagonal_solve(&diag, &off, shift, &x)?;
            let norm = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            x.iter_mut().for_each(|v| *v /= norm);
        }
        if x[0] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let (re, im) = split_components(m_cells, &x);
        entries.push(SpectrumEntry { m, lambda, re, im });
    }
    Ok(SpectrumResult { alpha, h_t: Some(h_t), entries })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub m: i64,
    pub error_h: f64,
    pub error_half: f64,
    pub order: f64,
}

/// Errors against `πm + α` at `h_t` and `h_t/2`, and the observed order.
pub fn spectrum_convergence(alpha: f64, h_t: f64, ms: &[i64]) -> Result<Vec<ConvergenceRow>> {
    let a = discrete_q_spectrum(alpha, h_t, ms.iter().copied())?;
    let b = discrete_q_spectrum(alpha, h_t / 2.0, ms.iter().copied())?;
    Ok(ms
        .iter()
        .filter(|&&m| m != 0)
        .map(|&m| {
            let exact = PI * m as f64 + alpha;
            let e1 = (a.eigenvalue(m).unwrap_or(f64::NAN) - exact).abs();
            let e2 = (b.eigenvalue(m).unwrap_or(f64::NAN) - exact).abs();
            ConvergenceRow { m, error_h: e1, error_half: e2, order: (e1 / e2).log2() }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndKind {
    Negative,
    Positive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct End {
    pub kind: EndKind,
    pub mu: i64,
}

/// Integer weights, one per end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    pub ends: Vec<End>,
}

impl WeightVector {
    /// The strip: negative end at `s → −∞`, positive end at `s → +∞`.
    pub fn strip(mu_minus: i64, mu_plus: i64) -> Self {
        WeightVector {
            ends: vec![End { kind: EndKind::Negative, mu: mu_minus }, End { kind: EndKind::Positive, mu: mu_plus }],
        }
    }

    /// A disc whose first end is negative and all others positive.
    pub fn disc(mus: &[i64]) -> Self {
        WeightVector {
            ends: mus
                .iter()
                .enumerate()
                .map(|(i, &mu)| End { kind: if i == 0 { EndKind::Negative } else { EndKind::Positive }, mu })
                .collect(),
        }
    }

    fn strip_weights(&self) -> Result<(i64, i64)> {
        match self.ends.as_slice() {
            [End { kind: EndKind::Negative, mu: a }, End { kind: EndKind::Positive, mu: b }] => Ok((*a, *b)),
            _ => Err(KitError::Argument("a strip has one negative and one positive end, in that order".into())),
        }
    }
}

/// `1 − |Σ_−| + Σ_{Σ_±} ∓μ_ζ`.
pub fn weighted_index(w: &WeightVector) -> Result<i64> {
    if w.ends.is_empty() {
        return Err(KitError::Argument("at least one end is required".into()));
    }
    let negatives = w.ends.iter().filter(|e| e.kind == EndKind::Negative).count() as i64;
    let weights: i64 = w
        .ends
        .iter()
        .map(|e| match e.kind {
            EndKind::Positive => -e.mu,
            EndKind::Negative => e.mu,
        })
        .sum();
    Ok(1 - negatives + weights)
}

/// Coefficient profiles, window and grid of a strip problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripProblem {
    pub b: Profile,
    pub c: Profile,
    pub window: (f64, f64),
    pub h_s: f64,
    pub h_t: f64,
}

/// Tolerances for window validation and refinement.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StripOptions {
    /// Allowed deviation of `b` from its limits at the window edges.
    pub tail_tolerance: f64,
    /// Number of grid levels (each halves `h_s`).
    pub levels: usize,
}

impl Default for StripOptions {
    fn default() -> Self {
        StripOptions { tail_tolerance: 1e-6, levels: 3 }
    }
}

impl StripProblem {
    /// Asymptotic constants `(α_−, α_+)`.
    pub fn alphas(&self) -> Result<(f64, f64)> {
        let (l, r) = self.b.limits();
        let (l, r) = l
            .zip(r)
            .ok_or_else(|| KitError::Argument("b must have finite limits at both ends".into()))?;
        check_alpha(l)?;
        check_alpha(r)?;
        Ok((l, r))
    }

    /// Checks nondegeneracy, tails at the window edges and the support of `c`.
    pub fn validate(&self, opts: &StripOptions) -> Result<(f64, f64)> {
        let (s0, s1) = self.window;
        if !(s0 < s1) || !(self.h_s > 0.0) || self.h_s > (s1 - s0) {
            return Err(KitError::Argument(format!("bad window {:?} / h_s {}", self.window, self.h_s)));
        }
        cells(self.h_t)?;
        let (am, ap) = self.alphas()?;
        let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
        for &t in &ts {
            let dl = (self.b.eval(s0, t) - am).abs();
            let dr = (self.b.eval(s1, t) - ap).abs();
            if dl > opts.tail_tolerance || dr > opts.tail_tolerance {
                return Err(KitError::WindowTooSmall(format!(
                    "b deviates from its limits by {:.3e} / {:.3e} at the window edges",
                    dl, dr
                )));
            }
        }
        match self.c.support() {
            Some((a, b)) if a == b => {}
            Some((a, b)) if a >= s0 && b <= s1 => {}
            Some((a, b)) => {
                return Err(KitError::WindowTooSmall(format!(
                    "c is supported on [{}, {}], outside the window [{}, {}]",
                    a, b, s0, s1
                )))
            }
            None => {
                for &t in &ts {
                    let e = self.c.eval(s0, t).abs().max(self.c.eval(s1, t).abs());
                    if e > opts.tail_tolerance {
                        return Err(KitError::WindowTooSmall(format!("c is {:.3e} at the window edges", e)));
                    }
                }
            }
        }
        Ok((am, ap))
    }

    /// The same problem with the window enlarged by `fraction` of its length, split evenly.
    pub fn enlarged(&self, fraction: f64) -> Self {
        let (a, b) = self.window;
        let d = 0.5 * fraction * (b - a);
        StripProblem { window: (a - d, b + d), ..self.clone() }
    }

    fn grid(&self, h_s: f64) -> (usize, f64) {
        let len = self.window.1 - self.window.0;
        let j = (len / h_s).round().max(1.0) as usize;
        (j, len / j as f64)
    }

    /// `B(s) = ∫_0^s b̄`.
    pub fn b_integral(&self, s: f64) -> f64 {
        let b = &self.b;
        integrate_with_breaks(|x| b.mean(x), 0.0, s, &b.kinks(), QUAD_TOL)
    }
}

/// Eigenbasis of `Q_h` for constant `b = α`, columns sorted by eigenvalue (mode `m` at `M − 1 + m`).
fn mode_basis(m_cells: usize, alpha: f64) -> DMatrix<f64> {
    let n = 2 * m_cells - 1;
    let (diag, off) = q_matrix(m_cells, vec![alpha; n]);
    let mut q = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        q[(i, i)] = diag[i];
        if i + 1 < n {
            q[(i, i + 1)] = off[i];
            q[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(q);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (col, &k) in idx.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        // the v-components of mode 0 are positive (Ξ_0 = i)
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v = -v;
        }
        out.set_column(col, &v);
    }
    out
}

struct Assembled {
    rows: usize,
    cols: usize,
    n: usize,
    j: usize,
    h_s: f64,
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
}

/// Box-scheme rows with spectral conditions: modes `m ≥ μ_−` vanish at the left edge and
/// modes `m ≤ μ_+ − 1` at the right edge.
fn assemble(p: &StripProblem, h_s: f64, h_t: f64, mu: (i64, i64), alphas: (f64, f64), with_rhs: bool) -> Result<Assembled> {
    let m_cells = cells(h_t)?;
    let n = 2 * m_cells - 1;
    let (j_steps, h) = p.grid(h_s);
    let ts = unknown_ts(m_cells);
    let mid = m_cells as i64 - 1;
    let left = mode_basis(m_cells, alphas.0);
    let right = mode_basis(m_cells, alphas.1);
    let left_modes: Vec<usize> = (0..n).filter(|&c| c as i64 - mid >= mu.0).collect();
    let right_modes: Vec<usize> = (0..n).filter(|&c| (c as i64 - mid) < mu.1).collect();
    let rows = left_modes.len() + j_steps * n + right_modes.len();
    let cols = (j_steps + 1) * n;
    let mut entries = Vec::new();
    let mut rhs = vec![0.0; rows];
    let mut r = 0;
    for &c in &left_modes {
        for q in 0..n {
            entries.push((r, q, left[(q, c)]));
        }
        r += 1;
    }
    let inv_h = 1.0 / h;
    let off_val = m_cells as f64;
    for step in 0..j_steps {
        let s = p.window.0 + (step as f64 + 0.5) * h;
        let c0 = step * n;
        let c1 = c0 + n;
        for i in 0..n {
            let row = r + i;
            let b = 0.5 * p.b.eval(s, ts[i]);
            entries.push((row, c0 + i, -inv_h + b));
            entries.push((row, c1 + i, inv_h + b));
            for nb in [i.wrapping_sub(1), i + 1] {
                if nb < n {
                    // off-diagonal between positions (k, k+1) is +M for even k, −M for odd k
                    let lo = i.min(nb);
                    let v = if lo % 2 == 0 { off_val } else { -off_val };
                    entries.push((row, c0 + nb, 0.5 * v));
                    entries.push((row, c1 + nb, 0.5 * v));
                }
            }
            if with_rhs && i % 2 == 0 {
                rhs[row] = p.c.eval(s, ts[i]);
            }
        }
        r += n;
    }
    let cj = j_steps * n;
    for &c in &right_modes {
        for q in 0..n {
            entries.push((r, cj + q, right[(q, c)]));
        }
        r += 1;
    }
    debug_assert_eq!(r, rows);
    Ok(Assembled { rows, cols, n, j: j_steps, h_s: h, entries, rhs })
}

/// Solves `(∂_s + Q)Υ = i c` with trivial weights; returns the unknowns per `s`-node.
fn solve_inhomogeneous(p: &StripProblem, h_s: f64, h_t: f64, alphas: (f64, f64)) -> Result<(Vec<Vec<f64>>, f64)> {
    let a = assemble(p, h_s, h_t, (0, 0), alphas, true)?;
    if a.rows != a.cols {
        return Err(KitError::Numerical("inhomogeneous solve needs index 0".into()));
    }
    let bw = 2 * a.n;
    let mut m = BandMatrix::new(a.rows, bw, bw);
    for &(r, c, v) in &a.entries {
        m.add(r, c, v);
    }
    let mut rhs = vec![a.rhs];
    m.solve(&mut rhs)?;
    let x = rhs.pop().expect("one rhs");
    Ok(((0..=a.j).map(|j| x[j * a.n..(j + 1) * a.n].to_vec()).collect(), a.h_s))
}

/// Coefficient of `Ξ_0` in a column of unknowns: the mean of the `v`-components.
fn mode0(y: &[f64]) -> f64 {
    let vs: Vec<f64> = y.iter().step_by(2).copied().collect();
    vs.iter().sum::<f64>() / vs.len() as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaLevel {
    pub h_s: f64,
    pub h_t: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaResult {
    pub gamma: f64,
    pub levels: Vec<GammaLevel>,
    /// Richardson table; the last row is the extrapolated value.
    pub extrapolation: Vec<Vec<f64>>,
    /// `(s, y₀(s))` on the finest grid, subsampled.
    pub mode0_profile: Vec<(f64, f64)>,
    pub sign_stable: bool,
}

impl GammaResult {
    pub fn sign(&self) -> i32 {
        if self.gamma > 0.0 {
            1
        } else if self.gamma < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// Γ from the discretized equation, Richardson-extrapolated over the grid levels.
pub fn gamma_pde(p: &StripProblem, opts: &StripOptions) -> Result<GammaResult> {
    let alphas = p.validate(opts)?;
    let levels = opts.levels.max(1);
    let refine_t = !(p.b.is_t_independent() && p.c.is_t_independent());
    let eb = p.b_integral(p.window.1).exp();
    let specs: Vec<(f64, f64)> = (0..levels)
        .map(|l| {
            let f = (1u64 << l) as f64;
            (p.h_s / f, if refine_t { p.h_t / f } else { p.h_t })
        })
        .collect();
    let sols: Vec<Result<(Vec<Vec<f64>>, f64)>> =
        specs.par_iter().map(|&(hs, ht)| solve_inhomogeneous(p, hs, ht, alphas)).collect();
    let mut out_levels = Vec::new();
    let mut finest = None;
    for ((_, ht), sol) in specs.iter().zip(sols) {
        let (ys, h) = sol?;
        let g = eb * mode0(ys.last().expect("nonempty grid"));
        out_levels.push(GammaLevel { h_s: h, h_t: *ht, gamma: g });
        finest = Some((ys, h));
    }
    let raw: Vec<f64> = out_levels.iter().map(|l| l.gamma).collect();
    let table = romberg(&raw);
    let gamma = table.last().and_then(|r| r.first()).copied().unwrap_or(raw[0]);
    let (ys, h) = finest.expect("at least one level");
    let stride = (ys.len() / 200).max(1);
    let mode0_profile = ys
        .iter()
        .enumerate()
        .step_by(stride)
        .map(|(j, y)| (p.window.0 + j as f64 * h, mode0(y)))
        .collect();
    let sgn = |x: f64| x.partial_cmp(&0.0);
    let tail = &raw[raw.len().saturating_sub(2)..];
    let sign_stable = tail.iter().all(|&x| sgn(x) == sgn(gamma));
    Ok(GammaResult { gamma, levels: out_levels, extrapolation: table, mode0_profile, sign_stable })
}

/// `∫ exp(B(σ)) c(σ) dσ` for `t`-independent profiles.
pub fn gamma_quadrature(b: &Profile, c: &Profile) -> Result<f64> {
    if !(b.is_t_independent() && c.is_t_independent()) {
        return Err(KitError::Argument("the quadrature oracle needs t-independent profiles".into()));
    }
    let (lo, hi) = match c.support() {
        Some((a, z)) if a == z => return Ok(0.0),
        Some(s) => s,
        None => return Err(KitError::Argument("c must be compactly supported".into())),
    };
    let mut breaks = b.kinks();
    breaks.extend(c.kinks());
    // B on [lo, hi] accumulated panel by panel from B(lo)
    let b_lo = integrate_with_breaks(|x| b.mean(x), 0.0, lo, &breaks, QUAD_TOL);
    let panels = 64;
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    let mut b_acc = b_lo;
    for k in 0..panels {
        let a0 = lo + h * k as f64;
        let a1 = if k + 1 == panels { hi } else { a0 + h };
        let base = b_acc;
        let inner = |x: f64| {
            let bx = base + integrate_with_breaks(|y| b.mean(y), a0, x, &breaks, 1e-15);
            bx.exp() * c.mean(x)
        };
        total += integrate_with_breaks(inner, a0, a1, &breaks, QUAD_TOL / panels as f64);
        b_acc += integrate_with_breaks(|y| b.mean(y), a0, a1, &breaks, 1e-15);
    }
    Ok(total)
}

/// Kernel and cokernel of the weighted operator on the window.
#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub weights: (i64, i64),
    pub formula_index: i64,
    pub rows: usize,
    pub cols: usize,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    /// Smallest singular value counted as nonzero.
    pub margin: f64,
    /// Largest singular value counted as zero (0 if none).
    pub largest_zero: f64,
    pub gap: f64,
    /// Per kernel vector: leading coefficients at the negative and positive end.
    pub end_coefficients: Vec<(f64, f64)>,
}

impl IndexReport {
    pub fn numerical_index(&self) -> i64 {
        self.kernel_dim as i64 - self.cokernel_dim as i64
    }

    /// Whether each leading-coefficient map is nonzero on the kernel.
    pub fn coefficient_maps_nonzero(&self, tol: f64) -> (bool, bool) {
        let neg = self.end_coefficients.iter().map(|c| c.0 * c.0).sum::<f64>().sqrt();
        let pos = self.end_coefficients.iter().map(|c| c.1 * c.1).sum::<f64>().sqrt();
        (neg > tol, pos > tol)
    }
}

pub const ZERO_SINGULAR_VALUE: f64 = 1e-8;

/// Singular values of the discretized weighted operator; kernel vectors give the `Λ_ζ` data.
pub fn injectivity_margin(p: &StripProblem, w: &WeightVector) -> Result<IndexReport> {
    let mu = w.strip_weights()?;
    let alphas = p.alphas()?;
    let a = assemble(p, p.h_s, p.h_t, mu, alphas, false)?;
    let size = a.rows.max(a.cols);
    let mut m = DMatrix::<f64>::zeros(size, size);
    for &(r, c, v) in &a.entries {
        m[(r, c)] += v;
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| KitError::Numerical("SVD did not converge".into()))?;
    let sv = &svd.singular_values;
    // padding rows or columns contribute exact zeros
    let zero_idx: Vec<usize> = (0..size).filter(|&i| sv[i] < ZERO_SINGULAR_VALUE).collect();
    let rank = size - zero_idx.len();
    let margin = (0..size).filter(|&i| sv[i] >= ZERO_SINGULAR_VALUE).map(|i| sv[i]).fold(f64::INFINITY, f64::min);
    let largest_zero = zero_idx.iter().map(|&i| sv[i]).fold(0.0, f64::max);
    let m_cells = cells(p.h_t)?;
    let mid = m_cells as i64 - 1;
    let left = mode_basis(m_cells, alphas.0);
    let right = mode_basis(m_cells, alphas.1);
    let neg_mode = (mid + mu.0 - 1) as usize;
    let pos_mode = (mid + mu.1) as usize;
    let n = a.n;
    let mut end_coefficients = Vec::new();
    for &i in &zero_idx {
        let v = v_t.row(i);
        let first: Vec<f64> = (0..n).map(|q| v[q]).collect();
        let last: Vec<f64> = (0..n).map(|q| v[a.j * n + q]).collect();
        let dot = |basis: &DMatrix<f64>, col: usize, y: &[f64]| (0..n).map(|q| basis[(q, col)] * y[q]).sum::<f64>();
        let cn = if neg_mode < n { dot(&left, neg_mode, &first) } else { 0.0 };
        let cp = if pos_mode < n { dot(&right, pos_mode, &last) } else { 0.0 };
        end_coefficients.push((cn, cp));
    }
    Ok(IndexReport {
        weights: mu,
        formula_index: weighted_index(w)?,
        rows: a.rows,
        cols: a.cols,
        kernel_dim: a.cols - rank,
        cokernel_dim: a.rows - rank,
        margin,
        largest_zero,
        gap: margin - largest_zero,
        end_coefficients,
    })
}

/// `P1` glued at its positive end to the negative end of `P2`, in the coordinates of `P2`.
pub fn glue_strip_problems(p1: &StripProblem, p2: &StripProblem, g: f64) -> Result<StripProblem> {
    let (_, a1) = p1.alphas()?;
    let (a2, _) = p2.alphas()?;
    if (a1 - a2).abs() > 1e-12 {
        return Err(KitError::Argument(format!("asymptotic constants differ at the glued ends: {} vs {}", a1, a2)));
    }
    if !(g > 0.0) {
        return Err(KitError::Argument("gluing length must be positive".into()));
    }
    let b = Profile::sum(vec![p1.b.clone().shifted(-g), p2.b.clone(), Profile::constant(-a1)]);
    let c = Profile::sum(vec![p1.c.clone().shifted(-g), p2.c.clone()]);
    Ok(StripProblem {
        b,
        c,
        window: (p1.window.0 - g, p2.window.1.max(p1.window.1 - g)),
        h_s: p1.h_s.min(p2.h_s),
        h_t: p1.h_t.min(p2.h_t),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub g: f64,
    pub gamma_glued: f64,
    pub rescaled: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub lambda0: f64,
    pub gamma_reference: f64,
    pub rows: Vec<ScalingRow>,
    pub monotone: bool,
    pub sign_persists: bool,
}

/// `Γ(glued)·exp(λ₀g)/Γ(P1)` over the gluing lengths, with deviations from the last length.
pub fn scaling_report(p1: &StripProblem, p2: &StripProblem, gs: &[f64], opts: &StripOptions) -> Result<ScalingReport> {
    if p1.c.is_zero() == p2.c.is_zero() {
        return Err(KitError::Argument("exactly one of the two problems must carry c".into()));
    }
    let carrier_first = !p1.c.is_zero();
    let (_, lambda0) = p1.alphas()?;
    let reference = gamma_pde(if carrier_first { p1 } else { p2 }, opts)?.gamma;
    let glued: Vec<Result<f64>> = gs
        .par_iter()
        .map(|&g| Ok(gamma_pde(&glue_strip_problems(p1, p2, g)?, opts)?.gamma))
        .collect();
    let mut rows = Vec::new();
    for (&g, gamma) in gs.iter().zip(glued) {
        let gamma = gamma?;
        let factor = if carrier_first { (lambda0 * g).exp() } else { 1.0 };
        rows.push(ScalingRow { g, gamma_glued: gamma, rescaled: gamma * factor / reference, deviation: 0.0 });
    }
    let last = rows.last().map(|r| r.rescaled).unwrap_or(0.0);
    for r in rows.iter_mut() {
        r.deviation = (r.rescaled - last).abs();
    }
    let monotone = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    let sign_persists = rows.iter().all(|r| r.gamma_glued.signum() == reference.signum() && r.gamma_glued != 0.0);
    Ok(ScalingReport { lambda0, gamma_reference: reference, rows, monotone, sign_persists })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_4};

    fn e_minus_one() -> StripProblem {
        StripProblem {
            b: Profile::constant(1.0),
            c: Profile::boxed(0.0, 1.0, 1.0, 0.01),
            window: (-1.0, 2.0),
            h_s: 0.004,
            h_t: 0.25,
        }
    }

    #[test]
    fn analytic_spectrum() {
        let s = q_spectrum(FRAC_PI_4, -1..=1).unwrap();
        assert!((4.0 * s.eigenvalue(0).unwrap() - std::f64::consts::PI).abs() < 1e-14);
        assert!((s.eigenvalue(1).unwrap() - 5.0 * FRAC_PI_4).abs() < 1e-15);
        assert!((s.eigenvalue(-1).unwrap() + 3.0 * FRAC_PI_4).abs() < 1e-15);
        let e0 = &s.entries[1];
        assert!(e0.re.iter().all(|&(_, x)| x == 0.0) && e0.im.iter().all(|&(_, x)| x == 1.0));
        assert!(q_spectrum(PI, 0..=0).is_err());
        assert!(q_spectrum(0.0, 0..=0).is_err());
    }

    #[test]
    fn discrete_spectrum_is_second_order() {
        let s = discrete_q_spectrum(FRAC_PI_4, 1.0 / 400.0, -2..=2).unwrap();
        for e in &s.entries {
            assert!((e.lambda - (PI * e.m as f64 + FRAC_PI_4)).abs() < 1e-3);
        }
        let zero = &s.entries[2];
        assert!(zero.re.iter().all(|&(_, x)| x.abs() < 1e-8));
        assert!(zero.im.iter().all(|&(_, x)| (x - 1.0).abs() < 1e-8));
        let rows = spectrum_convergence(FRAC_PI_4, 1.0 / 400.0, &[-2, -1, 1, 2]).unwrap();
        assert!(rows.iter().all(|r| r.order > 1.9), "{:?}", rows);
    }

    #[test]
    fn weighted_index_examples() {
        assert_eq!(weighted_index(&WeightVector::strip(0, 0)).unwrap(), 0);
        assert_eq!(weighted_index(&WeightVector::strip(1, 0)).unwrap(), 1);
        assert_eq!(weighted_index(&WeightVector::disc(&[1, 0, 0, 0])).unwrap(), 1);
        assert!(weighted_index(&WeightVector { ends: vec![] }).is_err());
    }

    fn small_strip() -> StripProblem {
        StripProblem {
            b: Profile::sum(vec![Profile::constant(FRAC_PI_4), Profile::bump(0.0, 1.0, 0.3)]),
            c: Profile::constant(0.0),
            window: (-3.0, 3.0),
            h_s: 0.1,
            h_t: 1.0 / 6.0,
        }
    }

    #[test]
    fn kernel_dimension_matches_index() {
        let p = small_strip();
        for mu in [-1, 0, 1, 2] {
            let r = injectivity_margin(&p, &WeightVector::strip(mu, 0)).unwrap();
            assert_eq!(r.numerical_index(), r.formula_index, "μ = {}", mu);
            assert_eq!(r.kernel_dim as i64, mu.max(0));
            assert_eq!(r.cokernel_dim as i64, (-mu).max(0));
            assert!(r.gap >= 1e-6 && r.margin > 1e-3, "{:?}", r);
        }
        let r = injectivity_margin(&p, &WeightVector::strip(2, 0)).unwrap();
        assert_eq!(r.coefficient_maps_nonzero(1e-6), (true, true));
    }

    #[test]
    fn gamma_of_zero_c_vanishes() {
        let p = StripProblem { c: Profile::constant(0.0), ..e_minus_one() };
        assert_eq!(gamma_pde(&p, &StripOptions::default()).unwrap().gamma, 0.0);
        assert_eq!(gamma_quadrature(&p.b, &p.c).unwrap(), 0.0);
    }

    #[test]
    fn gamma_e_minus_one() {
        let p = e_minus_one();
        let q = gamma_quadrature(&p.b, &p.c).unwrap();
        let r = gamma_pde(&p, &StripOptions::default()).unwrap();
        assert!((r.gamma - (E - 1.0)).abs() < 1e-4, "{}", r.gamma);
        assert!((r.gamma - q).abs() / q.abs().max(1.0) < 1e-6, "{} vs {}", r.gamma, q);
        assert!(r.sign_stable);
        let neg = StripProblem { c: p.c.clone().scaled(-1.0), ..p };
        assert!(gamma_quadrature(&neg.b, &neg.c).unwrap() < 0.0);
    }

    #[test]
    fn window_checks() {
        let mut p = e_minus_one();
        p.window = (0.5, 2.0);
        assert!(matches!(gamma_pde(&p, &StripOptions::default()), Err(KitError::WindowTooSmall(_))));
        let q = StripProblem {
            b: Profile::Tanh { center: 0.0, width: 1.0, left: 0.5, right: 1.0 },
            window: (-3.0, 3.0),
            ..e_minus_one()
        };
        assert!(matches!(q.validate(&StripOptions::default()), Err(KitError::WindowTooSmall(_))));
    }

    #[test]
    fn gluing_rejects_mismatched_constants() {
        let p1 = StripProblem { b: Profile::constant(1.0), ..e_minus_one() };
        let p2 = StripProblem { b: Profile::constant(0.5), c: Profile::constant(0.0), ..e_minus_one() };
        assert!(glue_strip_problems(&p1, &p2, 5.0).is_err());
        let z1 = StripProblem { c: Profile::constant(0.0), ..e_minus_one() };
        let z2 = z1.clone();
        let g = glue_strip_problems(&z1, &z2, 5.0).unwrap();
        assert_eq!(gamma_pde(&g, &StripOptions::default()).unwrap().gamma, 0.0);
    }
}
