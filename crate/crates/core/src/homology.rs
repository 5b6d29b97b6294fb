//! Exact integer homology via Smith normal form.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};

/// Dense integer matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(KitError::Argument(format!("row {} has length {} (expected {})", i, r.len(), cols)));
            }
            for (j, v) in r.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, BigInt::from(v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "shape mismatch in product");
        (0..self.rows)
            .map(|i| {
                let mut s = BigInt::zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        s += self.get(i, j) * x;
                    }
                }
                s
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| -v).collect() }
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "row counts differ");
        let mut out = IntMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// Places `block` with its top-left corner at `(r, c)`.
    pub fn put(&mut self, r: usize, c: usize, block: &IntMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r + i, c + j, block.get(i, j).clone());
            }
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] -= q * row[src]`.
    fn row_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j];
            if !v.is_zero() {
                let d = v * q;
                self.data[dst * self.cols + j] -= d;
            }
        }
    }

    /// `col[dst] -= q * col[src]`.
    fn col_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src];
            if !v.is_zero() {
                let d = v * q;
                self.data[i * self.cols + dst] -= d;
            }
        }
    }

    fn neg_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[r * self.cols + j];
            *v = -std::mem::take(v);
        }
    }

    /// Determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }
}

/// Result of a Smith normal form computation: `S = U·M·V`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
}

impl Snf {
    /// Nonzero invariant factors in order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.s.get(i, i).clone()).collect()
    }
}

fn min_abs_pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows {
        for j in t..a.cols {
            let v = a.get(i, j);
            if v.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| v.abs() < a.get(bi, bj).abs()) {
                best = Some((i, j));
                if v.abs().is_one() {
                    return best;
                }
            }
        }
    }
    best
}

fn snf_core(m: &IntMatrix, track: bool) -> Snf {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = if track { IntMatrix::identity(rows) } else { IntMatrix::zeros(0, 0) };
    let mut v = if track { IntMatrix::identity(cols) } else { IntMatrix::zeros(0, 0) };
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = min_abs_pivot(&a, t) else { break };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        if track {
            u.swap_rows(t, pi);
            v.swap_cols(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = a.get(i, t) / a.get(t, t);
                if !q.is_zero() {
                    a.row_sub(i, t, &q);
                    if track {
                        u.row_sub(i, t, &q);
                    }
                }
                if !a.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = a.get(t, j) / a.get(t, t);
                if !q.is_zero() {
                    a.col_sub(j, t, &q);
                    if track {
                        v.col_sub(j, t, &q);
                    }
                }
                if !a.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // move the smallest remainder in row/column t to the pivot
                let mut best = (t, t);
                for i in t + 1..rows {
                    let x = a.get(i, t);
                    if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    let x = a.get(t, j);
                    if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    a.swap_rows(t, best.0);
                    if track {
                        u.swap_rows(t, best.0);
                    }
                }
                if best.1 != t {
                    a.swap_cols(t, best.1);
                    if track {
                        v.swap_cols(t, best.1);
                    }
                }
                continue;
            }
            let p = a.get(t, t).clone();
            let mut fix = None;
            'outer: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !a.get(i, j).is_multiple_of(&p) {
                        fix = Some(i);
                        break 'outer;
                    }
                }
            }
            match fix {
                Some(i) => {
                    let m1 = BigInt::from(-1);
                    a.row_sub(t, i, &m1);
                    if track {
                        u.row_sub(t, i, &m1);
                    }
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.neg_row(t);
            if track {
                u.neg_row(t);
            }
        }
        t += 1;
    }
    Snf { u, s: a, v, rank: t }
}

/// Smith normal form with unimodular transforms `U`, `V` such that `S = U·M·V`.
pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    snf_core(m, true)
}

/// Invariant factors only (no transforms).
pub fn invariant_factors(m: &IntMatrix) -> Vec<BigInt> {
    snf_core(m, false).invariant_factors()
}

/// Checks `S = U·M·V`, diagonal shape, divisibility and `|det U| = |det V| = 1`.
pub fn verify_snf(m: &IntMatrix, r: &Snf) -> bool {
    if r.u.mul(m).mul(&r.v) != r.s {
        return false;
    }
    for i in 0..r.s.rows {
        for j in 0..r.s.cols {
            if i != j && !r.s.get(i, j).is_zero() {
                return false;
            }
        }
    }
    let d = r.invariant_factors();
    for i in 0..d.len() {
        if !d[i].is_positive() {
            return false;
        }
        if i + 1 < d.len() && !d[i + 1].is_multiple_of(&d[i]) {
            return false;
        }
    }
    for i in d.len()..r.s.rows.min(r.s.cols) {
        if !r.s.get(i, i).is_zero() {
            return false;
        }
    }
    r.u.determinant().abs().is_one() && r.v.determinant().abs().is_one()
}

/// Basis (as columns) of the kernel lattice of `m`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let r = smith_normal_form(m);
    let n = m.cols;
    let mut k = IntMatrix::zeros(n, n - r.rank);
    for j in r.rank..n {
        for i in 0..n {
            k.set(i, j - r.rank, r.v.get(i, j).clone());
        }
    }
    k
}

/// An integer solution of `m·x = t`, if one exists.
pub fn solve_integer(m: &IntMatrix, t: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(m.rows, t.len(), "right-hand side has the wrong length");
    let r = smith_normal_form(m);
    let ut = r.u.mul_vec(t);
    let mut y = vec![BigInt::zero(); m.cols];
    for (i, val) in ut.iter().enumerate() {
        if i < r.rank {
            let s = r.s.get(i, i);
            if !val.is_multiple_of(s) {
                return None;
            }
            y[i] = val / s;
        } else if !val.is_zero() {
            return None;
        }
    }
    Some(r.v.mul_vec(&y))
}

/// Bounded cochain complex `C^k → C^{k+1}` of free abelian groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntChainComplex {
    pub start: i64,
    ranks: Vec<usize>,
    /// `diffs[i]` maps degree `start+i` to `start+i+1`.
    diffs: Vec<IntMatrix>,
}

/// Homology in one degree: free rank and torsion invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub betti: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

impl IntChainComplex {
    pub fn new(start: i64, ranks: Vec<usize>, diffs: Vec<IntMatrix>) -> Result<Self> {
        if !ranks.is_empty() && diffs.len() != ranks.len() - 1 {
            return Err(KitError::Argument("need one differential between consecutive degrees".into()));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.rows() != ranks[i + 1] || d.cols() != ranks[i] {
                return Err(KitError::Argument(format!("differential {} has the wrong shape", i)));
            }
        }
        let c = IntChainComplex { start, ranks, diffs };
        if !c.squares_to_zero() {
            return Err(KitError::Structure("differential does not square to zero".into()));
        }
        Ok(c)
    }

    pub fn zero() -> Self {
        IntChainComplex { start: 0, ranks: Vec::new(), diffs: Vec::new() }
    }

    /// Number of degree slots.
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank(&self, slot: usize) -> usize {
        self.ranks.get(slot).copied().unwrap_or(0)
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank_at(&self, deg: i64) -> usize {
        let s = deg - self.start;
        if s < 0 {
            0
        } else {
            self.rank(s as usize)
        }
    }

    pub fn diff(&self, slot: usize) -> &IntMatrix {
        &self.diffs[slot]
    }

    /// Differential from degree `deg`, zero outside the stored range.
    pub fn diff_at(&self, deg: i64) -> IntMatrix {
        let s = deg - self.start;
        if s >= 0 && (s as usize) < self.diffs.len() {
            self.diffs[s as usize].clone()
        } else {
            IntMatrix::zeros(self.rank_at(deg + 1), self.rank_at(deg))
        }
    }

    pub fn degrees(&self) -> std::ops::Range<i64> {
        self.start..self.start + self.ranks.len() as i64
    }

    pub fn squares_to_zero(&self) -> bool {
        self.diffs.windows(2).all(|w| w[1].mul(&w[0]).is_zero())
    }

    /// Kernel basis of the differential leaving `slot`, as columns.
    pub fn cycle_basis(&self, slot: usize) -> IntMatrix {
        if slot < self.diffs.len() {
            kernel_basis(&self.diffs[slot])
        } else {
            IntMatrix::identity(self.rank(slot))
        }
    }

    /// Matrix of the differential arriving at `slot`.
    pub fn boundary_matrix(&self, slot: usize) -> IntMatrix {
        if slot > 0 && slot - 1 < self.diffs.len() {
            self.diffs[slot - 1].clone()
        } else {
            IntMatrix::zeros(self.rank(slot), 0)
        }
    }

    /// Degreewise direct sum.
    pub fn direct_sum(&self, other: &IntChainComplex) -> IntChainComplex {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let lo = self.start.min(other.start);
        let hi = (self.start + self.len() as i64).max(other.start + other.len() as i64);
        let ranks: Vec<usize> = (lo..hi).map(|k| self.rank_at(k) + other.rank_at(k)).collect();
        let diffs = (lo..hi - 1)
            .map(|k| {
                let a = self.diff_at(k);
                let b = other.diff_at(k);
                let mut m = IntMatrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
                m.put(0, 0, &a);
                m.put(a.rows(), a.cols(), &b);
                m
            })
            .collect();
        IntChainComplex { start: lo, ranks, diffs }
    }
}

/// `H^k = ker d_k / im d_{k-1}` for every stored degree.
pub fn homology(c: &IntChainComplex) -> BTreeMap<i64, HomologyGroup> {
    let facs: Vec<Vec<BigInt>> = (0..c.diffs.len()).into_par_iter().map(|i| invariant_factors(&c.diffs[i])).collect();
    let mut out = BTreeMap::new();
    for s in 0..c.len() {
        let out_rank = if s < facs.len() { facs[s].len() } else { 0 };
        let (in_rank, torsion) = if s > 0 && s - 1 < facs.len() {
            let f = &facs[s - 1];
            (f.len(), f.iter().filter(|v| !v.is_one()).cloned().collect())
        } else {
            (0, Vec::new())
        };
        out.insert(
            c.start + s as i64,
            HomologyGroup { betti: c.rank(s) - out_rank - in_rank, torsion },
        );
    }
    out
}

pub fn is_acyclic(c: &IntChainComplex) -> bool {
    homology(c).values().all(|h| h.is_zero())
}

/// Degreewise matrices of a map `C → D` (rows index `D^k`, columns `C^k`).
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: IntChainComplex,
    pub target: IntChainComplex,
    pub maps: BTreeMap<i64, IntMatrix>,
}

impl ChainMap {
    pub fn new(source: IntChainComplex, target: IntChainComplex, maps: BTreeMap<i64, IntMatrix>) -> Result<Self> {
        let f = ChainMap { source, target, maps };
        for (k, m) in &f.maps {
            if m.rows() != f.target.rank_at(*k) || m.cols() != f.source.rank_at(*k) {
                return Err(KitError::Argument(format!("map in degree {} has the wrong shape", k)));
            }
        }
        if !f.commutes() {
            return Err(KitError::Argument("not a chain map".into()));
        }
        Ok(f)
    }

    pub fn identity(c: &IntChainComplex) -> Self {
        let maps = c.degrees().map(|k| (k, IntMatrix::identity(c.rank_at(k)))).collect();
        ChainMap { source: c.clone(), target: c.clone(), maps }
    }

    pub fn at(&self, k: i64) -> IntMatrix {
        self.maps
            .get(&k)
            .cloned()
            .unwrap_or_else(|| IntMatrix::zeros(self.target.rank_at(k), self.source.rank_at(k)))
    }

    fn span(&self) -> std::ops::Range<i64> {
        let lo = self.source.start.min(self.target.start);
        let hi = (self.source.start + self.source.len() as i64).max(self.target.start + self.target.len() as i64);
        lo..hi
    }

    fn commutes(&self) -> bool {
        self.span()
            .all(|k| self.target.diff_at(k).mul(&self.at(k)) == self.at(k + 1).mul(&self.source.diff_at(k)))
    }

    /// `Cone^k = C^{k+1} ⊕ D^k` with `d(c, x) = (-d c, f c + d x)`.
    pub fn cone(&self) -> IntChainComplex {
        let r = self.span();
        let (lo, hi) = (r.start - 1, r.end);
        let ranks: Vec<usize> = (lo..hi)
            .map(|k| self.source.rank_at(k + 1) + self.target.rank_at(k))
            .collect();
        let diffs = (lo..hi - 1)
            .map(|k| {
                let c1 = self.source.rank_at(k + 1);
                let d0 = self.target.rank_at(k);
                let c2 = self.source.rank_at(k + 2);
                let d1 = self.target.rank_at(k + 1);
                let mut m = IntMatrix::zeros(c2 + d1, c1 + d0);
                m.put(0, 0, &self.source.diff_at(k + 1).neg());
                m.put(c2, 0, &self.at(k + 1));
                m.put(c2, c1, &self.target.diff_at(k));
                m
            })
            .collect();
        IntChainComplex { start: lo, ranks, diffs }
    }
}

/// Quasi-isomorphism test through acyclicity of the mapping cone.
pub fn is_quasi_iso(f: &ChainMap) -> bool {
    is_acyclic(&f.cone())
}

/// Quasi-isomorphism test by checking surjectivity and injectivity on homology directly.
pub fn induces_homology_iso(f: &ChainMap) -> bool {
    for k in f.span() {
        let zc = kernel_basis(&f.source.diff_at(k));
        let zd = kernel_basis(&f.target.diff_at(k));
        let bc = f.source.diff_at(k - 1);
        let bd = f.target.diff_at(k - 1);
        let fz = f.at(k).mul(&zc);
        // surjective: every cycle of D is f(cycle) + boundary
        let sys = fz.hcat(&bd);
        for j in 0..zd.cols() {
            if solve_integer(&sys, &zd.column(j)).is_none() {
                return false;
            }
        }
        // injective: cycles mapping to boundaries are boundaries
        let lattice = kernel_basis(&fz.hcat(&bd.neg()));
        for j in 0..lattice.cols() {
            let y: Vec<BigInt> = (0..zc.cols()).map(|i| lattice.get(i, j).clone()).collect();
            let c = zc.mul_vec(&y);
            if solve_integer(&bc, &c).is_none() {
                return false;
            }
        }
    }
    true
}
