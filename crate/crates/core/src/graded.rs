//! Truncated integer q-series, graded bases and Koszul signs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};

/// Default truncation order for q-series.
pub const DEFAULT_TRUNC: usize = 8;

/// `(-1)^p` as an integer.
pub fn parity_sign(p: i64) -> i64 {
    if p.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// An element of `Z[q]/(q^{N+1})` with exact coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QSeries {
    coeffs: Vec<BigInt>,
    order: usize,
}

impl QSeries {
    pub fn zero(order: usize) -> Self {
        QSeries { coeffs: Vec::new(), order }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(1, order)
    }

    pub fn constant(c: i64, order: usize) -> Self {
        Self::monomial(BigInt::from(c), 0, order)
    }

    /// `c * q^power`, which is zero when `power > order`.
    pub fn monomial(c: BigInt, power: usize, order: usize) -> Self {
        if power > order || c.is_zero() {
            return Self::zero(order);
        }
        let mut coeffs = vec![BigInt::zero(); power + 1];
        coeffs[power] = c;
        QSeries { coeffs, order }
    }

    /// Builds a series from coefficients of `q^0, q^1, ...`, discarding powers above `order`.
    pub fn from_coeffs<I: IntoIterator<Item = BigInt>>(coeffs: I, order: usize) -> Self {
        let mut v: Vec<BigInt> = coeffs.into_iter().take(order + 1).collect();
        trim(&mut v);
        QSeries { coeffs: v, order }
    }

    pub fn from_i64s(coeffs: &[i64], order: usize) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)), order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Nonzero-trimmed coefficient list.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> BigInt {
        self.coeffs.get(power).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at `q = 0`.
    pub fn at_q0(&self) -> BigInt {
        self.coeff(0)
    }

    /// Reduction modulo `q`, kept at the same truncation order.
    pub fn reduce_q0(&self) -> Self {
        Self::monomial(self.at_q0(), 0, self.order)
    }

    /// Same series, re-truncated at a new order.
    pub fn with_order(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs.iter().cloned(), order)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(KitError::Argument(format!(
                "truncation orders differ: {} vs {}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for p in 0..n {
            let a = self.coeffs.get(p);
            let b = other.coeffs.get(p);
            v.push(match (a, b) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => BigInt::zero(),
            });
        }
        trim(&mut v);
        Ok(QSeries { coeffs: v, order: self.order })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.order));
        }
        let n = (self.coeffs.len() + other.coeffs.len() - 1).min(self.order + 1);
        let mut v = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                v[i + j] += a * b;
            }
        }
        trim(&mut v);
        Ok(QSeries { coeffs: v, order: self.order })
    }

    /// In-place `self += other`.
    pub fn add_assign_ref(&mut self, other: &Self) {
        assert_eq!(self.order, other.order, "truncation orders differ");
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), BigInt::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += b;
        }
        trim(&mut self.coeffs);
    }

    pub fn scale(&self, c: i64) -> Self {
        if c == 0 {
            return Self::zero(self.order);
        }
        QSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            order: self.order,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }
}

fn trim(v: &mut Vec<BigInt>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

impl std::ops::Add for &QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        self.try_add(rhs).expect("truncation orders differ")
    }
}

impl std::ops::Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        self.try_mul(rhs).expect("truncation orders differ")
    }
}

impl fmt::Debug for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match p {
                0 => write!(f, "{}", a)?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{}", a)?;
                    }
                    if p == 1 {
                        write!(f, "q")?
                    } else {
                        write!(f, "q^{}", p)?
                    }
                }
            }
        }
        Ok(())
    }
}

/// Product of two series with an order check.
pub fn q_mul(a: &QSeries, b: &QSeries) -> Result<QSeries> {
    a.try_mul(b)
}

/// A named basis element with a cohomological degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: i64) -> Self {
        Generator { name: name.into(), degree }
    }
}

/// Ordered list of generators with unique names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedBasis {
    gens: Vec<Generator>,
    index: HashMap<String, usize>,
}

impl GradedBasis {
    pub fn new(gens: Vec<Generator>) -> Result<Self> {
        let mut index = HashMap::with_capacity(gens.len());
        for (i, g) in gens.iter().enumerate() {
            if index.insert(g.name.clone(), i).is_some() {
                return Err(KitError::Structure(format!("duplicate generator name `{}`", g.name)));
            }
        }
        Ok(GradedBasis { gens, index })
    }

    pub fn empty() -> Self {
        GradedBasis::default()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn get(&self, i: usize) -> &Generator {
        &self.gens[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.gens.iter().map(|g| g.degree).collect()
    }
}

/// Name of the dual generator; dualizing twice restores the name.
pub fn dual_name(name: &str) -> String {
    match name.strip_suffix('*') {
        Some(base) => base.to_string(),
        None => format!("{}*", name),
    }
}

/// `B[k]`: every degree decreases by `k`.
pub fn shift_basis(b: &GradedBasis, k: i64) -> GradedBasis {
    let gens = b
        .gens
        .iter()
        .map(|g| Generator::new(g.name.clone(), g.degree - k))
        .collect();
    GradedBasis::new(gens).expect("shift preserves uniqueness")
}

/// Linear dual: `x` of degree `d` becomes `x*` of degree `-d`.
pub fn dual_basis(b: &GradedBasis) -> GradedBasis {
    let gens = b
        .gens
        .iter()
        .map(|g| Generator::new(dual_name(&g.name), -g.degree))
        .collect();
    GradedBasis::new(gens).expect("dual preserves uniqueness")
}

/// Sign of reordering `x_0, ..., x_{m-1}` into `x_{perm[0]}, x_{perm[1]}, ...`.
pub fn koszul_sign(degrees: &[i64], perm: &[usize]) -> Result<i64> {
    let n = degrees.len();
    if perm.len() != n {
        return Err(KitError::Argument("permutation length mismatch".into()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(KitError::Argument(format!("not a permutation: {:?}", perm)));
        }
        seen[p] = true;
    }
    let mut parity = 0i64;
    for a in 0..n {
        for b in a + 1..n {
            if perm[a] > perm[b] {
                parity += degrees[perm[a]] * degrees[perm[b]];
            }
        }
    }
    Ok(parity_sign(parity))
}

/// Sparse linear combination of generators with q-series coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Element {
    terms: BTreeMap<u32, QSeries>,
}

impl Element {
    pub fn new() -> Self {
        Element::default()
    }

    pub fn single(id: u32, c: QSeries) -> Self {
        let mut e = Element::new();
        e.add_term(id, &c);
        e
    }

    pub fn add_term(&mut self, id: u32, c: &QSeries) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&id) {
            Some(v) => {
                v.add_assign_ref(c);
                if v.is_zero() {
                    self.terms.remove(&id);
                }
            }
            None => {
                self.terms.insert(id, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Element, c: &QSeries) {
        for (id, v) in &other.terms {
            self.add_term(*id, &(v * c));
        }
    }

    pub fn add_signed(&mut self, other: &Element, sign: i64) {
        for (id, v) in &other.terms {
            self.add_term(*id, &v.scale(sign));
        }
    }

    pub fn scaled(&self, c: &QSeries) -> Element {
        let mut e = Element::new();
        e.add_scaled(self, c);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &QSeries)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, id: u32) -> Option<&QSeries> {
        self.terms.get(&id)
    }

    pub fn reduce_q0(&self) -> Element {
        let mut e = Element::new();
        for (id, v) in &self.terms {
            e.add_term(*id, &v.reduce_q0());
        }
        e
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_identities() {
        let a = QSeries::from_i64s(&[1, 1], 2);
        let b = QSeries::from_i64s(&[1, -1], 2);
        assert_eq!(q_mul(&a, &b).unwrap(), QSeries::from_i64s(&[1, 0, -1], 2));
        assert!(q_mul(&a, &QSeries::zero(2)).unwrap().is_zero());
        let top = QSeries::monomial(BigInt::from(1), 8, 8);
        let q = QSeries::monomial(BigInt::from(1), 1, 8);
        assert!(q_mul(&top, &q).unwrap().is_zero());
    }

    #[test]
    fn q_order_mismatch_is_error() {
        let a = QSeries::one(2);
        let b = QSeries::one(3);
        assert!(matches!(q_mul(&a, &b), Err(KitError::Argument(_))));
    }

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&[1, 1], &[1, 0]).unwrap(), -1);
        assert_eq!(koszul_sign(&[3, 5, 7], &[0, 1, 2]).unwrap(), 1);
        // brute force for the 3-cycle on degrees [1,2,1]
        let deg = [1, 2, 1];
        let perm = [1, 2, 0];
        let mut p = 0;
        for a in 0..3 {
            for b in a + 1..3 {
                if perm[a] > perm[b] {
                    p += deg[perm[a]] * deg[perm[b]];
                }
            }
        }
        assert_eq!(koszul_sign(&deg, &perm).unwrap(), parity_sign(p));
        assert!(koszul_sign(&[1, 1], &[0, 0]).is_err());
    }

    #[test]
    fn basis_shift_and_dual() {
        let b = GradedBasis::new(vec![Generator::new("x", 3)]).unwrap();
        assert_eq!(shift_basis(&b, 1).degrees(), vec![2]);
        assert_eq!(shift_basis(&b, 0), b);
        assert_eq!(shift_basis(&shift_basis(&b, 2), -2), b);
        let b2 = GradedBasis::new(vec![Generator::new("x", 2)]).unwrap();
        assert_eq!(dual_basis(&b2).degrees(), vec![-2]);
        assert_eq!(dual_basis(&dual_basis(&b2)), b2);
        assert!(dual_basis(&GradedBasis::empty()).is_empty());
        assert!(GradedBasis::new(vec![Generator::new("x", 0), Generator::new("x", 1)]).is_err());
    }

    #[test]
    fn display_series() {
        let a = QSeries::from_i64s(&[2, -1, 0, 3], 8);
        assert_eq!(a.to_string(), "2 - q + 3q^3");
    }
}
