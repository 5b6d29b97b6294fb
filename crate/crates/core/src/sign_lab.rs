//! Parity bookkeeping for boundary strata of the two-sided moduli spaces, the artificial
//! signs attached to operations, and the mod-2 consistency check for the case-(iv) splitting.
//!
//! Every sign is a parity in `{0, 1}`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{KitError, Result};

/// Parity of an integer.
pub fn parity(x: i64) -> u8 {
    x.rem_euclid(2) as u8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    I,
    II,
    III,
    IV,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::I, Case::II, Case::III, Case::IV];
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "i",
            Case::II => "ii",
            Case::III => "iii",
            Case::IV => "iv",
        })
    }
}

impl std::str::FromStr for Case {
    type Err = KitError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(Case::I),
            "ii" => Ok(Case::II),
            "iii" => Ok(Case::III),
            "iv" => Ok(Case::IV),
            other => Err(KitError::Argument(format!("unknown case `{}`", other))),
        }
    }
}

/// A codimension-one stratum of `R^{k+1,l+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StratumDescriptor {
    pub case: Case,
    pub k: i64,
    pub l: i64,
    pub i: i64,
    pub j: i64,
}

impl StratumDescriptor {
    /// Checked constructor.
    pub fn new(case: Case, k: i64, l: i64, i: i64, j: i64) -> Result<Self> {
        let d = StratumDescriptor { case, k, l, i, j };
        if d.is_valid() {
            Ok(d)
        } else {
            Err(KitError::Argument(format!("no stratum of case ({}) with (k,l,i,j) = ({},{},{},{})", case, k, l, i, j)))
        }
    }

    /// Whether both factors of the stratum exist.
    pub fn is_valid(&self) -> bool {
        let (k, l, i, j) = (self.k, self.l, self.i, self.j);
        if k < 0 || l < 0 || i < 0 || j < 0 {
            return false;
        }
        let n = k + l + 1;
        match self.case {
            Case::I => i <= k && k < j && j <= n,
            Case::II => i + j <= k,
            Case::III => i > k && i + j <= n,
            Case::IV => i <= k && j >= 1 && k < i + j && i + j <= n,
        }
    }

    /// All valid strata of one case for fixed `(k, l)`.
    pub fn enumerate(case: Case, k: i64, l: i64) -> Vec<StratumDescriptor> {
        let n = k + l + 1;
        let mut out = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let d = StratumDescriptor { case, k, l, i, j };
                if d.is_valid() {
                    out.push(d);
                }
            }
        }
        out
    }
}

/// Degrees `|x_1|, …, |x_{k+l+1}|` and the dimension `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeVector {
    pub degrees: Vec<i64>,
    pub n: i64,
}

impl DegreeVector {
    pub fn new(degrees: Vec<i64>, n: i64) -> Self {
        DegreeVector { degrees, n }
    }

    /// `|x_m|`, 1-based.
    pub fn x(&self, m: i64) -> i64 {
        self.degrees[(m - 1) as usize]
    }

    fn sum(&self, lo: i64, hi: i64) -> i64 {
        (lo..=hi).map(|m| self.x(m)).sum()
    }
}

/// `∗` for the stratum, evaluated literally.
pub fn boundary_stratum_sign(d: &StratumDescriptor) -> u8 {
    let (k, l, i, j) = (d.k, d.l, d.i, d.j);
    parity(match d.case {
        Case::I => (i + 1) * (j + k + l) + j * (k + l) + 1,
        Case::II => j * (i + k + l) + i + j,
        Case::III => j * (i + k + l) + i + 1,
        Case::IV => j * l + j + k + 1,
    })
}

/// `‡_d = |x_1| + 2|x_2| + … + d|x_d|`.
pub fn artificial_sign_d(degrees: &[i64]) -> u8 {
    parity(degrees.iter().enumerate().map(|(p, x)| (p as i64 + 1) * x).sum())
}

/// `‡_{k,l}` on `|x_1|, …, |x_{k+l+1}|`.
pub fn artificial_sign_kl(k: i64, l: i64, v: &DegreeVector) -> Result<u8> {
    if k < 0 || l < 0 || v.degrees.len() as i64 != k + l + 1 {
        return Err(KitError::Argument(format!(
            "‡ needs k + l + 1 = {} degrees, got {}",
            k + l + 1,
            v.degrees.len()
        )));
    }
    let n = v.n;
    let mut s = k;
    for m in 1..=k {
        s += (n + m - 1) * v.x(m);
    }
    s += (n + k) * v.x(k + 1);
    for m in 1..=l {
        s += (k + m) * v.x(k + 1 + m);
    }
    Ok(parity(s))
}

/// `†` for one of the four families of the morphism differential.
///
/// `degrees` lists `|a_1|, …, |a_{k+l+1}|` with the dual entry at position `k+1`;
/// only `‖a‖ = |a| − 1` enters.
pub fn dag_sign(case: Case, psi_degree: i64, i: usize, j: usize, degrees: &[i64]) -> u8 {
    let norms = |hi: usize| -> i64 { degrees[..hi].iter().map(|d| d - 1).sum() };
    parity(match case {
        Case::I => psi_degree * norms(i),
        Case::II | Case::III => psi_degree + 1 + norms(i),
        Case::IV => psi_degree + 1 + norms(i + j),
    })
}

/// `|x|` of the output of the `R^{j+1}` factor in a case-(iv) splitting.
pub fn splitting_output_degree(d: &StratumDescriptor, v: &DegreeVector) -> i64 {
    let (k, i, j) = (d.k, d.i, d.j);
    -v.sum(i + 1, k) + v.x(k + 1) - v.sum(k + 2, i + j) - 2 + j
}

/// Formula variants used as mutation controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub enum Mutation {
    #[default]
    None,
    /// `∗_(iv)` without the `+k` term.
    DropKInStar,
}

/// The two sides of the consistency identity and the splitting-independent remainder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Consistency {
    pub lhs: u8,
    pub rhs: u8,
    pub remainder: u8,
}

fn consistency_parts(d: &StratumDescriptor, v: &DegreeVector, mutation: Mutation) -> Result<Consistency> {
    if d.case != Case::IV || !d.is_valid() {
        return Err(KitError::Argument(format!("not a case-(iv) stratum: {:?}", d)));
    }
    let (k, l, i, j, n) = (d.k, d.l, d.i, d.j, v.n);
    if v.degrees.len() as i64 != k + l + 1 {
        return Err(KitError::Argument(format!("expected {} degrees, got {}", k + l + 1, v.degrees.len())));
    }
    let x = splitting_output_degree(d, v);
    let k1 = j + v.sum(i + 1, k);
    let k2 = n * v.sum(k + 2, i + j) + j * (v.sum(k + 1, k + l + 1) + n + k + l);
    let mut inner: Vec<i64> = (k + 2..=i + j).map(|m| v.x(m)).collect();
    inner.push(x);
    inner.extend((i + 1..=k).map(|m| v.x(m)));
    let k3 = artificial_sign_d(&inner) as i64;
    let mut outer: Vec<i64> = (1..=i).map(|m| v.x(m)).collect();
    outer.push(x);
    outer.extend((i + j + 1..=k + l + 1).map(|m| v.x(m)));
    let k4 = artificial_sign_kl(i, k + l - i - j + 1, &DegreeVector::new(outer, n))? as i64;
    let star = match mutation {
        Mutation::None => boundary_stratum_sign(d) as i64,
        Mutation::DropKInStar => j * l + j + 1,
    };
    let lhs = parity(k1 + k2 + k3 + k4 + star);
    let dag = dag_sign(Case::IV, n, i as usize, j as usize, &v.degrees) as i64;
    let remainder = parity(artificial_sign_kl(k, l, v)? as i64 + v.sum(1, k + l + 1) + n);
    let rhs = parity(dag + remainder as i64);
    Ok(Consistency { lhs, rhs, remainder })
}

/// The four Koszul contributions, `‡` terms and `∗_(iv)` add up to `†_(iv)` plus the remainder.
pub fn verify_splitting_consistency(d: &StratumDescriptor, v: &DegreeVector) -> Result<bool> {
    let c = consistency_parts(d, v, Mutation::None)?;
    Ok(c.lhs == c.rhs)
}

/// Consistency with an explicit formula variant.
pub fn splitting_consistency(d: &StratumDescriptor, v: &DegreeVector, mutation: Mutation) -> Result<Consistency> {
    consistency_parts(d, v, mutation)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepFailure {
    pub stratum: StratumDescriptor,
    pub degrees: Vec<i64>,
    pub n: i64,
    pub lhs: u8,
    pub rhs: u8,
}

/// Bounds of the exhaustive sweep; all ranges are inclusive.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepBounds {
    pub max_kl: i64,
    pub max_j: i64,
    pub max_n: i64,
    pub max_degree: i64,
}

impl Default for SweepBounds {
    fn default() -> Self {
        SweepBounds { max_kl: 3, max_j: 3, max_n: 3, max_degree: 3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub bounds: SweepBounds,
    pub mutation: Mutation,
    pub checked: u64,
    pub failed: u64,
    /// First failures, capped.
    pub failures: Vec<SweepFailure>,
    /// `(k, l, n, degrees)` tuples on which the remainder depended on the splitting.
    pub remainder_dependencies: u64,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failed == 0 && self.remainder_dependencies == 0
    }
}

const MAX_REPORTED: usize = 20;

fn degree_vectors(len: usize, max_degree: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max_degree).map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out
}

/// Exhaustive case-(iv) sweep over `k, l, i, j`, `n` and degree vectors.
pub fn sweep(bounds: SweepBounds, mutation: Mutation) -> SweepReport {
    let mut jobs = Vec::new();
    for k in 0..=bounds.max_kl {
        for l in 0..=bounds.max_kl {
            for n in 0..=bounds.max_n {
                jobs.push((k, l, n));
            }
        }
    }
    let partial: Vec<(u64, u64, Vec<SweepFailure>, u64)> = jobs
        .par_iter()
        .map(|&(k, l, n)| {
            let strata: Vec<StratumDescriptor> = StratumDescriptor::enumerate(Case::IV, k, l)
                .into_iter()
                .filter(|d| d.i <= bounds.max_kl && d.j <= bounds.max_j)
                .collect();
            let mut checked = 0;
            let mut failed = 0;
            let mut failures = Vec::new();
            let mut deps = 0;
            for degrees in degree_vectors((k + l + 1) as usize, bounds.max_degree) {
                let v = DegreeVector::new(degrees, n);
                let mut remainder = None;
                let mut dependent = false;
                for d in &strata {
                    let c = consistency_parts(d, &v, mutation).expect("enumerated strata are valid");
                    checked += 1;
                    if c.lhs != c.rhs {
                        failed += 1;
                        if failures.len() < MAX_REPORTED {
                            failures.push(SweepFailure {
                                stratum: *d,
                                degrees: v.degrees.clone(),
                                n,
                                lhs: c.lhs,
                                rhs: c.rhs,
                            });
                        }
                    }
                    // remainder seen through the identity: lhs − †
                    let dag = dag_sign(Case::IV, n, d.i as usize, d.j as usize, &v.degrees);
                    let r = (c.lhs + dag) % 2;
                    match remainder {
                        None => remainder = Some(r),
                        Some(prev) if prev != r => dependent = true,
                        _ => {}
                    }
                }
                if dependent {
                    deps += 1;
                }
            }
            (checked, failed, failures, deps)
        })
        .collect();
    let mut report = SweepReport {
        bounds,
        mutation,
        checked: 0,
        failed: 0,
        failures: Vec::new(),
        remainder_dependencies: 0,
    };
    for (c, f, fs, d) in partial {
        report.checked += c;
        report.failed += f;
        report.remainder_dependencies += d;
        for x in fs {
            if report.failures.len() < MAX_REPORTED {
                report.failures.push(x);
            }
        }
    }
    report
}

/// Index map realizing the `(k, l)` swap on strata, pairing (i)↔(iv) and (ii)↔(iii).
pub fn swap_stratum(d: &StratumDescriptor) -> StratumDescriptor {
    let (k, l, i, j) = (d.k, d.l, d.i, d.j);
    let (case, i2, j2) = match d.case {
        Case::II => (Case::III, i + l + 1, j),
        Case::III => (Case::II, i - k - 1, j),
        Case::I => (Case::IV, j - k - 1, k + l + 2 + i - j),
        Case::IV => (Case::I, i + j - k - 1, l + 1 + i),
    };
    StratumDescriptor { case, k: l, l: k, i: i2, j: j2 }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingResult {
    pub name: String,
    pub pairs: Vec<(Case, Case)>,
    pub agree: u64,
    pub disagree: u64,
}

impl PairingResult {
    pub fn holds(&self) -> bool {
        self.disagree == 0
    }
}

/// Test of "swapping `(k, l)` changes each `∗` by `kl`".
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub max_kl: i64,
    /// Stratum-by-stratum comparison through [`swap_stratum`].
    pub pointwise: PairingResult,
    /// Comparison of the parity multisets for each candidate pairing of cases.
    pub multiset: Vec<PairingResult>,
}

impl SymmetryReport {
    pub fn any_pairing_holds(&self) -> bool {
        self.pointwise.holds() || self.multiset.iter().any(|p| p.holds())
    }
}

fn parity_multiset(case: Case, k: i64, l: i64, shift: u8) -> BTreeMap<u8, usize> {
    let mut m = BTreeMap::new();
    for d in StratumDescriptor::enumerate(case, k, l) {
        *m.entry((boundary_stratum_sign(&d) + shift) % 2).or_default() += 1;
    }
    m
}

pub fn symmetry_report(max_kl: i64) -> SymmetryReport {
    let mut pointwise = PairingResult {
        name: "pointwise".into(),
        pairs: vec![(Case::I, Case::IV), (Case::II, Case::III)],
        agree: 0,
        disagree: 0,
    };
    for k in 0..=max_kl {
        for l in 0..=max_kl {
            for case in Case::ALL {
                for d in StratumDescriptor::enumerate(case, k, l) {
                    let e = swap_stratum(&d);
                    debug_assert!(e.is_valid() && swap_stratum(&e) == d);
                    if boundary_stratum_sign(&e) == (boundary_stratum_sign(&d) + parity(k * l)) % 2 {
                        pointwise.agree += 1;
                    } else {
                        pointwise.disagree += 1;
                    }
                }
            }
        }
    }
    let candidates = [
        ("A", [(Case::I, Case::IV), (Case::II, Case::III)]),
        ("B", [(Case::I, Case::III), (Case::II, Case::IV)]),
        ("C", [(Case::I, Case::II), (Case::III, Case::IV)]),
    ];
    let multiset = candidates
        .iter()
        .map(|(name, pairs)| {
            let mut r = PairingResult { name: name.to_string(), pairs: pairs.to_vec(), agree: 0, disagree: 0 };
            for k in 0..=max_kl {
                for l in 0..=max_kl {
                    for &(a, b) in pairs {
                        for (c1, c2) in [(a, b), (b, a)] {
                            let shift = parity(k * l);
                            if parity_multiset(c1, k, l, shift) == parity_multiset(c2, l, k, 0) {
                                r.agree += 1;
                            } else {
                                r.disagree += 1;
                            }
                        }
                    }
                }
            }
            r
        })
        .collect();
    SymmetryReport { max_kl, pointwise, multiset }
}
