//! Morphisms of bimodules, their differential and composition, the complex of morphisms from
//! the dual diagonal to the diagonal, mapping cones and the three-term total bimodule.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ainfty::{
    alg_inner, bimodule_words, check_morphism_word, describe, diagonal_bimodule, dual_diagonal_bimodule, dual_id,
    dual_space, letter_weight, letters_labels, module_pos, pullback_bimodule, splice, word_ends, AInfty, Bimodule,
    GenId, Letter, LinearFunctor, ObjId, PairSpace, Violation,
};
use crate::error::{KitError, Result};
use crate::graded::{parity_sign, Element, QSeries};
use crate::homology::{self, ChainMap, IntChainComplex, IntMatrix};
use crate::sign_lab::{dag_sign, Case};

/// A family of components `φ^{l,1,k}` keyed by input words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimoduleMorphism {
    pub degree: i64,
    comps: HashMap<Vec<Letter>, Element>,
}

impl BimoduleMorphism {
    /// Validates output degrees `Σ in + degree − k − l` and pair compatibility.
    pub fn new(
        a: &AInfty,
        src: &PairSpace,
        tgt: &PairSpace,
        degree: i64,
        entries: Vec<(Vec<Letter>, GenId, QSeries)>,
    ) -> Result<Self> {
        let mut comps: HashMap<Vec<Letter>, Element> = HashMap::new();
        let mut bad = Vec::new();
        for (w, out, c) in entries {
            if let Err(msg) = check_morphism_word(a, src, tgt, &w, out, degree) {
                bad.push(msg);
                continue;
            }
            comps.entry(w).or_default().add_term(out, &c.with_order(a.trunc));
        }
        if !bad.is_empty() {
            return Err(KitError::Argument(format!("inhomogeneous morphism: {}", bad.join("; "))));
        }
        Ok(Self::from_raw(degree, comps))
    }

    pub fn from_raw(degree: i64, mut comps: HashMap<Vec<Letter>, Element>) -> Self {
        comps.retain(|_, v| !v.is_zero());
        BimoduleMorphism { degree, comps }
    }

    pub fn zero(degree: i64) -> Self {
        BimoduleMorphism { degree, comps: HashMap::new() }
    }

    pub fn comp(&self, w: &[Letter]) -> Option<&Element> {
        self.comps.get(w)
    }

    pub fn table(&self) -> &HashMap<Vec<Letter>, Element> {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.comps.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Entries in a deterministic order.
    pub fn entries(&self) -> Vec<(Vec<Letter>, GenId, QSeries)> {
        let mut keys: Vec<&Vec<Letter>> = self.comps.keys().collect();
        keys.sort_by(|a, b| (a.len(), *a).cmp(&(b.len(), *b)));
        let mut out = Vec::new();
        for k in keys {
            for (g, c) in self.comps[k].terms() {
                out.push((k.clone(), g, c.clone()));
            }
        }
        out
    }

    pub fn reduce_q0(&self) -> Self {
        Self::from_raw(self.degree, self.comps.iter().map(|(w, e)| (w.clone(), e.reduce_q0())).collect())
    }

    /// Components on words of length at most `max_arity`.
    pub fn truncated(&self, max_arity: usize) -> Self {
        Self::from_raw(
            self.degree,
            self.comps.iter().filter(|(w, _)| w.len() <= max_arity).map(|(w, e)| (w.clone(), e.clone())).collect(),
        )
    }

    /// `self + sign·other` (degrees must agree).
    pub fn add_signed(&self, other: &Self, sign: i64) -> Self {
        let mut comps = self.comps.clone();
        for (w, e) in &other.comps {
            comps.entry(w.clone()).or_default().add_signed(e, sign);
        }
        Self::from_raw(self.degree, comps)
    }

    pub fn scaled(&self, sign: i64) -> Self {
        Self::zero(self.degree).add_signed(self, sign)
    }

    /// Human-readable nonzero components.
    pub fn describe(&self, a: &AInfty, src: &PairSpace, tgt: &PairSpace) -> Vec<Violation> {
        let mut out: Vec<Violation> = self
            .comps
            .iter()
            .map(|(w, e)| Violation { arity: w.len(), inputs: letters_labels(a, src, w), residual: describe(tgt, e) })
            .collect();
        out.sort_by(|x, y| (x.arity, &x.inputs).cmp(&(y.arity, &y.inputs)));
        out
    }
}

fn right_weight(a: &AInfty, module: &PairSpace, w: &[Letter]) -> i64 {
    w.iter().map(|&l| letter_weight(a, module, l)).sum()
}

fn dphi_word(a: &AInfty, p: &Bimodule, q: &Bimodule, phi: &BimoduleMorphism, w: &[Letter]) -> Element {
    let d = w.len();
    let mp = module_pos(w);
    let deg = phi.degree;
    let mut acc = Element::new();
    let mut buf: Vec<Letter> = Vec::with_capacity(d + 1);
    for s in 0..=d {
        for e in s..=d {
            let rw = right_weight(a, &p.space, &w[e..]);
            let contains_m = s <= mp && mp < e;
            if contains_m {
                // μ_Q(…, φ(block), …)
                if let Some(inner) = phi.comp(&w[s..e]) {
                    let sign = parity_sign(deg * rw);
                    for (y, c) in inner.terms() {
                        splice(&mut buf, w, s, e, Letter::M(y));
                        if let Some(out) = q.mu(&buf) {
                            acc.add_scaled(out, &c.scale(sign));
                        }
                    }
                }
                // φ(…, μ_P(block), …)
                if let Some(inner) = p.mu(&w[s..e]) {
                    let sign = -parity_sign(deg + rw);
                    for (x, c) in inner.terms() {
                        splice(&mut buf, w, s, e, Letter::M(x));
                        if let Some(out) = phi.comp(&buf) {
                            acc.add_scaled(out, &c.scale(sign));
                        }
                    }
                }
            } else if let Some(inner) = alg_inner(a, &p.space, w, s, e) {
                // φ(…, μ_A(block), …)
                let sign = -parity_sign(deg + rw);
                for (x, c) in inner.terms() {
                    splice(&mut buf, w, s, e, Letter::A(x));
                    if let Some(out) = phi.comp(&buf) {
                        acc.add_scaled(out, &c.scale(sign));
                    }
                }
            }
        }
    }
    acc
}

/// The differential of the dg category of bimodules, on all words of length `≤ max_arity`.
pub fn hom_differential(
    a: &AInfty,
    p: &Bimodule,
    q: &Bimodule,
    phi: &BimoduleMorphism,
    max_arity: usize,
) -> BimoduleMorphism {
    let words = bimodule_words(a, &p.space, max_arity);
    let comps: HashMap<Vec<Letter>, Element> = words
        .par_iter()
        .filter_map(|w| {
            let e = dphi_word(a, p, q, phi, w);
            (!e.is_zero()).then(|| (w.clone(), e))
        })
        .collect();
    BimoduleMorphism::from_raw(phi.degree + 1, comps)
}

/// `ψ∘φ` for `φ: P → Q`, `ψ: Q → R`, on words of length `≤ max_arity`.
pub fn compose(
    a: &AInfty,
    p_space: &PairSpace,
    phi: &BimoduleMorphism,
    psi: &BimoduleMorphism,
    max_arity: usize,
) -> BimoduleMorphism {
    let words = bimodule_words(a, p_space, max_arity);
    let comps: HashMap<Vec<Letter>, Element> = words
        .par_iter()
        .filter_map(|w| {
            let d = w.len();
            let mp = module_pos(w);
            let mut acc = Element::new();
            let mut buf = Vec::with_capacity(d);
            for s in 0..=mp {
                for e in mp + 1..=d {
                    let Some(inner) = phi.comp(&w[s..e]) else { continue };
                    let sign = parity_sign(phi.degree * right_weight(a, p_space, &w[e..]));
                    for (y, c) in inner.terms() {
                        splice(&mut buf, w, s, e, Letter::M(y));
                        if let Some(out) = psi.comp(&buf) {
                            acc.add_scaled(out, &c.scale(sign));
                        }
                    }
                }
            }
            (!acc.is_zero()).then(|| (w.clone(), acc))
        })
        .collect();
    BimoduleMorphism::from_raw(phi.degree + psi.degree, comps)
}

/// Identity morphism of a bimodule.
pub fn identity_morphism(p: &Bimodule, trunc: usize) -> BimoduleMorphism {
    let comps = (0..p.space.len() as GenId)
        .map(|g| (vec![Letter::M(g)], Element::single(g, QSeries::one(trunc))))
        .collect();
    BimoduleMorphism::from_raw(0, comps)
}

/// Sum of the algebraic weights of the algebra letters right of the module letter.
fn right_algebra_weight(a: &AInfty, w: &[Letter]) -> i64 {
    let mp = module_pos(w);
    w[mp + 1..]
        .iter()
        .map(|l| match l {
            Letter::A(g) => a.space.degree(*g) - 1,
            Letter::M(_) => unreachable!("one module letter per word"),
        })
        .sum()
}

/// A table scaled by `sign·(-1)^{factor·Σ‖a_R‖}`.
fn twisted_table(
    a: &AInfty,
    table: &HashMap<Vec<Letter>, Element>,
    sign: i64,
    factor: i64,
) -> HashMap<Vec<Letter>, Element> {
    table
        .iter()
        .map(|(w, e)| {
            let s = sign * parity_sign(factor * right_algebra_weight(a, w));
            let mut out = Element::new();
            out.add_signed(e, s);
            (w.clone(), out)
        })
        .collect()
}

/// `P[s]`: degrees lowered by `s`, operations scaled by `(-1)^s (-1)^{s·Σ‖a_R‖}`.
pub fn shift_bimodule(a: &AInfty, p: &Bimodule, s: i64) -> Bimodule {
    Bimodule::from_raw(p.space.shifted(s), twisted_table(a, p.table(), parity_sign(s), s))
}

/// The same morphism viewed with source `P[s]`: degree `+s`, components scaled by `(-1)^{s·Σ‖a_R‖}`.
pub fn shift_source(a: &AInfty, phi: &BimoduleMorphism, s: i64) -> BimoduleMorphism {
    BimoduleMorphism::from_raw(phi.degree + s, twisted_table(a, phi.table(), 1, s))
}

struct Summand<'a> {
    space: &'a PairSpace,
    shift: i64,
    tag: &'static str,
}

struct Block<'a> {
    from: usize,
    to: usize,
    table: &'a HashMap<Vec<Letter>, Element>,
    sign: i64,
    factor: i64,
}

/// Direct sum of shifted pair spaces; generator names get the summand tag as prefix.
fn sum_space(objects: &[String], parts: &[Summand]) -> Result<(PairSpace, Vec<Vec<GenId>>)> {
    let n = objects.len() as ObjId;
    let mut pairs = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let mut gens = Vec::new();
            for s in parts {
                for g in s.space.pair_ids(x, y) {
                    let info = s.space.gen(g);
                    gens.push(crate::graded::Generator::new(format!("{}{}", s.tag, info.name), info.degree - s.shift));
                }
            }
            if !gens.is_empty() {
                pairs.push((
                    (objects[x as usize].clone(), objects[y as usize].clone()),
                    crate::graded::GradedBasis::new(gens)?,
                ));
            }
        }
    }
    let sp = PairSpace::new(objects.to_vec(), pairs)?;
    let maps = parts
        .iter()
        .map(|s| {
            (0..s.space.len() as GenId)
                .map(|g| {
                    let info = s.space.gen(g);
                    sp.lookup(info.source, info.target, &format!("{}{}", s.tag, info.name)).expect("summand generator")
                })
                .collect()
        })
        .collect();
    Ok((sp, maps))
}

fn assemble(a: &AInfty, parts: &[Summand], blocks: &[Block]) -> Result<(Bimodule, Vec<Vec<GenId>>)> {
    let (sp, maps) = sum_space(a.space.objects(), parts)?;
    let mut ops: HashMap<Vec<Letter>, Element> = HashMap::new();
    for b in blocks {
        for (w, e) in twisted_table(a, b.table, b.sign, b.factor) {
            let word: Vec<Letter> = w
                .iter()
                .map(|l| match l {
                    Letter::A(g) => Letter::A(*g),
                    Letter::M(g) => Letter::M(maps[b.from][*g as usize]),
                })
                .collect();
            let slot = ops.entry(word).or_default();
            for (g, c) in e.terms() {
                slot.add_term(maps[b.to][g as usize], c);
            }
        }
    }
    Ok((Bimodule::from_raw(sp, ops), maps))
}

fn require_closed(
    a: &AInfty,
    p: &Bimodule,
    q: &Bimodule,
    f: &BimoduleMorphism,
    max_arity: usize,
    what: &str,
) -> Result<()> {
    let d = hom_differential(a, p, q, f, max_arity);
    if d.is_zero() {
        Ok(())
    } else {
        let v = d.describe(a, &p.space, &q.space);
        Err(KitError::Argument(format!(
            "{} is not closed; residual {}",
            what,
            serde_json::to_string(&v).unwrap_or_default()
        )))
    }
}

/// `Cone(f) = P[1] ⊕ Q` for a closed degree-0 morphism.
pub fn mapping_cone(a: &AInfty, p: &Bimodule, q: &Bimodule, f: &BimoduleMorphism, max_arity: usize) -> Result<Bimodule> {
    if f.degree != 0 {
        return Err(KitError::Argument(format!("cone needs a degree-0 morphism, got degree {}", f.degree)));
    }
    require_closed(a, p, q, f, max_arity, "morphism")?;
    let parts = [
        Summand { space: &p.space, shift: 1, tag: "c." },
        Summand { space: &q.space, shift: 0, tag: "t." },
    ];
    let blocks = [
        Block { from: 0, to: 0, table: p.table(), sign: -1, factor: 1 },
        Block { from: 1, to: 1, table: q.table(), sign: 1, factor: 0 },
        Block { from: 0, to: 1, table: f.table(), sign: 1, factor: 1 },
    ];
    Ok(assemble(a, &parts, &blocks)?.0)
}

/// The literal four-family differential of a cochain `ψ: A∨ → A`, and each family separately.
pub fn cc2_differential_literal(a: &AInfty, psi: &BimoduleMorphism, max_arity: usize) -> (BimoduleMorphism, [BimoduleMorphism; 4]) {
    let dual = dual_space(a);
    let words = bimodule_words(a, &dual, max_arity);
    let per_word: Vec<(Vec<Letter>, [Element; 4])> = words
        .par_iter()
        .map(|w| (w.clone(), literal_word(a, &dual, psi, w)))
        .collect();
    let mut parts: [HashMap<Vec<Letter>, Element>; 4] = Default::default();
    let mut total: HashMap<Vec<Letter>, Element> = HashMap::new();
    for (w, es) in per_word {
        for (i, e) in es.into_iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            total.entry(w.clone()).or_default().add_signed(&e, 1);
            parts[i].insert(w.clone(), e);
        }
    }
    let deg = psi.degree + 1;
    let parts = parts.map(|m| BimoduleMorphism::from_raw(deg, m));
    (BimoduleMorphism::from_raw(deg, total), parts)
}

/// Families (i)–(iv) on one word. Letters are numbered `a_1, …, a_{k+l+1}` from the right,
/// with the dual letter at position `k+1`.
fn literal_word(a: &AInfty, dual: &PairSpace, psi: &BimoduleMorphism, w: &[Letter]) -> [Element; 4] {
    let n = w.len();
    let (k, _l) = crate::ainfty::word_kl(w);
    let at = |m: usize| w[n - m];
    let degs: Vec<i64> = (1..=n)
        .map(|m| match at(m) {
            Letter::A(g) => a.space.degree(g),
            Letter::M(g) => dual.degree(g),
        })
        .collect();
    let dag = |case: Case, i: usize, j: usize| -> i64 { parity_sign(dag_sign(case, psi.degree, i, j, &degs) as i64) };
    let ends = |m: usize| -> (ObjId, ObjId) {
        match at(m) {
            Letter::A(g) => (a.space.gen(g).source, a.space.gen(g).target),
            Letter::M(g) => (dual.gen(g).source, dual.gen(g).target),
        }
    };
    // display word from letters a_hi .. a_lo
    let span = |hi: usize, lo: usize| -> Vec<Letter> { (lo..=hi).rev().map(at).collect() };
    let alg = |hi: usize, lo: usize| -> Vec<GenId> {
        (lo..=hi)
            .rev()
            .map(|m| match at(m) {
                Letter::A(g) => g,
                Letter::M(_) => unreachable!("algebra range"),
            })
            .collect()
    };
    let mut out: [Element; 4] = Default::default();

    // (i): μ(a_{k+l+1} .. a_{j+1}, ψ(a_j .. a_{i+1}), a_i .. a_1)
    for i in 0..=k {
        for j in k + 1..=n {
            let Some(inner) = psi.comp(&span(j, i + 1)) else { continue };
            let sign = dag(Case::I, i, j);
            for (y, c) in inner.terms() {
                let mut word = alg_if(j + 1, n, &alg);
                word.push(y);
                word.extend(alg_if(1, i, &alg));
                if let Some(o) = a.mu(&word) {
                    out[0].add_scaled(o, &c.scale(sign));
                }
            }
        }
    }

    // (ii) and (iii): ψ(…, μ^j(a_{i+j} .. a_{i+1}), a_i .. a_1) with the block away from the dual letter
    for i in 0..=n {
        for j in 0..=n - i {
            let block_has_dual = i < k + 1 && k < i + j;
            if block_has_dual {
                continue;
            }
            let (family, case) = if i + j <= k { (1, Case::II) } else { (2, Case::III) };
            let inner: Option<&Element> = if j == 0 {
                let obj = if i >= 1 { ends(i).1 } else { ends(1).0 };
                let c = a.mu0(obj);
                (!c.is_zero()).then_some(c)
            } else {
                a.mu(&alg(i + j, i + 1))
            };
            let Some(inner) = inner else { continue };
            let sign = dag(case, i, j);
            for (x, c) in inner.terms() {
                let mut word = if i + j < n { span(n, i + j + 1) } else { Vec::new() };
                word.push(Letter::A(x));
                if i >= 1 {
                    word.extend(span(i, 1));
                }
                if let Some(o) = psi.comp(&word) {
                    out[family].add_scaled(o, &c.scale(sign));
                }
            }
        }
    }

    // (iv): ψ(…, Σ_x ⟨a∨, μ^j(a_k .. a_{i+1}, x, a_{i+j} .. a_{k+2})⟩ x∨, a_i .. a_1)
    let Letter::M(av) = at(k + 1) else { unreachable!("dual letter at k+1") };
    let a_name = crate::graded::dual_name(&dual.gen(av).name);
    let a_info = dual.gen(av);
    let a_gen = a.space.lookup(a_info.target, a_info.source, &a_name).expect("dual of a generator");
    for i in 0..=k {
        for j in 1..=n - i {
            if i + j < k + 1 {
                continue;
            }
            let sign = dag(Case::IV, i, j);
            for x in 0..a.space.len() as GenId {
                let mut rot = alg_if(i + 1, k, &alg);
                rot.push(x);
                rot.extend(alg_if(k + 2, i + j, &alg));
                let Some(o) = a.mu(&rot) else { continue };
                let Some(c) = o.coeff(a_gen) else { continue };
                let xd = dual_id(a, dual, x);
                let mut word = if i + j < n { span(n, i + j + 1) } else { Vec::new() };
                word.push(Letter::M(xd));
                if i >= 1 {
                    word.extend(span(i, 1));
                }
                if let Some(val) = psi.comp(&word) {
                    out[3].add_scaled(val, &c.scale(sign));
                }
            }
        }
    }
    out
}

fn alg_if(lo: usize, hi: usize, alg: &dyn Fn(usize, usize) -> Vec<GenId>) -> Vec<GenId> {
    if lo > hi {
        Vec::new()
    } else {
        alg(hi, lo)
    }
}

/// The general morphism differential specialized to (dual diagonal, diagonal).
pub fn cc2_differential(a: &AInfty, psi: &BimoduleMorphism, max_arity: usize) -> BimoduleMorphism {
    let p = dual_diagonal_bimodule(a);
    let q = diagonal_bimodule(a);
    hom_differential(a, &p, &q, psi, max_arity)
}

/// Random morphism with the given degree: each admissible `(word, output)` gets a nonzero
/// coefficient with probability `density`.
pub fn random_morphism(
    a: &AInfty,
    src: &PairSpace,
    tgt: &PairSpace,
    degree: i64,
    max_arity: usize,
    density: f64,
    rng: &mut impl Rng,
) -> BimoduleMorphism {
    let mut comps: HashMap<Vec<Letter>, Element> = HashMap::new();
    for w in bimodule_words(a, src, max_arity) {
        let (x, y) = word_ends(a, src, &w);
        let (k, l) = crate::ainfty::word_kl(&w);
        let deg_in: i64 = w
            .iter()
            .map(|lt| match lt {
                Letter::A(g) => a.space.degree(*g),
                Letter::M(g) => src.degree(*g),
            })
            .sum();
        let want = deg_in + degree - (k + l) as i64;
        for g in tgt.pair_ids(x, y) {
            if tgt.degree(g) != want || !rng.gen_bool(density) {
                continue;
            }
            let c = crate::fixtures::random_series(rng, a.trunc, 2);
            comps.entry(w.clone()).or_default().add_term(g, &c);
        }
    }
    BimoduleMorphism::from_raw(degree, comps)
}

/// `ρ: A → Q*B` with `ρ^{0,1,0} = Q` and no higher components, together with `Q*B`.
pub fn tautological_rho(a: &AInfty, q: &LinearFunctor, b: &AInfty) -> Result<(Bimodule, BimoduleMorphism)> {
    let qb = pullback_bimodule(q, a, b, &diagonal_bimodule(b))?;
    let mut comps: HashMap<Vec<Letter>, Element> = HashMap::new();
    for g in 0..a.space.len() as GenId {
        let info = a.space.gen(g);
        let mut e = Element::new();
        for (h, v) in &q.images[g as usize] {
            let id = qb
                .space
                .lookup(info.source, info.target, &b.space.gen(*h).name)
                .ok_or_else(|| KitError::Argument("functor image missing from the pullback".into()))?;
            e.add_term(id, &QSeries::monomial(v.clone(), 0, a.trunc));
        }
        if !e.is_zero() {
            comps.insert(vec![Letter::M(g)], e);
        }
    }
    Ok((qb, BimoduleMorphism::from_raw(0, comps)))
}

/// Whether the `q = 0` linear part of `φ: P → Q` is a quasi-isomorphism on the pair `(x, y)`.
pub fn is_filtered_quasi_iso(p: &Bimodule, q: &Bimodule, phi: &BimoduleMorphism, x: ObjId, y: ObjId) -> Result<bool> {
    let cp = p.pair_complex(x, y)?;
    let cq = q.pair_complex(x, y)?;
    let deg = phi.degree;
    // target reindexed so that φ has degree 0; the sign keeps it a chain map
    let tgt = reindex(&cq.complex, deg);
    let mut maps = std::collections::BTreeMap::new();
    for (s, gens) in cp.slots.iter().enumerate() {
        let k = cp.degree_of_slot(s);
        let mut m = IntMatrix::zeros(tgt.rank_at(k), gens.len());
        for (j, &g) in gens.iter().enumerate() {
            if let Some(e) = phi.comp(&[Letter::M(g)]) {
                for (h, c) in e.terms() {
                    let v = c.at_q0();
                    if v == num_bigint::BigInt::from(0) {
                        continue;
                    }
                    let (hs, hi) = cq.position(h).expect("target generator");
                    if cq.degree_of_slot(hs) != k + deg {
                        return Err(KitError::Argument("morphism is not homogeneous".into()));
                    }
                    m.set(hi, j, v);
                }
            }
        }
        maps.insert(k, m);
    }
    let f = ChainMap::new(cp.complex.clone(), tgt, maps)
        .map_err(|_| KitError::Argument("linear part is not a chain map at q = 0".into()))?;
    Ok(homology::is_quasi_iso(&f))
}

fn reindex(c: &IntChainComplex, deg: i64) -> IntChainComplex {
    if c.is_empty() {
        return IntChainComplex::zero();
    }
    let s = parity_sign(deg);
    let diffs = (0..c.len() - 1)
        .map(|i| if s < 0 { c.diff(i).neg() } else { c.diff(i).clone() })
        .collect();
    IntChainComplex::new(c.start - deg, c.ranks().to_vec(), diffs).expect("reindexing keeps d² = 0")
}

/// Per-pair `q = 0` homology of a bimodule.
#[derive(Clone, Debug, Serialize)]
pub struct PairHomology {
    pub pair: String,
    pub acyclic: bool,
    pub homology: std::collections::BTreeMap<i64, homology::HomologyGroup>,
}

pub fn pair_homologies(p: &Bimodule) -> Result<Vec<PairHomology>> {
    let mut out = Vec::new();
    for ((x, y), _) in p.space.pairs() {
        let c = p.pair_complex(x, y)?;
        let h = homology::homology(&c.complex);
        out.push(PairHomology {
            pair: p.space.pair_label(x, y),
            acyclic: h.values().all(|g| g.is_zero()),
            homology: h,
        });
    }
    Ok(out)
}

/// Inputs of the three-term total bimodule.
pub struct TotalInput<'a> {
    pub a: &'a AInfty,
    pub b: &'a AInfty,
    pub functor: &'a LinearFunctor,
    /// Degree `n` cochain `A∨ → A`.
    pub delta: &'a BimoduleMorphism,
    /// Degree `n − 1` morphism `A∨ → Q*B`.
    pub h: &'a BimoduleMorphism,
    pub max_arity: usize,
}

/// Outcome of assembling and checking the total bimodule.
#[derive(Clone, Debug, Serialize)]
pub struct TotalReport {
    pub n: i64,
    pub delta_closed: bool,
    pub rho_closed: bool,
    pub h_equation: bool,
    pub bimodule_valid: bool,
    pub delta_residual: Vec<Violation>,
    pub rho_residual: Vec<Violation>,
    pub h_residual: Vec<Violation>,
    pub violations: Vec<Violation>,
    pub pairs: Vec<PairHomology>,
}

impl TotalReport {
    pub fn acyclic(&self) -> bool {
        self.bimodule_valid && self.pairs.iter().all(|p| p.acyclic)
    }

    pub fn passed(&self) -> bool {
        self.bimodule_valid && self.delta_closed && self.rho_closed && self.h_equation && self.acyclic()
    }
}

/// `T = A∨[−n][2] ⊕ A[1] ⊕ Q*B` with structure maps from `μ`, `δ`, `ρ` and `h`.
pub fn total_complex(input: &TotalInput) -> Result<(Bimodule, TotalReport)> {
    let a = input.a;
    let n = a.cy_dim;
    let max = input.max_arity;
    if input.delta.degree != n {
        return Err(KitError::Argument(format!("δ has degree {} (expected {})", input.delta.degree, n)));
    }
    if input.h.degree != n - 1 {
        return Err(KitError::Argument(format!("h has degree {} (expected {})", input.h.degree, n - 1)));
    }
    let dual = dual_diagonal_bimodule(a);
    let diag = diagonal_bimodule(a);
    let (qb, rho) = tautological_rho(a, input.functor, input.b)?;

    let d_delta = hom_differential(a, &dual, &diag, input.delta, max);
    let d_rho = hom_differential(a, &diag, &qb, &rho, max);
    let rho_delta = compose(a, &dual.space, input.delta, &rho, max);
    let dh = hom_differential(a, &dual, &qb, input.h, max);
    let h_defect = dh.add_signed(&rho_delta, -1);

    let parts = [
        Summand { space: &dual.space, shift: 2 - n, tag: "u." },
        Summand { space: &diag.space, shift: 1, tag: "m." },
        Summand { space: &qb.space, shift: 0, tag: "b." },
    ];
    let blocks = [
        Block { from: 0, to: 0, table: dual.table(), sign: parity_sign(n), factor: n },
        Block { from: 1, to: 1, table: diag.table(), sign: -1, factor: 1 },
        Block { from: 2, to: 2, table: qb.table(), sign: 1, factor: 0 },
        Block { from: 0, to: 1, table: input.delta.table(), sign: 1, factor: n },
        Block { from: 1, to: 2, table: rho.table(), sign: 1, factor: 1 },
        Block { from: 0, to: 2, table: input.h.table(), sign: -1, factor: n },
    ];
    let (total, _) = assemble(a, &parts, &blocks)?;
    let violations = total.check(a, max)?;
    let pairs = if violations.is_empty() { pair_homologies(&total)? } else { Vec::new() };
    let report = TotalReport {
        n,
        delta_closed: d_delta.is_zero(),
        rho_closed: d_rho.is_zero(),
        h_equation: h_defect.is_zero(),
        bimodule_valid: violations.is_empty(),
        delta_residual: d_delta.describe(a, &dual.space, &diag.space),
        rho_residual: d_rho.describe(a, &diag.space, &qb.space),
        h_residual: h_defect.describe(a, &dual.space, &qb.space),
        violations,
        pairs,
    };
    Ok((total, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_pair(a: &AInfty, seed: u64, max: usize) {
        let dual = dual_space(a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for degree in -2..=2 {
            let psi = random_morphism(a, &dual, &a.space, degree, max - 1, 0.4, &mut rng);
            let general = cc2_differential(a, &psi, max);
            let (literal, _) = cc2_differential_literal(a, &psi, max);
            assert_eq!(general, literal, "degree {}", degree);
            let dd = cc2_differential(a, &general, max);
            assert!(dd.is_zero(), "d² ≠ 0 in degree {}", degree);
        }
    }

    #[test]
    fn zero_cochain() {
        let a = fixtures::exterior_one(8);
        let z = BimoduleMorphism::zero(3);
        assert!(cc2_differential(&a, &z, 5).is_zero());
        assert!(cc2_differential_literal(&a, &z, 5).0.is_zero());
    }

    #[test]
    fn unit_only_hand_computation() {
        let a = fixtures::unit_only(8);
        let dual = dual_space(&a);
        let e = 0;
        let ed = dual_id(&a, &dual, e);
        let mut comps = HashMap::new();
        comps.insert(vec![Letter::M(ed)], Element::single(e, QSeries::one(8)));
        let psi = BimoduleMorphism::from_raw(0, comps);
        let (lit, parts) = cc2_differential_literal(&a, &psi, 3);
        // on (e, e∨) and (e∨, e) family (i) gives +e and family (iv) gives −e
        for w in [vec![Letter::A(e), Letter::M(ed)], vec![Letter::M(ed), Letter::A(e)]] {
            assert_eq!(parts[0].comp(&w), Some(&Element::single(e, QSeries::one(8))));
            assert_eq!(parts[3].comp(&w), Some(&Element::single(e, QSeries::constant(-1, 8))));
        }
        assert!(lit.is_zero());
        assert_eq!(cc2_differential(&a, &psi, 3), lit);
    }

    #[test]
    fn agreement_and_square_zero_on_exterior() {
        check_pair(&fixtures::exterior_one(8), 1, 5);
    }

    #[test]
    fn agreement_and_square_zero_on_curved() {
        check_pair(&fixtures::curved_x2(8), 2, 5);
    }

    #[test]
    fn agreement_on_random_dg_algebras() {
        for seed in 0..6 {
            check_pair(&fixtures::random_dg_ainfty(seed, 8), 100 + seed, 4);
        }
    }

    #[test]
    fn dual_diagonal_of_curved_is_valid() {
        let a = fixtures::curved_x2(8);
        assert!(dual_diagonal_bimodule(&a).check(&a, 5).unwrap().is_empty());
        assert!(diagonal_bimodule(&a).check(&a, 5).unwrap().is_empty());
    }

    #[test]
    fn general_differential_squares_to_zero_on_diagonal() {
        let a = fixtures::exterior_one(8);
        let p = diagonal_bimodule(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_morphism(&a, &p.space, &p.space, 1, 4, 0.5, &mut rng);
        let d = hom_differential(&a, &p, &p, &phi, 5);
        assert!(hom_differential(&a, &p, &p, &d, 5).is_zero());
    }

    #[test]
    fn leibniz_rule_for_composition() {
        let a = fixtures::exterior_one(8);
        let p = diagonal_bimodule(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let max = 4;
        for (d1, d2) in [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 2)] {
            let phi = random_morphism(&a, &p.space, &p.space, d1, max, 0.5, &mut rng);
            let psi = random_morphism(&a, &p.space, &p.space, d2, max, 0.5, &mut rng);
            let lhs = hom_differential(&a, &p, &p, &compose(&a, &p.space, &phi, &psi, max), max);
            let r1 = compose(&a, &p.space, &phi, &hom_differential(&a, &p, &p, &psi, max), max);
            let r2 = compose(&a, &p.space, &hom_differential(&a, &p, &p, &phi, max), &psi, max);
            let rhs = r1.add_signed(&r2, parity_sign(d2));
            assert_eq!(lhs, rhs, "degrees {} {}", d1, d2);
        }
    }

    #[test]
    fn identity_is_closed_and_cone_acyclic() {
        let a = fixtures::exterior_one(8);
        let p = diagonal_bimodule(&a);
        let id = identity_morphism(&p, 8);
        assert!(hom_differential(&a, &p, &p, &id, 5).is_zero());
        let cone = mapping_cone(&a, &p, &p, &id, 5).unwrap();
        assert!(cone.check(&a, 5).unwrap().is_empty());
        assert!(pair_homologies(&cone).unwrap().iter().all(|h| h.acyclic));
        assert!(is_filtered_quasi_iso(&p, &p, &id, 0, 0).unwrap());
    }

    #[test]
    fn shifted_bimodules_stay_valid() {
        let a = fixtures::exterior_one(8);
        for p in [diagonal_bimodule(&a), dual_diagonal_bimodule(&a)] {
            for s in -2..=2 {
                assert!(shift_bimodule(&a, &p, s).check(&a, 5).unwrap().is_empty(), "shift {}", s);
            }
        }
    }

    #[test]
    fn shift_commutes_with_differential() {
        let a = fixtures::exterior_one(8);
        let p = dual_diagonal_bimodule(&a);
        let q = diagonal_bimodule(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in [-1, 1, 2] {
            let phi = random_morphism(&a, &p.space, &q.space, 1, 4, 0.5, &mut rng);
            let ps = shift_bimodule(&a, &p, s);
            let lhs = hom_differential(&a, &ps, &q, &shift_source(&a, &phi, s), 5);
            let rhs = shift_source(&a, &hom_differential(&a, &p, &q, &phi, 5), s);
            assert_eq!(lhs, rhs.scaled(1), "shift {}", s);
        }
    }

    #[test]
    fn zero_cone_is_direct_sum() {
        let a = fixtures::exterior_one(8);
        let p = diagonal_bimodule(&a);
        let z = BimoduleMorphism::zero(0);
        let cone = mapping_cone(&a, &p, &p, &z, 4).unwrap();
        assert!(cone.check(&a, 4).unwrap().is_empty());
        let h = pair_homologies(&cone).unwrap();
        let total: usize = h[0].homology.values().map(|g| g.betti).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn non_closed_cone_rejected() {
        let a = fixtures::exterior_one(8);
        let p = diagonal_bimodule(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_morphism(&a, &p.space, &p.space, 0, 3, 0.9, &mut rng);
        if !hom_differential(&a, &p, &p, &f, 4).is_zero() {
            assert!(matches!(mapping_cone(&a, &p, &p, &f, 4), Err(KitError::Argument(_))));
        }
    }

    #[test]
    fn q_multiple_is_not_filtered_quasi_iso() {
        let a = fixtures::exterior_one(8);
        let p = diagonal_bimodule(&a);
        let comps = (0..p.space.len() as GenId)
            .map(|g| (vec![Letter::M(g)], Element::single(g, QSeries::monomial(1.into(), 1, 8))))
            .collect();
        let f = BimoduleMorphism::from_raw(0, comps);
        assert!(!is_filtered_quasi_iso(&p, &p, &f, 0, 0).unwrap());
    }

    #[test]
    fn total_fixtures_behave_as_expected() {
        for f in fixtures::total_fixtures(6) {
            let (_, r) = total_complex(&f.input(5)).unwrap();
            let conditions = r.delta_closed && r.rho_closed && r.h_equation;
            assert_eq!(r.bimodule_valid, conditions, "{}", f.name);
            assert_eq!(r.passed(), f.expect_pass, "{}", f.name);
        }
    }

    #[test]
    fn total_controls_fail_for_the_intended_reason() {
        let c = fixtures::total_controls(6);
        let reports: Vec<TotalReport> = c.iter().map(|f| total_complex(&f.input(4)).unwrap().1).collect();
        assert!(!reports[0].h_equation && reports[0].delta_closed);
        assert!(!reports[1].h_equation);
        assert!(!reports[2].delta_closed && reports[2].h_equation);
        assert!(reports[3].bimodule_valid && !reports[3].acyclic());
        assert!(reports[4].bimodule_valid && !reports[4].acyclic());
    }

    #[test]
    fn delta_of_all_complex_is_filtered_quasi_iso() {
        let f = fixtures::all_complex(6);
        let dual = dual_diagonal_bimodule(&f.a);
        let diag = diagonal_bimodule(&f.a);
        assert!(is_filtered_quasi_iso(&dual, &diag, &f.delta, 0, 0).unwrap());
    }
}
