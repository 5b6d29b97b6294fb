//! Curved A∞-categories and bimodules given by finite operation tables.
//!
//! Inputs are stored in display order `(a_d, ..., a_1)`. Bimodule inputs are flat
//! words of [`Letter`]s containing exactly one module letter.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{KitError, Result};
use crate::graded::{parity_sign, Element, GradedBasis, QSeries};
use crate::homology::{self, IntChainComplex, IntMatrix};

pub type ObjId = u32;
pub type GenId = u32;

/// Metadata of one generator of a pair space.
#[derive(Clone, Debug)]
pub struct GenInfo {
    pub source: ObjId,
    pub target: ObjId,
    pub name: String,
    pub degree: i64,
    pub local: usize,
}

/// Graded bases indexed by ordered object pairs `(X,Y)`, flattened into global ids.
#[derive(Clone, Debug)]
pub struct PairSpace {
    objects: Vec<String>,
    obj_index: HashMap<String, ObjId>,
    pairs: Vec<((ObjId, ObjId), GradedBasis)>,
    pair_index: HashMap<(ObjId, ObjId), usize>,
    pair_offset: Vec<GenId>,
    gens: Vec<GenInfo>,
}

impl PairSpace {
    /// Builds a space; pairs not listed are empty.
    pub fn new(objects: Vec<String>, pairs: Vec<((String, String), GradedBasis)>) -> Result<Self> {
        let mut obj_index = HashMap::new();
        for (i, o) in objects.iter().enumerate() {
            if o.contains(',') {
                return Err(KitError::Structure(format!("object label `{}` contains a comma", o)));
            }
            if obj_index.insert(o.clone(), i as ObjId).is_some() {
                return Err(KitError::Structure(format!("duplicate object `{}`", o)));
            }
        }
        let mut sp = PairSpace {
            objects,
            obj_index,
            pairs: Vec::new(),
            pair_index: HashMap::new(),
            pair_offset: Vec::new(),
            gens: Vec::new(),
        };
        for ((x, y), basis) in pairs {
            let xi = sp.object(&x)?;
            let yi = sp.object(&y)?;
            if sp.pair_index.contains_key(&(xi, yi)) {
                return Err(KitError::Structure(format!("pair `{},{}` listed twice", x, y)));
            }
            sp.pair_index.insert((xi, yi), sp.pairs.len());
            sp.pair_offset.push(sp.gens.len() as GenId);
            for (local, g) in basis.generators().iter().enumerate() {
                sp.gens.push(GenInfo {
                    source: xi,
                    target: yi,
                    name: g.name.clone(),
                    degree: g.degree,
                    local,
                });
            }
            sp.pairs.push(((xi, yi), basis));
        }
        Ok(sp)
    }

    pub fn object(&self, name: &str) -> Result<ObjId> {
        self.obj_index
            .get(name)
            .copied()
            .ok_or_else(|| KitError::Structure(format!("unknown object `{}`", name)))
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gen(&self, id: GenId) -> &GenInfo {
        &self.gens[id as usize]
    }

    pub fn gens(&self) -> &[GenInfo] {
        &self.gens
    }

    pub fn degree(&self, id: GenId) -> i64 {
        self.gens[id as usize].degree
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((ObjId, ObjId), &GradedBasis)> {
        self.pairs.iter().map(|(p, b)| (*p, b))
    }

    pub fn basis(&self, x: ObjId, y: ObjId) -> Option<&GradedBasis> {
        self.pair_index.get(&(x, y)).map(|&i| &self.pairs[i].1)
    }

    /// Global ids of the generators of `(x,y)`.
    pub fn pair_ids(&self, x: ObjId, y: ObjId) -> std::ops::Range<GenId> {
        match self.pair_index.get(&(x, y)) {
            Some(&i) => {
                let start = self.pair_offset[i];
                start..start + self.pairs[i].1.len() as GenId
            }
            None => 0..0,
        }
    }

    pub fn lookup(&self, x: ObjId, y: ObjId, name: &str) -> Option<GenId> {
        let i = *self.pair_index.get(&(x, y))?;
        let local = self.pairs[i].1.position(name)?;
        Some(self.pair_offset[i] + local as GenId)
    }

    /// Resolves a `"X,Y"` pair label and a generator name.
    pub fn lookup_label(&self, label: &str, name: &str) -> Result<GenId> {
        let (x, y) = self.parse_label(label)?;
        self.lookup(x, y, name)
            .ok_or_else(|| KitError::Structure(format!("unknown generator `{}` in pair `{}`", name, label)))
    }

    pub fn parse_label(&self, label: &str) -> Result<(ObjId, ObjId)> {
        let (x, y) = label
            .split_once(',')
            .ok_or_else(|| KitError::Structure(format!("malformed pair label `{}`", label)))?;
        Ok((self.object(x.trim())?, self.object(y.trim())?))
    }

    pub fn pair_label(&self, x: ObjId, y: ObjId) -> String {
        format!("{},{}", self.objects[x as usize], self.objects[y as usize])
    }

    pub fn gen_label(&self, id: GenId) -> String {
        let g = self.gen(id);
        format!("{}:{}", self.pair_label(g.source, g.target), g.name)
    }

    /// Same pairs and names with degrees lowered by `k`.
    pub fn shifted(&self, k: i64) -> PairSpace {
        let mut sp = self.clone();
        for g in &mut sp.gens {
            g.degree -= k;
        }
        for (_, b) in &mut sp.pairs {
            *b = crate::graded::shift_basis(b, k);
        }
        sp
    }

    /// Generators bucketed by `(source, target)`.
    fn by_source(&self) -> Vec<Vec<GenId>> {
        let mut v = vec![Vec::new(); self.objects.len()];
        for (i, g) in self.gens.iter().enumerate() {
            v[g.source as usize].push(i as GenId);
        }
        v
    }
}

/// Composable algebra words in display order, grouped by length.
#[derive(Clone, Debug)]
pub struct WordTable {
    /// `words[d]` lists words of length `d`, each with its first source and last target.
    words: Vec<Vec<(ObjId, ObjId, Vec<GenId>)>>,
}

impl WordTable {
    pub fn new(space: &PairSpace, max_len: usize) -> Self {
        let by_source = space.by_source();
        let mut words: Vec<Vec<(ObjId, ObjId, Vec<GenId>)>> = Vec::with_capacity(max_len + 1);
        words.push((0..space.num_objects() as ObjId).map(|x| (x, x, Vec::new())).collect());
        for d in 1..=max_len {
            let mut next = Vec::new();
            for (src, tgt, w) in &words[d - 1] {
                // extend on the left: new a_d with source = current target
                for &g in &by_source[*tgt as usize] {
                    let mut nw = Vec::with_capacity(d);
                    nw.push(g);
                    nw.extend_from_slice(w);
                    next.push((*src, space.gen(g).target, nw));
                }
            }
            words.push(next);
        }
        WordTable { words }
    }

    pub fn max_len(&self) -> usize {
        self.words.len() - 1
    }

    /// Words of length `d` as `(source of a_1, target of a_d, word)`.
    pub fn of_len(&self, d: usize) -> &[(ObjId, ObjId, Vec<GenId>)] {
        &self.words[d]
    }
}

/// One input slot of a bimodule word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A(GenId),
    M(GenId),
}

/// Position of the module letter, i.e. the number `l` of left algebra inputs.
pub fn module_pos(word: &[Letter]) -> usize {
    word.iter()
        .position(|l| matches!(l, Letter::M(_)))
        .expect("bimodule word without module letter")
}

/// `(k, l)` of a bimodule word.
pub fn word_kl(word: &[Letter]) -> (usize, usize) {
    let l = module_pos(word);
    (word.len() - l - 1, l)
}

/// A table entry: inputs in display order, output generator, coefficient.
#[derive(Clone, Debug)]
pub struct OpEntry {
    pub inputs: Vec<GenId>,
    pub output: GenId,
    pub coeff: QSeries,
}

/// Failed relation on a specific input word.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub arity: usize,
    pub inputs: Vec<String>,
    pub residual: Vec<(String, String)>,
}

/// A curved A∞-category with finitely many nonzero structure constants.
#[derive(Clone, Debug)]
pub struct AInfty {
    pub space: PairSpace,
    ops: HashMap<Vec<GenId>, Element>,
    curvature: Vec<Element>,
    max_op_arity: usize,
    pub cy_dim: i64,
    pub trunc: usize,
}

impl AInfty {
    /// Validates degrees, composability and the curvature condition.
    pub fn new(space: PairSpace, entries: Vec<OpEntry>, cy_dim: i64, trunc: usize) -> Result<Self> {
        let mut ops: HashMap<Vec<GenId>, Element> = HashMap::new();
        let mut curvature = vec![Element::new(); space.num_objects()];
        let mut bad = Vec::new();
        let mut max_op_arity = 0;
        for e in entries {
            let coeff = e.coeff.with_order(trunc);
            let out = space.gen(e.output);
            let d = e.inputs.len();
            let deg_in: i64 = e.inputs.iter().map(|&g| space.degree(g)).sum();
            if out.degree != deg_in + 2 - d as i64 {
                bad.push(format!(
                    "mu^{} entry with output {} has degree {} (expected {})",
                    d,
                    space.gen_label(e.output),
                    out.degree,
                    deg_in + 2 - d as i64
                ));
                continue;
            }
            if d == 0 {
                if out.source != out.target {
                    bad.push(format!("curvature {} is not an endomorphism", space.gen_label(e.output)));
                    continue;
                }
                if !coeff.at_q0().is_zero() {
                    bad.push(format!(
                        "curvature coefficient on {} has a nonzero q^0 term",
                        space.gen_label(e.output)
                    ));
                    continue;
                }
                curvature[out.source as usize].add_term(e.output, &coeff);
                continue;
            }
            if let Err(msg) = check_composable(&space, &e.inputs, out.source, out.target) {
                bad.push(msg);
                continue;
            }
            max_op_arity = max_op_arity.max(d);
            ops.entry(e.inputs).or_default().add_term(e.output, &coeff);
        }
        if !bad.is_empty() {
            return Err(KitError::Structure(bad.join("; ")));
        }
        ops.retain(|_, v| !v.is_zero());
        Ok(AInfty { space, ops, curvature, max_op_arity, cy_dim, trunc })
    }

    pub fn zero_series(&self) -> QSeries {
        QSeries::zero(self.trunc)
    }

    pub fn one(&self) -> QSeries {
        QSeries::one(self.trunc)
    }

    /// `μ^d` on a basis word (`d ≥ 1`).
    pub fn mu(&self, word: &[GenId]) -> Option<&Element> {
        self.ops.get(word)
    }

    /// `μ^0` at an object.
    pub fn mu0(&self, obj: ObjId) -> &Element {
        &self.curvature[obj as usize]
    }

    pub fn is_curved(&self) -> bool {
        self.curvature.iter().any(|c| !c.is_zero())
    }

    pub fn max_op_arity(&self) -> usize {
        self.max_op_arity
    }

    /// All table entries with `d ≥ 1` in a deterministic order.
    pub fn entries(&self) -> Vec<OpEntry> {
        let mut keys: Vec<&Vec<GenId>> = self.ops.keys().collect();
        keys.sort_by(|a, b| (a.len(), *a).cmp(&(b.len(), *b)));
        let mut out = Vec::new();
        for k in keys {
            for (g, c) in self.ops[k].terms() {
                out.push(OpEntry { inputs: k.clone(), output: g, coeff: c.clone() });
            }
        }
        out
    }

    /// Curvature entries per object.
    pub fn curvature_entries(&self) -> Vec<OpEntry> {
        let mut out = Vec::new();
        for c in &self.curvature {
            for (g, v) in c.terms() {
                out.push(OpEntry { inputs: Vec::new(), output: g, coeff: v.clone() });
            }
        }
        out
    }

    /// Reduction modulo `q`.
    pub fn reduce_q0(&self) -> AInfty {
        let entries = self
            .entries()
            .into_iter()
            .map(|e| OpEntry { coeff: e.coeff.reduce_q0(), ..e })
            .collect();
        AInfty::new(self.space.clone(), entries, self.cy_dim, self.trunc).expect("reduction stays valid")
    }

    fn weight(&self, g: GenId) -> i64 {
        self.space.degree(g) - 1
    }

    /// Object sitting at gap `p` of a display word.
    fn gap_object(&self, word: &[GenId], p: usize, empty_obj: ObjId) -> ObjId {
        if word.is_empty() {
            empty_obj
        } else if p < word.len() {
            self.space.gen(word[p]).target
        } else {
            self.space.gen(word[p - 1]).source
        }
    }

    /// Left-hand side of the A∞ relation on one word.
    pub fn relation(&self, word: &[GenId], empty_obj: ObjId) -> Element {
        let d = word.len();
        let mut acc = Element::new();
        let mut buf: Vec<GenId> = Vec::with_capacity(d + 1);
        for s in 0..=d {
            for e in s..=d {
                let sign: i64 = parity_sign(word[e..].iter().map(|&g| self.weight(g)).sum());
                let inner: &Element = if e == s {
                    self.mu0(self.gap_object(word, s, empty_obj))
                } else {
                    match self.mu(&word[s..e]) {
                        Some(x) => x,
                        None => continue,
                    }
                };
                for (x, c) in inner.terms() {
                    buf.clear();
                    buf.extend_from_slice(&word[..s]);
                    buf.push(x);
                    buf.extend_from_slice(&word[e..]);
                    if let Some(out) = self.mu(&buf) {
                        acc.add_scaled(out, &c.scale(sign));
                    }
                }
            }
        }
        acc
    }

    /// All A∞ relations on words of length `≤ max_arity` (length 0 is the curvature relation).
    pub fn check_associativity(&self, max_arity: usize) -> Result<Vec<Violation>> {
        if max_arity < 1 {
            return Err(KitError::Argument("max_arity must be at least 1".into()));
        }
        let table = WordTable::new(&self.space, max_arity);
        let mut out = Vec::new();
        for d in 0..=max_arity {
            let v: Vec<Violation> = table
                .of_len(d)
                .par_iter()
                .filter_map(|(src, _, w)| {
                    let r = self.relation(w, *src);
                    (!r.is_zero()).then(|| Violation {
                        arity: d,
                        inputs: w.iter().map(|&g| self.space.gen_label(g)).collect(),
                        residual: describe(&self.space, &r),
                    })
                })
                .collect();
            out.extend(v);
        }
        Ok(out)
    }

    /// Chain differential `da = (-1)^{|a|} μ^1(a)` at `q = 0` on one pair, as a matrix column.
    pub fn differential_column(&self, g: GenId) -> Vec<(GenId, BigInt)> {
        let sign = parity_sign(self.space.degree(g));
        match self.mu(&[g]) {
            Some(e) => e
                .terms()
                .filter_map(|(x, c)| {
                    let v = c.at_q0() * sign;
                    (!v.is_zero()).then_some((x, v))
                })
                .collect(),
            None => Vec::new(),
        }
    }

    /// The `q = 0` chain complex of `hom(x, y)`.
    pub fn pair_complex(&self, x: ObjId, y: ObjId) -> Result<GradedComplex> {
        let ids: Vec<GenId> = self.space.pair_ids(x, y).collect();
        GradedComplex::build(&ids, |g| self.space.degree(g), |g| self.differential_column(g))
    }

    /// Product on cohomology `(a2, a1) ↦ (-1)^{|a1|} μ^2(a2, a1)` at `q = 0`.
    pub fn product(&self, a2: GenId, a1: GenId) -> Vec<(GenId, BigInt)> {
        let sign = parity_sign(self.space.degree(a1));
        match self.mu(&[a2, a1]) {
            Some(e) => e
                .terms()
                .filter_map(|(x, c)| {
                    let v = c.at_q0() * sign;
                    (!v.is_zero()).then_some((x, v))
                })
                .collect(),
            None => Vec::new(),
        }
    }
}

fn check_composable(space: &PairSpace, inputs: &[GenId], out_src: ObjId, out_tgt: ObjId) -> std::result::Result<(), String> {
    let d = inputs.len();
    for m in 0..d - 1 {
        // display order: inputs[m] = a_{d-m}, inputs[m+1] = a_{d-m-1}
        if space.gen(inputs[m + 1]).target != space.gen(inputs[m]).source {
            return Err(format!(
                "inputs {} and {} do not compose",
                space.gen_label(inputs[m]),
                space.gen_label(inputs[m + 1])
            ));
        }
    }
    if space.gen(inputs[d - 1]).source != out_src || space.gen(inputs[0]).target != out_tgt {
        return Err(format!("output pair of entry on {} does not match its inputs", space.gen_label(inputs[0])));
    }
    Ok(())
}

/// Human-readable residual terms.
pub fn describe(space: &PairSpace, e: &Element) -> Vec<(String, String)> {
    e.terms().map(|(g, c)| (space.gen_label(g), c.to_string())).collect()
}

/// A complex of free abelian groups together with the generator bookkeeping.
#[derive(Clone, Debug)]
pub struct GradedComplex {
    pub complex: IntChainComplex,
    /// `slots[i]` lists the generator ids placed in degree `complex.start + i`.
    pub slots: Vec<Vec<GenId>>,
    pos: HashMap<GenId, (usize, usize)>,
}

impl GradedComplex {
    /// Builds the complex with the given generators and differential columns.
    pub fn build(
        ids: &[GenId],
        degree: impl Fn(GenId) -> i64,
        column: impl Fn(GenId) -> Vec<(GenId, BigInt)>,
    ) -> Result<Self> {
        if ids.is_empty() {
            return Ok(GradedComplex {
                complex: IntChainComplex::zero(),
                slots: Vec::new(),
                pos: HashMap::new(),
            });
        }
        let lo = ids.iter().map(|&g| degree(g)).min().unwrap();
        let hi = ids.iter().map(|&g| degree(g)).max().unwrap();
        let mut slots = vec![Vec::new(); (hi - lo + 1) as usize];
        let mut pos = HashMap::new();
        for &g in ids {
            let s = (degree(g) - lo) as usize;
            pos.insert(g, (s, slots[s].len()));
            slots[s].push(g);
        }
        let ranks: Vec<usize> = slots.iter().map(|s| s.len()).collect();
        let mut diffs = Vec::new();
        for s in 0..slots.len().saturating_sub(1) {
            let mut m = IntMatrix::zeros(ranks[s + 1], ranks[s]);
            for (j, &g) in slots[s].iter().enumerate() {
                for (x, v) in column(g) {
                    match pos.get(&x) {
                        Some(&(sx, i)) if sx == s + 1 => m.set(i, j, v),
                        _ => {
                            return Err(KitError::Structure(format!(
                                "differential of generator {} leaves the degree+1 part",
                                g
                            )))
                        }
                    }
                }
            }
            diffs.push(m);
        }
        if let Some(top) = slots.last() {
            if top.iter().any(|&g| !column(g).is_empty()) {
                return Err(KitError::Structure("differential leaves the complex".into()));
            }
        }
        let complex = IntChainComplex::new(lo, ranks, diffs)?;
        Ok(GradedComplex { complex, slots, pos })
    }

    /// Coordinates of a generator: `(degree slot, index)`.
    pub fn position(&self, g: GenId) -> Option<(usize, usize)> {
        self.pos.get(&g).copied()
    }

    pub fn degree_of_slot(&self, s: usize) -> i64 {
        self.complex.start + s as i64
    }

    pub fn slot_of_degree(&self, d: i64) -> Option<usize> {
        let s = d - self.complex.start;
        (s >= 0 && (s as usize) < self.slots.len()).then_some(s as usize)
    }
}

/// The `q = 0` chain complexes of every listed pair.
pub fn chain_differential(a: &AInfty) -> Result<Vec<(String, IntChainComplex)>> {
    let mut out = Vec::new();
    for ((x, y), _) in a.space.pairs() {
        let gc = a.pair_complex(x, y)?;
        if !gc.complex.squares_to_zero() {
            return Err(KitError::Structure(format!(
                "d^2 != 0 on pair {}",
                a.space.pair_label(x, y)
            )));
        }
        out.push((a.space.pair_label(x, y), gc.complex));
    }
    Ok(out)
}

/// Outcome of the unit search for one object.
#[derive(Clone, Debug)]
pub struct UnitResult {
    pub object: String,
    /// Integer coordinates of a cycle representative on `hom(X,X)`, if one exists.
    pub unit: Option<Vec<(GenId, BigInt)>>,
}

/// Searches for a degree-0 cycle acting as a two-sided identity on cohomology.
pub fn find_cohomological_unit(a: &AInfty) -> Result<Vec<UnitResult>> {
    let n = a.space.num_objects() as ObjId;
    let mut complexes: HashMap<(ObjId, ObjId), GradedComplex> = HashMap::new();
    for x in 0..n {
        for y in 0..n {
            complexes.insert((x, y), a.pair_complex(x, y)?);
        }
    }
    let mut results = Vec::new();
    for x in 0..n {
        results.push(UnitResult {
            object: a.space.objects()[x as usize].clone(),
            unit: unit_for_object(a, &complexes, x)?,
        });
    }
    Ok(results)
}

fn vec_of(gc: &GradedComplex, slot: usize, terms: &[(GenId, BigInt)]) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); gc.complex.rank(slot)];
    for (g, c) in terms {
        if let Some((s, i)) = gc.position(*g) {
            if s == slot {
                v[i] += c;
            }
        }
    }
    v
}

fn unit_for_object(
    a: &AInfty,
    complexes: &HashMap<(ObjId, ObjId), GradedComplex>,
    x: ObjId,
) -> Result<Option<Vec<(GenId, BigInt)>>> {
    let cxx = &complexes[&(x, x)];
    let z0 = match cxx.slot_of_degree(0) {
        Some(s) => cxx.complex.cycle_basis(s),
        None => IntMatrix::zeros(0, 0),
    };
    let r = z0.cols();
    let slot0 = cxx.slot_of_degree(0);
    let basis_elem = |i: usize| -> Vec<(GenId, BigInt)> {
        let s = slot0.unwrap();
        cxx.slots[s]
            .iter()
            .enumerate()
            .filter_map(|(row, &g)| {
                let v = z0.get(row, i).clone();
                (!v.is_zero()).then_some((g, v))
            })
            .collect()
    };
    let candidates: Vec<Vec<(GenId, BigInt)>> = (0..r).map(basis_elem).collect();

    // Rows of the system: for each test cycle z, each candidate's product minus z lies in B.
    // Unknowns: c_1..c_r and boundary preimages per test.
    let mut blocks: Vec<(Vec<Vec<BigInt>>, Vec<BigInt>, IntMatrix)> = Vec::new();
    let nobj = a.space.num_objects() as ObjId;
    for y in 0..nobj {
        for (left, pair) in [(true, (y, x)), (false, (x, y))] {
            let c = &complexes[&pair];
            for s in 0..c.slots.len() {
                let z = c.complex.cycle_basis(s);
                let bmat = c.complex.boundary_matrix(s);
                for col in 0..z.cols() {
                    let zt: Vec<(GenId, BigInt)> = c.slots[s]
                        .iter()
                        .enumerate()
                        .filter_map(|(row, &g)| {
                            let v = z.get(row, col).clone();
                            (!v.is_zero()).then_some((g, v))
                        })
                        .collect();
                    let mut columns = Vec::new();
                    for e in &candidates {
                        let mut prod: Vec<(GenId, BigInt)> = Vec::new();
                        for (eg, ec) in e {
                            for (zg, zc) in &zt {
                                let terms = if left { a.product(*eg, *zg) } else { a.product(*zg, *eg) };
                                for (t, tc) in terms {
                                    prod.push((t, tc * ec * zc));
                                }
                            }
                        }
                        columns.push(vec_of(c, s, &prod));
                    }
                    let target = vec_of(c, s, &zt);
                    blocks.push((columns, target, bmat.clone()));
                }
            }
        }
    }
    if blocks.is_empty() {
        // nothing to act on: the zero class is a unit
        return Ok(Some(Vec::new()));
    }
    let rows: usize = blocks.iter().map(|b| b.1.len()).sum();
    let extra: usize = blocks.iter().map(|b| b.2.cols()).sum();
    let mut m = IntMatrix::zeros(rows, r + extra);
    let mut t = vec![BigInt::zero(); rows];
    let mut row0 = 0;
    let mut col0 = r;
    for (columns, target, bmat) in &blocks {
        for (i, tv) in target.iter().enumerate() {
            t[row0 + i] = tv.clone();
            for (j, c) in columns.iter().enumerate() {
                m.set(row0 + i, j, c[i].clone());
            }
            for j in 0..bmat.cols() {
                m.set(row0 + i, col0 + j, -bmat.get(i, j).clone());
            }
        }
        row0 += target.len();
        col0 += bmat.cols();
    }
    let sol = match homology::solve_integer(&m, &t) {
        Some(s) => s,
        None => return Ok(None),
    };
    let mut e: HashMap<GenId, BigInt> = HashMap::new();
    for (i, cand) in candidates.iter().enumerate() {
        for (g, v) in cand {
            *e.entry(*g).or_default() += v * &sol[i];
        }
    }
    let mut out: Vec<(GenId, BigInt)> = e.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    out.sort();
    Ok(Some(out))
}

/// An A∞-bimodule over a fixed category, with module generators in `space`.
#[derive(Clone, Debug)]
pub struct Bimodule {
    pub space: PairSpace,
    ops: HashMap<Vec<Letter>, Element>,
}

impl Bimodule {
    /// Validates degrees `Σ in + 1 - k - l` and composability.
    pub fn new(a: &AInfty, space: PairSpace, entries: Vec<(Vec<Letter>, GenId, QSeries)>) -> Result<Self> {
        if space.objects() != a.space.objects() {
            return Err(KitError::Structure("bimodule objects differ from the category".into()));
        }
        let mut ops: HashMap<Vec<Letter>, Element> = HashMap::new();
        let mut bad = Vec::new();
        for (word, out, c) in entries {
            if let Err(msg) = check_bimodule_word(a, &space, &space, &word, out, 1) {
                bad.push(msg);
                continue;
            }
            ops.entry(word).or_default().add_term(out, &c.with_order(a.trunc));
        }
        if !bad.is_empty() {
            return Err(KitError::Structure(bad.join("; ")));
        }
        ops.retain(|_, v| !v.is_zero());
        Ok(Bimodule { space, ops })
    }

    pub(crate) fn from_raw(space: PairSpace, mut ops: HashMap<Vec<Letter>, Element>) -> Self {
        ops.retain(|_, v| !v.is_zero());
        Bimodule { space, ops }
    }

    pub fn mu(&self, word: &[Letter]) -> Option<&Element> {
        self.ops.get(word)
    }

    pub fn table(&self) -> &HashMap<Vec<Letter>, Element> {
        &self.ops
    }

    /// Entries in a deterministic order.
    pub fn entries(&self) -> Vec<(Vec<Letter>, GenId, QSeries)> {
        let mut keys: Vec<&Vec<Letter>> = self.ops.keys().collect();
        keys.sort_by(|a, b| (a.len(), *a).cmp(&(b.len(), *b)));
        let mut out = Vec::new();
        for k in keys {
            for (g, c) in self.ops[k].terms() {
                out.push((k.clone(), g, c.clone()));
            }
        }
        out
    }

    /// Largest `k + l + 1` with a nonzero entry.
    pub fn max_arity(&self) -> usize {
        self.ops.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    /// The `q = 0` complex of one pair under `μ^{0,1,0}`.
    pub fn pair_complex(&self, x: ObjId, y: ObjId) -> Result<GradedComplex> {
        let ids: Vec<GenId> = self.space.pair_ids(x, y).collect();
        GradedComplex::build(
            &ids,
            |g| self.space.degree(g),
            |g| match self.mu(&[Letter::M(g)]) {
                Some(e) => e
                    .terms()
                    .filter_map(|(x, c)| {
                        let v = c.at_q0();
                        (!v.is_zero()).then_some((x, v))
                    })
                    .collect(),
                None => Vec::new(),
            },
        )
    }

    /// Relation residual of the bimodule equations on one word.
    pub fn relation(&self, a: &AInfty, word: &[Letter]) -> Element {
        let d = word.len();
        let mp = module_pos(word);
        let mut acc = Element::new();
        let mut buf: Vec<Letter> = Vec::with_capacity(d + 1);
        for s in 0..=d {
            for e in s..=d {
                let sign = parity_sign(word[e..].iter().map(|&l| letter_weight(a, &self.space, l)).sum());
                if s <= mp && mp < e {
                    let inner = match self.mu(&word[s..e]) {
                        Some(x) => x,
                        None => continue,
                    };
                    for (x, c) in inner.terms() {
                        splice(&mut buf, word, s, e, Letter::M(x));
                        if let Some(out) = self.mu(&buf) {
                            acc.add_scaled(out, &c.scale(sign));
                        }
                    }
                } else {
                    let inner = match alg_inner(a, &self.space, word, s, e) {
                        Some(x) => x,
                        None => continue,
                    };
                    for (x, c) in inner.terms() {
                        splice(&mut buf, word, s, e, Letter::A(x));
                        if let Some(out) = self.mu(&buf) {
                            acc.add_scaled(out, &c.scale(sign));
                        }
                    }
                }
            }
        }
        acc
    }

    /// Bimodule equations on all words of total arity `≤ max_arity`.
    pub fn check(&self, a: &AInfty, max_arity: usize) -> Result<Vec<Violation>> {
        if max_arity < 1 {
            return Err(KitError::Argument("max_arity must be at least 1".into()));
        }
        let words = bimodule_words(a, &self.space, max_arity);
        let v: Vec<Violation> = words
            .par_iter()
            .filter_map(|w| {
                let r = self.relation(a, w);
                (!r.is_zero()).then(|| Violation {
                    arity: w.len(),
                    inputs: letters_labels(a, &self.space, w),
                    residual: describe(&self.space, &r),
                })
            })
            .collect();
        Ok(v)
    }
}

/// Reduced degree of a letter.
pub fn letter_weight(a: &AInfty, module: &PairSpace, l: Letter) -> i64 {
    match l {
        Letter::A(g) => a.space.degree(g) - 1,
        Letter::M(g) => module.degree(g) - 1,
    }
}

fn letter_ends(a: &AInfty, module: &PairSpace, l: Letter) -> (ObjId, ObjId) {
    match l {
        Letter::A(g) => {
            let i = a.space.gen(g);
            (i.source, i.target)
        }
        Letter::M(g) => {
            let i = module.gen(g);
            (i.source, i.target)
        }
    }
}

/// `(source, target)` of the composite of a bimodule word.
pub fn word_ends(a: &AInfty, module: &PairSpace, word: &[Letter]) -> (ObjId, ObjId) {
    let src = letter_ends(a, module, word[word.len() - 1]).0;
    let tgt = letter_ends(a, module, word[0]).1;
    (src, tgt)
}

/// Writes `word[..s] ++ [x] ++ word[e..]` into `buf`.
pub fn splice<T: Copy>(buf: &mut Vec<T>, word: &[T], s: usize, e: usize, x: T) {
    buf.clear();
    buf.extend_from_slice(&word[..s]);
    buf.push(x);
    buf.extend_from_slice(&word[e..]);
}

/// Algebra operation on the algebra-only block `word[s..e]`, with `μ^0` at empty blocks.
pub fn alg_inner<'a>(a: &'a AInfty, module: &PairSpace, word: &[Letter], s: usize, e: usize) -> Option<&'a Element> {
    if s == e {
        let obj = if s < word.len() {
            letter_ends(a, module, word[s]).1
        } else {
            letter_ends(a, module, word[s - 1]).0
        };
        let c = a.mu0(obj);
        return (!c.is_zero()).then_some(c);
    }
    let mut w = Vec::with_capacity(e - s);
    for l in &word[s..e] {
        match l {
            Letter::A(g) => w.push(*g),
            Letter::M(_) => return None,
        }
    }
    a.mu(&w)
}

pub fn letters_labels(a: &AInfty, module: &PairSpace, w: &[Letter]) -> Vec<String> {
    w.iter()
        .map(|l| match l {
            Letter::A(g) => a.space.gen_label(*g),
            Letter::M(g) => format!("[{}]", module.gen_label(*g)),
        })
        .collect()
}

fn check_bimodule_word(
    a: &AInfty,
    input: &PairSpace,
    output: &PairSpace,
    word: &[Letter],
    out: GenId,
    shift: i64,
) -> std::result::Result<(), String> {
    let ms = word.iter().filter(|l| matches!(l, Letter::M(_))).count();
    if ms != 1 {
        return Err(format!("word with {} module letters", ms));
    }
    let (k, l) = word_kl(word);
    let mut deg = 0;
    for w in word {
        deg += match w {
            Letter::A(g) => a.space.degree(*g),
            Letter::M(g) => input.degree(*g),
        };
    }
    let expected = deg + shift - (k + l) as i64;
    if output.degree(out) != expected {
        return Err(format!(
            "entry on {:?} has output degree {} (expected {})",
            letters_labels(a, input, word),
            output.degree(out),
            expected
        ));
    }
    for m in 0..word.len() - 1 {
        if letter_ends(a, input, word[m + 1]).1 != letter_ends(a, input, word[m]).0 {
            return Err(format!("inputs {:?} do not compose", letters_labels(a, input, word)));
        }
    }
    let o = output.gen(out);
    if letter_ends(a, input, word[word.len() - 1]).0 != o.source || letter_ends(a, input, word[0]).1 != o.target {
        return Err(format!("output pair mismatch on {:?}", letters_labels(a, input, word)));
    }
    Ok(())
}

/// Degree check for morphism components (`shift` is the morphism degree).
pub fn check_morphism_word(
    a: &AInfty,
    input: &PairSpace,
    output: &PairSpace,
    word: &[Letter],
    out: GenId,
    degree: i64,
) -> std::result::Result<(), String> {
    check_bimodule_word(a, input, output, word, out, degree)
}

/// All composable bimodule words of total arity `1..=max_arity`.
pub fn bimodule_words(a: &AInfty, module: &PairSpace, max_arity: usize) -> Vec<Vec<Letter>> {
    let table = WordTable::new(&a.space, max_arity.saturating_sub(1));
    let mut out = Vec::new();
    for total in 1..=max_arity {
        for p in 0..module.len() as GenId {
            let info = module.gen(p);
            for k in 0..total {
                let l = total - 1 - k;
                for (_, rt, rw) in table.of_len(k) {
                    if *rt != info.source {
                        continue;
                    }
                    for (ls, _, lw) in table.of_len(l) {
                        if *ls != info.target {
                            continue;
                        }
                        let mut w = Vec::with_capacity(total);
                        w.extend(lw.iter().map(|&g| Letter::A(g)));
                        w.push(Letter::M(p));
                        w.extend(rw.iter().map(|&g| Letter::A(g)));
                        out.push(w);
                    }
                }
            }
        }
    }
    out
}

/// The diagonal bimodule: `μ^{l,1,k} = μ^{k+l+1}` with the module letter anywhere.
pub fn diagonal_bimodule(a: &AInfty) -> Bimodule {
    let mut ops: HashMap<Vec<Letter>, Element> = HashMap::new();
    for (w, out) in &a.ops {
        for p in 0..w.len() {
            let word: Vec<Letter> = w
                .iter()
                .enumerate()
                .map(|(i, &g)| if i == p { Letter::M(g) } else { Letter::A(g) })
                .collect();
            ops.insert(word, out.clone());
        }
    }
    Bimodule::from_raw(a.space.clone(), ops)
}

/// Pair space of the dual diagonal: `P(X,Y) = hom(Y,X)^∨`, generator `x*` of degree `-|x|`.
pub fn dual_space(a: &AInfty) -> PairSpace {
    let objs = a.space.objects().to_vec();
    let mut pairs = Vec::new();
    for ((x, y), b) in a.space.pairs() {
        pairs.push((
            (objs[y as usize].clone(), objs[x as usize].clone()),
            crate::graded::dual_basis(b),
        ));
    }
    PairSpace::new(objs, pairs).expect("dual of a valid space")
}

/// Maps a generator of `A` to its dual in [`dual_space`].
pub fn dual_id(a: &AInfty, dual: &PairSpace, g: GenId) -> GenId {
    let i = a.space.gen(g);
    dual.lookup(i.target, i.source, &crate::graded::dual_name(&i.name))
        .expect("dual generator exists")
}

/// The dual diagonal with the sign `(-1)^{|•|}`.
pub fn dual_diagonal_bimodule(a: &AInfty) -> Bimodule {
    let dual = dual_space(a);
    let mut ops: HashMap<Vec<Letter>, Element> = HashMap::new();
    for (w, out) in &a.ops {
        for p in 0..w.len() {
            // w = (a_k..a_1, x, a_{k+l+1}..a_{k+2}) in display order
            let x = w[p];
            let sign = parity_sign(a.space.degree(x));
            let xd = dual_id(a, &dual, x);
            for (y, c) in out.terms() {
                let yd = dual_id(a, &dual, y);
                let mut word: Vec<Letter> = Vec::with_capacity(w.len());
                word.extend(w[p + 1..].iter().map(|&g| Letter::A(g)));
                word.push(Letter::M(yd));
                word.extend(w[..p].iter().map(|&g| Letter::A(g)));
                ops.entry(word).or_default().add_term(xd, &c.scale(sign));
            }
        }
    }
    Bimodule::from_raw(dual, ops)
}

/// Strict functor acting by integer matrices on hom spaces (degree 0, `q`-independent).
#[derive(Clone, Debug)]
pub struct LinearFunctor {
    pub object_map: Vec<ObjId>,
    /// Image of each source generator as integer combination of target generators.
    pub images: Vec<Vec<(GenId, BigInt)>>,
}

impl LinearFunctor {
    pub fn identity(a: &AInfty) -> Self {
        LinearFunctor {
            object_map: (0..a.space.num_objects() as ObjId).collect(),
            images: (0..a.space.len() as GenId).map(|g| vec![(g, BigInt::from(1))]).collect(),
        }
    }

    /// Validates degrees and pair compatibility of the images.
    pub fn new(src: &AInfty, tgt: &AInfty, object_map: Vec<ObjId>, images: Vec<Vec<(GenId, BigInt)>>) -> Result<Self> {
        if object_map.len() != src.space.num_objects() || images.len() != src.space.len() {
            return Err(KitError::Argument("functor data does not match the source category".into()));
        }
        for &o in &object_map {
            if o as usize >= tgt.space.num_objects() {
                return Err(KitError::Argument("object map leaves the target".into()));
            }
        }
        for (g, img) in images.iter().enumerate() {
            let i = src.space.gen(g as GenId);
            for (h, _) in img {
                let j = tgt.space.gen(*h);
                if j.degree != i.degree
                    || j.source != object_map[i.source as usize]
                    || j.target != object_map[i.target as usize]
                {
                    return Err(KitError::Argument(format!(
                        "image of {} is not a degree-0 map of the right pair",
                        src.space.gen_label(g as GenId)
                    )));
                }
            }
        }
        Ok(LinearFunctor { object_map, images })
    }

    /// Applies the functor to an element.
    pub fn apply(&self, e: &Element, order: usize) -> Element {
        let mut out = Element::new();
        for (g, c) in e.terms() {
            for (h, v) in &self.images[g as usize] {
                out.add_term(*h, &c.scale_big(v, order));
            }
        }
        out
    }

    /// Strictness: `Q μ^d(a_d..a_1) = μ^d(Q a_d, .., Q a_1)` on all words of length `≤ max_arity`,
    /// including `d = 0`. Returns the failing words.
    pub fn check(&self, src: &AInfty, tgt: &AInfty, max_arity: usize) -> Vec<Violation> {
        let table = WordTable::new(&src.space, max_arity);
        let mut out = Vec::new();
        for d in 0..=max_arity {
            for (s, _, w) in table.of_len(d) {
                let lhs = if d == 0 {
                    self.apply(src.mu0(*s), src.trunc)
                } else {
                    src.mu(w).map(|e| self.apply(e, src.trunc)).unwrap_or_default()
                };
                let rhs = if d == 0 {
                    tgt.mu0(self.object_map[*s as usize]).clone()
                } else {
                    self.apply_mu(tgt, w)
                };
                let mut diff = lhs;
                diff.add_signed(&rhs, -1);
                if !diff.is_zero() {
                    out.push(Violation {
                        arity: d,
                        inputs: w.iter().map(|&g| src.space.gen_label(g)).collect(),
                        residual: describe(&tgt.space, &diff),
                    });
                }
            }
        }
        out
    }

    /// `μ_B(Q a_d, ..., Q a_1)` expanded multilinearly.
    fn apply_mu(&self, tgt: &AInfty, w: &[GenId]) -> Element {
        let mut acc = Element::new();
        let mut partial: Vec<(Vec<GenId>, BigInt)> = vec![(Vec::new(), BigInt::from(1))];
        for &g in w {
            let mut next = Vec::new();
            for (pw, pc) in &partial {
                for (h, v) in &self.images[g as usize] {
                    let mut nw = pw.clone();
                    nw.push(*h);
                    next.push((nw, pc * v));
                }
            }
            partial = next;
        }
        for (word, c) in partial {
            if let Some(e) = tgt.mu(&word) {
                acc.add_scaled(e, &QSeries::monomial(c, 0, tgt.trunc));
            }
        }
        acc
    }
}

impl QSeries {
    /// Multiplication by an integer.
    pub fn scale_big(&self, c: &BigInt, order: usize) -> QSeries {
        QSeries::from_coeffs(self.coeffs().iter().map(|a| a * c), order)
    }
}

/// `Q^*P`: the bimodule over `src` with `μ(a_l, .., p, .., a_1) = μ_P(Q a_l, .., p, .., Q a_1)`.
pub fn pullback_bimodule(q: &LinearFunctor, src: &AInfty, tgt: &AInfty, p: &Bimodule) -> Result<Bimodule> {
    if q.object_map.len() != src.space.num_objects() {
        return Err(KitError::Argument("functor object map does not match the source".into()));
    }
    if p.space.num_objects() != tgt.space.num_objects() {
        return Err(KitError::Argument("bimodule lives over a different category".into()));
    }
    // module pairs are pulled back along the object map
    let objs = src.space.objects().to_vec();
    let n = objs.len() as ObjId;
    let mut pairs = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let ids: Vec<GenId> = p.space.pair_ids(q.object_map[x as usize], q.object_map[y as usize]).collect();
            if ids.is_empty() {
                continue;
            }
            let gens = ids
                .iter()
                .map(|&g| crate::graded::Generator::new(p.space.gen(g).name.clone(), p.space.degree(g)))
                .collect();
            pairs.push(((objs[x as usize].clone(), objs[y as usize].clone()), GradedBasis::new(gens)?));
        }
    }
    let space = PairSpace::new(objs, pairs)?;
    let max = p.max_arity();
    let words = bimodule_words(src, &space, max.max(1));
    let ops: HashMap<Vec<Letter>, Element> = words
        .par_iter()
        .filter_map(|w| {
            let mut acc = Element::new();
            // expand algebra letters through Q
            let mut partial: Vec<(Vec<Letter>, BigInt)> = vec![(Vec::new(), BigInt::from(1))];
            for l in w {
                let mut next = Vec::new();
                match l {
                    Letter::A(g) => {
                        for (pw, pc) in &partial {
                            for (h, v) in &q.images[*g as usize] {
                                let mut nw = pw.clone();
                                nw.push(Letter::A(*h));
                                next.push((nw, pc * v));
                            }
                        }
                    }
                    Letter::M(g) => {
                        let info = space.gen(*g);
                        let tp = p
                            .space
                            .lookup(q.object_map[info.source as usize], q.object_map[info.target as usize], &info.name)
                            .unwrap();
                        for (pw, pc) in &partial {
                            let mut nw = pw.clone();
                            nw.push(Letter::M(tp));
                            next.push((nw, pc.clone()));
                        }
                    }
                }
                partial = next;
            }
            let first = w.last().map(|l| letter_ends(src, &space, *l).0).unwrap();
            let last = w.first().map(|l| letter_ends(src, &space, *l).1).unwrap();
            for (tw, c) in partial {
                if let Some(e) = p.mu(&tw) {
                    for (og, oc) in e.terms() {
                        let name = &p.space.gen(og).name;
                        let id = space.lookup(first, last, name).unwrap();
                        acc.add_term(id, &oc.scale_big(&c, src.trunc));
                    }
                }
            }
            (!acc.is_zero()).then(|| (w.clone(), acc))
        })
        .collect();
    Ok(Bimodule::from_raw(space, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn exterior_algebra_is_associative() {
        let a = fixtures::exterior_one(8);
        assert!(a.check_associativity(6).unwrap().is_empty());
    }

    #[test]
    fn square_nonzero_detected() {
        let a = fixtures::single_mu1(1, 8);
        let v = a.check_associativity(2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].arity, 1);
    }

    #[test]
    fn degree_mismatch_is_structural() {
        let sp = PairSpace::new(
            vec!["L".into()],
            vec![(("L".into(), "L".into()), GradedBasis::new(vec![crate::graded::Generator::new("x", 0)]).unwrap())],
        )
        .unwrap();
        let e = OpEntry { inputs: vec![0], output: 0, coeff: QSeries::one(8) };
        assert!(matches!(AInfty::new(sp, vec![e], 0, 8), Err(KitError::Structure(_))));
    }

    #[test]
    fn constant_curvature_rejected() {
        let sp = PairSpace::new(
            vec!["L".into()],
            vec![(("L".into(), "L".into()), GradedBasis::new(vec![crate::graded::Generator::new("z", 2)]).unwrap())],
        )
        .unwrap();
        let e = OpEntry { inputs: vec![], output: 0, coeff: QSeries::one(8) };
        assert!(matches!(AInfty::new(sp, vec![e], 0, 8), Err(KitError::Structure(_))));
    }

    #[test]
    fn chain_differential_examples() {
        let a = fixtures::two_term(2, 8);
        let cx = chain_differential(&a).unwrap();
        let (_, c) = &cx[0];
        assert_eq!(c.diff(0).get(0, 0), &BigInt::from(2));
        let lx = fixtures::exterior_one(8);
        let cx = chain_differential(&lx).unwrap();
        let h = homology::homology(&cx[0].1);
        assert_eq!(h[&0].betti, 1);
        assert_eq!(h[&1].betti, 1);
    }

    #[test]
    fn unit_of_exterior_algebra() {
        let a = fixtures::exterior_one(8);
        let u = find_cohomological_unit(&a).unwrap();
        let e = a.space.lookup(0, 0, "e").unwrap();
        assert_eq!(u[0].unit, Some(vec![(e, BigInt::from(1))]));
    }

    #[test]
    fn no_unit_without_product() {
        let a = fixtures::no_product(8);
        let u = find_cohomological_unit(&a).unwrap();
        assert_eq!(u[0].unit, None);
    }

    #[test]
    fn diagonal_and_dual_of_exterior() {
        let a = fixtures::exterior_one(8);
        let d = diagonal_bimodule(&a);
        assert!(d.check(&a, 5).unwrap().is_empty());
        let dd = dual_diagonal_bimodule(&a);
        assert!(dd.check(&a, 5).unwrap().is_empty());
    }

    #[test]
    fn mutated_bimodule_detected() {
        let a = fixtures::exterior_one(8);
        let d = diagonal_bimodule(&a);
        let mut entries = d.entries();
        let (_, _, c) = entries.iter_mut().find(|(w, _, _)| w.len() == 2).unwrap();
        *c = c.neg();
        let m = Bimodule::new(&a, d.space.clone(), entries).unwrap();
        let v = m.check(&a, 3).unwrap();
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.arity >= 2));
    }

    #[test]
    fn pullback_along_identity() {
        let a = fixtures::exterior_one(8);
        let d = diagonal_bimodule(&a);
        let q = LinearFunctor::identity(&a);
        let p = pullback_bimodule(&q, &a, &a, &d).unwrap();
        assert_eq!(p.entries().len(), d.entries().len());
        for (w, g, c) in d.entries() {
            assert_eq!(p.mu(&w).and_then(|e| e.coeff(g)), Some(&c));
        }
    }
}
