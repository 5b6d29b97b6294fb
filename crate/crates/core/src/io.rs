//! JSON file formats: structures, functors, bimodule morphisms, chain complexes and reports.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ainfty::{AInfty, GenId, Letter, LinearFunctor, OpEntry, PairSpace};
use crate::cc2::BimoduleMorphism;
use crate::error::{KitError, Result};
use crate::graded::{Generator, GradedBasis, QSeries};
use crate::homology::{HomologyGroup, IntChainComplex, IntMatrix};

/// `[pair label, generator name]`.
pub type GenRef = (String, String);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpSpec {
    pub d: usize,
    pub inputs: Vec<GenRef>,
    pub output: GenRef,
    pub coeff: Vec<i64>,
}

/// On-disk form of an A∞-category.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub objects: Vec<String>,
    pub hom: IndexMap<String, Vec<Generator>>,
    pub ops: Vec<OpSpec>,
    pub cy_dim: i64,
    pub trunc_order: usize,
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| KitError::Parse(format!("{} at line {} column {}: {}", what, e.line(), e.column(), e)))
}

fn to_pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| KitError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn series_to_vec(c: &QSeries) -> Result<Vec<i64>> {
    let mut v = c
        .coeffs()
        .iter()
        .map(|x| x.to_i64().ok_or_else(|| KitError::Argument(format!("coefficient {} exceeds 64 bits", x))))
        .collect::<Result<Vec<i64>>>()?;
    while v.last() == Some(&0) {
        v.pop();
    }
    Ok(v)
}

fn series_from(coeff: &[i64], trunc: usize, at: &str) -> Result<QSeries> {
    if coeff.len() > trunc + 1 && coeff[trunc + 1..].iter().any(|&c| c != 0) {
        return Err(KitError::Parse(format!("{}: coefficient beyond q^{}", at, trunc)));
    }
    Ok(QSeries::from_i64s(coeff, trunc))
}

fn gen_ref(space: &PairSpace, g: GenId) -> GenRef {
    let i = space.gen(g);
    (space.pair_label(i.source, i.target), i.name.clone())
}

fn resolve(space: &PairSpace, r: &GenRef, at: &str) -> Result<GenId> {
    space
        .lookup_label(&r.0, &r.1)
        .map_err(|_| KitError::Parse(format!("{}: unknown generator `{}` in pair `{}`", at, r.1, r.0)))
}

fn pair_space(objects: &[String], hom: &IndexMap<String, Vec<Generator>>) -> Result<PairSpace> {
    let mut pairs = Vec::new();
    for (label, gens) in hom {
        let (x, y) = label
            .split_once(',')
            .ok_or_else(|| KitError::Parse(format!("hom key `{}` is not of the form X,Y", label)))?;
        pairs.push(((x.to_string(), y.to_string()), GradedBasis::new(gens.clone())?));
    }
    PairSpace::new(objects.to_vec(), pairs)
}

impl StructureFile {
    pub fn from_ainfty(a: &AInfty) -> Result<Self> {
        let sp = &a.space;
        let hom = sp
            .pairs()
            .map(|((x, y), b)| (sp.pair_label(x, y), b.generators().to_vec()))
            .collect();
        let mut ops = Vec::new();
        for e in a.curvature_entries().into_iter().chain(a.entries()) {
            ops.push(OpSpec {
                d: e.inputs.len(),
                inputs: e.inputs.iter().map(|&g| gen_ref(sp, g)).collect(),
                output: gen_ref(sp, e.output),
                coeff: series_to_vec(&e.coeff)?,
            });
        }
        Ok(StructureFile { objects: sp.objects().to_vec(), hom, ops, cy_dim: a.cy_dim, trunc_order: a.trunc })
    }

    /// Validates and builds the category; curvature with a `q⁰` term is rejected here.
    pub fn to_ainfty(&self) -> Result<AInfty> {
        let sp = pair_space(&self.objects, &self.hom)?;
        let mut entries = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            let at = format!("ops[{}]", i);
            if op.d != op.inputs.len() {
                return Err(KitError::Parse(format!("{}: d = {} but {} inputs", at, op.d, op.inputs.len())));
            }
            entries.push(OpEntry {
                inputs: op.inputs.iter().map(|r| resolve(&sp, r, &at)).collect::<Result<_>>()?,
                output: resolve(&sp, &op.output, &at)?,
                coeff: series_from(&op.coeff, self.trunc_order, &at)?,
            });
        }
        AInfty::new(sp, entries, self.cy_dim, self.trunc_order)
    }
}

pub fn parse_structure(text: &str) -> Result<AInfty> {
    parse_json::<StructureFile>(text, "structure")?.to_ainfty()
}

pub fn structure_to_json(a: &AInfty) -> Result<String> {
    to_pretty(&StructureFile::from_ainfty(a)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageTerm {
    pub output: GenRef,
    pub coeff: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub input: GenRef,
    pub terms: Vec<ImageTerm>,
}

/// On-disk form of a strict linear functor; unlisted generators map to zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctorFile {
    pub object_map: IndexMap<String, String>,
    pub images: Vec<ImageSpec>,
}

impl FunctorFile {
    pub fn from_functor(src: &AInfty, tgt: &AInfty, f: &LinearFunctor) -> Result<Self> {
        let object_map = src
            .space
            .objects()
            .iter()
            .zip(&f.object_map)
            .map(|(o, &t)| (o.clone(), tgt.space.objects()[t as usize].clone()))
            .collect();
        let mut images = Vec::new();
        for (g, img) in f.images.iter().enumerate() {
            if img.is_empty() {
                continue;
            }
            let terms = img
                .iter()
                .map(|(h, c)| {
                    Ok(ImageTerm {
                        output: gen_ref(&tgt.space, *h),
                        coeff: c.to_i64().ok_or_else(|| KitError::Argument("coefficient exceeds 64 bits".into()))?,
                    })
                })
                .collect::<Result<_>>()?;
            images.push(ImageSpec { input: gen_ref(&src.space, g as GenId), terms });
        }
        Ok(FunctorFile { object_map, images })
    }

    pub fn to_functor(&self, src: &AInfty, tgt: &AInfty) -> Result<LinearFunctor> {
        let mut object_map = Vec::new();
        for o in src.space.objects() {
            let t = self
                .object_map
                .get(o)
                .ok_or_else(|| KitError::Parse(format!("object `{}` missing from object_map", o)))?;
            object_map.push(tgt.space.object(t)?);
        }
        let mut images = vec![Vec::new(); src.space.len()];
        for (i, spec) in self.images.iter().enumerate() {
            let at = format!("images[{}]", i);
            let g = resolve(&src.space, &spec.input, &at)?;
            for t in &spec.terms {
                images[g as usize].push((resolve(&tgt.space, &t.output, &at)?, BigInt::from(t.coeff)));
            }
        }
        LinearFunctor::new(src, tgt, object_map, images)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub k: usize,
    pub l: usize,
    /// Display order; the entry at index `l` is the module input.
    pub inputs: Vec<GenRef>,
    pub output: GenRef,
    pub coeff: Vec<i64>,
}

/// On-disk form of a bimodule morphism (or CC2 cochain).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismFile {
    pub degree: i64,
    pub components: Vec<ComponentSpec>,
}

impl MorphismFile {
    pub fn from_morphism(a: &AInfty, src: &PairSpace, tgt: &PairSpace, f: &BimoduleMorphism) -> Result<Self> {
        let mut components = Vec::new();
        for (w, out, c) in f.entries() {
            let l = w.iter().position(|x| matches!(x, Letter::M(_))).expect("module letter");
            let inputs = w
                .iter()
                .map(|x| match *x {
                    Letter::A(g) => gen_ref(&a.space, g),
                    Letter::M(g) => gen_ref(src, g),
                })
                .collect();
            components.push(ComponentSpec {
                k: w.len() - l - 1,
                l,
                inputs,
                output: gen_ref(tgt, out),
                coeff: series_to_vec(&c)?,
            });
        }
        Ok(MorphismFile { degree: f.degree, components })
    }

    /// Resolves labels and checks degree homogeneity.
    pub fn to_morphism(&self, a: &AInfty, src: &PairSpace, tgt: &PairSpace) -> Result<BimoduleMorphism> {
        let mut entries = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            let at = format!("components[{}]", i);
            if c.inputs.len() != c.k + c.l + 1 {
                return Err(KitError::Parse(format!(
                    "{}: k = {}, l = {} but {} inputs",
                    at,
                    c.k,
                    c.l,
                    c.inputs.len()
                )));
            }
            let word = c
                .inputs
                .iter()
                .enumerate()
                .map(|(j, r)| {
                    if j == c.l {
                        resolve(src, r, &at).map(Letter::M)
                    } else {
                        resolve(&a.space, r, &at).map(Letter::A)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push((word, resolve(tgt, &c.output, &at)?, series_from(&c.coeff, a.trunc, &at)?));
        }
        BimoduleMorphism::new(a, src, tgt, self.degree, entries)
    }
}

/// All inputs of the three-term total bimodule in one file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TotalFile {
    pub a: StructureFile,
    pub b: StructureFile,
    pub functor: FunctorFile,
    /// Degree `n` cochain from the dual diagonal to the diagonal.
    pub delta: MorphismFile,
    /// Degree `n − 1` morphism from the dual diagonal to the pulled-back diagonal of `b`.
    pub h: MorphismFile,
}

/// Loaded total inputs.
pub struct TotalData {
    pub a: AInfty,
    pub b: AInfty,
    pub functor: LinearFunctor,
    pub delta: BimoduleMorphism,
    pub h: BimoduleMorphism,
}

impl TotalFile {
    pub fn load(&self) -> Result<TotalData> {
        let a = self.a.to_ainfty()?;
        let b = self.b.to_ainfty()?;
        let functor = self.functor.to_functor(&a, &b)?;
        let dual = crate::ainfty::dual_space(&a);
        let (qb, _) = crate::cc2::tautological_rho(&a, &functor, &b)?;
        let delta = self.delta.to_morphism(&a, &dual, &a.space)?;
        let h = self.h.to_morphism(&a, &dual, &qb.space)?;
        Ok(TotalData { a, b, functor, delta, h })
    }

    pub fn from_parts(
        a: &AInfty,
        b: &AInfty,
        functor: &LinearFunctor,
        delta: &BimoduleMorphism,
        h: &BimoduleMorphism,
    ) -> Result<Self> {
        let dual = crate::ainfty::dual_space(a);
        let (qb, _) = crate::cc2::tautological_rho(a, functor, b)?;
        Ok(TotalFile {
            a: StructureFile::from_ainfty(a)?,
            b: StructureFile::from_ainfty(b)?,
            functor: FunctorFile::from_functor(a, b, functor)?,
            delta: MorphismFile::from_morphism(a, &dual, &a.space, delta)?,
            h: MorphismFile::from_morphism(a, &dual, &qb.space, h)?,
        })
    }
}

pub fn parse_total(text: &str) -> Result<TotalData> {
    parse_json::<TotalFile>(text, "total bundle")?.load()
}

/// Cochain complex of free abelian groups; `differentials[i]` is a row list mapping
/// degree `start + i` to `start + i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub start: i64,
    pub ranks: Vec<usize>,
    pub differentials: Vec<Vec<Vec<i64>>>,
}

impl ComplexFile {
    pub fn to_complex(&self) -> Result<IntChainComplex> {
        let mut diffs = Vec::new();
        for (i, rows) in self.differentials.iter().enumerate() {
            let cols = self.ranks.get(i).copied().unwrap_or(0);
            let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            diffs.push(IntMatrix::from_rows(&big, cols)?);
        }
        IntChainComplex::new(self.start, self.ranks.clone(), diffs)
    }

    pub fn from_complex(c: &IntChainComplex) -> Result<Self> {
        let differentials = (0..c.len().saturating_sub(1))
            .map(|i| {
                c.diff(i)
                    .to_rows()
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|x| x.to_i64().ok_or_else(|| KitError::Argument("entry exceeds 64 bits".into())))
                            .collect()
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(ComplexFile { start: c.start, ranks: c.ranks().to_vec(), differentials })
    }
}

pub fn parse_complex(text: &str) -> Result<IntChainComplex> {
    parse_json::<ComplexFile>(text, "complex")?.to_complex()
}

/// Homology of one degree with torsion as plain integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupReport {
    pub betti: usize,
    pub torsion: Vec<i64>,
}

/// `{degree: {betti, torsion}}`.
pub fn homology_report(groups: &BTreeMap<i64, HomologyGroup>) -> Result<BTreeMap<String, GroupReport>> {
    groups
        .iter()
        .map(|(d, g)| {
            let torsion = g
                .torsion
                .iter()
                .map(|t| t.to_i64().ok_or_else(|| KitError::Argument("torsion coefficient exceeds 64 bits".into())))
                .collect::<Result<_>>()?;
            Ok((d.to_string(), GroupReport { betti: g.betti, torsion }))
        })
        .collect()
}

pub fn parse_strip(text: &str) -> Result<crate::strip_lab::StripProblem> {
    parse_json(text, "strip problem")
}

pub fn parse_flow(text: &str) -> Result<crate::morse_lab::FlowSpec> {
    parse_json(text, "flow spec")
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    to_pretty(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn structure_round_trip_is_bit_exact() {
        for a in [fixtures::exterior_one(8), fixtures::curved_x2(8), fixtures::split_unit(8), fixtures::random_dg_ainfty(3, 8)] {
            let text = structure_to_json(&a).unwrap();
            let b = parse_structure(&text).unwrap();
            assert_eq!(structure_to_json(&b).unwrap(), text);
            assert_eq!(b.entries().len(), a.entries().len());
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse_structure("{\n  \"objects\": [\"L\"],\n  \"hom\": 3\n}").unwrap_err();
        assert!(matches!(&err, KitError::Parse(m) if m.contains("line 3")), "{}", err);
        let mut f = StructureFile::from_ainfty(&fixtures::exterior_one(4)).unwrap();
        f.ops[0].d = 3;
        assert!(matches!(f.to_ainfty(), Err(KitError::Parse(_))));
    }

    #[test]
    fn constant_curvature_rejected_on_load() {
        let mut f = StructureFile::from_ainfty(&fixtures::curved_x2(4)).unwrap();
        let curv = f.ops.iter_mut().find(|o| o.d == 0).unwrap();
        curv.coeff = vec![1];
        assert!(matches!(f.to_ainfty(), Err(KitError::Structure(_))));
    }

    #[test]
    fn total_bundles_round_trip() {
        for fx in fixtures::total_fixtures(4) {
            let file = TotalFile::from_parts(&fx.a, &fx.b, &fx.functor, &fx.delta, &fx.h).unwrap();
            let text = to_json(&file).unwrap();
            let data = parse_total(&text).unwrap();
            let again = TotalFile::from_parts(&data.a, &data.b, &data.functor, &data.delta, &data.h).unwrap();
            assert_eq!(to_json(&again).unwrap(), text, "{}", fx.name);
        }
    }

    #[test]
    fn complex_round_trip() {
        let text = r#"{"start": 0, "ranks": [1, 1], "differentials": [[[2]]]}"#;
        let c = parse_complex(text).unwrap();
        let rep = homology_report(&crate::homology::homology(&c)).unwrap();
        assert_eq!(rep["1"], GroupReport { betti: 0, torsion: vec![2] });
        assert_eq!(ComplexFile::from_complex(&c).unwrap().to_complex().unwrap(), c);
        assert!(parse_complex(r#"{"start": 0, "ranks": [1, 1, 1], "differentials": [[[1]], [[1]]]}"#).is_err());
    }
}
