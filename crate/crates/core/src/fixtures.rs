//! Small structures used by tests, benches and the shipped fixture files.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ainfty::{dual_space, AInfty, GenId, Letter, LinearFunctor, OpEntry, PairSpace};
use crate::cc2::{tautological_rho, BimoduleMorphism, TotalInput};
use crate::graded::{Generator, GradedBasis, QSeries};
use crate::profile::Profile;
use crate::strip_lab::StripProblem;

/// Builds a pair space from `(source, target, [(name, degree)])` triples.
pub fn space(objects: &[&str], pairs: &[(&str, &str, &[(&str, i64)])]) -> PairSpace {
    let pairs = pairs
        .iter()
        .map(|(x, y, gens)| {
            let b = GradedBasis::new(gens.iter().map(|(n, d)| Generator::new(*n, *d)).collect()).expect("unique names");
            ((x.to_string(), y.to_string()), b)
        })
        .collect();
    PairSpace::new(objects.iter().map(|s| s.to_string()).collect(), pairs).expect("valid space")
}

/// Looks up `"X,Y"` / name.
pub fn gid(sp: &PairSpace, pair: &str, name: &str) -> GenId {
    sp.lookup_label(pair, name).expect("known generator")
}

/// Operation entry from labels; `coeffs` lists the q-power coefficients.
pub fn op(sp: &PairSpace, inputs: &[(&str, &str)], output: (&str, &str), coeffs: &[i64], trunc: usize) -> OpEntry {
    OpEntry {
        inputs: inputs.iter().map(|(p, n)| gid(sp, p, n)).collect(),
        output: gid(sp, output.0, output.1),
        coeff: QSeries::from_i64s(coeffs, trunc),
    }
}

/// Λ[x]: unit `e` in degree 0, `x` in degree 1, `x² = 0`.
pub fn exterior_one(trunc: usize) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("e", 0), ("x", 1)])]);
    let p = "L,L";
    let ops = vec![
        op(&sp, &[(p, "e"), (p, "e")], (p, "e"), &[1], trunc),
        op(&sp, &[(p, "x"), (p, "e")], (p, "x"), &[1], trunc),
        op(&sp, &[(p, "e"), (p, "x")], (p, "x"), &[-1], trunc),
    ];
    AInfty::new(sp, ops, 1, trunc).expect("valid fixture")
}

/// Three generators in degrees `d, d+1, d+2` with `μ¹(x) = y`, `μ¹(y) = z`, so `μ¹∘μ¹ ≠ 0`.
pub fn single_mu1(d: i64, trunc: usize) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("x", d), ("y", d + 1), ("z", d + 2)])]);
    let p = "L,L";
    let ops = vec![
        op(&sp, &[(p, "x")], (p, "y"), &[1], trunc),
        op(&sp, &[(p, "y")], (p, "z"), &[1], trunc),
    ];
    AInfty::new(sp, ops, 0, trunc).expect("degrees are consistent")
}

/// `a` in degree 0, `b` in degree 1, `μ¹(a) = c·b`.
pub fn two_term(c: i64, trunc: usize) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("a", 0), ("b", 1)])]);
    let ops = vec![op(&sp, &[("L,L", "a")], ("L,L", "b"), &[c], trunc)];
    AInfty::new(sp, ops, 0, trunc).expect("valid fixture")
}

/// A degree-0 generator and no operations at all.
pub fn no_product(trunc: usize) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("e", 0)])]);
    AInfty::new(sp, Vec::new(), 0, trunc).expect("valid fixture")
}

/// ℤ with `μ²(e, e) = e`.
pub fn unit_only(trunc: usize) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("e", 0)])]);
    let ops = vec![op(&sp, &[("L,L", "e"), ("L,L", "e")], ("L,L", "e"), &[1], trunc)];
    AInfty::new(sp, ops, 0, trunc).expect("valid fixture")
}

/// ℤ[x]/x² with `|x| = 2` and curvature `μ⁰ = q·x`.
pub fn curved_x2(trunc: usize) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("e", 0), ("x", 2)])]);
    let p = "L,L";
    let ops = vec![
        op(&sp, &[(p, "e"), (p, "e")], (p, "e"), &[1], trunc),
        op(&sp, &[(p, "x"), (p, "e")], (p, "x"), &[1], trunc),
        op(&sp, &[(p, "e"), (p, "x")], (p, "x"), &[1], trunc),
        op(&sp, &[], (p, "x"), &[0, 1], trunc),
    ];
    AInfty::new(sp, ops, 0, trunc).expect("valid fixture")
}

/// ℤ × ℤ: two orthogonal idempotents; the unit is their sum.
pub fn split_unit(trunc: usize) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("e1", 0), ("e2", 0)])]);
    let p = "L,L";
    let ops = vec![
        op(&sp, &[(p, "e1"), (p, "e1")], (p, "e1"), &[1], trunc),
        op(&sp, &[(p, "e2"), (p, "e2")], (p, "e2"), &[1], trunc),
    ];
    AInfty::new(sp, ops, 0, trunc).expect("valid fixture")
}

/// A dg algebra on one object with small integer structure constants.
#[derive(Clone, Debug)]
pub struct DgAlgebra {
    pub names: Vec<String>,
    pub degrees: Vec<i64>,
    /// `mult[i][j]` = coordinates of `b_i · b_j`.
    pub mult: Vec<Vec<Vec<i64>>>,
    /// `diff[i]` = coordinates of `d b_i`.
    pub diff: Vec<Vec<i64>>,
}

fn sgn(p: i64) -> i64 {
    if p.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

impl DgAlgebra {
    fn new(names: &[&str], degrees: Vec<i64>) -> Self {
        let r = names.len();
        DgAlgebra {
            names: names.iter().map(|s| s.to_string()).collect(),
            degrees,
            mult: vec![vec![vec![0; r]; r]; r],
            diff: vec![vec![0; r]; r],
        }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    fn mul_vec(&self, u: &[i64], v: &[i64]) -> Vec<i64> {
        let r = self.rank();
        let mut out = vec![0; r];
        for i in 0..r {
            if u[i] == 0 {
                continue;
            }
            for j in 0..r {
                if v[j] == 0 {
                    continue;
                }
                for k in 0..r {
                    out[k] += u[i] * v[j] * self.mult[i][j][k];
                }
            }
        }
        out
    }

    fn d_vec(&self, u: &[i64]) -> Vec<i64> {
        let r = self.rank();
        let mut out = vec![0; r];
        for i in 0..r {
            for k in 0..r {
                out[k] += u[i] * self.diff[i][k];
            }
        }
        out
    }

    fn unit_vec(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        v
    }

    /// Associativity, `d² = 0`, the graded Leibniz rule and degree homogeneity.
    pub fn is_valid(&self) -> bool {
        let r = self.rank();
        for i in 0..r {
            let di = self.d_vec(&self.unit_vec(i));
            if di.iter().enumerate().any(|(k, &c)| c != 0 && self.degrees[k] != self.degrees[i] + 1) {
                return false;
            }
            if self.d_vec(&di).iter().any(|&c| c != 0) {
                return false;
            }
            for j in 0..r {
                let ij = &self.mult[i][j];
                if ij.iter().enumerate().any(|(k, &c)| c != 0 && self.degrees[k] != self.degrees[i] + self.degrees[j]) {
                    return false;
                }
                let lhs = self.d_vec(ij);
                let a = self.mul_vec(&di, &self.unit_vec(j));
                let b = self.mul_vec(&self.unit_vec(i), &self.d_vec(&self.unit_vec(j)));
                let s = sgn(self.degrees[i]);
                if (0..r).any(|k| lhs[k] != a[k] + s * b[k]) {
                    return false;
                }
                for k in 0..r {
                    let l = self.mul_vec(ij, &self.unit_vec(k));
                    let rr = self.mul_vec(&self.unit_vec(i), &self.mult[j][k]);
                    if l != rr {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Replaces the basis by the columns of `p`, whose inverse is `pinv`.
    fn change_basis(&self, p: &[Vec<i64>], pinv: &[Vec<i64>]) -> DgAlgebra {
        let r = self.rank();
        let col = |m: &[Vec<i64>], j: usize| -> Vec<i64> { (0..r).map(|i| m[i][j]).collect() };
        let to_new = |v: &[i64]| -> Vec<i64> { (0..r).map(|i| (0..r).map(|k| pinv[i][k] * v[k]).sum()).collect() };
        let mut out = self.clone();
        for i in 0..r {
            out.diff[i] = to_new(&self.d_vec(&col(p, i)));
            for j in 0..r {
                out.mult[i][j] = to_new(&self.mul_vec(&col(p, i), &col(p, j)));
            }
        }
        out
    }

    /// `μ¹(a) = (-1)^{|a|} da`, `μ²(a₂, a₁) = (-1)^{|a₁|} a₂a₁`.
    pub fn to_ainfty(&self, trunc: usize) -> AInfty {
        let gens: Vec<(&str, i64)> = self.names.iter().map(|s| s.as_str()).zip(self.degrees.iter().copied()).collect();
        let sp = space(&["L"], &[("L", "L", &gens)]);
        let r = self.rank();
        let mut ops = Vec::new();
        for i in 0..r {
            for k in 0..r {
                let c = self.diff[i][k] * sgn(self.degrees[i]);
                if c != 0 {
                    ops.push(OpEntry { inputs: vec![i as GenId], output: k as GenId, coeff: QSeries::constant(c, trunc) });
                }
            }
            for j in 0..r {
                for k in 0..r {
                    let c = self.mult[i][j][k] * sgn(self.degrees[j]);
                    if c != 0 {
                        ops.push(OpEntry {
                            inputs: vec![i as GenId, j as GenId],
                            output: k as GenId,
                            coeff: QSeries::constant(c, trunc),
                        });
                    }
                }
            }
        }
        AInfty::new(sp, ops, 0, trunc).expect("dg algebra converts to a valid table")
    }
}

fn truncated_poly(deg: i64, top: usize) -> DgAlgebra {
    let names: Vec<String> = (0..top).map(|i| format!("x{}", i)).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut a = DgAlgebra::new(&refs, (0..top).map(|i| deg * i as i64).collect());
    for i in 0..top {
        for j in 0..top {
            if i + j < top {
                a.mult[i][j][i + j] = 1;
            }
        }
    }
    a
}

/// `End(ℤv₀ ⊕ ℤv₁)` with `|v₀| = 0`, `|v₁| = 1` and `d = [c·E₁₀, ·]`.
fn endomorphisms(c: i64, lower_only: bool) -> DgAlgebra {
    // E_ij sends v_j to v_i and has degree |v_i| - |v_j|
    let all = [(0usize, 0usize), (1, 1), (1, 0), (0, 1)];
    let idx: Vec<(usize, usize)> = if lower_only { all[..3].to_vec() } else { all.to_vec() };
    let names: Vec<String> = idx.iter().map(|(i, j)| format!("E{}{}", i, j)).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let vdeg = [0i64, 1];
    let degrees = idx.iter().map(|(i, j)| vdeg[*i] - vdeg[*j]).collect();
    let mut a = DgAlgebra::new(&refs, degrees);
    let pos = |p: (usize, usize)| idx.iter().position(|&q| q == p);
    for (x, &(i, j)) in idx.iter().enumerate() {
        for (y, &(k, l)) in idx.iter().enumerate() {
            if j == k {
                if let Some(z) = pos((i, l)) {
                    a.mult[x][y][z] = 1;
                }
            }
        }
    }
    let e10 = pos((1, 0)).unwrap();
    for x in 0..idx.len() {
        // d f = c E10 f - (-1)^{|f|} f c E10
        let s = sgn(a.degrees[x]);
        for z in 0..idx.len() {
            a.diff[x][z] = c * a.mult[e10][x][z] - s * c * a.mult[x][e10][z];
        }
    }
    a
}

/// Graded-commutative `ℤ[x,y]/(x², y²)`.
fn exterior_two(dx: i64, dy: i64) -> DgAlgebra {
    let mut a = DgAlgebra::new(&["1", "x", "y", "xy"], vec![0, dx, dy, dx + dy]);
    let one = 0;
    for i in 0..4 {
        a.mult[one][i][i] = 1;
        a.mult[i][one][i] = 1;
    }
    a.mult[1][2][3] = 1;
    a.mult[2][1][3] = sgn(dx * dy);
    a
}

fn product_of_two() -> DgAlgebra {
    let mut a = DgAlgebra::new(&["e1", "e2"], vec![0, 0]);
    a.mult[0][0][0] = 1;
    a.mult[1][1][1] = 1;
    a
}

/// A random unimodular change of basis that preserves degrees, with its inverse.
fn random_unimodular(degrees: &[i64], rng: &mut ChaCha8Rng) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let r = degrees.len();
    let mut p: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| (i == j) as i64).collect()).collect();
    let mut q = p.clone();
    for _ in 0..6 {
        let i = rng.gen_range(0..r);
        let j = rng.gen_range(0..r);
        if i == j || degrees[i] != degrees[j] {
            continue;
        }
        let k: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
        // P ← P (I + k E_ij): column j += k column i;  P⁻¹ ← (I - k E_ij) P⁻¹: row i -= k row j
        for row in p.iter_mut() {
            row[j] += k * row[i];
        }
        for c in 0..r {
            q[i][c] -= k * q[j][c];
        }
    }
    for i in 0..r {
        if rng.gen_bool(0.3) {
            for row in p.iter_mut() {
                row[i] = -row[i];
            }
            for c in 0..r {
                q[i][c] = -q[i][c];
            }
        }
    }
    (p, q)
}

/// A random valid dg algebra of rank at most 4, in a randomly perturbed integral basis.
pub fn random_dg_algebra(seed: u64) -> DgAlgebra {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = match rng.gen_range(0..7) {
        0 => truncated_poly(rng.gen_range(-2..=2), 2),
        1 => truncated_poly(2 * rng.gen_range(-1..=1), 3),
        2 => truncated_poly(2 * rng.gen_range(-1..=1), 4),
        3 => endomorphisms(rng.gen_range(1..=3), false),
        4 => endomorphisms(rng.gen_range(1..=3), true),
        5 => exterior_two(rng.gen_range(-1..=2), rng.gen_range(-1..=2)),
        _ => product_of_two(),
    };
    let (p, q) = random_unimodular(&base.degrees, &mut rng);
    let mut out = base.change_basis(&p, &q);
    out.names = (0..out.rank()).map(|i| format!("b{}", i)).collect();
    out
}

/// `random_dg_algebra(seed).to_ainfty(trunc)`.
pub fn random_dg_ainfty(seed: u64, trunc: usize) -> AInfty {
    random_dg_algebra(seed).to_ainfty(trunc)
}

/// Random q-series with small coefficients.
pub fn random_series(rng: &mut impl Rng, trunc: usize, max_power: usize) -> QSeries {
    let top = max_power.min(trunc);
    QSeries::from_coeffs((0..=top).map(|_| BigInt::from(rng.gen_range(-2i64..=2))), trunc)
}

/// Inputs for the three-term total bimodule, with the expected outcome.
#[derive(Clone, Debug)]
pub struct TotalFixture {
    pub name: &'static str,
    pub a: AInfty,
    pub b: AInfty,
    pub functor: LinearFunctor,
    pub delta: BimoduleMorphism,
    pub h: BimoduleMorphism,
    pub expect_pass: bool,
}

impl TotalFixture {
    pub fn input(&self, max_arity: usize) -> TotalInput<'_> {
        TotalInput {
            a: &self.a,
            b: &self.b,
            functor: &self.functor,
            delta: &self.delta,
            h: &self.h,
            max_arity,
        }
    }
}

fn arity_one(
    a: &AInfty,
    src: &PairSpace,
    tgt: &PairSpace,
    degree: i64,
    comps: &[(&str, &str, i64)],
) -> BimoduleMorphism {
    let entries = comps
        .iter()
        .filter(|(_, _, c)| *c != 0)
        .map(|(x, y, c)| {
            let xi = src.gens().iter().position(|g| g.name == *x).expect("source generator") as GenId;
            let yi = tgt.gens().iter().position(|g| g.name == *y).expect("target generator") as GenId;
            (vec![Letter::M(xi)], yi, QSeries::constant(*c, a.trunc))
        })
        .collect();
    BimoduleMorphism::new(a, src, tgt, degree, entries).expect("homogeneous fixture morphism")
}

fn projection_target(trunc: usize, sign: i64) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("r", 0), ("t", -1)])]);
    let ops = vec![op(&sp, &[("L,L", "t")], ("L,L", "r"), &[sign], trunc)];
    AInfty::new(sp, ops, 0, trunc).expect("valid fixture")
}

fn all_complex_with(t_sign: i64, h_sign: i64, trunc: usize) -> TotalFixture {
    let sp = space(&["L"], &[("L", "L", &[("p", 0), ("r", 0), ("t", -1)])]);
    let ops = vec![op(&sp, &[("L,L", "t")], ("L,L", "r"), &[t_sign], trunc)];
    let a = AInfty::new(sp, ops, 0, trunc).expect("valid fixture");
    let b = projection_target(trunc, t_sign);
    let one = BigInt::from(1);
    let functor = LinearFunctor::new(&a, &b, vec![0], vec![vec![], vec![(0, one.clone())], vec![(1, one)]])
        .expect("degree-0 functor");
    let dual = dual_space(&a);
    let (qb, _) = tautological_rho(&a, &functor, &b).expect("pullback");
    let delta = arity_one(&a, &dual, &a.space, 0, &[("p*", "p", 1), ("r*", "r", 1), ("r*", "p", 1)]);
    let h = arity_one(&a, &dual, &qb.space, -1, &[("r*", "t", h_sign)]);
    TotalFixture { name: "all-complex", a, b, functor, delta, h, expect_pass: false }
}

fn zero_category(trunc: usize) -> AInfty {
    let sp = PairSpace::new(vec!["L".into()], Vec::new()).expect("empty space");
    AInfty::new(sp, Vec::new(), 0, trunc).expect("empty category")
}

fn exterior_delta_with(e_sign: i64, x_sign: i64, trunc: usize) -> TotalFixture {
    let a = exterior_one(trunc);
    let b = zero_category(trunc);
    let functor = LinearFunctor::new(&a, &b, vec![0], vec![vec![], vec![]]).expect("zero functor");
    let dual = dual_space(&a);
    let delta = arity_one(&a, &dual, &a.space, 1, &[("e*", "x", e_sign), ("x*", "e", x_sign)]);
    let h = BimoduleMorphism::zero(0);
    TotalFixture { name: "exterior-delta", a, b, functor, delta, h, expect_pass: false }
}

fn thimble_target(trunc: usize, signs: [i64; 3]) -> AInfty {
    let sp = space(&["L"], &[("L", "L", &[("eB", 0), ("s", -1)])]);
    let p = "L,L";
    let ops = vec![
        op(&sp, &[(p, "s")], (p, "eB"), &[signs[0]], trunc),
        op(&sp, &[(p, "eB"), (p, "eB")], (p, "eB"), &[1], trunc),
        op(&sp, &[(p, "eB"), (p, "s")], (p, "s"), &[signs[1]], trunc),
        op(&sp, &[(p, "s"), (p, "eB")], (p, "s"), &[signs[2]], trunc),
    ];
    AInfty::new(sp, ops, 0, trunc).expect("degrees are consistent")
}

fn thimble_with(b_signs: [i64; 3], d_sign: i64, h_sign: i64, trunc: usize) -> TotalFixture {
    let a = unit_only(trunc);
    let b = thimble_target(trunc, b_signs);
    let functor = LinearFunctor::new(&a, &b, vec![0], vec![vec![(0, BigInt::from(1))]]).expect("functor");
    let dual = dual_space(&a);
    let (qb, _) = tautological_rho(&a, &functor, &b).expect("pullback");
    let delta = arity_one(&a, &dual, &a.space, 0, &[("e*", "e", d_sign)]);
    let h = arity_one(&a, &dual, &qb.space, -1, &[("e*", "s", h_sign)]);
    TotalFixture { name: "thimble", a, b, functor, delta, h, expect_pass: false }
}

/// All inputs are plain complexes; `δ` is a quasi-isomorphism and `h` a null-homotopy of `ρδ`.
pub fn all_complex(trunc: usize) -> TotalFixture {
    TotalFixture { expect_pass: true, ..all_complex_with(1, 1, trunc) }
}

/// Λ[x] with `δ(e*) = x`, `δ(x*) = e` and the zero target category.
pub fn exterior_delta(trunc: usize) -> TotalFixture {
    TotalFixture { expect_pass: true, ..exterior_delta_with(1, 1, trunc) }
}

/// ℤ mapped onto the endpoint of the thimble complex `s ↦ e_B`.
pub fn thimble(trunc: usize) -> TotalFixture {
    TotalFixture { expect_pass: true, ..thimble_with([1, -1, 1], 1, 1, trunc) }
}

/// Negative controls: each breaks exactly one of the three conditions or acyclicity.
pub fn total_controls(trunc: usize) -> Vec<TotalFixture> {
    let mut h_zero = all_complex_with(1, 0, trunc);
    h_zero.name = "all-complex/h-zero";
    let mut h_flip = all_complex_with(1, -1, trunc);
    h_flip.name = "all-complex/h-flipped";
    let mut open = exterior_delta_with(1, -1, trunc);
    open.name = "exterior-delta/not-closed";
    let mut sum = thimble_with([1, -1, 1], 0, 0, trunc);
    sum.name = "thimble/direct-sum";
    let a = exterior_one(trunc);
    let b = zero_category(trunc);
    let functor = LinearFunctor::new(&a, &b, vec![0], vec![vec![], vec![]]).expect("zero functor");
    let direct = TotalFixture {
        name: "exterior/direct-sum",
        delta: BimoduleMorphism::zero(1),
        h: BimoduleMorphism::zero(0),
        a,
        b,
        functor,
        expect_pass: false,
    };
    vec![h_zero, h_flip, open, sum, direct]
}

/// Positive total fixtures followed by the controls.
pub fn total_fixtures(trunc: usize) -> Vec<TotalFixture> {
    let mut v = vec![all_complex(trunc), exterior_delta(trunc), thimble(trunc)];
    v.extend(total_controls(trunc));
    v
}


/// `b ≡ 1`, `c` the indicator of `[0, 1]` with narrow smoothing; Γ is close to `e − 1`.
pub fn strip_e_minus_one() -> StripProblem {
    StripProblem {
        b: Profile::constant(1.0),
        c: Profile::boxed(0.0, 1.0, 1.0, 0.01),
        window: (-1.0, 2.0),
        h_s: 0.004,
        h_t: 0.25,
    }
}

/// `b` rising from `0.5` to `1.2`, `c` a negative bump.
pub fn strip_tanh() -> StripProblem {
    StripProblem {
        b: Profile::Tanh { center: 0.0, width: 0.3, left: 0.5, right: 1.2 },
        c: Profile::bump(0.0, 1.0, -1.0),
        window: (-5.0, 5.0),
        h_s: 0.01,
        h_t: 0.25,
    }
}

/// `b = π/4 + sech`, `c` a sum of two bumps of opposite sign.
pub fn strip_sech() -> StripProblem {
    StripProblem {
        b: Profile::sum(vec![
            Profile::constant(std::f64::consts::FRAC_PI_4),
            Profile::Sech { center: 0.0, width: 0.5, height: 0.5 },
        ]),
        c: Profile::sum(vec![Profile::bump(0.5, 0.8, 2.0), Profile::bump(-1.0, 0.5, -1.0)]),
        window: (-10.0, 10.0),
        h_s: 0.01,
        h_t: 0.25,
    }
}

/// Smooth `t`-independent strip problems with a quadrature oracle for Γ.
pub fn strip_fixtures() -> Vec<(&'static str, StripProblem)> {
    vec![("e-minus-one", strip_e_minus_one()), ("tanh", strip_tanh()), ("sech", strip_sech())]
}

/// A problem carrying `c` and a trivial one, both with `b → π/4` at the glued ends.
pub fn gluing_pair() -> (StripProblem, StripProblem) {
    let alpha = std::f64::consts::FRAC_PI_4;
    let p1 = StripProblem {
        b: Profile::sum(vec![Profile::constant(alpha), Profile::Sech { center: 0.0, width: 1.5, height: 0.4 }]),
        c: Profile::bump(0.0, 1.0, -1.0),
        window: (-22.0, 22.0),
        h_s: 0.05,
        h_t: 0.25,
    };
    let p2 = StripProblem {
        b: Profile::sum(vec![Profile::constant(alpha), Profile::Sech { center: 0.0, width: 1.5, height: -0.3 }]),
        c: Profile::constant(0.0),
        window: (-22.0, 22.0),
        h_s: 0.05,
        h_t: 0.25,
    };
    (p1, p2)
}
