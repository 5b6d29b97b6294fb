//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{E, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kit_core::ainfty::{diagonal_bimodule, dual_diagonal_bimodule, dual_space, AInfty};
use kit_core::cc2::{cc2_differential, cc2_differential_literal, random_morphism, total_complex};
use kit_core::fixtures;
use kit_core::homology::{homology, is_acyclic, smith_normal_form, verify_snf, ChainMap, IntChainComplex};
use kit_core::morse_lab::{
    drift_constant, explicit_upsilon, flipped_fixture, random_profile, scan_connecting_orbits, small_r_fixture,
    uniform_r_grid, FlowSpec,
};
use kit_core::profile::Profile;
use kit_core::sign_lab::{sweep, Mutation, SweepBounds};
use kit_core::strip_lab::{
    discrete_q_spectrum, gamma_pde, gamma_quadrature, injectivity_margin, scaling_report, spectrum_convergence,
    StripOptions, StripProblem, WeightVector,
};
use kit_core::IntMatrix;

const N: usize = 8;

type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.2}s]", o.detail, took.as_secs_f64());
    if let Some(l) = limit {
        if took > l {
            o.passed = false;
            o.detail = format!("{} exceeds {}s", o.detail, l.as_secs());
        }
    }
    o
}

fn d_squared_vanishes(a: &AInfty, seed: u64, cochain_arity: usize) -> (bool, usize) {
    let dual = dual_space(a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for degree in -3..=3 {
        let psi = random_morphism(a, &dual, &a.space, degree, cochain_arity, 0.5, &mut rng);
        let d = cc2_differential(a, &psi, 6);
        if !cc2_differential(a, &d, 6).is_zero() {
            return (false, checked);
        }
        checked += 1;
    }
    (true, checked)
}

fn criterion_1() -> Outcome {
    let ext = fixtures::exterior_one(N);
    let (ok_ext, n_ext) = d_squared_vanishes(&ext, 1, 5);
    let mut ok = ok_ext;
    let mut cochains = n_ext;
    for seed in 0..25 {
        let dg = fixtures::random_dg_algebra(seed);
        if dg.rank() > 4 {
            return outcome(false, format!("random algebra {} has rank {}", seed, dg.rank()));
        }
        let a = dg.to_ainfty(N);
        let (good, n) = d_squared_vanishes(&a, 1000 + seed, 5);
        ok &= good;
        cochains += n;
    }
    outcome(ok, format!("d²ψ = 0 on all output words of arity ≤ 6 for {} random cochains", cochains))
}

fn criterion_2() -> Outcome {
    let algebras: Vec<AInfty> = vec![fixtures::exterior_one(N), fixtures::curved_x2(N), fixtures::unit_only(N)]
        .into_iter()
        .chain((0..5).map(|s| fixtures::random_dg_ainfty(s, N)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut discrepancies = 0usize;
    for i in 0..1000 {
        let a = &algebras[i % algebras.len()];
        let dual = dual_space(a);
        let degree = rng.gen_range(-2..=2);
        let max = if i % algebras.len() < 3 { 4 } else { 3 };
        let psi = random_morphism(a, &dual, &a.space, degree, max - 1, 0.4, &mut rng);
        let general = cc2_differential(a, &psi, max);
        let (literal, _) = cc2_differential_literal(a, &psi, max);
        if general != literal {
            discrepancies += 1;
        }
    }
    outcome(discrepancies == 0, format!("1000 cochains, {} discrepancies", discrepancies))
}

fn criterion_3() -> Outcome {
    let rep = sweep(SweepBounds::default(), Mutation::None);
    outcome(
        rep.passed() && rep.checked > 0,
        format!(
            "{} instances, {} failures, {} remainder dependencies",
            rep.checked, rep.failed, rep.remainder_dependencies
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut candidates: Vec<(String, AInfty)> = vec![
        ("exterior".into(), fixtures::exterior_one(N)),
        ("curved_x2".into(), fixtures::curved_x2(N)),
        ("split_unit".into(), fixtures::split_unit(N)),
        ("unit_only".into(), fixtures::unit_only(N)),
        ("two_term".into(), fixtures::two_term(3, N)),
        ("no_product".into(), fixtures::no_product(N)),
        ("single_mu1".into(), fixtures::single_mu1(0, N)),
    ];
    for s in 0..10 {
        candidates.push((format!("random_dg_{}", s), fixtures::random_dg_ainfty(s, N)));
    }
    let mut associative = 0;
    let mut bad = Vec::new();
    for (name, a) in &candidates {
        if !a.check_associativity(6).map(|v| v.is_empty()).unwrap_or(false) {
            continue;
        }
        associative += 1;
        let diag = diagonal_bimodule(a).check(a, 6).map(|v| v.is_empty()).unwrap_or(false);
        let dual = dual_diagonal_bimodule(a).check(a, 6).map(|v| v.is_empty()).unwrap_or(false);
        if !(diag && dual) {
            bad.push(name.clone());
        }
    }
    let fx = fixtures::all_complex(N);
    let (total, rep) = match total_complex(&fx.input(6)) {
        Ok(x) => x,
        Err(e) => return outcome(false, format!("total assembly failed: {}", e)),
    };
    let mut snf_acyclic = !total.space.is_empty();
    for ((x, y), _) in total.space.pairs() {
        match total.pair_complex(x, y) {
            Ok(g) => snf_acyclic &= snf_exact(&g.complex),
            Err(_) => snf_acyclic = false,
        }
    }
    let ok = bad.is_empty() && associative >= 10 && rep.passed() && snf_acyclic;
    outcome(
        ok,
        format!(
            "{} associative fixtures, invalid bimodules: {:?}; all-complex total valid = {}, acyclic = {}",
            associative,
            bad,
            rep.passed(),
            snf_acyclic
        ),
    )
}

/// Exactness over ℤ read off the Smith normal forms: at every slot the ranks of the incoming and
/// outgoing differentials add up to the slot rank, and every invariant factor is a unit.
fn snf_exact(c: &IntChainComplex) -> bool {
    let forms: Vec<_> = (0..c.len().saturating_sub(1)).map(|s| smith_normal_form(c.diff(s))).collect();
    if forms.iter().any(|f| f.invariant_factors().iter().any(|d| !d.is_one())) {
        return false;
    }
    (0..c.len()).all(|slot| {
        let incoming = if slot == 0 { 0 } else { forms[slot - 1].rank };
        let outgoing = forms.get(slot).map_or(0, |f| f.rank);
        incoming + outgoing == c.rank(slot)
    })
}

fn criterion_5() -> Outcome {
    let ms: Vec<i64> = (-2..=2).collect();
    let s = match discrete_q_spectrum(FRAC_PI_4, 1.0 / 400.0, ms.iter().copied()) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let err = ms
        .iter()
        .map(|&m| (s.eigenvalue(m).unwrap_or(f64::NAN) - (PI * m as f64 + FRAC_PI_4)).abs())
        .fold(0.0, f64::max);
    let order = spectrum_convergence(FRAC_PI_4, 1.0 / 400.0, &ms)
        .map(|rows| rows.iter().map(|r| r.order).fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN);
    outcome(err < 1e-3 && order >= 1.9, format!("max error {:.3e}, order {:.3}", err, order))
}

fn criterion_6() -> Outcome {
    let p = StripProblem {
        b: Profile::sum(vec![Profile::constant(FRAC_PI_4), Profile::bump(0.0, 1.0, 0.3)]),
        c: Profile::constant(0.0),
        window: (-3.0, 3.0),
        h_s: 0.1,
        h_t: 1.0 / 6.0,
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for mu in [-1, 0, 1, 2] {
        match injectivity_margin(&p, &WeightVector::strip(mu, 0)) {
            Ok(r) => {
                ok &= r.numerical_index() == r.formula_index && r.gap >= 1e-6;
                parts.push(format!("μ={}: {}−{}={} gap {:.2e}", mu, r.kernel_dim, r.cokernel_dim, r.formula_index, r.gap));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("μ={}: {}", mu, e));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let opts = StripOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in fixtures::strip_fixtures() {
        let run = || -> kit_core::Result<(f64, f64, bool, f64)> {
            let g = gamma_pde(&p, &opts)?;
            let q = gamma_quadrature(&p.b, &p.c)?;
            let big = gamma_pde(&p.enlarged(0.5), &opts)?;
            Ok((g.gamma, q, g.sign_stable, big.gamma))
        };
        match run() {
            Ok((g, q, stable, big)) => {
                let rel = (g - q).abs() / q.abs();
                ok &= rel < 1e-6 && stable && big.signum() == g.signum();
                parts.push(format!("{}: rel {:.1e}", name, rel));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {}", name, e));
            }
        }
    }
    let (_, e1) = &fixtures::strip_fixtures()[0];
    let close = gamma_quadrature(&e1.b, &e1.c).map(|q| (q - (E - 1.0)).abs() < 1e-4).unwrap_or(false);
    outcome(ok && close, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let (p1, p2) = fixtures::gluing_pair();
    match scaling_report(&p1, &p2, &[5.0, 10.0, 15.0], &StripOptions::default()) {
        Ok(r) => {
            let devs: Vec<String> = r.rows.iter().map(|x| format!("{:.2e}", x.deviation)).collect();
            let strict = r.rows[0].deviation > r.rows[1].deviation && r.rows[1].deviation > r.rows[2].deviation;
            outcome(r.monotone && strict && r.sign_persists, format!("deviations {:?}, sign persists = {}", devs, r.sign_persists))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    let mut agree = 0;
    for _ in 0..20 {
        let p = random_profile(&mut rng);
        let (c, u) = match (drift_constant(&p), explicit_upsilon(&p, 301)) {
            (Ok(c), Ok(u)) => (c, u),
            _ => return outcome(false, "random profile rejected"),
        };
        worst = worst.max(u.residual);
        if c != 0.0 && u.leading_coefficient.signum() == c.signum() {
            agree += 1;
        }
    }
    for p in [small_r_fixture(), flipped_fixture()] {
        worst = worst.max(explicit_upsilon(&p, 301).map(|u| u.residual).unwrap_or(f64::INFINITY));
    }
    let grid = uniform_r_grid(0.1, 20);
    let quiet = scan_connecting_orbits(&FlowSpec::new(small_r_fixture()), &grid).map(|r| r.smallest_r_with_solution);
    let loud = scan_connecting_orbits(&FlowSpec::new(flipped_fixture()), &grid).map(|r| r.smallest_r_with_solution);
    let ok = worst < 1e-8 && agree == 20 && matches!(quiet, Ok(None)) && matches!(loud, Ok(Some(_)));
    outcome(
        ok,
        format!(
            "residual {:.1e}, sign agreement {}/20, small-r first orbit {:?}, flipped first orbit {:?}",
            worst,
            agree,
            quiet.ok().flatten(),
            loud.ok().flatten()
        ),
    )
}

fn random_matrix(rng: &mut ChaCha8Rng) -> IntMatrix {
    let rows = rng.gen_range(1..=40);
    let cols = rng.gen_range(1..=40);
    let density = rng.gen_range(0.05..0.6);
    let mut m = IntMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen_bool(density) {
                m.set(i, j, BigInt::from(rng.gen_range(-9i64..=9)));
            }
        }
    }
    m
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut good = 0;
    for _ in 0..200 {
        let m = random_matrix(&mut rng);
        let r = smith_normal_form(&m);
        let product_ok = r.u.mul(&m).mul(&r.v) == r.s;
        let dets_ok = r.u.determinant().abs().is_one() && r.v.determinant().abs().is_one();
        let d = r.invariant_factors();
        let chain_ok = d.iter().all(|x| x.is_positive()) && d.windows(2).all(|w| (&w[1] % &w[0]).is_zero());
        if product_ok && dets_ok && chain_ok && verify_snf(&m, &r) {
            good += 1;
        }
    }
    let base = IntChainComplex::new(
        0,
        vec![2, 3, 1],
        vec![IntMatrix::from_i64(&[&[1, 0], &[1, 2], &[0, 0]]), IntMatrix::from_i64(&[&[0, 0, 1]])],
    )
    .expect("complex");
    let cone_ok = is_acyclic(&ChainMap::identity(&base).cone());
    let two = IntChainComplex::new(0, vec![1, 1], vec![IntMatrix::from_i64(&[&[2]])]).expect("complex");
    let h = homology(&two);
    let torsion_ok = h[&1].betti == 0 && h[&1].torsion == vec![BigInt::from(2)] && h[&0].is_zero();
    outcome(
        good == 200 && cone_ok && torsion_ok,
        format!("{}/200 SNF post-conditions, cone acyclic = {}, ℤ/2 = {}", good, cone_ok, torsion_ok),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("CC2 differential squares to zero", Some(60), criterion_1),
        ("general and literal CC2 differentials agree", None, criterion_2),
        ("sign-ledger sweep", Some(120), criterion_3),
        ("diagonal, dual diagonal and total bimodule", None, criterion_4),
        ("discrete spectrum", Some(10), criterion_5),
        ("index realization", None, criterion_6),
        ("Γ against quadrature", None, criterion_7),
        ("gluing scaling", None, criterion_8),
        ("Morse model", Some(60), criterion_9),
        ("homology engine", None, criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let o = timed(limit.map(Duration::from_secs), f);
        if !o.passed {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.passed { "PASS" } else { "FAIL" }, name, o.detail);
    }
    if failed > 0 {
        println!("{} criteria failed", failed);
        std::process::exit(1);
    }
}
