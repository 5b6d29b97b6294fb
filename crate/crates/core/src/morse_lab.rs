//! A Morse continuation toy model on the collar coordinate `w`, with a one-point fibre.
//!
//! The family is `f_{r,s}(w) = b'(s) φ(w) − r c(s) χ(w)`, where `φ = (w−1)²/2` near `w = 1`
//! and `χ = w` there. The negative gradient flow is shot from the critical point `w = 1` of
//! `f_−` and classified by where it ends up. The linearization at `r = 0` along `w ≡ 1` has the
//! explicit solutions `Υ(s) = exp(−b(s)) ∫_{−∞}^s exp(b)c`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};
use crate::numeric::integrate_with_breaks;
use crate::profile::Profile;

/// `b` with slope `±1` at `∓∞` and a compactly supported `c`, on a finite window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarProfile {
    pub b: Profile,
    pub c: Profile,
    pub window: (f64, f64),
}

const SLOPE_TOL: f64 = 1e-9;

impl CollarProfile {
    pub fn validate(&self) -> Result<()> {
        let (s0, s1) = self.window;
        if !(s0 < s1) {
            return Err(KitError::Argument(format!("bad window {:?}", self.window)));
        }
        let (d0, d1) = (self.b.deriv(s0), self.b.deriv(s1));
        if (d0 - 1.0).abs() > SLOPE_TOL || (d1 + 1.0).abs() > SLOPE_TOL {
            return Err(KitError::WindowTooSmall(format!(
                "db/ds is {} and {} at the window edges, expected 1 and −1",
                d0, d1
            )));
        }
        match self.c.support() {
            None => Err(KitError::Argument("c must be compactly supported".into())),
            Some((a, b)) if a != b && (a < s0 || b > s1) => Err(KitError::WindowTooSmall(format!(
                "c is supported on [{}, {}], outside the window [{}, {}]",
                a, b, s0, s1
            ))),
            _ => Ok(()),
        }
    }

    /// `c ≤ 0` everywhere and `c < 0` somewhere, by sampling.
    pub fn is_small_r_regime(&self) -> bool {
        let (s0, s1) = self.window;
        let n = 4000;
        let vals: Vec<f64> = (0..=n).map(|k| self.c.mean(s0 + (s1 - s0) * k as f64 / n as f64)).collect();
        vals.iter().all(|&v| v <= 0.0) && vals.iter().any(|&v| v < 0.0)
    }

    fn breaks(&self) -> Vec<f64> {
        let mut v = self.b.kinks();
        v.extend(self.c.kinks());
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        v
    }

    fn integrand(&self, s: f64) -> f64 {
        self.b.mean(s).exp() * self.c.mean(s)
    }
}

/// `C = ∫ exp(b) c`.
pub fn drift_constant(p: &CollarProfile) -> Result<f64> {
    p.validate()?;
    match p.c.support() {
        Some((a, b)) if a != b => Ok(integrate_with_breaks(|s| p.integrand(s), a, b, &p.breaks(), 1e-14)),
        _ => Ok(0.0),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UpsilonResult {
    /// `(s, Υ(s))`.
    pub samples: Vec<(f64, f64)>,
    /// Largest `|dΥ/ds + b'Υ − c| / max(1, |Υ|)` over interior samples away from kinks.
    pub residual: f64,
    /// `κ = b(s) + s` at the right edge, so that `Υ ≈ C exp(s − κ)` there.
    pub kappa: f64,
    /// `Υ(s_max) / exp(s_max − κ)`.
    pub leading_coefficient: f64,
}

const FD_STEP: f64 = 1e-3;

/// Samples `Υ` on the window and checks the ODE by a seven-point difference.
pub fn explicit_upsilon(p: &CollarProfile, samples: usize) -> Result<UpsilonResult> {
    p.validate()?;
    let samples = samples.max(2);
    let (s0, s1) = p.window;
    let breaks = p.breaks();
    let f = |s: f64| p.integrand(s);
    let step = (s1 - s0) / (samples - 1) as f64;
    let mut acc = 0.0;
    let mut pts = Vec::with_capacity(samples);
    let mut integrals = Vec::with_capacity(samples);
    for k in 0..samples {
        let s = if k + 1 == samples { s1 } else { s0 + step * k as f64 };
        if k > 0 {
            acc += integrate_with_breaks(f, pts[k - 1], s, &breaks, 1e-14);
        }
        pts.push(s);
        integrals.push(acc);
    }
    let upsilon = |s: f64, i: f64| (-p.b.mean(s)).exp() * i;
    let values: Vec<(f64, f64)> = pts.iter().zip(&integrals).map(|(&s, &i)| (s, upsilon(s, i))).collect();
    let mut residual = 0.0f64;
    let h = FD_STEP;
    for (k, (&s, &i)) in pts.iter().zip(&integrals).enumerate() {
        if k == 0 || k + 1 == samples || breaks.iter().any(|&x| (x - s).abs() <= 4.0 * h) {
            continue;
        }
        let at = |d: f64| upsilon(s + d, i + integrate_with_breaks(f, s, s + d, &[], 1e-14));
        let deriv = (-at(-3.0 * h) + 9.0 * at(-2.0 * h) - 45.0 * at(-h) + 45.0 * at(h) - 9.0 * at(2.0 * h)
            + at(3.0 * h))
            / (60.0 * h);
        let u = upsilon(s, i);
        let r = deriv + p.b.deriv(s) * u - p.c.mean(s);
        residual = residual.max(r.abs() / u.abs().max(1.0));
    }
    let kappa = p.b.mean(s1) + s1;
    let last = values.last().map(|v| v.1).unwrap_or(0.0);
    Ok(UpsilonResult { samples: values, residual, kappa, leading_coefficient: last / (s1 - kappa).exp() })
}

/// `φ'`: `w − 1` up to `w = 2`, bending down to a second zero at `w = 3`.
pub fn phi_prime(w: f64) -> f64 {
    let e = (w - 2.0).max(0.0);
    (w - 1.0) - 2.0 * e * e
}

fn phi_second(w: f64) -> f64 {
    1.0 - 4.0 * (w - 2.0).max(0.0)
}

/// `χ'`: a smoothstep from 0 at `w = 0` to 1 for `w ≥ 1/2`.
pub fn chi_prime(w: f64) -> f64 {
    let x = (w / 0.5).clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Critical points of `f_+ = −φ`; the flow contracts at `w = 3` and repels at `w = 1`.
pub const PLUS_CRITICAL_POINTS: [f64; 2] = [1.0, 3.0];

/// Shooting setup for the parametrized continuation equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub profile: CollarProfile,
    /// Fixed RK4 step in `s`.
    #[serde(default = "default_step")]
    pub step: f64,
    /// Trajectories leaving `[0, w_max]` are discarded.
    #[serde(default = "default_w_max")]
    pub w_max: f64,
    /// Neighbourhood radius for convergence to a critical point.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_step() -> f64 {
    1e-3
}
fn default_w_max() -> f64 {
    4.0
}
fn default_tolerance() -> f64 {
    1e-4
}

impl FlowSpec {
    pub fn new(profile: CollarProfile) -> Self {
        FlowSpec { profile, step: default_step(), w_max: default_w_max(), tolerance: default_tolerance() }
    }

    /// Slope checks plus `∂_s∂_w f ≥ 0` at `w = 0`, i.e. `b'` nonincreasing.
    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if !(self.step > 0.0 && self.w_max > 3.0 && self.tolerance > 0.0) {
            return Err(KitError::Argument("step and tolerance must be positive and w_max > 3".into()));
        }
        let (s0, s1) = self.profile.window;
        let n = 4000;
        let mut prev = f64::INFINITY;
        for k in 0..=n {
            let d = self.profile.b.deriv(s0 + (s1 - s0) * k as f64 / n as f64);
            if d > prev + 1e-12 {
                return Err(KitError::Structure(format!(
                    "∂_s∂_w f < 0 at w = 0 near s = {}",
                    s0 + (s1 - s0) * k as f64 / n as f64
                )));
            }
            prev = d;
        }
        Ok(())
    }

    fn velocity(&self, r: f64, s: f64, w: f64) -> f64 {
        -self.profile.b.deriv(s) * phi_prime(w) + r * self.profile.c.mean(s) * chi_prime(w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Converged { critical_point: f64, w_final: f64 },
    Exited { s: f64, w: f64 },
    Unresolved { w_final: f64 },
    Failed { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRow {
    pub r: f64,
    pub exists: bool,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftReport {
    pub r_grid: Vec<f64>,
    pub rows: Vec<OrbitRow>,
    pub smallest_r_with_solution: Option<f64>,
}

/// Integrates `dw/ds = −∂_w f_{r,s}` from `w = 1` and classifies the endpoint.
pub fn shoot(spec: &FlowSpec, r: f64) -> OrbitRow {
    let (s0, s1) = spec.profile.window;
    let steps = ((s1 - s0) / spec.step).ceil().max(1.0) as usize;
    let h = (s1 - s0) / steps as f64;
    let tail_start = steps - steps / 4;
    let mut w = 1.0;
    let mut stayed = true;
    for k in 0..steps {
        let s = s0 + h * k as f64;
        let k1 = spec.velocity(r, s, w);
        let k2 = spec.velocity(r, s + 0.5 * h, w + 0.5 * h * k1);
        let k3 = spec.velocity(r, s + 0.5 * h, w + 0.5 * h * k2);
        let k4 = spec.velocity(r, s + h, w + h * k3);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !w.is_finite() {
            return OrbitRow { r, exists: false, outcome: Outcome::Failed { message: format!("non-finite state at s = {}", s) } };
        }
        if w < 0.0 || w > spec.w_max {
            return OrbitRow { r, exists: false, outcome: Outcome::Exited { s: s + h, w } };
        }
        if k >= tail_start {
            stayed &= PLUS_CRITICAL_POINTS.iter().any(|&c| (w - c).abs() < spec.tolerance);
        }
    }
    for &c in &PLUS_CRITICAL_POINTS {
        if (w - c).abs() < spec.tolerance {
            let contracting = phi_second(c) < 0.0;
            let exists = contracting || stayed;
            let outcome = Outcome::Converged { critical_point: c, w_final: w };
            return OrbitRow { r, exists, outcome };
        }
    }
    OrbitRow { r, exists: false, outcome: Outcome::Unresolved { w_final: w } }
}

/// Shoots for every `r` on the grid.
pub fn scan_connecting_orbits(spec: &FlowSpec, r_grid: &[f64]) -> Result<DriftReport> {
    spec.validate()?;
    if r_grid.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(KitError::Argument("r-grid must lie in (0, 1]".into()));
    }
    let rows: Vec<OrbitRow> = r_grid.par_iter().map(|&r| shoot(spec, r)).collect();
    let smallest_r_with_solution = rows.iter().filter(|r| r.exists).map(|r| r.r).reduce(f64::min);
    Ok(DriftReport { r_grid: r_grid.to_vec(), rows, smallest_r_with_solution })
}

/// `r_grid = {step, 2·step, …, max}`.
pub fn uniform_r_grid(max: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| max * k as f64 / count as f64).collect()
}

/// The default small-`r` fixture: `b = −dist(s, [−1, 1])`, `c` a negative bump.
pub fn small_r_fixture() -> CollarProfile {
    CollarProfile {
        b: Profile::Tent { lo: -1.0, hi: 1.0 },
        c: Profile::bump(0.0, 1.0, -1.0),
        window: (-10.0, 14.0),
    }
}

/// [`small_r_fixture`] with `c` replaced by `−c`.
pub fn flipped_fixture() -> CollarProfile {
    let p = small_r_fixture();
    CollarProfile { c: p.c.scaled(-1.0), ..p }
}

/// A random admissible profile: a tent with a bump in its core and a mixed-sign `c`.
pub fn random_profile<R: Rng>(rng: &mut R) -> CollarProfile {
    let lo = rng.gen_range(-2.0..-0.5);
    let hi = rng.gen_range(0.5..2.0);
    let core = Profile::bump(0.5 * (lo + hi), 0.4 * (hi - lo), rng.gen_range(-0.8..0.8));
    let b = Profile::sum(vec![Profile::Tent { lo, hi }, core]);
    let terms = (0..rng.gen_range(1..4))
        .map(|_| Profile::bump(rng.gen_range(-2.0..2.0), rng.gen_range(0.3..1.0), rng.gen_range(-1.5..1.5)))
        .collect();
    CollarProfile { b, c: Profile::sum(terms), window: (-4.0, 5.0) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_c() {
        let p = CollarProfile { c: Profile::constant(0.0), ..small_r_fixture() };
        assert_eq!(drift_constant(&p).unwrap(), 0.0);
        let u = explicit_upsilon(&p, 50).unwrap();
        assert!(u.samples.iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn tent_box_constant() {
        let p = CollarProfile {
            b: Profile::Tent { lo: 0.0, hi: 0.0 },
            c: Profile::boxed(-1.0, 1.0, -1.0, 0.0),
            window: (-3.0, 3.0),
        };
        let c = drift_constant(&p).unwrap();
        let exact = -2.0 * (1.0 - (-1.0f64).exp());
        assert!((c - exact).abs() < 1e-12, "{}", c);
        assert!((c + 1.26424).abs() < 1e-5);
        let doubled = CollarProfile { c: p.c.clone().scaled(2.0), ..p.clone() };
        assert!((drift_constant(&doubled).unwrap() - 2.0 * c).abs() < 1e-12);
        let u = explicit_upsilon(&p, 601).unwrap();
        assert!(u.residual < 1e-8, "{}", u.residual);
        assert!((u.leading_coefficient - c).abs() < 1e-10);
    }

    #[test]
    fn flat_core_gives_linear_upsilon() {
        let p = CollarProfile {
            b: Profile::Tent { lo: -2.0, hi: 2.0 },
            c: Profile::boxed(0.0, 1.0, -1.0, 0.0),
            window: (-4.0, 4.0),
        };
        let u = explicit_upsilon(&p, 81).unwrap();
        for &(s, v) in &u.samples {
            if (0.0..=1.0).contains(&s) {
                assert!((v + s).abs() < 1e-12, "{} {}", s, v);
            }
            if s < 0.0 {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn window_errors() {
        let mut p = small_r_fixture();
        p.window = (-0.5, 14.0);
        assert!(matches!(explicit_upsilon(&p, 10), Err(KitError::WindowTooSmall(_))));
        let q = CollarProfile { c: Profile::bump(20.0, 1.0, -1.0), ..small_r_fixture() };
        assert!(matches!(drift_constant(&q), Err(KitError::WindowTooSmall(_))));
    }

    #[test]
    fn random_profiles_sign_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = random_profile(&mut rng);
            let c = drift_constant(&p).unwrap();
            let u = explicit_upsilon(&p, 181).unwrap();
            assert!(u.residual < 1e-8, "{}", u.residual);
            assert!(c == 0.0 || (u.leading_coefficient.signum() == c.signum()));
            assert!((u.leading_coefficient - c).abs() <= 1e-9 * c.abs().max(1.0));
        }
    }

    #[test]
    fn small_r_has_no_orbits_and_flipped_does() {
        let spec = FlowSpec::new(small_r_fixture());
        assert!(spec.profile.is_small_r_regime());
        assert!(drift_constant(&spec.profile).unwrap() < 0.0);
        let grid = uniform_r_grid(0.1, 10);
        let rep = scan_connecting_orbits(&spec, &grid).unwrap();
        assert!(rep.rows.iter().all(|r| !r.exists), "{:?}", rep);
        let flipped = FlowSpec::new(flipped_fixture());
        let rep2 = scan_connecting_orbits(&flipped, &grid).unwrap();
        assert!(rep2.smallest_r_with_solution.is_some(), "{:?}", rep2);
        assert_eq!(rep, scan_connecting_orbits(&spec, &grid).unwrap());
    }

    #[test]
    fn zero_c_flags_are_constant() {
        let spec = FlowSpec::new(CollarProfile { c: Profile::constant(0.0), ..small_r_fixture() });
        let rep = scan_connecting_orbits(&spec, &[0.1, 0.5, 1.0]).unwrap();
        assert!(rep.rows.iter().all(|r| r.exists == rep.rows[0].exists));
    }

    #[test]
    fn convexity_condition_checked() {
        let p = CollarProfile {
            b: Profile::sum(vec![Profile::Tent { lo: -1.0, hi: 1.0 }, Profile::bump(0.0, 0.5, 1.0)]),
            ..small_r_fixture()
        };
        assert!(matches!(FlowSpec::new(p).validate(), Err(KitError::Structure(_))));
        assert!(scan_connecting_orbits(&FlowSpec::new(small_r_fixture()), &[0.0]).is_err());
    }
}
