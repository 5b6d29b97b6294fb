//! Subcommand dispatch for the `kit` binary.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use kit_core::ainfty::{diagonal_bimodule, dual_diagonal_bimodule, find_cohomological_unit};
use kit_core::cc2::{total_complex, TotalInput};
use kit_core::homology::{homology, is_acyclic};
use kit_core::io;
use kit_core::morse_lab::{drift_constant, explicit_upsilon, scan_connecting_orbits, uniform_r_grid, Outcome};
use kit_core::sign_lab::{sweep, symmetry_report, Mutation, SweepBounds};
use kit_core::strip_lab::{discrete_q_spectrum, gamma_pde, gamma_quadrature, q_spectrum, spectrum_convergence};
use kit_core::{KitError, StripOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kit", version, about = "Verification kit for curved A∞ algebra, strip operators and a Morse toy model")]
pub struct Cli {
    /// Worker threads (overrides KIT_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Associativity, diagonal bimodule validity and unit search for a structure file.
    Check(CheckArgs),
    /// Closedness, null-homotopy equation and per-pair acyclicity of a total bundle.
    Total(TotalArgs),
    /// Exhaustive sign-ledger sweep.
    Signs(SignsArgs),
    /// Γ of a strip problem, with the quadrature oracle when it applies.
    Gamma(GammaArgs),
    /// Drift constant and connecting-orbit scan of a flow spec.
    Morse(MorseArgs),
    /// Integer homology of a cochain complex file.
    Homology(HomologyArgs),
    /// Analytic and discrete spectrum of `i∂_t + α`.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub structure: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub max_arity: usize,
    /// Replace the truncation order of the file.
    #[arg(long)]
    pub trunc: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TotalArgs {
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub max_arity: usize,
}

#[derive(Debug, Args)]
pub struct SignsArgs {
    #[arg(long, default_value_t = 3)]
    pub max_kl: i64,
    #[arg(long, default_value_t = 3)]
    pub max_j: i64,
    #[arg(long, default_value_t = 3)]
    pub max_n: i64,
    #[arg(long, default_value_t = 3)]
    pub max_degree: i64,
    /// Also report the (k,l)-swap comparison up to this bound.
    #[arg(long)]
    pub symmetry: Option<i64>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    pub strip: PathBuf,
    /// Number of grid levels.
    #[arg(long, default_value_t = 3)]
    pub refine: usize,
    /// Enlarge the window by this fraction of its length.
    #[arg(long, default_value_t = 0.0)]
    pub window_margin: f64,
    /// Allowed deviation of b from its limits at the window edges.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct MorseArgs {
    pub spec: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub r_max: f64,
    #[arg(long, default_value_t = 10)]
    pub r_count: usize,
}

#[derive(Debug, Args)]
pub struct HomologyArgs {
    pub complex: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0 / 400.0)]
    pub h_t: f64,
    #[arg(long, default_value_t = 2)]
    pub m_max: i64,
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: &'static str,
    pub status: &'static str,
    pub report: Value,
    pub meta: Value,
}

/// Outcome of one subcommand before serialization.
pub struct CommandOutcome {
    pub passed: bool,
    pub report: Value,
    pub summary: String,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn is_input_error(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<std::io::Error>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<KitError>(),
        Some(KitError::Parse(_) | KitError::Structure(_) | KitError::Argument(_) | KitError::WindowTooSmall(_))
    )
}

fn cmd_check(a: &CheckArgs) -> Result<CommandOutcome> {
    let text = read(&a.structure)?;
    let alg = match a.trunc {
        Some(n) => {
            let mut f: io::StructureFile = serde_json::from_str(&text).map_err(|e| KitError::Parse(e.to_string()))?;
            f.trunc_order = n;
            f.to_ainfty()?
        }
        None => io::parse_structure(&text)?,
    };
    let assoc = alg.check_associativity(a.max_arity)?;
    let (diag, dual) = if assoc.is_empty() {
        (
            diagonal_bimodule(&alg).check(&alg, a.max_arity)?,
            dual_diagonal_bimodule(&alg).check(&alg, a.max_arity)?,
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let units = if assoc.is_empty() && !alg.is_curved() {
        find_cohomological_unit(&alg.reduce_q0())?
            .into_iter()
            .map(|u| {
                let rep = u.unit.map(|v| {
                    v.into_iter().map(|(g, c)| (alg.space.gen_label(g), c.to_string())).collect::<Vec<_>>()
                });
                json!({ "object": u.object, "unit": rep })
            })
            .collect()
    } else {
        Vec::new()
    };
    let passed = assoc.is_empty() && diag.is_empty() && dual.is_empty();
    let summary = format!(
        "associativity violations: {}\ndiagonal violations: {}\ndual diagonal violations: {}\n",
        assoc.len(),
        diag.len(),
        dual.len()
    );
    Ok(CommandOutcome {
        passed,
        report: json!({
            "max_arity": a.max_arity,
            "trunc_order": alg.trunc,
            "associativity": value(&assoc)?,
            "diagonal": value(&diag)?,
            "dual_diagonal": value(&dual)?,
            "units": units,
        }),
        summary,
    })
}

fn cmd_total(a: &TotalArgs) -> Result<CommandOutcome> {
    let data = io::parse_total(&read(&a.bundle)?)?;
    let input = TotalInput {
        a: &data.a,
        b: &data.b,
        functor: &data.functor,
        delta: &data.delta,
        h: &data.h,
        max_arity: a.max_arity,
    };
    let (_, rep) = total_complex(&input)?;
    let mut report = value(&rep)?;
    let pairs = rep
        .pairs
        .iter()
        .map(|p| Ok(json!({ "pair": p.pair, "acyclic": p.acyclic, "homology": value(&io::homology_report(&p.homology)?)? })))
        .collect::<Result<Vec<_>>>()?;
    report["pairs"] = Value::Array(pairs);
    let mut failing = Vec::new();
    for (ok, name) in [
        (rep.delta_closed, "delta"),
        (rep.rho_closed, "rho"),
        (rep.h_equation, "h"),
        (rep.bimodule_valid, "bimodule"),
        (rep.acyclic(), "acyclicity"),
    ] {
        if !ok {
            failing.push(name);
        }
    }
    report["failing"] = value(&failing)?;
    let summary = if failing.is_empty() {
        "total bimodule valid and acyclic\n".to_string()
    } else {
        format!("failing: {}\n", failing.join(", "))
    };
    Ok(CommandOutcome { passed: rep.passed(), report, summary })
}

fn cmd_signs(a: &SignsArgs) -> Result<CommandOutcome> {
    if [a.max_kl, a.max_j, a.max_n, a.max_degree].iter().any(|&x| !(0..=6).contains(&x)) {
        return Err(KitError::Argument("sweep bounds must lie in 0..=6".into()).into());
    }
    let bounds = SweepBounds { max_kl: a.max_kl, max_j: a.max_j, max_n: a.max_n, max_degree: a.max_degree };
    let rep = sweep(bounds, Mutation::None);
    let mut report = value(&rep)?;
    if let Some(m) = a.symmetry {
        report["symmetry"] = value(&symmetry_report(m))?;
    }
    let summary = format!(
        "checked: {}\nfailed: {}\nremainder dependencies: {}\n",
        rep.checked, rep.failed, rep.remainder_dependencies
    );
    Ok(CommandOutcome { passed: rep.passed(), report, summary })
}

fn cmd_gamma(a: &GammaArgs) -> Result<CommandOutcome> {
    let mut p = io::parse_strip(&read(&a.strip)?)?;
    if a.window_margin > 0.0 {
        p = p.enlarged(a.window_margin);
    }
    let opts = StripOptions { tail_tolerance: a.tolerance, levels: a.refine };
    let g = gamma_pde(&p, &opts)?;
    let oracle = if p.b.is_t_independent() && p.c.is_t_independent() {
        Some(gamma_quadrature(&p.b, &p.c)?)
    } else {
        None
    };
    let rel = oracle.map(|q| (g.gamma - q).abs() / q.abs().max(1e-300));
    let mut report = value(&g)?;
    report["quadrature"] = value(&oracle)?;
    report["relative_error"] = value(&rel)?;
    let summary = match oracle {
        Some(q) => format!("gamma: {:.12e}\nquadrature: {:.12e}\n", g.gamma, q),
        None => format!("gamma: {:.12e}\n", g.gamma),
    };
    Ok(CommandOutcome { passed: g.sign_stable, report, summary })
}

fn cmd_morse(a: &MorseArgs) -> Result<CommandOutcome> {
    let spec = io::parse_flow(&read(&a.spec)?)?;
    let c = drift_constant(&spec.profile)?;
    let u = explicit_upsilon(&spec.profile, 201)?;
    let grid = uniform_r_grid(a.r_max, a.r_count);
    let rep = scan_connecting_orbits(&spec, &grid)?;
    let small_r = spec.profile.is_small_r_regime();
    let mut table = format!("drift constant C = {:.9}\n{:>8}  {:>6}  outcome\n", c, "r", "orbit");
    for row in &rep.rows {
        let what = match &row.outcome {
            Outcome::Converged { critical_point, .. } => format!("converged to w = {}", critical_point),
            Outcome::Exited { s, w } => format!("left [0, w_max] at s = {:.3} (w = {:.3})", s, w),
            Outcome::Unresolved { w_final } => format!("unresolved, w = {:.6}", w_final),
            Outcome::Failed { message } => format!("failed: {}", message),
        };
        table.push_str(&format!("{:>8.4}  {:>6}  {}\n", row.r, if row.exists { "yes" } else { "no" }, what));
    }
    let passed = u.residual < 1e-8 && (!small_r || rep.smallest_r_with_solution.is_none());
    Ok(CommandOutcome {
        passed,
        report: json!({
            "drift_constant": c,
            "small_r_regime": small_r,
            "upsilon": { "residual": u.residual, "kappa": u.kappa, "leading_coefficient": u.leading_coefficient },
            "scan": value(&rep)?,
        }),
        summary: table,
    })
}

fn cmd_homology(a: &HomologyArgs) -> Result<CommandOutcome> {
    let c = io::parse_complex(&read(&a.complex)?)?;
    let h = homology(&c);
    let report = json!({ "acyclic": is_acyclic(&c), "homology": value(&io::homology_report(&h)?)? });
    let mut summary = String::new();
    for (d, g) in &h {
        summary.push_str(&format!("H^{}: rank {}, torsion {:?}\n", d, g.betti, g.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>()));
    }
    Ok(CommandOutcome { passed: true, report, summary })
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<CommandOutcome> {
    if a.m_max < 0 {
        return Err(KitError::Argument("m_max must be nonnegative".into()).into());
    }
    let ms: Vec<i64> = (-a.m_max..=a.m_max).collect();
    let exact = q_spectrum(a.alpha, ms.iter().copied())?;
    let discrete = discrete_q_spectrum(a.alpha, a.h_t, ms.iter().copied())?;
    let conv = spectrum_convergence(a.alpha, a.h_t, &ms)?;
    let max_err = ms
        .iter()
        .map(|&m| (exact.eigenvalue(m).unwrap_or(0.0) - discrete.eigenvalue(m).unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    let min_order = conv.iter().map(|r| r.order).fold(f64::INFINITY, f64::min);
    let mut summary = String::new();
    for &m in &ms {
        summary.push_str(&format!(
            "m = {:>3}: exact {:.9}, discrete {:.9}\n",
            m,
            exact.eigenvalue(m).unwrap_or(f64::NAN),
            discrete.eigenvalue(m).unwrap_or(f64::NAN)
        ));
    }
    Ok(CommandOutcome {
        passed: max_err < 1e-3 && (conv.is_empty() || min_order >= 1.9),
        report: json!({
            "analytic": value(&exact)?,
            "discrete": value(&discrete)?,
            "convergence": value(&conv)?,
            "max_error": max_err,
        }),
        summary,
    })
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("KIT_THREADS").ok().and_then(|v| v.trim().parse().ok())).filter(|&n| n > 0)
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Check(_) => "check",
        Command::Total(_) => "total",
        Command::Signs(_) => "signs",
        Command::Gamma(_) => "gamma",
        Command::Morse(_) => "morse",
        Command::Homology(_) => "homology",
        Command::Spectrum(_) => "spectrum",
    }
}

fn dispatch(c: &Command) -> Result<CommandOutcome> {
    match c {
        Command::Check(a) => cmd_check(a),
        Command::Total(a) => cmd_total(a),
        Command::Signs(a) => cmd_signs(a),
        Command::Gamma(a) => cmd_gamma(a),
        Command::Morse(a) => cmd_morse(a),
        Command::Homology(a) => cmd_homology(a),
        Command::Spectrum(a) => cmd_spectrum(a),
    }
}

/// Runs a parsed command; returns the exit code and the envelope that was emitted, if any.
pub fn run(cli: &Cli) -> (i32, Option<Envelope>) {
    let threads = thread_count(cli.threads);
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        b.build()
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {}", e);
            return (EXIT_INPUT, None);
        }
    };
    let command = name(&cli.command);
    let result = pool.install(|| dispatch(&cli.command));
    match result {
        Ok(out) => {
            let env = Envelope {
                command,
                status: if out.passed { "pass" } else { "fail" },
                report: out.report,
                meta: json!({ "kit_version": env!("CARGO_PKG_VERSION"), "threads": pool.current_num_threads() }),
            };
            eprint!("{}", out.summary);
            if let Err(e) = emit(&env, cli.output.as_deref()) {
                eprintln!("error: {:#}", e);
                return (EXIT_INPUT, Some(env));
            }
            (if out.passed { EXIT_PASS } else { EXIT_FAIL }, Some(env))
        }
        Err(e) => {
            eprintln!("error: {:#}", e);
            (if is_input_error(&e) { EXIT_INPUT } else { EXIT_FAIL }, None)
        }
    }
}

fn emit(env: &Envelope, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(env)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{}", text),
    }
    Ok(())
}
