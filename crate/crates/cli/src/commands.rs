//! Subcommand implementations. Files get full precision, the console six digits.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use liouville_core::applications::{
    css_scaling_check, onsager_temperature_scan, write_scan_csv, Concentration, ScanRow, WINDOW_EPS,
};
use liouville_core::oracles::bubble_lambda_for_origin_value;
use liouville_core::shooting::Branch;
use liouville_core::variational::{solve_variational, MinimizeResult, MinimizeStatus};
use liouville_core::{
    check_identities, make_grid, mass_map, solve_app, solve_for_beta, AppReport, AppSpec, Grading,
    IdentityReport, NormalizedSolution, OracleFamily, Potential, ShootControls, VariationalControls, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{
    AppArgs, FindArgs, Method, OracleArgs, OracleKind, PlotArgs, Preset, ProblemArgs, ScanArgs, SolveArgs, TolArgs,
    VerifyArgs,
};
use crate::config::RunConfig;
use crate::numfmt::g6;
use crate::plot::{plot_svg, PlotSpec};
use crate::potential_spec::parse_potential;

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

/// What a successful command concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// The run established (or strongly indicates) that no solution exists.
    Nonexistence,
}

/// Variational disk radius when none is given.
pub const DEFAULT_DISK_RADIUS: f64 = 12.0;

pub fn shoot_controls(cfg: &RunConfig, tol: &TolArgs) -> ShootControls {
    let d = ShootControls::default();
    ShootControls {
        abs_tol: tol.abs_tol.or(cfg.abs_tol).unwrap_or(d.abs_tol),
        rel_tol: tol.rel_tol.or(cfg.rel_tol).unwrap_or(d.rel_tol),
        root_tol: tol.root_tol.or(cfg.root_tol).unwrap_or(d.root_tol),
        mass_tol: tol.mass_tol.or(cfg.mass_tol).unwrap_or(d.mass_tol),
        r_max: tol.r_max.or(cfg.r_max),
        n_nodes: tol.nodes.or(cfg.nodes).unwrap_or(d.n_nodes),
        ..d
    }
}

fn problem(cfg: &RunConfig, p: &ProblemArgs) -> Result<(f64, f64, Potential)> {
    let beta = p.beta.or(cfg.beta).context("--beta is required")?;
    let n = p.n.or(cfg.n).unwrap_or(0.0);
    let v = potential_or_default(cfg, p.potential.as_deref())?;
    Ok((beta, n, v))
}

fn potential_or_default(cfg: &RunConfig, spec: Option<&str>) -> Result<Potential> {
    match spec.or(cfg.potential.as_deref()) {
        Some(s) => Ok(parse_potential(s)?),
        None => Ok(Potential::gaussian()),
    }
}

fn bracket(lo: Option<f64>, hi: Option<f64>) -> Option<(f64, f64)> {
    lo.zip(hi)
}

fn print_identities(r: &IdentityReport) {
    say!(
        "identities: mass {}  flux {}  slope {}  pokhozhaev {}{}  P_min {}",
        g6(r.mass_residual),
        g6(r.flux_residual),
        g6(r.slope_at_infinity),
        g6(r.pokhozhaev_residual),
        if r.pokhozhaev_approximate { " (approx)" } else { "" },
        g6(r.p_min),
    );
}

fn write_solution(cfg: &RunConfig, sol: &NormalizedSolution, out: &Path) -> Result<()> {
    let path = cfg.output_path(out);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let csv = sol.write(&path)?;
    say!("wrote {} and {}", path.display(), csv.display());
    Ok(())
}

pub fn solve(cfg: &RunConfig, a: &SolveArgs) -> Result<Outcome> {
    let (beta, n, v) = problem(cfg, &a.problem)?;
    let method = match (a.method, cfg.method.as_deref()) {
        (Some(m), _) => m,
        (None, None | Some("shooting")) => Method::Shooting,
        (None, Some("variational")) => Method::Variational,
        (None, Some(other)) => bail!("unknown method `{other}` in config (shooting|variational)"),
    };
    match method {
        Method::Shooting => {
            let controls = shoot_controls(cfg, &a.tol);
            let root = solve_for_beta(&v, n, beta, bracket(a.s_lo, a.s_hi), &controls)?;
            say!(
                "shooting: beta {}  s* {}  iterations {}  r_max {}  tail {}",
                g6(root.solution.beta),
                g6(root.s_star),
                root.iterations,
                g6(root.solution.r_max()),
                g6(root.solution.tail_mass),
            );
            if root.multiple_roots_possible {
                eprintln!("warning: beta(s) is not monotone in the bracket; other roots may exist");
            }
            print_identities(&check_identities(&root.solution, &v)?);
            write_solution(cfg, &root.solution, &a.out)?;
            Ok(Outcome::Done)
        }
        Method::Variational => solve_variational_cmd(cfg, a, beta, n, &v),
    }
}

fn variational_controls(cfg: &RunConfig, a: &SolveArgs) -> VariationalControls {
    let d = VariationalControls::default();
    VariationalControls {
        grad_tol: a.grad_tol.or(cfg.grad_tol).unwrap_or(d.grad_tol),
        max_iter: a.max_iter.or(cfg.max_iter).unwrap_or(d.max_iter),
        ..d
    }
}

fn print_minimize(m: &MinimizeResult) {
    say!(
        "variational: status {:?}  energy {}  grad_norm {}  iterations {}  inner_mass {}",
        m.status,
        g6(m.energy),
        g6(m.grad_norm),
        m.iterations,
        g6(m.inner_mass),
    );
    if let Some(c) = &m.certificate {
        say!("coercivity: delta {}  epsilon {}  margin {}", g6(c.delta), g6(c.epsilon), g6(c.margin));
    }
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
}

fn solve_variational_cmd(cfg: &RunConfig, a: &SolveArgs, beta: f64, n: f64, v: &Potential) -> Result<Outcome> {
    if !(beta > 0.0) {
        bail!("the variational method needs beta > 0 (got {beta}); use --method shooting");
    }
    let r_max = a.tol.r_max.or(cfg.r_max).unwrap_or(DEFAULT_DISK_RADIUS);
    let nodes = a.tol.nodes.or(cfg.nodes).unwrap_or(2048);
    let (sol, m) = solve_variational(v, n, beta, r_max, nodes, &variational_controls(cfg, a))?;
    print_minimize(&m);
    match m.status {
        MinimizeStatus::Concentrated => {
            say!("verdict: nonexistence (mass concentrates at the origin; a solution requires n > beta - 2)");
            Ok(Outcome::Nonexistence)
        }
        MinimizeStatus::Converged | MinimizeStatus::Degenerate => {
            print_identities(&check_identities(&sol, v)?);
            write_solution(cfg, &sol, &a.out)?;
            Ok(Outcome::Done)
        }
        MinimizeStatus::MaxIter | MinimizeStatus::Stalled => {
            bail!("minimization did not converge ({:?}, grad_norm {})", m.status, g6(m.grad_norm))
        }
    }
}

/// Header of the mass-map table.
pub const MASS_MAP_HEADER: [&str; 6] = ["s", "beta", "beta_prime", "beta_prime_fd", "r_max", "status"];

pub fn s_values(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite()) {
        bail!("need s_min <= s_max and s_step > 0");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

pub fn scan(cfg: &RunConfig, a: &ScanArgs) -> Result<Outcome> {
    let n = a.n.or(cfg.n).unwrap_or(0.0);
    let v = potential_or_default(cfg, a.potential.as_deref())?;
    let mut controls = shoot_controls(cfg, &a.tol);
    if a.negative {
        controls.branch = Branch::Negative;
    }
    let s = s_values(a.s_min, a.s_max, a.s_step)?;
    let entries = mass_map(&v, n, &s, &controls)?;
    let path = cfg.output_path(&a.out);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(MASS_MAP_HEADER)?;
    let (mut lo, mut hi, mut failed) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for (si, e) in s.iter().zip(&entries) {
        match e {
            Ok(e) => {
                lo = lo.min(e.beta);
                hi = hi.max(e.beta);
                w.write_record([
                    format!("{:?}", e.s),
                    format!("{:?}", e.beta),
                    format!("{:?}", e.beta_prime),
                    e.beta_prime_fd.map(|x| format!("{x:?}")).unwrap_or_default(),
                    format!("{:?}", e.r_max),
                    "ok".into(),
                ])?;
            }
            Err(err) => {
                failed += 1;
                let status = err.to_string().replace(',', ";");
                w.write_record([format!("{si:?}"), String::new(), String::new(), String::new(), String::new(), status])?;
            }
        }
    }
    w.flush()?;
    say!(
        "scan: {} points, beta in [{}, {}], {} failed; wrote {}",
        s.len(),
        g6(lo),
        g6(hi),
        failed,
        path.display()
    );
    Ok(Outcome::Done)
}

pub fn find(cfg: &RunConfig, a: &FindArgs) -> Result<Outcome> {
    let (beta, n, v) = problem(cfg, &a.problem)?;
    let controls = shoot_controls(cfg, &a.tol);
    let root = solve_for_beta(&v, n, beta, bracket(a.s_lo, a.s_hi), &controls)?;
    say!(
        "found: s* {}  beta {}  iterations {}  r_max {}{}",
        g6(root.s_star),
        g6(root.shoot.beta_s),
        root.iterations,
        g6(root.shoot.r_max),
        if root.multiple_roots_possible { "  (other roots possible)" } else { "" },
    );
    if let Some(out) = &a.out {
        write_solution(cfg, &root.solution, out)?;
    }
    Ok(Outcome::Done)
}

pub fn verify(cfg: &RunConfig, a: &VerifyArgs) -> Result<Outcome> {
    let sol = NormalizedSolution::read(&a.file)?;
    let report = check_identities(&sol, &sol.potential)?;
    let json = serde_json::to_string_pretty(&report)?;
    say!("{json}");
    if let Some(out) = &a.out {
        let path = cfg.output_path(out);
        std::fs::write(&path, format!("{json}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Outcome::Done)
}

pub fn oracle(cfg: &RunConfig, a: &OracleArgs) -> Result<Outcome> {
    let family = match a.kind {
        OracleKind::Bubble { n_fam, lambda, psi0 } => {
            let lambda = match (lambda, psi0) {
                (Some(l), _) => l,
                (None, Some(p)) => bubble_lambda_for_origin_value(n_fam, p),
                (None, None) => 1.0,
            };
            OracleFamily::ConformalBubble { n_fam, lambda }
        }
        OracleKind::Sharp { alpha_cut } => OracleFamily::SharpRegularity { alpha_cut },
    };
    let r_max = a.r_max.or(cfg.r_max).unwrap_or(match family {
        OracleFamily::ConformalBubble { .. } => 100.0,
        OracleFamily::SharpRegularity { alpha_cut } => alpha_cut,
    });
    let nodes = a.nodes.or(cfg.nodes).unwrap_or(2048);
    let sol = family.build(&make_grid(r_max, nodes, Grading::Log)?)?;
    say!(
        "oracle: beta {}  n {}  r_max {}  mass {}",
        g6(sol.beta),
        g6(sol.n),
        g6(sol.r_max()),
        g6(sol.total_mass())
    );
    if let Some(out) = &a.out {
        write_solution(cfg, &sol, out)?;
    }
    Ok(Outcome::Done)
}

fn print_report(rep: &AppReport) {
    say!(
        "{}: beta_eq {}  n_eq {}  potential {}",
        match rep.spec {
            AppSpec::Onsager { .. } => "onsager",
            AppSpec::SphericalOnsager { .. } => "sphere",
            AppSpec::Css { .. } => "css",
        },
        g6(rep.beta_eq),
        g6(rep.n_eq),
        rep.potential.descriptor()
    );
    say!("window: {}  [{}]", rep.window.verdict, rep.window.inequality);
    if let Some(note) = &rep.window.note {
        say!("note: {note}");
    }
    if let Some(f) = &rep.failure {
        say!("boundary solve failed: {f}");
    }
    if let Some(ids) = &rep.identities {
        print_identities(ids);
    }
}

fn single_app(cfg: &RunConfig, spec: AppSpec, controls: &ShootControls, out: Option<&PathBuf>) -> Result<Outcome> {
    // Inside the window a failed solve is a numerical limitation, not a verdict.
    let rep = solve_app(&spec, controls).map_err(|e| {
        anyhow::anyhow!("solve failed inside the existence window ({}): {e}", spec.window().inequality)
    })?;
    print_report(&rep);
    match &rep.solution {
        Some(sol) => {
            say!("psi(0) {}  r_max {}", g6(sol.psi[0]), g6(sol.r_max()));
            if let Some(out) = out {
                write_solution(cfg, sol, out)?;
            }
            Ok(Outcome::Done)
        }
        None => {
            say!("verdict: nonexistence");
            Ok(Outcome::Nonexistence)
        }
    }
}

fn concentration(cfg: &RunConfig) -> Concentration {
    let d = Concentration::default();
    Concentration {
        psi0: cfg.psi0_threshold.unwrap_or(d.psi0),
        mass_inner: cfg.mass_inner_threshold.unwrap_or(d.mass_inner),
        ..d
    }
}

fn print_scan(rows: &[ScanRow]) {
    let opt = |x: Option<f64>| x.map(g6).unwrap_or_else(|| "-".into());
    say!("{:>12} {:>22} {:>12} {:>12} {:>12}", "param", "verdict", "psi0", "mass_inner", "beta_eq");
    for r in rows {
        let verdict = if r.concentrated { format!("{}-concentrated", r.verdict) } else { r.verdict.to_string() };
        say!(
            "{:>12} {:>22} {:>12} {:>12} {:>12}",
            g6(r.param),
            verdict,
            opt(r.psi0),
            opt(r.mass_inner),
            g6(r.beta_eq)
        );
        if let Some(e) = &r.error {
            say!("{:>12} {e}", "");
        }
    }
}

/// One entry of a randomized CSS window check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCase {
    pub n_int: u32,
    pub beta: f64,
    pub b: f64,
    pub verdict: Verdict,
    /// Verdict read straight off `2 n_int` versus `β − 2`.
    pub expected: Verdict,
}

/// Random CSS specs, a quarter of them placed exactly on the threshold,
/// each classified by the window logic and by the bare inequality.
pub fn css_window_sweep(count: usize, seed: u64) -> Vec<SweepCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n_int: u32 = rng.gen_range(0..=4);
            let threshold = 2.0 * n_int as f64 + 2.0;
            let beta = if rng.gen_bool(0.25) {
                threshold
            } else {
                let b: f64 = rng.gen_range(-4.0..14.0);
                if b == 0.0 { 1.0 } else { b }
            };
            let b = 10f64.powf(rng.gen_range(-1.0..2.0));
            let verdict = AppSpec::Css { n_int, beta, b }.window().verdict;
            let gap = 2.0 * n_int as f64 - (beta - 2.0);
            let expected = if gap.abs() <= WINDOW_EPS {
                Verdict::Boundary
            } else if gap > 0.0 {
                Verdict::Inside
            } else {
                Verdict::Outside
            };
            SweepCase { n_int, beta, b, verdict, expected }
        })
        .collect()
}

pub fn app(cfg: &RunConfig, a: &AppArgs) -> Result<Outcome> {
    let controls = shoot_controls(cfg, &a.tol);
    match &a.preset {
        Preset::Onsager { n, gamma, alpha, beta_stat, csv } => {
            if beta_stat.len() == 1 && csv.is_none() {
                let spec = AppSpec::Onsager { n: *n, gamma: *gamma, alpha_exp: *alpha, beta_stat: beta_stat[0] };
                return single_app(cfg, spec, &controls, a.out.as_ref());
            }
            let rows = onsager_temperature_scan(*n, *gamma, *alpha, beta_stat, &controls, &concentration(cfg))?;
            print_scan(&rows);
            if let Some(csv) = csv {
                let path = cfg.output_path(csv);
                write_scan_csv(&rows, &path)?;
                say!("wrote {}", path.display());
            }
            Ok(Outcome::Done)
        }
        Preset::Sphere { n, l, gamma, beta } => {
            let spec = AppSpec::SphericalOnsager { n: *n, l: *l, gamma: *gamma, beta: *beta };
            single_app(cfg, spec, &controls, a.out.as_ref())
        }
        Preset::Css { n_int, beta, b, b2, sweep, seed } => {
            if let Some(count) = sweep {
                let seed = seed.or(cfg.seed).unwrap_or(0);
                let cases = css_window_sweep(*count, seed);
                let mut mismatches = 0;
                for c in &cases {
                    let ok = c.verdict == c.expected;
                    mismatches += usize::from(!ok);
                    say!(
                        "n_int {}  beta {}  B {}  verdict {}  inequality {}{}",
                        c.n_int,
                        g6(c.beta),
                        g6(c.b),
                        c.verdict,
                        c.expected,
                        if ok { "" } else { "  MISMATCH" }
                    );
                }
                if mismatches > 0 {
                    bail!("{mismatches} of {} window verdicts disagree with the inequality", cases.len());
                }
                say!("sweep: {} specs, all verdicts match (seed {seed})", cases.len());
                return Ok(Outcome::Done);
            }
            let beta = beta.context("--beta is required")?;
            if let Some(b2) = b2 {
                let s = css_scaling_check(*n_int, beta, *b, *b2, &controls)?;
                say!(
                    "css scaling: B {} -> {}  deviation {} at r {}  strong-field limit {:?}",
                    g6(*b),
                    g6(*b2),
                    g6(s.deviation),
                    g6(s.at_r),
                    s.limit
                );
                return Ok(Outcome::Done);
            }
            single_app(cfg, AppSpec::Css { n_int: *n_int, beta, b: *b }, &controls, a.out.as_ref())
        }
    }
}

pub fn plot(cfg: &RunConfig, a: &PlotArgs) -> Result<Outcome> {
    let spec = PlotSpec { x: a.x.clone(), columns: a.columns.clone(), log_x: a.log_x, title: a.title.clone() };
    let out = cfg.output_path(&a.out);
    plot_svg(&a.csv, &spec, &out)?;
    say!("wrote {}", out.display());
    Ok(Outcome::Done)
}
