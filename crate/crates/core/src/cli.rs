//! Command-line front end: `check`, `trees`, `audit` and `run <study>`.
//!
//! Exit codes: 0 on success, 1 for configuration and domain errors
//! (including unknown flags), 2 for numerical failures and I/O errors.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{
    circle_evolution, drift_order_study, fixed_point_rate_study, iteration_sweep, long_time_trajectory,
    strong_order_study, CircleConfig, GridConfig, KuboSweepParams, Method, MonteCarlo, StudyResult, SweepAxis,
};
use crate::integrator::{IterationPolicy, JacobianMode};
use crate::problems::Problem;
use crate::tableau::{builtin_tableau, Tableau, DEFAULT_TOL};
use crate::trees::{enumerate_trees, first_violation, format_order2, qi_order_from_table, render_residuals, residual_table, TableFormat};

#[derive(Debug, Parser)]
#[command(name = "srkqi", version, about = "Stochastic Runge-Kutta methods and quadratic invariants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Defect matrices, exact-conservation, explicitness and order-1 verdicts.
    Check(CheckArgs),
    /// List colored rooted trees up to a maximum order.
    Trees(TreesArgs),
    /// Pairwise QI-condition residuals and the resulting preservation order.
    Audit(AuditArgs),
    /// Run a seeded study and write CSV.
    Run {
        #[command(subcommand)]
        study: Study,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Built-in name (scheme_2_1, scheme_2_2, midpoint) or a tableau file.
    #[arg(long)]
    pub scheme: String,
    /// Tolerance for the conservation and order-1 checks.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => TableFormat::Text,
            Format::Csv => TableFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct TreesArgs {
    /// Largest tree order, a multiple of 0.5.
    #[arg(long, default_value = "2.5")]
    pub max_order: String,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Built-in name or a tableau file.
    #[arg(long)]
    pub scheme: String,
    /// Largest order sum of the pairs examined, a multiple of 0.5.
    #[arg(long, default_value = "3")]
    pub max_order: String,
    /// Residuals with absolute value at most this count as zero.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// List only residuals above the tolerance.
    #[arg(long)]
    pub nonzero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    /// Explicit sweep for explicit tableaux, Newton otherwise.
    Auto,
    Explicit,
    FixedPoint,
    Newton,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum JacobianArg {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub policy: PolicyKind,
    /// Fixed number of stage iterations per step.
    #[arg(long, conflicts_with = "tol")]
    pub iters: Option<usize>,
    /// Stop iterating once the stage update norm is at most this [default: 1e-13 when --iters is absent].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Wiener truncation parameter for implicit iterations.
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Use raw Wiener increments in implicit iterations.
    #[arg(long)]
    pub no_truncation: bool,
    #[arg(long, default_value_t = 50)]
    pub max_iterations: usize,
    /// Newton Jacobians.
    #[arg(long, value_enum, default_value = "analytic")]
    pub jacobian: JacobianArg,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 200)]
    pub paths: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads [default: machine parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridStudyArgs {
    #[arg(long, default_value = "scheme_2_1")]
    pub scheme: String,
    /// kubo or cubic-hamiltonian.
    #[arg(long, default_value = "kubo")]
    pub problem: String,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_end: f64,
    /// Dyadic range `2^-4:2^-9` or a comma list.
    #[arg(long, default_value = "2^-4:2^-9")]
    pub h_grid: String,
    /// Initial state as a comma list.
    #[arg(long, default_value = "0,1")]
    pub y0: String,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct LongTimeArgs {
    /// Tableau name or file, or `milstein` (Kubo only).
    #[arg(long, default_value = "midpoint")]
    pub scheme: String,
    #[arg(long, default_value = "kubo")]
    pub problem: String,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long = "T", default_value_t = 500.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    #[arg(long, default_value = "0,1")]
    pub y0: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Parameter varied: N, h or T.
    #[arg(long, default_value = "N")]
    pub axis: String,
    /// Comma list or integer range `1:10`.
    #[arg(long, default_value = "1:10")]
    pub values: String,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 800.0)]
    pub t_end: f64,
    /// Fixed-point iterations per step when N is not the axis.
    #[arg(long, default_value_t = 2)]
    pub iters: usize,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value = "1,0")]
    pub y0: String,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Fixed-point iterations per step.
    #[arg(long, default_value_t = 4)]
    pub iters: usize,
    #[arg(long, default_value = "0.01,0.02,0.04,0.08")]
    pub h_grid: String,
    #[arg(long = "T", default_value_t = 400.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value = "1,0")]
    pub y0: String,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CircleArgs {
    #[arg(long, default_value = "midpoint")]
    pub scheme: String,
    #[arg(long, default_value = "cubic-hamiltonian")]
    pub problem: String,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.001)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 256)]
    pub points: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Subcommand)]
pub enum Study {
    /// Invariant drift |I(y_T) - I(y_0)| per h with a log-log fit.
    /// Columns: h, mean_drift, max_drift.
    DriftOrder(GridStudyArgs),
    /// RMS error against the exact Kubo flow per h (Kubo only).
    /// Columns: h, rms_error, max_error.
    StrongOrder(GridStudyArgs),
    /// One trajectory with the invariant at every step.
    /// Columns: n, t, y_1..y_d, invariant, drift.
    LongTime(LongTimeArgs),
    /// Midpoint fixed-point sweep over N, h or T on Kubo.
    /// Columns: value, mean_log_drift, log_mean_drift, max_drift.
    IterationSweep(SweepArgs),
    /// Drift against sqrt(h|ln h|) for a fixed iteration count, with the a priori bound.
    /// Columns: h, sqrt_h_log_h, mean_drift, max_drift, delta, bound.
    Rate(RateArgs),
    /// Unit circle transported by one path; shoelace area of the image.
    /// Columns: index, p0, q0, p, q.
    Circle(CircleArgs),
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidTableau(_)
        | Error::UnknownTableau { .. }
        | Error::Parse { .. }
        | Error::Dimension(_)
        | Error::Domain(_)
        | Error::TreeCap { .. }
        | Error::Config(_) => 1,
        _ => 2,
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Check(a) => emit(&check_report(a)?, None),
        Command::Trees(a) => emit(&trees_report(a)?, None),
        Command::Audit(a) => emit(&audit_report(a)?, None),
        Command::Run { study } => {
            let (result, out) = run_study(study)?;
            emit(&result.to_csv(), out)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// A built-in name, or else a path to a tableau file.
pub fn resolve_scheme(spec: &str) -> Result<Tableau> {
    match builtin_tableau(spec) {
        Ok(t) => Ok(t),
        Err(unknown) => {
            let path = Path::new(spec);
            if !path.is_file() {
                return Err(unknown);
            }
            let text = std::fs::read_to_string(path)?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
            Ok(Tableau::parse(&text)?.with_name(name))
        }
    }
}

/// `2.5` → 5; rejects values that are not multiples of 0.5.
pub fn parse_half_integer(s: &str) -> Result<u32> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{s}` is not a number")))?;
    let doubled = 2.0 * v;
    if !(doubled >= 0.0) || doubled.fract() != 0.0 || doubled > 1000.0 {
        return Err(Error::Config(format!("order `{s}` must be a nonnegative multiple of 0.5")));
    }
    Ok(doubled as u32)
}

/// A number, or `2^e` for a power of two.
fn parse_scalar(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp
            .parse()
            .map_err(|_| Error::Config(format!("bad exponent in `{s}`")))?;
        return Ok(2f64.powi(e));
    }
    s.parse().map_err(|_| Error::Config(format!("`{s}` is not a number")))
}

/// `2^-4:2^-9` (every power between, inclusive) or a comma list.
pub fn parse_h_grid(s: &str) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = s.split_once(':') {
        let exp = |t: &str| -> Result<i32> {
            t.trim()
                .strip_prefix("2^")
                .and_then(|e| e.parse().ok())
                .ok_or_else(|| Error::Config(format!("dyadic range endpoints must look like 2^-4, got `{t}`")))
        };
        let (a, b) = (exp(lo)?, exp(hi)?);
        let step = if b >= a { 1 } else { -1 };
        let mut out = Vec::new();
        let mut e = a;
        loop {
            out.push(2f64.powi(e));
            if e == b {
                break;
            }
            e += step;
        }
        return Ok(out);
    }
    parse_list(s)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split(',').map(parse_scalar).collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::Config("empty list".into()));
    }
    Ok(v)
}

/// Comma list, or an integer range `a:b`.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = s.split_once(':') {
        let int = |t: &str| -> Result<i64> {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("range endpoints must be integers, got `{t}`")))
        };
        let (a, b) = (int(lo)?, int(hi)?);
        if b < a {
            return Err(Error::Config(format!("empty range {s}")));
        }
        return Ok((a..=b).map(|v| v as f64).collect());
    }
    parse_list(s)
}

fn build_policy(args: &PolicyArgs, tab: &Tableau) -> Result<IterationPolicy> {
    let kind = match args.policy {
        PolicyKind::Auto if tab.is_explicit() => PolicyKind::Explicit,
        PolicyKind::Auto => PolicyKind::Newton,
        k => k,
    };
    let mut policy = match kind {
        PolicyKind::Explicit => {
            if args.iters.is_some() || args.tol.is_some() {
                return Err(Error::Config("--iters and --tol do not apply to the explicit policy".into()));
            }
            return Ok(IterationPolicy::explicit());
        }
        PolicyKind::FixedPoint => match args.iters {
            Some(n) => IterationPolicy::fixed_point(n),
            None => IterationPolicy::fixed_point_tol(args.tol.unwrap_or(1e-13)),
        },
        _ => match args.iters {
            Some(n) => IterationPolicy::newton(n),
            None => IterationPolicy::newton_tol(args.tol.unwrap_or(1e-13)),
        },
    };
    policy = policy
        .with_max_iterations(args.max_iterations)
        .with_truncation(if args.no_truncation { None } else { Some(args.k) })
        .with_jacobian_mode(match args.jacobian {
            JacobianArg::Analytic => JacobianMode::Analytic,
            JacobianArg::FiniteDifference => JacobianMode::FiniteDifference,
        });
    policy.validate()?;
    Ok(policy)
}

fn check_report(args: &CheckArgs) -> Result<String> {
    let tab = resolve_scheme(&args.scheme)?;
    let d = tab.defect_matrices();
    let mut out = String::new();
    out.push_str(&format!("scheme={}\nstages={}\ntol={:e}\n", tab.name(), tab.stages(), args.tol));
    out.push_str(&format!("defect_max_abs={:e}\n", d.max_abs));
    out.push_str(&format!("conservative={}\n", tab.is_exactly_conservative(args.tol)));
    out.push_str(&format!("explicit={}\n", tab.is_explicit()));
    out.push_str(&format!("order1={}\n", tab.satisfies_order_one(args.tol)));
    for (label, m) in [("M0", &d.m0), ("M1", &d.m1), ("MSTAR", &d.mstar)] {
        out.push_str(&format!("{label}:\n"));
        for row in m.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6}")).collect();
            out.push_str(&format!("  {}\n", cells.join(" ")));
        }
    }
    Ok(out)
}

fn trees_report(args: &TreesArgs) -> Result<String> {
    let max2 = parse_half_integer(&args.max_order)?;
    let sets = enumerate_trees(max2)?;
    let mut out = format!("# max_order={}\n", format_order2(max2));
    match args.format {
        Format::Csv => {
            out.push_str("root_color,order,tree\n");
            for (color, set) in [(0, &sets.gamma0), (1, &sets.gamma1)] {
                for t in set {
                    out.push_str(&format!("{color},{},\"{t}\"\n", format_order2(t.order2())));
                }
            }
        }
        Format::Text => {
            for (label, set) in [("gamma0", &sets.gamma0), ("gamma1", &sets.gamma1)] {
                out.push_str(&format!("{label}: {} trees\n", set.len()));
                for t in set {
                    out.push_str(&format!("  {:>4}  {t}\n", format_order2(t.order2())));
                }
            }
        }
    }
    Ok(out)
}

fn audit_report(args: &AuditArgs) -> Result<String> {
    let tab = resolve_scheme(&args.scheme)?;
    let max2 = parse_half_integer(&args.max_order)?;
    let table = residual_table(&tab, max2)?;
    let cap = max2.saturating_sub(1);
    let order = qi_order_from_table(&table, cap, args.tol);
    let shown: Vec<_> = if args.nonzero {
        table.iter().filter(|r| !(r.value.abs() <= args.tol)).cloned().collect()
    } else {
        table.clone()
    };
    let mut out = format!(
        "# scheme={}\n# max_order_sum={}\n# tol={:e}\n",
        tab.name(),
        format_order2(max2),
        args.tol
    );
    out.push_str(&render_residuals(&shown, args.format.into()));
    match first_violation(&table, args.tol) {
        Some(r) => out.push_str(&format!(
            "# qi_order={}\n# first_nonzero: order_sum={} {} {} {} value={:e}\n",
            format_order2(order),
            format_order2(r.order2_sum),
            r.family.label(),
            r.left,
            r.right,
            r.value
        )),
        None => out.push_str(&format!(
            "# qi_order={} (capped: no residual above tol up to order sum {})\n",
            format_order2(order),
            format_order2(max2)
        )),
    }
    Ok(out)
}

fn echo_extra(result: &mut StudyResult, extra: &[(&str, String)]) {
    for (k, v) in extra {
        result.config.push((k.to_string(), v.clone()));
    }
}

fn monte_carlo(args: &MonteCarloArgs) -> MonteCarlo {
    MonteCarlo::new(args.paths, args.seed).with_workers(args.workers)
}

fn workers_label(w: Option<usize>) -> String {
    w.map_or("auto".into(), |w| w.to_string())
}

fn run_study(study: &Study) -> Result<(StudyResult, Option<&Path>)> {
    match study {
        Study::DriftOrder(a) | Study::StrongOrder(a) => {
            let strong = matches!(study, Study::StrongOrder(_));
            let tab = resolve_scheme(&a.scheme)?;
            let problem = Problem::from_name(&a.problem, a.a, a.sigma)?;
            if strong && !matches!(problem, Problem::Kubo { .. }) {
                return Err(Error::Config(format!(
                    "strong-order needs an exact solution; only kubo has one, got `{}`",
                    a.problem
                )));
            }
            let policy = build_policy(&a.policy, &tab)?;
            let cfg = GridConfig {
                t_end: a.t_end,
                h_list: parse_h_grid(&a.h_grid)?,
                y0: parse_list(&a.y0)?,
            };
            let mc = monte_carlo(&a.mc);
            let mut result = if strong {
                strong_order_study(&tab, a.a, a.sigma, &cfg, &policy, &mc)?
            } else {
                let sys = problem.system();
                let c = sys
                    .invariants()
                    .first()
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("problem `{}` has no quadratic invariant", a.problem)))?;
                let mut r = drift_order_study(&tab, sys.as_ref(), &c, &cfg, &policy, &mc)?;
                r.config.insert(2, ("a".into(), a.a.to_string()));
                r.config.insert(3, ("sigma".into(), a.sigma.to_string()));
                r
            };
            echo_extra(&mut result, &[("workers", workers_label(a.mc.workers))]);
            Ok((result, a.out.out.as_deref()))
        }
        Study::LongTime(a) => {
            let problem = Problem::from_name(&a.problem, a.a, a.sigma)?;
            let sys = problem.system();
            let method = if a.scheme.eq_ignore_ascii_case("milstein") {
                if !matches!(problem, Problem::Kubo { .. }) {
                    return Err(Error::Config("the Milstein comparator is defined for kubo only".into()));
                }
                Method::KuboMilstein { a: a.a, sigma: a.sigma }
            } else {
                let tableau = resolve_scheme(&a.scheme)?;
                let policy = build_policy(&a.policy, &tableau)?;
                Method::Srk { tableau, policy }
            };
            let y0 = parse_list(&a.y0)?;
            let mut result = long_time_trajectory(&method, sys.as_ref(), &y0, a.t_end, a.h, a.seed)?;
            if matches!(method, Method::Srk { .. }) {
                echo_extra(&mut result, &[("a", a.a.to_string()), ("sigma", a.sigma.to_string())]);
            }
            Ok((result, a.out.out.as_deref()))
        }
        Study::IterationSweep(a) => {
            let axis: SweepAxis = a.axis.parse()?;
            let base = KuboSweepParams {
                a: a.a,
                sigma: a.sigma,
                h: a.h,
                t_end: a.t_end,
                iterations: a.iters,
                k: a.k,
                y0: parse_list(&a.y0)?,
            };
            let mut result = iteration_sweep(axis, &parse_values(&a.values)?, &base, &monte_carlo(&a.mc))?;
            echo_extra(&mut result, &[("workers", workers_label(a.mc.workers))]);
            Ok((result, a.out.out.as_deref()))
        }
        Study::Rate(a) => {
            let base = KuboSweepParams {
                a: a.a,
                sigma: a.sigma,
                h: 0.05,
                t_end: a.t_end,
                iterations: a.iters,
                k: a.k,
                y0: parse_list(&a.y0)?,
            };
            let mut result = fixed_point_rate_study(&base, &parse_h_grid(&a.h_grid)?, &monte_carlo(&a.mc))?;
            echo_extra(&mut result, &[("workers", workers_label(a.mc.workers))]);
            Ok((result, a.out.out.as_deref()))
        }
        Study::Circle(a) => {
            let tab = resolve_scheme(&a.scheme)?;
            let problem = Problem::from_name(&a.problem, a.a, a.sigma)?;
            let policy = build_policy(&a.policy, &tab)?;
            let cfg = CircleConfig {
                n_points: a.points,
                h: a.h,
                t_end: a.t_end,
                seed: a.seed,
                workers: a.workers,
            };
            let sys = problem.system();
            let result = circle_evolution(&tab, sys.as_ref(), &policy, &cfg)?;
            Ok((result, a.out.out.as_deref()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn h_grid_forms() {
        let g = parse_h_grid("2^-4:2^-9").unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], 0.0625);
        assert_eq!(g[5], 2f64.powi(-9));
        assert_eq!(parse_h_grid("0.01,0.02").unwrap(), vec![0.01, 0.02]);
        assert_eq!(parse_h_grid("2^-1").unwrap(), vec![0.5]);
        assert!(parse_h_grid("0.1:0.2").is_err());
        assert!(parse_h_grid("a,b").is_err());
    }

    #[test]
    fn value_ranges() {
        assert_eq!(parse_values("1:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_values("10,20").unwrap(), vec![10.0, 20.0]);
        assert!(parse_values("3:1").is_err());
    }

    #[test]
    fn half_integers() {
        assert_eq!(parse_half_integer("2.5").unwrap(), 5);
        assert_eq!(parse_half_integer("3").unwrap(), 6);
        assert!(parse_half_integer("2.25").is_err());
        assert!(parse_half_integer("-1").is_err());
    }

    #[test]
    fn policy_resolution() {
        let args = |policy, iters, tol| PolicyArgs {
            policy,
            iters,
            tol,
            k: 2,
            no_truncation: false,
            max_iterations: 50,
            jacobian: JacobianArg::Analytic,
        };
        let mid = builtin_tableau("midpoint").unwrap();
        let s21 = builtin_tableau("scheme_2_1").unwrap();
        assert_eq!(build_policy(&args(PolicyKind::Auto, None, None), &s21).unwrap(), IterationPolicy::explicit());
        let p = build_policy(&args(PolicyKind::Auto, None, None), &mid).unwrap();
        assert_eq!(p, IterationPolicy::newton_tol(1e-13));
        let p = build_policy(&args(PolicyKind::FixedPoint, Some(3), None), &mid).unwrap();
        assert_eq!(p, IterationPolicy::fixed_point(3));
        assert!(build_policy(&args(PolicyKind::Explicit, Some(3), None), &s21).is_err());
    }

    #[test]
    fn check_report_facts() {
        let r = check_report(&CheckArgs {
            scheme: "midpoint".into(),
            tol: DEFAULT_TOL,
        })
        .unwrap();
        assert!(r.contains("conservative=true\nexplicit=false\norder1=true"));
        let r = check_report(&CheckArgs {
            scheme: "scheme_2_1".into(),
            tol: DEFAULT_TOL,
        })
        .unwrap();
        assert!(r.contains("conservative=false\nexplicit=true\norder1=true"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(exit_code(&Error::Divergence("x".into())), 2);
        assert_eq!(main_with_args(["srkqi", "check", "--scheme", "nosuch"]), 1);
        assert_eq!(main_with_args(["srkqi", "check", "--bogus"]), 1);
    }
}
