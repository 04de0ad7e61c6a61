use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hermcurv::conformal::{conformal_oracle_check, LastTerm, SHIPPED};
use hermcurv::curvature::{curvature_report, scalar_comparison_defect};
use hermcurv::expr::parse_expr;
use hermcurv::grid::{laplacian_duality_defect, GridMetric, Scheme, TorusGrid};
use hermcurv::report::{curvature_csv, write_text, Envelope, Format, InputDigest};
use hermcurv::solvers::{
    bismut_yamabe_minimize, solve_chern_negative, solve_chern_zero, BismutOptions, ContinuityOptions, SolverReport,
    YamabeConstants,
};
use hermcurv::{Error, ModelManifold};

const EXIT_FAIL: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_GOLDEN: u8 = 4;

const DEFAULT_FACTOR: &str = "0.2*re(z1) - 0.1*im(z2) + 0.05*abs2(z1)";

/// Curvature of Hermitian metrics and constant second scalar curvature solvers.
///
/// Exit codes: 0 success, 1 defect above tolerance or bad input, 2 precondition
/// failure, 3 non-convergence, 4 golden mismatch.
#[derive(Parser)]
#[command(name = "hermcurv", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pointwise torsion, Ricci forms, scalars and class residuals at sample points.
    Inspect(InspectArgs),
    /// Identity defects: conformal laws, scalar comparison, Laplacian duality.
    Check(CheckArgs),
    /// Constant second scalar curvature solvers on a torus grid.
    Solve(SolveArgs),
}

#[derive(Args)]
struct ManifoldArgs {
    /// Builtin name or manifest path.
    #[arg(long)]
    manifold: Option<String>,
    /// Complex dimension for builtins that have one.
    #[arg(long)]
    n: Option<usize>,
    /// Inoue S2 parameter.
    #[arg(long)]
    m: Option<f64>,
}

impl ManifoldArgs {
    fn load(&self, positional: Option<&str>) -> hermcurv::Result<ModelManifold> {
        let spec = positional
            .or(self.manifold.as_deref())
            .ok_or_else(|| Error::Precondition("no manifold given".into()))?;
        if Path::new(spec).is_file() {
            ModelManifold::load_manifest(Path::new(spec))
        } else {
            ModelManifold::named(spec, self.n, self.m)
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Report path; `-` for stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 5)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated connection parameters.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
}

#[derive(Args)]
struct GridArgs {
    /// Points per real axis.
    #[arg(long, default_value_t = 16)]
    grid: usize,
    /// Comma-separated periods of the real axes.
    #[arg(long, value_delimiter = ',')]
    periods: Option<Vec<f64>>,
    /// fd2 | spectral
    #[arg(long)]
    scheme: Option<String>,
    /// Sample only the axes the builtin depends on.
    #[arg(long)]
    reduced: bool,
}

impl GridArgs {
    fn build(&self, man: &ModelManifold, default: Scheme) -> hermcurv::Result<GridMetric> {
        let scheme = match &self.scheme {
            Some(s) => s.parse()?,
            None => default,
        };
        let active: Vec<usize> = match (self.reduced, man.as_builtin().and_then(|b| b.torus())) {
            (true, Some(t)) => t.active_axes,
            _ => (0..2 * man.n).collect(),
        };
        let grid = TorusGrid::reduced(man.n, self.grid, self.periods.clone(), active, scheme)?;
        GridMetric::new(man, Arc::new(grid))
    }
}

#[derive(Args)]
struct InspectArgs {
    /// Builtin name or manifest path (alternative to --manifold).
    name: Option<String>,
    #[command(flatten)]
    manifold: ManifoldArgs,
    #[command(flatten)]
    sample: SampleArgs,
    /// Compare against the builtin's stored values.
    #[arg(long)]
    golden: bool,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Conformal,
    Comparison,
    Duality,
}

#[derive(Clone, Copy, ValueEnum)]
enum Last {
    Verbatim,
    Component,
}

#[derive(Args)]
struct CheckArgs {
    kind: CheckKind,
    #[command(flatten)]
    manifold: ManifoldArgs,
    #[command(flatten)]
    sample: SampleArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Conformal factor for `check conformal`.
    #[arg(long, default_value = DEFAULT_FACTOR)]
    factor: String,
    /// Form of the last term in the transformed third and fourth Ricci curvatures.
    #[arg(long, value_enum)]
    last: Option<Last>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    ChernZero,
    ChernNegative,
    Bismut,
}

#[derive(Args)]
struct SolveArgs {
    problem: Problem,
    #[command(flatten)]
    manifold: ManifoldArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    tol: Option<f64>,
    /// Exponent of the Bismut functional; defaults to the geometric one.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.cmd {
        Cmd::Inspect(a) => inspect(a),
        Cmd::Check(a) => check(a),
        Cmd::Solve(a) => solve(a),
    };
    match run {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Precondition(_) | Error::Domain(_) | Error::Singular(_) => EXIT_PRECONDITION,
                Error::NoConvergence(_) => EXIT_NO_CONVERGENCE,
                _ => EXIT_FAIL,
            })
        }
    }
}

fn emit<T: serde::Serialize>(out: &OutArgs, env: &Envelope<T>, csv: impl FnOnce() -> hermcurv::Result<String>) -> hermcurv::Result<()> {
    let Some(path) = &out.out else { return Ok(()) };
    let text = match out.format.parse()? {
        Format::Json => env.to_json()?,
        Format::Csv => csv()?,
    };
    write_text(path, &text)
}

fn inspect(a: InspectArgs) -> hermcurv::Result<u8> {
    let man = a.manifold.load(a.name.as_deref())?;
    let ts = if a.sample.t.is_empty() { vec![0.0, 1.0] } else { a.sample.t.clone() };
    let points = man.sample_points(a.sample.points, a.sample.seed);
    let mut rows = vec![];
    println!("{:>4} {:>6} {:>20} {:>20}", "pt", "t", "s1", "s2");
    for (k, p) in points.iter().enumerate() {
        for &t in &ts {
            let r = curvature_report(&man, p, t)?;
            println!("{k:>4} {t:>6} {:>20.12e} {:>20.12e}", r.s1, r.s2);
            rows.push(r);
        }
    }
    let mut code = 0;
    if a.golden {
        let golden = man.as_builtin().map(|b| b.golden()).unwrap_or_default();
        if golden.is_empty() {
            return Err(Error::Precondition(format!("'{}' has no stored values", man.name)));
        }
        for g in &golden {
            let mut worst: f64 = 0.0;
            for p in &points {
                let r = curvature_report(&man, p, 0.0)?;
                let v = match g.quantity {
                    "s_c1" => r.s1,
                    _ => r.s2,
                };
                worst = worst.max((v - g.value).abs());
            }
            let ok = worst < a.tol;
            println!("{} {} = {} (max deviation {worst:.3e})", if ok { "PASS" } else { "FAIL" }, g.quantity, g.value);
            if !ok {
                code = EXIT_GOLDEN;
            }
        }
    }
    let mut digest = InputDigest::of(&man);
    digest.seed = Some(a.sample.seed);
    digest.points = Some(a.sample.points);
    let env = Envelope::new("inspect", digest, &rows);
    emit(&a.out, &env, || curvature_csv(&rows))?;
    Ok(code)
}

#[derive(serde::Serialize)]
struct DefectRow {
    t: f64,
    max_defect: f64,
}

fn check(a: CheckArgs) -> hermcurv::Result<u8> {
    let man = a.manifold.load(None)?;
    let mut digest = InputDigest::of(&man);
    let (rows, tol) = match a.kind {
        CheckKind::Conformal => {
            let f = parse_expr(&a.factor)?;
            let last = match a.last {
                Some(Last::Verbatim) => LastTerm::Verbatim,
                Some(Last::Component) => LastTerm::Component,
                None => SHIPPED,
            };
            let ts = if a.sample.t.is_empty() { vec![1.0] } else { a.sample.t.clone() };
            let points = man.sample_points(a.sample.points, a.sample.seed);
            let mut rows = vec![];
            for t in ts {
                let r = conformal_oracle_check(&man, &f, t, &points, last)?;
                rows.push(DefectRow { t, max_defect: r.max_defect() });
            }
            digest.seed = Some(a.sample.seed);
            digest.points = Some(a.sample.points);
            (rows, a.tol.unwrap_or(1e-7))
        }
        CheckKind::Comparison => {
            let ts = if a.sample.t.is_empty() { vec![0.0, 0.5, 1.0] } else { a.sample.t.clone() };
            let points = man.sample_points(a.sample.points, a.sample.seed);
            let mut rows = vec![];
            for t in ts {
                let mut worst: f64 = 0.0;
                for p in &points {
                    worst = worst.max(scalar_comparison_defect(&man.jet(p)?, t)?.abs());
                }
                rows.push(DefectRow { t, max_defect: worst });
            }
            digest.seed = Some(a.sample.seed);
            digest.points = Some(a.sample.points);
            (rows, a.tol.unwrap_or(1e-8))
        }
        CheckKind::Duality => {
            let gm = a.grid.build(&man, Scheme::Fd2)?;
            let tau = 2.0 * std::f64::consts::PI;
            let per = gm.grid.periods.clone();
            let u = gm.grid.sample(|x| {
                let w: f64 = x.iter().zip(&per).enumerate().map(|(k, (v, p))| (k + 1) as f64 * v / p).sum();
                (tau * w).sin() + 0.5 * (tau * x[0] / per[0]).cos()
            });
            let d = laplacian_duality_defect(&gm, &u)?;
            digest.grid = Some((*gm.grid).clone());
            (vec![DefectRow { t: f64::NAN, max_defect: d }], a.tol.unwrap_or(1e-9))
        }
    };
    digest.tol = Some(tol);
    let mut code = 0;
    for r in &rows {
        let ok = r.max_defect < tol;
        if r.t.is_nan() {
            println!("{} max defect {:.3e} (tol {tol:.1e})", if ok { "PASS" } else { "FAIL" }, r.max_defect);
        } else {
            println!("{} t = {} max defect {:.3e} (tol {tol:.1e})", if ok { "PASS" } else { "FAIL" }, r.t, r.max_defect);
        }
        if !ok {
            code = EXIT_FAIL;
        }
    }
    let command = match a.kind {
        CheckKind::Conformal => "check conformal",
        CheckKind::Comparison => "check comparison",
        CheckKind::Duality => "check duality",
    };
    let env = Envelope::new(command, digest, &rows);
    emit(&a.out, &env, || {
        let mut s = String::from("t,max_defect\n");
        for r in &rows {
            s.push_str(&format!("{},{}\n", r.t, r.max_defect));
        }
        Ok(s)
    })?;
    Ok(code)
}

fn solve(a: SolveArgs) -> hermcurv::Result<u8> {
    let man = a.manifold.load(None)?;
    let gm = a.grid.build(&man, Scheme::Spectral)?;
    let (name, report): (&str, SolverReport) = match a.problem {
        Problem::ChernZero => ("solve chern-zero", solve_chern_zero(&gm, a.tol.unwrap_or(1e-6))?),
        Problem::ChernNegative => {
            let mut o = ContinuityOptions::default();
            if let Some(t) = a.tol {
                o.tol = t;
            }
            if let Some(m) = a.max_iter {
                o.max_newton = m;
            }
            ("solve chern-negative", solve_chern_negative(&gm, &o)?)
        }
        Problem::Bismut => {
            let yc = match a.q {
                Some(q) => YamabeConstants::with_q(man.n, q)?,
                None => YamabeConstants::new(man.n)?,
            };
            let mut o = BismutOptions::default();
            if let Some(t) = a.tol {
                o.tol = t;
            }
            if let Some(m) = a.max_iter {
                o.max_iter = m;
            }
            ("solve bismut", bismut_yamabe_minimize(&gm, &yc, &o)?)
        }
    };
    println!("lambda             {:.12e}", report.lambda);
    println!("achieved constant  {:.12e}", report.achieved_constant);
    println!("residual linf      {:.3e}", report.residual_linf);
    println!("residual l2        {:.3e}", report.residual_l2);
    println!("deviation          {:.3e}", report.curvature_deviation);
    println!("iterations         {}", report.linear_iterations);
    println!("wall time          {:.2} s", report.wall_time);
    for n in &report.notes {
        println!("note: {n}");
    }
    println!("{}", if report.accepted { "ACCEPTED" } else { "NOT ACCEPTED" });
    let mut digest = InputDigest::of(&man);
    digest.grid = Some((*gm.grid).clone());
    digest.tol = a.tol;
    let env = Envelope::new(name, digest, &report);
    emit(&a.out, &env, || report.solution.to_csv())?;
    Ok(if report.accepted { 0 } else { EXIT_NO_CONVERGENCE })
}
