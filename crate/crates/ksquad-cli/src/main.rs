//! `verify`: run the residual suites against their pinned gates, emit a
//! deterministic JSON report (and residual-grid CSV when writing to a
//! directory), or render the reduced quadrupolar phase-plane portrait.
//!
//! Exit status: 0 all checks pass, 1 at least one check failed, 2 usage or
//! malformed configuration, 3 runtime or I/O failure.

use clap::{Args, Parser, Subcommand};
use ksquad::error::Error;
use ksquad_cli::portrait::{self, PortraitSpec};
use ksquad_cli::report::Report;
use ksquad_cli::suites::{self, SuiteCtx, SUITE_NAMES};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "verify", version, about = "Residual verification suites and reduced phase portraits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run verification suites and emit a deterministic report
    Run(RunArgs),
    /// Render the reduced phase-plane portrait as an SVG file
    Portrait(PortraitArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Suite to run: ks, lcf, threebody, quad, conjugacy, or all
    #[arg(long)]
    suite: Option<String>,
    /// Seed of the deterministic sample streams
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Quadrature nodes per axis for the secular averages
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Step size of the long integrator runs
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Directory for report.json and residuals.csv; without it the JSON
    /// report goes to stdout (for --portrait: the SVG file)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiply every tolerance by the documented relax factor; recorded
    /// in the report
    #[arg(long)]
    relax: bool,
    /// Comma-separated truncation scales for the quad sweep, e.g.
    /// 0.04,0.02,0.01
    #[arg(long)]
    alpha_sweep: Option<String>,
    /// Render a portrait instead of running suites (needs --l1, --g2,
    /// --c, and --out FILE)
    #[arg(long)]
    portrait: bool,
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long)]
    g2: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Masses m0,m1,m2 for the portrait caption
    #[arg(long)]
    masses: Option<String>,
}

#[derive(Args)]
struct PortraitArgs {
    /// Inner circular action L1
    #[arg(long)]
    l1: f64,
    /// Outer angular momentum G2
    #[arg(long)]
    g2: f64,
    /// Total angular momentum C
    #[arg(long)]
    c: f64,
    /// Masses m0,m1,m2 for the caption
    #[arg(long)]
    masses: Option<String>,
    /// Output SVG file
    #[arg(long)]
    out: PathBuf,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn runtime_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_RUNTIME)
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run(args) => run_cmd(args),
        Cmd::Portrait(args) => {
            let masses = match args.masses.as_deref().map(parse_masses).transpose() {
                Ok(m) => m,
                Err(e) => return usage_error(&e),
            };
            let spec = PortraitSpec { l1: args.l1, g2: args.g2, c: args.c, masses };
            render_portrait(&spec, &args.out)
        }
    }
}

fn parse_masses(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("--masses wants m0,m1,m2, got {s:?}"));
    }
    let mut v = [0.0f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|_| format!("bad mass {p:?}"))?;
        if !slot.is_finite() || !(*slot > 0.0) {
            return Err(format!("masses must be positive and finite, got {p:?}"));
        }
    }
    Ok((v[0], v[1], v[2]))
}

fn parse_alpha_sweep(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for p in s.split(',') {
        let a: f64 = p.trim().parse().map_err(|_| format!("bad alpha {p:?}"))?;
        // Above ~0.2 the sweep fixture's orbits intersect and the double
        // average stops existing.
        if !a.is_finite() || !(a > 0.0) || a > 0.2 {
            return Err(format!("alpha sweep entries must lie in (0, 0.2], got {a}"));
        }
        out.push(a);
    }
    Ok(out)
}

fn render_portrait(spec: &PortraitSpec, out: &Path) -> ExitCode {
    match portrait::render(spec) {
        Ok(svg) => match std::fs::write(out, svg) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => runtime_error(&format!("writing {}: {e}", out.display())),
        },
        // Bad geometry is a configuration problem, not a runtime failure.
        Err(Error::ChartDomain { condition }) => usage_error(condition),
        Err(e) => runtime_error(&e.to_string()),
    }
}

fn run_cmd(args: RunArgs) -> ExitCode {
    if args.portrait {
        if args.suite.is_some() {
            return usage_error("--portrait and --suite are mutually exclusive");
        }
        let (Some(l1), Some(g2), Some(c)) = (args.l1, args.g2, args.c) else {
            return usage_error("--portrait needs --l1, --g2, and --c");
        };
        let Some(out) = args.out else {
            return usage_error("--portrait needs --out FILE for the SVG");
        };
        let masses = match args.masses.as_deref().map(parse_masses).transpose() {
            Ok(m) => m,
            Err(e) => return usage_error(&e),
        };
        return render_portrait(&PortraitSpec { l1, g2, c, masses }, &out);
    }
    if args.l1.is_some() || args.g2.is_some() || args.c.is_some() || args.masses.is_some() {
        return usage_error("--l1/--g2/--c/--masses only apply to portraits");
    }
    let Some(suite) = args.suite else {
        return usage_error("--suite is required: ks, lcf, threebody, quad, conjugacy, or all");
    };
    if suite != "all" && !SUITE_NAMES.contains(&suite.as_str()) {
        return usage_error(&format!(
            "unknown suite {suite:?}; expected ks, lcf, threebody, quad, conjugacy, or all"
        ));
    }
    if !(2..=4096).contains(&args.nodes) {
        return usage_error("--nodes must lie in [2, 4096]");
    }
    if !args.dt.is_finite() || !(args.dt > 0.0) || args.dt > 1.0 {
        return usage_error("--dt must lie in (0, 1]");
    }

    let mut ctx = SuiteCtx::new(args.seed, args.nodes, args.dt, args.relax);
    if let Some(s) = args.alpha_sweep.as_deref() {
        match parse_alpha_sweep(s) {
            Ok(v) if !v.is_empty() => ctx.alpha_sweep = v,
            Ok(_) => return usage_error("--alpha-sweep needs at least one value"),
            Err(e) => return usage_error(&e),
        }
    }

    if let Err(e) = suites::run_suite(&suite, &mut ctx) {
        return runtime_error(&format!("suite {suite} aborted: {e}"));
    }
    let adjudications = match suites::quad::adjudications(&mut ctx.timing) {
        Ok(a) => a,
        Err(e) => return runtime_error(&format!("adjudication failed: {e}")),
    };

    for c in &ctx.checks {
        eprintln!(
            "{} {:<24} residual {:>13.6e}  tol {:>9.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.residual,
            c.tolerance
        );
    }
    let failed = ctx.checks.iter().filter(|c| !c.pass).count();
    eprintln!("suite {suite}: {} checks, {failed} failed", ctx.checks.len());

    let csv = ctx.grid_csv();
    let report = Report {
        suite,
        seed: args.seed,
        nodes: args.nodes,
        dt: args.dt,
        relaxed: args.relax,
        checks: ctx.checks,
        adjudications,
        timing: ctx.timing,
    };
    let json = report.to_json();
    if let Some(dir) = args.out {
        if let Err(e) = std::fs::create_dir_all(&dir) {
            return runtime_error(&format!("creating {}: {e}", dir.display()));
        }
        if let Err(e) = std::fs::write(dir.join("report.json"), json) {
            return runtime_error(&format!("writing report.json: {e}"));
        }
        if let Err(e) = std::fs::write(dir.join("residuals.csv"), csv) {
            return runtime_error(&format!("writing residuals.csv: {e}"));
        }
    } else {
        print!("{json}");
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
