//! Command-line front end: kernel evaluation, phi/memory-function queries,
//! the one-dimensional solvers, entropy tables, and the experiment runner.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hyperheat::datum::InitialDatum;
use hyperheat::entropy::{self, RefKind};
use hyperheat::experiment::{run_experiment, ExperimentConfig, Outcome};
use hyperheat::heatkernel::{normalization, Kernel};
use hyperheat::hypgeo::{Dimension, PolarPoint};
use hyperheat::output::fmt_f64;
use hyperheat::profiles::{self, SphericalSamples};
use hyperheat::solvers::{self, GridFunction, GridKind, SolverConfig};
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Parser)]
#[command(name = "hyperheat", about = "Heat flow on hyperbolic space: solvers and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Heat kernel queries.
    Kernel {
        #[command(subcommand)]
        command: KernelCommand,
    },
    /// Evaluate the limiting kernel ratio phi(y, theta).
    Phi(PhiArgs),
    /// Print the kernel ratio along an outgoing ray against its phi limit.
    PhiLimit(PhiLimitArgs),
    /// Evaluate the memory function on a sphere grid and write it as CSV.
    MemoryPhi {
        /// JSON file with keys {d, u0}.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (columns: theta_index, theta coords..., phi_value).
        #[arg(long)]
        out: PathBuf,
        /// Sphere quadrature size.
        #[arg(long, default_value_t = 48)]
        n_theta: usize,
    },
    /// Run a one-dimensional or superposition solve and dump snapshots.
    Solve {
        #[command(subcommand)]
        command: SolveCommand,
    },
    /// Entropy table of a snapshot directory written by `solve`.
    Entropy {
        /// Directory of snapshot CSVs (u_t<t>.csv).
        #[arg(long)]
        snapshots: PathBuf,
        /// Reference family: radial or horo.
        #[arg(long = "ref")]
        reference: String,
        /// Spatial dimension of the snapshots.
        #[arg(long)]
        d: u32,
        /// Output CSV (columns: t, tau, H, D, l1_gap, ck_lhs, ck_rhs).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run experiment configs; exit code 0 iff all acceptance checks pass.
    Run {
        /// One or more experiment JSON configs.
        #[arg(long, num_args = 1.., required = true)]
        config: Vec<PathBuf>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Recorded in summary.json; experiments are deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the output root of every config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the packaged experiment configs.
    ListExperiments {
        /// Directory to scan for configs.
        #[arg(long, default_value = "experiments")]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Print G_d(t, r), or ln G_d with --log.
    Eval {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        log: bool,
    },
    /// Print the full-space integral of G_d(t, .) and its defect from 1.
    CheckNormalization {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Args)]
struct PhiArgs {
    #[arg(long)]
    d: u32,
    /// Radius of the source point y.
    #[arg(long)]
    ry: f64,
    /// Cosine of the angle between theta and the direction of y.
    #[arg(long)]
    cos_angle: f64,
}

#[derive(Args)]
struct PhiLimitArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    ry: f64,
    #[arg(long)]
    cos_angle: f64,
    /// Largest time of the doubling sequence 5, 10, ..., t_max.
    #[arg(long)]
    t_max: f64,
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Radial flow; one CSV per checkpoint (columns: r, u, weight).
    Radial(SolveArgs),
    /// Horospheric flow; one CSV per checkpoint (columns: r, u, weight).
    Horo(SolveArgs),
    /// General flow by kernel superposition at a single time
    /// (columns: r, theta coords..., u).
    General {
        /// JSON file with keys {d, u0}.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
        /// Radial nodes of the evaluation grid.
        #[arg(long, default_value_t = 400)]
        n_r: usize,
        /// Sphere quadrature size.
        #[arg(long, default_value_t = 24)]
        n_theta: usize,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// JSON file with keys {d, u0, solver}.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated checkpoint times.
    #[arg(long, value_delimiter = ',', required = true)]
    checkpoints: Vec<f64>,
    /// Output directory for the snapshot CSVs.
    #[arg(long)]
    out: PathBuf,
}

/// Config of a bare solve: the experiment config minus orchestration fields.
#[derive(Deserialize)]
struct SolveConfig {
    d: Dimension,
    u0: InitialDatum,
    #[serde(default)]
    solver: SolverConfig,
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn dim(d: u32) -> Result<Dimension> {
    Ok(Dimension::new(d)?)
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Kernel { command } => kernel_cmd(command),
        Command::Phi(args) => {
            let d = dim(args.d)?;
            println!("{}", fmt_f64(profiles::phi_from_parts(d, args.ry, args.cos_angle)));
            Ok(0)
        }
        Command::PhiLimit(args) => phi_limit_cmd(args),
        Command::MemoryPhi { config, out, n_theta } => memory_phi_cmd(&config, &out, n_theta),
        Command::Solve { command } => solve_cmd(command),
        Command::Entropy { snapshots, reference, d, out } => {
            entropy_cmd(&snapshots, &reference, d, &out)
        }
        Command::Run { config, jobs, seed, out } => run_cmd(&config, jobs, seed, out.as_deref()),
        Command::ListExperiments { dir } => list_experiments(&dir),
    }
}

fn kernel_cmd(cmd: KernelCommand) -> Result<i32> {
    match cmd {
        KernelCommand::Eval { d, t, r, log } => {
            let kernel = Kernel::for_dimension(dim(d)?)?;
            let v = if log { kernel.eval_ln(t, r)? } else { kernel.eval(t, r)? };
            println!("{}", fmt_f64(v));
        }
        KernelCommand::CheckNormalization { d, t } => {
            let kernel = Kernel::for_dimension(dim(d)?)?;
            let total = normalization(&kernel, t)?;
            println!("integral {} defect {}", fmt_f64(total), fmt_f64(total - 1.0));
        }
    }
    Ok(0)
}

fn phi_limit_cmd(args: PhiLimitArgs) -> Result<i32> {
    let d = dim(args.d)?;
    let kernel = Kernel::for_dimension(d)?;
    let y = PolarPoint::axial(d, args.ry);
    let mut theta = vec![0.0; d.get() as usize];
    theta[0] = args.cos_angle;
    theta[1] = (1.0f64 - args.cos_angle * args.cos_angle).max(0.0).sqrt();
    let mut times = Vec::new();
    let mut t = 5.0;
    while t <= args.t_max + 1e-9 {
        times.push(t);
        t *= 2.0;
    }
    if times.is_empty() {
        bail!("t_max {} is below the first sample time 5", args.t_max);
    }
    let ratios = profiles::phi_ratio_limit_check(&kernel, &y, &theta, 0.0, &times)?;
    let phi_val = profiles::phi_from_parts(d, args.ry, args.cos_angle);
    println!("t,ratio,phi,relative_error");
    for (&t, &ratio) in times.iter().zip(&ratios) {
        println!(
            "{},{},{},{}",
            fmt_f64(t),
            fmt_f64(ratio),
            fmt_f64(phi_val),
            fmt_f64((ratio / phi_val - 1.0).abs())
        );
    }
    Ok(0)
}

fn memory_phi_cmd(config: &Path, out: &Path, n_theta: usize) -> Result<i32> {
    let cfg: SolveConfig = load_json(config)?;
    let mut grid = SphericalSamples::grid(cfg.d, n_theta)?;
    profiles::memory_phi(cfg.d, &cfg.u0, &mut grid)?;
    let dim_cols: Vec<String> =
        (0..cfg.d.get()).map(|i| format!("theta_{i}")).collect();
    let mut text = format!("theta_index,{},phi_value\n", dim_cols.join(","));
    for (i, (node, &v)) in grid.nodes.iter().zip(&grid.values).enumerate() {
        let coords: Vec<String> = node.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(text, "{i},{},{}", coords.join(","), fmt_f64(v));
    }
    write_file(out, &text)?;
    Ok(0)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn snapshot_csv(g: &GridFunction) -> String {
    let mut text = String::from("r,u,weight\n");
    for (&r, &u) in g.nodes.iter().zip(&g.values) {
        let _ = writeln!(
            text,
            "{},{},{}",
            fmt_f64(r),
            fmt_f64(u),
            fmt_f64(g.kind.weight(g.d, r))
        );
    }
    text
}

fn solve_line(args: SolveArgs, horo: bool) -> Result<i32> {
    let cfg: SolveConfig = load_json(&args.config)?;
    if args.checkpoints.is_empty()
        || args.checkpoints[0] <= 0.0
        || args.checkpoints.windows(2).any(|w| w[1] <= w[0])
    {
        bail!("checkpoints must be positive and strictly increasing");
    }
    let snaps = if horo {
        solvers::solve_horospheric(cfg.d, &cfg.u0, &cfg.solver, &args.checkpoints)?
    } else {
        solvers::solve_radial(cfg.d, &cfg.u0, &cfg.solver, &args.checkpoints)?
    };
    fs::create_dir_all(&args.out)?;
    for g in &snaps {
        let path = args.out.join(format!("u_t{}.csv", g.t));
        write_file(&path, &snapshot_csv(g))?;
        println!("wrote {} (mass {})", path.display(), fmt_f64(g.mass()));
    }
    Ok(0)
}

fn solve_cmd(cmd: SolveCommand) -> Result<i32> {
    match cmd {
        SolveCommand::Radial(args) => solve_line(args, false),
        SolveCommand::Horo(args) => solve_line(args, true),
        SolveCommand::General { config, t, out, n_r, n_theta } => {
            let cfg: SolveConfig = load_json(&config)?;
            let k = cfg.d.as_f64() - 1.0;
            let hi = k * t + 10.0 * (t + 1.0).sqrt();
            let r_nodes: Vec<f64> =
                (0..n_r).map(|i| hi * i as f64 / (n_r - 1) as f64).collect();
            let grid = SphericalSamples::grid(cfg.d, n_theta)?;
            let rows = solvers::solve_general(cfg.d, &cfg.u0, t, &r_nodes, &grid.nodes)?;
            let dim_cols: Vec<String> =
                (0..cfg.d.get()).map(|i| format!("theta_{i}")).collect();
            let mut text = format!("r,{},u\n", dim_cols.join(","));
            for (theta, row) in grid.nodes.iter().zip(&rows) {
                let coords: Vec<String> = theta.iter().map(|&x| fmt_f64(x)).collect();
                for (&r, &u) in r_nodes.iter().zip(row) {
                    let _ = writeln!(
                        text,
                        "{},{},{}",
                        fmt_f64(r),
                        coords.join(","),
                        fmt_f64(u)
                    );
                }
            }
            write_file(&out, &text)?;
            Ok(0)
        }
    }
}

fn entropy_cmd(snapshots: &Path, reference: &str, d: u32, out: &Path) -> Result<i32> {
    let kind = match reference {
        "radial" => RefKind::Radial,
        "horo" => RefKind::Horospheric,
        other => bail!("unknown reference family {other}; expected radial or horo"),
    };
    let grid_kind = match kind {
        RefKind::Horospheric => GridKind::Horospheric,
        _ => GridKind::Radial,
    };
    let d = dim(d)?;
    let mut files: Vec<(f64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(snapshots)
        .with_context(|| format!("reading {}", snapshots.display()))?
    {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if let Some(t) = name
            .strip_prefix("u_t")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<f64>().ok())
        {
            files.push((t, path));
        }
    }
    if files.is_empty() {
        bail!("no u_t<t>.csv snapshots in {}", snapshots.display());
    }
    files.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut snaps = Vec::with_capacity(files.len());
    for (t, path) in &files {
        let text = fs::read_to_string(path)?;
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 2 {
                bail!("malformed snapshot row in {}: {line}", path.display());
            }
            nodes.push(cols[0].parse::<f64>()?);
            values.push(cols[1].parse::<f64>()?);
        }
        snaps.push(GridFunction { kind: grid_kind, d, t: *t, nodes, values });
    }
    let decay = entropy::entropy_decay_series(&snaps, kind)?;
    let mut text = String::from("t,tau,H,D,l1_gap,ck_lhs,ck_rhs\n");
    for (g, r) in snaps.iter().zip(&decay.reports) {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            fmt_f64(g.t),
            fmt_f64(r.tau),
            fmt_f64(r.h),
            fmt_f64(r.d_production),
            fmt_f64(r.l1_gap),
            fmt_f64(r.ck_lhs()),
            fmt_f64(r.ck_rhs())
        );
    }
    write_file(out, &text)?;
    println!("fitted tau-rate {}", fmt_f64(decay.fitted_rate));
    Ok(0)
}

fn run_cmd(configs: &[PathBuf], jobs: usize, seed: u64, out: Option<&Path>) -> Result<i32> {
    let jobs = jobs.max(1);
    let mut cfgs: Vec<ExperimentConfig> = Vec::with_capacity(configs.len());
    for path in configs {
        cfgs.push(load_json(path)?);
    }
    let out_roots: Vec<PathBuf> = cfgs
        .iter()
        .map(|c| out.map(Path::to_path_buf).unwrap_or_else(|| c.output_dir.clone()))
        .collect();

    let results: Mutex<Vec<Option<std::result::Result<Outcome, String>>>> =
        Mutex::new(vec![None; cfgs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(cfgs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cfgs.len() {
                    break;
                }
                let res = run_experiment(&cfgs[i], &out_roots[i]).map_err(|e| e.to_string());
                results.lock().unwrap()[i] = Some(res);
            });
        }
    });

    let results = results.into_inner().unwrap();
    let mut all_passed = true;
    let mut outcomes = Vec::new();
    let mut errors = Vec::new();
    for (cfg, res) in cfgs.iter().zip(results) {
        match res.expect("worker pool covered every job") {
            Ok(outcome) => {
                let status = if outcome.passed { "PASS" } else { "FAIL" };
                println!(
                    "{status} {} ({}) slope {:.4} vs reference {:.4}",
                    outcome.name,
                    outcome.theorem.config_name(),
                    outcome.report.fit_slope,
                    outcome.report.reference_slope
                );
                for check in &outcome.checks {
                    let mark = if check.passed { "ok" } else { "FAILED" };
                    println!("  [{mark}] {}: {}", check.label, check.detail);
                }
                all_passed &= outcome.passed;
                outcomes.push(outcome);
            }
            Err(msg) => {
                println!("ERROR {}: {msg}", cfg.name);
                errors.push(serde_json::json!({ "name": cfg.name, "error": msg }));
                all_passed = false;
            }
        }
    }

    let summary_root = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfgs[0].output_dir.clone());
    fs::create_dir_all(&summary_root)?;
    let summary = serde_json::json!({
        "seed": seed,
        "passed": all_passed,
        "outcomes": outcomes,
        "errors": errors,
    });
    let mut body = serde_json::to_string_pretty(&summary)?;
    body.push('\n');
    fs::write(summary_root.join("summary.json"), body)?;
    Ok(if all_passed { 0 } else { 1 })
}

fn list_experiments(dir: &Path) -> Result<i32> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    entries.sort();
    if entries.is_empty() {
        println!("no experiment configs in {}", dir.display());
        return Ok(0);
    }
    for path in entries {
        match load_json::<ExperimentConfig>(&path) {
            Ok(cfg) => println!(
                "{:30} {:18} d={} ({})",
                cfg.name,
                cfg.theorem.config_name(),
                cfg.d.get(),
                path.display()
            ),
            Err(e) => println!("{}: unreadable config ({e})", path.display()),
        }
    }
    Ok(0)
}
