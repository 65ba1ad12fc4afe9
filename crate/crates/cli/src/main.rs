//! `necklace` — band structure, breather-frequency validation, bound
//! states, coupled modes and Klein-Gordon simulation on the necklace
//! graph.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure,
//! 4 invalid frequency verdict under `validate-freq --strict`.

mod config;
mod plot;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use necklace_core::geometry::Geometry;
use necklace_core::homoclinic::{default_n_cells, find_bound_state, Family};
use necklace_core::modes::{slaving_report, BvpConfig};
use necklace_core::sim::run_breather;
use necklace_core::spectrum::{
    parse_link_length, rationality_check, scan_bands, validate_frequency,
};
use necklace_core::Error as CoreError;

use config::ConfigFile;

#[derive(Parser)]
#[command(
    name = "necklace",
    version,
    about = "Floquet-Bloch spectra and Klein-Gordon breathers on the periodic necklace graph"
)]
struct Cli {
    /// Flat `key = value` configuration file; command-line flags override.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (default: $NECKLACE_OUT, else the current directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for parameter sweeps.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Also write a matplotlib script next to each dataset.
    #[arg(long, global = true)]
    emit_plot: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Link,
    Circle,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Link => Family::LinkCentered,
            FamilyArg::Circle => Family::CircleCentered,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan the band/gap structure of the graph Laplacian over a λ range.
    Bands {
        #[arg(long)]
        l: Option<u32>,
        #[arg(long, allow_negative_numbers = true)]
        lmin: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lmax: Option<f64>,
        /// Grid size.
        #[arg(long)]
        n: Option<usize>,
        /// Mark the harmonic points λ_m = m²ω²-α for this odd k in the plot.
        #[arg(long)]
        mark_k: Option<u32>,
    },
    /// Validate the breather frequency ω = k/2 (α = ω²) against the gaps.
    ValidateFreq {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        /// Highest odd harmonic checked.
        #[arg(long)]
        mmax: Option<u32>,
        /// Exit with code 4 when the verdict is invalid.
        #[arg(long)]
        strict: bool,
    },
    /// Periodicity of the trace map for link length L = l·π (l rational or sqrtN).
    Rationality {
        #[arg(long)]
        l: Option<String>,
    },
    /// Shoot the symmetric bound state of u'' = ε²u - u³ through the vertex jumps.
    Breather {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// Grid spacing (π divided by an even integer; rounded to the nearest).
        #[arg(long)]
        dx: Option<f64>,
        /// Cells per side of the window (default: tails reach e⁻¹²).
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Solve the truncated coupled-mode system; repeat --eps for a slaving sweep.
    Modes {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        /// One value or a comma-separated ε grid.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        mmax: Option<u32>,
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Integrate the Klein-Gordon equation from the synthesized breather.
    Simulate {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        mmax: Option<u32>,
        #[arg(long)]
        periods: Option<usize>,
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Write space-time snapshots every quarter period.
        #[arg(long)]
        snapshots: bool,
    },
    /// Aggregate the JSON outputs in a directory into one summary.
    Report {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn from_core(e: CoreError) -> Failure {
        let code = match &e {
            CoreError::InvalidGeometry(_)
            | CoreError::InvalidConfiguration(_)
            | CoreError::Parse(_)
            | CoreError::StepSize { .. } => 2,
            CoreError::BracketFailure(_)
            | CoreError::NewtonDiverged(_)
            | CoreError::CflViolation { .. }
            | CoreError::NonFinite(_)
            | CoreError::SingularMatrix(_) => 3,
            CoreError::Io(_) => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }

    fn io(e: std::io::Error, what: &str) -> Failure {
        Failure {
            code: 1,
            message: format!("{what}: {e}"),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Failure {
        Failure::from_core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn out_dir(cli_out: &Option<PathBuf>, cfg: &ConfigFile) -> Result<PathBuf, Failure> {
    let dir = cli_out
        .clone()
        .or_else(|| cfg.get("out").map(PathBuf::from))
        .or_else(|| std::env::var_os("NECKLACE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Failure::io(e, "creating output directory"))?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::io(e, &format!("writing {}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// π divided by an even integer, nearest to the requested spacing.
fn nodes_per_semi_from_dx(dx: f64) -> Result<usize, Failure> {
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Failure::usage("dx must be positive"));
    }
    let n = (PI / dx / 2.0).round().max(1.0) as usize * 2;
    Ok(n)
}

fn require_odd(name: &str, v: u32) -> Result<(), Failure> {
    if v % 2 == 0 || v == 0 {
        return Err(Failure::usage(format!(
            "{name} must be odd (breather frequencies are ω = k/2 with odd k on odd-l graphs)"
        )));
    }
    Ok(())
}

/// Frequency-rule gate for breather/modes/simulate: λ₁ on the spectrum and
/// every retained harmonic in a gap.
fn require_validated(k: u32, l: u32, m_max: u32) -> Result<(), Failure> {
    let report = validate_frequency(k, l, m_max.max(3)).map_err(Failure::from_core)?;
    let bad: Vec<String> = report
        .modes
        .iter()
        .filter(|r| (r.m >= 3 && r.m <= m_max.max(3) && !r.class.is_gap()) || (r.m == 1 && r.class.is_gap()))
        .map(|r| format!("m={} (λ={:.4}, {})", r.m, r.lambda, r.class.label()))
        .collect();
    if !bad.is_empty() {
        return Err(Failure::usage(format!(
            "frequency k={k}, l={l} fails the validity rule (λ₁ must touch the spectrum and \
             every odd harmonic λ_m = m²ω²-α must fall in a gap; run `necklace validate-freq \
             --k {k} --l {l}`): offending modes: {}",
            bad.join(", ")
        )));
    }
    Ok(())
}

fn fmt_num(x: f64) -> String {
    // Shortest round-trip form for file names.
    format!("{x}")
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match &cli.cmd {
        Cmd::Bands { l, lmin, lmax, n, mark_k } => {
            let allowed = ["l", "lmin", "lmax", "n", "mark_k", "out", "jobs"];
            let cfg = load_config(&cli, &allowed)?;
            let l = cfg.resolve(*l, "l", 1).map_err(usage)?;
            let lmin = cfg.resolve(*lmin, "lmin", -1.0).map_err(usage)?;
            let lmax = cfg.resolve(*lmax, "lmax", 9.0).map_err(usage)?;
            let n = cfg.resolve(*n, "n", 2001).map_err(usage)?;
            let mark_k = match mark_k {
                Some(v) => Some(*v),
                None => cfg
                    .get("mark_k")
                    .map(|s| s.parse::<u32>())
                    .transpose()
                    .map_err(|e| Failure::usage(format!("mark_k: {e}")))?,
            };
            let geometry = Geometry::new(l)?;
            let scan = scan_bands(&geometry, lmin, lmax, n)?;
            for w in &scan.warnings {
                eprintln!("warning: {w}");
            }
            let dir = out_dir(&cli.out, &cfg)?;
            let csv_name = format!("bands_l{l}.csv");
            write_file(&dir.join(&csv_name), &scan.to_csv_string())?;
            println!(
                "{} intervals ({} gaps), {} tangential touchings",
                scan.intervals.len(),
                scan.intervals
                    .iter()
                    .filter(|i| i.kind == necklace_core::spectrum::IntervalKind::Gap)
                    .count(),
                scan.touch_points.len()
            );
            for itv in &scan.intervals {
                println!(
                    "  [{:+.6}, {:+.6}] {}",
                    itv.lo,
                    itv.hi,
                    match itv.kind {
                        necklace_core::spectrum::IntervalKind::Band => "band",
                        necklace_core::spectrum::IntervalKind::Gap => "gap",
                    }
                );
            }
            if cli.emit_plot {
                let script = plot::trace_script(&csv_name, mark_k, lmax);
                write_file(&dir.join(format!("bands_l{l}.py")), &script)?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::ValidateFreq { k, l, mmax, strict } => {
            let allowed = ["k", "l", "mmax", "out"];
            let cfg = load_config(&cli, &allowed)?;
            let k = cfg.resolve(*k, "k", 1).map_err(usage)?;
            let l = cfg.resolve(*l, "l", 1).map_err(usage)?;
            let mmax = cfg.resolve(*mmax, "mmax", 99).map_err(usage)?;
            require_odd("k", k)?;
            let report = validate_frequency(k, l, mmax)?;
            let dir = out_dir(&cli.out, &cfg)?;
            write_file(&dir.join(format!("freq_k{k}_l{l}.json")), &report.to_json_string())?;
            println!(
                "k = {k}, l = {l}: ω = {}, α = {} -> verdict {}",
                report.omega,
                report.alpha,
                if report.valid { "valid" } else { "invalid" }
            );
            println!(
                "  λ₁ = {:.6} ({}), limit trace {:.6}",
                report.modes[0].lambda,
                report.modes[0].class.label(),
                report.limit_trace
            );
            for rec in report.modes.iter().skip(1).take(4) {
                println!(
                    "  m = {}: λ = {:.6}, tr = {:+.6}, margin {:+.4e} ({})",
                    rec.m, rec.lambda, rec.trace, rec.margin, rec.class.label()
                );
            }
            if *strict && !report.valid {
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Rationality { l } => {
            let allowed = ["l", "out"];
            let cfg = load_config(&cli, &allowed)?;
            let l_str = l
                .clone()
                .or_else(|| cfg.get("l").map(String::from))
                .unwrap_or_else(|| "1".into());
            let link = parse_link_length(&l_str)?;
            let report = rationality_check(&link);
            let dir = out_dir(&cli.out, &cfg)?;
            let safe = report.l_label.replace('/', "_");
            write_file(&dir.join(format!("rationality_l{safe}.json")), &report.to_json_string())?;
            match (&report.ratio, &report.period_omega) {
                (Some((rn, rd)), Some((pn, pd))) => println!(
                    "l = {}: (L-π)/(L+π) = {rn}/{rd} ∈ Q -> trace map periodic with period {pn}/{pd} in ω",
                    report.l_label
                ),
                _ => println!(
                    "l = {}: ratio (L-π)/(L+π) = {:.12} irrational -> non-periodic trace",
                    report.l_label, report.ratio_value
                ),
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Breather { k, l, eps, family, dx, cells } => {
            let allowed = ["k", "l", "eps", "family", "dx", "cells", "out"];
            let cfg = load_config(&cli, &allowed)?;
            let k = cfg.resolve(*k, "k", 1).map_err(usage)?;
            let l = cfg.resolve(*l, "l", 1).map_err(usage)?;
            let eps = cfg.resolve(*eps, "eps", 0.05).map_err(usage)?;
            require_odd("k", k)?;
            require_odd("l", l)?;
            if !(eps > 0.0 && eps <= 0.5) {
                return Err(Failure::usage("eps must lie in (0, 0.5]"));
            }
            let family: Family = match family {
                Some(f) => (*f).into(),
                None => match cfg.get("family").unwrap_or("link") {
                    "link" => Family::LinkCentered,
                    "circle" => Family::CircleCentered,
                    other => return Err(Failure::usage(format!("unknown family {other:?}"))),
                },
            };
            require_validated(k, l, 3)?;
            let geometry = Geometry::new(l)?;
            let dx = cfg.resolve(*dx, "dx", PI / 200.0).map_err(usage)?;
            let nps = nodes_per_semi_from_dx(dx)?;
            let cells = cfg
                .resolve(*cells, "cells", default_n_cells(eps, &geometry))
                .map_err(usage)?;
            let state = find_bound_state(geometry, eps, family, cells, nps)?;
            let dir = out_dir(&cli.out, &cfg)?;
            let stem = format!("breather_{}_eps{}", family.label(), fmt_num(eps));
            let csv_name = format!("{stem}.csv");
            write_file(&dir.join(&csv_name), &state.profile.to_csv_string())?;
            write_file(&dir.join(format!("{stem}.json")), &state.summary_json())?;
            println!(
                "bound state ({}, ε = {eps}): amplitude {:.6e}, max u {:.6e}, β̂ = {:.6} (linear {:.6})",
                family.label(),
                state.amplitude,
                state.max_u,
                state.beta_hat,
                state.beta_lin
            );
            if cli.emit_plot {
                let vertices = vertex_positions(state.profile.grid());
                write_file(
                    &dir.join(format!("{stem}.py")),
                    &plot::profile_script(&csv_name, &vertices),
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Modes { k, l, eps, mmax, dx, cells } => {
            let allowed = ["k", "l", "eps", "mmax", "dx", "cells", "out", "jobs"];
            let cfg = load_config(&cli, &allowed)?;
            let k = cfg.resolve(*k, "k", 1).map_err(usage)?;
            let l = cfg.resolve(*l, "l", 1).map_err(usage)?;
            let mmax = cfg.resolve(*mmax, "mmax", 5).map_err(usage)?;
            require_odd("k", k)?;
            require_odd("l", l)?;
            require_odd("mmax", mmax)?;
            let eps_grid: Vec<f64> = match eps {
                Some(v) if !v.is_empty() => v.clone(),
                _ => match cfg.get("eps") {
                    Some(raw) => raw
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| Failure::usage(format!("eps: {e}")))?,
                    None => vec![0.05],
                },
            };
            require_validated(k, l, mmax)?;
            let dx = cfg.resolve(*dx, "dx", PI / 200.0).map_err(usage)?;
            let nps = nodes_per_semi_from_dx(dx)?;
            let cells = cfg.resolve(*cells, "cells", 0).map_err(usage)?;
            let mut base = BvpConfig::new(k, l, eps_grid[0], mmax);
            base.nodes_per_semi = nps;
            base.n_cells = cells;
            let jobs = cli
                .jobs
                .or_else(|| cfg.get("jobs").and_then(|s| s.parse().ok()))
                .unwrap_or(1);
            let (report, solutions) = if jobs > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| Failure::usage(format!("building thread pool: {e}")))?;
                pool.install(|| slaving_report_parallel(&base, &eps_grid))?
            } else {
                slaving_report(&base, &eps_grid)?
            };
            let dir = out_dir(&cli.out, &cfg)?;
            for sol in &solutions {
                for w in &sol.warnings {
                    eprintln!("warning (ε = {}): {w}", sol.stack.eps);
                }
                for j in 0..sol.stack.n_modes() {
                    let m = sol.stack.harmonic(j);
                    let name = format!("modes_eps{}_m{m}.csv", fmt_num(sol.stack.eps));
                    write_file(&dir.join(name), &sol.stack.mode_profile(j).to_csv_string())?;
                }
            }
            write_file(&dir.join(format!("slaving_k{k}_l{l}.json")), &report.to_json_string())?;
            for row in &report.rows {
                let norms: Vec<String> = row
                    .norms
                    .iter()
                    .map(|(m, s)| format!("‖u{m}‖ = {s:.4e}"))
                    .collect();
                println!("ε = {}: {}", row.eps, norms.join(", "));
            }
            if let Some(s3) = report.slope_u3 {
                println!("slaving slope ‖u₃‖ vs ‖u₁‖: {s3:.4}");
            }
            if let Some(s5) = report.slope_u5 {
                println!("slaving slope ‖u₅‖ vs ‖u₁‖: {s5:.4}");
            }
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Simulate { k, l, eps, mmax, periods, dx, dt, snapshots } => {
            let allowed = ["k", "l", "eps", "mmax", "periods", "dx", "dt", "out"];
            let cfg = load_config(&cli, &allowed)?;
            let k = cfg.resolve(*k, "k", 1).map_err(usage)?;
            let l = cfg.resolve(*l, "l", 1).map_err(usage)?;
            let eps = cfg.resolve(*eps, "eps", 0.05).map_err(usage)?;
            let mmax = cfg.resolve(*mmax, "mmax", 5).map_err(usage)?;
            let periods = cfg.resolve(*periods, "periods", 1).map_err(usage)?;
            require_odd("k", k)?;
            require_odd("l", l)?;
            require_odd("mmax", mmax)?;
            require_validated(k, l, mmax)?;
            let dx = cfg.resolve(*dx, "dx", PI / 200.0).map_err(usage)?;
            let nps = nodes_per_semi_from_dx(dx)?;
            let dx_actual = PI / nps as f64;
            let dt = cfg.resolve(*dt, "dt", 0.25 * dx_actual).map_err(usage)?;
            let mut bvp = BvpConfig::new(k, l, eps, mmax);
            bvp.nodes_per_semi = nps;
            let sol = necklace_core::modes::solve_bvp(
                &bvp,
                necklace_core::modes::InitialGuess::ScaledHomoclinic,
            )?;
            for w in &sol.warnings {
                eprintln!("warning: {w}");
            }
            let diag = run_breather(&sol.stack, dt, periods, 2, *snapshots)?;
            for w in &diag.warnings {
                eprintln!("warning: {w}");
            }
            let dir = out_dir(&cli.out, &cfg)?;
            let stem = format!("sim_k{k}_l{l}_eps{}_m{mmax}", fmt_num(eps));
            write_file(&dir.join(format!("{stem}.json")), &diag.to_json_string())?;
            if *snapshots {
                let padded = necklace_core::sim::pad_stack(&sol.stack, 2)?;
                let csv_name = format!("{stem}_snapshots.csv");
                write_file(&dir.join(&csv_name), &diag.snapshots_csv(padded.grid()))?;
                if cli.emit_plot {
                    write_file(
                        &dir.join(format!("{stem}_snapshots.py")),
                        &plot::spacetime_script(&csv_name),
                    )?;
                }
            }
            println!(
                "T = {:.6}, dt = {:.6e}: return error ρ = {:.4e} (state {:.4e}), energy drift {:.4e}, tail {:.3e} -> {:.3e}",
                diag.period,
                diag.dt,
                diag.return_error,
                diag.rho_state_per_period[0],
                diag.energy_drift,
                diag.tail_initial,
                diag.tail_max
            );
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Report { dir } => {
            let allowed = ["dir", "out"];
            let cfg = load_config(&cli, &allowed)?;
            let src = dir
                .clone()
                .or_else(|| cfg.get("dir").map(PathBuf::from))
                .or_else(|| cli.out.clone())
                .or_else(|| std::env::var_os("NECKLACE_OUT").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let mut entries: Vec<PathBuf> = std::fs::read_dir(&src)
                .map_err(|e| Failure::io(e, &format!("reading {}", src.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.extension().is_some_and(|x| x == "json")
                        && p.file_name().is_some_and(|n| n != "report.json")
                })
                .collect();
            entries.sort();
            let mut reports = Vec::new();
            for path in &entries {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::io(e, &format!("reading {}", path.display())))?;
                let value: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                let name = path.file_name().unwrap().to_string_lossy().into_owned();
                reports.push(serde_json::json!({ "file": name, "report": value }));
            }
            let doc = serde_json::json!({ "schema": 1, "reports": reports });
            let dir_out = out_dir(&cli.out, &cfg)?;
            write_file(
                &dir_out.join("report.json"),
                &serde_json::to_string_pretty(&doc).expect("report serialization"),
            )?;
            println!("aggregated {} reports", entries.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn usage(e: anyhow::Error) -> Failure {
    Failure::usage(e.to_string())
}

fn load_config(cli: &Cli, allowed: &[&str]) -> Result<ConfigFile, Failure> {
    match &cli.config {
        Some(path) => ConfigFile::load(path, allowed).map_err(|e| Failure::usage(e.to_string())),
        None => Ok(ConfigFile::default()),
    }
}

fn vertex_positions(grid: &std::sync::Arc<necklace_core::grid::GraphGrid>) -> Vec<f64> {
    (0..grid.n_nodes())
        .filter(|&i| matches!(grid.kind(i), necklace_core::grid::NodeKind::Vertex(_)))
        .map(|i| grid.x(i))
        .collect()
}

/// Parallel ε sweep: per-configuration solves are independent; results are
/// reassembled in grid order so outputs stay deterministic.
fn slaving_report_parallel(
    base: &BvpConfig,
    eps_grid: &[f64],
) -> Result<(necklace_core::modes::SlavingReport, Vec<necklace_core::modes::BvpSolution>), CoreError>
{
    use rayon::prelude::*;
    let solutions: Vec<necklace_core::modes::BvpSolution> = eps_grid
        .par_iter()
        .map(|&eps| {
            let mut cfg = *base;
            cfg.eps = eps;
            necklace_core::modes::solve_bvp(
                &cfg,
                necklace_core::modes::InitialGuess::ScaledHomoclinic,
            )
        })
        .collect::<Result<_, _>>()?;
    let report = necklace_core::modes::SlavingReport::from_solutions(base, &solutions);
    Ok((report, solutions))
}
