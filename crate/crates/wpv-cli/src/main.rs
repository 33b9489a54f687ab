//! `wpv`: exact Weil-Petersson volume polynomials, mixed intersection
//! numbers, generating-series emission, and the self-verification suites.
//!
//! Exit codes: 0 on success, 1 when a verification fails (or a runtime error
//! occurs), 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wpv_cli::cache;
use wpv_cli::formats::{
    poly_csv, poly_json, poly_latex, poly_text, series_csv, series_json, series_latex,
    series_text,
};
use wpv_cli::verify::{verify_cross, verify_kdv, verify_kernel, verify_virasoro, Report};
use wpv_cli::{Format, RunConfig};

use wpv_core::intersect::{bracket, BracketKey, BracketMemo};
use wpv_core::kdv::{assemble_f, assemble_g_direct};
use wpv_core::numkit::rat_to_string;
use wpv_core::polyalg::Window;
use wpv_core::volrec::{v_poly, vol_poly, volume_table, VolMemo};

#[derive(Parser)]
#[command(
    name = "wpv",
    version,
    about = "Exact Weil-Petersson volumes and intersection numbers"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print one volume polynomial Vol_{g,n} (P stands for pi^2).
    Volume {
        /// Genus.
        #[arg(long)]
        g: u32,
        /// Number of boundary components (at least 1).
        #[arg(long)]
        n: u32,
        /// Print the normalized polynomial v_{g,n} instead of Vol_{g,n}.
        #[arg(long)]
        normalized: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print one mixed intersection number < kappa1^k tau_{d1} ... tau_{dn} >_g.
    Intersect {
        /// Genus.
        #[arg(long)]
        g: u32,
        /// Exponent of kappa1.
        #[arg(long, default_value_t = 0)]
        kappa: u32,
        /// Comma-separated psi indices, one per marked point (e.g. 0,0,0,0,0).
        #[arg(long, required = true, value_delimiter = ',')]
        psi: Vec<u32>,
        /// Bracket cache file (overrides WPV_CACHE).
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Print all volume polynomials with complex dimension up to --dmax.
    Table {
        #[arg(long, default_value_t = 3)]
        dmax: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print a generating series: F (pure psi) or G (mixed kappa1/psi).
    Emit {
        #[arg(value_enum, ignore_case = true)]
        series: SeriesName,
        #[arg(long, default_value_t = 2)]
        gmax: u32,
        #[arg(long, default_value_t = 4)]
        nmax: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Bracket cache file (overrides WPV_CACHE).
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[command(subcommand)]
        suite: VerifyCmd,
    },
    /// Inspect or delete the bracket cache.
    Cache {
        #[command(subcommand)]
        action: CacheCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesName {
    F,
    G,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Quadrature vs closed-form kernel moments (CSV on stdout).
    Kernel {
        /// Largest single-moment index.
        #[arg(long, default_value_t = 4)]
        kmax: u32,
        /// Quadrature refinement tolerance.
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        tolerance: f64,
        /// Thread budget for the sweep.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Operator identities, constraint residuals, and the seed-free solver.
    Virasoro {
        #[arg(long, default_value_t = 2)]
        gmax: u32,
        #[arg(long, default_value_t = 4)]
        nmax: u32,
        /// Largest constraint index.
        #[arg(long, default_value_t = 6, allow_hyphen_values = true)]
        kmax: i64,
        /// Thread budget for the sweep.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// First KdV flow residual and the coupling-shift identity.
    Kdv {
        #[arg(long, default_value_t = 2)]
        gmax: u32,
        #[arg(long, default_value_t = 6)]
        nmax: u32,
    },
    /// Cross-pipeline equality of volumes, brackets, and kappa reduction.
    Cross {
        /// Largest complex dimension 3g-3+n.
        #[arg(long, default_value_t = 3)]
        dmax: u32,
        /// Bracket cache file (overrides WPV_CACHE).
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CacheCmd {
    /// Print the cache location and entry count.
    Info {
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Delete the cache file.
    Clear {
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

/// Restores the default SIGPIPE disposition so that writing into a closed
/// pipe (for example `wpv emit F | head`) terminates the process quietly the
/// way standard Unix filters do, instead of panicking on the failed write.
#[cfg(unix)]
fn reset_sigpipe() {
    // SAFETY: resetting a signal disposition to SIG_DFL before any other
    // threads exist has no preconditions.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Prints a usage error and returns the usage exit code.
fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn report_outcome(report: &Report) -> ExitCode {
    for line in &report.lines {
        println!("{line}");
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Loads the cache configured in `cfg` (if any); runs `body` against the
/// memo; reports load/compute counts on stderr and writes the cache back.
fn with_bracket_cache<T>(
    cfg: &RunConfig,
    body: impl FnOnce(&mut BracketMemo) -> T,
) -> Result<T> {
    let path = cache::resolve_path(cfg.cache_path.clone());
    let mut memo = match &path {
        Some(p) => cache::load(p),
        None => BracketMemo::new(),
    };
    let loaded = memo.len();
    let out = body(&mut memo);
    if let Some(p) = &path {
        let computed = memo.len() - loaded;
        eprintln!("cache: loaded {loaded} entries, computed {computed} new");
        cache::save(p, &memo)?;
    }
    Ok(out)
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Volume { g, n, normalized, format } => {
            if n == 0 || 2 * g + n <= 2 {
                return Ok(usage_error(&format!(
                    "unstable surface type ({g},{n}): need n >= 1 and 2g - 2 + n > 0"
                )));
            }
            let mut memo = VolMemo::new();
            let poly = if normalized {
                v_poly(g, n, &mut memo)
            } else {
                vol_poly(g, n, &mut memo)
            };
            match format {
                Format::Text => println!("{}", poly_text(&poly)),
                Format::Latex => println!("{}", poly_latex(&poly)),
                Format::Csv => print!("{}", poly_csv(&poly)),
                Format::Json => {
                    let value = json!({
                        "g": g,
                        "n": n,
                        "normalized": normalized,
                        "text": poly_text(&poly),
                        "polynomial": poly_json(&poly),
                    });
                    println!("{}", serde_json::to_string_pretty(&value)?);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Intersect { g, kappa, psi, cache } => {
            let n = psi.len() as u32;
            if n == 0 || 2 * g + n <= 2 {
                return Ok(usage_error(&format!(
                    "unstable surface type ({g},{n}): need n >= 1 and 2g - 2 + n > 0"
                )));
            }
            let cfg = RunConfig { cache_path: cache, ..RunConfig::default() };
            let value = with_bracket_cache(&cfg, |memo| {
                bracket(&BracketKey::new(g, kappa, psi.clone()), memo)
            })?;
            println!("{}", rat_to_string(&value));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Table { dmax, format } => {
            let mut memo = VolMemo::new();
            let rows = volume_table(dmax, &mut memo);
            match format {
                Format::Json => {
                    let value: Vec<_> = rows
                        .iter()
                        .map(|(g, n, v, vol)| {
                            json!({
                                "g": g,
                                "n": n,
                                "dim": 3 * g + n - 3,
                                "normalized": poly_text(v),
                                "volume": poly_text(vol),
                            })
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&value)?);
                }
                Format::Text => {
                    for (g, n, v, vol) in &rows {
                        let d = 3 * g + n - 3;
                        println!("dim {d} ({g},{n}): v = {}", poly_text(v));
                        println!("dim {d} ({g},{n}): Vol = {}", poly_text(vol));
                    }
                }
                Format::Csv => {
                    println!("g,n,dim,normalized,volume");
                    for (g, n, v, vol) in &rows {
                        println!("{g},{n},{},{},{}", 3 * g + n - 3, poly_text(v), poly_text(vol));
                    }
                }
                Format::Latex => {
                    for (g, n, _, vol) in &rows {
                        println!(
                            "V_{{{g},{n}}}(L) &= {} \\\\",
                            poly_latex(vol)
                        );
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Emit { series, gmax, nmax, format, cache } => {
            if nmax == 0 {
                return Ok(usage_error("nmax must be at least 1"));
            }
            let window = Window::bounded(gmax, nmax);
            let cfg = RunConfig { cache_path: cache, ..RunConfig::default() };
            let (name, built) = with_bracket_cache(&cfg, |memo| match series {
                SeriesName::F => ("F", assemble_f(window, memo)),
                SeriesName::G => ("G", assemble_g_direct(window, memo)),
            })?;
            match format {
                Format::Text => println!("{}", series_text(&built)),
                Format::Latex => println!("{}", series_latex(&built)),
                Format::Csv => print!("{}", series_csv(&built)),
                Format::Json => {
                    let value = json!({
                        "series": name,
                        "g_max": gmax,
                        "n_max": nmax,
                        "data": series_json(&built),
                    });
                    println!("{}", serde_json::to_string_pretty(&value)?);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { suite } => run_verify(suite),
        Cmd::Cache { action } => run_cache(action),
    }
}

fn run_verify(suite: VerifyCmd) -> Result<ExitCode> {
    match suite {
        VerifyCmd::Kernel { kmax, tolerance, parallelism } => {
            let cfg = RunConfig { tolerance, parallelism, ..RunConfig::default() };
            if let Err(msg) = cfg.validate() {
                return Ok(usage_error(&msg));
            }
            cfg.install_thread_pool();
            Ok(report_outcome(&verify_kernel(kmax, tolerance)))
        }
        VerifyCmd::Virasoro { gmax, nmax, kmax, parallelism } => {
            let cfg = RunConfig {
                g_max: gmax,
                n_max: nmax,
                parallelism,
                ..RunConfig::default()
            };
            if let Err(msg) = cfg.validate() {
                return Ok(usage_error(&msg));
            }
            if kmax < -1 {
                return Ok(usage_error("kmax must be at least -1"));
            }
            cfg.install_thread_pool();
            Ok(report_outcome(&verify_virasoro(gmax, nmax, kmax)))
        }
        VerifyCmd::Kdv { gmax, nmax } => {
            if nmax == 0 {
                return Ok(usage_error("nmax must be at least 1"));
            }
            Ok(report_outcome(&verify_kdv(gmax, nmax)))
        }
        VerifyCmd::Cross { dmax, cache } => {
            let cfg = RunConfig { d_max: dmax, cache_path: cache, ..RunConfig::default() };
            let report = with_bracket_cache(&cfg, |memo| verify_cross(dmax, memo))?;
            Ok(report_outcome(&report))
        }
    }
}

fn run_cache(action: CacheCmd) -> Result<ExitCode> {
    match action {
        CacheCmd::Info { cache: flag } => {
            let Some(path) = cache::resolve_path(flag) else {
                return Ok(usage_error("no cache configured: pass --cache or set WPV_CACHE"));
            };
            if !path.exists() {
                println!("cache {}: absent", path.display());
            } else {
                let memo = cache::load(&path);
                println!("cache {}: {} entries", path.display(), memo.len());
            }
            Ok(ExitCode::SUCCESS)
        }
        CacheCmd::Clear { cache: flag } => {
            let Some(path) = cache::resolve_path(flag) else {
                return Ok(usage_error("no cache configured: pass --cache or set WPV_CACHE"));
            };
            if path.exists() {
                std::fs::remove_file(&path)?;
                println!("removed {}", path.display());
            } else {
                println!("no cache at {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
