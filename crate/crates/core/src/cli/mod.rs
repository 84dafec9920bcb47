//! Command-line driver.
//!
//! Every subcommand resolves a [`RunConfig`] from defaults, an optional
//! TOML file and flags (in that order), writes its outputs under `--out`
//! together with the resolved `run.toml`, and returns a process exit code:
//! 0 on success, 1 when a run fails or a scenario misses a threshold, 2 on
//! a usage error.

pub mod config;
pub mod scenarios;
pub mod svg;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::covariance::{
    cylindrify, empirical_covariance, gaussian_curvature, AnalyticCovariance, CovarianceSurface,
    DEFAULT_N_MAX,
};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_row};
use crate::lpr::Bandwidth;
use crate::models::{simulate, EnsemblePaths};
use crate::wss_test::{default_eval_times, group_t_test, j_series, JSeries};

pub use config::{preset_model, BandwidthSpec, Overrides, RunConfig};
pub use scenarios::{run_scenario, Check, Scenario, ScenarioOutcome};

#[derive(Debug, Parser)]
#[command(
    name = "wssgeom",
    version,
    about = "Test wide-sense stationarity from ensemble data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in model: sdof, duffing1..duffing4, wiener, ou.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Number of sample paths N.
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Time step in seconds.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Simulated time span in seconds.
    #[arg(long, global = true)]
    pub duration: Option<f64>,
    /// Bandwidth rule h = C n^(-a): the constant C.
    #[arg(long, global = true)]
    pub bandwidth_c: Option<f64>,
    /// Bandwidth rule h = C n^(-a): the exponent a.
    #[arg(long, global = true)]
    pub bandwidth_a: Option<f64>,
    /// Fixed window half-width L in grid steps (h = L dt).
    #[arg(long, global = true)]
    pub window_l: Option<usize>,
    /// Number of path groups G for the t-test.
    #[arg(long, global = true)]
    pub groups: Option<usize>,
    /// Two-sided test level.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Grid steps between evaluation times (default L).
    #[arg(long, global = true)]
    pub stride: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "WSSGEOM_THREADS")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
}

impl CommonArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model.clone(),
            paths: self.paths,
            seed: self.seed,
            dt: self.dt,
            duration: self.duration,
            bandwidth_c: self.bandwidth_c,
            bandwidth_a: self.bandwidth_a,
            window_l: self.window_l,
            groups: self.groups,
            alpha: self.alpha,
            stride: self.stride,
            out: self.out.clone(),
            svg: self.svg,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an ensemble and write it as CSV.
    Simulate,
    /// Time series of j_hat on the diagonal.
    Jseries {
        /// Read paths from this ensemble CSV instead of simulating.
        #[arg(long, value_name = "PATH")]
        ensemble: Option<PathBuf>,
    },
    /// Grouped t-test at every evaluation time.
    Test {
        #[arg(long, value_name = "PATH")]
        ensemble: Option<PathBuf>,
    },
    /// Run a named experiment and check it against its thresholds.
    Reproduce {
        /// sdof, duffing1..duffing4, wiener or sample_size_sweep.
        scenario: String,
    },
    /// Gaussian curvature of a covariance surface on a sub-grid.
    Curvature {
        /// Covariance surface CSV.
        #[arg(long, value_name = "PATH", conflicts_with = "ensemble")]
        surface: Option<PathBuf>,
        /// Ensemble CSV whose empirical covariance is used.
        #[arg(long, value_name = "PATH")]
        ensemble: Option<PathBuf>,
    },
    /// Local cylindrification error for several patch sizes.
    Cylindrify {
        #[arg(long, value_name = "PATH", conflicts_with = "ensemble")]
        surface: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        ensemble: Option<PathBuf>,
        /// Patch side in seconds; repeat for a sweep (default 1, 0.5, 0.25).
        #[arg(long = "patch", value_name = "H")]
        patches: Vec<f64>,
    },
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// 1 for failures of the computation itself, 2 for bad input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. }
        | Error::IntegrationDiverged { .. }
        | Error::FitFailed { .. }
        | Error::DegenerateWindow { .. }
        | Error::EmptyWindow => 1,
        _ => 2,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let pool = match cli.common.threads {
        Some(0) => return Err(Error::Config("threads must be positive".into())),
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?,
        ),
        None => None,
    };
    match pool {
        Some(p) => p.install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let o = cli.common.overrides();
    let file = cli.common.config.as_deref();
    match &cli.command {
        Command::Reproduce { scenario } => {
            let scenario: Scenario = scenario.parse()?;
            let cfg = RunConfig::resolve_over(scenario.base_config(), file, &o)?;
            cmd_reproduce(scenario, &cfg)
        }
        cmd => {
            let cfg = RunConfig::resolve(file, &o)?;
            match cmd {
                Command::Simulate => cmd_simulate(&cfg).map(|_| 0),
                Command::Jseries { ensemble } => cmd_jseries(&cfg, ensemble.as_deref()).map(|_| 0),
                Command::Test { ensemble } => cmd_test(&cfg, ensemble.as_deref()).map(|_| 0),
                Command::Curvature { surface, ensemble } => {
                    cmd_curvature(&cfg, surface.as_deref(), ensemble.as_deref()).map(|_| 0)
                }
                Command::Cylindrify {
                    surface,
                    ensemble,
                    patches,
                } => cmd_cylindrify(&cfg, surface.as_deref(), ensemble.as_deref(), patches)
                    .map(|_| 0),
                Command::Reproduce { .. } => unreachable!(),
            }
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.ensure_out()?.to_path_buf();
    write_text(&out.join("run.toml"), &cfg.to_toml())?;
    Ok(out)
}

fn ensemble_for(cfg: &RunConfig, file: Option<&Path>) -> Result<EnsemblePaths> {
    match file {
        Some(p) => EnsemblePaths::load(p),
        None => simulate(&cfg.model, cfg.paths, cfg.seed),
    }
}

fn centered_for(cfg: &RunConfig, ens: &EnsemblePaths) -> bool {
    cfg.centered_for(ens.kind)
}

fn bandwidth_for(cfg: &RunConfig, ens: &EnsemblePaths) -> Result<Bandwidth> {
    cfg.bandwidth.resolve(ens.n_points(), ens.dt)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<PathBuf> {
    let out = prepare_out(cfg)?;
    let ens = simulate(&cfg.model, cfg.paths, cfg.seed)?;
    let path = out.join("ensemble.csv");
    ens.save(&path)?;
    println!(
        "wrote {} ({} paths x {} points)",
        path.display(),
        ens.n_paths(),
        ens.n_points()
    );
    Ok(path)
}

/// `# h= L= N= seed= centered=`, then `t,j_hat` rows.
pub fn write_jseries_csv<W: Write>(
    mut w: W,
    s: &JSeries,
    bw: &Bandwidth,
    n_paths: usize,
    seed: u64,
    centered: bool,
) -> std::io::Result<()> {
    writeln!(
        w,
        "# h={} L={} N={} seed={} centered={}",
        fmt_f64(bw.h),
        bw.l,
        n_paths,
        seed,
        centered as u8
    )?;
    writeln!(w, "t,j_hat")?;
    for (t, j) in s.times.iter().zip(&s.j_hat) {
        write_row(&mut w, &[*t, *j])?;
    }
    Ok(())
}

pub fn cmd_jseries(cfg: &RunConfig, ensemble: Option<&Path>) -> Result<PathBuf> {
    let out = prepare_out(cfg)?;
    let ens = ensemble_for(cfg, ensemble)?;
    let bw = bandwidth_for(cfg, &ens)?;
    let centered = centered_for(cfg, &ens);
    let times = default_eval_times(&ens, &bw, cfg.stride_for(&bw));
    let series = j_series(&ens, &times, &bw, centered)?;
    let path = out.join("jseries.csv");
    write_with(&path, |w| {
        write_jseries_csv(w, &series, &bw, ens.n_paths(), ens.seed, centered)
    })?;
    if cfg.svg {
        let title = format!("j_hat(t), N = {}, h = {:.4}", ens.n_paths(), bw.h);
        write_text(
            &out.join("jseries.svg"),
            &svg::line_plot(&title, &series.times, &series.j_hat, None),
        )?;
    }
    println!(
        "wrote {} ({} evaluation times)",
        path.display(),
        series.times.len()
    );
    Ok(path)
}

fn write_report_files(
    out: &Path,
    label: &str,
    r: &crate::wss_test::StationarityReport,
    svg: bool,
) -> Result<PathBuf> {
    let path = out.join(format!("{label}.csv"));
    r.save(&path)?;
    if svg {
        let title = format!(
            "{label}: j_hat with j_bar +- 2 S/sqrt(G), N = {}, G = {}",
            r.n_paths, r.groups
        );
        write_text(
            &out.join(format!("{label}_jhat.svg")),
            &svg::report_plot(&title, r),
        )?;
        let title = format!("{label}: two-sided test at alpha = {}", r.alpha);
        write_text(
            &out.join(format!("{label}_reject.svg")),
            &svg::reject_raster(&title, &r.times, &r.reject),
        )?;
    }
    Ok(path)
}

pub fn cmd_test(cfg: &RunConfig, ensemble: Option<&Path>) -> Result<PathBuf> {
    let out = prepare_out(cfg)?;
    let ens = ensemble_for(cfg, ensemble)?;
    let bw = bandwidth_for(cfg, &ens)?;
    let times = default_eval_times(&ens, &bw, cfg.stride_for(&bw));
    let r = group_t_test(
        &ens,
        &times,
        &bw,
        cfg.groups,
        cfg.alpha,
        centered_for(cfg, &ens),
    )?;
    drop(ens);
    let path = write_report_files(&out, "report", &r, cfg.svg)?;
    let rejected = r.reject.iter().filter(|&&x| x).count();
    println!(
        "wrote {} ({} of {} evaluation times rejected, t_crit = {:.4})",
        path.display(),
        rejected,
        r.len(),
        r.t_crit
    );
    Ok(path)
}

pub fn cmd_reproduce(scenario: Scenario, cfg: &RunConfig) -> Result<i32> {
    let out = prepare_out(cfg)?;
    let outcome = run_scenario(scenario, cfg)?;
    for (label, r) in &outcome.reports {
        let label = format!("{label}_report");
        write_report_files(&out, &label, r, cfg.svg)?;
    }
    let mut summary = format!("scenario {scenario}\n");
    for c in &outcome.checks {
        summary.push_str(&format!("{c}\n"));
    }
    let verdict = if outcome.passed() { "PASS" } else { "FAIL" };
    summary.push_str(&format!("{verdict}\n"));
    write_text(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(if outcome.passed() { 0 } else { 1 })
}

/// Grid coarsening that brings `n` points under the surface size limit.
fn coarsening(n: usize) -> usize {
    if n <= DEFAULT_N_MAX {
        1
    } else {
        (n - 1).div_ceil(DEFAULT_N_MAX - 1)
    }
}

/// The covariance surface a geometry command works on: a surface file,
/// the empirical covariance of an ensemble (file or simulated), or the
/// closed form of the configured model when it has one. Grids beyond the
/// size limit are coarsened.
pub fn surface_for(
    cfg: &RunConfig,
    surface: Option<&Path>,
    ensemble: Option<&Path>,
) -> Result<CovarianceSurface> {
    if let Some(p) = surface {
        return CovarianceSurface::load(p);
    }
    if ensemble.is_none() {
        if let Some(a) = AnalyticCovariance::for_spec(&cfg.model) {
            let k = coarsening(cfg.model.n_points());
            let dt = cfg.model.dt * k as f64;
            let n = (cfg.model.n_points() - 1) / k + 1;
            if k > 1 {
                log::info!("analytic surface on a coarsened grid, dt = {dt}");
            }
            return Ok(a.surface(n, dt, 0.0));
        }
    }
    let ens = ensemble_for(cfg, ensemble)?;
    let k = coarsening(ens.n_points());
    let ens = if k > 1 {
        log::info!("ensemble decimated by {k} for the covariance surface");
        ens.decimate(k)
    } else {
        ens
    };
    empirical_covariance(&ens, centered_for(cfg, &ens))
}

pub fn cmd_curvature(
    cfg: &RunConfig,
    surface: Option<&Path>,
    ensemble: Option<&Path>,
) -> Result<PathBuf> {
    let out = prepare_out(cfg)?;
    let surf = surface_for(cfg, surface, ensemble)?;
    let n = surf.len();
    if n < 3 {
        return Err(Error::InvalidSpec(
            "surface needs at least 3 grid points".into(),
        ));
    }
    let step = cfg.stride.unwrap_or_else(|| ((n - 2) / 50).max(1));
    let idx: Vec<usize> = (1..n - 1).step_by(step).collect();
    let path = out.join("curvature.csv");
    let mut max_abs = 0.0_f64;
    let mut rows = Vec::with_capacity(idx.len() * idx.len());
    for &i in &idx {
        for &j in &idx {
            let k = gaussian_curvature(&surf, i, j)?;
            max_abs = max_abs.max(k.abs());
            rows.push([surf.time(i), surf.time(j), k]);
        }
    }
    write_with(&path, |w| {
        writeln!(
            w,
            "# dt={} source={} step={}",
            fmt_f64(surf.dt),
            surf.source,
            step
        )?;
        writeln!(w, "s,t,k")?;
        for r in &rows {
            write_row(w, r)?;
        }
        Ok(())
    })?;
    println!(
        "wrote {} ({} points, max |K| = {:.3e})",
        path.display(),
        rows.len(),
        max_abs
    );
    Ok(path)
}

pub fn cmd_cylindrify(
    cfg: &RunConfig,
    surface: Option<&Path>,
    ensemble: Option<&Path>,
    patches: &[f64],
) -> Result<PathBuf> {
    let out = prepare_out(cfg)?;
    let surf = surface_for(cfg, surface, ensemble)?;
    let patches = if patches.is_empty() {
        vec![1.0, 0.5, 0.25]
    } else {
        patches.to_vec()
    };
    let mut rows = Vec::with_capacity(patches.len());
    let mut prev: Option<f64> = None;
    for &h in &patches {
        let res = cylindrify(&surf, h)?;
        let ratio = prev.map_or(f64::NAN, |p| p / res.l2_error);
        prev = Some(res.l2_error);
        println!(
            "h_patch = {:<8} patches = {:<6} error = {:.6e} ratio = {}",
            h,
            res.patch_count,
            res.l2_error,
            if ratio.is_nan() {
                "-".to_string()
            } else {
                format!("{ratio:.3}")
            }
        );
        rows.push((res, ratio));
    }
    let path = out.join("cylindrify.csv");
    write_with(&path, |w| {
        writeln!(w, "# dt={} source={}", fmt_f64(surf.dt), surf.source)?;
        writeln!(w, "h_patch,patches,l2_error,ratio")?;
        for (res, ratio) in &rows {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(res.h_patch),
                res.patch_count,
                fmt_f64(res.l2_error),
                fmt_f64(*ratio)
            )?;
        }
        Ok(())
    })?;
    println!("wrote {}", path.display());
    Ok(path)
}
