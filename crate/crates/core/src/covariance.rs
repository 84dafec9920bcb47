//! Covariance surfaces: empirical estimates from ensembles, closed-form
//! oracles, and finite-difference geometry diagnostics.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io;
use crate::lpr::SurfaceWindow;
use crate::models::{EnsemblePaths, ModelParams, ModelSpec, OuInit};

/// Largest grid that [`empirical_covariance`] materializes by default.
pub const DEFAULT_N_MAX: usize = 4001;

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSource {
    Empirical(usize),
    AnalyticSdof,
    AnalyticWiener,
    AnalyticOu,
    Synthetic(String),
}

impl fmt::Display for CovarianceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovarianceSource::Empirical(n) => write!(f, "empirical:{n}"),
            CovarianceSource::AnalyticSdof => f.write_str("analytic_sdof"),
            CovarianceSource::AnalyticWiener => f.write_str("analytic_wiener"),
            CovarianceSource::AnalyticOu => f.write_str("analytic_ou"),
            CovarianceSource::Synthetic(name) => write!(f, "synthetic:{name}"),
        }
    }
}

impl std::str::FromStr for CovarianceSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse("surface source", s);
        Ok(match s.split_once(':') {
            Some(("empirical", n)) => CovarianceSource::Empirical(n.parse().map_err(|_| bad())?),
            Some(("synthetic", name)) => CovarianceSource::Synthetic(name.to_string()),
            None => match s {
                "analytic_sdof" => CovarianceSource::AnalyticSdof,
                "analytic_wiener" => CovarianceSource::AnalyticWiener,
                "analytic_ou" => CovarianceSource::AnalyticOu,
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        })
    }
}

/// `r(s_i, t_j)` on a uniform square grid, row-major in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSurface {
    values: Vec<f64>,
    n: usize,
    pub dt: f64,
    pub t0: f64,
    pub centered: bool,
    pub source: CovarianceSource,
}

impl CovarianceSurface {
    pub fn from_fn(
        n: usize,
        dt: f64,
        t0: f64,
        source: CovarianceSource,
        f: impl Fn(f64, f64) -> f64 + Sync,
    ) -> Self {
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| f(t0 + (idx / n) as f64 * dt, t0 + (idx % n) as f64 * dt))
            .collect();
        CovarianceSurface {
            values,
            n,
            dt,
            t0,
            centered: false,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Sub-grid `[i0, i1] x [j0, j1]` (inclusive) as a fitting window.
    pub fn window(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> SurfaceWindow {
        let s = (i0..=i1).map(|i| self.time(i)).collect();
        let t = (j0..=j1).map(|j| self.time(j)).collect();
        let values = (i0..=i1)
            .flat_map(|i| self.row(i)[j0..=j1].iter().copied())
            .collect();
        SurfaceWindow { s, t, values }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# dt={} t0={} centered={} source={}",
            self.dt, self.t0, self.centered as u8, self.source
        )?;
        for i in 0..self.n {
            io::write_row(&mut w, self.row(i))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        const WHAT: &str = "surface csv";
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(WHAT, "empty input"))?
            .map_err(|e| Error::parse(WHAT, e.to_string()))?;
        let h = io::parse_header(&header, WHAT)?;
        let dt: f64 = h.num("dt")?;
        let t0: f64 = h.num("t0")?;
        let centered = match h.get("centered")? {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(WHAT, format!("centered={other}"))),
        };
        let source: CovarianceSource = h.get("source")?.parse()?;
        let mut values = Vec::new();
        let mut n = 0;
        for line in lines {
            let line = line.map_err(|e| Error::parse(WHAT, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            values.extend(io::parse_row(&line, WHAT)?);
            n += 1;
        }
        if values.len() != n * n {
            return Err(Error::parse(WHAT, "matrix is not square"));
        }
        Ok(CovarianceSurface {
            values,
            n,
            dt,
            t0,
            centered,
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Empirical covariance evaluated on demand over a block of paths.
///
/// Every cell is `(1/N) sum_k x_k(s) x_k(t)` (after subtracting the
/// per-time block mean when centered), summed in ascending path order, so
/// a window is bit-identical however it is requested.
#[derive(Debug, Clone)]
pub struct LazyCovariance<'a> {
    ensemble: &'a EnsemblePaths,
    paths: std::ops::Range<usize>,
    means: Option<Vec<f64>>,
}

impl<'a> LazyCovariance<'a> {
    pub fn new(ensemble: &'a EnsemblePaths, centered: bool) -> Result<Self> {
        Self::for_paths(ensemble, 0..ensemble.n_paths(), centered)
    }

    /// Restricts the estimate to paths `paths` (one group of the t-test).
    pub fn for_paths(
        ensemble: &'a EnsemblePaths,
        paths: std::ops::Range<usize>,
        centered: bool,
    ) -> Result<Self> {
        let count = paths.len();
        if count == 0 || paths.end > ensemble.n_paths() {
            return Err(Error::EmptyEnsemble);
        }
        if centered && count < 2 {
            return Err(Error::InvalidSpec(
                "centered covariance needs at least two paths".into(),
            ));
        }
        let means = centered.then(|| {
            let mut m = vec![0.0; ensemble.n_points()];
            for k in paths.clone() {
                for (acc, x) in m.iter_mut().zip(ensemble.path(k)) {
                    *acc += x;
                }
            }
            let inv = 1.0 / count as f64;
            m.iter_mut().for_each(|x| *x *= inv);
            m
        });
        Ok(LazyCovariance {
            ensemble,
            paths,
            means,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn centered(&self) -> bool {
        self.means.is_some()
    }

    /// Square window of grid indices `[lo, hi]` on both axes.
    pub fn square_window(&self, lo: usize, hi: usize) -> SurfaceWindow {
        let m = hi - lo + 1;
        let mut acc = vec![0.0; m * m];
        let mut buf = vec![0.0; m];
        for k in self.paths.clone() {
            let x = &self.ensemble.path(k)[lo..=hi];
            match &self.means {
                Some(mu) => {
                    for ((b, xi), mi) in buf.iter_mut().zip(x).zip(&mu[lo..=hi]) {
                        *b = xi - mi;
                    }
                }
                None => buf.copy_from_slice(x),
            }
            for a in 0..m {
                let xa = buf[a];
                let row = &mut acc[a * m..(a + 1) * m];
                for (cell, &xb) in row[a..].iter_mut().zip(&buf[a..]) {
                    *cell += xa * xb;
                }
            }
        }
        let count = self.n_paths() as f64;
        for a in 0..m {
            for b in a..m {
                let v = acc[a * m + b] / count;
                acc[a * m + b] = v;
                acc[b * m + a] = v;
            }
        }
        let axis: Vec<f64> = (lo..=hi).map(|i| self.ensemble.time(i)).collect();
        SurfaceWindow {
            s: axis.clone(),
            t: axis,
            values: acc,
        }
    }

    /// Single cell `r(s_i, t_j)`.
    pub fn cell(&self, i: usize, j: usize) -> f64 {
        let mut acc = 0.0;
        for k in self.paths.clone() {
            let p = self.ensemble.path(k);
            acc += match &self.means {
                Some(mu) => (p[i] - mu[i]) * (p[j] - mu[j]),
                None => p[i] * p[j],
            };
        }
        acc / self.n_paths() as f64
    }
}

/// Full `n x n` empirical covariance of an ensemble with at most
/// [`DEFAULT_N_MAX`] grid points. Use [`LazyCovariance`] for longer grids
/// or [`EnsemblePaths::decimate`] first.
pub fn empirical_covariance(ensemble: &EnsemblePaths, centered: bool) -> Result<CovarianceSurface> {
    empirical_covariance_with_limit(ensemble, centered, DEFAULT_N_MAX)
}

pub fn empirical_covariance_with_limit(
    ensemble: &EnsemblePaths,
    centered: bool,
    n_max: usize,
) -> Result<CovarianceSurface> {
    let n = ensemble.n_points();
    if n > n_max {
        return Err(Error::SurfaceTooLarge { n, n_max });
    }
    let lazy = LazyCovariance::new(ensemble, centered)?;
    // Upper triangle row by row, then mirrored so symmetry is exact.
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| lazy.cell(i, j)).collect())
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(CovarianceSurface {
        values,
        n,
        dt: ensemble.dt,
        t0: ensemble.t0,
        centered,
        source: CovarianceSource::Empirical(ensemble.n_paths()),
    })
}

/// Covariance of the SDOF oscillator started from rest, driven by white
/// noise of spectral density `s0` (so `D = 2 pi s0`).
///
/// The stationary part depends on `|t2 - t1|` only; the transient part
/// decays like `exp(-zeta omega_n (t1 + t2))`.
pub fn analytic_sdof_covariance(
    mass: f64,
    zeta: f64,
    omega_n: f64,
    s0: f64,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::UnsupportedDamping(zeta));
    }
    let zw = zeta * omega_n;
    let wd = omega_n * (1.0 - zeta * zeta).sqrt();
    let amp = std::f64::consts::PI * s0 / (2.0 * mass * mass * zeta * omega_n.powi(3));
    let lag = (t2 - t1).abs();
    let sum = t1 + t2;
    let stationary = (-zw * lag).exp() * ((wd * lag).cos() + zw / wd * (wd * lag).sin());
    let ratio = omega_n / wd;
    let transient = (-zw * sum).exp()
        * (ratio * ratio * (wd * lag).cos() + zw / wd * (wd * sum).sin()
            - zeta * zeta * ratio * ratio * (wd * sum).cos());
    Ok(amp * (stationary - transient))
}

/// Closed-form covariance oracles for the built-in models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticCovariance {
    /// SDOF from rest with spectral density `s0`.
    Sdof {
        mass: f64,
        zeta: f64,
        omega_n: f64,
        s0: f64,
    },
    Wiener {
        sigma: f64,
    },
    /// OU in its stationary regime.
    OuStationary {
        theta: f64,
        sigma: f64,
    },
}

impl AnalyticCovariance {
    /// Oracle for a simulated model, when one exists. SDOF uses the
    /// convention `S0 = D / (2 pi)`.
    pub fn for_spec(spec: &ModelSpec) -> Option<Self> {
        match spec.params {
            ModelParams::Sdof {
                mass,
                noise,
                x0,
                v0,
                ..
            } if x0 == 0.0 && v0 == 0.0 => {
                let (zeta, omega_n) = spec.sdof_modal()?;
                (zeta > 0.0 && zeta < 1.0).then_some(AnalyticCovariance::Sdof {
                    mass,
                    zeta,
                    omega_n,
                    s0: noise / (2.0 * std::f64::consts::PI),
                })
            }
            ModelParams::Wiener { sigma } => Some(AnalyticCovariance::Wiener { sigma }),
            ModelParams::Ou {
                theta,
                sigma,
                init: OuInit::Stationary,
            } => Some(AnalyticCovariance::OuStationary { theta, sigma }),
            _ => None,
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match *self {
            AnalyticCovariance::Sdof {
                mass,
                zeta,
                omega_n,
                s0,
            } => analytic_sdof_covariance(mass, zeta, omega_n, s0, s, t)
                .expect("zeta validated at construction"),
            AnalyticCovariance::Wiener { sigma } => sigma * sigma * s.min(t),
            AnalyticCovariance::OuStationary { theta, sigma } => {
                sigma * sigma / (2.0 * theta) * (-theta * (s - t).abs()).exp()
            }
        }
    }

    pub fn source(&self) -> CovarianceSource {
        match self {
            AnalyticCovariance::Sdof { .. } => CovarianceSource::AnalyticSdof,
            AnalyticCovariance::Wiener { .. } => CovarianceSource::AnalyticWiener,
            AnalyticCovariance::OuStationary { .. } => CovarianceSource::AnalyticOu,
        }
    }

    pub fn surface(&self, n: usize, dt: f64, t0: f64) -> CovarianceSurface {
        let oracle = *self;
        CovarianceSurface::from_fn(n, dt, t0, self.source(), move |s, t| oracle.eval(s, t))
    }
}

/// Gaussian curvature of the graph of `r` at interior node `(i, j)`,
/// with second-order central differences.
pub fn gaussian_curvature(surface: &CovarianceSurface, i: usize, j: usize) -> Result<f64> {
    let n = surface.len();
    if i == 0 || j == 0 || i + 1 >= n || j + 1 >= n {
        return Err(Error::IndexOutOfInterior { i, j, n });
    }
    let f = |a: usize, b: usize| surface.get(a, b);
    let h = surface.dt;
    let fs = (f(i + 1, j) - f(i - 1, j)) / (2.0 * h);
    let ft = (f(i, j + 1) - f(i, j - 1)) / (2.0 * h);
    let fss = (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) / (h * h);
    let ftt = (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) / (h * h);
    let fst =
        (f(i + 1, j + 1) - f(i + 1, j - 1) - f(i - 1, j + 1) + f(i - 1, j - 1)) / (4.0 * h * h);
    let g = 1.0 + fs * fs + ft * ft;
    Ok((fss * ftt - fst * fst) / (g * g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylindrificationResult {
    pub h_patch: f64,
    pub patch_count: usize,
    /// Discrete L2 norm over the square, `sqrt(dt^2 * sum residual^2)`.
    pub l2_error: f64,
}

/// Piecewise tangent-plane approximation on square patches of side at
/// most `h_patch`, and its L2 distance to the surface.
///
/// Each patch is approximated by the first-order Taylor plane at its
/// center node, with gradients from central differences (one-sided
/// second-order stencils on the domain edge).
pub fn cylindrify(surface: &CovarianceSurface, h_patch: f64) -> Result<CylindrificationResult> {
    let dt = surface.dt;
    let n = surface.len();
    if !(h_patch >= 2.0 * dt * (1.0 - 1e-9)) {
        return Err(Error::PatchTooSmall {
            h_patch,
            min: 2.0 * dt,
        });
    }
    let span = (n - 1) as f64 * dt;
    if h_patch > span * (1.0 + 1e-9) {
        return Err(Error::InvalidSpec(format!(
            "patch size {h_patch} exceeds the domain length {span}"
        )));
    }
    // Points per patch side; the side spans (m - 1) dt <= h_patch.
    let m = ((h_patch / dt) * (1.0 + 1e-9)).floor() as usize + 1;
    let blocks: Vec<(usize, usize)> = (0..n).step_by(m).map(|b| (b, (b + m).min(n))).collect();

    let partials: Vec<f64> = blocks
        .par_iter()
        .map(|&(i0, i1)| {
            let mut sq = 0.0;
            for &(j0, j1) in &blocks {
                let ci = i0 + (i1 - i0 - 1) / 2;
                let cj = j0 + (j1 - j0 - 1) / 2;
                let (gs, gt) = gradient(surface, ci, cj);
                let r0 = surface.get(ci, cj);
                for i in i0..i1 {
                    let ds = (i as f64 - ci as f64) * dt;
                    let row = surface.row(i);
                    for (j, &r) in row.iter().enumerate().take(j1).skip(j0) {
                        let dtt = (j as f64 - cj as f64) * dt;
                        let e = r - (r0 + gs * ds + gt * dtt);
                        sq += e * e;
                    }
                }
            }
            sq
        })
        .collect();
    let sq: f64 = partials.iter().sum();
    Ok(CylindrificationResult {
        h_patch,
        patch_count: blocks.len() * blocks.len(),
        l2_error: (sq * dt * dt).sqrt(),
    })
}

fn gradient(surface: &CovarianceSurface, i: usize, j: usize) -> (f64, f64) {
    let n = surface.len();
    let h = surface.dt;
    let d = |at: usize, get: &dyn Fn(usize) -> f64| -> f64 {
        if n < 3 {
            (get(1) - get(0)) / h
        } else if at == 0 {
            (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h)
        } else if at + 1 == n {
            (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / (2.0 * h)
        } else {
            (get(at + 1) - get(at - 1)) / (2.0 * h)
        }
    };
    let gs = d(i, &|a| surface.get(a, j));
    let gt = d(j, &|b| surface.get(i, b));
    (gs, gt)
}
