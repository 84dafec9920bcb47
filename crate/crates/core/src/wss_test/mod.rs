//! The stationarity statistic `J = r_s + r_t` on the diagonal and the
//! grouped t-test built on it.
//!
//! For a WSS process the covariance surface is a cylinder ruled along
//! `(1, 1)`, so its directional derivative `J` vanishes everywhere. Each
//! evaluation time gets a local linear fit of the empirical covariance in
//! a 2D window around `(t, t)`; `J` is the sum of the fitted slopes.

pub mod student_t;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

pub use student_t::{student_t_cdf, student_t_pdf, student_t_quantile};

use crate::covariance::LazyCovariance;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::lpr::{local_linear_fit, Bandwidth, LocalLinearFit};
use crate::models::EnsemblePaths;

pub fn j_statistic(fit: &LocalLinearFit) -> f64 {
    fit.beta1 + fit.beta2
}

/// Diagonal evaluation times `t0 + k dt` for `k = L, L + stride, ...`,
/// keeping only points whose window lies fully inside the grid.
pub fn default_eval_times(ensemble: &EnsemblePaths, bw: &Bandwidth, stride: usize) -> Vec<f64> {
    let n = ensemble.n_points();
    let stride = stride.max(1);
    if n <= 2 * bw.l {
        return Vec::new();
    }
    (bw.l..n - bw.l)
        .step_by(stride)
        .map(|i| ensemble.time(i))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JSeries {
    pub times: Vec<f64>,
    pub j_hat: Vec<f64>,
    pub fits: Vec<LocalLinearFit>,
}

fn eval_indices(ensemble: &EnsemblePaths, times: &[f64]) -> Result<Vec<usize>> {
    times
        .iter()
        .map(|&t| ensemble.index_of(t).ok_or(Error::TimeOutOfRange(t)))
        .collect()
}

fn fit_at(
    cov: &LazyCovariance<'_>,
    ensemble: &EnsemblePaths,
    c: usize,
    bw: &Bandwidth,
) -> Result<LocalLinearFit> {
    let lo = c.saturating_sub(bw.l);
    let hi = (c + bw.l).min(ensemble.n_points() - 1);
    let window = cov.square_window(lo, hi);
    let t = ensemble.time(c);
    local_linear_fit(&window, (t, t), bw.h).map_err(|e| Error::FitFailed {
        time: t,
        source: Box::new(e),
    })
}

/// `J-hat` at each evaluation time from the whole ensemble.
///
/// Only the covariance window each fit needs is formed, so memory stays
/// `O(L^2)` per worker regardless of the grid length.
pub fn j_series(
    ensemble: &EnsemblePaths,
    eval_times: &[f64],
    bw: &Bandwidth,
    centered: bool,
) -> Result<JSeries> {
    let idx = eval_indices(ensemble, eval_times)?;
    let cov = LazyCovariance::new(ensemble, centered)?;
    let fits = idx
        .par_iter()
        .map(|&c| fit_at(&cov, ensemble, c, bw))
        .collect::<Result<Vec<_>>>()?;
    Ok(JSeries {
        times: idx.iter().map(|&c| ensemble.time(c)).collect(),
        j_hat: fits.iter().map(j_statistic).collect(),
        fits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub times: Vec<f64>,
    pub j_hat: Vec<f64>,
    /// `group_values[g][i]`: group `g` at time `i`.
    pub group_values: Vec<Vec<f64>>,
    pub j_bar: Vec<f64>,
    pub s_std: Vec<f64>,
    pub t_stat: Vec<f64>,
    pub t_crit: f64,
    pub reject: Vec<bool>,
    pub groups: usize,
    pub alpha: f64,
    pub bandwidth: Bandwidth,
    pub n_paths: usize,
    pub seed: u64,
    pub centered: bool,
}

/// Group summary for one time point: mean, sample standard deviation,
/// t statistic and decision.
///
/// A zero spread with a nonzero mean is reported as `T = +inf` (reject);
/// zero spread and zero mean gives `T = 0` (accept).
pub fn group_decision(values: &[f64], t_crit: f64) -> (f64, f64, f64, bool) {
    let g = values.len() as f64;
    let mean = values.iter().sum::<f64>() / g;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (g - 1.0);
    let sd = var.sqrt();
    if sd > 0.0 {
        let t = mean / (sd / g.sqrt());
        (mean, sd, t, t.abs() > t_crit)
    } else if mean == 0.0 {
        (mean, sd, 0.0, false)
    } else {
        (mean, sd, f64::INFINITY, true)
    }
}

/// Splits the paths into `groups` contiguous blocks, estimates `J` in each,
/// and tests `E[J] = 0` at every evaluation time with a two-sided
/// `t_{G-1}` test at level `alpha`.
pub fn group_t_test(
    ensemble: &EnsemblePaths,
    eval_times: &[f64],
    bw: &Bandwidth,
    groups: usize,
    alpha: f64,
    centered: bool,
) -> Result<StationarityReport> {
    let n = ensemble.n_paths();
    if groups < 2 || n % groups != 0 {
        return Err(Error::BadGrouping { paths: n, groups });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadProbability(alpha));
    }
    let t_crit = student_t_quantile((groups - 1) as u32, 1.0 - alpha / 2.0)?;
    let per = n / groups;
    let covs = (0..groups)
        .map(|g| LazyCovariance::for_paths(ensemble, g * per..(g + 1) * per, centered))
        .collect::<Result<Vec<_>>>()?;

    let full = j_series(ensemble, eval_times, bw, centered)?;
    let idx = eval_indices(ensemble, eval_times)?;
    let per_time: Vec<Vec<f64>> = idx
        .par_iter()
        .map(|&c| {
            covs.iter()
                .map(|cov| fit_at(cov, ensemble, c, bw).map(|f| j_statistic(&f)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let m = idx.len();
    let mut group_values = vec![vec![0.0; m]; groups];
    let (mut j_bar, mut s_std, mut t_stat, mut reject) = (
        Vec::with_capacity(m),
        Vec::with_capacity(m),
        Vec::with_capacity(m),
        Vec::with_capacity(m),
    );
    for (i, vals) in per_time.iter().enumerate() {
        for (g, &v) in vals.iter().enumerate() {
            group_values[g][i] = v;
        }
        let (mean, sd, t, rej) = group_decision(vals, t_crit);
        j_bar.push(mean);
        s_std.push(sd);
        t_stat.push(t);
        reject.push(rej);
    }
    Ok(StationarityReport {
        times: full.times,
        j_hat: full.j_hat,
        group_values,
        j_bar,
        s_std,
        t_stat,
        t_crit,
        reject,
        groups,
        alpha,
        bandwidth: *bw,
        n_paths: n,
        seed: ensemble.seed,
        centered,
    })
}

impl StationarityReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn in_range(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        self.times
            .iter()
            .enumerate()
            .filter(move |(_, &t)| t >= lo && t <= hi)
            .map(|(i, _)| i)
    }

    /// Fraction of evaluation points in `[lo, hi]` that reject; `None` if
    /// the interval holds no point.
    pub fn rejection_fraction(&self, lo: f64, hi: f64) -> Option<f64> {
        let (mut k, mut r) = (0usize, 0usize);
        for i in self.in_range(lo, hi) {
            k += 1;
            r += self.reject[i] as usize;
        }
        (k > 0).then(|| r as f64 / k as f64)
    }

    pub fn mean_j_hat(&self, lo: f64, hi: f64) -> Option<f64> {
        let v: Vec<f64> = self.in_range(lo, hi).map(|i| self.j_hat[i]).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Start of sustained acceptance: the earliest evaluation time `t*`
    /// such that every window `[t, t + window]` with `t >= t*` (and ending
    /// inside the series) has an accepted fraction of at least
    /// `min_accept`. `None` if even the last window fails.
    pub fn acceptance_onset(&self, window: f64, min_accept: f64) -> Option<f64> {
        let m = self.len();
        if m == 0 {
            return None;
        }
        let t_last = self.times[m - 1];
        // Prefix counts of accepted points.
        let mut acc = vec![0usize; m + 1];
        for i in 0..m {
            acc[i + 1] = acc[i] + (!self.reject[i]) as usize;
        }
        let window = window.min(t_last - self.times[0]);
        let mut last_fail = None;
        let mut last_checked = 0;
        let mut hi = 0;
        for lo in 0..m {
            if self.times[lo] + window > t_last + 1e-9 {
                break;
            }
            while hi < m && self.times[hi] <= self.times[lo] + window + 1e-9 {
                hi += 1;
            }
            let frac = (acc[hi] - acc[lo]) as f64 / (hi - lo) as f64;
            if frac < min_accept {
                last_fail = Some(lo);
            }
            last_checked = lo;
        }
        match last_fail {
            None => Some(self.times[0]),
            Some(f) if f == last_checked => None,
            Some(f) => Some(self.times[f + 1]),
        }
    }

    /// Report CSV: a `# G= alpha= h= L= N= seed=` line, a column header,
    /// then one row per evaluation time.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# G={} alpha={} h={} L={} N={} seed={}",
            self.groups, self.alpha, self.bandwidth.h, self.bandwidth.l, self.n_paths, self.seed
        )?;
        writeln!(w, "t,j_hat,j_bar,s_std,t_stat,t_crit,reject")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_f64(self.times[i]),
                fmt_f64(self.j_hat[i]),
                fmt_f64(self.j_bar[i]),
                fmt_f64(self.s_std[i]),
                fmt_f64(self.t_stat[i]),
                fmt_f64(self.t_crit),
                self.reject[i] as u8
            )?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Predicted end of the SDOF transient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsetPrediction {
    pub epsilon: f64,
    /// Threshold on `t1 + t2`.
    pub t_onset: f64,
    /// The same threshold on the diagonal `t1 = t2`, i.e. `t_onset / 2`.
    pub t_diagonal: f64,
}

/// `t1 + t2 >= ln(1/epsilon) / (2 zeta omega_n)`.
pub fn sdof_onset(zeta: f64, omega_n: f64, epsilon: f64) -> Result<OnsetPrediction> {
    if !(zeta > 0.0 && omega_n > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "onset needs zeta > 0 and omega_n > 0, got {zeta}, {omega_n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "epsilon must be in (0, 1], got {epsilon}"
        )));
    }
    let t_onset = (1.0 / epsilon).ln() / (2.0 * zeta * omega_n);
    Ok(OnsetPrediction {
        epsilon,
        t_onset,
        t_diagonal: t_onset / 2.0,
    })
}
