//! Named experiments with pass/fail thresholds.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{duffing_case, simulate, ModelSpec};
use crate::wss_test::{default_eval_times, group_t_test, StationarityReport};

use super::config::{preset_model, RunConfig};

/// Sliding window, in seconds, used to decide sustained acceptance.
pub const ONSET_WINDOW: f64 = 10.0;
/// Accepted fraction every such window must reach.
pub const ONSET_MIN_ACCEPT: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Sdof,
    Duffing(usize),
    Wiener,
    SampleSizeSweep,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Sdof,
        Scenario::Duffing(1),
        Scenario::Duffing(2),
        Scenario::Duffing(3),
        Scenario::Duffing(4),
        Scenario::Wiener,
        Scenario::SampleSizeSweep,
    ];

    pub fn model(self) -> ModelSpec {
        match self {
            Scenario::Sdof | Scenario::SampleSizeSweep => preset_model("sdof"),
            Scenario::Duffing(k) => duffing_case(k),
            Scenario::Wiener => preset_model("wiener"),
        }
        .expect("built-in scenario model")
    }

    /// Defaults for this scenario before any file or flag.
    pub fn base_config(self) -> RunConfig {
        RunConfig {
            model: self.model(),
            ..RunConfig::default()
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Sdof => f.write_str("sdof"),
            Scenario::Duffing(k) => write!(f, "duffing{k}"),
            Scenario::Wiener => f.write_str("wiener"),
            Scenario::SampleSizeSweep => f.write_str("sample_size_sweep"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let names: Vec<String> = Scenario::ALL.iter().map(|s| s.to_string()).collect();
                Error::Config(format!(
                    "unknown scenario {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// One threshold of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// What was measured, human readable.
    pub observed: String,
    /// The threshold, human readable.
    pub expected: String,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, observed: String, expected: &str, passed: bool) -> Self {
        Check {
            name: name.to_string(),
            observed,
            expected: expected.to_string(),
            passed,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} (want {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.expected
        )
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    /// Labelled reports; the label becomes part of the file name.
    pub reports: Vec<(String, StationarityReport)>,
    pub checks: Vec<Check>,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn report(&self, label: &str) -> Option<&StationarityReport> {
        self.reports
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, r)| r)
    }
}

/// Simulate `n_paths` of `spec` and run the grouped test with the
/// settings of `cfg`. The ensemble is dropped before returning.
pub fn test_model(cfg: &RunConfig, spec: &ModelSpec, n_paths: usize) -> Result<StationarityReport> {
    let ensemble = simulate(spec, n_paths, cfg.seed)?;
    let bw = cfg.bandwidth.resolve(spec.n_points(), spec.dt)?;
    let times = default_eval_times(&ensemble, &bw, cfg.stride_for(&bw));
    group_t_test(
        &ensemble,
        &times,
        &bw,
        cfg.groups,
        cfg.alpha,
        cfg.centered_for(spec.kind()),
    )
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |v| format!("{v:.4}"))
}

fn in_range(x: Option<f64>, lo: f64, hi: f64) -> bool {
    x.is_some_and(|v| v >= lo && v <= hi)
}

fn onset(r: &StationarityReport) -> Option<f64> {
    r.acceptance_onset(ONSET_WINDOW, ONSET_MIN_ACCEPT)
}

pub fn sdof_checks(r: &StationarityReport) -> Vec<Check> {
    let on = onset(r);
    let early = r.rejection_fraction(0.5, 8.0);
    let first = r.j_hat.first().copied();
    let late = r.mean_j_hat(30.0, 200.0);
    vec![
        Check::new(
            "acceptance onset [s]",
            fmt_opt(on),
            "in [12, 22]",
            in_range(on, 12.0, 22.0),
        ),
        Check::new(
            "rejected fraction on [0.5, 8]",
            fmt_opt(early),
            ">= 0.9",
            early.is_some_and(|f| f >= 0.9),
        ),
        Check::new(
            "j_hat at first interior point",
            match first {
                Some(v) => format!("{v:.4} at t = {:.3}", r.times[0]),
                None => "none".into(),
            },
            "in [0.1, 0.3]",
            in_range(first, 0.1, 0.3),
        ),
        Check::new(
            "mean j_hat on [30, 200]",
            fmt_opt(late),
            "in [-0.05, 0.05]",
            in_range(late, -0.05, 0.05),
        ),
    ]
}

pub fn wiener_checks(r: &StationarityReport) -> Vec<Check> {
    let (lo, hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mean = r.mean_j_hat(lo, hi);
    let rej = r.rejection_fraction(lo, hi);
    vec![
        Check::new(
            "mean j_hat",
            fmt_opt(mean),
            "in [0.85, 1.15]",
            in_range(mean, 0.85, 1.15),
        ),
        Check::new(
            "rejected fraction",
            fmt_opt(rej),
            ">= 0.95",
            rej.is_some_and(|f| f >= 0.95),
        ),
    ]
}

pub fn duffing_checks(case: usize, r: &StationarityReport) -> Vec<Check> {
    if case == 2 {
        let rej = r.rejection_fraction(50.0, 200.0);
        vec![Check::new(
            "rejected fraction on [50, 200]",
            fmt_opt(rej),
            ">= 0.5",
            rej.is_some_and(|f| f >= 0.5),
        )]
    } else {
        let on = onset(r);
        vec![Check::new(
            "acceptance onset [s]",
            fmt_opt(on),
            "exists",
            on.is_some(),
        )]
    }
}

/// Case 4 must settle later than case 1.
pub fn duffing_order_check(case1: &StationarityReport, case4: &StationarityReport) -> Check {
    let (a, b) = (onset(case1), onset(case4));
    Check::new(
        "case 4 onset later than case 1",
        format!("{} vs {}", fmt_opt(b), fmt_opt(a)),
        "case 4 > case 1",
        matches!((a, b), (Some(a), Some(b)) if b > a),
    )
}

/// Standard deviation of `j_hat` over `[lo, hi]`.
pub fn j_hat_spread(r: &StationarityReport, lo: f64, hi: f64) -> Option<f64> {
    let v: Vec<f64> = r
        .times
        .iter()
        .zip(&r.j_hat)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(_, j)| *j)
        .collect();
    if v.len() < 2 {
        return None;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    Some((v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt())
}

/// Ensemble sizes of the sweep: a quarter, half and all of `paths`.
pub fn sweep_sizes(paths: usize) -> Vec<usize> {
    vec![paths / 4, paths / 2, paths]
}

pub fn run_scenario(scenario: Scenario, cfg: &RunConfig) -> Result<ScenarioOutcome> {
    let (reports, checks) = match scenario {
        Scenario::Sdof => {
            let r = test_model(cfg, &cfg.model, cfg.paths)?;
            let checks = sdof_checks(&r);
            (vec![("sdof".to_string(), r)], checks)
        }
        Scenario::Wiener => {
            let r = test_model(cfg, &cfg.model, cfg.paths)?;
            let checks = wiener_checks(&r);
            (vec![("wiener".to_string(), r)], checks)
        }
        Scenario::Duffing(case) => {
            let r = test_model(cfg, &cfg.model, cfg.paths)?;
            let mut checks = duffing_checks(case, &r);
            let mut reports = vec![(format!("duffing{case}"), r)];
            if case == 4 {
                let spec1 = duffing_case(1)?.with_grid(cfg.model.dt, cfg.model.duration);
                let r1 = test_model(cfg, &spec1, cfg.paths)?;
                checks.push(duffing_order_check(&r1, &reports[0].1));
                reports.push(("duffing1".to_string(), r1));
            }
            (reports, checks)
        }
        Scenario::SampleSizeSweep => {
            let mut reports = Vec::new();
            for n in sweep_sizes(cfg.paths) {
                if n < cfg.groups || n % cfg.groups != 0 {
                    return Err(Error::BadGrouping {
                        paths: n,
                        groups: cfg.groups,
                    });
                }
                reports.push((format!("n{n}"), test_model(cfg, &cfg.model, n)?));
            }
            let (lo, hi) = (30.0, cfg.model.duration);
            let spreads: Vec<Option<f64>> = reports
                .iter()
                .map(|(_, r)| j_hat_spread(r, lo, hi))
                .collect();
            let shrinking =
                spreads.iter().all(Option::is_some) && spreads.windows(2).all(|w| w[1] < w[0]);
            let observed: Vec<String> = spreads.iter().map(|s| fmt_opt(*s)).collect();
            let check = Check::new(
                "sd of j_hat on [30, end] across N",
                observed.join(" > "),
                "decreasing in N",
                shrinking,
            );
            (reports, vec![check])
        }
    };
    Ok(ScenarioOutcome {
        scenario,
        reports,
        checks,
    })
}
