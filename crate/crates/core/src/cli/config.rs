//! Run configuration: a TOML file, overridden field by field by flags.
//!
//! ```toml
//! paths = 2000
//! seed = 7
//! groups = 20
//! alpha = 0.05
//! out = "out"
//! svg = true
//!
//! [model]
//! kind = "sdof"
//! mass = 1.0
//! damping = 0.2
//! stiffness = 4.0
//! noise = 1.0
//! dt = 0.005
//! duration = 200.0
//!
//! [bandwidth]
//! c = 1.0
//! a = 0.2
//! ```
//!
//! The bandwidth table takes exactly one of `{c, a}`, `h` or `l`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpr::{bandwidth_from, Bandwidth};
use crate::models::{
    duffing_case, ou_spec, reference_sdof_spec, wiener_spec, ModelKind, ModelSpec, OuInit,
};

pub const DEFAULT_PATHS: usize = 2000;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_GROUPS: usize = 20;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_A: f64 = 0.2;

/// How the kernel radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthSpec {
    /// `h = c * n^(-a)` with `n` the number of grid points.
    Rule { c: f64, a: f64 },
    /// Explicit radius in seconds.
    Radius { h: f64 },
    /// Explicit half-width in grid steps, `h = l * dt`.
    HalfWidth { l: usize },
}

impl Default for BandwidthSpec {
    fn default() -> Self {
        BandwidthSpec::Rule {
            c: DEFAULT_C,
            a: DEFAULT_A,
        }
    }
}

impl BandwidthSpec {
    pub fn resolve(&self, n_points: usize, dt: f64) -> Result<Bandwidth> {
        match *self {
            BandwidthSpec::Rule { c, a } => bandwidth_from(n_points, c, a, dt),
            BandwidthSpec::Radius { h } => Bandwidth::from_radius(h, dt),
            BandwidthSpec::HalfWidth { l } => Bandwidth::from_half_width(l, dt),
        }
    }
}

/// Built-in model by name: `sdof`, `duffing1`..`duffing4`, `wiener`, `ou`.
pub fn preset_model(name: &str) -> Result<ModelSpec> {
    match name.to_ascii_lowercase().as_str() {
        "sdof" => Ok(reference_sdof_spec()),
        "wiener" => Ok(wiener_spec(1.0, 0.005, 10.0)),
        "ou" => Ok(ou_spec(1.0, 1.0, OuInit::Stationary, 0.005, 10.0)),
        other => match other.strip_prefix("duffing").map(str::parse::<usize>) {
            Some(Ok(case)) => duffing_case(case),
            _ => Err(Error::Config(format!(
                "unknown model {name:?} (expected sdof, duffing1..duffing4, wiener or ou)"
            ))),
        },
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub paths: usize,
    pub seed: u64,
    pub bandwidth: BandwidthSpec,
    pub groups: usize,
    pub alpha: f64,
    /// Evaluation stride in grid steps; `None` means `L`.
    pub stride: Option<usize>,
    /// `None` centers only data of unknown origin.
    pub centered: Option<bool>,
    pub out: PathBuf,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: reference_sdof_spec(),
            paths: DEFAULT_PATHS,
            seed: DEFAULT_SEED,
            bandwidth: BandwidthSpec::default(),
            groups: DEFAULT_GROUPS,
            alpha: DEFAULT_ALPHA,
            stride: None,
            centered: None,
            out: PathBuf::from("out"),
            svg: false,
        }
    }
}

/// Layout of the TOML file. Everything is optional.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    centered: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    svg: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth: Option<FileBandwidth>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(default)]
struct FileBandwidth {
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
}

/// Flag values layered over the file. `None` leaves the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub bandwidth_c: Option<f64>,
    pub bandwidth_a: Option<f64>,
    pub window_l: Option<usize>,
    pub groups: Option<usize>,
    pub alpha: Option<f64>,
    pub stride: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

fn bandwidth_mode(
    c: Option<f64>,
    a: Option<f64>,
    h: Option<f64>,
    l: Option<usize>,
) -> Result<Option<BandwidthSpec>> {
    let rule = c.is_some() || a.is_some();
    let modes = rule as usize + h.is_some() as usize + l.is_some() as usize;
    if modes > 1 {
        return Err(Error::Config(
            "bandwidth: give exactly one of {c, a}, h or l".into(),
        ));
    }
    Ok(if rule {
        Some(BandwidthSpec::Rule {
            c: c.unwrap_or(DEFAULT_C),
            a: a.unwrap_or(DEFAULT_A),
        })
    } else if let Some(h) = h {
        Some(BandwidthSpec::Radius { h })
    } else {
        l.map(|l| BandwidthSpec::HalfWidth { l })
    })
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        RunConfig::default().overlay_toml(text)
    }

    /// Values present in `text` replace those of `self`.
    pub fn overlay_toml(self, text: &str) -> Result<Self> {
        let file: FileConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = self;
        if let Some(m) = file.model {
            cfg.model = m;
        }
        if let Some(b) = file.bandwidth {
            if let Some(spec) = bandwidth_mode(b.c, b.a, b.h, b.l)? {
                cfg.bandwidth = spec;
            }
        }
        cfg.paths = file.paths.unwrap_or(cfg.paths);
        cfg.seed = file.seed.unwrap_or(cfg.seed);
        cfg.groups = file.groups.unwrap_or(cfg.groups);
        cfg.alpha = file.alpha.unwrap_or(cfg.alpha);
        cfg.stride = file.stride.or(cfg.stride);
        cfg.centered = file.centered.or(cfg.centered);
        cfg.out = file.out.unwrap_or(cfg.out);
        cfg.svg = file.svg.unwrap_or(cfg.svg);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        RunConfig::default().overlay_file(path)
    }

    pub fn overlay_file(self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.overlay_toml(&text)
    }

    /// `base`, then the file, then the flags; validated.
    pub fn resolve_over(base: RunConfig, file: Option<&Path>, o: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => base.overlay_file(p)?,
            None => base,
        };
        cfg.apply(o)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults, then the file, then the flags.
    pub fn resolve(file: Option<&Path>, o: &Overrides) -> Result<Self> {
        Self::resolve_over(RunConfig::default(), file, o)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(name) = &o.model {
            self.model = preset_model(name)?;
        }
        if o.dt.is_some() || o.duration.is_some() {
            let dt = o.dt.unwrap_or(self.model.dt);
            let duration = o.duration.unwrap_or(self.model.duration);
            self.model = self.model.clone().with_grid(dt, duration);
        }
        if let Some(spec) = bandwidth_mode(o.bandwidth_c, o.bandwidth_a, None, o.window_l)? {
            // Keep the other half of a rule given partly in the file.
            self.bandwidth = match (spec, self.bandwidth) {
                (BandwidthSpec::Rule { .. }, BandwidthSpec::Rule { c, a }) => BandwidthSpec::Rule {
                    c: o.bandwidth_c.unwrap_or(c),
                    a: o.bandwidth_a.unwrap_or(a),
                },
                (spec, _) => spec,
            };
        }
        self.paths = o.paths.unwrap_or(self.paths);
        self.seed = o.seed.unwrap_or(self.seed);
        self.groups = o.groups.unwrap_or(self.groups);
        self.alpha = o.alpha.unwrap_or(self.alpha);
        self.stride = o.stride.or(self.stride);
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        self.svg |= o.svg;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.paths == 0 {
            return Err(Error::Config("paths must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::BadProbability(self.alpha));
        }
        if self.stride == Some(0) {
            return Err(Error::Config("stride must be positive".into()));
        }
        self.resolve_bandwidth()?;
        Ok(())
    }

    pub fn resolve_bandwidth(&self) -> Result<Bandwidth> {
        self.bandwidth.resolve(self.model.n_points(), self.model.dt)
    }

    /// Evaluation stride in grid steps for a resolved bandwidth.
    pub fn stride_for(&self, bw: &Bandwidth) -> usize {
        self.stride.unwrap_or(bw.l)
    }

    /// Whether to center data of the given kind before forming products.
    pub fn centered_for(&self, kind: ModelKind) -> bool {
        self.centered.unwrap_or(!kind.known_zero_mean())
    }

    /// Creates the output directory if needed.
    pub fn ensure_out(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        Ok(&self.out)
    }

    /// The resolved configuration in the file layout, written next to the
    /// outputs so a run can be repeated with `--config`.
    pub fn to_toml(&self) -> String {
        let (c, a, h, l) = match self.bandwidth {
            BandwidthSpec::Rule { c, a } => (Some(c), Some(a), None, None),
            BandwidthSpec::Radius { h } => (None, None, Some(h), None),
            BandwidthSpec::HalfWidth { l } => (None, None, None, Some(l)),
        };
        let file = FileConfig {
            paths: Some(self.paths),
            seed: Some(self.seed),
            groups: Some(self.groups),
            alpha: Some(self.alpha),
            stride: self.stride,
            centered: self.centered,
            out: Some(self.out.clone()),
            svg: Some(self.svg),
            model: Some(self.model.clone()),
            bandwidth: Some(FileBandwidth { c, a, h, l }),
        };
        toml::to_string(&file).expect("config serializes")
    }
}
