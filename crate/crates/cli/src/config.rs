//! Run options from flags and `key = value` files.
//!
//! Every flag doubles as a config-file key with the same spelling; values
//! given on the command line win over the file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use nonlocal_core::models::by_name;
use nonlocal_core::{BoundaryKind, ConvolutionMethod, GridSpec, ModelSpec, Order, SchemeConfig};

use crate::error::{CliError, Result};

/// Comma-separated list of numbers, e.g. `0.04,0.02,0.01`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let values = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err("empty list".into());
        }
        Ok(FloatList(values))
    }
}

impl fmt::Display for FloatList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

macro_rules! options {
    ($( $(#[doc = $doc:literal])* $field:ident : $ty:ty => $key:literal ),* $(,)?) => {
        #[derive(Debug, Clone, Default, PartialEq, Args)]
        pub struct Options {
            $(
                $(#[doc = $doc])*
                #[arg(long = $key)]
                pub $field: Option<$ty>,
            )*
            /// Read further options from a `key = value` file.
            #[arg(long = "config")]
            pub config: Option<PathBuf>,
        }

        impl Options {
            /// Sets the option named `key` from its textual value.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $(
                        $key => {
                            let v = value.parse::<$ty>().map_err(|e| {
                                CliError::Config(format!("bad value {value:?} for {key}: {e}"))
                            })?;
                            self.$field = Some(v);
                        }
                    )*
                    other => {
                        return Err(CliError::Config(format!("unknown option {other:?}")));
                    }
                }
                Ok(())
            }

            /// Fills every unset option from `base`.
            pub fn overlay(self, base: Options) -> Options {
                Options {
                    $( $field: self.$field.or(base.$field), )*
                    config: self.config.or(base.config),
                }
            }
        }
    };
}

options! {
    /// crowd, kk or kk-local
    model: String => "model",
    nx: usize => "nx",
    ny: usize => "ny",
    /// 1 or 2
    order: Order => "order",
    theta: f64 => "theta",
    alpha: f64 => "alpha",
    beta: f64 => "beta",
    cfl_safety: f64 => "cfl-safety",
    tend: f64 => "tend",
    /// Kernel radius override.
    radius: f64 => "radius",
    /// noflow, outflow or periodic
    bc: BoundaryKind => "bc",
    /// Snapshot interval in model time; 0 writes only the first and last.
    snap_every: f64 => "snap-every",
    out: PathBuf => "out",
    threads: usize => "threads",
    /// Midpoint samples per axis when averaging the initial datum.
    samples: usize => "samples",
    /// Fixed step Δt = ratio·Δx instead of the CFL step.
    dt_ratio: f64 => "dt-ratio",
    /// auto, direct or fft
    convolution: ConvolutionMethod => "convolution",
    /// Number of nested meshes in an EOC study.
    levels: usize => "levels",
    /// Coarsest mesh size of an EOC study.
    h: f64 => "h",
    /// Kernel radii of a singular-limit study.
    radii: FloatList => "radii",
    /// Output times of a singular-limit study.
    times: FloatList => "times",
    /// Reference resolution of a singular-limit study.
    ref_nx: usize => "ref-nx",
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, path: &Path) -> Result<Options> {
    let mut opts = Options::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "config" {
            return Err(parse_err("config files cannot include other files".into()));
        }
        opts.set(key, value).map_err(|e| match e {
            CliError::Config(m) => parse_err(m),
            other => other,
        })?;
    }
    Ok(opts)
}

pub fn load_config(path: &Path) -> Result<Options> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text, path)
}

impl Options {
    /// Merges in the file named by `--config`, if any.
    pub fn with_config_file(self) -> Result<Options> {
        match &self.config {
            Some(path) => {
                let file = load_config(path)?;
                Ok(self.overlay(file))
            }
            None => Ok(self),
        }
    }

    fn model_name(&self) -> String {
        self.model.clone().unwrap_or_else(|| "crowd".into())
    }

    fn scheme(&self, model: &ModelSpec, order: Order) -> Result<SchemeConfig> {
        let mut s = SchemeConfig::second_order(self.bc.unwrap_or(model.boundary)).with_order(order);
        if let Some(v) = self.theta {
            s.theta = v;
        }
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.beta {
            s.beta = v;
        }
        if let Some(v) = self.cfl_safety {
            s.cfl_safety = v;
        }
        s.validate()?;
        Ok(s)
    }

    fn common(&self, model: &ModelSpec, order: Order, default_tend: f64) -> Result<RunConfig> {
        let grid = model.domain.with_cells(
            self.nx.unwrap_or(model.domain.nx),
            self.ny.unwrap_or(model.domain.ny),
        );
        let t_end = self.tend.unwrap_or(default_tend);
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(CliError::Config(format!("tend must be positive, got {t_end}")));
        }
        let snap_every = match self.snap_every {
            None | Some(0.0) => None,
            Some(v) if v > 0.0 && v.is_finite() => Some(v),
            Some(v) => return Err(CliError::Config(format!("snap-every must be >= 0, got {v}"))),
        };
        if let Some(r) = self.dt_ratio {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Config(format!("dt-ratio must be positive, got {r}")));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        let samples = self.samples.unwrap_or(4);
        if samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        Ok(RunConfig {
            model: self.model_name(),
            radius: self.radius,
            grid,
            scheme: self.scheme(model, order)?,
            t_end,
            snap_every,
            out: self.out.clone(),
            samples,
            dt_ratio: self.dt_ratio,
            convolution: self.convolution.unwrap_or_default(),
            threads: self.threads,
        })
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let name = self.model_name();
        let model = by_name(&name, self.radius)?;
        let tend = if name == "crowd" { 4.0 } else { 0.1 };
        self.common(&model, self.order.unwrap_or(Order::Second), tend)
    }

    /// Defaults reproduce the crowd EOC table: `h = 0.05`, five levels,
    /// `T = 0.2`, `Δt = 0.026Δx`, both orders.
    pub fn eoc_config(&self) -> Result<EocConfig> {
        let name = self.model_name();
        let model = by_name(&name, self.radius)?;
        let mut base = self.common(&model, self.order.unwrap_or(Order::Second), 0.2)?;
        if name == "crowd" && base.dt_ratio.is_none() {
            base.dt_ratio = Some(0.026);
        }
        if let Some(h) = self.h {
            base.grid = cells_for(&base.grid, h)?;
        } else if self.nx.is_none() && self.ny.is_none() && name == "crowd" {
            base.grid = cells_for(&base.grid, 0.05)?;
        }
        let levels = self.levels.unwrap_or(5);
        if levels < 3 {
            return Err(CliError::Config(format!(
                "an EOC study needs at least 3 levels, got {levels}"
            )));
        }
        Ok(EocConfig {
            base,
            levels,
            orders: self.order.map_or(vec![Order::First, Order::Second], |o| vec![o]),
        })
    }

    /// Defaults reproduce the singular-limit table: 1600² against 3200²,
    /// `Δt = 0.05Δx`, both orders.
    pub fn limit_config(&self) -> Result<LimitConfig> {
        let model = by_name("kk-local", None)?;
        let mut base = self.common(&model, Order::Second, 0.1)?;
        base.model = "kk".into();
        let nx = self.nx.unwrap_or(1600);
        if self.ny.is_some_and(|ny| ny != nx) {
            return Err(CliError::Config(
                "singular-limit grids are square; drop --ny".into(),
            ));
        }
        base.grid = base.grid.with_cells(nx, nx);
        base.dt_ratio.get_or_insert(0.05);
        let ref_nx = self.ref_nx.unwrap_or(2 * nx);
        if ref_nx < nx || ref_nx % nx != 0 {
            return Err(CliError::Config(format!(
                "ref-nx {ref_nx} must be a multiple of nx {nx}"
            )));
        }
        let radii = self
            .radii
            .clone()
            .map_or(vec![0.04, 0.02, 0.01, 0.005, 0.0025], |l| l.0);
        let mut times = self.times.clone().map_or(vec![0.03, 0.07, 0.1], |l| l.0);
        times.sort_by(f64::total_cmp);
        let bad = |v: &f64| !v.is_finite() || *v <= 0.0;
        if radii.iter().any(bad) || times.iter().any(bad) {
            return Err(CliError::Config("radii and times must be positive".into()));
        }
        Ok(LimitConfig {
            base,
            ref_nx,
            radii,
            times,
            orders: self.order.map_or(vec![Order::First, Order::Second], |o| vec![o]),
        })
    }
}

fn cells_for(spec: &GridSpec, h: f64) -> Result<GridSpec> {
    let count = |len: f64| {
        let n = len / h;
        let r = n.round();
        if r >= 1.0 && (n - r).abs() <= 1e-9 * r {
            Ok(r as usize)
        } else {
            Err(CliError::Config(format!(
                "h = {h} does not divide the domain length {len}"
            )))
        }
    };
    Ok(spec.with_cells(count(spec.x2 - spec.x1)?, count(spec.y2 - spec.y1)?))
}

/// A fully resolved single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: String,
    pub radius: Option<f64>,
    pub grid: GridSpec,
    pub scheme: SchemeConfig,
    pub t_end: f64,
    /// `None` writes only the snapshots at `t = 0` and `t = T`.
    pub snap_every: Option<f64>,
    /// `None` keeps everything in memory.
    pub out: Option<PathBuf>,
    pub samples: usize,
    pub dt_ratio: Option<f64>,
    pub convolution: ConvolutionMethod,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn model_spec(&self) -> Result<ModelSpec> {
        let mut m = by_name(&self.model, self.radius)?;
        m.domain = self.grid;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EocConfig {
    /// The coarsest level.
    pub base: RunConfig,
    pub levels: usize,
    pub orders: Vec<Order>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitConfig {
    /// Non-local runs; `model` and `radius` are set per row.
    pub base: RunConfig,
    pub ref_nx: usize,
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub orders: Vec<Order>,
}
