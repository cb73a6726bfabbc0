//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [system]
//! name = "t3"
//! a = 15
//!
//! [system.map]
//! kind = "multiply"        # multiply | full-branch-linear | baker | perturbed-doubling | golden-mean
//! m = 3
//!
//! [system.multiplier]
//! kind = "cells"           # cells | piecewise-constant | cosine | constant
//! values = ["9", "1/9", "3"]
//!
//! [system.fiber]
//! kind = "arctan"          # arctan | rational | table
//!
//! [compute]
//! seed = 7
//! grid_size = 100000
//!
//! [output]
//! dir = "out/t3"
//! formats = ["csv", "json"]
//! ```
//!
//! Every number may be written as a float, an integer or a string `"p/q"`.

use std::fmt;
use std::path::Path;

use graphscale_core::graph::{GraphOptions, GridKind};
use graphscale_core::maps::{DrivenSystem, FiberKind, FiberMap, MarkovIntervalMap, Multiplier};
use graphscale_core::pressure::PressureOptions;
use graphscale_core::scaling::IndexOptions;
use graphscale_core::MatrixMode;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number that remembers how it was written.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalar {
    value: f64,
    text: Option<String>,
}

impl Scalar {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        let value = match t.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
                let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
                if q == 0.0 {
                    return Err(format!("zero denominator in {text:?}"));
                }
                p / q
            }
            None => t.parse().map_err(|_| format!("not a number: {text:?}"))?,
        };
        Ok(Self {
            value,
            text: Some(text.to_string()),
        })
    }
}

impl From<f64> for Scalar {
    fn from(value: f64) -> Self {
        Self { value, text: None }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.text {
            Some(t) => s.serialize_str(t),
            None => s.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a string \"p/q\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
                Ok(v.into())
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
                Ok((v as f64).into())
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
                Ok((v as f64).into())
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                Scalar::parse(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

fn values(xs: &[Scalar]) -> Vec<f64> {
    xs.iter().map(Scalar::value).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    /// `x -> m x mod 1`.
    Multiply {
        m: usize,
    },
    /// Full-branch linear map on the given cells.
    FullBranchLinear {
        breaks: Vec<Scalar>,
    },
    /// Factor of the baker transformation with split `split`.
    Baker {
        split: Scalar,
    },
    /// `2x + kappa/(2 pi) sin 2 pi x mod 1`.
    PerturbedDoubling {
        kappa: Scalar,
    },
    GoldenMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MultiplierSpec {
    /// One value per Markov cell.
    Cells {
        values: Vec<Scalar>,
    },
    PiecewiseConstant {
        breaks: Vec<Scalar>,
        values: Vec<Scalar>,
    },
    /// `r (1 + eps + cos 2 pi x)`.
    Cosine {
        r: Scalar,
        eps: Scalar,
    },
    Constant {
        value: Scalar,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FiberSpec {
    Arctan,
    Rational,
    Table { xs: Vec<Scalar>, ys: Vec<Scalar> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub a: Scalar,
    pub map: MapSpec,
    pub multiplier: MultiplierSpec,
    pub fiber: FiberSpec,
}

impl SystemConfig {
    pub fn build(&self) -> graphscale_core::Result<DrivenSystem> {
        let map = match &self.map {
            MapSpec::Multiply { m } => MarkovIntervalMap::multiply(*m)?,
            MapSpec::FullBranchLinear { breaks } => MarkovIntervalMap::full_branch_linear(values(breaks))?,
            MapSpec::Baker { split } => MarkovIntervalMap::baker_factor(split.value())?,
            MapSpec::PerturbedDoubling { kappa } => MarkovIntervalMap::perturbed_doubling(kappa.value())?,
            MapSpec::GoldenMean => MarkovIntervalMap::golden_mean(),
        };
        let mult = match &self.multiplier {
            MultiplierSpec::Cells { values: v } => Multiplier::on_cells(&map, values(v))?,
            MultiplierSpec::PiecewiseConstant { breaks, values: v } => {
                Multiplier::piecewise_constant(values(breaks), values(v))?
            }
            MultiplierSpec::Cosine { r, eps } => Multiplier::cosine(r.value(), eps.value())?,
            MultiplierSpec::Constant { value } => Multiplier::constant(value.value())?,
        };
        let kind = match &self.fiber {
            FiberSpec::Arctan => FiberKind::Arctan,
            FiberSpec::Rational => FiberKind::Rational,
            FiberSpec::Table { xs, ys } => FiberKind::Table {
                xs: values(xs),
                ys: values(ys),
            },
        };
        DrivenSystem::new(map, mult, FiberMap::new(kind, self.a.value())?)
    }
}

/// Two-sided comparison run by `check` on baker systems with a cosine multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjugacyConfig {
    /// Exponent `beta` of the `exp(beta u)` factor.
    pub beta: f64,
    pub samples: usize,
    pub depth: usize,
    /// Terms kept in the coboundary series.
    pub reduction_depth: usize,
}

impl Default for ConjugacyConfig {
    fn default() -> Self {
        Self {
            beta: 0.1,
            samples: 1000,
            depth: 40,
            reduction_depth: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputeConfig {
    pub seed: u64,
    pub grid_size: usize,
    pub grid: GridKind,
    pub n_max: usize,
    pub tol: f64,
    pub zero_floor: f64,
    pub pressure_resolution: usize,
    /// Matrix mode; exact-markov when the system allows it and this is unset.
    pub pressure_mode: Option<MatrixMode>,
    /// Fitting window for tail and Xi slopes; chosen from the graph when unset.
    pub window: Option<(f64, f64)>,
    /// Base points of the local index.
    pub index_points: Vec<Scalar>,
    /// Ladder range `[first, last]`.
    pub ladder: (usize, usize),
    pub local_grid: usize,
    pub extra_depth: usize,
    pub hypothesis_period: usize,
    pub acim_resolution: usize,
    pub check_points: usize,
    pub check_depths: Vec<usize>,
    /// Start values of the distortion check as fractions of `a`.
    pub check_starts: Vec<f64>,
    pub schedule_delta: f64,
    pub conjugacy: ConjugacyConfig,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            grid_size: 100_000,
            grid: GridKind::Jittered,
            n_max: 60,
            tol: 1e-10,
            zero_floor: 1e-14,
            pressure_resolution: 4096,
            pressure_mode: None,
            window: None,
            index_points: vec![0.0.into(), 0.5.into()],
            ladder: (2, 13),
            local_grid: 200_000,
            extra_depth: 200,
            hypothesis_period: 12,
            acim_resolution: 4096,
            check_points: 1000,
            check_depths: vec![10, 30, 60],
            check_starts: vec![1.0, 0.5, 0.1],
            schedule_delta: 0.1,
            conjugacy: ConjugacyConfig::default(),
        }
    }
}

impl ComputeConfig {
    pub fn graph_options(&self) -> GraphOptions {
        GraphOptions {
            grid_size: self.grid_size,
            n_max: self.n_max,
            tol: self.tol,
            zero_floor: self.zero_floor,
            grid: self.grid,
            ..GraphOptions::default()
        }
    }

    pub fn pressure_options(&self, sys: &DrivenSystem) -> PressureOptions {
        let best = PressureOptions::best_for(sys, self.pressure_resolution);
        PressureOptions {
            mode: self.pressure_mode.unwrap_or(best.mode),
            ..best
        }
    }

    pub fn index_options(&self) -> IndexOptions {
        IndexOptions {
            local_grid: self.local_grid,
            extra_depth: self.extra_depth,
            ..IndexOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub compute: ComputeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
