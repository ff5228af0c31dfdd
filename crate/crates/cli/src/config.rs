//! Run configuration read from JSON. Complex numbers are `[re, im]` pairs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use parafrac::powerseries::{Germ, TruncatedSeries};
use parafrac::recovery::{AnalysisOptions, EpsGrid};
use parafrac::Complex64;
use serde::{Deserialize, Serialize};

pub type Pair = [f64; 2];

fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermConfig {
    /// `c₁, c₂, …` of `f(z) = c₁z + c₂z² + …`, with `c₁ = 1`.
    pub coefficients: Vec<Pair>,
    /// Expected multiplicity; checked against the coefficients when given.
    #[serde(default)]
    pub k: Option<usize>,
    /// Truncation order; missing coefficients up to it are zero.
    #[serde(default)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// ε values compared against the sampler; when absent, five values
    /// spread over the part of the grid the sampler resolves.
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            samples: default_samples(),
            seed: default_seed(),
            eps: None,
        }
    }
}

fn default_samples() -> usize {
    10_000_000
}

fn default_seed() -> u64 {
    0x5eed
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Tangent-to-identity conjugators, each as `c₁, c₂, …` with `c₁ = 1`.
    #[serde(default)]
    pub conjugators: Vec<Vec<Pair>>,
    /// Scaling `z ↦ λz` checked alongside the conjugators.
    #[serde(default)]
    pub lambda: Option<Pair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_measurements")]
    pub measurements: PathBuf,
    #[serde(default = "default_report")]
    pub report: PathBuf,
    #[serde(default = "default_invariance")]
    pub invariance: PathBuf,
    #[serde(default = "default_oracle")]
    pub oracle: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            measurements: default_measurements(),
            report: default_report(),
            invariance: default_invariance(),
            oracle: default_oracle(),
        }
    }
}

fn default_dir() -> PathBuf {
    "results".into()
}
fn default_measurements() -> PathBuf {
    "measurements.csv".into()
}
fn default_report() -> PathBuf {
    "report.json".into()
}
fn default_invariance() -> PathBuf {
    "invariance.json".into()
}
fn default_oracle() -> PathBuf {
    "oracle.json".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub germ: GermConfig,
    #[serde(default)]
    pub z0: Option<Pair>,
    #[serde(default)]
    pub eps_grid: Option<EpsGrid>,
    #[serde(default)]
    pub budget: Option<f64>,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A config checked against the library invariants.
#[derive(Debug, Clone)]
pub struct Run {
    pub raw: serde_json::Value,
    pub config: RunConfig,
    pub germ: Germ,
    pub z0: Option<Complex64>,
    pub grid: EpsGrid,
    pub options: AnalysisOptions,
}

impl Run {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).context("malformed JSON")?;
        let config: RunConfig = serde_json::from_value(raw.clone()).context("invalid run config")?;
        let germ = build_germ(&config.germ)?;
        let grid = config.eps_grid.unwrap_or_else(|| EpsGrid::default_for_germ(&germ));
        grid.validate().context("eps_grid")?;
        let mut options = AnalysisOptions::default();
        if let Some(b) = config.budget {
            if !(b > 0.0 && b.is_finite()) {
                bail!("budget must be positive, got {b}");
            }
            options.budget = b;
        }
        let z0 = config.z0.map(complex);
        if let Some(z) = z0 {
            if !(z.norm() > 0.0 && z.norm() < 1.0) {
                bail!("z0 must satisfy 0 < |z0| < 1, got {z}");
            }
        }
        if let Some(eps) = &config.oracle.eps {
            if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                bail!("oracle.eps must be a non-empty list of values in (0, 1)");
            }
        }
        for (i, phi) in config.verify.conjugators.iter().enumerate() {
            match phi.first() {
                Some(c) if complex(*c) == Complex64::new(1.0, 0.0) => {}
                _ => bail!("conjugator {i} must start with c1 = [1, 0]"),
            }
        }
        if let Some(l) = config.verify.lambda {
            if complex(l).norm() == 0.0 {
                bail!("lambda must be nonzero");
            }
        }
        Ok(Self {
            raw,
            config,
            germ,
            z0,
            grid,
            options,
        })
    }

    pub fn conjugators(&self) -> Vec<TruncatedSeries> {
        let order = self.germ.order();
        self.config
            .verify
            .conjugators
            .iter()
            .map(|c| TruncatedSeries::new(c.iter().copied().map(complex).collect()).truncate(order.max(c.len())))
            .collect()
    }

    pub fn lambda(&self) -> Option<Complex64> {
        self.config.verify.lambda.map(complex)
    }

    /// ε values requested for the oracle comparison.
    pub fn oracle_eps(&self) -> Option<&[f64]> {
        self.config.oracle.eps.as_deref()
    }
}

fn build_germ(g: &GermConfig) -> Result<Germ> {
    if g.coefficients.is_empty() {
        bail!("germ.coefficients is empty");
    }
    if g.coefficients.iter().flatten().any(|x| !x.is_finite()) {
        bail!("germ.coefficients must be finite");
    }
    let series = TruncatedSeries::new(g.coefficients.iter().copied().map(complex).collect());
    let probe = Germ::from_series(series.truncate(series.order().max(2 * series.order() + 1))).context("germ")?;
    let k = probe.k();
    if let Some(expected) = g.k {
        if expected != k {
            bail!("germ.k is {expected} but the coefficients have multiplicity {k}");
        }
    }
    let order = match g.order {
        Some(o) if o < series.order() => bail!("germ.order {o} is below the number of coefficients {}", series.order()),
        Some(o) => o,
        None => series.order().max(Germ::default_order(k)),
    };
    Germ::from_series(series.truncate(order)).context("germ")
}
