//! JSON run configuration: schema types, validation, and conversion into
//! core model objects.

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use statinc::increments::{FunctionalSpec, IncrementSpec};
use statinc::interpolate::SolveOptions;
use statinc::minimax::{ClassKind, DensityClass, Fixity, MinimaxOptions};
use statinc::quad::QuadOpts;
use statinc::spectral::Density;
use statinc::ObservationModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Interpolate,
    Point,
    Cointegrate,
    Minimax,
    Verify,
    VerifySaddle,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Interpolate => "interpolate",
            Task::Point => "point",
            Task::Cointegrate => "cointegrate",
            Task::Minimax => "minimax",
            Task::Verify => "verify",
            Task::VerifySaddle => "verify-saddle",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncrementCfg {
    pub n: usize,
    pub mu: usize,
    /// Last missing index N; the gap is {0, …, N}.
    pub gap_end: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityCfg {
    Zero,
    Constant {
        value: f64,
    },
    /// Plain stationary density |num(e^{-iλ})|²/|den(e^{-iλ})|².
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
    /// Reduced increment form λ^{2n}ψ/|1-e^{-iλμ}|^{2n} with
    /// ψ = |num|²/|den|²; n and μ come from the run's increment spec.
    IncrementRational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
    /// Samples on the canonical midpoint grid over [-π, π).
    Grid {
        values: Vec<f64>,
    },
    Scaled {
        factor: f64,
        inner: Box<DensityCfg>,
    },
    /// base + λ^{2n}·noise (observed density of a signal-plus-noise pair).
    Composite {
        base: Box<DensityCfg>,
        noise: Box<DensityCfg>,
    },
}

impl DensityCfg {
    pub fn build(&self, spec: &IncrementSpec) -> anyhow::Result<Density> {
        Ok(match self {
            DensityCfg::Zero => Density::Zero,
            DensityCfg::Constant { value } => Density::constant(*value)?,
            DensityCfg::Rational {
                numerator,
                denominator,
            } => Density::rational_from_factors(numerator, denominator)?,
            DensityCfg::IncrementRational {
                numerator,
                denominator,
            } => Density::increment_rational_from_factors(spec, numerator, denominator)?,
            DensityCfg::Grid { values } => Density::grid(values.clone())?,
            DensityCfg::Scaled { factor, inner } => {
                Density::scaled(*factor, inner.build(spec)?)?
            }
            DensityCfg::Composite { base, noise } => Density::composite(
                base.build(spec)?,
                noise.build(spec)?,
                spec.n(),
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FixedSide {
    #[default]
    None,
    Signal,
    Noise,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClassCfg {
    pub kind: ClassKindCfg,
    #[serde(default)]
    pub p1: Option<f64>,
    #[serde(default)]
    pub p2: Option<f64>,
    #[serde(default)]
    pub eps1: Option<f64>,
    #[serde(default)]
    pub eps2: Option<f64>,
    #[serde(default)]
    pub f_ref: Option<DensityCfg>,
    #[serde(default)]
    pub g_ref: Option<DensityCfg>,
    #[serde(default)]
    pub fixed: FixedSide,
    #[serde(default)]
    pub cointegrated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassKindCfg {
    LowerReciprocal,
    EpsNeighborhood,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsCfg {
    /// Quadrature starting grid.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Minimax solver grid.
    #[serde(default = "default_minimax_grid")]
    pub minimax_grid: usize,
    /// Quadrature relative tolerance.
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Minimax residual tolerance / verification tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Weight-truncation tail tolerance.
    #[serde(default = "default_weight_tol")]
    pub weight_tol: f64,
    /// Weight-truncation horizon cap.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Oracle projection window K.
    #[serde(default = "default_window")]
    pub oracle_window: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Saddle-verification sample count.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_floor")]
    pub density_floor: f64,
    #[serde(default = "default_ceiling")]
    pub density_ceiling: f64,
    /// Resolution of exported plot grids.
    #[serde(default = "default_export")]
    pub grid_export: usize,
}

fn default_grid() -> usize {
    4096
}
fn default_minimax_grid() -> usize {
    1024
}
fn default_quad_tol() -> f64 {
    1e-10
}
fn default_tol() -> f64 {
    1e-6
}
fn default_weight_tol() -> f64 {
    1e-8
}
fn default_truncation() -> usize {
    10_000
}
fn default_window() -> usize {
    50
}
fn default_seed() -> u64 {
    7
}
fn default_samples() -> usize {
    100
}
fn default_max_iter() -> usize {
    500
}
fn default_damping() -> f64 {
    0.5
}
fn default_floor() -> f64 {
    1e-8
}
fn default_ceiling() -> f64 {
    1e8
}
fn default_export() -> usize {
    512
}

impl Default for OptionsCfg {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: Task,
    pub increment: IncrementCfg,
    #[serde(default)]
    pub functional: Option<Vec<f64>>,
    #[serde(default)]
    pub point_index: Option<usize>,
    #[serde(default)]
    pub signal_density: Option<DensityCfg>,
    #[serde(default)]
    pub noise_density: Option<DensityCfg>,
    #[serde(default)]
    pub observed_density: Option<DensityCfg>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub class: Option<ClassCfg>,
    /// Externally quoted error value to cross-check in reports.
    #[serde(default)]
    pub reference_mse: Option<f64>,
    #[serde(default)]
    pub options: OptionsCfg,
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("config does not parse")?;
        if cfg.schema_version != 1 {
            bail!("unsupported schema_version {}", cfg.schema_version);
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> anyhow::Result<IncrementSpec> {
        Ok(IncrementSpec::new(
            self.increment.n,
            self.increment.mu,
            self.increment.gap_end,
        )?)
    }

    pub fn functional(&self, spec: &IncrementSpec) -> anyhow::Result<FunctionalSpec> {
        let coeffs = self
            .functional
            .clone()
            .ok_or_else(|| anyhow!("task {} requires `functional`", self.task.name()))?;
        if coeffs.is_empty() {
            bail!("`functional` must not be empty");
        }
        Ok(FunctionalSpec::new(spec, coeffs)?)
    }

    /// The observation model for the solve-style tasks.
    pub fn model(&self, spec: &IncrementSpec) -> anyhow::Result<ObservationModel> {
        let f = self
            .signal_density
            .as_ref()
            .ok_or_else(|| anyhow!("`signal_density` is required"))?
            .build(spec)?;
        match self.task {
            Task::Cointegrate => {
                let p = self
                    .observed_density
                    .as_ref()
                    .ok_or_else(|| anyhow!("task cointegrate requires `observed_density`"))?
                    .build(spec)?;
                let beta = self
                    .beta
                    .ok_or_else(|| anyhow!("task cointegrate requires `beta`"))?;
                Ok(ObservationModel::cointegrated(*spec, f, p, beta)?)
            }
            _ => {
                let g = match &self.noise_density {
                    Some(cfg) => cfg.build(spec)?,
                    None => Density::Zero,
                };
                Ok(ObservationModel::with_noise(*spec, f, g))
            }
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        let o = &self.options;
        SolveOptions {
            quad: QuadOpts {
                m0: o.grid,
                m_max: 1 << 20,
                tol: o.quad_tol,
            },
            weight_tol: o.weight_tol,
            max_weight_span: o.truncation,
            ..SolveOptions::default()
        }
    }

    pub fn minimax_options(&self) -> MinimaxOptions {
        let o = &self.options;
        let mut solve = self.solve_options();
        solve.compute_weights = false;
        MinimaxOptions {
            grid: o.minimax_grid,
            tol: o.tol,
            max_iter: o.max_iter,
            damping: o.damping,
            density_floor: o.density_floor,
            density_ceiling: o.density_ceiling,
            solve,
        }
    }

    pub fn density_class(&self, spec: &IncrementSpec) -> anyhow::Result<(DensityClass, bool, f64)> {
        let cfg = self
            .class
            .as_ref()
            .ok_or_else(|| anyhow!("task {} requires `class`", self.task.name()))?;
        let kind = match cfg.kind {
            ClassKindCfg::LowerReciprocal => ClassKind::LowerReciprocal {
                p1: cfg.p1.unwrap_or(1.0),
                p2: cfg.p2.ok_or_else(|| anyhow!("lower-reciprocal class requires `p2`"))?,
            },
            ClassKindCfg::EpsNeighborhood => {
                let f_ref = cfg
                    .f_ref
                    .as_ref()
                    .ok_or_else(|| anyhow!("eps-neighborhood class requires `f-ref`"))?
                    .build(spec)?;
                let g_ref = match &cfg.g_ref {
                    Some(d) => d.build(spec)?,
                    None => Density::Zero,
                };
                ClassKind::EpsNeighborhood {
                    f_ref,
                    eps1: cfg.eps1.ok_or_else(|| anyhow!("eps-neighborhood requires `eps1`"))?,
                    g_ref,
                    eps2: cfg.eps2.ok_or_else(|| anyhow!("eps-neighborhood requires `eps2`"))?,
                }
            }
        };
        let fixity = match cfg.fixed {
            FixedSide::None => Fixity::BothFree,
            FixedSide::Signal => Fixity::SignalKnown(
                self.signal_density
                    .as_ref()
                    .ok_or_else(|| anyhow!("fixed=signal requires `signal_density`"))?
                    .build(spec)?,
            ),
            FixedSide::Noise => Fixity::NoiseKnown(
                self.noise_density
                    .as_ref()
                    .ok_or_else(|| anyhow!("fixed=noise requires `noise_density`"))?
                    .build(spec)?,
            ),
        };
        let beta = self.beta.unwrap_or(1.0);
        Ok((DensityClass { kind, fixity }, cfg.cointegrated, beta))
    }
}
