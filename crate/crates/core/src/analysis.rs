//! Configuration, report types and the end-to-end analysis pipeline.

use std::time::Instant;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{check_bounds, moment_report, BoundCheck, MomentReport, SigmaP};
use crate::slit::{
    classify_admissibility, project_with_threshold, AdmissibilityReport, AdmissibilityTolerances, PreparedState, Slit,
    DEFAULT_OVERLAP_THRESHOLD, DEFAULT_POSITION_POINTS,
};
use crate::spectral::{
    fourier_transform, plancherel_residual, MomentumGrid, MomentumSpectrum, TailModel, DEFAULT_MOMENTUM_POINTS,
    DEFAULT_P_MAX_SCALE,
};
use crate::variational::{random_admissible, SineBasis, DEFAULT_DECAY};
use crate::wavefunction::{PhysicalUnits, WaveFunction};

pub const TOOL_NAME: &str = "slit-uncertainty";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn one() -> f64 {
    1.0
}

fn default_random_modes() -> usize {
    16
}

fn default_decay() -> f64 {
    DEFAULT_DECAY
}

/// Wavefunction as written in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WaveSpec {
    PlaneWave {
        #[serde(default)]
        k: f64,
    },
    Gaussian {
        #[serde(default)]
        center: f64,
        width: f64,
    },
    CosineHump,
    TaperedGaussian {
        s: f64,
    },
    Sampled {
        xs: Vec<f64>,
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
    /// Seeded random state in the Dirichlet sine basis (uses the top-level seed).
    RandomAdmissible {
        #[serde(default = "default_random_modes")]
        n_max: usize,
        #[serde(default = "default_decay")]
        decay: f64,
    },
}

impl WaveSpec {
    pub fn to_wavefunction(&self) -> Result<Option<WaveFunction<f64>>> {
        let wf = match self {
            Self::PlaneWave { k } => WaveFunction::PlaneWave { k: *k },
            Self::Gaussian { center, width } => WaveFunction::Gaussian {
                center: *center,
                width: *width,
            },
            Self::CosineHump => WaveFunction::CosineHump,
            Self::TaperedGaussian { s } => WaveFunction::TaperedGaussian { s: *s },
            Self::Sampled { xs, re, im } => {
                if !im.is_empty() && im.len() != re.len() {
                    return Err(Error::InvalidInput(format!(
                        "sampled state has {} real parts but {} imaginary parts",
                        re.len(),
                        im.len()
                    )));
                }
                let values = re
                    .iter()
                    .enumerate()
                    .map(|(i, r)| Complex::new(*r, im.get(i).copied().unwrap_or(0.0)))
                    .collect();
                WaveFunction::sampled(xs.clone(), values)?
            }
            Self::RandomAdmissible { .. } => return Ok(None),
        };
        wf.validate()?;
        Ok(Some(wf))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitConfig {
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

impl Default for SlitConfig {
    fn default() -> Self {
        Self { width: 1.0, center: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    #[serde(default = "one")]
    pub hbar: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub position_points: usize,
    /// Defaults to `200 hbar / dx` when absent.
    pub p_max: Option<f64>,
    pub momentum_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            position_points: DEFAULT_POSITION_POINTS,
            p_max: None,
            momentum_points: DEFAULT_MOMENTUM_POINTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub boundary: f64,
    pub growth: f64,
    pub overlap: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let adm = AdmissibilityTolerances::<f64>::default();
        Self {
            boundary: adm.boundary,
            growth: adm.growth,
            overlap: DEFAULT_OVERLAP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: OutputFormat,
    /// Standard output when absent.
    pub path: Option<String>,
}

/// Everything needed to reproduce an analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub wavefunction: WaveSpec,
    #[serde(default)]
    pub slit: SlitConfig,
    #[serde(default)]
    pub units: UnitsConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl AnalysisConfig {
    pub fn new(wavefunction: WaveSpec) -> Self {
        Self {
            wavefunction,
            slit: SlitConfig::default(),
            units: UnitsConfig::default(),
            grids: GridConfig::default(),
            tolerances: ToleranceConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }

    pub fn slit(&self) -> Result<Slit<f64>> {
        Slit::new(self.slit.width, self.slit.center)
    }

    pub fn physical_units(&self) -> Result<PhysicalUnits<f64>> {
        PhysicalUnits::new(self.units.hbar)
    }

    /// Checks ranges and fills in defaults that depend on other fields.
    pub fn resolved(&self) -> Result<Self> {
        let slit = self.slit()?;
        let units = self.physical_units()?;
        let mut out = self.clone();
        let p_max = self
            .grids
            .p_max
            .unwrap_or(DEFAULT_P_MAX_SCALE * units.hbar / slit.width);
        MomentumGrid::new(p_max, self.grids.momentum_points)?;
        out.grids.p_max = Some(p_max);
        if self.grids.position_points < 5 {
            return Err(Error::InvalidInput(format!(
                "position_points must be at least 5, got {}",
                self.grids.position_points
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [("boundary", t.boundary), ("growth", t.growth), ("overlap", t.overlap)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!("tolerance {name} must be non-negative, got {v}")));
            }
        }
        if t.growth <= 1.0 {
            return Err(Error::InvalidInput(format!("growth tolerance must exceed 1, got {}", t.growth)));
        }
        Ok(out)
    }

    pub fn momentum_grid(&self) -> Result<MomentumGrid<f64>> {
        let resolved = self.resolved()?;
        MomentumGrid::new(resolved.grids.p_max.expect("resolved"), resolved.grids.momentum_points)
    }

    pub fn admissibility_tolerances(&self) -> AdmissibilityTolerances<f64> {
        AdmissibilityTolerances {
            boundary: self.tolerances.boundary,
            growth: self.tolerances.growth,
        }
    }

    /// Projects the configured state through the configured slit.
    pub fn prepare(&self) -> Result<PreparedState<f64>> {
        let slit = self.slit()?;
        let units = self.physical_units()?;
        let n = self.grids.position_points;
        match self.wavefunction.to_wavefunction()? {
            Some(wf) => project_with_threshold(&wf, slit, units, n, self.tolerances.overlap),
            None => {
                let WaveSpec::RandomAdmissible { n_max, decay } = self.wavefunction else {
                    unreachable!("only random states lack a closed description")
                };
                let basis = SineBasis::with_points(n_max, slit, n)?;
                random_admissible(self.seed, &basis, decay, units)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    /// Effective configuration, defaults filled in.
    pub config: AnalysisConfig,
    pub family: String,
    pub overlap_norm: f64,
    pub admissibility: AdmissibilityReport<f64>,
    pub moments: MomentReport<f64>,
    pub bounds: BoundCheck<f64>,
    pub tail: Option<TailModel<f64>>,
    pub plancherel_residual: f64,
    pub spectrum_file: Option<String>,
    /// Only recorded on request; timing would make reports non-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

/// Result of running the pipeline, with the spectrum kept for export.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub prepared: PreparedState<f64>,
    pub spectrum: MomentumSpectrum<f64>,
}

/// project -> classify -> transform -> moments -> bounds.
pub fn run_analysis(config: &AnalysisConfig) -> Result<Analysis> {
    let config = config.resolved()?;
    let prepared = config.prepare()?;
    let admissibility = classify_admissibility(&prepared, config.admissibility_tolerances());
    let spectrum = fourier_transform(&prepared, config.momentum_grid()?);
    let moments = moment_report(&prepared, &admissibility, &spectrum)?;
    let bounds = check_bounds(&moments, &prepared.slit);
    let tail = match moments.sigma_p {
        SigmaP::Divergent { tail } => Some(tail),
        SigmaP::Finite { .. } => None,
    };
    let family = match config.wavefunction {
        WaveSpec::RandomAdmissible { .. } => "random-admissible".to_string(),
        _ => prepared.source.name().to_string(),
    };
    let report = AnalysisReport {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        family,
        overlap_norm: prepared.overlap_norm,
        admissibility,
        moments,
        bounds,
        tail,
        plancherel_residual: plancherel_residual(&prepared, &spectrum),
        spectrum_file: None,
        wall_clock_seconds: None,
        config,
    };
    Ok(Analysis {
        report,
        prepared,
        spectrum,
    })
}

/// Same as [`run_analysis`] but records the elapsed wall-clock time.
pub fn run_analysis_timed(config: &AnalysisConfig) -> Result<Analysis> {
    let started = Instant::now();
    let mut analysis = run_analysis(config)?;
    analysis.report.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    Ok(analysis)
}
