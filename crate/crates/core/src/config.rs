//! Run configuration in TOML with strict keys.
//!
//! An empty file resolves to the reference operating point. A fully
//! annotated example lives in `configs/reference.toml`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classical::{omega0, DEFAULT_CHART_G1, DEFAULT_CHART_OMEGA, DEFAULT_CHART_SIZE, SECTION_TOL};
use crate::error::{Error, Result};
use crate::floquet::PropagatorSettings;
use crate::graph::DEFAULT_CUTOFF;
use crate::model::ModelParams;
use crate::spectral::DEFAULT_R_BINS;
use crate::spectroscopy::DEFAULT_PEAK_THRESHOLD;

pub const DEFAULT_REALIZATIONS: usize = 100;
pub const DEFAULT_BASE_SEED: u64 = 1;
pub const DEFAULT_Q: usize = 700;
pub const DEFAULT_POINCARE_PERIODS: usize = 300;
pub const DEFAULT_POINCARE_ORBITS: usize = 8;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OmegaSpec {
    Value(f64),
    Expr(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    propagator: RawPropagator,
    #[serde(default)]
    ensemble: RawEnsemble,
    #[serde(default)]
    analysis: RawAnalysis,
    #[serde(default)]
    classical: RawClassical,
    #[serde(default)]
    spectroscopy: RawSpectroscopy,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    sites: Option<usize>,
    particles: Option<OneOrMany<u32>>,
    h: Option<f64>,
    g0: Option<f64>,
    g1: Option<f64>,
    u: Option<f64>,
    omega: Option<OmegaSpec>,
    w: Option<OneOrMany<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropagator {
    steps_per_period: Option<usize>,
    unitarity_tol: Option<f64>,
    convergence_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    realizations: Option<usize>,
    base_seed: Option<u64>,
    workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    floquet: Option<bool>,
    pr: Option<bool>,
    rstats: Option<bool>,
    graph: Option<bool>,
    classical: Option<bool>,
    spectroscopy: Option<bool>,
    jw: Option<bool>,
    cutoff: Option<f64>,
    r_bins: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassical {
    chart: Option<bool>,
    poincare: Option<bool>,
    chart_omega: Option<[f64; 2]>,
    chart_g1: Option<[f64; 2]>,
    chart_size: Option<[usize; 2]>,
    poincare_periods: Option<usize>,
    poincare_orbits: Option<usize>,
    tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectroscopy {
    q: Option<usize>,
    noise_sigma: Option<f64>,
    threshold: Option<f64>,
    include_dc: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// Model parameters shared by every case of a sweep over `particles` and `w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSweep {
    pub sites: usize,
    pub particles: Vec<u32>,
    pub h: f64,
    pub g0: f64,
    pub g1: f64,
    pub u: f64,
    /// Resolved drive frequency.
    pub omega: f64,
    /// The value as written, e.g. `"2*Omega0"`.
    pub omega_input: String,
    pub w: Vec<f64>,
}

impl ModelSweep {
    pub fn params(&self, particles: u32, w: f64) -> ModelParams {
        ModelParams {
            sites: self.sites,
            particles,
            h: self.h,
            g0: self.g0,
            g1: self.g1,
            u: self.u,
            omega: self.omega,
            w,
        }
    }

    /// Cases in sweep order: particle number outer, disorder inner.
    pub fn cases(&self) -> Vec<ModelParams> {
        self.particles
            .iter()
            .flat_map(|&n| self.w.iter().map(move |&w| self.params(n, w)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnsembleSettings {
    pub realizations: usize,
    pub base_seed: u64,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisSettings {
    pub floquet: bool,
    pub pr: bool,
    pub rstats: bool,
    pub graph: bool,
    pub classical: bool,
    pub spectroscopy: bool,
    pub jw: bool,
    pub cutoff: f64,
    pub r_bins: usize,
}

impl AnalysisSettings {
    pub fn none(cutoff: f64) -> Self {
        AnalysisSettings {
            floquet: false,
            pr: false,
            rstats: false,
            graph: false,
            classical: false,
            spectroscopy: false,
            jw: false,
            cutoff,
            r_bins: DEFAULT_R_BINS,
        }
    }

    pub fn needs_ensemble(&self) -> bool {
        self.floquet || self.pr || self.rstats || self.graph
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalSettings {
    /// Emit `chart.csv`.
    pub chart: bool,
    /// Emit the two Poincare-section files.
    pub poincare: bool,
    pub chart_omega: (f64, f64),
    pub chart_g1: (f64, f64),
    pub chart_size: (usize, usize),
    pub poincare_periods: usize,
    pub poincare_orbits: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectroscopySettings {
    pub q: usize,
    pub noise_sigma: f64,
    pub threshold: f64,
    pub include_dc: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSweep,
    pub propagator: PropagatorSettings,
    pub ensemble: EnsembleSettings,
    pub analysis: AnalysisSettings,
    pub classical: ClassicalSettings,
    pub spectroscopy: SpectroscopySettings,
    /// Run directory; every output lands below it.
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_toml("").expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let config = resolve(raw)?;
        config.validate()?;
        Ok(config)
    }

    /// Re-checks every section; call after programmatic edits.
    pub fn validate(&self) -> Result<()> {
        let prefixed = |section: &str, e: Error| match e {
            Error::InvalidParameter { key, message } => Error::InvalidParameter {
                key: format!("{section}.{key}"),
                message,
            },
            other => other,
        };
        if self.model.particles.is_empty() {
            return Err(Error::invalid("model.particles", "need at least one value"));
        }
        if self.model.w.is_empty() {
            return Err(Error::invalid("model.w", "need at least one value"));
        }
        for p in self.model.cases() {
            p.validate().map_err(|e| prefixed("model", e))?;
        }
        self.propagator.validate().map_err(|e| prefixed("propagator", e))?;
        if self.ensemble.realizations < 1 {
            return Err(Error::invalid("ensemble.realizations", "must be >= 1"));
        }
        if self.ensemble.workers == Some(0) {
            return Err(Error::invalid("ensemble.workers", "must be >= 1"));
        }
        let a = &self.analysis;
        if !(a.cutoff.is_finite() && a.cutoff >= 0.0) {
            return Err(Error::invalid("analysis.cutoff", format!("must be >= 0, got {}", a.cutoff)));
        }
        if a.r_bins < 1 {
            return Err(Error::invalid("analysis.r_bins", "must be >= 1"));
        }
        let c = &self.classical;
        if !(c.chart_omega.0 > 0.0 && c.chart_omega.1 >= c.chart_omega.0) {
            return Err(Error::invalid("classical.chart_omega", "need 0 < min <= max"));
        }
        if !(c.chart_g1.0 >= 0.0 && c.chart_g1.1 >= c.chart_g1.0) {
            return Err(Error::invalid("classical.chart_g1", "need 0 <= min <= max"));
        }
        if c.chart_size.0 == 0 || c.chart_size.1 == 0 {
            return Err(Error::invalid("classical.chart_size", "need at least one point per axis"));
        }
        if !(c.tol > 0.0) {
            return Err(Error::invalid("classical.tol", "must be > 0"));
        }
        if a.classical {
            omega0(&self.model.params(1, 0.0)).map_err(|e| prefixed("model", e))?;
        }
        let s = &self.spectroscopy;
        if s.q < 2 {
            return Err(Error::invalid("spectroscopy.q", format!("must be >= 2, got {}", s.q)));
        }
        if !(s.noise_sigma >= 0.0) {
            return Err(Error::invalid("spectroscopy.noise_sigma", "must be >= 0"));
        }
        if !(s.threshold > 0.0 && s.threshold < 1.0) {
            return Err(Error::invalid("spectroscopy.threshold", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Accepts a number or `"<factor>*Omega0"` (a bare `"Omega0"` means factor 1).
fn resolve_omega(spec: OmegaSpec, h: f64, g0: f64, sites: usize) -> Result<(f64, String)> {
    match spec {
        OmegaSpec::Value(v) => Ok((v, v.to_string())),
        OmegaSpec::Expr(s) => {
            let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
            let factor = match compact.strip_suffix("Omega0") {
                Some("") => 1.0,
                Some(prefix) => prefix
                    .strip_suffix('*')
                    .and_then(|f| f.parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid("model.omega", format!("cannot parse {s:?}; expected a number or \"2*Omega0\"")))?,
                None => {
                    return Err(Error::invalid(
                        "model.omega",
                        format!("cannot parse {s:?}; expected a number or \"2*Omega0\""),
                    ))
                }
            };
            let probe = ModelParams {
                sites,
                particles: 1,
                h,
                g0,
                g1: 0.0,
                u: 0.0,
                omega: 1.0,
                w: 0.0,
            };
            if sites < 2 {
                return Err(Error::invalid("model.sites", "must be >= 2 to resolve Omega0"));
            }
            let w0 = omega0(&probe).map_err(|e| match e {
                Error::InvalidParameter { key, message } => Error::InvalidParameter {
                    key: format!("model.{key}"),
                    message: format!("{message} (needed to resolve {s:?})"),
                },
                other => other,
            })?;
            Ok((factor * w0, s))
        }
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let m = raw.model;
    let sites = m.sites.unwrap_or(12);
    let g0 = m.g0.unwrap_or(1.0);
    let h = m.h.unwrap_or(g0);
    let (omega, omega_input) = resolve_omega(
        m.omega.unwrap_or(OmegaSpec::Expr("2*Omega0".into())),
        h,
        g0,
        sites,
    )?;
    let model = ModelSweep {
        sites,
        particles: m.particles.map(OneOrMany::into_vec).unwrap_or(vec![2]),
        h,
        g0,
        g1: m.g1.unwrap_or(0.9 * g0),
        u: m.u.unwrap_or(3.5 * g0),
        omega,
        omega_input,
        w: m.w.map(OneOrMany::into_vec).unwrap_or(vec![g0, 10.0 * g0]),
    };

    let defaults = PropagatorSettings::default();
    let p = raw.propagator;
    let propagator = PropagatorSettings {
        steps_per_period: p.steps_per_period.unwrap_or(defaults.steps_per_period),
        unitarity_tol: p.unitarity_tol.unwrap_or(defaults.unitarity_tol),
        convergence_tol: p.convergence_tol.unwrap_or(defaults.convergence_tol),
    };

    let e = raw.ensemble;
    let ensemble = EnsembleSettings {
        realizations: e.realizations.unwrap_or(DEFAULT_REALIZATIONS),
        base_seed: e.base_seed.unwrap_or(DEFAULT_BASE_SEED),
        workers: e.workers,
    };

    let a = raw.analysis;
    let analysis = AnalysisSettings {
        floquet: a.floquet.unwrap_or(true),
        pr: a.pr.unwrap_or(true),
        rstats: a.rstats.unwrap_or(true),
        graph: a.graph.unwrap_or(true),
        classical: a.classical.unwrap_or(true),
        spectroscopy: a.spectroscopy.unwrap_or(true),
        jw: a.jw.unwrap_or(true),
        cutoff: a.cutoff.unwrap_or(DEFAULT_CUTOFF * g0),
        r_bins: a.r_bins.unwrap_or(DEFAULT_R_BINS),
    };

    let c = raw.classical;
    let classical = ClassicalSettings {
        chart: c.chart.unwrap_or(true),
        poincare: c.poincare.unwrap_or(true),
        chart_omega: c.chart_omega.map(|[a, b]| (a, b)).unwrap_or(DEFAULT_CHART_OMEGA),
        chart_g1: c.chart_g1.map(|[a, b]| (a, b)).unwrap_or(DEFAULT_CHART_G1),
        chart_size: c.chart_size.map(|[a, b]| (a, b)).unwrap_or(DEFAULT_CHART_SIZE),
        poincare_periods: c.poincare_periods.unwrap_or(DEFAULT_POINCARE_PERIODS),
        poincare_orbits: c.poincare_orbits.unwrap_or(DEFAULT_POINCARE_ORBITS),
        tol: c.tol.unwrap_or(SECTION_TOL),
    };

    let s = raw.spectroscopy;
    let spectroscopy = SpectroscopySettings {
        q: s.q.unwrap_or(DEFAULT_Q),
        noise_sigma: s.noise_sigma.unwrap_or(0.0),
        threshold: s.threshold.unwrap_or(DEFAULT_PEAK_THRESHOLD),
        include_dc: s.include_dc.unwrap_or(true),
    };

    Ok(RunConfig {
        model,
        propagator,
        ensemble,
        analysis,
        classical,
        spectroscopy,
        output: raw.output.dir.unwrap_or_else(|| PathBuf::from("out/reference")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c.model.sites, 12);
        assert_eq!(c.model.particles, vec![2]);
        assert_eq!(c.model.w, vec![1.0, 10.0]);
        assert_eq!((c.model.h, c.model.g0, c.model.g1, c.model.u), (1.0, 1.0, 0.9, 3.5));
        assert!((c.model.omega - 2.9619).abs() < 5e-5);
        assert_eq!(c.analysis.cutoff, 1e-2);
        assert_eq!(c.ensemble.realizations, 100);
        assert_eq!(c.propagator, PropagatorSettings::default());
        assert_eq!(c.model.cases().len(), 2);
    }

    #[test]
    fn negative_disorder_names_the_constraint() {
        let err = RunConfig::from_toml("[model]\nw = -1\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("W >= 0") && text.contains("model.w"), "{text}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[model]\nomgea = 3.0\n").is_err());
        assert!(RunConfig::from_toml("[modle]\n").is_err());
    }

    #[test]
    fn omega_forms() {
        let c = RunConfig::from_toml("[model]\nomega = \"2*Omega0\"\n").unwrap();
        assert!((c.model.omega - 2.961921958772244).abs() < 1e-12);
        let c = RunConfig::from_toml("[model]\nomega = \"Omega0\"\n").unwrap();
        assert!((c.model.omega - 1.480960979386122).abs() < 1e-12);
        let c = RunConfig::from_toml("[model]\nomega = 5\n").unwrap();
        assert_eq!(c.model.omega, 5.0);
        assert!(RunConfig::from_toml("[model]\nomega = \"fast\"\n").is_err());
    }

    #[test]
    fn sweeps_and_scalars() {
        let c = RunConfig::from_toml("[model]\nparticles = [1, 2, 3]\nw = 10.0\n").unwrap();
        let cases = c.model.cases();
        assert_eq!(cases.len(), 3);
        assert_eq!(cases[2].particles, 3);
        assert!(cases.iter().all(|p| p.w == 10.0));
    }

    #[test]
    fn defaults_scale_with_g0() {
        let c = RunConfig::from_toml("[model]\ng0 = 2.0\n").unwrap();
        assert_eq!((c.model.h, c.model.g1, c.model.u), (2.0, 1.8, 7.0));
        assert_eq!(c.analysis.cutoff, 2e-2);
        assert_eq!(c.model.w, vec![2.0, 20.0]);
    }

    #[test]
    fn range_checks() {
        assert!(RunConfig::from_toml("[ensemble]\nrealizations = 0\n").is_err());
        assert!(RunConfig::from_toml("[propagator]\nsteps_per_period = 7\n").is_err());
        assert!(RunConfig::from_toml("[spectroscopy]\nthreshold = 1.5\n").is_err());
        assert!(RunConfig::from_toml("[model]\nsites = 11\n").is_err());
    }
}
