//! JSON scenario files.

use std::path::{Path, PathBuf};

use degentrace::oscint::{OscAmplitude, Phase};
use degentrace::spectrum::{BasisSize, OperatorModel};
use degentrace::symbols::{Extremum, SymbolSpec};
use degentrace::trace::{bump_phi, default_h_grid, fejer_phi, log_grid, TestFunction};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Gamma,
    Predict,
    OscintCheck,
    FlowCheck,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Subcommand executed by `degentrace run`.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub test_function: TestFunctionSpec,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub h_grid: Option<HGridSpec>,
    #[serde(default)]
    pub basis: BasisSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub oscint: Option<OscintSpec>,
    #[serde(default)]
    pub flow: Option<FlowSpec>,
}

fn default_eps() -> f64 {
    0.5
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `±(|x|² + |ξ|²)^m`, closed-form spectrum.
    OscPower {
        n: usize,
        m: usize,
        #[serde(default = "minimum")]
        extremum: Extremum,
        #[serde(default)]
        p1_shift: f64,
    },
    /// Polynomial symbol, quantized in a Hermite basis; `p₁(z₀)` is
    /// the symbol's `p1`.
    Poly { symbol: SymbolSpec },
}

fn minimum() -> Extremum {
    Extremum::Minimum
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionSpec {
    Fejer {
        #[serde(rename = "T")]
        t: f64,
        /// Use `φ(· − shift)`.
        #[serde(default)]
        shift: f64,
    },
    Bump {
        #[serde(rename = "T")]
        t: f64,
        #[serde(default = "default_quad_tol")]
        quad_tol: f64,
        #[serde(default)]
        shift: f64,
    },
}

impl Default for TestFunctionSpec {
    fn default() -> Self {
        TestFunctionSpec::Fejer { t: 1.0, shift: 0.0 }
    }
}

fn default_quad_tol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum HGridSpec {
    Values { values: Vec<f64> },
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default = "yes")]
        log: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisSpec {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// gnuplot script plotting the CSV.
    pub gnuplot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_quad_tol")]
    pub quad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quad: default_quad_tol() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscintSpec {
    pub k: usize,
    #[serde(default)]
    pub amplitude: Option<AmplitudeSpec>,
    pub lambdas: Vec<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "plus")]
    pub phase: Phase,
}

fn plus() -> Phase {
    Phase::Plus
}

/// Triangle profiles of half-width `T` sampled at spacing `dt`.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmplitudeSpec {
    /// `tri(t)·r^l0·(1 − r/r_max)`.
    TriangleCap {
        l0: usize,
        #[serde(rename = "T", default = "one")]
        t: f64,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "one")]
        r_max: f64,
    },
    /// `tri(t)·r^l` on `r ≤ r_max`.
    TrianglePower {
        l: usize,
        #[serde(rename = "T", default = "one")]
        t: f64,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "one")]
        r_max: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    0.01
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub m: usize,
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub taylor_order: Option<usize>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // output paths are relative to the config file
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.output.csv, &mut cfg.output.json, &mut cfg.output.gnuplot].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn model(&self) -> Result<OperatorModel, CliError> {
        let spec = self.model.as_ref().ok_or_else(|| CliError::Config("config has no \"model\"".into()))?;
        Ok(match spec {
            ModelSpec::OscPower { n, m, extremum, p1_shift } => {
                OperatorModel::osc_power(*n, *m, *extremum)?.with_p1_shift(*p1_shift)
            }
            ModelSpec::Poly { symbol } => OperatorModel::poly(symbol.build()?),
        })
    }

    pub fn test_function(&self) -> Result<TestFunction, CliError> {
        let (f, shift) = match &self.test_function {
            TestFunctionSpec::Fejer { t, shift } => (fejer_phi(*t)?, *shift),
            TestFunctionSpec::Bump { t, quad_tol, shift } => (bump_phi(*t, *quad_tol)?, *shift),
        };
        Ok(if shift == 0.0 { f } else { f.shifted(shift) })
    }

    pub fn h_grid(&self, model: &OperatorModel) -> Result<Vec<f64>, CliError> {
        let grid = match &self.h_grid {
            None => default_h_grid(model),
            Some(HGridSpec::Values { values }) => values.clone(),
            Some(HGridSpec::Range { start, stop, points, log }) => {
                if *log {
                    log_grid(*start, *stop, *points)?
                } else if *points < 2 {
                    return Err(CliError::Config("h grid needs at least 2 points".into()));
                } else {
                    (0..*points).map(|i| start + (stop - start) * i as f64 / (*points - 1) as f64).collect()
                }
            }
        };
        if grid.is_empty() || grid.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(CliError::Config(format!("h grid {grid:?} must be non-empty and positive")));
        }
        Ok(grid)
    }

    pub fn basis(&self) -> BasisSize {
        match self.basis {
            BasisSpec::Auto => BasisSize::Auto,
            BasisSpec::Fixed(n) => BasisSize::Fixed(n),
        }
    }

    pub fn amplitude(&self) -> Result<(OscAmplitude, &OscintSpec), CliError> {
        let spec = self.oscint.as_ref().ok_or_else(|| CliError::Config("config has no \"oscint\" section".into()))?;
        let amp = match spec.amplitude.clone() {
            None => OscAmplitude::triangle_cap(spec.k, spec.k - 1, 1.0, 0.01, 1.0)?,
            Some(AmplitudeSpec::TriangleCap { l0, t, dt, r_max }) => OscAmplitude::triangle_cap(spec.k, l0, t, dt, r_max)?,
            Some(AmplitudeSpec::TrianglePower { l, t, dt, r_max }) => {
                let tri = degentrace::oscint::SampledProfile::triangle(t, dt)?;
                OscAmplitude::new(spec.k, vec![(l, tri)], r_max)?
            }
        };
        Ok((amp, spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg: ScenarioConfig = serde_json::from_str(r#"{"model": {"kind": "osc_power", "n": 1, "m": 2}}"#).unwrap();
        assert_eq!(cfg.eps, 0.5);
        let model = cfg.model().unwrap();
        assert_eq!(cfg.h_grid(&model).unwrap().len(), 9);
        assert!(matches!(cfg.basis(), BasisSize::Auto));
        assert_eq!(cfg.test_function().unwrap().support(), 1.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: Result<ScenarioConfig, _> = serde_json::from_str(r#"{"model": {"kind": "osc_power", "n": 1, "m": 2}, "epsilon": 1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn explicit_grid_and_fixed_basis() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{"model": {"kind": "osc_power", "n": 1, "m": 3}, "h_grid": {"values": [0.1, 0.01]}, "basis": {"fixed": 64}}"#,
        )
        .unwrap();
        assert_eq!(cfg.h_grid(&cfg.model().unwrap()).unwrap(), vec![0.1, 0.01]);
        assert!(matches!(cfg.basis(), BasisSize::Fixed(64)));
    }
}
