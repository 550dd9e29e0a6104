//! The run configuration: one TOML file per run, unknown keys rejected.

use std::path::{Path, PathBuf};

use parametrix::bounds::BoundsConfig;
use parametrix::parametrix_engine::{Coefficient, DriftSpec, NeumannConfig, PolynomialGrowth, TableSpec};
use parametrix::singular_quadrature::{SpaceRule, TimeRule};
use parametrix::validation::{GridSpec, OracleConfig, SuiteConfig};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliError, CliResult};

/// Environment variable naming the directory searched for configs.
pub const CONFIG_DIR_ENV: &str = "PARAMETRIX_CONFIG_DIR";
/// File looked up in that directory when no --config is given.
pub const DEFAULT_CONFIG_NAME: &str = "parametrix.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub drift: DriftSection,
    #[serde(default)]
    pub neumann: NeumannSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    pub grids: GridSpec,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub validation: SuiteConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub gamma: f64,
    /// declared sup |b|
    pub k: f64,
    /// declared inf b
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_minus: Option<f64>,
    pub coefficient: CoefficientSpec,
}

/// Built-in coefficients b(t, x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// amplitude·(0.6 + 0.4 cos(x + t)); the amplitude defaults to K
    BoundedOscillatory {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeumannSection {
    pub max_order: usize,
    pub tail_tolerance: f64,
    pub delta: f64,
}

impl Default for NeumannSection {
    fn default() -> Self {
        Self {
            max_order: 4,
            tail_tolerance: 1e-6,
            delta: 0.5,
        }
    }
}

/// Overrides of the standard rules; `doubled` doubles space and time rules.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_rule: Option<SpaceRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_rule: Option<TimeRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSpec>,
    pub doubled: bool,
    pub refined_tables: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    /// u = ∫ p f dy
    Cauchy,
    /// u = ∫∫ p g dy dθ with g(θ, y) = datum(y)
    Nonhomogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Datum {
    Zero,
    One,
    Identity,
    Square,
    /// exp(−y²)
    Gaussian,
}

impl Datum {
    pub fn eval(self, y: f64) -> f64 {
        match self {
            Datum::Zero => 0.0,
            Datum::One => 1.0,
            Datum::Identity => y,
            Datum::Square => y * y,
            Datum::Gaussian => (-y * y).exp(),
        }
    }

    pub fn growth(self) -> PolynomialGrowth {
        let w = match self {
            Datum::Zero | Datum::One | Datum::Gaussian => 0.0,
            Datum::Identity => 1.0,
            Datum::Square => 2.0,
        };
        PolynomialGrowth { w0: 1.0, w }
    }
}

/// Solutions are evaluated on the t and x axes of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub problem: Problem,
    pub datum: Datum,
    /// initial time
    #[serde(default)]
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// applies to the grid commands; validate always writes JSON
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// significant digits
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            path: None,
            precision: 17,
        }
    }
}

impl RunConfig {
    /// Parses and range-checks a config; diagnostics carry line and field.
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Normalized TOML form; parsing it gives back an equal config.
    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(config_err)
    }

    pub fn validate(&self) -> CliResult<()> {
        let wrap = |section: &str, e: parametrix::Error| CliError::Config(format!("[{section}] {e}"));
        let drift = self.drift_spec()?;
        drift.validate().map_err(|e| wrap("drift", e))?;
        self.neumann_config()?.validate().map_err(|e| wrap("neumann", e))?;
        self.grids.validate().map_err(|e| wrap("grids", e))?;
        self.bounds.validate().map_err(|e| wrap("bounds", e))?;
        self.suite_config().validate().map_err(|e| wrap("validation", e))?;
        if let Some(o) = &self.oracle {
            o.fd.validate(self.grids.t.max - self.grids.s.min)
                .map_err(|e| wrap("oracle.fd", e))?;
        }
        if let Some(rule) = &self.quadrature.space_rule {
            if rule.gamma != self.drift.gamma {
                return Err(CliError::Config(format!(
                    "[quadrature.space_rule] gamma = {} differs from drift.gamma = {}",
                    rule.gamma, self.drift.gamma
                )));
            }
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(CliError::Config(format!(
                "[output] precision must lie in 1..=17, got {}",
                self.output.precision
            )));
        }
        if let Some(s) = &self.solve {
            if !s.s.is_finite() || s.s >= self.grids.t.max {
                return Err(CliError::Config(format!(
                    "[solve] s = {} must be finite and below the largest t",
                    s.s
                )));
            }
        }
        Ok(())
    }

    pub fn drift_spec(&self) -> CliResult<DriftSpec> {
        let d = &self.drift;
        let b = match d.coefficient {
            CoefficientSpec::Zero => Coefficient::Constant(0.0),
            CoefficientSpec::Constant { value } => Coefficient::Constant(value),
            CoefficientSpec::BoundedOscillatory { amplitude } => {
                Coefficient::BoundedOscillatory(amplitude.unwrap_or(d.k))
            }
        };
        Ok(DriftSpec {
            b,
            gamma: d.gamma,
            k: d.k,
            k_minus: d.k_minus,
        })
    }

    pub fn neumann_config(&self) -> CliResult<NeumannConfig> {
        let n = &self.neumann;
        let q = &self.quadrature;
        let mut cfg = NeumannConfig::standard(self.drift.gamma);
        cfg.max_order = n.max_order;
        cfg.tail_tolerance = n.tail_tolerance;
        cfg.delta = n.delta;
        if let Some(r) = q.space_rule {
            cfg.space_rule = r;
        }
        if let Some(r) = q.time_rule {
            cfg.time_rule = r;
        }
        if let Some(t) = q.table {
            cfg.table = t;
        }
        if q.doubled {
            cfg = cfg.doubled();
        }
        if q.refined_tables {
            cfg = cfg.refined_tables();
        }
        Ok(cfg)
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            bounds: self.bounds.clone(),
            oracle: self.oracle,
            ..self.validation.clone()
        }
    }
}

/// --config if given (relative paths also tried under the config dir),
/// otherwise the default file in the config dir.
pub fn resolve_config_path(arg: Option<&Path>, config_dir: Option<&Path>) -> CliResult<PathBuf> {
    match (arg, config_dir) {
        (Some(p), _) if p.exists() => Ok(p.to_path_buf()),
        (Some(p), Some(dir)) if p.is_relative() && dir.join(p).exists() => Ok(dir.join(p)),
        (Some(p), _) => Err(CliError::Config(format!("config file {} not found", p.display()))),
        (None, Some(dir)) => {
            let p = dir.join(DEFAULT_CONFIG_NAME);
            if p.exists() {
                Ok(p)
            } else {
                Err(CliError::Config(format!("no --config given and {} does not exist", p.display())))
            }
        }
        (None, None) => Err(CliError::Config(format!("no --config given and {CONFIG_DIR_ENV} is unset"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[drift]
gamma = 0.5
k = 1.0
coefficient = { kind = "constant", value = 1.0 }

[grids]
t = { min = 0.5, max = 0.5, count = 1 }
x = { min = -1.0, max = 1.0, count = 3 }
s = { min = 0.0, max = 0.0, count = 1 }
y = { min = 0.0, max = 0.0, count = 1 }
exclusion = 0.25
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        let n = c.neumann_config().unwrap();
        assert_eq!(n, NeumannConfig::standard(0.5));
        assert_eq!(c.output.precision, 17);
        assert!(c.oracle.is_none() && c.solve.is_none());
    }

    #[test]
    fn round_trip_is_stable() {
        let text = format!(
            "{MINIMAL}\n[oracle]\npoints = 4\n[oracle.mc]\nseed = 7\n[solve]\nproblem = \"cauchy\"\ndatum = \"gaussian\"\n"
        );
        let c = RunConfig::parse(&text).unwrap();
        let again = RunConfig::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.oracle.unwrap().mc.seed, 7);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = MINIMAL.replace("k = 1.0", "k = 1.0\nkappa = 2.0");
        let e = RunConfig::parse(&text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("kappa") && msg.contains("line"), "{msg}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn ranges_are_checked() {
        for (from, to) in [
            ("gamma = 0.5", "gamma = 1.5"),
            ("count = 3", "count = 1"),
            ("exclusion = 0.25", "exclusion = 0.0"),
        ] {
            let e = RunConfig::parse(&MINIMAL.replacen(from, to, 1)).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{e}");
        }
        let e = RunConfig::parse(&format!("{MINIMAL}\n[output]\nprecision = 18\n")).unwrap_err();
        assert!(e.to_string().contains("precision"));
    }

    #[test]
    fn oscillatory_amplitude_defaults_to_k() {
        let text = MINIMAL.replace(
            r#"{ kind = "constant", value = 1.0 }"#,
            r#"{ kind = "bounded-oscillatory" }"#,
        );
        let d = RunConfig::parse(&text).unwrap().drift_spec().unwrap();
        assert_eq!(d.b.eval(0.0, 0.0), 1.0);
    }

    #[test]
    fn config_dir_lookup() {
        let dir = tempfile::tempdir().unwrap();
        assert!(resolve_config_path(None, Some(dir.path())).is_err());
        std::fs::write(dir.path().join(DEFAULT_CONFIG_NAME), MINIMAL).unwrap();
        std::fs::write(dir.path().join("other.toml"), MINIMAL).unwrap();
        assert_eq!(
            resolve_config_path(None, Some(dir.path())).unwrap(),
            dir.path().join(DEFAULT_CONFIG_NAME)
        );
        assert_eq!(
            resolve_config_path(Some(Path::new("other.toml")), Some(dir.path())).unwrap(),
            dir.path().join("other.toml")
        );
        assert!(resolve_config_path(None, None).is_err());
    }
}
