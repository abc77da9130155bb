//! Scenario configuration: TOML file, CLI flag overrides, validation.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qref_core::scenarios::GridSpec;
use qref_core::CorrelationKind;

/// Fixed default seed; runs are reproducible unless a seed is supplied.
pub const DEFAULT_SEED: u64 = 3_141_592_653;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Epr,
    Bell,
    Extended,
    ChshScan,
    Verify,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Epr => "epr",
            Kind::Bell => "bell",
            Kind::Extended => "extended",
            Kind::ChshScan => "chsh-scan",
            Kind::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Rad,
    Deg,
}

impl AngleUnit {
    pub fn name(self) -> &'static str {
        match self {
            AngleUnit::Rad => "rad",
            AngleUnit::Deg => "deg",
        }
    }

    /// Converts a tagged angle to radians. Units are never mixed: one unit
    /// applies to every angle of a run.
    pub fn to_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Rad => value,
            AngleUnit::Deg => value * std::f64::consts::PI / 180.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// Line-delimited structured records only.
    Records,
    /// Records plus a CSV projection of every distribution.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    Quantum,
    Factorized,
}

impl From<Correlation> for CorrelationKind {
    fn from(value: Correlation) -> Self {
        match value {
            Correlation::Quantum => CorrelationKind::Quantum,
            Correlation::Factorized => CorrelationKind::Factorized,
        }
    }
}

/// The on-disk configuration. Every field is optional; the subcommand and
/// built-in defaults fill the gaps, and CLI flags override the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "angles-unit", skip_serializing_if = "Option::is_none")]
    pub angles_unit: Option<AngleUnit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Correlation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Amplitudes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles: Option<Angles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Output>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitudes {
    /// [re, im] pair for the a coefficient (epr).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<[f64; 2]>,
    /// Schmidt coefficient list for bell / extended / chsh-scan.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angles {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

/// Scenario parameters after defaults, config and flags have been merged,
/// with all angles in radians and amplitudes normalized.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub kind: Kind,
    pub seed: u64,
    pub out: PathBuf,
    /// Whether the result path came from a flag or the config (as opposed
    /// to the built-in default).
    pub out_explicit: bool,
    pub format: OutputFormat,
    pub angles_unit: AngleUnit,
    pub warnings: Vec<String>,
    pub run: RunParams,
}

#[derive(Debug, Clone)]
pub enum RunParams {
    Epr {
        a: Complex64,
        b: Complex64,
        delta: f64,
    },
    Bell {
        c: [Complex64; 2],
        theta1: f64,
        theta2: f64,
    },
    Extended {
        c: [Complex64; 2],
        theta1: f64,
        theta2: f64,
    },
    ChshScan {
        c: [Complex64; 2],
        grid: GridSpec,
        correlation: Correlation,
    },
    Verify,
}

/// Flag-level overrides collected by the argument parser.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub angles_unit: Option<AngleUnit>,
}

pub fn load_file(path: &std::path::Path) -> Result<ScenarioConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config `{}`: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("config `{}`: {e}", path.display()))
}

pub fn resolve(
    kind: Kind,
    config: Option<ScenarioConfig>,
    overrides: &Overrides,
) -> Result<Resolved, String> {
    let config = config.unwrap_or_default();
    if let Some(config_kind) = config.kind {
        if config_kind != kind {
            return Err(format!(
                "config field `kind` is `{}` but the subcommand is `{}`",
                config_kind.name(),
                kind.name()
            ));
        }
    }
    let mut warnings = Vec::new();
    let seed = overrides.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let angles_unit = overrides
        .angles_unit
        .or(config.angles_unit)
        .unwrap_or(AngleUnit::Rad);
    let format = overrides
        .format
        .or(config.output.as_ref().and_then(|o| o.format))
        .unwrap_or(OutputFormat::Records);
    let explicit_out = overrides
        .out
        .clone()
        .or(config.output.as_ref().and_then(|o| o.path.clone()));
    let out_explicit = explicit_out.is_some();
    let out =
        explicit_out.unwrap_or_else(|| PathBuf::from(format!("qref_{}.jsonl", kind.name())));

    let angle = |value: Option<f64>, name: &str, default: f64| -> Result<f64, String> {
        match value {
            Some(v) if !v.is_finite() => Err(format!("angle `{name}` is not finite")),
            Some(v) => Ok(angles_unit.to_radians(v)),
            None => Ok(default),
        }
    };
    let angles = config.angles.clone().unwrap_or_default();
    let amplitudes = config.amplitudes.clone().unwrap_or_default();

    let run = match kind {
        Kind::Verify => RunParams::Verify,
        Kind::Epr => {
            let inv = std::f64::consts::FRAC_1_SQRT_2;
            let raw_a = amplitudes.a.map(to_complex).unwrap_or(Complex64::new(inv, 0.0));
            let raw_b = amplitudes.b.map(to_complex).unwrap_or(Complex64::new(inv, 0.0));
            let [a, b] = normalize_pair([raw_a, raw_b], "a/b", &mut warnings)?;
            RunParams::Epr {
                a,
                b,
                delta: angle(angles.delta, "delta", std::f64::consts::FRAC_PI_4)?,
            }
        }
        Kind::Bell | Kind::Extended => {
            let c = resolve_schmidt(&amplitudes, &mut warnings)?;
            let theta1 = angle(angles.theta1, "theta1", 0.0)?;
            let theta2 = angle(angles.theta2, "theta2", std::f64::consts::FRAC_PI_4)?;
            if kind == Kind::Bell {
                RunParams::Bell { c, theta1, theta2 }
            } else {
                RunParams::Extended { c, theta1, theta2 }
            }
        }
        Kind::ChshScan => {
            let c = resolve_schmidt(&amplitudes, &mut warnings)?;
            let grid_cfg = config.grid.clone().unwrap_or_default();
            let steps = grid_cfg.steps.unwrap_or(25);
            if steps < 1 {
                return Err("grid steps must be at least 1".into());
            }
            let start = angle(grid_cfg.start, "grid.start", 0.0)?;
            let stop = angle(grid_cfg.stop, "grid.stop", std::f64::consts::TAU)?;
            if stop <= start {
                return Err("grid stop must exceed grid start".into());
            }
            RunParams::ChshScan {
                c,
                grid: GridSpec { start, stop, steps },
                correlation: config.correlation.unwrap_or(Correlation::Quantum),
            }
        }
    };

    Ok(Resolved {
        kind,
        seed,
        out,
        out_explicit,
        format,
        angles_unit,
        warnings,
        run,
    })
}

fn to_complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn resolve_schmidt(
    amplitudes: &Amplitudes,
    warnings: &mut Vec<String>,
) -> Result<[Complex64; 2], String> {
    let c = match &amplitudes.c {
        None => return Ok(qref_core::singlet_coefficients()),
        Some(list) => {
            if list.len() != 2 {
                return Err(format!(
                    "amplitudes.c must list exactly 2 coefficients, got {}",
                    list.len()
                ));
            }
            [to_complex(list[0]), to_complex(list[1])]
        }
    };
    normalize_pair(c, "c", warnings)
}

/// Applies the normalization policy: deviations up to 1e-10 pass through,
/// up to 1e-8 are renormalized with a warning, anything larger is an error.
fn normalize_pair(
    pair: [Complex64; 2],
    what: &str,
    warnings: &mut Vec<String>,
) -> Result<[Complex64; 2], String> {
    let sum: f64 = pair.iter().map(|z| z.norm_sqr()).sum();
    if !sum.is_finite() {
        return Err(format!("amplitudes `{what}` are not finite"));
    }
    let deviation = (sum - 1.0).abs();
    if deviation > 1e-8 {
        return Err(format!(
            "amplitudes `{what}` are not normalized: |sum - 1| = {deviation:.3e} exceeds 1e-8"
        ));
    }
    if deviation > 1e-10 {
        warnings.push(format!(
            "amplitudes `{what}` renormalized (|sum - 1| = {deviation:.3e})"
        ));
        let norm = sum.sqrt();
        return Ok([pair[0] / norm, pair[1] / norm]);
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_is_idempotent() {
        let text = r#"
kind = "bell"
seed = 9
angles-unit = "deg"

[amplitudes]
c = [[0.7071067811865476, 0.0], [-0.7071067811865476, 0.0]]

[angles]
theta1 = 0.0
theta2 = 45.0

[output]
path = "bell.jsonl"
format = "csv"
"#;
        let parsed: ScenarioConfig = toml::from_str(text).unwrap();
        let serialized = toml::to_string(&parsed).unwrap();
        let reparsed: ScenarioConfig = toml::from_str(&serialized).unwrap();
        assert_eq!(parsed, reparsed);
        let reserialized = toml::to_string(&reparsed).unwrap();
        assert_eq!(serialized, reserialized);
    }

    #[test]
    fn degrees_convert_exactly_at_pi() {
        assert_eq!(AngleUnit::Deg.to_radians(180.0), std::f64::consts::PI);
        assert_eq!(AngleUnit::Rad.to_radians(1.25), 1.25);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let config = ScenarioConfig {
            kind: Some(Kind::Epr),
            ..Default::default()
        };
        let err = resolve(Kind::Bell, Some(config), &Overrides::default()).unwrap_err();
        assert!(err.contains("kind"));
    }

    #[test]
    fn slightly_denormalized_amplitudes_are_renormalized_with_warning() {
        let config = ScenarioConfig {
            amplitudes: Some(Amplitudes {
                a: Some([0.6 + 3e-10, 0.0]),
                b: Some([0.8, 0.0]),
                c: None,
            }),
            ..Default::default()
        };
        let resolved = resolve(Kind::Epr, Some(config), &Overrides::default()).unwrap();
        assert_eq!(resolved.warnings.len(), 1);
        match resolved.run {
            RunParams::Epr { a, b, .. } => {
                assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
            }
            _ => panic!("expected epr params"),
        }
    }

    #[test]
    fn badly_denormalized_amplitudes_are_rejected() {
        let config = ScenarioConfig {
            amplitudes: Some(Amplitudes {
                a: Some([1.0, 0.0]),
                b: Some([0.5, 0.0]),
                c: None,
            }),
            ..Default::default()
        };
        assert!(resolve(Kind::Epr, Some(config), &Overrides::default()).is_err());
    }

    #[test]
    fn flags_override_config() {
        let config = ScenarioConfig {
            seed: Some(1),
            output: Some(Output {
                path: Some(PathBuf::from("from_config.jsonl")),
                format: Some(OutputFormat::Records),
            }),
            ..Default::default()
        };
        let overrides = Overrides {
            seed: Some(2),
            out: Some(PathBuf::from("from_flag.jsonl")),
            format: Some(OutputFormat::Csv),
            angles_unit: None,
        };
        let resolved = resolve(Kind::Bell, Some(config), &overrides).unwrap();
        assert_eq!(resolved.seed, 2);
        assert_eq!(resolved.out, PathBuf::from("from_flag.jsonl"));
        assert_eq!(resolved.format, OutputFormat::Csv);
    }

    #[test]
    fn defaults_fill_missing_pieces() {
        let resolved = resolve(Kind::ChshScan, None, &Overrides::default()).unwrap();
        assert_eq!(resolved.seed, DEFAULT_SEED);
        match resolved.run {
            RunParams::ChshScan { grid, correlation, .. } => {
                assert_eq!(grid.steps, 25);
                assert_eq!(correlation, Correlation::Quantum);
            }
            _ => panic!("expected chsh-scan params"),
        }
    }
}
