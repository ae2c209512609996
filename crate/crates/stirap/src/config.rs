//! Run-configuration parsing: TOML files with explicit unit suffixes on
//! every physical quantity, validated fail-closed (unknown keys are
//! rejected) before any computation starts.
//!
//! Times accept `us`, `ms`, `s`; frequencies accept `Hz`, `kHz`, `MHz`,
//! `GHz` (ordinary frequencies, converted to angular internally) and
//! `rad_s` (already angular). Dimensionless values are plain numbers.

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::{DEFAULT_ETA, DEFAULT_TARGET_RABI, DEFAULT_TRAP_FREQUENCY, PHYSICAL_DELTA};
use crate::experiments::{
    comparison_s_factor, Integration, DEFAULT_SMOOTHING_WINDOW, DEFAULT_THERMAL_MEAN_N,
    THERMAL_SCAN_S_FACTOR,
};
use crate::fockspace::Transition;
use crate::TAU;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad quantity '{0}': expected '<number> <unit>' with unit one of us, ms, s, Hz, kHz, MHz, GHz, rad_s")]
    BadQuantity(String),
    #[error("'{field}' has time units but '{unit}' is a frequency (or vice versa)")]
    WrongDimension { field: String, unit: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("experiment '{0}' is not one of the supported kinds (run `stirap list`)")]
    UnknownExperiment(String),
    #[error("experiment '{kind}' requires the [{table}] table")]
    MissingTable { kind: String, table: &'static str },
}

/// Parse a unit-suffixed quantity into SI seconds (times) or rad/s
/// (frequencies). `expect_time` selects the dimension.
pub fn parse_quantity(raw: &str, field: &str, expect_time: bool) -> Result<f64, ConfigError> {
    let s = raw.trim();
    let split = s
        .find(|c: char| c.is_ascii_alphabetic())
        .ok_or_else(|| ConfigError::BadQuantity(raw.into()))?;
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| ConfigError::BadQuantity(raw.into()))?;
    let unit = unit.trim();
    let (si, is_time) = match unit {
        "us" => (value * 1e-6, true),
        "ms" => (value * 1e-3, true),
        "s" => (value, true),
        "Hz" => (value * TAU, false),
        "kHz" => (value * TAU * 1e3, false),
        "MHz" => (value * TAU * 1e6, false),
        "GHz" => (value * TAU * 1e9, false),
        "rad_s" => (value, false),
        _ => return Err(ConfigError::BadQuantity(raw.into())),
    };
    if is_time != expect_time {
        return Err(ConfigError::WrongDimension {
            field: field.into(),
            unit: unit.into(),
        });
    }
    Ok(si)
}

/// The seven experiment kinds the CLI can dispatch.
#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DelayScan,
    Map2dCarrier,
    Map2dSideband,
    FockDynamicsCarrier,
    FockDynamicsRedSideband,
    CompareRabiStirap,
    Thermometry,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::DelayScan,
        ExperimentKind::Map2dCarrier,
        ExperimentKind::Map2dSideband,
        ExperimentKind::FockDynamicsCarrier,
        ExperimentKind::FockDynamicsRedSideband,
        ExperimentKind::CompareRabiStirap,
        ExperimentKind::Thermometry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DelayScan => "delay_scan",
            ExperimentKind::Map2dCarrier => "map_2d_carrier",
            ExperimentKind::Map2dSideband => "map_2d_sideband",
            ExperimentKind::FockDynamicsCarrier => "fock_dynamics_carrier",
            ExperimentKind::FockDynamicsRedSideband => "fock_dynamics_red_sideband",
            ExperimentKind::CompareRabiStirap => "compare_rabi_stirap",
            ExperimentKind::Thermometry => "thermometry",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| ConfigError::UnknownExperiment(name.into()))
    }

    /// Output files (stems) the experiment produces.
    pub fn output_stems(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::DelayScan => &["fig3a"],
            ExperimentKind::Map2dCarrier => &["fig4"],
            ExperimentKind::Map2dSideband => &["fig5"],
            ExperimentKind::FockDynamicsCarrier => &["fig6a"],
            ExperimentKind::FockDynamicsRedSideband => &["fig6b"],
            ExperimentKind::CompareRabiStirap => &["fig7a", "fig7b"],
            ExperimentKind::Thermometry => &["thermometry"],
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::DelayScan => {
                "carrier transfer efficiency vs signed pulse delay at fixed pulse length"
            }
            ExperimentKind::Map2dCarrier => {
                "carrier efficiency map over pulse length x delay scaling factor"
            }
            ExperimentKind::Map2dSideband => {
                "blue-sideband efficiency map over pulse length x delay scaling factor"
            }
            ExperimentKind::FockDynamicsCarrier => {
                "time-resolved carrier transfer for Fock states n = 0..14"
            }
            ExperimentKind::FockDynamicsRedSideband => {
                "time-resolved red-sideband transfer for Fock states n = 0..14"
            }
            ExperimentKind::CompareRabiStirap => {
                "thermal-state Rabi vs STIRAP transfer on blue sideband and carrier"
            }
            ExperimentKind::Thermometry => {
                "thermal sideband scans, ground-state population and temperature extraction"
            }
        }
    }
}

/// Validated physics parameters (SI / angular units).
#[derive(Clone, Debug, serde::Serialize)]
pub struct PhysicsConfig {
    pub eta: f64,
    pub trap_frequency: f64,
    pub target_effective_rabi: f64,
    pub one_photon_detuning: f64,
    pub thermal_mean_n: f64,
    pub smoothing_window: usize,
}

impl PhysicsConfig {
    /// Dynamics-layer physics inputs (drops the thermal/smoothing fields,
    /// which belong to the experiment layer).
    pub fn physics(&self) -> crate::dynamics::Physics {
        crate::dynamics::Physics {
            eta: self.eta,
            trap_frequency: self.trap_frequency,
            target_effective_rabi: self.target_effective_rabi,
            delta: self.one_photon_detuning,
        }
    }
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            trap_frequency: DEFAULT_TRAP_FREQUENCY,
            target_effective_rabi: DEFAULT_TARGET_RABI,
            one_photon_detuning: PHYSICAL_DELTA,
            thermal_mean_n: DEFAULT_THERMAL_MEAN_N,
            smoothing_window: DEFAULT_SMOOTHING_WINDOW,
        }
    }
}

/// A swept axis given as min / max / number of points.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64)
            .collect()
    }

    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        if self.points < 2 || self.max <= self.min {
            return Err(ConfigError::Invalid(format!(
                "axis '{name}' needs points >= 2 and max > min"
            )));
        }
        Ok(())
    }
}

/// Kind-specific settings, fully resolved to SI.
#[derive(Clone, Debug, serde::Serialize)]
pub enum KindConfig {
    DelayScan {
        t_pulse: f64,
        delay: AxisConfig,
    },
    Map2d {
        transition: Transition,
        t_pulse: AxisConfig,
        s_factor: AxisConfig,
    },
    FockDynamics {
        transition: Transition,
        t_pulse: f64,
        s_factor: f64,
        n_top: usize,
        samples: usize,
    },
    CompareRabiStirap {
        rabi_t_max: f64,
        rabi_points: usize,
        t_pulse: AxisConfig,
    },
    Thermometry {
        t_pulse: AxisConfig,
        window: (f64, f64),
        linewidth: f64,
        s_factor: f64,
    },
}

/// A fully validated run configuration.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    /// Output directory requested by the config (CLI flag and environment
    /// variable take precedence).
    pub output_dir: Option<String>,
    /// Random seed reserved for stochastic smoothing; the default
    /// pipeline is fully deterministic and ignores it.
    pub seed: Option<u64>,
    pub physics: PhysicsConfig,
    pub integration: Integration,
    pub kind_config: KindConfig,
    /// SHA-256 of the raw config text; stamped into every output file.
    pub hash: String,
}

// ---------------------------------------------------------------------
// raw (serde) layer

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    output_dir: Option<String>,
    seed: Option<u64>,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    integration: RawIntegration,
    delay_scan: Option<RawDelayScan>,
    map_2d: Option<RawMap2d>,
    fock_dynamics: Option<RawFockDynamics>,
    compare: Option<RawCompare>,
    thermometry: Option<RawThermometry>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    eta: Option<f64>,
    trap_frequency: Option<String>,
    target_effective_rabi: Option<String>,
    one_photon_detuning: Option<String>,
    thermal_mean_n: Option<f64>,
    smoothing_window: Option<usize>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegration {
    mode: Option<String>,
    steps_per_us: Option<f64>,
    tol: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    min: String,
    max: String,
    points: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnitlessAxis {
    min: f64,
    max: f64,
    points: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelayScan {
    t_pulse: String,
    delay: RawAxis,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap2d {
    t_pulse: RawAxis,
    s_factor: RawUnitlessAxis,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFockDynamics {
    t_pulse: Option<String>,
    s_factor: Option<f64>,
    n_top: Option<usize>,
    samples: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompare {
    rabi_t_max: Option<String>,
    rabi_points: Option<usize>,
    t_pulse: Option<RawAxis>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermometry {
    t_pulse: Option<RawAxis>,
    window_min: Option<String>,
    window_max: Option<String>,
    linewidth: Option<String>,
}

fn time_axis(raw: &RawAxis, field: &str) -> Result<AxisConfig, ConfigError> {
    let axis = AxisConfig {
        min: parse_quantity(&raw.min, field, true)?,
        max: parse_quantity(&raw.max, field, true)?,
        points: raw.points,
    };
    axis.validate(field)?;
    Ok(axis)
}

/// SHA-256 hex digest of the raw config text.
pub fn config_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parse and validate a config from TOML text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    let kind = ExperimentKind::from_name(&raw.experiment)?;

    let d = PhysicsConfig::default();
    let physics = PhysicsConfig {
        eta: raw.params.eta.unwrap_or(d.eta),
        trap_frequency: raw
            .params
            .trap_frequency
            .as_deref()
            .map(|s| parse_quantity(s, "params.trap_frequency", false))
            .transpose()?
            .unwrap_or(d.trap_frequency),
        target_effective_rabi: raw
            .params
            .target_effective_rabi
            .as_deref()
            .map(|s| parse_quantity(s, "params.target_effective_rabi", false))
            .transpose()?
            .unwrap_or(d.target_effective_rabi),
        one_photon_detuning: raw
            .params
            .one_photon_detuning
            .as_deref()
            .map(|s| parse_quantity(s, "params.one_photon_detuning", false))
            .transpose()?
            .unwrap_or(d.one_photon_detuning),
        thermal_mean_n: raw.params.thermal_mean_n.unwrap_or(d.thermal_mean_n),
        smoothing_window: raw.params.smoothing_window.unwrap_or(d.smoothing_window),
    };
    if !(physics.eta > 0.0 && physics.eta < 1.0) {
        return Err(ConfigError::Invalid(format!(
            "params.eta = {} outside (0, 1)",
            physics.eta
        )));
    }
    if physics.thermal_mean_n < 0.0 {
        return Err(ConfigError::Invalid(
            "params.thermal_mean_n must be non-negative".into(),
        ));
    }
    if physics.trap_frequency <= 0.0
        || physics.target_effective_rabi <= 0.0
        || physics.one_photon_detuning <= 0.0
    {
        return Err(ConfigError::Invalid(
            "frequencies must be positive".into(),
        ));
    }

    let integration = match raw.integration.mode.as_deref() {
        None | Some("fixed_rate") => {
            if raw.integration.tol.is_some() {
                return Err(ConfigError::Invalid(
                    "integration.tol only applies to mode = 'adaptive'".into(),
                ));
            }
            Integration::FixedRate {
                steps_per_us: raw.integration.steps_per_us.unwrap_or(4.0),
            }
        }
        Some("adaptive") => {
            if raw.integration.steps_per_us.is_some() {
                return Err(ConfigError::Invalid(
                    "integration.steps_per_us only applies to mode = 'fixed_rate'".into(),
                ));
            }
            Integration::Adaptive {
                tol: raw.integration.tol.unwrap_or(1e-9),
            }
        }
        Some(other) => {
            return Err(ConfigError::Invalid(format!(
                "integration.mode '{other}' must be 'fixed_rate' or 'adaptive'"
            )))
        }
    };
    if let Integration::FixedRate { steps_per_us } = integration {
        if !(0.5..=64.0).contains(&steps_per_us) {
            return Err(ConfigError::Invalid(format!(
                "integration.steps_per_us = {steps_per_us} outside [0.5, 64]"
            )));
        }
    }

    let missing = |table: &'static str| ConfigError::MissingTable {
        kind: kind.name().into(),
        table,
    };
    let kind_config = match kind {
        ExperimentKind::DelayScan => {
            let t = raw.delay_scan.as_ref().ok_or_else(|| missing("delay_scan"))?;
            let t_pulse = parse_quantity(&t.t_pulse, "delay_scan.t_pulse", true)?;
            if t_pulse <= 0.0 {
                return Err(ConfigError::Invalid("delay_scan.t_pulse must be positive".into()));
            }
            let delay = time_axis(&t.delay, "delay_scan.delay")?;
            KindConfig::DelayScan { t_pulse, delay }
        }
        ExperimentKind::Map2dCarrier | ExperimentKind::Map2dSideband => {
            let t = raw.map_2d.as_ref().ok_or_else(|| missing("map_2d"))?;
            let t_pulse = time_axis(&t.t_pulse, "map_2d.t_pulse")?;
            if t_pulse.min <= 0.0 {
                return Err(ConfigError::Invalid("map_2d.t_pulse.min must be positive".into()));
            }
            let s_factor = AxisConfig {
                min: t.s_factor.min,
                max: t.s_factor.max,
                points: t.s_factor.points,
            };
            s_factor.validate("map_2d.s_factor")?;
            if s_factor.min < 0.0 {
                return Err(ConfigError::Invalid(
                    "map_2d.s_factor.min must be non-negative (the pulse order fixes the delay sign)"
                        .into(),
                ));
            }
            KindConfig::Map2d {
                transition: if kind == ExperimentKind::Map2dCarrier {
                    Transition::Carrier
                } else {
                    Transition::BlueSideband
                },
                t_pulse,
                s_factor,
            }
        }
        ExperimentKind::FockDynamicsCarrier | ExperimentKind::FockDynamicsRedSideband => {
            let carrier = kind == ExperimentKind::FockDynamicsCarrier;
            let defaults = if carrier { (50e-6, 0.7) } else { (100e-6, 0.4) };
            let t = raw.fock_dynamics.as_ref();
            let t_pulse = t
                .and_then(|t| t.t_pulse.as_deref())
                .map(|s| parse_quantity(s, "fock_dynamics.t_pulse", true))
                .transpose()?
                .unwrap_or(defaults.0);
            let s_factor = t.and_then(|t| t.s_factor).unwrap_or(defaults.1);
            if t_pulse <= 0.0 || s_factor < 0.0 {
                return Err(ConfigError::Invalid(
                    "fock_dynamics needs t_pulse > 0 and s_factor >= 0".into(),
                ));
            }
            KindConfig::FockDynamics {
                transition: if carrier {
                    Transition::Carrier
                } else {
                    Transition::RedSideband
                },
                t_pulse,
                s_factor,
                n_top: t.and_then(|t| t.n_top).unwrap_or(14),
                samples: t.and_then(|t| t.samples).unwrap_or(200),
            }
        }
        ExperimentKind::CompareRabiStirap => {
            let t = raw.compare.as_ref();
            let rabi_t_max = t
                .and_then(|t| t.rabi_t_max.as_deref())
                .map(|s| parse_quantity(s, "compare.rabi_t_max", true))
                .transpose()?
                .unwrap_or(40e-6);
            let rabi_points = t.and_then(|t| t.rabi_points).unwrap_or(80);
            if rabi_t_max <= 0.0 || rabi_points < 2 {
                return Err(ConfigError::Invalid(
                    "compare needs rabi_t_max > 0 and rabi_points >= 2".into(),
                ));
            }
            let t_pulse = t
                .and_then(|t| t.t_pulse.as_ref())
                .map(|a| time_axis(a, "compare.t_pulse"))
                .transpose()?
                .unwrap_or(AxisConfig {
                    min: 20e-6,
                    max: 150e-6,
                    points: 14,
                });
            KindConfig::CompareRabiStirap {
                rabi_t_max,
                rabi_points,
                t_pulse,
            }
        }
        ExperimentKind::Thermometry => {
            let t = raw.thermometry.as_ref();
            let t_pulse = t
                .and_then(|t| t.t_pulse.as_ref())
                .map(|a| time_axis(a, "thermometry.t_pulse"))
                .transpose()?
                .unwrap_or(AxisConfig {
                    min: 105e-6,
                    max: 150e-6,
                    points: 10,
                });
            let window = (
                t.and_then(|t| t.window_min.as_deref())
                    .map(|s| parse_quantity(s, "thermometry.window_min", true))
                    .transpose()?
                    .unwrap_or(120e-6),
                t.and_then(|t| t.window_max.as_deref())
                    .map(|s| parse_quantity(s, "thermometry.window_max", true))
                    .transpose()?
                    .unwrap_or(150e-6),
            );
            if window.1 <= window.0 {
                return Err(ConfigError::Invalid(
                    "thermometry window_max must exceed window_min".into(),
                ));
            }
            let linewidth = t
                .and_then(|t| t.linewidth.as_deref())
                .map(|s| parse_quantity(s, "thermometry.linewidth", false))
                .transpose()?
                .unwrap_or(TAU * 41.3e6);
            KindConfig::Thermometry {
                t_pulse,
                window,
                linewidth,
                s_factor: THERMAL_SCAN_S_FACTOR,
            }
        }
    };

    Ok(RunConfig {
        kind,
        output_dir: raw.output_dir,
        seed: raw.seed,
        physics,
        integration,
        kind_config,
        hash: config_hash(text),
    })
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Default delay-scaling factor the comparison experiment would use per
/// transition — exposed for the `list` catalog.
pub fn default_compare_s(transition: Transition) -> f64 {
    comparison_s_factor(transition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantity_parsing() {
        assert_relative_eq!(parse_quantity("120 us", "f", true).unwrap(), 120e-6);
        assert_relative_eq!(parse_quantity("2.5ms", "f", true).unwrap(), 2.5e-3);
        assert_relative_eq!(
            parse_quantity("2.2 MHz", "f", false).unwrap(),
            TAU * 2.2e6
        );
        assert_relative_eq!(
            parse_quantity("100 kHz", "f", false).unwrap(),
            TAU * 1e5
        );
        assert_relative_eq!(parse_quantity("9.2 GHz", "f", false).unwrap(), TAU * 9.2e9);
        assert_relative_eq!(parse_quantity("6.28 rad_s", "f", false).unwrap(), 6.28);
        assert!(parse_quantity("120", "f", true).is_err());
        assert!(parse_quantity("120 parsec", "f", true).is_err());
        assert!(matches!(
            parse_quantity("2 MHz", "f", true),
            Err(ConfigError::WrongDimension { .. })
        ));
        assert!(matches!(
            parse_quantity("2 us", "f", false),
            Err(ConfigError::WrongDimension { .. })
        ));
    }

    const DELAY_SCAN: &str = r#"
experiment = "delay_scan"

[delay_scan]
t_pulse = "120 us"
delay = { min = "-150 us", max = "150 us", points = 151 }
"#;

    #[test]
    fn parses_delay_scan_with_defaults() {
        let cfg = parse_config(DELAY_SCAN).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::DelayScan);
        assert_relative_eq!(cfg.physics.eta, 0.3);
        assert_relative_eq!(cfg.physics.thermal_mean_n, 11.5);
        match &cfg.kind_config {
            KindConfig::DelayScan { t_pulse, delay } => {
                assert_relative_eq!(*t_pulse, 120e-6);
                let vals = delay.values();
                assert_eq!(vals.len(), 151);
                assert_relative_eq!(vals[0], -150e-6);
                assert_relative_eq!(vals[150], 150e-6, epsilon = 1e-18);
            }
            other => panic!("wrong kind config: {other:?}"),
        }
        assert_eq!(cfg.hash.len(), 64);
        assert_eq!(cfg.hash, config_hash(DELAY_SCAN));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let with_typo = DELAY_SCAN.replace("t_pulse", "t_puls");
        assert!(parse_config(&with_typo).is_err());

        let unknown_top = format!("{DELAY_SCAN}\nfrobnicate = 1\n");
        assert!(parse_config(&unknown_top).is_err());

        let bad_eta = format!("{DELAY_SCAN}\n[params]\neta = 1.5\n");
        assert!(parse_config(&bad_eta).is_err());

        assert!(matches!(
            parse_config("experiment = \"nope\""),
            Err(ConfigError::UnknownExperiment(_))
        ));
        // right experiment, missing table
        assert!(matches!(
            parse_config("experiment = \"delay_scan\""),
            Err(ConfigError::MissingTable { .. })
        ));
    }

    #[test]
    fn rejects_negative_s_factor_axis() {
        let cfg = r#"
experiment = "map_2d_carrier"

[map_2d]
t_pulse = { min = "10 us", max = "150 us", points = 10 }
s_factor = { min = -0.2, max = 1.0, points = 5 }
"#;
        assert!(parse_config(cfg).is_err());
    }

    #[test]
    fn integration_modes() {
        let adaptive = format!("{DELAY_SCAN}\n[integration]\nmode = \"adaptive\"\ntol = 1e-10\n");
        match parse_config(&adaptive).unwrap().integration {
            Integration::Adaptive { tol } => assert_relative_eq!(tol, 1e-10),
            other => panic!("wrong integration: {other:?}"),
        }
        let conflicting =
            format!("{DELAY_SCAN}\n[integration]\nmode = \"fixed_rate\"\ntol = 1e-10\n");
        assert!(parse_config(&conflicting).is_err());
    }

    #[test]
    fn thermometry_defaults() {
        let cfg = parse_config("experiment = \"thermometry\"").unwrap();
        match cfg.kind_config {
            KindConfig::Thermometry {
                window, linewidth, s_factor, ..
            } => {
                assert_relative_eq!(window.0, 120e-6);
                assert_relative_eq!(window.1, 150e-6);
                assert_relative_eq!(linewidth, TAU * 41.3e6);
                assert_relative_eq!(s_factor, 0.5);
            }
            other => panic!("wrong kind config: {other:?}"),
        }
    }

    #[test]
    fn kind_catalog_is_consistent() {
        assert_eq!(ExperimentKind::ALL.len(), 7);
        for kind in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::from_name(kind.name()).unwrap(), kind);
            assert!(!kind.output_stems().is_empty());
        }
    }
}
