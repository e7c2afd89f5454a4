//! Run configuration: a TOML file (or a built-in preset) describing the array,
//! the scenario, the disturbance, the solver and the experiment grids.
//!
//! Units: angles in degrees, energies and noise power linear, interference
//! and SNR levels in dB.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::presets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Base seed for desired signals, ADMM initialization and Monte Carlo runs.
    #[serde(default)]
    pub seed: u64,
    pub array: ArrayConfig,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub disturbance: DisturbanceConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub detect: DetectConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    /// Element spacing in wavelengths.
    #[serde(default = "half")]
    pub tx_spacing: f64,
    #[serde(default = "half")]
    pub rx_spacing: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub theta_t: f64,
    pub code_len: usize,
    /// Total transmit energy e_t.
    pub e_t: f64,
    #[serde(default)]
    pub comm: Vec<DirectionConfig>,
    #[serde(default)]
    pub jam: Vec<DirectionConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionConfig {
    pub angle: f64,
    pub signal: SignalConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalConfig {
    Psk { order: usize, amplitude: f64 },
    NoiseLike { variance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    /// White-noise power σ².
    #[serde(default = "one")]
    pub noise_power: f64,
    #[serde(default)]
    pub jammers: Vec<JammerConfig>,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        Self { noise_power: 1.0, jammers: Vec::new() }
    }
}

fn one() -> f64 {
    1.0
}

/// Receive-side interference source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JammerConfig {
    pub angle: f64,
    /// Interference-to-noise ratio in dB.
    pub inr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Energy-constrained design on the full quadratic form.
    Energy,
    /// Closed form for the Kronecker-structured disturbance.
    Structured,
    /// PAPR-constrained ADMM design.
    Papr,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Energy => "energy",
            Self::Structured => "structured",
            Self::Papr => "papr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_solver")]
    pub kind: SolverKind,
    /// PAPR bound ρ (papr solver).
    #[serde(default = "one")]
    pub rho: f64,
    /// Matching tolerances ε_k, one per constrained direction (papr solver).
    #[serde(default)]
    pub eps: Vec<f64>,
    /// ADMM penalty μ.
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
}

fn default_solver() -> SolverKind {
    SolverKind::Structured
}

fn default_mu() -> f64 {
    5.0
}

fn default_max_outer() -> usize {
    2000
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { kind: default_solver(), rho: 1.0, eps: Vec::new(), mu: default_mu(), max_outer: default_max_outer() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    /// Target direction.
    ThetaT,
    /// First communication direction.
    ThetaC,
    /// First jamming direction.
    ThetaJam,
    /// Total transmit energy.
    ET,
    NoisePower,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ThetaT => "theta_t",
            Self::ThetaC => "theta_c",
            Self::ThetaJam => "theta_jam",
            Self::ET => "e_t",
            Self::NoisePower => "noise_power",
        }
    }
}

impl FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theta_t" => Ok(Self::ThetaT),
            "theta_c" => Ok(Self::ThetaC),
            "theta_jam" => Ok(Self::ThetaJam),
            "e_t" => Ok(Self::ET),
            "noise_power" => Ok(Self::NoisePower),
            _ => Err(format!(
                "unknown sweep variable `{s}` (expected theta_t, theta_c, theta_jam, e_t or noise_power)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub var: SweepVar,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    /// When sweeping theta_c, also move the first jamming direction to
    /// theta_c + jam_offset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jam_offset: Option<f64>,
}

impl SweepConfig {
    /// Grid `from, from + step, …` up to `to` (inclusive, within 1e−9 steps).
    pub fn grid(&self) -> Vec<f64> {
        if !(self.step > 0.0) || !(self.from <= self.to) || !self.from.is_finite() || !self.to.is_finite() {
            return Vec::new();
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.from + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    /// Noise realizations per SNR point; each covers the whole code block.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_snr_grid")]
    pub snr_db: Vec<f64>,
    /// Jam power over noise power at the victim receiver.
    #[serde(default)]
    pub jnr_db: f64,
}

fn default_trials() -> usize {
    1000
}

fn default_snr_grid() -> Vec<f64> {
    (0..=10).map(|k| 2.0 * k as f64).collect()
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { trials: default_trials(), snr_db: default_snr_grid(), jnr_db: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectConfig {
    #[serde(default = "default_pfa")]
    pub p_fa: Vec<f64>,
    #[serde(default = "default_sinr_from")]
    pub sinr_db_from: f64,
    #[serde(default = "default_sinr_to")]
    pub sinr_db_to: f64,
    #[serde(default = "default_sinr_step")]
    pub sinr_db_step: f64,
}

fn default_pfa() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

fn default_sinr_from() -> f64 {
    -5.0
}

fn default_sinr_to() -> f64 {
    20.0
}

fn default_sinr_step() -> f64 {
    0.5
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            p_fa: default_pfa(),
            sinr_db_from: default_sinr_from(),
            sinr_db_to: default_sinr_to(),
            sinr_db_step: default_sinr_step(),
        }
    }
}

impl DetectConfig {
    pub fn sinr_grid(&self) -> Vec<f64> {
        SweepConfig {
            var: SweepVar::ET,
            from: self.sinr_db_from,
            to: self.sinr_db_to,
            step: self.sinr_db_step,
            jam_offset: None,
        }
        .grid()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Transmit energies to evaluate.
    pub e_t: Vec<f64>,
}

fn check_angle(errors: &mut Vec<String>, field: &str, angle: f64) {
    if !(angle > -90.0 && angle < 90.0) {
        errors.push(format!("{field}: angle {angle} outside (-90, 90) degrees"));
    }
}

fn check_signal(errors: &mut Vec<String>, field: &str, signal: &SignalConfig) {
    match *signal {
        SignalConfig::Psk { order, amplitude } => {
            if order < 2 {
                errors.push(format!("{field}.order: PSK order must be at least 2, got {order}"));
            }
            if !(amplitude > 0.0 && amplitude.is_finite()) {
                errors.push(format!("{field}.amplitude: must be positive, got {amplitude}"));
            }
        }
        SignalConfig::NoiseLike { variance } => {
            if !(variance > 0.0 && variance.is_finite()) {
                errors.push(format!("{field}.variance: must be positive, got {variance}"));
            }
        }
    }
}

impl RunConfig {
    /// Reads a TOML file, or a built-in preset when `source` names one and is
    /// not an existing path.
    pub fn load(source: &str) -> Result<Self, CliError> {
        let path = Path::new(source);
        let text = if path.exists() {
            std::fs::read_to_string(path).map_err(|e| CliError::Io { path: source.into(), source: e })?
        } else if let Some(text) = presets::preset(source) {
            text.to_string()
        } else {
            return Err(CliError::Config(vec![format!(
                "config `{source}` is neither a file nor a preset (presets: {})",
                presets::NAMES.join(", ")
            )]));
        };
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn n_constrained(&self) -> usize {
        self.scenario.comm.len() + self.scenario.jam.len()
    }

    /// Every violated field, or `Ok` when the configuration is usable.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut errors = Vec::new();
        let a = &self.array;
        if a.n_tx == 0 {
            errors.push("array.n_tx: must be positive".to_string());
        }
        if a.n_rx == 0 {
            errors.push("array.n_rx: must be positive".to_string());
        }
        for (name, v) in [("array.tx_spacing", a.tx_spacing), ("array.rx_spacing", a.rx_spacing)] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("{name}: must be positive, got {v}"));
            }
        }

        let s = &self.scenario;
        check_angle(&mut errors, "scenario.theta_t", s.theta_t);
        if s.code_len == 0 {
            errors.push("scenario.code_len: must be positive".to_string());
        }
        if !(s.e_t > 0.0 && s.e_t.is_finite()) {
            errors.push(format!("scenario.e_t: must be positive, got {}", s.e_t));
        }
        let n0 = self.n_constrained();
        if n0 == 0 {
            errors.push("scenario: at least one comm or jam direction is required".to_string());
        } else if n0 >= a.n_tx && a.n_tx > 0 {
            errors.push(format!("scenario: {n0} constrained directions need more than n_tx = {} antennas", a.n_tx));
        }
        let mut angles = Vec::new();
        for (role, dirs) in [("comm", &s.comm), ("jam", &s.jam)] {
            for (i, d) in dirs.iter().enumerate() {
                let field = format!("scenario.{role}[{i}]");
                check_angle(&mut errors, &format!("{field}.angle"), d.angle);
                check_signal(&mut errors, &format!("{field}.signal"), &d.signal);
                if angles.contains(&d.angle) {
                    errors.push(format!("{field}.angle: duplicate direction {}", d.angle));
                }
                angles.push(d.angle);
            }
        }

        let dist = &self.disturbance;
        if !(dist.noise_power > 0.0 && dist.noise_power.is_finite()) {
            errors.push(format!("disturbance.noise_power: must be positive, got {}", dist.noise_power));
        }
        for (i, j) in dist.jammers.iter().enumerate() {
            check_angle(&mut errors, &format!("disturbance.jammers[{i}].angle"), j.angle);
            if !j.inr_db.is_finite() {
                errors.push(format!("disturbance.jammers[{i}].inr_db: must be finite"));
            }
        }

        let sol = &self.solver;
        if sol.kind == SolverKind::Papr {
            if sol.eps.len() != n0 {
                errors.push(format!("solver.eps: {} tolerances for {n0} constrained directions", sol.eps.len()));
            }
            if sol.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                errors.push("solver.eps: tolerances must be positive".to_string());
            }
            if !(sol.rho >= 1.0 && sol.rho <= s.code_len.max(1) as f64) {
                errors.push(format!("solver.rho: must lie in [1, code_len], got {}", sol.rho));
            }
            if !(sol.mu > 2.0 && sol.mu.is_finite()) {
                errors.push(format!("solver.mu: must exceed 2, got {}", sol.mu));
            }
            if sol.max_outer == 0 {
                errors.push("solver.max_outer: must be positive".to_string());
            }
        }

        if let Some(sw) = &self.sweep {
            if !(sw.step > 0.0 && sw.step.is_finite()) {
                errors.push(format!("sweep.step: must be positive, got {}", sw.step));
            }
            if !(sw.from <= sw.to) {
                errors.push(format!("sweep: from = {} exceeds to = {}", sw.from, sw.to));
            }
            if sw.grid().is_empty() {
                errors.push("sweep: grid is empty".to_string());
            }
            match sw.var {
                SweepVar::ThetaC if s.comm.is_empty() => {
                    errors.push("sweep.var: theta_c needs a comm direction".to_string())
                }
                SweepVar::ThetaJam if s.jam.is_empty() => {
                    errors.push("sweep.var: theta_jam needs a jam direction".to_string())
                }
                _ => {}
            }
            if sw.jam_offset.is_some() && (sw.var != SweepVar::ThetaC || s.jam.is_empty()) {
                errors.push("sweep.jam_offset: only valid when sweeping theta_c with a jam direction".to_string());
            }
        }

        let mc = &self.monte_carlo;
        if mc.trials == 0 {
            errors.push("monte_carlo.trials: must be positive".to_string());
        }
        if mc.snr_db.is_empty() || mc.snr_db.iter().any(|v| !v.is_finite()) {
            errors.push("monte_carlo.snr_db: must be a non-empty list of finite values".to_string());
        }
        if !mc.jnr_db.is_finite() {
            errors.push("monte_carlo.jnr_db: must be finite".to_string());
        }

        let det = &self.detect;
        if det.p_fa.is_empty() || det.p_fa.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            errors.push("detect.p_fa: must be a non-empty list of values in (0, 1)".to_string());
        }
        if det.sinr_grid().is_empty() {
            errors.push("detect: SINR grid is empty".to_string());
        }

        if let Some(c) = &self.compare {
            if c.e_t.is_empty() {
                errors.push("compare.e_t: energy grid is empty".to_string());
            }
            if c.e_t.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                errors.push("compare.e_t: energies must be positive".to_string());
            }
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errors))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grid_is_inclusive() {
        let sw = SweepConfig { var: SweepVar::ThetaC, from: -40.0, to: 40.0, step: 0.5, jam_offset: None };
        let g = sw.grid();
        assert_eq!(g.len(), 161);
        assert_eq!(g[160], 40.0);
        let empty = SweepConfig { from: 1.0, to: 0.0, ..sw.clone() };
        assert!(empty.grid().is_empty());
        let zero = SweepConfig { step: 0.0, ..sw };
        assert!(zero.grid().is_empty());
    }

    #[test]
    fn validation_lists_every_problem() {
        let mut cfg = RunConfig::load("table3_row1").unwrap();
        cfg.array.n_tx = 0;
        cfg.scenario.e_t = -1.0;
        cfg.scenario.comm[0].angle = 95.0;
        cfg.solver.kind = SolverKind::Papr;
        match cfg.validate() {
            Err(CliError::Config(errs)) => {
                assert!(errs.len() >= 4, "{errs:?}");
                assert!(errs.iter().any(|e| e.starts_with("array.n_tx")));
                assert!(errs.iter().any(|e| e.starts_with("scenario.e_t")));
                assert!(errs.iter().any(|e| e.starts_with("scenario.comm[0].angle")));
                assert!(errs.iter().any(|e| e.starts_with("solver.eps")));
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_sweep_vars_rejected() {
        let text = presets::preset("table3_row1").unwrap().replace("e_t = 500.0", "e_t = 500.0\nbogus = 1");
        assert!(RunConfig::parse(&text).is_err());
        assert!("theta_x".parse::<SweepVar>().is_err());
        assert_eq!("e_t".parse::<SweepVar>().unwrap(), SweepVar::ET);
    }

    #[test]
    fn presets_parse_validate_and_round_trip() {
        for name in presets::NAMES {
            let cfg = RunConfig::load(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg, "{name}");
        }
    }
}
