//! JSON run configuration. Any field left out takes the device preset.

use serde::{Deserialize, Serialize};

use crate::devices::{DeviceConfig, DeviceKind, HJunctionConfig, QubitSpec};
use crate::dynamics::{GateMode, PropagateOptions};
use crate::error::{CzError, Result};

/// Either an explicit list of values or `count` evenly spaced values from
/// `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, count } => match count {
                0 => vec![],
                1 => vec![*start],
                // Rounded to 12 significant digits so grid points print cleanly.
                n => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                    .map(|x| format!("{x:.11e}").parse().unwrap_or(x))
                    .collect(),
            },
        }
    }

    fn range(start: f64, stop: f64, count: usize) -> Self {
        Grid::Range { start, stop, count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Coupler transmissions for `spectrum`.
    pub t_c: Grid,
    /// Switching times for `leakage` (ns).
    pub tau_s: Grid,
    /// On-transmissions for `gate`.
    pub t0: Grid,
    /// On-transmissions for the zero-wait pulses of `compare`.
    pub compare_t0: Grid,
    pub mode: GateMode,
    /// Search interval for τ_s in zero-wait mode (ns).
    pub tau_s_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub device: DeviceKind,
    pub qubit1: QubitSpec,
    pub qubit2: QubitSpec,
    pub coupler_gap: f64,
    pub hjunction: HJunctionConfig,
    pub levels: usize,
    pub tol: f64,
    /// Switching time of plateau pulses and leakage runs (ns).
    pub tau_s: f64,
    /// On-transmission of `leakage` runs.
    pub t0: f64,
    pub sweep: SweepConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    t_c: Option<Grid>,
    tau_s: Option<Grid>,
    t0: Option<Grid>,
    compare_t0: Option<Grid>,
    mode: Option<GateMode>,
    tau_s_range: Option<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_device")]
    device: DeviceKind,
    qubit1: Option<QubitSpec>,
    qubit2: Option<QubitSpec>,
    coupler_gap: Option<f64>,
    hjunction: Option<HJunctionConfig>,
    levels: Option<usize>,
    tol: Option<f64>,
    tau_s: Option<f64>,
    t0: Option<f64>,
    #[serde(default)]
    sweep: RawSweep,
}

fn default_device() -> DeviceKind {
    DeviceKind::TransmonPair
}

impl RunConfig {
    pub fn preset(device: DeviceKind) -> Self {
        let d = DeviceConfig::preset(device);
        let (t_c, t0_grid, compare, t0) = match device {
            DeviceKind::TransmonPair => (
                Grid::range(0.0, 0.02, 21),
                Grid::range(0.005, 0.02, 16),
                Grid::List(vec![0.007, 0.009, 0.011]),
                0.015,
            ),
            DeviceKind::GatemonPair => (
                Grid::range(0.0, 0.02, 21),
                Grid::range(0.005, 0.02, 16),
                Grid::List(vec![0.007, 0.009, 0.011]),
                0.015,
            ),
            DeviceKind::HPair => (
                Grid::range(0.0, 0.8, 17),
                Grid::range(0.4, 0.8, 9),
                Grid::List(vec![0.6, 0.7, 0.75]),
                0.6,
            ),
        };
        RunConfig {
            device,
            qubit1: d.qubit1,
            qubit2: d.qubit2,
            coupler_gap: d.coupler_gap,
            hjunction: d.hjunction,
            levels: d.levels,
            tol: PropagateOptions::default().tol,
            tau_s: 15.0,
            t0,
            sweep: SweepConfig {
                t_c,
                tau_s: Grid::List(vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0]),
                t0: t0_grid,
                compare_t0: compare,
                mode: GateMode::Plateau,
                tau_s_range: (2.0, 200.0),
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CzError::Config(e.to_string()))?;
        let mut c = RunConfig::preset(raw.device);
        if let Some(q) = raw.qubit1 {
            c.qubit1 = q;
        }
        if let Some(q) = raw.qubit2 {
            c.qubit2 = q;
        }
        if let Some(v) = raw.coupler_gap {
            c.coupler_gap = v;
        }
        if let Some(v) = raw.hjunction {
            c.hjunction = v;
        }
        if let Some(v) = raw.levels {
            c.levels = v;
        }
        if let Some(v) = raw.tol {
            c.tol = v;
        }
        if let Some(v) = raw.tau_s {
            c.tau_s = v;
        }
        if let Some(v) = raw.t0 {
            c.t0 = v;
        }
        let s = raw.sweep;
        if let Some(v) = s.t_c {
            c.sweep.t_c = v;
        }
        if let Some(v) = s.tau_s {
            c.sweep.tau_s = v;
        }
        if let Some(v) = s.t0 {
            c.sweep.t0 = v;
        }
        if let Some(v) = s.compare_t0 {
            c.sweep.compare_t0 = v;
        }
        if let Some(v) = s.mode {
            c.sweep.mode = v;
        }
        if let Some(v) = s.tau_s_range {
            c.sweep.tau_s_range = v;
        }
        c.validate()?;
        Ok(c)
    }

    /// A single configuration object, or an array of them (for `compare`).
    pub fn many_from_json(text: &str) -> Result<Vec<Self>> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| CzError::Config(e.to_string()))?;
        match v {
            serde_json::Value::Array(items) => items.iter().map(|i| Self::from_json(&i.to_string())).collect(),
            other => Ok(vec![Self::from_json(&other.to_string())?]),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < crate::hilbert::MIN_LEVELS {
            return Err(CzError::Config(format!("levels = {} below the minimum of 5", self.levels)));
        }
        if !(self.tol > 0.0) {
            return Err(CzError::Config(format!("tol = {} must be positive", self.tol)));
        }
        if !(self.tau_s > 0.0) {
            return Err(CzError::Config(format!("tau_s = {} must be positive", self.tau_s)));
        }
        if !(0.0..=1.0).contains(&self.t0) {
            return Err(CzError::Config(format!("t0 = {} outside [0, 1]", self.t0)));
        }
        let (a, b) = self.sweep.tau_s_range;
        if !(a > 0.0 && b > a) {
            return Err(CzError::Config(format!("tau_s_range ({a}, {b}) is not an increasing positive interval")));
        }
        self.qubit1.validate().map_err(|e| CzError::Config(format!("qubit1: {e}")))?;
        self.qubit2.validate().map_err(|e| CzError::Config(format!("qubit2: {e}")))?;
        Ok(())
    }

    pub fn device_config(&self) -> DeviceConfig {
        DeviceConfig {
            kind: self.device,
            qubit1: self.qubit1,
            qubit2: self.qubit2,
            coupler_gap: self.coupler_gap,
            hjunction: self.hjunction,
            levels: self.levels,
        }
    }

    pub fn propagate_options(&self) -> PropagateOptions {
        PropagateOptions { tol: self.tol, ..PropagateOptions::default() }
    }
}
