//! Experiment specification and its JSON form.

use std::fmt;
use std::str::FromStr;

use raibfd::sim::AoOptions;
use raibfd::{DeviationPolicy, Enob, PhaseResolution, Scenario};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const DEFAULT_TRIALS: usize = 50;

/// AO floor used by the suppression-depth experiments.
pub const DEEP_COST_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    KappaVsMd,
    KappaVsBits,
    RatesVsMd,
    RatesVsEnob,
    PhaseDeviation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Convergence,
        ExperimentKind::KappaVsMd,
        ExperimentKind::KappaVsBits,
        ExperimentKind::RatesVsMd,
        ExperimentKind::RatesVsEnob,
        ExperimentKind::PhaseDeviation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::KappaVsMd => "kappa_vs_md",
            ExperimentKind::KappaVsBits => "kappa_vs_bits",
            ExperimentKind::RatesVsMd => "rates_vs_md",
            ExperimentKind::RatesVsEnob => "rates_vs_enob",
            ExperimentKind::PhaseDeviation => "phase_deviation",
        }
    }

    /// Sweep used when neither the config nor the command line gives one.
    pub fn default_sweep(self) -> Vec<SweepValue> {
        let nums = |v: &[f64]| v.iter().map(|x| SweepValue::Number(*x)).collect();
        let text = |v: &[&str]| v.iter().map(|x| SweepValue::Text(x.to_string())).collect();
        match self {
            ExperimentKind::Convergence => text(&["4x4", "8x8", "16x16"]),
            ExperimentKind::KappaVsMd => nums(&[1., 2., 3., 4., 5., 6., 7., 8.]),
            ExperimentKind::RatesVsMd => nums(&[3., 4., 5., 6., 7., 8.]),
            ExperimentKind::KappaVsBits => text(&["2", "3", "4", "5", "6", "inf"]),
            ExperimentKind::RatesVsEnob => nums(&[8., 9., 10., 11., 12.]),
            ExperimentKind::PhaseDeviation => nums(&[0., 10., 20., 30.]),
        }
    }

    /// Kinds that only run the SIM design and leave the rate columns at 0.
    /// These accept any `1 <= M_d <= M_t`, including `M_d < K_d`.
    pub fn design_only(self) -> bool {
        matches!(
            self,
            ExperimentKind::Convergence | ExperimentKind::KappaVsMd | ExperimentKind::KappaVsBits
        )
    }

    /// AO stopping floor appropriate to the quantity being measured.
    pub fn default_cost_floor(self) -> f64 {
        match self {
            ExperimentKind::KappaVsMd | ExperimentKind::KappaVsBits => DEEP_COST_FLOOR,
            _ => AoOptions::default().cost_floor,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().replace('-', "_");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == key)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment kind {s:?}")))
    }
}

/// A sweep entry as written in the config: a number or a string such as
/// `"16x16"` or `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Number(x) => write!(f, "{x}"),
            SweepValue::Text(s) => f.write_str(s),
        }
    }
}

/// A sweep entry interpreted for its experiment kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    RisSize { rows: usize, cols: usize },
    Md(usize),
    Bits(PhaseResolution),
    Enob(Enob),
    DeviationDeg(f64),
}

impl SweepPoint {
    /// Label written to the `sweep_point` column.
    pub fn label(&self) -> String {
        match self {
            SweepPoint::RisSize { rows, cols } => format!("{rows}x{cols}"),
            SweepPoint::Md(m) => m.to_string(),
            SweepPoint::Bits(b) => b.to_string(),
            SweepPoint::Enob(e) => e.to_string(),
            SweepPoint::DeviationDeg(x) => format!("{x}"),
        }
    }

    /// The scenario at this point, built from the base scenario.
    pub fn apply(&self, base: &Scenario) -> Scenario {
        let mut s = base.clone();
        match *self {
            SweepPoint::RisSize { rows, cols } => {
                s.ris_rows = rows;
                s.ris_cols = cols;
            }
            SweepPoint::Md(m) => s.m_d = m,
            SweepPoint::Bits(b) => s.ris_bits = b,
            SweepPoint::Enob(e) => s.enob = e,
            SweepPoint::DeviationDeg(_) => {}
        }
        s
    }
}

pub fn parse_ris_size(s: &str) -> Result<(usize, usize), HarnessError> {
    let bad = || HarnessError::Config(format!("RIS size must look like <rows>x<cols>, got {s:?}"));
    let (r, c) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let rows: usize = r.trim().parse().map_err(|_| bad())?;
    let cols: usize = c.trim().parse().map_err(|_| bad())?;
    if rows == 0 || cols == 0 {
        return Err(bad());
    }
    Ok((rows, cols))
}

fn as_count(v: &SweepValue, what: &str) -> Result<usize, HarnessError> {
    let bad = || HarnessError::Config(format!("{what} must be a positive integer, got {v}"));
    let x = match v {
        SweepValue::Number(x) => *x,
        SweepValue::Text(s) => s.trim().parse().map_err(|_| bad())?,
    };
    if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
        Ok(x as usize)
    } else {
        Err(bad())
    }
}

fn interpret(kind: ExperimentKind, v: &SweepValue) -> Result<SweepPoint, HarnessError> {
    let core = |e: raibfd::Error| HarnessError::Config(e.to_string());
    let text = v.to_string();
    Ok(match kind {
        ExperimentKind::Convergence => {
            let (rows, cols) = parse_ris_size(&text)?;
            SweepPoint::RisSize { rows, cols }
        }
        ExperimentKind::KappaVsMd | ExperimentKind::RatesVsMd => SweepPoint::Md(as_count(v, "M_d")?),
        ExperimentKind::KappaVsBits => {
            let b: PhaseResolution = text.parse().map_err(core)?;
            b.validate().map_err(core)?;
            SweepPoint::Bits(b)
        }
        ExperimentKind::RatesVsEnob => {
            let e: Enob = text.parse().map_err(core)?;
            e.validate().map_err(core)?;
            SweepPoint::Enob(e)
        }
        ExperimentKind::PhaseDeviation => {
            let x = match v {
                SweepValue::Number(x) => *x,
                SweepValue::Text(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("phase deviation must be in degrees, got {s:?}")))?,
            };
            if !(0.0..=180.0).contains(&x) {
                return Err(HarnessError::Config(format!(
                    "phase deviation must be in [0, 180] degrees, got {x}"
                )));
            }
            SweepPoint::DeviationDeg(x)
        }
    })
}

/// AO stopping settings exposed in the config.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoConfig {
    /// Defaults to the kind's floor when absent.
    pub cost_floor: Option<f64>,
    pub max_outer: Option<usize>,
    pub stall_rel_tol: Option<f64>,
    pub stall_window: Option<usize>,
}

impl AoConfig {
    pub fn resolve(&self, kind: ExperimentKind) -> AoOptions {
        let d = AoOptions::default();
        AoOptions {
            rcg: d.rcg,
            cost_floor: self.cost_floor.unwrap_or(kind.default_cost_floor()),
            stall_rel_tol: self.stall_rel_tol.unwrap_or(d.stall_rel_tol),
            stall_window: self.stall_window.unwrap_or(d.stall_window),
            max_outer: self.max_outer.unwrap_or(d.max_outer),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub sweep: Vec<SweepValue>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub out_path: String,
    /// Worker threads; `None` uses all cores. Results do not depend on it.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Fill `wall_ms`; off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub ao: AoConfig,
    #[serde(default)]
    pub deviation_policy: DeviationPolicy,
}

/// Scenario used to draw channels. `M_d` does not affect the channels, so
/// it is raised to `K_d` where needed to pass scenario validation.
pub fn channel_scenario(scenario: &Scenario) -> Scenario {
    let mut s = scenario.clone();
    s.m_d = s.m_d.max(s.k_d).min(s.m_t);
    s
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

impl ExperimentSpec {
    /// Spec with the kind's default sweep and the default scenario.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            scenario: Scenario::default(),
            sweep: kind.default_sweep(),
            trials: DEFAULT_TRIALS,
            out_path: format!("{kind}.csv"),
            workers: None,
            record_timing: false,
            ao: AoConfig::default(),
            deviation_policy: DeviationPolicy::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let mut spec: ExperimentSpec =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("invalid config: {e}")))?;
        if spec.out_path.is_empty() {
            spec.out_path = format!("{}.csv", spec.kind);
        }
        Ok(spec)
    }

    pub fn ao_options(&self) -> AoOptions {
        self.ao.resolve(self.kind)
    }

    /// Sweep interpreted for the kind; fails on an invalid spec.
    pub fn points(&self) -> Result<Vec<SweepPoint>, HarnessError> {
        self.validate()?;
        self.sweep.iter().map(|v| interpret(self.kind, v)).collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials < 1 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(HarnessError::Config("sweep must not be empty".into()));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        let ao = self.ao_options();
        if !(ao.cost_floor >= 0.0) || !(ao.stall_rel_tol >= 0.0) || ao.stall_window == 0 {
            return Err(HarnessError::Config("invalid AO settings".into()));
        }
        for v in &self.sweep {
            let scenario = interpret(self.kind, v)?.apply(&self.scenario);
            let err = |msg: String| HarnessError::Config(format!("sweep point {v}: {msg}"));
            if self.kind.design_only() {
                if !(1..=scenario.m_t).contains(&scenario.m_d) {
                    return Err(err(format!("need 1 <= M_d <= M_t, got M_d={}", scenario.m_d)));
                }
                channel_scenario(&scenario).validate().map_err(|e| err(e.to_string()))?;
            } else {
                scenario.validate().map_err(|e| err(e.to_string()))?;
            }
        }
        Ok(())
    }
}
