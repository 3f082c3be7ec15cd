use serde::{Deserialize, Serialize};

use crate::spec::ExperimentKind;

/// Which system produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Joint SIM and RIS design with the quantized receiver.
    Raibfd,
    /// Transmit-subspace nulling without the RIS.
    Softnull,
    /// Ideal-ADC full-duplex upper bound.
    Ideal,
    /// Random RIS phases with the identity transmit subspace.
    RandomRis,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Raibfd => "raibfd",
            Method::Softnull => "softnull",
            Method::Ideal => "ideal",
            Method::RandomRis => "random_ris",
        }
    }
}

/// One (sweep point, trial, method) outcome. Field order is the CSV column
/// order.
///
/// Rate columns are 0 for the design-only kinds. `iterations` counts AO
/// outer iterations for `raibfd`, RCG iterations for `ideal` and is 0
/// otherwise. `terminal_cost` is the SIM cost, or `g` for `ideal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub kind: ExperimentKind,
    pub method: Method,
    pub sweep_point: String,
    pub trial: usize,
    pub seed: u64,
    pub ul_rate: f64,
    pub dl_rate: f64,
    pub sum_rate: f64,
    pub kappa_db: f64,
    pub iterations: usize,
    pub terminal_cost: f64,
    pub wall_ms: f64,
    #[serde(skip)]
    pub point_index: usize,
}

impl ResultRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.ul_rate,
            self.dl_rate,
            self.sum_rate,
            self.kappa_db,
            self.terminal_cost,
            self.wall_ms,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}
