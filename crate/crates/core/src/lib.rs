//! Joint RIS phase and transmit-subspace design for RIS-assisted in-band
//! full-duplex links, with quantized-receiver rate evaluation.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod error;
pub mod ideal;
pub mod numerics;
pub mod quantization;
pub mod rates;
pub mod rng;
pub mod scene;
pub mod sim;

pub use error::{Error, Result};
pub use ideal::{gamma_coeffs, ideal_dl_rate, optimize_ideal, IdealDesign, IdealObjective};
pub use numerics::{c64, CMat, CVec};
pub use quantization::{quant_params, sqnr_db_approx, Enob, QuantizationParams};
pub use rates::{
    design_downlink, design_raibfd, design_softnull, evaluate_deviated, evaluate_link, waterfill, zf_precoder,
    DeviationPolicy, PowerAllocation, PrecoderBundle, RaibfdDesign, RateReport, SoftNullDesign,
};
pub use scene::{build_geometry, scenario_channels, synthesize_channels, ChannelSet, Layout, LinkBudget, Scenario};
pub use sim::{ao_sim, AoOptions, AoOutcome, PhaseResolution, RcgOptions, RisState};
