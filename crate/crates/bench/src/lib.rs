//! Fixtures shared by the benchmarks in `benches/`.

use raibfd::sim::{assemble_ls, effective_si_channel, p_sim_update, LeastSquares};
use raibfd::{scenario_channels, CVec, ChannelSet, PhaseResolution, RisState, Scenario};

/// Default scenario with a `side × side` RIS.
pub fn scenario(side: usize) -> Scenario {
    Scenario {
        ris_rows: side,
        ris_cols: side,
        ..Default::default()
    }
}

/// Channels and a random continuous starting point for `scenario(side)`.
pub fn instance(side: usize, seed: u64) -> (Scenario, ChannelSet, CVec) {
    let s = Scenario { seed, ..scenario(side) };
    let channels = scenario_channels(&s).expect("default scenario is valid");
    let d0 = RisState::random(s.m_ris(), PhaseResolution::Continuous, seed).d;
    (s, channels, d0)
}

/// Stacked least-squares problem at the starting point's optimal subspace.
pub fn least_squares(side: usize, seed: u64) -> (LeastSquares, CVec) {
    let (s, channels, d0) = instance(side, seed);
    let p = p_sim_update(&effective_si_channel(&channels, &d0).unwrap(), s.m_d).unwrap();
    let (c, b) = assemble_ls(&channels, &p).unwrap();
    (LeastSquares::new(c, b).unwrap(), d0)
}
