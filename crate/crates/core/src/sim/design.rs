use std::f64::consts::PI;
use std::time::{Duration, Instant};

use crate::error::{dim_err, Error, Result};
use crate::numerics::{c64, frobenius_sq, hermitian_eig, khatri_rao, norm_sq, scale_rows, vectorize, CMat, CVec};
use crate::scene::ChannelSet;

use super::rcg::{rcg_minimize, Objective, RcgOptions, StopReason};
use super::{PhaseResolution, RisState};

/// Effective SI channel `G_SI = H_BrR·diag(d)·H_RBt + H_BrBt`.
pub fn effective_si_channel(channels: &ChannelSet, d: &CVec) -> Result<CMat> {
    if d.len() != channels.m_ris() {
        return Err(dim_err(
            "effective_si_channel",
            format!(
                "RIS vector has {} entries, channels expect {}",
                d.len(),
                channels.m_ris()
            ),
        ));
    }
    Ok(&channels.h_br_r * scale_rows(&channels.h_r_bt, d.as_slice()) + &channels.h_br_bt)
}

/// Semi-unitary `M_t × M_d` precoder spanning the `M_d` weakest directions of `G_SI`.
pub fn p_sim_update(g_si: &CMat, m_d: usize) -> Result<CMat> {
    let m_t = g_si.ncols();
    if m_d == 0 || m_d > m_t {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= M_d <= M_t={m_t}, got {m_d}"
        )));
    }
    let gram = g_si.adjoint() * g_si;
    Ok(hermitian_eig(&gram)?.smallest(m_d))
}

/// Stacks the SIM cost into `‖C·d + b‖²` for a fixed precoder.
///
/// `C = (H_RBt·P)ᵀ ⊙ H_BrR` (Khatri–Rao) and `b = vec(H_BrBt·P)`.
pub fn assemble_ls(channels: &ChannelSet, p_sim: &CMat) -> Result<(CMat, CVec)> {
    if p_sim.nrows() != channels.m_t() {
        return Err(dim_err("assemble_ls", "precoder rows must equal M_t"));
    }
    let a = &channels.h_r_bt * p_sim;
    let b = &channels.h_br_bt * p_sim;
    Ok((khatri_rao(&a.transpose(), &channels.h_br_r)?, vectorize(&b)))
}

/// `f(d) = ‖C·d + b‖²`.
pub fn cost_f(c: &CMat, b: &CVec, d: &CVec) -> f64 {
    norm_sq(&(c * d + b))
}

/// Euclidean (Wirtinger) gradient `Cᴴ(C·d + b)`.
pub fn euclidean_grad_f(c: &CMat, b: &CVec, d: &CVec) -> CVec {
    c.adjoint() * (c * d + b)
}

/// The SIM least-squares cost as an RCG objective.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    c: CMat,
    c_adj: CMat,
    b: CVec,
}

impl LeastSquares {
    pub fn new(c: CMat, b: CVec) -> Result<Self> {
        if c.nrows() != b.len() {
            return Err(dim_err("LeastSquares", "C rows must equal len(b)"));
        }
        let c_adj = c.adjoint();
        Ok(Self { c, c_adj, b })
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn b(&self) -> &CVec {
        &self.b
    }
}

impl Objective for LeastSquares {
    fn cost(&self, d: &CVec) -> Option<f64> {
        Some(cost_f(&self.c, &self.b, d))
    }

    fn euclidean_gradient(&self, d: &CVec) -> Option<CVec> {
        Some(&self.c_adj * (&self.c * d + &self.b))
    }
}

/// Snaps each phase to the nearest point of `{0, 2π/2ᵇ, …}`.
///
/// Exact ties go to the lower grid index.
pub fn quantize_phases(d: &CVec, bits: u8) -> CVec {
    let levels = 1u64 << bits;
    let step = 2.0 * PI / levels as f64;
    CVec::from_iterator(
        d.len(),
        d.iter().map(|z| {
            let phase = z.arg().rem_euclid(2.0 * PI);
            let k = ((phase / step - 0.5).ceil() as i64).rem_euclid(levels as i64);
            let angle = k as f64 * step;
            c64::new(angle.cos(), angle.sin())
        }),
    )
}

/// `κ = ‖G_SI·P_SIM‖_F² / M_r`.
pub fn sim_metric_kappa(channels: &ChannelSet, d: &CVec, p_sim: &CMat) -> Result<f64> {
    let g = effective_si_channel(channels, d)?;
    if p_sim.nrows() != g.ncols() {
        return Err(dim_err("sim_metric_kappa", "precoder rows must equal M_t"));
    }
    Ok(frobenius_sq(&(g * p_sim)) / channels.m_r() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoOptions {
    pub rcg: RcgOptions,
    /// Stop once the SIM cost is at or below this value.
    pub cost_floor: f64,
    /// Relative improvement treated as no progress.
    pub stall_rel_tol: f64,
    /// Consecutive no-progress outer iterations before stopping.
    pub stall_window: usize,
    pub max_outer: usize,
}

impl Default for AoOptions {
    fn default() -> Self {
        Self {
            rcg: RcgOptions::default(),
            cost_floor: 1e-10,
            stall_rel_tol: 1e-6,
            stall_window: 5,
            max_outer: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoStop {
    CostFloor,
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoEntry {
    pub iteration: usize,
    /// SIM cost of the accepted state after this iteration.
    pub cost: f64,
    /// Whether the RIS state was updated in this iteration.
    pub accepted: bool,
    pub inner_iterations: usize,
    pub inner_stop: Option<StopReason>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoTrace {
    pub entries: Vec<AoEntry>,
    pub stop: AoStop,
}

impl AoTrace {
    pub fn final_cost(&self) -> f64 {
        self.entries.last().map(|e| e.cost).unwrap_or(f64::NAN)
    }

    /// Outer iterations performed (the initial entry is not counted).
    pub fn outer_iterations(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn inner_iterations(&self) -> usize {
        self.entries.iter().map(|e| e.inner_iterations).sum()
    }
}

#[derive(Debug, Clone)]
pub struct AoOutcome {
    pub p_sim: CMat,
    pub ris: RisState,
    pub trace: AoTrace,
}

/// Alternating SIM design of `P_SIM` and the RIS phases.
///
/// Each outer iteration recomputes `P_SIM` from the accepted RIS state, then
/// runs RCG on the stacked least-squares cost. With finite resolution the
/// continuous RCG output is quantized and committed only if it lowers the
/// cost of the currently accepted state; the continuous iterate still seeds
/// the next RCG run.
pub fn ao_sim(
    channels: &ChannelSet,
    m_d: usize,
    resolution: PhaseResolution,
    d_init: &CVec,
    opts: &AoOptions,
) -> Result<AoOutcome> {
    resolution.validate()?;
    opts.rcg.validate()?;
    if d_init.len() != channels.m_ris() {
        return Err(dim_err("ao_sim", "initial RIS vector length"));
    }
    let started = Instant::now();
    let snap = |d: &CVec| match resolution {
        PhaseResolution::Continuous => d.clone(),
        PhaseResolution::Bits(b) => quantize_phases(d, b),
    };

    let mut continuous = super::manifold::retract(d_init, &CVec::zeros(d_init.len()))?;
    let mut accepted = snap(&continuous);
    let mut p_sim = p_sim_update(&effective_si_channel(channels, &accepted)?, m_d)?;
    let mut cost = frobenius_sq(&(effective_si_channel(channels, &accepted)? * &p_sim));
    let mut entries = vec![AoEntry {
        iteration: 0,
        cost,
        accepted: true,
        inner_iterations: 0,
        inner_stop: None,
        elapsed: started.elapsed(),
    }];
    let mut stalled_for = 0;

    let stop = 'outer: {
        for iteration in 1..=opts.max_outer {
            if cost <= opts.cost_floor {
                break 'outer AoStop::CostFloor;
            }
            let previous = cost;

            let g_si = effective_si_channel(channels, &accepted)?;
            let candidate = p_sim_update(&g_si, m_d)?;
            let candidate_cost = frobenius_sq(&(&g_si * &candidate));
            if candidate_cost <= cost {
                p_sim = candidate;
                cost = candidate_cost;
            }

            let (c, b) = assemble_ls(channels, &p_sim)?;
            let problem = LeastSquares::new(c, b)?;
            let inner = rcg_minimize(&problem, &continuous, &opts.rcg)?;
            continuous = inner.point.clone();

            let mut committed = false;
            match resolution {
                PhaseResolution::Continuous => {
                    let new_cost = inner.final_cost();
                    if new_cost <= cost {
                        accepted = continuous.clone();
                        cost = new_cost;
                        committed = true;
                    }
                }
                PhaseResolution::Bits(bits) => {
                    let quantized = quantize_phases(&continuous, bits);
                    let q_cost = cost_f(problem.c(), problem.b(), &quantized);
                    let current = cost_f(problem.c(), problem.b(), &accepted);
                    if q_cost < current {
                        accepted = quantized;
                        cost = q_cost;
                        committed = true;
                    } else {
                        cost = current.min(cost);
                    }
                }
            }
            entries.push(AoEntry {
                iteration,
                cost,
                accepted: committed,
                inner_iterations: inner.iterations,
                inner_stop: Some(inner.stop),
                elapsed: started.elapsed(),
            });

            let improvement = if previous > 0.0 {
                (previous - cost) / previous
            } else {
                0.0
            };
            if improvement < opts.stall_rel_tol {
                stalled_for += 1;
                if stalled_for >= opts.stall_window && cost > opts.cost_floor {
                    break 'outer AoStop::Stalled;
                }
            } else {
                stalled_for = 0;
            }
        }
        if cost <= opts.cost_floor {
            AoStop::CostFloor
        } else {
            AoStop::MaxIterations
        }
    };

    Ok(AoOutcome {
        p_sim,
        ris: RisState {
            d: accepted,
            resolution,
        },
        trace: AoTrace { entries, stop },
    })
}
