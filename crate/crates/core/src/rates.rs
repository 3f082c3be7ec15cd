//! Uplink and downlink spectral efficiencies, ZF precoding and water-filling.

use crate::error::{dim_err, Error, Result};
use crate::ideal::gamma_coeffs;
use crate::numerics::{
    c64, condition_number, inverse_pd, log2_det_pd, real_diag, scale_columns, scale_rows, CMat, CVec,
};
use crate::quantization::{
    antenna_powers, quant_noise_cov, quant_params, receive_covariance, sqnr_db_approx, sqnr_exact, Enob,
};
use crate::scene::{linear_to_db, ChannelSet, Scenario};
use crate::sim::{ao_sim, p_sim_update, sim_metric_kappa, AoOptions, AoOutcome, PhaseResolution, RisState};

/// Largest condition number accepted for a ZF inversion.
pub const ZF_MAX_CONDITION: f64 = 1e10;

/// Per-user DL symbol powers `σ_{d,k}²` (linear, mW).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub sigma_d_sq: Vec<f64>,
}

impl PowerAllocation {
    /// Users switched off by the active-set water-filling.
    pub fn inactive(&self) -> Vec<usize> {
        (0..self.sigma_d_sq.len())
            .filter(|&k| self.sigma_d_sq[k] == 0.0)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderBundle {
    /// Semi-unitary SIM precoder, `M_t × M_d`.
    pub p_sim: CMat,
    /// ZF precoder in the SIM subspace, `M_d × K_d`.
    pub p_d: CMat,
    pub powers: PowerAllocation,
}

impl PrecoderBundle {
    /// Full `M_t × K_d` precoder `P_SIM·P_d`.
    pub fn composite(&self) -> CMat {
        &self.p_sim * &self.p_d
    }

    /// `tr(P·R_d·Pᴴ)`.
    pub fn transmit_power(&self) -> f64 {
        let p = self.composite();
        p.column_iter()
            .zip(&self.powers.sigma_d_sq)
            .map(|(col, s)| s * col.norm_squared())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub ul_rate_bps_hz: f64,
    pub dl_rates_bps_hz: Vec<f64>,
    pub sum_rate: f64,
    pub kappa: f64,
    pub per_antenna_sinr_db: Vec<f64>,
    /// Exact per-antenna SQNR; infinite for ideal ADCs.
    pub per_antenna_sqnr_db: Vec<f64>,
    /// `SINR + 6·ENOB − 4.37` rule; `None` for ideal ADCs.
    pub per_antenna_sqnr_approx_db: Option<Vec<f64>>,
}

impl RateReport {
    pub fn dl_rate(&self) -> f64 {
        self.dl_rates_bps_hz.iter().sum()
    }
}

/// UL effective channel `(H_BrR·diag(d)·H_Ru + H_Bru)·Γ_u`.
pub fn ul_effective_channel(channels: &ChannelSet, d: &CVec) -> Result<CMat> {
    if d.len() != channels.m_ris() {
        return Err(dim_err("ul_effective_channel", "RIS vector length"));
    }
    let h = &channels.h_br_r * scale_rows(&channels.h_ru, d.as_slice()) + &channels.h_bru;
    let gains: Vec<c64> = channels.gamma_u.iter().map(|g| c64::new(g.sqrt(), 0.0)).collect();
    Ok(scale_columns(&h, &gains))
}

/// DL effective channel `Γ_d·(H_dR·diag(d)·H_RBt + H_dBt)`, `K_d × M_t`.
pub fn dl_effective_channel(channels: &ChannelSet, d: &CVec) -> Result<CMat> {
    if d.len() != channels.m_ris() {
        return Err(dim_err("dl_effective_channel", "RIS vector length"));
    }
    let h = &channels.h_dr * scale_rows(&channels.h_r_bt, d.as_slice()) + &channels.h_dbt;
    let gains: Vec<c64> = channels.gamma_d.iter().map(|g| c64::new(g.sqrt(), 0.0)).collect();
    Ok(scale_rows(&h, &gains))
}

/// Zero-forcing precoder `Hᴴ(H·Hᴴ)⁻¹`.
pub fn zf_precoder(h_sim: &CMat) -> Result<CMat> {
    if h_sim.nrows() > h_sim.ncols() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let condition = condition_number(h_sim);
    if !(condition < ZF_MAX_CONDITION) {
        return Err(Error::RankDeficient { condition });
    }
    let gram = h_sim * h_sim.adjoint();
    Ok(h_sim.adjoint() * inverse_pd(&gram)?)
}

/// All-users-active water-filling `σ_k² = (P_t + σ²·Σγ)/(K·γ_k) − σ²`.
///
/// Entries can be negative; [`waterfill`] handles that case.
pub fn waterfill_all_active(gammas: &[f64], p_t: f64, sigma_sq: f64) -> Vec<f64> {
    let k = gammas.len() as f64;
    let level = (p_t + sigma_sq * gammas.iter().sum::<f64>()) / k;
    gammas.iter().map(|g| level / g - sigma_sq).collect()
}

/// Water-filling under `Σ γ_k σ_k² = P_t`, switching off the most expensive
/// users until every remaining power is nonnegative.
pub fn waterfill(gammas: &[f64], p_t: f64, sigma_sq: f64) -> Result<PowerAllocation> {
    if gammas.is_empty() || gammas.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
        return Err(Error::InvalidParameter("gammas must be positive and finite".into()));
    }
    if !(p_t > 0.0) || !(sigma_sq > 0.0) {
        return Err(Error::InvalidParameter("P_t and noise power must be positive".into()));
    }
    let mut active: Vec<usize> = (0..gammas.len()).collect();
    active.sort_by(|&a, &b| gammas[a].total_cmp(&gammas[b]).then(a.cmp(&b)));
    loop {
        let sub: Vec<f64> = active.iter().map(|&k| gammas[k]).collect();
        let powers = waterfill_all_active(&sub, p_t, sigma_sq);
        if powers.iter().all(|p| *p >= 0.0) {
            let mut sigma_d_sq = vec![0.0; gammas.len()];
            for (&k, &p) in active.iter().zip(&powers) {
                sigma_d_sq[k] = p;
            }
            return Ok(PowerAllocation { sigma_d_sq });
        }
        // Largest γ is the first to go negative.
        active.pop();
    }
}

/// Per-user ZF rates `log₂(1 + σ_{d,k}²/σ²)`.
pub fn dl_rates_zf(powers: &PowerAllocation, sigma_sq: f64) -> Vec<f64> {
    powers.sigma_d_sq.iter().map(|p| (1.0 + p / sigma_sq).log2()).collect()
}

/// Per-user DL rates with residual inter-user interference.
///
/// `h_d` is the realized `K_d × M_t` effective channel (pathloss included)
/// and `precoder` the composite `M_t × K_d` precoder.
pub fn dl_rates_general(h_d: &CMat, precoder: &CMat, powers: &PowerAllocation, sigma_sq: f64) -> Result<Vec<f64>> {
    let k_d = powers.sigma_d_sq.len();
    if h_d.nrows() != k_d || precoder.ncols() != k_d || h_d.ncols() != precoder.nrows() {
        return Err(dim_err(
            "dl_rates_general",
            "channel, precoder and power shapes disagree",
        ));
    }
    let gains = h_d * precoder;
    Ok((0..k_d)
        .map(|k| {
            let signal = powers.sigma_d_sq[k] * gains[(k, k)].norm_sqr();
            let interference: f64 = (0..k_d)
                .filter(|&i| i != k)
                .map(|i| powers.sigma_d_sq[i] * gains[(k, i)].norm_sqr())
                .sum();
            (1.0 + signal / (interference + sigma_sq)).log2()
        })
        .collect())
}

/// UL rate `log₂|I + α²σ_u²·H_uᴴ·Q_B⁻¹·H_u|` with `Q_B = α²σ_B²·I + R_q`.
///
/// `R_q` is computed from the full receive covariance, self-interference
/// included; the known SI is subtracted only after quantization.
pub fn ul_rate_quantized(
    channels: &ChannelSet,
    d: &CVec,
    bundle: &PrecoderBundle,
    enob: Enob,
    sigma_u_sq: f64,
    sigma_b_sq: f64,
) -> Result<f64> {
    let params = quant_params(enob)?;
    let h_u = ul_effective_channel(channels, d)?;
    if h_u.ncols() == 0 {
        return Ok(0.0);
    }
    let alpha_sq = params.alpha * params.alpha;
    let q_diag: Vec<f64> = if params.rho == 0.0 {
        vec![alpha_sq * sigma_b_sq; channels.m_r()]
    } else {
        let r_yb = receive_covariance(
            channels,
            d,
            &bundle.composite(),
            &bundle.powers.sigma_d_sq,
            sigma_u_sq,
            sigma_b_sq,
        )?;
        let r_q = quant_noise_cov(&r_yb, params.rho)?;
        r_q.diagonal().iter().map(|z| alpha_sq * sigma_b_sq + z.re).collect()
    };
    assert!(q_diag.iter().all(|q| *q > 0.0), "Q_B must be positive definite");
    let inv_q: Vec<c64> = q_diag.iter().map(|q| c64::new(1.0 / q, 0.0)).collect();
    let k_u = h_u.ncols();
    let m = CMat::identity(k_u, k_u) + (h_u.adjoint() * scale_rows(&h_u, &inv_q)).scale(alpha_sq * sigma_u_sq);
    log2_det_pd(&m)
}

/// Ideal-ADC UL rate `log₂|I + (σ_u²/σ_B²)·H_u·H_uᴴ|`.
pub fn ul_rate_ideal(channels: &ChannelSet, d: &CVec, sigma_u_sq: f64, sigma_b_sq: f64) -> Result<f64> {
    let h_u = ul_effective_channel(channels, d)?;
    let k_u = h_u.ncols();
    if k_u == 0 {
        return Ok(0.0);
    }
    let m = CMat::identity(k_u, k_u) + (h_u.adjoint() * &h_u).scale(sigma_u_sq / sigma_b_sq);
    log2_det_pd(&m)
}

/// ZF precoder and water-filling powers inside the span of `p_sim`.
pub fn design_downlink(
    channels: &ChannelSet,
    d: &CVec,
    p_sim: &CMat,
    p_t: f64,
    sigma_sq: f64,
) -> Result<PrecoderBundle> {
    let h_sim = dl_effective_channel(channels, d)? * p_sim;
    let p_d = zf_precoder(&h_sim)?;
    let gammas = gamma_coeffs(&h_sim)?;
    let powers = waterfill(&gammas, p_t, sigma_sq)?;
    Ok(PrecoderBundle {
        p_sim: p_sim.clone(),
        p_d,
        powers,
    })
}

/// Rates and diagnostics for a designed link.
///
/// `realized` is the RIS response actually applied (e.g. with phase
/// deviations); it defaults to `designed`. The bundle is not redesigned.
pub fn evaluate_link(
    channels: &ChannelSet,
    designed: &RisState,
    realized: Option<&RisState>,
    bundle: &PrecoderBundle,
    scenario: &Scenario,
) -> Result<RateReport> {
    let actual = realized.unwrap_or(designed);
    if actual.len() != designed.len() {
        return Err(dim_err("evaluate_link", "designed and realized RIS sizes differ"));
    }
    let budget = scenario.budget();
    let d = &actual.d;
    let ul = ul_rate_quantized(channels, d, bundle, scenario.enob, budget.sigma_u_sq, budget.sigma_b_sq)?;
    let h_d = dl_effective_channel(channels, d)?;
    let dl = dl_rates_general(&h_d, &bundle.composite(), &bundle.powers, budget.sigma_sq)?;
    let kappa = sim_metric_kappa(channels, d, &bundle.p_sim)?;

    let params = quant_params(scenario.enob)?;
    let split = antenna_powers(
        channels,
        d,
        &bundle.composite(),
        &bundle.powers.sigma_d_sq,
        budget.sigma_u_sq,
        budget.sigma_b_sq,
    )?;
    let sinr = split.sinr();
    let per_antenna_sinr_db: Vec<f64> = sinr.iter().map(|s| linear_to_db(*s)).collect();
    let per_antenna_sqnr_db = sinr.iter().map(|s| linear_to_db(sqnr_exact(*s, &params))).collect();
    let per_antenna_sqnr_approx_db = match scenario.enob {
        Enob::Finite(b) => Some(per_antenna_sinr_db.iter().map(|s| sqnr_db_approx(*s, b)).collect()),
        Enob::Infinite => None,
    };
    let sum_rate = ul + dl.iter().sum::<f64>();
    Ok(RateReport {
        ul_rate_bps_hz: ul,
        dl_rates_bps_hz: dl,
        sum_rate,
        kappa,
        per_antenna_sinr_db,
        per_antenna_sqnr_db,
        per_antenna_sqnr_approx_db,
    })
}

/// A complete RIS-assisted full-duplex design.
#[derive(Debug, Clone)]
pub struct RaibfdDesign {
    pub sim: AoOutcome,
    pub bundle: PrecoderBundle,
}

/// SIM design by [`ao_sim`] followed by ZF + water-filling.
pub fn design_raibfd(
    channels: &ChannelSet,
    scenario: &Scenario,
    d_init: &CVec,
    opts: &AoOptions,
) -> Result<RaibfdDesign> {
    let sim = ao_sim(channels, scenario.m_d, scenario.ris_bits, d_init, opts)?;
    let budget = scenario.budget();
    let bundle = design_downlink(channels, &sim.ris.d, &sim.p_sim, budget.p_t, budget.sigma_sq)?;
    Ok(RaibfdDesign { sim, bundle })
}

/// How the BS reacts to RIS phase deviations it did not design for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationPolicy {
    /// ZF and water-filling are re-derived on the realized DL channel;
    /// `P_SIM` and the designed phases stay as designed.
    #[default]
    RedesignDownlink,
    /// The nominal precoder is applied unchanged.
    FixedPrecoder,
}

/// Rates of `design` when the RIS actually applies `realized`.
pub fn evaluate_deviated(
    channels: &ChannelSet,
    scenario: &Scenario,
    design: &RaibfdDesign,
    realized: &RisState,
    policy: DeviationPolicy,
) -> Result<RateReport> {
    let bundle = match policy {
        DeviationPolicy::FixedPrecoder => design.bundle.clone(),
        DeviationPolicy::RedesignDownlink => {
            let budget = scenario.budget();
            design_downlink(channels, &realized.d, &design.sim.p_sim, budget.p_t, budget.sigma_sq)?
        }
    };
    evaluate_link(channels, &design.sim.ris, Some(realized), &bundle, scenario)
}

/// The RIS-free beamforming baseline on the same draw.
#[derive(Debug, Clone)]
pub struct SoftNullDesign {
    /// `channels` with every RIS path removed.
    pub channels: ChannelSet,
    /// Placeholder RIS state; it multiplies zeroed matrices only.
    pub ris: RisState,
    pub bundle: PrecoderBundle,
}

/// `P_SIM` from the weakest `M_d` directions of `H_BrBt`, no RIS.
pub fn design_softnull(channels: &ChannelSet, scenario: &Scenario) -> Result<SoftNullDesign> {
    let bare = channels.without_ris();
    let ris = RisState {
        d: CVec::from_element(bare.m_ris(), c64::new(1.0, 0.0)),
        resolution: PhaseResolution::Continuous,
    };
    let p_sim = p_sim_update(&bare.h_br_bt, scenario.m_d)?;
    let budget = scenario.budget();
    let bundle = design_downlink(&bare, &ris.d, &p_sim, budget.p_t, budget.sigma_sq)?;
    Ok(SoftNullDesign {
        channels: bare,
        ris,
        bundle,
    })
}

/// Diagonal power matrix `R_d`.
pub fn power_matrix(powers: &PowerAllocation) -> CMat {
    real_diag(&powers.sigma_d_sq)
}
