//! Upper-bound full-duplex system with ideal ADCs.
//!
//! Full `M_t`-dimensional ZF, closed-form water-filling and RCG over the RIS
//! phases with cost `g(d) = −R_u(d) − R_d(d)`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::{c64, condition_number, inverse_pd, CMat, CVec};
use crate::rates::{
    dl_effective_channel, dl_rates_zf, ul_effective_channel, ul_rate_ideal, waterfill, waterfill_all_active,
    PowerAllocation, ZF_MAX_CONDITION,
};
use crate::scene::{ChannelSet, LinkBudget, Scenario};
use crate::sim::{rcg_minimize, Objective, PhaseResolution, RcgOptions, RcgOutcome, RisState};

/// `γ_k = [(H_d·H_dᴴ)⁻¹]_kk`.
pub fn gamma_coeffs(h_d: &CMat) -> Result<Vec<f64>> {
    if h_d.nrows() > h_d.ncols() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let condition = condition_number(h_d);
    if !(condition < ZF_MAX_CONDITION) {
        return Err(Error::RankDeficient { condition });
    }
    let inv = inverse_pd(&(h_d * h_d.adjoint()))?;
    Ok(inv.diagonal().iter().map(|z| z.re).collect())
}

/// `K·log₂(P_t/σ² + Σγ) − Σ log₂(K·γ_k)`, or the active-set rate sum when
/// some user would get negative power.
pub fn ideal_dl_rate(gammas: &[f64], p_t: f64, sigma_sq: f64) -> Result<f64> {
    if gammas.is_empty() || gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidParameter("gammas must be positive".into()));
    }
    if waterfill_all_active(gammas, p_t, sigma_sq).iter().any(|p| *p < 0.0) {
        let powers = waterfill(gammas, p_t, sigma_sq)?;
        return Ok(dl_rates_zf(&powers, sigma_sq).iter().sum());
    }
    Ok(closed_form_dl_rate(gammas, p_t, sigma_sq))
}

fn closed_form_dl_rate(gammas: &[f64], p_t: f64, sigma_sq: f64) -> f64 {
    let k = gammas.len() as f64;
    let sum: f64 = gammas.iter().sum();
    k * (p_t / sigma_sq + sum).log2() - gammas.iter().map(|g| (k * g).log2()).sum::<f64>()
}

/// Cost `g(d)` and gradient `∂g/∂d*` for the ideal system.
#[derive(Debug, Clone)]
pub struct IdealObjective<'a> {
    channels: &'a ChannelSet,
    budget: LinkBudget,
}

/// Quantities shared by the cost and gradient at one point.
struct Evaluation {
    h_u: CMat,
    h_d: CMat,
    h_tilde: CMat,
    gammas: Vec<f64>,
}

impl<'a> IdealObjective<'a> {
    pub fn new(channels: &'a ChannelSet, budget: LinkBudget) -> Self {
        Self { channels, budget }
    }

    fn evaluate(&self, d: &CVec) -> Result<Evaluation> {
        let h_d = dl_effective_channel(self.channels, d)?;
        let condition = condition_number(&h_d);
        if h_d.nrows() > h_d.ncols() || !(condition < ZF_MAX_CONDITION) {
            return Err(Error::RankDeficient { condition });
        }
        let h_tilde = inverse_pd(&(&h_d * h_d.adjoint()))?;
        let gammas: Vec<f64> = h_tilde.diagonal().iter().map(|z| z.re).collect();
        if waterfill_all_active(&gammas, self.budget.p_t, self.budget.sigma_sq)
            .iter()
            .any(|p| *p < 0.0)
        {
            return Err(Error::Infeasible("negative water-filling power".into()));
        }
        let h_u = ul_effective_channel(self.channels, d)?;
        Ok(Evaluation {
            h_u,
            h_d,
            h_tilde,
            gammas,
        })
    }

    fn ul_rate(&self, h_u: &CMat) -> Result<f64> {
        let k_u = h_u.ncols();
        if k_u == 0 {
            return Ok(0.0);
        }
        let snr = self.budget.sigma_u_sq / self.budget.sigma_b_sq;
        let m = CMat::identity(k_u, k_u) + (h_u.adjoint() * h_u).scale(snr);
        crate::numerics::log2_det_pd(&m)
    }

    /// `g(d)`; errors where the all-active ZF design is undefined.
    pub fn cost_g(&self, d: &CVec) -> Result<f64> {
        let e = self.evaluate(d)?;
        let r_u = self.ul_rate(&e.h_u)?;
        let r_d = closed_form_dl_rate(&e.gammas, self.budget.p_t, self.budget.sigma_sq);
        Ok(-r_u - r_d)
    }

    /// Wirtinger gradient of `g`, same convention as the least-squares cost.
    pub fn grad_g(&self, d: &CVec) -> Result<CVec> {
        let e = self.evaluate(d)?;
        let ch = self.channels;
        let m_ris = d.len();
        let mut grad = CVec::zeros(m_ris);

        // −(1/ln2)(σ_u²/σ_B²)·diag(J_uᴴ), J_uᴴ = H_BrRᴴ·A⁻¹·H_u·Γ_u·H_Ruᴴ.
        let k_u = e.h_u.ncols();
        if k_u > 0 {
            let snr = self.budget.sigma_u_sq / self.budget.sigma_b_sq;
            let m_r = e.h_u.nrows();
            let a = CMat::identity(m_r, m_r) + (&e.h_u * e.h_u.adjoint()).scale(snr);
            let gains: Vec<c64> = ch.gamma_u.iter().map(|g| c64::new(g.sqrt(), 0.0)).collect();
            let left = ch.h_br_r.adjoint() * inverse_pd(&a)? * crate::numerics::scale_columns(&e.h_u, &gains);
            let w = snr / LN_2;
            for i in 0..m_ris {
                let diag: c64 = (0..k_u).map(|k| left[(i, k)] * ch.h_ru[(i, k)].conj()).sum();
                grad[i] -= diag * w;
            }
        }

        // DL: diag(J_{d,k}ᴴ)_i = U_ik·V_ki with U = H_dRᴴ·Γ_d·H̃, V = H̃·H_d·H_RBtᴴ.
        let k_d = e.gammas.len();
        let gains: Vec<c64> = ch.gamma_d.iter().map(|g| c64::new(g.sqrt(), 0.0)).collect();
        let u = ch.h_dr.adjoint() * crate::numerics::scale_rows(&e.h_tilde, &gains);
        let v = &e.h_tilde * &e.h_d * ch.h_r_bt.adjoint();
        let level = self.budget.p_t / self.budget.sigma_sq + e.gammas.iter().sum::<f64>();
        let f_weight = k_d as f64 / (LN_2 * level);
        for i in 0..m_ris {
            let mut acc = c64::new(0.0, 0.0);
            for k in 0..k_d {
                let term = u[(i, k)] * v[(k, i)];
                acc += term * (f_weight - 1.0 / (LN_2 * e.gammas[k]));
            }
            grad[i] += acc;
        }
        Ok(grad)
    }
}

impl Objective for IdealObjective<'_> {
    fn cost(&self, d: &CVec) -> Option<f64> {
        self.cost_g(d).ok().filter(|c| c.is_finite())
    }

    fn euclidean_gradient(&self, d: &CVec) -> Option<CVec> {
        self.grad_g(d).ok()
    }
}

#[derive(Debug, Clone)]
pub struct IdealDesign {
    pub ris: RisState,
    pub powers: PowerAllocation,
    pub gamma: Vec<f64>,
    pub ul_rate: f64,
    pub dl_rate: f64,
    pub rcg: RcgOutcome,
}

impl IdealDesign {
    pub fn sum_rate(&self) -> f64 {
        self.ul_rate + self.dl_rate
    }
}

/// Maximizes the ideal sum-rate over continuous RIS phases from `d_init`.
pub fn optimize_ideal(
    channels: &ChannelSet,
    scenario: &Scenario,
    d_init: &CVec,
    opts: &RcgOptions,
) -> Result<IdealDesign> {
    let budget = scenario.budget();
    let objective = IdealObjective::new(channels, budget);
    let rcg = rcg_minimize(&objective, d_init, opts)?;
    let d = rcg.point.clone();
    let gamma = gamma_coeffs(&dl_effective_channel(channels, &d)?)?;
    let powers = waterfill(&gamma, budget.p_t, budget.sigma_sq)?;
    let dl_rate = ideal_dl_rate(&gamma, budget.p_t, budget.sigma_sq)?;
    let ul_rate = ul_rate_ideal(channels, &d, budget.sigma_u_sq, budget.sigma_b_sq)?;
    Ok(IdealDesign {
        ris: RisState {
            d,
            resolution: PhaseResolution::Continuous,
        },
        powers,
        gamma,
        ul_rate,
        dl_rate,
        rcg,
    })
}
