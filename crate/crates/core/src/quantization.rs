//! Additive quantization-noise model (AQNM) for the BS receive ADCs.
//!
//! The ADC output is modelled as `α·y + n_q` with `n_q` Gaussian and
//! uncorrelated across antennas. Only covariances are ever formed; noise
//! vectors are never sampled.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::numerics::{c64, real_diag, CMat, CVec};
use crate::rates::ul_effective_channel;
use crate::scene::ChannelSet;
use crate::sim::effective_si_channel;

/// Effective number of ADC bits. `Infinite` is an exact ideal converter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enob {
    Finite(f64),
    Infinite,
}

impl Enob {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Enob::Finite(b) if !(b > 0.0) || !b.is_finite() => {
                Err(Error::InvalidParameter(format!("ENOB must be positive, got {b}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Enob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Enob::Finite(b) => write!(f, "{b}"),
            Enob::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Enob {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Enob::Infinite);
        }
        let b: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad ENOB {s:?}")))?;
        let enob = Enob::Finite(b);
        enob.validate()?;
        Ok(enob)
    }
}

impl Serialize for Enob {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Enob::Finite(b) => s.serialize_f64(*b),
            Enob::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Enob {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(b) => {
                let e = Enob::Finite(b);
                e.validate().map(|_| e)
            }
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Distortion factor `ρ` and gain `α = 1 − ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationParams {
    pub enob: Enob,
    pub rho: f64,
    pub alpha: f64,
}

/// `ρ = (π√3/2)·2^(−2·ENOB)`.
pub fn quant_params(enob: Enob) -> Result<QuantizationParams> {
    enob.validate()?;
    let rho = match enob {
        Enob::Infinite => 0.0,
        Enob::Finite(b) => PI * 3f64.sqrt() / 2.0 * 2f64.powf(-2.0 * b),
    };
    if rho >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "ENOB {enob} gives rho = {rho:.3}, outside the model's validity"
        )));
    }
    Ok(QuantizationParams {
        enob,
        rho,
        alpha: 1.0 - rho,
    })
}

fn check_precoder(channels: &ChannelSet, precoder: &CMat, powers: &[f64]) -> Result<()> {
    if precoder.nrows() != channels.m_t() || precoder.ncols() != powers.len() {
        return Err(dim_err(
            "receive_covariance",
            format!(
                "precoder {:?} vs M_t={} and {} powers",
                precoder.shape(),
                channels.m_t(),
                powers.len()
            ),
        ));
    }
    if powers.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidParameter("powers must be nonnegative".into()));
    }
    Ok(())
}

/// Receive covariance `σ_u²·H_u·H_uᴴ + G_SI·P·R_d·Pᴴ·G_SIᴴ + σ_B²·I`.
///
/// `precoder` is the full `M_t × K_d` composite precoder and `powers` the
/// per-user symbol powers on the diagonal of `R_d`.
pub fn receive_covariance(
    channels: &ChannelSet,
    d: &CVec,
    precoder: &CMat,
    powers: &[f64],
    sigma_u_sq: f64,
    sigma_b_sq: f64,
) -> Result<CMat> {
    check_precoder(channels, precoder, powers)?;
    let h_u = ul_effective_channel(channels, d)?;
    let h_si = effective_si_channel(channels, d)? * precoder;
    let weighted = crate::numerics::scale_columns(&h_si, &powers.iter().map(|&p| c64::new(p, 0.0)).collect::<Vec<_>>());
    let m_r = channels.m_r();
    let r = (&h_u * h_u.adjoint()).scale(sigma_u_sq)
        + weighted * h_si.adjoint()
        + CMat::identity(m_r, m_r).scale(sigma_b_sq);
    Ok((&r + r.adjoint()).scale(0.5))
}

/// Diagonal quantization-noise covariance `ρ(1−ρ)·diag(R_yB)`.
pub fn quant_noise_cov(r_yb: &CMat, rho: f64) -> Result<CMat> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho must lie in [0, 1), got {rho}")));
    }
    if !r_yb.is_square() {
        return Err(Error::NotSquare {
            rows: r_yb.nrows(),
            cols: r_yb.ncols(),
        });
    }
    let diag: Vec<f64> = r_yb.diagonal().iter().map(|z| rho * (1.0 - rho) * z.re).collect();
    Ok(real_diag(&diag))
}

/// Per-antenna power split of the receive covariance diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPowers {
    /// Desired UL signal power `r_j`.
    pub signal: Vec<f64>,
    /// Self-interference power `q_j`.
    pub interference: Vec<f64>,
    pub noise: f64,
}

impl AntennaPowers {
    /// `SINR_j = r_j / (q_j + σ_B²)`, linear.
    pub fn sinr(&self) -> Vec<f64> {
        self.signal
            .iter()
            .zip(&self.interference)
            .map(|(r, q)| r / (q + self.noise))
            .collect()
    }
}

pub fn antenna_powers(
    channels: &ChannelSet,
    d: &CVec,
    precoder: &CMat,
    powers: &[f64],
    sigma_u_sq: f64,
    sigma_b_sq: f64,
) -> Result<AntennaPowers> {
    check_precoder(channels, precoder, powers)?;
    let h_u = ul_effective_channel(channels, d)?;
    let h_si = effective_si_channel(channels, d)? * precoder;
    let signal = h_u
        .row_iter()
        .map(|row| sigma_u_sq * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    let interference = h_si
        .row_iter()
        .map(|row| row.iter().zip(powers).map(|(z, p)| p * z.norm_sqr()).sum())
        .collect();
    Ok(AntennaPowers {
        signal,
        interference,
        noise: sigma_b_sq,
    })
}

/// Per-antenna SINR (linear) before quantization.
pub fn per_antenna_sinr(
    channels: &ChannelSet,
    d: &CVec,
    precoder: &CMat,
    powers: &[f64],
    sigma_u_sq: f64,
    sigma_b_sq: f64,
) -> Result<Vec<f64>> {
    Ok(antenna_powers(channels, d, precoder, powers, sigma_u_sq, sigma_b_sq)?.sinr())
}

/// Exact per-antenna SQNR `1/(ρ(1−ρ)) · 1/(1 + 1/SINR)`, linear.
pub fn sqnr_exact(sinr: f64, params: &QuantizationParams) -> f64 {
    let distortion = params.rho * (1.0 - params.rho);
    if distortion == 0.0 {
        return f64::INFINITY;
    }
    1.0 / distortion / (1.0 + 1.0 / sinr)
}

/// Small-SINR form `[SINR]_dB − 10·log₁₀(ρ − ρ²)`.
pub fn sqnr_db_first_order(sinr_db: f64, params: &QuantizationParams) -> f64 {
    sinr_db - 10.0 * (params.rho - params.rho * params.rho).log10()
}

/// Rule-of-thumb `[SINR]_dB + 6·ENOB − 4.37`.
pub fn sqnr_db_approx(sinr_db: f64, enob: f64) -> f64 {
    sinr_db + 6.0 * enob - 4.37
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_examples() {
        let p12 = quant_params(Enob::Finite(12.0)).unwrap();
        assert!((p12.rho - 1.6216e-7).abs() / 1.6216e-7 < 1e-4);
        assert!((p12.alpha - (1.0 - p12.rho)).abs() < 1e-18);
        let p4 = quant_params(Enob::Finite(4.0)).unwrap();
        assert!((p4.rho - 1.0628e-2).abs() / 1.0628e-2 < 1e-4);
        let inf = quant_params(Enob::Infinite).unwrap();
        assert_eq!((inf.rho, inf.alpha), (0.0, 1.0));
    }

    #[test]
    fn params_reject_invalid() {
        assert!(quant_params(Enob::Finite(0.0)).is_err());
        assert!(quant_params(Enob::Finite(-1.0)).is_err());
        // ρ ≥ 1 below ~0.78 bits.
        assert!(quant_params(Enob::Finite(0.5)).is_err());
    }

    #[test]
    fn enob_parsing() {
        assert_eq!("inf".parse::<Enob>().unwrap(), Enob::Infinite);
        assert_eq!("10".parse::<Enob>().unwrap(), Enob::Finite(10.0));
        assert!("-2".parse::<Enob>().is_err());
        assert!("x".parse::<Enob>().is_err());
    }

    #[test]
    fn noise_cov_examples() {
        let r = CMat::identity(3, 3);
        assert_eq!(quant_noise_cov(&r, 0.0).unwrap(), CMat::zeros(3, 3));
        let q = quant_noise_cov(&r, 0.5).unwrap();
        assert_eq!(q, CMat::identity(3, 3).scale(0.25));
        assert!(quant_noise_cov(&r, 1.0).is_err());
        assert!(quant_noise_cov(&r, -0.1).is_err());
    }

    #[test]
    fn sqnr_examples() {
        assert!((sqnr_db_approx(-100.0, 12.0) + 32.37).abs() < 1e-9);
        assert!((sqnr_db_approx(0.0, 12.0) - 67.63).abs() < 1e-9);
        assert!((sqnr_db_approx(-10.0, 9.0) - sqnr_db_approx(-10.0, 8.0) - 6.0).abs() < 1e-12);
        let inf = quant_params(Enob::Infinite).unwrap();
        assert!(sqnr_exact(0.5, &inf).is_infinite());
    }

    #[test]
    fn exact_sqnr_matches_first_order_in_small_sinr_regime() {
        for enob in [4.0, 8.0, 12.0, 16.0] {
            let p = quant_params(Enob::Finite(enob)).unwrap();
            for sinr_db in [-20.0, -30.0, -40.0, -60.0, -100.0] {
                let exact = 10.0 * sqnr_exact(10f64.powf(sinr_db / 10.0), &p).log10();
                let gap = (exact - sqnr_db_first_order(sinr_db, &p)).abs();
                let tol = if sinr_db <= -40.0 { 0.01 } else { 0.1 };
                assert!(gap < tol, "enob {enob} sinr {sinr_db}: {gap}");
            }
        }
    }

    #[test]
    fn rounded_rule_drifts_with_enob() {
        // The 6·ENOB − 4.37 rule rounds 20·log₁₀2 ≈ 6.02 dB/bit down to 6.
        let p = quant_params(Enob::Finite(12.0)).unwrap();
        let gap = sqnr_db_first_order(-60.0, &p) - sqnr_db_approx(-60.0, 12.0);
        assert!((gap - 0.27).abs() < 0.01, "{gap}");
    }
}
