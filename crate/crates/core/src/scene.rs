//! Base-station/RIS geometry and channel synthesis.
//!
//! Coordinates: the RIS lies in the `z = 0` plane centred on the origin with
//! boresight `+z`. Both antenna arrays sit in the `z = λ/2` plane with their
//! centres at `x = ∓1.5λ` (Tx at negative `x`), so the array centres are `3λ`
//! apart. A ULA runs parallel to the `y` axis; a URA is two rows of `M/2`
//! elements with its long side along `x`. All element spacings are `λ/2`.
//!
//! The BS↔RIS and Tx↔Rx links use the near-field LOS model; user links are
//! i.i.d. Rayleigh scaled by free-space pathloss.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::numerics::{c64, CMat};
use crate::quantization::Enob;
use crate::rng::{KeyedStream, Stream};
use crate::sim::PhaseResolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Ula,
    Ura,
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ula" => Ok(Layout::Ula),
            "ura" => Ok(Layout::Ura),
            other => Err(Error::InvalidParameter(format!("unsupported layout {other:?}"))),
        }
    }
}

/// Full parameterization of one system instance.
///
/// Powers are in dBm and converted once by [`Scenario::budget`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub layout: Layout,
    pub m_t: usize,
    pub m_r: usize,
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub ris_bits: PhaseResolution,
    pub m_d: usize,
    pub k_u: usize,
    pub k_d: usize,
    pub lambda_m: f64,
    pub p_t_dbm: f64,
    pub ul_tx_dbm: f64,
    pub noise_bs_dbm: f64,
    pub noise_user_dbm: f64,
    pub d_ul_m: Vec<f64>,
    pub d_dl_m: Vec<f64>,
    pub g_l: f64,
    pub enob: Enob,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            layout: Layout::Ula,
            m_t: 8,
            m_r: 8,
            ris_rows: 16,
            ris_cols: 16,
            ris_bits: PhaseResolution::Continuous,
            m_d: 8,
            k_u: 3,
            k_d: 3,
            lambda_m: 0.125,
            p_t_dbm: 30.0,
            ul_tx_dbm: 10.0,
            noise_bs_dbm: -95.0,
            noise_user_dbm: -95.0,
            d_ul_m: vec![100.0; 3],
            d_dl_m: vec![500.0; 3],
            g_l: 1.0,
            enob: Enob::Finite(12.0),
            seed: 0,
        }
    }
}

/// Linear (milliwatt-referenced) powers derived from a [`Scenario`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub p_t: f64,
    pub sigma_u_sq: f64,
    pub sigma_b_sq: f64,
    pub sigma_sq: f64,
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl Scenario {
    pub fn m_ris(&self) -> usize {
        self.ris_rows * self.ris_cols
    }

    pub fn budget(&self) -> LinkBudget {
        LinkBudget {
            p_t: dbm_to_mw(self.p_t_dbm),
            sigma_u_sq: dbm_to_mw(self.ul_tx_dbm),
            sigma_b_sq: dbm_to_mw(self.noise_bs_dbm),
            sigma_sq: dbm_to_mw(self.noise_user_dbm),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.m_t == 0 || self.m_r == 0 {
            return bad("antenna counts must be positive".into());
        }
        if self.m_ris() == 0 {
            return bad("RIS must have at least one element".into());
        }
        if !(self.k_d <= self.m_d && self.m_d <= self.m_t) {
            return bad(format!(
                "need K_d <= M_d <= M_t, got K_d={} M_d={} M_t={}",
                self.k_d, self.m_d, self.m_t
            ));
        }
        if self.k_u > self.m_r {
            return bad(format!("K_u={} exceeds M_r={}", self.k_u, self.m_r));
        }
        if self.k_d == 0 {
            return bad("at least one downlink user is required".into());
        }
        if self.d_ul_m.len() != self.k_u || self.d_dl_m.len() != self.k_d {
            return bad("one distance per user is required".into());
        }
        if self
            .d_ul_m
            .iter()
            .chain(&self.d_dl_m)
            .any(|d| !(*d > 0.0) || !d.is_finite())
        {
            return bad("user distances must be positive and finite".into());
        }
        let powers = [self.p_t_dbm, self.ul_tx_dbm, self.noise_bs_dbm, self.noise_user_dbm];
        if powers.iter().any(|p| !p.is_finite()) {
            return bad("powers must be finite".into());
        }
        if !(self.lambda_m > 0.0) || !(self.g_l > 0.0) {
            return bad("wavelength and antenna gain must be positive".into());
        }
        self.ris_bits.validate()?;
        self.enob.validate()?;
        Ok(())
    }
}

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub tx_positions: Vec<Point3>,
    pub rx_positions: Vec<Point3>,
    pub ris_positions: Vec<Point3>,
}

fn centred(index: usize, count: usize, spacing: f64) -> f64 {
    (index as f64 - (count as f64 - 1.0) / 2.0) * spacing
}

fn antenna_array(layout: Layout, count: usize, centre_x: f64, lambda: f64) -> Result<Vec<Point3>> {
    let half = lambda / 2.0;
    match layout {
        Layout::Ula => Ok((0..count).map(|i| [centre_x, centred(i, count, half), half]).collect()),
        Layout::Ura => {
            if count < 2 || !count.is_multiple_of(2) {
                return Err(Error::InvalidParameter(format!(
                    "URA needs an even element count for a 2-row array, got {count}"
                )));
            }
            let cols = count / 2;
            Ok((0..count)
                .map(|i| {
                    let (row, col) = (i / cols, i % cols);
                    [centre_x + centred(col, cols, half), centred(row, 2, half), half]
                })
                .collect())
        }
    }
}

pub fn build_geometry(scenario: &Scenario) -> Result<ArrayGeometry> {
    let lambda = scenario.lambda_m;
    let half = lambda / 2.0;
    let (rows, cols) = (scenario.ris_rows, scenario.ris_cols);
    let ris_positions = (0..rows * cols)
        .map(|i| [centred(i % cols, cols, half), centred(i / cols, rows, half), 0.0])
        .collect();
    Ok(ArrayGeometry {
        tx_positions: antenna_array(scenario.layout, scenario.m_t, -1.5 * lambda, lambda)?,
        rx_positions: antenna_array(scenario.layout, scenario.m_r, 1.5 * lambda, lambda)?,
        ris_positions,
    })
}

fn distance(a: &Point3, b: &Point3) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Near-field power gain `β = (G_l/4)(1/(kd)² − 1/(kd)⁴ + 1/(kd)⁶)`.
pub fn nearfield_power(d: f64, lambda_m: f64, g_l: f64) -> f64 {
    let kd = 2.0 * PI / lambda_m * d;
    let inv2 = 1.0 / (kd * kd);
    g_l / 4.0 * (inv2 - inv2 * inv2 + inv2 * inv2 * inv2)
}

/// LOS channel coefficient `√β · exp(−j k d)` between two points.
pub fn nearfield_gain(a: &Point3, b: &Point3, lambda_m: f64, g_l: f64) -> Result<c64> {
    let d = distance(a, b);
    if !(d > 0.0) {
        return Err(Error::InvalidParameter("coincident points in near-field model".into()));
    }
    let phase = -2.0 * PI / lambda_m * d;
    Ok(c64::from_polar(nearfield_power(d, lambda_m, g_l).sqrt(), phase))
}

/// Free-space pathloss `(√G_l · λ / (4π d))²`.
pub fn freespace_pathloss(d_m: f64, lambda_m: f64, g_l: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::InvalidParameter(format!("distance must be positive, got {d_m}")));
    }
    Ok((g_l.sqrt() * lambda_m / (4.0 * PI * d_m)).powi(2))
}

/// All channel matrices for one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Tx → Rx leakage, `M_r × M_t`.
    pub h_br_bt: CMat,
    /// RIS → Rx, `M_r × M_ris`.
    pub h_br_r: CMat,
    /// Tx → RIS, `M_ris × M_t`.
    pub h_r_bt: CMat,
    /// UL users → RIS, `M_ris × K_u`.
    pub h_ru: CMat,
    /// UL users → Rx, `M_r × K_u`.
    pub h_bru: CMat,
    /// RIS → DL users, `K_d × M_ris`.
    pub h_dr: CMat,
    /// Tx → DL users, `K_d × M_t`.
    pub h_dbt: CMat,
    /// UL pathloss gains `β_{u,k}`.
    pub gamma_u: Vec<f64>,
    /// DL pathloss gains `β_{d,k}`.
    pub gamma_d: Vec<f64>,
}

impl ChannelSet {
    pub fn m_t(&self) -> usize {
        self.h_br_bt.ncols()
    }
    pub fn m_r(&self) -> usize {
        self.h_br_bt.nrows()
    }
    pub fn m_ris(&self) -> usize {
        self.h_br_r.ncols()
    }
    pub fn k_u(&self) -> usize {
        self.h_bru.ncols()
    }
    pub fn k_d(&self) -> usize {
        self.h_dbt.nrows()
    }

    /// Checks that every matrix has the shape implied by the others.
    pub fn validate(&self) -> Result<()> {
        let (m_r, m_t, m_ris, k_u, k_d) = (self.m_r(), self.m_t(), self.m_ris(), self.k_u(), self.k_d());
        let checks = [
            ("H_BrR", self.h_br_r.shape(), (m_r, m_ris)),
            ("H_RBt", self.h_r_bt.shape(), (m_ris, m_t)),
            ("H_Ru", self.h_ru.shape(), (m_ris, k_u)),
            ("H_Bru", self.h_bru.shape(), (m_r, k_u)),
            ("H_dR", self.h_dr.shape(), (k_d, m_ris)),
            ("H_dBt", self.h_dbt.shape(), (k_d, m_t)),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(dim_err("ChannelSet", format!("{name} is {got:?}, expected {want:?}")));
            }
        }
        if self.gamma_u.len() != k_u || self.gamma_d.len() != k_d {
            return Err(dim_err("ChannelSet", "pathloss vector lengths"));
        }
        Ok(())
    }

    /// The same draw with the RIS physically removed: every RIS-touching
    /// matrix is zeroed, so all downstream formulas reduce to the direct paths.
    pub fn without_ris(&self) -> ChannelSet {
        let mut out = self.clone();
        out.h_br_r.fill(c64::new(0.0, 0.0));
        out.h_r_bt.fill(c64::new(0.0, 0.0));
        out.h_ru.fill(c64::new(0.0, 0.0));
        out.h_dr.fill(c64::new(0.0, 0.0));
        out
    }
}

fn nearfield_matrix(rows: &[Point3], cols: &[Point3], lambda: f64, g_l: f64) -> Result<CMat> {
    let mut m = CMat::zeros(rows.len(), cols.len());
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in cols.iter().enumerate() {
            m[(i, j)] = nearfield_gain(a, b, lambda, g_l)?;
        }
    }
    Ok(m)
}

fn rayleigh(rows: usize, cols: usize, seed: u64, stream: Stream) -> CMat {
    let mut keyed = KeyedStream::new(seed, stream);
    // Entry index is the row-major position, independent of storage order.
    CMat::from_fn(rows, cols, |i, j| keyed.complex_gaussian((i * cols + j) as u64))
}

/// Synthesizes the seven channel matrices and pathloss gains for `scenario`.
pub fn synthesize_channels(scenario: &Scenario, geometry: &ArrayGeometry) -> Result<ChannelSet> {
    let (lambda, g_l, seed) = (scenario.lambda_m, scenario.g_l, scenario.seed);
    if geometry.tx_positions.len() != scenario.m_t
        || geometry.rx_positions.len() != scenario.m_r
        || geometry.ris_positions.len() != scenario.m_ris()
    {
        return Err(dim_err("synthesize_channels", "geometry does not match scenario"));
    }
    let m_ris = scenario.m_ris();
    let channels = ChannelSet {
        h_br_bt: nearfield_matrix(&geometry.rx_positions, &geometry.tx_positions, lambda, g_l)?,
        h_br_r: nearfield_matrix(&geometry.rx_positions, &geometry.ris_positions, lambda, g_l)?,
        h_r_bt: nearfield_matrix(&geometry.ris_positions, &geometry.tx_positions, lambda, g_l)?,
        h_ru: rayleigh(m_ris, scenario.k_u, seed, Stream::RisToUplinkUsers),
        h_bru: rayleigh(scenario.m_r, scenario.k_u, seed, Stream::UplinkUsersToBs),
        h_dr: rayleigh(scenario.k_d, m_ris, seed, Stream::DownlinkUsersFromRis),
        h_dbt: rayleigh(scenario.k_d, scenario.m_t, seed, Stream::DownlinkUsersFromBs),
        gamma_u: scenario
            .d_ul_m
            .iter()
            .map(|&d| freespace_pathloss(d, lambda, g_l))
            .collect::<Result<_>>()?,
        gamma_d: scenario
            .d_dl_m
            .iter()
            .map(|&d| freespace_pathloss(d, lambda, g_l))
            .collect::<Result<_>>()?,
    };
    channels.validate()?;
    Ok(channels)
}

/// Validates `scenario`, builds its geometry and draws its channels.
pub fn scenario_channels(scenario: &Scenario) -> Result<ChannelSet> {
    scenario.validate()?;
    let geometry = build_geometry(scenario)?;
    synthesize_channels(scenario, &geometry)
}
