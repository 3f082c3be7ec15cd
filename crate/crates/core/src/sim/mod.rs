//! Self-interference mitigation (SIM) design.
//!
//! The SIM precoder and the RIS phases are optimized alternately: the
//! precoder by a smallest-eigenspace update, the phases by Riemannian
//! conjugate gradient on the product of complex circles.

mod design;
pub mod manifold;
pub mod rcg;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, CVec};
use crate::rng::{KeyedStream, Stream};

pub use design::{
    ao_sim, assemble_ls, cost_f, effective_si_channel, euclidean_grad_f, p_sim_update, quantize_phases,
    sim_metric_kappa, AoEntry, AoOptions, AoOutcome, AoStop, AoTrace, LeastSquares,
};
pub use manifold::{fr_beta, project_tangent, retract, transport};
pub use rcg::{
    armijo_step, rcg_minimize, rcg_minimize_observed, BetaRule, IterateView, LineSearchResult, Objective, RcgOptions,
    RcgOutcome, StopReason,
};

/// RIS phase resolution: `b` bits or continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseResolution {
    Bits(u8),
    Continuous,
}

impl PhaseResolution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseResolution::Bits(b) if !(2..=6).contains(&b) => Err(Error::InvalidParameter(format!(
                "RIS resolution must be 2..=6 bits or inf, got {b}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PhaseResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseResolution::Bits(b) => write!(f, "{b}"),
            PhaseResolution::Continuous => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for PhaseResolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(PhaseResolution::Continuous);
        }
        let b: u8 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad RIS resolution {s:?}")))?;
        let res = PhaseResolution::Bits(b);
        res.validate()?;
        Ok(res)
    }
}

impl Serialize for PhaseResolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PhaseResolution::Bits(b) => s.serialize_u8(*b),
            PhaseResolution::Continuous => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PhaseResolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(b) => b.to_string().parse(),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Unit-modulus tolerance for RIS states.
pub const MODULUS_TOL: f64 = 1e-12;

/// RIS reflection vector `d` together with its phase resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct RisState {
    pub d: CVec,
    pub resolution: PhaseResolution,
}

impl RisState {
    /// Checks unit modulus and, for finite resolution, grid membership.
    pub fn new(d: CVec, resolution: PhaseResolution) -> Result<Self> {
        let deviation = manifold::modulus_deviation(&d);
        if deviation > MODULUS_TOL {
            return Err(Error::OffManifold { deviation });
        }
        if let PhaseResolution::Bits(b) = resolution {
            let step = 2.0 * PI / (1u32 << b) as f64;
            for z in d.iter() {
                let k = (z.arg() / step).round();
                let off = (z.arg() - k * step).abs();
                if off > MODULUS_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "phase {:.6} is off the {b}-bit grid",
                        z.arg()
                    )));
                }
            }
        }
        Ok(Self { d, resolution })
    }

    /// Phases drawn i.i.d. uniform on `[0, 2π)` from the keyed stream,
    /// then snapped to the grid for finite resolution.
    pub fn random(m_ris: usize, resolution: PhaseResolution, seed: u64) -> Self {
        let d = random_phases(m_ris, seed);
        let d = match resolution {
            PhaseResolution::Continuous => d,
            PhaseResolution::Bits(b) => quantize_phases(&d, b),
        };
        Self { d, resolution }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Realized response after per-element phase errors uniform on
    /// `[−max_dev, max_dev]` radians. The result is no longer on any grid.
    pub fn with_phase_deviation(&self, max_dev: f64, seed: u64, subkey: u32) -> RisState {
        let mut keyed = KeyedStream::with_subkey(seed, Stream::PhaseDeviation, subkey);
        let d = CVec::from_iterator(
            self.d.len(),
            self.d.iter().enumerate().map(|(i, z)| {
                let delta = (2.0 * keyed.uniform(i as u64) - 1.0) * max_dev;
                z * c64::from_polar(1.0, delta)
            }),
        );
        RisState {
            d,
            resolution: PhaseResolution::Continuous,
        }
    }
}

/// Unit-modulus vector with phases i.i.d. uniform on `[0, 2π)`.
pub fn random_phases(m_ris: usize, seed: u64) -> CVec {
    let mut keyed = KeyedStream::new(seed, Stream::RisInit);
    CVec::from_iterator(
        m_ris,
        (0..m_ris).map(|i| c64::from_polar(1.0, 2.0 * PI * keyed.uniform(i as u64))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_parsing() {
        assert_eq!("inf".parse::<PhaseResolution>().unwrap(), PhaseResolution::Continuous);
        assert_eq!("3".parse::<PhaseResolution>().unwrap(), PhaseResolution::Bits(3));
        assert!("1".parse::<PhaseResolution>().is_err());
        assert!("7".parse::<PhaseResolution>().is_err());
    }

    #[test]
    fn random_state_is_valid() {
        for res in [
            PhaseResolution::Continuous,
            PhaseResolution::Bits(2),
            PhaseResolution::Bits(6),
        ] {
            let s = RisState::random(64, res, 3);
            assert!(RisState::new(s.d.clone(), res).is_ok());
        }
    }

    #[test]
    fn state_rejects_off_grid_and_off_manifold() {
        let d = CVec::from_element(2, c64::from_polar(1.0, 0.3));
        assert!(RisState::new(d.clone(), PhaseResolution::Continuous).is_ok());
        assert!(RisState::new(d, PhaseResolution::Bits(2)).is_err());
        let off = CVec::from_element(2, c64::new(1.1, 0.0));
        assert!(RisState::new(off, PhaseResolution::Continuous).is_err());
    }

    #[test]
    fn zero_deviation_is_identity() {
        let s = RisState::random(16, PhaseResolution::Bits(3), 9);
        let r = s.with_phase_deviation(0.0, 1, 0);
        assert_eq!(r.d, s.d);
    }

    #[test]
    fn deviation_is_bounded() {
        let s = RisState::random(256, PhaseResolution::Continuous, 9);
        let dev = 30f64.to_radians();
        let r = s.with_phase_deviation(dev, 1, 4);
        for (a, b) in s.d.iter().zip(r.d.iter()) {
            let delta = (b * a.conj()).arg();
            assert!(delta.abs() <= dev + 1e-12);
        }
    }
}
