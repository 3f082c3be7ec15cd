//! Geometry of the complex-circle manifold `{d ∈ ℂⁿ : |d_i| = 1}`.
//!
//! Tangent vectors at `d` satisfy `Re{v ∘ d*} = 0`. Projection onto the
//! tangent space doubles as the vector transport.

use crate::error::{Error, Result};
use crate::numerics::{c64, norm_sq, CVec};

/// Points further than this from unit modulus are rejected.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;
/// Smallest entry magnitude a retraction will normalize.
pub const RETRACTION_FLOOR: f64 = 1e-14;

pub fn modulus_deviation(d: &CVec) -> f64 {
    d.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
}

/// Largest `|Re{v_i · d_i*}|`; zero for an exactly tangent vector.
pub fn tangency_residual(v: &CVec, d: &CVec) -> f64 {
    v.iter()
        .zip(d.iter())
        .map(|(a, b)| (a * b.conj()).re.abs())
        .fold(0.0, f64::max)
}

fn check_on_manifold(d: &CVec) -> Result<()> {
    let deviation = modulus_deviation(d);
    if deviation > ON_MANIFOLD_TOL {
        return Err(Error::OffManifold { deviation });
    }
    Ok(())
}

fn remove_radial(v: &CVec, d: &CVec) -> CVec {
    CVec::from_iterator(v.len(), v.iter().zip(d.iter()).map(|(a, b)| a - b * (a * b.conj()).re))
}

/// Orthogonal projection `g − Re{g ∘ d*} ∘ d` onto the tangent space at `d`.
pub fn project_tangent(g: &CVec, d: &CVec) -> Result<CVec> {
    if g.len() != d.len() {
        return Err(crate::error::dim_err("project_tangent", "length mismatch"));
    }
    check_on_manifold(d)?;
    Ok(remove_radial(g, d))
}

/// Carries a tangent vector to the tangent space at `d_new`.
pub fn transport(v: &CVec, d_new: &CVec) -> Result<CVec> {
    project_tangent(v, d_new)
}

/// Fletcher–Reeves ratio `‖g_new‖² / ‖g_prev⁺‖²`.
pub fn fr_beta(g_new: &CVec, g_prev_transported: &CVec) -> Result<f64> {
    let denom = norm_sq(g_prev_transported);
    if denom == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok(norm_sq(g_new) / denom)
}

/// Element-wise normalization of `d + step`.
pub fn retract(d: &CVec, step: &CVec) -> Result<CVec> {
    if step.len() != d.len() {
        return Err(crate::error::dim_err("retract", "length mismatch"));
    }
    let t = d + step;
    let mut out = CVec::zeros(t.len());
    for (i, z) in t.iter().enumerate() {
        let r = z.norm();
        if r < RETRACTION_FLOOR {
            return Err(Error::DegenerateStep { index: i });
        }
        out[i] = c64::new(z.re / r, z.im / r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(phases: &[f64]) -> CVec {
        CVec::from_iterator(phases.len(), phases.iter().map(|&p| c64::from_polar(1.0, p)))
    }

    #[test]
    fn radial_direction_is_annihilated() {
        let d = unit(&[0.3, -1.2, 2.9]);
        let p = project_tangent(&d, &d).unwrap();
        assert!(norm_sq(&p) < 1e-30);
    }

    #[test]
    fn tangent_vector_is_kept() {
        let d = CVec::from_element(1, c64::new(1.0, 0.0));
        let g = CVec::from_element(1, c64::new(0.0, 1.0));
        assert_eq!(project_tangent(&g, &d).unwrap(), g);
        assert_eq!(transport(&g, &d).unwrap(), g);
        let zero = CVec::zeros(1);
        assert_eq!(transport(&zero, &d).unwrap(), zero);
    }

    #[test]
    fn projection_rejects_off_manifold() {
        let d = CVec::from_element(2, c64::new(0.5, 0.0));
        assert!(matches!(project_tangent(&d, &d), Err(Error::OffManifold { .. })));
    }

    #[test]
    fn fr_beta_examples() {
        let a = unit(&[0.1, 0.2]);
        let b = unit(&[1.0, -2.0]);
        assert!((fr_beta(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fr_beta(&CVec::zeros(2), &b).unwrap(), 0.0);
        assert!(matches!(fr_beta(&a, &CVec::zeros(2)), Err(Error::ZeroGradient)));
        let c = b.scale(3.0);
        assert!((fr_beta(&c, &a).unwrap() - 9.0).abs() < 1e-13);
    }

    #[test]
    fn retract_examples() {
        let d = unit(&[0.4, 1.0]);
        assert_eq!(retract(&d, &CVec::zeros(2)).unwrap(), d);
        let base = CVec::from_vec(vec![c64::new(1.0, 0.0), c64::new(0.0, -1.0)]);
        let step = base.clone();
        let r = retract(&base, &step).unwrap();
        assert_eq!(r, base);
        let cancel = base.scale(-1.0);
        assert!(matches!(
            retract(&base, &cancel),
            Err(Error::DegenerateStep { index: 0 })
        ));
    }

    fn arb_case() -> impl Strategy<Value = (Vec<f64>, Vec<(f64, f64)>)> {
        (1usize..16).prop_flat_map(|n| {
            (
                prop::collection::vec(-3.2f64..3.2, n),
                prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), n),
            )
        })
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_tangent((phases, g) in arb_case()) {
            let d = unit(&phases);
            let g = CVec::from_iterator(g.len(), g.iter().map(|&(r, i)| c64::new(r, i)));
            let p = project_tangent(&g, &d).unwrap();
            let pp = project_tangent(&p, &d).unwrap();
            prop_assert!((&pp - &p).norm() <= 1e-12 * (1.0 + p.norm()));
            prop_assert!(tangency_residual(&p, &d) <= 1e-12 * (1.0 + g.norm()));
        }

        #[test]
        fn retraction_lands_on_manifold_and_is_idempotent((phases, g) in arb_case()) {
            let d = unit(&phases);
            let step = CVec::from_iterator(g.len(), g.iter().map(|&(r, i)| c64::new(r, i) * 0.1));
            if let Ok(r) = retract(&d, &step) {
                prop_assert!(modulus_deviation(&r) <= 1e-15);
                let again = retract(&r, &CVec::zeros(r.len())).unwrap();
                prop_assert!((&again - &r).norm() <= 1e-15);
            }
        }
    }
}
