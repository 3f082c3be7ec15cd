//! Riemannian conjugate gradient on the complex-circle manifold.
//!
//! Gradient convention: objectives return the Wirtinger gradient
//! `∂f/∂d*`, which for `f = ‖Cd + b‖²` is `Cᴴ(Cd + b)`. The derivative of
//! `f` along a direction `v` in the underlying real space is then
//! `2·Re{gᴴv}`, i.e. `∂f/∂Re(dᵢ) + j·∂f/∂Im(dᵢ) = 2·gᵢ`. The line search
//! uses that real directional derivative.

use crate::error::{Error, Result};
use crate::numerics::{norm_sq, real_inner, CVec};

use super::manifold::{fr_beta, modulus_deviation, project_tangent, retract, transport, ON_MANIFOLD_TOL};

/// Factor between the Wirtinger gradient and the real-coordinate gradient.
pub const REAL_DERIVATIVE_FACTOR: f64 = 2.0;

/// A smooth cost on `ℂⁿ` restricted to the manifold.
///
/// `None` marks an infeasible point; the line search treats it as `+∞`.
pub trait Objective {
    fn cost(&self, d: &CVec) -> Option<f64>;
    fn euclidean_gradient(&self, d: &CVec) -> Option<CVec>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcgOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub cost_rel_tol: f64,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub armijo_max_backtracks: usize,
    /// Trial step of the first line search.
    pub initial_step: f64,
    /// When set, each later line search starts from `2×` the previous
    /// accepted step (capped at `initial_step × 1e12`) instead of
    /// `initial_step`.
    pub adaptive_step: bool,
    /// Powell restart: the conjugate term is dropped when
    /// `|⟨gᵢ, gᵢ₋₁⁺⟩| ≥ threshold·‖gᵢ‖²`. `None` keeps pure Fletcher–Reeves.
    pub restart_threshold: Option<f64>,
    /// Quadratic-interpolation safeguards inside the Armijo search.
    pub quadratic_refine: bool,
    pub beta_rule: BetaRule,
}

/// Conjugate-gradient momentum rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaRule {
    /// `‖gᵢ‖² / ‖gᵢ₋₁⁺‖²`.
    FletcherReeves,
    /// `max(0, ⟨gᵢ, gᵢ − gᵢ₋₁⁺⟩ / ‖gᵢ₋₁⁺‖²)`.
    PolakRibierePlus,
}

impl Default for RcgOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: 1e-15,
            cost_rel_tol: 1e-12,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            armijo_max_backtracks: 50,
            initial_step: 1.0,
            adaptive_step: true,
            restart_threshold: Some(0.5),
            quadratic_refine: true,
            beta_rule: BetaRule::FletcherReeves,
        }
    }
}

impl RcgOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.grad_tol > 0.0
            && self.cost_rel_tol > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.armijo_shrink > 0.0
            && self.armijo_shrink < 1.0
            && self.armijo_max_backtracks > 0
            && self.initial_step > 0.0
            && self.restart_threshold.is_none_or(|t| t > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid RCG options {self:?}")))
        }
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchResult {
    pub step: f64,
    pub point: CVec,
    pub cost: f64,
    pub backtracks: usize,
}

/// Minimizer of the quadratic through `(0, f₀)` with slope `s` and `(α, f_α)`,
/// or `None` when that quadratic has no interior minimum.
fn quadratic_minimizer(f0: f64, slope: f64, alpha: f64, f_alpha: f64) -> Option<f64> {
    let curvature = f_alpha - f0 - slope * alpha;
    if curvature > 0.0 {
        let step = -slope * alpha * alpha / (2.0 * curvature);
        step.is_finite().then_some(step)
    } else {
        None
    }
}

fn trial_cost<O: Objective + ?Sized>(objective: &O, d: &CVec, direction: &CVec, step: f64) -> Option<(CVec, f64)> {
    let point = retract(d, &direction.scale(step)).ok()?;
    let cost = objective.cost(&point)?;
    Some((point, cost))
}

/// Backtracking Armijo search along `direction` from `d`.
///
/// Accepts a step `α` with `f(R_d(α·c)) ≤ f(d) + c₁·α·2·Re{gᴴc}`. With
/// `quadratic_refine`, rejected trials shrink to the safeguarded minimizer of
/// a quadratic fit (clamped to `[0.1α, shrink·α]`), and an accepted first
/// trial is swapped for that minimizer when it costs less.
pub fn armijo_step<O: Objective + ?Sized>(
    objective: &O,
    d: &CVec,
    cost: f64,
    gradient: &CVec,
    direction: &CVec,
    initial_step: f64,
    opts: &RcgOptions,
) -> Result<LineSearchResult> {
    let slope = REAL_DERIVATIVE_FACTOR * real_inner(gradient, direction);
    if !(slope < 0.0) {
        return Err(Error::NotDescent { slope });
    }
    let mut step = initial_step;
    for backtracks in 0..=opts.armijo_max_backtracks {
        let trial = trial_cost(objective, d, direction, step);
        if let Some((point, trial_cost_value)) = &trial {
            if *trial_cost_value <= cost + opts.armijo_c * step * slope {
                let mut best = LineSearchResult {
                    step,
                    point: point.clone(),
                    cost: *trial_cost_value,
                    backtracks,
                };
                if opts.quadratic_refine {
                    if let Some(q) = quadratic_minimizer(cost, slope, step, *trial_cost_value) {
                        if q < step {
                            if let Some((qp, qc)) = trial_cost(objective, d, direction, q) {
                                if qc < best.cost && qc <= cost + opts.armijo_c * q * slope {
                                    best = LineSearchResult {
                                        step: q,
                                        point: qp,
                                        cost: qc,
                                        backtracks,
                                    };
                                }
                            }
                        }
                    }
                }
                return Ok(best);
            }
        }
        let shrunk = step * opts.armijo_shrink;
        step = match (&trial, opts.quadratic_refine) {
            (Some((_, f)), true) => {
                quadratic_minimizer(cost, slope, step, *f).map_or(shrunk, |q| q.clamp(0.1 * step, shrunk))
            }
            _ => shrunk,
        };
    }
    Err(Error::LineSearchStalled {
        backtracks: opts.armijo_max_backtracks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    CostTolerance,
    MaxIterations,
    LineSearchStalled,
}

#[derive(Debug, Clone)]
pub struct RcgOutcome {
    pub point: CVec,
    /// Cost at the start point followed by the cost after every step.
    pub costs: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
}

impl RcgOutcome {
    pub fn final_cost(&self) -> f64 {
        *self.costs.last().expect("trace holds the initial cost")
    }
}

/// State handed to an observer at every iterate.
pub struct IterateView<'a> {
    pub iteration: usize,
    pub point: &'a CVec,
    pub cost: f64,
    pub gradient: &'a CVec,
    pub direction: &'a CVec,
    pub step: Option<f64>,
}

fn pr_plus_beta(g_new: &CVec, g_prev: &CVec) -> f64 {
    let denom = norm_sq(g_prev);
    if denom == 0.0 {
        return 0.0;
    }
    ((norm_sq(g_new) - real_inner(g_new, g_prev)) / denom).max(0.0)
}

pub fn rcg_minimize<O: Objective + ?Sized>(objective: &O, d0: &CVec, opts: &RcgOptions) -> Result<RcgOutcome> {
    rcg_minimize_observed(objective, d0, opts, |_| {})
}

/// Runs RCG from `d0`, calling `observer` at every iterate.
///
/// Directions follow `c₀ = −g₀`, `cᵢ = −gᵢ + βᵢ·cᵢ₋₁⁺` with the
/// Fletcher–Reeves `βᵢ` computed against the transported previous gradient.
/// A direction that fails the descent test is replaced by `−gᵢ`.
pub fn rcg_minimize_observed<O, F>(objective: &O, d0: &CVec, opts: &RcgOptions, mut observer: F) -> Result<RcgOutcome>
where
    O: Objective + ?Sized,
    F: FnMut(&IterateView<'_>),
{
    opts.validate()?;
    let deviation = modulus_deviation(d0);
    if deviation > ON_MANIFOLD_TOL {
        return Err(Error::OffManifold { deviation });
    }
    let infeasible = || Error::Infeasible("objective undefined at the start point".into());
    let mut d = d0.clone();
    let mut cost = objective.cost(&d).ok_or_else(infeasible)?;
    let egrad = objective.euclidean_gradient(&d).ok_or_else(infeasible)?;
    let mut grad = project_tangent(&egrad, &d)?;
    let mut direction = -grad.clone();
    let mut costs = vec![cost];
    let mut step_guess = opts.initial_step;
    let mut last_step = None;

    for iteration in 0..opts.max_iters {
        observer(&IterateView {
            iteration,
            point: &d,
            cost,
            gradient: &grad,
            direction: &direction,
            step: last_step,
        });
        if norm_sq(&grad).sqrt() < opts.grad_tol {
            return Ok(RcgOutcome {
                point: d,
                costs,
                iterations: iteration,
                stop: StopReason::GradientTolerance,
            });
        }
        if real_inner(&grad, &direction) >= 0.0 {
            direction = -grad.clone();
        }
        let accepted = match armijo_step(objective, &d, cost, &grad, &direction, step_guess, opts) {
            Ok(r) => r,
            Err(Error::LineSearchStalled { .. }) | Err(Error::NotDescent { .. }) => {
                return Ok(RcgOutcome {
                    point: d,
                    costs,
                    iterations: iteration,
                    stop: StopReason::LineSearchStalled,
                });
            }
            Err(e) => return Err(e),
        };
        if opts.adaptive_step {
            step_guess = (2.0 * accepted.step).min(opts.initial_step * 1e12);
        }
        last_step = Some(accepted.step);

        let d_new = accepted.point;
        let Some(egrad_new) = objective.euclidean_gradient(&d_new) else {
            return Ok(RcgOutcome {
                point: d,
                costs,
                iterations: iteration,
                stop: StopReason::LineSearchStalled,
            });
        };
        let grad_new = project_tangent(&egrad_new, &d_new)?;
        let grad_prev = transport(&grad, &d_new)?;
        let dir_prev = transport(&direction, &d_new)?;
        let mut beta = match opts.beta_rule {
            BetaRule::FletcherReeves => fr_beta(&grad_new, &grad_prev).unwrap_or(0.0),
            BetaRule::PolakRibierePlus => pr_plus_beta(&grad_new, &grad_prev),
        };
        if let Some(threshold) = opts.restart_threshold {
            if real_inner(&grad_new, &grad_prev).abs() >= threshold * norm_sq(&grad_new) {
                beta = 0.0;
            }
        }
        direction = &dir_prev * crate::numerics::c64::new(beta, 0.0) - &grad_new;

        let decrease = cost - accepted.cost;
        let scale = cost.abs().max(f64::MIN_POSITIVE);
        d = d_new;
        grad = grad_new;
        cost = accepted.cost;
        costs.push(cost);
        if decrease / scale < opts.cost_rel_tol {
            observer(&IterateView {
                iteration: iteration + 1,
                point: &d,
                cost,
                gradient: &grad,
                direction: &direction,
                step: last_step,
            });
            return Ok(RcgOutcome {
                point: d,
                costs,
                iterations: iteration + 1,
                stop: StopReason::CostTolerance,
            });
        }
    }
    observer(&IterateView {
        iteration: opts.max_iters,
        point: &d,
        cost,
        gradient: &grad,
        direction: &direction,
        step: last_step,
    });
    Ok(RcgOutcome {
        point: d,
        costs,
        iterations: opts.max_iters,
        stop: StopReason::MaxIterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c64, CMat};
    use crate::sim::design::LeastSquares;

    fn scalar_problem() -> LeastSquares {
        LeastSquares::new(
            CMat::from_element(1, 1, c64::new(1.0, 0.0)),
            CVec::from_element(1, c64::new(1.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn zero_direction_is_rejected() {
        let p = scalar_problem();
        let d = CVec::from_element(1, c64::new(0.0, 1.0));
        let g = CVec::from_element(1, c64::new(0.0, 1.0));
        let err = armijo_step(
            &p,
            &d,
            p.cost(&d).unwrap(),
            &g,
            &CVec::zeros(1),
            1.0,
            &RcgOptions::default(),
        );
        assert!(matches!(err, Err(Error::NotDescent { .. })));
    }

    #[test]
    fn steepest_descent_step_is_accepted() {
        let p = scalar_problem();
        let d = CVec::from_element(1, c64::from_polar(1.0, 0.5));
        let f = p.cost(&d).unwrap();
        let g = project_tangent(&p.euclidean_gradient(&d).unwrap(), &d).unwrap();
        let r = armijo_step(&p, &d, f, &g, &-g.clone(), 1.0, &RcgOptions::default()).unwrap();
        assert!(r.step > 0.0);
        assert!(r.cost < f);
    }

    #[test]
    fn scalar_circle_reaches_global_minimum() {
        let p = scalar_problem();
        for phase in [0.1, 1.0, 2.0, 3.0, -2.5] {
            let d0 = CVec::from_element(1, c64::from_polar(1.0, phase));
            let out = rcg_minimize(&p, &d0, &RcgOptions::default()).unwrap();
            assert!(out.final_cost() < 1e-12, "phase {phase}: {}", out.final_cost());
            assert!((out.point[0] - c64::new(-1.0, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn options_validation() {
        assert!(RcgOptions::default().validate().is_ok());
        assert!(RcgOptions {
            armijo_c: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RcgOptions {
            armijo_shrink: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RcgOptions {
            max_iters: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn off_manifold_start_is_rejected() {
        let p = scalar_problem();
        let d0 = CVec::from_element(1, c64::new(2.0, 0.0));
        assert!(matches!(
            rcg_minimize(&p, &d0, &RcgOptions::default()),
            Err(Error::OffManifold { .. })
        ));
    }
}
