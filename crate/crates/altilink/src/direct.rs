//! Direct UAV→destination link: outage probability, the analytic
//! optimal-altitude condition, the coverage configuration curve, and the
//! maximum-coverage elevation angle.
//!
//! The altitude trade-off: climbing raises the elevation angle (better K,
//! lower α) but lengthens the link. The analytic optimum balances the two
//! through the channel derivatives; the numeric optimizer is the
//! model-free fallback that also serves the relay strategies.

use crate::channel::{Geometry, LinkBudget, PropagationModel};
use crate::error::{Error, Result};
use crate::numerics::{bisect_secant, find_sign_change, golden_max};
use crate::special::{inv_gaussian_q, inv_marcum_q_approx, inv_marcum_q_exact, marcum_q_complement};

/// Solver domain margin: keeps tan θ and ln(r/cos θ) finite.
const THETA_MARGIN: f64 = 1e-4;

/// A point of the equal-outage configuration curve: all (r_c, h) placements
/// with direct-link outage exactly ε, parameterized by elevation angle.
#[derive(Debug, Clone, Copy)]
pub struct ConfigSpacePoint {
    pub theta_c: f64,
    /// Polar radius Λ(θ_C) of the curve.
    pub lambda_radius: f64,
    pub h: f64,
    pub r_c: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimumAltitude {
    pub theta_opt: f64,
    pub h_opt: f64,
    pub outage_at_opt: f64,
}

/// Analytic optimum plus the regime diagnostics its derivation assumes
/// (K ≫ 1 and x·y ≫ 1 at the solution).
#[derive(Debug, Clone, Copy)]
pub struct AnalyticOptimum {
    pub optimum: OptimumAltitude,
    pub k_at_opt: f64,
    pub xy_at_opt: f64,
}

/// Grid + golden-section optimum. `unimodal` is false when the coarse grid
/// saw more than one local minimum; the result is then only the refined
/// best grid point.
#[derive(Debug, Clone, Copy)]
pub struct NumericOptimum {
    pub optimum: OptimumAltitude,
    pub unimodal: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingReport {
    pub theta_a: f64,
    pub theta_b: f64,
    /// Measured d ln h̃ / d ln(γ_U/ξ) between the two budgets.
    pub h_exponent: f64,
    pub r_exponent: f64,
    /// 1/α(θ̃) of the first budget — the predicted exponent.
    pub predicted_exponent: f64,
}

/// Direct-link outage probability
/// 1 − Q₁(√(2K(θ_D)), √(2ξ(1+K(θ_D))·ℓ_UD^{α(θ_D)}/γ_U)).
pub fn outage_dc(geom: Geometry, model: &PropagationModel, budget: &LinkBudget) -> Result<f64> {
    let theta = geom.theta_d();
    let k = model.rician_factor(theta)?;
    let alpha = model.path_loss_exponent(theta)?;
    let x = (2.0 * k).sqrt();
    let y = (2.0 * budget.xi * (1.0 + k) * geom.ell_ud().powf(alpha) / budget.gamma_u).sqrt();
    marcum_q_complement(x, y)
}

fn altitude_balance_residual(
    theta: f64,
    r_d: f64,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<f64> {
    let k = model.rician_factor(theta)?;
    let alpha = model.path_loss_exponent(theta)?;
    let (k_prime, alpha_prime) = model.derivatives(theta)?;
    let ell = r_d / theta.cos();
    let kp_over_k = k_prime / k;
    let lhs = (budget.xi / budget.gamma_u * ell.powf(alpha)).sqrt()
        * (kp_over_k + alpha_prime * ell.ln() + alpha * theta.tan());
    Ok(lhs - kp_over_k)
}

/// Optimal elevation angle (hence altitude h = r_d·tan θ) for minimum
/// direct-link outage at ground distance `r_d`, from the stationarity
/// condition of the outage exponent.
///
/// Errors with `Convergence` when the condition has no root in
/// (0, π/2) — fall back to [`optimal_theta_numeric`].
pub fn optimal_theta_dc(
    r_d: f64,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<AnalyticOptimum> {
    if !(r_d > 0.0) {
        return Err(Error::Domain(format!("r_d must be positive (got {r_d})")));
    }
    let res = |theta: f64| altitude_balance_residual(theta, r_d, model, budget).unwrap_or(f64::NAN);
    let lo = THETA_MARGIN;
    let hi = std::f64::consts::FRAC_PI_2 - THETA_MARGIN;
    let (a, b) = find_sign_change(&res, lo, hi, 512).ok_or_else(|| {
        Error::Convergence(format!(
            "altitude balance has no sign change on ({lo:.1e}, {hi:.6}) at r_d={r_d}"
        ))
    })?;
    let theta = bisect_secant(res, a, b, 1e-9, 200)?;
    let h = r_d * theta.tan();
    let geom = Geometry::new(r_d, h)?;
    let k = model.rician_factor(theta)?;
    let alpha = model.path_loss_exponent(theta)?;
    let x = (2.0 * k).sqrt();
    let y = (2.0 * budget.xi * (1.0 + k) * geom.ell_ud().powf(alpha) / budget.gamma_u).sqrt();
    Ok(AnalyticOptimum {
        optimum: OptimumAltitude {
            theta_opt: theta,
            h_opt: h,
            outage_at_opt: outage_dc(geom, model, budget)?,
        },
        k_at_opt: k,
        xy_at_opt: x * y,
    })
}

/// Minimize an arbitrary h ↦ outage profile at fixed `r_d`: 64-point
/// log-spaced scan of [1 m, 50·r_d] then golden-section refinement to
/// Δh/h < 1e-4.
pub fn optimal_theta_numeric(
    r_d: f64,
    outage_at_h: impl Fn(f64) -> Result<f64>,
) -> Result<NumericOptimum> {
    if !(r_d > 0.0) {
        return Err(Error::Domain(format!("r_d must be positive (got {r_d})")));
    }
    const N: usize = 64;
    let h_max = 50.0 * r_d;
    let log_span = h_max.ln();
    let grid: Vec<f64> = (0..N)
        .map(|i| (log_span * i as f64 / (N - 1) as f64).exp())
        .collect();
    let mut vals = Vec::with_capacity(N);
    for &h in &grid {
        vals.push(outage_at_h(h)?);
    }
    // Local minima = descent→ascent transitions; flat runs are collapsed so
    // a plateau does not read as several minima.
    let mut minima = 0usize;
    let mut last_dir = 0i8;
    for i in 1..N {
        let d = vals[i] - vals[i - 1];
        let dir = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if dir != 0 {
            if dir == 1 && last_dir == -1 {
                minima += 1;
            }
            last_dir = dir;
        }
    }
    if last_dir == -1 || (last_dir == 0 && minima == 0) {
        minima += 1; // still descending (or flat) at the edge: boundary minimum
    }
    let best = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(N - 1)];
    let (h_opt, neg) = golden_max(
        |h| -outage_at_h(h).unwrap_or(f64::INFINITY),
        lo,
        hi,
        1e-4 * grid[best],
    );
    Ok(NumericOptimum {
        optimum: OptimumAltitude {
            theta_opt: h_opt.atan2(r_d),
            h_opt,
            outage_at_opt: -neg,
        },
        unimodal: minima <= 1,
    })
}

/// One point of the equal-outage curve at elevation `theta_c`.
///
/// The polar radius is Λ = [γ_U·y_C²/(ξ·(2 + x_C²))]^{1/α(θ_C)} with
/// x_C = √(2K) and y_C the inverted Marcum quantile at success level 1−ε;
/// `use_approx_inverse` swaps the exact inversion for the closed-form
/// piecewise approximation.
pub fn config_space_point(
    theta_c: f64,
    model: &PropagationModel,
    budget: &LinkBudget,
    use_approx_inverse: bool,
) -> Result<ConfigSpacePoint> {
    let k = model.rician_factor(theta_c)?;
    let alpha = model.path_loss_exponent(theta_c)?;
    let x_c = (2.0 * k).sqrt();
    let y_c = if use_approx_inverse {
        inv_marcum_q_approx(x_c, budget.epsilon)?
    } else {
        inv_marcum_q_exact(x_c, 1.0 - budget.epsilon)?
    };
    let lambda = (budget.gamma_u * y_c * y_c / (budget.xi * (2.0 + x_c * x_c))).powf(1.0 / alpha);
    Ok(ConfigSpacePoint {
        theta_c,
        lambda_radius: lambda,
        h: lambda * theta_c.sin(),
        r_c: lambda * theta_c.cos(),
    })
}

fn coverage_angle_residual(
    theta: f64,
    model: &PropagationModel,
    budget: &LinkBudget,
    q: f64,
) -> Result<f64> {
    let k = model.rician_factor(theta)?;
    let x = (2.0 * k).sqrt();
    if x <= q + 1e-9 {
        // Gaussian-limit expansion needs the LoS component to dominate the
        // quantile; below that the condition is meaningless.
        return Ok(f64::NAN);
    }
    let alpha = model.path_loss_exponent(theta)?;
    let (k_prime, alpha_prime) = model.derivatives(theta)?;
    let x_c_prime = k_prime / x;
    let d = x - q;
    let lambda_tilde = (budget.gamma_u * d * d / (budget.xi * x * x)).powf(1.0 / alpha);
    Ok(alpha * theta.tan() + alpha_prime * lambda_tilde.ln() - 2.0 * x_c_prime * q / (x * d))
}

/// Elevation angle maximizing the ground coverage radius of the
/// equal-outage curve, with the resulting (h̃, r̃).
///
/// Solves the stationarity condition of ln r_C(θ) in its Gaussian-limit
/// form; the returned placement re-evaluates the curve with the full
/// piecewise quantile. Falls back to a 512-point grid argmax of the exact
/// curve when the condition has no root.
pub fn optimal_theta_coverage(
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<(f64, f64, f64)> {
    let q = inv_gaussian_q(budget.epsilon)?;
    let res = |theta: f64| coverage_angle_residual(theta, model, budget, q).unwrap_or(f64::NAN);
    let lo = THETA_MARGIN;
    let hi = std::f64::consts::FRAC_PI_2 - THETA_MARGIN;
    if let Some((a, b)) = find_sign_change(&res, lo, hi, 512) {
        let theta = bisect_secant(res, a, b, 1e-9, 200)?;
        let point = config_space_point(theta, model, budget, true)?;
        return Ok((theta, point.h, point.r_c));
    }
    // Grid fallback over the exact curve.
    let mut best: Option<ConfigSpacePoint> = None;
    for i in 0..512 {
        let theta = lo + (hi - lo) * i as f64 / 511.0;
        let p = config_space_point(theta, model, budget, false)?;
        if best.map_or(true, |b| p.r_c > b.r_c) {
            best = Some(p);
        }
    }
    let b = best.expect("grid produced at least one point");
    Ok((b.theta_c, b.h, b.r_c))
}

/// Ground radius at which the direct link hits outage ε for altitude `h`;
/// 0 when even the nadir point exceeds ε.
pub fn coverage_radius_dc(h: f64, model: &PropagationModel, budget: &LinkBudget) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::Domain(format!("altitude must be nonnegative (got {h})")));
    }
    let at = |r: f64| -> Result<f64> {
        outage_dc(Geometry::new(r, h)?, model, budget)
    };
    let r_floor: f64 = if h > 0.0 { 0.0 } else { 1e-6 };
    if at(r_floor.max(1e-12))? >= budget.epsilon {
        return Ok(0.0);
    }
    let mut hi = h.max(100.0);
    while at(hi)? < budget.epsilon {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::Convergence(format!(
                "coverage radius exceeds 1e9 m at h={h}; budget is implausible"
            )));
        }
    }
    bisect_secant(
        |r| at(r).unwrap_or(f64::NAN) - budget.epsilon,
        r_floor,
        hi,
        1e-10,
        200,
    )
}

/// Measure how the maximum-coverage placement scales between two budgets
/// that differ in their γ_U/ξ ratio; the prediction is the power law with
/// exponent 1/α(θ̃).
pub fn scaling_check(
    model: &PropagationModel,
    budget_a: &LinkBudget,
    budget_b: &LinkBudget,
) -> Result<ScalingReport> {
    if budget_a.epsilon != budget_b.epsilon {
        return Err(Error::Domain(
            "scaling_check requires identical outage targets".into(),
        ));
    }
    let ratio = (budget_b.gamma_u / budget_b.xi) / (budget_a.gamma_u / budget_a.xi);
    if !(ratio > 0.0) || (ratio - 1.0).abs() < 1e-12 {
        return Err(Error::Domain(
            "budgets must differ in their gamma_u/xi ratio".into(),
        ));
    }
    let (theta_a, h_a, r_a) = optimal_theta_coverage(model, budget_a)?;
    let (theta_b, h_b, r_b) = optimal_theta_coverage(model, budget_b)?;
    let lever = ratio.ln();
    Ok(ScalingReport {
        theta_a,
        theta_b,
        h_exponent: (h_b / h_a).ln() / lever,
        r_exponent: (r_b / r_a).ln() / lever,
        predicted_exponent: 1.0 / model.path_loss_exponent(theta_a)?,
    })
}
