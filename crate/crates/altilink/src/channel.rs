//! Angle-dependent air-to-ground propagation: LoS probability, Rician
//! factor K(θ), path-loss exponent α(θ), their derivatives, link-budget
//! arithmetic, and the Rician fading CDF.
//!
//! Everything downstream treats the channel through exactly three curves:
//! a logistic LoS probability, an exponential K(θ), and an affine map from
//! LoS probability to α(θ). All stored quantities are linear; dB enters
//! only through constructors.

use crate::error::{Error, Result};
use crate::special::marcum_q_complement;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn check_angle(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::Domain(format!(
            "elevation angle must lie in [0, π/2] (got {theta})"
        )));
    }
    Ok(())
}

/// Channel parameterization over elevation angle.
///
/// Anchors: Rician factor and path-loss exponent at the horizon (θ=0) and
/// zenith (θ=π/2), plus the logistic LoS parameters (a2, b2). The affine
/// α-fit coefficients are solved at construction so that α(0) = `alpha0`
/// and α(π/2) = `alpha_half_pi` hold exactly; `with_endpoint_limit_fit`
/// switches to the simpler coefficients obtained by letting P_LoS(0) → 0
/// and P_LoS(π/2) → 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationModel {
    /// Linear Rician factor at θ = 0.
    pub kappa0: f64,
    /// Linear Rician factor at θ = π/2.
    pub kappa_half_pi: f64,
    pub alpha0: f64,
    pub alpha_half_pi: f64,
    /// LoS-probability scale (dimensionless).
    pub a2: f64,
    /// LoS-probability rate (per radian).
    pub b2: f64,
    a1: f64,
    b1: f64,
    a3: f64,
    b3: f64,
}

impl PropagationModel {
    /// Build from linear Rician factors. See `new_db` for the dB front door.
    pub fn new(
        kappa0: f64,
        kappa_half_pi: f64,
        alpha0: f64,
        alpha_half_pi: f64,
        a2: f64,
        b2: f64,
    ) -> Result<Self> {
        if !(kappa0 > 0.0) || !(kappa_half_pi >= kappa0) {
            return Err(Error::Domain(format!(
                "Rician anchors need 0 < kappa0 ≤ kappa_half_pi (got {kappa0}, {kappa_half_pi})"
            )));
        }
        if !(alpha_half_pi >= 2.0) || !(alpha0 >= alpha_half_pi) {
            return Err(Error::Domain(format!(
                "path-loss anchors need alpha0 ≥ alpha_half_pi ≥ 2 (got {alpha0}, {alpha_half_pi})"
            )));
        }
        if !(a2 > 0.0) || !(b2 > 0.0) {
            return Err(Error::Domain(format!(
                "LoS parameters need a2 > 0, b2 > 0 (got {a2}, {b2})"
            )));
        }
        let p0 = 1.0 / (1.0 + a2);
        let p1 = 1.0 / (1.0 + a2 * (-b2 * std::f64::consts::FRAC_PI_2).exp());
        let a1 = (alpha_half_pi - alpha0) / (p1 - p0);
        let b1 = alpha0 - a1 * p0;
        let a3 = kappa0;
        let b3 = std::f64::consts::FRAC_2_PI * (kappa_half_pi / kappa0).ln();
        Ok(Self {
            kappa0,
            kappa_half_pi,
            alpha0,
            alpha_half_pi,
            a2,
            b2,
            a1,
            b1,
            a3,
            b3,
        })
    }

    /// Rician anchors in dB, exponents and LoS parameters as-is.
    pub fn new_db(
        kappa0_db: f64,
        kappa_half_pi_db: f64,
        alpha0: f64,
        alpha_half_pi: f64,
        a2: f64,
        b2: f64,
    ) -> Result<Self> {
        Self::new(
            db_to_linear(kappa0_db),
            db_to_linear(kappa_half_pi_db),
            alpha0,
            alpha_half_pi,
            a2,
            b2,
        )
    }

    /// Replace the exact α-fit with the endpoint-limit coefficients
    /// a₁ = α_{π/2} − α₀, b₁ = α₀ (valid when the logistic saturates hard
    /// at both ends). Kept for reproducing figures built on that shortcut.
    pub fn with_endpoint_limit_fit(mut self) -> Self {
        self.a1 = self.alpha_half_pi - self.alpha0;
        self.b1 = self.alpha0;
        self
    }

    /// Representative urban parameters: K from 5 dB to 15 dB, α from 3.5
    /// down to 2, moderate logistic (a2 = 10, b2 = 3).
    pub fn default_urban() -> Self {
        Self::new_db(5.0, 15.0, 3.5, 2.0, 10.0, 3.0).expect("urban defaults are valid")
    }

    /// α-fit coefficients (slope over P_LoS, intercept).
    pub fn alpha_fit(&self) -> (f64, f64) {
        (self.a1, self.b1)
    }

    /// K-fit coefficients in K(θ) = a₃·exp(b₃·θ).
    pub fn kappa_fit(&self) -> (f64, f64) {
        (self.a3, self.b3)
    }

    /// Line-of-sight probability 1/(1 + a₂·e^{−b₂·θ}); strictly increasing.
    pub fn p_los(&self, theta: f64) -> Result<f64> {
        check_angle(theta)?;
        Ok(1.0 / (1.0 + self.a2 * (-self.b2 * theta).exp()))
    }

    /// Linear Rician factor a₃·e^{b₃·θ}; endpoints hit the anchors exactly.
    pub fn rician_factor(&self, theta: f64) -> Result<f64> {
        check_angle(theta)?;
        Ok(self.a3 * (self.b3 * theta).exp())
    }

    /// Path-loss exponent a₁·P_LoS(θ) + b₁; non-increasing in θ.
    pub fn path_loss_exponent(&self, theta: f64) -> Result<f64> {
        check_angle(theta)?;
        Ok(self.a1 * self.p_los(theta)? + self.b1)
    }

    /// Analytic (K'(θ), α'(θ)).
    pub fn derivatives(&self, theta: f64) -> Result<(f64, f64)> {
        check_angle(theta)?;
        let k_prime = self.b3 * self.rician_factor(theta)?;
        let e = (-self.b2 * theta).exp();
        let denom = 1.0 + self.a2 * e;
        let alpha_prime = self.a1 * self.a2 * self.b2 * e / (denom * denom);
        Ok((k_prime, alpha_prime))
    }

    /// Derivative of x_C(θ) = √(2K(θ)): x_C'(θ) = K'(θ)/√(2K(θ)).
    pub fn x_c_prime(&self, theta: f64) -> Result<f64> {
        let (k_prime, _) = self.derivatives(theta)?;
        Ok(k_prime / (2.0 * self.rician_factor(theta)?).sqrt())
    }
}

/// Linear SNR budgets and reliability target. γ is the transmit SNR
/// referenced to 1 m (aggregate antenna/path constant folded in); ξ is the
/// decoding threshold; ε the target outage probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub gamma_u: f64,
    pub gamma_r: f64,
    pub xi: f64,
    pub epsilon: f64,
}

impl LinkBudget {
    pub fn new(gamma_u: f64, gamma_r: f64, xi: f64, epsilon: f64) -> Result<Self> {
        if !(gamma_u > 0.0) || !(gamma_r > 0.0) || !(xi > 0.0) {
            return Err(Error::Domain(format!(
                "budgets need gamma_u, gamma_r, xi > 0 (got {gamma_u}, {gamma_r}, {xi})"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0,1) (got {epsilon})"
            )));
        }
        Ok(Self {
            gamma_u,
            gamma_r,
            xi,
            epsilon,
        })
    }

    pub fn from_db(gamma_u_db: f64, gamma_r_db: f64, xi_db: f64, epsilon: f64) -> Result<Self> {
        Self::new(
            db_to_linear(gamma_u_db),
            db_to_linear(gamma_r_db),
            db_to_linear(xi_db),
            epsilon,
        )
    }

    /// Same budget with the UAV share ρ of the total power applied:
    /// γ_U = ρ·γ_total, γ_R = (1−ρ)·γ_total.
    pub fn split(total_gamma: f64, rho: f64, xi: f64, epsilon: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain(format!("power share must lie in (0,1) (got {rho})")));
        }
        Self::new(rho * total_gamma, (1.0 - rho) * total_gamma, xi, epsilon)
    }
}

/// UAV placement relative to the destination: ground distance and altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub r_d: f64,
    pub h: f64,
}

impl Geometry {
    pub fn new(r_d: f64, h: f64) -> Result<Self> {
        if !(r_d >= 0.0) || !(h >= 0.0) || (r_d == 0.0 && h == 0.0) {
            return Err(Error::Domain(format!(
                "geometry needs r_d ≥ 0, h ≥ 0, not both zero (got {r_d}, {h})"
            )));
        }
        Ok(Self { r_d, h })
    }

    /// Elevation angle seen from the destination, in [0, π/2].
    pub fn theta_d(&self) -> f64 {
        self.h.atan2(self.r_d)
    }

    /// Slant range UAV → destination.
    pub fn ell_ud(&self) -> f64 {
        self.r_d.hypot(self.h)
    }
}

/// CDF of the unit-mean Rician power gain: P(Ω ≤ ω) with factor K.
pub fn rician_fading_cdf(omega: f64, k: f64) -> Result<f64> {
    if !(omega >= 0.0) || !(k >= 0.0) {
        return Err(Error::Domain(format!(
            "rician_fading_cdf needs ω ≥ 0, K ≥ 0 (got {omega}, {k})"
        )));
    }
    marcum_q_complement((2.0 * k).sqrt(), (2.0 * (k + 1.0) * omega).sqrt())
}

/// Fit α(θ)-model coefficients from a LoS/NLoS excess-loss description.
///
/// Path loss in dB at distance ℓ is 20·log₁₀(4πfℓ/c) + σ (σ the excess
/// loss of the LoS or NLoS state). Averaging the exponent implied by each
/// distance yields the slope over P_LoS and the additive offset relative
/// to the aggregate constant `a_db`.
pub fn fit_alpha_from_pl_model(
    freq_hz: f64,
    sigma_los_db: f64,
    sigma_nlos_db: f64,
    a_db: f64,
    distances: &[f64],
) -> Result<(f64, f64)> {
    if !(freq_hz > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive (got {freq_hz})")));
    }
    if distances.is_empty() {
        return Err(Error::Domain("need at least one fitting distance".into()));
    }
    let fs_const = 20.0 * (4.0 * std::f64::consts::PI * freq_hz / SPEED_OF_LIGHT).log10();
    let n = distances.len() as f64;
    let mut slope = 0.0;
    let mut offset = 0.0;
    for &ell in distances {
        if !(ell > 1.0) {
            return Err(Error::Domain(format!(
                "fitting distances must exceed 1 m (got {ell})"
            )));
        }
        let log_ell = ell.log10();
        let pl_nlos = fs_const + 20.0 * log_ell + sigma_nlos_db;
        slope += (sigma_los_db - sigma_nlos_db) / (10.0 * n * log_ell);
        offset += (pl_nlos - a_db) / (10.0 * n * log_ell);
    }
    Ok((slope, offset))
}

/// Linear SNR budget from an aggregate link constant (dB), transmit power
/// (dBm), and noise power (dBm): 10^{(A + P − N₀)/10}.
pub fn budget_from_physical(a_db: f64, p_tx_dbm: f64, n0_dbm: f64) -> f64 {
    db_to_linear(a_db + p_tx_dbm - n0_dbm)
}
