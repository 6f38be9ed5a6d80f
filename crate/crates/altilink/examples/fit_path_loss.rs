//! Deriving the angle-dependent path-loss exponent from a physical
//! excess-loss description: free-space loss at carrier frequency f plus a
//! per-state σ (LoS / NLoS), averaged over a distance range, gives the
//! slope-over-P_LoS form the propagation model consumes.

use altilink::channel::{budget_from_physical, fit_alpha_from_pl_model, PropagationModel, SPEED_OF_LIGHT};

fn main() -> altilink::Result<()> {
    let freq_hz = 2e9;
    let (sigma_los_db, sigma_nlos_db) = (1.0, 20.0);
    // Anchor the exponents to the pure free-space link constant.
    let a_db = 20.0 * (4.0 * std::f64::consts::PI * freq_hz / SPEED_OF_LIGHT).log10();
    let distances: Vec<f64> = (0..64).map(|i| 100.0 + 9900.0 * i as f64 / 63.0).collect();

    let (slope, offset) = fit_alpha_from_pl_model(freq_hz, sigma_los_db, sigma_nlos_db, a_db, &distances)?;
    println!("fitted α(P_LoS) = {slope:.4}·P_LoS + {offset:.4}");

    // Same urban LoS-probability logistic as the bundled case study; its
    // P_LoS endpoints turn the fit into the model's (α₀, α_{π/2}) anchors.
    let (a2, b2) = (60.0, 18.0);
    let p_horizon = 1.0 / (1.0 + a2);
    let p_zenith = 1.0 / (1.0 + a2 * (-b2 * std::f64::consts::FRAC_PI_2).exp());
    let model = PropagationModel::new_db(
        5.0,
        15.0,
        offset + slope * p_horizon,
        offset + slope * p_zenith,
        a2,
        b2,
    )?;
    println!("{:>8} {:>8} {:>8}", "θ [°]", "P_LoS", "α(θ)");
    for deg in [0.0, 15.0, 30.0, 45.0, 60.0, 90.0] {
        let theta = (deg as f64).to_radians();
        println!(
            "{deg:>8.0} {:>8.4} {:>8.3}",
            model.p_los(theta)?,
            model.path_loss_exponent(theta)?
        );
    }

    // The aggregate constant of the SNR budget is a gain, so the 1 m
    // free-space loss enters negated.
    let gamma = budget_from_physical(-a_db, 30.0, -96.0);
    println!("30 dBm transmit over −96 dBm noise ⇒ γ = {:.1} dB at 1 m", 10.0 * gamma.log10());
    Ok(())
}
