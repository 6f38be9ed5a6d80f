//! Joint altitude + power-share design: free both h and ρ and maximize
//! the cooperative coverage radius, then compare against the best the
//! direct link can do with the same total budget at its own best altitude.
//!
//! The nested optimization re-solves the coverage fixed point a few
//! hundred times; expect a few minutes of wall clock on one core.

use altilink::channel::{LinkBudget, PropagationModel};
use altilink::direct::coverage_radius_dc;
use altilink::numerics::golden_max;
use altilink::relay::joint_optimum;
use altilink::Strategy;

fn main() -> altilink::Result<()> {
    let model = PropagationModel::new_db(5.0, 15.0, 3.5, 2.0, 60.0, 18.0)?;
    let base = LinkBudget::from_db(75.0, 75.0, 0.0, 0.17)?;
    let total = base.gamma_u + base.gamma_r;
    let lambda = 3e-4;

    let dc_budget = LinkBudget::new(total, total, base.xi, base.epsilon)?;
    let (ln_h, dc_best) = golden_max(
        |lh: f64| coverage_radius_dc(lh.exp(), &model, &dc_budget).unwrap_or(0.0),
        150.0f64.ln(),
        8000.0f64.ln(),
        1e-4,
    );
    println!("direct baseline: r_C = {dc_best:.0} m at h = {:.0} m (full budget on the UAV)", ln_h.exp());

    println!("optimizing cooperative (h, ρ) — this takes a few minutes ...");
    let joint = joint_optimum(Strategy::Cc, total, base.xi, base.epsilon, lambda, &model)?;
    println!(
        "joint optimum: h = {:.0} m, ρ = {:.3}, r_C = {:.0} m",
        joint.h, joint.rho, joint.coverage
    );
    println!(
        "coverage gain {:.1}% with {:.0}% less transmit power on the UAV",
        100.0 * (joint.coverage / dc_best - 1.0),
        100.0 * (1.0 - joint.rho)
    );
    Ok(())
}
