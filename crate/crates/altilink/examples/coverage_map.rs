//! Coverage radius (largest ground range meeting the 12% outage target)
//! for each strategy over altitude. The relayed radii come from the
//! self-consistent fixed point: the relay disk is the coverage disk.

use altilink::channel::{LinkBudget, PropagationModel};
use altilink::direct::coverage_radius_dc;
use altilink::relay::coverage_radius;
use altilink::Strategy;

fn main() -> altilink::Result<()> {
    let model = PropagationModel::new_db(5.0, 15.0, 3.5, 2.0, 60.0, 18.0)?;
    let budget = LinkBudget::from_db(75.0, 75.0, 0.0, 0.17)?;
    let lambda = 3e-4;

    println!("{:>8} {:>10} {:>10} {:>10} {:>6}", "h [m]", "dc [m]", "rc [m]", "cc [m]", "iters");
    for h in [500.0, 1000.0, 1500.0, 2000.0, 3000.0] {
        let dc = coverage_radius_dc(h, &model, &budget)?;
        let rc = coverage_radius(Strategy::Rc, h, lambda, &model, &budget)?;
        let cc = coverage_radius(Strategy::Cc, h, lambda, &model, &budget)?;
        println!(
            "{h:>8.0} {dc:>10.1} {:>10.1} {:>10.1} {:>6}",
            rc.radius, cc.radius, cc.iterations
        );
    }
    Ok(())
}
