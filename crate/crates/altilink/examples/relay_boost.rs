//! Relay density is an exponential lever: the relayed outage is
//! exp(−λ·D) for a density-free decode area D, so every doubling of λ
//! squares the outage probability. The expected number of relays that
//! decode the UAV is λ·ψ₁ with the same area integral.

use altilink::channel::{LinkBudget, PropagationModel};
use altilink::relay::{outage_rc, psi1, RelayField};

fn main() -> altilink::Result<()> {
    let model = PropagationModel::new_db(5.0, 15.0, 3.5, 2.0, 60.0, 16.0)?;
    let budget = LinkBudget::from_db(62.0, 62.0, 0.0, 0.12)?;
    let (r_d, h, disk) = (600.0, 700.0, 1000.0);

    println!("r_D = {r_d} m, h = {h} m, disk = {disk} m");
    println!("{:>12} {:>13} {:>12} {:>14}", "λ [1/m²]", "outage_rc", "ln outage", "E[#decoders]");
    for mult in [1.0, 2.0, 4.0, 8.0] {
        let lambda = 1e-4 * mult;
        let field = RelayField::new(lambda, disk)?;
        let p = outage_rc(r_d, h, &field, &model, &budget)?;
        let decoders = lambda * psi1(h, &field, &model, &budget)?;
        println!("{lambda:>12.1e} {p:>13.4e} {:>12.4} {decoders:>14.2}", p.ln());
    }
    println!("(each doubling of λ doubles ln outage exactly)");
    Ok(())
}
