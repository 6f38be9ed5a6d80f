//! Outage, coverage and power-allocation analysis for UAV air-to-ground
//! links assisted by decode-and-forward ground relays.
//!
//! The model: a UAV at altitude `h` serves a ground node at horizontal
//! distance `r_d` over a Rician channel whose K-factor and path-loss
//! exponent both depend on the elevation angle — higher angles mean more
//! line-of-sight, stronger K, and an exponent closer to free space.
//! Raising the UAV improves the channel but lengthens the link; outage is
//! therefore convex in altitude and has a nontrivial optimum. Ground
//! relays drawn from a Poisson field add an independent two-hop path, and
//! selection combining multiplies the two outage probabilities.
//!
//! Start with the runnable examples (`cargo run --release --example …`):
//!
//! * `link_outage` — direct-link outage across altitudes for one geometry
//! * `optimal_altitude` — closed-form vs numeric optimal elevation angle
//! * `coverage_map` — the (coverage radius, altitude) boundary at a target
//!   outage, exact and closed-form-inverse versions
//! * `max_coverage_angle` — the altitude/radius pair maximizing coverage,
//!   and its invariance to the SNR threshold
//! * `relay_boost` — relay-assisted and combined outage vs the direct link,
//!   with the altitude-free lower bound
//! * `power_split` — coverage as a function of the UAV/relay power share
//! * `joint_design` — joint altitude + power-share optimization
//! * `simulate` — seeded Monte-Carlo cross-check of the analytic curves
//! * `fit_path_loss` — angle-dependent path-loss exponent from a two-σ
//!   excess-loss model
//!
//! The same functionality is scriptable through the `altilink` binary,
//! which reads scenario files (see `scenarios/`) and writes CSV.
//!
//! Numerical conventions: angles in radians (CSV output uses degrees),
//! distances in meters, SNRs and K-factors linear (dB only at the API
//! boundary), probabilities in [0, 1]. All iterative solvers are
//! deterministic; Monte-Carlo results depend only on the seed, never on
//! thread count.

pub mod channel;
pub mod commands;
pub mod direct;
pub mod error;
pub mod monte_carlo;
pub mod numerics;
pub mod relay;
pub mod scenario;
pub mod special;

use std::fmt;
use std::str::FromStr;

pub use channel::{Geometry, LinkBudget, PropagationModel};
pub use error::{Error, Result};

/// Transmission strategy: direct UAV link, opportunistic relaying, or
/// selection combining of both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Direct connection, UAV → destination.
    Dc,
    /// Relay connection: best decoding relay → destination.
    Rc,
    /// Cooperative connection: stronger of the two.
    Cc,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Dc, Strategy::Rc, Strategy::Cc];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Dc => "dc",
            Strategy::Rc => "rc",
            Strategy::Cc => "cc",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dc" => Ok(Strategy::Dc),
            "rc" => Ok(Strategy::Rc),
            "cc" => Ok(Strategy::Cc),
            other => Err(format!("unknown strategy `{other}` (dc, rc, cc)")),
        }
    }
}
