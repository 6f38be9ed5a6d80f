//! Stochastic oracle for every analytic expression in the crate: samples
//! Rician fading and Poisson relay fields, plays out the opportunistic
//! decode-and-forward protocol, and reports binomial outage estimates.
//!
//! Reproducibility rule: trial i draws from a ChaCha stream keyed by
//! (seed, i, strategy salt) and nothing else. Partitioning trials across
//! threads therefore cannot change a single bit of the result; estimates
//! are merged as exact integer counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::channel::{LinkBudget, PropagationModel};
use crate::error::Result;
use crate::relay::RelayField;
use crate::Strategy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_trials: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    fn from_count(count: u64, n_trials: u64, seed: u64) -> Self {
        let p = count as f64 / n_trials as f64;
        Self {
            p_hat: p,
            std_err: (p * (1.0 - p) / n_trials as f64).sqrt(),
            n_trials,
            seed,
        }
    }

    /// All-or-nothing outcomes make the binomial error formula vacuous.
    pub fn is_degenerate(&self) -> bool {
        self.p_hat == 0.0 || self.p_hat == 1.0
    }
}

/// One-pass estimates of all three strategies from shared randomness; the
/// cooperative event is the per-trial AND of the other two by definition.
#[derive(Debug, Clone, Copy)]
pub struct CoupledEstimates {
    pub dc: MonteCarloEstimate,
    pub rc: MonteCarloEstimate,
    pub cc: MonteCarloEstimate,
}

#[derive(Debug, Clone, Copy)]
pub struct FadingSample {
    pub omega: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stateless stream key for one trial; salts keep the per-strategy streams
/// independent while the coupled path (salt 0) shares draws.
fn trial_rng(seed: u64, trial: u64, salt: u64) -> ChaCha8Rng {
    let mixed = splitmix64(
        seed ^ splitmix64(trial.wrapping_add(salt.wrapping_mul(0x9E3779B97F4A7C15))),
    );
    ChaCha8Rng::seed_from_u64(mixed)
}

fn strategy_salt(strategy: Strategy) -> u64 {
    match strategy {
        Strategy::Dc => 1,
        Strategy::Rc => 2,
        Strategy::Cc => 3,
    }
}

fn rician_params(k: f64) -> (f64, f64) {
    ((k / (k + 1.0)).sqrt(), (0.5 / (k + 1.0)).sqrt())
}

fn draw_power(mu: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    let a = mu + sigma * g1;
    let b = sigma * g2;
    a * a + b * b
}

/// Unit-mean Rician power draw: Ω = (μ + σg₁)² + (σg₂)² with
/// μ² = K/(K+1), σ² = 1/(2(K+1)).
pub fn sample_rician_power(k: f64, rng: &mut ChaCha8Rng) -> FadingSample {
    assert!(k >= 0.0, "Rician factor must be nonnegative (got {k})");
    let (mu, sigma) = rician_params(k);
    FadingSample {
        omega: draw_power(mu, sigma, rng),
    }
}

/// Uniform PPP on a disk: Poisson count, then r = R√u, φ = 2πu.
pub fn sample_ppp_disk(lambda: f64, radius: f64, rng: &mut ChaCha8Rng) -> Vec<PolarPoint> {
    assert!(lambda >= 0.0 && radius > 0.0);
    let mean = lambda * std::f64::consts::PI * radius * radius;
    if mean == 0.0 {
        return Vec::new();
    }
    let n = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
    (0..n)
        .map(|_| PolarPoint {
            r: radius * rng.random::<f64>().sqrt(),
            phi: 2.0 * std::f64::consts::PI * rng.random::<f64>(),
        })
        .collect()
}

/// Everything a trial needs, precomputed once per scenario point.
struct TrialSetup<'a> {
    r_d: f64,
    h: f64,
    model: &'a PropagationModel,
    xi: f64,
    gamma_u: f64,
    gamma_r: f64,
    disk_radius: f64,
    ppp_mean: f64,
    /// Direct-link fading parameters and decode threshold on Ω_UD.
    mu_ud: f64,
    sigma_ud: f64,
    omega_ud_threshold: f64,
    /// Ground-hop fading parameters (K = κ₀ for every relay→destination link).
    mu_rd: f64,
    sigma_rd: f64,
}

impl<'a> TrialSetup<'a> {
    fn new(
        r_d: f64,
        h: f64,
        field: &RelayField,
        model: &'a PropagationModel,
        budget: &LinkBudget,
    ) -> Self {
        let theta_d = h.atan2(r_d);
        let k_ud = model.rician_factor(theta_d).expect("θ_D in range");
        let alpha_ud = model.path_loss_exponent(theta_d).expect("θ_D in range");
        let (mu_ud, sigma_ud) = rician_params(k_ud);
        let ell_ud = r_d.hypot(h);
        let (mu_rd, sigma_rd) = rician_params(model.kappa0);
        Self {
            r_d,
            h,
            model,
            xi: budget.xi,
            gamma_u: budget.gamma_u,
            gamma_r: budget.gamma_r,
            disk_radius: field.disk_radius,
            ppp_mean: field.lambda * std::f64::consts::PI * field.disk_radius * field.disk_radius,
            mu_ud,
            sigma_ud,
            omega_ud_threshold: budget.xi * ell_ud.powf(alpha_ud) / budget.gamma_u,
            mu_rd,
            sigma_rd,
        }
    }

    fn direct_outage(&self, rng: &mut ChaCha8Rng) -> bool {
        draw_power(self.mu_ud, self.sigma_ud, rng) <= self.omega_ud_threshold
    }

    /// Opportunistic DF over one relay realization. Relays are scanned in
    /// draw order; a relay that decodes the UAV immediately gets its ground
    /// hop tested (draw-on-demand), and the first success ends the trial.
    /// An empty decoding set is an outage.
    fn relay_outage(&self, rng: &mut ChaCha8Rng) -> bool {
        if self.ppp_mean == 0.0 {
            return true;
        }
        let n = Poisson::new(self.ppp_mean)
            .expect("positive mean")
            .sample(rng) as usize;
        for _ in 0..n {
            let r = self.disk_radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let theta = self.h.atan2(r);
            let k = self.model.rician_factor(theta).expect("θ in range");
            let alpha = self.model.path_loss_exponent(theta).expect("θ in range");
            let (mu, sigma) = rician_params(k);
            let omega_ur = draw_power(mu, sigma, rng);
            let ell_ur = r.hypot(self.h);
            if omega_ur * self.gamma_u <= self.xi * ell_ur.powf(alpha) {
                continue; // relay failed to decode the UAV
            }
            let ell_rd2 = (r * r + self.r_d * self.r_d
                - 2.0 * r * self.r_d * phi.cos())
            .max(0.0);
            let omega_rd = draw_power(self.mu_rd, self.sigma_rd, rng);
            if omega_rd * self.gamma_r > self.xi * ell_rd2.sqrt().powf(self.model.alpha0) {
                return false;
            }
        }
        true
    }

    /// Decoding-set size of one realization (no ground-hop draws).
    fn decoding_set_size(&self, rng: &mut ChaCha8Rng) -> u64 {
        if self.ppp_mean == 0.0 {
            return 0;
        }
        let n = Poisson::new(self.ppp_mean)
            .expect("positive mean")
            .sample(rng) as usize;
        let mut decoded = 0u64;
        for _ in 0..n {
            let r = self.disk_radius * rng.random::<f64>().sqrt();
            let _phi: f64 = rng.random();
            let theta = self.h.atan2(r);
            let k = self.model.rician_factor(theta).expect("θ in range");
            let alpha = self.model.path_loss_exponent(theta).expect("θ in range");
            let (mu, sigma) = rician_params(k);
            let omega = draw_power(mu, sigma, rng);
            if omega * self.gamma_u > self.xi * r.hypot(self.h).powf(alpha) {
                decoded += 1;
            }
        }
        decoded
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Chunked trial runner summing `W` exact integer counters per trial; the
/// merge is commutative, so the partition cannot affect the totals.
fn parallel_counts<const W: usize>(
    n_trials: u64,
    threads: usize,
    per_trial: impl Fn(u64) -> [u64; W] + Sync,
) -> [u64; W] {
    let threads = threads.clamp(1, n_trials.max(1) as usize);
    let mut totals = [0u64; W];
    std::thread::scope(|scope| {
        let per_trial = &per_trial;
        let handles: Vec<_> = (0..threads as u64)
            .map(|t| {
                scope.spawn(move || {
                    let lo = n_trials * t / threads as u64;
                    let hi = n_trials * (t + 1) / threads as u64;
                    let mut local = [0u64; W];
                    for i in lo..hi {
                        let c = per_trial(i);
                        for (acc, v) in local.iter_mut().zip(c) {
                            *acc += v;
                        }
                    }
                    local
                })
            })
            .collect();
        for handle in handles {
            let local = handle.join().expect("trial worker panicked");
            for (acc, v) in totals.iter_mut().zip(local) {
                *acc += v;
            }
        }
    });
    totals
}

/// Outage frequency of one strategy with its own independent randomness.
pub fn simulate_outage(
    strategy: Strategy,
    r_d: f64,
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
    n_trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    simulate_outage_threaded(
        strategy,
        r_d,
        h,
        field,
        model,
        budget,
        n_trials,
        seed,
        default_threads(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_outage_threaded(
    strategy: Strategy,
    r_d: f64,
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
    n_trials: u64,
    seed: u64,
    threads: usize,
) -> Result<MonteCarloEstimate> {
    let setup = TrialSetup::new(r_d, h, field, model, budget);
    let salt = strategy_salt(strategy);
    let [count] = parallel_counts(n_trials, threads, |i| {
        let mut rng = trial_rng(seed, i, salt);
        let outage = match strategy {
            Strategy::Dc => setup.direct_outage(&mut rng),
            Strategy::Rc => setup.relay_outage(&mut rng),
            Strategy::Cc => {
                let dc = setup.direct_outage(&mut rng);
                // The relay half still runs on dc success: selection
                // combining in independent mode keeps one stream per trial.
                let rc = setup.relay_outage(&mut rng);
                dc && rc
            }
        };
        [outage as u64]
    });
    Ok(MonteCarloEstimate::from_count(count, n_trials, seed))
}

/// All three strategies from the same realizations (variance-reduced
/// comparisons; the cc stream is the AND of the other two).
pub fn simulate_coupled(
    r_d: f64,
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
    n_trials: u64,
    seed: u64,
) -> Result<CoupledEstimates> {
    simulate_coupled_threaded(r_d, h, field, model, budget, n_trials, seed, default_threads())
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_coupled_threaded(
    r_d: f64,
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
    n_trials: u64,
    seed: u64,
    threads: usize,
) -> Result<CoupledEstimates> {
    let setup = TrialSetup::new(r_d, h, field, model, budget);
    let [dc, rc, cc] = parallel_counts(n_trials, threads, |i| {
        let mut rng = trial_rng(seed, i, 0);
        let dc = setup.direct_outage(&mut rng);
        let rc = setup.relay_outage(&mut rng);
        [dc as u64, rc as u64, (dc && rc) as u64]
    });
    Ok(CoupledEstimates {
        dc: MonteCarloEstimate::from_count(dc, n_trials, seed),
        rc: MonteCarloEstimate::from_count(rc, n_trials, seed),
        cc: MonteCarloEstimate::from_count(cc, n_trials, seed),
    })
}

/// Mean and standard error of the decoding-set size |𝒜| — the quantity the
/// analytic side predicts as λ·ψ₁(h).
pub fn mean_decoding_set_size(
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
    n_trials: u64,
    seed: u64,
) -> (f64, f64) {
    let setup = TrialSetup::new(0.0, h, field, model, budget);
    let [sum, sum_sq] = parallel_counts(n_trials, default_threads(), |i| {
        let mut rng = trial_rng(seed, i, 4);
        let k = setup.decoding_set_size(&mut rng);
        [k, k * k]
    });
    let n = n_trials as f64;
    let mean = sum as f64 / n;
    let var = (sum_sq as f64 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}
