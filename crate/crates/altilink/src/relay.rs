//! Decode-and-forward relaying over a Poisson field of ground relays, the
//! cooperative (selection-combining) strategy, self-consistent coverage
//! radii, and power-budget allocation.
//!
//! Relaying outage is exp(−λ·(ψ₁−ψ₂)): ψ₁ integrates the first-hop decode
//! probability over the disk, ψ₂ removes the relays whose second hop to
//! the destination fails. The difference is evaluated as a single fused
//! integral of r·Q_UR·Q_RD — a positive integrand, so no cancellation when
//! ψ₁ ≈ ψ₂ at distant destinations, and termwise dominated by the
//! lower-bound integrand (which makes the bound ordering structural, not a
//! numerical accident).

use std::sync::atomic::{AtomicU64, Ordering};

use crate::channel::{Geometry, LinkBudget, PropagationModel};
use crate::direct::{coverage_radius_dc, outage_dc};
use crate::error::{Error, Result};
use crate::numerics::{bisect_secant, gauss_legendre, golden_max};
use crate::special::marcum_q_raw;
use crate::Strategy;

/// Disk-area integrals agree to this relative tolerance between quadrature
/// orders before a result is accepted.
const PSI1_REL_TOL: f64 = 1e-8;
const PSI2_REL_TOL: f64 = 1e-6;
/// Absolute slack (m²) under which two area integrals count as equal; set
/// far below anything that survives multiplication by a plausible λ.
const AREA_ABS_FLOOR: f64 = 1e-6;

static ESCALATIONS: AtomicU64 = AtomicU64::new(0);

/// How many disk integrals needed the 192-node escalation so far (process
/// lifetime). A nonzero value is benign; a fast-growing one says the
/// scenario is stressing the quadrature.
pub fn quadrature_escalations() -> u64 {
    ESCALATIONS.load(Ordering::Relaxed)
}

/// Poisson relay field: density and the disk the relays live on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayField {
    /// Relays per m².
    pub lambda: f64,
    /// Radius of the relay disk, centered on the UAV ground projection.
    pub disk_radius: f64,
}

impl RelayField {
    pub fn new(lambda: f64, disk_radius: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !(disk_radius > 0.0) {
            return Err(Error::Domain(format!(
                "relay field needs lambda ≥ 0 and disk_radius > 0 (got {lambda}, {disk_radius})"
            )));
        }
        Ok(Self { lambda, disk_radius })
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.disk_radius * self.disk_radius
    }
}

/// Split of one total SNR budget between UAV and relays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    /// UAV share, in (0, 1].
    pub rho: f64,
    pub total_budget_gamma: f64,
}

impl PowerAllocation {
    pub fn new(rho: f64, total_budget_gamma: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Domain(format!("rho must lie in (0,1] (got {rho})")));
        }
        if !(total_budget_gamma > 0.0) {
            return Err(Error::Domain(format!(
                "total budget must be positive (got {total_budget_gamma})"
            )));
        }
        Ok(Self { rho, total_budget_gamma })
    }

    pub fn gamma_u(&self) -> f64 {
        self.rho * self.total_budget_gamma
    }

    pub fn gamma_r(&self) -> f64 {
        (1.0 - self.rho) * self.total_budget_gamma
    }

    /// Budget with this split; errors at ρ = 1 (relays would get zero power).
    pub fn budget(&self, xi: f64, epsilon: f64) -> Result<LinkBudget> {
        LinkBudget::new(self.gamma_u(), self.gamma_r(), xi, epsilon)
    }
}

/// Decode probability of the UAV→relay hop for a relay at ground range r.
fn q_ur(r: f64, h: f64, model: &PropagationModel, budget: &LinkBudget) -> f64 {
    let theta = h.atan2(r);
    let k = model.rician_factor(theta).expect("atan2 keeps θ in range");
    let alpha = model.path_loss_exponent(theta).expect("atan2 keeps θ in range");
    let ell = r.hypot(h);
    let y2 = 2.0 * budget.xi * (1.0 + k) * ell.powf(alpha) / budget.gamma_u;
    marcum_q_raw((2.0 * k).sqrt(), y2.sqrt())
}

/// Decode probability of the relay→destination ground hop at range ell;
/// ground links see the θ = 0 channel.
fn q_rd(ell: f64, model: &PropagationModel, budget: &LinkBudget) -> f64 {
    let k = model.kappa0;
    let y2 = 2.0 * budget.xi * (1.0 + k) * ell.powf(model.alpha0) / budget.gamma_r;
    marcum_q_raw((2.0 * k).sqrt(), y2.sqrt())
}

/// Discretization of the relay disk for one (h, R) pair: Gauss–Legendre
/// radial nodes with cached first-hop probabilities (for ψ₁), plus a dense
/// uniform Q_UR table for the destination-centered decode integral.
struct DiskGrid {
    order: usize,
    radius: f64,
    r_nodes: Vec<f64>,
    r_weights: Vec<f64>,
    q_ur: Vec<f64>,
    /// Q_UR sampled at 32·order+1 equispaced radii; cubic interpolation.
    table: Vec<f64>,
}

impl DiskGrid {
    fn new(order: usize, h: f64, radius: f64, model: &PropagationModel, budget: &LinkBudget) -> Self {
        let gl = gauss_legendre(order);
        let half = 0.5 * radius;
        let mut r_nodes = Vec::with_capacity(order);
        let mut r_weights = Vec::with_capacity(order);
        let mut cached = Vec::with_capacity(order);
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let r = half * (t + 1.0);
            r_nodes.push(r);
            r_weights.push(w * half);
            cached.push(q_ur(r, h, model, budget));
        }
        let n_table = 32 * order;
        let dr = radius / n_table as f64;
        // One ghost sample past each end keeps the cubic stencil full-rank
        // at the edges (the clamped stencil only interpolates to O(Δ²)
        // there, and rim-grazing destinations sample the rim heavily).
        // The profile is even in r, and past the rim it simply extends.
        let table = (0..=n_table + 2)
            .map(|j| q_ur((dr * (j as f64 - 1.0)).abs(), h, model, budget))
            .collect();
        Self {
            order,
            radius,
            r_nodes,
            r_weights,
            q_ur: cached,
            table,
        }
    }

    /// 2π ∫ r·Q_UR dr on this grid.
    fn psi1(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.r_nodes.len() {
            acc += self.r_weights[i] * self.r_nodes[i] * self.q_ur[i];
        }
        2.0 * std::f64::consts::PI * acc
    }

    /// Catmull-Rom interpolation of the cached Q_UR profile.
    fn q_ur_at(&self, r: f64) -> f64 {
        let n = self.table.len() - 3; // intervals spanning [0, radius]
        let x = (r / self.radius * n as f64).clamp(0.0, n as f64);
        let i = (x as usize).min(n - 1);
        let u = x - i as f64;
        let p0 = self.table[i];
        let p1 = self.table[i + 1];
        let p2 = self.table[i + 2];
        let p3 = self.table[i + 3];
        let v = 0.5
            * (2.0 * p1
                + u * ((p2 - p0)
                    + u * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3)
                        + u * (3.0 * (p1 - p2) + p3 - p0))));
        v.clamp(0.0, 1.0)
    }

    /// Fused decode area ∫∫ r·Q_UR·Q_RD — analytically ψ₁ − ψ₂.
    fn decode_area(&self, r_d: f64, model: &PropagationModel, budget: &LinkBudget) -> f64 {
        decode_area_integral(
            r_d,
            self.radius,
            |r| self.q_ur_at(r),
            self.order,
            model,
            budget,
        )
    }
}

/// ∫∫ q_ur(r)·Q_RD over the relay disk, in polar coordinates centered on
/// the destination. Q_RD lives on a short ground-hop scale; a grid on the
/// (possibly much larger) disk cannot resolve it, a destination-centered
/// one always does.
fn decode_area_integral(
    r_d: f64,
    radius: f64,
    q_ur_at: impl Fn(f64) -> f64,
    order: usize,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> f64 {
    let x0 = (2.0 * model.kappa0).sqrt();
    // The ground hop is hopeless (Q_RD < e^{-72}) beyond this range.
    let y_cut = x0 + 12.0;
    let ell_cut = (budget.gamma_r * y_cut * y_cut / (2.0 * budget.xi * (1.0 + model.kappa0)))
        .powf(1.0 / model.alpha0);
    let ell_lo = (r_d - radius).max(0.0);
    let ell_hi = (r_d + radius).min(ell_cut);
    if ell_hi <= ell_lo {
        return 0.0;
    }
    // The angular arc inside the disk has a kink where clipping starts.
    let mut cuts = [ell_lo, ell_hi, ell_hi];
    let mut n_cuts = 2;
    let transition = radius - r_d;
    if transition > ell_lo && transition < ell_hi {
        cuts = [ell_lo, transition, ell_hi];
        n_cuts = 3;
    }
    let gl = gauss_legendre(order);
    let rd2 = r_d * r_d;
    let mut acc = 0.0;
    for seg in cuts[..n_cuts].windows(2) {
        let half = 0.5 * (seg[1] - seg[0]);
        let mid = 0.5 * (seg[0] + seg[1]);
        for (&tn, &wn) in gl.nodes.iter().zip(&gl.weights) {
            // φ_max opens/closes like a square root where the destination
            // circle meets the disk rim (acos argument at ±1), which would
            // drop plain Gauss-Legendre to algebraic convergence; the sine
            // map is quadratic at the panel ends and restores it.
            let (sn, cn) = (std::f64::consts::FRAC_PI_2 * tn).sin_cos();
            let ell = mid + half * sn;
            let jac = half * std::f64::consts::FRAC_PI_2 * cn;
            let q2 = q_rd(ell, model, budget);
            if q2 == 0.0 {
                continue;
            }
            let phi_max = if r_d + ell <= radius {
                std::f64::consts::PI
            } else if (r_d - ell).abs() >= radius {
                0.0
            } else {
                ((rd2 + ell * ell - radius * radius) / (2.0 * r_d * ell))
                    .clamp(-1.0, 1.0)
                    .acos()
            };
            if phi_max == 0.0 {
                continue;
            }
            // ∫₀^{φ_max} q_ur(r(φ)) dφ with r² = r_d² + ℓ² − 2·r_d·ℓ·cos φ,
            // doubled for the mirror arc.
            let ph = 0.5 * phi_max;
            let mut inner = 0.0;
            for (&tp, &wp) in gl.nodes.iter().zip(&gl.weights) {
                let phi = ph * (tp + 1.0);
                let r2 = (rd2 + ell * ell - 2.0 * r_d * ell * phi.cos()).max(0.0);
                inner += wp * q_ur_at(r2.sqrt());
            }
            acc += wn * jac * ell * q2 * 2.0 * ph * inner;
        }
    }
    acc
}

/// Run `eval` at the base and check orders; escalate once before giving up.
fn order_checked(
    eval: impl Fn(usize) -> f64,
    rel_tol: f64,
    what: &str,
) -> Result<f64> {
    let base = eval(96);
    let check = eval(128);
    if (base - check).abs() <= rel_tol * check.abs() + AREA_ABS_FLOOR {
        return Ok(check);
    }
    let fine = eval(192);
    if (fine - check).abs() <= rel_tol * fine.abs() + AREA_ABS_FLOOR {
        ESCALATIONS.fetch_add(1, Ordering::Relaxed);
        return Ok(fine);
    }
    Err(Error::Quadrature(format!(
        "{what} disagrees across orders 96/128/192: {base:.12e} / {check:.12e} / {fine:.12e}"
    )))
}

/// First-hop decode area ψ₁(h) = 2π ∫₀^R r·Q_UR dr (m²).
pub fn psi1(h: f64, field: &RelayField, model: &PropagationModel, budget: &LinkBudget) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::Domain(format!("altitude must be nonnegative (got {h})")));
    }
    order_checked(
        |order| DiskGrid::new(order, h, field.disk_radius, model, budget).psi1(),
        PSI1_REL_TOL,
        "psi1",
    )
}

/// Second-hop failure area ψ₂(r_d, h) = ∫∫ r·Q_UR·(1 − Q_RD) (m²).
pub fn psi2(
    r_d: f64,
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<f64> {
    if !(r_d >= 0.0) || !(h >= 0.0) {
        return Err(Error::Domain(format!(
            "psi2 needs r_d ≥ 0 and h ≥ 0 (got {r_d}, {h})"
        )));
    }
    // ψ₂ = ψ₁ − ∫∫ r·Q_UR·Q_RD; both pieces are individually stable while
    // the direct ψ₂ integrand mixes the disk and ground-hop scales.
    let p1 = psi1(h, field, model, budget)?;
    let fused = decode_area_checked(r_d, h, field, model, budget)?;
    Ok((p1 - fused).max(0.0))
}

fn decode_area_checked(
    r_d: f64,
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<f64> {
    order_checked(
        |order| {
            DiskGrid::new(order, h, field.disk_radius, model, budget).decode_area(r_d, model, budget)
        },
        PSI2_REL_TOL,
        "relay decode area",
    )
}

/// Relaying outage exp(−λ·(ψ₁−ψ₂)): probability that no relay both decodes
/// the UAV and reaches the destination.
pub fn outage_rc(
    r_d: f64,
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<f64> {
    if !(r_d >= 0.0) || !(h >= 0.0) {
        return Err(Error::Domain(format!(
            "outage_rc needs r_d ≥ 0 and h ≥ 0 (got {r_d}, {h})"
        )));
    }
    if field.lambda == 0.0 {
        return Ok(1.0);
    }
    let area = decode_area_checked(r_d, h, field, model, budget)?;
    Ok((-field.lambda * area).exp())
}

/// Altitude-free lower bound exp(−λ·(πR² − ψ₀₂(r_d))): assumes every relay
/// decodes the UAV, leaving only second-hop failures.
pub fn outage_rc_lower_bound(
    r_d: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<f64> {
    if !(r_d >= 0.0) {
        return Err(Error::Domain(format!("r_d must be nonnegative (got {r_d})")));
    }
    if field.lambda == 0.0 {
        return Ok(1.0);
    }
    // Second-hop-only decode area ∫∫ r·Q_RD = πR² − ψ₀₂: the first hop
    // pinned to certainty.
    let area = order_checked(
        |order| decode_area_integral(r_d, field.disk_radius, |_| 1.0, order, model, budget),
        PSI2_REL_TOL,
        "lower-bound decode area",
    )?;
    Ok((-field.lambda * area).exp())
}

/// Cooperative (selection-combining) outage: both the direct link and
/// every relay path must fail; per-link fading independence makes it the
/// plain product.
pub fn outage_cc(
    r_d: f64,
    h: f64,
    field: &RelayField,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<f64> {
    let dc = outage_dc(Geometry::new(r_d, h)?, model, budget)?;
    Ok(dc * outage_rc(r_d, h, field, model, budget)?)
}

/// Self-consistent coverage radius: the disk the relays occupy is itself
/// the coverage area being solved for.
#[derive(Debug, Clone, Copy)]
pub struct CoverageFixedPoint {
    pub radius: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the iteration bounced between values instead of settling.
    pub oscillating: bool,
}

fn strategy_outage_on_grid(
    strategy: Strategy,
    r: f64,
    h: f64,
    lambda: f64,
    grid: &DiskGrid,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> f64 {
    let rc = if lambda == 0.0 {
        1.0
    } else {
        (-lambda * grid.decode_area(r, model, budget)).exp()
    };
    match strategy {
        Strategy::Rc => rc,
        Strategy::Cc => {
            let dc = outage_dc(Geometry::new(r, h).expect("r ≥ 0, h ≥ 0"), model, budget)
                .expect("valid geometry");
            dc * rc
        }
        Strategy::Dc => unreachable!("direct strategy has no relay fixed point"),
    }
}

/// Root of outage(r) = ε for a fixed disk; 0 when even the center is out.
fn coverage_root(
    outage_at: impl Fn(f64) -> f64,
    seed: f64,
    epsilon: f64,
) -> Result<f64> {
    if outage_at(0.0) >= epsilon {
        return Ok(0.0);
    }
    let mut hi = seed.max(100.0);
    loop {
        let v = outage_at(hi);
        if !v.is_finite() {
            return Err(Error::Convergence(format!(
                "outage evaluation failed at r = {hi:.3e} while bracketing coverage"
            )));
        }
        if v >= epsilon {
            break;
        }
        hi *= 1.5;
        if hi > 1e7 {
            return Err(Error::Convergence(
                "coverage root exceeds 1e7 m; scenario is implausible".into(),
            ));
        }
    }
    bisect_secant(|r| outage_at(r) - epsilon, 0.0, hi, 1e-9, 200)
}

fn coverage_radius_impl(
    strategy: Strategy,
    h: f64,
    lambda: f64,
    model: &PropagationModel,
    budget: &LinkBudget,
    checked_final: bool,
) -> Result<CoverageFixedPoint> {
    let r_dc = coverage_radius_dc(h, model, budget)?;
    if strategy == Strategy::Dc {
        return Ok(CoverageFixedPoint {
            radius: r_dc,
            iterations: 0,
            converged: true,
            oscillating: false,
        });
    }
    if lambda == 0.0 {
        // rc can never beat ε without relays; cc collapses to the direct link.
        let radius = if strategy == Strategy::Rc { 0.0 } else { r_dc };
        return Ok(CoverageFixedPoint {
            radius,
            iterations: 0,
            converged: true,
            oscillating: false,
        });
    }
    let mut disk = r_dc.max(100.0);
    let mut converged = false;
    let mut sign_flips = 0usize;
    let mut last_delta = 0.0f64;
    let mut iterations = 0usize;
    // Optimizer loops only rank coverage values; the published radius must
    // be self-consistent tightly enough that outage(r*, disk = r*) holds ε
    // to ~1e-6, which needs the disk settled to well under a millimetre.
    let settle = if checked_final { 2e-4 } else { 0.05 };
    while iterations < 50 {
        iterations += 1;
        let grid = DiskGrid::new(96, h, disk, model, budget);
        let next = coverage_root(
            |r| strategy_outage_on_grid(strategy, r, h, lambda, &grid, model, budget),
            disk,
            budget.epsilon,
        )?;
        let delta = next - disk;
        if last_delta * delta < 0.0 {
            sign_flips += 1;
        }
        last_delta = delta;
        disk = next;
        if disk == 0.0 {
            converged = true;
            break;
        }
        if delta.abs() < settle {
            converged = true;
            break;
        }
    }
    let mut radius = disk;
    if checked_final && converged && radius > 0.0 {
        // Re-solve the last root with the order-verified integrals so the
        // published radius carries the full quadrature guarantee.
        let field = RelayField::new(lambda, radius)?;
        let outage = |r: f64| -> f64 {
            match strategy {
                Strategy::Rc => outage_rc(r, h, &field, model, budget).unwrap_or(f64::NAN),
                Strategy::Cc => outage_cc(r, h, &field, model, budget).unwrap_or(f64::NAN),
                Strategy::Dc => unreachable!(),
            }
        };
        radius = coverage_root(outage, radius, budget.epsilon)?;
    }
    Ok(CoverageFixedPoint {
        radius,
        iterations,
        converged,
        oscillating: !converged && sign_flips >= 3,
    })
}

/// Coverage radius for the relayed or cooperative strategy at altitude `h`
/// and relay density `lambda`. `Strategy::Dc` is accepted for convenience
/// and returns the direct-link radius.
pub fn coverage_radius(
    strategy: Strategy,
    h: f64,
    lambda: f64,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<CoverageFixedPoint> {
    coverage_radius_impl(strategy, h, lambda, model, budget, true)
}

/// Fast path for optimizer loops: same fixed point, no final order-checked
/// polish (the caller re-verifies its winning candidate).
pub(crate) fn coverage_radius_fast(
    strategy: Strategy,
    h: f64,
    lambda: f64,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<CoverageFixedPoint> {
    coverage_radius_impl(strategy, h, lambda, model, budget, false)
}

#[derive(Debug, Clone, Copy)]
pub struct PowerOptimum {
    pub rho: f64,
    pub coverage: f64,
    /// False when the coarse ρ grid was not unimodal; the result is then
    /// only the refined best grid point.
    pub unimodal: bool,
}

const RHO_FLOOR: f64 = 0.05;
const RHO_CEIL: f64 = 0.999;

fn count_maxima(vals: &[f64]) -> usize {
    let mut maxima = 0usize;
    let mut dir = 0i8;
    for i in 1..vals.len() {
        let d = vals[i] - vals[i - 1];
        let s = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if s != 0 {
            if s == -1 && dir == 1 {
                maxima += 1;
            }
            dir = s;
        }
    }
    if dir == 1 || dir == 0 {
        maxima += 1; // still rising (or flat) at the right edge
    }
    maxima
}

fn optimize_power_impl(
    strategy: Strategy,
    h: f64,
    total_gamma: f64,
    xi: f64,
    epsilon: f64,
    lambda: f64,
    model: &PropagationModel,
    coarse_points: usize,
    rho_tol: f64,
    checked_final: bool,
) -> Result<PowerOptimum> {
    if strategy == Strategy::Dc {
        return Err(Error::Domain(
            "power allocation applies to relayed strategies only".into(),
        ));
    }
    let coverage_at = |rho: f64| -> Result<f64> {
        let budget = PowerAllocation::new(rho, total_gamma)?.budget(xi, epsilon)?;
        Ok(coverage_radius_fast(strategy, h, lambda, model, &budget)?.radius)
    };
    let mut grid = Vec::with_capacity(coarse_points);
    let mut vals = Vec::with_capacity(coarse_points);
    for i in 0..coarse_points {
        let rho = RHO_FLOOR + (RHO_CEIL - RHO_FLOOR) * i as f64 / (coarse_points - 1) as f64;
        grid.push(rho);
        vals.push(coverage_at(rho)?);
    }
    let unimodal = count_maxima(&vals) <= 1;
    let best = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid non-empty");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(coarse_points - 1)];
    let (rho, _) = golden_max(|r| coverage_at(r).unwrap_or(0.0), lo, hi, rho_tol);
    let coverage = if checked_final {
        let budget = PowerAllocation::new(rho, total_gamma)?.budget(xi, epsilon)?;
        coverage_radius(strategy, h, lambda, model, &budget)?.radius
    } else {
        coverage_at(rho)?
    };
    Ok(PowerOptimum {
        rho,
        coverage,
        unimodal,
    })
}

/// Best UAV power share ρ ∈ [0.05, 0.999] for coverage at altitude `h`:
/// coarse scan plus golden-section refinement to Δρ < 1e-3.
pub fn optimize_power_allocation(
    strategy: Strategy,
    h: f64,
    total_gamma: f64,
    xi: f64,
    epsilon: f64,
    lambda: f64,
    model: &PropagationModel,
) -> Result<PowerOptimum> {
    optimize_power_impl(
        strategy, h, total_gamma, xi, epsilon, lambda, model, 12, 1e-3, true,
    )
}

#[derive(Debug, Clone, Copy)]
pub struct JointOptimum {
    pub h: f64,
    pub rho: f64,
    pub coverage: f64,
}

/// Joint (h, ρ) maximizer of the coverage radius: golden section over
/// ln h with a nested power-share optimization at each altitude.
pub fn joint_optimum(
    strategy: Strategy,
    total_gamma: f64,
    xi: f64,
    epsilon: f64,
    lambda: f64,
    model: &PropagationModel,
) -> Result<JointOptimum> {
    let inner = |h: f64| -> Result<PowerOptimum> {
        optimize_power_impl(
            strategy, h, total_gamma, xi, epsilon, lambda, model, 8, 2e-3, false,
        )
    };
    let (h_lo, h_hi) = (150.0f64, 8000.0f64);
    // Coarse altitude scan to bracket the peak before refining.
    const COARSE: usize = 7;
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    let mut hs = [0.0f64; COARSE];
    for (i, slot) in hs.iter_mut().enumerate() {
        let ln_h = h_lo.ln() + (h_hi.ln() - h_lo.ln()) * i as f64 / (COARSE - 1) as f64;
        *slot = ln_h.exp();
        let v = inner(*slot)?.coverage;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = hs[best_i.saturating_sub(1)].ln();
    let hi = hs[(best_i + 1).min(COARSE - 1)].ln();
    let (ln_h, _) = golden_max(
        |lh| inner(lh.exp()).map(|p| p.coverage).unwrap_or(0.0),
        lo,
        hi,
        5e-3,
    );
    let h = ln_h.exp();
    let at_h = optimize_power_impl(
        strategy, h, total_gamma, xi, epsilon, lambda, model, 12, 1e-3, true,
    )?;
    Ok(JointOptimum {
        h,
        rho: at_h.rho,
        coverage: at_h.coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn setup() -> (PropagationModel, LinkBudget, RelayField) {
        let model = PropagationModel::new_db(5.0, 15.0, 3.5, 2.0, 60.0, 16.0).unwrap();
        // Half of the 75 dB case-study budget on each side (ρ = 0.5).
        let total = 10f64.powf(7.5);
        let budget = LinkBudget::new(0.5 * total, 0.5 * total, 1.0, 0.12).unwrap();
        let field = RelayField::new(3e-4, 1500.0).unwrap();
        (model, budget, field)
    }

    #[test]
    fn disk_integral_reference_values() {
        let (m, b, f) = setup();
        assert_relative_eq!(
            psi1(1000.0, &f, &m, &b).unwrap(),
            7039615.770994831,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            psi2(500.0, 1000.0, &f, &m, &b).unwrap(),
            7000989.56460899,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            outage_rc(500.0, 1000.0, &f, &m, &b).unwrap(),
            9.278024455750293e-06,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            outage_cc(500.0, 1000.0, &f, &m, &b).unwrap(),
            1.3644051617631058e-10,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            outage_rc_lower_bound(500.0, &f, &m, &b).unwrap(),
            9.275910366879883e-06,
            max_relative = 1e-6
        );
    }

    #[test]
    fn psi1_saturates_and_vanishes() {
        let (m, _, f) = setup();
        let everything = LinkBudget::new(1e30, 1e30, 1.0, 0.12).unwrap();
        assert_relative_eq!(
            psi1(1000.0, &f, &m, &everything).unwrap(),
            f.area(),
            max_relative = 1e-9
        );
        let nothing = LinkBudget::new(1.0, 1.0, 1e30, 0.12).unwrap();
        assert!(psi1(1000.0, &f, &m, &nothing).unwrap() < 1e-6 * f.area());
    }

    #[test]
    fn psi2_sits_between_zero_and_psi1() {
        let (m, b, f) = setup();
        let p1 = psi1(1000.0, &f, &m, &b).unwrap();
        for r_d in [0.0, 400.0, 1000.0, 2500.0] {
            let p2 = psi2(r_d, 1000.0, &f, &m, &b).unwrap();
            assert!(p2 >= 0.0 && p2 <= p1 * (1.0 + 1e-12), "r_d={r_d}");
        }
        // Infinite relay power removes every second-hop failure.
        let hot_relays = LinkBudget::new(b.gamma_u, 1e30, b.xi, b.epsilon).unwrap();
        assert!(psi2(500.0, 1000.0, &f, &m, &hot_relays).unwrap() < 1.0);
        assert_relative_eq!(
            outage_rc_lower_bound(500.0, &f, &m, &hot_relays).unwrap(),
            (-f.lambda * f.area()).exp(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn fused_integral_equals_psi_difference() {
        let (m, b, f) = setup();
        for (r_d, h) in [(300.0, 800.0), (1000.0, 1500.0), (2000.0, 1000.0)] {
            let direct = decode_area_checked(r_d, h, &f, &m, &b).unwrap();
            let diff = psi1(h, &f, &m, &b).unwrap() - psi2(r_d, h, &f, &m, &b).unwrap();
            // The ψ difference loses ~1e-9 m² to cancellation; at r_d beyond
            // the disk both sides are numerically zero.
            assert_relative_eq!(direct, diff, max_relative = 1e-6, epsilon = 1e-6);
        }
    }

    #[test]
    fn log_outage_is_linear_in_density() {
        let (m, b, _) = setup();
        let lambdas = [1e-4, 3e-4, 9e-4];
        let lp: Vec<f64> = lambdas
            .iter()
            .map(|&l| {
                let f = RelayField::new(l, 1500.0).unwrap();
                outage_rc(800.0, 1200.0, &f, &m, &b).unwrap().ln()
            })
            .collect();
        let s01 = (lp[1] - lp[0]) / (lambdas[1] - lambdas[0]);
        let s02 = (lp[2] - lp[0]) / (lambdas[2] - lambdas[0]);
        assert_relative_eq!(s01, s02, max_relative = 1e-10);
    }

    #[test]
    fn empty_field_degeneracies() {
        let (m, b, _) = setup();
        let empty = RelayField::new(0.0, 1500.0).unwrap();
        assert_eq!(outage_rc(500.0, 1000.0, &empty, &m, &b).unwrap(), 1.0);
        let dc = outage_dc(Geometry::new(500.0, 1000.0).unwrap(), &m, &b).unwrap();
        assert_eq!(outage_cc(500.0, 1000.0, &empty, &m, &b).unwrap(), dc);
        assert_eq!(outage_rc_lower_bound(500.0, &empty, &m, &b).unwrap(), 1.0);
    }

    #[test]
    fn lower_bound_never_exceeds_exact() {
        let (m, b, f) = setup();
        for r_d in [300.0, 800.0, 1300.0] {
            let lb = outage_rc_lower_bound(r_d, &f, &m, &b).unwrap();
            for h in [700.0, 1400.0] {
                let exact = outage_rc(r_d, h, &f, &m, &b).unwrap();
                assert!(
                    lb <= exact * (1.0 + 1e-12),
                    "r_d={r_d} h={h}: {lb} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn psi2_grows_with_destination_distance() {
        let (m, b, f) = setup();
        let p: Vec<f64> = [200.0, 600.0, 1200.0, 2400.0]
            .iter()
            .map(|&r| psi2(r, 1000.0, &f, &m, &b).unwrap())
            .collect();
        for w in p.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-9), "{:?}", p);
        }
    }

    #[test]
    fn relaying_outage_plateaus_over_altitude() {
        let (m, b, f) = setup();
        let vals: Vec<f64> = [700.0, 1000.0, 1400.0, 2000.0]
            .iter()
            .map(|&h| outage_rc(1000.0, h, &f, &m, &b).unwrap())
            .collect();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(0.0, f64::max);
        assert!((max - min) / min < 0.1, "plateau variation {:?}", vals);
    }

    #[test]
    fn cooperative_never_loses() {
        let (m, b, f) = setup();
        for (r_d, h) in [(400.0, 900.0), (1200.0, 1500.0), (2500.0, 1000.0)] {
            let dc = outage_dc(Geometry::new(r_d, h).unwrap(), &m, &b).unwrap();
            let rc = outage_rc(r_d, h, &f, &m, &b).unwrap();
            let cc = outage_cc(r_d, h, &f, &m, &b).unwrap();
            assert!(cc <= dc.min(rc) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn coverage_fixed_point_closes() {
        let (m, b, _) = setup();
        for (strategy, h) in [(Strategy::Cc, 1443.5), (Strategy::Rc, 1000.0)] {
            let fp = coverage_radius(strategy, h, 3e-4, &m, &b).unwrap();
            assert!(fp.converged && !fp.oscillating, "{strategy:?}: {fp:?}");
            assert!(fp.radius > 0.0);
            let field = RelayField::new(3e-4, fp.radius).unwrap();
            let outage = match strategy {
                Strategy::Rc => outage_rc(fp.radius, h, &field, &m, &b).unwrap(),
                Strategy::Cc => outage_cc(fp.radius, h, &field, &m, &b).unwrap(),
                Strategy::Dc => unreachable!(),
            };
            assert_abs_diff_eq!(outage, b.epsilon, epsilon = 1e-6);
        }
    }

    #[test]
    fn coverage_degenerates_without_relays() {
        let (m, b, _) = setup();
        let cc = coverage_radius(Strategy::Cc, 1443.5, 0.0, &m, &b).unwrap();
        let dc = coverage_radius_dc(1443.5, &m, &b).unwrap();
        assert_abs_diff_eq!(cc.radius, dc, epsilon = 0.5);
        let rc = coverage_radius(Strategy::Rc, 1443.5, 0.0, &m, &b).unwrap();
        assert_eq!(rc.radius, 0.0);
        assert!(rc.converged);
    }

    #[test]
    fn cooperation_extends_coverage_and_density_helps() {
        let (m, b, _) = setup();
        for h in [1000.0, 1443.5, 2000.0] {
            let dc = coverage_radius_dc(h, &m, &b).unwrap();
            let cc = coverage_radius(Strategy::Cc, h, 3e-4, &m, &b).unwrap().radius;
            assert!(cc >= dc - 0.5, "h={h}: cc {cc} vs dc {dc}");
        }
        let sparse = coverage_radius(Strategy::Cc, 1443.5, 1e-4, &m, &b).unwrap().radius;
        let dense = coverage_radius(Strategy::Cc, 1443.5, 1e-3, &m, &b).unwrap().radius;
        let base = coverage_radius(Strategy::Cc, 1443.5, 3e-4, &m, &b).unwrap().radius;
        assert!(sparse <= base + 0.5 && base <= dense + 0.5);
    }

    #[test]
    fn relayed_power_share_favors_the_uav() {
        let (m, _, _) = setup();
        let opt = optimize_power_allocation(
            Strategy::Rc,
            1000.0,
            10f64.powf(7.5),
            1.0,
            0.12,
            3e-4,
            &m,
        )
        .unwrap();
        assert!(opt.unimodal);
        assert!(opt.rho > 0.5, "rho = {}", opt.rho);
        assert!(opt.coverage > 0.0);
    }

    #[test]
    fn joint_without_relays_reduces_to_direct_design() {
        let (m, b, _) = setup();
        let total = 10f64.powf(7.5);
        let joint = joint_optimum(Strategy::Cc, total, 1.0, 0.12, 0.0, &m).unwrap();
        // All power to the UAV (the relays get none to use).
        assert!(joint.rho > 0.99, "rho = {}", joint.rho);
        // Coverage can't beat the best direct-link radius over altitude.
        let mut best = 0.0f64;
        for i in 0..24 {
            let h = 300.0 * 1.2f64.powi(i);
            let full = LinkBudget::new(total, total, b.xi, b.epsilon).unwrap();
            best = best.max(coverage_radius_dc(h, &m, &full).unwrap());
        }
        assert!(joint.coverage <= best * 1.01);
        assert!(joint.coverage >= best * 0.97, "{} vs {}", joint.coverage, best);
    }

    #[test]
    fn constructors_validate() {
        assert!(RelayField::new(-1e-4, 1500.0).is_err());
        assert!(RelayField::new(1e-4, 0.0).is_err());
        assert!(PowerAllocation::new(0.0, 100.0).is_err());
        assert!(PowerAllocation::new(1.1, 100.0).is_err());
        assert!(PowerAllocation::new(0.5, 0.0).is_err());
        let full = PowerAllocation::new(1.0, 100.0).unwrap();
        assert!(full.budget(1.0, 0.1).is_err()); // relays would get γ_R = 0
        let half = PowerAllocation::new(0.5, 100.0).unwrap();
        assert_eq!(half.gamma_u(), 50.0);
        assert_eq!(half.gamma_r(), 50.0);
    }
}
