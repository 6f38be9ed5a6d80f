//! Independent numerical references for the acceptance suite.
//!
//! Deliberately redundant with the library: the Bessel evaluation and the
//! integrator are written from scratch here so the reference values never
//! flow through the code under test. The noncentral-χ² route additionally
//! goes through statrs' regularized gamma, a third implementation.

#![allow(dead_code)]

/// e^{-z}·I₀(z). All-positive power series up to z = 100 (no cancellation),
/// asymptotic expansion beyond, where its terms are < 1e-15 of the sum.
pub fn i0_scaled(z: f64) -> f64 {
    assert!(z >= 0.0 && z.is_finite(), "i0_scaled domain: got {z}");
    if z <= 100.0 {
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let q = z * z / 4.0;
        for k in 1..400 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum * (-z).exp()
    } else {
        // I₀(z) ~ e^z/√(2πz) · Σ ((2k-1)!!)² / (k!·(8z)^k)
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for k in 1u32..9 {
            let odd = (2 * k - 1) as f64;
            term *= odd * odd / (k as f64 * 8.0 * z);
            sum += term;
        }
        sum / (2.0 * std::f64::consts::PI * z).sqrt()
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Q₁(x, y) by direct quadrature of t·e^{-(t-x)²/2}·[e^{-xt}I₀(xt)] on
/// [y, max(x,y)+45]; the integrand is ≤ ~1 and decays like a Gaussian, so
/// the truncated tail is below 1e-300.
pub fn marcum_q_oracle(x: f64, y: f64) -> f64 {
    assert!(x >= 0.0 && y >= 0.0, "marcum_q_oracle domain: ({x}, {y})");
    if y == 0.0 {
        return 1.0;
    }
    let f = |t: f64| t * (-0.5 * (t - x) * (t - x)).exp() * i0_scaled(x * t);
    let hi = x.max(y) + 45.0;
    adaptive_simpson(&f, y, hi, 1e-13).clamp(0.0, 1.0)
}

/// CDF of the noncentral χ² with 2 degrees of freedom and noncentrality
/// `delta`, as the Poisson mixture of central χ²_{2(j+1)} terms.
pub fn ncx2_cdf_2dof(t: f64, delta: f64) -> f64 {
    assert!(t >= 0.0 && delta >= 0.0, "ncx2 domain: ({t}, {delta})");
    if t == 0.0 {
        return 0.0;
    }
    let half = 0.5 * delta;
    let mut weight = (-half).exp();
    let mut sum = 0.0f64;
    let mut j = 0u32;
    loop {
        sum += weight * statrs::function::gamma::gamma_lr((j + 1) as f64, 0.5 * t);
        // Past the Poisson mode the weights decay geometrically and the
        // gamma factor is ≤ 1, so stopping here truncates below ~1e-17.
        if j as f64 >= half && weight < 1e-18 {
            break;
        }
        j += 1;
        weight *= half / j as f64;
        assert!(j < 10_000, "ncx2 mixture failed to converge");
    }
    sum.clamp(0.0, 1.0)
}
