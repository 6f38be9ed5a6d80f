//! Scalar root finding, golden-section search, and the quadrature rules the
//! rest of the crate is built on.
//!
//! Everything here works on plain `Fn(f64) -> f64` closures; callers validate
//! their own domains first so the inner loops stay infallible.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Bracketing bisection followed by a short secant polish.
///
/// `f(lo)` and `f(hi)` must have opposite signs. Returns the abscissa where
/// `|f|` dropped below `residual_tol`, or the bracket midpoint once the
/// bracket is tighter than a few ulps.
pub fn bisect_secant(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    residual_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Convergence(format!(
            "non-finite objective at bracket endpoint ({a:.6e} -> {fa}, {b:.6e} -> {fb})"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Convergence(format!(
            "no sign change on [{a:.6e}, {b:.6e}] (f: {fa:.3e} .. {fb:.3e})"
        )));
    }
    let mut mid = 0.5 * (a + b);
    for _ in 0..max_iter {
        mid = 0.5 * (a + b);
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(Error::Convergence(format!(
                "non-finite objective at {mid:.6e} during bisection"
            )));
        }
        if fm.abs() <= residual_tol || (b - a).abs() <= f64::EPSILON * (a.abs() + b.abs() + 1.0) {
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    // Secant refinement inside the final bracket; bisection result is kept
    // whenever the secant step misbehaves.
    let (mut x0, mut x1) = (a, b);
    let (mut f0, mut f1) = (fa, fb);
    for _ in 0..12 {
        if (f1 - f0).abs() < f64::MIN_POSITIVE {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !x2.is_finite() || x2 < a || x2 > b {
            break;
        }
        let f2 = f(x2);
        if !f2.is_finite() {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if f1.abs() <= residual_tol {
            return Ok(x1);
        }
    }
    if f1.abs() < f(mid).abs() {
        Ok(x1)
    } else {
        Ok(mid)
    }
}

/// Scan `[lo, hi]` with `n` equal steps and return the first subinterval on
/// which `f` changes sign.
pub fn find_sign_change(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Option<(f64, f64)> {
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=n {
        let b = lo + (hi - lo) * i as f64 / n as f64;
        let fb = f(b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            return Some((a, b));
        }
        a = b;
        fa = fb;
    }
    None
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
///
/// Returns `(argmax, max)` once the interval is narrower than `tol_x`.
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol_x: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5)-1)/2
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol_x {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence; accurate to
    /// machine precision for the orders used here (< 1000).
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi-style initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 1..n {
                    let p2 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p0) / (j + 1) as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        half * sum
    }
}

/// Shared cache of Gauss-Legendre rules; the crate only ever asks for a
/// handful of orders, so leaking them is fine.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
}

/// Adaptive Simpson quadrature with interval-local error control.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::Quadrature(format!(
                "adaptive Simpson hit depth limit on [{a:.6e}, {b:.6e}]"
            )));
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 52)
}
