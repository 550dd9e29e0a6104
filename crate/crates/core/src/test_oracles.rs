//! Independent reference integrators used only by unit tests.

/// Adaptive Simpson with the Richardson correction (S₂ + (S₂ − S₁)/15).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// ∫ f(z) dz over [lo, hi] through w = sign(z)|z|^{1−γ}, which makes
/// |z|^{−γ}·smooth integrands smooth in w; split at the origin.
pub fn singular_line_integral<F: Fn(f64) -> f64>(f: &F, gamma: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let mu = 1.0 / (1.0 - gamma);
    let to_w = |z: f64| z.signum() * z.abs().powf(1.0 - gamma);
    let g = |w: f64| {
        let z = w.signum() * w.abs().powf(mu);
        if w == 0.0 {
            // limit of f(z)|z|^γ·μ for f ~ |z|^{−γ}
            let e = 1e-300f64;
            return f(e) * e.powf(gamma) * mu;
        }
        f(z) * mu * w.abs().powf(mu - 1.0)
    };
    let (wl, wh) = (to_w(lo), to_w(hi));
    if wl < 0.0 && wh > 0.0 {
        adaptive_simpson(&g, wl, 0.0, tol) + adaptive_simpson(&g, 0.0, wh, tol)
    } else {
        adaptive_simpson(&g, wl, wh, tol)
    }
}

/// Golden-section minimization on [a, b].
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
