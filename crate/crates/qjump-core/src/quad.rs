//! Adaptive quadrature for waiting-time moments and normalisation checks.

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_rec(f, a, b, fa, fb, fc, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let lm = 0.5 * (a + c);
    let rm = 0.5 * (c + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (c - a) / 6.0 * (fa + 4.0 * flm + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        simpson_rec(f, a, c, fa, fc, flm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, c, b, fc, fb, frm, right, 0.5 * tol, depth - 1)
    }
}

/// Integrate `f` over `[0, inf)` for an integrand with an exponentially
/// decaying envelope `|f(t)| <= amp * exp(-rate * t) * (1 + t)^2`. The
/// horizon is chosen so the discarded tail is below `tol`.
pub fn integrate_decaying_tail(f: &dyn Fn(f64) -> f64, amp: f64, rate: f64, tol: f64) -> f64 {
    assert!(rate > 0.0, "tail rate must be positive");
    // iterate T <- ln(amp (1+T)^2 / (rate tol)) / rate a few times
    let mut horizon = 1.0 / rate;
    for _ in 0..50 {
        let target = (amp * (1.0 + horizon).powi(2) / (rate * tol.max(1e-300))).max(1.0);
        let next = target.ln().max(1.0) / rate;
        if (next - horizon).abs() < 1e-9 * horizon {
            horizon = next;
            break;
        }
        horizon = next;
    }
    // split into a handful of panels so the adaptive rule localises well
    let panels = 8;
    let mut acc = 0.0;
    let mut lo = 0.0;
    for k in 1..=panels {
        let hi = horizon * k as f64 / panels as f64;
        acc += adaptive_simpson(f, lo, hi, tol / panels as f64);
        lo = hi;
    }
    acc
}
