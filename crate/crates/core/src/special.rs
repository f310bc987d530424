//! Modified Bessel functions of orders 0 and 1 and a bracketing root finder.
//!
//! Below [`SERIES_LIMIT`] the functions are summed from their power series,
//! which has only positive terms and is therefore accurate to rounding. At and
//! above the limit the exponentially scaled large-argument expansion is used,
//! summed until its terms stop decreasing.

use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Argument at which evaluation switches from the power series to the
/// asymptotic expansion.
pub const SERIES_LIMIT: f64 = 15.0;

const MAX_TERMS: usize = 500;

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain {
            what: "Bessel argument",
            value: x,
        });
    }
    Ok(())
}

fn check_order(order: u32) -> Result<()> {
    if order > 1 {
        return Err(Error::Domain {
            what: "Bessel order",
            value: order as f64,
        });
    }
    Ok(())
}

/// Power series for `I_n(x)`, `n` in {0, 1}, without scaling.
pub fn series_i(order: u32, x: f64) -> f64 {
    let y = 0.25 * x * x;
    let (mut term, shift) = if order == 0 { (1.0, 0.0) } else { (0.5 * x, 1.0) };
    let mut sum = term;
    for k in 1..MAX_TERMS {
        let k = k as f64;
        term *= y / (k * (k + shift));
        sum += term;
        if term <= f64::EPSILON * 0.1 * sum {
            break;
        }
    }
    sum
}

/// Large-argument expansion of `e^{-x} I_n(x)`, `n` in {0, 1}.
///
/// The series is asymptotic: summation stops at the smallest term.
pub fn asymptotic_i_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = term * -(mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= f64::EPSILON * 0.1 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// `e^{-x} I_0(x)` for `x >= 0`, no domain check.
pub fn i0e(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        series_i(0, x) * (-x).exp()
    } else {
        asymptotic_i_scaled(0, x)
    }
}

/// `e^{-x} I_1(x)` for `x >= 0`, no domain check.
pub fn i1e(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        series_i(1, x) * (-x).exp()
    } else {
        asymptotic_i_scaled(1, x)
    }
}

/// Modified Bessel function of the first kind `I_n(x)` for `n` in {0, 1}.
///
/// Overflows to infinity beyond `x ~ 713`; use [`bessel_i_scaled`] there.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    check_arg(x)?;
    if x < SERIES_LIMIT {
        Ok(series_i(order, x))
    } else {
        Ok(asymptotic_i_scaled(order, x) * x.exp())
    }
}

/// Exponentially scaled `e^{-x} I_n(x)` for `n` in {0, 1}. Finite for every
/// finite non-negative `x`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    check_arg(x)?;
    Ok(if order == 0 { i0e(x) } else { i1e(x) })
}

/// `ln[x^2 (I_0(x)^2 - I_1(x)^2)]`, evaluated without overflow for any `x > 0`.
pub fn ln_x2_i0sq_minus_i1sq(x: f64) -> f64 {
    let (a, b) = (i0e(x), i1e(x));
    2.0 * x.ln() + 2.0 * x + ((a - b) * (a + b)).ln()
}

/// Default iteration cap for [`find_root`].
pub const ROOT_MAX_ITER: usize = 200;

/// Finds a root of a continuous `f` inside `[lo, hi]`.
///
/// Bisection safeguarded secant: a secant step is taken when it lands inside
/// the bracket and the previous step at least halved the bracket, otherwise
/// the midpoint is used. Returns once `|f(x)| <= tol` or the bracket width
/// drops below `tol * max(1, |x|)`.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange {
            lo: a,
            f_lo: fa,
            hi: b,
            f_hi: fb,
        });
    }

    let mut secant_ok = true;
    for _ in 0..ROOT_MAX_ITER {
        let width = b - a;
        let mut x = 0.5 * (a + b);
        if secant_ok {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                x = s;
            }
        }
        let fx = f(x);
        let best = if fx.abs() < fa.abs().min(fb.abs()) {
            x
        } else if fa.abs() < fb.abs() {
            a
        } else {
            b
        };
        if fx.abs() <= tol || fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        secant_ok = b - a <= 0.5 * width;
        if b - a <= tol * best.abs().max(1.0) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Err(Error::NoConvergence {
        what: "root finder",
        iterations: ROOT_MAX_ITER,
    })
}

/// Like [`find_root`], but first doubles `hi` (up to `max_doublings` times)
/// until the bracket contains a sign change. `lo` must be positive.
pub fn find_root_expanding<F>(mut f: F, lo: f64, mut hi: f64, tol: f64, max_doublings: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    let mut f_hi = f(hi);
    let mut n = 0;
    while f_lo.signum() == f_hi.signum() {
        if n == max_doublings {
            return Err(Error::NoSignChange { lo, f_lo, hi, f_hi });
        }
        hi *= 2.0;
        f_hi = f(hi);
        n += 1;
    }
    find_root(f, lo, hi, tol)
}
