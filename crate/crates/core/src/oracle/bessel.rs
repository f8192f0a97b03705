//! Bessel function of the first kind, order one.

use std::f64::consts::TAU;

/// Power series is used up to this argument.
pub const SERIES_LIMIT: f64 = 12.0;

/// `J1(x)` for real `x`.
///
/// Power series for `|x| <= 12`. Beyond that the periodic trapezoid rule on
/// `J1(x) = (1/2pi) int_0^{2pi} cos(t - x sin t) dt` is used; it converges
/// geometrically once the number of nodes exceeds `|x|` by a margin.
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { series(ax) } else { trapezoid(ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `2 J1(x) / x`, equal to 1 at `x = 0`.
pub fn jinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 8.0
    } else {
        2.0 * j1(x) / x
    }
}

fn series(x: f64) -> f64 {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut term = h;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -h2 / (k * (k + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > h {
            break;
        }
    }
    sum
}

fn trapezoid(x: f64) -> f64 {
    let m = x.ceil() as usize + 48;
    let step = TAU / m as f64;
    let s: f64 = (0..m)
        .map(|j| {
            let t = j as f64 * step;
            (t - x * t.sin()).cos()
        })
        .sum();
    s / m as f64
}
