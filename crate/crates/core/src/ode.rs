//! Fixed-step classical Runge-Kutta for linear flows on R^{4,2}.

use std::ops::{Add, Mul};

/// Values that RK4 can combine: vectors, matrices, scalars.
pub trait OdeState: Copy + Add<Output = Self> + Mul<f64, Output = Self> {}

impl<T> OdeState for T where T: Copy + Add<Output = T> + Mul<f64, Output = T> {}

/// One classical RK4 step of `y' = f(u, y)` from `u` to `u + h`.
pub fn rk4_step<Y, F>(f: &F, u: f64, y: Y, h: f64) -> Y
where
    Y: OdeState,
    F: Fn(f64, &Y) -> Y,
{
    let k1 = f(u, &y);
    let k2 = f(u + 0.5 * h, &(y + k1 * (0.5 * h)));
    let k3 = f(u + 0.5 * h, &(y + k2 * (0.5 * h)));
    let k4 = f(u + h, &(y + k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrates `n - 1` steps of size `h` from `(u0, y0)`; returns all `n` states.
pub fn rk4_trajectory<Y, F>(f: F, u0: f64, y0: Y, h: f64, n: usize) -> Vec<Y>
where
    Y: OdeState,
    F: Fn(f64, &Y) -> Y,
{
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let mut y = y0;
    out.push(y);
    for k in 1..n {
        y = rk4_step(&f, u0 + (k - 1) as f64 * h, y, h);
        out.push(y);
    }
    out
}
