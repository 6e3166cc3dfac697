//! Parameter grids, finite-difference stencils and the discrete Legendre map.

use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector, Matrix6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{align_sign, inner, LiePoint, LieVec, Vec3};
use crate::subspace::Subspace;

/// Formal accuracy of the difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StencilOrder {
    #[default]
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn accuracy(self) -> usize {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }
}

/// A uniformly sampled parameter line `start + i h`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub n: usize,
    pub start: f64,
    pub h: f64,
    pub periodic: bool,
}

impl Axis {
    /// `n` samples covering `[a, b]` with both endpoints.
    pub fn closed(a: f64, b: f64, n: usize) -> Self {
        Axis {
            n,
            start: a,
            h: (b - a) / (n.max(2) - 1) as f64,
            periodic: false,
        }
    }

    /// `n` samples of a period `[a, a + period)`.
    pub fn periodic(a: f64, period: f64, n: usize) -> Self {
        Axis {
            n,
            start: a,
            h: period / n as f64,
            periodic: true,
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start + self.h * i as f64
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Wraps a signed index for periodic axes; `None` when out of range otherwise.
    pub fn wrap(&self, i: isize) -> Option<usize> {
        let n = self.n as isize;
        if self.periodic {
            Some(i.rem_euclid(n) as usize)
        } else if (0..n).contains(&i) {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Weights `w` with `sum w_k f(x0 + o_k h) = h^deriv f^(deriv)(x0) + O(h^len)`.
pub fn fd_weights(offsets: &[f64], deriv: usize) -> Vec<f64> {
    let m = offsets.len();
    let mut a = DMatrix::zeros(m, m);
    let mut fact = 1.0;
    for p in 0..m {
        if p > 0 {
            fact *= p as f64;
        }
        for (k, &o) in offsets.iter().enumerate() {
            a[(p, k)] = o.powi(p as i32) / fact;
        }
    }
    let mut rhs = DVector::zeros(m);
    rhs[deriv] = 1.0;
    let w = a.lu().solve(&rhs).expect("distinct stencil offsets");
    w.iter().copied().collect()
}

type Weights = Vec<(usize, f64)>;

/// Precomputed first and second derivative stencils along one axis.
#[derive(Debug, Clone)]
pub struct Stencil {
    first: Vec<Weights>,
    second: Vec<Weights>,
}

impl Stencil {
    pub fn new(axis: &Axis, order: StencilOrder) -> Result<Self> {
        let p = order.accuracy();
        let need = p + 2;
        if axis.n < need {
            return Err(Error::Shape(format!(
                "axis with {} samples is too short for order-{} stencils (need {})",
                axis.n, p, need
            )));
        }
        let build = |deriv: usize| -> Vec<Weights> {
            (0..axis.n)
                .map(|i| {
                    let half = (p / 2) as isize;
                    let central = p + 1;
                    let window: Vec<isize> = if axis.periodic {
                        (-half..=half).collect()
                    } else {
                        let i = i as isize;
                        let n = axis.n as isize;
                        if i - half >= 0 && i + half < n {
                            (-half..=half).collect()
                        } else {
                            let width = if deriv == 1 { central } else { p + deriv } as isize;
                            let lo = (i - half).clamp(0, n - width);
                            (lo - i..lo - i + width).collect()
                        }
                    };
                    let offs: Vec<f64> = window.iter().map(|&o| o as f64).collect();
                    let w = fd_weights(&offs, deriv);
                    let scale = axis.h.powi(deriv as i32);
                    window
                        .iter()
                        .zip(w)
                        .filter(|(_, w)| *w != 0.0)
                        .map(|(&o, w)| {
                            (
                                axis.wrap(i as isize + o).expect("stencil inside axis"),
                                w / scale,
                            )
                        })
                        .collect()
                })
                .collect()
        };
        Ok(Stencil {
            first: build(1),
            second: build(2),
        })
    }

    pub fn first(&self, i: usize) -> &[(usize, f64)] {
        &self.first[i]
    }

    pub fn second(&self, i: usize) -> &[(usize, f64)] {
        &self.second[i]
    }
}

/// Quantities that stencils can be applied to.
pub trait GridValue: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl GridValue for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl GridValue for LieVec {
    fn zero() -> Self {
        LieVec::zeros()
    }
}

impl GridValue for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
}

impl GridValue for Matrix6<f64> {
    fn zero() -> Self {
        Matrix6::zeros()
    }
}

pub fn apply<T: GridValue>(w: &[(usize, f64)], f: impl Fn(usize) -> T) -> T {
    w.iter().fold(T::zero(), |acc, &(k, c)| acc + f(k) * c)
}

/// Tangent direction in `(u, theta)` coordinates.
pub type Dir = [f64; 2];

/// The two-parameter grid with its stencils.
#[derive(Debug, Clone)]
pub struct ParamGrid {
    pub u: Axis,
    pub theta: Axis,
    pub order: StencilOrder,
    su: Stencil,
    st: Stencil,
}

impl ParamGrid {
    pub fn new(u: Axis, theta: Axis, order: StencilOrder) -> Result<Self> {
        Ok(ParamGrid {
            su: Stencil::new(&u, order)?,
            st: Stencil::new(&theta, order)?,
            u,
            theta,
            order,
        })
    }

    pub fn n_u(&self) -> usize {
        self.u.n
    }

    pub fn n_theta(&self) -> usize {
        self.theta.n
    }

    pub fn len(&self) -> usize {
        self.u.n * self.theta.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.theta.n + j
    }

    /// Largest step, the `h` in truncation-error estimates.
    pub fn h_max(&self) -> f64 {
        self.u.h.max(self.theta.h)
    }

    pub fn with_order(&self, order: StencilOrder) -> Result<Self> {
        ParamGrid::new(self.u, self.theta, order)
    }

    pub fn d_u<T: GridValue>(&self, i: usize, j: usize, f: impl Fn(usize, usize) -> T) -> T {
        apply(self.su.first(i), |a| f(a, j))
    }

    pub fn d_theta<T: GridValue>(&self, i: usize, j: usize, f: impl Fn(usize, usize) -> T) -> T {
        apply(self.st.first(j), |b| f(i, b))
    }

    pub fn d_uu<T: GridValue>(&self, i: usize, j: usize, f: impl Fn(usize, usize) -> T) -> T {
        apply(self.su.second(i), |a| f(a, j))
    }

    pub fn d_tt<T: GridValue>(&self, i: usize, j: usize, f: impl Fn(usize, usize) -> T) -> T {
        apply(self.st.second(j), |b| f(i, b))
    }

    pub fn d_ut<T: GridValue>(&self, i: usize, j: usize, f: impl Fn(usize, usize) -> T) -> T {
        apply(self.su.first(i), |a| apply(self.st.first(j), |b| f(a, b)))
    }

    /// Directional derivative `x_u d_u + x_t d_t`.
    pub fn d_dir<T: GridValue>(
        &self,
        i: usize,
        j: usize,
        x: Dir,
        f: impl Fn(usize, usize) -> T,
    ) -> T {
        self.d_u(i, j, &f) * x[0] + self.d_theta(i, j, &f) * x[1]
    }

    /// Second derivative along the constant-coefficient field `x`.
    pub fn d_dir2<T: GridValue>(
        &self,
        i: usize,
        j: usize,
        x: Dir,
        f: impl Fn(usize, usize) -> T,
    ) -> T {
        self.d_uu(i, j, &f) * (x[0] * x[0])
            + self.d_ut(i, j, &f) * (2.0 * x[0] * x[1])
            + self.d_tt(i, j, &f) * (x[1] * x[1])
    }

    /// Derivatives of a projective field: stencil values are normalised and
    /// sign-aligned with the value at `(i, j)` before differencing.
    pub fn d_dir_projective(
        &self,
        i: usize,
        j: usize,
        x: Dir,
        f: impl Fn(usize, usize) -> LieVec,
    ) -> LieVec {
        let c = unit(f(i, j));
        self.d_dir(i, j, x, |a, b| align_sign(unit(f(a, b)), &c))
    }

    pub fn d_dir2_projective(
        &self,
        i: usize,
        j: usize,
        x: Dir,
        f: impl Fn(usize, usize) -> LieVec,
    ) -> LieVec {
        let c = unit(f(i, j));
        self.d_dir2(i, j, x, |a, b| align_sign(unit(f(a, b)), &c))
    }
}

pub(crate) fn unit(v: LieVec) -> LieVec {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// An adapted frame of a contact element: two orthogonal null vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub sigma: LieVec,
    pub tau: LieVec,
}

impl Frame {
    /// Frame with both vectors rescaled to Euclidean length one.
    pub fn normalized(sigma: LieVec, tau: LieVec) -> Self {
        Frame {
            sigma: unit(sigma),
            tau: unit(tau),
        }
    }

    pub fn isotropy(&self) -> f64 {
        inner(&self.sigma, &self.sigma)
            .abs()
            .max(inner(&self.tau, &self.tau).abs())
            .max(inner(&self.sigma, &self.tau).abs())
    }

    pub fn element(&self) -> Result<Subspace> {
        Subspace::span(&[self.sigma, self.tau])
    }

    pub fn transformed(&self, m: &Matrix6<f64>) -> Self {
        Frame::normalized(m * self.sigma, m * self.tau)
    }
}

/// A discrete Legendre map: one contact element per grid point, row-major in `(u, theta)`.
#[derive(Debug, Clone)]
pub struct LegendreGrid {
    pub grid: ParamGrid,
    frames: Vec<Frame>,
}

impl LegendreGrid {
    /// Wraps frames (Euclidean-normalised on the way in).
    pub fn new(grid: ParamGrid, frames: Vec<Frame>) -> Result<Self> {
        if frames.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} frames for a {}x{} grid",
                frames.len(),
                grid.n_u(),
                grid.n_theta()
            )));
        }
        let frames = frames
            .into_iter()
            .map(|f| Frame::normalized(f.sigma, f.tau))
            .collect();
        Ok(LegendreGrid { grid, frames })
    }

    pub fn n_u(&self) -> usize {
        self.grid.n_u()
    }

    pub fn n_theta(&self) -> usize {
        self.grid.n_theta()
    }

    pub fn frame(&self, i: usize, j: usize) -> &Frame {
        &self.frames[self.grid.idx(i, j)]
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn sigma(&self, i: usize, j: usize) -> LieVec {
        self.frame(i, j).sigma
    }

    pub fn tau(&self, i: usize, j: usize) -> LieVec {
        self.frame(i, j).tau
    }

    pub fn element(&self, i: usize, j: usize) -> Result<Subspace> {
        self.frame(i, j).element()
    }

    /// Applies a constant linear map to every frame vector.
    pub fn transformed(&self, m: &Matrix6<f64>) -> Self {
        LegendreGrid {
            grid: self.grid.clone(),
            frames: self.frames.iter().map(|f| f.transformed(m)).collect(),
        }
    }

    /// Same elements, different stencils.
    pub fn with_order(&self, order: StencilOrder) -> Result<Self> {
        Ok(LegendreGrid {
            grid: self.grid.with_order(order)?,
            frames: self.frames.clone(),
        })
    }

    pub fn isotropy(&self) -> f64 {
        self.frames.iter().map(Frame::isotropy).fold(0.0, f64::max)
    }

    /// The line of the element orthogonal to `v`: `(tau,v) sigma - (sigma,v) tau`.
    pub fn line_orthogonal_to(&self, i: usize, j: usize, v: &LieVec) -> LieVec {
        let f = self.frame(i, j);
        f.sigma * inner(&f.tau, v) - f.tau * inner(&f.sigma, v)
    }
}

/// Grid point label used in error messages.
pub(crate) fn at(i: usize, j: usize) -> String {
    format!("grid point ({i}, {j})")
}

/// Lifted element of a [`LegendreGrid`] as projective points.
pub fn element_points(g: &LegendreGrid, i: usize, j: usize) -> (LiePoint, LiePoint) {
    let f = g.frame(i, j);
    (LiePoint::from_null(f.sigma), LiePoint::from_null(f.tau))
}
