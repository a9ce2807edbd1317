use std::f64::consts::PI;

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Size and grading of a radial grid.
///
/// Nodes sit at `r = phi(xi)` for the cell centres `xi` of a uniform grid.
/// The slope `phi'` is `fine_ratio` on `r <= refine_radius` and rises
/// smoothly (a tanh ramp) to 1 further out, so the spacing near the origin
/// is `fine_ratio` times the tail spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nodes: usize,
    pub rmax: f64,
    pub fine_ratio: f64,
    pub refine_radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nodes: 4096,
            rmax: 40.0,
            fine_ratio: 0.2,
            refine_radius: 4.0,
        }
    }
}

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Antiderivative of the logistic ramp `(1 + tanh x) / 2`.
fn ramp_integral(x: f64) -> f64 {
    0.5 * (x + ln_cosh(x))
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::InvalidParams(format!(
                "grid needs >= 16 nodes, got {}",
                self.nodes
            )));
        }
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rmax)
            || !ok(self.refine_radius)
            || !ok(self.fine_ratio)
            || self.fine_ratio > 1.0
        {
            return Err(Error::InvalidParams(format!(
                "grid needs rmax > 0, refine_radius > 0 and 0 < fine_ratio <= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Same grading with `factor` times as many nodes.
    pub fn refined(&self, factor: usize) -> Self {
        GridSpec {
            nodes: self.nodes * factor,
            ..*self
        }
    }

    /// Stable text key identifying the discretization.
    pub fn signature(&self) -> String {
        format!(
            "n{}_r{:.16e}_f{:.16e}_c{:.16e}",
            self.nodes, self.rmax, self.fine_ratio, self.refine_radius
        )
    }

    /// Ramp centre and width in the computational coordinate; the ramp is
    /// still below 0.3% of its height at `refine_radius`.
    fn ramp(&self) -> (f64, f64) {
        let centre = 1.6 * self.refine_radius / self.fine_ratio;
        (centre, centre / 8.0)
    }

    /// The grading map, odd in `xi`.
    pub fn map(&self, xi: f64) -> f64 {
        let f = self.fine_ratio;
        if f == 1.0 {
            return xi;
        }
        let (c, w) = self.ramp();
        let x0 = -c / w;
        let up = ramp_integral((xi - c) / w) - ramp_integral(x0);
        let down = ramp_integral((-xi - c) / w) - ramp_integral(x0);
        f * xi + (1.0 - f) * w * (up - down)
    }

    pub fn map_slope(&self, xi: f64) -> f64 {
        let f = self.fine_ratio;
        if f == 1.0 {
            return 1.0;
        }
        let (c, w) = self.ramp();
        let s = |x: f64| 0.5 * (1.0 + x.tanh());
        f + (1.0 - f) * (s((xi - c) / w) + s((-xi - c) / w))
    }

    /// Extent of the computational coordinate, `phi(X) = rmax`.
    fn extent(&self) -> f64 {
        let mut lo = 0.0;
        let mut hi = self.rmax / self.fine_ratio;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.map(mid) < self.rmax {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Area of the unit sphere in `R^N`, `2 pi^{N/2} / Gamma(N/2)`.
pub fn sphere_area(n: usize) -> f64 {
    // Gamma at half-integers from Gamma(1) = 1 and Gamma(1/2) = sqrt(pi).
    let mut gamma = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x + 0.5 < 0.5 * n as f64 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(0.5 * n as f64) / gamma
}

/// Cell-centred radial grid with `N`-dimensional quadrature weights.
///
/// The Laplacian is the flux-form operator
/// `(L u)_i = (A_i (u_{i+1} - u_i) - A_{i-1} (u_i - u_{i-1})) / w_i`
/// with face coefficients `A_i = 2N sum_{j<=i} w_j / (r_{i+1}^2 - r_i^2)`,
/// which makes it exact on `1` and `r^2` and self-adjoint for the
/// weighted inner product. A ghost node beyond `rmax` carries the
/// homogeneous Dirichlet condition.
#[derive(Debug, Clone)]
pub struct RadialGrid<T> {
    pub dim: usize,
    pub spec: GridSpec,
    pub r: Vec<T>,
    pub weights: Vec<T>,
    face: Vec<T>,
    step: f64,
}

impl<T: Scalar> RadialGrid<T> {
    pub fn new(dim: usize, spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        if dim < 2 {
            return Err(Error::InvalidParams(format!(
                "dimension N = {dim} must be >= 2"
            )));
        }
        let n = spec.nodes;
        let step = spec.extent() / n as f64;
        let omega = sphere_area(dim);
        let mut r = Vec::with_capacity(n + 1);
        let mut w = Vec::with_capacity(n);
        for i in 0..=n {
            let xi = (i as f64 + 0.5) * step;
            let ri = spec.map(xi);
            r.push(ri);
            if i < n {
                w.push(omega * ri.powi(dim as i32 - 1) * spec.map_slope(xi) * step);
            }
        }
        let mut face = Vec::with_capacity(n);
        let mut cum = 0.0;
        for i in 0..n {
            cum += w[i];
            face.push(2.0 * dim as f64 * cum / (r[i + 1] * r[i + 1] - r[i] * r[i]));
        }
        r.pop();
        Ok(RadialGrid {
            dim,
            spec,
            r: r.into_iter().map(lit).collect(),
            weights: w.into_iter().map(lit).collect(),
            face: face.into_iter().map(lit).collect(),
            step,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Radius of virtual node `k`; negative indices mirror through the origin.
    pub fn node_radius(&self, k: isize) -> T {
        lit(self.spec.map((k as f64 + 0.5) * self.step))
    }

    /// Weighted inner product `sum w_i u_i v_i`.
    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        let mut acc = T::zero();
        for ((w, a), b) in self.weights.iter().zip(u).zip(v) {
            acc += *w * *a * *b;
        }
        acc
    }

    pub fn integrate(&self, f: &[T]) -> T {
        let mut acc = T::zero();
        for (w, v) in self.weights.iter().zip(f) {
            acc += *w * *v;
        }
        acc
    }

    pub fn lap(&self, u: &[T]) -> Vec<T> {
        let n = self.len();
        let mut out = vec![T::zero(); n];
        let mut left = T::zero();
        for i in 0..n {
            let next = if i + 1 < n { u[i + 1] } else { T::zero() };
            let flux = self.face[i] * (next - u[i]);
            out[i] = (flux - left) / self.weights[i];
            left = flux;
        }
        out
    }

    pub fn bilap(&self, u: &[T]) -> Vec<T> {
        self.lap(&self.lap(u))
    }

    /// `|grad u|^2` as the sum of face fluxes, equal to `-<L u, u>`.
    pub fn grad_sq(&self, u: &[T]) -> T {
        let n = self.len();
        let mut acc = T::zero();
        for i in 0..n {
            let next = if i + 1 < n { u[i + 1] } else { T::zero() };
            let d = next - u[i];
            acc += self.face[i] * d * d;
        }
        acc
    }

    /// Tridiagonal coefficients `(sub, diag, sup)` of `L`, row by row.
    fn lap_row(&self, i: usize) -> (T, T, T) {
        let w = self.weights[i];
        let left = if i > 0 { self.face[i - 1] } else { T::zero() };
        let right = self.face[i];
        (left / w, -(left + right) / w, right / w)
    }

    /// Band matrix `c4 L^2 + c2 L + diag(d)`.
    pub fn operator_band(&self, c4: T, c2: T, d: &[T]) -> BandMatrix<T> {
        let n = self.len();
        let mut m = BandMatrix::zeros(n, 2, 2);
        let rows: Vec<(T, T, T)> = (0..n).map(|i| self.lap_row(i)).collect();
        for i in 0..n {
            let (a, b, c) = rows[i];
            m.add(i, i, d[i] + c2 * b);
            if i > 0 {
                m.add(i, i - 1, c2 * a);
            }
            if i + 1 < n {
                m.add(i, i + 1, c2 * c);
            }
            if c4 == T::zero() {
                continue;
            }
            // Row i of L^2 is sum_k L_ik L_k.
            let mut push = |k: usize, coef: T| {
                let (ka, kb, kc) = rows[k];
                if k > 0 {
                    m.add(i, k - 1, c4 * coef * ka);
                }
                m.add(i, k, c4 * coef * kb);
                if k + 1 < n {
                    m.add(i, k + 1, c4 * coef * kc);
                }
            };
            if i > 0 {
                push(i - 1, a);
            }
            push(i, b);
            if i + 1 < n {
                push(i + 1, c);
            }
        }
        m
    }
}
