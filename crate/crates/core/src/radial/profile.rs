use std::sync::Arc;

use crate::analytic::ProblemParams;
use crate::error::{Error, Result};
use crate::fiber::NormQuadruple;
use crate::scalar::{count, lit, Scalar};

use super::grid::RadialGrid;

/// Points per side of the Lagrange stencil used for resampling.
const STENCIL: isize = 3;
/// Relative mass allowed to leave the grid under dilation.
const ESCAPE_TOL: f64 = 1e-10;
/// Noise floor for sign counting, relative to `max |u|`.
const SIGN_FLOOR: f64 = 1e-9;
/// Largest RMS deviation of `log |u|` from the fitted line.
const FIT_NOISE: f64 = 0.25;

/// Radial function sampled on a grid.
#[derive(Debug, Clone)]
pub struct RadialProfile<T> {
    pub grid: Arc<RadialGrid<T>>,
    pub values: Vec<T>,
}

impl<T: Scalar> RadialProfile<T> {
    pub fn new(grid: Arc<RadialGrid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParams(format!(
                "profile has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("profile has non-finite values".into()));
        }
        Ok(RadialProfile { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid<T>>, f: impl Fn(T) -> T) -> Self {
        let values = grid.r.iter().map(|&r| f(r)).collect();
        RadialProfile { grid, values }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn mass_sq(&self) -> T {
        self.grid.inner(&self.values, &self.values)
    }

    pub fn scaled(&self, c: T) -> Self {
        RadialProfile {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// Rescales to `|u|_2 = a`.
    pub fn with_mass(&self, a: T) -> Self {
        self.scaled(a / self.mass_sq().sqrt())
    }

    /// `|u(r_last)| / max |u|`.
    pub fn truncation_ratio(&self) -> T {
        let m = self.max_abs();
        if m == T::zero() {
            return T::zero();
        }
        self.values.last().map_or(T::zero(), |v| v.abs() / m)
    }

    pub fn check_truncation(&self, tol: T) -> Result<()> {
        let ratio = self.truncation_ratio();
        if ratio > tol {
            return Err(Error::Truncation {
                ratio: ratio.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Discrete `(|Lu|^2, |grad u|^2, |u|_p^p, |u|^2)`.
    pub fn norm_quadruple(&self, p: T) -> Result<NormQuadruple<T>> {
        let g = &self.grid;
        let lu = g.lap(&self.values);
        let dd = g.inner(&lu, &lu);
        let gg = g.grad_sq(&self.values);
        let pp = g.integrate(
            &self
                .values
                .iter()
                .map(|v| v.abs().powf(p))
                .collect::<Vec<_>>(),
        );
        NormQuadruple::new(dd, gg, pp, self.mass_sq())
    }

    /// Norm quadruple, rejecting profiles that have not decayed to `1e-12 max |u|` at `rmax`.
    pub fn checked_quadruple(&self, p: T) -> Result<NormQuadruple<T>> {
        self.check_truncation(lit(1e-12))?;
        self.norm_quadruple(p)
    }

    /// Interpolated value at radius `x >= 0` using even reflection at the origin
    /// and zero beyond the ghost node.
    pub fn eval(&self, x: T) -> T {
        let g = &*self.grid;
        let n = g.len() as isize;
        let x = x.abs();
        if x >= g.node_radius(n) {
            return T::zero();
        }
        // Index of the last node at or below x (-1 if x < r_0).
        let j = g.r.partition_point(|&r| r <= x) as isize - 1;
        let val = |k: isize| -> T {
            if k < 0 {
                self.values[(-k - 1) as usize]
            } else if k < n {
                self.values[k as usize]
            } else {
                T::zero()
            }
        };
        let lo = j - STENCIL + 1;
        let hi = j + STENCIL;
        let xs: Vec<T> = (lo..=hi).map(|k| g.node_radius(k)).collect();
        let mut acc = T::zero();
        for (a, k) in (lo..=hi).enumerate() {
            let mut w = T::one();
            for (b, xb) in xs.iter().enumerate() {
                if a != b {
                    w *= (x - *xb) / (xs[a] - *xb);
                }
            }
            acc += w * val(k);
        }
        acc
    }

    /// Resamples onto another grid of the same dimension.
    pub fn resample(&self, grid: Arc<RadialGrid<T>>) -> Self {
        let values = grid.r.iter().map(|&r| self.eval(r)).collect();
        RadialProfile { grid, values }
    }

    /// Mass-preserving dilation `(s * u)(r) = e^{Ns/2} u(e^s r)` on the same grid.
    pub fn dilate(&self, s: T) -> Result<Self> {
        if s == T::zero() {
            return Ok(self.clone());
        }
        let g = &*self.grid;
        let es = s.exp();
        if s < T::zero() {
            let edge = es * *g.r.last().expect("nonempty grid");
            let mut out = T::zero();
            for ((r, w), v) in g.r.iter().zip(&g.weights).zip(&self.values) {
                if *r > edge {
                    out += *w * *v * *v;
                }
            }
            let escaped = out / self.mass_sq();
            if escaped > lit(ESCAPE_TOL) {
                return Err(Error::DomainOverflow {
                    s: s.to_f64().unwrap_or(f64::NAN),
                    escaped: escaped.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let amp = (count::<T>(g.dim) * s / lit(2.0)).exp();
        let values = g.r.iter().map(|&r| amp * self.eval(es * r)).collect();
        Ok(RadialProfile {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Strict sign alternations among values above `1e-9 max |u|`.
    pub fn sign_changes(&self) -> usize {
        let floor = self.max_abs() * lit(SIGN_FLOOR);
        let mut last = 0i8;
        let mut changes = 0;
        for v in &self.values {
            if v.abs() <= floor {
                continue;
            }
            let s = if *v > T::zero() { 1 } else { -1 };
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
        changes
    }

    /// `|Lu + (mu/2) u|^2 / |u|^2`.
    pub fn concentration(&self, mu: T) -> T {
        let g = &self.grid;
        let half = mu / lit(2.0);
        let lu = g.lap(&self.values);
        let w: Vec<T> = lu
            .iter()
            .zip(&self.values)
            .map(|(l, v)| *l + half * *v)
            .collect();
        g.inner(&w, &w) / self.mass_sq()
    }

    /// `|u|_q` for the normalized profile `u / |u|_2`.
    pub fn normalized_lq(&self, q: T) -> T {
        let m = self.mass_sq().sqrt();
        let f: Vec<T> = self.values.iter().map(|v| (v.abs() / m).powf(q)).collect();
        self.grid.integrate(&f).powf(T::one() / q)
    }

    /// Decay rate `-d log|u| / dr` fitted by least squares on `[r_lo, r_hi]`.
    ///
    /// Oscillating tails are fitted through the local maxima of `|u|`.
    pub fn decay_rate_fit(&self, r_lo: T, r_hi: T) -> Result<T> {
        let g = &self.grid;
        let idx: Vec<usize> = (0..g.len())
            .filter(|&i| g.r[i] >= r_lo && g.r[i] <= r_hi)
            .collect();
        let window: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&i| self.values[i] != T::zero())
            .collect();
        let signs_flip = window
            .windows(2)
            .any(|w| (self.values[w[0]] > T::zero()) != (self.values[w[1]] > T::zero()));
        let pts: Vec<usize> = if signs_flip {
            window
                .iter()
                .copied()
                .filter(|&i| {
                    i > 0 && i + 1 < g.len() && {
                        let a = self.values[i].abs();
                        a >= self.values[i - 1].abs() && a > self.values[i + 1].abs()
                    }
                })
                .collect()
        } else {
            window
        };
        let k = pts.len();
        if k < 3 {
            return Err(Error::WindowTooNoisy {
                residual: f64::INFINITY,
                points: k,
            });
        }
        let kk = count::<T>(k);
        let xs: Vec<T> = pts.iter().map(|&i| g.r[i]).collect();
        let ys: Vec<T> = pts.iter().map(|&i| self.values[i].abs().ln()).collect();
        let mx = xs.iter().fold(T::zero(), |a, b| a + *b) / kk;
        let my = ys.iter().fold(T::zero(), |a, b| a + *b) / kk;
        let mut sxx = T::zero();
        let mut sxy = T::zero();
        for (x, y) in xs.iter().zip(&ys) {
            sxx += (*x - mx) * (*x - mx);
            sxy += (*x - mx) * (*y - my);
        }
        let slope = sxy / sxx;
        let mut ss = T::zero();
        for (x, y) in xs.iter().zip(&ys) {
            let e = *y - my - slope * (*x - mx);
            ss += e * e;
        }
        let rms = (ss / kk).sqrt();
        if !(rms <= lit(FIT_NOISE)) {
            return Err(Error::WindowTooNoisy {
                residual: rms.to_f64().unwrap_or(f64::NAN),
                points: k,
            });
        }
        Ok(-slope)
    }
}

/// Gradient of `E` tangent to the mass sphere and the multiplier
/// `lambda = (dd - mu gg - pp) / |u|^2`.
pub fn constrained_gradient<T: Scalar>(
    u: &RadialProfile<T>,
    params: &ProblemParams<T>,
) -> Result<(RadialProfile<T>, T)> {
    let g = &u.grid;
    let q = u.norm_quadruple(params.p)?;
    let lambda = (q.dd - params.mu * q.gg - q.pp) / q.mm;
    let lu = g.lap(&u.values);
    let llu = g.lap(&lu);
    let pm2 = params.p - lit(2.0);
    let values = u
        .values
        .iter()
        .zip(lu.iter().zip(&llu))
        .map(|(&v, (&l1, &l2))| l2 + params.mu * l1 - v.abs().powf(pm2) * v - lambda * v)
        .collect();
    Ok((
        RadialProfile {
            grid: u.grid.clone(),
            values,
        },
        lambda,
    ))
}
