//! Newton iteration for critical points of a functional under one or two
//! equality constraints, all of the [`Functional`] form.

use crate::error::{Error, Result};
use crate::fiber::NormQuadruple;
use crate::radial::RadialProfile;
use crate::scalar::{lit, Scalar};

use super::functional::{Functional, Workspace};

/// Critical-point problem `grad f = sum_k lambda_k grad c_k`, `c_k = target_k`.
#[derive(Debug, Clone)]
pub struct Lagrange<T> {
    pub objective: Functional<T>,
    pub constraints: Vec<(Functional<T>, T)>,
    pub p: T,
}

/// Residual sizes at one iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<T> {
    /// Preconditioned norm of the Lagrangian gradient over `|u|_2`.
    pub grad: T,
    /// Largest relative constraint violation.
    pub constraint: T,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome<T> {
    pub values: Vec<T>,
    pub multipliers: Vec<T>,
    pub residual: Residual<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Gaussian elimination with partial pivoting for the tiny multiplier systems.
fn solve_small<T: Scalar>(mut m: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let k = b.len();
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&i, &j| {
                m[i][c]
                    .abs()
                    .partial_cmp(&m[j][c].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(c);
        if !(m[piv][c].abs() > T::zero()) {
            return Err(Error::Singular(c));
        }
        m.swap(c, piv);
        b.swap(c, piv);
        for i in c + 1..k {
            let l = m[i][c] / m[c][c];
            for j in c..k {
                let v = m[c][j];
                m[i][j] -= l * v;
            }
            let v = b[c];
            b[i] -= l * v;
        }
    }
    let mut x = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut acc = b[i];
        for j in i + 1..k {
            acc -= m[i][j] * x[j];
        }
        x[i] = acc / m[i][i];
    }
    Ok(x)
}

impl<T: Scalar> Lagrange<T> {
    fn quadruple(&self, ws: &Workspace<T>, u: &[T]) -> Result<NormQuadruple<T>> {
        RadialProfile::new(ws.grid.clone(), u.to_vec())?.norm_quadruple(self.p)
    }

    fn lagrangian(&self, mult: &[T]) -> Functional<T> {
        self.constraints
            .iter()
            .zip(mult)
            .fold(self.objective, |acc, ((c, _), l)| acc.plus(-*l, c))
    }

    /// Multipliers minimizing the preconditioned norm of the Lagrangian gradient.
    pub fn least_squares_multipliers(&self, ws: &Workspace<T>, u: &[T]) -> Result<Vec<T>> {
        let g = &ws.grid;
        let gf = self.objective.gradient(g, u, self.p);
        let gc: Vec<Vec<T>> = self
            .constraints
            .iter()
            .map(|(c, _)| c.gradient(g, u, self.p))
            .collect();
        let zc: Vec<Vec<T>> = gc.iter().map(|v| ws.precondition(v)).collect();
        let m: Vec<Vec<T>> = gc
            .iter()
            .map(|a| zc.iter().map(|z| g.inner(a, z)).collect())
            .collect();
        let b: Vec<T> = zc.iter().map(|z| g.inner(&gf, z)).collect();
        solve_small(m, b)
    }

    pub fn residual(&self, ws: &Workspace<T>, u: &[T], mult: &[T]) -> Result<Residual<T>> {
        let g = &ws.grid;
        let f = self.lagrangian(mult).gradient(g, u, self.p);
        let norm = g.inner(u, u).sqrt();
        let q = self.quadruple(ws, u)?;
        let constraint = self
            .constraints
            .iter()
            .map(|(c, t)| (c.value(&q) - *t).abs() / (c.magnitude(&q) + t.abs()))
            .fold(T::zero(), |a, b| a.max(b));
        Ok(Residual {
            grad: ws.pre_norm(&f) / norm,
            constraint,
        })
    }

    /// Damped Newton from `u0`; multipliers start from least squares when not given.
    pub fn solve(
        &self,
        ws: &Workspace<T>,
        u0: &[T],
        mult0: Option<Vec<T>>,
        tol_grad: T,
        tol_constraint: T,
        max_iter: usize,
    ) -> Result<NewtonOutcome<T>> {
        let g = &ws.grid;
        let mut u = u0.to_vec();
        let mut mult = match mult0 {
            Some(m) => m,
            None => self.least_squares_multipliers(ws, &u)?,
        };
        let mut res = self.residual(ws, &u, &mult)?;
        let merit =
            |r: &Residual<T>| r.grad / tol_grad.max(lit(1e-300)) + r.constraint / tol_constraint;
        for it in 0..max_iter {
            if res.grad <= tol_grad && res.constraint <= tol_constraint {
                return Ok(NewtonOutcome {
                    values: u,
                    multipliers: mult,
                    residual: res,
                    iterations: it,
                    converged: true,
                });
            }
            let lag = self.lagrangian(&mult);
            let f = lag.gradient(g, &u, self.p);
            let lu = lag.hessian(g, &u, self.p).factor()?;
            let q = self.quadruple(ws, &u)?;
            let y = lu.solve(&f);
            let gc: Vec<Vec<T>> = self
                .constraints
                .iter()
                .map(|(c, _)| c.gradient(g, &u, self.p))
                .collect();
            let z: Vec<Vec<T>> = gc.iter().map(|v| lu.solve(v)).collect();
            let m: Vec<Vec<T>> = gc
                .iter()
                .map(|a| z.iter().map(|zk| g.inner(a, zk)).collect())
                .collect();
            let rhs: Vec<T> = gc
                .iter()
                .zip(&self.constraints)
                .map(|(a, (c, t))| g.inner(a, &y) - (c.value(&q) - *t))
                .collect();
            let dl = solve_small(m, rhs)?;
            let mut du: Vec<T> = y.iter().map(|v| -*v).collect();
            for (zk, d) in z.iter().zip(&dl) {
                for (x, zi) in du.iter_mut().zip(zk) {
                    *x += *d * *zi;
                }
            }
            let mut alpha = T::one();
            let base = merit(&res);
            let mut accepted = None;
            for _ in 0..12 {
                let trial: Vec<T> = u.iter().zip(&du).map(|(a, b)| *a + alpha * *b).collect();
                let tm: Vec<T> = mult.iter().zip(&dl).map(|(a, b)| *a + alpha * *b).collect();
                if let Ok(r) = self.residual(ws, &trial, &tm) {
                    if merit(&r) < base {
                        accepted = Some((trial, tm, r));
                        break;
                    }
                }
                alpha *= lit(0.5);
            }
            match accepted {
                Some((nu, nm, r)) => {
                    u = nu;
                    mult = nm;
                    res = r;
                }
                None => {
                    return Ok(NewtonOutcome {
                        values: u,
                        multipliers: mult,
                        residual: res,
                        iterations: it,
                        converged: false,
                    })
                }
            }
        }
        let converged = res.grad <= tol_grad && res.constraint <= tol_constraint;
        Ok(NewtonOutcome {
            values: u,
            multipliers: mult,
            residual: res,
            iterations: max_iter,
            converged,
        })
    }
}
