//! Linear combinations of the four norms and their derivatives on a grid.

use std::sync::Arc;

use crate::analytic::ProblemParams;
use crate::banded::{BandLu, BandMatrix};
use crate::error::Result;
use crate::fiber::NormQuadruple;
use crate::radial::RadialGrid;
use crate::scalar::{lit, Scalar};

/// `J(u) = c_dd dd + c_gg gg + c_pp pp + c_mm mm`.
///
/// Energy, Pohozaev functional, mass and the Weinstein numerator are all of
/// this form, so one gradient and one Hessian routine serve every solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functional<T> {
    pub dd: T,
    pub gg: T,
    pub pp: T,
    pub mm: T,
}

impl<T: Scalar> Functional<T> {
    pub fn energy(params: &ProblemParams<T>) -> Self {
        let half = lit::<T>(0.5);
        Functional {
            dd: half,
            gg: -half * params.mu,
            pp: -T::one() / params.p,
            mm: T::zero(),
        }
    }

    pub fn pohozaev(params: &ProblemParams<T>) -> Self {
        let two = lit::<T>(2.0);
        Functional {
            dd: two,
            gg: -params.mu,
            pp: -two * params.gamma(),
            mm: T::zero(),
        }
    }

    pub fn mass() -> Self {
        Functional {
            dd: T::zero(),
            gg: T::zero(),
            pp: T::zero(),
            mm: T::one(),
        }
    }

    pub fn lp() -> Self {
        Functional {
            pp: T::one(),
            ..Self::zero()
        }
    }

    pub fn laplacian_sq() -> Self {
        Functional {
            dd: T::one(),
            ..Self::zero()
        }
    }

    pub fn zero() -> Self {
        Functional {
            dd: T::zero(),
            gg: T::zero(),
            pp: T::zero(),
            mm: T::zero(),
        }
    }

    /// `self + c other`.
    pub fn plus(&self, c: T, other: &Self) -> Self {
        Functional {
            dd: self.dd + c * other.dd,
            gg: self.gg + c * other.gg,
            pp: self.pp + c * other.pp,
            mm: self.mm + c * other.mm,
        }
    }

    pub fn value(&self, q: &NormQuadruple<T>) -> T {
        self.dd * q.dd + self.gg * q.gg + self.pp * q.pp + self.mm * q.mm
    }

    /// Sum of the absolute contributions, the natural size of `value`.
    pub fn magnitude(&self, q: &NormQuadruple<T>) -> T {
        (self.dd * q.dd).abs()
            + (self.gg * q.gg).abs()
            + (self.pp * q.pp).abs()
            + (self.mm * q.mm).abs()
    }

    /// Gradient for the weighted inner product:
    /// `2 c_dd L^2 u - 2 c_gg L u + c_pp p |u|^{p-2} u + 2 c_mm u`.
    pub fn gradient(&self, grid: &RadialGrid<T>, u: &[T], p: T) -> Vec<T> {
        let two = lit::<T>(2.0);
        let lu = grid.lap(u);
        let llu = if self.dd != T::zero() {
            grid.lap(&lu)
        } else {
            vec![T::zero(); u.len()]
        };
        let pm2 = p - two;
        u.iter()
            .zip(lu.iter().zip(&llu))
            .map(|(&v, (&l1, &l2))| {
                two * self.dd * l2 - two * self.gg * l1
                    + self.pp * p * v.abs().powf(pm2) * v
                    + two * self.mm * v
            })
            .collect()
    }

    pub fn hessian(&self, grid: &RadialGrid<T>, u: &[T], p: T) -> BandMatrix<T> {
        let two = lit::<T>(2.0);
        let c = self.pp * p * (p - T::one());
        let diag: Vec<T> = u
            .iter()
            .map(|v| c * v.abs().powf(p - two) + two * self.mm)
            .collect();
        grid.operator_band(two * self.dd, -two * self.gg, &diag)
    }
}

/// Grid plus a factored positive definite preconditioner, `L^2 + I` by default.
#[derive(Debug, Clone)]
pub struct Workspace<T> {
    pub grid: Arc<RadialGrid<T>>,
    precond: BandLu<T>,
}

impl<T: Scalar> Workspace<T> {
    pub fn new(grid: Arc<RadialGrid<T>>) -> Result<Self> {
        Self::with_shift(grid, T::one())
    }

    pub fn with_shift(grid: Arc<RadialGrid<T>>, shift: T) -> Result<Self> {
        Self::with_operator(grid, T::zero(), shift)
    }

    /// Preconditioner `L^2 + mu L + k I`, positive definite for `k > mu^2 / 4`.
    pub fn with_operator(grid: Arc<RadialGrid<T>>, mu: T, shift: T) -> Result<Self> {
        let diag = vec![shift; grid.len()];
        let precond = grid.operator_band(T::one(), mu, &diag).factor()?;
        Ok(Workspace { grid, precond })
    }

    /// Applies the inverse preconditioner.
    pub fn precondition(&self, v: &[T]) -> Vec<T> {
        self.precond.solve(v)
    }

    /// `sqrt(<v, M^{-1} v>)` for the preconditioner `M`.
    pub fn pre_norm(&self, v: &[T]) -> T {
        let z = self.precondition(v);
        self.grid.inner(v, &z).max(T::zero()).sqrt()
    }
}
