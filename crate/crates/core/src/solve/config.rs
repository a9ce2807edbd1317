use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Iteration controls shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Largest trial step of the preconditioned descent.
    pub step0: T,
    /// Descent iterations before giving up.
    pub max_iter: usize,
    /// Preconditioned gradient tolerance, relative to `|u|_2`.
    pub tol_grad: T,
    /// Pohozaev tolerance, relative to the size of its terms.
    pub tol_pohozaev: T,
    /// Step reduction factor of the Armijo search.
    pub backtrack: T,
    /// Armijo sufficient-decrease parameter.
    pub armijo: T,
    /// Ground branch: fiber re-projection every `cadence` steps.
    pub cadence: usize,
    /// Descent hands over to Newton below this manifold gradient.
    pub newton_switch: T,
    pub newton_iter: usize,
    /// Random starts for the mountain-pass infimum.
    pub starts: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            step0: lit(1.0),
            max_iter: 20000,
            tol_grad: lit(1e-8),
            tol_pohozaev: lit(1e-8),
            backtrack: lit(0.5),
            armijo: lit(1e-4),
            cadence: 10,
            newton_switch: lit(1e-2),
            newton_iter: 40,
            starts: 50,
            seed: 42,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x > T::zero() && x.is_finite();
        if !pos(self.step0)
            || !pos(self.tol_grad)
            || !pos(self.tol_pohozaev)
            || !pos(self.armijo)
            || !pos(self.newton_switch)
        {
            return Err(Error::InvalidParams(
                "solver steps and tolerances must be positive".into(),
            ));
        }
        if self.max_iter == 0 || self.cadence == 0 || self.newton_iter == 0 || self.starts == 0 {
            return Err(Error::InvalidParams(
                "solver counts must be positive".into(),
            ));
        }
        if !(self.backtrack > T::zero() && self.backtrack < T::one()) || self.armijo >= T::one() {
            return Err(Error::InvalidParams(
                "backtracking factor and Armijo parameter must lie in (0, 1)".into(),
            ));
        }
        if self.tol_grad > lit(1e-6) || self.tol_pohozaev > lit(1e-6) {
            return Err(Error::InvalidParams(
                "tolerances must not exceed 1e-6".into(),
            ));
        }
        Ok(())
    }
}
