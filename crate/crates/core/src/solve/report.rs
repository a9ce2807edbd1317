use crate::fiber::{ManifoldClass, NormQuadruple};
use crate::radial::RadialProfile;

use super::Branch;

/// Solver by-products that are not part of the solution itself.
#[derive(Debug, Clone)]
pub struct Diagnostics<T> {
    pub descent_iterations: usize,
    pub newton_iterations: usize,
    /// `lambda` as the Newton multiplier of the mass constraint.
    pub newton_lambda: T,
    /// Multiplier of the Pohozaev constraint; zero for an exact natural constraint.
    pub pohozaev_multiplier: T,
    /// Preconditioned norm of `E' - lambda u` over `|u|_2`, with no Pohozaev term.
    pub free_grad_norm: T,
    pub truncation_ratio: T,
    pub sign_changes: usize,
    /// Energies of accepted descent steps and projections, in order.
    pub energy_history: Vec<T>,
    /// Final energy of each multi-start run, `None` where it failed.
    pub start_energies: Vec<Option<T>>,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub profile: RadialProfile<T>,
    pub energy: T,
    /// `(dd - mu gg - pp) / mm`, the multiplier the equation fixes.
    pub lambda: T,
    pub pohozaev_residual: T,
    /// Preconditioned norm of the manifold Lagrangian gradient over `|u|_2`.
    pub grad_norm: T,
    pub branch: Branch,
    pub iterations: usize,
    pub quadruple: NormQuadruple<T>,
    pub manifold_class: ManifoldClass,
    pub diagnostics: Diagnostics<T>,
}
