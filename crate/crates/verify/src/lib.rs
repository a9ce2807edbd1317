//! The reference problem shared by the acceptance suite: `N = 5`, `p = 3.8`,
//! `mu = 1` and the mass at half the admissibility threshold, with the
//! Gagliardo-Nirenberg constant estimated on the default grid.

use std::sync::Arc;

use normsol_core::analytic::{mass_for_fraction, GnConstant, ProblemParams};
use normsol_core::radial::{GridSpec, RadialGrid};
use normsol_core::solve::{gn_constant_estimate, SolverConfig};
use normsol_core::Result;

pub const N: usize = 5;
pub const P: f64 = 3.8;
pub const MU: f64 = 1.0;
pub const A_FRACTION: f64 = 0.5;

pub fn estimated_gn() -> Result<GnConstant<f64>> {
    Ok(gn_constant_estimate(N, P, &GridSpec::default(), &SolverConfig::default())?.constant)
}

pub fn reference_params(gn: &GnConstant<f64>) -> Result<ProblemParams<f64>> {
    let a = mass_for_fraction(N, P, MU, gn, A_FRACTION)?;
    ProblemParams::new(N, P, a, MU)
}

/// Grid for single solves: the refined core resolves the concentrated
/// mountain-pass state, the radius the slow tail of the local minimizer.
pub fn solve_grid() -> Result<Arc<RadialGrid<f64>>> {
    let spec = GridSpec {
        nodes: 16384,
        rmax: 160.0,
        fine_ratio: 0.01,
        refine_radius: 1.0,
    };
    Ok(Arc::new(RadialGrid::new(N, spec)?))
}

/// Wide grid for the sweeps: small `mu` and small `a` spread the ground state.
pub fn sweep_grid() -> Result<Arc<RadialGrid<f64>>> {
    let spec = GridSpec {
        nodes: 32768,
        rmax: 1280.0,
        fine_ratio: 0.025,
        refine_radius: 1.0,
    };
    Ok(Arc::new(RadialGrid::new(N, spec)?))
}
