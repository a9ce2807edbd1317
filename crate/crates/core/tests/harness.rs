use std::sync::Arc;

use normsol_core::analytic::{mass_for_fraction, GnConstant, ProblemParams};
use normsol_core::harness::*;
use normsol_core::radial::{GridSpec, RadialGrid, RadialProfile};
use normsol_core::solve::{solve_ground, SolverConfig};
use normsol_core::Error;

const C_NP: f64 = 0.17662041042327012;

fn reference(mu: f64) -> (ProblemParams<f64>, GnConstant<f64>) {
    let gn = GnConstant::user(C_NP).unwrap();
    let a = mass_for_fraction(5, 3.8, 1.0, &gn, 0.5).unwrap();
    (ProblemParams::new(5, 3.8, a, mu).unwrap(), gn)
}

fn reference_grid() -> Arc<RadialGrid<f64>> {
    let spec = GridSpec {
        nodes: 8192,
        rmax: 160.0,
        fine_ratio: 0.05,
        refine_radius: 1.0,
    };
    Arc::new(RadialGrid::new(5, spec).unwrap())
}

#[test]
fn bessel_profile_matches_the_half_integer_closed_form() {
    // N = 5: r^{-3/2} J_{3/2}(r) = sqrt(2/pi) (sin r - r cos r) / r^3.
    let exact = |r: f64| (2.0 / std::f64::consts::PI).sqrt() * (r.sin() - r * r.cos()) / r.powi(3);
    for &r in &[0.3, 1.0, 5.0, 11.99, 12.01, 30.0, 200.0, 2047.5] {
        let want = exact(r);
        assert!(
            (bessel_psi(5, r) - want).abs() < 1e-12 * (1.0 + want.abs() * r.powi(2)),
            "r = {r}"
        );
    }
    assert!((bessel_psi(5, 0.0) - (2.0 / std::f64::consts::PI).sqrt() / 3.0).abs() < 1e-15);
}

#[test]
fn bessel_profile_solves_the_helmholtz_equation() {
    let h = 1e-3;
    for n in [5, 6, 7, 9] {
        for &r in &[0.7, 4.0, 11.5, 12.5, 25.0] {
            let d1 = (bessel_psi(n, r + h) - bessel_psi(n, r - h)) / (2.0 * h);
            let d2 =
                (bessel_psi(n, r + h) - 2.0 * bessel_psi(n, r) + bessel_psi(n, r - h)) / (h * h);
            assert!(
                (d1 - bessel_psi_slope(n, r)).abs() < 1e-7,
                "N = {n}, r = {r}"
            );
            let res = d2 + (n as f64 - 1.0) / r * d1 + bessel_psi(n, r);
            assert!(res.abs() < 1e-5, "N = {n}, r = {r}: {res}");
        }
    }
}

#[test]
fn cutoffs_are_smooth_steps() {
    let h = 1e-5;
    for shape in [CutoffShape::Standard, CutoffShape::Ramp { eps: 0.05 }] {
        let c = Cutoff::new(shape.clone()).unwrap();
        assert_eq!(c.eval(0.5).0, 1.0);
        assert_eq!(c.eval(2.5).0, 0.0);
        let mut last = 1.0;
        for k in 1..100 {
            let t = 1.0 + k as f64 / 100.0;
            let (v, d, dd) = c.eval(t);
            assert!(v <= last && (0.0..=1.0).contains(&v), "{shape:?} at {t}");
            last = v;
            let fd = (c.eval(t + h).0 - c.eval(t - h).0) / (2.0 * h);
            let fd2 = (c.eval(t + h).1 - c.eval(t - h).1) / (2.0 * h);
            assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "{shape:?} at {t}");
            assert!(
                (fd2 - dd).abs() < 1e-4 * (1.0 + dd.abs()),
                "{shape:?} at {t}"
            );
        }
    }
    assert!(Cutoff::new(CutoffShape::Ramp { eps: 0.0 }).is_err());
}

#[test]
fn witness_routes_agree() {
    let (params, gn) = reference(1.0);
    for m in [8.0, 64.0, 1024.0] {
        let w = evaluate_witness(&params, &gn, m, &CutoffShape::Standard).unwrap();
        assert!((w.mass_sq / w.target_mass_sq - 1.0).abs() < 1e-12);
        // Phi0 by the Laplacian and by the Helmholtz resolvent.
        assert!(
            (w.phi0_value - w.phi0_resolvent).abs() < 1e-9 * w.target_mass_sq,
            "m = {m}"
        );
        // Implied bound by rescaling Phi0 and as the energy of the unscaled profile.
        assert!((w.implied_bound - w.implied_bound_direct).abs() < 1e-8 * w.implied_bound.abs());
        // The stored profile carries the quadrature mass.
        let mm = w.profile.mass_sq();
        assert!(
            (mm / w.mass_sq - 1.0).abs() < 1e-3,
            "m = {m}: {mm} vs {}",
            w.mass_sq
        );
    }
}

#[test]
fn witness_margin_grows_with_the_cutoff_scale() {
    let (params, gn) = reference(1.0);
    let search = search_witness(&params, &gn, &CutoffShape::Standard, 8.0, 1024.0).unwrap();
    let ms: Vec<f64> = search.attempts.iter().map(|a| a.0).collect();
    assert_eq!(ms, vec![8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0]);
    let margins: Vec<f64> = search.attempts.iter().map(|a| a.1).collect();
    assert!(margins.windows(2).all(|w| w[1] > w[0]), "{margins:?}");
    assert_eq!(search.witness.m, 1024.0);
}

#[test]
fn witness_requires_its_hypotheses() {
    let gn = GnConstant::user(C_NP).unwrap();
    let p4 = ProblemParams::new(5, 4.5, 1.0, 1.0).unwrap();
    assert!(matches!(
        evaluate_witness(&p4, &gn, 8.0, &CutoffShape::Standard),
        Err(Error::Hypothesis(_))
    ));
    let n4 = ProblemParams::new(4, 4.5, 1.0, 1.0).unwrap();
    assert!(matches!(
        evaluate_witness(&n4, &gn, 8.0, &CutoffShape::Standard),
        Err(Error::Hypothesis(_))
    ));
    let (params, gn) = reference(1.0);
    assert!(evaluate_witness(&params, &gn, 0.5, &CutoffShape::Standard).is_err());
    assert!(matches!(
        build_witness(&params, &gn, 8.0, &CutoffShape::Standard),
        Err(Error::BoundNotAchieved { .. })
    ));
}

#[test]
fn h2_distance_is_relative() {
    let g = reference_grid();
    let u = RadialProfile::from_fn(g.clone(), |r| (-r * r).exp());
    assert_eq!(h2_distance(&u, &u).unwrap(), 0.0);
    assert!((h2_distance(&u.scaled(2.0), &u).unwrap() - 1.0).abs() < 1e-14);
    assert!((h2_distance(&u.scaled(-1.0), &u).unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn a_sweep_rows_and_outputs() {
    let (params, gn) = reference(1.0);
    let opts = SweepOptions {
        grid: reference_grid(),
        cfg: SolverConfig::default(),
        q_list: vec![],
        workers: 1,
    };
    let values: Vec<f64> = (0..3).map(|k| params.a * 0.9f64.powi(k)).collect();
    let res = sweep_a(&params, &gn, &values, &opts).unwrap();
    assert_eq!(res.axis, SweepAxis::A);
    assert_eq!(res.q_list, vec![3.8, 3.7]);
    assert_eq!(res.rows.len(), 3);
    let ratios: Vec<f64> = res.rows.iter().map(|r| r.energy_ratio().unwrap()).collect();
    assert!(
        ratios.windows(2).all(|w| w[1] < w[0]) && ratios.iter().all(|&x| x > 1.0),
        "{ratios:?}"
    );
    assert!(res
        .rows
        .iter()
        .all(|r| r.ground.as_ref().unwrap().invariants_hold));
    let cols = res.columns();
    assert!(res.records().iter().all(|r| r.len() == cols.len()));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    res.write_csv(&path).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), cols);
    let first = rd.records().next().unwrap().unwrap();
    let e: f64 = first[1].parse().unwrap();
    assert_eq!(e, res.rows[0].ground.as_ref().unwrap().energy);
    assert_eq!(first[cols.len() - 1].to_string(), "ok");
    assert!(res.plot_data().starts_with("# a energy_ratio\n"));
}

#[test]
fn sweeps_reject_bad_value_lists() {
    let (params, gn) = reference(1.0);
    let opts = SweepOptions {
        grid: reference_grid(),
        cfg: SolverConfig::default(),
        q_list: vec![],
        workers: 0,
    };
    assert!(sweep_a(&params, &gn, &[], &opts).is_err());
    assert!(sweep_a(&params, &gn, &[1.0, 2.0], &opts).is_err());
    assert!(sweep_mu(&params, &gn, &[1.0, 1.0], &opts).is_err());
    assert!(sweep_mu(&params, &gn, &[0.5, 0.0], &opts).is_err());
}

#[test]
fn decay_fit_tracks_the_linearized_rate() {
    let (params, gn) = reference(1.0);
    let ws = normsol_core::solve::Workspace::new(reference_grid()).unwrap();
    let rep = solve_ground(&ws, &params, &gn, &SolverConfig::default(), None).unwrap();
    let d = decay_check(&rep, &params).unwrap();
    let k = (2.0 * (-rep.lambda).sqrt() - params.mu).sqrt() / 2.0;
    assert!((d.linearized - k).abs() < 1e-15);
    // The log fit also absorbs the algebraic factor r^{-(N-1)/2} of the tail.
    let mid = 0.5 * (d.window.0 + d.window.1);
    let excess = d.fitted - d.linearized;
    assert!(
        excess > 0.0 && (excess - 2.0 / mid).abs() < 0.5 * 2.0 / mid,
        "{d:?}"
    );
    let mut shallow = rep.clone();
    shallow.lambda = -0.1;
    assert!(matches!(
        decay_check(&shallow, &params),
        Err(Error::Hypothesis(_))
    ));
}
