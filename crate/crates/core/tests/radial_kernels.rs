use std::f64::consts::PI;
use std::sync::Arc;

use normsol_core::analytic::ProblemParams;
use normsol_core::fiber::energy;
use normsol_core::radial::io::{format_profile, parse_profile, ProfileHeader};
use normsol_core::radial::{constrained_gradient, GridSpec, RadialGrid, RadialProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(dim: usize, spec: GridSpec) -> Arc<RadialGrid<f64>> {
    Arc::new(RadialGrid::new(dim, spec).unwrap())
}

fn fine_spec() -> GridSpec {
    GridSpec {
        nodes: 16384,
        rmax: 16.0,
        fine_ratio: 0.5,
        refine_radius: 3.0,
    }
}

fn gaussian(g: &Arc<RadialGrid<f64>>) -> RadialProfile<f64> {
    RadialProfile::from_fn(g.clone(), |r| (-r * r).exp())
}

/// Analytic bilaplacian of `exp(-r^2)` in dimension `n`, with `s = r^2`.
fn gaussian_bilap(n: f64, r: f64) -> f64 {
    let s = r * r;
    (16.0 * s * s - (32.0 + 16.0 * n) * s + 4.0 * n * n + 8.0 * n) * (-s).exp()
}

/// Random smooth radial profile: a few modulated Gaussians.
fn random_profile(g: &Arc<RadialGrid<f64>>, rng: &mut ChaCha8Rng) -> RadialProfile<f64> {
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.0..3.0),
            )
        })
        .collect();
    RadialProfile::from_fn(g.clone(), |r| {
        terms
            .iter()
            .map(|&(c, b, k)| c * (-b * r * r).exp() * (k * r).cos())
            .sum()
    })
}

#[test]
fn gaussian_mass_matches_closed_form() {
    // Odd N: the weighted integrand extends evenly and the midpoint rule is spectral.
    for dim in [3, 5, 7] {
        let g = grid(dim, GridSpec::default());
        let mm = gaussian(&g).mass_sq();
        let want = (PI / 2.0).powf(dim as f64 / 2.0);
        assert!((mm / want - 1.0).abs() < 1e-8, "N = {dim}: {mm} vs {want}");
    }
}

#[test]
fn gaussian_dd_matches_analytic_laplacian() {
    // The operator is second order; 1e-6 needs spacing near 5e-4 in the core.
    let g = grid(5, fine_spec());
    let q = gaussian(&g).norm_quadruple(3.8).unwrap();
    let f: Vec<f64> =
        g.r.iter()
            .map(|r| ((4.0 * r * r - 10.0) * (-r * r).exp()).powi(2))
            .collect();
    let want = g.integrate(&f);
    assert!((q.dd / want - 1.0).abs() < 1e-6, "{} vs {want}", q.dd);
}

#[test]
fn bilaplacian_refinement_ratio_is_four() {
    let spec = GridSpec {
        nodes: 1024,
        rmax: 12.0,
        ..GridSpec::default()
    };
    let err = |spec: GridSpec| {
        let g = grid(5, spec);
        let u = gaussian(&g);
        let b = g.bilap(&u.values);
        let e: Vec<f64> = b
            .iter()
            .zip(&g.r)
            .map(|(v, r)| v - gaussian_bilap(5.0, *r))
            .collect();
        g.inner(&e, &e).sqrt()
    };
    let ratio = err(spec) / err(spec.refined(2));
    assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
}

#[test]
fn laplacian_kills_constants_and_is_symmetric() {
    let g = grid(5, GridSpec::default());
    let ones = vec![1.0; g.len()];
    let l = g.lap(&ones);
    let interior = l[..g.len() - 1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(interior < 1e-10, "{interior}");
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let u = random_profile(&g, &mut rng);
    let v = random_profile(&g, &mut rng);
    let a = g.inner(&g.lap(&u.values), &v.values);
    let b = g.inner(&u.values, &g.lap(&v.values));
    assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()));
}

#[test]
fn interpolation_inequality_on_random_profiles() {
    let g = grid(5, GridSpec::default());
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let q = random_profile(&g, &mut rng).norm_quadruple(3.8).unwrap();
        assert!(q.gg <= (q.mm * q.dd).sqrt());
    }
}

#[test]
fn dilation_scales_norms() {
    let g = grid(5, fine_spec());
    let u = gaussian(&g);
    let q0 = u.norm_quadruple(3.8).unwrap();
    let pg = 3.8 * 5.0 * 1.8 / (4.0 * 3.8);
    for s in [-1.0, 0.5, 2.0] {
        let q = u.dilate(s).unwrap().norm_quadruple(3.8).unwrap();
        assert!(
            (q.mm / q0.mm - 1.0).abs() < 1e-8,
            "s = {s}: mass {}",
            q.mm / q0.mm
        );
    }
    // Both sides carry the O(h^2) operator error, which grows as the profile is compressed.
    for s in [-1.0, -0.5, 0.5] {
        let q = u.dilate(s).unwrap().norm_quadruple(3.8).unwrap();
        let e = q0.scaled(s, pg);
        assert!(
            (q.dd / e.dd - 1.0).abs() < 1e-5,
            "s = {s}: dd {}",
            q.dd / e.dd
        );
        assert!((q.gg / e.gg - 1.0).abs() < 1e-5);
        assert!((q.pp / e.pp - 1.0).abs() < 1e-5);
    }
    let same = u.dilate(0.0).unwrap();
    assert_eq!(same.values, u.values);
    let twice = u.dilate(0.3).unwrap().dilate(0.4).unwrap();
    let once = u.dilate(0.7).unwrap();
    let d: Vec<f64> = twice
        .values
        .iter()
        .zip(&once.values)
        .map(|(a, b)| a - b)
        .collect();
    assert!(g.inner(&d, &d).sqrt() < 1e-8 * once.mass_sq().sqrt());
}

#[test]
fn dilation_overflow_is_reported() {
    let g = grid(5, GridSpec::default());
    let u = RadialProfile::from_fn(g.clone(), |r| (-(r - 20.0).powi(2)).exp());
    assert!(u.dilate(-1.0).is_err());
}

#[test]
fn sign_change_counts() {
    let g = grid(5, GridSpec::default());
    assert_eq!(gaussian(&g).sign_changes(), 0);
    let u = RadialProfile::from_fn(g.clone(), |r| (1.0 - r * r) * (-r * r).exp());
    assert_eq!(u.sign_changes(), 1);
}

#[test]
fn decay_fit_on_synthetic_tails() {
    let spec = GridSpec {
        nodes: 4096,
        rmax: 200.0,
        ..GridSpec::default()
    };
    let g = grid(5, spec);
    let u = RadialProfile::from_fn(g.clone(), |r| (-0.7 * r).exp());
    assert!((u.decay_rate_fit(5.0, 30.0).unwrap() - 0.7).abs() < 1e-3);
    let u = RadialProfile::from_fn(g.clone(), |r| r * (-0.3 * r).exp());
    assert!((u.decay_rate_fit(150.0, 190.0).unwrap() - 0.3).abs() < 1e-2);
    let u = RadialProfile::from_fn(g.clone(), |r| (-0.4 * r).exp() * (1.3 * r).cos());
    assert!((u.decay_rate_fit(20.0, 60.0).unwrap() - 0.4).abs() < 2e-2);
    assert!(u.decay_rate_fit(20.0, 20.01).is_err());
}

#[test]
fn concentration_two_routes() {
    let g = grid(5, GridSpec::default());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_profile(&g, &mut rng);
    let q = u.norm_quadruple(3.8).unwrap();
    let mu = 0.8;
    let direct = u.concentration(mu);
    let expanded = (q.dd - mu * q.gg + mu * mu / 4.0 * q.mm) / q.mm;
    assert!((direct / expanded - 1.0).abs() < 1e-6);
    assert!((u.concentration(0.0) - q.dd / q.mm).abs() < 1e-12 * q.dd / q.mm);
}

#[test]
fn constrained_gradient_is_tangent_and_matches_finite_differences() {
    let g = grid(5, GridSpec::default());
    let params = ProblemParams::new(5, 3.8, 1.0, 0.9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = random_profile(&g, &mut rng);
    let (grad, _) = constrained_gradient(&u, &params).unwrap();
    let gu = g.inner(&grad.values, &u.values);
    let scale = g.inner(&grad.values, &grad.values).sqrt() * u.mass_sq().sqrt();
    assert!(gu.abs() <= 1e-8 * scale);
    let e = |v: &[f64]| {
        let prof = RadialProfile::new(g.clone(), v.to_vec()).unwrap();
        energy(&prof.norm_quadruple(3.8).unwrap(), &params)
    };
    let mut orders = Vec::new();
    for _ in 0..10 {
        let w = random_profile(&g, &mut rng);
        // Tangent direction: remove the component along u.
        let c = g.inner(&w.values, &u.values) / u.mass_sq();
        let v: Vec<f64> = w
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| a - c * b)
            .collect();
        let dir = g.inner(&grad.values, &v);
        let step = 1e-5;
        let plus: Vec<f64> = u.values.iter().zip(&v).map(|(a, b)| a + step * b).collect();
        let minus: Vec<f64> = u.values.iter().zip(&v).map(|(a, b)| a - step * b).collect();
        let fd = (e(&plus) - e(&minus)) / (2.0 * step);
        assert!(
            (fd - dir).abs() <= 1e-5 * dir.abs().max(1e-3),
            "{fd} vs {dir}"
        );
        // Order of the one-sided remainder E(u + eps v) - E(u) - eps <grad, v>.
        let rem = |eps: f64| {
            let x: Vec<f64> = u.values.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
            (e(&x) - e(&u.values) - eps * dir).abs()
        };
        orders.push((rem(1e-2) / rem(5e-3)).log2());
    }
    assert!(orders.iter().all(|&o| o >= 1.9), "{orders:?}");
}

#[test]
fn profile_text_round_trip_is_bit_exact() {
    let spec = GridSpec {
        nodes: 256,
        rmax: 10.0,
        ..GridSpec::default()
    };
    let g = grid(5, spec);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_profile(&g, &mut rng);
    let header = ProfileHeader {
        dim: 5,
        p: 3.8,
        a: 1.0 / 3.0,
        mu: 0.1,
        lambda: -0.25 - 1e-17,
        branch: "ground".into(),
        grid: spec,
    };
    let text = format_profile(&header, &u);
    let (h2, u2) = parse_profile(&text).unwrap();
    assert_eq!(h2, header);
    assert_eq!(u2.values, u.values);
    assert_eq!(format_profile(&h2, &u2), text);
}
