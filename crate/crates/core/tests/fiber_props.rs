use normsol_core::analytic::{mass_for_fraction, GnConstant, ProblemParams};
use normsol_core::fiber::*;
use proptest::prelude::*;

const C_NP: f64 = 0.17662041042327012;

/// An admissible `(N = 5, p)` instance and a GN-consistent quadruple on its mass sphere.
fn instance(
    p: f64,
    mu: f64,
    frac: f64,
    dd: f64,
    g: f64,
    w: f64,
) -> (ProblemParams<f64>, NormQuadruple<f64>) {
    let gn = GnConstant::user(C_NP).unwrap();
    let a = mass_for_fraction(5, p, mu, &gn, frac).unwrap();
    let pr = ProblemParams::new(5, p, a, mu).unwrap();
    let mm = a * a;
    let gamma = pr.gamma();
    let gg = g * (mm * dd).sqrt();
    let pp = w * gn.pow_p(p) * mm.powf(p * (1.0 - gamma) / 2.0) * dd.powf(p * gamma / 2.0);
    (pr, NormQuadruple::new(dd, gg, pp, mm).unwrap())
}

prop_compose! {
    fn admissible_quadruple()(
        p in 3.61f64..9.9, mu in 0.05f64..4.0, frac in 0.01f64..0.99,
        ldd in -4.0f64..4.0, lg in -6.0f64..0.0, w in 1e-3f64..1.0,
    ) -> (ProblemParams<f64>, NormQuadruple<f64>) {
        instance(p, mu, frac, 10f64.powf(ldd) * mass_for_fraction(5, p, mu, &GnConstant::user(C_NP).unwrap(), frac).unwrap().powi(2), 10f64.powf(lg), w)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// `e^{-4s}` times `Psi`, `Psi'` and `Psi''`: finite where `e^{4s} dd` is not.
fn normalized(q: &NormQuadruple<f64>, pr: &ProblemParams<f64>, s: f64) -> [f64; 3] {
    let (g, rate) = (pr.gamma(), 2.0 * pr.pg() - 4.0);
    let (gs, ps) = (pr.mu * q.gg * (-2.0 * s).exp(), q.pp * (rate * s).exp());
    [
        q.dd / 2.0 - gs / 2.0 - ps / pr.p,
        2.0 * q.dd - gs - 2.0 * g * ps,
        8.0 * q.dd - 2.0 * gs - 4.0 * pr.p * g * g * ps,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn two_critical_points_in_order((pr, q) in admissible_quadruple()) {
        let g = fiber_geometry(&q, &pr).unwrap();
        let (s, c, t, d) = (g.s_u.unwrap(), g.c_u.unwrap(), g.t_u, g.d_u);
        prop_assert!(s < c && c < t && t < d);
        let (ns, nt) = (normalized(&q, &pr, s), normalized(&q, &pr, t));
        prop_assert!(ns[0] < 0.0 && nt[0] > 0.0);
        prop_assert!(ns[2] > 0.0 && nt[2] < 0.0);
        prop_assert!(ns[1].abs() <= 1e-8 * q.dd && nt[1].abs() <= 1e-8 * q.dd);
    }

    #[test]
    fn derivative_is_pohozaev_of_scaled_quadruple((pr, q) in admissible_quadruple(), s in -3.0f64..3.0) {
        let qs = q.scaled(s, pr.pg());
        prop_assert!(rel(fiber_deriv(&q, &pr, s), pohozaev(&qs, &pr)) < 1e-12
            || (fiber_deriv(&q, &pr, s) - pohozaev(&qs, &pr)).abs() < 1e-12 * qs.dd);
        prop_assert!((fiber_value(&q, &pr, s) - energy(&qs, &pr)).abs() <= 1e-12 * (qs.dd + qs.pp + qs.gg));
        let h = 1e-5;
        let fd = (fiber_value(&q, &pr, s + h) - fiber_value(&q, &pr, s - h)) / (2.0 * h);
        let size = 4.0 * qs.dd + pr.mu * qs.gg + 2.0 * pr.pg() * qs.pp / pr.p;
        prop_assert!((fd - fiber_deriv(&q, &pr, s)).abs() <= 1e-6 * size);
        let fd2 = (fiber_deriv(&q, &pr, s + h) - fiber_deriv(&q, &pr, s - h)) / (2.0 * h);
        prop_assert!((fd2 - fiber_second(&q, &pr, s)).abs() <= 1e-5 * 4.0 * size);
    }

    #[test]
    fn tails_of_the_fiber_map((pr, q) in admissible_quadruple()) {
        let left = fiber_value(&q, &pr, -30.0);
        prop_assert!(left < 0.0 && left.abs() <= (-60.0f64).exp() * (q.dd + pr.mu * q.gg + q.pp));
        let d = fiber_geometry(&q, &pr).unwrap().d_u;
        // Normalized values fall, so the raw values `e^{4s}` times them fall too.
        let right: Vec<f64> = [1.0, 10.0, 30.0].iter().map(|k| normalized(&q, &pr, d + k)[0]).collect();
        prop_assert!(right[0] < 0.0 && right[1] < right[0] && right[2] < right[1]);
        if d < 29.0 {
            prop_assert!(fiber_value(&q, &pr, 30.0) < 0.0);
        }
    }

    #[test]
    fn critical_points_classify_by_side((pr, q) in admissible_quadruple()) {
        let g = fiber_geometry(&q, &pr).unwrap();
        // Scaled quadruples overflow far out on the fiber.
        prop_assume!(g.t_u < 100.0);
        let at = |s: f64| q.scaled(s, pr.pg());
        prop_assert_eq!(classify(&at(g.s_u.unwrap()), &pr, 1e-6), ManifoldClass::Pplus);
        prop_assert_eq!(classify(&at(g.t_u), &pr, 1e-6), ManifoldClass::Pminus);
        let off = (g.s_u.unwrap() + g.t_u) / 2.0;
        prop_assert_eq!(classify(&at(off), &pr, 1e-6), ManifoldClass::OffManifold);
    }

    #[test]
    fn limit_geometry_closed_form(p in 3.61f64..9.9, a in 0.1f64..10.0, dd in 1e-3f64..1e3, w in 1e-3f64..10.0) {
        let pr = ProblemParams::new(5, p, a, 0.0).unwrap();
        let q = NormQuadruple::new(dd, 0.0, w * dd, a * a).unwrap();
        let g = fiber_geometry(&q, &pr).unwrap();
        prop_assert!(g.s_u.is_none() && g.c_u.is_none());
        let want = (q.dd / (pr.gamma() * q.pp)).ln() / (2.0 * pr.pg() - 4.0);
        prop_assert!((g.t_u - want).abs() < 1e-12);
        prop_assert!(fiber_deriv(&q, &pr, g.t_u).abs() < 1e-9 * q.scaled(g.t_u, pr.pg()).dd);
        prop_assert!(g.t_u < g.d_u);
    }

    #[test]
    fn weinstein_is_dilation_invariant((pr, q) in admissible_quadruple(), s in -5.0f64..5.0) {
        let w0 = q.weinstein(pr.p, pr.gamma());
        prop_assert!(rel(q.scaled(s, pr.pg()).weinstein(pr.p, pr.gamma()), w0) < 1e-10);
        let gn = GnConstant::user(C_NP).unwrap();
        prop_assert!(q.gn_consistent(&gn, pr.p, pr.gamma(), 1e-12));
    }
}

#[test]
fn thousand_admissible_quadruples_have_two_critical_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut failures = 0;
    for _ in 0..1000 {
        let p = rng.gen_range(3.61..9.9);
        let mu = rng.gen_range(0.05..4.0);
        let frac = rng.gen_range(0.01..0.99);
        let gn = GnConstant::user(C_NP).unwrap();
        let a: f64 = mass_for_fraction(5, p, mu, &gn, frac).unwrap();
        let dd = a * a * 10f64.powf(rng.gen_range(-4.0..4.0));
        let (pr, q) = instance(
            p,
            mu,
            frac,
            dd,
            10f64.powf(rng.gen_range(-6.0..0.0)),
            rng.gen_range(1e-3..1.0),
        );
        let ok = fiber_geometry(&q, &pr).is_ok_and(|g| {
            let (s, c) = (g.s_u.unwrap(), g.c_u.unwrap());
            s < c && c < g.t_u && g.t_u < g.d_u
        });
        failures += usize::from(!ok);
    }
    assert_eq!(failures, 0);
}
