use std::path::PathBuf;

use normsol_cli::config::{Format, GnSetting, MassSpec, Origin, RawConfig, RunConfig};
use normsol_cli::error::CliError;
use normsol_core::harness::CutoffShape;
use proptest::prelude::*;

const MINIMAL: &str = "problem.N = 5\nproblem.p = 3.8\nproblem.a = 2\nproblem.mu = 1\n";

#[test]
fn minimal_config_takes_defaults() {
    let c = RunConfig::parse(MINIMAL).unwrap();
    assert_eq!(c.n, 5);
    assert_eq!(c.mass, MassSpec::Value(2.0));
    assert_eq!(c.gn, GnSetting::Estimate);
    assert_eq!(c.solver.seed, 42);
    assert_eq!(c.gn_seed, 42);
    assert_eq!(c.gn_samples, 200);
    assert_eq!(c.cutoff, CutoffShape::Standard);
    assert_eq!(
        c.formats,
        vec![Format::Json, Format::Csv, Format::Profile, Format::Plot]
    );
}

#[test]
fn comments_blank_lines_and_later_lines_win() {
    let text = format!("# header\n\n{MINIMAL}problem.mu = 0.5  # override\n");
    assert_eq!(RunConfig::parse(&text).unwrap().mu, 0.5);
}

#[test]
fn missing_p_names_the_key() {
    let e = RunConfig::parse("problem.N = 5\nproblem.a = 1\nproblem.mu = 1\n").unwrap_err();
    assert!(matches!(&e, CliError::MissingKey(k) if k == "problem.p"));
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("problem.p"));
}

#[test]
fn unknown_key_is_an_error_with_line() {
    let e = RunConfig::parse(&format!("{MINIMAL}solver.tolerance = 1e-9\n")).unwrap_err();
    let msg = e.to_string();
    assert!(
        msg.contains(":5:") && msg.contains("solver.tolerance"),
        "{msg}"
    );
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn bad_values_report_key_and_line() {
    let e = RunConfig::parse("problem.N = 5\nproblem.p = 3.8\nproblem.a = two\nproblem.mu = 1\n")
        .unwrap_err();
    assert!(e.to_string().contains(":3: `problem.a`"), "{e}");
    let e = RunConfig::parse(&format!("{MINIMAL}solver.backtrack = 1.5\n")).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let e = RunConfig::parse(&format!("{MINIMAL}noequals\n")).unwrap_err();
    assert!(e.to_string().contains("key = value"), "{e}");
}

#[test]
fn mass_is_value_or_fraction_not_both() {
    let c = RunConfig::parse(
        "problem.N = 5\nproblem.p = 3.8\nproblem.a_fraction = 0.5\nproblem.mu = 1\n",
    )
    .unwrap();
    assert_eq!(c.mass, MassSpec::Fraction(0.5));
    assert!(RunConfig::parse(&format!("{MINIMAL}problem.a_fraction = 0.5\n")).is_err());
}

#[test]
fn precedence_env_file_flag() {
    let mut raw = RawConfig::default();
    raw.merge_env([
        ("NORMSOL_PROBLEM__MU".to_string(), "7".to_string()),
        ("NORMSOL_GRID__FINE_RATIO".to_string(), "0.1".to_string()),
        ("NORMSOL_SOLVER__SEED".to_string(), "5".to_string()),
        ("HOME".to_string(), "/root".to_string()),
    ])
    .unwrap();
    raw.overlay(RawConfig::parse_text(MINIMAL, "file").unwrap());
    raw.set("solver.seed", "9", Origin::Flag("seed")).unwrap();
    let c = RunConfig::from_raw(&raw).unwrap();
    assert_eq!(c.mu, 1.0, "file beats environment");
    assert_eq!(c.grid.fine_ratio, 0.1, "environment beats default");
    assert_eq!(c.solver.seed, 9, "flag beats environment");
}

#[test]
fn env_capital_n_and_unknown_env_key() {
    let mut raw = RawConfig::default();
    raw.merge_env([("NORMSOL_PROBLEM__N".to_string(), "6".to_string())])
        .unwrap();
    assert!(raw
        .clone()
        .merge_env([("NORMSOL_PROBLEM__Q".to_string(), "1".to_string())])
        .unwrap_err()
        .to_string()
        .contains("NORMSOL_PROBLEM__Q"));
    raw.overlay(
        RawConfig::parse_text("problem.p = 3.5\nproblem.a = 1\nproblem.mu = 1\n", "f").unwrap(),
    );
    assert_eq!(RunConfig::from_raw(&raw).unwrap().n, 6);
}

#[test]
fn ramp_cutoff_and_lists() {
    let c = RunConfig::parse(&format!(
        "{MINIMAL}witness.cutoff = ramp\nwitness.ramp_eps = 0.01\nsweep.q = 3, 4.5\noutput.formats = profile,json\n"
    ))
    .unwrap();
    assert_eq!(c.cutoff, CutoffShape::Ramp { eps: 0.01 });
    assert_eq!(c.sweep_q, vec![3.0, 4.5]);
    assert_eq!(c.formats, vec![Format::Json, Format::Profile]);
    assert!(RunConfig::parse(&format!("{MINIMAL}witness.ramp_eps = 0.01\n")).is_err());
    assert!(RunConfig::parse(&format!("{MINIMAL}output.formats = json,xml\n")).is_err());
}

fn finite_pos() -> impl Strategy<Value = f64> {
    (1e-6f64..1e6).prop_map(|x| x)
}

prop_compose! {
    fn any_config()(
        n in 2usize..12,
        p in 2.01f64..9.0,
        a in finite_pos(),
        use_fraction in any::<bool>(),
        mu in 0.0f64..10.0,
        nodes in 16usize..100_000,
        rmax in 1.0f64..5000.0,
        fine_ratio in 0.001f64..1.0,
        refine_radius in 0.01f64..50.0,
        step0 in finite_pos(),
        tols in (1e-14f64..1e-6, 1e-14f64..1e-6),
        backtrack in 0.01f64..0.99,
        counts in (1usize..100_000, 1usize..100, 1usize..200, 1usize..500),
        seeds in (any::<u64>(), any::<u64>()),
        gn in prop::option::of(finite_pos()),
        eps in prop::option::of(1e-4f64..1.0),
        m in (1.0f64..100.0, 1.0f64..20.0),
        q in prop::collection::vec(1.0f64..10.0, 0..4),
        workers in 0usize..64,
        formats in prop::sample::subsequence(vec![Format::Json, Format::Csv, Format::Profile, Format::Plot], 1..=4),
    ) -> String {
        let mut s = format!(
            "problem.N = {n}\nproblem.p = {p:?}\n{} = {a:?}\nproblem.mu = {mu:?}\n",
            if use_fraction { "problem.a_fraction" } else { "problem.a" },
        );
        s += &format!("grid.nodes = {nodes}\ngrid.rmax = {rmax:?}\ngrid.fine_ratio = {fine_ratio:?}\ngrid.refine_radius = {refine_radius:?}\n");
        s += &format!("solver.step0 = {step0:?}\nsolver.tol_grad = {:?}\nsolver.tol_pohozaev = {:?}\nsolver.backtrack = {backtrack:?}\n", tols.0, tols.1);
        s += &format!("solver.max_iter = {}\nsolver.cadence = {}\nsolver.newton_iter = {}\nsolver.starts = {}\n", counts.0, counts.1, counts.2, counts.3);
        s += &format!("solver.seed = {}\ngn.seed = {}\n", seeds.0, seeds.1);
        if let Some(c) = gn { s += &format!("gn.value = {c:?}\n"); }
        if let Some(e) = eps { s += &format!("witness.cutoff = ramp\nwitness.ramp_eps = {e:?}\n"); }
        s += &format!("witness.m_start = {:?}\nwitness.m_max = {:?}\n", m.0, m.0 * m.1);
        if !q.is_empty() {
            s += &format!("sweep.q = {}\n", q.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","));
        }
        let names: Vec<&str> = formats.iter().map(|f| match f {
            Format::Json => "json", Format::Csv => "csv", Format::Profile => "profile", Format::Plot => "plot",
        }).collect();
        s += &format!("sweep.workers = {workers}\noutput.dir = out/{n}\noutput.formats = {}\n", names.join(","));
        s
    }
}

proptest! {
    #[test]
    fn parse_render_round_trip_is_lossless(text in any_config()) {
        let c = RunConfig::parse(&text).unwrap();
        let rendered = c.render();
        let back = RunConfig::parse(&rendered).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.render(), rendered);
        prop_assert_eq!(back.output_dir.clone(), PathBuf::from(format!("out/{}", c.n)));
    }
}
