use std::f64::consts::PI;

use quatsurf::catalog::make;
use quatsurf::representations::Bundle;
use quatsurf::verify::*;

fn suites(s: &[&str]) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

fn without_time(r: &VerificationReport) -> String {
    let mut r = r.clone();
    r.wall_time = 0.0;
    r.to_json()
}

#[test]
fn sphere_energy_report() {
    let r = run_verify(&Subject::catalog("sphere", 0.01).unwrap(), &suites(&["energy"])).unwrap();
    assert!(r.pass, "{}", r.to_json());
    let w = r.check("energy.willmore_w").unwrap();
    assert!((w.value - 4.0 * PI).abs() < 0.01 * 4.0 * PI);
    assert_eq!(r.suites, vec!["energy"]);
    assert_eq!(r.schema, 1);
}

#[test]
fn plane_conformal_report() {
    let r = run_verify(&Subject::catalog("plane", 0.04).unwrap(), &suites(&["conformal"])).unwrap();
    assert!(r.pass);
    assert!(r.check("conformal.exact.0").unwrap().value <= 1e-10);
}

#[test]
fn inverted_catenoid_plucker_report() {
    let r = run_verify(&Subject::catalog("inverted_catenoid", 0.01).unwrap(), &suites(&["plucker"])).unwrap();
    assert!(r.pass, "{}", r.to_json());
    assert_eq!(r.check("plucker.preimages").unwrap().value, 2.0);
    assert!((r.check("plucker.bound").unwrap().value - 8.0 * PI).abs() < 1e-12);
}

#[test]
fn overall_pass_is_the_conjunction() {
    let r = run_verify(&Subject::catalog("catenoid", 0.02).unwrap(), &suites(&["plucker", "algebra", "constrained"])).unwrap();
    assert_eq!(r.pass, r.checks.iter().all(|c| c.pass));
    // suites come back in canonical order, skipped ones are listed
    assert_eq!(r.suites, vec!["algebra", "constrained", "plucker"]);
    assert_eq!(r.skipped.len(), 1);
    assert_eq!(r.skipped[0].suite, "plucker");
    assert!(r.checks.iter().filter(|c| c.id.starts_with("algebra.")).count() == 3);
}

#[test]
fn reports_are_deterministic() {
    let run = || run_verify(&Subject::catalog("sphere", 0.04).unwrap(), &suites(&SUITES)).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(without_time(&a), without_time(&b));
}

#[test]
fn report_json_round_trip_rejects_unknown_fields() {
    let r = run_verify(&Subject::catalog("plane", 0.1).unwrap(), &suites(&["conformal"])).unwrap();
    let text = r.to_json();
    assert_eq!(VerificationReport::from_json(&text).unwrap(), r);
    let extra = text.replacen('{', "{\"extra\": 1,", 1);
    assert!(VerificationReport::from_json(&extra).is_err());
}

#[test]
fn errors_map_to_exit_codes() {
    let e = Subject::catalog("torus", 0.05).err().unwrap();
    assert!(matches!(e, VerifyError::UnknownSurface(_)));
    assert_eq!(e.exit_code(), 2);
    let e = Subject::bundle("{\"schema\": 1}").err().unwrap();
    assert!(matches!(e, VerifyError::BadBundle(_)));
    assert_eq!(e.exit_code(), 3);
    let e = run_verify(&Subject::catalog("plane", 0.1).unwrap(), &suites(&["nope"])).unwrap_err();
    assert!(matches!(e, VerifyError::UnknownSuite(_)));
    assert!(matches!(Subject::catalog("plane", 0.0), Err(VerifyError::BadResolution(_))));
}

#[test]
fn bundles_verify_like_the_catalog() {
    let e = make("sphere", &[], 0.02).unwrap();
    let k = Bundle::from_kodaira(Some("sphere-k".into()), &e.kodaira).to_json();
    let s = Subject::bundle(&k).unwrap();
    assert_eq!(s.deg, 1);
    let r = run_verify(&s, &suites(&["energy", "darboux", "conformal"])).unwrap();
    assert!(r.pass, "{}", r.to_json());
    assert_eq!(r.surface, "sphere-k");
    let wk = r.check("energy.willmore_k").unwrap().value;
    assert!((wk - 4.0 * PI).abs() < 0.01 * 4.0 * PI);

    let w = Bundle::from_weierstrass(None, &e.weierstrass).to_json();
    let s = Subject::bundle(&w).unwrap();
    assert!(s.kodaira.is_some());
    let r = run_verify(&s, &suites(&["energy"])).unwrap();
    let ww = r.check("energy.willmore_w").unwrap().value;
    assert!((ww - 4.0 * PI).abs() < 0.01 * 4.0 * PI, "{ww}");
}

#[test]
fn algebra_suite_runs_ten_thousand_cases() {
    assert_eq!(ALGEBRA_CASES, 10_000);
    assert!(algebra_suite().iter().all(|c| c.pass && c.tolerance == Some(1e-12)));
}
