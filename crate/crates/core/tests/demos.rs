use tvphi::demos::{self, demo_annihilation, demo_linearized_limit, demo_step_vanishing, run_default, DEMO_NAMES};
use tvphi::MollifierFamily;

#[test]
fn default_demos_pass() {
    for name in DEMO_NAMES {
        let trace = run_default(name).unwrap();
        assert_eq!(trace.name, name);
        assert!(trace.passed, "{name}: {}", trace.summary);
        assert_eq!(trace.to_csv().lines().count(), trace.rows.len() + 1);
    }
    assert!(run_default("nope").is_err());
}

#[test]
fn demos_are_deterministic() {
    for name in DEMO_NAMES {
        assert_eq!(run_default(name).unwrap().to_csv(), run_default(name).unwrap().to_csv());
    }
}

#[test]
fn annihilation_regimes() {
    let family = MollifierFamily::dyadic(4.0, 3, 1.0).unwrap();
    let t = demo_annihilation(&[1, 64], &family).unwrap();
    let (near, far) = (&t.rows[0], &t.rows[1]);
    let single = far.extra[1];
    assert!(single > 0.0);
    assert!(far.rel_error <= demos::ANNIHILATION_SUPERPOSITION_TOL);
    assert!(near.measured >= 0.5 * near.extra[0]);
    assert!(near.measured > far.measured);
    assert!(t.passed);
}

#[test]
fn step_needs_resolved_grid() {
    assert!(demo_step_vanishing(0.5, &[2, 64], 1.0 / 64.0).is_err());
    let t = demo_step_vanishing(0.5, &[2, 4, 8], 1.0 / 256.0).unwrap();
    assert!(t.rows.windows(2).all(|p| p[1].measured < p[0].measured));
}

#[test]
fn linearized_limit_residual_vanishes() {
    let t = demo_linearized_limit(0.3, 2.0, &[1.0, 0.1, 0.01]).unwrap();
    assert!(t.passed);
    let res: Vec<f64> = t.rows.iter().map(|r| r.extra[0]).collect();
    assert!(res.windows(2).all(|p| p[1] < p[0]));
}
