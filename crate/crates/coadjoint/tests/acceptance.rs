//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coadjoint::dynamics::{diagnostics, integrate, IntegratorChoice, Method, State};
use coadjoint::hj::{
    hj_residual_canonical, hj_residual_rigid, hj_residual_top_parts, rigid_numerators,
    verify_equivalence, BodySection, CanonicalSection, PiMode, DEFAULT_CANONICAL_STEP,
    DEFAULT_GROUP_STEP,
};
use coadjoint::lie::DualVector;
use coadjoint::poisson::selftest;
use coadjoint::systems::{
    harmonic_oscillator, heavy_top_system, rigid_body_system, HeavyTopParams, RigidBodyParams,
    SystemSpec,
};

fn pass(criterion: &str, details: String) {
    println!("criterion {criterion}: PASS ({details})");
}

fn rigid(inertia: Vector3<f64>) -> coadjoint::systems::LpSystem {
    rigid_body_system(&RigidBodyParams::new(inertia).unwrap())
}

#[test]
fn criterion_1_bracket_algebra_suite() {
    let start = Instant::now();
    let report = selftest::run(7).unwrap();
    let elapsed = start.elapsed();
    assert!(
        report.antisymmetry_max <= 1e-12,
        "antisymmetry {}",
        report.antisymmetry_max
    );
    assert!(report.leibniz_max <= 1e-8, "leibniz {}", report.leibniz_max);
    assert!(report.jacobi_max <= 1e-6, "jacobi {}", report.jacobi_max);
    assert!(
        report.closed_form_max <= 1e-9,
        "closed-form agreement {}",
        report.closed_form_max
    );
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?}");
    pass(
        "1 (bracket algebra suite)",
        format!(
            "antisymmetry {:.2e} <= 1e-12, leibniz {:.2e} <= 1e-8, jacobi {:.2e} <= 1e-6, closed forms {:.2e} <= 1e-9, {:.2}s < 5s",
            report.antisymmetry_max,
            report.leibniz_max,
            report.jacobi_max,
            report.closed_form_max,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_casimir_conservation() {
    let start = Instant::now();
    let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 2.0, 3.0)));
    let state0 = State::LiePoisson(DualVector::so3(Vector3::new(1.0, 1.0, 1.0)));

    let split = integrate(
        &sys,
        &state0,
        &IntegratorChoice::new(Method::CoadjointSplitting, 1e-3).unwrap(),
        10_000,
        false,
    )
    .unwrap();
    // the |Pi|^2 drift is twice the recorded |Pi|^2/2 Casimir drift
    let split_drift = 2.0
        * diagnostics(&split, &sys).unwrap().casimirs[0]
            .stats
            .max_drift;
    assert!(split_drift <= 1e-12, "splitting drift {split_drift}");

    let rk4 = integrate(
        &sys,
        &state0,
        &IntegratorChoice::new(Method::ExplicitRk4, 1e-3).unwrap(),
        10_000,
        false,
    )
    .unwrap();
    let rk4_drift = 2.0 * diagnostics(&rk4, &sys).unwrap().casimirs[0].stats.max_drift;
    assert!(rk4_drift <= 1e-8, "rk4 drift {rk4_drift}");

    let top = SystemSpec::LiePoisson(heavy_top_system(
        &HeavyTopParams::from_mgh(
            Vector3::new(1.0, 2.0, 3.0),
            1.0,
            Vector3::new(0.0, 0.0, 1.0),
        )
        .unwrap(),
    ));
    let top_state = State::LiePoisson(DualVector::se3(
        Vector3::new(1.0, 1.0, 1.0),
        Vector3::new(0.2, -0.5, 0.8),
    ));
    let mid = integrate(
        &top,
        &top_state,
        &IntegratorChoice::new(Method::ImplicitMidpoint, 1e-3).unwrap(),
        10_000,
        false,
    )
    .unwrap();
    let top_report = diagnostics(&mid, &top).unwrap();
    let pg_drift = top_report.casimirs[0].stats.max_drift;
    let g2_drift = 2.0 * top_report.casimirs[1].stats.max_drift;
    assert!(pg_drift <= 1e-10, "Pi.Gamma drift {pg_drift}");
    assert!(g2_drift <= 1e-10, "|Gamma|^2 drift {g2_drift}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "runtime {elapsed:?}");
    pass(
        "2 (Casimir conservation)",
        format!(
            "splitting |Pi|^2 {split_drift:.2e} <= 1e-12, rk4 {rk4_drift:.2e} <= 1e-8, top Pi.Gamma {pg_drift:.2e} and |Gamma|^2 {g2_drift:.2e} <= 1e-10, {:.2}s < 10s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_3_momentum_map_conservation() {
    let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 2.0, 3.0)));
    let state0 = State::LiePoisson(DualVector::so3(Vector3::new(1.0, 1.0, 1.0)));
    let traj = integrate(
        &sys,
        &state0,
        &IntegratorChoice::new(Method::ExplicitRk4, 1e-3).unwrap(),
        10_000,
        true,
    )
    .unwrap();
    let report = diagnostics(&traj, &sys).unwrap();
    let max = report
        .momentum
        .unwrap()
        .iter()
        .map(|c| c.max_drift)
        .fold(0.0f64, f64::max);
    assert!(max <= 1e-8, "spatial momentum drift {max}");
    pass(
        "3 (momentum-map conservation)",
        format!("max component drift {max:.2e} <= 1e-8 over t = 10 at dt = 1e-3"),
    );
}

#[test]
fn criterion_4_axisymmetric_precession_oracle() {
    let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 1.0, 3.0)));
    let pi0 = Vector3::new(1.0, 0.0, 1.0);
    let dt = 1e-3;
    let steps = 10_000;
    let traj = integrate(
        &sys,
        &State::LiePoisson(DualVector::so3(pi0)),
        &IntegratorChoice::new(Method::ExplicitRk4, dt).unwrap(),
        steps,
        false,
    )
    .unwrap();
    let angle = pi0.z * (1.0 / 1.0 - 1.0 / 3.0) * dt * steps as f64;
    let expected = Vector3::new(
        angle.cos() * pi0.x - angle.sin() * pi0.y,
        angle.sin() * pi0.x + angle.cos() * pi0.y,
        pi0.z,
    );
    let State::LiePoisson(end) = traj.states[steps] else {
        panic!("wrong state kind")
    };
    let error = (end.pi() - expected).norm();
    assert!(error <= 1e-6, "endpoint error {error}");
    pass(
        "4 (analytic precession oracle)",
        format!("endpoint error {error:.2e} <= 1e-6 over t = 10"),
    );
}

#[test]
fn criterion_5_hj_residual_identities() {
    // numerators equal the componentwise left sides exactly on rational inputs
    let cases = [
        (
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, 2.0, 3.0),
        ),
        (
            Vector3::new(2.0, -1.0, 0.5),
            Vector3::new(0.25, 4.0, -3.0),
            Vector3::new(1.0, 0.5, 2.0),
        ),
        (
            Vector3::new(-3.0, 0.0, 7.0),
            Vector3::new(2.0, 5.0, -0.125),
            Vector3::new(4.0, 1.0, 0.25),
        ),
    ];
    for (pi, gamma, inertia) in cases {
        let n = rigid_numerators(pi, gamma, inertia);
        let by_hand = Vector3::new(
            inertia.y * pi.y * gamma.z - inertia.z * pi.z * gamma.y,
            inertia.z * pi.z * gamma.x - inertia.x * pi.x * gamma.z,
            inertia.x * pi.x * gamma.y - inertia.y * pi.y * gamma.x,
        );
        assert_eq!(n, by_hand, "numerators differ at {pi:?}");
    }

    // the top residual at mgh = 0 is the rigid residual, Gamma slot aside
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut reduction_max: f64 = 0.0;
    for _ in 0..200 {
        let rand3 = |rng: &mut ChaCha8Rng| {
            Vector3::new(
                rng.gen_range(-2.0..2.0f64),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            )
        };
        let pi = rand3(&mut rng);
        let gamma_adv = rand3(&mut rng);
        let gamma = rand3(&mut rng);
        let inertia = Vector3::new(
            rng.gen_range(0.25..4.0),
            rng.gen_range(0.25..4.0),
            rng.gen_range(0.25..4.0),
        );
        let (slot_pi, _) = hj_residual_top_parts(
            pi,
            gamma_adv,
            gamma,
            inertia,
            0.0,
            Vector3::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        let rigid_residual = hj_residual_rigid(pi, gamma, inertia).unwrap();
        reduction_max = reduction_max.max((slot_pi - rigid_residual).amax());
    }
    assert!(reduction_max <= 1e-15, "mgh = 0 reduction {reduction_max}");

    // the scaled-inertia family solves the equations for seeded random data
    let mut family_max: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.gen_range(0.25..2.0);
        let pi = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let inertia = Vector3::new(
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.5..3.0),
        );
        let gamma = pi.component_mul(&inertia) * k;
        family_max = family_max.max(hj_residual_rigid(pi, gamma, inertia).unwrap().amax());
    }
    assert!(family_max <= 1e-14, "family residual {family_max}");
    pass(
        "5 (residual identities)",
        format!(
            "numerators exact on rationals, mgh = 0 reduction {reduction_max:.2e} <= 1e-15, family residual {family_max:.2e} <= 1e-14 over 1000 draws"
        ),
    );
}

#[test]
fn criterion_6_canonical_oscillator_section() {
    let sys = harmonic_oscillator(1).unwrap();
    let energy = 0.5;
    let two_e = 2.0 * energy;
    let section = CanonicalSection::from_potential(
        1,
        "oscillator-action",
        move |q: &[f64]| {
            0.5 * (q[0] * (two_e - q[0] * q[0]).sqrt() + two_e * (q[0] / two_e.sqrt()).asin())
        },
        DEFAULT_CANONICAL_STEP,
    );
    let grid: Vec<f64> = (0..100).map(|k| -0.9 + 1.8 * k as f64 / 99.0).collect();
    let mut hj_max: f64 = 0.0;
    let mut curl_max: f64 = 0.0;
    for q in &grid {
        let r = hj_residual_canonical(&sys, &section, &[*q], DEFAULT_CANONICAL_STEP).unwrap();
        hj_max = hj_max.max(r[0].abs());
        curl_max = curl_max.max(section.curl_defect(&[*q], DEFAULT_CANONICAL_STEP).unwrap());
    }
    assert!(hj_max <= 1e-6, "hj residual {hj_max}");
    assert!(curl_max <= 1e-6, "curl defect {curl_max}");

    let perturbed = CanonicalSection::perturbed(&section, 0.1, 1);
    let mut perturbed_max: f64 = 0.0;
    for q in &grid {
        let r = hj_residual_canonical(&sys, &perturbed, &[*q], DEFAULT_CANONICAL_STEP).unwrap();
        perturbed_max = perturbed_max.max(r[0].abs());
    }
    assert!(
        perturbed_max >= 1e-3,
        "negative control residual {perturbed_max}"
    );
    pass(
        "6 (canonical oscillator section)",
        format!(
            "hj {hj_max:.2e} <= 1e-6 and curl {curl_max:.2e} <= 1e-6 at 100 grid points; perturbed control {perturbed_max:.2e} >= 1e-3"
        ),
    );
}

#[test]
fn criterion_7_equivalence_experiment() {
    let start = Instant::now();
    let inertia = Vector3::new(1.0, 2.0, 3.0);
    let sys = rigid(inertia);
    let mu = DualVector::so3(Vector3::new(0.0, 0.0, 1.0));
    let family = BodySection::scaled_inertia(inertia, 2.0, &mu).unwrap();
    let mut verdicts = Vec::new();

    let report = verify_equivalence(
        &sys,
        &family,
        &mu,
        100,
        1e-5,
        7,
        PiMode::SectionValue,
        DEFAULT_GROUP_STEP,
    )
    .unwrap();
    verdicts.push(report.verdict.clone());
    assert!(report.is_consistent(), "family run: {:?}", report.verdict);

    for perturb_seed in 0..10u64 {
        let section = BodySection::perturbed(&family, 0.1, perturb_seed);
        let report = verify_equivalence(
            &sys,
            &section,
            &mu,
            100,
            1e-5,
            7,
            PiMode::SectionValue,
            DEFAULT_GROUP_STEP,
        )
        .unwrap();
        assert!(
            report.is_consistent(),
            "perturbed seed {perturb_seed}: {:?}",
            report.verdict
        );
        verdicts.push(report.verdict.clone());
    }
    let elapsed = start.elapsed();
    assert_eq!(verdicts.len(), 11);
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?}");
    pass(
        "7 (equivalence experiment)",
        format!(
            "11/11 runs CONSISTENT at tol 1e-5 with 100 samples, {:.2}s < 30s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_8_determinism() {
    let bin = env!("CARGO_BIN_EXE_coadjoint");
    let dir = std::env::temp_dir().join(format!("coadjoint-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let run = |tag: &str, args: &[&str]| -> Vec<(String, Vec<u8>)> {
        let output = std::process::Command::new(bin)
            .args(args)
            .current_dir(dir.join(tag))
            .output()
            .expect("spawn coadjoint");
        assert!(
            output.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.join(tag))
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().to_string(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        files
    };

    let commands: Vec<Vec<&str>> = vec![
        vec![
            "simulate",
            "--system",
            "rigid-body",
            "--inertia",
            "1,2,3",
            "--pi0",
            "1,1,1",
            "--dt",
            "1e-3",
            "--steps",
            "200",
            "--with-group",
            "--seed",
            "42",
        ],
        vec![
            "verify-theorem",
            "--system",
            "rigid-body",
            "--inertia",
            "1,2,3",
            "--mu",
            "0,0,1",
            "--section",
            "scaled-inertia-family",
            "--k",
            "2",
            "--samples",
            "50",
            "--tol",
            "1e-5",
            "--seed",
            "42",
        ],
        vec![
            "check-hj",
            "--system",
            "canonical",
            "--dim",
            "1",
            "--section",
            "exact",
            "--energy",
            "0.5",
            "--qmax",
            "0.9",
            "--grid",
            "50",
            "--seed",
            "42",
        ],
    ];

    for (i, args) in commands.iter().enumerate() {
        let tag_a = format!("run-{i}-a");
        let tag_b = format!("run-{i}-b");
        std::fs::create_dir_all(dir.join(&tag_a)).unwrap();
        std::fs::create_dir_all(dir.join(&tag_b)).unwrap();
        let a = run(&tag_a, args);
        let b = run(&tag_b, args);
        assert!(!a.is_empty(), "{args:?} wrote no artifacts");
        assert_eq!(a, b, "artifacts of {args:?} differ between runs");
    }
    std::fs::remove_dir_all(&dir).ok();
    pass(
        "8 (determinism)",
        "byte-identical artifacts across repeated seeded runs of simulate, verify-theorem, check-hj".to_string(),
    );
}
