//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::time::Instant;

use common::{random_pd, random_system};
use nalgebra::Complex;
use qobserver::ccr::{
    check_realizability, dynamics_from_hamiltonian, hamiltonian_from_dynamics, CommutationStructure,
};
use qobserver::closed_form::{exp_norm_bound, observer_block, plant_block};
use qobserver::experiment::{self, ArtifactBundle, ScenarioConfig, ScenarioKind};
use qobserver::linalg::{eigenvalues, expm, from_rows, max_abs, spectral_norm};
use qobserver::simulation::{exact_average, PropagatorSeries};
use qobserver::synthesis::AugmentedSystem;
use qobserver::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn one_mode_a_a() -> Matrix {
    from_rows(&[
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 2.0, 0.0],
        &[0.0, 0.0, 0.0, 2.0],
        &[2.0, 0.0, -2.0, 0.0],
    ])
}

fn momentum_a_a() -> Matrix {
    from_rows(&[
        &[0.0, 0.0, 0.0, -2.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, -2.0, 0.0, 2.0],
        &[0.0, 0.0, -2.0, 0.0],
    ])
}

/// Random synthesized systems over every supported `(n_p, n_o)` with
/// `n_p + n_o <= max_n`.
fn random_systems(
    seed: u64,
    per_shape: usize,
    max_p: usize,
    max_o: usize,
    max_n: usize,
) -> Vec<AugmentedSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n_p in (2..=max_p).step_by(2) {
        for n_o in (2..=max_o).step_by(2) {
            if n_p / 2 > n_o || n_p + n_o > max_n {
                continue;
            }
            for _ in 0..per_shape {
                out.push(random_system(&mut rng, n_p, n_o));
            }
        }
    }
    out
}

fn run(kind: ScenarioKind) -> ArtifactBundle {
    experiment::run(&ScenarioConfig::new(kind)).expect("scenario runs")
}

fn drift(series: &PropagatorSeries, sel: &Matrix, reference: &Matrix, t0: f64, t1: f64) -> f64 {
    series
        .times
        .iter()
        .zip(&series.maps)
        .filter(|(t, _)| **t >= t0 - 1e-9 && **t <= t1 + 1e-9)
        .map(|(_, m)| max_abs(&(sel * m - reference)))
        .fold(0.0, f64::max)
}

fn realizability_algebra() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let ccr2 = CommutationStructure::new(2).unwrap();
    for a in [one_mode_a_a(), momentum_a_a()] {
        worst = worst.max(check_realizability(&a, &ccr2, 1e-12).unwrap().residual);
        let r = hamiltonian_from_dynamics(&a, &ccr2).unwrap();
        let back = dynamics_from_hamiltonian(&r, &ccr2).unwrap();
        worst = worst.max(max_abs(&(back - &a)));
    }
    let systems = random_systems(1, 4, 6, 6, 12);
    let mut round_trip: f64 = 0.0;
    for aug in &systems {
        worst = worst.max(
            check_realizability(aug.a_a(), aug.ccr(), 1e-12)
                .unwrap()
                .residual,
        );
        let a = dynamics_from_hamiltonian(aug.r_a(), aug.ccr()).unwrap();
        let r = hamiltonian_from_dynamics(&a, aug.ccr()).unwrap();
        round_trip = round_trip.max(max_abs(&(r - aug.r_a())));
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-12 && round_trip <= 1e-12 && elapsed < 1.0,
        format!(
            "{} systems, residual {worst:.1e}, round trip {round_trip:.1e}, {elapsed:.3} s",
            systems.len() + 2
        ),
    )
}

fn plant_quadrature_conservation(one_mode: &ArtifactBundle) -> Outcome {
    let sel = from_rows(&[&[1.0, 0.0, 0.0, 0.0]]);
    let d = drift(&one_mode.series, &sel, &sel, 0.0, 50.0);
    outcome(
        d <= 1e-10,
        format!("max |phi_1j - delta_1j| on [0,50] = {d:.1e}"),
    )
}

fn time_average_convergence() -> Outcome {
    let start = Instant::now();
    let bundle = run(ScenarioKind::OneMode);
    let elapsed = start.elapsed().as_secs_f64();
    let a = one_mode_a_a();
    let mut ok = elapsed < 10.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_oracle: f64 = 0.0;
    let mut phi32: f64 = 0.0;
    for t in [10.0f64, 50.0, 100.0] {
        let analytic = [
            1.0 - (2.0 * t).sin() / (2.0 * t),
            0.0,
            (2.0 * t).sin() / (2.0 * t),
            (1.0 - (2.0 * t).cos()) / (2.0 * t),
        ];
        let exact = exact_average(&a, t).unwrap();
        let k = bundle.averages.index_near(t);
        assert!((bundle.averages.times[k] - t).abs() < 1e-9);
        let sampled = bundle.averages.at_index(k);
        let bound = 1.0 / (2.0 * t) + 1e-6;
        for avg in [&exact, sampled] {
            let dev = [
                (avg[(2, 0)] - 1.0).abs(),
                avg[(2, 2)].abs(),
                avg[(2, 3)].abs(),
            ];
            for d in dev {
                worst_excess = worst_excess.max(d - bound);
                ok &= d <= bound;
            }
            phi32 = phi32.max(avg[(2, 1)].abs());
        }
        for j in 0..4 {
            worst_oracle = worst_oracle.max((exact[(2, j)] - analytic[j]).abs());
            worst_oracle = worst_oracle.max((sampled[(2, j)] - analytic[j]).abs() - 1e-5);
        }
    }
    ok &= phi32 <= 1e-12 && worst_oracle <= 1e-10;
    outcome(
        ok,
        format!(
            "worst margin {worst_excess:.1e}, |phi32_ave| {phi32:.1e}, oracle {worst_oracle:.1e}, {elapsed:.2} s"
        ),
    )
}

fn closed_form_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let shapes = [(2, 2), (2, 4), (4, 2), (4, 4)];
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let (n_p, n_o) = shapes[i % shapes.len()];
        let aug = random_system(&mut rng, n_p, n_o);
        for _ in 0..100 {
            let t = rng.random_range(0.0..20.0);
            let phi = expm(&(aug.a_a() * t)).unwrap();
            let scale = max_abs(&phi).max(1.0);
            let p = plant_block(t, &aug).unwrap();
            let o = observer_block(t, &aug).unwrap();
            let dp = max_abs(&(p - phi.rows(0, n_p))) / scale;
            let d_o = max_abs(&(o - phi.rows(n_p, n_o))) / scale;
            worst = worst.max(dp).max(d_o);
        }
    }
    outcome(
        worst <= 1e-8,
        format!("5000 samples, worst relative gap {worst:.1e}"),
    )
}

fn spectral_property() -> Outcome {
    let mut worst: f64 = 0.0;
    let systems = random_systems(5, 4, 6, 6, 12);
    for aug in &systems {
        worst = worst.max(eigenvalues(aug.a_a()).unwrap().max_abs_real_part);
    }
    let s = eigenvalues(&one_mode_a_a()).unwrap();
    worst = worst.max(s.max_abs_real_part);
    let want = [
        Complex::new(0.0, -2.0),
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 2.0),
    ];
    let gap = s
        .eigenvalues
        .iter()
        .zip(want)
        .map(|(z, w)| (z - w).norm())
        .fold(0.0, f64::max);
    // λ²(λ² + 4)
    let poly = s
        .eigenvalues
        .iter()
        .map(|z| (z * z * (z * z + 4.0)).norm())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-9 && gap <= 1e-9 && poly <= 1e-9,
        format!(
            "{} systems, max |Re| {worst:.1e}; one-mode spectrum gap {gap:.1e}, char poly {poly:.1e}",
            systems.len() + 1
        ),
    )
}

fn conservation_laws(one_mode: &ArtifactBundle, sequence: &ArtifactBundle) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for b in [one_mode, sequence] {
        let r = &b.summary.residuals;
        let (c, e) = (r["symplectic"], r["energy"]);
        let horizon = *b.series.times.last().unwrap();
        ok &= c <= 1e-8 && e <= 1e-8 && horizon >= 100.0 - 1e-9;
        parts.push(format!(
            "{} ccr {c:.1e} energy {e:.1e} to t={horizon}",
            b.summary.scenario
        ));
    }
    outcome(ok, parts.join("; "))
}

fn norm_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let n = 2 * (1 + i % 4);
        let r = random_pd(&mut rng, n);
        let bound = exp_norm_bound(&r).unwrap();
        let gen = CommutationStructure::for_dimension(n).unwrap().theta() * &r * 2.0;
        for k in 0..=200 {
            let t = 50.0 * k as f64 / 200.0;
            let norm = spectral_norm(&expm(&(&gen * t)).unwrap()).unwrap();
            worst = worst.max(norm - bound);
        }
    }
    outcome(
        worst <= 1e-8,
        format!("100 R_o, max(norm - bound) = {worst:.2e}"),
    )
}

fn measurement_sequence(sequence: &ArtifactBundle) -> Outcome {
    let s = &sequence.series;
    let q_p = from_rows(&[&[1.0, 0.0, 0.0, 0.0]]);
    let p_p = from_rows(&[&[0.0, 1.0, 0.0, 0.0]]);
    let eye = Matrix::identity(4, 4);
    let before = drift(s, &q_p, &q_p, 0.0, 25.0);
    let at20 = s.maps[s.index_near(20.0)].clone();
    let frozen = drift(s, &eye, &at20, 20.0, 25.0);
    let at25 = s.maps[s.index_near(25.0)].clone();
    let q_after = drift(s, &q_p, &(&q_p * &at25), 25.0, 100.0);
    let p_after = drift(s, &p_p, &(&p_p * &at25), 25.0, 100.0);
    outcome(
        before <= 1e-10 && frozen <= 1e-12 && q_after > 0.1 && p_after <= 1e-10 && sequence.summary.passed,
        format!(
            "q_p on [0,25] {before:.1e}, frozen {frozen:.1e}, q_p varies {q_after:.2e}, p_p after 25 {p_after:.1e}"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let mut ok = true;
    let mut count = 0;
    for kind in [ScenarioKind::OneMode, ScenarioKind::MeasurementSequence] {
        let first = run(kind);
        let second = run(kind);
        let (a, b) = (
            dir.join("a").join(kind.name()),
            dir.join("b").join(kind.name()),
        );
        first.write_to(&a).unwrap();
        second.write_to(&b).unwrap();
        for (name, _) in first.files.iter().filter(|(n, _)| n.ends_with(".csv")) {
            let x = std::fs::read(a.join(name)).unwrap();
            let y = std::fs::read(b.join(name)).unwrap();
            ok &= x == y;
            count += 1;
        }
        ok &= first.summary_json() == second.summary_json();
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        ok && count == 12,
        format!("{count} CSV files compared byte for byte"),
    )
}

fn main() {
    let one_mode = run(ScenarioKind::OneMode);
    let sequence = run(ScenarioKind::MeasurementSequence);
    let results = [
        ("1 realizability algebra", realizability_algebra()),
        (
            "2 plant quadrature conservation",
            plant_quadrature_conservation(&one_mode),
        ),
        ("3 time-average convergence", time_average_convergence()),
        ("4 closed form vs expm", closed_form_equivalence()),
        ("5 spectrum on imaginary axis", spectral_property()),
        (
            "6 symplectic and energy conservation",
            conservation_laws(&one_mode, &sequence),
        ),
        ("7 propagator norm bound", norm_bound()),
        ("8 measurement sequence", measurement_sequence(&sequence)),
        ("9 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
