//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function returns a JSON document; the `*_json` variants are
//! plain Rust and are what the native tests exercise.

use qobserver::ccr::PlantSpec;
use qobserver::closed_form::exp_norm_bound;
use qobserver::experiment::{self, ScenarioConfig, ScenarioKind, ScheduleConfig};
use qobserver::linalg::{expm, from_rows, spectral_norm};
use qobserver::simulation::{averaged_error_bound, propagate, time_average, uniform_grid};
use qobserver::synthesis::{assemble_augmented, synthesize_observer, verify_observer_conditions};
use qobserver::Matrix;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper limit on points sent to the page per curve.
const MAX_POINTS: usize = 1500;

fn stride(len: usize) -> usize {
    len.div_ceil(MAX_POINTS).max(1)
}

fn r_o(r11: f64, r12: f64, r22: f64) -> Matrix {
    from_rows(&[&[r11, r12], &[r12, r22]])
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[derive(Serialize)]
struct Eigenvalue {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct Observation {
    times: Vec<f64>,
    /// Plant output row of the transition matrix, one array per time.
    plant_row: Vec<Vec<f64>>,
    observer_row: Vec<Vec<f64>>,
    average_times: Vec<f64>,
    /// `‖(observer row - plant row) averaged over [0, T]‖`
    average_error: Vec<f64>,
    /// `C / T`
    error_bound: Vec<f64>,
    bound_constant: f64,
    alpha: Vec<f64>,
    realizability: f64,
    observer_condition: f64,
    spectrum: Vec<Eigenvalue>,
}

/// Couples a one-mode observer with Hamiltonian matrix
/// `[[r11, r12], [r12, r22]]` to the `q` or `p` quadrature of a static plant.
pub fn observe_json(
    r11: f64,
    r12: f64,
    r22: f64,
    quadrature: &str,
    t_end: f64,
    dt: f64,
) -> Result<String, String> {
    let (block, c_o) = match quadrature {
        "q" => ([1.0, 0.0], [1.0, 0.0]),
        "p" => ([0.0, 1.0], [0.0, 1.0]),
        other => return Err(format!("quadrature must be \"q\" or \"p\", got {other:?}")),
    };
    let plant = PlantSpec::from_blocks(&[block]).map_err(|e| e.to_string())?;
    let obs = synthesize_observer(&plant, r_o(r11, r12, r22), from_rows(&[&c_o]))
        .map_err(|e| e.to_string())?;
    let aug = assemble_augmented(&plant, &obs).map_err(|e| e.to_string())?;
    let report = verify_observer_conditions(&aug);

    let grid = uniform_grid(t_end, dt).map_err(|e| e.to_string())?;
    let series = propagate(aug.a_a(), &grid).map_err(|e| e.to_string())?;
    let averages = time_average(&series);
    let bound = averaged_error_bound(&aug).map_err(|e| e.to_string())?;
    let p_sel = aug.plant_output_selector();
    let o_sel = aug.observer_output_selector();
    let diff = &o_sel - &p_sel;

    let step = stride(series.len());
    let mut out = Observation {
        times: Vec::new(),
        plant_row: Vec::new(),
        observer_row: Vec::new(),
        average_times: Vec::new(),
        average_error: Vec::new(),
        error_bound: Vec::new(),
        bound_constant: bound,
        alpha: obs.alpha().iter().copied().collect(),
        realizability: report.realizability,
        observer_condition: report.observer_condition,
        spectrum: report
            .spectrum
            .iter()
            .flat_map(|s| s.eigenvalues.iter())
            .map(|z| Eigenvalue { re: z.re, im: z.im })
            .collect(),
    };
    for k in (0..series.len()).step_by(step) {
        let m = &series.maps[k];
        out.times.push(series.times[k]);
        out.plant_row.push((&p_sel * m).iter().copied().collect());
        out.observer_row
            .push((&o_sel * m).iter().copied().collect());
    }
    for k in (step - 1..averages.times.len()).step_by(step) {
        let t = averages.times[k];
        let err = spectral_norm(&(&diff * averages.at_index(k))).map_err(|e| e.to_string())?;
        out.average_times.push(t);
        out.average_error.push(err);
        out.error_bound.push(bound / t);
    }
    Ok(to_json(&out))
}

#[derive(Serialize)]
struct Sequence {
    times: Vec<f64>,
    q_p: Vec<Vec<f64>>,
    p_p: Vec<Vec<f64>>,
    checks: Vec<experiment::Check>,
    passed: bool,
}

/// Position observer on `[0, connect]`, nothing attached for `gap`, then a
/// momentum observer until `t_end`.
pub fn measurement_sequence_json(
    connect: f64,
    gap: f64,
    t_end: f64,
    dt: f64,
) -> Result<String, String> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::MeasurementSequence);
    cfg.t_end = Some(t_end);
    cfg.dt = Some(dt);
    cfg.schedule = Some(ScheduleConfig {
        connect,
        disconnect: gap,
        ..ScheduleConfig::default()
    });
    let bundle = experiment::run(&cfg).map_err(|e| e.to_string())?;
    let series = &bundle.series;
    let step = stride(series.len());
    let mut out = Sequence {
        times: Vec::new(),
        q_p: Vec::new(),
        p_p: Vec::new(),
        checks: bundle.summary.checks.clone(),
        passed: bundle.summary.passed,
    };
    for k in (0..series.len()).step_by(step) {
        let m = &series.maps[k];
        out.times.push(series.times[k]);
        out.q_p.push(m.row(0).iter().copied().collect());
        out.p_p.push(m.row(1).iter().copied().collect());
    }
    Ok(to_json(&out))
}

#[derive(Serialize)]
struct NormSamples {
    times: Vec<f64>,
    norm: Vec<f64>,
    bound: f64,
    worst: f64,
}

/// `‖exp(2Θ R_o t)‖` on `n` points of `[0, t_max]` against the
/// condition-number bound.
pub fn norm_bound_json(
    r11: f64,
    r12: f64,
    r22: f64,
    t_max: f64,
    n: usize,
) -> Result<String, String> {
    if !(t_max.is_finite() && t_max > 0.0) || n < 2 {
        return Err("need t_max > 0 and at least two samples".into());
    }
    let r = r_o(r11, r12, r22);
    let bound = exp_norm_bound(&r).map_err(|e| e.to_string())?;
    let theta = from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    let gen = theta * r * 2.0;
    let mut out = NormSamples {
        times: Vec::with_capacity(n),
        norm: Vec::with_capacity(n),
        bound,
        worst: 0.0,
    };
    for i in 0..n {
        let t = t_max * i as f64 / (n - 1) as f64;
        let e = expm(&(&gen * t)).map_err(|e| e.to_string())?;
        let v = spectral_norm(&e).map_err(|e| e.to_string())?;
        out.worst = out.worst.max(v);
        out.times.push(t);
        out.norm.push(v);
    }
    Ok(to_json(&out))
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn observe(
    r11: f64,
    r12: f64,
    r22: f64,
    quadrature: &str,
    t_end: f64,
    dt: f64,
) -> Result<String, JsError> {
    js(observe_json(r11, r12, r22, quadrature, t_end, dt))
}

#[wasm_bindgen]
pub fn measurement_sequence(
    connect: f64,
    gap: f64,
    t_end: f64,
    dt: f64,
) -> Result<String, JsError> {
    js(measurement_sequence_json(connect, gap, t_end, dt))
}

#[wasm_bindgen]
pub fn norm_bound(r11: f64, r12: f64, r22: f64, t_max: f64, n: usize) -> Result<String, JsError> {
    js(norm_bound_json(r11, r12, r22, t_max, n))
}
