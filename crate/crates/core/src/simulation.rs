//! Numerical propagation of (piecewise constant) linear dynamics on a time
//! grid, running time averages of the transition matrix, and the
//! convergence and conservation diagnostics built on top of them.

use std::collections::BTreeMap;

use crate::ccr::{hamiltonian_from_dynamics, CommutationStructure};
use crate::closed_form::exp_norm_bound;
use crate::error::{Error, Result};
use crate::linalg::{
    ensure_finite, ensure_square, expm, integral_expm, inverse, max_abs, spectral_norm, Matrix,
};
use crate::synthesis::AugmentedSystem;
use serde::Serialize;

/// Tolerance for deciding that a time lies on a grid point.
const GRID_TOL: f64 = 1e-9;

/// Constant dynamics held for a fixed duration.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    a: Matrix,
    duration: f64,
}

impl Segment {
    pub fn new(a: Matrix, duration: f64) -> Result<Self> {
        ensure_square(&a, "segment dynamics")?;
        ensure_finite(&a, "segment dynamics")?;
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::Schedule(format!(
                "segment duration {duration} must be positive"
            )));
        }
        Ok(Self { a, duration })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }
}

/// Segment start times followed by the end of the schedule.
fn boundaries(segments: &[Segment]) -> Vec<f64> {
    let mut b = Vec::with_capacity(segments.len() + 1);
    let mut t = 0.0;
    b.push(t);
    for s in segments {
        t += s.duration;
        b.push(t);
    }
    b
}

fn uniform_points(start: f64, duration: f64, dt: f64, out: &mut Vec<f64>) {
    let steps = ((duration / dt) - GRID_TOL).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    for k in 1..steps {
        out.push(start + h * k as f64);
    }
    out.push(start + duration);
}

/// `0, dt, 2dt, ..., t_end`; the step is shrunk slightly if `dt` does not
/// divide `t_end`.
pub fn uniform_grid(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Grid(format!("t_end {t_end} must be positive")));
    }
    if !(dt.is_finite() && dt > 0.0 && dt <= t_end) {
        return Err(Error::Grid(format!("dt {dt} must lie in (0, t_end]")));
    }
    let mut grid = vec![0.0];
    uniform_points(0.0, t_end, dt, &mut grid);
    Ok(grid)
}

/// Union of per-segment uniform grids, so every segment boundary is a grid
/// point.
pub fn schedule_grid(segments: &[Segment], dt: f64) -> Result<Vec<f64>> {
    if segments.is_empty() {
        return Err(Error::Schedule("empty schedule".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Grid(format!("dt {dt} must be positive")));
    }
    let b = boundaries(segments);
    let mut grid = vec![0.0];
    for (s, seg) in segments.iter().enumerate() {
        uniform_points(b[s], seg.duration, dt.min(seg.duration), &mut grid);
    }
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        None => return Err(Error::Grid("empty grid".into())),
        Some(&t0) if t0 != 0.0 => return Err(Error::Grid(format!("grid starts at {t0}, not 0"))),
        _ => {}
    }
    for (k, w) in grid.windows(2).enumerate() {
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) || !w[1].is_finite() {
            return Err(Error::Grid(format!(
                "grid not strictly increasing at index {}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Transition matrices `Φ(t_k)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSeries {
    pub times: Vec<f64>,
    pub maps: Vec<Matrix>,
}

impl PropagatorSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the grid point closest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        nearest(&self.times, t)
    }
}

fn nearest(times: &[f64], t: f64) -> usize {
    let i = times.partition_point(|&x| x < t);
    if i == 0 {
        0
    } else if i == times.len() || (t - times[i - 1]) <= (times[i] - t) {
        i - 1
    } else {
        i
    }
}

/// Step propagators keyed by step length, so a uniform grid costs a single
/// exponential.
struct StepCache<'a> {
    a: &'a Matrix,
    steps: BTreeMap<i64, Matrix>,
}

impl<'a> StepCache<'a> {
    fn new(a: &'a Matrix) -> Self {
        Self {
            a,
            steps: BTreeMap::new(),
        }
    }

    fn step(&mut self, h: f64) -> Result<&Matrix> {
        let key = (h * 1e12).round() as i64;
        if !self.steps.contains_key(&key) {
            let e = expm(&(self.a * h))?;
            self.steps.insert(key, e);
        }
        Ok(&self.steps[&key])
    }
}

/// `Φ(t_k) = exp(a t_k)`, built by composing one-step propagators.
pub fn propagate(a: &Matrix, grid: &[f64]) -> Result<PropagatorSeries> {
    let n = ensure_square(a, "dynamics matrix")?;
    ensure_finite(a, "dynamics matrix")?;
    check_grid(grid)?;
    let mut cache = StepCache::new(a);
    let mut maps = Vec::with_capacity(grid.len());
    maps.push(Matrix::identity(n, n));
    for w in grid.windows(2) {
        let next = cache.step(w[1] - w[0])? * maps.last().expect("nonempty");
        maps.push(next);
    }
    Ok(PropagatorSeries {
        times: grid.to_vec(),
        maps,
    })
}

/// Piecewise propagation: on segment `s` starting at `b_s`,
/// `Φ(t) = exp(A_s (t - b_s)) Φ(b_s)`.
pub fn propagate_schedule(segments: &[Segment], grid: &[f64]) -> Result<PropagatorSeries> {
    if segments.is_empty() {
        return Err(Error::Schedule("empty schedule".into()));
    }
    let n = segments[0].a.nrows();
    if let Some(bad) = segments.iter().position(|s| s.a.nrows() != n) {
        return Err(Error::Schedule(format!(
            "segment {bad} has a different dimension"
        )));
    }
    check_grid(grid)?;
    let b = boundaries(segments);
    let total = *b.last().expect("nonempty");
    let last = *grid.last().expect("checked nonempty");
    if (last - total).abs() > GRID_TOL * total.max(1.0) {
        return Err(Error::Schedule(format!(
            "grid ends at {last} but the schedule ends at {total}"
        )));
    }
    for (s, &bs) in b.iter().enumerate().skip(1) {
        let k = nearest(grid, bs);
        if (grid[k] - bs).abs() > GRID_TOL * bs.max(1.0) {
            return Err(Error::Schedule(format!(
                "boundary {s} at t = {bs} is not a grid point"
            )));
        }
    }

    let mut caches: Vec<StepCache> = segments.iter().map(|s| StepCache::new(&s.a)).collect();
    let mut maps = Vec::with_capacity(grid.len());
    maps.push(Matrix::identity(n, n));
    let mut seg = 0;
    for w in grid.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        while seg + 1 < segments.len() && mid > b[seg + 1] {
            seg += 1;
        }
        let next = caches[seg].step(w[1] - w[0])? * maps.last().expect("nonempty");
        maps.push(next);
    }
    Ok(PropagatorSeries {
        times: grid.to_vec(),
        maps,
    })
}

/// Running averages `(1/T) ∫_0^T Φ(t) dt` at every grid time after 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageSeries {
    pub times: Vec<f64>,
    pub averages: Vec<Matrix>,
}

impl AverageSeries {
    /// Average at `T`; `T = 0` returns `Φ(0) = I` by continuity.
    pub fn at_index(&self, k: usize) -> &Matrix {
        &self.averages[k]
    }

    pub fn index_near(&self, t: f64) -> usize {
        nearest(&self.times, t)
    }
}

/// Composite trapezoid rule on the propagation grid.
pub fn time_average(series: &PropagatorSeries) -> AverageSeries {
    let mut times = Vec::with_capacity(series.len().saturating_sub(1));
    let mut averages = Vec::with_capacity(times.capacity());
    let Some(first) = series.maps.first() else {
        return AverageSeries { times, averages };
    };
    let mut integral = Matrix::zeros(first.nrows(), first.ncols());
    for k in 1..series.len() {
        let h = series.times[k] - series.times[k - 1];
        integral += (&series.maps[k - 1] + &series.maps[k]) * (0.5 * h);
        times.push(series.times[k]);
        averages.push(&integral / series.times[k]);
    }
    AverageSeries { times, averages }
}

/// `(1/T) ∫_0^T exp(a t) dt` without quadrature.
pub fn exact_average(a: &Matrix, t: f64) -> Result<Matrix> {
    if t == 0.0 {
        return Ok(Matrix::identity(a.nrows(), a.ncols()));
    }
    Ok(integral_expm(a, t)? / t)
}

/// `(1/T) ∫_0^T Φ(t) dt` for a piecewise schedule, segment by segment.
pub fn exact_schedule_average(segments: &[Segment], t: f64) -> Result<Matrix> {
    if segments.is_empty() {
        return Err(Error::Schedule("empty schedule".into()));
    }
    let n = segments[0].a.nrows();
    if t == 0.0 {
        return Ok(Matrix::identity(n, n));
    }
    let mut start_map = Matrix::identity(n, n);
    let mut integral = Matrix::zeros(n, n);
    let mut start = 0.0;
    for (s, seg) in segments.iter().enumerate() {
        let last = s + 1 == segments.len();
        let span = if last {
            t - start
        } else {
            seg.duration.min(t - start)
        };
        if span <= 0.0 {
            break;
        }
        integral += integral_expm(&seg.a, span)? * &start_map;
        start_map = expm(&(&seg.a * span))? * &start_map;
        start += span;
    }
    Ok(integral / t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceSample {
    pub t: f64,
    /// `‖avg([C_p 0]Φ - [0 C_o]Φ)(T)‖_2`
    pub error: f64,
}

/// Time-average convergence of `z_p - z_o`, measured on coefficient rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub horizon: f64,
    pub dt: f64,
    pub samples: Vec<ConvergenceSample>,
    pub final_error: f64,
    /// `max T d(T)` over every grid time `T >= 1`.
    pub max_scaled_error: f64,
    /// Analytic constant `C` with `d(T) <= C / T` for a valid observer.
    pub bound_constant: Option<f64>,
    /// Least-squares slope of `log d` against `log T` over per-octave maxima.
    pub decay_rate: f64,
    /// `max ‖avg([C_p 0]Φ)(T) - [C_p 0]‖`: the plant output average stays
    /// at its initial row.
    pub plant_output_drift: f64,
    pub bounded: bool,
    pub converges: bool,
}

/// `C = ½(κ + 1) ‖R_o^{-1}‖ ‖C_o‖ ‖[K I]‖` with `κ = sqrt(λ_max/λ_min)`
/// and `K = R_o^{-1} α β^T`.
pub fn averaged_error_bound(aug: &AugmentedSystem) -> Result<f64> {
    let obs = aug.observer();
    let kappa = exp_norm_bound(obs.r_o())?;
    let r_o_inv = inverse(obs.r_o(), "R_o")?;
    let k = &r_o_inv * obs.alpha() * aug.plant().beta().transpose();
    let n_o = obs.n_o();
    let mut ki = Matrix::zeros(n_o, aug.dim());
    ki.view_mut((0, 0), (n_o, aug.plant().n_p())).copy_from(&k);
    ki.view_mut((0, aug.plant().n_p()), (n_o, n_o))
        .copy_from(&Matrix::identity(n_o, n_o));
    Ok(0.5
        * (kappa + 1.0)
        * spectral_norm(&r_o_inv)?
        * spectral_norm(obs.c_o())?
        * spectral_norm(&ki)?)
}

pub fn convergence_diagnostics(
    aug: &AugmentedSystem,
    horizon: f64,
    dt: f64,
) -> Result<ConvergenceReport> {
    let grid = uniform_grid(horizon, dt)?;
    let series = propagate(aug.a_a(), &grid)?;
    let averages = time_average(&series);
    let plant_sel = aug.plant_output_selector();
    let diff = &plant_sel - aug.observer_output_selector();

    let t_min = 1.0_f64.min(horizon);
    let mut errors = Vec::with_capacity(averages.times.len());
    let mut max_scaled = 0.0_f64;
    let mut drift = 0.0_f64;
    for (t, avg) in averages.times.iter().zip(&averages.averages) {
        let d = spectral_norm(&(&diff * avg))?;
        errors.push(d);
        if *t >= t_min {
            max_scaled = max_scaled.max(t * d);
        }
        drift = drift.max(max_abs(&(&plant_sel * avg - &plant_sel)));
    }

    // Geometric sample of T values, four per octave, ending at the horizon.
    let mut samples = Vec::new();
    let mut t = horizon;
    while t >= t_min {
        let k = averages.index_near(t);
        samples.push(ConvergenceSample {
            t: averages.times[k],
            error: errors[k],
        });
        t /= 2f64.powf(0.25);
    }
    samples.reverse();
    samples.dedup_by(|a, b| a.t == b.t);

    // Per-octave maxima for the decay fit.
    let mut points = Vec::new();
    let mut lo = t_min;
    while lo < horizon {
        let hi = (2.0 * lo).min(horizon);
        let peak = averages
            .times
            .iter()
            .zip(&errors)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .map(|(_, d)| *d)
            .fold(0.0_f64, f64::max);
        if peak > 0.0 {
            points.push((hi.ln(), peak.ln()));
        }
        lo = hi;
    }
    let decay_rate = slope(&points);

    let bound_constant = averaged_error_bound(aug).ok();
    let bounded = bound_constant.is_some_and(|c| max_scaled <= c * (1.0 + 1e-3) + 1e-4);
    let final_error = *errors.last().unwrap_or(&f64::NAN);
    Ok(ConvergenceReport {
        horizon,
        dt,
        samples,
        final_error,
        max_scaled_error: max_scaled,
        bound_constant,
        decay_rate,
        plant_output_drift: drift,
        bounded,
        converges: bounded && decay_rate < -0.5,
    })
}

fn slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Worst commutation and energy residuals seen along a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantReport {
    /// `max_t ‖Φ Θ Φ^T - Θ‖_max`
    pub ccr_residual: f64,
    pub ccr_worst_time: f64,
    /// `max_t ‖Φ^T R Φ - R‖_max` (per segment for schedules)
    pub energy_residual: f64,
    pub energy_worst_time: f64,
}

impl InvariantReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.ccr_residual <= tol && self.energy_residual <= tol
    }
}

pub fn invariant_monitor(
    series: &PropagatorSeries,
    ccr: &CommutationStructure,
    r_a: &Matrix,
) -> Result<InvariantReport> {
    let n = ccr.dim();
    crate::linalg::ensure_shape(r_a, "Hamiltonian matrix", n, n)?;
    let theta = ccr.theta();
    let mut rep = InvariantReport {
        ccr_residual: 0.0,
        ccr_worst_time: 0.0,
        energy_residual: 0.0,
        energy_worst_time: 0.0,
    };
    for (t, phi) in series.times.iter().zip(&series.maps) {
        crate::linalg::ensure_shape(phi, "transition matrix", n, n)?;
        let c = max_abs(&(phi * theta * phi.transpose() - theta));
        if c > rep.ccr_residual {
            rep.ccr_residual = c;
            rep.ccr_worst_time = *t;
        }
        let e = max_abs(&(phi.transpose() * r_a * phi - r_a));
        if e > rep.energy_residual {
            rep.energy_residual = e;
            rep.energy_worst_time = *t;
        }
    }
    Ok(rep)
}

/// Like [`invariant_monitor`], but the energy of segment `s` is measured
/// against the state at its own start: `Φ(t)^T R_s Φ(t) = Φ(b_s)^T R_s Φ(b_s)`.
/// A segment with non-realizable dynamics has no Hamiltonian and reports
/// an infinite energy residual.
pub fn schedule_invariant_monitor(
    series: &PropagatorSeries,
    segments: &[Segment],
    ccr: &CommutationStructure,
) -> Result<InvariantReport> {
    let n = ccr.dim();
    let mut rep = invariant_monitor(series, ccr, &Matrix::zeros(n, n))?;
    rep.energy_residual = 0.0;
    rep.energy_worst_time = 0.0;

    let b = boundaries(segments);
    for (s, seg) in segments.iter().enumerate() {
        let r = match hamiltonian_from_dynamics(&seg.a, ccr) {
            Ok(r) => r,
            Err(Error::NotRealizable { .. }) => {
                rep.energy_residual = f64::INFINITY;
                rep.energy_worst_time = b[s];
                continue;
            }
            Err(e) => return Err(e),
        };
        let start = series.index_near(b[s]);
        let reference = series.maps[start].transpose() * &r * &series.maps[start];
        for k in start..series.len() {
            if series.times[k] > b[s + 1] + GRID_TOL * b[s + 1].max(1.0) {
                break;
            }
            let phi = &series.maps[k];
            let e = max_abs(&(phi.transpose() * &r * phi - &reference));
            if e > rep.energy_residual {
                rep.energy_residual = e;
                rep.energy_worst_time = series.times[k];
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;
    use std::f64::consts::PI;

    fn a_one_mode() -> Matrix {
        from_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 2.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
            &[2.0, 0.0, -2.0, 0.0],
        ])
    }

    fn a_momentum() -> Matrix {
        from_rows(&[
            &[0.0, 0.0, 0.0, -2.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, -2.0, 0.0, 2.0],
            &[0.0, 0.0, -2.0, 0.0],
        ])
    }

    fn measurement_schedule(t_end: f64) -> Vec<Segment> {
        vec![
            Segment::new(a_one_mode(), 20.0).unwrap(),
            Segment::new(Matrix::zeros(4, 4), 5.0).unwrap(),
            Segment::new(a_momentum(), t_end - 25.0).unwrap(),
        ]
    }

    #[test]
    fn uniform_grid_hits_end() {
        let g = uniform_grid(1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = uniform_grid(50.0, 0.01).unwrap();
        assert_eq!(g.len(), 5001);
        assert!(uniform_grid(1.0, 2.0).is_err());
        assert!(uniform_grid(0.0, 0.1).is_err());
    }

    #[test]
    fn zero_dynamics_stay_identity() {
        let s = propagate(&Matrix::zeros(4, 4), &uniform_grid(10.0, 0.5).unwrap()).unwrap();
        assert!(s.maps.iter().all(|m| *m == Matrix::identity(4, 4)));
        let avg = time_average(&s);
        assert!(avg
            .averages
            .iter()
            .all(|m| max_abs(&(m - Matrix::identity(4, 4))) < 1e-15));
    }

    #[test]
    fn one_mode_rotation_at_pi() {
        let grid = uniform_grid(PI, PI / 1000.0).unwrap();
        let s = propagate(&a_one_mode(), &grid).unwrap();
        let phi = s.maps.last().unwrap();
        assert!((phi[(2, 2)] - 1.0).abs() < 1e-10);
        assert!(phi[(2, 3)].abs() < 1e-10);
    }

    #[test]
    fn composition_matches_direct_exponential() {
        let grid = uniform_grid(20.0, 0.01).unwrap();
        let a = a_one_mode();
        let s = propagate(&a, &grid).unwrap();
        for k in (0..grid.len()).step_by(97) {
            let direct = expm(&(&a * grid[k])).unwrap();
            assert!(max_abs(&(&s.maps[k] - direct)) < 1e-10, "t = {}", grid[k]);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let a = Matrix::zeros(2, 2);
        assert!(matches!(
            propagate(&a, &[0.0, 1.0, 1.0]),
            Err(Error::Grid(_))
        ));
        assert!(matches!(propagate(&a, &[0.5, 1.0]), Err(Error::Grid(_))));
        assert!(matches!(propagate(&a, &[]), Err(Error::Grid(_))));
    }

    #[test]
    fn single_segment_schedule_equals_propagate() {
        let grid = uniform_grid(5.0, 0.05).unwrap();
        let seg = [Segment::new(a_one_mode(), 5.0).unwrap()];
        let a = propagate_schedule(&seg, &grid).unwrap();
        let b = propagate(&a_one_mode(), &grid).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schedule_errors() {
        assert!(matches!(
            propagate_schedule(&[], &[0.0, 1.0]),
            Err(Error::Schedule(_))
        ));
        let segs = measurement_schedule(30.0);
        // Boundary at 25 is skipped by a grid of step 2 ending at 30.
        let grid: Vec<f64> = (0..=15).map(|k| 2.0 * k as f64).collect();
        assert!(matches!(
            propagate_schedule(&segs, &grid),
            Err(Error::Schedule(_))
        ));
        let short = uniform_grid(28.0, 0.5).unwrap();
        assert!(matches!(
            propagate_schedule(&segs, &short),
            Err(Error::Schedule(_))
        ));
        assert!(Segment::new(Matrix::zeros(2, 2), 0.0).is_err());
    }

    #[test]
    fn measurement_schedule_is_frozen_while_disconnected() {
        let segs = measurement_schedule(40.0);
        let grid = schedule_grid(&segs, 0.01).unwrap();
        let s = propagate_schedule(&segs, &grid).unwrap();
        let at20 = s.index_near(20.0);
        assert!((s.times[at20] - 20.0).abs() < 1e-12);
        let ref_map = &s.maps[at20];
        assert!((ref_map[(0, 0)] - 1.0).abs() < 1e-12);
        for j in 1..4 {
            assert!(ref_map[(0, j)].abs() < 1e-12);
        }
        for k in at20..=s.index_near(25.0) {
            assert!(max_abs(&(&s.maps[k] - ref_map)) <= 1e-12);
        }
    }

    #[test]
    fn one_mode_averages_match_analytic() {
        let grid = uniform_grid(100.0, 0.01).unwrap();
        let avg = time_average(&propagate(&a_one_mode(), &grid).unwrap());
        for &t in &[10.0, 50.0, 100.0_f64] {
            let m = avg.at_index(avg.index_near(t));
            let (s, c) = (2.0 * t).sin_cos();
            assert!((m[(2, 0)] - (1.0 - s / (2.0 * t))).abs() < 1e-5);
            assert!((m[(2, 2)] - s / (2.0 * t)).abs() < 1e-5);
            assert!((m[(2, 3)] - (1.0 - c) / (2.0 * t)).abs() < 1e-5);
            assert_eq!(m[(2, 1)], 0.0);
        }
        let last = avg.averages.last().unwrap();
        assert!((last[(2, 0)] - 1.0).abs() < 0.005);
    }

    #[test]
    fn trapezoid_error_is_second_order() {
        let a = a_one_mode();
        let t = 7.3;
        let exact = exact_average(&a, t).unwrap();
        let err = |dt: f64| {
            let avg = time_average(&propagate(&a, &uniform_grid(t, dt).unwrap()).unwrap());
            max_abs(&(avg.averages.last().unwrap() - &exact))
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn exact_schedule_average_matches_quadrature() {
        let segs = measurement_schedule(60.0);
        let grid = schedule_grid(&segs, 0.005).unwrap();
        let avg = time_average(&propagate_schedule(&segs, &grid).unwrap());
        for &t in &[10.0, 22.0, 40.0, 60.0] {
            let exact = exact_schedule_average(&segs, t).unwrap();
            let got = avg.at_index(avg.index_near(t));
            assert!(max_abs(&(got - &exact)) < 1e-4, "t = {t}");
        }
    }

    #[test]
    fn invariants_hold_for_realizable_and_fail_otherwise() {
        let ccr = CommutationStructure::new(2).unwrap();
        let r_a = hamiltonian_from_dynamics(&a_one_mode(), &ccr).unwrap();
        let s = propagate(&a_one_mode(), &uniform_grid(100.0, 0.01).unwrap()).unwrap();
        let rep = invariant_monitor(&s, &ccr, &r_a).unwrap();
        assert!(rep.passes(1e-8), "{rep:?}");

        let s = propagate(&Matrix::zeros(4, 4), &uniform_grid(3.0, 0.1).unwrap()).unwrap();
        let rep = invariant_monitor(&s, &ccr, &Matrix::zeros(4, 4)).unwrap();
        assert_eq!(rep.ccr_residual, 0.0);
        assert_eq!(rep.energy_residual, 0.0);

        let ccr1 = CommutationStructure::new(1).unwrap();
        let s = propagate(&Matrix::identity(2, 2), &uniform_grid(2.0, 0.01).unwrap()).unwrap();
        let rep = invariant_monitor(&s, &ccr1, &Matrix::identity(2, 2)).unwrap();
        // Φ Θ Φ^T = e^{2t} Θ
        assert!((rep.ccr_residual - (4f64.exp() - 1.0)).abs() < 1e-8);
        assert!(!rep.passes(1e-8));
    }

    fn one_mode_aug(alpha: f64) -> AugmentedSystem {
        use crate::ccr::PlantSpec;
        use crate::synthesis::{assemble_augmented, ObserverSpec};
        let plant = PlantSpec::from_blocks(&[[1.0, 0.0]]).unwrap();
        let obs = ObserverSpec::unverified(
            &plant,
            Matrix::identity(2, 2),
            from_rows(&[&[alpha], &[0.0]]),
            from_rows(&[&[1.0, 0.0]]),
        )
        .unwrap();
        assemble_augmented(&plant, &obs).unwrap()
    }

    #[test]
    fn one_mode_observer_converges() {
        let rep = convergence_diagnostics(&one_mode_aug(-1.0), 100.0, 0.01).unwrap();
        assert!(rep.final_error <= 0.02, "{}", rep.final_error);
        // d(T) = sqrt(2 sin^2 2T + (1 - cos 2T)^2) / 2T <= 1/T
        assert!(
            rep.max_scaled_error <= 1.0 + 1e-4,
            "{}",
            rep.max_scaled_error
        );
        let c = rep.bound_constant.unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-12);
        assert!(rep.bounded && rep.converges, "{rep:?}");
        assert!(rep.decay_rate < -0.8, "{}", rep.decay_rate);
        assert!(rep.plant_output_drift < 1e-12);
        for s in &rep.samples {
            let t = s.t;
            let (sn, cs) = (2.0 * t).sin_cos();
            let expected = (2.0 * sn * sn + (1.0 - cs).powi(2)).sqrt() / (2.0 * t);
            assert!((s.error - expected).abs() < 1e-4, "T = {t}");
        }
    }

    #[test]
    fn decoupled_observer_does_not_converge() {
        let rep = convergence_diagnostics(&one_mode_aug(0.0), 100.0, 0.01).unwrap();
        assert!((rep.final_error - 1.0).abs() < 0.02);
        assert!(!rep.converges);
        assert!(!rep.bounded);
    }

    #[test]
    fn schedule_invariants() {
        let segs = measurement_schedule(100.0);
        let grid = schedule_grid(&segs, 0.01).unwrap();
        let s = propagate_schedule(&segs, &grid).unwrap();
        let ccr = CommutationStructure::new(2).unwrap();
        let rep = schedule_invariant_monitor(&s, &segs, &ccr).unwrap();
        assert!(rep.passes(1e-8), "{rep:?}");
    }
}
