//! Per-step error and energy diagnostics and post-run analysis of error
//! histories: plateau detection, decay-rate fits and observed orders.

use serde::Serialize;

use crate::gas::{
    auxiliary_functional, relative_dissipation, relative_energy, GasLaw, SampledState, StateBounds,
};
use crate::mesh::{l2_distance, l2_error_trapezoid, Grid1D};
use crate::reference::ManufacturedSolution;
use crate::scheme::{DiscreteState, StepReport};
use crate::{Error, Result, Scalar};

/// Weight of `G` in the modified relative energy `H + delta G`. Only an upper
/// bound is known for it; this value is a convention.
pub const DEFAULT_DELTA: f64 = 0.1;

/// One row of the per-step time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSeriesRecord<T> {
    pub t: T,
    /// Against the exact reference state.
    pub l2_error: T,
    /// `l2_error` divided by its value at `t = 0`.
    pub l2_error_normalized: T,
    /// Against the projected reference state.
    pub l2_error_vs_projected: T,
    pub rel_energy: T,
    pub aux_g: T,
    pub mod_energy: T,
    pub dissipation_d: T,
    pub newton_iterations: usize,
    pub residual_max_norm: T,
    pub a1h_pass: bool,
}

/// Computes every diagnostic of `state` against the reference at `state.t`.
/// `l2_error_normalized` is left equal to `l2_error`.
#[allow(clippy::too_many_arguments)]
pub fn record_step<T: Scalar, L: GasLaw<T>>(
    state: &DiscreteState<T>,
    reference: &ManufacturedSolution<T>,
    grid: &Grid1D<T>,
    law: &L,
    gamma: T,
    delta: T,
    bounds: &StateBounds<T>,
    report: Option<&StepReport<T>>,
) -> Result<TimeSeriesRecord<T>> {
    let t = state.t;
    let v = state.nodal_velocity();
    let projected = reference.projected_reference(grid, t);

    let l2_error = l2_error_trapezoid(
        &state.rho,
        &v,
        |x| reference.density(x, t),
        |x| reference.velocity(x, t),
        grid,
    )?;
    let l2_error_vs_projected = l2_distance(&state.rho, &v, &projected.rho, &projected.v, grid)?;

    let sampled = SampledState::from_discrete(grid, &state.rho, &v)?;
    let sampled_ref = SampledState::from_discrete(grid, &projected.rho, &projected.v)?;
    let rel_energy = relative_energy(&sampled, &sampled_ref, grid, law)?;
    let aux_g = auxiliary_functional(grid, &state.rho, &v, &projected.rho, &projected.v)?;
    let dissipation_d = relative_dissipation(grid, &v, &projected.rho, &projected.v, gamma)?;
    let a1h_pass = crate::gas::check_assumption_a1h(&state.rho, &v, bounds).pass;

    Ok(TimeSeriesRecord {
        t,
        l2_error,
        l2_error_normalized: l2_error,
        l2_error_vs_projected,
        rel_energy,
        aux_g,
        mod_energy: rel_energy + delta * aux_g,
        dissipation_d,
        newton_iterations: report.map_or(0, |r| r.newton_iterations),
        residual_max_norm: report.map_or(T::zero(), |r| r.final_residual_max_norm),
        a1h_pass,
    })
}

/// Streams records and normalises the error by the first one seen.
#[derive(Debug, Clone)]
pub struct Recorder<T, L> {
    pub grid: Grid1D<T>,
    pub reference: ManufacturedSolution<T>,
    pub law: L,
    pub gamma: T,
    pub delta: T,
    pub bounds: StateBounds<T>,
    initial_error: Option<T>,
}

impl<T: Scalar, L: GasLaw<T>> Recorder<T, L> {
    pub fn new(
        grid: Grid1D<T>,
        reference: ManufacturedSolution<T>,
        law: L,
        delta: T,
        bounds: StateBounds<T>,
    ) -> Self {
        Self {
            grid,
            gamma: reference.gamma,
            reference,
            law,
            delta,
            bounds,
            initial_error: None,
        }
    }

    pub fn record(&mut self, state: &DiscreteState<T>, report: Option<&StepReport<T>>) -> Result<TimeSeriesRecord<T>> {
        let mut rec = record_step(
            state,
            &self.reference,
            &self.grid,
            &self.law,
            self.gamma,
            self.delta,
            &self.bounds,
            report,
        )?;
        let e0 = *self.initial_error.get_or_insert(rec.l2_error);
        if e0 > T::zero() {
            rec.l2_error_normalized = rec.l2_error / e0;
        }
        Ok(rec)
    }
}

/// Thresholds for [`detect_plateau`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateauConfig {
    /// Relative half-width of the band around the tail mean.
    pub band: f64,
    /// Onset is where the error enters `[level / f, level * f]` for good.
    pub onset_factor: f64,
    /// Shortest tail, as a fraction of the series, accepted as a plateau.
    pub min_tail_fraction: f64,
    /// The decay fit uses `t <= fit_fraction * onset`.
    pub fit_fraction: f64,
    /// Width (in time units) of the centred moving average applied before
    /// the band and onset tests; `0` disables it. Set it to the forcing
    /// period when the error floor oscillates.
    pub smoothing_window: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            band: 0.25,
            onset_factor: 2.0,
            min_tail_fraction: 0.1,
            fit_fraction: 0.8,
            smoothing_window: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateauReport {
    /// Mean error over the flat tail; `None` when the error never settles.
    pub plateau_level: Option<f64>,
    pub plateau_onset_time: Option<f64>,
    /// Fitted exponential rate `lambda` in `e ~ exp(-lambda t)`.
    pub decay_rate: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
}

impl PlateauReport {
    pub fn has_plateau(&self) -> bool {
        self.plateau_level.is_some()
    }
}

/// Least-squares slope and intercept of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 3 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn fit_decay(times: &[f64], errors: &[f64], t_end: f64) -> (Option<f64>, Option<(f64, f64)>) {
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(errors)
        .filter(|(t, e)| **t <= t_end && **e > 0.0)
        .map(|(t, e)| (*t, e.ln()))
        .unzip();
    match linear_fit(&xs, &ys) {
        Some((slope, _)) if slope < 0.0 => (Some(-slope), Some((xs[0], *xs.last().unwrap()))),
        _ => (None, None),
    }
}

/// Moving average over `width` time units. Windows are centred where they
/// fit and shifted inwards at the ends, so every window spans `width`.
fn moving_average(times: &[f64], values: &[f64], width: f64) -> Vec<f64> {
    if !(width > 0.0) {
        return values.to_vec();
    }
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    let (first, last) = (times[0], times[times.len() - 1]);
    let (mut lo, mut hi) = (0, 0);
    times
        .iter()
        .map(|&t| {
            let start = (t - 0.5 * width).min(last - width).max(first);
            while times[lo] < start {
                lo += 1;
            }
            while hi < times.len() && times[hi] <= start + width {
                hi += 1;
            }
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Locates the error plateau of a history and fits the decay before it.
pub fn detect_plateau(times: &[f64], errors: &[f64], cfg: &PlateauConfig) -> Result<PlateauReport> {
    let n = errors.len();
    if times.len() != n {
        return Err(Error::Analysis(format!("{} times for {n} errors", times.len())));
    }
    if n < 10 {
        return Err(Error::Analysis(format!("need at least 10 samples, got {n}")));
    }
    if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(Error::Analysis("errors must be finite and non-negative".into()));
    }

    let smooth = moving_average(times, errors, cfg.smoothing_window);
    let mut start = None;
    let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
    for s in (0..n).rev() {
        sum += smooth[s];
        lo = lo.min(smooth[s]);
        hi = hi.max(smooth[s]);
        let mean = sum / (n - s) as f64;
        if hi <= (1.0 + cfg.band) * mean && lo >= (1.0 - cfg.band) * mean {
            start = Some(s);
        }
    }
    let tail_ok = start.filter(|&s| (n - s) as f64 >= cfg.min_tail_fraction * n as f64);

    let Some(s) = tail_ok else {
        let (decay_rate, fit_window) = fit_decay(times, errors, f64::INFINITY);
        return Ok(PlateauReport {
            plateau_level: None,
            plateau_onset_time: None,
            decay_rate,
            fit_window,
        });
    };
    let level = errors[s..].iter().sum::<f64>() / (n - s) as f64;
    let (upper, lower) = (level * cfg.onset_factor, level / cfg.onset_factor);
    let onset = smooth
        .iter()
        .rposition(|&e| e > upper || e < lower)
        .map_or(0, |i| i + 1)
        .min(n - 1);
    let onset_time = times[onset];
    let (decay_rate, fit_window) = fit_decay(times, errors, times[0] + cfg.fit_fraction * (onset_time - times[0]));
    Ok(PlateauReport {
        plateau_level: Some(level),
        plateau_onset_time: Some(onset_time),
        decay_rate,
        fit_window,
    })
}

/// Observed orders `log(p_{k-1} / p_k) / log(h_{k-1} / h_k)` between
/// consecutive `(h, plateau)` pairs.
pub fn convergence_table(levels: &[(f64, f64)]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::Analysis("need at least two refinement levels".into()));
    }
    if let Some((h, p)) = levels.iter().find(|(h, p)| !(*h > 0.0 && *p > 0.0)) {
        return Err(Error::Analysis(format!("non-positive entry (h = {h}, plateau = {p})")));
    }
    Ok(levels
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect())
}
