//! Declarative 1-D/2-D parameter grids evaluated on a bounded worker pool.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{ket, BasisLabel, Operator, QubitState};
use crate::model::ModelParams;
use crate::observables::{Observable, SimResult};
use crate::solvers::{evolve, solve_steady};

/// Parameter that a sweep axis can drive. The ratio axes are expressed in the
/// normalized units used by the figures; `DeltaOverKappa` sets both detunings
/// (`ω_C = ω_A`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    DeltaA,
    DeltaC,
    G0,
    PhiZ,
    Eta,
    Kappa,
    Gamma,
    G0OverKappa,
    GammaOverKappa,
    EtaOverGamma,
    DeltaOverKappa,
    PhiZOverPi,
}

impl SweepParam {
    pub const ALL: [SweepParam; 12] = [
        SweepParam::DeltaA,
        SweepParam::DeltaC,
        SweepParam::G0,
        SweepParam::PhiZ,
        SweepParam::Eta,
        SweepParam::Kappa,
        SweepParam::Gamma,
        SweepParam::G0OverKappa,
        SweepParam::GammaOverKappa,
        SweepParam::EtaOverGamma,
        SweepParam::DeltaOverKappa,
        SweepParam::PhiZOverPi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::DeltaA => "delta_a",
            SweepParam::DeltaC => "delta_c",
            SweepParam::G0 => "g0",
            SweepParam::PhiZ => "phi_z",
            SweepParam::Eta => "eta",
            SweepParam::Kappa => "kappa",
            SweepParam::Gamma => "gamma",
            SweepParam::G0OverKappa => "g0_over_kappa",
            SweepParam::GammaOverKappa => "gamma_over_kappa",
            SweepParam::EtaOverGamma => "eta_over_gamma",
            SweepParam::DeltaOverKappa => "delta_over_kappa",
            SweepParam::PhiZOverPi => "phi_z_over_pi",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    /// Ratio axes depend on other parameters and are applied last.
    fn is_ratio(self) -> bool {
        matches!(
            self,
            SweepParam::G0OverKappa
                | SweepParam::GammaOverKappa
                | SweepParam::EtaOverGamma
                | SweepParam::DeltaOverKappa
                | SweepParam::PhiZOverPi
        )
    }

    fn apply(self, p: &mut ModelParams, v: f64) {
        match self {
            SweepParam::DeltaA => p.delta_a = v,
            SweepParam::DeltaC => p.delta_c = v,
            SweepParam::G0 => p.g0 = v,
            SweepParam::PhiZ => p.phi_z = v,
            SweepParam::Eta => p.eta = v,
            SweepParam::Kappa => p.kappa = v,
            SweepParam::Gamma => p.gamma = v,
            SweepParam::G0OverKappa => p.g0 = v * p.kappa,
            SweepParam::GammaOverKappa => p.gamma = v * p.kappa,
            SweepParam::EtaOverGamma => p.eta = v * p.gamma,
            SweepParam::DeltaOverKappa => {
                p.delta_a = v * p.kappa;
                p.delta_c = v * p.kappa;
            }
            SweepParam::PhiZOverPi => p.phi_z = v * PI,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Self {
        Self { param, values }
    }

    pub fn linear(param: SweepParam, lo: f64, hi: f64, n: usize) -> Self {
        let values = if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        Self { param, values }
    }

    pub fn log(param: SweepParam, lo: f64, hi: f64, n: usize) -> Self {
        let mut axis = Self::linear(param, lo.log10(), hi.log10(), n);
        axis.values.iter_mut().for_each(|v| *v = 10f64.powf(*v));
        axis
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSweep(format!("axis {} is empty", self.param.name())));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep(format!("axis {} has non-finite values", self.param.name())));
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidSweep(format!(
                "axis {} is not strictly monotone",
                self.param.name()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepMode {
    Steady,
    /// Propagate `|gg,0⟩` to `t_end`, recording every `dt_out`. With
    /// `gamma_units` both are measured in `1/γ` instead of `1/κ`.
    Evolve { t_end: f64, dt_out: f64, gamma_units: bool },
}

/// Fock truncation used at each grid point.
#[derive(Clone, Debug, PartialEq)]
pub enum Truncation {
    /// `base.n_max` everywhere.
    Base,
    /// One `n_max` per value of the given axis (1 or 2).
    PerAxisValue { axis: usize, n_max: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    /// When set, `eta = eta_over_gamma · gamma` after the axes are applied.
    pub eta_over_gamma: Option<f64>,
    pub truncation: Truncation,
    pub mode: SweepMode,
    /// Observables checked by the sentinel rerun.
    pub observables: Vec<Observable>,
}

impl SweepSpec {
    pub fn steady(base: ModelParams, axis1: Axis, axis2: Option<Axis>) -> Self {
        Self {
            base,
            axis1,
            axis2,
            eta_over_gamma: None,
            truncation: Truncation::Base,
            mode: SweepMode::Steady,
            observables: Observable::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.param == self.axis1.param {
                return Err(Error::InvalidSweep("both axes drive the same parameter".into()));
            }
        }
        if let Truncation::PerAxisValue { axis, n_max } = &self.truncation {
            let len = match axis {
                1 => self.axis1.values.len(),
                2 => self.axis2.as_ref().map_or(0, |a| a.values.len()),
                _ => 0,
            };
            if len == 0 || len != n_max.len() {
                return Err(Error::InvalidSweep(format!(
                    "truncation table has {} entries for axis {axis} of length {len}",
                    n_max.len()
                )));
            }
            if n_max.contains(&0) {
                return Err(Error::InvalidTruncation(0));
            }
        }
        if let SweepMode::Evolve { t_end, dt_out, .. } = self.mode {
            if !(t_end > 0.0 && dt_out > 0.0 && dt_out <= t_end) {
                return Err(Error::InvalidSweep(format!(
                    "evolve horizon t_end={t_end}, dt_out={dt_out} is invalid"
                )));
            }
        }
        Ok(())
    }

    pub fn axes(&self) -> Vec<&Axis> {
        std::iter::once(&self.axis1).chain(self.axis2.as_ref()).collect()
    }

    pub fn grid_len(&self) -> usize {
        self.axis1.values.len() * self.axis2.as_ref().map_or(1, |a| a.values.len())
    }

    /// Axis indices of grid point `index` in row-major order.
    pub fn grid_indices(&self, index: usize) -> (usize, Option<usize>) {
        match &self.axis2 {
            Some(a2) => (index / a2.values.len(), Some(index % a2.values.len())),
            None => (index, None),
        }
    }

    pub fn axis_values(&self, index: usize) -> Vec<f64> {
        let (i, j) = self.grid_indices(index);
        let mut v = vec![self.axis1.values[i]];
        if let (Some(a2), Some(j)) = (&self.axis2, j) {
            v.push(a2.values[j]);
        }
        v
    }

    /// Model parameters at grid point `index`.
    pub fn params_at(&self, index: usize) -> ModelParams {
        let (i, j) = self.grid_indices(index);
        let mut p = self.base;
        let mut assignments = vec![(self.axis1.param, self.axis1.values[i])];
        if let (Some(a2), Some(j)) = (&self.axis2, j) {
            assignments.push((a2.param, a2.values[j]));
        }
        // Direct assignments first, then ratios.
        assignments.sort_by_key(|(param, _)| param.is_ratio());
        for (param, v) in assignments {
            param.apply(&mut p, v);
        }
        if let Some(r) = self.eta_over_gamma {
            p.eta = r * p.gamma;
        }
        p.n_max = match &self.truncation {
            Truncation::Base => self.base.n_max,
            Truncation::PerAxisValue { axis: 1, n_max } => n_max[i],
            Truncation::PerAxisValue { n_max, .. } => n_max[j.unwrap_or(0)],
        };
        p
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub axis_values: Vec<f64>,
    /// Output time for evolve sweeps, in the unit chosen by the mode.
    pub time: Option<f64>,
    pub result: Option<SimResult>,
    pub n_max_used: usize,
    pub residual: Option<f64>,
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn value(&self, o: Observable) -> Option<f64> {
        self.result.as_ref().and_then(|r| o.value(r))
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Steady sweeps: one row per grid point in row-major axis order.
    /// Evolve sweeps: one row per (grid point, output time).
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Row of steady-sweep grid point `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> &SweepRow {
        let n2 = self.spec.axis2.as_ref().map_or(1, |a| a.values.len());
        &self.rows[i * n2 + j]
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failed()).count()
    }
}

pub fn ground_state(params: &ModelParams) -> Result<Operator> {
    let sp = params.space()?;
    Ok(Operator::projector(sp, &ket(sp, BasisLabel::new(QubitState::G, QubitState::G, 0))))
}

/// Worker pool bounded to `workers` threads, or all cores for `None`.
pub(crate) fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| Error::InvalidSweep(e.to_string()))
}

fn failed_row(axis_values: Vec<f64>, n_max: usize, e: &Error) -> SweepRow {
    SweepRow {
        axis_values,
        time: None,
        result: None,
        n_max_used: n_max,
        residual: None,
        failure: Some(e.to_string()),
    }
}

fn steady_point(spec: &SweepSpec, index: usize) -> SweepRow {
    let params = spec.params_at(index);
    let axis_values = spec.axis_values(index);
    let solved = solve_steady(&params)
        .and_then(|ss| SimResult::from_state(&ss.rho).map(|r| (r, ss.residual)));
    match solved {
        Ok((result, residual)) => SweepRow {
            axis_values,
            time: None,
            result: Some(result),
            n_max_used: params.n_max,
            residual: Some(residual),
            failure: None,
        },
        Err(e) => failed_row(axis_values, params.n_max, &e),
    }
}

fn evolve_point(spec: &SweepSpec, index: usize, t_end: f64, dt_out: f64, gamma_units: bool) -> Vec<SweepRow> {
    let params = spec.params_at(index);
    let axis_values = spec.axis_values(index);
    let scale = if gamma_units { params.gamma } else { 1.0 };
    if gamma_units && scale <= 0.0 {
        let e = Error::InvalidSweep("gamma-scaled time axis needs gamma > 0".into());
        return vec![failed_row(axis_values, params.n_max, &e)];
    }
    let run = ground_state(&params).and_then(|rho0| evolve(&params, &rho0, t_end / scale, dt_out / scale));
    match run {
        Ok(traj) => traj
            .times
            .iter()
            .zip(traj.observables)
            .map(|(t, r)| SweepRow {
                axis_values: axis_values.clone(),
                time: Some(t * scale),
                result: Some(r),
                n_max_used: params.n_max,
                residual: None,
                failure: None,
            })
            .collect(),
        Err(e) => vec![failed_row(axis_values, params.n_max, &e)],
    }
}

fn evaluate_point(spec: &SweepSpec, index: usize) -> Vec<SweepRow> {
    match spec.mode {
        SweepMode::Steady => vec![steady_point(spec, index)],
        SweepMode::Evolve { t_end, dt_out, gamma_units } => {
            evolve_point(spec, index, t_end, dt_out, gamma_units)
        }
    }
}

/// Evaluates every grid point. `workers = None` uses all available cores;
/// the output does not depend on the worker count.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let pool = pool(workers)?;
    let per_point: Vec<Vec<SweepRow>> =
        pool.install(|| (0..spec.grid_len()).into_par_iter().map(|i| evaluate_point(spec, i)).collect());
    Ok(SweepResult { spec: spec.clone(), rows: per_point.into_iter().flatten().collect() })
}

/// Observable drift allowed between `n_max` and `2·n_max` at sentinel points.
pub const SENTINEL_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct SentinelReport {
    pub grid_index: usize,
    pub axis_values: Vec<f64>,
    pub n_max: usize,
    /// Largest drift over the requested observables: absolute for values up
    /// to 1, relative above that.
    pub drift: f64,
    pub flagged: bool,
}

fn drift(a: Option<f64>, b: Option<f64>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() / a.abs().max(1.0),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

fn spread(len: usize, count: usize) -> Vec<usize> {
    if len <= count {
        return (0..len).collect();
    }
    (0..count).map(|k| (k * (len - 1) + (count - 1) / 2) / (count - 1)).collect()
}

/// Grid points used for the truncation rerun: evenly spread along a 1-D
/// axis, along the diagonal of a 2-D grid.
pub fn sentinel_indices(spec: &SweepSpec, count: usize) -> Vec<usize> {
    let Some(a2) = &spec.axis2 else {
        return spread(spec.axis1.values.len(), count);
    };
    let (n1, n2) = (spec.axis1.values.len(), a2.values.len());
    let count = count.min(n1.max(n2));
    let mut v: Vec<usize> = (0..count)
        .map(|k| {
            let frac = |n: usize| {
                if count == 1 { 0 } else { (k * (n - 1) + (count - 1) / 2) / (count - 1) }
            };
            frac(n1) * n2 + frac(n2)
        })
        .collect();
    v.dedup();
    v
}

/// Reruns `count` steady-sweep grid points at doubled truncation and reports
/// the drift of the requested observables.
pub fn sentinel_check(result: &SweepResult, count: usize, workers: Option<usize>) -> Result<Vec<SentinelReport>> {
    let spec = &result.spec;
    if spec.mode != SweepMode::Steady {
        return Err(Error::InvalidSweep("sentinel checks apply to steady sweeps".into()));
    }
    let pool = pool(workers)?;
    let indices = sentinel_indices(spec, count);
    let reports = pool.install(|| {
        indices
            .par_iter()
            .map(|&index| {
                let row = &result.rows[index];
                let params = spec.params_at(index);
                let doubled = params.with_n_max(2 * params.n_max);
                let rerun = solve_steady(&doubled).and_then(|ss| SimResult::from_state(&ss.rho));
                let drift = match (&row.result, rerun) {
                    (Some(r), Ok(r2)) => spec
                        .observables
                        .iter()
                        .map(|o| drift(o.value(r), o.value(&r2)))
                        .fold(0.0, f64::max),
                    _ => f64::INFINITY,
                };
                SentinelReport {
                    grid_index: index,
                    axis_values: row.axis_values.clone(),
                    n_max: params.n_max,
                    drift,
                    flagged: !(drift < SENTINEL_TOLERANCE),
                }
            })
            .collect()
    });
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_validation() {
        assert!(Axis::new(SweepParam::G0, vec![]).validate().is_err());
        assert!(Axis::new(SweepParam::G0, vec![0.1, 0.1]).validate().is_err());
        assert!(Axis::new(SweepParam::G0, vec![0.3, 0.2, 0.1]).validate().is_ok());
        assert!(Axis::new(SweepParam::G0, vec![0.1, f64::NAN]).validate().is_err());
        let log = Axis::log(SweepParam::G0OverKappa, 0.02, 2.0, 3);
        assert!((log.values[1] - 0.2).abs() < 1e-15 && (log.values[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in SweepParam::ALL {
            assert_eq!(SweepParam::parse(p.name()).unwrap(), p);
        }
        assert!(SweepParam::parse("g1").is_err());
    }

    #[test]
    fn ratios_apply_after_direct_assignments() {
        let base = ModelParams { kappa: 2.0, ..ModelParams::default() };
        let mut spec = SweepSpec::steady(
            base,
            Axis::new(SweepParam::EtaOverGamma, vec![3.0]),
            Some(Axis::new(SweepParam::Gamma, vec![0.5])),
        );
        let p = spec.params_at(0);
        assert_eq!((p.gamma, p.eta), (0.5, 1.5));

        spec.axis1 = Axis::new(SweepParam::DeltaOverKappa, vec![0.25]);
        spec.eta_over_gamma = Some(5.0);
        let p = spec.params_at(0);
        assert_eq!((p.delta_a, p.delta_c, p.eta), (0.5, 0.5, 2.5));
    }

    #[test]
    fn truncation_table_follows_axis() {
        let mut spec = SweepSpec::steady(
            ModelParams::default(),
            Axis::new(SweepParam::G0, vec![0.1, 0.2, 0.3]),
            Some(Axis::new(SweepParam::Gamma, vec![1.0, 0.1])),
        );
        spec.truncation = Truncation::PerAxisValue { axis: 2, n_max: vec![7, 3] };
        assert_eq!(spec.params_at(4).n_max, 7);
        assert_eq!(spec.params_at(5).n_max, 3);
        assert_eq!(spec.axis_values(5), vec![0.3, 0.1]);
        spec.truncation = Truncation::PerAxisValue { axis: 2, n_max: vec![7] };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sentinel_spread() {
        assert_eq!(spread(3, 5), vec![0, 1, 2]);
        assert_eq!(spread(9, 5), vec![0, 2, 4, 6, 8]);
        let mut spec = SweepSpec::steady(
            ModelParams::default(),
            Axis::log(SweepParam::G0OverKappa, 0.02, 2.0, 60),
            Some(Axis::new(SweepParam::GammaOverKappa, vec![1.0, 0.1, 0.01, 0.001])),
        );
        let v = sentinel_indices(&spec, 5);
        let js: Vec<usize> = v.iter().map(|i| i % 4).collect();
        assert_eq!(js, vec![0, 1, 2, 2, 3]);
        assert_eq!((v[0], v[4]), (0, 239));
        spec.axis2 = None;
        assert_eq!(sentinel_indices(&spec, 5), vec![0, 15, 30, 44, 59]);
    }

    #[test]
    fn failed_points_are_rows_not_errors() {
        // γ = 0 with g0 = 0 leaves the qubits undamped: no unique steady state.
        let base = ModelParams { g0: 0.0, eta: 0.0, gamma: 0.0, n_max: 1, ..ModelParams::default() };
        let spec = SweepSpec::steady(base, Axis::new(SweepParam::Gamma, vec![0.0, 0.1]), None);
        let r = run_sweep(&spec, Some(1)).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows[0].failed() && !r.rows[1].failed());
        assert_eq!(r.failures(), 1);
    }
}
