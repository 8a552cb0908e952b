//! Fixed-step RK4 propagation of the master equation.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::Operator;
use crate::model::{CompressedGenerator, ModelParams};
use crate::observables::SimResult;

/// Allowed trace drift between two recorded outputs.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Output times in units of `1/κ`.
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    pub observables: Vec<SimResult>,
    /// Internal RK4 steps per output interval.
    pub substeps: usize,
}

impl Trajectory {
    pub fn max_trace_error(&self) -> f64 {
        self.states.iter().map(|r| (r.trace() - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max)
    }
}

/// Internal step `h = min(dt_out, 0.01 / max(κ, γ, η, g₀, |Δ_A|, |Δ_C|, 1))`,
/// rounded down so that it divides `dt_out`. Returns the number of steps per
/// output interval.
pub fn substeps_per_output(params: &ModelParams, dt_out: f64) -> usize {
    let h = dt_out.min(0.01 / params.max_rate());
    ((dt_out / h) - 1e-9).ceil().max(1.0) as usize
}

struct Rk4 {
    generator: CompressedGenerator,
    k: [Vec<C64>; 4],
    scratch: Vec<C64>,
}

impl Rk4 {
    fn new(generator: CompressedGenerator) -> Self {
        let n = generator.dim();
        let zeros = || vec![C64::new(0.0, 0.0); n];
        Self { generator, k: [zeros(), zeros(), zeros(), zeros()], scratch: zeros() }
    }

    fn step(&mut self, y: &mut [C64], h: f64) {
        let g = &self.generator;
        let [k1, k2, k3, k4] = &mut self.k;
        let s = &mut self.scratch;
        g.apply_into(y, k1);
        for i in 0..y.len() {
            s[i] = y[i] + k1[i] * (0.5 * h);
        }
        g.apply_into(s, k2);
        for i in 0..y.len() {
            s[i] = y[i] + k2[i] * (0.5 * h);
        }
        g.apply_into(s, k3);
        for i in 0..y.len() {
            s[i] = y[i] + k3[i] * h;
        }
        g.apply_into(s, k4);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }

    fn advance(&mut self, y: &mut [C64], h: f64, steps: usize) {
        for _ in 0..steps {
            self.step(y, h);
        }
    }
}

fn trace_of(v: &[C64], dim: usize) -> C64 {
    (0..dim).map(|i| v[i * dim + i]).sum()
}

/// Propagates `rho0` to `t_end`, recording every `dt_out`.
pub fn evolve(params: &ModelParams, rho0: &Operator, t_end: f64, dt_out: f64) -> Result<Trajectory> {
    evolve_with_substeps(params, rho0, t_end, dt_out, substeps_per_output(params, dt_out))
}

/// As [`evolve`] with an explicit number of RK4 steps per output interval.
pub fn evolve_with_substeps(
    params: &ModelParams,
    rho0: &Operator,
    t_end: f64,
    dt_out: f64,
    substeps: usize,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParams { name: "t_end", reason: format!("{t_end} must be > 0") });
    }
    if !(dt_out > 0.0 && dt_out <= t_end) {
        return Err(Error::InvalidParams {
            name: "dt_out",
            reason: format!("{dt_out} must lie in (0, t_end]"),
        });
    }
    let space = params.space()?;
    if rho0.space() != space {
        return Err(Error::space_mismatch(space, rho0.space()));
    }
    let d = space.total_dim();
    let outputs = ((t_end / dt_out) - 1e-9).ceil() as usize;
    let mut rk = Rk4::new(CompressedGenerator::build(params)?);
    let mut y: Vec<C64> = rho0.matrix().iter().copied().collect();
    let mut trial = y.clone();

    let mut times = Vec::with_capacity(outputs + 1);
    let mut states = Vec::with_capacity(outputs + 1);
    let mut observables = Vec::with_capacity(outputs + 1);
    times.push(0.0);
    observables.push(SimResult::from_state(rho0)?);
    states.push(rho0.clone());

    for k in 1..=outputs {
        let before = trace_of(&y, d);
        trial.copy_from_slice(&y);
        rk.advance(&mut trial, dt_out / substeps as f64, substeps);
        let mut drift = (trace_of(&trial, d) - before).norm();
        if drift > TRACE_DRIFT_LIMIT {
            // Retry the interval once at half the step.
            trial.copy_from_slice(&y);
            rk.advance(&mut trial, dt_out / (2 * substeps) as f64, 2 * substeps);
            drift = (trace_of(&trial, d) - before).norm();
            if drift > TRACE_DRIFT_LIMIT {
                return Err(Error::StepUnstable { time: k as f64 * dt_out, drift });
            }
        }
        std::mem::swap(&mut y, &mut trial);
        let rho = Operator::from_matrix(space, DMatrix::from_column_slice(d, d, &y))?;
        times.push(k as f64 * dt_out);
        observables.push(SimResult::from_state(&rho)?);
        states.push(rho);
    }
    Ok(Trajectory { times, states, observables, substeps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{ket, BasisLabel, QubitState::G};

    fn ground(params: &ModelParams) -> Operator {
        let sp = params.space().unwrap();
        Operator::projector(sp, &ket(sp, BasisLabel::new(G, G, 0)))
    }

    #[test]
    fn step_rule() {
        let p = ModelParams::antisymmetric(4.0, 0.02, 0.001, 2);
        // h = min(0.5, 0.01/4) = 0.0025
        assert_eq!(substeps_per_output(&p, 0.5), 200);
        let slow = ModelParams { g0: 0.1, eta: 0.01, ..p };
        assert_eq!(substeps_per_output(&slow, 0.05), 5);
        assert_eq!(substeps_per_output(&slow, 0.001), 1);
    }

    #[test]
    fn rejects_bad_horizon() {
        let p = ModelParams::antisymmetric(1.0, 0.1, 0.1, 1);
        let rho = ground(&p);
        assert!(evolve(&p, &rho, 0.0, 0.1).is_err());
        assert!(evolve(&p, &rho, 1.0, 2.0).is_err());
    }

    #[test]
    fn undriven_vacuum_is_stationary() {
        let p = ModelParams::antisymmetric(1.0, 0.0, 0.1, 2);
        let rho = ground(&p);
        let tr = evolve(&p, &rho, 1.0, 0.25).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!((&tr.states[4] - &rho).max_abs() < 1e-15);
    }
}
