//! Time-domain runs behind the two dynamics panels.

use std::f64::consts::SQRT_2;

use nalgebra::Matrix4;
use rayon::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::model::ModelParams;
use crate::observables::two_qubit_state;
use crate::solvers::evolve;

use super::presets::Preset;
use super::sweep::{ground_state, pool, SweepMode};

#[derive(Clone, Debug)]
pub struct DynamicsSeries {
    pub params: ModelParams,
    /// Times in units of `1/κ`.
    pub times: Vec<f64>,
    pub p_ee: Vec<f64>,
    pub concurrence: Vec<f64>,
}

impl DynamicsSeries {
    pub fn gamma_times(&self) -> Vec<f64> {
        self.times.iter().map(|t| t * self.params.gamma).collect()
    }

    /// Largest sample of `values` and its time.
    fn peak(&self, values: &[f64]) -> (f64, f64) {
        values
            .iter()
            .zip(&self.times)
            .fold((f64::NEG_INFINITY, 0.0), |acc, (&v, &t)| if v > acc.0 { (v, t) } else { acc })
    }

    /// `(max P_ee, time of max)`.
    pub fn p_ee_peak(&self) -> (f64, f64) {
        self.peak(&self.p_ee)
    }

    /// `(max concurrence, time of max)`.
    pub fn concurrence_peak(&self) -> (f64, f64) {
        self.peak(&self.concurrence)
    }
}

#[derive(Clone, Debug)]
pub struct AtomSnapshot {
    pub time: f64,
    pub rho_atom: Matrix4<C64>,
}

#[derive(Clone, Debug)]
pub struct DynamicsBundle {
    pub series: Vec<DynamicsSeries>,
    /// Reduced two-qubit state at `t = π/(2√2η)` (panel b only).
    pub snapshot: Option<AtomSnapshot>,
}

/// Outputs per snapshot run.
const SNAPSHOT_OUTPUTS: f64 = 400.0;

/// Propagates `|gg,0⟩` to `t` and returns the reduced two-qubit state.
pub fn atom_state_at(params: &ModelParams, t: f64) -> Result<Matrix4<C64>> {
    let rho0 = ground_state(params)?;
    let traj = evolve(params, &rho0, t, t / SNAPSHOT_OUTPUTS)?;
    Ok(two_qubit_state(traj.states.last().expect("trajectory has an initial state")))
}

/// Runs [`Preset::Fig5a`] or [`Preset::Fig5b`]. Any other preset yields an
/// empty bundle.
pub fn fig5_dynamics(preset: Preset, workers: Option<usize>) -> Result<DynamicsBundle> {
    if !matches!(preset, Preset::Fig5a | Preset::Fig5b) {
        return Ok(DynamicsBundle { series: Vec::new(), snapshot: None });
    }
    let spec = preset.spec();
    let SweepMode::Evolve { t_end, dt_out, gamma_units } = spec.mode else {
        unreachable!("dynamics presets evolve");
    };
    let run = |index: usize| -> Result<DynamicsSeries> {
        let params = spec.params_at(index);
        let scale = if gamma_units { params.gamma } else { 1.0 };
        let traj = evolve(&params, &ground_state(&params)?, t_end / scale, dt_out / scale)?;
        Ok(DynamicsSeries {
            params,
            p_ee: traj.observables.iter().map(|r| r.p_ee).collect(),
            concurrence: traj.observables.iter().map(|r| r.concurrence).collect(),
            times: traj.times,
        })
    };
    let pool = pool(workers)?;
    let series = pool.install(|| (0..spec.grid_len()).into_par_iter().map(run).collect::<Result<Vec<_>>>())?;
    let snapshot = match preset {
        Preset::Fig5b => {
            let params = series[0].params;
            let time = std::f64::consts::PI / (2.0 * SQRT_2 * params.eta);
            Some(AtomSnapshot { time, rho_atom: atom_state_at(&params, time)? })
        }
        _ => None,
    };
    Ok(DynamicsBundle { series, snapshot })
}
