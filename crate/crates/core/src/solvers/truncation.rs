//! Fock-truncation convergence by repeated doubling of `n_max`.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::{Observable, SimResult};
use crate::solvers::steady::solve_steady;

/// Absolute change below which two consecutive truncations agree.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;
/// Largest truncation the doubling loop will try.
pub const MAX_TRUNCATION: usize = 64;

pub const DEFAULT_SELECTION: [Observable; 5] = [
    Observable::PEe,
    Observable::PE1,
    Observable::PE2,
    Observable::NPhoton,
    Observable::Concurrence,
];

#[derive(Clone, Debug)]
pub struct TruncationLevel {
    pub n_max: usize,
    pub values: Vec<Option<f64>>,
    /// Largest absolute change against the previous level; `None` for the
    /// first level.
    pub change: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TruncationHistory {
    pub selection: Vec<Observable>,
    pub levels: Vec<TruncationLevel>,
    /// Smallest `n_max` whose observables agree with the next doubling.
    pub converged_n_max: usize,
}

impl TruncationHistory {
    /// Each doubling changed the observables less than the one before.
    pub fn changes_decrease(&self) -> bool {
        let changes: Vec<f64> = self.levels.iter().filter_map(|l| l.change).collect();
        changes.windows(2).all(|w| w[1] <= w[0])
    }
}

fn max_change(a: &[Option<f64>], b: &[Option<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

fn evaluate(params: &ModelParams, selection: &[Observable]) -> Result<Vec<Option<f64>>> {
    let ss = solve_steady(params)?;
    let r = SimResult::from_state(&ss.rho)?;
    Ok(selection.iter().map(|o| o.value(&r)).collect())
}

/// Doubles `params.n_max` until every selected steady-state observable moves
/// by less than [`CONVERGENCE_TOLERANCE`].
pub fn converge_truncation(
    params: &ModelParams,
    selection: &[Observable],
) -> Result<TruncationHistory> {
    params.validate()?;
    let mut n = params.n_max;
    let mut values = evaluate(params, selection)?;
    let mut levels = vec![TruncationLevel { n_max: n, values: values.clone(), change: None }];
    loop {
        let next = 2 * n;
        if next > MAX_TRUNCATION {
            return Err(Error::NoConvergence(MAX_TRUNCATION));
        }
        let next_values = evaluate(&params.with_n_max(next), selection)?;
        let change = max_change(&values, &next_values);
        levels.push(TruncationLevel { n_max: next, values: next_values.clone(), change: Some(change) });
        if change < CONVERGENCE_TOLERANCE {
            return Ok(TruncationHistory {
                selection: selection.to_vec(),
                levels,
                converged_n_max: n,
            });
        }
        n = next;
        values = next_values;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undriven_converges_immediately() {
        let p = ModelParams::antisymmetric(1.0, 0.0, 0.01, 1);
        let h = converge_truncation(&p, &DEFAULT_SELECTION).unwrap();
        assert_eq!(h.converged_n_max, 1);
        assert_eq!(h.levels.len(), 2);
        assert_eq!(h.levels[1].change, Some(0.0));
    }

    #[test]
    fn change_metric_treats_undefined_pairs() {
        assert_eq!(max_change(&[None, Some(1.0)], &[None, Some(1.5)]), 0.5);
        assert!(max_change(&[None], &[Some(0.0)]).is_infinite());
    }
}
