//! Post-processing of sweep tables: contours, widths, boundaries and peaks.

use std::f64::consts::SQRT_2;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::model::ModelParams;
use crate::observables::{two_qubit_state, Observable, SimResult};
use crate::solvers::solve_steady;

use super::sweep::{SweepParam, SweepResult, SweepRow};

/// Steady-sweep field as `field[i][j]` over (axis1, axis2).
pub fn field_2d(result: &SweepResult, f: impl Fn(&SweepRow) -> Option<f64>) -> Vec<Vec<Option<f64>>> {
    let n1 = result.spec.axis1.values.len();
    let n2 = result.spec.axis2.as_ref().map_or(1, |a| a.values.len());
    (0..n1).map(|i| (0..n2).map(|j| f(result.at(i, j))).collect()).collect()
}

pub fn log10_xi(row: &SweepRow) -> Option<f64> {
    row.result.as_ref().and_then(SimResult::log10_xi)
}

/// Fractional position where the segment `(a, b)` crosses `level`.
fn crossing(a: f64, b: f64, level: f64) -> Option<f64> {
    let (da, db) = (a - level, b - level);
    if da == 0.0 {
        Some(0.0)
    } else if db == 0.0 {
        Some(1.0)
    } else if da * db < 0.0 {
        Some(da / (da - db))
    } else {
        None
    }
}

fn lerp(values: &[f64], pos: f64) -> f64 {
    let k = (pos.floor() as usize).min(values.len() - 1);
    if k + 1 >= values.len() {
        return values[k];
    }
    values[k] + (values[k + 1] - values[k]) * (pos - k as f64)
}

/// Fractional grid index of `x` on a monotone axis, or `None` if outside.
pub fn fractional_index(values: &[f64], x: f64) -> Option<f64> {
    values.windows(2).enumerate().find_map(|(k, w)| {
        let (lo, hi) = (w[0].min(w[1]), w[0].max(w[1]));
        (lo <= x && x <= hi).then(|| k as f64 + (x - w[0]) / (w[1] - w[0]))
    })
}

/// Points where a 2-D field crosses `level`, interpolated along grid edges.
pub fn contour_points(result: &SweepResult, field: &[Vec<Option<f64>>], level: f64) -> Vec<(f64, f64)> {
    let a1 = &result.spec.axis1.values;
    let Some(a2) = result.spec.axis2.as_ref().map(|a| &a.values) else {
        return Vec::new();
    };
    let mut points = Vec::new();
    for i in 0..a1.len() {
        for j in 0..a2.len() {
            let Some(v) = field[i][j] else { continue };
            if let Some(Some(w)) = field.get(i + 1).map(|r| r[j]) {
                if let Some(s) = crossing(v, w, level) {
                    points.push((lerp(a1, i as f64 + s), a2[j]));
                }
            }
            if let Some(Some(w)) = field[i].get(j + 1) {
                if let Some(s) = crossing(v, *w, level) {
                    points.push((a1[i], lerp(a2, j as f64 + s)));
                }
            }
        }
    }
    points
}

/// Width along axis2 of the connected `field < level` interval that contains
/// `center`, for every axis1 row. `None` when the center itself is not below
/// the level.
pub fn interval_widths(
    result: &SweepResult,
    field: &[Vec<Option<f64>>],
    level: f64,
    center: f64,
) -> Vec<Option<f64>> {
    let Some(a2) = result.spec.axis2.as_ref().map(|a| &a.values) else {
        return Vec::new();
    };
    let c = a2
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - center).abs().total_cmp(&(y.1 - center).abs()))
        .map_or(0, |(k, _)| k);
    let below = |v: Option<f64>| v.is_some_and(|v| v < level);
    field
        .iter()
        .map(|row| {
            if !below(row[c]) {
                return None;
            }
            let mut lo = c;
            while lo > 0 && below(row[lo - 1]) {
                lo -= 1;
            }
            let mut hi = c;
            while hi + 1 < row.len() && below(row[hi + 1]) {
                hi += 1;
            }
            let edge = |inner: usize, outer: usize| match (row[inner], row[outer]) {
                (Some(a), Some(b)) => crossing(a, b, level).map_or(a2[inner], |s| a2[inner] + (a2[outer] - a2[inner]) * s),
                _ => a2[inner],
            };
            let left = if lo > 0 { edge(lo, lo - 1) } else { a2[0] };
            let right = if hi + 1 < row.len() { edge(hi, hi + 1) } else { a2[hi] };
            Some((right - left).abs())
        })
        .collect()
}

/// Concurrence level taken as the edge of the strongly entangled region.
pub const ENTANGLED_LEVEL: f64 = 0.45;

#[derive(Clone, Debug)]
pub struct BoundaryReport {
    pub level: f64,
    /// Per η/γ column: (η/γ, contour position along g₀ in grid cells minus
    /// the position of `g₀² = 2√2ηκ`). `None` when either is off the grid.
    pub coupling_side: Vec<(f64, Option<f64>)>,
    /// Per g₀ row: (g₀/κ, contour position along η/γ minus the position of
    /// `√2η = γ`), in grid cells.
    pub drive_side: Vec<(f64, Option<f64>)>,
    /// Smallest concurrence where `g₀² ≥ 4·2√2ηκ` and `√2η ≥ 4γ`.
    pub deep_inside_min: Option<f64>,
    /// Largest concurrence on the weakest-drive column.
    pub weak_drive_max: Option<f64>,
}

impl BoundaryReport {
    fn max_abs(v: &[(f64, Option<f64>)]) -> Option<f64> {
        v.iter().filter_map(|(_, d)| d.map(f64::abs)).reduce(f64::max)
    }

    pub fn max_coupling_deviation(&self) -> Option<f64> {
        Self::max_abs(&self.coupling_side)
    }

    pub fn max_drive_deviation(&self) -> Option<f64> {
        Self::max_abs(&self.drive_side)
    }
}

fn first_crossing(values: &[Option<f64>], level: f64) -> Option<f64> {
    values.windows(2).enumerate().find_map(|(k, w)| match (w[0], w[1]) {
        (Some(a), Some(b)) if a < level && b >= level => crossing(a, b, level).map(|s| k as f64 + s),
        _ => None,
    })
}

/// Compares the concurrence contour of a (g₀/κ, η/γ) map with the analytic
/// boundaries `g₀² = 2√2ηκ` and `√2η = γ`. Deviations are reported, not
/// judged.
pub fn entanglement_boundary_check(result: &SweepResult) -> BoundaryReport {
    let spec = &result.spec;
    let level = ENTANGLED_LEVEL;
    let shaped = spec.axis1.param == SweepParam::G0OverKappa
        && spec.axis2.as_ref().is_some_and(|a| a.param == SweepParam::EtaOverGamma);
    if !shaped {
        return BoundaryReport {
            level,
            coupling_side: Vec::new(),
            drive_side: Vec::new(),
            deep_inside_min: None,
            weak_drive_max: None,
        };
    }
    let g0s = &spec.axis1.values;
    let ratios = &spec.axis2.as_ref().map(|a| a.values.clone()).unwrap_or_default();
    let conc = field_2d(result, |r| r.value(Observable::Concurrence));
    let (kappa, gamma) = (spec.base.kappa, spec.base.gamma);

    let coupling_side = ratios
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let column: Vec<Option<f64>> = conc.iter().map(|row| row[j]).collect();
            let analytic = (2.0 * SQRT_2 * r * gamma * kappa).sqrt() / kappa;
            let dev = first_crossing(&column, level)
                .zip(fractional_index(g0s, analytic))
                .map(|(c, a)| c - a);
            (r, dev)
        })
        .collect();
    let drive_side = g0s
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let dev = first_crossing(&conc[i], level)
                .zip(fractional_index(ratios, 1.0 / SQRT_2))
                .map(|(c, a)| c - a);
            (g, dev)
        })
        .collect();

    let mut deep_inside_min: Option<f64> = None;
    for (i, &g) in g0s.iter().enumerate() {
        for (j, &r) in ratios.iter().enumerate() {
            let eta = r * gamma;
            let deep = (g * kappa).powi(2) >= 4.0 * 2.0 * SQRT_2 * eta * kappa && SQRT_2 * eta >= 4.0 * gamma;
            if let (true, Some(c)) = (deep, conc[i][j]) {
                deep_inside_min = Some(deep_inside_min.map_or(c, |m| m.min(c)));
            }
        }
    }
    let weakest = if ratios.first() < ratios.last() { 0 } else { ratios.len() - 1 };
    let weak_drive_max = conc.iter().filter_map(|row| row[weakest]).reduce(f64::max);
    BoundaryReport { level, coupling_side, drive_side, deep_inside_min, weak_drive_max }
}

/// Interior local maxima of a sampled series, refined by a parabola through
/// the three samples around each.
pub fn local_maxima(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    for k in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[k - 1], values[k], values[k + 1]);
        if b > a && b >= c {
            let denom = a - 2.0 * b + c;
            let shift = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            let dt = times[k + 1] - times[k];
            peaks.push((times[k] + shift * dt, b - 0.25 * (a - c) * shift));
        }
    }
    peaks
}

/// Mean spacing of consecutive peaks.
pub fn peak_period(peaks: &[(f64, f64)]) -> Option<f64> {
    (peaks.len() >= 2).then(|| (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64)
}

/// Steady reduced two-qubit state at `g₀ = κ`, `η = 5γ`, `φ_z = π`.
pub fn steady_atom_state(gamma: f64, n_max: usize) -> Result<Matrix4<C64>> {
    let params = ModelParams { eta: 5.0 * gamma, ..ModelParams::antisymmetric(1.0, 0.0, gamma, n_max) };
    let ss = solve_steady(&params)?;
    Ok(two_qubit_state(&ss.rho))
}

/// `½|gg⟩⟨gg| + ½|ψ⁺⟩⟨ψ⁺|` in the basis gg, ge, eg, ee.
pub fn half_dicke_mixture() -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = C64::new(0.5, 0.0);
    for (r, c) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        m[(r, c)] = C64::new(0.25, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sweep::{Axis, SweepSpec};

    fn toy(field: impl Fn(f64, f64) -> f64) -> (SweepResult, Vec<Vec<Option<f64>>>) {
        let spec = SweepSpec::steady(
            ModelParams::default(),
            Axis::linear(SweepParam::G0, 0.0, 4.0, 5),
            Some(Axis::linear(SweepParam::PhiZOverPi, 0.0, 2.0, 9)),
        );
        let result = SweepResult { spec: spec.clone(), rows: Vec::new() };
        let f = spec
            .axis1
            .values
            .iter()
            .map(|&x| spec.axis2.as_ref().unwrap().values.iter().map(|&y| Some(field(x, y))).collect())
            .collect();
        (result, f)
    }

    #[test]
    fn interval_width_of_a_cone() {
        // Below 0 where |y - 1| < x/4.
        let (r, f) = toy(|x, y| (y - 1.0).abs() - x / 4.0);
        let w = interval_widths(&r, &f, 0.0, 1.0);
        assert_eq!(w[0], None);
        for (k, w) in w.iter().enumerate().skip(1) {
            assert!((w.unwrap() - k as f64 / 2.0).abs() < 1e-12, "{k}: {w:?}");
        }
    }

    #[test]
    fn contour_of_a_plane() {
        let (r, f) = toy(|x, y| x + y);
        let pts = contour_points(&r, &f, 2.5);
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|(x, y)| (x + y - 2.5).abs() < 1e-12));
    }

    #[test]
    fn fractional_positions() {
        assert_eq!(fractional_index(&[0.0, 1.0, 3.0], 2.0), Some(1.5));
        assert_eq!(fractional_index(&[3.0, 1.0], 2.0), Some(0.5));
        assert_eq!(fractional_index(&[0.0, 1.0], 2.0), None);
        assert_eq!(first_crossing(&[Some(0.1), Some(0.3), Some(0.7)], 0.5), Some(1.5));
    }

    #[test]
    fn peaks_of_a_cosine() {
        let t: Vec<f64> = (0..400).map(|k| k as f64 * 0.05).collect();
        let v: Vec<f64> = t.iter().map(|t| (2.0 * t - 0.3).cos()).collect();
        let p = local_maxima(&t, &v);
        assert_eq!(p.len(), 7);
        assert!((p[1].0 - (0.15 + std::f64::consts::PI)).abs() < 1e-3);
        assert!((p[0].1 - 1.0).abs() < 1e-4);
        assert!((peak_period(&p).unwrap() - std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn mixture_is_a_state() {
        let m = half_dicke_mixture();
        assert!((m.trace().re - 1.0).abs() < 1e-15);
        assert!((crate::observables::concurrence(&m).unwrap() - 0.5).abs() < 1e-12);
    }
}
