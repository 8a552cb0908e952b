//! Steady state `L·vec(ρ) = 0, tr ρ = 1` by trace-row replacement and LU.
//!
//! The generator maps Hermitian matrices to Hermitian matrices, so the linear
//! system is assembled over the `D²` real coordinates of a Hermitian `ρ`
//! (diagonal entries, then real and imaginary parts of the upper triangle)
//! and solved in real arithmetic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{BasisLabel, HilbertSpace, Operator};
use crate::model::{vec_index, vectorize, CompressedGenerator, Liouvillian, ModelParams};
use crate::observables::min_eigenvalue;

/// Largest residual `max|L·vec(ρ)|` accepted from the solver.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Singular values below this count towards the null space of `L`.
pub const NULL_SPACE_TOLERANCE: f64 = 1e-10;
/// Pivot ratio below which the bordered LU system is treated as singular.
const PIVOT_RATIO_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho: Operator,
    /// `max |L·vec(ρ)|`
    pub residual: f64,
    /// Most negative eigenvalue of `ρ`, or 0 when there is none.
    pub positivity_defect: f64,
    /// True when the singular-vector fallback produced the state.
    pub used_fallback: bool,
}

/// Real coordinate `k = vec_index(i, j)` of a Hermitian matrix: `ρ_ii` for
/// `i == j`, `Re ρ_ij` for `i < j`, and `Im ρ_ji` for `i > j`.
#[cfg(test)]
fn real_coordinates(dim: usize, v: &DVector<C64>, out: &mut [f64]) {
    for j in 0..dim {
        for i in 0..dim {
            let k = vec_index(dim, i, j);
            out[k] = if i == j {
                v[k].re
            } else if i < j {
                v[k].re
            } else {
                v[vec_index(dim, j, i)].im
            };
        }
    }
}

fn hermitian_from_coordinates(dim: usize, x: &DVector<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(x[vec_index(dim, i, i)], 0.0)
        } else {
            let (p, q) = if i < j { (i, j) } else { (j, i) };
            let re = x[vec_index(dim, p, q)];
            let im = x[vec_index(dim, q, p)];
            if i < j {
                C64::new(re, im)
            } else {
                C64::new(re, -im)
            }
        }
    })
}

/// Sparse real matrix stored by column as `(row, value)` pairs.
type Columns = Vec<Vec<(usize, f64)>>;

/// Sums duplicate rows of a sparse column.
fn merge<T: Copy + std::ops::AddAssign>(mut col: Vec<(usize, T)>) -> Vec<(usize, T)> {
    col.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, T)> = Vec::with_capacity(col.len());
    for (r, v) in col {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => out.push((r, v)),
        }
    }
    out
}

/// The generator written in real Hermitian coordinates.
fn real_generator(l: &CompressedGenerator, d: usize) -> Columns {
    let cols = l.columns();
    let i_unit = C64::new(0.0, 1.0);
    let mut out = vec![Vec::new(); d * d];
    for q in 0..d {
        for p in 0..d {
            let k = vec_index(d, p, q);
            let image: Vec<(usize, C64)> = if p == q {
                cols[k].clone()
            } else if p < q {
                // basis E_pq + E_qp
                cols[k].iter().chain(&cols[vec_index(d, q, p)]).copied().collect()
            } else {
                // basis i E_qp − i E_pq, stored at the (p > q) slot
                let upper = cols[vec_index(d, q, p)].iter().map(|&(r, v)| (r, v * i_unit));
                upper.chain(cols[k].iter().map(|&(r, v)| (r, -v * i_unit))).collect()
            };
            let mut real = Vec::with_capacity(2 * image.len());
            for (r, v) in merge(image) {
                let (i, j) = (r % d, r / d);
                if i == j {
                    real.push((r, v.re));
                } else if i < j {
                    real.push((r, v.re));
                    real.push((vec_index(d, j, i), v.im));
                }
            }
            out[k] = merge(real).into_iter().filter(|e| e.1 != 0.0).collect();
        }
    }
    out
}

fn two_smallest_singular_values(l: DMatrix<C64>) -> (f64, f64, Option<DVector<C64>>) {
    let svd = l.svd(false, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let smallest = svd.singular_values[order[0]];
    let second = svd.singular_values[order[1]];
    let vector = svd.v_t.map(|vt| vt.row(order[0]).adjoint());
    (smallest, second, vector)
}

/// Sign `s` such that the model is invariant under swapping the qubits
/// together with `a → s·a`: `s = −1` for `g₂ = −g₁`, `+1` for `g₂ = g₁`.
fn exchange_sign(params: &ModelParams) -> Option<f64> {
    let (g1, g2) = (params.g1(), params.g2());
    let tol = 1e-14 * g1.abs().max(1.0);
    if (g2 + g1).abs() <= tol {
        Some(-1.0)
    } else if (g2 - g1).abs() <= tol {
        Some(1.0)
    } else {
        None
    }
}

/// Columns of the embedding from the exchange-symmetric subspace into the
/// full real coordinates: each reduced unknown is `Σ w·e_k` over its entries.
/// The first entry of each column is also the row kept in the reduced system.
fn symmetric_embedding(space: HilbertSpace, sign: f64) -> Vec<Vec<(usize, f64)>> {
    let d = space.total_dim();
    let swap: Vec<(usize, f64)> = (0..d)
        .map(|i| {
            let lab = BasisLabel::from_index(space, i);
            let swapped = BasisLabel::new(lab.qubit2, lab.qubit1, lab.photons);
            (swapped.index(space), sign.powi(lab.photons as i32))
        })
        .collect();

    // ρ ↦ PρP acts on real coordinates as x_k ↦ τ_k x_{μ(k)}.
    let mut partner = vec![(0usize, 0.0f64); d * d];
    for j in 0..d {
        for i in 0..d {
            let k = vec_index(d, i, j);
            let (p, q) = if i <= j { (i, j) } else { (j, i) };
            let (pp, sp) = swap[p];
            let (qq, sq) = swap[q];
            let t = sp * sq;
            partner[k] = if i == j {
                (vec_index(d, pp, pp), 1.0)
            } else if i < j {
                // Re ρ_pq
                if pp < qq {
                    (vec_index(d, pp, qq), t)
                } else {
                    (vec_index(d, qq, pp), t)
                }
            } else if pp < qq {
                // Im ρ_pq
                (vec_index(d, qq, pp), t)
            } else {
                (vec_index(d, pp, qq), -t)
            };
        }
    }

    let mut columns = Vec::with_capacity(d * d / 2 + d);
    for (k, &(mu, tau)) in partner.iter().enumerate() {
        if mu == k {
            if tau > 0.0 {
                columns.push(vec![(k, 1.0)]);
            }
        } else if mu > k {
            columns.push(vec![(k, 1.0), (mu, tau)]);
        }
    }
    columns
}

fn solve_bordered(system: DMatrix<f64>, trace_row: usize) -> Option<DVector<f64>> {
    let mut rhs = DVector::<f64>::zeros(system.nrows());
    rhs[trace_row] = 1.0;
    let lu = system.lu();
    let pivots = lu.u().diagonal().map(f64::abs);
    if pivots.min() / pivots.max() <= PIVOT_RATIO_FLOOR {
        return None;
    }
    lu.solve(&rhs)
}

/// Full real system with the `d ρ₀₀/dt` row replaced by the trace.
fn solve_full(generator: &Columns, d: usize) -> Option<DVector<f64>> {
    let n = d * d;
    let trace_row = vec_index(d, 0, 0);
    let mut system = DMatrix::<f64>::zeros(n, n);
    for (c, col) in generator.iter().enumerate() {
        for &(r, v) in col {
            system[(r, c)] = v;
        }
    }
    system.row_mut(trace_row).fill(0.0);
    for i in 0..d {
        system[(trace_row, vec_index(d, i, i))] = 1.0;
    }
    solve_bordered(system, trace_row)
}

/// Same system restricted to exchange-symmetric states.
fn solve_symmetric(generator: &Columns, space: HilbertSpace, sign: f64) -> Option<DVector<f64>> {
    let d = space.total_dim();
    let columns = symmetric_embedding(space, sign);
    let m = columns.len();
    let mut row_of = vec![usize::MAX; d * d];
    for (r, col) in columns.iter().enumerate() {
        row_of[col[0].0] = r;
    }
    let mut system = DMatrix::<f64>::zeros(m, m);
    for (c, col) in columns.iter().enumerate() {
        for &(kk, w) in col {
            for &(k, v) in &generator[kk] {
                let r = row_of[k];
                if r != usize::MAX {
                    system[(r, c)] += w * v;
                }
            }
        }
    }
    let origin = vec_index(d, 0, 0);
    let trace_row = row_of[origin];
    if trace_row == usize::MAX {
        return None;
    }
    for (c, col) in columns.iter().enumerate() {
        system[(trace_row, c)] = col
            .iter()
            .filter(|&&(kk, _)| kk % (d + 1) == 0)
            .map(|&(_, w)| w)
            .sum();
    }
    let y = solve_bordered(system, trace_row)?;
    let mut x = DVector::<f64>::zeros(d * d);
    for (c, col) in columns.iter().enumerate() {
        for &(kk, w) in col {
            x[kk] = w * y[c];
        }
    }
    Some(x)
}

fn finish(
    l: &CompressedGenerator,
    space: HilbertSpace,
    rho: DMatrix<C64>,
    used_fallback: bool,
) -> Result<SteadyStateResult> {
    let tr = rho.trace();
    let rho = Operator::from_matrix(space, rho / tr)?;
    let v = vectorize(&rho);
    let mut image = vec![C64::new(0.0, 0.0); v.len()];
    l.apply_into(v.as_slice(), &mut image);
    let residual = image.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if residual >= RESIDUAL_TOLERANCE {
        return Err(Error::ResidualTooLarge(residual));
    }
    let positivity_defect = min_eigenvalue(rho.matrix()).min(0.0);
    Ok(SteadyStateResult { rho, residual, positivity_defect, used_fallback })
}

fn solve_compressed(l: &CompressedGenerator, params: &ModelParams) -> Result<SteadyStateResult> {
    let space = params.space()?;
    let d = space.total_dim();
    let generator = real_generator(l, d);

    // A unique steady state inherits every symmetry of the generator, so the
    // exchange-symmetric subspace (about half the unknowns) suffices.
    if let Some(sign) = exchange_sign(params) {
        if let Some(x) = solve_symmetric(&generator, space, sign) {
            if let Ok(result) = finish(l, space, hermitian_from_coordinates(d, &x), false) {
                return Ok(result);
            }
        }
    }

    if let Some(x) = solve_full(&generator, d) {
        return finish(l, space, hermitian_from_coordinates(d, &x), false);
    }
    let (smallest, second, vector) = two_smallest_singular_values(l.to_dense());
    if second < NULL_SPACE_TOLERANCE {
        return Err(Error::NonUniqueSteadyState { smallest, second });
    }
    let v = vector.expect("right singular vectors requested");
    let m = DMatrix::from_column_slice(d, d, v.as_slice());
    finish(l, space, (&m + m.adjoint()) * C64::new(0.5, 0.0), true)
}

pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult> {
    solve_compressed(&l.compressed(), l.params())
}

/// Assembles the generator for `params` in sparse form and solves for its
/// steady state.
pub fn solve_steady(params: &ModelParams) -> Result<SteadyStateResult> {
    solve_compressed(&CompressedGenerator::build(params)?, params)
}
#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{ket, BasisLabel, QubitState::G};
    use crate::model::{apply_master_rhs, build_liouvillian};

    fn dense(cols: &Columns) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(cols.len(), cols.len());
        for (c, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r, c)] = v;
            }
        }
        m
    }

    #[test]
    fn real_generator_matches_complex_action() {
        let p = ModelParams {
            delta_a: 0.2,
            delta_c: -0.4,
            phi_z: 2.0,
            ..ModelParams::antisymmetric(0.9, 0.3, 0.05, 2)
        };
        let l = build_liouvillian(&p).unwrap();
        let d = l.space().total_dim();
        let m = dense(&real_generator(&l.compressed(), d));
        let x = DVector::from_fn(d * d, |k, _| ((k * 37 % 11) as f64 - 5.0) / 7.0);
        let rho = hermitian_from_coordinates(d, &x);
        let image = l.matrix() * DVector::from_column_slice(rho.as_slice());
        let mut expect = vec![0.0; d * d];
        real_coordinates(d, &image, &mut expect);
        let got = &m * &x;
        for k in 0..d * d {
            assert!((got[k] - expect[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn undriven_steady_state_is_vacuum() {
        let p = ModelParams::antisymmetric(1.0, 0.0, 0.3, 3);
        let ss = solve_steady(&p).unwrap();
        let sp = ss.rho.space();
        let target = Operator::projector(sp, &ket(sp, BasisLabel::new(G, G, 0)));
        assert!((&ss.rho - &target).max_abs() < 1e-12);
        assert!(ss.residual < 1e-10);
        assert!(!ss.used_fallback);
    }

    #[test]
    fn steady_state_annihilated_by_direct_rhs() {
        let p = ModelParams::antisymmetric(1.0, 0.05, 0.01, 3);
        let ss = solve_steady(&p).unwrap();
        let rhs = apply_master_rhs(&p, &ss.rho).unwrap();
        assert!(rhs.max_abs() < 1e-9);
        assert!(ss.rho.hermiticity_defect() < 1e-10);
        assert!((ss.rho.trace().re - 1.0).abs() < 1e-12);
        assert!(ss.positivity_defect > -1e-9);
    }

    #[test]
    fn symmetric_reduction_matches_full_solve() {
        for (phi_z, delta) in [(std::f64::consts::PI, 0.0), (0.0, 0.3), (std::f64::consts::PI, -0.7)] {
            let p = ModelParams {
                phi_z,
                delta_a: delta,
                delta_c: delta,
                ..ModelParams::antisymmetric(0.8, 0.3, 0.05, 3)
            };
            let sign = exchange_sign(&p).unwrap();
            let l = build_liouvillian(&p).unwrap();
            let d = l.space().total_dim();
            let generator = real_generator(&l.compressed(), d);
            let full = solve_full(&generator, d).unwrap();
            let reduced = solve_symmetric(&generator, l.space(), sign).unwrap();
            let diff = (&full - &reduced).amax();
            assert!(diff < 1e-12, "phi_z={phi_z}: {diff:e}");
        }
        let generic = ModelParams { phi_z: 2.0, ..ModelParams::default() };
        assert_eq!(exchange_sign(&generic), None);
    }

    #[test]
    fn sparse_and_dense_entry_points_agree() {
        let p = ModelParams { delta_a: 0.1, ..ModelParams::antisymmetric(1.2, 0.2, 0.1, 4) };
        let a = solve_steady(&p).unwrap();
        let b = steady_state(&build_liouvillian(&p).unwrap()).unwrap();
        assert_eq!(a.rho.matrix(), b.rho.matrix());
    }

    #[test]
    fn degenerate_null_space_is_reported() {
        // No qubit decay, no coupling: every qubit state is stationary.
        let p = ModelParams { g0: 0.0, eta: 0.0, gamma: 0.0, ..ModelParams::default() }
            .with_n_max(1);
        assert!(matches!(solve_steady(&p), Err(Error::NonUniqueSteadyState { .. })));
    }
}
