//! Hamiltonian, dissipators and Liouvillian of two driven qubits in a
//! single-mode cavity.
//!
//! Units: ħ = 1 and all rates are measured in units of the cavity decay
//! `kappa`. Damping is written in the `κ(2aρa† − a†aρ − ρa†a)` form, so the
//! photon number decays at `2κ` and a bare qubit excitation at `2γ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, creation, number, qubit_lowering, qubit_raising, qubit_sz, HilbertSpace,
    Operator, Qubit,
};

/// Full physical parameter set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Qubit detuning Δ_A = ω_A − ω_P.
    pub delta_a: f64,
    /// Cavity detuning Δ_C = ω_C − ω_P.
    pub delta_c: f64,
    /// Coupling of the first qubit; the second couples with `g0·cos(phi_z)`.
    pub g0: f64,
    /// Placement phase between the two qubits, radians.
    pub phi_z: f64,
    /// Drive strength on each qubit.
    pub eta: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// Fock truncation of the cavity.
    pub n_max: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            delta_a: 0.0,
            delta_c: 0.0,
            g0: 1.0,
            phi_z: PI,
            eta: 0.0,
            kappa: 1.0,
            gamma: 0.01,
            n_max: 10,
        }
    }
}

impl ModelParams {
    /// The anti-symmetric placement `g1 = −g2 = g0` with resonant drive.
    pub fn antisymmetric(g0: f64, eta: f64, gamma: f64, n_max: usize) -> Self {
        Self { g0, eta, gamma, n_max, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite: [(&'static str, f64); 7] = [
            ("delta_a", self.delta_a),
            ("delta_c", self.delta_c),
            ("g0", self.g0),
            ("phi_z", self.phi_z),
            ("eta", self.eta),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParams { name, reason: format!("{v} is not finite") });
            }
        }
        let non_negative: [(&'static str, f64); 3] =
            [("g0", self.g0), ("eta", self.eta), ("gamma", self.gamma)];
        for (name, v) in non_negative {
            if v < 0.0 {
                return Err(Error::InvalidParams { name, reason: format!("{v} is negative") });
            }
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParams {
                name: "kappa",
                reason: format!("{} must be positive", self.kappa),
            });
        }
        if self.n_max == 0 {
            return Err(Error::InvalidTruncation(0));
        }
        Ok(())
    }

    /// Rescales every rate so that `kappa == 1`.
    pub fn normalized(&self) -> Self {
        let k = self.kappa;
        Self {
            delta_a: self.delta_a / k,
            delta_c: self.delta_c / k,
            g0: self.g0 / k,
            eta: self.eta / k,
            gamma: self.gamma / k,
            kappa: 1.0,
            ..*self
        }
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        Self { n_max, ..*self }
    }

    pub fn g1(&self) -> f64 {
        self.g0
    }

    pub fn g2(&self) -> f64 {
        self.g0 * self.phi_z.cos()
    }

    pub fn space(&self) -> Result<HilbertSpace> {
        HilbertSpace::new(self.n_max)
    }

    /// Largest rate in the problem, floored at 1.
    pub fn max_rate(&self) -> f64 {
        [self.kappa, self.gamma, self.eta, self.g0, self.delta_a.abs(), self.delta_c.abs(), 1.0]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `H = Δ_A(S_z¹+S_z²)/2 + Δ_C a†a + Σᵢ gᵢ(a†S₋ⁱ + aS₊ⁱ) + η Σᵢ(S₋ⁱ + S₊ⁱ)`.
pub fn build_hamiltonian(params: &ModelParams) -> Result<Operator> {
    params.validate()?;
    let space = params.space()?;
    let a = annihilation(space);
    let ad = creation(space);
    let mut h = &(&(&qubit_sz(space, Qubit::First) + &qubit_sz(space, Qubit::Second))
        * (params.delta_a / 2.0))
        + &(&number(space) * params.delta_c);
    for (which, g) in [(Qubit::First, params.g1()), (Qubit::Second, params.g2())] {
        let sm = qubit_lowering(space, which);
        let sp = qubit_raising(space, which);
        let exchange = &(&ad * &sm) + &(&a * &sp);
        let drive = &sm + &sp;
        h = &(&h + &(&exchange * g)) + &(&drive * params.eta);
    }
    Ok(h)
}

/// Jump operators `C_k` such that each dissipator reads
/// `2 C ρ C† − C†C ρ − ρ C†C`.
pub fn jump_operators(params: &ModelParams) -> Result<Vec<Operator>> {
    params.validate()?;
    let space = params.space()?;
    let mut ops = vec![&annihilation(space) * params.kappa.sqrt()];
    if params.gamma > 0.0 {
        for which in [Qubit::First, Qubit::Second] {
            ops.push(&qubit_lowering(space, which) * params.gamma.sqrt());
        }
    }
    Ok(ops)
}

/// Column-stacking vectorization.
pub fn vectorize(rho: &Operator) -> DVector<C64> {
    let m = rho.matrix();
    DVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize(space: HilbertSpace, v: &DVector<C64>) -> Result<Operator> {
    let d = space.total_dim();
    if v.len() != d * d {
        return Err(Error::ShapeMismatch { rows: v.len(), cols: 1, dim: d * d });
    }
    Operator::from_matrix(space, DMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Index of `ρ[(row, col)]` inside `vectorize(ρ)`.
pub fn vec_index(dim: usize, row: usize, col: usize) -> usize {
    col * dim + row
}

/// Dense Lindblad generator acting on column-stacked density matrices.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    space: HilbertSpace,
    params: ModelParams,
    matrix: DMatrix<C64>,
}

impl Liouvillian {
    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.space() != self.space {
            return Err(Error::space_mismatch(self.space, rho.space()));
        }
        unvectorize(self.space, &(&self.matrix * vectorize(rho)))
    }

    /// `max_j |Σ_i L[(i·D+i), j]|`: zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.space.total_dim();
        (0..d * d)
            .map(|col| (0..d).map(|i| self.matrix[(vec_index(d, i, i), col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    /// Compressed-row copy of the generator for repeated matrix-vector products.
    pub fn compressed(&self) -> CompressedGenerator {
        CompressedGenerator::from_dense(&self.matrix)
    }
}

/// Entry of the generator as `(row, col, value)`.
type Triplet = (usize, usize, C64);

/// Pushes the nonzero entries of `coeff · (left ⊗ right)`.
fn kron_triplets(out: &mut Vec<Triplet>, coeff: C64, left: &DMatrix<C64>, right: &DMatrix<C64>) {
    let zero = C64::new(0.0, 0.0);
    let (rr, rc) = right.shape();
    let right_nz: Vec<(usize, usize, C64)> = (0..rc)
        .flat_map(|cj| (0..rr).map(move |ci| (ci, cj)))
        .filter_map(|(ci, cj)| (right[(ci, cj)] != zero).then(|| (ci, cj, right[(ci, cj)])))
        .collect();
    for lj in 0..left.ncols() {
        for li in 0..left.nrows() {
            let l = left[(li, lj)];
            if l == zero {
                continue;
            }
            let f = coeff * l;
            for &(ci, cj, r) in &right_nz {
                out.push((li * rr + ci, lj * rc + cj, f * r));
            }
        }
    }
}

/// Entries of `L = −i(I⊗H − Hᵀ⊗I) + Σ_k [2 C̄_k⊗C_k − I⊗C_k†C_k − (C_k†C_k)ᵀ⊗I]`
/// in term order.
fn generator_triplets(params: &ModelParams) -> Result<(HilbertSpace, Vec<Triplet>)> {
    let h = build_hamiltonian(params)?;
    let space = h.space();
    let d = space.total_dim();
    let eye = DMatrix::<C64>::identity(d, d);
    let minus_i = C64::new(0.0, -1.0);
    let mut t = Vec::new();
    kron_triplets(&mut t, minus_i, &eye, h.matrix());
    kron_triplets(&mut t, -minus_i, &h.matrix().transpose(), &eye);
    for c in jump_operators(params)? {
        let cdc = (&c.adjoint() * &c).into_matrix();
        kron_triplets(&mut t, re(2.0), &c.matrix().map(|z| z.conj()), c.matrix());
        kron_triplets(&mut t, re(-1.0), &eye, &cdc);
        kron_triplets(&mut t, re(-1.0), &cdc.transpose(), &eye);
    }
    Ok((space, t))
}

/// Dense generator `L = −i(I⊗H − Hᵀ⊗I) + Σ_k [2 C̄_k⊗C_k − I⊗C_k†C_k − (C_k†C_k)ᵀ⊗I]`.
pub fn build_liouvillian(params: &ModelParams) -> Result<Liouvillian> {
    let (space, triplets) = generator_triplets(params)?;
    let n = space.total_dim().pow(2);
    let mut l = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (r, c, v) in triplets {
        l[(r, c)] += v;
    }
    Ok(Liouvillian { space, params: *params, matrix: l })
}

/// `−i[H,ρ] + L_κρ + L_γρ` evaluated with operator products, independent of
/// the superoperator matrix.
pub fn apply_master_rhs(params: &ModelParams, rho: &Operator) -> Result<Operator> {
    let h = build_hamiltonian(params)?;
    if h.space() != rho.space() {
        return Err(Error::space_mismatch(h.space(), rho.space()));
    }
    let mut out = h.commutator(rho)?.scale(C64::new(0.0, -1.0));
    for c in jump_operators(params)? {
        let cd = c.adjoint();
        let cdc = &cd * &c;
        let term = &(&(&(&c * rho) * &cd) * 2.0) - &(&(&cdc * rho) + &(rho * &cdc));
        out = &out + &term;
    }
    Ok(out)
}

/// Row-compressed sparse form of the generator.
#[derive(Clone, Debug)]
pub struct CompressedGenerator {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl CompressedGenerator {
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut row_start = Vec::with_capacity(m.nrows() + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    cols.push(j);
                    values.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self { row_start, cols, values }
    }

    /// Assembles the generator for `params` without forming the dense
    /// matrix. Entries are summed in the same order as [`build_liouvillian`],
    /// so both agree bit for bit.
    pub fn build(params: &ModelParams) -> Result<Self> {
        let (space, mut triplets) = generator_triplets(params)?;
        let n = space.total_dim().pow(2);
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values: Vec<C64> = Vec::new();
        let mut t = triplets.into_iter().peekable();
        row_start.push(0);
        for i in 0..n {
            while let Some(&(r, c, _)) = t.peek() {
                if r != i {
                    break;
                }
                let mut acc = C64::new(0.0, 0.0);
                while let Some(&(r2, c2, v)) = t.peek() {
                    if (r2, c2) != (r, c) {
                        break;
                    }
                    acc += v;
                    t.next();
                }
                if acc != C64::new(0.0, 0.0) {
                    cols.push(c);
                    values.push(acc);
                }
            }
            row_start.push(cols.len());
        }
        Ok(Self { row_start, cols, values })
    }

    /// Nonzero entries grouped by column: `columns()[j]` lists `(row, value)`.
    pub fn columns(&self) -> Vec<Vec<(usize, C64)>> {
        let mut out = vec![Vec::new(); self.dim()];
        for i in 0..self.dim() {
            for k in self.row_start[i]..self.row_start[i + 1] {
                out[self.cols[k]].push((i, self.values[k]));
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for i in 0..n {
            for k in self.row_start[i]..self.row_start[i + 1] {
                m[(i, self.cols[k])] = self.values[k];
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.row_start.len() - 1
    }

    /// `out = self · x`
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_start[i], self.row_start[i + 1]);
            let mut acc = C64::new(0.0, 0.0);
            for k in lo..hi {
                acc += self.values[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{dicke_vectors, ket, BasisLabel, QubitState::*};
    use std::f64::consts::SQRT_2;

    fn close(a: C64, b: f64) -> bool {
        (a - re(b)).norm() < 1e-12
    }

    #[test]
    fn antisymmetric_pathway_elements() {
        let g0 = 0.7;
        let eta = 0.3;
        let p = ModelParams::antisymmetric(g0, eta, 0.01, 3);
        let h = build_hamiltonian(&p).unwrap();
        let sp = h.space();
        let d = dicke_vectors(sp);
        let ee0 = ket(sp, BasisLabel::new(E, E, 0));
        let gg0 = ket(sp, BasisLabel::new(G, G, 0));
        let gg1 = ket(sp, BasisLabel::new(G, G, 1));
        let gg2 = ket(sp, BasisLabel::new(G, G, 2));

        // |ee,0> <-> |-,1> carries √2 g0 up to the sign convention of |->.
        assert!((h.element(&d.minus[1], &ee0).norm() - SQRT_2 * g0).abs() < 1e-12);
        assert!((h.element(&gg2, &d.minus[1]).norm() - 2.0 * g0).abs() < 1e-12);
        assert_eq!(h.element(&d.plus[0], &gg1).norm(), 0.0);
        assert_eq!(h.element(&gg1, &d.plus[0]).norm(), 0.0);
        assert!(close(h.element(&d.plus[0], &gg0), SQRT_2 * eta));
    }

    #[test]
    fn symmetric_placement_couples_plus_state() {
        let p = ModelParams { phi_z: 0.0, ..ModelParams::antisymmetric(0.4, 0.1, 0.01, 2) };
        let h = build_hamiltonian(&p).unwrap();
        let sp = h.space();
        let d = dicke_vectors(sp);
        let gg1 = ket(sp, BasisLabel::new(G, G, 1));
        assert!(close(h.element(&gg1, &d.plus[0]), SQRT_2 * 0.4));
    }

    #[test]
    fn zero_params_give_zero_hamiltonian() {
        let p = ModelParams {
            delta_a: 0.0,
            delta_c: 0.0,
            g0: 0.0,
            phi_z: 0.0,
            eta: 0.0,
            kappa: 1.0,
            gamma: 0.0,
            n_max: 2,
        };
        assert_eq!(build_hamiltonian(&p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn dicke_form_matches_individual_qubit_form() {
        // 2g0(a D₋† + a† D₋)/√2 with D₋† = (S₊¹ − S₊²)/√2
        let g0 = 1.3;
        let p = ModelParams::antisymmetric(g0, 0.0, 0.0, 3);
        let h = build_hamiltonian(&p).unwrap();
        let sp = h.space();
        let dm_dag = &(&qubit_raising(sp, Qubit::First) - &qubit_raising(sp, Qubit::Second))
            * (1.0 / SQRT_2);
        let dm = dm_dag.adjoint();
        let a = annihilation(sp);
        let dicke = &(&(&a * &dm_dag) + &(&a.adjoint() * &dm)) * (2.0 * g0 / SQRT_2);
        assert!((&h - &dicke).max_abs() < 1e-14);

        // Drive: √2 η (D₊† + D₊)
        let eta = 0.2;
        let p = ModelParams { g0: 0.0, ..ModelParams::antisymmetric(0.0, eta, 0.0, 2) };
        let h = build_hamiltonian(&p).unwrap();
        let sp = h.space();
        let dp_dag = &(&qubit_raising(sp, Qubit::First) + &qubit_raising(sp, Qubit::Second))
            * (1.0 / SQRT_2);
        let drive = &(&dp_dag + &dp_dag.adjoint()) * (SQRT_2 * eta);
        assert!((&h - &drive).max_abs() < 1e-14);
    }

    #[test]
    fn sparse_assembly_matches_dense() {
        let p = ModelParams { delta_a: 0.3, delta_c: -0.2, phi_z: 1.1, ..ModelParams::antisymmetric(0.8, 0.4, 0.05, 3) };
        let dense = build_liouvillian(&p).unwrap();
        let sparse = CompressedGenerator::build(&p).unwrap();
        assert_eq!(sparse.to_dense(), *dense.matrix());
        assert_eq!(sparse.nnz(), dense.compressed().nnz());
        let cols = sparse.columns();
        assert_eq!(cols.iter().map(Vec::len).sum::<usize>(), sparse.nnz());
    }

    #[test]
    fn bare_decay_rates() {
        // P_e1 decays at 2γ.
        let gamma = 0.37;
        let p = ModelParams { g0: 0.0, eta: 0.0, gamma, ..ModelParams::default() }.with_n_max(2);
        let sp = p.space().unwrap();
        let rho = Operator::projector(sp, &ket(sp, BasisLabel::new(E, G, 0)));
        let l = build_liouvillian(&p).unwrap();
        let drho = l.apply(&rho).unwrap();
        let pe1 = crate::hilbert::qubit_excited_projector(sp, Qubit::First);
        assert!(close(pe1.expectation(&drho), -2.0 * gamma));

        // <a†a> decays at 2κ.
        let p = ModelParams { g0: 0.0, eta: 0.0, gamma: 0.0, ..ModelParams::default() }
            .with_n_max(2);
        let rho = Operator::projector(sp, &ket(sp, BasisLabel::new(G, G, 1)));
        let drho = build_liouvillian(&p).unwrap().apply(&rho).unwrap();
        assert!(close(number(sp).expectation(&drho), -2.0));
    }

    #[test]
    fn trace_preservation() {
        let p = ModelParams {
            delta_a: 0.3,
            delta_c: -0.2,
            phi_z: 2.1,
            ..ModelParams::antisymmetric(1.1, 0.4, 0.05, 3)
        };
        assert!(build_liouvillian(&p).unwrap().trace_defect() < 1e-12);
    }

    #[test]
    fn compressed_matches_dense() {
        let p = ModelParams::antisymmetric(0.8, 0.2, 0.1, 2);
        let l = build_liouvillian(&p).unwrap();
        let c = l.compressed();
        let n = c.dim();
        let x: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut y = vec![C64::new(0.0, 0.0); n];
        c.apply_into(&x, &mut y);
        let dense = l.matrix() * DVector::from_vec(x);
        for i in 0..n {
            assert!((dense[i] - y[i]).norm() < 1e-13);
        }
        assert!(c.nnz() < n * n / 10);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = ModelParams::default();
        p.kappa = 0.0;
        assert!(p.validate().is_err());
        p = ModelParams { gamma: -1.0, ..ModelParams::default() };
        assert!(matches!(p.validate(), Err(Error::InvalidParams { name: "gamma", .. })));
        p = ModelParams { n_max: 0, ..ModelParams::default() };
        assert!(build_hamiltonian(&p).is_err());
    }

    #[test]
    fn normalization_scales_rates() {
        let p = ModelParams { kappa: 2.0, g0: 4.0, gamma: 0.02, eta: 0.1, ..Default::default() };
        let n = p.normalized();
        assert_eq!((n.kappa, n.g0, n.gamma, n.eta), (1.0, 2.0, 0.01, 0.05));
    }
}
