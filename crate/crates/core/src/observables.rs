//! Figures of merit extracted from a density matrix of the full system.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::Operator;

/// Eigenvalues of a density matrix above `-POSITIVITY_SLACK` are clamped to
/// zero before computing the concurrence; anything lower is an error.
pub const POSITIVITY_SLACK: f64 = 1e-7;
/// Below this mean photon number `g2(0)` is reported as undefined.
pub const PHOTON_FLOOR: f64 = 1e-12;
/// Below this single-qubit excitation `xi` is reported as undefined.
pub const EXCITATION_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Subsystem {
    Qubit1,
    Qubit2,
    Cavity,
}

impl Subsystem {
    fn position(self) -> usize {
        match self {
            Subsystem::Qubit1 => 0,
            Subsystem::Qubit2 => 1,
            Subsystem::Cavity => 2,
        }
    }
}

/// Partial trace keeping `keep` (in increasing factor order) and tracing out
/// the rest.
pub fn partial_trace(rho: &Operator, keep: &[Subsystem]) -> Result<DMatrix<C64>> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("nothing to keep".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSubsystems(format!(
            "{keep:?} must be strictly increasing without repeats"
        )));
    }
    let dims = rho.space().subsystem_dims();
    let kept: Vec<usize> = keep.iter().map(|s| s.position()).collect();
    let traced: Vec<usize> = (0..3).filter(|p| !kept.contains(p)).collect();
    let kept_dim: usize = kept.iter().map(|&p| dims[p]).product();
    let traced_dim: usize = traced.iter().map(|&p| dims[p]).product();

    // Digits of a flat index in the mixed-radix basis [2, 2, n_max+1].
    let flat = |digits: &[usize; 3]| (digits[0] * dims[1] + digits[1]) * dims[2] + digits[2];
    let split = |mut idx: usize, positions: &[usize], digits: &mut [usize; 3]| {
        for &p in positions.iter().rev() {
            digits[p] = idx % dims[p];
            idx /= dims[p];
        }
    };

    let m = rho.matrix();
    let mut out = DMatrix::from_element(kept_dim, kept_dim, C64::new(0.0, 0.0));
    let mut row = [0usize; 3];
    let mut col = [0usize; 3];
    for i in 0..kept_dim {
        split(i, &kept, &mut row);
        for j in 0..kept_dim {
            split(j, &kept, &mut col);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_dim {
                split(t, &traced, &mut row);
                split(t, &traced, &mut col);
                acc += m[(flat(&row), flat(&col))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state of both qubits in the basis `|gg⟩, |ge⟩, |eg⟩, |ee⟩`.
pub fn two_qubit_state(rho: &Operator) -> Matrix4<C64> {
    let m = partial_trace(rho, &[Subsystem::Qubit1, Subsystem::Qubit2])
        .expect("qubit pair is a valid selection");
    Matrix4::from_fn(|i, j| m[(i, j)])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockadeRatio {
    pub p_ee: f64,
    pub p_e1: f64,
    pub p_e2: f64,
    /// `p_ee / P_e²` with `P_e` the mean of `p_e1` and `p_e2`.
    pub xi: Option<f64>,
}

pub fn blockade_ratio_atoms(rho_atom: &Matrix4<C64>) -> BlockadeRatio {
    let p_ee = rho_atom[(3, 3)].re;
    let p_e1 = rho_atom[(2, 2)].re + p_ee;
    let p_e2 = rho_atom[(1, 1)].re + p_ee;
    let p_e = 0.5 * (p_e1 + p_e2);
    let xi = (p_e >= EXCITATION_FLOOR).then(|| p_ee / (p_e * p_e));
    BlockadeRatio { p_ee, p_e1, p_e2, xi }
}

pub fn blockade_ratio(rho: &Operator) -> BlockadeRatio {
    blockade_ratio_atoms(&two_qubit_state(rho))
}

/// Photon-number distribution `p_n = ⟨n|ρ_cavity|n⟩`.
pub fn photon_distribution(rho: &Operator) -> Vec<f64> {
    let space = rho.space();
    let c = space.cavity_dim();
    let m = rho.matrix();
    (0..c).map(|n| (0..4).map(|q| m[(q * c + n, q * c + n)].re).sum()).collect()
}

/// `(⟨a†a⟩, ⟨a†a†aa⟩)`
pub fn photon_moments(rho: &Operator) -> (f64, f64) {
    photon_distribution(rho).iter().enumerate().fold((0.0, 0.0), |(n1, n2), (n, p)| {
        let n = n as f64;
        (n1 + n * p, n2 + n * (n - 1.0) * p)
    })
}

/// Equal-time `⟨a†a†aa⟩ / ⟨a†a⟩²`, `None` below the photon floor.
pub fn g2_zero(rho: &Operator) -> Option<f64> {
    let (n1, n2) = photon_moments(rho);
    (n1 >= PHOTON_FLOOR).then(|| n2 / (n1 * n1))
}

fn spin_flip(rho: &Matrix4<C64>) -> Matrix4<C64> {
    // σy⊗σy has entries ±1 on the anti-diagonal: (0,3),(3,0) = −1, (1,2),(2,1) = +1.
    let mut yy = Matrix4::<C64>::zeros();
    yy[(0, 3)] = C64::new(-1.0, 0.0);
    yy[(3, 0)] = C64::new(-1.0, 0.0);
    yy[(1, 2)] = C64::new(1.0, 0.0);
    yy[(2, 1)] = C64::new(1.0, 0.0);
    yy * rho.map(|z| z.conj()) * yy
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// The `λᵢ` are computed as square roots of the eigenvalues of the Hermitian
/// matrix `√ρ ρ̃ √ρ`, which share their spectrum with `ρ ρ̃`.
pub fn concurrence(rho_atom: &Matrix4<C64>) -> Result<f64> {
    let tr = rho_atom.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::TraceNotUnity(tr.re));
    }
    let herm = (rho_atom + rho_atom.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -POSITIVITY_SLACK {
        return Err(Error::NotPositive(min));
    }
    let sqrt_vals = eig.eigenvalues.map(|v| C64::new(v.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    let sqrt_rho = v * Matrix4::from_diagonal(&sqrt_vals) * v.adjoint();
    let clamped = sqrt_rho * sqrt_rho;
    let m = sqrt_rho * spin_flip(&clamped) * sqrt_rho;
    let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mu = m.symmetric_eigenvalues();
    // Eigenvalues at round-off level would otherwise surface as √ε ~ 1e-8.
    let floor = 64.0 * f64::EPSILON * mu.amax().max(1.0);
    let mut lambdas: Vec<f64> =
        mu.iter().map(|&x| if x > floor { x.sqrt() } else { 0.0 }).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// Populations of `|±⟩ = (|eg⟩ ± |ge⟩)/√2`.
pub fn dicke_populations(rho_atom: &Matrix4<C64>) -> (f64, f64) {
    // basis indices: |ge⟩ = 1, |eg⟩ = 2
    let diag = 0.5 * (rho_atom[(1, 1)].re + rho_atom[(2, 2)].re);
    let coh = rho_atom[(2, 1)].re;
    (diag + coh, diag - coh)
}

/// `½ Σ |eig(a − b)|` for Hermitian `a`, `b`.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let diff = a - b;
    let diff = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
    0.5 * diff.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
}

/// Smallest eigenvalue of the Hermitian part of `rho`.
pub fn min_eigenvalue(rho: &DMatrix<C64>) -> f64 {
    let herm = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Observable bundle at one parameter point or time.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub p_ee: f64,
    pub p_e1: f64,
    pub p_e2: f64,
    pub xi: Option<f64>,
    pub g2_0: Option<f64>,
    pub concurrence: f64,
    pub pop_plus: f64,
    pub pop_minus: f64,
    pub n_photon: f64,
    pub rho_atom: Matrix4<C64>,
}

impl SimResult {
    pub fn from_state(rho: &Operator) -> Result<Self> {
        let rho_atom = two_qubit_state(rho);
        let BlockadeRatio { p_ee, p_e1, p_e2, xi } = blockade_ratio_atoms(&rho_atom);
        let (n_photon, _) = photon_moments(rho);
        let (pop_plus, pop_minus) = dicke_populations(&rho_atom);
        Ok(Self {
            p_ee,
            p_e1,
            p_e2,
            xi,
            g2_0: g2_zero(rho),
            concurrence: concurrence(&rho_atom)?,
            pop_plus,
            pop_minus,
            n_photon,
            rho_atom,
        })
    }

    pub fn log10_xi(&self) -> Option<f64> {
        self.xi.filter(|x| *x > 0.0).map(f64::log10)
    }
}

/// Scalar observables that can be selected for convergence checks and tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    PEe,
    PE1,
    PE2,
    Xi,
    G2,
    Concurrence,
    PopPlus,
    PopMinus,
    NPhoton,
}

impl Observable {
    pub const ALL: [Observable; 9] = [
        Observable::PEe,
        Observable::PE1,
        Observable::PE2,
        Observable::Xi,
        Observable::G2,
        Observable::Concurrence,
        Observable::PopPlus,
        Observable::PopMinus,
        Observable::NPhoton,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::PEe => "p_ee",
            Observable::PE1 => "p_e1",
            Observable::PE2 => "p_e2",
            Observable::Xi => "xi",
            Observable::G2 => "g2_0",
            Observable::Concurrence => "concurrence",
            Observable::PopPlus => "pop_plus",
            Observable::PopMinus => "pop_minus",
            Observable::NPhoton => "n_photon",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    pub fn value(self, r: &SimResult) -> Option<f64> {
        match self {
            Observable::PEe => Some(r.p_ee),
            Observable::PE1 => Some(r.p_e1),
            Observable::PE2 => Some(r.p_e2),
            Observable::Xi => r.xi,
            Observable::G2 => r.g2_0,
            Observable::Concurrence => Some(r.concurrence),
            Observable::PopPlus => Some(r.pop_plus),
            Observable::PopMinus => Some(r.pop_minus),
            Observable::NPhoton => Some(r.n_photon),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{ket, make_space, BasisLabel, HilbertSpace, QubitState::*};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// Embed a 4×4 qubit state times the cavity state `cav` into the full space.
    fn product(space: HilbertSpace, atoms: &Matrix4<C64>, cav: &DMatrix<C64>) -> Operator {
        let a = DMatrix::from_fn(4, 4, |i, j| atoms[(i, j)]);
        Operator::from_matrix(space, a.kronecker(cav)).unwrap()
    }

    fn fock(space: HilbertSpace, n: usize) -> DMatrix<C64> {
        let d = space.cavity_dim();
        let mut m = DMatrix::from_element(d, d, c(0.0));
        m[(n, n)] = c(1.0);
        m
    }

    fn psi_plus_mixture() -> Matrix4<C64> {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = c(0.5);
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            m[(i, j)] = c(0.25);
        }
        m
    }

    fn qubit(p_e: f64, coh: C64) -> nalgebra::Matrix2<C64> {
        nalgebra::Matrix2::new(c(1.0 - p_e), coh.conj(), coh, c(p_e))
    }

    fn kron2(a: &nalgebra::Matrix2<C64>, b: &nalgebra::Matrix2<C64>) -> Matrix4<C64> {
        Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
    }

    #[test]
    fn partial_trace_of_product_state() {
        let sp = make_space(2).unwrap();
        let sigma = kron2(&qubit(0.3, C64::new(0.1, 0.2)), &qubit(0.6, C64::new(-0.2, 0.05)));
        let mut cav = fock(sp, 1) * c(0.7);
        cav[(0, 0)] = c(0.3);
        cav[(0, 1)] = C64::new(0.1, 0.1);
        cav[(1, 0)] = C64::new(0.1, -0.1);
        let rho = product(sp, &sigma, &cav);
        let kept = two_qubit_state(&rho);
        assert!((kept - sigma).map(|z| z.norm()).max() < 1e-15);
        let cav_back = partial_trace(&rho, &[Subsystem::Cavity]).unwrap();
        assert!((cav_back - &cav).map(|z| z.norm()).max() < 1e-15);
        let q2 = partial_trace(&rho, &[Subsystem::Qubit2]).unwrap();
        assert!((q2[(1, 1)].re - 0.6).abs() < 1e-15);
        let full = partial_trace(&rho, &[Subsystem::Qubit1, Subsystem::Qubit2, Subsystem::Cavity])
            .unwrap();
        assert_eq!(&full, rho.matrix());
        assert!((kept.trace() - rho.trace()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_bell_pair() {
        let sp = make_space(1).unwrap();
        let psi = (ket(sp, BasisLabel::new(E, G, 0)) + ket(sp, BasisLabel::new(G, E, 0)))
            * c(FRAC_1_SQRT_2);
        let rho = Operator::projector(sp, &psi);
        let q1 = partial_trace(&rho, &[Subsystem::Qubit1]).unwrap();
        let half = DMatrix::<C64>::identity(2, 2) * c(0.5);
        assert!((q1 - half).map(|z| z.norm()).max() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_selection() {
        let rho = Operator::identity(make_space(1).unwrap());
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[Subsystem::Qubit2, Subsystem::Qubit1]).is_err());
        assert!(partial_trace(&rho, &[Subsystem::Cavity, Subsystem::Cavity]).is_err());
    }

    #[test]
    fn blockade_ratio_cases() {
        let s = qubit(0.35, C64::new(0.2, -0.1));
        let r = blockade_ratio_atoms(&kron2(&s, &s));
        assert!((r.xi.unwrap() - 1.0).abs() < 1e-14);

        let r = blockade_ratio_atoms(&psi_plus_mixture());
        assert_eq!(r.p_ee, 0.0);
        assert_eq!((r.p_e1, r.p_e2), (0.25, 0.25));
        assert_eq!(r.xi, Some(0.0));

        let mut ground = Matrix4::zeros();
        ground[(0, 0)] = c(1.0);
        assert_eq!(blockade_ratio_atoms(&ground).xi, None);
    }

    #[test]
    fn g2_of_fock_states() {
        let sp = make_space(4).unwrap();
        let mut gg = Matrix4::zeros();
        gg[(0, 0)] = c(1.0);
        assert_eq!(g2_zero(&product(sp, &gg, &fock(sp, 2))), Some(0.5));
        assert_eq!(g2_zero(&product(sp, &gg, &fock(sp, 1))), Some(0.0));
        assert_eq!(g2_zero(&product(sp, &gg, &fock(sp, 0))), None);
    }

    #[test]
    fn concurrence_cases() {
        let mut gg = Matrix4::zeros();
        gg[(0, 0)] = c(1.0);
        assert_eq!(concurrence(&gg).unwrap(), 0.0);

        let mut bell = Matrix4::zeros();
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            bell[(i, j)] = c(0.5);
        }
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert!((concurrence(&psi_plus_mixture()).unwrap() - 0.5).abs() < 1e-12);

        assert!(matches!(concurrence(&(gg * c(0.5))), Err(Error::TraceNotUnity(_))));
        let mut neg = gg;
        neg[(0, 0)] = c(1.01);
        neg[(3, 3)] = c(-0.01);
        assert!(matches!(concurrence(&neg), Err(Error::NotPositive(_))));
    }

    #[test]
    fn dicke_population_cases() {
        let mut bell = Matrix4::zeros();
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            bell[(i, j)] = c(0.5);
        }
        let (p, m) = dicke_populations(&bell);
        assert!((p - 1.0).abs() < 1e-15 && m.abs() < 1e-15);
        let mut eg = Matrix4::zeros();
        eg[(2, 2)] = c(1.0);
        assert_eq!(dicke_populations(&eg), (0.5, 0.5));
    }

    #[test]
    fn coherent_state_is_poissonian() {
        let sp = make_space(16).unwrap();
        let alpha = C64::new(1.2, 0.9); // |α|² = 2.25 ≤ n_max/4
        let d = sp.cavity_dim();
        let mut amp = vec![C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0)];
        for n in 1..d {
            let prev = amp[n - 1];
            amp.push(prev * alpha / (n as f64).sqrt());
        }
        let v = nalgebra::DVector::from_vec(amp);
        let norm = v.norm();
        let v = v / c(norm);
        let cav = &v * v.adjoint();
        let mut gg = Matrix4::zeros();
        gg[(0, 0)] = c(1.0);
        let g2 = g2_zero(&product(sp, &gg, &cav)).unwrap();
        assert!((g2 - 1.0).abs() < 1e-6, "g2 = {g2}");
    }
}
