//! Composite state space qubit₁ ⊗ qubit₂ ⊗ cavity and the dense operator
//! algebra built on it.
//!
//! Basis ordering is row-major over the factors: the flat index of
//! `|q1, q2, n⟩` is `(q1·2 + q2)·(n_max+1) + n` with `g = 0`, `e = 1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Two qubits and one truncated bosonic mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    n_max: usize,
}

impl HilbertSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        // The two-photon state |gg,2> is part of the blockade pathway; n_max = 0
        // would remove the whole cavity.
        if n_max == 0 {
            return Err(Error::InvalidTruncation(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn cavity_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn subsystem_dims(&self) -> [usize; 3] {
        [2, 2, self.cavity_dim()]
    }

    pub fn total_dim(&self) -> usize {
        4 * self.cavity_dim()
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        (0..self.total_dim()).map(move |i| BasisLabel::from_index(*self, i))
    }
}

/// Convenience wrapper over [`HilbertSpace::new`].
pub fn make_space(n_max: usize) -> Result<HilbertSpace> {
    HilbertSpace::new(n_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitState {
    G,
    E,
}

impl QubitState {
    fn index(self) -> usize {
        match self {
            QubitState::G => 0,
            QubitState::E => 1,
        }
    }

    fn from_index(i: usize) -> Self {
        if i == 0 {
            QubitState::G
        } else {
            QubitState::E
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Qubit {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub qubit1: QubitState,
    pub qubit2: QubitState,
    pub photons: usize,
}

impl BasisLabel {
    pub fn new(qubit1: QubitState, qubit2: QubitState, photons: usize) -> Self {
        Self { qubit1, qubit2, photons }
    }

    pub fn index(&self, space: HilbertSpace) -> usize {
        debug_assert!(self.photons <= space.n_max());
        (self.qubit1.index() * 2 + self.qubit2.index()) * space.cavity_dim() + self.photons
    }

    pub fn from_index(space: HilbertSpace, index: usize) -> Self {
        let c = space.cavity_dim();
        let qubits = index / c;
        Self {
            qubit1: QubitState::from_index(qubits / 2),
            qubit2: QubitState::from_index(qubits % 2),
            photons: index % c,
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = |s: QubitState| if s == QubitState::G { 'g' } else { 'e' };
        write!(f, "|{}{},{}>", q(self.qubit1), q(self.qubit2), self.photons)
    }
}

/// Basis ket as a state vector.
pub fn ket(space: HilbertSpace, label: BasisLabel) -> DVector<C64> {
    let mut v = DVector::from_element(space.total_dim(), ZERO);
    v[label.index(space)] = ONE;
    v
}

/// Dense complex operator on a [`HilbertSpace`].
///
/// Arithmetic through the `std::ops` traits panics when the operands live on
/// different spaces; [`Operator::compose`] and [`Operator::commutator`] report
/// the mismatch as an error instead.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    data: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(space: HilbertSpace, data: DMatrix<C64>) -> Result<Self> {
        let dim = space.total_dim();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::ShapeMismatch { rows: data.nrows(), cols: data.ncols(), dim });
        }
        Ok(Self { space, data })
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self { space, data: DMatrix::from_element(d, d, ZERO) }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self { space, data: DMatrix::identity(d, d) }
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(space: HilbertSpace, psi: &DVector<C64>) -> Self {
        Self { space, data: psi * psi.adjoint() }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, data: self.data.adjoint() }
    }

    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self { space: self.space, data: &self.data * &other.data })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space,
            data: &self.data * &other.data - &other.data * &self.data,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { space: self.space, data: &self.data * factor }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// `tr(self · rho)`
    pub fn expectation(&self, rho: &Operator) -> C64 {
        assert_eq!(self.space, rho.space, "operator space mismatch");
        let d = self.space.total_dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.data[(i, k)] * rho.data[(k, i)];
            }
        }
        acc
    }

    /// `⟨bra|self|ket⟩`
    pub fn element(&self, bra: &DVector<C64>, ket: &DVector<C64>) -> C64 {
        (bra.adjoint() * &self.data * ket)[(0, 0)]
    }

    /// `max |A − A†|` over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.space.total_dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn check_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::space_mismatch(self.space, other.space));
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        Operator { space: self.space, data: &self.data + &rhs.data }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        Operator { space: self.space, data: &self.data - &rhs.data }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        Operator { space: self.space, data: &self.data * &rhs.data }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self * -1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Factor {
    Qubit1,
    Qubit2,
    Cavity,
}

fn embed(space: HilbertSpace, factor: Factor, local: &DMatrix<C64>) -> Operator {
    let eye = |n| DMatrix::<C64>::identity(n, n);
    let c = space.cavity_dim();
    let data = match factor {
        Factor::Qubit1 => local.kronecker(&eye(2)).kronecker(&eye(c)),
        Factor::Qubit2 => eye(2).kronecker(local).kronecker(&eye(c)),
        Factor::Cavity => eye(2).kronecker(&eye(2)).kronecker(local),
    };
    Operator { space, data }
}

fn qubit_factor(which: Qubit) -> Factor {
    match which {
        Qubit::First => Factor::Qubit1,
        Qubit::Second => Factor::Qubit2,
    }
}

/// Photon annihilation `a` with hard truncation at `n_max`.
pub fn annihilation(space: HilbertSpace) -> Operator {
    let c = space.cavity_dim();
    let mut local = DMatrix::from_element(c, c, ZERO);
    for n in 1..c {
        local[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    embed(space, Factor::Cavity, &local)
}

pub fn creation(space: HilbertSpace) -> Operator {
    annihilation(space).adjoint()
}

pub fn number(space: HilbertSpace) -> Operator {
    let c = space.cavity_dim();
    let local = DMatrix::from_diagonal(&DVector::from_fn(c, |n, _| C64::new(n as f64, 0.0)));
    embed(space, Factor::Cavity, &local)
}

/// `S₋ = |g⟩⟨e|` on the selected qubit.
pub fn qubit_lowering(space: HilbertSpace, which: Qubit) -> Operator {
    let mut local = DMatrix::from_element(2, 2, ZERO);
    local[(0, 1)] = ONE;
    embed(space, qubit_factor(which), &local)
}

pub fn qubit_raising(space: HilbertSpace, which: Qubit) -> Operator {
    qubit_lowering(space, which).adjoint()
}

/// `S_z = |e⟩⟨e| − |g⟩⟨g|` on the selected qubit.
pub fn qubit_sz(space: HilbertSpace, which: Qubit) -> Operator {
    let mut local = DMatrix::from_element(2, 2, ZERO);
    local[(0, 0)] = -ONE;
    local[(1, 1)] = ONE;
    embed(space, qubit_factor(which), &local)
}

/// `|e⟩⟨e|` on the selected qubit.
pub fn qubit_excited_projector(space: HilbertSpace, which: Qubit) -> Operator {
    let mut local = DMatrix::from_element(2, 2, ZERO);
    local[(1, 1)] = ONE;
    embed(space, qubit_factor(which), &local)
}

/// Symmetric and antisymmetric single-excitation states `|±,n⟩`,
/// indexed by photon number.
#[derive(Clone, Debug)]
pub struct DickeVectors {
    pub plus: Vec<DVector<C64>>,
    pub minus: Vec<DVector<C64>>,
}

pub fn dicke_vectors(space: HilbertSpace) -> DickeVectors {
    use QubitState::{E, G};
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = Vec::with_capacity(space.cavity_dim());
    let mut minus = Vec::with_capacity(space.cavity_dim());
    for n in 0..space.cavity_dim() {
        let eg = ket(space, BasisLabel::new(E, G, n));
        let ge = ket(space, BasisLabel::new(G, E, n));
        plus.push((&eg + &ge) * C64::new(s, 0.0));
        minus.push((&eg - &ge) * C64::new(s, 0.0));
    }
    DickeVectors { plus, minus }
}
