//! Dense complex linear algebra in dimensions 2 and 4.
//!
//! The four-dimensional space is the tensor product polarization ⊗ transverse
//! mode, with amplitudes ordered `|H,TEM-H⟩, |H,TEM-V⟩, |V,TEM-H⟩, |V,TEM-V⟩`
//! (index `2·pol + tm`). `TEM-H` is the TEM01 mode and `TEM-V` the TEM10 mode.

use alloc::format;
use core::fmt;
use core::ops::Mul;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub type Complex = num_complex::Complex64;

/// Normalization tolerance on `Σ|a_i|²` for states.
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise tolerance on `U†U − I`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Two states are the same ray when `|⟨a|b⟩| > 1 − SAME_RAY_TOL`.
pub const SAME_RAY_TOL: f64 = 1e-10;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

fn all_finite(amps: &[Complex]) -> bool {
    amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
}

fn norm_sqr(amps: &[Complex]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn check_normalized(amps: &[Complex]) -> Result<()> {
    if !all_finite(amps) {
        return Err(Error::contract("state has non-finite amplitude"));
    }
    let n = norm_sqr(amps);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::contract(format!("state norm² is {n}, expected 1")));
    }
    Ok(())
}

fn normalized<const N: usize>(mut amps: [Complex; N]) -> Result<[Complex; N]> {
    if !all_finite(&amps) {
        return Err(Error::invalid("non-finite amplitude"));
    }
    let n = libm::sqrt(norm_sqr(&amps));
    if n < 1e-300 {
        return Err(Error::invalid("zero vector cannot be normalized"));
    }
    for a in amps.iter_mut() {
        *a /= n;
    }
    Ok(amps)
}

/// Normalized single-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState2([Complex; 2]);

impl PureState2 {
    pub fn new(amps: [Complex; 2]) -> Result<Self> {
        check_normalized(&amps)?;
        Ok(Self(amps))
    }

    pub fn from_unnormalized(amps: [Complex; 2]) -> Result<Self> {
        normalized(amps).map(Self)
    }

    pub fn basis(k: usize) -> Self {
        let mut amps = [ZERO; 2];
        amps[k] = ONE;
        Self(amps)
    }

    pub fn amplitudes(&self) -> &[Complex; 2] {
        &self.0
    }

    pub fn overlap(&self, other: &Self) -> Complex {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    /// Product state `self ⊗ tm`, polarization first.
    pub fn tensor(&self, tm: &PureState2) -> PureState4 {
        let [a, b] = self.0;
        let [c, d] = tm.0;
        PureState4([a * c, a * d, b * c, b * d])
    }
}

/// Normalized state of the polarization ⊗ transverse-mode photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState4([Complex; 4]);

impl PureState4 {
    pub fn new(amps: [Complex; 4]) -> Result<Self> {
        check_normalized(&amps)?;
        Ok(Self(amps))
    }

    pub fn from_unnormalized(amps: [Complex; 4]) -> Result<Self> {
        normalized(amps).map(Self)
    }

    pub(crate) fn from_normalized_unchecked(amps: [Complex; 4]) -> Self {
        Self(amps)
    }

    /// Canonical basis state `|pol, tm⟩` with index `k = 2·pol + tm`.
    pub fn basis(k: usize) -> Self {
        let mut amps = [ZERO; 4];
        amps[k] = ONE;
        Self(amps)
    }

    pub fn amplitudes(&self) -> &[Complex; 4] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn overlap(&self, other: &Self) -> Complex {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// Equality up to a global phase.
    pub fn same_ray(&self, other: &Self) -> bool {
        self.overlap(other).norm() > 1.0 - SAME_RAY_TOL
    }
}

/// Square complex matrix of dimension 2 or 4, stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Operator {
    dim: usize,
    m: [Complex; 16],
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.dim {
            list.entry(&&self.m[r * self.dim..(r + 1) * self.dim]);
        }
        list.finish()
    }
}

impl Operator {
    pub fn identity(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "dimension must be 2 or 4");
        let mut m = [ZERO; 16];
        for i in 0..dim {
            m[i * dim + i] = ONE;
        }
        Self { dim, m }
    }

    pub fn from_rows2(rows: [[Complex; 2]; 2]) -> Self {
        let mut m = [ZERO; 16];
        for (r, row) in rows.iter().enumerate() {
            m[r * 2..r * 2 + 2].copy_from_slice(row);
        }
        Self { dim: 2, m }
    }

    pub fn from_rows4(rows: [[Complex; 4]; 4]) -> Self {
        let mut m = [ZERO; 16];
        for (r, row) in rows.iter().enumerate() {
            m[r * 4..r * 4 + 4].copy_from_slice(row);
        }
        Self { dim: 4, m }
    }

    /// Real 2×2 matrix, handy for rotations and retarders.
    pub fn real2(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::from_rows2([
            [Complex::new(a, 0.0), Complex::new(b, 0.0)],
            [Complex::new(c, 0.0), Complex::new(d, 0.0)],
        ])
    }

    pub fn diag4(d: [Complex; 4]) -> Self {
        let mut m = [ZERO; 16];
        for (i, v) in d.into_iter().enumerate() {
            m[i * 4 + i] = v;
        }
        Self { dim: 4, m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        assert!(row < self.dim && col < self.dim);
        self.m[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = [ZERO; 16];
        for r in 0..n {
            for c in 0..n {
                m[c * n + r] = self.m[r * n + c].conj();
            }
        }
        Self { dim: n, m }
    }

    pub fn scale(&self, k: Complex) -> Self {
        let mut out = *self;
        out.m.iter_mut().for_each(|v| *v *= k);
        out
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::invalid(format!(
                "cannot multiply {0}×{0} by {1}×{1}",
                self.dim, rhs.dim
            )));
        }
        let n = self.dim;
        let mut m = [ZERO; 16];
        for r in 0..n {
            for c in 0..n {
                m[r * n + c] = (0..n).map(|k| self.m[r * n + k] * rhs.m[k * n + c]).sum();
            }
        }
        Ok(Self { dim: n, m })
    }

    /// Kronecker product `self ⊗ tm` of two 2×2 operators, polarization
    /// factor first.
    pub fn tensor(&self, tm: &Self) -> Result<Self> {
        if self.dim != 2 || tm.dim != 2 {
            return Err(Error::invalid("tensor expects two 2×2 operators"));
        }
        let mut m = [ZERO; 16];
        for pr in 0..2 {
            for pc in 0..2 {
                for tr in 0..2 {
                    for tc in 0..2 {
                        m[(2 * pr + tr) * 4 + 2 * pc + tc] =
                            self.m[pr * 2 + pc] * tm.m[tr * 2 + tc];
                    }
                }
            }
        }
        Ok(Self { dim: 4, m })
    }

    /// Largest entrywise deviation `max |(A - B)_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        let n = self.dim * self.dim;
        self.m[..n]
            .iter()
            .zip(other.m[..n].iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.adjoint() * *self;
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self) -> bool {
        self.m.iter().all(|a| a.re.is_finite() && a.im.is_finite())
            && self.unitarity_defect() <= UNITARY_TOL
    }

    /// Equality up to a global phase: `self ≈ e^{iφ}·other` entrywise.
    pub fn equal_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let n = self.dim * self.dim;
        // pick the phase from the largest entry of `other`
        let (idx, _) = other.m[..n]
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, v)| if v.norm() > best.1 { (i, v.norm()) } else { best });
        if other.m[idx].norm() == 0.0 {
            return self.max_abs_diff(other) <= tol;
        }
        let phase = self.m[idx] / other.m[idx];
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        self.max_abs_diff(&other.scale(phase)) <= tol
    }

    /// Applies a 4×4 unitary to a state. Rejects non-unitary operators.
    pub fn apply(&self, psi: &PureState4) -> Result<PureState4> {
        if self.dim != 4 {
            return Err(Error::invalid("apply expects a 4×4 operator"));
        }
        if !self.is_unitary() {
            return Err(Error::contract(format!(
                "operator is not unitary (defect {:e})",
                self.unitarity_defect()
            )));
        }
        Ok(self.apply_unitary(psi))
    }

    /// Matrix-vector product for an operator already known to be unitary.
    /// Renormalizes to absorb rounding drift.
    pub(crate) fn apply_unitary(&self, psi: &PureState4) -> PureState4 {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.m[r * 4 + c] * psi.0[c]).sum();
        }
        let n = libm::sqrt(norm_sqr(&out));
        for a in out.iter_mut() {
            *a /= n;
        }
        PureState4(out)
    }

    pub fn apply2(&self, psi: &PureState2) -> Result<PureState2> {
        if self.dim != 2 {
            return Err(Error::invalid("apply2 expects a 2×2 operator"));
        }
        if !self.is_unitary() {
            return Err(Error::contract("operator is not unitary"));
        }
        let [a, b] = psi.0;
        PureState2::from_unnormalized([
            self.m[0] * a + self.m[1] * b,
            self.m[2] * a + self.m[3] * b,
        ])
    }

    /// `‖AB − BA‖_max`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let ab = *self * *other;
        let ba = *other * *self;
        ab.max_abs_diff(&ba)
    }

    /// `⟨psi|self|psi⟩` for a 4×4 operator.
    pub fn expectation(&self, psi: &PureState4) -> Complex {
        assert_eq!(self.dim, 4);
        let mut acc = ZERO;
        for r in 0..4 {
            for c in 0..4 {
                acc += psi.0[r].conj() * self.m[r * 4 + c] * psi.0[c];
            }
        }
        acc
    }

    /// Residual `‖A·psi − λ·psi‖` with `λ = ⟨psi|A|psi⟩`; zero for an eigenvector.
    pub fn eigen_residual(&self, psi: &PureState4) -> (Complex, f64) {
        assert_eq!(self.dim, 4);
        let lambda = self.expectation(psi);
        let mut res = 0.0;
        for r in 0..4 {
            let row: Complex = (0..4).map(|c| self.m[r * 4 + c] * psi.0[c]).sum();
            res += (row - lambda * psi.0[r]).norm_sqr();
        }
        (lambda, libm::sqrt(res))
    }
}

impl Mul for Operator {
    type Output = Operator;

    /// # Panics
    /// On mismatched dimensions; use [`Operator::matmul`] for a fallible product.
    fn mul(self, rhs: Operator) -> Operator {
        self.matmul(&rhs).expect("operator dimensions must match")
    }
}

/// Free-function form of [`Operator::tensor`].
pub fn tensor(pol: &Operator, tm: &Operator) -> Result<Operator> {
    pol.tensor(tm)
}

/// Single-qubit Pauli matrices, `Z = diag(1, −1)`, `Y = [[0, −i], [i, 0]]`.
pub mod pauli {
    use super::{Complex, Operator, ONE, ZERO};

    pub fn i() -> Operator {
        Operator::identity(2)
    }

    pub fn x() -> Operator {
        Operator::from_rows2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> Operator {
        let i = Complex::new(0.0, 1.0);
        Operator::from_rows2([[ZERO, -i], [i, ZERO]])
    }

    pub fn z() -> Operator {
        Operator::from_rows2([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// Named two-qubit Pauli product, e.g. `pair('Y', 'X')` for `Y⊗X`.
    ///
    /// # Panics
    /// On a letter other than `I`, `X`, `Y`, `Z`.
    pub fn pair(pol: char, tm: char) -> Operator {
        let pick = |c: char| match c {
            'I' => i(),
            'X' => x(),
            'Y' => y(),
            'Z' => z(),
            other => panic!("unknown Pauli letter {other}"),
        };
        pick(pol).tensor(&pick(tm)).expect("2×2 factors")
    }
}

/// Checks that four states form an orthonormal basis within `tol` on the Gram
/// matrix.
pub fn check_orthonormal(basis: &[PureState4; 4], tol: f64) -> Result<()> {
    for i in 0..4 {
        for j in 0..4 {
            let g = basis[i].overlap(&basis[j]);
            let expect = if i == j { ONE } else { ZERO };
            if (g - expect).norm() > tol {
                return Err(Error::contract(format!(
                    "basis is not orthonormal: ⟨{i}|{j}⟩ = {g}"
                )));
            }
        }
    }
    Ok(())
}

/// Samples a measurement outcome `i` with probability `|⟨basis_i|psi⟩|²`.
pub fn born_sample(psi: &PureState4, basis: &[PureState4; 4], rng: &mut RandomStream) -> Result<usize> {
    check_orthonormal(basis, UNITARY_TOL)?;
    let probs: [f64; 4] = core::array::from_fn(|i| basis[i].fidelity(psi));
    Ok(sample_index(&probs, rng))
}

/// Draws from a discrete distribution. `probs` need not be exactly
/// normalized; the last nonzero entry absorbs rounding.
pub(crate) fn sample_index(probs: &[f64], rng: &mut RandomStream) -> usize {
    let total: f64 = probs.iter().sum();
    let u = rng.next_f64() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
