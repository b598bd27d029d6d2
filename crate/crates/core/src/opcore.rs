// Copyright 2026 The qnp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense complex linear algebra and the gate library for registers of at
//! most a handful of qubits.
//!
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
//! basis-state index: `|q0 q1 q2>` has index `4*q0 + 2*q1 + q2`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance for structural checks.
pub const DEFAULT_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Value of bit `qubit` of basis index `index` in an `n`-qubit register.
#[inline]
pub fn bit(index: usize, qubit: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - 1 - qubit)) & 1
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// `|a><b|` for column vectors `a`, `b`.
    pub fn outer(a: &[C64], b: &[C64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let dim = a.len();
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = a[r] * b[c].conj();
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, C64) -> C64) -> Self {
        let mut out = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(r, c)] = f(r, c, self[(r, c)]);
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let dim = self.dim * other.dim;
        let mut out = Self::zeros(dim);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self[(r1, c1)];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        out[(r1 * other.dim + r2, c1 * other.dim + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(out)
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.matmul(other)? - &other.matmul(self)?)
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Largest deviation `|A_rc - conj(A_cr)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Largest entry of `|U U^dagger - 1|`.
    pub fn unitary_defect(&self) -> f64 {
        let prod = self
            .matmul(&self.adjoint())
            .expect("square matrix times its adjoint");
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_fn(self.dim, self.dim, |r, c| self[(r, c)]);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix addition");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix subtraction");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("dimension mismatch in matrix product")
    }
}

fn dim_to_qubits(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Whether a [`DensityMatrix`] is a normalised state or a traceless
/// deviation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// Trace one.
    Normalized,
    /// Trace zero: the part of an NMR ensemble state that carries signal.
    Deviation,
}

/// Hermitian operator over `n_qubits` with unit trace, or zero trace in
/// deviation mode. Positivity is only checked by [`DensityMatrix::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
    kind: StateKind,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, StateKind::Normalized, DEFAULT_TOL)
    }

    pub fn deviation(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, StateKind::Deviation, DEFAULT_TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, kind: StateKind, tol: f64) -> Result<Self> {
        let n_qubits = dim_to_qubits(matrix.dim())?;
        let defect = matrix.hermitian_defect();
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        let expected = match kind {
            StateKind::Normalized => 1.0,
            StateKind::Deviation => 0.0,
        };
        let tr = matrix.trace();
        if (tr - C64::new(expected, 0.0)).norm() > tol {
            return Err(Error::BadTrace {
                expected,
                found: tr.re,
            });
        }
        Ok(Self {
            n_qubits,
            matrix,
            kind,
        })
    }

    /// `|psi><psi|` for a normalised state vector.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&psi, &psi)?)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n_qubits} qubit(s)"
            )));
        }
        let mut m = ComplexMatrix::zeros(dim);
        m[(index, index)] = ONE;
        Self::new(m)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
            kind: StateKind::Normalized,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// `rho (x) sigma`; the result is a deviation operator if either factor is.
    pub fn tensor(&self, other: &Self) -> Self {
        let kind = if self.kind == StateKind::Deviation || other.kind == StateKind::Deviation {
            StateKind::Deviation
        } else {
            StateKind::Normalized
        };
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: self.matrix.kron(&other.matrix),
            kind,
        }
    }

    /// Full physical check: Hermitian, correct trace, and for normalised
    /// states no eigenvalue below `-tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let checked = Self::with_tol(self.matrix.clone(), self.kind, tol)?;
        if checked.kind == StateKind::Normalized {
            let min = self.matrix.hermitian_eigenvalues()[0];
            if min < -tol {
                return Err(Error::NotPositive(min));
            }
        }
        Ok(())
    }

    /// Same kind and size, new entries. Callers must preserve Hermiticity and trace.
    pub(crate) fn with_matrix(&self, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.dim(), self.dim());
        Self {
            n_qubits: self.n_qubits,
            matrix,
            kind: self.kind,
        }
    }

    pub(crate) fn check_qubits(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// A unitary operator on `n_qubits`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl UnitaryOp {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, 1e-10)
    }

    pub fn with_tol(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let n_qubits = dim_to_qubits(matrix.dim())?;
        let defect = matrix.unitary_defect();
        if defect > tol {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(1 << n_qubits),
        }
    }

    /// Diagonal unitary with entries `exp(-i phase_k)`.
    pub fn from_phases(phases: &[f64]) -> Result<Self> {
        let diag: Vec<C64> = phases.iter().map(|&p| C64::from_polar(1.0, -p)).collect();
        Self::new(ComplexMatrix::from_diag(&diag))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * other`, i.e. `other` acts first.
    pub fn then_after(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.matmul(&other.matrix)?,
        })
    }

    /// Composes a circuit given in time order.
    pub fn circuit(n_qubits: usize, gates: &[UnitaryOp]) -> Result<Self> {
        gates
            .iter()
            .try_fold(Self::identity(n_qubits), |acc, g| g.then_after(&acc))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: self.matrix.kron(&other.matrix),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let data = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::from_vec(2, data.to_vec()).expect("2x2")
    }
}

fn check_index(index: usize, n_qubits: usize) -> Result<()> {
    if index >= n_qubits {
        return Err(Error::QubitOutOfRange { index, n_qubits });
    }
    Ok(())
}

fn check_distinct(indices: &[usize], n_qubits: usize) -> Result<()> {
    for (k, &i) in indices.iter().enumerate() {
        check_index(i, n_qubits)?;
        if indices[..k].contains(&i) {
            return Err(Error::RepeatedQubit(i));
        }
    }
    Ok(())
}

/// Embeds single-qubit matrices at the given targets, identity elsewhere.
fn embed(factors: &[(usize, ComplexMatrix)], n_qubits: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let mut out = ComplexMatrix::identity(1);
    for q in 0..n_qubits {
        let f = factors
            .iter()
            .find(|(t, _)| *t == q)
            .map(|(_, m)| m)
            .unwrap_or(&id);
        out = out.kron(f);
    }
    out
}

/// Single Pauli on `target`, identity on every other qubit.
pub fn pauli(symbol: Pauli, target: usize, n_qubits: usize) -> Result<UnitaryOp> {
    check_index(target, n_qubits)?;
    Ok(UnitaryOp {
        n_qubits,
        matrix: embed(&[(target, symbol.matrix())], n_qubits),
    })
}

/// Tensor product of Paulis on distinct qubits, e.g. `Z0 Z2`.
pub fn pauli_string(terms: &[(usize, Pauli)], n_qubits: usize) -> Result<UnitaryOp> {
    let targets: Vec<usize> = terms.iter().map(|(t, _)| *t).collect();
    check_distinct(&targets, n_qubits)?;
    let factors: Vec<(usize, ComplexMatrix)> =
        terms.iter().map(|&(t, p)| (t, p.matrix())).collect();
    Ok(UnitaryOp {
        n_qubits,
        matrix: embed(&factors, n_qubits),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Cnot { control: usize, target: usize },
    Toffoli { c1: usize, c2: usize, target: usize },
    Hadamard(usize),
    /// `exp(-i angle Z / 2)`.
    RotZ { target: usize, angle: f64 },
    /// `exp(-i angle/2 (cos(phase) X + sin(phase) Y))`.
    RotXy { target: usize, phase: f64, angle: f64 },
}

/// Permutation unitary flipping `target` when all `controls` are set.
fn controlled_not(controls: &[usize], target: usize, n_qubits: usize) -> ComplexMatrix {
    let dim = 1usize << n_qubits;
    let mut m = ComplexMatrix::zeros(dim);
    let tmask = 1usize << (n_qubits - 1 - target);
    for s in 0..dim {
        let fire = controls.iter().all(|&c| bit(s, c, n_qubits) == 1);
        let out = if fire { s ^ tmask } else { s };
        m[(out, s)] = ONE;
    }
    m
}

pub fn gate(kind: Gate, n_qubits: usize) -> Result<UnitaryOp> {
    let matrix = match kind {
        Gate::Cnot { control, target } => {
            check_distinct(&[control, target], n_qubits)?;
            controlled_not(&[control], target, n_qubits)
        }
        Gate::Toffoli { c1, c2, target } => {
            check_distinct(&[c1, c2, target], n_qubits)?;
            controlled_not(&[c1, c2], target, n_qubits)
        }
        Gate::Hadamard(t) => {
            check_index(t, n_qubits)?;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            embed(&[(t, ComplexMatrix::from_real(2, &[h, h, h, -h])?)], n_qubits)
        }
        Gate::RotZ { target, angle } => {
            check_index(target, n_qubits)?;
            let d = [C64::from_polar(1.0, -angle / 2.0), C64::from_polar(1.0, angle / 2.0)];
            embed(&[(target, ComplexMatrix::from_diag(&d))], n_qubits)
        }
        Gate::RotXy { target, phase, angle } => {
            check_index(target, n_qubits)?;
            let (s, c) = (angle / 2.0).sin_cos();
            let off = -I * s;
            let m = ComplexMatrix::from_vec(
                2,
                vec![
                    C64::new(c, 0.0),
                    off * C64::from_polar(1.0, -phase),
                    off * C64::from_polar(1.0, phase),
                    C64::new(c, 0.0),
                ],
            )?;
            embed(&[(target, m)], n_qubits)
        }
    };
    Ok(UnitaryOp { n_qubits, matrix })
}

/// `U rho U^dagger`.
pub fn apply(rho: &DensityMatrix, u: &UnitaryOp) -> Result<DensityMatrix> {
    rho.check_qubits(u.n_qubits)?;
    let m = u.matrix.matmul(&rho.matrix)?.matmul(&u.matrix.adjoint())?;
    Ok(rho.with_matrix(m))
}

/// Conjugation by `diag(exp(-i phases))`; populations are left bit-exact.
pub(crate) fn conjugate_diagonal(rho: &DensityMatrix, phases: &[f64]) -> DensityMatrix {
    debug_assert_eq!(phases.len(), rho.dim());
    rho.with_matrix(rho.matrix.map_entries(|r, c, z| {
        if r == c {
            z
        } else {
            z * C64::from_polar(1.0, -(phases[r] - phases[c]))
        }
    }))
}

/// Traces out every qubit not in `keep`. Kept qubits retain their relative order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let n = rho.n_qubits;
    check_distinct(keep, n)?;
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let nk = kept.len();

    let compose = |sub: usize, env: usize| -> usize {
        let mut full = 0usize;
        for (j, &q) in kept.iter().enumerate() {
            full |= bit(sub, j, nk) << (n - 1 - q);
        }
        for (j, &q) in traced.iter().enumerate() {
            full |= bit(env, j, traced.len().max(1)) << (n - 1 - q);
        }
        full
    };

    let sub_dim = 1usize << nk;
    let env_dim = 1usize << traced.len();
    let mut out = ComplexMatrix::zeros(sub_dim);
    for r in 0..sub_dim {
        for c in 0..sub_dim {
            let mut acc = ZERO;
            for e in 0..env_dim {
                acc += rho.matrix[(compose(r, e), compose(c, e))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix {
        n_qubits: nk,
        matrix: out,
        kind: rho.kind,
    })
}

/// `Tr(obs rho)` for a Hermitian observable.
pub fn expectation(rho: &DensityMatrix, obs: &ComplexMatrix) -> Result<f64> {
    expectation_with_tol(rho, obs, DEFAULT_TOL)
}

pub fn expectation_with_tol(rho: &DensityMatrix, obs: &ComplexMatrix, tol: f64) -> Result<f64> {
    if obs.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: obs.dim(),
        });
    }
    let defect = obs.hermitian_defect();
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    let v = obs.matmul(&rho.matrix)?.trace();
    if v.im.abs() > tol {
        return Err(Error::ComplexExpectation(v.im));
    }
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ket(bits: &[C64]) -> Vec<C64> {
        bits.to_vec()
    }

    fn plus() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&ket(&[C64::new(h, 0.0), C64::new(h, 0.0)])).unwrap()
    }

    fn minus() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&ket(&[C64::new(h, 0.0), C64::new(-h, 0.0)])).unwrap()
    }

    #[test]
    fn pauli_z_single() {
        let z = pauli(Pauli::Z, 0, 1).unwrap();
        assert_eq!(z.matrix().diagonal(), vec![ONE, -ONE]);
        assert_eq!(z.matrix()[(0, 1)], ZERO);
    }

    #[test]
    fn pauli_z_eigenvalue_on_01() {
        // |01> has index 1; Z on qubit 1 sees bit value 1.
        let z = pauli(Pauli::Z, 1, 2).unwrap();
        assert_eq!(z.matrix()[(1, 1)], -ONE);
        assert_eq!(z.matrix()[(2, 2)], ONE);
    }

    #[test]
    fn xy_commutator() {
        let x = pauli(Pauli::X, 0, 1).unwrap();
        let y = pauli(Pauli::Y, 0, 1).unwrap();
        let z = pauli(Pauli::Z, 0, 1).unwrap();
        let comm = x.matrix().commutator(y.matrix()).unwrap();
        assert!(comm.approx_eq(&z.matrix().scale(C64::new(0.0, 2.0)), 1e-15));
    }

    #[test]
    fn pauli_out_of_range() {
        assert_eq!(
            pauli(Pauli::X, 2, 2),
            Err(Error::QubitOutOfRange { index: 2, n_qubits: 2 })
        );
    }

    #[test]
    fn cnot_truth_table() {
        let u = gate(Gate::Cnot { control: 0, target: 1 }, 2).unwrap();
        // |10> (index 2) -> |11> (index 3)
        assert_eq!(u.matrix()[(3, 2)], ONE);
        assert_eq!(u.matrix()[(0, 0)], ONE);
    }

    #[test]
    fn toffoli_truth_table() {
        let u = gate(Gate::Toffoli { c1: 1, c2: 2, target: 0 }, 3).unwrap();
        // |011> (3) -> |111> (7)
        assert_eq!(u.matrix()[(7, 3)], ONE);
        assert_eq!(u.matrix()[(1, 1)], ONE);
    }

    #[test]
    fn repeated_indices_rejected() {
        assert_eq!(
            gate(Gate::Cnot { control: 1, target: 1 }, 2),
            Err(Error::RepeatedQubit(1))
        );
        assert_eq!(
            gate(Gate::Toffoli { c1: 0, c2: 2, target: 0 }, 3),
            Err(Error::RepeatedQubit(0))
        );
    }

    #[test]
    fn rot_xy_pi_is_minus_i_x() {
        let u = gate(Gate::RotXy { target: 0, phase: 0.0, angle: PI }, 1).unwrap();
        let x = Pauli::X.matrix().scale(-I);
        assert!(u.matrix().approx_eq(&x, 1e-15));
    }

    #[test]
    fn apply_x_flips_zero() {
        let rho = DensityMatrix::basis(1, 0).unwrap();
        let out = apply(&rho, &pauli(Pauli::X, 0, 1).unwrap()).unwrap();
        assert!(out.matrix().approx_eq(DensityMatrix::basis(1, 1).unwrap().matrix(), 0.0));
    }

    #[test]
    fn apply_identity() {
        let rho = plus();
        let out = apply(&rho, &UnitaryOp::identity(1)).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn rot_z_pi_maps_plus_to_minus() {
        let u = gate(Gate::RotZ { target: 0, angle: PI }, 1).unwrap();
        let out = apply(&plus(), &u).unwrap();
        assert!(out.matrix().approx_eq(minus().matrix(), 1e-15));
    }

    #[test]
    fn apply_dimension_mismatch() {
        let rho = plus();
        assert!(matches!(
            apply(&rho, &UnitaryOp::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = DensityMatrix::basis(2, 0).unwrap();
        let out = partial_trace(&rho, &[0]).unwrap();
        assert_eq!(out.matrix(), DensityMatrix::basis(1, 0).unwrap().matrix());
    }

    #[test]
    fn partial_trace_bell_is_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::from_pure(&[
            C64::new(h, 0.0),
            ZERO,
            ZERO,
            C64::new(h, 0.0),
        ])
        .unwrap();
        let out = partial_trace(&bell, &[0]).unwrap();
        assert!(out
            .matrix()
            .approx_eq(DensityMatrix::maximally_mixed(1).matrix(), 1e-15));
    }

    #[test]
    fn partial_trace_product_of_random_states() {
        let rho = DensityMatrix::new(
            ComplexMatrix::from_vec(
                2,
                vec![
                    C64::new(0.7, 0.0),
                    C64::new(0.1, -0.2),
                    C64::new(0.1, 0.2),
                    C64::new(0.3, 0.0),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let sigma = DensityMatrix::new(
            ComplexMatrix::from_vec(
                2,
                vec![
                    C64::new(0.45, 0.0),
                    C64::new(-0.3, 0.1),
                    C64::new(-0.3, -0.1),
                    C64::new(0.55, 0.0),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let joint = rho.tensor(&sigma);
        let a = partial_trace(&joint, &[0]).unwrap();
        let b = partial_trace(&joint, &[1]).unwrap();
        assert!(a.matrix().approx_eq(rho.matrix(), 1e-15));
        assert!(b.matrix().approx_eq(sigma.matrix(), 1e-15));
    }

    #[test]
    fn partial_trace_empty_keep() {
        assert_eq!(
            partial_trace(&plus(), &[]),
            Err(Error::EmptyKeepSet)
        );
    }

    #[test]
    fn expectations() {
        let z = Pauli::Z.matrix();
        let x = Pauli::X.matrix();
        assert_eq!(expectation(&DensityMatrix::basis(1, 0).unwrap(), &z).unwrap(), 1.0);
        assert_eq!(expectation(&DensityMatrix::maximally_mixed(1), &z).unwrap(), 0.0);
        assert!((expectation(&plus(), &x).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            expectation(&plus(), &m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn deviation_mode_accepts_traceless() {
        let z = Pauli::Z.matrix();
        assert!(DensityMatrix::new(z.clone()).is_err());
        let dev = DensityMatrix::deviation(z).unwrap();
        assert_eq!(dev.kind(), StateKind::Deviation);
        dev.validate(DEFAULT_TOL).unwrap();
    }

    #[test]
    fn validate_catches_negative_eigenvalue() {
        let m = ComplexMatrix::from_real(2, &[1.2, 0.0, 0.0, -0.2]).unwrap();
        let rho = DensityMatrix::new(m).unwrap();
        assert!(matches!(rho.validate(DEFAULT_TOL), Err(Error::NotPositive(_))));
    }
}
