//! Small dense complex matrices for one and two qubits.
//!
//! Everything here is fixed-size: [`Mat2`] for single-qubit operators and
//! [`Mat4`] for the system ⊗ ancilla pair. Two-qubit operators use the
//! row-major Kronecker layout with the system factor first, so basis index
//! `2 * s + a` addresses system bit `s` and ancilla bit `a`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DensityViolation, Error, Result};

/// Tolerance for the density-matrix invariants.
pub const DENSITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix of fixed dimension `N`.
#[derive(Clone, Copy, PartialEq)]
pub struct CMatrix<const N: usize>(pub [[Complex64; N]; N]);

pub type Mat2 = CMatrix<2>;
pub type Mat4 = CMatrix<4>;

impl<const N: usize> CMatrix<N> {
    pub fn zeros() -> Self {
        Self([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..N {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.0[r][c] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn diag(d: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for (k, &v) in d.iter().enumerate() {
            m.0[k][k] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64; N], v: &[Complex64; N]) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.0[r][c] = u[r] * v[c].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        N
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.0[r][c] = self.0[c][r].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.0[r][c] = self.0[c][r];
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|k| self.0[k][k]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..N {
            for c in r..N {
                worst = worst.max((self.0[r][c] - self.0[c][r].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `M X M†`.
    pub fn conjugate(&self, x: &Self) -> Self {
        *self * *x * self.dagger()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    ///
    /// 2×2 uses the closed form of the characteristic polynomial; larger
    /// sizes run cyclic Jacobi on the real symmetric embedding
    /// `[[Re, -Im], [Im, Re]]`, whose spectrum is that of the matrix with
    /// every eigenvalue doubled.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        if N == 2 {
            let a = self.0[0][0].re;
            let d = self.0[1][1].re;
            let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            return vec![mid - rad, mid + rad];
        }
        let n = 2 * N;
        let mut s = vec![0.0; n * n];
        for r in 0..N {
            for c in 0..N {
                let h = 0.5 * (self.0[r][c] + self.0[c][r].conj());
                s[r * n + c] = h.re;
                s[(r + N) * n + c + N] = h.re;
                s[r * n + c + N] = -h.im;
                s[(r + N) * n + c] = h.im;
            }
        }
        let mut ev = jacobi_eigenvalues(&mut s, n);
        ev.sort_by(f64::total_cmp);
        // Each eigenvalue appears twice in the embedding.
        ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    }
}

/// Cyclic Jacobi sweeps on a real symmetric `n × n` row-major matrix.
fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c] * a[r * n + c])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|k| a[k * n + k]).collect()
}

impl<const N: usize> Default for CMatrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> fmt::Debug for CMatrix<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl<const N: usize> Index<(usize, usize)> for CMatrix<N> {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.0[r][c]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMatrix<N> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.0[r][c]
    }
}

impl<const N: usize> Add for CMatrix<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for r in 0..N {
            for c in 0..N {
                self.0[r][c] += rhs.0[r][c];
            }
        }
        self
    }
}

impl<const N: usize> Sub for CMatrix<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for r in 0..N {
            for c in 0..N {
                self.0[r][c] -= rhs.0[r][c];
            }
        }
        self
    }
}

impl<const N: usize> Mul for CMatrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.0[r][c] = (0..N).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        m
    }
}

impl<const N: usize> Mul<Complex64> for CMatrix<N> {
    type Output = Self;
    fn mul(mut self, rhs: Complex64) -> Self {
        self.0.iter_mut().flatten().for_each(|z| *z *= rhs);
        self
    }
}

/// Kronecker product, `a` in the system slot and `b` in the ancilla slot.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for (ar, ac, br, bc) in index_quads() {
        m.0[2 * ar + br][2 * ac + bc] = a.0[ar][ac] * b.0[br][bc];
    }
    m
}

fn index_quads() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|k| (k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1))
}

/// Measurement axis, named after the Pauli operator whose eigenbasis is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Order used when breaking capacity ties.
    pub const ALL: [Axis; 3] = [Axis::Z, Axis::X, Axis::Y];

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    /// Pauli operator σ_α.
    pub fn pauli(self) -> Mat2 {
        match self {
            Axis::X => Mat2::from_real([[0.0, 1.0], [1.0, 0.0]]),
            Axis::Y => CMatrix([[ZERO, -I], [I, ZERO]]),
            Axis::Z => Mat2::from_real([[1.0, 0.0], [0.0, -1.0]]),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            _ => Err(format!("unknown axis `{s}`")),
        }
    }
}

/// Ordered eigenbasis of one Pauli operator; `vectors[0]` is logical 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitBasis {
    pub axis: Axis,
    pub vectors: [[Complex64; 2]; 2],
}

impl QubitBasis {
    /// `|φ_i⟩⟨φ_i|`.
    pub fn projector(&self, i: usize) -> Mat2 {
        Mat2::outer(&self.vectors[i], &self.vectors[i])
    }

    /// Conventional polarization names for the two vectors.
    pub fn names(&self) -> [&'static str; 2] {
        match self.axis {
            Axis::Z => ["H", "V"],
            Axis::X => ["+", "-"],
            Axis::Y => ["R", "L"],
        }
    }
}

/// Eigenbasis of σ_α: z → (H, V), x → (+, −), y → (R, L).
pub fn pauli_basis(axis: Axis) -> QubitBasis {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let vectors = match axis {
        Axis::Z => [[ONE, ZERO], [ZERO, ONE]],
        Axis::X => [
            [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        ],
    };
    QubitBasis { axis, vectors }
}

/// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_projector() -> Mat4 {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let phi = [h, ZERO, ZERO, h];
    Mat4::outer(&phi, &phi)
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<const N: usize>(CMatrix<N>);

impl<const N: usize> DensityMatrix<N> {
    pub fn new(m: CMatrix<N>) -> Result<Self> {
        validate_density(m)
    }

    pub fn matrix(&self) -> &CMatrix<N> {
        &self.0
    }

    pub fn maximally_mixed() -> Self {
        Self(CMatrix::identity().scale(1.0 / N as f64))
    }
}

/// Checks the three density-matrix invariants at [`DENSITY_TOL`].
pub fn validate_density<const N: usize>(m: CMatrix<N>) -> Result<DensityMatrix<N>> {
    let herm = m.hermiticity_deviation();
    let tr = m.trace();
    let trace_dev = (tr - ONE).norm();
    let min_ev = m.hermitian_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    let violation = DensityViolation {
        hermiticity: (herm > DENSITY_TOL).then_some(herm),
        trace: (trace_dev > DENSITY_TOL).then_some(trace_dev),
        min_eigenvalue: (min_ev < -DENSITY_TOL).then_some(min_ev),
    };
    if violation.hermiticity.is_some() || violation.trace.is_some() || violation.min_eigenvalue.is_some() {
        return Err(Error::InvalidDensity(violation));
    }
    Ok(DensityMatrix(m))
}

/// `Tr[obs · ρ]` for a Hermitian observable.
pub fn expectation<const N: usize>(obs: &CMatrix<N>, state: &DensityMatrix<N>) -> Result<f64> {
    let herm = obs.hermiticity_deviation();
    if herm > DENSITY_TOL {
        return Err(Error::NonHermitian(herm));
    }
    let v = (*obs * state.0).trace();
    if v.im.abs() > DENSITY_TOL {
        return Err(Error::ImaginaryResidue(v.im));
    }
    Ok(v.re)
}
