//! Nambu-space containers and the particle-hole operation.
//!
//! A BdG matrix on `M` sites is a `2M × 2M` Hermitian matrix acting on
//! vectors ordered as `(u_0..u_{M-1}, v_0..v_{M-1})`, the particle and hole
//! amplitudes. Particle-hole conjugation is `Ξ = τ_x K`: it swaps the two
//! halves and complex-conjugates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type NambuVector = DVector<C64>;

#[derive(Debug, Clone, PartialEq)]
pub struct BdGMatrix {
    sites: usize,
    matrix: DMatrix<C64>,
}

impl BdGMatrix {
    pub fn zeros(sites: usize) -> Self {
        Self { sites, matrix: DMatrix::zeros(2 * sites, 2 * sites) }
    }

    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: n, actual: matrix.ncols() });
        }
        if n % 2 != 0 || n == 0 {
            return Err(Error::InvalidParameter(format!("BdG matrix dimension must be even and positive, got {n}")));
        }
        Ok(Self { sites: n / 2, matrix })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        2 * self.sites
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Largest entry of `|H - H†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Largest entry of `|Ξ H Ξ + H|`; zero for a particle-hole symmetric matrix.
    pub fn particle_hole_defect(&self) -> f64 {
        let conj = particle_hole_conjugate_matrix(&self.matrix);
        max_abs(&(conj + &self.matrix))
    }

    /// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        hermitian_eigh(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    pub fn apply(&self, v: &NambuVector) -> Result<NambuVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: v.len() });
        }
        Ok(&self.matrix * v)
    }

    /// Adds `e c_i† c_i`.
    pub(crate) fn add_onsite(&mut self, i: usize, e: f64) {
        let m = self.sites;
        self.matrix[(i, i)] += C64::new(e, 0.0);
        self.matrix[(m + i, m + i)] -= C64::new(e, 0.0);
    }

    /// Adds `amp c_i† c_j + h.c.` for `i != j`.
    pub(crate) fn add_hopping(&mut self, i: usize, j: usize, amp: C64) {
        let m = self.sites;
        self.matrix[(i, j)] += amp;
        self.matrix[(j, i)] += amp.conj();
        self.matrix[(m + i, m + j)] -= amp.conj();
        self.matrix[(m + j, m + i)] -= amp;
    }

    /// Adds `amp c_i† c_j† + h.c.` for `i != j`.
    pub(crate) fn add_pairing(&mut self, i: usize, j: usize, amp: C64) {
        let m = self.sites;
        self.matrix[(i, m + j)] += amp;
        self.matrix[(j, m + i)] -= amp;
        self.matrix[(m + j, i)] += amp.conj();
        self.matrix[(m + i, j)] -= amp.conj();
    }
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `Ξ v`: swap particle and hole halves, then conjugate.
pub fn particle_hole_conjugate(v: &NambuVector) -> NambuVector {
    let m = v.len() / 2;
    NambuVector::from_fn(v.len(), |k, _| if k < m { v[k + m].conj() } else { v[k - m].conj() })
}

/// `Ξ H Ξ` for a full Nambu matrix.
pub fn particle_hole_conjugate_matrix(h: &DMatrix<C64>) -> DMatrix<C64> {
    let n = h.nrows();
    let m = n / 2;
    let sw = |k: usize| if k < m { k + m } else { k - m };
    DMatrix::from_fn(n, n, |r, c| h[(sw(r), sw(c))].conj())
}

/// `⟨a|b⟩` with the conjugate on the first argument.
pub fn nambu_overlap(a: &NambuVector, b: &NambuVector) -> Result<C64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(a.dotc(b))
}

pub fn is_self_conjugate(v: &NambuVector, tol: f64) -> bool {
    (particle_hole_conjugate(v) - v).norm() <= tol
}

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
///
/// Real symmetric input goes through the real solver so that eigenvectors
/// stay real.
pub fn hermitian_eigh(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = h.nrows();
    let is_real = h.iter().all(|z| z.im == 0.0);
    let (vals, vecs): (Vec<f64>, DMatrix<C64>) = if is_real {
        let re = h.map(|z| z.re);
        let eig = nalgebra::SymmetricEigen::new(re);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let eig = nalgebra::SymmetricEigen::new(h.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = order.iter().map(|&k| vals[k]).collect();
    let sorted_vecs = DMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    (sorted_vals, sorted_vecs)
}
