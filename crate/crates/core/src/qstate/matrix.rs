//! Explicit 2x2 complex density matrices.
//!
//! Only used to cross-check the Bloch-vector formulas against plain matrix
//! arithmetic (traces, products, eigenvalues), never on a hot path.

use num_complex::Complex64;

use super::{Bloch, QubitState};

pub type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity() -> Mat2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

pub fn pauli() -> [Mat2; 3] {
    let z = c(0.0, 0.0);
    [
        [[z, c(1.0, 0.0)], [c(1.0, 0.0), z]],
        [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        [[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]],
    ]
}

/// `(I + r . sigma) / 2`.
pub fn density(r: &Bloch) -> Mat2 {
    let mut m = identity();
    for (k, s) in pauli().iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += s[i][j] * r[k];
            }
        }
    }
    scale(&m, 0.5)
}

pub fn to_matrix(s: &QubitState) -> Mat2 {
    density(&s.bloch())
}

/// Reads the Bloch vector back out via `r_k = Tr(rho sigma_k)`.
pub fn bloch_of(m: &Mat2) -> Bloch {
    let p = pauli();
    std::array::from_fn(|k| trace(&mul(m, &p[k])).re)
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub fn sub(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] - b[i][j]))
}

pub fn scale(a: &Mat2, k: f64) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] * k))
}

pub fn trace(a: &Mat2) -> Complex64 {
    a[0][0] + a[1][1]
}

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
pub fn hermitian_eigenvalues(a: &Mat2) -> [f64; 2] {
    let mean = 0.5 * (a[0][0].re + a[1][1].re);
    let half_diff = 0.5 * (a[0][0].re - a[1][1].re);
    let r = (half_diff * half_diff + a[0][1].norm_sqr()).sqrt();
    [mean - r, mean + r]
}

/// `Tr |A|` for Hermitian `A`.
pub fn trace_norm(a: &Mat2) -> f64 {
    hermitian_eigenvalues(a).iter().map(|l| l.abs()).sum()
}

/// Projector onto the eigenspace of the largest eigenvalue of a Hermitian
/// matrix, or the zero matrix when the spectrum is degenerate.
pub fn top_eigenprojector(a: &Mat2) -> Mat2 {
    let [lo, hi] = hermitian_eigenvalues(a);
    if hi - lo <= f64::EPSILON {
        return [[c(0.0, 0.0); 2]; 2];
    }
    // (A - lo I) / (hi - lo) is the spectral projector for `hi`.
    let shifted = sub(a, &scale(&identity(), lo));
    scale(&shifted, 1.0 / (hi - lo))
}
