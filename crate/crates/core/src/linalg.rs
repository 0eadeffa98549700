//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative threshold on `sigma_min / sigma_max` below which the polar
/// factor is considered non-unique.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// One draw of `CN(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // column-major fill order; the draw sequence is part of the seed contract
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed `rows x cols` matrix with orthonormal columns
/// (`rows >= cols`): QR of a complex Gaussian matrix, with the phases of
/// `diag(R)` pushed back into `Q`.
pub fn haar_semi_unitary<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "semi-unitary needs rows >= cols");
    loop {
        let z = gaussian_matrix(rows, cols, rng);
        let qr = z.qr();
        let r = qr.r();
        let mut q = qr.q();
        let mut degenerate = false;
        for j in 0..cols {
            let d = r[(j, j)];
            let n = d.norm();
            if n < 1e-300 {
                degenerate = true;
                break;
            }
            let phase = d / n;
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
        }
        if !degenerate {
            return q;
        }
    }
}

/// Frobenius-nearest matrix with orthonormal columns, `A (A^H A)^{-1/2}`,
/// computed as `U W^H` from the thin SVD `A = U S W^H`.
///
/// Returns `Err(sigma_min)` when the factor is not unique.
pub fn polar_factor(a: &CMatrix) -> Result<CMatrix, f64> {
    let (rows, cols) = a.shape();
    assert!(rows >= cols, "polar factor needs a tall matrix");
    if cols == 1 {
        let n = a.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(0.0);
        }
        return Ok(a.unscale(n));
    }
    let svd = a.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.max();
    let smin = s.min();
    if !(smax > 0.0) || !smax.is_finite() || smin <= RANK_TOLERANCE * smax {
        return Err(smin);
    }
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^H");
    Ok(u * vt)
}

/// `max |(V^H V - I)_{ij}|`.
pub fn orthonormality_deviation(v: &CMatrix) -> f64 {
    let gram = v.adjoint() * v;
    identity_deviation(&gram)
}

/// `max |(A - I)_{ij}|` for a square matrix.
pub fn identity_deviation(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Real part of the Frobenius inner product `sum conj(a) * b`.
pub fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
