//! Eigenvalues of small dense matrices via shifted QR on the Hessenberg form.
//!
//! Only eigenvalues are computed (no vectors): downstream consumers need
//! moduli for stability classification, and transition matrices here are
//! at most (D_θ + a)² with tiny D_θ. Dimensions 1 and 2 use the closed
//! form; larger matrices are reduced to Hessenberg form and iterated in
//! complex arithmetic with a Wilkinson shift so real matrices with
//! complex-pair spectra converge without a double-shift sweep.

use super::Matrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

const MAX_DIM: usize = 16;

/// All eigenvalues (with multiplicity), sorted by descending modulus.
pub fn eigvals_small(a: &Matrix) -> Result<Vec<Complex64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::ShapeMismatch {
            context: "eigvals_small",
            expected: n,
            actual: a.cols(),
        });
    }
    if n > MAX_DIM {
        return Err(Error::UnsupportedSize { dim: n, max: MAX_DIM });
    }
    let mut eigs = match n {
        0 => Vec::new(),
        1 => vec![Complex64::new(a[(0, 0)], 0.0)],
        2 => eig2x2(
            a[(0, 0)].into(),
            a[(0, 1)].into(),
            a[(1, 0)].into(),
            a[(1, 1)].into(),
        )
        .to_vec(),
        _ => qr_eigvals(hessenberg(a))?,
    };
    eigs.sort_by(|x, y| {
        y.norm()
            .total_cmp(&x.norm())
            .then(y.re.total_cmp(&x.re))
            .then(y.im.total_cmp(&x.im))
    });
    Ok(eigs)
}

/// Reduce to upper Hessenberg form with Householder reflections.
fn hessenberg(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let mut alpha = 0.0;
        for i in (k + 1)..n {
            alpha += h[(i, k)] * h[(i, k)];
        }
        alpha = alpha.sqrt();
        if alpha == 0.0 {
            continue;
        }
        if h[(k + 1, k)] > 0.0 {
            alpha = -alpha;
        }
        let mut v = vec![0.0; n];
        for i in (k + 1)..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 < f64::MIN_POSITIVE {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // H ← (I − βvvᵀ) H
        for j in 0..n {
            let mut s = 0.0;
            for i in (k + 1)..n {
                s += v[i] * h[(i, j)];
            }
            s *= beta;
            for i in (k + 1)..n {
                h[(i, j)] -= s * v[i];
            }
        }
        // H ← H (I − βvvᵀ)
        for i in 0..n {
            let mut s = 0.0;
            for j in (k + 1)..n {
                s += h[(i, j)] * v[j];
            }
            s *= beta;
            for j in (k + 1)..n {
                h[(i, j)] -= s * v[j];
            }
        }
    }
    h
}

fn eig2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 2] {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    [(tr + disc) * 0.5, (tr - disc) * 0.5]
}

fn qr_eigvals(h_real: Matrix) -> Result<Vec<Complex64>> {
    let n = h_real.rows();
    let scale = h_real.frobenius_norm().max(1.0);
    let mut h: Vec<Vec<Complex64>> = (0..n)
        .map(|i| h_real.row(i).iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .collect();
    let mut eigs = Vec::with_capacity(n);
    let mut m = n;
    let mut stalled = 0usize;
    let mut total = 0usize;

    while m > 0 {
        // deflate from the bottom: find the first negligible subdiagonal
        let mut l = m - 1;
        while l > 0 {
            let off = h[l][l - 1].norm();
            let local = h[l - 1][l - 1].norm() + h[l][l].norm();
            if off <= f64::EPSILON * local.max(scale * f64::EPSILON) {
                h[l][l - 1] = Complex64::ZERO;
                break;
            }
            l -= 1;
        }
        if l == m - 1 {
            eigs.push(h[m - 1][m - 1]);
            m -= 1;
            stalled = 0;
            continue;
        }
        if l == m - 2 {
            let [e1, e2] = eig2x2(h[m - 2][m - 2], h[m - 2][m - 1], h[m - 1][m - 2], h[m - 1][m - 1]);
            eigs.push(e1);
            eigs.push(e2);
            m -= 2;
            stalled = 0;
            continue;
        }

        total += 1;
        stalled += 1;
        if total > 200 * n {
            return Err(Error::EigenConvergence);
        }
        let shift = if stalled % 16 == 0 {
            // exceptional shift to break symmetric stalls
            h[m - 1][m - 1] + Complex64::new(h[m - 1][m - 2].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(&h, m)
        };

        // explicit shifted QR sweep on the active block [l, m)
        for i in l..m {
            h[i][i] -= shift;
        }
        let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(m - 1 - l);
        for i in l..(m - 1) {
            let a = h[i][i];
            let b = h[i + 1][i];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r < f64::MIN_POSITIVE {
                (1.0, Complex64::ZERO)
            } else if a.norm() < f64::MIN_POSITIVE {
                (0.0, Complex64::ONE)
            } else {
                (a.norm() / r, a * b.conj() / (a.norm() * r))
            };
            // rows i, i+1 over the active columns
            for j in l..m {
                let x = h[i][j];
                let y = h[i + 1][j];
                h[i][j] = c * x + s * y;
                h[i + 1][j] = -s.conj() * x + c * y;
            }
            rotations.push((c, s));
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let i = l + idx;
            // columns i, i+1 over the active rows
            for row in h.iter_mut().take(m).skip(l) {
                let x = row[i];
                let y = row[i + 1];
                row[i] = c * x + s.conj() * y;
                row[i + 1] = -s * x + c * y;
            }
        }
        for i in l..m {
            h[i][i] += shift;
        }
    }
    Ok(eigs)
}

/// Eigenvalue of the trailing 2×2 block closest to the corner entry.
fn wilkinson_shift(h: &[Vec<Complex64>], m: usize) -> Complex64 {
    let [e1, e2] = eig2x2(h[m - 2][m - 2], h[m - 2][m - 1], h[m - 1][m - 2], h[m - 1][m - 1]);
    let corner = h[m - 1][m - 1];
    if (e1 - corner).norm() <= (e2 - corner).norm() {
        e1
    } else {
        e2
    }
}
