//! Small dense linear-algebra helpers shared by the numerical modules.
//!
//! Vectors in `R^{2n}` are ordered `(x1, y1, ..., xn, yn)`; the standard complex
//! structure `J0` acts blockwise as `(x, y) -> (-y, x)`, and the symplectic form
//! is `omega(u, v) = u^T (-J0) v`.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

/// Standard complex structure on `R^dim` (dim even).
pub fn j0(dim: usize) -> DMatrix<f64> {
    assert!(dim.is_multiple_of(2), "J0 needs an even dimension, got {dim}");
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim / 2 {
        m[(2 * b, 2 * b + 1)] = -1.0;
        m[(2 * b + 1, 2 * b)] = 1.0;
    }
    m
}

/// Matrix of the standard symplectic form, `-J0`.
pub fn omega(dim: usize) -> DMatrix<f64> {
    -j0(dim)
}

/// Max-abs entry of `M^T Omega M - Omega`.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let om = omega(m.nrows());
    (m.transpose() * &om * m - om).amax()
}

/// Max-abs entry of `M - M^T`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Block-diagonal direct sum.
pub fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = DMatrix::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

/// Rotation of `R^2` by `angle` radians, i.e. multiplication by `e^{i angle}`.
pub fn rotation2(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Multiplication by `e^{i angle}` on every complex coordinate of `R^dim`.
pub fn rotation(dim: usize, angle: f64) -> DMatrix<f64> {
    let r = rotation2(angle);
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim / 2 {
        m.view_mut((2 * b, 2 * b), (2, 2)).copy_from(&r);
    }
    m
}

/// Reads a `2n x 2n` real matrix as an `n x n` complex one, taking the complex-linear
/// part of each 2x2 block (`[[a, -b], [b, a]] -> a + ib`).
pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        let a = 0.5 * (m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)]);
        let b = 0.5 * (m[(2 * i + 1, 2 * j)] - m[(2 * i, 2 * j + 1)]);
        Complex64::new(a, b)
    })
}

/// Inverse of [`to_complex`] on complex-linear matrices.
pub fn from_complex(c: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = c.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..c.ncols() {
            let z = c[(i, j)];
            m[(2 * i, 2 * j)] = z.re;
            m[(2 * i, 2 * j + 1)] = -z.im;
            m[(2 * i + 1, 2 * j)] = z.im;
            m[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    m
}

/// Complexification of a real matrix (same shape, zero imaginary part).
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Inverse of a symplectic matrix, `Omega^{-1} M^T Omega`.
pub fn symplectic_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let om = omega(m.nrows());
    -(&om * m.transpose() * &om)
}

/// Eigenvalues of a general real matrix.
///
/// The real Schur iteration can stall on matrices close to a multiple of the identity,
/// so it runs with an iteration cap and is retried on shifted and rotated copies, which
/// share the spectrum up to the known shift.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    let n = a.nrows();
    let cap = 200 * n.max(1);
    let scale = a.amax().max(1.0);
    let schur = |m: DMatrix<f64>| Schur::try_new(m, 8.0 * f64::EPSILON, cap);
    for shift in [0.0, 0.37, -0.61, 1.13] {
        let shifted = a + DMatrix::identity(n, n) * (shift * scale);
        if let Some(s) = schur(shifted) {
            return s.complex_eigenvalues().iter().map(|l| l - shift * scale).collect();
        }
    }
    for k in 1..=8 {
        let q = rotation_mixer(n, 0.3 * k as f64);
        if let Some(s) = schur(&q * a * q.transpose()) {
            return s.complex_eigenvalues().iter().copied().collect();
        }
    }
    panic!("eigenvalue iteration failed to converge on a {n}x{n} matrix");
}

/// Orthogonal matrix made of plane rotations between every pair of coordinates.
fn rotation_mixer(n: usize, angle: f64) -> DMatrix<f64> {
    let mut q = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let (s, c) = (angle * (1 + i + 2 * j) as f64).sin_cos();
            let mut g = DMatrix::identity(n, n);
            g[(i, i)] = c;
            g[(j, j)] = c;
            g[(i, j)] = -s;
            g[(j, i)] = s;
            q = g * q;
        }
    }
    q
}

/// Eigenvalues of a real symmetric matrix by the cyclic Jacobi method, ascending.
///
/// Only the upper triangle is read. Rotations are skipped below a threshold during the
/// first sweeps, and iteration stops once the off-diagonal mass is negligible relative
/// to the diagonal.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigenvalues needs a square matrix");
    if n == 0 {
        return Vec::new();
    }
    // Row-major working copy; both triangles are kept in sync.
    let mut w = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            w[i * n + j] = a[(i, j)];
            w[j * n + i] = a[(i, j)];
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| w[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0f64; n];

    for sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += w[p * n + q].abs();
            }
        }
        let scale: f64 = d.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
            break;
        }
        let tresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[p * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    w[p * n + q] = 0.0;
                    w[q * n + p] = 0.0;
                    continue;
                }
                if apq.abs() <= tresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let gk = w[k * n + p];
                    let hk = w[k * n + q];
                    let np = gk - s * (hk + gk * tau);
                    let nq = hk + s * (gk - hk * tau);
                    w[k * n + p] = np;
                    w[p * n + k] = np;
                    w[k * n + q] = nq;
                    w[q * n + k] = nq;
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }
    d.sort_by(|x, y| x.total_cmp(y));
    d
}

/// Rows of a matrix, as nested vectors.
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Matrix from nested row vectors; all rows must have equal length.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("ragged matrix: expected {ncols} entries per row"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Serde adapter storing a matrix as an array of rows.
pub mod serde_rows {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        matrix_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigenvalues_of_near_identity_loop_endpoints() {
        for seed in 0..20 {
            let u = crate::spectral::UnitaryLoop::random(2, &mut ChaCha8Rng::seed_from_u64(1000 + seed));
            let end = u.real_at(1.0).0 * u.real_at(0.0).0.transpose();
            let eig = eigenvalues(&end);
            assert_eq!(eig.len(), 4);
            assert!(eig.iter().all(|l| (l - 1.0).norm() < 1e-6), "{eig:?}");
        }
    }

    #[test]
    fn eigenvalues_match_rotation_angles() {
        let eig = eigenvalues(&direct_sum(&rotation2(0.4), &rotation2(2.0)));
        let mut args: Vec<f64> = eig.iter().map(|l| l.arg().abs()).collect();
        args.sort_by(f64::total_cmp);
        for (got, want) in args.iter().zip([0.4, 0.4, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn j0_rotates_first_basis_vector_to_second() {
        let j = j0(2);
        assert_eq!(j[(1, 0)], 1.0);
        assert_eq!(j[(0, 1)], -1.0);
        assert_eq!(&j * &j, -DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn complex_round_trip() {
        let r = direct_sum(&rotation2(0.3), &rotation2(-1.1));
        let c = to_complex(&r);
        assert!((c[(0, 0)] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15);
        assert!((from_complex(&c) - r).amax() < 1e-15);
    }

    #[test]
    fn jacobi_matches_nalgebra_on_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 5, 17, 40] {
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let s = &m + m.transpose();
            let mine = jacobi_eigenvalues(&s);
            let mut reference: Vec<f64> = s.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(|a, b| a.total_cmp(b));
            for (a, b) in mine.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn jacobi_on_diagonal_and_repeated() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 3.0]));
        assert_eq!(jacobi_eigenvalues(&m), vec![-1.0, 3.0, 3.0]);
    }

    #[test]
    fn symplectic_inverse_is_inverse() {
        let r = rotation(4, 0.7);
        let prod = symplectic_inverse(&r) * &r;
        assert!((prod - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
    }
}
