//! Independent finite-difference discretization of the asymptotic operator.
//!
//! Components `x_i` live on the nodes `j/N` and `y_i` on the half nodes `(j + 1/2)/N`, so
//! the central difference of `-J0 d/dt` couples neighbours at distance `1/(2N)` and the
//! matrix stays symmetric. Mixed couplings are split between the two neighbouring half
//! nodes, evaluated at the quarter points.

use super::operator::CoefficientLoop;
use super::SpectralError;
use nalgebra::DMatrix;

pub const FD_COARSE: usize = 256;
pub const FD_FINE: usize = 512;
const RICHARDSON_WINDOW: usize = 12;

/// Sorted eigenvalues of the staggered-grid discretization with `n` cells.
pub fn fd_spectrum(coefficient: &CoefficientLoop, n: usize) -> Result<Vec<f64>, SpectralError> {
    let dim = coefficient.dim();
    let h = 1.0 / n as f64;
    let idx = |j: usize, a: usize| (j % n) * dim + a;
    let mut m = DMatrix::<f64>::zeros(n * dim, n * dim);
    for j in 0..n {
        let t = j as f64 * h;
        let node = coefficient.checked_symmetric_part(t)?;
        let half = coefficient.checked_symmetric_part(t + 0.5 * h)?;
        let ahead = coefficient.checked_symmetric_part(t + 0.25 * h)?;
        let behind = coefficient.checked_symmetric_part(t - 0.25 * h)?;
        let prev = (j + n - 1) % n;
        for i in 0..dim / 2 {
            let (x, y) = (2 * i, 2 * i + 1);
            m[(idx(j, x), idx(j, y))] += 1.0 / h;
            m[(idx(j, y), idx(j, x))] += 1.0 / h;
            m[(idx(j, x), idx(prev, y))] -= 1.0 / h;
            m[(idx(prev, y), idx(j, x))] -= 1.0 / h;
        }
        for a in 0..dim {
            for b in 0..dim {
                match (a % 2, b % 2) {
                    (0, 0) => m[(idx(j, a), idx(j, b))] += node[(a, b)],
                    (1, 1) => m[(idx(j, a), idx(j, b))] += half[(a, b)],
                    (0, 1) => {
                        let (fwd, back) = (0.5 * ahead[(a, b)], 0.5 * behind[(a, b)]);
                        m[(idx(j, a), idx(j, b))] += fwd;
                        m[(idx(j, b), idx(j, a))] += fwd;
                        m[(idx(j, a), idx(prev, b))] += back;
                        m[(idx(prev, b), idx(j, a))] += back;
                    }
                    _ => {}
                }
            }
        }
    }
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Pairs `a[za + i]` with `b[zb + i]` for `-window <= i < window`, where `za`, `zb` index
/// the first non-negative entries of the sorted lists.
pub fn align_around_zero(a: &[f64], b: &[f64], window: usize) -> Vec<(f64, f64)> {
    let za = a.partition_point(|x| *x < 0.0) as isize;
    let zb = b.partition_point(|x| *x < 0.0) as isize;
    let w = window as isize;
    (-w..w)
        .filter_map(|i| {
            let (ia, ib) = (za + i, zb + i);
            (ia >= 0 && ib >= 0 && (ia as usize) < a.len() && (ib as usize) < b.len()).then(|| (a[ia as usize], b[ib as usize]))
        })
        .collect()
}

/// The `count` eigenvalues of smallest magnitude, sorted ascending.
pub fn smallest_magnitude(eigs: &[f64], count: usize) -> Vec<f64> {
    let mut v = eigs.to_vec();
    v.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    v.truncate(count);
    v.sort_by(f64::total_cmp);
    v
}

/// Richardson-extrapolated finite-difference eigenvalues of smallest magnitude,
/// combining `FD_COARSE` and `FD_FINE` cells.
pub fn richardson_smallest(coefficient: &CoefficientLoop, count: usize) -> Result<Vec<f64>, SpectralError> {
    let coarse = fd_spectrum(coefficient, FD_COARSE)?;
    let fine = fd_spectrum(coefficient, FD_FINE)?;
    let window = RICHARDSON_WINDOW.max(count);
    let combined: Vec<f64> = align_around_zero(&fine, &coarse, window).into_iter().map(|(f, c)| (4.0 * f - c) / 3.0).collect();
    Ok(smallest_magnitude(&combined, count))
}
