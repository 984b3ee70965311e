use super::eig::jacobi_rotation;
use super::C64;

/// Rows whose residual falls below this fraction of the Frobenius norm are
/// treated as numerically dependent during the rank-revealing pass.
const RANK_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 60;

/// Singular values of the row-major `rows x cols` matrix `data`, descending.
///
/// The matrix is first compressed by pivoted Gram-Schmidt on its rows
/// (with re-orthogonalization), giving `M ≈ L Q` with `Q` orthonormal and
/// `L` of width `rank`. One-sided Jacobi on `L` then yields the singular
/// values with high relative accuracy. Only numerically nonzero values are
/// returned; the discarded part has Frobenius norm below
/// `RANK_TOL * sqrt(rows) * ‖M‖_F`.
pub fn singular_values(data: &[C64], rows: usize, cols: usize) -> Vec<f64> {
    assert_eq!(data.len(), rows * cols, "matrix storage does not match shape");
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let frob = data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Vec::new();
    }
    let tol = RANK_TOL * frob;

    let mut residual = data.to_vec();
    let mut norms: Vec<f64> = residual.chunks(cols).map(norm).collect();
    let mut basis: Vec<Vec<C64>> = Vec::new();

    while basis.len() < rows.min(cols) {
        let (pivot, &best) = norms
            .iter()
            .enumerate()
            .fold((0, &norms[0]), |acc, x| if *x.1 > *acc.1 { x } else { acc });
        if best <= tol {
            break;
        }
        let mut q = residual[pivot * cols..(pivot + 1) * cols].to_vec();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &q);
                axpy(-c, b, &mut q);
            }
        }
        let n = norm(&q);
        if n <= tol {
            norms[pivot] = 0.0;
            continue;
        }
        q.iter_mut().for_each(|x| *x /= n);
        for (i, row) in residual.chunks_mut(cols).enumerate() {
            let c = dot(&q, row);
            axpy(-c, &q, row);
            norms[i] = norm(row);
        }
        basis.push(q);
    }

    // L = M Q†, stored column-wise: one column per basis vector
    let mut columns: Vec<Vec<C64>> = basis
        .iter()
        .map(|q| data.chunks(cols).map(|row| dot(q, row)).collect())
        .collect();
    one_sided_jacobi(&mut columns);

    let mut values: Vec<f64> = columns.iter().map(|c| norm(c)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Mutually orthogonalizes `vectors` by pairwise 2x2 rotations.
fn one_sided_jacobi(vectors: &mut [Vec<C64>]) {
    let k = vectors.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = vectors[p].iter().map(|c| c.norm_sqr()).sum::<f64>();
                let beta = vectors[q].iter().map(|c| c.norm_sqr()).sum::<f64>();
                let gamma = dot(&vectors[p], &vectors[q]);
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let g = jacobi_rotation(alpha, beta, gamma);
                let (left, right) = vectors.split_at_mut(q);
                let (vp, vq) = (&mut left[p], &mut right[0]);
                for (a, b) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x * g[0] + y * g[2];
                    *b = x * g[1] + y * g[3];
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

/// `Σ conj(a_i) b_i`.
fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
