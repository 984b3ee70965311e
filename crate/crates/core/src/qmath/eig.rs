use super::{Ket, Operator, C64, HERMITIAN_TOL};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and matching orthonormal eigenvectors of a
/// Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Ket>,
}

impl SpectralDecomposition {
    /// `Σ_a λ_a |u_a⟩⟨u_a|`.
    pub fn reconstruct(&self) -> Operator {
        let d = self.eigenvalues.len();
        let mut op = Operator::zeros(d);
        for (lambda, u) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let proj = u.outer(u).expect("eigenvector dimension");
            op = &op + &proj.scale(C64::new(*lambda, 0.0));
        }
        op
    }

    /// Gram matrix `G_ab = ⟨u_a|u_b⟩`.
    pub fn gram(&self) -> Operator {
        let rows = self
            .eigenvectors
            .iter()
            .map(|a| self.eigenvectors.iter().map(|b| a.inner(b).unwrap()).collect())
            .collect();
        Operator::from_rows(rows).expect("square by construction")
    }
}

/// Complex Jacobi rotation that diagonalizes the 2x2 Hermitian block
/// `[[app, apq], [conj(apq), aqq]]`.
///
/// Returns the unitary `G = [[g00, g01], [g10, g11]]` acting on columns
/// `(p, q)`; `G† H G` is diagonal.
pub(super) fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> [C64; 4] {
    let r = apq.norm();
    if r == 0.0 {
        return [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    }
    let phase = (apq / r).conj();
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    [C64::new(c, 0.0), C64::new(s, 0.0), -phase * s, phase * c]
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues come out sorted in descending order. Eigenvectors are
/// re-orthonormalized in that order and phase-fixed so that their first
/// largest-modulus component is real and positive, which makes the result
/// reproducible for degenerate spectra.
pub fn herm_eig(op: &Operator) -> Result<SpectralDecomposition> {
    let deviation = op.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let d = op.dim();
    let mut h: Vec<C64> = op.entries().to_vec();
    // enforce exact Hermiticity before iterating
    for i in 0..d {
        h[i * d + i] = C64::new(h[i * d + i].re, 0.0);
        for j in i + 1..d {
            let avg = 0.5 * (h[i * d + j] + h[j * d + i].conj());
            h[i * d + j] = avg;
            h[j * d + i] = avg.conj();
        }
    }
    let mut w = Operator::identity(d).entries().to_vec();
    let scale = h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[i * d + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = h[p * d + q];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let g = jacobi_rotation(h[p * d + p].re, h[q * d + q].re, apq);
                // columns: H <- H G
                for k in 0..d {
                    let hp = h[k * d + p];
                    let hq = h[k * d + q];
                    h[k * d + p] = hp * g[0] + hq * g[2];
                    h[k * d + q] = hp * g[1] + hq * g[3];
                }
                // rows: H <- G† H
                for k in 0..d {
                    let hp = h[p * d + k];
                    let hq = h[q * d + k];
                    h[p * d + k] = g[0].conj() * hp + g[2].conj() * hq;
                    h[q * d + k] = g[1].conj() * hp + g[3].conj() * hq;
                }
                h[p * d + q] = C64::new(0.0, 0.0);
                h[q * d + p] = C64::new(0.0, 0.0);
                h[p * d + p] = C64::new(h[p * d + p].re, 0.0);
                h[q * d + q] = C64::new(h[q * d + q].re, 0.0);
                for k in 0..d {
                    let wp = w[k * d + p];
                    let wq = w[k * d + q];
                    w[k * d + p] = wp * g[0] + wq * g[2];
                    w[k * d + q] = wp * g[1] + wq * g[3];
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| h[b * d + b].re.total_cmp(&h[a * d + a].re));

    let mut eigenvalues = Vec::with_capacity(d);
    let mut eigenvectors: Vec<Ket> = Vec::with_capacity(d);
    for &col in &order {
        eigenvalues.push(h[col * d + col].re);
        let mut v: Vec<C64> = (0..d).map(|k| w[k * d + col]).collect();
        for prev in &eigenvectors {
            let overlap: C64 =
                prev.amplitudes().iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, p) in v.iter_mut().zip(prev.amplitudes()) {
                *x -= overlap * p;
            }
        }
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        fix_phase(&mut v);
        eigenvectors.push(Ket::new(v)?);
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if let Some(pivot) = v.iter().find(|c| c.norm() >= max * (1.0 - 1e-12)) {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

#[cfg(test)]
mod tests {
    use super::super::{pauli_x, pauli_y, pauli_z};
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn check(op: &Operator, sd: &SpectralDecomposition) {
        assert!(sd.reconstruct().max_abs_diff(op).unwrap() <= 1e-10);
        assert!(sd.gram().max_abs_diff(&Operator::identity(op.dim())).unwrap() <= 1e-10);
        assert!(sd.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sigma_z_is_diagonal() {
        let sd = herm_eig(&pauli_z()).unwrap();
        assert_eq!(sd.eigenvalues, vec![1.0, -1.0]);
        check(&pauli_z(), &sd);
    }

    #[test]
    fn sigma_x_eigenvectors() {
        let sd = herm_eig(&pauli_x()).unwrap();
        assert_abs_diff_eq!(sd.eigenvalues[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sd.eigenvalues[1], -1.0, epsilon = 1e-15);
        // hand diagonalization: (1, 1)/√2 for +1, (1, -1)/√2 for -1 up to phase
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Ket::from_real(&[h, h]).unwrap();
        let minus = Ket::from_real(&[h, -h]).unwrap();
        assert_abs_diff_eq!(sd.eigenvectors[0].inner(&plus).unwrap().norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sd.eigenvectors[1].inner(&minus).unwrap().norm(), 1.0, epsilon = 1e-14);
        check(&pauli_x(), &sd);
    }

    #[test]
    fn sigma_y_and_identity() {
        check(&pauli_y(), &herm_eig(&pauli_y()).unwrap());
        let id = Operator::identity(5);
        let sd = herm_eig(&id).unwrap();
        assert!(sd.eigenvalues.iter().all(|&l| l == 1.0));
        check(&id, &sd);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut rows = pauli_x().rows();
        rows[0][1] = C64::new(1.0, 1e-6);
        let op = Operator::from_rows(rows).unwrap();
        assert!(matches!(herm_eig(&op), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn degenerate_spectrum_is_reproducible() {
        let op = Operator::diagonal(&[2.0, 2.0, -1.0]);
        let a = herm_eig(&op).unwrap();
        let b = herm_eig(&op).unwrap();
        assert_eq!(a, b);
        check(&op, &a);
    }

    fn hermitian_strategy() -> impl Strategy<Value = Operator> {
        (2usize..=6).prop_flat_map(|d| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |v| {
                let raw = Operator::from_rows(
                    v.chunks(d).map(|r| r.iter().map(|&(a, b)| C64::new(a, b)).collect()).collect(),
                )
                .unwrap();
                (&raw + &raw.adjoint()).scale(C64::new(0.5, 0.0))
            })
        })
    }

    proptest! {
        #[test]
        fn random_hermitian_reconstructs(op in hermitian_strategy()) {
            let sd = herm_eig(&op).unwrap();
            prop_assert!(sd.reconstruct().max_abs_diff(&op).unwrap() <= 1e-10);
            prop_assert!(sd.gram().max_abs_diff(&Operator::identity(op.dim())).unwrap() <= 1e-10);
        }
    }
}
