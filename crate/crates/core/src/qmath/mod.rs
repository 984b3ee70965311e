//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Composite indices follow one fixed convention everywhere in the crate:
//! row-major, with the rightmost tensor factor varying fastest. For a
//! product `a ⊗ b` the amplitude of `|i⟩|j⟩` sits at `i * dim(b) + j`.

mod eig;
mod svd;

use std::fmt;
use std::ops::{Add, Mul, Sub};

pub use num_complex::Complex64 as C64;

pub use eig::{herm_eig, SpectralDecomposition};
pub use svd::singular_values;

use crate::error::{Error, Result};

/// Tolerance used to decide whether a ket is normalized.
pub const NORM_TOL: f64 = 1e-12;

/// Tolerance for accepting an operator as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A vector of complex amplitudes on a finite-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Dimension("ket must have positive dimension".into()));
        }
        Ok(Ket { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ket { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Normalization { norm: n });
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Ket { amps: self.amps.iter().map(|c| c * factor).collect() }
    }

    /// Inner product `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        check_dims(self.dim(), other.dim(), "inner product")?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &Ket) -> Result<Operator> {
        check_dims(self.dim(), other.dim(), "outer product")?;
        let d = self.dim();
        let mut data = Vec::with_capacity(d * d);
        for a in &self.amps {
            for b in &other.amps {
                data.push(a * b.conj());
            }
        }
        Ok(Operator { dim: d, data })
    }

    /// Rank-one projector `|self⟩⟨self|` built from the normalized ket.
    pub fn projector(&self) -> Result<Operator> {
        let k = self.normalized()?;
        k.outer(&k)
    }
}

/// A square complex matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.data[i * dim + i] = ONE;
        }
        op
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Dimension("operator must have positive dimension".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Operator { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut op = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            op.data[i * values.len() + i] = C64::new(v, 0.0);
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        Operator { dim: d, data }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Operator { dim: self.dim, data: self.data.iter().map(|c| c * factor).collect() }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max_ij |M_ij - conj(M_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev = 0.0f64;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn apply(&self, psi: &Ket) -> Result<Ket> {
        check_dims(self.dim, psi.dim(), "operator application")?;
        let amps = self
            .data
            .chunks(self.dim)
            .map(|row| row.iter().zip(psi.amplitudes()).map(|(m, c)| m * c).sum())
            .collect();
        Ok(Ket { amps })
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        check_dims(self.dim, other.dim, "matrix product")?;
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Ok(Operator { dim: d, data })
    }

    fn zip_with(&self, other: &Operator, f: impl Fn(C64, C64) -> C64) -> Result<Operator> {
        check_dims(self.dim, other.dim, "elementwise operation")?;
        Ok(Operator {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Max-entry distance to another operator of the same dimension.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        Ok(self.try_sub(other)?.max_abs())
    }
}

impl<'a> Add for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.try_add(rhs).expect("operator dimensions differ")
    }
}

impl<'a> Sub for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        self.try_sub(rhs).expect("operator dimensions differ")
    }
}

impl<'a> Mul for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.matmul(rhs).expect("operator dimensions differ")
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks(self.dim) {
            let cells: Vec<String> =
                row.iter().map(|c| format!("{:+.4}{:+.4}i", c.re, c.im)).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// An operator validated as Hermitian within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(Operator);

impl HermitianOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let deviation = op.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianOperator(op))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        herm_eig(&self.0).expect("validated at construction")
    }
}

impl AsRef<Operator> for HermitianOperator {
    fn as_ref(&self) -> &Operator {
        &self.0
    }
}

pub fn pauli_x() -> Operator {
    Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
}

pub fn pauli_y() -> Operator {
    Operator::from_rows(vec![
        vec![ZERO, C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), ZERO],
    ])
    .unwrap()
}

pub fn pauli_z() -> Operator {
    Operator::diagonal(&[1.0, -1.0])
}

/// Kronecker product.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl TensorProduct for Ket {
    fn tensor(&self, other: &Ket) -> Ket {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ket { amps }
    }
}

impl TensorProduct for Operator {
    fn tensor(&self, other: &Operator) -> Operator {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut data = vec![ZERO; d * d];
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                for k in 0..db {
                    for l in 0..db {
                        data[(i * db + k) * d + j * db + l] = a * other.data[k * db + l];
                    }
                }
            }
        }
        Operator { dim: d, data }
    }
}

pub fn tensor<T: TensorProduct>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Reduces `rho` on the composite space with factor dimensions `dims` to
/// subsystem `keep`, tracing out every other factor.
pub fn partial_trace(rho: &Operator, dims: &[usize], keep: usize) -> Result<Operator> {
    if keep >= dims.len() {
        return Err(Error::Dimension(format!(
            "subsystem {keep} out of range for {} factors",
            dims.len()
        )));
    }
    let total: usize = dims.iter().product();
    if total != rho.dim() || dims.contains(&0) {
        return Err(Error::Dimension(format!(
            "factor dimensions {dims:?} do not match operator dimension {}",
            rho.dim()
        )));
    }
    let outer: usize = dims[..keep].iter().product();
    let inner: usize = dims[keep + 1..].iter().product();
    let dk = dims[keep];
    let mut out = Operator::zeros(dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for o in 0..outer {
                for n in 0..inner {
                    let row = (o * dk + a) * inner + n;
                    let col = (o * dk + b) * inner + n;
                    acc += rho.get(row, col);
                }
            }
            out.data[a * dk + b] = acc;
        }
    }
    Ok(out)
}

/// Schmidt coefficients of `psi` across the cut `dim_a | dim_b`, descending,
/// padded with zeros to `min(dim_a, dim_b)` entries.
pub fn schmidt(psi: &Ket, dim_a: usize, dim_b: usize) -> Result<Vec<f64>> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != psi.dim() {
        return Err(Error::Dimension(format!(
            "cannot split a {}-dimensional ket as {dim_a} x {dim_b}",
            psi.dim()
        )));
    }
    let mut s = singular_values(psi.amplitudes(), dim_a, dim_b);
    s.resize(dim_a.min(dim_b), 0.0);
    Ok(s)
}

/// `⟨psi|op|psi⟩`.
pub fn expectation(op: &Operator, psi: &Ket) -> Result<C64> {
    psi.inner(&op.apply(psi)?)
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.matmul(b)?.try_sub(&b.matmul(a)?)
}

/// `{a, b} = ab + ba`.
pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.matmul(b)?.try_add(&b.matmul(a)?)
}

fn check_dims(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{what}: dimensions {a} and {b} differ")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell() -> Ket {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket::from_real(&[h, 0.0, 0.0, h]).unwrap()
    }

    #[test]
    fn tensor_of_basis_vectors() {
        let k = tensor(&Ket::basis(2, 0), &Ket::basis(2, 1));
        assert_eq!(k, Ket::from_real(&[0.0, 1.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn tensor_of_identities() {
        assert_eq!(tensor(&Operator::identity(2), &Operator::identity(2)), Operator::identity(4));
    }

    #[test]
    fn zz_on_01_flips_sign() {
        let zz = tensor(&pauli_z(), &pauli_z());
        let psi = Ket::from_real(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        // diag(1,-1,-1,1) evaluated by hand
        let expected = Ket::from_real(&[0.0, -1.0, 0.0, 0.0]).unwrap();
        assert_eq!(zz.apply(&psi).unwrap(), expected);
    }

    #[test]
    fn partial_trace_of_product_basis_state() {
        let rho = tensor(&Ket::basis(2, 0), &Ket::basis(2, 1)).projector().unwrap();
        let red = partial_trace(&rho, &[2, 2], 1).unwrap();
        let expected = Ket::basis(2, 1).projector().unwrap();
        assert_abs_diff_eq!(red.max_abs_diff(&expected).unwrap(), 0.0);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let rho = bell().projector().unwrap();
        // By hand: rho = 1/2 (|00><00| + |00><11| + |11><00| + |11><11|)
        // and tracing either qubit keeps only the diagonal blocks.
        let red = partial_trace(&rho, &[2, 2], 0).unwrap();
        let expected = Operator::identity(2).scale(c(0.5, 0.0));
        assert!(red.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn partial_trace_of_factorized_operator() {
        let rho = Ket::from_real(&[0.6, 0.8]).unwrap().projector().unwrap();
        let sigma = Operator::diagonal(&[0.2, 0.3, 1.5]);
        let red = partial_trace(&tensor(&rho, &sigma), &[2, 3], 0).unwrap();
        let expected = rho.scale(sigma.trace());
        assert!(red.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = Operator::identity(4);
        assert!(matches!(partial_trace(&rho, &[2, 3], 0), Err(Error::Dimension(_))));
        assert!(matches!(partial_trace(&rho, &[2, 2], 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn schmidt_product_and_bell() {
        let s = schmidt(&tensor(&Ket::basis(2, 0), &Ket::basis(2, 0)), 2, 2).unwrap();
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 0.0, epsilon = 1e-14);

        // amplitude matrix diag(1/√2, 1/√2) has singular values 1/√2 twice
        let s = schmidt(&bell(), 2, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s[0], h, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], h, epsilon = 1e-14);
    }

    #[test]
    fn schmidt_of_product_with_wide_factor() {
        let i = Ket::new(vec![c(0.6, 0.1), c(-0.2, 0.7746)]).unwrap().normalized().unwrap();
        let phi: Vec<f64> = (0..64).map(|j| (-((j as f64 - 32.0) / 6.0).powi(2)).exp()).collect();
        let phi = Ket::from_real(&phi).unwrap().normalized().unwrap();
        let s = schmidt(&tensor(&i, &phi), 2, 64).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-12);
        assert!(s[1] <= 1e-12);
    }

    #[test]
    fn schmidt_rejects_bad_split() {
        assert!(matches!(schmidt(&bell(), 3, 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn expectation_values() {
        assert_abs_diff_eq!(expectation(&pauli_z(), &Ket::basis(2, 0)).unwrap().re, 1.0);
        let psi = Ket::from_real(&[3f64.sqrt() / 2.0, 0.5]).unwrap();
        // 3/4 - 1/4
        let e = expectation(&pauli_z(), &psi).unwrap();
        assert_abs_diff_eq!(e.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.im, 0.0);
        let e = expectation(&Operator::identity(2), &psi).unwrap();
        assert_abs_diff_eq!(e.re, 1.0, epsilon = 1e-15);
        assert!(expectation(&Operator::identity(3), &psi).is_err());
    }

    #[test]
    fn pauli_commutation_relations() {
        let zero = Operator::zeros(2);
        assert_eq!(commutator(&pauli_z(), &pauli_z()).unwrap(), zero);
        let xy = commutator(&pauli_x(), &pauli_y()).unwrap();
        let expected = pauli_z().scale(c(0.0, 2.0));
        assert_abs_diff_eq!(xy.max_abs_diff(&expected).unwrap(), 0.0);
        let anti = anticommutator(&pauli_x(), &pauli_y()).unwrap();
        assert_abs_diff_eq!(anti.max_abs(), 0.0);
    }

    #[test]
    fn hermitian_validation() {
        let bad = pauli_x().try_add(&Operator::identity(2).scale(c(0.0, 0.1))).unwrap();
        assert!(matches!(HermitianOperator::new(bad), Err(Error::NotHermitian { .. })));
        assert!(HermitianOperator::new(pauli_y()).is_ok());
    }

    #[test]
    fn normalization_checks() {
        let k = Ket::from_real(&[3.0, 4.0]).unwrap();
        assert!(!k.is_normalized());
        let n = k.normalized().unwrap();
        assert!(n.is_normalized());
        assert!(Ket::from_real(&[0.0, 0.0]).unwrap().normalized().is_err());
        assert!(Ket::new(vec![]).is_err());
    }
}
