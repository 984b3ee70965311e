//! Computable non-separability witnesses for joint states.
//!
//! Two checks with different logical strength:
//!
//! * [`product_check`] is exact for pure states: a joint state is a product
//!   across a cut iff its Schmidt spectrum has a single nonzero value.
//! * [`correlation_witness`] looks at the device readouts only. A nonzero
//!   gap `|⟨x_A x_F⟩ - x̄_A·x̄_F|` rules out a product device state
//!   `ρ_A ⊗ ρ_F`. It does not by itself rule out a classical mixture of
//!   products, so it is never reported as a separability certificate.

use std::fmt;

use crate::error::{Error, Result};
use crate::qmath::{singular_values, C64};
use crate::vonneumann::{device_density, JointState};

/// Tolerance on the second Schmidt coefficient for calling a state a product.
pub const SCHMIDT_TOL: f64 = 1e-10;

/// Threshold on the readout correlation gap.
pub const CORRELATION_TOL: f64 = 1e-8;

/// One party of the system-plus-devices state; a bipartition splits it from
/// everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    System,
    DeviceA,
    DeviceF,
}

impl Party {
    fn index(self) -> usize {
        match self {
            Party::System => 0,
            Party::DeviceA => 1,
            Party::DeviceF => 2,
        }
    }

    pub fn all() -> [Party; 3] {
        [Party::System, Party::DeviceA, Party::DeviceF]
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::System => "system",
            Party::DeviceA => "device_A",
            Party::DeviceF => "device_F",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    pub bipartition: String,
    /// Schmidt coefficients, descending (pure-state check only).
    pub singular_values: Vec<f64>,
    /// `|⟨x_A x_F⟩ - x̄_A·x̄_F|` (correlation witness only).
    pub correlation_gap: Option<f64>,
    /// Set by the pure-state check.
    pub is_product: Option<bool>,
    /// Set by the correlation witness: the gap exceeds the tolerance.
    pub correlated: Option<bool>,
    pub tolerance: f64,
}

fn bipartition_label(s: &JointState, party: Party) -> String {
    let names = ["system", "device_A", "device_F"];
    let rest: Vec<&str> = (0..=s.axes().len())
        .filter(|&k| k != party.index())
        .map(|k| names[k])
        .collect();
    format!("{party} | {}", rest.join(","))
}

/// Schmidt decomposition of `s` across `party | rest`.
pub fn product_check(s: &JointState, party: Party) -> Result<SeparabilityReport> {
    let shape = s.shape();
    let k = party.index();
    if k >= shape.len() {
        return Err(Error::Dimension(format!(
            "bipartition {party} is not available for a state with {} device(s)",
            shape.len() - 1
        )));
    }
    let rows = shape[k];
    let cols: usize = shape.iter().product::<usize>() / rows;
    let outer: usize = shape[..k].iter().product();
    let inner: usize = shape[k + 1..].iter().product();
    let scale = s.cell_volume().sqrt();
    let amps = s.amplitudes();

    let mut matrix = vec![C64::new(0.0, 0.0); rows * cols];
    for o in 0..outer {
        for r in 0..rows {
            for n in 0..inner {
                matrix[r * cols + o * inner + n] = amps[(o * rows + r) * inner + n] * scale;
            }
        }
    }
    let mut values = singular_values(&matrix, rows, cols);
    let min_len = 2.min(rows.min(cols));
    if values.len() < min_len {
        values.resize(min_len, 0.0);
    }
    let second = values.get(1).copied().unwrap_or(0.0);
    Ok(SeparabilityReport {
        bipartition: bipartition_label(s, party),
        singular_values: values,
        correlation_gap: None,
        is_product: Some(second <= SCHMIDT_TOL),
        correlated: None,
        tolerance: SCHMIDT_TOL,
    })
}

/// Product checks across every single-party cut the state supports.
pub fn product_checks(s: &JointState) -> Result<Vec<SeparabilityReport>> {
    Party::all()[..s.shape().len()].iter().map(|&p| product_check(s, p)).collect()
}

/// Readout correlation witness for the two devices.
pub fn correlation_witness(s: &JointState) -> Result<SeparabilityReport> {
    let p = device_density(s)?;
    let gap = (p.correlation() - p.mean_a() * p.mean_f()).abs();
    Ok(SeparabilityReport {
        bipartition: "device_A | device_F".into(),
        singular_values: Vec::new(),
        correlation_gap: Some(gap),
        is_product: None,
        correlated: Some(gap > CORRELATION_TOL),
        tolerance: CORRELATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointer::{gaussian_pointer, PointerGrid};
    use crate::qmath::{pauli_z, HermitianOperator, Ket, Operator};
    use crate::vonneumann::{evolve_exact, evolve_sequence, initial_state, CouplingSpec};
    use approx::assert_abs_diff_eq;

    fn ptrs() -> [PointerGrid; 2] {
        [gaussian_pointer(1.0, 128, 16.0, 1.0).unwrap(), gaussian_pointer(0.05, 128, 4.0, 1.0).unwrap()]
    }

    fn i30() -> Ket {
        Ket::from_real(&[3f64.sqrt() / 2.0, 0.5]).unwrap()
    }

    fn f30() -> Ket {
        Ket::from_real(&[3f64.sqrt() / 2.0, -0.5]).unwrap()
    }

    fn coupled(a: Operator, g: f64) -> JointState {
        let s0 = initial_state(&i30(), &ptrs()).unwrap();
        let ca = CouplingSpec::new(HermitianOperator::new(a).unwrap(), g, 0).unwrap();
        let cf =
            CouplingSpec::new(HermitianOperator::new(f30().projector().unwrap()).unwrap(), 1.0, 1).unwrap();
        evolve_sequence(&s0, &[ca, cf]).unwrap()
    }

    #[test]
    fn initial_state_is_product_everywhere() {
        let s = initial_state(&i30(), &ptrs()).unwrap();
        for r in product_checks(&s).unwrap() {
            assert_eq!(r.is_product, Some(true), "{}", r.bipartition);
            assert_abs_diff_eq!(r.singular_values[0], 1.0, epsilon = 1e-10);
        }
        let w = correlation_witness(&s).unwrap();
        assert!(w.correlation_gap.unwrap() <= 1e-10);
        assert_eq!(w.correlated, Some(false));
    }

    #[test]
    fn weak_coupling_entangles_system_and_device() {
        let s0 = initial_state(&i30(), &ptrs()[..1]).unwrap();
        let c = CouplingSpec::new(HermitianOperator::new(pauli_z()).unwrap(), 0.05, 0).unwrap();
        let s = evolve_exact(&s0, &c).unwrap();
        let r = product_check(&s, Party::System).unwrap();
        assert_eq!(r.is_product, Some(false));
        // branches √3/2·φ(x-g) and 1/2·φ(x+g) with overlap e = exp(-g²/2σ²):
        // s₂² = (1 - √(1 - 4·(3/16)(1 - e²)))/2
        let e = (-0.05f64.powi(2) / 2.0).exp();
        let s2 = ((1.0 - (1.0 - 0.75 * (1.0 - e * e)).sqrt()) / 2.0).sqrt();
        assert_abs_diff_eq!(r.singular_values[1], s2, epsilon = 1e-10);
        let sum_sq: f64 = r.singular_values.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(sum_sq, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn identity_coupling_stays_product() {
        let s0 = initial_state(&i30(), &ptrs()).unwrap();
        let c = CouplingSpec::new(HermitianOperator::new(Operator::identity(2)).unwrap(), 0.05, 0).unwrap();
        let s = evolve_exact(&s0, &c).unwrap();
        for r in product_checks(&s).unwrap() {
            assert_eq!(r.is_product, Some(true), "{}", r.bipartition);
        }
    }

    #[test]
    fn theta30_correlation_gap() {
        let g = 0.05;
        let s = coupled(pauli_z(), g);
        let w = correlation_witness(&s).unwrap();
        // 0.5g - (0.5g)·x̄_F with x̄_F = (10 - 6e)/16
        let e = (-g * g / 2.0f64).exp();
        let expected = 0.5 * g * (1.0 - (10.0 - 6.0 * e) / 16.0);
        assert_abs_diff_eq!(w.correlation_gap.unwrap(), expected, epsilon = 1e-10);
        assert!((w.correlation_gap.unwrap() - 0.375 * g).abs() <= g * g);
        assert_eq!(w.correlated, Some(true));
    }

    #[test]
    fn commuting_pair_can_still_correlate() {
        // F = |0⟩ commutes with σ_z; the pointers still share a classical record
        let s0 = initial_state(&i30(), &ptrs()).unwrap();
        let ca = CouplingSpec::new(HermitianOperator::new(pauli_z()).unwrap(), 0.05, 0).unwrap();
        let proj0 = Ket::basis(2, 0).projector().unwrap();
        let cf = CouplingSpec::new(HermitianOperator::new(proj0).unwrap(), 1.0, 1).unwrap();
        let s = evolve_sequence(&s0, &[ca, cf]).unwrap();
        // ⟨x_A x_F⟩ = g·3/4, x̄_A = g/2, x̄_F = 3/4  →  gap = g·3/8
        let w = correlation_witness(&s).unwrap();
        assert_abs_diff_eq!(w.correlation_gap.unwrap(), 0.05 * 3.0 / 8.0, epsilon = 1e-10);
    }

    #[test]
    fn invalid_bipartition() {
        let s = initial_state(&i30(), &ptrs()[..1]).unwrap();
        assert!(matches!(product_check(&s, Party::DeviceF), Err(Error::Dimension(_))));
        assert!(matches!(correlation_witness(&s), Err(Error::MissingAxis(1))));
    }

    #[test]
    fn labels() {
        let s = initial_state(&i30(), &ptrs()).unwrap();
        assert_eq!(product_check(&s, Party::DeviceA).unwrap().bipartition, "device_A | system,device_F");
    }
}
