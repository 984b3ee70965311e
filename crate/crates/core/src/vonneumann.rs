//! Joint state of a finite-dimensional system and one or two pointers under
//! von Neumann couplings `H = g·A⊗π`.
//!
//! Amplitudes are stored as a dense `d × n₁ (× n₂)` tensor, row-major with the
//! last pointer axis fastest. Axis 0 is the device that weakly measures `A`;
//! axis 1, when present, is the device that records the post-selection.
//! Reduced quantities (densities and moments) are computed directly from the
//! amplitudes; the device density matrix is never formed.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointer::{mean_var, GridSpec, PointerGrid, Spectral};
use crate::qmath::{HermitianOperator, Ket, C64};

const STATE_NORM_TOL: f64 = 1e-10;

/// A von Neumann coupling of `observable` to the momentum of one pointer.
///
/// `strength` is the product `g·t` and sets the pointer displacement per unit
/// eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub observable: HermitianOperator,
    pub strength: f64,
    pub pointer_axis: usize,
}

impl CouplingSpec {
    pub fn new(observable: HermitianOperator, strength: f64, pointer_axis: usize) -> Result<Self> {
        if !strength.is_finite() {
            return Err(Error::InvalidGrid(format!("coupling strength {strength} is not finite")));
        }
        Ok(CouplingSpec { observable, strength, pointer_axis })
    }
}

/// Pure state of system plus pointers.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    system_dim: usize,
    axes: Vec<GridSpec>,
    amps: Vec<C64>,
}

impl JointState {
    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn axes(&self) -> &[GridSpec] {
        &self.axes
    }

    pub fn axis(&self, axis: usize) -> Result<&GridSpec> {
        self.axes.get(axis).ok_or(Error::MissingAxis(axis))
    }

    /// Flattened `d × n₁ (× n₂)` amplitude tensor.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Tensor shape, system first.
    pub fn shape(&self) -> Vec<usize> {
        std::iter::once(self.system_dim).chain(self.axes.iter().map(|a| a.n_points)).collect()
    }

    /// Product of pointer cell sizes.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.dx()).product()
    }

    /// `Σ|Ψ|²·Πdx`.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    fn pointer_len(&self) -> usize {
        self.axes.iter().map(|a| a.n_points).product()
    }

    /// Pointer amplitudes attached to system basis state `s`.
    pub fn branch(&self, s: usize) -> &[C64] {
        let r = self.pointer_len();
        &self.amps[s * r..(s + 1) * r]
    }

    /// Wraps raw amplitudes; the caller vouches for the layout.
    pub fn from_parts(system_dim: usize, axes: Vec<GridSpec>, amps: Vec<C64>) -> Result<Self> {
        let expected = system_dim * axes.iter().map(|a| a.n_points).product::<usize>();
        if amps.len() != expected || axes.is_empty() || axes.len() > 2 {
            return Err(Error::Dimension(format!(
                "{} amplitudes for system dim {system_dim} and {} axes",
                amps.len(),
                axes.len()
            )));
        }
        Ok(JointState { system_dim, axes, amps })
    }
}

/// `|I⟩ ⊗ |φ₁⟩ (⊗ |φ₂⟩)`.
pub fn initial_state(system: &Ket, pointers: &[PointerGrid]) -> Result<JointState> {
    let norm = system.norm();
    if (norm - 1.0).abs() > STATE_NORM_TOL {
        return Err(Error::Normalization { norm });
    }
    if pointers.is_empty() || pointers.len() > 2 {
        return Err(Error::Dimension(format!("expected one or two pointers, got {}", pointers.len())));
    }
    let mut product: Vec<C64> = vec![C64::new(1.0, 0.0)];
    for p in pointers {
        product = product
            .iter()
            .flat_map(|a| p.amplitudes().iter().map(move |b| a * b))
            .collect();
    }
    let amps = system
        .amplitudes()
        .iter()
        .flat_map(|c| product.iter().map(move |b| c * b))
        .collect();
    Ok(JointState {
        system_dim: system.dim(),
        axes: pointers.iter().map(|p| *p.spec()).collect(),
        amps,
    })
}

/// Runs `f` on every 1-D line of the pointer tensor along `axis`.
fn for_each_line(buf: &mut [C64], axes: &[GridSpec], axis: usize, f: impl Fn(&mut [C64]) + Sync + Send) {
    match (axes.len(), axis) {
        (1, 0) | (2, 1) => {
            let n = axes[axis].n_points;
            buf.par_chunks_mut(n).for_each(f);
        }
        (2, 0) => {
            let (na, nf) = (axes[0].n_points, axes[1].n_points);
            let mut lines: Vec<Vec<C64>> = (0..nf)
                .into_par_iter()
                .map(|col| {
                    let mut line: Vec<C64> = (0..na).map(|r| buf[r * nf + col]).collect();
                    f(&mut line);
                    line
                })
                .collect();
            for (col, line) in lines.iter_mut().enumerate() {
                for (r, v) in line.iter().enumerate() {
                    buf[r * nf + col] = *v;
                }
            }
        }
        _ => unreachable!("axis validated by caller"),
    }
}

fn check_coupling(s: &JointState, c: &CouplingSpec) -> Result<()> {
    if c.observable.dim() != s.system_dim {
        return Err(Error::Dimension(format!(
            "observable dimension {} does not match system dimension {}",
            c.observable.dim(),
            s.system_dim
        )));
    }
    s.axis(c.pointer_axis)?;
    Ok(())
}

/// Exact action of `exp(-i·strength·A⊗π/ħ)`.
///
/// The observable is diagonalized; in each eigenbranch `a` the target
/// pointer is translated by `strength·a`.
pub fn evolve_exact(s: &JointState, c: &CouplingSpec) -> Result<JointState> {
    check_coupling(s, c)?;
    let spec = s.axes[c.pointer_axis];
    let sd = c.observable.spectral();
    let max_shift = sd.eigenvalues.iter().map(|l| (l * c.strength).abs()).fold(0.0, f64::max);
    spec.check_shift(max_shift)?;

    let d = s.system_dim;
    let r = s.pointer_len();
    let spectral = Spectral::new(spec);

    let branches: Vec<Vec<C64>> = sd
        .eigenvalues
        .par_iter()
        .zip(sd.eigenvectors.par_iter())
        .map(|(&lambda, u)| {
            let mut comp = vec![C64::new(0.0, 0.0); r];
            for (sys, &us) in u.amplitudes().iter().enumerate() {
                let w = us.conj();
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for (acc, a) in comp.iter_mut().zip(s.branch(sys)) {
                    *acc += w * a;
                }
            }
            let delta = c.strength * lambda;
            for_each_line(&mut comp, &s.axes, c.pointer_axis, |line| {
                spectral.shift_in_place(line, delta)
            });
            comp
        })
        .collect();

    let mut out = vec![C64::new(0.0, 0.0); d * r];
    for (u, comp) in sd.eigenvectors.iter().zip(&branches) {
        for (sys, &us) in u.amplitudes().iter().enumerate() {
            if us == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out[sys * r..(sys + 1) * r].iter_mut().zip(comp) {
                *o += us * a;
            }
        }
    }
    Ok(JointState { system_dim: d, axes: s.axes.clone(), amps: out })
}

/// `|Φ⟩ - (i·strength/ħ)(A⊗π)|Φ⟩`, left unnormalized.
pub fn evolve_first_order(s: &JointState, c: &CouplingSpec) -> Result<JointState> {
    check_coupling(s, c)?;
    let spec = s.axes[c.pointer_axis];
    let d = s.system_dim;
    let r = s.pointer_len();
    let spectral = Spectral::new(spec);

    let mut pi_psi = s.amps.clone();
    for sys in 0..d {
        for_each_line(&mut pi_psi[sys * r..(sys + 1) * r], &s.axes, c.pointer_axis, |line| {
            spectral.apply_momentum(line)
        });
    }
    let factor = C64::new(0.0, -c.strength / spec.hbar);
    let a = c.observable.as_operator();
    let mut out = s.amps.clone();
    for row in 0..d {
        for col in 0..d {
            let coef = factor * a.get(row, col);
            if coef == C64::new(0.0, 0.0) {
                continue;
            }
            let src = &pi_psi[col * r..(col + 1) * r];
            for (o, v) in out[row * r..(row + 1) * r].iter_mut().zip(src) {
                *o += coef * v;
            }
        }
    }
    Ok(JointState { system_dim: d, axes: s.axes.clone(), amps: out })
}

/// Applies couplings left to right.
pub fn evolve_sequence(s: &JointState, couplings: &[CouplingSpec]) -> Result<JointState> {
    couplings.iter().try_fold(s.clone(), |state, c| evolve_exact(&state, c))
}

/// Representation of the first device axis in a [`DeviceDensity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisBasis {
    Position,
    Momentum,
}

/// Joint probability density of the two device readouts on the grid,
/// `P[i·n_F + j]` for A-cell `i` and F-cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceDensity {
    pub basis_a: AxisBasis,
    pub axis_a: GridSpec,
    pub axis_f: GridSpec,
    pub values: Vec<f64>,
}

impl DeviceDensity {
    /// Lattice coordinates of the A axis in the density's basis.
    pub fn coords_a(&self) -> Vec<f64> {
        match self.basis_a {
            AxisBasis::Position => self.axis_a.positions(),
            AxisBasis::Momentum => self.axis_a.momenta(),
        }
    }

    pub fn cell_a(&self) -> f64 {
        match self.basis_a {
            AxisBasis::Position => self.axis_a.dx(),
            AxisBasis::Momentum => self.axis_a.dp(),
        }
    }

    pub fn cell_f(&self) -> f64 {
        self.axis_f.dx()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_a() * self.cell_f()
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        let nf = self.axis_f.n_points;
        self.values.chunks(nf).map(|row| row.iter().sum::<f64>() * self.cell_f()).collect()
    }

    pub fn marginal_f(&self) -> Vec<f64> {
        let nf = self.axis_f.n_points;
        let mut out = vec![0.0; nf];
        for row in self.values.chunks(nf) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|v| *v *= self.cell_a());
        out
    }

    /// `Σ a·P(a, ·)·da·dx_F` (unnormalized first moment of the A readout).
    pub fn mean_a(&self) -> f64 {
        dot(&self.coords_a(), &self.marginal_a()) * self.cell_a()
    }

    pub fn mean_f(&self) -> f64 {
        dot(&self.axis_f.positions(), &self.marginal_f()) * self.cell_f()
    }

    /// `Σ a·x_F·P(a, x_F)·da·dx_F`.
    pub fn correlation(&self) -> f64 {
        let nf = self.axis_f.n_points;
        let xf = self.axis_f.positions();
        self.coords_a()
            .iter()
            .zip(self.values.chunks(nf))
            .map(|(a, row)| a * dot(&xf, row))
            .sum::<f64>()
            * self.cell_a()
            * self.cell_f()
    }

    /// Exact mean of the A readout over cells with `x_F > threshold`, with
    /// the selected probability mass.
    pub fn postselected_mean_a(&self, threshold: f64) -> (f64, f64) {
        let nf = self.axis_f.n_points;
        let keep: Vec<bool> = self.axis_f.positions().iter().map(|&x| x > threshold).collect();
        let mut mass = 0.0;
        let mut first = 0.0;
        for (a, row) in self.coords_a().iter().zip(self.values.chunks(nf)) {
            let m: f64 = row.iter().zip(&keep).filter(|(_, &k)| k).map(|(v, _)| v).sum();
            mass += m;
            first += a * m;
        }
        let cell = self.cell_a() * self.cell_f();
        (first / mass, mass * cell)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn require_two_axes(s: &JointState) -> Result<()> {
    if s.axes.len() < 2 {
        return Err(Error::MissingAxis(1));
    }
    Ok(())
}

fn sum_branch_densities(s: &JointState, amps: &[C64]) -> Vec<f64> {
    let r = s.pointer_len();
    let mut out = vec![0.0; r];
    for sys in 0..s.system_dim {
        for (o, a) in out.iter_mut().zip(&amps[sys * r..(sys + 1) * r]) {
            *o += a.norm_sqr();
        }
    }
    out
}

/// `P(x_A, x_F) = Σ_s |Ψ(s, x_A, x_F)|²`.
pub fn device_density(s: &JointState) -> Result<DeviceDensity> {
    require_two_axes(s)?;
    Ok(DeviceDensity {
        basis_a: AxisBasis::Position,
        axis_a: s.axes[0],
        axis_f: s.axes[1],
        values: sum_branch_densities(s, &s.amps),
    })
}

/// `P(π_A, x_F)`, with the A axis Fourier transformed first.
pub fn device_momentum_density(s: &JointState) -> Result<DeviceDensity> {
    require_two_axes(s)?;
    Ok(DeviceDensity {
        basis_a: AxisBasis::Momentum,
        axis_a: s.axes[0],
        axis_f: s.axes[1],
        values: sum_branch_densities(s, &momentum_amplitudes(s, 0)),
    })
}

/// Amplitudes with pointer `axis` moved to the momentum representation.
pub fn momentum_amplitudes(s: &JointState, axis: usize) -> Vec<C64> {
    let spectral = Spectral::new(s.axes[axis]);
    let r = s.pointer_len();
    let mut amps = s.amps.clone();
    for sys in 0..s.system_dim {
        for_each_line(&mut amps[sys * r..(sys + 1) * r], &s.axes, axis, |line| {
            spectral.to_momentum_in_place(line)
        });
    }
    amps
}

/// Marginal density of one pointer axis, in position or momentum.
pub fn pointer_marginal(s: &JointState, axis: usize, basis: AxisBasis) -> Result<Vec<f64>> {
    let spec = *s.axis(axis)?;
    let amps = match basis {
        AxisBasis::Position => s.amps.clone(),
        AxisBasis::Momentum => momentum_amplitudes(s, axis),
    };
    let joint = sum_branch_densities(s, &amps);
    let out = match (s.axes.len(), axis) {
        (1, _) => joint,
        (_, 0) => {
            let nf = s.axes[1].n_points;
            joint.chunks(nf).map(|row| row.iter().sum::<f64>() * s.axes[1].dx()).collect()
        }
        _ => {
            let nf = s.axes[1].n_points;
            let mut m = vec![0.0; nf];
            for row in joint.chunks(nf) {
                for (o, v) in m.iter_mut().zip(row) {
                    *o += v;
                }
            }
            m.iter_mut().for_each(|v| *v *= s.axes[0].dx());
            m
        }
    };
    debug_assert_eq!(out.len(), spec.n_points);
    Ok(out)
}

/// `Tr[ρ x̂_axis]`: first moment of a pointer position, without
/// renormalizing by the state's norm.
pub fn mean_pointer(s: &JointState, axis: usize) -> Result<f64> {
    let spec = *s.axis(axis)?;
    let m = pointer_marginal(s, axis, AxisBasis::Position)?;
    Ok(dot(&spec.positions(), &m) * spec.dx())
}

/// `Tr[ρ π̂_axis]`.
pub fn mean_pointer_momentum(s: &JointState, axis: usize) -> Result<f64> {
    let spec = *s.axis(axis)?;
    let m = pointer_marginal(s, axis, AxisBasis::Momentum)?;
    Ok(dot(&spec.momenta(), &m) * spec.dp())
}

/// Normalized mean and variance of a pointer position.
pub fn pointer_position_stats(s: &JointState, axis: usize) -> Result<(f64, f64)> {
    let spec = *s.axis(axis)?;
    let m = pointer_marginal(s, axis, AxisBasis::Position)?;
    Ok(mean_var(&spec.positions(), &m, spec.dx()))
}

/// `⟨x_A x_F⟩ = Tr[ρ^(m) x̂_A x̂_F]`.
pub fn position_correlation(s: &JointState) -> Result<f64> {
    Ok(device_density(s)?.correlation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointer::gaussian_pointer;
    use crate::qmath::{expectation, pauli_x, pauli_z, Operator};
    use approx::assert_abs_diff_eq;

    fn theta30() -> (Ket, Ket) {
        let (c, s) = (3f64.sqrt() / 2.0, 0.5);
        (Ket::from_real(&[c, s]).unwrap(), Ket::from_real(&[c, -s]).unwrap())
    }

    fn herm(op: Operator) -> HermitianOperator {
        HermitianOperator::new(op).unwrap()
    }

    fn ptr_a() -> PointerGrid {
        gaussian_pointer(1.0, 256, 16.0, 1.0).unwrap()
    }

    fn ptr_f() -> PointerGrid {
        gaussian_pointer(0.05, 256, 4.0, 1.0).unwrap()
    }

    /// Sequential A-then-F measurement on the θ=30° pair.
    fn two_device(strength: f64) -> JointState {
        let (i, f) = theta30();
        let s0 = initial_state(&i, &[ptr_a(), ptr_f()]).unwrap();
        let ca = CouplingSpec::new(herm(pauli_z()), strength, 0).unwrap();
        let cf = CouplingSpec::new(herm(f.projector().unwrap()), 1.0, 1).unwrap();
        evolve_sequence(&s0, &[ca, cf]).unwrap()
    }

    #[test]
    fn initial_state_is_normalized_product() {
        let s = initial_state(&Ket::basis(2, 0), &[ptr_a()]).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mean_pointer(&s, 0).unwrap(), 0.0, epsilon = 1e-12);
        assert!(initial_state(&Ket::from_real(&[1.0, 1.0]).unwrap(), &[ptr_a()]).is_err());
    }

    #[test]
    fn identity_coupling_shifts_every_branch() {
        let (i, _) = theta30();
        let s = initial_state(&i, &[ptr_a()]).unwrap();
        let c = CouplingSpec::new(herm(Operator::identity(2)), 0.3, 0).unwrap();
        let out = evolve_exact(&s, &c).unwrap();
        let shifted = crate::pointer::shift(&ptr_a(), 0.3).unwrap();
        for sys in 0..2 {
            for (a, b) in out.branch(sys).iter().zip(shifted.amplitudes()) {
                assert!((a - i.amplitudes()[sys] * b).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn eigenstate_input_shifts_pointer() {
        let s = initial_state(&Ket::basis(2, 0), &[ptr_a()]).unwrap();
        let c = CouplingSpec::new(herm(pauli_z()), 0.4, 0).unwrap();
        let out = evolve_exact(&s, &c).unwrap();
        assert_abs_diff_eq!(mean_pointer(&out, 0).unwrap(), 0.4, epsilon = 1e-10);
        assert!(out.branch(1).iter().all(|a| a.norm() <= 1e-14));
    }

    #[test]
    fn weak_coupling_mean_matches_expectation() {
        let (i, _) = theta30();
        let s = initial_state(&i, &[ptr_a()]).unwrap();
        let c = CouplingSpec::new(herm(pauli_z()), 0.05, 0).unwrap();
        let out = evolve_exact(&s, &c).unwrap();
        // g·⟨I|σ_z|I⟩ = 0.05·(3/4 - 1/4)
        assert_abs_diff_eq!(mean_pointer(&out, 0).unwrap(), 0.025, epsilon = 1e-10);
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn first_order_tracks_exact_to_second_order() {
        let (i, _) = theta30();
        let s = initial_state(&i, &[ptr_a()]).unwrap();
        let zero = CouplingSpec::new(herm(pauli_z()), 0.0, 0).unwrap();
        assert_eq!(evolve_first_order(&s, &zero).unwrap(), s);

        let g = 0.05;
        let c = CouplingSpec::new(herm(pauli_z()), g, 0).unwrap();
        let exact = evolve_exact(&s, &c).unwrap();
        let first = evolve_first_order(&s, &c).unwrap();
        // second-order remainder g²/2·φ'' is bounded by g²·max|φ''|/2 ≈ 0.63·g²/2
        let max_dev = exact
            .amplitudes()
            .iter()
            .zip(first.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_dev <= 0.5 * g * g, "max deviation {max_dev}");
        assert!(max_dev > 1e-6);
        // ‖Φ‖² = 1 + g²⟨A²⟩⟨π²⟩/ħ² with ⟨π²⟩ = 1/4
        assert_abs_diff_eq!(first.norm_sqr(), 1.0 + g * g * 0.25, epsilon = 1e-10);
    }

    #[test]
    fn exact_evolution_is_unitary_for_random_observables() {
        let h = Operator::from_rows(vec![
            vec![C64::new(0.3, 0.0), C64::new(0.2, -0.7), C64::new(0.1, 0.1)],
            vec![C64::new(0.2, 0.7), C64::new(-0.5, 0.0), C64::new(0.0, 0.4)],
            vec![C64::new(0.1, -0.1), C64::new(0.0, -0.4), C64::new(1.1, 0.0)],
        ])
        .unwrap();
        let psi = Ket::new(vec![C64::new(0.5, 0.1), C64::new(-0.3, 0.6), C64::new(0.2, -0.4)])
            .unwrap()
            .normalized()
            .unwrap();
        let s = initial_state(&psi, &[ptr_a()]).unwrap();
        let c = CouplingSpec::new(herm(h.clone()), 0.7, 0).unwrap();
        let out = evolve_exact(&s, &c).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-10);
        let expected = 0.7 * expectation(&h, &psi).unwrap().re;
        assert_abs_diff_eq!(mean_pointer(&out, 0).unwrap(), expected, epsilon = 1e-8);
    }

    #[test]
    fn device_density_factorizes_for_products() {
        let (i, _) = theta30();
        let s = initial_state(&i, &[ptr_a(), ptr_f()]).unwrap();
        let check = |s: &JointState| {
            let p = device_density(s).unwrap();
            let (pa, pf) = (p.marginal_a(), p.marginal_f());
            let nf = p.axis_f.n_points;
            let dev = p
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| (v - pa[k / nf] * pf[k % nf]).abs())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-12, "factorization defect {dev}");
        };
        check(&s);
        let c = CouplingSpec::new(herm(Operator::identity(2)), 0.05, 0).unwrap();
        check(&evolve_exact(&s, &c).unwrap());
    }

    #[test]
    fn density_requires_two_axes() {
        let s = initial_state(&Ket::basis(2, 0), &[ptr_a()]).unwrap();
        assert!(matches!(device_density(&s), Err(Error::MissingAxis(1))));
        assert!(matches!(position_correlation(&s), Err(Error::MissingAxis(1))));
        assert!(matches!(mean_pointer(&s, 1), Err(Error::MissingAxis(1))));
    }

    #[test]
    fn two_device_moments() {
        let g = 0.05;
        let s = two_device(g);
        let p = device_density(&s).unwrap();
        assert_abs_diff_eq!(p.total_mass(), 1.0, epsilon = 1e-10);
        assert!(p.values.iter().all(|&v| v >= 0.0));
        // ⟨F̂⟩ after the exact A coupling: (10 - 6·exp(-g²/2σ²))/16
        let mean_f = (10.0 - 6.0 * (-g * g / 2.0f64).exp()) / 16.0;
        assert_abs_diff_eq!(mean_pointer(&s, 1).unwrap(), mean_f, epsilon = 1e-10);
        assert!((mean_pointer(&s, 1).unwrap() - 0.25).abs() <= g * g);
        // σ_z cross terms vanish, so ⟨x_A x_F⟩ = g·½⟨I|{F̂,σ_z}|I⟩ = 0.5·g exactly
        assert_abs_diff_eq!(position_correlation(&s).unwrap() / g, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(mean_pointer(&s, 0).unwrap(), 0.5 * g, epsilon = 1e-10);
    }

    #[test]
    fn momentum_density_is_normalized() {
        let s = two_device(0.05);
        let p = device_momentum_density(&s).unwrap();
        assert_abs_diff_eq!(p.total_mass(), 1.0, epsilon = 1e-10);
        let s0 = initial_state(&theta30().0, &[ptr_a(), ptr_f()]).unwrap();
        assert_abs_diff_eq!(device_momentum_density(&s0).unwrap().mean_a(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn imaginary_scenario_has_negative_postselected_momentum() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = Ket::new(vec![C64::new(h, 0.0), C64::new(0.0, h)]).unwrap();
        let s0 = initial_state(&Ket::basis(2, 0), &[ptr_a(), ptr_f()]).unwrap();
        let ca = CouplingSpec::new(herm(pauli_x()), 0.05, 0).unwrap();
        let cf = CouplingSpec::new(herm(f.projector().unwrap()), 1.0, 1).unwrap();
        let s = evolve_sequence(&s0, &[ca, cf]).unwrap();
        let (mean, mass) = device_momentum_density(&s).unwrap().postselected_mean_a(0.5);
        assert_abs_diff_eq!(mass, 0.5, epsilon = 1e-8);
        // -⟨p sin(2gp)⟩ for p ~ N(0, 1/4): -2g·(1/4)·exp(-g²/2)
        let expected = -2.0 * 0.05 * 0.25 * (-0.05f64 * 0.05 / 2.0).exp();
        assert_abs_diff_eq!(mean, expected, epsilon = 1e-10);
    }

    #[test]
    fn identity_coupling_correlation_is_classical() {
        let (i, f) = theta30();
        let s0 = initial_state(&i, &[ptr_a(), ptr_f()]).unwrap();
        let ca = CouplingSpec::new(herm(Operator::identity(2)), 0.05, 0).unwrap();
        let cf = CouplingSpec::new(herm(f.projector().unwrap()), 1.0, 1).unwrap();
        let s = evolve_sequence(&s0, &[ca, cf]).unwrap();
        let corr = position_correlation(&s).unwrap();
        assert_abs_diff_eq!(corr, 0.05 * mean_pointer(&s, 1).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn evolution_order_matters_for_noncommuting_pair() {
        let (i, f) = theta30();
        let s0 = initial_state(&i, &[ptr_a(), ptr_f()]).unwrap();
        let ca = CouplingSpec::new(herm(pauli_z()), 0.05, 0).unwrap();
        let cf = CouplingSpec::new(herm(f.projector().unwrap()), 1.0, 1).unwrap();
        let a_first = evolve_sequence(&s0, &[ca.clone(), cf.clone()]).unwrap();
        let f_first = evolve_sequence(&s0, &[cf, ca]).unwrap();
        let (x, y) = (position_correlation(&a_first).unwrap(), position_correlation(&f_first).unwrap());
        // F first gives g·|⟨F|I⟩|²·⟨F|σ_z|F⟩ = 0.125·g
        assert_abs_diff_eq!(y / 0.05, 0.125, epsilon = 1e-10);
        assert!((x - y).abs() > 1e-3);
    }

    #[test]
    fn shift_guard_is_enforced() {
        let s = initial_state(&Ket::basis(2, 0), &[ptr_a()]).unwrap();
        let c = CouplingSpec::new(herm(pauli_z()), 3.0, 0).unwrap();
        assert!(matches!(evolve_exact(&s, &c), Err(Error::GridExtent(_))));
        let c = CouplingSpec::new(herm(Operator::identity(3)), 0.1, 0).unwrap();
        assert!(matches!(evolve_exact(&s, &c), Err(Error::Dimension(_))));
    }
}
