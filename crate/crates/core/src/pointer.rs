//! Discretized Gaussian pointer of a measuring device.
//!
//! The pointer lives on a uniform periodic grid covering `[-L/2, L/2)` with
//! spacing `dx = L / n`. Momentum is handled spectrally: the grid's discrete
//! Fourier transform gives the momentum representation on the lattice
//! `p_m = m · 2πħ/L`, `m = -n/2 .. n/2 - 1`, and translations are applied
//! as phase ramps in that representation.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::qmath::C64;

/// Minimum `extent / sigma` accepted for a freshly built Gaussian.
pub const MIN_EXTENT_SIGMAS: f64 = 16.0;

/// Room, in units of sigma, that must stay between a shifted packet and the
/// grid edge.
pub const SHIFT_GUARD_SIGMAS: f64 = 6.0;

/// Shape and physical constants of a pointer grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_points: usize,
    pub extent: f64,
    pub sigma: f64,
    pub hbar: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, extent: f64, sigma: f64, hbar: f64) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n_points = {n_points} is not a power of two >= 2")));
        }
        for (name, v) in [("extent", extent), ("sigma", sigma), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(GridSpec { n_points, extent, sigma, hbar })
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.n_points as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.extent
    }

    pub fn position(&self, j: usize) -> f64 {
        -0.5 * self.extent + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    /// Momentum of the `m`-th cell of the ascending momentum lattice.
    pub fn momentum(&self, m: usize) -> f64 {
        (m as f64 - (self.n_points / 2) as f64) * self.dp()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.momentum(m)).collect()
    }

    /// Checks that a packet displaced by `delta` stays clear of the periodic
    /// boundary.
    pub fn check_shift(&self, delta: f64) -> Result<()> {
        let reach = delta.abs() + SHIFT_GUARD_SIGMAS * self.sigma;
        if !(reach <= 0.5 * self.extent) {
            return Err(Error::GridExtent(format!(
                "shift {delta} plus {SHIFT_GUARD_SIGMAS}·sigma = {reach} exceeds half extent {}",
                0.5 * self.extent
            )));
        }
        Ok(())
    }
}

/// FFT plans for one grid size, shared by all transforms on that axis.
#[derive(Clone)]
pub(crate) struct Spectral {
    spec: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub(crate) fn new(spec: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            spec,
            forward: planner.plan_fft_forward(spec.n_points),
            inverse: planner.plan_fft_inverse(spec.n_points),
        }
    }

    /// Angular wavenumber of FFT bin `m` (standard unshifted ordering).
    fn wavenumber(&self, m: usize) -> f64 {
        let n = self.spec.n_points;
        let signed = if m >= n / 2 { m as f64 - n as f64 } else { m as f64 };
        2.0 * PI * signed / self.spec.extent
    }

    /// `ψ(x) -> ψ(x - delta)` by the Fourier shift theorem.
    pub(crate) fn shift_in_place(&self, buf: &mut [C64], delta: f64) {
        if delta == 0.0 {
            return;
        }
        self.forward.process(buf);
        let inv_n = 1.0 / self.spec.n_points as f64;
        for (m, x) in buf.iter_mut().enumerate() {
            *x *= C64::from_polar(inv_n, -self.wavenumber(m) * delta);
        }
        self.inverse.process(buf);
    }

    /// Applies the momentum operator `π = -iħ d/dx` spectrally.
    pub(crate) fn apply_momentum(&self, buf: &mut [C64]) {
        self.forward.process(buf);
        let scale = self.spec.hbar / self.spec.n_points as f64;
        for (m, x) in buf.iter_mut().enumerate() {
            *x *= scale * self.wavenumber(m);
        }
        self.inverse.process(buf);
    }

    /// Replaces position amplitudes with momentum amplitudes on the ascending
    /// lattice, normalized so that `Σ|ψ̃|²·dp = Σ|ψ|²·dx`.
    pub(crate) fn to_momentum_in_place(&self, buf: &mut [C64]) {
        let n = self.spec.n_points;
        self.forward.process(buf);
        let scale = self.spec.dx() / (2.0 * PI * self.spec.hbar).sqrt();
        // bin m' (signed) picks up exp(-i p x0/ħ) = (-1)^m' from the grid origin
        for (m, x) in buf.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *x *= scale * sign;
        }
        buf.rotate_left(n / 2);
    }
}

/// Pointer wavefunction sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointerGrid {
    spec: GridSpec,
    amps: Vec<C64>,
}

impl PointerGrid {
    pub fn from_amplitudes(spec: GridSpec, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != spec.n_points {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a {}-point grid",
                amps.len(),
                spec.n_points
            )));
        }
        Ok(PointerGrid { spec, amps })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `Σ|ψ_j|²·dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.spec.dx()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Normalization { norm: n });
        }
        Ok(PointerGrid { spec: self.spec, amps: self.amps.iter().map(|c| c / n).collect() })
    }

    /// Multiplies by the plane wave `exp(i·p0·x/ħ)`, boosting the mean
    /// momentum by `p0`.
    pub fn kick(&self, p0: f64) -> Self {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(j, c)| c * C64::from_polar(1.0, p0 * self.spec.position(j) / self.spec.hbar))
            .collect();
        PointerGrid { spec: self.spec, amps }
    }

    /// Position probability density `|ψ(x_j)|²`.
    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Pointer wavefunction in the momentum representation.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    spec: GridSpec,
    amps: Vec<C64>,
}

impl MomentumGrid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Amplitudes on the ascending lattice `p_m = spec.momentum(m)`.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dp(&self) -> f64 {
        self.spec.dp()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dp()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// First and second moments of a pointer in both representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub var_p: f64,
}

/// Samples `(1/(√(2π)σ))^{1/2} exp(-x²/4σ²)` on the grid and renormalizes
/// so that the discrete norm is exactly one.
pub fn gaussian_pointer(sigma: f64, n_points: usize, extent: f64, hbar: f64) -> Result<PointerGrid> {
    let spec = GridSpec::new(n_points, extent, sigma, hbar)?;
    if extent < MIN_EXTENT_SIGMAS * sigma {
        return Err(Error::GridExtent(format!(
            "extent {extent} is below {MIN_EXTENT_SIGMAS}·sigma = {}",
            MIN_EXTENT_SIGMAS * sigma
        )));
    }
    let prefactor = (1.0 / ((2.0 * PI).sqrt() * sigma)).sqrt();
    let amps = spec
        .positions()
        .into_iter()
        .map(|x| C64::new(prefactor * (-x * x / (4.0 * sigma * sigma)).exp(), 0.0))
        .collect();
    PointerGrid { spec, amps }.normalized()
}

/// Translates the pointer by `delta` (exact on the periodic lattice).
pub fn shift(p: &PointerGrid, delta: f64) -> Result<PointerGrid> {
    p.spec.check_shift(delta)?;
    let mut amps = p.amps.clone();
    Spectral::new(p.spec).shift_in_place(&mut amps, delta);
    Ok(PointerGrid { spec: p.spec, amps })
}

/// Applies the momentum operator to the pointer (unnormalized result).
pub fn apply_momentum(p: &PointerGrid) -> PointerGrid {
    let mut amps = p.amps.clone();
    Spectral::new(p.spec).apply_momentum(&mut amps);
    PointerGrid { spec: p.spec, amps }
}

pub fn to_momentum(p: &PointerGrid) -> MomentumGrid {
    let mut amps = p.amps.clone();
    Spectral::new(p.spec).to_momentum_in_place(&mut amps);
    MomentumGrid { spec: p.spec, amps }
}

/// Mean and variance of a discrete density on the lattice `coords`.
pub(crate) fn mean_var(coords: &[f64], density: &[f64], cell: f64) -> (f64, f64) {
    let mass: f64 = density.iter().sum::<f64>() * cell;
    let mean = coords.iter().zip(density).map(|(x, p)| x * p).sum::<f64>() * cell / mass;
    let var =
        coords.iter().zip(density).map(|(x, p)| (x - mean).powi(2) * p).sum::<f64>() * cell / mass;
    (mean, var)
}

pub fn moments(p: &PointerGrid) -> Moments {
    let (mean_x, var_x) = mean_var(&p.spec.positions(), &p.density(), p.spec.dx());
    let m = to_momentum(p);
    let (mean_p, var_p) = mean_var(&p.spec.momenta(), &m.density(), p.spec.dp());
    Moments { mean_x, var_x, mean_p, var_p }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> PointerGrid {
        gaussian_pointer(1.0, 512, 16.0, 1.0).unwrap()
    }

    #[test]
    fn fresh_gaussian_moments() {
        let m = moments(&unit());
        assert_abs_diff_eq!(m.mean_x, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m.var_x, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.mean_p, 0.0, epsilon = 1e-10);
        // ⟨π²⟩ = ħ²/(4σ²) for the Gaussian amplitude exp(-x²/4σ²)
        assert_abs_diff_eq!(m.var_p, 0.25, epsilon = 1e-10);
    }

    #[test]
    fn narrow_gaussian_is_normalized() {
        let p = gaussian_pointer(0.05, 512, 4.0, 1.0).unwrap();
        assert_abs_diff_eq!(p.norm_sqr(), 1.0, epsilon = 1e-10);
        let m = moments(&p);
        assert_abs_diff_eq!(m.var_x, 0.0025, epsilon = 1e-6 * 0.0025);
        assert_abs_diff_eq!(m.var_p, 1.0 / (4.0 * 0.0025), epsilon = 1e-8);
    }

    #[test]
    fn hbar_enters_momentum_variance() {
        let p = gaussian_pointer(0.5, 256, 10.0, 2.0).unwrap();
        // ħ²/(4σ²) = 4/1
        assert_abs_diff_eq!(moments(&p).var_p, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(gaussian_pointer(1.0, 512, 4.0, 1.0), Err(Error::GridExtent(_))));
        assert!(matches!(gaussian_pointer(1.0, 500, 16.0, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(gaussian_pointer(-1.0, 512, 16.0, 1.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn zero_shift_is_identity() {
        let p = unit();
        let q = shift(&p, 0.0).unwrap();
        for (a, b) in p.amplitudes().iter().zip(q.amplitudes()) {
            assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn shift_moves_the_mean() {
        let q = shift(&unit(), 0.5).unwrap();
        assert_abs_diff_eq!(moments(&q).mean_x, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(q.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shifts_compose() {
        let p = unit();
        let a = shift(&shift(&p, 0.3).unwrap(), 0.45).unwrap();
        let b = shift(&p, 0.75).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn shift_guard() {
        assert!(matches!(shift(&unit(), 2.5), Err(Error::GridExtent(_))));
        assert!(shift(&unit(), 2.0).is_ok());
    }

    #[test]
    fn momentum_representation_parseval_and_kick() {
        let p = unit();
        let m = to_momentum(&p);
        assert_abs_diff_eq!(m.norm_sqr(), 1.0, epsilon = 1e-10);
        // a plane-wave factor exp(ikx/ħ) translates the momentum density by k
        let kicked = p.kick(0.7);
        let mo = moments(&kicked);
        assert_abs_diff_eq!(mo.mean_p, 0.7, epsilon = 1e-9);
        assert_abs_diff_eq!(mo.var_p, 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(to_momentum(&kicked).norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn momentum_amplitudes_match_continuum_transform() {
        // FT of the Gaussian: (2σ²/(πħ²))^{1/4} exp(-σ²p²/ħ²), real and positive.
        // A 24σ box keeps the tail jump at the periodic boundary below 1e-15.
        let p = gaussian_pointer(1.0, 512, 24.0, 1.0).unwrap();
        let m = to_momentum(&p);
        for (k, amp) in m.amplitudes().iter().enumerate() {
            let pk = p.spec().momentum(k);
            let exact = (2.0 / PI).powf(0.25) * (-pk * pk).exp();
            assert!((amp - C64::new(exact, 0.0)).norm() <= 1e-12, "p = {pk}");
        }
    }

    #[test]
    fn momentum_operator_on_kicked_gaussian() {
        let p = unit().kick(0.4);
        let pi_p = apply_momentum(&p);
        let mean: C64 =
            p.amplitudes().iter().zip(pi_p.amplitudes()).map(|(a, b)| a.conj() * b).sum::<C64>()
                * p.spec().dx();
        assert_abs_diff_eq!(mean.re, 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(mean.im, 0.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn shift_is_invertible(d in -1.5f64..1.5, sigma in 0.3f64..1.0) {
            let p = gaussian_pointer(sigma, 256, 16.0, 1.0).unwrap();
            let back = shift(&shift(&p, d).unwrap(), -d).unwrap();
            for (a, b) in p.amplitudes().iter().zip(back.amplitudes()) {
                prop_assert!((a - b).norm() <= 1e-12);
            }
            prop_assert!((shift(&p, d).unwrap().norm_sqr() - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn uncertainty_bound(sigma in 0.2f64..1.0, k in -2.0f64..2.0, d in -1.0f64..1.0) {
            let p = shift(&gaussian_pointer(sigma, 256, 16.0, 1.0).unwrap(), d).unwrap().kick(k);
            let m = moments(&p);
            prop_assert!(m.var_x * m.var_p >= 0.25 * (1.0 - 1e-6));
        }
    }
}
