//! Closed-form weak-value algebra.
//!
//! The post-selection projector `F̂ = |F⟩⟨F|` is always built here from the
//! post-selected ket, never accepted from callers.

use crate::error::{Error, Result};
use crate::pointer::{apply_momentum, PointerGrid};
use crate::qmath::{
    anticommutator, commutator, expectation, HermitianOperator, Ket, C64,
};

/// Below this `|⟨F|I⟩|` the weak value is treated as a pole.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Max-entry norms of the commutators that decide whether the real part of
/// the weak value reduces to `⟨I|A|I⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorNorms {
    /// `‖[A, F̂]‖`
    pub a_f: f64,
    /// `‖[F̂, ρ_I]‖`
    pub f_rho: f64,
    /// `‖[A, ρ_I]‖`
    pub a_rho: f64,
    /// `‖[A, [F̂, ρ_I]]‖`
    pub a_f_rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakValueReport {
    pub weak_value: C64,
    pub re_formula: f64,
    pub im_formula: f64,
    /// `⟨F|I⟩`
    pub overlap: C64,
    /// `|⟨F|I⟩|²`
    pub postselect_prob: f64,
    /// `⟨I|A|I⟩`, the unconditioned expectation value.
    pub expectation: f64,
    pub commutator_norms: CommutatorNorms,
}

fn prepare(a: &HermitianOperator, i: &Ket, f: &Ket) -> Result<(Ket, Ket)> {
    for (name, k) in [("pre-selected", i), ("post-selected", f)] {
        if k.dim() != a.dim() {
            return Err(Error::Dimension(format!(
                "{name} state has dimension {}, observable {}",
                k.dim(),
                a.dim()
            )));
        }
    }
    Ok((i.normalized()?, f.normalized()?))
}

/// `⟨F|A|I⟩ / ⟨F|I⟩`.
pub fn weak_value(a: &HermitianOperator, i: &Ket, f: &Ket) -> Result<C64> {
    let (i, f) = prepare(a, i, f)?;
    let overlap = f.inner(&i)?;
    if overlap.norm() < ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalSelection { overlap: overlap.norm() });
    }
    Ok(f.inner(&a.as_operator().apply(&i)?)? / overlap)
}

/// Returns `(⟨I|{F̂,A}|I⟩, ⟨I|(F̂A - AF̂)|I⟩, ⟨I|F̂|I⟩)`.
fn readout_terms(a: &HermitianOperator, i: &Ket, f: &Ket) -> Result<(C64, C64, f64)> {
    let (i, f) = prepare(a, i, f)?;
    let proj = f.projector()?;
    let a = a.as_operator();
    let pf = expectation(&proj, &i)?.re;
    if pf < ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalSelection { overlap: pf.max(0.0).sqrt() });
    }
    let anti = expectation(&anticommutator(&proj, a)?, &i)?;
    let comm = expectation(&commutator(&proj, a)?, &i)?;
    Ok((anti, comm, pf))
}

/// `⟨I|(F̂A + AF̂)|I⟩ / (2⟨I|F̂|I⟩)`.
pub fn re_weak_formula(a: &HermitianOperator, i: &Ket, f: &Ket) -> Result<f64> {
    let (anti, _, pf) = readout_terms(a, i, f)?;
    Ok(anti.re / (2.0 * pf))
}

/// `⟨I|(F̂A - AF̂)|I⟩ / (2i⟨I|F̂|I⟩)`.
pub fn im_weak_formula(a: &HermitianOperator, i: &Ket, f: &Ket) -> Result<f64> {
    let (_, comm, pf) = readout_terms(a, i, f)?;
    Ok((comm / C64::new(0.0, 2.0 * pf)).re)
}

pub fn commutation_report(a: &HermitianOperator, i: &Ket, f: &Ket) -> Result<WeakValueReport> {
    let weak_value = weak_value(a, i, f)?;
    let re_formula = re_weak_formula(a, i, f)?;
    let im_formula = im_weak_formula(a, i, f)?;
    let (i, f) = prepare(a, i, f)?;
    let overlap = f.inner(&i)?;
    let op = a.as_operator();
    let proj_f = f.projector()?;
    let rho = i.projector()?;
    let f_rho = commutator(&proj_f, &rho)?;
    let commutator_norms = CommutatorNorms {
        a_f: commutator(op, &proj_f)?.max_abs(),
        f_rho: f_rho.max_abs(),
        a_rho: commutator(op, &rho)?.max_abs(),
        a_f_rho: commutator(op, &f_rho)?.max_abs(),
    };
    Ok(WeakValueReport {
        weak_value,
        re_formula,
        im_formula,
        overlap,
        postselect_prob: overlap.norm_sqr(),
        expectation: expectation(op, &i)?.re,
        commutator_norms,
    })
}

/// The pointer state `|φ⟩ - (i·strength/ħ)·A_w·π|φ⟩`, renormalized.
///
/// This is the textbook "device state after post-selection". It is kept as
/// a diagnostic for comparison with the joint-state statistics and is not
/// used by any estimator.
pub fn naive_device_state(
    a: &HermitianOperator,
    i: &Ket,
    f: &Ket,
    strength: f64,
    p: &PointerGrid,
) -> Result<PointerGrid> {
    let aw = weak_value(a, i, f)?;
    p.spec().check_shift(strength * aw.norm())?;
    let pi_phi = apply_momentum(p);
    let factor = C64::new(0.0, -strength / p.spec().hbar) * aw;
    let amps = p
        .amplitudes()
        .iter()
        .zip(pi_phi.amplitudes())
        .map(|(phi, dphi)| phi + factor * dphi)
        .collect();
    PointerGrid::from_amplitudes(*p.spec(), amps)?.normalized()
}
