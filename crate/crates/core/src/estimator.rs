//! Monte Carlo readouts of the two-device experiment and the post-selected
//! weak-value estimate.
//!
//! Records are drawn from the exact grid density by inverse CDF over the
//! flattened cell masses, with a uniform jitter inside the chosen cell.
//! Randomness is counter based: record `k` consumes ChaCha8 words
//! `8k .. 8k+8` of the stream keyed by the seed, so a record depends only on
//! `(seed, k)`. Generation and reduction run over fixed-size chunks in index
//! order, which makes every output independent of the thread count.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointer::{gaussian_pointer, GridSpec};
use crate::qmath::{HermitianOperator, Ket, C64};
use crate::vonneumann::{
    device_density, device_momentum_density, evolve_exact, evolve_sequence, initial_state,
    momentum_amplitudes, CouplingSpec, DeviceDensity, JointState,
};

/// Records per work unit; also the reduction granularity.
pub const CHUNK: usize = 1 << 14;

/// ChaCha words reserved per record (three `f64` draws plus one spare).
const WORDS_PER_RECORD: u128 = 8;

/// Tolerance of the empirical boost identity.
pub const BOOST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    Position,
    Momentum,
}

impl fmt::Display for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Readout::Position => "position",
            Readout::Momentum => "momentum",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Both devices read out; post-selection by thresholding `X_F`.
    PointerModel,
    /// Projective Born-rule post-selection onto `|F⟩` after the A coupling.
    IdealProjection,
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingMode::PointerModel => "sample-pointer",
            SamplingMode::IdealProjection => "sample-ideal",
        })
    }
}

/// Fully explicit experiment: no defaults are filled in here.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub observable: HermitianOperator,
    pub initial: Ket,
    pub post: Ket,
    /// `g_A·t_A`.
    pub strength_a: f64,
    /// `g_F·t_F`.
    pub strength_f: f64,
    pub pointer_a: GridSpec,
    pub pointer_f: GridSpec,
    pub readout: Readout,
    /// Binarization threshold on `X_F` in pointer-model runs.
    pub threshold: f64,
}

impl Experiment {
    fn coupling_a(&self) -> Result<CouplingSpec> {
        CouplingSpec::new(self.observable.clone(), self.strength_a, 0)
    }

    fn coupling_f(&self) -> Result<CouplingSpec> {
        let proj = HermitianOperator::new(self.post.projector()?)?;
        CouplingSpec::new(proj, self.strength_f, 1)
    }

    fn pointer(spec: &GridSpec) -> Result<crate::pointer::PointerGrid> {
        gaussian_pointer(spec.sigma, spec.n_points, spec.extent, spec.hbar)
    }

    /// System plus both pointers after the A coupling and then the
    /// `|F⟩⟨F|` coupling, each evolved exactly.
    pub fn joint_state(&self) -> Result<JointState> {
        let ptrs = [Self::pointer(&self.pointer_a)?, Self::pointer(&self.pointer_f)?];
        let s0 = initial_state(&self.initial, &ptrs)?;
        evolve_sequence(&s0, &[self.coupling_a()?, self.coupling_f()?])
    }

    /// System plus the A pointer after the A coupling only.
    pub fn single_device_state(&self) -> Result<JointState> {
        let s0 = initial_state(&self.initial, &[Self::pointer(&self.pointer_a)?])?;
        evolve_exact(&s0, &self.coupling_a()?)
    }

    /// Joint readout density in the experiment's readout basis.
    pub fn readout_density(&self) -> Result<DeviceDensity> {
        let s = self.joint_state()?;
        match self.readout {
            Readout::Position => device_density(&s),
            Readout::Momentum => device_momentum_density(&s),
        }
    }

    /// Threshold applied to `value_F` in `mode`. Ideal-projection outcomes
    /// are exactly 0 or 1 and are split at the midpoint.
    pub fn threshold_for(&self, mode: SamplingMode) -> f64 {
        match mode {
            SamplingMode::PointerModel => self.threshold,
            SamplingMode::IdealProjection => 0.5,
        }
    }

    /// Weak-value estimate from a post-selected mean of the A readout.
    pub fn estimate_from_mean(&self, selected_mean_a: f64) -> f64 {
        selected_mean_a * self.estimate_prefactor()
    }

    fn estimate_prefactor(&self) -> f64 {
        match self.readout {
            Readout::Position => 1.0 / self.strength_a,
            Readout::Momentum => {
                let s = &self.pointer_a;
                2.0 * s.sigma * s.sigma / (s.hbar * self.strength_a * self.strength_f)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub value_a: f64,
    pub value_f: f64,
    pub selected: bool,
}

/// Precomputed inverse-CDF table over the joint readout cells.
///
/// Cell `c` maps to A coordinate `a_coords[c / n_f]` and F coordinate
/// `f_coords[c % n_f]`; a zero F cell width yields exact F values.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<f64>,
    a_coords: Vec<f64>,
    a_cell: f64,
    f_coords: Vec<f64>,
    f_cell: f64,
    threshold: f64,
}

impl Sampler {
    pub fn new(exp: &Experiment, mode: SamplingMode) -> Result<Self> {
        let threshold = exp.threshold_for(mode);
        match mode {
            SamplingMode::PointerModel => {
                let p = exp.readout_density()?;
                Ok(Sampler {
                    cdf: cumulative(&p.values),
                    a_coords: p.coords_a(),
                    a_cell: p.cell_a(),
                    f_coords: p.axis_f.positions(),
                    f_cell: p.cell_f(),
                    threshold,
                })
            }
            SamplingMode::IdealProjection => {
                let s = exp.single_device_state()?;
                let spec = s.axes()[0];
                let amps = match exp.readout {
                    Readout::Position => s.amplitudes().to_vec(),
                    Readout::Momentum => momentum_amplitudes(&s, 0),
                };
                let (a_coords, a_cell) = match exp.readout {
                    Readout::Position => (spec.positions(), spec.dx()),
                    Readout::Momentum => (spec.momenta(), spec.dp()),
                };
                let masses = projective_masses(&amps, exp.post.amplitudes(), spec.n_points);
                Ok(Sampler {
                    cdf: cumulative(&masses),
                    a_coords,
                    a_cell,
                    f_coords: vec![0.0, 1.0],
                    f_cell: 0.0,
                    threshold,
                })
            }
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Record `k` of the stream keyed by `seed`.
    pub fn record(&self, seed: u64, k: u64) -> MeasurementRecord {
        let mut rng = stream_at(seed, k);
        self.draw(&mut rng)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> MeasurementRecord {
        let u_cell: f64 = rng.random();
        let u_a: f64 = rng.random();
        let u_f: f64 = rng.random();
        let _spare: u64 = rng.random();

        let total = *self.cdf.last().expect("nonempty table");
        let target = u_cell * total;
        let cell = self.cdf.partition_point(|&c| c <= target).min(self.cdf.len() - 1);
        let nf = self.f_coords.len();
        let value_a = self.a_coords[cell / nf] + (u_a - 0.5) * self.a_cell;
        let value_f = self.f_coords[cell % nf] + (u_f - 0.5) * self.f_cell;
        MeasurementRecord { value_a, value_f, selected: value_f > self.threshold }
    }

    fn chunk(&self, seed: u64, start: u64, len: usize) -> Vec<MeasurementRecord> {
        let mut rng = stream_at(seed, start);
        (0..len).map(|_| self.draw(&mut rng)).collect()
    }
}

fn stream_at(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(WORDS_PER_RECORD * k as u128);
    rng
}

fn cumulative(masses: &[f64]) -> Vec<f64> {
    masses
        .iter()
        .scan(0.0, |acc, m| {
            *acc += m.max(0.0);
            Some(*acc)
        })
        .collect()
}

/// Joint mass of (A cell, outcome) with outcome 1 for `|F⟩` and 0 for its
/// complement, laid out `[x][outcome]`.
fn projective_masses(amps: &[C64], post: &[C64], n: usize) -> Vec<f64> {
    let d = post.len();
    let mut out = Vec::with_capacity(2 * n);
    for x in 0..n {
        let mut total = 0.0;
        let mut proj = C64::new(0.0, 0.0);
        for (s, f) in post.iter().enumerate().take(d) {
            let psi = amps[s * n + x];
            total += psi.norm_sqr();
            proj += f.conj() * psi;
        }
        let p1 = proj.norm_sqr();
        out.push((total - p1).max(0.0));
        out.push(p1);
    }
    out
}

fn chunk_bounds(n: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks).into_par_iter().map(move |c| {
        let start = c * CHUNK;
        (start as u64, CHUNK.min(n - start))
    })
}

/// Draws `n` records from `sampler`.
pub fn sample_with(sampler: &Sampler, n: usize, seed: u64) -> Vec<MeasurementRecord> {
    let chunks: Vec<Vec<MeasurementRecord>> =
        chunk_bounds(n).map(|(start, len)| sampler.chunk(seed, start, len)).collect();
    chunks.concat()
}

/// Pointer-model records: both device readouts from the exact joint density.
pub fn sample_records(exp: &Experiment, n: usize, seed: u64) -> Result<Vec<MeasurementRecord>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    Ok(sample_with(&Sampler::new(exp, SamplingMode::PointerModel)?, n, seed))
}

/// Ideal-projection records: `value_F` is the Born-rule outcome of
/// projecting the system onto `|F⟩`, exactly 0 or 1.
pub fn sample_ideal(exp: &Experiment, n: usize, seed: u64) -> Result<Vec<MeasurementRecord>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    Ok(sample_with(&Sampler::new(exp, SamplingMode::IdealProjection)?, n, seed))
}

/// Partial sums over a run of records. Merged in index order only.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub n_total: u64,
    pub n_selected: u64,
    /// `Σ value_A` over selected records.
    pub sum_a_sel: f64,
    /// `Σ value_A²` over selected records.
    pub sum_a2_sel: f64,
    /// `Σ value_F` (raw, before binarization).
    pub sum_f_raw: f64,
}

impl Tally {
    pub fn of(records: &[MeasurementRecord]) -> Self {
        let mut t = Tally::default();
        for r in records {
            t.n_total += 1;
            t.sum_f_raw += r.value_f;
            if r.selected {
                t.n_selected += 1;
                t.sum_a_sel += r.value_a;
                t.sum_a2_sel += r.value_a * r.value_a;
            }
        }
        t
    }

    pub fn merge(self, o: Tally) -> Tally {
        Tally {
            n_total: self.n_total + o.n_total,
            n_selected: self.n_selected + o.n_selected,
            sum_a_sel: self.sum_a_sel + o.sum_a_sel,
            sum_a2_sel: self.sum_a2_sel + o.sum_a2_sel,
            sum_f_raw: self.sum_f_raw + o.sum_f_raw,
        }
    }

    /// Chunk tallies of `records` folded in index order, matching the
    /// streaming path exactly.
    pub fn chunked(records: &[MeasurementRecord]) -> Self {
        records.chunks(CHUNK).map(Tally::of).fold(Tally::default(), Tally::merge)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub n_total: u64,
    pub n_selected: u64,
    /// `⟨X_A X_F⟩` with binarized `X_F`.
    pub mean_all_af: f64,
    /// `⟨X_F⟩` with binarized `X_F` (the selected fraction).
    pub mean_f: f64,
    /// `⟨X_F⟩` of the raw pointer readout.
    pub mean_f_raw: f64,
    /// `⟨X_A⟩^(p)`.
    pub mean_selected_a: f64,
    /// `⟨X_A X_F⟩^(p)`.
    pub mean_selected_af: f64,
    pub boost: f64,
    pub estimate: f64,
    /// `None` with fewer than two selected records.
    pub std_error: Option<f64>,
    pub seed: u64,
    pub mode: SamplingMode,
    pub readout: Readout,
    pub threshold: f64,
}

/// Summary statistics from a tally.
pub fn summary_from_tally(
    t: &Tally,
    exp: &Experiment,
    mode: SamplingMode,
    seed: u64,
) -> Result<RunSummary> {
    if t.n_selected == 0 {
        return Err(Error::EmptyPostSelection);
    }
    let n = t.n_total as f64;
    let ns = t.n_selected as f64;
    let mean_selected_a = t.sum_a_sel / ns;
    let mean_all_af = t.sum_a_sel / n;
    let mean_f = ns / n;
    let std_error = (t.n_selected >= 2).then(|| {
        let var = ((t.sum_a2_sel - ns * mean_selected_a * mean_selected_a) / (ns - 1.0)).max(0.0);
        (var / ns).sqrt() * exp.estimate_prefactor().abs()
    });
    Ok(RunSummary {
        n_total: t.n_total,
        n_selected: t.n_selected,
        mean_all_af,
        mean_f,
        mean_f_raw: t.sum_f_raw / n,
        mean_selected_a,
        mean_selected_af: mean_selected_a,
        boost: mean_selected_a / mean_all_af,
        estimate: exp.estimate_from_mean(mean_selected_a),
        std_error,
        seed,
        mode,
        readout: exp.readout,
        threshold: exp.threshold_for(mode),
    })
}

/// Summary of materialized records.
pub fn summarize(
    records: &[MeasurementRecord],
    exp: &Experiment,
    mode: SamplingMode,
    seed: u64,
) -> Result<RunSummary> {
    summary_from_tally(&Tally::chunked(records), exp, mode, seed)
}

/// Samples and summarizes `n` records without holding them in memory.
/// Agrees bit for bit with `summarize` on the materialized records.
pub fn run_sampling(exp: &Experiment, mode: SamplingMode, n: usize, seed: u64) -> Result<RunSummary> {
    let sampler = Sampler::new(exp, mode)?;
    let tallies: Vec<Tally> = chunk_bounds(n)
        .map(|(start, len)| Tally::of(&sampler.chunk(seed, start, len)))
        .collect();
    let t = tallies.into_iter().fold(Tally::default(), Tally::merge);
    summary_from_tally(&t, exp, mode, seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostCheck {
    /// `⟨X_A X_F⟩^(p) · ⟨X_F⟩`.
    pub lhs: f64,
    /// `⟨X_A X_F⟩`.
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `⟨X_A X_F⟩^(p)·⟨X_F⟩ = ⟨X_A X_F⟩` on records whose `X_F` is
/// the binarized flag. Each side is computed from its own definition.
pub fn boost_identity_check(records: &[MeasurementRecord]) -> Result<BoostCheck> {
    let n = records.len() as f64;
    let xf = |r: &MeasurementRecord| if r.selected { 1.0 } else { 0.0 };
    let selected: Vec<&MeasurementRecord> = records.iter().filter(|r| r.selected).collect();
    if selected.is_empty() {
        return Err(Error::EmptyPostSelection);
    }
    let ns = selected.len() as f64;
    let mean_af_sel = selected.iter().map(|r| r.value_a * xf(r)).sum::<f64>() / ns;
    let mean_f = records.iter().map(xf).sum::<f64>() / n;
    let rhs = records.iter().map(|r| r.value_a * xf(r)).sum::<f64>() / n;
    let lhs = mean_af_sel * mean_f;
    let pass = (lhs - rhs).abs() <= BOOST_TOL * rhs.abs().max(1.0);
    Ok(BoostCheck { lhs, rhs, pass })
}
