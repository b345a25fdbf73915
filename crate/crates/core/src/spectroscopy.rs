//! Many-body spectroscopy: prepare superpositions across particle-number
//! sectors, record stroboscopic quadrature traces, and read quasienergies
//! off the averaged power spectrum.
//!
//! Conventions:
//! - `X = (a + a^dagger)/sqrt 2`, `P = -i (a - a^dagger)/sqrt 2`, so for the
//!   single-site preparation `<X_i>(n) = (1/sqrt 2) sum |C|^2 cos(eps n T)`.
//! - The complex quadrature `<X_i> + i <P_i> = sqrt 2 <a_i>` keeps the sign of
//!   each quasienergy; a real trace only gives mirror pairs `+-eps`.
//! - `A~_k = (1/Q) sum_n A_n exp(+2 pi i k n / Q)`, so a component
//!   `exp(-i eps n T)` lands on bin `k = eps T Q / (2 pi)`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{FftDirection, FftPlanner};
use serde::Serialize;

use crate::basis::{FockBasis, OccupationVector};
use crate::error::{Error, Result};
use crate::floquet::{floquet_operator_for, PropagatorSettings};
use crate::model::{DisorderRealization, DrivenHamiltonian, ModelParams};
use crate::output::{fmt_f64, CsvSink};

/// Amplitudes on the sectors `0..=N` of a fixed lattice.
#[derive(Debug, Clone)]
pub struct DirectSumState {
    pub bases: Vec<FockBasis>,
    pub sectors: Vec<DVector<Complex64>>,
}

impl DirectSumState {
    pub fn vacuum(sites: usize, max_particles: u32) -> Result<Self> {
        let bases = (0..=max_particles)
            .map(|n| FockBasis::enumerate(n, sites))
            .collect::<Result<Vec<_>>>()?;
        let mut sectors: Vec<DVector<Complex64>> =
            bases.iter().map(|b| DVector::zeros(b.len())).collect();
        sectors[0][0] = Complex64::new(1.0, 0.0);
        Ok(DirectSumState { bases, sectors })
    }

    pub fn sites(&self) -> usize {
        self.bases[0].sites()
    }

    pub fn max_particles(&self) -> u32 {
        (self.sectors.len() - 1) as u32
    }

    pub fn norm(&self) -> f64 {
        self.sectors.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt()
    }

    /// `a_site` applied to sector `n`, landing in sector `n - 1`.
    fn lower(&self, site: usize, n: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        let target = &self.bases[n - 1];
        let mut out = DVector::zeros(target.len());
        for (p, s) in self.bases[n].states().iter().enumerate() {
            let occ = s.get(site);
            if occ == 0 || v[p] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let moved = s.shifted(site, -1).expect("site is occupied");
            let q = target.position(&moved).expect("lowered state is in the basis");
            out[q] += v[p] * (occ as f64).sqrt();
        }
        out
    }

    /// `a_site |psi>` as a vector of sectors (`sectors[n]` holds sector `n`).
    fn lowered(&self, site: usize) -> Vec<DVector<Complex64>> {
        let mut out: Vec<DVector<Complex64>> =
            self.bases.iter().map(|b| DVector::zeros(b.len())).collect();
        for n in 1..self.sectors.len() {
            out[n - 1] = self.lower(site, n, &self.sectors[n]);
        }
        out
    }

    fn inner(a: &[DVector<Complex64>], b: &[DVector<Complex64>]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.dotc(y)).sum()
    }

    /// `<a_i>`.
    pub fn annihilation(&self, i: usize) -> Complex64 {
        Self::inner(&self.sectors, &self.lowered(i))
    }

    /// `<a_i a_j>`.
    pub fn pair_annihilation(&self, i: usize, j: usize) -> Complex64 {
        let aj = self.lowered(j);
        let mut aiaj: Vec<DVector<Complex64>> =
            self.bases.iter().map(|b| DVector::zeros(b.len())).collect();
        for n in 1..aj.len() {
            aiaj[n - 1] = self.lower(i, n, &aj[n]);
        }
        Self::inner(&self.sectors, &aiaj)
    }

    /// `<a_i^dagger a_j>`.
    pub fn hopping(&self, i: usize, j: usize) -> Complex64 {
        Self::inner(&self.lowered(i), &self.lowered(j))
    }
}

/// Pi/2 pulses on one or two sites applied to the vacuum:
/// one site gives `(|0> + |1_i>)/sqrt 2`, two sites give the product
/// `(|0> + |1_i>)(|0> + |1_j>)/2`. Sites are 1-based.
pub fn prepare_superposition(sites: &[usize], lattice_sites: usize) -> Result<DirectSumState> {
    if sites.is_empty() || sites.len() > 2 {
        return Err(Error::invalid("sites", "prepare one or two sites"));
    }
    if sites.len() == 2 && sites[0] == sites[1] {
        return Err(Error::invalid("sites", format!("site {} is repeated", sites[0])));
    }
    for &s in sites {
        if s == 0 || s > lattice_sites {
            return Err(Error::invalid("sites", format!("site {s} is outside 1..={lattice_sites}")));
        }
    }
    let mut state = DirectSumState::vacuum(lattice_sites, sites.len() as u32)?;
    let one = |occupied: &[usize]| {
        let mut v = vec![0u32; lattice_sites];
        for &s in occupied {
            v[s - 1] = 1;
        }
        OccupationVector::new(v)
    };
    if let [i] = *sites {
        let amp = Complex64::new(0.5f64.sqrt(), 0.0);
        state.sectors[0][0] = amp;
        let p = state.bases[1].position(&one(&[i]))?;
        state.sectors[1][p] = amp;
    } else {
        let amp = Complex64::new(0.5, 0.0);
        state.sectors[0][0] = amp;
        for s in sites {
            let p = state.bases[1].position(&one(&[*s]))?;
            state.sectors[1][p] = amp;
        }
        let p = state.bases[2].position(&one(sites))?;
        state.sectors[2][p] = amp;
    }
    Ok(state)
}

/// Measured quantity; sites are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    X(usize),
    P(usize),
    /// `<X_i> + i <P_i>`.
    Quadrature(usize),
    XX(usize, usize),
    PP(usize, usize),
    PX(usize, usize),
}

impl Observable {
    pub fn label(&self) -> String {
        match *self {
            Observable::X(i) => format!("X_{i}"),
            Observable::P(i) => format!("P_{i}"),
            Observable::Quadrature(i) => format!("X_{i}+iP_{i}"),
            Observable::XX(i, j) => format!("X_{i}X_{j}"),
            Observable::PP(i, j) => format!("P_{i}P_{j}"),
            Observable::PX(i, j) => format!("P_{i}X_{j}"),
        }
    }

    fn check(&self, sites: usize) -> Result<()> {
        let ok = |s: usize| s >= 1 && s <= sites;
        let valid = match *self {
            Observable::X(i) | Observable::P(i) | Observable::Quadrature(i) => ok(i),
            Observable::XX(i, j) | Observable::PP(i, j) | Observable::PX(i, j) => ok(i) && ok(j) && i != j,
        };
        if valid {
            Ok(())
        } else {
            Err(Error::invalid(
                "observable",
                format!("{} does not fit a lattice of {sites} sites (two-site correlators need distinct sites)", self.label()),
            ))
        }
    }

    /// Expectation value on `state`; real observables have zero imaginary part.
    pub fn expectation(&self, state: &DirectSumState) -> Result<Complex64> {
        self.check(state.sites())?;
        let s2 = 2f64.sqrt();
        let v = match *self {
            Observable::X(i) => Complex64::new(s2 * state.annihilation(i - 1).re, 0.0),
            Observable::P(i) => Complex64::new(s2 * state.annihilation(i - 1).im, 0.0),
            Observable::Quadrature(i) => state.annihilation(i - 1) * s2,
            Observable::XX(i, j) => {
                let (aa, hop) = (state.pair_annihilation(i - 1, j - 1), state.hopping(i - 1, j - 1));
                Complex64::new(aa.re + hop.re, 0.0)
            }
            Observable::PP(i, j) => {
                let (aa, hop) = (state.pair_annihilation(i - 1, j - 1), state.hopping(i - 1, j - 1));
                Complex64::new(-aa.re + hop.re, 0.0)
            }
            Observable::PX(i, j) => {
                let (aa, hop) = (state.pair_annihilation(i - 1, j - 1), state.hopping(i - 1, j - 1));
                Complex64::new(aa.im - hop.im, 0.0)
            }
        };
        Ok(v)
    }
}

/// One-period propagators for every sector `0..=N`.
#[derive(Debug, Clone)]
pub struct SectorPropagators {
    pub floquet: Vec<DMatrix<Complex64>>,
    pub period: f64,
    pub sites: usize,
}

impl SectorPropagators {
    pub fn new(
        params: &ModelParams,
        disorder: &DisorderRealization,
        max_particles: u32,
        settings: &PropagatorSettings,
    ) -> Result<Self> {
        let floquet = (0..=max_particles)
            .map(|n| {
                let p = ModelParams {
                    particles: n,
                    ..params.clone()
                };
                p.validate()?;
                let basis = FockBasis::enumerate(n, p.sites)?;
                let ham = DrivenHamiltonian::assemble(&basis, &p, disorder)?;
                floquet_operator_for(&ham, settings)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SectorPropagators {
            floquet,
            period: params.period(),
            sites: params.sites,
        })
    }

    /// Advances every sector by one period.
    pub fn step(&self, state: &mut DirectSumState) -> Result<()> {
        if state.sectors.len() > self.floquet.len() || state.sites() != self.sites {
            return Err(Error::DimensionMismatch(
                "state needs sectors the propagators do not cover".into(),
            ));
        }
        for (v, f) in state.sectors.iter_mut().zip(&self.floquet) {
            *v = f * &*v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SignalTrace {
    /// `A_n` for `n = 0..Q-1`.
    pub values: Vec<Complex64>,
    pub period: f64,
    pub label: String,
}

/// Optional additive Gaussian noise on each sample (both parts for complex
/// traces).
#[derive(Debug, Clone, Copy)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

pub fn stroboscopic_trace(
    state: &DirectSumState,
    observable: Observable,
    q: usize,
    propagators: &SectorPropagators,
    noise: Option<Noise>,
) -> Result<SignalTrace> {
    if q < 2 {
        return Err(Error::invalid("Q", "need at least 2 periods"));
    }
    observable.check(state.sites())?;
    let mut psi = state.clone();
    let mut values = Vec::with_capacity(q);
    for n in 0..q {
        if n > 0 {
            propagators.step(&mut psi)?;
        }
        values.push(observable.expectation(&psi)?);
    }
    if let Some(noise) = noise.filter(|n| n.sigma > 0.0) {
        let dist = Normal::new(0.0, noise.sigma)
            .map_err(|e| Error::invalid("noise_sigma", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let complex = matches!(observable, Observable::Quadrature(_));
        for v in &mut values {
            v.re += dist.sample(&mut rng);
            if complex {
                v.im += dist.sample(&mut rng);
            }
        }
    }
    Ok(SignalTrace {
        values,
        period: propagators.period,
        label: observable.label(),
    })
}

/// `l, n, A_n, A_n_im` for traces indexed by their initial site `l`.
pub fn write_traces<W: Write>(traces: &[SignalTrace], writer: W) -> Result<()> {
    let mut sink = CsvSink::new(writer, &["l", "n", "A_n", "A_n_im"])?;
    for (l, tr) in traces.iter().enumerate() {
        for (n, a) in tr.values.iter().enumerate() {
            sink.row(&[(l + 1).to_string(), n.to_string(), fmt_f64(a.re), fmt_f64(a.im)])?;
        }
    }
    sink.finish()
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerSpectrum {
    pub power: Vec<f64>,
    pub period: f64,
    pub averaged: bool,
}

impl PowerSpectrum {
    pub fn bins(&self) -> usize {
        self.power.len()
    }

    /// One bin in quasienergy, `2 pi / (Q T)`.
    pub fn bin_width(&self) -> f64 {
        2.0 * PI / (self.bins() as f64 * self.period)
    }

    /// Quasienergy of a (possibly fractional) bin, folded to `(-omega/2, omega/2]`.
    pub fn quasienergy(&self, k: f64) -> f64 {
        let q = self.bins() as f64;
        let folded = k.rem_euclid(q);
        let k = if folded > 0.5 * q { folded - q } else { folded };
        k * self.bin_width()
    }

    /// `k, eps_k, power`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["k", "eps_k", "power"])?;
        for (k, p) in self.power.iter().enumerate() {
            sink.row(&[k.to_string(), fmt_f64(self.quasienergy(k as f64)), fmt_f64(*p)])?;
        }
        sink.finish()
    }
}

/// `|A~_k|^2` averaged uniformly over the supplied traces.
pub fn power_spectrum(traces: &[SignalTrace]) -> Result<PowerSpectrum> {
    let first = traces.first().ok_or(Error::Empty("trace set"))?;
    let q = first.values.len();
    if traces.iter().any(|t| t.values.len() != q) {
        return Err(Error::DimensionMismatch("traces have different lengths".into()));
    }
    let fft = FftPlanner::<f64>::new().plan_fft(q, FftDirection::Inverse);
    let mut power = vec![0.0; q];
    let mut buf = vec![Complex64::new(0.0, 0.0); q];
    for tr in traces {
        buf.copy_from_slice(&tr.values);
        fft.process(&mut buf);
        for (p, z) in power.iter_mut().zip(&buf) {
            *p += (z / q as f64).norm_sqr();
        }
    }
    let count = traces.len() as f64;
    power.iter_mut().for_each(|p| *p /= count);
    Ok(PowerSpectrum {
        power,
        period: first.period,
        averaged: traces.len() > 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub eps_est: f64,
    /// Normalized so that the weights of a peak set sum to 1.
    pub weight: f64,
    pub bin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    /// `1 / sum w^2` over the normalized weights.
    pub fn participation_ratio(&self) -> f64 {
        let s: f64 = self.peaks.iter().map(|p| p.weight * p.weight).sum();
        if s > 0.0 {
            1.0 / s
        } else {
            0.0
        }
    }

    /// `eps_est, weight`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["eps_est", "weight"])?;
        for p in &self.peaks {
            sink.row(&[fmt_f64(p.eps_est), fmt_f64(p.weight)])?;
        }
        sink.finish()
    }
}

/// Power response of a unit line offset by `x` bins.
fn kernel(x: f64, q: usize) -> f64 {
    if x.abs() < 1e-12 {
        return 1.0;
    }
    let num = (PI * x).sin();
    let den = q as f64 * (PI * x / q as f64).sin();
    (num / den).powi(2)
}

pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.05;

/// Greedy line extraction: take the strongest bin, estimate the sub-bin
/// offset from the larger neighbour, remove that line's kernel from the
/// spectrum and repeat. Lines whose amplitude falls below `threshold` times
/// the first line's amplitude end the search. Bin 0 is skipped unless
/// `include_dc`.
pub fn extract_peaks(spectrum: &PowerSpectrum, threshold: f64, include_dc: bool) -> Result<PeakSet> {
    if !(threshold > 0.0) {
        return Err(Error::invalid("threshold", "must be > 0"));
    }
    let q = spectrum.bins();
    let mut residual = spectrum.power.clone();
    if !include_dc {
        residual[0] = 0.0;
    }
    let mut found: Vec<(f64, f64)> = Vec::new();
    let mut first_amp = None;
    for _ in 0..q {
        let (k0, &top) = residual
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("spectrum is non-empty");
        if !(top > 0.0) {
            break;
        }
        let left = residual[(k0 + q - 1) % q].max(0.0).sqrt();
        let right = residual[(k0 + 1) % q].max(0.0).sqrt();
        let centre = top.sqrt();
        let delta = if q < 3 {
            0.0
        } else if right >= left {
            right / (centre + right)
        } else {
            -left / (centre + left)
        };
        let amp = (top / kernel(delta, q)).sqrt();
        let reference = *first_amp.get_or_insert(amp);
        if amp < threshold * reference {
            break;
        }
        found.push((k0 as f64 + delta, amp));
        for (j, r) in residual.iter_mut().enumerate() {
            let mut offset = j as f64 - (k0 as f64 + delta);
            offset -= q as f64 * (offset / q as f64).round();
            *r = (*r - amp * amp * kernel(offset, q)).max(0.0);
        }
        residual[k0] = 0.0;
        if !include_dc {
            residual[0] = 0.0;
        }
    }
    let total: f64 = found.iter().map(|f| f.1).sum();
    let peaks = found
        .into_iter()
        .map(|(bin, amp)| Peak {
            eps_est: spectrum.quasienergy(bin),
            weight: amp / total,
            bin,
        })
        .collect();
    Ok(PeakSet { peaks })
}

/// Circular distance between two quasienergies in a zone of width `omega`.
pub fn zone_distance(a: f64, b: f64, omega: f64) -> f64 {
    let d = (a - b).rem_euclid(omega);
    d.min(omega - d)
}

/// Index pairs of sorted quasienergies closer than one DFT bin; such pairs
/// cannot be separated by a trace of `q` periods.
pub fn unresolved_pairs(quasienergies: &[f64], q: usize, period: f64) -> Vec<(usize, usize)> {
    let bin = 2.0 * PI / (q as f64 * period);
    let omega = 2.0 * PI / period;
    let mut out = Vec::new();
    for a in 0..quasienergies.len() {
        for b in a + 1..quasienergies.len() {
            if zone_distance(quasienergies[a], quasienergies[b], omega) < bin {
                out.push((a, b));
            }
        }
    }
    out
}

/// Single-site preparations on every site with complex quadrature traces,
/// the averaged spectrum and its peaks: the full measurement for `N = 1`.
pub fn single_particle_protocol(
    params: &ModelParams,
    disorder: &DisorderRealization,
    q: usize,
    settings: &PropagatorSettings,
    noise: Option<Noise>,
) -> Result<(Vec<SignalTrace>, PowerSpectrum)> {
    let props = SectorPropagators::new(params, disorder, 1, settings)?;
    let traces = (1..=params.sites)
        .map(|l| {
            let state = prepare_superposition(&[l], params.sites)?;
            let noise = noise.map(|n| Noise {
                seed: n.seed.wrapping_add(l as u64),
                ..n
            });
            stroboscopic_trace(&state, Observable::Quadrature(l), q, &props, noise)
        })
        .collect::<Result<Vec<_>>>()?;
    let spectrum = power_spectrum(&traces)?;
    Ok((traces, spectrum))
}
