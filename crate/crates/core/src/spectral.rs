//! Participation ratios and nearest-neighbour spacing-ratio statistics.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::unitarity_defect;
use crate::output::{fmt_f64, CsvSink};

/// Which index the participation ratio is reported for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrMode {
    /// `PR(l) = 1 / sum_mu |c_{mu,l}|^4`, one value per configuration.
    #[default]
    PerConfiguration,
    /// `PR(mu) = 1 / sum_l |c_{mu,l}|^4`, one value per Floquet mode.
    PerState,
}

/// Participation ratios from the mode matrix (modes as columns, rows are
/// configurations).
pub fn participation_ratio(
    modes: &DMatrix<Complex64>,
    mode: PrMode,
    unitarity_tol: f64,
) -> Result<Vec<f64>> {
    if !modes.is_square() {
        return Err(Error::DimensionMismatch("mode matrix must be square".into()));
    }
    let defect = unitarity_defect(modes);
    if defect > unitarity_tol {
        return Err(Error::tolerance("mode matrix unitarity defect", defect, unitarity_tol));
    }
    let n = modes.nrows();
    let quartic = |z: &Complex64| z.norm_sqr() * z.norm_sqr();
    let pr = match mode {
        PrMode::PerConfiguration => (0..n)
            .map(|l| 1.0 / modes.row(l).iter().map(quartic).sum::<f64>())
            .collect(),
        PrMode::PerState => (0..n)
            .map(|mu| 1.0 / modes.column(mu).iter().map(quartic).sum::<f64>())
            .collect(),
    };
    Ok(pr)
}

/// Writes `l, PR` (or `mu, PR`) with 1-based indices.
pub fn write_pr<W: Write>(pr: &[f64], mode: PrMode, writer: W) -> Result<()> {
    let label = match mode {
        PrMode::PerConfiguration => "l",
        PrMode::PerState => "mu",
    };
    let mut sink = CsvSink::new(writer, &[label, "PR"])?;
    for (i, p) in pr.iter().enumerate() {
        sink.row(&[(i + 1).to_string(), fmt_f64(*p)])?;
    }
    sink.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingRatios {
    pub values: Vec<f64>,
}

impl SpacingRatios {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `r_mu = min(s_mu, s_{mu-1}) / max(s_mu, s_{mu-1})` over a sorted spectrum.
///
/// One zero spacing gives `r = 0`; two zero spacings are dropped.
pub fn r_statistics(sorted: &[f64]) -> Result<SpacingRatios> {
    if sorted.len() < 3 {
        return Err(Error::invalid("levels", "need at least 3 levels"));
    }
    if sorted.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::invalid("levels", "levels must be finite and sorted ascending"));
    }
    let spacings: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let values = spacings
        .windows(2)
        .filter_map(|s| {
            let (lo, hi) = if s[0] < s[1] { (s[0], s[1]) } else { (s[1], s[0]) };
            (hi > 0.0).then(|| lo / hi)
        })
        .collect();
    Ok(SpacingRatios { values })
}

/// Surmise densities `(P_GOE(r), P_Poisson(r))`.
pub fn reference_distributions(r: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid("r", format!("{r} is outside [0, 1]")));
    }
    let goe = 27.0 / 4.0 * (r + r * r) / (1.0 + r + r * r).powf(2.5);
    let poisson = 2.0 / ((1.0 + r) * (1.0 + r));
    Ok((goe, poisson))
}

/// Counts on uniform bins over `[0, 1]` plus running moments. Merging is
/// exact in the counts; the float sums are merged in caller order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RHistogram {
    pub counts: Vec<u64>,
    pub samples: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl RHistogram {
    pub fn new(bins: usize) -> Self {
        RHistogram {
            counts: vec![0; bins],
            samples: 0,
            sum: 0.0,
            sum_sq: 0.0,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, r: f64) {
        let bins = self.bins();
        let b = ((r * bins as f64) as usize).min(bins - 1);
        self.counts[b] += 1;
        self.samples += 1;
        self.sum += r;
        self.sum_sq += r * r;
    }

    pub fn merge(&mut self, other: &RHistogram) -> Result<()> {
        if other.bins() != self.bins() {
            return Err(Error::DimensionMismatch("histogram bin counts differ".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.samples += other.samples;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        Ok(())
    }

    pub fn bin_center(&self, b: usize) -> f64 {
        (b as f64 + 0.5) / self.bins() as f64
    }

    /// Probability density per bin (integrates to 1).
    pub fn density(&self) -> Vec<f64> {
        let width = 1.0 / self.bins() as f64;
        let total = self.samples.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / (total * width)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.samples as f64
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        let n = self.samples as f64;
        if self.samples < 2 {
            return f64::NAN;
        }
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }

    /// `bin_center, density, P_GOE, P_Poisson`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["bin_center", "density", "P_GOE", "P_Poisson"])?;
        for (b, d) in self.density().iter().enumerate() {
            let c = self.bin_center(b);
            let (goe, poisson) = reference_distributions(c)?;
            sink.row(&[fmt_f64(c), fmt_f64(*d), fmt_f64(goe), fmt_f64(poisson)])?;
        }
        sink.finish()
    }
}

pub const DEFAULT_R_BINS: usize = 20;

pub fn r_histogram(ensemble: &[SpacingRatios], bins: usize) -> Result<RHistogram> {
    if ensemble.is_empty() {
        return Err(Error::Empty("spacing-ratio ensemble"));
    }
    if bins == 0 {
        return Err(Error::invalid("bins", "need at least one bin"));
    }
    let mut hist = RHistogram::new(bins);
    for set in ensemble {
        for &r in &set.values {
            hist.add(r);
        }
    }
    Ok(hist)
}

/// Mean of a surmise density by composite Simpson quadrature.
pub fn surmise_mean(goe: bool, intervals: usize) -> f64 {
    simpson(intervals, |r| {
        let (g, p) = reference_distributions(r).unwrap();
        r * if goe { g } else { p }
    })
}

fn simpson(intervals: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = intervals + intervals % 2;
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}
