//! Occupation-number basis of `N` bosons on `L` sites.
//!
//! States are kept in ascending lexicographic order on `(n_1, ..., n_L)`, so
//! the first state puts every particle on the last site and the last state
//! puts every particle on the first site. Indices exposed to users are
//! 1-based; `position` is the 0-based counterpart used for matrix rows.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::output::CsvSink;

/// Occupation numbers `n_j`, one entry per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(Vec<u32>);

impl OccupationVector {
    pub fn new(occupations: Vec<u32>) -> Self {
        OccupationVector(occupations)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn sites(&self) -> usize {
        self.0.len()
    }

    pub fn particles(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, site: usize) -> u32 {
        self.0[site]
    }

    /// Same configuration with one particle added (`delta = 1`) or removed
    /// (`delta = -1`) at `site`. Returns `None` when removal would go negative.
    pub(crate) fn shifted(&self, site: usize, delta: i32) -> Option<OccupationVector> {
        let n = self.0[site] as i64 + delta as i64;
        if n < 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[site] = n as u32;
        Some(OccupationVector(v))
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

/// Exact binomial coefficient; `None` on overflow.
pub(crate) fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) is always divisible by i at this point.
        acc = acc.checked_mul(n as u128 - k as u128 + i)? / i;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of configurations of `particles` bosons on `sites` sites,
/// `(L + N - 1)! / (N! (L - 1)!)`.
pub fn dimension(particles: u32, sites: usize) -> Result<u64> {
    if sites == 0 {
        return Err(Error::invalid("L", "site count must be at least 1"));
    }
    binomial(sites as u64 + particles as u64 - 1, particles as u64).ok_or_else(|| {
        Error::invalid(
            "N",
            format!("basis dimension overflows for N = {particles}, L = {sites}"),
        )
    })
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    particles: u32,
    sites: usize,
    states: Vec<OccupationVector>,
}

impl FockBasis {
    /// Enumerates every configuration in ascending lexicographic order.
    pub fn enumerate(particles: u32, sites: usize) -> Result<Self> {
        let dim = dimension(particles, sites)?;
        let mut states = Vec::with_capacity(dim as usize);
        let mut current = vec![0u32; sites];
        fill(&mut current, 0, particles, &mut states);
        debug_assert_eq!(states.len() as u64, dim);
        Ok(FockBasis {
            particles,
            sites,
            states,
        })
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[OccupationVector] {
        &self.states
    }

    /// State with 1-based index `l`.
    pub fn state(&self, l: usize) -> Option<&OccupationVector> {
        l.checked_sub(1).and_then(|p| self.states.get(p))
    }

    /// 1-based index of `v`, computed by combinatorial ranking.
    pub fn index_of(&self, v: &OccupationVector) -> Result<usize> {
        self.position(v).map(|p| p + 1)
    }

    /// 0-based row of `v`.
    pub fn position(&self, v: &OccupationVector) -> Result<usize> {
        if v.sites() != self.sites || v.particles() != self.particles {
            return Err(Error::NotInBasis(format!(
                "{v} (basis has N = {}, L = {})",
                self.particles, self.sites
            )));
        }
        // Count states that are lexicographically smaller. Fixing the prefix
        // and putting a < v_j particles on site j leaves R - a particles on s
        // trailing sites; summing over a telescopes to C(R+s, s) - C(R-v_j+s, s).
        let mut rank: u64 = 0;
        let mut remaining = self.particles as u64;
        for (j, &n) in v.as_slice().iter().enumerate() {
            let trailing = (self.sites - j - 1) as u64;
            if trailing == 0 {
                break;
            }
            let n = n as u64;
            if n > 0 {
                let all = binomial(remaining + trailing, trailing).unwrap_or(u64::MAX);
                let above = binomial(remaining - n + trailing, trailing).unwrap_or(u64::MAX);
                rank += all - above;
            }
            remaining -= n;
        }
        Ok(rank as usize)
    }

    /// Writes `l, n_1..n_L`, one row per state.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut header = vec!["l".to_string()];
        header.extend((1..=self.sites).map(|j| format!("n_{j}")));
        let mut sink = CsvSink::new(writer, &header)?;
        for (p, s) in self.states.iter().enumerate() {
            let mut row = vec![(p + 1).to_string()];
            row.extend(s.as_slice().iter().map(|n| n.to_string()));
            sink.row(&row)?;
        }
        sink.finish()
    }
}

fn fill(current: &mut [u32], site: usize, remaining: u32, out: &mut Vec<OccupationVector>) {
    if site + 1 == current.len() {
        current[site] = remaining;
        out.push(OccupationVector(current.to_vec()));
        current[site] = 0;
        return;
    }
    for n in 0..=remaining {
        current[site] = n;
        fill(current, site + 1, remaining - n, out);
    }
    current[site] = 0;
}
