//! Driven Bose-Hubbard chain split into a disordered half (sites `1..=M`) and
//! a driven half (bonds `M..L-1`).
//!
//! Energies are in units of the static coupling `g0` and `hbar = 1`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{dimension, FockBasis};
use crate::error::{Error, Result};
use crate::output::{fmt_f64, CsvSink};

/// Largest sector dimension accepted for dense propagation.
pub const MAX_DENSE_DIMENSION: u64 = 6000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of sites `L = 2M`.
    pub sites: usize,
    pub particles: u32,
    /// Amplitude of the cosine on-site profile.
    pub h: f64,
    pub g0: f64,
    /// Drive amplitude on the interface and ergodic bonds.
    pub g1: f64,
    /// On-site interaction.
    pub u: f64,
    /// Drive angular frequency.
    pub omega: f64,
    /// Disorder strength on the localized half.
    pub w: f64,
}

impl ModelParams {
    /// Operating point of the driven junction: `L = 12`, `h = g0 = 1`,
    /// `U = 3.5`, `g1 = 0.9`, resonant drive `omega = 2 Omega0`.
    pub fn reference(particles: u32, w: f64) -> Self {
        let mut p = ModelParams {
            sites: 12,
            particles,
            h: 1.0,
            g0: 1.0,
            g1: 0.9,
            u: 3.5,
            omega: 1.0,
            w,
        };
        p.omega = 2.0 * p.small_oscillation_frequency();
        p
    }

    /// Domain size `M = L / 2`.
    pub fn domain_size(&self) -> usize {
        self.sites / 2
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `sqrt(8 pi^2 h g0) / M`, without validating signs.
    pub(crate) fn small_oscillation_frequency(&self) -> f64 {
        (8.0 * PI * PI * self.h * self.g0).sqrt() / self.domain_size() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sites.is_multiple_of(2) {
            return Err(Error::invalid("sites", format!("L = {} must be even (L = 2M)", self.sites)));
        }
        if self.sites < 4 {
            return Err(Error::invalid("sites", format!("L = {} must be >= 4 (M >= 2)", self.sites)));
        }
        let finite = [
            ("h", self.h),
            ("g0", self.g0),
            ("g1", self.g1),
            ("u", self.u),
            ("omega", self.omega),
            ("w", self.w),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        if self.g0 <= 0.0 {
            return Err(Error::invalid("g0", format!("must satisfy g0 > 0, got {}", self.g0)));
        }
        if self.g1 < 0.0 {
            return Err(Error::invalid("g1", format!("must satisfy g1 >= 0, got {}", self.g1)));
        }
        if self.omega <= 0.0 {
            return Err(Error::invalid("omega", format!("must satisfy omega > 0, got {}", self.omega)));
        }
        if self.w < 0.0 {
            return Err(Error::invalid("w", format!("must satisfy W >= 0, got {}", self.w)));
        }
        let dim = dimension(self.particles, self.sites)?;
        if dim > MAX_DENSE_DIMENSION {
            return Err(Error::invalid(
                "particles",
                format!("basis dimension {dim} exceeds the dense limit {MAX_DENSE_DIMENSION}"),
            ));
        }
        Ok(())
    }
}

/// On-site offsets `Delta_j` for the localized half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub delta: Vec<f64>,
    pub seed: u64,
}

impl DisorderRealization {
    /// I.i.d. uniform draws on `[-w, w]` from a ChaCha8 stream keyed by `seed`.
    pub fn draw(seed: u64, w: f64, domain_size: usize) -> Self {
        let delta = if w == 0.0 {
            vec![0.0; domain_size]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dist = Uniform::new_inclusive(-w, w).expect("w is finite and positive");
            (0..domain_size).map(|_| dist.sample(&mut rng)).collect()
        };
        DisorderRealization { delta, seed }
    }

    pub fn clean(domain_size: usize) -> Self {
        DisorderRealization {
            delta: vec![0.0; domain_size],
            seed: 0,
        }
    }
}

/// `h_j = h cos(2 pi j / M) + Delta_j`, with disorder on sites `1..=M` only.
pub fn onsite_profile(params: &ModelParams, disorder: &DisorderRealization) -> Vec<f64> {
    let m = params.domain_size();
    (1..=params.sites)
        .map(|j| {
            let clean = params.h * (2.0 * PI * j as f64 / m as f64).cos();
            if j <= m {
                clean + disorder.delta.get(j - 1).copied().unwrap_or(0.0)
            } else {
                clean
            }
        })
        .collect()
}

/// Whether bond `j` (1-based, joining sites `j` and `j+1`) carries the drive.
/// The interface bond `j = M` is driven.
pub fn is_driven_bond(bond: usize, params: &ModelParams) -> bool {
    bond >= params.domain_size()
}

pub fn coupling_at(bond: usize, t: f64, params: &ModelParams) -> Result<f64> {
    if bond == 0 || bond >= params.sites {
        return Err(Error::invalid(
            "bond",
            format!("bond {bond} outside 1..={}", params.sites - 1),
        ));
    }
    if is_driven_bond(bond, params) {
        Ok(params.g0 + params.g1 * (params.omega * t).cos())
    } else {
        Ok(params.g0)
    }
}

/// Branch energies `E_+(j), E_-(j) = (h/2) cos(2 pi j / M) -/+ 2 g0`.
///
/// The prefactor is `h/2` while the on-site profile uses `h`; both are kept
/// exactly as stated by the model definition.
pub fn bragg_branches(site: usize, params: &ModelParams) -> Result<(f64, f64)> {
    let m = params.domain_size();
    if site == 0 || site > m {
        return Err(Error::invalid("j", format!("site {site} outside 1..={m}")));
    }
    let centre = 0.5 * params.h * (2.0 * PI * site as f64 / m as f64).cos();
    Ok((centre - 2.0 * params.g0, centre + 2.0 * params.g0))
}

/// Hamiltonian at one instant. Real symmetric in the occupation basis; the
/// complex Hermitian form has zero imaginary part.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub entries: DMatrix<f64>,
    pub time: f64,
}

impl HamiltonianMatrix {
    /// Writes `l, l~, re, im` for every non-zero entry.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["l", "l_tilde", "re", "im"])?;
        let n = self.entries.nrows();
        for r in 0..n {
            for c in 0..n {
                let v = self.entries[(r, c)];
                if v != 0.0 {
                    sink.row(&[
                        (r + 1).to_string(),
                        (c + 1).to_string(),
                        fmt_f64(v),
                        fmt_f64(0.0),
                    ])?;
                }
            }
        }
        sink.finish()
    }
}

/// `H(t) = static + cos(omega t) * drive`, assembled once per realization.
#[derive(Debug, Clone)]
pub struct DrivenHamiltonian {
    pub static_part: DMatrix<f64>,
    pub drive_part: DMatrix<f64>,
    pub omega: f64,
}

impl DrivenHamiltonian {
    pub fn assemble(
        basis: &FockBasis,
        params: &ModelParams,
        disorder: &DisorderRealization,
    ) -> Result<Self> {
        if basis.sites() != params.sites || basis.particles() != params.particles {
            return Err(Error::DimensionMismatch(format!(
                "basis is (N = {}, L = {}), params are (N = {}, L = {})",
                basis.particles(),
                basis.sites(),
                params.particles,
                params.sites
            )));
        }
        if disorder.delta.len() != params.domain_size() {
            return Err(Error::DimensionMismatch(format!(
                "disorder has {} entries, domain size is {}",
                disorder.delta.len(),
                params.domain_size()
            )));
        }
        let dim = basis.len();
        let onsite = onsite_profile(params, disorder);
        let mut static_part = DMatrix::<f64>::zeros(dim, dim);
        let mut drive_part = DMatrix::<f64>::zeros(dim, dim);

        for (p, state) in basis.states().iter().enumerate() {
            let mut diag = 0.0;
            for (j, &n) in state.as_slice().iter().enumerate() {
                let n = n as f64;
                diag += onsite[j] * n + 0.5 * params.u * n * (n - 1.0);
            }
            static_part[(p, p)] = diag;

            // a+_b a_{b+1}: move one particle from site b+1 to site b; the
            // reverse hop is filled in by symmetry.
            for b in 0..params.sites - 1 {
                let source = state.get(b + 1);
                if source == 0 {
                    continue;
                }
                let target = state.get(b);
                let moved = state
                    .shifted(b + 1, -1)
                    .and_then(|s| s.shifted(b, 1))
                    .expect("source site is occupied");
                let q = basis.position(&moved)?;
                let amp = (source as f64).sqrt() * (target as f64 + 1.0).sqrt();
                static_part[(q, p)] = params.g0 * amp;
                static_part[(p, q)] = params.g0 * amp;
                if is_driven_bond(b + 1, params) {
                    drive_part[(q, p)] = params.g1 * amp;
                    drive_part[(p, q)] = params.g1 * amp;
                }
            }
        }
        Ok(DrivenHamiltonian {
            static_part,
            drive_part,
            omega: params.omega,
        })
    }

    pub fn dim(&self) -> usize {
        self.static_part.nrows()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn is_static(&self) -> bool {
        self.drive_part.iter().all(|&v| v == 0.0)
    }

    pub fn at(&self, t: f64) -> DMatrix<f64> {
        let c = (self.omega * t).cos();
        self.static_part.zip_map(&self.drive_part, |s, d| s + c * d)
    }
}

pub fn hamiltonian_matrix(
    t: f64,
    basis: &FockBasis,
    params: &ModelParams,
    disorder: &DisorderRealization,
) -> Result<HamiltonianMatrix> {
    let driven = DrivenHamiltonian::assemble(basis, params, disorder)?;
    Ok(HamiltonianMatrix {
        entries: driven.at(t),
        time: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn clean(params: &ModelParams) -> DisorderRealization {
        DisorderRealization::clean(params.domain_size())
    }

    #[test]
    fn reference_operating_point() {
        let p = ModelParams::reference(2, 1.0);
        assert_relative_eq!(p.omega, 2.961921958772244, epsilon = 1e-12);
        assert_eq!(p.domain_size(), 6);
        p.validate().unwrap();
    }

    #[test]
    fn validation_names_the_constraint() {
        let mut p = ModelParams::reference(2, 1.0);
        p.w = -1.0;
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("W >= 0"), "{err}");
        let mut p = ModelParams::reference(2, 1.0);
        p.sites = 11;
        assert!(p.validate().is_err());
        let mut p = ModelParams::reference(2, 1.0);
        p.g0 = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn profile_at_full_and_half_period() {
        let p = ModelParams::reference(1, 0.0);
        let h = onsite_profile(&p, &clean(&p));
        assert_relative_eq!(h[5], 1.0, epsilon = 1e-14);
        assert_relative_eq!(h[2], -1.0, epsilon = 1e-14);
        assert_eq!(h.len(), 12);
    }

    #[test]
    fn disorder_confined_to_localized_half_and_bounded() {
        let p = ModelParams::reference(1, 10.0);
        for seed in 0..1000 {
            let d = DisorderRealization::draw(seed, p.w, p.domain_size());
            let h = onsite_profile(&p, &d);
            for (j, hj) in h.iter().enumerate() {
                let clean = p.h * (2.0 * PI * (j + 1) as f64 / 6.0).cos();
                let dev = (hj - clean).abs();
                assert!(dev <= 10.0, "seed {seed} site {j}: {dev}");
                if j >= 6 {
                    assert_eq!(dev, 0.0);
                }
            }
        }
    }

    #[test]
    fn disorder_is_deterministic() {
        let a = DisorderRealization::draw(42, 3.0, 6);
        let b = DisorderRealization::draw(42, 3.0, 6);
        assert_eq!(a, b);
        assert_ne!(a.delta, DisorderRealization::draw(43, 3.0, 6).delta);
    }

    #[test]
    fn bond_schedule() {
        let p = ModelParams::reference(2, 1.0);
        assert_eq!(coupling_at(1, 0.3, &p).unwrap(), 1.0);
        assert_eq!(coupling_at(5, 0.3, &p).unwrap(), 1.0);
        assert_relative_eq!(coupling_at(6, 0.0, &p).unwrap(), 1.9, epsilon = 1e-14);
        assert_relative_eq!(coupling_at(11, p.period() / 2.0, &p).unwrap(), 0.1, epsilon = 1e-14);
        assert!(coupling_at(0, 0.0, &p).is_err());
        assert!(coupling_at(12, 0.0, &p).is_err());
    }

    #[test]
    fn bragg_branch_values() {
        let p = ModelParams::reference(1, 0.0);
        let (ep, em) = bragg_branches(6, &p).unwrap();
        assert_relative_eq!(ep, -1.5, epsilon = 1e-14);
        assert_relative_eq!(em, 2.5, epsilon = 1e-14);
        let (ep, em) = bragg_branches(3, &p).unwrap();
        assert_relative_eq!(ep, -2.5, epsilon = 1e-14);
        assert_relative_eq!(em, 1.5, epsilon = 1e-14);
        for j in 1..=6 {
            let (ep, em) = bragg_branches(j, &p).unwrap();
            assert_relative_eq!(em - ep, 4.0, epsilon = 1e-14);
        }
        assert!(bragg_branches(7, &p).is_err());
    }

    #[test]
    fn single_particle_elements() {
        let p = ModelParams::reference(1, 2.0);
        let d = DisorderRealization::draw(7, p.w, 6);
        let basis = FockBasis::enumerate(1, 12).unwrap();
        let t = 0.37;
        let h = hamiltonian_matrix(t, &basis, &p, &d).unwrap().entries;
        let onsite = onsite_profile(&p, &d);
        // basis position of |1_j> is L - j (0-based)
        for j in 1..=12 {
            let pj = 12 - j;
            assert_relative_eq!(h[(pj, pj)], onsite[j - 1], epsilon = 1e-14);
            if j < 12 {
                let g = coupling_at(j, t, &p).unwrap();
                assert_relative_eq!(h[(pj, pj - 1)], g, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn doubly_occupied_site() {
        let p = ModelParams::reference(2, 0.0);
        let basis = FockBasis::enumerate(2, 12).unwrap();
        let h = hamiltonian_matrix(0.0, &basis, &p, &clean(&p)).unwrap().entries;
        let onsite = onsite_profile(&p, &clean(&p));
        let mut two = vec![0u32; 12];
        two[2] = 2;
        let pt = basis.position(&crate::basis::OccupationVector::new(two)).unwrap();
        assert_relative_eq!(h[(pt, pt)], 2.0 * onsite[2] + 3.5, epsilon = 1e-14);
        let mut split = vec![0u32; 12];
        split[2] = 1;
        split[3] = 1;
        let ps = basis.position(&crate::basis::OccupationVector::new(split)).unwrap();
        assert_relative_eq!(h[(pt, ps)], 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn periodic_hermitian_and_static_limits() {
        let p = ModelParams::reference(2, 1.0);
        let d = DisorderRealization::draw(3, 1.0, 6);
        let basis = FockBasis::enumerate(2, 12).unwrap();
        let t = 0.81;
        let a = hamiltonian_matrix(t, &basis, &p, &d).unwrap().entries;
        let b = hamiltonian_matrix(t + p.period(), &basis, &p, &d).unwrap().entries;
        assert!((&a - &b).amax() <= 1e-14 * a.amax());
        assert!((&a - a.transpose()).amax() <= 1e-14 * a.amax());

        let mut q = p.clone();
        q.g1 = 0.0;
        let h0 = DrivenHamiltonian::assemble(&basis, &q, &d).unwrap();
        assert!(h0.is_static());
        assert_eq!(h0.at(0.0), h0.at(1.234));
    }

    #[test]
    fn write_nonzero_entries() {
        let p = ModelParams::reference(1, 0.0);
        let basis = FockBasis::enumerate(1, 12).unwrap();
        let h = hamiltonian_matrix(0.0, &basis, &p, &clean(&p)).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let rows = String::from_utf8(buf).unwrap().lines().count();
        // version + header + 12 diagonal + 22 hopping
        assert_eq!(rows, 2 + 12 + 22);
    }
}
