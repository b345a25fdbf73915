//! Hardcore-boson limit through the Jordan-Wigner map: the quadratic fermion
//! chain has an `L x L` single-particle Floquet problem, and its effective
//! matrix `M` fixes every spin coupling
//! `M_{l,l'} (sigma+_l Z_{l+1} ... Z_{l'-1} sigma-_{l'} + h.c.)`.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::{write_complex_matrix, FloquetResult, PropagatorSettings};
use crate::linalg::hermiticity_defect;
use crate::model::{is_driven_bond, onsite_profile, DisorderRealization, DrivenHamiltonian, ModelParams};
use crate::output::{fmt_f64, CsvSink};

/// Single-particle effective matrix, indexed by site (row `l - 1` is site `l`).
#[derive(Debug, Clone)]
pub struct FermionEffectiveMatrix {
    pub m: DMatrix<Complex64>,
}

impl FermionEffectiveMatrix {
    pub fn sites(&self) -> usize {
        self.m.nrows()
    }

    /// `l, l_tilde, re, im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_complex_matrix(&self.m, writer)
    }
}

/// Site-indexed `L x L` Hamiltonian: on-site `h_l` on the diagonal, bond
/// couplings `g_l(t)` on the first off-diagonals.
pub fn single_particle_hamiltonian(
    params: &ModelParams,
    disorder: &DisorderRealization,
) -> Result<DrivenHamiltonian> {
    params.validate()?;
    if disorder.delta.len() != params.domain_size() {
        return Err(Error::DimensionMismatch(format!(
            "disorder has {} entries, domain size is {}",
            disorder.delta.len(),
            params.domain_size()
        )));
    }
    let l = params.sites;
    let mut static_part = DMatrix::from_diagonal(&onsite_profile(params, disorder).into());
    let mut drive_part = DMatrix::<f64>::zeros(l, l);
    for bond in 1..l {
        let drive = if is_driven_bond(bond, params) { params.g1 } else { 0.0 };
        static_part[(bond - 1, bond)] = params.g0;
        static_part[(bond, bond - 1)] = params.g0;
        drive_part[(bond - 1, bond)] = drive;
        drive_part[(bond, bond - 1)] = drive;
    }
    Ok(DrivenHamiltonian {
        static_part,
        drive_part,
        omega: params.omega,
    })
}

pub fn fermion_floquet_effective(
    params: &ModelParams,
    disorder: &DisorderRealization,
    settings: &PropagatorSettings,
) -> Result<FermionEffectiveMatrix> {
    let ham = single_particle_hamiltonian(params, disorder)?;
    let result = FloquetResult::from_hamiltonian(&ham, settings)?;
    Ok(FermionEffectiveMatrix { m: result.heff })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinCoupling {
    /// 1-based sites with `l < l_tilde`.
    pub l: usize,
    pub l_tilde: usize,
    pub magnitude: f64,
    pub phase: f64,
    /// Number of `Z` operators between the two sites.
    pub string_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinCouplingTable {
    pub rows: Vec<SpinCoupling>,
    /// `M_{l,l}`, the `Z`-field on each site.
    pub z_fields: Vec<f64>,
}

impl SpinCouplingTable {
    /// `l, l_tilde, magnitude, phase, string_len`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["l", "l_tilde", "magnitude", "phase", "string_len"])?;
        for r in &self.rows {
            sink.row(&[
                r.l.to_string(),
                r.l_tilde.to_string(),
                fmt_f64(r.magnitude),
                fmt_f64(r.phase),
                r.string_len.to_string(),
            ])?;
        }
        sink.finish()
    }

    /// `l, field`.
    pub fn write_z_fields<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["l", "field"])?;
        for (l, z) in self.z_fields.iter().enumerate() {
            sink.row(&[(l + 1).to_string(), fmt_f64(*z)])?;
        }
        sink.finish()
    }
}

/// One row per nonzero `M_{l,l'}` above the diagonal.
pub fn spin_coupling_report(m: &DMatrix<Complex64>) -> Result<SpinCouplingTable> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("M must be square".into()));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let defect = hermiticity_defect(m);
    if defect > 1e-12 * scale.max(1.0) {
        return Err(Error::tolerance("M hermiticity", defect, 1e-12 * scale.max(1.0)));
    }
    let n = m.nrows();
    let mut rows = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let z = m[(a, b)];
            if z.norm() > 0.0 {
                rows.push(SpinCoupling {
                    l: a + 1,
                    l_tilde: b + 1,
                    magnitude: z.norm(),
                    phase: z.arg(),
                    string_len: b - a - 1,
                });
            }
        }
    }
    let z_fields = (0..n).map(|l| m[(l, l)].re).collect();
    Ok(SpinCouplingTable { rows, z_fields })
}
