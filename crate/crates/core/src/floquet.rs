//! One-period propagator, quasienergies, Floquet modes and the effective
//! Hamiltonian obtained from the principal logarithm.
//!
//! The propagator is a product of exponentials of the Hamiltonian frozen at
//! each substep midpoint. Each exponential is applied as a Taylor series of
//! the sparse Hamiltonian, summed until the terms drop below machine
//! precision, and the product is carried in split real/imaginary form.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::FockBasis;
use crate::error::{Error, Result};
use crate::linalg::{
    conjugate_diagonal, hermitian_part, hermiticity_defect, max_abs, max_abs_diff,
    unitarity_defect, SplitMatrix,
};
use crate::model::{DisorderRealization, DrivenHamiltonian, ModelParams};
use crate::output::{fmt_f64, CsvSink};

/// Eigenphases closer than this to `-pi` are mapped to `+pi`.
const BRANCH_CUT_GUARD: f64 = 1e-12;
/// Eigenphase gap below which Floquet modes are treated as degenerate.
const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSettings {
    /// Midpoint substeps per drive period (`K`).
    pub steps_per_period: usize,
    pub unitarity_tol: f64,
    pub convergence_tol: f64,
}

impl Default for PropagatorSettings {
    fn default() -> Self {
        PropagatorSettings {
            steps_per_period: 256,
            unitarity_tol: 1e-10,
            convergence_tol: 1e-4,
        }
    }
}

impl PropagatorSettings {
    pub fn validate(&self) -> Result<()> {
        let k = self.steps_per_period;
        if k < 8 || !k.is_multiple_of(2) {
            return Err(Error::invalid(
                "steps_per_period",
                format!("must be even and >= 8, got {k}"),
            ));
        }
        if !(self.unitarity_tol > 0.0) {
            return Err(Error::invalid("unitarity_tol", "must be > 0"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::invalid("convergence_tol", "must be > 0"));
        }
        Ok(())
    }
}

/// `H(t)` in compressed-row form: one sparsity pattern shared by the static
/// and driven parts.
struct SparseDriven {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    static_vals: Vec<f64>,
    drive_vals: Vec<f64>,
    omega: f64,
}

impl SparseDriven {
    fn new(ham: &DrivenHamiltonian) -> Self {
        let n = ham.dim();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut static_vals = Vec::new();
        let mut drive_vals = Vec::new();
        row_start.push(0);
        for r in 0..n {
            for c in 0..n {
                let (s, d) = (ham.static_part[(r, c)], ham.drive_part[(r, c)]);
                if s != 0.0 || d != 0.0 {
                    cols.push(c);
                    static_vals.push(s);
                    drive_vals.push(d);
                }
            }
            row_start.push(cols.len());
        }
        SparseDriven {
            row_start,
            cols,
            static_vals,
            drive_vals,
            omega: ham.omega,
        }
    }

    fn values_at(&self, t: f64) -> Vec<f64> {
        let c = (self.omega * t).cos();
        self.static_vals
            .iter()
            .zip(&self.drive_vals)
            .map(|(s, d)| s + c * d)
            .collect()
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    fn row_norm(&self, vals: &[f64]) -> f64 {
        self.row_start
            .windows(2)
            .map(|w| vals[w[0]..w[1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `out = scale * y * H` for `y` stored column-major with `m` rows.
    /// Column `r` of the product is a sum of columns of `y`, which keeps the
    /// inner loop contiguous.
    fn right_mul(&self, vals: &[f64], y: &[f64], m: usize, scale: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (r, w) in self.row_start.windows(2).enumerate() {
            let dst = &mut out[r * m..(r + 1) * m];
            for k in w[0]..w[1] {
                let v = scale * vals[k];
                let src = &y[self.cols[k] * m..(self.cols[k] + 1) * m];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        }
    }
}

/// Right-multiplies `y` by `exp(-i H dt)`, which is complex symmetric, by a
/// Taylor series summed to machine precision. Steps with `||H dt|| > 1/2`
/// are subdivided so that the series never cancels badly.
fn taylor_step(op: &SparseDriven, vals: &[f64], dt: f64, y: &mut SplitMatrix) {
    let m = y.nrows();
    let len = y.re.len();
    let pieces = ((op.row_norm(vals) * dt.abs() / 0.5).ceil() as usize).max(1);
    let h = dt / pieces as f64;
    let mut tr = vec![0.0; len];
    let mut ti = vec![0.0; len];
    let mut nr = vec![0.0; len];
    let mut ni = vec![0.0; len];
    for _ in 0..pieces {
        tr.copy_from_slice(y.re.as_slice());
        ti.copy_from_slice(y.im.as_slice());
        let scale = y.re.amax().max(y.im.amax());
        for k in 1..=TAYLOR_MAX_TERMS {
            // (-i h / k) (tr + i ti) H = (h/k) ti H - i (h/k) tr H
            let c = h / k as f64;
            op.right_mul(vals, &ti, m, c, &mut nr);
            op.right_mul(vals, &tr, m, -c, &mut ni);
            std::mem::swap(&mut tr, &mut nr);
            std::mem::swap(&mut ti, &mut ni);
            let mut largest: f64 = 0.0;
            for ((a, b), (x, z)) in y
                .re
                .as_mut_slice()
                .iter_mut()
                .zip(y.im.as_mut_slice().iter_mut())
                .zip(tr.iter().zip(&ti))
            {
                *a += x;
                *b += z;
                largest = largest.max(x.abs()).max(z.abs());
            }
            if largest <= f64::EPSILON * 1e-2 * scale {
                break;
            }
        }
    }
}

const TAYLOR_MAX_TERMS: usize = 64;

/// Applies the midpoint product over `[t0, t1]` in `steps` substeps to the
/// columns of `state`.
pub(crate) fn propagate(
    ham: &DrivenHamiltonian,
    t0: f64,
    t1: f64,
    steps: usize,
    state: SplitMatrix,
) -> SplitMatrix {
    // Work on the transpose: U <- E U becomes U^T <- U^T E since E = E^T.
    let mut y = SplitMatrix {
        re: state.re.transpose(),
        im: state.im.transpose(),
    };
    let op = SparseDriven::new(ham);
    let dt = (t1 - t0) / steps as f64;
    let static_vals = ham.is_static().then(|| op.values_at(0.0));
    for k in 0..steps {
        match &static_vals {
            Some(vals) => taylor_step(&op, vals, dt, &mut y),
            None => {
                let t_mid = t0 + (k as f64 + 0.5) * dt;
                taylor_step(&op, &op.values_at(t_mid), dt, &mut y);
            }
        }
    }
    SplitMatrix {
        re: y.re.transpose(),
        im: y.im.transpose(),
    }
}

/// One-period propagator `F = U(T)` for an assembled Hamiltonian.
///
/// The drive enters through `cos(omega t)`, so the midpoint Hamiltonians of
/// substeps `k` and `K-1-k` coincide and each substep is complex symmetric.
/// The second half-period product is therefore the transpose of the first:
/// `F = F_half^T F_half`.
pub fn floquet_operator_for(
    ham: &DrivenHamiltonian,
    settings: &PropagatorSettings,
) -> Result<DMatrix<Complex64>> {
    settings.validate()?;
    let k = settings.steps_per_period;
    let period = ham.period();
    let dt = period / k as f64;
    let half = propagate(ham, 0.0, 0.5 * period, k / 2, SplitMatrix::identity(ham.dim()));
    debug_assert!((0.5 * period - (k / 2) as f64 * dt).abs() < 1e-12 * period);
    let f = half.transpose_mul(&half).to_complex();
    let defect = unitarity_defect(&f);
    if defect > settings.unitarity_tol {
        return Err(Error::tolerance("Floquet operator unitarity defect", defect, settings.unitarity_tol));
    }
    Ok(f)
}

pub fn floquet_operator(
    params: &ModelParams,
    disorder: &DisorderRealization,
    settings: &PropagatorSettings,
) -> Result<DMatrix<Complex64>> {
    let basis = FockBasis::enumerate(params.particles, params.sites)?;
    let ham = DrivenHamiltonian::assemble(&basis, params, disorder)?;
    floquet_operator_for(&ham, settings)
}

/// Evolves `psi0` from `t0` to `t1` with `K` substeps per period, and again
/// with `2K`; fails when the two differ by more than `convergence_tol`.
/// Returns the finer result.
pub fn evolve_state_for(
    ham: &DrivenHamiltonian,
    psi0: &DVector<Complex64>,
    t0: f64,
    t1: f64,
    settings: &PropagatorSettings,
) -> Result<DVector<Complex64>> {
    settings.validate()?;
    if !(t1 > t0) {
        return Err(Error::invalid("t1", format!("must exceed t0 = {t0}, got {t1}")));
    }
    if psi0.len() != ham.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} amplitudes, basis has {}",
            psi0.len(),
            ham.dim()
        )));
    }
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > 1e-12 {
        log::warn!("initial state is not normalized (norm = {norm0})");
    }
    let periods = (t1 - t0) / ham.period();
    let steps = ((periods * settings.steps_per_period as f64).ceil() as usize).max(2);
    let init = SplitMatrix {
        re: DMatrix::from_iterator(psi0.len(), 1, psi0.iter().map(|z| z.re)),
        im: DMatrix::from_iterator(psi0.len(), 1, psi0.iter().map(|z| z.im)),
    };
    let coarse = propagate(ham, t0, t1, steps, init.clone()).to_complex();
    let fine = propagate(ham, t0, t1, 2 * steps, init).to_complex();
    let gap = max_abs_diff(&coarse, &fine);
    if gap > settings.convergence_tol {
        return Err(Error::tolerance("step-halving difference", gap, settings.convergence_tol));
    }
    let out = DVector::from_iterator(fine.nrows(), fine.iter().copied());
    let drift = (out.norm() - norm0).abs();
    if drift > settings.unitarity_tol {
        return Err(Error::tolerance("norm drift", drift, settings.unitarity_tol));
    }
    Ok(out)
}

pub fn evolve_state(
    psi0: &DVector<Complex64>,
    t0: f64,
    t1: f64,
    params: &ModelParams,
    disorder: &DisorderRealization,
    settings: &PropagatorSettings,
) -> Result<DVector<Complex64>> {
    let basis = FockBasis::enumerate(params.particles, params.sites)?;
    let ham = DrivenHamiltonian::assemble(&basis, params, disorder)?;
    evolve_state_for(&ham, psi0, t0, t1, settings)
}

/// Quasienergies in ascending order with the matching Floquet modes as
/// columns of `modes`.
#[derive(Debug, Clone)]
pub struct QuasienergySpectrum {
    pub quasienergies: Vec<f64>,
    pub modes: DMatrix<Complex64>,
    pub omega: f64,
}

impl QuasienergySpectrum {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Eigenphase `theta = -arg(lambda)` in `(-pi, pi]` for `lambda = exp(-i theta)`.
fn eigenphase(lambda: Complex64) -> f64 {
    let theta = -lambda.arg();
    if theta <= -PI + BRANCH_CUT_GUARD {
        PI
    } else {
        theta
    }
}

/// Diagonalizes a unitary `F` through its complex Schur form. For a normal
/// matrix the Schur vectors are an orthonormal eigenbasis, including inside
/// degenerate subspaces.
pub fn quasienergy_spectrum(
    f: &DMatrix<Complex64>,
    omega: f64,
    unitarity_tol: f64,
) -> Result<QuasienergySpectrum> {
    if !f.is_square() {
        return Err(Error::DimensionMismatch("Floquet operator must be square".into()));
    }
    let defect = unitarity_defect(f);
    if defect > unitarity_tol {
        return Err(Error::tolerance("input unitarity defect", defect, unitarity_tol));
    }
    let n = f.nrows();
    let period = 2.0 * PI / omega;
    let (q, t) = Schur::new(f.clone()).unpack();
    let mut order: Vec<(f64, usize)> = (0..n).map(|i| (eigenphase(t[(i, i)]), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut modes = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &(_, src)) in order.iter().enumerate() {
        modes.set_column(dst, &q.column(src));
    }
    let phases: Vec<f64> = order.iter().map(|&(theta, _)| theta).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && phases[end] - phases[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            orthonormalize_columns(&mut modes, start, end);
        }
        start = end;
    }
    Ok(QuasienergySpectrum {
        quasienergies: phases.iter().map(|theta| theta / period).collect(),
        modes,
        omega,
    })
}

/// Modified Gram-Schmidt on columns `start..end`.
fn orthonormalize_columns(m: &mut DMatrix<Complex64>, start: usize, end: usize) {
    for j in start..end {
        for i in start..j {
            let proj = m.column(i).dotc(&m.column(j));
            let ci = m.column(i).clone_owned();
            m.column_mut(j).axpy(-proj, &ci, Complex64::new(1.0, 0.0));
        }
        let norm = m.column(j).norm();
        m.column_mut(j).unscale_mut(norm);
    }
}

/// `H_eff = modes diag(eps) modes^dagger`, symmetrized.
pub fn effective_hamiltonian_from(spectrum: &QuasienergySpectrum) -> DMatrix<Complex64> {
    let d: Vec<Complex64> = spectrum
        .quasienergies
        .iter()
        .map(|&e| Complex64::new(e, 0.0))
        .collect();
    hermitian_part(&conjugate_diagonal(&spectrum.modes, &d))
}

pub fn effective_hamiltonian(
    f: &DMatrix<Complex64>,
    omega: f64,
    unitarity_tol: f64,
) -> Result<DMatrix<Complex64>> {
    Ok(effective_hamiltonian_from(&quasienergy_spectrum(f, omega, unitarity_tol)?))
}

/// `exp(-i H_eff T)` evaluated in the Floquet eigenbasis.
pub fn reconstruct_floquet(spectrum: &QuasienergySpectrum) -> DMatrix<Complex64> {
    let period = spectrum.period();
    let d: Vec<Complex64> = spectrum
        .quasienergies
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -e * period))
        .collect();
    conjugate_diagonal(&spectrum.modes, &d)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FloquetAudit {
    pub unitarity: f64,
    pub reconstruction: f64,
    pub mode_orthonormality: f64,
    /// `max |H - H^dagger| / max |H|`.
    pub hermiticity: f64,
    pub zone_ok: bool,
}

#[derive(Debug, Clone)]
pub struct FloquetResult {
    pub floquet: DMatrix<Complex64>,
    pub quasienergies: Vec<f64>,
    pub modes: DMatrix<Complex64>,
    pub heff: DMatrix<Complex64>,
    pub omega: f64,
    pub audit: FloquetAudit,
}

impl FloquetResult {
    /// Full pipeline for one realization; fails if any audit is violated.
    pub fn compute(
        basis: &FockBasis,
        params: &ModelParams,
        disorder: &DisorderRealization,
        settings: &PropagatorSettings,
    ) -> Result<Self> {
        let ham = DrivenHamiltonian::assemble(basis, params, disorder)?;
        Self::from_hamiltonian(&ham, settings)
    }

    pub fn from_hamiltonian(ham: &DrivenHamiltonian, settings: &PropagatorSettings) -> Result<Self> {
        let f = floquet_operator_for(ham, settings)?;
        Self::from_operator(f, ham.omega, settings)
    }

    pub fn from_operator(
        f: DMatrix<Complex64>,
        omega: f64,
        settings: &PropagatorSettings,
    ) -> Result<Self> {
        let spectrum = quasienergy_spectrum(&f, omega, settings.unitarity_tol)?;
        let heff = effective_hamiltonian_from(&spectrum);
        let half_zone = 0.5 * omega;
        let audit = FloquetAudit {
            unitarity: unitarity_defect(&f),
            reconstruction: max_abs_diff(&reconstruct_floquet(&spectrum), &f),
            mode_orthonormality: unitarity_defect(&spectrum.modes),
            hermiticity: {
                let scale = max_abs(&heff);
                if scale > 0.0 {
                    hermiticity_defect(&heff) / scale
                } else {
                    0.0
                }
            },
            zone_ok: spectrum
                .quasienergies
                .iter()
                .all(|&e| e > -half_zone && e <= half_zone),
        };
        let tol = settings.unitarity_tol;
        if audit.reconstruction > tol {
            return Err(Error::tolerance("||exp(-i H_eff T) - F||_max", audit.reconstruction, tol));
        }
        if audit.mode_orthonormality > tol {
            return Err(Error::tolerance("Floquet mode orthonormality", audit.mode_orthonormality, tol));
        }
        if audit.hermiticity > 1e-12 {
            return Err(Error::tolerance("H_eff hermiticity", audit.hermiticity, 1e-12));
        }
        if !audit.zone_ok {
            return Err(Error::tolerance("quasienergy outside (-omega/2, omega/2]", 1.0, 0.0));
        }
        Ok(FloquetResult {
            floquet: f,
            quasienergies: spectrum.quasienergies,
            modes: spectrum.modes,
            heff,
            omega,
            audit,
        })
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn dim(&self) -> usize {
        self.quasienergies.len()
    }

    /// `mu, eps` with 1-based `mu`.
    pub fn write_quasienergies<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["mu", "eps"])?;
        for (mu, e) in self.quasienergies.iter().enumerate() {
            sink.row(&[(mu + 1).to_string(), fmt_f64(*e)])?;
        }
        sink.finish()
    }

    /// `mu, l, re, im, abs2` with `c_{mu,l} = <l|Phi_mu>`.
    pub fn write_modes<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["mu", "l", "re", "im", "abs2"])?;
        for (mu, col) in self.modes.column_iter().enumerate() {
            for (l, c) in col.iter().enumerate() {
                sink.row(&[
                    (mu + 1).to_string(),
                    (l + 1).to_string(),
                    fmt_f64(c.re),
                    fmt_f64(c.im),
                    fmt_f64(c.norm_sqr()),
                ])?;
            }
        }
        sink.finish()
    }

    /// `l, l_tilde, re, im` for every entry of `H_eff`.
    pub fn write_heff<W: Write>(&self, writer: W) -> Result<()> {
        write_complex_matrix(&self.heff, writer)
    }
}

pub(crate) fn write_complex_matrix<W: Write>(m: &DMatrix<Complex64>, writer: W) -> Result<()> {
    let mut sink = CsvSink::new(writer, &["l", "l_tilde", "re", "im"])?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            sink.row(&[(r + 1).to_string(), (c + 1).to_string(), fmt_f64(z.re), fmt_f64(z.im)])?;
        }
    }
    sink.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn zero_params(particles: u32, sites: usize) -> ModelParams {
        ModelParams {
            sites,
            particles,
            h: 0.0,
            g0: 0.0,
            g1: 0.0,
            u: 0.0,
            omega: 2.0,
            w: 0.0,
        }
    }

    #[test]
    fn settings_validation() {
        assert!(PropagatorSettings::default().validate().is_ok());
        let odd = PropagatorSettings {
            steps_per_period: 9,
            ..Default::default()
        };
        assert!(odd.validate().is_err());
        let small = PropagatorSettings {
            steps_per_period: 4,
            ..Default::default()
        };
        assert!(small.validate().is_err());
    }

    #[test]
    fn vanishing_hamiltonian_gives_identity() {
        let p = zero_params(2, 6);
        let d = DisorderRealization::clean(3);
        let f = floquet_operator(&p, &d, &PropagatorSettings::default()).unwrap();
        let n = f.nrows();
        assert!(max_abs_diff(&f, &DMatrix::identity(n, n)) < 1e-15);

        let res = FloquetResult::from_operator(f, p.omega, &PropagatorSettings::default()).unwrap();
        assert!(res.quasienergies.iter().all(|&e| e == 0.0));
        assert!(max_abs(&res.heff) < 1e-15);

        let mut psi = DVector::<Complex64>::zeros(n);
        psi[3] = Complex64::new(0.6, 0.0);
        psi[5] = Complex64::new(0.0, 0.8);
        let out = evolve_state(&psi, 0.0, 1.7, &p, &d, &PropagatorSettings::default()).unwrap();
        assert!((out - psi).camax() < 1e-15);
    }

    #[test]
    fn identity_spectrum_keeps_identity_modes() {
        let f = DMatrix::<Complex64>::identity(5, 5);
        let s = quasienergy_spectrum(&f, 1.0, 1e-12).unwrap();
        assert!(s.quasienergies.iter().all(|&e| e == 0.0));
        assert!(max_abs_diff(&s.modes.map(|z| Complex64::new(z.norm(), 0.0)), &f) < 1e-14);
    }

    #[test]
    fn zone_folding_of_a_constant_generator() {
        let omega = 1.3;
        let period = 2.0 * PI / omega;
        let energies = [0.6 * omega, 0.2 * omega, -0.45 * omega];
        let f = DMatrix::from_diagonal(&DVector::from_iterator(
            3,
            energies.iter().map(|&e| Complex64::from_polar(1.0, -e * period)),
        ));
        let s = quasienergy_spectrum(&f, omega, 1e-12).unwrap();
        assert_relative_eq!(s.quasienergies[0], -0.45 * omega, epsilon = 1e-12);
        assert_relative_eq!(s.quasienergies[1], -0.4 * omega, epsilon = 1e-12);
        assert_relative_eq!(s.quasienergies[2], 0.2 * omega, epsilon = 1e-12);
    }

    #[test]
    fn branch_cut_maps_to_upper_zone_edge() {
        assert_eq!(eigenphase(Complex64::new(-1.0, 0.0)), PI);
        assert_eq!(eigenphase(Complex64::new(-1.0, -0.0)), PI);
        assert!(eigenphase(Complex64::from_polar(1.0, 3.0)) > -PI);
    }

    #[test]
    fn non_unitary_input_rejected() {
        let mut f = DMatrix::<Complex64>::identity(3, 3);
        f[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(quasienergy_spectrum(&f, 1.0, 1e-10).is_err());
    }

    #[test]
    fn degenerate_modes_stay_orthonormal() {
        // Rotation of a two-fold degenerate pair plus one isolated level.
        let c = 0.5f64.sqrt();
        let u = DMatrix::from_row_slice(3, 3, &[c, c, 0.0, -c, c, 0.0, 0.0, 0.0, 1.0])
            .map(|x| Complex64::new(x, 0.0));
        let d = [Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, -1.0)];
        let f = conjugate_diagonal(&u, &d);
        let s = quasienergy_spectrum(&f, 1.0, 1e-12).unwrap();
        assert!(unitarity_defect(&s.modes) < 1e-13);
        assert!(max_abs_diff(&reconstruct_floquet(&s), &f) < 1e-13);
    }

    #[test]
    fn half_period_symmetry_matches_direct_stepping() {
        let p = ModelParams::reference(2, 1.0);
        let p = ModelParams { sites: 8, ..p };
        let d = DisorderRealization::draw(11, p.w, 4);
        let basis = FockBasis::enumerate(2, 8).unwrap();
        let ham = DrivenHamiltonian::assemble(&basis, &p, &d).unwrap();
        let settings = PropagatorSettings {
            steps_per_period: 64,
            ..Default::default()
        };
        let fast = floquet_operator_for(&ham, &settings).unwrap();
        let direct = propagate(&ham, 0.0, p.period(), 64, SplitMatrix::identity(basis.len())).to_complex();
        assert!(max_abs_diff(&fast, &direct) < 1e-12);
    }

    #[test]
    fn csv_outputs() {
        let p = ModelParams::reference(1, 1.0);
        let d = DisorderRealization::draw(1, 1.0, 6);
        let basis = FockBasis::enumerate(1, 12).unwrap();
        let res = FloquetResult::compute(&basis, &p, &d, &PropagatorSettings::default()).unwrap();
        let mut q = Vec::new();
        res.write_quasienergies(&mut q).unwrap();
        assert_eq!(String::from_utf8(q).unwrap().lines().count(), 2 + 12);
        let mut m = Vec::new();
        res.write_modes(&mut m).unwrap();
        assert_eq!(String::from_utf8(m).unwrap().lines().count(), 2 + 144);
        let mut h = Vec::new();
        res.write_heff(&mut h).unwrap();
        assert_eq!(String::from_utf8(h).unwrap().lines().count(), 2 + 144);
    }
}
