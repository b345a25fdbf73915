//! Classical limit of the driven lattice: a particle with cosine kinetic
//! energy in a cosine potential, `H(x, k, t) = h cos(2 pi x / M) + 2 g(t) cos k`
//! with `g(t) = g0 + g1 cos(omega t)`.
//!
//! Orbits are integrated with an adaptive Dormand-Prince 5(4) pair; the
//! stability chart integrates the linearization about the fixed point
//! `(M, 0)` with fixed-step RK4 over one drive period.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::output::{fmt_f64, CsvSink};

/// Substeps per period for the monodromy matrix.
pub const MONODROMY_STEPS: usize = 4096;
/// Integrator tolerance used for Poincare sections.
pub const SECTION_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub k: f64,
}

impl PhasePoint {
    pub fn new(x: f64, k: f64) -> Self {
        PhasePoint { x, k }
    }

    /// Folds onto `x in [M/2, 3M/2)`, `k in (-pi, pi]`, centred on the fixed
    /// point `(M, 0)`.
    pub fn wrapped(&self, domain: f64) -> PhasePoint {
        let x = (self.x - 0.5 * domain).rem_euclid(domain) + 0.5 * domain;
        let mut k = self.k.rem_euclid(2.0 * PI);
        if k > PI {
            k -= 2.0 * PI;
        }
        PhasePoint { x, k }
    }
}

fn hopping(t: f64, params: &ModelParams) -> f64 {
    params.g0 + params.g1 * (params.omega * t).cos()
}

/// `(dx/dt, dk/dt) = (dH/dk, -dH/dx)`.
pub fn flow(p: PhasePoint, t: f64, params: &ModelParams) -> (f64, f64) {
    let m = params.domain_size() as f64;
    let dx = -2.0 * hopping(t, params) * p.k.sin();
    let dk = 2.0 * PI * params.h / m * (2.0 * PI * p.x / m).sin();
    (dx, dk)
}

pub fn energy(p: PhasePoint, t: f64, params: &ModelParams) -> f64 {
    let m = params.domain_size() as f64;
    params.h * (2.0 * PI * p.x / m).cos() + 2.0 * hopping(t, params) * p.k.cos()
}

/// Small-oscillation frequency `sqrt(8 pi^2 h g0) / M` about `(M, 0)`.
pub fn omega0(params: &ModelParams) -> Result<f64> {
    if !(params.h > 0.0) {
        return Err(Error::invalid("h", "must be > 0"));
    }
    if !(params.g0 > 0.0) {
        return Err(Error::invalid("g0", "must be > 0"));
    }
    Ok((8.0 * PI * PI * params.h * params.g0).sqrt() / params.domain_size() as f64)
}

/// Adaptive Dormand-Prince 5(4) with the standard step-size controller.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Dopri5 {
            rtol: tol,
            atol: tol,
            max_steps: 1_000_000,
        }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
    pub fn integrate<const N: usize>(
        &self,
        f: impl Fn(f64, &[f64; N]) -> [f64; N],
        t0: f64,
        y0: [f64; N],
        t1: f64,
    ) -> Result<[f64; N]> {
        const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
        const A: [[f64; 6]; 7] = [
            [0.0; 6],
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        // Fifth-order weights minus embedded fourth-order weights.
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];

        let span = t1 - t0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut h = dir * (span.abs() * 1e-3).min(1e-2);
        let mut k = [[0.0; N]; 7];
        k[0] = f(t, &y);
        for _ in 0..self.max_steps {
            if (t1 - t) * dir <= 0.0 {
                return Ok(y);
            }
            let last = (t + h - t1) * dir >= 0.0;
            if last {
                h = t1 - t;
            }
            for s in 1..7 {
                let mut ys = y;
                for (i, v) in ys.iter_mut().enumerate() {
                    for j in 0..s {
                        *v += h * A[s][j] * k[j][i];
                    }
                }
                k[s] = f(t + C[s] * h, &ys);
            }
            let mut y_new = y;
            for (i, v) in y_new.iter_mut().enumerate() {
                for j in 0..6 {
                    *v += h * A[6][j] * k[j][i];
                }
            }
            let mut err = 0.0;
            for i in 0..N {
                let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integrator(format!("non-finite error estimate at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y = y_new;
                // First-same-as-last: stage 7 is f at the accepted point.
                k[0] = k[6];
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if err <= 1.0 { factor } else { factor.min(1.0) };
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integrator(format!("step size underflow at t = {t}")));
            }
        }
        Err(Error::Integrator(format!("step limit reached before t = {t1}")))
    }
}

/// Integrates a single trajectory, returning the unwrapped end point.
pub fn evolve(p: PhasePoint, t0: f64, t1: f64, params: &ModelParams, tol: f64) -> Result<PhasePoint> {
    let y = Dopri5::new(tol).integrate(
        |t, y: &[f64; 2]| {
            let (dx, dk) = flow(PhasePoint::new(y[0], y[1]), t, params);
            [dx, dk]
        },
        t0,
        [p.x, p.k],
        t1,
    )?;
    Ok(PhasePoint::new(y[0], y[1]))
}

/// Stroboscopic samples at `t_n = n T`, `n = 0..=n_periods`, wrapped.
pub fn poincare_section(
    initial: &[PhasePoint],
    n_periods: usize,
    params: &ModelParams,
    tol: f64,
) -> Result<Vec<Vec<PhasePoint>>> {
    if n_periods == 0 {
        return Err(Error::invalid("n_periods", "must be >= 1"));
    }
    let period = params.period();
    let m = params.domain_size() as f64;
    initial
        .par_iter()
        .enumerate()
        .map(|(orbit, &p0)| {
            let mut out = Vec::with_capacity(n_periods + 1);
            let mut p = p0;
            out.push(p.wrapped(m));
            for n in 0..n_periods {
                p = evolve(p, n as f64 * period, (n + 1) as f64 * period, params, tol).map_err(|e| {
                    Error::Integrator(format!("orbit {} from ({}, {}): {e}", orbit + 1, p0.x, p0.k))
                })?;
                out.push(p.wrapped(m));
            }
            Ok(out)
        })
        .collect()
}

/// `orbit_id, n, x, k`.
pub fn write_poincare<W: Write>(orbits: &[Vec<PhasePoint>], writer: W) -> Result<()> {
    let mut sink = CsvSink::new(writer, &["orbit_id", "n", "x", "k"])?;
    for (id, orbit) in orbits.iter().enumerate() {
        for (n, p) in orbit.iter().enumerate() {
            sink.row(&[(id + 1).to_string(), n.to_string(), fmt_f64(p.x), fmt_f64(p.k)])?;
        }
    }
    sink.finish()
}

/// One-period monodromy matrix of the linearization about `(M, 0)`:
/// `d(dx)/dt = -2 g(t) dk`, `d(dk)/dt = (4 pi^2 h / M^2) dx`.
pub fn monodromy(params: &ModelParams, steps: usize) -> Matrix2<f64> {
    let m = params.domain_size() as f64;
    let stiffness = 4.0 * PI * PI * params.h / (m * m);
    let generator = |t: f64| Matrix2::new(0.0, -2.0 * hopping(t, params), stiffness, 0.0);
    let dt = params.period() / steps as f64;
    let mut y = Matrix2::identity();
    for s in 0..steps {
        let t = s as f64 * dt;
        let k1 = generator(t) * y;
        let k2 = generator(t + 0.5 * dt) * (y + k1 * (0.5 * dt));
        let k3 = generator(t + 0.5 * dt) * (y + k2 * (0.5 * dt));
        let k4 = generator(t + dt) * (y + k3 * dt);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    y
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityGrid {
    pub omega_axis: Vec<f64>,
    pub g1_axis: Vec<f64>,
    /// `trace[i][j]` at `(omega_axis[i], g1_axis[j])`.
    pub trace: Vec<Vec<f64>>,
    pub stable: Vec<Vec<bool>>,
    /// Largest `|det - 1|` over the grid.
    pub max_det_defect: f64,
}

impl StabilityGrid {
    /// `omega, g1, trace, stable`, omega-major.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["omega", "g1", "trace", "stable"])?;
        for (i, &w) in self.omega_axis.iter().enumerate() {
            for (j, &g) in self.g1_axis.iter().enumerate() {
                sink.row(&[
                    fmt_f64(w),
                    fmt_f64(g),
                    fmt_f64(self.trace[i][j]),
                    (self.stable[i][j] as u8).to_string(),
                ])?;
            }
        }
        sink.finish()
    }
}

pub const DEFAULT_CHART_OMEGA: (f64, f64) = (0.5, 6.0);
pub const DEFAULT_CHART_G1: (f64, f64) = (0.0, 1.0);
pub const DEFAULT_CHART_SIZE: (usize, usize) = (300, 200);

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Monodromy trace over an `(omega, g1)` grid; `|trace| <= 2` is stable.
pub fn stability_chart(
    omega_range: (f64, f64),
    g1_range: (f64, f64),
    params: &ModelParams,
    size: (usize, usize),
) -> Result<StabilityGrid> {
    if !(omega_range.0 > 0.0 && omega_range.1 >= omega_range.0) {
        return Err(Error::invalid("omega range", "need 0 < omega_min <= omega_max"));
    }
    if !(g1_range.0 >= 0.0 && g1_range.1 >= g1_range.0) {
        return Err(Error::invalid("g1 range", "need 0 <= g1_min <= g1_max"));
    }
    if size.0 == 0 || size.1 == 0 {
        return Err(Error::invalid("grid size", "need at least one point per axis"));
    }
    omega0(params)?;
    let omega_axis = axis(omega_range, size.0);
    let g1_axis = axis(g1_range, size.1);
    let rows: Vec<(Vec<f64>, f64)> = omega_axis
        .par_iter()
        .map(|&w| {
            let mut traces = Vec::with_capacity(g1_axis.len());
            let mut worst: f64 = 0.0;
            for &g in &g1_axis {
                let p = ModelParams {
                    omega: w,
                    g1: g,
                    ..params.clone()
                };
                let mono = monodromy(&p, MONODROMY_STEPS);
                worst = worst.max((mono.determinant() - 1.0).abs());
                traces.push(mono.trace());
            }
            (traces, worst)
        })
        .collect();
    let max_det_defect = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let trace: Vec<Vec<f64>> = rows.into_iter().map(|r| r.0).collect();
    let stable = trace
        .iter()
        .map(|row| row.iter().map(|t| t.abs() <= 2.0).collect())
        .collect();
    Ok(StabilityGrid {
        omega_axis,
        g1_axis,
        trace,
        stable,
        max_det_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g1: f64, omega: f64) -> ModelParams {
        ModelParams {
            g1,
            omega,
            ..ModelParams::reference(1, 1.0)
        }
    }

    #[test]
    fn fixed_point_and_simple_flow() {
        let p = params(0.9, 2.0);
        for t in [0.0, 0.3, 1.7] {
            let (dx, dk) = flow(PhasePoint::new(6.0, 0.0), t, &p);
            assert!(dx.abs() < 1e-15 && dk.abs() < 1e-15);
        }
        let (dx, _) = flow(PhasePoint::new(1.3, PI / 2.0), 0.4, &params(0.0, 2.0));
        assert!((dx + 2.0).abs() < 1e-15);
        let orbit = poincare_section(&[PhasePoint::new(6.0, 0.0)], 5, &p, SECTION_TOL).unwrap();
        assert!(orbit[0].iter().all(|q| (q.x - 6.0).abs() < 1e-12 && q.k.abs() < 1e-12));
    }

    #[test]
    fn linearization_by_finite_differences() {
        let p = params(0.4, 2.3);
        let t = 0.7;
        let eps = 1e-6;
        let (_, dk_dx) = flow(PhasePoint::new(6.0 + eps, 0.0), t, &p);
        let (dx_dk, _) = flow(PhasePoint::new(6.0, eps), t, &p);
        let g = p.g0 + p.g1 * (p.omega * t).cos();
        assert!((dx_dk / eps + 2.0 * g).abs() < 1e-6);
        assert!((dk_dx / eps - 4.0 * PI * PI / 36.0).abs() < 1e-6);
        // Second-order form: x'' = -(8 pi^2 h g / M^2) x at frozen t.
        let frozen = -(dx_dk / eps) * (dk_dx / eps);
        assert!((frozen - 8.0 * PI * PI * p.h * g / 36.0).abs() < 1e-5);
    }

    #[test]
    fn small_oscillation_frequency() {
        let p = ModelParams::reference(1, 1.0);
        let w0 = omega0(&p).unwrap();
        assert!((w0 - 1.4810).abs() < 5e-5, "{w0}");
        assert!((2.0 * w0 - 2.9619).abs() < 5e-5);
        let wide = ModelParams {
            sites: 24,
            ..p.clone()
        };
        assert!((omega0(&wide).unwrap() - 0.5 * w0).abs() < 1e-15);
        assert!(omega0(&ModelParams { h: 0.0, ..p }).is_err());
    }

    #[test]
    fn wrapping_window() {
        let w = PhasePoint::new(6.0 + 12.5, 3.0 * PI).wrapped(6.0);
        assert!((w.x - 6.5).abs() < 1e-12);
        assert!((w.k - PI).abs() < 1e-12);
        let w = PhasePoint::new(3.0, -PI).wrapped(6.0);
        assert_eq!(w.x, 3.0);
        assert!((w.k - PI).abs() < 1e-12);
    }

    #[test]
    fn energy_is_conserved_without_drive() {
        let p = params(0.0, 2.0 * omega0(&ModelParams::reference(1, 1.0)).unwrap());
        let start = PhasePoint::new(4.2, 0.9);
        let e0 = energy(start, 0.0, &p);
        let orbit = poincare_section(&[start], 100, &p, SECTION_TOL).unwrap();
        for q in &orbit[0] {
            assert!((energy(*q, 0.0, &p) - e0).abs() <= 1e-8 * e0.abs(), "{:?}", q);
        }
    }

    #[test]
    fn forward_then_backward_returns() {
        let p = params(0.9, 2.5);
        let start = PhasePoint::new(5.3, 0.7);
        let t = p.period();
        let there = evolve(start, 0.0, t, &p, 1e-12).unwrap();
        let back = evolve(there, t, 0.0, &p, 1e-12).unwrap();
        assert!((back.x - start.x).abs() < 1e-8 && (back.k - start.k).abs() < 1e-8);
    }

    #[test]
    fn harmonic_monodromy_without_drive() {
        let p = params(0.0, 2.2);
        let w0 = omega0(&p).unwrap();
        let tr = monodromy(&p, MONODROMY_STEPS).trace();
        assert!((tr - 2.0 * (w0 * p.period()).cos()).abs() < 1e-10);
    }

    #[test]
    fn inset_points_at_reference() {
        let w0 = omega0(&ModelParams::reference(1, 1.0)).unwrap();
        let stable = monodromy(&params(0.9, 5.0), MONODROMY_STEPS);
        let unstable = monodromy(&params(0.9, 2.0 * w0), MONODROMY_STEPS);
        assert!(stable.trace().abs() <= 2.0);
        assert!(unstable.trace().abs() > 2.0);
        for m in [stable, unstable] {
            assert!((m.determinant() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn chart_orientation_and_csv() {
        let p = ModelParams::reference(1, 1.0);
        let grid = stability_chart((1.0, 5.0), (0.0, 0.9), &p, (5, 4)).unwrap();
        assert_eq!(grid.trace.len(), 5);
        assert_eq!(grid.trace[0].len(), 4);
        assert_eq!(grid.g1_axis[3], 0.9);
        assert!(grid.max_det_defect < 1e-8);
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2 + 20);
        assert!(stability_chart((0.0, 1.0), (0.0, 1.0), &p, (2, 2)).is_err());
    }
}
