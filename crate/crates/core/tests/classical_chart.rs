use std::f64::consts::PI;

use junction_core::classical::*;
use junction_core::model::ModelParams;

fn reference() -> ModelParams {
    ModelParams::reference(1, 1.0)
}

/// Frequency of a small orbit about (M, 0) from the spacing of downward
/// zero crossings of x - M.
fn measured_frequency(amplitude: f64, params: &ModelParams) -> f64 {
    let m = params.domain_size() as f64;
    let dt = 0.01;
    let mut p = PhasePoint::new(m + amplitude, 0.0);
    let mut t = 0.0;
    let mut crossings = Vec::new();
    while crossings.len() < 12 {
        let q = evolve(p, t, t + dt, params, 1e-12).unwrap();
        let (a, b) = (p.x - m, q.x - m);
        if a > 0.0 && b <= 0.0 {
            crossings.push(t + dt * a / (a - b));
        }
        p = q;
        t += dt;
    }
    let span = crossings.last().unwrap() - crossings[0];
    2.0 * PI * (crossings.len() - 1) as f64 / span
}

#[test]
fn small_orbits_oscillate_at_omega0() {
    let p = ModelParams { g1: 0.0, ..reference() };
    let w0 = omega0(&p).unwrap();
    let a1 = measured_frequency(0.02, &p);
    let a2 = measured_frequency(0.04, &p);
    // The leading anharmonic shift is quadratic in the amplitude.
    let extrapolated = (4.0 * a1 - a2) / 3.0;
    assert!((extrapolated - w0).abs() / w0 < 5e-3, "{extrapolated} vs {w0}");
    assert!((a1 - w0).abs() / w0 < 5e-3);
}

#[test]
fn tongues_touch_the_axis_at_resonances() {
    let p = reference();
    let w0 = omega0(&p).unwrap();
    let grid = stability_chart(DEFAULT_CHART_OMEGA, DEFAULT_CHART_G1, &p, DEFAULT_CHART_SIZE).unwrap();
    assert!(grid.max_det_defect < 1e-8, "{}", grid.max_det_defect);
    let d_omega = grid.omega_axis[1] - grid.omega_axis[0];
    for m in [1.0, 2.0] {
        let tip = 2.0 * w0 / m;
        // Lowest row with an unstable point near the predicted tip.
        let near = |i: usize| (grid.omega_axis[i] - tip).abs() < 0.25 * tip;
        let row = (0..grid.g1_axis.len())
            .find(|&j| (0..grid.omega_axis.len()).any(|i| near(i) && !grid.stable[i][j]))
            .expect("no tongue found");
        let unstable: Vec<f64> = (0..grid.omega_axis.len())
            .filter(|&i| near(i) && !grid.stable[i][row])
            .map(|i| grid.omega_axis[i])
            .collect();
        let centre = unstable.iter().sum::<f64>() / unstable.len() as f64;
        assert!((centre - tip).abs() <= 2.0 * d_omega, "m = {m}: centre {centre}, tip {tip}");
        assert!(grid.g1_axis[row] < 0.25, "m = {m}: tongue starts at g1 = {}", grid.g1_axis[row]);
    }
    // g1 = 0 column: stable away from the resonances.
    for (i, &w) in grid.omega_axis.iter().enumerate() {
        let detuned = [1.0, 2.0, 3.0, 4.0].iter().all(|m| (w - 2.0 * w0 / m).abs() > d_omega);
        if detuned {
            assert!(grid.stable[i][0], "omega = {w}");
        }
    }
}

#[test]
fn inset_orbits() {
    let p = reference();
    let m = p.domain_size() as f64;
    let w0 = omega0(&p).unwrap();
    let start = [PhasePoint::new(m + 0.1, 0.05)];
    let stable = poincare_section(&start, 200, &ModelParams { omega: 5.0, ..p.clone() }, SECTION_TOL).unwrap();
    let radius = |q: &PhasePoint| ((q.x - m).powi(2) + q.k.powi(2)).sqrt();
    assert!(stable[0].iter().all(|q| radius(q) < 0.5));
    let unstable = poincare_section(&start, 200, &ModelParams { omega: 2.0 * w0, ..p }, SECTION_TOL).unwrap();
    assert!(unstable[0].iter().any(|q| radius(q) > 1.0));
}
