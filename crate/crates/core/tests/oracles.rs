//! Independent constructions checked against the library: Kronecker-product
//! operators on a truncated Fock space, the dense matrix exponential for
//! static Hamiltonians, and step-halving convergence.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use junction_core::basis::{FockBasis, OccupationVector};
use junction_core::floquet::*;
use junction_core::linalg::max_abs_diff;
use junction_core::model::*;
use junction_core::spectroscopy::{DirectSumState, Observable};

const LOCAL: usize = 3;

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// `op` acting on `site` of `sites`, local dimension 3.
fn embed(op: &DMatrix<f64>, site: usize, sites: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(LOCAL, LOCAL);
    let mut out = DMatrix::<f64>::identity(1, 1);
    for j in 0..sites {
        out = kron(&out, if j == site { op } else { &id });
    }
    out
}

fn lowering() -> DMatrix<f64> {
    let mut a = DMatrix::zeros(LOCAL, LOCAL);
    for n in 1..LOCAL {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

/// Row of the product space for an occupation vector (site 1 most significant).
fn product_index(v: &OccupationVector) -> usize {
    v.as_slice().iter().fold(0, |acc, &n| acc * LOCAL + n as usize)
}

#[test]
fn hamiltonian_matches_kronecker_construction() {
    let params = ModelParams {
        sites: 4,
        particles: 2,
        h: 0.7,
        g0: 1.1,
        g1: 0.45,
        u: 3.5,
        omega: 2.3,
        w: 1.5,
    };
    let disorder = DisorderRealization::draw(17, params.w, 2);
    let basis = FockBasis::enumerate(2, 4).unwrap();
    let onsite = onsite_profile(&params, &disorder);
    let a = lowering();
    let n_op = a.transpose() * &a;
    for t in [0.0, 0.4, 1.9] {
        let dim = LOCAL.pow(4);
        let mut full = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..4 {
            let nj = embed(&n_op, j, 4);
            let id = DMatrix::<f64>::identity(dim, dim);
            full += &nj * onsite[j] + (&nj * (&nj - &id)) * (0.5 * params.u);
        }
        for b in 0..3 {
            let g = coupling_at(b + 1, t, &params).unwrap();
            let hop = embed(&a.transpose(), b, 4) * embed(&a, b + 1, 4);
            full += (&hop + hop.transpose()) * g;
        }
        let idx: Vec<usize> = basis.states().iter().map(product_index).collect();
        let projected = DMatrix::from_fn(basis.len(), basis.len(), |r, c| full[(idx[r], idx[c])]);
        let built = hamiltonian_matrix(t, &basis, &params, &disorder).unwrap();
        let diff = (projected - built.entries).amax();
        assert!(diff < 1e-13, "t = {t}: {diff}");
    }
}

#[test]
fn correlators_match_kronecker_operators() {
    let sites = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut state = DirectSumState::vacuum(sites, 2).unwrap();
    for v in &mut state.sectors {
        for z in v.iter_mut() {
            *z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    let norm = state.norm();
    for v in &mut state.sectors {
        *v /= Complex64::new(norm, 0.0);
    }
    let dim = LOCAL.pow(sites as u32);
    let mut psi = DVector::<Complex64>::zeros(dim);
    for (basis, v) in state.bases.iter().zip(&state.sectors) {
        for (s, z) in basis.states().iter().zip(v.iter()) {
            psi[product_index(s)] = *z;
        }
    }
    let a = lowering();
    let cplx = |m: DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
    let s2 = 2f64.sqrt();
    let x_op = |j: usize| cplx((embed(&a, j, sites) + embed(&a.transpose(), j, sites)) / s2);
    let p_op = |j: usize| {
        let d = embed(&a, j, sites) - embed(&a.transpose(), j, sites);
        d.map(|v| Complex64::new(0.0, -v / s2))
    };
    let expect = |m: DMatrix<Complex64>| psi.dotc(&(m * &psi));
    let check = |obs: Observable, want: Complex64| {
        let got = obs.expectation(&state).unwrap();
        assert!((got - want).norm() < 1e-13, "{}: {got} vs {want}", obs.label());
    };
    for i in 1..=sites {
        let (x, p) = (expect(x_op(i - 1)), expect(p_op(i - 1)));
        check(Observable::X(i), Complex64::new(x.re, 0.0));
        check(Observable::P(i), Complex64::new(p.re, 0.0));
        check(Observable::Quadrature(i), Complex64::new(x.re, p.re));
        for j in 1..=sites {
            if i == j {
                continue;
            }
            check(Observable::XX(i, j), expect(x_op(i - 1) * x_op(j - 1)));
            check(Observable::PP(i, j), expect(p_op(i - 1) * p_op(j - 1)));
            check(Observable::PX(i, j), expect(p_op(i - 1) * x_op(j - 1)));
        }
    }
}

/// Static Hamiltonian: `exp(-i H T)` and its folded logarithm from a dense
/// eigendecomposition, independent of the propagator.
fn static_oracle(params: &ModelParams) -> (DMatrix<Complex64>, DMatrix<Complex64>, Vec<f64>) {
    let basis = FockBasis::enumerate(params.particles, params.sites).unwrap();
    let h = hamiltonian_matrix(0.0, &basis, params, &DisorderRealization::clean(params.domain_size()))
        .unwrap()
        .entries;
    let t = params.period();
    let hc = h.map(|x| Complex64::new(x, 0.0));
    let f = (hc * Complex64::new(0.0, -t)).exp();
    let eig = h.symmetric_eigen();
    let omega = params.omega;
    let folded: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| {
            let mut x = (e + 0.5 * omega).rem_euclid(omega) - 0.5 * omega;
            if x <= -0.5 * omega + 1e-12 {
                x += omega;
            }
            x
        })
        .collect();
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let d = DMatrix::from_diagonal(&DVector::from_iterator(folded.len(), folded.iter().map(|&e| Complex64::new(e, 0.0))));
    let heff = &v * d * v.adjoint();
    let mut sorted = folded;
    sorted.sort_by(f64::total_cmp);
    (f, heff, sorted)
}

#[test]
fn constant_hamiltonian_oracle() {
    for (n, l, omega) in [(1, 8, 2.0), (2, 6, 2.9), (2, 8, 9.0), (2, 4, 1.3)] {
        let params = ModelParams {
            sites: l,
            particles: n,
            h: 1.0,
            g0: 1.0,
            g1: 0.0,
            u: 3.5,
            omega,
            w: 0.0,
        };
        let (f_ref, heff_ref, eps_ref) = static_oracle(&params);
        let res = FloquetResult::compute(
            &FockBasis::enumerate(n, l).unwrap(),
            &params,
            &DisorderRealization::clean(l / 2),
            &PropagatorSettings::default(),
        )
        .unwrap();
        assert!(max_abs_diff(&res.floquet, &f_ref) < 1e-10, "F for N = {n}, L = {l}");
        for (a, b) in res.quasienergies.iter().zip(&eps_ref) {
            assert!((a - b).abs() < 1e-9, "eps for N = {n}, L = {l}: {a} vs {b}");
        }
        // Entrywise agreement of the logarithm needs a non-degenerate folded spectrum.
        let gaps_ok = eps_ref.windows(2).all(|w| w[1] - w[0] > 1e-6);
        if gaps_ok {
            let d = max_abs_diff(&res.heff, &heff_ref);
            assert!(d < 1e-9, "H_eff for N = {n}, L = {l}: {d}");
        }
    }
}

#[test]
fn static_state_evolution_matches_exponential() {
    let params = ModelParams {
        sites: 6,
        particles: 2,
        h: 1.0,
        g0: 1.0,
        g1: 0.0,
        u: 2.0,
        omega: 3.0,
        w: 0.0,
    };
    let basis = FockBasis::enumerate(2, 6).unwrap();
    let disorder = DisorderRealization::clean(3);
    let h = hamiltonian_matrix(0.0, &basis, &params, &disorder).unwrap().entries;
    let mut psi0 = DVector::<Complex64>::zeros(basis.len());
    psi0[4] = Complex64::new(0.6, 0.0);
    psi0[9] = Complex64::new(0.0, 0.8);
    let (t0, t1) = (0.3, 5.2);
    let u = (h.map(|x| Complex64::new(x, 0.0)) * Complex64::new(0.0, -(t1 - t0))).exp();
    let want = u * &psi0;
    let got = evolve_state(&psi0, t0, t1, &params, &disorder, &PropagatorSettings::default()).unwrap();
    assert!((got - want).camax() < 1e-10);
}

#[test]
fn zero_hamiltonian_is_identity_evolution() {
    let params = ModelParams {
        sites: 4,
        particles: 1,
        h: 0.0,
        g0: 1e-300,
        g1: 0.0,
        u: 0.0,
        omega: 1.0,
        w: 0.0,
    };
    let psi0 = DVector::from_element(4, Complex64::new(0.5, 0.0));
    let out = evolve_state(&psi0, 0.0, 3.0, &params, &DisorderRealization::clean(2), &PropagatorSettings::default()).unwrap();
    assert!((out - psi0).camax() < 1e-15);
}

#[test]
fn step_halving_converges_at_second_order() {
    let params = ModelParams::reference(2, 1.0);
    let disorder = DisorderRealization::draw(3, 1.0, 6);
    let basis = FockBasis::enumerate(2, 12).unwrap();
    let ham = DrivenHamiltonian::assemble(&basis, &params, &disorder).unwrap();
    let f = |k: usize| {
        let s = PropagatorSettings {
            steps_per_period: k,
            ..Default::default()
        };
        floquet_operator_for(&ham, &s).unwrap()
    };
    let ops: Vec<_> = [32, 64, 128, 256, 512].iter().map(|&k| f(k)).collect();
    let gaps: Vec<f64> = ops.windows(2).map(|w| max_abs_diff(&w[0], &w[1])).collect();
    for g in gaps.windows(2) {
        let order = (g[0] / g[1]).log2();
        assert!(order > 1.8, "observed order {order} from gaps {gaps:?}");
    }
    // Default K = 256 against K = 512.
    assert!(gaps[3] < PropagatorSettings::default().convergence_tol, "{gaps:?}");
    eprintln!("step-halving gaps: {gaps:?}");
}
