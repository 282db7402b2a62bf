//! End-to-end checks across the Fock-space, Lanczos, moment and covariance
//! layers.

use krylov_gauss::evolve::{closed_form, linspace, propagate, spread_complexity};
use krylov_gauss::gaussian::family_fock_bound;
use krylov_gauss::hilbert::{build_hamiltonian, FockSpace, SpectralOracle, StateVector};
use krylov_gauss::lanczos::{lanczos_iterate, LanczosRun, TridiagonalData};
use krylov_gauss::moments::{
    lanczos_from_moments, moments_from_jacobi, moments_from_jet, moments_from_lanczos, survival_jet,
};
use krylov_gauss::scalar::Rational;
use krylov_gauss::StateFamily;
use proptest::prelude::*;

fn fock_lanczos(family: &StateFamily, space: FockSpace, steps: usize) -> LanczosRun {
    let h = build_hamiltonian(family, space).unwrap();
    let mut run = lanczos_iterate(&h, &StateVector::vacuum(space), steps, None).unwrap();
    run.tri.terminated = false;
    run
}

fn assert_close(got: f64, want: f64, rel: f64, what: &str) {
    assert!(
        (got - want).abs() <= rel * want.abs().max(1.0),
        "{what}: got {got}, want {want}"
    );
}

#[test]
fn fock_lanczos_reproduces_analytic_coefficients() {
    let cases = [
        (StateFamily::Coherent { alpha: 0.7 }, FockSpace::single_mode(128).unwrap()),
        (StateFamily::Squeezed { eta: 1.3 }, FockSpace::single_mode(128).unwrap()),
        (StateFamily::TwoMode { r: 0.9, theta: 0.4 }, FockSpace::two_mode(48).unwrap()),
    ];
    for (family, space) in cases {
        let run = fock_lanczos(&family, space, 40);
        let exact = TridiagonalData::analytic(&family, 40).unwrap();
        for n in 0..40 {
            assert_close(run.tri.a[n], 0.0, 1e-10, "a");
            assert_close(run.tri.b[n], exact.b[n], 1e-10, family.name());
        }
        assert!(run.basis.orthonormality_defect() < 1e-10);
    }
}

#[test]
fn chain_propagation_matches_fock_space_evolution() {
    let family = StateFamily::Squeezed { eta: 0.8 };
    let space = FockSpace::single_mode(200).unwrap();
    let h = build_hamiltonian(&family, space).unwrap();
    let run = fock_lanczos(&family, space, 100);
    let oracle = SpectralOracle::new(&h).unwrap();
    let grid = linspace(0.0, 1.5, 7);
    let amps = propagate(&run.tri, &grid, run.tri.len()).unwrap();
    let curve = spread_complexity(&amps);
    for (j, &t) in grid.iter().enumerate() {
        let psi = oracle.evolve(&StateVector::vacuum(space), t).unwrap();
        let mut c = 0.0;
        for (n, k) in run.basis.vectors().iter().enumerate() {
            let p = k.inner(&psi).norm_sqr();
            assert!((p - amps.psi[j][n].norm_sqr()).abs() < 1e-10, "t={t} n={n}");
            c += n as f64 * p;
        }
        assert_close(curve.c[j], c, 1e-9, "C(t)");
    }
}

#[test]
fn saturation_of_the_fock_bound() {
    let grid = linspace(0.0, 1.2, 13);
    let cases = [
        (StateFamily::Coherent { alpha: 1.5 }, FockSpace::single_mode(160).unwrap(), 1.0),
        (StateFamily::TwoMode { r: 1.0, theta: 0.0 }, FockSpace::two_mode(80).unwrap(), 1.0),
        (StateFamily::Squeezed { eta: 1.0 }, FockSpace::single_mode(320).unwrap(), 0.5),
    ];
    for (family, space, ratio) in cases {
        let run = fock_lanczos(&family, space, space.total_dim());
        let curve = spread_complexity(&propagate(&run.tri, &grid, run.tri.len()).unwrap());
        let reference = closed_form(&family, &grid).unwrap().curve;
        for (j, &t) in grid.iter().enumerate() {
            let bound = family_fock_bound(&family, t).unwrap();
            assert_close(curve.c[j], ratio * bound, 1e-8, family.name());
            assert_close(curve.c[j], reference.c[j], 1e-8, family.name());
        }
    }
}

#[test]
fn moments_of_the_chain_match_the_survival_jet() {
    for family in [StateFamily::Squeezed { eta: 1.0 }, StateFamily::TwoMode { r: 1.0, theta: 0.0 }] {
        let tri = TridiagonalData::analytic(&family, 8).unwrap();
        let from_chain = moments_from_lanczos(&tri, 12).unwrap();
        let from_jet = moments_from_jet(&survival_jet(&family, 12, &Rational::integer(1)).unwrap());
        for n in 0..=12 {
            let (x, y) = (from_chain.mu[n].to_c64(), from_jet.mu[n].to_c64());
            assert!((x - y).norm() <= 1e-9 * y.norm().max(1.0), "{} μ_{n}: {x} vs {y}", family.name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coherent_lanczos_has_sqrt_n_couplings(alpha in 0.1f64..3.0) {
        let family = StateFamily::Coherent { alpha };
        let run = fock_lanczos(&family, FockSpace::single_mode(48).unwrap(), 20);
        for n in 1..20 {
            let want = alpha * (n as f64).sqrt();
            prop_assert!((run.tri.b[n] - want).abs() <= 1e-10 * want);
        }
    }

    #[test]
    fn jacobi_moments_round_trip_exactly(
        a in prop::collection::vec(-5i64..=5, 5),
        b2 in prop::collection::vec(1i64..=9, 4),
    ) {
        let a: Vec<Rational> = a.into_iter().map(Rational::integer).collect();
        let mut b_squared = vec![Rational::integer(0)];
        b_squared.extend(b2.into_iter().map(Rational::integer));
        let mu = moments_from_jacobi(&a, &b_squared, 8).unwrap();
        let back = lanczos_from_moments(&mu, 4).unwrap();
        prop_assert_eq!(&back.a[..], &a[..4]);
        prop_assert_eq!(&back.b_squared, &b_squared);
    }

    #[test]
    fn complexity_never_exceeds_bound(r in 0.05f64..1.2, t in 0.0f64..1.0) {
        let family = StateFamily::TwoMode { r, theta: 0.3 };
        let run = fock_lanczos(&family, FockSpace::two_mode(64).unwrap(), 64);
        let curve = spread_complexity(&propagate(&run.tri, &[t], run.tri.len()).unwrap());
        let bound = family_fock_bound(&family, t).unwrap();
        prop_assert!(curve.c[0] >= 0.0);
        prop_assert!(curve.c[0] <= bound + 1e-9);
    }
}
