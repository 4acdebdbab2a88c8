//! Families with closed-form spectra and conductance.

use std::f64::consts::PI;

use cheeger_core::conductance::edge_flow;
use cheeger_core::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn family(f: Family, alpha: f64) -> ReversibleChainF64 {
    build(&ChainSpec::new(f).lazy(alpha), &tol()).unwrap()
}

fn assert_close_sorted(got: &[f64], mut want: Vec<f64>, eps: f64) {
    want.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= eps, "{got:?} vs {want:?}");
    }
}

#[test]
fn two_state_everything() {
    let c = family(Family::TwoState { a: 0.1, b: 0.1 }, 0.0);
    let s = spectrum(&c).unwrap();
    assert_close_sorted(s.eigenvalues(), vec![1.0, 0.8], 1e-12);
    let phi = exact_conductance(&c, 20).unwrap();
    assert!((phi.phi - 0.1).abs() < 1e-12);
    let cert = certify(&c, &s, &phi, &tol());
    let e = &cert.eigen[0];
    assert!((e.new_slack - 0.35).abs() < 1e-9);
    assert!((e.classical_slack - 0.195).abs() < 1e-9);
    assert!((e.claim2_slack.unwrap() - 0.05).abs() < 1e-9);
}

#[test]
fn asymmetric_two_state_stationary() {
    let c = family(Family::TwoState { a: 0.2, b: 0.1 }, 0.0);
    assert_eq!(c.matrix().rows(), vec![vec![0.8, 0.1], vec![0.2, 0.9]]);
    let p = c.matrix().clone();
    let solved = stationary_distribution(&p, &check_ergodicity(&p), &tol()).unwrap();
    assert!((solved[0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((solved[1] - 2.0 / 3.0).abs() < 1e-12);
    let oracle = cheeger_core::oracle::power_iteration_stationary(&p);
    assert!((oracle[0] - solved[0]).abs() < 1e-9);
}

#[test]
fn complete_graph_walks() {
    let k4 = family(Family::Complete { n: 4 }, 0.0);
    assert_close_sorted(
        spectrum(&k4).unwrap().eigenvalues(),
        vec![1.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0],
        1e-8,
    );

    let lazy = lazify(&k4, 0.5).unwrap();
    let s = spectrum(&lazy).unwrap();
    assert_close_sorted(s.eigenvalues(), vec![1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1e-8);
    for &x in lazy.stationary().as_slice() {
        assert!((x - 0.25).abs() < 1e-15);
    }

    let phi = exact_conductance(&lazy, 20).unwrap();
    assert!((phi.phi - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(phi.argmin.members(), &[0, 1]);
    assert!((edge_flow(&lazy, &phi.argmin) - 1.0 / 6.0).abs() < 1e-15);

    let cert = certify(&lazy, &s, &phi, &tol());
    assert_eq!(cert.eigen.len(), 3);
    for e in &cert.eigen {
        assert!((e.new_slack - 7.0 / 9.0).abs() < 1e-8);
    }
    assert!(cert.passed());
}

#[test]
fn lazy_cycle_c5_spectrum() {
    let c = family(Family::Cycle { n: 5 }, 0.5);
    let want = (0..5)
        .map(|k| (1.0 + (2.0 * PI * k as f64 / 5.0).cos()) / 2.0)
        .collect();
    assert_close_sorted(spectrum(&c).unwrap().eigenvalues(), want, 1e-8);
}

#[test]
fn lazy_hypercube_conductance() {
    let c = family(Family::Hypercube { d: 3 }, 0.5);
    let phi = exact_conductance(&c, 20).unwrap();
    assert!((phi.phi - 1.0 / 6.0).abs() < 1e-12);
    assert_eq!(phi.argmin.members().len(), 4);
    // eigenvalues of the lazy walk: 1 - k/d, k = 0..d, multiplicity C(d, k)
    let want = vec![
        1.0,
        2.0 / 3.0,
        2.0 / 3.0,
        2.0 / 3.0,
        1.0 / 3.0,
        1.0 / 3.0,
        1.0 / 3.0,
        0.0,
    ];
    assert_close_sorted(spectrum(&c).unwrap().eigenvalues(), want, 1e-8);
}

#[test]
fn sweep_along_second_eigenvector() {
    let two = family(Family::TwoState { a: 0.1, b: 0.1 }, 0.0);
    let s = spectrum(&two).unwrap();
    let r = sweep_conductance(&two, s.eigvec_pt(1)).unwrap();
    assert!((r.phi - 0.1).abs() < 1e-12);

    let k4 = family(Family::Complete { n: 4 }, 0.5);
    let s = spectrum(&k4).unwrap();
    let r = sweep_conductance(&k4, s.eigvec_pt(1)).unwrap();
    assert!(r.phi <= 0.5 + 1e-12);
    assert!(r.phi >= exact_conductance(&k4, 20).unwrap().phi - 1e-12);
}

#[test]
fn single_state_chain_is_rejected_downstream() {
    let c = family(Family::Complete { n: 1 }, 0.0);
    assert_eq!(c.n(), 1);
    assert_eq!(exact_conductance(&c, 20), Err(Error::TooSmall));
    assert_eq!(sweep_conductance(&c, &[1.0]), Err(Error::TooSmall));
    let s = spectrum(&c).unwrap();
    assert_eq!(s.eigenvalues(), &[1.0]);
    assert!(s.positive_nontrivial().is_empty());
}

#[test]
fn single_precision_pipeline() {
    let tol = Tolerances {
        stochastic: 1e-6,
        stationary: 1e-6,
        balance: 1e-6,
        eig: 1e-4,
    };
    let c: ReversibleChainF32 = build(&ChainSpec::new(Family::Cycle { n: 5 }).lazy(0.5), &tol).unwrap();
    let s = spectrum(&c).unwrap();
    let phi = exact_conductance(&c, 20).unwrap();
    let cert = certify(&c, &s, &phi, &tol);
    assert_eq!(cert.eigen.len(), 4);
    assert!(cert.passed());
    // two adjacent states: flow 2 * (1/4) * (1/5), mass 2/5
    assert!((phi.phi - 0.25).abs() < 1e-6);
}
