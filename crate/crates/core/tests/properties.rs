//! Invariants checked over generated and randomized chains.

use cheeger_core::bounds::claim1_diagnostic;
use cheeger_core::conductance::reverse_flow;
use cheeger_core::generators::random_corpus;
use cheeger_core::oracle::{characteristic_roots, power_iteration_stationary};
use cheeger_core::spectral::eig_residual;
use cheeger_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn corpus(count: usize, n_max: usize, seed: u64) -> Vec<ReversibleChainF64> {
    random_corpus(count, 2, n_max, seed, &tol())
        .unwrap()
        .into_iter()
        .map(|(_, c)| c)
        .collect()
}

fn structured() -> Vec<ReversibleChainF64> {
    let specs = [
        ChainSpec::new(Family::TwoState { a: 0.3, b: 0.05 }),
        ChainSpec::new(Family::Complete { n: 6 }).lazy(0.25),
        ChainSpec::new(Family::Cycle { n: 7 }),
        ChainSpec::new(Family::Path { n: 6 }).lazy(0.5),
        ChainSpec::new(Family::Hypercube { d: 3 }).lazy(0.5),
        ChainSpec::new(Family::Metropolis {
            target: vec![1.0, 5.0, 2.0],
            proposal: vec![WeightedEdge { u: 0, v: 1, w: 1.0 }, WeightedEdge { u: 1, v: 2, w: 1.0 }],
        }),
    ];
    specs.iter().map(|s| build(s, &tol()).unwrap()).collect()
}

fn permuted(c: &ReversibleChainF64, perm: &[usize]) -> ReversibleChainF64 {
    let n = c.n();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[perm[i]][perm[j]] = c.matrix().get(i, j);
        }
    }
    let p = TransitionMatrix::validate(&rows, 1e-9).unwrap();
    ReversibleChain::from_matrix(p, &tol()).unwrap()
}

proptest! {
    #[test]
    fn inner_product_is_symmetric_and_bilinear(
        seed in any::<u64>(),
        alpha in -3.0f64..3.0,
        n in 2usize..9,
    ) {
        let c: ReversibleChainF64 = build(&ChainSpec::new(Family::RandomReversible { n, density: 0.5, seed }), &tol()).unwrap();
        let pi = c.stationary();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = || (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (f, g, h) = (v(), v(), v());
        let fg = weighted_inner_product(&f, &g, pi).unwrap();
        prop_assert!((fg - weighted_inner_product(&g, &f, pi).unwrap()).abs() < 1e-12);
        let combo: Vec<f64> = f.iter().zip(&h).map(|(a, b)| alpha * a + b).collect();
        let lhs = weighted_inner_product(&combo, &g, pi).unwrap();
        let rhs = alpha * fg + weighted_inner_product(&h, &g, pi).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn validated_matrices_are_column_stochastic(
        raw in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 5), 5),
    ) {
        let n = 5;
        let sums: Vec<f64> = (0..n).map(|j| raw.iter().map(|r| r[j]).sum()).collect();
        prop_assume!(sums.iter().all(|&s| s > 1e-6));
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| raw[i][j] / sums[j]).collect()).collect();
        let p = TransitionMatrix::validate(&rows, 1e-9).unwrap();
        for j in 0..n {
            let s: f64 = (0..n).map(|i| p.get(i, j)).sum();
            prop_assert!((s - 1.0).abs() <= 1e-9);
            prop_assert!((0..n).all(|i| p.get(i, j) >= 0.0));
        }
        for x in p.apply_transpose(&[1.0; 5]) {
            prop_assert!((x - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn random_generator_chains_hold_invariants(seed in any::<u64>(), n in 1usize..12, density in 0.05f64..1.0) {
        let spec = ChainSpec::new(Family::RandomReversible { n, density, seed });
        let c: ReversibleChainF64 = build(&spec, &tol()).unwrap();
        prop_assert!(c.max_detailed_balance_violation() <= 1e-12);
        let p = c.matrix();
        let residual = cheeger_core::chain::stationary_residual(p, c.stationary().as_slice());
        prop_assert!(residual <= 1e-9);
        for j in 0..n {
            let s: f64 = (0..n).map(|i| p.get(i, j)).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
        let again: ReversibleChainF64 = build(&spec, &tol()).unwrap();
        prop_assert_eq!(format!("{:?}", again.matrix()), format!("{:?}", p));
    }

    #[test]
    fn bound_dominance(phi in 0.0f64..=1.0) {
        let b = compare_bounds(phi).unwrap();
        prop_assert!(b.strengthened <= b.classical + 1e-12);
    }
}

#[test]
fn stationary_matches_power_iteration() {
    let mut chains = corpus(40, 12, 101);
    chains.extend(structured());
    for c in chains {
        let p = c.matrix();
        let solved = stationary_distribution(p, &check_ergodicity(p), &tol()).unwrap();
        let oracle = power_iteration_stationary(p);
        for (a, b) in solved.as_slice().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn spectral_invariants() {
    let mut chains = corpus(60, 32, 202);
    chains.extend(structured());
    for c in chains {
        let s = spectrum(&c).unwrap();
        let n = c.n();
        assert!((s.eigenvalues()[0] - 1.0).abs() <= 1e-9);
        assert!(s.eigenvalues()[n - 1] >= -1.0 - 1e-9);
        let trace: f64 = s.eigenvalues().iter().sum();
        assert!((trace - c.matrix().trace()).abs() <= 1e-9);
        let g1 = s.eigvec_pt(0);
        assert!(g1.iter().all(|x| (x - g1[0]).abs() <= 1e-8));
        for k in 0..n {
            let g = s.eigvec_pt(k);
            let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(eig_residual(&c, s.eigenvalues()[k], g) <= 1e-8 * gmax);
            assert!((c.inner(g, g) - 1.0).abs() <= 1e-8);
            for l in k + 1..n {
                assert!(c.inner(g, s.eigvec_pt(l)).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn eigenvalues_match_characteristic_polynomial() {
    for c in corpus(60, 6, 303) {
        let s = spectrum(&c).unwrap();
        let roots = characteristic_roots(c.matrix());
        assert_eq!(roots.len(), c.n());
        for (x, r) in s.eigenvalues().iter().zip(&roots) {
            assert!((x - r).abs() <= 1e-7, "{:?} vs {roots:?}", s.eigenvalues());
        }
    }
}

#[test]
fn conductance_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut chains = corpus(30, 12, 404);
    chains.extend(structured());
    for c in chains {
        let n = c.n();
        let exact = exact_conductance(&c, 20).unwrap();
        assert!(exact.phi > 0.0 && exact.phi <= 1.0);
        assert!((exact.phi - exact.flow / exact.argmin.mass()).abs() <= 1e-12);
        assert!(exact.argmin.is_candidate());

        for _ in 0..20 {
            let members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if members.is_empty() || members.len() == n {
                continue;
            }
            let s = StateSubset::new(&c, members).unwrap();
            let diff = (edge_flow(&c, &s) - reverse_flow(&c, &s)).abs();
            assert!(diff <= (n * n) as f64 * tol().balance);
        }

        for _ in 0..50 {
            let ordering: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sweep = sweep_with_fallback(&c, &ordering).unwrap();
            assert!(sweep.phi >= exact.phi - 1e-12);
            assert!(sweep.argmin.is_candidate());
        }
    }
}

#[test]
fn conductance_is_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for c in corpus(25, 9, 505) {
        let n = c.n();
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
        let relabeled = permuted(&c, &perm);
        let a = exact_conductance(&c, 20).unwrap();
        let b = exact_conductance(&relabeled, 20).unwrap();
        assert!((a.phi - b.phi).abs() <= 1e-12 * a.phi.max(1.0));
        let mapped = StateSubset::new(&relabeled, a.argmin.members().iter().map(|&i| perm[i])).unwrap();
        let phi_mapped = edge_flow(&relabeled, &mapped) / mapped.mass();
        assert!((phi_mapped - b.phi).abs() <= 1e-12 * a.phi.max(1.0));
    }
}

#[test]
fn lazification_halves_conductance_and_maps_spectrum() {
    for c in corpus(25, 10, 606).into_iter().chain(structured()) {
        let lazy = lazify(&c, 0.5).unwrap();
        assert_eq!(lazy.stationary(), c.stationary());
        let a = exact_conductance(&c, 20).unwrap();
        let b = exact_conductance(&lazy, 20).unwrap();
        assert!((b.phi - a.phi / 2.0).abs() <= 1e-12);

        for alpha in [0.0, 0.3, 0.5] {
            let l = lazify(&c, alpha).unwrap();
            let s = spectrum(&c).unwrap();
            let t = spectrum(&l).unwrap();
            for (x, y) in s.eigenvalues().iter().zip(t.eigenvalues()) {
                assert!((alpha + (1.0 - alpha) * x - y).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn walk_on_graph_stationary_is_degree_based() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for _ in 0..20 {
        let n = rng.gen_range(3..10);
        let mut edges: Vec<WeightedEdge> = (1..n)
            .map(|v| WeightedEdge {
                u: rng.gen_range(0..v),
                v,
                w: rng.gen_range(0.1..3.0),
            })
            .collect();
        edges.push(WeightedEdge { u: 0, v: 0, w: 1.0 });
        let c: ReversibleChainF64 =
            build(&ChainSpec::new(Family::WalkOnGraph { edges: edges.clone() }), &tol()).unwrap();
        let mut deg = vec![0.0; n];
        for e in &edges {
            deg[e.u] += e.w;
            if e.u != e.v {
                deg[e.v] += e.w;
            }
        }
        let total: f64 = deg.iter().sum();
        for (x, d) in c.stationary().as_slice().iter().zip(&deg) {
            assert!((x - d / total).abs() <= 1e-12);
        }
        assert!(c.max_detailed_balance_violation() <= 1e-12);
    }
}

#[test]
fn both_bounds_hold_on_random_chains() {
    for c in corpus(150, 9, 808).into_iter().chain(structured()) {
        let s = spectrum(&c).unwrap();
        let phi = exact_conductance(&c, 20).unwrap();
        let cert = certify(&c, &s, &phi, &tol());
        assert!(cert.passed(), "{:?}", cert.violations());
        assert_eq!(cert.uncertifiable_count(), 0);
        for e in &cert.eigen {
            assert!(e.new_slack >= -1e-9 && e.classical_slack >= -1e-9);
            let f2 = e.claim1.unwrap().scale.sqrt();
            assert!(e.claim2_slack.unwrap() >= -1e-9 * f2);
        }
    }
}

fn adversarial_vectors(c: &ReversibleChainF64, rng: &mut ChaCha8Rng) -> Vec<ProperVector<f64>> {
    let n = c.n();
    let pi = c.stationary();
    let mut out = Vec::new();
    let mut push = |f: Vec<f64>| {
        if let Ok(p) = ProperVector::new(f, pi) {
            out.push(p);
        }
    };
    // single spikes and indicators of light prefixes
    for i in 0..n {
        let mut f = vec![0.0; n];
        f[i] = rng.gen_range(0.1..5.0);
        push(f);
    }
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(&mut order[..], rng);
    let mut f = vec![0.0; n];
    for &i in &order {
        f[i] = 1.0;
        push(f.clone());
    }
    // geometric decay along a random order
    let ratio: f64 = rng.gen_range(0.1..0.95);
    let mut g = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        g[i] = ratio.powi(k as i32);
        let mut trimmed = g.clone();
        trimmed.iter_mut().enumerate().for_each(|(j, x)| {
            if !order[..=k].contains(&j) {
                *x = 0.0
            }
        });
        push(trimmed);
    }
    // thresholded eigenvectors
    let s = spectrum(c).unwrap();
    for k in 1..n {
        if let Ok(p) = make_proper_from_eigvec(s.eigvec_pt(k), pi) {
            out.push(p);
        }
    }
    out
}

#[test]
fn conductance_sandwich_on_adversarial_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for c in corpus(80, 9, 909).into_iter().chain(structured()) {
        let phi = exact_conductance(&c, 20).unwrap().phi;
        for f in adversarial_vectors(&c, &mut rng) {
            let d = check_claim1(&c, &f, phi).unwrap();
            assert!(d.combined_slack() >= -1e-9);
        }
        // indicator of the minimizing cut: the lower side is tight
        let exact = exact_conductance(&c, 20).unwrap();
        let f: Vec<f64> = (0..c.n())
            .map(|i| if exact.argmin.contains(i) { 1.0 } else { 0.0 })
            .collect();
        let f = ProperVector::new(f, c.stationary()).unwrap();
        let d = claim1_diagnostic(&c, &f, exact.phi);
        let expected = exact.phi * f.norm_sq(c.stationary());
        assert!((d.telescoping - expected).abs() <= 1e-12);
        assert!((d.middle - expected * expected).abs() <= 1e-12);
    }
}

#[test]
fn claim_slacks_are_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for c in corpus(30, 8, 1010) {
        let phi = exact_conductance(&c, 20).unwrap().phi;
        let s = spectrum(&c).unwrap();
        for &k in s.positive_nontrivial_indices() {
            let lambda = s.eigenvalues()[k];
            let g = s.eigvec_pt(k);
            let scale = rng.gen_range(0.01..100.0);
            let scaled: Vec<f64> = g.iter().map(|x| x * scale).collect();
            let a = check_claim2(&c, lambda, g, &tol()).unwrap();
            let b = check_claim2(&c, lambda, &scaled, &tol()).unwrap();
            assert!((a.normalized_slack - b.normalized_slack).abs() <= 1e-9 * a.normalized_slack.abs().max(1.0));
            let d1 = claim1_diagnostic(&c, &a.proper, phi);
            let d2 = claim1_diagnostic(&c, &b.proper, phi);
            for (x, y) in [
                (d1.lower_slack(), d2.lower_slack()),
                (d1.upper_slack(), d2.upper_slack()),
                (d1.combined_slack(), d2.combined_slack()),
            ] {
                assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
