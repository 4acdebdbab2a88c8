//! Reversible chains with known structure, and seeded random reversible
//! chains for fuzzing.
//!
//! Random-walk chains use `P_ij = w_ij / deg(j)` with `pi_j = deg(j) / sum deg`.
//! Random chains draw a stationary vector from normalized exponentials and
//! symmetric flows `F_ij = F_ji = U_ij min(pi_i, pi_j)` (`U_ij` uniform on
//! `(0, 1]`) on a random connected support, then set `P_ij = F_ij / pi_j`
//! with the diagonal taking the remainder of each column. Weighting by
//! `min(pi_i, pi_j)` keeps a single light state from forcing every other
//! column to be almost entirely diagonal.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{check_ergodicity, ReversibleChain, Tolerances, TransitionMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Undirected weighted edge between 0-based vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `P = [[1-a, b], [a, 1-b]]`: state 0 leaves with probability `a`,
    /// state 1 with probability `b`.
    TwoState {
        a: f64,
        b: f64,
    },
    /// Simple random walk on the complete graph without self-loops.
    Complete {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Path {
        n: usize,
    },
    /// Walk on the `d`-dimensional hypercube, `2^d` states.
    Hypercube {
        d: usize,
    },
    WalkOnGraph {
        edges: Vec<WeightedEdge>,
    },
    /// Metropolis chain for `target` on a symmetric proposal graph.
    Metropolis {
        target: Vec<f64>,
        proposal: Vec<WeightedEdge>,
    },
    RandomReversible {
        n: usize,
        density: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub family: Family,
    /// `alpha` in `alpha I + (1 - alpha) P`, applied last.
    pub laziness: f64,
}

impl ChainSpec {
    pub fn new(family: Family) -> Self {
        Self { family, laziness: 0.0 }
    }

    pub fn lazy(mut self, alpha: f64) -> Self {
        self.laziness = alpha;
        self
    }
}

/// Raw row-major matrix and its stationary vector, before validation.
struct Draft {
    n: usize,
    p: Vec<f64>,
    pi: Vec<f64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

pub fn build<T: Scalar>(spec: &ChainSpec, tol: &Tolerances) -> Result<ReversibleChain<T>> {
    let alpha = spec.laziness;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            what: "laziness alpha",
            value: alpha,
        });
    }
    let mut d = draft(&spec.family)?;
    if alpha > 0.0 {
        for x in d.p.iter_mut() {
            *x *= 1.0 - alpha;
        }
        for i in 0..d.n {
            d.p[i * d.n + i] += alpha;
        }
    }
    let p = TransitionMatrix::from_row_major(d.n, d.p.into_iter().map(T::lit).collect(), tol.stochastic)?;
    let ergo = check_ergodicity(&p);
    if !ergo.irreducible {
        return Err(Error::Disconnected);
    }
    if !ergo.aperiodic {
        return Err(Error::Periodic(ergo.period.unwrap_or(0)));
    }
    ReversibleChain::with_stationary(p, d.pi.into_iter().map(T::lit).collect(), tol)
}

/// `alpha I + (1 - alpha) P`; the stationary distribution is unchanged and
/// every eigenvalue `mu` maps to `alpha + (1 - alpha) mu`.
pub fn lazify<T: Scalar>(chain: &ReversibleChain<T>, alpha: T) -> Result<ReversibleChain<T>> {
    chain.lazify(alpha)
}

fn draft(family: &Family) -> Result<Draft> {
    match family {
        Family::TwoState { a, b } => {
            let (a, b) = (*a, *b);
            if !(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0) {
                return Err(invalid("two_state requires a, b in (0, 1]"));
            }
            Ok(Draft {
                n: 2,
                p: vec![1.0 - a, b, a, 1.0 - b],
                pi: vec![b / (a + b), a / (a + b)],
            })
        }
        Family::Complete { n } => {
            let n = *n;
            if n == 0 {
                return Err(invalid("complete requires n >= 1"));
            }
            if n == 1 {
                return Ok(trivial());
            }
            let edges = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| WeightedEdge { u, v, w: 1.0 }))
                .collect::<Vec<_>>();
            graph_walk(n, &edges)
        }
        Family::Cycle { n } => {
            let n = *n;
            match n {
                0 => Err(invalid("cycle requires n >= 1")),
                1 => Ok(trivial()),
                2 => graph_walk(2, &[WeightedEdge { u: 0, v: 1, w: 1.0 }]),
                _ => {
                    let edges: Vec<_> = (0..n)
                        .map(|u| WeightedEdge {
                            u,
                            v: (u + 1) % n,
                            w: 1.0,
                        })
                        .collect();
                    graph_walk(n, &edges)
                }
            }
        }
        Family::Path { n } => {
            let n = *n;
            match n {
                0 => Err(invalid("path requires n >= 1")),
                1 => Ok(trivial()),
                _ => {
                    let edges: Vec<_> = (0..n - 1).map(|u| WeightedEdge { u, v: u + 1, w: 1.0 }).collect();
                    graph_walk(n, &edges)
                }
            }
        }
        Family::Hypercube { d } => {
            let d = *d;
            if d == 0 || d > 16 {
                return Err(invalid("hypercube requires 1 <= d <= 16"));
            }
            let n = 1usize << d;
            let edges: Vec<_> = (0..n)
                .flat_map(|u| (0..d).map(move |b| (u, u ^ (1 << b))))
                .filter(|&(u, v)| u < v)
                .map(|(u, v)| WeightedEdge { u, v, w: 1.0 })
                .collect();
            graph_walk(n, &edges)
        }
        Family::WalkOnGraph { edges } => {
            let n = edges
                .iter()
                .map(|e| e.u.max(e.v) + 1)
                .max()
                .ok_or_else(|| invalid("graph has no edges"))?;
            graph_walk(n, edges)
        }
        Family::Metropolis { target, proposal } => metropolis(target, proposal),
        Family::RandomReversible { n, density, seed } => random_reversible(*n, *density, *seed),
    }
}

fn trivial() -> Draft {
    Draft {
        n: 1,
        p: vec![1.0],
        pi: vec![1.0],
    }
}

fn adjacency(n: usize, edges: &[WeightedEdge]) -> Result<Vec<f64>> {
    let mut a = vec![0.0; n * n];
    for e in edges {
        if e.u >= n || e.v >= n {
            return Err(invalid(format!("edge ({}, {}) out of range", e.u, e.v)));
        }
        if !(e.w > 0.0 && e.w.is_finite()) {
            return Err(invalid(format!("edge ({}, {}) has non-positive weight", e.u, e.v)));
        }
        a[e.u * n + e.v] += e.w;
        if e.u != e.v {
            a[e.v * n + e.u] += e.w;
        }
    }
    Ok(a)
}

fn graph_walk(n: usize, edges: &[WeightedEdge]) -> Result<Draft> {
    let a = adjacency(n, edges)?;
    let deg: Vec<f64> = (0..n).map(|j| (0..n).map(|i| a[i * n + j]).sum()).collect();
    if deg.contains(&0.0) {
        return Err(Error::Disconnected);
    }
    let total: f64 = deg.iter().sum();
    let p = (0..n * n).map(|k| a[k] / deg[k % n]).collect();
    Ok(Draft {
        n,
        p,
        pi: deg.iter().map(|d| d / total).collect(),
    })
}

fn metropolis(target: &[f64], proposal: &[WeightedEdge]) -> Result<Draft> {
    let n = target.len();
    if n == 0 {
        return Err(invalid("metropolis target is empty"));
    }
    if target.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(invalid("metropolis target must be strictly positive"));
    }
    let total: f64 = target.iter().sum();
    let pi: Vec<f64> = target.iter().map(|t| t / total).collect();
    if n == 1 {
        return Ok(trivial());
    }
    let mut a = adjacency(n, proposal)?;
    for i in 0..n {
        a[i * n + i] = 0.0;
    }
    let max_deg = (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j]).sum::<f64>())
        .fold(0.0, f64::max);
    if max_deg == 0.0 {
        return Err(Error::Disconnected);
    }
    let mut p = vec![0.0; n * n];
    for j in 0..n {
        let mut out = 0.0;
        for i in (0..n).filter(|&i| i != j) {
            let q = a[i * n + j] / max_deg;
            let x = q * (pi[i] / pi[j]).min(1.0);
            p[i * n + j] = x;
            out += x;
        }
        p[j * n + j] = 1.0 - out;
    }
    Ok(Draft { n, p, pi })
}

fn random_reversible(n: usize, density: f64, seed: u64) -> Result<Draft> {
    if n == 0 {
        return Err(invalid("random_reversible requires n >= 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(invalid("density must lie in (0, 1]"));
    }
    if n == 1 {
        return Ok(trivial());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // normalized exponentials: a uniform draw from the simplex
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    let pi: Vec<f64> = e.iter().map(|x| x / total).collect();

    // random spanning tree, then extra edges with probability `density`
    let mut support = vec![false; n * n];
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    for k in 1..n {
        let (u, v) = (perm[k], perm[rng.gen_range(0..k)]);
        support[u * n + v] = true;
        support[v * n + u] = true;
    }
    for u in 0..n {
        for v in u + 1..n {
            if !support[u * n + v] && rng.gen::<f64>() < density {
                support[u * n + v] = true;
                support[v * n + u] = true;
            }
        }
    }

    let mut flow = vec![0.0; n * n];
    for u in 0..n {
        for v in u + 1..n {
            if support[u * n + v] {
                let w = (1.0 - rng.gen::<f64>()) * pi[u].min(pi[v]);
                flow[u * n + v] = w;
                flow[v * n + u] = w;
            }
        }
    }
    // scale so that the heaviest column leaves with probability `cap` < 1
    let cap = rng.gen_range(0.5..0.99);
    let heaviest = (0..n)
        .map(|j| (0..n).map(|i| flow[i * n + j]).sum::<f64>() / pi[j])
        .fold(0.0, f64::max);
    let scale = cap / heaviest;

    let mut p = vec![0.0; n * n];
    for j in 0..n {
        let mut out = 0.0;
        for i in (0..n).filter(|&i| i != j) {
            let x = flow[i * n + j] * scale / pi[j];
            p[i * n + j] = x;
            out += x;
        }
        p[j * n + j] = 1.0 - out;
    }
    Ok(Draft { n, p, pi })
}

/// `count` random reversible chains with `n` drawn from `n_min..=n_max`.
/// Chain `k` draws its parameters from stream `k` of a ChaCha generator
/// seeded with `seed`, so the corpus does not depend on thread scheduling.
pub fn random_corpus<T: Scalar>(
    count: usize,
    n_min: usize,
    n_max: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<(ChainSpec, ReversibleChain<T>)>> {
    if n_min == 0 || n_min > n_max {
        return Err(invalid(format!("bad size range [{n_min}, {n_max}]")));
    }
    (0..count)
        .into_par_iter()
        .map(|k| {
            let spec = corpus_spec(k as u64, n_min, n_max, seed);
            build(&spec, tol).map(|c| (spec, c))
        })
        .collect()
}

/// Parameters of chain `index` in [`random_corpus`].
pub fn corpus_spec(index: u64, n_min: usize, n_max: usize, seed: u64) -> ChainSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.gen_range(n_min..=n_max);
    let density = rng.gen_range(0.2..=1.0);
    ChainSpec::new(Family::RandomReversible {
        n,
        density,
        seed: rng.gen(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::check_detailed_balance;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn two_state_definition() {
        let c: ReversibleChain<f64> = build(&ChainSpec::new(Family::TwoState { a: 0.1, b: 0.1 }), &tol()).unwrap();
        assert_eq!(c.matrix().rows(), vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
        assert_eq!(c.stationary().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn even_cycle_is_periodic() {
        let r = build::<f64>(&ChainSpec::new(Family::Cycle { n: 4 }), &tol());
        assert_eq!(r, Err(Error::Periodic(2)));
        assert!(build::<f64>(&ChainSpec::new(Family::Cycle { n: 4 }).lazy(0.5), &tol()).is_ok());
        assert!(build::<f64>(&ChainSpec::new(Family::Cycle { n: 5 }), &tol()).is_ok());
    }

    #[test]
    fn disconnected_graph() {
        let edges = vec![WeightedEdge { u: 0, v: 1, w: 1.0 }, WeightedEdge { u: 2, v: 3, w: 1.0 }];
        let r = build::<f64>(&ChainSpec::new(Family::WalkOnGraph { edges }).lazy(0.5), &tol());
        assert_eq!(r, Err(Error::Disconnected));
    }

    #[test]
    fn graph_walk_stationary_is_degree_proportional() {
        let edges = vec![
            WeightedEdge { u: 0, v: 1, w: 2.0 },
            WeightedEdge { u: 1, v: 2, w: 1.0 },
            WeightedEdge { u: 2, v: 0, w: 0.5 },
            WeightedEdge { u: 2, v: 2, w: 1.5 },
        ];
        let c: ReversibleChain<f64> = build(&ChainSpec::new(Family::WalkOnGraph { edges }), &tol()).unwrap();
        let deg = [2.5, 3.0, 3.0];
        for (x, d) in c.stationary().as_slice().iter().zip(deg) {
            assert!((x - d / 8.5).abs() < 1e-12);
        }
        assert!(check_detailed_balance(c.matrix(), c.stationary()) < 1e-12);
    }

    #[test]
    fn metropolis_targets_pi() {
        let proposal = (0..4)
            .map(|u| WeightedEdge {
                u,
                v: (u + 1) % 4,
                w: 1.0,
            })
            .collect();
        let spec = ChainSpec::new(Family::Metropolis {
            target: vec![1.0, 2.0, 3.0, 4.0],
            proposal,
        });
        let c: ReversibleChain<f64> = build(&spec, &tol()).unwrap();
        for (i, x) in c.stationary().as_slice().iter().enumerate() {
            assert!((x - (i + 1) as f64 / 10.0).abs() < 1e-12);
        }
        assert!(check_detailed_balance(c.matrix(), c.stationary()) < 1e-12);
    }

    #[test]
    fn hypercube_is_uniform() {
        let c: ReversibleChain<f64> = build(&ChainSpec::new(Family::Hypercube { d: 3 }).lazy(0.5), &tol()).unwrap();
        assert_eq!(c.n(), 8);
        assert!(c.stationary().as_slice().iter().all(|&x| (x - 0.125).abs() < 1e-15));
        assert!(build::<f64>(&ChainSpec::new(Family::Hypercube { d: 3 }), &tol()).is_err());
    }

    #[test]
    fn parameter_validation() {
        let bad = [
            Family::TwoState { a: 0.0, b: 0.5 },
            Family::Complete { n: 0 },
            Family::Hypercube { d: 0 },
            Family::RandomReversible {
                n: 3,
                density: 0.0,
                seed: 1,
            },
            Family::WalkOnGraph {
                edges: vec![WeightedEdge { u: 0, v: 1, w: -1.0 }],
            },
        ];
        for f in bad {
            assert!(matches!(
                build::<f64>(&ChainSpec::new(f), &tol()),
                Err(Error::InvalidSpec(_))
            ));
        }
        let r = build::<f64>(&ChainSpec::new(Family::Complete { n: 3 }).lazy(1.0), &tol());
        assert!(matches!(r, Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn random_chains_are_reversible_and_seeded() {
        for seed in 0..20 {
            let spec = ChainSpec::new(Family::RandomReversible {
                n: 7,
                density: 0.4,
                seed,
            });
            let c: ReversibleChain<f64> = build(&spec, &tol()).unwrap();
            assert!(c.max_detailed_balance_violation() <= 1e-12);
            for j in 0..7 {
                let s: f64 = (0..7).map(|i| c.matrix().get(i, j)).sum();
                assert!((s - 1.0).abs() <= 1e-12);
                assert!(c.matrix().get(j, j) > 0.0);
            }
            let again: ReversibleChain<f64> = build(&spec, &tol()).unwrap();
            assert_eq!(c, again);
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = random_corpus::<f64>(25, 2, 6, 3, &tol()).unwrap();
        let b = random_corpus::<f64>(25, 2, 6, 3, &tol()).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|(_, c)| (2..=6).contains(&c.n())));
        let c = random_corpus::<f64>(25, 2, 6, 4, &tol()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn lazify_two_state() {
        let c: ReversibleChain<f64> = build(&ChainSpec::new(Family::TwoState { a: 0.2, b: 0.2 }), &tol()).unwrap();
        let l = lazify(&c, 0.5).unwrap();
        let target: ReversibleChain<f64> = build(&ChainSpec::new(Family::TwoState { a: 0.1, b: 0.1 }), &tol()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((l.matrix().get(i, j) - target.matrix().get(i, j)).abs() < 1e-15);
            }
        }
    }
}
