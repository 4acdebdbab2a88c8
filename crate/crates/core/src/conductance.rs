//! Conductance `phi = min_{S : pi(S) <= 1/2} Q(S) / pi(S)` with the flow
//! `Q(S) = sum_{i in S, j not in S} P_ji pi_i`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Slack on the `pi(S) <= 1/2` comparison.
pub const MASS_SLACK: f64 = 1e-12;

/// Default cap on `n` for exhaustive enumeration.
pub const DEFAULT_MAX_EXACT_N: usize = 20;

// bitmask enumeration limit
const MASK_BITS: usize = 63;

/// A nonempty proper subset of the states with its stationary mass.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSubset<T> {
    members: Vec<usize>,
    mass: T,
}

impl<T: Scalar> StateSubset<T> {
    pub fn new(chain: &ReversibleChain<T>, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = chain.n();
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::InvalidSubset("empty".into()));
        }
        if members.len() >= n {
            return Err(Error::InvalidSubset("not a proper subset".into()));
        }
        if let Some(&i) = members.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidSubset(format!("state {i} out of range")));
        }
        let mass = chain.stationary().mass(members.iter().copied());
        Ok(Self { members, mass })
    }

    /// Sorted state indices.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    /// Whether the subset enters the conductance minimization.
    pub fn is_candidate(&self) -> bool {
        within_half(self.mass)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

fn within_half<T: Scalar>(mass: T) -> bool {
    mass <= T::half() + T::lit(MASS_SLACK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConductanceMethod {
    Exact,
    Sweep,
}

impl std::fmt::Display for ConductanceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConductanceMethod::Exact => "exact",
            ConductanceMethod::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceResult<T> {
    pub phi: T,
    pub argmin: StateSubset<T>,
    pub method: ConductanceMethod,
    pub flow: T,
}

/// `w[i * n + j] = P_ji pi_i`: probability flow from `i` to `j` per step.
fn flow_weights<T: Scalar>(chain: &ReversibleChain<T>) -> Vec<T> {
    let n = chain.n();
    let p = chain.matrix();
    let pi = chain.stationary();
    (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            p.get(j, i) * pi[i]
        })
        .collect()
}

/// `(Q(S), pi(S))` summed in ascending index order.
fn flow_and_mass<T: Scalar>(w: &[T], pi: &[T], in_set: impl Fn(usize) -> bool) -> (T, T) {
    let n = pi.len();
    let mut flow = T::zero();
    let mut mass = T::zero();
    for i in (0..n).filter(|&i| in_set(i)) {
        mass += pi[i];
        for j in (0..n).filter(|&j| !in_set(j)) {
            flow += w[i * n + j];
        }
    }
    (flow, mass)
}

/// `Q(S) = sum_{i in S, j not in S} P_ji pi_i`
pub fn edge_flow<T: Scalar>(chain: &ReversibleChain<T>, subset: &StateSubset<T>) -> T {
    let w = flow_weights(chain);
    flow_and_mass(&w, chain.stationary().as_slice(), |i| subset.contains(i)).0
}

/// `Q(complement of S) = sum_{i not in S, j in S} P_ji pi_i`
pub fn reverse_flow<T: Scalar>(chain: &ReversibleChain<T>, subset: &StateSubset<T>) -> T {
    let w = flow_weights(chain);
    flow_and_mass(&w, chain.stationary().as_slice(), |i| !subset.contains(i)).0
}

/// `Q(S) / pi(S)` for a single subset, regardless of its mass.
pub fn subset_conductance<T: Scalar>(chain: &ReversibleChain<T>, subset: &StateSubset<T>) -> T {
    edge_flow(chain, subset) / subset.mass()
}

/// Lexicographic order of the sorted member lists encoded by two bitmasks.
fn lex_cmp_masks(mut a: u64, mut b: u64) -> Ordering {
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (x, y) = (a.trailing_zeros(), b.trailing_zeros());
        if x != y {
            return x.cmp(&y);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    phi: T,
    flow: T,
    mask: u64,
}

/// Values within a relative `TIE_REL` of the minimum count as ties, so that
/// rounding noise in `pi` does not decide between subsets with equal exact
/// conductance.
pub const TIE_REL: f64 = 1e-12;

fn tie_cutoff<T: Scalar>(min_phi: T) -> T {
    min_phi + min_phi.abs() * T::lit(TIE_REL)
}

/// Lexicographically smallest member list among near-minimal candidates.
fn pick_tied<T: Scalar>(candidates: Vec<(T, Vec<usize>)>) -> Option<Vec<usize>> {
    let min_phi = candidates.iter().map(|c| c.0).reduce(T::min)?;
    let cutoff = tie_cutoff(min_phi);
    candidates.into_iter().filter(|c| c.0 <= cutoff).map(|c| c.1).min()
}

/// Exhaustive minimization over all nonempty subsets with `pi(S) <= 1/2`.
/// Ties (see [`TIE_REL`]) resolve to the lexicographically smallest member
/// list. Both scans are split across threads with order-independent
/// reductions, so the result does not depend on scheduling.
pub fn exact_conductance<T: Scalar>(chain: &ReversibleChain<T>, max_n: usize) -> Result<ConductanceResult<T>> {
    let n = chain.n();
    if n == 1 {
        return Err(Error::TooSmall);
    }
    let max_n = max_n.min(MASK_BITS);
    if n > max_n {
        return Err(Error::TooLarge { n, max_n });
    }
    let w = flow_weights(chain);
    let pi = chain.stationary().as_slice();
    let full = (1u64 << n) - 1;

    let evaluate = |mask: u64| {
        let (flow, mass) = flow_and_mass(&w, pi, |i| mask >> i & 1 == 1);
        within_half(mass).then(|| Candidate {
            phi: flow / mass,
            flow,
            mask,
        })
    };
    let min_phi = (1..full)
        .into_par_iter()
        .filter_map(evaluate)
        .map(|c| c.phi)
        .reduce_with(T::min)
        .expect("some singleton has mass at most 1/2");
    let cutoff = tie_cutoff(min_phi);
    let best = (1..full)
        .into_par_iter()
        .filter_map(evaluate)
        .filter(|c| c.phi <= cutoff)
        .reduce_with(|a, b| {
            if lex_cmp_masks(a.mask, b.mask) == Ordering::Greater {
                b
            } else {
                a
            }
        })
        .expect("the minimizer is within its own cutoff");

    let argmin = StateSubset::new(chain, (0..n).filter(|&i| best.mask >> i & 1 == 1))?;
    Ok(ConductanceResult {
        phi: best.phi,
        argmin,
        method: ConductanceMethod::Exact,
        flow: best.flow,
    })
}

/// Best prefix cut along `ordering` and along its negation.
///
/// States are sorted by descending value (ties by index) and every prefix
/// with mass at most 1/2 is scored. Prefix flows are updated incrementally,
/// and the winning subset is re-evaluated directly.
pub fn sweep_conductance<T: Scalar>(chain: &ReversibleChain<T>, ordering: &[T]) -> Result<ConductanceResult<T>> {
    let n = chain.n();
    if n == 1 {
        return Err(Error::TooSmall);
    }
    if ordering.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: ordering.len(),
        });
    }
    let w = flow_weights(chain);
    let pi = chain.stationary().as_slice();

    let mut candidates = Vec::new();
    for sign in [T::one(), -T::one()] {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            (sign * ordering[b])
                .partial_cmp(&(sign * ordering[a]))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut in_set = vec![false; n];
        let mut flow = T::zero();
        let mut mass = T::zero();
        for (k, &v) in order.iter().enumerate().take(n - 1) {
            // v leaves the complement: gains its outflow to the complement,
            // loses the inflow it received from the current set
            for j in 0..n {
                if j != v && !in_set[j] {
                    flow += w[v * n + j];
                }
                if in_set[j] {
                    flow -= w[j * n + v];
                }
            }
            in_set[v] = true;
            mass += pi[v];
            if !within_half(mass) {
                continue;
            }
            let mut members = order[..=k].to_vec();
            members.sort_unstable();
            candidates.push((flow / mass, members));
        }
    }
    let members = pick_tied(candidates).ok_or(Error::NoValidPrefix)?;
    sweep_result(chain, &w, members)
}

fn sweep_result<T: Scalar>(chain: &ReversibleChain<T>, w: &[T], members: Vec<usize>) -> Result<ConductanceResult<T>> {
    let argmin = StateSubset::new(chain, members)?;
    let (flow, mass) = flow_and_mass(w, chain.stationary().as_slice(), |i| argmin.contains(i));
    Ok(ConductanceResult {
        phi: flow / mass,
        argmin,
        method: ConductanceMethod::Sweep,
        flow,
    })
}

/// Best of the singletons `{i}` and the complements of singletons whose mass
/// is at most 1/2. Used when no sweep prefix qualifies.
pub fn singleton_conductance<T: Scalar>(chain: &ReversibleChain<T>) -> Result<ConductanceResult<T>> {
    let n = chain.n();
    if n == 1 {
        return Err(Error::TooSmall);
    }
    let w = flow_weights(chain);
    let pi = chain.stationary().as_slice();
    let mut candidates = Vec::new();
    for i in 0..n {
        let subsets = [vec![i], (0..n).filter(|&j| j != i).collect::<Vec<_>>()];
        for members in subsets {
            let (flow, mass) = flow_and_mass(&w, pi, |s| members.binary_search(&s).is_ok());
            if !within_half(mass) {
                continue;
            }
            candidates.push((flow / mass, members));
        }
    }
    let members = pick_tied(candidates).ok_or(Error::NoValidPrefix)?;
    sweep_result(chain, &w, members)
}

/// [`sweep_conductance`], falling back to [`singleton_conductance`] when no
/// prefix qualifies.
pub fn sweep_with_fallback<T: Scalar>(chain: &ReversibleChain<T>, ordering: &[T]) -> Result<ConductanceResult<T>> {
    match sweep_conductance(chain, ordering) {
        Err(Error::NoValidPrefix) => singleton_conductance(chain),
        other => other,
    }
}
