//! Finite Markov chains in the column-stochastic convention
//! `P[i][j] = Pr[next = i | current = j]`, so that `P pi = pi`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::{inf_norm, Scalar};

/// Numerical tolerances used when validating and analysing a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a column sum from 1.
    pub stochastic: f64,
    /// Allowed `|P pi - pi|_inf`.
    pub stationary: f64,
    /// Allowed `max |P_ij pi_j - P_ji pi_i|`.
    pub balance: f64,
    /// Relative eigenpair residual bound.
    pub eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stochastic: 1e-9,
            stationary: 1e-9,
            balance: 1e-8,
            eig: 1e-8,
        }
    }
}

/// A validated column-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    n: usize,
    // row-major, entries[i * n + j] = P_ij
    entries: Vec<T>,
}

impl<T: Scalar> TransitionMatrix<T> {
    /// Validates a square matrix given as rows and renormalizes each column to
    /// sum exactly to 1 when its deviation is within `tol_stochastic`.
    pub fn validate(raw: &[Vec<T>], tol_stochastic: f64) -> Result<Self> {
        let n = raw.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, r) in raw.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NonSquare { row, len: r.len(), n });
            }
            entries.extend_from_slice(r);
        }
        Self::from_row_major(n, entries, tol_stochastic)
    }

    /// Same as [`validate`](Self::validate) for a flat row-major buffer.
    pub fn from_row_major(n: usize, mut entries: Vec<T>, tol_stochastic: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let x = entries[i * n + j];
                if !x.is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
                if x < T::zero() {
                    return Err(Error::NegativeEntry(i, j));
                }
            }
        }
        let tol = T::lit(tol_stochastic);
        for j in 0..n {
            let sum: T = (0..n).map(|i| entries[i * n + j]).sum();
            if (sum - T::one()).abs() > tol {
                return Err(Error::ColumnSumOff(j, sum.as_f64()));
            }
            if sum != T::one() {
                for i in 0..n {
                    entries[i * n + j] /= sum;
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// Builds the matrix from `f(i, j) = P_ij` and validates it.
    pub fn from_fn(n: usize, tol_stochastic: f64, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::from_row_major(n, entries, tol_stochastic)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = T::one();
        }
        Self { n, entries }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `P_ij = Pr[next = i | current = j]`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `P x`
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(&p, &v)| p * v).sum())
            .collect()
    }

    /// `P^T x`, i.e. `(P^T x)_j = sum_i P_ij x_i`.
    pub fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &p) in out.iter_mut().zip(self.row(i)) {
                *o += p * xi;
            }
        }
        out
    }

    /// `alpha I + (1 - alpha) P`
    pub(crate) fn lazy(&self, alpha: T) -> Self {
        let n = self.n;
        let mut entries: Vec<T> = self.entries.iter().map(|&p| (T::one() - alpha) * p).collect();
        for i in 0..n {
            entries[i * n + i] += alpha;
        }
        Self { n, entries }
    }

    /// Support-graph successors of state `j`: every `i` with `P_ij > 0`.
    fn successors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.get(i, j) > T::zero())
    }
}

/// Irreducibility and periodicity of the support graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErgodicityReport {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// gcd of cycle lengths; only defined for irreducible chains.
    pub period: Option<usize>,
}

impl ErgodicityReport {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Checks strong connectivity of the support graph (edge `j -> i` iff
/// `P_ij > 0`) and computes its period from BFS levels.
pub fn check_ergodicity<T: Scalar>(p: &TransitionMatrix<T>) -> ErgodicityReport {
    let n = p.n();
    let mut level = vec![usize::MAX; n];
    let mut queue = VecDeque::from([0]);
    level[0] = 0;
    while let Some(u) = queue.pop_front() {
        for v in p.successors(u) {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let forward = level.iter().all(|&l| l != usize::MAX);

    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for u in 0..n {
            if !seen[u] && p.get(v, u) > T::zero() {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    let irreducible = forward && seen.iter().all(|&s| s);
    if !irreducible {
        return ErgodicityReport {
            irreducible: false,
            aperiodic: false,
            period: None,
        };
    }

    let mut period = 0;
    for u in 0..n {
        for v in p.successors(u) {
            // level(u) + 1 - level(v), taken in absolute value
            let d = (level[u] + 1).abs_diff(level[v]);
            period = gcd(period, d);
        }
    }
    ErgodicityReport {
        irreducible: true,
        aperiodic: period == 1,
        period: Some(period),
    }
}

/// Stationary distribution of an ergodic chain: strictly positive, sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution<T> {
    pi: Vec<T>,
}

impl<T: Scalar> StationaryDistribution<T> {
    /// Checks positivity, normalization and `|P pi - pi|_inf <= tol.stationary`.
    /// The vector is rescaled to sum exactly to 1 when within tolerance.
    pub fn validated(p: &TransitionMatrix<T>, pi: Vec<T>, tol: &Tolerances) -> Result<Self> {
        if pi.len() != p.n() {
            return Err(Error::DimensionMismatch {
                expected: p.n(),
                got: pi.len(),
            });
        }
        if let Some(i) = pi.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(Error::BadStationary(format!("entry {i} is not strictly positive")));
        }
        let sum: T = pi.iter().copied().sum();
        if (sum - T::one()).abs() > T::lit(tol.stochastic) {
            return Err(Error::BadStationary(format!("entries sum to {sum}")));
        }
        let pi: Vec<T> = pi.into_iter().map(|x| x / sum).collect();
        let residual = stationary_residual(p, &pi);
        if residual > T::lit(tol.stationary) {
            return Err(Error::BadStationary(format!(
                "residual |P pi - pi| = {:e}",
                residual.as_f64()
            )));
        }
        Ok(Self { pi })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.pi
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn min(&self) -> T {
        self.pi.iter().fold(T::infinity(), |a, &b| a.min(b))
    }

    /// `sum_{i in members} pi_i`
    pub fn mass(&self, members: impl IntoIterator<Item = usize>) -> T {
        members.into_iter().map(|i| self.pi[i]).sum()
    }
}

impl<T> std::ops::Index<usize> for StationaryDistribution<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.pi[i]
    }
}

/// `|P pi - pi|_inf`
pub fn stationary_residual<T: Scalar>(p: &TransitionMatrix<T>, pi: &[T]) -> T {
    let ppi = p.apply(pi);
    let diff: Vec<T> = ppi.iter().zip(pi).map(|(&a, &b)| a - b).collect();
    inf_norm(&diff)
}

/// Solves `(P - I) pi = 0`, `sum pi = 1` by Gaussian elimination with partial
/// pivoting, the last equation replaced by the normalization constraint.
pub fn stationary_distribution<T: Scalar>(
    p: &TransitionMatrix<T>,
    ergo: &ErgodicityReport,
    tol: &Tolerances,
) -> Result<StationaryDistribution<T>> {
    if !ergo.is_ergodic() {
        return Err(Error::NotErgodic {
            irreducible: ergo.irreducible,
            period: ergo.period,
        });
    }
    solve_stationary(p, tol)
}

// Irreducibility alone makes the solution unique.
fn solve_stationary<T: Scalar>(p: &TransitionMatrix<T>, tol: &Tolerances) -> Result<StationaryDistribution<T>> {
    let n = p.n();
    let mut a: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut row = p.row(i).to_vec();
            row[i] -= T::one();
            row
        })
        .collect();
    a[n - 1] = vec![T::one(); n];
    let mut b = vec![T::zero(); n];
    b[n - 1] = T::one();

    let x = solve_dense(a, b)?;
    StationaryDistribution::validated(p, x, tol)
}

/// Dense Gaussian elimination with partial pivoting.
fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs())).max(T::one());
    let tiny = T::epsilon() * T::lit(n as f64) * scale;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
            .unwrap();
        if !(a[pivot][col].abs() > tiny) {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= factor * v;
            }
            let v = b[col];
            b[r] -= factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let s: T = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// `max_{i,j} |P_ij pi_j - P_ji pi_i|`.
pub fn check_detailed_balance<T: Scalar>(p: &TransitionMatrix<T>, pi: &StationaryDistribution<T>) -> T {
    worst_balance_pair(p, pi.as_slice()).0
}

/// Largest detailed-balance violation and the pair attaining it (first in
/// row-major order on ties).
pub fn worst_balance_pair<T: Scalar>(p: &TransitionMatrix<T>, pi: &[T]) -> (T, usize, usize) {
    let n = p.n();
    let mut worst = (T::zero(), 0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let v = (p.get(i, j) * pi[j] - p.get(j, i) * pi[i]).abs();
            if v > worst.0 {
                worst = (v, i, j);
            }
        }
    }
    worst
}

/// `<f, g>_pi = sum_i f_i pi_i g_i`.
pub fn weighted_inner_product<T: Scalar>(f: &[T], g: &[T], pi: &StationaryDistribution<T>) -> Result<T> {
    for v in [f, g] {
        if v.len() != pi.len() {
            return Err(Error::DimensionMismatch {
                expected: pi.len(),
                got: v.len(),
            });
        }
    }
    Ok(inner(f, g, pi.as_slice()))
}

/// `sqrt(<f, f>_pi)`.
pub fn pi_norm<T: Scalar>(f: &[T], pi: &StationaryDistribution<T>) -> Result<T> {
    weighted_inner_product(f, f, pi).map(T::sqrt)
}

#[inline]
pub(crate) fn inner<T: Scalar>(f: &[T], g: &[T], pi: &[T]) -> T {
    f.iter().zip(g).zip(pi).map(|((&a, &b), &w)| a * w * b).sum()
}

/// An ergodic, time-reversible chain together with its stationary distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversibleChain<T> {
    p: TransitionMatrix<T>,
    pi: StationaryDistribution<T>,
    ergodicity: ErgodicityReport,
    max_detailed_balance_violation: T,
}

impl<T: Scalar> ReversibleChain<T> {
    /// Checks ergodicity, solves for `pi` and verifies detailed balance.
    ///
    /// Reducible chains fail with `NotErgodic`. An irreducible but periodic
    /// chain is checked for detailed balance first, so a non-reversible
    /// periodic chain reports `NotReversible`.
    pub fn from_matrix(p: TransitionMatrix<T>, tol: &Tolerances) -> Result<Self> {
        let ergodicity = check_ergodicity(&p);
        if !ergodicity.irreducible {
            return Err(Error::NotErgodic {
                irreducible: false,
                period: None,
            });
        }
        let pi = solve_stationary(&p, tol)?;
        Self::assemble(p, pi, ergodicity, tol)
    }

    /// Like [`from_matrix`](Self::from_matrix) but with a known stationary
    /// vector, which is validated instead of solved for.
    pub fn with_stationary(p: TransitionMatrix<T>, pi: Vec<T>, tol: &Tolerances) -> Result<Self> {
        let ergodicity = check_ergodicity(&p);
        if !ergodicity.is_ergodic() {
            return Err(Error::NotErgodic {
                irreducible: ergodicity.irreducible,
                period: ergodicity.period,
            });
        }
        let pi = StationaryDistribution::validated(&p, pi, tol)?;
        Self::assemble(p, pi, ergodicity, tol)
    }

    fn assemble(
        p: TransitionMatrix<T>,
        pi: StationaryDistribution<T>,
        ergodicity: ErgodicityReport,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (violation, i, j) = worst_balance_pair(&p, pi.as_slice());
        if violation > T::lit(tol.balance) {
            return Err(Error::NotReversible {
                violation: violation.as_f64(),
                i,
                j,
            });
        }
        if !ergodicity.aperiodic {
            return Err(Error::NotErgodic {
                irreducible: true,
                period: ergodicity.period,
            });
        }
        Ok(Self {
            p,
            pi,
            ergodicity,
            max_detailed_balance_violation: violation,
        })
    }

    /// `alpha I + (1 - alpha) P` with the same stationary distribution.
    pub fn lazify(&self, alpha: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha < T::one()) {
            return Err(Error::OutOfRange {
                what: "laziness alpha",
                value: alpha.as_f64(),
            });
        }
        if alpha == T::zero() {
            return Ok(self.clone());
        }
        let p = self.p.lazy(alpha);
        let ergodicity = check_ergodicity(&p);
        let max_detailed_balance_violation = check_detailed_balance(&p, &self.pi);
        Ok(Self {
            p,
            pi: self.pi.clone(),
            ergodicity,
            max_detailed_balance_violation,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn matrix(&self) -> &TransitionMatrix<T> {
        &self.p
    }

    pub fn stationary(&self) -> &StationaryDistribution<T> {
        &self.pi
    }

    pub fn ergodicity(&self) -> ErgodicityReport {
        self.ergodicity
    }

    pub fn max_detailed_balance_violation(&self) -> T {
        self.max_detailed_balance_violation
    }

    /// `<f, g>_pi`, panicking on length mismatch.
    pub fn inner(&self, f: &[T], g: &[T]) -> T {
        assert_eq!(f.len(), self.n());
        assert_eq!(g.len(), self.n());
        inner(f, g, self.pi.as_slice())
    }

    /// `<f, P^T f>_pi`
    pub fn rayleigh_numerator(&self, f: &[T]) -> T {
        self.inner(f, &self.p.apply_transpose(f))
    }
}
