//! Real spectrum of a reversible chain.
//!
//! Detailed balance makes `A = D^{-1/2} P D^{1/2}` (with `D = diag(pi)`)
//! symmetric and similar to `P`. `A` is diagonalized with cyclic Jacobi
//! rotations and each eigenvector `v` of `A` is mapped to the eigenvector
//! `g = D^{-1/2} v` of `P^T`, which is unit length in the `pi`-norm.

use crate::chain::{ReversibleChain, StationaryDistribution};
use crate::error::{Error, Result};
use crate::scalar::{inf_norm, Scalar};

/// Eigenvalues strictly inside `(POSITIVE_EPS, 1 - POSITIVE_EPS)` are certified.
/// Scalars coarser than `f64` use `64 * epsilon` when that is larger.
pub const POSITIVE_EPS: f64 = 1e-9;

/// Symmetric matrix `A_ij = pi_i^{-1/2} P_ij pi_j^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedOperator<T> {
    n: usize,
    a: Vec<T>,
    asymmetry: T,
}

impl<T: Scalar> SymmetrizedOperator<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i * self.n + j]
    }

    /// `max |A_ij - A_ji|` before the exact averaging step.
    pub fn asymmetry(&self) -> T {
        self.asymmetry
    }
}

pub fn symmetrize<T: Scalar>(chain: &ReversibleChain<T>) -> SymmetrizedOperator<T> {
    let n = chain.n();
    let p = chain.matrix();
    let sqrt_pi: Vec<T> = chain.stationary().as_slice().iter().map(|x| x.sqrt()).collect();
    let mut a: Vec<T> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            p.get(i, j) * sqrt_pi[j] / sqrt_pi[i]
        })
        .collect();
    let mut asymmetry = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            asymmetry = asymmetry.max((x - y).abs());
            let avg = (x + y) * T::half();
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }
    SymmetrizedOperator { n, a, asymmetry }
}

/// Stopping rule for the Jacobi iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiOptions {
    /// Stop once the off-diagonal Frobenius mass drops below `rel_tol * |A|_F`.
    pub rel_tol: f64,
    pub max_sweeps: usize,
}

impl JacobiOptions {
    /// `rel_tol = 1e-12`, floored at a small multiple of machine epsilon so
    /// that single precision can still converge.
    pub fn for_scalar<T: Scalar>() -> Self {
        Self {
            rel_tol: 1e-12f64.max(16.0 * T::epsilon().as_f64()),
            max_sweeps: 100,
        }
    }
}

/// Sorted spectrum of `P` with matching `P^T` eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport<T> {
    eigenvalues: Vec<T>,
    eigvecs_pt: Vec<Vec<T>>,
    positive: Vec<usize>,
    sweeps: usize,
}

impl<T: Scalar> SpectrumReport<T> {
    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// `g^(k)` with `P^T g^(k) = mu_k g^(k)` and `|g^(k)|_pi = 1`.
    pub fn eigvec_pt(&self, k: usize) -> &[T] {
        &self.eigvecs_pt[k]
    }

    pub fn eigvecs_pt(&self) -> &[Vec<T>] {
        &self.eigvecs_pt
    }

    /// Indices of the eigenvalues lying in `(0, 1)`.
    pub fn positive_nontrivial_indices(&self) -> &[usize] {
        &self.positive
    }

    pub fn positive_nontrivial(&self) -> Vec<T> {
        self.positive.iter().map(|&k| self.eigenvalues[k]).collect()
    }

    /// Largest `|mu_k|` over `k >= 2`; zero for a single-state chain.
    pub fn second_largest_modulus(&self) -> T {
        self.eigenvalues.iter().skip(1).fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }
}

/// True when `lambda` lies in the open interval certified by the bounds.
pub fn is_positive_nontrivial<T: Scalar>(lambda: T) -> bool {
    let eps = T::lit(POSITIVE_EPS).max(T::epsilon() * T::lit(64.0));
    lambda > eps && lambda < T::one() - eps
}

pub fn eigendecompose<T: Scalar>(
    a: &SymmetrizedOperator<T>,
    pi: &StationaryDistribution<T>,
) -> Result<SpectrumReport<T>> {
    eigendecompose_with(a, pi, JacobiOptions::for_scalar::<T>())
}

pub fn eigendecompose_with<T: Scalar>(
    op: &SymmetrizedOperator<T>,
    pi: &StationaryDistribution<T>,
    opts: JacobiOptions,
) -> Result<SpectrumReport<T>> {
    let n = op.n;
    if pi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pi.len(),
        });
    }
    let (values, vectors, sweeps) = jacobi(op.a.clone(), n, opts)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[y].partial_cmp(&values[x]).unwrap().then(x.cmp(&y)));

    let sqrt_pi: Vec<T> = pi.as_slice().iter().map(|x| x.sqrt()).collect();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigvecs_pt = Vec::with_capacity(n);
    for &k in &order {
        eigenvalues.push(values[k]);
        let mut g: Vec<T> = (0..n).map(|i| vectors[i * n + k] / sqrt_pi[i]).collect();
        orient(&mut g);
        eigvecs_pt.push(g);
    }
    let positive = (0..n).filter(|&k| is_positive_nontrivial(eigenvalues[k])).collect();
    Ok(SpectrumReport {
        eigenvalues,
        eigvecs_pt,
        positive,
        sweeps,
    })
}

/// Symmetrizes and decomposes in one step.
pub fn spectrum<T: Scalar>(chain: &ReversibleChain<T>) -> Result<SpectrumReport<T>> {
    eigendecompose(&symmetrize(chain), chain.stationary())
}

/// Flips `g` so that its entry of largest magnitude is positive. Entries
/// within a relative `1e-9` of the maximum count as tied; the first wins.
fn orient<T: Scalar>(g: &mut [T]) {
    let max = inf_norm(g);
    let cutoff = max * (T::one() - T::lit(1e-9));
    let best = g.iter().position(|x| x.abs() >= cutoff);
    if best.is_some_and(|b| g[b] < T::zero()) {
        g.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi on a dense symmetric row-major matrix. Returns unsorted
/// eigenvalues, the eigenvector matrix (columns) and the sweep count.
fn jacobi<T: Scalar>(mut a: Vec<T>, n: usize, opts: JacobiOptions) -> Result<(Vec<T>, Vec<T>, usize)> {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let frob = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let threshold = T::lit(opts.rel_tol) * frob;

    let off_norm = |a: &[T]| -> T {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) >= threshold && frob > T::zero() {
        if sweeps == opts.max_sweeps {
            return Err(Error::NoConvergence(opts.max_sweeps));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (apq + apq);
                let t = if theta.abs() > T::lit(1e150f64.min(T::max_value().as_f64().sqrt())) {
                    T::half() / theta
                } else {
                    let sgn = if theta < T::zero() { -T::one() } else { T::one() };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * x - s * y;
                    a[k * n + q] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * x - s * y;
                    a[q * n + k] = s * x + c * y;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let (x, y) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * x - s * y;
                    v[k * n + q] = s * x + c * y;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    Ok((values, v, sweeps))
}

/// `|P^T g - mu g|_inf`
pub fn eig_residual<T: Scalar>(chain: &ReversibleChain<T>, mu: T, g: &[T]) -> T {
    let ptg = chain.matrix().apply_transpose(g);
    let r: Vec<T> = ptg.iter().zip(g).map(|(&x, &y)| x - mu * y).collect();
    inf_norm(&r)
}
