//! Independent reference computations for test suites. Nothing here shares
//! code paths with the solvers it checks.

use crate::chain::TransitionMatrix;
use crate::scalar::Scalar;

/// Stationary distribution by power iteration from the uniform vector,
/// applying `P^(2^k)` at step `k` (repeated squaring) until
/// `|x_{k+1} - x_k|_inf < 1e-12`. Squaring makes the stopping test meaningful
/// for slowly mixing chains, where a single `P x` step moves very little.
/// Callers should pass an aperiodic chain.
pub fn power_iteration_stationary<T: Scalar>(p: &TransitionMatrix<T>) -> Vec<f64> {
    let n = p.n();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| p.get(i, j).as_f64()).collect()).collect();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..200 {
        let next: Vec<f64> = m
            .iter()
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        let delta = next.iter().zip(&x).fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
        x = next;
        if delta < 1e-12 {
            break;
        }
        m = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|l| m[i][l] * m[l][j]).sum()).collect())
            .collect();
    }
    let s: f64 = x.iter().sum();
    x.iter().map(|v| v / s).collect()
}

/// Coefficients (ascending powers) of `det(x I - P)` by the
/// Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial<T: Scalar>(p: &TransitionMatrix<T>) -> Vec<f64> {
    let n = p.n();
    let a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| p.get(i, j).as_f64()).collect()).collect();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum();
            }
            next[i][i] += c[n - k + 1];
        }
        m = next;
        let tr: f64 = (0..n).map(|i| (0..n).map(|l| a[i][l] * m[l][i]).sum::<f64>()).sum();
        c[n - k] = -tr / k as f64;
    }
    c
}

fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn eval_scale(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x.abs() + k.abs())
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect()
}

/// All roots in `[lo, hi]` of a polynomial whose roots are all real, with
/// multiplicity. Roots of the derivative split the interval into pieces that
/// each hold at most one simple root, found by bisection; a derivative root
/// where the polynomial vanishes is a multiple root.
pub fn real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut c = c.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }
    let crit = real_roots(&derivative(&c), lo, hi);

    // group derivative roots that coincide numerically
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for x in crit {
        match groups.last_mut() {
            Some((y, m)) if (x - *y).abs() < 1e-7 => {
                *y = (*y * *m as f64 + x) / (*m as f64 + 1.0);
                *m += 1;
            }
            _ => groups.push((x, 1)),
        }
    }

    let is_zero = |x: f64| eval(&c, x).abs() <= 1e-12 * eval_scale(&c, x);
    let mut roots = Vec::new();
    let mut points: Vec<(f64, bool)> = vec![(lo, false)];
    for &(x, m) in &groups {
        let zero = is_zero(x);
        if zero {
            roots.extend(std::iter::repeat_n(x, m + 1));
        }
        points.push((x, zero));
    }
    points.push((hi, false));

    for w in points.windows(2) {
        let ((a, za), (b, zb)) = (w[0], w[1]);
        if za || zb || b <= a {
            continue;
        }
        let (fa, fb) = (eval(&c, a), eval(&c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        let (mut l, mut r) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (l + r);
            if mid <= l || mid >= r {
                break;
            }
            if eval(&c, mid).signum() == fa.signum() {
                l = mid;
            } else {
                r = mid;
            }
        }
        roots.push(0.5 * (l + r));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Eigenvalues of `P` (descending) as roots of its characteristic polynomial.
pub fn characteristic_roots<T: Scalar>(p: &TransitionMatrix<T>) -> Vec<f64> {
    let mut r = real_roots(&characteristic_polynomial(p), -1.5, 1.5);
    r.reverse();
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_known_polynomials() {
        // (x - 0.5)(x + 0.25)(x - 1)
        let c = [0.125, 0.125, -1.25, 1.0];
        let r = real_roots(&c, -1.5, 1.5);
        assert_eq!(r.len(), 3);
        for (x, e) in r.iter().zip([-0.25, 0.5, 1.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        // (x - 1/3)^2 (x - 1)
        let a = 1.0 / 3.0;
        let c = [-a * a, a * a + 2.0 * a, -(2.0 * a + 1.0), 1.0];
        let r = real_roots(&c, -1.5, 1.5);
        assert_eq!(r.len(), 3);
        assert!((r[0] - a).abs() < 1e-6 && (r[1] - a).abs() < 1e-6);
    }

    #[test]
    fn characteristic_polynomial_of_two_state() {
        let p = TransitionMatrix::validate(&[vec![0.9, 0.1], vec![0.1, 0.9]], 1e-9).unwrap();
        let c = characteristic_polynomial(&p);
        // x^2 - 1.8 x + 0.8
        assert!((c[0] - 0.8).abs() < 1e-12 && (c[1] + 1.8).abs() < 1e-12 && c[2] == 1.0);
        let r = characteristic_roots(&p);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_two_state() {
        let p = TransitionMatrix::validate(&[vec![0.8, 0.1], vec![0.2, 0.9]], 1e-9).unwrap();
        let pi = power_iteration_stationary(&p);
        assert!((pi[0] - 1.0 / 3.0).abs() < 1e-10);
    }
}
