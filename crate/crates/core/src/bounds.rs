//! Certificates for the spectral bounds `lambda <= 1 - phi^2 / 2` and
//! `phi^2 + lambda^2 <= 1` (every eigenvalue `lambda` in `(0, 1)`), together
//! with numerical checks of the two intermediate inequalities behind the
//! stronger bound:
//!
//! * for every proper `f`:
//!   `phi |f|^2 <= sum_{i<j} P_ij pi_j (f_i^2 - f_j^2)` (coordinates sorted
//!   decreasingly) and the square of that sum is at most
//!   `|f|^4 - <f, P^T f>^2`;
//! * thresholding a `P^T` eigenvector `g` at zero gives a proper `f` with
//!   `<f, P^T f> >= lambda |f|^2`.
//!
//! A vector is *proper* when it is nonzero, entrywise nonnegative, and its
//! strictly positive support has stationary mass at most 1/2.

use crate::chain::{inner, ReversibleChain, StationaryDistribution, Tolerances};
use crate::conductance::{ConductanceMethod, ConductanceResult, MASS_SLACK};
use crate::error::{Error, Result, SandwichSide};
use crate::scalar::{inf_norm, Scalar};
use crate::spectral::{eig_residual, is_positive_nontrivial, SpectrumReport};

/// Every certified inequality may fail by at most this much after scaling to
/// `|f| = 1`.
pub const SLACK_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProperVector<T> {
    f: Vec<T>,
    support: Vec<usize>,
    support_mass: T,
}

impl<T: Scalar> ProperVector<T> {
    pub fn new(f: Vec<T>, pi: &StationaryDistribution<T>) -> Result<Self> {
        if f.len() != pi.len() {
            return Err(Error::DimensionMismatch {
                expected: pi.len(),
                got: f.len(),
            });
        }
        if let Some(i) = f.iter().position(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::NotProper(format!("entry {i} is negative or not finite")));
        }
        let support: Vec<usize> = (0..f.len()).filter(|&i| f[i] > T::zero()).collect();
        if support.is_empty() {
            return Err(Error::ZeroProperVector);
        }
        let support_mass = pi.mass(support.iter().copied());
        if support_mass > T::half() + T::lit(MASS_SLACK) {
            return Err(Error::MassExceedsHalf(support_mass.as_f64()));
        }
        Ok(Self {
            f,
            support,
            support_mass,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.f
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn support_mass(&self) -> T {
        self.support_mass
    }

    /// `|f|_pi^2`
    pub fn norm_sq(&self, pi: &StationaryDistribution<T>) -> T {
        inner(&self.f, &self.f, pi.as_slice())
    }

    /// `c f` for `c > 0`.
    pub fn scaled(&self, c: T) -> Self {
        assert!(c > T::zero(), "scale must be positive");
        Self {
            f: self.f.iter().map(|&x| x * c).collect(),
            support: self.support.clone(),
            support_mass: self.support_mass,
        }
    }

    /// Rescaled to `|f|_pi = 1`.
    pub fn normalized(&self, pi: &StationaryDistribution<T>) -> Self {
        self.scaled(T::one() / self.norm_sq(pi).sqrt())
    }
}

/// Thresholds `g` (or `-g` when `g`'s positive support is heavier than 1/2)
/// at zero.
pub fn make_proper_from_eigvec<T: Scalar>(g: &[T], pi: &StationaryDistribution<T>) -> Result<ProperVector<T>> {
    if g.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            got: g.len(),
        });
    }
    let positive_mass = pi.mass((0..g.len()).filter(|&i| g[i] > T::zero()));
    let sign = if positive_mass > T::half() + T::lit(MASS_SLACK) {
        -T::one()
    } else {
        T::one()
    };
    let f = g.iter().map(|&x| (sign * x).max(T::zero())).collect();
    ProperVector::new(f, pi)
}

/// Outcome of the eigenvector thresholding check.
#[derive(Debug, Clone, PartialEq)]
pub struct Claim2Check<T> {
    pub proper: ProperVector<T>,
    /// `<f, P^T f> - lambda |f|^2`
    pub slack: T,
    /// `slack / |f|^2`
    pub normalized_slack: T,
}

pub fn check_claim2<T: Scalar>(
    chain: &ReversibleChain<T>,
    lambda: T,
    g: &[T],
    tol: &Tolerances,
) -> Result<Claim2Check<T>> {
    if !is_positive_nontrivial(lambda) {
        return Err(Error::OutOfRange {
            what: "eigenvalue in (0, 1)",
            value: lambda.as_f64(),
        });
    }
    if g.len() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            got: g.len(),
        });
    }
    let residual = eig_residual(chain, lambda, g);
    let bound = T::lit(tol.eig) * inf_norm(g);
    if !(residual <= bound) {
        return Err(Error::NotAnEigenvector {
            residual: residual.as_f64(),
            bound: bound.as_f64(),
        });
    }
    let proper = make_proper_from_eigvec(g, chain.stationary())?;
    let norm_sq = proper.norm_sq(chain.stationary());
    let slack = chain.rayleigh_numerator(proper.values()) - lambda * norm_sq;
    Ok(Claim2Check {
        normalized_slack: slack / norm_sq,
        proper,
        slack,
    })
}

/// States ordered by decreasing `f`, ties by index (zeros therefore last).
fn decreasing_order<T: Scalar>(f: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[b].partial_cmp(&f[a]).unwrap().then(a.cmp(&b)));
    order
}

/// `sum_{a<b} P_{s_a s_b} pi_{s_b} (f_{s_a}^2 - f_{s_b}^2)` where `s` lists
/// the states by decreasing `f`.
pub fn telescoping_quantity<T: Scalar>(chain: &ReversibleChain<T>, f: &ProperVector<T>) -> T {
    let p = chain.matrix();
    let pi = chain.stationary();
    let v = f.values();
    let order = decreasing_order(v);
    let mut sum = T::zero();
    for (a, &i) in order.iter().enumerate() {
        let fi2 = v[i] * v[i];
        for &j in &order[a + 1..] {
            let d = fi2 - v[j] * v[j];
            if d != T::zero() {
                sum += p.get(i, j) * pi[j] * d;
            }
        }
    }
    sum
}

/// The three quantities of the conductance sandwich for one proper vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Claim1Diagnostic<T> {
    /// `phi^2 |f|^4`
    pub phi_norm4: T,
    /// square of the telescoping sum
    pub middle: T,
    /// `|f|^4 - <f, P^T f>^2`
    pub rhs: T,
    /// the telescoping sum itself
    pub telescoping: T,
    /// `phi |f|^2`
    pub phi_norm2: T,
    /// `|f|^4`
    pub scale: T,
}

impl<T: Scalar> Claim1Diagnostic<T> {
    /// `(telescoping - phi |f|^2) / |f|^2`
    pub fn lower_slack(&self) -> T {
        (self.telescoping - self.phi_norm2) / self.scale.sqrt()
    }

    /// `(rhs - middle) / |f|^4`
    pub fn upper_slack(&self) -> T {
        (self.rhs - self.middle) / self.scale
    }

    /// `(rhs - phi^2 |f|^4) / |f|^4`
    pub fn combined_slack(&self) -> T {
        (self.rhs - self.phi_norm4) / self.scale
    }

    /// First failing side of the sandwich below the slack floor.
    pub fn violation(&self) -> Option<(SandwichSide, T)> {
        let floor = -T::lit(SLACK_FLOOR);
        let lower = self.lower_slack();
        if !(lower >= floor) {
            return Some((SandwichSide::Lower, -lower));
        }
        let upper = self.upper_slack();
        if !(upper >= floor) {
            return Some((SandwichSide::Upper, -upper));
        }
        None
    }
}

/// Evaluates the sandwich without judging it.
pub fn claim1_diagnostic<T: Scalar>(chain: &ReversibleChain<T>, f: &ProperVector<T>, phi: T) -> Claim1Diagnostic<T> {
    let norm_sq = f.norm_sq(chain.stationary());
    let scale = norm_sq * norm_sq;
    let telescoping = telescoping_quantity(chain, f);
    let quad = chain.rayleigh_numerator(f.values());
    Claim1Diagnostic {
        phi_norm4: phi * phi * scale,
        middle: telescoping * telescoping,
        rhs: scale - quad * quad,
        telescoping,
        phi_norm2: phi * norm_sq,
        scale,
    }
}

/// Evaluates the sandwich and fails with `SandwichViolation` when either
/// side is breached by more than the slack floor (relative to `|f|`).
pub fn check_claim1<T: Scalar>(chain: &ReversibleChain<T>, f: &ProperVector<T>, phi: T) -> Result<Claim1Diagnostic<T>> {
    let d = claim1_diagnostic(chain, f, phi);
    match d.violation() {
        Some((side, magnitude)) => Err(Error::SandwichViolation {
            side,
            magnitude: magnitude.as_f64(),
        }),
        None => Ok(d),
    }
}

/// Per-eigenvalue record of a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCertificate<T> {
    /// Position in the descending spectrum.
    pub index: usize,
    pub lambda: T,
    /// `(1 - phi^2 / 2) - lambda`
    pub classical_slack: T,
    /// `1 - phi^2 - lambda^2`
    pub new_slack: T,
    /// `<f, P^T f> - lambda |f|^2` for the thresholded eigenvector.
    pub claim2_slack: Option<T>,
    pub claim2_normalized: Option<T>,
    pub claim1: Option<Claim1Diagnostic<T>>,
    /// Why the intermediate checks could not run.
    pub failure: Option<Error>,
}

impl<T: Scalar> EigenCertificate<T> {
    /// Descriptions of every inequality breached below the floor.
    pub fn violations(&self) -> Vec<String> {
        let floor = -T::lit(SLACK_FLOOR);
        let mut out = Vec::new();
        if !(self.classical_slack >= floor) {
            out.push(format!("classical bound slack {}", self.classical_slack));
        }
        if !(self.new_slack >= floor) {
            out.push(format!("strengthened bound slack {}", self.new_slack));
        }
        if let Some(s) = self.claim2_normalized {
            if !(s >= floor) {
                out.push(format!("eigenvector threshold slack {s}"));
            }
        }
        if let Some((side, m)) = self.claim1.as_ref().and_then(Claim1Diagnostic::violation) {
            out.push(format!("{side} sandwich breached by {m}"));
        }
        if let Some(e) = &self.failure {
            if !is_uncertifiable(e) {
                out.push(e.to_string());
            }
        }
        out
    }

    /// The thresholding construction was impossible for this eigenvector.
    pub fn is_uncertifiable(&self) -> bool {
        self.failure.as_ref().is_some_and(is_uncertifiable)
    }
}

fn is_uncertifiable(e: &Error) -> bool {
    matches!(e, Error::ZeroProperVector | Error::MassExceedsHalf(_))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate<T> {
    pub phi: T,
    pub method: ConductanceMethod,
    /// Only an exact conductance certifies; a sweep value overestimates phi.
    pub rigorous: bool,
    /// No eigenvalue lies in `(0, 1)`.
    pub vacuous: bool,
    pub eigen: Vec<EigenCertificate<T>>,
}

impl<T: Scalar> BoundCertificate<T> {
    pub fn violations(&self) -> Vec<String> {
        self.eigen
            .iter()
            .flat_map(|e| {
                e.violations()
                    .into_iter()
                    .map(move |v| format!("lambda[{}]: {v}", e.index))
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn uncertifiable_count(&self) -> usize {
        self.eigen.iter().filter(|e| e.is_uncertifiable()).count()
    }

    fn min_of(&self, f: impl Fn(&EigenCertificate<T>) -> Option<T>) -> Option<T> {
        self.eigen.iter().filter_map(f).reduce(T::min)
    }

    pub fn min_classical_slack(&self) -> Option<T> {
        self.min_of(|e| Some(e.classical_slack))
    }

    pub fn min_new_slack(&self) -> Option<T> {
        self.min_of(|e| Some(e.new_slack))
    }

    pub fn min_claim2_normalized(&self) -> Option<T> {
        self.min_of(|e| e.claim2_normalized)
    }

    pub fn min_claim1_lower(&self) -> Option<T> {
        self.min_of(|e| e.claim1.map(|d| d.lower_slack()))
    }

    pub fn min_claim1_upper(&self) -> Option<T> {
        self.min_of(|e| e.claim1.map(|d| d.upper_slack()))
    }
}

/// Certifies both spectral bounds for every eigenvalue in `(0, 1)` and runs
/// the two intermediate checks on the thresholded eigenvector. Failures of
/// the intermediate checks are recorded per eigenvalue.
pub fn certify<T: Scalar>(
    chain: &ReversibleChain<T>,
    spectrum: &SpectrumReport<T>,
    conductance: &ConductanceResult<T>,
    tol: &Tolerances,
) -> BoundCertificate<T> {
    let phi = conductance.phi;
    let phi2 = phi * phi;
    let eigen: Vec<EigenCertificate<T>> = spectrum
        .positive_nontrivial_indices()
        .iter()
        .map(|&k| {
            let lambda = spectrum.eigenvalues()[k];
            let mut cert = EigenCertificate {
                index: k,
                lambda,
                classical_slack: T::one() - phi2 * T::half() - lambda,
                new_slack: T::one() - phi2 - lambda * lambda,
                claim2_slack: None,
                claim2_normalized: None,
                claim1: None,
                failure: None,
            };
            match check_claim2(chain, lambda, spectrum.eigvec_pt(k), tol) {
                Ok(c2) => {
                    cert.claim2_slack = Some(c2.slack);
                    cert.claim2_normalized = Some(c2.normalized_slack);
                    cert.claim1 = Some(claim1_diagnostic(chain, &c2.proper, phi));
                }
                Err(e) => cert.failure = Some(e),
            }
            cert
        })
        .collect();
    BoundCertificate {
        phi,
        method: conductance.method,
        rigorous: conductance.method == ConductanceMethod::Exact,
        vacuous: eigen.is_empty(),
        eigen,
    }
}

/// Upper bounds on a nontrivial eigenvalue implied by conductance `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundComparison<T> {
    /// `1 - phi^2 / 2`
    pub classical: T,
    /// `sqrt(1 - phi^2)`
    pub strengthened: T,
}

pub fn compare_bounds<T: Scalar>(phi: T) -> Result<BoundComparison<T>> {
    if !(phi >= T::zero() && phi <= T::one()) {
        return Err(Error::OutOfRange {
            what: "conductance",
            value: phi.as_f64(),
        });
    }
    let phi2 = phi * phi;
    Ok(BoundComparison {
        classical: T::one() - phi2 * T::half(),
        strengthened: (T::one() - phi2).sqrt(),
    })
}
