//! JSON report schema (version "1").

use serde::Serialize;

use cheeger_core::{
    BoundCertificateF64, BoundComparison, ConductanceMethod, ConductanceResultF64, EigenCertificate, ErgodicityReport,
    SpectrumReportF64,
};

pub const SCHEMA_VERSION: &str = "1";

/// Fixed accuracy target of the mixing-time estimate.
pub const MIXING_EPSILON: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainMeta {
    pub n: usize,
    pub source: String,
    /// `column`, `row` (transposed on load) or `graph` (TSV random walk).
    pub convention: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laziness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityJson {
    pub irreducible: bool,
    pub aperiodic: bool,
    pub period: Option<usize>,
}

impl From<ErgodicityReport> for ErgodicityJson {
    fn from(e: ErgodicityReport) -> Self {
        Self {
            irreducible: e.irreducible,
            aperiodic: e.aperiodic,
            period: e.period,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumJson {
    pub eigenvalues: Vec<f64>,
    pub positive_nontrivial: Vec<f64>,
    /// `P^T` eigenvectors in eigenvalue order, only with `--full`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl SpectrumJson {
    pub fn new(s: &SpectrumReportF64, full: bool) -> Self {
        Self {
            eigenvalues: s.eigenvalues().to_vec(),
            positive_nontrivial: s.positive_nontrivial(),
            eigenvectors: full.then(|| s.eigvecs_pt().to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ConductanceJson {
    Defined {
        phi: f64,
        subset: Vec<usize>,
        mass: f64,
        flow: f64,
        method: ConductanceMethod,
    },
    Undefined(String),
}

impl From<&ConductanceResultF64> for ConductanceJson {
    fn from(r: &ConductanceResultF64) -> Self {
        ConductanceJson::Defined {
            phi: r.phi,
            subset: r.argmin.members().to_vec(),
            mass: r.argmin.mass(),
            flow: r.flow,
            method: r.method,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim1Json {
    /// `phi^2 |f|^4`
    pub lhs: f64,
    pub middle: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenJson {
    pub index: usize,
    pub lambda: f64,
    pub classical_slack: f64,
    pub new_slack: f64,
    pub claim2_slack: Option<f64>,
    pub claim1: Option<Claim1Json>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl From<&EigenCertificate<f64>> for EigenJson {
    fn from(e: &EigenCertificate<f64>) -> Self {
        Self {
            index: e.index,
            lambda: e.lambda,
            classical_slack: e.classical_slack,
            new_slack: e.new_slack,
            claim2_slack: e.claim2_slack,
            claim1: e.claim1.map(|d| Claim1Json {
                lhs: d.phi_norm4,
                middle: d.middle,
                rhs: d.rhs,
            }),
            failure: e.failure.as_ref().map(|f| f.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateJson {
    pub phi: f64,
    pub vacuous: bool,
    pub rigorous: bool,
    pub eigen: Vec<EigenJson>,
    pub passed: bool,
    pub violations: Vec<String>,
}

impl From<&BoundCertificateF64> for CertificateJson {
    fn from(c: &BoundCertificateF64) -> Self {
        Self {
            phi: c.phi,
            vacuous: c.vacuous,
            rigorous: c.rigorous,
            eigen: c.eigen.iter().map(EigenJson::from).collect(),
            passed: c.passed(),
            violations: c.violations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Section<T> {
    Present(T),
    Undefined(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsJson {
    /// `1 - phi^2 / 2`
    pub classical: f64,
    /// `sqrt(1 - phi^2)`
    pub strengthened: f64,
}

impl From<BoundComparison<f64>> for BoundsJson {
    fn from(b: BoundComparison<f64>) -> Self {
        Self {
            classical: b.classical,
            strengthened: b.strengthened,
        }
    }
}

/// `ln(1 / (epsilon * min pi)) / (1 - max_{k >= 2} |mu_k|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingJson {
    pub t_est: f64,
    pub epsilon: f64,
    pub heuristic: bool,
}

impl MixingJson {
    pub fn estimate(min_pi: f64, second_modulus: f64) -> Option<Self> {
        let gap = 1.0 - second_modulus;
        let t_est = (1.0 / (MIXING_EPSILON * min_pi)).ln() / gap;
        (gap > 0.0 && t_est.is_finite()).then_some(Self {
            t_est,
            epsilon: MIXING_EPSILON,
            heuristic: true,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: &'static str,
    pub chain: ChainMeta,
    pub ergodicity: ErgodicityJson,
    pub stationary: Vec<f64>,
    pub detailed_balance_violation: f64,
    pub spectrum: SpectrumJson,
    pub conductance: ConductanceJson,
    pub certificate: Section<CertificateJson>,
    pub bounds: Section<BoundsJson>,
    pub mixing_time_estimate: Option<MixingJson>,
    pub timing_ms: f64,
}

/// Certification-only output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: &'static str,
    pub status: &'static str,
    pub n: usize,
    pub phi: Option<f64>,
    pub method: Option<ConductanceMethod>,
    pub rigorous: bool,
    pub vacuous: bool,
    pub eigenvalues_certified: usize,
    pub uncertifiable: usize,
    pub min_classical_slack: Option<f64>,
    pub min_new_slack: Option<f64>,
    /// `(<f, P^T f> - lambda |f|^2) / |f|^2`
    pub min_claim2_slack: Option<f64>,
    /// `(telescoping - phi |f|^2) / |f|^2`
    pub min_claim1_lower_slack: Option<f64>,
    /// `(|f|^4 - <f, P^T f>^2 - telescoping^2) / |f|^4`
    pub min_claim1_upper_slack: Option<f64>,
    pub violations: Vec<String>,
    pub eigen: Vec<EigenJson>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.status == "PASS"
    }
}
