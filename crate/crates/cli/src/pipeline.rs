//! Loading, analysis and certification of a single chain.

use std::time::Instant;

use cheeger_core::io::{parse_input, ChainFile, ChainInput};
use cheeger_core::{
    build, certify, compare_bounds, exact_conductance, spectrum, sweep_with_fallback, BoundCertificateF64, ChainSpec,
    ConductanceResultF64, Family, ReversibleChainF64, SpectrumReportF64, Tolerances, DEFAULT_MAX_EXACT_N,
};

use crate::error::{CliError, EXIT_OK, EXIT_VIOLATION};
use crate::report::{
    AnalysisReport, BoundsJson, CertificateJson, ChainMeta, ConductanceJson, EigenJson, MixingJson, Section,
    SpectrumJson, VerifyReport, SCHEMA_VERSION,
};

const UNDEFINED_N1: &str = "undefined (n=1)";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub tol: Tolerances,
    pub max_exact_n: usize,
    pub sweep_only: bool,
    /// Include eigenvectors in the report.
    pub full: bool,
    /// Laziness applied to a random walk read from a graph TSV.
    pub alpha: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            max_exact_n: DEFAULT_MAX_EXACT_N,
            sweep_only: false,
            full: false,
            alpha: 0.0,
        }
    }
}

/// A validated chain with its provenance.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub chain: ReversibleChainF64,
    pub meta: ChainMeta,
}

pub fn load(text: &str, source: &str, opts: &Options) -> Result<Loaded, CliError> {
    let (chain, convention, laziness) = match parse_input(text)? {
        ChainInput::Matrix(file) => {
            let p = file.to_matrix::<f64>(opts.tol.stochastic)?;
            let chain = ReversibleChainF64::from_matrix(p, &opts.tol)?;
            (chain, file.convention.to_string(), None)
        }
        ChainInput::Graph(edges) => {
            let spec = ChainSpec::new(Family::WalkOnGraph { edges }).lazy(opts.alpha);
            (build::<f64>(&spec, &opts.tol)?, "graph".to_string(), Some(opts.alpha))
        }
    };
    let meta = ChainMeta {
        n: chain.n(),
        source: source.to_string(),
        convention,
        laziness,
    };
    Ok(Loaded { chain, meta })
}

/// Results of the full pipeline on one chain.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub spectrum: SpectrumReportF64,
    /// `None` for a single-state chain.
    pub conductance: Option<ConductanceResultF64>,
    pub certificate: Option<BoundCertificateF64>,
}

impl Analysis {
    /// A rigorous certificate with a slack below the floor.
    pub fn violated(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.rigorous && !c.passed())
    }

    pub fn exit_code(&self) -> i32 {
        if self.violated() {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        }
    }
}

pub fn analyze_chain(chain: &ReversibleChainF64, opts: &Options) -> Result<Analysis, CliError> {
    let spectrum = spectrum(chain)?;
    if chain.n() == 1 {
        return Ok(Analysis {
            spectrum,
            conductance: None,
            certificate: None,
        });
    }
    let conductance = if opts.sweep_only {
        sweep_with_fallback(chain, spectrum.eigvec_pt(1))?
    } else {
        exact_conductance(chain, opts.max_exact_n)?
    };
    let certificate = certify(chain, &spectrum, &conductance, &opts.tol);
    Ok(Analysis {
        spectrum,
        conductance: Some(conductance),
        certificate: Some(certificate),
    })
}

pub fn analysis_report(
    loaded: &Loaded,
    a: &Analysis,
    opts: &Options,
    started: Instant,
) -> Result<AnalysisReport, CliError> {
    let chain = &loaded.chain;
    let undefined = || UNDEFINED_N1.to_string();
    let bounds = match &a.conductance {
        Some(c) => Section::Present(BoundsJson::from(compare_bounds(c.phi)?)),
        None => Section::Undefined(undefined()),
    };
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        chain: loaded.meta.clone(),
        ergodicity: chain.ergodicity().into(),
        stationary: chain.stationary().as_slice().to_vec(),
        detailed_balance_violation: chain.max_detailed_balance_violation(),
        spectrum: SpectrumJson::new(&a.spectrum, opts.full),
        conductance: a
            .conductance
            .as_ref()
            .map_or_else(|| ConductanceJson::Undefined(undefined()), ConductanceJson::from),
        certificate: a.certificate.as_ref().map_or_else(
            || Section::Undefined(undefined()),
            |c| Section::Present(CertificateJson::from(c)),
        ),
        bounds,
        mixing_time_estimate: MixingJson::estimate(chain.stationary().min(), a.spectrum.second_largest_modulus()),
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn verify_report(chain: &ReversibleChainF64, a: &Analysis) -> VerifyReport {
    let c = a.certificate.as_ref();
    let min = |f: fn(&BoundCertificateF64) -> Option<f64>| c.and_then(f);
    let violations = c.map(|c| c.violations()).unwrap_or_default();
    let status = match c {
        Some(c) if !c.passed() && c.rigorous => "FAIL",
        Some(c) if !c.passed() => "INCONCLUSIVE",
        _ => "PASS",
    };
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        status,
        n: chain.n(),
        phi: a.conductance.as_ref().map(|c| c.phi),
        method: a.conductance.as_ref().map(|c| c.method),
        rigorous: c.is_some_and(|c| c.rigorous),
        vacuous: c.is_none_or(|c| c.vacuous),
        eigenvalues_certified: c.map_or(0, |c| c.eigen.len() - c.uncertifiable_count()),
        uncertifiable: c.map_or(0, |c| c.uncertifiable_count()),
        min_classical_slack: min(|c| c.min_classical_slack()),
        min_new_slack: min(|c| c.min_new_slack()),
        min_claim2_slack: min(|c| c.min_claim2_normalized()),
        min_claim1_lower_slack: min(|c| c.min_claim1_lower()),
        min_claim1_upper_slack: min(|c| c.min_claim1_upper()),
        violations,
        eigen: c
            .map(|c| c.eigen.iter().map(EigenJson::from).collect())
            .unwrap_or_default(),
    }
}

/// `analyze` on raw input text; returns the report and its exit code.
pub fn run_analyze(text: &str, source: &str, opts: &Options) -> Result<(AnalysisReport, i32), CliError> {
    let started = Instant::now();
    let loaded = load(text, source, opts)?;
    let a = analyze_chain(&loaded.chain, opts)?;
    let report = analysis_report(&loaded, &a, opts, started)?;
    Ok((report, a.exit_code()))
}

/// `verify` on raw input text; returns the summary and its exit code.
pub fn run_verify(text: &str, source: &str, opts: &Options) -> Result<(VerifyReport, i32), CliError> {
    let loaded = load(text, source, opts)?;
    let a = analyze_chain(&loaded.chain, opts)?;
    Ok((verify_report(&loaded.chain, &a), a.exit_code()))
}

/// Column-convention JSON for a generated chain.
pub fn run_generate(spec: &ChainSpec, tol: &Tolerances) -> Result<ChainFile, CliError> {
    let chain = build::<f64>(spec, tol)?;
    Ok(ChainFile::from_chain(&chain))
}
