//! Randomized certification over a seeded corpus.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use cheeger_core::generators::corpus_spec;
use cheeger_core::io::ChainFile;
use cheeger_core::{build, ChainSpec, Family};

use crate::error::{CliError, EXIT_INTERNAL, EXIT_OK, EXIT_VIOLATION};
use crate::pipeline::{analyze_chain, verify_report, Options};
use crate::report::{VerifyReport, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzConfig {
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
}

/// Corpus parameters of one chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainId {
    pub index: usize,
    pub n: usize,
    pub density: f64,
    pub seed: u64,
}

impl ChainId {
    fn new(index: usize, spec: &ChainSpec) -> Self {
        match spec.family {
            Family::RandomReversible { n, density, seed } => Self {
                index,
                n,
                density,
                seed,
            },
            _ => unreachable!("corpus chains are random reversible"),
        }
    }
}

/// Chain attaining the minimum of one slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub metric: &'static str,
    pub value: f64,
    pub chain: ChainId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub chain: ChainId,
    pub error: CliError,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzSummary {
    pub schema_version: &'static str,
    pub seed: u64,
    pub n_range: [usize; 2],
    pub chains_tested: usize,
    pub eigenvalues_certified: usize,
    pub uncertifiable: usize,
    pub vacuous_chains: usize,
    pub failed_chains: usize,
    pub min_classical_slack: Option<f64>,
    pub min_new_slack: Option<f64>,
    pub min_claim2_slack: Option<f64>,
    pub min_claim1_lower_slack: Option<f64>,
    pub min_claim1_upper_slack: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub violations: Vec<String>,
    pub errors: Vec<Failure>,
}

impl FuzzSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failed_chains > 0 {
            EXIT_VIOLATION
        } else if !self.errors.is_empty() {
            EXIT_INTERNAL
        } else {
            EXIT_OK
        }
    }
}

struct Outcome {
    id: ChainId,
    file: ChainFile,
    result: Result<VerifyReport, CliError>,
}

type Metric = (&'static str, fn(&VerifyReport) -> Option<f64>);

const METRICS: [Metric; 5] = [
    ("classical_slack", |r| r.min_classical_slack),
    ("new_slack", |r| r.min_new_slack),
    ("claim2_slack", |r| r.min_claim2_slack),
    ("claim1_lower_slack", |r| r.min_claim1_lower_slack),
    ("claim1_upper_slack", |r| r.min_claim1_upper_slack),
];

fn run_one(index: usize, cfg: &FuzzConfig, opts: &Options) -> Outcome {
    let spec = corpus_spec(index as u64, cfg.n_min, cfg.n_max, cfg.seed);
    let id = ChainId::new(index, &spec);
    let chain = build::<f64>(&spec, &opts.tol).expect("corpus chains are valid by construction");
    let result = analyze_chain(&chain, opts).map(|a| verify_report(&chain, &a));
    Outcome {
        id,
        file: ChainFile::from_chain(&chain),
        result,
    }
}

/// Certifies `cfg.count` corpus chains in parallel. Results are merged in
/// index order, so the summary depends only on the configuration. With
/// `witness_dir`, the chain attaining each minimum slack is written there.
pub fn run_fuzz(cfg: &FuzzConfig, opts: &Options, witness_dir: Option<&Path>) -> Result<FuzzSummary, CliError> {
    if cfg.count == 0 {
        return Err(CliError::invalid("ValidationError", "count must be at least 1"));
    }
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
        return Err(CliError::invalid(
            "ValidationError",
            format!("bad size range [{}, {}]", cfg.n_min, cfg.n_max),
        ));
    }
    let outcomes: Vec<Outcome> = (0..cfg.count).into_par_iter().map(|k| run_one(k, cfg, opts)).collect();

    let mut summary = FuzzSummary {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        n_range: [cfg.n_min, cfg.n_max],
        chains_tested: cfg.count,
        eigenvalues_certified: 0,
        uncertifiable: 0,
        vacuous_chains: 0,
        failed_chains: 0,
        min_classical_slack: None,
        min_new_slack: None,
        min_claim2_slack: None,
        min_claim1_lower_slack: None,
        min_claim1_upper_slack: None,
        witnesses: Vec::new(),
        violations: Vec::new(),
        errors: Vec::new(),
    };
    let mut worst: Vec<Option<(f64, usize)>> = vec![None; METRICS.len()];
    for (k, o) in outcomes.iter().enumerate() {
        let r = match &o.result {
            Ok(r) => r,
            Err(e) => {
                summary.errors.push(Failure {
                    chain: o.id.clone(),
                    error: e.clone(),
                });
                continue;
            }
        };
        summary.eigenvalues_certified += r.eigenvalues_certified;
        summary.uncertifiable += r.uncertifiable;
        summary.vacuous_chains += usize::from(r.vacuous);
        summary.failed_chains += usize::from(r.status == "FAIL");
        summary
            .violations
            .extend(r.violations.iter().map(|v| format!("chain {k}: {v}")));
        for (slot, (_, get)) in worst.iter_mut().zip(METRICS) {
            if let Some(v) = get(r) {
                if slot.is_none_or(|(best, _)| v < best) {
                    *slot = Some((v, k));
                }
            }
        }
    }
    let mins = worst.iter().map(|w| w.map(|(v, _)| v)).collect::<Vec<_>>();
    summary.min_classical_slack = mins[0];
    summary.min_new_slack = mins[1];
    summary.min_claim2_slack = mins[2];
    summary.min_claim1_lower_slack = mins[3];
    summary.min_claim1_upper_slack = mins[4];

    if let Some(dir) = witness_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    }
    for ((metric, _), w) in METRICS.iter().zip(&worst) {
        let Some((value, k)) = *w else { continue };
        let file = match witness_dir {
            Some(dir) => {
                let path = dir.join(format!("witness_{metric}.json"));
                std::fs::write(&path, outcomes[k].file.to_json())
                    .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
                Some(path.display().to_string())
            }
            None => None,
        };
        summary.witnesses.push(Witness {
            metric,
            value,
            chain: outcomes[k].id.clone(),
            file,
        });
    }
    Ok(summary)
}
