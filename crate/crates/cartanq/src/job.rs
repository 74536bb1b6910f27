//! Job files and command execution.
//!
//! Jobs are TOML documents; rationals are written as strings `"p/q"` so no
//! float ever enters the pipeline, and polynomial entries use the expression
//! grammar from [`crate::parse`]. Outputs are JSON with every map iterated in
//! canonical order, so identical jobs produce byte-identical output.
//!
//! ```toml
//! m = 2
//! lambda = "1/3"
//! mu = "8/15"
//! k = 1
//! alpha = ["x2", "0"]   # optional one-form for invariance checks
//!
//! [christoffel]   # symmetric keys "i,j,k" for Gamma^i_{jk}; absent = 0
//! "1,1,1" = "x2"
//!
//! [symbol]        # keys "i1,...,ik" per symmetric component; absent = 0
//! "1" = "1"
//! "2" = "x1"
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exact::poly::Poly;
use crate::exact::rational::parse_rational;
use crate::fiber::FiberFunction;
use crate::geometry::{cartan_curvature, normal_cartan, ChristoffelField, OneForm};
use crate::parse::parse_expression;
use crate::quantization::{
    critical_pairs, multi_indices, quantize, table_for, DifferentialOperator, Weights,
};
use crate::verify::{check_flat_equivariance, check_invariance, check_lemmas, SuiteOutcome};
use crate::{Error, Result};

/// Parsed job file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    /// Chart dimension.
    pub m: usize,
    /// Argument density weight, as `"p/q"`.
    pub lambda: String,
    /// Value density weight, as `"p/q"`.
    pub mu: String,
    /// Symbol degree / operator order.
    #[serde(default)]
    pub k: Option<usize>,
    /// Christoffel components keyed `"i,j,k"`, one-based.
    #[serde(default)]
    pub christoffel: BTreeMap<String, String>,
    /// Symbol components keyed by `k` one-based indices `"i1,...,ik"`.
    #[serde(default)]
    pub symbol: BTreeMap<String, String>,
    /// Optional one-form components for invariance checks.
    #[serde(default)]
    pub alpha: Option<Vec<String>>,
    /// Default order bound for scan/check commands.
    #[serde(default)]
    pub kmax: Option<usize>,
    /// Default seed for randomized check suites.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl JobFile {
    /// Parses a TOML job document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let job: JobFile =
            toml::from_str(text).map_err(|e| Error::InvalidJob(format!("TOML: {e}")))?;
        if job.m < 2 {
            return Err(Error::DimensionTooSmall(job.m));
        }
        Ok(job)
    }

    /// Reads and parses a job file from disk.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidJob(format!("cannot read {}: {e}", path.display())))?;
        JobFile::from_toml(&text)
    }

    /// The weight pair.
    pub fn weights(&self) -> Result<Weights> {
        Ok(Weights::new(
            parse_rational(&self.lambda)?,
            parse_rational(&self.mu)?,
        ))
    }

    fn parse_key(&self, key: &str, arity: usize) -> Result<Vec<usize>> {
        let parts: Vec<&str> = key.split(',').map(str::trim).collect();
        if parts.len() != arity {
            return Err(Error::InvalidJob(format!(
                "key `{key}` must have {arity} comma-separated indices"
            )));
        }
        parts
            .iter()
            .map(|p| {
                p.parse::<usize>()
                    .ok()
                    .filter(|&i| i >= 1 && i <= self.m)
                    .ok_or_else(|| {
                        Error::InvalidJob(format!(
                            "index `{p}` in key `{key}` out of 1..={}",
                            self.m
                        ))
                    })
            })
            .collect()
    }

    /// Builds the connection, deduplicating symmetric keys and rejecting
    /// conflicting duplicates.
    pub fn connection(&self) -> Result<ChristoffelField> {
        let m = self.m;
        let mut table: BTreeMap<(usize, usize, usize), Poly> = BTreeMap::new();
        for (key, expr) in &self.christoffel {
            let idx = self.parse_key(key, 3)?;
            let (i, j, k) = (idx[0] - 1, idx[1] - 1, idx[2] - 1);
            let (j, k) = if j <= k { (j, k) } else { (k, j) };
            let p = parse_expression(expr, m)?;
            if let Some(prev) = table.get(&(i, j, k)) {
                if *prev != p {
                    return Err(Error::InvalidJob(format!(
                        "conflicting values for symmetric Christoffel slot ({},{},{})",
                        i + 1,
                        j + 1,
                        k + 1
                    )));
                }
            }
            table.insert((i, j, k), p);
        }
        ChristoffelField::from_fn(m, |i, j, k| {
            let (a, b) = if j <= k { (j, k) } else { (k, j) };
            table
                .get(&(i, a, b))
                .cloned()
                .unwrap_or_else(|| Poly::zero(2 * m))
        })
    }

    /// Builds the degree-`k` symbol section of weight `delta`.
    pub fn symbol_section(&self, k: usize) -> Result<FiberFunction> {
        let m = self.m;
        let delta = self.weights()?.delta();
        let mut table: BTreeMap<Vec<u8>, Poly> = BTreeMap::new();
        for (key, expr) in &self.symbol {
            let idx = if k == 0 && key.trim().is_empty() {
                Vec::new()
            } else {
                self.parse_key(key, k)?
            };
            let mut sorted: Vec<u8> = idx.iter().map(|&i| (i - 1) as u8).collect();
            sorted.sort_unstable();
            let p = parse_expression(expr, m)?;
            if let Some(prev) = table.get(&sorted) {
                if *prev != p {
                    return Err(Error::InvalidJob(format!(
                        "conflicting values for symmetric symbol slot `{key}`"
                    )));
                }
            }
            table.insert(sorted, p);
        }
        Ok(crate::quantization::symbol_from_components(
            m, k, delta, &table,
        ))
    }

    /// The optional one-form.
    pub fn one_form(&self) -> Result<Option<OneForm>> {
        match &self.alpha {
            None => Ok(None),
            Some(comps) => {
                if comps.len() != self.m {
                    return Err(Error::InvalidJob(format!(
                        "alpha needs {} components",
                        self.m
                    )));
                }
                let polys = comps
                    .iter()
                    .map(|e| parse_expression(e, self.m))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some(OneForm::new(self.m, polys)?))
            }
        }
    }
}

/// Which randomized suites `check` runs.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum CheckSuite {
    /// Commutator-defect identities.
    Lemmas,
    /// Projective invariance under the job's one-form.
    Invariance,
    /// Flat symmetry-algebra equivariance plus mutation falsification.
    FlatEquivariance,
    /// All of the above.
    All,
}

/// A resolved command (flags already merged over job defaults).
#[derive(Clone, Debug)]
pub enum Command {
    /// Build the operator for the job's symbol.
    Quantize,
    /// Construct and report the normal Cartan data.
    NormalConnection,
    /// Enumerate critical pairs up to `kmax`.
    Criticality {
        /// Order bound of the scan.
        kmax: usize,
    },
    /// Run verification suites.
    Check {
        /// Suite selection.
        suite: CheckSuite,
        /// Seed for the instance stream.
        seed: u64,
        /// Order bound for the suites.
        kmax: usize,
    },
}

#[derive(Serialize)]
struct CriticalityReport {
    critical_pairs: Vec<(usize, usize)>,
    rescued: bool,
    zeroed_from: Option<usize>,
}

#[derive(Serialize)]
struct OperatorTerm {
    multi_index: Vec<u32>,
    coefficient: String,
}

#[derive(Serialize)]
struct QuantizeOutput {
    command: String,
    m: usize,
    k: usize,
    lambda: String,
    mu: String,
    delta: String,
    coefficients: Vec<String>,
    criticality: CriticalityReport,
    operator: Vec<OperatorTerm>,
}

#[derive(Serialize)]
struct TensorEntry {
    indices: Vec<usize>,
    expression: String,
}

#[derive(Serialize)]
struct NormalConnectionOutput {
    command: String,
    m: usize,
    p_tensor: Vec<TensorEntry>,
    torsion_component_zero: bool,
    g0_trace_zero: bool,
}

#[derive(Serialize)]
struct CriticalityOutput {
    command: String,
    m: usize,
    delta: String,
    kmax: usize,
    critical_pairs: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct CheckOutput {
    command: String,
    seed: u64,
    kmax: usize,
    passed: bool,
    suites: Vec<SuiteOutcome>,
}

fn operator_terms(m: usize, k: usize, d: &DifferentialOperator) -> Vec<OperatorTerm> {
    // every multi-index up to the order, including zero coefficients, so the
    // output shape is independent of sparsity
    multi_indices(m, k)
        .into_iter()
        .map(|alpha| OperatorTerm {
            coefficient: d.coefficient(&alpha).to_string(),
            multi_index: alpha,
        })
        .collect()
}

/// Executes a command against a job, returning the JSON output document.
pub fn run_command(cmd: &Command, job: &JobFile) -> Result<serde_json::Value> {
    let w = job.weights()?;
    match cmd {
        Command::Quantize => {
            let k = job
                .k
                .ok_or_else(|| Error::InvalidJob("quantize needs `k`".into()))?;
            let g = job.connection()?;
            let s = job.symbol_section(k)?;
            let table = table_for(job.m, k, &w)?;
            let d = quantize(&g, &s, &w)?;
            let out = QuantizeOutput {
                command: "quantize".into(),
                m: job.m,
                k,
                lambda: w.lambda.to_string(),
                mu: w.mu.to_string(),
                delta: w.delta().to_string(),
                coefficients: table.c.iter().map(|c| c.to_string()).collect(),
                criticality: CriticalityReport {
                    critical_pairs: table.critical.clone(),
                    rescued: table.zeroed_from.is_some(),
                    zeroed_from: table.zeroed_from,
                },
                operator: operator_terms(job.m, k, &d),
            };
            Ok(serde_json::to_value(out).expect("serializable"))
        }
        Command::NormalConnection => {
            let g = job.connection()?;
            let nc = normal_cartan(&g)?;
            let om = cartan_curvature(&nc);
            let mut entries = Vec::new();
            for j in 0..job.m {
                for l in 0..job.m {
                    entries.push(TensorEntry {
                        indices: vec![j + 1, l + 1],
                        expression: nc.p_tensor[j][l].to_string(),
                    });
                }
            }
            let out = NormalConnectionOutput {
                command: "normal-connection".into(),
                m: job.m,
                p_tensor: entries,
                torsion_component_zero: om.minus_one.iter().all(Poly::is_zero),
                g0_trace_zero: om.zero_trace().iter().flatten().all(Poly::is_zero),
            };
            Ok(serde_json::to_value(out).expect("serializable"))
        }
        Command::Criticality { kmax } => {
            let delta = w.delta();
            let out = CriticalityOutput {
                command: "criticality".into(),
                m: job.m,
                delta: delta.to_string(),
                kmax: *kmax,
                critical_pairs: critical_pairs(job.m, *kmax, &delta),
            };
            Ok(serde_json::to_value(out).expect("serializable"))
        }
        Command::Check { suite, seed, kmax } => {
            let mut suites = Vec::new();
            if matches!(suite, CheckSuite::Lemmas | CheckSuite::All) {
                suites.push(check_lemmas(job.m, (*kmax).min(3), 5, *seed));
            }
            if matches!(suite, CheckSuite::Invariance | CheckSuite::All) {
                let g = job.connection()?;
                let alpha = job.one_form()?.ok_or_else(|| {
                    Error::InvalidJob("invariance check needs `alpha` in the job".into())
                })?;
                suites.push(check_invariance(&g, &alpha, &w, *kmax, *seed));
            }
            if matches!(suite, CheckSuite::FlatEquivariance | CheckSuite::All) {
                suites.push(check_flat_equivariance(job.m, &w, *kmax, *seed));
            }
            let passed = suites.iter().all(|s| s.passed);
            let out = CheckOutput {
                command: "check".into(),
                seed: *seed,
                kmax: *kmax,
                passed,
                suites,
            };
            Ok(serde_json::to_value(out).expect("serializable"))
        }
    }
}

/// Exit code for an error, per the command-line contract: 2 for input
/// problems, 3 when no quantization exists, 4 for internal violations.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidJob(_)
        | Error::Syntax { .. }
        | Error::UnknownVariable { .. }
        | Error::DimensionTooSmall(_)
        | Error::DegreeMismatch(..)
        | Error::DegreeZero => 2,
        Error::CriticalDelta { .. } | Error::NoExistence(_) => 3,
        Error::SingularSystem(_)
        | Error::NotFiberConstant(_)
        | Error::ConventionViolation(_)
        | Error::Internal(_) => 4,
    }
}

/// Machine-readable error document.
pub fn error_json(e: &Error) -> serde_json::Value {
    serde_json::json!({
        "error": e.to_string(),
        "kind": match e {
            Error::SingularSystem(_) => "singular-system",
            Error::DimensionTooSmall(_) => "dimension-too-small",
            Error::NotFiberConstant(_) => "not-fiber-constant",
            Error::DegreeZero => "degree-zero",
            Error::DegreeMismatch(..) => "degree-mismatch",
            Error::ConventionViolation(_) => "convention-violation",
            Error::CriticalDelta { .. } => "critical-delta",
            Error::NoExistence(_) => "no-existence",
            Error::Syntax { .. } => "syntax",
            Error::UnknownVariable { .. } => "unknown-variable",
            Error::InvalidJob(_) => "invalid-job",
            Error::Internal(_) => "internal",
        },
        "exit_code": exit_code(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
m = 2
lambda = "1/3"
mu = "8/15"
k = 1
alpha = ["x2", "0"]

[christoffel]
"1,1,1" = "x2"
"1,2,1" = "x1 - x2"

[symbol]
"1" = "1"
"2" = "x1"
"#;

    #[test]
    fn job_round_trip() {
        let job = JobFile::from_toml(SAMPLE).unwrap();
        assert_eq!(job.m, 2);
        let w = job.weights().unwrap();
        assert_eq!(w.delta(), crate::exact::rational::rat(1, 5));
        let g = job.connection().unwrap();
        // symmetric key dedup: "1,2,1" also fills Gamma^1_{12}
        assert_eq!(g.gamma(0, 0, 1), g.gamma(0, 1, 0));
        let s = job.symbol_section(1).unwrap();
        assert_eq!(*s.component(&[], &[0]), Poly::one(4));
        assert!(job.one_form().unwrap().is_some());
    }

    #[test]
    fn conflicting_symmetric_keys_rejected() {
        let bad = r#"
m = 2
lambda = "0"
mu = "0"

[christoffel]
"1,1,2" = "x1"
"1,2,1" = "x2"
"#;
        let job = JobFile::from_toml(bad).unwrap();
        assert!(matches!(job.connection(), Err(Error::InvalidJob(_))));
    }

    #[test]
    fn quantize_k0_is_multiplication() {
        let text = r#"
m = 2
lambda = "1/2"
mu = "1/2"
k = 0

[symbol]
"" = "x1 + 1"
"#;
        let job = JobFile::from_toml(text).unwrap();
        let out = run_command(&Command::Quantize, &job).unwrap();
        let op = out["operator"].as_array().unwrap();
        assert_eq!(op.len(), 1);
        assert_eq!(op[0]["coefficient"], "x1 + 1");
        assert_eq!(out["coefficients"][0], "1");
    }

    #[test]
    fn criticality_command() {
        let text = r#"
m = 2
lambda = "0"
mu = "1"
"#;
        let job = JobFile::from_toml(text).unwrap();
        let out = run_command(&Command::Criticality { kmax: 3 }, &job).unwrap();
        let pairs = out["critical_pairs"].as_array().unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0][0], 1);
        assert_eq!(pairs[0][1], 1);
    }

    #[test]
    fn outputs_are_deterministic() {
        let job = JobFile::from_toml(SAMPLE).unwrap();
        let a =
            serde_json::to_string_pretty(&run_command(&Command::Quantize, &job).unwrap()).unwrap();
        let b =
            serde_json::to_string_pretty(&run_command(&Command::Quantize, &job).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn emitted_coefficients_reparse() {
        let job = JobFile::from_toml(SAMPLE).unwrap();
        let out = run_command(&Command::Quantize, &job).unwrap();
        for term in out["operator"].as_array().unwrap() {
            let text = term["coefficient"].as_str().unwrap();
            let p = crate::parse::parse_expression(text, 2).unwrap();
            assert_eq!(p.to_string(), text);
        }
    }
}
