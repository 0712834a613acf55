//! Identity suites: each suite evaluates both sides of one family of identities
//! over a small lattice corpus and reports the largest deviation.

mod algebraic;
mod analytic;
mod local;

pub use local::k3_hypothesis_check;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Default accuracy target `ε` of the theta evaluations.
pub const DEFAULT_EPS: f64 = 1e-8;

/// Tolerance of the exact-in-principle floating identities (Weil representation).
pub const REPRESENTATION_TOLERANCE: f64 = 1e-12;

/// All suite names, in report order.
pub const SUITES: [&str; 15] = [
    "milgram",
    "weil-relations",
    "jacobi-compat",
    "kiefer",
    "poly-symbolic",
    "theta-modularity",
    "jacobi-modularity",
    "splitting",
    "fourier-jacobi",
    "poincare",
    "s-cases",
    "schrodinger",
    "eichler",
    "local-splits",
    "representation-oracle",
];

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub lattice: String,
    pub parameters: Value,
    pub max_deviation: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Seconds; zero when timing is disabled for reproducible reports.
    pub wall_time: f64,
}

impl CheckResult {
    /// `passed` is set to `max_deviation ≤ threshold` (NaN fails).
    pub fn new(
        name: impl Into<String>,
        lattice: impl Into<String>,
        parameters: Value,
        max_deviation: f64,
        threshold: f64,
    ) -> Self {
        CheckResult {
            name: name.into(),
            lattice: lattice.into(),
            parameters,
            max_deviation,
            threshold,
            passed: max_deviation <= threshold,
            wall_time: 0.0,
        }
    }
}

/// A point `τ = [[τ₁, τ₂], [τ₂, τ₃]]` stored as three `[re, im]` pairs.
pub type TauEntries = [[f64; 2]; 3];

/// Parameters shared by all suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub eps: f64,
    pub tau_grid: Vec<TauEntries>,
    pub corpus: Vec<String>,
    pub coset_bound: i64,
    pub n_bound: i64,
    pub splitting_bounds: Vec<i64>,
    pub seed: u64,
    pub record_timing: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            eps: DEFAULT_EPS,
            tau_grid: vec![
                [[0.0, 1.0], [0.0, 0.0], [0.0, 1.0]],
                [[0.1, 1.0], [0.05, 0.02], [-0.1, 1.1]],
                [[-0.2, 0.9], [0.1, -0.05], [0.15, 1.05]],
                [[0.05, 1.2], [-0.1, 0.1], [0.0, 0.95]],
                [[0.3, 1.0], [0.0, 0.1], [-0.3, 1.0]],
            ],
            corpus: ["U+U", "U+A1", "U+U+A1", "U(2)+A1", "U+U+A2"].map(String::from).to_vec(),
            coset_bound: 5,
            n_bound: 4,
            splitting_bounds: vec![0, 1, 2, 4],
            seed: 20240611,
            record_timing: true,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidInput(format!("ε = {} must lie in (0, 1)", self.eps)));
        }
        if self.tau_grid.is_empty() {
            return Err(Error::InvalidInput("τ grid is empty".into()));
        }
        for t in &self.tau_grid {
            let (y1, y2, y3) = (t[0][1], t[1][1], t[2][1]);
            if !(y1 > 0.0 && y1 * y3 - y2 * y2 > 0.0) {
                return Err(Error::InvalidInput(format!("Im τ of {t:?} is not positive definite")));
            }
        }
        if self.coset_bound < 0 || self.n_bound < 1 {
            return Err(Error::InvalidInput("bounds must be coset ≥ 0, n ≥ 1".into()));
        }
        if self.splitting_bounds.iter().any(|&b| b < 0) {
            return Err(Error::InvalidInput("splitting bounds must be non-negative".into()));
        }
        Ok(())
    }

    /// Working accuracy handed to the theta evaluations: well below the pass
    /// threshold so that truncation does not dominate the reported deviation.
    pub(crate) fn work_eps(&self) -> f64 {
        self.eps * 1e-2
    }

    pub(crate) fn float_threshold(&self) -> f64 {
        5.0 * self.eps
    }
}

/// Run one named suite.
pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    config.validate()?;
    let start = Instant::now();
    let mut results = match name {
        "milgram" => algebraic::milgram(config),
        "weil-relations" => algebraic::weil_relations(config),
        "jacobi-compat" => algebraic::jacobi_compat(config),
        "kiefer" => algebraic::kiefer(config),
        "poly-symbolic" => algebraic::poly_symbolic(config),
        "eichler" => algebraic::eichler(config),
        "theta-modularity" => analytic::theta_modularity(config),
        "jacobi-modularity" => analytic::jacobi_modularity(config),
        "splitting" => analytic::splitting(config),
        "fourier-jacobi" => analytic::fourier_jacobi(config),
        "poincare" => analytic::poincare(config),
        "s-cases" => analytic::s_cases(config),
        "schrodinger" => analytic::schrodinger(config),
        "local-splits" => local::local_splits(config),
        "representation-oracle" => local::representation_oracle(config),
        _ => return Err(Error::InvalidInput(format!("unknown suite {name:?}; known: {}", SUITES.join(", ")))),
    }?;
    if config.record_timing {
        // Individual checks are cheap relative to setup; report the suite average.
        let per = start.elapsed().as_secs_f64() / results.len().max(1) as f64;
        for r in &mut results {
            r.wall_time = per;
        }
    }
    Ok(results)
}

/// Run several suites concurrently; results are returned in the order of `names`.
pub fn run_suites(names: &[&str], config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let per: Vec<Result<Vec<CheckResult>>> = names.par_iter().map(|n| run_suite(n, config)).collect();
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

/// Run every suite plus the K3 hypothesis check for `d ∈ {1, 2, 3}`.
pub fn run_all(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = run_suites(&SUITES, config)?;
    for d in 1..=3 {
        let mut r = k3_hypothesis_check(d)?;
        if !config.record_timing {
            r.wall_time = 0.0;
        }
        out.push(r);
    }
    Ok(out)
}

/// Serialise a report as a pretty JSON array.
pub fn report_json(results: &[CheckResult]) -> String {
    serde_json::to_string_pretty(results).expect("reports serialise")
}

/// Deterministic per-suite random generator derived from the configured seed.
pub(crate) fn rng_for(config: &SuiteConfig, salt: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(config.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let c = SuiteConfig::default();
        c.validate().unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: SuiteConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let partial: SuiteConfig = serde_json::from_str(r#"{"eps": 1e-6}"#).unwrap();
        assert_eq!(partial.eps, 1e-6);
        assert_eq!(partial.corpus, c.corpus);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = SuiteConfig { eps: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SuiteConfig { tau_grid: vec![[[0.0, -1.0], [0.0, 0.0], [0.0, 1.0]]], ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(matches!(run_suite("nope", &SuiteConfig::default()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn passed_matches_threshold() {
        let r = CheckResult::new("x", "A1", Value::Null, 1e-3, 1e-2);
        assert!(r.passed);
        let r = CheckResult::new("x", "A1", Value::Null, f64::NAN, 1e-2);
        assert!(!r.passed);
    }
}
