//! Experiment configuration: a single JSON document describing the system,
//! the potential, and the knobs of every command.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use subpressure::{
    BaseSystem, Error, MatrixNorm, MetricParams, PhiStarOptions, PotentialSeq, RandomMarkovMeasure, RandomSft,
    SquareMatrix, VariationalOptions,
};

/// A configuration problem with the JSON field it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "config error at line {l}, column {c}, field `{}`: {}", self.field, self.message),
            _ => write!(f, "config error in field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn field_error(field: &str, err: impl fmt::Display) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        line: None,
        column: None,
        message: err.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub schedules: Schedules,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub power: PowerConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Base permutation, weights and per-fiber transition matrices. `perm`
/// defaults to the identity and `weights` to uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub alphabet: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// `[fiber][row][col]` 0/1 entries.
    pub transitions: Vec<Vec<Vec<u8>>>,
}

/// Potential description. Tables and matrix lists given for a single fiber
/// apply to every fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub enum PotentialConfig {
    Zero,
    Constant {
        c: f64,
    },
    /// `table[fiber][index of the depth-word in base a]`.
    Additive {
        depth: usize,
        table: Vec<Vec<f64>>,
    },
    /// `matrices[fiber][symbol]` as row lists.
    MatrixCocycle {
        norm: MatrixNorm,
        matrices: Vec<Vec<Vec<Vec<f64>>>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PotentialTag {
    Zero,
    Constant,
    Additive,
    MatrixCocycle,
}

/// Flat wire form, so that type errors point at the offending field.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    kind: PotentialTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm: Option<MatrixNorm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrices: Option<Vec<Vec<Vec<Vec<f64>>>>>,
}

/// Names of the fields that are set, for rejecting those a kind does not use.
fn present(fields: &[(&'static str, bool)]) -> Vec<&'static str> {
    fields.iter().filter(|f| f.1).map(|f| f.0).collect()
}

fn only(kind: &str, allowed: &[&str], set: &[&'static str]) -> Result<(), String> {
    match set.iter().find(|f| !allowed.contains(f)) {
        Some(f) => Err(format!("field `{f}` does not apply to kind `{kind}`")),
        None => Ok(()),
    }
}

fn required<T>(kind: &str, name: &str, v: Option<T>) -> Result<T, String> {
    v.ok_or_else(|| format!("kind `{kind}` requires field `{name}`"))
}

impl TryFrom<RawPotential> for PotentialConfig {
    type Error = String;

    fn try_from(r: RawPotential) -> Result<Self, String> {
        let set = present(&[
            ("c", r.c.is_some()),
            ("depth", r.depth.is_some()),
            ("table", r.table.is_some()),
            ("norm", r.norm.is_some()),
            ("matrices", r.matrices.is_some()),
        ]);
        Ok(match r.kind {
            PotentialTag::Zero => {
                only("zero", &[], &set)?;
                PotentialConfig::Zero
            }
            PotentialTag::Constant => {
                only("constant", &["c"], &set)?;
                PotentialConfig::Constant { c: required("constant", "c", r.c)? }
            }
            PotentialTag::Additive => {
                only("additive", &["depth", "table"], &set)?;
                PotentialConfig::Additive {
                    depth: required("additive", "depth", r.depth)?,
                    table: required("additive", "table", r.table)?,
                }
            }
            PotentialTag::MatrixCocycle => {
                only("matrix_cocycle", &["norm", "matrices"], &set)?;
                PotentialConfig::MatrixCocycle {
                    norm: r.norm.unwrap_or_default(),
                    matrices: required("matrix_cocycle", "matrices", r.matrices)?,
                }
            }
        })
    }
}

impl From<PotentialConfig> for RawPotential {
    fn from(p: PotentialConfig) -> Self {
        let mut r = RawPotential {
            kind: PotentialTag::Zero,
            c: None,
            depth: None,
            table: None,
            norm: None,
            matrices: None,
        };
        match p {
            PotentialConfig::Zero => {}
            PotentialConfig::Constant { c } => {
                r.kind = PotentialTag::Constant;
                r.c = Some(c);
            }
            PotentialConfig::Additive { depth, table } => {
                r.kind = PotentialTag::Additive;
                r.depth = Some(depth);
                r.table = Some(table);
            }
            PotentialConfig::MatrixCocycle { norm, matrices } => {
                r.kind = PotentialTag::MatrixCocycle;
                r.norm = Some(norm);
                r.matrices = Some(matrices);
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            lambda: 0.5,
            epsilon: None,
            depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedules {
    pub pressure: Vec<usize>,
    pub phi_star: Vec<usize>,
    pub entropy: Vec<usize>,
}

impl Default for Schedules {
    fn default() -> Self {
        Schedules {
            pressure: vec![1, 2, 3, 4, 6, 12],
            phi_star: vec![12],
            entropy: (1..=8).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_evals: usize,
    pub diameter_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 16,
            max_evals: 2000,
            diameter_tol: 1e-8,
            seed: 0,
        }
    }
}

/// Exact-versus-sampled evaluation of `∫ f_n dμ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub exact_budget: u64,
    pub monte_carlo: bool,
    pub samples: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            exact_budget: 10_000_000,
            monte_carlo: true,
            samples: 100_000,
        }
    }
}

/// The measure used by `entropy` and `phistar`; defaults to `uniform`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub enum MeasureConfig {
    /// Rows uniform over allowed successors.
    Uniform,
    /// The same symbol law at every step (full shifts only).
    Bernoulli { probs: Vec<f64> },
    /// Explicit kernels; initial vectors are derived when omitted.
    Markov {
        kernels: Vec<Vec<Vec<f64>>>,
        initial: Option<Vec<Vec<f64>>>,
    },
    /// Dirichlet(1) rows drawn from the given seed.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MeasureTag {
    Uniform,
    Bernoulli,
    Markov,
    Random,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    kind: MeasureTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernels: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl TryFrom<RawMeasure> for MeasureConfig {
    type Error = String;

    fn try_from(r: RawMeasure) -> Result<Self, String> {
        let set = present(&[
            ("probs", r.probs.is_some()),
            ("kernels", r.kernels.is_some()),
            ("initial", r.initial.is_some()),
            ("seed", r.seed.is_some()),
        ]);
        Ok(match r.kind {
            MeasureTag::Uniform => {
                only("uniform", &[], &set)?;
                MeasureConfig::Uniform
            }
            MeasureTag::Bernoulli => {
                only("bernoulli", &["probs"], &set)?;
                MeasureConfig::Bernoulli { probs: required("bernoulli", "probs", r.probs)? }
            }
            MeasureTag::Markov => {
                only("markov", &["kernels", "initial"], &set)?;
                MeasureConfig::Markov {
                    kernels: required("markov", "kernels", r.kernels)?,
                    initial: r.initial,
                }
            }
            MeasureTag::Random => {
                only("random", &["seed"], &set)?;
                MeasureConfig::Random { seed: required("random", "seed", r.seed)? }
            }
        })
    }
}

impl From<MeasureConfig> for RawMeasure {
    fn from(m: MeasureConfig) -> Self {
        let mut r = RawMeasure {
            kind: MeasureTag::Uniform,
            probs: None,
            kernels: None,
            initial: None,
            seed: None,
        };
        match m {
            MeasureConfig::Uniform => {}
            MeasureConfig::Bernoulli { probs } => {
                r.kind = MeasureTag::Bernoulli;
                r.probs = Some(probs);
            }
            MeasureConfig::Markov { kernels, initial } => {
                r.kind = MeasureTag::Markov;
                r.kernels = Some(kernels);
                r.initial = initial;
            }
            MeasureConfig::Random { seed } => {
                r.kind = MeasureTag::Random;
                r.seed = Some(seed);
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    pub k: usize,
    /// Horizons of the power system; the base runs at `k` times these.
    pub schedule: Vec<usize>,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            k: 2,
            schedule: vec![2, 4, 6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Random measures in the sampled upper-bound check.
    pub samples: usize,
    /// Largest horizon in the Gibbs identity and chunking checks.
    pub n_max: usize,
    /// Largest horizon in the shift-average check.
    pub shift_n_max: usize,
    pub shift_k: Vec<usize>,
    pub chunk_q: Vec<usize>,
    pub subadditivity_n_max: usize,
    pub fekete_n_max: usize,
    pub tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 1000,
            n_max: 8,
            shift_n_max: 10,
            shift_k: vec![1, 2, 3],
            chunk_q: vec![2, 3],
            subadditivity_n_max: 6,
            fekete_n_max: 10,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: "out".into(),
            format: Format::Both,
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON text, reporting the failing field path and position.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError {
                field,
                line: Some(inner.line()),
                column: Some(inner.column()),
                message: inner.to_string(),
            }
        })?;
        de.end().map_err(|e| ConfigError {
            field: ".".into(),
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|e| field_error(".", format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| field_error(".", e))?;
        Ok((Self::parse(text)?, bytes))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Builds the library objects, checking every cross-field dimension.
    pub fn build(&self) -> Result<Experiment, ConfigError> {
        let sys = self.system.build()?;
        let pot = self.potential.build(&sys)?;
        let mp = self.metric.build(&pot)?;
        for (name, s) in [
            ("schedules.pressure", &self.schedules.pressure),
            ("schedules.phi_star", &self.schedules.phi_star),
            ("schedules.entropy", &self.schedules.entropy),
            ("power.schedule", &self.power.schedule),
        ] {
            check_schedule(name, s)?;
        }
        if self.power.k == 0 {
            return Err(field_error("power.k", "must be at least 1"));
        }
        if self.optimizer.starts == 0 {
            return Err(field_error("optimizer.starts", "must be at least 1"));
        }
        if self.verify.tolerance.is_nan() || self.verify.tolerance < 0.0 {
            return Err(field_error("verify.tolerance", "must be nonnegative"));
        }
        let measure = match &self.measure {
            None => None,
            Some(m) => Some(m.build(&sys)?),
        };
        Ok(Experiment {
            sys,
            pot,
            mp,
            explicit_depth: self.metric.epsilon.is_some() || self.metric.depth.is_some(),
            measure,
        })
    }

    pub fn phi_options(&self, seed: u64) -> PhiStarOptions {
        PhiStarOptions {
            exact_budget: self.sampling.exact_budget as u128,
            monte_carlo: self.sampling.monte_carlo,
            samples: self.sampling.samples,
            seed,
        }
    }

    pub fn variational_options(&self, exp: &Experiment, seed: u64) -> VariationalOptions {
        let o = &self.optimizer;
        VariationalOptions {
            starts: o.starts,
            max_evals: o.max_evals,
            diameter_tol: o.diameter_tol,
            seed,
            phi_star_schedule: self.schedules.phi_star.clone(),
            pressure_schedule: self.schedules.pressure.clone(),
            depth: exp.depth(),
            phi: self.phi_options(seed),
        }
    }
}

fn check_schedule(name: &str, s: &[usize]) -> Result<(), ConfigError> {
    if s.is_empty() {
        return Err(field_error(name, "schedule must not be empty"));
    }
    if s[0] == 0 || s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(field_error(name, "schedule must be strictly increasing positive integers"));
    }
    Ok(())
}

fn lib_error(field: &str, e: Error) -> ConfigError {
    field_error(field, e)
}

impl SystemConfig {
    fn build(&self) -> Result<RandomSft<f64>, ConfigError> {
        let m = self.transitions.len();
        if m == 0 {
            return Err(field_error("system.transitions", "at least one fiber is required"));
        }
        let perm = self.perm.clone().unwrap_or_else(|| (0..m).collect());
        if perm.len() != m {
            return Err(field_error("system.perm", format!("expected {m} entries, one per fiber")));
        }
        let base = match &self.weights {
            None => BaseSystem::uniform(perm),
            Some(w) => BaseSystem::new(perm, w.clone()),
        }
        .map_err(|e| lib_error("system", e))?;
        RandomSft::new(base, self.alphabet, self.transitions.clone()).map_err(|e| lib_error("system.transitions", e))
    }
}

fn broadcast<T: Clone>(v: &[T], m: usize) -> Vec<T> {
    if v.len() == 1 && m > 1 {
        vec![v[0].clone(); m]
    } else {
        v.to_vec()
    }
}

impl PotentialConfig {
    fn build(&self, sys: &RandomSft<f64>) -> Result<PotentialSeq<f64>, ConfigError> {
        let m = sys.fibers();
        match self {
            PotentialConfig::Zero => Ok(PotentialSeq::zero()),
            PotentialConfig::Constant { c } => PotentialSeq::constant(*c).map_err(|e| lib_error("potential.c", e)),
            PotentialConfig::Additive { depth, table } => {
                PotentialSeq::additive(sys, *depth, broadcast(table, m)).map_err(|e| lib_error("potential.table", e))
            }
            PotentialConfig::MatrixCocycle { norm, matrices } => {
                let mut mats = Vec::new();
                for (w, list) in broadcast(matrices, m).iter().enumerate() {
                    let mut row = Vec::new();
                    for (s, rows) in list.iter().enumerate() {
                        let mat = SquareMatrix::from_rows(rows).ok_or_else(|| {
                            field_error(&format!("potential.matrices[{w}][{s}]"), "matrix must be square and nonempty")
                        })?;
                        row.push(mat);
                    }
                    mats.push(row);
                }
                PotentialSeq::matrix_cocycle(sys, *norm, mats).map_err(|e| lib_error("potential.matrices", e))
            }
        }
    }
}

impl MetricConfig {
    fn build(&self, pot: &PotentialSeq<f64>) -> Result<MetricParams<f64>, ConfigError> {
        match (self.epsilon, self.depth) {
            (Some(_), Some(_)) => Err(field_error("metric", "give either epsilon or depth, not both")),
            (Some(eps), None) => MetricParams::new(self.lambda, eps).map_err(|e| lib_error("metric.epsilon", e)),
            (None, d) => MetricParams::from_depth(self.lambda, d.unwrap_or(pot.max_deficit()))
                .map_err(|e| lib_error("metric", e)),
        }
    }
}

impl MeasureConfig {
    fn build(&self, sys: &RandomSft<f64>) -> Result<RandomMarkovMeasure<f64>, ConfigError> {
        let r = match self {
            MeasureConfig::Uniform => RandomMarkovMeasure::uniform(sys),
            MeasureConfig::Bernoulli { probs } => RandomMarkovMeasure::bernoulli(sys, probs),
            MeasureConfig::Markov { kernels, initial } => match initial {
                None => RandomMarkovMeasure::from_kernels(sys, kernels.clone()),
                Some(p) => RandomMarkovMeasure::new(sys, p.clone(), kernels.clone()),
            },
            MeasureConfig::Random { seed } => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                RandomMarkovMeasure::random(sys, &mut rng)
            }
        };
        r.map_err(|e| lib_error("measure", e))
    }
}

/// Validated library objects built from a configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub sys: RandomSft<f64>,
    pub pot: PotentialSeq<f64>,
    pub mp: MetricParams<f64>,
    /// The config fixed ε or `t`; otherwise the smallest legal depth is used.
    pub explicit_depth: bool,
    pub measure: Option<RandomMarkovMeasure<f64>>,
}

impl Experiment {
    pub fn depth(&self) -> Option<usize> {
        self.explicit_depth.then(|| self.mp.depth())
    }

    pub fn measure_or_uniform(&self) -> subpressure::Result<RandomMarkovMeasure<f64>> {
        match &self.measure {
            Some(m) => Ok(m.clone()),
            None => RandomMarkovMeasure::uniform(&self.sys),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL2: &str = r#"{"system": {"alphabet": 2, "transitions": [[[1,1],[1,1]]]}, "potential": {"kind": "zero"}}"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::parse(FULL2).unwrap();
        assert_eq!(c.optimizer.starts, 16);
        assert_eq!(c.schedules.phi_star, vec![12]);
        let e = c.build().unwrap();
        assert_eq!(e.sys.fibers(), 1);
        assert_eq!(e.mp.depth(), 0);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let c = ExperimentConfig::parse(FULL2).unwrap();
        let again = ExperimentConfig::parse(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_json(), again.to_json());
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = r#"{"system": {"alphabet": 2, "transitions": [[[1,1],[1,1]]]},
  "potential": {"kind": "additive", "depth": "two", "table": [[0, 1]]}}"#;
        let e = ExperimentConfig::parse(bad).unwrap_err();
        assert_eq!(e.field, "potential.depth");
        assert_eq!(e.line, Some(2));
        let bad = r#"{"system": {"alphabet": 2, "transitions": [[[1,1],[1,1]]]}, "potential": {"kind": "zero", "c": 1}}"#;
        let e = ExperimentConfig::parse(bad).unwrap_err();
        assert!(e.message.contains("does not apply"), "{}", e.message);
        let bad = r#"{"system": {"alphabet": 2, "transitions": [[[1,1],[1,1]]]}, "potential": {"kind": "constant"}}"#;
        let e = ExperimentConfig::parse(bad).unwrap_err();
        assert!(e.message.contains("requires field `c`"), "{}", e.message);
        let bad = r#"{"system": {"alphabet": 2, "transitions": [[[1,1],[1,1]]], "extra": 1}, "potential": {"kind": "zero"}}"#;
        let e = ExperimentConfig::parse(bad).unwrap_err();
        assert!(e.message.contains("extra"));
        let bad = r#"{"system": {"alphabet": 2, "transitions": [[[1,1],[1,1]]]}, "potential": {"kind": "zero"}, "schedules": {"pressure": [3, 2]}}"#;
        let e = ExperimentConfig::parse(bad).unwrap().build().unwrap_err();
        assert_eq!(e.field, "schedules.pressure");
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let bad = r#"{"system": {"alphabet": 2, "transitions": [[[1,1],[1,1]]]},
  "potential": {"kind": "matrix_cocycle", "matrices": [[[[1,0],[0,1]]]]}}"#;
        let e = ExperimentConfig::parse(bad).unwrap().build().unwrap_err();
        assert_eq!(e.field, "potential.matrices");
    }
}
