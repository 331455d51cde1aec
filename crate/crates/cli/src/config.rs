//! Run configuration: a flat `key = value` document with `#` comments.
//!
//! Recognized keys (nothing else is accepted): `model`, `alpha`, `mu`,
//! `zeta`, `nu`, `steps`, `replicas`, `seed`, `backend`, `checkpoints`,
//! `increment_window`, `out_dir`, `memory_cap_mb`.

use std::collections::HashMap;
use std::path::PathBuf;

use serde::Serialize;

use growgraph::histogram::ObservationPlan;
use growgraph::vertex::Sampling;
use growgraph::{ModelKind, ModelParams};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Histogram,
    Vertex,
}

/// A fully validated run description.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: ModelParams,
    pub steps: u64,
    pub replicas: u64,
    pub seed: u64,
    pub backend: Backend,
    pub checkpoints: Vec<u64>,
    /// Half-open window of steps whose increments are histogrammed.
    pub increment_window: (u64, u64),
    pub out_dir: PathBuf,
    pub memory_cap_mb: u64,
    /// Vertex-backend selection strategy; not a config key. The bucketed
    /// strategy is distributionally identical to the literal per-vertex one
    /// and much faster, so it is the default; the literal mode exists so the
    /// two routes can be compared.
    #[serde(skip)]
    pub sampling: Sampling,
    /// Dump the replica-0 edge list (vertex backend only); set by flag.
    #[serde(skip)]
    pub edge_dump: bool,
}

impl RunConfig {
    /// Programmatic constructor with the same defaults as the file parser.
    pub fn new(model: ModelKind, params: ModelParams, steps: u64) -> Self {
        let plan = ObservationPlan::default_for(steps);
        Self {
            model,
            params,
            steps,
            replicas: 1,
            seed: 0,
            backend: match model {
                ModelKind::HardCopy => Backend::Vertex,
                _ => Backend::Histogram,
            },
            checkpoints: plan.checkpoints,
            increment_window: plan.increment_window,
            out_dir: PathBuf::from("out"),
            memory_cap_mb: 4096,
            sampling: Sampling::DegreeBucketed,
            edge_dump: false,
        }
    }

    pub fn plan(&self) -> ObservationPlan {
        ObservationPlan {
            checkpoints: self.checkpoints.clone(),
            increment_window: self.increment_window,
        }
    }

    /// Rough peak memory of one vertex-backend replica, in MiB. The edge
    /// count estimate folds the linear and super-linear growth regimes of
    /// the copying model; for the other models edges grow linearly and the
    /// degree/bucket arrays dominate.
    pub fn projected_replica_memory_mb(&self) -> u64 {
        let t = self.steps as f64;
        let per_vertex = 40.0 * t; // degrees, components, buckets
        let bytes = match self.model {
            ModelKind::HardCopy => {
                let a = self.params.alpha;
                let mu = self.params.mu;
                let linear = if a < 0.5 {
                    (1.0 - a) * mu / (1.0 - 2.0 * a) * t
                } else {
                    (1.0 - a) * mu * t
                };
                let super_linear = if a >= 0.5 { t.powf(2.0 * a) / 6.0 } else { 0.0 };
                per_vertex + 16.0 * (linear + super_linear + mu * t)
            }
            _ => per_vertex + if self.edge_dump { 16.0 * self.params.xi() * t } else { 0.0 },
        };
        (bytes / (1024.0 * 1024.0)).ceil() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(CliError::Invalid("steps must be >= 1".into()));
        }
        if self.replicas < 1 {
            return Err(CliError::Invalid("replicas must be >= 1".into()));
        }
        if self.model == ModelKind::HardCopy && self.backend == Backend::Histogram {
            return Err(CliError::Invalid(
                "hardcopy requires vertex backend: copying depends on neighbor identities, \
                 which the histogram does not track"
                    .into(),
            ));
        }
        let (lo, hi) = self.increment_window;
        if lo >= hi || hi > self.steps {
            return Err(CliError::Invalid(format!(
                "increment_window [{lo}, {hi}) must be non-empty and end at or before steps"
            )));
        }
        if self.checkpoints.is_empty()
            || self.checkpoints.windows(2).any(|w| w[0] >= w[1])
            || *self.checkpoints.last().unwrap() > self.steps
        {
            return Err(CliError::Invalid(
                "checkpoints must be strictly ascending and within steps".into(),
            ));
        }
        if self.backend == Backend::Vertex {
            let projected = self.projected_replica_memory_mb();
            if projected > self.memory_cap_mb {
                return Err(CliError::Invalid(format!(
                    "projected vertex-backend memory {projected} MiB exceeds cap {} MiB",
                    self.memory_cap_mb
                )));
            }
        }
        Ok(())
    }
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "alpha",
    "mu",
    "zeta",
    "nu",
    "steps",
    "replicas",
    "seed",
    "backend",
    "checkpoints",
    "increment_window",
    "out_dir",
    "memory_cap_mb",
];

fn err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Config {
        line,
        message: message.into(),
    }
}

/// Parses and validates a config document. Unknown keys are errors so typos
/// never silently fall back to defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(err(line_no, format!("unknown key `{key}`")));
        }
        if entries.insert(key, (line_no, value)).is_some() {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
    }

    fn parse<T: std::str::FromStr>(
        entries: &HashMap<&str, (usize, &str)>,
        key: &str,
    ) -> Result<Option<T>> {
        match entries.get(key) {
            None => Ok(None),
            Some(&(line, value)) => value.parse::<T>().map(Some).map_err(|_| {
                err(
                    line,
                    format!("cannot parse `{value}` as {} for `{key}`", std::any::type_name::<T>()),
                )
            }),
        }
    }

    let &(model_line, model_str) = entries
        .get("model")
        .ok_or_else(|| CliError::MissingKey("model".into()))?;
    let model = match model_str {
        "classical" => ModelKind::Classical,
        "ba" => ModelKind::Ba,
        "mixed" => ModelKind::Mixed,
        "hardcopy" => ModelKind::HardCopy,
        other => {
            return Err(err(
                model_line,
                format!("unknown model `{other}` (expected classical, ba, mixed or hardcopy)"),
            ))
        }
    };

    let steps: u64 = parse(&entries, "steps")?.ok_or_else(|| CliError::MissingKey("steps".into()))?;

    let default_alpha = match model {
        ModelKind::Ba => Some(1.0),
        ModelKind::Classical => Some(0.0),
        ModelKind::Mixed | ModelKind::HardCopy => None,
    };
    let alpha = match parse::<f64>(&entries, "alpha")? {
        Some(a) => a,
        None => default_alpha.ok_or_else(|| CliError::MissingKey("alpha".into()))?,
    };
    let mu: f64 = parse(&entries, "mu")?.unwrap_or(1.0);
    let zeta: f64 = parse(&entries, "zeta")?.unwrap_or(mu);
    let nu: f64 = parse(&entries, "nu")?.unwrap_or(0.1);
    let params = ModelParams::new(alpha, mu, zeta, nu).map_err(|e| {
        let line = ["alpha", "mu", "zeta", "nu"]
            .iter()
            .filter_map(|k| entries.get(k).map(|&(l, _)| l))
            .min()
            .unwrap_or(0);
        err(line, e.to_string())
    })?;

    let mut config = RunConfig::new(model, params, steps);
    if let Some(r) = parse::<u64>(&entries, "replicas")? {
        config.replicas = r;
    }
    if let Some(s) = parse::<u64>(&entries, "seed")? {
        config.seed = s;
    }
    if let Some(&(line, b)) = entries.get("backend") {
        config.backend = match b {
            "histogram" => Backend::Histogram,
            "vertex" => Backend::Vertex,
            other => return Err(err(line, format!("unknown backend `{other}`"))),
        };
    }
    if let Some(&(line, list)) = entries.get("checkpoints") {
        config.checkpoints = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| err(line, format!("bad checkpoint `{s}`")))
            })
            .collect::<Result<_>>()?;
    }
    if let Some(&(line, window)) = entries.get("increment_window") {
        let (lo, hi) = window
            .split_once(':')
            .ok_or_else(|| err(line, "increment_window must look like `lo:hi`"))?;
        config.increment_window = (
            lo.trim()
                .parse()
                .map_err(|_| err(line, format!("bad window start `{lo}`")))?,
            hi.trim()
                .parse()
                .map_err(|_| err(line, format!("bad window end `{hi}`")))?,
        );
    }
    if let Some(&(_, dir)) = entries.get("out_dir") {
        config.out_dir = PathBuf::from(dir);
    }
    if let Some(cap) = parse::<u64>(&entries, "memory_cap_mb")? {
        config.memory_cap_mb = cap;
    }

    config.validate()?;
    Ok(config)
}
