//! Experiment configuration: a `key = value` file overlaid with flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use tmc_core::Method;

use crate::ladder::{Ladder, Relation, Triple};

/// Keys accepted in a config file and as flag overrides.
pub const KEYS: [&str; 10] = [
    "benchmark",
    "ladder",
    "N",
    "M",
    "s",
    "R",
    "seed",
    "methods",
    "out",
    "threads",
];

pub const DEFAULT_REPLICATIONS: usize = 25;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Mvn,
    Ode1dUniform,
    Ode1dLognormal,
    Pde2d,
    AnovaVerify,
}

impl Benchmark {
    pub const ALL: [Benchmark; 5] = [
        Benchmark::Mvn,
        Benchmark::Ode1dUniform,
        Benchmark::Ode1dLognormal,
        Benchmark::Pde2d,
        Benchmark::AnovaVerify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Mvn => "mvn",
            Benchmark::Ode1dUniform => "ode1d-uniform",
            Benchmark::Ode1dLognormal => "ode1d-lognormal",
            Benchmark::Pde2d => "pde2d",
            Benchmark::AnovaVerify => "anova-verify",
        }
    }

    /// Whether the mesh size `M` takes part in the computation.
    pub fn uses_mesh(self) -> bool {
        matches!(
            self,
            Benchmark::Ode1dUniform | Benchmark::Ode1dLognormal | Benchmark::Pde2d
        )
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL.into_iter().find(|b| b.name() == s).ok_or_else(|| {
            anyhow!("unknown benchmark {s:?}; expected one of mvn, ode1d-uniform, ode1d-lognormal, pde2d, anova-verify")
        })
    }
}

/// Raw string settings keyed by [`KEYS`]; later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut settings = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {raw:?}", i + 1))?;
            let key = key.trim();
            if settings.values.contains_key(key) {
                bail!("line {}: duplicate key {key:?}", i + 1);
            }
            settings
                .set(key, value.trim())
                .with_context(|| format!("line {}", i + 1))?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            bail!("unknown key {key:?}; accepted keys are {}", KEYS.join(", "));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Applies every entry of `other` on top of `self`.
    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub ladder: Ladder,
    pub replications: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let benchmark: Benchmark = settings
            .get("benchmark")
            .ok_or_else(|| anyhow!("no benchmark given"))?
            .parse()?;
        let replications = match settings.get("R") {
            Some(r) => parse_scalar::<usize>("R", r)?,
            None => DEFAULT_REPLICATIONS,
        };
        if replications < 2 {
            bail!("R must be at least 2, got {replications}");
        }
        let base_seed = match settings.get("seed") {
            Some(s) => parse_scalar::<u64>("seed", s)?,
            None => DEFAULT_SEED,
        };
        let methods = match settings.get("methods") {
            Some(m) => parse_methods(m)?,
            None => vec![Method::Mc, Method::Tmc],
        };
        let threads = settings
            .get("threads")
            .map(|t| parse_scalar::<usize>("threads", t))
            .transpose()?;
        if threads == Some(0) {
            bail!("threads must be at least 1");
        }
        let ladder = build_ladder(benchmark, settings)?;
        let config = Self {
            benchmark,
            ladder,
            replications,
            base_seed,
            methods,
            out: settings.get("out").map(PathBuf::from),
            threads,
        };
        config.triples()?;
        Ok(config)
    }

    /// The ladder expanded to `(N, M, s)` triples, checked against the
    /// benchmark's size requirements.
    pub fn triples(&self) -> Result<Vec<Triple>> {
        let triples = self.ladder.triples()?;
        for t in &triples {
            if t.n == 0 || t.s == 0 {
                bail!("{t}: N and s must be positive");
            }
            // The solution is read at the midpoint, which must be a node.
            if self.benchmark.uses_mesh() && (t.m < 2 || t.m % 2 != 0) {
                bail!("{t}: {} needs an even M >= 2", self.benchmark);
            }
        }
        Ok(triples)
    }
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|v| parse_scalar::<usize>(key, v))
        .collect::<Result<Vec<_>>>()
        .and_then(|list| {
            if list.is_empty() {
                Err(anyhow!("{key}: empty list"))
            } else {
                Ok(list)
            }
        })
}

fn parse_methods(value: &str) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for m in value.split(',').map(str::trim) {
        let method = match m.to_ascii_lowercase().as_str() {
            "mc" | "stdmc" => Method::Mc,
            "tmc" => Method::Tmc,
            _ => bail!("methods: unknown method {m:?}; expected MC or TMC"),
        };
        if methods.contains(&method) {
            bail!("methods: {m} listed twice");
        }
        methods.push(method);
    }
    // Table order: MC before TMC.
    methods.sort_by_key(|m| *m != Method::Mc);
    Ok(methods)
}

fn build_ladder(benchmark: Benchmark, settings: &Settings) -> Result<Ladder> {
    let list = |key| settings.get(key).map(|v| parse_list(key, v)).transpose();
    let (n, m, s) = (list("N")?, list("M")?, list("s")?);
    if let Some(name) = settings.get("ladder") {
        let relation: Relation = name.parse()?;
        let n = n.ok_or_else(|| anyhow!("ladder {name:?} needs the N values"))?;
        let ladder = Ladder::Named { relation, n };
        // Explicit M or s alongside a relation must agree with it.
        let triples = ladder.triples()?;
        for (key, given) in [("M", &m), ("s", &s)] {
            if let Some(given) = given {
                let derived: Vec<usize> = triples.iter().map(|t| if key == "M" { t.m } else { t.s }).collect();
                if *given != derived {
                    bail!("{key} = {given:?} contradicts ladder {name:?}, which gives {derived:?}");
                }
            }
        }
        return Ok(ladder);
    }
    if benchmark == Benchmark::AnovaVerify && n.is_none() {
        return Ok(Ladder::Explicit(Vec::new()));
    }
    let n = n.ok_or_else(|| anyhow!("give a ladder or explicit N values"))?;
    let s = match s {
        Some(s) => s,
        // The example function has three variables.
        None if benchmark == Benchmark::AnovaVerify => vec![3],
        None => bail!("give a ladder or explicit s values"),
    };
    let m = match m {
        Some(m) => m,
        None if benchmark.uses_mesh() => bail!("{benchmark} needs M values"),
        None => vec![0],
    };
    let len = n.len().max(m.len()).max(s.len());
    let broadcast = |key: &str, v: &[usize]| -> Result<Vec<usize>> {
        match v.len() {
            1 => Ok(vec![v[0]; len]),
            l if l == len => Ok(v.to_vec()),
            l => bail!("{key} has {l} values but the ladder has {len} rows"),
        }
    };
    let (n, m, s) = (broadcast("N", &n)?, broadcast("M", &m)?, broadcast("s", &s)?);
    Ok(Ladder::Explicit(
        (0..len)
            .map(|i| Triple {
                n: n[i],
                m: m[i],
                s: s[i],
            })
            .collect(),
    ))
}
