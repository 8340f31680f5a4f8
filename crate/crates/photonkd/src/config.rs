//! JSON run configuration for `photonkd simulate`.
//!
//! ```json
//! {
//!   "bases": ["B1", "B2", "B3", "B4", "B5"],
//!   "rounds": 100000,
//!   "seed": 42,
//!   "eve": { "bases": ["B1", "B2"] },
//!   "channel": { "transmission": 1.0, "depolarizing": 0.0 },
//!   "mzem": { "preset": "paper-tableIV", "phi": 0.0 },
//!   "qber_abort_threshold": 0.2,
//!   "workers": 4,
//!   "output": { "stats": "stats.json", "records": "records.csv" }
//! }
//! ```
//!
//! Unknown keys are rejected. An `eve` object without `bases` intercepts in
//! Alice's bases. Output paths are taken relative to the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use photonkd_core::mub::BasisId;
use photonkd_core::mzem::{MzemSettings, Visibility};
use photonkd_core::protocol::{Channel, Eavesdropper, ProtocolConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub bases: Vec<String>,
    pub rounds: u64,
    #[serde(default)]
    pub seed: u64,
    pub eve: Option<EveConfig>,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub mzem: MzemConfig,
    pub qber_abort_threshold: Option<f64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EveConfig {
    pub bases: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default = "one")]
    pub transmission: f64,
    #[serde(default)]
    pub depolarizing: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { transmission: 1.0, depolarizing: 0.0 }
    }
}

/// Interferometer settings. A preset is applied first and the other fields
/// override it. `visibility` and `port_a`/`port_b` are mutually exclusive.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MzemConfig {
    pub preset: Option<String>,
    pub phi: Option<f64>,
    pub visibility: Option<f64>,
    pub port_a: Option<[f64; 4]>,
    pub port_b: Option<[f64; 4]>,
    pub bs_ratio: Option<f64>,
    pub even_to_a: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub stats: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub alice_key: Option<PathBuf>,
    pub bob_key: Option<PathBuf>,
}

/// Fully resolved run: protocol parameters plus execution and output choices.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub protocol: ProtocolConfig,
    pub workers: usize,
    pub output: OutputPaths,
}

pub fn parse_bases(names: &[String]) -> anyhow::Result<Vec<BasisId>> {
    names.iter().map(|n| n.parse::<BasisId>().map_err(anyhow::Error::from)).collect()
}

impl MzemConfig {
    pub fn resolve(&self) -> anyhow::Result<MzemSettings> {
        let mut s = match &self.preset {
            Some(name) => MzemSettings::preset(name)?,
            None => MzemSettings::ideal(),
        };
        match (self.visibility, self.port_a, self.port_b) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                bail!("mzem: give either `visibility` or `port_a`/`port_b`, not both")
            }
            (Some(v), None, None) => s.visibility = Visibility::Global(v),
            (None, Some(port_a), Some(port_b)) => s.visibility = Visibility::PerState { port_a, port_b },
            (None, Some(_), None) | (None, None, Some(_)) => bail!("mzem: `port_a` and `port_b` go together"),
            (None, None, None) => {}
        }
        if let Some(phi) = self.phi {
            s.phi = phi;
        }
        if let Some(bs) = self.bs_ratio {
            s.bs_ratio = bs;
        }
        if let Some(e) = self.even_to_a {
            s.even_to_a = e;
        }
        s.validate()?;
        Ok(s)
    }
}

impl RunConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Checks every field and builds the run plan.
    pub fn resolve(&self) -> anyhow::Result<RunPlan> {
        let bases = parse_bases(&self.bases).context("bases")?;
        let eve = match &self.eve {
            None => Eavesdropper::None,
            Some(EveConfig { bases: None }) => Eavesdropper::InterceptResend(bases.clone()),
            Some(EveConfig { bases: Some(names) }) => {
                Eavesdropper::InterceptResend(parse_bases(names).context("eve.bases")?)
            }
        };
        let protocol = ProtocolConfig {
            bases,
            n_rounds: self.rounds,
            eve,
            channel: Channel { transmission: self.channel.transmission, depolarizing: self.channel.depolarizing },
            mzem: self.mzem.resolve()?,
            seed: self.seed,
            qber_abort_threshold: self.qber_abort_threshold,
        };
        protocol.validate()?;
        let workers = self.workers.unwrap_or(1);
        if workers == 0 {
            bail!("workers must be at least 1");
        }
        Ok(RunPlan { protocol, workers, output: self.output.clone() })
    }
}
