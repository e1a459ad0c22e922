use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fock,
    Wick,
    Gqg,
    Rigidity,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Fock => "fock",
            Suite::Wick => "wick",
            Suite::Gqg => "gqg",
            Suite::Rigidity => "rigidity",
            Suite::All => "all",
        }
    }
}

/// Settings read from `--config`. Every field is optional; flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub q: Option<f64>,
    pub dim: Option<usize>,
    pub cutoff: Option<usize>,
    pub group: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub trials: Option<usize>,
    pub resolution: Option<usize>,
    pub max_len: Option<usize>,
    pub f_sizes: Option<Vec<usize>>,
    pub suite: Option<Suite>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub const DEFAULT_SEED: u64 = 20251016;

/// Fully resolved settings, echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub q: f64,
    pub dim: usize,
    /// `None` lets each suite use its own default.
    pub cutoff: Option<usize>,
    pub group: String,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub trials: usize,
    pub resolution: usize,
    pub max_len: usize,
    pub f_sizes: Vec<usize>,
    pub suite: Option<Suite>,
}

impl RunConfig {
    pub fn cutoff_or(&self, default: usize) -> usize {
        self.cutoff.unwrap_or(default)
    }

    pub fn check_q(&self) -> Result<(), CliError> {
        if !(self.q.abs() < 1.0) {
            return Err(CliError::Config(format!(
                "q = {} must satisfy |q| < 1",
                self.q
            )));
        }
        Ok(())
    }

    pub fn check_dim(&self, min: usize) -> Result<(), CliError> {
        if self.dim < min {
            return Err(CliError::Config(format!(
                "dim = {} must be at least {min}",
                self.dim
            )));
        }
        Ok(())
    }
}

/// Derives a module seed from the master seed and a fixed label (FNV-1a of
/// the label, mixed with the master seed by a SplitMix64 round).
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = (master ^ h).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
