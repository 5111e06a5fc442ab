//! Run configuration: a TOML file whose every key is optional.
//!
//! ```toml
//! seed = 7
//!
//! [lexical]
//! mu = 1500.0
//!
//! [pli]
//! hidden = 64
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use coliee_core::lexical::LexicalParams;
use coliee_core::{cascade, pli};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub paths: Paths,
    pub lexical: LexicalParams,
    pub split: SplitSection,
    pub cascade: CascadeSection,
    pub duet: DuetSection,
    pub encoder: EncoderSection,
    pub pli: PliSection,
    pub ltr: LtrSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            paths: Paths::default(),
            lexical: LexicalParams::default(),
            split: SplitSection::default(),
            cascade: CascadeSection::default(),
            duet: DuetSection::default(),
            encoder: EncoderSection::default(),
            pli: PliSection::default(),
            ltr: LtrSection::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// One stopword per line; the bundled English list when unset.
    pub stopwords: Option<PathBuf>,
    /// One entity per line; built from capitalized spans of the corpus when unset.
    pub gazetteer: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub ratio: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection { ratio: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeSection {
    pub k: usize,
}

impl Default for CascadeSection {
    fn default() -> Self {
        CascadeSection { k: cascade::DEFAULT_K }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DuetSection {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
}

impl Default for DuetSection {
    fn default() -> Self {
        let d = coliee_core::duet::TrainConfig::default();
        DuetSection {
            learning_rate: d.learning_rate,
            weight_decay: d.weight_decay,
            max_epochs: d.max_epochs,
        }
    }
}

/// The toy hash encoder used when no external embeddings are supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderSection {
    pub dim: usize,
    pub seed: u64,
}

impl Default for EncoderSection {
    fn default() -> Self {
        EncoderSection { dim: 32, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PliSection {
    pub n_max: usize,
    pub m_max: usize,
    pub hidden: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
}

impl Default for PliSection {
    fn default() -> Self {
        let d = pli::PliTrainConfig::default();
        PliSection {
            n_max: pli::N_MAX,
            m_max: pli::M_MAX,
            hidden: d.hidden,
            lr: d.lr,
            weight_decay: d.weight_decay,
            max_epochs: d.max_epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LtrSection {
    pub c_task1: f64,
    pub c_task2: f64,
    pub iterations: usize,
    pub batch_size: usize,
}

impl Default for LtrSection {
    fn default() -> Self {
        let d = coliee_core::ltr::RankSvmConfig::default();
        LtrSection {
            c_task1: 20.0,
            c_task2: 1.0,
            iterations: d.iterations,
            batch_size: d.batch_size,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn duet_train(&self) -> coliee_core::duet::TrainConfig {
        coliee_core::duet::TrainConfig {
            learning_rate: self.duet.learning_rate,
            weight_decay: self.duet.weight_decay,
            max_epochs: self.duet.max_epochs,
            seed: self.seed,
        }
    }

    pub fn pli_train(&self) -> pli::PliTrainConfig {
        pli::PliTrainConfig {
            lr: self.pli.lr,
            weight_decay: self.pli.weight_decay,
            max_epochs: self.pli.max_epochs,
            hidden: self.pli.hidden,
            seed: self.seed,
        }
    }

    pub fn ranksvm(&self, c: f64) -> coliee_core::ltr::RankSvmConfig {
        coliee_core::ltr::RankSvmConfig {
            c,
            iterations: self.ltr.iterations,
            batch_size: self.ltr.batch_size,
            seed: self.seed,
        }
    }

    /// Settings sized for the synthetic corpus: a small GRU and a larger
    /// SGD step so the interaction model trains in seconds.
    pub fn desk_scale() -> Self {
        let mut c = Config::default();
        c.pli.hidden = 32;
        c.pli.lr = 0.01;
        c.pli.max_epochs = 30;
        c.encoder.dim = 16;
        c
    }
}
