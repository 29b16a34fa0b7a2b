use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::manifest::load_corpus;
use super::table::read_text;
use crate::bisection::CampaignSpec;
use crate::eval::{Corpus, EvalConfig};
use crate::synth::{synth_corpus, SynthConfig};
use crate::{Error, Result};

fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    toml::from_str(&read_text(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Either a single campaign (top-level keys) or a whole synthetic corpus
/// (a `[corpus]` table).
#[derive(Debug, Clone, PartialEq)]
pub enum SimulateConfig {
    Campaign(CampaignSpec),
    Corpus(SynthConfig),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusWrapper {
    corpus: SynthConfig,
}

pub fn load_simulate_config(path: &Path) -> Result<SimulateConfig> {
    let table: toml::Table = load_toml(path)?;
    if table.contains_key("corpus") {
        Ok(SimulateConfig::Corpus(load_toml::<CorpusWrapper>(path)?.corpus))
    } else {
        Ok(SimulateConfig::Campaign(load_toml(path)?))
    }
}

/// Where the evaluation corpus comes from; exactly one must be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSource {
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SynthConfig>,
}

impl CorpusSource {
    pub fn load(&self) -> Result<Corpus> {
        match (&self.manifest, &self.synthetic) {
            (Some(m), None) => load_corpus(m),
            (None, Some(s)) => synth_corpus(s),
            _ => Err(Error::invalid("corpus needs exactly one of `manifest` or `synthetic`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub corpus: Option<CorpusSource>,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// Relative paths are taken against the config file's directory.
pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let mut cfg: RunConfig = load_toml(path)?;
    cfg.eval.validate()?;
    let base = path.parent().unwrap_or(Path::new(""));
    if let Some(m) = cfg.corpus.as_mut().and_then(|c| c.manifest.as_mut()) {
        *m = base.join(&*m);
    }
    if let Some(o) = cfg.out_dir.as_mut() {
        *o = base.join(&*o);
    }
    Ok(cfg)
}
