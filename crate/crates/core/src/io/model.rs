use std::path::Path;

use serde::{Deserialize, Serialize};

use super::table::{read_text, write_atomic};
use crate::svr::TrainedPredictor;
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "jndsur-predictor";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format: &'a str,
    version: u32,
    predictor: &'a TrainedPredictor,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct EnvelopeIn {
    predictor: TrainedPredictor,
}

pub fn save_predictor(path: &Path, predictor: &TrainedPredictor) -> Result<()> {
    let env = EnvelopeOut {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        predictor,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn load_predictor(path: &Path) -> Result<TrainedPredictor> {
    let text = read_text(path)?;
    let bad = |e: serde_json::Error| Error::Format(format!("{}: {e}", path.display()));
    let head: Header = serde_json::from_str(&text).map_err(bad)?;
    if head.format != MODEL_FORMAT {
        return Err(Error::Format(format!("{}: format `{}`, expected `{MODEL_FORMAT}`", path.display(), head.format)));
    }
    if head.version != MODEL_VERSION {
        return Err(Error::Format(format!(
            "{}: model version {} is not supported (expected {MODEL_VERSION})",
            path.display(),
            head.version
        )));
    }
    Ok(serde_json::from_str::<EnvelopeIn>(&text).map_err(bad)?.predictor)
}
