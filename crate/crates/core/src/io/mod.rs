//! File formats: delimited tables, TOML manifests and configs, JSON models.
//!
//! Every writer builds its output in memory and moves it into place with a
//! rename, so a failed command never leaves a partial file behind.

mod config;
mod features;
mod fit;
mod manifest;
mod model;
mod report;
mod samples;
mod scores;
mod table;

pub use config::{load_run_config, load_simulate_config, CorpusSource, RunConfig, SimulateConfig};
pub use features::{read_features, write_features, FeatureRow};
pub use fit::{fit_rows, write_fit_models, write_pass_rates, FitRow};
pub use manifest::{load_corpus, write_synthetic_corpus, ClipEntry, Manifest, MANIFEST_VERSION};
pub use model::{load_predictor, save_predictor, MODEL_FORMAT, MODEL_VERSION};
pub use report::{read_curves, write_curves, write_predictions, write_report, CurveRow, PredictionRow, REPORT_FILES};
pub use samples::{read_samples, write_samples};
pub use scores::{read_scores, write_scores, INGESTED_METRIC};
pub use table::write_atomic;
