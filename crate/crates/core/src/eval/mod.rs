//! Cross-validated evaluation over the three reference settings.

mod corpus;
mod harness;
mod kfold;

pub use corpus::{ClipData, Corpus};
pub use harness::{
    evaluate_order, run_full_evaluation, CellSummary, ClipRecord, EvalConfig, EvalReport, OrderRun, PredictorChoice,
    Setting,
};
pub use kfold::{kfold_split, FoldAssignment};
