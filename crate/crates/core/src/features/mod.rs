//! Per-(clip, anchor) feature extraction: segmentation, segment quality,
//! significant-segment pooling and masking statistics.

mod grid;
mod ladder;
mod luma;
mod masking;
mod psnr;
mod vector;

pub use grid::{SegmentGrid, TILE_HEIGHT, TILE_WIDTH};
pub use ladder::{aggregate_quality, significant_segments, QualityLadder, DEFAULT_SIGNIFICANT_FRACTION, SLOPE_WINDOW};
pub use luma::LumaClip;
pub use masking::{masking_features, MaskingStats};
pub use psnr::{segment_quality_psnr, PSNR_CAP_DB};
pub use vector::{
    build_feature_vector, feature_qps, FeatureVector, Standardizer, FEATURE_DIM, MASKING_DIM, QUALITY_SAMPLES,
};
