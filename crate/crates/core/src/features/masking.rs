use serde::{Deserialize, Serialize};

use super::psnr::check_clip_geometry;
use super::{LumaClip, SegmentGrid};
use crate::{Error, Result};

/// Spatial and temporal activity of the source clip, pooled over segments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MaskingStats {
    /// Mean and std across segments of the mean Sobel gradient energy.
    pub spatial_mean: f64,
    pub spatial_std: f64,
    /// Mean and std across segments of the mean absolute frame difference.
    pub temporal_mean: f64,
    pub temporal_std: f64,
    /// Set when the clip had a single frame and temporal activity is zero.
    #[serde(default)]
    pub single_frame: bool,
}

impl MaskingStats {
    pub fn values(&self) -> [f64; 4] {
        [self.spatial_mean, self.spatial_std, self.temporal_mean, self.temporal_std]
    }

    pub fn from_values(v: [f64; 4]) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid(format!("masking statistics must be finite and >= 0: {v:?}")));
        }
        Ok(MaskingStats {
            spatial_mean: v[0],
            spatial_std: v[1],
            temporal_mean: v[2],
            temporal_std: v[3],
            single_frame: false,
        })
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

fn sobel_energy(frame: &[u8], width: usize, x: usize, y: usize) -> f64 {
    let p = |dx: isize, dy: isize| {
        let xx = (x as isize + dx) as usize;
        let yy = (y as isize + dy) as usize;
        i32::from(frame[yy * width + xx])
    };
    let gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
    let gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
    f64::from(gx * gx + gy * gy)
}

/// Gradient-energy and frame-difference statistics of a source clip.
///
/// Gradients are taken at pixels whose 3x3 neighbourhood lies inside the
/// frame. A segment's temporal activity uses the frame pairs `(f-1, f)` for
/// every `f >= 1` in its frame range; segments with no such pair (only the
/// first slot when segments are one frame long) are left out of the
/// temporal pooling.
pub fn masking_features(source: &LumaClip, grid: &SegmentGrid) -> Result<MaskingStats> {
    check_clip_geometry(source, grid)?;
    let (w, h) = (grid.frame_width, grid.frame_height);
    let mut spatial = Vec::with_capacity(grid.segment_count());
    let mut temporal = Vec::with_capacity(grid.segment_count());

    for t in 0..grid.temporal_count {
        let frames = grid.frame_range(t);
        for tile in 0..grid.spatial_tiles() {
            let (cols, rows) = grid.tile_rect(tile);
            let (mut energy, mut n) = (0.0, 0usize);
            let inner_cols = cols.start.max(1)..cols.end.min(w - 1);
            let inner_rows = rows.start.max(1)..rows.end.min(h - 1);
            for f in frames.clone() {
                let frame = source.frame(f);
                for y in inner_rows.clone() {
                    for x in inner_cols.clone() {
                        energy += sobel_energy(frame, w, x, y);
                        n += 1;
                    }
                }
            }
            spatial.push(if n > 0 { energy / n as f64 } else { 0.0 });

            let (mut diff, mut pairs) = (0u64, 0usize);
            for f in frames.clone().filter(|&f| f >= 1) {
                let (prev, cur) = (source.frame(f - 1), source.frame(f));
                for y in rows.clone() {
                    for x in cols.clone() {
                        diff += u64::from(cur[y * w + x].abs_diff(prev[y * w + x]));
                    }
                }
                pairs += 1;
            }
            if pairs > 0 {
                temporal.push(diff as f64 / (pairs * cols.len() * rows.len()) as f64);
            }
        }
    }

    let (spatial_mean, spatial_std) = mean_std(&spatial);
    let (temporal_mean, temporal_std) = mean_std(&temporal);
    Ok(MaskingStats {
        spatial_mean,
        spatial_std,
        temporal_mean,
        temporal_std,
        single_frame: source.frame_count() < 2,
    })
}
