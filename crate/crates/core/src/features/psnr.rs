use super::{LumaClip, SegmentGrid};
use crate::{Error, Result};

/// PSNR reported for segments with (near-)zero error.
pub const PSNR_CAP_DB: f64 = 60.0;

pub(super) fn check_clip_geometry(clip: &LumaClip, grid: &SegmentGrid) -> Result<()> {
    if clip.width != grid.frame_width || clip.height != grid.frame_height || clip.frame_count() != grid.frames {
        return Err(Error::invalid(format!(
            "clip {}x{}x{} does not match grid {}x{}x{}",
            clip.width,
            clip.height,
            clip.frame_count(),
            grid.frame_width,
            grid.frame_height,
            grid.frames
        )));
    }
    Ok(())
}

/// Luma PSNR of every segment, indexed by segment id.
pub fn segment_quality_psnr(reference: &LumaClip, distorted: &LumaClip, grid: &SegmentGrid) -> Result<Vec<f64>> {
    check_clip_geometry(reference, grid)?;
    check_clip_geometry(distorted, grid)?;
    let width = grid.frame_width;
    let mut scores = Vec::with_capacity(grid.segment_count());
    for t in 0..grid.temporal_count {
        for tile in 0..grid.spatial_tiles() {
            let (cols, rows) = grid.tile_rect(tile);
            let mut sse = 0u64;
            let mut count = 0u64;
            for f in grid.frame_range(t) {
                let (r, d) = (reference.frame(f), distorted.frame(f));
                for y in rows.clone() {
                    let row = y * width;
                    for x in cols.clone() {
                        let diff = i64::from(r[row + x]) - i64::from(d[row + x]);
                        sse += (diff * diff) as u64;
                    }
                }
                count += (cols.len() * rows.len()) as u64;
            }
            let mse = sse as f64 / count as f64;
            let psnr = if mse == 0.0 {
                PSNR_CAP_DB
            } else {
                (10.0 * (255.0 * 255.0 / mse).log10()).min(PSNR_CAP_DB)
            };
            scores.push(psnr);
        }
    }
    Ok(scores)
}
