use std::ops::Range;

use crate::{Error, Result};

pub const TILE_WIDTH: usize = 320;
pub const TILE_HEIGHT: usize = 180;

/// Spatial-temporal segmentation of a clip into fixed 320x180 tiles and
/// runs of `temporal_len` frames. Segment ids are temporal-major, then row,
/// then column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentGrid {
    pub frame_width: usize,
    pub frame_height: usize,
    pub frames: usize,
    pub temporal_len: usize,
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub temporal_count: usize,
}

impl SegmentGrid {
    pub fn partition(width: usize, height: usize, frames: usize, temporal_len: usize) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(TILE_WIDTH) || !height.is_multiple_of(TILE_HEIGHT) {
            return Err(Error::invalid(format!(
                "{width}x{height} is not a multiple of {TILE_WIDTH}x{TILE_HEIGHT}"
            )));
        }
        if temporal_len == 0 || frames < temporal_len {
            return Err(Error::invalid(format!(
                "{frames} frames cannot hold a {temporal_len}-frame segment"
            )));
        }
        Ok(SegmentGrid {
            frame_width: width,
            frame_height: height,
            frames,
            temporal_len,
            tiles_x: width / TILE_WIDTH,
            tiles_y: height / TILE_HEIGHT,
            temporal_count: frames / temporal_len,
        })
    }

    pub fn spatial_tiles(&self) -> usize {
        self.tiles_x * self.tiles_y
    }

    pub fn segment_count(&self) -> usize {
        self.spatial_tiles() * self.temporal_count
    }

    /// Frame range of temporal slot `t`; the last slot absorbs the remainder.
    pub fn frame_range(&self, t: usize) -> Range<usize> {
        let start = t * self.temporal_len;
        let end = if t + 1 == self.temporal_count {
            self.frames
        } else {
            start + self.temporal_len
        };
        start..end
    }

    /// (column range, row range) of spatial tile `tile`.
    pub fn tile_rect(&self, tile: usize) -> (Range<usize>, Range<usize>) {
        let (tx, ty) = (tile % self.tiles_x, tile / self.tiles_x);
        (
            tx * TILE_WIDTH..(tx + 1) * TILE_WIDTH,
            ty * TILE_HEIGHT..(ty + 1) * TILE_HEIGHT,
        )
    }

    /// Splits a segment id into (temporal slot, spatial tile).
    pub fn split_id(&self, segment: usize) -> (usize, usize) {
        (segment / self.spatial_tiles(), segment % self.spatial_tiles())
    }
}
