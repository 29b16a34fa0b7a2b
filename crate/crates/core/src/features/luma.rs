use std::path::Path;

use crate::{Error, Result};

/// Decoded 8-bit luma planes of one clip, frames stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaClip {
    pub width: usize,
    pub height: usize,
    frames: Vec<Vec<u8>>,
}

impl LumaClip {
    pub fn new(width: usize, height: usize, frames: Vec<Vec<u8>>) -> Result<Self> {
        if frames.iter().any(|f| f.len() != width * height) {
            return Err(Error::invalid(format!("frame size differs from {width}x{height}")));
        }
        Ok(LumaClip { width, height, frames })
    }

    /// Splits a headerless planar buffer into frames.
    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let plane = width * height;
        if plane == 0 || !bytes.len().is_multiple_of(plane) {
            return Err(Error::invalid(format!(
                "{} bytes is not a whole number of {width}x{height} planes",
                bytes.len()
            )));
        }
        Ok(LumaClip {
            width,
            height,
            frames: bytes.chunks_exact(plane).map(<[u8]>::to_vec).collect(),
        })
    }

    pub fn read(path: &Path, width: usize, height: usize) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(width, height, &bytes)
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, t: usize) -> &[u8] {
        &self.frames[t]
    }

    pub fn frames(&self) -> &[Vec<u8>] {
        &self.frames
    }
}
