use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::samples::{read_samples, write_samples};
use super::scores::{read_scores, write_scores, INGESTED_METRIC};
use super::table::{read_text, write_atomic};
use crate::eval::{ClipData, Corpus};
use crate::features::{masking_features, segment_quality_psnr, LumaClip, MaskingStats, QualityLadder, SegmentGrid};
use crate::stats::Resolution;
use crate::{Error, Result, MAX_QP};

pub const MANIFEST_VERSION: u32 = 1;

/// One clip at one resolution. Quality comes either from a score file or
/// from PSNR between the `source` luma planes and the `coded` ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipEntry {
    pub id: String,
    pub resolution: Resolution,
    pub frames: usize,
    pub frame_rate: f64,
    /// Frames per temporal segment; defaults to one second of frames.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masking: Option<MaskingStats>,
    /// Headerless 8-bit luma planes of the pristine clip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<PathBuf>,
    /// QP (as a string key) to the coded clip's luma planes.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coded: BTreeMap<String, PathBuf>,
}

impl ClipEntry {
    pub fn temporal_len(&self) -> usize {
        self.temporal_len
            .unwrap_or_else(|| self.frame_rate.round().max(1.0) as usize)
            .clamp(1, self.frames.max(1))
    }

    fn grid(&self) -> Result<SegmentGrid> {
        let (w, h) = self.resolution.dimensions();
        SegmentGrid::partition(w, h, self.frames, self.temporal_len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    /// JND sample file covering the clips below.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
    pub clips: Vec<ClipEntry>,
}

impl Manifest {
    /// Parses, checks the version and id uniqueness, and resolves every
    /// path against the manifest's directory, requiring it to exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let mut m: Manifest =
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Format(format!(
                "{}: manifest version {} is not supported (expected {MANIFEST_VERSION})",
                path.display(),
                m.version
            )));
        }
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| -> Result<()> {
            let full = base.join(&*p);
            if !full.exists() {
                return Err(Error::invalid(format!("{}: referenced file {} not found", path.display(), full.display())));
            }
            *p = full;
            Ok(())
        };
        if let Some(s) = m.samples.as_mut() {
            resolve(s)?;
        }
        let mut seen = BTreeSet::new();
        for c in &mut m.clips {
            if !seen.insert((c.id.clone(), c.resolution)) {
                return Err(Error::invalid(format!("duplicate clip `{}` at {}", c.id, c.resolution)));
            }
            if c.frames == 0 {
                return Err(Error::invalid(format!("clip `{}`: zero frames", c.id)));
            }
            for p in c.scores.iter_mut().chain(c.source.iter_mut()).chain(c.coded.values_mut()) {
                resolve(p)?;
            }
            if c.scores.is_none() && (c.source.is_none() || c.coded.is_empty()) {
                return Err(Error::invalid(format!(
                    "clip `{}`: needs a score file or source and coded luma planes",
                    c.id
                )));
            }
            if c.masking.is_none() && c.source.is_none() {
                return Err(Error::invalid(format!("clip `{}`: needs masking statistics or source planes", c.id)));
            }
        }
        Ok(m)
    }
}

fn coded_qp(clip: &ClipEntry, key: &str) -> Result<u8> {
    key.parse::<u8>()
        .ok()
        .filter(|q| (1..=MAX_QP).contains(q))
        .ok_or_else(|| Error::invalid(format!("clip `{}`: coded key `{key}` is not a QP in 1..=51", clip.id)))
}

fn read_planes(clip: &ClipEntry, path: &Path) -> Result<LumaClip> {
    let (w, h) = clip.resolution.dimensions();
    let luma = LumaClip::read(path, w, h)?;
    if luma.frame_count() != clip.frames {
        return Err(Error::invalid(format!(
            "{}: {} frames, manifest says {}",
            path.display(),
            luma.frame_count(),
            clip.frames
        )));
    }
    Ok(luma)
}

fn plane_ladder(clip: &ClipEntry) -> Result<(QualityLadder, Option<MaskingStats>)> {
    let grid = clip.grid()?;
    let source = read_planes(clip, clip.source.as_deref().expect("checked at load"))?;
    let mut ladder = QualityLadder::new(&clip.id, clip.metric.as_deref().unwrap_or("psnr"), grid.segment_count())?;
    for (key, path) in &clip.coded {
        let qp = coded_qp(clip, key)?;
        ladder.insert(qp, segment_quality_psnr(&source, &read_planes(clip, path)?, &grid)?)?;
    }
    let masking = match clip.masking {
        Some(m) => Some(m),
        None => Some(masking_features(&source, &grid)?),
    };
    Ok((ladder, masking))
}

/// Loads ladders, masking statistics and JND panels for every clip.
pub fn load_corpus(manifest_path: &Path) -> Result<Corpus> {
    let manifest = Manifest::load(manifest_path)?;
    let mut score_files: HashMap<PathBuf, HashMap<String, QualityLadder>> = HashMap::new();
    let mut panels: HashMap<(String, Resolution), BTreeMap<u8, crate::stats::JndSampleSet>> = HashMap::new();
    if let Some(p) = &manifest.samples {
        for set in read_samples(p)? {
            panels
                .entry((set.clip_id.clone(), set.resolution))
                .or_default()
                .insert(set.jnd_order, set);
        }
    }
    let mut clips = Vec::with_capacity(manifest.clips.len());
    for entry in &manifest.clips {
        let (ladder, masking) = match &entry.scores {
            Some(path) => {
                if !score_files.contains_key(path) {
                    let all = read_scores(path)?.into_iter().map(|l| (l.clip_id.clone(), l)).collect();
                    score_files.insert(path.clone(), all);
                }
                let mut ladder = score_files[path].get(&entry.id).cloned().ok_or_else(|| {
                    Error::invalid(format!("{}: no scores for clip `{}`", path.display(), entry.id))
                })?;
                ladder.metric = entry.metric.clone().unwrap_or_else(|| INGESTED_METRIC.to_owned());
                let masking = match (entry.masking, &entry.source) {
                    (Some(m), _) => m,
                    (None, Some(src)) => masking_features(&read_planes(entry, src)?, &entry.grid()?)?,
                    (None, None) => unreachable!("checked at load"),
                };
                (ladder, masking)
            }
            None => {
                let (l, m) = plane_ladder(entry)?;
                (l, m.expect("masking resolved"))
            }
        };
        clips.push(ClipData {
            clip_id: entry.id.clone(),
            resolution: entry.resolution,
            ladder,
            masking,
            jnd_sets: panels.remove(&(entry.id.clone(), entry.resolution)).unwrap_or_default(),
        });
    }
    Ok(Corpus { clips })
}

/// Writes a corpus as a score-file manifest: `manifest.toml`,
/// `samples.csv` and one `scores_<resolution>.csv` per resolution.
pub fn write_synthetic_corpus(dir: &Path, corpus: &Corpus, frames: usize, frame_rate: f64) -> Result<PathBuf> {
    for res in corpus.resolutions() {
        let ladders: Vec<&QualityLadder> = corpus.clips_at(res).into_iter().map(|c| &c.ladder).collect();
        write_scores(&dir.join(format!("scores_{res}.csv")), &ladders)?;
    }
    let mut entries = vec![];
    let mut sets = vec![];
    for c in &corpus.clips {
        entries.push(ClipEntry {
            id: c.clip_id.clone(),
            resolution: c.resolution,
            frames,
            frame_rate,
            temporal_len: None,
            scores: Some(PathBuf::from(format!("scores_{}.csv", c.resolution))),
            metric: Some(c.ladder.metric.clone()),
            masking: Some(c.masking),
            source: None,
            coded: BTreeMap::new(),
        });
        sets.extend(c.jnd_sets.values().cloned());
    }
    write_samples(&dir.join("samples.csv"), &sets)?;
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        samples: Some(PathBuf::from("samples.csv")),
        clips: entries,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    let path = dir.join("manifest.toml");
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}
