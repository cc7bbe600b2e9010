//! Source video corpus: a directory of frame directories and, optionally,
//! container files that are decoded through the external transcoder.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{probe_dir, Fps, FrameSequence, SequenceMeta, METADATA_FILE};
use crate::taskgen::{SourceRef, VideoShape};
use crate::transcoder::{is_video_file, TranscoderConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub dir: PathBuf,
    pub meta: SequenceMeta,
}

impl CorpusEntry {
    pub fn shape(&self) -> VideoShape {
        VideoShape {
            num_frames: self.meta.num_frames,
            fps: self.meta.fps,
            width: self.meta.width,
            height: self.meta.height,
        }
    }

    /// An empty `dir` marks a virtual entry with no files behind it.
    pub fn source_ref(&self) -> SourceRef {
        let dir = (!self.dir.as_os_str().is_empty()).then(|| self.dir.to_string_lossy().into_owned());
        SourceRef::from_shape(&self.id, &self.shape(), dir)
    }

    pub fn load(&self) -> Result<FrameSequence> {
        Ok(FrameSequence::load_dir(&self.dir, Some(self.meta.fps))?.with_id(self.id.clone()))
    }
}

/// Videos sorted by id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn new(mut entries: Vec<CorpusEntry>) -> Result<Self> {
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Corpus(format!("duplicate video id {}", e.id)));
            }
        }
        Ok(Corpus { entries })
    }

    /// Scans `root`. Every subdirectory holding images is a video; its id is
    /// the sidecar id or the directory name. Container files are decoded at
    /// `fps` into `cache/<stem>` first, unless already decoded there.
    pub fn scan(root: &Path, fps: Fps, transcoder: &TranscoderConfig, cache: &Path) -> Result<Self> {
        let mut paths: Vec<PathBuf> = fs::read_dir(root)
            .map_err(|e| Error::io(root, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        paths.sort();
        let mut entries = Vec::new();
        for path in paths {
            if path.is_dir() {
                match probe_dir(&path, Some(fps)) {
                    Ok(meta) => entries.push(CorpusEntry {
                        id: meta.id.clone(),
                        dir: canonical(&path)?,
                        meta,
                    }),
                    Err(Error::NoFrames(_)) => continue,
                    Err(e) => return Err(e),
                }
            } else if is_video_file(&path) {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let dir = cache.join(&stem);
                if !dir.join(METADATA_FILE).exists() {
                    transcoder.decode(&path, &dir, fps)?;
                    let seq = FrameSequence::load(&dir, fps)?.with_id(stem.clone());
                    write_sidecar(&dir, &seq.meta())?;
                }
                let meta = probe_dir(&dir, Some(fps))?;
                entries.push(CorpusEntry {
                    id: meta.id.clone(),
                    dir: canonical(&dir)?,
                    meta,
                });
            }
        }
        if entries.is_empty() {
            return Err(Error::Corpus(format!("no videos found under {}", root.display())));
        }
        Corpus::new(entries)
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn canonical(path: &Path) -> Result<PathBuf> {
    fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

fn write_sidecar(dir: &Path, meta: &SequenceMeta) -> Result<()> {
    let path = dir.join(METADATA_FILE);
    let text = serde_json::to_string(meta).map_err(|e| Error::json("metadata", e))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}
