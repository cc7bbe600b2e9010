//! Manifest assembly.
//!
//! Item `g` (the g-th record overall) starts at corpus video `g mod N` and
//! moves on to the following videos when a task precondition fails, up to
//! `max_video_retries` times. Items are grouped by starting video so each
//! source is decoded once per worker, and results are written in item order
//! so the output does not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::corpus::{Corpus, CorpusEntry};
use crate::bench::manifest::{write_manifest, MANIFEST_FILE};
use crate::bench::{CellVariant, DatasetConfig, ResolvedCell};
use crate::error::{Error, Result};
use crate::frame::FrameSequence;
use crate::taskgen::{
    gen_counting, gen_grounding, gen_jigsaw, planned_counting, planned_grounding, planned_jigsaw,
    record_seed, QARecord, RecordMeta,
};

pub const VIDEOS_DIR: &str = "videos";

#[derive(Clone, Debug, PartialEq)]
pub struct AssembleOptions {
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssembleSummary {
    pub manifest: PathBuf,
    pub records: usize,
    /// Items that had to move past their first video.
    pub retried: usize,
    /// `(cell key, count)` in mix order.
    pub cells: Vec<(String, usize)>,
}

#[derive(Clone, Copy, Debug)]
struct WorkItem {
    cell: usize,
    index: usize,
    global: usize,
}

fn schedule(cells: &[ResolvedCell]) -> Vec<WorkItem> {
    let mut items = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        for index in 0..cell.count {
            let global = items.len();
            items.push(WorkItem { cell: c, index, global });
        }
    }
    items
}

fn record_meta(config: &DatasetConfig, cell: &ResolvedCell, item: &WorkItem, entry: &CorpusEntry) -> RecordMeta {
    let id = format!("{}-{:06}", cell.key(), item.index);
    RecordMeta {
        video_dir: format!("{VIDEOS_DIR}/{id}"),
        seed: record_seed(config.master_seed, &entry.id, cell.task, &cell.subtype, item.index as u64),
        source_dir: entry.source_ref().dir,
        id,
    }
}

/// Precondition failures that another video may not hit.
fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::VideoTooShort { .. }
            | Error::PlacementFailed { .. }
            | Error::InvalidSequence(_)
            | Error::InsufficientContext { .. }
    )
}

fn candidates(config: &DatasetConfig, corpus: &Corpus, item: &WorkItem) -> impl Iterator<Item = usize> {
    let n = corpus.len();
    let tries = (config.max_video_retries + 1).min(n);
    let start = item.global % n.max(1);
    (0..tries).map(move |k| (start + k) % n)
}

fn exhausted(cell: &ResolvedCell, item: &WorkItem, last: Option<Error>) -> Error {
    Error::Corpus(format!(
        "no video satisfied {} item {}{}",
        cell.key(),
        item.index,
        last.map(|e| format!(": {e}")).unwrap_or_default()
    ))
}

fn generate(
    config: &DatasetConfig,
    cell: &ResolvedCell,
    seq: &FrameSequence,
    meta: &RecordMeta,
) -> Result<(FrameSequence, QARecord)> {
    match &cell.variant {
        CellVariant::Grounding(spec) => gen_grounding(seq, spec, &config.perturb, meta),
        CellVariant::Counting(spec, d) => gen_counting(seq, spec, Some(*d), meta),
        CellVariant::Jigsaw(spec, d) => gen_jigsaw(seq, spec, Some(*d), meta),
    }
}

fn plan(config: &DatasetConfig, cell: &ResolvedCell, entry: &CorpusEntry, meta: &RecordMeta) -> Result<QARecord> {
    let source = entry.source_ref();
    match &cell.variant {
        CellVariant::Grounding(spec) => planned_grounding(&source, spec, &config.perturb, meta),
        CellVariant::Counting(spec, d) => planned_counting(&source, spec, Some(*d), meta),
        CellVariant::Jigsaw(spec, d) => planned_jigsaw(&source, spec, Some(*d), meta),
    }
}

/// Answer-only records: every draw that fixes an answer, but no pixels are
/// read or written. `video_dir` points where [`assemble_dataset`] would put
/// the video.
pub fn plan_dataset(config: &DatasetConfig, corpus: &Corpus) -> Result<Vec<QARecord>> {
    let cells = config.resolve()?;
    if corpus.is_empty() {
        return Err(Error::Corpus("corpus is empty".into()));
    }
    let run = |item: &WorkItem| -> Result<QARecord> {
        let cell = &cells[item.cell];
        let mut last = None;
        for v in candidates(config, corpus, item) {
            let entry = &corpus.entries()[v];
            let meta = record_meta(config, cell, item, entry);
            match plan(config, cell, entry, &meta) {
                Ok(r) => return Ok(r),
                Err(e) if retryable(&e) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(exhausted(cell, item, last))
    };
    let items = schedule(&cells);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(run).collect()
    }
}

struct Produced {
    global: usize,
    record: QARecord,
    retried: bool,
}

fn run_bucket(
    config: &DatasetConfig,
    cells: &[ResolvedCell],
    corpus: &Corpus,
    out_dir: &Path,
    items: &[WorkItem],
) -> Result<Vec<Produced>> {
    let mut primary: Option<(usize, FrameSequence)> = None;
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let cell = &cells[item.cell];
        let mut last = None;
        let mut done = None;
        for (k, v) in candidates(config, corpus, item).enumerate() {
            let entry = &corpus.entries()[v];
            let alt;
            let seq = if k == 0 {
                if primary.as_ref().is_none_or(|(pv, _)| *pv != v) {
                    primary = Some((v, entry.load()?));
                }
                &primary.as_ref().expect("just loaded").1
            } else {
                alt = entry.load()?;
                &alt
            };
            let meta = record_meta(config, cell, item, entry);
            match generate(config, cell, seq, &meta) {
                Ok(pair) => {
                    done = Some((pair, k > 0));
                    break;
                }
                Err(e) if retryable(&e) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        let ((video, record), retried) = done.ok_or_else(|| exhausted(cell, item, last))?;
        let dir = out_dir.join(&record.video_dir);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        video.save(&dir)?;
        out.push(Produced {
            global: item.global,
            record,
            retried,
        });
    }
    Ok(out)
}

/// Generates every record of `config` from `corpus`, writing
/// `out_dir/manifest.jsonl` and one frame directory per record under
/// `out_dir/videos`. Re-running with the same inputs reproduces the output
/// byte for byte.
pub fn assemble_dataset(config: &DatasetConfig, corpus: &Corpus, opts: &AssembleOptions) -> Result<AssembleSummary> {
    let cells = config.resolve()?;
    if corpus.is_empty() {
        return Err(Error::Corpus("corpus is empty".into()));
    }
    let videos = opts.out_dir.join(VIDEOS_DIR);
    fs::create_dir_all(&videos).map_err(|e| Error::io(&videos, e))?;

    let items = schedule(&cells);
    let mut buckets: Vec<Vec<WorkItem>> = vec![Vec::new(); corpus.len()];
    for item in &items {
        buckets[item.global % corpus.len()].push(*item);
    }
    buckets.retain(|b| !b.is_empty());

    let run = |b: &Vec<WorkItem>| run_bucket(config, &cells, corpus, &opts.out_dir, b);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Vec<Produced>>> = {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", opts.jobs)))?;
        pool.install(|| buckets.par_iter().map(run).collect())
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Vec<Produced>>> = buckets.iter().map(run).collect();

    let mut produced: Vec<Produced> = Vec::with_capacity(items.len());
    for r in results {
        produced.extend(r?);
    }
    produced.sort_by_key(|p| p.global);
    let retried = produced.iter().filter(|p| p.retried).count();
    let records: Vec<QARecord> = produced.into_iter().map(|p| p.record).collect();

    let manifest = opts.out_dir.join(MANIFEST_FILE);
    write_manifest(&manifest, &records)?;
    Ok(AssembleSummary {
        manifest,
        records: records.len(),
        retried,
        cells: cells.iter().map(|c| (c.key(), c.count)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{read_manifest, CellSpec};
    use crate::frame::Fps;
    use crate::synth::{synth_video, SynthSpec};
    use crate::taskgen::Task;

    fn corpus_on_disk(root: &Path, lens: &[usize]) -> Corpus {
        for (i, &n) in lens.iter().enumerate() {
            let id = format!("v{i}");
            synth_video(&SynthSpec {
                id: id.clone(),
                width: 48,
                height: 40,
                fps: Fps::integer(2).unwrap(),
                num_frames: n,
                seed: i as u64,
            })
            .save(&root.join(&id))
            .unwrap();
        }
        Corpus::scan(root, Fps::integer(2).unwrap(), &Default::default(), root).unwrap()
    }

    fn nine() -> DatasetConfig {
        DatasetConfig {
            total_items: 9,
            mix: vec![
                CellSpec::counted(Task::Grounding, "mixed", 3),
                CellSpec::counted(Task::Counting, "easy", 3),
                CellSpec::counted(Task::Jigsaw, "hard", 3),
            ],
            master_seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn three_per_task_and_repeatable() {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = corpus_on_disk(&tmp.path().join("c"), &[60, 48, 64]);
        let opts = |d: &str| AssembleOptions {
            out_dir: tmp.path().join(d),
            jobs: 2,
        };
        let s = assemble_dataset(&nine(), &corpus, &opts("a")).unwrap();
        assert_eq!(s.records, 9);
        let recs = read_manifest(&s.manifest).unwrap();
        for task in Task::ALL {
            assert_eq!(recs.iter().filter(|r| r.task == task).count(), 3);
        }
        assert_eq!(recs[0].id, "grounding-mixed-000000");
        assert!(tmp.path().join("a").join(&recs[4].video_dir).join("metadata.json").exists());

        assemble_dataset(&nine(), &corpus, &opts("b")).unwrap();
        let a = fs::read(tmp.path().join("a/manifest.jsonl")).unwrap();
        let b = fs::read(tmp.path().join("b/manifest.jsonl")).unwrap();
        assert_eq!(a, b);
        for r in &recs {
            let fa = fs::read(tmp.path().join("a").join(&r.video_dir).join("frame_000001.png")).unwrap();
            let fb = fs::read(tmp.path().join("b").join(&r.video_dir).join("frame_000001.png")).unwrap();
            assert_eq!(fa, fb);
        }
    }

    #[test]
    fn short_videos_are_skipped() {
        let tmp = tempfile::tempdir().unwrap();
        // v0 is too short for the default grounding spec (needs 20 s)
        let corpus = corpus_on_disk(&tmp.path().join("c"), &[10, 60]);
        let cfg = DatasetConfig {
            total_items: 4,
            mix: vec![CellSpec::counted(Task::Grounding, "Invert", 4)],
            ..Default::default()
        };
        let s = assemble_dataset(&cfg, &corpus, &AssembleOptions { out_dir: tmp.path().join("o"), jobs: 1 }).unwrap();
        assert_eq!(s.retried, 2);
        let recs = read_manifest(&s.manifest).unwrap();
        assert!(recs.iter().all(|r| r.source().unwrap().video_id == "v1"));
    }

    #[test]
    fn corpus_exhaustion_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = corpus_on_disk(&tmp.path().join("c"), &[4]);
        let cfg = DatasetConfig {
            total_items: 1,
            mix: vec![CellSpec::counted(Task::Jigsaw, "hard", 1)],
            ..Default::default()
        };
        let r = assemble_dataset(&cfg, &corpus, &AssembleOptions { out_dir: tmp.path().join("o"), jobs: 1 });
        assert!(matches!(r, Err(Error::Corpus(_))));
    }

    #[test]
    fn plans_match_rendered_answers() {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = corpus_on_disk(&tmp.path().join("c"), &[60, 48, 64]);
        let s = assemble_dataset(&nine(), &corpus, &AssembleOptions { out_dir: tmp.path().join("o"), jobs: 1 }).unwrap();
        let rendered = read_manifest(&s.manifest).unwrap();
        let planned = plan_dataset(&nine(), &corpus).unwrap();
        for (r, p) in rendered.iter().zip(&planned) {
            assert_eq!(r.id, p.id);
            assert_eq!(r.answer, p.answer);
        }
    }

    #[test]
    fn plans_without_files() {
        let entries = (0..3)
            .map(|i| CorpusEntry {
                id: format!("virtual{i}"),
                dir: PathBuf::new(),
                meta: crate::frame::SequenceMeta {
                    id: format!("virtual{i}"),
                    fps: Fps::integer(30).unwrap(),
                    width: 256,
                    height: 256,
                    num_frames: 900,
                },
            })
            .collect();
        let corpus = Corpus::new(entries).unwrap();
        let recs = plan_dataset(&nine(), &corpus).unwrap();
        assert_eq!(recs.len(), 9);
        assert_eq!(recs[0].source().unwrap().dir, None);
    }
}
