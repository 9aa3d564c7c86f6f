//! On-disk session format.
//!
//! ```text
//! <root>/<participant_id>/<task>_<level>/
//!     manifest.json      {"participant", "task", "level", "duration_s"}
//!     rr.csv             t_s,rr_ms
//!     pupil_left.csv     t_s,diameter_mm,confidence
//!     pupil_right.csv    t_s,diameter_mm,confidence
//!     driving.csv        t_s,lateral_position_m,target_lane
//!     events.csv         t_s,kind,payload
//! ```
//!
//! Floats are written with Rust's shortest round-trip representation, so
//! `write_dataset` followed by `load_dataset` is bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Dataset, DrivingSample, EventKind, LoadLevel, PupilSample, RrSample, SessionSegment, TaskEvent,
    TaskKind,
};
use crate::validate::{self, Issue, Severity};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RR_FILE: &str = "rr.csv";
pub const PUPIL_LEFT_FILE: &str = "pupil_left.csv";
pub const PUPIL_RIGHT_FILE: &str = "pupil_right.csv";
pub const DRIVING_FILE: &str = "driving.csv";
pub const EVENTS_FILE: &str = "events.csv";

const RR_HEADER: [&str; 2] = ["t_s", "rr_ms"];
const PUPIL_HEADER: [&str; 3] = ["t_s", "diameter_mm", "confidence"];
const DRIVING_HEADER: [&str; 3] = ["t_s", "lateral_position_m", "target_lane"];
const EVENTS_HEADER: [&str; 3] = ["t_s", "kind", "payload"];

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    participant: String,
    task: String,
    level: String,
    duration_s: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Abort on the first bad segment instead of skipping it.
    pub strict: bool,
}

/// A segment directory that was not loaded, with the reason.
#[derive(Debug, Clone)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadReport {
    pub dataset: Dataset,
    pub skipped: Vec<Skipped>,
    /// Non-fatal issues of loaded segments, keyed by segment label.
    pub warnings: Vec<(String, Issue)>,
}

/// Loads every segment under `root`, skipping (or in strict mode rejecting)
/// segments that fail parsing or validation.
pub fn load_dataset(root: &Path, options: LoadOptions) -> Result<LoadReport> {
    let dirs = segment_dirs(root)?;
    if dirs.is_empty() {
        return Err(Error::NoSegments(root.to_path_buf()));
    }

    let loaded: Vec<(PathBuf, Result<SessionSegment>)> = dirs
        .into_par_iter()
        .map(|dir| {
            let seg = read_segment(&dir);
            (dir, seg)
        })
        .collect();

    let mut segments: Vec<SessionSegment> = Vec::new();
    let mut skipped = Vec::new();
    let mut warnings = Vec::new();
    for (dir, result) in loaded {
        let checked = result.and_then(|seg| {
            let issues = validate::validate_segment(&seg);
            if let Some(err) = issues.iter().find(|i| i.severity == Severity::Error) {
                return Err(Error::InvalidSegment {
                    segment: seg.label(),
                    message: err.message.clone(),
                });
            }
            let duplicate = segments.iter().any(|s| s.key() == seg.key());
            if duplicate {
                return Err(Error::DuplicateSegment {
                    participant: seg.participant_id.clone(),
                    task: seg.task.to_string(),
                    level: seg.level.to_string(),
                    path: dir.clone(),
                });
            }
            Ok((seg, issues))
        });
        match checked {
            Ok((seg, issues)) => {
                let label = seg.label();
                warnings.extend(issues.into_iter().map(|i| (label.clone(), i)));
                segments.push(seg);
            }
            Err(e) if options.strict => return Err(e),
            Err(e) => skipped.push(Skipped {
                path: dir,
                reason: e.to_string(),
            }),
        }
    }

    if segments.is_empty() {
        return Err(Error::NoSegments(root.to_path_buf()));
    }
    let dataset = Dataset::new(segments)?;
    for issue in validate::validate_dataset(&dataset) {
        warnings.push(("dataset".to_string(), issue));
    }
    Ok(LoadReport {
        dataset,
        skipped,
        warnings,
    })
}

/// Segment directories (those holding a manifest or any segment file), in
/// sorted path order.
fn segment_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(Error::format(root, "dataset root is not a directory"));
    }
    let mut dirs = Vec::new();
    for participant in sorted_entries(root)? {
        if !participant.is_dir() {
            continue;
        }
        for seg in sorted_entries(&participant)? {
            if seg.is_dir() {
                dirs.push(seg);
            }
        }
    }
    Ok(dirs)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        out.push(entry.path());
    }
    out.sort();
    Ok(out)
}

/// Reads a single segment directory without validating it.
pub fn read_segment(dir: &Path) -> Result<SessionSegment> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::format(dir, "missing manifest.json"));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::format(&manifest_path, format!("malformed manifest: {e}")))?;
    let task: TaskKind = manifest
        .task
        .parse()
        .map_err(|e: Error| Error::format(&manifest_path, format!("field \"task\": {e}")))?;
    let level: LoadLevel = manifest
        .level
        .parse()
        .map_err(|e: Error| Error::format(&manifest_path, format!("field \"level\": {e}")))?;
    if manifest.participant.is_empty() {
        return Err(Error::format(&manifest_path, "field \"participant\" is empty"));
    }
    if !manifest.duration_s.is_finite() {
        return Err(Error::format(&manifest_path, "field \"duration_s\" is not finite"));
    }

    let mut seg = SessionSegment::empty(manifest.participant, task, level, manifest.duration_s);

    let rr_path = dir.join(RR_FILE);
    if !rr_path.is_file() {
        return Err(Error::format(dir, "missing rr.csv"));
    }
    seg.rr_intervals = read_rows(&rr_path, &RR_HEADER, |f, line| {
        Ok(RrSample {
            t_s: num(&rr_path, line, "t_s", &f[0])?,
            rr_ms: num(&rr_path, line, "rr_ms", &f[1])?,
        })
    })?;
    seg.pupil_left = read_pupil(&dir.join(PUPIL_LEFT_FILE))?;
    seg.pupil_right = read_pupil(&dir.join(PUPIL_RIGHT_FILE))?;

    let driving_path = dir.join(DRIVING_FILE);
    if driving_path.is_file() {
        seg.driving = read_rows(&driving_path, &DRIVING_HEADER, |f, line| {
            let lane = f[2].parse::<u8>().map_err(|_| {
                Error::format(
                    &driving_path,
                    format!("line {line}: field \"target_lane\" is not a lane index: {:?}", &f[2]),
                )
            })?;
            Ok(DrivingSample {
                t_s: num(&driving_path, line, "t_s", &f[0])?,
                lateral_position_m: num(&driving_path, line, "lateral_position_m", &f[1])?,
                target_lane: lane,
            })
        })?;
    }

    let events_path = dir.join(EVENTS_FILE);
    if events_path.is_file() {
        seg.events = read_rows(&events_path, &EVENTS_HEADER, |f, line| {
            let kind: EventKind = f[1].parse().map_err(|e: Error| {
                Error::format(&events_path, format!("line {line}: field \"kind\": {e}"))
            })?;
            Ok(TaskEvent {
                t_s: num(&events_path, line, "t_s", &f[0])?,
                kind,
                payload: if f[2].is_empty() {
                    None
                } else {
                    Some(f[2].to_string())
                },
            })
        })?;
    }

    let expected_dir = format!("{}_{}", seg.task, seg.level);
    if dir.file_name().and_then(|n| n.to_str()) != Some(expected_dir.as_str()) {
        return Err(Error::format(
            &manifest_path,
            format!("manifest describes {expected_dir} but directory name differs"),
        ));
    }
    Ok(seg)
}

fn read_pupil(path: &Path) -> Result<Vec<PupilSample>> {
    if !path.is_file() {
        return Ok(Vec::new());
    }
    read_rows(path, &PUPIL_HEADER, |f, line| {
        Ok(PupilSample {
            t_s: num(path, line, "t_s", &f[0])?,
            diameter_mm: num(path, line, "diameter_mm", &f[1])?,
            confidence: num(path, line, "confidence", &f[2])?,
        })
    })
}

fn num(path: &Path, line: u64, field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| {
        Error::format(
            path,
            format!("line {line}: field \"{field}\" is not numeric: {raw:?}"),
        )
    })
}

fn read_rows<T>(
    path: &Path,
    header: &[&str],
    mut parse: impl FnMut(&csv::StringRecord, u64) -> Result<T>,
) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let found = reader
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::format(
            path,
            format!("expected header {:?}, found {:?}", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::format(
                path,
                format!(
                    "line {line}: expected {} fields, found {}",
                    header.len(),
                    record.len()
                ),
            ));
        }
        out.push(parse(&record, line)?);
    }
    Ok(out)
}

/// Writes one segment into `<root>/<participant>/<task>_<level>/`.
pub fn write_segment(root: &Path, seg: &SessionSegment) -> Result<PathBuf> {
    let dir = root
        .join(&seg.participant_id)
        .join(format!("{}_{}", seg.task, seg.level));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let manifest = Manifest {
        participant: seg.participant_id.clone(),
        task: seg.task.to_string(),
        level: seg.level.to_string(),
        duration_s: seg.duration_s,
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;

    write_rows(&dir.join(RR_FILE), &RR_HEADER, &seg.rr_intervals, |r| {
        vec![r.t_s.to_string(), r.rr_ms.to_string()]
    })?;
    for (name, samples) in [(PUPIL_LEFT_FILE, &seg.pupil_left), (PUPIL_RIGHT_FILE, &seg.pupil_right)] {
        write_rows(&dir.join(name), &PUPIL_HEADER, samples, |s| {
            vec![
                s.t_s.to_string(),
                s.diameter_mm.to_string(),
                s.confidence.to_string(),
            ]
        })?;
    }
    write_rows(&dir.join(DRIVING_FILE), &DRIVING_HEADER, &seg.driving, |s| {
        vec![
            s.t_s.to_string(),
            s.lateral_position_m.to_string(),
            s.target_lane.to_string(),
        ]
    })?;
    write_rows(&dir.join(EVENTS_FILE), &EVENTS_HEADER, &seg.events, |e| {
        vec![
            e.t_s.to_string(),
            e.kind.as_str().to_string(),
            e.payload.clone().unwrap_or_default(),
        ]
    })?;
    Ok(dir)
}

pub fn write_dataset(root: &Path, dataset: &Dataset) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    dataset
        .segments()
        .par_iter()
        .try_for_each(|seg| write_segment(root, seg).map(|_| ()))
}

fn write_rows<T>(path: &Path, header: &[&str], rows: &[T], fields: impl Fn(&T) -> Vec<String>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(std::io::BufWriter::new(file));
    let wrap = |e: csv::Error| Error::format(path, e.to_string());
    writer.write_record(header).map_err(wrap)?;
    for row in rows {
        writer.write_record(fields(row)).map_err(wrap)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
