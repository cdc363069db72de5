//! Frame ingestion and result emission.
//!
//! Inputs are directories of numbered images or raw concatenated grayscale
//! frames; outputs are a line-delimited event stream, per-field response
//! CSVs, and optional per-frame motion-map dumps. All real values serialize
//! with nine significant digits so repeated runs are byte-identical.

use crate::events::DetectionEvent;
use crate::field::ScalarField;
use crate::lobula::DirectionalMotion;
use crate::medulla::Direction;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("no frames found under {0}")]
    NoFrames(PathBuf),
    #[error("need at least 2 frames, found {0}")]
    TooFewFrames(usize),
    #[error("frame {index} is {w}x{h}, expected {expect_w}x{expect_h}")]
    InconsistentDimensions { index: usize, w: usize, h: usize, expect_w: usize, expect_h: usize },
    #[error("raw input needs --raw-dims WIDTHxHEIGHT")]
    MissingRawDims,
    #[error("raw file length {len} is not a multiple of {w}x{h}")]
    RaggedRawFile { len: usize, w: usize, h: usize },
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write {path}: {reason}")]
    Unwritable { path: PathBuf, reason: String },
}

/// Standard luminance weighting for color sources.
pub fn luminance(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

/// Convert any decoded image to a luminance field.
pub fn image_to_field(img: &image::DynamicImage) -> ScalarField {
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut out = ScalarField::zeros(w, h);
    for (x, y, px) in rgb.enumerate_pixels() {
        out.set(x as usize, y as usize, luminance(px[0], px[1], px[2]));
    }
    out
}

/// Write a field as an 8-bit grayscale PNG (values clamped to [0, 255]).
pub fn field_to_png(field: &ScalarField, path: &Path) -> Result<(), EmitError> {
    let mut img = image::GrayImage::new(field.width() as u32, field.height() as u32);
    for (x, y, px) in img.enumerate_pixels_mut() {
        let v = field.get(x as usize, y as usize).clamp(0.0, 255.0).round() as u8;
        *px = image::Luma([v]);
    }
    img.save(path).map_err(|e| EmitError::Unwritable { path: path.to_path_buf(), reason: e.to_string() })
}

fn natural_key(name: &str) -> (u64, String) {
    let digits: String = name
        .chars()
        .rev()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    (digits.parse().unwrap_or(u64::MAX), name.to_string())
}

/// Read an ordered grayscale frame sequence.
///
/// A directory is treated as numbered image files; a file is treated as raw
/// concatenated 8-bit frames of the given dimensions.
pub fn ingest(source: &Path, raw_dims: Option<(usize, usize)>) -> Result<Vec<ScalarField>, IngestError> {
    let frames = if source.is_dir() {
        ingest_image_dir(source)?
    } else {
        ingest_raw(source, raw_dims)?
    };
    if frames.len() < 2 {
        return Err(IngestError::TooFewFrames(frames.len()));
    }
    Ok(frames)
}

fn ingest_image_dir(dir: &Path) -> Result<Vec<ScalarField>, IngestError> {
    let unreadable = |reason: String| IngestError::Unreadable { path: dir.to_path_buf(), reason };
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| unreadable(e.to_string()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
                Some("png" | "jpg" | "jpeg" | "pgm" | "pnm")
            )
        })
        .collect();
    if names.is_empty() {
        return Err(IngestError::NoFrames(dir.to_path_buf()));
    }
    names.sort_by_key(|p| natural_key(&p.file_name().unwrap_or_default().to_string_lossy()));
    let mut frames = Vec::with_capacity(names.len());
    for (index, path) in names.iter().enumerate() {
        let img = image::open(path)
            .map_err(|e| IngestError::Unreadable { path: path.clone(), reason: e.to_string() })?;
        let field = image_to_field(&img);
        if let Some(first) = frames.first() {
            let f: &ScalarField = first;
            if !f.same_dims(&field) {
                return Err(IngestError::InconsistentDimensions {
                    index,
                    w: field.width(),
                    h: field.height(),
                    expect_w: f.width(),
                    expect_h: f.height(),
                });
            }
        }
        frames.push(field);
    }
    Ok(frames)
}

fn ingest_raw(path: &Path, raw_dims: Option<(usize, usize)>) -> Result<Vec<ScalarField>, IngestError> {
    let (w, h) = raw_dims.ok_or(IngestError::MissingRawDims)?;
    let bytes = fs::read(path)
        .map_err(|e| IngestError::Unreadable { path: path.to_path_buf(), reason: e.to_string() })?;
    let frame_len = w * h;
    if frame_len == 0 || bytes.len() % frame_len != 0 {
        return Err(IngestError::RaggedRawFile { len: bytes.len(), w, h });
    }
    Ok(bytes
        .chunks_exact(frame_len)
        .map(|chunk| {
            let values = chunk.iter().map(|&b| b as f64).collect();
            ScalarField::from_values(w, h, values).expect("chunk length matches dims")
        })
        .collect())
}

/// Nine significant digits, scientific notation; the pipeline's serialized
/// reals are stable across platforms at this precision.
pub fn format_real(v: f64) -> String {
    format!("{v:.8e}")
}

fn event_json_line(ev: &DetectionEvent) -> String {
    let mut s = String::with_capacity(128);
    s.push_str(&format!("{{\"frame_index\":{},\"afs\":[", ev.frame_index));
    for (i, af) in ev.afs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!(
            "{{\"id\":{},\"cx\":{},\"cy\":{},\"radius\":{},\"response\":{},\"age_frames\":{},\"windowed_sum\":{}}}",
            af.id,
            af.cx,
            af.cy,
            af.radius,
            format_real(af.response),
            af.age_frames,
            format_real(af.windowed_sum)
        ));
    }
    let ids = |v: &[u64]| v.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(",");
    s.push_str(&format!("],\"created\":[{}],\"removed\":[{}]}}", ids(&ev.created), ids(&ev.removed)));
    s
}

/// Serialize an event stream to the canonical line-delimited form.
pub fn events_to_jsonl(events: &[DetectionEvent]) -> String {
    let mut out = String::new();
    for ev in events {
        out.push_str(&event_json_line(ev));
        out.push('\n');
    }
    out
}

/// Write the event stream and the per-field response CSVs into `out_dir`.
pub fn emit_events(events: &[DetectionEvent], out_dir: &Path) -> Result<(), EmitError> {
    let unwritable = |path: &Path, e: std::io::Error| EmitError::Unwritable {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    fs::create_dir_all(out_dir).map_err(|e| unwritable(out_dir, e))?;
    let events_path = out_dir.join("events.jsonl");
    fs::write(&events_path, events_to_jsonl(events)).map_err(|e| unwritable(&events_path, e))?;

    let mut series: BTreeMap<u64, Vec<(usize, f64)>> = BTreeMap::new();
    for ev in events {
        for af in &ev.afs {
            series.entry(af.id).or_default().push((ev.frame_index, af.response));
        }
    }
    for (id, rows) in series {
        let path = out_dir.join(format!("af_{id}.csv"));
        let mut body = String::from("frame,response\n");
        for (frame, response) in rows {
            body.push_str(&format!("{frame},{}\n", format_real(response)));
        }
        fs::write(&path, body).map_err(|e| unwritable(&path, e))?;
    }
    Ok(())
}

/// Dump one frame's motion maps as numeric grids for debugging.
pub fn dump_motion_fields(out_dir: &Path, frame_index: usize, dm: &DirectionalMotion) -> Result<(), EmitError> {
    let unwritable = |path: &Path, e: std::io::Error| EmitError::Unwritable {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let dir = out_dir.join("fields");
    fs::create_dir_all(&dir).map_err(|e| unwritable(&dir, e))?;
    let named: [(&str, &ScalarField); 5] = [
        ("lm", dm.magnitude()),
        ("lm_r", dm.map(Direction::Right)),
        ("lm_l", dm.map(Direction::Left)),
        ("lm_u", dm.map(Direction::Up)),
        ("lm_d", dm.map(Direction::Down)),
    ];
    for (name, field) in named {
        let path = dir.join(format!("frame_{frame_index:05}_{name}.csv"));
        let file = fs::File::create(&path).map_err(|e| unwritable(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        for y in 0..field.height() {
            let row: Vec<String> = (0..field.width()).map(|x| format_real(field.get(x, y))).collect();
            writeln!(w, "{}", row.join(",")).map_err(|e| unwritable(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::AfSnapshot;

    #[test]
    fn raw_round_trip_reconstructs_frames() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frames.raw");
        let bytes: Vec<u8> = (0..4 * 3 * 5).map(|i| (i % 251) as u8).collect();
        fs::write(&path, &bytes).unwrap();
        let frames = ingest(&path, Some((4, 3))).unwrap();
        assert_eq!(frames.len(), 5);
        for (i, frame) in frames.iter().enumerate() {
            for y in 0..3 {
                for x in 0..4 {
                    assert_eq!(frame.get(x, y), bytes[i * 12 + y * 4 + x] as f64);
                }
            }
        }
    }

    #[test]
    fn image_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for t in 0..5u8 {
            let img = image::GrayImage::from_fn(10, 8, |x, y| image::Luma([(x as u8) * 10 + y as u8 + t]));
            img.save(dir.path().join(format!("frame_{t}.png"))).unwrap();
        }
        let frames = ingest(dir.path(), None).unwrap();
        assert_eq!(frames.len(), 5);
        assert_eq!(frames[0].width(), 10);
        assert_eq!(frames[0].height(), 8);
        // grayscale sources pass through the luminance weighting unchanged
        assert!((frames[2].get(3, 4) - (30 + 4 + 2) as f64).abs() < 1e-9);
    }

    #[test]
    fn natural_order_beats_lexicographic() {
        let dir = tempfile::tempdir().unwrap();
        for t in [2u8, 10, 1] {
            let img = image::GrayImage::from_fn(4, 4, |_, _| image::Luma([t]));
            img.save(dir.path().join(format!("f{t}.png"))).unwrap();
        }
        let frames = ingest(dir.path(), None).unwrap();
        let order: Vec<f64> = frames.iter().map(|f| f.get(0, 0).round()).collect();
        assert_eq!(order, vec![1.0, 2.0, 10.0]);
    }

    #[test]
    fn mixed_dimensions_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        image::GrayImage::new(10, 10).save(dir.path().join("a_1.png")).unwrap();
        image::GrayImage::new(9, 10).save(dir.path().join("a_2.png")).unwrap();
        assert!(matches!(ingest(dir.path(), None), Err(IngestError::InconsistentDimensions { .. })));
    }

    #[test]
    fn fewer_than_two_frames_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        image::GrayImage::new(4, 4).save(dir.path().join("only.png")).unwrap();
        assert!(matches!(ingest(dir.path(), None), Err(IngestError::TooFewFrames(1))));
    }

    fn sample_events() -> Vec<DetectionEvent> {
        (10..=20)
            .map(|frame_index| DetectionEvent {
                frame_index,
                afs: vec![AfSnapshot {
                    id: 3,
                    cx: 40,
                    cy: 30,
                    radius: 40,
                    response: frame_index as f64 * 1.5,
                    age_frames: frame_index - 10,
                    windowed_sum: 100.0,
                }],
                created: if frame_index == 10 { vec![3] } else { vec![] },
                removed: vec![],
            })
            .collect()
    }

    #[test]
    fn csv_row_count_matches_lifetime() {
        let dir = tempfile::tempdir().unwrap();
        emit_events(&sample_events(), dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("af_3.csv")).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "frame,response");
        assert_eq!(rows.len() - 1, 11);
    }

    #[test]
    fn empty_event_list_writes_empty_stream_and_no_csvs() {
        let dir = tempfile::tempdir().unwrap();
        emit_events(&[], dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("events.jsonl")).unwrap(), "");
        let csvs = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
            .count();
        assert_eq!(csvs, 0);
    }

    #[test]
    fn emission_is_byte_identical_across_runs() {
        let a = events_to_jsonl(&sample_events());
        let b = events_to_jsonl(&sample_events());
        assert_eq!(a.as_bytes(), b.as_bytes());
        assert!(a.starts_with("{\"frame_index\":10,\"afs\":[{\"id\":3,"));
    }

    #[test]
    fn reals_serialize_with_nine_significant_digits() {
        assert_eq!(format_real(0.27472527472527475), "2.74725275e-1");
        assert_eq!(format_real(0.0), "0.00000000e0");
        assert_eq!(format_real(-123.456), "-1.23456000e2");
    }
}
