//! Synthetic stimulus generation: looming/receding squares, translating
//! objects, drifting gratings, and multi-object scenes over uniform or
//! horizontally shifting textured backgrounds.
//!
//! Rendering is a pure function of the spec — no random state — so any
//! scenario reproduces bit-for-bit.

use crate::field::ScalarField;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StimulusError {
    #[error("invalid stimulus: {0}")]
    Invalid(String),
    #[error("object {object} leaves the frame at frame {frame}")]
    OutOfBounds { object: usize, frame: usize },
    #[error("cannot load background image: {0}")]
    BackgroundImage(String),
}

/// Luminance polarity of an object against the background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Dark,
    Bright,
}

impl Polarity {
    pub fn level(self) -> f64 {
        match self {
            Polarity::Dark => 0.0,
            Polarity::Bright => 255.0,
        }
    }
}

/// Object geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Axis-aligned square of the track's edge length.
    Square,
    /// Vertical bar: `thickness` wide, edge length tall.
    Bar { thickness: f64 },
    /// Square-wave grating filling the track's square extent; the pattern
    /// phase is locked to the track center, so a moving center drifts it.
    Grating { period: f64 },
}

/// One object's presence window and per-frame geometry. The path vectors
/// carry one entry per present frame (`offset - onset` entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTrack {
    pub shape: Shape,
    pub polarity: Polarity,
    pub onset: usize,
    pub offset: usize,
    pub center_path: Vec<(f64, f64)>,
    pub size_path: Vec<f64>,
}

impl ObjectTrack {
    /// Square expanding (or shrinking) linearly between two edge lengths at
    /// a fixed center.
    pub fn looming_square(
        center: (f64, f64),
        edge_from: f64,
        edge_to: f64,
        onset: usize,
        offset: usize,
        polarity: Polarity,
    ) -> Self {
        let n = offset.saturating_sub(onset);
        let size_path = (0..n)
            .map(|k| {
                if n <= 1 {
                    edge_from
                } else {
                    edge_from + (edge_to - edge_from) * k as f64 / (n - 1) as f64
                }
            })
            .collect();
        Self {
            shape: Shape::Square,
            polarity,
            onset,
            offset,
            center_path: vec![center; n],
            size_path,
        }
    }

    /// Square of fixed size translating at constant velocity.
    pub fn translating_square(
        start: (f64, f64),
        velocity: (f64, f64),
        edge: f64,
        onset: usize,
        offset: usize,
        polarity: Polarity,
    ) -> Self {
        let n = offset.saturating_sub(onset);
        Self {
            shape: Shape::Square,
            polarity,
            onset,
            offset,
            center_path: (0..n)
                .map(|k| (start.0 + velocity.0 * k as f64, start.1 + velocity.1 * k as f64))
                .collect(),
            size_path: vec![edge; n],
        }
    }

    /// Full-field grating drifting horizontally.
    pub fn drifting_grating(extent: f64, period: f64, px_per_frame: f64, frames: usize) -> Self {
        Self {
            shape: Shape::Grating { period },
            polarity: Polarity::Dark,
            onset: 0,
            offset: frames,
            center_path: (0..frames).map(|k| (px_per_frame * k as f64, 0.0)).collect(),
            size_path: vec![extent; frames],
        }
    }

    /// Reverse this track in time (a receding version of a looming track).
    pub fn time_reversed(mut self) -> Self {
        self.center_path.reverse();
        self.size_path.reverse();
        self
    }
}

/// Background behind the objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    Uniform { level: f64 },
    /// A texture translated horizontally by `px_per_frame` each frame with
    /// toroidal wrap; positive values shift the scene leftward.
    Shifting { texture: Texture, px_per_frame: i64 },
}

/// Texture source for shifting backgrounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Texture {
    /// Procedural cluttered texture: smooth value noise, `contrast` units of
    /// luminance around mid-gray, features about `scale` pixels across.
    Procedural { contrast: f64, scale: f64, octaves: u32 },
    /// Grayscale image file; dimensions must match the spec.
    Image { path: String },
}

/// Complete description of a rendered sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    pub background: Background,
    pub objects: Vec<ObjectTrack>,
}

impl StimulusSpec {
    pub fn validate(&self) -> Result<(), StimulusError> {
        if self.frames < 2 {
            return Err(StimulusError::Invalid("a sequence needs at least 2 frames".into()));
        }
        if !(self.fps > 0.0) {
            return Err(StimulusError::Invalid("fps must be positive".into()));
        }
        if self.width < 1 || self.height < 1 {
            return Err(StimulusError::Invalid("frame dimensions must be at least 1x1".into()));
        }
        for (i, obj) in self.objects.iter().enumerate() {
            if obj.offset > self.frames || obj.onset >= obj.offset {
                return Err(StimulusError::Invalid(format!(
                    "object {i} presence window {}..{} does not fit {} frames",
                    obj.onset, obj.offset, self.frames
                )));
            }
            let n = obj.offset - obj.onset;
            if obj.center_path.len() != n || obj.size_path.len() != n {
                return Err(StimulusError::Invalid(format!(
                    "object {i} path length must equal its presence window ({n} frames)"
                )));
            }
            if obj.size_path.iter().any(|&s| s < 0.0) {
                return Err(StimulusError::Invalid(format!("object {i} has a negative size")));
            }
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("stimulus spec serializes")
    }

    pub fn from_toml_str(doc: &str) -> Result<Self, StimulusError> {
        let spec: StimulusSpec = toml::from_str(doc).map_err(|e| StimulusError::Invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// 32-bit integer hash to a uniform value in [0, 1).
fn hash_unit(ix: u32, iy: u32) -> f64 {
    let mut h = ix.wrapping_mul(374761393).wrapping_add(iy.wrapping_mul(668265263));
    h = (h ^ (h >> 13)).wrapping_mul(1274126177);
    h ^= h >> 16;
    h as f64 / u32::MAX as f64
}

/// Deterministic smooth value noise over a lattice, several octaves.
pub fn procedural_texture(width: usize, height: usize, contrast: f64, scale: f64, octaves: u32) -> ScalarField {
    let mut out = ScalarField::zeros(width, height);
    let mut amplitude = 1.0;
    let mut total = 0.0;
    let mut cell = scale.max(2.0);
    for octave in 0..octaves.max(1) {
        for y in 0..height {
            for x in 0..width {
                let u = x as f64 / cell;
                let v = y as f64 / cell;
                let (i0, j0) = (u as u32, v as u32);
                let (fu, fv) = (u - i0 as f64, v - j0 as f64);
                let (su, sv) = (fu * fu * (3.0 - 2.0 * fu), fv * fv * (3.0 - 2.0 * fv));
                let grid = |di: u32, dj: u32| {
                    hash_unit((i0 + di).wrapping_mul(7).wrapping_add(octave.wrapping_mul(131)),
                              (j0 + dj).wrapping_mul(13).wrapping_add(octave.wrapping_mul(17)))
                };
                let n = grid(0, 0) * (1.0 - su) * (1.0 - sv)
                    + grid(1, 0) * su * (1.0 - sv)
                    + grid(0, 1) * (1.0 - su) * sv
                    + grid(1, 1) * su * sv;
                out.set(x, y, out.get(x, y) + amplitude * n);
            }
        }
        total += amplitude;
        amplitude *= 0.5;
        cell = (cell / 2.0).max(2.0);
    }
    out.map(|v| 127.5 + (v / total - 0.5) * 2.0 * contrast)
}

fn resolve_texture(spec: &StimulusSpec, texture: &Texture) -> Result<ScalarField, StimulusError> {
    match texture {
        Texture::Procedural { contrast, scale, octaves } => {
            Ok(procedural_texture(spec.width, spec.height, *contrast, *scale, *octaves))
        }
        Texture::Image { path } => {
            let img = image::open(path).map_err(|e| StimulusError::BackgroundImage(e.to_string()))?;
            let gray = crate::io::image_to_field(&img);
            if gray.width() != spec.width || gray.height() != spec.height {
                return Err(StimulusError::BackgroundImage(format!(
                    "image is {}x{}, spec wants {}x{}",
                    gray.width(),
                    gray.height(),
                    spec.width,
                    spec.height
                )));
            }
            Ok(gray)
        }
    }
}

fn paint_object(
    frame: &mut ScalarField,
    obj: &ObjectTrack,
    k: usize,
    index: usize,
    frame_no: usize,
) -> Result<(), StimulusError> {
    let (cx, cy) = obj.center_path[k];
    let size = obj.size_path[k];
    let level = obj.polarity.level();
    let (w, h) = (frame.width() as f64, frame.height() as f64);
    let cover = |c: f64, extent: f64, p: usize| {
        let coord = p as f64 + 0.5;
        coord >= c - extent / 2.0 && coord < c + extent / 2.0
    };
    match &obj.shape {
        Shape::Square | Shape::Bar { .. } => {
            let width_extent = match &obj.shape {
                Shape::Bar { thickness } => *thickness,
                _ => size,
            };
            if size > 0.0
                && (cx - width_extent / 2.0 < 0.0
                    || cx + width_extent / 2.0 > w
                    || cy - size / 2.0 < 0.0
                    || cy + size / 2.0 > h)
            {
                return Err(StimulusError::OutOfBounds { object: index, frame: frame_no });
            }
            for y in 0..frame.height() {
                if !cover(cy, size, y) {
                    continue;
                }
                for x in 0..frame.width() {
                    if cover(cx, width_extent, x) {
                        frame.set(x, y, level);
                    }
                }
            }
        }
        Shape::Grating { period } => {
            let (dark, bright) = (0.0, 255.0);
            for y in 0..frame.height() {
                if !cover(cy, size, y) && size < h {
                    continue;
                }
                for x in 0..frame.width() {
                    if size < w && !cover(cx, size, x) {
                        continue;
                    }
                    let phase = (x as f64 - cx).rem_euclid(*period);
                    frame.set(x, y, if phase < period / 2.0 { dark } else { bright });
                }
            }
        }
    }
    Ok(())
}

/// Render the full frame sequence of a spec.
pub fn render(spec: &StimulusSpec) -> Result<Vec<ScalarField>, StimulusError> {
    spec.validate()?;
    let texture = match &spec.background {
        Background::Shifting { texture, .. } => Some(resolve_texture(spec, texture)?),
        Background::Uniform { .. } => None,
    };
    let mut frames = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let mut frame = match &spec.background {
            Background::Uniform { level } => ScalarField::filled(spec.width, spec.height, *level),
            Background::Shifting { px_per_frame, .. } => {
                let tex = texture.as_ref().expect("texture resolved above");
                let mut f = ScalarField::zeros(spec.width, spec.height);
                let shift = *px_per_frame * t as i64;
                for y in 0..spec.height {
                    for x in 0..spec.width {
                        let sx = (x as i64 + shift).rem_euclid(spec.width as i64) as usize;
                        f.set(x, y, tex.get(sx, y));
                    }
                }
                f
            }
        };
        for (i, obj) in spec.objects.iter().enumerate() {
            if t >= obj.onset && t < obj.offset {
                paint_object(&mut frame, obj, t - obj.onset, i, t)?;
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Characteristic-study defaults: field size and timing of the single-object
/// scenarios.
const STUDY_W: usize = 100;
const STUDY_H: usize = 100;
const STUDY_FRAMES: usize = 50;
const STUDY_FPS: f64 = 33.0;
const MID_GRAY: f64 = 127.5;

/// Texture used by the shifting-background scenes.
fn scene_texture() -> Texture {
    Texture::Procedural { contrast: 10.0, scale: 32.0, octaves: 2 }
}

fn uniform_study_spec(objects: Vec<ObjectTrack>) -> StimulusSpec {
    StimulusSpec {
        width: STUDY_W,
        height: STUDY_H,
        frames: STUDY_FRAMES,
        fps: STUDY_FPS,
        background: Background::Uniform { level: MID_GRAY },
        objects,
    }
}

/// The named scenarios reproduced by the built-in experiments.
pub fn builtin_scenarios() -> BTreeMap<&'static str, StimulusSpec> {
    let mut m = BTreeMap::new();
    let center = (STUDY_W as f64 / 2.0, STUDY_H as f64 / 2.0);
    let loom = |polarity| {
        uniform_study_spec(vec![ObjectTrack::looming_square(center, 6.0, 90.0, 0, STUDY_FRAMES, polarity)])
    };
    m.insert("dark_loom", loom(Polarity::Dark));
    m.insert("bright_loom", loom(Polarity::Bright));
    let recede = |polarity| {
        uniform_study_spec(vec![
            ObjectTrack::looming_square(center, 6.0, 90.0, 0, STUDY_FRAMES, polarity).time_reversed()
        ])
    };
    m.insert("dark_recede", recede(Polarity::Dark));
    m.insert("bright_recede", recede(Polarity::Bright));
    m.insert(
        "translate",
        uniform_study_spec(vec![ObjectTrack::translating_square(
            (15.0, 50.0),
            (1.5, 0.0),
            20.0,
            0,
            STUDY_FRAMES,
            Polarity::Dark,
        )]),
    );
    m.insert(
        "grating",
        uniform_study_spec(vec![ObjectTrack::drifting_grating(200.0, 20.0, 2.0, STUDY_FRAMES)]),
    );

    m.insert("four_phase", four_phase_spec());
    m.insert("six_object", six_object_spec());
    m
}

pub fn scenario(name: &str) -> Option<StimulusSpec> {
    builtin_scenarios().remove(name)
}

/// Four 100-frame phases over a leftward-shifting textured background:
/// a centered object, one in the first quadrant, one in the third, then two
/// looming synchronously in the second and fourth.
fn four_phase_spec() -> StimulusSpec {
    let mut objects = Vec::new();
    let placements: [(usize, &[(f64, f64)]); 4] = [
        (0, &[(160.0, 120.0)]),
        (100, &[(240.0, 60.0)]),
        (200, &[(80.0, 180.0)]),
        (300, &[(70.0, 50.0), (250.0, 190.0)]),
    ];
    for (start, centers) in placements {
        for &center in centers {
            objects.push(phase_track(center, start));
        }
    }
    StimulusSpec {
        width: 320,
        height: 240,
        frames: 400,
        fps: 33.0,
        background: Background::Shifting { texture: scene_texture(), px_per_frame: 1 },
        objects,
    }
}

/// One phase: 40 frames approaching (6 to 70 px), 20 stationary, 40 receding.
fn phase_track(center: (f64, f64), start: usize) -> ObjectTrack {
    let mut size_path = Vec::with_capacity(100);
    for k in 0..100usize {
        let e = if k < 40 {
            6.0 + 1.6 * k as f64
        } else if k < 60 {
            70.0
        } else {
            70.0 - 1.6 * (k - 60) as f64
        };
        size_path.push(e);
    }
    ObjectTrack {
        shape: Shape::Square,
        polarity: Polarity::Dark,
        onset: start,
        offset: start + 100,
        center_path: vec![center; 100],
        size_path,
    }
}

/// Six dark squares looming from staggered onsets at scattered positions,
/// each vanishing after its 40-frame approach.
fn six_object_spec() -> StimulusSpec {
    let placements: [((f64, f64), usize); 6] = [
        ((55.0, 60.0), 5),
        ((160.0, 55.0), 15),
        ((265.0, 60.0), 25),
        ((55.0, 180.0), 45),
        ((160.0, 185.0), 55),
        ((265.0, 180.0), 65),
    ];
    let objects = placements
        .iter()
        .map(|&(center, onset)| {
            ObjectTrack::looming_square(center, 6.0, 6.0 + 1.5 * 39.0, onset, onset + 40, Polarity::Dark)
        })
        .collect();
    StimulusSpec {
        width: 320,
        height: 240,
        frames: 140,
        fps: 33.0,
        background: Background::Shifting { texture: scene_texture(), px_per_frame: 1 },
        objects,
    }
}
