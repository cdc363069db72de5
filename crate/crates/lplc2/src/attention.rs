//! Bottom-up multi-attention ensemble: attention-field creation on motion
//! salience, quadrant-wise nonlinear integration per field, and the
//! retention/removal lifecycle, with the three model variants.

use crate::config::{ModelConfig, Variant};
use crate::events::{AfSnapshot, DetectionEvent};
use crate::field::ScalarField;
use crate::lobula::DirectionalMotion;
use crate::medulla::Direction;

/// One attention field: a disk-shaped receptive region with its per-frame
/// response history.
#[derive(Debug, Clone)]
pub struct AttentionField {
    pub id: u64,
    pub cx: usize,
    pub cy: usize,
    pub radius: usize,
    pub birth_frame: usize,
    /// Responses per frame since birth, the birth frame included.
    pub response_history: Vec<f64>,
}

impl AttentionField {
    fn contains(&self, x: usize, y: usize) -> bool {
        let dx = x as f64 - self.cx as f64;
        let dy = y as f64 - self.cy as f64;
        dx * dx + dy * dy <= (self.radius * self.radius) as f64
    }

    /// Sum of the most recent `window` responses.
    pub fn windowed_sum(&self, window: usize) -> f64 {
        let n = self.response_history.len();
        self.response_history[n.saturating_sub(window)..].iter().sum()
    }
}

/// Candidate location for a new attention field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub x: usize,
    pub y: usize,
    pub value: f64,
}

/// Live ensemble of attention fields.
#[derive(Debug, Clone, Default)]
pub struct EnsembleState {
    fields: Vec<AttentionField>,
    next_id: u64,
    frame_index: usize,
}

impl EnsembleState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fields(&self) -> &[AttentionField] {
        &self.fields
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    fn spawn(&mut self, cx: usize, cy: usize, frame: usize, radius: usize) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.fields.push(AttentionField {
            id,
            cx,
            cy,
            radius,
            birth_frame: frame,
            response_history: Vec::new(),
        });
        id
    }
}

/// Highest motion magnitude outside every existing attention field.
///
/// Returns the argmax over eligible pixels when it exceeds the creation
/// threshold; ties resolve to the smallest row, then column, so repeated runs
/// pick the same pixel.
pub fn find_candidate(magnitude: &ScalarField, state: &EnsembleState, config: &ModelConfig) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for y in 0..magnitude.height() {
        for x in 0..magnitude.width() {
            if state.fields.iter().any(|af| af.contains(x, y)) {
                continue;
            }
            let v = magnitude.get(x, y);
            if best.map_or(true, |b| v > b.value) {
                best = Some(Candidate { x, y, value: v });
            }
        }
    }
    best.filter(|c| c.value > config.t_a)
}

/// Quadrant-wise nonlinear integration of one attention field.
///
/// Each quadrant of the field's disk sums its two outward motion components;
/// negative quadrant totals clip to zero, and the response is the four-way
/// sum gated on every quadrant being active. Pixels on the dividing axes
/// belong to no quadrant.
pub fn integrate_af(af: &AttentionField, dm: &DirectionalMotion, config: &ModelConfig) -> f64 {
    let (w, h) = (dm.width(), dm.height());
    let (cx, cy) = (af.cx as isize, af.cy as isize);
    let r2 = (af.radius * af.radius) as isize;
    let lm_r = dm.map(Direction::Right);
    let lm_l = dm.map(Direction::Left);
    let lm_u = dm.map(Direction::Up);
    let lm_d = dm.map(Direction::Down);

    let x0 = (cx - af.radius as isize).max(0) as usize;
    let x1 = (cx + af.radius as isize).min(w as isize - 1) as usize;
    let y0 = (cy - af.radius as isize).max(0) as usize;
    let y1 = (cy + af.radius as isize).min(h as isize - 1) as usize;

    let mut q = [0.0f64; 4];
    for y in y0..=y1 {
        for x in x0..=x1 {
            let dx = x as isize - cx;
            let dy = y as isize - cy;
            if dx * dx + dy * dy > r2 || dx == 0 || dy == 0 {
                continue;
            }
            match (dx > 0, dy < 0) {
                (true, true) => q[0] += lm_r.get(x, y) + lm_u.get(x, y),
                (false, true) => q[1] += lm_l.get(x, y) + lm_u.get(x, y),
                (false, false) => q[2] += lm_l.get(x, y) + lm_d.get(x, y),
                (true, false) => q[3] += lm_r.get(x, y) + lm_d.get(x, y),
            }
        }
    }
    for v in &mut q {
        *v = v.max(0.0);
    }
    if q.iter().all(|&v| v > config.gate_epsilon) {
        q.iter().sum()
    } else {
        0.0
    }
}

/// Magnitude-weighted centroid over the salient (super-threshold) pixels.
fn salience_centroid(magnitude: &ScalarField, config: &ModelConfig) -> Option<(usize, usize)> {
    let (mut sx, mut sy, mut total) = (0.0f64, 0.0f64, 0.0f64);
    for y in 0..magnitude.height() {
        for x in 0..magnitude.width() {
            let v = magnitude.get(x, y);
            if v > config.t_a {
                sx += v * x as f64;
                sy += v * y as f64;
                total += v;
            }
        }
    }
    if total > 0.0 {
        let cx = (sx / total).round() as usize;
        let cy = (sy / total).round() as usize;
        Some((cx.min(magnitude.width() - 1), cy.min(magnitude.height() - 1)))
    } else {
        None
    }
}

/// Advance the ensemble by one frame: create at most one field, integrate
/// every field, then apply the retention rule.
pub fn step(state: &mut EnsembleState, dm: &DirectionalMotion, config: &ModelConfig) -> DetectionEvent {
    state.frame_index += 1;
    let frame = state.frame_index;
    let mut created = Vec::new();

    match config.variant {
        Variant::Center => {
            if state.fields.is_empty() {
                let id = state.spawn(dm.width() / 2, dm.height() / 2, frame, config.r_af);
                created.push(id);
            }
        }
        Variant::Multi | Variant::Single => {
            let below_cap = config.af_cap().map_or(true, |cap| state.fields.len() < cap);
            if below_cap {
                if let Some(c) = find_candidate(dm.magnitude(), state, config) {
                    let (cx, cy) = if config.variant == Variant::Single {
                        salience_centroid(dm.magnitude(), config).unwrap_or((c.x, c.y))
                    } else {
                        (c.x, c.y)
                    };
                    let id = state.spawn(cx, cy, frame, config.r_af);
                    created.push(id);
                }
            }
        }
    }

    for af in &mut state.fields {
        let response = integrate_af(af, dm, config);
        af.response_history.push(response);
    }

    let mut removed = Vec::new();
    if config.variant != Variant::Center {
        let mut keep = Vec::with_capacity(state.fields.len());
        let mut expired: Vec<AttentionField> = Vec::new();
        for af in state.fields.drain(..) {
            let age = frame - af.birth_frame;
            if age >= config.d_frames && af.windowed_sum(config.d_frames) < config.t_d {
                expired.push(af);
            } else {
                keep.push(af);
            }
        }
        if config.variant == Variant::Multi && keep.is_empty() && !expired.is_empty() {
            // keep the strongest by windowed sum; ties go to the oldest id
            let mut best = 0;
            for i in 1..expired.len() {
                let a = expired[i].windowed_sum(config.d_frames);
                let b = expired[best].windowed_sum(config.d_frames);
                if a > b || (a == b && expired[i].id < expired[best].id) {
                    best = i;
                }
            }
            keep.push(expired.remove(best));
            keep.sort_by_key(|af| af.id);
        }
        removed = expired.iter().map(|af| af.id).collect();
        state.fields = keep;
    }

    let afs = state
        .fields
        .iter()
        .map(|af| AfSnapshot {
            id: af.id,
            cx: af.cx,
            cy: af.cy,
            radius: af.radius,
            response: *af.response_history.last().expect("integrated this frame"),
            age_frames: frame - af.birth_frame,
            windowed_sum: af.windowed_sum(config.d_frames),
        })
        .collect();

    DetectionEvent { frame_index: frame, afs, created, removed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;

    fn config() -> ModelConfig {
        ModelConfig::default()
    }

    fn motion_from(maps: [ScalarField; 4]) -> DirectionalMotion {
        DirectionalMotion::from_maps(maps)
    }

    /// Radial expansion around (cx, cy): each map positive on its own side.
    fn radial_motion(w: usize, h: usize, cx: usize, cy: usize, gain: f64) -> DirectionalMotion {
        radial_motion_peaked(w, h, cx, cy, gain, false)
    }

    /// As `radial_motion`, optionally decaying away from the center so the
    /// magnitude argmax lands next to (cx, cy).
    fn radial_motion_peaked(
        w: usize,
        h: usize,
        cx: usize,
        cy: usize,
        gain: f64,
        peaked: bool,
    ) -> DirectionalMotion {
        let mut r = ScalarField::zeros(w, h);
        let mut l = ScalarField::zeros(w, h);
        let mut u = ScalarField::zeros(w, h);
        let mut d = ScalarField::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let d2 = (x as f64 - cx as f64).powi(2) + (y as f64 - cy as f64).powi(2);
                let g = if peaked { gain / (1.0 + d2 / 200.0) } else { gain };
                if x > cx {
                    r.set(x, y, g);
                }
                if x < cx {
                    l.set(x, y, g);
                }
                if y < cy {
                    u.set(x, y, g);
                }
                if y > cy {
                    d.set(x, y, g);
                }
            }
        }
        motion_from([r, l, u, d])
    }

    #[test]
    fn zero_magnitude_produces_no_candidate() {
        let dm = motion_from([
            ScalarField::zeros(60, 60),
            ScalarField::zeros(60, 60),
            ScalarField::zeros(60, 60),
            ScalarField::zeros(60, 60),
        ]);
        let state = EnsembleState::new();
        assert!(find_candidate(dm.magnitude(), &state, &config()).is_none());
    }

    #[test]
    fn single_peak_is_found() {
        let mut r = ScalarField::zeros(80, 60);
        r.set(50, 30, 12.0);
        let dm = motion_from([r, ScalarField::zeros(80, 60), ScalarField::zeros(80, 60), ScalarField::zeros(80, 60)]);
        let state = EnsembleState::new();
        let c = find_candidate(dm.magnitude(), &state, &config()).unwrap();
        assert_eq!((c.x, c.y), (50, 30));
        assert!((c.value - 12.0).abs() < 1e-12);
    }

    #[test]
    fn peaks_inside_existing_fields_are_excluded() {
        let mut r = ScalarField::zeros(120, 90);
        r.set(40, 40, 12.0); // inside the existing field below
        r.set(100, 20, 11.0);
        let dm = motion_from([r, ScalarField::zeros(120, 90), ScalarField::zeros(120, 90), ScalarField::zeros(120, 90)]);
        let mut state = EnsembleState::new();
        state.spawn(38, 42, 1, 40);
        let c = find_candidate(dm.magnitude(), &state, &config()).unwrap();
        assert_eq!((c.x, c.y), (100, 20));
        assert!((c.value - 11.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_magnitude_and_threshold_keeps_the_argmax() {
        let mut r = ScalarField::zeros(50, 50);
        r.set(10, 30, 11.0);
        r.set(31, 7, 14.0);
        r.set(44, 44, 13.5);
        let base = motion_from([r, ScalarField::zeros(50, 50), ScalarField::zeros(50, 50), ScalarField::zeros(50, 50)]);
        let state = EnsembleState::new();
        let cfg = config();
        let c0 = find_candidate(base.magnitude(), &state, &cfg).unwrap();
        for k in [0.5, 2.0, 128.0] {
            let scaled = base.magnitude().map(|v| k * v);
            let mut cfg_k = cfg.clone();
            cfg_k.t_a = cfg.t_a * k;
            let ck = find_candidate(&scaled, &state, &cfg_k).unwrap();
            assert_eq!((ck.x, ck.y), (c0.x, c0.y));
        }
    }

    #[test]
    fn radial_expansion_activates_all_quadrants() {
        let dm = radial_motion(101, 101, 50, 50, 1.0);
        let af = AttentionField {
            id: 0,
            cx: 50,
            cy: 50,
            radius: 40,
            birth_frame: 1,
            response_history: Vec::new(),
        };
        let cfg = config();
        let got = integrate_af(&af, &dm, &cfg);
        // direct recount over the disk
        let mut expect = 0.0;
        for y in 0..101isize {
            for x in 0..101isize {
                let (dx, dy) = (x - 50, y - 50);
                if dx * dx + dy * dy <= 1600 && dx != 0 && dy != 0 {
                    expect += 2.0; // every off-axis disk pixel sums two unit components
                }
            }
        }
        assert!((got - expect).abs() < 1e-9);
        assert!(got > 0.0);
    }

    #[test]
    fn unidirectional_flow_is_gated_out() {
        let mut r = ScalarField::zeros(101, 101);
        for y in 0..101 {
            for x in 0..101 {
                r.set(x, y, 2.0);
            }
        }
        let dm = motion_from([r, ScalarField::zeros(101, 101), ScalarField::zeros(101, 101), ScalarField::zeros(101, 101)]);
        let af = AttentionField { id: 0, cx: 50, cy: 50, radius: 40, birth_frame: 1, response_history: Vec::new() };
        assert_eq!(integrate_af(&af, &dm, &config()), 0.0);
    }

    #[test]
    fn contraction_is_gated_out() {
        // inward flow: left map positive on the right half, and so on
        let (w, h, cx, cy) = (101usize, 101usize, 50usize, 50usize);
        let mut r = ScalarField::zeros(w, h);
        let mut l = ScalarField::zeros(w, h);
        let mut u = ScalarField::zeros(w, h);
        let mut d = ScalarField::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                if x > cx {
                    l.set(x, y, 1.0);
                }
                if x < cx {
                    r.set(x, y, 1.0);
                }
                if y < cy {
                    d.set(x, y, 1.0);
                }
                if y > cy {
                    u.set(x, y, 1.0);
                }
            }
        }
        let dm = motion_from([r, l, u, d]);
        let af = AttentionField { id: 0, cx, cy, radius: 40, birth_frame: 1, response_history: Vec::new() };
        assert_eq!(integrate_af(&af, &dm, &config()), 0.0);
    }

    #[test]
    fn first_super_threshold_frame_creates_one_field() {
        let mut cfg = config();
        cfg.t_a = 0.5;
        let mut state = EnsembleState::new();
        let dm = radial_motion_peaked(101, 101, 50, 50, 1.0, true);
        let ev = step(&mut state, &dm, &cfg);
        assert_eq!(ev.frame_index, 1);
        assert_eq!(ev.created.len(), 1);
        assert_eq!(ev.afs.len(), 1);
        assert_eq!(ev.afs[0].age_frames, 0);
        // argmax sits beside the expansion center, so all quadrants fire
        assert!(ev.afs[0].cx.abs_diff(50) <= 1 && ev.afs[0].cy.abs_diff(50) <= 1);
        assert!(ev.afs[0].response > 0.0);
    }

    #[test]
    fn stale_fields_expire_but_last_one_survives() {
        let mut cfg = config();
        cfg.t_a = 0.5;
        cfg.t_d = 10.0;
        cfg.d_frames = 3;
        let mut state = EnsembleState::new();
        let active = radial_motion_peaked(101, 101, 50, 50, 1.0, true);
        let quiet = motion_from([
            ScalarField::zeros(101, 101),
            ScalarField::zeros(101, 101),
            ScalarField::zeros(101, 101),
            ScalarField::zeros(101, 101),
        ]);
        let ev = step(&mut state, &active, &cfg);
        assert_eq!(ev.created.len(), 1);
        for _ in 0..10 {
            let ev = step(&mut state, &quiet, &cfg);
            // retention: the lone field never disappears
            assert_eq!(ev.afs.len(), 1);
            assert!(ev.removed.is_empty());
        }
    }

    #[test]
    fn single_variant_caps_at_one_field_at_the_centroid() {
        let mut cfg = config();
        cfg.variant = Variant::Single;
        cfg.t_a = 0.5;
        let mut state = EnsembleState::new();
        let dm = radial_motion(101, 101, 30, 60, 1.0);
        let ev = step(&mut state, &dm, &cfg);
        assert_eq!(ev.created.len(), 1);
        // centroid of the salient mass, not the raw argmax
        let af = &state.fields()[0];
        let mag = dm.magnitude();
        let (mut sx, mut sy, mut tot) = (0.0, 0.0, 0.0);
        for y in 0..101usize {
            for x in 0..101usize {
                let v = mag.get(x, y);
                if v > cfg.t_a {
                    sx += v * x as f64;
                    sy += v * y as f64;
                    tot += v;
                }
            }
        }
        assert_eq!(af.cx, (sx / tot).round() as usize);
        assert_eq!(af.cy, (sy / tot).round() as usize);
        let ev = step(&mut state, &dm, &cfg);
        assert!(ev.created.is_empty(), "cap of one field");
    }

    #[test]
    fn center_variant_pins_one_immortal_field() {
        let mut cfg = config();
        cfg.variant = Variant::Center;
        let mut state = EnsembleState::new();
        let quiet = motion_from([
            ScalarField::zeros(100, 80),
            ScalarField::zeros(100, 80),
            ScalarField::zeros(100, 80),
            ScalarField::zeros(100, 80),
        ]);
        let ev = step(&mut state, &quiet, &cfg);
        assert_eq!(ev.created, vec![0]);
        assert_eq!((state.fields()[0].cx, state.fields()[0].cy), (50, 40));
        for _ in 0..20 {
            let ev = step(&mut state, &quiet, &cfg);
            assert_eq!(ev.afs.len(), 1);
            assert!(ev.removed.is_empty() && ev.created.is_empty());
        }
    }
}
