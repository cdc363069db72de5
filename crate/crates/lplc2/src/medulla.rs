//! Medulla stage: contrast normalization of the ON/OFF signals, first-order
//! low-pass delays, triple-correlation motion detection, and the
//! multi-distance accumulation that yields the four directional maps per
//! channel.

use crate::config::ModelConfig;
use crate::field::{build_gaussian_kernel, convolve, Boundary, FieldError, Kernel, ScalarField};

/// The four cardinal motion directions, in image coordinates (y grows
/// downward, so `Up` points toward row zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Right, Direction::Left, Direction::Up, Direction::Down];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    /// Unit step along the preferred direction.
    pub fn unit(self) -> (isize, isize) {
        match self {
            Direction::Right => (1, 0),
            Direction::Left => (-1, 0),
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
        }
    }

    pub const fn index(self) -> usize {
        match self {
            Direction::Right => 0,
            Direction::Left => 1,
            Direction::Up => 2,
            Direction::Down => 3,
        }
    }
}

/// Which half-wave channel a detector instance processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    On,
    Off,
}

/// Divisive normalization against the local spatial pool, squashed by tanh.
/// Keeps every output strictly inside (-1, 1); nonnegative inputs stay in
/// [0, 1).
pub fn contrast_normalize(raw: &ScalarField, config: &ModelConfig) -> Result<ScalarField, FieldError> {
    let pool_kernel = build_gaussian_kernel(config.sigma_c, config.r_dc);
    contrast_normalize_with(raw, &pool_kernel, config.epsilon, config.boundary)
}

pub(crate) fn contrast_normalize_with(
    raw: &ScalarField,
    pool_kernel: &Kernel,
    epsilon: f64,
    boundary: Boundary,
) -> Result<ScalarField, FieldError> {
    let pool = convolve(raw, pool_kernel, boundary)?;
    raw.zip_map(&pool, |v, p| (v / (epsilon + p)).tanh())
}

/// One step of the first-order low-pass: `alpha * current + (1 - alpha) *
/// state`. The returned field becomes the next state.
pub fn temporal_lowpass(current: &ScalarField, state: &ScalarField, alpha: f64) -> Result<ScalarField, FieldError> {
    debug_assert!((0.0..=1.0).contains(&alpha));
    current.zip_map(state, |c, s| alpha * c + (1.0 - alpha) * s)
}

/// Triple correlator preferring motion along `direction`.
///
/// Each unit pairs its own position with the trailing point `distance`
/// pixels against the preferred direction, multiplying the fresh signal here
/// with the delayed signal at both points; the mirrored product is subtracted
/// with bias `beta`, so motion running the other way drives the output
/// negative.
pub fn hrc_triple(
    n_field: &ScalarField,
    d_field: &ScalarField,
    direction: Direction,
    distance: usize,
    beta: f64,
    boundary: Boundary,
) -> ScalarField {
    debug_assert!(distance >= 1);
    debug_assert!(n_field.same_dims(d_field));
    let (w, h) = (n_field.width(), n_field.height());
    let (ux, uy) = direction.unit();
    let (dx, dy) = (-ux * distance as isize, -uy * distance as isize);
    let mut out = ScalarField::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = (x as isize + dx, y as isize + dy);
            let n_here = n_field.get(x, y);
            let d_here = d_field.get(x, y);
            let n_there = n_field.sample(sx, sy, boundary);
            let d_there = d_field.sample(sx, sy, boundary);
            out.set(x, y, n_here * d_here * d_there - beta * n_there * d_here * d_there);
        }
    }
    out
}

/// The eight directional maps of one frame: four from the ON channel and
/// four from the OFF channel.
#[derive(Debug, Clone)]
pub struct DirectionalMaps {
    pub on: [ScalarField; 4],
    pub off: [ScalarField; 4],
}

impl DirectionalMaps {
    pub fn channel(&self, channel: Channel, direction: Direction) -> &ScalarField {
        match channel {
            Channel::On => &self.on[direction.index()],
            Channel::Off => &self.off[direction.index()],
        }
    }
}

/// Stream state of one half-wave channel's motion detectors.
///
/// Frames must be fed in order; two instances never share state.
#[derive(Debug, Clone)]
pub struct ChannelState {
    channel: Channel,
    pool_kernel: Kernel,
    delayed: ScalarField,
    /// Per-direction low-pass states: one field in accumulated mode, one per
    /// correlation distance in per-step mode.
    accum: [Vec<ScalarField>; 4],
}

impl ChannelState {
    pub fn new(width: usize, height: usize, channel: Channel, config: &ModelConfig) -> Self {
        let per_dir = if config.per_step_delay { config.n_c } else { 1 };
        let make = || (0..per_dir).map(|_| ScalarField::zeros(width, height)).collect::<Vec<_>>();
        Self {
            channel,
            pool_kernel: build_gaussian_kernel(config.sigma_c, config.r_dc),
            delayed: ScalarField::zeros(width, height),
            accum: [make(), make(), make(), make()],
        }
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    /// Feed one frame's half-wave field; returns the four directional maps.
    pub fn advance(&mut self, raw: &ScalarField, config: &ModelConfig) -> Result<[ScalarField; 4], FieldError> {
        let normalized = contrast_normalize_with(raw, &self.pool_kernel, config.epsilon, config.boundary)?;
        self.delayed = temporal_lowpass(&normalized, &self.delayed, config.alpha_1())?;
        let mut out = [
            ScalarField::zeros(raw.width(), raw.height()),
            ScalarField::zeros(raw.width(), raw.height()),
            ScalarField::zeros(raw.width(), raw.height()),
            ScalarField::zeros(raw.width(), raw.height()),
        ];
        for direction in Direction::ALL {
            out[direction.index()] = self.directional_map(&normalized, direction, config)?;
        }
        Ok(out)
    }

    /// Accumulate the correlator outputs over all connected distances and
    /// apply the directional delay, updating this channel's low-pass state.
    fn directional_map(
        &mut self,
        normalized: &ScalarField,
        direction: Direction,
        config: &ModelConfig,
    ) -> Result<ScalarField, FieldError> {
        let states = &mut self.accum[direction.index()];
        if config.per_step_delay {
            let mut total = ScalarField::zeros(normalized.width(), normalized.height());
            for i in 1..=config.n_c {
                let m = hrc_triple(normalized, &self.delayed, direction, i, config.beta, config.boundary);
                states[i - 1] = temporal_lowpass(&m, &states[i - 1], config.alpha_2_step(i))?;
                total = total.zip_map(&states[i - 1], |a, b| a + b)?;
            }
            Ok(total)
        } else {
            let mut sum = ScalarField::zeros(normalized.width(), normalized.height());
            for i in 1..=config.n_c {
                let m = hrc_triple(normalized, &self.delayed, direction, i, config.beta, config.boundary);
                sum = sum.zip_map(&m, |a, b| a + b)?;
            }
            states[0] = temporal_lowpass(&sum, &states[0], config.alpha_2())?;
            Ok(states[0].clone())
        }
    }
}
