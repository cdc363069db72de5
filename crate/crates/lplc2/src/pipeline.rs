//! Frame-sequential orchestration of the full cascade: differencing,
//! lamina filtering, ON/OFF motion detection, directional fusion, and the
//! attention ensemble.

use crate::attention::{step, EnsembleState};
use crate::config::ModelConfig;
use crate::events::DetectionEvent;
use crate::field::{FieldError, ScalarField};
use crate::lobula::{integrate_directions, DirectionalMotion};
use crate::medulla::{Channel, ChannelState, DirectionalMaps};
use crate::retina::{frame_difference, half_wave_split, LaminaFilter};

/// Streaming detector. Feed frames in order; every frame after the first
/// yields a detection event.
#[derive(Debug)]
pub struct Detector {
    config: ModelConfig,
    lamina: LaminaFilter,
    previous: Option<ScalarField>,
    on: Option<ChannelState>,
    off: Option<ChannelState>,
    ensemble: EnsembleState,
}

impl Detector {
    pub fn new(config: ModelConfig) -> Self {
        let lamina = LaminaFilter::new(&config);
        Self { config, lamina, previous: None, on: None, off: None, ensemble: EnsembleState::new() }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn ensemble(&self) -> &EnsembleState {
        &self.ensemble
    }

    /// Process one frame. The first frame primes the differencer and returns
    /// `None`; afterwards each call returns the frame's event.
    pub fn process_frame(&mut self, frame: &ScalarField) -> Result<Option<DetectionEvent>, FieldError> {
        Ok(self.process_frame_detailed(frame)?.map(|(ev, _)| ev))
    }

    /// Like [`Detector::process_frame`], additionally handing back the
    /// frame's fused motion maps for inspection or dumping.
    pub fn process_frame_detailed(
        &mut self,
        frame: &ScalarField,
    ) -> Result<Option<(DetectionEvent, DirectionalMotion)>, FieldError> {
        let previous = match self.previous.take() {
            None => {
                self.on = Some(ChannelState::new(frame.width(), frame.height(), Channel::On, &self.config));
                self.off = Some(ChannelState::new(frame.width(), frame.height(), Channel::Off, &self.config));
                self.previous = Some(frame.clone());
                return Ok(None);
            }
            Some(p) => p,
        };
        let diff = frame_difference(frame, &previous)?;
        self.previous = Some(frame.clone());

        let filtered = self.lamina.apply(&diff)?;
        let (on_raw, off_raw) = half_wave_split(&filtered);
        let on_maps = self.on.as_mut().expect("initialized with first frame").advance(&on_raw, &self.config)?;
        let off_maps = self.off.as_mut().expect("initialized with first frame").advance(&off_raw, &self.config)?;
        let maps = DirectionalMaps { on: on_maps, off: off_maps };
        let motion = integrate_directions(&maps, &self.config)?;
        let event = step(&mut self.ensemble, &motion, &self.config);
        Ok(Some((event, motion)))
    }
}

/// Run the whole cascade over a frame sequence: one event per frame from
/// index 1 onward.
pub fn run_detector(frames: &[ScalarField], config: &ModelConfig) -> Result<Vec<DetectionEvent>, FieldError> {
    let mut detector = Detector::new(config.clone());
    let mut events = Vec::with_capacity(frames.len().saturating_sub(1));
    for frame in frames {
        if let Some(ev) = detector.process_frame(frame)? {
            events.push(ev);
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stream_produces_no_fields() {
        let f = ScalarField::filled(40, 40, 127.5);
        let frames = vec![f.clone(), f.clone(), f.clone(), f.clone(), f];
        let mut cfg = ModelConfig::default();
        cfg.t_a = 1e-6;
        let events = run_detector(&frames, &cfg).unwrap();
        assert_eq!(events.len(), 4);
        for (i, ev) in events.iter().enumerate() {
            assert_eq!(ev.frame_index, i + 1);
            assert!(ev.afs.is_empty());
        }
    }

    #[test]
    fn fewer_than_two_frames_yield_no_events() {
        let frames = vec![ScalarField::filled(16, 16, 10.0)];
        let events = run_detector(&frames, &ModelConfig::default()).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn mismatched_frame_dimensions_error() {
        let frames = vec![ScalarField::zeros(16, 16), ScalarField::zeros(16, 17)];
        assert!(run_detector(&frames, &ModelConfig::default()).is_err());
    }
}
