//! Training-free detection and localization of multiple simultaneously
//! looming objects in grayscale frame streams.
//!
//! The pipeline mirrors the fly's early visual system: frame differencing and
//! center-surround filtering split brightness changes into ON/OFF channels,
//! contrast-normalized triple correlators extract motion along the four
//! cardinal directions, and disk-shaped attention fields — spawned bottom-up
//! wherever motion salience peaks — integrate outward motion quadrant-wise,
//! firing only for expansion centered on the field.
//!
//! Quick start:
//!
//! ```
//! use lplc2::{render, run_detector, scenario, ModelConfig, Variant};
//!
//! let frames = render(&scenario("dark_loom").unwrap()).unwrap();
//! let mut config = ModelConfig::default();
//! config.variant = Variant::Center;
//! let events = run_detector(&frames, &config).unwrap();
//! assert!(events.iter().any(|ev| ev.afs[0].response > 0.0));
//! ```
//!
//! The `examples/` directory exercises every major capability; the `lplc2`
//! binary exposes the same flows as `detect`, `render-stimulus`, and
//! `run-scenario` subcommands.

pub mod attention;
pub mod config;
pub mod events;
pub mod field;
pub mod io;
pub mod lobula;
pub mod medulla;
pub mod pipeline;
pub mod retina;
pub mod stimulus;

pub use attention::{find_candidate, integrate_af, AttentionField, Candidate, EnsembleState};
pub use config::{alpha_for_delay, ConfigError, ModelConfig, Variant};
pub use events::{AfSnapshot, DetectionEvent};
pub use field::{build_gaussian_kernel, convolve, Boundary, FieldError, Kernel, ScalarField};
pub use lobula::{fuse_direction, integrate_directions, motion_magnitude, DirectionalMotion};
pub use medulla::{contrast_normalize, hrc_triple, temporal_lowpass, Channel, ChannelState, Direction, DirectionalMaps};
pub use pipeline::{run_detector, Detector};
pub use retina::{frame_difference, half_wave_split, vdog};
pub use stimulus::{builtin_scenarios, render, scenario, ObjectTrack, Polarity, Shape, StimulusSpec};
