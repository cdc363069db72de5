//! Retina and lamina stages: temporal frame differencing, polarity-matched
//! band-pass filtering of the brightness change, and the ON/OFF half-wave
//! split.

use crate::config::ModelConfig;
use crate::field::{build_gaussian_kernel, convolve, Boundary, FieldError, Kernel, ScalarField};

/// Per-pixel brightness change between two successive frames.
pub fn frame_difference(current: &ScalarField, previous: &ScalarField) -> Result<ScalarField, FieldError> {
    current.zip_map(previous, |c, p| c - p)
}

/// Lamina band-pass filter bank, built once per configuration.
#[derive(Debug, Clone)]
pub struct LaminaFilter {
    excitatory: Kernel,
    inhibitory: Kernel,
    boundary: Boundary,
}

impl LaminaFilter {
    pub fn new(config: &ModelConfig) -> Self {
        Self {
            excitatory: build_gaussian_kernel(config.sigma_e, config.r_de),
            inhibitory: build_gaussian_kernel(config.sigma_i, config.r_di),
            boundary: config.boundary,
        }
    }

    /// Edge-enhancing center-surround difference of the brightness change.
    ///
    /// The brightening and darkening half-waves are filtered independently and
    /// each keeps only its own-sign lobe before the signed recombination, so
    /// neither pathway sees the other's surround ring. Flat regions cancel
    /// exactly because both kernels are renormalized.
    pub fn apply(&self, luminance_change: &ScalarField) -> Result<ScalarField, FieldError> {
        let bright = luminance_change.map(|v| v.max(0.0));
        let dark = luminance_change.map(|v| (-v).max(0.0));
        let vp = self.band_pass(&bright)?;
        let vn = self.band_pass(&dark)?;
        vp.zip_map(&vn, |p, n| p.max(0.0) - n.max(0.0))
    }

    fn band_pass(&self, field: &ScalarField) -> Result<ScalarField, FieldError> {
        let e = convolve(field, &self.excitatory, self.boundary)?;
        let i = convolve(field, &self.inhibitory, self.boundary)?;
        e.zip_map(&i, |a, b| a - b)
    }
}

/// Center-surround edge enhancement of the signed brightness change.
pub fn vdog(luminance_change: &ScalarField, config: &ModelConfig) -> Result<ScalarField, FieldError> {
    LaminaFilter::new(config).apply(luminance_change)
}

/// Half-wave rectification into parallel ON (brightening) and OFF
/// (darkening) channels.
pub fn half_wave_split(field: &ScalarField) -> (ScalarField, ScalarField) {
    let on = field.map(|v| v.max(0.0));
    let off = field.map(|v| (-v).max(0.0));
    (on, off)
}
