//! 2D scalar fields over the visual field, Gaussian kernels, and windowed
//! convolution. The `ScalarField` is the universal intermediate carried
//! between every processing stage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Edge policy for samples falling outside the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Clamp coordinates to the nearest edge pixel.
    #[default]
    Replicate,
    /// Treat outside samples as zero.
    Zero,
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("field dimensions must be at least 1x1 (got {width}x{height})")]
    EmptyField { width: usize, height: usize },
    #[error("value buffer length {len} does not match {width}x{height}")]
    BadLength { width: usize, height: usize, len: usize },
    #[error("dimension mismatch: {w0}x{h0} vs {w1}x{h1}")]
    DimensionMismatch { w0: usize, h0: usize, w1: usize, h1: usize },
    #[error("kernel radius {radius} too large for {width}x{height} field")]
    KernelTooLarge { radius: usize, width: usize, height: usize },
}

/// A `width`×`height` grid of real values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width >= 1 && height >= 1, "field dimensions must be at least 1x1");
        Self { width, height, values: vec![value; width * height] }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self, FieldError> {
        if width == 0 || height == 0 {
            return Err(FieldError::EmptyField { width, height });
        }
        if values.len() != width * height {
            return Err(FieldError::BadLength { width, height, len: values.len() });
        }
        Ok(Self { width, height, values })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn same_dims(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    fn dims_check(&self, other: &Self) -> Result<(), FieldError> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(FieldError::DimensionMismatch {
                w0: self.width,
                h0: self.height,
                w1: other.width,
                h1: other.height,
            })
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        debug_assert!(x < self.width && y < self.height);
        self.values[y * self.width + x] = v;
    }

    /// Sample at signed coordinates, resolving out-of-frame points per policy.
    #[inline]
    pub fn sample(&self, x: isize, y: isize, boundary: Boundary) -> f64 {
        match boundary {
            Boundary::Replicate => {
                let cx = x.clamp(0, self.width as isize - 1) as usize;
                let cy = y.clamp(0, self.height as isize - 1) as usize;
                self.values[cy * self.width + cx]
            }
            Boundary::Zero => {
                if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
                    0.0
                } else {
                    self.values[y as usize * self.width + x as usize]
                }
            }
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, FieldError> {
        self.dims_check(other)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Truncated, renormalized rotationally symmetric kernel.
///
/// Gaussian kernels are kept in separable form as well, so convolution can
/// run as two 1D passes with identical results to the full 2D window.
#[derive(Debug, Clone)]
pub struct Kernel {
    radius: usize,
    weights: Vec<f64>,
    factors: Option<Vec<f64>>,
}

impl Kernel {
    /// Build from an explicit (2r+1)² weight table (row-major over v, u).
    pub fn from_weights(radius: usize, weights: Vec<f64>) -> Self {
        let side = 2 * radius + 1;
        assert_eq!(weights.len(), side * side, "kernel weight table size");
        Self { radius, weights, factors: None }
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Weight at offset (u, v), |u|,|v| ≤ radius.
    #[inline]
    pub fn weight(&self, u: isize, v: isize) -> f64 {
        let r = self.radius as isize;
        debug_assert!(u.abs() <= r && v.abs() <= r);
        let side = 2 * self.radius + 1;
        self.weights[((v + r) as usize) * side + (u + r) as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Truncated Gaussian, renormalized so the weights sum to one over the
/// support. The renormalization makes constant inputs pass through exactly,
/// so the excitatory/inhibitory difference cancels on flat regions.
pub fn build_gaussian_kernel(sigma: f64, radius: usize) -> Kernel {
    assert!(sigma > 0.0, "sigma must be positive");
    assert!(radius >= 1, "radius must be at least 1");
    let side = 2 * radius + 1;
    let mut g = Vec::with_capacity(side);
    for i in 0..side {
        let u = i as f64 - radius as f64;
        g.push((-(u * u) / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = g.iter().sum();
    for w in &mut g {
        *w /= norm;
    }
    let mut weights = Vec::with_capacity(side * side);
    for v in 0..side {
        for u in 0..side {
            weights.push(g[v] * g[u]);
        }
    }
    Kernel { radius, weights, factors: Some(g) }
}

/// Raw (un-normalized) Gaussian weight at offset (u, v).
pub fn gaussian_weight(sigma: f64, u: f64, v: f64) -> f64 {
    let s2 = sigma * sigma;
    (-(u * u + v * v) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2)
}

/// Windowed correlation of `field` with `kernel`; output keeps the input
/// dimensions, edges resolved per `boundary`.
pub fn convolve(field: &ScalarField, kernel: &Kernel, boundary: Boundary) -> Result<ScalarField, FieldError> {
    let (w, h) = (field.width(), field.height());
    if kernel.radius() >= w.min(h) {
        return Err(FieldError::KernelTooLarge { radius: kernel.radius(), width: w, height: h });
    }
    match &kernel.factors {
        Some(g) => Ok(convolve_separable(field, kernel.radius(), g, boundary)),
        None => Ok(convolve_full(field, kernel, boundary)),
    }
}

fn convolve_separable(field: &ScalarField, radius: usize, g: &[f64], boundary: Boundary) -> ScalarField {
    let (w, h) = (field.width(), field.height());
    let r = radius as isize;
    let mut rows = ScalarField::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &gw) in g.iter().enumerate() {
                acc += gw * field.sample(x as isize + i as isize - r, y as isize, boundary);
            }
            rows.set(x, y, acc);
        }
    }
    let mut out = ScalarField::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &gw) in g.iter().enumerate() {
                acc += gw * rows.sample(x as isize, y as isize + i as isize - r, boundary);
            }
            out.set(x, y, acc);
        }
    }
    out
}

fn convolve_full(field: &ScalarField, kernel: &Kernel, boundary: Boundary) -> ScalarField {
    let (w, h) = (field.width(), field.height());
    let r = kernel.radius() as isize;
    let mut out = ScalarField::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for v in -r..=r {
                for u in -r..=r {
                    acc += kernel.weight(u, v) * field.sample(x as isize + u, y as isize + v, boundary);
                }
            }
            out.set(x, y, acc);
        }
    }
    out
}
