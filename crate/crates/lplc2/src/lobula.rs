//! Lobula-plate fusion: opponent combination of the ON/OFF directional maps
//! into four signed local-motion maps and one motion-magnitude map.

use crate::config::ModelConfig;
use crate::field::{FieldError, ScalarField};
use crate::medulla::{Direction, DirectionalMaps};

/// The four local-motion maps plus the per-pixel magnitude.
#[derive(Debug, Clone)]
pub struct DirectionalMotion {
    maps: [ScalarField; 4],
    magnitude: ScalarField,
}

impl DirectionalMotion {
    pub fn map(&self, direction: Direction) -> &ScalarField {
        &self.maps[direction.index()]
    }

    pub fn magnitude(&self) -> &ScalarField {
        &self.magnitude
    }

    pub fn width(&self) -> usize {
        self.magnitude.width()
    }

    pub fn height(&self) -> usize {
        self.magnitude.height()
    }

    /// Assemble from explicit per-direction maps (right, left, up, down).
    pub fn from_maps(maps: [ScalarField; 4]) -> Self {
        let magnitude = motion_magnitude_of(&maps);
        Self { maps, magnitude }
    }
}

fn leaky_relu(v: f64, slope: f64) -> f64 {
    if v >= 0.0 {
        v
    } else {
        slope * v
    }
}

/// Exponent on a rectified map value. Firing rates are nonnegative, so the
/// fractional exponents act on `max(value, 0)`.
fn powered(v: f64, gamma: f64) -> f64 {
    let r = v.max(0.0);
    if gamma == 0.5 {
        r.sqrt()
    } else {
        r.powf(gamma)
    }
}

/// Opponent fusion of one preferred/null pair across both channels.
pub fn fuse_direction(
    t4_pref: &ScalarField,
    t5_pref: &ScalarField,
    t4_null: &ScalarField,
    t5_null: &ScalarField,
    config: &ModelConfig,
) -> Result<ScalarField, FieldError> {
    let (g1, g2, slope) = (config.gamma_1, config.gamma_2, config.leak_slope);
    let pref = t4_pref.zip_map(t5_pref, |a, b| powered(a, g1) + powered(b, g2))?;
    let null = t4_null.zip_map(t5_null, |a, b| powered(a, g1) + powered(b, g2))?;
    pref.zip_map(&null, |p, n| leaky_relu(p - n, slope))
}

/// Fuse all four directions of a frame's ON/OFF maps into signed local
/// motion plus magnitude.
pub fn integrate_directions(maps: &DirectionalMaps, config: &ModelConfig) -> Result<DirectionalMotion, FieldError> {
    let fused = |dir: Direction| -> Result<ScalarField, FieldError> {
        let null = dir.opposite();
        fuse_direction(
            &maps.on[dir.index()],
            &maps.off[dir.index()],
            &maps.on[null.index()],
            &maps.off[null.index()],
            config,
        )
    };
    let maps = [
        fused(Direction::Right)?,
        fused(Direction::Left)?,
        fused(Direction::Up)?,
        fused(Direction::Down)?,
    ];
    Ok(DirectionalMotion::from_maps(maps))
}

/// Magnitude of local motion: the winning horizontal and vertical components
/// combined as a Euclidean norm.
pub fn motion_magnitude(dm: &DirectionalMotion) -> ScalarField {
    motion_magnitude_of(&dm.maps)
}

fn motion_magnitude_of(maps: &[ScalarField; 4]) -> ScalarField {
    let r = &maps[Direction::Right.index()];
    let l = &maps[Direction::Left.index()];
    let u = &maps[Direction::Up.index()];
    let d = &maps[Direction::Down.index()];
    let mut out = ScalarField::zeros(r.width(), r.height());
    for y in 0..r.height() {
        for x in 0..r.width() {
            let h = r.get(x, y).max(l.get(x, y));
            let v = d.get(x, y).max(u.get(x, y));
            out.set(x, y, (h * h + v * v).sqrt());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ModelConfig {
        ModelConfig::default()
    }

    #[test]
    fn all_zero_inputs_fuse_to_zero() {
        let z = ScalarField::zeros(6, 6);
        let out = fuse_direction(&z, &z, &z, &z, &config()).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_preferred_pair_sums_to_two() {
        let one = ScalarField::filled(3, 3, 1.0);
        let zero = ScalarField::zeros(3, 3);
        let out = fuse_direction(&one, &one, &zero, &zero, &config()).unwrap();
        // 1^0.9 + 1^0.5 - 0 = 2
        assert!(out.values().iter().all(|&v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn losing_pair_leaks_negative() {
        let one = ScalarField::filled(3, 3, 1.0);
        let zero = ScalarField::zeros(3, 3);
        let out = fuse_direction(&zero, &zero, &one, &one, &config()).unwrap();
        assert!(out.values().iter().all(|&v| (v - (-0.2)).abs() < 1e-12));
    }

    #[test]
    fn negative_map_values_rectify_before_exponent() {
        let neg = ScalarField::filled(2, 2, -3.0);
        let zero = ScalarField::zeros(2, 2);
        let out = fuse_direction(&neg, &neg, &zero, &zero, &config()).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    fn motion(r: f64, l: f64, u: f64, d: f64) -> DirectionalMotion {
        DirectionalMotion::from_maps([
            ScalarField::filled(2, 2, r),
            ScalarField::filled(2, 2, l),
            ScalarField::filled(2, 2, u),
            ScalarField::filled(2, 2, d),
        ])
    }

    #[test]
    fn magnitude_examples() {
        assert_eq!(motion(0.0, 0.0, 0.0, 0.0).magnitude().get(0, 0), 0.0);
        assert!((motion(3.0, 0.0, 0.0, 0.0).magnitude().get(0, 0) - 3.0).abs() < 1e-12);
        assert!((motion(3.0, 0.0, 4.0, 0.0).magnitude().get(0, 0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn magnitude_is_positively_homogeneous() {
        let a = motion(1.2, -0.1, 0.7, -0.05);
        let k = 3.5;
        let b = motion(1.2 * k, -0.1 * k, 0.7 * k, -0.05 * k);
        assert!((b.magnitude().get(0, 0) - k * a.magnitude().get(0, 0)).abs() < 1e-12);
    }

    #[test]
    fn opponent_pair_never_both_positive() {
        // random rectified inputs through the fusion
        let mut s = 7u64;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let cfg = config();
        let mut f = |_: ()| ScalarField::from_values(8, 8, (0..64).map(|_| next()).collect()).unwrap();
        let (t4r, t5r, t4l, t5l) = (f(()), f(()), f(()), f(()));
        let lm_r = fuse_direction(&t4r, &t5r, &t4l, &t5l, &cfg).unwrap();
        let lm_l = fuse_direction(&t4l, &t5l, &t4r, &t5r, &cfg).unwrap();
        for (a, b) in lm_r.values().iter().zip(lm_l.values()) {
            assert!(!(*a > 0.0 && *b > 0.0), "both opponents positive: {a} {b}");
        }
    }
}
