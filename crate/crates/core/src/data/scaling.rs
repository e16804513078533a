//! Grid-unit to dataset-unit position scaling.
//!
//! x maps to [0.1, 0.9] for any domain width. y maps to [0.1, 0.9 * H/W], so
//! square domains land exactly in [0.1, 0.9]^2 and a double-height domain
//! spans [0.1, 1.8] in y. On tall domains the per-unit y scale (1.7/64)
//! differs from x (0.8/32 = 0.025) by ~6%; the per-axis endpoints take
//! precedence.

use crate::Vec2;
use serde::{Deserialize, Serialize};

pub const SCALED_LO: f64 = 0.1;
pub const SCALED_HI: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub domain: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledBounds {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Scaling {
    pub fn new(domain: (usize, usize)) -> Self {
        Scaling { domain }
    }

    fn y_hi(&self) -> f64 {
        SCALED_HI * (self.domain.1 as f64 / self.domain.0 as f64)
    }

    pub fn bounds(&self) -> ScaledBounds {
        ScaledBounds {
            x: (SCALED_LO, SCALED_HI),
            y: (SCALED_LO, self.y_hi()),
        }
    }

    /// Grid units -> scaled units. Endpoint-exact: the lerp form guarantees
    /// (0,0) -> (0.1, 0.1) and (W,H) -> (0.9, y_hi) bitwise.
    pub fn scale_point(&self, p: Vec2) -> Vec2 {
        let tx = p[0] / self.domain.0 as f64;
        let ty = p[1] / self.domain.1 as f64;
        let y_hi = self.y_hi();
        [
            SCALED_LO * (1.0 - tx) + SCALED_HI * tx,
            SCALED_LO * (1.0 - ty) + y_hi * ty,
        ]
    }

    pub fn unscale_point(&self, p: Vec2) -> Vec2 {
        let y_hi = self.y_hi();
        let tx = (p[0] - SCALED_LO) / (SCALED_HI - SCALED_LO);
        let ty = (p[1] - SCALED_LO) / (y_hi - SCALED_LO);
        [tx * self.domain.0 as f64, ty * self.domain.1 as f64]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_domain_endpoints_are_exact() {
        let s = Scaling::new((32, 32));
        assert_eq!(s.scale_point([0.0, 0.0]), [0.1, 0.1]);
        assert_eq!(s.scale_point([32.0, 32.0]), [0.9, 0.9]);
    }

    #[test]
    fn midpoint_maps_to_half() {
        let s = Scaling::new((32, 32));
        let p = s.scale_point([16.0, 16.0]);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tall_domain_spans_to_1_8() {
        let s = Scaling::new((32, 64));
        assert_eq!(s.scale_point([32.0, 64.0]), [0.9, 1.8]);
        assert_eq!(s.scale_point([0.0, 0.0]), [0.1, 0.1]);
        assert_eq!(s.bounds().y, (0.1, 1.8));
    }

    proptest! {
        #[test]
        fn round_trip_is_affine_inverse(x in 0.0f64..32.0, y in 0.0f64..64.0) {
            let s = Scaling::new((32, 64));
            let back = s.unscale_point(s.scale_point([x, y]));
            prop_assert!((back[0] - x).abs() < 1e-12);
            prop_assert!((back[1] - y).abs() < 1e-12);
        }
    }
}
