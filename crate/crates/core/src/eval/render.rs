//! Flat 2D scatter renders of particle frames as PNG, with an optional
//! horizontal guideline marking the original domain extent.

use crate::data::ScaledBounds;
use crate::{ParticleType, Result, Vec2};
use image::{Rgb, RgbImage};
use std::path::Path;

const FLUID: Rgb<u8> = Rgb([52, 101, 204]);
const OBSTACLE: Rgb<u8> = Rgb([110, 110, 110]);
const GUIDE: Rgb<u8> = Rgb([214, 48, 49]);
const BACKGROUND: Rgb<u8> = Rgb([250, 250, 250]);

/// Render one frame. `guide_y`, when given, draws a dashed red line at that
/// scaled height (the original-domain top in generalization renders).
pub fn render_frame(
    path: &Path,
    positions: &[Vec2],
    types: &[ParticleType],
    bounds: ScaledBounds,
    guide_y: Option<f64>,
) -> Result<()> {
    let width = 320u32;
    let aspect = (bounds.y.1 - bounds.y.0) / (bounds.x.1 - bounds.x.0);
    let height = ((width as f64) * aspect).round().max(8.0) as u32;
    let mut img = RgbImage::from_pixel(width, height, BACKGROUND);

    let to_px = |p: &Vec2| -> (i64, i64) {
        let tx = (p[0] - bounds.x.0) / (bounds.x.1 - bounds.x.0);
        let ty = (p[1] - bounds.y.0) / (bounds.y.1 - bounds.y.0);
        (
            (tx * (width - 1) as f64).round() as i64,
            ((1.0 - ty) * (height - 1) as f64).round() as i64,
        )
    };

    if let Some(gy) = guide_y {
        let ty = (gy - bounds.y.0) / (bounds.y.1 - bounds.y.0);
        let py = ((1.0 - ty) * (height - 1) as f64).round() as i64;
        if py >= 0 && py < height as i64 {
            for x in 0..width {
                if (x / 6) % 2 == 0 {
                    img.put_pixel(x, py as u32, GUIDE);
                }
            }
        }
    }

    for (p, t) in positions.iter().zip(types) {
        let (cx, cy) = to_px(p);
        let color = match t {
            ParticleType::Fluid => FLUID,
            ParticleType::Obstacle => OBSTACLE,
        };
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let (x, y) = (cx + dx, cy + dy);
                if x >= 0 && y >= 0 && x < width as i64 && y < height as i64 {
                    img.put_pixel(x as u32, y as u32, color);
                }
            }
        }
    }
    img.save(path)
        .map_err(|e| crate::Error::Format(format!("png encode: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Scaling;

    #[test]
    fn renders_square_and_tall_frames() {
        let dir = tempfile::tempdir().unwrap();
        let square = dir.path().join("square.png");
        render_frame(
            &square,
            &[[0.5, 0.5], [0.2, 0.8]],
            &[ParticleType::Fluid, ParticleType::Obstacle],
            Scaling::new((32, 32)).bounds(),
            None,
        )
        .unwrap();
        let tall = dir.path().join("tall.png");
        render_frame(
            &tall,
            &[[0.5, 1.2]],
            &[ParticleType::Fluid],
            Scaling::new((32, 64)).bounds(),
            Some(0.9),
        )
        .unwrap();
        let img = image::open(&tall).unwrap().to_rgb8();
        assert!(img.height() > img.width(), "tall render keeps aspect");
        assert!(square.exists());
    }
}
