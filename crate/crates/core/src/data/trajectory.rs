//! The dataset unit: one simulated sequence of per-particle positions in
//! scaled units, plus scene metadata.
//!
//! Binary layout (version 1, little-endian):
//!   magic "FGTJ" | u32 version | u32 nx | u32 ny | f64 dt |
//!   u32 particles | u32 frames | u32 scene_json_len | scene json |
//!   particles x u8 type | frames x particles x 2 x f32 positions

use super::scaling::{ScaledBounds, Scaling};
use crate::flip::{RawTrajectory, SceneSpec};
use crate::{Error, ParticleType, Result, Vec2};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"FGTJ";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Positions per frame, scaled units, quantized to f32 so in-memory and
    /// on-disk values are identical.
    pub frames: Vec<Vec<Vec2>>,
    pub types: Vec<ParticleType>,
    pub dt: f64,
    pub domain: (usize, usize),
    pub scene_meta: SceneSpec,
}

impl Trajectory {
    pub fn from_raw(raw: &RawTrajectory) -> Self {
        let scaling = Scaling::new(raw.spec.domain);
        let frames = raw
            .frames
            .iter()
            .map(|frame| {
                frame
                    .iter()
                    .map(|&p| {
                        let s = scaling.scale_point(p);
                        [s[0] as f32 as f64, s[1] as f32 as f64]
                    })
                    .collect()
            })
            .collect();
        Trajectory {
            frames,
            types: raw.types.clone(),
            dt: raw.spec.dt,
            domain: raw.spec.domain,
            scene_meta: raw.spec.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn particle_count(&self) -> usize {
        self.types.len()
    }

    pub fn fluid_indices(&self) -> Vec<usize> {
        self.types
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == ParticleType::Fluid)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn scaling(&self) -> Scaling {
        Scaling::new(self.domain)
    }

    pub fn bounds(&self) -> ScaledBounds {
        self.scaling().bounds()
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames.len() < 7 {
            return Err(Error::Contract(format!(
                "trajectory has {} frames; at least 7 are required",
                self.frames.len()
            )));
        }
        let bounds = self.bounds();
        for (k, frame) in self.frames.iter().enumerate() {
            if frame.len() != self.types.len() {
                return Err(Error::Contract(format!(
                    "frame {k} has {} particles, expected {}",
                    frame.len(),
                    self.types.len()
                )));
            }
            for (i, p) in frame.iter().enumerate() {
                if self.types[i] == ParticleType::Fluid {
                    let inside = p[0] >= bounds.x.0
                        && p[0] <= bounds.x.1
                        && p[1] >= bounds.y.0
                        && p[1] <= bounds.y.1;
                    if !inside {
                        return Err(Error::Contract(format!(
                            "fluid particle {i} outside scaled bounds at frame {k}: {p:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.domain.0 as u32).to_le_bytes())?;
        w.write_all(&(self.domain.1 as u32).to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&(self.particle_count() as u32).to_le_bytes())?;
        w.write_all(&(self.frames.len() as u32).to_le_bytes())?;
        let scene = serde_json::to_vec(&self.scene_meta)
            .map_err(|e| Error::Format(format!("scene spec encode: {e}")))?;
        w.write_all(&(scene.len() as u32).to_le_bytes())?;
        w.write_all(&scene)?;
        for t in &self.types {
            w.write_all(&[t.index() as u8])?;
        }
        for frame in &self.frames {
            for p in frame {
                w.write_all(&(p[0] as f32).to_le_bytes())?;
                w.write_all(&(p[1] as f32).to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "{}: not a trajectory file",
                path.display()
            )));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported trajectory version {version}"
            )));
        }
        let nx = read_u32(&mut r)? as usize;
        let ny = read_u32(&mut r)? as usize;
        let dt = read_f64(&mut r)?;
        let particles = read_u32(&mut r)? as usize;
        let frames_n = read_u32(&mut r)? as usize;
        let scene_len = read_u32(&mut r)? as usize;
        let mut scene_buf = vec![0u8; scene_len];
        r.read_exact(&mut scene_buf)?;
        let scene_meta: SceneSpec = serde_json::from_slice(&scene_buf)
            .map_err(|e| Error::Format(format!("scene spec decode: {e}")))?;
        let mut types = Vec::with_capacity(particles);
        let mut type_buf = vec![0u8; particles];
        r.read_exact(&mut type_buf)?;
        for b in type_buf {
            types.push(
                ParticleType::from_u8(b)
                    .ok_or_else(|| Error::Format(format!("unknown particle type {b}")))?,
            );
        }
        let mut frames = Vec::with_capacity(frames_n);
        let mut buf = vec![0u8; particles * 8];
        for _ in 0..frames_n {
            r.read_exact(&mut buf)?;
            let mut frame = Vec::with_capacity(particles);
            for i in 0..particles {
                let x = f32::from_le_bytes(buf[i * 8..i * 8 + 4].try_into().unwrap());
                let y = f32::from_le_bytes(buf[i * 8 + 4..i * 8 + 8].try_into().unwrap());
                frame.push([x as f64, y as f64]);
            }
            frames.push(frame);
        }
        Ok(Trajectory {
            frames,
            types,
            dt,
            domain: (nx, ny),
            scene_meta,
        })
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
