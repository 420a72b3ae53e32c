//! Procedural dynamic textures with exact ground truth at every frame index.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frameio::{Frame, FrameSequence, Geometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// Diagonal sinusoidal grating drifting one wavelength per period.
    TranslatingSine,
    /// Plane wave whose orientation turns a full circle per period.
    RotatingPhase,
    /// Two gratings drifting at different rates, summed and pushed through a
    /// logistic squashing. The saturation spreads energy over many spatial
    /// harmonics, so the frames span far more dimensions than a plain sine.
    SaturatedSine,
}

impl Pattern {
    pub fn name(&self) -> &'static str {
        match self {
            Pattern::TranslatingSine => "translating_sine",
            Pattern::RotatingPhase => "rotating_phase",
            Pattern::SaturatedSine => "saturated_sine",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Pattern::TranslatingSine,
            Pattern::RotatingPhase,
            Pattern::SaturatedSine,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown pattern {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub pattern: Pattern,
    pub width: usize,
    pub height: usize,
    /// Frames per cycle.
    pub period: usize,
    pub frames: usize,
    /// Half-width of the uniform per-pixel noise.
    pub noise_amp: f64,
    pub rng_seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            pattern: Pattern::TranslatingSine,
            width: 64,
            height: 48,
            period: 20,
            frames: 60,
            noise_amp: 0.0,
            rng_seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("synthetic frame must be non-empty".into()));
        }
        if self.period < 2 {
            return Err(Error::InvalidParameter("period must be >= 2".into()));
        }
        if self.frames < self.period {
            return Err(Error::InvalidParameter(format!(
                "frames ({}) must be >= period ({})",
                self.frames, self.period
            )));
        }
        if !(self.noise_amp.is_finite() && self.noise_amp >= 0.0) {
            return Err(Error::InvalidParameter("noise amplitude must be >= 0".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::new(self.width, self.height, 1)
    }
}

/// Generator for any frame index of a synthetic texture.
#[derive(Debug, Clone)]
pub struct SyntheticTexture {
    spec: SyntheticSpec,
}

impl SyntheticTexture {
    pub fn new(spec: SyntheticSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }

    /// Noiseless frame at 0-based index `t`; depends only on `t mod period`.
    pub fn clean_frame(&self, t: usize) -> Frame {
        let s = &self.spec;
        let tau = (t % s.period) as f64 / s.period as f64;
        let (w, h) = (s.width as f64, s.height as f64);
        let mut data = Vec::with_capacity(s.width * s.height);
        for y in 0..s.height {
            for x in 0..s.width {
                let (xf, yf) = (x as f64, y as f64);
                let v = match s.pattern {
                    Pattern::TranslatingSine => {
                        127.5 + 100.0 * (TAU * (2.0 * xf / w + yf / h - tau)).sin()
                    }
                    Pattern::RotatingPhase => {
                        let scale = w.min(h);
                        let (u, v) = ((xf - 0.5 * w) / scale, (yf - 0.5 * h) / scale);
                        let theta = TAU * tau;
                        let proj = u * theta.cos() + v * theta.sin();
                        127.5 + 100.0 * (TAU * 3.0 * proj).sin()
                    }
                    Pattern::SaturatedSine => {
                        let a = (TAU * (2.0 * xf / w + yf / h - tau)).sin();
                        let b = (TAU * (xf / w - 2.0 * yf / h + 2.0 * tau)).sin();
                        255.0 / (1.0 + (-3.0 * (a + b)).exp())
                    }
                };
                data.push(v);
            }
        }
        Frame::new(s.geometry(), data).expect("geometry matches")
    }

    /// Frame at index `t` including its (index-seeded) noise.
    pub fn frame(&self, t: usize) -> Frame {
        let mut f = self.clean_frame(t);
        if self.spec.noise_amp > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.spec.rng_seed);
            rng.set_stream(t as u64);
            let amp = self.spec.noise_amp;
            for v in f.data_mut() {
                *v = (*v + amp * rng.gen_range(-1.0..=1.0)).clamp(0.0, 255.0);
            }
        }
        f
    }

    /// Frames `start..start + count` (0-based).
    pub fn frames(&self, start: usize, count: usize) -> FrameSequence {
        FrameSequence::new((start..start + count).map(|t| self.frame(t)).collect())
            .expect("shared geometry")
    }

    /// Noiseless frames `start..start + count`, the analytic continuation.
    pub fn clean_frames(&self, start: usize, count: usize) -> FrameSequence {
        FrameSequence::new((start..start + count).map(|t| self.clean_frame(t)).collect())
            .expect("shared geometry")
    }
}

/// The first `spec.frames` frames of the texture.
pub fn make_synthetic(spec: &SyntheticSpec) -> Result<FrameSequence> {
    let tex = SyntheticTexture::new(*spec)?;
    Ok(tex.frames(0, spec.frames))
}
