//! Frame sequences: loading image directories, preprocessing, centering and
//! writing synthesized output.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::DynamicImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::DenseMatrix;

const IMAGE_EXTENSIONS: &[&str] = &["png", "pgm", "ppm", "pnm", "jpg", "jpeg"];

/// Image geometry shared by every frame in a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Geometry {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl Geometry {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
        }
    }

    /// Flattened vector length `width × height × channels`.
    pub fn dim(&self) -> usize {
        self.width * self.height * self.channels
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)
    }
}

/// One frame as a flat row-major vector, channel-interleaved for color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    geometry: Geometry,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(geometry: Geometry, data: Vec<f64>) -> Result<Self> {
        if data.len() != geometry.dim() {
            return Err(Error::DimensionMismatch {
                expected: geometry.dim(),
                found: data.len(),
            });
        }
        Ok(Self { geometry, data })
    }

    pub fn filled(geometry: Geometry, value: f64) -> Self {
        Self {
            geometry,
            data: vec![value; geometry.dim()],
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn channels(&self) -> usize {
        self.geometry.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Extracts one channel as a `width × height` plane.
    pub fn channel_plane(&self, channel: usize) -> Vec<f64> {
        let c = self.geometry.channels;
        self.data.iter().skip(channel).step_by(c).copied().collect()
    }

    /// 8-bit quantization used on write: clamp to [0, 255], round to nearest.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        v.clamp(0.0, 255.0).round() as u8
    }
}

/// Ordered frames sharing one geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSequence {
    geometry: Geometry,
    frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let geometry = frames
            .first()
            .map(Frame::geometry)
            .ok_or(Error::InsufficientFrames {
                needed: 1,
                available: 0,
            })?;
        for f in &frames {
            check_geometry(geometry, f.geometry())?;
        }
        Ok(Self { geometry, frames })
    }

    /// Builds a sequence from rows of a `N × D` matrix.
    pub fn from_matrix(geometry: Geometry, m: &DenseMatrix) -> Result<Self> {
        let frames = m
            .row_iter()
            .map(|r| Frame::new(geometry, r.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { geometry, frames })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &Frame {
        &self.frames[index]
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn push(&mut self, frame: Frame) -> Result<()> {
        check_geometry(self.geometry, frame.geometry())?;
        self.frames.push(frame);
        Ok(())
    }

    /// First `n` frames (all of them if `n ≥ len`).
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            geometry: self.geometry,
            frames: self.frames.iter().take(n).cloned().collect(),
        }
    }

    /// Frames `start..end` (0-based, half-open).
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            geometry: self.geometry,
            frames: self.frames[start..end].to_vec(),
        }
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        let d = self.geometry.dim();
        let mut data = Vec::with_capacity(self.len() * d);
        for f in &self.frames {
            data.extend_from_slice(f.data());
        }
        DenseMatrix::new(self.len(), d, data).expect("frames share geometry")
    }
}

pub(crate) fn check_geometry(expected: Geometry, found: Geometry) -> Result<()> {
    if expected != found {
        return Err(Error::GeometryMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

/// Mean-removed sequence plus the per-pixel temporal mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredSequence {
    geometry: Geometry,
    /// `N × D`, one centered frame per row.
    centered: DenseMatrix,
    temporal_mean: Vec<f64>,
}

impl CenteredSequence {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn centered(&self) -> &DenseMatrix {
        &self.centered
    }

    pub fn temporal_mean(&self) -> &[f64] {
        &self.temporal_mean
    }

    pub fn len(&self) -> usize {
        self.centered.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.centered.rows() == 0
    }

    /// Adds the temporal mean back onto every centered row.
    pub fn restore(&self) -> FrameSequence {
        let frames = self
            .centered
            .row_iter()
            .map(|r| {
                let data = r.iter().zip(&self.temporal_mean).map(|(c, m)| c + m).collect();
                Frame {
                    geometry: self.geometry,
                    data,
                }
            })
            .collect();
        FrameSequence {
            geometry: self.geometry,
            frames,
        }
    }
}

/// Explanatory frames `1..N−1` and response frames `2..N` of a centered sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub explanatory: DenseMatrix,
    pub response: DenseMatrix,
    pub dim: usize,
}

/// Subtracts the per-pixel temporal mean from every frame.
pub fn center(seq: &FrameSequence) -> Result<CenteredSequence> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::InsufficientFrames {
            needed: 2,
            available: n,
        });
    }
    let d = seq.geometry().dim();
    let mut mean = vec![0.0; d];
    for f in seq.frames() {
        for (m, v) in mean.iter_mut().zip(f.data()) {
            *m += v;
        }
    }
    let inv = n as f64;
    mean.iter_mut().for_each(|m| *m /= inv);

    let mut data = Vec::with_capacity(n * d);
    for f in seq.frames() {
        data.extend(f.data().iter().zip(&mean).map(|(v, m)| v - m));
    }
    Ok(CenteredSequence {
        geometry: seq.geometry(),
        centered: DenseMatrix::new(n, d, data)?,
        temporal_mean: mean,
    })
}

pub fn make_training_pair(cs: &CenteredSequence) -> Result<TrainingPair> {
    let n = cs.len();
    if n < 2 {
        return Err(Error::InsufficientFrames {
            needed: 2,
            available: n,
        });
    }
    let d = cs.centered.cols();
    let all = cs.centered.as_slice();
    Ok(TrainingPair {
        explanatory: DenseMatrix::new(n - 1, d, all[..(n - 1) * d].to_vec())?,
        response: DenseMatrix::new(n - 1, d, all[d..].to_vec())?,
        dim: d,
    })
}

/// Preprocessing applied while loading frames.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub grayscale: bool,
    /// Target `(width, height)`, bilinear.
    pub resize: Option<(usize, usize)>,
    pub max_frames: Option<usize>,
}

/// Lists decodable image files in `dir`, sorted by file name.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_image && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Loads a directory of frames in lexicographic file-name order.
pub fn load_sequence(dir: &Path, options: &LoadOptions) -> Result<FrameSequence> {
    let mut files = list_frame_files(dir)?;
    if let Some(max) = options.max_frames {
        files.truncate(max);
    }
    if files.len() < 2 {
        return Err(Error::FewerThanTwoFrames(dir.to_path_buf()));
    }
    let mut frames: Vec<Frame> = Vec::with_capacity(files.len());
    for path in &files {
        let frame = load_frame(path, options)?;
        if let Some(first) = frames.first() {
            if first.geometry() != frame.geometry() {
                return Err(Error::GeometryMismatch {
                    expected: first.geometry().to_string(),
                    found: format!("{} in {}", frame.geometry(), path.display()),
                });
            }
        }
        frames.push(frame);
    }
    FrameSequence::new(frames)
}

/// Loads and preprocesses a single image (`max_frames` is ignored).
pub fn load_frame(path: &Path, options: &LoadOptions) -> Result<Frame> {
    let img = image::open(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let frame = image_to_frame(&img, options.grayscale);
    match options.resize {
        Some((w, h)) if (w, h) != (frame.width(), frame.height()) => resize_bilinear(&frame, w, h),
        _ => Ok(frame),
    }
}

fn image_to_frame(img: &DynamicImage, grayscale: bool) -> Frame {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if !img.color().has_color() {
        let data = img.to_luma8().into_raw().into_iter().map(f64::from).collect();
        return Frame {
            geometry: Geometry::new(w, h, 1),
            data,
        };
    }
    let rgb = img.to_rgb8().into_raw();
    if grayscale {
        let data = rgb
            .chunks_exact(3)
            .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
            .collect();
        Frame {
            geometry: Geometry::new(w, h, 1),
            data,
        }
    } else {
        Frame {
            geometry: Geometry::new(w, h, 3),
            data: rgb.into_iter().map(f64::from).collect(),
        }
    }
}

/// Bilinear resampling with pixel-center alignment; output stays within the input range.
pub fn resize_bilinear(frame: &Frame, width: usize, height: usize) -> Result<Frame> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "resize target {width}x{height} must be non-empty"
        )));
    }
    let src = frame.geometry();
    let c = src.channels;
    let sx_scale = src.width as f64 / width as f64;
    let sy_scale = src.height as f64 / height as f64;
    let sample_axis = |o: usize, scale: f64, len: usize| {
        let s = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, s - i0 as f64)
    };
    let mut data = Vec::with_capacity(width * height * c);
    for oy in 0..height {
        let (y0, y1, fy) = sample_axis(oy, sy_scale, src.height);
        for ox in 0..width {
            let (x0, x1, fx) = sample_axis(ox, sx_scale, src.width);
            for ch in 0..c {
                let at = |x: usize, y: usize| frame.data[(y * src.width + x) * c + ch];
                let top = at(x0, y0) + (at(x1, y0) - at(x0, y0)) * fx;
                let bottom = at(x0, y1) + (at(x1, y1) - at(x0, y1)) * fx;
                data.push((top + (bottom - top) * fy).clamp(0.0, 255.0));
            }
        }
    }
    Frame::new(Geometry::new(width, height, c), data)
}

/// Output image container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImageFormat {
    Png,
    Pgm,
}

impl ImageFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Pgm => "pgm",
        }
    }
}

impl FromStr for ImageFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(ImageFormat::Png),
            "pgm" => Ok(ImageFormat::Pgm),
            other => Err(Error::InvalidParameter(format!(
                "unknown image format {other:?} (expected png or pgm)"
            ))),
        }
    }
}

impl fmt::Display for ImageFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Writes `frame_000001.<ext>`, `frame_000002.<ext>`, … and returns the count.
pub fn save_sequence(seq: &FrameSequence, dir: &Path, format: ImageFormat) -> Result<usize> {
    let g = seq.geometry();
    if format == ImageFormat::Pgm && g.channels != 1 {
        return Err(Error::InvalidParameter(format!(
            "pgm output needs single-channel frames, got {} channels",
            g.channels
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, frame) in seq.frames().iter().enumerate() {
        let path = dir.join(format!("frame_{:06}.{}", i + 1, format.extension()));
        save_frame(frame, &path, format)?;
    }
    Ok(seq.len())
}

pub fn save_frame(frame: &Frame, path: &Path, format: ImageFormat) -> Result<()> {
    let g = frame.geometry();
    let bytes = frame.to_u8();
    match format {
        ImageFormat::Pgm => write_pgm(path, g.width, g.height, &bytes),
        ImageFormat::Png => {
            let color = match g.channels {
                1 => image::ExtendedColorType::L8,
                3 => image::ExtendedColorType::Rgb8,
                c => {
                    return Err(Error::InvalidParameter(format!(
                        "cannot write {c}-channel frame"
                    )))
                }
            };
            image::save_buffer_with_format(
                path,
                &bytes,
                g.width as u32,
                g.height as u32,
                color,
                image::ImageFormat::Png,
            )
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::io(path, std::io::Error::other(other.to_string())),
            })
        }
    }
}

/// Binary (P5) 8-bit PGM.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            found: pixels.len(),
        });
    }
    let mut out = Vec::with_capacity(pixels.len() + 20);
    write!(out, "P5\n{width} {height}\n255\n").expect("write to Vec");
    out.extend_from_slice(pixels);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
