//! PSNR and windowed SSIM between observed and generated sequences.
//!
//! Sequence scores compare frame `l` of each sequence for
//! `l = start_index ..= min(L_obs, L_gen)` (1-based) and average per frame.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frameio::{check_geometry, Frame, FrameSequence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsnrConfig {
    pub peak: f64,
    /// Score for zero-error frames; also an upper bound for every frame.
    pub cap_db: f64,
    /// First compared frame, 1-based.
    pub start_index: usize,
}

impl Default for PsnrConfig {
    fn default() -> Self {
        Self {
            peak: 255.0,
            cap_db: 100.0,
            start_index: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    pub c1: f64,
    pub c2: f64,
    /// Odd side length of the Gaussian window.
    pub window: usize,
    pub window_sigma: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            c1: (0.01f64 * 255.0).powi(2),
            c2: (0.03f64 * 255.0).powi(2),
            window: 11,
            window_sigma: 1.5,
        }
    }
}

impl SsimConfig {
    fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::InvalidParameter("SSIM constants must be > 0".into()));
        }
        if self.window < 3 || self.window % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "SSIM window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(self.window_sigma > 0.0) {
            return Err(Error::InvalidParameter("SSIM window sigma must be > 0".into()));
        }
        Ok(())
    }

    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn taps(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let raw: Vec<f64> = (0..self.window)
            .map(|k| {
                let x = k as f64 - r;
                (-(x * x) / (2.0 * self.window_sigma * self.window_sigma)).exp()
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub psnr: PsnrConfig,
    pub ssim: SsimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// 1-based index of the first compared frame.
    pub start_index: usize,
    pub per_frame_psnr: Vec<f64>,
    pub mean_psnr: f64,
    pub per_frame_ssim: Vec<f64>,
    pub mean_ssim: f64,
    pub frames_compared: usize,
}

impl MetricReport {
    /// 1-based frame index of each compared entry.
    pub fn frame_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.frames_compared).map(|i| self.start_index + i)
    }

    /// `frame,psnr_db,ssim` rows followed by a `mean` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,psnr_db,ssim\n");
        for ((l, p), s) in self
            .frame_indices()
            .zip(&self.per_frame_psnr)
            .zip(&self.per_frame_ssim)
        {
            writeln!(out, "{l},{p:.6},{s:.6}").unwrap();
        }
        writeln!(out, "mean,{:.6},{:.6}", self.mean_psnr, self.mean_ssim).unwrap();
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn mse(x: &Frame, y: &Frame) -> Result<f64> {
    check_geometry(x.geometry(), y.geometry())?;
    let n = x.data().len() as f64;
    Ok(x.data()
        .iter()
        .zip(y.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// `10·log10(peak² / MSE)`, capped at `cap_db` (zero MSE scores the cap).
pub fn psnr_frame(x: &Frame, y: &Frame, cfg: &PsnrConfig) -> Result<f64> {
    let e = mse(x, y)?;
    if e == 0.0 {
        return Ok(cfg.cap_db);
    }
    Ok((10.0 * (cfg.peak * cfg.peak / e).log10()).min(cfg.cap_db))
}

/// 1-based inclusive bounds of the compared range.
fn compared_range(
    observed: &FrameSequence,
    generated: &FrameSequence,
    start_index: usize,
) -> Result<(usize, usize)> {
    check_geometry(observed.geometry(), generated.geometry())?;
    let end = observed.len().min(generated.len());
    if start_index == 0 || start_index > end {
        return Err(Error::EmptyComparison);
    }
    Ok((start_index, end))
}

pub fn psnr_sequence(
    observed: &FrameSequence,
    generated: &FrameSequence,
    cfg: &PsnrConfig,
) -> Result<(Vec<f64>, f64)> {
    if !(cfg.peak > 0.0 && cfg.cap_db > 0.0) {
        return Err(Error::InvalidParameter("PSNR peak and cap must be > 0".into()));
    }
    let (start, end) = compared_range(observed, generated, cfg.start_index)?;
    let per_frame = (start..=end)
        .into_par_iter()
        .map(|l| psnr_frame(observed.frame(l - 1), generated.frame(l - 1), cfg))
        .collect::<Result<Vec<_>>>()?;
    let m = mean(&per_frame);
    Ok((per_frame, m))
}

/// Mean SSIM over all valid window positions; color frames average their channels.
pub fn ssim_frame(x: &Frame, y: &Frame, cfg: &SsimConfig) -> Result<f64> {
    check_geometry(x.geometry(), y.geometry())?;
    cfg.validate()?;
    let g = x.geometry();
    if g.width < cfg.window || g.height < cfg.window {
        return Err(Error::FrameTooSmall {
            width: g.width,
            height: g.height,
            window: cfg.window,
        });
    }
    let taps = cfg.taps();
    let total: f64 = (0..g.channels)
        .map(|c| {
            ssim_plane(
                &x.channel_plane(c),
                &y.channel_plane(c),
                g.width,
                g.height,
                &taps,
                cfg,
            )
        })
        .sum();
    Ok(total / g.channels as f64)
}

fn ssim_plane(x: &[f64], y: &[f64], w: usize, h: usize, taps: &[f64], cfg: &SsimConfig) -> f64 {
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mu_x = filter_valid(x, w, h, taps);
    let mu_y = filter_valid(y, w, h, taps);
    let e_xx = filter_valid(&xx, w, h, taps);
    let e_yy = filter_valid(&yy, w, h, taps);
    let e_xy = filter_valid(&xy, w, h, taps);
    let n = mu_x.len();
    let mut sum = 0.0;
    for i in 0..n {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        let s = ((2.0 * mx * my + cfg.c1) * (2.0 * cov + cfg.c2))
            / ((mx * mx + my * my + cfg.c1) * (var_x + var_y + cfg.c2));
        // Cancellation in the variance terms can overshoot by a few ulps.
        sum += s.clamp(-1.0, 1.0);
    }
    sum / n as f64
}

/// Separable "valid" correlation with `taps` along both axes.
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let ow = w - k + 1;
    let oh = h - k + 1;
    let mut horiz = vec![0.0; ow * h];
    for row in 0..h {
        let line = &src[row * w..(row + 1) * w];
        for col in 0..ow {
            horiz[row * ow + col] = taps.iter().zip(&line[col..col + k]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for row in 0..oh {
        for col in 0..ow {
            out[row * ow + col] = taps
                .iter()
                .enumerate()
                .map(|(t, tap)| tap * horiz[(row + t) * ow + col])
                .sum();
        }
    }
    out
}

pub fn ssim_sequence(
    observed: &FrameSequence,
    generated: &FrameSequence,
    cfg: &SsimConfig,
    start_index: usize,
) -> Result<(Vec<f64>, f64)> {
    let (start, end) = compared_range(observed, generated, start_index)?;
    let per_frame = (start..=end)
        .into_par_iter()
        .map(|l| ssim_frame(observed.frame(l - 1), generated.frame(l - 1), cfg))
        .collect::<Result<Vec<_>>>()?;
    let m = mean(&per_frame);
    Ok((per_frame, m))
}

/// PSNR and SSIM over the same compared range.
pub fn evaluate(
    observed: &FrameSequence,
    generated: &FrameSequence,
    cfg: &EvalConfig,
) -> Result<MetricReport> {
    let (per_frame_psnr, mean_psnr) = psnr_sequence(observed, generated, &cfg.psnr)?;
    let (per_frame_ssim, mean_ssim) =
        ssim_sequence(observed, generated, &cfg.ssim, cfg.psnr.start_index)?;
    Ok(MetricReport {
        start_index: cfg.psnr.start_index,
        frames_compared: per_frame_psnr.len(),
        per_frame_psnr,
        mean_psnr,
        per_frame_ssim,
        mean_ssim,
    })
}
