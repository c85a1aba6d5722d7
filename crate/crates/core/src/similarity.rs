//! Input preprocessing and the two similarity measures used by local reuse:
//! global-statistics SSIM and cosine similarity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{GrayImage, InputData, PreprocessedInput};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("input is all zero and cannot be normalized")]
    DegenerateInput,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("target dimensions must be positive")]
    EmptyTarget,
}

/// Stabilizers of the three SSIM factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl SsimConstants {
    /// Constants for a signal with dynamic range `l`: `C1 = (0.01 L)^2`,
    /// `C2 = (0.03 L)^2`, `C3 = C2 / 2`.
    pub fn for_range(l: f64) -> Self {
        let c1 = (0.01 * l).powi(2);
        let c2 = (0.03 * l).powi(2);
        Self { c1, c2, c3: c2 / 2.0 }
    }
}

impl Default for SsimConstants {
    fn default() -> Self {
        Self::for_range(1.0)
    }
}

/// Bilinear resampling with pixel-center alignment. Sampling at the source
/// resolution reproduces the source exactly.
pub fn resize_bilinear(src: &GrayImage, width: usize, height: usize) -> Vec<f64> {
    let (sw, sh) = src.dims();
    let sx_scale = sw as f64 / width as f64;
    let sy_scale = sh as f64 / height as f64;
    let taps_x: Vec<(usize, usize, f64)> = (0..width).map(|x| taps(x, sx_scale, sw)).collect();
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        let (y0, y1, fy) = taps(y, sy_scale, sh);
        for &(x0, x1, fx) in &taps_x {
            let top = lerp(f64::from(src.get(x0, y0)), f64::from(src.get(x1, y0)), fx);
            let bottom = lerp(f64::from(src.get(x0, y1)), f64::from(src.get(x1, y1)), fx);
            out.push(lerp(top, bottom, fy));
        }
    }
    out
}

fn taps(dst: usize, scale: f64, src_len: usize) -> (usize, usize, f64) {
    let s = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
    let i0 = s.floor() as usize;
    let i1 = (i0 + 1).min(src_len - 1);
    (i0, i1, s - i0 as f64)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + (b - a) * t
    }
}

/// Resizes, flattens and unit-normalizes an input.
pub fn preprocess(
    d: &InputData,
    target: (usize, usize),
) -> Result<PreprocessedInput, SimilarityError> {
    let (w, h) = target;
    if w == 0 || h == 0 {
        return Err(SimilarityError::EmptyTarget);
    }
    let grid = resize_bilinear(d.image(), w, h);
    let norm = grid.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(SimilarityError::DegenerateInput);
    }
    let unit = grid.iter().map(|v| v / norm).collect();
    Ok(PreprocessedInput {
        unit,
        grid,
        dims: target,
    })
}

/// SSIM of two preprocessed inputs, read from their pre-normalization grids.
pub fn ssim(
    x: &PreprocessedInput,
    y: &PreprocessedInput,
    k: &SsimConstants,
) -> Result<f64, SimilarityError> {
    if x.dims() != y.dims() {
        return Err(SimilarityError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    ssim_slices(x.grid(), y.grid(), k)
}

/// Global-statistics SSIM: one window covering the whole signal.
pub fn ssim_slices(x: &[f64], y: &[f64], k: &SsimConstants) -> Result<f64, SimilarityError> {
    if x.len() != y.len() {
        return Err(SimilarityError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(SimilarityError::DimensionMismatch { left: 0, right: 0 });
    }
    let n = x.len() as f64;
    let mu_x = x.iter().sum::<f64>() / n;
    let mu_y = y.iter().sum::<f64>() / n;
    let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mu_x;
        let dy = b - mu_y;
        var_x += dx * dx;
        var_y += dy * dy;
        cov += dx * dy;
    }
    var_x /= n;
    var_y /= n;
    cov /= n;
    // sqrt(vx * vy) rather than sqrt(vx) * sqrt(vy): for x == y it is exactly vx.
    let sigma_xy = (var_x * var_y).sqrt();

    let luminance = (2.0 * mu_x * mu_y + k.c1) / (mu_x * mu_x + mu_y * mu_y + k.c1);
    let contrast = (2.0 * sigma_xy + k.c2) / (var_x + var_y + k.c2);
    let structure = (cov + k.c3) / (sigma_xy + k.c3);
    Ok((luminance * contrast * structure).clamp(-1.0, 1.0))
}

/// Cosine similarity of two unit-normalized inputs (their dot product).
pub fn cosine(x: &PreprocessedInput, y: &PreprocessedInput) -> Result<f64, SimilarityError> {
    cosine_slices(x.unit(), y.unit())
}

pub fn cosine_slices(x: &[f64], y: &[f64]) -> Result<f64, SimilarityError> {
    if x.len() != y.len() {
        return Err(SimilarityError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(dot(x, y).clamp(-1.0, 1.0))
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
