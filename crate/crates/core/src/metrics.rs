//! Color metrics and reward functions: sRGB→CIELAB conversion, CIEDE2000
//! color difference, PSNR, and the color/aesthetic rewards.
//!
//! All colorimetry runs in f64 with the D65 white point and 2° observer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lut::{ImageBuf, Lut3d};

/// CIELAB color. L in [0,100] for in-gamut sRGB inputs; a and b unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

/// sRGB EOTF decode → XYZ (D65) → CIELAB.
pub fn srgb_to_lab(c: [f32; 3]) -> LabColor {
    let eotf = |v: f64| {
        if v <= 0.04045 {
            v / 12.92
        } else {
            ((v + 0.055) / 1.055).powf(2.4)
        }
    };
    let r = eotf(c[0].clamp(0.0, 1.0) as f64);
    let g = eotf(c[1].clamp(0.0, 1.0) as f64);
    let b = eotf(c[2].clamp(0.0, 1.0) as f64);

    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

    const XN: f64 = 0.95047;
    const YN: f64 = 1.0;
    const ZN: f64 = 1.08883;
    const EPS: f64 = 216.0 / 24389.0;
    const KAPPA: f64 = 24389.0 / 27.0;
    let f = |t: f64| {
        if t > EPS {
            t.cbrt()
        } else {
            (KAPPA * t + 16.0) / 116.0
        }
    };
    let (fx, fy, fz) = (f(x / XN), f(y / YN), f(z / ZN));
    LabColor {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// CIEDE2000 color difference, including the hue rotation term.
pub fn delta_e_2000(x: LabColor, y: LabColor) -> f64 {
    const POW25_7: f64 = 6103515625.0; // 25^7

    let c1 = (x.a * x.a + x.b * x.b).sqrt();
    let c2 = (y.a * y.a + y.b * y.b).sqrt();
    let c_bar = 0.5 * (c1 + c2);
    let c_bar7 = c_bar.powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + POW25_7)).sqrt());

    let a1p = (1.0 + g) * x.a;
    let a2p = (1.0 + g) * y.a;
    let c1p = (a1p * a1p + x.b * x.b).sqrt();
    let c2p = (a2p * a2p + y.b * y.b).sqrt();

    let hue = |a: f64, b: f64| -> f64 {
        if a == 0.0 && b == 0.0 {
            0.0
        } else {
            let h = b.atan2(a).to_degrees();
            if h < 0.0 {
                h + 360.0
            } else {
                h
            }
        }
    };
    let h1p = hue(a1p, x.b);
    let h2p = hue(a2p, y.b);

    let dl = y.l - x.l;
    let dc = c2p - c1p;

    let dhp = if c1p * c2p == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let dh_big = 2.0 * (c1p * c2p).sqrt() * (dhp.to_radians() / 2.0).sin();

    let l_bar = 0.5 * (x.l + y.l);
    let cp_bar = 0.5 * (c1p + c2p);
    let h_bar = if c1p * c2p == 0.0 {
        h1p + h2p
    } else {
        let sum = h1p + h2p;
        if (h1p - h2p).abs() <= 180.0 {
            0.5 * sum
        } else if sum < 360.0 {
            0.5 * (sum + 360.0)
        } else {
            0.5 * (sum - 360.0)
        }
    };

    let t = 1.0 - 0.17 * (h_bar - 30.0).to_radians().cos()
        + 0.24 * (2.0 * h_bar).to_radians().cos()
        + 0.32 * (3.0 * h_bar + 6.0).to_radians().cos()
        - 0.20 * (4.0 * h_bar - 63.0).to_radians().cos();

    let d_theta = 30.0 * (-((h_bar - 275.0) / 25.0).powi(2)).exp();
    let cp_bar7 = cp_bar.powi(7);
    let rc = 2.0 * (cp_bar7 / (cp_bar7 + POW25_7)).sqrt();
    let rt = -(2.0 * d_theta).to_radians().sin() * rc;

    let lsq = (l_bar - 50.0) * (l_bar - 50.0);
    let sl = 1.0 + 0.015 * lsq / (20.0 + lsq).sqrt();
    let sc = 1.0 + 0.045 * cp_bar;
    let sh = 1.0 + 0.015 * cp_bar * t;

    let (vl, vc, vh) = (dl / sl, dc / sc, dh_big / sh);
    (vl * vl + vc * vc + vh * vh + rt * vc * vh).sqrt()
}

/// Pixel area-average downsample so the long edge is at most
/// `max_long_edge`. Uses an integer shrink factor; partial edge blocks
/// average over the pixels they cover.
pub fn downsample_area(img: &ImageBuf, max_long_edge: usize) -> ImageBuf {
    let long = img.width().max(img.height());
    if long <= max_long_edge {
        return img.clone();
    }
    let f = long.div_ceil(max_long_edge);
    let nw = img.width().div_ceil(f);
    let nh = img.height().div_ceil(f);
    let mut pixels = Vec::with_capacity(nw * nh * 3);
    for by in 0..nh {
        for bx in 0..nw {
            let x1 = ((bx + 1) * f).min(img.width());
            let y1 = ((by + 1) * f).min(img.height());
            let mut acc = [0.0f64; 3];
            let mut count = 0.0;
            for y in by * f..y1 {
                for x in bx * f..x1 {
                    let p = img.pixel(x, y);
                    for c in 0..3 {
                        acc[c] += p[c] as f64;
                    }
                    count += 1.0;
                }
            }
            for a in acc {
                pixels.push((a / count) as f32);
            }
        }
    }
    ImageBuf::from_pixels(nw, nh, pixels).expect("downsample stays in range")
}

/// Long-edge cap used by [`mean_delta_e`] before the per-pixel loop.
pub const DELTA_E_MAX_EDGE: usize = 256;

/// Mean per-pixel CIEDE2000 between two equally-sized images, computed on
/// area-downsampled copies (long edge ≤ 256).
pub fn mean_delta_e(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::ShapeMismatch(format!(
            "image dimensions {}×{} vs {}×{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let a = downsample_area(a, DELTA_E_MAX_EDGE);
    let b = downsample_area(b, DELTA_E_MAX_EDGE);
    let mut sum = 0.0;
    let n = a.width() * a.height();
    for (pa, pb) in a.pixels().chunks_exact(3).zip(b.pixels().chunks_exact(3)) {
        let la = srgb_to_lab([pa[0], pa[1], pa[2]]);
        let lb = srgb_to_lab([pb[0], pb[1], pb[2]]);
        sum += delta_e_2000(la, lb);
    }
    Ok(sum / n as f64)
}

/// Mean squared error between two equal-length component buffers.
pub fn mse(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "buffer lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = (*x - *y) as f64;
        acc += d * d;
    }
    Ok(acc / a.len() as f64)
}

/// PSNR ceiling reported for identical inputs.
pub const PSNR_CAP_DB: f64 = 99.0;

/// 10·log10(1/MSE) with peak 1.0; identical inputs report the 99 dB cap.
pub fn psnr(a: &[f32], b: &[f32]) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        Ok(PSNR_CAP_DB)
    } else {
        Ok(10.0 * (1.0 / m).log10())
    }
}

pub fn psnr_images(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::ShapeMismatch("image dimensions differ".into()));
    }
    psnr(a.pixels(), b.pixels())
}

pub fn psnr_luts(a: &Lut3d, b: &Lut3d) -> Result<f64> {
    if a.resolution() != b.resolution() {
        return Err(Error::ShapeMismatch("LUT resolutions differ".into()));
    }
    psnr(a.data(), b.data())
}

/// Color-similarity reward 1/(max(2, ΔE) − 1): equals 1 whenever the mean
/// color difference is under 2, then decays with ΔE.
pub fn color_reward(pred: &ImageBuf, gt: &ImageBuf) -> Result<f64> {
    Ok(color_reward_from_delta_e(mean_delta_e(pred, gt)?))
}

pub fn color_reward_from_delta_e(mean_de: f64) -> f64 {
    1.0 / (mean_de.max(2.0) - 1.0)
}

/// Pluggable aesthetic assessor returning a score in [0, 5].
pub trait AestheticScorer: Send + Sync {
    fn score(&self, img: &ImageBuf) -> Result<f64>;
}

/// Deterministic stand-in scorer: a weighted blend of colorfulness,
/// luminance contrast, and a clipping penalty, scaled to [0, 5]. A stable
/// signal for reward plumbing, not a learned quality model.
#[derive(Debug, Clone)]
pub struct HeuristicScorer {
    pub colorfulness_weight: f64,
    pub contrast_weight: f64,
    pub clip_weight: f64,
}

impl Default for HeuristicScorer {
    fn default() -> Self {
        HeuristicScorer {
            colorfulness_weight: 0.35,
            contrast_weight: 0.35,
            clip_weight: 0.30,
        }
    }
}

impl AestheticScorer for HeuristicScorer {
    fn score(&self, img: &ImageBuf) -> Result<f64> {
        let n = (img.width() * img.height()) as f64;
        let mut rg_sum = 0.0;
        let mut rg_sq = 0.0;
        let mut yb_sum = 0.0;
        let mut yb_sq = 0.0;
        let mut luma_sum = 0.0;
        let mut luma_sq = 0.0;
        let mut clipped = 0.0;
        for p in img.pixels().chunks_exact(3) {
            let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
            let rg = r - g;
            let yb = 0.5 * (r + g) - b;
            rg_sum += rg;
            rg_sq += rg * rg;
            yb_sum += yb;
            yb_sq += yb * yb;
            let y = 0.2126 * r + 0.7152 * g + 0.0722 * b;
            luma_sum += y;
            luma_sq += y * y;
            for &v in p {
                if v <= 1.0 / 255.0 || v >= 254.0 / 255.0 {
                    clipped += 1.0;
                }
            }
        }
        let var = |sq: f64, sum: f64| (sq / n - (sum / n) * (sum / n)).max(0.0);
        // Hasler–Süsstrunk style colorfulness on [0,1] components
        let colorfulness = (var(rg_sq, rg_sum) + var(yb_sq, yb_sum)).sqrt()
            + 0.3 * ((rg_sum / n).powi(2) + (yb_sum / n).powi(2)).sqrt();
        let contrast = var(luma_sq, luma_sum).sqrt();
        let clip_fraction = clipped / (3.0 * n);

        let c_term = (colorfulness / 0.25).clamp(0.0, 1.0);
        let k_term = (contrast / 0.25).clamp(0.0, 1.0);
        let p_term = 1.0 - clip_fraction;
        let blend = self.colorfulness_weight * c_term
            + self.contrast_weight * k_term
            + self.clip_weight * p_term;
        Ok(5.0 * blend.clamp(0.0, 1.0))
    }
}

/// Scale a scorer's [0,5] output to the [0,1] aesthetic reward.
pub fn aesthetic_reward(img: &ImageBuf, scorer: &dyn AestheticScorer) -> Result<f64> {
    let s = scorer.score(img)?;
    if !s.is_finite() || !(0.0..=5.0).contains(&s) {
        return Err(Error::RewardUnavailable(format!(
            "scorer returned {s}, outside [0,5]"
        )));
    }
    Ok((s / 5.0).clamp(0.0, 1.0))
}

/// CLI-facing metric report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub mean_delta_e: f64,
    pub color_reward: f64,
    pub aesthetic_reward: f64,
}
