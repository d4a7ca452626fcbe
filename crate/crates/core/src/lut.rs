//! 3D-LUT data model and deterministic LUT operations.
//!
//! A LUT is an N³ lattice of RGB triplets in [0,1] describing a color
//! mapping; applying it trilinearly interpolates the 8 lattice vertices
//! around the (clamped) input color. Data is stored `[b][g][r]` with the
//! red index fastest, matching `.cube` row order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Lattice coordinates within this distance of a vertex snap to it, so
/// vertex queries are exact despite f32 coordinate rounding.
const KNOT_SNAP: f64 = 5e-5;

/// A 3-channel volumetric color map over an N³ lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Lut3d {
    n: usize,
    data: Vec<f32>,
}

impl Lut3d {
    /// Identity mapping: vertex (i,j,k) stores (i,j,k)/(N−1).
    pub fn identity(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidResolution(n));
        }
        let scale = 1.0 / (n - 1) as f64;
        let mut data = Vec::with_capacity(3 * n * n * n);
        for b in 0..n {
            for g in 0..n {
                for r in 0..n {
                    data.push((r as f64 * scale) as f32);
                    data.push((g as f64 * scale) as f32);
                    data.push((b as f64 * scale) as f32);
                }
            }
        }
        Ok(Lut3d { n, data })
    }

    /// Build from raw data in `[b][g][r]` order, red fastest. Every
    /// component must be finite and in [0,1].
    pub fn from_data(n: usize, data: Vec<f32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidResolution(n));
        }
        if data.len() != 3 * n * n * n {
            return Err(Error::ShapeMismatch(format!(
                "LUT data length {} does not match 3·{n}³ = {}",
                data.len(),
                3 * n * n * n
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "LUT component {v} outside [0,1]"
            )));
        }
        Ok(Lut3d { n, data })
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Stored value at vertex (r, g, b).
    pub fn vertex(&self, r: usize, g: usize, b: usize) -> [f32; 3] {
        let i = 3 * (((b * self.n) + g) * self.n + r);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Trilinear lookup at a lattice-space coordinate (units of vertices).
    fn sample_grid(&self, tr: f64, tg: f64, tb: f64) -> [f32; 3] {
        let n = self.n;
        let snap = |t: f64| -> f64 {
            let r = t.round();
            if (t - r).abs() < KNOT_SNAP {
                r
            } else {
                t
            }
        };
        let prep = |t: f64| snap(t.clamp(0.0, (n - 1) as f64));
        let (tr, tg, tb) = (prep(tr), prep(tg), prep(tb));

        let cell = |t: f64| -> (usize, f64) {
            let i = (t.floor() as usize).min(n - 2);
            (i, t - i as f64)
        };
        let (r0, fr) = cell(tr);
        let (g0, fg) = cell(tg);
        let (b0, fb) = cell(tb);

        let at = |r: usize, g: usize, b: usize, c: usize| -> f64 {
            self.data[3 * (((b * n) + g) * n + r) + c] as f64
        };
        let mut out = [0.0f32; 3];
        for (c, slot) in out.iter_mut().enumerate() {
            let c00 = at(r0, g0, b0, c) + fr * (at(r0 + 1, g0, b0, c) - at(r0, g0, b0, c));
            let c10 =
                at(r0, g0 + 1, b0, c) + fr * (at(r0 + 1, g0 + 1, b0, c) - at(r0, g0 + 1, b0, c));
            let c01 =
                at(r0, g0, b0 + 1, c) + fr * (at(r0 + 1, g0, b0 + 1, c) - at(r0, g0, b0 + 1, c));
            let c11 = at(r0, g0 + 1, b0 + 1, c)
                + fr * (at(r0 + 1, g0 + 1, b0 + 1, c) - at(r0, g0 + 1, b0 + 1, c));
            let c0 = c00 + fg * (c10 - c00);
            let c1 = c01 + fg * (c11 - c01);
            *slot = (c0 + fb * (c1 - c0)).clamp(0.0, 1.0) as f32;
        }
        out
    }

    /// Trilinear lookup at an input color; components clamp to [0,1].
    pub fn sample(&self, c: [f32; 3]) -> [f32; 3] {
        let s = (self.n - 1) as f64;
        self.sample_grid(
            c[0].clamp(0.0, 1.0) as f64 * s,
            c[1].clamp(0.0, 1.0) as f64 * s,
            c[2].clamp(0.0, 1.0) as f64 * s,
        )
    }

    /// Apply to every pixel of an image.
    pub fn apply(&self, img: &ImageBuf) -> ImageBuf {
        let mut pixels = Vec::with_capacity(img.pixels.len());
        for px in img.pixels.chunks_exact(3) {
            let out = self.sample([px[0], px[1], px[2]]);
            pixels.extend_from_slice(&out);
        }
        ImageBuf {
            width: img.width,
            height: img.height,
            pixels,
        }
    }

    /// Resample onto a `target_n` lattice. Output vertex (i,j,k) equals
    /// the trilinear sample at (i,j,k)/(target_n−1); resampling to the
    /// same resolution copies data bit-exactly.
    pub fn resample(&self, target_n: usize) -> Result<Lut3d> {
        if target_n < 2 {
            return Err(Error::InvalidResolution(target_n));
        }
        let scale = (self.n - 1) as f64 / (target_n - 1) as f64;
        let mut data = Vec::with_capacity(3 * target_n * target_n * target_n);
        for b in 0..target_n {
            for g in 0..target_n {
                for r in 0..target_n {
                    let v = self.sample_grid(r as f64 * scale, g as f64 * scale, b as f64 * scale);
                    data.extend_from_slice(&v);
                }
            }
        }
        Ok(Lut3d { n: target_n, data })
    }

    /// Functional composition: output vertex = second(first(coordinate)).
    pub fn compose(first: &Lut3d, second: &Lut3d, out_n: usize) -> Result<Lut3d> {
        if out_n < 2 {
            return Err(Error::InvalidResolution(out_n));
        }
        let scale = 1.0 / (out_n - 1) as f64;
        let mut data = Vec::with_capacity(3 * out_n * out_n * out_n);
        for b in 0..out_n {
            for g in 0..out_n {
                for r in 0..out_n {
                    let c = [
                        (r as f64 * scale) as f32,
                        (g as f64 * scale) as f32,
                        (b as f64 * scale) as f32,
                    ];
                    let mid = first.sample(c);
                    data.extend_from_slice(&second.sample(mid));
                }
            }
        }
        Ok(Lut3d { n: out_n, data })
    }
}

/// Floating-point RGB raster in [0,1], interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl ImageBuf {
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(
                "image dimensions must be positive".into(),
            ));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::ShapeMismatch(format!(
                "pixel buffer length {} does not match {width}×{height}×3",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pixel component {v} outside [0,1]"
            )));
        }
        Ok(ImageBuf {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// Augmentation intensity preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intensity {
    Low,
    High,
}

impl std::str::FromStr for Intensity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Intensity::Low),
            "high" => Ok(Intensity::High),
            other => Err(Error::InvalidParameter(format!(
                "unknown intensity {other:?} (expected low|high)"
            ))),
        }
    }
}

/// Smoothed per-vertex RGB offset lattice for the noise term.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    n: usize,
    offsets: Vec<f32>,
}

impl NoiseField {
    /// Offset at a position in the input color cube, trilinear.
    fn sample(&self, c: [f32; 3]) -> [f64; 3] {
        let n = self.n;
        let s = (n - 1) as f64;
        let t = [
            c[0].clamp(0.0, 1.0) as f64 * s,
            c[1].clamp(0.0, 1.0) as f64 * s,
            c[2].clamp(0.0, 1.0) as f64 * s,
        ];
        let cell = |t: f64| -> (usize, f64) {
            let i = (t.floor() as usize).min(n - 2);
            (i, t - i as f64)
        };
        let (r0, fr) = cell(t[0]);
        let (g0, fg) = cell(t[1]);
        let (b0, fb) = cell(t[2]);
        let at = |r: usize, g: usize, b: usize, c: usize| -> f64 {
            self.offsets[3 * (((b * n) + g) * n + r) + c] as f64
        };
        let mut out = [0.0f64; 3];
        for (ch, slot) in out.iter_mut().enumerate() {
            let c00 = at(r0, g0, b0, ch) * (1.0 - fr) + at(r0 + 1, g0, b0, ch) * fr;
            let c10 = at(r0, g0 + 1, b0, ch) * (1.0 - fr) + at(r0 + 1, g0 + 1, b0, ch) * fr;
            let c01 = at(r0, g0, b0 + 1, ch) * (1.0 - fr) + at(r0 + 1, g0, b0 + 1, ch) * fr;
            let c11 =
                at(r0, g0 + 1, b0 + 1, ch) * (1.0 - fr) + at(r0 + 1, g0 + 1, b0 + 1, ch) * fr;
            let c0 = c00 * (1.0 - fg) + c10 * fg;
            let c1 = c01 * (1.0 - fg) + c11 * fg;
            *slot = c0 * (1.0 - fb) + c1 * fb;
        }
        out
    }

    /// Offset stored at a lattice vertex.
    fn at_vertex(&self, r: usize, g: usize, b: usize) -> [f64; 3] {
        let i = 3 * (((b * self.n) + g) * self.n + r);
        [
            self.offsets[i] as f64,
            self.offsets[i + 1] as f64,
            self.offsets[i + 2] as f64,
        ]
    }
}

/// A color perturbation φ: gamma, contrast around mid-gray, exposure in
/// stops, then an optional smoothed noise offset. The neutral perturbation
/// is an exact identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    gamma: f32,
    contrast: f32,
    exposure_stops: f32,
    noise_field: Option<NoiseField>,
}

/// Noise-field lattice resolution (matches the working LUT format).
const NOISE_N: usize = 32;

/// Offsets are clamped to this bound after smoothing.
const NOISE_BOUND: f32 = 0.05;

impl Perturbation {
    pub fn new(gamma: f32, contrast: f32, exposure_stops: f32) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !contrast.is_finite() || contrast <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "contrast must be positive, got {contrast}"
            )));
        }
        if !exposure_stops.is_finite() {
            return Err(Error::InvalidParameter("exposure must be finite".into()));
        }
        Ok(Perturbation {
            gamma,
            contrast,
            exposure_stops,
            noise_field: None,
        })
    }

    pub fn neutral() -> Self {
        Perturbation {
            gamma: 1.0,
            contrast: 1.0,
            exposure_stops: 0.0,
            noise_field: None,
        }
    }

    pub fn gamma(&self) -> f32 {
        self.gamma
    }

    pub fn contrast(&self) -> f32 {
        self.contrast
    }

    pub fn exposure_stops(&self) -> f32 {
        self.exposure_stops
    }

    pub fn has_noise(&self) -> bool {
        self.noise_field.is_some()
    }

    /// Draw parameters uniformly from the intensity preset's ranges.
    /// Deterministic per seed.
    pub fn sample(seed: u64, intensity: Intensity) -> Perturbation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo_g, hi_g, lo_c, hi_c, ev, sigma) = match intensity {
            Intensity::Low => (0.9, 1.1, 0.9, 1.1, 0.25, 0.02),
            Intensity::High => (0.8, 1.25, 0.8, 1.25, 0.5, 0.035),
        };
        let gamma = rng.random_range(lo_g..=hi_g) as f32;
        let contrast = rng.random_range(lo_c..=hi_c) as f32;
        let exposure = rng.random_range(-ev..=ev) as f32;

        // gaussian lattice, 3³ box smooth, clamped
        let n = NOISE_N;
        let normal = Normal::new(0.0f64, sigma).expect("valid sigma");
        let raw: Vec<f64> = (0..3 * n * n * n).map(|_| normal.sample(&mut rng)).collect();
        let mut offsets = vec![0.0f32; raw.len()];
        for b in 0..n {
            for g in 0..n {
                for r in 0..n {
                    for c in 0..3 {
                        let mut acc = 0.0f64;
                        let mut count = 0u32;
                        for db in -1i64..=1 {
                            for dg in -1i64..=1 {
                                for dr in -1i64..=1 {
                                    let (bb, gg, rr) =
                                        (b as i64 + db, g as i64 + dg, r as i64 + dr);
                                    if bb < 0
                                        || gg < 0
                                        || rr < 0
                                        || bb >= n as i64
                                        || gg >= n as i64
                                        || rr >= n as i64
                                    {
                                        continue;
                                    }
                                    let i = 3
                                        * (((bb as usize * n) + gg as usize) * n + rr as usize)
                                        + c;
                                    acc += raw[i];
                                    count += 1;
                                }
                            }
                        }
                        let i = 3 * (((b * n) + g) * n + r) + c;
                        offsets[i] =
                            ((acc / count as f64) as f32).clamp(-NOISE_BOUND, NOISE_BOUND);
                    }
                }
            }
        }
        Perturbation {
            gamma,
            contrast,
            exposure_stops: exposure,
            noise_field: Some(NoiseField { n, offsets }),
        }
    }

    /// gamma → contrast → exposure on one component, without noise.
    fn core(&self, v: f32) -> f64 {
        let mut w = v.clamp(0.0, 1.0) as f64;
        if self.gamma != 1.0 {
            w = w.powf(self.gamma as f64);
        }
        if self.contrast != 1.0 {
            w = (w - 0.5) * self.contrast as f64 + 0.5;
        }
        if self.exposure_stops != 0.0 {
            w *= (self.exposure_stops as f64).exp2();
        }
        w
    }

    /// Perturb one RGB value. The noise offset is evaluated at the value's
    /// position in the input color cube: the lattice coordinate for a LUT
    /// vertex, the original pixel color for an image.
    fn transform(&self, v: [f32; 3], noise: Option<[f64; 3]>) -> [f32; 3] {
        let mut out = [0.0f32; 3];
        for c in 0..3 {
            let mut w = self.core(v[c]);
            if let Some(nz) = noise {
                w += nz[c];
            }
            out[c] = w.clamp(0.0, 1.0) as f32;
        }
        out
    }

    /// Perturb a LUT vertex-wise.
    pub fn apply_lut(&self, lut: &Lut3d) -> Lut3d {
        let n = lut.resolution();
        let mut data = Vec::with_capacity(lut.data.len());
        for b in 0..n {
            for g in 0..n {
                for r in 0..n {
                    let v = lut.vertex(r, g, b);
                    let noise = self.noise_field.as_ref().map(|f| {
                        if f.n == n {
                            f.at_vertex(r, g, b)
                        } else {
                            let s = 1.0 / (n - 1) as f32;
                            f.sample([r as f32 * s, g as f32 * s, b as f32 * s])
                        }
                    });
                    data.extend_from_slice(&self.transform(v, noise));
                }
            }
        }
        Lut3d { n, data }
    }

    /// Perturb an image pixel-wise.
    pub fn apply_image(&self, img: &ImageBuf) -> ImageBuf {
        let mut pixels = Vec::with_capacity(img.pixels.len());
        for px in img.pixels.chunks_exact(3) {
            let v = [px[0], px[1], px[2]];
            let noise = self.noise_field.as_ref().map(|f| f.sample(v));
            pixels.extend_from_slice(&self.transform(v, noise));
        }
        ImageBuf {
            width: img.width,
            height: img.height,
            pixels,
        }
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::{random_image, random_lut};
    use super::*;

    #[test]
    fn identity_stores_normalized_coordinates() {
        let lut = Lut3d::identity(2).unwrap();
        assert_eq!(lut.vertex(0, 0, 0), [0.0, 0.0, 0.0]);
        assert_eq!(lut.vertex(1, 0, 0), [1.0, 0.0, 0.0]);
        assert_eq!(lut.vertex(1, 1, 1), [1.0, 1.0, 1.0]);

        let lut = Lut3d::identity(32).unwrap();
        assert_eq!(lut.vertex(31, 0, 0), [1.0, 0.0, 0.0]);
        assert!(matches!(Lut3d::identity(1), Err(Error::InvalidResolution(1))));
        assert!(matches!(Lut3d::identity(0), Err(Error::InvalidResolution(0))));
    }

    #[test]
    fn identity_application_is_noop() {
        let lut = Lut3d::identity(32).unwrap();
        let img = random_image(7, 16, 9);
        let out = lut.apply(&img);
        let max_dev = img
            .pixels()
            .iter()
            .zip(out.pixels())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_dev < 1e-6, "max deviation {max_dev}");
    }

    #[test]
    fn constant_lut_maps_everything_to_constant() {
        let n = 4;
        let lut = Lut3d::from_data(n, vec![0.5; 3 * n * n * n]).unwrap();
        let img = random_image(3, 8, 8);
        let out = lut.apply(&img);
        assert!(out.pixels().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn channel_swap_corner_lut() {
        // N=2 identity with R and G outputs swapped at every corner
        let id = Lut3d::identity(2).unwrap();
        let mut data = Vec::new();
        for b in 0..2 {
            for g in 0..2 {
                for r in 0..2 {
                    let v = id.vertex(r, g, b);
                    data.extend_from_slice(&[v[1], v[0], v[2]]);
                }
            }
        }
        let lut = Lut3d::from_data(2, data).unwrap();
        assert_eq!(lut.sample([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0]);
        assert_eq!(lut.sample([0.0, 1.0, 0.0]), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn sample_identity_returns_input() {
        let lut = Lut3d::identity(32).unwrap();
        let out = lut.sample([0.3, 0.7, 0.1]);
        for (o, e) in out.iter().zip([0.3f32, 0.7, 0.1]) {
            assert!((o - e).abs() < 1e-6);
        }
    }

    #[test]
    fn sample_is_exact_at_every_knot() {
        let lut = random_lut(11, 9);
        let s = 1.0 / 8.0f32;
        for b in 0..9 {
            for g in 0..9 {
                for r in 0..9 {
                    let c = [r as f32 * s, g as f32 * s, b as f32 * s];
                    assert_eq!(lut.sample(c), lut.vertex(r, g, b), "vertex ({r},{g},{b})");
                }
            }
        }
    }

    #[test]
    fn single_hot_corner_trilinear_weight() {
        // all corners 0 except (1,1,1) → center gets weight 0.5³
        let mut data = vec![0.0f32; 24];
        data[21] = 1.0;
        data[22] = 1.0;
        data[23] = 1.0;
        let lut = Lut3d::from_data(2, data).unwrap();
        let out = lut.sample([0.5, 0.5, 0.5]);
        for v in out {
            assert!((v - 0.125).abs() < 1e-7, "got {v}");
        }
    }

    #[test]
    fn resample_identity_stays_identity() {
        let lut = Lut3d::identity(17).unwrap().resample(32).unwrap();
        let id32 = Lut3d::identity(32).unwrap();
        let max_dev = lut
            .data()
            .iter()
            .zip(id32.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_dev < 1e-6, "max deviation {max_dev}");
    }

    #[test]
    fn resample_to_own_resolution_is_bit_identical() {
        let lut = random_lut(5, 32);
        let back = lut.resample(32).unwrap();
        assert_eq!(lut.data(), back.data());
    }

    #[test]
    fn resample_idempotent() {
        let lut = random_lut(19, 17);
        let once = lut.resample(32).unwrap();
        let twice = once.resample(32).unwrap();
        assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn resample_midpoints_are_trilinear_midpoints() {
        // N=2 gamma-like LUT resampled to N=3: midpoint vertex on an edge
        // equals the mean of the two corners
        let mut data = Vec::new();
        for b in 0..2 {
            for g in 0..2 {
                for r in 0..2 {
                    data.extend_from_slice(&[
                        (r as f32).powf(2.2),
                        (g as f32).powf(2.2),
                        (b as f32).powf(2.2),
                    ]);
                }
            }
        }
        let lut = Lut3d::from_data(2, data).unwrap();
        let up = lut.resample(3).unwrap();
        let v = up.vertex(1, 0, 0);
        let c0 = lut.vertex(0, 0, 0);
        let c1 = lut.vertex(1, 0, 0);
        for c in 0..3 {
            let expect = 0.5 * (c0[c] + c1[c]);
            assert!((v[c] - expect).abs() < 1e-7);
        }
        // center of the cube = mean of all 8 corners
        let center = up.vertex(1, 1, 1);
        for (c, got) in center.iter().enumerate() {
            let mut acc = 0.0;
            for b in 0..2 {
                for g in 0..2 {
                    for r in 0..2 {
                        acc += lut.vertex(r, g, b)[c];
                    }
                }
            }
            assert!((got - acc / 8.0).abs() < 1e-7);
        }
    }

    #[test]
    fn compose_with_identity_matches_resample() {
        let lut = random_lut(23, 9);
        let id = Lut3d::identity(32).unwrap();
        let resampled = lut.resample(16).unwrap();

        let left = Lut3d::compose(&id, &lut, 16).unwrap();
        let right = Lut3d::compose(&lut, &id, 16).unwrap();
        for (a, b) in left.data().iter().zip(resampled.data()) {
            assert!((a - b).abs() < 1e-5);
        }
        for (a, b) in right.data().iter().zip(resampled.data()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn sample_stays_in_corner_envelope() {
        let lut = random_lut(31, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..2000 {
            let c = [
                rng.random_range(0.0..=1.0f32),
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
            ];
            let out = lut.sample(c);
            let t = |v: f32| ((v as f64) * 4.0).floor().min(3.0) as usize;
            let (r0, g0, b0) = (t(c[0]), t(c[1]), t(c[2]));
            for ch in 0..3 {
                let mut lo = f32::INFINITY;
                let mut hi = f32::NEG_INFINITY;
                for db in 0..2 {
                    for dg in 0..2 {
                        for dr in 0..2 {
                            let v = lut.vertex(r0 + dr, g0 + dg, b0 + db)[ch];
                            lo = lo.min(v);
                            hi = hi.max(v);
                        }
                    }
                }
                assert!(
                    out[ch] >= lo - 1e-6 && out[ch] <= hi + 1e-6,
                    "{c:?} channel {ch}: {} outside [{lo}, {hi}]",
                    out[ch]
                );
            }
        }
    }

    #[test]
    fn out_of_gamut_inputs_clamp() {
        let lut = Lut3d::identity(8).unwrap();
        assert_eq!(lut.sample([-0.5, 2.0, 0.5]), lut.sample([0.0, 1.0, 0.5]));
    }

    #[test]
    fn neutral_perturbation_is_exact_identity() {
        let p = Perturbation::neutral();
        let lut = random_lut(43, 8);
        assert_eq!(p.apply_lut(&lut).data(), lut.data());
        let img = random_image(44, 6, 6);
        assert_eq!(p.apply_image(&img).pixels(), img.pixels());
    }

    #[test]
    fn perturbation_component_formula() {
        // gamma 2 squares mid-gray
        let p = Perturbation::new(2.0, 1.0, 0.0).unwrap();
        let img = ImageBuf::from_pixels(1, 1, vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(p.apply_image(&img).pixels(), &[0.25, 0.25, 0.25]);

        // one stop doubles
        let p = Perturbation::new(1.0, 1.0, 1.0).unwrap();
        let img = ImageBuf::from_pixels(1, 1, vec![0.4, 0.4, 0.4]).unwrap();
        for v in p.apply_image(&img).pixels() {
            assert!((v - 0.8).abs() < 1e-7);
        }

        // order is gamma → contrast → exposure
        let p = Perturbation::new(2.0, 1.5, -1.0).unwrap();
        let img = ImageBuf::from_pixels(1, 1, vec![0.8, 0.8, 0.8]).unwrap();
        let expect = ((0.8f64.powf(2.0) - 0.5) * 1.5 + 0.5) * 0.5;
        for v in p.apply_image(&img).pixels() {
            assert!((*v as f64 - expect).abs() < 1e-7);
        }
    }

    #[test]
    fn perturbation_rejects_invalid_parameters() {
        assert!(Perturbation::new(0.0, 1.0, 0.0).is_err());
        assert!(Perturbation::new(-1.0, 1.0, 0.0).is_err());
        assert!(Perturbation::new(1.0, 0.0, 0.0).is_err());
        assert!(Perturbation::new(1.0, -0.5, 0.0).is_err());
        assert!(Perturbation::new(f32::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn perturbation_sampling_is_deterministic() {
        let a = Perturbation::sample(1234, Intensity::Low);
        let b = Perturbation::sample(1234, Intensity::Low);
        assert_eq!(a, b);
        let c = Perturbation::sample(1235, Intensity::Low);
        assert_ne!(a, c);
    }

    #[test]
    fn low_intensity_ranges_hold() {
        for seed in 0..200 {
            let p = Perturbation::sample(seed, Intensity::Low);
            assert!((0.9..=1.1).contains(&p.gamma()), "gamma {}", p.gamma());
            assert!((0.9..=1.1).contains(&p.contrast()));
            assert!((-0.25..=0.25).contains(&p.exposure_stops()));
            assert!(p.has_noise());
        }
    }

    #[test]
    fn high_intensity_noise_is_bounded() {
        for seed in 0..50 {
            let p = Perturbation::sample(seed, Intensity::High);
            let field = p.noise_field.as_ref().unwrap();
            assert!(field.offsets.iter().all(|v| v.abs() <= NOISE_BOUND));
        }
    }

    #[test]
    fn invariant_validation_rejects_bad_data() {
        assert!(Lut3d::from_data(2, vec![0.0; 10]).is_err());
        assert!(Lut3d::from_data(2, vec![1.5; 24]).is_err());
        assert!(Lut3d::from_data(2, vec![f32::NAN; 24]).is_err());
        assert!(ImageBuf::from_pixels(2, 2, vec![0.0; 5]).is_err());
        assert!(ImageBuf::from_pixels(0, 2, vec![]).is_err());
    }
}
