//! JPEG-like 16×16 block compression: forward 2-D transform, keep the first
//! `r` coefficients in zigzag order, inverse transform. Quality is scored
//! with PSNR and SSIM.

use std::fmt;

use crate::error::{Error, Result};
use crate::fastalg::{apply_2d, inverse_2d};
use crate::kernels::OrthonormalTransform;
use crate::scalar::Real;
use crate::{Block, N};

/// Coefficients in a block.
pub const BLOCK_COEFFICIENTS: usize = N * N;

/// 8-bit grayscale image, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "degenerate image size {width}×{height}"
            )));
        }
        if samples.len() != width * height {
            return Err(Error::Shape(format!(
                "{} samples for a {width}×{height} image",
                samples.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            samples,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    fn check_blockable(&self) -> Result<()> {
        if !self.width.is_multiple_of(N) || !self.height.is_multiple_of(N) {
            return Err(Error::Shape(format!(
                "image size {}×{} is not a multiple of {N}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    fn blocks_x(&self) -> usize {
        self.width / N
    }

    fn blocks_y(&self) -> usize {
        self.height / N
    }

    fn read_block<T: Real>(&self, bx: usize, by: usize) -> Block<T> {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| T::lit(self.get(bx * N + j, by * N + i) as f64))
        })
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrayImage({}×{})", self.width, self.height)
    }
}

/// Scan order over a 16×16 coefficient grid as `(row, col)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigzagOrder {
    sequence: Vec<(usize, usize)>,
}

impl ZigzagOrder {
    pub fn sequence(&self) -> &[(usize, usize)] {
        &self.sequence
    }

    /// `mask[i][j]` is true for the first `r` positions of the scan.
    pub fn retention_mask(&self, r: usize) -> [[bool; N]; N] {
        let mut mask = [[false; N]; N];
        for &(i, j) in self.sequence.iter().take(r) {
            mask[i][j] = true;
        }
        mask
    }
}

/// JPEG's diagonal scan extended to 16×16: anti-diagonals in turn,
/// alternating direction, first step to `(0, 1)`.
pub fn zigzag_order_16() -> ZigzagOrder {
    let mut sequence = Vec::with_capacity(BLOCK_COEFFICIENTS);
    for d in 0..(2 * N - 1) {
        let lo = d.saturating_sub(N - 1);
        let hi = d.min(N - 1);
        if d % 2 == 1 {
            sequence.extend((lo..=hi).map(|i| (i, d - i)));
        } else {
            sequence.extend((lo..=hi).rev().map(|i| (i, d - i)));
        }
    }
    ZigzagOrder { sequence }
}

fn check_retained(r: usize) -> Result<()> {
    if !(1..=BLOCK_COEFFICIENTS).contains(&r) {
        return Err(Error::Domain(format!(
            "retained coefficient count {r} is outside [1, {BLOCK_COEFFICIENTS}]"
        )));
    }
    Ok(())
}

fn check_transform<T: Real>(transform: &OrthonormalTransform<T>) -> Result<()> {
    if transform.order() != N {
        return Err(Error::Shape(format!(
            "transform `{}` has order {}, block coding needs {N}",
            transform.name(),
            transform.order()
        )));
    }
    Ok(())
}

fn compress_masked<T: Real>(
    block: &Block<T>,
    transform: &OrthonormalTransform<T>,
    mask: &[[bool; N]; N],
) -> Block<T> {
    let mut coeffs = apply_2d(block, transform);
    for (row, keep) in coeffs.iter_mut().zip(mask) {
        for (c, &k) in row.iter_mut().zip(keep) {
            if !k {
                *c = T::zero();
            }
        }
    }
    inverse_2d(&coeffs, transform)
}

/// Transforms `block`, zeroes every coefficient after the first `r` in
/// zigzag order, and transforms back.
pub fn compress_block<T: Real>(
    block: &Block<T>,
    transform: &OrthonormalTransform<T>,
    r: usize,
) -> Result<Block<T>> {
    check_retained(r)?;
    check_transform(transform)?;
    Ok(compress_masked(
        block,
        transform,
        &zigzag_order_16().retention_mask(r),
    ))
}

/// PSNR in dB, or a marker for a perfect reconstruction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psnr {
    Lossless,
    Db(f64),
}

impl Psnr {
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Lossless => None,
            Psnr::Db(v) => Some(v),
        }
    }

    pub fn is_lossless(self) -> bool {
        self == Psnr::Lossless
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Lossless => f.write_str("inf"),
            Psnr::Db(v) => write!(f, "{v:.4}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompressionResult {
    pub reconstructed: GrayImage,
    pub r: usize,
    pub psnr: Psnr,
    pub ssim: f64,
}

fn to_pixel<T: Real>(v: T) -> u8 {
    // f64::round rounds half away from zero
    v.to_f64_lossy().round().clamp(0.0, 255.0) as u8
}

/// Compresses every disjoint 16×16 block of `image` independently, then
/// rounds and clamps the reconstruction to 8 bits.
pub fn compress_image<T: Real>(
    image: &GrayImage,
    transform: &OrthonormalTransform<T>,
    r: usize,
) -> Result<CompressionResult> {
    check_retained(r)?;
    check_transform(transform)?;
    image.check_blockable()?;

    let mask = zigzag_order_16().retention_mask(r);
    let mut out = vec![0u8; image.samples.len()];
    for by in 0..image.blocks_y() {
        for bx in 0..image.blocks_x() {
            let rec = compress_masked(&image.read_block::<T>(bx, by), transform, &mask);
            for (i, row) in rec.iter().enumerate() {
                let base = (by * N + i) * image.width + bx * N;
                for (j, &v) in row.iter().enumerate() {
                    out[base + j] = to_pixel(v);
                }
            }
        }
    }
    let reconstructed = GrayImage::new(image.width, image.height, out)?;
    let psnr = psnr(image, &reconstructed)?;
    let ssim = ssim(image, &reconstructed)?;
    Ok(CompressionResult {
        reconstructed,
        r,
        psnr,
        ssim,
    })
}

fn check_same_shape(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::Shape(format!(
            "image sizes differ: {}×{} vs {}×{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// `10·log₁₀(255² / MSE)`.
pub fn psnr(reference: &GrayImage, test: &GrayImage) -> Result<Psnr> {
    check_same_shape(reference, test)?;
    let sse: u64 = reference
        .samples
        .iter()
        .zip(&test.samples)
        .map(|(&a, &b)| {
            let d = a.abs_diff(b) as u64;
            d * d
        })
        .sum();
    if sse == 0 {
        return Ok(Psnr::Lossless);
    }
    let mse = sse as f64 / reference.samples.len() as f64;
    Ok(Psnr::Db(10.0 * (255.0f64 * 255.0 / mse).log10()))
}

/// SSIM window side.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_DYNAMIC_RANGE: f64 = 255.0;

/// Normalized 1-D Gaussian; the 2-D window is its outer product.
pub fn gaussian_kernel_1d() -> [f64; SSIM_WINDOW] {
    let c = (SSIM_WINDOW / 2) as f64;
    let mut k: [f64; SSIM_WINDOW] = std::array::from_fn(|i| {
        (-((i as f64 - c).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
    });
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable "valid" filtering of a `w×h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = row[x..x + SSIM_WINDOW]
                .iter()
                .zip(k)
                .map(|(a, b)| a * b)
                .sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..SSIM_WINDOW)
                .map(|t| horiz[(y + t) * ow + x] * k[t])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all fully contained 11×11 Gaussian windows (σ = 1.5),
/// `K₁ = 0.01`, `K₂ = 0.03`, `L = 255`.
pub fn ssim(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    check_same_shape(reference, test)?;
    let (w, h) = (reference.width, reference.height);
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::Shape(format!(
            "SSIM needs at least {SSIM_WINDOW}×{SSIM_WINDOW} pixels, got {w}×{h}"
        )));
    }
    let k = gaussian_kernel_1d();
    let x: Vec<f64> = reference.samples.iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = test.samples.iter().map(|&v| v as f64).collect();
    let prod = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).collect::<Vec<_>>();

    let mu_x = filter_valid(&x, w, h, &k);
    let mu_y = filter_valid(&y, w, h, &k);
    let xx = filter_valid(&prod(&x, &x), w, h, &k);
    let yy = filter_valid(&prod(&y, &y), w, h, &k);
    let xy = filter_valid(&prod(&x, &y), w, h, &k);

    let c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE).powi(2);
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let sxx = xx[i] - mx * mx;
            let syy = yy[i] - my * my;
            let sxy = xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * sxy + c2))
                / ((mx * mx + my * my + c1) * (sxx + syy + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}
