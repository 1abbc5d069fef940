//! Binary PGM I/O and corpus-wide sweeps over the retained-coefficient
//! count, with absolute percentage error against the exact DCT.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::codec::{compress_image, GrayImage};
use crate::error::{Error, Result};
use crate::kernels::{build_dct, OrthonormalTransform};
use crate::metrics::format_significant;
use crate::scalar::Real;

fn pgm_error(path: &Path, message: impl Into<String>) -> Error {
    Error::PgmFormat {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Decodes a binary (P5) 8-bit PGM. `path` is only used in error messages.
pub fn parse_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(pgm_error(path, "not a binary PGM (expected magic P5)"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (k, field) in fields.iter_mut().enumerate() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(pgm_error(path, format!("missing header field {}", k + 1)));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| pgm_error(path, "header value out of range"))?;
    }
    let [width, height, maxval] = fields;
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(pgm_error(
            path,
            "header must end with a single whitespace byte",
        ));
    }
    pos += 1;
    if maxval != 255 {
        return Err(pgm_error(
            path,
            format!("maxval {maxval} unsupported, only 255"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(pgm_error(path, format!("zero-size image {width}×{height}")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| pgm_error(path, "image dimensions overflow"))?;
    let data = bytes.get(pos..pos + count).ok_or_else(|| {
        pgm_error(
            path,
            format!(
                "truncated: expected {count} samples, found {}",
                bytes.len() - pos
            ),
        )
    })?;
    GrayImage::new(width, height, data.to_vec())
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes, path)
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.samples());
    out
}

pub fn write_pgm(image: &GrayImage, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

/// Corpus averages for one transform at one retained-coefficient count.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub transform: String,
    pub r: usize,
    /// Mean over images with a lossy reconstruction; `inf` if none was lossy.
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    pub ape_psnr: f64,
    pub ape_ssim: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    pub results: Vec<SweepResult>,
    /// Images that contributed, in averaging order.
    pub images: Vec<PathBuf>,
    /// Files that could not be used, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

/// Absolute percentage error of `value` relative to `baseline`.
pub fn ape(value: f64, baseline: f64) -> f64 {
    if value == baseline {
        0.0
    } else if baseline.is_infinite() {
        f64::INFINITY
    } else {
        (value - baseline).abs() / baseline.abs() * 100.0
    }
}

fn list_pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Per-image `(psnr, ssim)` for every `r` in the grid.
type Scores = Vec<(Option<f64>, f64)>;

fn score<T: Real>(
    image: &GrayImage,
    transform: &OrthonormalTransform<T>,
    r_grid: &[usize],
) -> Result<Scores> {
    r_grid
        .iter()
        .map(|&r| compress_image(image, transform, r).map(|c| (c.psnr.db(), c.ssim)))
        .collect()
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Compresses every PGM in `corpus_dir` with each transform at each `r`
/// and averages PSNR/SSIM over images. Unreadable or non-16-divisible files
/// are skipped and reported in [`SweepOutcome::skipped`].
pub fn sweep<T: Real>(
    corpus_dir: &Path,
    transforms: &[OrthonormalTransform<T>],
    r_grid: &[usize],
) -> Result<SweepOutcome> {
    let files = list_pgm_files(corpus_dir)?;
    let dct = build_dct::<T>(crate::N)?;
    // the exact DCT is always scored, reusing a matching candidate if present
    let baseline_idx = transforms.iter().position(|t| t.matrix() == dct.matrix());
    let mut work: Vec<&OrthonormalTransform<T>> = transforms.iter().collect();
    let baseline_idx = baseline_idx.unwrap_or_else(|| {
        work.push(&dct);
        work.len() - 1
    });

    let per_file: Vec<(PathBuf, Result<Vec<Scores>>)> = files
        .into_par_iter()
        .map(|path| {
            let scored = read_pgm(&path)
                .and_then(|img| work.iter().map(|t| score(&img, t, r_grid)).collect());
            (path, scored)
        })
        .collect();

    let mut outcome = SweepOutcome::default();
    let mut scores = Vec::new();
    for (path, res) in per_file {
        match res {
            Ok(s) => {
                outcome.images.push(path);
                scores.push(s);
            }
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                outcome.skipped.push((path, e.to_string()));
            }
        }
    }
    if scores.is_empty() {
        return Err(Error::EmptyCorpus(corpus_dir.to_path_buf()));
    }

    let means = |t: usize, k: usize| {
        let psnr = mean(scores.iter().filter_map(|s| s[t][k].0)).unwrap_or(f64::INFINITY);
        let ssim = mean(scores.iter().map(|s| s[t][k].1)).expect("non-empty corpus");
        (psnr, ssim)
    };

    for (t, transform) in transforms.iter().enumerate() {
        for (k, &r) in r_grid.iter().enumerate() {
            let (mean_psnr, mean_ssim) = means(t, k);
            let (base_psnr, base_ssim) = means(baseline_idx, k);
            outcome.results.push(SweepResult {
                transform: transform.name().to_owned(),
                r,
                mean_psnr,
                mean_ssim,
                ape_psnr: ape(mean_psnr, base_psnr),
                ape_ssim: ape(mean_ssim, base_ssim),
            });
        }
    }
    Ok(outcome)
}

/// Renders results as CSV sorted by `(transform, r)`.
pub fn format_csv(results: &[SweepResult]) -> String {
    let mut rows: Vec<&SweepResult> = results.iter().collect();
    rows.sort_by(|a, b| a.transform.cmp(&b.transform).then(a.r.cmp(&b.r)));
    let mut out = String::from("transform,r,mean_psnr,mean_ssim,ape_psnr,ape_ssim\n");
    for s in rows {
        let f = |v: f64| format_significant(v, 6);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.transform,
            s.r,
            f(s.mean_psnr),
            f(s.mean_ssim),
            f(s.ape_psnr),
            f(s.ape_ssim)
        ));
    }
    out
}

pub fn emit_csv(results: &[SweepResult], path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(format_csv(results).as_bytes())
        .map_err(|e| Error::io(path, e))
}
