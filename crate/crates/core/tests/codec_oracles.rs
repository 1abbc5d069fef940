use mldct::codec::{
    compress_block, compress_image, gaussian_kernel_1d, psnr, ssim, GrayImage, Psnr,
};
use mldct::kernels::{build_c_hat, build_dct, build_wht};
use mldct::{Block, Matrix, Transform, N};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.random()).unwrap()
}

/// Smooth-ish content so that energy compaction is meaningful.
fn gradient_image(w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        let v = 128.0
            + 60.0 * ((x as f64) / 9.0).sin()
            + 40.0 * ((y as f64) / 13.0).cos()
            + ((x * y) % 7) as f64;
        v.clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

/// Straight-line reference: dense products, scan order by (diagonal, then
/// row for odd diagonals or column for even ones), mask, dense inverse.
fn reference_compress(block: &Block<f64>, c: &Transform, r: usize) -> Matrix {
    let a = Matrix::from_fn(N, |i, j| block[i][j]);
    let m = c.matrix();
    let b = m.matmul(&a).matmul(&m.transpose());
    let mut cells: Vec<(usize, usize)> = (0..N).flat_map(|i| (0..N).map(move |j| (i, j))).collect();
    cells.sort_by_key(|&(i, j)| {
        let d = i + j;
        (d, if d % 2 == 1 { i } else { j })
    });
    let mut masked = Matrix::zeros(N);
    for &(i, j) in &cells[..r] {
        masked[(i, j)] = b[(i, j)];
    }
    m.transpose().matmul(&masked).matmul(m)
}

/// Per-window SSIM with explicit 2-D weights and centred moments.
fn reference_ssim(a: &GrayImage, b: &GrayImage) -> f64 {
    let g = gaussian_kernel_1d();
    let win = g.len();
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let mut total = 0.0;
    let mut count = 0;
    for y0 in 0..=a.height() - win {
        for x0 in 0..=a.width() - win {
            let (mut mx, mut my) = (0.0, 0.0);
            for dy in 0..win {
                for dx in 0..win {
                    let w = g[dy] * g[dx];
                    mx += w * a.get(x0 + dx, y0 + dy) as f64;
                    my += w * b.get(x0 + dx, y0 + dy) as f64;
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for dy in 0..win {
                for dx in 0..win {
                    let w = g[dy] * g[dx];
                    let p = a.get(x0 + dx, y0 + dy) as f64 - mx;
                    let q = b.get(x0 + dx, y0 + dy) as f64 - my;
                    vx += w * p * p;
                    vy += w * q * q;
                    cxy += w * p * q;
                }
            }
            total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    total / count as f64
}

#[test]
fn gaussian_window_is_normalized_and_symmetric() {
    let g = gaussian_kernel_1d();
    assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    for i in 0..g.len() {
        assert_eq!(g[i], g[g.len() - 1 - i]);
    }
}

#[test]
fn ssim_matches_straight_line_reference() {
    let a = gradient_image(32, 32);
    let b = random_image(3, 32, 32);
    let mixed = GrayImage::new(
        32,
        32,
        a.samples()
            .iter()
            .zip(b.samples())
            .map(|(&p, &q)| ((p as u16 * 3 + q as u16) / 4) as u8)
            .collect(),
    )
    .unwrap();
    for (x, y) in [(&a, &b), (&a, &mixed), (&b, &mixed)] {
        let got = ssim(x, y).unwrap();
        let want = reference_ssim(x, y);
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn block_matches_reference_at_r16() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for c in [
        build_c_hat::<f64>(),
        build_dct::<f64>(N).unwrap(),
        build_wht::<f64>(),
    ] {
        for r in [1, 3, 16, 100, 255] {
            let block: Block<f64> =
                std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(0.0..255.0)));
            let fast = compress_block(&block, &c, r).unwrap();
            let slow = reference_compress(&block, &c, r);
            for i in 0..N {
                for j in 0..N {
                    assert!(
                        (fast[i][j] - slow[(i, j)]).abs() < 1e-9,
                        "{} r={r}",
                        c.name()
                    );
                }
            }
        }
    }
}

#[test]
fn full_retention_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let block: Block<f64> =
        std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-255.0..255.0)));
    let out = compress_block(&block, &build_c_hat::<f64>(), 256).unwrap();
    for i in 0..N {
        for j in 0..N {
            assert!((out[i][j] - block[i][j]).abs() < 1e-9);
        }
    }
}

#[test]
fn r256_is_lossless_for_every_builtin_transform() {
    for seed in 0..3 {
        let img = random_image(seed, 64, 48);
        for c in [
            build_c_hat::<f64>(),
            build_dct::<f64>(N).unwrap(),
            build_wht::<f64>(),
        ] {
            let res = compress_image(&img, &c, 256).unwrap();
            assert_eq!(res.reconstructed, img);
            assert_eq!(res.psnr, Psnr::Lossless);
            assert!((res.ssim - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn constant_image_is_lossless_under_dct_at_any_r() {
    let img = GrayImage::new(32, 32, vec![93; 1024]).unwrap();
    let dct = build_dct::<f64>(N).unwrap();
    for r in [1, 2, 16, 200] {
        assert_eq!(compress_image(&img, &dct, r).unwrap().reconstructed, img);
    }
}

#[test]
fn block_order_does_not_matter() {
    let img = gradient_image(64, 32);
    // swap the block grid left-right
    let swapped = GrayImage::from_fn(64, 32, |x, y| img.get((x + 32) % 64, y)).unwrap();
    let c = build_c_hat::<f64>();
    let a = compress_image(&img, &c, 10).unwrap().reconstructed;
    let b = compress_image(&swapped, &c, 10).unwrap().reconstructed;
    let unswapped = GrayImage::from_fn(64, 32, |x, y| b.get((x + 32) % 64, y)).unwrap();
    assert_eq!(a, unswapped);
}

#[test]
fn psnr_and_ssim_improve_with_r_under_dct() {
    let img = gradient_image(64, 64);
    let dct = build_dct::<f64>(N).unwrap();
    let mut last = (0.0, -1.0);
    for r in [1, 2, 4, 8, 16, 32, 64, 128] {
        let res = compress_image(&img, &dct, r).unwrap();
        let p = res.psnr.db().unwrap_or(f64::INFINITY);
        assert!(p >= last.0 - 1e-9, "r={r}: {p} < {}", last.0);
        last = (p, res.ssim);
    }
}

#[test]
fn psnr_of_reconstruction_matches_definition() {
    let img = random_image(9, 32, 32);
    let res = compress_image(&img, &build_c_hat::<f64>(), 16).unwrap();
    let sse: f64 = img
        .samples()
        .iter()
        .zip(res.reconstructed.samples())
        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
        .sum();
    let want = 10.0 * (65025.0 / (sse / 1024.0)).log10();
    assert!((res.psnr.db().unwrap() - want).abs() < 1e-12);
    assert_eq!(res.psnr, psnr(&img, &res.reconstructed).unwrap());
}
