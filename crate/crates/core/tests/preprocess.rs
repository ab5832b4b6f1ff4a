use posewire::preprocess::{blur_background, gaussian_blur, BinaryMask, RasterImage};
use proptest::prelude::*;

/// Full 2D convolution with a directly evaluated 2D Gaussian, clamp-to-edge.
fn direct_blur(img: &RasterImage, sigma: f64) -> Vec<u8> {
    let r = (3.0 * sigma).ceil() as isize;
    let mut weights = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            weights.push((dx, dy, (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp()));
        }
    }
    let total: f64 = weights.iter().map(|w| w.2).sum();
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            for c in 0..img.channels() as usize {
                let acc: f64 = weights
                    .iter()
                    .map(|&(dx, dy, wt)| {
                        let sx = (x + dx).clamp(0, w - 1) as usize;
                        let sy = (y + dy).clamp(0, h - 1) as usize;
                        wt * img.get(sx, sy, c) as f64
                    })
                    .sum();
                out.push((acc / total).round() as u8);
            }
        }
    }
    out
}

#[test]
fn separable_matches_direct_on_impulse() {
    for sigma in [1.0, 2.0, 3.5] {
        let mut img = RasterImage::filled(31, 31, 1, 0).unwrap();
        img.set(15, 15, 0, 255);
        let fast = gaussian_blur(&img, sigma).unwrap();
        let slow = direct_blur(&img, sigma);
        for (a, b) in fast.pixels().iter().zip(&slow) {
            assert!((*a as i32 - *b as i32).abs() <= 1, "sigma {sigma}: {a} vs {b}");
        }
        assert!(fast.get(15, 15, 0) < 255);
    }
}

#[test]
fn separable_matches_direct_on_rgb_texture() {
    let px: Vec<u8> = (0..24 * 18 * 3).map(|i| ((i * 37) % 251) as u8).collect();
    let img = RasterImage::new(24, 18, 3, px).unwrap();
    let fast = gaussian_blur(&img, 1.7).unwrap();
    let slow = direct_blur(&img, 1.7);
    assert!(fast.pixels().iter().zip(&slow).all(|(a, b)| (*a as i32 - *b as i32).abs() <= 1));
}

#[test]
fn vertical_split_composites_pixelwise() {
    let px: Vec<u8> = (0..40 * 30 * 3).map(|i| ((i * 91 + i / 7) % 256) as u8).collect();
    let img = RasterImage::new(40, 30, 3, px).unwrap();
    let mask = BinaryMask::from_fn(40, 30, |x, _| x < 20);
    let out = blur_background(&img, &mask, 3.0, None).unwrap();
    let blurred = gaussian_blur(&img, 3.0).unwrap();
    for y in 0..30 {
        for x in 0..40 {
            for c in 0..3 {
                let want = if x < 20 { img.get(x, y, c) } else { blurred.get(x, y, c) };
                assert_eq!(out.get(x, y, c), want, "({x},{y},{c})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn blur_stays_within_input_range(
        w in 1usize..20,
        h in 1usize..20,
        sigma in 0.3f64..5.0,
        seed in any::<u64>(),
    ) {
        let px: Vec<u8> = (0..w * h).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 56) as u8).collect();
        let img = RasterImage::new(w, h, 1, px).unwrap();
        let lo = *img.pixels().iter().min().unwrap();
        let hi = *img.pixels().iter().max().unwrap();
        let out = gaussian_blur(&img, sigma).unwrap();
        prop_assert_eq!((out.width(), out.height(), out.channels()), (w, h, 1));
        for p in out.pixels() {
            prop_assert!(*p as i32 >= lo as i32 - 1 && *p as i32 <= hi as i32 + 1);
        }
    }

    #[test]
    fn foreground_is_untouched(
        w in 2usize..24,
        h in 2usize..24,
        seed in any::<u64>(),
        sigma in 0.5f64..4.0,
    ) {
        let px: Vec<u8> = (0..w * h * 3).map(|i| (seed.rotate_left(i as u32 % 64) >> 24) as u8).collect();
        let img = RasterImage::new(w, h, 3, px).unwrap();
        let mask = BinaryMask::from_fn(w, h, |x, y| (x * 7 + y * 3 + seed as usize) % 5 < 2);
        let out = blur_background(&img, &mask, sigma, None).unwrap();
        for y in 0..h {
            for x in 0..w {
                if mask.get(x, y) {
                    for c in 0..3 {
                        prop_assert_eq!(out.get(x, y, c), img.get(x, y, c));
                    }
                }
            }
        }
    }
}
