//! Per-frame pixel kernels on RGB8 buffers.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::frame::Frame;

fn rebuild(src: &Frame, data: Vec<u8>) -> Frame {
    Frame::new(src.width(), src.height(), data).expect("kernel preserves buffer size")
}

fn map_pixels(src: &Frame, f: impl Fn([u8; 3]) -> [u8; 3]) -> Frame {
    let data = src
        .data()
        .chunks_exact(3)
        .flat_map(|p| f([p[0], p[1], p[2]]))
        .collect();
    rebuild(src, data)
}

fn luma(p: [u8; 3]) -> f32 {
    0.299 * p[0] as f32 + 0.587 * p[1] as f32 + 0.114 * p[2] as f32
}

fn clamp_u8(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn channel_swap(src: &Frame) -> Frame {
    map_pixels(src, |[r, g, b]| [b, g, r])
}

pub fn invert(src: &Frame) -> Frame {
    map_pixels(src, |[r, g, b]| [255 - r, 255 - g, 255 - b])
}

pub fn grayscale(src: &Frame) -> Frame {
    map_pixels(src, |p| {
        let y = clamp_u8(luma(p));
        [y, y, y]
    })
}

/// Scales chroma around luma by `factor`.
pub fn saturate(src: &Frame, factor: f64) -> Frame {
    let s = factor as f32;
    map_pixels(src, |p| {
        let y = luma(p);
        p.map(|c| clamp_u8(y + s * (c as f32 - y)))
    })
}

/// Additive zero-mean Gaussian noise, clamped.
pub fn noise<R: Rng + ?Sized>(src: &Frame, sigma: f64, rng: &mut R) -> Frame {
    let normal = Normal::new(0.0f32, sigma as f32).expect("sigma validated positive");
    let data = src
        .data()
        .iter()
        .map(|&c| clamp_u8(c as f32 + normal.sample(rng)))
        .collect();
    rebuild(src, data)
}

/// 180 degree rotation: `(x, y) -> (W-1-x, H-1-y)`.
pub fn rotate_180(src: &Frame) -> Frame {
    // reversing pixel order is exactly the point reflection
    let mut data = Vec::with_capacity(src.data().len());
    for p in src.data().chunks_exact(3).rev() {
        data.extend_from_slice(p);
    }
    rebuild(src, data)
}

/// Horizontal mirror: `(x, y) -> (W-1-x, y)`.
pub fn mirror(src: &Frame) -> Frame {
    let row = src.width() as usize * 3;
    let mut data = Vec::with_capacity(src.data().len());
    for line in src.data().chunks_exact(row) {
        for p in line.chunks_exact(3).rev() {
            data.extend_from_slice(p);
        }
    }
    rebuild(src, data)
}

/// Separable Gaussian blur with half-width `radius` and sigma `radius / 2`.
pub fn blur(src: &Frame, radius: u32) -> Frame {
    let r = radius as i64;
    let sigma = (radius as f32 / 2.0).max(0.5);
    let mut kernel: Vec<f32> = (-r..=r)
        .map(|i| (-(i * i) as f32 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f32 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (w, h) = (src.width() as i64, src.height() as i64);
    let input: Vec<f32> = src.data().iter().map(|&c| c as f32).collect();
    let mut tmp = vec![0f32; input.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0f32; 3];
            for (k, wgt) in kernel.iter().enumerate() {
                let sx = (x + k as i64 - r).clamp(0, w - 1);
                let i = ((y * w + sx) * 3) as usize;
                for c in 0..3 {
                    acc[c] += wgt * input[i + c];
                }
            }
            let o = ((y * w + x) * 3) as usize;
            tmp[o..o + 3].copy_from_slice(&acc);
        }
    }
    let mut data = vec![0u8; input.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0f32; 3];
            for (k, wgt) in kernel.iter().enumerate() {
                let sy = (y + k as i64 - r).clamp(0, h - 1);
                let i = ((sy * w + x) * 3) as usize;
                for c in 0..3 {
                    acc[c] += wgt * tmp[i + c];
                }
            }
            let o = ((y * w + x) * 3) as usize;
            for c in 0..3 {
                data[o + c] = clamp_u8(acc[c]);
            }
        }
    }
    rebuild(src, data)
}

/// Bilinear sample at continuous pixel coordinates, clamped to the edge.
fn sample_bilinear(src: &Frame, sx: f32, sy: f32) -> [u8; 3] {
    let (w, h) = (src.width() as i64, src.height() as i64);
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let px = |x: i64, y: i64| {
        let x = x.clamp(0, w - 1);
        let y = y.clamp(0, h - 1);
        let i = ((y * w + x) * 3) as usize;
        let d = src.data();
        [d[i] as f32, d[i + 1] as f32, d[i + 2] as f32]
    };
    let (x0, y0) = (x0 as i64, y0 as i64);
    let (a, b, c, d) = (px(x0, y0), px(x0 + 1, y0), px(x0, y0 + 1), px(x0 + 1, y0 + 1));
    let mut out = [0u8; 3];
    for k in 0..3 {
        let top = a[k] + (b[k] - a[k]) * fx;
        let bot = c[k] + (d[k] - c[k]) * fx;
        out[k] = clamp_u8(top + (bot - top) * fy);
    }
    out
}

/// Center crop to `1 / factor` of each side, upscaled back bilinearly.
pub fn zoom_in(src: &Frame, factor: f64) -> Frame {
    let (w, h) = (src.width() as f32, src.height() as f32);
    let f = (factor as f32).max(1.0);
    let (cw, ch) = (w / f, h / f);
    let (ox, oy) = ((w - cw) / 2.0, (h - ch) / 2.0);
    let mut data = Vec::with_capacity(src.data().len());
    for y in 0..src.height() {
        for x in 0..src.width() {
            let sx = ox + (x as f32 + 0.5) * cw / w - 0.5;
            let sy = oy + (y as f32 + 0.5) * ch / h - 0.5;
            data.extend_from_slice(&sample_bilinear(src, sx, sy));
        }
    }
    rebuild(src, data)
}

/// Scales the frame by `factor` (< 1), centered on a black canvas.
pub fn zoom_out(src: &Frame, factor: f64) -> Frame {
    let (w, h) = (src.width(), src.height());
    let f = factor.min(1.0);
    let iw = ((w as f64 * f).round() as u32).max(1);
    let ih = ((h as f64 * f).round() as u32).max(1);
    let (x0, y0) = ((w - iw) / 2, (h - ih) / 2);
    let mut data = vec![0u8; src.data().len()];
    for y in 0..ih {
        for x in 0..iw {
            let sx = (x as f32 + 0.5) * w as f32 / iw as f32 - 0.5;
            let sy = (y as f32 + 0.5) * h as f32 / ih as f32 - 0.5;
            let o = (((y0 + y) * w + x0 + x) * 3) as usize;
            data[o..o + 3].copy_from_slice(&sample_bilinear(src, sx, sy));
        }
    }
    rebuild(src, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gradient(w: u32, h: u32) -> Frame {
        let mut data = Vec::new();
        for y in 0..h {
            for x in 0..w {
                data.extend_from_slice(&[(x * 20) as u8, (y * 30) as u8, ((x + y) * 5) as u8]);
            }
        }
        Frame::new(w, h, data).unwrap()
    }

    #[test]
    fn rotate_maps_coordinates() {
        let f = gradient(5, 4);
        let r = rotate_180(&f);
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(r.pixel(4 - x, 3 - y), f.pixel(x, y));
            }
        }
    }

    #[test]
    fn mirror_maps_coordinates() {
        let f = gradient(5, 4);
        let m = mirror(&f);
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(m.pixel(4 - x, y), f.pixel(x, y));
            }
        }
    }

    #[test]
    fn channel_swap_swaps_red_blue() {
        let f = Frame::filled(2, 2, [10, 20, 30]);
        assert_eq!(channel_swap(&f).pixel(1, 1), [30, 20, 10]);
    }

    #[test]
    fn grayscale_and_invert() {
        let f = gradient(6, 6);
        assert!(grayscale(&f).data().chunks(3).all(|p| p[0] == p[1] && p[1] == p[2]));
        let inv = invert(&f);
        assert!(inv.data().iter().zip(f.data()).all(|(a, b)| *a == 255 - *b));
    }

    #[test]
    fn saturation_leaves_gray_alone() {
        let f = Frame::filled(3, 3, [128, 128, 128]);
        assert_eq!(saturate(&f, 2.0), f);
        let c = saturate(&Frame::filled(1, 1, [200, 100, 100]), 2.0);
        assert!(c.pixel(0, 0)[0] > 200);
    }

    #[test]
    fn blur_flat_is_flat() {
        let f = Frame::filled(9, 7, [50, 60, 70]);
        assert_eq!(blur(&f, 4), f);
        let g = gradient(12, 12);
        assert_ne!(blur(&g, 2), g);
    }

    #[test]
    fn noise_reproducible() {
        let f = gradient(8, 8);
        let a = noise(&f, 25.0, &mut ChaCha8Rng::seed_from_u64(4));
        let b = noise(&f, 25.0, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        assert_ne!(a, f);
    }

    #[test]
    fn zoom_out_pads_black() {
        let f = Frame::filled(8, 8, [255, 255, 255]);
        let z = zoom_out(&f, 0.5);
        assert_eq!(z.pixel(0, 0), [0, 0, 0]);
        assert_eq!(z.pixel(7, 7), [0, 0, 0]);
        assert_eq!(z.pixel(3, 3), [255, 255, 255]);
        assert_eq!(z.pixel(2, 2), [255, 255, 255]);
        assert_eq!(z.pixel(5, 5), [255, 255, 255]);
        assert_eq!(z.pixel(6, 5), [0, 0, 0]);
    }

    #[test]
    fn zoom_in_magnifies_center() {
        // left half red, right half blue; zooming in keeps the split at the center
        let mut data = Vec::new();
        for _y in 0..8 {
            for x in 0..8 {
                data.extend_from_slice(if x < 4 { &[255, 0, 0] } else { &[0, 0, 255] });
            }
        }
        let f = Frame::new(8, 8, data).unwrap();
        let z = zoom_in(&f, 2.0);
        assert_eq!(z.pixel(0, 4), [255, 0, 0]);
        assert_eq!(z.pixel(7, 4), [0, 0, 255]);
    }
}
