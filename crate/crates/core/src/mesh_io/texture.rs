use std::path::Path;

use super::MeshIoError;

pub type Rgb = [f64; 3];

/// RGBA8 image. Row 0 is the top of the image; texture coordinate `v = 0`
/// addresses the bottom row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextureImage {
    width: u32,
    height: u32,
    data: Vec<[u8; 4]>,
}

impl TextureImage {
    /// Image filled with `fill`. Zero dimensions are bumped to one texel.
    pub fn new(width: u32, height: u32, fill: [u8; 4]) -> Self {
        let (width, height) = (width.max(1), height.max(1));
        Self {
            width,
            height,
            data: vec![fill; (width * height) as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [u8; 4]) -> Self {
        let mut img = Self::new(width, height, [0; 4]);
        for y in 0..img.height {
            for x in 0..img.width {
                img.data[(y * img.width + x) as usize] = f(x, y);
            }
        }
        img
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 4]] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 4] {
        self.data[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, px: [u8; 4]) {
        self.data[(y * self.width + x) as usize] = px;
    }

    /// Texture coordinate of the center of texel `(x, y)`.
    pub fn texel_center_uv(&self, x: f64, y: f64) -> [f64; 2] {
        [
            (x + 0.5) / self.width as f64,
            1.0 - (y + 0.5) / self.height as f64,
        ]
    }

    pub fn load(path: &Path) -> Result<Self, MeshIoError> {
        let img = image::open(path)
            .map_err(|source| MeshIoError::Image {
                path: path.to_path_buf(),
                source,
            })?
            .to_rgba8();
        let (width, height) = img.dimensions();
        if width == 0 || height == 0 {
            return Err(MeshIoError::EmptyImage(path.to_path_buf()));
        }
        let data = img.pixels().map(|p| p.0).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn save_png(&self, path: &Path) -> Result<(), MeshIoError> {
        let raw: Vec<u8> = self.data.iter().flatten().copied().collect();
        let buf = image::RgbaImage::from_raw(self.width, self.height, raw)
            .expect("buffer matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| MeshIoError::Image {
                path: path.to_path_buf(),
                source,
            })
    }
}

/// Bilinear lookup with repeat wrapping; texel centers sit at
/// `((i + 0.5) / W, 1 - (j + 0.5) / H)`.
pub fn sample_texture(img: &TextureImage, uv: [f64; 2]) -> Rgb {
    let (w, h) = (img.width as i64, img.height as i64);
    let x = uv[0] * w as f64 - 0.5;
    let y = (1.0 - uv[1]) * h as f64 - 0.5;
    if !x.is_finite() || !y.is_finite() {
        return [0.0; 3];
    }
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as i64, y0 as i64);
    let texel = |xi: i64, yi: i64| {
        let px = img.get(xi.rem_euclid(w) as u32, yi.rem_euclid(h) as u32);
        [px[0] as f64, px[1] as f64, px[2] as f64]
    };
    let (c00, c10, c01, c11) = (
        texel(x0, y0),
        texel(x0 + 1, y0),
        texel(x0, y0 + 1),
        texel(x0 + 1, y0 + 1),
    );
    let mut out = [0.0; 3];
    for k in 0..3 {
        let top = c00[k] + (c10[k] - c00[k]) * fx;
        let bottom = c01[k] + (c11[k] - c01[k]) * fx;
        out[k] = (top + (bottom - top) * fy) / 255.0;
    }
    out
}

/// Quantizes a `[0, 1]` color to an opaque RGBA8 texel.
pub fn to_rgba8(c: Rgb) -> [u8; 4] {
    let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    [q(c[0]), q(c[1]), q(c[2]), 255]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_image() {
        let img = TextureImage::new(5, 3, [255, 0, 0, 255]);
        for uv in [[0.0, 0.0], [0.37, 0.91], [-3.2, 7.5]] {
            assert_eq!(sample_texture(&img, uv), [1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn two_texel_ramp() {
        let img =
            TextureImage::from_fn(2, 1, |x, _| if x == 0 { [0, 0, 0, 255] } else { [255; 4] });
        assert_eq!(sample_texture(&img, [0.25, 0.5]), [0.0; 3]);
        assert_eq!(sample_texture(&img, [0.75, 0.5]), [1.0; 3]);
        assert_eq!(sample_texture(&img, [0.5, 0.5]), [0.5; 3]);
    }

    #[test]
    fn texel_centers_read_exactly() {
        let img = TextureImage::from_fn(7, 4, |x, y| [(x * 30) as u8, (y * 60) as u8, 7, 255]);
        for y in 0..4 {
            for x in 0..7 {
                let c = sample_texture(&img, img.texel_center_uv(x as f64, y as f64));
                let px = img.get(x, y);
                assert_eq!(to_rgba8(c), [px[0], px[1], px[2], 255]);
            }
        }
    }

    #[test]
    fn continuous_away_from_seams() {
        let img = TextureImage::from_fn(16, 16, |x, y| {
            [
                (x * 13 % 256) as u8,
                (y * 7) as u8,
                ((x + y) * 5) as u8,
                255,
            ]
        });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let uv = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)];
            let a = sample_texture(&img, uv);
            let b = sample_texture(&img, [uv[0] + 1e-7, uv[1] - 1e-7]);
            for k in 0..3 {
                // Max slope is one full 255 step per texel: 16 texels per unit.
                assert!((a[k] - b[k]).abs() <= 16.0 * 2e-7 + 1e-12);
            }
        }
    }
}
