use rayon::prelude::*;
use thiserror::Error;

use super::sampling::{grid_weights, samples_per_face, SurfaceSample};
use crate::mesh_io::{to_rgba8, TextureImage, Uv};

/// Texel value outside every chart footprint.
pub const CLEAR_COLOR: [u8; 4] = [0, 0, 0, 0];

#[derive(Debug, Error, PartialEq)]
pub enum AtlasError {
    #[error("{faces} charts of {footprint} texels need an atlas larger than {max}")]
    TooLarge {
        faces: usize,
        footprint: u32,
        max: u32,
    },
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
}

/// Per-face right-triangle charts on a square grid of footprints.
///
/// Chart `k` covers texels `(ox + i, oy + j)` with `i + j ≤ r`; its gutter is
/// the rest of the `(r + 1 + 2g)²` footprint around it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtlasLayout {
    pub samples_per_edge: u32,
    pub gutter: u32,
    pub size: u32,
    pub charts: usize,
}

impl AtlasLayout {
    pub fn footprint(&self) -> u32 {
        self.samples_per_edge + 1 + 2 * self.gutter
    }

    fn per_row(&self) -> u32 {
        self.size / self.footprint()
    }

    /// Smallest power-of-two square atlas holding `charts` footprints.
    pub fn pack(charts: usize, r: u32, gutter: u32, max_size: u32) -> Result<Self, AtlasError> {
        let mut layout = Self {
            samples_per_edge: r,
            gutter,
            size: 1,
            charts,
        };
        let fp = layout.footprint();
        while (layout.per_row() as usize).pow(2) < charts.max(1) {
            if layout.size >= max_size {
                return Err(AtlasError::TooLarge {
                    faces: charts,
                    footprint: fp,
                    max: max_size,
                });
            }
            layout.size *= 2;
        }
        Ok(layout)
    }

    /// Top-left texel of chart `k`'s footprint.
    pub fn footprint_origin(&self, k: usize) -> [u32; 2] {
        let n = self.per_row() as usize;
        let fp = self.footprint();
        [(k % n) as u32 * fp, (k / n) as u32 * fp]
    }

    /// Texel of the chart corner with weights `(1, 0, 0)`.
    pub fn chart_origin(&self, k: usize) -> [u32; 2] {
        let [x, y] = self.footprint_origin(k);
        [x + self.gutter, y + self.gutter]
    }

    /// Corner UVs of chart `k`: texel centers of `(ox, oy)`, `(ox + r, oy)`
    /// and `(ox, oy + r)`.
    pub fn chart_uvs(&self, k: usize) -> [Uv; 3] {
        let [ox, oy] = self.chart_origin(k);
        let r = self.samples_per_edge;
        let s = self.size as f64;
        let uv = |x: u32, y: u32| [(x as f64 + 0.5) / s, 1.0 - (y as f64 + 0.5) / s];
        [uv(ox, oy), uv(ox + r, oy), uv(ox, oy + r)]
    }

    /// Whether footprint-relative texel `(dx, dy)` belongs to the chart.
    pub fn in_chart(&self, dx: i64, dy: i64) -> bool {
        let r = self.samples_per_edge as i64;
        dx >= 0 && dy >= 0 && dx + dy <= r
    }
}

/// For each footprint texel, the grid index of the nearest chart texel;
/// ties go to the lower index.
fn dilation_table(layout: &AtlasLayout) -> Vec<usize> {
    let fp = layout.footprint() as i64;
    let g = layout.gutter as i64;
    let grid = grid_weights(layout.samples_per_edge);
    let mut table = Vec::with_capacity((fp * fp) as usize);
    for y in 0..fp {
        for x in 0..fp {
            let (dx, dy) = (x - g, y - g);
            let best = grid
                .iter()
                .enumerate()
                .map(|(k, (_, [i, j]))| (((dx - *i as i64).pow(2) + (dy - *j as i64).pow(2)), k))
                .min()
                .unwrap()
                .1;
            table.push(best);
        }
    }
    table
}

/// Writes resolved samples into a fresh atlas. `samples` holds
/// `(r+1)(r+2)/2` consecutive samples per chart in grid order; returns the
/// image and the per-chart corner UVs.
pub fn bake_atlas(
    samples: &[SurfaceSample],
    charts: usize,
    r: u32,
    gutter: u32,
    max_size: u32,
) -> Result<(AtlasLayout, TextureImage, Vec<[Uv; 3]>), AtlasError> {
    let n = samples_per_face(r);
    if samples.len() != charts * n {
        return Err(AtlasError::SampleCount {
            expected: charts * n,
            got: samples.len(),
        });
    }
    let layout = AtlasLayout::pack(charts, r, gutter, max_size)?;
    let table = dilation_table(&layout);
    let fp = layout.footprint();

    // Footprint texels per chart, computed in parallel, then blitted.
    let blocks: Vec<Vec<[u8; 4]>> = (0..charts)
        .into_par_iter()
        .map(|k| {
            let colors: Vec<[u8; 4]> = samples[k * n..(k + 1) * n]
                .iter()
                .map(|s| to_rgba8(s.color))
                .collect();
            table.iter().map(|&t| colors[t]).collect()
        })
        .collect();
    let mut img = TextureImage::new(layout.size, layout.size, CLEAR_COLOR);
    for (k, block) in blocks.iter().enumerate() {
        let [x0, y0] = layout.footprint_origin(k);
        for y in 0..fp {
            for x in 0..fp {
                img.set(x0 + x, y0 + y, block[(y * fp + x) as usize]);
            }
        }
    }
    let uvs = (0..charts).map(|k| layout.chart_uvs(k)).collect();
    Ok((layout, img, uvs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::mesh_io::sample_texture;
    use crate::texture_transfer::sampling::Host;

    fn colored(n: usize, f: impl Fn(usize) -> [f64; 3]) -> Vec<SurfaceSample> {
        (0..n)
            .map(|k| SurfaceSample {
                owner: 0,
                owner_bary: [1.0, 0.0, 0.0],
                position: Point3::origin(),
                host: Host::Face(0),
                host_bary: [1.0, 0.0, 0.0],
                color: f(k),
            })
            .collect()
    }

    #[test]
    fn single_chart_reproduces_samples() {
        let r = 2;
        let samples = colored(6, |k| [k as f64 / 5.0, 1.0 - k as f64 / 5.0, 0.5]);
        let (layout, img, uvs) = bake_atlas(&samples, 1, r, 2, 1024).unwrap();
        assert_eq!(layout.footprint(), 7);
        assert_eq!(img.width(), 8);
        for (k, (w, _)) in grid_weights(r).iter().enumerate() {
            let uv =
                [0, 1].map(|c| w[0] * uvs[0][0][c] + w[1] * uvs[0][1][c] + w[2] * uvs[0][2][c]);
            let got = to_rgba8(sample_texture(&img, uv));
            assert_eq!(got, to_rgba8(samples[k].color), "sample {k}");
        }
    }

    #[test]
    fn footprints_disjoint_and_inside() {
        let layout = AtlasLayout::pack(37, 4, 2, 4096).unwrap();
        let fp = layout.footprint();
        let mut owner = vec![usize::MAX; (layout.size * layout.size) as usize];
        for k in 0..37 {
            let [x0, y0] = layout.footprint_origin(k);
            assert!(x0 + fp <= layout.size && y0 + fp <= layout.size);
            for y in y0..y0 + fp {
                for x in x0..x0 + fp {
                    let slot = &mut owner[(y * layout.size + x) as usize];
                    assert_eq!(*slot, usize::MAX);
                    *slot = k;
                }
            }
        }
    }

    #[test]
    fn grows_to_power_of_two_or_fails() {
        let a = AtlasLayout::pack(1, 4, 2, 4096).unwrap();
        assert_eq!(a.size, 16);
        let b = AtlasLayout::pack(5, 4, 2, 4096).unwrap();
        assert_eq!(b.size, 32);
        assert!(b.size.is_power_of_two());
        assert!(matches!(
            AtlasLayout::pack(1000, 4, 2, 64),
            Err(AtlasError::TooLarge { .. })
        ));
    }

    #[test]
    fn no_clear_texels_in_footprints() {
        let charts = 9;
        let samples = colored(charts * 15, |_| [0.2, 0.4, 0.6]);
        let (layout, img, _) = bake_atlas(&samples, charts, 4, 2, 4096).unwrap();
        let fp = layout.footprint();
        for k in 0..charts {
            let [x0, y0] = layout.footprint_origin(k);
            for y in y0..y0 + fp {
                for x in x0..x0 + fp {
                    assert_eq!(img.get(x, y), [51, 102, 153, 255]);
                }
            }
        }
    }
}
