//! Color-marker detection: per-spec RGB range mask, 4-connected components,
//! largest component's centroid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorMarkerSpec {
    pub name: String,
    pub rgb_min: [u8; 3],
    pub rgb_max: [u8; 3],
    pub min_area_px: u32,
}

impl ColorMarkerSpec {
    pub fn validate(&self) -> Result<(), MarkerError> {
        let ordered = self.rgb_min.iter().zip(&self.rgb_max).all(|(lo, hi)| lo <= hi);
        if self.name.is_empty() || !ordered || self.min_area_px == 0 {
            return Err(MarkerError::InvalidSpec(self.name.clone()));
        }
        Ok(())
    }

    #[inline]
    fn contains(&self, px: &[u8]) -> bool {
        (0..3).all(|c| self.rgb_min[c] <= px[c] && px[c] <= self.rgb_max[c])
    }
}

/// Row-major RGB8 pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBuffer {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl FrameBuffer {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, MarkerError> {
        let frame = Self {
            width,
            height,
            pixels,
        };
        frame.check()?;
        Ok(frame)
    }

    /// A frame filled with one color.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            pixels: rgb.repeat(n),
        }
    }

    pub fn set(&mut self, col: u32, row: u32, rgb: [u8; 3]) {
        let i = (row as usize * self.width as usize + col as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn fill_rect(&mut self, col: u32, row: u32, w: u32, h: u32, rgb: [u8; 3]) {
        for r in row..(row + h).min(self.height) {
            for c in col..(col + w).min(self.width) {
                self.set(c, r, rgb);
            }
        }
    }

    fn check(&self) -> Result<(), MarkerError> {
        let expected = self.width as usize * self.height as usize * 3;
        if self.width == 0 || self.height == 0 || self.pixels.len() != expected {
            return Err(MarkerError::BadFrame {
                expected,
                actual: self.pixels.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerDetection {
    pub name: String,
    pub centroid: Point,
    pub area_px: u32,
    /// Exact (Σcol, Σrow) over the component's pixels.
    #[serde(skip)]
    pub pixel_sums: (u64, u64),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarkerError {
    #[error("frame buffer has {actual} bytes, expected {expected}")]
    BadFrame { expected: usize, actual: usize },
    #[error("invalid marker spec {0:?}")]
    InvalidSpec(String),
}

/// Calibration defaults: light blue (left) and yellow (right).
pub fn default_specs() -> Vec<ColorMarkerSpec> {
    vec![
        ColorMarkerSpec {
            name: "lightblue".into(),
            rgb_min: [90, 170, 200],
            rgb_max: [190, 235, 255],
            min_area_px: 40,
        },
        ColorMarkerSpec {
            name: "yellow".into(),
            rgb_min: [200, 180, 0],
            rgb_max: [255, 255, 110],
            min_area_px: 40,
        },
    ]
}

struct Component {
    area: u64,
    sum_col: u64,
    sum_row: u64,
}

fn largest_component(frame: &FrameBuffer, spec: &ColorMarkerSpec) -> Option<Component> {
    let w = frame.width as usize;
    let h = frame.height as usize;
    let mask: Vec<bool> = frame.pixels.chunks_exact(3).map(|px| spec.contains(px)).collect();
    let mut visited = vec![false; w * h];
    let mut stack = Vec::new();
    let mut best: Option<Component> = None;

    for start in 0..w * h {
        if !mask[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut comp = Component {
            area: 0,
            sum_col: 0,
            sum_row: 0,
        };
        while let Some(i) = stack.pop() {
            let (row, col) = (i / w, i % w);
            comp.area += 1;
            comp.sum_col += col as u64;
            comp.sum_row += row as u64;
            let mut visit = |j: usize| {
                if mask[j] && !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            };
            if col > 0 {
                visit(i - 1);
            }
            if col + 1 < w {
                visit(i + 1);
            }
            if row > 0 {
                visit(i - w);
            }
            if row + 1 < h {
                visit(i + w);
            }
        }
        // first found in raster order wins ties
        if best.as_ref().is_none_or(|b| comp.area > b.area) {
            best = Some(comp);
        }
    }
    best
}

/// At most one detection per spec, in spec order.
pub fn detect(
    frame: &FrameBuffer,
    specs: &[ColorMarkerSpec],
) -> Result<Vec<MarkerDetection>, MarkerError> {
    frame.check()?;
    let mut out = Vec::new();
    for spec in specs {
        spec.validate()?;
        let Some(comp) = largest_component(frame, spec) else {
            continue;
        };
        if comp.area < u64::from(spec.min_area_px) {
            continue;
        }
        let n = comp.area as f64;
        out.push(MarkerDetection {
            name: spec.name.clone(),
            centroid: Point::new(
                comp.sum_col as f64 / n / f64::from(frame.width),
                comp.sum_row as f64 / n / f64::from(frame.height),
            ),
            area_px: comp.area as u32,
            pixel_sums: (comp.sum_col, comp.sum_row),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const YELLOW: [u8; 3] = [255, 230, 40];

    fn yellow_spec(min_area_px: u32) -> ColorMarkerSpec {
        ColorMarkerSpec {
            min_area_px,
            ..default_specs().remove(1)
        }
    }

    #[test]
    fn single_block_centroid() {
        let mut f = FrameBuffer::filled(100, 100, [0, 0, 0]);
        f.fill_rect(20, 20, 10, 10, YELLOW);
        let d = detect(&f, &[yellow_spec(1)]).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].area_px, 100);
        assert!((d[0].centroid.x - 0.245).abs() < 1e-12);
        assert!((d[0].centroid.y - 0.245).abs() < 1e-12);
    }

    #[test]
    fn black_frame_detects_nothing() {
        let f = FrameBuffer::filled(64, 48, [0, 0, 0]);
        assert!(detect(&f, &default_specs()).unwrap().is_empty());
    }

    #[test]
    fn largest_blob_wins() {
        let mut f = FrameBuffer::filled(100, 100, [0, 0, 0]);
        f.fill_rect(60, 60, 8, 8, YELLOW);
        f.fill_rect(10, 10, 10, 10, YELLOW);
        let d = detect(&f, &[yellow_spec(1)]).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].area_px, 100);
        assert!((d[0].centroid.x - 0.145).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pixels_are_separate_components() {
        let mut f = FrameBuffer::filled(4, 4, [0, 0, 0]);
        f.set(0, 0, YELLOW);
        f.set(1, 1, YELLOW);
        let d = detect(&f, &[yellow_spec(1)]).unwrap();
        assert_eq!(d[0].area_px, 1);
        assert!(detect(&f, &[yellow_spec(2)]).unwrap().is_empty());
    }

    #[test]
    fn bad_frame() {
        let f = FrameBuffer {
            width: 10,
            height: 10,
            pixels: vec![0; 299],
        };
        assert_eq!(
            detect(&f, &default_specs()),
            Err(MarkerError::BadFrame {
                expected: 300,
                actual: 299
            })
        );
        assert!(FrameBuffer::new(2, 2, vec![0; 12]).is_ok());
    }

    #[test]
    fn default_specs_are_valid() {
        let specs = default_specs();
        let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["lightblue", "yellow"]);
        assert!(specs.iter().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn override_ranges_take_effect() {
        let mut f = FrameBuffer::filled(10, 10, [0, 0, 0]);
        f.fill_rect(0, 0, 3, 3, [10, 200, 10]);
        assert!(detect(&f, &default_specs()).unwrap().is_empty());
        let green = ColorMarkerSpec {
            name: "yellow".into(),
            rgb_min: [0, 150, 0],
            rgb_max: [50, 255, 50],
            min_area_px: 4,
        };
        assert_eq!(detect(&f, &[green]).unwrap()[0].area_px, 9);
    }

    #[test]
    fn inverted_range_rejected() {
        let mut s = yellow_spec(1);
        s.rgb_min[0] = 255;
        s.rgb_max[0] = 0;
        assert!(matches!(
            detect(&FrameBuffer::filled(2, 2, [0, 0, 0]), &[s]),
            Err(MarkerError::InvalidSpec(_))
        ));
    }

    proptest! {
        #[test]
        fn translation_equivariant(w in 1u32..12, h in 1u32..12, x in 0u32..40, y in 0u32..40,
                                    dx in 0u32..12, dy in 0u32..12) {
            let (fw, fh) = (64u32, 64u32);
            let mut a = FrameBuffer::filled(fw, fh, [0, 0, 0]);
            a.fill_rect(x, y, w, h, YELLOW);
            let mut b = FrameBuffer::filled(fw, fh, [0, 0, 0]);
            b.fill_rect(x + dx, y + dy, w, h, YELLOW);
            let da = detect(&a, &[yellow_spec(1)]).unwrap();
            let db = detect(&b, &[yellow_spec(1)]).unwrap();
            prop_assert_eq!(da.len(), 1);
            prop_assert_eq!(da[0].area_px, db[0].area_px);
            let sx = db[0].centroid.x - da[0].centroid.x;
            let sy = db[0].centroid.y - da[0].centroid.y;
            prop_assert!((sx - f64::from(dx) / f64::from(fw)).abs() < 1e-12);
            prop_assert!((sy - f64::from(dy) / f64::from(fh)).abs() < 1e-12);
        }
    }
}
