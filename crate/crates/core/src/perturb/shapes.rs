//! Rasterizer for the counting task's primitive shapes.
//!
//! Pixel `(x, y)` is sampled at its integer coordinates. Shapes are filled
//! opaquely, with an outline band of `outline_width` pixels along the
//! inside of the boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;

pub type Rgb = [u8; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Circle,
    Rectangle,
    Triangle,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Circle, ShapeKind::Rectangle, ShapeKind::Triangle];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circle",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Triangle => "triangle",
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circles",
            ShapeKind::Rectangle => "rectangles",
            ShapeKind::Triangle => "triangles",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().trim_end_matches('s') {
            "circle" => Ok(ShapeKind::Circle),
            "rectangle" | "square" => Ok(ShapeKind::Rectangle),
            "triangle" => Ok(ShapeKind::Triangle),
            _ => Err(Error::InvalidParams(format!("unknown shape {s:?}"))),
        }
    }
}

/// One placed primitive. `size` is the radius for circles, the half side
/// for rectangles (drawn as squares) and the circumradius for triangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub center: [f64; 2],
    pub size: f64,
    /// Degrees, clockwise on screen.
    pub rotation: f64,
    pub fill: Rgb,
    pub outline: Rgb,
    pub outline_width: f64,
}

/// Inclusive integer pixel box `[x0, y0, x1, y1]`.
pub type BBox = [i64; 4];

pub fn bboxes_overlap(a: &BBox, b: &BBox) -> bool {
    a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3]
}

// Outward edge normals of an upward-pointing equilateral triangle in screen
// coordinates (y grows downward).
const TRI_NORMAL_DEG: [f64; 3] = [90.0, 210.0, 330.0];

impl ShapeSpec {
    fn local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.rotation.to_radians().sin_cos();
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// Distance from the point to the boundary, positive inside, negative
    /// outside. Exact for circles and the L-infinity metric for squares.
    pub fn inset(&self, x: f64, y: f64) -> f64 {
        let (u, v) = self.local(x, y);
        match self.kind {
            ShapeKind::Circle => self.size - u.hypot(v),
            ShapeKind::Rectangle => self.size - u.abs().max(v.abs()),
            ShapeKind::Triangle => TRI_NORMAL_DEG
                .iter()
                .map(|a| {
                    let (s, c) = a.to_radians().sin_cos();
                    self.size / 2.0 - (u * c + v * s)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.inset(x, y) >= 0.0
    }

    /// Offsets `(min_x, min_y, max_x, max_y)` of the rotated shape from its center.
    fn extent(&self) -> (f64, f64, f64, f64) {
        match self.kind {
            ShapeKind::Circle => (-self.size, -self.size, self.size, self.size),
            ShapeKind::Rectangle => {
                let (s, c) = self.rotation.to_radians().sin_cos();
                let e = self.size * (c.abs() + s.abs());
                (-e, -e, e, e)
            }
            ShapeKind::Triangle => self.vertices_local().into_iter().fold(
                (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
                |(x0, y0, x1, y1), (vx, vy)| (x0.min(vx), y0.min(vy), x1.max(vx), y1.max(vy)),
            ),
        }
    }

    /// Triangle vertices relative to the center, rotated.
    fn vertices_local(&self) -> Vec<(f64, f64)> {
        let (s, c) = self.rotation.to_radians().sin_cos();
        TRI_NORMAL_DEG
            .iter()
            .map(|a| {
                let (ns, nc) = a.to_radians().sin_cos();
                let (u, v) = (-self.size * nc, -self.size * ns);
                (c * u - s * v, s * u + c * v)
            })
            .collect()
    }

    pub fn bbox(&self) -> BBox {
        // the slack keeps trig round-off from widening the box by a pixel
        const SLACK: f64 = 1e-9;
        let (x0, y0, x1, y1) = self.extent();
        [
            (self.center[0] + x0 + SLACK).floor() as i64,
            (self.center[1] + y0 + SLACK).floor() as i64,
            (self.center[0] + x1 - SLACK).ceil() as i64,
            (self.center[1] + y1 - SLACK).ceil() as i64,
        ]
    }

    pub fn in_bounds(&self, width: u32, height: u32) -> bool {
        let b = self.bbox();
        b[0] >= 0 && b[1] >= 0 && b[2] < width as i64 && b[3] < height as i64
    }

    /// Color at `(x, y)`, or `None` outside the shape.
    pub fn shade(&self, x: f64, y: f64) -> Option<Rgb> {
        let d = self.inset(x, y);
        if d < 0.0 {
            None
        } else if d < self.outline_width {
            Some(self.outline)
        } else {
            Some(self.fill)
        }
    }
}

/// Composites `shapes` over `frame` in list order.
pub fn render_shapes(frame: &Frame, shapes: &[ShapeSpec]) -> Result<Frame> {
    let (w, h) = (frame.width(), frame.height());
    for (index, s) in shapes.iter().enumerate() {
        if !s.in_bounds(w, h) || s.size.is_nan() || s.size <= 0.0 {
            return Err(Error::ShapeOutOfBounds {
                index,
                bbox: s.bbox(),
                width: w,
                height: h,
            });
        }
    }
    if shapes.is_empty() {
        return Ok(frame.clone());
    }
    let mut data = frame.to_vec();
    for s in shapes {
        let b = s.bbox();
        for y in b[1]..=b[3] {
            for x in b[0]..=b[2] {
                if let Some(rgb) = s.shade(x as f64, y as f64) {
                    let i = ((y as usize) * w as usize + x as usize) * 3;
                    data[i..i + 3].copy_from_slice(&rgb);
                }
            }
        }
    }
    Frame::new(w, h, data)
}
