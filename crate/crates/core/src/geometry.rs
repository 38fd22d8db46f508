//! Axis-aligned rectangles and the perimeter/area functionals over families
//! of them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::NeumaierSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]")]
    Degenerate { x0: f64, y0: f64, x1: f64, y1: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("square side must be positive, got {0}")]
    NonPositiveSide(f64),
}

/// An axis-aligned rectangle stored by absolute corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    /// Rejects non-finite corners and zero or negative extent on either axis.
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if !(x0 < x1 && y0 < y1) {
            return Err(GeometryError::Degenerate { x0, y0, x1, y1 });
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn from_origin(x: f64, y: f64, dx: f64, dy: f64) -> Result<Self, GeometryError> {
        Rect::new(x, y, x + dx, y + dy)
    }

    pub fn square(x: f64, y: f64, side: f64) -> Result<Self, GeometryError> {
        Rect::new(x, y, x + side, y + side)
    }

    pub fn dx(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn dy(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Shorter side.
    pub fn w(&self) -> f64 {
        self.dx().min(self.dy())
    }

    /// Longer side.
    pub fn h(&self) -> f64 {
        self.dx().max(self.dy())
    }

    pub fn area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// True when the long side runs along x.
    pub fn is_wide(&self) -> bool {
        self.dx() > self.dy()
    }

    /// Whether `self` lies in `outer` up to `tol` on every edge.
    pub fn within(&self, outer: &Rect, tol: f64) -> bool {
        self.x0 >= outer.x0 - tol
            && self.y0 >= outer.y0 - tol
            && self.x1 <= outer.x1 + tol
            && self.y1 <= outer.y1 + tol
    }

    /// `min(x-overlap, y-overlap)`, or a non-positive value if the
    /// interiors are disjoint.
    pub fn overlap_depth(&self, other: &Rect) -> f64 {
        let ox = self.x1.min(other.x1) - self.x0.max(other.x0);
        let oy = self.y1.min(other.y1) - self.y0.max(other.y0);
        ox.min(oy)
    }
}

/// A square of the packing, carrying its sequence index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedSquare {
    pub n: u64,
    pub x: f64,
    pub y: f64,
    pub side: f64,
}

impl PlacedSquare {
    pub fn new(n: u64, x: f64, y: f64, side: f64) -> Result<Self, GeometryError> {
        if !(x.is_finite() && y.is_finite() && side.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if side <= 0.0 {
            return Err(GeometryError::NonPositiveSide(side));
        }
        Ok(PlacedSquare { n, x, y, side })
    }

    pub fn rect(&self) -> Rect {
        Rect {
            x0: self.x,
            y0: self.y,
            x1: self.x + self.side,
            y1: self.y + self.side,
        }
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }
}

/// `2 Σ (w + h)`.
pub fn perim(rects: &[Rect]) -> f64 {
    let mut acc = NeumaierSum::new();
    for r in rects {
        acc.add(r.w());
        acc.add(r.h());
    }
    2.0 * acc.value()
}

/// `Σ w^δ h`.
pub fn perim_delta(rects: &[Rect], delta: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for r in rects {
        acc.add(weighted_perimeter(r, delta));
    }
    acc.value()
}

/// `w(R)^δ h(R)` for a single rectangle.
pub fn weighted_perimeter(r: &Rect, delta: f64) -> f64 {
    r.w().powf(delta) * r.h()
}

/// `Σ w h`.
pub fn area(rects: &[Rect]) -> f64 {
    let mut acc = NeumaierSum::new();
    for r in rects {
        acc.add(r.area());
    }
    acc.value()
}

/// `Σ side²`.
pub fn squares_area(squares: &[PlacedSquare]) -> f64 {
    let mut acc = NeumaierSum::new();
    for s in squares {
        acc.add(s.area());
    }
    acc.value()
}
