//! Small geometric primitives shared across the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist2(&self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Axis-aligned rectangle, stored as closed bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_lo: f64,
    pub y_lo: f64,
    pub x_hi: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn centered(center: Point, width: f64, height: f64) -> Self {
        Rect {
            x_lo: center.x - width / 2.0,
            y_lo: center.y - height / 2.0,
            x_hi: center.x + width / 2.0,
            y_hi: center.y + height / 2.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    /// Area of the intersection with `other` (0 when disjoint).
    pub fn overlap_area(&self, other: &Rect) -> f64 {
        let w = self.x_hi.min(other.x_hi) - self.x_lo.max(other.x_lo);
        let h = self.y_hi.min(other.y_hi) - self.y_lo.max(other.y_lo);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Open-interval intersection: rectangles that only share an edge do not overlap.
    /// `eps` absorbs floating-point noise on touching edges.
    pub fn overlaps(&self, other: &Rect, eps: f64) -> bool {
        self.x_lo < other.x_hi - eps
            && other.x_lo < self.x_hi - eps
            && self.y_lo < other.y_hi - eps
            && other.y_lo < self.y_hi - eps
    }

    pub fn inside(&self, width: f64, height: f64, eps: f64) -> bool {
        self.x_lo >= -eps && self.y_lo >= -eps && self.x_hi <= width + eps && self.y_hi <= height + eps
    }
}

/// Node orientation. Only the flips that keep width and height unchanged are modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    N,
    S,
    FN,
    FS,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [Orientation::N, Orientation::S, Orientation::FN, Orientation::FS];

    /// Maps a pin offset given in the node's native (N) frame into this orientation.
    pub fn apply(self, dx: f64, dy: f64) -> (f64, f64) {
        match self {
            Orientation::N => (dx, dy),
            Orientation::S => (-dx, -dy),
            Orientation::FN => (-dx, dy),
            Orientation::FS => (dx, -dy),
        }
    }

    /// Mirror about the vertical axis (x offsets change sign).
    pub fn flip_x(self) -> Self {
        match self {
            Orientation::N => Orientation::FN,
            Orientation::FN => Orientation::N,
            Orientation::S => Orientation::FS,
            Orientation::FS => Orientation::S,
        }
    }

    /// Mirror about the horizontal axis (y offsets change sign).
    pub fn flip_y(self) -> Self {
        match self {
            Orientation::N => Orientation::FS,
            Orientation::FS => Orientation::N,
            Orientation::S => Orientation::FN,
            Orientation::FN => Orientation::S,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::N => "N",
            Orientation::S => "S",
            Orientation::FN => "FN",
            Orientation::FS => "FS",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(Orientation::N),
            "S" => Ok(Orientation::S),
            "FN" => Ok(Orientation::FN),
            "FS" => Ok(Orientation::FS),
            other => Err(format!("unsupported orientation `{other}` (expected N, S, FN or FS)")),
        }
    }
}
