//! Objective engine: HPWL, density, congestion and the blended proxy cost.

mod congestion;
mod density;
mod hpwl;
mod proxy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::netlist::Canvas;

pub use congestion::{congestion_cost, CongestionGrid};
pub use density::{density_cost, DensityGrid};
pub use hpwl::{hpwl_net, hpwl_total, HpwlCache, NetBBox, NodeMove};
pub use proxy::{proxy_cost, CostKind, Evaluator, ProxyCost, ProxyWeights};

pub(crate) use hpwl::hpwl_subset;

/// Bin grid used by the density and congestion terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Fraction of a bin's area that may be occupied before overflow is charged.
    pub target_density: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nx: 32,
            ny: 32,
            target_density: 1.0,
        }
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Self {
        GridSpec { nx, ny, ..GridSpec::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Config(format!("bin grid must be at least 1x1, got {}x{}", self.nx, self.ny)));
        }
        if !(self.target_density > 0.0 && self.target_density.is_finite()) {
            return Err(Error::Config(format!("target density must be positive, got {}", self.target_density)));
        }
        Ok(())
    }
}

/// Bin geometry over the canvas.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bins {
    pub nx: usize,
    pub ny: usize,
    pub bin_w: f64,
    pub bin_h: f64,
}

impl Bins {
    pub fn new(canvas: Canvas, spec: &GridSpec) -> Self {
        Bins {
            nx: spec.nx,
            ny: spec.ny,
            bin_w: canvas.width / spec.nx as f64,
            bin_h: canvas.height / spec.ny as f64,
        }
    }

    pub fn count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn bin_area(&self) -> f64 {
        self.bin_w * self.bin_h
    }

    /// Calls `f(bin index, overlap area)` for every bin overlapping `r`.
    pub fn for_each_overlap(&self, r: &Rect, mut f: impl FnMut(usize, f64)) {
        if r.area() <= 0.0 {
            return;
        }
        let ix0 = ((r.x_lo / self.bin_w).floor().max(0.0) as usize).min(self.nx - 1);
        let ix1 = ((r.x_hi / self.bin_w).ceil().max(0.0) as usize).min(self.nx);
        let iy0 = ((r.y_lo / self.bin_h).floor().max(0.0) as usize).min(self.ny - 1);
        let iy1 = ((r.y_hi / self.bin_h).ceil().max(0.0) as usize).min(self.ny);
        for iy in iy0..iy1 {
            let y_lo = iy as f64 * self.bin_h;
            let y_hi = if iy + 1 == self.ny { f64::INFINITY } else { y_lo + self.bin_h };
            let h = r.y_hi.min(y_hi) - r.y_lo.max(if iy == 0 { f64::NEG_INFINITY } else { y_lo });
            if h <= 0.0 {
                continue;
            }
            for ix in ix0..ix1 {
                let x_lo = ix as f64 * self.bin_w;
                let x_hi = if ix + 1 == self.nx { f64::INFINITY } else { x_lo + self.bin_w };
                let w = r.x_hi.min(x_hi) - r.x_lo.max(if ix == 0 { f64::NEG_INFINITY } else { x_lo });
                if w > 0.0 {
                    f(iy * self.nx + ix, w * h);
                }
            }
        }
    }
}

/// Clips `r` to the canvas.
pub(crate) fn clip(r: &Rect, canvas: Canvas) -> Rect {
    Rect {
        x_lo: r.x_lo.clamp(0.0, canvas.width),
        y_lo: r.y_lo.clamp(0.0, canvas.height),
        x_hi: r.x_hi.clamp(0.0, canvas.width),
        y_hi: r.y_hi.clamp(0.0, canvas.height),
    }
}
