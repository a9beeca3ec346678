//! Planar geometry on a patch grid.
//!
//! The world is a `width x height` grid of unit patches. Positions are
//! continuous; the patch containing a position is found by flooring its
//! coordinates. Patch centers sit at half-integer coordinates. Headings are
//! radians measured counterclockwise from east (+x); north is +y.

use crate::scalar::Real;

/// 2-D vector / point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Real> Vec2<S> {
    pub fn new(x: S, y: S) -> Self {
        Vec2 { x, y }
    }

    pub fn add(self, o: Vec2<S>) -> Vec2<S> {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Vec2<S>) -> Vec2<S> {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: S) -> Vec2<S> {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn norm(self) -> S {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn dist(self, o: Vec2<S>) -> S {
        self.sub(o).norm()
    }

    /// Unit vector for a heading in radians.
    pub fn from_heading(theta: S) -> Vec2<S> {
        Vec2::new(theta.cos(), theta.sin())
    }

    /// Index of the patch containing this position.
    pub fn patch(self) -> (i64, i64) {
        (
            self.x.floor().to_f64_lossy() as i64,
            self.y.floor().to_f64_lossy() as i64,
        )
    }
}

/// Center position of a patch.
pub fn patch_center<S: Real>(px: i64, py: i64) -> Vec2<S> {
    let half = S::from_f64_lossy(0.5);
    Vec2::new(S::from_f64_lossy(px as f64) + half, S::from_f64_lossy(py as f64) + half)
}

/// Chebyshev distance between two patches. A field of view with radius `r`
/// contains exactly the patches at Chebyshev distance `<= r`.
pub fn chebyshev(a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Patches within Chebyshev radius `r` of `center`, clipped to the
/// `width x height` grid, in row-major order.
pub fn fov_patches(center: (i64, i64), r: i64, width: i64, height: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let (px, py) = (center.0 + dx, center.1 + dy);
            if px >= 0 && px < width && py >= 0 && py < height {
                out.push((px, py));
            }
        }
    }
    out
}

/// True if the position lies inside the `[0, width) x [0, height)` area.
pub fn in_bounds<S: Real>(p: Vec2<S>, width: S, height: S) -> bool {
    p.x >= S::zero() && p.x < width && p.y >= S::zero() && p.y < height
}
