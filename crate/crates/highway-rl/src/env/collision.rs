//! Oriented-rectangle overlap test via the separating-axis method.

/// An oriented rectangle described by center, half extents, and heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub cx: f64,
    pub cy: f64,
    pub half_length: f64,
    pub half_width: f64,
    pub heading: f64,
}

impl OrientedRect {
    pub fn new(cx: f64, cy: f64, length: f64, width: f64, heading: f64) -> Self {
        Self { cx, cy, half_length: length / 2.0, half_width: width / 2.0, heading }
    }

    /// Unit vector along the rectangle's long axis.
    fn axis_long(&self) -> (f64, f64) {
        (self.heading.cos(), self.heading.sin())
    }

    /// Unit vector along the rectangle's short axis.
    fn axis_lat(&self) -> (f64, f64) {
        (-self.heading.sin(), self.heading.cos())
    }

    /// Projection radius of the rectangle onto a unit axis.
    fn radius_on(&self, axis: (f64, f64)) -> f64 {
        let (ux, uy) = self.axis_long();
        let (vx, vy) = self.axis_lat();
        self.half_length * (axis.0 * ux + axis.1 * uy).abs()
            + self.half_width * (axis.0 * vx + axis.1 * vy).abs()
    }
}

/// True iff the two rectangles overlap (touching counts as overlap).
///
/// The four candidate separating axes are the edge normals of both
/// rectangles; for rectangles these coincide with their local axes.
pub fn rects_intersect(a: &OrientedRect, b: &OrientedRect) -> bool {
    let axes = [a.axis_long(), a.axis_lat(), b.axis_long(), b.axis_lat()];
    let (dx, dy) = (b.cx - a.cx, b.cy - a.cy);
    for axis in axes {
        let dist = (dx * axis.0 + dy * axis.1).abs();
        if dist > a.radius_on(axis) + b.radius_on(axis) {
            return false;
        }
    }
    true
}
