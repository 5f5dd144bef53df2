//! Smooth scalar fields on the plane whose zero or level sets get traced.

use nalgebra::Vector2;

use crate::poly::Poly2;

pub type Vec2 = Vector2<f64>;

/// Second derivatives `(f_xx, f_xy, f_yy)`.
pub type Hessian = [f64; 3];

pub trait ScalarField: Sync {
    fn value(&self, p: Vec2) -> f64;
    fn gradient(&self, p: Vec2) -> Vec2;
    fn hessian(&self, p: Vec2) -> Hessian;

    /// Signed curvature of the level curve through `p`, oriented so that the
    /// side where the field is smaller lies to the left.
    fn level_curvature(&self, p: Vec2) -> f64 {
        let g = self.gradient(p);
        let [hxx, hxy, hyy] = self.hessian(p);
        let n2 = g.norm_squared();
        (hxx * g.y * g.y - 2.0 * hxy * g.x * g.y + hyy * g.x * g.x) / (n2 * n2.sqrt())
    }
}

/// Unit tangent 90° counter-clockwise from the gradient.
#[inline]
pub fn tangent_of(grad: Vec2) -> Vec2 {
    Vec2::new(-grad.y, grad.x) / grad.norm()
}

/// A polynomial with its first and second derivatives cached.
#[derive(Clone, Debug)]
pub struct PolyField {
    pub poly: Poly2,
    px: Poly2,
    py: Poly2,
    pxx: Poly2,
    pxy: Poly2,
    pyy: Poly2,
}

impl PolyField {
    pub fn new(poly: Poly2) -> Self {
        let px = poly.derivative(1, 0);
        let py = poly.derivative(0, 1);
        PolyField {
            pxx: px.derivative(1, 0),
            pxy: px.derivative(0, 1),
            pyy: py.derivative(0, 1),
            px,
            py,
            poly,
        }
    }
}

impl ScalarField for PolyField {
    fn value(&self, p: Vec2) -> f64 {
        self.poly.eval(p.x, p.y)
    }
    fn gradient(&self, p: Vec2) -> Vec2 {
        Vec2::new(self.px.eval(p.x, p.y), self.py.eval(p.x, p.y))
    }
    fn hessian(&self, p: Vec2) -> Hessian {
        [
            self.pxx.eval(p.x, p.y),
            self.pxy.eval(p.x, p.y),
            self.pyy.eval(p.x, p.y),
        ]
    }
}

/// `g(p) / |p|^m`: same zero set as `g` away from the origin, but with values
/// of order one near a point where `g` vanishes to order `m`.
#[derive(Clone, Debug)]
pub struct RadiallyScaled<F> {
    pub inner: F,
    pub order: i32,
}

impl<F: ScalarField> ScalarField for RadiallyScaled<F> {
    fn value(&self, p: Vec2) -> f64 {
        self.inner.value(p) / p.norm().powi(self.order)
    }

    fn gradient(&self, p: Vec2) -> Vec2 {
        let r2 = p.norm_squared();
        let m = self.order as f64;
        let w = r2.sqrt().powi(self.order);
        (self.inner.gradient(p) - p * (m * self.inner.value(p) / r2)) / w
    }

    fn hessian(&self, p: Vec2) -> Hessian {
        // Only used for step-size control; a central difference of the
        // analytic gradient is accurate enough.
        let h = 1e-6 * p.norm().max(1e-300);
        let gx1 = self.gradient(p + Vec2::new(h, 0.0));
        let gx0 = self.gradient(p - Vec2::new(h, 0.0));
        let gy1 = self.gradient(p + Vec2::new(0.0, h));
        let gy0 = self.gradient(p - Vec2::new(0.0, h));
        let hxx = (gx1.x - gx0.x) / (2.0 * h);
        let hyy = (gy1.y - gy0.y) / (2.0 * h);
        let hxy = 0.5 * ((gx1.y - gx0.y) + (gy1.x - gy0.x)) / (2.0 * h);
        [hxx, hxy, hyy]
    }
}
