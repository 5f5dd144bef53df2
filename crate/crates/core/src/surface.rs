//! Surfaces `z = f(x, y)` in Monge form and the contact type of their
//! tangent plane at the origin.
//!
//! Coefficients follow `f = Σ a_ij x^i y^j`. The cubic coefficients
//! `b0..b3` are `a30, a21, a12, a03` and the quartic ones `c0..c4` are
//! `a40, a31, a22, a13, a04` (lowest power of `y` first).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Hessian, ScalarField, Vec2};
use crate::poly::Poly2;

pub const DEFAULT_MAX_DEGREE: usize = 6;

/// Absolute tolerance on coefficient expressions in degeneracy tests.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
struct Jets {
    fx: Poly2,
    fy: Poly2,
    fxx: Poly2,
    fxy: Poly2,
    fyy: Poly2,
    fxxx: Poly2,
    fxxy: Poly2,
    fxyy: Poly2,
    fyyy: Poly2,
}

impl Jets {
    fn new(f: &Poly2) -> Self {
        let fx = f.derivative(1, 0);
        let fy = f.derivative(0, 1);
        let fxx = fx.derivative(1, 0);
        let fxy = fx.derivative(0, 1);
        let fyy = fy.derivative(0, 1);
        Jets {
            fxxx: fxx.derivative(1, 0),
            fxxy: fxx.derivative(0, 1),
            fxyy: fxy.derivative(0, 1),
            fyyy: fyy.derivative(0, 1),
            fx,
            fy,
            fxx,
            fxy,
            fyy,
        }
    }
}

/// Derivatives of `f` up to order three at one point.
#[derive(Clone, Copy, Debug, Default)]
pub struct LocalJet {
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fxy: f64,
    pub fyy: f64,
    pub fxxx: f64,
    pub fxxy: f64,
    pub fxyy: f64,
    pub fyyy: f64,
}

impl LocalJet {
    pub fn gradient(&self) -> Vec2 {
        Vec2::new(self.fx, self.fy)
    }
}

#[derive(Clone, Debug)]
pub struct MongeSurface {
    poly: Poly2,
    radius: f64,
    max_degree: usize,
    jets: Jets,
}

impl MongeSurface {
    pub fn new(poly: Poly2, radius: f64) -> Result<Self> {
        Self::with_max_degree(poly, radius, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(poly: Poly2, radius: f64, max_degree: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        let degree = poly.effective_degree();
        if degree > max_degree {
            return Err(Error::DegreeTooHigh {
                degree,
                max: max_degree,
            });
        }
        for (i, j) in [(0, 0), (1, 0), (0, 1)] {
            let value = poly.coeff(i, j);
            if value != 0.0 {
                return Err(Error::NotMongeForm { i, j, value });
            }
        }
        let jets = Jets::new(&poly);
        Ok(MongeSurface {
            poly,
            radius,
            max_degree,
            jets,
        })
    }

    pub fn from_terms(terms: &[(usize, usize, f64)], radius: f64) -> Result<Self> {
        Self::new(Poly2::from_terms(terms), radius)
    }

    pub fn poly(&self) -> &Poly2 {
        &self.poly
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::with_max_degree(self.poly.clone(), radius, self.max_degree)
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.poly.coeff(i, j)
    }

    /// `[b0, b1, b2, b3]`.
    pub fn cubic(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|j| self.poly.coeff(3 - j, j))
    }

    /// `[c0, .., c4]`.
    pub fn quartic(&self) -> [f64; 5] {
        [0, 1, 2, 3, 4].map(|j| self.poly.coeff(4 - j, j))
    }

    /// `∂^(i+j) f / ∂x^i ∂y^j` at `p`.
    pub fn evaluate(&self, p: Vec2, order: (usize, usize)) -> f64 {
        self.poly.eval_derivative(p.x, p.y, order.0, order.1)
    }

    pub fn jet(&self, p: Vec2) -> LocalJet {
        let (x, y) = (p.x, p.y);
        let j = &self.jets;
        LocalJet {
            f: self.poly.eval(x, y),
            fx: j.fx.eval(x, y),
            fy: j.fy.eval(x, y),
            fxx: j.fxx.eval(x, y),
            fxy: j.fxy.eval(x, y),
            fyy: j.fyy.eval(x, y),
            fxxx: j.fxxx.eval(x, y),
            fxxy: j.fxxy.eval(x, y),
            fxyy: j.fxyy.eval(x, y),
            fyyy: j.fyyy.eval(x, y),
        }
    }

    /// The same surface with its graph rotated by `theta` about the z-axis:
    /// a point `q` on the original maps to `R(theta) q`.
    pub fn rotated(&self, theta: f64) -> MongeSurface {
        let (c, s) = (theta.cos(), theta.sin());
        let poly = self.poly.compose_linear([[c, s], [-s, c]]);
        MongeSurface::with_max_degree(poly, self.radius, self.max_degree).expect("rotation preserves Monge form")
    }

    /// Derivative polynomials of order one and two, for symbolic assembly.
    pub fn first_second_derivatives(&self) -> [&Poly2; 5] {
        let j = &self.jets;
        [&j.fx, &j.fy, &j.fxx, &j.fxy, &j.fyy]
    }
}

impl ScalarField for MongeSurface {
    fn value(&self, p: Vec2) -> f64 {
        self.poly.eval(p.x, p.y)
    }
    fn gradient(&self, p: Vec2) -> Vec2 {
        Vec2::new(self.jets.fx.eval(p.x, p.y), self.jets.fy.eval(p.x, p.y))
    }
    fn hessian(&self, p: Vec2) -> Hessian {
        let j = &self.jets;
        [j.fxx.eval(p.x, p.y), j.fxy.eval(p.x, p.y), j.fyy.eval(p.x, p.y)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    Elliptic { umbilic: bool },
    Hyperbolic,
    Parabolic,
    EllipticCuspOfGauss,
    HyperbolicCuspOfGauss,
}

impl PointClass {
    pub fn name(&self) -> &'static str {
        match self {
            PointClass::Elliptic { .. } => "elliptic",
            PointClass::Hyperbolic => "hyperbolic",
            PointClass::Parabolic => "parabolic",
            PointClass::EllipticCuspOfGauss => "elliptic_cusp_of_gauss",
            PointClass::HyperbolicCuspOfGauss => "hyperbolic_cusp_of_gauss",
        }
    }

    pub fn is_umbilic(&self) -> bool {
        matches!(self, PointClass::Elliptic { umbilic: true })
    }
}

pub fn classify_origin(surface: &MongeSurface) -> Result<PointClass> {
    classify_origin_with(surface, DEFAULT_DEGENERACY_TOL)
}

pub fn classify_origin_with(surface: &MongeSurface, tol: f64) -> Result<PointClass> {
    let a = 2.0 * surface.coefficient(2, 0);
    let b = surface.coefficient(1, 1);
    let c = 2.0 * surface.coefficient(0, 2);
    let det = a * c - b * b;
    if det > tol {
        let umbilic = (a - c).abs() <= tol && b.abs() <= tol;
        return Ok(PointClass::Elliptic { umbilic });
    }
    if det < -tol {
        return Ok(PointClass::Hyperbolic);
    }
    if a.abs() <= tol && b.abs() <= tol && c.abs() <= tol {
        return Err(Error::DegenerateContact("Hessian vanishes at the origin".into()));
    }
    // Rank one: turn the kernel of the Hessian onto the y-axis.
    let kernel = if a.abs() >= c.abs() {
        Vec2::new(-b, a)
    } else {
        Vec2::new(c, -b)
    };
    let theta = kernel.x.atan2(kernel.y);
    let g = surface.rotated(theta);
    let lambda = g.coefficient(2, 0);
    if g.coefficient(0, 3).abs() > tol {
        return Ok(PointClass::Parabolic);
    }
    // Weighted order four (x ~ y^2): λx² + a12 x y² + a04 y⁴; completing the
    // square leaves (a04 − a12²/4λ) y⁴.
    let residual = g.coefficient(0, 4) - g.coefficient(1, 2).powi(2) / (4.0 * lambda);
    if residual.abs() <= tol {
        return Err(Error::DegenerateContact("cusp-of-Gauss quartic test vanishes".into()));
    }
    if residual * lambda > 0.0 {
        Ok(PointClass::EllipticCuspOfGauss)
    } else {
        Ok(PointClass::HyperbolicCuspOfGauss)
    }
}

#[derive(Clone, Debug)]
pub struct UmbilicNormalization {
    pub surface: MongeSurface,
    /// Rotation applied (radians); see [`MongeSurface::rotated`].
    pub angle: f64,
    /// `b1 != b3` after rotation.
    pub generic: bool,
}

/// Rotates an umbilic so that `b0 = b2`, choosing the root of smallest
/// magnitude in `(-π/2, π/2]`.
pub fn normalize_umbilic(surface: &MongeSurface) -> Result<UmbilicNormalization> {
    let class = classify_origin(surface)?;
    if !class.is_umbilic() {
        return Err(Error::NotUmbilic(class.name().to_string()));
    }
    let cubic = surface.poly().homogeneous_part(3);
    let gap = |theta: f64| {
        let (c, s) = (theta.cos(), theta.sin());
        let r = cubic.compose_linear([[c, s], [-s, c]]);
        r.coeff(3, 0) - r.coeff(1, 2)
    };
    let angle = if gap(0.0).abs() <= 1e-13 {
        0.0
    } else {
        // b0 − b2 only carries odd harmonics, so it changes sign over any
        // half turn.
        let n = 720;
        let lo = -std::f64::consts::FRAC_PI_2;
        let step = std::f64::consts::PI / n as f64;
        let mut roots = Vec::new();
        let mut prev = (lo, gap(lo));
        for i in 1..=n {
            let t = lo + step * i as f64;
            let g = gap(t);
            if g == 0.0 {
                roots.push(t);
            } else if prev.1 * g < 0.0 {
                let (mut a, mut b, mut ga) = (prev.0, t, prev.1);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let gm = gap(m);
                    if gm == 0.0 || (b - a) < 1e-17 {
                        a = m;
                        b = m;
                        break;
                    }
                    if ga * gm < 0.0 {
                        b = m;
                    } else {
                        a = m;
                        ga = gm;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            prev = (t, g);
        }
        roots
            .into_iter()
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .ok_or_else(|| Error::DegenerateContact("no rotation equalises b0 and b2".into()))?
    };
    let rotated = surface.rotated(angle);
    let [_, b1, _, b3] = rotated.cubic();
    let generic = (b1 - b3).abs() > DEFAULT_DEGENERACY_TOL;
    Ok(UmbilicNormalization {
        surface: rotated,
        angle,
        generic,
    })
}

/// JSON surface file: `{"coeffs": [[i, j, value], ...], "radius": r}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub coeffs: Vec<(usize, usize, f64)>,
    pub radius: f64,
}

impl SurfaceFile {
    pub fn into_surface(self) -> Result<MongeSurface> {
        MongeSurface::from_terms(&self.coeffs, self.radius)
    }

    pub fn from_surface(surface: &MongeSurface) -> Self {
        SurfaceFile {
            coeffs: surface.poly().terms().collect(),
            radius: surface.radius(),
        }
    }
}

pub fn load_surface(path: &std::path::Path) -> Result<MongeSurface> {
    let text = std::fs::read_to_string(path)?;
    let file: SurfaceFile = serde_json::from_str(&text)?;
    file.into_surface()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(terms: &[(usize, usize, f64)]) -> MongeSurface {
        MongeSurface::from_terms(terms, 1.0).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = s(&[(2, 0, 1.0), (0, 2, 2.0)]);
        assert_eq!(f.evaluate(Vec2::new(1.0, 0.0), (1, 0)), 2.0);
        assert_eq!(f.evaluate(Vec2::zeros(), (0, 2)), 4.0);
        assert_eq!(f.evaluate(Vec2::zeros(), (0, 0)), 0.0);
    }

    #[test]
    fn rejects_non_monge() {
        let err = MongeSurface::from_terms(&[(1, 0, 0.5), (2, 0, 1.0)], 1.0).unwrap_err();
        assert!(matches!(err, Error::NotMongeForm { i: 1, j: 0, .. }));
        assert!(matches!(
            MongeSurface::from_terms(&[(2, 0, 1.0)], 0.0),
            Err(Error::InvalidRadius(_))
        ));
        assert!(matches!(
            MongeSurface::from_terms(&[(7, 0, 1.0)], 1.0),
            Err(Error::DegreeTooHigh { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_origin(&s(&[(2, 0, 1.0), (0, 2, 2.0)])).unwrap(),
            PointClass::Elliptic { umbilic: false }
        );
        assert_eq!(
            classify_origin(&s(&[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 1.0), (1, 2, -1.0), (0, 3, 2.0)])).unwrap(),
            PointClass::Elliptic { umbilic: true }
        );
        assert_eq!(
            classify_origin(&s(&[(2, 0, 1.0), (0, 2, -1.0), (3, 0, 1.0)])).unwrap(),
            PointClass::Hyperbolic
        );
        assert_eq!(
            classify_origin(&s(&[(2, 0, 1.0), (0, 3, 1.0)])).unwrap(),
            PointClass::Parabolic
        );
        assert_eq!(
            classify_origin(&s(&[(2, 0, 1.0), (0, 4, 1.0)])).unwrap(),
            PointClass::EllipticCuspOfGauss
        );
        assert_eq!(
            classify_origin(&s(&[(2, 0, 1.0), (0, 4, -1.0)])).unwrap(),
            PointClass::HyperbolicCuspOfGauss
        );
    }

    #[test]
    fn cusp_of_gauss_uses_completed_square() {
        // x² + x y² + y⁴/8: residual 1/8 − 1/4 < 0, so two tangential arcs.
        assert_eq!(
            classify_origin(&s(&[(2, 0, 1.0), (1, 2, 1.0), (0, 4, 0.125)])).unwrap(),
            PointClass::HyperbolicCuspOfGauss
        );
        // x² + x y² + y⁴/4 is (x + y²/2)²: degenerate.
        assert!(matches!(
            classify_origin(&s(&[(2, 0, 1.0), (1, 2, 1.0), (0, 4, 0.25)])),
            Err(Error::DegenerateContact(_))
        ));
    }

    #[test]
    fn parabolic_with_tilted_kernel() {
        // (x + y)² + y³ rotated: the kernel is along (1, -1).
        let f = s(&[(2, 0, 1.0), (1, 1, 2.0), (0, 2, 1.0), (0, 3, 1.0)]);
        assert_eq!(classify_origin(&f).unwrap(), PointClass::Parabolic);
    }

    #[test]
    fn degenerate_hessian_is_an_error() {
        assert!(matches!(
            classify_origin(&s(&[(3, 0, 1.0), (0, 3, 1.0)])),
            Err(Error::DegenerateContact(_))
        ));
    }

    #[test]
    fn umbilic_already_normalised() {
        let f = s(&[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 1.0), (1, 2, 1.0), (0, 3, 1.0)]);
        let n = normalize_umbilic(&f).unwrap();
        assert_eq!(n.angle, 0.0);
        assert!(n.generic);
        let [b0, b1, b2, b3] = n.surface.cubic();
        assert_eq!((b0, b1, b2, b3), (1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn not_umbilic_is_rejected() {
        let f = s(&[(2, 0, 1.0), (0, 2, -1.0), (3, 0, 1.0)]);
        assert!(matches!(normalize_umbilic(&f), Err(Error::NotUmbilic(_))));
    }

    #[test]
    fn surface_file_round_trip() {
        let f = s(&[(2, 0, 1.0), (0, 2, 2.0), (3, 0, -0.5)]);
        let text = serde_json::to_string(&SurfaceFile::from_surface(&f)).unwrap();
        let g: SurfaceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(g.into_surface().unwrap().poly(), f.poly());
    }
}
