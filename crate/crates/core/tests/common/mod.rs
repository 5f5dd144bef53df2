//! Surfaces and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use isoskel::{MongeSurface, Vec2};

pub fn surface(terms: &[(usize, usize, f64)], radius: f64) -> MongeSurface {
    MongeSurface::from_terms(terms, radius).unwrap()
}

pub const ELLIPSE: &[(usize, usize, f64)] = &[(2, 0, 1.0), (0, 2, 2.0)];
pub const CIRCLE: &[(usize, usize, f64)] = &[(2, 0, 1.0), (0, 2, 1.0)];
/// Umbilic x² + y² + x³ − xy² + 2y³.
pub const UMBILIC: &[(usize, usize, f64)] = &[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 1.0), (1, 2, -1.0), (0, 3, 2.0)];
/// Umbilic with equal x³ and xy² coefficients: x² + y² + x³ + xy² + y³.
pub const UMBILIC_NORMALISED: &[(usize, usize, f64)] =
    &[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 1.0), (1, 2, 1.0), (0, 3, 1.0)];
/// x² − y² + x³ + 2x²y − xy² + y³.
pub const FAMILY_AT_ONE: &[(usize, usize, f64)] = &[
    (2, 0, 1.0),
    (0, 2, -1.0),
    (3, 0, 1.0),
    (2, 1, 2.0),
    (1, 2, -1.0),
    (0, 3, 1.0),
];

/// A closed curve sampled by a parameter on `[0, 2π)`, returning the point
/// and its outward unit normal.
pub trait ClosedCurve {
    fn at(&self, theta: f64) -> (Vec2, Vec2);
}

/// `x²/a² + y²/b² = 1` in its trigonometric parametrisation.
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
}

impl ClosedCurve for Ellipse {
    fn at(&self, t: f64) -> (Vec2, Vec2) {
        let p = Vec2::new(self.a * t.cos(), self.b * t.sin());
        let n = Vec2::new(t.cos() / self.a, t.sin() / self.b);
        (p, n / n.norm())
    }
}

/// A star-shaped level `{f = k}` around the origin, located along each ray
/// by bisection on the radius.
pub struct RadialLevel<F: Fn(f64, f64) -> (f64, f64, f64)> {
    /// Returns `(f, f_x, f_y)`.
    pub f: F,
    pub k: f64,
    pub r_max: f64,
}

impl<F: Fn(f64, f64) -> (f64, f64, f64)> ClosedCurve for RadialLevel<F> {
    fn at(&self, theta: f64) -> (Vec2, Vec2) {
        let (c, s) = (theta.cos(), theta.sin());
        let g = |r: f64| (self.f)(r * c, r * s).0 - self.k;
        let (mut lo, mut hi) = (0.0, self.r_max);
        assert!(g(lo) < 0.0 && g(hi) > 0.0, "level does not cross the ray at {theta}");
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        let (_, fx, fy) = (self.f)(r * c, r * s);
        let n = Vec2::new(fx, fy);
        (Vec2::new(r * c, r * s), n / n.norm())
    }
}

/// Value and gradient of x² + y² + x³ − xy² + 2y³.
pub fn umbilic_f(x: f64, y: f64) -> (f64, f64, f64) {
    (
        x * x + y * y + x * x * x - x * y * y + 2.0 * y * y * y,
        2.0 * x + 3.0 * x * x - y * y,
        2.0 * y - 2.0 * x * y + 6.0 * y * y,
    )
}

/// Centres of bitangent circles found by a dense double loop over `m`
/// parameter values, with marching-squares connectivity.
pub struct BitangencyOracle {
    pub centres: Vec<Vec2>,
    pub segments: Vec<(usize, usize)>,
}

/// `(p1 − p2)·(N1 + N2)`, which also vanishes for antiparallel normals.
fn sum_residual(a: (Vec2, Vec2), b: (Vec2, Vec2)) -> f64 {
    (a.0 - b.0).dot(&(a.1 + b.1))
}

/// `(p1 − p2) × (N1 − N2)`, which also vanishes for parallel normals.
fn difference_residual(a: (Vec2, Vec2), b: (Vec2, Vec2)) -> f64 {
    let d = a.0 - b.0;
    let e = a.1 - b.1;
    d.x * e.y - d.y * e.x
}

/// Centre of the circle tangent at `b` through `a`, and its disagreement with
/// the circle tangent at `a` through `b`.
fn centre_and_mismatch(a: (Vec2, Vec2), b: (Vec2, Vec2)) -> Option<(Vec2, f64)> {
    let d = a.0 - b.0;
    let (db, da) = (d.dot(&b.1), d.dot(&a.1));
    if db.abs() < 1e-300 || da.abs() < 1e-300 {
        return None;
    }
    let cb = b.0 + b.1 * (d.norm_squared() / (2.0 * db));
    let ca = a.0 - a.1 * (d.norm_squared() / (2.0 * da));
    Some(((ca + cb) * 0.5, (ca - cb).norm()))
}

/// Union of scans on two residuals whose spurious zeros differ, so that a
/// genuine curve tangent to one spurious locus is still seen by the other.
pub fn brute_force_bitangency(curve: &impl ClosedCurve, m: usize, guard: usize, mismatch_tol: f64) -> BitangencyOracle {
    let mut out = BitangencyOracle {
        centres: Vec::new(),
        segments: Vec::new(),
    };
    for residual in [sum_residual, difference_residual] {
        let part = scan(curve, m, guard, mismatch_tol, residual);
        let offset = out.centres.len();
        out.centres.extend(part.centres);
        out.segments
            .extend(part.segments.into_iter().map(|(a, b)| (a + offset, b + offset)));
    }
    out
}

fn scan(
    curve: &impl ClosedCurve,
    m: usize,
    guard: usize,
    mismatch_tol: f64,
    bitangency_residual: fn((Vec2, Vec2), (Vec2, Vec2)) -> f64,
) -> BitangencyOracle {
    let theta = |i: usize| 2.0 * PI * (i % m) as f64 / m as f64;
    let samples: Vec<(Vec2, Vec2)> = (0..m).map(|i| curve.at(theta(i))).collect();
    let residual = |i: usize, j: usize| bitangency_residual(samples[i % m], samples[j % m]);
    let gap = |i: usize, j: usize| {
        let d = (i % m).abs_diff(j % m);
        d.min(m - d)
    };

    // Root on the edge from (i, j) to (i + 1, j) when `along_first`, else to
    // (i, j + 1); refined by bisection on the curve itself.
    let root = |i: usize, j: usize, along_first: bool| -> Option<Vec2> {
        let (r0, r1) = if along_first {
            (residual(i, j), residual(i + 1, j))
        } else {
            (residual(i, j), residual(i, j + 1))
        };
        if (r0 > 0.0) == (r1 > 0.0) {
            return None;
        }
        let (fixed, mut lo, mut hi) = if along_first {
            (samples[j % m], theta(i), theta(i) + 2.0 * PI / m as f64)
        } else {
            (samples[i % m], theta(j), theta(j) + 2.0 * PI / m as f64)
        };
        let moving = |t: f64| curve.at(t);
        let sign0 = r0 > 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let r = bitangency_residual(moving(mid), fixed);
            let r = if along_first { r } else { -r };
            if (r > 0.0) == sign0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = moving(0.5 * (lo + hi));
        let (c, mismatch) = centre_and_mismatch(p, fixed)?;
        (mismatch <= mismatch_tol).then_some(c)
    };

    let mut centres = Vec::new();
    let mut segments = Vec::new();
    let mut edge_index = std::collections::HashMap::new();
    let mut lookup = |key: (usize, usize, bool), centres: &mut Vec<Vec2>| -> Option<usize> {
        *edge_index.entry(key).or_insert_with(|| {
            root(key.0, key.1, key.2).map(|c| {
                centres.push(c);
                centres.len() - 1
            })
        })
    };
    for i in 0..m {
        for j in (i + 1)..m {
            let near = [gap(i, j), gap(i + 1, j), gap(i, j + 1), gap(i + 1, j + 1)]
                .into_iter()
                .min()
                .unwrap();
            if near <= guard {
                continue;
            }
            // Where the residual vanishes identically (antipodal points of a
            // centrally symmetric curve) no sign change is seen; accept nodes
            // that are bitangent to rounding.
            if residual(i, j).abs() <= 1e-14 {
                if let Some((c, mismatch)) = centre_and_mismatch(samples[i], samples[j]) {
                    if mismatch <= mismatch_tol {
                        centres.push(c);
                    }
                }
            }
            let edges = [(i, j, true), (i, j + 1, true), (i, j, false), (i + 1, j, false)];
            let found: Vec<usize> = edges
                .iter()
                .map(|&(a, b, f)| (a % m, b % m, f))
                .filter_map(|key| lookup(key, &mut centres))
                .collect();
            if found.len() == 2 {
                segments.push((found[0], found[1]));
            }
        }
    }
    BitangencyOracle { centres, segments }
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

/// Largest distance from a point of `from` (within `from_cut` of the origin)
/// to the polyline set `to` (restricted to `to_cut`).
pub fn directed_hausdorff(
    from: &[Vec2],
    to_points: &[Vec2],
    to_segments: &[(usize, usize)],
    from_cut: f64,
    to_cut: f64,
) -> f64 {
    let inside = |p: &Vec2, cut: f64| p.norm() <= cut;
    let segs: Vec<(Vec2, Vec2)> = to_segments
        .iter()
        .map(|&(a, b)| (to_points[a], to_points[b]))
        .filter(|(a, b)| inside(a, to_cut) && inside(b, to_cut))
        .collect();
    let pts: Vec<Vec2> = to_points.iter().copied().filter(|p| inside(p, to_cut)).collect();
    from.iter()
        .filter(|p| inside(p, from_cut))
        .map(|&p| {
            let by_point = pts.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
            let by_segment = segs
                .iter()
                .map(|&(a, b)| point_segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min);
            by_point.min(by_segment)
        })
        .fold(0.0, f64::max)
}
