//! Pre-symmetry set, symmetry set and medial axis of traced level branches.
//!
//! The pre-symmetry set lives on unordered pairs of curve parameters. Each
//! branch is resampled to `grid_n` points; the bitangency residual
//! `(p1 − p2)·(N1 + N2)` is evaluated on the product grid and its zero set is
//! extracted by marching squares. Edges are keyed by their unordered end
//! nodes so the folded square (and the torus of a closed branch) glues up
//! without seams.

use std::collections::HashMap;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{FeatureDetector, FeatureKind};
use crate::field::{ScalarField, Vec2};
use crate::levelcurve::{locate, resample_by_arclength, LevelBranch};
use crate::surface::MongeSurface;

/// The circle `x² + y² + 2ax + 2by + c = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Circle {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Circle {
    pub fn from_centre_radius(centre: Vec2, radius: f64) -> Self {
        Circle {
            a: -centre.x,
            b: -centre.y,
            c: centre.norm_squared() - radius * radius,
        }
    }

    pub fn centre(&self) -> Vec2 {
        Vec2::new(-self.a, -self.b)
    }

    pub fn radius_squared(&self) -> f64 {
        self.a * self.a + self.b * self.b - self.c
    }

    pub fn radius(&self) -> f64 {
        self.radius_squared().max(0.0).sqrt()
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        p.norm_squared() + 2.0 * self.a * p.x + 2.0 * self.b * p.y + self.c
    }
}

/// The circle through three points.
pub fn circle_through(p1: Vec2, p2: Vec2, p3: Vec2) -> Result<Circle> {
    let (d2, d3) = (p2 - p1, p3 - p1);
    let det = d2.perp(&d3);
    if det.abs() <= 1e-12 * d2.norm() * d3.norm() || det == 0.0 {
        return Err(Error::CollinearPoints);
    }
    // 2a dx + 2b dy = −(|p_i|² − |p1|²)
    let r2 = -(p2.norm_squared() - p1.norm_squared());
    let r3 = -(p3.norm_squared() - p1.norm_squared());
    let a = (r2 * d3.y - r3 * d2.y) / (2.0 * det);
    let b = (d2.x * r3 - d3.x * r2) / (2.0 * det);
    let c = -p1.norm_squared() - 2.0 * a * p1.x - 2.0 * b * p1.y;
    Ok(Circle { a, b, c })
}

/// Position, outward unit normal `∇f/|∇f|` and curvature at a curve point.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Frame {
    pub p: Vec2,
    pub n: Vec2,
    pub kappa: f64,
}

impl Frame {
    pub fn at<F: ScalarField>(field: &F, p: Vec2) -> Frame {
        let g = field.gradient(p);
        Frame {
            p,
            n: g / g.norm(),
            kappa: field.level_curvature(p),
        }
    }
}

/// Residual, signed radius along the first normal, and centre mismatch of
/// the common tangent circle to two curve points.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Bitangency {
    pub residual: f64,
    pub radius: f64,
    pub centre: Vec2,
    pub mismatch: f64,
}

pub(crate) fn bitangency(f1: &Frame, f2: &Frame) -> Bitangency {
    let d = f1.p - f2.p;
    let dn = f2.n - f1.n;
    let residual = d.dot(&(f1.n + f2.n));
    let radius = d.dot(&dn) / dn.norm_squared();
    let c1 = f1.p + f1.n * radius;
    let c2 = f2.p + f2.n * radius;
    Bitangency {
        residual,
        radius,
        centre: (c1 + c2) * 0.5,
        mismatch: (c1 - c2).norm(),
    }
}

/// Unit bisector of the two normals, of arbitrary sign. Bitangent pairs are
/// exactly the zeros of `(p1 − p2)·m`; the residual `(p1 − p2)·(N1 + N2)`
/// additionally vanishes where the normals are antiparallel.
pub(crate) fn bisector(f1: &Frame, f2: &Frame) -> Vec2 {
    let sum = f1.n + f2.n;
    let diff = f1.n - f2.n;
    if sum.norm_squared() >= diff.norm_squared() {
        sum / sum.norm()
    } else {
        Vec2::new(diff.y, -diff.x) / diff.norm()
    }
}

/// `(p1 − p2)·m` with the bisector turned to agree with `reference`.
pub(crate) fn aligned_residual(f1: &Frame, f2: &Frame, reference: Vec2) -> f64 {
    let m = bisector(f1, f2);
    let m = if m.dot(&reference) < 0.0 { -m } else { m };
    (f1.p - f2.p).dot(&m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Contact {
    pub branch: usize,
    pub arclength: f64,
    /// 1 for tangency, 2 for osculation, 3 at a vertex.
    pub order: u8,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PreSSPair {
    pub branch_s: usize,
    pub s: f64,
    pub branch_t: usize,
    pub t: f64,
    pub circle: Circle,
    /// Signed radius along the outward normal at the `s` contact.
    pub signed_radius: f64,
}

impl PreSSPair {
    pub fn centre(&self) -> Vec2 {
        self.circle.centre()
    }
}

#[derive(Clone, Debug)]
pub struct PreSymmetrySet {
    /// Branches as resampled for the scan; arclengths refer to these.
    pub branches: Vec<LevelBranch>,
    pub pairs: Vec<PreSSPair>,
    /// Marching-squares segments between entries of `pairs`.
    pub segments: Vec<(usize, usize)>,
    /// Every pair of points is bitangent (a circle).
    pub degenerate_all_pairs: bool,
    pub grid_n: usize,
    pub guard_cells: usize,
}

impl PreSymmetrySet {
    /// Connected chains of pairs, each ordered along the curve of zeros.
    pub fn polylines(&self) -> Vec<Vec<usize>> {
        chain(self.pairs.len(), &self.segments)
    }
}

fn chain(n: usize, segments: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in segments {
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut used = vec![false; n];
    let mut out = Vec::new();
    let walk = |start: usize, used: &mut Vec<bool>| {
        let mut line = vec![start];
        used[start] = true;
        let mut cur = start;
        while let Some(&next) = adj[cur].iter().find(|&&m| !used[m]) {
            used[next] = true;
            line.push(next);
            cur = next;
        }
        line
    };
    // Open chains first, starting from their ends.
    for i in 0..n {
        if !used[i] && adj[i].len() == 1 {
            out.push(walk(i, &mut used));
        }
    }
    for i in 0..n {
        if !used[i] && !adj[i].is_empty() {
            let mut line = walk(i, &mut used);
            if adj[*line.last().unwrap()].contains(&i) && line.len() > 2 {
                line.push(i);
            }
            out.push(line);
        }
    }
    out
}

/// Branch geometry at arbitrary arclength.
pub(crate) struct Curves<'a> {
    pub surface: &'a MongeSurface,
    pub branches: &'a [LevelBranch],
}

impl<'a> Curves<'a> {
    pub fn wrap(&self, b: usize, s: f64) -> f64 {
        let br = &self.branches[b];
        if br.closed {
            s.rem_euclid(br.length())
        } else {
            s.clamp(0.0, br.length())
        }
    }

    pub fn frame(&self, b: usize, s: f64) -> Frame {
        let s = self.wrap(b, s);
        Frame::at(self.surface, locate(self.surface, &self.branches[b], s))
    }

    /// Parameter distance along one branch, respecting periodicity.
    pub fn param_gap(&self, b: usize, s: f64, t: f64) -> f64 {
        let br = &self.branches[b];
        let d = (s - t).abs();
        if br.closed {
            d.min(br.length() - d)
        } else {
            d
        }
    }
}

type Node = ((usize, usize), (usize, usize));

fn node(p: (usize, usize), q: (usize, usize)) -> Node {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

fn edge_key(a: Node, b: Node) -> (Node, Node) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Debug)]
pub struct PreSsOptions {
    pub grid_n: usize,
    pub guard_cells: usize,
    /// Centre mismatch, relative to the chord, above which a zero of the
    /// residual is rejected (antipodal normals also zero it).
    pub mismatch_tol: f64,
}

impl Default for PreSsOptions {
    fn default() -> Self {
        PreSsOptions {
            grid_n: 256,
            guard_cells: 2,
            mismatch_tol: 1e-6,
        }
    }
}

/// Fine lattice points per grid step used to probe each cell.
const SUBDIVISIONS: usize = 4;

struct Cell {
    p: [(usize, usize); 2],
    q: [(usize, usize); 2],
}

pub fn compute_pre_ss(surface: &MongeSurface, branches: &[LevelBranch], grid_n: usize) -> Result<PreSymmetrySet> {
    compute_pre_ss_with(
        surface,
        branches,
        &PreSsOptions {
            grid_n,
            ..Default::default()
        },
    )
}

pub fn compute_pre_ss_with(
    surface: &MongeSurface,
    branches: &[LevelBranch],
    opts: &PreSsOptions,
) -> Result<PreSymmetrySet> {
    let n = opts.grid_n;
    let resampled: Vec<LevelBranch> = branches
        .iter()
        .map(|b| resample_by_arclength(surface, b, n))
        .collect::<Result<_>>()?;
    let frames: Vec<Vec<Frame>> = resampled
        .iter()
        .map(|b| b.samples.iter().map(|s| Frame::at(surface, s.position)).collect())
        .collect();
    // Number of distinct grid nodes per branch and number of cells.
    let counts: Vec<(usize, usize)> = resampled
        .iter()
        .map(|b| if b.closed { (n, n) } else { (n, n - 1) })
        .collect();
    let next = |b: usize, u: usize| if resampled[b].closed { (u + 1) % n } else { u + 1 };
    let gap = |b: usize, u: usize, v: usize| {
        let d = u.abs_diff(v);
        if resampled[b].closed {
            d.min(n - d)
        } else {
            d
        }
    };

    let mut cells = Vec::new();
    for bi in 0..resampled.len() {
        for bj in bi..resampled.len() {
            for u in 0..counts[bi].1 {
                for v in 0..counts[bj].1 {
                    if bi == bj {
                        if u >= v {
                            continue;
                        }
                        let (u1, v1) = (next(bi, u), next(bj, v));
                        let min_gap = gap(bi, u, v)
                            .min(gap(bi, u1, v))
                            .min(gap(bi, u, v1))
                            .min(gap(bi, u1, v1));
                        if min_gap <= opts.guard_cells {
                            continue;
                        }
                    }
                    cells.push(Cell {
                        p: [(bi, u), (bi, next(bi, u))],
                        q: [(bj, v), (bj, next(bj, v))],
                    });
                }
            }
        }
    }

    let residual = |p: (usize, usize), q: (usize, usize)| bitangency(&frames[p.0][p.1], &frames[q.0][q.1]).residual;

    // A circle makes every pair bitangent.
    let scale = resampled
        .iter()
        .flat_map(|b| b.samples.iter().map(|s| s.position.norm()))
        .fold(0.0f64, f64::max);
    let all_zero = !cells.is_empty()
        && cells
            .iter()
            .all(|c| residual(c.p[0], c.q[0]).abs() <= 1e-9 * scale.max(1e-300));
    if all_zero {
        return Ok(PreSymmetrySet {
            branches: resampled,
            pairs: vec![],
            segments: vec![],
            degenerate_all_pairs: true,
            grid_n: n,
            guard_cells: opts.guard_cells,
        });
    }

    let curves = Curves {
        surface,
        branches: &resampled,
    };
    let step: Vec<f64> = resampled
        .iter()
        .map(|b| b.length() / if b.closed { n as f64 } else { (n - 1) as f64 })
        .collect();
    // Each cell is probed on a finer lattice; nodes below are fine indices.
    let fstep: Vec<f64> = step.iter().map(|s| s / SUBDIVISIONS as f64).collect();
    let fparam = |p: (usize, usize)| p.1 as f64 * fstep[p.0];
    let fine = |b: usize, u: usize, k: usize| {
        let f = SUBDIVISIONS * u + k;
        if resampled[b].closed {
            (b, f % (SUBDIVISIONS * n))
        } else {
            (b, f)
        }
    };
    let fine_frames: Vec<Vec<Frame>> = resampled
        .par_iter()
        .enumerate()
        .map(|(b, br)| {
            let m = if br.closed {
                SUBDIVISIONS * n
            } else {
                SUBDIVISIONS * (n - 1) + 1
            };
            (0..m)
                .map(|f| {
                    if f % SUBDIVISIONS == 0 {
                        frames[b][f / SUBDIVISIONS]
                    } else {
                        curves.frame(b, f as f64 * fstep[b])
                    }
                })
                .collect()
        })
        .collect();
    let fine_residual = |p: (usize, usize), q: (usize, usize), reference: Vec2| {
        aligned_residual(&fine_frames[p.0][p.1], &fine_frames[q.0][q.1], reference)
    };

    // Crossing on the fine edge leaving `start` along its branch, with the
    // other contact held at `fixed`.
    let refine =
        |fixed: (usize, usize), start: (usize, usize), fixed_first: bool, reference: Vec2| -> Option<PreSSPair> {
            let ff = fine_frames[fixed.0][fixed.1];
            let b = start.0;
            let s0 = fparam(start);
            let mut lo = 0.0;
            let mut hi = fstep[b];
            let pair = |h: f64| {
                let fm = curves.frame(b, s0 + h);
                if fixed_first {
                    (ff, fm)
                } else {
                    (fm, ff)
                }
            };
            let eval = |h: f64| {
                let (f1, f2) = pair(h);
                aligned_residual(&f1, &f2, reference)
            };
            let r_lo = eval(lo);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                let r = eval(mid);
                if r == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (r > 0.0) == (r_lo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * step[b].max(1e-300) * n as f64 {
                    break;
                }
            }
            let h = 0.5 * (lo + hi);
            let (f1, f2) = pair(h);
            let bt = bitangency(&f1, &f2);
            let chord = (ff.p - curves.frame(b, s0 + h).p).norm();
            if !(bt.mismatch <= opts.mismatch_tol * chord) || !bt.radius.is_finite() {
                return None;
            }
            let sm = curves.wrap(b, s0 + h);
            let sf = fparam(fixed);
            let ((bs, s), (bt_, t)) = if fixed_first {
                ((fixed.0, sf), (b, sm))
            } else {
                ((b, sm), (fixed.0, sf))
            };
            // Orient so the first contact is the lexicographically smaller one.
            let (bs, s, bt_, t, radius) = if (bs, s) <= (bt_, t) {
                (bs, s, bt_, t, bt.radius)
            } else {
                (bt_, t, bs, s, bt.radius)
            };
            Some(PreSSPair {
                branch_s: bs,
                s,
                branch_t: bt_,
                t,
                circle: Circle::from_centre_radius(bt.centre, bt.radius.abs()),
                signed_radius: radius,
            })
        };

    type Edge = (Node, Node);
    type Crossing = (Edge, Option<PreSSPair>);
    // Marching squares on the rectangle `ps × qs`, whose sides span fine
    // edges carrying at most one sign change each.
    let march = |ps: &[(usize, usize)], qs: &[(usize, usize)], val: &dyn Fn(usize, usize) -> f64, reference: Vec2| {
        let l = ps.len() - 1;
        let positive = |a: usize, b: usize| val(a, b) > 0.0;
        let along_p = |b: usize| -> Option<Crossing> {
            let a = (0..l).find(|&a| positive(a, b) != positive(a + 1, b))?;
            let key = edge_key(node(ps[a], qs[b]), node(ps[a + 1], qs[b]));
            Some((key, refine(qs[b], ps[a], false, reference)))
        };
        let along_q = |a: usize| -> Option<Crossing> {
            let b = (0..l).find(|&b| positive(a, b) != positive(a, b + 1))?;
            let key = edge_key(node(ps[a], qs[b]), node(ps[a], qs[b + 1]));
            Some((key, refine(ps[a], qs[b], true, reference)))
        };
        // Edges are 0:bottom 1:right 2:top 3:left; corner 0 is shared by
        // edges 3 and 0.
        let crossings: Vec<Crossing> = [along_p(0), along_q(l), along_p(l), along_q(0)]
            .into_iter()
            .flatten()
            .collect();
        let mut segs = Vec::new();
        match crossings.len() {
            2 => segs.push((crossings[0], crossings[1])),
            4 => {
                // Saddle: the centre value decides which corners connect.
                let half = 0.5 * l as f64;
                let sp = fparam(ps[0]) + half * fstep[ps[0].0];
                let sq = fparam(qs[0]) + half * fstep[qs[0].0];
                let centre = aligned_residual(&curves.frame(ps[0].0, sp), &curves.frame(qs[0].0, sq), reference);
                if (centre > 0.0) == positive(0, 0) {
                    segs.push((crossings[0], crossings[1]));
                    segs.push((crossings[2], crossings[3]));
                } else {
                    segs.push((crossings[0], crossings[3]));
                    segs.push((crossings[1], crossings[2]));
                }
            }
            _ => {}
        }
        segs
    };

    let results: Vec<Vec<(Crossing, Crossing)>> = cells
        .par_iter()
        .map(|c| {
            let ps: Vec<_> = (0..=SUBDIVISIONS).map(|k| fine(c.p[0].0, c.p[0].1, k)).collect();
            let qs: Vec<_> = (0..=SUBDIVISIONS).map(|k| fine(c.q[0].0, c.q[0].1, k)).collect();
            let reference = bisector(&fine_frames[ps[0].0][ps[0].1], &fine_frames[qs[0].0][qs[0].1]);
            let grid: Vec<Vec<f64>> = ps
                .iter()
                .map(|&p| qs.iter().map(|&q| fine_residual(p, q, reference)).collect())
                .collect();
            let positive = |a: usize, b: usize| grid[a][b] > 0.0;
            let l = SUBDIVISIONS;
            let changes = |pts: &[(usize, usize)]| {
                pts.windows(2)
                    .filter(|w| positive(w[0].0, w[0].1) != positive(w[1].0, w[1].1))
                    .count()
            };
            let side = |f: &dyn Fn(usize) -> (usize, usize)| changes(&(0..=l).map(f).collect::<Vec<_>>());
            let folded =
                side(&|a| (a, 0)) > 1 || side(&|a| (a, l)) > 1 || side(&|b| (0, b)) > 1 || side(&|b| (l, b)) > 1;
            let corner = positive(0, 0);
            let uniform_corners = [(l, 0), (l, l), (0, l)].iter().all(|&(a, b)| positive(a, b) == corner);
            let island = uniform_corners && grid.iter().flatten().any(|&v| (v > 0.0) != corner);
            if folded || island {
                // A zero curve enters and leaves through one side, or lies
                // wholly inside: resolve it on the fine lattice.
                let mut segs = Vec::new();
                for a in 0..l {
                    for b in 0..l {
                        segs.extend(march(
                            &ps[a..=a + 1],
                            &qs[b..=b + 1],
                            &|x, y| grid[a + x][b + y],
                            reference,
                        ));
                    }
                }
                segs
            } else {
                march(&ps, &qs, &|x, y| grid[x][y], reference)
            }
        })
        .collect();

    let mut index: HashMap<Edge, usize> = HashMap::new();
    let mut pairs = Vec::new();
    let mut segments = Vec::new();
    let mut intern = |key: Edge, pair: PreSSPair, pairs: &mut Vec<PreSSPair>| -> usize {
        *index.entry(key).or_insert_with(|| {
            pairs.push(pair);
            pairs.len() - 1
        })
    };
    for cell in results {
        for ((ka, pa), (kb, pb)) in cell {
            if let (Some(pa), Some(pb)) = (pa, pb) {
                let ia = intern(ka, pa, &mut pairs);
                let ib = intern(kb, pb, &mut pairs);
                segments.push((ia, ib));
            } else {
                // Keep isolated genuine crossings as points.
                if let Some(pa) = pa {
                    intern(ka, pa, &mut pairs);
                }
                if let Some(pb) = pb {
                    intern(kb, pb, &mut pairs);
                }
            }
        }
    }
    Ok(PreSymmetrySet {
        branches: resampled,
        pairs,
        segments,
        degenerate_all_pairs: false,
        grid_n: n,
        guard_cells: opts.guard_cells,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SsKind {
    A1A1,
    A1A1A1,
    A1A2,
    A3,
    Infinity,
}

impl SsKind {
    pub fn name(&self) -> &'static str {
        match self {
            SsKind::A1A1 => "A1A1",
            SsKind::A1A1A1 => "A1A1A1",
            SsKind::A1A2 => "A1A2",
            SsKind::A3 => "A3",
            SsKind::Infinity => "Infinity",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SSPoint {
    pub kind: SsKind,
    /// `None` at infinity.
    pub centre: Option<Vec2>,
    /// Asymptotic direction for points at infinity.
    pub direction: Option<Vec2>,
    pub radius: f64,
    pub contacts: Vec<Contact>,
    pub on_medial_axis: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SymmetrySet {
    /// Chains of bitangent centres.
    pub branches: Vec<Vec<SSPoint>>,
    pub endpoints: Vec<SSPoint>,
    pub cusps: Vec<SSPoint>,
    pub triple_crossings: Vec<SSPoint>,
    /// Set when every pair is bitangent: the single common centre.
    pub degenerate_centre: Option<SSPoint>,
    pub radius: f64,
}

impl SymmetrySet {
    pub fn points(&self) -> impl Iterator<Item = &SSPoint> {
        self.branches
            .iter()
            .flatten()
            .chain(self.endpoints.iter())
            .chain(self.cusps.iter())
            .chain(self.triple_crossings.iter())
            .chain(self.degenerate_centre.iter())
    }

    pub fn points_mut(&mut self) -> impl Iterator<Item = &mut SSPoint> {
        self.branches
            .iter_mut()
            .flatten()
            .chain(self.endpoints.iter_mut())
            .chain(self.cusps.iter_mut())
            .chain(self.triple_crossings.iter_mut())
            .chain(self.degenerate_centre.iter_mut())
    }
}

fn small_newton<const N: usize>(
    mut x: [f64; N],
    f: impl Fn(&[f64; N]) -> Option<[f64; N]>,
    steps: [f64; N],
    tol: f64,
) -> Option<[f64; N]> {
    for _ in 0..40 {
        let r = f(&x)?;
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= tol {
            return Some(x);
        }
        let mut jac = vec![[0.0; N]; N];
        for j in 0..N {
            let mut xp = x;
            let mut xm = x;
            xp[j] += steps[j];
            xm[j] -= steps[j];
            let (rp, rm) = (f(&xp)?, f(&xm)?);
            for i in 0..N {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * steps[j]);
            }
        }
        let dx: Vec<f64> = match N {
            2 => {
                let m = Matrix2::new(jac[0][0], jac[0][1], jac[1][0], jac[1][1]);
                let d = m.lu().solve(&Vector2::new(-r[0], -r[1]))?;
                vec![d[0], d[1]]
            }
            3 => {
                let m = Matrix3::from_fn(|i, j| jac[i][j]);
                let d = m.lu().solve(&Vector3::new(-r[0], -r[1], -r[2]))?;
                vec![d[0], d[1], d[2]]
            }
            _ => unreachable!("only 2x2 and 3x3 systems are solved here"),
        };
        for j in 0..N {
            x[j] += dx[j];
        }
    }
    let r = f(&x)?;
    (r.iter().map(|v| v * v).sum::<f64>().sqrt() <= tol * 1e3).then_some(x)
}

fn contact(b: usize, s: f64, order: u8) -> Contact {
    Contact {
        branch: b,
        arclength: s,
        order,
    }
}

/// Chains the pre-symmetry set into symmetry-set branches and labels the
/// special points.
pub fn compute_ss(surface: &MongeSurface, pre: &PreSymmetrySet) -> SymmetrySet {
    let radius = surface.radius();
    let curves = Curves {
        surface,
        branches: &pre.branches,
    };
    let mut ss = SymmetrySet {
        radius,
        ..Default::default()
    };

    if pre.degenerate_all_pairs {
        let b = &pre.branches[0];
        let centres: Vec<Vec2> = b
            .samples
            .iter()
            .map(|s| {
                let f = Frame::at(surface, s.position);
                f.p - f.n / f.kappa
            })
            .collect();
        let c = centres.iter().fold(Vec2::zeros(), |a, b| a + b) / centres.len() as f64;
        let r = (b.samples[0].position - c).norm();
        ss.degenerate_centre = Some(SSPoint {
            kind: SsKind::A1A1,
            centre: Some(c),
            direction: None,
            radius: r,
            contacts: vec![contact(0, 0.0, 1)],
            on_medial_axis: false,
        });
        return ss;
    }

    let infinity_radius = 1e3 * radius;
    let to_point = |p: &PreSSPair| {
        let contacts = vec![contact(p.branch_s, p.s, 1), contact(p.branch_t, p.t, 1)];
        if p.signed_radius.abs() > infinity_radius {
            let f = curves.frame(p.branch_s, p.s);
            SSPoint {
                kind: SsKind::Infinity,
                centre: None,
                direction: Some(f.n * p.signed_radius.signum()),
                radius: f64::INFINITY,
                contacts,
                on_medial_axis: false,
            }
        } else {
            SSPoint {
                kind: SsKind::A1A1,
                centre: Some(p.centre()),
                direction: None,
                radius: p.signed_radius.abs(),
                contacts,
                on_medial_axis: false,
            }
        }
    };

    let lines = pre.polylines();
    let step: Vec<f64> = pre
        .branches
        .iter()
        .map(|b| {
            b.length()
                / if b.closed {
                    pre.grid_n as f64
                } else {
                    (pre.grid_n - 1) as f64
                }
        })
        .collect();

    // Vertices of each branch for snapping endpoints.
    let detector = FeatureDetector::new(surface);
    let vertices: Vec<Vec<(f64, Vec2, f64)>> = pre
        .branches
        .iter()
        .enumerate()
        .map(|(i, b)| {
            detector
                .find_features(b, i)
                .into_iter()
                .filter(|f| f.kind != FeatureKind::Inflexion)
                .map(|f| (f.arclength, f.position, f.curvature))
                .collect()
        })
        .collect();
    let mut used_vertices: Vec<Vec<bool>> = vertices.iter().map(|v| vec![false; v.len()]).collect();

    for line in &lines {
        ss.branches
            .push(line.iter().map(|&i| to_point(&pre.pairs[i])).collect());

        // Endpoints next to the diagonal.
        let ends = if line.len() > 1 && line.first() != line.last() {
            vec![line[0], *line.last().unwrap()]
        } else if line.len() == 1 {
            vec![line[0]]
        } else {
            vec![]
        };
        for e in ends {
            let p = &pre.pairs[e];
            if p.branch_s != p.branch_t {
                continue;
            }
            let b = p.branch_s;
            if curves.param_gap(b, p.s, p.t) > (pre.guard_cells as f64 + 3.0) * step[b] {
                continue;
            }
            let len = pre.branches[b].length();
            let mid = if pre.branches[b].closed && (p.t - p.s).abs() > 0.5 * len {
                (0.5 * (p.s + p.t + len)).rem_euclid(len)
            } else {
                0.5 * (p.s + p.t)
            };
            let best = vertices[b]
                .iter()
                .enumerate()
                .filter(|(j, _)| !used_vertices[b][*j])
                .min_by(|x, y| {
                    curves
                        .param_gap(b, x.1 .0, mid)
                        .total_cmp(&curves.param_gap(b, y.1 .0, mid))
                });
            if let Some((j, &(sv, pv, kappa))) = best {
                if curves.param_gap(b, sv, mid) > (pre.guard_cells as f64 + 4.0) * step[b] {
                    continue;
                }
                used_vertices[b][j] = true;
                let f = Frame::at(surface, pv);
                ss.endpoints.push(SSPoint {
                    kind: SsKind::A3,
                    centre: Some(f.p - f.n / kappa),
                    direction: None,
                    radius: 1.0 / kappa.abs(),
                    contacts: vec![contact(b, sv, 3)],
                    on_medial_axis: false,
                });
            }
        }

        // Cusps: the centre reverses its direction of travel.
        let centres: Vec<Option<Vec2>> = line
            .iter()
            .map(|&i| {
                let p = &pre.pairs[i];
                (p.signed_radius.abs() <= infinity_radius).then(|| p.centre())
            })
            .collect();
        for w in 1..line.len().saturating_sub(1) {
            let (Some(c0), Some(c1), Some(c2)) = (centres[w - 1], centres[w], centres[w + 1]) else {
                continue;
            };
            let (d0, d1) = (c1 - c0, c2 - c1);
            if d0.norm() == 0.0 || d1.norm() == 0.0 || d0.dot(&d1) >= -0.5 * d0.norm() * d1.norm() {
                continue;
            }
            if let Some(cusp) = refine_cusp(
                &curves,
                &pre.pairs[line[w - 1]],
                &pre.pairs[line[w]],
                &pre.pairs[line[w + 1]],
                &step,
            ) {
                let c = cusp.centre.unwrap();
                if !ss
                    .cusps
                    .iter()
                    .any(|q| (q.centre.unwrap() - c).norm() <= 1e-7 * radius && same_contacts(&curves, q, &cusp, &step))
                {
                    ss.cusps.push(cusp);
                }
            }
        }
    }

    ss.triple_crossings = find_triples(&curves, pre, &lines, &step, infinity_radius);
    ss
}

/// Every contact of `a` has a contact of `b` on the same branch within one
/// grid step.
fn same_contacts(curves: &Curves, a: &SSPoint, b: &SSPoint, step: &[f64]) -> bool {
    a.contacts.iter().all(|x| {
        b.contacts
            .iter()
            .any(|y| x.branch == y.branch && curves.param_gap(x.branch, x.arclength, y.arclength) <= step[x.branch])
    })
}

/// Osculation measure `1 + κ r`: zero when the circle is the circle of
/// curvature at that contact.
fn osculation(f: &Frame, r: f64) -> f64 {
    1.0 + f.kappa * r
}

fn refine_cusp(curves: &Curves, a: &PreSSPair, m: &PreSSPair, b: &PreSSPair, step: &[f64]) -> Option<SSPoint> {
    let (bs, bt) = (m.branch_s, m.branch_t);
    // Which contact osculates: its osculation measure changes sign.
    let g = |p: &PreSSPair| {
        let (fs, ft) = (curves.frame(p.branch_s, p.s), curves.frame(p.branch_t, p.t));
        (osculation(&fs, p.signed_radius), osculation(&ft, p.signed_radius))
    };
    let (ga, gm, gb) = (g(a), g(m), g(b));
    let flips = |x: f64, y: f64| (x > 0.0) != (y > 0.0);
    let on_s = flips(ga.0, gm.0) || flips(gm.0, gb.0);
    let on_t = flips(ga.1, gm.1) || flips(gm.1, gb.1);
    let first = match (on_s, on_t) {
        (true, false) => true,
        (false, true) => false,
        _ => gm.0.abs() <= gm.1.abs(),
    };
    let f = |x: &[f64; 2]| {
        let (fs, ft) = (curves.frame(bs, x[0]), curves.frame(bt, x[1]));
        let bt_ = bitangency(&fs, &ft);
        let osc = if first {
            osculation(&fs, bt_.radius)
        } else {
            osculation(&ft, bt_.radius)
        };
        let scale = (fs.p - ft.p).norm().max(1e-300);
        Some([bt_.residual / scale, osc])
    };
    let h = [1e-4 * step[bs], 1e-4 * step[bt]];
    let x = small_newton([m.s, m.t], f, h, 1e-13)?;
    let (fs, ft) = (curves.frame(bs, x[0]), curves.frame(bt, x[1]));
    let bt_ = bitangency(&fs, &ft);
    if bt_.mismatch > 1e-8 * (fs.p - ft.p).norm() {
        return None;
    }
    // Stay near the detected reversal.
    if curves.param_gap(bs, x[0], m.s) > 4.0 * step[bs] || curves.param_gap(bt, x[1], m.t) > 4.0 * step[bt] {
        return None;
    }
    let (o1, o2) = if first { (2, 1) } else { (1, 2) };
    Some(SSPoint {
        kind: SsKind::A1A2,
        centre: Some(bt_.centre),
        direction: None,
        radius: bt_.radius.abs(),
        contacts: vec![
            contact(bs, curves.wrap(bs, x[0]), o1),
            contact(bt, curves.wrap(bt, x[1]), o2),
        ],
        on_medial_axis: false,
    })
}

fn segments_intersect(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Option<(f64, f64)> {
    let da = a1 - a0;
    let db = b1 - b0;
    let den = da.perp(&db);
    if den == 0.0 {
        return None;
    }
    let w = b0 - a0;
    let t = w.perp(&db) / den;
    let u = w.perp(&da) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some((t, u))
}

fn find_triples(
    curves: &Curves,
    pre: &PreSymmetrySet,
    lines: &[Vec<usize>],
    step: &[f64],
    infinity_radius: f64,
) -> Vec<SSPoint> {
    struct Seg {
        a: usize,
        b: usize,
        line: usize,
        pos: usize,
    }
    let mut segs = Vec::new();
    for (li, line) in lines.iter().enumerate() {
        for (k, w) in line.windows(2).enumerate() {
            let (pa, pb) = (&pre.pairs[w[0]], &pre.pairs[w[1]]);
            if pa.signed_radius.abs() > infinity_radius || pb.signed_radius.abs() > infinity_radius {
                continue;
            }
            segs.push(Seg {
                a: w[0],
                b: w[1],
                line: li,
                pos: k,
            });
        }
    }
    let params = |p: &PreSSPair| [(p.branch_s, p.s), (p.branch_t, p.t)];
    let candidates: Vec<[(usize, f64); 3]> = (0..segs.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut found = Vec::new();
            let si = &segs[i];
            let (a0, a1) = (pre.pairs[si.a].centre(), pre.pairs[si.b].centre());
            for sj in &segs[i + 1..] {
                if sj.line == si.line && sj.pos.abs_diff(si.pos) <= 1 {
                    continue;
                }
                let (b0, b1) = (pre.pairs[sj.a].centre(), pre.pairs[sj.b].centre());
                if a0.x.max(a1.x) < b0.x.min(b1.x)
                    || b0.x.max(b1.x) < a0.x.min(a1.x)
                    || a0.y.max(a1.y) < b0.y.min(b1.y)
                    || b0.y.max(b1.y) < a0.y.min(a1.y)
                {
                    continue;
                }
                if segments_intersect(a0, a1, b0, b1).is_none() {
                    continue;
                }
                let (p, q) = (&pre.pairs[si.a], &pre.pairs[sj.a]);
                // Shared contact between the two bitangent pairs.
                for x in params(p) {
                    for y in params(q) {
                        if x.0 == y.0 && curves.param_gap(x.0, x.1, y.1) <= 3.0 * step[x.0] {
                            let others_p: Vec<(usize, f64)> = params(p).into_iter().filter(|z| *z != x).collect();
                            let others_q: Vec<(usize, f64)> = params(q).into_iter().filter(|z| *z != y).collect();
                            if let (Some(&op), Some(&oq)) = (others_p.first(), others_q.first()) {
                                found.push([x, op, oq]);
                            }
                        }
                    }
                }
            }
            found
        })
        .collect();

    let radius = curves.surface.radius();
    let mut out: Vec<SSPoint> = Vec::new();
    for [c1, c2, c3] in candidates {
        let f = |x: &[f64; 3]| {
            let f1 = curves.frame(c1.0, x[0]);
            let f2 = curves.frame(c2.0, x[1]);
            let f3 = curves.frame(c3.0, x[2]);
            let (b12, b13) = (bitangency(&f1, &f2), bitangency(&f1, &f3));
            let s12 = (f1.p - f2.p).norm().max(1e-300);
            let s13 = (f1.p - f3.p).norm().max(1e-300);
            Some([
                b12.residual / s12,
                b13.residual / s13,
                (b12.radius - b13.radius) / radius,
            ])
        };
        let h = [1e-4 * step[c1.0], 1e-4 * step[c2.0], 1e-4 * step[c3.0]];
        let Some(x) = small_newton([c1.1, c2.1, c3.1], f, h, 1e-13) else {
            continue;
        };
        let (f1, f2, f3) = (
            curves.frame(c1.0, x[0]),
            curves.frame(c2.0, x[1]),
            curves.frame(c3.0, x[2]),
        );
        let (b12, b13) = (bitangency(&f1, &f2), bitangency(&f1, &f3));
        let distinct = (f1.p - f2.p).norm() > 1e-6 * radius
            && (f1.p - f3.p).norm() > 1e-6 * radius
            && (f2.p - f3.p).norm() > 1e-6 * radius;
        if !distinct || b12.mismatch > 1e-8 * radius || b13.mismatch > 1e-8 * radius {
            continue;
        }
        let centre = (b12.centre + b13.centre) * 0.5;
        if out.iter().any(|q| (q.centre.unwrap() - centre).norm() <= 1e-7 * radius) {
            continue;
        }
        out.push(SSPoint {
            kind: SsKind::A1A1A1,
            centre: Some(centre),
            direction: None,
            radius: b12.radius.abs(),
            contacts: vec![
                contact(c1.0, curves.wrap(c1.0, x[0]), 1),
                contact(c2.0, curves.wrap(c2.0, x[1]), 1),
                contact(c3.0, curves.wrap(c3.0, x[2]), 1),
            ],
            on_medial_axis: false,
        });
    }
    out
}

/// Distance from `c` to a branch, refined around the nearest sample.
pub fn distance_to_branch(surface: &MongeSurface, branch: &LevelBranch, c: Vec2) -> f64 {
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, s) in branch.samples.iter().enumerate() {
        let d = (s.position - c).norm();
        if d < best {
            best = d;
            best_i = i;
        }
    }
    let samples = &branch.samples;
    let lo = samples[best_i.saturating_sub(1)].arclength;
    let hi = samples[(best_i + 1).min(samples.len() - 1)].arclength;
    let dist = |s: f64| (locate(surface, branch, s) - c).norm();
    // Golden-section search on the bracketing interval.
    let (mut a, mut b) = (lo, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (dist(x1), dist(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = dist(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = dist(x2);
        }
        if b - a < 1e-15 * (1.0 + b.abs()) {
            break;
        }
    }
    best.min(f1).min(f2)
}

/// Marks symmetry-set points whose circle is maximal: no branch comes closer
/// to the centre than the radius. Returns the marked points.
pub fn compute_ma(surface: &MongeSurface, ss: &mut SymmetrySet, branches: &[LevelBranch]) -> Vec<SSPoint> {
    let tol = 1e-6 * surface.radius();
    if let Some(c) = ss.degenerate_centre.as_mut() {
        c.on_medial_axis = true;
    }
    let mut marked = Vec::new();
    let points: Vec<&mut SSPoint> = ss.points_mut().collect();
    let flags: Vec<bool> = points
        .par_iter()
        .map(|p| match p.centre {
            Some(c) if p.kind != SsKind::Infinity => {
                let d = branches
                    .iter()
                    .map(|b| distance_to_branch(surface, b, c))
                    .fold(f64::INFINITY, f64::min);
                d >= p.radius - tol
            }
            _ => false,
        })
        .collect();
    for (p, flag) in points.into_iter().zip(flags) {
        p.on_medial_axis = flag;
        if flag {
            marked.push(p.clone());
        }
    }
    marked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelcurve::trace_level;

    #[test]
    fn circle_through_examples() {
        let c = circle_through(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0)).unwrap();
        assert!(c.a.abs() < 1e-15 && c.b.abs() < 1e-15 && (c.c + 1.0).abs() < 1e-15);
        let c = circle_through(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(1.0, 1.0)).unwrap();
        assert!((c.a + 1.0).abs() < 1e-15 && c.b.abs() < 1e-15 && c.c.abs() < 1e-15);
        assert!((c.radius() - 1.0).abs() < 1e-15);
        assert!(matches!(
            circle_through(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)),
            Err(Error::CollinearPoints)
        ));
    }

    #[test]
    fn bitangency_of_mirror_points() {
        let f1 = Frame {
            p: Vec2::new(1.0, 0.5),
            n: Vec2::new(0.6, 0.8),
            kappa: 1.0,
        };
        let f2 = Frame {
            p: Vec2::new(1.0, -0.5),
            n: Vec2::new(0.6, -0.8),
            kappa: 1.0,
        };
        let b = bitangency(&f1, &f2);
        assert!(b.residual.abs() < 1e-15);
        assert!(b.mismatch < 1e-15);
        assert!(b.centre.y.abs() < 1e-15);
        assert!((b.radius + 0.625).abs() < 1e-15);
    }

    fn ellipse() -> (MongeSurface, Vec<LevelBranch>) {
        let f = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, 2.0)], 2.0).unwrap();
        let b = trace_level(&f, 1.0, 0.02, 1e-10).unwrap();
        (f, b)
    }

    #[test]
    fn ellipse_pre_ss_is_reflection_pairs() {
        let (f, b) = ellipse();
        let pre = compute_pre_ss(&f, &b, 128).unwrap();
        assert!(!pre.pairs.is_empty());
        for p in &pre.pairs {
            let (a, c) = (locate(&f, &pre.branches[0], p.s), locate(&f, &pre.branches[0], p.t));
            let mirror_x = (a.x - c.x).abs() < 1e-6 && (a.y + c.y).abs() < 1e-6;
            let mirror_y = (a.x + c.x).abs() < 1e-6 && (a.y - c.y).abs() < 1e-6;
            assert!(mirror_x || mirror_y, "{a:?} {c:?}");
        }
    }

    #[test]
    fn ellipse_symmetry_set() {
        let (f, b) = ellipse();
        let pre = compute_pre_ss(&f, &b, 128).unwrap();
        let mut ss = compute_ss(&f, &pre);
        assert_eq!(ss.endpoints.len(), 4);
        assert!(ss.cusps.is_empty());
        assert!(ss.triple_crossings.is_empty());
        let mut on_x: Vec<f64> = ss
            .endpoints
            .iter()
            .map(|p| p.centre.unwrap())
            .filter(|c| c.y.abs() < 1e-9)
            .map(|c| c.x)
            .collect();
        on_x.sort_by(f64::total_cmp);
        assert_eq!(on_x.len(), 2);
        assert!((on_x[0] + 0.5).abs() < 1e-5 && (on_x[1] - 0.5).abs() < 1e-5, "{on_x:?}");
        let ma = compute_ma(&f, &mut ss, &pre.branches);
        assert!(!ma.is_empty());
        for p in &ma {
            let c = p.centre.unwrap();
            assert!(c.y.abs() < 1e-6 && c.x.abs() <= 0.5 + 1e-6, "{c:?}");
        }
    }

    #[test]
    fn circle_is_degenerate() {
        let f = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, 1.0)], 1.0).unwrap();
        let b = trace_level(&f, 0.25, 0.02, 1e-10).unwrap();
        let pre = compute_pre_ss(&f, &b, 64).unwrap();
        assert!(pre.degenerate_all_pairs);
        let mut ss = compute_ss(&f, &pre);
        let ma = compute_ma(&f, &mut ss, &pre.branches);
        assert_eq!(ma.len(), 1);
        assert!(ma[0].centre.unwrap().norm() < 1e-9);
        assert!((ma[0].radius - 0.5).abs() < 1e-9);
    }
}
