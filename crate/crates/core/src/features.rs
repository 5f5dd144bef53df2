//! Curvature of level curves, their vertices and inflexions, and the loci
//! these sweep out in the plane.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{PolyField, RadiallyScaled, ScalarField, Vec2};
use crate::levelcurve::{
    join_at_singular, locate, trace_level_with, trace_zero_set, EndKind, LevelBranch, TraceOptions,
};
use crate::poly::Poly2;
use crate::surface::{classify_origin, MongeSurface, PointClass};

/// Relative gradient floor below which curvature is undefined.
pub const GRADIENT_FLOOR: f64 = 1e-8;

fn check_gradient(surface: &MongeSurface, p: Vec2) -> Result<Vec2> {
    let g = surface.gradient(p);
    let scale = surface.gradient(Vec2::new(surface.radius(), 0.0)).norm().max(1e-300);
    if g.norm() < GRADIENT_FLOOR * scale || g.norm() == 0.0 {
        return Err(Error::SingularPoint { x: p.x, y: p.y });
    }
    Ok(g)
}

/// Signed curvature of the level curve through `p`; positive on ovals
/// around a minimum.
pub fn curvature(surface: &MongeSurface, p: Vec2) -> Result<f64> {
    check_gradient(surface, p)?;
    Ok(surface.level_curvature(p))
}

/// Derivative of curvature with respect to arclength along the level curve.
pub fn curvature_derivative(surface: &MongeSurface, p: Vec2) -> Result<f64> {
    let g = check_gradient(surface, p)?;
    let j = surface.jet(p);
    let (fx, fy) = (j.fx, j.fy);
    let i = j.fxx * fy * fy - 2.0 * j.fxy * fx * fy + j.fyy * fx * fx;
    let ix = j.fxxx * fy * fy + 2.0 * j.fxx * fy * j.fxy
        - 2.0 * (j.fxxy * fx * fy + j.fxy * j.fxx * fy + j.fxy * j.fxy * fx)
        + j.fxyy * fx * fx
        + 2.0 * j.fyy * fx * j.fxx;
    let iy = j.fxxy * fy * fy + 2.0 * j.fxx * fy * j.fyy
        - 2.0 * (j.fxyy * fx * fy + j.fxy * j.fxy * fy + j.fxy * fx * j.fyy)
        + j.fyyy * fx * fx
        + 2.0 * j.fyy * fx * j.fxy;
    let gg = g.norm_squared();
    let gx = 2.0 * (fx * j.fxx + fy * j.fxy);
    let gy = 2.0 * (fx * j.fxy + fy * j.fyy);
    let v = 2.0 * gg * (-fy * ix + fx * iy) - 3.0 * i * (-fy * gx + fx * gy);
    Ok(v / (2.0 * gg * gg * gg))
}

/// Curvature numerator `f_xx f_y² − 2 f_xy f_x f_y + f_yy f_x²`.
pub fn inflexion_polynomial(surface: &MongeSurface) -> Poly2 {
    let [fx, fy, fxx, fxy, fyy] = surface.first_second_derivatives();
    let a = &(fxx * &(fy * fy)) - &(fxy * &(fx * fy)).scale(2.0);
    &a + &(fyy * &(fx * fx))
}

/// A polynomial with the sign of `dκ/ds`: `2G ∇I·T − 3I ∇G·T` with
/// `T = (−f_y, f_x)` and `G = |∇f|²`, equal to `2 G³ dκ/ds`.
pub fn vertex_polynomial(surface: &MongeSurface) -> Poly2 {
    let [fx, fy, ..] = surface.first_second_derivatives();
    let i = inflexion_polynomial(surface);
    let g = &(fx * fx) + &(fy * fy);
    let along = |p: &Poly2| &(fx * &p.derivative(0, 1)) - &(fy * &p.derivative(1, 0));
    let v = &(&g * &along(&i)).scale(2.0) - &(&i * &along(&g)).scale(3.0);
    chop_relative(&v)
}

fn chop_relative(p: &Poly2) -> Poly2 {
    let scale = p.terms().fold(0.0f64, |m, (_, _, c)| m.max(c.abs()));
    p.chop(1e-13 * scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FeatureKind {
    VertexMax,
    VertexMin,
    Inflexion,
}

impl FeatureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::VertexMax => "vertex_max",
            FeatureKind::VertexMin => "vertex_min",
            FeatureKind::Inflexion => "inflexion",
        }
    }

    pub fn is_vertex(&self) -> bool {
        !matches!(self, FeatureKind::Inflexion)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FeaturePoint {
    pub kind: FeatureKind,
    pub position: Vec2,
    pub level: f64,
    pub branch_id: usize,
    pub arclength: f64,
    pub curvature: f64,
}

/// Evaluates the vertex and inflexion conditions of one surface.
#[derive(Clone, Debug)]
pub struct FeatureDetector {
    surface: MongeSurface,
    vertex: Poly2,
    inflexion: Poly2,
}

impl FeatureDetector {
    pub fn new(surface: &MongeSurface) -> Self {
        FeatureDetector {
            surface: surface.clone(),
            vertex: vertex_polynomial(surface),
            inflexion: chop_relative(&inflexion_polynomial(surface)),
        }
    }

    pub fn surface(&self) -> &MongeSurface {
        &self.surface
    }

    pub fn vertex_value(&self, p: Vec2) -> f64 {
        self.vertex.eval(p.x, p.y)
    }

    pub fn inflexion_value(&self, p: Vec2) -> f64 {
        self.inflexion.eval(p.x, p.y)
    }

    /// All vertices and inflexions on a branch, refined by bisection in
    /// arclength.
    pub fn find_features(&self, branch: &LevelBranch, branch_id: usize) -> Vec<FeaturePoint> {
        let mut out = Vec::new();
        let samples = &branch.samples;
        if samples.len() < 2 {
            return out;
        }
        let tol = 1e-9 * branch.length().min(1.0);
        let vals: Vec<(f64, f64)> = samples
            .iter()
            .map(|s| (self.vertex_value(s.position), self.inflexion_value(s.position)))
            .collect();
        for w in 1..samples.len() {
            let (a, b) = (&samples[w - 1], &samples[w]);
            let (va, ia) = vals[w - 1];
            let (vb, ib) = vals[w];
            if (ia > 0.0) != (ib > 0.0) && ia != 0.0 {
                let s = self.bisect(branch, a.arclength, b.arclength, ia, tol, |p| self.inflexion_value(p));
                let p = locate(&self.surface, branch, s);
                out.push(FeaturePoint {
                    kind: FeatureKind::Inflexion,
                    position: p,
                    level: branch.level,
                    branch_id,
                    arclength: s,
                    curvature: self.surface.level_curvature(p),
                });
            }
            if (va > 0.0) != (vb > 0.0) && va != 0.0 {
                let s = self.bisect(branch, a.arclength, b.arclength, va, tol, |p| self.vertex_value(p));
                let p = locate(&self.surface, branch, s);
                let kappa = self.surface.level_curvature(p);
                // d|κ|/ds = sign(κ) dκ/ds going from + to − is a maximum of |κ|.
                let falling = va > 0.0;
                let kind = if falling == (kappa > 0.0) {
                    FeatureKind::VertexMax
                } else {
                    FeatureKind::VertexMin
                };
                out.push(FeaturePoint {
                    kind,
                    position: p,
                    level: branch.level,
                    branch_id,
                    arclength: s,
                    curvature: kappa,
                });
            }
        }
        out.sort_by(|a, b| a.arclength.total_cmp(&b.arclength));
        out
    }

    fn bisect(
        &self,
        branch: &LevelBranch,
        mut lo: f64,
        mut hi: f64,
        g_lo: f64,
        tol: f64,
        g: impl Fn(Vec2) -> f64,
    ) -> f64 {
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let gm = g(locate(&self.surface, branch, mid));
            if gm == 0.0 {
                return mid;
            }
            if (gm > 0.0) == (g_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub fn find_features(surface: &MongeSurface, branch: &LevelBranch, branch_id: usize) -> Vec<FeaturePoint> {
    FeatureDetector::new(surface).find_features(branch, branch_id)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureCount {
    pub k: f64,
    pub vertices_per_branch: Vec<usize>,
    pub inflexions_per_branch: Vec<usize>,
}

impl FeatureCount {
    fn pattern(counts: &[usize]) -> Vec<usize> {
        let mut v = counts.to_vec();
        v.sort_unstable();
        v
    }

    pub fn vertex_pattern(&self) -> Vec<usize> {
        Self::pattern(&self.vertices_per_branch)
    }

    pub fn inflexion_pattern(&self) -> Vec<usize> {
        Self::pattern(&self.inflexions_per_branch)
    }
}

/// Renders sorted per-branch counts as `m+n`, or `-` for an empty section.
pub fn format_pattern(counts: &[usize]) -> String {
    if counts.is_empty() {
        "-".into()
    } else {
        counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("+")
    }
}

/// Trace options suited to level `k` on `surface`.
pub fn level_trace_options(surface: &MongeSurface, k: f64) -> TraceOptions {
    let mut opts = TraceOptions::new(surface.radius() / 50.0, (1e-6 * k.abs()).max(1e-14));
    opts.max_turn = 0.03;
    opts
}

/// Traces level `k` and counts features on every branch.
pub fn count_features(
    detector: &FeatureDetector,
    k: f64,
) -> Result<(Vec<LevelBranch>, Vec<FeaturePoint>, FeatureCount)> {
    let surface = detector.surface();
    let branches = trace_level_with(surface, k, &level_trace_options(surface, k))?;
    let mut features = Vec::new();
    let mut count = FeatureCount {
        k,
        vertices_per_branch: vec![],
        inflexions_per_branch: vec![],
    };
    for (id, b) in branches.iter().enumerate() {
        let f = detector.find_features(b, id);
        count
            .vertices_per_branch
            .push(f.iter().filter(|p| p.kind.is_vertex()).count());
        count
            .inflexions_per_branch
            .push(f.iter().filter(|p| !p.kind.is_vertex()).count());
        features.extend(f);
    }
    Ok((branches, features, count))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum PatternMatch {
    Match(String),
    NonGenericMatch(String),
    Mismatch(String),
}

impl PatternMatch {
    pub fn is_match(&self) -> bool {
        matches!(self, PatternMatch::Match(_))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub class: PointClass,
    pub rungs: Vec<FeatureCount>,
    pub positive_stable: bool,
    pub negative_stable: bool,
    /// `positive <-> negative`, per-branch counts sorted ascending.
    pub vertex_pattern: String,
    pub inflexion_pattern: String,
    pub verdict: PatternMatch,
}

type SignPair = (&'static [usize], &'static [usize]);

fn pair_matches(pos: &[usize], neg: &[usize], want: &SignPair) -> bool {
    (pos == want.0 && neg == want.1) || (pos == want.1 && neg == want.0)
}

fn render(want: &SignPair) -> String {
    format!("{}<->{}", format_pattern(want.0), format_pattern(want.1))
}

struct Expected {
    name: &'static str,
    vertices: &'static [SignPair],
    inflexions: &'static [SignPair],
    non_generic_vertices: &'static [SignPair],
}

fn expected(class: PointClass) -> Expected {
    const E: &[usize] = &[];
    match class {
        PointClass::Elliptic { umbilic: false } => Expected {
            name: "E",
            vertices: &[(E, &[4])],
            inflexions: &[(E, &[0])],
            non_generic_vertices: &[],
        },
        PointClass::Elliptic { umbilic: true } => Expected {
            name: "E umbilic",
            vertices: &[(E, &[6])],
            inflexions: &[(E, &[0])],
            non_generic_vertices: &[],
        },
        PointClass::Hyperbolic => Expected {
            name: "H",
            vertices: &[(&[2, 2], &[2, 2]), (&[1, 1], &[3, 3])],
            inflexions: &[(&[1, 1], &[0, 2]), (&[1, 2], &[0, 1])],
            non_generic_vertices: &[(&[2, 3], &[1, 2]), (&[1, 3], &[2, 2])],
        },
        PointClass::Parabolic => Expected {
            name: "P",
            vertices: &[(&[3], &[3])],
            inflexions: &[(&[2], &[2])],
            non_generic_vertices: &[],
        },
        PointClass::EllipticCuspOfGauss => Expected {
            name: "ECG",
            vertices: &[(E, &[4])],
            inflexions: &[(E, &[2])],
            non_generic_vertices: &[],
        },
        PointClass::HyperbolicCuspOfGauss => Expected {
            name: "HCG",
            vertices: &[(&[1, 3], &[4, 4]), (&[2, 2], &[4, 4])],
            inflexions: &[(&[2, 2], &[0, 2]), (&[1, 1], &[0, 0]), (&[1, 1], &[0, 4])],
            non_generic_vertices: &[],
        },
    }
}

/// Classifies the stable counts at the smallest rungs of each sign.
pub fn match_pattern(class: PointClass, pos: &FeatureCount, neg: &FeatureCount) -> PatternMatch {
    let exp = expected(class);
    let (vp, vn) = (pos.vertex_pattern(), neg.vertex_pattern());
    let (ip, inn) = (pos.inflexion_pattern(), neg.inflexion_pattern());
    let v = exp.vertices.iter().find(|w| pair_matches(&vp, &vn, w));
    let i = exp.inflexions.iter().find(|w| pair_matches(&ip, &inn, w));
    let seen = format!(
        "vertices {}<->{}, inflexions {}<->{}",
        format_pattern(&vp),
        format_pattern(&vn),
        format_pattern(&ip),
        format_pattern(&inn)
    );
    match (v, i) {
        (Some(v), Some(i)) => PatternMatch::Match(format!(
            "{}: vertices {}, inflexions {}",
            exp.name,
            render(v),
            render(i)
        )),
        _ => {
            if let Some(v) = exp.non_generic_vertices.iter().find(|w| pair_matches(&vp, &vn, w)) {
                PatternMatch::NonGenericMatch(format!("{}: vertices {} ({seen})", exp.name, render(v)))
            } else {
                PatternMatch::Mismatch(format!("{}: {seen}", exp.name))
            }
        }
    }
}

/// Counts features along a ladder of levels and checks them against the
/// local patterns for the origin's contact class.
pub fn verify_theorem1(surface: &MongeSurface, k_ladder: &[f64]) -> Result<Theorem1Report> {
    let class = classify_origin(surface)?;
    let mut pos: Vec<f64> = k_ladder.iter().copied().filter(|k| *k > 0.0).collect();
    let mut neg: Vec<f64> = k_ladder.iter().copied().filter(|k| *k < 0.0).collect();
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::InvalidArgument(
            "ladder needs at least two levels of each sign".into(),
        ));
    }
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| a.total_cmp(b));
    let detector = FeatureDetector::new(surface);
    let ladder: Vec<f64> = pos.iter().chain(neg.iter()).copied().collect();
    let rungs: Vec<FeatureCount> = ladder
        .par_iter()
        .map(|&k| count_features(&detector, k).map(|r| r.2))
        .collect::<Result<_>>()?;
    let (rp, rn) = rungs.split_at(pos.len());
    let same = |a: &FeatureCount, b: &FeatureCount| {
        a.vertex_pattern() == b.vertex_pattern() && a.inflexion_pattern() == b.inflexion_pattern()
    };
    let tail_stable = |r: &[FeatureCount]| r.windows(2).all(|w| same(&w[0], &w[1]));
    for (sign, r) in [(1i8, rp), (-1i8, rn)] {
        let (a, b) = (&r[r.len() - 2], &r[r.len() - 1]);
        if !same(a, b) {
            return Err(Error::UnstableCounts {
                sign,
                detail: format!(
                    "k={}: v {} i {}; k={}: v {} i {}",
                    a.k,
                    format_pattern(&a.vertex_pattern()),
                    format_pattern(&a.inflexion_pattern()),
                    b.k,
                    format_pattern(&b.vertex_pattern()),
                    format_pattern(&b.inflexion_pattern())
                ),
            });
        }
    }
    let (p, n) = (rp.last().unwrap(), rn.last().unwrap());
    Ok(Theorem1Report {
        class,
        positive_stable: tail_stable(rp),
        negative_stable: tail_stable(rn),
        vertex_pattern: format!(
            "{}<->{}",
            format_pattern(&p.vertex_pattern()),
            format_pattern(&n.vertex_pattern())
        ),
        inflexion_pattern: format!(
            "{}<->{}",
            format_pattern(&p.inflexion_pattern()),
            format_pattern(&n.inflexion_pattern())
        ),
        verdict: match_pattern(class, p, n),
        rungs,
    })
}

/// Geometric ladder `±k_max · ratio^i`, largest magnitude first.
pub fn geometric_ladder(k_max: f64, ratio: f64, rungs: usize) -> Vec<f64> {
    let mags: Vec<f64> = (0..rungs).map(|i| k_max * ratio.powi(i as i32)).collect();
    mags.iter().copied().chain(mags.iter().map(|m| -m)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSetKind {
    Vertex,
    Inflexion,
}

impl FeatureSetKind {
    pub fn tag(&self) -> &'static str {
        match self {
            FeatureSetKind::Vertex => "V",
            FeatureSetKind::Inflexion => "I",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchShape {
    /// Passes smoothly through the origin.
    Smooth,
    /// Has a cusp at the origin.
    Cuspidal,
    /// Leaves the origin and returns to it, or closes up away from it.
    Loop,
    /// Does not reach the origin.
    Detached,
}

#[derive(Clone, Debug, Serialize)]
pub struct SetBranch {
    pub shape: BranchShape,
    /// Indices into the traced curves; two for smooth and cuspidal branches.
    pub curves: Vec<usize>,
    /// Angles (degrees) at which the branch leaves the origin.
    pub origin_angles: Vec<f64>,
    pub diameter: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SetStructure {
    pub smooth: usize,
    pub cuspidal: usize,
    pub loops: usize,
    pub detached: usize,
    /// Half-branches at the origin left without a partner.
    pub unpaired: usize,
    pub branches: Vec<SetBranch>,
}

impl SetStructure {
    /// Branches through the origin, counting loops.
    pub fn branch_count(&self) -> usize {
        self.smooth + self.cuspidal + self.loops
    }
}

#[derive(Clone, Debug)]
pub struct FeatureSet {
    pub kind: FeatureSetKind,
    pub curves: Vec<LevelBranch>,
    pub structure: SetStructure,
}

#[derive(Clone, Debug)]
pub struct FeatureSets {
    pub vertex: FeatureSet,
    pub inflexion: FeatureSet,
}

fn trace_set(poly: &Poly2, radius: f64, kind: FeatureSetKind) -> Result<FeatureSet> {
    let order = poly.lowest_degree(1e-12).unwrap_or(0) as i32;
    let field = RadiallyScaled {
        inner: PolyField::new(poly.clone()),
        order,
    };
    let mut opts = TraceOptions::new(radius / 100.0, 1e-8);
    opts.exclusion_radius = 1e-3 * radius;
    opts.max_halvings = 8;
    opts.max_turn = 0.03;
    opts.seed_grid = 96;
    opts.radial_rays = 128;
    opts.boundary_samples = 2048;
    opts.gradient_floor = 1e-12;
    opts.stop_at_singular = true;
    let curves = join_at_singular(trace_zero_set(&field, 0.0, radius, &opts)?, opts.max_step);
    let structure = analyse_structure(&curves);
    Ok(FeatureSet {
        kind,
        curves,
        structure,
    })
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Pairs half-branches meeting the exclusion circle into smooth branches
/// (opposite directions) and cusps (the same direction).
fn analyse_structure(curves: &[LevelBranch]) -> SetStructure {
    let mut branches = Vec::new();
    let mut ends: Vec<(usize, f64)> = Vec::new();
    for (id, c) in curves.iter().enumerate() {
        let first = c.samples.first().unwrap().position;
        let last = c.samples.last().unwrap().position;
        let at_origin: Vec<f64> = [(c.ends[0], first), (c.ends[1], last)]
            .iter()
            .filter(|(e, _)| *e == EndKind::Origin)
            .map(|(_, p)| p.y.atan2(p.x))
            .collect();
        match (c.closed, at_origin.len()) {
            (true, _) | (false, 2) => branches.push(SetBranch {
                shape: BranchShape::Loop,
                curves: vec![id],
                origin_angles: at_origin.iter().map(|a| a.to_degrees()).collect(),
                diameter: c.diameter(),
            }),
            (false, 1) => ends.push((id, at_origin[0])),
            _ => branches.push(SetBranch {
                shape: BranchShape::Detached,
                curves: vec![id],
                origin_angles: vec![],
                diameter: c.diameter(),
            }),
        }
    }

    // Minimum-cost perfect matching by dynamic programming over subsets.
    let n = ends.len().min(20);
    let unpaired_cost = 1.0;
    let full = (1usize << n) - 1;
    let mut best = vec![f64::INFINITY; 1 << n];
    let mut choice = vec![(0usize, usize::MAX, false); 1 << n];
    best[0] = 0.0;
    for mask in 0..=full {
        if !best[mask].is_finite() {
            continue;
        }
        let Some(i) = (0..n).find(|&i| mask & (1 << i) == 0) else {
            continue;
        };
        let m1 = mask | (1 << i);
        if best[mask] + unpaired_cost < best[m1] {
            best[m1] = best[mask] + unpaired_cost;
            choice[m1] = (i, usize::MAX, false);
        }
        for j in i + 1..n {
            if mask & (1 << j) != 0 {
                continue;
            }
            let m2 = m1 | (1 << j);
            let cusp = angle_gap(ends[i].1, ends[j].1);
            let smooth = angle_gap(ends[i].1 + std::f64::consts::PI, ends[j].1);
            let (cost, is_cusp) = if cusp < smooth { (cusp, true) } else { (smooth, false) };
            if best[mask] + cost < best[m2] {
                best[m2] = best[mask] + cost;
                choice[m2] = (i, j, is_cusp);
            }
        }
    }
    let mut unpaired = ends.len() - n;
    let mut mask = full;
    while mask != 0 {
        let (i, j, is_cusp) = choice[mask];
        if j == usize::MAX {
            unpaired += 1;
            mask &= !(1 << i);
            continue;
        }
        let (ci, cj) = (ends[i].0, ends[j].0);
        let diameter = curves[ci].diameter().max(curves[cj].diameter());
        branches.push(SetBranch {
            shape: if is_cusp {
                BranchShape::Cuspidal
            } else {
                BranchShape::Smooth
            },
            curves: vec![ci, cj],
            origin_angles: vec![ends[i].1.to_degrees(), ends[j].1.to_degrees()],
            diameter,
        });
        mask &= !((1 << i) | (1 << j));
    }
    let count = |s: BranchShape| branches.iter().filter(|b| b.shape == s).count();
    SetStructure {
        smooth: count(BranchShape::Smooth),
        cuspidal: count(BranchShape::Cuspidal),
        loops: count(BranchShape::Loop),
        detached: count(BranchShape::Detached),
        unpaired,
        branches,
    }
}

/// Traces the vertex set `{dκ/ds = 0}` and inflexion set `{κ = 0}` of the
/// level curves inside the surface's disc, punctured at the origin.
pub fn trace_feature_sets(surface: &MongeSurface) -> Result<FeatureSets> {
    let detector = FeatureDetector::new(surface);
    let r = surface.radius();
    let (vertex, inflexion) = rayon::join(
        || trace_set(&detector.vertex, r, FeatureSetKind::Vertex),
        || trace_set(&detector.inflexion, r, FeatureSetKind::Inflexion),
    );
    Ok(FeatureSets {
        vertex: vertex?,
        inflexion: inflexion?,
    })
}
