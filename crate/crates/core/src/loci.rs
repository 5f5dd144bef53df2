//! Tritangent and osculating-bitangent circles of a level curve, solved as
//! small polynomial systems and continued towards the origin as the level
//! shrinks.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::level_trace_options;
use crate::field::{ScalarField, Vec2};
use crate::levelcurve::{locate, resample_by_arclength, trace_level_with, LevelBranch};
use crate::surface::MongeSurface;
use crate::symmetry::{circle_through, compute_pre_ss, compute_ss, Circle, PreSymmetrySet, SymmetrySet};

#[derive(Clone, Debug)]
pub struct LociOptions {
    /// Smallest admissible distance between two contacts, relative to `sqrt|k|`.
    pub separation: f64,
    /// Two solutions closer than this (relative to the disc radius) are the same.
    pub dedup: f64,
    /// Bound on the raw equation residuals of an accepted solution.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// `|1 + κ r|` above this marks an osculating root as spurious.
    pub osculation_tol: f64,
}

impl Default for LociOptions {
    fn default() -> Self {
        LociOptions {
            separation: 1e-3,
            dedup: 1e-6,
            residual_tol: 1e-10,
            max_iterations: 60,
            osculation_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TritangentSolution {
    pub contacts: [Vec2; 3],
    pub circle: Circle,
    pub k: f64,
    pub residual_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OsculatingBitangentSolution {
    pub a1_contact: Vec2,
    pub a2_contact: Vec2,
    pub circle: Circle,
    pub k: f64,
    pub residual_norm: f64,
    /// `|1 + κ r|` at the osculating contact.
    pub osculation_defect: f64,
}

/// Accepted solutions plus bookkeeping on the seeds that produced nothing.
#[derive(Clone, Debug, Serialize)]
pub struct Solutions<T> {
    pub solutions: Vec<T>,
    /// Seeds whose Newton iteration failed.
    pub failed: usize,
    /// Seeds that converged to a diagonal, out-of-disc or uncertified point.
    pub rejected: usize,
}

/// Damped Newton with a central-difference Jacobian. Returns the last iterate
/// and its residual norm.
fn newton<const N: usize>(
    x0: SVector<f64, N>,
    f: &impl Fn(&SVector<f64, N>) -> Option<SVector<f64, N>>,
    max_iter: usize,
) -> Option<(SVector<f64, N>, f64)> {
    let mut x = x0;
    let mut norm = f(&x)?.norm();
    for _ in 0..max_iter {
        if norm < 1e-15 {
            break;
        }
        let r = f(&x)?;
        let mut jac = SMatrix::<f64, N, N>::zeros();
        for j in 0..N {
            let h = 1e-7 * (1.0 + x[j].abs());
            let (mut xp, mut xm) = (x, x);
            xp[j] += h;
            xm[j] -= h;
            jac.set_column(j, &((f(&xp)? - f(&xm)?) / (2.0 * h)));
        }
        let dx = DMatrix::from_column_slice(N, N, jac.as_slice())
            .lu()
            .solve(&DVector::from_column_slice((-r).as_slice()))?;
        let dx = SVector::<f64, N>::from_column_slice(dx.as_slice());
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..16 {
            let xn = x + dx * t;
            if let Some(rn) = f(&xn) {
                let nn = rn.norm();
                if nn < norm {
                    x = xn;
                    norm = nn;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved || dx.norm() * t <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    Some((x, norm))
}

fn level_scale(k: f64) -> Result<f64> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "level must be finite and non-zero, got {k}"
        )));
    }
    Ok(k.abs().sqrt())
}

/// `a f_y − b f_x + x f_y − y f_x`: zero when the circle is tangent to the
/// level curve through `p`.
fn tangency(surface: &MongeSurface, circle: &Circle, p: Vec2) -> f64 {
    let g = surface.gradient(p);
    circle.a * g.y - circle.b * g.x + p.x * g.y - p.y * g.x
}

fn separated(points: &[Vec2], min_gap: f64) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, p)| points[i + 1..].iter().all(|q| (p - q).norm() >= min_gap))
}

fn inside(surface: &MongeSurface, points: &[Vec2]) -> bool {
    points.iter().all(|p| p.norm() <= surface.radius())
}

fn tritangent_system(surface: &MongeSurface, k: f64, s: f64, x: &SVector<f64, 6>) -> Option<SVector<f64, 6>> {
    let p = [
        Vec2::new(x[0], x[1]) * s,
        Vec2::new(x[2], x[3]) * s,
        Vec2::new(x[4], x[5]) * s,
    ];
    let c = circle_through(p[0], p[1], p[2]).ok()?.centre();
    let mut out = SVector::<f64, 6>::zeros();
    for i in 0..3 {
        let g = surface.gradient(p[i]);
        let d = p[i] - c;
        out[i] = (surface.value(p[i]) - k) / k.abs();
        out[3 + i] = d.perp(&g) / (d.norm() * g.norm());
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// All nine raw equations: the level condition, the two level equalities,
/// three on-circle and three tangency conditions.
pub fn tritangent_residuals(surface: &MongeSurface, k: f64, contacts: &[Vec2; 3], circle: &Circle) -> [f64; 9] {
    let f = contacts.map(|p| surface.value(p));
    [
        f[0] - k,
        f[0] - f[1],
        f[1] - f[2],
        circle.eval(contacts[0]),
        circle.eval(contacts[1]),
        circle.eval(contacts[2]),
        tangency(surface, circle, contacts[0]),
        tangency(surface, circle, contacts[1]),
        tangency(surface, circle, contacts[2]),
    ]
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn refine_tritangent(
    surface: &MongeSurface,
    k: f64,
    seed: &[Vec2; 3],
    opts: &LociOptions,
) -> std::result::Result<TritangentSolution, bool> {
    let s = level_scale(k).map_err(|_| false)?;
    let x0 = SVector::<f64, 6>::from_fn(|i, _| seed[i / 2][i % 2] / s);
    let sys = |x: &SVector<f64, 6>| tritangent_system(surface, k, s, x);
    let (x, _) = newton(x0, &sys, opts.max_iterations).ok_or(false)?;
    let contacts = [
        Vec2::new(x[0], x[1]) * s,
        Vec2::new(x[2], x[3]) * s,
        Vec2::new(x[4], x[5]) * s,
    ];
    if !separated(&contacts, opts.separation * s) || !inside(surface, &contacts) {
        return Err(true);
    }
    let circle = circle_through(contacts[0], contacts[1], contacts[2]).map_err(|_| true)?;
    let residual_norm = norm(&tritangent_residuals(surface, k, &contacts, &circle));
    if residual_norm > opts.residual_tol {
        return Err(false);
    }
    Ok(TritangentSolution {
        contacts,
        circle,
        k,
        residual_norm,
    })
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Smallest, over contact permutations, of the largest contact distance.
pub fn tritangent_distance(a: &[Vec2; 3], b: &[Vec2; 3]) -> f64 {
    PERMUTATIONS
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Newton refinement of each seed triple on the fixed-level tritangency
/// system, with the circle eliminated through its three contacts.
pub fn solve_tritangent(
    surface: &MongeSurface,
    k: f64,
    seeds: &[[Vec2; 3]],
    opts: &LociOptions,
) -> Result<Solutions<TritangentSolution>> {
    level_scale(k)?;
    let results: Vec<_> = seeds
        .par_iter()
        .map(|seed| refine_tritangent(surface, k, seed, opts))
        .collect();
    let (mut failed, mut rejected) = (0, 0);
    let mut solutions: Vec<TritangentSolution> = Vec::new();
    let dedup = opts.dedup * surface.radius();
    for r in results {
        match r {
            Ok(sol) => {
                if !solutions
                    .iter()
                    .any(|q| tritangent_distance(&q.contacts, &sol.contacts) <= dedup)
                {
                    solutions.push(sol);
                }
            }
            Err(true) => rejected += 1,
            Err(false) => failed += 1,
        }
    }
    Ok(Solutions {
        solutions,
        failed,
        rejected,
    })
}

/// Circle through `p1` and `p2` that is tangent to the level curve at `p1`.
fn tangent_circle_at_first(surface: &MongeSurface, p1: Vec2, p2: Vec2) -> Option<Circle> {
    let g = surface.gradient(p1);
    // 2a(x1−x2) + 2b(y1−y2) = −(|p1|² − |p2|²);  a f_y − b f_x = −(x1 f_y − y1 f_x)
    let d = p1 - p2;
    let m = nalgebra::Matrix2::new(2.0 * d.x, 2.0 * d.y, g.y, -g.x);
    let rhs = nalgebra::Vector2::new(-(p1.norm_squared() - p2.norm_squared()), -(p1.x * g.y - p1.y * g.x));
    let ab = m.lu().solve(&rhs)?;
    let (a, b) = (ab[0], ab[1]);
    let c = -p1.norm_squared() - 2.0 * a * p1.x - 2.0 * b * p1.y;
    let circle = Circle { a, b, c };
    (a.is_finite() && b.is_finite()).then_some(circle)
}

/// `1 + κ r` at `p`, with `r` the signed distance from `p` to the circle's
/// centre along the outward normal.
fn osculation_defect(surface: &MongeSurface, circle: &Circle, p: Vec2) -> f64 {
    let g = surface.gradient(p);
    let n = g / g.norm();
    1.0 + surface.level_curvature(p) * (circle.centre() - p).dot(&n)
}

fn osculating_system(surface: &MongeSurface, k: f64, s: f64, x: &SVector<f64, 4>) -> Option<SVector<f64, 4>> {
    let (p1, p2) = (Vec2::new(x[0], x[1]) * s, Vec2::new(x[2], x[3]) * s);
    let circle = tangent_circle_at_first(surface, p1, p2)?;
    let c = circle.centre();
    let g2 = surface.gradient(p2);
    let d = c - p2;
    let out = SVector::<f64, 4>::new(
        (surface.value(p1) - k) / k.abs(),
        (surface.value(p2) - k) / k.abs(),
        d.perp(&g2) / (d.norm() * g2.norm()),
        osculation_defect(surface, &circle, p2),
    );
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// The same system with the osculation written as the single scalar
/// `(a + x₂) I − f_x G`, which vanishes whenever `f_x(p₂) = 0` and the centre
/// shares the abscissa of `p₂`.
fn osculating_literal_system(surface: &MongeSurface, k: f64, s: f64, x: &SVector<f64, 4>) -> Option<SVector<f64, 4>> {
    let (p1, p2) = (Vec2::new(x[0], x[1]) * s, Vec2::new(x[2], x[3]) * s);
    let circle = tangent_circle_at_first(surface, p1, p2)?;
    let out = SVector::<f64, 4>::new(
        (surface.value(p1) - k) / k.abs(),
        (surface.value(p2) - k) / k.abs(),
        tangency(surface, &circle, p2) / (s * s),
        curvature_circle_condition(surface, &circle, p2) / (s * s * s),
    );
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn curvature_circle_condition(surface: &MongeSurface, circle: &Circle, p: Vec2) -> f64 {
    let j = surface.jet(p);
    let g2 = j.fx * j.fx + j.fy * j.fy;
    let i = j.fxx * j.fy * j.fy - 2.0 * j.fxy * j.fx * j.fy + j.fyy * j.fx * j.fx;
    (circle.a + p.x) * i - j.fx * g2
}

/// Raw residuals: the level condition at the first contact, level equality,
/// on-circle for both contacts, tangency at both, and the curvature-circle
/// condition at the second contact.
pub fn osculating_residuals(surface: &MongeSurface, k: f64, a1: Vec2, a2: Vec2, circle: &Circle) -> [f64; 6] {
    let f1 = surface.value(a1);
    [
        f1 - k,
        f1 - surface.value(a2),
        2.0 * circle.a * (a1.x - a2.x) + 2.0 * circle.b * (a1.y - a2.y) + a1.norm_squared() - a2.norm_squared(),
        tangency(surface, circle, a1),
        tangency(surface, circle, a2),
        curvature_circle_condition(surface, circle, a2),
    ]
}

enum Outcome<T> {
    Accepted(T),
    Spurious(T),
    Rejected,
    Failed,
}

fn refine_osculating(
    surface: &MongeSurface,
    k: f64,
    seed: &[Vec2; 2],
    literal: bool,
    opts: &LociOptions,
) -> Outcome<OsculatingBitangentSolution> {
    let Ok(s) = level_scale(k) else { return Outcome::Failed };
    let x0 = SVector::<f64, 4>::new(seed[0].x / s, seed[0].y / s, seed[1].x / s, seed[1].y / s);
    let result = if literal {
        newton(
            x0,
            &|x: &SVector<f64, 4>| osculating_literal_system(surface, k, s, x),
            opts.max_iterations,
        )
    } else {
        newton(
            x0,
            &|x: &SVector<f64, 4>| osculating_system(surface, k, s, x),
            opts.max_iterations,
        )
    };
    let Some((x, _)) = result else { return Outcome::Failed };
    let (a1, a2) = (Vec2::new(x[0], x[1]) * s, Vec2::new(x[2], x[3]) * s);
    if !separated(&[a1, a2], opts.separation * s) || !inside(surface, &[a1, a2]) {
        return Outcome::Rejected;
    }
    let Some(circle) = tangent_circle_at_first(surface, a1, a2) else {
        return Outcome::Rejected;
    };
    let residual_norm = norm(&osculating_residuals(surface, k, a1, a2, &circle));
    if residual_norm > opts.residual_tol {
        return Outcome::Failed;
    }
    let defect = osculating_defect_abs(surface, &circle, a2);
    let sol = OsculatingBitangentSolution {
        a1_contact: a1,
        a2_contact: a2,
        circle,
        k,
        residual_norm,
        osculation_defect: defect,
    };
    if defect > opts.osculation_tol {
        Outcome::Spurious(sol)
    } else {
        Outcome::Accepted(sol)
    }
}

fn osculating_defect_abs(surface: &MongeSurface, circle: &Circle, p: Vec2) -> f64 {
    osculation_defect(surface, circle, p).abs()
}

fn same_osculating(a: &OsculatingBitangentSolution, b: &OsculatingBitangentSolution, tol: f64) -> bool {
    (a.a1_contact - b.a1_contact)
        .norm()
        .max((a.a2_contact - b.a2_contact).norm())
        <= tol
}

fn collect_osculating(
    surface: &MongeSurface,
    outcomes: Vec<Outcome<OsculatingBitangentSolution>>,
    opts: &LociOptions,
) -> (Solutions<OsculatingBitangentSolution>, Vec<OsculatingBitangentSolution>) {
    let tol = opts.dedup * surface.radius();
    let (mut failed, mut rejected) = (0, 0);
    let mut solutions: Vec<OsculatingBitangentSolution> = Vec::new();
    let mut spurious: Vec<OsculatingBitangentSolution> = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Accepted(sol) => {
                if !solutions.iter().any(|q| same_osculating(q, &sol, tol)) {
                    solutions.push(sol);
                }
            }
            Outcome::Spurious(sol) => {
                if !spurious.iter().any(|q| same_osculating(q, &sol, tol)) {
                    spurious.push(sol);
                }
            }
            Outcome::Rejected => rejected += 1,
            Outcome::Failed => failed += 1,
        }
    }
    (
        Solutions {
            solutions,
            failed,
            rejected,
        },
        spurious,
    )
}

/// Newton refinement of `(A₁ contact, A₂ contact)` seeds. Each seed is also
/// tried with the roles swapped.
pub fn solve_osculating_bitangent(
    surface: &MongeSurface,
    k: f64,
    seeds: &[[Vec2; 2]],
    opts: &LociOptions,
) -> Result<Solutions<OsculatingBitangentSolution>> {
    level_scale(k)?;
    let tries: Vec<[Vec2; 2]> = seeds.iter().flat_map(|s| [*s, [s[1], s[0]]]).collect();
    let outcomes = tries
        .par_iter()
        .map(|seed| refine_osculating(surface, k, seed, false, opts))
        .collect();
    Ok(collect_osculating(surface, outcomes, opts).0)
}

/// Roots of the system with the scalar curvature-circle condition, split into
/// genuine osculating circles and roots where the circle is not the circle
/// of curvature at the second contact.
#[derive(Clone, Debug, Serialize)]
pub struct LiteralRoots {
    pub genuine: Vec<OsculatingBitangentSolution>,
    pub spurious: Vec<OsculatingBitangentSolution>,
    pub failed: usize,
    pub rejected: usize,
}

pub fn solve_osculating_literal(
    surface: &MongeSurface,
    k: f64,
    seeds: &[[Vec2; 2]],
    opts: &LociOptions,
) -> Result<LiteralRoots> {
    level_scale(k)?;
    let outcomes = seeds
        .par_iter()
        .map(|seed| refine_osculating(surface, k, seed, true, opts))
        .collect();
    let (sols, spurious) = collect_osculating(surface, outcomes, opts);
    Ok(LiteralRoots {
        genuine: sols.solutions,
        spurious,
        failed: sols.failed,
        rejected: sols.rejected,
    })
}

/// Starting points read off a computed symmetry set: contact triples of its
/// triple crossings and `(A₁, A₂)` contact pairs of its cusps.
#[derive(Clone, Debug, Default)]
pub struct LociSeeds {
    pub tritangent: Vec<[Vec2; 3]>,
    pub osculating: Vec<[Vec2; 2]>,
}

pub fn seeds_from_symmetry(surface: &MongeSurface, pre: &PreSymmetrySet, ss: &SymmetrySet) -> LociSeeds {
    let at = |c: &crate::symmetry::Contact| locate(surface, &pre.branches[c.branch], c.arclength);
    let tritangent = ss
        .triple_crossings
        .iter()
        .filter(|p| p.contacts.len() == 3)
        .map(|p| [at(&p.contacts[0]), at(&p.contacts[1]), at(&p.contacts[2])])
        .collect();
    let osculating = ss
        .cusps
        .iter()
        .filter(|p| p.contacts.len() == 2)
        .map(|p| {
            let (c0, c1) = (&p.contacts[0], &p.contacts[1]);
            if c0.order >= c1.order {
                [at(c1), at(c0)]
            } else {
                [at(c0), at(c1)]
            }
        })
        .collect();
    LociSeeds { tritangent, osculating }
}

/// Traces the level, computes its symmetry set on a `grid_n` grid and reads
/// seeds off it.
pub fn symmetry_seeds(
    surface: &MongeSurface,
    k: f64,
    grid_n: usize,
) -> Result<(LociSeeds, Vec<LevelBranch>, SymmetrySet)> {
    let branches = trace_level_with(surface, k, &level_trace_options(surface, k))?;
    let pre = compute_pre_ss(surface, &branches, grid_n)?;
    let ss = compute_ss(surface, &pre);
    Ok((seeds_from_symmetry(surface, &pre, &ss), branches, ss))
}

/// Every ordered pair of `n` equally spaced points per branch of the level.
pub fn pair_seeds(surface: &MongeSurface, k: f64, n: usize) -> Result<Vec<[Vec2; 2]>> {
    let branches = trace_level_with(surface, k, &level_trace_options(surface, k))?;
    let mut points = Vec::new();
    for b in &branches {
        let r = resample_by_arclength(surface, b, n.max(8))?;
        points.extend(r.positions());
    }
    let mut seeds = Vec::with_capacity(points.len() * points.len());
    for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j {
                seeds.push([*p, *q]);
            }
        }
    }
    Ok(seeds)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Tritangent,
    Osculating,
}

impl Solver {
    pub fn roles(&self) -> &'static [&'static str] {
        match self {
            Solver::Tritangent => &["contact1", "contact2", "contact3"],
            Solver::Osculating => &["a1", "a2"],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathRung {
    pub k: f64,
    pub contacts: Vec<Vec2>,
    pub centre: Vec2,
    pub residual_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocusPath {
    pub solver: Solver,
    pub rungs: Vec<PathRung>,
    /// Level at which continuation failed, if it did.
    pub lost_at: Option<f64>,
}

impl LocusPath {
    /// Unwrapped polar angle in degrees of contact `j` at every rung.
    pub fn angles(&self, j: usize) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(self.rungs.len());
        for r in &self.rungs {
            let p = r.contacts[j];
            let mut a = p.y.atan2(p.x).to_degrees();
            if let Some(&prev) = out.last() {
                a += 360.0 * ((prev - a) / 360.0).round();
            }
            out.push(a);
        }
        out
    }
}

fn solve_one(surface: &MongeSurface, solver: Solver, k: f64, seed: &[Vec2], opts: &LociOptions) -> Option<PathRung> {
    match solver {
        Solver::Tritangent => {
            let sol = refine_tritangent(surface, k, &[seed[0], seed[1], seed[2]], opts).ok()?;
            Some(PathRung {
                k,
                contacts: sol.contacts.to_vec(),
                centre: sol.circle.centre(),
                residual_norm: sol.residual_norm,
            })
        }
        Solver::Osculating => match refine_osculating(surface, k, &[seed[0], seed[1]], false, opts) {
            Outcome::Accepted(sol) => Some(PathRung {
                k,
                contacts: vec![sol.a1_contact, sol.a2_contact],
                centre: sol.circle.centre(),
                residual_norm: sol.residual_norm,
            }),
            _ => None,
        },
    }
}

/// Continues one solution from `ladder[0]` down the ladder. Contacts are
/// predicted by linear extrapolation of `p / sqrt|k|` in `sqrt|k|`.
fn continue_path(
    surface: &MongeSurface,
    solver: Solver,
    start: PathRung,
    ladder: &[f64],
    opts: &LociOptions,
) -> LocusPath {
    let mut rungs = vec![start];
    let mut lost_at = None;
    for &k_next in &ladder[1..] {
        let mut reached = None;
        // Retry with geometric sub-steps when a full step fails.
        'sub: for subdivisions in [1usize, 2, 4, 8, 16] {
            let mut local = rungs.clone();
            let k_from = local.last().unwrap().k;
            for m in 1..=subdivisions {
                let k = k_from * (k_next / k_from).powf(m as f64 / subdivisions as f64);
                let seed = predict(&local, k);
                let Some(r) = solve_one(surface, solver, k, &seed, opts) else {
                    continue 'sub;
                };
                let scale = k.abs().sqrt();
                let jump = r
                    .contacts
                    .iter()
                    .zip(&seed)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if jump > 0.25 * scale {
                    continue 'sub;
                }
                local.push(r);
            }
            reached = local.pop();
            break;
        }
        match reached {
            Some(r) => rungs.push(r),
            None => {
                lost_at = Some(k_next);
                break;
            }
        }
    }
    LocusPath { solver, rungs, lost_at }
}

fn predict(rungs: &[PathRung], k: f64) -> Vec<Vec2> {
    let last = rungs.last().unwrap();
    let (s1, s) = (last.k.abs().sqrt(), k.abs().sqrt());
    if rungs.len() < 2 {
        return last.contacts.iter().map(|p| p * (s / s1)).collect();
    }
    let prev = &rungs[rungs.len() - 2];
    let s0 = prev.k.abs().sqrt();
    let w = (s - s1) / (s1 - s0);
    last.contacts
        .iter()
        .zip(&prev.contacts)
        .map(|(p1, p0)| {
            let (u1, u0) = (p1 / s1, p0 / s0);
            (u1 + (u1 - u0) * w) * s
        })
        .collect()
}

/// Limiting angle of one contact.
#[derive(Clone, Debug, Serialize)]
pub struct ContactDirection {
    pub role: String,
    /// In `(−180, 180]`.
    pub angle_deg: f64,
    /// RMS residual of the extrapolation fit, in degrees.
    pub fit_residual_deg: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathDirections {
    pub path_id: usize,
    pub contacts: Vec<ContactDirection>,
    /// Identifier of the nearest listed limiting pattern.
    pub pattern: String,
    /// Largest angular deviation from that pattern, in degrees.
    pub pattern_error_deg: f64,
    pub matched: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionReport {
    pub solver: Solver,
    pub tolerance_deg: f64,
    pub paths: Vec<PathDirections>,
    /// Number of distinct matched patterns.
    pub distinct_patterns: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tracking {
    pub paths: Vec<LocusPath>,
    pub report: DirectionReport,
}

impl Tracking {
    /// `PathLost` for the first path whose continuation failed.
    pub fn check(&self) -> Result<()> {
        match self.paths.iter().find(|p| p.lost_at.is_some()) {
            Some(p) => Err(Error::PathLost {
                k: p.lost_at.unwrap(),
                completed: p.rungs.len(),
            }),
            None => Ok(()),
        }
    }
}

/// Reduces an angle in degrees to `(−180, 180]`.
pub fn wrap_degrees(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_degrees(a - b).abs()
}

/// Least-squares polynomial fit of `ys` against `xs` with the given powers.
/// Returns coefficients and the RMS residual.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64], powers: &[i32]) -> Option<(Vec<f64>, f64)> {
    if xs.len() < powers.len() {
        return None;
    }
    let a = DMatrix::from_fn(xs.len(), powers.len(), |i, j| xs[i].powi(powers[j]));
    let b = DVector::from_column_slice(ys);
    let coef = a.clone().svd(true, true).solve(&b, 1e-300).ok()?;
    let res = &a * &coef - &b;
    Some((
        coef.iter().copied().collect(),
        (res.norm_squared() / xs.len() as f64).sqrt(),
    ))
}

/// Limiting angle of a contact: quadratic fit in `|k|^{1/4}` over the last
/// `window` rungs, evaluated at zero. Contacts that coalesce pairwise in the
/// limit drift like `|k|^{1/4}`; the quadratic term covers the `sqrt|k|`
/// drift of isolated contacts.
pub fn extrapolate_angle(path: &LocusPath, j: usize, window: usize) -> (f64, f64) {
    let angles = path.angles(j);
    let n = angles.len();
    let start = n.saturating_sub(window.max(3));
    let xs: Vec<f64> = path.rungs[start..].iter().map(|r| r.k.abs().powf(0.25)).collect();
    let ys = &angles[start..];
    let powers: &[i32] = match xs.len() {
        0 => return (f64::NAN, f64::NAN),
        1 => &[0],
        2 => &[0, 1],
        _ => &[0, 1, 2],
    };
    match least_squares(&xs, ys, powers) {
        Some((c, rms)) => (wrap_degrees(c[0]), rms),
        None => (wrap_degrees(ys[ys.len() - 1]), f64::NAN),
    }
}

/// The two contact-angle triples of tritangent circles at an umbilic
/// normalised so that the `x³` and `xy²` coefficients agree.
pub const TRITANGENT_PATTERNS: [(&str, [f64; 3]); 2] =
    [("triple-a", [90.0, -30.0, -150.0]), ("triple-b", [-90.0, 150.0, 30.0])];

/// Listed `(A₁, A₂)` limiting angles of osculating-bitangent circles in the
/// same frame. The last two patterns may occur with roles exchanged.
pub const OSCULATING_PATTERNS: [(&str, [f64; 2], bool); 6] = [
    ("pair-1", [-30.0, 90.0], false),
    ("pair-2", [150.0, -90.0], false),
    ("pair-3", [-150.0, 90.0], false),
    ("pair-4", [30.0, -90.0], false),
    ("pair-5", [60.0, -120.0], true),
    ("pair-6", [-60.0, 120.0], true),
];

/// Nearest listed pattern and its largest angular deviation.
pub fn match_angles(solver: Solver, angles: &[f64]) -> (String, f64) {
    let mut best = (String::new(), f64::INFINITY);
    match solver {
        Solver::Tritangent => {
            for (id, pat) in TRITANGENT_PATTERNS {
                for perm in PERMUTATIONS {
                    let err = (0..3).map(|i| angle_diff(angles[i], pat[perm[i]])).fold(0.0, f64::max);
                    if err < best.1 {
                        best = (id.to_string(), err);
                    }
                }
            }
        }
        Solver::Osculating => {
            for (id, pat, swappable) in OSCULATING_PATTERNS {
                let err = angle_diff(angles[0], pat[0]).max(angle_diff(angles[1], pat[1]));
                if err < best.1 {
                    best = (id.to_string(), err);
                }
                if swappable {
                    let err = angle_diff(angles[0], pat[1]).max(angle_diff(angles[1], pat[0]));
                    if err < best.1 {
                        best = (format!("{id}-swapped"), err);
                    }
                }
            }
        }
    }
    best
}

pub fn direction_report(paths: &[LocusPath], solver: Solver, tolerance_deg: f64, window: usize) -> DirectionReport {
    let mut out = Vec::new();
    for (path_id, path) in paths.iter().enumerate() {
        let contacts: Vec<ContactDirection> = solver
            .roles()
            .iter()
            .enumerate()
            .map(|(j, role)| {
                let (angle_deg, fit_residual_deg) = extrapolate_angle(path, j, window);
                ContactDirection {
                    role: role.to_string(),
                    angle_deg,
                    fit_residual_deg,
                }
            })
            .collect();
        let angles: Vec<f64> = contacts.iter().map(|c| c.angle_deg).collect();
        let (pattern, pattern_error_deg) = match_angles(solver, &angles);
        out.push(PathDirections {
            path_id,
            contacts,
            pattern,
            pattern_error_deg,
            matched: pattern_error_deg <= tolerance_deg,
        });
    }
    let mut ids: Vec<&str> = out
        .iter()
        .filter(|p| p.matched)
        .map(|p| p.pattern.trim_end_matches("-swapped"))
        .collect();
    ids.sort();
    ids.dedup();
    DirectionReport {
        solver,
        tolerance_deg,
        distinct_patterns: ids.len(),
        paths: out,
    }
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 6 {
        return Err(Error::InvalidArgument(format!(
            "ladder needs at least 6 rungs, got {}",
            ladder.len()
        )));
    }
    for w in ladder.windows(2) {
        let ratio = w[1] / w[0];
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "ladder must shrink geometrically towards zero with one sign ({} -> {})",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Solves at `ladder[0]` from `seeds`, then follows every distinct solution
/// down the ladder. Paths that fail part-way are kept with `lost_at` set.
pub fn track_to_origin(
    surface: &MongeSurface,
    solver: Solver,
    ladder: &[f64],
    seeds: &[Vec<Vec2>],
    opts: &LociOptions,
) -> Result<Tracking> {
    check_ladder(ladder)?;
    let k0 = ladder[0];
    let starts: Vec<PathRung> = match solver {
        Solver::Tritangent => {
            let triples: Vec<[Vec2; 3]> = seeds
                .iter()
                .filter(|s| s.len() == 3)
                .map(|s| [s[0], s[1], s[2]])
                .collect();
            solve_tritangent(surface, k0, &triples, opts)?
                .solutions
                .into_iter()
                .map(|s| PathRung {
                    k: k0,
                    contacts: s.contacts.to_vec(),
                    centre: s.circle.centre(),
                    residual_norm: s.residual_norm,
                })
                .collect()
        }
        Solver::Osculating => {
            let pairs: Vec<[Vec2; 2]> = seeds.iter().filter(|s| s.len() == 2).map(|s| [s[0], s[1]]).collect();
            solve_osculating_bitangent(surface, k0, &pairs, opts)?
                .solutions
                .into_iter()
                .map(|s| PathRung {
                    k: k0,
                    contacts: vec![s.a1_contact, s.a2_contact],
                    centre: s.circle.centre(),
                    residual_norm: s.residual_norm,
                })
                .collect()
        }
    };
    if starts.is_empty() {
        return Err(Error::NoConvergence(format!("no {solver:?} solution at k = {k0}")));
    }
    let paths: Vec<LocusPath> = starts
        .into_par_iter()
        .map(|start| continue_path(surface, solver, start, ladder, opts))
        .collect();
    let report = direction_report(&paths, solver, 2.0, 5);
    Ok(Tracking { paths, report })
}

/// Leading coefficients of the tritangent centre locus `(−a(t), −b(t))`,
/// where `t` is the ordinate of the contact approaching the vertical axis.
#[derive(Clone, Debug, Serialize)]
pub struct CentreLocusFit {
    pub a2: f64,
    pub b2: f64,
    pub a3: f64,
    pub b3: f64,
    /// Values predicted from the cubic coefficients.
    pub expected_a2: f64,
    pub expected_b2: f64,
    /// `a(t)/t²` and `b(t)/t²` at the smallest level of each branch.
    pub last_rung_ratios: Vec<(f64, f64)>,
    /// Fitted `x = α t² + …` of the contact approaching the vertical axis.
    pub contact_alpha: f64,
    /// Predictions of `α` with the quartic coefficients read `x⁴…y⁴` and
    /// in the reverse order.
    pub alpha_forward: f64,
    pub alpha_reverse: f64,
    pub alpha_convention: String,
    pub cusp: CuspReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct CuspReport {
    /// Branches with `t > 0` and `t < 0` were both available.
    pub two_branches: bool,
    /// Angle in degrees between the two branches' last centre directions.
    pub tangent_gap_deg: f64,
    /// Normal offsets of the two branches have opposite signs.
    pub opposite_sides: bool,
    /// `(a2 b3 − a3 b2) / |(a2, b2)|²`: non-zero for an ordinary cusp.
    pub cusp_coefficient: f64,
    /// Relative RMS misfit of `normal = C sign(t) |tangential|^{3/2}`.
    pub semicubical_residual: f64,
    pub ordinary: bool,
}

/// Fits the leading terms of the centre locus of tracked tritangent paths.
/// The surface must already be rotated so that its `x³` and `xy²`
/// coefficients agree.
pub fn fit_center_locus(surface: &MongeSurface, paths: &[LocusPath]) -> Result<CentreLocusFit> {
    let [b0, b1, b2, b3] = surface.cubic();
    let scale = b0.abs().max(b1.abs()).max(b2.abs()).max(b3.abs()).max(1.0);
    if (b0 - b2).abs() > 1e-9 * scale {
        return Err(Error::InvalidArgument(format!(
            "centre-locus fit needs equal x^3 and xy^2 coefficients, got {b0} and {b2}"
        )));
    }
    if (b1 - b3).abs() <= 1e-9 * scale {
        return Err(Error::GenericityViolated { b1, b3 });
    }
    // (t, a, b, x of the vertical contact) per branch
    let mut branches: Vec<Vec<(f64, f64, f64, f64)>> = Vec::new();
    for path in paths.iter().filter(|p| p.solver == Solver::Tritangent) {
        if path.rungs.len() < 6 {
            continue;
        }
        let last = path.rungs.last().unwrap();
        let Some(j) = (0..last.contacts.len()).min_by(|&i, &j| {
            let r = |p: Vec2| p.x.abs() / p.norm();
            r(last.contacts[i]).total_cmp(&r(last.contacts[j]))
        }) else {
            continue;
        };
        branches.push(
            path.rungs
                .iter()
                .map(|r| (r.contacts[j].y, -r.centre.x, -r.centre.y, r.contacts[j].x))
                .collect(),
        );
    }
    if branches.is_empty() {
        return Err(Error::InsufficientPath(
            "no tritangent path with at least 6 rungs".into(),
        ));
    }
    let window = 6;
    let tail: Vec<&[(f64, f64, f64, f64)]> = branches.iter().map(|b| &b[b.len() - window..]).collect();
    let ts: Vec<f64> = tail.iter().flat_map(|b| b.iter().map(|r| r.0)).collect();
    let col = |i: usize| -> Vec<f64> {
        tail.iter()
            .flat_map(|b| {
                b.iter().map(move |r| match i {
                    1 => r.1,
                    2 => r.2,
                    _ => r.3,
                })
            })
            .collect()
    };
    let powers = [2, 3, 4];
    let fit =
        |ys: Vec<f64>| least_squares(&ts, &ys, &powers).ok_or_else(|| Error::InsufficientPath("degenerate fit".into()));
    let (ca, _) = fit(col(1))?;
    let (cb, _) = fit(col(2))?;
    let (cx, _) = fit(col(3))?;

    let c = surface.quartic();
    let alpha = |c1: f64, c3: f64| (-2.0 * b1 * b0 - 6.0 * b0 * b3 + 3.0 * c3 + c1) / (6.0 * (b3 - b1));
    let alpha_forward = alpha(c[1], c[3]);
    let alpha_reverse = alpha(c[3], c[1]);
    let alpha_convention = if (cx[0] - alpha_forward).abs() <= (cx[0] - alpha_reverse).abs() {
        "forward"
    } else {
        "reverse"
    };

    let last_rung_ratios = branches
        .iter()
        .map(|b| {
            let r = b.last().unwrap();
            (r.1 / (r.0 * r.0), r.2 / (r.0 * r.0))
        })
        .collect();

    let cusp = cusp_report(&branches, [ca[0], cb[0]], [ca[1], cb[1]]);
    Ok(CentreLocusFit {
        a2: ca[0],
        b2: cb[0],
        a3: ca[1],
        b3: cb[1],
        expected_a2: b0 / 2.0,
        expected_b2: (b1 + 3.0 * b3) / 8.0,
        last_rung_ratios,
        contact_alpha: cx[0],
        alpha_forward,
        alpha_reverse,
        alpha_convention: alpha_convention.into(),
        cusp,
    })
}

fn cusp_report(branches: &[Vec<(f64, f64, f64, f64)>], lead: [f64; 2], next: [f64; 2]) -> CuspReport {
    let u = Vec2::new(-lead[0], -lead[1]);
    let un = u.norm();
    let tangent = u / un;
    let normal = Vec2::new(-tangent.y, tangent.x);
    let cusp_coefficient = (lead[0] * next[1] - next[0] * lead[1]) / (un * un);

    let positive = branches.iter().find(|b| b.last().unwrap().0 > 0.0);
    let negative = branches.iter().find(|b| b.last().unwrap().0 < 0.0);
    let centre = |r: &(f64, f64, f64, f64)| Vec2::new(-r.1, -r.2);
    let (two_branches, tangent_gap_deg, opposite_sides) = match (positive, negative) {
        (Some(p), Some(n)) => {
            let (cp, cn) = (centre(p.last().unwrap()), centre(n.last().unwrap()));
            let gap = (cp / cp.norm())
                .dot(&(cn / cn.norm()))
                .clamp(-1.0, 1.0)
                .acos()
                .to_degrees();
            let sp = cp.dot(&normal);
            let sn = cn.dot(&normal);
            (true, gap, sp * sn < 0.0)
        }
        _ => (false, f64::NAN, false),
    };

    // normal = C sign(t) |tangential|^{3/2}, fitted through the origin.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for b in branches {
        for r in &b[b.len().saturating_sub(6)..] {
            let c = centre(r);
            xs.push(r.0.signum() * c.dot(&tangent).abs().powf(1.5));
            ys.push(c.dot(&normal));
        }
    }
    let semicubical_residual = match least_squares(&xs, &ys, &[1]) {
        Some((coef, rms)) => {
            let mag = (ys.iter().map(|y| y * y).sum::<f64>() / ys.len() as f64).sqrt();
            if coef[0] == 0.0 || mag == 0.0 {
                f64::INFINITY
            } else {
                rms / mag
            }
        }
        None => f64::INFINITY,
    };
    let ordinary = two_branches
        && opposite_sides
        && tangent_gap_deg < 10.0
        && cusp_coefficient.abs() > 1e-6
        && semicubical_residual < 0.1;
    CuspReport {
        two_branches,
        tangent_gap_deg,
        opposite_sides,
        cusp_coefficient,
        semicubical_residual,
        ordinary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn umbilic() -> MongeSurface {
        MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 1.0), (1, 2, 1.0), (0, 3, 1.0)], 0.5).unwrap()
    }

    #[test]
    fn wrap_degrees_range() {
        assert_eq!(wrap_degrees(180.0), 180.0);
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert!((wrap_degrees(370.0) - 10.0).abs() < 1e-12);
        assert!((wrap_degrees(-190.0) - 170.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_recovers_polynomial() {
        let xs: Vec<f64> = (1..8).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x - x * x).collect();
        let (c, rms) = least_squares(&xs, &ys, &[0, 1, 2]).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-10 && (c[1] - 3.0).abs() < 1e-10 && (c[2] + 1.0).abs() < 1e-10);
        assert!(rms < 1e-12);
    }

    #[test]
    fn tritangent_match_permutation_invariant() {
        let (id, err) = match_angles(Solver::Tritangent, &[-150.5, 89.0, -30.2]);
        assert_eq!(id, "triple-a");
        assert!((err - 1.0).abs() < 1e-12);
        let (id, _) = match_angles(Solver::Osculating, &[-120.0, 60.0]);
        assert_eq!(id, "pair-5-swapped");
    }

    #[test]
    fn coincident_seed_never_returned() {
        let s = umbilic();
        let p = Vec2::new(0.1, 0.0);
        let k = s.value(p);
        let sols = solve_tritangent(&s, k, &[[p, p, Vec2::new(-0.1, 0.0)]], &LociOptions::default()).unwrap();
        assert!(sols.solutions.is_empty());
        let sols = solve_osculating_bitangent(&s, k, &[[p, p]], &LociOptions::default()).unwrap();
        assert!(sols.solutions.is_empty());
    }

    #[test]
    fn ladder_validation() {
        assert!(check_ladder(&[1.0, 0.5, 0.25]).is_err());
        assert!(check_ladder(&[1.0, 0.5, 0.25, 0.3, 0.1, 0.05]).is_err());
        assert!(check_ladder(&[1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]).is_ok());
    }

    #[test]
    fn genericity_violation_reported() {
        let s = MongeSurface::from_terms(
            &[
                (2, 0, 1.0),
                (0, 2, 1.0),
                (3, 0, 1.0),
                (1, 2, 1.0),
                (2, 1, 0.5),
                (0, 3, 0.5),
            ],
            0.5,
        )
        .unwrap();
        match fit_center_locus(&s, &[]) {
            Err(Error::GenericityViolated { .. }) => {}
            other => panic!("expected GenericityViolated, got {other:?}"),
        }
    }
}
