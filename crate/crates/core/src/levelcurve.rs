//! Tracing `{F = k}` inside a disc by predictor-corrector continuation.
//!
//! Seeds come from three scans: a square grid over the disc, rays out of the
//! origin sampled at geometrically spaced radii (level sets near a tangency
//! shrink like `sqrt(k)` and slip between grid nodes), and the bounding
//! circles. Each seed not already lying on a traced branch starts a new one.

use crate::error::{Error, Result};
use crate::field::{tangent_of, ScalarField, Vec2};
use crate::surface::MongeSurface;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub position: Vec2,
    /// Unit tangent, 90° counter-clockwise from the gradient.
    pub tangent: Vec2,
    pub curvature: f64,
    pub arclength: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndKind {
    /// Clipped at the outer disc boundary.
    Boundary,
    /// Clipped at the exclusion circle around the origin.
    Origin,
    /// The branch is a closed loop.
    Closed,
    /// Stopped at a point where the gradient falls below the floor.
    Singular,
}

#[derive(Clone, Debug)]
pub struct LevelBranch {
    /// For closed branches the last sample repeats the first one, with the
    /// total length as its arclength.
    pub samples: Vec<CurveSample>,
    pub closed: bool,
    pub level: f64,
    pub ends: [EndKind; 2],
}

impl LevelBranch {
    pub fn length(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.arclength)
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.samples.iter().map(|s| s.position)
    }

    /// Largest distance between two sample positions.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.samples.iter().enumerate() {
            for b in &self.samples[i + 1..] {
                d = d.max((a.position - b.position).norm());
            }
        }
        d
    }
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    pub max_step: f64,
    /// Bound on `|F(p) - k|` for accepted samples. The corrector always runs
    /// to working precision; this is the failure threshold.
    pub trace_tolerance: f64,
    /// Relative to the largest gradient seen on the seed grid.
    pub gradient_floor: f64,
    pub seed_grid: usize,
    pub radial_rays: usize,
    pub radial_samples: usize,
    pub boundary_samples: usize,
    /// Largest tangent turn per step (radians).
    pub max_turn: f64,
    /// Step cap as a fraction of the distance to the origin.
    pub origin_step_fraction: f64,
    pub max_corrector_iterations: usize,
    pub max_halvings: usize,
    /// Radius of the excluded disc around the origin (0 for none).
    pub exclusion_radius: f64,
    pub max_samples: usize,
    /// End a branch where the gradient collapses or the corrector stalls
    /// (near a self-crossing) instead of failing.
    pub stop_at_singular: bool,
}

impl TraceOptions {
    pub fn new(max_step: f64, trace_tolerance: f64) -> Self {
        TraceOptions {
            max_step,
            trace_tolerance,
            gradient_floor: 1e-8,
            seed_grid: 64,
            radial_rays: 64,
            radial_samples: 160,
            boundary_samples: 1024,
            max_turn: 0.05,
            origin_step_fraction: 0.1,
            max_corrector_iterations: 20,
            max_halvings: 3,
            exclusion_radius: 0.0,
            max_samples: 200_000,
            stop_at_singular: false,
        }
    }
}

/// Traces `{f = k}` on the surface's disc.
pub fn trace_level(surface: &MongeSurface, k: f64, max_step: f64, trace_tolerance: f64) -> Result<Vec<LevelBranch>> {
    trace_level_with(surface, k, &TraceOptions::new(max_step, trace_tolerance))
}

pub fn trace_level_with(surface: &MongeSurface, k: f64, opts: &TraceOptions) -> Result<Vec<LevelBranch>> {
    if !(opts.max_step > 0.0 && opts.trace_tolerance > 0.0) {
        return Err(Error::InvalidArgument(
            "max_step and trace_tolerance must be positive".into(),
        ));
    }
    trace_zero_set(surface, k, surface.radius(), opts)
}

struct Tracer<'a, F: ScalarField> {
    field: &'a F,
    level: f64,
    radius: f64,
    opts: &'a TraceOptions,
    floor: f64,
}

impl<'a, F: ScalarField> Tracer<'a, F> {
    fn residual(&self, p: Vec2) -> f64 {
        self.field.value(p) - self.level
    }

    /// Newton projection onto the level along the gradient.
    fn project(&self, mut p: Vec2) -> Option<Vec2> {
        for _ in 0..self.opts.max_corrector_iterations {
            let r = self.residual(p);
            let g = self.field.gradient(p);
            let g2 = g.norm_squared();
            if !(g2 > 0.0) || !r.is_finite() {
                return None;
            }
            let delta = g * (r / g2);
            p -= delta;
            if delta.norm() <= 4.0 * f64::EPSILON * p.norm().max(1e-300) {
                break;
            }
        }
        (self.residual(p).abs() <= self.opts.trace_tolerance).then_some(p)
    }

    fn sample(&self, p: Vec2) -> Result<CurveSample> {
        let g = self.field.gradient(p);
        if g.norm() < self.floor {
            return Err(Error::SingularLevel {
                level: self.level,
                x: p.x,
                y: p.y,
            });
        }
        Ok(CurveSample {
            position: p,
            tangent: tangent_of(g),
            curvature: self.field.level_curvature(p),
            arclength: 0.0,
        })
    }

    fn step_length(&self, s: &CurveSample) -> f64 {
        let mut h = self.opts.max_step;
        if s.curvature.abs() > 0.0 {
            h = h.min(self.opts.max_turn / s.curvature.abs());
        }
        h.min(self.opts.origin_step_fraction * s.position.norm().max(self.opts.exclusion_radius))
            .max(1e-14 * self.radius)
    }

    fn inside(&self, p: Vec2) -> bool {
        let r = p.norm();
        r <= self.radius && r >= self.opts.exclusion_radius
    }

    /// Curve point on the segment's projection where `|p|` crosses `target`.
    fn clip(&self, a: Vec2, b: Vec2, target: f64) -> Option<Vec2> {
        let along = |t: f64| self.project(a + (b - a) * t);
        let sa = a.norm() - target;
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = None;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let q = along(mid)?;
            let sq = q.norm() - target;
            best = Some(q);
            if sq == 0.0 {
                break;
            }
            if (sq > 0.0) == (sa > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let q = best?;
        // Put the point exactly on the circle and back on the curve.
        let q = self.project(q * (target / q.norm())).unwrap_or(q);
        Some(q)
    }

    /// Walks from `start` in direction `dir` (±1 relative to the tangent)
    /// until the branch leaves the domain or closes up.
    fn walk(&self, start: &CurveSample, dir: f64) -> Result<(Vec<CurveSample>, EndKind)> {
        let mut out = vec![*start];
        let mut travelled = 0.0;
        loop {
            let cur = *out.last().unwrap();
            if out.len() > self.opts.max_samples {
                return Err(Error::TraceDivergence {
                    x: cur.position.x,
                    y: cur.position.y,
                    reason: "sample budget exhausted".into(),
                });
            }
            let mut h = self.step_length(&cur);
            let mut next = None;
            for _ in 0..=self.opts.max_halvings {
                let guess = cur.position + cur.tangent * (dir * h);
                if let Some(q) = self.project(guess) {
                    let g = self.field.gradient(q);
                    let t = tangent_of(g);
                    let chord = (q - cur.position).norm();
                    if t.dot(&cur.tangent) > (2.0 * self.opts.max_turn).cos() && chord > 0.5 * h && chord < 1.5 * h {
                        next = Some(q);
                        break;
                    }
                }
                h *= 0.5;
            }
            let Some(q) = next else {
                if self.opts.stop_at_singular {
                    return Ok((out, EndKind::Singular));
                }
                return Err(Error::TraceDivergence {
                    x: cur.position.x,
                    y: cur.position.y,
                    reason: "corrector failed after step halving".into(),
                });
            };
            // Closing up: the start lies ahead within this step.
            if out.len() > 3 && travelled > 4.0 * h && cur.tangent.dot(&start.tangent) > 0.9 {
                let step = q - cur.position;
                let to_start = start.position - cur.position;
                let t = to_start.dot(&step) / step.norm_squared();
                if (0.0..=1.0).contains(&t)
                    && distance_to_segment(start.position, cur.position, q) <= 0.25 * step.norm()
                {
                    return Ok((out, EndKind::Closed));
                }
            }
            if q.norm() > self.radius {
                if let Some(c) = self.clip(cur.position, q, self.radius) {
                    out.push(self.sample(c)?);
                }
                return Ok((out, EndKind::Boundary));
            }
            if q.norm() < self.opts.exclusion_radius {
                if let Some(c) = self.clip(cur.position, q, self.opts.exclusion_radius) {
                    out.push(self.sample(c)?);
                }
                return Ok((out, EndKind::Origin));
            }
            travelled += (q - cur.position).norm();
            match self.sample(q) {
                Ok(s) => out.push(s),
                Err(Error::SingularLevel { .. }) if self.opts.stop_at_singular => {
                    return Ok((out, EndKind::Singular));
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn trace_from(&self, seed: Vec2) -> Result<LevelBranch> {
        let start = self.sample(seed)?;
        let (back, back_end) = self.walk(&start, -1.0)?;
        let mut samples: Vec<CurveSample>;
        let ends;
        let closed = back_end == EndKind::Closed;
        if closed {
            samples = back;
            samples.reverse();
            // Start sample is now last; rotate so it leads and repeat it.
            let first = samples.pop().unwrap();
            samples.insert(0, first);
            samples.push(first);
            ends = [EndKind::Closed, EndKind::Closed];
        } else {
            let (fwd, fwd_end) = self.walk(&start, 1.0)?;
            samples = back;
            samples.reverse();
            samples.extend_from_slice(&fwd[1..]);
            ends = [back_end, fwd_end];
        }
        assign_arclength(&mut samples);
        Ok(LevelBranch {
            samples,
            closed,
            level: self.level,
            ends,
        })
    }
}

/// Arclength from chord lengths, corrected by the turn of the tangent.
fn assign_arclength(samples: &mut [CurveSample]) {
    let mut s = 0.0;
    if let Some(first) = samples.first_mut() {
        first.arclength = 0.0;
    }
    for i in 1..samples.len() {
        let chord = (samples[i].position - samples[i - 1].position).norm();
        let cross = samples[i - 1].tangent.perp(&samples[i].tangent);
        let dot = samples[i - 1].tangent.dot(&samples[i].tangent);
        let half = 0.5 * cross.atan2(dot).abs();
        let factor = if half > 1e-8 {
            half / half.sin()
        } else {
            1.0 + half * half / 6.0
        };
        s += chord * factor;
        samples[i].arclength = s;
    }
}

fn distance_to_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let l2 = d.norm_squared();
    let t = if l2 > 0.0 {
        ((p - a).dot(&d) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * t - p).norm()
}

fn covered(branches: &[LevelBranch], p: Vec2) -> bool {
    branches.iter().any(|b| {
        b.samples.windows(2).any(|w| {
            let (a, c) = (w[0].position, w[1].position);
            let len = (c - a).norm();
            distance_to_segment(p, a, c) <= 0.02 * len + 1e-13 * p.norm().max(1e-300)
        })
    })
}

fn bisect_segment<F: Fn(Vec2) -> f64>(g: &F, mut a: Vec2, mut b: Vec2) -> Vec2 {
    let ga = g(a);
    for _ in 0..80 {
        let m = (a + b) * 0.5;
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
        } else {
            b = m;
        }
        if (b - a).norm() <= 1e-15 * m.norm().max(1e-300) {
            break;
        }
    }
    (a + b) * 0.5
}

/// Candidate points near `{F = level}` from sign changes of `F - level`.
fn seeds<F: ScalarField>(field: &F, level: f64, radius: f64, opts: &TraceOptions) -> Vec<Vec2> {
    let g = |p: Vec2| field.value(p) - level;
    let mut out = Vec::new();
    let rho = opts.exclusion_radius;
    let ok = |p: Vec2| p.norm() <= radius && p.norm() >= rho;
    let push_pair = |a: Vec2, b: Vec2, ga: f64, gb: f64, out: &mut Vec<Vec2>| {
        if ga.is_finite() && gb.is_finite() && (ga > 0.0) != (gb > 0.0) {
            let p = bisect_segment(&g, a, b);
            if ok(p) {
                out.push(p);
            }
        }
    };

    let n = opts.seed_grid.max(2);
    let h = 2.0 * radius / n as f64;
    let node = |i: usize, j: usize| Vec2::new(-radius + h * i as f64, -radius + h * j as f64);
    let mut vals = vec![0.0; (n + 1) * (n + 1)];
    for i in 0..=n {
        for j in 0..=n {
            let p = node(i, j);
            vals[i * (n + 1) + j] = if p.norm() >= rho.max(1e-300) { g(p) } else { f64::NAN };
        }
    }
    for i in 0..=n {
        for j in 0..=n {
            let (p, gp) = (node(i, j), vals[i * (n + 1) + j]);
            if i < n {
                push_pair(p, node(i + 1, j), gp, vals[(i + 1) * (n + 1) + j], &mut out);
            }
            if j < n {
                push_pair(p, node(i, j + 1), gp, vals[i * (n + 1) + j + 1], &mut out);
            }
        }
    }

    let r0 = if rho > 0.0 { rho } else { 1e-7 * radius };
    let m = opts.radial_samples.max(2);
    let ratio = (radius / r0).powf(1.0 / (m - 1) as f64);
    for ray in 0..opts.radial_rays {
        let th = std::f64::consts::TAU * (ray as f64 + 0.5) / opts.radial_rays as f64;
        let u = Vec2::new(th.cos(), th.sin());
        let mut prev = (u * r0, g(u * r0));
        let mut r = r0;
        for _ in 1..m {
            r = (r * ratio).min(radius);
            let p = u * r;
            let gp = g(p);
            push_pair(prev.0, p, prev.1, gp, &mut out);
            prev = (p, gp);
        }
    }

    let mut circles = vec![radius];
    if rho > 0.0 {
        circles.push(rho);
    }
    for c in circles {
        let nb = opts.boundary_samples.max(8);
        let at = |i: usize| {
            let th = std::f64::consts::TAU * i as f64 / nb as f64;
            Vec2::new(th.cos(), th.sin()) * c
        };
        let mut prev = (at(0), g(at(0)));
        for i in 1..=nb {
            let p = at(i % nb);
            let gp = g(p);
            if gp.is_finite() && prev.1.is_finite() && (gp > 0.0) != (prev.1 > 0.0) {
                // Bisect in angle so the seed stays on the circle.
                let (mut a, mut b) = ((i - 1) as f64, i as f64);
                let ga = prev.1;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let th = std::f64::consts::TAU * mid / nb as f64;
                    let gm = g(Vec2::new(th.cos(), th.sin()) * c);
                    if (gm > 0.0) == (ga > 0.0) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let th = std::f64::consts::TAU * 0.5 * (a + b) / nb as f64;
                // Nudge inward/outward so the seed lies inside the domain.
                let scale = if c == radius { 1.0 - 1e-9 } else { 1.0 + 1e-9 };
                out.push(Vec2::new(th.cos(), th.sin()) * (c * scale));
            }
            prev = (p, gp);
        }
    }
    out
}

/// Traces every component of `{field = level}` inside the annulus between
/// `opts.exclusion_radius` and `radius`.
pub fn trace_zero_set<F: ScalarField>(
    field: &F,
    level: f64,
    radius: f64,
    opts: &TraceOptions,
) -> Result<Vec<LevelBranch>> {
    let mut gscale: f64 = 0.0;
    let n = opts.seed_grid.max(2);
    for i in 0..=n {
        for j in 0..=n {
            let p = Vec2::new(
                -radius + 2.0 * radius * i as f64 / n as f64,
                -radius + 2.0 * radius * j as f64 / n as f64,
            );
            if p.norm() <= radius && p.norm() >= opts.exclusion_radius {
                let g = field.gradient(p).norm();
                if g.is_finite() {
                    gscale = gscale.max(g);
                }
            }
        }
    }
    let tracer = Tracer {
        field,
        level,
        radius,
        opts,
        floor: opts.gradient_floor * gscale,
    };
    let mut branches: Vec<LevelBranch> = Vec::new();
    for seed in seeds(field, level, radius, opts) {
        let Some(p) = tracer.project(seed) else { continue };
        if !tracer.inside(p) || covered(&branches, p) {
            continue;
        }
        let branch = match tracer.trace_from(p) {
            Ok(b) => b,
            Err(Error::SingularLevel { .. }) if opts.stop_at_singular => continue,
            Err(e) => return Err(e),
        };
        if branch.samples.len() >= 2 {
            branches.push(branch);
        }
    }
    Ok(branches)
}

/// Joins branches that stopped at the same singular point, pairing the arms
/// that continue each other most smoothly. Ends closer than `gap` (or a tenth of their
/// distance from the origin, if smaller) belong to the same point.
pub fn join_at_singular(branches: Vec<LevelBranch>, gap: f64) -> Vec<LevelBranch> {
    // (branch, side, position, direction of arrival at the end)
    let mut ends: Vec<(usize, usize, Vec2, Vec2)> = Vec::new();
    for (i, b) in branches.iter().enumerate() {
        let n = b.samples.len();
        if n < 2 {
            continue;
        }
        if b.ends[0] == EndKind::Singular {
            let d = b.samples[0].position - b.samples[1].position;
            ends.push((i, 0, b.samples[0].position, d / d.norm()));
        }
        if b.ends[1] == EndKind::Singular {
            let d = b.samples[n - 1].position - b.samples[n - 2].position;
            ends.push((i, 1, b.samples[n - 1].position, d / d.norm()));
        }
    }
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            let (pi, pj) = (ends[i].2, ends[j].2);
            let tol = 3.0 * gap.min(0.1 * pi.norm().max(pj.norm()));
            if (pi - pj).norm() > tol || (ends[i].0 == ends[j].0 && ends[i].1 == ends[j].1) {
                continue;
            }
            // Best continuations first; arms left over at a crossing still
            // pair up with each other.
            candidates.push((1.0 + ends[i].3.dot(&ends[j].3), i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    // link[branch][side] = (other branch, other side)
    let mut link: Vec<[Option<(usize, usize)>; 2]> = vec![[None, None]; branches.len()];
    for (_, i, j) in candidates {
        let (a, b) = (&ends[i], &ends[j]);
        if link[a.0][a.1].is_none() && link[b.0][b.1].is_none() {
            link[a.0][a.1] = Some((b.0, b.1));
            link[b.0][b.1] = Some((a.0, a.1));
        }
    }

    let mut used = vec![false; branches.len()];
    let mut out = Vec::new();
    let chain_from = |start: usize, entry: usize, used: &mut Vec<bool>| {
        // Enter `start` through side `entry`, leave through the other.
        let mut pieces: Vec<(usize, bool)> = Vec::new();
        let (mut cur, mut side) = (start, entry);
        let mut closed = false;
        loop {
            used[cur] = true;
            pieces.push((cur, side == 1));
            let exit = 1 - side;
            match link[cur][exit] {
                Some((next, next_side)) if next == start && next_side == entry => {
                    closed = true;
                    break;
                }
                Some((next, next_side)) if !used[next] => {
                    cur = next;
                    side = next_side;
                }
                _ => break,
            }
        }
        let mut samples: Vec<CurveSample> = Vec::new();
        for &(i, reversed) in &pieces {
            let mut s = branches[i].samples.clone();
            if reversed {
                s.reverse();
            }
            samples.extend(s);
        }
        let first = pieces[0];
        let last = *pieces.last().unwrap();
        let start_end = branches[first.0].ends[if first.1 { 1 } else { 0 }];
        let end_end = branches[last.0].ends[if last.1 { 0 } else { 1 }];
        if closed {
            samples.push(samples[0]);
        }
        for i in 0..samples.len() {
            let chord = if i + 1 < samples.len() {
                samples[i + 1].position - samples[i].position
            } else {
                samples[i].position - samples[i - 1].position
            };
            if samples[i].tangent.dot(&chord) < 0.0 {
                samples[i].tangent = -samples[i].tangent;
            }
        }
        assign_arclength(&mut samples);
        LevelBranch {
            samples,
            closed,
            level: branches[start].level,
            ends: if closed {
                [EndKind::Closed; 2]
            } else {
                [start_end, end_end]
            },
        }
    };
    // Chains with a free end first, then cycles.
    for i in 0..branches.len() {
        if used[i] {
            continue;
        }
        if link[i][0].is_none() {
            out.push(chain_from(i, 0, &mut used));
        } else if link[i][1].is_none() {
            out.push(chain_from(i, 1, &mut used));
        }
    }
    for i in 0..branches.len() {
        if !used[i] {
            out.push(chain_from(i, 0, &mut used));
        }
    }
    out
}

/// Point at arclength `s` on a branch: cubic Hermite interpolation between
/// samples, projected back onto the level.
pub fn locate<F: ScalarField>(field: &F, branch: &LevelBranch, s: f64) -> Vec2 {
    let samples = &branch.samples;
    let idx = match samples.binary_search_by(|x| x.arclength.total_cmp(&s)) {
        Ok(i) => return samples[i].position,
        Err(i) => i.clamp(1, samples.len() - 1),
    };
    let (a, b) = (&samples[idx - 1], &samples[idx]);
    let l = b.arclength - a.arclength;
    let t = if l > 0.0 {
        ((s - a.arclength) / l).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (t2, t3) = (t * t, t * t * t);
    let p = a.position * (2.0 * t3 - 3.0 * t2 + 1.0)
        + a.tangent * (l * (t3 - 2.0 * t2 + t))
        + b.position * (-2.0 * t3 + 3.0 * t2)
        + b.tangent * (l * (t3 - t2));
    let mut q = p;
    for _ in 0..30 {
        let g = field.gradient(q);
        let g2 = g.norm_squared();
        if !(g2 > 0.0) {
            break;
        }
        let d = g * ((field.value(q) - branch.level) / g2);
        q -= d;
        if d.norm() <= 4.0 * f64::EPSILON * q.norm().max(1e-300) {
            break;
        }
    }
    q
}

fn sample_at<F: ScalarField>(field: &F, p: Vec2, s: f64) -> CurveSample {
    CurveSample {
        position: p,
        tangent: tangent_of(field.gradient(p)),
        curvature: field.level_curvature(p),
        arclength: s,
    }
}

/// Resamples a branch at `n` points equally spaced in arclength (for closed
/// branches, `n` per period plus the closing duplicate).
pub fn resample_by_arclength<F: ScalarField>(field: &F, branch: &LevelBranch, n: usize) -> Result<LevelBranch> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!("resampling needs n >= 8, got {n}")));
    }
    let total = branch.length();
    let mut samples = Vec::with_capacity(n + 1);
    if branch.closed {
        for i in 0..n {
            let s = total * i as f64 / n as f64;
            samples.push(sample_at(field, locate(field, branch, s), s));
        }
        let mut last = samples[0];
        last.arclength = total;
        samples.push(last);
    } else {
        for i in 0..n {
            let s = total * i as f64 / (n - 1) as f64;
            let p = if i == 0 {
                branch.samples[0].position
            } else if i == n - 1 {
                branch.samples.last().unwrap().position
            } else {
                locate(field, branch, s)
            };
            samples.push(sample_at(field, p, s));
        }
    }
    Ok(LevelBranch {
        samples,
        closed: branch.closed,
        level: branch.level,
        ends: branch.ends,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PolyField;
    use crate::poly::Poly2;

    fn surface(terms: &[(usize, usize, f64)], r: f64) -> MongeSurface {
        MongeSurface::from_terms(terms, r).unwrap()
    }

    #[test]
    fn circle_is_one_closed_branch() {
        let f = surface(&[(2, 0, 1.0), (0, 2, 1.0)], 1.0);
        let branches = trace_level(&f, 0.25, 0.01, 1e-10).unwrap();
        assert_eq!(branches.len(), 1);
        let b = &branches[0];
        assert!(b.closed);
        for s in &b.samples {
            assert!((s.position.norm() - 0.5).abs() < 1e-6);
            assert!((s.curvature - 2.0).abs() < 1e-9);
        }
        assert!((b.length() - std::f64::consts::PI).abs() < 1e-6, "{}", b.length());
        assert!((b.samples[0].position - b.samples.last().unwrap().position).norm() < 1e-12);
    }

    #[test]
    fn hyperbola_gives_two_open_arcs() {
        let f = surface(&[(2, 0, 1.0), (0, 2, -1.0)], 0.5);
        let branches = trace_level(&f, 0.1, 0.01, 1e-10).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert!(!b.closed);
            assert_eq!(b.ends, [EndKind::Boundary, EndKind::Boundary]);
            for s in &b.samples {
                let p = s.position;
                assert!(p.x * p.x > p.y * p.y);
            }
        }
    }

    #[test]
    fn orientation_keeps_lower_side_on_the_left() {
        let f = surface(&[(2, 0, 1.0), (0, 2, 2.0), (3, 0, 0.3)], 1.0);
        let b = &trace_level(&f, 0.2, 0.01, 1e-10).unwrap()[0];
        for s in &b.samples {
            let left = Vec2::new(-s.tangent.y, s.tangent.x);
            assert!(f.value(s.position + left * 1e-5) < 0.2);
        }
    }

    #[test]
    fn tiny_oval_is_found() {
        let f = surface(&[(2, 0, 1.0), (0, 2, 2.0), (3, 0, 1.0)], 0.5);
        let branches = trace_level(&f, 1e-10, 0.01, 1e-14).unwrap();
        assert_eq!(branches.len(), 1);
        assert!(branches[0].closed);
        assert!(branches[0].diameter() < 1e-4);
    }

    #[test]
    fn circle_resampling_is_uniform() {
        let f = surface(&[(2, 0, 1.0), (0, 2, 1.0)], 1.0);
        let b = &trace_level(&f, 0.25, 0.01, 1e-10).unwrap()[0];
        let r = resample_by_arclength(&f, b, 100).unwrap();
        assert_eq!(r.samples.len(), 101);
        // Equal arclength on a circle means equal angle.
        for w in r.samples.windows(2) {
            let a = w[0].position.y.atan2(w[0].position.x);
            let c = w[1].position.y.atan2(w[1].position.x);
            let d = (c - a).rem_euclid(std::f64::consts::TAU);
            assert!((d - std::f64::consts::TAU / 100.0).abs() < 1e-9, "{d}");
        }
    }

    #[test]
    fn open_resampling_keeps_endpoints() {
        let f = surface(&[(2, 0, 1.0), (0, 2, -1.0)], 0.5);
        let b = &trace_level(&f, 0.1, 0.01, 1e-10).unwrap()[0];
        let r = resample_by_arclength(&f, b, 8).unwrap();
        assert_eq!(r.samples.len(), 8);
        assert!((r.samples[0].position - b.samples[0].position).norm() < 1e-10);
        assert!((r.samples[7].position - b.samples.last().unwrap().position).norm() < 1e-10);
        assert!((r.length() - b.length()).abs() < 1e-6 * b.length());
    }

    #[test]
    fn exclusion_circle_cuts_lines_through_origin() {
        let v = PolyField::new(Poly2::from_terms(&[(1, 1, 1.0)]));
        let mut opts = TraceOptions::new(0.01, 1e-10);
        opts.exclusion_radius = 1e-3;
        let branches = trace_zero_set(&v, 0.0, 1.0, &opts).unwrap();
        assert_eq!(branches.len(), 4);
        for b in &branches {
            assert!(b.ends.contains(&EndKind::Origin) && b.ends.contains(&EndKind::Boundary));
        }
    }
}
