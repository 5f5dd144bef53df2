//! One-parameter families `x² − α² y² + (higher terms)` sweeping from a
//! hyperbolic point down to a parabolic one at `α = 0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{geometric_ladder, trace_feature_sets, verify_theorem1, BranchShape, FeatureSets, SetStructure};
use crate::surface::{classify_origin, MongeSurface, PointClass};

#[derive(Clone, Debug, Serialize)]
pub struct FamilySpec {
    /// Terms of degree three and higher, shared by every member.
    pub higher_terms: Vec<(usize, usize, f64)>,
    /// Parameter values, strictly decreasing, non-negative.
    pub alphas: Vec<f64>,
    /// Disc radius for the vertex and inflexion sets.
    pub radius: f64,
    /// Run the small-level feature count on hyperbolic members.
    pub count_features: bool,
    /// Width at which transition intervals stop being bisected.
    pub event_width: f64,
}

impl FamilySpec {
    /// `x² − α² y² + x³ + 2x²y − xy² + y³` on the given parameter values.
    pub fn standard(alphas: Vec<f64>, radius: f64) -> Self {
        FamilySpec {
            higher_terms: vec![(3, 0, 1.0), (2, 1, 2.0), (1, 2, -1.0), (0, 3, 1.0)],
            alphas,
            radius,
            count_features: true,
            event_width: 1e-3,
        }
    }

    pub fn member(&self, alpha: f64) -> Result<MongeSurface> {
        let mut terms = vec![(2, 0, 1.0), (0, 2, -alpha * alpha)];
        terms.extend(self.higher_terms.iter().copied());
        MongeSurface::from_terms(&terms, self.radius)
    }

    fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidArgument(
                "family needs at least one parameter value".into(),
            ));
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidArgument(
                "parameter values must be finite and non-negative".into(),
            ));
        }
        if self.alphas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "parameter values must be strictly decreasing".into(),
            ));
        }
        if !(self.event_width > 0.0) {
            return Err(Error::InvalidArgument("event width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetCounts {
    pub smooth: usize,
    pub cuspidal: usize,
    pub loops: usize,
    pub detached: usize,
    pub branches: usize,
}

impl From<&SetStructure> for SetCounts {
    fn from(s: &SetStructure) -> Self {
        SetCounts {
            smooth: s.smooth,
            cuspidal: s.cuspidal,
            loops: s.loops,
            detached: s.detached,
            branches: s.branch_count(),
        }
    }
}

/// Feature counts of one member on a small-level ladder.
#[derive(Clone, Debug, Serialize)]
pub struct MemberCounts {
    pub disc_radius: f64,
    pub k_max: f64,
    pub vertex_pattern: String,
    pub inflexion_pattern: String,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberReport {
    pub alpha: f64,
    pub class: PointClass,
    pub vertex: SetCounts,
    pub inflexion: SetCounts,
    pub loop_present: bool,
    /// Largest loop diameter in the vertex set.
    pub loop_diameter: Option<f64>,
    pub counts: Option<MemberCounts>,
    /// Set when the count could not be completed.
    pub counts_error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    LoopVanishing,
    LoopFormation,
    InflexionExchange,
    VertexRegrouping,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionEvent {
    pub kind: EventKind,
    /// The change happens for some parameter in `[lower, upper]`.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionReport {
    pub members: Vec<MemberReport>,
    pub events: Vec<TransitionEvent>,
    /// Loop diameters strictly decrease along the members that have a loop.
    pub loop_monotone: bool,
}

/// Disc and level scales for the small-level count. The hyperbolic picture
/// only holds where `α² y²` dominates the cubic terms, a region that shrinks
/// like `α²`.
pub fn count_scales(alpha: f64, radius: f64) -> (f64, f64) {
    let r = radius.min(0.5 * alpha * alpha);
    let k = 1e-3 * alpha.min(1.0).powi(6);
    (r, k)
}

fn loop_diameter(sets: &FeatureSets) -> Option<f64> {
    sets.vertex
        .structure
        .branches
        .iter()
        .filter(|b| b.shape == BranchShape::Loop)
        .map(|b| b.diameter)
        .reduce(f64::max)
}

fn member_report(spec: &FamilySpec, alpha: f64) -> Result<(MemberReport, FeatureSets)> {
    let surface = spec.member(alpha)?;
    let class = classify_origin(&surface)?;
    let sets = trace_feature_sets(&surface)?;
    let mut counts = None;
    let mut counts_error = None;
    if spec.count_features && class == PointClass::Hyperbolic {
        let (r, k) = count_scales(alpha, spec.radius);
        match surface
            .with_radius(r)
            .and_then(|s| verify_theorem1(&s, &geometric_ladder(k, 0.1, 3)))
        {
            Ok(rep) => {
                counts = Some(MemberCounts {
                    disc_radius: r,
                    k_max: k,
                    vertex_pattern: rep.vertex_pattern.clone(),
                    inflexion_pattern: rep.inflexion_pattern.clone(),
                    verdict: format!("{:?}", rep.verdict),
                })
            }
            Err(e) => counts_error = Some(e.to_string()),
        }
    }
    let diameter = loop_diameter(&sets);
    Ok((
        MemberReport {
            alpha,
            class,
            vertex: SetCounts::from(&sets.vertex.structure),
            inflexion: SetCounts::from(&sets.inflexion.structure),
            loop_present: diameter.is_some(),
            loop_diameter: diameter,
            counts,
            counts_error,
        },
        sets,
    ))
}

type Signature = (SetCounts, SetCounts);

fn signature(spec: &FamilySpec, alpha: f64) -> Result<Signature> {
    let sets = trace_feature_sets(&spec.member(alpha)?)?;
    Ok((
        SetCounts::from(&sets.vertex.structure),
        SetCounts::from(&sets.inflexion.structure),
    ))
}

fn kinds_between(upper: &Signature, lower: &Signature) -> Vec<EventKind> {
    let mut out = Vec::new();
    if upper.0.loops > lower.0.loops {
        out.push(EventKind::LoopVanishing);
    } else if upper.0.loops < lower.0.loops {
        out.push(EventKind::LoopFormation);
    }
    if upper.1 != lower.1 {
        out.push(EventKind::InflexionExchange);
    }
    let strip = |s: &SetCounts| (s.smooth, s.cuspidal, s.detached);
    if strip(&upper.0) != strip(&lower.0) {
        out.push(EventKind::VertexRegrouping);
    }
    out
}

/// Narrows `[lo, hi]` to the configured width around a change of `pick`.
fn bisect(spec: &FamilySpec, mut lo: f64, mut hi: f64, pick: impl Fn(&Signature) -> Vec<usize>) -> Result<(f64, f64)> {
    let target = pick(&signature(spec, hi)?);
    while hi - lo > spec.event_width {
        let mid = 0.5 * (lo + hi);
        if pick(&signature(spec, mid)?) == target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Traces the vertex and inflexion sets of every member, counts features on
/// the hyperbolic ones, and brackets each change of structure between
/// consecutive members.
pub fn sweep_family(spec: &FamilySpec) -> Result<TransitionReport> {
    spec.validate()?;
    let results: Vec<Result<(MemberReport, FeatureSets)>> =
        spec.alphas.par_iter().map(|&a| member_report(spec, a)).collect();
    let mut members = Vec::with_capacity(results.len());
    for r in results {
        members.push(r?.0);
    }

    let mut events = Vec::new();
    for w in members.windows(2) {
        let (upper, lower) = (&w[0], &w[1]);
        let su = (upper.vertex.clone(), upper.inflexion.clone());
        let sl = (lower.vertex.clone(), lower.inflexion.clone());
        for kind in kinds_between(&su, &sl) {
            let pick = move |s: &Signature| -> Vec<usize> {
                match kind {
                    EventKind::LoopVanishing | EventKind::LoopFormation => vec![s.0.loops],
                    EventKind::InflexionExchange => vec![s.1.smooth, s.1.cuspidal, s.1.loops, s.1.detached],
                    EventKind::VertexRegrouping => vec![s.0.smooth, s.0.cuspidal, s.0.detached],
                }
            };
            let (lo, hi) = bisect(spec, lower.alpha, upper.alpha, pick)?;
            events.push(TransitionEvent {
                kind,
                lower: lo,
                upper: hi,
            });
        }
    }

    let diameters: Vec<f64> = members.iter().filter_map(|m| m.loop_diameter).collect();
    let loop_monotone = diameters.windows(2).all(|w| w[1] < w[0]);
    Ok(TransitionReport {
        members,
        events,
        loop_monotone,
    })
}

/// Feature sets of every member, for drawing.
pub fn family_sets(spec: &FamilySpec) -> Result<Vec<(f64, FeatureSets)>> {
    spec.validate()?;
    spec.alphas
        .par_iter()
        .map(|&a| Ok((a, trace_feature_sets(&spec.member(a)?)?)))
        .collect()
}
