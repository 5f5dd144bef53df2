//! Plain SVG drawings of level curves, feature points, feature sets and
//! symmetry sets.
//!
//! Line conventions: level curves thick black, medial axis thick, the rest of
//! the symmetry set dashed, vertex set solid, inflexion set dashed. Open
//! circles mark curvature minima, solid circles maxima, squares inflexions.

use std::fmt::Write as _;

use crate::features::{FeatureKind, FeaturePoint, FeatureSet, FeatureSetKind};
use crate::field::Vec2;
use crate::levelcurve::LevelBranch;
use crate::symmetry::{SSPoint, SymmetrySet};

const MARGIN: f64 = 24.0;
const TITLE_SPACE: f64 = 20.0;
const SS_COLOUR: &str = "#1f5fa8";
const MA_COLOUR: &str = "#b0302a";

/// A single square panel mapping a window of the plane to pixels.
pub struct Figure {
    lo: Vec2,
    scale: f64,
    size: f64,
    title: Option<String>,
    body: String,
    legend: Vec<(String, String)>,
    clip_id: String,
}

impl Figure {
    /// Panel showing the square window centred on `centre` with half-width
    /// `half_width`, `size` pixels across.
    pub fn new(centre: Vec2, half_width: f64, size: f64) -> Self {
        let lo = centre - Vec2::new(half_width, half_width);
        Figure {
            lo,
            scale: size / (2.0 * half_width),
            size,
            title: None,
            body: String::new(),
            legend: Vec::new(),
            clip_id: "plot".into(),
        }
    }

    /// Window fitted around some points, padded by 5%.
    pub fn fitted<'a>(points: impl IntoIterator<Item = &'a Vec2>, size: f64) -> Self {
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        if !lo.x.is_finite() {
            return Figure::new(Vec2::zeros(), 1.0, size);
        }
        let half = 0.5 * (hi - lo).max() * 1.05;
        Figure::new((lo + hi) * 0.5, if half > 0.0 { half } else { 1.0 }, size)
    }

    pub fn title(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    fn px(&self, p: Vec2) -> (f64, f64) {
        (
            (p.x - self.lo.x) * self.scale,
            self.size - (p.y - self.lo.y) * self.scale,
        )
    }

    fn note_legend(&mut self, label: &str, swatch: String) {
        if !self.legend.iter().any(|(l, _)| l == label) {
            self.legend.push((label.to_owned(), swatch));
        }
    }

    fn polyline(&mut self, points: impl IntoIterator<Item = Vec2>, colour: &str, width: f64, dash: Option<&str>) {
        let mut d = String::new();
        for p in points {
            let (x, y) = self.px(p);
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        if d.is_empty() {
            return;
        }
        let dash = dash.map(|s| format!(" stroke-dasharray=\"{s}\"")).unwrap_or_default();
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"{width}\"{dash}/>",
            d.trim_end()
        );
    }

    fn circle_marker(&mut self, p: Vec2, r: f64, fill: &str, stroke: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"1.2\"/>"
        );
    }

    fn square_marker(&mut self, p: Vec2, half: f64, fill: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{}\" height=\"{}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"1.2\"/>",
            x - half,
            y - half,
            2.0 * half,
            2.0 * half
        );
    }

    fn label(&mut self, p: Vec2, text: &str, colour: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" fill=\"{colour}\">{text}</text>",
            x + 5.0,
            y - 5.0
        );
    }

    /// Closed or open level-curve branches.
    pub fn level_curves(&mut self, branches: &[LevelBranch]) {
        for b in branches {
            self.polyline(b.positions(), "black", 2.5, None);
        }
        if !branches.is_empty() {
            self.note_legend("level curve", line_swatch("black", 2.5, None));
        }
    }

    pub fn features(&mut self, features: &[FeaturePoint]) {
        for f in features {
            match f.kind {
                FeatureKind::VertexMax => self.circle_marker(f.position, 3.5, "black", "black"),
                FeatureKind::VertexMin => self.circle_marker(f.position, 3.5, "white", "black"),
                FeatureKind::Inflexion => self.square_marker(f.position, 3.5, "white"),
            }
        }
        for (kind, label, swatch) in [
            (
                FeatureKind::VertexMax,
                "curvature maximum",
                "<circle cx=\"10\" cy=\"0\" r=\"3.5\" fill=\"black\" stroke=\"black\"/>",
            ),
            (
                FeatureKind::VertexMin,
                "curvature minimum",
                "<circle cx=\"10\" cy=\"0\" r=\"3.5\" fill=\"white\" stroke=\"black\"/>",
            ),
            (
                FeatureKind::Inflexion,
                "inflexion",
                "<rect x=\"6.5\" y=\"-3.5\" width=\"7\" height=\"7\" fill=\"white\" stroke=\"black\"/>",
            ),
        ] {
            if features.iter().any(|f| f.kind == kind) {
                self.note_legend(label, swatch.to_owned());
            }
        }
    }

    /// Vertex set solid, inflexion set dashed. `thick` draws the vertex set
    /// heavier than the inflexion set, as in family panels.
    pub fn feature_set(&mut self, set: &FeatureSet, thick: bool) {
        let (colour, width, dash, label) = match set.kind {
            FeatureSetKind::Vertex => ("#2b7a2b", if thick { 2.2 } else { 1.0 }, None, "vertex set"),
            FeatureSetKind::Inflexion => ("#8a3fa0", 1.0, Some("5 3"), "inflexion set"),
        };
        for c in &set.curves {
            self.polyline(c.positions(), colour, width, dash);
        }
        if !set.curves.is_empty() {
            self.note_legend(label, line_swatch(colour, width, dash));
        }
    }

    /// Symmetry-set chains split into medial-axis runs (thick) and the rest
    /// (dashed), with endpoints, cusps and triple crossings annotated.
    pub fn symmetry_set(&mut self, ss: &SymmetrySet) {
        for chain in &ss.branches {
            let mut run: Vec<Vec2> = Vec::new();
            let mut run_ma = None;
            for p in chain {
                let Some(c) = p.centre else {
                    self.flush_run(&mut run, run_ma.unwrap_or(false));
                    run_ma = None;
                    continue;
                };
                if run_ma.is_some_and(|m| m != p.on_medial_axis) {
                    let last = run.last().copied();
                    self.flush_run(&mut run, run_ma.unwrap_or(false));
                    run.extend(last);
                }
                run_ma = Some(p.on_medial_axis);
                run.push(c);
            }
            self.flush_run(&mut run, run_ma.unwrap_or(false));
        }
        let marks: [(&[SSPoint], &str, &str); 3] = [
            (&ss.endpoints, "A3", "#d07a00"),
            (&ss.cusps, "A1A2", "#00897b"),
            (&ss.triple_crossings, "A1A1A1", "#c2185b"),
        ];
        for (points, name, colour) in marks {
            for p in points {
                if let Some(c) = p.centre {
                    self.circle_marker(c, 3.0, colour, colour);
                    self.label(c, name, colour);
                }
            }
            if !points.is_empty() {
                self.note_legend(
                    &format!("{name} ({})", points.len()),
                    format!("<circle cx=\"10\" cy=\"0\" r=\"3\" fill=\"{colour}\" stroke=\"{colour}\"/>"),
                );
            }
        }
        if let Some(c) = ss.degenerate_centre.as_ref().and_then(|p| p.centre) {
            self.circle_marker(c, 4.0, MA_COLOUR, MA_COLOUR);
            self.note_legend(
                "common centre",
                format!("<circle cx=\"10\" cy=\"0\" r=\"4\" fill=\"{MA_COLOUR}\"/>"),
            );
        }
    }

    fn flush_run(&mut self, run: &mut Vec<Vec2>, ma: bool) {
        if run.len() >= 2 {
            let pts = std::mem::take(run);
            if ma {
                self.polyline(pts, MA_COLOUR, 3.0, None);
                self.note_legend("medial axis", line_swatch(MA_COLOUR, 3.0, None));
            } else {
                self.polyline(pts, SS_COLOUR, 1.2, Some("4 3"));
                self.note_legend("symmetry set", line_swatch(SS_COLOUR, 1.2, Some("4 3")));
            }
        }
        run.clear();
    }

    /// Outline of a disc, thin grey.
    pub fn disc(&mut self, centre: Vec2, radius: f64) {
        let (x, y) = self.px(centre);
        let _ = writeln!(
            self.body,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"#999\" stroke-width=\"0.8\"/>",
            radius * self.scale
        );
    }

    pub fn origin(&mut self) {
        self.square_marker(Vec2::zeros(), 1.5, "black");
    }

    fn width(&self) -> f64 {
        self.size + 2.0 * MARGIN
    }

    fn height(&self) -> f64 {
        self.size + 2.0 * MARGIN + TITLE_SPACE + 14.0 * self.legend.len() as f64
    }

    fn fragment(&self, dx: f64) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<g transform=\"translate({:.2},{:.2})\">",
            dx + MARGIN,
            MARGIN + TITLE_SPACE
        );
        if let Some(t) = &self.title {
            let _ = writeln!(
                s,
                "<text x=\"0\" y=\"-8\" font-size=\"13\" font-family=\"sans-serif\">{t}</text>"
            );
        }
        let _ = writeln!(
            s,
            "<clipPath id=\"{}\"><rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\"/></clipPath>",
            self.clip_id, self.size, self.size
        );
        let _ = writeln!(
            s,
            "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#ccc\"/>",
            self.size, self.size
        );
        let _ = writeln!(s, "<g clip-path=\"url(#{})\">", self.clip_id);
        s.push_str(&self.body);
        s.push_str("</g>\n");
        for (i, (label, swatch)) in self.legend.iter().enumerate() {
            let y = self.size + 16.0 + 14.0 * i as f64;
            let _ = writeln!(
                s,
                "<g transform=\"translate(0,{y:.1})\">{swatch}<text x=\"26\" y=\"4\" font-size=\"11\" font-family=\"sans-serif\">{label}</text></g>"
            );
        }
        s.push_str("</g>\n");
        s
    }

    pub fn render(self) -> String {
        render_row(vec![self])
    }
}

fn line_swatch(colour: &str, width: f64, dash: Option<&str>) -> String {
    let dash = dash.map(|s| format!(" stroke-dasharray=\"{s}\"")).unwrap_or_default();
    format!("<line x1=\"0\" y1=\"0\" x2=\"20\" y2=\"0\" stroke=\"{colour}\" stroke-width=\"{width}\"{dash}/>")
}

/// Panels side by side in one document.
pub fn render_row(mut panels: Vec<Figure>) -> String {
    for (i, p) in panels.iter_mut().enumerate() {
        p.clip_id = format!("plot{i}");
    }
    let width: f64 = panels.iter().map(Figure::width).sum();
    let height = panels.iter().map(Figure::height).fold(0.0, f64::max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let mut dx = 0.0;
    for p in &panels {
        s.push_str(&p.fragment(dx));
        dx += p.width();
    }
    s.push_str("</svg>\n");
    s
}
