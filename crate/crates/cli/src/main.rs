use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use isoskel::family::{family_sets, sweep_family, FamilySpec};
use isoskel::features::{
    count_features, geometric_ladder, level_trace_options, trace_feature_sets, verify_theorem1, FeatureDetector,
};
use isoskel::io;
use isoskel::levelcurve::{trace_level_with, LevelBranch};
use isoskel::loci::{fit_center_locus, pair_seeds, symmetry_seeds, track_to_origin, LociOptions, Solver, Tracking};
use isoskel::surface::load_surface;
use isoskel::svg::{render_row, Figure};
use isoskel::symmetry::{compute_ma, compute_pre_ss, compute_ss, SymmetrySet};
use isoskel::{classify_origin, Error, MongeSurface, Vec2};

#[derive(Parser)]
#[command(
    name = "isoskel",
    version,
    about = "Symmetry sets and medial axes of level curves near a tangency point"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Surface file: {"coeffs": [[i, j, value], ...], "radius": r}.
    #[arg(long)]
    surface: PathBuf,
    /// Override the disc radius from the file.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the contact of the tangent plane at the origin.
    Classify {
        #[command(flatten)]
        surface: SurfaceArgs,
    },
    /// Trace the branches of one level curve.
    Trace {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        /// Largest step along the curve; defaults to radius / 50.
        #[arg(long)]
        max_step: Option<f64>,
        /// Corrector tolerance on |f - k|.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Vertices and inflexions on one level, or the vertex and inflexion sets.
    Features {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        /// Trace the vertex and inflexion sets as well.
        #[arg(long)]
        sets: bool,
        /// Feature points of level `k`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Traced level branches.
        #[arg(long)]
        branches_csv: Option<PathBuf>,
        /// Vertex and inflexion set curves.
        #[arg(long)]
        sets_csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Count features on both signs of a shrinking ladder of levels.
    Theorem1 {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// `largest:smallest:rungs`, geometric in |k|, used for both signs.
        #[arg(long, value_parser = parse_ladder)]
        k_ladder: Ladder,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Symmetry set of one level curve, with its medial axis marked.
    Ss {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[command(flatten)]
        out: SymmetryOutput,
    },
    /// Medial axis of one level curve.
    Ma {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[command(flatten)]
        out: SymmetryOutput,
    },
    /// Solve for tritangent and osculating-bitangent circles and follow them
    /// towards the origin.
    Loci {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Starting level.
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[arg(long, value_enum, default_value_t = SolverChoice::Both)]
        solver: SolverChoice,
        #[arg(long, default_value_t = 10)]
        rungs: usize,
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        /// Grid for the symmetry-set seeds of the tritangent solver.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Points per branch for the osculating solver's pair seeds.
        #[arg(long, default_value_t = 36)]
        pair_samples: usize,
        /// Fit the centre locus of the tritangent paths.
        #[arg(long)]
        fit: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sweep the family x² − α²y² + x³ + 2x²y − xy² + y³.
    Family {
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.5, 0.3, 0.2, 0.1, 0.05, 0.0])]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
        /// Skip the small-level feature counts.
        #[arg(long)]
        no_counts: bool,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SymmetryOutput {
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverChoice {
    Tritangent,
    Osculating,
    Both,
}

#[derive(Clone, Debug)]
struct Ladder {
    largest: f64,
    smallest: f64,
    rungs: usize,
}

fn parse_ladder(s: &str) -> Result<Ladder, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err("expected largest:smallest:rungs".into());
    };
    let largest: f64 = a.parse().map_err(|_| format!("bad number {a:?}"))?;
    let smallest: f64 = b.parse().map_err(|_| format!("bad number {b:?}"))?;
    let rungs: usize = n.parse().map_err(|_| format!("bad rung count {n:?}"))?;
    if !(largest > smallest && smallest > 0.0 && largest.is_finite()) {
        return Err("need largest > smallest > 0".into());
    }
    if rungs < 2 {
        return Err("need at least two rungs".into());
    }
    Ok(Ladder {
        largest,
        smallest,
        rungs,
    })
}

impl Ladder {
    fn levels(&self) -> Vec<f64> {
        let ratio = (self.smallest / self.largest).powf(1.0 / (self.rungs - 1) as f64);
        geometric_ladder(self.largest, ratio, self.rungs)
    }
}

/// Failures reported as `{"error": kind, "message": ...}` on stderr.
enum Failure {
    /// Bad input: exit code 2.
    Invalid { kind: &'static str, message: String },
    /// The computation itself failed: exit code 1.
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => Failure::Invalid {
                kind: "InvalidArgument",
                message: m,
            },
            Error::InvalidRadius(_) => Failure::Invalid {
                kind: e.kind(),
                message: e.to_string(),
            },
            other => Failure::Compute(other),
        }
    }
}

fn invalid(kind: &'static str, message: impl Into<String>) -> Failure {
    Failure::Invalid {
        kind,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let kind = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    return ExitCode::SUCCESS;
                }
                ErrorKind::UnknownArgument => "UnknownFlag",
                ErrorKind::InvalidSubcommand => "UnknownSubcommand",
                ErrorKind::MissingRequiredArgument | ErrorKind::MissingSubcommand => "MissingArgument",
                _ => "InvalidArgument",
            };
            return report(invalid(kind, e.render().to_string().trim().to_owned()));
        }
    };
    if let Err(f) = configure_threads() {
        return report(f);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    let (kind, message, code) = match f {
        Failure::Invalid { kind, message } => (kind, message, 2),
        Failure::Compute(e) => (e.kind(), e.to_string(), 1),
    };
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("ISOSKEL_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        invalid(
            "InvalidArgument",
            format!("ISOSKEL_THREADS must be a positive integer, got {value:?}"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| invalid("InvalidArgument", e.to_string()))
}

fn load(args: &SurfaceArgs) -> CliResult<MongeSurface> {
    let surface = load_surface(&args.surface)
        .map_err(|e| invalid("BadSurfaceFile", format!("{}: {e}", args.surface.display())))?;
    match args.radius {
        Some(r) => Ok(surface.with_radius(r)?),
        None => Ok(surface),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Compute(Error::Io(e)))
}

fn save_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    Ok(io::write_json(create(path)?, value)?)
}

fn save_svg(path: &Path, svg: &str) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(svg.as_bytes()).map_err(Error::Io)?;
    w.flush().map_err(Error::Io)?;
    Ok(())
}

fn print(value: &serde_json::Value) -> CliResult<()> {
    Ok(io::write_json(std::io::stdout().lock(), value)?)
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            "InvalidArgument",
            format!("--{name} must be positive, got {v}"),
        ))
    }
}

fn check_level(k: f64) -> CliResult<()> {
    if k.is_finite() && k != 0.0 {
        Ok(())
    } else {
        Err(invalid(
            "InvalidArgument",
            format!("--k must be finite and non-zero, got {k}"),
        ))
    }
}

fn level_figure(surface: &MongeSurface, branches: &[LevelBranch]) -> Figure {
    let pts: Vec<Vec2> = branches.iter().flat_map(|b| b.positions()).collect();
    let mut fig = if pts.is_empty() {
        Figure::new(Vec2::zeros(), surface.radius(), 480.0)
    } else {
        Figure::fitted(&pts, 480.0)
    };
    fig.level_curves(branches);
    fig
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Classify { surface } => {
            let s = load(&surface)?;
            let class = classify_origin(&s)?;
            print(&json!({ "class": class.name(), "umbilic": class.is_umbilic() }))
        }
        Command::Trace {
            surface,
            k,
            max_step,
            tolerance,
            csv,
            svg,
        } => {
            check_level(k)?;
            let s = load(&surface)?;
            let mut opts = level_trace_options(&s, k);
            if let Some(h) = max_step {
                check_positive("max-step", h)?;
                opts.max_step = h;
            }
            if let Some(t) = tolerance {
                check_positive("tolerance", t)?;
                opts.trace_tolerance = t;
            }
            let branches = trace_level_with(&s, k, &opts)?;
            if let Some(p) = csv {
                io::write_branches(create(&p)?, &branches)?;
            }
            if let Some(p) = svg {
                save_svg(&p, &level_figure(&s, &branches).title(format!("f = {k}")).render())?;
            }
            let summary: Vec<_> = branches
                .iter()
                .map(|b| json!({ "closed": b.closed, "length": b.length(), "samples": b.samples.len() }))
                .collect();
            print(&json!({ "level": k, "branches": summary }))
        }
        Command::Features {
            surface,
            k,
            sets,
            csv,
            branches_csv,
            sets_csv,
            svg,
        } => {
            if k.is_none() && !sets {
                return Err(invalid("MissingArgument", "give --k, --sets, or both"));
            }
            let s = load(&surface)?;
            let mut out = serde_json::Map::new();
            let mut figure: Option<Figure> = None;
            if let Some(k) = k {
                check_level(k)?;
                let detector = FeatureDetector::new(&s);
                let (branches, features, count) = count_features(&detector, k)?;
                if let Some(p) = &csv {
                    io::write_features(create(p)?, &features)?;
                }
                if let Some(p) = &branches_csv {
                    io::write_branches(create(p)?, &branches)?;
                }
                let mut fig = level_figure(&s, &branches).title(format!("f = {k}"));
                fig.features(&features);
                figure = Some(fig);
                out.insert("count".into(), serde_json::to_value(&count).map_err(Error::from)?);
            }
            if sets {
                let fs = trace_feature_sets(&s)?;
                if let Some(p) = &sets_csv {
                    io::write_feature_sets(create(p)?, &fs)?;
                }
                let mut fig = figure
                    .take()
                    .unwrap_or_else(|| Figure::new(Vec2::zeros(), s.radius(), 480.0).title("feature sets"));
                fig.feature_set(&fs.vertex, false);
                fig.feature_set(&fs.inflexion, false);
                fig.origin();
                figure = Some(fig);
                out.insert(
                    "vertex_set".into(),
                    serde_json::to_value(&fs.vertex.structure).map_err(Error::from)?,
                );
                out.insert(
                    "inflexion_set".into(),
                    serde_json::to_value(&fs.inflexion.structure).map_err(Error::from)?,
                );
            }
            if let (Some(p), Some(fig)) = (&svg, figure) {
                save_svg(p, &fig.render())?;
            }
            print(&serde_json::Value::Object(out))
        }
        Command::Theorem1 {
            surface,
            k_ladder,
            json,
        } => {
            let s = load(&surface)?;
            let report = verify_theorem1(&s, &k_ladder.levels())?;
            if let Some(p) = json {
                save_json(&p, &report)?;
            }
            print(&serde_json::to_value(&report).map_err(Error::from)?)
        }
        Command::Ss { surface, k, out } => {
            let s = load(&surface)?;
            let (branches, ss, _) = symmetry(&s, k, out.grid)?;
            emit_symmetry(&s, k, &branches, &ss, &out, false)
        }
        Command::Ma { surface, k, out } => {
            let s = load(&surface)?;
            let (branches, ss, _) = symmetry(&s, k, out.grid)?;
            emit_symmetry(&s, k, &branches, &ss, &out, true)
        }
        Command::Loci {
            surface,
            k,
            solver,
            rungs,
            ratio,
            grid,
            pair_samples,
            fit,
            csv,
            json,
        } => {
            check_level(k)?;
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(invalid(
                    "InvalidArgument",
                    format!("--ratio must lie in (0, 1), got {ratio}"),
                ));
            }
            let s = load(&surface)?;
            let ladder: Vec<f64> = (0..rungs).map(|i| k * ratio.powi(i as i32)).collect();
            let opts = LociOptions::default();
            let mut out = serde_json::Map::new();
            let mut all_paths = Vec::new();
            if matches!(solver, SolverChoice::Tritangent | SolverChoice::Both) {
                let (seeds, _, _) = symmetry_seeds(&s, k, grid)?;
                let seeds: Vec<Vec<Vec2>> = seeds.tritangent.iter().map(|t| t.to_vec()).collect();
                let tracking = track_or_empty(&s, Solver::Tritangent, &ladder, &seeds, &opts)?;
                if fit {
                    if let Some(t) = &tracking {
                        let f = fit_center_locus(&s, &t.paths)?;
                        out.insert("centre_locus".into(), serde_json::to_value(&f).map_err(Error::from)?);
                    }
                }
                out.insert("tritangent".into(), tracking_summary(&tracking)?);
                all_paths.extend(tracking.map(|t| t.paths).unwrap_or_default());
            }
            if matches!(solver, SolverChoice::Osculating | SolverChoice::Both) {
                let seeds: Vec<Vec<Vec2>> = pair_seeds(&s, k, pair_samples)?.iter().map(|p| p.to_vec()).collect();
                let tracking = track_or_empty(&s, Solver::Osculating, &ladder, &seeds, &opts)?;
                out.insert("osculating".into(), tracking_summary(&tracking)?);
                all_paths.extend(tracking.map(|t| t.paths).unwrap_or_default());
            }
            if let Some(p) = csv {
                io::write_paths(create(&p)?, &all_paths)?;
            }
            let value = serde_json::Value::Object(out);
            if let Some(p) = json {
                save_json(&p, &value)?;
            }
            print(&value)
        }
        Command::Family {
            alphas,
            radius,
            no_counts,
            json,
            svg,
        } => {
            check_positive("radius", radius)?;
            let mut spec = FamilySpec::standard(alphas, radius);
            spec.count_features = !no_counts;
            let report = sweep_family(&spec)?;
            if let Some(p) = json {
                save_json(&p, &report)?;
            }
            if let Some(p) = svg {
                let panels = family_sets(&spec)?
                    .into_iter()
                    .map(|(alpha, sets)| {
                        let mut fig = Figure::new(Vec2::zeros(), radius, 260.0).title(format!("α = {alpha}"));
                        fig.disc(Vec2::zeros(), radius);
                        fig.feature_set(&sets.vertex, true);
                        fig.feature_set(&sets.inflexion, true);
                        fig.origin();
                        fig
                    })
                    .collect();
                save_svg(&p, &render_row(panels))?;
            }
            print(&serde_json::to_value(&report).map_err(Error::from)?)
        }
    }
}

fn symmetry(s: &MongeSurface, k: f64, grid: usize) -> CliResult<(Vec<LevelBranch>, SymmetrySet, usize)> {
    check_level(k)?;
    if grid < 8 {
        return Err(invalid(
            "InvalidArgument",
            format!("--grid must be at least 8, got {grid}"),
        ));
    }
    let branches = trace_level_with(s, k, &level_trace_options(s, k))?;
    let pre = compute_pre_ss(s, &branches, grid)?;
    let mut ss = compute_ss(s, &pre);
    let ma = compute_ma(s, &mut ss, &pre.branches).len();
    Ok((pre.branches, ss, ma))
}

fn emit_symmetry(
    s: &MongeSurface,
    k: f64,
    branches: &[LevelBranch],
    ss: &SymmetrySet,
    out: &SymmetryOutput,
    medial_only: bool,
) -> CliResult<()> {
    let mut rows = io::ss_rows(ss);
    if medial_only {
        rows.retain(|r| r.on_ma);
    }
    if let Some(p) = &out.csv {
        io::write_ss_rows(create(p)?, &rows)?;
    }
    if let Some(p) = &out.svg {
        let mut whole = level_figure(s, branches).title(format!("f = {k}"));
        whole.symmetry_set(ss);
        let centres: Vec<Vec2> = ss
            .points()
            .filter_map(|p| p.centre)
            .filter(|c| c.norm() <= s.radius())
            .collect();
        let mut zoom = Figure::fitted(&centres, 480.0).title("symmetry set, enlarged");
        zoom.level_curves(branches);
        zoom.symmetry_set(ss);
        save_svg(p, &render_row(vec![whole, zoom]))?;
    }
    let summary = json!({
        "level": k,
        "level_branches": branches.len(),
        "chains": ss.branches.len(),
        "points": ss.branches.iter().map(Vec::len).sum::<usize>(),
        "endpoints": ss.endpoints.len(),
        "cusps": ss.cusps.len(),
        "triple_crossings": ss.triple_crossings.len(),
        "medial_axis_points": ss.points().filter(|p| p.on_medial_axis).count(),
        "degenerate": ss.degenerate_centre.is_some(),
    });
    if let Some(p) = &out.json {
        save_json(p, &summary)?;
    }
    print(&summary)
}

/// Tracking that treats "nothing to track" as an empty result.
fn track_or_empty(
    s: &MongeSurface,
    solver: Solver,
    ladder: &[f64],
    seeds: &[Vec<Vec2>],
    opts: &LociOptions,
) -> CliResult<Option<Tracking>> {
    if seeds.is_empty() {
        return Ok(None);
    }
    match track_to_origin(s, solver, ladder, seeds, opts) {
        Ok(t) => Ok(Some(t)),
        Err(Error::NoConvergence(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn tracking_summary(t: &Option<Tracking>) -> CliResult<serde_json::Value> {
    Ok(match t {
        None => json!({ "solutions": 0 }),
        Some(t) => json!({
            "solutions": t.paths.len(),
            "lost": t.paths.iter().filter(|p| p.lost_at.is_some()).count(),
            "directions": serde_json::to_value(&t.report).map_err(Error::from)?,
        }),
    })
}
