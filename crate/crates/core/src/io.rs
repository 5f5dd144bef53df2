//! CSV dumps and JSON reports.
//!
//! Every real number is written with 17 significant digits so that reading a
//! file back reproduces the written values bit for bit.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeaturePoint, FeatureSets};
use crate::levelcurve::LevelBranch;
use crate::loci::LocusPath;
use crate::symmetry::{Contact, SSPoint, SsKind, SymmetrySet};

/// Fixed-width scientific notation, 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn parse_real(field: &str, column: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("column {column}: not a number: {field:?}")))
}

fn parse_usize(field: &str, column: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("column {column}: not an index: {field:?}")))
}

fn opt_real(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

fn parse_opt_real(field: &str, column: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_real(field, column).map(Some)
    }
}

fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_table<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let found = r.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::InvalidArgument(format!(
            "unexpected CSV header {:?}, expected {:?}",
            found.iter().collect::<Vec<_>>(),
            header
        )));
    }
    r.records().map(|rec| rec.map_err(Error::from)).collect()
}

/// One sample of a traced curve.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchRow {
    /// `V` or `I` for vertex and inflexion set curves, absent for level curves.
    pub set: Option<String>,
    pub level: f64,
    pub branch_id: usize,
    pub arclength: f64,
    pub x: f64,
    pub y: f64,
    pub kappa: f64,
}

const BRANCH_HEADER: [&str; 6] = ["level", "branch_id", "arclength", "x", "y", "kappa"];
const SET_BRANCH_HEADER: [&str; 7] = ["set", "level", "branch_id", "arclength", "x", "y", "kappa"];

pub fn branch_rows(branches: &[LevelBranch], set: Option<&str>) -> Vec<BranchRow> {
    branches
        .iter()
        .enumerate()
        .flat_map(|(id, b)| {
            b.samples.iter().map(move |s| BranchRow {
                set: set.map(str::to_owned),
                level: b.level,
                branch_id: id,
                arclength: s.arclength,
                x: s.position.x,
                y: s.position.y,
                kappa: s.curvature,
            })
        })
        .collect()
}

pub fn write_branch_rows<W: Write>(out: W, rows: &[BranchRow]) -> Result<()> {
    let with_set = rows.iter().any(|r| r.set.is_some());
    let header: &[&str] = if with_set { &SET_BRANCH_HEADER } else { &BRANCH_HEADER };
    write_table(
        out,
        header,
        rows.iter().map(|r| {
            let mut row = Vec::with_capacity(7);
            if with_set {
                row.push(r.set.clone().unwrap_or_default());
            }
            row.extend([
                format_real(r.level),
                r.branch_id.to_string(),
                format_real(r.arclength),
                format_real(r.x),
                format_real(r.y),
                format_real(r.kappa),
            ]);
            row
        }),
    )
}

pub fn write_branches<W: Write>(out: W, branches: &[LevelBranch]) -> Result<()> {
    write_branch_rows(out, &branch_rows(branches, None))
}

/// Both feature sets in one table, told apart by the `set` column.
pub fn write_feature_sets<W: Write>(out: W, sets: &FeatureSets) -> Result<()> {
    let mut rows = branch_rows(&sets.vertex.curves, Some(sets.vertex.kind.tag()));
    rows.extend(branch_rows(&sets.inflexion.curves, Some(sets.inflexion.kind.tag())));
    write_branch_rows(out, &rows)
}

/// Reads either the plain or the `set`-prefixed curve table.
pub fn read_branch_rows<R: Read>(input: R) -> Result<Vec<BranchRow>> {
    let mut buf = String::new();
    let mut input = input;
    input.read_to_string(&mut buf)?;
    let with_set = buf.starts_with("set,");
    let header: &[&str] = if with_set { &SET_BRANCH_HEADER } else { &BRANCH_HEADER };
    let off = usize::from(with_set);
    read_table(buf.as_bytes(), header)?
        .iter()
        .map(|rec| {
            Ok(BranchRow {
                set: with_set.then(|| rec[0].to_owned()),
                level: parse_real(&rec[off], "level")?,
                branch_id: parse_usize(&rec[off + 1], "branch_id")?,
                arclength: parse_real(&rec[off + 2], "arclength")?,
                x: parse_real(&rec[off + 3], "x")?,
                y: parse_real(&rec[off + 4], "y")?,
                kappa: parse_real(&rec[off + 5], "kappa")?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub kind: FeatureKind,
    pub level: f64,
    pub branch: usize,
    pub arclength: f64,
    pub x: f64,
    pub y: f64,
    pub kappa: f64,
}

const FEATURE_HEADER: [&str; 7] = ["kind", "level", "branch", "arclength", "x", "y", "kappa"];

impl From<&FeaturePoint> for FeatureRow {
    fn from(f: &FeaturePoint) -> Self {
        FeatureRow {
            kind: f.kind,
            level: f.level,
            branch: f.branch_id,
            arclength: f.arclength,
            x: f.position.x,
            y: f.position.y,
            kappa: f.curvature,
        }
    }
}

fn feature_kind(name: &str) -> Result<FeatureKind> {
    [FeatureKind::VertexMax, FeatureKind::VertexMin, FeatureKind::Inflexion]
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown feature kind {name:?}")))
}

pub fn write_features<W: Write>(out: W, features: &[FeaturePoint]) -> Result<()> {
    write_table(
        out,
        &FEATURE_HEADER,
        features.iter().map(|f| {
            vec![
                f.kind.name().to_owned(),
                format_real(f.level),
                f.branch_id.to_string(),
                format_real(f.arclength),
                format_real(f.position.x),
                format_real(f.position.y),
                format_real(f.curvature),
            ]
        }),
    )
}

pub fn read_features<R: Read>(input: R) -> Result<Vec<FeatureRow>> {
    read_table(input, &FEATURE_HEADER)?
        .iter()
        .map(|rec| {
            Ok(FeatureRow {
                kind: feature_kind(&rec[0])?,
                level: parse_real(&rec[1], "level")?,
                branch: parse_usize(&rec[2], "branch")?,
                arclength: parse_real(&rec[3], "arclength")?,
                x: parse_real(&rec[4], "x")?,
                y: parse_real(&rec[5], "y")?,
                kappa: parse_real(&rec[6], "kappa")?,
            })
        })
        .collect()
}

/// Where a symmetry-set point sits in the structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsRole {
    /// Interior point of the given chain.
    Chain(usize),
    Endpoint,
    Cusp,
    Triple,
    Degenerate,
}

impl SsRole {
    fn name(&self) -> &'static str {
        match self {
            SsRole::Chain(_) => "chain",
            SsRole::Endpoint => "endpoint",
            SsRole::Cusp => "cusp",
            SsRole::Triple => "triple",
            SsRole::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SsRow {
    pub kind: SsKind,
    pub role: SsRole,
    pub centre: Option<(f64, f64)>,
    pub direction: Option<(f64, f64)>,
    pub radius: f64,
    pub on_ma: bool,
    pub contacts: Vec<Contact>,
}

const MAX_CONTACTS: usize = 3;

fn ss_header() -> Vec<String> {
    let mut h: Vec<String> = ["kind", "role", "chain", "cx", "cy", "dx", "dy", "radius", "on_ma"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 1..=MAX_CONTACTS {
        h.push(format!("contact{i}_branch"));
        h.push(format!("contact{i}_s"));
        h.push(format!("contact{i}_order"));
    }
    h
}

fn ss_kind(name: &str) -> Result<SsKind> {
    [SsKind::A1A1, SsKind::A1A1A1, SsKind::A1A2, SsKind::A3, SsKind::Infinity]
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown symmetry-set kind {name:?}")))
}

pub fn ss_rows(ss: &SymmetrySet) -> Vec<SsRow> {
    let row = |p: &SSPoint, role: SsRole| SsRow {
        kind: p.kind,
        role,
        centre: p.centre.map(|c| (c.x, c.y)),
        direction: p.direction.map(|d| (d.x, d.y)),
        radius: p.radius,
        on_ma: p.on_medial_axis,
        contacts: p.contacts.clone(),
    };
    let mut rows = Vec::new();
    for (i, chain) in ss.branches.iter().enumerate() {
        rows.extend(chain.iter().map(|p| row(p, SsRole::Chain(i))));
    }
    rows.extend(ss.endpoints.iter().map(|p| row(p, SsRole::Endpoint)));
    rows.extend(ss.cusps.iter().map(|p| row(p, SsRole::Cusp)));
    rows.extend(ss.triple_crossings.iter().map(|p| row(p, SsRole::Triple)));
    rows.extend(ss.degenerate_centre.iter().map(|p| row(p, SsRole::Degenerate)));
    rows
}

pub fn write_ss_rows<W: Write>(out: W, rows: &[SsRow]) -> Result<()> {
    let header = ss_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        out,
        &header,
        rows.iter().map(|r| {
            let chain = match r.role {
                SsRole::Chain(i) => i.to_string(),
                _ => String::new(),
            };
            let mut row = vec![
                r.kind.name().to_owned(),
                r.role.name().to_owned(),
                chain,
                opt_real(r.centre.map(|c| c.0)),
                opt_real(r.centre.map(|c| c.1)),
                opt_real(r.direction.map(|d| d.0)),
                opt_real(r.direction.map(|d| d.1)),
                format_real(r.radius),
                r.on_ma.to_string(),
            ];
            for i in 0..MAX_CONTACTS {
                match r.contacts.get(i) {
                    Some(c) => row.extend([c.branch.to_string(), format_real(c.arclength), c.order.to_string()]),
                    None => row.extend([String::new(), String::new(), String::new()]),
                }
            }
            row
        }),
    )
}

pub fn write_ss<W: Write>(out: W, ss: &SymmetrySet) -> Result<()> {
    write_ss_rows(out, &ss_rows(ss))
}

pub fn read_ss_rows<R: Read>(input: R) -> Result<Vec<SsRow>> {
    let header = ss_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    read_table(input, &header)?
        .iter()
        .map(|rec| {
            let role = match &rec[1] {
                "chain" => SsRole::Chain(parse_usize(&rec[2], "chain")?),
                "endpoint" => SsRole::Endpoint,
                "cusp" => SsRole::Cusp,
                "triple" => SsRole::Triple,
                "degenerate" => SsRole::Degenerate,
                other => return Err(Error::InvalidArgument(format!("unknown role {other:?}"))),
            };
            let pair = |i: usize, name: &str| -> Result<Option<(f64, f64)>> {
                Ok(parse_opt_real(&rec[i], name)?.zip(parse_opt_real(&rec[i + 1], name)?))
            };
            let on_ma = match &rec[8] {
                "true" => true,
                "false" => false,
                other => return Err(Error::InvalidArgument(format!("column on_ma: {other:?}"))),
            };
            let mut contacts = Vec::new();
            for i in 0..MAX_CONTACTS {
                let base = 9 + 3 * i;
                if rec[base].is_empty() {
                    continue;
                }
                let order = parse_usize(&rec[base + 2], "contact order")?;
                contacts.push(Contact {
                    branch: parse_usize(&rec[base], "contact branch")?,
                    arclength: parse_real(&rec[base + 1], "contact s")?,
                    order: u8::try_from(order)
                        .map_err(|_| Error::InvalidArgument(format!("contact order {order} out of range")))?,
                });
            }
            Ok(SsRow {
                kind: ss_kind(&rec[0])?,
                role,
                centre: pair(3, "cx")?,
                direction: pair(5, "dx")?,
                radius: parse_real(&rec[7], "radius")?,
                on_ma,
                contacts,
            })
        })
        .collect()
}

/// One point of a tracked locus at one level.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRow {
    pub k: f64,
    pub path_id: usize,
    /// `contact1..3`, `a1`, `a2` or `center`.
    pub role: String,
    pub x: f64,
    pub y: f64,
    /// Polar angle of the point in degrees.
    pub angle_deg: f64,
}

const PATH_HEADER: [&str; 6] = ["k", "path_id", "role", "x", "y", "angle_deg"];

pub fn path_rows(paths: &[LocusPath]) -> Vec<PathRow> {
    let mut rows = Vec::new();
    for (id, path) in paths.iter().enumerate() {
        let roles = path.solver.roles();
        for rung in &path.rungs {
            let points = rung
                .contacts
                .iter()
                .zip(roles.iter().copied())
                .chain([(&rung.centre, "center")]);
            for (p, role) in points {
                rows.push(PathRow {
                    k: rung.k,
                    path_id: id,
                    role: role.to_owned(),
                    x: p.x,
                    y: p.y,
                    angle_deg: p.y.atan2(p.x).to_degrees(),
                });
            }
        }
    }
    rows
}

pub fn write_path_rows<W: Write>(out: W, rows: &[PathRow]) -> Result<()> {
    write_table(
        out,
        &PATH_HEADER,
        rows.iter().map(|r| {
            vec![
                format_real(r.k),
                r.path_id.to_string(),
                r.role.clone(),
                format_real(r.x),
                format_real(r.y),
                format_real(r.angle_deg),
            ]
        }),
    )
}

pub fn write_paths<W: Write>(out: W, paths: &[LocusPath]) -> Result<()> {
    write_path_rows(out, &path_rows(paths))
}

pub fn read_path_rows<R: Read>(input: R) -> Result<Vec<PathRow>> {
    read_table(input, &PATH_HEADER)?
        .iter()
        .map(|rec| {
            Ok(PathRow {
                k: parse_real(&rec[0], "k")?,
                path_id: parse_usize(&rec[1], "path_id")?,
                role: rec[2].to_owned(),
                x: parse_real(&rec[3], "x")?,
                y: parse_real(&rec[4], "y")?,
                angle_deg: parse_real(&rec[5], "angle_deg")?,
            })
        })
        .collect()
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
