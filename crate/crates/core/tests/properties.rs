//! Invariants checked on random inputs.

mod common;

use std::f64::consts::PI;

use isoskel::features::{curvature, FeatureKind};
use isoskel::io::{
    read_features, read_path_rows, read_ss_rows, write_path_rows, write_ss_rows, FeatureRow, PathRow, SsRole, SsRow,
};
use isoskel::loci::tritangent_distance;
use isoskel::symmetry::{Contact, SsKind};
use isoskel::{classify_origin, normalize_umbilic, MongeSurface, Vec2};
use proptest::prelude::*;

use common::surface;

fn cubic() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0f64..2.0)
}

fn with_cubic(quadratic: [(usize, usize, f64); 3], b: [f64; 4]) -> MongeSurface {
    let mut terms = quadratic.to_vec();
    for (i, &c) in b.iter().enumerate() {
        terms.push((3 - i, i, c));
    }
    surface(&terms, 0.2)
}

/// Newton step back onto `{f = k}` along the gradient.
fn project(s: &MongeSurface, k: f64, mut p: Vec2) -> Vec2 {
    for _ in 0..50 {
        let j = s.jet(p);
        let g = j.gradient();
        p -= g * ((j.f - k) / g.norm_squared());
    }
    p
}

/// Curvature of the circle through three points.
fn menger(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let (u, v) = (b - a, c - a);
    let cross = u.x * v.y - u.y * v.x;
    2.0 * cross.abs() / ((b - a).norm() * (c - b).norm() * (c - a).norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classification_is_rotation_invariant(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, cub in cubic(), theta in 0.0..(2.0 * PI)
    ) {
        let s = with_cubic([(2, 0, a), (1, 1, b), (0, 2, c)], cub);
        prop_assume!((4.0 * a * c - b * b).abs() > 0.05);
        let class = classify_origin(&s).unwrap();
        prop_assert_eq!(classify_origin(&s.rotated(theta)).unwrap(), class);
    }

    #[test]
    fn parabolic_class_survives_rotation(cub in cubic(), theta in 0.0..(2.0 * PI)) {
        prop_assume!(cub[3].abs() > 0.05);
        let s = with_cubic([(2, 0, 1.0), (1, 1, 0.0), (0, 2, 0.0)], cub);
        prop_assert_eq!(classify_origin(&s).unwrap().name(), "parabolic");
        prop_assert_eq!(classify_origin(&s.rotated(theta)).unwrap().name(), "parabolic");
    }

    #[test]
    fn normalised_umbilic_has_equal_leading_cubic_terms(cub in cubic()) {
        let s = with_cubic([(2, 0, 1.0), (1, 1, 0.0), (0, 2, 1.0)], cub);
        let norm = normalize_umbilic(&s).unwrap();
        let [b0, _, b2, _] = norm.surface.cubic();
        prop_assert!((b0 - b2).abs() <= 1e-10 * (1.0 + b0.abs()), "b0 {} b2 {}", b0, b2);
        prop_assert!(classify_origin(&norm.surface).unwrap().is_umbilic());
        let back = norm.surface.rotated(-norm.angle);
        for i in 0..4 {
            prop_assert!((back.cubic()[i] - s.cubic()[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn level_curvature_matches_three_point_circle(
        c in 0.3f64..3.0, cub in prop::array::uniform4(-0.5f64..0.5), angle in 0.0..(2.0 * PI), r in 0.05f64..0.15
    ) {
        let s = with_cubic([(2, 0, 1.0), (1, 1, 0.0), (0, 2, c)], cub);
        let p = Vec2::new(r * angle.cos(), r * angle.sin());
        let k = s.jet(p).f;
        let g = s.jet(p).gradient();
        let t = Vec2::new(-g.y, g.x) / g.norm();
        let h = 1e-4;
        let a = project(&s, k, p - t * h);
        let b = project(&s, k, p + t * h);
        let want = menger(a, p, b);
        let got = curvature(&s, p).unwrap().abs();
        prop_assert!((got - want).abs() <= 1e-5 * (1.0 + want), "curvature {} vs three-point {}", got, want);
    }

    #[test]
    fn tritangent_distance_ignores_contact_order(
        pts in prop::array::uniform3(prop::array::uniform2(-1.0f64..1.0)), perm in 0usize..6
    ) {
        let a = pts.map(|[x, y]| Vec2::new(x, y));
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let o = orders[perm];
        let b = [a[o[0]], a[o[1]], a[o[2]]];
        prop_assert_eq!(tritangent_distance(&a, &b), 0.0);
        prop_assert_eq!(tritangent_distance(&a, &b), tritangent_distance(&b, &a));
    }

    #[test]
    fn ss_rows_round_trip(
        centre in prop::option::of((-1e3f64..1e3, -1e3f64..1e3)),
        radius in -1e3f64..1e3,
        on_ma in any::<bool>(),
        chain in 0usize..100,
        contacts in prop::collection::vec((0usize..4, 0.0f64..10.0, 1u8..4), 1..4),
    ) {
        let row = SsRow {
            kind: SsKind::A1A1,
            role: SsRole::Chain(chain),
            centre,
            direction: centre.map(|(x, y)| (y, -x)),
            radius,
            on_ma,
            contacts: contacts.into_iter().map(|(branch, arclength, order)| Contact { branch, arclength, order }).collect(),
        };
        let cusp = SsRow { kind: SsKind::A1A2, role: SsRole::Cusp, ..row.clone() };
        let rows = vec![row, cusp];
        let mut buf = Vec::new();
        write_ss_rows(&mut buf, &rows).unwrap();
        prop_assert_eq!(read_ss_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn path_rows_round_trip(values in prop::collection::vec((1e-9f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..20)) {
        let rows: Vec<PathRow> = values
            .iter()
            .enumerate()
            .map(|(i, &(k, x, y))| PathRow {
                k,
                path_id: i % 3,
                role: ["contact1", "a1", "center"][i % 3].to_string(),
                x,
                y,
                angle_deg: y.atan2(x).to_degrees(),
            })
            .collect();
        let mut buf = Vec::new();
        write_path_rows(&mut buf, &rows).unwrap();
        prop_assert_eq!(read_path_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn feature_rows_round_trip(values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1e3f64..1e3, 0usize..3), 1..20)) {
        let kinds = [FeatureKind::VertexMax, FeatureKind::VertexMin, FeatureKind::Inflexion];
        let points: Vec<isoskel::features::FeaturePoint> = values
            .iter()
            .enumerate()
            .map(|(i, &(x, y, kappa, kind))| isoskel::features::FeaturePoint {
                kind: kinds[kind],
                position: Vec2::new(x, y),
                level: 1e-3,
                branch_id: i % 2,
                arclength: i as f64 * 0.1,
                curvature: kappa,
            })
            .collect();
        let mut buf = Vec::new();
        isoskel::io::write_features(&mut buf, &points).unwrap();
        let want: Vec<FeatureRow> = points.iter().map(FeatureRow::from).collect();
        prop_assert_eq!(read_features(buf.as_slice()).unwrap(), want);
    }
}
