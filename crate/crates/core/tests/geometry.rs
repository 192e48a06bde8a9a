use std::f64::consts::PI;

use obstacle_lab::geometry::fmt17;
use obstacle_lab::*;
use proptest::prelude::*;

#[test]
fn halfspace_polynomial() {
    assert_eq!(halfspace_poly(Point2::new(2.0, -7.0)), 2.0);
    assert_eq!(halfspace_poly_grad(Point2::new(-3.0, 1.0)), [-3.0, 0.0]);
}

#[test]
fn paraboloid_membership() {
    let p = Paraboloid::new(1.0, 0.0).unwrap();
    assert!(paraboloid_contains(&p, Point2::new(1.0, 1.0)));
    assert!(p.contains(Point2::ORIGIN));
    assert!(!p.contains(Point2::new(1.01, 1.0)));
    assert!(!p.contains(Point2::new(0.0, -1e-12)));
    let q = Paraboloid::new(2.0, 0.5).unwrap();
    assert!(q.contains(Point2::new(-0.5, 0.0)));
    assert!(q.contains(Point2::new(0.5, 0.5)));
    assert!(!q.contains(Point2::new(0.6, 0.5)));
    assert!(Paraboloid::new(0.0, 0.0).is_err());
    assert!(Paraboloid::new(-1.0, 0.0).is_err());
    assert!(Paraboloid::new(1.0, f64::NAN).is_err());
}

#[test]
fn grid_layout() {
    let g = Grid2::with_spacing(-1.0, 1.0, 0.0, 0.5, 0.25).unwrap();
    assert_eq!((g.nx, g.ny), (9, 3));
    assert_eq!(g.len(), 27);
    assert_eq!(g.index(2, 1), 11);
    assert_eq!(g.node(2, 1), Point2::new(-0.5, 0.25));
    assert_eq!(g.node_at(11), g.node(2, 1));
    assert!(g.is_boundary(0, 1) && g.is_boundary(4, 2) && !g.is_boundary(4, 1));
    assert_eq!(g.nearest_node(Point2::new(0.1, 0.2)), Some((4, 1)));
    assert_eq!(g.nearest_node(Point2::new(2.0, 0.2)), None);
    assert!(Grid2::with_spacing(0.0, 1.0, 0.0, 1.0, 0.3).is_err());
    assert!(Grid2::new(0.0, 1.0, 0.0, 2.0, 11, 11).is_err());
    assert!(Grid2::new(0.0, 0.0, 0.0, 1.0, 3, 3).is_err());
}

#[test]
fn snapped_grid_has_axis_nodes() {
    let g = Grid2::snapped(-1.03, 0.97, -0.26, 1.0, 0.1).unwrap();
    assert!(g.xmin <= -1.03 && g.xmax >= 0.97 && g.ymin <= -0.26);
    let (i, j) = g.nearest_node(Point2::ORIGIN).unwrap();
    let n = g.node(i, j);
    assert!(n.x1.abs() < 1e-12 && n.x2.abs() < 1e-12);
}

#[test]
fn bilinear_recovers_nodes_and_rejects_outside() {
    let g = Grid2::with_spacing(0.0, 1.0, 0.0, 1.0, 0.5).unwrap();
    let f = ScalarField::from_fn(g, |x| x.x1 * x.x2).unwrap();
    assert_eq!(f.bilinear(Point2::new(0.5, 0.5)).unwrap(), 0.25);
    // xy is bilinear on each cell
    assert!((bilinear_sample(&f, Point2::new(0.3, 0.8)).unwrap() - 0.24).abs() < 1e-15);
    assert!(matches!(f.bilinear(Point2::new(1.5, 0.0)), Err(LabError::Domain(_))));
    assert!(f.bilinear(Point2::new(f64::NAN, 0.0)).is_err());
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let g = Grid2::with_spacing(-1.0, 1.0, -1.0, 0.0, 0.25).unwrap();
    let f = ScalarField::from_fn(g, |x| (x.x1 * 3.7).sin() / 3.0 + x.x2.exp() * 1e-9).unwrap();
    let mut buf = Vec::new();
    f.write_csv(&mut buf).unwrap();
    let back = ScalarField::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, f);
    assert!(ScalarField::read_csv("nx,ny\n".as_bytes()).is_err());
    assert_eq!(fmt17(0.1).parse::<f64>().unwrap(), 0.1);
}

#[test]
fn field_length_is_checked() {
    let g = Grid2::with_spacing(0.0, 1.0, 0.0, 1.0, 0.5).unwrap();
    assert!(ScalarField::new(g, vec![0.0; 8]).is_err());
    assert!(ScalarField::new(g, vec![0.0; 9]).is_ok());
}

#[test]
fn circle_rule_integrates_trig_polynomials() {
    let c = circle_rule(2.0, 64).unwrap();
    assert_eq!(c.len(), 64);
    assert!((c.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-12);
    // ∫ x1^2 ds over ∂B_2 = r^3 π
    assert!((c.integrate(|x| x.x1 * x.x1) - 8.0 * PI).abs() < 1e-12);
    assert!(c.integrate(|x| x.x1 * x.x2.powi(3)).abs() < 1e-12);
    assert!(c.nodes.iter().all(|x| x.x1 != 0.0 && x.x2 != 0.0));
    assert!(circle_rule(0.0, 64).is_err());
    assert!(circle_rule(1.0, 4).is_err());
}

proptest! {
    #[test]
    fn bilinear_exact_on_affine(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0,
                                px in -2.0f64..2.0, py in -1.0f64..3.0) {
        let g = Grid2::with_spacing(-2.0, 2.0, -1.0, 3.0, 0.25).unwrap();
        let f = ScalarField::from_fn(g, |x| a * x.x1 + b * x.x2 + c).unwrap();
        let x = Point2::new(px, py);
        let exact = a * px + b * py + c;
        prop_assert!((f.bilinear(x).unwrap() - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        let d = f.bilinear_grad(x).unwrap();
        prop_assert!((d[0] - a).abs() < 1e-11 && (d[1] - b).abs() < 1e-11);
    }

    #[test]
    fn circle_weights_sum_to_length(r in 1e-3f64..1e3, n in 8usize..2000) {
        let c = circle_rule(r, n).unwrap();
        let s: f64 = c.weights.iter().sum();
        prop_assert!((s - 2.0 * PI * r).abs() <= 1e-12 * 2.0 * PI * r);
        prop_assert!(c.nodes.iter().all(|x| (x.norm() - r).abs() <= 1e-12 * r));
    }

    #[test]
    fn paraboloid_shift_is_translation(g in 0.1f64..5.0, s in -2.0f64..2.0, x1 in -5.0f64..5.0, x2 in -1.0f64..5.0) {
        let p = Paraboloid::new(g, s).unwrap();
        let q = Paraboloid::new(g, 0.0).unwrap();
        prop_assert_eq!(p.contains(Point2::new(x1, x2)), q.contains(Point2::new(x1 + s, x2)));
    }
}

#[test]
fn snapped_grid_keeps_exact_multiples() {
    let g = Grid2::snapped(-2.0, 2.0, -1.0, 3.0, 0.1).unwrap();
    assert_eq!((g.nx, g.ny), (41, 41));
    assert!((g.xmin + 2.0).abs() < 1e-12 && (g.ymax - 3.0).abs() < 1e-12);
}
