use dirdiff::averaging::{line_average, maximal, m_t, MaximalSpec};
use dirdiff::fields::{catalog_scalar_fields, catalog_vector_fields, Regularity, ScalarField, UnitVectorField};
use dirdiff::measure::{greedy_cover_select, measure_set, GridSpec, IntervalCollection, SampledGrid};
use dirdiff::perturb::{PerturbationMap, SolverSpec};
use dirdiff::quadrature::QuadratureSpec;
use dirdiff::{BoxRegion, Point};
use proptest::prelude::*;

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-2.0..2.0f64, dim).prop_map(|c| Point::from_slice(&c))
}

fn field(dim: usize) -> impl Strategy<Value = UnitVectorField> {
    let n = catalog_vector_fields(dim).unwrap().len();
    (0..n).prop_map(move |i| catalog_vector_fields(dim).unwrap().swap_remove(i))
}

fn map_with_q(v: UnitVectorField, q: f64) -> PerturbationMap {
    let k = v.lipschitz_k();
    let s = if k > 0.0 { q / k } else { q };
    PerturbationMap::new(v, s, SolverSpec::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn catalog_fields_have_unit_norm(dim in 2usize..=4, seed in point(4)) {
        let x = Point::from_slice(&seed.as_slice()[..dim]);
        for v in catalog_vector_fields(dim).unwrap() {
            prop_assert!((v.eval(&x).norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn scalars_vanish_outside_support(x in point(2)) {
        for f in catalog_scalar_fields(2).unwrap() {
            if let Some(b) = f.support_box() {
                if !b.contains(&x) {
                    prop_assert_eq!(f.eval(&x), 0.0);
                }
            }
        }
    }

    #[test]
    fn bi_lipschitz_sandwich(v in field(2), q in 0.0..0.9f64, x in point(2), y in point(2)) {
        let map = map_with_q(v, q);
        let d = x.dist(&y);
        let img = map.apply(&x).dist(&map.apply(&y));
        prop_assert!(img >= (1.0 - q) * d - 1e-12);
        prop_assert!(img <= (1.0 + q) * d + 1e-12);
    }

    #[test]
    fn inverse_is_a_certified_contraction(v in field(3), q in 0.0..0.9f64, z1 in point(3), z2 in point(3)) {
        let map = map_with_q(v, q);
        let tol = map.solver().tolerance;
        let a = map.invert_detailed(&z1).unwrap();
        let b = map.invert(&z2).unwrap();
        prop_assert!(a.point.dist(&b) <= z1.dist(&z2) / (1.0 - q) + 2.0 * tol);
        prop_assert!(map.roundtrip_error(&[z1, z2]).unwrap() <= 2.0 * tol);
        if q > 0.0 {
            let bound = ((tol * (1.0 - q) / a.first_step).ln() / q.ln()).ceil() + 1.0;
            prop_assert!(a.iterations as f64 <= bound.max(1.0));
        }
    }

    #[test]
    fn averages_are_linear_positive_and_bounded(
        x in point(2), angle in 0.0..6.3f64, t in 0.01..0.5f64, a in -3.0..3.0f64, b in -3.0..3.0f64,
    ) {
        let quad = QuadratureSpec::default();
        let dir = Point::xy(angle.cos(), angle.sin());
        let cat = catalog_scalar_fields(2).unwrap();
        let (f, g) = (cat[0].clone(), cat[4].clone());
        let (f2, g2) = (f.clone(), g.clone());
        let combo = ScalarField::custom(2, "combo", Regularity::ContinuousCompactSupport, None, None, f64::INFINITY,
            move |p: &Point| a * f2.eval(p) + b * g2.eval(p)).unwrap();
        let avg = |h: &ScalarField| line_average(h, &dir, &x, t, &quad).unwrap();
        let lhs = avg(&combo);
        let rhs = a * avg(&f) + b * avg(&g);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        let one = ScalarField::constant(2, 1.0).unwrap();
        prop_assert_eq!(avg(&one), 1.0);
        prop_assert!(avg(&f) >= 0.0 && avg(&f) <= f.sup_abs());
        // f + g ≥ f pointwise
        let (f3, g3) = (f.clone(), g.clone());
        let sum = ScalarField::custom(2, "sum", Regularity::ContinuousCompactSupport, None, None, f64::INFINITY,
            move |p: &Point| f3.eval(p) + g3.eval(p)).unwrap();
        prop_assert!(avg(&sum) >= avg(&f));
    }

    #[test]
    fn lipschitz_data_moves_at_most_l_times_t(v in field(2), x in point(2), t in 0.001..0.5f64) {
        let quad = QuadratureSpec::default();
        for f in catalog_scalar_fields(2).unwrap() {
            if let Some(l) = f.lipschitz() {
                let m = m_t(&f, &v, &x, t, &quad).unwrap();
                prop_assert!((m - f.eval(&x)).abs() <= l * t + 1e-12);
            }
        }
    }

    #[test]
    fn more_dyadic_levels_never_lower_the_maximal_function(v in field(2), x in point(2), s in -0.2..0.2f64, j in 1usize..8) {
        let quad = QuadratureSpec::default();
        let map = PerturbationMap::new(v, s, SolverSpec::default()).unwrap();
        for f in catalog_scalar_fields(2).unwrap() {
            let coarse = maximal(&f, &map, &x, &MaximalSpec::new(0.25, j).unwrap(), &quad).unwrap();
            let fine = maximal(&f, &map, &x, &MaximalSpec::new(0.25, j + 1).unwrap(), &quad).unwrap();
            prop_assert!(fine >= coarse);
        }
    }

    #[test]
    fn measure_is_additive_over_disjoint_boxes(a in -1.5..0.0f64, split in 0.05..0.95f64, w in 0.1..1.5f64, h in 0.1..1.5f64) {
        let grid = GridSpec::new(BoxRegion::centered(2, 2.0).unwrap(), 128).unwrap();
        let mid = a + split * w;
        let left = BoxRegion::new(Point::xy(a, -0.5), Point::xy(mid, -0.5 + h)).unwrap();
        let right = BoxRegion::new(Point::xy(mid, -0.5), Point::xy(a + w, -0.5 + h)).unwrap();
        let l = measure_set(|x| left.contains(x), &grid);
        let r = measure_set(|x| right.contains(x), &grid);
        let u = measure_set(|x| left.contains(x) || right.contains(x), &grid);
        prop_assert!((u.value - l.value - r.value).abs() <= u.error_bound + l.error_bound + r.error_bound);
    }

    #[test]
    fn measure_is_invariant_under_cell_translations(i in -20i32..20, j in -20i32..20, r in 0.1..0.6f64) {
        let grid = GridSpec::new(BoxRegion::centered(2, 2.0).unwrap(), 128).unwrap();
        let h = grid.cell_width(0);
        let c = Point::xy(0.013, -0.021);
        let moved = Point::xy(c.as_slice()[0] + i as f64 * h, c.as_slice()[1] + j as f64 * h);
        let a = measure_set(|x| x.dist(&c) < r, &grid);
        let b = measure_set(|x| x.dist(&moved) < r, &grid);
        prop_assert_eq!(a.value, b.value);
    }

    #[test]
    fn refining_the_grid_stays_within_the_coarse_bound(cx in -0.5..0.5f64, cy in -0.5..0.5f64, r in 0.2..1.0f64) {
        let coarse = GridSpec::new(BoxRegion::centered(2, 2.0).unwrap(), 64).unwrap();
        let c = Point::xy(cx, cy);
        let ball = |x: &Point| x.dist(&c) < r;
        let a = measure_set(ball, &coarse);
        let b = measure_set(ball, &coarse.with_resolution(128).unwrap());
        prop_assert!((a.value - b.value).abs() <= a.error_bound);
    }

    #[test]
    fn superlevel_measures_are_nonincreasing(v in field(2), s in -0.2..0.2f64) {
        let map = PerturbationMap::new(v, s, SolverSpec::default()).unwrap();
        let window = GridSpec::window(2, 2.0, 48).unwrap();
        let f = &catalog_scalar_fields(2).unwrap()[2];
        let g: SampledGrid = dirdiff::measure::sample_maximal(f, &map, &window, &MaximalSpec::new(0.25, 4).unwrap(),
            &QuadratureSpec::default(), 0.5).unwrap();
        let h: Vec<f64> = (1..=16).map(|n| g.superlevel(n as f64).value).collect();
        prop_assert!(h.windows(2).all(|w| w[1] <= w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn covering_selection_is_a_disjoint_subfamily_above_a_third(
        raw in prop::collection::vec((-10.0..10.0f64, 0.01..3.0f64), 1..=50),
        frac in 0.0..1.0f64,
    ) {
        let pairs: Vec<(f64, f64)> = raw.iter().map(|&(a, w)| (a, a + w)).collect();
        let col = IntervalCollection::from_pairs(&pairs).unwrap();
        let c = frac * col.union_measure();
        let chosen = greedy_cover_select(&col, c).unwrap();
        for (i, x) in chosen.iter().enumerate() {
            prop_assert!(col.intervals().contains(x));
            for y in &chosen[i + 1..] {
                prop_assert!(!x.intersects(y));
            }
        }
        prop_assert!(chosen.iter().map(|i| i.length()).sum::<f64>() > c / 3.0);
    }
}
