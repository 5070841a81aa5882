//! Values checked against independent computations: adaptive quadrature,
//! reference inversions at tight tolerance, exact segment geometry, closed
//! forms and exhaustive search.

use std::f64::consts::PI;

use dirdiff::averaging::{line_average, m_t_pushforward, m_t_shifted, Integrand, MaximalSpec};
use dirdiff::experiments::{run_norm_convergence, NormConvergenceConfig};
use dirdiff::fields::{
    catalog_scalar_fields, estimate_lipschitz, PairSampler, Regularity, ScalarField, UnitVectorField,
};
use dirdiff::measure::{
    greedy_cover_select, level_set_measure, measure_image, measure_set, sample_maximal, GridSpec,
    IntervalCollection,
};
use dirdiff::perturb::{PerturbationMap, SolverSpec};
use dirdiff::quadrature::QuadratureSpec;
use dirdiff::{BoxRegion, Point};

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Plain fixed-point iteration until the step is below 1e-14.
fn reference_inverse(v: &UnitVectorField, s: f64, z: &Point) -> Point {
    let mut x = *z;
    for _ in 0..10_000 {
        let next = z.offset(-s, &v.eval(&x));
        let step = next.dist(&x);
        x = next;
        if step < 1e-14 {
            break;
        }
    }
    x
}

#[test]
fn gaussian_line_average_matches_adaptive_quadrature() {
    let f = ScalarField::custom(2, "gauss-x", Regularity::Smooth, None, Some(2f64.sqrt()), 1.0, |x: &Point| {
        (-x.as_slice()[0].powi(2)).exp()
    })
    .unwrap();
    let quad = QuadratureSpec::midpoint(4096).unwrap();
    let got = line_average(&f, &Point::xy(1.0, 0.0), &Point::xy(0.0, 0.0), 1.0, &quad).unwrap();
    let oracle = 0.5 * simpson(&|b: f64| (-b * b).exp(), -1.0, 1.0, 1e-13);
    assert!((oracle - 0.7468241328).abs() < 1e-9);
    assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
}

#[test]
fn indicator_averages_match_segment_geometry() {
    let f = ScalarField::indicator(BoxRegion::unit(2).unwrap());
    let v = UnitVectorField::constant(2, 0.0).unwrap();
    let quad = QuadratureSpec::default();
    // Segment [−0.25, 0.25]×{0.5} meets the square in length 0.25.
    let half = line_average(&f, &Point::xy(1.0, 0.0), &Point::xy(0.0, 0.5), 0.25, &quad).unwrap();
    assert_eq!(half, 0.5);
    // Shifted centre −0.3 + 0.3 = 0, segment [−0.2, 0.2].
    let shifted = m_t_shifted(&f, &v, &Point::xy(-0.3, 0.5), 0.3, 0.2, &quad).unwrap();
    assert_eq!(shifted, 0.5);
    let inside = line_average(&f, &Point::xy(1.0, 0.0), &Point::xy(0.5, 0.5), 0.1, &quad).unwrap();
    assert_eq!(inside, 1.0);
}

#[test]
fn shear_inverse_matches_tight_reference() {
    let v = UnitVectorField::shear(2, 1.0).unwrap();
    let map = PerturbationMap::new(v.clone(), 0.4, SolverSpec::default()).unwrap();
    let z = Point::xy(0.5, 0.2);
    let got = map.invert_detailed(&z).unwrap();
    let oracle = reference_inverse(&v, 0.4, &z);
    assert!(got.point.dist(&oracle) < 1e-9);
    assert!(got.point.dist(&oracle) <= got.error_bound + 1e-14);
    assert!((z.dist(&oracle) - 0.4).abs() < 1e-12);
}

#[test]
fn pushforward_average_matches_reference_inversion_and_quadrature() {
    let v = UnitVectorField::shear(2, 1.0).unwrap();
    let bump = ScalarField::bump(Point::xy(0.0, 0.0), 0.25).unwrap();
    let map = PerturbationMap::new(v.clone(), 0.4, SolverSpec::default()).unwrap();
    let x = Point::xy(0.5, 0.2);
    let t = 0.1;
    let quad = QuadratureSpec::midpoint(1024).unwrap();
    let got = m_t_pushforward(&bump, &map, &x, t, &quad, Integrand::Signed).unwrap();
    let dir = v.eval(&reference_inverse(&v, 0.4, &x));
    let oracle = simpson(&|b: f64| bump.eval(&x.offset(b, &dir)), -t, t, 1e-14) / (2.0 * t);
    assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
}

#[test]
fn shear_image_of_unit_square_matches_jacobian() {
    let s = 0.4;
    let map = PerturbationMap::new(UnitVectorField::shear(2, 1.0).unwrap(), s, SolverSpec::default()).unwrap();
    let grid = GridSpec::new(BoxRegion::centered(2, 2.0).unwrap(), 1024).unwrap();
    let est = measure_image(&BoxRegion::unit(2).unwrap(), &map, &grid).unwrap();
    // ∫₀¹ (1 − s·sin x) dx
    let jacobian = simpson(&|x: f64| 1.0 - s * x.sin(), 0.0, 1.0, 1e-14);
    assert!((jacobian - (1.0 - s * (1.0 - 1f64.cos()))).abs() < 1e-12);
    assert!((jacobian - 0.8161).abs() < 1e-4);
    assert!((est.value - jacobian).abs() <= est.error_bound);
    assert!((est.value - jacobian).abs() / jacobian < 0.01);
    // both distortion inequalities at the exact values
    let q = s;
    assert!(jacobian / (2.0 * PI * (1.0 + q).powi(2)) <= 1.0);
    assert!(1.0 <= 2.0 * PI * jacobian / (1.0 - q).powi(2));
}

#[test]
fn indicator_norm_error_equals_t() {
    // Averaging 1_[0,1] along x leaves mass t/4 on each side of each of
    // the two transverse edges: total t.
    let f = ScalarField::indicator(BoxRegion::unit(2).unwrap());
    let v = UnitVectorField::constant(2, 0.0).unwrap();
    let grid = GridSpec::new(BoxRegion::centered(2, 1.5).unwrap(), 1024).unwrap();
    let ts = vec![0.2, 0.1, 0.05];
    let r = run_norm_convergence(&f, &v, &NormConvergenceConfig::new(1.0, ts.clone(), grid)).unwrap();
    let errors = r.column("error").unwrap();
    for (t, e) in ts.iter().zip(&errors) {
        assert!((e - t).abs() / t < 0.03, "t = {t}: error {e}");
    }
    let ratios = r.column("ratio").unwrap();
    assert!(ratios[1..].iter().all(|q| (q - 2.0).abs() < 0.1), "{ratios:?}");
}

#[test]
fn covering_example_is_optimal_by_exhaustive_search() {
    let col = IntervalCollection::from_pairs(&[(0.0, 2.0), (1.0, 3.0), (2.0, 4.0)]).unwrap();
    let chosen = greedy_cover_select(&col, 3.9).unwrap();
    let got: Vec<(f64, f64)> = chosen.iter().map(|i| (i.a, i.b)).collect();
    assert_eq!(got, vec![(0.0, 2.0), (2.0, 4.0)]);
    let items = col.intervals();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << items.len()) {
        let picked: Vec<_> = (0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i]).collect();
        let disjoint = picked
            .iter()
            .enumerate()
            .all(|(i, x)| picked[i + 1..].iter().all(|y| !x.intersects(y)));
        if disjoint {
            best = best.max(picked.iter().map(|i| i.length()).sum());
        }
    }
    let total: f64 = chosen.iter().map(|i| i.length()).sum();
    assert_eq!(total, best);
    assert!(total > 3.9 / 3.0);
}

#[test]
fn sampled_lipschitz_constants() {
    let region = BoxRegion::centered(2, 2.0).unwrap();
    let sampler = PairSampler::local(region, 100_000, 0.05);
    let shear = UnitVectorField::shear(2, 1.0).unwrap();
    let k = estimate_lipschitz(&shear, &sampler, 7);
    assert!(k > 0.9 && k <= 1.0 + 1e-9, "{k}");
    let sinusoid = UnitVectorField::sinusoid(2, 0.5, 1.0, 1.0).unwrap();
    assert!(estimate_lipschitz(&sinusoid, &sampler, 7) <= 0.5 * 2f64.sqrt() + 1e-9);
    let map = PerturbationMap::new(shear, 0.25, SolverSpec::default()).unwrap();
    let w = map.pushforward_field().unwrap();
    assert!(estimate_lipschitz(&w, &sampler, 7) <= 4.0 / 3.0 + 1e-6);
}

#[test]
fn singularity_mass_cross_checked_by_grid_sum() {
    let f = ScalarField::singularity(Point::xy(0.0, 0.0), 1.0, 1.0).unwrap();
    assert!((f.l1_norm().unwrap() - 2.0 * PI).abs() < 1e-12);
    let grid = GridSpec::new(BoxRegion::centered(2, 1.0).unwrap(), 2000).unwrap();
    let sum: f64 = (0..grid.cell_count()).map(|i| f.eval(&grid.cell_center(i))).sum::<f64>() * grid.cell_volume();
    assert!((sum - 2.0 * PI).abs() / (2.0 * PI) < 0.01, "{sum}");
}

#[test]
fn bump_truncation_loses_negligible_mass() {
    let sigma = 0.25;
    let full = PI * sigma * sigma;
    let tail = simpson(&|r: f64| 2.0 * PI * r * (-(r * r) / (sigma * sigma)).exp(), 4.0 * sigma, 12.0 * sigma, 1e-16);
    assert!(tail / full < 1e-6);
    let f = ScalarField::bump(Point::xy(0.0, 0.0), sigma).unwrap();
    let kept = simpson(&|r: f64| 2.0 * PI * r * f.eval(&Point::xy(r, 0.0)), 0.0, 4.0 * sigma, 1e-14);
    assert!((kept - f.l1_norm().unwrap()).abs() / kept < 1e-6);
}

#[test]
fn indicator_level_set_contains_the_square() {
    let f = ScalarField::indicator(BoxRegion::unit(2).unwrap());
    let map = PerturbationMap::new(UnitVectorField::constant(2, 0.0).unwrap(), 0.0, SolverSpec::default()).unwrap();
    let window = GridSpec::window(2, 2.0, 256).unwrap();
    let est = level_set_measure(&f, &map, 0.5, &window, &MaximalSpec::new(0.25, 8).unwrap(), &QuadratureSpec::default())
        .unwrap();
    assert!(est.value >= 1.0 - est.error_bound);
    let square = measure_set(|x| BoxRegion::unit(2).unwrap().contains(x), &window);
    assert!(est.value >= square.value);
}

#[test]
fn planar_singularity_level_sets_shrink_like_inverse_square() {
    // M of |X|^{-1} near the origin is comparable to |X|^{-1}, so
    // {M > n} is a disc of radius ~ c/n.
    let f = &catalog_scalar_fields(2).unwrap()[2];
    let map = PerturbationMap::new(UnitVectorField::constant(2, 0.0).unwrap(), 0.0, SolverSpec::default()).unwrap();
    let window = GridSpec::window(2, 2.0, 1024).unwrap();
    let g = sample_maximal(f, &map, &window, &MaximalSpec::new(0.25, 8).unwrap(), &QuadratureSpec::default(), 1.0)
        .unwrap();
    let h = |n: f64| g.superlevel(n).value;
    for n in [2.0, 4.0] {
        let ratio = h(2.0 * n) / h(n);
        assert!(ratio > 0.15 && ratio < 0.35, "n = {n}: {ratio}");
    }
}
