use cutsphere_core::linalg::norm_sq;
use cutsphere_core::problems::*;
use cutsphere_core::Constraint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn convexified(c: &dyn Constraint, x: &[f64]) -> f64 {
    c.eval(x) + c.curvature() * norm_sq(x)
}

fn central_difference(c: &dyn Constraint, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        g[i] = (convexified(c, &xp) - convexified(c, &xm)) / (2.0 * h);
    }
    g
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

#[test]
fn npc_gradients_match_finite_differences() {
    let spec = NpcSpec::iris_default();
    let p = build_npc(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let x = random_point(&mut rng, p.n, 0.6);
        for c in &p.constraints {
            let g = c.convexified_gradient(&x).unwrap();
            let fd = central_difference(c.as_ref(), &x);
            let err = norm_sq(&g.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>()).sqrt();
            assert!(err <= 1e-5 * (1.0 + norm_sq(&g).sqrt()), "{}: {err}", c.label());
        }
    }
}

#[test]
fn class_risk_jacobian_matches_finite_differences() {
    let spec = NpcSpec::iris_default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for class in 0..spec.k() {
        let risk = ClassRisk::new(&spec, class, 0.0);
        for _ in 0..20 {
            let x = random_point(&mut rng, spec.k() * spec.p(), 1.0);
            let g = risk.gradient(&x);
            for i in 0..x.len() {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (risk.eval(&xp) - risk.eval(&xm)) / (2.0 * h);
                assert!((g[i] - fd).abs() <= 1e-5 * (1.0 + g[i].abs()), "class {class} coord {i}");
            }
        }
    }
}

#[test]
fn npc_convexified_constraints_pass_midpoint_test() {
    let spec = NpcSpec::iris_default();
    let p = build_npc(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for c in &p.constraints {
        for _ in 0..100 {
            let u = random_point(&mut rng, p.n, 3.0);
            let v = random_point(&mut rng, p.n, 3.0);
            let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
            let lhs = convexified(c.as_ref(), &mid);
            let rhs = 0.5 * (convexified(c.as_ref(), &u) + convexified(c.as_ref(), &v));
            assert!(lhs <= rhs + 1e-9, "{}: {lhs} > {rhs}", c.label());
        }
    }
}

#[test]
fn npc_layout_and_constants() {
    let spec = NpcSpec::iris_default();
    assert_eq!((spec.k(), spec.p()), (3, 4));
    assert!(spec.classes.iter().all(|c| c.len() == 50));
    assert!((spec.eta() - 0.27).abs() < 1e-15);
    let p = build_npc(&spec).unwrap();
    assert_eq!(p.n, 13);
    assert_eq!(p.m(), 6);
    assert!((p.constraints[0].curvature() - (1.0 + spec.rho(0) / 2.0)).abs() < 1e-15);
    assert!((p.constraints[1].curvature() - spec.rho(1) / 2.0).abs() < 1e-15);
    assert_eq!(p.constraints[5].curvature(), 0.0);
    assert_eq!(RHO_PSI, 1.0 / (6.0 * 3f64.sqrt()));
}

/// Feasible for the packing problem iff the circles are pairwise disjoint and
/// all lie in the circle of radius `√(‖y‖²/m)`.
fn geometric_feasible(y: &[f64], spec: &PackingSpec) -> (bool, f64) {
    let m = spec.m();
    let centers = packing_centers(y, m);
    let big = (norm_sq(y) / m as f64).sqrt();
    let mut margin = f64::INFINITY;
    for i in 0..m {
        let ci = centers[i];
        let reach = (ci[0] * ci[0] + ci[1] * ci[1]).sqrt() + spec.radii[i];
        margin = margin.min(big - reach);
        for j in i + 1..m {
            let cj = centers[j];
            let d = ((ci[0] - cj[0]).powi(2) + (ci[1] - cj[1]).powi(2)).sqrt();
            margin = margin.min(d - spec.radii[i] - spec.radii[j]);
        }
    }
    (margin >= 0.0, margin)
}

#[test]
fn packing_feasibility_matches_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for spec in [PackingSpec::unit(2), PackingSpec::unit(3), PackingSpec { radii: vec![1.0, 0.5, 0.7] }] {
        let p = build_packing(&spec).unwrap();
        let mut agree = 0;
        for _ in 0..2000 {
            let y = random_point(&mut rng, p.n, 4.0);
            let (geo, margin) = geometric_feasible(&y, &spec);
            if margin.abs() < 1e-7 {
                continue;
            }
            let alg = p.values(&y).unwrap().iter().all(|v| *v <= 0.0);
            assert_eq!(geo, alg, "y = {y:?}");
            agree += 1;
        }
        assert!(agree > 1900);
    }
}

#[test]
fn packing_optimum_is_feasible_at_its_level() {
    // Two unit circles touching at the origin: enclosing radius 2, level 8.
    let spec = PackingSpec::unit(2);
    let p = build_packing(&spec).unwrap();
    let y = [1.0, -1.0, 0.0, 0.0, 6f64.sqrt()];
    assert!((p.objective(&y) - 8.0).abs() < 1e-12);
    assert!(p.values(&y).unwrap().iter().all(|v| *v <= 1e-12));
    assert!((packing_radius_of(&y, &spec) - 2.0).abs() < 1e-15);
}

#[test]
fn iris_fixture_round_trips() {
    let ds = iris();
    assert_eq!(ds.labels.len(), 150);
    let again = parse_libsvm(&ds.to_libsvm(), None).unwrap();
    assert_eq!(again.features, ds.features);
    assert_eq!(again.labels, ds.labels);
}
