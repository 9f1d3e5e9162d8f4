use hyperball_core::bundle::{
    alpha_form, bergman_kernel, bundle_action, curvature_check, push_tangent, theta_line_integral, CirclePoint,
    SignConvention, Tangent,
};
use hyperball_core::coherent::{coherent_eval, equivariance_check, CoherentState};
use hyperball_core::hermitian::{jacobian_matrix, VectorClass, EPS_GRP};
use hyperball_core::random::{random_ball_point, random_hyperbolic, random_su, seeded};
use hyperball_core::series::residue::{c1_closed_form, c1_residue};
use hyperball_core::series::{example_gamma0, SeedData};
use hyperball_core::spectral::{eigen_residual, hyperbolic_data, normal_form_residual};
use hyperball_core::torus::{
    ball_to_coords, coords_to_ball, gamma_in_coords, lambda_sample, reduce_r, torus_sample, CylCoords, TorusSpec,
};
use hyperball_core::*;
use nalgebra::DVector;
use proptest::prelude::*;
use std::f64::consts::PI;

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn hvec(parts: &[(f64, f64)]) -> HVec {
    HVec::new(parts.iter().map(|&(re, im)| C64::new(re, im)).collect())
}

fn pair() -> impl Strategy<Value = (f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64)
}

fn push(g: &GroupElement, z: &BallPoint, dz: &[C64]) -> Vec<C64> {
    let j = jacobian_matrix(g, z).unwrap();
    (j * DVector::from_column_slice(dz)).iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn form_is_conjugate_symmetric(a in prop::collection::vec(pair(), 3), b in prop::collection::vec(pair(), 3)) {
        let (z, w) = (hvec(&a), hvec(&b));
        let d = herm_form(&z, &w).unwrap() - herm_form(&w, &z).unwrap().conj();
        prop_assert!(d.norm() < 1e-14);
    }

    #[test]
    fn action_preserves_sign_class(seed in any::<u64>(), a in prop::collection::vec(pair(), 3)) {
        let mut rng = seeded(seed);
        let g = random_su(2, 1.0, &mut rng);
        let v = hvec(&a);
        let q = herm_form(&v, &v).unwrap().re;
        prop_assume!(q.abs() > 1e-3);
        let before = classify_vector(&v, 1e-9).unwrap();
        prop_assert_ne!(before, VectorClass::Null);
        prop_assert_eq!(classify_vector(&g.apply(&v), 1e-9).unwrap(), before);
    }

    #[test]
    fn action_stays_in_ball(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let g = random_su(2, 2.0, &mut rng);
        let z = random_ball_point(2, 0.95, &mut rng);
        prop_assert!(act(&g, &z).unwrap().norm_sqr() < 1.0);
    }

    #[test]
    fn jacobian_cocycle_and_isometry(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let g1 = random_su(2, 1.0, &mut rng);
        let g2 = random_su(2, 1.0, &mut rng);
        let z = random_ball_point(2, 0.9, &mut rng);
        let w = random_ball_point(2, 0.9, &mut rng);
        let lhs = jacobian_det(&g1.compose(&g2), &z).unwrap();
        let rhs = jacobian_det(&g1, &act(&g2, &z).unwrap()).unwrap() * jacobian_det(&g2, &z).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-10);
        let (zl, wl) = (z.lift(), w.lift());
        let moved = herm_form(&g1.apply(&zl), &g1.apply(&wl)).unwrap();
        prop_assert!(rel(moved, herm_form(&zl, &wl).unwrap()) < 1e-10);
    }

    #[test]
    fn spectral_data_of_conjugates(seed in any::<u64>(), lambda in 1.2..20.0f64) {
        let mut rng = seeded(seed);
        let g = random_hyperbolic(lambda, 1.0, &mut rng);
        let d = hyperbolic_data(&g, EPS_GRP).unwrap();
        prop_assert!(eigen_residual(&d) < 1e-9);
        prop_assert!((d.lambda - lambda).abs() < 1e-9 * lambda);
        let a = build_a(&d).unwrap();
        prop_assert!(normal_form_residual(&d, &a).unwrap() < 1e-8);
        let h = random_su(2, 1.0, &mut rng);
        match classify_element(&g.conjugate_by(&h), EPS_GRP).unwrap() {
            ElementClass::Hyperbolic(e) => prop_assert!((e.lambda - lambda).abs() < 1e-9 * lambda),
            other => prop_assert!(false, "class {}", other.tag()),
        }
    }

    #[test]
    fn normal_form_keeps_the_axis(lambda in 1.1..30.0f64, t in -0.99..0.99f64) {
        let g = normal_form(lambda).unwrap();
        let z = BallPoint::from_real_imag(&[(0.0, 0.0), (t, 0.0)]).unwrap();
        let w = act(&g, &z).unwrap();
        prop_assert!(w.coords()[0].norm() < 1e-14);
        prop_assert!(w.coords()[1].im.abs() < 1e-14);
        prop_assert!(w.coords()[1].re.abs() < 1.0);
    }

    #[test]
    fn bergman_transformation_law(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let g = random_su(2, 1.0, &mut rng);
        let z = random_ball_point(2, 0.8, &mut rng);
        let w = random_ball_point(2, 0.8, &mut rng);
        let k = bergman_kernel(&z, &w).unwrap();
        prop_assert!(rel(k, bergman_kernel(&w, &z).unwrap().conj()) < 1e-12);
        let gz = act(&g, &z).unwrap();
        let gw = act(&g, &w).unwrap();
        let moved = bergman_kernel(&gz, &gw).unwrap()
            * jacobian_det(&g, &z).unwrap()
            * jacobian_det(&g, &w).unwrap().conj();
        prop_assert!(rel(moved, k) < 1e-10);
    }

    #[test]
    fn alpha_is_invariant(seed in any::<u64>(), phase in 0.0..(2.0 * PI)) {
        let mut rng = seeded(seed);
        let m = random_su(2, 1.0, &mut rng);
        let z = random_ball_point(2, 0.8, &mut rng);
        let p = CirclePoint::with_phase(z, phase);
        let dz: Vec<C64> = (0..2).map(|j| C64::new(0.3 * j as f64 - 0.2, 0.1 + 0.2 * j as f64)).collect();
        let mut t = Tangent::base(dz);
        t.dzeta = C64::new(0.4, -0.3);
        let conv = SignConvention::Legendrian;
        let before = alpha_form(&p, &t, conv);
        let after = alpha_form(&bundle_action(&m, &p).unwrap(), &push_tangent(&m, &p, &t).unwrap(), conv);
        prop_assert!((after - before).norm() < 1e-9 * before.norm().max(1.0));
    }

    #[test]
    fn torus_coordinates_round_trip(r in 0.05..20.0f64, phi in 0.1..3.0f64, radius in 0.0..0.95f64, theta in 0.0..6.2f64) {
        let c = CylCoords::new(r, phi, radius, theta).unwrap();
        let back = ball_to_coords(&coords_to_ball(&c).unwrap()).unwrap();
        prop_assert!((back.r - r).abs() < 1e-9 * r);
        prop_assert!((back.phi - phi).abs() < 1e-9);
        prop_assert!((back.radius - radius).abs() < 1e-9);
    }

    #[test]
    fn gamma_scales_r_only(lambda in 1.2..6.0f64, r in 0.2..5.0f64, phi in 0.2..2.9f64, radius in 0.05..0.9f64, theta in 0.0..6.2f64) {
        let spec = TorusSpec::normal(1, 1, lambda).unwrap();
        let c = CylCoords::new(r, phi, radius, theta).unwrap();
        let g = gamma_in_coords(&spec, &c).unwrap();
        prop_assert!((g.phi - phi).abs() < 1e-12);
        prop_assert!((g.radius - radius).abs() < 1e-12);
        prop_assert!((g.r / r - lambda * lambda).abs() < 1e-12 * lambda * lambda);
    }

    #[test]
    fn r_domain_tiles(lambda in 1.2..6.0f64, r in 1e-4..1e4f64) {
        let spec = TorusSpec::normal(1, 1, lambda).unwrap();
        let l2 = lambda * lambda;
        let (r0, n) = reduce_r(&spec, r).unwrap();
        prop_assert!((1.0..l2).contains(&r0));
        prop_assert!((r0 * l2.powi(n as i32) - r).abs() < 1e-12 * r);
    }

    #[test]
    fn torus_is_legendrian(k in 1u32..4, l in 1u32..4, seed in any::<u64>(), r in 0.3..4.0f64, theta in 0.0..6.2f64) {
        let g = random_hyperbolic(2.5, 0.8, &mut seeded(seed));
        let spec = TorusSpec::for_element(k, l, &g).unwrap();
        let conv = SignConvention::Legendrian;
        let a = torus_sample(&spec, r, theta).unwrap();
        let b = lambda_sample(&spec, r, theta).unwrap();
        let ra = alpha_form(&a.point, &a.d_r, conv).norm().max(alpha_form(&a.point, &a.d_theta, conv).norm());
        let rb = alpha_form(&b.point, &b.d_r, conv).norm().max(alpha_form(&b.point, &b.d_theta, conv).norm());
        prop_assert!(ra < 1e-8 && rb < 1e-8);
        prop_assert!((ra - rb).abs() < 1e-9);
    }

    #[test]
    fn coherent_state_is_hermitian(seed in any::<u64>(), k in 1u32..3, a in 0.0..6.2f64, b in 0.0..6.2f64) {
        let mut rng = seeded(seed);
        let p = CirclePoint::with_phase(random_ball_point(2, 0.7, &mut rng), a);
        let q = CirclePoint::with_phase(random_ball_point(2, 0.7, &mut rng), b);
        let x = coherent_eval(&CoherentState::new(q.clone(), k).unwrap(), &p).unwrap();
        let y = coherent_eval(&CoherentState::new(p, k).unwrap(), &q).unwrap();
        prop_assert!(rel(x, y.conj()) < 1e-12);
    }

    #[test]
    fn coherent_state_is_equivariant(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let g = random_su(2, 0.8, &mut rng);
        let cs = CoherentState::new(CirclePoint::with_phase(random_ball_point(2, 0.6, &mut rng), 0.4), 1).unwrap();
        let samples: Vec<CirclePoint> =
            (0..4).map(|j| CirclePoint::with_phase(random_ball_point(2, 0.6, &mut rng), j as f64)).collect();
        prop_assert!(equivariance_check(&g, &cs, &samples).unwrap() < 1e-9);
    }

    #[test]
    fn seed_terms_are_gamma0_invariant(k in 1u32..4, l in 1u32..4, seed in any::<u64>(), m in -3i64..4) {
        let g0 = example_gamma0();
        let sd = SeedData::from_hyperbolic(k, l, hyperbolic_data(&g0, EPS_GRP).unwrap()).unwrap();
        let mut rng = seeded(seed);
        let g = random_su(2, 0.7, &mut rng);
        let z = random_ball_point(2, 0.8, &mut rng);
        let a = sd.term(&g, &z).unwrap();
        let b = sd.term(&g0.pow(m).compose(&g), &z).unwrap();
        prop_assert!((a - b).norm() < 1e-11 * a.norm().max(1.0));
    }

    #[test]
    fn residue_closed_form(k in 1u32..6, l in 1u32..6) {
        prop_assert_eq!(c1_residue(k, l).unwrap(), c1_closed_form(k, l).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curvature_identity(seed in any::<u64>(), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let z = random_ball_point(2, 0.7, &mut seeded(seed));
        let u = Tangent::coordinate(2, i).dz;
        let v = Tangent::coordinate(2, j).dz;
        for conv in [SignConvention::Definition, SignConvention::Legendrian] {
            prop_assert!(curvature_check(&z, &u, &v, 1e-4, conv).unwrap() < 1e-5);
        }
    }

    #[test]
    fn closed_loop_integral_is_invariant(seed in any::<u64>(), rho in 0.05..0.3f64) {
        let mut rng = seeded(seed);
        let m = random_su(2, 0.8, &mut rng);
        let c = random_ball_point(2, 0.5, &mut rng);
        let (c0, c1) = (c.coords()[0], c.coords()[1]);
        let curve = move |t: f64| {
            let (s, co) = t.sin_cos();
            let z = BallPoint::new(vec![c0 + rho * C64::new(co, 0.3 * s), c1 + rho * C64::new(0.5 * s, co)])?;
            Ok((z, vec![rho * C64::new(-s, 0.3 * co), rho * C64::new(0.5 * co, -s)]))
        };
        let moved = |t: f64| {
            let (z, dz) = curve(t)?;
            let d = push(&m, &z, &dz);
            Ok((act(&m, &z)?, d))
        };
        let conv = SignConvention::Legendrian;
        let a = theta_line_integral(curve, 0.0, 2.0 * PI, 256, conv).unwrap();
        let b = theta_line_integral(moved, 0.0, 2.0 * PI, 256, conv).unwrap();
        prop_assert!((a - b).norm() < 1e-8);
    }
}
