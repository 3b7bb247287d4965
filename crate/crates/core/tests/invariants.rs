//! Structural invariants checked on seeded random inputs.

use std::sync::Arc;

use proptest::prelude::*;

use tracial::algebra::random::{self, substream};
use tracial::algebra::{
    conditional_expectation, generated_algebra, project_ball, BallSpec, Element, TracialAlgebra, Tuple,
};
use tracial::closure::{acl_finite, block_classes, dcl_finite, random_inclusion, relative_bicommutant};
use tracial::convex::{Expr, InfConvolution, Legendre, Node, Predicate, SolverOptions};
use tracial::duality::extend_global;
use tracial::suite::{certified_t, random_trace_poly};
use tracial::transport::{cost_orbit, wasserstein, TransportOptions};
use tracial::C64;

fn algebra(seed: u64) -> Arc<TracialAlgebra> {
    random_inclusion(&mut substream(seed, 0), 36).amb().clone()
}

fn light() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn transport(restarts: usize) -> TransportOptions {
    TransportOptions {
        restarts,
        seed: 3,
        ..Default::default()
    }
}

proptest! {
    #[test]
    fn trace_is_tracial_unital_faithful(seed in any::<u64>()) {
        let alg = algebra(seed);
        let mut rng = substream(seed, 1);
        prop_assert!((Element::identity(&alg).trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        for _ in 0..40 {
            let x = random::random_element(&alg, &mut rng);
            let y = random::random_element(&alg, &mut rng);
            prop_assert!(((&x * &y).trace() - (&y * &x).trace()).norm() < 1e-12);
            let pos = (&x.adjoint() * &x).trace();
            prop_assert!(pos.re > 0.0 && pos.im.abs() < 1e-12);
        }
    }

    #[test]
    fn ball_projection_is_nonexpansive(seed in any::<u64>(), r in 0.1..2.0_f64) {
        let alg = algebra(seed);
        let mut rng = substream(seed, 2);
        let ball = BallSpec::uniform(2, r).unwrap();
        let x = random::random_tuple(&alg, 2, &mut rng).scale(2.0);
        let y = random::random_tuple(&alg, 2, &mut rng).scale(2.0);
        let (px, py) = (project_ball(&x, &ball), project_ball(&y, &ball));
        prop_assert!(px.dist(&py) <= x.dist(&y) + 1e-12);
        prop_assert!(px.op_norms().iter().all(|n| *n <= r + 1e-10));
        prop_assert!(project_ball(&px, &ball).dist(&px) < 1e-12);
    }

    #[test]
    fn conditional_expectation_contracts(seed in any::<u64>()) {
        let alg = algebra(seed);
        let mut rng = substream(seed, 3);
        let gen = Tuple::single(random::random_selfadjoint(&alg, &mut rng));
        let sub = generated_algebra(&gen);
        let z = random::random_element(&alg, &mut rng);
        let e = conditional_expectation(sub.basis(), &z).unwrap();
        prop_assert!(e.l2_norm() <= z.l2_norm() + 1e-12);
        prop_assert!(e.op_norm() <= z.op_norm() + 1e-9);
    }

    #[test]
    fn generated_algebra_grows_with_generators(seed in any::<u64>()) {
        let alg = algebra(seed);
        let mut rng = substream(seed, 4);
        let x = random::random_selfadjoint(&alg, &mut rng);
        let y = random::random_selfadjoint(&alg, &mut rng);
        let small = generated_algebra(&Tuple::single(x.clone()));
        let big = generated_algebra(&Tuple::new(vec![x, y]).unwrap());
        prop_assert!(small.dim() <= big.dim());
        prop_assert!(big.containment_residual(&small) < 1e-8);
    }

    #[test]
    fn embedding_preserves_trace(seed in any::<u64>()) {
        let inc = random_inclusion(&mut substream(seed, 5), 36);
        let mut rng = substream(seed, 6);
        let a = random::random_element(inc.sub(), &mut rng);
        prop_assert!((inc.embed(&a).unwrap().trace() - a.trace()).norm() < 1e-12);
    }

    #[test]
    fn dcl_sits_between_image_and_bicommutant(seed in any::<u64>()) {
        let inc = random_inclusion(&mut substream(seed, 7), 36);
        let dcl = dcl_finite(&inc);
        prop_assert!(dcl.algebra.validate().is_ok());
        prop_assert!(inc.image_spanning_set().iter().all(|a| dcl.algebra.contains(a, 1e-9)));
        prop_assert!(block_classes(&inc).projections.iter().all(|p| dcl.algebra.contains(p, 1e-9)));
        prop_assert!(relative_bicommutant(&inc).containment_residual(&dcl.algebra) < 1e-9);
        prop_assert!(acl_finite(&inc).containment_residual(&dcl.algebra) < 1e-9);
    }
}

proptest! {
    #![proptest_config(light())]

    #[test]
    fn cost_is_symmetric_and_conjugation_invariant(seed in any::<u64>(), n in 2..4_usize) {
        let alg = TracialAlgebra::matrix(n).unwrap();
        let mut rng = substream(seed, 8);
        let x = random::random_tuple(&alg, 2, &mut rng);
        let y = random::random_tuple(&alg, 2, &mut rng);
        let opts = transport(8);
        let c = cost_orbit(&x, &y, &opts).unwrap().value;
        prop_assert!((c - cost_orbit(&y, &x, &opts).unwrap().value).abs() < 1e-7);
        let u = random::random_unitary(&alg, &mut rng);
        let v = random::random_unitary(&alg, &mut rng);
        let moved = cost_orbit(&x.conjugate_by(&u), &y.conjugate_by(&v), &opts).unwrap().value;
        prop_assert!((c - moved).abs() < 1e-7, "{c} vs {moved}");
    }

    #[test]
    fn wasserstein_is_a_pseudometric(seed in any::<u64>()) {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let mut rng = substream(seed, 9);
        let pts: Vec<Tuple> = (0..3).map(|_| random::random_tuple(&alg, 2, &mut rng)).collect();
        let d = |i: usize, j: usize| wasserstein(&pts[i], &pts[j], &transport(8)).unwrap().d;
        prop_assert!(d(0, 0) < 1e-6);
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-6);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-6);
    }

    #[test]
    fn more_restarts_never_lower_cost(seed in any::<u64>()) {
        let alg = TracialAlgebra::matrix(3).unwrap();
        let mut rng = substream(seed, 10);
        let x = random::random_tuple(&alg, 2, &mut rng);
        let y = random::random_tuple(&alg, 2, &mut rng);
        let few = cost_orbit(&x, &y, &transport(2)).unwrap().value;
        let many = cost_orbit(&x, &y, &transport(10)).unwrap().value;
        prop_assert!(many >= few);
    }

    #[test]
    fn legendre_is_convex_and_fenchel_young(seed in any::<u64>()) {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let mut rng = substream(seed, 11);
        let b = random::random_tuple(&alg, 1, &mut rng);
        let root = Node::Add(vec![
            Expr::half_norm_sq(1, 1.0).root().clone(),
            Expr::linear(&b, 0.0).root().clone(),
        ]);
        let psi: Arc<dyn Predicate> = Arc::new(Expr::new(1, root).unwrap());
        let ball = BallSpec::uniform(1, 1.0).unwrap();
        let phi = Legendre::new(psi.clone(), ball.clone(), SolverOptions::default()).unwrap();
        let x = random::random_tuple(&alg, 1, &mut rng);
        let z = random::random_tuple(&alg, 1, &mut rng);
        let mid = phi.value(&x.lerp(&z, 0.5));
        prop_assert!(mid <= 0.5 * (phi.value(&x) + phi.value(&z)) + 1e-9);
        for _ in 0..5 {
            let y = random::random_in_ball(&alg, &ball, &mut rng);
            prop_assert!(phi.value(&x) + psi.value(&y) >= x.re_inner(&y) - 1e-9);
        }
    }

    #[test]
    fn inf_convolution_decreases_in_t(seed in any::<u64>()) {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let mut rng = substream(seed, 12);
        let phi: Arc<dyn Predicate> = Arc::new(random_trace_poly(&alg, 1, true, &mut rng));
        let ball = BallSpec::uniform(1, 1.5).unwrap();
        let t = certified_t(phi.as_ref(), &ball);
        let coarse = InfConvolution::new(phi.clone(), t, ball.clone(), SolverOptions::default()).unwrap();
        let fine = InfConvolution::new(phi.clone(), t / 2.0, ball.clone(), SolverOptions::default()).unwrap();
        let x = random::random_in_ball(&alg, &ball, &mut rng);
        prop_assert!(fine.value(&x) >= coarse.value(&x) - 1e-9);
        prop_assert!(phi.value(&x) >= fine.value(&x) - 1e-9);
    }

    #[test]
    fn global_extension_agrees_on_the_ball(seed in any::<u64>()) {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let mut rng = substream(seed, 13);
        let phi: Arc<dyn Predicate> = Arc::new(random_trace_poly(&alg, 1, true, &mut rng));
        let psi: Arc<dyn Predicate> = Arc::new(random_trace_poly(&alg, 1, true, &mut rng));
        let ball = BallSpec::uniform(1, 1.0).unwrap();
        let (ephi, epsi) = extend_global(phi.clone(), psi.clone(), &ball).unwrap();
        let x = random::random_in_ball(&alg, &ball, &mut rng);
        prop_assert_eq!(ephi.value(&x), phi.value(&x));
        prop_assert_eq!(epsi.value(&x), psi.value(&x));
    }
}
