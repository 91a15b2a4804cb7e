use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ncsym::{
    polarize, random, trace_evaluate, trace_polynomial, DimensionVector, DoubledQuiver, Form, Quiver, RepPoint,
    SymplecticData,
};

fn two_vertex() -> SymplecticData {
    let q = Quiver::new(["1", "2"], [("a", "1", "2"), ("b", "1", "2")]).unwrap();
    SymplecticData::new(DoubledQuiver::new(q).unwrap())
}

fn quivers() -> impl Strategy<Value = SymplecticData> {
    prop_oneof![Just(SymplecticData::one_loop()), Just(two_vertex())]
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplication_is_associative(omega in quivers(), seed: u64) {
        let mut r = rng(seed);
        let q = omega.quiver();
        let (a, b, c) = (random::element(&mut r, q, 3, 3), random::element(&mut r, q, 3, 3), random::element(&mut r, q, 3, 3));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(omega in quivers(), seed: u64) {
        let mut r = rng(seed);
        let q = omega.quiver();
        let f = random::necklace(&mut r, q, 0, 5, 3);
        let g = random::necklace(&mut r, q, 0, 5, 3);
        let h = random::necklace(&mut r, q, 0, 4, 2);
        prop_assert!((&omega.bracket(&f, &g) + &omega.bracket(&g, &f)).is_zero());
        let jac = &(&omega.bracket(&f, &omega.bracket(&g, &h)) + &omega.bracket(&g, &omega.bracket(&h, &f)))
            + &omega.bracket(&h, &omega.bracket(&f, &g));
        prop_assert!(jac.is_zero(), "{}", jac);
    }

    #[test]
    fn bracket_formulas_agree(omega in quivers(), seed: u64) {
        let mut r = rng(seed);
        let q = omega.quiver();
        let f = random::necklace(&mut r, q, 0, 6, 3);
        let g = random::necklace(&mut r, q, 0, 6, 3);
        prop_assert_eq!(omega.bracket(&f, &g), omega.bracket_tensor_oracle(&f, &g));
    }

    #[test]
    fn cartan_magic_formula(omega in quivers(), seed: u64, k in 0usize..=2) {
        let mut r = rng(seed);
        let q = omega.quiver();
        let alpha = random::form(&mut r, q, k, 1, 5, 2);
        let theta = random::derivation(&mut r, q, 2, 2);
        let di = if k == 0 { Form::zero(q, 0) } else { alpha.contract(&theta).unwrap().d() };
        let id = alpha.d().contract(&theta).unwrap();
        prop_assert_eq!(alpha.lie_derivative(&theta).unwrap(), di.try_add(&id).unwrap());
        prop_assert!(alpha.d().d().is_zero());
    }

    #[test]
    fn homotopy_inverts_d_on_exact_forms(omega in quivers(), seed: u64, k in 0usize..=1) {
        let mut r = rng(seed);
        let q = omega.quiver();
        let beta = random::form(&mut r, q, k, 1, 5, 3);
        let closed = beta.d();
        prop_assume!(!closed.is_zero());
        prop_assert_eq!(closed.euler_homotopy().unwrap().d(), closed);
    }

    #[test]
    fn trace_is_conjugation_invariant(seed: u64, n in 1usize..=3) {
        let mut r = rng(seed);
        let omega = SymplecticData::one_loop();
        let q = omega.quiver();
        let f = random::necklace(&mut r, q, 0, 5, 3);
        let dims = DimensionVector::uniform(q, n).unwrap();
        let rho = RepPoint::random(q, dims, &mut r, 3);
        let g = random::invertible_matrix(&mut r, n, 2);
        let moved = rho.conjugate(&[g]).unwrap();
        prop_assert_eq!(trace_evaluate(&f, &rho).unwrap(), trace_evaluate(&f, &moved).unwrap());
    }

    #[test]
    fn trace_polynomial_agrees_with_evaluation(omega in quivers(), seed: u64) {
        let mut r = rng(seed);
        let q = omega.quiver();
        let f = random::necklace(&mut r, q, 0, 4, 3);
        let dims = DimensionVector::uniform(q, 2).unwrap();
        let rho = RepPoint::random(q, dims.clone(), &mut r, 3);
        let poly = trace_polynomial(&f, &dims).unwrap();
        let layout = ncsym::EntryLayout::new(q, &dims);
        prop_assert_eq!(poly.evaluate(|v| layout.value_at(&rho, v)), trace_evaluate(&f, &rho).unwrap());
    }

    #[test]
    fn polarization_round_trips(seed: u64) {
        let mut r = rng(seed);
        let q = SymplecticData::one_loop().quiver().clone();
        let f = random::nonzero_necklace(&mut r, &q, 4, 4, 1);
        let (path, _) = f.cycles().next().unwrap();
        let mult = path.multidegree(q.arrow_count());
        let f = f.homogeneous_part(4);
        let pol = polarize(&f, &mult).unwrap();
        let k: usize = mult.iter().map(|&m| if m > 0 { (1..=m).product::<usize>() } else { 1 }).product();
        let expected = f.scale(&ncsym::int(k as i64));
        prop_assert_eq!(pol.reidentify(), expected);
    }
}

#[test]
fn arc_shares_one_quiver() {
    let omega = SymplecticData::one_loop();
    assert!(Arc::ptr_eq(omega.quiver(), omega.doubled().quiver()));
}
