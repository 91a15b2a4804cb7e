use std::sync::Arc;

use ncsym::{
    cm_membership, cm_point, coadjoint_eval, derivation_from_oneform, int, moment_map, necklace_basis,
    parse_expression, poisson_oracle, polarize, random, trace_evaluate, trace_polynomial, trace_vanishing_probe,
    verify_homomorphism, ArrowId, DimensionVector, DoubledQuiver, Error, Form, FormalAutomorphism, Matrix, Necklace,
    PathAlgebraElement, Polynomial, ProbeVerdict, Quiver, Rational, RepPoint, SymplecticData,
};

fn one_loop() -> (SymplecticData, Arc<Quiver>) {
    let omega = SymplecticData::one_loop();
    let q = omega.quiver().clone();
    (omega, q)
}

fn a2() -> SymplecticData {
    let q = Quiver::new(["1", "2"], [("a", "1", "2")]).unwrap();
    SymplecticData::new(DoubledQuiver::new(q).unwrap())
}

fn nk(src: &str, q: &Arc<Quiver>) -> Necklace {
    parse_expression(src, q).unwrap().into_necklace().unwrap()
}

fn form(src: &str, q: &Arc<Quiver>) -> Form {
    parse_expression(src, q).unwrap().into_form().unwrap()
}

fn mat(rows: &[&[i64]]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
}

fn point(q: &Arc<Quiver>, x: Matrix, y: Matrix) -> RepPoint {
    let n = x.rows();
    RepPoint::new(q, DimensionVector::uniform(q, n).unwrap(), vec![x, y]).unwrap()
}

#[test]
fn binary_necklace_counts() {
    let (_, q) = one_loop();
    let counts: Vec<usize> = (0..=6).map(|d| necklace_basis(&q, d).len()).collect();
    assert_eq!(counts, [1, 2, 3, 4, 6, 8, 14]);
}

#[test]
fn rotations_share_a_class() {
    let (_, q) = one_loop();
    assert_eq!(nk("x x x* x", &q), nk("cyc(x x x x*)", &q));
    assert!(nk("x x* - x* x", &q).is_zero());
}

#[test]
fn hamiltonian_vector_fields_of_quadratics() {
    let (omega, q) = one_loop();
    assert_eq!(omega.hamiltonian_derivation(&nk("cyc(x x*)", &q)).to_string(), "theta{x -> -x, x* -> x*}");
    assert_eq!(omega.hamiltonian_derivation(&nk("cyc(x x)", &q)).to_string(), "theta{x* -> 2 x}");
    assert!(omega.hamiltonian_derivation(&nk("e(0)", &q)).is_zero());
}

#[test]
fn one_form_to_derivation() {
    let (omega, q) = one_loop();
    let theta = derivation_from_oneform(&form("d(x*)", &q), &omega).unwrap();
    assert_eq!(theta.to_string(), "theta{x -> e(0)}");
    let mut rng = random::trial_rng(3, 0, 0);
    for _ in 0..20 {
        let f = random::necklace(&mut rng, &q, 1, 5, 3);
        let df = Form::from(&f).d();
        assert_eq!(derivation_from_oneform(&df, &omega).unwrap(), omega.hamiltonian_derivation(&f).scale(&int(-1)));
    }
}

#[test]
fn contraction_by_a_constant_field() {
    let (_, q) = one_loop();
    let theta = parse_expression("theta{x -> e(0)}", &q).unwrap().into_derivation().unwrap();
    assert_eq!(form("d(x) d(x*)", &q).contract(&theta).unwrap(), form("cyc(d(x*))", &q));
}

#[test]
fn pullback_by_a_quadratic_shift() {
    let (_, q) = one_loop();
    let x = PathAlgebraElement::arrow(&q, ArrowId(0));
    let phi = FormalAutomorphism::new(&q, [(ArrowId(0), &x + &x.pow(2))], 6).unwrap();
    let pulled = phi.pullback(&form("d(x) d(x*)", &q), 6).unwrap();
    assert_eq!(pulled, form("d(x) d(x*) + x d(x) d(x*) + d(x) x d(x*)", &q));
}

#[test]
fn trace_values() {
    let (_, q) = one_loop();
    let rho = point(&q, mat(&[&[0, 1], &[0, 0]]), mat(&[&[0, 0], &[1, 0]]));
    assert_eq!(trace_evaluate(&nk("cyc(x x*)", &q), &rho).unwrap(), int(1));
    let three = point(&q, Matrix::zeros(3, 3), Matrix::zeros(3, 3));
    assert_eq!(trace_evaluate(&nk("e(0)", &q), &three).unwrap(), int(3));
}

#[test]
fn trace_of_a_square() {
    let (_, q) = one_loop();
    let dims = DimensionVector::uniform(&q, 2).unwrap();
    let layout = ncsym::EntryLayout::new(&q, &dims);
    let v = |i, j| Polynomial::var(layout.var(ArrowId(0), i, j));
    let expected = &(&(&v(0, 0) * &v(0, 0)) + &(&v(0, 1) * &v(1, 0)).scale(&int(2))) + &(&v(1, 1) * &v(1, 1));
    assert_eq!(trace_polynomial(&nk("cyc(x x)", &q), &dims).unwrap(), expected);
}

#[test]
fn moment_map_values() {
    let (omega, q) = one_loop();
    let rho = point(&q, mat(&[&[0, 1], &[0, 0]]), mat(&[&[0, 0], &[1, 0]]));
    assert_eq!(moment_map(&rho, &omega).unwrap().component(ncsym::VertexId(0)), &mat(&[&[1, 0], &[0, -1]]));

    let omega = a2();
    let q = omega.quiver();
    let dims = DimensionVector::new(q, vec![1, 1]).unwrap();
    let rho = RepPoint::new(q, dims, vec![mat(&[&[2]]), mat(&[&[3]])]).unwrap();
    let mu = moment_map(&rho, &omega).unwrap();
    assert_eq!(mu.0, vec![mat(&[&[-6]]), mat(&[&[6]])]);
}

#[test]
fn coordinate_bracket_of_traces() {
    let (omega, q) = one_loop();
    for n in 1..=3 {
        let dims = DimensionVector::uniform(&q, n).unwrap();
        let tx = trace_polynomial(&nk("cyc(x)", &q), &dims).unwrap();
        let ty = trace_polynomial(&nk("cyc(x*)", &q), &dims).unwrap();
        assert_eq!(poisson_oracle(&tx, &ty, &dims, &omega), Polynomial::constant(int(n as i64)));
        assert!(verify_homomorphism(&nk("cyc(x)", &q), &nk("cyc(x*)", &q), &dims, &omega).unwrap().equal);
    }
    let dims = DimensionVector::uniform(&q, 2).unwrap();
    assert!(verify_homomorphism(&nk("cyc(x x)", &q), &nk("cyc(x* x*)", &q), &dims, &omega).unwrap().equal);
    assert!(verify_homomorphism(&nk("cyc(x x x*)", &q), &nk("e(0)", &q), &dims, &omega).unwrap().equal);
}

#[test]
fn polarizing_a_square() {
    let (_, q) = one_loop();
    let pol = polarize(&nk("cyc(x x)", &q), &[2, 0]).unwrap();
    assert_eq!(pol.necklace.to_string(), "2 cyc(x_1 x_2)");
    assert_eq!(pol.reidentify(), nk("2 cyc(x x)", &q));
    assert_eq!(polarize(&nk("cyc(x x*)", &q), &[1, 1]).unwrap().necklace.to_string(), "cyc(x_1 x_1*)");
}

#[test]
fn probe_verdicts() {
    let (_, q) = one_loop();
    let el = |s: &str| parse_expression(s, &q).unwrap().into_element().unwrap();
    assert!(matches!(trace_vanishing_probe(&el("x x* - x* x"), 3, 5, 1).unwrap(), ProbeVerdict::Kernel));
    match trace_vanishing_probe(&el("x"), 1, 5, 1).unwrap() {
        ProbeVerdict::Witness { n, .. } => assert_eq!(n, 1),
        other => panic!("{other:?}"),
    }
    match trace_vanishing_probe(&el("x x x* x* - x x* x x*"), 2, 50, 1).unwrap() {
        ProbeVerdict::Witness { n, value, .. } => {
            assert_eq!(n, 2);
            assert_ne!(value, int(0));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn calogero_moser_points() {
    let pt = cm_point(&[int(0)], &[int(0)]).unwrap();
    assert_eq!(pt.shifted_commutator(), mat(&[&[1]]));
    let pt = cm_point(&[int(0), int(1)], &[int(0), int(0)]).unwrap();
    assert_eq!(pt.shifted_commutator(), mat(&[&[1, 1], &[1, 1]]));
    assert!(cm_membership(&pt.x, &pt.y).unwrap());
    assert!(cm_membership(&Matrix::zeros(1, 1), &Matrix::zeros(1, 1)).unwrap());
    assert!(!cm_membership(&Matrix::zeros(2, 2), &Matrix::zeros(2, 2)).unwrap());

    let (_, q) = one_loop();
    let half = Rational::new(1.into(), 2.into());
    let pt = cm_point(&[int(0), int(2)], &[int(5), half]).unwrap();
    assert_eq!(coadjoint_eval(&nk("cyc(x x*)", &q), &pt).unwrap(), int(1));
    assert_eq!(coadjoint_eval(&nk("x x* - x* x", &q), &pt).unwrap(), int(0));
    assert!(matches!(cm_point(&[int(1), int(1)], &[int(0), int(0)]), Err(Error::RepeatedPosition { .. })));
}

#[test]
fn dsl_diagnostics() {
    let omega = a2();
    let q = omega.quiver();
    assert!(parse_expression("cyc(a a)", q).is_err());
    let (_, q) = one_loop();
    assert_eq!(nk("cyc(x x* )", &q).to_string(), "cyc(x x*)");
    assert!(matches!(
        parse_expression("x + q", &q),
        Err(Error::Located { ref source, .. }) if **source == Error::UnknownArrow("q".into())
    ));
}
