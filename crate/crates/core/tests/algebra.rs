use parendo::endo::{analyze, one_sided_trace_kernel, self_adjoint_representatives, span_of, trace_form_kernel, TypeLabel, minpoly_lemma_holds};
use parendo::generators::{generate, GenerateOptions};
use parendo::geometry::curvature;
use parendo::holonomy::{adjoint, commutant, fixed_space, holonomy_span, n0_ideal, MatrixAlgebraWithInvolution, MatrixSpan};
use parendo::matrix::{combine, Matrix, QMat};
use parendo::scalar::{Field, Q};
use parendo::structures::{i_pq, l_p, lift_structures, normal_form, structure_manifolds};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REAL_D4: [TypeLabel; 4] = [TypeLabel::Two, TypeLabel::TwoPrime, TypeLabel::Three, TypeLabel::ThreePrime];

fn holonomy_of(label: TypeLabel, seed: u64) -> (MatrixSpan, QMat) {
    let gen = generate(label, &GenerateOptions { seed, ..Default::default() }).unwrap();
    let h = holonomy_span(&curvature(&gen.germ, 2).unwrap());
    (h, gen.germ.g0())
}

fn random_invertible(d: usize, rng: &mut ChaCha8Rng) -> QMat {
    loop {
        let p = Matrix::from_fn(d, d, |i, j| Q::int(rng.gen_range(-2..=2) + if i == j { 3 } else { 0 }));
        if !p.det().is_zero() {
            return p;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fingerprint_invariant_under_congruence_and_basis_change(t in 0usize..4, seed in 0u64..50, pseed in 0u64..1000) {
        let label = REAL_D4[t];
        let (h, g0) = holonomy_of(label, seed);
        let e = commutant(&h, &g0);
        let base = analyze(&e).unwrap();
        prop_assert_eq!(base.label, Some(label));
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let p = random_invertible(g0.rows, &mut rng);
        let pi = p.inverse().unwrap();
        let h2 = MatrixSpan::from_matrices(g0.rows, &h.basis().iter().map(|w| pi.mul(w).mul(&p)).collect::<Vec<_>>());
        let g2 = p.transpose().mul(&g0).mul(&p);
        let e2 = commutant(&h2, &g2);
        prop_assert_eq!(analyze(&e2).unwrap().fingerprint, base.fingerprint);
        // another basis of the same algebra
        let mixed: Vec<QMat> = e
            .basis
            .iter()
            .map(|_| {
                let c: Vec<Q> = e.basis.iter().map(|_| Q::int(rng.gen_range(-2..=2))).collect();
                combine(&c, &e.basis)
            })
            .collect();
        let e3 = MatrixAlgebraWithInvolution::new(&g0, &mixed);
        if e3.dim() == e.dim() {
            prop_assert_eq!(analyze(&e3).unwrap().fingerprint, base.fingerprint);
        }
    }

    #[test]
    fn self_adjoint_non_radical_elements_are_invertible(t in 0usize..4, seed in 0u64..50, cseed in 0u64..1000) {
        let (h, g0) = holonomy_of(REAL_D4[t], seed);
        let e = commutant(&h, &g0);
        let a = analyze(&e).unwrap();
        let reps = self_adjoint_representatives(&e, &a.radical);
        let mut rng = ChaCha8Rng::seed_from_u64(cseed);
        let c: Vec<Q> = reps.iter().map(|_| Q::int(rng.gen_range(-3..=3))).collect();
        let u = combine(&c, &reps);
        prop_assume!(!u.is_zero());
        prop_assert!(!u.det().is_zero());
    }
}

#[test]
fn radical_oracles_agree_on_generated_commutants() {
    for label in TypeLabel::HOLONOMY {
        let gen = generate(label, &GenerateOptions::default()).unwrap();
        let e = commutant(&holonomy_span(&curvature(&gen.germ, 2).unwrap()), &gen.germ.g0());
        let a = trace_form_kernel(&e);
        let b = one_sided_trace_kernel(&e);
        let sa = span_of(e.d, &a);
        assert_eq!(a.len(), b.len());
        assert!(b.iter().all(|m| sa.contains(m.as_slice())));
    }
}

/// `𝔢 = span(Id, N)` with `N` self-adjoint and square-zero for the split
/// metric `[[0,1],[1,0]]`.
fn two_step() -> (MatrixAlgebraWithInvolution, QMat) {
    let g0 = l_p(1);
    let n = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
    assert_eq!(adjoint(&n, &g0), n);
    (MatrixAlgebraWithInvolution::new(&g0, &[n.clone()]), n)
}

#[test]
fn radical_of_a_two_step_algebra() {
    let (e, n) = two_step();
    let a = analyze(&e).unwrap();
    assert_eq!(a.radical.len(), 1);
    assert_eq!(a.label, Some(TypeLabel::One));
    assert!(span_of(2, &a.radical).contains(n.as_slice()));
    assert!(minpoly_lemma_holds(&Matrix::identity(2).scale(&Q::int(3)), &n));
    let trivial = MatrixAlgebraWithInvolution::new(&Matrix::identity(3), &[]);
    assert!(analyze(&trivial).unwrap().radical.is_empty());
}

#[test]
fn minpoly_lemma_on_lifted_structures_plus_radical() {
    // J ⊗ Id perturbed by a nilpotent element commuting with it
    let j = parendo::structures::j_p(2);
    let n = Matrix::block_diag(&[&Matrix::from_ints(&[&[0, 1], &[0, 0]]), &Matrix::from_ints(&[&[0, 1], &[0, 0]])]);
    assert_eq!(j.mul(&n), n.mul(&j));
    assert!(minpoly_lemma_holds(&j, &n));
}

#[test]
fn fixed_space_and_square_zero_ideal() {
    let n = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
    let h = MatrixSpan::from_matrices(2, &[n.clone()]);
    let e0 = fixed_space(&h);
    assert_eq!(e0, vec![vec![Q::one(), Q::zero()]]);
    let e = commutant(&h, &l_p(1));
    let n0 = n0_ideal(&e, &e0).unwrap();
    assert_eq!(n0.len(), 1);
    assert!(n0[0].mul(&n0[0]).is_zero());
    assert_eq!(fixed_space(&MatrixSpan::new(3)).len(), 3);
}

#[test]
fn adjoint_examples() {
    let u = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
    assert_eq!(adjoint(&u, &i_pq(1, 1)), Matrix::from_ints(&[&[0, 0], &[-1, 0]]));
    let s = Matrix::from_ints(&[&[1, 2], &[2, 5]]);
    assert_eq!(adjoint(&s, &Matrix::identity(2)), s);
    let (g, st) = normal_form(TypeLabel::TwoPrime, 2, 2, false).unwrap();
    let l = st.l.unwrap();
    assert_eq!(adjoint(&l, &g), l.neg());
    assert_eq!(adjoint(&adjoint(&u, &i_pq(1, 1)), &i_pq(1, 1)), u);
}

#[test]
fn complex_riemannian_structure_exactly_for_complexified_types() {
    for label in TypeLabel::HOLONOMY {
        let gen = generate(label, &GenerateOptions { seed: 1, ..Default::default() }).unwrap();
        let e = commutant(&holonomy_span(&curvature(&gen.germ, 2).unwrap()), &gen.germ.g0());
        let a = analyze(&e).unwrap();
        let s = lift_structures(&e, &a.radical, label).unwrap();
        assert_eq!(s.jbar.is_some(), label.is_complexified(), "{label}");
        // no self-adjoint element squares to −Id outside the complexified types
        if !label.is_complexified() {
            let id = Matrix::identity(e.d);
            for u in self_adjoint_representatives(&e, &a.radical) {
                assert_ne!(u.mul(&u), id.neg());
            }
        }
    }
}

#[test]
fn hyperkaehler_sphere_points() {
    let (g, s) = normal_form(TypeLabel::Three, 4, 0, false).unwrap();
    let fams = structure_manifolds(TypeLabel::Three, &s, &g);
    assert!(fams.iter().all(|f| f.consistent()));
    let (j1, j2, j3) = (s.j1.unwrap(), s.j2.unwrap(), s.j3.unwrap());
    let comb = |a: Q, b: Q, c: Q| j1.scale(&a).add(&j2.scale(&b)).add(&j3.scale(&c));
    let id = Matrix::identity(4);
    let x = comb(Q::new(3, 5), Q::new(4, 5), Q::zero());
    assert_eq!(x.mul(&x), id.neg());
    let y = comb(Q::new(1, 2), Q::new(1, 2), Q::zero());
    assert_ne!(y.mul(&y), id.neg());
}
