use parendo::endo::TypeLabel;
use parendo::generators::{generate, germ_type1, GenerateOptions};
use parendo::geometry::{christoffel, curvature, curvature_of, CurvatureAtOrigin};
use parendo::germ::MetricGerm;
use parendo::holonomy::{commutant, holonomy_span};
use parendo::jet::Jet;
use parendo::scalar::{Field, Q};
use parendo::verify::{curvature_2d_oracle, ricci_double_contraction};
use proptest::prelude::*;

fn random_germ(d: usize, q: usize, seed: u64, k: u32) -> MetricGerm {
    germ_type1(d - q.min(d), q.min(d), seed, 2, k).unwrap()
}

fn unit(d: usize, i: usize) -> Vec<Q> {
    (0..d).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()
}

/// `R(e_i, e_j)e_k`.
fn rv(c: &CurvatureAtOrigin<Q>, i: usize, j: usize, k: usize) -> Vec<Q> {
    c.r(i, j).col(k)
}

fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curvature_symmetries(d in 2usize..=4, q in 0usize..=2, seed in 0u64..1000) {
        let germ = random_germ(d, q, seed, 3);
        let g0 = germ.g0();
        let c = curvature(&germ, 1).unwrap();
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(c.r(i, j), &c.r(j, i).neg());
                for k in 0..d {
                    let s = add(&add(&rv(&c, i, j, k), &rv(&c, j, k, i)), &rv(&c, k, i, j));
                    prop_assert!(s.iter().all(|x| x.is_zero()), "first Bianchi");
                    for t in 0..d {
                        let lhs = parendo::matrix::dot(&g0.mul_vec(&rv(&c, i, j, k)), &unit(d, t));
                        let rhs = parendo::matrix::dot(&g0.mul_vec(&rv(&c, k, t, i)), &unit(d, j));
                        prop_assert_eq!(lhs, rhs, "pair symmetry");
                    }
                    // second Bianchi: (D_k R)(i,j) + (D_i R)(j,k) + (D_j R)(k,i) = 0
                    let dr = |a: usize, b: usize, u: usize| &c.levels[1][(a * d + b) * d + u];
                    prop_assert!(dr(i, j, k).add(dr(j, k, i)).add(dr(k, i, j)).is_zero(), "second Bianchi");
                }
            }
        }
        let ric = c.ricci();
        prop_assert_eq!(&ric, &ric.transpose());
        prop_assert_eq!(ric, ricci_double_contraction(&germ.g));
    }

    #[test]
    fn holonomy_monotone_in_derivative_order(d in 3usize..=4, seed in 0u64..1000) {
        let germ = random_germ(d, 1, seed, 4);
        let g0 = germ.g0();
        let mut last_h = 0;
        let mut last_e = usize::MAX;
        for k in 0..=2 {
            let h = holonomy_span(&curvature(&germ, k).unwrap());
            let e = commutant(&h, &g0);
            prop_assert!(h.dim() >= last_h && e.dim() <= last_e);
            prop_assert!(h.is_bracket_closed());
            for u in &e.basis {
                for w in h.basis() {
                    prop_assert!(u.mul(w) == w.mul(u));
                }
            }
            last_h = h.dim();
            last_e = e.dim();
        }
    }

    #[test]
    fn curvature_is_a_pure_function(seed in 0u64..1000) {
        let germ = random_germ(3, 1, seed, 4);
        let a = curvature(&germ, 2).unwrap();
        let b = curvature(&germ.clone(), 2).unwrap();
        prop_assert!(a.levels == b.levels);
    }
}

fn diag2(e: Jet<Q>, g: Jet<Q>) -> Vec<Vec<Jet<Q>>> {
    let (n, k) = (e.nvars(), e.order());
    vec![vec![e, Jet::zero(n, k)], vec![Jet::zero(n, k), g]]
}

#[test]
fn flat_germ_has_no_christoffels_or_curvature() {
    let germ = parendo::germ::flat_germ(2, 2, 4);
    let gamma = christoffel(&germ.g).unwrap();
    assert!(gamma.iter().flatten().flatten().all(|j| j.is_zero()));
    let c = curvature(&germ, 2).unwrap();
    assert!(c.levels.iter().flatten().all(|m| m.is_zero()));
}

#[test]
fn christoffel_of_diagonal_metric() {
    let k = 3;
    let g22 = Jet::one(2, k).add(&Jet::monomial(2, k, &[1, 0], Q::int(2)));
    let gamma = christoffel(&diag2(Jet::one(2, k), g22.clone())).unwrap();
    assert_eq!(gamma[1][0][1], g22.invert().unwrap().truncate(k - 1));
    assert_eq!(gamma[1][1][0], gamma[1][0][1]);
}

#[test]
fn gauss_curvature_of_surface() {
    // g = dx² + (1 − x²)dy²: K = −∂²_x g₂₂ / (2 g₂₂) = 1 at the origin
    let k = 4;
    let e = Jet::one(2, k);
    let g = Jet::one(2, k).sub(&Jet::monomial(2, k, &[2, 0], Q::one()));
    let c = curvature_of(&diag2(e.clone(), g.clone()), 0).unwrap();
    assert_eq!(c.r(0, 1), &curvature_2d_oracle(&e, &g));
    assert_eq!(c.r(0, 1)[(0, 1)], Q::one());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn surface_oracle_on_random_diagonal_germs(
        e in proptest::collection::vec(-3i64..=3, 5),
        g in proptest::collection::vec(-3i64..=3, 5),
        e0 in 1i64..=3,
        g0 in prop_oneof![Just(-2i64), Just(-1), Just(1), Just(2)],
    ) {
        let k = 3;
        let mk = |c0: i64, c: &[i64]| {
            let exps: [[u32; 2]; 5] = [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]];
            exps.iter().zip(c).fold(Jet::constant(2, k, Q::int(c0)), |acc, (ex, &ci)| acc.add(&Jet::monomial(2, k, ex, Q::int(ci))))
        };
        let (ej, gj) = (mk(e0, &e), mk(g0, &g));
        let c = curvature_of(&diag2(ej.clone(), gj.clone()), 0).unwrap();
        prop_assert_eq!(c.r(0, 1), &curvature_2d_oracle(&ej, &gj));
    }
}

#[test]
fn raising_order_error_names_needed_order() {
    let germ = random_germ(3, 0, 1, 2);
    let err = curvature(&germ, 2).err().expect("order 2 is too low for D²R").to_string();
    assert!(err.contains('4'), "{err}");
}

#[test]
fn complex_curvature_commutes_with_self_adjoint_structure() {
    let gen = generate(TypeLabel::OneC, &GenerateOptions { seed: 2, ..Default::default() }).unwrap();
    let jb = gen.germ.jbar().unwrap();
    let c = curvature(&gen.germ, 2).unwrap();
    for m in c.levels.iter().flatten() {
        assert_eq!(m.mul(&jb), jb.mul(m));
    }
}

#[test]
fn kaehler_curvature_vanishes_on_holomorphic_pairs() {
    let gen = generate(TypeLabel::Two, &GenerateOptions { seed: 4, ..Default::default() }).unwrap();
    let (_, j) = gen.witnesses.iter().find(|(n, _)| n == "J").unwrap();
    let d = gen.germ.d;
    let c = curvature(&gen.germ, 0).unwrap();
    // R(Z, W) = 0 for Z, W of type (1,0) ⇔ R(Jx, Jy) = R(x, y)
    for x in 0..d {
        for y in 0..d {
            let jx = j.col(x);
            let jy = j.col(y);
            assert_eq!(c.r_vec(&jx, &jy), *c.r(x, y));
        }
    }
}
