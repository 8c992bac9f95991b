//! Complex, paracomplex and quaternionic structures in the semi-simple part:
//! exact lifts from a computed commutant, relation checks, normal forms and
//! the families of (para)Kähler structures.

use serde::Serialize;

use crate::endo::{complement_mod, span_of, EndoError, TypeLabel};
use crate::holonomy::MatrixAlgebraWithInvolution;
use crate::matrix::{combine, Matrix, Span};
use crate::scalar::{binom, Field, G, Q};
use crate::QMat;

/// Generators of `𝔰` as listed per type; unused slots stay empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StructureSet {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jbar: Option<QMat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<QMat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<QMat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j1: Option<QMat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j2: Option<QMat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j3: Option<QMat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<QMat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<QMat>,
}

/// Kind of a structure: square and adjointness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    /// `J̲² = −Id`, self-adjoint
    ComplexSelfAdjoint,
    /// `J² = −Id`, skew-adjoint
    Complex,
    /// `L² = Id`, skew-adjoint
    Paracomplex,
}

impl StructureSet {
    /// Named structures with their kind, in a fixed order.
    pub fn named(&self) -> Vec<(&'static str, &QMat, StructureKind)> {
        let mut out = Vec::new();
        let slots: [(&'static str, &Option<QMat>, StructureKind); 8] = [
            ("J̲", &self.jbar, StructureKind::ComplexSelfAdjoint),
            ("J", &self.j, StructureKind::Complex),
            ("L", &self.l, StructureKind::Paracomplex),
            ("J1", &self.j1, StructureKind::Complex),
            ("J2", &self.j2, StructureKind::Complex),
            ("J3", &self.j3, StructureKind::Complex),
            ("L1", &self.l1, StructureKind::Paracomplex),
            ("L2", &self.l2, StructureKind::Paracomplex),
        ];
        for (n, m, k) in slots {
            if let Some(m) = m {
                out.push((n, m, k));
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.named().is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub holds: bool,
}

fn adj(u: &QMat, g0: &QMat) -> QMat {
    crate::holonomy::adjoint(u, g0)
}

/// Checks every relation listed for `label` (generator relations, squares,
/// adjointness, trace-form norms, balanced eigenspaces of paracomplex
/// structures). A missing generator is reported as a failed relation.
pub fn check_relations(label: TypeLabel, s: &StructureSet, g0: &QMat) -> Vec<RelationCheck> {
    let d = g0.rows;
    let id = Matrix::identity(d);
    let mut out = Vec::new();
    let mut push = |r: String, h: bool| out.push(RelationCheck { relation: r, holds: h });
    let required: &[&str] = match label {
        TypeLabel::One | TypeLabel::HplusH => &[],
        TypeLabel::OneC => &["J̲"],
        TypeLabel::Two => &["J"],
        TypeLabel::TwoPrime => &["L"],
        TypeLabel::TwoC => &["J̲", "L", "J"],
        TypeLabel::Three => &["J1", "J2", "J3"],
        TypeLabel::ThreePrime => &["L1", "L2", "J"],
        TypeLabel::ThreeC => &["J̲", "L1", "L2", "J"],
    };
    let named = s.named();
    let get = |n: &str| named.iter().find(|(m, _, _)| *m == n).map(|(_, u, _)| (*u).clone());
    for r in required {
        if get(r).is_none() {
            push(format!("{r} present"), false);
        }
    }
    if required.iter().any(|r| get(r).is_none()) {
        return out;
    }
    let dq = Q::int(d as i64);
    for (n, u, k) in &named {
        if !required.contains(n) {
            continue;
        }
        let (sq, sign, norm) = match k {
            StructureKind::ComplexSelfAdjoint => (id.neg(), 1, -1),
            StructureKind::Complex => (id.neg(), -1, 1),
            StructureKind::Paracomplex => (id.clone(), -1, -1),
        };
        let u2 = u.mul(u);
        push(format!("{n}² = {}Id", if sq == id { "" } else { "−" }), u2 == sq);
        let a = adj(u, g0);
        let (want, word) = if sign == 1 { ((*u).clone(), "self-adjoint") } else { (u.neg(), "skew-adjoint") };
        push(format!("{n} {word}"), a == want);
        let tn = a.mul(u).trace() / &dq;
        push(format!("⟨{n},{n}⟩ = {norm}"), tn == Q::int(norm));
        if *k == StructureKind::Paracomplex {
            push(format!("tr {n} = 0 (balanced eigenspaces)"), u.trace().is_zero());
        }
    }
    let m = |n: &str| get(n).unwrap();
    let mut eq = |name: &str, a: QMat, b: QMat| push(name.to_string(), a == b);
    match label {
        TypeLabel::TwoC => {
            let (jb, l, j) = (m("J̲"), m("L"), m("J"));
            eq("J̲L = LJ̲", jb.mul(&l), l.mul(&jb));
            eq("J̲J = JJ̲", jb.mul(&j), j.mul(&jb));
            eq("LJ = J̲", l.mul(&j), jb.clone());
            eq("JL = J̲", j.mul(&l), jb);
        }
        TypeLabel::Three => {
            let js = [m("J1"), m("J2"), m("J3")];
            for i in 0..3 {
                let (a, b, c) = (&js[i], &js[(i + 1) % 3], &js[(i + 2) % 3]);
                eq(&format!("J{}J{} = J{}", i + 1, (i + 1) % 3 + 1, (i + 2) % 3 + 1), a.mul(b), c.clone());
                eq(&format!("J{}J{} = −J{}J{}", i + 1, (i + 1) % 3 + 1, (i + 1) % 3 + 1, i + 1), a.mul(b), b.mul(a).neg());
            }
        }
        TypeLabel::ThreePrime | TypeLabel::ThreeC => {
            let (l1, l2, j) = (m("L1"), m("L2"), m("J"));
            eq("J = −L1L2", j.clone(), l1.mul(&l2).neg());
            eq("J = L2L1", j.clone(), l2.mul(&l1));
            eq("L1 = L2J", l1.clone(), l2.mul(&j));
            eq("L1 = −JL2", l1.clone(), j.mul(&l2).neg());
            eq("L2 = JL1", l2.clone(), j.mul(&l1));
            eq("L2 = −L1J", l2.clone(), l1.mul(&j).neg());
            if label == TypeLabel::ThreeC {
                let jb = m("J̲");
                eq("J̲L1 = L1J̲", jb.mul(&l1), l1.mul(&jb));
                eq("J̲L2 = L2J̲", jb.mul(&l2), l2.mul(&jb));
                eq("J̲J = JJ̲", jb.mul(&j), j.mul(&jb));
            }
        }
        _ => {}
    }
    out
}

/// Coefficient vectors in `[-max_abs, max_abs]^k` with at most `max_nnz`
/// nonzero entries, ordered by (number of nonzeros, max |c|, lexicographic).
fn coefficient_vectors(k: usize, max_nnz: usize, max_abs: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; k];
    fn rec(i: usize, nnz: usize, max_nnz: usize, max_abs: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == cur.len() {
            if nnz > 0 {
                out.push(cur.clone());
            }
            return;
        }
        for c in -max_abs..=max_abs {
            if c != 0 && nnz == max_nnz {
                continue;
            }
            cur[i] = c;
            rec(i + 1, nnz + (c != 0) as usize, max_nnz, max_abs, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, 0, max_nnz, max_abs, &mut cur, &mut out);
    out.sort_by_key(|v| {
        let nnz = v.iter().filter(|c| **c != 0).count();
        let ma = v.iter().map(|c| c.abs()).max().unwrap_or(0);
        (nnz, ma, v.clone())
    });
    out
}

/// Flips the sign so that the first nonzero entry (row-major) is positive.
pub fn fix_sign(u: QMat) -> QMat {
    match u.as_slice().iter().find(|x| !x.is_zero()) {
        Some(x) if x.signum() < 0 => u.neg(),
        _ => u,
    }
}

/// Exact root of `s·Id` from `x` whose square is `λ·Id` modulo the
/// nilpotent ideal spanned by `nspan`: scale by `1/√|λ|` and correct with
/// the terminating series of `(Id + sN₀)^{-1/2}`.
pub fn normalize_root(x: &QMat, s: i64, nspan: &Span<Q>) -> Option<QMat> {
    let d = x.rows;
    let dq = Q::int(d as i64);
    let x2 = x.mul(x);
    let lambda = x2.trace() / &dq;
    if lambda.signum() != s.signum() as i32 {
        return None;
    }
    if !nspan.contains(x2.sub(&Matrix::scalar(d, lambda.clone())).as_slice()) {
        return None;
    }
    let a = lambda.abs().sqrt()?;
    let u1 = x.scale(&a.inv()?);
    let sq = Q::int(s);
    let n0 = u1.mul(&u1).sub(&Matrix::scalar(d, sq.clone()));
    let sn0 = n0.scale(&sq);
    let half = Q::new(-1, 2);
    let mut sum = Matrix::identity(d);
    let mut term = Matrix::identity(d);
    for k in 1..=d {
        term = term.mul(&sn0);
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term.scale(&binom(&half, k)));
    }
    let u = u1.mul(&sum);
    (u.mul(&u) == Matrix::scalar(d, sq)).then_some(u)
}

/// `(X + s_A·AXA)/2`: the part commuting with `A` (`A² = s_A·Id`).
fn commuting_part(x: &QMat, a: &QMat, sa: i64) -> QMat {
    x.add(&a.mul(x).mul(a).scale(&Q::int(sa))).scale(&Q::new(1, 2))
}

/// `(X − s_A·AXA)/2`: the part anticommuting with `A`.
fn anticommuting_part(x: &QMat, a: &QMat, sa: i64) -> QMat {
    x.sub(&a.mul(x).mul(a).scale(&Q::int(sa))).scale(&Q::new(1, 2))
}

struct Lifter<'a> {
    e: &'a MatrixAlgebraWithInvolution,
    n: &'a [QMat],
    nspan: Span<Q>,
}

impl Lifter<'_> {
    /// First candidate in `space` (mod 𝔫) normalizing to a root of `s·Id`
    /// with the requested adjointness.
    fn find(&self, space: &[QMat], s: i64, self_adjoint: bool, what: &str) -> Result<QMat, EndoError> {
        let reps = complement_mod(self.e.d, self.n, space);
        if reps.is_empty() {
            return Err(EndoError::Inconsistent(format!("no candidate for {what}: empty quotient slot")));
        }
        let k = reps.len();
        for max_abs in [2, 4] {
            for c in coefficient_vectors(k, k.min(3), max_abs) {
                let cq: Vec<Q> = c.iter().map(|x| Q::int(*x)).collect();
                let x = combine(&cq, &reps);
                if let Some(u) = normalize_root(&x, s, &self.nspan) {
                    if let Some(u) = self.symmetrize(u, s, self_adjoint) {
                        return Ok(fix_sign(u));
                    }
                }
            }
        }
        Err(EndoError::Inconsistent(format!("no candidate for {what} with ⟨U,U⟩ of the required sign")))
    }

    /// Replaces `u` by its (skew-)adjoint part and renormalizes, at most twice.
    fn symmetrize(&self, mut u: QMat, s: i64, self_adjoint: bool) -> Option<QMat> {
        for _ in 0..=2 {
            let a = self.e.adjoint(&u);
            let target = if self_adjoint { u.clone() } else { u.neg() };
            if a == target {
                return Some(u);
            }
            let part = if self_adjoint { u.add(&a) } else { u.sub(&a) }.scale(&Q::new(1, 2));
            u = normalize_root(&part, s, &self.nspan)?;
        }
        None
    }
}

/// Lifts exact structure representatives of `𝔰` through the radical.
pub fn lift_structures(e: &MatrixAlgebraWithInvolution, n: &[QMat], label: TypeLabel) -> Result<StructureSet, EndoError> {
    let lf = Lifter { e, n, nspan: span_of(e.d, n) };
    let d = e.d;
    let dq = Q::int(d as i64);
    let plus: Vec<QMat> = e
        .self_adjoint_part()
        .iter()
        .map(|x| x.sub(&Matrix::scalar(d, x.trace() / &dq)))
        .collect();
    let minus = e.skew_adjoint_part();
    let mut s = StructureSet::default();
    match label {
        TypeLabel::One => {}
        TypeLabel::HplusH => return Err(EndoError::Inconsistent("HplusH is not a holonomy type".into())),
        TypeLabel::OneC => s.jbar = Some(lf.find(&plus, -1, true, "J̲")?),
        TypeLabel::Two => s.j = Some(lf.find(&minus, -1, false, "J")?),
        TypeLabel::TwoPrime => s.l = Some(lf.find(&minus, 1, false, "L")?),
        TypeLabel::TwoC => {
            let jb = lf.find(&plus, -1, true, "J̲")?;
            let cm: Vec<QMat> = minus.iter().map(|x| commuting_part(x, &jb, -1)).collect();
            let l = lf.find(&cm, 1, false, "L")?;
            s.j = Some(l.mul(&jb));
            s.l = Some(l);
            s.jbar = Some(jb);
        }
        TypeLabel::Three => {
            let j1 = lf.find(&minus, -1, false, "J1")?;
            let am: Vec<QMat> = minus.iter().map(|x| anticommuting_part(x, &j1, -1)).collect();
            let j2 = lf.find(&am, -1, false, "J2")?;
            s.j3 = Some(j1.mul(&j2));
            s.j1 = Some(j1);
            s.j2 = Some(j2);
        }
        TypeLabel::ThreePrime | TypeLabel::ThreeC => {
            let base: Vec<QMat> = if label == TypeLabel::ThreeC {
                let jb = lf.find(&plus, -1, true, "J̲")?;
                let cm = minus.iter().map(|x| commuting_part(x, &jb, -1)).collect();
                s.jbar = Some(jb);
                cm
            } else {
                minus
            };
            let l1 = lf.find(&base, 1, false, "L1")?;
            let am: Vec<QMat> = base.iter().map(|x| anticommuting_part(x, &l1, 1)).collect();
            let l2 = lf.find(&am, 1, false, "L2")?;
            s.j = Some(l2.mul(&l1));
            s.l1 = Some(l1);
            s.l2 = Some(l2);
        }
    }
    let bad: Vec<String> =
        check_relations(label, &s, &e.g0).into_iter().filter(|r| !r.holds).map(|r| r.relation).collect();
    if !bad.is_empty() {
        return Err(EndoError::Inconsistent(format!("lifted structures violate {}", bad.join(", "))));
    }
    Ok(s)
}

/// `I_{p,q} = diag(I_p, −I_q)`.
pub fn i_pq(p: usize, q: usize) -> QMat {
    let mut v = vec![Q::one(); p];
    v.extend(std::iter::repeat(-Q::one()).take(q));
    Matrix::diag(&v)
}

/// `J_p = [[0, −I_p], [I_p, 0]]`.
pub fn j_p(p: usize) -> QMat {
    let i = Matrix::identity(p);
    let z = Matrix::zeros(p, p);
    Matrix::blocks(&[&[&z, &i.neg()], &[&i, &z]])
}

/// `L_p = [[0, I_p], [I_p, 0]]`.
pub fn l_p(p: usize) -> QMat {
    let i = Matrix::identity(p);
    let z = Matrix::zeros(p, p);
    Matrix::blocks(&[&[&z, &i], &[&i, &z]])
}

/// Dimension and signature constraints per type.
pub fn admissible_signature(label: TypeLabel, p: usize, q: usize) -> bool {
    let d = p + q;
    match label {
        TypeLabel::One => d >= 1,
        TypeLabel::OneC | TypeLabel::TwoPrime => p == q && p >= 1,
        TypeLabel::Two => p % 2 == 0 && q % 2 == 0 && d >= 2,
        TypeLabel::TwoC | TypeLabel::ThreePrime => p == q && p % 2 == 0 && p >= 2,
        TypeLabel::Three => p % 4 == 0 && q % 4 == 0 && d >= 4,
        TypeLabel::ThreeC => p == q && p % 4 == 0 && p >= 4,
        TypeLabel::HplusH => false,
    }
}

/// Normal form `(Mat(g), structures)` of a type in signature `(p, q)`;
/// `alternative` selects the second listed form where one exists.
pub fn normal_form(label: TypeLabel, p: usize, q: usize, alternative: bool) -> Option<(QMat, StructureSet)> {
    if !admissible_signature(label, p, q) {
        return None;
    }
    let d = p + q;
    let mut s = StructureSet::default();
    let g = match label {
        TypeLabel::One => i_pq(p, q),
        TypeLabel::OneC => {
            s.jbar = Some(j_p(p));
            i_pq(p, p)
        }
        TypeLabel::Two => {
            let h = i_pq(p / 2, q / 2);
            s.j = Some(j_p(d / 2));
            Matrix::block_diag(&[&h, &h])
        }
        TypeLabel::TwoPrime if alternative => {
            s.l = Some(i_pq(p, p));
            l_p(p)
        }
        TypeLabel::TwoPrime => {
            s.l = Some(l_p(p));
            i_pq(p, p)
        }
        TypeLabel::TwoC => {
            let h = p / 2;
            let l = i_pq(p, p);
            let jb = Matrix::block_diag(&[&j_p(h), &j_p(h).neg()]);
            s.j = Some(l.mul(&jb));
            s.l = Some(l);
            s.jbar = Some(jb);
            l_p(p)
        }
        TypeLabel::Three => {
            let h = i_pq(p / 4, q / 4);
            let m = d / 4;
            let z = Matrix::zeros(2 * m, 2 * m);
            s.j1 = Some(Matrix::block_diag(&[&j_p(m).neg(), &j_p(m)]));
            s.j2 = Some(j_p(d / 2));
            s.j3 = Some(Matrix::blocks(&[&[&z, &j_p(m)], &[&j_p(m), &z]]));
            Matrix::block_diag(&[&h, &h, &h, &h])
        }
        TypeLabel::ThreePrime => {
            let h = p / 2;
            let z = Matrix::zeros(p, p);
            if alternative {
                let l1 = i_pq(p, p);
                let j = Matrix::blocks(&[&[&z, &j_p(h)], &[&j_p(h), &z]]);
                s.l2 = Some(j.mul(&l1));
                s.l1 = Some(l1);
                s.j = Some(j);
                l_p(p)
            } else {
                s.l1 = Some(l_p(p));
                s.j = Some(Matrix::block_diag(&[&j_p(h).neg(), &j_p(h)]));
                s.l2 = Some(Matrix::blocks(&[&[&z, &j_p(h).neg()], &[&j_p(h), &z]]));
                i_pq(p, p)
            }
        }
        TypeLabel::ThreeC => {
            let k = p / 4;
            let jk = j_p(k);
            let dd = Matrix::block_diag(&[&jk, &jk]);
            let z = Matrix::zeros(p, p);
            s.jbar = Some(Matrix::block_diag(&[&j_p(2 * k), &j_p(2 * k)]));
            s.j = Some(Matrix::block_diag(&[&jk, &jk, &jk.neg(), &jk.neg()]));
            s.l1 = Some(l_p(p));
            s.l2 = Some(Matrix::blocks(&[&[&z, &dd], &[&dd.neg(), &z]]));
            Matrix::block_diag(&[&i_pq(2 * k, 2 * k), &i_pq(2 * k, 2 * k).neg()])
        }
        TypeLabel::HplusH => return None,
    };
    Some((g, s))
}

/// One sampled point of a structure family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilySample {
    /// Coefficients on the family's generators (Gaussian for J̲-complex ones).
    pub coefficients: Vec<G>,
    /// Value of the defining quadratic form.
    pub quadric: G,
    pub on_family: bool,
    /// The combination squares to the family's `±Id`.
    pub square_matches: bool,
    /// Skew-adjoint (self-adjoint for `J̲`).
    pub adjointness: bool,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureFamily {
    pub kind: &'static str,
    pub description: String,
    pub samples: Vec<FamilySample>,
}

impl StructureFamily {
    pub fn consistent(&self) -> bool {
        self.samples.iter().all(|s| s.consistent)
    }
}

fn g_int(re: i64, im: i64) -> G {
    G::new(Q::int(re), Q::int(im))
}

fn gq(re: (i64, i64), im: (i64, i64)) -> G {
    G::new(Q::new(re.0, re.1), Q::new(im.0, im.1))
}

/// Checks, on rational sample points, that `Σ c_i X_i` is a structure of
/// the family exactly when the coefficients lie on its quadric.
#[allow(clippy::too_many_arguments)]
fn family(
    kind: &'static str,
    description: String,
    gens: &[QMat],
    quadric_signs: &[i64],
    quadric_value: i64,
    square: i64,
    jbar: Option<&QMat>,
    points: &[Vec<G>],
    g0: &QMat,
) -> StructureFamily {
    let d = g0.rows;
    let samples = points
        .iter()
        .map(|c| {
            let mut u = Matrix::zeros(d, d);
            let mut quad = G::zero();
            for ((x, ci), sg) in gens.iter().zip(c).zip(quadric_signs) {
                u = u.add(&x.scale(&ci.re));
                if !ci.im.is_zero() {
                    let jb = jbar.expect("complex coefficients need J̲");
                    u = u.add(&jb.mul(x).scale(&ci.im));
                }
                quad += &(ci.clone() * ci * &G::from_i64(*sg));
            }
            let on = quad == G::from_i64(quadric_value);
            let sq = u.mul(&u) == Matrix::scalar(d, Q::int(square));
            let skew = adj(&u, g0) == u.neg();
            FamilySample { coefficients: c.clone(), quadric: quad, on_family: on, square_matches: sq, adjointness: skew, consistent: on == sq && skew }
        })
        .collect();
    StructureFamily { kind, description, samples }
}

/// Families of Kähler and paraKähler structures and the finite sets of
/// complex Riemannian structures, sampled at rational points.
pub fn structure_manifolds(label: TypeLabel, s: &StructureSet, g0: &QMat) -> Vec<StructureFamily> {
    let r = |v: &[(i64, i64)]| -> Vec<G> { v.iter().map(|x| G::real(Q::new(x.0, x.1))).collect() };
    let mut out = Vec::new();
    match label {
        TypeLabel::OneC | TypeLabel::TwoC | TypeLabel::ThreeC => {
            let jb = s.jbar.as_ref().unwrap();
            out.push(pair_family("complex Riemannian", "J̲", jb, -1, true, g0));
        }
        _ => {}
    }
    match label {
        TypeLabel::Two => out.push(pair_family("Kähler", "J", s.j.as_ref().unwrap(), -1, false, g0)),
        TypeLabel::TwoPrime => out.push(pair_family("paraKähler", "L", s.l.as_ref().unwrap(), 1, false, g0)),
        TypeLabel::TwoC => {
            out.push(pair_family("Kähler", "J", s.j.as_ref().unwrap(), -1, false, g0));
            out.push(pair_family("paraKähler", "L", s.l.as_ref().unwrap(), 1, false, g0));
        }
        TypeLabel::Three => {
            let gens = [s.j1.clone().unwrap(), s.j2.clone().unwrap(), s.j3.clone().unwrap()];
            let pts = [
                r(&[(1, 1), (0, 1), (0, 1)]),
                r(&[(0, 1), (1, 1), (0, 1)]),
                r(&[(0, 1), (0, 1), (1, 1)]),
                r(&[(3, 5), (4, 5), (0, 1)]),
                r(&[(0, 1), (3, 5), (-4, 5)]),
                r(&[(2, 3), (2, 3), (1, 3)]),
                r(&[(1, 1), (1, 1), (0, 1)]),
                r(&[(1, 2), (0, 1), (0, 1)]),
            ];
            out.push(family(
                "Kähler",
                "2-sphere {αJ1+βJ2+γJ3 : α²+β²+γ²=1}".into(),
                &gens,
                &[1, 1, 1],
                1,
                -1,
                None,
                &pts,
                g0,
            ));
        }
        TypeLabel::ThreePrime | TypeLabel::ThreeC => {
            let gens = [s.l1.clone().unwrap(), s.l2.clone().unwrap(), s.j.clone().unwrap()];
            let mut pts_k = vec![
                r(&[(0, 1), (0, 1), (1, 1)]),
                r(&[(3, 4), (0, 1), (5, 4)]),
                r(&[(0, 1), (4, 3), (5, 3)]),
                r(&[(1, 1), (0, 1), (1, 1)]),
                r(&[(1, 1), (0, 1), (0, 1)]),
            ];
            let mut pts_p = vec![
                r(&[(1, 1), (0, 1), (0, 1)]),
                r(&[(0, 1), (1, 1), (0, 1)]),
                r(&[(5, 4), (0, 1), (3, 4)]),
                r(&[(1, 1), (1, 1), (1, 1)]),
                r(&[(0, 1), (0, 1), (1, 1)]),
            ];
            let (jb, what) = if label == TypeLabel::ThreeC {
                pts_k.push(vec![g_int(0, 1), G::zero(), G::zero()]);
                pts_k.push(vec![gq((1, 1), (0, 1)), gq((0, 1), (1, 1)), gq((1, 1), (0, 1))]);
                pts_p.push(vec![G::zero(), g_int(0, 1), g_int(0, 1)]);
                pts_p.push(vec![gq((1, 1), (1, 1)), G::zero(), gq((1, 1), (1, 1))]);
                pts_p.push(vec![G::zero(), G::zero(), g_int(0, 1)]);
                (s.jbar.as_ref(), "proper quadric, α = α′ + α″J̲ etc.")
            } else {
                (None, "hyperboloid")
            };
            out.push(family(
                "Kähler",
                format!("{what}: {{αL1+βL2+γJ : α²+β²−γ²=−1}}"),
                &gens,
                &[1, 1, -1],
                -1,
                -1,
                jb,
                &pts_k,
                g0,
            ));
            out.push(family(
                "paraKähler",
                format!("{what}: {{αL1+βL2+γJ : α²+β²−γ²=1}}"),
                &gens,
                &[1, 1, -1],
                1,
                1,
                jb,
                &pts_p,
                g0,
            ));
        }
        _ => {}
    }
    out
}

/// `{±U}`: `cU` squares to `target·Id` exactly for `c = ±1`.
fn pair_family(kind: &'static str, name: &str, u: &QMat, target: i64, self_adjoint: bool, g0: &QMat) -> StructureFamily {
    let d = g0.rows;
    let samples = [(1, 1), (-1, 1), (2, 1), (1, 2)]
        .iter()
        .map(|&(n, m)| {
            let c = Q::new(n, m);
            let v = u.scale(&c);
            let on = c.abs() == Q::one();
            let sq = v.mul(&v) == Matrix::scalar(d, Q::int(target));
            let a = adj(&v, g0);
            let adj_ok = if self_adjoint { a == v } else { a == v.neg() };
            FamilySample {
                coefficients: vec![G::real(c.clone())],
                quadric: G::real(c.clone() * &c),
                on_family: on,
                square_matches: sq,
                adjointness: adj_ok,
                consistent: on == sq && adj_ok,
            }
        })
        .collect();
    StructureFamily { kind, description: format!("{{±{name}}}"), samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endo::analyze;
    use crate::holonomy::MatrixAlgebraWithInvolution;

    #[test]
    fn normal_forms_satisfy_relations() {
        let cases = [
            (TypeLabel::One, 2, 1),
            (TypeLabel::OneC, 1, 1),
            (TypeLabel::OneC, 2, 2),
            (TypeLabel::Two, 2, 2),
            (TypeLabel::Two, 4, 0),
            (TypeLabel::TwoPrime, 2, 2),
            (TypeLabel::TwoC, 2, 2),
            (TypeLabel::TwoC, 4, 4),
            (TypeLabel::Three, 4, 0),
            (TypeLabel::Three, 4, 4),
            (TypeLabel::ThreePrime, 2, 2),
            (TypeLabel::ThreePrime, 4, 4),
            (TypeLabel::ThreeC, 4, 4),
        ];
        for (label, p, q) in cases {
            for alt in [false, true] {
                let (g, s) = normal_form(label, p, q, alt).unwrap();
                assert_eq!(g.signature(), (p, q, 0));
                for r in check_relations(label, &s, &g) {
                    assert!(r.holds, "{label} ({p},{q}) alt={alt}: {}", r.relation);
                }
            }
        }
    }

    #[test]
    fn normal_form_algebras_classify_to_their_type() {
        for label in TypeLabel::HOLONOMY {
            let (p, q) = match label {
                TypeLabel::One => (3, 1),
                TypeLabel::OneC | TypeLabel::TwoPrime => (2, 2),
                TypeLabel::Two => (2, 2),
                TypeLabel::TwoC | TypeLabel::ThreePrime => (2, 2),
                TypeLabel::Three => (4, 0),
                TypeLabel::ThreeC => (4, 4),
                TypeLabel::HplusH => unreachable!(),
            };
            let (g, s) = normal_form(label, p, q, false).unwrap();
            let gens: Vec<QMat> = s.named().iter().map(|(_, m, _)| (*m).clone()).collect();
            // close under products
            let mut ms = gens.clone();
            for a in &gens {
                for b in &gens {
                    ms.push(a.mul(b));
                }
            }
            let e = MatrixAlgebraWithInvolution::new(&g, &ms);
            assert!(e.is_product_closed(), "{label}");
            let a = analyze(&e).unwrap();
            assert_eq!(a.label, Some(label), "{label}: {}", a.fingerprint);
            let lifted = lift_structures(&e, &a.radical, label).unwrap();
            assert!(check_relations(label, &lifted, &g).iter().all(|r| r.holds));
            for fam in structure_manifolds(label, &lifted, &g) {
                assert!(fam.consistent(), "{label} {}: {:?}", fam.description, fam.samples);
            }
        }
    }

    #[test]
    fn normalization_through_radical() {
        // X = J + N with N nilpotent commuting with J, J² = −Id: result squares to −Id
        let j = j_p(2);
        let n = Matrix::block_diag(&[&Matrix::from_ints(&[&[0, 1], &[0, 0]]), &Matrix::from_ints(&[&[0, 1], &[0, 0]])]);
        assert_eq!(j.mul(&n), n.mul(&j));
        let x = j.add(&n).scale(&Q::int(3));
        let mut span = Span::new(16);
        span.insert(n.as_slice());
        span.insert(j.mul(&n).as_slice());
        let u = normalize_root(&x, -1, &span).unwrap();
        assert_eq!(u.mul(&u), Matrix::scalar(4, -Q::one()));
        assert!(span.contains(u.sub(&j).as_slice()));
        assert!(normalize_root(&x, 1, &span).is_none());
    }

    #[test]
    fn coefficient_order() {
        let v = coefficient_vectors(2, 2, 1);
        assert_eq!(v[0], vec![-1, 0]);
        assert_eq!(v.len(), 8);
        assert!(v.iter().take(4).all(|c| c.iter().filter(|x| **x != 0).count() == 1));
    }
}
