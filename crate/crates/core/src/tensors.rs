//! Parallel real and complex bilinear forms built from parallel
//! endomorphisms, with their symmetry type and nondegeneracy checked.

use serde::Serialize;

use crate::endo::{self_adjoint_representatives, EndoError, TypeLabel};
use crate::holonomy::MatrixAlgebraWithInvolution;
use crate::matrix::{Matrix, Span};
use crate::scalar::{Field, G, Q};
use crate::structures::StructureSet;
use crate::QMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FormKind {
    /// `g(·, U·)`, `U ∈ 𝔢⁺ ∖ 𝔫⁺`
    Metric,
    /// `g(·, U·)`, `U` invertible skew-adjoint
    Symplectic,
    /// `g(·,U·) + i g(·,J̲U·)`, `UJ̲ = J̲U`, `U` self-adjoint
    ComplexRiemannian,
    /// `g(·,U·) + i g(·,JU·)`, `UJ = JU`, `U` self-adjoint
    Hermitian,
    /// `g(·,U·) + i g(·,J̲U·)`, `UJ̲ = J̲U`, `U` skew-adjoint
    JbarComplexSymplectic,
    /// `g(·,U·) + i g(·,JU·)`, `UJ = −JU`, `U` skew-adjoint
    JComplexSymplectic,
    /// top power of a nondegenerate `J̲`-complex bilinear form
    JbarComplexVolume,
    /// `ω_U^{∧(d/4)}` of a `J`-complex symplectic form
    JComplexVolume,
}

impl FormKind {
    pub fn applies_to(&self, label: TypeLabel) -> bool {
        use TypeLabel::*;
        match self {
            FormKind::Metric => label != HplusH,
            FormKind::Symplectic => !matches!(label, One | OneC | HplusH),
            FormKind::ComplexRiemannian | FormKind::JbarComplexVolume => matches!(label, OneC | TwoC | ThreeC),
            FormKind::Hermitian => matches!(label, Two | TwoC | Three | ThreePrime | ThreeC),
            FormKind::JbarComplexSymplectic => matches!(label, TwoC | ThreeC),
            FormKind::JComplexSymplectic | FormKind::JComplexVolume => matches!(label, Three | ThreePrime | ThreeC),
        }
    }

    pub const ALL: [FormKind; 8] = [
        FormKind::Metric,
        FormKind::Symplectic,
        FormKind::ComplexRiemannian,
        FormKind::Hermitian,
        FormKind::JbarComplexSymplectic,
        FormKind::JComplexSymplectic,
        FormKind::JbarComplexVolume,
        FormKind::JComplexVolume,
    ];
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub kind: FormKind,
    pub construction: String,
    /// Real part `g(·, U·)` as a matrix.
    pub real: QMat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imag: Option<QMat>,
    pub symmetry_ok: bool,
    pub nondegenerate: bool,
}

impl CatalogEntry {
    pub fn ok(&self) -> bool {
        self.symmetry_ok && self.nondegenerate
    }
}

fn symmetric(a: &QMat) -> bool {
    *a == a.transpose()
}

fn antisymmetric(a: &QMat) -> bool {
    *a == a.transpose().neg()
}

/// Vectors `v_1, …, v_m` such that `v_i, Jv_i` form a real basis.
pub fn complex_basis(j: &QMat) -> Vec<Vec<Q>> {
    let d = j.rows;
    let mut span = Span::<Q>::new(d);
    let mut out = Vec::new();
    for i in 0..d {
        let e = crate::holonomy::unit(d, i);
        if span.contains(&e) {
            continue;
        }
        span.insert(&e);
        span.insert(&j.mul_vec(&e));
        out.push(e);
    }
    out
}

/// Gram matrix of the complex form `A + iB` on a `J`-complex basis.
pub fn complex_gram(a: &QMat, b: &QMat, j: &QMat) -> Matrix<G> {
    let basis = complex_basis(j);
    let m = basis.len();
    let ab: Vec<Vec<Q>> = basis.iter().map(|v| a.mul_vec(v)).collect();
    let bb: Vec<Vec<Q>> = basis.iter().map(|v| b.mul_vec(v)).collect();
    Matrix::from_fn(m, m, |r, c| {
        G::new(crate::matrix::dot(&basis[r], &ab[c]), crate::matrix::dot(&basis[r], &bb[c]))
    })
}

/// `A + iB` is complex bilinear for `J`: `ω(Jx, y) = iω(x, y) = ω(x, Jy)`.
fn complex_bilinear(a: &QMat, b: &QMat, j: &QMat) -> bool {
    let jt = j.transpose();
    jt.mul(a) == b.neg() && jt.mul(b) == *a && a.mul(j) == b.neg() && b.mul(j) == *a
}

/// `A + iB` is sesquilinear for `J` (Hermitian-type invariance).
fn j_invariant(a: &QMat, b: &QMat, j: &QMat) -> bool {
    let jt = j.transpose();
    jt.mul(a).mul(j) == *a && jt.mul(b).mul(j) == *b
}

struct Builder<'a> {
    g0: &'a QMat,
    out: Vec<CatalogEntry>,
}

impl Builder<'_> {
    fn real(&mut self, kind: FormKind, construction: String, u: &QMat) {
        let a = self.g0.mul(u);
        let sym = match kind {
            FormKind::Metric => symmetric(&a),
            _ => antisymmetric(&a),
        };
        let nondeg = !a.det().is_zero();
        self.out.push(CatalogEntry { kind, construction, real: a, imag: None, symmetry_ok: sym, nondegenerate: nondeg });
    }

    /// Form `g(·,U·) + i g(·,KU·)`. For self-adjoint `K = J̲` the form is
    /// complex bilinear for `−J̲` (the conjugate of a `J̲`-bilinear form), for
    /// skew-adjoint `K = J` it is bilinear (or sesquilinear) for `J` itself.
    fn complex(&mut self, kind: FormKind, construction: String, u: &QMat, k: &QMat, k_self_adjoint: bool) {
        let a = self.g0.mul(u);
        let b = self.g0.mul(&k.mul(u));
        let j = &if k_self_adjoint { k.neg() } else { k.clone() };
        let (sym, nondeg) = match kind {
            FormKind::ComplexRiemannian => {
                (symmetric(&a) && symmetric(&b) && complex_bilinear(&a, &b, j), !complex_gram(&a, &b, j).det().is_zero())
            }
            FormKind::Hermitian => (symmetric(&a) && antisymmetric(&b) && j_invariant(&a, &b, j), !a.det().is_zero()),
            FormKind::JbarComplexSymplectic | FormKind::JComplexSymplectic => (
                antisymmetric(&a) && antisymmetric(&b) && complex_bilinear(&a, &b, j),
                !complex_gram(&a, &b, j).det().is_zero(),
            ),
            FormKind::JbarComplexVolume | FormKind::JComplexVolume => {
                // the top exterior power is nonzero iff the complex Gram matrix is invertible
                let gram = complex_gram(&a, &b, j);
                let shape = if kind == FormKind::JbarComplexVolume {
                    gram == gram.transpose()
                } else {
                    gram == gram.transpose().neg() && gram.rows % 2 == 0
                };
                (shape && complex_bilinear(&a, &b, j), !gram.det().is_zero())
            }
            _ => unreachable!(),
        };
        self.out.push(CatalogEntry { kind, construction, real: a, imag: Some(b), symmetry_ok: sym, nondegenerate: nondeg });
    }
}

/// Parallel forms attached to each applicable row of the catalog. Errors if
/// an applicable row yields no valid form.
pub fn parallel_tensor_catalog(
    e: &MatrixAlgebraWithInvolution,
    n: &[QMat],
    s: &StructureSet,
    label: TypeLabel,
) -> Result<Vec<CatalogEntry>, EndoError> {
    let d = e.d;
    let id = Matrix::identity(d);
    let mut b = Builder { g0: &e.g0, out: Vec::new() };

    b.real(FormKind::Metric, "g(·,U·), U = Id".into(), &id);
    for (i, u) in self_adjoint_representatives(e, n).iter().enumerate().skip(1) {
        b.real(FormKind::Metric, format!("g(·,U·), U = self-adjoint representative #{i}"), u);
    }
    let n_plus: Vec<QMat> = n.iter().map(|x| x.add(&e.adjoint(x))).filter(|x| !x.is_zero()).collect();
    if let Some(np) = n_plus.first() {
        b.real(FormKind::Metric, "g(·,U·), U = Id + N, N ∈ 𝔫⁺".into(), &id.add(np));
    }

    let skew: Vec<(&str, &QMat)> = s
        .named()
        .into_iter()
        .filter(|(name, _, _)| *name != "J̲")
        .map(|(name, m, _)| (name, m))
        .collect();
    if FormKind::Symplectic.applies_to(label) {
        for (name, u) in &skew {
            b.real(FormKind::Symplectic, format!("g(·,U·), U = {name}"), u);
        }
        let n_minus: Vec<QMat> = n.iter().map(|x| x.sub(&e.adjoint(x))).filter(|x| !x.is_zero()).collect();
        if let (Some((name, u)), Some(nm)) = (skew.first(), n_minus.first()) {
            b.real(FormKind::Symplectic, format!("g(·,U·), U = {name} + N, N ∈ 𝔫⁻"), &u.add(nm));
        }
    }

    if let Some(jb) = &s.jbar {
        if FormKind::ComplexRiemannian.applies_to(label) {
            b.complex(FormKind::ComplexRiemannian, "g(·,U·) + i g(·,J̲U·), U = Id".into(), &id, jb, true);
            b.complex(FormKind::JbarComplexVolume, "top power of g̲_Id".into(), &id, jb, true);
        }
        if FormKind::JbarComplexSymplectic.applies_to(label) {
            for (name, u) in &skew {
                b.complex(FormKind::JbarComplexSymplectic, format!("g(·,U·) + i g(·,J̲U·), U = {name}"), u, jb, true);
            }
        }
    }
    if FormKind::Hermitian.applies_to(label) {
        let js: Vec<(&str, &QMat)> = skew.iter().filter(|(n, _)| n.starts_with('J')).cloned().collect();
        for (name, j) in &js {
            b.complex(FormKind::Hermitian, format!("g(·,U·) + i g(·,{name}U·), U = Id"), &id, j, false);
        }
    }
    if FormKind::JComplexSymplectic.applies_to(label) {
        let (jn, j, un, u) = match label {
            TypeLabel::Three => ("J1", s.j1.as_ref(), "J2", s.j2.as_ref()),
            _ => ("J", s.j.as_ref(), "L1", s.l1.as_ref()),
        };
        if let (Some(j), Some(u)) = (j, u) {
            b.complex(FormKind::JComplexSymplectic, format!("g(·,U·) + i g(·,{jn}U·), U = {un}"), u, j, false);
            b.complex(FormKind::JComplexVolume, format!("ω_U^(d/4), J = {jn}, U = {un}"), u, j, false);
        }
    }

    let out = b.out;
    for kind in FormKind::ALL {
        if kind.applies_to(label) && !out.iter().any(|c| c.kind == kind && c.ok()) {
            return Err(EndoError::Inconsistent(format!("no valid {kind:?} form for type {label}")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endo::analyze;
    use crate::structures::{lift_structures, normal_form};

    #[test]
    fn catalog_on_normal_forms() {
        for label in TypeLabel::HOLONOMY {
            let (p, q) = match label {
                TypeLabel::One => (2, 1),
                TypeLabel::Three => (4, 4),
                TypeLabel::ThreeC => (4, 4),
                _ => (2, 2),
            };
            let (g, s) = normal_form(label, p, q, false).unwrap();
            let gens: Vec<QMat> = s.named().iter().map(|(_, m, _)| (*m).clone()).collect();
            let mut ms = gens.clone();
            for a in &gens {
                for b in &gens {
                    ms.push(a.mul(b));
                }
            }
            let e = MatrixAlgebraWithInvolution::new(&g, &ms);
            let a = analyze(&e).unwrap();
            let lifted = lift_structures(&e, &a.radical, label).unwrap();
            let cat = parallel_tensor_catalog(&e, &a.radical, &lifted, label).unwrap();
            for c in &cat {
                assert!(c.ok(), "{label}: {}", c.construction);
            }
            assert_eq!(cat[0].real, g);
        }
    }

    #[test]
    fn kahler_form_from_j() {
        let (g, s) = normal_form(TypeLabel::Two, 2, 0, false).unwrap();
        let e = MatrixAlgebraWithInvolution::new(&g, &[s.j.clone().unwrap()]);
        let cat = parallel_tensor_catalog(&e, &[], &s, TypeLabel::Two).unwrap();
        let w = cat.iter().find(|c| c.kind == FormKind::Symplectic).unwrap();
        assert_eq!(w.real, Matrix::from_ints(&[&[0, -1], &[1, 0]]));
    }
}
