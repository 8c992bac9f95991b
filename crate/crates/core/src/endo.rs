//! Radical, trace form and classification of the semi-simple part of the
//! algebra of parallel endomorphisms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::holonomy::{subspace_where, MatrixAlgebraWithInvolution};
use crate::matrix::{Matrix, Span};
use crate::scalar::Q;
use crate::QMat;

#[derive(Debug, thiserror::Error)]
pub enum EndoError {
    #[error("radical mismatch: trace-form kernel has dim {trace_form}, one-sided trace kernel has dim {one_sided}")]
    RadicalMismatch { trace_form: usize, one_sided: usize },
    #[error("trace-form kernel is not a two-sided ideal (input is not an algebra)")]
    NotIdeal,
    #[error("trace-form kernel contains a non-nilpotent element")]
    NotNilpotent,
    #[error("radical is not stable under adjunction")]
    NotSigmaStable,
    #[error("induced trace form on the quotient is degenerate")]
    Degenerate,
    #[error("unclassified: input is not an indecomposable holonomy commutant (fingerprint {0})")]
    Unclassified(Fingerprint),
    #[error("classification inconsistency: {0}")]
    Inconsistent(String),
}

/// The eight types of semi-simple part, plus the ℍ⊕ℍ commutant that occurs
/// in linear algebra but not for holonomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeLabel {
    One,
    OneC,
    Two,
    TwoPrime,
    TwoC,
    Three,
    ThreePrime,
    ThreeC,
    HplusH,
}

impl TypeLabel {
    pub const HOLONOMY: [TypeLabel; 8] = [
        TypeLabel::One,
        TypeLabel::OneC,
        TypeLabel::Two,
        TypeLabel::TwoPrime,
        TypeLabel::TwoC,
        TypeLabel::Three,
        TypeLabel::ThreePrime,
        TypeLabel::ThreeC,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TypeLabel::One => "(1)",
            TypeLabel::OneC => "(1ℂ)",
            TypeLabel::Two => "(2)",
            TypeLabel::TwoPrime => "(2′)",
            TypeLabel::TwoC => "(2ℂ)",
            TypeLabel::Three => "(3)",
            TypeLabel::ThreePrime => "(3′)",
            TypeLabel::ThreeC => "(3ℂ)",
            TypeLabel::HplusH => "HplusH",
        }
    }

    /// Accepts the display form and ASCII spellings such as `1C`, `2'`, `3p`.
    pub fn parse(s: &str) -> Option<TypeLabel> {
        let t: String = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .replace('ℂ', "C")
            .replace(['′', '\''], "p")
            .to_lowercase();
        Some(match t.as_str() {
            "1" => TypeLabel::One,
            "1c" => TypeLabel::OneC,
            "2" => TypeLabel::Two,
            "2p" => TypeLabel::TwoPrime,
            "2c" => TypeLabel::TwoC,
            "3" => TypeLabel::Three,
            "3p" => TypeLabel::ThreePrime,
            "3c" => TypeLabel::ThreeC,
            "hplush" | "h+h" => TypeLabel::HplusH,
            _ => return None,
        })
    }

    /// Types whose semi-simple part contains a self-adjoint complex structure.
    pub fn is_complexified(&self) -> bool {
        matches!(self, TypeLabel::OneC | TypeLabel::TwoC | TypeLabel::ThreeC)
    }

    /// Expected fingerprint (trace-form signatures on `𝔰` and `𝔰⁺`).
    pub fn fingerprint(&self) -> Fingerprint {
        let f = |a, b, s: (usize, usize), t: (usize, usize)| Fingerprint { dim_s: a, dim_s_plus: b, sig_s: s, sig_s_plus: t };
        match self {
            TypeLabel::One => f(1, 1, (1, 0), (1, 0)),
            TypeLabel::OneC => f(2, 2, (1, 1), (1, 1)),
            TypeLabel::Two => f(2, 1, (2, 0), (1, 0)),
            TypeLabel::TwoPrime => f(2, 1, (1, 1), (1, 0)),
            TypeLabel::TwoC => f(4, 2, (2, 2), (1, 1)),
            TypeLabel::Three => f(4, 1, (4, 0), (1, 0)),
            TypeLabel::ThreePrime => f(4, 1, (2, 2), (1, 0)),
            TypeLabel::ThreeC => f(8, 2, (4, 4), (1, 1)),
            // computed on the explicit ℍ⊕ℍ representation (see tests)
            TypeLabel::HplusH => f(8, 4, (4, 4), (1, 3)),
        }
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for TypeLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TypeLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TypeLabel::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown type label {s:?}")))
    }
}

/// `(dim 𝔰, dim 𝔰⁺, signature on 𝔰, signature on 𝔰⁺)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    pub dim_s: usize,
    pub dim_s_plus: usize,
    pub sig_s: (usize, usize),
    pub sig_s_plus: (usize, usize),
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, ({},{}), ({},{}))",
            self.dim_s, self.dim_s_plus, self.sig_s.0, self.sig_s.1, self.sig_s_plus.0, self.sig_s_plus.1
        )
    }
}

/// `⟨U,V⟩ = (1/d) tr(U* V)`.
pub fn trace_pairing(e: &MatrixAlgebraWithInvolution, u: &QMat, v: &QMat) -> Q {
    e.adjoint(u).mul(v).trace() / &Q::int(e.d as i64)
}

/// Gram matrix of the trace form on `basis`.
pub fn trace_form(e: &MatrixAlgebraWithInvolution, basis: &[QMat]) -> QMat {
    let n = basis.len();
    let adj: Vec<QMat> = basis.iter().map(|b| e.adjoint(b)).collect();
    let d = Q::int(e.d as i64);
    Matrix::from_fn(n, n, |i, j| adj[i].mul(&basis[j]).trace() / &d)
}

/// `{x ∈ 𝔢 : tr(xy) = 0 for all y ∈ 𝔢}`.
pub fn one_sided_trace_kernel(e: &MatrixAlgebraWithInvolution) -> Vec<QMat> {
    let basis = e.basis.clone();
    subspace_where(&e.basis, |x| basis.iter().map(|y| x.mul(y).trace()).collect())
}

/// Kernel of the trace form.
pub fn trace_form_kernel(e: &MatrixAlgebraWithInvolution) -> Vec<QMat> {
    let basis = e.basis.clone();
    let adj: Vec<QMat> = basis.iter().map(|b| e.adjoint(b)).collect();
    subspace_where(&e.basis, |x| adj.iter().map(|a| a.mul(x).trace()).collect())
}

fn same_span(d: usize, a: &[QMat], b: &[QMat]) -> bool {
    let sa = span_of(d, a);
    let sb = span_of(d, b);
    sa.len() == sb.len() && a.iter().all(|m| sb.contains(m.as_slice())) && b.iter().all(|m| sa.contains(m.as_slice()))
}

pub fn span_of(d: usize, ms: &[QMat]) -> Span<Q> {
    let mut s = Span::new(d * d);
    for m in ms {
        s.insert(m.as_slice());
    }
    s
}

/// Radical `𝔫` of `𝔢`, computed as the trace-form kernel, compared with
/// the one-sided trace kernel and verified to be a σ-stable nilpotent ideal.
pub fn radical(e: &MatrixAlgebraWithInvolution) -> Result<Vec<QMat>, EndoError> {
    let n = trace_form_kernel(e);
    let alt = one_sided_trace_kernel(e);
    if !same_span(e.d, &n, &alt) {
        return Err(EndoError::RadicalMismatch { trace_form: n.len(), one_sided: alt.len() });
    }
    let span = span_of(e.d, &n);
    for x in &n {
        if !x.pow(e.d as u32).is_zero() {
            return Err(EndoError::NotNilpotent);
        }
        if !span.contains(e.adjoint(x).as_slice()) {
            return Err(EndoError::NotSigmaStable);
        }
        for b in &e.basis {
            if !span.contains(b.mul(x).as_slice()) || !span.contains(x.mul(b).as_slice()) {
                return Err(EndoError::NotIdeal);
            }
        }
    }
    Ok(n)
}

/// Elements of `vs` that are independent modulo `base`; they span a
/// complement of `base` in `base + span(vs)`.
pub fn complement_mod(d: usize, base: &[QMat], vs: &[QMat]) -> Vec<QMat> {
    let mut s = span_of(d, base);
    vs.iter().filter(|v| s.insert(v.as_slice())).cloned().collect()
}

fn nondegenerate_signature(gram: &QMat) -> Result<(usize, usize), EndoError> {
    let (p, q, z) = gram.signature();
    if z != 0 {
        return Err(EndoError::Degenerate);
    }
    Ok((p, q))
}

/// Fingerprint of `𝔰 = 𝔢/𝔫` from the trace form.
pub fn fingerprint(e: &MatrixAlgebraWithInvolution, n: &[QMat]) -> Result<Fingerprint, EndoError> {
    let s = complement_mod(e.d, n, &e.basis);
    let sp = complement_mod(e.d, n, &e.self_adjoint_part());
    let sig_s = nondegenerate_signature(&trace_form(e, &s))?;
    let sig_s_plus = nondegenerate_signature(&trace_form(e, &sp))?;
    Ok(Fingerprint { dim_s: s.len(), dim_s_plus: sp.len(), sig_s, sig_s_plus })
}

pub fn classify(fp: &Fingerprint) -> Result<TypeLabel, EndoError> {
    TypeLabel::HOLONOMY
        .iter()
        .chain(std::iter::once(&TypeLabel::HplusH))
        .find(|l| l.fingerprint() == *fp)
        .copied()
        .ok_or(EndoError::Unclassified(*fp))
}

/// Trace-form data of a computed commutant.
#[derive(Clone, Debug, Serialize)]
pub struct EndoAnalysis {
    pub dim_e: usize,
    pub dim_n: usize,
    pub dim_s: usize,
    #[serde(skip)]
    pub radical: Vec<QMat>,
    pub fingerprint: Fingerprint,
    pub label: Option<TypeLabel>,
}

pub fn analyze(e: &MatrixAlgebraWithInvolution) -> Result<EndoAnalysis, EndoError> {
    let n = radical(e)?;
    let fp = fingerprint(e, &n)?;
    let label = classify(&fp).ok();
    Ok(EndoAnalysis { dim_e: e.dim(), dim_n: n.len(), dim_s: e.dim() - n.len(), radical: n, fingerprint: fp, label })
}

/// Nonzero elements of `𝔢⁺` that are not in `𝔫`, one per quotient direction.
pub fn self_adjoint_representatives(e: &MatrixAlgebraWithInvolution, n: &[QMat]) -> Vec<QMat> {
    complement_mod(e.d, n, &e.self_adjoint_part())
}

pub fn skew_adjoint_representatives(e: &MatrixAlgebraWithInvolution, n: &[QMat]) -> Vec<QMat> {
    complement_mod(e.d, n, &e.skew_adjoint_part())
}

/// Square-free parts of minimal polynomials agree for `U` and `U + N`.
pub fn minpoly_lemma_holds(u: &QMat, n: &QMat) -> bool {
    use crate::poly::minimal_polynomial;
    minimal_polynomial(u).squarefree_part() == minimal_polynomial(&u.add(n)).squarefree_part()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::{commutant, MatrixSpan};

    fn alg(g0: &QMat, ms: &[QMat]) -> MatrixAlgebraWithInvolution {
        MatrixAlgebraWithInvolution::new(g0, ms)
    }

    #[test]
    fn scalar_algebra_is_type_one() {
        let e = alg(&Matrix::identity(3), &[]);
        let a = analyze(&e).unwrap();
        assert_eq!(a.dim_n, 0);
        assert_eq!(a.fingerprint, TypeLabel::One.fingerprint());
        assert_eq!(a.label, Some(TypeLabel::One));
    }

    #[test]
    fn square_zero_element_is_radical() {
        // g0 = [[0,1],[1,0]], N = [[0,1],[0,0]] is self-adjoint and N² = 0
        let g0 = Matrix::from_ints(&[&[0, 1], &[1, 0]]);
        let n = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
        let e = alg(&g0, &[n.clone()]);
        assert!(e.is_product_closed() && e.is_sigma_stable());
        let r = radical(&e).unwrap();
        assert_eq!(r.len(), 1);
        assert!(span_of(2, &r).contains(n.as_slice()));
        assert_eq!(analyze(&e).unwrap().label, Some(TypeLabel::One));
    }

    #[test]
    fn complex_structure_gives_type_two() {
        let j = Matrix::from_ints(&[&[0, -1], &[1, 0]]);
        let e = alg(&Matrix::identity(2), &[j]);
        assert_eq!(analyze(&e).unwrap().label, Some(TypeLabel::Two));
    }

    #[test]
    fn paracomplex_structure_gives_type_two_prime() {
        let g0 = Matrix::from_ints(&[&[1, 0], &[0, -1]]);
        let l = Matrix::from_ints(&[&[0, 1], &[1, 0]]);
        let e = alg(&g0, &[l.clone()]);
        assert_eq!(e.adjoint(&l), l.neg());
        assert_eq!(analyze(&e).unwrap().label, Some(TypeLabel::TwoPrime));
    }

    #[test]
    fn label_parsing() {
        for l in TypeLabel::HOLONOMY {
            assert_eq!(TypeLabel::parse(l.as_str()), Some(l));
        }
        assert_eq!(TypeLabel::parse("3'"), Some(TypeLabel::ThreePrime));
        assert_eq!(TypeLabel::parse("2C"), Some(TypeLabel::TwoC));
        assert_eq!(TypeLabel::parse("4"), None);
    }

    #[test]
    fn fingerprints_are_distinct() {
        let mut fps: Vec<Fingerprint> = TypeLabel::HOLONOMY.iter().map(|l| l.fingerprint()).collect();
        fps.push(TypeLabel::HplusH.fingerprint());
        for i in 0..fps.len() {
            for j in i + 1..fps.len() {
                assert_ne!(fps[i], fps[j]);
            }
        }
    }

    #[test]
    fn empty_span_commutant_is_not_classified() {
        let e = commutant(&MatrixSpan::new(2), &Matrix::identity(2));
        let a = analyze(&e).unwrap();
        assert_eq!(a.dim_e, 4);
        assert_eq!(a.label, None);
    }

    #[test]
    fn quaternion_pair_commutant_fingerprint() {
        let (h, g0) = crate::generators::hh_negative_control();
        for w in h.basis() {
            assert_eq!(crate::holonomy::adjoint(w, &g0), w.neg());
        }
        let e = commutant(&h, &g0);
        assert_eq!(e.dim(), 8);
        let a = analyze(&e).unwrap();
        assert_eq!(a.dim_n, 0);
        let f = Fingerprint { dim_s: 8, dim_s_plus: 4, sig_s: (4, 4), sig_s_plus: (1, 3) };
        assert_eq!(a.fingerprint, f, "{}", a.fingerprint);
        assert_eq!(a.label, Some(TypeLabel::HplusH));
    }
}
