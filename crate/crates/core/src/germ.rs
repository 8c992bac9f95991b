//! Metric germs: a symmetric matrix of jets, real or complex-holomorphic.

use crate::jet::{jm_at_zero, Jet, JetMatrix};
use crate::matrix::{Matrix, QMat};
use crate::scalar::{binom, Field, G, Q};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GermError {
    #[error("invalid germ: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> GermError {
    GermError::Invalid(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordKind {
    Real,
    Complex,
}

/// A metric germ at the origin.
///
/// Complex-holomorphic germs keep their complex coefficient matrix
/// `g_C` (n×n, jets in n complex variables) and are also stored as the real
/// germ `Re g_C` of dimension `d = 2n` in coordinates `(x, y)` with
/// `z = x + i y`; the self-adjoint complex structure is then
/// `[[0, −I], [I, 0]]`.
#[derive(Clone, Debug)]
pub struct MetricGerm {
    pub d: usize,
    pub signature: (usize, usize),
    pub kind: CoordKind,
    /// Real d×d metric coefficients, jets in d variables.
    pub g: JetMatrix<Q>,
    /// Holomorphic coefficients for complex germs.
    pub complex: Option<JetMatrix<G>>,
}

impl MetricGerm {
    pub fn real(g: JetMatrix<Q>) -> Result<MetricGerm, GermError> {
        let d = g.len();
        check_shape(&g, d, d)?;
        let g0 = jm_at_zero(&g);
        let (p, q, z) = g0.signature();
        if z > 0 {
            return Err(invalid("g(0) is singular"));
        }
        Ok(MetricGerm { d, signature: (p, q), kind: CoordKind::Real, g, complex: None })
    }

    /// Builds a germ from holomorphic coefficients in `n` complex variables.
    pub fn complex(gc: JetMatrix<G>) -> Result<MetricGerm, GermError> {
        let n = gc.len();
        check_shape(&gc, n, n)?;
        let g0 = jm_at_zero(&gc);
        if g0.det().is_zero() {
            return Err(invalid("g(0) is singular"));
        }
        let g = realify_metric(&gc);
        Ok(MetricGerm { d: 2 * n, signature: (n, n), kind: CoordKind::Complex, g, complex: Some(gc) })
    }

    pub fn order(&self) -> u32 {
        self.g[0][0].order()
    }

    pub fn g0(&self) -> QMat {
        jm_at_zero(&self.g)
    }

    /// The self-adjoint complex structure of a complex germ.
    pub fn jbar(&self) -> Option<QMat> {
        match self.kind {
            CoordKind::Real => None,
            CoordKind::Complex => Some(complex_structure(self.d / 2)),
        }
    }

    /// Checks a declared signature against g(0).
    pub fn check_signature(&self, declared: (usize, usize)) -> Result<(), GermError> {
        if declared != self.signature {
            return Err(invalid(format!(
                "declared signature {:?} but g(0) has signature {:?}",
                declared, self.signature
            )));
        }
        Ok(())
    }

    /// Same germ with every coefficient jet re-truncated at `k` (polynomial
    /// germs can be extended to a higher order).
    pub fn with_order(&self, k: u32) -> MetricGerm {
        let conv_q = |j: &Jet<Q>| if k <= j.order() { j.truncate(k) } else { j.extend_polynomial(k) };
        let conv_g = |j: &Jet<G>| if k <= j.order() { j.truncate(k) } else { j.extend_polynomial(k) };
        MetricGerm {
            d: self.d,
            signature: self.signature,
            kind: self.kind,
            g: self.g.iter().map(|r| r.iter().map(conv_q).collect()).collect(),
            complex: self.complex.as_ref().map(|c| c.iter().map(|r| r.iter().map(conv_g).collect()).collect()),
        }
    }

    /// Largest degree actually present in the coefficients.
    pub fn polynomial_degree(&self) -> u32 {
        self.g.iter().flatten().filter_map(|j| j.max_degree()).max().unwrap_or(0)
    }
}

/// `[[0, −I], [I, 0]]` of size 2n.
pub fn complex_structure(n: usize) -> QMat {
    let i = Matrix::<Q>::identity(n);
    let z = Matrix::<Q>::zeros(n, n);
    Matrix::blocks(&[&[&z, &i.neg()], &[&i, &z]])
}

fn check_shape<F: Field>(g: &JetMatrix<F>, rows: usize, nvars: usize) -> Result<(), GermError> {
    if rows == 0 {
        return Err(invalid("empty metric"));
    }
    let k = g[0][0].order();
    for (i, r) in g.iter().enumerate() {
        if r.len() != rows {
            return Err(invalid(format!("row {i} has {} entries, expected {rows}", r.len())));
        }
        for (j, e) in r.iter().enumerate() {
            if e.nvars() != nvars {
                return Err(invalid(format!("g[{i}][{j}] has {} variables, expected {nvars}", e.nvars())));
            }
            if e.order() != k {
                return Err(invalid(format!("g[{i}][{j}] has K={}, expected {k}", e.order())));
            }
        }
    }
    for i in 0..rows {
        for j in 0..i {
            if g[i][j] != g[j][i] {
                return Err(invalid(format!("g is not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Substitutes `z_j = x_j + i y_j` in a holomorphic jet; returns the real and
/// imaginary parts as jets in `2n` real variables ordered `(x, y)`.
pub fn realify(f: &Jet<G>) -> (Jet<Q>, Jet<Q>) {
    let n = f.nvars();
    let k = f.order();
    let mut re = Jet::zero(2 * n, k);
    let mut im = Jet::zero(2 * n, k);
    for (m, c) in f.terms() {
        // expand Π_j (x_j + i y_j)^{a_j}
        let mut acc: Vec<(Vec<u32>, G)> = vec![(vec![0; 2 * n], c.clone())];
        for j in 0..n {
            let a = m.exp(j);
            if a == 0 {
                continue;
            }
            let mut next = Vec::new();
            for (e, coef) in &acc {
                for t in 0..=a {
                    // C(a,t) x^{a−t} (i y)^t
                    let mut ipow = G::one();
                    for _ in 0..t {
                        ipow = ipow * &G::i();
                    }
                    let b = binom(&Q::int(a as i64), t as usize);
                    let mut e2 = e.clone();
                    e2[j] += a - t;
                    e2[n + j] += t;
                    next.push((e2, coef.clone() * &ipow * &G::real(b)));
                }
            }
            acc = next;
        }
        for (e, coef) in acc {
            re = re.add(&Jet::monomial(2 * n, k, &e, coef.re.clone()));
            im = im.add(&Jet::monomial(2 * n, k, &e, coef.im.clone()));
        }
    }
    (re, im)
}

/// Real metric `[[P, −Q], [−Q, −P]]` from `g_C = P + iQ`.
pub fn realify_metric(gc: &JetMatrix<G>) -> JetMatrix<Q> {
    let n = gc.len();
    let parts: Vec<Vec<(Jet<Q>, Jet<Q>)>> = gc.iter().map(|r| r.iter().map(realify).collect()).collect();
    let mut g = vec![Vec::with_capacity(2 * n); 2 * n];
    for (i, row) in g.iter_mut().enumerate() {
        for j in 0..2 * n {
            let (p, q) = &parts[i % n][j % n];
            let e = match (i < n, j < n) {
                (true, true) => p.clone(),
                (false, false) => p.neg(),
                _ => q.neg(),
            };
            row.push(e);
        }
    }
    g
}

/// Real matrix `[[A, −B], [B, A]]` of the complex-linear map `A + iB`.
pub fn realify_matrix(m: &Matrix<G>) -> QMat {
    let (a, b) = (m.re(), m.im());
    Matrix::blocks(&[&[&a, &b.neg()], &[&b, &a]])
}

/// Checks the Cauchy–Riemann relation `∂_{y_j} f = i ∂_{x_j} f` on a pair of
/// real jets `f = re + i·im` in variables `(x, y)`.
pub fn cauchy_riemann_holds(re: &Jet<Q>, im: &Jet<Q>) -> bool {
    let n = re.nvars() / 2;
    (0..n).all(|j| {
        // ∂y re = −∂x im, ∂y im = ∂x re
        re.partial(n + j) == im.partial(j).neg() && im.partial(n + j) == re.partial(j)
    })
}

#[derive(Serialize, Deserialize)]
struct GermRepr {
    d: usize,
    signature: (usize, usize),
    kind: CoordKind,
    g: serde_json::Value,
}

impl Serialize for MetricGerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let g = match &self.complex {
            Some(c) => serde_json::to_value(c),
            None => serde_json::to_value(&self.g),
        }
        .map_err(serde::ser::Error::custom)?;
        GermRepr { d: self.d, signature: self.signature, kind: self.kind, g }.serialize(s)
    }
}

/// Parses a germ from JSON, reporting the JSON path of the first problem.
pub fn parse_germ(text: &str) -> Result<MetricGerm, GermError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| invalid(format!("malformed JSON: {e}")))?;
    germ_from_value(&v)
}

pub fn germ_from_value(v: &serde_json::Value) -> Result<MetricGerm, GermError> {
    let obj = v.as_object().ok_or_else(|| invalid("$: expected an object"))?;
    let field = |k: &str| obj.get(k).ok_or_else(|| invalid(format!("$.{k}: missing field")));
    let d = field("d")?.as_u64().ok_or_else(|| invalid("$.d: expected a non-negative integer"))? as usize;
    let sig: (usize, usize) = serde_json::from_value(field("signature")?.clone())
        .map_err(|e| invalid(format!("$.signature: {e}")))?;
    let kind: CoordKind =
        serde_json::from_value(field("kind")?.clone()).map_err(|e| invalid(format!("$.kind: {e}")))?;
    let rows = field("g")?.as_array().ok_or_else(|| invalid("$.g: expected an array of rows"))?;
    let germ = match kind {
        CoordKind::Real => {
            let g = parse_rows::<Q>(rows)?;
            if g.len() != d {
                return Err(invalid(format!("$.g: {} rows but d = {d}", g.len())));
            }
            MetricGerm::real(g)?
        }
        CoordKind::Complex => {
            let g = parse_rows::<G>(rows)?;
            if 2 * g.len() != d {
                return Err(invalid(format!("$.g: {} complex rows but d = {d} (need d = 2n)", g.len())));
            }
            MetricGerm::complex(g)?
        }
    };
    germ.check_signature(sig)?;
    Ok(germ)
}

fn parse_rows<F>(rows: &[serde_json::Value]) -> Result<JetMatrix<F>, GermError>
where
    F: Field + for<'de> Deserialize<'de>,
{
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let r = r.as_array().ok_or_else(|| invalid(format!("$.g[{i}]: expected an array")))?;
            r.iter()
                .enumerate()
                .map(|(j, e)| {
                    serde_json::from_value::<Jet<F>>(e.clone())
                        .map_err(|err| invalid(format!("$.g[{i}][{j}]: {err}")))
                })
                .collect()
        })
        .collect()
}

/// Constant metric `diag(I_p, −I_q)` as a germ of order `k`.
pub fn flat_germ(p: usize, q: usize, k: u32) -> MetricGerm {
    let d = p + q;
    let g = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let c = if i != j { 0 } else if i < p { 1 } else { -1 };
                    Jet::constant(d, k, Q::int(c))
                })
                .collect()
        })
        .collect();
    MetricGerm::real(g).expect("flat germ is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realify_square() {
        // z^2 = x^2 − y^2 + 2i x y
        let f = Jet::monomial(1, 2, &[2], G::one());
        let (re, im) = realify(&f);
        let want_re = Jet::monomial(2, 2, &[2, 0], Q::one()).add(&Jet::monomial(2, 2, &[0, 2], Q::int(-1)));
        assert_eq!(re, want_re);
        assert_eq!(im, Jet::monomial(2, 2, &[1, 1], Q::int(2)));
        assert!(cauchy_riemann_holds(&re, &im));
        assert!(!cauchy_riemann_holds(&re, &re));
    }

    #[test]
    fn complex_germ_is_real_part() {
        let k = 2;
        let z: Jet<G> = Jet::var(1, k, 0);
        let gc = vec![vec![Jet::one(1, k).add(&z.scale(&G::i()))]];
        let germ = MetricGerm::complex(gc).unwrap();
        assert_eq!(germ.d, 2);
        assert_eq!(germ.signature, (1, 1));
        // g_C = 1 + i z = 1 − y + i x  ⇒  P = 1 − y, Q = x
        let p = Jet::one(2, k).sub(&Jet::var(2, k, 1));
        assert_eq!(germ.g[0][0], p);
        assert_eq!(germ.g[0][1], Jet::var(2, k, 0).neg());
        assert_eq!(germ.g[1][1], p.neg());
        let j = germ.jbar().unwrap();
        let g0 = germ.g0();
        // J̲ is self-adjoint: ᵗJ̲ g0 = g0 J̲
        assert_eq!(j.transpose().mul(&g0), g0.mul(&j));
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let g = flat_germ(1, 1, 2);
        let s = serde_json::to_string(&g).unwrap();
        let back = parse_germ(&s).unwrap();
        assert_eq!(back.g, g.g);
        let bad = s.replace("[1,1]]]", "[1,0]]]");
        assert!(parse_germ(&bad).is_err());
        let err = parse_germ(r#"{"d":2,"signature":[1,1],"kind":"real","g":[[1]]}"#).unwrap_err();
        assert!(err.to_string().contains("$.g[0][0]"), "{err}");
        let sing = r#"{"d":1,"signature":[1,0],"kind":"real","g":[[{"n":1,"K":1,"terms":[[[1],[1,1]]]}]]}"#;
        assert!(parse_germ(sing).unwrap_err().to_string().contains("singular"));
    }
}
