//! Infinitesimal holonomy at the origin, its fixed space and its commutant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::CurvatureAtOrigin;
use crate::matrix::{combine, Matrix, Span};
use crate::poly::minimal_polynomial;
use crate::scalar::{Field, Q};
use crate::QMat;

/// Linearly independent d×d matrices, optionally closed under brackets.
#[derive(Clone, Debug)]
pub struct MatrixSpan {
    pub d: usize,
    basis: Vec<QMat>,
    span: Span<Q>,
    pub bracket_closed: bool,
    /// Dimension after adding level k (and closing under brackets).
    pub level_dims: Vec<usize>,
    /// Level after which two consecutive levels added nothing.
    pub stabilized_at: Option<usize>,
}

impl MatrixSpan {
    pub fn new(d: usize) -> Self {
        MatrixSpan {
            d,
            basis: Vec::new(),
            span: Span::new(d * d),
            bracket_closed: true,
            level_dims: Vec::new(),
            stabilized_at: None,
        }
    }

    /// Span of the given matrices, without bracket closure.
    pub fn from_matrices(d: usize, ms: &[QMat]) -> Self {
        let mut s = MatrixSpan::new(d);
        for m in ms {
            s.insert(m);
        }
        s.bracket_closed = s.is_empty();
        s
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[QMat] {
        &self.basis
    }

    pub fn contains(&self, m: &QMat) -> bool {
        self.span.contains(m.as_slice())
    }

    /// Adds `m`; returns whether the span grew.
    pub fn insert(&mut self, m: &QMat) -> bool {
        if self.span.insert(m.as_slice()) {
            self.basis.push(m.clone());
            self.bracket_closed = false;
            true
        } else {
            false
        }
    }

    /// Appends brackets until the span is a Lie algebra.
    pub fn close_brackets(&mut self) {
        let mut done = 0;
        while done < self.basis.len() {
            let n = self.basis.len();
            for i in 0..n {
                for j in done.max(i + 1)..n {
                    let c = self.basis[i].commutator(&self.basis[j]);
                    self.insert(&c);
                }
            }
            done = n;
        }
        self.bracket_closed = true;
    }

    /// Bracket-closure check against the stored basis.
    pub fn is_bracket_closed(&self) -> bool {
        let b = &self.basis;
        (0..b.len()).all(|i| (i + 1..b.len()).all(|j| self.contains(&b[i].commutator(&b[j]))))
    }
}

/// Span of `(D^kR)(e_i, e_j; …)` for every computed level k, closed under
/// brackets. Records the dimension reached at each level and whether the
/// last two levels added nothing.
pub fn holonomy_span(curv: &CurvatureAtOrigin<Q>) -> MatrixSpan {
    let mut h = MatrixSpan::new(curv.d);
    for level in &curv.levels {
        for m in level {
            if !m.is_zero() {
                h.insert(m);
            }
        }
        h.close_brackets();
        h.level_dims.push(h.dim());
    }
    let dims = &h.level_dims;
    let n = dims.len();
    if n >= 3 && dims[n - 1] == dims[n - 3] {
        let mut k = n - 3;
        while k > 0 && dims[k - 1] == dims[k] {
            k -= 1;
        }
        h.stabilized_at = Some(k);
    }
    h
}

/// `E₀`: common kernel of the span. The whole space when the span is empty.
pub fn fixed_space(h: &MatrixSpan) -> Vec<Vec<Q>> {
    let d = h.d;
    if h.is_empty() {
        return (0..d).map(|i| unit(d, i)).collect();
    }
    let rows: Vec<Vec<Q>> = h.basis().iter().flat_map(|w| w.to_rows()).collect();
    Matrix::from_rows(rows).nullspace()
}

pub fn unit(d: usize, i: usize) -> Vec<Q> {
    (0..d).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()
}

/// Whether `g0` vanishes on the subspace spanned by `vs`.
pub fn is_totally_isotropic(vs: &[Vec<Q>], g0: &QMat) -> bool {
    vs.iter().all(|x| {
        let gx = g0.mul_vec(x);
        vs.iter().all(|y| crate::matrix::dot(&gx, y).is_zero())
    })
}

/// `U* = g0⁻¹ ᵗU g0`.
pub fn adjoint(u: &QMat, g0: &QMat) -> QMat {
    let inv = g0.inverse().expect("g(0) is nondegenerate");
    inv.mul(&u.transpose()).mul(g0)
}

/// Associative matrix algebra containing `Id`, with the `g0`-adjunction.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixAlgebraWithInvolution {
    pub d: usize,
    pub basis: Vec<QMat>,
    pub g0: QMat,
    #[serde(skip)]
    g0_inv: QMat,
    #[serde(skip)]
    span: Span<Q>,
}

impl MatrixAlgebraWithInvolution {
    /// Algebra spanned by `Id` and `ms`; closure is not enforced here.
    pub fn new(g0: &QMat, ms: &[QMat]) -> Self {
        let d = g0.rows;
        let mut a = MatrixAlgebraWithInvolution {
            d,
            basis: Vec::new(),
            g0: g0.clone(),
            g0_inv: g0.inverse().expect("g(0) is nondegenerate"),
            span: Span::new(d * d),
        };
        a.push(&Matrix::identity(d));
        for m in ms {
            a.push(m);
        }
        a
    }

    fn push(&mut self, m: &QMat) {
        if self.span.insert(m.as_slice()) {
            self.basis.push(m.clone());
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn adjoint(&self, u: &QMat) -> QMat {
        self.g0_inv.mul(&u.transpose()).mul(&self.g0)
    }

    pub fn contains(&self, m: &QMat) -> bool {
        self.span.contains(m.as_slice())
    }

    pub fn is_product_closed(&self) -> bool {
        self.basis.iter().all(|a| self.basis.iter().all(|b| self.contains(&a.mul(b))))
    }

    pub fn is_sigma_stable(&self) -> bool {
        self.basis.iter().all(|a| {
            let s = self.adjoint(a);
            self.contains(&s) && self.adjoint(&s) == *a
        })
    }

    /// Basis of `𝔢⁺ = {U : U* = U}`.
    pub fn self_adjoint_part(&self) -> Vec<QMat> {
        let half = Q::new(1, 2);
        let ms: Vec<QMat> = self.basis.iter().map(|b| b.add(&self.adjoint(b)).scale(&half)).collect();
        independent(self.d, &ms)
    }

    /// Basis of `𝔢⁻ = {U : U* = −U}`.
    pub fn skew_adjoint_part(&self) -> Vec<QMat> {
        let half = Q::new(1, 2);
        let ms: Vec<QMat> = self.basis.iter().map(|b| b.sub(&self.adjoint(b)).scale(&half)).collect();
        independent(self.d, &ms)
    }

    /// Elements `Σ c_i B_i` whose image under the linear map `f` vanishes.
    pub fn solve_linear(&self, f: impl Fn(&QMat) -> Vec<Q>) -> Vec<QMat> {
        subspace_where(&self.basis, f)
    }
}

/// Nonzero, linearly independent subset of `ms` spanning the same space.
pub fn independent(d: usize, ms: &[QMat]) -> Vec<QMat> {
    let mut s = Span::new(d * d);
    ms.iter().filter(|m| s.insert(m.as_slice())).cloned().collect()
}

/// Basis of `{Σ c_i B_i : f(Σ c_i B_i) = 0}` for a linear map `f`.
pub fn subspace_where(basis: &[QMat], f: impl Fn(&QMat) -> Vec<Q>) -> Vec<QMat> {
    if basis.is_empty() {
        return Vec::new();
    }
    let cols: Vec<Vec<Q>> = basis.iter().map(&f).collect();
    let m = Matrix::from_fn(cols[0].len(), basis.len(), |r, c| cols[c][r].clone());
    let null = if m.rows == 0 { (0..basis.len()).map(|i| unit(basis.len(), i)).collect() } else { m.nullspace() };
    null.iter().map(|c| combine(c, basis)).collect()
}

/// `End(E)^𝔥 = {U : UW = WU for all W in h}`, with `Id` as first basis element.
pub fn commutant(h: &MatrixSpan, g0: &QMat) -> MatrixAlgebraWithInvolution {
    let d = h.d;
    let mut rows = Span::<Q>::new(d * d);
    for w in h.basis() {
        // (UW − WU)_{ij} = Σ_k U_ik W_kj − W_ik U_kj
        for i in 0..d {
            for j in 0..d {
                let mut r = vec![Q::zero(); d * d];
                for k in 0..d {
                    r[i * d + k] += &w[(k, j)];
                    r[k * d + j] -= &w[(i, k)];
                }
                rows.insert(&r);
            }
        }
    }
    let sols: Vec<QMat> = if rows.is_empty() {
        (0..d * d).map(|i| Matrix::from_vec(d, d, unit(d * d, i))).collect()
    } else {
        Matrix::from_rows(rows.basis()).nullspace().iter().map(|v| Matrix::unflatten(d, v)).collect()
    };
    MatrixAlgebraWithInvolution::new(g0, &sols)
}

/// Failure of the square-zero property of `𝔫₀`.
#[derive(Debug, thiserror::Error)]
#[error("internal inconsistency: 𝔫₀ is not square-zero")]
pub struct SquareZeroError;

/// `𝔫₀ = {N ∈ 𝔢 : Im N ⊂ E₀}`, checked to satisfy `𝔫₀² = 0`.
pub fn n0_ideal(e: &MatrixAlgebraWithInvolution, e0: &[Vec<Q>]) -> Result<Vec<QMat>, SquareZeroError> {
    let d = e.d;
    let ann: Vec<Vec<Q>> = if e0.is_empty() {
        (0..d).map(|i| unit(d, i)).collect()
    } else {
        Matrix::from_rows(e0.to_vec()).nullspace()
    };
    if ann.is_empty() {
        // E₀ is everything: every element qualifies
        let all = e.basis.clone();
        return check_square_zero(all);
    }
    let n0 = e.solve_linear(|n| {
        let mut out = Vec::with_capacity(ann.len() * d);
        for y in &ann {
            for c in 0..d {
                let mut s = Q::zero();
                for r in 0..d {
                    if !y[r].is_zero() {
                        s += &(y[r].clone() * &n[(r, c)]);
                    }
                }
                out.push(s);
            }
        }
        out
    });
    check_square_zero(n0)
}

fn check_square_zero(n0: Vec<QMat>) -> Result<Vec<QMat>, SquareZeroError> {
    for a in &n0 {
        for b in &n0 {
            if !a.mul(b).is_zero() {
                return Err(SquareZeroError);
            }
        }
    }
    Ok(n0)
}

/// Outcome of the seeded decomposability probe.
#[derive(Clone, Debug, Serialize)]
pub struct DecomposabilityProbe {
    pub seed: u64,
    pub samples: usize,
    /// Square-free minimal polynomials that were reducible over ℝ.
    pub witnesses: Vec<String>,
}

impl DecomposabilityProbe {
    pub fn decomposable(&self) -> bool {
        !self.witnesses.is_empty()
    }
}

/// Random self-adjoint element `X + X*` of the algebra with coefficients in
/// `[-3, 3]`.
pub fn random_self_adjoint(e: &MatrixAlgebraWithInvolution, rng: &mut ChaCha8Rng) -> QMat {
    let c: Vec<Q> = e.basis.iter().map(|_| Q::int(rng.gen_range(-3..=3))).collect();
    let x = combine(&c, &e.basis);
    x.add(&e.adjoint(&x))
}

/// On an indecomposable germ every self-adjoint parallel endomorphism has a
/// minimal polynomial `P^α` with `P` irreducible over ℝ; a sample violating
/// this proves the germ decomposable.
pub fn decomposability_probe(e: &MatrixAlgebraWithInvolution, seed: u64, samples: usize) -> DecomposabilityProbe {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witnesses = Vec::new();
    for _ in 0..samples {
        let u = random_self_adjoint(e, &mut rng);
        let sf = minimal_polynomial(&u).squarefree_part();
        if !sf.irreducible_over_reals() {
            witnesses.push(format!("{sf:?}"));
        }
    }
    DecomposabilityProbe { seed, samples, witnesses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curvature;
    use crate::germ::flat_germ;

    fn so(d: usize) -> Vec<QMat> {
        let mut out = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                let mut m = Matrix::zeros(d, d);
                m[(i, j)] = Q::one();
                m[(j, i)] = -Q::one();
                out.push(m);
            }
        }
        out
    }

    #[test]
    fn flat_germ_has_empty_span_and_full_commutant() {
        let g = flat_germ(2, 1, 4);
        let curv = curvature(&g, 2).unwrap();
        let h = holonomy_span(&curv);
        assert!(h.is_empty());
        assert_eq!(h.level_dims, vec![0, 0, 0]);
        assert_eq!(h.stabilized_at, Some(0));
        assert_eq!(fixed_space(&h).len(), 3);
        let e = commutant(&h, &g.g0());
        assert_eq!(e.dim(), 9);
    }

    #[test]
    fn full_orthogonal_algebra_has_scalar_commutant() {
        let d = 4;
        let mut h = MatrixSpan::from_matrices(d, &so(d)[..3]);
        h.close_brackets();
        assert_eq!(h.dim(), 6);
        assert!(h.is_bracket_closed());
        let e = commutant(&h, &Matrix::identity(d));
        assert_eq!(e.dim(), 1);
        assert_eq!(e.basis[0], Matrix::identity(d));
        assert!(fixed_space(&h).is_empty());
    }

    #[test]
    fn single_nilpotent_fixes_first_axis() {
        let n = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
        let h = MatrixSpan::from_matrices(2, &[n]);
        let e0 = fixed_space(&h);
        assert_eq!(e0, vec![vec![Q::one(), Q::zero()]]);
    }

    #[test]
    fn adjoint_flips_sign_in_lorentz_plane() {
        let g0 = Matrix::from_ints(&[&[1, 0], &[0, -1]]);
        let u = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
        let s = adjoint(&u, &g0);
        assert_eq!(s, Matrix::from_ints(&[&[0, 0], &[-1, 0]]));
        assert_eq!(adjoint(&s, &g0), u);
    }

    #[test]
    fn null_rotation_gives_square_zero_n0() {
        // d=3, g0 = [[0,0,1],[0,1,0],[1,0,0]], h spanned by a null rotation
        let g0 = Matrix::from_ints(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]);
        let w = Matrix::from_ints(&[&[0, 1, 0], &[0, 0, -1], &[0, 0, 0]]);
        assert_eq!(adjoint(&w, &g0), w.neg());
        let h = MatrixSpan::from_matrices(3, &[w]);
        let e0 = fixed_space(&h);
        assert_eq!(e0.len(), 1);
        assert!(is_totally_isotropic(&e0, &g0));
        let e = commutant(&h, &g0);
        assert!(e.is_product_closed());
        assert!(e.is_sigma_stable());
        let n0 = n0_ideal(&e, &e0).unwrap();
        assert!(!n0.is_empty());
    }

    #[test]
    fn probe_flags_product_structure() {
        // h = so(2) ⊕ so(2) acting on ℝ² ⊕ ℝ²: commutant contains diag(1,1,0,0)
        let a = Matrix::from_ints(&[&[0, 1, 0, 0], &[-1, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
        let b = Matrix::from_ints(&[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 2], &[0, 0, -2, 0]]);
        let h = MatrixSpan::from_matrices(4, &[a, b]);
        let e = commutant(&h, &Matrix::identity(4));
        let p = decomposability_probe(&e, 7, 6);
        assert!(p.decomposable());
        let e1 = commutant(&MatrixSpan::from_matrices(4, &so(4)), &Matrix::identity(4));
        assert!(!decomposability_probe(&e1, 7, 6).decomposable());
    }
}
