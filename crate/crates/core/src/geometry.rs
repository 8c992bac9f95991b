//! Levi-Civita connection, curvature and its covariant derivatives at the origin.
//!
//! Conventions: `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`,
//! `R(∂_i, ∂_j)∂_b = R^a_{bij} ∂_a` with
//! `R^a_{bij} = ∂_iΓ^a_{jb} − ∂_jΓ^a_{ib} + Γ^a_{ic}Γ^c_{jb} − Γ^a_{jc}Γ^c_{ib}`,
//! and `ric(x, y) = tr(v ↦ R(x, v)y)`.

use crate::germ::{realify_matrix, MetricGerm};
use crate::jet::{jm_invert, jm_truncate, Jet, JetError, JetMatrix};
use crate::matrix::Matrix;
use crate::scalar::{Field, G, Q};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("invalid germ: g(0) is singular")]
    Singular,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Christoffel symbols `gamma[k][i][j] = Γ^k_{ij}`.
pub type Christoffel<F> = Vec<Vec<Vec<Jet<F>>>>;

/// Christoffel symbols, exact to order `K−1`.
pub fn christoffel<F: Field>(g: &JetMatrix<F>) -> Result<Christoffel<F>, GeometryError> {
    let k = g[0][0].order();
    if k == 0 {
        return Err(JetError::OrderTooLow { needed: 1, have: 0 }.into());
    }
    christoffel_at(g, k - 1)
}

/// Christoffel symbols truncated at order `m ≤ K−1`.
fn christoffel_at<F: Field>(g: &JetMatrix<F>, m: u32) -> Result<Christoffel<F>, GeometryError> {
    let d = g.len();
    let gm = jm_truncate(g, m);
    let ginv = jm_invert(&gm).ok_or(GeometryError::Singular)?;
    let gt = jm_truncate(g, m + 1);
    // dg[l][i][j] = ∂_l g_ij
    let dg: Vec<Vec<Vec<Jet<F>>>> =
        (0..d).map(|l| (0..d).map(|i| (0..d).map(|j| gt[i][j].partial(l)).collect()).collect()).collect();
    let half = F::one() / &F::from_i64(2);
    // lowered: Γ_{l,ij}
    let mut low = vec![vec![vec![Jet::zero(d, m); d]; d]; d];
    for l in 0..d {
        for i in 0..d {
            for j in i..d {
                let s = dg[i][j][l].add(&dg[j][i][l]).sub(&dg[l][i][j]).scale(&half);
                low[l][j][i] = s.clone();
                low[l][i][j] = s;
            }
        }
    }
    let mut gamma = vec![vec![vec![Jet::zero(d, m); d]; d]; d];
    for a in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut s = Jet::zero(d, m);
                for l in 0..d {
                    s.add_product(&ginv[a][l], &low[l][i][j]);
                }
                gamma[a][j][i] = s.clone();
                gamma[a][i][j] = s;
            }
        }
    }
    Ok(gamma)
}

/// A tensor with one upper index and `m` lower indices, as a flat array of
/// jets indexed `[a, l_1, …, l_m]` in base `d`.
struct Tensor<F> {
    d: usize,
    lower: usize,
    data: Vec<Jet<F>>,
}

impl<F: Field> Tensor<F> {
    fn value_at_zero(&self) -> Vec<F> {
        self.data.iter().map(|j| j.at_zero()).collect()
    }
}

/// Curvature `R^a_{bij}` as jets, truncated at order `m ≤ K−2`.
fn curvature_jets<F: Field>(g: &JetMatrix<F>, gamma: &Christoffel<F>, m: u32) -> Tensor<F> {
    let d = g.len();
    let gm: Christoffel<F> =
        gamma.iter().map(|x| x.iter().map(|y| y.iter().map(|z| z.truncate(m)).collect()).collect()).collect();
    let mut data = vec![Jet::zero(d, m); d * d * d * d];
    let idx = |a: usize, b: usize, i: usize, j: usize| ((a * d + b) * d + i) * d + j;
    for a in 0..d {
        for b in 0..d {
            for i in 0..d {
                for j in i + 1..d {
                    let mut s = gamma[a][j][b].partial(i).sub(&gamma[a][i][b].partial(j));
                    for c in 0..d {
                        s.add_product(&gm[a][i][c], &gm[c][j][b]);
                        let t = gm[a][j][c].neg();
                        s.add_product(&t, &gm[c][i][b]);
                    }
                    data[idx(a, b, j, i)] = s.neg();
                    data[idx(a, b, i, j)] = s;
                }
            }
        }
    }
    Tensor { d, lower: 3, data }
}

/// Covariant derivative of a (1, m)-tensor; the new index is appended last.
/// The result is truncated at `m_out = K(t) − 1`.
fn covariant_derivative<F: Field>(t: &Tensor<F>, gamma: &Christoffel<F>) -> Tensor<F> {
    let d = t.d;
    let kin = t.data[0].order();
    let kout = kin - 1;
    let gm: Christoffel<F> =
        gamma.iter().map(|x| x.iter().map(|y| y.iter().map(|z| z.truncate(kout)).collect()).collect()).collect();
    let tt: Vec<Jet<F>> = t.data.iter().map(|x| x.truncate(kout)).collect();
    let m = t.lower;
    let len_in = t.data.len();
    let mut out = Vec::with_capacity(len_in * d);
    let pow = |e: usize| d.pow(e as u32);
    for flat in 0..len_in {
        // digits: a, l_1..l_m (most significant first)
        let mut digits = vec![0usize; m + 1];
        let mut r = flat;
        for s in (0..=m).rev() {
            digits[s] = r % d;
            r /= d;
        }
        for u in 0..d {
            let mut s = t.data[flat].partial(u);
            // + Γ^a_{uc} T^c_{…}
            let a = digits[0];
            let base = flat - a * pow(m);
            for c in 0..d {
                if gm[a][u][c].is_zero() {
                    continue;
                }
                s.add_product(&gm[a][u][c], &tt[base + c * pow(m)]);
            }
            // − Γ^c_{u l_s} T^a_{…c…}
            for slot in 1..=m {
                let l = digits[slot];
                let w = pow(m - slot);
                let base = flat - l * w;
                for c in 0..d {
                    if gm[c][u][l].is_zero() {
                        continue;
                    }
                    let neg = gm[c][u][l].neg();
                    s.add_product(&neg, &tt[base + c * w]);
                }
            }
            out.push(s);
        }
    }
    Tensor { d, lower: m + 1, data: out }
}

/// Curvature and its covariant derivatives evaluated at the origin.
#[derive(Clone)]
pub struct CurvatureAtOrigin<F> {
    pub d: usize,
    /// `levels[k]` holds `(D^kR)(e_i, e_j; e_{u_1}, …, e_{u_k})` as d×d
    /// matrices (row = upper index a, column = b), indexed by
    /// `(i, j, u_1, …, u_k)` in base d.
    pub levels: Vec<Vec<Matrix<F>>>,
}

impl<F: Field> CurvatureAtOrigin<F> {
    /// `R(e_i, e_j)` at the origin.
    pub fn r(&self, i: usize, j: usize) -> &Matrix<F> {
        &self.levels[0][i * self.d + j]
    }

    pub fn max_deriv(&self) -> usize {
        self.levels.len() - 1
    }

    /// `R(x, y)` for arbitrary vectors.
    pub fn r_vec(&self, x: &[F], y: &[F]) -> Matrix<F> {
        let d = self.d;
        let mut out = Matrix::zeros(d, d);
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                out = out.add(&self.r(i, j).scale(&(x[i].clone() * &y[j])));
            }
        }
        out
    }

    /// Ricci tensor at the origin: `ric_ij = tr(v ↦ R(e_i, v)e_j)`.
    pub fn ricci(&self) -> Matrix<F> {
        let d = self.d;
        Matrix::from_fn(d, d, |i, j| {
            let mut s = F::zero();
            for a in 0..d {
                s += &self.r(i, a)[(a, j)];
            }
            s
        })
    }
}

fn tensor_to_matrices<F: Field>(vals: Vec<F>, d: usize, lower: usize) -> Vec<Matrix<F>> {
    // values indexed [a, b, i, j, u…]; regroup by (i, j, u…)
    let rest = d.pow((lower - 1) as u32);
    (0..rest)
        .map(|r| Matrix::from_fn(d, d, |a, b| vals[(a * d + b) * rest + r].clone()))
        .collect()
}

/// `R` and `D^jR` for `j ≤ max_deriv` at the origin, from a metric of jets.
pub fn curvature_of<F: Field>(g: &JetMatrix<F>, max_deriv: usize) -> Result<CurvatureAtOrigin<F>, GeometryError> {
    let d = g.len();
    let k = g[0][0].order();
    let needed = max_deriv as u32 + 2;
    if k < needed {
        return Err(JetError::OrderTooLow { needed, have: k }.into());
    }
    let g = jm_truncate(g, needed);
    let gamma = christoffel_at(&g, needed - 1)?;
    let mut t = curvature_jets(&g, &gamma, max_deriv as u32);
    let mut levels = vec![tensor_to_matrices(t.value_at_zero(), d, t.lower)];
    for _ in 0..max_deriv {
        t = covariant_derivative(&t, &gamma);
        levels.push(tensor_to_matrices(t.value_at_zero(), d, t.lower));
    }
    Ok(CurvatureAtOrigin { d, levels })
}

/// Curvature of a germ in real coordinates. For complex germs it is computed
/// holomorphically and realified: a real index `n + j` stands for `i·e_j`.
pub fn curvature(germ: &MetricGerm, max_deriv: usize) -> Result<CurvatureAtOrigin<Q>, GeometryError> {
    match &germ.complex {
        None => curvature_of(&germ.g, max_deriv),
        Some(gc) => Ok(realify_curvature(&curvature_of(gc, max_deriv)?)),
    }
}

fn realify_curvature(c: &CurvatureAtOrigin<G>) -> CurvatureAtOrigin<Q> {
    let n = c.d;
    let d = 2 * n;
    let ipow = [G::one(), G::i(), -G::one(), -G::i()];
    let levels = c
        .levels
        .iter()
        .enumerate()
        .map(|(k, level)| {
            let slots = k as u32 + 2;
            (0..d.pow(slots))
                .map(|flat| {
                    let (mut r, mut src, mut imag) = (flat, 0usize, 0usize);
                    let mut w = 1;
                    for _ in 0..slots {
                        let digit = r % d;
                        r /= d;
                        src += (digit % n) * w;
                        imag += digit / n;
                        w *= n;
                    }
                    realify_matrix(&level[src].scale(&ipow[imag % 4]))
                })
                .collect()
        })
        .collect();
    CurvatureAtOrigin { d, levels }
}

/// Ricci tensor at the origin.
pub fn ricci(germ: &MetricGerm) -> Result<Matrix<Q>, GeometryError> {
    Ok(curvature(germ, 0)?.ricci())
}

/// Ricci tensor as a jet field, exact to order `K−2`.
pub fn ricci_jets<F: Field>(g: &JetMatrix<F>) -> Result<JetMatrix<F>, GeometryError> {
    let d = g.len();
    let k = g[0][0].order();
    if k < 2 {
        return Err(JetError::OrderTooLow { needed: 2, have: k }.into());
    }
    let gamma = christoffel_at(g, k - 1)?;
    let r = curvature_jets(g, &gamma, k - 2);
    let idx = |a: usize, b: usize, i: usize, j: usize| ((a * d + b) * d + i) * d + j;
    Ok((0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut s = Jet::zero(d, k - 2);
                    for a in 0..d {
                        s = s.add(&r.data[idx(a, j, i, a)]);
                    }
                    s
                })
                .collect()
        })
        .collect())
}

/// Order up to which a (0,2)-tensor field is parallel: returns `None` when
/// `∇T` vanishes identically to the available order, otherwise the degree of
/// the first nonzero term of `∇T`.
pub fn covariant_defect_02<F: Field>(g: &JetMatrix<F>, t: &JetMatrix<F>) -> Result<Option<u32>, GeometryError> {
    let d = g.len();
    let kt = t[0][0].order();
    if kt == 0 {
        return Err(JetError::OrderTooLow { needed: 1, have: 0 }.into());
    }
    let kout = kt - 1;
    let gk = g[0][0].order();
    if gk < kout + 1 {
        return Err(JetError::OrderTooLow { needed: kout + 1, have: gk }.into());
    }
    let gamma = christoffel_at(&jm_truncate(g, kout + 1), kout)?;
    let tt = jm_truncate(t, kout);
    let mut first: Option<u32> = None;
    for u in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut s = t[i][j].partial(u);
                for c in 0..d {
                    s.add_product(&gamma[c][u][i].neg(), &tt[c][j]);
                    s.add_product(&gamma[c][u][j].neg(), &tt[i][c]);
                }
                if let Some(v) = s.valuation() {
                    first = Some(first.map_or(v, |f: u32| f.min(v)));
                }
            }
        }
    }
    Ok(first)
}

/// Same as [`covariant_defect_02`] for a (1,1)-tensor field `U^a_b`.
pub fn covariant_defect_11<F: Field>(g: &JetMatrix<F>, u: &JetMatrix<F>) -> Result<Option<u32>, GeometryError> {
    let d = g.len();
    let kt = u[0][0].order();
    if kt == 0 {
        return Err(JetError::OrderTooLow { needed: 1, have: 0 }.into());
    }
    let kout = kt - 1;
    let gk = g[0][0].order();
    if gk < kout + 1 {
        return Err(JetError::OrderTooLow { needed: kout + 1, have: gk }.into());
    }
    let gamma = christoffel_at(&jm_truncate(g, kout + 1), kout)?;
    let ut = jm_truncate(u, kout);
    let mut first: Option<u32> = None;
    for w in 0..d {
        for a in 0..d {
            for b in 0..d {
                let mut s = u[a][b].partial(w);
                for c in 0..d {
                    s.add_product(&gamma[a][w][c], &ut[c][b]);
                    s.add_product(&gamma[c][w][b].neg(), &ut[a][c]);
                }
                if let Some(v) = s.valuation() {
                    first = Some(first.map_or(v, |f: u32| f.min(v)));
                }
            }
        }
    }
    Ok(first)
}

/// Constant (1,1)-tensor field as a jet matrix.
pub fn constant_field<F: Field>(m: &Matrix<F>, nvars: usize, k: u32) -> JetMatrix<F> {
    (0..m.rows).map(|i| (0..m.cols).map(|j| Jet::constant(nvars, k, m[(i, j)].clone())).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::flat_germ;

    fn diag2(g22: Jet<Q>) -> JetMatrix<Q> {
        let k = g22.order();
        vec![vec![Jet::one(2, k), Jet::zero(2, k)], vec![Jet::zero(2, k), g22]]
    }

    #[test]
    fn holomorphic_curvature_matches_real_computation() {
        // g_C = [[1 + z₂², i z₂], [i z₂, −1 + z₁ z₂]]
        let k = 3;
        let z = |i| Jet::<G>::var(2, k, i);
        let one = Jet::<G>::one(2, k);
        let g11 = one.add(&z(1).mul(&z(1)));
        let g12 = z(1).scale(&G::i());
        let g22 = one.neg().add(&z(0).mul(&z(1)));
        let germ = MetricGerm::complex(vec![vec![g11, g12.clone()], vec![g12, g22]]).unwrap();
        let fast = curvature(&germ, 1).unwrap();
        let slow = curvature_of(&germ.g, 1).unwrap();
        assert_eq!(fast.levels, slow.levels);
        assert!(!fast.r(0, 1).is_zero());
    }

    #[test]
    fn flat_has_no_curvature() {
        let g = flat_germ(2, 1, 4);
        let c = curvature(&g, 2).unwrap();
        assert!(c.levels.iter().flatten().all(|m| m.is_zero()));
        assert!(christoffel(&g.g).unwrap().iter().flatten().flatten().all(|j| j.is_zero()));
    }

    #[test]
    fn christoffel_diag_example() {
        // g = diag(1, 1+2x): Γ^2_{12} = ½ ∂_x g22 / g22 = (1+2x)^{-1}
        let k = 3;
        let g22 = Jet::one(2, k).add(&Jet::var(2, k, 0).scale(&Q::int(2)));
        let gamma = christoffel(&diag2(g22.clone())).unwrap();
        let want = g22.truncate(2).invert().unwrap();
        assert_eq!(gamma[1][0][1], want);
        assert_eq!(gamma[1][1][0], want);
    }

    #[test]
    fn two_dim_gauss_curvature() {
        // g = diag(1, 1 − x²): K = −∂²_x g22 / (2 g22) at 0 = 1
        let k = 2;
        let g22 = Jet::one(2, k).sub(&Jet::monomial(2, k, &[2, 0], Q::one()));
        let c = curvature_of(&diag2(g22), 0).unwrap();
        // sectional curvature K = g(R(e1,e2)e2, e1) / (g11 g22 − g12²)
        let r = c.r(0, 1);
        let kk = r[(0, 1)].clone();
        assert_eq!(kk, Q::one());
    }

    #[test]
    fn order_check() {
        let g = flat_germ(2, 0, 2);
        let Err(err) = curvature(&g, 1) else { panic!("expected an order error") };
        assert!(err.to_string().contains("raise K"), "{err}");
        assert!(err.to_string().contains("K >= 3"));
    }
}
