//! Cartan's test for the exterior differential system `λ = ᵗdz ∧ dH ∧ dz̄`
//! on `ℂ^{2δ} × 𝓗_ε`: characters of an integral flag and the dimension of
//! the variety of integral elements.
//!
//! A real tangent vector of `ℂ^{2δ}` is written `(α, β) ∈ ℚ^{2δ} × ℚ^{2δ}`
//! with `z = α + iβ`, and a tangent vector of `𝓗_ε` as `(Er, Ei)` with `Er`
//! symmetric and `Ei` antisymmetric (`H = Er + i·Ei`). The complex case uses
//! the same polynomial formulas over Gaussian rationals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{Matrix, Span};
use crate::scalar::{Field, G, Q};

#[derive(Debug, Error)]
pub enum CartanError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("no ordinary flag found after {0} attempts")]
    NoOrdinaryFlag(usize),
}

/// Which real form of `𝓗` is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CartanCase {
    /// `ε = −1` with `H₀ = I_{p,q,p,q}`, or `ε = +1` with `H₀ = diag(I, −I)`.
    Real { epsilon: i32, p: usize },
    /// Everything complexified.
    Complex,
}

/// `T_{H₀}𝓗_ε` with its base point.
#[derive(Clone)]
pub struct TangentModel<F> {
    pub delta: usize,
    pub case: CartanCase,
    pub h0: Matrix<F>,
    pub omega: Matrix<F>,
    /// Basis of `W_ε` as pairs `(Er, Ei)`.
    pub basis: Vec<(Matrix<F>, Matrix<F>)>,
}

impl<F: Field> TangentModel<F> {
    pub fn new(delta: usize, case: CartanCase) -> Self {
        let n2 = 2 * delta;
        let id = Matrix::<F>::identity(delta);
        let z = Matrix::<F>::zeros(delta, delta);
        let omega = Matrix::blocks(&[&[&z, &id], &[&id.neg(), &z]]);
        let (eps, p) = match case {
            CartanCase::Real { epsilon, p } => (epsilon, p),
            CartanCase::Complex => (-1, delta),
        };
        let h0 = if eps < 0 {
            let s: Vec<F> = (0..delta).map(|i| if i < p { F::one() } else { -F::one() }).collect();
            let s = Matrix::diag(&s);
            Matrix::block_diag(&[&s, &s])
        } else {
            Matrix::block_diag(&[&id, &id.neg()])
        };
        // symmetric slots then antisymmetric slots
        let mut cands = Vec::new();
        for j in 0..n2 {
            for l in j..n2 {
                let mut a = Matrix::zeros(n2, n2);
                a[(j, l)] = F::one();
                a[(l, j)] = F::one();
                cands.push((a, Matrix::zeros(n2, n2)));
            }
        }
        for j in 0..n2 {
            for l in j + 1..n2 {
                let mut b = Matrix::zeros(n2, n2);
                b[(j, l)] = F::one();
                b[(l, j)] = -F::one();
                cands.push((Matrix::zeros(n2, n2), b));
            }
        }
        let lin = |(er, ei): &(Matrix<F>, Matrix<F>)| -> Vec<F> {
            // linearization of H̄Ω₀H + εΩ₀ at the real H₀
            let p = h0.mul(&omega).mul(er).add(&er.mul(&omega).mul(&h0));
            let q = h0.mul(&omega).mul(ei).sub(&ei.mul(&omega).mul(&h0));
            let mut v = p.flatten();
            v.extend(q.flatten());
            v
        };
        let cols: Vec<Vec<F>> = cands.iter().map(lin).collect();
        let m = Matrix::from_fn(cols[0].len(), cols.len(), |r, c| cols[c][r].clone());
        let basis = m
            .nullspace()
            .iter()
            .map(|v| {
                let mut a = Matrix::zeros(n2, n2);
                let mut b = Matrix::zeros(n2, n2);
                for (c, (x, y)) in v.iter().zip(&cands) {
                    if !c.is_zero() {
                        a = a.add(&x.scale(c));
                        b = b.add(&y.scale(c));
                    }
                }
                (a, b)
            })
            .collect();
        TangentModel { delta, case, h0, omega, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `Im(ᵗX T Ȳ)` for real vectors `X = (α, β)`, `Y`, and `T = (Er, Ei)`.
    fn s(&self, x: &[F], t: &(Matrix<F>, Matrix<F>), y: &[F]) -> F {
        let n2 = 2 * self.delta;
        let (xa, xb) = x.split_at(n2);
        let (ya, yb) = y.split_at(n2);
        let (er, ei) = t;
        bil(xa, ei, ya) - &bil(xa, er, yb) + &bil(xb, er, ya) + &bil(xb, ei, yb)
    }

    /// Number of unknowns of `H⁽¹⁾ ∈ (ℝ^{4δ})* ⊗ W`.
    pub fn unknowns(&self) -> usize {
        4 * self.delta * self.dim()
    }

    /// `H⁽¹⁾ ↦ λ_{H⁽¹⁾}(u, v, w)` as a row over the unknowns
    /// `(direction a, basis index c)`, with
    /// `λ(u,v,w) = Im(ᵗu H⁽¹⁾(v) w̄ + ᵗv H⁽¹⁾(w) ū + ᵗw H⁽¹⁾(u) v̄)`.
    pub fn lambda_row(&self, u: &[F], v: &[F], w: &[F]) -> Vec<F> {
        let nw = self.dim();
        let mut row = vec![F::zero(); self.unknowns()];
        for (first, mid, last) in [(u, v, w), (v, w, u), (w, u, v)] {
            for (a, ma) in mid.iter().enumerate() {
                if ma.is_zero() {
                    continue;
                }
                for (c, t) in self.basis.iter().enumerate() {
                    let val = self.s(first, t, last);
                    row[a * nw + c] += &(val * ma);
                }
            }
        }
        row
    }

    /// Polar condition `λ((0, T), e_i, e_j) = 0` as a row over `W`.
    fn polar_row(&self, ei: &[F], ej: &[F]) -> Vec<F> {
        self.basis.iter().map(|t| self.s(ej, t, ei)).collect()
    }
}

fn bil<F: Field>(x: &[F], m: &Matrix<F>, y: &[F]) -> F {
    let mut s = F::zero();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            if !yj.is_zero() && !m[(i, j)].is_zero() {
                s += &(xi.clone() * &m[(i, j)] * yj);
            }
        }
    }
    s
}

fn unit<F: Field>(n: usize, i: usize) -> Vec<F> {
    (0..n).map(|j| if i == j { F::one() } else { F::zero() }).collect()
}

/// The flag printed with the test: `e_j = ∂x_j`,
/// `e_{δ+j} = ∂x_{δ+j} + ((j−1)/δ)∂y_{δ+j}`, `e_{2δ+j} = ∂y_j`.
pub fn printed_flag(delta: usize) -> Vec<Vec<Q>> {
    let n2 = 2 * delta;
    let mut e: Vec<Vec<Q>> = (0..delta).map(|j| unit(2 * n2, j)).collect();
    for j in 1..=delta {
        let mut v = unit(2 * n2, delta + j - 1);
        v[n2 + delta + j - 1] = Q::new(j as i64 - 1, delta as i64);
        e.push(v);
    }
    for j in 0..n2 {
        e.push(unit(2 * n2, n2 + j));
    }
    e
}

/// Characters `s_k = codim_{H(E_{k−1})} H(E_k)` along a horizontal flag.
pub fn polar_characters<F: Field>(model: &TangentModel<F>, flag: &[Vec<Q>]) -> Vec<usize> {
    let flag: Vec<Vec<F>> = flag.iter().map(|v| v.iter().map(|x| F::from_q(x.clone())).collect()).collect();
    let mut span = Span::<F>::new(model.dim());
    let mut ranks = vec![0usize];
    for k in 1..=flag.len() {
        for i in 0..k - 1 {
            span.insert(&model.polar_row(&flag[i], &flag[k - 1]));
        }
        ranks.push(span.len());
    }
    (1..ranks.len()).map(|k| ranks[k] - ranks[k - 1]).collect()
}

/// `dim V_{4δ}(I)`: nullity of all conditions `λ_{H⁽¹⁾}(e_a, e_b, e_c) = 0`.
pub fn integral_variety_dim<F: Field>(model: &TangentModel<F>) -> usize {
    let n = 4 * model.delta;
    let basis: Vec<Vec<F>> = (0..n).map(|i| unit(n, i)).collect();
    let mut span = Span::<F>::new(model.unknowns());
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                span.insert(&model.lambda_row(&basis[a], &basis[b], &basis[c]));
            }
        }
    }
    model.unknowns() - span.len()
}

/// Outcome of checking the redundancy relations among the conditions.
#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    /// Number of (unordered triple, relation type) instances checked.
    pub instances: usize,
    /// Every relation vanishes identically in `H⁽¹⁾`.
    pub all_hold: bool,
    /// Rank of the relations as formal combinations of the conditions.
    pub relation_rank: usize,
    /// Rank of the conditions with no `x, x'` pair. Relations of the second
    /// and fourth families can involve pairs, so this is not bounded by the
    /// relation count alone.
    pub rank_a: usize,
    /// Rank of all conditions (at most `4C³_{2δ+1}`).
    pub rank_ab: usize,
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Checks the four relation families linking conditions on triples
/// `(J^α u_i, J^β u_j, J^γ u_k)` and their duals `u' = ∂x_{δ+i}`.
pub fn check_relations<F: Field>(model: &TangentModel<F>) -> RelationReport {
    let delta = model.delta;
    let n = 4 * delta;
    let n2 = 2 * delta;
    let (eps, p) = match model.case {
        CartanCase::Real { epsilon, p } => (epsilon, p),
        CartanCase::Complex => (-1, delta),
    };
    let j_of = |v: &[F]| -> Vec<F> {
        // J(α, β) = (−β, α)
        let mut out: Vec<F> = v[n2..].iter().map(|x| -x.clone()).collect();
        out.extend(v[..n2].iter().cloned());
        out
    };
    let jpow = |v: Vec<F>, a: usize| if a == 1 { j_of(&v) } else { v };
    // formal symbols: unordered triples of real basis directions with sign
    let sym_index = |a: usize, b: usize, c: usize| -> Option<(usize, i64)> {
        let mut t = [a, b, c];
        let mut sign = 1;
        for i in 0..3 {
            for j in 0..2 - i {
                if t[j] > t[j + 1] {
                    t.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if t[0] == t[1] || t[1] == t[2] {
            return None;
        }
        let idx = (t[0] * n + t[1]) * n + t[2];
        Some((idx, sign))
    };
    // a relation term λ(x, y, z) with x, y, z = ± basis directions
    let dir = |v: &[F]| -> (usize, F) {
        let i = v.iter().position(|x| !x.is_zero()).expect("nonzero vector");
        (i, v[i].clone())
    };
    let ueps = F::from_i64(eps as i64);
    let mut all_hold = true;
    let mut instances = 0;
    let mut rel_span = Span::<F>::new(n * n * n);
    let mut seen = std::collections::BTreeSet::new();
    let chi = |i: usize| if i < p { 1 } else { 0 };
    for i in 0..delta {
        for j in i..delta {
            for k in j..delta {
                for (al, be, ga) in (0..8).map(|m| (m & 1, (m >> 1) & 1, (m >> 2) & 1)) {
                    let trip = [(i, al), (j, be), (k, ga)];
                    if trip[0] == trip[1] || trip[1] == trip[2] || trip[0] == trip[2] {
                        continue;
                    }
                    let mut key = trip.to_vec();
                    key.sort();
                    if !seen.insert(key) {
                        continue;
                    }
                    let sgn = |e: i64| if e.rem_euclid(2) == 0 { F::one() } else { -F::one() };
                    let (e1, e2, e3) = if eps == 1 {
                        (sgn(ga as i64 - be as i64), sgn(al as i64 - ga as i64), sgn(be as i64 - al as i64))
                    } else {
                        (
                            sgn(ga as i64 - be as i64 + chi(k) + chi(j)),
                            sgn(al as i64 - ga as i64 + chi(i) + chi(k)),
                            sgn(be as i64 - al as i64 + chi(j) + chi(i)),
                        )
                    };
                    let u = jpow(unit(n, i), al);
                    let v = jpow(unit(n, j), be);
                    let w = jpow(unit(n, k), ga);
                    let up = jpow(unit(n, delta + i), al);
                    let vp = jpow(unit(n, delta + j), be);
                    let wp = jpow(unit(n, delta + k), ga);
                    let (ju, jv, jw) = (j_of(&up), j_of(&vp), j_of(&wp));
                    type Term<'a, F> = (F, [&'a [F]; 3]);
                    let rels: [Vec<Term<F>>; 4] = [
                        vec![
                            (e1.clone(), [&up, &v, &w]),
                            (e2.clone(), [&u, &vp, &w]),
                            (e3.clone(), [&u, &v, &wp]),
                            (ueps.clone(), [&up, &vp, &wp]),
                        ],
                        vec![
                            (e1.clone(), [&ju, &v, &w]),
                            (e2.clone(), [&u, &jv, &w]),
                            (e3.clone(), [&u, &v, &jw]),
                            (ueps.clone(), [&ju, &jv, &jw]),
                        ],
                        vec![
                            (e1.clone(), [&u, &vp, &wp]),
                            (e2.clone(), [&up, &v, &wp]),
                            (e3.clone(), [&up, &vp, &w]),
                            (ueps.clone(), [&u, &v, &w]),
                        ],
                        vec![
                            (e1.clone(), [&u, &jv, &jw]),
                            (e2.clone(), [&ju, &v, &jw]),
                            (e3.clone(), [&ju, &jv, &w]),
                            (ueps.clone(), [&u, &v, &w]),
                        ],
                    ];
                    for rel in &rels {
                        instances += 1;
                        let mut value = vec![F::zero(); model.unknowns()];
                        let mut formal = vec![F::zero(); n * n * n];
                        for (c, [x, y, z]) in rel {
                            let row = model.lambda_row(x, y, z);
                            for (a, r) in value.iter_mut().zip(&row) {
                                *a += &(c.clone() * r);
                            }
                            let ((a, ca), (b, cb), (cc, ccc)) = (dir(x), dir(y), dir(z));
                            if let Some((idx, s)) = sym_index(a, b, cc) {
                                formal[idx] += &(c.clone() * &ca * &cb * &ccc * &F::from_i64(s));
                            }
                        }
                        all_hold &= value.iter().all(|x| x.is_zero());
                        rel_span.insert(&formal);
                    }
                }
            }
        }
    }
    // ranks of the condition families
    let basis: Vec<Vec<F>> = (0..n).map(|i| unit(n, i)).collect();
    let base = |a: usize| if a % n2 >= delta { a - delta } else { a };
    let mut span_a = Span::<F>::new(model.unknowns());
    let mut span_ab = Span::<F>::new(model.unknowns());
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let row = model.lambda_row(&basis[a], &basis[b], &basis[c]);
                let (x, y, z) = (base(a), base(b), base(c));
                if x != y && y != z && x != z {
                    span_a.insert(&row);
                }
                span_ab.insert(&row);
            }
        }
    }
    RelationReport { instances, all_hold, relation_rank: rel_span.len(), rank_a: span_a.len(), rank_ab: span_ab.len() }
}

/// Which flag the characters are computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlagKind {
    Printed,
    Generic,
}

/// `s_k = k − 1` for `k ≤ 2δ + 1`, `0` beyond.
pub fn expected_characters(delta: usize) -> Vec<usize> {
    (1..=4 * delta).map(|k| if k <= 2 * delta + 1 { k - 1 } else { 0 }).collect()
}

/// `2·C(2δ+2, 3)`.
pub fn expected_variety_dim(delta: usize) -> usize {
    2 * binom(2 * delta + 2, 3)
}

/// Small-integer horizontal flag, drawn from a fixed seed until its
/// characters are those of an ordinary flag with `Σ k s_k = dim V`.
pub fn generic_flag<F: Field>(model: &TangentModel<F>, dim_v: usize, seed: u64, attempts: usize) -> Result<(Vec<Vec<Q>>, u64), CartanError> {
    let n = 4 * model.delta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let draw = rng.gen::<u64>();
        let mut r = ChaCha8Rng::seed_from_u64(draw);
        let flag: Vec<Vec<Q>> = (0..n).map(|_| (0..n).map(|_| Q::int(r.gen_range(-2..=2))).collect()).collect();
        if Matrix::from_rows(flag.clone()).rank() < n {
            continue;
        }
        let s = polar_characters(model, &flag);
        if weighted_sum(&s) == dim_v {
            return Ok((flag, draw));
        }
    }
    Err(CartanError::NoOrdinaryFlag(attempts))
}

fn weighted_sum(s: &[usize]) -> usize {
    s.iter().enumerate().map(|(k, x)| (k + 1) * x).sum()
}

/// Result of Cartan's test on one case.
#[derive(Clone, Debug, Serialize)]
pub struct FlagReport {
    pub delta: usize,
    pub case: CartanCase,
    /// Dimension of `W_ε` (complex dimension in the complex case).
    pub dim_w: usize,
    pub unknowns: usize,
    pub flag_kind: FlagKind,
    pub flag: Vec<Vec<Q>>,
    /// Seed that produced the generic flag.
    pub flag_seed: Option<u64>,
    pub characters: Vec<usize>,
    pub sum_k_sk: usize,
    pub dim_v: usize,
    pub expected_dim_v: usize,
    /// `Σ k s_k = dim V`.
    pub ordinary: bool,
    pub characters_match: bool,
    /// `(k, s_k)` for the last nonzero character.
    pub last_nonzero: Option<(usize, usize)>,
    pub printed_characters: Vec<usize>,
    pub printed_ordinary: bool,
    pub relations: RelationReport,
}

impl FlagReport {
    pub fn passed(&self) -> bool {
        self.ordinary && self.characters_match && self.dim_v == self.expected_dim_v && self.relations.all_hold
    }
}

/// Runs the full test with a generic flag (the printed flag's characters are
/// reported alongside). `δ ≤ max_delta`.
pub fn cartan_test(delta: usize, case: CartanCase, max_delta: usize) -> Result<FlagReport, CartanError> {
    if delta == 0 || delta > max_delta {
        return Err(CartanError::Usage(format!("δ must be in 1..={max_delta}, got {delta}")));
    }
    if let CartanCase::Real { epsilon, p } = case {
        if epsilon != 1 && epsilon != -1 {
            return Err(CartanError::Usage("ε must be −1 or +1".into()));
        }
        if p > delta {
            return Err(CartanError::Usage(format!("p = {p} exceeds δ = {delta}")));
        }
    }
    match case {
        CartanCase::Complex => run::<G>(delta, case),
        CartanCase::Real { .. } => run::<Q>(delta, case),
    }
}

fn run<F: Field>(delta: usize, case: CartanCase) -> Result<FlagReport, CartanError> {
    let model = TangentModel::<F>::new(delta, case);
    let dim_v = integral_variety_dim(&model);
    let printed = printed_flag(delta);
    let printed_characters = polar_characters(&model, &printed);
    let printed_ordinary = weighted_sum(&printed_characters) == dim_v;
    let (flag, flag_seed) = if printed_ordinary {
        (printed, None)
    } else {
        let (f, s) = generic_flag(&model, dim_v, 0, 200)?;
        (f, Some(s))
    };
    let characters = polar_characters(&model, &flag);
    let sum_k_sk = weighted_sum(&characters);
    let last_nonzero = characters.iter().enumerate().rev().find(|(_, s)| **s > 0).map(|(k, s)| (k + 1, *s));
    Ok(FlagReport {
        delta,
        case,
        dim_w: model.dim(),
        unknowns: model.unknowns(),
        flag_kind: if flag_seed.is_some() { FlagKind::Generic } else { FlagKind::Printed },
        flag,
        flag_seed,
        characters_match: characters == expected_characters(delta),
        characters,
        sum_k_sk,
        dim_v,
        expected_dim_v: expected_variety_dim(delta),
        ordinary: sum_k_sk == dim_v,
        last_nonzero,
        printed_characters,
        printed_ordinary,
        relations: check_relations(&model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_dimension() {
        for delta in 1..=3 {
            let m = TangentModel::<Q>::new(delta, CartanCase::Real { epsilon: -1, p: delta });
            assert_eq!(m.dim(), 2 * delta * delta + delta);
            let m = TangentModel::<Q>::new(delta, CartanCase::Real { epsilon: 1, p: delta });
            assert_eq!(m.dim(), 2 * delta * delta + delta);
        }
    }

    #[test]
    fn printed_flag_entries() {
        let e = printed_flag(2);
        assert_eq!(e[3][4 + 3], Q::new(1, 2));
        assert_eq!(e[2][4 + 2], Q::zero());
        assert_eq!(e[4], unit::<Q>(8, 4));
        let e1 = printed_flag(1);
        assert_eq!(e1[1], unit::<Q>(4, 1));
    }

    #[test]
    fn delta_one_is_ordinary_on_printed_flag() {
        for case in [CartanCase::Real { epsilon: -1, p: 1 }, CartanCase::Real { epsilon: 1, p: 1 }, CartanCase::Complex] {
            let r = cartan_test(1, case, 3).unwrap();
            assert_eq!(r.flag_kind, FlagKind::Printed);
            assert_eq!(r.characters, vec![0, 1, 2, 0]);
            assert_eq!(r.dim_v, 8);
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.last_nonzero, Some((3, 2)));
        }
    }

    #[test]
    fn para_case_delta_two() {
        let r = cartan_test(2, CartanCase::Real { epsilon: 1, p: 2 }, 3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.dim_v, 40);
        assert_eq!(r.last_nonzero, Some((5, 4)));
    }

    #[test]
    fn delta_two_needs_generic_flag() {
        let r = cartan_test(2, CartanCase::Real { epsilon: -1, p: 1 }, 3).unwrap();
        assert_eq!(r.printed_characters, vec![0, 1, 2, 3, 2, 2, 0, 0]);
        assert!(!r.printed_ordinary);
        assert_eq!(r.dim_v, 40);
        assert_eq!(r.characters, expected_characters(2));
        assert!(r.passed());
        assert_eq!(r.relations.relation_rank, 4 * binom(4, 3));
        assert_eq!(r.relations.rank_ab, 4 * binom(5, 3));
    }
}
