//! Identity checks on a classified germ: pseudo-commutation of parallel
//! endomorphisms with the curvature, Ricci identities, Ricci-flatness and the
//! Ricci-operator dichotomy. Also two independent Ricci oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{covariant_defect_02, curvature_of, ricci_jets, CurvatureAtOrigin, GeometryError};
use crate::germ::MetricGerm;
use crate::holonomy::MatrixAlgebraWithInvolution;
use crate::jet::{Jet, JetMatrix};
use crate::matrix::{combine, Matrix, QMat, Span};
use crate::poly::minimal_polynomial;
use crate::scalar::{Field, G, Q};
use crate::structures::StructureSet;

/// One identity check; `witness` describes the first failure.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    /// Number of instances checked.
    pub instances: usize,
    pub witness: Option<String>,
}

impl CheckResult {
    fn new(name: &str) -> Self {
        CheckResult { name: name.into(), passed: true, skipped: false, instances: 0, witness: None }
    }

    fn skip(name: &str, why: &str) -> Self {
        CheckResult { name: name.into(), passed: true, skipped: true, instances: 0, witness: Some(why.into()) }
    }

    /// A check whose premise does not apply to this germ; counts as passed.
    fn not_applicable(name: &str, why: &str) -> Self {
        CheckResult { name: name.into(), passed: true, skipped: false, instances: 0, witness: Some(why.into()) }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok && self.passed {
            self.passed = false;
            self.witness = Some(witness());
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn any_skipped(&self) -> bool {
        self.checks.iter().any(|c| c.skipped)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Everything the checks need about a classified germ.
pub struct VerifyInput<'a> {
    pub germ: &'a MetricGerm,
    pub curv: &'a CurvatureAtOrigin<Q>,
    pub e: &'a MatrixAlgebraWithInvolution,
    pub e0: &'a [Vec<Q>],
    pub radical: &'a [QMat],
    pub structures: &'a StructureSet,
    /// Whether the germ is of type (3), (3′) or (3ℂ).
    pub expect_ricci_flat: bool,
}

fn random_element(basis: &[QMat], d: usize, rng: &mut ChaCha8Rng) -> QMat {
    if basis.is_empty() {
        return Matrix::zeros(d, d);
    }
    let c: Vec<Q> = basis.iter().map(|_| Q::int(rng.gen_range(-3..=3))).collect();
    combine(&c, basis)
}

fn fmt(m: &QMat) -> String {
    format!("{m:?}")
}

/// `R(x, y)(UV − VU) = 0` on all basis pairs, `Im(UV − VU) ⊂ E₀`, and
/// `UV = VU` when `E₀ = 0`, for `U ∈ 𝔢⁺` and `V ∈ 𝔢` (basis elements,
/// structures and random samples).
pub fn check_pseudocommutation(
    curv: &CurvatureAtOrigin<Q>,
    e: &MatrixAlgebraWithInvolution,
    e0: &[Vec<Q>],
    us: &[QMat],
    vs: &[QMat],
) -> Vec<CheckResult> {
    let d = e.d;
    let mut rr = CheckResult::new("pseudocommutation");
    let mut im = CheckResult::new("commutator_image_in_e0");
    let mut comm = CheckResult::new("commute_when_e0_trivial");
    let e0span = {
        let mut s = Span::<Q>::new(d);
        for v in e0 {
            s.insert(v);
        }
        s
    };
    let rs: Vec<&QMat> = curv.levels[0].iter().filter(|m| !m.is_zero()).collect();
    for u in us {
        for v in vs {
            let c = u.mul(v).sub(&v.mul(u));
            for r in &rs {
                rr.record(r.mul(&c).is_zero(), || format!("R·[U,V] ≠ 0 for U={}, V={}", fmt(u), fmt(v)));
            }
            let cols_ok = (0..d).all(|j| e0span.contains(&c.col(j)));
            im.record(cols_ok, || format!("Im [U,V] ⊄ E₀ for U={}, V={}", fmt(u), fmt(v)));
            if e0.is_empty() {
                comm.record(c.is_zero(), || format!("UV ≠ VU for U={}, V={}", fmt(u), fmt(v)));
            }
        }
    }
    if !e0.is_empty() {
        comm = CheckResult::not_applicable("commute_when_e0_trivial", "E₀ ≠ 0");
    }
    vec![rr, im, comm]
}

/// `tr(U(R(a,·)b))` as a matrix indexed `(a, b)`.
fn trace_u_r_dot(curv: &CurvatureAtOrigin<Q>, u: &QMat) -> QMat {
    let d = curv.d;
    Matrix::from_fn(d, d, |a, b| {
        let mut s = Q::zero();
        for v in 0..d {
            let r = curv.r(a, v);
            for c in 0..d {
                if !u[(v, c)].is_zero() && !r[(c, b)].is_zero() {
                    s += &(u[(v, c)].clone() * &r[(c, b)]);
                }
            }
        }
        s
    })
}

/// The map `v ↦ R(a, v)b` as a matrix.
fn r_dot(curv: &CurvatureAtOrigin<Q>, a: usize, b: usize) -> QMat {
    let d = curv.d;
    Matrix::from_fn(d, d, |c, v| curv.r(a, v)[(c, b)].clone())
}

fn is_nilpotent(u: &QMat) -> bool {
    u.pow(u.rows as u32).is_zero()
}

/// Self-adjoint `U`: `ric(a, Ub) = ric(Ua, b) = tr(U(R(a,·)b))`, `U`
/// commutes with `R(a,·)b`, and `Im U ⊂ ker ric` when `U ≠ 0` is nilpotent.
pub fn check_ricci_selfadjoint(curv: &CurvatureAtOrigin<Q>, ric: &QMat, u: &QMat, out: &mut [CheckResult; 3]) {
    let d = curv.d;
    let a = ric.mul(u);
    let b = u.transpose().mul(ric);
    let t = trace_u_r_dot(curv, u);
    out[0].record(a == b && a == t, || format!("ric(·,U·), ric(U·,·), tr(U R(·,·)·) differ for U={}", fmt(u)));
    let mut commute = true;
    for x in 0..d {
        for y in 0..d {
            let m = r_dot(curv, x, y);
            commute &= u.mul(&m) == m.mul(u);
        }
    }
    out[1].record(commute, || format!("U does not commute with R(a,·)b for U={}", fmt(u)));
    if !u.is_zero() && is_nilpotent(u) {
        out[2].record(ric.mul(u).is_zero() && ric.det().is_zero(), || format!("Im N ⊄ ker ric for N={}", fmt(u)));
    }
}

/// Skew-adjoint `U`: `ric(a, Ub) = −ric(Ua, b) = ½ tr(U∘R(a, b))`, and
/// `Im U ⊂ ker ric` when `U ≠ 0` is nilpotent.
pub fn check_ricci_skewadjoint(curv: &CurvatureAtOrigin<Q>, ric: &QMat, u: &QMat, out: &mut [CheckResult; 2]) {
    let d = curv.d;
    let a = ric.mul(u);
    let b = u.transpose().mul(ric).neg();
    let half = Q::new(1, 2);
    let t = Matrix::from_fn(d, d, |x, y| u.mul(curv.r(x, y)).trace() * &half);
    out[0].record(a == b && a == t, || format!("ric(·,U·), −ric(U·,·), ½tr(U R) differ for U={}", fmt(u)));
    if !u.is_zero() && is_nilpotent(u) {
        out[1].record(ric.mul(u).is_zero(), || format!("Im N ⊄ ker ric for skew N={}", fmt(u)));
    }
}

/// Two skew-adjoint `U, V`: `Im(UV − VU) ⊂ ker ric`, and `ric = 0` when they
/// are invertible and anticommute.
pub fn check_ricci_pair(ric: &QMat, u: &QMat, v: &QMat, out: &mut [CheckResult; 2]) {
    let c = u.mul(v).sub(&v.mul(u));
    out[0].record(ric.mul(&c).is_zero(), || format!("Im [U,V] ⊄ ker ric for U={}, V={}", fmt(u), fmt(v)));
    let anti = u.mul(v).add(&v.mul(u)).is_zero();
    if anti && !u.det().is_zero() && !v.det().is_zero() {
        out[1].record(ric.is_zero(), || format!("ric ≠ 0 although U={} and V={} anticommute", fmt(u), fmt(v)));
    }
}

/// Holomorphic Ricci of `g_C` against the real Ricci of `Re g_C` computed
/// directly in real coordinates: `2·ric_C(e_j, e_k) = ric(∂x_j, ∂x_k) −
/// i·ric(∂x_j, J̲∂x_k)` (the factor 2 comes from taking the real trace of a
/// complex-linear map).
pub fn check_complex_ricci(germ: &MetricGerm) -> Result<CheckResult, GeometryError> {
    let Some(gc) = &germ.complex else {
        return Ok(CheckResult::not_applicable("complex_ricci", "not a complex germ"));
    };
    let mut res = CheckResult::new("complex_ricci");
    let n = gc.len();
    let ric_c = curvature_of(gc, 0)?.ricci();
    let ric = curvature_of(&germ.g, 0)?.ricci();
    let jbar = germ.jbar().expect("complex germ");
    let ric_j = ric.mul(&jbar);
    let two = G::from_i64(2);
    for j in 0..n {
        for k in 0..n {
            let lhs = ric_c[(j, k)].clone() * &two;
            let rhs = G::new(ric[(j, k)].clone(), -ric_j[(j, k)].clone());
            res.record(lhs == rhs, || format!("entry ({j},{k}): 2 ric_C = {lhs}, ric − i ric(·,J̲·) = {rhs}"));
        }
    }
    Ok(res)
}

/// `Ric = g⁻¹ ric` is semi-simple or 2-step nilpotent when `ric` is parallel.
/// Skipped when `∇ric` does not vanish to the available order.
pub fn check_ricci_operator(germ: &MetricGerm) -> Result<CheckResult, GeometryError> {
    let name = "ricci_operator";
    if germ.order() < 3 {
        return Ok(CheckResult::skip(name, "jet order too low to test ∇ric"));
    }
    let g = &germ.g;
    let ric_j = ricci_jets(g)?;
    if covariant_defect_02(g, &ric_j)?.is_some() {
        return Ok(CheckResult::skip(name, "∇ric ≠ 0: hypothesis not met"));
    }
    let ric = Matrix::from_fn(germ.d, germ.d, |i, j| ric_j[i][j].at_zero());
    let op = germ.g0().inverse().expect("nondegenerate").mul(&ric);
    let mut res = CheckResult::new(name);
    let sf = minimal_polynomial(&op).squarefree_part();
    let irreducible = sf.irreducible_over_reals() || op.is_zero();
    let ok = irreducible && (!op.det().is_zero() || op.mul(&op).is_zero());
    res.record(ok, || format!("Ric = {} is neither semi-simple nor 2-step nilpotent", fmt(&op)));
    Ok(res)
}

/// Runs every check with `samples` random elements in addition to bases and
/// lifted structures.
pub fn verify(input: &VerifyInput, seed: u64, samples: usize) -> Result<VerificationReport, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = input.e;
    let d = e.d;
    let plus = e.self_adjoint_part();
    let minus = e.skew_adjoint_part();
    let named: Vec<QMat> = input.structures.named().into_iter().map(|(_, m, _)| m.clone()).collect();
    let mut us: Vec<QMat> = plus.clone();
    let mut vs: Vec<QMat> = e.basis.clone();
    vs.extend(named.iter().cloned());
    for _ in 0..samples {
        us.push(random_element(&plus, d, &mut rng));
        vs.push(random_element(&e.basis, d, &mut rng));
    }
    us.extend(named.iter().filter(|m| e.adjoint(m) == **m).cloned());
    let mut checks = check_pseudocommutation(input.curv, e, input.e0, &us, &vs);

    let ric = input.curv.ricci();
    let mut sa = [CheckResult::new("ricci_selfadjoint"), CheckResult::new("selfadjoint_commutes_with_r"), CheckResult::new("ricci_nilpotent_selfadjoint")];
    let half = Q::new(1, 2);
    let mut sa_list = us.clone();
    for n in input.radical {
        sa_list.push(n.add(&e.adjoint(n)).scale(&half));
    }
    for u in &sa_list {
        check_ricci_selfadjoint(input.curv, &ric, u, &mut sa);
    }
    let mut sk = [CheckResult::new("ricci_skewadjoint"), CheckResult::new("ricci_nilpotent_skewadjoint")];
    let mut sk_list = minus.clone();
    sk_list.extend(named.iter().filter(|m| e.adjoint(m) == m.neg()).cloned());
    for _ in 0..samples {
        sk_list.push(random_element(&minus, d, &mut rng));
    }
    for n in input.radical {
        sk_list.push(n.sub(&e.adjoint(n)).scale(&half));
    }
    for u in &sk_list {
        check_ricci_skewadjoint(input.curv, &ric, u, &mut sk);
    }
    let mut pair = [CheckResult::new("ricci_skew_commutator"), CheckResult::new("ricci_flat_from_anticommuting")];
    for u in &sk_list {
        for v in &sk_list {
            check_ricci_pair(&ric, u, v, &mut pair);
        }
    }
    checks.extend(sa);
    checks.extend(sk);
    checks.extend(pair);
    let mut flat = CheckResult::new("ricci_flat");
    if input.expect_ricci_flat {
        flat.record(ric.is_zero(), || format!("ric = {}", fmt(&ric)));
    } else {
        flat = CheckResult::not_applicable("ricci_flat", "not expected for this type");
    }
    checks.push(flat);
    checks.push(check_complex_ricci(input.germ)?);
    checks.push(check_ricci_operator(input.germ)?);
    Ok(VerificationReport { seed, samples, checks })
}

/// Closed-form curvature of `g = diag(E, G)` in dimension 2:
/// `R(∂x, ∂y)` at the origin from the Gauss curvature of an orthogonal metric.
pub fn curvature_2d_oracle(e: &Jet<Q>, g: &Jet<Q>) -> QMat {
    let c = |j: &Jet<Q>, ex: &[u32]| {
        let f: i64 = ex.iter().map(|&a| (1..=a as i64).product::<i64>()).product();
        j.coeff(ex) * &Q::int(f)
    };
    let (e0, g0) = (c(e, &[0, 0]), c(g, &[0, 0]));
    let (ex, ey, eyy) = (c(e, &[1, 0]), c(e, &[0, 1]), c(e, &[0, 2]));
    let (gx, gy, gxx) = (c(g, &[1, 0]), c(g, &[0, 1]), c(g, &[2, 0]));
    let w = e0.clone() * &g0;
    // K = −(G_xx + E_yy)/(2EG) + [G_x(E_x G + E G_x) + E_y(E_y G + E G_y)]/(4E²G²)
    let k = -(gxx + &eyy) / &(Q::int(2) * &w)
        + &((gx.clone() * &(ex * &g0 + &(e0.clone() * &gx)) + &(ey.clone() * &(ey * &g0 + &(e0.clone() * &gy))))
            / &(Q::int(4) * &w * &w));
    // R(∂x,∂y)∂y = K G ∂x,  R(∂x,∂y)∂x = −K E ∂y
    let mut r = Matrix::zeros(2, 2);
    r[(0, 1)] = k.clone() * &g0;
    r[(1, 0)] = -(k * &e0);
    r
}

/// Ricci at the origin by direct double contraction of
/// `R^a_{bij} = ∂_iΓ^a_{jb} − ∂_jΓ^a_{ib} + Γ^a_{ic}Γ^c_{jb} − Γ^a_{jc}Γ^c_{ib}`,
/// with `Γ` and `∂Γ` computed from the first and second derivatives of `g`
/// at the origin by plain matrix algebra.
pub fn ricci_double_contraction(g: &JetMatrix<Q>) -> QMat {
    let d = g.len();
    let fact = |ex: &[u32]| -> Q { Q::int(ex.iter().map(|&a| (1..=a as i64).product::<i64>()).product()) };
    let unit2 = |i: usize, j: usize| {
        let mut v = vec![0u32; d];
        v[i] += 1;
        v[j] += 1;
        v
    };
    let unit1 = |i: usize| {
        let mut v = vec![0u32; d];
        v[i] = 1;
        v
    };
    let g0 = Matrix::from_fn(d, d, |i, j| g[i][j].at_zero());
    let gi = g0.inverse().expect("nondegenerate");
    // dg[k][(i,j)] = ∂_k g_ij ; ddg[k][l][(i,j)] = ∂_k∂_l g_ij
    let dg: Vec<QMat> = (0..d).map(|k| Matrix::from_fn(d, d, |i, j| g[i][j].coeff(&unit1(k)))).collect();
    let ddg: Vec<Vec<QMat>> = (0..d)
        .map(|k| {
            (0..d)
                .map(|l| {
                    let ex = unit2(k, l);
                    let f = fact(&ex);
                    Matrix::from_fn(d, d, |i, j| g[i][j].coeff(&ex) * &f)
                })
                .collect()
        })
        .collect();
    // lower Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij) and its derivative
    let half = Q::new(1, 2);
    let low = |i: usize, j: usize, l: usize| (dg[i][(j, l)].clone() + &dg[j][(i, l)] - &dg[l][(i, j)]) * &half;
    let dlow = |k: usize, i: usize, j: usize, l: usize| {
        (ddg[k][i][(j, l)].clone() + &ddg[k][j][(i, l)] - &ddg[k][l][(i, j)]) * &half
    };
    let gamma = |a: usize, i: usize, j: usize| -> Q {
        let mut s = Q::zero();
        for l in 0..d {
            s += &(gi[(a, l)].clone() * &low(i, j, l));
        }
        s
    };
    // ∂_k g^{al} = −(g⁻¹ ∂_k g g⁻¹)_{al}
    let dgi: Vec<QMat> = (0..d).map(|k| gi.mul(&dg[k]).mul(&gi).neg()).collect();
    let dgamma = |k: usize, a: usize, i: usize, j: usize| -> Q {
        let mut s = Q::zero();
        for l in 0..d {
            s += &(dgi[k][(a, l)].clone() * &low(i, j, l));
            s += &(gi[(a, l)].clone() * &dlow(k, i, j, l));
        }
        s
    };
    let gam: Vec<Vec<Vec<Q>>> = (0..d).map(|a| (0..d).map(|i| (0..d).map(|j| gamma(a, i, j)).collect()).collect()).collect();
    Matrix::from_fn(d, d, |b, j| {
        // ric_{bj} = R^a_{b a j}... with ric(x, y) = tr(v ↦ R(x, v)y): ric_{ij} = R^a_{j i a}
        let (x, y) = (b, j);
        let mut s = Q::zero();
        for a in 0..d {
            // R^a_{y x a} = ∂_xΓ^a_{a y} − ∂_aΓ^a_{x y} + Γ^a_{x c}Γ^c_{a y} − Γ^a_{a c}Γ^c_{x y}
            s += &dgamma(x, a, a, y);
            s -= &dgamma(a, a, x, y);
            for c in 0..d {
                s += &(gam[a][x][c].clone() * &gam[c][a][y]);
                s -= &(gam[a][a][c].clone() * &gam[c][x][y]);
            }
        }
        s
    })
}
