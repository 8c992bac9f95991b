//! Metric germs realizing each type, built from potentials, random
//! perturbations or the ω_H construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use crate::endo::TypeLabel;
use crate::geometry::{constant_field, covariant_defect_11, GeometryError};
use crate::germ::{complex_structure, realify_matrix, GermError, MetricGerm};
use crate::holonomy::MatrixSpan;
use crate::jet::{jm_at_zero, jm_mul, Jet, JetMatrix};
use crate::matrix::{Matrix, QMat};
use crate::scalar::{Field, G, Q};
use crate::structures::{admissible_signature, normal_form, StructureSet};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("degree {degree}: {reason}")]
    Inconsistent { degree: u32, reason: String },
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn invalid(msg: impl Into<String>) -> GenError {
    GenError::Invalid(msg.into())
}

/// Exponent vectors of all monomials of degree `deg` in `nv` variables.
pub fn monomials(nv: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(nv: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == nv - 1 {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=deg).rev() {
            prefix.push(a);
            rec(nv, deg - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nv > 0 {
        rec(nv, deg, &mut Vec::new(), &mut out);
    }
    out
}

fn small(rng: &mut ChaCha8Rng, amplitude: i64) -> i64 {
    if amplitude == 0 {
        0
    } else {
        rng.gen_range(-amplitude..=amplitude)
    }
}

fn small_g(rng: &mut ChaCha8Rng, amplitude: i64) -> G {
    let re = small(rng, amplitude);
    G::new(Q::int(re), Q::int(small(rng, amplitude)))
}

fn jm_zero<F: Field>(rows: usize, cols: usize, nv: usize, k: u32) -> JetMatrix<F> {
    vec![vec![Jet::zero(nv, k); cols]; rows]
}

fn jm_add<F: Field>(a: &JetMatrix<F>, b: &JetMatrix<F>) -> JetMatrix<F> {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.add(y)).collect()).collect()
}

fn jm_neg<F: Field>(a: &JetMatrix<F>) -> JetMatrix<F> {
    a.iter().map(|r| r.iter().map(|x| x.neg()).collect()).collect()
}

fn jm_from_const<F: Field>(m: &Matrix<F>, nv: usize, k: u32) -> JetMatrix<F> {
    constant_field(m, nv, k)
}

/// `[[a, b], [c, d]]` from four equally sized jet matrices.
fn jm_blocks<F: Field>(a: &JetMatrix<F>, b: &JetMatrix<F>, c: &JetMatrix<F>, d: &JetMatrix<F>) -> JetMatrix<F> {
    let mut out: JetMatrix<F> = a.iter().zip(b).map(|(x, y)| x.iter().chain(y).cloned().collect()).collect();
    out.extend(c.iter().zip(d).map(|(x, y)| x.iter().chain(y).cloned().collect()));
    out
}

/// `diag(I_p, −I_q)` perturbed by a random symmetric quadratic form in each
/// entry. `amplitude = 0` gives the flat germ.
pub fn germ_type1(p: usize, q: usize, seed: u64, amplitude: i64, k: u32) -> Result<MetricGerm, GenError> {
    let d = p + q;
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let k = k.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quad = monomials(d, 2);
    let mut g = jm_zero::<Q>(d, d, d, k);
    for i in 0..d {
        for j in i..d {
            let base = if i != j { 0 } else if i < p { 1 } else { -1 };
            let mut e = Jet::constant(d, k, Q::int(base));
            for m in &quad {
                let c = small(&mut rng, amplitude);
                if c != 0 {
                    e = e.add(&Jet::monomial(d, k, m, Q::int(c)));
                }
            }
            g[i][j] = e.clone();
            g[j][i] = e;
        }
    }
    Ok(MetricGerm::real(g)?)
}

/// Cahen–Wallach plane wave `2 du dv + Σ dx_i² + (Σ c_i x_i²) du²` in
/// coordinates `(u, v, x_1, …, x_m)`. `∂_v` is a parallel null vector, so
/// `∂_v ⊗ du` is a parallel nilpotent self-adjoint endomorphism, and the
/// Ricci tensor `−(Σ c_i) du²` is parallel and null.
pub fn germ_plane_wave(coeffs: &[i64], k: u32) -> Result<MetricGerm, GenError> {
    let d = coeffs.len() + 2;
    if coeffs.is_empty() {
        return Err(invalid("a plane wave needs at least one transverse coordinate"));
    }
    let k = k.max(2);
    let mut g = jm_zero::<Q>(d, d, d, k);
    g[0][1] = Jet::one(d, k);
    g[1][0] = Jet::one(d, k);
    for i in 2..d {
        g[i][i] = Jet::one(d, k);
        let mut e = vec![0; d];
        e[i] = 2;
        g[0][0] = g[0][0].add(&Jet::monomial(d, k, &e, Q::int(coeffs[i - 2])));
    }
    Ok(MetricGerm::real(g)?)
}

/// Round metric `(1 + |x|²)^{-2} Σ dx_i²` (constant curvature 4), expanded
/// to order `k`. Einstein with parallel Ricci tensor.
pub fn germ_round_sphere(d: usize, k: u32) -> Result<MetricGerm, GenError> {
    if d < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    let k = k.max(2);
    let r2 = (0..d).fold(Jet::zero(d, k), |acc, i| acc.add(&Jet::var(d, k, i).mul(&Jet::var(d, k, i))));
    let f = Jet::one(d, k).add(&r2);
    let conf = f.mul(&f).invert().map_err(|e| invalid(e.to_string()))?;
    let mut g = jm_zero::<Q>(d, d, d, k);
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = conf.clone();
    }
    Ok(MetricGerm::real(g)?)
}

/// How a potential produces a metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialCase {
    /// `u(x, y)` real; `g(∂z_i, ∂z̄_j) = ∂²u/∂z_i∂z̄_j`, `J` = multiplication by i.
    Kaehler,
    /// `u(x, y)` real; `g(∂x_i, ∂y_j) = ∂²u/∂x_i∂y_j`, x and y null.
    ParaKaehler,
    /// The Kähler formula with a holomorphic `u` (Gaussian coefficients).
    ComplexifiedKaehler,
}

/// A polynomial potential in `2n` variables ordered `(x_1…x_n, y_1…y_n)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub n: usize,
    pub case: PotentialCase,
    pub potential: Jet<G>,
}

/// Germ built from a potential, with its explicit parallel structure at the
/// origin (`J`, `L` or the realified complex `J`).
#[derive(Clone, Debug)]
pub struct PotentialGerm {
    pub germ: MetricGerm,
    pub structure: QMat,
    /// Degree of the first nonzero term of `∇` of the structure, `None` when
    /// it vanishes to the available order.
    pub defect: Option<u32>,
}

/// `u = Σ ±(x_j² + y_j²)` (Kähler cases, `p` plus signs) or `Σ x_j y_j`, plus
/// random cubic and quartic terms with coefficients in `[−amplitude, amplitude]`.
pub fn random_potential(case: PotentialCase, n: usize, p: usize, seed: u64, amplitude: i64) -> PotentialSpec {
    let nv = 2 * n;
    let k = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Jet::<G>::zero(nv, k);
    for j in 0..n {
        let mut e = vec![0u32; nv];
        match case {
            PotentialCase::ParaKaehler => {
                e[j] = 1;
                e[n + j] = 1;
                u = u.add(&Jet::monomial(nv, k, &e, G::one()));
            }
            _ => {
                let s = if j < p { G::one() } else { -G::one() };
                e[j] = 2;
                u = u.add(&Jet::monomial(nv, k, &e, s.clone()));
                e[j] = 0;
                e[n + j] = 2;
                u = u.add(&Jet::monomial(nv, k, &e, s));
            }
        }
    }
    for deg in 3..=4 {
        for m in monomials(nv, deg) {
            let c = match case {
                PotentialCase::ComplexifiedKaehler => small_g(&mut rng, amplitude),
                _ => G::real(Q::int(small(&mut rng, amplitude))),
            };
            if !c.is_zero() {
                u = u.add(&Jet::monomial(nv, k, &m, c));
            }
        }
    }
    PotentialSpec { n, case, potential: u }
}

fn second<F: Field>(u: &Jet<F>, a: usize, b: usize, k: u32) -> Jet<F> {
    u.partial(a).partial(b).extend_polynomial(k)
}

/// Kähler block `[[A, B], [−B, A]]` with `A = ¼(u_xx + u_yy)` and
/// `B_jk = ¼(u_{x_j y_k} − u_{y_j x_k})`.
fn kaehler_matrix<F: Field>(u: &Jet<F>, n: usize, k: u32) -> JetMatrix<F> {
    let quarter = F::from_q(Q::new(1, 4));
    let mut a = jm_zero::<F>(n, n, 2 * n, k);
    let mut b = jm_zero::<F>(n, n, 2 * n, k);
    for j in 0..n {
        for l in 0..n {
            a[j][l] = second(u, j, l, k).add(&second(u, n + j, n + l, k)).scale(&quarter);
            b[j][l] = second(u, j, n + l, k).sub(&second(u, n + j, l, k)).scale(&quarter);
        }
    }
    jm_blocks(&a, &b, &jm_neg(&b), &a)
}

/// Builds the germ of a potential. The jets have order `k` (at least 2).
pub fn germ_from_potential(spec: &PotentialSpec, k: u32) -> Result<PotentialGerm, GenError> {
    let n = spec.n;
    if n == 0 || spec.potential.nvars() != 2 * n {
        return Err(invalid(format!("potential must have {} variables", 2 * n)));
    }
    let k = k.max(2);
    let u = if spec.potential.order() < k + 2 {
        spec.potential.extend_polynomial(k + 2)
    } else {
        spec.potential.truncate(k + 2)
    };
    let real_u = || -> Result<Jet<Q>, GenError> {
        if u.terms().any(|(_, c)| !c.im.is_zero()) {
            return Err(invalid("a real potential must have real coefficients"));
        }
        Ok(u.map(|c| c.re.clone()))
    };
    match spec.case {
        PotentialCase::Kaehler => {
            let g = kaehler_matrix(&real_u()?, n, k);
            check_nondegenerate(&jm_at_zero(&g), "the complex Hessian of u at 0 is degenerate")?;
            let germ = MetricGerm::real(g)?;
            let j = complex_structure(n);
            let defect = covariant_defect_11(&germ.g, &constant_field(&j, 2 * n, k))?;
            Ok(PotentialGerm { germ, structure: j, defect })
        }
        PotentialCase::ParaKaehler => {
            let u = real_u()?;
            let mut m = jm_zero::<Q>(n, n, 2 * n, k);
            for i in 0..n {
                for j in 0..n {
                    m[i][j] = second(&u, i, n + j, k);
                }
            }
            let mt: JetMatrix<Q> = (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect();
            let z = jm_zero::<Q>(n, n, 2 * n, k);
            let g = jm_blocks(&z, &m, &mt, &z);
            check_nondegenerate(&jm_at_zero(&g), "the mixed Hessian of u at 0 is degenerate")?;
            let germ = MetricGerm::real(g)?;
            let id = Matrix::<Q>::identity(n);
            let l = Matrix::block_diag(&[&id, &id.neg()]);
            let defect = covariant_defect_11(&germ.g, &constant_field(&l, 2 * n, k))?;
            Ok(PotentialGerm { germ, structure: l, defect })
        }
        PotentialCase::ComplexifiedKaehler => {
            let gc = kaehler_matrix(&u, n, k);
            check_nondegenerate(&jm_at_zero(&gc), "the holomorphic Hessian of u at 0 is degenerate")?;
            let germ = MetricGerm::complex(gc.clone())?;
            let jc = complex_structure(n).to_g();
            let defect = covariant_defect_11(&gc, &constant_field(&jc, 2 * n, k))?;
            Ok(PotentialGerm { germ, structure: realify_matrix(&jc), defect })
        }
    }
}

fn check_nondegenerate<F: Field>(m: &Matrix<F>, msg: &str) -> Result<(), GenError> {
    if m.det().is_zero() {
        Err(invalid(msg))
    } else {
        Ok(())
    }
}

/// Real part of a complex Riemannian metric in `n` complex variables:
/// `g_C = I_n` plus random symmetric linear and quadratic Gaussian terms.
pub fn germ_complex_riemannian(n: usize, seed: u64, amplitude: i64, k: u32) -> Result<MetricGerm, GenError> {
    if n == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let k = k.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gc = jm_zero::<G>(n, n, n, k);
    for i in 0..n {
        for j in i..n {
            let mut e = if i == j { Jet::one(n, k) } else { Jet::zero(n, k) };
            for deg in 1..=2 {
                for m in monomials(n, deg) {
                    let c = small_g(&mut rng, amplitude);
                    if !c.is_zero() {
                        e = e.add(&Jet::monomial(n, k, &m, c));
                    }
                }
            }
            gc[i][j] = e.clone();
            gc[j][i] = e;
        }
    }
    Ok(MetricGerm::complex(gc)?)
}

/// Input of the ω_H construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OmegaHSpec {
    pub delta: usize,
    /// −1 (hyperkähler type) or +1 (para-hyperkähler type); ignored when
    /// `complex` is set.
    pub epsilon: i32,
    pub complex: bool,
    /// Number of `+1` entries of `I_{p,q}` in `H₀ = I_{p,q,p,q}` (ε = −1).
    pub p: usize,
    /// Polynomial degree of `H`.
    pub degree: u32,
    pub seed: u64,
    /// Free coefficients are drawn from `[−amplitude, amplitude]`.
    pub amplitude: i64,
    /// Explicit free coefficients per degree (overrides the seed), as
    /// Gaussian rationals; the length must match the free dimension.
    #[serde(default)]
    pub choices: Option<Vec<Vec<G>>>,
}

impl OmegaHSpec {
    pub fn new(delta: usize, epsilon: i32, complex: bool, seed: u64) -> Self {
        OmegaHSpec { delta, epsilon, complex, p: delta, degree: 4, seed, amplitude: 1, choices: None }
    }
}

/// Output of the ω_H construction.
#[derive(Clone, Debug)]
pub struct OmegaHGerm {
    pub germ: MetricGerm,
    /// `J` (multiplication by i) and `U` at the origin, in real coordinates.
    pub j: QMat,
    pub u: QMat,
    /// Number of free coefficients chosen at each degree.
    pub free_dims: Vec<usize>,
    /// `∇J` and `∇U` vanish through this degree.
    pub certified_order: u32,
    pub j_defect: Option<u32>,
    pub u_defect: Option<u32>,
}

struct OmegaSolver<F> {
    n2: usize,
    nv: usize,
    k: u32,
    eps: F,
    omega: Matrix<F>,
    hr0: Matrix<F>,
    /// Basis of the tangent space at H₀ as pairs (δHr, δHi).
    tangent: Vec<(Matrix<F>, Matrix<F>)>,
    /// Coordinates of a symmetric/antisymmetric pair: (j ≤ k) then (j < k).
    slots: Vec<(bool, usize, usize)>,
}

impl<F: Field> OmegaSolver<F> {
    fn new(delta: usize, eps: i32, p: usize, k: u32) -> Self {
        let n2 = 2 * delta;
        let id = Matrix::<F>::identity(delta);
        let z = Matrix::<F>::zeros(delta, delta);
        let omega = Matrix::blocks(&[&[&z, &id], &[&id.neg(), &z]]);
        let hr0 = if eps < 0 {
            let s: Vec<F> = (0..delta).map(|i| if i < p { F::one() } else { -F::one() }).collect();
            let s = Matrix::diag(&s);
            Matrix::block_diag(&[&s, &s])
        } else {
            Matrix::block_diag(&[&id, &id.neg()])
        };
        let mut slots = Vec::new();
        for j in 0..n2 {
            for l in j..n2 {
                slots.push((true, j, l));
            }
        }
        for j in 0..n2 {
            for l in j + 1..n2 {
                slots.push((false, j, l));
            }
        }
        let mut s = OmegaSolver {
            n2,
            nv: 2 * n2,
            k,
            eps: F::from_i64(eps as i64),
            omega,
            hr0,
            tangent: Vec::new(),
            slots,
        };
        let cols: Vec<Vec<F>> = (0..s.slots.len()).map(|i| s.pointwise_lin(&s.slot_pair(i)).1).collect();
        let m = Matrix::from_fn(cols[0].len(), cols.len(), |r, c| cols[c][r].clone());
        s.tangent = m.nullspace().iter().map(|v| s.combine_slots(v)).collect();
        s
    }

    fn slot_pair(&self, i: usize) -> (Matrix<F>, Matrix<F>) {
        let (sym, j, l) = self.slots[i];
        let mut a = Matrix::zeros(self.n2, self.n2);
        let mut b = Matrix::zeros(self.n2, self.n2);
        if sym {
            a[(j, l)] = F::one();
            a[(l, j)] = F::one();
        } else {
            b[(j, l)] = F::one();
            b[(l, j)] = -F::one();
        }
        (a, b)
    }

    fn combine_slots(&self, v: &[F]) -> (Matrix<F>, Matrix<F>) {
        let mut a = Matrix::zeros(self.n2, self.n2);
        let mut b = Matrix::zeros(self.n2, self.n2);
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (x, y) = self.slot_pair(i);
            a = a.add(&x.scale(c));
            b = b.add(&y.scale(c));
        }
        (a, b)
    }

    /// Linearization at H₀ of `P = HrΩHr + HiΩHi + εΩ` and
    /// `Q = HrΩHi − HiΩHr` (H₀ is real), flattened.
    fn pointwise_lin(&self, e: &(Matrix<F>, Matrix<F>)) -> ((), Vec<F>) {
        let (er, ei) = e;
        let w = &self.omega;
        let p = self.hr0.mul(w).mul(er).add(&er.mul(w).mul(&self.hr0));
        let q = self.hr0.mul(w).mul(ei).sub(&ei.mul(w).mul(&self.hr0));
        let mut v = p.flatten();
        v.extend(q.flatten());
        ((), v)
    }

    /// Degree-`m` parts of `P(H)` and `Q(H)` at every monomial.
    fn constraint_parts(&self, hr: &JetMatrix<F>, hi: &JetMatrix<F>, m: u32) -> Vec<(Vec<u32>, Vec<F>)> {
        let w = jm_from_const(&self.omega, self.nv, self.k);
        let hrw = jm_mul(hr, &w);
        let hiw = jm_mul(hi, &w);
        let mut p = jm_add(&jm_mul(&hrw, hr), &jm_mul(&hiw, hi));
        let pc = jm_from_const(&self.omega.scale(&self.eps), self.nv, self.k);
        p = jm_add(&p, &pc);
        let q = jm_add(&jm_mul(&hrw, hi), &jm_neg(&jm_mul(&hiw, hr)));
        let mut by_mono: HashMap<Vec<u32>, Vec<F>> = HashMap::new();
        let len = 2 * self.n2 * self.n2;
        for (block, mat) in [&p, &q].into_iter().enumerate() {
            for (r, row) in mat.iter().enumerate() {
                for (c, e) in row.iter().enumerate() {
                    for (exps, coef) in e.homogeneous(m).term_list() {
                        let v = by_mono.entry(exps).or_insert_with(|| vec![F::zero(); len]);
                        v[block * self.n2 * self.n2 + r * self.n2 + c] = coef;
                    }
                }
            }
        }
        let mut out: Vec<(Vec<u32>, Vec<F>)> = by_mono.into_iter().collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Closedness: `∂x_l Hr_jk + ∂y_l Hi_jk` and `∂x_l Hi_jk − ∂y_l Hr_jk`
    /// symmetric in `(l, j)`. Contributions of `(er, ei)·x^μ`.
    fn closedness_image(&self, mu: &[u32], er: &Matrix<F>, ei: &Matrix<F>) -> Vec<((u8, usize, usize, usize, Vec<u32>), F)> {
        let n2 = self.n2;
        let mut out = Vec::new();
        let mut push = |kind: u8, l: usize, j: usize, k: usize, var: usize, c: F| {
            if c.is_zero() || mu[var] == 0 {
                return;
            }
            let mut nu = mu.to_vec();
            nu[var] -= 1;
            out.push(((kind, l, j, k, nu), c * &F::from_i64(mu[var] as i64)));
        };
        for l in 0..n2 {
            for j in l + 1..n2 {
                for k in 0..n2 {
                    // A_{ljk} − A_{jlk}
                    push(0, l, j, k, l, er[(j, k)].clone());
                    push(0, l, j, k, n2 + l, ei[(j, k)].clone());
                    push(0, l, j, k, j, -er[(l, k)].clone());
                    push(0, l, j, k, n2 + j, -ei[(l, k)].clone());
                    // B_{ljk} − B_{jlk}
                    push(1, l, j, k, l, ei[(j, k)].clone());
                    push(1, l, j, k, n2 + l, -er[(j, k)].clone());
                    push(1, l, j, k, j, -ei[(l, k)].clone());
                    push(1, l, j, k, n2 + j, er[(l, k)].clone());
                }
            }
        }
        out
    }
}

/// Solves for `H` degree by degree and returns the germ with `J` and `U`.
pub fn germ_omega_h(spec: &OmegaHSpec) -> Result<OmegaHGerm, GenError> {
    if spec.delta == 0 {
        return Err(GenError::Usage("δ must be positive".into()));
    }
    if !spec.complex && spec.epsilon != -1 && spec.epsilon != 1 {
        return Err(GenError::Usage("ε must be −1 or +1".into()));
    }
    if spec.p > spec.delta {
        return Err(GenError::Usage(format!("p = {} exceeds δ = {}", spec.p, spec.delta)));
    }
    if spec.degree < 1 {
        return Err(GenError::Usage("degree must be at least 1".into()));
    }
    let unknowns = 2 * spec.delta * (2 * spec.delta + 1) / 2 * monomials(4 * spec.delta, spec.degree).len();
    if unknowns > 2000 {
        return Err(GenError::Usage(format!(
            "δ = {}, degree {} needs {unknowns} unknowns at the top degree; lower the degree",
            spec.delta, spec.degree
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = spec.degree;
    let nv = 4 * spec.delta;
    let j = complex_structure(2 * spec.delta);
    if spec.complex {
        let mut sample = || small_g(&mut rng, spec.amplitude);
        let (hr, hi, free_dims) = solve_h::<G>(spec, -1, &mut sample, |c| Some(c.clone()))?;
        let (gc, uc) = omega_metric(&hr, &hi, -1);
        let jc = j.to_g();
        let j_defect = covariant_defect_11(&gc, &constant_field(&jc, nv, k))?;
        let u_defect = covariant_defect_11(&gc, &uc)?;
        let u = realify_matrix(&jm_at_zero(&uc));
        let germ = MetricGerm::complex(gc)?;
        Ok(OmegaHGerm { germ, j: realify_matrix(&jc), u, free_dims, certified_order: k - 1, j_defect, u_defect })
    } else {
        let mut sample = || G::real(Q::int(small(&mut rng, spec.amplitude)));
        let real = |c: &G| if c.im.is_zero() { Some(c.re.clone()) } else { None };
        let (hr, hi, free_dims) = solve_h::<Q>(spec, spec.epsilon, &mut sample, real)?;
        let (g, u) = omega_metric(&hr, &hi, spec.epsilon);
        let j_defect = covariant_defect_11(&g, &constant_field(&j, nv, k))?;
        let u_defect = covariant_defect_11(&g, &u)?;
        let germ = MetricGerm::real(g)?;
        Ok(OmegaHGerm { germ, j, u: jm_at_zero(&u), free_dims, certified_order: k - 1, j_defect, u_defect })
    }
}

type HPair<F> = (JetMatrix<F>, JetMatrix<F>, Vec<usize>);

fn solve_h<F: Field>(
    spec: &OmegaHSpec,
    eps: i32,
    sample: &mut dyn FnMut() -> G,
    lift: impl Fn(&G) -> Option<F>,
) -> Result<HPair<F>, GenError> {
    let k = spec.degree;
    let sol = OmegaSolver::<F>::new(spec.delta, eps, spec.p, k);
    let (n2, nv) = (sol.n2, sol.nv);
    let mut hr = jm_from_const(&sol.hr0, nv, k);
    let mut hi = jm_zero::<F>(n2, n2, nv, k);
    // pointwise linear map on slot coordinates, for particular solutions
    let slot_cols: Vec<Vec<F>> = (0..sol.slots.len()).map(|i| sol.pointwise_lin(&sol.slot_pair(i)).1).collect();
    let lin = Matrix::from_fn(slot_cols[0].len(), slot_cols.len(), |r, c| slot_cols[c][r].clone());
    let mut free_dims = Vec::new();
    for m in 1..=k {
        let mons = monomials(nv, m);
        // particular pointwise parts from −(P, Q) of the lower-order H
        let rhs = sol.constraint_parts(&hr, &hi, m);
        let mut particular: HashMap<Vec<u32>, (Matrix<F>, Matrix<F>)> = HashMap::new();
        for (mu, v) in rhs {
            let b: Vec<F> = v.iter().map(|x| -x.clone()).collect();
            let x = lin.solve(&b).ok_or_else(|| GenError::Inconsistent {
                degree: m,
                reason: format!("the algebraic constraint has no solution at monomial {mu:?}"),
            })?;
            particular.insert(mu, sol.combine_slots(&x));
        }
        // closedness on t-coordinates: unknown (monomial index, tangent index)
        let nt = sol.tangent.len();
        let mut rows: HashMap<(u8, usize, usize, usize, Vec<u32>), usize> = HashMap::new();
        let mut entries: Vec<(usize, usize, F)> = Vec::new();
        let mut rhs_vals: HashMap<usize, F> = HashMap::new();
        let row_of = |key, rows: &mut HashMap<_, usize>| {
            let len = rows.len();
            *rows.entry(key).or_insert(len)
        };
        for (mi, mu) in mons.iter().enumerate() {
            for (ti, (er, ei)) in sol.tangent.iter().enumerate() {
                for (key, c) in sol.closedness_image(mu, er, ei) {
                    let r = row_of(key, &mut rows);
                    entries.push((r, mi * nt + ti, c));
                }
            }
            if let Some((er, ei)) = particular.get(mu) {
                for (key, c) in sol.closedness_image(mu, er, ei) {
                    let r = row_of(key, &mut rows);
                    let e = rhs_vals.entry(r).or_insert_with(F::zero);
                    *e -= &c;
                }
            }
        }
        let ncols = mons.len() * nt;
        let nrows = rows.len();
        let mut a = Matrix::<F>::zeros(nrows, ncols);
        for (r, c, v) in entries {
            a[(r, c)] += &v;
        }
        let b: Vec<F> = (0..nrows).map(|r| rhs_vals.get(&r).cloned().unwrap_or_else(F::zero)).collect();
        let (t0, null) = if nrows == 0 {
            (vec![F::zero(); ncols], (0..ncols).map(|i| unit_vec::<F>(ncols, i)).collect::<Vec<_>>())
        } else {
            let t0 = a.solve(&b).ok_or_else(|| GenError::Inconsistent {
                degree: m,
                reason: "closedness has no solution compatible with the lower orders".into(),
            })?;
            (t0, a.nullspace())
        };
        free_dims.push(null.len());
        let coeffs: Vec<F> = match &spec.choices {
            Some(ch) => {
                let given = ch.get(m as usize - 1).ok_or_else(|| GenError::Inconsistent {
                    degree: m,
                    reason: "no coefficients given for this degree".into(),
                })?;
                if given.len() != null.len() {
                    return Err(GenError::Inconsistent {
                        degree: m,
                        reason: format!("{} coefficients given, {} free", given.len(), null.len()),
                    });
                }
                given.iter().map(&lift).collect::<Option<_>>().ok_or_else(|| GenError::Inconsistent {
                    degree: m,
                    reason: "imaginary coefficient for a real construction".into(),
                })?
            }
            None => null.iter().map(|_| lift(&sample()).expect("sampled in the right field")).collect(),
        };
        let mut t = t0;
        for (c, v) in coeffs.iter().zip(&null) {
            for (ti, vi) in t.iter_mut().zip(v) {
                *ti += &(c.clone() * vi);
            }
        }
        // assemble the degree-m part
        for (mi, mu) in mons.iter().enumerate() {
            let mut er = Matrix::<F>::zeros(n2, n2);
            let mut ei = Matrix::<F>::zeros(n2, n2);
            if let Some((pr, pi)) = particular.get(mu) {
                er = er.add(pr);
                ei = ei.add(pi);
            }
            for (ti, (tr, tim)) in sol.tangent.iter().enumerate() {
                let c = &t[mi * nt + ti];
                if !c.is_zero() {
                    er = er.add(&tr.scale(c));
                    ei = ei.add(&tim.scale(c));
                }
            }
            for r in 0..n2 {
                for c in 0..n2 {
                    if !er[(r, c)].is_zero() {
                        hr[r][c] = hr[r][c].add(&Jet::monomial(nv, k, mu, er[(r, c)].clone()));
                    }
                    if !ei[(r, c)].is_zero() {
                        hi[r][c] = hi[r][c].add(&Jet::monomial(nv, k, mu, ei[(r, c)].clone()));
                    }
                }
            }
        }
    }
    Ok((hr, hi, free_dims))
}

fn unit_vec<F: Field>(n: usize, i: usize) -> Vec<F> {
    (0..n).map(|j| if i == j { F::one() } else { F::zero() }).collect()
}

/// `g = −ε[[Hr, Hi], [−Hi, Hr]]` and `U = [[Vr, Vi], [Vi, −Vr]]` with
/// `V = Ω₀H`.
fn omega_metric<F: Field>(hr: &JetMatrix<F>, hi: &JetMatrix<F>, eps: i32) -> (JetMatrix<F>, JetMatrix<F>) {
    let n2 = hr.len();
    let delta = n2 / 2;
    let nv = hr[0][0].nvars();
    let k = hr[0][0].order();
    let s = F::from_i64(-eps as i64);
    let sc = |m: &JetMatrix<F>| -> JetMatrix<F> { m.iter().map(|r| r.iter().map(|x| x.scale(&s)).collect()).collect() };
    let g = jm_blocks(&sc(hr), &sc(hi), &sc(&jm_neg(hi)), &sc(hr));
    let id = Matrix::<F>::identity(delta);
    let z = Matrix::<F>::zeros(delta, delta);
    let w = jm_from_const(&Matrix::blocks(&[&[&z, &id], &[&id.neg(), &z]]), nv, k);
    let vr = jm_mul(&w, hr);
    let vi = jm_mul(&w, hi);
    let u = jm_blocks(&vr, &vi, &vi, &jm_neg(&vr));
    (g, u)
}

/// Matrices of the normal form of a type, with a usage error naming the
/// admissible signatures otherwise.
pub fn normal_form_frames(label: TypeLabel, p: usize, q: usize, alternative: bool) -> Result<(QMat, StructureSet), GenError> {
    if !admissible_signature(label, p, q) {
        return Err(GenError::Usage(format!("signature ({p},{q}) is not admissible for type {label}: {}", signature_rule(label))));
    }
    normal_form(label, p, q, alternative)
        .ok_or_else(|| GenError::Usage(format!("no normal form for type {label} at ({p},{q})")))
}

/// Admissible signatures of each type, in words.
pub fn signature_rule(label: TypeLabel) -> &'static str {
    match label {
        TypeLabel::One => "signature (p,q), any",
        TypeLabel::OneC | TypeLabel::TwoPrime => "signature (p,p)",
        TypeLabel::Two => "signature (2p,2q)",
        TypeLabel::TwoC | TypeLabel::ThreePrime => "signature (2p,2p)",
        TypeLabel::Three => "signature (4p,4q)",
        TypeLabel::ThreeC => "signature (4p,4p)",
        TypeLabel::HplusH => "not a type of metric germ",
    }
}

/// Left multiplication by 1, i, j, k on ℍ in the basis (1, i, j, k).
pub fn quaternion_left() -> [QMat; 4] {
    [
        Matrix::identity(4),
        Matrix::from_ints(&[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]]),
        Matrix::from_ints(&[&[0, 0, -1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0], &[0, -1, 0, 0]]),
        Matrix::from_ints(&[&[0, 0, 0, -1], &[0, 0, -1, 0], &[0, 1, 0, 0], &[1, 0, 0, 0]]),
    ]
}

/// The Lie algebra `{(x₁, x₂) ↦ (X x₁, −X̄ x₂)}` on `ℍ ⊕ ℍ` preserving
/// `Re(x̄₁x₂)`, with that form's Gram matrix `[[0, I], [I, 0]]`. It is not the
/// holonomy of any metric; its commutant is `ℍ ⊕ ℍ`.
pub fn hh_negative_control() -> (MatrixSpan, QMat) {
    let l = quaternion_left();
    let z = Matrix::zeros(4, 4);
    let mut ws = vec![Matrix::blocks(&[&[&l[0], &z], &[&z, &l[0].neg()]])];
    for x in &l[1..] {
        ws.push(Matrix::blocks(&[&[x, &z], &[&z, x]]));
    }
    let i4 = Matrix::identity(4);
    let g0 = Matrix::blocks(&[&[&z, &i4], &[&i4, &z]]);
    let mut h = MatrixSpan::from_matrices(8, &ws);
    h.close_brackets();
    (h, g0)
}

/// Dimension of the generic holonomy algebra of a type in real dimension `d`.
pub fn expected_holonomy_dim(label: TypeLabel, d: usize) -> Option<usize> {
    Some(match label {
        TypeLabel::One => d * (d - 1) / 2,
        TypeLabel::Two | TypeLabel::TwoPrime => (d / 2) * (d / 2),
        TypeLabel::OneC => (d / 2) * (d / 2 - 1),
        TypeLabel::TwoC => 2 * (d / 4) * (d / 4),
        TypeLabel::Three | TypeLabel::ThreePrime => (d / 4) * (d / 2 + 1),
        TypeLabel::ThreeC => 2 * (d / 8) * (d / 4 + 1),
        TypeLabel::HplusH => return None,
    })
}

/// Smallest real dimension at which a type is generated.
pub fn default_dimension(label: TypeLabel) -> usize {
    match label {
        TypeLabel::One => 3,
        TypeLabel::OneC => 6,
        TypeLabel::Two | TypeLabel::TwoPrime | TypeLabel::Three | TypeLabel::ThreePrime => 4,
        TypeLabel::TwoC | TypeLabel::ThreeC | TypeLabel::HplusH => 8,
    }
}

/// Options shared by the type generators.
#[derive(Clone, Debug)]
pub struct GenerateOptions {
    pub dim: Option<usize>,
    /// Real signature of g; defaults depend on the type.
    pub signature: Option<(usize, usize)>,
    pub seed: u64,
    /// Jet order of the emitted germ.
    pub order: u32,
    pub amplitude: i64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { dim: None, signature: None, seed: 0, order: 4, amplitude: 1 }
    }
}

/// A generated germ with the parallel structures used to build it.
#[derive(Clone, Debug)]
pub struct GeneratedGerm {
    pub label: TypeLabel,
    pub germ: MetricGerm,
    pub seed: u64,
    /// Structures at the origin known to be parallel by construction.
    pub witnesses: Vec<(String, QMat)>,
    /// Degree through which the witnesses are certified parallel; `None`
    /// when parallel to the full jet order.
    pub certified_order: Option<u32>,
    pub description: String,
}

/// Generates a germ of the requested type.
pub fn generate(label: TypeLabel, opts: &GenerateOptions) -> Result<GeneratedGerm, GenError> {
    let d = opts.dim.unwrap_or_else(|| default_dimension(label));
    let k = opts.order.max(2);
    let (seed, amp) = (opts.seed, opts.amplitude);
    let usage = |msg: String| Err(GenError::Usage(msg));
    let sig = opts.signature;
    if let Some((p, q)) = sig {
        if p + q != d {
            return usage(format!("signature ({p},{q}) does not match dimension {d}"));
        }
        if !admissible_signature(label, p, q) {
            return usage(format!("signature ({p},{q}) is not admissible for type {label}: {}", signature_rule(label)));
        }
    }
    let needs = |m: usize| -> Result<(), GenError> {
        if d == 0 || d % m != 0 {
            Err(GenError::Usage(format!("type {label} needs a dimension divisible by {m}, got {d}")))
        } else {
            Ok(())
        }
    };
    let done = |germ: MetricGerm, witnesses: Vec<(String, QMat)>, certified: Option<u32>, description: String| {
        Ok(GeneratedGerm { label, germ, seed, witnesses, certified_order: certified, description })
    };
    match label {
        TypeLabel::One => {
            let (p, q) = sig.unwrap_or((d, 0));
            let germ = germ_type1(p, q, seed, amp, k)?;
            done(germ, vec![], None, format!("random quadratic perturbation of I_{{{p},{q}}}"))
        }
        TypeLabel::Two => {
            needs(2)?;
            let (p, _) = sig.unwrap_or((d, 0));
            let spec = random_potential(PotentialCase::Kaehler, d / 2, p / 2, seed, amp);
            let pg = germ_from_potential(&spec, k)?;
            done(pg.germ, vec![("J".into(), pg.structure)], None, "Kähler metric of a random quartic potential".into())
        }
        TypeLabel::TwoPrime => {
            needs(2)?;
            let spec = random_potential(PotentialCase::ParaKaehler, d / 2, 0, seed, amp);
            let pg = germ_from_potential(&spec, k)?;
            done(pg.germ, vec![("L".into(), pg.structure)], None, "paraKähler metric of a random quartic potential".into())
        }
        TypeLabel::OneC => {
            needs(2)?;
            let germ = germ_complex_riemannian(d / 2, seed, amp, k)?;
            let jbar = germ.jbar().expect("complex germ");
            done(germ, vec![("J̲".into(), jbar)], None, "real part of a random complex Riemannian metric".into())
        }
        TypeLabel::TwoC => {
            needs(4)?;
            let spec = random_potential(PotentialCase::ComplexifiedKaehler, d / 4, d / 4, seed, amp);
            let pg = germ_from_potential(&spec, k)?;
            let jbar = pg.germ.jbar().expect("complex germ");
            done(
                pg.germ,
                vec![("J̲".into(), jbar), ("J".into(), pg.structure)],
                None,
                "complexified Kähler metric of a random holomorphic quartic potential".into(),
            )
        }
        TypeLabel::Three | TypeLabel::ThreePrime | TypeLabel::ThreeC => {
            let complex = label == TypeLabel::ThreeC;
            needs(if complex { 8 } else { 4 })?;
            let delta = if complex { d / 8 } else { d / 4 };
            let eps = if label == TypeLabel::ThreePrime { 1 } else { -1 };
            let mut spec = OmegaHSpec::new(delta, eps, complex, seed);
            spec.amplitude = amp;
            spec.degree = k;
            if label == TypeLabel::Three {
                spec.p = sig.map_or(delta, |(p, _)| p / 4);
            }
            let oh = germ_omega_h(&spec)?;
            let mut witnesses = vec![("J".into(), oh.j), ("U".into(), oh.u)];
            if let Some(jb) = oh.germ.jbar() {
                witnesses.insert(0, ("J̲".into(), jb));
            }
            done(oh.germ, witnesses, Some(oh.certified_order), format!("ω_H construction, δ={delta}, degree {k}"))
        }
        TypeLabel::HplusH => usage("ℍ⊕ℍ is not realized by a metric germ; use the negative control".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endo::analyze;
    use crate::geometry::curvature;
    use crate::holonomy::{commutant, holonomy_span};

    fn classify_germ(germ: &MetricGerm) -> (usize, Option<TypeLabel>) {
        let c = curvature(germ, 2).unwrap();
        let h = holonomy_span(&c);
        let e = commutant(&h, &germ.g0());
        (h.dim(), analyze(&e).unwrap().label)
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(4, 2).len(), 10);
        assert_eq!(monomials(3, 0), vec![vec![0, 0, 0]]);
        assert_eq!(monomials(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let g = germ_type1(2, 1, 5, 0, 4).unwrap();
        assert_eq!(g.polynomial_degree(), 0);
        let spec = OmegaHSpec { amplitude: 0, ..OmegaHSpec::new(1, -1, false, 3) };
        let oh = germ_omega_h(&spec).unwrap();
        assert_eq!(oh.germ.polynomial_degree(), 0);
    }

    #[test]
    fn type1_generic() {
        let g = germ_type1(3, 0, 1, 1, 4).unwrap();
        assert_eq!(classify_germ(&g), (3, Some(TypeLabel::One)));
    }

    #[test]
    fn kaehler_structure_is_parallel() {
        let spec = random_potential(PotentialCase::Kaehler, 2, 1, 4, 1);
        let pg = germ_from_potential(&spec, 4).unwrap();
        assert_eq!(pg.defect, None);
        assert_eq!(pg.germ.signature, (2, 2));
        assert_eq!(classify_germ(&pg.germ), (4, Some(TypeLabel::Two)));
    }

    #[test]
    fn parakaehler_structure_is_parallel() {
        let spec = random_potential(PotentialCase::ParaKaehler, 2, 0, 4, 1);
        let pg = germ_from_potential(&spec, 4).unwrap();
        assert_eq!(pg.defect, None);
        assert_eq!(classify_germ(&pg.germ), (4, Some(TypeLabel::TwoPrime)));
    }

    #[test]
    fn degenerate_potential_is_rejected() {
        let u = Jet::monomial(2, 4, &[1, 1], G::one());
        let spec = PotentialSpec { n: 1, case: PotentialCase::Kaehler, potential: u };
        assert!(germ_from_potential(&spec, 4).is_err());
    }

    #[test]
    fn omega_h_hyperkaehler() {
        let oh = germ_omega_h(&OmegaHSpec::new(1, -1, false, 2)).unwrap();
        assert_eq!(oh.j_defect, None);
        assert_eq!(oh.u_defect, None);
        assert_eq!(oh.germ.signature, (4, 0));
        assert_eq!(oh.u.mul(&oh.u), Matrix::scalar(4, Q::int(-1)));
        assert_eq!(oh.j.mul(&oh.u), oh.u.mul(&oh.j).neg());
        assert_eq!(classify_germ(&oh.germ), (3, Some(TypeLabel::Three)));
    }

    #[test]
    fn omega_h_para_hyperkaehler() {
        let oh = germ_omega_h(&OmegaHSpec::new(1, 1, false, 2)).unwrap();
        assert_eq!(oh.u_defect, None);
        assert_eq!(oh.germ.signature, (2, 2));
        assert_eq!(oh.u.mul(&oh.u), Matrix::identity(4));
        assert_eq!(classify_germ(&oh.germ), (3, Some(TypeLabel::ThreePrime)));
    }

    #[test]
    fn explicit_choices_are_checked() {
        let mut spec = OmegaHSpec::new(1, -1, false, 0);
        spec.degree = 2;
        spec.choices = Some(vec![vec![G::one()]]);
        match germ_omega_h(&spec) {
            Err(GenError::Inconsistent { degree: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_type_generates_at_default_dimension() {
        for label in TypeLabel::HOLONOMY {
            let g = generate(label, &GenerateOptions { seed: 1, ..Default::default() }).unwrap();
            let d = g.germ.d;
            assert_eq!(d, default_dimension(label));
            let (dim, got) = classify_germ(&g.germ);
            assert_eq!(got, Some(label), "{label}");
            assert_eq!(Some(dim), expected_holonomy_dim(label, d), "{label}");
        }
    }

    #[test]
    fn complex_surface_is_not_complex_riemannian_type() {
        let g = germ_complex_riemannian(2, 3, 1, 4).unwrap();
        assert_eq!(classify_germ(&g).1, Some(TypeLabel::TwoC));
    }

    #[test]
    fn negative_control_preserves_form() {
        let (h, g0) = hh_negative_control();
        for w in h.basis() {
            assert!(w.transpose().mul(&g0).add(&g0.mul(w)).is_zero());
        }
        let e = commutant(&h, &g0);
        assert_eq!(e.dim(), 8);
        assert_eq!(analyze(&e).unwrap().label, Some(TypeLabel::HplusH));
    }

    #[test]
    fn normal_form_frames_reject_bad_signature() {
        assert!(normal_form_frames(TypeLabel::Three, 2, 2, false).is_err());
        assert!(normal_form_frames(TypeLabel::TwoPrime, 2, 2, false).is_ok());
    }
}
