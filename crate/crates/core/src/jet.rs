//! Truncated multivariate power series with exact coefficients.

use crate::scalar::{Field, Q};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Maximum number of variables (4 bits per exponent in a `u64` key).
pub const MAX_VARS: usize = 16;
/// Maximum truncation order.
pub const MAX_ORDER: u32 = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("jets have mismatched shape: (n={0}, K={1}) vs (n={2}, K={3})")]
    Mismatch(usize, u32, usize, u32),
    #[error("non-unit jet: constant term is zero")]
    NonUnit,
    #[error("variable index {0} out of range for {1} variables")]
    BadIndex(usize, usize),
    #[error("truncation order too low: need K >= {needed}, have K = {have}; raise K")]
    OrderTooLow { needed: u32, have: u32 },
    #[error("unsupported jet shape: n={0} (max {MAX_VARS}), K={1} (max {MAX_ORDER})")]
    Unsupported(usize, u32),
    #[error("monomial {0:?} has degree above K={1}")]
    DegreeTooHigh(Vec<u32>, u32),
}

/// Packed exponent vector.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Mono(u64);

impl Mono {
    pub const ONE: Mono = Mono(0);

    pub fn from_exps(e: &[u32]) -> Mono {
        let mut k = 0u64;
        for (i, &x) in e.iter().enumerate() {
            assert!(x <= MAX_ORDER, "exponent too large");
            k |= (x as u64) << (4 * i);
        }
        Mono(k)
    }

    pub fn var(i: usize) -> Mono {
        Mono(1 << (4 * i))
    }

    pub fn exp(self, i: usize) -> u32 {
        ((self.0 >> (4 * i)) & 0xf) as u32
    }

    pub fn degree(self) -> u32 {
        let mut k = self.0;
        let mut s = 0;
        while k != 0 {
            s += (k & 0xf) as u32;
            k >>= 4;
        }
        s
    }

    pub fn exps(self, n: usize) -> Vec<u32> {
        (0..n).map(|i| self.exp(i)).collect()
    }

    /// Product of monomials. Caller guarantees no exponent exceeds 15.
    pub fn mul(self, o: Mono) -> Mono {
        Mono(self.0 + o.0)
    }

    /// Lower exponent of variable `i` by one.
    fn lower(self, i: usize) -> Mono {
        Mono(self.0 - (1 << (4 * i)))
    }
}

/// Truncated power series in `n` variables, exact up to total degree `K`.
#[derive(Clone, PartialEq, Eq)]
pub struct Jet<F> {
    n: usize,
    k: u32,
    terms: BTreeMap<Mono, F>,
}

pub type QJet = Jet<Q>;

impl<F: Field> Jet<F> {
    pub fn zero(n: usize, k: u32) -> Self {
        assert!(n <= MAX_VARS && k <= MAX_ORDER, "{}", JetError::Unsupported(n, k));
        Jet { n, k, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, k: u32, c: F) -> Self {
        let mut j = Self::zero(n, k);
        if !c.is_zero() {
            j.terms.insert(Mono::ONE, c);
        }
        j
    }

    pub fn one(n: usize, k: u32) -> Self {
        Self::constant(n, k, F::one())
    }

    /// The coordinate function `x_i`.
    pub fn var(n: usize, k: u32, i: usize) -> Self {
        assert!(i < n, "{}", JetError::BadIndex(i, n));
        let mut j = Self::zero(n, k);
        if k >= 1 {
            j.terms.insert(Mono::var(i), F::one());
        }
        j
    }

    /// Builds a jet from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms(
        n: usize,
        k: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, F)>,
    ) -> Result<Self, JetError> {
        if n > MAX_VARS || k > MAX_ORDER {
            return Err(JetError::Unsupported(n, k));
        }
        let mut j = Self::zero(n, k);
        for (e, c) in terms {
            if e.len() != n {
                return Err(JetError::BadIndex(e.len(), n));
            }
            if e.iter().sum::<u32>() > k {
                return Err(JetError::DegreeTooHigh(e, k));
            }
            j.add_term(Mono::from_exps(&e), c);
        }
        Ok(j)
    }

    /// Monomials of degree above `K` are dropped silently.
    pub fn monomial(n: usize, k: u32, exps: &[u32], c: F) -> Self {
        let mut j = Self::zero(n, k);
        if exps.iter().sum::<u32>() <= k {
            j.add_term(Mono::from_exps(exps), c);
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mono, &F)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coeff(&self, exps: &[u32]) -> F {
        self.terms.get(&Mono::from_exps(exps)).cloned().unwrap_or_else(F::zero)
    }

    pub fn coeff_mono(&self, m: Mono) -> F {
        self.terms.get(&m).cloned().unwrap_or_else(F::zero)
    }

    /// Value at the origin.
    pub fn at_zero(&self) -> F {
        self.coeff_mono(Mono::ONE)
    }

    /// Lowest degree of a nonzero term (`None` for the zero jet).
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    /// Highest degree of a nonzero term.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    fn add_term(&mut self, m: Mono, c: F) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, o: &Self) -> Result<(), JetError> {
        if self.n != o.n || self.k != o.k {
            Err(JetError::Mismatch(self.n, self.k, o.n, o.k))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, JetError> {
        self.check(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        Ok(r)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self, JetError> {
        self.check(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, -c.clone());
        }
        Ok(r)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, JetError> {
        self.check(o)?;
        let mut acc: BTreeMap<Mono, F> = BTreeMap::new();
        let by_deg: Vec<(Mono, u32, &F)> = o.terms.iter().map(|(m, c)| (*m, m.degree(), c)).collect();
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            for (mb, db, cb) in &by_deg {
                if da + db > self.k {
                    continue;
                }
                let p = ca.clone() * cb;
                let e = acc.entry(ma.mul(*mb)).or_insert_with(F::zero);
                *e += &p;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Jet { n: self.n, k: self.k, terms: acc })
    }

    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.try_sub(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).unwrap_or_else(|e| panic!("{e}"))
    }

    /// In-place `self += c·o`.
    pub fn add_scaled(&mut self, c: &F, o: &Self) {
        self.check(o).unwrap_or_else(|e| panic!("{e}"));
        if c.is_zero() {
            return;
        }
        for (m, x) in &o.terms {
            self.add_term(*m, c.clone() * x);
        }
    }

    /// In-place `self += a·b`, truncated.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        self.check(a).unwrap_or_else(|e| panic!("{e}"));
        self.check(b).unwrap_or_else(|e| panic!("{e}"));
        for (ma, ca) in &a.terms {
            let da = ma.degree();
            for (mb, cb) in &b.terms {
                if da + mb.degree() > self.k {
                    continue;
                }
                self.add_term(ma.mul(*mb), ca.clone() * cb);
            }
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-F::one())
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(self.n, self.k);
        }
        Jet { n: self.n, k: self.k, terms: self.terms.iter().map(|(m, x)| (*m, x.clone() * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one(self.n, self.k);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Multiplicative inverse via the finite Neumann series of the nilpotent
    /// non-constant part.
    pub fn invert(&self) -> Result<Self, JetError> {
        let c = self.at_zero();
        let ci = c.inv().ok_or(JetError::NonUnit)?;
        // self = c (1 + N)
        let mut nil = self.scale(&ci);
        nil.terms.remove(&Mono::ONE);
        let mneg = nil.neg();
        let mut sum = Self::one(self.n, self.k);
        let mut term = Self::one(self.n, self.k);
        for _ in 0..self.k {
            term = term.mul(&mneg);
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term);
        }
        Ok(sum.scale(&ci))
    }

    /// Formal partial derivative in variable `i`; the result is exact to order `K−1`.
    pub fn try_partial(&self, i: usize) -> Result<Self, JetError> {
        if i >= self.n {
            return Err(JetError::BadIndex(i, self.n));
        }
        if self.k == 0 {
            return Err(JetError::OrderTooLow { needed: 1, have: 0 });
        }
        let mut r = Self::zero(self.n, self.k - 1);
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e > 0 {
                r.add_term(m.lower(i), c.clone() * &F::from_i64(e as i64));
            }
        }
        Ok(r)
    }

    pub fn partial(&self, i: usize) -> Self {
        self.try_partial(i).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Drops all terms above degree `k` (`k ≤ K`).
    pub fn truncate(&self, k: u32) -> Self {
        assert!(k <= self.k, "cannot raise the truncation order by truncating");
        Jet {
            n: self.n,
            k,
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= k).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// Reinterprets the jet at a higher order. Only valid when the caller knows
    /// the series is a polynomial of degree ≤ K (higher terms truly vanish).
    pub fn extend_polynomial(&self, k: u32) -> Self {
        assert!(k >= self.k);
        Jet { n: self.n, k, terms: self.terms.clone() }
    }

    /// Homogeneous part of degree `m`.
    pub fn homogeneous(&self, m: u32) -> Self {
        Jet {
            n: self.n,
            k: self.k,
            terms: self.terms.iter().filter(|(x, _)| x.degree() == m).map(|(x, c)| (*x, c.clone())).collect(),
        }
    }

    pub fn map<H: Field>(&self, f: impl Fn(&F) -> H) -> Jet<H> {
        let mut j = Jet::zero(self.n, self.k);
        for (m, c) in &self.terms {
            j.add_term(*m, f(c));
        }
        j
    }

    /// Terms as `(exponents, coefficient)` in degree-then-lexicographic order.
    pub fn term_list(&self) -> Vec<(Vec<u32>, F)> {
        let mut v: Vec<(Vec<u32>, F)> = self.terms.iter().map(|(m, c)| (m.exps(self.n), c.clone())).collect();
        v.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            da.cmp(&db).then_with(|| b.0.cmp(&a.0))
        });
        v
    }
}

impl<F: Field> fmt::Debug for Jet<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .term_list()
            .into_iter()
            .map(|(e, c)| {
                let m: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .map(|(i, &x)| if x == 1 { format!("x{i}") } else { format!("x{i}^{x}") })
                    .collect();
                if m.is_empty() {
                    format!("{c}")
                } else {
                    format!("({c})·{}", m.join("·"))
                }
            })
            .collect();
        let body = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
        write!(f, "{body} + O({})", self.k + 1)
    }
}

#[derive(Serialize, Deserialize)]
struct JetRepr<F> {
    n: usize,
    #[serde(rename = "K")]
    k: u32,
    terms: Vec<(Vec<u32>, F)>,
}

impl<F: Field + Serialize> Serialize for Jet<F> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        JetRepr { n: self.n, k: self.k, terms: self.term_list() }.serialize(s)
    }
}

impl<'de, F: Field + Deserialize<'de>> Deserialize<'de> for Jet<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r: JetRepr<F> = Deserialize::deserialize(d)?;
        Jet::from_terms(r.n, r.k, r.terms).map_err(D::Error::custom)
    }
}

/// Square matrix of jets.
pub type JetMatrix<F> = Vec<Vec<Jet<F>>>;

pub fn jm_at_zero<F: Field>(m: &JetMatrix<F>) -> crate::matrix::Matrix<F> {
    crate::matrix::Matrix::from_fn(m.len(), m.len(), |i, j| m[i][j].at_zero())
}

pub fn jm_mul<F: Field>(a: &JetMatrix<F>, b: &JetMatrix<F>) -> JetMatrix<F> {
    let n = a.len();
    let (nv, k) = (a[0][0].nvars(), a[0][0].order());
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = Jet::zero(nv, k);
                    for l in 0..n {
                        s.add_product(&a[i][l], &b[l][j]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn jm_truncate<F: Field>(a: &JetMatrix<F>, k: u32) -> JetMatrix<F> {
    a.iter().map(|r| r.iter().map(|x| x.truncate(k)).collect()).collect()
}

/// Inverse of a matrix of jets whose value at the origin is invertible:
/// `g⁻¹ = Σ_k (−g₀⁻¹E)^k g₀⁻¹` with `E = g − g₀`.
pub fn jm_invert<F: Field>(g: &JetMatrix<F>) -> Option<JetMatrix<F>> {
    let n = g.len();
    let (nv, k) = (g[0][0].nvars(), g[0][0].order());
    let g0 = jm_at_zero(g);
    let g0i = g0.inverse()?;
    let c = |m: &crate::matrix::Matrix<F>| -> JetMatrix<F> {
        (0..n).map(|i| (0..n).map(|j| Jet::constant(nv, k, m[(i, j)].clone())).collect()).collect()
    };
    let g0i_j = c(&g0i);
    let e: JetMatrix<F> = (0..n)
        .map(|i| (0..n).map(|j| g[i][j].sub(&Jet::constant(nv, k, g0[(i, j)].clone()))).collect())
        .collect();
    let minus_ae: JetMatrix<F> = jm_mul(&g0i_j, &e)
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.neg()).collect())
        .collect();
    let mut sum = g0i_j.clone();
    let mut term = g0i_j;
    for _ in 0..k {
        term = jm_mul(&minus_ae, &term);
        if term.iter().all(|r| r.iter().all(|x| x.is_zero())) {
            break;
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] = sum[i][j].add(&term[i][j]);
            }
        }
    }
    Some(sum)
}
