//! Dense matrices over an exact field, row reduction and derived routines.

use crate::scalar::{Field, G, Q};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Index, IndexMut};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<F> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<F>,
}

pub type QMat = Matrix<Q>;

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn scalar(n: usize, c: F) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn diag(entries: &[F]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Integer entries, for tests and normal forms.
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| F::from_i64(v)).collect()).collect())
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(|r| r.to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<F> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn map<H: Field>(&self, f: impl Fn(&F) -> H) -> Matrix<H> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        let p = a.clone() * b;
                        out.data[i * o.cols + j] += &p;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = F::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += &(a.clone() * b);
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &F) -> Self {
        self.map(|x| x.clone() * c)
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn trace(&self) -> F {
        let mut s = F::zero();
        for i in 0..self.rows.min(self.cols) {
            s += &self[(i, i)];
        }
        s
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::identity(self.rows);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// `AB − BA`.
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, o: &Self) -> Self {
        self.mul(o).add(&o.mul(self))
    }

    /// Block matrix from a grid of equally sized blocks.
    pub fn blocks(grid: &[&[&Self]]) -> Self {
        let br = grid.len();
        let bc = grid[0].len();
        let h = grid[0][0].rows;
        let w = grid[0][0].cols;
        let mut out = Self::zeros(br * h, bc * w);
        for (bi, row) in grid.iter().enumerate() {
            for (bj, b) in row.iter().enumerate() {
                assert_eq!((b.rows, b.cols), (h, w), "block shape mismatch");
                for i in 0..h {
                    for j in 0..w {
                        out[(bi * h + i, bj * w + j)] = b[(i, j)].clone();
                    }
                }
            }
        }
        out
    }

    pub fn block_diag(blocks: &[&Self]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        Self::from_fn(h, w, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !self[(i, c)].is_zero()) else { continue };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = self[(r, c)].inv().unwrap();
            for j in c..cols {
                let v = self[(r, j)].clone() * &inv;
                self[(r, j)] = v;
            }
            for i in 0..rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..cols {
                    if !self[(r, j)].is_zero() {
                        let t = f.clone() * &self[(r, j)];
                        self.data[i * cols + j] -= &t;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : A x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![F::zero(); self.cols];
                v[f] = F::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Basis of `{y : yᵀ A = 0}`.
    pub fn left_nullspace(&self) -> Vec<Vec<F>> {
        self.transpose().nullspace()
    }

    /// One solution of `A x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows);
        let aug = Self::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![F::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r[(row, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                F::one()
            } else {
                F::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.submatrix(0, n, n, n))
    }

    pub fn det(&self) -> F {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = F::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else { return F::zero() };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            let inv = piv.inv().unwrap();
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone() * &inv;
                for j in c..n {
                    let t = f.clone() * &m[(c, j)];
                    m.data[i * n + j] -= &t;
                }
            }
        }
        det
    }

    /// Row-major flattening, used when spans of matrices are treated as vectors.
    pub fn flatten(&self) -> Vec<F> {
        self.data.clone()
    }

    pub fn unflatten(n: usize, v: &[F]) -> Self {
        Self::from_vec(n, n, v.to_vec())
    }

    /// Basis of the column space.
    pub fn column_space(&self) -> Vec<Vec<F>> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&c| self.col(c)).collect()
    }
}

impl Matrix<Q> {
    pub fn to_g(&self) -> Matrix<G> {
        self.map(|x| G::real(x.clone()))
    }

    /// Signature `(positive, negative, zero)` of a symmetric matrix, by exact
    /// congruence diagonalization.
    pub fn signature(&self) -> (usize, usize, usize) {
        let d = congruence_diagonal(self);
        let p = d.iter().filter(|x| x.signum() > 0).count();
        let n = d.iter().filter(|x| x.signum() < 0).count();
        (p, n, d.len() - p - n)
    }
}

impl Matrix<G> {
    pub fn re(&self) -> Matrix<Q> {
        self.map(|x| x.re.clone())
    }
    pub fn im(&self) -> Matrix<Q> {
        self.map(|x| x.im.clone())
    }
}

/// Diagonal of a matrix congruent to the symmetric input (`Pᵀ S P`), computed
/// by symmetric Gaussian elimination. A zero pivot with a nonzero entry
/// further along its row is repaired by adding that row/column first.
pub fn congruence_diagonal(s: &Matrix<Q>) -> Vec<Q> {
    assert!(s.is_square());
    assert!(*s == s.transpose(), "congruence_diagonal needs a symmetric matrix");
    let n = s.rows;
    let mut m = s.clone();
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        // prefer a nonzero diagonal pivot
        if let Some(p) = (k..n).find(|&i| !m[(i, i)].is_zero()) {
            swap_sym(&mut m, k, p);
        } else if let Some((i, j)) =
            (k..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !m[(i, j)].is_zero())
        {
            // e_i ← e_i + e_j makes the (i,i) entry 2 m_ij ≠ 0
            add_sym(&mut m, i, j);
            swap_sym(&mut m, k, i);
        } else {
            out.extend(std::iter::repeat(Q::from_i64(0)).take(n - k));
            break;
        }
        let piv = m[(k, k)].clone();
        let inv = piv.inv().unwrap();
        for i in k + 1..n {
            if m[(i, k)].is_zero() {
                continue;
            }
            let f = m[(i, k)].clone() * &inv;
            for j in k..n {
                let t = f.clone() * &m[(k, j)];
                m[(i, j)] -= &t;
            }
            for j in k..n {
                let t = f.clone() * &m[(j, k)];
                m[(j, i)] -= &t;
            }
        }
        out.push(piv);
        k += 1;
    }
    out
}

fn swap_sym(m: &mut Matrix<Q>, a: usize, b: usize) {
    if a == b {
        return;
    }
    let n = m.rows;
    for j in 0..n {
        let (x, y) = (m[(a, j)].clone(), m[(b, j)].clone());
        m[(a, j)] = y;
        m[(b, j)] = x;
    }
    for i in 0..n {
        let (x, y) = (m[(i, a)].clone(), m[(i, b)].clone());
        m[(i, a)] = y;
        m[(i, b)] = x;
    }
}

fn add_sym(m: &mut Matrix<Q>, i: usize, j: usize) {
    let n = m.rows;
    for c in 0..n {
        let t = m[(j, c)].clone();
        m[(i, c)] += &t;
    }
    for r in 0..n {
        let t = m[(r, j)].clone();
        m[(r, i)] += &t;
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

impl<F: fmt::Display> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for row in self.data.chunks(self.cols.max(1)).take(self.rows) {
            let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<F: Field + Serialize> Serialize for Matrix<F> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de, F: Field + Deserialize<'de>> Deserialize<'de> for Matrix<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<F>> = Deserialize::deserialize(d)?;
        let c = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(Matrix::from_rows(rows))
    }
}

/// Incrementally built span of vectors, kept in reduced echelon form.
#[derive(Clone, Debug)]
pub struct Span<F> {
    dim: usize,
    /// reduced basis rows with their pivot column
    rows: Vec<(usize, Vec<F>)>,
}

impl<F: Field> Span<F> {
    pub fn new(dim: usize) -> Self {
        Span { dim, rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Residue of `v` after elimination against the basis.
    pub fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut w = v.to_vec();
        for (p, r) in &self.rows {
            if w[*p].is_zero() {
                continue;
            }
            let f = w[*p].clone();
            for (x, y) in w.iter_mut().zip(r) {
                if !y.is_zero() {
                    *x -= &(f.clone() * y);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[F]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Adds `v`; returns whether the span grew.
    pub fn insert(&mut self, v: &[F]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut w = self.reduce(v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else { return false };
        let inv = w[p].inv().unwrap();
        for x in w.iter_mut() {
            *x *= &inv;
        }
        for (_, r) in self.rows.iter_mut() {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (x, y) in r.iter_mut().zip(&w) {
                if !y.is_zero() {
                    *x -= &(f.clone() * y);
                }
            }
        }
        let pos = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(pos, (p, w));
        true
    }

    /// Reduced basis, sorted by pivot.
    pub fn basis(&self) -> Vec<Vec<F>> {
        self.rows.iter().map(|(_, r)| r.clone()).collect()
    }

    /// Coordinates of `v` in the reduced basis, `None` if `v` is outside the span.
    pub fn coordinates(&self, v: &[F]) -> Option<Vec<F>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.rows.iter().map(|(p, _)| v[*p].clone()).collect())
    }
}

/// Reduced basis of the span of the given vectors.
pub fn span_basis<F: Field>(dim: usize, vs: &[Vec<F>]) -> Vec<Vec<F>> {
    let mut s = Span::new(dim);
    for v in vs {
        s.insert(v);
    }
    s.basis()
}

/// Basis of the intersection of two subspaces given by bases.
pub fn intersect<F: Field>(dim: usize, a: &[Vec<F>], b: &[Vec<F>]) -> Vec<Vec<F>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // x = Σ s_i a_i = Σ t_j b_j
    let m = Matrix::from_fn(dim, a.len() + b.len(), |r, c| {
        if c < a.len() {
            a[c][r].clone()
        } else {
            -b[c - a.len()][r].clone()
        }
    });
    let vs: Vec<Vec<F>> = m
        .nullspace()
        .into_iter()
        .map(|st| {
            let mut x = vec![F::zero(); dim];
            for (i, ai) in a.iter().enumerate() {
                if st[i].is_zero() {
                    continue;
                }
                for r in 0..dim {
                    x[r] += &(st[i].clone() * &ai[r]);
                }
            }
            x
        })
        .collect();
    span_basis(dim, &vs)
}

pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    let mut s = F::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += &(x.clone() * y);
        }
    }
    s
}

/// Linear combination `Σ c_i M_i` of equally shaped matrices.
pub fn combine<F: Field>(coeffs: &[F], ms: &[Matrix<F>]) -> Matrix<F> {
    assert_eq!(coeffs.len(), ms.len());
    assert!(!ms.is_empty());
    let mut out = Matrix::zeros(ms[0].rows, ms[0].cols);
    for (c, m) in coeffs.iter().zip(ms) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.data.iter_mut().zip(&m.data) {
            if !x.is_zero() {
                *o += &(c.clone() * x);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::int(n)
    }

    #[test]
    fn inverse_and_det() {
        let a: QMat = Matrix::from_ints(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.det(), q(1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2));
        let s: QMat = Matrix::from_ints(&[&[1, 2], &[2, 4]]);
        assert!(s.inverse().is_none());
        assert_eq!(s.det(), q(0));
    }

    #[test]
    fn nullspace_and_solve() {
        let a: QMat = Matrix::from_ints(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(a.mul_vec(v).iter().all(|x| x.is_zero()));
        }
        let x = a.solve(&[q(6), q(12)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![q(6), q(12)]);
        assert!(a.solve(&[q(1), q(1)]).is_none());
    }

    #[test]
    fn signature_cases() {
        let h: QMat = Matrix::from_ints(&[&[0, 1], &[1, 0]]);
        assert_eq!(h.signature(), (1, 1, 0));
        let s: QMat = Matrix::from_ints(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, -3]]);
        assert_eq!(s.signature(), (1, 1, 1));
        let z: QMat = Matrix::from_ints(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]]);
        assert_eq!(z.signature(), (1, 1, 1));
    }

    #[test]
    fn span_insert_and_intersect() {
        let mut s = Span::<Q>::new(3);
        assert!(s.insert(&[q(1), q(1), q(0)]));
        assert!(s.insert(&[q(0), q(1), q(1)]));
        assert!(!s.insert(&[q(1), q(2), q(1)]));
        assert_eq!(s.len(), 2);
        let a = vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]];
        let b = vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]];
        let i = intersect(3, &a, &b);
        assert_eq!(i, vec![vec![q(0), q(1), q(0)]]);
    }

    #[test]
    fn gaussian_det() {
        let i = G::i();
        let m = Matrix::from_rows(vec![vec![G::one(), i.clone()], vec![-i, G::one()]]);
        assert_eq!(m.det(), G::zero());
    }
}
