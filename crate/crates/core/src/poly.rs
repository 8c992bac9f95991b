//! Univariate polynomials over ℚ: enough for minimal polynomials and their
//! square-free parts.

use crate::matrix::{Matrix, Span};
use crate::scalar::{Field, Q};
use std::fmt;

/// Coefficients in increasing degree, no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<Q>);

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Poly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn zero() -> Poly {
        Poly(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.0.last().cloned().unwrap_or_default()
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        Poly::new(self.0.iter().map(|c| c.clone() / &l).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0.iter().enumerate().skip(1).map(|(i, c)| c.clone() * &Q::int(i as i64)).collect(),
        )
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    let a = self.0.get(i).cloned().unwrap_or_default();
                    let b = o.0.get(i).cloned().unwrap_or_default();
                    a - &b
                })
                .collect(),
        )
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += &(a.clone() * b);
            }
        }
        Poly::new(c)
    }

    /// Quotient and remainder.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.0.clone();
        let dd = d.degree();
        let lead = d.lead();
        if r.len() < d.0.len() {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Q::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone() / &lead;
            if !c.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    r[k + j] -= &(c.clone() * dj);
                }
            }
            q[k] = c;
        }
        (Poly::new(q), Poly::new(r))
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors (monic).
    pub fn squarefree_part(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        self.divrem(&g).0.monic()
    }

    /// Irreducibility over ℝ, for a square-free polynomial: degree one, or
    /// degree two with negative discriminant.
    pub fn irreducible_over_reals(&self) -> bool {
        match self.degree() {
            1 => true,
            2 => {
                let (c, b, a) = (&self.0[0], &self.0[1], &self.0[2]);
                let disc = b.clone() * b - &(Q::int(4) * a * c);
                disc.signum() < 0
            }
            _ => false,
        }
    }

    pub fn eval_matrix(&self, m: &Matrix<Q>) -> Matrix<Q> {
        let n = m.rows;
        let mut acc = Matrix::zeros(n, n);
        for c in self.0.iter().rev() {
            acc = acc.mul(m).add(&Matrix::scalar(n, c.clone()));
        }
        acc
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}·t"),
                _ => format!("{c}·t^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Minimal polynomial of a square matrix, from the first linear dependency
/// among `I, A, A², …`.
pub fn minimal_polynomial(a: &Matrix<Q>) -> Poly {
    let n = a.rows;
    let mut span = Span::<Q>::new(n * n);
    let mut powers: Vec<Vec<Q>> = Vec::new();
    let mut p = Matrix::identity(n);
    loop {
        let v = p.flatten();
        if !span.insert(&v) {
            // solve Σ c_i A^i = A^k
            let k = powers.len();
            let m = Matrix::from_fn(n * n, k, |r, c| powers[c][r].clone());
            let c = m.solve(&v).expect("dependency must be solvable");
            let mut coeffs: Vec<Q> = c.into_iter().map(|x| -x).collect();
            coeffs.push(Q::one());
            return Poly::new(coeffs);
        }
        powers.push(v);
        p = p.mul(a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| Q::int(x)).collect())
    }

    #[test]
    fn minpoly_examples() {
        let j: Matrix<Q> = Matrix::from_ints(&[&[0, -1], &[1, 0]]);
        assert_eq!(minimal_polynomial(&j), p(&[1, 0, 1]));
        let n: Matrix<Q> = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
        assert_eq!(minimal_polynomial(&n), p(&[0, 0, 1]));
        let id: Matrix<Q> = Matrix::identity(3);
        assert_eq!(minimal_polynomial(&id), p(&[-1, 1]));
    }

    #[test]
    fn squarefree_and_irreducible() {
        // (t^2+1)^2 (t-1)
        let f = p(&[1, 0, 1]).mul(&p(&[1, 0, 1])).mul(&p(&[-1, 1]));
        let s = f.squarefree_part();
        assert_eq!(s, p(&[1, 0, 1]).mul(&p(&[-1, 1])));
        assert!(!s.irreducible_over_reals());
        assert!(p(&[1, 0, 1]).irreducible_over_reals());
        assert!(!p(&[-1, 0, 1]).irreducible_over_reals());
        assert_eq!(p(&[0, 0, 1]).squarefree_part(), p(&[0, 1]));
    }

    #[test]
    fn eval_minpoly_is_zero() {
        let a: Matrix<Q> = Matrix::from_ints(&[&[2, 1, 0], &[0, 2, 0], &[0, 0, 3]]);
        let m = minimal_polynomial(&a);
        assert_eq!(m.degree(), 3);
        assert!(m.eval_matrix(&a).is_zero());
    }
}
