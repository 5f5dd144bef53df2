//! Dense bivariate polynomials.
//!
//! Everything downstream (the surface, its curvature numerator, the vertex
//! condition) is a polynomial in `x, y`, so a small dense representation with
//! exact term-wise arithmetic is enough. Coefficients are stored row-major by
//! the power of `x`: `coeffs[i * (degree + 1) + j]` multiplies `x^i y^j`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, PartialEq)]
pub struct Poly2 {
    degree: usize,
    coeffs: Vec<f64>,
}

#[inline]
fn falling(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, m| acc * (n - m) as f64)
}

impl Poly2 {
    /// The zero polynomial with room for terms up to total degree `degree`.
    pub fn zero(degree: usize) -> Self {
        Poly2 {
            degree,
            coeffs: vec![0.0; (degree + 1) * (degree + 1)],
        }
    }

    /// Builds `Σ c x^i y^j` from `(i, j, c)` triples; repeated monomials add up.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let degree = terms.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0);
        let mut p = Poly2::zero(degree);
        for &(i, j, c) in terms {
            p.coeffs[i * (degree + 1) + j] += c;
        }
        p
    }

    /// Declared degree bound (not necessarily attained).
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.degree + 1) + j
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.degree {
            0.0
        } else {
            self.coeffs[self.idx(i, j)]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, c: f64) {
        if i + j > self.degree {
            self.grow(i + j);
        }
        let k = self.idx(i, j);
        self.coeffs[k] = c;
    }

    fn grow(&mut self, degree: usize) {
        let mut p = Poly2::zero(degree);
        for (i, j, c) in self.terms() {
            p.coeffs[i * (degree + 1) + j] = c;
        }
        *self = p;
    }

    /// Nonzero terms as `(i, j, c)`, ordered by `i` then `j`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let d = self.degree;
        (0..=d).flat_map(move |i| {
            (0..=d - i).filter_map(move |j| {
                let c = self.coeffs[i * (d + 1) + j];
                (c != 0.0).then_some((i, j, c))
            })
        })
    }

    /// Largest total degree carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        self.terms().map(|(i, j, _)| i + j).max().unwrap_or(0)
    }

    /// Smallest total degree whose homogeneous part is not negligible
    /// relative to the largest coefficient.
    pub fn lowest_degree(&self, rel_tol: f64) -> Option<usize> {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return None;
        }
        (0..=self.degree).find(|&d| (0..=d).any(|i| self.coeff(i, d - i).abs() > rel_tol * scale))
    }

    /// Homogeneous part of total degree `d`.
    pub fn homogeneous_part(&self, d: usize) -> Poly2 {
        let mut p = Poly2::zero(d);
        for i in 0..=d {
            p.set_coeff(i, d - i, self.coeff(i, d - i));
        }
        p
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = self.degree;
        let mut acc = 0.0;
        for i in (0..=d).rev() {
            let row = &self.coeffs[i * (d + 1)..i * (d + 1) + (d - i) + 1];
            let mut inner = 0.0;
            for &c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }

    /// Value of `∂^(dx+dy) p / ∂x^dx ∂y^dy` at `(x, y)` without building the
    /// derivative polynomial.
    pub fn eval_derivative(&self, x: f64, y: f64, dx: usize, dy: usize) -> f64 {
        let d = self.degree;
        if dx + dy > d {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in (dx..=d).rev() {
            let mut inner = 0.0;
            for j in (dy..=d - i).rev() {
                inner = inner * y + self.coeffs[i * (d + 1) + j] * falling(j, dy);
            }
            acc = acc * x + inner * falling(i, dx);
        }
        acc
    }

    pub fn derivative(&self, dx: usize, dy: usize) -> Poly2 {
        if dx + dy > self.degree {
            return Poly2::zero(0);
        }
        let nd = self.degree - dx - dy;
        let mut p = Poly2::zero(nd);
        for (i, j, c) in self.terms() {
            if i >= dx && j >= dy {
                p.coeffs[(i - dx) * (nd + 1) + (j - dy)] += c * falling(i, dx) * falling(j, dy);
            }
        }
        p
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        Poly2 {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly2 {
        let mut out = Poly2::from_terms(&[(0, 0, 1.0)]);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// `p(m00 x + m01 y, m10 x + m11 y)`; linear substitutions keep every
    /// homogeneous part inside its own degree.
    pub fn compose_linear(&self, m: [[f64; 2]; 2]) -> Poly2 {
        let u = Poly2::from_terms(&[(1, 0, m[0][0]), (0, 1, m[0][1])]);
        let v = Poly2::from_terms(&[(1, 0, m[1][0]), (0, 1, m[1][1])]);
        let d = self.degree;
        let upow: Vec<Poly2> = (0..=d as u32).map(|n| u.pow(n)).collect();
        let vpow: Vec<Poly2> = (0..=d as u32).map(|n| v.pow(n)).collect();
        let mut out = Poly2::zero(d);
        for (i, j, c) in self.terms() {
            let t = (&upow[i] * &vpow[j]).scale(c);
            out = &out + &t;
        }
        out
    }

    /// Drops coefficients with magnitude at most `tol`.
    pub fn chop(&self, tol: f64) -> Poly2 {
        Poly2 {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| if c.abs() <= tol { 0.0 } else { c })
                .collect(),
        }
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, j, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if i > 0 {
                write!(f, "·x^{i}")?;
            }
            if j > 0 {
                write!(f, "·y^{j}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let d = self.degree.max(rhs.degree);
        let mut p = Poly2::zero(d);
        for (i, j, c) in self.terms().chain(rhs.terms()) {
            p.coeffs[i * (d + 1) + j] += c;
        }
        p
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self + &(-rhs)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let d = self.degree + rhs.degree;
        let mut p = Poly2::zero(d);
        let lhs: Vec<_> = self.terms().collect();
        let rhs: Vec<_> = rhs.terms().collect();
        for &(i, j, a) in &lhs {
            for &(k, l, b) in &rhs {
                p.coeffs[(i + k) * (d + 1) + (j + l)] += a * b;
            }
        }
        p
    }
}
