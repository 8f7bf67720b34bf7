//! Small fixed-capacity linear algebra used throughout the crate.

use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};
#[allow(unused_imports)]
use num_traits::Float;


/// Largest ambient dimension an immersion may have.
pub const MAX_AMBIENT_DIM: usize = 8;

/// A vector in ℝⁿ with `n <= MAX_AMBIENT_DIM`, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct AmbientVec {
    dim: u8,
    c: [f64; MAX_AMBIENT_DIM],
}

impl AmbientVec {
    pub fn zeros(dim: usize) -> Self {
        assert!(
            dim <= MAX_AMBIENT_DIM,
            "ambient dimension {dim} exceeds {MAX_AMBIENT_DIM}"
        );
        AmbientVec {
            dim: dim as u8,
            c: [0.0; MAX_AMBIENT_DIM],
        }
    }

    pub fn from_slice(s: &[f64]) -> Self {
        let mut v = Self::zeros(s.len());
        v.c[..s.len()].copy_from_slice(s);
        v
    }

    /// Unit vector along axis `k`.
    pub fn axis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.c[k] = 1.0;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.dim as usize]
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> f64 {
        debug_assert_eq!(self.dim, o.dim);
        let mut s = 0.0;
        for k in 0..self.dim() {
            s += self.c[k] * o.c[k];
        }
        s
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for AmbientVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for AmbientVec {
    type Output = f64;
    #[inline]
    fn index(&self, k: usize) -> &f64 {
        debug_assert!(k < self.dim());
        &self.c[k]
    }
}

impl IndexMut<usize> for AmbientVec {
    #[inline]
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        debug_assert!(k < self.dim());
        &mut self.c[k]
    }
}

impl Add for AmbientVec {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl AddAssign for AmbientVec {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        debug_assert_eq!(self.dim, o.dim);
        for k in 0..self.dim() {
            self.c[k] += o.c[k];
        }
    }
}

impl Sub for AmbientVec {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self -= o;
        self
    }
}

impl SubAssign for AmbientVec {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        debug_assert_eq!(self.dim, o.dim);
        for k in 0..self.dim() {
            self.c[k] -= o.c[k];
        }
    }
}

impl Mul<f64> for AmbientVec {
    type Output = Self;
    #[inline]
    fn mul(mut self, s: f64) -> Self {
        for k in 0..self.dim() {
            self.c[k] *= s;
        }
        self
    }
}

impl Neg for AmbientVec {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// Symmetric 2×2 matrix `[[a, b], [b, c]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 {
        a: 1.0,
        b: 0.0,
        c: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Sym2 { a, b, c }
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    /// Inverse by the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Sym2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Sym2::new(self.c / d, -self.b / d, self.a / d))
    }

    /// `yᵀ S y`.
    #[inline]
    pub fn quad(&self, y: [f64; 2]) -> f64 {
        self.a * y[0] * y[0] + 2.0 * self.b * y[0] * y[1] + self.c * y[1] * y[1]
    }

    /// `S y`.
    #[inline]
    pub fn apply(&self, y: [f64; 2]) -> [f64; 2] {
        [
            self.a * y[0] + self.b * y[1],
            self.b * y[0] + self.c * y[1],
        ]
    }

    /// Entry `(i, j)` for `i, j ∈ {0, 1}`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.a,
            (1, 1) => self.c,
            _ => self.b,
        }
    }

    pub fn lerp(&self, o: &Sym2, s: f64) -> Sym2 {
        Sym2::new(
            self.a + s * (o.a - self.a),
            self.b + s * (o.b - self.b),
            self.c + s * (o.c - self.c),
        )
    }

    /// Solves `S y = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: [f64; 2]) -> Option<[f64; 2]> {
        let (m00, m01, m10, m11) = (self.a, self.b, self.b, self.c);
        let (r0, r1) = (rhs[0], rhs[1]);
        if m00.abs() >= m10.abs() {
            if m00 == 0.0 {
                return None;
            }
            let l = m10 / m00;
            let u11 = m11 - l * m01;
            if u11 == 0.0 {
                return None;
            }
            let y1 = (r1 - l * r0) / u11;
            Some([(r0 - m01 * y1) / m00, y1])
        } else {
            let l = m00 / m10;
            let u11 = m01 - l * m11;
            if u11 == 0.0 {
                return None;
            }
            let y1 = (r0 - l * r1) / u11;
            Some([(r1 - m11 * y1) / m10, y1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoted_solve_matches_inverse() {
        let s = Sym2::new(1e-9, 2.0, 3.0);
        let y = s.solve([1.0, -1.0]).unwrap();
        let back = s.apply(y);
        assert!((back[0] - 1.0).abs() < 1e-12 && (back[1] + 1.0).abs() < 1e-12);
        let inv = s.inverse().unwrap();
        let z = inv.apply([1.0, -1.0]);
        assert!((z[0] - y[0]).abs() < 1e-9 && (z[1] - y[1]).abs() < 1e-9);
    }

    #[test]
    fn singular_solve_is_none() {
        assert!(Sym2::new(1.0, 1.0, 1.0).solve([1.0, 0.0]).is_none());
    }

    #[test]
    fn vector_ops() {
        let a = AmbientVec::from_slice(&[1.0, 2.0, 2.0]);
        let b = AmbientVec::axis(3, 1);
        assert_eq!(a.norm(), 3.0);
        assert_eq!(a.dot(&b), 2.0);
        assert_eq!((a - b * 2.0).as_slice(), &[1.0, 0.0, 2.0]);
    }
}
