//! Small-matrix linear algebra over GF(q), for dimension 2 and 3.

use std::fmt;

use thiserror::Error;

use crate::ff::{Fe, FieldError, FieldSpec};
use crate::geometry::ProjLine;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unsupported dimension {0} (only 2 and 3)")]
    UnsupportedDimension(usize),
    #[error("cannot parse `{0}`")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A column vector of length 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vect {
    n: usize,
    c: [Fe; 3],
}

impl Vect {
    pub fn new(coords: &[Fe]) -> Self {
        assert!(matches!(coords.len(), 2 | 3), "vectors have length 2 or 3");
        let mut c = [Fe::ZERO; 3];
        c[..coords.len()].copy_from_slice(coords);
        Vect { n: coords.len(), c }
    }

    pub fn xy(x: u32, y: u32) -> Self {
        Vect::new(&[Fe(x), Fe(y)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[Fe] {
        &self.c[..self.n]
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|c| c.is_zero())
    }

    /// Lexicographic code with the first coordinate most significant.
    pub fn code(&self, q: u32) -> u32 {
        self.coords().iter().fold(0, |acc, c| acc * q + c.0)
    }

    pub fn from_code(mut code: u32, n: usize, q: u32) -> Self {
        let mut c = [Fe::ZERO; 3];
        for i in (0..n).rev() {
            c[i] = Fe(code % q);
            code /= q;
        }
        Vect { n, c }
    }

    pub fn add(&self, other: &Vect, f: &FieldSpec) -> Vect {
        let mut out = *self;
        for i in 0..self.n {
            out.c[i] = f.add(self.c[i], other.c[i]);
        }
        out
    }

    pub fn sub(&self, other: &Vect, f: &FieldSpec) -> Vect {
        let mut out = *self;
        for i in 0..self.n {
            out.c[i] = f.sub(self.c[i], other.c[i]);
        }
        out
    }

    pub fn scale(&self, s: Fe, f: &FieldSpec) -> Vect {
        let mut out = *self;
        for i in 0..self.n {
            out.c[i] = f.mul(s, self.c[i]);
        }
        out
    }

    /// Scales so the first nonzero coordinate is 1. Zero stays zero.
    pub fn normalized(&self, f: &FieldSpec) -> Vect {
        match self.coords().iter().find(|c| !c.is_zero()) {
            Some(&lead) => self.scale(f.inv(lead).expect("nonzero lead"), f),
            None => *self,
        }
    }

    pub fn parse(s: &str) -> Result<Vect, LinalgError> {
        let coords: Vec<u32> =
            serde_json::from_str(s.trim()).map_err(|_| LinalgError::Parse(s.to_string()))?;
        if !matches!(coords.len(), 2 | 3) {
            return Err(LinalgError::Parse(s.to_string()));
        }
        Ok(Vect::new(&coords.into_iter().map(Fe).collect::<Vec<_>>()))
    }
}

impl fmt::Display for Vect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Nonzero vectors of GF(q)^n in ascending code order.
pub fn nonzero_vectors(n: usize, q: u32) -> Vec<Vect> {
    (1..q.pow(n as u32))
        .map(|code| Vect::from_code(code, n, q))
        .collect()
}

/// An n×n matrix (n ∈ {2, 3}), row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat {
    n: usize,
    e: [Fe; 9],
}

impl Mat {
    pub fn new(n: usize, entries: &[Fe]) -> Result<Mat, LinalgError> {
        if !matches!(n, 2 | 3) {
            return Err(LinalgError::UnsupportedDimension(n));
        }
        if entries.len() != n * n {
            return Err(LinalgError::DimensionMismatch(entries.len(), n * n));
        }
        let mut e = [Fe::ZERO; 9];
        e[..n * n].copy_from_slice(entries);
        Ok(Mat { n, e })
    }

    /// 2×2 matrix from row-major indices.
    pub fn m2(a: u32, b: u32, c: u32, d: u32) -> Mat {
        Mat::new(2, &[Fe(a), Fe(b), Fe(c), Fe(d)]).unwrap()
    }

    pub fn identity(n: usize) -> Mat {
        let mut e = [Fe::ZERO; 9];
        for i in 0..n {
            e[i * n + i] = Fe::ONE;
        }
        Mat { n, e }
    }

    pub fn scalar(n: usize, s: Fe) -> Mat {
        let mut e = [Fe::ZERO; 9];
        for i in 0..n {
            e[i * n + i] = s;
        }
        Mat { n, e }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Fe] {
        &self.e[..self.n * self.n]
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Fe {
        self.e[r * self.n + c]
    }

    /// Row-major lexicographic code (first entry most significant).
    pub fn code(&self, q: u32) -> u32 {
        self.entries().iter().fold(0, |acc, c| acc * q + c.0)
    }

    pub fn from_code(mut code: u32, n: usize, q: u32) -> Mat {
        let mut e = [Fe::ZERO; 9];
        for i in (0..n * n).rev() {
            e[i] = Fe(code % q);
            code /= q;
        }
        Mat { n, e }
    }

    pub fn is_scalar(&self) -> bool {
        let d = self.at(0, 0);
        (0..self.n).all(|r| (0..self.n).all(|c| self.at(r, c) == if r == c { d } else { Fe::ZERO }))
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat::identity(self.n)
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut e = [Fe::ZERO; 9];
        for r in 0..n {
            for c in 0..n {
                e[c * n + r] = self.at(r, c);
            }
        }
        Mat { n, e }
    }

    pub fn mul(&self, other: &Mat, f: &FieldSpec) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut e = [Fe::ZERO; 9];
        for r in 0..n {
            for c in 0..n {
                let mut acc = Fe::ZERO;
                for k in 0..n {
                    acc = f.add(acc, f.mul(self.at(r, k), other.at(k, c)));
                }
                e[r * n + c] = acc;
            }
        }
        Mat { n, e }
    }

    pub fn mul_vec(&self, v: &Vect, f: &FieldSpec) -> Vect {
        debug_assert_eq!(self.n, v.n);
        let mut c = [Fe::ZERO; 3];
        for (r, out) in c.iter_mut().enumerate().take(self.n) {
            let mut acc = Fe::ZERO;
            for k in 0..self.n {
                acc = f.add(acc, f.mul(self.at(r, k), v.c[k]));
            }
            *out = acc;
        }
        Vect { n: self.n, c }
    }

    pub fn sub(&self, other: &Mat, f: &FieldSpec) -> Mat {
        let mut out = *self;
        for i in 0..self.n * self.n {
            out.e[i] = f.sub(self.e[i], other.e[i]);
        }
        out
    }

    pub fn scale(&self, s: Fe, f: &FieldSpec) -> Mat {
        let mut out = *self;
        for i in 0..self.n * self.n {
            out.e[i] = f.mul(s, self.e[i]);
        }
        out
    }

    pub fn trace(&self, f: &FieldSpec) -> Fe {
        (0..self.n).fold(Fe::ZERO, |acc, i| f.add(acc, self.at(i, i)))
    }

    pub fn det(&self, f: &FieldSpec) -> Fe {
        match self.n {
            2 => f.sub(
                f.mul(self.at(0, 0), self.at(1, 1)),
                f.mul(self.at(0, 1), self.at(1, 0)),
            ),
            _ => (0..3).fold(Fe::ZERO, |acc, c| {
                let term = f.mul(self.at(0, c), self.cofactor(0, c, f));
                f.add(acc, term)
            }),
        }
    }

    /// Signed cofactor C_{rc} of a 3×3 matrix.
    fn cofactor(&self, r: usize, c: usize, f: &FieldSpec) -> Fe {
        let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
        let minor = f.sub(
            f.mul(self.at(rows[0], cols[0]), self.at(rows[1], cols[1])),
            f.mul(self.at(rows[0], cols[1]), self.at(rows[1], cols[0])),
        );
        if (r + c).is_multiple_of(2) {
            minor
        } else {
            f.neg(minor)
        }
    }

    pub fn inv(&self, f: &FieldSpec) -> Result<Mat, LinalgError> {
        let det = self.det(f);
        let d_inv = f.inv(det).map_err(|_| LinalgError::SingularMatrix)?;
        let n = self.n;
        let mut e = [Fe::ZERO; 9];
        match n {
            2 => {
                e[0] = self.at(1, 1);
                e[1] = f.neg(self.at(0, 1));
                e[2] = f.neg(self.at(1, 0));
                e[3] = self.at(0, 0);
            }
            _ => {
                for r in 0..3 {
                    for c in 0..3 {
                        // adjugate is the transposed cofactor matrix
                        e[r * 3 + c] = self.cofactor(c, r, f);
                    }
                }
            }
        }
        Ok(Mat { n, e }.scale(d_inv, f))
    }

    /// Characteristic polynomial det(λI − A), coefficients low degree first.
    pub fn char_poly(&self, f: &FieldSpec) -> Vec<Fe> {
        let tr = self.trace(f);
        let det = self.det(f);
        match self.n {
            2 => vec![det, f.neg(tr), Fe::ONE],
            _ => {
                // sum of principal 2×2 minors
                let minors = (0..3).fold(Fe::ZERO, |acc, i| f.add(acc, self.cofactor(i, i, f)));
                vec![f.neg(det), minors, f.neg(tr), Fe::ONE]
            }
        }
    }

    /// True iff 1 is an eigenvalue, i.e. the matrix fixes some nonzero vector.
    pub fn has_eigenvalue_one(&self, f: &FieldSpec) -> bool {
        match self.n {
            2 => f.add(f.sub(Fe::ONE, self.trace(f)), self.det(f)).is_zero(),
            _ => f.poly_eval(&self.char_poly(f), Fe::ONE).is_zero(),
        }
    }

    /// All nonzero vectors v with Av = v, in ascending code order.
    pub fn fixed_points(&self, f: &FieldSpec) -> Vec<Vect> {
        nonzero_vectors(self.n, f.q())
            .into_iter()
            .filter(|v| self.mul_vec(v, f) == *v)
            .collect()
    }

    /// Distinct eigenvalues in GF(q), ascending.
    pub fn eigenvalues(&self, f: &FieldSpec) -> Vec<Fe> {
        let mut roots = f
            .poly_roots(&self.char_poly(f))
            .expect("characteristic polynomial is monic");
        roots.dedup();
        roots
    }

    /// One entry per distinct eigenvalue with its eigenline (n = 2).
    pub fn eigen_lines(&self, f: &FieldSpec) -> Vec<(Fe, EigenSpace)> {
        assert_eq!(self.n, 2, "eigen_lines is defined for 2×2 matrices");
        if self.is_scalar() {
            return vec![(self.at(0, 0), EigenSpace::Whole)];
        }
        self.eigenvalues(f)
            .into_iter()
            .map(|lambda| {
                let shifted = self.sub(&Mat::scalar(2, lambda), f);
                // A − λI has rank one; its kernel is orthogonal to any nonzero row.
                let (r0, r1) = if !shifted.at(0, 0).is_zero() || !shifted.at(0, 1).is_zero() {
                    (shifted.at(0, 0), shifted.at(0, 1))
                } else {
                    (shifted.at(1, 0), shifted.at(1, 1))
                };
                let dir = Vect::new(&[f.neg(r1), r0]);
                (lambda, EigenSpace::Line(ProjLine::from_dir(&dir, f)))
            })
            .collect()
    }

    /// Two distinct eigenvalues in GF(q), or scalar.
    pub fn is_diagonalizable(&self, f: &FieldSpec) -> bool {
        self.is_scalar() || self.eigenvalues(f).len() == self.n
    }

    /// P⁻¹AP.
    pub fn conjugate(&self, p: &Mat, f: &FieldSpec) -> Result<Mat, LinalgError> {
        Ok(p.inv(f)?.mul(self, f).mul(p, f))
    }

    /// Parses `[[a,b],[c,d]]` (or the 3×3 analogue) with entries as field indices.
    pub fn parse(s: &str, f: &FieldSpec) -> Result<Mat, LinalgError> {
        let rows: Vec<Vec<u32>> =
            serde_json::from_str(s.trim()).map_err(|_| LinalgError::Parse(s.to_string()))?;
        let n = rows.len();
        if !matches!(n, 2 | 3) || rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::Parse(s.to_string()));
        }
        let entries = rows
            .into_iter()
            .flatten()
            .map(|x| f.elem(x))
            .collect::<Result<Vec<_>, _>>()?;
        Mat::new(n, &entries)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|r| {
                let row: Vec<String> = (0..self.n).map(|c| self.at(r, c).to_string()).collect();
                format!("[{}]", row.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// An eigenspace of a 2×2 matrix: a line, or the whole plane for scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenSpace {
    Line(ProjLine),
    Whole,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u32) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    fn all_invertible(f: &FieldSpec) -> Vec<Mat> {
        (0..f.q().pow(4))
            .map(|c| Mat::from_code(c, 2, f.q()))
            .filter(|m| !m.det(f).is_zero())
            .collect()
    }

    #[test]
    fn basic_operation_examples() {
        let f5 = gf(5);
        let a = Mat::m2(2, 1, 0, 1);
        assert_eq!(a.inv(&f5).unwrap(), Mat::m2(3, 2, 0, 1));
        assert_eq!(Mat::identity(2).mul(&a, &f5), a);
        assert_eq!(Mat::m2(0, 1, 1, 2).det(&gf(3)), Fe(2));
        assert_eq!(
            Mat::m2(1, 2, 2, 4).inv(&f5),
            Err(LinalgError::SingularMatrix)
        );
    }

    #[test]
    fn char_poly_examples() {
        let f5 = gf(5);
        assert_eq!(
            Mat::m2(2, 1, 0, 1).char_poly(&f5),
            vec![Fe(2), Fe(2), Fe(1)]
        );
        assert_eq!(Mat::identity(2).char_poly(&f5), vec![Fe(1), Fe(3), Fe(1)]);
        assert_eq!(
            Mat::m2(0, 1, 1, 2).char_poly(&gf(3)),
            vec![Fe(2), Fe(1), Fe(1)]
        );
    }

    #[test]
    fn eigenvalue_one_examples() {
        assert!(Mat::m2(2, 1, 0, 1).has_eigenvalue_one(&gf(5)));
        assert!(Mat::identity(2).has_eigenvalue_one(&gf(5)));
        assert!(!Mat::m2(0, 1, 1, 2).has_eigenvalue_one(&gf(3)));
    }

    #[test]
    fn fixed_point_examples() {
        let f5 = gf(5);
        let fixed = Mat::m2(1, 1, 0, 1).fixed_points(&f5);
        let expected: Vec<Vect> = (1..5).map(|x| Vect::xy(x, 0)).collect();
        assert_eq!(fixed, expected);
        assert_eq!(Mat::identity(2).fixed_points(&gf(3)).len(), 8);
        assert!(Mat::m2(0, 1, 1, 2).fixed_points(&gf(3)).is_empty());
    }

    #[test]
    fn eigen_line_examples() {
        let f5 = gf(5);
        let lines = Mat::m2(2, 1, 0, 1).eigen_lines(&f5);
        assert_eq!(
            lines,
            vec![
                (
                    Fe(1),
                    EigenSpace::Line(ProjLine::from_dir(&Vect::xy(1, 4), &f5))
                ),
                (
                    Fe(2),
                    EigenSpace::Line(ProjLine::from_dir(&Vect::xy(1, 0), &f5))
                ),
            ]
        );
        assert_eq!(
            Mat::m2(1, 1, 0, 1).eigen_lines(&f5),
            vec![(
                Fe(1),
                EigenSpace::Line(ProjLine::from_dir(&Vect::xy(1, 0), &f5))
            )]
        );
        assert_eq!(
            Mat::identity(2).eigen_lines(&f5),
            vec![(Fe(1), EigenSpace::Whole)]
        );
    }

    #[test]
    fn diagonalizable_examples() {
        let f5 = gf(5);
        assert!(Mat::m2(2, 1, 0, 1).is_diagonalizable(&f5));
        assert!(!Mat::m2(1, 1, 0, 1).is_diagonalizable(&f5));
        assert!(Mat::identity(2).is_diagonalizable(&f5));
    }

    #[test]
    fn conjugate_examples() {
        let f3 = gf(3);
        let a = Mat::m2(2, 1, 0, 1);
        let p = Mat::m2(0, 1, 1, 0);
        assert_eq!(a.conjugate(&Mat::identity(2), &f3).unwrap(), a);
        assert_eq!(
            Mat::identity(2).conjugate(&p, &f3).unwrap(),
            Mat::identity(2)
        );
        assert_eq!(
            Mat::m2(1, 1, 0, 1).conjugate(&p, &f3).unwrap(),
            Mat::m2(1, 0, 1, 1)
        );
        assert_eq!(
            a.conjugate(&Mat::m2(1, 1, 1, 1), &f3),
            Err(LinalgError::SingularMatrix)
        );
    }

    #[test]
    fn inverse_and_fixed_point_counts_exhaustive() {
        for q in [2, 3, 4, 5, 7] {
            let f = gf(q);
            for a in all_invertible(&f) {
                assert!(a.inv(&f).unwrap().mul(&a, &f).is_identity());
                let fixed = a.fixed_points(&f).len() as u32;
                if a.is_identity() {
                    assert_eq!(fixed, q * q - 1);
                } else if a.has_eigenvalue_one(&f) {
                    assert_eq!(fixed, q - 1);
                } else {
                    assert_eq!(fixed, 0);
                }
            }
        }
    }

    #[test]
    fn eigen_lines_are_eigenvectors() {
        for q in [3, 4, 5] {
            let f = gf(q);
            for a in all_invertible(&f) {
                let cp = a.char_poly(&f);
                for (lambda, space) in a.eigen_lines(&f) {
                    assert!(f.poly_eval(&cp, lambda).is_zero());
                    if let EigenSpace::Line(l) = space {
                        let v = *l.dir();
                        assert_eq!(a.mul_vec(&v, &f), v.scale(lambda, &f));
                    }
                }
            }
        }
    }

    #[test]
    fn conjugation_transports_fixed_points() {
        let f = gf(5);
        let group = all_invertible(&f);
        let conjugators = [
            Mat::m2(0, 1, 1, 0),
            Mat::m2(2, 3, 1, 1),
            Mat::m2(1, 1, 0, 3),
        ];
        for a in group.iter().step_by(7) {
            for p in &conjugators {
                let pinv = p.inv(&f).unwrap();
                let mut expected: Vec<u32> = a
                    .fixed_points(&f)
                    .iter()
                    .map(|v| pinv.mul_vec(v, &f).code(5))
                    .collect();
                expected.sort_unstable();
                let got: Vec<u32> = a
                    .conjugate(p, &f)
                    .unwrap()
                    .fixed_points(&f)
                    .iter()
                    .map(|v| v.code(5))
                    .collect();
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn three_by_three() {
        let f2 = gf(2);
        let a = Mat::new(3, &[1, 1, 0, 0, 1, 1, 1, 0, 0].map(Fe)).unwrap();
        assert_eq!(a.det(&f2), Fe(1));
        assert!(a.inv(&f2).unwrap().mul(&a, &f2).is_identity());
        let fixed = a.fixed_points(&f2).len();
        assert_eq!(fixed > 0, a.has_eigenvalue_one(&f2));
        let singer = Mat::new(3, &[0, 0, 1, 1, 0, 1, 0, 1, 0].map(Fe)).unwrap();
        assert!(!singer.has_eigenvalue_one(&f2));
    }

    #[test]
    fn text_format() {
        let f5 = gf(5);
        let a = Mat::parse("[[2,1],[0,1]]", &f5).unwrap();
        assert_eq!(a, Mat::m2(2, 1, 0, 1));
        assert_eq!(a.to_string(), "[[2,1],[0,1]]");
        assert!(Mat::parse("[[2,1],[0,5]]", &f5).is_err());
        assert!(Mat::parse("[[2,1,0],[0,1]]", &f5).is_err());
        assert_eq!(Vect::parse("[1,4]").unwrap(), Vect::xy(1, 4));
    }
}
