//! Dense matrix algebra over GF(q).
//!
//! Everything here is exact: Gaussian elimination with first-nonzero pivoting
//! and a deterministic scan order, so ranks, inverses, and solutions are
//! reproducible across runs. Matrices are tiny (at most a few hundred rows),
//! so dense row-major storage is plenty.

use crate::gf::{FieldElement, FieldModulus, GfError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("inconsistent linear system")]
    NoSolution,
    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u64),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Dense row-major matrix over GF(q). Zero-row or zero-column matrices are
/// permitted (they show up as empty observation blocks in rank accounting).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixFq {
    rows: usize,
    cols: usize,
    modulus: FieldModulus,
    data: Vec<FieldElement>,
}

impl MatrixFq {
    pub fn zero(rows: usize, cols: usize, modulus: FieldModulus) -> Self {
        MatrixFq {
            rows,
            cols,
            modulus,
            data: vec![modulus.zero(); rows * cols],
        }
    }

    pub fn identity(n: usize, modulus: FieldModulus) -> Self {
        let mut m = MatrixFq::zero(n, n, modulus);
        for i in 0..n {
            m.set(i, i, modulus.one());
        }
        m
    }

    /// Builds from explicit rows; all rows must share a length and all
    /// elements the given modulus.
    pub fn from_rows(
        rows: Vec<Vec<FieldElement>>,
        modulus: FieldModulus,
    ) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in &rows {
            if row.len() != ncols {
                return Err(LinalgError::ShapeError(format!(
                    "ragged rows: {} vs {}",
                    row.len(),
                    ncols
                )));
            }
            for &e in row {
                if e.modulus() != modulus {
                    return Err(GfError::ModulusMismatch(
                        modulus.value(),
                        e.modulus().value(),
                    )
                    .into());
                }
                data.push(e);
            }
        }
        Ok(MatrixFq {
            rows: nrows,
            cols: ncols,
            modulus,
            data,
        })
    }

    /// Convenience constructor from integer literals (reduced mod q).
    pub fn from_ints(rows: &[&[u64]], modulus: FieldModulus) -> Result<Self, LinalgError> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| modulus.element(v)).collect())
            .collect();
        MatrixFq::from_rows(rows, modulus)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> FieldModulus {
        self.modulus
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        assert!(v.modulus() == self.modulus, "mixed moduli in set");
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> MatrixFq {
        let mut t = MatrixFq::zero(self.cols, self.rows, self.modulus);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    fn check_same_modulus(&self, other: &MatrixFq) -> Result<(), LinalgError> {
        if self.modulus != other.modulus {
            return Err(
                GfError::ModulusMismatch(self.modulus.value(), other.modulus.value()).into(),
            );
        }
        Ok(())
    }

    /// Exact matrix product over GF(q).
    pub fn matmul(&self, other: &MatrixFq) -> Result<MatrixFq, LinalgError> {
        self.check_same_modulus(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::ShapeError(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = MatrixFq::zero(self.rows, other.cols, self.modulus);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = self.modulus.zero();
                for i in 0..self.cols {
                    acc = acc + self.get(r, i) * other.get(i, c);
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &MatrixFq) -> Result<MatrixFq, LinalgError> {
        self.check_same_modulus(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::ShapeError(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MatrixFq) -> Result<MatrixFq, LinalgError> {
        self.check_same_modulus(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::ShapeError(format!(
                "{}x{} - {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = *a - b;
        }
        Ok(out)
    }

    pub fn scale(&self, s: FieldElement) -> MatrixFq {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = *a * s;
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &MatrixFq) -> Result<MatrixFq, LinalgError> {
        self.check_same_modulus(other)?;
        if self.rows != other.rows {
            return Err(LinalgError::ShapeError(format!(
                "hstack rows {} vs {}",
                self.rows, other.rows
            )));
        }
        let mut out = MatrixFq::zero(self.rows, self.cols + other.cols, self.modulus);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c));
            }
        }
        Ok(out)
    }

    /// Vertical concatenation, `self` on top.
    pub fn vstack(&self, other: &MatrixFq) -> Result<MatrixFq, LinalgError> {
        self.check_same_modulus(other)?;
        if self.cols != other.cols {
            return Err(LinalgError::ShapeError(format!(
                "vstack cols {} vs {}",
                self.cols, other.cols
            )));
        }
        let mut out = MatrixFq::zero(self.rows + other.rows, self.cols, self.modulus);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out.set(self.rows + r, c, other.get(r, c));
            }
        }
        Ok(out)
    }

    /// Selected rows and columns, in the given order (indices may repeat).
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> MatrixFq {
        let mut out = MatrixFq::zero(row_idx.len(), col_idx.len(), self.modulus);
        for (r, &ri) in row_idx.iter().enumerate() {
            for (c, &ci) in col_idx.iter().enumerate() {
                out.set(r, c, self.get(ri, ci));
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data
                .swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row echelon form in place. Pivot selection is the first row
    /// with a nonzero entry, scanned column by column, so the result is
    /// deterministic. Returns the pivot column indices in order.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..self.cols {
            if pr == self.rows {
                break;
            }
            let Some(sel) = (pr..self.rows).find(|&r| !self.get(r, c).is_zero()) else {
                continue;
            };
            self.swap_rows(pr, sel);
            let inv = self.get(pr, c).inv().expect("pivot is nonzero");
            for cc in c..self.cols {
                let v = self.get(pr, cc) * inv;
                self.set(pr, cc, v);
            }
            for r in 0..self.rows {
                if r == pr || self.get(r, c).is_zero() {
                    continue;
                }
                let factor = self.get(r, c);
                for cc in c..self.cols {
                    let v = self.get(r, cc) - factor * self.get(pr, cc);
                    self.set(r, cc, v);
                }
            }
            pivots.push(c);
            pr += 1;
        }
        pivots
    }

    /// Row rank via Gaussian elimination.
    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Inverse of a square nonsingular matrix.
    pub fn invert(&self) -> Result<MatrixFq, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::ShapeError(format!(
                "invert on {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = self.hstack(&MatrixFq::identity(n, self.modulus))?;
        let pivots = aug.rref();
        if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
            return Err(LinalgError::SingularMatrix);
        }
        Ok(aug.submatrix(&(0..n).collect::<Vec<_>>(), &(n..2 * n).collect::<Vec<_>>()))
    }
}

/// One solution of `a x = rhs` together with the solution-space dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// A particular solution (free variables set to zero), `a.cols x rhs.cols`.
    pub particular: MatrixFq,
    /// Dimension of the kernel of `a`; 0 means the solution is unique.
    pub nullity: usize,
}

/// Solves `a x = rhs` exactly for every right-hand-side column.
pub fn solve(a: &MatrixFq, rhs: &MatrixFq) -> Result<Solution, LinalgError> {
    a.check_same_modulus(rhs)?;
    if a.rows != rhs.rows {
        return Err(LinalgError::ShapeError(format!(
            "solve: {} equations vs {} rhs rows",
            a.rows, rhs.rows
        )));
    }
    let mut aug = a.hstack(rhs)?;
    let pivots = aug.rref();
    // A pivot landing in the rhs block means 0 = nonzero in some equation.
    if pivots.iter().any(|&c| c >= a.cols) {
        return Err(LinalgError::NoSolution);
    }
    let mut particular = MatrixFq::zero(a.cols, rhs.cols, a.modulus);
    for (pr, &pc) in pivots.iter().enumerate() {
        for c in 0..rhs.cols {
            particular.set(pc, c, aug.get(pr, a.cols + c));
        }
    }
    Ok(Solution {
        particular,
        nullity: a.cols - pivots.len(),
    })
}

/// Vandermonde matrix: row i is `[1, x_i, x_i^2, ..., x_i^(cols-1)]`.
/// Points must be pairwise distinct so that every square submatrix of
/// interest stays invertible.
pub fn vandermonde(points: &[FieldElement], cols: usize) -> Result<MatrixFq, LinalgError> {
    let modulus = points
        .first()
        .map(|e| e.modulus())
        .ok_or_else(|| LinalgError::ShapeError("vandermonde needs at least one point".into()))?;
    for (i, a) in points.iter().enumerate() {
        if a.modulus() != modulus {
            return Err(GfError::ModulusMismatch(modulus.value(), a.modulus().value()).into());
        }
        for b in &points[i + 1..] {
            if a.value() == b.value() {
                return Err(LinalgError::DuplicatePoint(a.value()));
            }
        }
    }
    let mut m = MatrixFq::zero(points.len(), cols, modulus);
    for (r, &x) in points.iter().enumerate() {
        let mut p = modulus.one();
        for c in 0..cols {
            m.set(r, c, p);
            p = p * x;
        }
    }
    Ok(m)
}

/// Dot product of equal-length vectors.
pub fn dot(a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    assert_eq!(a.len(), b.len(), "dot of unequal lengths");
    assert!(!a.is_empty(), "dot of empty vectors");
    let mut acc = a[0].modulus().zero();
    for (&x, &y) in a.iter().zip(b) {
        acc = acc + x * y;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{uniform_sample, SeededSource};
    use proptest::prelude::*;

    fn q(v: u64) -> FieldModulus {
        FieldModulus::new(v).unwrap()
    }

    #[test]
    fn identity_times_x_is_x() {
        let f = q(7);
        let x = MatrixFq::from_ints(&[&[1, 2], &[3, 4], &[5, 6]], f).unwrap();
        let i3 = MatrixFq::identity(3, f);
        assert_eq!(i3.matmul(&x).unwrap(), x);
    }

    #[test]
    fn row_times_symmetric_message_matrix() {
        // 4x4 message matrix holding a single unit symbol at (0,0).
        let f = q(7);
        let mut m = MatrixFq::zero(4, 4, f);
        m.set(0, 0, f.one());
        let ones = MatrixFq::from_ints(&[&[1, 1, 1, 1]], f).unwrap();
        assert_eq!(
            ones.matmul(&m).unwrap(),
            MatrixFq::from_ints(&[&[1, 0, 0, 0]], f).unwrap()
        );
        // Unit symbol on the (0,1)/(1,0) symmetric pair instead.
        let mut m = MatrixFq::zero(4, 4, f);
        m.set(0, 1, f.one());
        m.set(1, 0, f.one());
        let psi3 = MatrixFq::from_ints(&[&[1, 3, 2, 6]], f).unwrap();
        assert_eq!(
            psi3.matmul(&m).unwrap(),
            MatrixFq::from_ints(&[&[3, 1, 0, 0]], f).unwrap()
        );
    }

    #[test]
    fn matmul_shape_mismatch() {
        let f = q(7);
        let a = MatrixFq::zero(2, 3, f);
        let b = MatrixFq::zero(2, 3, f);
        assert!(matches!(a.matmul(&b), Err(LinalgError::ShapeError(_))));
    }

    #[test]
    fn rank_cases() {
        let f = q(7);
        assert_eq!(MatrixFq::zero(3, 4, f).rank(), 0);
        let v = vandermonde(&[f.element(1), f.element(2), f.element(5)], 3).unwrap();
        assert_eq!(v.rank(), 3);
        let doubled = MatrixFq::from_ints(&[&[1, 2, 3], &[2, 4, 6]], f).unwrap();
        assert_eq!(doubled.rank(), 1);
        assert_eq!(MatrixFq::zero(0, 5, f).rank(), 0);
        assert_eq!(MatrixFq::zero(5, 0, f).rank(), 0);
    }

    #[test]
    fn invert_cases() {
        let f = q(7);
        let i = MatrixFq::identity(4, f);
        assert_eq!(i.invert().unwrap(), i);
        let a = MatrixFq::from_ints(&[&[1, 1], &[1, 2]], f).unwrap();
        let expect = MatrixFq::from_ints(&[&[2, 6], &[6, 1]], f).unwrap();
        let inv = a.invert().unwrap();
        assert_eq!(inv, expect);
        assert_eq!(a.matmul(&inv).unwrap(), MatrixFq::identity(2, f));
        let sing = MatrixFq::from_ints(&[&[1, 1], &[2, 2]], f).unwrap();
        assert_eq!(sing.invert(), Err(LinalgError::SingularMatrix));
    }

    #[test]
    fn solve_cases() {
        let f = q(7);
        let x = MatrixFq::from_ints(&[&[1, 2], &[3, 4], &[5, 6]], f).unwrap();
        let sol = solve(&MatrixFq::identity(3, f), &x).unwrap();
        assert_eq!(sol.particular, x);
        assert_eq!(sol.nullity, 0);

        let sol = solve(&MatrixFq::zero(2, 2, f), &MatrixFq::zero(2, 1, f)).unwrap();
        assert_eq!(sol.nullity, 2);

        let bad = solve(
            &MatrixFq::zero(2, 2, f),
            &MatrixFq::from_ints(&[&[1], &[0]], f).unwrap(),
        );
        assert_eq!(bad, Err(LinalgError::NoSolution));
    }

    #[test]
    fn solve_round_trip_f11() {
        let f = q(11);
        let mut src = SeededSource::new(7);
        let mut draw = |r: usize, c: usize| {
            let mut m = MatrixFq::zero(r, c, f);
            for i in 0..r {
                for j in 0..c {
                    m.set(i, j, uniform_sample(&mut src, f).unwrap());
                }
            }
            m
        };
        let mut a = draw(5, 5);
        while a.rank() < 5 {
            a = draw(5, 5);
        }
        let x0 = draw(5, 2);
        let rhs = a.matmul(&x0).unwrap();
        let sol = solve(&a, &rhs).unwrap();
        assert_eq!(sol.particular, x0);
        assert_eq!(sol.nullity, 0);
    }

    #[test]
    fn vandermonde_rows() {
        let f = q(7);
        let points: Vec<_> = (1..=6).map(|v| f.element(v)).collect();
        let v = vandermonde(&points, 4).unwrap();
        assert_eq!(v.row(1), MatrixFq::from_ints(&[&[1, 2, 4, 1]], f).unwrap().row(0));
        assert_eq!(v.row(2), MatrixFq::from_ints(&[&[1, 3, 2, 6]], f).unwrap().row(0));

        let single = vandermonde(&[f.element(0)], 4).unwrap();
        assert_eq!(single.row(0), MatrixFq::from_ints(&[&[1, 0, 0, 0]], f).unwrap().row(0));

        let dup = vandermonde(&[f.element(2), f.element(2)], 2);
        assert_eq!(dup, Err(LinalgError::DuplicatePoint(2)));
    }

    /// Every r-row subset of a square Vandermonde matrix, restricted to its
    /// first r columns, has full rank r. Checked exhaustively for n <= 8;
    /// this is the independence property the code constructions lean on.
    #[test]
    fn vandermonde_subset_independence_exhaustive() {
        for n in 2usize..=8 {
            let f = q(crate::gf::next_prime_at_least(n as u64));
            let points: Vec<_> = (0..n as u64).map(|v| f.element(v)).collect();
            let v = vandermonde(&points, n).unwrap();
            for mask in 1u32..(1 << n) {
                let rows: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                let r = rows.len();
                let cols: Vec<usize> = (0..r).collect();
                assert_eq!(
                    v.submatrix(&rows, &cols).rank(),
                    r,
                    "n={n} rows={rows:?}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(
            qv in prop::sample::select(vec![2u64, 3, 7, 11]),
            rows in 1usize..6,
            cols in 1usize..6,
            seed in any::<u64>(),
        ) {
            let f = q(qv);
            let mut src = SeededSource::new(seed);
            let mut m = MatrixFq::zero(rows, cols, f);
            for r in 0..rows {
                for c in 0..cols {
                    m.set(r, c, uniform_sample(&mut src, f).unwrap());
                }
            }
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn invert_round_trips(
            qv in prop::sample::select(vec![3u64, 7, 11, 257]),
            n in 1usize..5,
            seed in any::<u64>(),
        ) {
            let f = q(qv);
            let mut src = SeededSource::new(seed);
            let mut m = MatrixFq::zero(n, n, f);
            for r in 0..n {
                for c in 0..n {
                    m.set(r, c, uniform_sample(&mut src, f).unwrap());
                }
            }
            if m.rank() == n {
                let inv = m.invert().unwrap();
                prop_assert_eq!(m.matmul(&inv).unwrap(), MatrixFq::identity(n, f));
                prop_assert_eq!(inv.matmul(&m).unwrap(), MatrixFq::identity(n, f));
            } else {
                prop_assert_eq!(m.invert(), Err(LinalgError::SingularMatrix));
            }
        }
    }
}
