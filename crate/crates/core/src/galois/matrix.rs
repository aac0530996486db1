//! Dense vectors and matrices over a [`Field`], Gauss-Jordan elimination and
//! linear solving with field-operation accounting.

use std::fmt;
use std::ops::AddAssign;

use super::field::{Field, Gf};
use super::subspace::{Coset, Subspace};
use crate::error::{Error, Result};

/// Number of field multiplications and additions performed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub mul: u64,
    pub add: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.mul + self.add
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, rhs: Self) {
        self.mul += rhs.mul;
        self.add += rhs.add;
    }
}

/// A vector in F^n. The field is supplied by whatever container or operation
/// the vector is used with.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FVector(pub Vec<Gf>);

impl FVector {
    pub fn zeros(n: usize) -> Self {
        FVector(vec![Gf::ZERO; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = FVector::zeros(n);
        v.0[i] = Gf::ONE;
        v
    }

    pub fn from_reprs(reprs: &[u32]) -> Self {
        FVector(reprs.iter().map(|&r| Gf(r)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn as_slice(&self) -> &[Gf] {
        &self.0
    }

    /// Parse comma-separated representation integers, checking field and length.
    pub fn parse(field: &Field, n: usize, s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|t| {
                let r = t
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Usage(format!("bad vector entry `{}`", t.trim())))?;
                field.elem(r)
            })
            .collect::<Result<Vec<_>>>()?;
        if v.len() != n {
            return Err(Error::Usage(format!("vector `{s}` has length {}, expected {n}", v.len())));
        }
        Ok(FVector(v))
    }

    pub fn add(&self, field: &Field, other: &FVector, ops: &mut OpCount) -> FVector {
        ops.add += self.len() as u64;
        FVector(self.0.iter().zip(&other.0).map(|(&a, &b)| field.add(a, b)).collect())
    }

    pub fn sub(&self, field: &Field, other: &FVector, ops: &mut OpCount) -> FVector {
        ops.add += self.len() as u64;
        FVector(self.0.iter().zip(&other.0).map(|(&a, &b)| field.sub(a, b)).collect())
    }

    pub fn scale(&self, field: &Field, c: Gf, ops: &mut OpCount) -> FVector {
        if c == Gf::ONE {
            return self.clone();
        }
        ops.mul += self.len() as u64;
        FVector(self.0.iter().map(|&a| field.mul(c, a)).collect())
    }
}

impl fmt::Display for FVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// `y += a * x`.
#[inline]
pub(crate) fn axpy(field: &Field, y: &mut [Gf], a: Gf, x: &[Gf], ops: &mut OpCount) {
    if a.is_zero() {
        return;
    }
    ops.mul += x.len() as u64;
    ops.add += x.len() as u64;
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = field.add(*yi, field.mul(a, xi));
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct FMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Gf>,
}

impl FMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FMatrix { field: field.clone(), rows, cols, data: vec![Gf::ZERO; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = FMatrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Gf::ONE);
        }
        m
    }

    pub fn from_rows(field: &Field, cols: usize, rows: &[FVector]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Usage(format!("row of length {} in a {cols}-column matrix", r.len())));
            }
            data.extend_from_slice(&r.0);
        }
        Ok(FMatrix { field: field.clone(), rows: rows.len(), cols, data })
    }

    /// Build from representation integers, checking that each is a field element.
    pub fn from_reprs(field: &Field, rows: &[&[u32]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let vecs = rows
            .iter()
            .map(|r| Ok(FVector(r.iter().map(|&x| field.elem(x)).collect::<Result<_>>()?)))
            .collect::<Result<Vec<_>>>()?;
        FMatrix::from_rows(field, cols, &vecs)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Gf {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Gf) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Gf] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vector(&self, r: usize) -> FVector {
        FVector(self.row(r).to_vec())
    }

    pub fn to_rows(&self) -> Vec<FVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    pub fn mul(&self, other: &FMatrix, ops: &mut OpCount) -> Result<FMatrix> {
        if self.cols != other.rows || self.field != other.field {
            return Err(Error::Usage(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = FMatrix::zeros(&self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                let (start, end) = (i * out.cols, (i + 1) * out.cols);
                axpy(&self.field, &mut out.data[start..end], a, other.row(k), ops);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &FVector, ops: &mut OpCount) -> Result<FVector> {
        if v.len() != self.cols {
            return Err(Error::Usage(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        let mut out = FVector::zeros(self.rows);
        for (i, o) in out.0.iter_mut().enumerate() {
            let mut acc = Gf::ZERO;
            for (a, b) in self.row(i).iter().zip(&v.0) {
                if !a.is_zero() && !b.is_zero() {
                    acc = self.field.add(acc, self.field.mul(*a, *b));
                    ops.mul += 1;
                    ops.add += 1;
                }
            }
            *o = acc;
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Row `target -= factor * row source`, touching columns `from..`.
    fn eliminate(&mut self, target: usize, source: usize, factor: Gf, from: usize, ops: &mut OpCount) {
        let cols = self.cols;
        let (lo, hi) = (target.min(source), target.max(source));
        let (head, tail) = self.data.split_at_mut(hi * cols);
        let (t, s) = if target < source {
            (&mut head[lo * cols..(lo + 1) * cols], &tail[..cols])
        } else {
            (&mut tail[..cols], &head[lo * cols..(lo + 1) * cols])
        };
        let neg = self.field.neg(factor);
        axpy(&self.field, &mut t[from..], neg, &s[from..], ops);
    }
}

impl fmt::Debug for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  [{}]", self.row_vector(r))?;
        }
        Ok(())
    }
}

/// Result of Gauss-Jordan elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Reduced row echelon form. Pivots are taken as the first nonzero entry in
/// column order, pivot rows are scaled to 1, and zero rows sink to the bottom.
pub fn rref(m: &FMatrix, ops: &mut OpCount) -> Rref {
    let mut a = m.clone();
    let pivots = rref_in_place(&mut a, ops);
    Rref { rank: pivots.len(), matrix: a, pivots }
}

pub(crate) fn rref_in_place(a: &mut FMatrix, ops: &mut OpCount) -> Vec<usize> {
    let field = a.field.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(r) = (row..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
            continue;
        };
        a.swap_rows(r, row);
        let pv = a.get(row, col);
        if pv != Gf::ONE {
            let inv = field.checked_inv(pv).expect("pivot is nonzero");
            ops.mul += (a.cols - col + 1) as u64;
            for c in col..a.cols {
                let x = a.get(row, c);
                a.set(row, c, field.mul(inv, x));
            }
        }
        for r2 in 0..a.rows {
            if r2 != row {
                let f = a.get(r2, col);
                if !f.is_zero() {
                    a.eliminate(r2, row, f, col, ops);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// General solution of `A X = B` for a block of right-hand sides.
#[derive(Clone, Debug)]
pub struct MultiSolution {
    /// One particular solution, `A.cols` rows by `B.cols` columns.
    pub particular: FMatrix,
    /// Basis of the kernel of `A`, vectors of length `A.cols`.
    pub kernel: Vec<FVector>,
}

/// Solve `A X = B`; `None` when inconsistent.
pub fn solve_many(a: &FMatrix, b: &FMatrix, ops: &mut OpCount) -> Result<Option<MultiSolution>> {
    if a.rows != b.rows {
        return Err(Error::Usage(format!("A has {} rows but B has {}", a.rows, b.rows)));
    }
    if a.field != b.field {
        return Err(Error::Usage("A and B are over different fields".into()));
    }
    let (n, k) = (a.cols, b.cols);
    let mut aug = FMatrix::zeros(&a.field, a.rows, n + k);
    for r in 0..a.rows {
        aug.data[r * (n + k)..r * (n + k) + n].copy_from_slice(a.row(r));
        aug.data[r * (n + k) + n..(r + 1) * (n + k)].copy_from_slice(b.row(r));
    }
    let pivots = rref_in_place(&mut aug, ops);
    if pivots.iter().any(|&p| p >= n) {
        return Ok(None);
    }
    let mut particular = FMatrix::zeros(&a.field, n, k);
    for (i, &p) in pivots.iter().enumerate() {
        for t in 0..k {
            particular.set(p, t, aug.get(i, n + t));
        }
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut kernel = Vec::new();
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = FVector::zeros(n);
        v.0[free] = Gf::ONE;
        for (i, &p) in pivots.iter().enumerate() {
            v.0[p] = a.field.neg(aug.get(i, free));
        }
        kernel.push(v);
    }
    Ok(Some(MultiSolution { particular, kernel }))
}

/// Solution set of `A x = b` as a coset of F^cols, or `None` if infeasible.
pub fn solve(a: &FMatrix, b: &FVector, ops: &mut OpCount) -> Result<Option<Coset>> {
    if b.len() != a.rows {
        return Err(Error::Usage(format!("b has length {} but A has {} rows", b.len(), a.rows)));
    }
    let bm = FMatrix::from_rows(&a.field, 1, &b.0.iter().map(|&x| FVector(vec![x])).collect::<Vec<_>>())?;
    let Some(sol) = solve_many(a, &bm, ops)? else {
        return Ok(None);
    };
    let rep = FVector((0..a.cols).map(|r| sol.particular.get(r, 0)).collect());
    let space = Subspace::span(&a.field, a.cols, &sol.kernel, ops)?;
    Ok(Some(Coset::new(rep, space, ops)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, m: u32) -> Field {
        Field::gf(p, m).unwrap()
    }

    #[test]
    fn rref_of_identity_is_identity() {
        let f = gf(3, 1);
        let r = rref(&FMatrix::identity(&f, 4), &mut OpCount::default());
        assert_eq!(r.matrix, FMatrix::identity(&f, 4));
        assert_eq!(r.rank, 4);
        assert_eq!(r.pivots, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rref_equal_rows() {
        let f = gf(2, 1);
        let m = FMatrix::from_reprs(&f, &[&[1, 1], &[1, 1]]).unwrap();
        let r = rref(&m, &mut OpCount::default());
        assert_eq!(r.matrix, FMatrix::from_reprs(&f, &[&[1, 1], &[0, 0]]).unwrap());
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn solve_identity() {
        let f = gf(5, 1);
        let b = FVector::from_reprs(&[4, 0, 2]);
        let c = solve(&FMatrix::identity(&f, 3), &b, &mut OpCount::default()).unwrap().unwrap();
        assert!(c.is_point());
        assert_eq!(c.rep(), &b);
    }

    #[test]
    fn solve_parity_check() {
        let f = gf(2, 1);
        let a = FMatrix::from_reprs(&f, &[&[1, 1]]).unwrap();
        let c = solve(&a, &FVector::from_reprs(&[0]), &mut OpCount::default()).unwrap().unwrap();
        assert_eq!(c.rep(), &FVector::from_reprs(&[0, 0]));
        assert_eq!(c.space().basis(), &[FVector::from_reprs(&[1, 1])]);
    }

    #[test]
    fn solve_inconsistent() {
        let f = gf(2, 1);
        let a = FMatrix::from_reprs(&f, &[&[1, 1], &[1, 1]]).unwrap();
        assert!(solve(&a, &FVector::from_reprs(&[0, 1]), &mut OpCount::default()).unwrap().is_none());
    }

    #[test]
    fn solve_dimension_mismatch() {
        let f = gf(2, 1);
        let a = FMatrix::identity(&f, 2);
        assert!(matches!(
            solve(&a, &FVector::from_reprs(&[0]), &mut OpCount::default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn identity_solve_costs_nothing() {
        let f = gf(2, 4);
        let mut ops = OpCount::default();
        solve(&FMatrix::identity(&f, 6), &FVector::from_reprs(&[1, 2, 3, 4, 5, 6]), &mut ops).unwrap();
        assert_eq!(ops.total(), 0);
    }
}
