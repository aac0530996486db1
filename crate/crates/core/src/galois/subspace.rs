//! Subspaces of F^n in canonical RREF form and their affine translates.
//!
//! Both types are canonical: a [`Subspace`] keeps its basis in reduced row
//! echelon form with ascending pivots, and a [`Coset`] keeps its representative
//! reduced against that basis (zero in every pivot column). Two values are
//! therefore equal as sets iff they are equal as Rust values.

use std::fmt;

use super::field::{Field, Gf};
use super::matrix::{axpy, rref_in_place, solve, FMatrix, FVector, OpCount};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    field: Field,
    n: usize,
    basis: Vec<FVector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: &Field, n: usize) -> Self {
        Subspace { field: field.clone(), n, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(field: &Field, n: usize) -> Self {
        Subspace {
            field: field.clone(),
            n,
            basis: (0..n).map(|i| FVector::unit(n, i)).collect(),
            pivots: (0..n).collect(),
        }
    }

    /// The span of arbitrary vectors of length `n`.
    pub fn span(field: &Field, n: usize, vectors: &[FVector], ops: &mut OpCount) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::Usage(format!("vector of length {} in F^{n}", v.len())));
        }
        let mut m = FMatrix::from_rows(field, n, vectors)?;
        let pivots = rref_in_place(&mut m, ops);
        let basis = (0..pivots.len()).map(|r| m.row_vector(r)).collect();
        Ok(Subspace { field: field.clone(), n, basis, pivots })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.n
    }

    /// Number of vectors, or `None` if it does not fit in a `u64`.
    pub fn size(&self) -> Option<u64> {
        (self.field.order() as u64).checked_pow(self.dim() as u32)
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.n != other.n || self.field != other.field {
            return Err(Error::Usage(format!(
                "subspaces of {}^{} and {}^{} are not comparable",
                self.field, self.n, other.field, other.n
            )));
        }
        Ok(())
    }

    /// Zero out the pivot coordinates of `v` using the basis rows.
    pub fn reduce(&self, v: &FVector, ops: &mut OpCount) -> FVector {
        let mut out = v.clone();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let c = out.0[p];
            if !c.is_zero() {
                let neg = self.field.neg(c);
                axpy(&self.field, &mut out.0, neg, &row.0, ops);
            }
        }
        out
    }

    pub fn contains(&self, v: &FVector, ops: &mut OpCount) -> bool {
        self.reduce(v, ops).is_zero()
    }

    pub fn is_subspace_of(&self, other: &Subspace, ops: &mut OpCount) -> bool {
        self.n == other.n
            && self.dim() <= other.dim()
            && self.basis.iter().all(|b| other.contains(b, ops))
    }

    /// Smallest subspace containing both.
    pub fn sum(&self, other: &Subspace, ops: &mut OpCount) -> Result<Subspace> {
        Subspace::sum_all(&self.field, self.n, [self, other], ops)
    }

    /// Smallest subspace containing every input; `{0}` for an empty list.
    pub fn sum_all<'a>(
        field: &Field,
        n: usize,
        spaces: impl IntoIterator<Item = &'a Subspace>,
        ops: &mut OpCount,
    ) -> Result<Subspace> {
        let spaces: Vec<&Subspace> = spaces.into_iter().collect();
        if let Some(s) = spaces.iter().find(|s| s.n != n || s.field != *field) {
            return Err(Error::Usage(format!("subspace of {}^{} in a sum over {field}^{n}", s.field, s.n)));
        }
        let mut rows = Vec::new();
        let mut count = 0;
        let mut last = None;
        for s in spaces {
            if s.is_full() {
                return Ok(Subspace::full(field, n));
            }
            if s.dim() > 0 {
                count += 1;
                last = Some(s);
                rows.extend(s.basis.iter().cloned());
            }
        }
        match (count, last) {
            (0, _) => Ok(Subspace::zero(field, n)),
            (1, Some(s)) => Ok(s.clone()),
            _ => Subspace::span(field, n, &rows, ops),
        }
    }

    /// Intersection by the Zassenhaus algorithm: eliminate `[a | a]` stacked
    /// on `[b | 0]`; rows whose left half vanishes span the intersection.
    pub fn intersect(&self, other: &Subspace, ops: &mut OpCount) -> Result<Subspace> {
        self.check_compatible(other)?;
        if self.is_full() {
            return Ok(other.clone());
        }
        if other.is_full() {
            return Ok(self.clone());
        }
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(&self.field, self.n));
        }
        let n = self.n;
        let mut rows = Vec::with_capacity(self.dim() + other.dim());
        for a in &self.basis {
            let mut r = a.0.clone();
            r.extend_from_slice(&a.0);
            rows.push(FVector(r));
        }
        for b in &other.basis {
            let mut r = b.0.clone();
            r.extend(std::iter::repeat_n(Gf::ZERO, n));
            rows.push(FVector(r));
        }
        let mut m = FMatrix::from_rows(&self.field, 2 * n, &rows)?;
        let pivots = rref_in_place(&mut m, ops);
        let found: Vec<FVector> = pivots
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= n)
            .map(|(r, _)| FVector(m.row(r)[n..].to_vec()))
            .collect();
        // The right halves of those rows are already in RREF.
        let pivots = found.iter().map(|v| v.0.iter().position(|x| !x.is_zero()).unwrap()).collect();
        Ok(Subspace { field: self.field.clone(), n, basis: found, pivots })
    }

    /// Image under the linear map `v -> m v` (`m` is `out x n`).
    pub fn map(&self, m: &FMatrix, ops: &mut OpCount) -> Result<Subspace> {
        if m.cols() != self.n {
            return Err(Error::Usage(format!("map with {} columns applied to F^{}", m.cols(), self.n)));
        }
        let images = self.basis.iter().map(|b| m.mul_vec(b, ops)).collect::<Result<Vec<_>>>()?;
        Subspace::span(&self.field, m.rows(), &images, ops)
    }

    /// Every vector of the subspace, in lexicographic order of coefficients.
    pub fn enumerate(&self) -> Vec<FVector> {
        let q = self.field.order();
        let mut out = vec![FVector::zeros(self.n)];
        for b in &self.basis {
            let mut next = Vec::with_capacity(out.len() * q as usize);
            for v in &out {
                for c in self.field.elements() {
                    let mut w = v.clone();
                    axpy(&self.field, &mut w.0, c, &b.0, &mut OpCount::default());
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("span{")?;
        for (i, b) in self.basis.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "({b})")?;
        }
        f.write_str("}")
    }
}

/// The affine set `rep + space`.
#[derive(Clone, PartialEq, Eq)]
pub struct Coset {
    rep: FVector,
    space: Subspace,
}

impl Coset {
    /// Canonicalize `rep + space`.
    pub fn new(rep: FVector, space: Subspace, ops: &mut OpCount) -> Result<Self> {
        if rep.len() != space.n {
            return Err(Error::Usage(format!("representative of length {} in F^{}", rep.len(), space.n)));
        }
        let rep = space.reduce(&rep, ops);
        Ok(Coset { rep, space })
    }

    pub fn point(field: &Field, v: FVector) -> Self {
        let n = v.len();
        Coset { rep: v, space: Subspace::zero(field, n) }
    }

    pub fn full(field: &Field, n: usize) -> Self {
        Coset { rep: FVector::zeros(n), space: Subspace::full(field, n) }
    }

    pub fn linear(space: Subspace) -> Self {
        Coset { rep: FVector::zeros(space.n), space }
    }

    pub fn rep(&self) -> &FVector {
        &self.rep
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn field(&self) -> &Field {
        &self.space.field
    }

    pub fn ambient(&self) -> usize {
        self.space.n
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_point(&self) -> bool {
        self.space.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.space.is_full()
    }

    pub fn size(&self) -> Option<u64> {
        self.space.size()
    }

    pub fn contains(&self, x: &FVector, ops: &mut OpCount) -> bool {
        x.len() == self.rep.len() && self.space.reduce(x, ops) == self.rep
    }

    pub fn is_subset_of(&self, other: &Coset, ops: &mut OpCount) -> bool {
        self.space.is_subspace_of(&other.space, ops) && other.contains(&self.rep, ops)
    }

    /// `self ∩ other`, or `None` when the two cosets are disjoint.
    pub fn intersect(&self, other: &Coset, ops: &mut OpCount) -> Result<Option<Coset>> {
        self.space.check_compatible(&other.space)?;
        if self.is_full() {
            return Ok(Some(other.clone()));
        }
        if other.is_full() {
            return Ok(Some(self.clone()));
        }
        let field = self.field().clone();
        let n = self.ambient();
        let space = self.space.intersect(&other.space, ops)?;
        let diff = other.rep.sub(&field, &self.rep, ops);
        if diff.is_zero() {
            return Ok(Some(Coset::new(self.rep.clone(), space, ops)?));
        }
        let (da, db) = (self.dim(), other.dim());
        if da + db == 0 {
            return Ok(None);
        }
        // Find u in A, w in B with u - w = diff; then rep_a + u is common.
        let mut m = FMatrix::zeros(&field, n, da + db);
        for (j, a) in self.space.basis.iter().enumerate() {
            for i in 0..n {
                m.set(i, j, a.0[i]);
            }
        }
        for (j, b) in other.space.basis.iter().enumerate() {
            for i in 0..n {
                m.set(i, da + j, field.neg(b.0[i]));
            }
        }
        let Some(sol) = solve(&m, &diff, ops)? else {
            return Ok(None);
        };
        let mut x = self.rep.clone();
        for (j, a) in self.space.basis.iter().enumerate() {
            axpy(&field, &mut x.0, sol.rep().0[j], &a.0, ops);
        }
        Ok(Some(Coset::new(x, space, ops)?))
    }

    /// Minkowski sum `self + other`.
    pub fn add(&self, other: &Coset, ops: &mut OpCount) -> Result<Coset> {
        self.space.check_compatible(&other.space)?;
        let field = self.field().clone();
        let space = self.space.sum(&other.space, ops)?;
        let rep = self.rep.add(&field, &other.rep, ops);
        Coset::new(rep, space, ops)
    }

    /// `c * self`; a nonzero scalar keeps the subspace and the canonical form.
    pub fn scale(&self, c: Gf, ops: &mut OpCount) -> Coset {
        if c.is_zero() {
            return Coset::point(self.field(), FVector::zeros(self.ambient()));
        }
        Coset { rep: self.rep.scale(self.field(), c, ops), space: self.space.clone() }
    }

    /// Image under `v -> m v`.
    pub fn map(&self, m: &FMatrix, ops: &mut OpCount) -> Result<Coset> {
        let space = self.space.map(m, ops)?;
        let rep = m.mul_vec(&self.rep, ops)?;
        Coset::new(rep, space, ops)
    }

    pub fn enumerate(&self) -> Vec<FVector> {
        let field = self.field().clone();
        self.space
            .enumerate()
            .into_iter()
            .map(|w| w.add(&field, &self.rep, &mut OpCount::default()))
            .collect()
    }
}

impl fmt::Debug for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + {}", self.rep, self.space)
    }
}
