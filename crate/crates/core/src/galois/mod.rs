//! Exact finite-field arithmetic: scalars, vectors, matrices, subspaces and
//! cosets. Nothing in here uses floating point.

mod field;
mod matrix;
mod subspace;

pub use field::{Field, FieldSpec, Gf, MAX_ORDER};
pub use matrix::{rref, solve, solve_many, FMatrix, FVector, MultiSolution, OpCount, Rref};
pub use subspace::{Coset, Subspace};

use crate::error::{Error, Result};

/// The symbol alphabet F^n, with a dense integer index per symbol.
///
/// Symbol `v` has index `sum_t v[t] * q^t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    field: Field,
    n: usize,
    size: usize,
}

impl Alphabet {
    /// Fails with a capacity error when `q^n` does not fit in memory-sized indices.
    pub fn new(field: &Field, n: usize) -> Result<Self> {
        let size = (field.order() as usize)
            .checked_pow(n as u32)
            .filter(|&s| s <= 1 << 40)
            .ok_or_else(|| Error::Capacity(format!("alphabet {field}^{n} is too large to index")))?;
        Ok(Alphabet { field: field.clone(), n, size })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn index(&self, v: &FVector) -> usize {
        let q = self.field.order() as usize;
        v.0.iter().rev().fold(0, |acc, x| acc * q + x.0 as usize)
    }

    pub fn vector(&self, mut idx: usize) -> FVector {
        let q = self.field.order() as usize;
        let mut out = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            out.push(Gf((idx % q) as u32));
            idx /= q;
        }
        FVector(out)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let q = self.field.order() as usize;
        let (mut a, mut b, mut out, mut place) = (a, b, 0usize, 1usize);
        for _ in 0..self.n {
            let s = self.field.add(Gf((a % q) as u32), Gf((b % q) as u32));
            out += s.0 as usize * place;
            a /= q;
            b /= q;
            place *= q;
        }
        out
    }

    pub fn scale(&self, c: Gf, a: usize) -> usize {
        let q = self.field.order() as usize;
        let (mut a, mut out, mut place) = (a, 0usize, 1usize);
        for _ in 0..self.n {
            let s = self.field.mul(c, Gf((a % q) as u32));
            out += s.0 as usize * place;
            a /= q;
            place *= q;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        self.scale(self.field.neg(Gf::ONE), a)
    }
}

impl std::fmt::Display for Alphabet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}^{}", self.field, self.n)
    }
}
