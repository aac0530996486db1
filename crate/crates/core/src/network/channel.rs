use super::{Input, Network};
use crate::error::{Error, Result};
use crate::galois::{Alphabet, FVector, Gf, OpCount};

/// Largest number of probabilities a single channel table may hold.
pub const TABLE_GUARD: usize = 1_000_000;

/// Conditional distribution `C_l(y_l | y_inc(l))` for one link.
///
/// Rows are indexed by the mixed-radix index of the input symbols (first
/// input least significant); each row is a distribution over the output
/// alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTable {
    link: usize,
    inputs: Vec<Input>,
    alphabet: usize,
    rows: Vec<Vec<f64>>,
}

impl ChannelTable {
    pub fn new(net: &Network, link: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let alphabet = Alphabet::new(net.field(), net.dim())?.size();
        let t = ChannelTable { link, inputs: net.inc(link), alphabet, rows };
        t.check(net)?;
        Ok(t)
    }

    fn from_fn(net: &Network, link: usize, mut f: impl FnMut(usize, &[usize]) -> Vec<f64>) -> Result<Self> {
        let alpha = Alphabet::new(net.field(), net.dim())?;
        let a = alpha.size();
        let inputs = net.inc(link);
        let n_rows = a
            .checked_pow(inputs.len() as u32)
            .filter(|r| r.saturating_mul(a) <= TABLE_GUARD)
            .ok_or_else(|| Error::Capacity(format!("channel table for link {} is too large", net.links()[link].id)))?;
        let mut rows = Vec::with_capacity(n_rows);
        let mut digits = vec![0usize; inputs.len()];
        for r in 0..n_rows {
            let mut x = r;
            for d in digits.iter_mut() {
                *d = x % a;
                x /= a;
            }
            rows.push(f(r, &digits));
        }
        ChannelTable::new(net, link, rows)
    }

    /// Point mass on the link's linear combination: the deterministic code.
    pub fn degenerate(net: &Network, link: usize) -> Result<Self> {
        ChannelTable::symmetric(net, link, 0.0)
    }

    /// With probability `1 - flip` the linear combination of the inputs,
    /// otherwise a uniformly chosen different symbol.
    pub fn symmetric(net: &Network, link: usize, flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(Error::Usage(format!("flip probability {flip} outside [0, 1]")));
        }
        let alpha = Alphabet::new(net.field(), net.dim())?;
        let a = alpha.size();
        let inputs = net.inc(link);
        let coefs: Vec<Gf> = inputs.iter().map(|&e| net.coef(link, e)).collect();
        ChannelTable::from_fn(net, link, |_, digits| {
            let mut ops = OpCount::default();
            let mut acc = FVector::zeros(net.dim());
            for (&c, &d) in coefs.iter().zip(digits) {
                acc = acc.add(net.field(), &alpha.vector(d).scale(net.field(), c, &mut ops), &mut ops);
            }
            let hit = alpha.index(&acc);
            let other = if a > 1 { flip / (a - 1) as f64 } else { 0.0 };
            let mut row = vec![other; a];
            row[hit] = if a > 1 { 1.0 - flip } else { 1.0 };
            row
        })
    }

    /// Arbitrary table from a row generator, e.g. random distributions.
    pub fn from_rows_fn(net: &Network, link: usize, f: impl FnMut(usize, &[usize]) -> Vec<f64>) -> Result<Self> {
        ChannelTable::from_fn(net, link, f)
    }

    pub fn link(&self) -> usize {
        self.link
    }

    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row_index(&self, inputs: &[usize]) -> usize {
        inputs.iter().rev().fold(0, |acc, &x| acc * self.alphabet + x)
    }

    pub fn row(&self, inputs: &[usize]) -> &[f64] {
        &self.rows[self.row_index(inputs)]
    }

    pub fn prob(&self, output: usize, inputs: &[usize]) -> f64 {
        self.row(inputs)[output]
    }

    pub(crate) fn check(&self, net: &Network) -> Result<()> {
        if self.inputs != net.inc(self.link) {
            return Err(Error::Usage("table inputs do not match inc(l)".into()));
        }
        let expected = self.alphabet.checked_pow(self.inputs.len() as u32).unwrap_or(usize::MAX);
        if self.rows.len() != expected {
            return Err(Error::Usage(format!("table has {} rows, expected {expected}", self.rows.len())));
        }
        if expected.saturating_mul(self.alphabet) > TABLE_GUARD {
            return Err(Error::Capacity("channel table exceeds the table guard".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.alphabet || row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::Usage(format!("row {i} is not a distribution over {} symbols", self.alphabet)));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Usage(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(())
    }
}
