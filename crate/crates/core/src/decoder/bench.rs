//! Field-operation counts of both decoders on the chain network.

use rand::{Rng, SeedableRng};

use super::{decode_gaussian, decode_mp, DecodeOptions};
use crate::error::{Error, Result};
use crate::galois::{rref, FVector, Field, Gf, OpCount};
use crate::network::{topology, Observation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub k: usize,
    pub mp_mul: u64,
    pub mp_add: u64,
    pub mp_msgs: u64,
    pub ge_mul: u64,
    pub ge_add: u64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "K,mp_mul,mp_add,mp_msgs,ge_mul,ge_add";

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{},{},{}", self.k, self.mp_mul, self.mp_add, self.mp_msgs, self.ge_mul, self.ge_add)
    }

    pub fn mp_ops(&self) -> u64 {
        self.mp_mul + self.mp_add
    }

    pub fn ge_ops(&self) -> u64 {
        self.ge_mul + self.ge_add
    }
}

/// Decode a random full-rank chain code of each length in `ks` with both
/// decoders, checking that they agree. With `reps > 1` each row holds the
/// mean over `reps` codes.
pub fn bench_chain(ks: &[usize], field: &Field, seed: u64, reps: usize) -> Result<Vec<BenchRow>> {
    let reps = reps.max(1) as u64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &k in ks {
        let mut sum = BenchRow { k, mp_mul: 0, mp_add: 0, mp_msgs: 0, ge_mul: 0, ge_add: 0 };
        for _ in 0..reps {
            let base = topology::chain(field, k);
            let net = loop {
                let net = base.random_code(field, rng.gen());
                let sink = &net.sinks()[0];
                let a = net.global_transfer_matrix(&sink.observes)?;
                if rref(&a, &mut OpCount::default()).rank == k {
                    break net;
                }
            };
            let src: Vec<FVector> = (0..k).map(|_| FVector(vec![Gf(rng.gen_range(0..field.order()))])).collect();
            let sym = net.encode(&src)?;
            let sink = &net.sinks()[0];
            let obs = Observation::from_assignment(sink.node, &sink.observes, &sym);
            let mp = decode_mp(&net, &obs, &[], &DecodeOptions::default())?;
            let ge = decode_gaussian(&net, &obs, &[])?;
            if mp.targets != ge.targets || mp.superset_possible {
                return Err(Error::Internal(format!("decoders disagree on the K={k} chain")));
            }
            sum.mp_mul += mp.counters.mul;
            sum.mp_add += mp.counters.add;
            sum.mp_msgs += mp.counters.messages;
            sum.ge_mul += ge.counters.mul;
            sum.ge_add += ge.counters.add;
        }
        rows.push(BenchRow {
            k,
            mp_mul: sum.mp_mul / reps,
            mp_add: sum.mp_add / reps,
            mp_msgs: sum.mp_msgs / reps,
            ge_mul: sum.ge_mul / reps,
            ge_add: sum.ge_add / reps,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log ops` against `log K`.
pub fn log_log_slope(points: &[(usize, u64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|&(k, _)| (k as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, c)| (c.max(1) as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
