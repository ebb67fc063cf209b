//! Monte Carlo moments of the k-th nearest neighbor distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ProximityOrder, RandomStream};
use crate::scalar::{CompensatedSum, Real};
use crate::series::reduced_normalizer;

use super::knn::{knn_into, Best};

/// Trials per random stream. Trial `t` always belongs to block
/// `t / TRIAL_BLOCK` and draws from stream `(seed, block)`, so the worker
/// count never changes which numbers a trial sees.
pub const TRIAL_BLOCK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig<T> {
    pub n: u64,
    pub k_max: u32,
    pub alpha: T,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    pub streams: usize,
}

impl<T: Real> SampleConfig<T> {
    pub fn new(n: u64, k_max: u32, alpha: T, trials: u64, seed: u64, streams: usize) -> Result<Self> {
        let cfg = Self {
            n,
            k_max,
            alpha,
            trials,
            seed,
            streams,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 || u64::from(self.k_max) > self.n {
            return Err(Error::InvalidParameter(format!(
                "need 1 ≤ k_max ≤ N, got k_max = {}, N = {}",
                self.k_max, self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.streams == 0 {
            return Err(Error::InvalidParameter("streams must be at least 1".into()));
        }
        if !(self.alpha > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "moment order must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Per-rank compensated sums of `D_k^α` and `D_k^{2α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator<T> {
    sums: Vec<CompensatedSum<T>>,
    squares: Vec<CompensatedSum<T>>,
    count: u64,
}

impl<T: Real> Accumulator<T> {
    pub fn new(k_max: usize) -> Self {
        Self {
            sums: vec![CompensatedSum::new(); k_max],
            squares: vec![CompensatedSum::new(); k_max],
            count: 0,
        }
    }

    pub fn k_max(&self) -> usize {
        self.sums.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Records one trial's values `D_1^α, …, D_{k_max}^α`.
    pub fn push(&mut self, values: impl IntoIterator<Item = T>) {
        let mut n = 0;
        for ((s, q), x) in self.sums.iter_mut().zip(self.squares.iter_mut()).zip(values) {
            s.add(x);
            q.add(x * x);
            n += 1;
        }
        debug_assert_eq!(n, self.sums.len());
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.k_max(), other.k_max(), "merging accumulators of different k_max");
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.merge(b);
        }
        for (a, b) in self.squares.iter_mut().zip(&other.squares) {
            a.merge(b);
        }
        self.count += other.count;
    }

    /// Sample mean of `D_k^α`, `k` starting at 1.
    pub fn mean(&self, k: usize) -> T {
        self.sums[k - 1].value() / T::of_u64(self.count)
    }

    /// Standard error of [`mean`](Self::mean); zero for a single trial.
    pub fn stderr(&self, k: usize) -> T {
        if self.count < 2 {
            return T::zero();
        }
        let n = T::of_u64(self.count);
        let mean = self.mean(k);
        let var = (self.squares[k - 1].value() / n - mean * mean).max(T::zero()) * n / (n - T::one());
        (var / n).sqrt()
    }
}

#[inline]
fn moment<T: Real>(d: T, alpha: T) -> T {
    if alpha == T::one() {
        d
    } else if alpha == T::lit(2.0) {
        d * d
    } else {
        d.powf(alpha)
    }
}

fn run<T, M, Q>(m: &M, cfg: &SampleConfig<T>, query: Q) -> Result<Accumulator<T>>
where
    T: Real,
    M: Manifold<T> + ?Sized,
    Q: Fn(&mut RandomStream) -> Result<M::Point> + Sync,
{
    cfg.validate()?;
    let n = usize::try_from(cfg.n).map_err(|_| Error::InvalidParameter("N does not fit in memory".into()))?;
    let k = cfg.k_max as usize;
    let blocks = cfg.trials.div_ceil(TRIAL_BLOCK);
    let monotone = m.proximity_order() == ProximityOrder::Monotone;

    let block = |b: u64| -> Result<Accumulator<T>> {
        let mut rng = RandomStream::new(cfg.seed, b);
        let mut acc = Accumulator::new(k);
        let mut sites = Vec::with_capacity(n);
        let mut best = Best::new(k);
        let trials = TRIAL_BLOCK.min(cfg.trials - b * TRIAL_BLOCK);
        for _ in 0..trials {
            let x = query(&mut rng)?;
            sites.clear();
            for _ in 0..n {
                sites.push(m.sample(&mut rng)?);
            }
            knn_into(m, &x, &sites, &mut best)?;
            acc.push(best.keys().map(|p| {
                let d = if monotone { m.proximity_to_distance(p) } else { p };
                moment(d, cfg.alpha)
            }));
        }
        Ok(acc)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.streams)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let parts: Vec<Result<Accumulator<T>>> = pool.install(|| (0..blocks).into_par_iter().map(block).collect());

    let mut total = Accumulator::new(k);
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Moments with a fresh uniform query point every trial, i.e. the
/// surface average of the pointwise moments.
pub fn estimate_moments<T: Real, M: Manifold<T> + ?Sized>(m: &M, cfg: &SampleConfig<T>) -> Result<Accumulator<T>> {
    run(m, cfg, |rng| m.sample(rng))
}

/// Moments about a fixed query point `x`.
pub fn estimate_moments_at<T: Real, M: Manifold<T> + ?Sized>(
    m: &M,
    x: &M::Point,
    cfg: &SampleConfig<T>,
) -> Result<Accumulator<T>> {
    run(m, cfg, |_| Ok(x.clone()))
}

/// Mean and standard error of one moment, raw and reduced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate<T> {
    pub k: u32,
    pub n: u64,
    pub alpha: T,
    pub mean: T,
    pub stderr: T,
    pub reduced: T,
    pub reduced_stderr: T,
}

/// Summarises an accumulator, normalising by the manifold's leading
/// large-`N` behaviour.
pub fn summarize<T: Real, M: Manifold<T> + ?Sized>(
    m: &M,
    cfg: &SampleConfig<T>,
    acc: &Accumulator<T>,
) -> Vec<MomentEstimate<T>> {
    let (gamma, c0) = m.leading_inverse();
    (1..=acc.k_max())
        .map(|k| {
            let norm = reduced_normalizer(gamma, c0, k as u32, cfg.n, cfg.alpha);
            let (mean, stderr) = (acc.mean(k), acc.stderr(k));
            MomentEstimate {
                k: k as u32,
                n: cfg.n,
                alpha: cfg.alpha,
                mean,
                stderr,
                reduced: mean * norm,
                reduced_stderr: stderr * norm,
            }
        })
        .collect()
}
