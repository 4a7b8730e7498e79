use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{sample, EnsembleSpec};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMat, C64};

/// Samples per RNG substream. Block `b` draws from stream `b` of the
/// generator seeded by `seed`, so results do not depend on how blocks are
/// grouped into shards.
pub const BLOCK_SIZE: u64 = 1000;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HAARMOMENTS_THREADS";

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
            if t > 0 {
                b = b.num_threads(t);
            }
        }
        b.build().expect("thread pool")
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub shards: usize,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, shards: 8 }
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards;
        self
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: C64,
    /// Standard deviation of the mean.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Sum of squared deviations recovered from the standard error.
    fn m2(&self) -> f64 {
        let n = self.samples as f64;
        self.stderr * self.stderr * n * (n - 1.0)
    }

    /// Pooled estimate of two independent runs (Chan et al. combination).
    /// The seed of `self` is kept.
    pub fn merge(&self, other: &McEstimate) -> McEstimate {
        let mut a = Moments::scalar(self.samples, self.mean, self.m2());
        a.merge(&Moments::scalar(other.samples, other.mean, other.m2()));
        a.estimate(0, self.seed)
    }

    /// Magnitude-of-deviation test in units of the standard error.
    pub fn sigmas_from(&self, value: C64) -> f64 {
        (self.mean - value).norm() / self.stderr
    }
}

/// Per-sample outcome of a multi-output integrand.
#[derive(Clone, Debug, PartialEq)]
pub enum Draw {
    Value(Vec<C64>),
    /// The sample is discarded and counted (e.g. an eigensolver failure).
    Skip,
}

/// Running mean and sum of squared moduli of deviations for each output.
#[derive(Clone, Debug)]
struct Moments {
    n: u64,
    mean: Vec<C64>,
    m2: Vec<f64>,
    skipped: u64,
}

impl Moments {
    fn new(outputs: usize) -> Self {
        Self { n: 0, mean: vec![C64::new(0.0, 0.0); outputs], m2: vec![0.0; outputs], skipped: 0 }
    }

    fn scalar(n: u64, mean: C64, m2: f64) -> Self {
        Self { n, mean: vec![mean], m2: vec![m2], skipped: 0 }
    }

    fn push(&mut self, x: &[C64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += (d.conj() * (v - *m)).re;
        }
    }

    fn merge(&mut self, other: &Moments) {
        self.skipped += other.skipped;
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            self.n = other.n;
            self.mean.clone_from(&other.mean);
            self.m2.clone_from(&other.m2);
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * (nb / n);
            self.m2[i] += other.m2[i] + d.norm_sqr() * na * nb / n;
        }
        self.n += other.n;
    }

    fn stderr(&self, i: usize) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let n = self.n as f64;
        (self.m2[i].max(0.0) / (n - 1.0) / n).sqrt()
    }

    fn estimate(&self, i: usize, seed: u64) -> McEstimate {
        McEstimate { mean: self.mean[i], stderr: self.stderr(i), samples: self.n, seed }
    }
}

/// Vector-valued Monte Carlo result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McVector {
    pub mean: Vec<C64>,
    pub stderr: Vec<f64>,
    /// Accepted samples.
    pub samples: u64,
    /// Samples discarded by the integrand.
    pub skipped: u64,
    pub seed: u64,
}

impl McVector {
    pub fn component(&self, i: usize) -> McEstimate {
        McEstimate { mean: self.mean[i], stderr: self.stderr[i], samples: self.samples, seed: self.seed }
    }
}

/// Generic sharded engine. `f(index, rng)` draws sample `index` from its
/// block's stream and returns `outputs` values (or a skip).
///
/// Blocks are computed in parallel and merged sequentially in block order,
/// which makes the result bit-identical for every shard count.
pub fn mc_engine<F>(cfg: McConfig, outputs: usize, f: F) -> Result<McVector>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<Draw> + Sync,
{
    if cfg.samples < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least two samples".into()));
    }
    if cfg.shards == 0 {
        return Err(Error::InvalidParameter("shard count must be positive".into()));
    }
    let blocks = cfg.samples.div_ceil(BLOCK_SIZE);
    let per_shard = blocks.div_ceil(cfg.shards as u64).max(1);
    let run_block = |b: u64| -> Result<Moments> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(b);
        let mut acc = Moments::new(outputs);
        let end = ((b + 1) * BLOCK_SIZE).min(cfg.samples);
        for index in b * BLOCK_SIZE..end {
            match f(index, &mut rng)? {
                Draw::Value(v) => {
                    if v.len() != outputs {
                        return Err(Error::InvalidParameter(format!(
                            "integrand returned {} values, expected {outputs}",
                            v.len()
                        )));
                    }
                    if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                        return Err(Error::NonFiniteSample { index });
                    }
                    acc.push(&v);
                }
                Draw::Skip => acc.skipped += 1,
            }
        }
        Ok(acc)
    };
    let shards: Vec<Result<Vec<Moments>>> = pool().install(|| {
        (0..cfg.shards as u64)
            .into_par_iter()
            .map(|s| {
                let lo = s * per_shard;
                let hi = ((s + 1) * per_shard).min(blocks);
                (lo..hi).map(run_block).collect()
            })
            .collect()
    });
    let mut total = Moments::new(outputs);
    for shard in shards {
        for block in shard? {
            total.merge(&block);
        }
    }
    if total.n < 2 {
        return Err(Error::InvalidParameter(format!("only {} of {} samples were accepted", total.n, cfg.samples)));
    }
    Ok(McVector {
        stderr: (0..outputs).map(|i| total.stderr(i)).collect(),
        mean: total.mean,
        samples: total.n,
        skipped: total.skipped,
        seed: cfg.seed,
    })
}

/// Scalar Monte Carlo over an arbitrary sampler closure.
pub fn mc_scalar<F>(cfg: McConfig, f: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> C64 + Sync,
{
    mc_engine(cfg, 1, |_, rng| Ok(Draw::Value(vec![f(rng)]))).map(|v| v.component(0))
}

/// `<f(M)>` over `M` drawn from `spec`.
pub fn mc_average<F>(f: F, spec: &EnsembleSpec, cfg: McConfig) -> Result<McEstimate>
where
    F: Fn(&ComplexMat) -> C64 + Sync,
{
    mc_scalar(cfg, |rng| f(&sample(spec, rng)))
}
