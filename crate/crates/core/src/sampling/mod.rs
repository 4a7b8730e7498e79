//! Random-matrix samplers and a reproducible sharded Monte Carlo engine.

mod engine;
mod ensemble;
mod histogram;

pub use engine::{mc_average, mc_engine, mc_scalar, Draw, McConfig, McEstimate, McVector, BLOCK_SIZE, THREADS_ENV};
pub use ensemble::{ginibre, gue, haar_unitary, sample, Ensemble, EnsembleSpec};
pub use histogram::{eig_histogram, Binning, DensityBin, DensityTable, Region};
pub use rand_chacha::ChaCha8Rng as McRng;
