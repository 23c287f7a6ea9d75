//! Exact sampling of CW(β, N) and Glauber (heat-bath) dynamics.
//!
//! The Gibbs weight is permutation invariant, so a configuration can be drawn
//! by first drawing `S_N` from the magnetization pmf and then placing the
//! `(N + S_N)/2` up-spins uniformly at random.
//!
//! Random streams: every task draws from ChaCha8 keyed by `seed` with the
//! stream id set to the task index (see [`substream`]). Exact batches are cut
//! into chunks of [`CHUNK_SIZE`] draws, chunk `c` using stream `c`, so output is
//! independent of the number of worker threads.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::exact::MagnetizationPmf;
use crate::model::ModelParams;
use crate::{Error, Result};

pub const CHUNK_SIZE: usize = 1 << 16;

// Spin placement uses streams disjoint from the magnetization draws, so the
// magnetization sequence does not depend on whether spins are materialized.
const SPIN_STREAM_BASE: u64 = 1 << 48;

/// Independent generator for task `task_index` under `seed`.
pub fn substream(seed: u64, task_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task_index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub params: ModelParams,
    pub seed: u64,
    /// Sampled values of `S_N`.
    pub magnetizations: Vec<i64>,
    /// One `±1` vector per draw, when requested.
    pub spins: Option<Vec<Vec<i8>>>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.magnetizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnetizations.is_empty()
    }

    pub fn spins_materialized(&self) -> bool {
        self.spins.is_some()
    }

    /// Counts per support index `k = (s + N)/2`.
    pub fn histogram(&self) -> Vec<u64> {
        let n = self.params.n() as i64;
        let mut counts = vec![0u64; self.params.n() + 1];
        for &s in &self.magnetizations {
            counts[((s + n) / 2) as usize] += 1;
        }
        counts
    }
}

/// Inverse-CDF sampler over a precomputed cumulative table.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    params: ModelParams,
    cdf: Vec<f64>,
}

impl ExactSampler {
    pub fn new(params: ModelParams) -> Self {
        let pmf = MagnetizationPmf::new(params);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf
            .probabilities()
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        ExactSampler { params, cdf }
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// One draw of `S_N`; binary search on the cumulative table.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random();
        let k = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        2 * k as i64 - self.params.n() as i64
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleBatch> {
        self.sample_inner(count, seed, false)
    }

    pub fn sample_with_spins(&self, count: usize, seed: u64) -> Result<SampleBatch> {
        self.sample_inner(count, seed, true)
    }

    fn sample_inner(&self, count: usize, seed: u64, with_spins: bool) -> Result<SampleBatch> {
        if count == 0 {
            return Err(Error::argument("count must be at least 1"));
        }
        let n = self.params.n();
        type Chunk = (Vec<i64>, Option<Vec<Vec<i8>>>);
        let chunks: Vec<Chunk> = (0..count.div_ceil(CHUNK_SIZE))
            .into_par_iter()
            .map(|c| {
                let len = CHUNK_SIZE.min(count - c * CHUNK_SIZE);
                let mut rng = substream(seed, c as u64);
                let mags: Vec<i64> = (0..len).map(|_| self.draw(&mut rng)).collect();
                let spins = with_spins.then(|| {
                    let mut rng = substream(seed, SPIN_STREAM_BASE + c as u64);
                    mags.iter().map(|&s| place_spins(n, s, &mut rng)).collect()
                });
                (mags, spins)
            })
            .collect();

        let mut magnetizations = Vec::with_capacity(count);
        let mut spins = with_spins.then(|| Vec::with_capacity(count));
        for (mags, sp) in chunks {
            magnetizations.extend(mags);
            if let (Some(all), Some(sp)) = (spins.as_mut(), sp) {
                all.extend(sp);
            }
        }
        Ok(SampleBatch {
            params: self.params,
            seed,
            magnetizations,
            spins,
        })
    }
}

/// Spin vector with magnetization `s`: `(n + s)/2` up-spins at uniformly random sites.
fn place_spins<R: Rng + ?Sized>(n: usize, s: i64, rng: &mut R) -> Vec<i8> {
    let ups = ((n as i64 + s) / 2) as usize;
    let mut spins = vec![-1i8; n];
    for i in index::sample(rng, n, ups) {
        spins[i] = 1;
    }
    spins
}

/// `count` i.i.d. draws of `S_N` under CW(β, N).
pub fn sample_exact(params: ModelParams, count: usize, seed: u64) -> Result<SampleBatch> {
    ExactSampler::new(params).sample(count, seed)
}

/// As [`sample_exact`], also materializing one spin configuration per draw.
pub fn sample_exact_with_spins(
    params: ModelParams,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    ExactSampler::new(params).sample_with_spins(count, seed)
}

/// Starting configuration of a Glauber chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialState {
    /// Independent fair signs.
    #[default]
    Random,
    AllUp,
    AllDown,
}

/// Heat-bath probability of setting a spin to `+1` when the other spins sum
/// to `s_minus`: `(1 + tanh(β·s_minus/N))/2`.
pub fn heat_bath_probability(beta: f64, n: usize, s_minus: i64) -> f64 {
    0.5 * (1.0 + (beta * s_minus as f64 / n as f64).tanh())
}

/// Glauber chain from a random start; see [`glauber_chain_from`].
pub fn glauber_chain(
    params: ModelParams,
    sweeps: usize,
    seed: u64,
    burn_in: usize,
) -> Result<SampleBatch> {
    glauber_chain_from(params, sweeps, seed, burn_in, InitialState::Random)
}

/// Runs `sweeps` sweeps of single-site heat-bath updates, each sweep visiting
/// all N sites in a fresh random order, and records `S_N` after every sweep
/// past `burn_in`. All randomness comes from `substream(seed, 0)`.
pub fn glauber_chain_from(
    params: ModelParams,
    sweeps: usize,
    seed: u64,
    burn_in: usize,
    initial: InitialState,
) -> Result<SampleBatch> {
    if sweeps <= burn_in {
        return Err(Error::argument(format!(
            "sweeps ({sweeps}) must exceed burn_in ({burn_in})"
        )));
    }
    let n = params.n();
    let mut rng = substream(seed, 0);
    let mut spins: Vec<i8> = match initial {
        InitialState::Random => (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect(),
        InitialState::AllUp => vec![1; n],
        InitialState::AllDown => vec![-1; n],
    };
    let mut total: i64 = spins.iter().map(|&x| x as i64).sum();

    // p_up indexed by s_minus + (N − 1), s_minus ∈ [−(N−1), N−1].
    let offset = n as i64 - 1;
    let p_up: Vec<f64> = (-offset..=offset)
        .map(|s| heat_bath_probability(params.beta(), n, s))
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    let mut magnetizations = Vec::with_capacity(sweeps - burn_in);
    for sweep in 0..sweeps {
        order.shuffle(&mut rng);
        for &i in &order {
            let s_minus = total - spins[i] as i64;
            let up = rng.random::<f64>() < p_up[(s_minus + offset) as usize];
            spins[i] = if up { 1 } else { -1 };
            total = s_minus + spins[i] as i64;
        }
        if sweep >= burn_in {
            magnetizations.push(total);
        }
    }
    Ok(SampleBatch {
        params,
        seed,
        magnetizations,
        spins: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

fn scaled_powers(batch: &SampleBatch, big_k: u32, alpha: f64) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::argument("sample batch is empty"));
    }
    let scale = (batch.params.n() as f64).powf(alpha);
    Ok(batch
        .magnetizations
        .iter()
        .map(|&s| (s as f64 / scale).powi(big_k as i32))
        .collect())
}

fn mean_and_error(values: &[f64]) -> MomentEstimate {
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    if values.len() < 2 {
        return MomentEstimate {
            estimate: mean,
            std_error: 0.0,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0);
    MomentEstimate {
        estimate: mean,
        std_error: (var / len).sqrt(),
    }
}

/// Sample mean of `(s/N^α)^K` with its i.i.d. standard error.
pub fn empirical_moment(batch: &SampleBatch, big_k: u32, alpha: f64) -> Result<MomentEstimate> {
    Ok(mean_and_error(&scaled_powers(batch, big_k, alpha)?))
}

/// Like [`empirical_moment`], with the standard error from `batches`
/// consecutive batch means; use this for Markov-chain output.
pub fn batch_means_moment(
    batch: &SampleBatch,
    big_k: u32,
    alpha: f64,
    batches: usize,
) -> Result<MomentEstimate> {
    let values = scaled_powers(batch, big_k, alpha)?;
    if batches < 2 || batches > values.len() {
        return Err(Error::argument(format!(
            "need 2 <= batches <= {}, got {batches}",
            values.len()
        )));
    }
    let size = values.len() / batches;
    let means: Vec<f64> = values
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let overall = values.iter().sum::<f64>() / values.len() as f64;
    Ok(MomentEstimate {
        estimate: overall,
        std_error: mean_and_error(&means).std_error,
    })
}
