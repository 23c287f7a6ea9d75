//! Exact finite-N computations through the magnetization pmf.
//!
//! The Gibbs weight depends on a configuration only through `S_N`, so the law
//! of `S_N` is `P(S_N = 2k − N) ∝ C(N, k)·exp(β(2k − N)²/(2N))`. All sums run
//! in log-space; the weights span `exp(βN/2)`.

use crate::model::ModelParams;
use crate::special::{ln_binomial, ln_factorials, log_sum_exp};
use crate::{Error, Result};

/// Largest N accepted by the `2^N` enumeration oracles.
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Exact law of the total magnetization on `{−N, −N+2, …, N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationPmf {
    params: ModelParams,
    log_weights: Vec<f64>,
    log_partition: f64,
    // ln P(S_N = 2k − N), formed from max-shifted weights so that the
    // normalization is not limited by the magnitude (~βN/2) of the weights.
    log_probs: Vec<f64>,
}

impl MagnetizationPmf {
    pub fn new(params: ModelParams) -> Self {
        let n = params.n();
        let beta = params.beta();
        let lf = ln_factorials(n);
        let mut log_weights = vec![0.0; n + 1];
        // Fill the lower half and mirror, so pmf(s) == pmf(−s) bit for bit.
        for k in 0..=n / 2 {
            let s = (2 * k) as f64 - n as f64;
            let w = ln_binomial(&lf, n, k) + beta * s * s / (2.0 * n as f64);
            log_weights[k] = w;
            log_weights[n - k] = w;
        }
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = log_weights.iter().map(|&w| w - max).collect();
        let log_norm = log_sum_exp(&shifted);
        let log_probs = shifted.iter().map(|&w| w - log_norm).collect();
        MagnetizationPmf {
            params,
            log_weights,
            log_partition: max + log_norm,
            log_probs,
        }
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// Number of support points, `N + 1`.
    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    /// Magnetization values `2k − N` in increasing order.
    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        let n = self.params.n() as i64;
        (0..self.log_weights.len() as i64).map(move |k| 2 * k - n)
    }

    /// Unnormalized log weights `ln C(N,k) + β s²/(2N)`, indexed by `k`.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `ln Σ_k exp(log_weights[k])`: the log partition function up to the
    /// constant `−N ln 2` relative to the configuration sum normalized by `2^N`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// `P(S_N = 2k − N)`.
    pub fn probability_at_index(&self, k: usize) -> f64 {
        self.log_probs.get(k).map_or(0.0, |&lp| lp.exp())
    }

    /// `P(S_N = s)`; zero off the support.
    pub fn probability(&self, s: i64) -> f64 {
        let n = self.params.n() as i64;
        if s.abs() > n || (s + n) % 2 != 0 {
            return 0.0;
        }
        self.probability_at_index(((s + n) / 2) as usize)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.probability_at_index(k))
            .collect()
    }

    /// `E[(S_N / N^α)^K]`, summed over `±s` pairs so odd moments are exactly 0.
    pub fn scaled_moment(&self, big_k: u32, alpha: f64) -> f64 {
        let n = self.params.n();
        let scale = (n as f64).powf(alpha);
        let odd = big_k % 2 == 1;
        let mut acc = 0.0;
        for k in 0..=n / 2 {
            let s = n - 2 * k;
            let p = self.probability_at_index(k);
            if s == 0 {
                acc += p * if big_k == 0 { 1.0 } else { 0.0 };
            } else if !odd {
                acc += 2.0 * p * (s as f64 / scale).powi(big_k as i32);
            }
        }
        acc
    }
}

pub fn magnetization_pmf(params: ModelParams) -> MagnetizationPmf {
    MagnetizationPmf::new(params)
}

/// `E[(S_N / N^α)^K]` under CW(β, N).
pub fn exact_scaled_moment(params: ModelParams, big_k: u32, alpha: f64) -> f64 {
    MagnetizationPmf::new(params).scaled_moment(big_k, alpha)
}

/// `E[X_1 ⋯ X_ℓ]` under CW(β, N), exactly.
///
/// Conditions on `j` = number of `+1` among the first `ℓ` spins and `k` = number
/// of `+1` among the rest:
/// `Σ_{j,k} (−1)^{ℓ−j} C(ℓ,j) C(N−ℓ,k) exp(β s²/2N) / Z`, `s = 2(j+k) − N`.
/// Positive and negative terms go to separate accumulators scaled by a common
/// maximum. Cost `O(ℓ·N)`.
pub fn exact_correlation(params: ModelParams, ell: usize) -> Result<f64> {
    let n = params.n();
    if ell > n {
        return Err(Error::argument(format!("ell = {ell} exceeds n = {n}")));
    }
    if ell == 0 {
        return Ok(1.0);
    }
    // s -> −s maps the j-sum onto itself with the opposite sign.
    if ell % 2 == 1 {
        return Ok(0.0);
    }
    // Independent fair spins.
    if params.beta() == 0.0 {
        return Ok(0.0);
    }
    let pmf = MagnetizationPmf::new(params);
    let lf = ln_factorials(n);
    let beta = params.beta();
    let rest = n - ell;
    let log_z = pmf.log_partition();
    let term = |j: usize, k: usize| {
        let s = (2 * (j + k)) as f64 - n as f64;
        ln_binomial(&lf, ell, j) + ln_binomial(&lf, rest, k) + beta * s * s / (2.0 * n as f64)
            - log_z
    };

    let mut max = f64::NEG_INFINITY;
    for j in 0..=ell {
        for k in 0..=rest {
            max = max.max(term(j, k));
        }
    }
    let (mut pos, mut neg) = (0.0, 0.0);
    for j in 0..=ell {
        let mut acc = 0.0;
        for k in 0..=rest {
            acc += (term(j, k) - max).exp();
        }
        if (ell - j).is_multiple_of(2) {
            pos += acc;
        } else {
            neg += acc;
        }
    }
    Ok(max.exp() * (pos - neg))
}

fn check_brute_force_size(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::CostGuard {
            what: "2^N enumeration",
            size: n as u128,
            limit: BRUTE_FORCE_MAX_N as u128,
        });
    }
    Ok(())
}

/// Sums `f(S, config)·weight` over all `2^N` configurations and divides by `Z`.
/// Bit `i` of `config` set means `x_{i+1} = +1`.
fn brute_force_expectation(params: ModelParams, f: impl Fn(i64, u32) -> f64) -> Result<f64> {
    let n = params.n();
    check_brute_force_size(n)?;
    let beta = params.beta();
    let nf = n as f64;
    let mut z = 0.0;
    let mut acc = 0.0;
    for config in 0u32..(1u32 << n) {
        let s = 2 * config.count_ones() as i64 - n as i64;
        // Shift by the largest exponent βN/2.
        let w = (beta * (s * s) as f64 / (2.0 * nf) - beta * nf / 2.0).exp();
        z += w;
        acc += w * f(s, config);
    }
    Ok(acc / z)
}

/// `E[X_1 ⋯ X_ℓ]` by direct summation of Gibbs weights over `{−1,+1}^N`.
pub fn brute_force_correlation(params: ModelParams, ell: usize) -> Result<f64> {
    if ell > params.n() {
        return Err(Error::argument(format!(
            "ell = {ell} exceeds n = {}",
            params.n()
        )));
    }
    let mask = if ell == 0 { 0 } else { u32::MAX >> (32 - ell) };
    brute_force_expectation(params, |_, config| {
        let minus = ell as u32 - (config & mask).count_ones();
        if minus.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    })
}

/// `E[(S_N / N^α)^K]` by direct summation over `{−1,+1}^N`.
pub fn brute_force_scaled_moment(params: ModelParams, big_k: u32, alpha: f64) -> Result<f64> {
    let scale = (params.n() as f64).powf(alpha);
    brute_force_expectation(params, |s, _| (s as f64 / scale).powi(big_k as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, n: usize) -> ModelParams {
        ModelParams::new(beta, n).unwrap()
    }

    #[test]
    fn pmf_examples() {
        let p = magnetization_pmf(params(0.0, 2));
        assert_eq!(p.support().collect::<Vec<_>>(), vec![-2, 0, 2]);
        let probs = p.probabilities();
        for (got, want) in probs.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }

        for beta in [0.0, 0.7, 3.0] {
            let p = magnetization_pmf(params(beta, 1));
            assert!((p.probability(-1) - 0.5).abs() < 1e-15);
            assert!((p.probability(1) - 0.5).abs() < 1e-15);
        }

        // Brute force over the 4 configurations at β = 1: weights e, 1, 1, e.
        let e = std::f64::consts::E;
        let p = magnetization_pmf(params(1.0, 2));
        assert!((p.probability(-2) - e / (2.0 * e + 2.0)).abs() < 1e-15);
        assert!((p.probability(0) - 2.0 / (2.0 * e + 2.0)).abs() < 1e-15);
        assert!((p.probability(2) - 0.365_529_289_315_002_4).abs() < 1e-15);
        assert!((p.probability(0) - 0.268_941_421_369_995_1).abs() < 1e-15);
    }

    #[test]
    fn pmf_off_support_is_zero() {
        let p = magnetization_pmf(params(0.5, 4));
        assert_eq!(p.probability(1), 0.0);
        assert_eq!(p.probability(6), 0.0);
        assert_eq!(p.probability(-6), 0.0);
    }

    #[test]
    fn pmf_normalized_and_symmetric() {
        for beta in [0.0, 0.25, 1.0, 2.0, 5.0] {
            for n in [1usize, 2, 3, 10, 101, 1000, 20_000] {
                let p = magnetization_pmf(params(beta, n));
                assert_eq!(p.len(), n + 1);
                let total: f64 = p.probabilities().iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "β={beta} n={n}: {total}");
                let w = p.log_weights();
                for k in 0..=n {
                    assert_eq!(w[k], w[n - k]);
                }
            }
        }
    }

    #[test]
    fn correlation_examples() {
        for (beta, n) in [(0.5, 10), (1.0, 7), (2.0, 30), (1.3, 1000)] {
            for ell in [1usize, 3, 5] {
                assert!(exact_correlation(params(beta, n), ell).unwrap().abs() < 1e-14);
            }
            assert_eq!(exact_correlation(params(beta, n), 0).unwrap(), 1.0);
        }
        assert_eq!(exact_correlation(params(0.0, 10), 2).unwrap(), 0.0);
        let c = exact_correlation(params(1.0, 2), 2).unwrap();
        assert!((c - 0.5f64.tanh()).abs() < 1e-14);
        let e = std::f64::consts::E;
        assert!((c - (2.0 * e - 2.0) / (2.0 * e + 2.0)).abs() < 1e-14);
        assert!(matches!(
            exact_correlation(params(1.0, 3), 4),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn full_correlation_equals_parity_expectation() {
        // With ℓ = N the product is (−1)^{#minus}, a function of S alone.
        for beta in [0.3, 1.0, 2.5] {
            for n in [2usize, 4, 8] {
                let pmf = magnetization_pmf(params(beta, n));
                let direct: f64 = (0..=n)
                    .map(|k| {
                        let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * pmf.probability_at_index(k)
                    })
                    .sum();
                let c = exact_correlation(params(beta, n), n).unwrap();
                assert!((c - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn even_correlations_are_non_negative() {
        for beta in [0.0, 0.1, 0.5, 1.0, 1.5, 3.0] {
            for n in [4usize, 9, 40, 300] {
                for ell in [2usize, 4] {
                    let c = exact_correlation(params(beta, n), ell).unwrap();
                    // Rounding noise of the alternating sum is allowed.
                    assert!(c >= -1e-13, "β={beta} n={n} ℓ={ell}: {c}");
                }
            }
        }
    }

    #[test]
    fn scaled_moment_examples() {
        assert!((exact_scaled_moment(params(0.0, 100), 2, 0.5) - 1.0).abs() < 1e-12);
        for (beta, n) in [(0.3, 5), (1.0, 64), (2.0, 333)] {
            for k in [1u32, 3, 7] {
                for alpha in [0.5, 0.75, 1.0] {
                    assert_eq!(exact_scaled_moment(params(beta, n), k, alpha), 0.0);
                }
            }
            assert!((exact_scaled_moment(params(beta, n), 0, 0.5) - 1.0).abs() < 1e-12);
        }
        let m = exact_scaled_moment(params(0.5, 4096), 2, 0.5);
        assert!((m - 2.0).abs() / 2.0 < 0.02);
        // Reference computed with 40-digit arithmetic.
        assert!((m - 1.999_024_548_184_28).abs() < 1e-9);
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_correlation(params(0.0, 3), 2).unwrap().abs() < 1e-15);
        assert!(
            (brute_force_correlation(params(1.0, 2), 2).unwrap() - 0.462_117_157_260_009_8).abs()
                < 1e-14
        );
        assert!(matches!(
            brute_force_correlation(params(1.0, 21), 2),
            Err(Error::CostGuard { .. })
        ));
        assert!(brute_force_scaled_moment(params(1.0, 21), 2, 1.0).is_err());
    }

    #[test]
    fn reduction_matches_brute_force() {
        for beta in [0.0, 0.5, 1.0, 2.0] {
            for n in 1..=12usize {
                let p = params(beta, n);
                for ell in 0..=4usize.min(n) {
                    let fast = exact_correlation(p, ell).unwrap();
                    let slow = brute_force_correlation(p, ell).unwrap();
                    assert!((fast - slow).abs() < 1e-10, "β={beta} n={n} ℓ={ell}");
                }
                for k in 0..=6u32 {
                    for alpha in [0.5, 0.75, 1.0] {
                        let fast = exact_scaled_moment(p, k, alpha);
                        let slow = brute_force_scaled_moment(p, k, alpha).unwrap();
                        assert!((fast - slow).abs() < 1e-10 * slow.abs().max(1.0));
                    }
                }
            }
        }
    }
}
