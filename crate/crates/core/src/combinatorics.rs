//! Multiindex bookkeeping for moments of `S_N` and the reassembly of those
//! moments from correlations.
//!
//! Expanding `E[S_N^K] = Σ_{i_1..i_K} E[X_{i_1}⋯X_{i_K}]`, a tuple contributes
//! `E[X_1⋯X_ℓ]` where `ℓ` is the number of indices that occur an odd number of
//! times. Tuples are classified by
//!
//! * `W(r)`: exactly `r` distinct indices occur once,
//! * `W⁰(r) ⊂ W(r)`: additionally no index occurs more than twice,
//! * `W⁺(r) = W(r) \ W⁰(r)`.
//!
//! Counts are exact big integers; they reach `N^K`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::asymptotics::corr_asymptotic;
use crate::exact::{exact_correlation, MagnetizationPmf};
use crate::model::{LimitLaw, ModelParams};
use crate::{Error, Result};

/// Largest `N^K` the enumeration oracle will walk through.
pub const CENSUS_BRUTE_LIMIT: u128 = 10_000_000;

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, j| acc * j)
}

/// `N!/(N−d)!`, zero when `d > N`.
fn falling(n: usize, d: usize) -> BigUint {
    if d > n {
        return BigUint::zero();
    }
    ((n - d + 1)..=n).fold(BigUint::one(), |acc, j| acc * j)
}

/// `w⁰_{K,N}(r) = N!/(N−(K+r)/2)! · K!/(r!·((K−r)/2)!·2^{(K−r)/2})` when
/// `K − r` is even, else 0.
pub fn w0_closed_form(big_k: usize, n: usize, r: usize) -> BigUint {
    if r > big_k || (big_k - r) % 2 == 1 {
        return BigUint::zero();
    }
    let pairs = (big_k - r) / 2;
    let distinct = r + pairs;
    let numerator = falling(n, distinct) * factorial(big_k);
    let denominator = factorial(r) * factorial(pairs) * (BigUint::one() << pairs);
    numerator / denominator
}

/// Counts `w(r)`, `w⁰(r)`, `w⁺(r)` for `r = 0..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiindexCensus {
    big_k: usize,
    n: usize,
    w: Vec<BigUint>,
    w0: Vec<BigUint>,
    w_plus: Vec<BigUint>,
}

impl MultiindexCensus {
    fn from_parts(big_k: usize, n: usize, w0: Vec<BigUint>, w_plus: Vec<BigUint>) -> Self {
        let w = w0.iter().zip(&w_plus).map(|(a, b)| a + b).collect();
        MultiindexCensus {
            big_k,
            n,
            w,
            w0,
            w_plus,
        }
    }

    pub fn big_k(&self) -> usize {
        self.big_k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self, r: usize) -> &BigUint {
        &self.w[r]
    }

    pub fn w0(&self, r: usize) -> &BigUint {
        &self.w0[r]
    }

    pub fn w_plus(&self, r: usize) -> &BigUint {
        &self.w_plus[r]
    }

    /// `Σ_r w(r)`; equals `N^K`.
    pub fn total(&self) -> BigUint {
        self.w.iter().sum()
    }

    /// `w(r) <= K!·N^{(K+r)/2}`, compared after squaring.
    pub fn count_bound_holds(&self, r: usize) -> bool {
        let kf = factorial(self.big_k);
        let lhs = &self.w[r] * &self.w[r];
        let rhs = &kf * &kf * BigUint::from(self.n).pow((self.big_k + r) as u32);
        lhs <= rhs
    }

    /// `w⁺(r) <= K!·N^{(K+r)/2 − 1/2}`, compared after squaring.
    pub fn plus_bound_holds(&self, r: usize) -> bool {
        let kf = factorial(self.big_k);
        let lhs = &self.w_plus[r] * &self.w_plus[r];
        let rhs = &kf * &kf * BigUint::from(self.n).pow((self.big_k + r - 1) as u32);
        lhs <= rhs
    }
}

/// Enumerates all `N^K` tuples and classifies each one.
pub fn census_brute(big_k: usize, n: usize) -> Result<MultiindexCensus> {
    if big_k == 0 || n == 0 {
        return Err(Error::argument("census needs K >= 1 and N >= 1"));
    }
    let size = (n as u128).checked_pow(big_k as u32).unwrap_or(u128::MAX);
    if size > CENSUS_BRUTE_LIMIT {
        return Err(Error::CostGuard {
            what: "multiindex enumeration",
            size,
            limit: CENSUS_BRUTE_LIMIT,
        });
    }

    // Split on the leading index; each worker walks the remaining K−1 slots.
    let (w0, w_plus) = (0..n)
        .into_par_iter()
        .map(|lead| {
            let mut w0 = vec![0u64; big_k + 1];
            let mut w_plus = vec![0u64; big_k + 1];
            let mut tuple = vec![0usize; big_k];
            tuple[0] = lead;
            let mut counts = vec![0u32; n];
            loop {
                counts.iter_mut().for_each(|c| *c = 0);
                for &i in &tuple {
                    counts[i] += 1;
                }
                let singles = counts.iter().filter(|&&c| c == 1).count();
                if counts.iter().all(|&c| c <= 2) {
                    w0[singles] += 1;
                } else {
                    w_plus[singles] += 1;
                }
                // Odometer over positions 1..K.
                let mut pos = big_k;
                loop {
                    if pos == 1 {
                        return (w0, w_plus);
                    }
                    pos -= 1;
                    tuple[pos] += 1;
                    if tuple[pos] < n {
                        break;
                    }
                    tuple[pos] = 0;
                }
            }
        })
        .reduce(
            || (vec![0u64; big_k + 1], vec![0u64; big_k + 1]),
            |(mut a0, mut ap), (b0, bp)| {
                for r in 0..=big_k {
                    a0[r] += b0[r];
                    ap[r] += bp[r];
                }
                (a0, ap)
            },
        );
    let to_big = |v: Vec<u64>| v.into_iter().map(BigUint::from).collect();
    Ok(MultiindexCensus::from_parts(
        big_k,
        n,
        to_big(w0),
        to_big(w_plus),
    ))
}

/// All tuples whose index multiplicities form the partition `parts` of `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityClass {
    /// Multiplicities of the distinct indices, non-increasing.
    pub parts: Vec<usize>,
    /// Number of tuples in `{1..N}^K` with exactly these multiplicities.
    pub count: BigUint,
}

impl MultiplicityClass {
    /// Indices occurring exactly once (`r`).
    pub fn singles(&self) -> usize {
        self.parts.iter().filter(|&&p| p == 1).count()
    }

    /// Indices occurring an odd number of times: the length `ℓ` of the
    /// correlation `E[X_1⋯X_ℓ]` every tuple of the class reduces to.
    pub fn odd_parts(&self) -> usize {
        self.parts.iter().filter(|&&p| p % 2 == 1).count()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.parts.first().copied().unwrap_or(0)
    }
}

fn partitions(rest: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if rest == 0 {
        out.push(current.clone());
        return;
    }
    for p in (1..=max_part.min(rest)).rev() {
        current.push(p);
        partitions(rest - p, p, current, out);
        current.pop();
    }
}

/// Groups `{1..N}^K` by multiplicity pattern. A pattern with `d` distinct
/// indices, `m_v` of them of multiplicity `v`, holds
/// `N!/(N−d)! / Π m_v! · K!/Π λ_i!` tuples.
pub fn multiplicity_classes(big_k: usize, n: usize) -> Vec<MultiplicityClass> {
    let mut all = Vec::new();
    partitions(big_k, big_k, &mut Vec::new(), &mut all);
    all.into_iter()
        .filter(|parts| parts.len() <= n)
        .map(|parts| {
            let mut multinomial = factorial(big_k);
            for &p in &parts {
                multinomial /= factorial(p);
            }
            let mut symmetry = BigUint::one();
            let mut i = 0;
            while i < parts.len() {
                let run = parts[i..].iter().take_while(|&&p| p == parts[i]).count();
                symmetry *= factorial(run);
                i += run;
            }
            let count = falling(n, parts.len()) / symmetry * multinomial;
            MultiplicityClass { parts, count }
        })
        .collect()
}

/// Same counts as [`census_brute`], from [`multiplicity_classes`]; works for any N.
pub fn census_from_classes(big_k: usize, n: usize) -> MultiindexCensus {
    let mut w0 = vec![BigUint::zero(); big_k + 1];
    let mut w_plus = vec![BigUint::zero(); big_k + 1];
    for class in multiplicity_classes(big_k, n) {
        let r = class.singles();
        if class.max_multiplicity() <= 2 {
            w0[r] += &class.count;
        } else {
            w_plus[r] += &class.count;
        }
    }
    MultiindexCensus::from_parts(big_k, n, w0, w_plus)
}

/// Scaling regime of `S_N / N^α` used by the moment assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    /// α = 1, any β.
    Lln,
    /// α = 1/2, β < 1.
    Clt,
    /// α = 3/4, β = 1.
    Nclt,
}

impl ScalingMode {
    pub fn alpha(self) -> f64 {
        match self {
            ScalingMode::Lln => 1.0,
            ScalingMode::Clt => 0.5,
            ScalingMode::Nclt => 0.75,
        }
    }

    /// Picks the mode for `(β, α)`. β = 1 maps to [`ScalingMode::Nclt`] only for α = 3/4.
    pub fn infer(beta: f64, alpha: f64) -> Result<Self> {
        [ScalingMode::Lln, ScalingMode::Clt, ScalingMode::Nclt]
            .into_iter()
            .find(|m| m.check(beta, alpha).is_ok())
            .ok_or_else(|| {
                Error::argument(format!(
                    "no scaling mode for beta = {beta}, alpha = {alpha}"
                ))
            })
    }

    fn check(self, beta: f64, alpha: f64) -> Result<()> {
        let alpha_ok = (alpha - self.alpha()).abs() <= 1e-12;
        let beta_ok = match self {
            ScalingMode::Lln => beta >= 0.0,
            ScalingMode::Clt => (0.0..1.0).contains(&beta),
            ScalingMode::Nclt => beta == 1.0,
        };
        if alpha_ok && beta_ok && beta.is_finite() {
            Ok(())
        } else {
            Err(Error::argument(format!(
                "mode {self:?} requires alpha = {} and a matching beta; got beta = {beta}, alpha = {alpha}",
                self.alpha()
            )))
        }
    }
}

/// Where the assembly takes `E[X_1⋯X_ℓ]` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationSource {
    /// Large-N formulas ([`corr_asymptotic`]).
    Asymptotic,
    /// Finite-N values ([`exact_correlation`]).
    Exact,
}

/// `E[(S_N/N^α)^K]` split as in the method-of-moments argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembledMoment {
    pub mode: ScalingMode,
    /// `leading + remainder`.
    pub value: f64,
    /// Lln/Nclt: tuples of K distinct indices. Clt: tuples in `W⁰`.
    pub leading: f64,
    /// Everything else (`W⁺` for Clt); vanishes as N grows.
    pub remainder: f64,
}

/// [`assemble_moment_with`] using the large-N correlation formulas.
pub fn assemble_moment(
    beta: f64,
    n: usize,
    big_k: usize,
    alpha: f64,
    mode: ScalingMode,
) -> Result<AssembledMoment> {
    assemble_moment_with(beta, n, big_k, alpha, mode, CorrelationSource::Asymptotic)
}

/// Reassembles `N^{−αK} Σ_{tuples} E[X_1⋯X_ℓ(tuple)]` class by class.
///
/// With [`CorrelationSource::Exact`] the result equals the exact moment up to
/// rounding; with [`CorrelationSource::Asymptotic`] it tends to the moment of
/// the limit law.
pub fn assemble_moment_with(
    beta: f64,
    n: usize,
    big_k: usize,
    alpha: f64,
    mode: ScalingMode,
    source: CorrelationSource,
) -> Result<AssembledMoment> {
    mode.check(beta, alpha)?;
    let params = ModelParams::new(beta, n)?;

    let correlations = (0..=big_k.min(n))
        .map(|ell| match source {
            _ if ell % 2 == 1 => Ok(0.0),
            CorrelationSource::Asymptotic => corr_asymptotic(beta, ell as u32, n),
            CorrelationSource::Exact => exact_correlation(params, ell),
        })
        .collect::<Result<Vec<f64>>>()?;

    let (mut leading, mut remainder) = (0.0, 0.0);
    for class in multiplicity_classes(big_k, n) {
        let count = class.count.to_f64().unwrap_or(f64::INFINITY);
        let term = count * correlations[class.odd_parts()];
        let is_leading = match mode {
            ScalingMode::Lln | ScalingMode::Nclt => class.singles() == big_k,
            ScalingMode::Clt => class.max_multiplicity() <= 2,
        };
        if is_leading {
            leading += term;
        } else {
            remainder += term;
        }
    }
    let scale = (n as f64).powf(-alpha * big_k as f64);
    Ok(AssembledMoment {
        mode,
        value: scale * (leading + remainder),
        leading: scale * leading,
        remainder: scale * remainder,
    })
}

/// Exact `E[(S_N/N^α)^k]` for `k = 0..=k_max`, one row per N, computed in parallel.
pub fn exact_moment_table(
    beta: f64,
    ns: &[usize],
    k_max: u32,
    alpha: f64,
) -> Result<Vec<Vec<f64>>> {
    ns.par_iter()
        .map(|&n| {
            let pmf = MagnetizationPmf::new(ModelParams::new(beta, n)?);
            Ok((0..=k_max).map(|k| pmf.scaled_moment(k, alpha)).collect())
        })
        .collect()
}

/// Gap between observed and limiting moment of order `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentGap {
    pub k: u32,
    pub limit: f64,
    /// `|m_k(N) − m_k(μ)|` at the smallest N.
    pub first_gap: f64,
    /// Same at the largest N.
    pub last_gap: f64,
    /// `last_gap < first_gap`, or both zero.
    pub gap_decreased: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub law: LimitLaw,
    pub tolerance: f64,
    pub ns: Vec<usize>,
    pub gaps: Vec<MomentGap>,
}

impl ConvergenceReport {
    pub fn all_pass(&self) -> bool {
        self.gaps.iter().all(|g| g.pass)
    }
}

/// Compares moment sequences `moments[i][k]` (for `N = ns[i]`, increasing)
/// with the moments of `law`.
///
/// Order `k` passes when the gap at the largest N is at most
/// `tolerance·|m_k(μ)|`, or at most `tolerance` when `m_k(μ) = 0`.
/// Weak convergence additionally needs the limit's moments to grow no faster
/// than `A·C^k·k!`; all four [`LimitLaw`] variants satisfy this (their moments
/// are bounded by those of a Gaussian), so it is not checked here.
pub fn moment_convergence_report(
    ns: &[usize],
    moments: &[Vec<f64>],
    law: &LimitLaw,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    if ns.is_empty() || moments.is_empty() {
        return Err(Error::argument("moment sequence is empty"));
    }
    if ns.len() != moments.len() {
        return Err(Error::argument("one moment row is needed per N"));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::argument("N values must be strictly increasing"));
    }
    let k_count = moments[0].len();
    if k_count == 0 || moments.iter().any(|row| row.len() != k_count) {
        return Err(Error::argument(
            "moment rows must be non-empty and of equal length",
        ));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::domain(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }

    let first = &moments[0];
    let last = &moments[moments.len() - 1];
    let gaps = (0..k_count)
        .map(|k| {
            let limit = law.moment(k as u32);
            let first_gap = (first[k] - limit).abs();
            let last_gap = (last[k] - limit).abs();
            let allowed = if limit != 0.0 {
                tolerance * limit.abs()
            } else {
                tolerance
            };
            MomentGap {
                k: k as u32,
                limit,
                first_gap,
                last_gap,
                gap_decreased: last_gap < first_gap || (last_gap == 0.0 && first_gap == 0.0),
                pass: last_gap <= allowed,
            }
        })
        .collect();
    Ok(ConvergenceReport {
        law: *law,
        tolerance,
        ns: ns.to_vec(),
        gaps,
    })
}
