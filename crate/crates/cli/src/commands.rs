//! One function per subcommand; each evaluates its grid and returns a table.

use cwlab::asymptotics::{
    corr_asymptotic, hs_correlation, hs_integral, laplace_approx, LaplaceProblem,
};
use cwlab::combinatorics::{
    assemble_moment, census_brute, census_from_classes, exact_moment_table,
    moment_convergence_report, w0_closed_form, ScalingMode, CENSUS_BRUTE_LIMIT,
};
use cwlab::exact::{exact_correlation, magnetization_pmf};
use cwlab::model::{f_beta, f_beta_derivative, spontaneous_magnetization};
use cwlab::sampler::{glauber_chain, sample_exact};
use cwlab::{LimitLaw, ModelParams};
use rayon::prelude::*;

use crate::output::{format_real, Cell, Table};
use crate::CliError;

/// Largest moment order accepted where partitions of K are enumerated.
pub const MAX_ASSEMBLY_ORDER: u32 = 40;

type Rows = Result<Vec<Vec<Cell>>, CliError>;

fn product<A: Copy + Send + Sync, B: Copy + Send + Sync>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (x, y)))
        .collect()
}

/// Evaluates `f` on every point in parallel and concatenates rows in grid order.
fn collect_rows<P: Sync, F>(points: &[P], f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    F: Fn(&P) -> Rows + Sync + Send,
{
    let per_point = points.par_iter().map(f).collect::<Result<Vec<_>, _>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn params(beta: f64, n: u64) -> Result<ModelParams, CliError> {
    let n = usize::try_from(n).map_err(|_| CliError::Config(format!("n = {n} is too large")))?;
    ModelParams::new(beta, n).map_err(|e| CliError::Config(e.to_string()))
}

/// Default α: 1/2 below, 3/4 at and 1 above the critical point.
pub fn default_alpha(beta: f64) -> f64 {
    if beta < 1.0 {
        0.5
    } else if beta == 1.0 {
        0.75
    } else {
        1.0
    }
}

pub fn correlations(betas: &[f64], ns: &[u64], ells: &[u64]) -> Result<Table, CliError> {
    let mut table = Table::new(vec!["n", "beta", "ell", "exact", "hs", "asymptotic"]);
    let points: Vec<(f64, u64, u64)> = product(betas, ns)
        .into_iter()
        .flat_map(|(b, n)| ells.iter().map(move |&l| (b, n, l)))
        .collect();
    table.rows = collect_rows(&points, |&(beta, n, ell)| {
        let p = params(beta, n)?;
        if ell > n {
            return Err(CliError::Config(format!("ell = {ell} exceeds n = {n}")));
        }
        let ell_us = ell as usize;
        let exact = exact_correlation(p, ell_us)?;
        let hs = if beta > 0.0 {
            Some(hs_correlation(p, ell_us)?)
        } else {
            None
        };
        let asymptotic = if ell % 2 == 1 {
            0.0
        } else {
            corr_asymptotic(beta, ell as u32, n as usize)?
        };
        Ok(vec![vec![
            n.into(),
            beta.into(),
            ell.into(),
            exact.into(),
            hs.into(),
            asymptotic.into(),
        ]])
    })?;
    Ok(table)
}

fn check_order(ks: &[u64]) -> Result<Vec<u32>, CliError> {
    ks.iter()
        .map(|&k| {
            u32::try_from(k)
                .ok()
                .filter(|&k| k <= MAX_ASSEMBLY_ORDER)
                .ok_or_else(|| {
                    CliError::Config(format!("k = {k} exceeds the limit of {MAX_ASSEMBLY_ORDER}"))
                })
        })
        .collect()
}

pub fn moments(
    betas: &[f64],
    ns: &[u64],
    ks: &[u64],
    alpha: Option<f64>,
) -> Result<Table, CliError> {
    let ks = check_order(ks)?;
    let mut table = Table::new(vec![
        "n",
        "beta",
        "k",
        "alpha",
        "exact_moment",
        "assembled_moment",
        "limit_moment",
    ]);
    let points = product(betas, ns);
    table.rows = collect_rows(&points, |&(beta, n)| {
        let p = params(beta, n)?;
        let alpha = alpha.unwrap_or_else(|| default_alpha(beta));
        let pmf = magnetization_pmf(p);
        let law = LimitLaw::for_scaling(beta, alpha).ok();
        let mode = ScalingMode::infer(beta, alpha).ok();
        ks.iter()
            .map(|&k| {
                let assembled = match mode {
                    Some(mode) => {
                        Some(assemble_moment(beta, n as usize, k as usize, alpha, mode)?.value)
                    }
                    None => None,
                };
                Ok(vec![
                    n.into(),
                    beta.into(),
                    k.into(),
                    alpha.into(),
                    pmf.scaled_moment(k, alpha).into(),
                    assembled.into(),
                    law.as_ref().map(|l| l.moment(k)).into(),
                ])
            })
            .collect()
    })?;
    Ok(table)
}

/// Rows of exact versus limiting moments, plus a human-readable convergence
/// summary (one line per β and k) for the error stream.
pub fn limit_check(
    betas: &[f64],
    ns: &[u64],
    ks: &[u64],
    alpha: Option<f64>,
    tolerance: f64,
) -> Result<(Table, Vec<String>), CliError> {
    let ks = check_order(ks)?;
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let ns_usize: Vec<usize> = ns
        .iter()
        .map(|&n| params(1.0, n).map(|p| p.n()))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec![
        "n",
        "beta",
        "k",
        "alpha",
        "exact_moment",
        "limit_moment",
        "abs_gap",
    ]);
    let mut summary = Vec::new();
    for &beta in betas {
        let alpha = alpha.unwrap_or_else(|| default_alpha(beta));
        ModelParams::new(beta, 1).map_err(|e| CliError::Config(e.to_string()))?;
        let law = LimitLaw::for_scaling(beta, alpha)?;
        let moments = exact_moment_table(beta, &ns_usize, k_max, alpha)?;
        for (&n, row) in ns.iter().zip(&moments) {
            for &k in &ks {
                let exact = row[k as usize];
                let limit = law.moment(k);
                table.push(vec![
                    n.into(),
                    beta.into(),
                    k.into(),
                    alpha.into(),
                    exact.into(),
                    limit.into(),
                    (exact - limit).abs().into(),
                ]);
            }
        }

        let mut order: Vec<usize> = (0..ns_usize.len()).collect();
        order.sort_by_key(|&i| ns_usize[i]);
        order.dedup_by_key(|i| ns_usize[*i]);
        let sorted_ns: Vec<usize> = order.iter().map(|&i| ns_usize[i]).collect();
        let sorted_moments: Vec<Vec<f64>> = order.iter().map(|&i| moments[i].clone()).collect();
        let report = moment_convergence_report(&sorted_ns, &sorted_moments, &law, tolerance)?;
        for &k in &ks {
            let g = &report.gaps[k as usize];
            summary.push(format!(
                "beta={beta} alpha={alpha} k={k}: limit {} gap {:.3e} (N={}) -> {:.3e} (N={}) {} {}",
                format_real(g.limit),
                g.first_gap,
                sorted_ns[0],
                g.last_gap,
                sorted_ns[sorted_ns.len() - 1],
                if g.gap_decreased { "decreasing" } else { "not decreasing" },
                if g.pass { "PASS" } else { "FAIL" },
            ));
        }
    }
    Ok((table, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SampleMethod {
    /// Independent draws from the exact magnetization distribution.
    Exact,
    /// Heat-bath Glauber chain, one record per sweep after burn-in.
    Glauber,
}

pub fn sample(
    betas: &[f64],
    ns: &[u64],
    samples: usize,
    seed: u64,
    method: SampleMethod,
    burn_in: usize,
) -> Result<Table, CliError> {
    if samples == 0 {
        return Err(CliError::Config("samples must be positive".into()));
    }
    let mut table = Table::new(vec!["n", "beta", "s", "count", "frequency", "probability"]);
    let points = product(betas, ns);
    table.rows = collect_rows(&points, |&(beta, n)| {
        let p = params(beta, n)?;
        let batch = match method {
            SampleMethod::Exact => sample_exact(p, samples, seed)?,
            SampleMethod::Glauber => glauber_chain(p, burn_in + samples, seed, burn_in)?,
        };
        let pmf = magnetization_pmf(p);
        let total = batch.len() as f64;
        Ok(batch
            .histogram()
            .into_iter()
            .zip(pmf.support())
            .enumerate()
            .map(|(i, (count, s))| {
                vec![
                    n.into(),
                    beta.into(),
                    s.into(),
                    count.into(),
                    (count as f64 / total).into(),
                    pmf.probability_at_index(i).into(),
                ]
            })
            .collect())
    })?;
    Ok(table)
}

pub fn phase(betas: &[f64]) -> Result<Table, CliError> {
    let mut table = Table::new(vec!["beta", "m", "phase"]);
    table.rows = collect_rows(betas, |&beta| {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(CliError::Config(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        let (m, label) = if beta > 1.0 {
            (spontaneous_magnetization(beta)?, "supercritical")
        } else {
            (0.0, "subcritical")
        };
        Ok(vec![vec![beta.into(), m.into(), label.into()]])
    })?;
    Ok(table)
}

/// Laplace approximation of `∫ e^{−N F_β} tanh^ℓ` against quadrature.
///
/// For β ≤ 1 the single minimum sits at 0 and `tanh^ℓ t = t^ℓ·(tanh t / t)^ℓ`;
/// for β > 1 each of the two symmetric minima ±t₀ contributes equally.
/// Both columns are normalized by `e^{−N F_β(t₀)}`.
pub fn laplace_check(betas: &[f64], ns: &[u64], ells: &[u64]) -> Result<Table, CliError> {
    if let Some(ell) = ells.iter().find(|&&l| l % 2 == 1) {
        return Err(CliError::Config(format!(
            "laplace-check needs even ell, got {ell}"
        )));
    }
    let mut table = Table::new(vec![
        "n",
        "beta",
        "ell",
        "t0",
        "order",
        "laplace",
        "direct",
        "rel_error",
    ]);
    let points: Vec<(f64, u64, u64)> = product(betas, ns)
        .into_iter()
        .flat_map(|(b, n)| ells.iter().map(move |&l| (b, n, l)))
        .collect();
    table.rows = collect_rows(&points, |&(beta, n, ell)| {
        let p = params(beta, n)?;
        if beta == 0.0 {
            return Err(CliError::Config("laplace-check needs beta > 0".into()));
        }
        let ell32 = u32::try_from(ell)
            .map_err(|_| CliError::Config(format!("ell = {ell} is too large")))?;
        let exponent = move |t: f64| f_beta(beta, t).unwrap_or(f64::INFINITY);
        let (t0, order, laplace) = if beta > 1.0 {
            let t0 = beta * spontaneous_magnetization(beta)?;
            let curvature = f_beta_derivative(beta, t0, 2)?;
            let weight = move |t: f64| t.tanh().powi(ell32 as i32);
            let problem = LaplaceProblem::new(exponent, t0, 2, curvature, weight)?;
            (t0, 2, 2.0 * laplace_approx(&problem, n as f64, 0)?)
        } else {
            let (order, derivative) = if beta < 1.0 {
                (2, f_beta_derivative(beta, 0.0, 2)?)
            } else {
                (4, f_beta_derivative(beta, 0.0, 4)?)
            };
            let weight = move |t: f64| {
                if t == 0.0 {
                    1.0
                } else {
                    (t.tanh() / t).powi(ell32 as i32)
                }
            };
            let problem = LaplaceProblem::new(exponent, 0.0, order, derivative, weight)?;
            (0.0, order, laplace_approx(&problem, n as f64, ell32)?)
        };
        let hs = hs_integral(p, ell as usize)?;
        let direct = (hs.log_value + hs.shift).exp();
        Ok(vec![vec![
            n.into(),
            beta.into(),
            ell.into(),
            t0.into(),
            order.into(),
            laplace.into(),
            direct.into(),
            (laplace / direct - 1.0).abs().into(),
        ]])
    })?;
    Ok(table)
}

pub fn census(ks: &[u64], ns: &[u64]) -> Result<Table, CliError> {
    let ks = check_order(ks)?;
    let mut table = Table::new(vec![
        "k",
        "n",
        "r",
        "w",
        "w0",
        "w_plus",
        "w0_closed_form",
        "count_bound",
        "plus_bound",
        "source",
    ]);
    let points = product(&ks, ns);
    table.rows = collect_rows(&points, |&(k, n)| {
        if k == 0 || n == 0 {
            return Err(CliError::Config("census needs k >= 1 and n >= 1".into()));
        }
        let (k, n) = (k as usize, params(1.0, n)?.n());
        let brute_ok = (n as f64).powi(k as i32) <= CENSUS_BRUTE_LIMIT as f64;
        let (census, source) = if brute_ok {
            (census_brute(k, n)?, "enumeration")
        } else {
            (census_from_classes(k, n), "classes")
        };
        Ok((0..=k)
            .map(|r| {
                vec![
                    k.into(),
                    n.into(),
                    r.into(),
                    Cell::Big(census.w(r).to_string()),
                    Cell::Big(census.w0(r).to_string()),
                    Cell::Big(census.w_plus(r).to_string()),
                    Cell::Big(w0_closed_form(k, n, r).to_string()),
                    census.count_bound_holds(r).into(),
                    census.plus_bound_holds(r).into(),
                    source.into(),
                ]
            })
            .collect())
    })?;
    Ok(table)
}
