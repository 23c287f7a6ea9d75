//! Integral representation of the correlations, the Laplace approximation and
//! the large-N correlation formulas.
//!
//! With `F_β(t) = t²/(2β) − ln cosh t`,
//! `E[X_1⋯X_ℓ] = 𝒵_N(ℓ) / 𝒵_N(0)` where `𝒵_N(ℓ) = ∫ e^{−N F_β(t)} tanh^ℓ(t) dt`.
//! For β ≤ 1 the exponent has its minimum at 0; for β > 1 at `±β·m(β)`.

use std::sync::Arc;

use crate::model::{f_beta, f_beta_derivative, spontaneous_magnetization, LimitLaw, ModelParams};
use crate::quadrature::{integrate, Tolerance};
use crate::special::{double_factorial, gamma, ln_gamma};
use crate::{Error, Result};

const HS_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-12,
};
const HS_MAX_SEGMENTS: usize = 4000;
// e^{−60} ≈ 1e−26: the tail beyond the cut-off is far below 1e−16 of the peak.
const TAIL_EXPONENT: f64 = 60.0;

/// `𝒵_N(ℓ)` in log form together with the stabilizing shift `min_t N·F_β(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsIntegral {
    pub params: ModelParams,
    pub ell: usize,
    /// `ln 𝒵_N(ℓ)`; `−∞` for odd `ℓ`, where the integral vanishes.
    pub log_value: f64,
    pub shift: f64,
}

impl HsIntegral {
    /// `ln 𝒯_N(ℓ)`, where `𝒯_N(ℓ) = 2^{−N} Σ_x x_1⋯x_ℓ e^{β S²/2N}` equals
    /// `√N / √(2πβ) · 𝒵_N(ℓ)`.
    pub fn log_spin_sum(&self) -> f64 {
        let n = self.params.n() as f64;
        let beta = self.params.beta();
        self.log_value + 0.5 * n.ln() - 0.5 * (2.0 * std::f64::consts::PI * beta).ln()
    }
}

/// Integration layout for the stabilized integrand on the half line.
struct HsDomain {
    beta: f64,
    n: f64,
    shift: f64,
    points: Vec<f64>,
}

impl HsDomain {
    fn new(params: ModelParams) -> Result<Self> {
        let beta = params.beta();
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::domain(format!(
                "the integral representation needs beta > 0, got {beta}"
            )));
        }
        let n = params.n() as f64;
        let peak = if beta > 1.0 {
            beta * spontaneous_magnetization(beta)?
        } else {
            0.0
        };
        let f_min = f_beta(beta, peak)?;
        let shift = n * f_min;

        // Peak width: the smaller of the quadratic and quartic scales.
        let curvature = f_beta_derivative(beta, peak, 2)?;
        let quartic_width = (12.0 / n).powf(0.25);
        let width = if curvature > 0.0 {
            (1.0 / (n * curvature).sqrt()).min(quartic_width)
        } else {
            quartic_width
        };

        let excess = |t: f64| n * (f_beta(beta, t).unwrap_or(f64::INFINITY) - f_min);
        let mut cutoff = peak + (10.0 * width).max(1.0);
        while excess(cutoff) < TAIL_EXPONENT {
            cutoff *= 2.0;
        }

        let mut points = vec![0.0, cutoff];
        for c in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            for t in [peak - c * width, peak + c * width] {
                if t > 0.0 && t < cutoff {
                    points.push(t);
                }
            }
        }
        if peak > 0.0 {
            points.push(peak);
        }
        points.sort_by(f64::total_cmp);
        points.dedup();

        Ok(HsDomain {
            beta,
            n,
            shift,
            points,
        })
    }

    /// `ln ∫_{−∞}^{∞} e^{−N F_β} tanh^ℓ` for even `ℓ`.
    fn log_integral(&self, ell: usize) -> Result<f64> {
        let (beta, n, shift) = (self.beta, self.n, self.shift);
        let integrand = |t: f64| {
            let f = t * t / (2.0 * beta) - crate::special::ln_cosh(t);
            (-(n * f - shift)).exp() * t.tanh().powi(ell as i32)
        };
        let half = integrate(integrand, &self.points, HS_TOLERANCE, HS_MAX_SEGMENTS)?;
        Ok((2.0 * half.value).ln() - shift)
    }
}

/// `𝒵_N(ℓ)` by adaptive quadrature of the stabilized integrand.
pub fn hs_integral(params: ModelParams, ell: usize) -> Result<HsIntegral> {
    let domain = HsDomain::new(params)?;
    let log_value = if ell % 2 == 1 {
        f64::NEG_INFINITY
    } else {
        domain.log_integral(ell)?
    };
    Ok(HsIntegral {
        params,
        ell,
        log_value,
        shift: domain.shift,
    })
}

/// `E[X_1⋯X_ℓ] = 𝒵_N(ℓ) / 𝒵_N(0)`; differs from
/// [`exact_correlation`](crate::exact::exact_correlation) only by quadrature error.
pub fn hs_correlation(params: ModelParams, ell: usize) -> Result<f64> {
    if ell > params.n() {
        return Err(Error::argument(format!(
            "ell = {ell} exceeds n = {}",
            params.n()
        )));
    }
    let domain = HsDomain::new(params)?;
    if ell % 2 == 1 {
        return Ok(0.0);
    }
    if ell == 0 {
        return Ok(1.0);
    }
    Ok((domain.log_integral(ell)? - domain.log_integral(0)?).exp())
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Integrand descriptor for `∫ e^{−N F(t)} (t − t₀)^ℓ φ(t) dt`.
///
/// `F` is assumed to have its unique global minimum at `t₀` with
/// `F(t₀) = F'(t₀) = … = F^{(m−1)}(t₀) = 0` and `F^{(m)}(t₀) > 0`, `m` even.
#[derive(Clone)]
pub struct LaplaceProblem {
    exponent: RealFn,
    minimizer: f64,
    order: u32,
    leading_derivative: f64,
    weight: RealFn,
}

impl std::fmt::Debug for LaplaceProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LaplaceProblem")
            .field("minimizer", &self.minimizer)
            .field("order", &self.order)
            .field("leading_derivative", &self.leading_derivative)
            .finish_non_exhaustive()
    }
}

impl LaplaceProblem {
    pub fn new<F, P>(
        exponent: F,
        minimizer: f64,
        order: u32,
        leading_derivative: f64,
        weight: P,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if order == 0 || order % 2 == 1 {
            return Err(Error::argument(format!(
                "order must be even and positive, got {order}"
            )));
        }
        if !(leading_derivative > 0.0 && leading_derivative.is_finite()) {
            return Err(Error::domain(format!(
                "leading derivative must be positive, got {leading_derivative}"
            )));
        }
        if !minimizer.is_finite() {
            return Err(Error::domain("minimizer must be finite"));
        }
        Ok(LaplaceProblem {
            exponent: Arc::new(exponent),
            minimizer,
            order,
            leading_derivative,
            weight: Arc::new(weight),
        })
    }

    pub fn minimizer(&self) -> f64 {
        self.minimizer
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn leading_derivative(&self) -> f64 {
        self.leading_derivative
    }

    pub fn exponent_at(&self, t: f64) -> f64 {
        (self.exponent)(t)
    }

    pub fn weight_at(&self, t: f64) -> f64 {
        (self.weight)(t)
    }

    /// Scale of the peak of `e^{−N F}`: `(N F^{(m)}(t₀) / m!)^{−1/m}`.
    pub fn peak_width(&self, n_scale: f64) -> f64 {
        let m = self.order as f64;
        let ln_m_fact = ln_gamma(m + 1.0);
        ((ln_m_fact - (n_scale * self.leading_derivative).ln()) / m).exp()
    }

    /// Reference value by quadrature over `[t₀ − h, t₀ + h]`.
    pub fn direct_integral(&self, n_scale: f64, ell: u32, half_width: f64) -> Result<f64> {
        if !(n_scale > 0.0 && half_width > 0.0) {
            return Err(Error::domain("n_scale and half_width must be positive"));
        }
        let t0 = self.minimizer;
        let f0 = self.exponent_at(t0);
        let w = self.peak_width(n_scale);
        let mut points = vec![t0 - half_width, t0, t0 + half_width];
        for c in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            for t in [t0 - c * w, t0 + c * w] {
                if (t - t0).abs() < half_width {
                    points.push(t);
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let integrand = |t: f64| {
            (-n_scale * (self.exponent_at(t) - f0)).exp()
                * (t - t0).powi(ell as i32)
                * self.weight_at(t)
        };
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-11,
        };
        Ok(integrate(integrand, &points, tol, 20_000)?.value)
    }
}

/// `∫ e^{−t^m/m!} t^ℓ dt = (2/m)·(m!)^{(ℓ+1)/m}·Γ((ℓ+1)/m)` for even `ℓ`, else 0.
pub fn universal_integral(order: u32, ell: u32) -> f64 {
    if ell % 2 == 1 {
        return 0.0;
    }
    let m = order as f64;
    let p = (ell as f64 + 1.0) / m;
    let ln_m_fact = ln_gamma(m + 1.0);
    (2.0 / m) * (p * ln_m_fact).exp() * gamma(p)
}

/// Leading-order Laplace approximation of `∫ e^{−N F(t)} (t − t₀)^ℓ φ(t) dt`:
/// `(N F^{(m)}(t₀))^{−(ℓ+1)/m} · φ(t₀) · ∫ e^{−t^m/m!} t^ℓ dt`.
pub fn laplace_approx(problem: &LaplaceProblem, n_scale: f64, ell: u32) -> Result<f64> {
    if !(n_scale > 0.0 && n_scale.is_finite()) {
        return Err(Error::domain(format!(
            "n_scale must be positive, got {n_scale}"
        )));
    }
    let t0 = problem.minimizer;
    let phi0 = problem.weight_at(t0);
    if phi0 == 0.0 || !phi0.is_finite() {
        return Err(Error::DegenerateWeight { t0 });
    }
    if ell % 2 == 1 {
        return Ok(0.0);
    }
    let m = problem.order as f64;
    let scale = (-(ell as f64 + 1.0) / m * (n_scale * problem.leading_derivative).ln()).exp();
    Ok(scale * phi0 * universal_integral(problem.order, ell))
}

/// Large-N behaviour of `E[X_1⋯X_ℓ]` for even `ℓ`:
///
/// * β < 1: `(ℓ−1)!!·(β/(1−β))^{ℓ/2}·N^{−ℓ/2}`
/// * β = 1: `N^{−ℓ/4}·∫t^ℓ e^{−t⁴/12} / ∫e^{−t⁴/12}`
/// * β > 1: `m(β)^ℓ`
///
/// The regime is chosen by exact comparison of β with 1. β = 0 is accepted
/// and falls in the first branch.
pub fn corr_asymptotic(beta: f64, ell: u32, n: usize) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    if ell % 2 == 1 {
        return Err(Error::argument(format!("ell must be even, got {ell}")));
    }
    if n == 0 {
        return Err(Error::argument("n must be at least 1"));
    }
    let nf = n as f64;
    let half = ell as f64 / 2.0;
    if beta < 1.0 {
        if ell == 0 {
            return Ok(1.0);
        }
        Ok(double_factorial(ell as i64 - 1) * (beta / (1.0 - beta)).powf(half) * nf.powf(-half))
    } else if beta == 1.0 {
        Ok(nf.powf(-(ell as f64) / 4.0) * LimitLaw::quartic().moment(ell))
    } else {
        Ok(spontaneous_magnetization(beta)?.powi(ell as i32))
    }
}
